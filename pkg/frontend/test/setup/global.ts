import { ChildProcess, spawn } from "node:child_process";
import { SERVICE_PORT, SERVICE_URL } from "./service.js";

let service: ChildProcess | undefined;

async function healthy(): Promise<boolean> {
  try {
    const res = await fetch(`${SERVICE_URL}/health`);
    return res.ok;
  } catch {
    return false;
  }
}

export async function setup(): Promise<void> {
  if (await healthy()) {
    return; // someone already runs the service; reuse it
  }
  const proc = spawn(
    "python3",
    ["-m", "uvicorn", "softltlf.service:app", "--port", String(SERVICE_PORT), "--log-level", "warning"],
    { stdio: ["ignore", "ignore", "pipe"] },
  );
  let stderr = "";
  proc.stderr?.on("data", (chunk: Buffer) => {
    stderr += chunk.toString();
  });
  service = proc;

  const deadline = Date.now() + 30_000;
  while (Date.now() < deadline) {
    if (proc.exitCode !== null) {
      throw new Error(`service exited with code ${proc.exitCode}\n${stderr}`);
    }
    if (await healthy()) {
      return;
    }
    await new Promise((resolve) => setTimeout(resolve, 200));
  }
  proc.kill("SIGTERM");
  throw new Error(`service never became healthy on port ${SERVICE_PORT}\n${stderr}`);
}

export async function teardown(): Promise<void> {
  const proc = service;
  if (!proc || proc.exitCode !== null) {
    return;
  }
  const gone = new Promise<void>((resolve) => proc.once("exit", () => resolve()));
  proc.kill("SIGTERM");
  await Promise.race([gone, new Promise((resolve) => setTimeout(resolve, 5_000))]);
  if (proc.exitCode === null) {
    proc.kill("SIGKILL");
  }
}
