import { NdArray, TensorJson, fromJson, toJson } from "./tensor.js";

/** Engine failure forwarded through the service's error envelope. */
export class ServiceError extends Error {
  constructor(
    readonly code: string,
    message: string,
    readonly status: number,
  ) {
    super(message);
    this.name = "ServiceError";
  }
}

interface ErrorEnvelope {
  error?: { code?: string; message?: string };
  detail?: unknown; // request-validation failures come back in FastAPI's shape
}

/**
 * Client for the constraint-loss service. This is the entire boundary: the
 * bindings never evaluate formulas themselves, every numeric result comes
 * from these four calls plus /health.
 */
export class ServiceClient {
  constructor(readonly baseUrl: string) {}

  private async request(method: string, path: string, body?: unknown): Promise<unknown> {
    const response = await fetch(this.baseUrl + path, {
      method,
      headers: { "content-type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (response.status === 204) {
      return undefined;
    }
    const payload = (await response.json()) as ErrorEnvelope;
    if (!response.ok) {
      const error = payload.error;
      if (error?.code && error.message) {
        throw new ServiceError(error.code, error.message, response.status);
      }
      throw new ServiceError(
        "validation",
        JSON.stringify(payload.detail ?? payload),
        response.status,
      );
    }
    return payload;
  }

  async health(): Promise<boolean> {
    try {
      const response = await fetch(this.baseUrl + "/health");
      return response.ok;
    } catch {
      return false;
    }
  }

  /** Parse once, reuse the handle across calls. */
  async parseFormula(text: string): Promise<string> {
    const out = (await this.request("POST", "/formulas", { formula: text })) as {
      handle: string;
    };
    return out.handle;
  }

  async free(handle: string): Promise<void> {
    await this.request("DELETE", `/formulas/${handle}`);
  }

  async loss(handle: string, trace: NdArray, t: number, gamma: number): Promise<NdArray> {
    const out = (await this.request("POST", "/loss", {
      handle,
      trace: toJson(trace),
      t,
      gamma,
    })) as { value: TensorJson };
    return fromJson(out.value);
  }

  async grad(handle: string, trace: NdArray, t: number, gamma: number): Promise<NdArray> {
    const out = (await this.request("POST", "/grad", {
      handle,
      trace: toJson(trace),
      t,
      gamma,
    })) as { grad: TensorJson };
    return fromJson(out.grad);
  }
}
