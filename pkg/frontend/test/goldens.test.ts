import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";
import { describe, expect, it } from "vitest";
import {
  BoundConstraint,
  ConstraintLoss,
  NdArray,
  ServiceClient,
  TensorJson,
  batchDims,
  fromJson,
  ones,
} from "../src/index.js";
import { SERVICE_URL } from "./setup/service.js";

interface Golden {
  formula: string;
  trace: TensorJson;
  t: number;
  gamma: number;
  loss: TensorJson;
  grad: TensorJson;
}

const here = dirname(fileURLToPath(import.meta.url));
const corpus = JSON.parse(readFileSync(join(here, "goldens.json"), "utf8")) as {
  seed: number;
  instances: Golden[];
};

// Object.is, not ===: the goldens pin the exact bits, signed zeros included.
function expectBitwise(got: NdArray, want: TensorJson, label: string): void {
  expect([...got.dims], `${label}: dims`).toEqual(want.dims);
  for (let i = 0; i < want.elems.length; i++) {
    if (!Object.is(got.data[i], want.elems[i])) {
      expect.fail(`${label}: element ${i} is ${got.data[i]}, the CLI printed ${want.elems[i]}`);
    }
  }
}

describe("frozen CLI corpus", () => {
  const client = new ServiceClient(SERVICE_URL);

  it("holds 50 instances", () => {
    expect(corpus.instances).toHaveLength(50);
  });

  it("forward reproduces every CLI loss bit for bit", async () => {
    for (const [i, inst] of corpus.instances.entries()) {
      const bound = await BoundConstraint.bind(client, inst.formula, inst.gamma);
      try {
        const value = await new ConstraintLoss(bound).forward(fromJson(inst.trace), inst.t);
        expectBitwise(value, inst.loss, `instance ${i} (${inst.formula})`);
      } finally {
        await bound.free();
      }
    }
  });

  it("backward with a ones upstream reproduces every CLI gradient bit for bit", async () => {
    for (const [i, inst] of corpus.instances.entries()) {
      const bound = await BoundConstraint.bind(client, inst.formula, inst.gamma);
      try {
        const trace = fromJson(inst.trace);
        const grad = await new ConstraintLoss(bound).backward(
          trace,
          inst.t,
          ones(batchDims(trace.dims)),
        );
        expectBitwise(grad, inst.grad, `instance ${i} (${inst.formula})`);
      } finally {
        await bound.free();
      }
    }
  });
});
