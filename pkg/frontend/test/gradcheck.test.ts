import { describe, expect, it } from "vitest";
import {
  BoundConstraint,
  ConstraintLoss,
  ServiceClient,
  capacity,
  gradientCheck,
  mulberry32,
  ndarray,
} from "../src/index.js";
import { SERVICE_URL } from "./setup/service.js";

const COMPARISONS = ["<=", "<", "==", "!="] as const;

function constant(rand: () => number): string {
  return (Math.round((rand() * 2 - 1) * 1000) / 1000).toString();
}

function atom(rand: () => number, d1: number): string {
  const feature = `f${Math.floor(rand() * d1)}`;
  const other = rand() < 0.7 ? constant(rand) : `f${Math.floor(rand() * d1)}`;
  const [lhs, rhs] = rand() < 0.5 ? [feature, other] : [other, feature];
  return `${lhs} ${COMPARISONS[Math.floor(rand() * 4)]} ${rhs}`;
}

function formula(rand: () => number, d1: number, depth: number): string {
  if (depth === 0 || rand() < 0.3) {
    return atom(rand, d1);
  }
  const roll = rand();
  if (roll < 0.4) {
    const op = "GFNX"[Math.floor(rand() * 4)];
    return `${op} (${formula(rand, d1, depth - 1)})`;
  }
  const op = roll < 0.8 ? (rand() < 0.5 ? "&&" : "||") : rand() < 0.5 ? "U" : "R";
  return `(${formula(rand, d1, depth - 1)}) ${op} (${formula(rand, d1, depth - 1)})`;
}

describe("gradientCheck", () => {
  it("backward matches central differences at rel 1e-4 on 20 seeded instances", async () => {
    const client = new ServiceClient(SERVICE_URL);
    const rand = mulberry32(2024);
    for (let k = 0; k < 20; k++) {
      const d0 = 1 + Math.floor(rand() * 4);
      const d1 = 1 + Math.floor(rand() * 2);
      const dims = rand() < 0.5 ? [d0, d1] : [d0, d1, 2];
      const elems = Float64Array.from({ length: capacity(dims) }, () => rand() * 2 - 1);
      const text = formula(rand, d1, 1 + Math.floor(rand() * 2));
      const gamma = rand() < 0.5 ? 0.5 : 0.05;
      const t = Math.floor(rand() * d0);

      const bound = await BoundConstraint.bind(client, text, gamma);
      try {
        const report = await gradientCheck(new ConstraintLoss(bound), ndarray(dims, elems), t);
        expect(
          report.passed,
          `instance ${k} (${text}, gamma ${gamma}, t ${t}): ` +
            `worst |analytic - numeric| ${report.maxAbsErr} at element ${report.worstIndex}`,
        ).toBe(true);
      } finally {
        await bound.free();
      }
    }
  });
});
