#!/usr/bin/env python3
"""Freeze CLI outputs for the bindings' golden tests.

Runs the installed softltlf CLI on 50 seeded random instances and records
formula, trace, t, gamma, and the printed loss and gradient tensors in
test/goldens.json. The bindings replay each instance through the service
and must reproduce the numbers bit for bit, so regenerate only when the
engine's numerics intentionally change.
"""

from __future__ import annotations

import json
import random
import subprocess
import sys
import tempfile
from pathlib import Path

SEED = 20260816
INSTANCES = 50
GAMMAS = (0.5, 0.05, 0.005, 0.0)
BATCH_SHAPES = ((), (2,), (2, 1))
COMPARISONS = ("<=", "<", "==", "!=")


def constant(rng: random.Random) -> str:
    return str(round(rng.uniform(-1.0, 1.0), 3))


def atom(rng: random.Random, d1: int) -> str:
    feature = f"f{rng.randrange(d1)}"
    other = constant(rng) if rng.random() < 0.7 else f"f{rng.randrange(d1)}"
    lhs, rhs = (feature, other) if rng.random() < 0.5 else (other, feature)
    return f"{lhs} {rng.choice(COMPARISONS)} {rhs}"


def formula(rng: random.Random, d1: int, depth: int) -> str:
    if depth == 0 or rng.random() < 0.3:
        return atom(rng, d1)
    roll = rng.random()
    if roll < 0.4:
        return f"{rng.choice('GFNX')} ({formula(rng, d1, depth - 1)})"
    if roll < 0.8:
        op = rng.choice(("&&", "||"))
        return f"({formula(rng, d1, depth - 1)}) {op} ({formula(rng, d1, depth - 1)})"
    op = rng.choice(("U", "R"))
    return f"({formula(rng, d1, depth - 1)}) {op} ({formula(rng, d1, depth - 1)})"


def run_cli(command: str, text: str, trace_path: str, t: int, gamma: float) -> dict:
    proc = subprocess.run(
        ["softltlf", command, text, trace_path, "--t", str(t), "--gamma", str(gamma)],
        capture_output=True,
        text=True,
    )
    if proc.returncode != 0:
        raise RuntimeError(f"softltlf {command} exited {proc.returncode}: {proc.stderr}")
    return json.loads(proc.stdout)


def main() -> None:
    rng = random.Random(SEED)
    records = []
    with tempfile.NamedTemporaryFile("w", suffix=".json", delete=False) as handle:
        trace_path = handle.name
    try:
        for _ in range(INSTANCES):
            d0 = rng.randint(1, 5)
            d1 = rng.randint(1, 3)
            dims = [d0, d1, *rng.choice(BATCH_SHAPES)]
            count = 1
            for d in dims:
                count *= d
            elems = [rng.uniform(-1.0, 1.0) for _ in range(count)]
            text = formula(rng, d1, rng.randint(0, 3))
            # t == d0 included: the past-end base case is part of the contract
            t = rng.randint(0, d0)
            gamma = rng.choice(GAMMAS)

            Path(trace_path).write_text(json.dumps({"dims": dims, "elems": elems}))
            records.append(
                {
                    "formula": text,
                    "trace": {"dims": dims, "elems": elems},
                    "t": t,
                    "gamma": gamma,
                    "loss": run_cli("loss", text, trace_path, t, gamma),
                    "grad": run_cli("grad", text, trace_path, t, gamma),
                }
            )
    finally:
        Path(trace_path).unlink()

    out = Path(__file__).resolve().parent.parent / "test" / "goldens.json"
    out.write_text(json.dumps({"seed": SEED, "instances": records}, indent=2) + "\n")
    print(f"wrote {len(records)} instances to {out}", file=sys.stderr)


if __name__ == "__main__":
    main()
