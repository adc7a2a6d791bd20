"""Built-in smoke battery: a fast, seeded slice of the full test suite.

Five checks, each over freshly generated random instances: tensor eval
against the list-based reference, hard-loss soundness, finite-difference
gradient agreement, kernel stability on a coarse operand grid, and bitwise
determinism of repeated loss/gradient calls. The battery is meant for
installed-environment sanity (seconds), not as a substitute for the suite.
"""

from __future__ import annotations

from dataclasses import dataclass
from random import Random

from .formula import (
    COMPARISON_OPS,
    And,
    Atom,
    Always,
    Constraint,
    Eventually,
    FeatureRef,
    Or,
    StrongNext,
    StrongRelease,
    WeakNext,
    WeakUntil,
)
from .loss import gradient_check, loss, loss_and_grad
from .reference import eval_ref, loss_ref
from .semantics import TraceBatch, evaluate
from .smoothing import LN2, Gamma, max_gamma, min_gamma
from .tensor import Tensor


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def _random_constraint(rng: Random, n_features: int, depth: int) -> Constraint:
    if depth <= 0 or rng.random() < 0.3:
        return Atom(
            rng.choice(COMPARISON_OPS),
            FeatureRef(rng.randrange(n_features)),
            FeatureRef(rng.randrange(n_features)),
        )
    unary = (StrongNext, WeakNext, Always, Eventually)
    binary = (And, Or, WeakUntil, StrongRelease)
    node = rng.choice(unary + binary)
    if node in unary:
        return node(_random_constraint(rng, n_features, depth - 1))
    return node(
        _random_constraint(rng, n_features, depth - 1),
        _random_constraint(rng, n_features, depth - 1),
    )


def _random_instance(rng: Random) -> tuple[Constraint, list[list[float]], TraceBatch]:
    d0 = rng.randint(1, 5)
    d1 = rng.randint(1, 3)
    rows = [[rng.uniform(-1, 1) for _ in range(d1)] for _ in range(d0)]
    rho = _random_constraint(rng, d1, 3)
    return rho, rows, TraceBatch.from_rows(rows)


def _check_oracle(rng: Random, instances: int) -> CheckResult:
    for k in range(instances):
        rho, rows, trace = _random_instance(rng)
        for t in range(len(rows) + 1):
            got = bool(evaluate(rho, trace, t).elems[0])
            want = eval_ref(rho, rows, t)
            if got != want:
                return CheckResult(
                    "oracle-agreement", False, f"instance {k} diverges at t={t}"
                )
    return CheckResult(
        "oracle-agreement", True, f"{instances} instances match the reference"
    )


def _check_soundness(rng: Random, instances: int) -> CheckResult:
    for k in range(instances):
        rho, _, trace = _random_instance(rng)
        hard = loss(rho, trace, 0, 0.0).elems[0]
        sat = bool(evaluate(rho, trace, 0).elems[0])
        if hard < 0 or (hard == 0.0) != sat:
            return CheckResult(
                "loss-soundness", False, f"instance {k}: loss {hard!r}, eval {sat}"
            )
    return CheckResult(
        "loss-soundness", True, f"hard loss zero iff satisfied on {instances} instances"
    )


def _check_gradient(rng: Random, instances: int) -> CheckResult:
    worst = 0.0
    for k in range(instances):
        rho, _, trace = _random_instance(rng)
        report = gradient_check(rho, trace, 0, 0.05)
        worst = max(worst, report.max_rel_err)
        if not report.passed:
            return CheckResult(
                "gradient-fd",
                False,
                f"instance {k} fails at index {report.worst_index}: "
                f"analytic {report.worst_analytic!r} vs numeric {report.worst_numeric!r}",
            )
    return CheckResult(
        "gradient-fd", True, f"{instances} instances, max rel err {worst:.3g}"
    )


def _check_stability(rng: Random) -> CheckResult:
    gamma = 1e-3
    for _ in range(400):
        a = rng.uniform(-10, 10)
        b = rng.uniform(-10, 10)
        smax = max_gamma(a, b, gamma)
        smin = min_gamma(a, b, gamma)
        ok = (
            abs(smax - max(a, b)) <= gamma * LN2
            and abs(smin - min(a, b)) <= gamma * LN2
        )
        if not ok:
            return CheckResult("kernel-stability", False, f"drift at a={a!r}, b={b!r}")
    try:
        naive = max_gamma(-10.0, 10.0, Gamma(gamma, kernel_mode="naive"))
        blows_up = naive != naive or naive in (float("inf"), float("-inf"))
    except OverflowError:
        blows_up = True
    if not blows_up:
        return CheckResult(
            "kernel-stability", False, "naive kernel unexpectedly finite at (-10, 10)"
        )
    return CheckResult(
        "kernel-stability", True, "stable kernels within gamma*ln2 of hard; naive overflows"
    )


def _check_determinism(rng: Random, instances: int) -> CheckResult:
    for k in range(instances):
        rho, _, trace = _random_instance(rng)
        first = loss_and_grad(rho, trace, 0, 0.005)
        second = loss_and_grad(rho, trace, 0, 0.005)
        if first.value.elems != second.value.elems or first.grad.elems != second.grad.elems:
            return CheckResult("determinism", False, f"instance {k} not bitwise stable")
    return CheckResult(
        "determinism", True, f"loss and gradient bitwise stable on {instances} instances"
    )


def run_selftest(instances: int = 25, seed: int = 0) -> list[CheckResult]:
    rng = Random(seed)
    return [
        _check_oracle(rng, instances),
        _check_soundness(rng, instances),
        _check_gradient(rng, min(instances, 8)),
        _check_stability(rng),
        _check_determinism(rng, instances),
    ]
