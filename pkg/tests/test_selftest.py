"""The built-in smoke battery should pass and be reproducible."""

from softltlf.selftest import run_selftest


def test_all_checks_pass():
    checks = run_selftest(instances=40, seed=0)
    assert [c.name for c in checks] == [
        "oracle-agreement",
        "loss-soundness",
        "gradient-fd",
        "kernel-stability",
        "determinism",
    ]
    assert all(c.passed for c in checks), [c.detail for c in checks if not c.passed]


def test_same_seed_same_report():
    first = run_selftest(instances=10, seed=3)
    second = run_selftest(instances=10, seed=3)
    assert first == second


def test_different_seeds_still_pass():
    for seed in range(5):
        assert all(c.passed for c in run_selftest(instances=10, seed=seed))
