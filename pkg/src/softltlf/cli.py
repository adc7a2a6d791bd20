"""Thin command-line client for the HTTP service.

Every command marshals its files into a request body and prints the
service's answer; no numeric work happens here. By default the app is
mounted in-process, so the CLI works with zero setup; --server points it
at a running instance instead, with identical behavior.

Formulas are literal text, or @path to read a file. Traces load from
.json tensor files or .csv tables (one time step per row). Exit codes:
0 success, 2 parse error, 3 bad data or shape, 4 divergence, 5 gradient
check failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import httpx

from .errors import DataError
from .tensor_io import load_trace, tensor_to_json
from .trajectory import (
    ExperimentResult,
    Trajectory,
    history_csv,
    trajectory_csv,
    write_artifacts,
)

_EXIT_BY_CODE = {
    "parse": 2,
    "shape": 3,
    "bounds": 3,
    "data": 3,
    "unknown_handle": 3,
    "divergence": 4,
}


class CliFailure(Exception):
    def __init__(self, exit_code: int, message: str):
        super().__init__(message)
        self.exit_code = exit_code
        self.message = message


def _client(server: str | None):
    if server is not None:
        return httpx.Client(base_url=server)
    import warnings

    with warnings.catch_warnings():
        # the in-process client nags about its httpx backend on import;
        # not actionable for end users of the CLI
        warnings.simplefilter("ignore")
        from fastapi.testclient import TestClient

    from .service import create_app

    return TestClient(create_app())


def _post(client, path: str, body: dict) -> dict:
    try:
        response = client.post(path, json=body)
    except httpx.HTTPError as exc:
        raise CliFailure(1, f"cannot reach the service: {exc}") from None
    if response.status_code >= 400:
        try:
            error = response.json()["error"]
        except Exception:
            raise CliFailure(
                1, f"unexpected response {response.status_code}: {response.text}"
            ) from None
        code = error.get("code", "")
        raise CliFailure(
            _EXIT_BY_CODE.get(code, 1), f"{code}: {error.get('message', '')}"
        )
    return response.json()


def _formula_text(value: str) -> str:
    if value.startswith("@"):
        path = Path(value[1:])
        try:
            return path.read_text().strip()
        except OSError as exc:
            raise CliFailure(3, f"cannot read formula file {path}: {exc}") from None
    return value


def _trace_body(path: str) -> dict:
    try:
        trace = load_trace(path)
    except DataError as exc:
        raise CliFailure(3, str(exc)) from None
    return tensor_to_json(trace.tensor)


def _load_trajectory(path: str) -> dict:
    try:
        obj = json.loads(Path(path).read_text())
    except OSError as exc:
        raise CliFailure(3, f"cannot read trajectory file {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise CliFailure(3, f"invalid trajectory JSON: {exc}") from None
    if not isinstance(obj, dict) or "positions" not in obj:
        raise CliFailure(3, 'a trajectory file is a JSON object with "positions"')
    return obj


def _print_json(obj: object) -> None:
    print(json.dumps(obj, indent=2, sort_keys=True))


def _loss_body(args) -> dict:
    return {
        "formula": _formula_text(args.formula),
        "trace": _trace_body(args.trace),
        "t": args.t,
        "gamma": args.gamma,
        "kernel": "naive" if args.naive else "stable",
    }


def cmd_eval(client, args) -> int:
    body = {
        "formula": _formula_text(args.formula),
        "trace": _trace_body(args.trace),
        "t": args.t,
    }
    print(json.dumps(_post(client, "/eval", body)["result"]))
    return 0


def cmd_loss(client, args) -> int:
    print(json.dumps(_post(client, "/loss", _loss_body(args))["value"]))
    return 0


def cmd_grad(client, args) -> int:
    print(json.dumps(_post(client, "/grad", _loss_body(args))["grad"]))
    return 0


def cmd_gradcheck(client, args) -> int:
    body = {
        "formula": _formula_text(args.formula),
        "trace": _trace_body(args.trace),
        "t": args.t,
        "gamma": args.gamma,
        "tolerance": args.tolerance,
    }
    if args.corrupt_index is not None:
        body["corrupt_index"] = args.corrupt_index
    report = _post(client, "/gradcheck", body)
    _print_json(report)
    return 0 if report["passed"] else 5


def _history_rows(rows: list[dict]) -> tuple[tuple[int, float, float, float], ...]:
    return tuple((r["step"], r["total"], r["ltlf"], r["dynamical"]) for r in rows)


def _trajectory_from_body(obj: dict) -> Trajectory:
    return Trajectory(
        tuple((x, y) for x, y in obj["positions"]),
        tuple((x, y) for x, y in obj["velocities"]) if obj.get("velocities") else None,
        obj.get("dt", 1.0),
        obj.get("fixed_endpoints", True),
    )


def cmd_experiment(client, args) -> int:
    body = {"seed": args.seed}
    for field, value in (
        ("steps", args.steps),
        ("learning_rate", args.lr),
        ("gamma", args.gamma),
        ("ltlf_weight", args.eta),
    ):
        if value is not None:
            body[field] = value
    result = _post(client, f"/experiments/{args.name}", body)
    if args.out is not None:
        run = ExperimentResult(
            name=result["name"],
            config=result["config"],
            trajectory=_trajectory_from_body(result["trajectory"]),
            history=_history_rows(result["history"]),
            verdict=result["verdict"],
        )
        write_artifacts(run, Path(args.out))
    _print_json(result["verdict"])
    return 0


def cmd_optimize(client, args) -> int:
    body = {
        "formula": _formula_text(args.formula),
        "trajectory": _load_trajectory(args.trajectory),
        "gamma": args.gamma,
        "ltlf_weight": args.eta,
        "dynamical_weight": args.dyn_weight,
        "steps": args.steps,
        "learning_rate": args.lr,
        "momentum": args.momentum,
    }
    result = _post(client, "/optimize", body)
    if args.out is not None:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        traj = _trajectory_from_body(result["trajectory"])
        (out / "trajectory.csv").write_text(trajectory_csv(traj))
        (out / "loss_history.csv").write_text(history_csv(_history_rows(result["history"])))
        return 0
    _print_json(result)
    return 0


def cmd_selftest(client, args) -> int:
    result = _post(client, "/selftest", {"instances": args.instances, "seed": args.seed})
    for check in result["checks"]:
        status = "PASS" if check["passed"] else "FAIL"
        print(f"{status} {check['name']}: {check['detail']}")
    return 0 if result["passed"] else 1


def _add_formula_trace_args(sub, gamma_default: float | None) -> None:
    sub.add_argument("formula", help="formula text, or @path to a formula file")
    sub.add_argument("trace", help="trace file (.json tensor or .csv)")
    sub.add_argument("--t", type=int, default=0, help="evaluation time step")
    if gamma_default is not None:
        sub.add_argument("--gamma", type=float, default=gamma_default)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="softltlf",
        description="Temporal-constraint loss engine client",
    )
    parser.add_argument("--server", help="service URL; default runs in-process")
    # accepted after the subcommand too; SUPPRESS keeps the subparser copy
    # from clobbering a value given before it
    remote = argparse.ArgumentParser(add_help=False)
    remote.add_argument(
        "--server",
        default=argparse.SUPPRESS,
        help="service URL; default runs in-process",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    sub = commands.add_parser(
        "eval", help="boolean semantics of a formula on a trace", parents=[remote]
    )
    _add_formula_trace_args(sub, None)
    sub.set_defaults(run=cmd_eval)

    for name, runner, doc in (
        ("loss", cmd_loss, "smooth loss tensor"),
        ("grad", cmd_grad, "loss gradient with respect to the trace"),
    ):
        sub = commands.add_parser(name, help=doc, parents=[remote])
        _add_formula_trace_args(sub, 0.005)
        mode = sub.add_mutually_exclusive_group()
        mode.add_argument("--stable", dest="naive", action="store_false", default=False)
        mode.add_argument(
            "--naive",
            dest="naive",
            action="store_true",
            help="naive kernels, for differential testing only",
        )
        sub.set_defaults(run=runner)

    sub = commands.add_parser(
        "gradcheck",
        help="compare the gradient to finite differences",
        parents=[remote],
    )
    _add_formula_trace_args(sub, 0.005)
    sub.add_argument("--tolerance", type=float, default=1e-4)
    sub.add_argument("--corrupt-index", type=int, default=None, help=argparse.SUPPRESS)
    sub.set_defaults(run=cmd_gradcheck)

    sub = commands.add_parser(
        "experiment", help="run a named experiment preset", parents=[remote]
    )
    sub.add_argument("name")
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--steps", type=int, default=None)
    sub.add_argument("--lr", type=float, default=None)
    sub.add_argument("--gamma", type=float, default=None)
    sub.add_argument("--eta", type=float, default=None, help="constraint loss weight")
    sub.add_argument("--out", default=None, help="directory for run artifacts")
    sub.set_defaults(run=cmd_experiment)

    sub = commands.add_parser(
        "optimize", help="gradient-descend a trajectory file", parents=[remote]
    )
    sub.add_argument("formula", help="formula text, or @path to a formula file")
    sub.add_argument("trajectory", help="trajectory JSON file")
    sub.add_argument("--gamma", type=float, default=0.005)
    sub.add_argument("--eta", type=float, default=1.0, help="constraint loss weight")
    sub.add_argument("--dyn-weight", type=float, default=0.0)
    sub.add_argument("--steps", type=int, default=500)
    sub.add_argument("--lr", type=float, default=1e-3)
    sub.add_argument("--momentum", type=float, default=0.0)
    sub.add_argument("--out", default=None, help="directory for trajectory/history CSVs")
    sub.set_defaults(run=cmd_optimize)

    sub = commands.add_parser(
        "selftest", help="run the built-in smoke battery", parents=[remote]
    )
    sub.add_argument("--instances", type=int, default=25)
    sub.add_argument("--seed", type=int, default=0)
    sub.set_defaults(run=cmd_selftest)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    client = _client(args.server)
    try:
        return args.run(client, args)
    except CliFailure as failure:
        print(failure.message, file=sys.stderr)
        return failure.exit_code
    finally:
        client.close()


if __name__ == "__main__":
    sys.exit(main())
