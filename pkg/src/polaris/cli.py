"""Command-line front end.

Exit codes: 0 on success/pass, 1 when a checked property fails, 2 on usage
or I/O errors.  ``POLARIS_LOG=debug|info|quiet`` controls verbosity.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
import time
from pathlib import Path

from . import exchange
from .automata import is_bisimilar, natural_project, parallel_compose
from .errors import PolarisError
from .models import agent_alphabet, build_models
from .polar import PolarPartition
from .scenario import parse_scenario
from .sim import run_scenario
from .supervision import (
    check_controllability,
    check_decomposability,
    is_nonblocking,
    modular_supervisor,
    verify_decentralized,
)

log = logging.getLogger("polaris")

PASS, FAIL, USAGE = 0, 1, 2


def _setup_logging():
    level = {"debug": logging.DEBUG, "info": logging.INFO, "quiet": logging.ERROR}.get(
        os.environ.get("POLARIS_LOG", "info").lower(), logging.INFO
    )
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def _event_list(value: str):
    """Comma-separated event ids, or @FILE to use that automaton's alphabet."""
    if value.startswith("@"):
        return sorted(exchange.read(value[1:]).event_ids)
    return [tok for tok in value.split(",") if tok]


def _partition(value: str) -> PolarPartition:
    parts = value.split(",")
    if len(parts) != 3:
        raise PolarisError("--partition expects 'r_max,n_r,n_theta'")
    return PolarPartition(float(parts[0]), int(parts[1]), int(parts[2]))


def cmd_compose(args) -> int:
    result = parallel_compose(exchange.read(args.a), exchange.read(args.b))
    exchange.write(result, args.output)
    log.info("wrote %s (%d states)", args.output, len(result.states))
    return PASS


def cmd_project(args) -> int:
    a = exchange.read(args.a)
    result = natural_project(a, _event_list(args.keep))
    exchange.write(result, args.output)
    log.info("wrote %s (%d states)", args.output, len(result.states))
    return PASS


def cmd_bisim(args) -> int:
    verdict = is_bisimilar(exchange.read(args.a), exchange.read(args.b))
    if verdict:
        print("bisimilar")
        return PASS
    print(f"not bisimilar; distinguishing state pair: {verdict.counterexample}")
    return FAIL


def cmd_check_controllable(args) -> int:
    plant = exchange.read(args.plant)
    spec = exchange.read(args.spec)
    e_uc = {e.id for e in plant.alphabet if not e.controllable}
    report = check_controllability(spec, plant, e_uc)
    if report:
        print("controllable")
        return PASS
    print(
        "not controllable: after "
        f"{'.'.join(report.witness_string) or '<empty>'} the plant allows "
        f"uncontrollable {report.witness_event} but the spec does not"
    )
    return FAIL


def cmd_check_decomposable(args) -> int:
    a = exchange.read(args.automaton)
    report = check_decomposability(
        a, _event_list(args.events1), _event_list(args.events2), n=args.bound
    )
    print(report.summary())
    return PASS if report.decomposable else FAIL


def cmd_build_models(args) -> int:
    p = _partition(args.partition)
    outdir = Path(args.output)
    outdir.mkdir(parents=True, exist_ok=True)
    started = time.monotonic()
    models = build_models(p)
    files = {
        "a1.aut": models.plant1,
        "a2.aut": models.plant2,
        "af1.aut": models.formation1,
        "af2.aut": models.formation2,
        "ac.aut": models.collision,
        "ac1.aut": models.local1,
        "ac2.aut": models.local2,
    }
    for name, auto in files.items():
        exchange.write(auto, outdir / name)

    lines = [f"partition = {p.r_max:g},{p.n_r},{p.n_theta}"]
    joint_plant = parallel_compose(models.plant1, models.plant2)
    for k in (1, 2):
        plant = models.plant(k)
        e_uc = {e.id for e in plant.alphabet if not e.controllable}
        ok = bool(check_controllability(models.formation(k), plant, e_uc))
        lines.append(f"controllable_formation_{k} = {ok}")
    e_uc = {e.id for e in joint_plant.alphabet if not e.controllable}
    lines.append(
        "controllable_collision = "
        f"{bool(check_controllability(models.collision, joint_plant, e_uc))}"
    )
    e1 = frozenset(agent_alphabet(1, p).all_ids)
    e2 = frozenset(agent_alphabet(2, p).all_ids)
    report = check_decomposability(models.collision, e1, e2, n=3)
    lines.append(f"decomposable_collision = {report.decomposable}")
    lines.append(f"dc1 = {report.dc1}")
    lines.append(f"dc2 = {report.dc2}")
    lines.append(f"dc4 = {report.dc4}")
    verdict = verify_decentralized(
        models.plant1, models.plant2, models.collision,
        parallel_compose(models.collision, joint_plant),
    )
    lines.append(f"decentralized_equivalent = {verdict.satisfied}")
    closed = modular_supervisor(
        parallel_compose(models.formation1, models.formation2),
        models.collision,
        joint_plant,
    )
    lines.append(f"mission_nonblocking = {is_nonblocking(closed)}")
    lines.append(f"elapsed_s = {time.monotonic() - started:.2f}")
    text = "\n".join(lines) + "\n"
    (outdir / "report.txt").write_text(text, encoding="utf-8")
    print(text, end="")
    all_ok = all(
        line.split(" = ")[1] == "True"
        for line in lines
        if line.split(" = ")[0]
        in (
            "controllable_formation_1",
            "controllable_formation_2",
            "controllable_collision",
            "decomposable_collision",
            "decentralized_equivalent",
            "mission_nonblocking",
        )
    )
    return PASS if all_ok else FAIL


def cmd_simulate(args) -> int:
    cfg = parse_scenario(args.scenario)
    outdir = Path(args.output)
    outdir.mkdir(parents=True, exist_ok=True)
    result = run_scenario(cfg)
    (outdir / "trajectory.csv").write_text(result.csv_text(), encoding="utf-8")
    (outdir / "events.log").write_text(result.log_text(), encoding="utf-8")
    (outdir / "verdicts.txt").write_text(result.verdicts_text(), encoding="utf-8")
    (outdir / "controllers.txt").write_text(result.controllers, encoding="utf-8")
    print(result.verdicts_text(), end="")
    return PASS


def cmd_verify_theorem1(args) -> int:
    verdict = verify_decentralized(
        exchange.read(args.plant1),
        exchange.read(args.plant2),
        exchange.read(args.controller),
        exchange.read(args.spec),
    )
    print(f"centralized_matches_spec = {verdict.centralized_matches}")
    print(f"decentralized_matches_spec = {verdict.satisfied}")
    return PASS if verdict.satisfied else FAIL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="polaris",
        description="supervisory-control toolkit and formation-flight simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    q = sub.add_parser("compose", help="parallel composition of two automata")
    q.add_argument("a")
    q.add_argument("b")
    q.add_argument("-o", "--output", required=True)
    q.set_defaults(func=cmd_compose)

    q = sub.add_parser("project", help="natural projection onto an event set")
    q.add_argument("a")
    q.add_argument("--keep", required=True, help="comma-separated events or @FILE")
    q.add_argument("-o", "--output", required=True)
    q.set_defaults(func=cmd_project)

    q = sub.add_parser("bisim", help="bisimilarity check (exit 0 iff bisimilar)")
    q.add_argument("a")
    q.add_argument("b")
    q.set_defaults(func=cmd_bisim)

    q = sub.add_parser("check-controllable", help="controllability of a spec")
    q.add_argument("--plant", required=True)
    q.add_argument("--spec", required=True)
    q.set_defaults(func=cmd_check_controllable)

    q = sub.add_parser("check-decomposable", help="two-agent decomposability")
    q.add_argument("automaton")
    q.add_argument("--events1", required=True, help="comma-separated events or @FILE")
    q.add_argument("--events2", required=True, help="comma-separated events or @FILE")
    q.add_argument("--bound", type=int, default=8)
    q.set_defaults(func=cmd_check_decomposable)

    q = sub.add_parser("build-models", help="emit the formation model set")
    q.add_argument("--partition", required=True, help="r_max,n_r,n_theta")
    q.add_argument("-o", "--output", required=True)
    q.set_defaults(func=cmd_build_models)

    q = sub.add_parser("simulate", help="run a mission scenario")
    q.add_argument("--scenario", required=True)
    q.add_argument("-o", "--output", required=True)
    q.set_defaults(func=cmd_simulate)

    q = sub.add_parser("verify-theorem1", help="decentralized cooperation check")
    q.add_argument("--plant1", required=True)
    q.add_argument("--plant2", required=True)
    q.add_argument("--controller", required=True)
    q.add_argument("--spec", required=True)
    q.set_defaults(func=cmd_verify_theorem1)

    return parser


def main(argv=None) -> int:
    _setup_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (PolarisError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE


if __name__ == "__main__":
    sys.exit(main())
