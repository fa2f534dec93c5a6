"""Command-line entry points.

Exit codes: 0 success, 1 a requested check failed, 2 usage or input errors,
3 internal errors.
"""

from __future__ import annotations

import argparse
import json
import sys

from relim.core import (
    ArityError,
    ExpansionCapError,
    ParseError,
    Problem,
    parse_problem,
    serialize_problem,
)
from relim import family, games, netsim, rounds


class CheckFailure(Exception):
    """A verification ran to completion and the property does not hold."""


class InputError(Exception):
    """Bad file contents or inconsistent arguments."""


def _read_problem(path: str) -> Problem:
    with open(path) as fh:
        return parse_problem(fh.read())


def _emit(text: str, out_path) -> None:
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# Subcommand handlers


def _cmd_gen(args) -> int:
    if args.kind == "ghz":
        p = family.iterated_ghz(args.delta)
    elif args.kind == "chsh":
        p = family.iterated_chsh(args.delta)
    else:
        if args.i is None:
            raise InputError(f"gen {args.kind} requires --i")
        if args.kind == "pi":
            p = family.pi(args.i, args.delta)
        else:
            p = family.pi_prime(args.i, args.delta)
    _emit(serialize_problem(p), args.output)
    return 0


def _cmd_transform(args) -> int:
    p = _read_problem(args.file)
    op = rounds.re if args.op == "re" else rounds.rere
    _emit(serialize_problem(op(p, method=args.method)), args.output)
    return 0


def _cmd_diagram(args) -> int:
    p = _read_problem(args.file)
    _emit(rounds.diagram(p, args.side).to_dot() + "\n", args.output)
    return 0


def _cmd_merge(args) -> int:
    p = _read_problem(args.file)
    try:
        merged = rounds.merge_labels(p, args.a, args.b)
    except KeyError as exc:
        raise InputError(str(exc))
    _emit(serialize_problem(merged), args.output)
    return 0


def _cmd_heuristic(args) -> int:
    p = _read_problem(args.file)
    pair = rounds.heuristic_relax_step(p, side=args.side)
    if pair is None:
        print("no merge suggested")
        return 0
    print(f"merge {pair[0]} -> {pair[1]}")
    _emit(serialize_problem(rounds.merge_labels(p, *pair)), args.output)
    return 0


def _cmd_zero_round(args) -> int:
    p = _read_problem(args.file)
    witness = rounds.zero_round_solvable(p, colored=args.colored)
    if witness is None:
        print("UNSOLVABLE")
    elif isinstance(witness, dict):
        print("SOLVABLE " + " ".join(f"{c}:{lab}"
                                     for c, lab in sorted(witness.items())))
    else:
        print("SOLVABLE " + " ".join(witness))
    return 0


def _cmd_verify_sequence(args) -> int:
    cert = family.verify_sequence(args.delta, method=args.method)
    _emit(cert.to_json() + "\n", args.output)
    if not cert.valid:
        raise CheckFailure(f"sequence certificate invalid at delta="
                           f"{args.delta}")
    return 0


def _cmd_sim(args) -> int:
    summary = netsim.simulate_batch(args.kind, args.delta, args.n,
                                    args.seed, args.trials)
    print(f"pass rate {summary['passes']}/{summary['trials']}, "
          f"rounds {summary['rounds_min']}..{summary['rounds_max']}")
    if args.output:
        _emit(json.dumps(summary, indent=2) + "\n", args.output)
    if summary["passes"] != summary["trials"]:
        raise CheckFailure(json.dumps(summary["first_failure"]))
    return 0


def _cmd_check(args) -> int:
    p = _read_problem(args.file)
    with open(args.net) as fh:
        net = netsim.PortNetwork.from_json(fh.read())
    with open(args.labeling) as fh:
        raw = json.load(fh)
    labeling = {}
    for key, lab in raw.items():
        nid, port = key.rsplit(":", 1)
        labeling[(nid, int(port))] = lab
    ok, violations = netsim.check_labeling(p, net, labeling)
    if ok:
        print("OK")
        return 0
    for v in violations[:20]:
        print(json.dumps(v))
    raise CheckFailure(f"{len(violations)} violations")


def _cmd_game(args) -> int:
    with open(args.file) as fh:
        try:
            g = games.parse_game(fh.read())
        except games.GameFormatError as exc:
            raise InputError(str(exc))
    if args.what == "solvable":
        if games.is_solvable(g):
            print("solvable")
            return 0
        raise CheckFailure("not solvable")
    if args.what == "completable":
        rep = games.is_strongly_completable(g)
        if rep.ok:
            print("strongly completable")
            return 0
        print(f"not strongly completable; failing order "
              f"{','.join(map(str, rep.failing_order))}")
        raise CheckFailure("not strongly completable")
    # verify-ns: the uniform box over valid outputs
    if not games.is_solvable(g):
        raise CheckFailure("not solvable; no winning strategy exists")
    ok, detail = games.verify_ns_strategy(g, games.uniform_box(g))
    if ok:
        print("non-signaling winning strategy verified")
        return 0
    print(json.dumps(detail, default=str))
    raise CheckFailure("uniform box is not non-signaling")


def _cmd_serve(args) -> int:
    import uvicorn

    from relim.server import create_app
    uvicorn.run(create_app(), host=args.host, port=args.port)
    return 0


# ---------------------------------------------------------------------------
# Parser


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="relim",
        description="Round-elimination toolkit: problem generators, "
                    "re/rere operators, diagrams, verifiers and network "
                    "simulators.")
    sub = top.add_subparsers(dest="command", required=True)

    def out_opt(p):
        p.add_argument("-o", "--output", default=None,
                       help="write to FILE instead of stdout")

    p = sub.add_parser("gen", help="emit a built-in problem family member")
    p.add_argument("kind", choices=["ghz", "chsh", "pi", "pi-prime"])
    p.add_argument("--delta", type=int, required=True)
    p.add_argument("--i", type=int, default=None)
    out_opt(p)
    p.set_defaults(fn=_cmd_gen)

    for op in ("re", "rere"):
        p = sub.add_parser(op, help=f"apply the {op} operator")
        p.add_argument("file")
        p.add_argument("--method", choices=["combination", "direct"],
                       default="combination")
        out_opt(p)
        p.set_defaults(fn=_cmd_transform, op=op)

    p = sub.add_parser("diagram", help="emit the strength diagram as DOT")
    p.add_argument("file")
    p.add_argument("--side", choices=["white", "black"], required=True)
    out_opt(p)
    p.set_defaults(fn=_cmd_diagram)

    p = sub.add_parser("merge", help="identify two labels")
    p.add_argument("file")
    p.add_argument("a")
    p.add_argument("b")
    out_opt(p)
    p.set_defaults(fn=_cmd_merge)

    p = sub.add_parser("heuristic", help="apply one diagram-guided merge")
    p.add_argument("file")
    p.add_argument("--side", choices=["white", "black"], default="white")
    out_opt(p)
    p.set_defaults(fn=_cmd_heuristic)

    p = sub.add_parser("zero-round",
                       help="decide 0-round solvability; print a witness "
                            "or UNSOLVABLE")
    p.add_argument("file")
    p.add_argument("--colored", dest="colored", action="store_true",
                   default=True)
    p.add_argument("--uncolored", dest="colored", action="store_false")
    p.set_defaults(fn=_cmd_zero_round)

    p = sub.add_parser("verify-sequence",
                       help="verify the whole relaxation chain at a degree")
    p.add_argument("--delta", type=int, required=True)
    p.add_argument("--method", choices=["combination", "direct"],
                   default="combination")
    out_opt(p)
    p.set_defaults(fn=_cmd_verify_sequence)

    p = sub.add_parser("sim", help="run and check network simulations")
    p.add_argument("kind",
                   choices=["classical-ghz", "quantum-ghz", "games-net"])
    p.add_argument("--delta", type=int, required=True,
                   help="degree (or half-game count d for games-net)")
    p.add_argument("--n", type=int, required=True,
                   help="number of white nodes per instance")
    p.add_argument("--seed", default="0")
    p.add_argument("--trials", type=int, default=1)
    out_opt(p)
    p.set_defaults(fn=_cmd_sim)

    p = sub.add_parser("check", help="check a labeling file against a "
                                     "problem and network")
    p.add_argument("file")
    p.add_argument("--net", required=True)
    p.add_argument("--labeling", required=True)
    p.set_defaults(fn=_cmd_check)

    p = sub.add_parser("game", help="checks on game files")
    p.add_argument("what", choices=["completable", "verify-ns", "solvable"])
    p.add_argument("file")
    p.set_defaults(fn=_cmd_game)

    p = sub.add_parser("serve", help="start the HTTP service")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--host", default="127.0.0.1")
    p.set_defaults(fn=_cmd_serve)

    return top


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except CheckFailure as exc:
        print(f"FAIL: {exc}", file=sys.stderr)
        return 1
    except (InputError, ParseError, ArityError, FileNotFoundError,
            IsADirectoryError, json.JSONDecodeError,
            games.GameFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ExpansionCapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"internal error: {exc!r}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
