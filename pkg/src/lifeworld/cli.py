"""``lifeworld`` command line.

Exit codes: 0 success, 1 negative answer (unsolvable, not a reduction,
a failed claim, an unfinished kitchen run), 2 usage or input errors.
"""

from __future__ import annotations

import argparse
import sys
import time

from . import dsl
from .binding import SimpleProjection, is_binding, is_uniformly_reducible
from .env import DCP, shortest_path
from .schematic import ToolType, material_chain_reduction, tool_reduction

OK, NO, ERROR = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(ERROR)


def _load(path):
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    try:
        return dsl.elaborate(dsl.parse(text))
    except dsl.LwError as e:
        e.filename = path
        raise


def _fmt_state(s) -> str:
    return ",".join(str(x) for x in s)


def _parse_state(env, text: str):
    vals = [v.strip() for v in text.split(",")]
    if len(vals) != env.space.arity:
        raise UsageError(f"--from needs {env.space.arity} comma-separated values, got {len(vals)}")
    for v, d in zip(vals, env.components):
        if v not in d.values:
            raise UsageError(f"'{v}' is not a state of {d.name} (one of {', '.join(map(str, d.values))})")
    return tuple(vals)


def cmd_parse(args, out):
    el = _load(args.file)
    m = el.model
    print(f"{args.file}: ok: {len(m.types)} types, {len(m.actions)} actions, {len(m.objects)} objects, "
          f"{len(m.goals)} goals", file=out)
    return OK


def cmd_solve(args, out):
    el = _load(args.file)
    env = el.env
    if not el.model.goals:
        raise UsageError("the file declares no goals")
    s0 = _parse_state(env, args.start) if args.start else env.initial_state()
    found = shortest_path(DCP(env, el.goal), s0, args.max_steps)
    if found is None:
        print(f"unsolvable from {_fmt_state(s0)}" + (f" within {args.max_steps} steps" if args.max_steps else ""), file=out)
        return NO
    states, actions = found
    print(f"0\t\t{_fmt_state(states[0])}", file=out)
    for t, (a, s) in enumerate(zip(actions, states[1:]), 1):
        print(f"{t}\t{a}\t{_fmt_state(s)}", file=out)
    print(f"reached in {len(actions)} steps", file=out)
    return OK


def _names(env, indices) -> str:
    objs = getattr(env, "objects", None)
    return ", ".join(str(objs[i]) if objs else env.components[i].name for i in indices)


def _print_impl(impl, out):
    for a, b in impl.table.items():
        print(f"  {a} -> {b}", file=out)


def cmd_check_reduction(args, out):
    el = _load(args.file)
    env = el.env
    kind, _, arg = args.projection.partition(":")
    if kind == "chain":
        if env.space.arity != 1:
            raise UsageError("--projection chain needs a world with exactly one object")
        try:
            r = material_chain_reduction(env)
        except ValueError as e:
            print(f"not a chain: {e}", file=out)
            return NO
        print(f"chain reduction onto C_{len(r.chain)}: {' -> '.join(s[0] for s in r.chain)}", file=out)
        _print_impl(r.implementation, out)
        return OK
    if kind == "tool":
        k = _object_index(env, arg)
        t = el.model.types[env.object_types[k]]
        cert_ready = t.ready if isinstance(t, ToolType) else None
        try:
            red = tool_reduction(env, k, cert_ready)
        except ValueError as e:
            print(f"not a tool: {e}", file=out)
            return NO
        print(f"{arg} is a tool (ready {red.ready}); reduced world drops component {k}", file=out)
        _print_impl(red.implementation, out)
        return OK
    if kind == "select":
        if not args.target:
            raise UsageError("--projection select: needs --target <file.lw>")
        indices = tuple(_object_index(env, x) for x in arg.split(",") if x)
        target = _load(args.target).env
        try:
            pi = SimpleProjection(indices)
            b = is_binding(pi, env, target)
        except ValueError as e:
            raise UsageError(str(e))
        if not b:
            print(f"not a reduction: {b.reason}" + (f" (action {b.action} at {_fmt_state(b.state)})" if b.action else ""),
                  file=out)
            return NO
        print(f"binding ({_names(env, pi.indices)})", file=out)
        _print_impl(b.implementation, out)
        return OK
    raise UsageError(f"unknown projection '{args.projection}' (chain, tool:<id>, select:<id,...>)")


def _object_index(env, oid: str) -> int:
    try:
        return env.index_of(oid)
    except (KeyError, ValueError):
        raise UsageError(f"no object '{oid}' in the world")


def cmd_check_binding(args, out):
    world = _load(args.file).env
    schematic = _load(args.schematic).env
    try:
        rep = is_uniformly_reducible(world, schematic)
    except ValueError as e:
        raise UsageError(str(e))
    for b in rep.bindings:
        print(f"binding ({_names(world, b.indices)})", file=out)
        _print_impl(b.implementation, out)
    if rep:
        print(f"uniformly reducible: {len(rep.bindings)} bindings", file=out)
        return OK
    f = rep.failure
    names = _names(world, f.projection.indices)
    where = f" (action {f.action} at {_fmt_state(f.state)})" if f.action else ""
    print(f"not uniformly reducible: ({names}) is not a binding: {f.reason}{where}", file=out)
    return NO


def cmd_verify(args, out):
    from .verify import run_suites

    t0 = time.perf_counter()
    claims = run_suites(args.suite)
    for c in claims:
        print(c.line(), file=out)
    failed = sum(not c.ok for c in claims)
    print(f"{len(claims) - failed}/{len(claims)} claims pass in {time.perf_counter() - t0:.2f}s", file=out)
    return NO if failed else OK


def cmd_toast(args, out):
    from .kitchen import KitchenWorld, run_toast

    el = _load(args.file)
    if args.seed_ticks < 0:
        raise UsageError("--seed-ticks must be >= 0")
    tr = run_toast(KitchenWorld(el.model), start=args.seed_ticks)
    text = tr.format()
    if args.trace in (None, "-"):
        out.write(text)
    else:
        with open(args.trace, "w", encoding="utf-8") as fh:
            fh.write(text)
    status = "completed" if tr.completed else "did not finish"
    print(f"{status} in {tr.ticks} ticks, {len(tr.milestones())} milestones", file=sys.stderr)
    return OK if tr.completed else NO


def build_parser() -> argparse.ArgumentParser:
    from .verify import SUITES

    p = _Parser(prog="lifeworld", description="Compose, reduce and bind small control problems; run kitchen scenarios.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("solve", help="breadth-first search for the file's combined goal")
    s.add_argument("file")
    s.add_argument("--from", dest="start", metavar="STATE", help="comma-separated component values")
    s.add_argument("--max-steps", type=int, default=None, metavar="N")
    s.set_defaults(fn=cmd_solve)

    s = sub.add_parser("check-reduction", help="check a projection is a simple reduction")
    s.add_argument("file")
    s.add_argument("--projection", required=True, metavar="SPEC", help="chain | tool:<id> | select:<id,...>")
    s.add_argument("--target", metavar="FILE", help="schematic world for select:")
    s.set_defaults(fn=cmd_check_reduction)

    s = sub.add_parser("check-binding", help="check uniform reducibility onto a schematic world")
    s.add_argument("file")
    s.add_argument("--schematic", required=True, metavar="FILE")
    s.set_defaults(fn=cmd_check_binding)

    s = sub.add_parser("verify", help="run the exhaustive small-instance checks")
    s.add_argument("--suite", action="append", choices=list(SUITES) + ["all"], default=None)
    s.set_defaults(fn=cmd_verify)

    s = sub.add_parser("toast", help="run the kitchen simulator and write its trace")
    s.add_argument("file")
    s.add_argument("--trace", metavar="FILE", help="output file, '-' for standard output (the default)")
    s.add_argument("--seed-ticks", type=int, default=0, metavar="N", help="tick number of the first line")
    s.set_defaults(fn=cmd_toast)

    s = sub.add_parser("parse", help="syntax and validation check")
    s.add_argument("file")
    s.set_defaults(fn=cmd_parse)
    return p


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else ERROR
    if args.command == "verify" and args.suite is None:
        args.suite = ["all"]
    try:
        return args.fn(args, out)
    except dsl.LwError as e:
        print(e.format(getattr(e, "filename", args.file)), file=sys.stderr)
    except (OSError, UsageError) as e:
        print(f"lifeworld: error: {e}", file=sys.stderr)
    return ERROR


if __name__ == "__main__":
    sys.exit(main())
