"""Command-line interface: generate inputs, run planners, verify and
render traces.

Exit codes: 0 success, 1 verification failure, 2 non-simple input,
3 parse error, 4 planner budget exhausted.  Any flag default can be
overridden with an environment variable named ``LINKFOLD_<FLAG>``.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import time

import numpy as np

from .convexify import convexify
from .generate import (
    GenerationError,
    fixture,
    random_closed_chain,
    random_open_chain,
    random_tree,
)
from .geom import GeometryError
from .model import (
    Chain,
    MotionTrace,
    NotSimpleError,
    Tree,
    read_chain,
    read_tree,
    verify_trace,
    write_chain,
    write_tree,
)
from .render import DEFAULT_FRAMES, render_trace
from .straighten import PlanningError, straighten_open, straighten_open_rd
from .trees import straighten_tree

EXIT_OK = 0
EXIT_VERIFY = 1
EXIT_NOT_SIMPLE = 2
EXIT_PARSE = 3
EXIT_BUDGET = 4


def _env_default(flag, fallback):
    return os.environ.get("LINKFOLD_" + flag.upper().replace("-", "_"),
                          fallback)


def _parser():
    p = argparse.ArgumentParser(
        prog="linkfold",
        description="straighten / convexify linkages in R^d (d >= 4)")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a random or fixture input")
    g.add_argument("kind", help="open-random | closed-random | tree-random"
                   " | fixture:<name>")
    g.add_argument("--d", type=int, default=int(_env_default("d", 4)))
    g.add_argument("--n", type=int, default=int(_env_default("n", 10)))
    g.add_argument("--seed", type=int,
                   default=int(_env_default("seed", 0)))
    g.add_argument("--out", required=True)

    r = sub.add_parser("run", help="plan a motion and write its trace")
    r.add_argument("algorithm", choices=["open", "open-rd", "tree", "closed"])
    r.add_argument("input")
    r.add_argument("--seed", type=int, default=int(_env_default("seed", 0)))
    r.add_argument("--eps", type=float, default=None)
    r.add_argument("--out", required=True)

    v = sub.add_parser("verify", help="independently re-check a trace")
    v.add_argument("input")
    v.add_argument("--samples", type=int,
                   default=int(_env_default("samples", 100)))
    v.add_argument("--eps", type=float, default=None)

    d = sub.add_parser("render", help="write SVG frames of a trace")
    d.add_argument("input")
    d.add_argument("--frames", default=_env_default(
        "frames", ",".join(str(f) for f in DEFAULT_FRAMES)))
    d.add_argument("--proj", default=None,
                   help="2*d comma-separated row-major matrix entries")
    d.add_argument("--scale", type=float,
                   default=float(_env_default("scale", 100)))
    d.add_argument("--out", required=True, help="output file prefix")
    return p


def cmd_generate(args):
    kind = args.kind
    if kind.startswith("fixture:"):
        obj = fixture(kind.split(":", 1)[1])
    elif kind == "open-random":
        obj = random_open_chain(args.n, args.d, args.seed)
    elif kind == "closed-random":
        obj = random_closed_chain(args.n, args.d, args.seed)
    elif kind == "tree-random":
        obj = random_tree(args.n, args.d, args.seed)
    else:
        raise GeometryError("unknown generate kind %r" % kind)
    if isinstance(obj, Tree):
        write_tree(obj, args.out)
    else:
        write_chain(obj, args.out)
    print("wrote %s (%s, d=%d, %d vertices)"
          % (args.out, kind, obj.d, obj.vertices.shape[0]))
    return EXIT_OK


def cmd_run(args):
    t0 = time.time()
    if args.algorithm == "tree":
        linkage = read_tree(args.input)
        trace = straighten_tree(linkage, seed=args.seed, eps=args.eps)
    else:
        linkage = read_chain(args.input)
        if args.algorithm == "closed":
            if not linkage.closed:
                raise GeometryError("algorithm 'closed' needs a closed chain")
            trace = convexify(linkage, seed=args.seed, eps=args.eps)
        elif args.algorithm == "open":
            trace = straighten_open(linkage, seed=args.seed, eps=args.eps)
        else:
            trace = straighten_open_rd(linkage, seed=args.seed, eps=args.eps)
    trace.save(args.out)
    n_moves = len(trace.steps)
    summary = {"algorithm": args.algorithm, "moves": n_moves,
               "wall_time_s": round(time.time() - t0, 3)}
    if args.algorithm in ("open", "open-rd"):
        n = linkage.n
        summary["move_bound_3n"] = 3 * n
        if n_moves > 3 * n:
            raise PlanningError("move count exceeds the 3n bound")
    if args.algorithm == "closed":
        summary["iterations"] = trace.meta.get("iterations")
    print(json.dumps(summary))
    return EXIT_OK


def cmd_verify(args):
    trace = MotionTrace.load(args.input)
    report = verify_trace(trace, samples=args.samples, eps=args.eps)
    out = {"ok": report.ok, "moves_checked": report.moves_checked,
           "samples_per_move": report.samples_per_move,
           "failures": [{"move": f.move_index, "tau": f.tau,
                         "reason": f.reason, "detail": list(f.detail)}
                        for f in report.failures]}
    print(json.dumps(out))
    return EXIT_OK if report.ok else EXIT_VERIFY


def cmd_render(args):
    trace = MotionTrace.load(args.input)
    frames = [float(f) for f in str(args.frames).split(",") if f != ""]
    proj = None
    if args.proj is not None:
        vals = [float(x) for x in args.proj.split(",")]
        d = trace.initial.shape[1]
        if len(vals) != 2 * d:
            raise GeometryError("projection needs %d entries" % (2 * d))
        proj = np.array(vals).reshape(2, d)
    paths = render_trace(trace, args.out, frames=frames, proj=proj,
                         scale=args.scale)
    print("\n".join(paths))
    return EXIT_OK


def main(argv=None):
    args = _parser().parse_args(argv)
    handlers = {"generate": cmd_generate, "run": cmd_run,
                "verify": cmd_verify, "render": cmd_render}
    try:
        return handlers[args.command](args)
    except NotSimpleError as exc:
        print("not simple: %s" % exc, file=sys.stderr)
        return EXIT_NOT_SIMPLE
    except (GenerationError, PlanningError) as exc:
        print("planner budget exhausted: %s" % exc, file=sys.stderr)
        return EXIT_BUDGET
    except (OSError, ValueError, KeyError, json.JSONDecodeError,
            GeometryError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
