"""Command line front end.

Exit codes: 0 success, 1 a property failed (invalid model, invariant or
deadlock counterexample, refinement violation, golden divergence), 2 usage
or I/O errors.
"""

from __future__ import annotations

import argparse
import os
import sys

from .checker import CheckConfig, explore, report as check_report
from .diagnostics import (CodaError, DeadlockReached, ModelError,
                          ParseFailure)
from .eventb import emit, emit_refinement
from .golden import compare, compare_refinement, parse_golden, record
from .kernel import RunConfig
from .loader import load_model, load_refinement
from .parser import parse_file
from .refine import RefineConfig, check_refinement, report as refine_report
from .runner import parse_scenario_file, run, trace_to_text
from .validate import diagnose


def _run_config(args):
    return RunConfig(env_bound=args.env_bound,
                     strict_collisions=getattr(args, "strict_collisions",
                                               False))


def cmd_validate(args):
    failed = False
    for path in args.files:
        model = parse_file(path)
        diags = diagnose(model)
        for d in diags:
            print(str(d), file=sys.stderr)
        errors = [d for d in diags if d.severity == "error"]
        if errors:
            failed = True
            print(f"{path}: INVALID ({len(errors)} errors)")
        else:
            print(f"{path}: ok ({len(model.components)} components, "
                  f"{len(model.connectors)} connectors)")
    return 1 if failed else 0


def cmd_simulate(args):
    model = load_model(args.file)
    scenario = parse_scenario_file(args.scenario)
    try:
        trace = run(model, scenario, _run_config(args))
    except DeadlockReached as e:
        if e.trace is not None:
            sys.stdout.write(trace_to_text(e.trace))
        print(f"deadlock: {e}", file=sys.stderr)
        return 1
    text = trace_to_text(trace)
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_check(args):
    model = load_model(args.file)
    config = CheckConfig(max_time=args.max_time, max_states=args.max_states,
                         env_bound=args.env_bound,
                         stop_at_first=args.stop_at_first,
                         all_violations=args.all_violations)
    result = explore(model, config)
    print(check_report(result))
    if result.counterexamples and args.output:
        from .runner import replay
        for i, ce in enumerate(result.counterexamples):
            trace = ce.replay(model, config.run_config())
            path = args.output if len(result.counterexamples) == 1 \
                else f"{args.output}.{i}"
            with open(path, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(trace_to_text(trace))
            print(f"counterexample written to {path}", file=sys.stderr)
    return 1 if result.counterexamples else 0


def cmd_refine(args):
    spec = load_refinement(args.file, args.spec)
    config = RefineConfig(max_time=args.max_time, max_states=args.max_states,
                          env_bound=args.env_bound)
    verdict = check_refinement(spec, config)
    print(refine_report(spec, verdict))
    return 0 if verdict.status != "violated" else 1


def cmd_emit(args):
    model = load_model(args.file)
    ctx_text, mch_text = emit(model)
    if model.refines is not None:
        mch_text = emit_refinement(load_refinement(args.file))
    os.makedirs(args.output, exist_ok=True)
    base = os.path.join(args.output, model.name)
    for suffix, text in ((".ctx.eventb", ctx_text), (".mch.eventb", mch_text)):
        with open(base + suffix, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        print(base + suffix)
    return 0


def cmd_record(args):
    model = load_model(args.file)
    scenario = parse_scenario_file(args.scenario)
    try:
        golden = record(model, scenario, _run_config(args))
    except DeadlockReached as e:
        print(f"deadlock while recording: {e}", file=sys.stderr)
        return 1
    with open(args.output, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(golden.text())
    print(args.output)
    return 0


def cmd_compare(args):
    model = load_model(args.file)
    scenario = parse_scenario_file(args.scenario)
    with open(args.golden, encoding="utf-8") as fh:
        golden = parse_golden(fh.read())
    if args.project_refinement:
        spec = load_refinement(args.file)
        divergence = compare_refinement(model, scenario, golden, spec,
                                        _run_config(args))
    else:
        divergence = compare(model, scenario, golden, _run_config(args))
    if divergence is None:
        print("pass")
        return 0
    print(str(divergence))
    return 1


def cmd_serve(args):
    from .server import serve
    serve(bind=args.bind, port=args.port, config=_run_config(args),
          undo_depth=args.undo_depth, ui_dir=args.ui)
    return 0


def build_parser():
    p = argparse.ArgumentParser(
        prog="coda",
        description="Toolkit for timed communicating component models "
                    "(.coda files): validate, simulate, model-check, "
                    "refinement-check, emit Event-B text, record and compare "
                    "golden traces, and serve the interactive animator.")
    sub = p.add_subparsers(dest="command", required=True)

    def common_run(sp):
        sp.add_argument("--env-bound", type=int, default=4,
                        help="environment operations allowed per cycle")
        sp.add_argument("--policy", choices=["lexicographic"],
                        default="lexicographic",
                        help="within-cycle tie-break policy (v1 has one)")

    sp = sub.add_parser("validate", help="parse and validate models")
    sp.add_argument("files", nargs="+")
    sp.set_defaults(fn=cmd_validate)

    sp = sub.add_parser("simulate", help="run a scenario, print the trace")
    sp.add_argument("file")
    sp.add_argument("--scenario", required=True)
    sp.add_argument("-o", "--output")
    sp.add_argument("--strict-collisions", action="store_true")
    common_run(sp)
    sp.set_defaults(fn=cmd_simulate)

    sp = sub.add_parser("check", help="bounded deadlock/invariant check")
    sp.add_argument("file")
    sp.add_argument("--max-time", type=int, default=20)
    sp.add_argument("--max-states", type=int, default=200_000)
    sp.add_argument("--stop-at-first", action="store_true")
    sp.add_argument("--all-violations", action="store_true")
    sp.add_argument("-o", "--output", help="counterexample trace file")
    common_run(sp)
    sp.set_defaults(fn=cmd_check)

    sp = sub.add_parser("refine", help="bounded forward-simulation check")
    sp.add_argument("file", help="concrete model with a refines clause")
    sp.add_argument("--spec", help="standalone .refines companion file")
    sp.add_argument("--max-time", type=int, default=12)
    sp.add_argument("--max-states", type=int, default=200_000)
    common_run(sp)
    sp.set_defaults(fn=cmd_refine)

    sp = sub.add_parser("emit", help="emit Event-B context and machine text")
    sp.add_argument("file")
    sp.add_argument("-o", "--output", default=".")
    sp.set_defaults(fn=cmd_emit)

    sp = sub.add_parser("record", help="record a golden trace")
    sp.add_argument("file")
    sp.add_argument("--scenario", required=True)
    sp.add_argument("-o", "--output", required=True)
    common_run(sp)
    sp.set_defaults(fn=cmd_record)

    sp = sub.add_parser("compare", help="compare a run against a golden")
    sp.add_argument("file")
    sp.add_argument("--scenario", required=True)
    sp.add_argument("--golden", required=True)
    sp.add_argument("--project-refinement", action="store_true",
                    help="project through the model's refines clause onto "
                         "the abstract golden")
    common_run(sp)
    sp.set_defaults(fn=cmd_compare)

    sp = sub.add_parser("serve", help="run the local HTTP/JSON service")
    sp.add_argument("--port", type=int,
                    default=int(os.environ.get("CODA_PORT", "8787")))
    sp.add_argument("--bind", default="127.0.0.1")
    sp.add_argument("--undo-depth", type=int, default=1000)
    sp.add_argument("--ui", help="directory of built animator assets")
    common_run(sp)
    sp.set_defaults(fn=cmd_serve)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (ParseFailure, ModelError) as e:
        for d in e.diagnostics:
            print(str(d), file=sys.stderr)
        return 1
    except FileNotFoundError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except CodaError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
