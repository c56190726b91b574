"""Acceptance suite.

One test per acceptance criterion, each printing a PASS line with its
runtime; every bound and time budget is pinned here.  Run with
`pytest tests/test_acceptance.py -v -s`.
"""

import time

import pytest

from coda.checker import CheckConfig, explore
from coda.eventb import emit
from coda.golden import (GoldenRecord, compare, compare_refinement,
                         parse_golden, record)
from coda.kernel import (ModelIndex, RunConfig, apply_self_wake, apply_send,
                         enabled, enabled_events, fire, init, recv_value,
                         tick, tick_enabled)
from coda.loader import load_model, load_refinement
from coda.model import RefinesClause
from coda.parser import parse
from coda.refine import RefineConfig, build_spec, check_refinement
from coda.runner import replay, run
from coda.validate import validate
from conftest import MODEL_NAMES, SCENARIOS, model_path, scenario_for

import test_kernel_properties as walks


def _report(name, started):
    print(f"PASS {name} ({time.monotonic() - started:.1f}s)")


def test_semantics_formula_suite(models):
    """Every timed-translation formula, instantiated and checked."""
    started = time.monotonic()
    from tests_support_semantics import run_formula_suite
    run_formula_suite(models)
    elapsed = time.monotonic() - started
    assert elapsed < 5.0, f"formula suite took {elapsed:.1f}s (budget 5s)"
    _report("semantics-formula-suite", started)


def test_washing_machine_chain(models):
    started = time.monotonic()
    # all five levels validate (they were loaded through validate())
    for name in ("wm0", "wm1", "wm2", "wm3", "wm4"):
        assert models[name] is not None

    flawed = explore(models["wm2_flawed"],
                     CheckConfig(max_time=30, env_bound=2,
                                 stop_at_first=True))
    assert flawed.verdicts["invariants"] == "violated"
    ce = next(c for c in flawed.counterexamples
              if c.property == "invariants")
    assert "in(DOORLOCKED)" in ce.reason
    trace = replay(models["wm2_flawed"], ce.steps)
    door_moves = {}
    for r in trace.records:
        if r.label in ("DOOR.closeDoor", "DOOR.openDoor"):
            door_moves.setdefault(r.time, set()).add(r.label)
    assert any(len(ops) == 2 for ops in door_moves.values()), \
        "counterexample must close and reopen the door within one cycle"

    fixed = explore(models["wm2"], CheckConfig(max_time=30, env_bound=2,
                                               max_states=900_000))
    assert fixed.verdicts["invariants"] == "holds-within-bounds"
    assert fixed.verdicts["deadlock"] == "holds-within-bounds"
    assert fixed.never_fired == []
    assert fixed.coverage_fraction == 1.0

    elapsed = time.monotonic() - started
    assert elapsed < 60.0, f"washing-machine chain took {elapsed:.1f}s"
    _report("washing-machine-chain", started)


def test_io_refinement_trace(models):
    started = time.monotonic()
    index = ModelIndex(models["io1"])
    trace = run(index, scenario_for("io1"))
    records = trace.records

    set_a = [r for r in records if r.label == "Controller.SetA"]
    assert len(set_a) == 16, "exactly sixteen bit-send cycles on A"
    bit_arrivals = sorted(t for r in records for c, t, v in r.sends
                          if c == "A" and v is True)
    assert len(bit_arrivals) == 16
    last_bit_cycle = bit_arrivals[-1]

    enable = [r for r in records if r.label == "Device.Enable"]
    assert len(enable) == 1
    assert enable[0].time == last_bit_cycle, \
        "Enable must fire in the cycle the 16th bit arrives"
    final = trace.final_state
    assert final.var("Device", "bitsSeen") == 16
    assert final.var("Device", "deviceEnabled") is True

    machine_steps = [r.time for r in records
                     if any(qn == "Controller.iosm" for qn, _ in r.taken)]
    assert machine_steps == list(range(0, 66)), \
        "the synchronous machine fires exactly one transition per tick " \
        "while enabled"
    elapsed = time.monotonic() - started
    assert elapsed < 5.0, f"io trace inspection took {elapsed:.1f}s"
    _report("io-refinement-trace", started)


def test_refinement_checks(models):
    started = time.monotonic()
    for name in MODEL_NAMES:
        spec = build_spec(models[name], models[name], identity=True)
        v = check_refinement(spec, RefineConfig(max_time=4, env_bound=1))
        assert v.holds, f"{name} does not refine itself: {v.reason}"

    chain = [("wm1", 10, 2), ("wm2", 11, 2), ("wm3", 12, 1),
             ("wm4", 20, 1), ("io1", 66, 1)]
    for name, max_time, env in chain:
        spec = load_refinement(model_path(name))
        v = check_refinement(spec, RefineConfig(
            max_time=max_time, env_bound=env, max_states=600_000,
            report_strengthening=False))
        assert v.holds, f"{name}: {v.reason}"

    broken = build_spec(models["wm2"], models["wm1"],
                        RefinesClause("wm1.coda",
                                      state_map=(("LOCKINGDOOR", "IDLE"),)))
    v = check_refinement(broken, RefineConfig(max_time=8, env_bound=2))
    assert v.status == "violated"
    trace = replay(models["wm2"], v.steps)  # the failure step replays
    assert trace.records[-1].label == v.failed_event

    elapsed = time.monotonic() - started
    assert elapsed < 120.0, f"refinement checks took {elapsed:.1f}s"
    _report("refinement-checks", started)


def test_emitter_structural_checks(models):
    started = time.monotonic()
    for name in MODEL_NAMES:
        model = models[name]
        first = emit(model)
        assert first == emit(model), "byte determinism"
        ctx, mch = first
        assert mch.count("∈ ℕ ⇸") == \
            len(model.connectors) + len(model.components)
        for conn in model.connectors:
            assert mch.count(f"{conn.name} ∈ ℕ ⇸") == 1
        for comp in model.components:
            assert mch.count(f"{comp.name}_wakeup ∈ ℕ ⇸ WakeKind") == 1
        assert sum(1 for l in mch.splitlines()
                   if "current_time ∈ ℕ" in l) == 1
        tick_text = mch[mch.index("  tick ≙"):]
        tick_text = tick_text[:tick_text.index("    END")]
        got = [l.split(": ", 1)[1] for l in tick_text.splitlines()
               if "grd" in l]
        want = [f"¬ current_time ∈ dom({c.name})" for c in model.connectors]
        want += [f"¬ current_time ∈ dom({c.name}_wakeup)"
                 for c in model.components]
        assert got == want, f"{name}: tick guard complement"
    _report("emitter-structural-checks", started)


def test_oracle_properties(models):
    started = time.monotonic()
    for name in sorted(SCENARIOS):
        scn = scenario_for(name)
        golden = record(models[name], scn)
        assert record(models[name], scn).text() == golden.text()
        assert compare(models[name], scn,
                       parse_golden(golden.text())) is None, name

    # every single-record perturbation is caught at its exact index
    scn = scenario_for("wm1")
    golden = record(models["wm1"], scn)
    for i, rec in enumerate(golden.records):
        mutated = list(golden.records)
        mutated[i] = GoldenRecord(rec.time, rec.event, rec.binding,
                                  ("MUTANT",) + rec.values[1:])
        broken = parse_golden(golden.text())
        broken.records = tuple(mutated)
        report = compare(models["wm1"], scn, broken)
        assert report is not None and report.index == i

    spec = load_refinement(model_path("wm2"))
    assert compare_refinement(models["wm2"], scenario_for("wm2"),
                              golden, spec) is None
    _report("oracle-properties", started)


def test_kernel_randomized_properties(models):
    """At least ten thousand randomized kernel steps, each checking time
    monotonicity, the receive oracle, sync discipline, method atomicity and
    pruning equivalence."""
    started = time.monotonic()
    check, failures = walks.checker()
    total = 0
    toy = ModelIndex(validate(parse(walks.TOY)))
    wm2 = ModelIndex(models["wm2"])
    io1 = ModelIndex(models["io1"])
    methods = ModelIndex(validate(parse("""
model m
component C {
  var n: NAT = 0
  operation poke kind E { action call bump }
  operation bump kind M { action n := n + 1 }
}
""")))
    seed = 0
    while total < 10_000:
        seed += 1
        total += walks.random_walk(toy, seed, steps=40, check=check)
        total += walks.random_walk(methods, seed, steps=25, check=check)
        if seed % 3 == 0:
            total += walks.random_walk(
                wm2, seed, steps=50, check=check)
        if seed % 5 == 0:
            total += walks.random_walk(
                io1, seed, steps=60, config=RunConfig(env_bound=1),
                check=check)
    assert not failures, failures[:3]
    print(f"  randomized steps checked: {total}")
    _report("kernel-randomized-properties", started)
