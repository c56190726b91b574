"""Bounded exploration: verdicts, counterexample replay, coverage."""

import pytest

from coda.checker import CheckConfig, coverage_report, explore
from coda.kernel import ModelIndex, check_invariants
from coda.parser import parse
from coda.validate import validate


def load(text):
    return validate(parse(text))


TOY_FULL = """
model toy
component A {
  var on: BOOL = false
  statemachine sm async {
    initial -> OFF
    state OFF { }
    state ON { }
    transition up: OFF -> ON links up
    transition down: ON -> OFF links down
  }
  operation up kind E { action on := true }
  operation down kind E { action on := false }
}
"""


def test_exhaustive_toy_model_reaches_full_coverage():
    res = explore(load(TOY_FULL), CheckConfig(max_time=3, env_bound=1))
    assert res.verdicts == {"deadlock": "holds-within-bounds",
                            "invariants": "holds-within-bounds"}
    assert res.never_fired == []
    assert res.coverage_fraction == 1.0
    assert "full coverage" in coverage_report(res)


def test_unreachable_transition_is_listed_uncovered():
    model = load("""
model unreach
component A {
  statemachine sm async {
    initial -> S
    state S { }
    state T { }
    transition never: S -> T links never
  }
  operation never kind T { guard false }
}
""")
    res = explore(model, CheckConfig(max_time=3))
    assert "A.never" in res.never_fired
    assert "A.sm.never" in res.never_fired
    assert "never fired" in coverage_report(res)


def test_deadlock_detected_with_replayable_trace():
    model = load("""
model stuck
component A {
  var armed: BOOL = false
  operation arm kind E {
    guard not armed
    action armed := true
    action self_wake(delay 2)
  }
  operation onWake kind S { guard not armed }
}
""")
    res = explore(model, CheckConfig(max_time=10, env_bound=1))
    assert res.verdicts["deadlock"] == "violated"
    ce = next(c for c in res.counterexamples if c.property == "deadlock")
    trace = ce.replay(model)
    from coda.kernel import enabled
    events, can_tick = enabled(model, trace.final_state)
    assert not events and not can_tick


def test_invariant_counterexample_replays_to_the_violation():
    model = load("""
model inv
component A {
  var n: NAT = 0
  statemachine sm async {
    initial -> RUN
    state RUN {
      invariant n < 2
    }
    transition bump: RUN -> RUN links bump
  }
  operation bump kind E { action n := n + 1 }
}
""")
    res = explore(model, CheckConfig(max_time=5, env_bound=3,
                                     stop_at_first=True))
    assert res.verdicts["invariants"] == "violated"
    ce = res.counterexamples[0]
    trace = ce.replay(model)
    violated = check_invariants(model, trace.final_state)
    assert violated and violated[0][1] == "RUN"


def test_wm1_all_seven_abstract_transitions_covered(models):
    res = explore(models["wm1"], CheckConfig(max_time=20, env_bound=2))
    for name in ("start", "abortWash", "washDone", "rinseToWash",
                 "rinseToSpin", "spinDone", "init_IDLE"):
        assert res.coverage[f"WM.wmsm.{name}"] > 0, name
    assert res.never_fired == []
    assert res.verdicts["deadlock"] == "holds-within-bounds"


def test_canonicalization_on_off_agree_on_small_bounds():
    model = load(TOY_FULL)
    small = dict(max_time=4, env_bound=1)
    a = explore(model, CheckConfig(canonicalize=True, **small))
    b = explore(model, CheckConfig(canonicalize=False, **small))
    assert a.verdicts == b.verdicts
    # firing counts are exploration artifacts; the covered set is semantic
    assert {k for k, v in a.coverage.items() if v > 0} == \
        {k for k, v in b.coverage.items() if v > 0}
    assert a.never_fired == b.never_fired
    # rebasing collapses translated states, so it must explore no more
    assert a.states_visited <= b.states_visited


def test_exploration_is_deterministic(models):
    cfg = CheckConfig(max_time=8, env_bound=2)
    r1 = explore(models["wm1"], cfg)
    r2 = explore(models["wm1"], cfg)
    assert r1.verdicts == r2.verdicts
    assert r1.coverage == r2.coverage
    assert r1.states_visited == r2.states_visited
    assert [c.steps for c in r1.counterexamples] == \
        [c.steps for c in r2.counterexamples]


def test_bound_exhaustion_is_a_verdict_not_a_crash():
    model = load("""
model big
component A {
  var n: NAT = 0
  operation grow kind E { action n := n + 1 }
}
""")
    res = explore(model, CheckConfig(max_time=50, max_states=40,
                                     env_bound=4))
    assert res.verdicts["deadlock"] == "bound-exhausted"
    assert res.states_visited <= 40
