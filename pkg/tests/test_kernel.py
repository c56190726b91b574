"""Unit tests for the execution kernel: channel and wake-queue semantics,
enabledness of each operation kind, firing, and the tick discipline."""

import pytest

from coda.diagnostics import (DeadlockReached, KernelError, NotEnabled,
                              ScheduleUnsatisfiable)
from coda.kernel import (ModelIndex, RunConfig, RuntimeState, apply_self_wake,
                         apply_send, enabled, enabled_events, fire, init,
                         recv_value, tick, tick_blockers, tick_enabled)
from coda.parser import parse
from coda.runner import parse_scenario, replay, run
from coda.validate import validate


def load(text):
    return ModelIndex(validate(parse(text)))


def bare_state(time=0, **kw):
    base = dict(time=time, channels={}, wakes={}, vars={}, configs={},
                fired=frozenset())
    base.update(kw)
    return RuntimeState(**base)


class TestChannels:
    def test_recv_takes_most_recent_past(self):
        st = bare_state(9, channels={"c": {5: "a", 8: "b"}})
        assert recv_value(st, "c") == "b"

    def test_recv_ignores_future_only(self):
        st = bare_state(9, channels={"c": {12: "c"}})
        assert recv_value(st, "c") is None

    def test_delivery_visible_at_exactly_its_time(self):
        st = bare_state(9, channels={"c": {9: "v", 12: "w"}})
        assert recv_value(st, "c") == "v"

    def test_send_writes_at_now_plus_delay(self):
        st = bare_state(10)
        st2, warn = apply_send(st, "lock", True, 3)
        assert st2.channels["lock"] == {13: True}
        assert warn is None
        assert st.channels == {}  # purity

    def test_zero_delay_is_receivable_this_cycle(self):
        st, _ = apply_send(bare_state(7), "c", "v", 0)
        assert recv_value(st, "c") == "v"

    def test_same_slot_collision_last_write_wins(self):
        st, _ = apply_send(bare_state(0), "c", "first", 2)
        st, warn = apply_send(st, "c", "second", 2)
        assert st.channels["c"][2] == "second"
        assert "collision" in warn

    def test_negative_delay_rejected(self):
        with pytest.raises(KernelError):
            apply_send(bare_state(0), "c", 1, -1)


class TestWakes:
    def test_wake_at_now_plus_delay(self):
        st = apply_self_wake(bare_state(4), "WM", "DEFAULT", 3)
        assert st.wakes["WM"] == {7: "DEFAULT"}

    def test_zero_delay_wake_due_this_cycle(self):
        st = apply_self_wake(bare_state(4), "WM", "DEFAULT", 0)
        assert 4 in st.wakes["WM"]

    def test_same_slot_wakes_collapse(self):
        st = apply_self_wake(bare_state(0), "WM", "DEFAULT", 2)
        st = apply_self_wake(st, "WM", "DEFAULT", 2)
        assert st.wakes["WM"] == {2: "DEFAULT"}


PINGPONG = """
model pingpong
connector c: NAT from A to B
component A {
  var sent: NAT = 0
  operation push kind E {
    action port_send(c, sent, delay 1)
    action sent := sent + 1
  }
}
component B {
  var got: NAT = 0
  operation recv_it kind P wakes c {
    param n: NAT
    guard recv(c) = n
    action got := n
  }
}
"""


class TestEnabled:
    def test_p_op_enabled_only_at_exact_delivery_time(self):
        index = load(PINGPONG)
        st = init(index)
        evs, can_tick = enabled(index, st)
        assert [e.label for e in evs] == ["A.push"]
        assert can_tick
        st, _ = fire(index, st, evs[0])         # delivers at t=1
        evs, can_tick = enabled(index, st)
        assert all(e.label != "B.recv_it" for e in evs)
        assert can_tick
        st = tick(index, st)
        evs, can_tick = enabled(index, st)
        assert any(e.label == "B.recv_it" and e.binding == (("n", 0),)
                   for e in evs)
        assert not can_tick  # pending delivery blocks the clock

    def test_tick_unblocks_after_group_fires(self):
        index = load(PINGPONG)
        st = init(index)
        st, _ = fire(index, st, enabled_events(index, st)[0])
        st = tick(index, st)
        ev = next(e for e in enabled_events(index, st)
                  if e.label == "B.recv_it")
        st, rec = fire(index, st, ev)
        assert st.var("B", "got") == 0
        assert tick_enabled(index, st)
        # the entry is not deleted; the group flag is what admits the tick
        assert 1 in st.channels["c"]

    def test_p_group_fires_at_most_once_per_cycle(self):
        index = load(PINGPONG)
        st = init(index)
        st, _ = fire(index, st, enabled_events(index, st)[0])
        st = tick(index, st)
        ev = next(e for e in enabled_events(index, st)
                  if e.label == "B.recv_it")
        st, _ = fire(index, st, ev)
        assert all(e.label != "B.recv_it"
                   for e in enabled_events(index, st))
        with pytest.raises(NotEnabled):
            fire(index, st, ev)

    def test_wake_enables_s_ops_exactly_at_due_time(self):
        index = load("""
model waker
component W {
  var done: BOOL = false
  operation arm kind E { action self_wake(delay 2) }
  operation onWake kind S { action done := true }
}
""")
        st = init(index)
        st, _ = fire(index, st, enabled_events(index, st)[0])
        assert all(e.label != "W.onWake" for e in enabled_events(index, st))
        st = tick(index, st)
        assert all(e.label != "W.onWake" for e in enabled_events(index, st))
        st = tick(index, st)
        evs = enabled_events(index, st)
        assert any(e.label == "W.onWake" for e in evs)
        assert not tick_enabled(index, st)  # due wake blocks the clock
        st, _ = fire(index, st, next(e for e in evs
                                     if e.label == "W.onWake"))
        assert tick_enabled(index, st)

    def test_due_wake_with_no_matching_guard_deadlocks(self):
        index = load("""
model stuck
component W {
  var armed: BOOL = false
  operation arm kind E {
    guard not armed
    action armed := true
    action self_wake(delay 1)
  }
  operation onWake kind S {
    guard not armed
  }
}
""")
        st = init(index)
        st, _ = fire(index, st, enabled_events(index, st)[0])
        st = tick(index, st)
        evs, can_tick = enabled(index, st, RunConfig(env_bound=0))
        assert not evs and not can_tick  # nothing fireable: deadlock

    def test_env_ops_bounded_per_cycle(self):
        index = load(PINGPONG)
        st = init(index)
        config = RunConfig(env_bound=2)
        for _ in range(2):
            ev = next(e for e in enabled_events(index, st, config)
                      if e.label == "A.push")
            st, _ = fire(index, st, ev, config)
        assert all(e.label != "A.push"
                   for e in enabled_events(index, st, config))
        st = tick(index, st, config)  # budget resets with the clock
        assert any(e.label == "A.push"
                   for e in enabled_events(index, st, config))


METHODS = """
model methods
component C {
  var n: NAT = 0
  operation poke kind E { action call bump }
  operation bump kind M { action n := n + 1 }
}
"""


class TestMethods:
    def test_call_enables_method_and_blocks_tick(self):
        index = load(METHODS)
        st = init(index)
        st, rec = fire(index, st, enabled_events(index, st)[0])
        assert rec.calls == ("bump",)
        assert st.pending == ("C.bump",)
        blockers = tick_blockers(index, st)
        assert any(b["kind"] == "method" for b in blockers)
        ev = next(e for e in enabled_events(index, st)
                  if e.label == "C.bump")
        st, _ = fire(index, st, ev)
        assert st.pending == ()
        assert st.var("C", "n") == 1
        assert tick_enabled(index, st)

    def test_method_without_call_is_disabled(self):
        index = load(METHODS)
        st = init(index)
        assert all(e.label != "C.bump" for e in enabled_events(index, st))


class TestTransitions:
    def test_superstate_sourced_transition_fires_from_any_substate(self,
                                                                   models):
        index = ModelIndex(models["wm2"])
        scn = parse_scenario("""
max_time 5
at 0 fire DOOR.closeDoor
""")
        trace = run(index, scn)
        st = trace.final_state
        assert st.config("DOOR", "doorsm") == "DOORUNLOCKED"
        # lockDoor is drawn from the DOORCLOSED superstate: force a lock now
        st2, warn = apply_send(st, "lock", True, 0)
        ev = next(e for e in enabled_events(index, st2)
                  if e.label == "DOOR.lockDoor")
        st3, rec = fire(index, st2, ev)
        assert st3.config("DOOR", "doorsm") == "DOORLOCKED"
        assert rec.moves == (("doorsm", "DOORUNLOCKED", "DOORLOCKED"),)

    def test_transition_to_superstate_descends_region_initials(self, models):
        index = ModelIndex(models["wm2"])
        scn = parse_scenario("""
max_time 4
at 0 fire DOOR.closeDoor
at 2 fire CP.UserStart with p=QUICK
""")
        st = run(index, scn).final_state
        # start targets WASHING; the region initial puts it in LOCKINGDOOR
        assert st.config("WM", "wmsm") == "LOCKINGDOOR"

    def test_unsynchronised_transition_needs_decreasing_variant(self):
        index = load("""
model variants
component C {
  var fuel: NAT = 2
  variant fuel
  statemachine sm async {
    initial -> GO
    state GO { }
    transition spin unsync: GO -> GO links burn
  }
  operation burn kind T unsync {
    action fuel := max(fuel - 1, 1)
  }
}
""")
        st = init(index)
        ev = next(e for e in enabled_events(index, st)
                  if e.label == "C.burn")
        st, _ = fire(index, st, ev)
        assert st.var("C", "fuel") == 1
        ev = next(e for e in enabled_events(index, st)
                  if e.label == "C.burn")
        with pytest.raises(KernelError) as err:
            fire(index, st, ev)  # 1 -> 1 does not decrease the variant
        assert "variant" in str(err.value)


class TestInit:
    def test_minimal_model_starts_empty(self):
        index = load("model m component A { operation e kind E { } }")
        st = init(index)
        assert st.time == 0 and not st.channels and not st.wakes

    def test_wm_machine_starts_idle(self, models):
        st = init(ModelIndex(models["wm1"]))
        assert st.config("WM", "wmsm") == "IDLE"

    def test_method_linked_initial_starts_inactive(self, models):
        index = ModelIndex(models["io1"])
        st = init(index)
        assert st.config("Controller", "iosm") == "@inactive"
        # the machine is enabled only once RecvPowerUp's method call lands
        scn = parse_scenario("max_time 1\nat 0 fire Controller.RecvPowerUp")
        st = run(index, scn).final_state
        assert st.config("Controller", "iosm") == "WSETB"


class TestTick:
    def test_tick_advances_by_exactly_one(self):
        index = load("model m component A { operation e kind E { } }")
        st = init(index)
        assert tick(index, st).time == 1

    def test_tick_not_enabled_with_due_wake(self):
        index = load("""
model w
component A {
  operation arm kind E { action self_wake(delay 0) }
  operation onWake kind S { }
}
""")
        st = init(index)
        st, _ = fire(index, st, enabled_events(index, st)[0])
        with pytest.raises(NotEnabled):
            tick(index, st)

    def test_pruning_keeps_latest_past_and_future(self):
        st = bare_state(5, channels={"c": {3: "a", 9: "b", 1: "z"}})
        index = load("""
model m
connector c: NAT from A to B
component A { operation e kind E { action port_send(c, 1, delay 1) } }
component B { operation r kind P wakes c { } }
""")
        st2 = tick(index, st)
        assert st2.channels["c"] == {3: "a", 9: "b"}
        assert recv_value(st2, "c") == recv_value(st, "c")

    def test_sync_machine_must_fire_before_tick(self, models):
        index = ModelIndex(models["io1"])
        scn = parse_scenario("max_time 1\nat 0 fire Controller.RecvPowerUp")
        st = run(index, scn).final_state  # t=1, iosm in WSETB after SetA
        # undoing nothing: at t=1 machine fired already; craft t=2 fresh
        st = tick(index, st)
        blockers = tick_blockers(index, st)
        assert any(b["kind"] == "sync-machine" for b in blockers)


class TestRun:
    def test_empty_scenario_means_only_ticks(self):
        index = load("model m component A { operation e kind E { } }")
        trace = run(index, parse_scenario("max_time 10"))
        assert len(trace.records) == 10
        assert all(r.is_tick for r in trace.records)
        assert trace.final_state.time == 10

    def test_wm1_scenario_sends_running_on_wmstate(self, models):
        from conftest import scenario_for
        trace = run(ModelIndex(models["wm1"]), scenario_for("wm1"))
        sends = [(c, t, v) for r in trace.records for c, t, v in r.sends]
        assert ("WMSTATE", 4, "RUNNING") in sends
        assert any(r.label == "CP.Running" and dict(r.binding)["s"] == "RUNNING"
                   for r in trace.records)

    def test_scenario_of_unknown_or_wrong_kind_is_unsatisfiable(self, models):
        index = ModelIndex(models["wm1"])
        with pytest.raises(ScheduleUnsatisfiable):
            run(index, parse_scenario("max_time 3\nat 0 fire WM.start"))

    def test_deadlock_reported_with_partial_trace(self):
        index = load("""
model d
component A {
  var armed: BOOL = false
  operation arm kind E { guard not armed
    action armed := true
    action self_wake(delay 1) }
  operation onWake kind S { guard not armed }
}
""")
        scn = parse_scenario("max_time 5\nat 0 fire A.arm")
        with pytest.raises(DeadlockReached) as err:
            run(index, scn)
        assert err.value.trace is not None
        # and an expect_deadlock scenario treats it as a normal outcome
        scn2 = parse_scenario("max_time 5\nexpect_deadlock\nat 0 fire A.arm")
        trace = run(index, scn2)
        assert trace.deadlocked

    def test_replay_reproduces_a_run(self, models):
        from conftest import scenario_for
        index = ModelIndex(models["wm2"])
        trace = run(index, scenario_for("wm2"))
        steps = [("tick", ()) if r.is_tick else (r.label, r.binding)
                 for r in trace.records]
        again = replay(index, steps)
        assert [r.label for r in again.records] == \
            [r.label for r in trace.records]
        assert again.final_state == trace.final_state
