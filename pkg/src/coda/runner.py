"""Scenario-driven deterministic runs and the trace text format.

A scenario schedules environment stimuli; everything else the run fires
greedily under a documented deterministic policy (scenario order, then
component name, then operation name) until only the clock can move.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Optional, Tuple

from .diagnostics import (DeadlockReached, Diagnostic, KernelError,
                          ParseFailure, ScheduleUnsatisfiable, SourceSpan)
from .kernel import (EventRecord, RunConfig, RuntimeState, enabled_events,
                     fire, index_of, init, tick, tick_enabled, tick_record)

_CYCLE_FIRING_CAP = 10_000


@dataclass(frozen=True)
class ScenarioEvent:
    time: int
    comp: str
    op: str
    binding: Tuple[Tuple[str, object], ...] = ()


@dataclass(frozen=True)
class Scenario:
    name: str = "scenario"
    events: Tuple[ScenarioEvent, ...] = ()
    max_time: int = 20
    observe: Tuple[str, ...] = ()
    expect_deadlock: bool = False

    def content_hash(self):
        parts = [self.name, str(self.max_time), str(self.expect_deadlock),
                 ",".join(self.observe)]
        for e in self.events:
            parts.append(f"{e.time}:{e.comp}.{e.op}:"
                         + ",".join(f"{k}={fmt_value(v)}" for k, v in e.binding))
        return hashlib.sha256("|".join(parts).encode()).hexdigest()


def fmt_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    return str(v)


def parse_value(text: str):
    if text == "true":
        return True
    if text == "false":
        return False
    if text.lstrip("-").isdigit():
        return int(text)
    return text


def parse_scenario(text: str, file="<scenario>") -> Scenario:
    name = "scenario"
    events = []
    max_time = 20
    observe = []
    expect_deadlock = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("//")[0].strip()
        if not line:
            continue
        span = SourceSpan(file, lineno, 1, lineno, max(1, len(raw)))
        words = line.split()
        try:
            if words[0] == "scenario":
                name = words[1]
            elif words[0] == "max_time":
                max_time = int(words[1])
            elif words[0] == "observe":
                observe.extend(words[1:])
            elif words[0] == "policy":
                if words[1] != "lexicographic":
                    raise ValueError(
                        f"unknown policy '{words[1]}' (v1 has only "
                        "'lexicographic')")
            elif words[0] == "expect_deadlock":
                expect_deadlock = True
            elif words[0] == "at":
                t = int(words[1])
                if words[2] != "fire":
                    raise ValueError("expected 'fire'")
                comp, op = words[3].split(".", 1)
                binding = []
                if len(words) > 4:
                    if words[4] != "with":
                        raise ValueError("expected 'with'")
                    for pair in " ".join(words[5:]).split(","):
                        k, v = pair.strip().split("=", 1)
                        binding.append((k.strip(), parse_value(v.strip())))
                events.append(ScenarioEvent(t, comp, op,
                                            tuple(sorted(binding))))
            else:
                raise ValueError(f"unknown directive '{words[0]}'")
        except (IndexError, ValueError) as e:
            raise ParseFailure([Diagnostic(
                "error", "scenario", f"bad scenario line: {e}", span)])
    events.sort(key=lambda e: e.time)  # stable: file order within a tick
    return Scenario(name, tuple(events), max_time, tuple(observe),
                    expect_deadlock)


def parse_scenario_file(path) -> Scenario:
    with open(path, encoding="utf-8") as fh:
        return parse_scenario(fh.read(), file=str(path))


@dataclass
class Trace:
    records: Tuple[EventRecord, ...]
    final_state: RuntimeState
    deadlocked: bool = False
    states: Optional[Tuple[RuntimeState, ...]] = None  # after each record

    def events(self):
        return [r for r in self.records if not r.is_tick]


# ---------------------------------------------------------------------------


def _find_event(events, comp, op, binding):
    for ev in events:
        if ev.comp == comp and ev.name == op and ev.binding == binding:
            return ev
    return None


def run(model_or_index, scenario: Scenario, config=RunConfig(),
        keep_states=False) -> Trace:
    """Deterministic run: at each cycle fire the due scheduled stimuli in
    scenario order, then drain enabled non-environment events in policy
    order, then tick.  Stops at max_time, or at a deadlock (an error unless
    the scenario declares expect_deadlock)."""
    index = index_of(model_or_index)
    state = init(index)
    records = []
    states = []

    def step(new_state, rec):
        nonlocal state
        state = new_state
        records.append(rec)
        if keep_states:
            states.append(new_state)

    def done(deadlocked=False):
        return Trace(tuple(records), state, deadlocked,
                     tuple(states) if keep_states else None)

    due = {}
    for ev in scenario.events:
        due.setdefault(ev.time, []).append(ev)
    for now in range(scenario.max_time + 1):
        for sev in due.get(now, []):
            options = enabled_events(index, state, config)
            op_decl = index.ops.get((sev.comp, sev.op))
            if op_decl is None or op_decl.kind != "E":
                raise ScheduleUnsatisfiable(
                    f"scenario names {sev.comp}.{sev.op} which is not an "
                    "environment operation")
            ev = _find_event(options, sev.comp, sev.op, sev.binding)
            if ev is None:
                raise ScheduleUnsatisfiable(
                    f"{sev.comp}.{sev.op} not enabled at t={now} with "
                    "the given arguments")
            step(*fire(index, state, ev, config, trusted=True))
        for _ in range(_CYCLE_FIRING_CAP):
            options = [e for e in enabled_events(index, state, config)
                       if e.kind != "E"]
            if not options:
                break
            step(*fire(index, state, options[0], config, trusted=True))
        else:
            raise KernelError(f"runaway cycle at t={now}: more than "
                              f"{_CYCLE_FIRING_CAP} firings without a tick")
        if now == scenario.max_time:
            break
        if tick_enabled(index, state, config):
            rec = tick_record(state)
            step(tick(index, state, config), rec)
        else:
            if scenario.expect_deadlock:
                return done(deadlocked=True)
            raise DeadlockReached(f"deadlock at t={now}", state, done(True))
    return done()


def replay(model_or_index, steps, config=RunConfig()) -> Trace:
    """Re-drive the kernel from a list of (label, binding) pairs where label
    is "comp.op" / "comp.machine.transition" / "tick"."""
    index = index_of(model_or_index)
    state = init(index)
    records = []
    for label, binding in steps:
        if label == "tick":
            records.append(tick_record(state))
            state = tick(index, state, config)
            continue
        comp, name = label.split(".", 1)
        ev = _find_event(enabled_events(index, state, config), comp, name,
                         binding)
        if ev is None:
            raise KernelError(f"replay: {label} not enabled at t={state.time}")
        state, rec = fire(index, state, ev, config)
        records.append(rec)
    return Trace(tuple(records), state)


# ---------------------------------------------------------------------------
# trace text format: one record per line, bit-exact for identical inputs


def record_to_line(r: EventRecord) -> str:
    if r.is_tick:
        return f"{r.time} tick"
    head = f"{r.time} fire {r.comp}.{r.name}"
    for k, v in r.binding:
        head += f" {k}={fmt_value(v)}"
    parts = [head]
    if r.moves:
        parts.append("move " + " ".join(f"{m}:{a}->{b}" for m, a, b in r.moves))
    if r.assigns:
        parts.append("set " + " ".join(f"{k}={fmt_value(v)}"
                                       for k, v in r.assigns))
    if r.sends:
        parts.append("send " + " ".join(f"{c}@{t}={fmt_value(v)}"
                                        for c, t, v in r.sends))
    if r.wake_sets:
        parts.append("wake " + " ".join(f"{c}@{t}" for c, t in r.wake_sets))
    if r.calls:
        parts.append("call " + " ".join(r.calls))
    for w in r.warnings:
        parts.append(f"warn {w}")
    return " | ".join(parts)


def trace_to_text(trace: Trace) -> str:
    lines = [record_to_line(r) for r in trace.records]
    if trace.deadlocked:
        lines.append(f"{trace.final_state.time} deadlock")
    return "\n".join(lines) + "\n"


def parse_trace_steps(text: str):
    """Extract replayable (label, binding) steps from trace text."""
    steps = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        head = line.split(" | ")[0].split()
        if len(head) >= 2 and head[1] == "tick":
            steps.append(("tick", ()))
        elif len(head) >= 3 and head[1] == "fire":
            binding = tuple(sorted(
                (kv.split("=", 1)[0], parse_value(kv.split("=", 1)[1]))
                for kv in head[3:]))
            steps.append((head[2], binding))
        elif len(head) >= 2 and head[1] == "deadlock":
            continue
        else:
            raise KernelError(f"unreadable trace line: {line!r}")
    return steps


# ---------------------------------------------------------------------------
# observations (used by the golden oracle and the animator)


def observation_value(index, state: RuntimeState, name: str):
    """name is Comp.var or Comp.machine; machines observe their active leaf."""
    if name in index.machines:
        return state.configs.get(name, "@inactive")
    comp, _, var = name.partition(".")
    if comp in state.vars and var in state.vars[comp]:
        return state.vars[comp][var]
    raise KeyError(name)


def observation_exists(index, name: str) -> bool:
    if name in index.machines:
        return True
    comp, _, var = name.partition(".")
    comp_decl = index.components.get(comp)
    return bool(comp_decl) and any(v.name == var for v in comp_decl.variables)
