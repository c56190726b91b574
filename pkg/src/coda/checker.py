"""Bounded explicit-state exploration: deadlock detection, state-invariant
checking and transition coverage, with replayable counterexamples.

Time makes the raw state space infinite, so states are canonicalized with
times rebased relative to the current instant; exploration is additionally
bounded by a tick budget and a state budget.

This single-worker implementation is the reference semantics: verdicts,
coverage and counterexamples are fully deterministic.  A parallel frontier
would have to preserve exactly these results to be conformant.
"""

from __future__ import annotations

import time as _time
from collections import deque
from dataclasses import dataclass

from .exprs import to_text
from .kernel import (RunConfig, canonical_key, check_invariants,
                     enabled_events, fire, index_of, init,
                     initial_transition_names, tick, tick_enabled)


@dataclass(frozen=True)
class CheckConfig:
    max_time: int = 20
    max_states: int = 200_000
    env_bound: int = 4
    check_invariants: bool = True
    check_deadlock: bool = True
    canonicalize: bool = True
    all_violations: bool = False
    stop_at_first: bool = False  # stop the whole search on any violation

    def run_config(self):
        return RunConfig(env_bound=self.env_bound)


@dataclass
class Counterexample:
    property: str           # "invariants" | "deadlock"
    reason: str
    steps: list             # replayable [(label, binding), ...] from init
    time: int

    def replay(self, model_or_index, config=RunConfig()):
        from .runner import replay
        return replay(model_or_index, self.steps, config)


@dataclass
class CheckResult:
    verdicts: dict                   # property -> verdict string
    counterexamples: list
    coverage: dict                   # label -> fired count
    states_visited: int = 0
    frontier_peak: int = 0
    ticks_explored: int = 0
    wall_seconds: float = 0.0

    @property
    def never_fired(self):
        return sorted(k for k, v in self.coverage.items() if v == 0)

    @property
    def coverage_fraction(self):
        if not self.coverage:
            return 1.0
        hit = sum(1 for v in self.coverage.values() if v > 0)
        return hit / len(self.coverage)


def _coverage_universe(index):
    cov = {}
    for comp in index.model.components:
        for op in comp.operations:
            cov[f"{comp.name}.{op.name}"] = 0
        for m in comp.machines:
            for t in m.transitions:
                cov[f"{comp.name}.{m.name}.{t.name}"] = 0
    return cov


def explore(model_or_index, config=CheckConfig()) -> CheckResult:
    """Breadth-first search over canonicalized states, branching on every
    enabled event witness and on the tick."""
    index = index_of(model_or_index)
    rc = config.run_config()
    started = _time.monotonic()

    coverage = _coverage_universe(index)
    state0 = init(index)
    for qn, tname in initial_transition_names(index):
        comp = index.comp_of(qn)
        mname = qn.split(".", 1)[1]
        coverage[f"{comp}.{mname}.{tname}"] += 1

    def key_of(state):
        return canonical_key(state, rebase=config.canonicalize, index=index)

    key0 = key_of(state0)
    visited = {key0}
    parents = {key0: None}  # key -> (parent key, (label, binding))
    queue = deque([(state0, key0, 0)])
    frontier_peak = 1
    max_ticks = 0

    verdicts = {}
    counterexamples = []
    want = set()
    if config.check_invariants:
        want.add("invariants")
    if config.check_deadlock:
        want.add("deadlock")
    open_props = set(want)
    exhausted = False

    def path_to(key):
        steps = []
        while parents[key] is not None:
            key, step = parents[key]
            steps.append(step)
        steps.reverse()
        return steps

    while queue:
        if want and not open_props:
            break
        if config.stop_at_first and counterexamples:
            exhausted = True  # search cut short: open verdicts stay bounded
            break
        state, key, ticks = queue.popleft()
        max_ticks = max(max_ticks, ticks)

        if "invariants" in open_props or config.all_violations:
            for comp, sname, inv in check_invariants(index, state):
                counterexamples.append(Counterexample(
                    "invariants",
                    f"state invariant of {comp}/{sname} violated: "
                    f"{to_text(inv)}", path_to(key), state.time))
                verdicts["invariants"] = "violated"
                if not config.all_violations:
                    open_props.discard("invariants")
                break

        events = enabled_events(index, state, rc)
        can_tick = tick_enabled(index, state, rc, events)
        if not events and not can_tick:
            if "deadlock" in open_props or config.all_violations:
                counterexamples.append(Counterexample(
                    "deadlock", f"no event enabled at t={state.time}",
                    path_to(key), state.time))
                verdicts["deadlock"] = "violated"
                if not config.all_violations:
                    open_props.discard("deadlock")
            continue

        successors = []
        for ev in events:
            nxt, record = fire(index, state, ev, rc, trusted=True)
            if ev.kind != "TR":
                coverage[ev.label] += 1
            for qn, tname in record.taken:
                coverage[f"{index.comp_of(qn)}.{qn.split('.', 1)[1]}.{tname}"] += 1
            successors.append((nxt, ticks, (ev.label, ev.binding)))
        if can_tick and ticks < config.max_time:
            successors.append((tick(index, state, rc), ticks + 1,
                               ("tick", ())))

        for nxt, nticks, step in successors:
            nkey = key_of(nxt)
            if nkey in visited:
                continue
            if len(visited) >= config.max_states:
                exhausted = True
                break
            visited.add(nkey)
            parents[nkey] = (key, step)
            queue.append((nxt, nkey, nticks))
        frontier_peak = max(frontier_peak, len(queue))
        if exhausted:
            break

    for prop in want:
        if prop not in verdicts:
            verdicts[prop] = "bound-exhausted" if exhausted \
                else "holds-within-bounds"

    return CheckResult(verdicts, counterexamples, coverage,
                       states_visited=len(visited),
                       frontier_peak=frontier_peak,
                       ticks_explored=max_ticks,
                       wall_seconds=_time.monotonic() - started)


def coverage_report(result: CheckResult) -> str:
    """Human-readable coverage listing; flags full coverage explicitly."""
    lines = ["transition/operation coverage:"]
    for label in sorted(result.coverage):
        lines.append(f"  {result.coverage[label]:6d}  {label}")
    frac = result.coverage_fraction
    lines.append(f"covered: {frac:.0%} "
                 f"({sum(1 for v in result.coverage.values() if v > 0)}"
                 f"/{len(result.coverage)})")
    if not result.never_fired:
        lines.append("full coverage: every transition and operation fired")
    else:
        lines.append("never fired: " + ", ".join(result.never_fired))
    return "\n".join(lines)


def report(result: CheckResult) -> str:
    lines = []
    for prop in sorted(result.verdicts):
        lines.append(f"{prop}: {result.verdicts[prop]}")
    for ce in result.counterexamples:
        lines.append(f"counterexample [{ce.property}] at t={ce.time}: "
                     f"{ce.reason}")
        for label, binding in ce.steps:
            args = "".join(f" {k}={v}" for k, v in binding)
            lines.append(f"    {label}{args}")
    lines.append(f"states: {result.states_visited}  "
                 f"frontier peak: {result.frontier_peak}  "
                 f"ticks: {result.ticks_explored}  "
                 f"wall: {result.wall_seconds:.2f}s")
    lines.append(coverage_report(result))
    return "\n".join(lines)
