"""Golden-trace regression: record reference runs, compare runs against
them, and compare a refinement's run against its abstraction's golden.

Same-level comparison is exact, record by record.  Refinement comparison is
per-observable: each abstract observable must go through the same sequence
of values (stutters collapsed), because a refinement retimes behaviour but
must not change what the observables do.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Optional, Tuple

from .diagnostics import FormatError, GoldenError, StaleGolden
from .kernel import RunConfig, SEMANTICS_VERSION, index_of
from .printer import print_model
from .runner import (Scenario, fmt_value, observation_exists,
                     observation_value, parse_value, run)

GOLDEN_FORMAT = "codagolden 1"


class UnmappedObservation(GoldenError):
    pass


@dataclass(frozen=True)
class GoldenRecord:
    time: int
    event: str                                   # "init" | "tick" | label
    binding: Tuple[Tuple[str, object], ...]
    values: Tuple[object, ...]                   # one per observed name

    def line(self, observe):
        head = f"{self.time} {self.event}"
        for k, v in self.binding:
            head += f" {k}={fmt_value(v)}"
        obs = " ".join(f"{n}={fmt_value(v)}"
                       for n, v in zip(observe, self.values))
        return f"{head} | {obs}"


@dataclass
class GoldenFile:
    model_name: str
    model_hash: str
    scenario_hash: str
    semantics: str
    observe: Tuple[str, ...]
    records: Tuple[GoldenRecord, ...]

    def text(self) -> str:
        lines = [GOLDEN_FORMAT,
                 f"model {self.model_name}",
                 f"model_hash {self.model_hash}",
                 f"scenario_hash {self.scenario_hash}",
                 f"semantics {self.semantics}",
                 "observe " + " ".join(self.observe)]
        lines.extend(r.line(self.observe) for r in self.records)
        return "\n".join(lines) + "\n"


@dataclass
class DivergenceReport:
    index: int              # first divergent record (or value, projected)
    time: Optional[int]
    expected: str
    actual: str
    context: list = field(default_factory=list)

    def __str__(self):
        out = [f"divergence at record {self.index}"
               + (f" (t={self.time})" if self.time is not None else "") + ":",
               f"  expected: {self.expected}",
               f"  actual:   {self.actual}"]
        for line in self.context:
            out.append("  | " + line)
        return "\n".join(out)


def model_hash(model) -> str:
    return hashlib.sha256(print_model(model).encode()).hexdigest()


def parse_golden(text: str) -> GoldenFile:
    lines = text.splitlines()
    if not lines or lines[0] != GOLDEN_FORMAT:
        raise FormatError("not a golden file (missing format header)")
    header = {}
    observe = ()
    body_start = None
    for i, line in enumerate(lines[1:], start=1):
        words = line.split()
        if not words:
            continue
        if words[0] in ("model", "model_hash", "scenario_hash", "semantics"):
            header[words[0]] = words[1] if len(words) > 1 else ""
        elif words[0] == "observe":
            observe = tuple(words[1:])
        else:
            body_start = i
            break
    missing = {"model", "model_hash", "scenario_hash", "semantics"} \
        - set(header)
    if missing:
        raise FormatError("golden header incomplete: missing "
                          + ", ".join(sorted(missing)))
    records = []
    for line in lines[body_start:] if body_start else []:
        if not line.strip():
            continue
        try:
            head, obs = line.split(" | ", 1)
            words = head.split()
            time = int(words[0])
            event = words[1] if words[1] != "fire" else words[2]
            bind_words = words[2:] if words[1] != "fire" else words[3:]
            binding = tuple((kv.split("=", 1)[0],
                             parse_value(kv.split("=", 1)[1]))
                            for kv in bind_words)
            values = []
            pairs = obs.split()
            if len(pairs) != len(observe):
                raise ValueError("observation arity")
            for name, kv in zip(observe, pairs):
                k, v = kv.split("=", 1)
                if k != name:
                    raise ValueError(f"observation order ({k} != {name})")
                values.append(parse_value(v))
            records.append(GoldenRecord(time, event, binding, tuple(values)))
        except ValueError as e:
            raise FormatError(f"unreadable golden record {line!r}: {e}")
    return GoldenFile(header["model"], header["model_hash"],
                      header["scenario_hash"], header["semantics"],
                      observe, tuple(records))


# ---------------------------------------------------------------------------


def _observed_records(index, scenario, config):
    """Run and sample the observation set after every record, plus a
    synthetic initial sample."""
    from .kernel import init
    for name in scenario.observe:
        if not observation_exists(index, name):
            raise FormatError(f"unknown observation '{name}'")
    trace = run(index, scenario, config, keep_states=True)
    out = [GoldenRecord(0, "init", (),
                        tuple(observation_value(index, init(index), n)
                              for n in scenario.observe))]
    for rec, state in zip(trace.records, trace.states):
        out.append(GoldenRecord(
            rec.time, "tick" if rec.is_tick else rec.label, rec.binding,
            tuple(observation_value(index, state, n)
                  for n in scenario.observe)))
    return tuple(out), trace


def record(model, scenario: Scenario, config=RunConfig()) -> GoldenFile:
    """Reference golden for a model and scenario; deterministic, so
    re-recording identical inputs is byte-identical."""
    index = index_of(model)
    records, _ = _observed_records(index, scenario, config)
    return GoldenFile(index.model.name, model_hash(index.model),
                      scenario.content_hash(), SEMANTICS_VERSION,
                      tuple(scenario.observe), records)


def _check_header(index, scenario, golden: GoldenFile):
    if golden.semantics != SEMANTICS_VERSION:
        raise StaleGolden(
            f"golden was recorded under kernel semantics "
            f"{golden.semantics}, this kernel is {SEMANTICS_VERSION}")
    if golden.model_hash != model_hash(index.model):
        raise StaleGolden(
            f"golden was recorded against another revision of "
            f"'{golden.model_name}'; re-record it")
    if golden.scenario_hash != scenario.content_hash():
        raise StaleGolden("golden was recorded for a different scenario")


def compare(model, scenario: Scenario, golden: GoldenFile,
            config=RunConfig()):
    """None on pass, else the first divergence with context."""
    index = index_of(model)
    _check_header(index, scenario, golden)
    for name in golden.observe:
        if not observation_exists(index, name):
            raise FormatError(f"golden observes unknown '{name}'")
    scenario_obs = Scenario(scenario.name, scenario.events, scenario.max_time,
                            golden.observe, scenario.expect_deadlock)
    actual, _ = _observed_records(index, scenario_obs, config)
    return _first_divergence(golden.observe, golden.records, actual)


def _first_divergence(observe, expected, actual):
    n = max(len(expected), len(actual))
    for i in range(n):
        e = expected[i].line(observe) if i < len(expected) else "<end>"
        a = actual[i].line(observe) if i < len(actual) else "<end>"
        if e != a:
            lo = max(0, i - 2)
            context = []
            for j in range(lo, min(i + 3, n)):
                ee = expected[j].line(observe) if j < len(expected) else "<end>"
                aa = actual[j].line(observe) if j < len(actual) else "<end>"
                marker = ">>" if j == i else "  "
                context.append(f"{marker} [{j}] expected {ee}")
                context.append(f"{marker} [{j}] actual   {aa}")
            time = expected[i].time if i < len(expected) else None
            return DivergenceReport(i, time, e, a, context)
    return None


# ---------------------------------------------------------------------------
# refinement projection


def _collapse(values):
    out = []
    for v in values:
        if not out or out[-1] != v:
            out.append(v)
    return out


def compare_refinement(concrete_model, scenario: Scenario,
                       abstract_golden: GoldenFile, spec,
                       config=RunConfig(), min_matched=1):
    """Project a concrete run onto the abstract observation vocabulary and
    require every observable to traverse the same value sequence as the
    golden (stutters collapsed, times free); new events are dropped."""
    cindex = index_of(concrete_model)
    if abstract_golden.semantics != SEMANTICS_VERSION:
        raise StaleGolden("golden recorded under another kernel semantics")

    # map each abstract observation to its concrete source
    projectors = []
    for name in abstract_golden.observe:
        if name in {f"{c.name}.{m.name}" for c in concrete_model.components
                    for m in c.machines}:
            state_map = spec.state_map

            def project(v, qn=name, sm=state_map):
                return sm.get(v, v)
            if not observation_exists(cindex, name):
                raise UnmappedObservation(
                    f"abstract machine observation '{name}' has no concrete "
                    "counterpart")
            projectors.append((name, project))
        elif observation_exists(cindex, name):
            projectors.append((name, lambda v: v))
        else:
            raise UnmappedObservation(
                f"abstract observation '{name}' has no concrete counterpart")

    scenario_obs = Scenario(scenario.name, scenario.events, scenario.max_time,
                            abstract_golden.observe, scenario.expect_deadlock)
    actual, trace = _observed_records(cindex, scenario_obs, config)

    mapped_events = sum(
        1 for r in trace.records
        if not r.is_tick and spec.event_map.get(r.label, "new") != "new")
    if mapped_events < min_matched:
        raise GoldenError(
            f"projection matched only {mapped_events} events (minimum "
            f"{min_matched}); the comparison would be vacuous")

    for pos, (name, project) in enumerate(projectors):
        want = _collapse([r.values[pos] for r in abstract_golden.records])
        got = _collapse([project(r.values[pos]) for r in actual])
        for i in range(max(len(want), len(got))):
            e = fmt_value(want[i]) if i < len(want) else "<end>"
            a = fmt_value(got[i]) if i < len(got) else "<end>"
            if e != a:
                context = [f"{name} expected {[fmt_value(v) for v in want]}",
                           f"{name} actual   {[fmt_value(v) for v in got]}"]
                return DivergenceReport(
                    i, None, f"{name}={e}", f"{name}={a}", context)
    return None
