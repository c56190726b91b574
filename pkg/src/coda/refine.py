"""Bounded refinement checking by forward simulation.

Every explored concrete step must be matched by its mapped abstract event
(or by stuttering, for `new` events) such that the gluing predicate keeps
holding; the checker tracks the set of abstract states reachable through
matching runs, so nondeterministic abstract models are handled without
backtracking.  This is desk-scale checking within bounds, not proof, and
every report says so.
"""

from __future__ import annotations

import time as _time
from collections import deque
from dataclasses import dataclass, field
from typing import Optional, Tuple

from .diagnostics import RefinementSpecError
from .exprs import (BOOL, Bin, Env, Expr, ExprTypeError, Name, Scope,
                    StateTest, eval_guard, type_of)
from .kernel import (INACTIVE, RunConfig, _op_events, cached_canonical_key,
                     canonical_key, enabled_events, fire, index_of, init,
                     tick, tick_enabled)
from .model import Model
from .validate import _const_types


@dataclass(frozen=True)
class RefinementSpec:
    abstract: Model
    concrete: Model
    gluing: Tuple[Expr, ...]          # all conjuncts, derived + explicit
    event_map: dict                   # concrete label -> abstract label|"new"
    state_map: dict                   # concrete state -> abstract state
    identity: bool = False            # model vs itself, equality gluing


@dataclass
class RefinementVerdict:
    status: str                       # holds-within-bounds|violated|bound-exhausted
    reason: str = ""
    steps: list = field(default_factory=list)  # concrete replay to the failure
    failed_event: Optional[str] = None
    states_visited: int = 0
    wall_seconds: float = 0.0
    unrefined_abstract: list = field(default_factory=list)

    @property
    def holds(self):
        return self.status == "holds-within-bounds"


# ---------------------------------------------------------------------------
# deriving the refinement pairing


def derive_state_map(concrete: Model, abstract: Model, explicit=()):
    """Concrete leaf -> abstract state.  A leaf maps to itself when the
    abstract machine knows it, else to its nearest enclosing superstate with
    an abstract namesake.  Machines or components new in the refinement are
    skipped.  Unmappable leaves of shared machines are an error."""
    mapping = dict(explicit)
    for comp in concrete.components:
        abs_comp = abstract.component(comp.name)
        if abs_comp is None:
            continue
        for m in comp.machines:
            abs_m = next((am for am in abs_comp.machines if am.name == m.name),
                         None)
            if abs_m is None:
                continue
            abs_states = {s.name for s in abs_m.all_states()}
            for leaf in m.leaves_under(""):
                if leaf in mapping:
                    continue
                home = next((a for a in m.ancestors(leaf) if a in abs_states),
                            None)
                if home is None:
                    raise RefinementSpecError(
                        f"state '{leaf}' of {comp.name}.{m.name} has no "
                        "abstract counterpart; add an explicit state mapping")
                mapping[leaf] = home
    return mapping


def derive_state_gluing(concrete: Model, abstract: Model, explicit=()):
    """in(leaf) => in_abs(home) for every renamed or nested leaf (identity
    mappings contribute nothing)."""
    mapping = derive_state_map(concrete, abstract, explicit)
    return [Bin("=>", StateTest(leaf), StateTest(home, "abs"))
            for leaf, home in sorted(mapping.items()) if leaf != home]


def derive_var_gluing(concrete: Model, abstract: Model):
    """Equality for every variable the two models share by name."""
    out = []
    for comp in concrete.components:
        abs_comp = abstract.component(comp.name)
        if abs_comp is None:
            continue
        abs_vars = {v.name: v for v in abs_comp.variables}
        for v in comp.variables:
            if v.name in abs_vars and abs_vars[v.name].value_type == v.value_type:
                out.append(Bin("=", Name((comp.name, v.name)),
                               Name(("abs", comp.name, v.name))))
    return out


def _labels(model: Model):
    out = {}
    for comp in model.components:
        for op in comp.operations:
            out.setdefault(op.name, []).append(f"{comp.name}.{op.name}")
        for m in comp.machines:
            for t in m.transitions:
                if t.operation is None and t.source != "@initial":
                    name = f"{m.name}.{t.name}"
                    out.setdefault(name, []).append(f"{comp.name}.{name}")
    return out


def build_spec(concrete: Model, abstract: Model, clause=None,
               identity=False) -> RefinementSpec:
    """Assemble the full refinement pairing.  The event map defaults to
    same-name matching (anything unmatched refines skip); gluing is the
    explicit clauses plus derived state implications and shared-variable
    equalities."""
    if identity:
        event_map = {lab: lab for labs in _labels(concrete).values()
                     for lab in labs}
        return RefinementSpec(abstract, concrete, (), event_map, {},
                              identity=True)

    explicit_events = dict(clause.event_map) if clause else {}
    explicit_states = tuple(clause.state_map) if clause else ()
    glue_exprs = list(clause.glue) if clause else []

    conc_labels = _labels(concrete)
    abs_labels = _labels(abstract)
    event_map = {}
    for name, labels in conc_labels.items():
        for label in labels:
            if name in explicit_events:
                target = explicit_events[name]
                if target == "new":
                    event_map[label] = "new"
                    continue
                if target not in abs_labels:
                    raise RefinementSpecError(
                        f"event map names unknown abstract operation "
                        f"'{target}'")
                if len(abs_labels[target]) > 1:
                    raise RefinementSpecError(
                        f"abstract operation name '{target}' is ambiguous")
                event_map[label] = abs_labels[target][0]
            elif name in abs_labels and label in abs_labels[name]:
                event_map[label] = label  # same component, same name
            else:
                event_map[label] = "new"
    for name in explicit_events:
        if name not in conc_labels:
            raise RefinementSpecError(
                f"event map names unknown concrete operation '{name}'")

    state_map = derive_state_map(concrete, abstract, explicit_states)
    gluing = tuple(glue_exprs
                   + derive_state_gluing(concrete, abstract, explicit_states)
                   + derive_var_gluing(concrete, abstract))
    _check_new_events_convergent(concrete, event_map)
    spec = RefinementSpec(abstract, concrete, gluing, event_map, state_map)
    _typecheck_gluing(spec)
    return spec


def _check_new_events_convergent(concrete: Model, event_map):
    for comp in concrete.components:
        for op in comp.operations:
            if event_map.get(f"{comp.name}.{op.name}") != "new":
                continue
            # synchronised events fire at most once per cycle; environment
            # events are bounded by the per-cycle budget; anything else
            # needs a variant to rule out unbounded stuttering
            if op.synchronised or op.kind == "E" or comp.variant is not None:
                continue
            raise RefinementSpecError(
                f"new event {comp.name}.{op.name} is unsynchronised and its "
                "component declares no variant")


def _joint_scope(spec: RefinementSpec) -> Scope:
    vars = {}
    for comp in spec.concrete.components:
        for v in comp.variables:
            vars[f"{comp.name}.{v.name}"] = v.value_type
    for comp in spec.abstract.components:
        for v in comp.variables:
            vars[f"abs.{comp.name}.{v.name}"] = v.value_type
    return Scope(
        vars=vars,
        consts={**_const_types(spec.abstract), **_const_types(spec.concrete)},
        elements={**spec.abstract.elements(), **spec.concrete.elements()},
        states=[s.name for c in spec.concrete.components
                for m in c.machines for s in m.all_states()],
        abs_states=[s.name for c in spec.abstract.components
                    for m in c.machines for s in m.all_states()],
    )


def _typecheck_gluing(spec: RefinementSpec):
    sc = _joint_scope(spec)
    for g in spec.gluing:
        try:
            ty = type_of(g, sc)
        except ExprTypeError as e:
            raise RefinementSpecError(f"gluing predicate ill-typed: {e}")
        if ty != BOOL:
            raise RefinementSpecError(
                f"gluing predicate must be BOOL, got {ty}")


# ---------------------------------------------------------------------------
# evaluation of gluing over a (concrete, abstract) state pair


def _joint_env(cindex, aindex, cstate, astate):
    def lookup(parts):
        if parts and parts[0] == "abs":
            rest = parts[1:]
            if len(rest) == 2 and rest[0] in astate.vars \
                    and rest[1] in astate.vars[rest[0]]:
                return astate.vars[rest[0]][rest[1]]
            raise KeyError(".".join(parts))
        if len(parts) == 2 and parts[0] in cstate.vars \
                and parts[1] in cstate.vars[parts[0]]:
            return cstate.vars[parts[0]][parts[1]]
        if len(parts) == 1:
            n = parts[0]
            if n in cindex.consts:
                return cindex.consts[n]
            if n in aindex.consts:
                return aindex.consts[n]
            if n in cindex.elements or n in aindex.elements:
                return n
        raise KeyError(".".join(parts))

    def in_state(name, side):
        index, state = (aindex, astate) if side == "abs" else (cindex, cstate)
        qn = index.machine_of_state.get(name)
        if qn is None:
            return False
        leaf = state.configs.get(qn, INACTIVE)
        return name in index.ancestors(qn, leaf)

    return Env(lookup, None, in_state)


def gluing_holds(spec, cindex, aindex, cstate, astate) -> bool:
    if spec.identity:
        return cstate.time == astate.time and \
            canonical_key(cstate) == canonical_key(astate)
    env = _joint_env(cindex, aindex, cstate, astate)
    return all(eval_guard(g, env) for g in spec.gluing)


def compile_gluing(spec: RefinementSpec, cindex, aindex):
    """Specialize the gluing into a fast (cstate, astate) predicate: derived
    state implications become config lookups and shared-variable equalities
    become dict comparisons; anything else falls back to expression
    evaluation."""
    if spec.identity:
        # rebased-key equality: the semantics is invariant under time
        # translation, so representatives at shifted clocks are equivalent
        def identity_holds(cstate, astate):
            return canonical_key(cstate, index=cindex) \
                == canonical_key(astate, index=aindex)
        return identity_holds

    state_impls = []   # (concrete qn, concrete leaf, required abstract state)
    var_eqs = []       # (comp, var, abs comp, abs var)
    others = []
    for g in spec.gluing:
        if isinstance(g, Bin) and g.op == "=>" \
                and isinstance(g.left, StateTest) and g.left.side == "" \
                and isinstance(g.right, StateTest) and g.right.side == "abs":
            qn = cindex.machine_of_state.get(g.left.state)
            aqn = aindex.machine_of_state.get(g.right.state)
            leaves = set(cindex.machines[qn].leaves_under(g.left.state)) \
                if qn else set()
            if qn and aqn:
                state_impls.append((qn, leaves, aqn, g.right.state))
                continue
        if isinstance(g, Bin) and g.op == "=" \
                and isinstance(g.left, Name) and len(g.left.parts) == 2 \
                and isinstance(g.right, Name) and len(g.right.parts) == 3 \
                and g.right.parts[0] == "abs":
            var_eqs.append((g.left.parts[0], g.left.parts[1],
                            g.right.parts[1], g.right.parts[2]))
            continue
        others.append(g)

    a_ancestors = aindex._ancestors

    def holds(cstate, astate):
        for comp, var, acomp, avar in var_eqs:
            if cstate.vars[comp][var] != astate.vars[acomp][avar]:
                return False
        for qn, leaves, aqn, required in state_impls:
            if cstate.configs.get(qn) in leaves:
                aleaf = astate.configs.get(aqn, INACTIVE)
                if aleaf == INACTIVE or \
                        required not in a_ancestors[(aqn, aleaf)]:
                    return False
        if others:
            env = _joint_env(cindex, aindex, cstate, astate)
            return all(eval_guard(g, env) for g in others)
        return True

    return holds


# ---------------------------------------------------------------------------
# the bounded forward-simulation search


@dataclass(frozen=True)
class RefineConfig:
    max_time: int = 20
    max_states: int = 200_000
    env_bound: int = 4
    report_strengthening: bool = True

    def run_config(self):
        return RunConfig(env_bound=self.env_bound)


class _Matcher:
    """Steps abstract states on demand, memoized per canonical state so the
    same abstract work is never redone across product nodes.  Successor
    states are shared representatives: sound because the semantics is
    invariant under time translation (the rebased key captures everything)."""

    def __init__(self, spec, cindex, aindex, rc):
        self.spec = spec
        self.cindex = cindex
        self.aindex = aindex
        self.rc = rc
        self.memo = {}       # id(state) -> (state, rebased key)
        self.reps = {}       # rebased key -> representative state
        self.step_memo = {}  # (akey, mapped label) -> successor tuple
        self.tick_memo = {}  # akey -> successor tuple

    def akey(self, a):
        return cached_canonical_key(a, self.memo, self.aindex)

    def _rep(self, a2):
        return self.reps.setdefault(self.akey(a2), a2)

    def _dedup(self, states):
        by_key = {self.akey(a): a for a in states}
        return tuple(by_key[k] for k in sorted(by_key, key=repr))

    def successors(self, a, mapped):
        if mapped == "tick":
            key = self.akey(a)
            hit = self.tick_memo.get(key)
            if hit is None:
                hit = ()
                if tick_enabled(self.aindex, a, self.rc):
                    hit = (self._rep(tick(self.aindex, a, self.rc)),)
                self.tick_memo[key] = hit
            return hit
        key = (self.akey(a), mapped)
        hit = self.step_memo.get(key)
        if hit is not None:
            return hit
        acomp, aname = mapped.split(".", 1)
        aop = self.aindex.ops.get((acomp, aname))
        if aop is not None:
            witnesses = _op_events(self.aindex, a,
                                   self.aindex.components[acomp], aop, self.rc)
        else:  # an unlinked transition event
            witnesses = [w for w in enabled_events(self.aindex, a, self.rc)
                         if w.comp == acomp and w.name == aname]
        succ = self._dedup(
            self._rep(fire(self.aindex, a, w, self.rc, trusted=True)[0])
            for w in witnesses)
        self.step_memo[key] = succ
        return succ

    def match(self, astates, label, cnext, glue):
        mapped = self.spec.event_map.get(label, "new") \
            if label != "tick" else "tick"
        matched_abstract = mapped if mapped not in ("new", "tick") else None
        if mapped == "new":
            found = [a for a in astates if glue(cnext, a)]
        else:
            found = [a2 for a in astates for a2 in self.successors(a, mapped)
                     if glue(cnext, a2)]
        if len(found) > 1:
            found = self._dedup(found)
        return tuple(found), mapped, matched_abstract


def check_refinement(spec: RefinementSpec, config=RefineConfig()) \
        -> RefinementVerdict:
    """Explore the concrete model within bounds; report the first concrete
    step no abstract run can match while preserving the gluing."""
    started = _time.monotonic()
    cindex = index_of(spec.concrete)
    aindex = index_of(spec.abstract)
    rc = config.run_config()
    # the abstract run is driven by the concrete schedule; the per-cycle
    # environment budget is a concrete exploration bound, not abstract
    # semantics, so matching must not be throttled by it
    rc_abs = RunConfig(env_bound=2**31)

    glue = compile_gluing(spec, cindex, aindex)
    matcher = _Matcher(spec, cindex, aindex, rc_abs)
    cmemo = {}
    cinit, ainit = init(cindex), init(aindex)
    if not glue(cinit, ainit):
        return RefinementVerdict(
            "violated", "gluing does not hold between the initial states",
            steps=[], failed_event="init",
            wall_seconds=_time.monotonic() - started)

    def pkey(cstate, astates):
        return (cached_canonical_key(cstate, cmemo, cindex),
                tuple(matcher.akey(a) for a in astates))

    start = (cinit, (ainit,))
    key0 = pkey(*start)
    visited = {key0}
    parents = {key0: None}
    queue = deque([(cinit, (ainit,), key0, 0)])
    matched_labels = set()
    exhausted = False

    def path_to(key):
        steps = []
        while parents[key] is not None:
            key, step = parents[key]
            steps.append(step)
        steps.reverse()
        return steps

    verdict = None
    while queue:
        cstate, astates, key, ticks = queue.popleft()
        events = enabled_events(cindex, cstate, rc)
        branches = [(ev.label, ev.binding,
                     fire(cindex, cstate, ev, rc, trusted=True)[0], ticks)
                    for ev in events]
        if tick_enabled(cindex, cstate, rc, events) \
                and ticks < config.max_time:
            branches.append(("tick", (),
                             tick(cindex, cstate, rc), ticks + 1))
        for label, binding, cnext, nticks in branches:
            nxt_astates, mapped, matched = matcher.match(
                astates, label, cnext, glue)
            if not nxt_astates:
                steps = path_to(key) + [(label, binding)]
                verdict = RefinementVerdict(
                    "violated",
                    (f"{label} (mapped to {mapped}) has no abstract match "
                     f"preserving the gluing at t={cstate.time}"),
                    steps=steps, failed_event=label,
                    states_visited=len(visited),
                    wall_seconds=_time.monotonic() - started)
                break
            if matched:
                matched_labels.add(matched)
            nkey = pkey(cnext, nxt_astates)
            if nkey in visited:
                continue
            if len(visited) >= config.max_states:
                exhausted = True
                break
            visited.add(nkey)
            parents[nkey] = (key, (label, binding))
            queue.append((cnext, nxt_astates, nkey, nticks))
        if verdict or exhausted:
            break

    if verdict is None:
        verdict = RefinementVerdict(
            "bound-exhausted" if exhausted else "holds-within-bounds",
            states_visited=len(visited),
            wall_seconds=_time.monotonic() - started)
    if config.report_strengthening and verdict.holds and not spec.identity:
        verdict.unrefined_abstract = _unrefined(spec, aindex, matched_labels,
                                                config)
    return verdict


def _unrefined(spec, aindex, matched_labels, config):
    """Abstract operations that fire in an abstract-only exploration but were
    never matched by any concrete step (a guard-strengthening smell)."""
    from .checker import CheckConfig, explore
    res = explore(aindex, CheckConfig(
        max_time=config.max_time, max_states=config.max_states,
        env_bound=config.env_bound, check_invariants=False,
        check_deadlock=False))
    fired = {label for label, n in res.coverage.items()
             if n > 0 and label.count(".") == 1}
    return sorted(fired - matched_labels)


def report(spec: RefinementSpec, verdict: RefinementVerdict) -> str:
    lines = [
        f"refinement check: {spec.concrete.name} refines {spec.abstract.name}",
        "method: bounded forward simulation (not a proof)",
        f"status: {verdict.status}",
    ]
    if verdict.status == "violated":
        lines.append(f"failure: {verdict.reason}")
        for label, binding in verdict.steps:
            args = "".join(f" {k}={v}" for k, v in binding)
            lines.append(f"    {label}{args}")
    if verdict.unrefined_abstract:
        lines.append("abstract events never matched by a concrete step "
                     "(possible guard strengthening): "
                     + ", ".join(verdict.unrefined_abstract))
    lines.append(f"product states: {verdict.states_visited}  "
                 f"wall: {verdict.wall_seconds:.2f}s")
    return "\n".join(lines)
