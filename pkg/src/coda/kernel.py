"""Discrete-time execution kernel.

Operational semantics of a validated model: a connector is a finite partial
map from clock ticks to values, a component's wake queue likewise maps ticks
to wake kinds, receive reads the most recent non-future entry, and the clock
may only advance when nothing is due at the current instant.  All operations
are pure: they take a RuntimeState and return a new one.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Tuple

from .diagnostics import KernelError, NotEnabled
from .exprs import (DEFAULT_INT_BOUND, Bin, Env, Name, Recv, RecvUnavailable,
                    eval_expr, eval_guard, value_matches_type)
from .model import INACTIVE, INITIAL, Model, WAKE_DEFAULT
from .validate import static_env

SEMANTICS_VERSION = "1"


@dataclass(frozen=True)
class RunConfig:
    env_bound: int = 4          # environment operations allowed per cycle
    method_bound: int = 16      # method firings allowed per cycle
    int_bound: int = DEFAULT_INT_BOUND
    strict_collisions: bool = False


@dataclass(frozen=True)
class RuntimeState:
    """Snapshot of a run.  Mappings are never mutated in place."""

    time: int
    channels: dict          # connector -> {tick: value}
    wakes: dict             # component -> {tick: kind}
    vars: dict              # component -> {var: value}
    configs: dict           # "comp.machine" -> leaf state | "@inactive"
    fired: frozenset        # sync group keys fired this cycle
    pending: Tuple[str, ...] = ()   # "comp.op" method instances (sorted)
    env_fired: int = 0
    method_fired: int = 0

    def var(self, comp, name):
        return self.vars[comp][name]

    def config(self, comp, machine):
        return self.configs[f"{comp}.{machine}"]


@dataclass(frozen=True)
class EnabledEvent:
    comp: str
    name: str            # operation name, or "machine.transition" if unlinked
    kind: str            # P S E T M (TR for an unlinked transition)
    binding: Tuple[Tuple[str, object], ...] = ()
    transitions: Tuple[Tuple[str, str], ...] = ()  # (machine qualname, tname)

    @property
    def label(self):
        return f"{self.comp}.{self.name}"

    def sort_key(self):
        return (self.comp, self.name,
                tuple((k, repr(v)) for k, v in self.binding), self.transitions)


@dataclass(frozen=True)
class EventRecord:
    time: int
    comp: str                  # "" for tick
    name: str                  # operation / transition label, or "tick"
    kind: str
    binding: Tuple[Tuple[str, object], ...] = ()
    moves: Tuple[Tuple[str, str, str], ...] = ()    # (machine, from, to)
    taken: Tuple[Tuple[str, str], ...] = ()   # (machine qualname, transition)
    assigns: Tuple[Tuple[str, object], ...] = ()    # ("comp.var", value)
    sends: Tuple[Tuple[str, int, object], ...] = ()  # (conn, deliver_at, value)
    wake_sets: Tuple[Tuple[str, int], ...] = ()     # (comp, at)
    calls: Tuple[str, ...] = ()
    warnings: Tuple[str, ...] = ()

    @property
    def is_tick(self):
        return self.name == "tick"

    @property
    def label(self):
        return "tick" if self.is_tick else f"{self.comp}.{self.name}"


class ModelIndex:
    """Precomputed lookup tables for one validated model."""

    def __init__(self, model: Model):
        self.model = model
        self.components = {c.name: c for c in model.components}
        self.connectors = {c.name: c for c in model.connectors}
        self.elements = model.elements()
        self.consts = {c.name: c.value for c in model.constants()}
        self.ops = {}
        for comp in model.components:
            for op in comp.operations:
                self.ops[(comp.name, op.name)] = op
        self.machines = {}
        self.machine_of_state = {}
        for comp in model.components:
            for m in comp.machines:
                qn = f"{comp.name}.{m.name}"
                self.machines[qn] = m
                for s in m.all_states():
                    self.machine_of_state[s.name] = qn
        # op name -> [(machine qualname, transition)]
        self.links = {}
        for comp in model.components:
            for m in comp.machines:
                qn = f"{comp.name}.{m.name}"
                for t in m.transitions:
                    if t.operation:
                        self.links.setdefault((comp.name, t.operation), []) \
                            .append((qn, t))
        self.transition = {}
        for qn, m in self.machines.items():
            for t in m.transitions:
                self.transition[(qn, t.name)] = t
        self._ancestors = {}
        for qn, m in self.machines.items():
            for s in m.all_states():
                self._ancestors[(qn, s.name)] = tuple(m.ancestors(s.name))
        # port-wake groups: component -> {frozenset(conns) -> [ops]}
        self.p_groups = {}
        for comp in model.components:
            groups = {}
            for op in comp.operations:
                if op.kind == "P":
                    groups.setdefault(frozenset(op.wake_connectors), []) \
                        .append(op)
            self.p_groups[comp.name] = groups
        self.has_s_ops = {c.name: any(o.kind == "S" for o in c.operations)
                          for c in model.components}
        self.sync_machines = [qn for qn, m in self.machines.items()
                              if m.mode == "sync"]
        self.var_order = {c.name: tuple(v.name for v in c.variables)
                          for c in model.components}
        self.machine_order = tuple(sorted(self.machines))
        self._group_cache = {}

    def comp_of(self, qualname):
        return qualname.split(".", 1)[0]

    def ancestors(self, qualname, leaf):
        if leaf == INACTIVE:
            return (INACTIVE,)
        return self._ancestors[(qualname, leaf)]

    def op_groups(self, op, transitions):
        """Sync group keys an event occupies; firing sets them all."""
        cache_key = (op.name if op is not None else None,
                     op.owner if op is not None else None, transitions)
        hit = self._group_cache.get(cache_key)
        if hit is not None:
            return hit
        keys = []
        if op is not None:
            if op.kind == "P":
                keys.append(("P", op.owner, tuple(sorted(op.wake_connectors))))
            elif op.kind == "S":
                keys.append(("S", op.owner))
            elif op.kind == "M":
                keys.append(("OP", op.owner, op.name))
            elif op.kind == "T" and op.synchronised:
                keys.append(("OP", op.owner, op.name))
        for qn, tname in transitions:
            m = self.machines[qn]
            if m.mode == "sync":
                keys.append(("SM", qn))
            if op is None:
                t = self.transition[(qn, tname)]
                if t.synchronised:
                    keys.append(("TR", qn, tname))
        keys = tuple(keys)
        self._group_cache[cache_key] = keys
        return keys


def index_of(model_or_index) -> ModelIndex:
    if isinstance(model_or_index, ModelIndex):
        return model_or_index
    return ModelIndex(model_or_index)


# ---------------------------------------------------------------------------
# spec-level channel / wake primitives


def recv_value(state: RuntimeState, connector: str):
    """Most recent value with entry time <= now; None when only future
    entries (or none at all) exist.  Never reads the future."""
    entries = state.channels.get(connector) or {}
    past = [t for t in entries if t <= state.time]
    if not past:
        return None
    return entries[max(past)]


def apply_send(state: RuntimeState, connector: str, value, delay: int):
    """Schedule delivery at now+delay.  Returns (state', warning-or-None);
    a second write to the same slot wins and is reported."""
    if delay < 0:
        raise KernelError(f"negative delay {delay} on '{connector}'")
    at = state.time + delay
    entries = dict(state.channels.get(connector) or {})
    warning = None
    if at in entries:
        warning = (f"send collision on {connector}@{at}: "
                   f"{entries[at]!r} overwritten by {value!r}")
    entries[at] = value
    channels = dict(state.channels)
    channels[connector] = entries
    return replace(state, channels=channels), warning


def apply_self_wake(state: RuntimeState, comp: str, kind: str, delay: int):
    if delay < 0:
        raise KernelError(f"negative wake delay {delay} for '{comp}'")
    if kind != WAKE_DEFAULT:
        raise KernelError(f"unsupported wake kind '{kind}'")
    at = state.time + delay
    entries = dict(state.wakes.get(comp) or {})
    entries[at] = kind  # same-slot wakes collapse, map override
    wakes = dict(state.wakes)
    wakes[comp] = entries
    return replace(state, wakes=wakes)


# ---------------------------------------------------------------------------
# initialisation


def init(model_or_index) -> RuntimeState:
    index = index_of(model_or_index)
    model = index.model
    env = static_env(model)
    vars = {}
    for comp in model.components:
        vals = {}
        for v in comp.variables:
            val = eval_expr(v.initial, env)
            if not value_matches_type(val, v.value_type, index.elements):
                raise KernelError(
                    f"initial value {val!r} of {comp.name}.{v.name} is not a "
                    f"{v.value_type}")
            vals[v.name] = val
        vars[comp.name] = vals
    configs = {}
    for qn, m in index.machines.items():
        root = m.initial_for("")
        if root is None:
            continue  # validation guarantees presence when states exist
        if root.operation:
            configs[qn] = INACTIVE
        else:
            configs[qn] = _descend(index, qn, root.target)
    return RuntimeState(time=0, channels={}, wakes={}, vars=vars,
                        configs=configs, fired=frozenset())


def _descend(index, qualname, target):
    """Enter `target`; if it is a superstate follow region initials down."""
    m = index.machines[qualname]
    seen = set()
    while True:
        node = _find(m.states, target)
        if node is None or not node.substates:
            return target
        if target in seen:
            raise KernelError(f"initial transition cycle at '{target}'")
        seen.add(target)
        init_t = m.initial_for(target)
        if init_t is None:
            raise KernelError(f"state '{target}' has no region initial")
        target = init_t.target


def _find(states, name):
    for s in states:
        if s.name == name:
            return s
        f = _find(s.substates, name)
        if f is not None:
            return f
    return None


def initial_transition_names(index) -> list:
    """(machine qualname, transition name) taken automatically at init."""
    out = []
    for qn, m in index.machines.items():
        root = m.initial_for("")
        if root is None or root.operation:
            continue
        out.append((qn, root.name))
        target = root.target
        while True:
            node = _find(m.states, target)
            if node is None or not node.substates:
                break
            nxt = m.initial_for(target)
            if nxt is None:
                break
            out.append((qn, nxt.name))
            target = nxt.target
    return out


# ---------------------------------------------------------------------------
# expression environments


def _eval_env(index, state, comp_name, binding=None, int_bound=DEFAULT_INT_BOUND):
    binding = binding or {}
    comp_vars = state.vars.get(comp_name, {})

    def lookup(parts):
        if len(parts) == 1:
            n = parts[0]
            if n in binding:
                return binding[n]
            if n in comp_vars:
                return comp_vars[n]
            if n in index.consts:
                return index.consts[n]
            if n in index.elements:
                return n
        else:
            dotted = ".".join(parts)
            if len(parts) == 2 and parts[0] in state.vars \
                    and parts[1] in state.vars[parts[0]]:
                return state.vars[parts[0]][parts[1]]
            raise KeyError(dotted)
        raise KeyError(parts[0])

    def recv(connector):
        v = recv_value(state, connector)
        if v is None:
            raise RecvUnavailable(connector)
        return v

    def in_state(name, side):
        if side:
            raise KernelError("abstract state test outside a gluing context")
        qn = index.machine_of_state[name]
        leaf = state.configs.get(qn, INACTIVE)
        return name in index.ancestors(qn, leaf)

    return Env(lookup, recv, in_state, int_bound)


def check_invariants(model_or_index, state, int_bound=DEFAULT_INT_BOUND):
    """State invariants of every active state; returns list of
    (component, state, expr) triples that are violated."""
    index = index_of(model_or_index)
    bad = []
    for qn, m in index.machines.items():
        comp = index.comp_of(qn)
        leaf = state.configs.get(qn, INACTIVE)
        if leaf == INACTIVE:
            continue
        env = _eval_env(index, state, comp, int_bound=int_bound)
        active = set(index.ancestors(qn, leaf))
        for s in m.all_states():
            if s.name in active:
                for inv in s.invariants:
                    if not eval_guard(inv, env):
                        bad.append((comp, s.name, inv))
    return bad


# ---------------------------------------------------------------------------
# enabledness


def _enumerate_bindings(index, state, comp, op):
    """All candidate parameter valuations, recv-pinned where possible."""
    pinned = {}
    if op.kind == "P":
        for g in op.guards:
            if isinstance(g, Bin) and g.op == "=":
                for a, b in ((g.left, g.right), (g.right, g.left)):
                    if isinstance(a, Recv) and isinstance(b, Name) \
                            and len(b.parts) == 1 \
                            and a.connector in op.wake_connectors:
                        v = recv_value(state, a.connector)
                        if v is not None:
                            pinned[b.parts[0]] = v
    candidates = [{}]
    for p in op.params:
        if p.name in pinned:
            values = [pinned[p.name]]
        elif p.value_type.kind == "bool":
            values = [False, True]
        elif p.value_type.kind == "set":
            values = [e for e, s in sorted(index.elements.items())
                      if s == p.value_type.set_name]
        elif p.low is not None and p.high is not None:
            values = list(range(p.low, p.high + 1))
        else:
            return []  # unenumerable and unpinned: cannot fire
        candidates = [dict(c, **{p.name: v}) for c in candidates
                      for v in values]
    return candidates


def _transition_fireable(index, state, qn, t, env):
    if t.source == INITIAL:
        if state.configs.get(qn) != INACTIVE:
            return False
    else:
        leaf = state.configs.get(qn, INACTIVE)
        if leaf == INACTIVE or t.source not in index.ancestors(qn, leaf):
            return False
    return all(eval_guard(g, env) for g in t.guards)


def _op_transition_choices(index, state, comp, op, env):
    """None if some linking machine cannot move; else list of combos,
    each a tuple of (machine qualname, transition name)."""
    linked = index.links.get((comp, op.name), [])
    if not linked:
        return [()]
    per_machine = {}
    for qn, t in linked:
        per_machine.setdefault(qn, []).append(t)
    combos = [()]
    for qn, ts in sorted(per_machine.items()):
        fireable = [t for t in ts if _transition_fireable(index, state, qn, t, env)]
        if not fireable:
            return None
        combos = [c + ((qn, t.name),) for c in combos for t in fireable]
    return combos


def enabled_events(model_or_index, state, config=RunConfig()):
    """Every fireable non-tick event with its enabling witness (parameter
    binding and the state-machine transitions it will take)."""
    index = index_of(model_or_index)
    events = []
    for comp in index.model.components:
        base_env = _eval_env(index, state, comp.name,
                             int_bound=config.int_bound)
        for op in comp.operations:
            events.extend(_op_events(index, state, comp, op, config,
                                     base_env))
        for m in comp.machines:
            qn = f"{comp.name}.{m.name}"
            for t in m.transitions:
                if t.operation or t.source == INITIAL:
                    continue
                groups = index.op_groups(None, ((qn, t.name),))
                if any(g in state.fired for g in groups):
                    continue
                if _transition_fireable(index, state, qn, t, base_env):
                    events.append(EnabledEvent(
                        comp.name, f"{m.name}.{t.name}", "TR",
                        transitions=((qn, t.name),)))
    events.sort(key=EnabledEvent.sort_key)
    return events


def _op_events(index, state, comp, op, config, base_env=None):
    # structural preconditions per kind
    if op.kind == "P":
        if any(state.time not in (state.channels.get(c) or {})
               for c in op.wake_connectors):
            return []
    elif op.kind == "S":
        if state.time not in (state.wakes.get(comp.name) or {}):
            return []
    elif op.kind == "E":
        if state.env_fired >= config.env_bound:
            return []
    elif op.kind == "M":
        if f"{comp.name}.{op.name}" not in state.pending:
            return []
    elif op.kind == "T":
        if not index.links.get((comp.name, op.name)):
            return []

    out = []
    for binding in _enumerate_bindings(index, state, comp.name, op):
        if not binding and base_env is not None:
            env = base_env
        else:
            env = _eval_env(index, state, comp.name, binding,
                            config.int_bound)
        if not all(eval_guard(g, env) for g in op.guards):
            continue
        combos = _op_transition_choices(index, state, comp.name, op, env)
        if combos is None:
            continue
        for combo in combos:
            groups = index.op_groups(op, combo)
            if any(g in state.fired for g in groups):
                continue
            out.append(EnabledEvent(comp.name, op.name, op.kind,
                                    tuple(sorted(binding.items())), combo))
    return out


def tick_blockers(model_or_index, state, config=RunConfig(), events=None):
    """Why the clock cannot advance right now; empty list = tick enabled."""
    index = index_of(model_or_index)
    blockers = []
    for name in state.pending:
        blockers.append({"kind": "method", "name": name})
    for conn, entries in sorted(state.channels.items()):
        if state.time not in entries:
            continue
        target = index.connectors[conn].target
        covering = [g for g in index.p_groups.get(target, {}) if conn in g]
        wakeable = [g for g in covering
                    if all(state.time in (state.channels.get(c) or {})
                           for c in g)]
        if not wakeable:
            blockers.append({"kind": "unconsumed-connector", "name": conn,
                             "time": state.time})
            continue
        for g in wakeable:
            key = ("P", target, tuple(sorted(g)))
            if key not in state.fired:
                blockers.append({"kind": "connector", "name": conn,
                                 "time": state.time, "component": target})
                break
    for comp, entries in sorted(state.wakes.items()):
        if state.time not in entries:
            continue
        if not index.has_s_ops.get(comp):
            blockers.append({"kind": "unconsumed-wake", "name": comp,
                             "time": state.time})
        elif ("S", comp) not in state.fired:
            blockers.append({"kind": "wake", "name": comp,
                             "time": state.time})
    if index.sync_machines:
        if events is None:
            events = enabled_events(index, state, config)
        for qn in index.sync_machines:
            if state.configs.get(qn, INACTIVE) == INACTIVE:
                continue
            if ("SM", qn) in state.fired:
                continue
            if any(qn in (m for m, _ in ev.transitions) for ev in events):
                blockers.append({"kind": "sync-machine", "name": qn})
    return blockers


def tick_enabled(model_or_index, state, config=RunConfig(), events=None):
    return not tick_blockers(model_or_index, state, config, events)


def enabled(model_or_index, state, config=RunConfig()):
    """(events, tick_ok): every operation witness plus whether the clock
    may advance — the complete enabled set of the semantics."""
    index = index_of(model_or_index)
    events = enabled_events(index, state, config)
    return events, tick_enabled(index, state, config, events)


# ---------------------------------------------------------------------------
# firing


def _check_still_enabled(index, state, ev, config):
    if ev.kind == "TR":
        return ev in enabled_events(index, state, config)
    op = index.ops.get((ev.comp, ev.name))
    if op is None:
        return False
    comp = index.components[ev.comp]
    return ev in _op_events(index, state, comp, op, config)


def fire(model_or_index, state, ev: EnabledEvent, config=RunConfig(),
         trusted=False):
    """Fire one enabled event atomically; returns (state', EventRecord).
    `trusted` skips the guard re-check when the caller just computed the
    enabled set for this very state."""
    index = index_of(model_or_index)
    if not trusted and not _check_still_enabled(index, state, ev, config):
        raise NotEnabled(f"{ev.label} is not enabled at t={state.time}")

    op = index.ops.get((ev.comp, ev.name))
    binding = dict(ev.binding)
    moves, assigns, sends, wake_sets, calls, warnings = [], [], [], [], [], []

    variant_before = None
    unsync = False
    if op is not None and op.kind == "T" and not op.synchronised:
        unsync = True
    if op is None and ev.transitions:
        qn, tname = ev.transitions[0]
        if not index.transition[(qn, tname)].synchronised:
            unsync = True
    comp_decl = index.components[ev.comp]
    if unsync and comp_decl.variant is not None:
        variant_before = eval_expr(
            comp_decl.variant,
            _eval_env(index, state, ev.comp, binding, config.int_bound))

    # state-machine moves (with region-initial descent), then their actions
    configs = dict(state.configs)
    pending_actions = []
    taken = []
    for qn, tname in ev.transitions:
        t = index.transition[(qn, tname)]
        src_leaf = state.configs.get(qn, INACTIVE)
        target = _descend(index, qn, t.target)
        configs[qn] = target
        m = index.machines[qn]
        mname = qn.split(".", 1)[1]
        moves.append((mname, src_leaf, target))
        taken.append((qn, tname))
        pending_actions.extend(t.actions)
        # region initials crossed during the descent fire too
        walk = t.target
        while walk != target:
            nxt = m.initial_for(walk)
            taken.append((qn, nxt.name))
            pending_actions.extend(nxt.actions)
            walk = nxt.target
    if op is not None:
        pending_actions.extend(op.actions)

    # working copies mutated in action order; one state constructed at the end
    now = state.time
    holder = {"vars": state.vars, "own": state.vars.get(ev.comp, {})}
    work_channels = state.channels
    work_wakes = state.wakes
    pending = state.pending
    var_decls = {v.name: v for v in index.components[ev.comp].variables}

    def _own_mut():
        if holder["vars"] is state.vars:
            holder["own"] = dict(holder["own"])
            holder["vars"] = dict(state.vars)
            holder["vars"][ev.comp] = holder["own"]
        return holder["own"]

    def lookup(parts):
        if len(parts) == 1:
            n = parts[0]
            if n in binding:
                return binding[n]
            own = holder["own"]
            if n in own:
                return own[n]
            if n in index.consts:
                return index.consts[n]
            if n in index.elements:
                return n
        elif len(parts) == 2 and parts[0] in holder["vars"] \
                and parts[1] in holder["vars"][parts[0]]:
            return holder["vars"][parts[0]][parts[1]]
        raise KeyError(".".join(parts))

    def in_state_now(name, side):
        qn = index.machine_of_state[name]
        leaf = configs.get(qn, INACTIVE)
        return name in index.ancestors(qn, leaf)

    env = Env(lookup, None, in_state_now, config.int_bound)

    for a in pending_actions:
        if a.op == "assign":
            value = eval_expr(a.value, env)
            decl = var_decls[a.target]
            if not value_matches_type(value, decl.value_type, index.elements):
                raise KernelError(
                    f"{ev.label}: {value!r} assigned to {a.target} is outside "
                    f"{decl.value_type}")
            _own_mut()[a.target] = value
            assigns.append((f"{ev.comp}.{a.target}", value))
        elif a.op == "send":
            value = eval_expr(a.value, env)
            delay = eval_expr(a.delay, env)
            conn = index.connectors[a.target]
            if delay < 0:
                raise KernelError(
                    f"{ev.label}: negative delay {delay} on '{a.target}'")
            if not value_matches_type(value, conn.value_type, index.elements):
                raise KernelError(
                    f"{ev.label}: {value!r} sent on {a.target} is outside "
                    f"{conn.value_type}")
            if work_channels is state.channels:
                work_channels = dict(state.channels)
            entries = dict(work_channels.get(a.target) or {})
            if now + delay in entries:
                warning = (f"send collision on {a.target}@{now + delay}: "
                           f"{entries[now + delay]!r} overwritten by {value!r}")
                if config.strict_collisions:
                    raise KernelError(warning)
                warnings.append(warning)
            entries[now + delay] = value
            work_channels[a.target] = entries
            sends.append((a.target, now + delay, value))
        elif a.op == "wake":
            delay = eval_expr(a.delay, env)
            if delay < 0:
                raise KernelError(f"{ev.label}: negative wake delay {delay}")
            if work_wakes is state.wakes:
                work_wakes = dict(state.wakes)
            entries = dict(work_wakes.get(ev.comp) or {})
            entries[now + delay] = a.wake_kind
            work_wakes[ev.comp] = entries
            wake_sets.append((ev.comp, now + delay))
        elif a.op == "call":
            pending = tuple(sorted(pending + (f"{ev.comp}.{a.target}",)))
            calls.append(a.target)

    fired = set(state.fired)
    fired.update(index.op_groups(op, ev.transitions))
    env_fired = state.env_fired + (1 if ev.kind == "E" else 0)
    method_fired = state.method_fired
    if ev.kind == "M":
        mine = f"{ev.comp}.{ev.name}"
        plist = list(pending)
        plist.remove(mine)
        pending = tuple(plist)
        method_fired += 1
        if method_fired > config.method_bound:
            raise KernelError(
                f"more than {config.method_bound} method firings in one cycle "
                f"(at {ev.label})")
    new_state = RuntimeState(time=now, channels=work_channels,
                             wakes=work_wakes, vars=holder["vars"],
                             configs=configs, fired=frozenset(fired),
                             pending=pending, env_fired=env_fired,
                             method_fired=method_fired)

    if variant_before is not None:
        after = eval_expr(comp_decl.variant, env)
        if not (0 <= after < variant_before):
            raise KernelError(
                f"variant of {ev.comp} not decreased by unsynchronised "
                f"{ev.label}: {variant_before} -> {after}")

    record = EventRecord(state.time, ev.comp, ev.name, ev.kind, ev.binding,
                         tuple(moves), tuple(taken), tuple(assigns),
                         tuple(sends), tuple(wake_sets), tuple(calls),
                         tuple(warnings))
    return new_state, record


def tick(model_or_index, state, config=RunConfig()):
    """Advance the clock by exactly one; prunes stale channel entries
    (latest past value and all future entries are kept)."""
    index = index_of(model_or_index)
    blockers = tick_blockers(index, state, config)
    if blockers:
        raise NotEnabled(f"tick blocked at t={state.time}: {blockers}")
    now = state.time
    channels = {}
    for conn, entries in state.channels.items():
        past = [t for t in entries if t <= now]
        keep = {t: v for t, v in entries.items() if t > now}
        if past:
            latest = max(past)
            keep[latest] = entries[latest]
        if keep:
            channels[conn] = keep
    wakes = {}
    for comp, entries in state.wakes.items():
        keep = {t: v for t, v in entries.items() if t > now}
        if keep:
            wakes[comp] = keep
    return replace(state, time=now + 1, channels=channels, wakes=wakes,
                   fired=frozenset(), env_fired=0, method_fired=0)


def tick_record(state) -> EventRecord:
    return EventRecord(state.time, "", "tick", "tick")


# ---------------------------------------------------------------------------
# canonical form (relative-time abstraction used by the explorers)


def canonical_key(state: RuntimeState, rebase=True, index=None):
    now = state.time
    chans = []
    for conn, entries in sorted(state.channels.items()):
        past = [t for t in entries if t <= now]
        future = tuple(sorted((t - now, entries[t]) for t in entries if t > now))
        latest = None
        if past:
            latest_t = max(past)
            latest = (0 if latest_t == now else -1, entries[latest_t])
        if latest or future:
            chans.append((conn, latest, future))
    wakes = []
    for comp, entries in sorted(state.wakes.items()):
        offs = tuple(sorted((t - now, entries[t]) for t in entries if t >= now))
        if offs:
            wakes.append((comp, offs))
    if index is not None:
        vars_part = tuple(
            tuple(state.vars[c].get(n) for n in order)
            for c, order in sorted(index.var_order.items()) if order)
        configs_part = tuple(state.configs.get(qn)
                             for qn in index.machine_order)
    else:
        vars_part = tuple((c, tuple(sorted(vs.items())))
                          for c, vs in sorted(state.vars.items()))
        configs_part = tuple(sorted(state.configs.items()))
    key = (
        tuple(chans), tuple(wakes), vars_part, configs_part,
        tuple(sorted(state.fired)),
        state.pending, state.env_fired, state.method_fired,
    )
    if not rebase:
        key = (state.time,) + key
    return key


def cached_canonical_key(state: RuntimeState, memo: dict, index=None):
    """Rebased canonical key memoized by object identity; the memo keeps a
    strong reference to each state so ids stay unique for its lifetime."""
    hit = memo.get(id(state))
    if hit is not None and hit[0] is state:
        return hit[1]
    key = canonical_key(state, index=index)
    memo[id(state)] = (state, key)
    return key
