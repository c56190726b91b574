"""Local HTTP/JSON service for interactive animation.

Sessions hold a loaded model plus an undo stack of kernel states; every
semantic step goes through the kernel, the service only serializes.  The
API lives under /v1 and the animator's static files can be served from a
directory given with --ui.
"""

from __future__ import annotations

import json
import os
import re
import threading
import uuid
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from .diagnostics import CodaError, ModelError, ParseFailure
from .exprs import to_text
from .kernel import (INACTIVE, RunConfig, enabled_events, fire, index_of,
                     init, tick, tick_blockers, tick_record)
from .parser import parse
from .runner import (observation_exists, parse_scenario, parse_trace_steps,
                     record_to_line)
from .validate import validate

DEFAULT_PORT = int(os.environ.get("CODA_PORT", "8787"))


def _json_value(v):
    return v  # bool | int | str map directly onto JSON


class Session:
    def __init__(self, model, config, undo_depth=1000):
        self.id = uuid.uuid4().hex[:12]
        self.model = model
        self.index = index_of(model)
        self.config = config
        self.undo_depth = undo_depth
        self.lock = threading.Lock()
        self.states = [init(self.index)]
        self.records = []           # EventRecord per step
        self.trimmed = False        # history dropped past the undo depth

    @property
    def state(self):
        return self.states[-1]

    def push(self, state, rec):
        self.states.append(state)
        self.records.append(rec)
        if len(self.states) > self.undo_depth + 1:
            self.states.pop(0)
            self.records.pop(0)
            self.trimmed = True

    def undo(self):
        if len(self.states) <= 1:
            return False
        self.states.pop()
        self.records.pop()
        return True

    def reset(self):
        self.states = [init(self.index)]
        self.records = []
        self.trimmed = False


def state_json(index, state, config=RunConfig()):
    comps = {}
    for comp in index.model.components:
        machines = {}
        for m in comp.machines:
            qn = f"{comp.name}.{m.name}"
            leaf = state.configs.get(qn, INACTIVE)
            path = [] if leaf == INACTIVE else list(index.ancestors(qn, leaf))
            machines[m.name] = {"leaf": leaf, "active": path,
                                "mode": m.mode}
        comps[comp.name] = {
            "vars": {k: _json_value(v)
                     for k, v in sorted(state.vars.get(comp.name, {}).items())},
            "machines": machines,
        }
    connectors = {}
    for c in index.model.connectors:
        entries = sorted((state.channels.get(c.name) or {}).items())
        from .kernel import recv_value
        connectors[c.name] = {
            "source": c.source, "target": c.target,
            "type": str(c.value_type),
            "entries": [[t, _json_value(v)] for t, v in entries],
            "visible": _json_value(recv_value(state, c.name)),
        }
    wakes = {comp: sorted((entries or {}).items())
             for comp, entries in state.wakes.items() if entries}
    return {
        "time": state.time,
        "components": comps,
        "connectors": connectors,
        "wakes": wakes,
        "pending_methods": list(state.pending),
        "env_fired": state.env_fired,
        "fired_groups": sorted(str(g) for g in state.fired),
    }


def enabled_json(index, state, config):
    events = enabled_events(index, state, config)
    blockers = tick_blockers(index, state, config, events)
    return {
        "events": [{
            "component": e.comp, "operation": e.name, "kind": e.kind,
            "label": e.label,
            "binding": {k: _json_value(v) for k, v in e.binding},
            "transitions": [[qn, t] for qn, t in e.transitions],
        } for e in events],
        "tick": {"enabled": not blockers, "blockers": blockers},
    }


def record_json(rec):
    return {
        "time": rec.time, "label": rec.label, "kind": rec.kind,
        "binding": {k: _json_value(v) for k, v in rec.binding},
        "moves": [list(m) for m in rec.moves],
        "assigns": [[k, _json_value(v)] for k, v in rec.assigns],
        "sends": [[c, t, _json_value(v)] for c, t, v in rec.sends],
        "wakes": [list(w) for w in rec.wake_sets],
        "calls": list(rec.calls),
        "warnings": list(rec.warnings),
        "line": record_to_line(rec),
    }


def model_structure_json(index):
    model = index.model

    def state_tree(s):
        return {"name": s.name,
                "invariants": [to_text(i) for i in s.invariants],
                "substates": [state_tree(x) for x in s.substates]}

    return {
        "name": model.name,
        "contexts": [{
            "name": ctx.name,
            "sets": {s.name: list(s.elements) for s in ctx.sets},
            "constants": {c.name: _json_value(c.value) for c in ctx.constants},
        } for ctx in model.contexts],
        "connectors": [{
            "name": c.name, "type": str(c.value_type),
            "source": c.source, "target": c.target,
        } for c in model.connectors],
        "components": [{
            "name": comp.name,
            "vars": [{"name": v.name, "type": str(v.value_type)}
                     for v in comp.variables],
            "operations": [{
                "name": op.name, "kind": op.kind,
                "wakes": list(op.wake_connectors),
                "params": [{"name": p.name, "type": str(p.value_type)}
                           for p in op.params],
            } for op in comp.operations],
            "machines": [{
                "name": m.name, "mode": m.mode,
                "states": [state_tree(s) for s in m.states],
                "transitions": [{
                    "name": t.name, "source": t.source, "target": t.target,
                    "operation": t.operation,
                } for t in m.transitions],
            } for m in comp.machines],
        } for comp in model.components],
    }


def explain_disabled(index, state, comp, opname, binding, config):
    """Best-effort reason a fire request was refused."""
    op = index.ops.get((comp, opname))
    if op is None:
        return f"unknown operation {comp}.{opname}"
    from .exprs import eval_guard
    from .kernel import _eval_env
    if op.kind == "P":
        for c in op.wake_connectors:
            if state.time not in (state.channels.get(c) or {}):
                return f"no delivery on {c} at t={state.time}"
    if op.kind == "S" and state.time not in (state.wakes.get(comp) or {}):
        return f"no wake for {comp} at t={state.time}"
    if op.kind == "M" and f"{comp}.{opname}" not in state.pending:
        return f"{comp}.{opname} has not been called this cycle"
    if op.kind == "E" and state.env_fired >= config.env_bound:
        return "environment budget for this cycle is spent"
    env = _eval_env(index, state, comp, dict(binding), config.int_bound)
    for i, g in enumerate(op.guards):
        if not eval_guard(g, env):
            return f"guard {i + 1} is false: {to_text(g)}"
    groups = index.op_groups(op, ())
    for g in groups:
        if g in state.fired:
            return f"synchronisation group {g} already fired this cycle"
    return "the linked state-machine transition is not enabled here"


class ApiError(Exception):
    def __init__(self, status, code, detail):
        self.status = status
        self.code = code
        self.detail = detail


class CodaService:
    """Transport-independent request handling (exercised directly in tests)."""

    def __init__(self, config=RunConfig(), undo_depth=1000, ui_dir=None):
        self.config = config
        self.undo_depth = undo_depth
        self.ui_dir = ui_dir
        self.sessions = {}
        self.lock = threading.Lock()

    def _session(self, sid) -> Session:
        with self.lock:
            s = self.sessions.get(sid)
        if s is None:
            raise ApiError(404, "unknown-session", f"no session '{sid}'")
        return s

    def create_session(self, body):
        text = body.get("model")
        if not isinstance(text, str):
            raise ApiError(400, "bad-request", "body needs a 'model' string")
        try:
            model = validate(parse(text, file=body.get("name", "<upload>")))
        except (ParseFailure, ModelError) as e:
            raise ApiError(422, "invalid-model",
                           [str(d) for d in e.diagnostics])
        session = Session(model, self.config, self.undo_depth)
        with self.lock:
            self.sessions[session.id] = session
        return 201, {"session": session.id,
                     "model": model_structure_json(session.index),
                     "state": state_json(session.index, session.state),
                     "enabled": enabled_json(session.index, session.state,
                                             self.config)}

    def handle(self, method, path, body):
        if path == "/v1/sessions" and method == "POST":
            return self.create_session(body or {})
        if path == "/v1/examples" and method == "GET":
            from .loader import shipped_model_path, shipped_models
            names = shipped_models()
            return 200, {"examples": [{
                "name": n,
                "text": open(shipped_model_path(n), encoding="utf-8").read(),
            } for n in names]}
        m = re.match(r"^/v1/sessions/([0-9a-f]+)(?:/([a-z]+))?$", path)
        if not m:
            raise ApiError(404, "not-found", f"no route {method} {path}")
        session = self._session(m.group(1))
        action = m.group(2) or ""
        with session.lock:
            return self._dispatch(session, method, action, body or {})

    def _dispatch(self, s: Session, method, action, body):
        index, config = s.index, self.config
        if method == "GET" and action == "state":
            return 200, {"state": state_json(index, s.state)}
        if method == "GET" and action == "enabled":
            return 200, {"enabled": enabled_json(index, s.state, config)}
        if method == "GET" and action == "model":
            return 200, {"model": model_structure_json(index)}
        if method == "GET" and action == "trace":
            return 200, {"records": [record_json(r) for r in s.records],
                         "text": "".join(record_to_line(r) + "\n"
                                         for r in s.records)}
        if method == "DELETE" and action == "":
            with self.lock:
                self.sessions.pop(s.id, None)
            return 200, {"deleted": s.id}
        if method != "POST":
            raise ApiError(405, "bad-method", f"{method} not allowed here")
        if action == "fire":
            return self._fire(s, body)
        if action == "tick":
            blockers = tick_blockers(index, s.state, config)
            if blockers:
                raise ApiError(409, "not-enabled",
                               {"why": "the clock is blocked",
                                "blockers": blockers})
            rec = tick_record(s.state)
            s.push(tick(index, s.state, config), rec)
            return 200, self._step_reply(s, rec)
        if action == "undo":
            if not s.undo():
                raise ApiError(409, "nothing-to-undo", "at the initial state")
            return 200, {"state": state_json(index, s.state),
                         "enabled": enabled_json(index, s.state, config)}
        if action == "reset":
            s.reset()
            return 200, {"state": state_json(index, s.state),
                         "enabled": enabled_json(index, s.state, config)}
        if action == "golden":
            return self._golden(s, body)
        if action == "replay":
            return self._replay(s, body)
        raise ApiError(404, "not-found", f"no action '{action}'")

    def _fire(self, s: Session, body):
        comp = body.get("component")
        opname = body.get("operation")
        if not comp and isinstance(body.get("event"), str) \
                and "." in body["event"]:
            comp, opname = body["event"].split(".", 1)
        binding = tuple(sorted((body.get("binding") or {}).items()))
        options = enabled_events(s.index, s.state, self.config)
        chosen = None
        for ev in options:
            if ev.comp == comp and ev.name == opname \
                    and ev.binding == binding:
                chosen = ev
                break
        if chosen is None:
            raise ApiError(409, "not-enabled", {
                "event": f"{comp}.{opname}",
                "why": explain_disabled(s.index, s.state, comp, opname,
                                        binding, self.config)})
        new_state, rec = fire(s.index, s.state, chosen, self.config,
                              trusted=True)
        s.push(new_state, rec)
        return 200, self._step_reply(s, rec)

    def _step_reply(self, s: Session, rec):
        return {"record": record_json(rec),
                "state": state_json(s.index, s.state),
                "enabled": enabled_json(s.index, s.state, self.config)}

    def _golden(self, s: Session, body):
        observe = body.get("observe") or []
        if not observe:
            raise ApiError(400, "empty-observation-set",
                           "select at least one observable")
        for name in observe:
            if not observation_exists(s.index, name):
                raise ApiError(400, "unknown-observation", name)
        if not s.records:
            raise ApiError(409, "empty-trace", "nothing has been fired yet")
        if s.trimmed:
            raise ApiError(409, "history-trimmed",
                           "the session outgrew its undo depth; reset and "
                           "replay to export a golden")
        from .golden import GoldenFile, GoldenRecord, model_hash
        from .kernel import SEMANTICS_VERSION
        from .runner import observation_value
        records = [GoldenRecord(0, "init", (), tuple(
            observation_value(s.index, s.states[0], n) for n in observe))]
        for rec, state in zip(s.records, s.states[1:]):
            records.append(GoldenRecord(
                rec.time, "tick" if rec.is_tick else rec.label, rec.binding,
                tuple(observation_value(s.index, state, n) for n in observe)))
        # exports of a replayed scenario can stamp its hash so the result is
        # byte-identical to a CLI recording of the same choices
        scenario_hash = "interactive"
        if isinstance(body.get("scenario"), str):
            scenario_hash = parse_scenario(body["scenario"]).content_hash()
        golden = GoldenFile(s.model.name, model_hash(s.model),
                            scenario_hash, SEMANTICS_VERSION,
                            tuple(observe), tuple(records))
        return 200, {"golden": golden.text()}

    def _replay(self, s: Session, body):
        text = body.get("trace")
        if not isinstance(text, str):
            raise ApiError(400, "bad-request", "body needs a 'trace' string")
        try:
            steps = parse_trace_steps(text)
        except CodaError as e:
            raise ApiError(400, "bad-trace", str(e))
        s.reset()
        for label, binding in steps:
            if label == "tick":
                blockers = tick_blockers(s.index, s.state, self.config)
                if blockers:
                    raise ApiError(409, "not-enabled",
                                   {"at": len(s.records),
                                    "blockers": blockers})
                rec = tick_record(s.state)
                s.push(tick(s.index, s.state, self.config), rec)
                continue
            comp, opname = label.split(".", 1)
            code, _ = self._fire(s, {"component": comp, "operation": opname,
                                     "binding": dict(binding)})
        return 200, {"state": state_json(s.index, s.state),
                     "enabled": enabled_json(s.index, s.state, self.config),
                     "steps": len(s.records)}


class _Handler(BaseHTTPRequestHandler):
    service: CodaService = None
    protocol_version = "HTTP/1.1"

    def log_message(self, fmt, *args):  # quiet by default
        pass

    def _reply(self, status, payload):
        data = json.dumps(payload).encode()
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)

    def _serve_static(self, path):
        root = self.service.ui_dir
        if root is None:
            self._reply(200, {"service": "coda", "api": "/v1",
                              "ui": "not bundled (serve with --ui DIR)"})
            return
        rel = path.lstrip("/") or "index.html"
        full = os.path.realpath(os.path.join(root, rel))
        if not full.startswith(os.path.realpath(root)) \
                or not os.path.isfile(full):
            self.send_error(404)
            return
        ctype = {"html": "text/html", "js": "text/javascript",
                 "css": "text/css", "json": "application/json",
                 "svg": "image/svg+xml",
                 "map": "application/json"}.get(full.rsplit(".", 1)[-1],
                                                "application/octet-stream")
        with open(full, "rb") as fh:
            data = fh.read()
        self.send_response(200)
        self.send_header("Content-Type", ctype)
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)

    def _handle(self, method):
        path = self.path.split("?")[0]
        if method == "GET" and (path == "/" or path.startswith("/ui")):
            self._serve_static(path)
            return
        body = None
        length = int(self.headers.get("Content-Length") or 0)
        if length:
            try:
                body = json.loads(self.rfile.read(length))
            except json.JSONDecodeError:
                self._reply(400, {"error": "bad-json",
                                  "detail": "request body is not JSON"})
                return
        try:
            status, payload = self.service.handle(method, path, body)
            self._reply(status, payload)
        except ApiError as e:
            self._reply(e.status, {"error": e.code, "detail": e.detail})
        except CodaError as e:
            self._reply(500, {"error": "internal", "detail": str(e)})

    def do_GET(self):
        self._handle("GET")

    def do_POST(self):
        self._handle("POST")

    def do_DELETE(self):
        self._handle("DELETE")


def make_server(bind="127.0.0.1", port=DEFAULT_PORT, config=RunConfig(),
                undo_depth=1000, ui_dir=None):
    service = CodaService(config, undo_depth, ui_dir)
    handler = type("BoundHandler", (_Handler,), {"service": service})
    httpd = ThreadingHTTPServer((bind, port), handler)
    httpd.service = service
    return httpd


def serve(bind="127.0.0.1", port=DEFAULT_PORT, config=RunConfig(),
          undo_depth=1000, ui_dir=None):
    httpd = make_server(bind, port, config, undo_depth, ui_dir)
    host, actual_port = httpd.server_address[:2]
    print(f"coda service on http://{host}:{actual_port}/ (API under /v1)")
    try:
        httpd.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        httpd.server_close()
