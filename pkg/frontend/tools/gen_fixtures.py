"""Record real /v1 payloads into frontend/test/fixtures/.

The frontend contract tests replay these instead of talking to a live
server; regenerate after any API change:  python3 frontend/tools/gen_fixtures.py
"""

import json
import os
import sys

HERE = os.path.dirname(os.path.abspath(__file__))
ROOT = os.path.normpath(os.path.join(HERE, "..", ".."))
sys.path.insert(0, os.path.join(ROOT, "src"))

from coda.golden import record  # noqa: E402
from coda.loader import load_model, shipped_model_path  # noqa: E402
from coda.runner import parse_scenario_file, run, trace_to_text  # noqa: E402
from coda.server import CodaService  # noqa: E402

OUT = os.path.join(HERE, "..", "test", "fixtures")


def write(name, payload):
    path = os.path.join(OUT, name)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=1, sort_keys=True)
    print(path)


def main():
    os.makedirs(OUT, exist_ok=True)
    service = CodaService()

    wm1_text = open(shipped_model_path("wm1.coda"), encoding="utf-8").read()
    status, created = service.handle("POST", "/v1/sessions",
                                     {"model": wm1_text})
    assert status == 201
    write("session_wm1.json", created)

    # a mid-run wm2 state with a blocked tick and port wakes on offer
    wm2_text = open(shipped_model_path("wm2.coda"), encoding="utf-8").read()
    status, wm2 = service.handle("POST", "/v1/sessions", {"model": wm2_text})
    sid = wm2["session"]
    for action, body in [
            ("fire", {"component": "DOOR", "operation": "closeDoor"}),
            ("fire", {"component": "WM", "operation": "sendWaiting"}),
            ("tick", {}), ("tick", {}),
            ("fire", {"component": "CP", "operation": "Running",
                      "binding": {"s": "WAITING"}}),
            ("fire", {"component": "CP", "operation": "UserStart",
                      "binding": {"p": "QUICK"}}),
            ("tick", {})]:
        status, reply = service.handle(
            "POST", f"/v1/sessions/{sid}/{action}", body)
        assert status == 200, (action, reply)
    status, enabled = service.handle("GET", f"/v1/sessions/{sid}/enabled",
                                     None)
    status, state = service.handle("GET", f"/v1/sessions/{sid}/state", None)
    write("wm2_mid_run.json", {"enabled": enabled["enabled"],
                               "state": state["state"],
                               "model": wm2["model"]})

    # golden parity: the CLI recording and an API replay of the same steps
    model = load_model(shipped_model_path("wm1.coda"))
    scenario_path = shipped_model_path("wm1_start.scn")
    scenario = parse_scenario_file(scenario_path)
    cli_golden = record(model, scenario).text()
    cli_trace = trace_to_text(run(model, scenario))
    status, fresh = service.handle("POST", "/v1/sessions",
                                   {"model": wm1_text})
    rid = fresh["session"]
    status, _ = service.handle("POST", f"/v1/sessions/{rid}/replay",
                               {"trace": cli_trace})
    assert status == 200
    status, exported = service.handle(
        "POST", f"/v1/sessions/{rid}/golden",
        {"observe": list(scenario.observe),
         "scenario": open(scenario_path, encoding="utf-8").read()})
    assert status == 200
    write("wm1_golden_parity.json", {
        "trace": cli_trace,
        "observe": list(scenario.observe),
        "cli_golden": cli_golden,
        "api_golden": exported["golden"],
    })


if __name__ == "__main__":
    main()
