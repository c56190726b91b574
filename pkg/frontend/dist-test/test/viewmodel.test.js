// Contract tests against recorded /v1 payloads: every button corresponds to
// a server-enabled event, every rendered fact traces back to a field.
import { test } from "node:test";
import assert from "node:assert/strict";
import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";
const here = dirname(fileURLToPath(import.meta.url));
import { activeLeaves, connectorTokens, describeBlocker, eventButtons, tickExplanation, wakeEntries, } from "../src/viewmodel.js";
function fixture(name) {
    const path = join(here, "..", "..", "test", "fixtures", name);
    return JSON.parse(readFileSync(path, "utf8"));
}
test("buttons are exactly the server-enabled events", () => {
    const { enabled } = fixture("wm2_mid_run.json");
    const groups = eventButtons(enabled);
    const shown = groups.flatMap((g) => g.buttons)
        .map((b) => `${b.label}|${JSON.stringify(b.binding)}`).sort();
    const served = enabled.events
        .map((e) => `${e.label}|${JSON.stringify(e.binding)}`).sort();
    assert.deepEqual(shown, served);
});
test("buttons group under their kind letters", () => {
    const { enabled } = fixture("wm2_mid_run.json");
    const byKind = new Map(eventButtons(enabled).map((g) => [g.kind, g]));
    assert.ok(byKind.get("E").buttons.some((b) => b.label === "CP.UserStart"));
    assert.ok(byKind.get("P").buttons.some((b) => b.label === "WM.start"));
    assert.ok(byKind.get("S").buttons.some((b) => b.label === "DOOR.doorSettle"));
    // captions carry the parameter witness
    const starts = byKind.get("P").buttons.filter((b) => b.label === "WM.start");
    assert.ok(starts.every((b) => b.caption.includes("p=QUICK")));
});
test("a blocked tick is explained from the blocker list", () => {
    const { enabled } = fixture("wm2_mid_run.json");
    assert.equal(enabled.tick.enabled, false);
    const text = tickExplanation(enabled);
    assert.match(text, /delivery on CI at t=3/);
    assert.match(text, /DOOR has a wake due at t=3/);
    for (const blocker of enabled.tick.blockers) {
        assert.notEqual(describeBlocker(blocker), "");
    }
});
test("an enabled tick needs no explanation", () => {
    const fresh = fixture("session_wm1.json");
    assert.equal(fresh.enabled.tick.enabled, true);
    assert.equal(tickExplanation(fresh.enabled), "");
});
test("connector tokens mirror the channel entries exactly", () => {
    const { state } = fixture("wm2_mid_run.json");
    const tokens = connectorTokens(state);
    const served = [];
    for (const name of Object.keys(state.connectors)) {
        for (const [t] of state.connectors[name].entries)
            served.push([name, t]);
    }
    assert.equal(tokens.length, served.length);
    for (const token of tokens) {
        const entry = state.connectors[token.connector]
            .entries.find(([t]) => t === token.time);
        assert.ok(entry, `${token.connector}@${token.time} is a real entry`);
        assert.equal(token.due, token.time === state.time);
    }
});
test("wake entries and machine leaves mirror the state", () => {
    const { state } = fixture("wm2_mid_run.json");
    const wakes = wakeEntries(state);
    assert.ok(wakes.some((w) => w.component === "DOOR" && w.due));
    const leaves = activeLeaves(state);
    assert.equal(leaves["WM.wmsm"], "IDLEWAITING");
    assert.equal(leaves["DOOR.doorsm"], "DOORUNLOCKED");
});
