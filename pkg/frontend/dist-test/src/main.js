// App wiring: one session per tab, every user action round-trips through
// the server and the panels re-render from the fresh response.
import { ApiError, Client } from "./api.js";
import { download, goldenFilename, observableNames } from "./golden.js";
import { renderComponentDiagram, renderControls, renderDiagnostics, renderMachines, renderQueues, renderTrace, } from "./render.js";
const client = new Client();
let app = null;
function byId(id) {
    const node = document.getElementById(id);
    if (!node)
        throw new Error(`missing #${id}`);
    return node;
}
function redraw() {
    if (!app)
        return;
    byId("time-badge").textContent = `t = ${app.state.time}`;
    renderComponentDiagram(byId("diagram"), app.model, app.state);
    renderMachines(byId("machines"), app.model, app.state);
    renderQueues(byId("queues"), app.state);
    renderControls(byId("controls"), app.enabled, {
        fire: doFire, tick: doTick, undo: doUndo, reset: doReset,
    });
    renderTrace(byId("trace"), app.records);
    renderObservables();
}
function renderObservables() {
    if (!app)
        return;
    const host = byId("observables");
    host.textContent = "";
    for (const name of observableNames(app.model)) {
        const label = document.createElement("label");
        const box = document.createElement("input");
        box.type = "checkbox";
        box.value = name;
        box.checked = true;
        label.appendChild(box);
        label.appendChild(document.createTextNode(" " + name));
        host.appendChild(label);
    }
}
function note(text) {
    byId("status").textContent = text;
}
function describeApiError(e) {
    if (e instanceof ApiError) {
        const detail = typeof e.detail === "string"
            ? e.detail : JSON.stringify(e.detail);
        return `${e.code}: ${detail}`;
    }
    return String(e);
}
async function loadModel(text, name) {
    renderDiagnostics(byId("diagnostics-host"), []);
    try {
        const reply = await client.createSession(text, name);
        app = {
            session: reply.session,
            model: reply.model,
            state: reply.state,
            enabled: reply.enabled,
            records: [],
        };
        note(`session ${reply.session} (${reply.model.name})`);
        redraw();
    }
    catch (e) {
        app = null;
        if (e instanceof ApiError && Array.isArray(e.detail)) {
            renderDiagnostics(byId("diagnostics-host"), e.detail);
            note("model rejected");
            return;
        }
        note(describeApiError(e));
    }
}
async function doFire(component, operation, binding) {
    if (!app)
        return;
    try {
        const reply = await client.fire(app.session, component, operation, binding);
        app.state = reply.state;
        app.enabled = reply.enabled;
        app.records.push(reply.record);
        note(`fired ${reply.record.label}`);
        redraw();
    }
    catch (e) {
        note(describeApiError(e));
    }
}
async function doTick() {
    if (!app)
        return;
    try {
        const reply = await client.tick(app.session);
        app.state = reply.state;
        app.enabled = reply.enabled;
        app.records.push(reply.record);
        note(`tick → t=${app.state.time}`);
        redraw();
    }
    catch (e) {
        note(describeApiError(e));
    }
}
async function doUndo() {
    if (!app)
        return;
    try {
        const reply = await client.undo(app.session);
        app.state = reply.state;
        app.enabled = reply.enabled;
        app.records.pop();
        note("undone");
        redraw();
    }
    catch (e) {
        note(describeApiError(e));
    }
}
async function doReset() {
    if (!app)
        return;
    const reply = await client.reset(app.session);
    app.state = reply.state;
    app.enabled = reply.enabled;
    app.records = [];
    note("reset");
    redraw();
}
async function exportGolden() {
    if (!app)
        return;
    const observe = Array.from(byId("observables").querySelectorAll("input"))
        .filter((box) => box.checked)
        .map((box) => box.value);
    if (!observe.length) {
        note("select at least one observable before exporting");
        return;
    }
    try {
        const reply = await client.golden(app.session, observe, app.scenarioText);
        download(goldenFilename(app.model.name), reply.golden);
        note("golden exported");
    }
    catch (e) {
        note(describeApiError(e));
    }
}
async function replayTrace(text) {
    if (!app)
        return;
    try {
        await client.replay(app.session, text);
        const [trace, state, enabled] = await Promise.all([
            client.trace(app.session),
            client.state(app.session),
            client.enabled(app.session),
        ]);
        app.records = trace.records;
        app.state = state.state;
        app.enabled = enabled.enabled;
        note(`replayed ${app.records.length} steps`);
        redraw();
    }
    catch (e) {
        note(describeApiError(e));
    }
}
async function boot() {
    const picker = byId("examples");
    try {
        const { examples } = await client.examples();
        for (const ex of examples) {
            const opt = document.createElement("option");
            opt.value = ex.text;
            opt.textContent = ex.name;
            picker.appendChild(opt);
        }
    }
    catch {
        note("server unreachable; start it with: coda serve --ui frontend/dist");
    }
    byId("load-example").addEventListener("click", () => {
        if (picker.value) {
            void loadModel(picker.value, picker.selectedOptions[0]?.textContent ?? undefined);
        }
    });
    byId("load-text").addEventListener("click", () => {
        const area = byId("model-text");
        if (area.value.trim())
            void loadModel(area.value);
    });
    byId("model-file").addEventListener("change", async (event) => {
        const input = event.target;
        const file = input.files?.[0];
        if (file)
            void loadModel(await file.text(), file.name);
    });
    byId("export-golden").addEventListener("click", () => void exportGolden());
    byId("replay-button").addEventListener("click", () => {
        const area = byId("replay-text");
        if (area.value.trim())
            void replayTrace(area.value);
    });
    byId("scenario-file").addEventListener("change", async (event) => {
        const input = event.target;
        const file = input.files?.[0];
        if (file && app) {
            app.scenarioText = await file.text();
            note(`scenario ${file.name} attached to golden exports`);
        }
    });
}
document.addEventListener("DOMContentLoaded", () => void boot());
