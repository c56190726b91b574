// DOM/SVG rendering. Everything drawn here is a direct image of the last
// server response handed over by main.ts.
import { connectorEdges, layoutComponents, layoutStateTree, treeExtent, } from "./layout.js";
import { connectorTokens, eventButtons, fmtValue, tickExplanation, wakeEntries, } from "./viewmodel.js";
const SVG_NS = "http://www.w3.org/2000/svg";
function el(tag, cls, text) {
    const node = document.createElement(tag);
    if (cls)
        node.className = cls;
    if (text !== undefined)
        node.textContent = text;
    return node;
}
function svgEl(tag, attrs) {
    const node = document.createElementNS(SVG_NS, tag);
    for (const [k, v] of Object.entries(attrs)) {
        node.setAttribute(k, String(v));
    }
    return node;
}
export function renderComponentDiagram(host, model, state) {
    host.textContent = "";
    const layout = layoutComponents(model);
    const svg = svgEl("svg", {
        width: layout.width, height: Math.max(layout.height, 60),
        class: "component-diagram",
    });
    const defs = svgEl("defs", {});
    const marker = svgEl("marker", {
        id: "arrow", viewBox: "0 0 10 10", refX: 9, refY: 5,
        markerWidth: 7, markerHeight: 7, orient: "auto-start-reverse",
    });
    marker.appendChild(svgEl("path", { d: "M 0 0 L 10 5 L 0 10 z",
        class: "arrow-head" }));
    defs.appendChild(marker);
    svg.appendChild(defs);
    for (const edge of connectorEdges(model, layout)) {
        const conn = state.connectors[edge.name];
        const line = svgEl("line", {
            x1: edge.x1, y1: edge.y1, x2: edge.x2, y2: edge.y2,
            class: "connector-line", "marker-end": "url(#arrow)",
        });
        svg.appendChild(line);
        const pending = conn ? conn.entries.length : 0;
        const label = svgEl("text", {
            x: edge.labelX, y: edge.labelY, class: "connector-label",
            "text-anchor": "middle",
        });
        label.textContent = pending
            ? `${edge.name} ${conn.entries.map(([t, v]) => `${t}↦${fmtValue(v)}`).join(" ")}`
            : edge.name;
        if (conn && conn.entries.some(([t]) => t === state.time)) {
            label.setAttribute("class", "connector-label due");
        }
        svg.appendChild(label);
    }
    for (const comp of model.components) {
        const box = layout.boxes[comp.name];
        const group = svgEl("g", { class: "component-box" });
        group.appendChild(svgEl("rect", {
            x: box.x, y: box.y, width: box.width, height: box.height, rx: 8,
        }));
        const title = svgEl("text", {
            x: box.x + box.width / 2, y: box.y + 18, class: "component-title",
            "text-anchor": "middle",
        });
        title.textContent = comp.name;
        group.appendChild(title);
        const cs = state.components[comp.name];
        let line = 0;
        for (const m of comp.machines) {
            const t = svgEl("text", {
                x: box.x + 10, y: box.y + 38 + line * 15, class: "component-machine",
            });
            t.textContent = `${m.name}: ${cs.machines[m.name].leaf}`;
            group.appendChild(t);
            line += 1;
        }
        for (const v of comp.vars.slice(0, Math.max(0, 4 - line))) {
            const t = svgEl("text", {
                x: box.x + 10, y: box.y + 38 + line * 15, class: "component-var",
            });
            t.textContent = `${v.name} = ${fmtValue(cs.vars[v.name])}`;
            group.appendChild(t);
            line += 1;
        }
        svg.appendChild(group);
    }
    host.appendChild(svg);
}
export function renderMachines(host, model, state) {
    host.textContent = "";
    for (const comp of model.components) {
        for (const machine of comp.machines) {
            const card = el("div", "machine-card");
            const active = state.components[comp.name].machines[machine.name];
            card.appendChild(el("h3", undefined, `${comp.name}.${machine.name} (${machine.mode})`
                + (active.leaf === "@inactive" ? " — inactive" : "")));
            const boxes = layoutStateTree(machine.states);
            const extent = treeExtent(boxes);
            const svg = svgEl("svg", { width: extent.width, height: extent.height,
                class: "machine-diagram" });
            for (const b of [...boxes].sort((p, q) => p.depth - q.depth)) {
                const isActive = active.active.includes(b.name);
                const rect = svgEl("rect", {
                    x: b.x, y: b.y, width: b.width, height: b.height, rx: 10,
                    class: "state-box" + (b.leaf ? " leaf" : " super")
                        + (isActive ? " active" : ""),
                });
                svg.appendChild(rect);
                const label = svgEl("text", {
                    x: b.x + 8, y: b.y + 14, class: "state-label",
                });
                label.textContent = b.name;
                svg.appendChild(label);
            }
            card.appendChild(svg);
            const trans = el("ul", "transition-list");
            for (const t of machine.transitions) {
                const item = el("li", undefined, `${t.name}: ${t.source} → ${t.target}`
                    + (t.operation ? `  [${t.operation}]` : ""));
                trans.appendChild(item);
            }
            card.appendChild(trans);
            host.appendChild(card);
        }
    }
}
export function renderQueues(host, state) {
    host.textContent = "";
    const tokens = connectorTokens(state);
    const wakes = wakeEntries(state);
    const title = el("h3", undefined, `in flight at t=${state.time}`);
    host.appendChild(title);
    const list = el("ul", "queue-list");
    for (const tok of tokens) {
        const cls = tok.due ? "due" : tok.future ? "future" : "stale";
        list.appendChild(el("li", cls, `${tok.connector} @${tok.time} ↦ ${tok.value}`));
    }
    for (const w of wakes) {
        list.appendChild(el("li", "wake" + (w.due ? " due" : ""), `wake ${w.component} @${w.time}`));
    }
    for (const m of state.pending_methods) {
        list.appendChild(el("li", "method due", `method ${m} pending`));
    }
    if (!list.childNodes.length) {
        list.appendChild(el("li", "empty", "nothing pending"));
    }
    host.appendChild(list);
}
export function renderControls(host, enabled, actions) {
    host.textContent = "";
    for (const group of eventButtons(enabled)) {
        const section = el("div", "kind-group");
        section.appendChild(el("h4", undefined, group.title));
        for (const b of group.buttons) {
            const button = el("button", "fire-button", b.caption);
            button.addEventListener("click", () => actions.fire(b.component, b.operation, b.binding));
            section.appendChild(button);
        }
        host.appendChild(section);
    }
    const tickRow = el("div", "tick-row");
    const tickButton = el("button", "tick-button", "tick ⏵");
    tickButton.disabled = !enabled.tick.enabled;
    tickButton.addEventListener("click", () => actions.tick());
    tickRow.appendChild(tickButton);
    if (!enabled.tick.enabled) {
        tickRow.appendChild(el("span", "tick-blocked", tickExplanation(enabled)));
    }
    host.appendChild(tickRow);
    const aux = el("div", "aux-row");
    const undoButton = el("button", undefined, "undo");
    undoButton.addEventListener("click", () => actions.undo());
    const resetButton = el("button", undefined, "reset");
    resetButton.addEventListener("click", () => actions.reset());
    aux.appendChild(undoButton);
    aux.appendChild(resetButton);
    host.appendChild(aux);
}
export function renderTrace(host, records) {
    host.textContent = "";
    host.appendChild(el("h3", undefined, `trace (${records.length} steps)`));
    const pre = el("pre", "trace-log");
    pre.textContent = records.map((r) => r.line).join("\n");
    host.appendChild(pre);
    pre.scrollTop = pre.scrollHeight;
}
export function renderDiagnostics(host, lines) {
    host.textContent = "";
    if (!lines.length)
        return;
    const panel = el("div", "diagnostics");
    panel.appendChild(el("h3", undefined, "diagnostics"));
    for (const line of lines) {
        panel.appendChild(el("div", "diagnostic-line", line));
    }
    host.appendChild(panel);
}
