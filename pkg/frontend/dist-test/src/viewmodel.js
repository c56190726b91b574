// Pure projection of server responses into what the panels render.
// No simulation happens here: a button exists exactly when the server
// listed the event as enabled, a token exactly when a channel entry exists.
const KIND_TITLES = {
    P: "P — port wake",
    S: "S — self wake",
    E: "E — environment",
    T: "T — transition",
    M: "M — method",
    TR: "T — transition",
};
export function fmtValue(v) {
    if (typeof v === "boolean")
        return v ? "true" : "false";
    return String(v);
}
export function bindingCaption(binding) {
    const parts = Object.keys(binding).sort()
        .map((k) => `${k}=${fmtValue(binding[k])}`);
    return parts.length ? `(${parts.join(", ")})` : "";
}
export function eventButtons(enabled) {
    const groups = new Map();
    for (const ev of enabled.events) {
        const button = {
            label: ev.label,
            component: ev.component,
            operation: ev.operation,
            kind: ev.kind,
            binding: ev.binding,
            caption: `${ev.label} ${bindingCaption(ev.binding)}`.trim(),
        };
        const key = ev.kind === "TR" ? "T" : ev.kind;
        if (!groups.has(key))
            groups.set(key, []);
        groups.get(key).push(button);
    }
    return ["P", "S", "E", "T", "M"]
        .filter((k) => groups.has(k))
        .map((k) => ({ kind: k, title: KIND_TITLES[k], buttons: groups.get(k) }));
}
export function tickExplanation(enabled) {
    if (enabled.tick.enabled)
        return "";
    const parts = enabled.tick.blockers.map(describeBlocker);
    return parts.join("; ");
}
export function describeBlocker(b) {
    switch (b.kind) {
        case "connector":
            return `delivery on ${b.name} at t=${b.time} not yet consumed`;
        case "unconsumed-connector":
            return `delivery on ${b.name} at t=${b.time} has no enabled port wake`;
        case "wake":
            return `${b.name} has a wake due at t=${b.time}`;
        case "unconsumed-wake":
            return `${b.name} has a wake due but no self-wake operation can run`;
        case "method":
            return `method ${b.name} is pending`;
        case "sync-machine":
            return `synchronous machine ${b.name} has not fired this cycle`;
        default:
            return b.kind;
    }
}
export function connectorTokens(state) {
    const out = [];
    for (const name of Object.keys(state.connectors).sort()) {
        for (const [time, value] of state.connectors[name].entries) {
            out.push({
                connector: name,
                time,
                value: fmtValue(value),
                due: time === state.time,
                future: time > state.time,
            });
        }
    }
    return out;
}
export function wakeEntries(state) {
    const out = [];
    for (const comp of Object.keys(state.wakes).sort()) {
        for (const [time] of state.wakes[comp]) {
            out.push({ component: comp, time, due: time === state.time });
        }
    }
    return out;
}
// The state-mirror contract: everything the view model exposes must be
// recoverable from the server payloads it was built from.
export function activeLeaves(state) {
    const out = {};
    for (const comp of Object.keys(state.components)) {
        const machines = state.components[comp].machines;
        for (const m of Object.keys(machines)) {
            out[`${comp}.${m}`] = machines[m].leaf;
        }
    }
    return out;
}
