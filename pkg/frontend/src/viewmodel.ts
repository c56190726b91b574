// Pure projection of server responses into what the panels render.
// No simulation happens here: a button exists exactly when the server
// listed the event as enabled, a token exactly when a channel entry exists.

import type {
  EnabledJson, StateJson, TickBlocker, Value,
} from "./types.js";

export interface EventButton {
  label: string;            // Comp.op
  component: string;
  operation: string;
  kind: string;
  binding: Record<string, Value>;
  caption: string;          // label plus rendered binding
}

export interface KindGroup {
  kind: string;
  title: string;
  buttons: EventButton[];
}

const KIND_TITLES: Record<string, string> = {
  P: "P — port wake",
  S: "S — self wake",
  E: "E — environment",
  T: "T — transition",
  M: "M — method",
  TR: "T — transition",
};

export function fmtValue(v: Value): string {
  if (typeof v === "boolean") return v ? "true" : "false";
  return String(v);
}

export function bindingCaption(binding: Record<string, Value>): string {
  const parts = Object.keys(binding).sort()
    .map((k) => `${k}=${fmtValue(binding[k])}`);
  return parts.length ? `(${parts.join(", ")})` : "";
}

export function eventButtons(enabled: EnabledJson): KindGroup[] {
  const groups = new Map<string, EventButton[]>();
  for (const ev of enabled.events) {
    const button: EventButton = {
      label: ev.label,
      component: ev.component,
      operation: ev.operation,
      kind: ev.kind,
      binding: ev.binding,
      caption: `${ev.label} ${bindingCaption(ev.binding)}`.trim(),
    };
    const key = ev.kind === "TR" ? "T" : ev.kind;
    if (!groups.has(key)) groups.set(key, []);
    groups.get(key)!.push(button);
  }
  return ["P", "S", "E", "T", "M"]
    .filter((k) => groups.has(k))
    .map((k) => ({ kind: k, title: KIND_TITLES[k], buttons: groups.get(k)! }));
}

export function tickExplanation(enabled: EnabledJson): string {
  if (enabled.tick.enabled) return "";
  const parts = enabled.tick.blockers.map(describeBlocker);
  return parts.join("; ");
}

export function describeBlocker(b: TickBlocker): string {
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

export interface ConnectorToken {
  connector: string;
  time: number;
  value: string;
  due: boolean;     // deliverable this very cycle
  future: boolean;
}

export function connectorTokens(state: StateJson): ConnectorToken[] {
  const out: ConnectorToken[] = [];
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

export interface WakeEntry {
  component: string;
  time: number;
  due: boolean;
}

export function wakeEntries(state: StateJson): WakeEntry[] {
  const out: WakeEntry[] = [];
  for (const comp of Object.keys(state.wakes).sort()) {
    for (const [time] of state.wakes[comp]) {
      out.push({ component: comp, time, due: time === state.time });
    }
  }
  return out;
}

// The state-mirror contract: everything the view model exposes must be
// recoverable from the server payloads it was built from.
export function activeLeaves(state: StateJson): Record<string, string> {
  const out: Record<string, string> = {};
  for (const comp of Object.keys(state.components)) {
    const machines = state.components[comp].machines;
    for (const m of Object.keys(machines)) {
      out[`${comp}.${m}`] = machines[m].leaf;
    }
  }
  return out;
}
