// JSON shapes of the /v1 API. The animator renders these and nothing else:
// every displayed fact comes from one of these fields.

export type Value = boolean | number | string;

export interface MachineState {
  leaf: string;
  active: string[];
  mode: "sync" | "async";
}

export interface ComponentState {
  vars: Record<string, Value>;
  machines: Record<string, MachineState>;
}

export interface ConnectorState {
  source: string;
  target: string;
  type: string;
  entries: [number, Value][];
  visible: Value | null;
}

export interface StateJson {
  time: number;
  components: Record<string, ComponentState>;
  connectors: Record<string, ConnectorState>;
  wakes: Record<string, [number, string][]>;
  pending_methods: string[];
  env_fired: number;
  fired_groups: string[];
}

export interface EnabledEventJson {
  component: string;
  operation: string;
  kind: string;
  label: string;
  binding: Record<string, Value>;
  transitions: [string, string][];
}

export interface TickBlocker {
  kind: string;
  name?: string;
  time?: number;
  component?: string;
}

export interface EnabledJson {
  events: EnabledEventJson[];
  tick: { enabled: boolean; blockers: TickBlocker[] };
}

export interface StateNode {
  name: string;
  invariants: string[];
  substates: StateNode[];
}

export interface MachineDecl {
  name: string;
  mode: "sync" | "async";
  states: StateNode[];
  transitions: { name: string; source: string; target: string;
                 operation: string | null }[];
}

export interface ComponentDecl {
  name: string;
  vars: { name: string; type: string }[];
  operations: { name: string; kind: string; wakes: string[];
                params: { name: string; type: string }[] }[];
  machines: MachineDecl[];
}

export interface ModelJson {
  name: string;
  contexts: { name: string; sets: Record<string, string[]>;
              constants: Record<string, Value> }[];
  connectors: { name: string; type: string; source: string;
                target: string }[];
  components: ComponentDecl[];
}

export interface RecordJson {
  time: number;
  label: string;
  kind: string;
  binding: Record<string, Value>;
  moves: [string, string, string][];
  assigns: [string, Value][];
  sends: [string, number, Value][];
  wakes: [string, number][];
  calls: string[];
  warnings: string[];
  line: string;
}

export interface SessionReply {
  session: string;
  model: ModelJson;
  state: StateJson;
  enabled: EnabledJson;
}

export interface StepReply {
  record: RecordJson;
  state: StateJson;
  enabled: EnabledJson;
}

export interface ApiErrorBody {
  error: string;
  detail: unknown;
}
