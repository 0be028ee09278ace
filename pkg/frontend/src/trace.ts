/** Trace file parsing: one JSON record per line, snapshot first. */

export interface NodeRec {
  id: number;
  cls: string;
  attrs: Record<string, unknown>;
  name?: string;
}

export interface EdgeRec extends NodeRec {
  src: number;
  tgt: number;
}

export interface Delta {
  createdNodes: NodeRec[];
  createdEdges: EdgeRec[];
  deleted: { id: number; kind: "node" | "edge" }[];
  attrChanges: { el: number; attr: string; value: unknown }[];
}

export interface SnapshotEvent {
  ordinal: number;
  kind: "snapshot";
  graph: { nodes: NodeRec[]; edges: EdgeRec[] };
}

export interface RuleAppliedEvent {
  ordinal: number;
  kind: "rule-applied";
  rule: string;
  bindings: Record<string, { id: number; cls: string }>;
  delta: Delta;
  emitted: string;
}

export interface SimpleEvent {
  ordinal: number;
  kind: "sequence-enter" | "sequence-exit" | "rule-failed" | "rule-stale";
  text?: string;
  rule?: string;
  result?: boolean;
}

export type TraceEvent = SnapshotEvent | RuleAppliedEvent | SimpleEvent;

const KINDS = new Set([
  "snapshot",
  "sequence-enter",
  "rule-applied",
  "rule-failed",
  "rule-stale",
  "sequence-exit",
]);

const REQUIRED: Record<string, string[]> = {
  snapshot: ["graph"],
  "sequence-enter": ["text"],
  "rule-applied": ["rule", "bindings", "delta", "emitted"],
  "rule-failed": ["rule"],
  "rule-stale": ["rule"],
  "sequence-exit": ["result"],
};

export class TraceFormatError extends Error {
  /** 1-based number of the record that failed; lastValid is the one before it. */
  constructor(message: string, readonly recordNumber: number, readonly lastValid: number) {
    super(`record ${recordNumber}: ${message} (last valid record: ${lastValid})`);
  }
}

export function parseTrace(text: string): TraceEvent[] {
  const events: TraceEvent[] = [];
  const lines = text.split("\n");
  let recordNumber = 0;
  for (const line of lines) {
    const trimmed = line.trim();
    if (!trimmed) continue;
    recordNumber += 1;
    let record: Record<string, unknown>;
    try {
      record = JSON.parse(trimmed);
    } catch (exc) {
      throw new TraceFormatError(`not valid JSON: ${exc}`, recordNumber, recordNumber - 1);
    }
    const kind = record["kind"] as string;
    if (!KINDS.has(kind)) {
      throw new TraceFormatError(`unknown kind ${JSON.stringify(kind)}`, recordNumber, recordNumber - 1);
    }
    if (typeof record["ordinal"] !== "number") {
      throw new TraceFormatError("missing ordinal", recordNumber, recordNumber - 1);
    }
    for (const field of REQUIRED[kind]) {
      if (!(field in record)) {
        throw new TraceFormatError(
          `${kind} record is missing field ${JSON.stringify(field)}`,
          recordNumber,
          recordNumber - 1,
        );
      }
    }
    events.push(record as unknown as TraceEvent);
  }
  if (events.length === 0 || events[0].kind !== "snapshot") {
    throw new TraceFormatError("trace must start with a snapshot record", 1, 0);
  }
  return events;
}
