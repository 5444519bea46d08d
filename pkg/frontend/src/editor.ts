// Editor controller: canvas state (positions, selection, viewport), the
// drag-and-drop model, run orchestration over the job API, and
// import/export. Everything here is DOM-free; ui.ts renders it.
//
// Canvas state is UI-only and deliberately excluded from the exported
// pipeline bytes; layouts live in a sidecar keyed by pipeline digest.

import { ApiClient } from './api';
import { canonicalPipelineText, pipelineDigest } from './canonical';
import { Catalog, EditorGraph, type ConnectVerdict, type PortRef } from './graph';
import { layeredLayout, type NodePosition } from './layout';
import type { Diagnostic, PipelineDoc, RunEvent } from './types';
import { validatePipelineDoc } from './validation';

export type NodeRunState = 'idle' | 'queued' | 'running' | 'done' | 'cached' | 'failed' | 'skipped';

export interface Settings {
  darkMode: boolean;
  edgeCurveWeight: number; // rendering only, never exported
  serverBaseUrl: string;
}

export interface LayoutSidecar {
  pipeline_digest: string;
  positions: Record<string, NodePosition>;
}

export interface RunProgress {
  jobId: string | null;
  queuePosition: number | null;
  terminal: 'job_finished' | 'job_failed' | 'job_cancelled' | null;
  failedNode: string | null;
  error: string | null;
  nodeStates: Map<string, NodeRunState>;
  /** node ids in the order their node_started events arrived */
  startOrder: string[];
  lastSeq: number;
}

export class EditorController {
  readonly graph: EditorGraph;
  readonly positions = new Map<string, NodePosition>();
  selection: string | null = null;
  viewport = { panX: 0, panY: 0, zoom: 1 };
  settings: Settings = { darkMode: true, edgeCurveWeight: 0.5, serverBaseUrl: '' };
  run: RunProgress = emptyRun();

  constructor(readonly catalog: Catalog, public api: ApiClient) {
    this.graph = new EditorGraph(catalog);
  }

  // --- pool / canvas editing ------------------------------------------

  /** Drop a module from the pool onto the canvas. */
  dropModule(moduleId: string, at: NodePosition): string {
    const node = this.graph.addNode(moduleId);
    this.positions.set(node.nodeId, { ...at });
    this.run.nodeStates.set(node.nodeId, 'idle');
    return node.nodeId;
  }

  removeNode(nodeId: string): void {
    this.graph.removeNode(nodeId);
    this.positions.delete(nodeId);
    this.run.nodeStates.delete(nodeId);
    if (this.selection === nodeId) this.selection = null;
  }

  moveNode(nodeId: string, to: NodePosition): void {
    if (this.positions.has(nodeId)) this.positions.set(nodeId, { ...to });
  }

  connect(from: PortRef, to: PortRef): ConnectVerdict {
    return this.graph.connect(from, to);
  }

  // --- validation / export -----------------------------------------------

  validateLocal(): Diagnostic[] {
    return validatePipelineDoc(this.graph.toPipelineDoc(), this.catalog).diagnostics;
  }

  get runnable(): boolean {
    return this.graph.nodes.size > 0 && this.validateLocal().length === 0;
  }

  exportText(): string {
    const diagnostics = this.validateLocal();
    if (diagnostics.length) {
      throw new Error(`cannot export an invalid graph: ${diagnostics.map((d) => d.rule).join(', ')}`);
    }
    return canonicalPipelineText(this.graph.toPipelineDoc(), this.catalog.isFloatParam);
  }

  async exportDigest(): Promise<string> {
    return pipelineDigest(this.exportText());
  }

  importText(text: string, sidecar?: LayoutSidecar): void {
    const doc = JSON.parse(text) as PipelineDoc;
    this.graph.loadPipelineDoc(doc);
    this.positions.clear();
    this.run = emptyRun();
    for (const id of this.graph.nodes.keys()) this.run.nodeStates.set(id, 'idle');
    const stored = sidecar?.positions ?? {};
    const auto = layeredLayout(this.graph);
    for (const id of this.graph.nodes.keys()) {
      this.positions.set(id, stored[id] ?? auto.get(id) ?? { x: 0, y: 0 });
    }
  }

  async layoutSidecar(): Promise<LayoutSidecar> {
    return {
      pipeline_digest: await this.exportDigest(),
      positions: Object.fromEntries(this.positions),
    };
  }

  // --- run orchestration ----------------------------------------------------

  /** Submit the canvas graph and follow its events until terminal. */
  async runPipeline(seed: number, inputs: Record<string, unknown> = {},
                    onUpdate?: (run: RunProgress) => void): Promise<RunProgress> {
    const doc = this.graph.toPipelineDoc();
    const local = validatePipelineDoc(doc, this.catalog);
    if (!local.ok) {
      throw new Error(`graph is invalid: ${local.diagnostics.map((d) => d.rule).join(', ')}`);
    }
    this.run = emptyRun();
    for (const id of this.graph.nodes.keys()) this.run.nodeStates.set(id, 'queued');
    const submitted = await this.api.submitJob(doc, seed, inputs);
    this.run.jobId = submitted.job_id;
    this.run.queuePosition = submitted.position;
    onUpdate?.(this.run);
    await this.api.streamEvents(submitted.job_id, (event) => {
      this.applyEvent(event);
      onUpdate?.(this.run);
    });
    return this.run;
  }

  applyEvent(event: RunEvent): void {
    this.run.lastSeq = event.seq;
    switch (event.kind) {
      case 'job_queued':
        this.run.queuePosition = event.payload['position'] as number;
        break;
      case 'node_started': {
        const node = event.payload['node_id'] as string;
        this.run.nodeStates.set(node, 'running');
        this.run.startOrder.push(node);
        this.run.queuePosition = null;
        break;
      }
      case 'node_finished': {
        const node = event.payload['node_id'] as string;
        this.run.nodeStates.set(node, event.payload['cache_hit'] ? 'cached' : 'done');
        break;
      }
      case 'job_failed': {
        this.run.terminal = event.kind;
        this.run.failedNode = (event.payload['node_id'] as string) ?? null;
        this.run.error = (event.payload['error'] as string) ?? 'failed';
        if (this.run.failedNode) this.run.nodeStates.set(this.run.failedNode, 'failed');
        for (const [id, state] of this.run.nodeStates) {
          if (state === 'queued' || state === 'running') this.run.nodeStates.set(id, 'skipped');
        }
        break;
      }
      case 'job_cancelled':
        this.run.terminal = event.kind;
        for (const [id, state] of this.run.nodeStates) {
          if (state === 'queued' || state === 'running') this.run.nodeStates.set(id, 'skipped');
        }
        break;
      case 'job_finished':
        this.run.terminal = event.kind;
        break;
    }
  }

  async cancelRun(): Promise<void> {
    if (this.run.jobId) await this.api.cancelJob(this.run.jobId);
  }

  previewUrl(nodeId: string, port: string): string | null {
    if (!this.run.jobId) return null;
    const state = this.run.nodeStates.get(nodeId);
    if (state !== 'done' && state !== 'cached') return null;
    return this.api.artifactUrl(this.run.jobId, nodeId, port);
  }
}

function emptyRun(): RunProgress {
  return {
    jobId: null,
    queuePosition: null,
    terminal: null,
    failedNode: null,
    error: null,
    nodeStates: new Map(),
    startOrder: [],
    lastSeq: -1,
  };
}
