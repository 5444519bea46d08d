// Editor-side graph model: nodes with bound params, typed edges, and
// export to the canonical pipeline document. Connection attempts are
// checked with exactly the rules the server's validator applies, so the
// editor never draws an edge the server would reject.

import { dtypeEquals } from './dtype';
import type {
  HyperparamSpec,
  ModuleSpec,
  ParamValue,
  PipelineDoc,
  PipelineEdgeJson,
  PortSpec,
} from './types';

export interface PortRef {
  node: string;
  port: string;
}

export interface EditorNode {
  nodeId: string;
  moduleId: string;
  moduleVersion: number;
  params: Record<string, ParamValue>;
}

export type ConnectVerdict =
  | { ok: true }
  | { ok: false; rule: 'unknown_node' | 'unknown_port' | 'type_mismatch' | 'input_occupied' | 'cycle'; reason: string };

export class Catalog {
  private byId = new Map<string, ModuleSpec>();

  constructor(specs: ModuleSpec[]) {
    for (const spec of specs) this.byId.set(`${spec.id}@${spec.version}`, spec);
  }

  get(moduleId: string, version: number): ModuleSpec | undefined {
    return this.byId.get(`${moduleId}@${version}`);
  }

  list(): ModuleSpec[] {
    return [...this.byId.values()].sort((a, b) => (a.id < b.id ? -1 : 1));
  }

  search(query: string): ModuleSpec[] {
    const q = query.trim().toLowerCase();
    if (!q) return this.list();
    return this.list().filter((spec) =>
      spec.id.includes(q) ||
      spec.display_name.toLowerCase().includes(q) ||
      spec.labels.some((label) => label.toLowerCase().includes(q)),
    );
  }

  isFloatParam = (moduleId: string, version: number, param: string): boolean => {
    const hp = this.get(moduleId, version)?.hyperparams.find((h) => h.name === param);
    return hp?.kind === 'float';
  };
}

export class EditorGraph {
  name = 'untitled';
  readonly nodes = new Map<string, EditorNode>();
  edges: PipelineEdgeJson[] = [];
  /** metadata carried through import/export; external_inputs is recomputed */
  extraMetadata: Record<string, string> = {};
  private counter = 0;
  private importedExternalDecl: string | null = null;

  constructor(readonly catalog: Catalog) {}

  spec(nodeId: string): ModuleSpec {
    const node = this.nodes.get(nodeId);
    if (!node) throw new Error(`no node ${nodeId}`);
    const spec = this.catalog.get(node.moduleId, node.moduleVersion);
    if (!spec) throw new Error(`module ${node.moduleId}@${node.moduleVersion} missing from catalog`);
    return spec;
  }

  addNode(moduleId: string, version?: number): EditorNode {
    const spec = version !== undefined
      ? this.catalog.get(moduleId, version)
      : this.catalog.list().find((s) => s.id === moduleId);
    if (!spec) throw new Error(`module ${moduleId} is not in the catalog`);
    const base = spec.id.split('.').pop() ?? 'node';
    let nodeId = `${base}_${this.counter++}`;
    while (this.nodes.has(nodeId)) nodeId = `${base}_${this.counter++}`;
    const node: EditorNode = {
      nodeId,
      moduleId: spec.id,
      moduleVersion: spec.version,
      params: {},
    };
    this.nodes.set(nodeId, node);
    return node;
  }

  removeNode(nodeId: string): void {
    this.nodes.delete(nodeId);
    this.edges = this.edges.filter((e) => e.from.node !== nodeId && e.to.node !== nodeId);
  }

  private outputPort(ref: PortRef): PortSpec | undefined {
    return this.nodes.has(ref.node)
      ? this.spec(ref.node).outputs.find((p) => p.name === ref.port)
      : undefined;
  }

  private inputPort(ref: PortRef): PortSpec | undefined {
    return this.nodes.has(ref.node)
      ? this.spec(ref.node).inputs.find((p) => p.name === ref.port)
      : undefined;
  }

  private reaches(from: string, to: string): boolean {
    if (from === to) return true;
    const succs = new Map<string, string[]>();
    for (const e of this.edges) {
      const list = succs.get(e.from.node) ?? [];
      list.push(e.to.node);
      succs.set(e.from.node, list);
    }
    const stack = [from];
    const seen = new Set<string>();
    while (stack.length) {
      const cur = stack.pop()!;
      if (cur === to) return true;
      if (seen.has(cur)) continue;
      seen.add(cur);
      stack.push(...(succs.get(cur) ?? []));
    }
    return false;
  }

  canConnect(from: PortRef, to: PortRef): ConnectVerdict {
    if (!this.nodes.has(from.node) || !this.nodes.has(to.node)) {
      return { ok: false, rule: 'unknown_node', reason: 'endpoint node does not exist' };
    }
    const src = this.outputPort(from);
    const dst = this.inputPort(to);
    if (!src) return { ok: false, rule: 'unknown_port', reason: `${from.node} has no output ${from.port}` };
    if (!dst) return { ok: false, rule: 'unknown_port', reason: `${to.node} has no input ${to.port}` };
    if (!dtypeEquals(src.dtype, dst.dtype)) {
      return { ok: false, rule: 'type_mismatch', reason: 'port data types differ' };
    }
    if (this.edges.some((e) => e.to.node === to.node && e.to.port === to.port)) {
      return { ok: false, rule: 'input_occupied', reason: 'input already has an edge' };
    }
    if (this.reaches(to.node, from.node)) {
      return { ok: false, rule: 'cycle', reason: 'connection would close a cycle' };
    }
    return { ok: true };
  }

  connect(from: PortRef, to: PortRef): ConnectVerdict {
    const verdict = this.canConnect(from, to);
    if (verdict.ok) {
      this.edges.push({ from: { node: from.node, port: from.port }, to: { node: to.node, port: to.port } });
    }
    return verdict;
  }

  disconnect(to: PortRef): void {
    this.edges = this.edges.filter((e) => !(e.to.node === to.node && e.to.port === to.port));
  }

  setParam(nodeId: string, name: string, value: ParamValue): void {
    const hp = this.spec(nodeId).hyperparams.find((h) => h.name === name);
    if (!hp) throw new Error(`module has no hyperparam ${name}`);
    this.nodes.get(nodeId)!.params[name] = value;
  }

  paramValue(nodeId: string, hp: HyperparamSpec): ParamValue {
    return this.nodes.get(nodeId)!.params[hp.name] ?? hp.default;
  }

  /** Required inputs that no edge feeds; these become external inputs. */
  unfedRequiredInputs(): PortRef[] {
    const fed = new Set(this.edges.map((e) => `${e.to.node}.${e.to.port}`));
    const out: PortRef[] = [];
    for (const node of this.nodes.values()) {
      const spec = this.catalog.get(node.moduleId, node.moduleVersion);
      if (!spec) continue;
      for (const port of spec.inputs) {
        if (port.required && !fed.has(`${node.nodeId}.${port.name}`)) {
          out.push({ node: node.nodeId, port: port.name });
        }
      }
    }
    return out;
  }

  /** Materialized defaults plus explicit bindings, as the server exports. */
  private materializedParams(node: EditorNode): Record<string, ParamValue> {
    const spec = this.catalog.get(node.moduleId, node.moduleVersion);
    const params: Record<string, ParamValue> = {};
    for (const hp of spec?.hyperparams ?? []) params[hp.name] = hp.default;
    Object.assign(params, node.params);
    return params;
  }

  toPipelineDoc(): PipelineDoc {
    const externals = this.unfedRequiredInputs().map((r) => `${r.node}.${r.port}`);
    const metadata: Record<string, string> = { ...this.extraMetadata };
    delete metadata['external_inputs'];
    // keep an imported declaration verbatim while it still covers the same
    // port set, so import -> export is byte-stable
    const imported = this.importedExternalDecl;
    const importedSet = new Set((imported ?? '').split(',').map((s) => s.trim()).filter(Boolean));
    const sameSet = imported !== null &&
      importedSet.size === externals.length && externals.every((e) => importedSet.has(e));
    if (sameSet) {
      metadata['external_inputs'] = imported!;
    } else if (externals.length) {
      metadata['external_inputs'] = externals.join(',');
    }
    return {
      format_version: 1,
      name: this.name,
      metadata,
      nodes: [...this.nodes.values()].map((n) => ({
        node_id: n.nodeId,
        module_id: n.moduleId,
        module_version: n.moduleVersion,
        params: this.materializedParams(n),
      })),
      edges: this.edges.map((e) => ({ from: { ...e.from }, to: { ...e.to } })),
    };
  }

  /** Replace the current contents with an imported document. */
  loadPipelineDoc(doc: PipelineDoc): void {
    if (doc.format_version !== 1) {
      throw new Error(`unsupported format_version ${doc.format_version}`);
    }
    this.nodes.clear();
    this.edges = [];
    this.name = doc.name;
    const { external_inputs, ...rest } = doc.metadata;
    this.extraMetadata = rest;
    this.importedExternalDecl = external_inputs ?? null;
    for (const n of doc.nodes) {
      this.nodes.set(n.node_id, {
        nodeId: n.node_id,
        moduleId: n.module_id,
        moduleVersion: n.module_version,
        params: { ...n.params },
      });
    }
    this.edges = doc.edges.map((e) => ({ from: { ...e.from }, to: { ...e.to } }));
    this.counter = this.nodes.size;
  }

  /** Dependency levels for auto-layout and progress ordering. */
  waves(): string[][] {
    const preds = new Map<string, Set<string>>();
    for (const id of this.nodes.keys()) preds.set(id, new Set());
    for (const e of this.edges) {
      if (preds.has(e.to.node) && preds.has(e.from.node)) preds.get(e.to.node)!.add(e.from.node);
    }
    const done = new Set<string>();
    const out: string[][] = [];
    let remaining = [...preds.keys()];
    while (remaining.length) {
      const ready = remaining
        .filter((id) => [...preds.get(id)!].every((p) => done.has(p)))
        .sort();
      if (!ready.length) throw new Error('graph has a cycle');
      out.push(ready);
      for (const id of ready) done.add(id);
      remaining = remaining.filter((id) => !done.has(id));
    }
    return out;
  }

  predecessors(): Map<string, Set<string>> {
    const preds = new Map<string, Set<string>>();
    for (const id of this.nodes.keys()) preds.set(id, new Set());
    for (const e of this.edges) {
      if (preds.has(e.to.node) && preds.has(e.from.node)) preds.get(e.to.node)!.add(e.from.node);
    }
    return preds;
  }
}
