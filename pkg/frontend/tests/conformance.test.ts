// Conformance against the live server: connection legality for every
// data-type pair, canonical export bytes for generated fixture graphs,
// and live run progress ordering. These are the cross-surface guarantees
// that make the editor a faithful client.

import { afterAll, beforeAll, describe, expect, it } from 'vitest';

import { ApiClient } from '../src/api';
import { canonicalPipelineText, pipelineDigest } from '../src/canonical';
import { dtypeEquals, dtypeLabel } from '../src/dtype';
import { EditorController } from '../src/editor';
import { Catalog, EditorGraph } from '../src/graph';
import type { HyperparamSpec, PipelineDoc, RunEvent } from '../src/types';
import { validatePipelineDoc } from '../src/validation';
import { mulberry32, startServer, type ServerHandle } from './server-helper';

let server: ServerHandle;
let api: ApiClient;
let catalog: Catalog;

beforeAll(async () => {
  server = await startServer();
  api = new ApiClient(server.baseUrl);
  catalog = new Catalog(await api.modules());
});

afterAll(async () => {
  await server?.stop();
});

// one output provider and one input consumer per data type
const PROVIDERS: Array<[string, string, string]> = [
  ['text', 'synth.prompt', 'spec'],
  ['image', 'synth.scene', 'image'],
  ['mask', 'seg.coarse', 'mask'],
  ['number', 'util.const_number', 'value'],
  ['boolean', 'check.presence', 'ok'],
  ['list[text]', 'util.list_text', 'value'],
];
const CONSUMERS: Array<[string, string, string]> = [
  ['text', 'synth.scene', 'spec'],
  ['image', 'seg.coarse', 'image'],
  ['mask', 'seg.morph', 'mask'],
  ['number', 'util.sleep', 'value'],
  ['boolean', 'flow.gate_image', 'ok'],
  ['list[text]', 'util.join_text', 'value'],
];

function pairDoc(srcModule: string, srcPort: string, dstModule: string, dstPort: string): PipelineDoc {
  const graph = new EditorGraph(catalog);
  const src = graph.addNode(srcModule);
  const dst = graph.addNode(dstModule);
  graph.edges.push({
    from: { node: src.nodeId, port: srcPort },
    to: { node: dst.nodeId, port: dstPort },
  });
  return graph.toPipelineDoc();
}

describe('connection matrix conformance', () => {
  it('covers all six data types', () => {
    const spec = (id: string) => catalog.list().find((s) => s.id === id)!;
    for (const [label, moduleId, port] of PROVIDERS) {
      const out = spec(moduleId).outputs.find((p) => p.name === port)!;
      expect(dtypeLabel(out.dtype)).toBe(label);
    }
    for (const [label, moduleId, port] of CONSUMERS) {
      const inp = spec(moduleId).inputs.find((p) => p.name === port)!;
      expect(dtypeLabel(inp.dtype)).toBe(label);
    }
  });

  it('all 6x6 pairs accept/reject identically to server validation', async () => {
    for (const [outLabel, srcModule, srcPort] of PROVIDERS) {
      for (const [inLabel, dstModule, dstPort] of CONSUMERS) {
        const doc = pairDoc(srcModule, srcPort, dstModule, dstPort);
        const serverReport = await api.validate(doc);
        const clientReport = validatePipelineDoc(doc, catalog);
        const serverRules = new Set(serverReport.diagnostics.map((d) => d.rule));
        const clientRules = new Set(clientReport.diagnostics.map((d) => d.rule));
        expect(clientRules, `${outLabel} -> ${inLabel}`).toEqual(serverRules);
        expect(clientReport.ok, `${outLabel} -> ${inLabel}`).toBe(serverReport.ok);
        expect(serverReport.ok, `${outLabel} -> ${inLabel}`).toBe(outLabel === inLabel);

        // the editor's live wiring check agrees with both
        const graph = new EditorGraph(catalog);
        const src = graph.addNode(srcModule);
        const dst = graph.addNode(dstModule);
        const verdict = graph.canConnect(
          { node: src.nodeId, port: srcPort },
          { node: dst.nodeId, port: dstPort },
        );
        expect(verdict.ok, `${outLabel} -> ${inLabel}`).toBe(outLabel === inLabel);
        if (!verdict.ok) expect(verdict.rule).toBe('type_mismatch');
      }
    }
  });

  it('occupied inputs are rejected with the server rule id', async () => {
    const graph = new EditorGraph(catalog);
    const a = graph.addNode('synth.prompt');
    const b = graph.addNode('synth.prompt');
    const sink = graph.addNode('synth.scene');
    expect(graph.connect({ node: a.nodeId, port: 'spec' }, { node: sink.nodeId, port: 'spec' }).ok).toBe(true);
    const verdict = graph.canConnect({ node: b.nodeId, port: 'spec' }, { node: sink.nodeId, port: 'spec' });
    expect(verdict).toMatchObject({ ok: false, rule: 'input_occupied' });
    // force the second edge and confirm the server agrees on the rule
    const doc = graph.toPipelineDoc();
    doc.edges.push({ from: { node: b.nodeId, port: 'spec' }, to: { node: sink.nodeId, port: 'spec' } });
    const report = await api.validate(doc);
    expect(report.diagnostics.map((d) => d.rule)).toContain('input_occupied');
  });
});

// --- fixture graph generation (mirrors the server-side generator idiom) ------

function randomParamValue(rng: () => number, hp: HyperparamSpec): string | number | boolean {
  switch (hp.kind) {
    case 'int': {
      const lo = hp.min ?? 0;
      const hi = Math.min(hp.max ?? lo + 100, lo + 1000);
      return Math.floor(lo + rng() * (hi - lo + 1));
    }
    case 'float': {
      const lo = hp.min ?? 0;
      const hi = hp.max ?? lo + 1;
      return lo + rng() * (hi - lo);
    }
    case 'bool':
      return rng() < 0.5;
    case 'enum':
      return hp.choices![Math.floor(rng() * hp.choices!.length)];
    default:
      return ['alpha', 'blue', 'copper', 'delta'][Math.floor(rng() * 4)];
  }
}

function randomFixtureGraph(rng: () => number): EditorGraph {
  const graph = new EditorGraph(catalog);
  const specs = catalog.list();
  const byType = new Map<string, Array<{ node: string; port: string }>>();
  const n = 1 + Math.floor(rng() * 7);
  for (let i = 0; i < n; i++) {
    const spec = specs[Math.floor(rng() * specs.length)];
    const node = graph.addNode(spec.id);
    for (const hp of spec.hyperparams) {
      const roll = rng();
      if (roll < 0.4) continue;
      if (roll < 0.55) graph.setParam(node.nodeId, hp.name, hp.default);
      else graph.setParam(node.nodeId, hp.name, randomParamValue(rng, hp));
    }
    for (const port of spec.inputs) {
      const candidates = byType.get(dtypeLabel(port.dtype)) ?? [];
      if (candidates.length && (port.required || rng() < 0.5)) {
        const src = candidates[Math.floor(rng() * candidates.length)];
        graph.connect({ node: src.node, port: src.port }, { node: node.nodeId, port: port.name });
      }
    }
    for (const port of spec.outputs) {
      const list = byType.get(dtypeLabel(port.dtype)) ?? [];
      list.push({ node: node.nodeId, port: port.name });
      byType.set(dtypeLabel(port.dtype), list);
    }
  }
  graph.name = `fixture-${Math.floor(rng() * 1e9)}`;
  return graph;
}

describe('canonical export conformance', () => {
  it('export bytes equal server canonical bytes for 20 fixture graphs', async () => {
    const rng = mulberry32(20260810);
    for (let i = 0; i < 20; i++) {
      const graph = randomFixtureGraph(rng);
      const doc = graph.toPipelineDoc();
      expect(validatePipelineDoc(doc, catalog).ok, `fixture ${i} locally valid`).toBe(true);
      const text = canonicalPipelineText(doc, catalog.isFloatParam);
      const pipelineId = await api.storePipeline(text);
      const serverText = await api.loadPipeline(pipelineId);
      expect(text, `fixture ${i} bytes`).toBe(serverText);
      expect(await pipelineDigest(text), `fixture ${i} digest`).toBe(pipelineId);
    }
  });

  it('importing a server-canonical file re-exports byte-identically', async () => {
    const rng = mulberry32(77);
    const graph = randomFixtureGraph(rng);
    const pipelineId = await api.storePipeline(
      canonicalPipelineText(graph.toPipelineDoc(), catalog.isFloatParam));
    const serverText = await api.loadPipeline(pipelineId);

    const controller = new EditorController(catalog, api);
    controller.importText(serverText);
    expect(controller.exportText()).toBe(serverText);
  });
});

describe('live run conformance', () => {
  function scenarioController(): { controller: EditorController; ids: Record<string, string> } {
    const controller = new EditorController(catalog, api);
    const prompt = controller.dropModule('synth.prompt', { x: 0, y: 0 });
    const scene = controller.dropModule('synth.scene', { x: 200, y: 0 });
    const verify = controller.dropModule('check.presence', { x: 400, y: 0 });
    const gate = controller.dropModule('flow.gate_image', { x: 600, y: 0 });
    const seg = controller.dropModule('seg.coarse', { x: 800, y: 0 });
    controller.graph.setParam(prompt, 'classes', 'car:1,dog:1');
    controller.graph.setParam(prompt, 'width', 96);
    controller.graph.setParam(prompt, 'height', 72);
    controller.connect({ node: prompt, port: 'spec' }, { node: scene, port: 'spec' });
    controller.connect({ node: prompt, port: 'spec' }, { node: verify, port: 'spec' });
    controller.connect({ node: scene, port: 'image' }, { node: verify, port: 'image' });
    controller.connect({ node: verify, port: 'ok' }, { node: gate, port: 'ok' });
    controller.connect({ node: scene, port: 'image' }, { node: gate, port: 'value' });
    controller.connect({ node: gate, port: 'value' }, { node: seg, port: 'image' });
    return { controller, ids: { prompt, scene, verify, gate, seg } };
  }

  it('a run lights nodes up in dependency order and finishes', async () => {
    const { controller, ids } = scenarioController();
    const snapshots: string[][] = [];
    const run = await controller.runPipeline(7, {}, (r) => {
      snapshots.push([...r.startOrder]);
    });
    expect(run.terminal).toBe('job_finished');
    for (const state of run.nodeStates.values()) {
      expect(['done', 'cached']).toContain(state);
    }
    // dependency order: a node starts only after all its predecessors
    const preds = controller.graph.predecessors();
    const position = new Map(run.startOrder.map((id, i) => [id, i]));
    for (const [node, ps] of preds) {
      for (const p of ps) {
        expect(position.get(p)!, `${p} before ${node}`).toBeLessThan(position.get(node)!);
      }
    }
    expect(snapshots.length).toBeGreaterThan(0);
    // previews become available for finished image/mask outputs
    expect(controller.previewUrl(ids.scene, 'image')).toContain('/artifacts/');
  });

  it('a failing gate marks the node failed and downstream skipped', async () => {
    const { controller, ids } = scenarioController();
    controller.graph.setParam(ids.scene, 'class_dropout_rate', 1.0);
    const run = await controller.runPipeline(3);
    expect(run.terminal).toBe('job_failed');
    expect(run.failedNode).toBe(ids.gate);
    expect(run.nodeStates.get(ids.gate)).toBe('failed');
    expect(run.nodeStates.get(ids.seg)).toBe('skipped');
  });

  it('event stream resumes from a given seq without gaps or duplicates', async () => {
    const { controller } = scenarioController();
    const doc = controller.graph.toPipelineDoc();
    const { job_id } = await api.submitJob(doc, 11);
    const all: RunEvent[] = [];
    await api.streamEvents(job_id, (e) => all.push(e));
    expect(all.map((e) => e.seq)).toEqual(all.map((_, i) => i));
    const tail: RunEvent[] = [];
    await api.streamEvents(job_id, (e) => tail.push(e), 4);
    expect(tail.map((e) => e.seq)).toEqual(all.slice(4).map((e) => e.seq));
  });

  it('server rejection surfaces the full validation report', async () => {
    const controller = new EditorController(catalog, api);
    const a = controller.dropModule('seg.morph', { x: 0, y: 0 });
    const b = controller.dropModule('seg.morph', { x: 0, y: 0 });
    controller.connect({ node: a, port: 'mask' }, { node: b, port: 'mask' });
    controller.graph.edges.push({ from: { node: b, port: 'mask' }, to: { node: a, port: 'mask' } });
    const doc = controller.graph.toPipelineDoc();
    // client catches it first
    expect(validatePipelineDoc(doc, catalog).ok).toBe(false);
    // and the server returns the same rule in its rejection report
    let rejected = false;
    try {
      await api.submitJob(doc, 1);
    } catch (err: any) {
      rejected = true;
      expect(err.code).toBe('validation_failed');
      expect(err.report.diagnostics.map((d: any) => d.rule)).toContain('cycle');
    }
    expect(rejected).toBe(true);
  });
});
