import { describe, expect, it } from 'vitest';

import type { PipelineDoc } from '../src/types';
import { validatePipelineDoc } from '../src/validation';
import { makeCatalog } from './catalog';

const catalog = makeCatalog();

function doc(partial: Partial<PipelineDoc>): PipelineDoc {
  return { format_version: 1, name: 't', metadata: {}, nodes: [], edges: [], ...partial };
}

function rules(d: PipelineDoc): Set<string> {
  return new Set(validatePipelineDoc(d, catalog).diagnostics.map((x) => x.rule));
}

describe('validatePipelineDoc', () => {
  it('accepts a wired scenario', () => {
    const d = doc({
      nodes: [
        { node_id: 'p', module_id: 'synth.prompt', module_version: 1, params: {} },
        { node_id: 's', module_id: 'synth.scene', module_version: 1, params: {} },
      ],
      edges: [{ from: { node: 'p', port: 'spec' }, to: { node: 's', port: 'spec' } }],
    });
    expect(validatePipelineDoc(d, catalog).ok).toBe(true);
  });

  it('flags duplicate node ids', () => {
    const d = doc({
      nodes: [
        { node_id: 'p', module_id: 'synth.prompt', module_version: 1, params: {} },
        { node_id: 'p', module_id: 'synth.prompt', module_version: 1, params: {} },
      ],
    });
    expect(rules(d)).toEqual(new Set(['duplicate_node_id']));
  });

  it('flags unknown modules and versions', () => {
    expect(rules(doc({
      nodes: [{ node_id: 'x', module_id: 'no.such', module_version: 1, params: {} }],
    }))).toEqual(new Set(['unknown_module']));
    expect(rules(doc({
      nodes: [{ node_id: 'x', module_id: 'synth.prompt', module_version: 9, params: {} }],
    }))).toEqual(new Set(['unknown_module']));
  });

  it('flags type mismatch with edge locus', () => {
    const d = doc({
      nodes: [
        { node_id: 'p', module_id: 'synth.prompt', module_version: 1, params: {} },
        { node_id: 'c', module_id: 'seg.coarse', module_version: 1, params: {} },
      ],
      edges: [{ from: { node: 'p', port: 'spec' }, to: { node: 'c', port: 'image' } }],
    });
    const report = validatePipelineDoc(d, catalog);
    expect(new Set(report.diagnostics.map((x) => x.rule))).toEqual(new Set(['type_mismatch']));
    expect(report.diagnostics[0].edges[0].from.node).toBe('p');
  });

  it('flags occupied inputs, cycles, bad params, externals', () => {
    expect(rules(doc({
      nodes: [
        { node_id: 'a', module_id: 'synth.prompt', module_version: 1, params: {} },
        { node_id: 'b', module_id: 'synth.prompt', module_version: 1, params: {} },
        { node_id: 's', module_id: 'synth.scene', module_version: 1, params: {} },
      ],
      edges: [
        { from: { node: 'a', port: 'spec' }, to: { node: 's', port: 'spec' } },
        { from: { node: 'b', port: 'spec' }, to: { node: 's', port: 'spec' } },
      ],
    }))).toEqual(new Set(['input_occupied']));

    expect(rules(doc({
      nodes: [
        { node_id: 'a', module_id: 'seg.coarse', module_version: 1, params: {} },
        { node_id: 'g', module_id: 'flow.gate_image', module_version: 1, params: {} },
      ],
      edges: [
        { from: { node: 'g', port: 'value' }, to: { node: 'a', port: 'image' } },
        { from: { node: 'a', port: 'mask' }, to: { node: 'g', port: 'value' } },
      ],
      metadata: { external_inputs: 'g.ok' },
    }))).toEqual(new Set(['cycle', 'type_mismatch']));

    expect(rules(doc({
      nodes: [{ node_id: 'p', module_id: 'synth.prompt', module_version: 1,
                params: { width: 'wide', nope: 1 } }],
    }))).toEqual(new Set(['bad_param']));

    expect(rules(doc({
      nodes: [{ node_id: 's', module_id: 'synth.scene', module_version: 1, params: {} }],
      metadata: { external_inputs: 'ghost.spec' },
    }))).toEqual(new Set(['bad_external_input', 'missing_required_input']));
  });

  it('missing required inputs unless declared external', () => {
    const bare = doc({
      nodes: [{ node_id: 's', module_id: 'synth.scene', module_version: 1, params: {} }],
    });
    expect(rules(bare)).toEqual(new Set(['missing_required_input']));
    const declared = doc({
      nodes: [{ node_id: 's', module_id: 'synth.scene', module_version: 1, params: {} }],
      metadata: { external_inputs: 's.spec' },
    });
    expect(validatePipelineDoc(declared, catalog).ok).toBe(true);
  });

  it('cycle diagnostics list exactly the participating nodes', () => {
    const d = doc({
      nodes: [
        { node_id: 'a', module_id: 'seg.coarse', module_version: 1, params: {} },
        { node_id: 'g', module_id: 'flow.gate_image', module_version: 1, params: {} },
        { node_id: 'tail', module_id: 'seg.coarse', module_version: 1, params: {} },
      ],
      edges: [
        { from: { node: 'g', port: 'value' }, to: { node: 'a', port: 'image' } },
        { from: { node: 'a', port: 'mask' }, to: { node: 'g', port: 'value' } },
        { from: { node: 'g', port: 'value' }, to: { node: 'tail', port: 'image' } },
      ],
      metadata: { external_inputs: 'g.ok' },
    });
    const cycle = validatePipelineDoc(d, catalog).diagnostics.find((x) => x.rule === 'cycle')!;
    expect(cycle.nodes).toEqual(['a', 'g']);
  });
});
