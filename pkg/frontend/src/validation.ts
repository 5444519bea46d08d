// Client-side mirror of server graph validation. Rule ids, coverage, and
// verdicts must match the server exactly; the conformance suite checks
// this table-driven against POST /pipelines/validate.

import { dtypeEquals } from './dtype';
import type { Catalog } from './graph';
import type { Diagnostic, ParamValue, PipelineDoc, ValidationReport } from './types';

function checkParam(kind: string, value: ParamValue, min?: number, max?: number, choices?: string[]): string | null {
  if (kind === 'int' && (typeof value !== 'number' || !Number.isInteger(value) || typeof value === 'boolean')) {
    return `must be an integer, got ${JSON.stringify(value)}`;
  }
  if (kind === 'float' && typeof value !== 'number') {
    return `must be a number, got ${JSON.stringify(value)}`;
  }
  if (kind === 'bool' && typeof value !== 'boolean') {
    return `must be a boolean, got ${JSON.stringify(value)}`;
  }
  if ((kind === 'string' || kind === 'enum') && typeof value !== 'string') {
    return `must be a string, got ${JSON.stringify(value)}`;
  }
  if ((kind === 'int' || kind === 'float') && typeof value === 'number') {
    if (min !== undefined && value < min) return `${value} is below minimum ${min}`;
    if (max !== undefined && value > max) return `${value} is above maximum ${max}`;
  }
  if (kind === 'enum' && choices && !choices.includes(value as string)) {
    return `${JSON.stringify(value)} is not one of the choices`;
  }
  return null;
}

function parseExternalInputs(metadata: Record<string, string>): Array<[string, string]> {
  const raw = metadata['external_inputs'] ?? '';
  const out: Array<[string, string]> = [];
  for (const chunk of raw.split(',')) {
    const item = chunk.trim();
    if (!item) continue;
    const dot = item.indexOf('.');
    out.push(dot < 0 ? [item, ''] : [item.slice(0, dot), item.slice(dot + 1)]);
  }
  return out;
}

function stronglyConnectedCycles(nodeIds: string[], doc: PipelineDoc): string[][] {
  const succs = new Map<string, string[]>();
  for (const id of nodeIds) succs.set(id, []);
  const selfLoops = new Set<string>();
  for (const e of doc.edges) {
    if (succs.has(e.from.node) && succs.has(e.to.node)) {
      succs.get(e.from.node)!.push(e.to.node);
      if (e.from.node === e.to.node) selfLoops.add(e.from.node);
    }
  }
  const index = new Map<string, number>();
  const low = new Map<string, number>();
  const onStack = new Set<string>();
  const stack: string[] = [];
  let counter = 0;
  const cycles: string[][] = [];

  function strongconnect(root: string): void {
    const work: Array<[string, string[], number]> = [[root, [...succs.get(root)!].sort(), 0]];
    index.set(root, counter);
    low.set(root, counter);
    counter++;
    stack.push(root);
    onStack.add(root);
    while (work.length) {
      const frame = work[work.length - 1];
      const [node, kids] = frame;
      let advanced = false;
      while (frame[2] < kids.length) {
        const next = kids[frame[2]++];
        if (!index.has(next)) {
          index.set(next, counter);
          low.set(next, counter);
          counter++;
          stack.push(next);
          onStack.add(next);
          work.push([next, [...succs.get(next)!].sort(), 0]);
          advanced = true;
          break;
        }
        if (onStack.has(next)) low.set(node, Math.min(low.get(node)!, index.get(next)!));
      }
      if (advanced) continue;
      work.pop();
      if (work.length) {
        const parent = work[work.length - 1][0];
        low.set(parent, Math.min(low.get(parent)!, low.get(node)!));
      }
      if (low.get(node) === index.get(node)) {
        const comp: string[] = [];
        for (;;) {
          const top = stack.pop()!;
          onStack.delete(top);
          comp.push(top);
          if (top === node) break;
        }
        if (comp.length > 1 || selfLoops.has(comp[0])) cycles.push(comp.sort());
      }
    }
  }

  for (const id of nodeIds) if (!index.has(id)) strongconnect(id);
  return cycles;
}

export function validatePipelineDoc(doc: PipelineDoc, catalog: Catalog): ValidationReport {
  const diags: Diagnostic[] = [];
  const push = (rule: string, message: string, nodes: string[] = [], edges: PipelineDoc['edges'] = []) =>
    diags.push({ rule, message, nodes, edges });

  const seen = new Set<string>();
  for (const n of doc.nodes) {
    if (seen.has(n.node_id)) {
      push('duplicate_node_id', `node id '${n.node_id}' appears more than once`, [n.node_id]);
    }
    seen.add(n.node_id);
  }

  const specs = new Map<string, ReturnType<Catalog['get']>>();
  for (const n of doc.nodes) {
    const spec = catalog.get(n.module_id, n.module_version);
    if (!spec) {
      push('unknown_module',
        `node '${n.node_id}' references unregistered module '${n.module_id}' v${n.module_version}`,
        [n.node_id]);
      continue;
    }
    specs.set(n.node_id, spec);
    for (const [name, value] of Object.entries(n.params)) {
      const hp = spec.hyperparams.find((h) => h.name === name);
      if (!hp) {
        push('bad_param', `node '${n.node_id}': module '${n.module_id}' has no hyperparam '${name}'`, [n.node_id]);
        continue;
      }
      const problem = checkParam(hp.kind, value, hp.min, hp.max, hp.choices);
      if (problem) push('bad_param', `node '${n.node_id}': hyperparam '${name}' ${problem}`, [n.node_id]);
    }
  }

  const fedInputs = new Map<string, number>();
  for (const e of doc.edges) {
    let endpointOk = true;
    for (const [end, side] of [[e.from, 'source'], [e.to, 'sink']] as const) {
      if (!seen.has(end.node)) {
        push('unknown_node', `edge ${side} references unknown node '${end.node}'`, [], [e]);
        endpointOk = false;
      }
    }
    if (!endpointOk) continue;
    const srcSpec = specs.get(e.from.node);
    const dstSpec = specs.get(e.to.node);
    const srcPort = srcSpec?.outputs.find((p) => p.name === e.from.port);
    const dstPort = dstSpec?.inputs.find((p) => p.name === e.to.port);
    if (srcSpec && !srcPort) {
      push('unknown_port', `node '${e.from.node}' has no output port '${e.from.port}'`, [e.from.node], [e]);
    }
    if (dstSpec && !dstPort) {
      push('unknown_port', `node '${e.to.node}' has no input port '${e.to.port}'`, [e.to.node], [e]);
    }
    if (srcPort && dstPort && !dtypeEquals(srcPort.dtype, dstPort.dtype)) {
      push('type_mismatch',
        `edge carries mismatched types (${e.from.node}.${e.from.port} -> ${e.to.node}.${e.to.port})`,
        [e.from.node, e.to.node], [e]);
    }
    if (dstSpec && dstPort) {
      const key = `${e.to.node}.${e.to.port}`;
      fedInputs.set(key, (fedInputs.get(key) ?? 0) + 1);
    }
  }

  for (const [key, count] of fedInputs) {
    if (count > 1) {
      push('input_occupied', `input ${key} is fed by ${count} edges`, [key.split('.')[0]]);
    }
  }

  const declaredExternal = new Set<string>();
  for (const [node, port] of parseExternalInputs(doc.metadata)) {
    if (!seen.has(node)) {
      push('bad_external_input', `external input references unknown node '${node}'`);
      continue;
    }
    const spec = specs.get(node);
    if (spec && !spec.inputs.some((p) => p.name === port)) {
      push('bad_external_input', `external input references missing input port ${node}.${port}`, [node]);
      continue;
    }
    if (fedInputs.has(`${node}.${port}`)) {
      push('bad_external_input', `external input ${node}.${port} is already fed by an edge`, [node]);
      continue;
    }
    declaredExternal.add(`${node}.${port}`);
  }

  for (const n of doc.nodes) {
    const spec = specs.get(n.node_id);
    if (!spec) continue;
    for (const port of spec.inputs) {
      if (!port.required) continue;
      const key = `${n.node_id}.${port.name}`;
      if (!fedInputs.has(key) && !declaredExternal.has(key)) {
        push('missing_required_input',
          `required input ${key} is neither edge-fed nor declared external`, [n.node_id]);
      }
    }
  }

  for (const comp of stronglyConnectedCycles([...seen], doc)) {
    push('cycle', `nodes form a dependency cycle: ${comp.join(', ')}`, comp);
  }

  return { ok: diags.length === 0, diagnostics: diags };
}
