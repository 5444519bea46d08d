// Canonical pipeline text, byte-identical to the server's export: keys
// sorted at every level, nodes sorted by node_id, edges by their endpoint
// 4-tuple, 2-space indent, LF endings, one trailing newline.
//
// Number rendering must match the server exactly. Integers print bare;
// float-kind hyperparameters print in Python's repr style (shortest
// round-trip digits, "10.0" for integral values, scientific notation with
// a two-digit signed exponent outside [1e-4, 1e16)).

import type { ParamValue, PipelineDoc } from './types';

export type IsFloatParam = (moduleId: string, version: number, param: string) => boolean;

/** Render a double exactly the way Python's json module does. */
export function pyFloat(x: number): string {
  if (!Number.isFinite(x)) throw new Error('non-finite numbers are not serializable');
  if (x === 0) return Object.is(x, -0) ? '-0.0' : '0.0';
  const sign = x < 0 ? '-' : '';
  const s = String(Math.abs(x)); // shortest round-trip digits

  let digits: string;
  let exp: number;
  if (s.includes('e')) {
    const [mantissa, e] = s.split('e');
    const [intPart, frac = ''] = mantissa.split('.');
    digits = intPart + frac;
    exp = parseInt(e, 10) + intPart.length - 1;
  } else if (s.includes('.')) {
    const [intPart, frac] = s.split('.');
    if (intPart === '0') {
      const lead = /^0*/.exec(frac)![0].length;
      digits = frac.slice(lead);
      exp = -lead - 1;
    } else {
      digits = intPart + frac;
      exp = intPart.length - 1;
    }
  } else {
    digits = s;
    exp = s.length - 1;
  }
  digits = digits.replace(/0+$/, '');
  if (digits === '') digits = '0';

  if (exp >= -4 && exp < 16) {
    if (exp >= 0) {
      const intLen = exp + 1;
      const intPart = digits.padEnd(intLen, '0').slice(0, intLen);
      const frac = digits.length > intLen ? digits.slice(intLen) : '';
      return `${sign}${intPart}.${frac || '0'}`;
    }
    return `${sign}0.${'0'.repeat(-exp - 1)}${digits}`;
  }
  const mantissa = digits.length > 1 ? `${digits[0]}.${digits.slice(1)}` : digits;
  const expStr = `${exp < 0 ? '-' : '+'}${String(Math.abs(exp)).padStart(2, '0')}`;
  return `${sign}${mantissa}e${expStr}`;
}

type Canon =
  | { t: 'str'; v: string }
  | { t: 'int'; v: number }
  | { t: 'float'; v: number }
  | { t: 'bool'; v: boolean }
  | { t: 'obj'; v: Array<[string, Canon]> }
  | { t: 'arr'; v: Canon[] };

function emit(value: Canon, indent: number, out: string[]): void {
  const pad = '  '.repeat(indent);
  const inner = '  '.repeat(indent + 1);
  switch (value.t) {
    case 'str':
      out.push(JSON.stringify(value.v));
      return;
    case 'int':
      if (!Number.isInteger(value.v)) throw new Error(`expected integer, got ${value.v}`);
      out.push(String(value.v));
      return;
    case 'float':
      out.push(pyFloat(value.v));
      return;
    case 'bool':
      out.push(value.v ? 'true' : 'false');
      return;
    case 'obj': {
      if (value.v.length === 0) {
        out.push('{}');
        return;
      }
      const entries = [...value.v].sort((a, b) => (a[0] < b[0] ? -1 : a[0] > b[0] ? 1 : 0));
      out.push('{\n');
      entries.forEach(([key, val], i) => {
        out.push(inner, JSON.stringify(key), ': ');
        emit(val, indent + 1, out);
        out.push(i < entries.length - 1 ? ',\n' : '\n');
      });
      out.push(pad, '}');
      return;
    }
    case 'arr': {
      if (value.v.length === 0) {
        out.push('[]');
        return;
      }
      out.push('[\n');
      value.v.forEach((val, i) => {
        out.push(inner);
        emit(val, indent + 1, out);
        out.push(i < value.v.length - 1 ? ',\n' : '\n');
      });
      out.push(pad, ']');
      return;
    }
  }
}

function paramCanon(value: ParamValue, isFloat: boolean): Canon {
  if (typeof value === 'string') return { t: 'str', v: value };
  if (typeof value === 'boolean') return { t: 'bool', v: value };
  return isFloat ? { t: 'float', v: value } : { t: 'int', v: value };
}

/** Serialize a pipeline document to its canonical text form. */
export function canonicalPipelineText(doc: PipelineDoc, isFloatParam: IsFloatParam): string {
  const nodes = [...doc.nodes].sort((a, b) => (a.node_id < b.node_id ? -1 : 1));
  const edgeKey = (e: PipelineDoc['edges'][number]) =>
    [e.from.node, e.from.port, e.to.node, e.to.port];
  const edges = [...doc.edges].sort((a, b) => {
    const ka = edgeKey(a);
    const kb = edgeKey(b);
    for (let i = 0; i < 4; i++) {
      if (ka[i] !== kb[i]) return ka[i] < kb[i] ? -1 : 1;
    }
    return 0;
  });

  const root: Canon = {
    t: 'obj',
    v: [
      ['edges', {
        t: 'arr',
        v: edges.map((e) => ({
          t: 'obj',
          v: [
            ['from', { t: 'obj', v: [['node', { t: 'str', v: e.from.node }], ['port', { t: 'str', v: e.from.port }]] }],
            ['to', { t: 'obj', v: [['node', { t: 'str', v: e.to.node }], ['port', { t: 'str', v: e.to.port }]] }],
          ],
        } as Canon)),
      }],
      ['format_version', { t: 'int', v: doc.format_version }],
      ['metadata', {
        t: 'obj',
        v: Object.entries(doc.metadata).map(([k, v]) => [k, { t: 'str', v }] as [string, Canon]),
      }],
      ['name', { t: 'str', v: doc.name }],
      ['nodes', {
        t: 'arr',
        v: nodes.map((n) => ({
          t: 'obj',
          v: [
            ['module_id', { t: 'str', v: n.module_id }],
            ['module_version', { t: 'int', v: n.module_version }],
            ['node_id', { t: 'str', v: n.node_id }],
            ['params', {
              t: 'obj',
              v: Object.entries(n.params).map(([name, value]) => [
                name,
                paramCanon(value, isFloatParam(n.module_id, n.module_version, name)),
              ] as [string, Canon]),
            }],
          ],
        } as Canon)),
      }],
    ],
  };
  const out: string[] = [];
  emit(root, 0, out);
  out.push('\n');
  return out.join('');
}

/** SHA-256 hex of the canonical text; equals the server's pipeline id. */
export async function pipelineDigest(canonicalText: string): Promise<string> {
  const data = new TextEncoder().encode(canonicalText);
  const hash = await crypto.subtle.digest('SHA-256', data);
  return [...new Uint8Array(hash)].map((b) => b.toString(16).padStart(2, '0')).join('');
}
