import { describe, expect, it } from 'vitest';

import { dtypeDepth, dtypeEquals, dtypeLabel } from '../src/dtype';
import type { DataTypeJson } from '../src/types';

const SCALARS: DataTypeJson[] = ['text', 'image', 'mask', 'number', 'boolean'];

describe('dtypeEquals', () => {
  it('scalar pairs are equal iff identical', () => {
    for (const a of SCALARS) {
      for (const b of SCALARS) {
        expect(dtypeEquals(a, b)).toBe(a === b);
      }
    }
  });

  it('lists compare structurally', () => {
    const listText: DataTypeJson = { kind: 'list', inner: 'text' };
    expect(dtypeEquals(listText, { kind: 'list', inner: 'text' })).toBe(true);
    expect(dtypeEquals(listText, { kind: 'list', inner: 'image' })).toBe(false);
    expect(dtypeEquals(listText, 'text')).toBe(false);
    expect(dtypeEquals(
      { kind: 'list', inner: { kind: 'list', inner: 'mask' } },
      { kind: 'list', inner: { kind: 'list', inner: 'mask' } },
    )).toBe(true);
  });
});

describe('labels and depth', () => {
  it('formats nested lists', () => {
    expect(dtypeLabel({ kind: 'list', inner: { kind: 'list', inner: 'number' } }))
      .toBe('list[list[number]]');
    expect(dtypeLabel('mask')).toBe('mask');
  });

  it('depth counts list nesting', () => {
    expect(dtypeDepth('text')).toBe(0);
    expect(dtypeDepth({ kind: 'list', inner: 'text' })).toBe(1);
  });
});
