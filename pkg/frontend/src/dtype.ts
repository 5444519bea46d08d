// Structural data-type helpers. An edge is legal iff the endpoint types
// are structurally equal; these checks must agree with server validation
// on every pair, which the conformance suite asserts against a live server.

import type { DataTypeJson } from './types';

export function dtypeEquals(a: DataTypeJson, b: DataTypeJson): boolean {
  if (typeof a === 'string' || typeof b === 'string') return a === b;
  return dtypeEquals(a.inner, b.inner);
}

export function dtypeLabel(t: DataTypeJson): string {
  if (typeof t === 'string') return t;
  return `list[${dtypeLabel(t.inner)}]`;
}

export function dtypeDepth(t: DataTypeJson): number {
  return typeof t === 'string' ? 0 : 1 + dtypeDepth(t.inner);
}
