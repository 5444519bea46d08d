// Layered auto-layout: dependency waves become columns, nodes stack
// vertically inside each column. Used on import when no stored layout
// sidecar exists for the pipeline digest.

import type { EditorGraph } from './graph';

export interface NodePosition {
  x: number;
  y: number;
}

export const COLUMN_WIDTH = 260;
export const ROW_HEIGHT = 150;
export const MARGIN = 40;

export function layeredLayout(graph: EditorGraph): Map<string, NodePosition> {
  const positions = new Map<string, NodePosition>();
  graph.waves().forEach((wave, column) => {
    wave.forEach((nodeId, row) => {
      positions.set(nodeId, {
        x: MARGIN + column * COLUMN_WIDTH,
        y: MARGIN + row * ROW_HEIGHT,
      });
    });
  });
  return positions;
}
