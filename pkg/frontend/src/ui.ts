// DOM layer: three panes (module pool, settings, playground) around the
// DOM-free EditorController. Nodes are absolutely positioned cards over an
// SVG edge layer; ports are typed dots wired by press-drag-release.

import type { EditorController, NodeRunState } from './editor';
import { dtypeLabel } from './dtype';
import type { HyperparamSpec, ModuleSpec } from './types';
import type { PortRef } from './graph';

const STATE_COLORS: Record<NodeRunState, string> = {
  idle: '#49506a',
  queued: '#8a7a2f',
  running: '#2f6f8a',
  done: '#2f8a4a',
  cached: '#7a2f8a',
  failed: '#a03030',
  skipped: '#3a3f52',
};

export class EditorView {
  private pool: HTMLElement;
  private settingsPane: HTMLElement;
  private canvas: HTMLElement;
  private edgeLayer: SVGSVGElement;
  private statusBar: HTMLElement;
  private pendingWire: { from: PortRef; label: string } | null = null;

  constructor(private controller: EditorController, private root: HTMLElement) {
    this.root.innerHTML = '';
    this.root.classList.add('pf-root');
    this.pool = el('div', 'pf-pool');
    this.settingsPane = el('div', 'pf-settings');
    this.canvas = el('div', 'pf-canvas');
    this.edgeLayer = document.createElementNS('http://www.w3.org/2000/svg', 'svg');
    this.edgeLayer.classList.add('pf-edges');
    this.statusBar = el('div', 'pf-status');
    this.canvas.appendChild(this.edgeLayer);
    const side = el('div', 'pf-side');
    side.append(this.pool, this.settingsPane);
    this.root.append(side, this.canvas, this.statusBar);
    this.applyTheme();
    this.renderPool('');
    this.renderSettings();
    this.renderCanvas();
    this.wireCanvasDrop();
  }

  // --- module pool -------------------------------------------------------

  private renderPool(query: string): void {
    this.pool.innerHTML = '';
    const search = el('input', 'pf-search') as HTMLInputElement;
    search.placeholder = 'search modules or labels';
    search.value = query;
    search.addEventListener('input', () => this.renderPool(search.value));
    this.pool.appendChild(search);
    for (const spec of this.controller.catalog.search(query)) {
      this.pool.appendChild(this.poolCard(spec));
    }
  }

  private poolCard(spec: ModuleSpec): HTMLElement {
    const card = el('div', 'pf-pool-card');
    card.draggable = true;
    card.title = spec.description;
    card.append(el('b', '', spec.display_name), el('small', '', spec.id),
                el('small', 'pf-labels', spec.labels.join(' · ')));
    card.addEventListener('dragstart', (ev) => {
      ev.dataTransfer?.setData('text/pixelflow-module', spec.id);
    });
    card.addEventListener('dblclick', () => {
      this.controller.dropModule(spec.id, { x: 80, y: 80 });
      this.renderCanvas();
    });
    return card;
  }

  private wireCanvasDrop(): void {
    this.canvas.addEventListener('dragover', (ev) => ev.preventDefault());
    this.canvas.addEventListener('drop', (ev) => {
      const moduleId = ev.dataTransfer?.getData('text/pixelflow-module');
      if (!moduleId) return;
      ev.preventDefault();
      const rect = this.canvas.getBoundingClientRect();
      this.controller.dropModule(moduleId, { x: ev.clientX - rect.left, y: ev.clientY - rect.top });
      this.renderCanvas();
    });
  }

  // --- settings ----------------------------------------------------------

  private renderSettings(): void {
    const { settings } = this.controller;
    this.settingsPane.innerHTML = '<b>settings</b>';
    this.settingsPane.append(
      labeled('dark mode', checkbox(settings.darkMode, (v) => {
        settings.darkMode = v;
        this.applyTheme();
      })),
      labeled('edge weight', range(settings.edgeCurveWeight, (v) => {
        settings.edgeCurveWeight = v;
        this.renderEdges();
      })),
      labeled('server', textInput(settings.serverBaseUrl, (v) => {
        settings.serverBaseUrl = v;
        this.controller.api.baseUrl = v;
      })),
      button('run', () => void this.runPipeline()),
      button('export', () => this.exportFile()),
      button('import', () => this.importFile()),
    );
  }

  private applyTheme(): void {
    this.root.classList.toggle('pf-dark', this.controller.settings.darkMode);
  }

  // --- canvas -------------------------------------------------------------

  renderCanvas(): void {
    for (const node of [...this.canvas.querySelectorAll('.pf-node')]) node.remove();
    for (const [nodeId] of this.controller.graph.nodes) {
      this.canvas.appendChild(this.nodeCard(nodeId));
    }
    this.renderEdges();
    this.renderStatus();
  }

  private nodeCard(nodeId: string): HTMLElement {
    const controller = this.controller;
    const spec = controller.graph.spec(nodeId);
    const pos = controller.positions.get(nodeId) ?? { x: 0, y: 0 };
    const card = el('div', 'pf-node');
    card.dataset.nodeId = nodeId;
    card.style.left = `${pos.x}px`;
    card.style.top = `${pos.y}px`;
    const state = controller.run.nodeStates.get(nodeId) ?? 'idle';
    card.style.borderColor = STATE_COLORS[state];

    const head = el('div', 'pf-node-head', `${nodeId} · ${spec.display_name}`);
    head.addEventListener('pointerdown', (ev) => this.dragNode(nodeId, card, ev));
    card.appendChild(head);

    const ports = el('div', 'pf-ports');
    const inputs = el('div', 'pf-in');
    for (const port of spec.inputs) {
      const dot = el('span', 'pf-port', `● ${port.name}: ${dtypeLabel(port.dtype)}`);
      dot.addEventListener('pointerup', () => this.finishWire({ node: nodeId, port: port.name }));
      inputs.appendChild(dot);
    }
    const outputs = el('div', 'pf-out');
    for (const port of spec.outputs) {
      const dot = el('span', 'pf-port', `${port.name}: ${dtypeLabel(port.dtype)} ●`);
      dot.addEventListener('pointerdown', (ev) => {
        ev.stopPropagation();
        this.pendingWire = { from: { node: nodeId, port: port.name }, label: dtypeLabel(port.dtype) };
      });
      outputs.appendChild(dot);
      const preview = controller.previewUrl(nodeId, port.name);
      if (preview && (dtypeLabel(port.dtype) === 'image' || dtypeLabel(port.dtype) === 'mask')) {
        const img = el('img', 'pf-preview') as HTMLImageElement;
        img.src = preview;
        outputs.appendChild(img);
      }
    }
    ports.append(inputs, outputs);
    card.appendChild(ports);
    card.appendChild(this.paramsForm(nodeId, spec.hyperparams));
    card.addEventListener('click', () => {
      controller.selection = nodeId;
    });
    return card;
  }

  private paramsForm(nodeId: string, hyperparams: HyperparamSpec[]): HTMLElement {
    const form = el('div', 'pf-params');
    for (const hp of hyperparams) {
      const current = this.controller.graph.paramValue(nodeId, hp);
      let input: HTMLElement;
      if (hp.kind === 'bool') {
        input = checkbox(Boolean(current), (v) => this.controller.graph.setParam(nodeId, hp.name, v));
      } else if (hp.kind === 'enum') {
        input = select(hp.choices ?? [], String(current),
                       (v) => this.controller.graph.setParam(nodeId, hp.name, v));
      } else {
        input = textInput(String(current), (v) => {
          const value = hp.kind === 'string' ? v : Number(v);
          this.controller.graph.setParam(nodeId, hp.name, value);
        });
      }
      form.appendChild(labeled(hp.name, input));
    }
    return form;
  }

  private dragNode(nodeId: string, card: HTMLElement, start: PointerEvent): void {
    const origin = this.controller.positions.get(nodeId) ?? { x: 0, y: 0 };
    const offset = { x: start.clientX - origin.x, y: start.clientY - origin.y };
    const move = (ev: PointerEvent) => {
      const to = { x: ev.clientX - offset.x, y: ev.clientY - offset.y };
      this.controller.moveNode(nodeId, to);
      card.style.left = `${to.x}px`;
      card.style.top = `${to.y}px`;
      this.renderEdges();
    };
    const up = () => {
      window.removeEventListener('pointermove', move);
      window.removeEventListener('pointerup', up);
    };
    window.addEventListener('pointermove', move);
    window.addEventListener('pointerup', up);
  }

  private finishWire(to: PortRef): void {
    if (!this.pendingWire) return;
    const verdict = this.controller.connect(this.pendingWire.from, to);
    this.pendingWire = null;
    if (!verdict.ok) {
      this.flashStatus(`connection rejected: ${verdict.rule} (${verdict.reason})`);
    }
    this.renderCanvas();
  }

  private portAnchor(ref: PortRef, side: 'in' | 'out'): { x: number; y: number } {
    const card = this.canvas.querySelector<HTMLElement>(`[data-node-id="${ref.node}"]`);
    const pos = this.controller.positions.get(ref.node) ?? { x: 0, y: 0 };
    const width = card?.offsetWidth ?? 180;
    return { x: side === 'out' ? pos.x + width : pos.x, y: pos.y + 34 };
  }

  renderEdges(): void {
    const weight = this.controller.settings.edgeCurveWeight;
    this.edgeLayer.innerHTML = '';
    for (const edge of this.controller.graph.edges) {
      const a = this.portAnchor(edge.from, 'out');
      const b = this.portAnchor(edge.to, 'in');
      const dx = Math.max(30, Math.abs(b.x - a.x) * weight);
      const path = document.createElementNS('http://www.w3.org/2000/svg', 'path');
      path.setAttribute('d', `M ${a.x} ${a.y} C ${a.x + dx} ${a.y}, ${b.x - dx} ${b.y}, ${b.x} ${b.y}`);
      path.setAttribute('fill', 'none');
      path.setAttribute('stroke', '#8899bb');
      path.setAttribute('stroke-width', '2');
      this.edgeLayer.appendChild(path);
    }
  }

  // --- run / files ------------------------------------------------------------

  private async runPipeline(): Promise<void> {
    if (!this.controller.runnable) {
      const problems = this.controller.validateLocal().map((d) => `${d.rule}: ${d.message}`);
      this.flashStatus(`cannot run:\n${problems.join('\n')}`);
      return;
    }
    try {
      await this.controller.runPipeline(Date.now() % 100000, {}, () => this.renderCanvas());
    } catch (err) {
      this.flashStatus(String(err));
    }
    this.renderCanvas();
  }

  private exportFile(): void {
    try {
      const text = this.controller.exportText();
      const blob = new Blob([text], { type: 'application/json' });
      const link = document.createElement('a');
      link.href = URL.createObjectURL(blob);
      link.download = `${this.controller.graph.name || 'pipeline'}.json`;
      link.click();
      URL.revokeObjectURL(link.href);
    } catch (err) {
      this.flashStatus(String(err));
    }
  }

  private importFile(): void {
    const chooser = document.createElement('input');
    chooser.type = 'file';
    chooser.accept = '.json,application/json';
    chooser.addEventListener('change', async () => {
      const file = chooser.files?.[0];
      if (!file) return;
      try {
        this.controller.importText(await file.text());
        this.renderCanvas();
      } catch (err) {
        this.flashStatus(`import failed: ${err}`);
      }
    });
    chooser.click();
  }

  private renderStatus(): void {
    const run = this.controller.run;
    const bits: string[] = [];
    if (run.jobId) bits.push(`job ${run.jobId.slice(0, 8)}`);
    if (run.queuePosition !== null) bits.push(`queue position ${run.queuePosition}`);
    if (run.terminal) bits.push(run.terminal.replace('job_', ''));
    if (run.error) bits.push(run.error);
    this.statusBar.textContent = bits.join(' · ') || 'ready';
  }

  private flashStatus(message: string): void {
    this.statusBar.textContent = message;
  }
}

// small DOM helpers -----------------------------------------------------------

function el(tag: string, cls = '', text = ''): HTMLElement {
  const node = document.createElement(tag);
  if (cls) node.className = cls;
  if (text) node.textContent = text;
  return node;
}

function labeled(label: string, input: HTMLElement): HTMLElement {
  const wrap = el('label', 'pf-field', label + ' ');
  wrap.appendChild(input);
  return wrap;
}

function checkbox(value: boolean, onChange: (v: boolean) => void): HTMLElement {
  const input = document.createElement('input');
  input.type = 'checkbox';
  input.checked = value;
  input.addEventListener('change', () => onChange(input.checked));
  return input;
}

function range(value: number, onChange: (v: number) => void): HTMLElement {
  const input = document.createElement('input');
  input.type = 'range';
  input.min = '0';
  input.max = '1';
  input.step = '0.05';
  input.value = String(value);
  input.addEventListener('input', () => onChange(Number(input.value)));
  return input;
}

function textInput(value: string, onChange: (v: string) => void): HTMLElement {
  const input = document.createElement('input');
  input.type = 'text';
  input.value = value;
  input.addEventListener('change', () => onChange(input.value));
  return input;
}

function select(choices: string[], value: string, onChange: (v: string) => void): HTMLElement {
  const input = document.createElement('select');
  for (const choice of choices) {
    const option = document.createElement('option');
    option.value = choice;
    option.textContent = choice;
    option.selected = choice === value;
    input.appendChild(option);
  }
  input.addEventListener('change', () => onChange(input.value));
  return input;
}

function button(label: string, onClick: () => void): HTMLElement {
  const node = el('button', 'pf-btn', label);
  node.addEventListener('click', onClick);
  return node;
}
