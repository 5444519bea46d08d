// Browser bootstrap: fetch the module catalog, build the controller, and
// mount the three-pane editor.

import { ApiClient } from './api';
import { EditorController } from './editor';
import { Catalog } from './graph';
import { EditorView } from './ui';

const DEFAULT_SERVER = `${location.protocol}//${location.hostname}:8645`;

async function boot(): Promise<void> {
  const root = document.getElementById('app');
  if (!root) throw new Error('missing #app element');
  const baseUrl = localStorage.getItem('pixelflow.server') ?? DEFAULT_SERVER;
  const api = new ApiClient(baseUrl);
  const catalog = new Catalog(await api.modules());
  const controller = new EditorController(catalog, api);
  controller.settings.serverBaseUrl = baseUrl;
  controller.settings.darkMode = localStorage.getItem('pixelflow.dark') !== 'false';
  new EditorView(controller, root);
}

boot().catch((err) => {
  const root = document.getElementById('app');
  if (root) root.textContent = `failed to reach the pipeline server: ${err}`;
});
