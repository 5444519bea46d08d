// HTTP client for the pipeline server; consumes only the public /api/v1
// surface. The event channel is newline-delimited JSON over a long-lived
// response; reconnects resume from the last seen seq + 1.

import type {
  JobStatus,
  ModuleSpec,
  PipelineDoc,
  RunEvent,
  SubmitResponse,
  ValidationReport,
} from './types';

export class ApiError extends Error {
  constructor(readonly status: number, readonly code: string, message: string,
              readonly report?: ValidationReport) {
    super(message);
  }
}

async function throwApiError(response: Response): Promise<never> {
  let code = 'error';
  let message = `${response.status} ${response.statusText}`;
  let report: ValidationReport | undefined;
  try {
    const body = await response.json();
    code = body?.error?.code ?? code;
    message = body?.error?.message ?? message;
    report = body?.error?.report;
  } catch {
    // non-JSON error body; keep the status line
  }
  throw new ApiError(response.status, code, message, report);
}

export class ApiClient {
  constructor(public baseUrl: string, private fetchImpl: typeof fetch = fetch) {}

  private url(path: string): string {
    return `${this.baseUrl.replace(/\/$/, '')}/api/v1${path}`;
  }

  private async request(path: string, init?: RequestInit): Promise<Response> {
    const response = await this.fetchImpl(this.url(path), init);
    if (!response.ok) await throwApiError(response);
    return response;
  }

  async modules(): Promise<ModuleSpec[]> {
    const body = await (await this.request('/modules')).json();
    return body.modules;
  }

  async validate(doc: PipelineDoc): Promise<ValidationReport> {
    const response = await this.request('/pipelines/validate', {
      method: 'POST',
      body: JSON.stringify(doc),
      headers: { 'content-type': 'application/json' },
    });
    return response.json();
  }

  async storePipeline(docOrText: PipelineDoc | string): Promise<string> {
    const body = typeof docOrText === 'string' ? docOrText : JSON.stringify(docOrText);
    const response = await this.request('/pipelines', { method: 'POST', body });
    return (await response.json()).pipeline_id;
  }

  async loadPipeline(pipelineId: string): Promise<string> {
    return (await this.request(`/pipelines/${pipelineId}`)).text();
  }

  async submitJob(doc: PipelineDoc, seed: number,
                  inputs: Record<string, unknown> = {}, clientId = ''): Promise<SubmitResponse> {
    const response = await this.request('/jobs', {
      method: 'POST',
      body: JSON.stringify({ pipeline: doc, seed, inputs, client_id: clientId }),
      headers: { 'content-type': 'application/json' },
    });
    return response.json();
  }

  async jobStatus(jobId: string): Promise<JobStatus> {
    return (await this.request(`/jobs/${jobId}`)).json();
  }

  async cancelJob(jobId: string): Promise<{ result: string }> {
    return (await this.request(`/jobs/${jobId}/cancel`, { method: 'POST' })).json();
  }

  artifactUrl(jobId: string, nodeId: string, port: string): string {
    return this.url(`/jobs/${jobId}/artifacts/${nodeId}/${port}`);
  }

  async artifact(jobId: string, nodeId: string, port: string): Promise<Blob> {
    return (await this.request(`/jobs/${jobId}/artifacts/${nodeId}/${port}`)).blob();
  }

  /**
   * Stream run events starting at `since`, invoking onEvent in seq order
   * until the terminal event. Drops out-of-window duplicates, reconnects
   * with the next expected seq, and resolves once the job is terminal.
   */
  async streamEvents(
    jobId: string,
    onEvent: (event: RunEvent) => void,
    since = 0,
    maxReconnects = 20,
  ): Promise<void> {
    let next = since;
    let attempts = 0;
    for (;;) {
      try {
        const response = await this.request(`/jobs/${jobId}/events?since=${next}`);
        const terminalSeen = await this.consumeStream(response, (event) => {
          if (event.seq < next) return false; // duplicate after reconnect
          next = event.seq + 1;
          onEvent(event);
          return event.kind === 'job_finished' || event.kind === 'job_failed'
            || event.kind === 'job_cancelled';
        });
        if (terminalSeen) return;
      } catch (err) {
        if (err instanceof ApiError) throw err; // real API errors end the stream
      }
      attempts++;
      if (attempts > maxReconnects) throw new Error(`event stream for ${jobId} kept dropping`);
      await new Promise((resolve) => setTimeout(resolve, 100 * attempts));
    }
  }

  private async consumeStream(
    response: Response,
    handle: (event: RunEvent) => boolean,
  ): Promise<boolean> {
    const reader = response.body?.getReader();
    if (!reader) throw new Error('response has no readable body');
    const decoder = new TextDecoder();
    let buffer = '';
    for (;;) {
      const { done, value } = await reader.read();
      if (value) buffer += decoder.decode(value, { stream: true });
      let newline = buffer.indexOf('\n');
      while (newline >= 0) {
        const line = buffer.slice(0, newline).trim();
        buffer = buffer.slice(newline + 1);
        if (line) {
          const terminal = handle(JSON.parse(line) as RunEvent);
          if (terminal) {
            await reader.cancel().catch(() => undefined);
            return true;
          }
        }
        newline = buffer.indexOf('\n');
      }
      if (done) return false;
    }
  }
}
