// Wire types shared with the server. Field names and shapes follow the
// canonical pipeline format and the /api/v1 payloads exactly.

export type ScalarKind = 'text' | 'image' | 'mask' | 'number' | 'boolean';

export type DataTypeJson = ScalarKind | { kind: 'list'; inner: DataTypeJson };

export interface PortSpec {
  name: string;
  dtype: DataTypeJson;
  required: boolean;
  description: string;
}

export type ParamKind = 'int' | 'float' | 'string' | 'bool' | 'enum';

export interface HyperparamSpec {
  name: string;
  kind: ParamKind;
  default: string | number | boolean;
  min?: number;
  max?: number;
  choices?: string[];
}

export interface ModuleSpec {
  id: string;
  version: number;
  display_name: string;
  description: string;
  labels: string[];
  inputs: PortSpec[];
  outputs: PortSpec[];
  hyperparams: HyperparamSpec[];
}

export type ParamValue = string | number | boolean;

export interface PipelineNodeJson {
  node_id: string;
  module_id: string;
  module_version: number;
  params: Record<string, ParamValue>;
}

export interface EndpointJson {
  node: string;
  port: string;
}

export interface PipelineEdgeJson {
  from: EndpointJson;
  to: EndpointJson;
}

export interface PipelineDoc {
  format_version: number;
  name: string;
  metadata: Record<string, string>;
  nodes: PipelineNodeJson[];
  edges: PipelineEdgeJson[];
}

export interface Diagnostic {
  rule: string;
  message: string;
  nodes: string[];
  edges: PipelineEdgeJson[];
}

export interface ValidationReport {
  ok: boolean;
  diagnostics: Diagnostic[];
}

export interface RunEvent {
  seq: number;
  kind: 'job_queued' | 'node_started' | 'node_finished'
      | 'job_finished' | 'job_failed' | 'job_cancelled';
  payload: Record<string, unknown>;
}

export interface JobStatus {
  job_id: string;
  state: 'queued' | 'running' | 'finished' | 'failed' | 'cancelled';
  queue_position: number | null;
  progress: { finished: number; total: number };
  error: string | null;
  error_code: string | null;
  failed_node: string | null;
  pipeline_id: string;
  seed: number;
}

export interface SubmitResponse {
  job_id: string;
  position: number;
}
