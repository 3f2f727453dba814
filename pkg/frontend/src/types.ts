// Wire types for the prediction service API.

export interface FeatureDef {
  name: string;
  kind: 'numeric' | 'categorical';
  category: string;
  subcategory: string;
  numeric_min?: number;
  numeric_max?: number;
  vocabulary?: string[];
  width: number;
  degenerate?: boolean;
}

export interface SchemaPayload {
  api_version: string;
  encoded_dim: number;
  features: FeatureDef[];
  categories: string[];
  subcategories: string[];
  scores: string[];
  families: string[];
}

export interface BundleInfo {
  bundle_id: string;
  family: string;
  kind: string;
  score: string;
  modalities: string[];
  test_r2: number | null;
}

export type FeatureMap = Record<string, number | string>;

export interface PredictRequest {
  bundle: string;
  parametric: FeatureMap;
  text_segments?: Record<string, string>;
  images?: Record<string, Record<string, string>>;
  modalities?: string[];
}

export interface ScorePrediction {
  bundle_id: string;
  modalities: string[];
  raw: number;
  display: number;
}

export interface PredictResponse {
  api_version: string;
  bundle: string;
  modalities: string[];
  predictions: Record<string, ScorePrediction>;
}

export interface AttributionGroup {
  name: string;
  modality: string;
  signed: number;
  mean_abs: number;
}

export interface TokenAttribution {
  token: string;
  phi: number;
  segment: string;
}

export interface HeatmapPayload {
  rows: number;
  cols: number;
  cell: number;
  values: number[][];
}

export interface ExplainResponse {
  api_version: string;
  bundle_id: string;
  score: string;
  prediction: number;
  expected_value: number;
  attribution_total: number;
  local_accuracy_gap: number;
  groups: AttributionGroup[];
  attributions: {
    taxonomy?: { categories: Record<string, { signed: number; mean_abs: number }> };
    features?: { feature: string; phi: number; category: string; subcategory: string }[];
    segments?: Record<string, { signed: number; mean_abs: number }>;
    tokens?: TokenAttribution[];
    regions?: Record<string, { signed: number; mean_abs: number }>;
    heatmap?: HeatmapPayload;
  };
}

export interface ApiErrorBody {
  api_version: string;
  error: { code: string; message: string; field: string | null };
}
