/** Wire types for the review service. */

export interface SurveySummary {
  id: string;
  rows: number;
  cols: number;
}

export interface SurveyMeta {
  id: string;
  rows: number;
  cols: number;
  depth_step_m: number;
  depth_origin_m: number;
  nan_fill_db: number;
  has_model: boolean;
  has_bottom: boolean;
  seq: number;
}

export interface TileResponse {
  start: number;
  count: number;
  width: number;
  rows: number;
  depth_step_m: number;
  depth_origin_m: number;
  /** base64 little-endian f32, row-major rows x width */
  payload: string;
}

export interface FlagsResponse {
  probability_strong: number[];
  flag: boolean[];
}

export interface BottomResponse {
  bottom_m: (number | null)[];
  clean_bottom_m: (number | null)[];
  corrected_m: (number | null)[];
  seq: number;
}

export interface CorrectionEvent {
  seq: number;
  start: number;
  end: number;
  values: number[];
  author: string;
  timestamp: number;
}

export interface CorrectionsResponse {
  seq: number;
  events: CorrectionEvent[];
}

export interface CorrectionRequest {
  based_on_seq: number;
  start: number;
  end: number; // exclusive
  values: number[];
  author?: string;
}
