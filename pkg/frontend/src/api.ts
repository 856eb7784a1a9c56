import type {
  BottomResponse,
  CorrectionRequest,
  CorrectionsResponse,
  FlagsResponse,
  SurveyMeta,
  SurveySummary,
  TileResponse,
} from "./types.js";

/** HTTP error carrying the status code so callers can branch on 409/422. */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

/** Decode the tile payload (base64 little-endian f32) to a Float32Array. */
export function decodeTilePayload(payload: string): Float32Array {
  let bytes: Uint8Array;
  if (typeof atob === "function") {
    const bin = atob(payload);
    bytes = new Uint8Array(bin.length);
    for (let i = 0; i < bin.length; i++) bytes[i] = bin.charCodeAt(i);
  } else {
    bytes = new Uint8Array(Buffer.from(payload, "base64"));
  }
  // f32 wire format is little-endian; flip on big-endian hosts
  if (!hostIsLittleEndian()) {
    for (let i = 0; i + 3 < bytes.length; i += 4) {
      [bytes[i], bytes[i + 3]] = [bytes[i + 3]!, bytes[i]!];
      [bytes[i + 1], bytes[i + 2]] = [bytes[i + 2]!, bytes[i + 1]!];
    }
  }
  return new Float32Array(bytes.buffer, bytes.byteOffset, bytes.length / 4);
}

function hostIsLittleEndian(): boolean {
  return new Uint8Array(new Uint32Array([1]).buffer)[0] === 1;
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: typeof fetch = fetch,
  ) {}

  private async get<T>(path: string): Promise<T> {
    const res = await this.fetchImpl(this.baseUrl + path);
    if (!res.ok) throw new ApiError(res.status, await res.text());
    return (await res.json()) as T;
  }

  listSurveys(): Promise<SurveySummary[]> {
    return this.get("/surveys");
  }

  meta(id: string): Promise<SurveyMeta> {
    return this.get(`/surveys/${id}/meta`);
  }

  tiles(
    id: string,
    start: number,
    count: number,
    width?: number,
  ): Promise<TileResponse> {
    const q = new URLSearchParams({
      start: String(start),
      count: String(count),
    });
    if (width) q.set("width", String(width));
    return this.get(`/surveys/${id}/tiles?${q}`);
  }

  flags(id: string): Promise<FlagsResponse> {
    return this.get(`/surveys/${id}/flags`);
  }

  bottom(id: string): Promise<BottomResponse> {
    return this.get(`/surveys/${id}/bottom`);
  }

  corrections(id: string, since = 0): Promise<CorrectionsResponse> {
    return this.get(`/surveys/${id}/corrections?since=${since}`);
  }

  async submitCorrection(
    id: string,
    body: CorrectionRequest,
  ): Promise<{ seq: number }> {
    const res = await this.fetchImpl(`${this.baseUrl}/surveys/${id}/corrections`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
    if (!res.ok) throw new ApiError(res.status, await res.text());
    return (await res.json()) as { seq: number };
  }
}
