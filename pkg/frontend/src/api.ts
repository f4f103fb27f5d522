import type {
  Crop,
  DiagnosisReport,
  DiagnosisRequest,
  Farm,
  Listing,
  Message,
  OfferEntry,
  Purchase,
  Thread,
  Trend,
  UsageStats,
  UserView,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    public error: string,
    message: string,
  ) {
    super(message);
  }
}

type FetchLike = (url: string, init?: any) => Promise<any>;

/** Thin typed wrapper over the gateway's JSON routes. One instance per session. */
export class ApiClient {
  token = "";

  constructor(
    public base: string,
    private fetchFn: FetchLike = (u, i) => fetch(u, i),
  ) {}

  async request(method: string, path: string, body?: any): Promise<any> {
    const headers: Record<string, string> = {};
    if (this.token) headers["Authorization"] = `Bearer ${this.token}`;
    const init: any = { method, headers };
    if (body !== undefined) {
      headers["Content-Type"] = "application/json";
      init.body = JSON.stringify(body);
    }
    const res = await this.fetchFn(this.base + "/api/v1" + path, init);
    let payload: any = null;
    try {
      payload = await res.json();
    } catch {
      payload = null;
    }
    if (!res.ok) {
      const err = payload || {};
      throw new ApiError(res.status, err.error || "error", err.message || res.statusText || "request failed");
    }
    return payload;
  }

  // auth

  async register(name: string, role: string, contact: Record<string, string>, secret: string): Promise<UserView> {
    const out = await this.request("POST", "/auth/register", { name, role, contact, secret });
    this.token = out.token;
    return out.user;
  }

  async login(name: string, secret: string): Promise<UserView> {
    const out = await this.request("POST", "/auth/login", { name, secret });
    this.token = out.token;
    return out.user;
  }

  // farmer resources

  createFarm(name: string, locality = ""): Promise<Farm> {
    return this.request("POST", "/farms", { name, locality });
  }

  async listFarms(): Promise<Farm[]> {
    return (await this.request("GET", "/farms")).farms;
  }

  createCrop(farmId: string, kind: string, plantedAt = "", notes = ""): Promise<Crop> {
    return this.request("POST", `/farms/${farmId}/crops`, {
      kind,
      planted_at: plantedAt,
      notes,
    });
  }

  async listCrops(farmId?: string): Promise<Crop[]> {
    const q = farmId ? `?farm_id=${farmId}` : "";
    return (await this.request("GET", "/crops" + q)).crops;
  }

  // diagnosis

  submitSample(cropId: string, imageBase64: string): Promise<DiagnosisRequest> {
    return this.request("POST", "/diagnosis/samples", { crop_id: cropId, image: imageBase64 });
  }

  async listRequests(state?: string): Promise<DiagnosisRequest[]> {
    const q = state ? `?state=${state}` : "";
    return (await this.request("GET", "/diagnosis/requests" + q)).requests;
  }

  getRequest(id: string): Promise<DiagnosisRequest> {
    return this.request("GET", `/diagnosis/requests/${id}`);
  }

  claimRequest(id: string): Promise<DiagnosisRequest> {
    return this.request("POST", `/diagnosis/requests/${id}/claim`);
  }

  fileReport(id: string, diagnosis: string, confirmedLabel: string | null, recommendations: string): Promise<DiagnosisReport> {
    return this.request("POST", `/diagnosis/requests/${id}/report`, {
      diagnosis,
      confirmed_label: confirmedLabel,
      recommendations,
    });
  }

  async history(): Promise<DiagnosisReport[]> {
    return (await this.request("GET", "/diagnosis/history")).reports;
  }

  // marketplace

  publishListing(fields: {
    product: string;
    quantity: number;
    unit: string;
    starting_price: number;
    ends_at: number;
    description?: string;
    photo_refs?: string[];
    crop_id?: string;
  }): Promise<Listing> {
    return this.request("POST", "/market/listings", fields);
  }

  async listListings(status: "open" | "mine" = "open"): Promise<Listing[]> {
    return (await this.request("GET", `/market/listings?status=${status}`)).listings;
  }

  getListing(id: string): Promise<Listing> {
    return this.request("GET", `/market/listings/${id}`);
  }

  placeOffer(listingId: string, amount: number): Promise<OfferEntry> {
    return this.request("POST", `/market/listings/${listingId}/offers`, { amount });
  }

  async purchases(): Promise<Purchase[]> {
    return (await this.request("GET", "/market/purchases")).purchases;
  }

  // chat

  openThread(peerId: string): Promise<Thread> {
    return this.request("POST", "/chat/threads", { peer_id: peerId });
  }

  async listThreads(): Promise<Thread[]> {
    return (await this.request("GET", "/chat/threads")).threads;
  }

  sendMessage(threadId: string, body: string): Promise<Message> {
    return this.request("POST", `/chat/threads/${threadId}/messages`, { body });
  }

  async fetchMessages(threadId: string, after = 0, limit?: number): Promise<Message[]> {
    let q = `?after=${after}`;
    if (limit) q += `&limit=${limit}`;
    return (await this.request("GET", `/chat/threads/${threadId}/messages${q}`)).messages;
  }

  // analytics (agronomist only)

  usage(): Promise<UsageStats> {
    return this.request("GET", "/analytics/usage");
  }

  trend(): Promise<Trend> {
    return this.request("GET", "/analytics/downloads/trend");
  }

  /** Direct URL for an <img>; blob routes accept the token as a query param. */
  blobUrl(digest: string): string {
    return `${this.base}/api/v1/blobs/${digest}?token=${encodeURIComponent(this.token)}`;
  }

  rtUrl(): string {
    const ws = this.base.replace(/^http/, "ws");
    return `${ws}/api/v1/rt?token=${encodeURIComponent(this.token)}`;
  }
}
