import { App, type AppOptions } from "../src/app.js";
import type { WsLike } from "../src/rt.js";
import type {
  Crop,
  DiagnosisReport,
  DiagnosisRequest,
  Farm,
  Listing,
  Message,
  Purchase,
  Thread,
  UsageStats,
  UserView,
} from "../src/types.js";

export const BASE = "http://gw.test";

// -- fake gateway over fetch ---------------------------------------------

type RouteFn = (query: URLSearchParams, body: any) => any;

export class FakeServer {
  private routes = new Map<string, RouteFn>();
  calls: { method: string; path: string; body: any }[] = [];

  on(method: string, path: string, result: any | RouteFn) {
    const fn: RouteFn = typeof result === "function" ? result : () => result;
    this.routes.set(`${method} ${path}`, fn);
  }

  /** drop-in for fetch; resolves against the registered routes */
  fetch = async (url: string, init: any = {}) => {
    const u = new URL(url);
    const method = (init.method || "GET").toUpperCase();
    const body = init.body ? JSON.parse(init.body) : undefined;
    this.calls.push({ method, path: u.pathname + u.search, body });
    const fn = this.routes.get(`${method} ${u.pathname}`);
    if (!fn) {
      return fakeResponse(404, { error: "not_found", message: `no route ${method} ${u.pathname}` });
    }
    try {
      const out = fn(u.searchParams, body);
      if (out && typeof out.status === "number" && "payload" in out) {
        return fakeResponse(out.status, out.payload);
      }
      return fakeResponse(200, out);
    } catch (err: any) {
      return fakeResponse(err.status || 500, { error: err.error || "error", message: err.message });
    }
  };

  countCalls(method: string, pathPrefix: string): number {
    return this.calls.filter((c) => c.method === method && c.path.startsWith(pathPrefix)).length;
  }
}

function fakeResponse(status: number, payload: any) {
  return {
    ok: status < 400,
    status,
    statusText: String(status),
    json: async () => payload,
  };
}

export function reply(status: number, payload: any) {
  return { status, payload };
}

// -- fake websocket --------------------------------------------------------

export class FakeWs implements WsLike {
  onopen: ((ev?: any) => void) | null = null;
  onmessage: ((ev: { data: any }) => void) | null = null;
  onclose: ((ev?: any) => void) | null = null;
  onerror: ((ev?: any) => void) | null = null;
  sent: string[] = [];
  private seq = 0;

  constructor(public url: string) {
    queueMicrotask(() => this.onopen && this.onopen());
  }

  send(data: string) {
    this.sent.push(data);
  }

  close() {
    this.onclose && this.onclose();
  }

  /** push a server frame into the client, auto-numbering the gapless seq */
  push(type: string, topic: string, payload: any) {
    this.seq += 1;
    this.onmessage && this.onmessage({ data: JSON.stringify({ type, topic, seq: this.seq, payload }) });
  }
}

export class MemStorage {
  private map = new Map<string, string>();
  getItem(k: string) {
    return this.map.has(k) ? this.map.get(k)! : null;
  }
  setItem(k: string, v: string) {
    this.map.set(k, v);
  }
  removeItem(k: string) {
    this.map.delete(k);
  }
}

// -- fixture documents -----------------------------------------------------

export const now = 1700000000;

export function user(id: string, name: string, role: UserView["role"]): UserView {
  return { id, name, role, contact: { email: `${name}@x.test` }, created_at: now };
}

export const fay = user("f1a2", "fay", "farmer");
export const ann = user("a9b8", "ann", "agronomist");
export const mel = user("m7c6", "mel", "merchant");
export const rival = user("m5d4", "rex", "merchant");

export function farm(id: string, name: string): Farm {
  return { id, farmer_id: fay.id, name, locality: "vale", created_at: now };
}

export function crop(id: string, farmId: string, kind: string): Crop {
  return { id, farm_id: farmId, farmer_id: fay.id, kind, planted_at: "2024-03", notes: "", created_at: now };
}

export function thread(id: string, a: UserView, b: UserView): Thread {
  return { id, participants: [a.id, b.id], created_at: now, names: { [a.id]: a.name, [b.id]: b.name } };
}

export function message(threadId: string, seq: number, sender: string, body: string): Message {
  return { thread_id: threadId, seq, sender_id: sender, body, sent_at: now + seq };
}

export function request(id: string, state: DiagnosisRequest["state"], extra: Partial<DiagnosisRequest> = {}): DiagnosisRequest {
  return {
    id,
    sample_id: "s" + id,
    farmer_id: fay.id,
    crop_id: "c1",
    state,
    attachments: null,
    agronomist_id: null,
    created_at: now,
    updated_at: now,
    ...extra,
  };
}

export const DIG_A = "a".repeat(64);
export const DIG_B = "b".repeat(64);

export function processedAttachments() {
  const summary = (mean: number) => ({
    kind: "tgi",
    mean,
    min: 0,
    max: mean * 2,
    valid_fraction: 1.0,
    scale: "rgb/255",
    p5: 0, p25: 0, p50: mean, p75: mean, p95: mean * 2,
  });
  return {
    tgi: summary(12.5),
    grvi: { ...summary(0.25), kind: "grvi" },
    tgi_heatmap: DIG_A,
    grvi_heatmap: DIG_B,
    prediction: {
      label: "healthy",
      class_index: 5,
      probabilities: [0.1, 0.1, 0.1, 0.1, 0.1, 0.5],
      model_version: "test",
    },
  };
}

export function report(requestId: string): DiagnosisReport {
  return {
    request_id: requestId,
    agronomist_id: ann.id,
    diagnosis: "early canker, prune and treat",
    confirmed_label: "canker",
    recommendations: "copper spray",
    filed_at: now + 50,
  };
}

export function listing(id: string, product: string, extra: Partial<Listing> = {}): Listing {
  return {
    id,
    farmer_id: fay.id,
    product,
    quantity: 40,
    unit: "kg",
    description: "",
    photo_refs: [],
    crop_id: "",
    starting_price: 1000,
    ends_at: now + 86400,
    created_at: now,
    status: "open",
    offers: [],
    best_offer: null,
    ...extra,
  };
}

export function purchase(listingId: string, product: string, price: number): Purchase {
  return {
    listing_id: listingId,
    farmer_id: fay.id,
    merchant_id: mel.id,
    product,
    final_price: price,
    farmer_contact: { email: "fay@x.test" },
    merchant_contact: { email: "mel@x.test" },
    closed_at: now + 9000,
  };
}

export const usageFixture: UsageStats = {
  users_total: 167,
  farmers: 146,
  agronomists: 9,
  merchants: 12,
  chats: 171,
  samples: 38,
  products: 65,
  messages: 1350,
  farms: 80,
  crops: 275,
};

// -- canned reload routes per role ------------------------------------------

export function cannedCommon(server: FakeServer, threads: Thread[] = [], messages: Record<string, Message[]> = {}) {
  server.on("GET", "/api/v1/chat/threads", { threads });
  for (const t of threads) {
    server.on("GET", `/api/v1/chat/threads/${t.id}/messages`, { messages: messages[t.id] || [] });
  }
}

export function cannedFarmer(server: FakeServer, data: {
  farms?: Farm[]; crops?: Crop[]; requests?: DiagnosisRequest[];
  reports?: DiagnosisReport[]; listings?: Listing[]; purchases?: Purchase[];
} = {}) {
  server.on("GET", "/api/v1/farms", { farms: data.farms || [] });
  server.on("GET", "/api/v1/crops", { crops: data.crops || [] });
  server.on("GET", "/api/v1/diagnosis/requests", { requests: data.requests || [] });
  server.on("GET", "/api/v1/diagnosis/history", { reports: data.reports || [] });
  server.on("GET", "/api/v1/market/listings", { listings: data.listings || [] });
  server.on("GET", "/api/v1/market/purchases", { purchases: data.purchases || [] });
}

export function cannedAgronomist(server: FakeServer, data: {
  requests?: DiagnosisRequest[]; reports?: DiagnosisReport[];
} = {}) {
  server.on("GET", "/api/v1/diagnosis/requests", { requests: data.requests || [] });
  server.on("GET", "/api/v1/diagnosis/history", { reports: data.reports || [] });
  server.on("GET", "/api/v1/analytics/usage", usageFixture);
  server.on("GET", "/api/v1/analytics/downloads/trend", {
    days: ["2024-01-01", "2024-01-02", "2024-01-03", "2024-01-04"],
    counts: [3, 5, 4, 8],
    fitted: [3.2, 4.4, 5.1, 7.6],
    lower: [2.5, 3.6, 4.2, 6.5],
    upper: [3.9, 5.2, 6.0, 8.7],
    span: 0.75,
    degree: 2,
  });
}

export function cannedMerchant(server: FakeServer, data: {
  listings?: Listing[]; purchases?: Purchase[];
} = {}) {
  server.on("GET", "/api/v1/market/listings", { listings: data.listings || [] });
  server.on("GET", "/api/v1/market/purchases", { purchases: data.purchases || [] });
}

// -- app bootstrapping -------------------------------------------------------

export interface TestApp {
  app: App;
  server: FakeServer;
  root: HTMLElement;
  ws: () => FakeWs;
  flush: () => Promise<void>;
}

export async function makeApp(who: UserView, server: FakeServer, opts: Partial<AppOptions> = {}): Promise<TestApp> {
  const root = document.createElement("div");
  document.body.append(root);
  const storage = new MemStorage();
  storage.setItem("agroplat.session", JSON.stringify({ user: who, token: "tok-" + who.id }));
  let lastWs: FakeWs | null = null;
  const app = new App(root, {
    base: BASE,
    fetchFn: server.fetch,
    storage,
    wsFactory: (url) => {
      lastWs = new FakeWs(url);
      return lastWs;
    },
    ...opts,
  });
  await app.boot();
  await new Promise((r) => setTimeout(r, 0)); // let the fake socket open
  return {
    app,
    server,
    root,
    ws: () => {
      if (!lastWs) throw new Error("realtime socket never connected");
      return lastWs;
    },
    flush: () => new Promise((r) => setTimeout(r, 0)),
  };
}
