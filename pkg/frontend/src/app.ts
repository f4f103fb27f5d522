import { ApiClient } from "./api.js";
import { clear, el } from "./dom.js";
import { RtSocket, type WsFactory } from "./rt.js";
import { Store } from "./state.js";
import type { Frame, Session } from "./types.js";
import { renderAnalysis } from "./views/analysis.js";
import { renderChat } from "./views/chat.js";
import type { Ctx } from "./views/context.js";
import { renderDiagnosis } from "./views/diagnosis.js";
import { renderHistory } from "./views/history.js";
import { renderLogin } from "./views/login.js";
import { renderMarketing } from "./views/marketing.js";
import { renderOffers, renderOnsale, renderPurchases } from "./views/market.js";
import { renderProduction } from "./views/production.js";
import { renderRequests } from "./views/requests.js";

// exactly the four modules each role gets; nothing else is navigable
export const ROLE_TABS: Record<string, [string, string][]> = {
  farmer: [
    ["chat", "Chat"],
    ["diagnosis", "Diagnosis"],
    ["production", "Production"],
    ["marketing", "Marketing"],
  ],
  agronomist: [
    ["chat", "Chat"],
    ["requests", "Requests"],
    ["analysis", "Analysis"],
    ["history", "History"],
  ],
  merchant: [
    ["chat", "Chat"],
    ["onsale", "On-sale"],
    ["offers", "Offers"],
    ["purchases", "Purchases"],
  ],
};

const RENDERERS: Record<string, (root: HTMLElement, ctx: Ctx) => void> = {
  chat: renderChat,
  diagnosis: renderDiagnosis,
  production: renderProduction,
  marketing: renderMarketing,
  requests: renderRequests,
  analysis: renderAnalysis,
  history: renderHistory,
  onsale: renderOnsale,
  offers: renderOffers,
  purchases: renderPurchases,
};

const SESSION_KEY = "agroplat.session";

type StorageLike = {
  getItem(k: string): string | null;
  setItem(k: string, v: string): void;
  removeItem(k: string): void;
};

export interface AppOptions {
  base: string;
  fetchFn?: (url: string, init?: any) => Promise<any>;
  wsFactory?: WsFactory;
  storage?: StorageLike;
  rtEnabled?: boolean;
  maxUpload?: number;
}

export class App {
  api: ApiClient;
  store = new Store();
  rt: RtSocket | null = null;
  private storage: StorageLike;
  private wsFactory?: WsFactory;
  private rtEnabled: boolean;
  private maxUpload: number;

  constructor(
    public root: HTMLElement,
    opts: AppOptions,
  ) {
    this.api = new ApiClient(opts.base, opts.fetchFn);
    this.storage = opts.storage || window.localStorage;
    this.wsFactory = opts.wsFactory;
    this.rtEnabled = opts.rtEnabled !== false;
    this.maxUpload = opts.maxUpload ?? 8 * 1024 * 1024;
    this.store.subscribe(() => this.render());
  }

  get ctx(): Ctx {
    return { api: this.api, store: this.store, rt: this.rt, maxUpload: this.maxUpload };
  }

  /** Restore a saved session (if any) and draw the first frame. */
  async boot() {
    const saved = this.storage.getItem(SESSION_KEY);
    if (saved) {
      let session: Session | null = null;
      try {
        session = JSON.parse(saved);
      } catch {
        this.storage.removeItem(SESSION_KEY);
      }
      if (session?.token) {
        this.api.token = session.token;
        this.store.setSession(session);
        try {
          await this.afterLogin();
          return;
        } catch {
          // token expired; fall through to the login view
          this.storage.removeItem(SESSION_KEY);
          this.api.token = "";
          this.store.setSession(null);
        }
      }
    }
    this.render();
  }

  setSession(session: Session) {
    this.storage.setItem(SESSION_KEY, JSON.stringify(session));
    this.api.token = session.token;
    this.store.setSession(session);
    this.afterLogin().catch((err) => this.store.setNotice(err.message || "load failed"));
  }

  logout() {
    this.storage.removeItem(SESSION_KEY);
    this.api.token = "";
    this.rt?.close();
    this.rt = null;
    this.store.setSession(null);
  }

  private async afterLogin() {
    await this.store.reloadAll(this.api);
    if (this.rtEnabled) this.connectRt();
    this.subscribeTracked();
    this.render();
  }

  connectRt() {
    this.rt?.close();
    this.rt = new RtSocket(this.api.rtUrl(), this.wsFactory);
    this.rt.onResync = () => {
      // missed frames: the GET endpoints are the source of truth
      this.store.reloadAll(this.api).then(() => this.subscribeTracked()).catch(() => {});
    };
    this.rt.onFrame((frame) => this.handleFrame(frame));
    this.rt.connect();
  }

  /** Follow every entity currently on screen. */
  subscribeTracked() {
    if (!this.rt) return;
    const s = this.store.state;
    for (const t of s.threads) this.rt.subscribe(`thread/${t.id}`);
    for (const r of s.requests) {
      if (r.state !== "diagnosed") this.rt.subscribe(`request/${r.id}`);
    }
    for (const l of s.listings) {
      if (l.status === "open") this.rt.subscribe(`listing/${l.id}`);
    }
  }

  handleFrame(frame: Frame) {
    this.store.applyFrame(frame);
    // the processed frame only says the state moved: the attachments
    // (summaries, heatmap refs, prediction) come from the request GET
    if (frame.type === "diagnosis.processed") {
      const id = frame.payload?.request_id;
      if (id && this.store.state.requests.some((r) => r.id === id)) {
        this.api
          .getRequest(id)
          .then((req) => this.store.upsertRequest(req))
          .catch(() => {});
      }
    }
    if (frame.type === "chat.message") {
      const tid = frame.payload?.thread_id;
      if (tid && !this.store.state.threads.some((t) => t.id === tid)) {
        // a peer opened a new conversation with us
        this.store.reloadAll(this.api).then(() => this.subscribeTracked()).catch(() => {});
      }
    }
  }

  render() {
    const root = clear(this.root);
    const s = this.store.state;

    if (!s.session) {
      renderLogin(root, this.ctx, (session) => this.setSession(session));
      return;
    }

    const role = s.session.user.role;
    const tabs = ROLE_TABS[role] || [];
    if (!tabs.some(([key]) => key === s.active)) s.active = tabs[0]?.[0] || "chat";

    root.append(
      el("header", {},
        el("span", { class: "brand", text: "agroplat" }),
        el("span", { class: "whoami", text: `${s.session.user.name} (${role})` }),
        el("button", { "data-action": "logout", text: "Sign out", onclick: () => this.logout() }),
      ),
      el("nav", { id: "tabs" },
        ...tabs.map(([key, label]) =>
          el("button", {
            class: "tab" + (key === s.active ? " active" : ""),
            "data-tab": key,
            text: label,
            onclick: () => this.store.setActive(key),
          }),
        ),
      ),
    );

    if (s.notice) {
      root.append(
        el("div", { class: "notice", "data-role": "notice" },
          el("span", { text: s.notice }),
          el("button", { text: "x", onclick: () => this.store.setNotice("") }),
        ),
      );
    }

    const main = el("main", { id: "view" });
    root.append(main);
    const renderView = RENDERERS[s.active];
    if (renderView) renderView(main, this.ctx);
  }
}

export function mount(root: HTMLElement, opts: AppOptions): App {
  const app = new App(root, opts);
  void app.boot();
  return app;
}
