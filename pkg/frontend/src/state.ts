import type { ApiClient } from "./api.js";
import type {
  Crop,
  DiagnosisReport,
  DiagnosisRequest,
  Farm,
  Frame,
  Listing,
  Message,
  Purchase,
  Session,
  Thread,
  Trend,
  UsageStats,
} from "./types.js";

export interface ClosedResult {
  result: "won" | "lost" | "sold" | "unsold";
  product?: string;
  final_price?: number;
  contact?: Record<string, string>;
}

export interface ViewState {
  session: Session | null;
  active: string;
  notice: string;
  threads: Thread[];
  activeThread: string;
  messagesByThread: Record<string, Message[]>;
  farms: Farm[];
  crops: Crop[];
  requests: DiagnosisRequest[];
  reportsByRequest: Record<string, DiagnosisReport>;
  history: DiagnosisReport[];
  listings: Listing[];
  outbid: Record<string, { amount: number; product: string }>;
  closedResults: Record<string, ClosedResult>;
  purchases: Purchase[];
  usage: UsageStats | null;
  trend: Trend | null;
}

function emptyState(): ViewState {
  return {
    session: null,
    active: "chat",
    notice: "",
    threads: [],
    activeThread: "",
    messagesByThread: {},
    farms: [],
    crops: [],
    requests: [],
    reportsByRequest: {},
    history: [],
    listings: [],
    outbid: {},
    closedResults: {},
    purchases: [],
    usage: null,
    trend: null,
  };
}

/**
 * The view-model layer. Holds everything the views render; mutated only by
 * reloadAll (GET reconstruction) and applyFrame (realtime deltas). Nothing
 * here is authoritative: a reload must always be able to rebuild it.
 */
export class Store {
  state: ViewState = emptyState();
  private listeners = new Set<() => void>();

  subscribe(fn: () => void): () => void {
    this.listeners.add(fn);
    return () => this.listeners.delete(fn);
  }

  emitChange() {
    for (const fn of this.listeners) fn();
  }

  setSession(session: Session | null) {
    this.state = emptyState();
    this.state.session = session;
    this.emitChange();
  }

  setActive(tab: string) {
    this.state.active = tab;
    this.emitChange();
  }

  setNotice(text: string) {
    this.state.notice = text;
    this.emitChange();
  }

  upsertRequest(req: DiagnosisRequest) {
    const i = this.state.requests.findIndex((r) => r.id === req.id);
    if (i >= 0) this.state.requests[i] = req;
    else this.state.requests.unshift(req);
    this.emitChange();
  }

  upsertListing(listing: Listing) {
    const i = this.state.listings.findIndex((l) => l.id === listing.id);
    if (i >= 0) this.state.listings[i] = listing;
    else this.state.listings.unshift(listing);
    this.emitChange();
  }

  upsertThread(thread: Thread) {
    if (!this.state.threads.some((t) => t.id === thread.id)) {
      this.state.threads.unshift(thread);
      this.state.messagesByThread[thread.id] ||= [];
    }
    this.emitChange();
  }

  appendMessage(msg: Message) {
    const list = (this.state.messagesByThread[msg.thread_id] ||= []);
    if (list.some((m) => m.seq === msg.seq)) return; // frame + POST echo
    list.push(msg);
    list.sort((a, b) => a.seq - b.seq);
    this.emitChange();
  }

  /** Realtime delta. Only touches entities the view models already track. */
  applyFrame(frame: Frame) {
    const p = frame.payload || {};
    switch (frame.type) {
      case "chat.message": {
        if (this.state.threads.some((t) => t.id === p.thread_id)) {
          this.appendMessage(p as Message);
        }
        return;
      }
      case "diagnosis.processed":
      case "diagnosis.assigned": {
        const req = this.state.requests.find((r) => r.id === p.request_id);
        if (req) {
          req.state = p.state;
          if (p.agronomist_id) req.agronomist_id = p.agronomist_id;
          this.emitChange();
        }
        return;
      }
      case "diagnosis.report": {
        const req = this.state.requests.find((r) => r.id === p.request_id);
        if (req) req.state = "diagnosed";
        this.state.reportsByRequest[p.request_id] = p as DiagnosisReport;
        this.emitChange();
        return;
      }
      case "auction.offer": {
        const listing = this.state.listings.find((l) => l.id === p.listing_id);
        if (!listing) return;
        if (!listing.offers.some((o) => o.seq === p.seq)) {
          listing.offers.push({
            seq: p.seq,
            merchant_id: p.merchant_id,
            amount: p.amount,
            placed_at: p.placed_at,
          });
          listing.offers.sort((a, b) => a.seq - b.seq);
        }
        listing.best_offer = listing.offers[listing.offers.length - 1].amount;
        const me = this.state.session?.user.id;
        if (me && p.merchant_id === me) delete this.state.outbid[p.listing_id];
        this.emitChange();
        return;
      }
      case "auction.outbid": {
        this.state.outbid[p.listing_id] = { amount: p.amount, product: p.product };
        this.emitChange();
        return;
      }
      // close frames reach every topic subscriber, not only the addressee,
      // so the outcome has to be read in role context
      case "auction.won": {
        if (this.state.session?.user.role === "merchant" && this.bestIsMine(p.listing_id)) {
          this.state.closedResults[p.listing_id] = {
            result: "won",
            product: p.product,
            final_price: p.final_price,
            contact: p.farmer_contact,
          };
        }
        this.markClosed(p.listing_id, "closed_sold");
        return;
      }
      case "auction.sold": {
        if (this.state.session?.user.role === "farmer") {
          this.state.closedResults[p.listing_id] = {
            result: "sold",
            product: p.product,
            final_price: p.final_price,
            contact: p.merchant_contact,
          };
        }
        this.markClosed(p.listing_id, "closed_sold");
        return;
      }
      case "auction.unsold": {
        if (this.state.session?.user.role === "farmer") {
          this.state.closedResults[p.listing_id] = { result: "unsold", product: p.product };
        }
        this.markClosed(p.listing_id, "closed_unsold");
        return;
      }
      default:
        return; // acks and pongs carry no view state
    }
  }

  private bestIsMine(listingId: string): boolean {
    const me = this.state.session?.user.id;
    const listing = this.state.listings.find((l) => l.id === listingId);
    if (!me || !listing || listing.offers.length === 0) return false;
    return listing.offers[listing.offers.length - 1].merchant_id === me;
  }

  private markClosed(listingId: string, status: Listing["status"]) {
    const listing = this.state.listings.find((l) => l.id === listingId);
    if (listing) listing.status = status;
    const me = this.state.session?.user.id;
    if (
      listing &&
      me &&
      this.state.session?.user.role === "merchant" &&
      status === "closed_sold" &&
      !this.state.closedResults[listingId] &&
      listing.offers.some((o) => o.merchant_id === me) &&
      !this.bestIsMine(listingId)
    ) {
      // I bid, somebody else's offer stood at the close
      this.state.closedResults[listingId] = { result: "lost", product: listing.product };
    }
    this.emitChange();
  }

  /**
   * Rebuild every view model for the current role from GET endpoints alone.
   * This is the full-page-reload path and the post-reconnect resync path.
   */
  async reloadAll(api: ApiClient) {
    const session = this.state.session;
    if (!session) return;
    const role = session.user.role;
    const me = session.user.id;

    const threads = await api.listThreads();
    const messagesByThread: Record<string, Message[]> = {};
    for (const t of threads) {
      messagesByThread[t.id] = await api.fetchMessages(t.id);
    }
    this.state.threads = threads;
    this.state.messagesByThread = messagesByThread;
    if (!threads.some((t) => t.id === this.state.activeThread)) {
      this.state.activeThread = threads[0]?.id || "";
    }

    if (role === "farmer") {
      this.state.farms = await api.listFarms();
      this.state.crops = await api.listCrops();
      this.state.requests = await api.listRequests();
      this.state.history = await api.history();
      this.state.listings = await api.listListings("mine");
      this.state.purchases = await api.purchases();
      for (const l of this.state.listings) {
        if (l.status === "closed_sold") {
          const sale = this.state.purchases.find((x) => x.listing_id === l.id);
          this.state.closedResults[l.id] = {
            result: "sold",
            product: l.product,
            final_price: sale?.final_price ?? l.best_offer ?? undefined,
            contact: sale?.merchant_contact,
          };
        } else if (l.status === "closed_unsold") {
          this.state.closedResults[l.id] = { result: "unsold", product: l.product };
        }
      }
    } else if (role === "agronomist") {
      this.state.requests = await api.listRequests();
      this.state.history = await api.history();
      this.state.usage = await api.usage();
      try {
        this.state.trend = await api.trend();
      } catch {
        this.state.trend = null; // no download history on a fresh install
      }
    } else if (role === "merchant") {
      this.state.listings = await api.listListings("open");
      this.state.purchases = await api.purchases();
      // being outbid is derivable: my offer exists but the best one is not mine
      this.state.outbid = {};
      for (const l of this.state.listings) {
        const mine = l.offers.filter((o) => o.merchant_id === me);
        const best = l.offers[l.offers.length - 1];
        if (mine.length > 0 && best && best.merchant_id !== me) {
          this.state.outbid[l.id] = { amount: best.amount, product: l.product };
        }
      }
      for (const won of this.state.purchases) {
        if (won.merchant_id === me) {
          this.state.closedResults[won.listing_id] = {
            result: "won",
            product: won.product,
            final_price: won.final_price,
            contact: won.farmer_contact,
          };
        }
      }
    }

    for (const rep of this.state.history) {
      this.state.reportsByRequest[rep.request_id] = rep;
    }
    this.emitChange();
  }
}
