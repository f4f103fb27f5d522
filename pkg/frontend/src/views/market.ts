import { el, fmtMoney, fmtTime, shortId } from "../dom.js";
import { ApiError } from "../api.js";
import type { Listing } from "../types.js";
import type { Ctx } from "./context.js";

function listingCard(l: Listing, ctx: Ctx): HTMLElement {
  const { store, api, rt } = ctx;
  const s = store.state;
  const me = s.session!.user.id;

  const best = l.offers.length ? l.offers[l.offers.length - 1] : null;
  const iAmBest = best !== null && best.merchant_id === me;
  const outbid = s.outbid[l.id];
  const closed = s.closedResults[l.id];

  const amount = el("input", { type: "number", min: "1", placeholder: "amount (cents)", "data-role": "bid-amount" });
  const bidError = el("div", { class: "error", "data-role": "bid-error" });
  const bidForm = el(
    "form",
    {
      "data-role": "bid-form",
      onsubmit: async (ev: Event) => {
        ev.preventDefault();
        bidError.textContent = "";
        try {
          await api.placeOffer(l.id, Math.round(Number(amount.value || 0)));
          // server frame confirms it, but reflect the accepted bid immediately
          const updated = await api.getListing(l.id);
          store.upsertListing(updated);
          delete s.outbid[l.id];
          store.emitChange();
        } catch (err: any) {
          if (err instanceof ApiError && err.error === "bid_too_low") {
            bidError.textContent = `${err.message}; current best is ${fmtMoney(l.best_offer ?? l.starting_price)}`;
          } else {
            bidError.textContent = err.message || "bid rejected";
          }
        }
      },
    },
    amount,
    el("button", { type: "submit", text: outbid ? "Bid again" : "Place bid" }),
    bidError,
  );

  rt?.subscribe(`listing/${l.id}`);

  return el(
    "div",
    { class: "card listing", "data-listing-id": l.id },
    el("div", { class: "card-head" },
      el("strong", { text: l.product }),
      el("span", { class: "muted", text: `${l.quantity} ${l.unit} from ${shortId(l.farmer_id)}` }),
      el("span", { class: `badge status-${l.status}`, "data-status": l.status, text: l.status }),
    ),
    l.description ? el("p", { text: l.description }) : null,
    el("p", {},
      el("span", { text: `starting ${fmtMoney(l.starting_price)} ` }),
      el("strong", { "data-role": "best-offer", text: `best ${fmtMoney(l.best_offer)}` }),
      el("span", { class: "muted", text: ` ends ${fmtTime(l.ends_at)}` }),
    ),
    iAmBest && !closed
      ? el("p", { class: "mine-best", "data-role": "my-bid-best", text: "your bid is the best offer" })
      : null,
    outbid && !closed
      ? el("div", { class: "outbid-banner", "data-role": "outbid-banner" },
          el("strong", { text: "You have been outbid" }),
          el("span", { text: ` on ${outbid.product}: new best ${fmtMoney(outbid.amount)}` }))
      : null,
    closed
      ? el("div", { class: `closed-banner ${closed.result}`, "data-role": "closed", "data-result": closed.result },
          closed.result === "won"
            ? el("span", { text: `won at ${fmtMoney(closed.final_price)}; seller contact: ${JSON.stringify(closed.contact || {})}` })
            : el("span", { text: closed.result === "lost" ? "auction lost" : `auction ${closed.result}` }))
      : null,
    l.status === "open" ? bidForm : null,
  );
}

// merchant On-sale tab: everything currently biddable, plus auctions that
// closed while the tab was open so the result stays visible until reload
export function renderOnsale(root: HTMLElement, ctx: Ctx) {
  const s = ctx.store.state;
  const open = s.listings.filter((l) => l.status === "open" || s.closedResults[l.id]);
  root.append(
    el("section", {},
      el("h2", { text: "On sale" }),
      ...(open.length ? open.map((l) => listingCard(l, ctx)) : [el("p", { class: "empty", text: "nothing on sale right now" })]),
    ),
  );
}

// merchant Offers tab: only the auctions I am bidding in
export function renderOffers(root: HTMLElement, ctx: Ctx) {
  const s = ctx.store.state;
  const me = s.session!.user.id;
  const engaged = s.listings.filter((l) => l.offers.some((o) => o.merchant_id === me));
  root.append(
    el("section", {},
      el("h2", { text: "My offers" }),
      ...(engaged.length ? engaged.map((l) => listingCard(l, ctx)) : [el("p", { class: "empty", text: "you have not bid on anything" })]),
    ),
  );
}

// purchases table, shared shape for merchants (wins) and their receipts
export function renderPurchases(root: HTMLElement, ctx: Ctx) {
  const purchases = ctx.store.state.purchases;
  root.append(
    el("section", {},
      el("h2", { text: "Purchases" }),
      purchases.length
        ? el("table", { class: "purchases", "data-role": "purchases-table" },
            el("thead", {}, el("tr", {},
              el("th", { text: "product" }),
              el("th", { text: "price" }),
              el("th", { text: "seller" }),
              el("th", { text: "contact" }),
              el("th", { text: "closed" }))),
            el("tbody", {},
              ...purchases.map((p) =>
                el("tr", { "data-listing-id": p.listing_id },
                  el("td", { text: p.product }),
                  el("td", { text: fmtMoney(p.final_price) }),
                  el("td", { text: shortId(p.farmer_id) }),
                  el("td", { text: JSON.stringify(p.farmer_contact) }),
                  el("td", { text: fmtTime(p.closed_at) })))))
        : el("p", { class: "empty", text: "no purchases yet" }),
    ),
  );
}
