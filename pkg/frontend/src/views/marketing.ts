import { el, fmtMoney, fmtTime, shortId } from "../dom.js";
import type { Listing } from "../types.js";
import type { Ctx } from "./context.js";

function offerTable(listing: Listing): HTMLElement {
  if (!listing.offers.length) return el("p", { class: "empty", text: "no offers yet" });
  return el(
    "table",
    { class: "offers" },
    el("thead", {}, el("tr", {}, el("th", { text: "#" }), el("th", { text: "merchant" }), el("th", { text: "amount" }))),
    el("tbody", {},
      ...listing.offers.map((o) =>
        el("tr", {}, el("td", { text: o.seq }), el("td", { text: shortId(o.merchant_id) }), el("td", { text: fmtMoney(o.amount) })),
      ),
    ),
  );
}

// farmer Marketing tab: publish produce, follow the live auction, see sales
export function renderMarketing(root: HTMLElement, ctx: Ctx) {
  const { store, api, rt } = ctx;
  const s = store.state;

  const product = el("input", { placeholder: "product" });
  const quantity = el("input", { type: "number", placeholder: "quantity", min: "0", step: "any" });
  const unit = el("input", { placeholder: "unit (kg, crate...)" });
  const price = el("input", { type: "number", placeholder: "starting price (cents)", min: "1" });
  const hours = el("input", { type: "number", placeholder: "auction hours", min: "1", value: "24" });
  const publishError = el("div", { class: "error", "data-role": "publish-error" });

  const form = el(
    "form",
    {
      "data-role": "publish-listing",
      onsubmit: async (ev: Event) => {
        ev.preventDefault();
        publishError.textContent = "";
        try {
          const listing = await api.publishListing({
            product: product.value,
            quantity: Number(quantity.value || 0),
            unit: unit.value,
            starting_price: Math.round(Number(price.value || 0)),
            ends_at: Date.now() / 1000 + Number(hours.value || 24) * 3600,
          });
          store.upsertListing(listing);
          rt?.subscribe(`listing/${listing.id}`);
        } catch (err: any) {
          publishError.textContent = err.message || "could not publish";
        }
      },
    },
    product, quantity, unit, price, hours,
    el("button", { type: "submit", text: "Publish" }),
    publishError,
  );

  const cards = s.listings.map((l) => {
    const closed = s.closedResults[l.id];
    return el(
      "div",
      { class: "card listing", "data-listing-id": l.id },
      el("div", { class: "card-head" },
        el("strong", { text: l.product }),
        el("span", { class: `badge status-${l.status}`, "data-status": l.status, text: l.status }),
        el("span", { class: "muted", text: `${l.quantity} ${l.unit}` }),
      ),
      el("p", { text: `starts at ${fmtMoney(l.starting_price)}, best ${fmtMoney(l.best_offer)}` }),
      el("p", { class: "muted", text: `ends ${fmtTime(l.ends_at)}` }),
      offerTable(l),
      closed && closed.result === "sold"
        ? el("div", { class: "sold-banner", "data-role": "sold" },
            el("strong", { text: `sold for ${fmtMoney(closed.final_price)}` }),
            el("p", { text: "buyer contact: " + JSON.stringify(closed.contact || {}) }))
        : null,
      closed && closed.result === "unsold"
        ? el("div", { class: "unsold-banner", "data-role": "unsold", text: "auction ended without offers" })
        : null,
    );
  });

  const sales = s.purchases.map((p) =>
    el("tr", {},
      el("td", { text: p.product }),
      el("td", { text: fmtMoney(p.final_price) }),
      el("td", { text: shortId(p.merchant_id) }),
      el("td", { text: fmtTime(p.closed_at) }),
    ),
  );

  root.append(
    el("section", {},
      el("h2", { text: "Publish produce" }),
      form,
      el("h2", { text: "My listings" }),
      ...(cards.length ? cards : [el("p", { class: "empty", text: "nothing on sale" })]),
      el("h2", { text: "Completed sales" }),
      sales.length
        ? el("table", { class: "sales" },
            el("thead", {}, el("tr", {},
              el("th", { text: "product" }), el("th", { text: "price" }),
              el("th", { text: "buyer" }), el("th", { text: "closed" }))),
            el("tbody", {}, ...sales))
        : el("p", { class: "empty", text: "no sales yet" }),
    ),
  );
}
