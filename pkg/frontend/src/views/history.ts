import { el, fmtTime, shortId } from "../dom.js";
import type { Ctx } from "./context.js";

// filed reports, newest first (agronomists see their own filings)
export function renderHistory(root: HTMLElement, ctx: Ctx) {
  const reports = [...ctx.store.state.history].sort((a, b) => b.filed_at - a.filed_at);

  root.append(
    el("section", {},
      el("h2", { text: "Filed reports" }),
      reports.length
        ? el("table", { class: "history", "data-role": "history-table" },
            el("thead", {}, el("tr", {},
              el("th", { text: "request" }),
              el("th", { text: "diagnosis" }),
              el("th", { text: "label" }),
              el("th", { text: "filed" }))),
            el("tbody", {},
              ...reports.map((r) =>
                el("tr", { "data-request-id": r.request_id },
                  el("td", { class: "mono", text: shortId(r.request_id) }),
                  el("td", { text: r.diagnosis }),
                  el("td", { text: r.confirmed_label || "-" }),
                  el("td", { text: fmtTime(r.filed_at) })))))
        : el("p", { class: "empty", text: "nothing filed yet" }),
    ),
  );
}
