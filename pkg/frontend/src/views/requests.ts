import { el, fmtTime, shortId } from "../dom.js";
import { CLASS_LABELS } from "../types.js";
import type { Ctx } from "./context.js";
import { requestCard } from "./diagnosis.js";

// agronomist Requests tab: the processed queue, plus everything assigned to me
export function renderRequests(root: HTMLElement, ctx: Ctx) {
  const { store, api, rt } = ctx;
  const s = store.state;
  const me = s.session!.user.id;

  const queue = s.requests.filter((r) => r.state === "processed");
  const mine = s.requests.filter((r) => r.state === "assigned" && r.agronomist_id === me);
  const pendingPipeline = s.requests.filter((r) => r.state === "submitted");

  const queueCards = queue.map((r) => {
    const card = requestCard(r, ctx, { showPrediction: true });
    card.append(
      el("button", {
        "data-action": "claim",
        text: "Claim",
        onclick: async () => {
          try {
            const updated = await api.claimRequest(r.id);
            store.upsertRequest(updated);
            rt?.subscribe(`request/${r.id}`);
          } catch (err: any) {
            // somebody else got there first; refresh the card
            store.setNotice(err.message || "claim failed");
            try {
              store.upsertRequest(await api.getRequest(r.id));
            } catch {}
          }
        },
      }),
    );
    return card;
  });

  const mineCards = mine.map((r) => {
    const card = requestCard(r, ctx, { showPrediction: true });
    const diagnosis = el("textarea", { placeholder: "diagnosis", "data-role": "diagnosis-text" });
    const label = el("select", { "data-role": "confirmed-label" },
      el("option", { value: "", text: "(no confirmed label)" }),
      ...CLASS_LABELS.map((l) => el("option", { value: l, text: l })),
    );
    const recs = el("textarea", { placeholder: "recommendations" });
    const reportError = el("div", { class: "error" });
    card.append(
      el("form", {
        "data-role": "file-report",
        onsubmit: async (ev: Event) => {
          ev.preventDefault();
          reportError.textContent = "";
          try {
            const report = await api.fileReport(r.id, diagnosis.value, label.value || null, recs.value);
            s.reportsByRequest[r.id] = report;
            r.state = "diagnosed";
            s.history.unshift(report);
            store.emitChange();
          } catch (err: any) {
            reportError.textContent = err.message || "report rejected";
          }
        },
      }, diagnosis, label, recs, el("button", { type: "submit", text: "File report" }), reportError),
    );
    return card;
  });

  root.append(
    el("section", {},
      el("h2", { text: "Waiting for diagnosis" }),
      ...(queueCards.length ? queueCards : [el("p", { class: "empty", text: "queue is empty" })]),
      el("h2", { text: "Assigned to me" }),
      ...(mineCards.length ? mineCards : [el("p", { class: "empty", text: "nothing claimed" })]),
      pendingPipeline.length
        ? el("p", { class: "muted", text: `${pendingPipeline.length} sample(s) still in the analysis pipeline` })
        : null,
    ),
  );
}
