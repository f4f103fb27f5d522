import { el, fmtTime, shortId } from "../dom.js";
import type { DiagnosisRequest } from "../types.js";
import type { Ctx } from "./context.js";

export function toBase64(buf: ArrayBuffer): string {
  const bytes = new Uint8Array(buf);
  let binary = "";
  const chunk = 0x8000;
  for (let i = 0; i < bytes.length; i += chunk) {
    binary += String.fromCharCode(...bytes.subarray(i, i + chunk));
  }
  return btoa(binary);
}

function readBytes(file: File): Promise<ArrayBuffer> {
  return new Promise((resolve, reject) => {
    const reader = new FileReader();
    reader.onload = () => resolve(reader.result as ArrayBuffer);
    reader.onerror = () => reject(reader.error || new Error("could not read file"));
    reader.readAsArrayBuffer(file);
  });
}

function summaryRows(doc: any): HTMLElement {
  const keys = ["mean", "min", "max", "p50", "valid_fraction"];
  return el(
    "table",
    { class: "index-summary" },
    el("tbody", {},
      ...keys.map((k) =>
        el("tr", {}, el("td", { text: k }), el("td", { text: doc && doc[k] != null ? Number(doc[k]).toFixed(4) : "-" })),
      ),
    ),
  );
}

/** One request card, shared by the farmer and agronomist views.
 *  Farmers never see the raw model prediction, only the filed report. */
export function requestCard(req: DiagnosisRequest, ctx: Ctx, opts: { showPrediction: boolean }): HTMLElement {
  const { store, api } = ctx;
  const report = store.state.reportsByRequest[req.id];
  const att = req.attachments || {};

  const pieces: (HTMLElement | null)[] = [
    el("div", { class: "card-head" },
      el("span", { class: "mono", text: shortId(req.id) }),
      el("span", { class: `badge state-${req.state}`, "data-state": req.state, text: req.state }),
      el("span", { class: "when", text: fmtTime(req.created_at) }),
    ),
  ];

  if (att.tgi || att.grvi) {
    pieces.push(
      el("div", { class: "analysis" },
        el("div", {}, el("h4", { text: "TGI" }), summaryRows(att.tgi),
          att.tgi_heatmap ? el("img", { class: "heatmap", alt: "tgi heatmap", src: api.blobUrl(att.tgi_heatmap) }) : null),
        el("div", {}, el("h4", { text: "GRVI" }), summaryRows(att.grvi),
          att.grvi_heatmap ? el("img", { class: "heatmap", alt: "grvi heatmap", src: api.blobUrl(att.grvi_heatmap) }) : null),
      ),
    );
  }

  if (opts.showPrediction && att.prediction) {
    const pred = att.prediction;
    pieces.push(
      el("div", { class: "prediction", "data-role": "prediction" },
        el("h4", { text: `model: ${pred.label}` }),
        el("ul", {}, ...pred.probabilities.map((p: number, i: number) =>
          el("li", { text: `class ${i}: ${(p * 100).toFixed(1)}%` }))),
      ),
    );
  }

  if (report) {
    pieces.push(
      el("div", { class: "report", "data-role": "report" },
        el("h4", { text: "Agronomist report" }),
        el("p", { class: "diagnosis-text", text: report.diagnosis }),
        report.confirmed_label ? el("p", { class: "label", text: `confirmed: ${report.confirmed_label}` }) : null,
        report.recommendations ? el("p", { class: "recs", text: report.recommendations }) : null,
      ),
    );
  }

  return el("div", { class: "card request", "data-request-id": req.id }, ...pieces);
}

// farmer Diagnosis tab: submit a leaf photo, watch the request progress live
export function renderDiagnosis(root: HTMLElement, ctx: Ctx) {
  const { store, api, rt } = ctx;
  const s = store.state;

  const cropSelect = el("select", { "data-role": "crop-select" },
    ...s.crops.map((c) => el("option", { value: c.id, text: `${c.kind} (${shortId(c.farm_id)})` })),
  );
  const fileInput = el("input", { type: "file", accept: "image/png,image/jpeg" });
  const uploadError = el("div", { class: "error", "data-role": "upload-error" });

  const form = el(
    "form",
    {
      "data-role": "submit-sample",
      onsubmit: async (ev: Event) => {
        ev.preventDefault();
        uploadError.textContent = "";
        const file = fileInput.files && fileInput.files[0];
        if (!file) {
          uploadError.textContent = "choose an image first";
          return;
        }
        if (file.size > ctx.maxUpload) {
          uploadError.textContent = `file too large (max ${Math.floor(ctx.maxUpload / (1024 * 1024))} MiB)`;
          return;
        }
        try {
          const encoded = toBase64(await readBytes(file));
          const req = await api.submitSample(cropSelect.value, encoded);
          store.upsertRequest(req);
          rt?.subscribe(`request/${req.id}`);
        } catch (err: any) {
          uploadError.textContent = err.message || "upload failed";
        }
      },
    },
    cropSelect,
    fileInput,
    el("button", { type: "submit", text: "Submit sample" }),
    uploadError,
  );

  const cards = s.requests.map((r) => requestCard(r, ctx, { showPrediction: false }));

  root.append(
    el("section", {},
      el("h2", { text: "Submit a sample" }),
      s.crops.length ? form : el("p", { class: "empty", text: "create a farm and a crop first (Production tab)" }),
      el("h2", { text: "My requests" }),
      ...(cards.length ? cards : [el("p", { class: "empty", text: "no requests yet" })]),
    ),
  );
}
