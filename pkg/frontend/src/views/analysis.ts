import { el } from "../dom.js";
import type { Trend } from "../types.js";
import type { Ctx } from "./context.js";

const STAT_LABELS: [string, string][] = [
  ["users_total", "Users"],
  ["farmers", "Farmers"],
  ["agronomists", "Agronomists"],
  ["merchants", "Merchants"],
  ["chats", "Chats"],
  ["samples", "Samples"],
  ["products", "Products"],
  ["messages", "Messages"],
  ["farms", "Farms"],
  ["crops", "Crops"],
];

/** Inline SVG of the daily download counts with the smoothed trend over it.
 *  Hand-drawn polylines keep the page dependency-free. */
function trendSvg(trend: Trend): SVGElement {
  const W = 640;
  const H = 240;
  const PAD = 28;
  const n = trend.counts.length;
  const all = [...trend.counts, ...trend.upper, ...trend.lower];
  const top = Math.max(1, ...all);
  const x = (i: number) => PAD + (i * (W - 2 * PAD)) / Math.max(1, n - 1);
  const y = (v: number) => H - PAD - (v * (H - 2 * PAD)) / top;
  const pts = (values: number[]) => values.map((v, i) => `${x(i).toFixed(1)},${y(v).toFixed(1)}`).join(" ");

  const svg = document.createElementNS("http://www.w3.org/2000/svg", "svg");
  svg.setAttribute("viewBox", `0 0 ${W} ${H}`);
  svg.setAttribute("class", "trend");
  svg.setAttribute("data-role", "trend-chart");

  const band = document.createElementNS("http://www.w3.org/2000/svg", "polygon");
  const upper = trend.upper.map((v, i) => `${x(i).toFixed(1)},${y(v).toFixed(1)}`);
  const lower = trend.lower.map((v, i) => `${x(i).toFixed(1)},${y(v).toFixed(1)}`).reverse();
  band.setAttribute("points", [...upper, ...lower].join(" "));
  band.setAttribute("class", "band");
  svg.append(band);

  const raw = document.createElementNS("http://www.w3.org/2000/svg", "polyline");
  raw.setAttribute("points", pts(trend.counts));
  raw.setAttribute("class", "raw");
  svg.append(raw);

  const fit = document.createElementNS("http://www.w3.org/2000/svg", "polyline");
  fit.setAttribute("points", pts(trend.fitted));
  fit.setAttribute("class", "fit");
  svg.append(fit);

  return svg;
}

// agronomist Analysis tab: platform usage counters and the download trend
export function renderAnalysis(root: HTMLElement, ctx: Ctx) {
  const s = ctx.store.state;
  const usage = s.usage;

  const rows = usage
    ? STAT_LABELS.map(([key, label]) =>
        el("tr", { "data-stat": key }, el("td", { text: label }), el("td", { class: "num", text: (usage as any)[key] })),
      )
    : [];

  root.append(
    el("section", {},
      el("h2", { text: "Usage" }),
      usage
        ? el("table", { class: "usage", "data-role": "usage-table" }, el("tbody", {}, ...rows))
        : el("p", { class: "empty", text: "no usage data" }),
      el("h2", { text: "App downloads" }),
      s.trend && s.trend.counts.length
        ? trendSvg(s.trend)
        : el("p", { class: "empty", text: "no download history recorded" }),
    ),
  );
}
