import { el } from "../dom.js";
import type { Ctx } from "./context.js";

// farms and their crops; plain create-and-list management
export function renderProduction(root: HTMLElement, ctx: Ctx) {
  const { store, api } = ctx;
  const s = store.state;

  const farmName = el("input", { placeholder: "farm name" });
  const farmLocality = el("input", { placeholder: "locality" });
  const farmForm = el(
    "form",
    {
      "data-role": "create-farm",
      onsubmit: async (ev: Event) => {
        ev.preventDefault();
        try {
          const farm = await api.createFarm(farmName.value, farmLocality.value);
          s.farms.push(farm);
          store.emitChange();
        } catch (err: any) {
          store.setNotice(err.message || "could not create farm");
        }
      },
    },
    farmName,
    farmLocality,
    el("button", { type: "submit", text: "Add farm" }),
  );

  const farmSelect = el("select", {}, ...s.farms.map((f) => el("option", { value: f.id, text: f.name })));
  const cropKind = el("input", { placeholder: "crop kind (e.g. citrus)" });
  const cropForm = el(
    "form",
    {
      "data-role": "create-crop",
      onsubmit: async (ev: Event) => {
        ev.preventDefault();
        try {
          const crop = await api.createCrop(farmSelect.value, cropKind.value);
          s.crops.push(crop);
          store.emitChange();
        } catch (err: any) {
          store.setNotice(err.message || "could not create crop");
        }
      },
    },
    farmSelect,
    cropKind,
    el("button", { type: "submit", text: "Add crop" }),
  );

  const farmList = el(
    "ul",
    { class: "farms" },
    ...s.farms.map((f) => {
      const crops = s.crops.filter((c) => c.farm_id === f.id);
      return el(
        "li",
        { class: "farm card", "data-farm-id": f.id },
        el("strong", { text: f.name }),
        el("span", { class: "muted", text: f.locality ? ` (${f.locality})` : "" }),
        el(
          "ul",
          { class: "crops" },
          ...crops.map((c) => el("li", { "data-crop-id": c.id, text: `${c.kind} ${c.planted_at || ""}`.trim() })),
        ),
        crops.length === 0 ? el("p", { class: "empty", text: "no crops" }) : null,
      );
    }),
  );

  root.append(
    el("section", {},
      el("h2", { text: "Farms" }),
      farmForm,
      s.farms.length ? cropForm : el("p", { class: "empty", text: "add a farm to register crops" }),
      farmList,
    ),
  );
}
