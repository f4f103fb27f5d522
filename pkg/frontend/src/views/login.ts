import { el } from "../dom.js";
import type { Session, UserView } from "../types.js";
import type { Ctx } from "./context.js";

export function renderLogin(root: HTMLElement, ctx: Ctx, onSession: (s: Session) => void) {
  const errorBox = el("div", { class: "error", "data-role": "auth-error" });

  const loginName = el("input", { name: "name", placeholder: "name", autocomplete: "username" });
  const loginSecret = el("input", { name: "secret", type: "password", placeholder: "secret" });
  const loginForm = el(
    "form",
    {
      "data-role": "login-form",
      onsubmit: async (ev: Event) => {
        ev.preventDefault();
        try {
          const user = await ctx.api.login(loginName.value, loginSecret.value);
          onSession({ user, token: ctx.api.token });
        } catch (err: any) {
          errorBox.textContent = err.message || "login failed";
        }
      },
    },
    el("h2", { text: "Sign in" }),
    loginName,
    loginSecret,
    el("button", { type: "submit", text: "Sign in" }),
  );

  const regName = el("input", { placeholder: "name" });
  const regRole = el("select", {},
    el("option", { value: "farmer", text: "farmer" }),
    el("option", { value: "agronomist", text: "agronomist" }),
    el("option", { value: "merchant", text: "merchant" }),
  );
  const regEmail = el("input", { placeholder: "email (optional)" });
  const regPhone = el("input", { placeholder: "phone" });
  const regLocality = el("input", { placeholder: "locality" });
  const regSecret = el("input", { type: "password", placeholder: "secret (10+ chars)" });
  const regForm = el(
    "form",
    {
      "data-role": "register-form",
      onsubmit: async (ev: Event) => {
        ev.preventDefault();
        // the server insists on phone + locality; email is extra
        const contact: Record<string, string> = {
          phone: regPhone.value,
          locality: regLocality.value,
        };
        if (regEmail.value) contact.email = regEmail.value;
        try {
          const user: UserView = await ctx.api.register(regName.value, regRole.value, contact, regSecret.value);
          onSession({ user, token: ctx.api.token });
        } catch (err: any) {
          errorBox.textContent = err.message || "registration failed";
        }
      },
    },
    el("h2", { text: "Create account" }),
    regName,
    regRole,
    regEmail,
    regPhone,
    regLocality,
    regSecret,
    el("button", { type: "submit", text: "Register" }),
  );

  root.append(
    el("div", { class: "login card" }, el("h1", { text: "agroplat" }), errorBox, loginForm, regForm),
  );
}
