import { el, fmtTime, shortId } from "../dom.js";
import type { Ctx } from "./context.js";

// thread list on the left, active conversation on the right
export function renderChat(root: HTMLElement, ctx: Ctx) {
  const { store, api, rt } = ctx;
  const s = store.state;
  const me = s.session!.user.id;

  const threadItems = s.threads.map((t) => {
    const peer = t.participants.find((p) => p !== me) || me;
    const label = t.names?.[peer] || shortId(peer);
    return el("li", {
      class: "thread" + (t.id === s.activeThread ? " active" : ""),
      "data-thread-id": t.id,
      text: label,
      onclick: () => {
        s.activeThread = t.id;
        store.emitChange();
      },
    });
  });

  const peerInput = el("input", { placeholder: "peer user id" });
  const openForm = el(
    "form",
    {
      "data-role": "open-thread",
      onsubmit: async (ev: Event) => {
        ev.preventDefault();
        if (!peerInput.value.trim()) return;
        try {
          const thread = await api.openThread(peerInput.value.trim());
          store.upsertThread(thread);
          s.activeThread = thread.id;
          rt?.subscribe(`thread/${thread.id}`);
          store.emitChange();
        } catch (err: any) {
          store.setNotice(err.message || "could not open thread");
        }
      },
    },
    peerInput,
    el("button", { type: "submit", text: "Open thread" }),
  );

  const messages = s.messagesByThread[s.activeThread] || [];
  const log = el(
    "ul",
    { class: "messages", "data-role": "message-log" },
    ...messages.map((m) =>
      el(
        "li",
        { class: m.sender_id === me ? "msg mine" : "msg", "data-seq": m.seq },
        el("span", { class: "who", text: m.sender_id === me ? "me" : shortId(m.sender_id) }),
        el("span", { class: "body", text: m.body }),
        el("span", { class: "when", text: fmtTime(m.sent_at) }),
      ),
    ),
  );

  const bodyInput = el("input", { placeholder: "message", "data-role": "message-input" });
  const sendForm = el(
    "form",
    {
      "data-role": "send-message",
      onsubmit: async (ev: Event) => {
        ev.preventDefault();
        const text = bodyInput.value.trim();
        if (!text || !s.activeThread) return;
        bodyInput.value = "";
        try {
          const msg = await api.sendMessage(s.activeThread, text);
          store.appendMessage(msg);
        } catch (err: any) {
          store.setNotice(err.message || "send failed");
        }
      },
    },
    bodyInput,
    el("button", { type: "submit", text: "Send" }),
  );

  root.append(
    el(
      "div",
      { class: "chat-layout" },
      el("div", { class: "chat-side" }, openForm, el("ul", { class: "threads" }, ...threadItems)),
      el("div", { class: "chat-main" }, log, s.activeThread ? sendForm : el("p", { class: "empty", text: "no thread selected" })),
    ),
  );

  // keep the scrollback pinned to the newest message
  log.scrollTop = log.scrollHeight;
}
