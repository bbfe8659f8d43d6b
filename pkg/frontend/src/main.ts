/** Bootstrap: wire the session, view, and shortcuts to the live API.
 *
 * The API base defaults to the triage server's default port on this
 * host; override with ?api=http://host:port.
 */

import { HttpTriageApi } from "./api.js";
import { attachShortcuts } from "./keyboard.js";
import { ReviewSession } from "./session.js";
import type { Category } from "./types.js";
import { renderError, renderSession, renderSummary, type ViewHandlers } from "./view.js";

function apiBase(): string {
  const override = new URLSearchParams(window.location.search).get("api");
  return override ?? `http://${window.location.hostname || "127.0.0.1"}:8321`;
}

export function start(root: HTMLElement): void {
  const api = new HttpTriageApi(apiBase());
  const reviewer =
    new URLSearchParams(window.location.search).get("reviewer") ?? "default";
  const session = new ReviewSession(api, reviewer);
  const diff = new URLSearchParams(window.location.search).get("diff") === "1";
  let screen: "queue" | "summary" = "queue";

  const redraw = () => {
    if (screen === "queue") {
      renderSession(root, session, handlers, { diff });
    }
  };

  const handlers: ViewHandlers = {
    onCategory(category: Category) {
      session.selectCategory(category);
      redraw();
    },
    onRationale(text: string) {
      session.setRationale(text);
    },
    onSubmit() {
      if (!session.canSubmit) return;
      session.submit().then(redraw);
    },
    onNext() {
      session.next();
      redraw();
    },
    onPrevious() {
      session.previous();
      redraw();
    },
    onRetryLoad() {
      boot();
    },
    onShowSummary() {
      screen = "summary";
      session
        .fetchSummary()
        .then((summary) => renderSummary(root, summary, handlers))
        .catch((error) => renderError(root, String(error), handlers));
    },
    onBackToQueue() {
      screen = "queue";
      redraw();
    },
  };

  const boot = () => {
    session
      .load()
      .then(redraw)
      .catch((error) => renderError(root, String(error), handlers));
  };

  attachShortcuts(window, {
    onCategory: handlers.onCategory,
    onSubmit: handlers.onSubmit,
    onNext: handlers.onNext,
    onPrevious: handlers.onPrevious,
    onSummary: handlers.onShowSummary,
  });

  window.addEventListener("online", () => {
    session.flushOutbox().then(redraw);
  });

  boot();
}

declare global {
  interface Window {
    __notebenchStarted?: boolean;
  }
}

if (typeof document !== "undefined" && !window.__notebenchStarted) {
  const root = document.getElementById("app");
  if (root) {
    window.__notebenchStarted = true;
    start(root);
  }
}
