/** DOM rendering: the whole screen is rebuilt from session state on every
 * change, so what you see is always exactly what the state says. */

import { highlightUnique } from "./diff.js";
import type { ReviewSession } from "./session.js";
import { CATEGORIES, CATEGORY_LABELS, type Category, type SummaryPayload } from "./types.js";

export interface ViewHandlers {
  onCategory(category: Category): void;
  onRationale(text: string): void;
  onSubmit(): void;
  onNext(): void;
  onPrevious(): void;
  onRetryLoad(): void;
  onShowSummary(): void;
  onBackToQueue(): void;
}

function el<K extends keyof HTMLElementTagNameMap>(
  doc: Document,
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = doc.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function notePane(
  doc: Document,
  label: string,
  text: string,
  other: string,
  diffEnabled: boolean,
): HTMLElement {
  const pane = el(doc, "section", "note-pane");
  pane.appendChild(el(doc, "h2", "pane-label", label));
  const body = el(doc, "pre", "note-text");
  if (diffEnabled) {
    for (const segment of highlightUnique(text, other)) {
      if (segment.unique) {
        body.appendChild(el(doc, "mark", undefined, segment.text));
      } else {
        body.appendChild(doc.createTextNode(segment.text));
      }
    }
  } else {
    body.textContent = text;
  }
  pane.appendChild(body);
  return pane;
}

export function renderError(root: HTMLElement, message: string, handlers: ViewHandlers): void {
  const doc = root.ownerDocument;
  root.innerHTML = "";
  const box = el(doc, "div", "error-screen");
  box.appendChild(el(doc, "p", "error-message", `Could not reach the review server: ${message}`));
  const retry = el(doc, "button", "retry-button", "Retry");
  retry.addEventListener("click", () => handlers.onRetryLoad());
  box.appendChild(retry);
  root.appendChild(box);
}

export function renderSummary(
  root: HTMLElement,
  summary: SummaryPayload,
  handlers: ViewHandlers,
): void {
  const doc = root.ownerDocument;
  root.innerHTML = "";
  const screen = el(doc, "div", "summary-screen");
  screen.appendChild(el(doc, "h1", undefined, "Review summary"));
  const table = el(doc, "table", "summary-table");
  const head = el(doc, "tr");
  for (const title of ["Category", "Count", "Share"]) {
    head.appendChild(el(doc, "th", undefined, title));
  }
  table.appendChild(head);
  for (const category of CATEGORIES) {
    const row = el(doc, "tr");
    row.dataset.category = category;
    row.appendChild(el(doc, "td", undefined, CATEGORY_LABELS[category]));
    row.appendChild(el(doc, "td", "count-cell", String(summary.counts[category] ?? 0)));
    // shares come from the server payload verbatim
    const pct = (summary.shares[category] ?? 0) * 100;
    row.appendChild(el(doc, "td", "share-cell", `${pct.toFixed(1)}%`));
    table.appendChild(row);
  }
  screen.appendChild(table);
  screen.appendChild(
    el(
      doc,
      "p",
      "summary-totals",
      `${summary.total_reviewed} reviewed, ${summary.total_pending} pending`,
    ),
  );
  const back = el(doc, "button", "back-button", "Back to queue");
  back.addEventListener("click", () => handlers.onBackToQueue());
  screen.appendChild(back);
  root.appendChild(screen);
}

export function renderSession(
  root: HTMLElement,
  session: ReviewSession,
  handlers: ViewHandlers,
  options: { diff?: boolean } = {},
): void {
  const doc = root.ownerDocument;
  root.innerHTML = "";

  if (session.complete) {
    const screen = el(doc, "div", "completion-screen");
    screen.appendChild(el(doc, "h1", undefined, "Queue complete"));
    screen.appendChild(
      el(doc, "p", undefined, `All ${session.progress.total} encounters are reviewed.`),
    );
    const link = el(doc, "button", "summary-link", "View summary");
    link.addEventListener("click", () => handlers.onShowSummary());
    screen.appendChild(link);
    root.appendChild(screen);
    return;
  }

  const item = session.current;
  if (!item) {
    root.appendChild(el(doc, "p", "empty", "No item selected."));
    return;
  }

  const header = el(doc, "header", "review-header");
  const progress = session.progress;
  header.appendChild(el(doc, "span", "encounter-id", item.encounter_id));
  header.appendChild(
    el(doc, "span", "progress", `${progress.done} / ${progress.total} reviewed`),
  );
  const bar = el(doc, "div", "progress-bar");
  const fill = el(doc, "div", "progress-fill");
  fill.style.width = progress.total
    ? `${(progress.done / progress.total) * 100}%`
    : "0%";
  bar.appendChild(fill);
  header.appendChild(bar);
  const summaryButton = el(doc, "button", "summary-button", "Summary");
  summaryButton.addEventListener("click", () => handlers.onShowSummary());
  header.appendChild(summaryButton);
  root.appendChild(header);

  const panes = el(doc, "div", "panes");
  panes.appendChild(notePane(doc, "Note A", item.note_a, item.note_b, options.diff ?? false));
  panes.appendChild(notePane(doc, "Note B", item.note_b, item.note_a, options.diff ?? false));
  root.appendChild(panes);

  const context = el(doc, "details", "judge-context");
  context.appendChild(el(doc, "summary", undefined, "Automated judge context"));
  const contextBody = el(doc, "pre", "judge-context-body");
  contextBody.textContent = JSON.stringify(item.judge_context, null, 2);
  context.appendChild(contextBody);
  root.appendChild(context);

  if (item.status === "done") {
    const done = el(doc, "div", "done-banner");
    const verdict = item.verdict;
    done.appendChild(
      el(
        doc,
        "p",
        "recorded-verdict",
        verdict
          ? `Recorded: ${CATEGORY_LABELS[verdict.category]}` +
              (verdict.rationale ? ` ("${verdict.rationale}")` : "")
          : "Recorded.",
      ),
    );
    root.appendChild(done);
  } else {
    const form = el(doc, "div", "verdict-form");
    const buttons = el(doc, "div", "category-buttons");
    CATEGORIES.forEach((category, i) => {
      const button = el(doc, "button", "category-button", `${i + 1}. ${CATEGORY_LABELS[category]}`);
      button.dataset.category = category;
      if (session.draft.category === category) {
        button.classList.add("selected");
      }
      button.addEventListener("click", () => handlers.onCategory(category));
      buttons.appendChild(button);
    });
    form.appendChild(buttons);

    const rationale = el(doc, "textarea", "rationale-input");
    rationale.placeholder = "Rationale (optional)";
    rationale.value = session.draft.rationale;
    rationale.addEventListener("input", () =>
      handlers.onRationale((rationale as HTMLTextAreaElement).value),
    );
    form.appendChild(rationale);

    const submit = el(doc, "button", "submit-button", "Submit verdict (Enter)");
    submit.disabled = !session.canSubmit;
    submit.addEventListener("click", () => handlers.onSubmit());
    form.appendChild(submit);
    root.appendChild(form);
  }

  if (session.submission === "conflict" && session.conflictVerdict) {
    const banner = el(doc, "div", "conflict-banner");
    banner.appendChild(
      el(
        doc,
        "p",
        undefined,
        `Already reviewed as ${CATEGORY_LABELS[session.conflictVerdict.category]}` +
          (session.conflictVerdict.rationale
            ? ` ("${session.conflictVerdict.rationale}")`
            : ""),
      ),
    );
    root.appendChild(banner);
  }
  if (session.submission === "queued_offline") {
    root.appendChild(
      el(
        doc,
        "div",
        "offline-banner",
        `Offline: ${session.outbox.length} verdict(s) queued; will send on reconnect.`,
      ),
    );
  }

  const nav = el(doc, "nav", "item-nav");
  const prev = el(doc, "button", "prev-button", "Previous (k)");
  prev.addEventListener("click", () => handlers.onPrevious());
  const next = el(doc, "button", "next-button", "Next (j)");
  next.addEventListener("click", () => handlers.onNext());
  nav.appendChild(prev);
  nav.appendChild(next);
  root.appendChild(nav);

  root.appendChild(el(doc, "p", "blinding-note", item.blinding_note));
}
