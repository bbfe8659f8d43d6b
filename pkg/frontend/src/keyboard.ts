/** Keyboard shortcuts for fast review sessions.
 *
 * 1-4 select the verdict categories, Enter submits, j/k or arrows step
 * between items, s opens the summary.  Keys are ignored while typing in
 * the rationale box (except Ctrl+Enter, which submits).
 */

import { CATEGORIES, type Category } from "./types.js";

export interface ShortcutHandlers {
  onCategory(category: Category): void;
  onSubmit(): void;
  onNext(): void;
  onPrevious(): void;
  onSummary(): void;
}

export function handleKey(event: KeyboardEvent, handlers: ShortcutHandlers): boolean {
  const target = event.target as { tagName?: string } | null;
  const typing =
    !!target?.tagName && ["TEXTAREA", "INPUT"].includes(target.tagName.toUpperCase());

  if (typing) {
    if (event.key === "Enter" && (event.ctrlKey || event.metaKey)) {
      handlers.onSubmit();
      return true;
    }
    return false;
  }

  switch (event.key) {
    case "1":
    case "2":
    case "3":
    case "4":
      handlers.onCategory(CATEGORIES[Number(event.key) - 1]);
      return true;
    case "Enter":
      handlers.onSubmit();
      return true;
    case "j":
    case "ArrowRight":
      handlers.onNext();
      return true;
    case "k":
    case "ArrowLeft":
      handlers.onPrevious();
      return true;
    case "s":
      handlers.onSummary();
      return true;
    default:
      return false;
  }
}

export function attachShortcuts(
  target: { addEventListener(type: "keydown", cb: (e: KeyboardEvent) => void): void },
  handlers: ShortcutHandlers,
): void {
  target.addEventListener("keydown", (event) => {
    if (handleKey(event, handlers)) {
      (event as Event).preventDefault?.();
    }
  });
}
