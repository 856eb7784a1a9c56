/** Keyboard-first navigation: a pure dispatch map plus a DOM attach helper. */

export interface KeyHandlers {
  nextFlag?: () => void;
  prevFlag?: () => void;
  panLeft?: () => void;
  panRight?: () => void;
  acceptAutoBottom?: () => void;
  toggleDrawMode?: () => void;
  submit?: () => void;
  cancelPending?: () => void;
}

const BINDINGS: Record<string, keyof KeyHandlers> = {
  n: "nextFlag",
  p: "prevFlag",
  ArrowLeft: "panLeft",
  ArrowRight: "panRight",
  a: "acceptAutoBottom",
  d: "toggleDrawMode",
  Enter: "submit",
  Escape: "cancelPending",
};

/** Returns true when the key mapped to a handler and it ran. */
export function dispatchKey(key: string, handlers: KeyHandlers): boolean {
  const name = BINDINGS[key];
  const fn = name && handlers[name];
  if (!fn) return false;
  fn();
  return true;
}

export function attachKeyboard(
  target: { addEventListener: Window["addEventListener"] },
  handlers: KeyHandlers,
): void {
  target.addEventListener("keydown", (e: KeyboardEvent) => {
    if (dispatchKey(e.key, handlers)) e.preventDefault();
  });
}
