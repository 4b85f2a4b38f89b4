// Trailing-edge debounce: dragging the ghost re-queries the service at
// most once per quiet window instead of on every pointer event.

export interface Debounced<Args extends unknown[]> {
  (...args: Args): void;
  cancel(): void;
  flush(): void;
}

export const PREVIEW_DEBOUNCE_MS = 250;

export function debounce<Args extends unknown[]>(
  fn: (...args: Args) => void,
  delayMs: number = PREVIEW_DEBOUNCE_MS,
): Debounced<Args> {
  let timer: ReturnType<typeof setTimeout> | undefined;
  let pending: Args | undefined;

  const debounced = (...args: Args) => {
    pending = args;
    if (timer !== undefined) clearTimeout(timer);
    timer = setTimeout(() => {
      timer = undefined;
      const args = pending as Args;
      pending = undefined;
      fn(...args);
    }, delayMs);
  };
  debounced.cancel = () => {
    if (timer !== undefined) clearTimeout(timer);
    timer = undefined;
    pending = undefined;
  };
  debounced.flush = () => {
    if (timer === undefined) return;
    clearTimeout(timer);
    timer = undefined;
    const args = pending as Args;
    pending = undefined;
    fn(...args);
  };
  return debounced;
}
