/** Comparison of two saved composite results. */

export interface SavedResult {
  id: string;
  caption: string;
  width: number;
  height: number;
  /** object URL (browser) or opaque handle (tests) for the rendered PNG */
  url: string;
}

export interface ComparePlan {
  mode: "wipe" | "side-by-side";
  note: string | null;
}

/** Wipe overlay needs pixel-aligned panes; mismatched dims fall back. */
export function planCompare(
  a: Pick<SavedResult, "width" | "height">,
  b: Pick<SavedResult, "width" | "height">,
): ComparePlan {
  if (a.width === b.width && a.height === b.height) {
    return { mode: "wipe", note: null };
  }
  return {
    mode: "side-by-side",
    note: `overlay disabled: ${a.width}x${a.height} vs ${b.width}x${b.height}`,
  };
}

export function clampWipe(position: number): number {
  if (!Number.isFinite(position)) return 0.5;
  return Math.min(1, Math.max(0, position));
}

/** Shared pan/zoom state so both panes stay synchronized. */
export interface ViewTransform {
  scale: number;
  offsetX: number;
  offsetY: number;
}

export function identityTransform(): ViewTransform {
  return { scale: 1, offsetX: 0, offsetY: 0 };
}

export function zoomAt(
  view: ViewTransform,
  factor: number,
  pivotX: number,
  pivotY: number,
  minScale = 0.25,
  maxScale = 16,
): ViewTransform {
  const scale = Math.min(maxScale, Math.max(minScale, view.scale * factor));
  const applied = scale / view.scale;
  return {
    scale,
    offsetX: pivotX - (pivotX - view.offsetX) * applied,
    offsetY: pivotY - (pivotY - view.offsetY) * applied,
  };
}

export function panBy(view: ViewTransform, dx: number, dy: number): ViewTransform {
  return { ...view, offsetX: view.offsetX + dx, offsetY: view.offsetY + dy };
}
