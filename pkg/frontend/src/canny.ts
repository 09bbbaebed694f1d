/**
 * Client-side Canny for the edge overlay toggle: Gaussian blur (reflected
 * borders, radius ceil(3*sigma)), Sobel gradients, 4-direction non-maximum
 * suppression, then hysteresis with high = threshold * max magnitude and
 * low = lowRatio * high. Mirrors the service-side pipeline so the overlay
 * matches batch edge output.
 */

export interface CannyOptions {
  sigma: number;
  highThreshold: number;
  lowRatio: number;
}

export const DEFAULT_CANNY: CannyOptions = { sigma: 1.4, highThreshold: 0.7, lowRatio: 0.4 };

export function gaussianKernel(sigma: number): Float64Array {
  if (!(sigma > 0)) throw new Error(`sigma must be > 0, got ${sigma}`);
  const radius = Math.ceil(3 * sigma);
  const kernel = new Float64Array(2 * radius + 1);
  let sum = 0;
  for (let i = -radius; i <= radius; i++) {
    const v = Math.exp(-(i * i) / (2 * sigma * sigma));
    kernel[i + radius] = v;
    sum += v;
  }
  for (let i = 0; i < kernel.length; i++) kernel[i] /= sum;
  return kernel;
}

function reflect(index: number, size: number): number {
  // symmetric reflection: ... 2 1 0 | 0 1 2 ... n-1 | n-1 n-2 ...
  if (size === 1) return 0;
  const period = 2 * size;
  let i = ((index % period) + period) % period;
  if (i >= size) i = period - 1 - i;
  return i;
}

function convolveAxis(
  src: Float64Array,
  width: number,
  height: number,
  kernel: Float64Array,
  horizontal: boolean,
): Float64Array {
  const radius = (kernel.length - 1) / 2;
  const out = new Float64Array(src.length);
  for (let y = 0; y < height; y++) {
    for (let x = 0; x < width; x++) {
      let acc = 0;
      for (let k = -radius; k <= radius; k++) {
        const sx = horizontal ? reflect(x + k, width) : x;
        const sy = horizontal ? y : reflect(y + k, height);
        acc += kernel[k + radius] * src[sy * width + sx];
      }
      out[y * width + x] = acc;
    }
  }
  return out;
}

export function gaussianBlur(
  gray: Float64Array,
  width: number,
  height: number,
  sigma: number,
): Float64Array {
  const kernel = gaussianKernel(sigma);
  return convolveAxis(convolveAxis(gray, width, height, kernel, false), width, height, kernel, true);
}

function sobel(
  gray: Float64Array,
  width: number,
  height: number,
): { gx: Float64Array; gy: Float64Array } {
  const gx = new Float64Array(gray.length);
  const gy = new Float64Array(gray.length);
  const at = (x: number, y: number) => gray[reflect(y, height) * width + reflect(x, width)];
  for (let y = 0; y < height; y++) {
    for (let x = 0; x < width; x++) {
      const tl = at(x - 1, y - 1), tc = at(x, y - 1), tr = at(x + 1, y - 1);
      const ml = at(x - 1, y), mr = at(x + 1, y);
      const bl = at(x - 1, y + 1), bc = at(x, y + 1), br = at(x + 1, y + 1);
      gx[y * width + x] = tr + 2 * mr + br - (tl + 2 * ml + bl);
      gy[y * width + x] = bl + 2 * bc + br - (tl + 2 * tc + tr);
    }
  }
  return { gx, gy };
}

export function luminance(rgba: Uint8ClampedArray | Uint8Array): Float64Array {
  const n = rgba.length / 4;
  const out = new Float64Array(n);
  for (let i = 0; i < n; i++) {
    out[i] = 0.299 * rgba[4 * i] + 0.587 * rgba[4 * i + 1] + 0.114 * rgba[4 * i + 2];
  }
  return out;
}

export function cannyEdges(
  gray: Float64Array,
  width: number,
  height: number,
  options: CannyOptions = DEFAULT_CANNY,
): Uint8Array {
  const { sigma, highThreshold, lowRatio } = options;
  if (!(highThreshold > 0 && highThreshold <= 1)) {
    throw new Error(`highThreshold must be in (0, 1], got ${highThreshold}`);
  }
  if (!(lowRatio > 0 && lowRatio < 1)) {
    throw new Error(`lowRatio must be in (0, 1), got ${lowRatio}`);
  }
  const blurred = gaussianBlur(gray, width, height, sigma);
  const { gx, gy } = sobel(blurred, width, height);

  const magnitude = new Float64Array(gray.length);
  let maxMag = 0;
  for (let i = 0; i < gray.length; i++) {
    magnitude[i] = Math.hypot(gx[i], gy[i]);
    if (magnitude[i] > maxMag) maxMag = magnitude[i];
  }
  const edges = new Uint8Array(gray.length);
  if (maxMag === 0) return edges;

  const high = highThreshold * maxMag;
  const low = lowRatio * high;

  // offsets per quantized gradient direction (rows grow downward)
  const offsets: ReadonlyArray<readonly [number, number]> = [
    [0, 1],
    [1, 1],
    [1, 0],
    [1, -1],
  ];
  const magAt = (x: number, y: number) =>
    x < 0 || y < 0 || x >= width || y >= height ? 0 : magnitude[y * width + x];

  const strong: number[] = [];
  const weak = new Uint8Array(gray.length);
  for (let y = 0; y < height; y++) {
    for (let x = 0; x < width; x++) {
      const i = y * width + x;
      const m = magnitude[i];
      if (m === 0 || m < low) continue;
      let angle = (Math.atan2(gy[i], gx[i]) * 180) / Math.PI;
      if (angle < 0) angle += 180;
      const sector = Math.floor((angle + 22.5) / 45) % 4;
      const [dy, dx] = offsets[sector];
      if (m < magAt(x + dx, y + dy) || m < magAt(x - dx, y - dy)) continue;
      weak[i] = 1;
      if (m >= high) strong.push(i);
    }
  }

  // hysteresis: grow strong seeds through 8-connected weak pixels
  const stack = [...strong];
  for (const i of strong) edges[i] = 1;
  while (stack.length > 0) {
    const i = stack.pop()!;
    const x = i % width;
    const y = (i - x) / width;
    for (let dy = -1; dy <= 1; dy++) {
      for (let dx = -1; dx <= 1; dx++) {
        const nx = x + dx;
        const ny = y + dy;
        if (nx < 0 || ny < 0 || nx >= width || ny >= height) continue;
        const j = ny * width + nx;
        if (weak[j] === 1 && edges[j] === 0) {
          edges[j] = 1;
          stack.push(j);
        }
      }
    }
  }
  return edges;
}
