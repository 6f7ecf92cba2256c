/**
 * The mask the user paints, kept at full image resolution no matter how the
 * canvas is displayed. Dimensions are fixed at construction (the session's
 * image size) and never change, so the server can always pair the mask with
 * the session image.
 */

import { bytesToBase64, encodeGrayPng } from "./png.js";

export interface Brush {
  radius: number;
  mode: "paint" | "erase";
}

export interface Point {
  x: number;
  y: number;
}

export class MaskRaster {
  readonly width: number;
  readonly height: number;
  private readonly bits: Uint8Array;

  constructor(width: number, height: number) {
    if (width < 1 || height < 1 || !Number.isInteger(width) || !Number.isInteger(height)) {
      throw new Error(`invalid mask dimensions ${width}x${height}`);
    }
    this.width = width;
    this.height = height;
    this.bits = new Uint8Array(width * height);
  }

  get(x: number, y: number): boolean {
    return this.bits[y * this.width + x] !== 0;
  }

  count(): number {
    let n = 0;
    for (let i = 0; i < this.bits.length; i++) if (this.bits[i]) n++;
    return n;
  }

  clear(): void {
    this.bits.fill(0);
  }

  isEmpty(): boolean {
    return this.count() === 0;
  }

  stampDisk(cx: number, cy: number, radius: number, value: boolean): void {
    const r = Math.max(0, radius);
    const r2 = r * r;
    const x0 = Math.max(0, Math.floor(cx - r));
    const x1 = Math.min(this.width - 1, Math.ceil(cx + r));
    const y0 = Math.max(0, Math.floor(cy - r));
    const y1 = Math.min(this.height - 1, Math.ceil(cy + r));
    for (let y = y0; y <= y1; y++) {
      for (let x = x0; x <= x1; x++) {
        const dx = x - cx;
        const dy = y - cy;
        if (dx * dx + dy * dy <= r2) {
          this.bits[y * this.width + x] = value ? 1 : 0;
        }
      }
    }
  }

  /**
   * Stamp brush disks along the polyline: segments are walked in steps of
   * at most one pixel so strokes are gap-free. A single point (or an empty
   * segment) stamps one disk.
   */
  paintStroke(points: Point[], brush: Brush): void {
    if (points.length === 0) return;
    const value = brush.mode === "paint";
    this.stampDisk(points[0].x, points[0].y, brush.radius, value);
    for (let i = 1; i < points.length; i++) {
      const a = points[i - 1];
      const b = points[i];
      const dist = Math.hypot(b.x - a.x, b.y - a.y);
      const steps = Math.max(1, Math.ceil(dist));
      for (let s = 1; s <= steps; s++) {
        const t = s / steps;
        this.stampDisk(a.x + (b.x - a.x) * t, a.y + (b.y - a.y) * t, brush.radius, value);
      }
    }
  }

  /** Single-channel PNG (white = masked), base64-encoded for the API. */
  toPngBase64(): string {
    const gray = new Uint8Array(this.bits.length);
    for (let i = 0; i < this.bits.length; i++) gray[i] = this.bits[i] ? 255 : 0;
    return bytesToBase64(encodeGrayPng(gray, this.width, this.height));
  }
}
