/**
 * Minimal software rasterizer for the display list: RGBA canvas, stamped
 * thick lines, filled markers, and a 5x7 bitmap font (uppercase + symbols).
 * Quality is deliberately modest — the SVG output is the vector-accurate
 * artifact; the PNG is a convenience raster of the same primitives.
 */

import type { DisplayList, Primitive } from "./plot.js";

// each glyph: 7 rows of 5-bit masks, row 0 at the top
const FONT: Record<string, number[]> = {
  " ": [0, 0, 0, 0, 0, 0, 0],
  "A": [0b01110, 0b10001, 0b10001, 0b11111, 0b10001, 0b10001, 0b10001],
  "B": [0b11110, 0b10001, 0b10001, 0b11110, 0b10001, 0b10001, 0b11110],
  "C": [0b01110, 0b10001, 0b10000, 0b10000, 0b10000, 0b10001, 0b01110],
  "D": [0b11110, 0b10001, 0b10001, 0b10001, 0b10001, 0b10001, 0b11110],
  "E": [0b11111, 0b10000, 0b10000, 0b11110, 0b10000, 0b10000, 0b11111],
  "F": [0b11111, 0b10000, 0b10000, 0b11110, 0b10000, 0b10000, 0b10000],
  "G": [0b01110, 0b10001, 0b10000, 0b10111, 0b10001, 0b10001, 0b01111],
  "H": [0b10001, 0b10001, 0b10001, 0b11111, 0b10001, 0b10001, 0b10001],
  "I": [0b01110, 0b00100, 0b00100, 0b00100, 0b00100, 0b00100, 0b01110],
  "J": [0b00111, 0b00010, 0b00010, 0b00010, 0b00010, 0b10010, 0b01100],
  "K": [0b10001, 0b10010, 0b10100, 0b11000, 0b10100, 0b10010, 0b10001],
  "L": [0b10000, 0b10000, 0b10000, 0b10000, 0b10000, 0b10000, 0b11111],
  "M": [0b10001, 0b11011, 0b10101, 0b10101, 0b10001, 0b10001, 0b10001],
  "N": [0b10001, 0b11001, 0b10101, 0b10011, 0b10001, 0b10001, 0b10001],
  "O": [0b01110, 0b10001, 0b10001, 0b10001, 0b10001, 0b10001, 0b01110],
  "P": [0b11110, 0b10001, 0b10001, 0b11110, 0b10000, 0b10000, 0b10000],
  "Q": [0b01110, 0b10001, 0b10001, 0b10001, 0b10101, 0b10010, 0b01101],
  "R": [0b11110, 0b10001, 0b10001, 0b11110, 0b10100, 0b10010, 0b10001],
  "S": [0b01111, 0b10000, 0b10000, 0b01110, 0b00001, 0b00001, 0b11110],
  "T": [0b11111, 0b00100, 0b00100, 0b00100, 0b00100, 0b00100, 0b00100],
  "U": [0b10001, 0b10001, 0b10001, 0b10001, 0b10001, 0b10001, 0b01110],
  "V": [0b10001, 0b10001, 0b10001, 0b10001, 0b10001, 0b01010, 0b00100],
  "W": [0b10001, 0b10001, 0b10001, 0b10101, 0b10101, 0b11011, 0b10001],
  "X": [0b10001, 0b01010, 0b00100, 0b00100, 0b00100, 0b01010, 0b10001],
  "Y": [0b10001, 0b10001, 0b01010, 0b00100, 0b00100, 0b00100, 0b00100],
  "Z": [0b11111, 0b00001, 0b00010, 0b00100, 0b01000, 0b10000, 0b11111],
  "0": [0b01110, 0b10001, 0b10011, 0b10101, 0b11001, 0b10001, 0b01110],
  "1": [0b00100, 0b01100, 0b00100, 0b00100, 0b00100, 0b00100, 0b01110],
  "2": [0b01110, 0b10001, 0b00001, 0b00110, 0b01000, 0b10000, 0b11111],
  "3": [0b01110, 0b10001, 0b00001, 0b00110, 0b00001, 0b10001, 0b01110],
  "4": [0b00010, 0b00110, 0b01010, 0b10010, 0b11111, 0b00010, 0b00010],
  "5": [0b11111, 0b10000, 0b11110, 0b00001, 0b00001, 0b10001, 0b01110],
  "6": [0b01110, 0b10000, 0b10000, 0b11110, 0b10001, 0b10001, 0b01110],
  "7": [0b11111, 0b00001, 0b00010, 0b00100, 0b01000, 0b01000, 0b01000],
  "8": [0b01110, 0b10001, 0b10001, 0b01110, 0b10001, 0b10001, 0b01110],
  "9": [0b01110, 0b10001, 0b10001, 0b01111, 0b00001, 0b00001, 0b01110],
  "-": [0, 0, 0, 0b11111, 0, 0, 0],
  "+": [0, 0b00100, 0b00100, 0b11111, 0b00100, 0b00100, 0],
  ".": [0, 0, 0, 0, 0, 0b01100, 0b01100],
  ",": [0, 0, 0, 0, 0b01100, 0b00100, 0b01000],
  ":": [0, 0b01100, 0b01100, 0, 0b01100, 0b01100, 0],
  "[": [0b01110, 0b01000, 0b01000, 0b01000, 0b01000, 0b01000, 0b01110],
  "]": [0b01110, 0b00010, 0b00010, 0b00010, 0b00010, 0b00010, 0b01110],
  "(": [0b00010, 0b00100, 0b01000, 0b01000, 0b01000, 0b00100, 0b00010],
  ")": [0b01000, 0b00100, 0b00010, 0b00010, 0b00010, 0b00100, 0b01000],
  "/": [0b00001, 0b00010, 0b00010, 0b00100, 0b01000, 0b01000, 0b10000],
  "%": [0b11001, 0b11010, 0b00010, 0b00100, 0b01000, 0b01011, 0b10011],
  "=": [0, 0b11111, 0, 0b11111, 0, 0, 0],
  "°": [0b01100, 0b10010, 0b10010, 0b01100, 0, 0, 0],
  "?": [0b01110, 0b10001, 0b00001, 0b00110, 0b00100, 0, 0b00100],
};

export class Canvas {
  readonly width: number;
  readonly height: number;
  readonly data: Uint8ClampedArray;

  constructor(width: number, height: number) {
    this.width = Math.round(width);
    this.height = Math.round(height);
    this.data = new Uint8ClampedArray(this.width * this.height * 4);
  }

  set(x: number, y: number, r: number, g: number, b: number, a = 255): void {
    const xi = Math.round(x);
    const yi = Math.round(y);
    if (xi < 0 || yi < 0 || xi >= this.width || yi >= this.height) return;
    const o = (yi * this.width + xi) * 4;
    this.data[o] = r;
    this.data[o + 1] = g;
    this.data[o + 2] = b;
    this.data[o + 3] = a;
  }
}

function parseColor(color: string): [number, number, number] {
  const m = /^#([0-9a-fA-F]{6})$/.exec(color);
  if (!m) return [0, 0, 0];
  const v = parseInt(m[1], 16);
  return [(v >> 16) & 0xff, (v >> 8) & 0xff, v & 0xff];
}

function stampDisc(c: Canvas, x: number, y: number, radius: number,
                   rgb: [number, number, number]): void {
  const r = Math.max(0.5, radius);
  for (let dy = -Math.ceil(r); dy <= Math.ceil(r); dy++) {
    for (let dx = -Math.ceil(r); dx <= Math.ceil(r); dx++) {
      if (dx * dx + dy * dy <= r * r) {
        c.set(x + dx, y + dy, rgb[0], rgb[1], rgb[2]);
      }
    }
  }
}

function drawSegment(c: Canvas, x1: number, y1: number, x2: number, y2: number,
                     width: number, rgb: [number, number, number],
                     dash?: boolean): void {
  const len = Math.hypot(x2 - x1, y2 - y1);
  const steps = Math.max(1, Math.ceil(len * 2));
  for (let i = 0; i <= steps; i++) {
    const t = i / steps;
    if (dash && Math.floor((t * len) / 5) % 2 === 1) continue;
    stampDisc(c, x1 + t * (x2 - x1), y1 + t * (y2 - y1), width / 2, rgb);
  }
}

function glyphFor(ch: string): number[] {
  return FONT[ch] ?? FONT[ch.toUpperCase()] ?? FONT["?"];
}

export function textWidth(text: string, size: number): number {
  const scale = Math.max(1, Math.round(size / 7));
  return text.length * 6 * scale;
}

function drawText(c: Canvas, p: Extract<Primitive, { kind: "text" }>): void {
  const rgb = parseColor(p.color);
  const scale = Math.max(1, Math.round(p.size / 7));
  const w = textWidth(p.text, p.size);
  // anchor adjustment along the reading direction
  const shift = p.anchor === "middle" ? -w / 2 : p.anchor === "end" ? -w : 0;
  for (let ci = 0; ci < p.text.length; ci++) {
    const rows = glyphFor(p.text[ci]);
    for (let row = 0; row < 7; row++) {
      for (let col = 0; col < 5; col++) {
        if (!(rows[row] & (1 << (4 - col)))) continue;
        for (let j = 0; j < scale; j++) {
          for (let i = 0; i < scale; i++) {
            const u = ci * 6 * scale + col * scale + i + shift;
            const v = (row - 7) * scale + j;
            if (p.vertical) {
              c.set(p.x - v, p.y - u, rgb[0], rgb[1], rgb[2]);
            } else {
              c.set(p.x + u, p.y + v, rgb[0], rgb[1], rgb[2]);
            }
          }
        }
      }
    }
  }
}

function drawMarker(c: Canvas, p: Extract<Primitive, { kind: "marker" }>): void {
  const rgb = parseColor(p.color);
  const r = p.size;
  switch (p.shape) {
    case "square":
      for (let dy = -r; dy <= r; dy++) {
        for (let dx = -r; dx <= r; dx++) c.set(p.x + dx, p.y + dy, ...rgb);
      }
      break;
    case "triangle":
      for (let dy = -r; dy <= r; dy++) {
        const half = ((dy + r) / (2 * r)) * r;
        for (let dx = -half; dx <= half; dx++) c.set(p.x + dx, p.y + dy, ...rgb);
      }
      break;
    case "diamond":
      for (let dy = -r; dy <= r; dy++) {
        const half = r - Math.abs(dy);
        for (let dx = -half; dx <= half; dx++) c.set(p.x + dx, p.y + dy, ...rgb);
      }
      break;
    default:
      stampDisc(c, p.x, p.y, r, rgb);
  }
}

export function rasterize(list: DisplayList): Canvas {
  const c = new Canvas(list.width, list.height);
  for (const p of list.primitives) {
    switch (p.kind) {
      case "rect": {
        const rgb = parseColor(p.fill);
        for (let y = p.y; y < p.y + p.h; y++) {
          for (let x = p.x; x < p.x + p.w; x++) c.set(x, y, ...rgb);
        }
        break;
      }
      case "line":
        drawSegment(c, p.x1, p.y1, p.x2, p.y2, p.width, parseColor(p.color), p.dash);
        break;
      case "polyline":
        for (let i = 1; i < p.points.length; i++) {
          drawSegment(c, p.points[i - 1][0], p.points[i - 1][1],
                      p.points[i][0], p.points[i][1], p.width,
                      parseColor(p.color), p.dash);
        }
        break;
      case "marker":
        drawMarker(c, p);
        break;
      case "text":
        drawText(c, p);
        break;
    }
  }
  return c;
}
