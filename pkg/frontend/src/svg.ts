/** SVG backend: serialize a display list into a standalone SVG document. */

import type { DisplayList, Primitive } from "./plot.js";

function esc(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

function markerPath(p: Extract<Primitive, { kind: "marker" }>): string {
  const { x, y, size: r, color } = p;
  switch (p.shape) {
    case "square":
      return `<rect x="${x - r}" y="${y - r}" width="${2 * r}" height="${2 * r}" fill="${color}"/>`;
    case "triangle":
      return `<polygon points="${x},${y - r} ${x - r},${y + r} ${x + r},${y + r}" fill="${color}"/>`;
    case "diamond":
      return `<polygon points="${x},${y - r} ${x + r},${y} ${x},${y + r} ${x - r},${y}" fill="${color}"/>`;
    default:
      return `<circle cx="${x}" cy="${y}" r="${r}" fill="${color}"/>`;
  }
}

export function toSvg(list: DisplayList): string {
  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${list.width}" ` +
    `height="${list.height}" viewBox="0 0 ${list.width} ${list.height}">`,
  );
  for (const p of list.primitives) {
    switch (p.kind) {
      case "rect":
        parts.push(`<rect x="${p.x}" y="${p.y}" width="${p.w}" height="${p.h}" fill="${p.fill}"/>`);
        break;
      case "line": {
        const dash = p.dash ? ' stroke-dasharray="6 4"' : "";
        parts.push(
          `<line x1="${p.x1}" y1="${p.y1}" x2="${p.x2}" y2="${p.y2}" ` +
          `stroke="${p.color}" stroke-width="${p.width}"${dash}/>`,
        );
        break;
      }
      case "polyline": {
        const pts = p.points.map(([x, y]) => `${x},${y}`).join(" ");
        const dash = p.dash ? ' stroke-dasharray="6 4"' : "";
        parts.push(
          `<polyline points="${pts}" fill="none" stroke="${p.color}" ` +
          `stroke-width="${p.width}"${dash}/>`,
        );
        break;
      }
      case "marker":
        parts.push(markerPath(p));
        break;
      case "text": {
        const anchor = { start: "start", middle: "middle", end: "end" }[p.anchor];
        const transform = p.vertical ? ` transform="rotate(-90 ${p.x} ${p.y})"` : "";
        parts.push(
          `<text x="${p.x}" y="${p.y}" font-family="Helvetica, Arial, sans-serif" ` +
          `font-size="${p.size}" fill="${p.color}" text-anchor="${anchor}"${transform}>` +
          `${esc(p.text)}</text>`,
        );
        break;
      }
    }
  }
  parts.push("</svg>");
  return parts.join("\n") + "\n";
}
