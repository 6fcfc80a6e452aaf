/**
 * Pure SVG/HTML markup builders.
 *
 * Everything displayed is taken verbatim from service payload fields; no
 * indicator math happens here beyond mapping a value to a pixel offset.
 */

import type { Point } from "./layout.js";
import type { Assessment, Outcome, SummaryPayload, TaskRecord } from "./types.js";
import { resolveLayout } from "./layout.js";

export const ADT_COLOR = "#e6c229"; // yellow: truck start
export const MG_COLOR = "#d1495b"; // red: pursuer start
export const GOAL_COLOR = "#26a96c"; // green: goal

const VIEW = 400;

function sx(x: number): number {
  return Math.round(((x + 1) / 2) * (VIEW - 40) + 20);
}

function sy(y: number): number {
  return Math.round(((1 - y) / 2) * (VIEW - 40) + 20);
}

export function esc(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;").replace(/"/g, "&quot;");
}

export interface GraphView {
  svg: string;
  points: Point[];
}

export function renderTask(record: TaskRecord, adtAt?: number, mgAt?: number): GraphView {
  const net = record.doc.network;
  const task = record.doc.task;
  const points = resolveLayout(net.n, net.edges, net.layout, record.seed);
  const parts: string[] = [];
  parts.push(
    `<svg viewBox="0 0 ${VIEW} ${VIEW}" class="graph" role="img" aria-label="road network">`,
  );
  for (const [a, b] of net.edges) {
    parts.push(
      `<line x1="${sx(points[a].x)}" y1="${sy(points[a].y)}" x2="${sx(points[b].x)}" y2="${sy(points[b].y)}" stroke="#99a" stroke-width="2"/>`,
    );
  }
  const adtNode = adtAt ?? task.adt_start;
  const mgNode = mgAt ?? task.mg_start;
  for (let v = 0; v < net.n; v++) {
    let fill = "#dde";
    let r = 8;
    if (v === task.goal) {
      fill = GOAL_COLOR;
      r = 11;
    }
    parts.push(
      `<circle data-node="${v}" cx="${sx(points[v].x)}" cy="${sy(points[v].y)}" r="${r}" fill="${fill}" stroke="#334" stroke-width="1.5"/>`,
    );
  }
  // moving markers drawn above the plain nodes
  parts.push(
    `<circle data-marker="mg" cx="${sx(points[mgNode].x)}" cy="${sy(points[mgNode].y)}" r="10" fill="${MG_COLOR}" stroke="#400" stroke-width="2"/>`,
  );
  parts.push(
    `<circle data-marker="adt" cx="${sx(points[adtNode].x)}" cy="${sy(points[adtNode].y)}" r="10" fill="${ADT_COLOR}" stroke="#430" stroke-width="2"/>`,
  );
  for (let v = 0; v < net.n; v++) {
    parts.push(
      `<text x="${sx(points[v].x)}" y="${sy(points[v].y) - 12}" font-size="10" text-anchor="middle" fill="#223">${v}</text>`,
    );
  }
  parts.push("</svg>");
  return { svg: parts.join(""), points };
}

export function errorBanner(message: string): string {
  return `<div class="error-banner" role="alert">Could not display task: ${esc(message)}</div>`;
}

/** Horizontal gauge: value rendered at its fractional position of [lo, hi]. */
export function renderGauge(
  id: string,
  value: number,
  lo: number,
  hi: number,
  label: string,
  center?: number,
): string {
  const frac = Math.min(Math.max((value - lo) / (hi - lo), 0), 1);
  const pct = (frac * 100).toFixed(2);
  const centerMark =
    center === undefined
      ? ""
      : `<div class="gauge-center" style="left:${(((center - lo) / (hi - lo)) * 100).toFixed(2)}%"></div>`;
  return (
    `<div class="gauge" id="${id}" data-value="${value}">` +
    `<div class="gauge-track">${centerMark}<div class="gauge-needle" style="left:${pct}%"></div></div>` +
    `<div class="gauge-caption"><span class="gauge-number">${formatNumber(value)}</span> — ${esc(label)}</div>` +
    `</div>`
  );
}

export function formatNumber(v: number): string {
  return Number.isInteger(v) ? String(v) : v.toFixed(3);
}

export function renderHistogram(summary: SummaryPayload): string {
  const max = Math.max(...summary.counts, 1);
  const bars = summary.counts
    .map((c, i) => {
      const h = Math.round((c / max) * 60);
      return `<rect data-bin="${i}" x="${i * 8}" y="${60 - h}" width="7" height="${h}" fill="#5b8"/>`;
    })
    .join("");
  return (
    `<svg viewBox="0 0 ${summary.counts.length * 8} 64" class="histogram" role="img" aria-label="reward histogram">` +
    bars +
    `</svg>` +
    `<div class="hist-caption">n=${summary.n}, range [${formatNumber(summary.min)}, ${formatNumber(summary.max)}]</div>`
  );
}

export function renderAssessment(a: Assessment): string {
  const parts: string[] = ['<div class="assessment">'];
  parts.push(renderGauge("gauge-xo", a.x_o.x_o, -1, 1, a.x_o_label, 0));
  if (a.x_s) {
    parts.push(renderGauge("gauge-xs", a.x_s.x_s, 0, 2, a.x_s_label ?? "", 1));
  } else {
    parts.push('<div class="notice" id="xs-missing">solver-quality unavailable (no trusted reference)</div>');
  }
  parts.push(renderHistogram(a.candidate_summary));
  parts.push("</div>");
  return parts.join("");
}

export function outcomeText(outcome: Outcome): string {
  switch (outcome.kind) {
    case "delivered":
      return `Delivered. Reward ${formatNumber(outcome.reward ?? 0)}, score ${scoreDelta(outcome)}`;
    case "caught":
      return `Caught by the pursuer. Reward ${formatNumber(outcome.reward ?? 0)}, score ${scoreDelta(outcome)}`;
    case "timeout":
      return `Ran out of time. Score ${scoreDelta(outcome)}`;
    case "canceled":
      return `Run canceled. Score ${scoreDelta(outcome)}`;
    default:
      return `Outcome: ${outcome.kind}`;
  }
}

function scoreDelta(outcome: Outcome): string {
  const d = outcome.score_delta;
  return d >= 0 ? `+${formatNumber(d)}` : formatNumber(d);
}
