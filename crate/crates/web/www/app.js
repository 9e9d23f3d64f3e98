import init, { null_band_view, cluster_view, wavelet_view } from "./pkg/droughtscan_web.js";

const SVG = "http://www.w3.org/2000/svg";
const COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2"];
const PAD = { left: 55, right: 15, top: 15, bottom: 30 };

function el(name, attrs, parent) {
  const node = document.createElementNS(SVG, name);
  for (const [k, v] of Object.entries(attrs)) node.setAttribute(k, v);
  if (parent) parent.appendChild(node);
  return node;
}

// Returns scale functions for the plot area of `svg` and draws the axes.
function frame(svg, xs, ys, opts = {}) {
  svg.replaceChildren();
  const w = +svg.getAttribute("width");
  const h = +svg.getAttribute("height");
  const tx = opts.logX ? Math.log10 : (v) => v;
  const x0 = Math.min(...xs.map(tx)), x1 = Math.max(...xs.map(tx));
  let y0 = Math.min(...ys), y1 = Math.max(...ys);
  if (y1 === y0) y1 = y0 + 1;
  const sx = (v) => PAD.left + ((tx(v) - x0) / (x1 - x0 || 1)) * (w - PAD.left - PAD.right);
  const sy = (v) => h - PAD.bottom - ((v - y0) / (y1 - y0)) * (h - PAD.top - PAD.bottom);
  el("rect", { x: PAD.left, y: PAD.top, width: w - PAD.left - PAD.right, height: h - PAD.top - PAD.bottom,
    fill: "none", stroke: "#999" }, svg);
  for (let i = 0; i <= 4; i++) {
    const yv = y0 + ((y1 - y0) * i) / 4;
    el("text", { x: PAD.left - 6, y: sy(yv) + 4, "text-anchor": "end", "font-size": 11 }, svg).textContent =
      Math.abs(yv) >= 100 ? yv.toFixed(0) : yv.toFixed(1);
    const xv = opts.logX ? 10 ** (x0 + ((x1 - x0) * i) / 4) : x0 + ((x1 - x0) * i) / 4;
    el("text", { x: sx(xv), y: h - 10, "text-anchor": "middle", "font-size": 11 }, svg).textContent =
      xv >= 100 ? xv.toFixed(0) : xv.toFixed(1);
  }
  return { sx, sy };
}

function line(svg, pts, color, dashed) {
  el("polyline", {
    points: pts.map(([x, y]) => `${x.toFixed(1)},${y.toFixed(1)}`).join(" "),
    fill: "none", stroke: color, "stroke-width": 1.5, ...(dashed ? { "stroke-dasharray": "5 4" } : {}),
  }, svg);
}

// Wires range inputs to their <output> and calls `draw` on every change.
function controls(ids, draw) {
  for (const id of ids) {
    const input = document.getElementById(id);
    const out = input.parentElement.querySelector("output");
    const sync = () => { if (out) out.textContent = input.value; draw(); };
    input.addEventListener("input", sync);
    if (out) out.textContent = input.value;
  }
  draw();
}

const num = (id) => +document.getElementById(id).value;

function drawBand() {
  const r = JSON.parse(null_band_view(num("band-cells"), num("band-k"), num("band-reps"), num("band-seed")));
  const note = document.getElementById("band-note");
  if (r.error) { note.textContent = r.error; return; }
  const svg = document.getElementById("band-plot");
  const { sx, sy } = frame(svg, r.years, [...r.lower, ...r.upper, ...r.mean]);
  line(svg, r.years.map((y, i) => [sx(y), sy(r.upper[i])]), COLORS[1], true);
  line(svg, r.years.map((y, i) => [sx(y), sy(r.lower[i])]), COLORS[0], true);
  line(svg, r.years.map((y, i) => [sx(y), sy(r.mean[i])]), "#555", false);
  note.textContent = `Dashed: 5th and 95th percentile of simulated annual counts. Solid: replicate mean ` +
    `(expected ${r.expected.toFixed(1)}).`;
}

function drawClusters() {
  const r = JSON.parse(cluster_view(num("cl-cells"), num("cl-k"), document.getElementById("cl-std").checked,
    num("cl-depth"), num("cl-seed")));
  const note = document.getElementById("cl-note");
  if (r.error) { note.textContent = r.error; return; }
  const svg = document.getElementById("cl-plot");
  const { sx, sy } = frame(svg, r.points.map((p) => p[0]), r.points.map((p) => p[1]));
  for (const [t, v, c] of r.points) {
    el("circle", { cx: sx(t), cy: sy(v), r: 2.5, fill: COLORS[c % COLORS.length], "fill-opacity": 0.7 }, svg);
  }
  for (const [t, v] of r.centroids) {
    el("circle", { cx: sx(t), cy: sy(v), r: 6, fill: "none", stroke: "#000", "stroke-width": 2 }, svg);
  }
  const sil = r.silhouette === null ? "n/a" : r.silhouette.toFixed(3);
  note.textContent = `k = ${r.k}, mean silhouette ${sil}. Annual counts inside their null band in ` +
    `${(100 * r.inside_band).toFixed(0)}% of years; sustained exceedance from ${r.onset ?? "never"}.`;
}

function drawWavelet() {
  const r = JSON.parse(wavelet_view(num("wv-period"), num("wv-noise"), num("wv-seed")));
  const note = document.getElementById("wv-note");
  if (r.error) { note.textContent = r.error; return; }
  const svg = document.getElementById("wv-plot");
  const { sx, sy } = frame(svg, r.periods, [...r.global, ...r.significance], { logX: true });
  line(svg, r.periods.map((p, i) => [sx(p), sy(r.global[i])]), COLORS[0], false);
  line(svg, r.periods.map((p, i) => [sx(p), sy(r.significance[i])]), COLORS[1], true);
  note.textContent = r.significant
    ? `Dominant significant period: ${r.dominant.toFixed(2)} years.`
    : "No period exceeds the white-noise 95% level.";
}

await init();
controls(["band-cells", "band-k", "band-reps", "band-seed"], drawBand);
controls(["cl-cells", "cl-k", "cl-depth", "cl-seed", "cl-std"], drawClusters);
controls(["wv-period", "wv-noise", "wv-seed"], drawWavelet);
