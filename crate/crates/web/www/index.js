import init, { Explorer, concentrationJson, readabilityJson } from "./pkg/consistox_web.js";

const $ = (id) => document.getElementById(id);
let explorer = null;
let points = [];

function show(el, f) {
  try {
    el.classList.remove("err");
    el.textContent = f();
  } catch (e) {
    el.classList.add("err");
    el.textContent = String(e.message ?? e);
  }
}

function axes(ctx, w, h, pad, xl, yl) {
  ctx.strokeStyle = "#333";
  ctx.strokeRect(pad, pad, w - 2 * pad, h - 2 * pad);
  ctx.fillStyle = "#333";
  ctx.fillText(xl, w / 2 - 20, h - 8);
  ctx.save();
  ctx.translate(12, h / 2 + 20);
  ctx.rotate(-Math.PI / 2);
  ctx.fillText(yl, 0, 0);
  ctx.restore();
}

function drawScatter() {
  const c = $("scatter");
  const ctx = c.getContext("2d");
  const pad = 30;
  const w = c.width, h = c.height;
  const sx = (x) => pad + x * (w - 2 * pad);
  const sy = (y) => h - pad - y * (h - 2 * pad);
  const mt = +$("median-t").value, gt = +$("gini-t").value;
  $("median-v").textContent = mt.toFixed(2);
  $("gini-v").textContent = gt.toFixed(2);
  ctx.clearRect(0, 0, w, h);
  ctx.fillStyle = "rgba(255, 200, 0, 0.25)";
  ctx.fillRect(sx(mt), sy(gt), sx(1) - sx(mt), sy(0) - sy(gt));
  axes(ctx, w, h, pad, "median", "Gini");
  for (const p of points) {
    ctx.fillStyle = p.planted ? "#c00" : "rgba(0, 0, 160, 0.5)";
    ctx.beginPath();
    ctx.arc(sx(p.median), sy(p.gini), 3, 0, 2 * Math.PI);
    ctx.fill();
  }
  if (explorer) {
    const s = JSON.parse(explorer.selectJson(mt, gt));
    $("selection").textContent =
      `selected ${s.focus.length}: ${s.true_positives} planted, ${s.false_positives} others; ${s.missed} planted missed`;
  }
}

function generate() {
  show($("selection"), () => {
    explorer?.free();
    explorer = null;
    explorer = new Explorer(+$("n-focus").value, +$("n-random").value, +$("seed").value, $("dimension").value);
    points = JSON.parse(explorer.pointsJson());
    return "";
  });
  drawScatter();
}

function drawLorenz() {
  const c = $("lorenz");
  const ctx = c.getContext("2d");
  const pad = 30, w = c.width, h = c.height;
  ctx.clearRect(0, 0, w, h);
  axes(ctx, w, h, pad, "population", "value share");
  show($("gini-out"), () => {
    const r = JSON.parse(concentrationJson($("values").value));
    const sx = (x) => pad + x * (w - 2 * pad);
    const sy = (y) => h - pad - y * (h - 2 * pad);
    ctx.strokeStyle = "#999";
    ctx.beginPath();
    ctx.moveTo(sx(0), sy(0));
    ctx.lineTo(sx(1), sy(1));
    ctx.stroke();
    ctx.strokeStyle = "#c00";
    ctx.beginPath();
    r.lorenz.forEach(([x, y], i) => (i ? ctx.lineTo(sx(x), sy(y)) : ctx.moveTo(sx(x), sy(y))));
    ctx.stroke();
    return `n=${r.n}  median=${r.median.toFixed(4)}  Gini=${r.gini.toFixed(4)}`;
  });
}

function readability() {
  show($("read-out"), () => {
    const m = JSON.parse(readabilityJson($("text").value));
    return [
      `sentences ${m.sentences}, words ${m.words}, unique ${m.unique_words}, syllables ${m.syllables}`,
      `richness ${m.richness.toFixed(4)}`,
      `Flesch reading ease ${m.flesch.toFixed(2)}`,
      `automated readability index ${m.ari.toFixed(2)}`,
    ].join("\n");
  });
}

await init();
$("generate").addEventListener("click", generate);
$("median-t").addEventListener("input", drawScatter);
$("gini-t").addEventListener("input", drawScatter);
$("values").addEventListener("input", drawLorenz);
$("text").addEventListener("input", readability);
generate();
drawLorenz();
readability();
