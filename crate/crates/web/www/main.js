import init, { switch_activation_curve, mac_load_sweep, w_election_histogram } from "./pkg/qnet_web.js";

const COLORS = ["#1b6ca8", "#d1495b", "#2e933c", "#edae49"];
const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

function rows(flat, width) {
  const out = [];
  for (let i = 0; i < flat.length; i += width) out.push(Array.from(flat.slice(i, i + width)));
  return out;
}

function legend(id, names) {
  $(id).innerHTML = names
    .map((n, i) => `<span style="color:${COLORS[i]}">■ ${n}</span>`)
    .join("");
}

function frame(ctx, w, h, pad, yMax, xLabel) {
  ctx.clearRect(0, 0, w, h);
  ctx.strokeStyle = "#999";
  ctx.fillStyle = "#444";
  ctx.beginPath();
  ctx.moveTo(pad, 10);
  ctx.lineTo(pad, h - pad);
  ctx.lineTo(w - 10, h - pad);
  ctx.stroke();
  ctx.font = "11px sans-serif";
  for (let k = 0; k <= 4; k++) {
    const y = h - pad - ((h - pad - 10) * k) / 4;
    ctx.fillText((yMax * k / 4).toFixed(3), 2, y + 4);
  }
  ctx.fillText(xLabel, w / 2, h - 8);
}

function linePlot(canvas, data, series, xLabel) {
  const ctx = canvas.getContext("2d");
  const { width: w, height: h } = canvas;
  const pad = 44;
  const xs = data.map((r) => r[0]);
  const xMin = Math.min(...xs), xMax = Math.max(...xs);
  const yMax = Math.max(1e-6, ...data.flatMap((r) => series.map((s) => r[s])));
  frame(ctx, w, h, pad, yMax, xLabel);
  const px = (x) => pad + ((w - pad - 10) * (x - xMin)) / (xMax - xMin || 1);
  const py = (y) => h - pad - ((h - pad - 10) * y) / yMax;
  series.forEach((s, i) => {
    ctx.strokeStyle = COLORS[i];
    ctx.lineWidth = 2;
    ctx.beginPath();
    data.forEach((r, j) => (j ? ctx.lineTo(px(r[0]), py(r[s])) : ctx.moveTo(px(r[0]), py(r[s]))));
    ctx.stroke();
  });
}

function barPlot(canvas, counts) {
  const ctx = canvas.getContext("2d");
  const { width: w, height: h } = canvas;
  const pad = 44;
  const total = counts.reduce((a, b) => a + b, 0);
  const yMax = Math.max(...counts);
  frame(ctx, w, h, pad, yMax, "node");
  const bw = (w - pad - 10) / counts.length;
  counts.forEach((c, i) => {
    const bh = ((h - pad - 10) * c) / yMax;
    ctx.fillStyle = COLORS[0];
    ctx.fillRect(pad + i * bw + 6, h - pad - bh, bw - 12, bh);
    ctx.fillStyle = "#444";
    ctx.fillText(`n${i}: ${(c / total).toFixed(3)}`, pad + i * bw + 8, h - pad + 14);
  });
  ctx.strokeStyle = COLORS[1];
  ctx.setLineDash([4, 4]);
  const y = h - pad - ((h - pad - 10) * (total / counts.length)) / yMax;
  ctx.beginPath();
  ctx.moveTo(pad, y);
  ctx.lineTo(w - 10, y);
  ctx.stroke();
  ctx.setLineDash([]);
}

function guarded(fn) {
  return () => {
    $("status").textContent = "running…";
    setTimeout(() => {
      const t = performance.now();
      try {
        fn();
        $("status").textContent = `done in ${(performance.now() - t).toFixed(0)} ms`;
      } catch (e) {
        $("status").textContent = `error: ${e}`;
      }
    }, 0);
  };
}

const runSwitch = guarded(() => {
  const data = rows(switch_activation_curve(num("sw-steps"), num("sw-grid")), 4);
  legend("sw-legend", ["direct", "serial", "switch"]);
  linePlot($("sw-canvas"), data, [1, 2, 3], "depolarizing p");
});

const runMac = guarded(() => {
  const flat = mac_load_sweep(num("mac-n"), BigInt(num("mac-slots")), 10, num("mac-p"), BigInt(num("mac-seed")));
  legend("mac-legend", ["W-state throughput", "contention throughput", "contention collisions"]);
  linePlot($("mac-canvas"), rows(flat, 4), [1, 2, 3], "offered load");
});

const runW = guarded(() => {
  const counts = Array.from(w_election_histogram(num("w-n"), num("w-rounds"), BigInt(num("w-seed"))));
  barPlot($("w-canvas"), counts);
});

await init();
$("status").textContent = "ready";
$("sw-run").onclick = runSwitch;
$("mac-run").onclick = runMac;
$("w-run").onclick = runW;
runSwitch();
