import init, { observe, measurement_sequence, norm_bound } from "./pkg/qobserver_web.js";

const COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e"];
const $ = (id) => document.getElementById(id);
const num = (id) => parseFloat($(id).value);

function plot(canvas, xs, series, opts = {}) {
  const dpr = window.devicePixelRatio || 1;
  const w = canvas.clientWidth, h = canvas.clientHeight;
  canvas.width = w * dpr;
  canvas.height = h * dpr;
  const ctx = canvas.getContext("2d");
  ctx.scale(dpr, dpr);
  ctx.clearRect(0, 0, w, h);
  const pad = { l: 52, r: 10, t: 10, b: 24 };
  let lo = Infinity, hi = -Infinity;
  for (const s of series) for (const y of s.ys) if (isFinite(y)) { lo = Math.min(lo, y); hi = Math.max(hi, y); }
  if (opts.ymax !== undefined) hi = Math.min(hi, opts.ymax);
  if (opts.ymin !== undefined) lo = Math.max(lo, opts.ymin);
  if (hi - lo < 1e-9) { hi += 0.5; lo -= 0.5; }
  const x0 = xs[0], x1 = xs[xs.length - 1];
  const X = (x) => pad.l + (x - x0) / (x1 - x0) * (w - pad.l - pad.r);
  const Y = (y) => h - pad.b - (y - lo) / (hi - lo) * (h - pad.t - pad.b);

  ctx.strokeStyle = "#999";
  ctx.fillStyle = "#555";
  ctx.font = "11px system-ui";
  ctx.strokeRect(pad.l, pad.t, w - pad.l - pad.r, h - pad.t - pad.b);
  for (let i = 0; i <= 4; i++) {
    const y = lo + (hi - lo) * i / 4;
    ctx.fillText(y.toPrecision(3), 4, Y(y) + 4);
    const x = x0 + (x1 - x0) * i / 4;
    ctx.fillText(x.toPrecision(3), X(x) - 10, h - 6);
  }
  for (const s of series) {
    ctx.strokeStyle = s.color;
    ctx.lineWidth = 1.5;
    ctx.setLineDash(s.dash || []);
    ctx.beginPath();
    xs.forEach((x, i) => {
      const y = Math.min(Math.max(s.ys[i], lo), hi);
      i ? ctx.lineTo(X(x), Y(y)) : ctx.moveTo(X(x), Y(y));
    });
    ctx.stroke();
  }
  ctx.setLineDash([]);
}

function legend(el, names) {
  el.innerHTML = names.map((n, i) => `<span><i style="background:${COLORS[i % 4]}"></i>${n}</span>`).join("");
}

function rows(rs) {
  return rs[0].map((_, j) => rs.map((r) => r[j]));
}

function guard(info, f) {
  try {
    info.classList.remove("err");
    f();
  } catch (e) {
    info.classList.add("err");
    info.textContent = String(e.message || e);
  }
}

function runObserve() {
  const info = $("o-info");
  guard(info, () => {
    const t = num("o-tend");
    const quad = $("o-quad").value;
    const v = JSON.parse(observe(num("o-r11"), num("o-r12"), num("o-r22"), quad, t, Math.min(0.01, t / 1000)));
    const cols = rows(v.observer_row);
    const names = ["q_p", "p_p", "q_o", "p_o"].map((n) => `${quad}_o coefficient of ${n}`);
    legend($("o-legend1"), names);
    plot($("o-traj"), v.times, cols.map((ys, i) => ({ ys, color: COLORS[i] })));
    legend($("o-legend2"), ["time-averaged tracking error", "C / T"]);
    plot($("o-avg"), v.average_times, [
      { ys: v.average_error, color: COLORS[0] },
      { ys: v.error_bound, color: COLORS[1], dash: [4, 3] },
    ], { ymin: 0, ymax: 2 * Math.max(...v.average_error) });
    const spec = v.spectrum.map((z) => `${z.re.toFixed(3)}${z.im >= 0 ? "+" : ""}${z.im.toFixed(4)}i`).join(", ");
    info.textContent =
      `alpha = [${v.alpha.map((x) => x.toFixed(4)).join(", ")}]\n` +
      `observer condition residual = ${v.observer_condition.toExponential(2)}\n` +
      `realizability residual = ${v.realizability.toExponential(2)}\n` +
      `C = ${v.bound_constant.toFixed(4)}\nspectrum: ${spec}`;
  });
}

function runSequence() {
  const info = $("s-info");
  guard(info, () => {
    const t = num("s-tend");
    const v = JSON.parse(measurement_sequence(num("s-connect"), num("s-gap"), t, Math.min(0.01, t / 1000)));
    legend($("s-legend"), ["q_p", "p_p", "q_o", "p_o"].map((n) => `coefficient of ${n} (top: q_p, bottom: p_p)`));
    plot($("s-qp"), v.times, rows(v.q_p).map((ys, i) => ({ ys, color: COLORS[i] })));
    plot($("s-pp"), v.times, rows(v.p_p).map((ys, i) => ({ ys, color: COLORS[i] })));
    info.textContent = v.checks
      .map((c) => `${c.passed ? "PASS" : "FAIL"}  ${c.name}  ${c.value.toExponential(2)} ${c.comparison} ${c.threshold.toExponential(2)}`)
      .join("\n");
  });
}

function runNorm() {
  const info = $("n-info");
  guard(info, () => {
    const v = JSON.parse(norm_bound(num("n-r11"), num("n-r12"), num("n-r22"), num("n-tmax"), 400));
    plot($("n-plot"), v.times, [
      { ys: v.norm, color: COLORS[0] },
      { ys: v.times.map(() => v.bound), color: COLORS[1], dash: [4, 3] },
    ], { ymin: 0 });
    info.textContent = `max norm = ${v.worst.toFixed(6)}\nbound sqrt(kappa) = ${v.bound.toFixed(6)}`;
  });
}

await init();
$("o-run").onclick = runObserve;
$("s-run").onclick = runSequence;
$("n-run").onclick = runNorm;
runObserve();
runSequence();
runNorm();
