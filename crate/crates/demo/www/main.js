import init, { beamView, targetTrack, guardedFlight } from "./pkg/lae_isac_demo.js";

const $ = (id) => document.getElementById(id);
const COLORS = ["#1f77b4", "#ff7f0e", "#2ca02c", "#9467bd", "#8c564b", "#e377c2"];

function bindValue(id, fmt = (v) => v) {
  const el = $(id);
  const out = $(id + "-v");
  const show = () => { if (out) out.textContent = fmt(el.value); };
  el.addEventListener("input", show);
  show();
  return el;
}

// maps data bounds onto a canvas with a margin, keeping the aspect ratio when asked
function frame(ctx, xs, ys, pad = 30, equal = false) {
  const { width, height } = ctx.canvas;
  let [x0, x1] = [Math.min(...xs), Math.max(...xs)];
  let [y0, y1] = [Math.min(...ys), Math.max(...ys)];
  if (x1 === x0) x1 = x0 + 1;
  if (y1 === y0) y1 = y0 + 1;
  let sx = (width - 2 * pad) / (x1 - x0);
  let sy = (height - 2 * pad) / (y1 - y0);
  if (equal) sx = sy = Math.min(sx, sy);
  return {
    x: (v) => pad + (v - x0) * sx,
    y: (v) => height - pad - (v - y0) * sy,
  };
}

function line(ctx, pts, color, width = 1.5) {
  ctx.strokeStyle = color;
  ctx.lineWidth = width;
  ctx.beginPath();
  pts.forEach(([x, y], i) => (i ? ctx.lineTo(x, y) : ctx.moveTo(x, y)));
  ctx.stroke();
}

function fail(out, e) {
  out.innerHTML = `<span class="err">${e}</span>`;
}

function drawBeam() {
  const out = $("bv-out");
  const ctx = $("bv-canvas").getContext("2d");
  ctx.clearRect(0, 0, ctx.canvas.width, ctx.canvas.height);
  let v;
  try {
    v = JSON.parse(beamView(+$("bv-n").value, +$("bv-ux").value, 100, 80, +$("bv-tx").value, 100, 70, $("bv-share").value / 100));
  } catch (e) {
    return fail(out, e);
  }
  const f = frame(ctx, v.angles_deg, [-40, 0]);
  ctx.fillStyle = "#666";
  ctx.font = "11px sans-serif";
  for (const a of [0, 45, 90, 135, 180]) ctx.fillText(`${a}°`, f.x(a) - 8, ctx.canvas.height - 12);
  for (const [a, c, name] of [[v.target_aod_deg, "#d62728", "target"], [v.uav_aod_deg, "#2ca02c", "UAV"]]) {
    line(ctx, [[f.x(a), f.y(0)], [f.x(a), f.y(-40)]], c, 1);
    ctx.fillStyle = c;
    ctx.fillText(name, f.x(a) + 3, f.y(-2));
  }
  line(ctx, v.angles_deg.map((a, i) => [f.x(a), f.y(v.pattern_db[i])]), "#1f77b4", 2);
  out.textContent = `sensing SNR ${v.snr_db.toFixed(1)} dB   sum-rate ${v.sum_rate.toExponential(3)} bit/s/Hz   ` +
    `target AoD ${v.target_aod_deg.toFixed(1)}°   UAV AoD ${v.uav_aod_deg.toFixed(1)}°`;
}

function drawTrack() {
  const out = $("tt-out");
  const ctx = $("tt-canvas").getContext("2d");
  ctx.clearRect(0, 0, ctx.canvas.width, ctx.canvas.height);
  let t;
  try {
    t = JSON.parse(targetTrack(+$("tt-seed").value >>> 0, 400, $("tt-mu").value / 100, 10, +$("tt-sigma").value));
  } catch (e) {
    return fail(out, e);
  }
  const f = frame(ctx, t.points.map((p) => p[0]), t.points.map((p) => p[1]), 20, true);
  line(ctx, t.points.map((p) => [f.x(p[0]), f.y(p[1])]), "#d62728");
  const a = t.azimuth_deg;
  const mean = a.reduce((s, v) => s + v, 0) / a.length;
  out.textContent = `${a.length - 1} steps   mean heading ${mean.toFixed(2)}°   final altitude ${t.points.at(-1)[2].toFixed(1)} m`;
}

function drawFlight() {
  const out = $("gf-out");
  const ctx = $("gf-canvas").getContext("2d");
  ctx.clearRect(0, 0, ctx.canvas.width, ctx.canvas.height);
  let fl;
  try {
    fl = JSON.parse(guardedFlight(+$("gf-seed").value >>> 0, +$("gf-m").value, $("gf-guard").checked));
  } catch (e) {
    return fail(out, e);
  }
  const pts = fl.paths.flat().concat(fl.goals, fl.target);
  const f = frame(ctx, pts.map((p) => p[0]), pts.map((p) => p[1]), 30, true);
  const scale = Math.abs(f.x(fl.arrival_tol) - f.x(0));
  fl.paths.forEach((path, k) => {
    const c = COLORS[k % COLORS.length];
    line(ctx, path.map(([x, y]) => [f.x(x), f.y(y)]), c);
    const [gx, gy] = fl.goals[k];
    ctx.strokeStyle = c;
    ctx.setLineDash(fl.mission_ok[k] ? [] : [4, 3]);
    ctx.beginPath();
    ctx.arc(f.x(gx), f.y(gy), scale, 0, 2 * Math.PI);
    ctx.stroke();
    ctx.setLineDash([]);
  });
  line(ctx, fl.target.map(([x, y]) => [f.x(x), f.y(y)]), "#999", 1);
  const ok = fl.mission_ok.filter(Boolean).length;
  out.textContent = `${ok}/${fl.mission_ok.length} UAVs reached their goal circle (dashed circle: missed; grey: target)`;
}

async function main() {
  try {
    await init();
  } catch (e) {
    $("status").innerHTML = `<span class="err">Could not load the WebAssembly module: ${e}</span>`;
    return;
  }
  $("status").textContent = "";
  bindValue("bv-n");
  bindValue("bv-share", (v) => `${v}%`);
  bindValue("bv-tx", (v) => `${v} m`);
  bindValue("bv-ux", (v) => `${v} m`);
  bindValue("tt-mu", (v) => (v / 100).toFixed(2));
  bindValue("tt-sigma");
  bindValue("gf-m");
  for (const id of ["bv-n", "bv-share", "bv-tx", "bv-ux"]) $(id).addEventListener("input", drawBeam);
  for (const id of ["tt-mu", "tt-sigma", "tt-seed"]) $(id).addEventListener("input", drawTrack);
  for (const id of ["gf-m", "gf-guard", "gf-seed"]) $(id).addEventListener("input", drawFlight);
  drawBeam();
  drawTrack();
  drawFlight();
}

main();
