import init, { presets, filter_response, filter_markers, Demo } from "./pkg/emg_wasm.js";

const $ = (sel, root = document) => root.querySelector(sel);

function pairs(flat) {
  const out = [];
  for (let i = 0; i + 1 < flat.length; i += 2) out.push([flat[i], flat[i + 1]]);
  return out;
}

// Line plot with optional shaded x-intervals.
function plot(canvas, series, { xlabel, ylabel, ymin, ymax, bands = [] }) {
  const ctx = canvas.getContext("2d");
  const W = canvas.width, H = canvas.height, L = 60, R = 10, T = 10, B = 34;
  ctx.clearRect(0, 0, W, H);
  const xs = series.flatMap(s => s.points.map(p => p[0]));
  const ys = series.flatMap(s => s.points.map(p => p[1]));
  const x0 = Math.min(...xs), x1 = Math.max(...xs);
  const y0 = ymin ?? Math.min(...ys), y1 = ymax ?? Math.max(...ys);
  const X = x => L + (x - x0) / (x1 - x0 || 1) * (W - L - R);
  const Y = y => T + (1 - (Math.min(Math.max(y, y0), y1) - y0) / (y1 - y0 || 1)) * (H - T - B);

  ctx.fillStyle = "#e4e4e4";
  for (const [a, b] of bands) ctx.fillRect(X(a), T, X(b) - X(a), H - T - B);

  ctx.strokeStyle = "#000"; ctx.fillStyle = "#000"; ctx.font = "11px sans-serif";
  ctx.beginPath(); ctx.moveTo(L, T); ctx.lineTo(L, H - B); ctx.lineTo(W - R, H - B); ctx.stroke();
  ctx.textAlign = "center";
  for (let i = 0; i <= 8; i++) {
    const x = x0 + (x1 - x0) * i / 8;
    ctx.fillText(x.toFixed(x1 - x0 < 20 ? 1 : 0), X(x), H - B + 14);
  }
  ctx.fillText(xlabel, (L + W - R) / 2, H - 4);
  ctx.textAlign = "right";
  for (let i = 0; i <= 4; i++) {
    const y = y0 + (y1 - y0) * i / 4;
    ctx.fillText(Math.abs(y) >= 100 ? y.toFixed(0) : y.toPrecision(3), L - 4, Y(y) + 4);
  }
  ctx.save(); ctx.translate(12, (T + H - B) / 2); ctx.rotate(-Math.PI / 2);
  ctx.textAlign = "center"; ctx.fillText(ylabel, 0, 0); ctx.restore();

  for (const s of series) {
    ctx.strokeStyle = s.color; ctx.lineWidth = 1.2; ctx.beginPath();
    s.points.forEach(([x, y], i) => (i ? ctx.lineTo(X(x), Y(y)) : ctx.moveTo(X(x), Y(y))));
    ctx.stroke();
  }
}

function guard(section, fn) {
  const err = $(".error", section);
  try {
    err.textContent = "";
    fn();
  } catch (e) {
    err.textContent = String(e.message ?? e);
  }
}

function filterView() {
  const section = $("#filter");
  const form = $("form", section);
  const draw = () => guard(section, () => {
    const f = Object.fromEntries(new FormData(form));
    const args = [f.device, +f.low, +f.high, +f.order, +f.q];
    const resp = pairs(filter_response(...args, 1024));
    plot($("canvas", section), [{ points: resp, color: "#1f4e9c" }],
      { xlabel: "Frequency (Hz)", ylabel: "Magnitude (dB)", ymin: -60, ymax: 3 });
    const { bandpass, points } = JSON.parse(filter_markers(...args));
    $(".marks", section).innerHTML = "<tr><th>Point</th><th>Hz</th><th>dB</th></tr>" +
      (bandpass ? "" : "<tr><td colspan=3>bandpass skipped: high corner at or above Nyquist</td></tr>") +
      points.map(m => `<tr><td>${m.what}</td><td>${m.hz}</td><td>${m.db.toFixed(2)}</td></tr>`).join("");
  });
  form.addEventListener("input", draw);
  draw();
}

let demo = null;
const COLORS = ["#1f4e9c", "#c0392b", "#2e8b57", "#8e44ad", "#d35400", "#16a085", "#7f8c8d", "#2c3e50"];

function sessionView(onReady) {
  const section = $("#session");
  const form = $("form", section);
  const select = form.elements.preset;
  for (const p of presets()) select.add(new Option(p, p, false, p === "healthy_strong"));
  form.elements.gain.addEventListener("input", () => {
    form.elements.gain_out.value = (+form.elements.gain.value).toFixed(2);
  });
  const run = () => guard(section, () => {
    const f = Object.fromEntries(new FormData(form));
    demo?.free();
    demo = null;
    demo = new Demo(f.preset, f.device, BigInt(f.seed), +f.gain);
    const bands = JSON.parse(demo.intervals()).filter(iv => iv.label !== "relax").map(iv => [iv.start, iv.end]);
    const holder = $(".envelopes", section);
    holder.innerHTML = "";
    demo.channel_names().forEach((name, c) => {
      const canvas = document.createElement("canvas");
      canvas.width = 900; canvas.height = 120;
      holder.append(canvas);
      plot(canvas, [{ points: pairs(demo.envelope(c)), color: COLORS[c % COLORS.length] }],
        { xlabel: "Time (s)", ylabel: name, ymin: 0, bands });
    });
    const r = JSON.parse(demo.ratios());
    const names = demo.channel_names();
    $(".ratios", section).innerHTML =
      `<tr><th>Movement</th>${names.map(n => `<th>${n}</th>`).join("")}<th>Mean</th></tr>` +
      Object.entries(r.conditions).map(([label, v]) =>
        `<tr><td>${label}</td>${r.per_channel[label].map(x => `<td>${x.toFixed(2)}</td>`).join("")}<td>${v.toFixed(2)}</td></tr>`
      ).join("");
    onReady();
  });
  form.addEventListener("submit", e => { e.preventDefault(); run(); });
  run();
}

function featureView() {
  const section = $("#features");
  const form = $("form", section);
  const draw = () => guard(section, () => {
    if (!demo) return;
    const f = Object.fromEntries(new FormData(form));
    const args = [+f.channel, +f.feature];
    const trace = pairs(demo.feature_trace(...args, +f.length, +f.offset));
    const bands = JSON.parse(demo.intervals()).filter(iv => iv.label !== "relax").map(iv => [iv.start, iv.end]);
    plot($("canvas", section), [{ points: trace, color: "#1f4e9c" }],
      { xlabel: "Window end (s)", ylabel: demo.feature_name(...args), bands });
    const active = demo.active_window_fraction(+f.length, +f.offset);
    $(".note", section).textContent =
      `${trace.length} windows, ${(100 * active).toFixed(1)}% labelled with a movement (label taken at the window end).`;
  });
  const refreshChannels = () => {
    const sel = form.elements.channel;
    const keep = sel.value;
    sel.innerHTML = "";
    demo.channel_names().forEach((n, i) => sel.add(new Option(n, i)));
    if (keep && +keep < sel.options.length) sel.value = keep;
    draw();
  };
  form.addEventListener("input", draw);
  return refreshChannels;
}

await init();
filterView();
const refresh = featureView();
sessionView(refresh);
