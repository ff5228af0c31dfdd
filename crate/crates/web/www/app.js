import init, { orbit, analyze_curve, series_invariants, default_grid } from "./pkg/parafrac_web.js";

const $ = (id) => document.getElementById(id);

function numbers(text) {
  const t = text.trim();
  if (!t) return new Float64Array(0);
  const v = t.split(/[\s,]+/).map(Number);
  if (v.some(Number.isNaN)) throw new Error(`not a number list: ${text}`);
  return new Float64Array(v);
}

const coeffs = () => numbers($("coeffs").value);
const z0 = () => numbers($("z0").value);
const fmt = (x) => x.toPrecision(6);
const cplx = (re, im) => `${fmt(re)} ${im < 0 ? "−" : "+"} ${fmt(Math.abs(im))}i`;

function report(fn) {
  return () => {
    $("status").textContent = "";
    try {
      fn();
    } catch (e) {
      $("status").textContent = String(e.message ?? e);
    }
  };
}

function drawOrbit() {
  const pts = orbit(coeffs(), z0(), Number($("n").value));
  const eps = Number($("eps").value);
  const c = $("orbit");
  const g = c.getContext("2d");
  let [x0, x1, y0, y1] = [0, 0, 0, 0];
  for (let i = 0; i < pts.length; i += 2) {
    x0 = Math.min(x0, pts[i]); x1 = Math.max(x1, pts[i]);
    y0 = Math.min(y0, pts[i + 1]); y1 = Math.max(y1, pts[i + 1]);
  }
  const span = Math.max(x1 - x0, y1 - y0) + 4 * eps;
  const scale = c.width / span;
  const cx = (x0 + x1) / 2, cy = (y0 + y1) / 2;
  const px = (x) => c.width / 2 + (x - cx) * scale;
  const py = (y) => c.height / 2 - (y - cy) * scale;

  g.clearRect(0, 0, c.width, c.height);
  g.fillStyle = "rgba(40, 110, 200, 0.25)";
  g.beginPath();
  for (let i = 0; i < pts.length; i += 2) {
    g.moveTo(px(pts[i]) + eps * scale, py(pts[i + 1]));
    g.arc(px(pts[i]), py(pts[i + 1]), Math.max(eps * scale, 0.5), 0, 2 * Math.PI);
  }
  g.fill();
  g.fillStyle = "#123";
  for (let i = 0; i < pts.length; i += 2) g.fillRect(px(pts[i]) - 1, py(pts[i + 1]) - 1, 2, 2);
  g.strokeStyle = "#c33";
  g.beginPath();
  g.arc(px(0), py(0), 3, 0, 2 * Math.PI);
  g.stroke();
}

function drawCurve(eps, area) {
  const c = $("curve");
  const g = c.getContext("2d");
  const lx = Array.from(eps, Math.log10), ly = Array.from(area, Math.log10);
  const [ax, bx] = [Math.min(...lx), Math.max(...lx)];
  const [ay, by] = [Math.min(...ly), Math.max(...ly)];
  const m = 40;
  const px = (x) => m + (x - ax) / (bx - ax) * (c.width - 2 * m);
  const py = (y) => c.height - m - (y - ay) / (by - ay) * (c.height - 2 * m);
  g.clearRect(0, 0, c.width, c.height);
  g.strokeStyle = "#999";
  g.strokeRect(m, m, c.width - 2 * m, c.height - 2 * m);
  g.fillStyle = "#333";
  g.fillText(`log₁₀ ε  [${ax.toFixed(2)}, ${bx.toFixed(2)}]`, m, c.height - 12);
  g.fillText(`log₁₀ A(ε)  [${ay.toFixed(2)}, ${by.toFixed(2)}]`, m, 24);
  g.fillStyle = "#2866c8";
  lx.forEach((x, i) => g.fillRect(px(x) - 2, py(ly[i]) - 2, 4, 4));
}

function table(rows) {
  $("invariants").innerHTML =
    "<tr><th></th><th>fit</th><th>series</th></tr>" +
    rows.map(([name, a, b]) => `<tr><td>${name}</td><td>${a}</td><td>${b}</td></tr>`).join("");
}

function runAnalysis() {
  let lo = Number($("emin").value), hi = Number($("emax").value);
  if (!$("emin").value || !$("emax").value) {
    [lo, hi] = default_grid(coeffs());
    $("emin").value = lo.toExponential(3);
    $("emax").value = hi.toExponential(3);
  }
  const a = analyze_curve(coeffs(), z0(), lo, hi, Number($("count").value));
  drawCurve(a.eps(), a.area());
  const [dim, k, a1r, a1i, ar, ai] = a.invariants();
  const [sk, s1r, s1i, sr, si] = a.series();
  table([
    ["dim_B", fmt(dim), fmt(1 - 1 / (sk + 1))],
    ["k", k, sk],
    ["a₁", cplx(a1r, a1i), cplx(s1r, s1i)],
    ["a", cplx(ar, ai), cplx(sr, si)],
  ]);
  $("status").textContent = a.warnings();
}

function showSeries() {
  const [k, a1r, a1i, ar, ai] = series_invariants(coeffs());
  table([
    ["k", "", k],
    ["a₁", "", cplx(a1r, a1i)],
    ["a", "", cplx(ar, ai)],
  ]);
}

await init();
$("draw").onclick = report(drawOrbit);
$("analyze").onclick = report(runAnalysis);
$("series").onclick = report(showSeries);
$("coeffs").onchange = () => { $("emin").value = ""; $("emax").value = ""; };
report(drawOrbit)();
