import init, { irs_phase_pattern, rayleigh_distance_m, correlation_map, run_trial } from "./pkg/nfirs_demo.js";

const $ = (id) => document.getElementById(id);
const num = (id) => parseFloat($(id).value);

// blue -> white -> red for a value in [0, 1]
function diverging(t) {
  const c = (a, b) => Math.round(a + (b - a) * Math.abs(2 * t - 1));
  return t < 0.5 ? [c(255, 40), c(255, 80), 255] : [255, c(255, 70), c(255, 40)];
}

function magma(t) {
  const v = Math.max(0, Math.min(1, t));
  return [Math.round(255 * Math.sqrt(v)), Math.round(255 * v * v), Math.round(120 + 100 * v - 150 * v * v)];
}

function paint(canvas, values, rows, cols, color) {
  const ctx = canvas.getContext("2d");
  const img = ctx.createImageData(cols, rows);
  values.forEach((v, i) => {
    const [r, g, b] = color(v);
    img.data.set([r, g, b, 255], 4 * i);
  });
  const tmp = new OffscreenCanvas(cols, rows);
  tmp.getContext("2d").putImageData(img, 0, 0);
  ctx.imageSmoothingEnabled = false;
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  ctx.drawImage(tmp, 0, 0, canvas.width, canvas.height);
}

function phasePattern() {
  const ny = Math.max(1, num("pp-ny") | 0);
  const nz = Math.max(1, num("pp-nz") | 0);
  const d = num("pp-dist");
  $("pp-dist-val").textContent = d.toFixed(1);
  const phases = irs_phase_pattern(num("pp-theta"), num("pp-phi"), d, ny, nz);
  // row 0 of the image is the top IRS row
  const flipped = [];
  for (let r = nz - 1; r >= 0; r--) {
    for (let c = 0; c < ny; c++) flipped.push((phases[r * ny + c] + Math.PI) / (2 * Math.PI));
  }
  paint($("pp-canvas"), flipped, nz, ny, diverging);
  const rd = rayleigh_distance_m(ny, nz);
  $("pp-info").textContent = `Rayleigh distance ${rd.toFixed(2)} m: the scatterer is in the ${d < rd ? "near" : "far"} field.`;
}

function correlation() {
  const grid = 90;
  const assumed = num("cm-assumed");
  $("cm-assumed-val").textContent = assumed.toFixed(1);
  const map = correlation_map(num("cm-theta"), num("cm-phi"), num("cm-dist"), assumed, 8, 8, grid);
  let best = 0;
  let at = 0;
  map.forEach((v, i) => { if (v > best) { best = v; at = i; } });
  paint($("cm-canvas"), map, grid, grid, magma);
  const th = (180 * (Math.floor(at / grid) + 0.5)) / grid;
  const ph = (180 * ((at % grid) + 0.5)) / grid - 90;
  $("cm-info").textContent = `peak ${best.toFixed(3)} at elevation ${th.toFixed(1)}, azimuth ${ph.toFixed(1)} deg.`;
}

function fmt(x, d = 3) {
  return Number.isFinite(x) ? x.toFixed(d) : String(x);
}

function trial() {
  $("tr-summary").textContent = "running...";
  setTimeout(() => {
    const t0 = performance.now();
    const res = JSON.parse(run_trial(num("tr-snr"), num("tr-paths") | 0, BigInt(num("tr-seed") | 0), num("tr-lo"), num("tr-hi")));
    const ms = (performance.now() - t0).toFixed(0);
    if (res.error && res.estimate.length === 0) {
      $("tr-summary").textContent = `failed: ${res.error} (${ms} ms)`;
      $("tr-table").innerHTML = "";
      return;
    }
    const crlb = res.channel_crlb_db == null ? "n/a" : fmt(res.channel_crlb_db, 2);
    $("tr-summary").textContent =
      `channel NMSE ${fmt(res.channel_nmse_db, 2)} dB (bound ${crlb} dB), ${ms} ms`;
    const cols = ["theta_deg", "phi_deg", "psi_deg", "distance_m", "gain_re", "gain_im"];
    let html = "<table><tr><th>path</th><th></th>" + cols.map((c) => `<th>${c}</th>`).join("") + "</tr>";
    res.truth.forEach((p, i) => {
      html += `<tr><td>${i + 1}</td><td>true</td>` + cols.map((c) => `<td>${fmt(p[c])}</td>`).join("") + "</tr>";
      const e = res.estimate[i];
      html += "<tr><td></td><td>est.</td>" + cols.map((c) => `<td>${fmt(e[c])}</td>`).join("") + "</tr>";
    });
    $("tr-table").innerHTML = html + "</table>";
  }, 10);
}

await init();
for (const id of ["pp-theta", "pp-phi", "pp-dist", "pp-ny", "pp-nz"]) $(id).addEventListener("input", phasePattern);
for (const id of ["cm-theta", "cm-phi", "cm-dist", "cm-assumed"]) $(id).addEventListener("input", correlation);
$("tr-run").addEventListener("click", trial);
phasePattern();
correlation();
