import init, { phi_curves, denoise_two_region, limit_traces } from "./pkg/tvphi_web.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

function plotCurves() {
  const n = 400;
  const v = phi_curves(num("c-q"), num("c-m"), num("c-t"), n);
  const ts = v.subarray(0, n);
  const curves = [[v.subarray(0, n), "#999"], [v.subarray(n, 2 * n), "#36c"], [v.subarray(2 * n), "#c33"]];
  const canvas = $("c-plot");
  const ctx = canvas.getContext("2d");
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  let ymax = 0;
  for (const [ys] of curves) for (const y of ys) ymax = Math.max(ymax, y);
  const tmax = ts[n - 1];
  for (const [ys, color] of curves) {
    ctx.strokeStyle = color;
    ctx.beginPath();
    for (let i = 0; i < n; i++) {
      const x = (ts[i] / tmax) * (canvas.width - 1);
      const y = canvas.height - 1 - (ys[i] / ymax) * (canvas.height - 1);
      i === 0 ? ctx.moveTo(x, y) : ctx.lineTo(x, y);
    }
    ctx.stroke();
  }
}

function draw(canvas, size, gray) {
  const ctx = canvas.getContext("2d");
  const img = ctx.createImageData(size, size);
  for (let i = 0; i < gray.length; i++) {
    img.data.set([gray[i], gray[i], gray[i], 255], 4 * i);
  }
  const tmp = new OffscreenCanvas(size, size);
  tmp.getContext("2d").putImageData(img, 0, 0);
  ctx.imageSmoothingEnabled = false;
  ctx.drawImage(tmp, 0, 0, canvas.width, canvas.height);
}

function runDenoise() {
  const t0 = performance.now();
  const r = denoise_two_region(num("d-n"), num("d-s"), num("d-seed"), num("d-q"), num("d-m"), num("d-a"));
  const ms = performance.now() - t0;
  draw($("d-clean"), r.size, r.clean);
  draw($("d-noisy"), r.size, r.noisy);
  draw($("d-out"), r.size, r.denoised);
  const m = r.metrics;
  $("d-info").textContent =
    `noisy:    PSNR ${m[0].toFixed(2)} dB  SSIM ${m[1].toFixed(4)}\n` +
    `denoised: PSNR ${m[2].toFixed(2)} dB  SSIM ${m[3].toFixed(4)}\n` +
    `${r.iterations} iterations, ${ms.toFixed(0)} ms`;
  r.free();
}

function tabulate() {
  const v = limit_traces(num("l-q"));
  const lines = ["    k          measured          analytic"];
  for (let i = 0; i < v.length; i += 3) {
    if (i > 0 && v[i] < v[i - 3]) lines.push("", "step", "    k          measured          analytic");
    if (i === 0) lines.unshift("ramp");
    lines.push(`${String(v[i]).padStart(5)}  ${v[i + 1].toExponential(10)}  ${v[i + 2].toExponential(10)}`);
  }
  $("l-out").textContent = lines.join("\n");
}

function guard(f) {
  return () => {
    try {
      f();
    } catch (e) {
      alert(e.message ?? e);
    }
  };
}

await init();
$("c-go").onclick = guard(plotCurves);
$("d-go").onclick = guard(runDenoise);
$("l-go").onclick = guard(tabulate);
plotCurves();
tabulate();
