import init, { lattice_view, kernel_field, carleson_profile } from "./pkg/diskrep_web.js";

const $ = (id) => document.getElementById(id);
const num = (id) => parseFloat($(id).value);

function diskFrame(ctx, size) {
  ctx.clearRect(0, 0, size, size);
  ctx.strokeStyle = "#888";
  ctx.beginPath();
  ctx.arc(size / 2, size / 2, size / 2 - 2, 0, 2 * Math.PI);
  ctx.stroke();
}

function drawLattice() {
  const canvas = $("lat-canvas");
  const ctx = canvas.getContext("2d");
  const size = canvas.width;
  const half = size / 2 - 2;
  try {
    const view = JSON.parse(lattice_view(num("lat-r"), num("lat-rho")));
    diskFrame(ctx, size);
    ctx.fillStyle = "#1f5fa8";
    for (const [x, y] of view.centers) {
      ctx.beginPath();
      ctx.arc(size / 2 + x * half, size / 2 - y * half, 1.6, 0, 2 * Math.PI);
      ctx.fill();
    }
    $("lat-info").textContent =
      `${view.centers.length} centers on ${view.rings} rings, covering radius ${view.covering_radius.toFixed(4)}`;
  } catch (e) {
    $("lat-info").textContent = String(e);
  }
}

function heat(t) {
  const r = Math.round(255 * Math.min(1, Math.max(0, 1.5 * t)));
  const g = Math.round(255 * Math.min(1, Math.max(0, 1.5 * t - 0.5)));
  const b = Math.round(255 * Math.min(1, Math.max(0, 3 * t - 2)) + 60 * (1 - t));
  return [r, g, b];
}

function drawField() {
  const canvas = $("field-canvas");
  const ctx = canvas.getContext("2d");
  const n = Math.round(num("field-n"));
  try {
    const values = kernel_field($("field-measure").value, $("field-kernel").value, n);
    const finite = Array.from(values).filter(Number.isFinite);
    const max = Math.max(...finite, 1e-300);
    const img = ctx.createImageData(n, n);
    values.forEach((v, i) => {
      const [r, g, b] = Number.isFinite(v) ? heat(v / max) : [255, 255, 255];
      img.data.set([r, g, b, 255], 4 * i);
    });
    const off = new OffscreenCanvas(n, n);
    off.getContext("2d").putImageData(img, 0, 0);
    ctx.imageSmoothingEnabled = false;
    ctx.clearRect(0, 0, canvas.width, canvas.height);
    ctx.drawImage(off, 0, 0, canvas.width, canvas.height);
    $("field-info").textContent = `max |f| on grid: ${max.toPrecision(6)}`;
  } catch (e) {
    $("field-info").textContent = String(e);
  }
}

function drawProfile() {
  const canvas = $("carl-canvas");
  const ctx = canvas.getContext("2d");
  const w = canvas.width;
  const h = canvas.height;
  try {
    const view = JSON.parse(
      carleson_profile($("carl-measure").value, num("carl-t"), num("carl-r"), Math.round(num("carl-angles")), 0.999),
    );
    const xs = view.moduli.map((m) => -Math.log10(1 - m + 1e-16));
    const xmax = Math.max(...xs, 1);
    const ymax = Math.max(...view.shell_max, 1e-300);
    ctx.clearRect(0, 0, w, h);
    ctx.strokeStyle = "#ccc";
    ctx.strokeRect(0, 0, w, h);
    ctx.strokeStyle = "#b0361f";
    ctx.beginPath();
    xs.forEach((x, i) => {
      const px = 10 + (x / xmax) * (w - 20);
      const py = h - 10 - (view.shell_max[i] / ymax) * (h - 20);
      if (i === 0) ctx.moveTo(px, py);
      else ctx.lineTo(px, py);
    });
    ctx.stroke();
    $("carl-info").textContent =
      `sup quotient ${view.constant.toPrecision(6)}; x axis is log10(1/(1-|z|)) up to |z| = 0.999`;
  } catch (e) {
    $("carl-info").textContent = String(e);
  }
}

await init();
$("lat-go").addEventListener("click", drawLattice);
$("field-go").addEventListener("click", drawField);
$("carl-go").addEventListener("click", drawProfile);
drawLattice();
drawField();
drawProfile();
