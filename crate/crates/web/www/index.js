import init, { weierstrassSlice, regimeMap, regimeName, cutoffSection } from "./pkg/pelab_demo.js";

const $ = (id) => document.getElementById(id);

function paint(canvas, rgba) {
  const img = new ImageData(new Uint8ClampedArray(rgba), canvas.width, canvas.height);
  canvas.getContext("2d").putImageData(img, 0, 0);
}

function showValues() {
  for (const o of document.querySelectorAll("output")) {
    o.value = $(o.htmlFor).value;
  }
}

function drawSlice() {
  const c = $("slice");
  try {
    const px = weierstrassSlice(
      +$("alpha").value, +$("beta").value, +$("octaves").value,
      Math.max(0, Math.floor(+$("seed").value)), c.width, +$("z").value,
    );
    paint(c, px);
    $("slice-msg").textContent = regimeName(+$("alpha").value, +$("beta").value);
  } catch (e) {
    $("slice-msg").textContent = String(e.message ?? e);
  }
}

function drawCutoff() {
  const c = $("cutoff");
  paint(c, cutoffSection(+$("eta").value, c.width, c.height));
}

function pickRegime(ev) {
  const c = $("regime");
  const r = c.getBoundingClientRect();
  const alpha = (2 * (ev.clientX - r.left)) / r.width;
  const beta = 1 - (ev.clientY - r.top) / r.height;
  $("regime-msg").textContent =
    `alpha ${alpha.toFixed(3)}, beta ${beta.toFixed(3)}: ${regimeName(alpha, beta)}`;
  $("alpha").value = Math.min(1.95, Math.max(0.05, alpha)).toFixed(2);
  $("beta").value = Math.min(0.95, Math.max(0.05, beta)).toFixed(2);
  showValues();
  drawSlice();
}

await init();
showValues();
const regime = $("regime");
paint(regime, regimeMap(regime.width, regime.height));
regime.addEventListener("click", pickRegime);
for (const id of ["alpha", "beta", "octaves", "z", "seed"]) {
  $(id).addEventListener("input", () => { showValues(); drawSlice(); });
}
$("eta").addEventListener("input", () => { showValues(); drawCutoff(); });
drawSlice();
drawCutoff();
