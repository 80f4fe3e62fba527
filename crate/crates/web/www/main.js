import init, { Session, builtin_scene, sector_test, critical_values } from "./pkg/fppm_web.js";

const $ = (id) => document.getElementById(id);
let session = null;
let running = false;

function paint(canvas, w, h, bytes) {
  canvas.width = w;
  canvas.height = h;
  const ctx = canvas.getContext("2d");
  ctx.putImageData(new ImageData(new Uint8ClampedArray(bytes), w, h), 0, 0);
}

function frame() {
  if (!running) return;
  const t = performance.now();
  // Keep each frame short so the page stays responsive.
  do {
    session.step(1);
  } while (performance.now() - t < 30);
  const w = session.width(), h = session.height();
  paint($("image"), w, h, session.image_rgba());
  paint($("radius"), w, h, session.radius_rgba());
  $("status").textContent =
    `iteration ${session.iteration()}  mean radius ${session.mean_radius().toExponential(3)}  ` +
    `merging share ${(100 * session.vm_share()).toFixed(1)}%  rejections ${session.rejected()}`;
  requestAnimationFrame(frame);
}

function start() {
  try {
    const text = builtin_scene($("scene").value, Number($("res").value));
    if (session) session.free();
    session = new Session(text, $("algo").value, Number($("r0").value), 1);
  } catch (e) {
    $("status").textContent = String(e);
    return;
  }
  running = true;
  requestAnimationFrame(frame);
}

function explore() {
  $("contrast-v").textContent = Number($("contrast").value).toFixed(2);
  const k = Number($("k").value), m = Number($("m").value), alpha = Number($("alpha").value);
  const verdict = (id, stat, crit) => {
    $(id).textContent = stat > crit ? "reject" : "keep";
    $(id).className = stat > crit ? "reject" : "";
  };
  try {
    const [fc, cc] = critical_values(alpha, k, m);
    $("fc").textContent = fc.toFixed(3);
    $("cc").textContent = cc.toFixed(3);
    const [f, , c] = sector_test(k, Number($("n").value), m,
      Number($("contrast").value), Number($("noise").value), alpha, 7);
    $("f").textContent = f.toFixed(3);
    $("c").textContent = c.toFixed(3);
    verdict("fr", f, fc);
    verdict("cr", c, cc);
  } catch (e) {
    $("f").textContent = String(e);
    for (const id of ["c", "fr", "cr"]) $(id).textContent = "";
  }
}

await init();
$("start").onclick = start;
$("stop").onclick = () => { running = false; };
for (const id of ["k", "n", "m", "contrast", "noise", "alpha"]) $(id).oninput = explore;
explore();
