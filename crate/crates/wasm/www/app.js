// Built with `wasm-pack build crates/wasm --target web --out-dir www/pkg`.
import init, { analyze_cot, calibration, confusion_metrics } from "./pkg/cot_signal_wasm.js";

const $ = (id) => document.getElementById(id);

function show(target, fn) {
  try {
    const v = JSON.parse(fn());
    $(target).textContent = JSON.stringify(v, null, 2);
    return v;
  } catch (e) {
    $(target).textContent = "error: " + e;
    return null;
  }
}

function escape(s) {
  return s.replace(/[&<>]/g, (c) => ({ "&": "&amp;", "<": "&lt;", ">": "&gt;" }[c]));
}

function highlight(text, result) {
  const hits = new Set(result.harmful_hits.map((h) => h.word));
  // crude sentence split for display only; counts come from the wasm side
  const sentences = text.split(/(?<=[.!?])\s+|\n\s*\n/).filter((s) => s.trim());
  const hedged = new Set(result.hedged_sentences);
  const html = sentences
    .map((s, i) => {
      const body = escape(s).replace(/\p{L}+/gu, (w) => (hits.has(w.toLowerCase()) ? `<span class="hit">${w}</span>` : w));
      return hedged.has(i) ? `<span class="hedge">${body}</span>` : body;
    })
    .join(" ");
  const cls = result.word_rule_prediction === "correct" ? "good" : "bad";
  $("highlight").innerHTML =
    `<p class="verdict">word rule predicts: <span class="${cls}">${result.word_rule_prediction}</span> · ` +
    `${result.length_words} words · hedging rate ${result.hedging_rate.toFixed(2)}</p><p>${html}</p>`;
}

function analyze() {
  const text = $("cot").value;
  const v = show("analysis", () => analyze_cot(text, $("words").value));
  if (v) highlight(text, v);
}

function calibrate() {
  show("calibration", () => calibration($("calib").value));
}

function score() {
  const n = (id) => Math.max(0, parseInt($(id).value, 10) || 0);
  show("metrics", () => confusion_metrics(n("tn"), n("fp"), n("fn"), n("tp")));
}

init().then(() => {
  $("status").textContent = "";
  $("analyze").onclick = analyze;
  $("calibrate").onclick = calibrate;
  $("score").onclick = score;
  analyze();
  calibrate();
  score();
}).catch((e) => {
  $("status").textContent = "failed to load wasm: " + e + " (build it with wasm-pack first)";
});
