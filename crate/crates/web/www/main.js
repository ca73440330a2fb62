import init, { Codemaker, schedule_table, explore } from "./pkg/querygames_web.js";

const $ = (id) => document.getElementById(id);
const hue = (c, k) => `hsl(${Math.round((360 * (c - 1)) / Math.max(k, 1))} 65% 45%)`;

let game = null;
let spec = null;

function render(msg) {
  const m = JSON.parse(msg);
  const q = $("p-query");
  if (m.type === "query") {
    q.innerHTML = "";
    if (m.query.colors) {
      for (const c of m.query.colors) {
        const s = document.createElement("span");
        s.textContent = c || "";
        if (c) s.style.background = hue(c, spec.k || spec.n); else s.className = "blank";
        q.appendChild(s);
      }
    } else {
      q.textContent = `{ ${m.query.ids.join(", ")} }`;
    }
    const hint = m.query.feedback === "total" ? " (answer black white)" : "";
    $("p-status").textContent = `query ${m.t}${m.bound !== undefined ? `, answer at most ${m.bound}` : ""}${hint}`;
    $("p-status").className = "";
    $("p-form").hidden = false;
    $("p-answer").focus();
  } else if (m.type === "decoded") {
    q.textContent = "";
    $("p-status").textContent = `your codeword is [${m.codeword.join(", ")}]`;
    $("p-form").hidden = true;
  } else {
    $("p-status").textContent = m.message;
    $("p-status").className = "err";
  }
  return m;
}

$("p-start").onclick = () => {
  spec = { game: $("p-game").value, n: +$("p-n").value, k: +$("p-k").value, blanks: $("p-blanks").checked };
  $("p-log").innerHTML = "";
  try {
    game = new Codemaker(JSON.stringify(spec));
    render(game.current());
  } catch (e) {
    $("p-status").textContent = String(e);
    $("p-status").className = "err";
  }
};

$("p-form").onsubmit = (ev) => {
  ev.preventDefault();
  const line = $("p-answer").value;
  const before = JSON.parse(game.current());
  const m = render(game.answer(line));
  if (m.type === "error") {
    render(game.current());
    $("p-status").textContent = m.message;
    $("p-status").className = "err";
  } else {
    const li = document.createElement("li");
    li.textContent = `${JSON.stringify(before.query)} -> ${line}`;
    $("p-log").appendChild(li);
  }
  $("p-answer").value = "";
};

$("s-show").onclick = () => {
  const rows = schedule_table(+$("s-shift").value, +$("s-rows").value).trim().split("\n");
  const t = $("s-table");
  t.innerHTML = "<tr><th>t</th><th>x</th><th>y</th><th>r</th></tr>";
  for (const row of rows) {
    const [tt, x, y, r] = row.split(",");
    const tr = t.insertRow();
    if (y === "0") tr.className = "r";
    for (const v of [tt, x, y, r]) tr.insertCell().textContent = v;
  }
};

$("e-run").onclick = () => {
  try {
    const r = JSON.parse(explore($("e-spec").value, +$("e-trials").value, BigInt($("e-seed").value)));
    $("e-out").textContent = JSON.stringify(r, null, 2);
  } catch (e) {
    $("e-out").textContent = String(e);
  }
};

await init();
$("s-show").onclick();
