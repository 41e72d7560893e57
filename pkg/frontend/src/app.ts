// DOM wiring for the annotation console: renders the view-model, forwards
// clicks and keyboard shortcuts (1/p = positive, 0/n = negative, j/k or
// arrows = move) to the controller.

import { SessionApi } from "./api.js";
import { ConsoleController, ConsoleViewModel } from "./model.js";

function apiBase(): string {
  const param = new URLSearchParams(window.location.search).get("api");
  return param ?? window.location.origin;
}

const api = new SessionApi(apiBase());
const vm = new ConsoleViewModel();
const controller = new ConsoleController(api, vm);

const root = document.getElementById("app") as HTMLElement;

function el(tag: string, className: string, text?: string): HTMLElement {
  const node = document.createElement(tag);
  node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function render(): void {
  root.replaceChildren();

  const header = el("div", "header");
  header.append(el("h1", "", "Annotation console"));
  const progress = el("div", "progress");
  const fill = el("div", "progress-fill");
  fill.style.width = `${Math.round(vm.progressFraction() * 100)}%`;
  progress.append(fill);
  header.append(progress);
  header.append(
    el("div", "meta", `${vm.labelled} / ${vm.budget} labelled - phase ${vm.phase}`)
  );
  root.append(header);

  if (vm.lastError) {
    const bar = el("div", "error", vm.lastError);
    const retry = el("button", "retry", "retry");
    retry.onclick = () => {
      void controller.submit().then(render);
    };
    bar.append(retry);
    root.append(bar);
  }

  if (vm.phase === "EXPORT-ONLY") {
    const done = el("div", "done");
    done.append(el("p", "", "Budget exhausted - the dataset is fully labelled."));
    const link = el("a", "export-link", "Download labelled dataset (JSON Lines)");
    (link as HTMLAnchorElement).href = controller.exportUrl() ?? "#";
    done.append(link);
    root.append(done);
    renderHistogram();
    return;
  }

  const list = el("div", "cards");
  vm.docs.forEach((doc, index) => {
    const card = el("div", index === vm.cursor ? "card focused" : "card");
    card.append(el("div", "doc-id", doc.id));
    const body = el("div", "doc-text", doc.text);
    card.append(body);
    const buttons = el("div", "buttons");
    const neg = el(
      "button",
      doc.label === 0 ? "label-btn chosen" : "label-btn",
      "negative (n)"
    );
    neg.onclick = () => {
      vm.setLabel(doc.id, 0);
      render();
    };
    const pos = el(
      "button",
      doc.label === 1 ? "label-btn chosen" : "label-btn",
      "positive (p)"
    );
    pos.onclick = () => {
      vm.setLabel(doc.id, 1);
      render();
    };
    buttons.append(neg, pos);
    card.append(buttons);
    card.onclick = () => {
      vm.cursor = index;
      render();
    };
    list.append(card);
  });
  root.append(list);

  const submit = el("button", "submit", vm.submitting ? "submitting..." : "submit batch");
  (submit as HTMLButtonElement).disabled = !vm.allLabelled() || vm.submitting;
  submit.onclick = () => {
    void controller.submit().then(render);
  };
  root.append(submit);
  renderHistogram();
}

function renderHistogram(): void {
  if (!vm.histogram) return;
  const wrap = el("div", "histogram");
  wrap.append(el("div", "meta", "classifier confidence (|margin|) over the pool"));
  const bars = el("div", "bars");
  const top = Math.max(...vm.histogram.counts, 1);
  vm.histogram.counts.forEach((count) => {
    const bar = el("div", "bar");
    bar.style.height = `${Math.round((count / top) * 60) + 2}px`;
    bar.title = String(count);
    bars.append(bar);
  });
  wrap.append(bars);
  root.append(wrap);
}

document.addEventListener("keydown", (event) => {
  if (vm.phase === "EXPORT-ONLY") return;
  switch (event.key) {
    case "p":
    case "1":
      vm.labelCurrent(1);
      break;
    case "n":
    case "0":
      vm.labelCurrent(0);
      break;
    case "j":
    case "ArrowDown":
      vm.next();
      break;
    case "k":
    case "ArrowUp":
      vm.prev();
      break;
    case "Enter":
      void controller.submit().then(render);
      return;
    default:
      return;
  }
  render();
});

void controller
  .start({ budget: Number(new URLSearchParams(window.location.search).get("budget")) || undefined })
  .then(render)
  .catch((err) => {
    root.replaceChildren(el("div", "error", `failed to start session: ${err}`));
  });
