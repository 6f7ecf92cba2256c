/** DOM wiring: canvases, brush input, controls, and table rendering. */

import { ApiClient } from "./api.js";
import { Editor, EditorSnapshot } from "./editor.js";
import type { Point } from "./maskraster.js";

const api = new ApiClient("");
const editor = new Editor(api);

const el = <T extends HTMLElement>(id: string): T => {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
};

const fileInput = el<HTMLInputElement>("file");
const editCanvas = el<HTMLCanvasElement>("edit-canvas");
const originalCanvas = el<HTMLCanvasElement>("original-canvas");
const camImg = el<HTMLImageElement>("cam-img");
const currentTable = el<HTMLTableSectionElement>("current-table");
const originalTable = el<HTMLTableSectionElement>("original-table");
const brushSize = el<HTMLInputElement>("brush-size");
const eraseToggle = el<HTMLInputElement>("erase");
const algoSelect = el<HTMLSelectElement>("algorithm");
const classSelect = el<HTMLSelectElement>("cam-class");
const camToggle = el<HTMLInputElement>("cam-visible");
const camAlpha = el<HTMLInputElement>("cam-alpha");
const statusLine = el<HTMLSpanElement>("status");
const submitBtn = el<HTMLButtonElement>("submit");
const undoBtn = el<HTMLButtonElement>("undo");
const resetBtn = el<HTMLButtonElement>("reset");
const clearBtn = el<HTMLButtonElement>("clear-mask");

let labels: string[] = [];
let camFetchToken = 0;

function drawImage(canvas: HTMLCanvasElement, b64: string) {
  const img = new Image();
  img.onload = () => {
    canvas.width = img.width;
    canvas.height = img.height;
    canvas.getContext("2d")!.drawImage(img, 0, 0);
    paintMaskOverlay();
  };
  img.src = `data:image/png;base64,${b64}`;
}

function paintMaskOverlay() {
  if (!editor.snapshot().sessionId) return;
  const mask = editor.mask;
  const ctx = editCanvas.getContext("2d")!;
  const img = new Image();
  img.onload = () => {
    ctx.drawImage(img, 0, 0); // repaint the base, then tint masked pixels
    const data = ctx.getImageData(0, 0, editCanvas.width, editCanvas.height);
    for (let y = 0; y < mask.height; y++) {
      for (let x = 0; x < mask.width; x++) {
        if (mask.get(x, y)) {
          const i = (y * mask.width + x) * 4;
          data.data[i] = Math.min(255, data.data[i] + 120);
          data.data[i + 3] = 255;
        }
      }
    }
    ctx.putImageData(data, 0, 0);
  };
  img.src = `data:image/png;base64,${editor.snapshot().currentImage}`;
}

function renderTable(body: HTMLTableSectionElement, rows: ReturnType<Editor["snapshot"]>["currentTable"]) {
  body.innerHTML = "";
  for (const row of rows) {
    const tr = document.createElement("tr");
    tr.innerHTML = `<td>${row.rank}</td><td>${row.label}</td><td class="num">${row.percent}</td>`;
    body.appendChild(tr);
  }
}

function refreshCam(state: EditorSnapshot) {
  const url = editor.camUrl();
  const token = ++camFetchToken;
  if (!url) {
    camImg.style.display = "none";
    camImg.removeAttribute("src");
    return;
  }
  // cancellable: a newer request simply wins
  fetch(url)
    .then((resp) => (resp.ok ? resp.blob() : Promise.reject(new Error(`${resp.status}`))))
    .then((blob) => {
      if (token !== camFetchToken) return;
      camImg.src = URL.createObjectURL(blob);
      camImg.style.display = "block";
    })
    .catch(() => {
      if (token === camFetchToken) camImg.style.display = "none";
    });
  void state;
}

function render(state: EditorSnapshot) {
  renderTable(currentTable, state.currentTable);
  renderTable(originalTable, state.originalTable);
  statusLine.textContent = state.pending
    ? "working..."
    : state.sessionId
      ? `session ${state.sessionId.slice(0, 8)} | history ${state.historyDepth}`
      : "upload an image to begin";
  const busy = state.pending || !state.sessionId;
  submitBtn.disabled = busy;
  undoBtn.disabled = busy || state.historyDepth === 0;
  resetBtn.disabled = busy;
  clearBtn.disabled = busy;
  refreshCam(state);
}

editor.onChange(render);

fileInput.addEventListener("change", async () => {
  const file = fileInput.files?.[0];
  if (!file) return;
  const bytes = new Uint8Array(await file.arrayBuffer());
  let binary = "";
  for (let i = 0; i < bytes.length; i += 0x8000) {
    binary += String.fromCharCode(...bytes.subarray(i, i + 0x8000));
  }
  const state = await editor.load(btoa(binary));
  drawImage(editCanvas, state.currentImage);
  drawImage(originalCanvas, state.originalImage);
  const got = await api.labels();
  labels = got.labels;
  classSelect.innerHTML = "";
  labels.forEach((label, i) => {
    const opt = document.createElement("option");
    opt.value = String(i);
    opt.textContent = `${i}: ${label}`;
    classSelect.appendChild(opt);
  });
});

function canvasPoint(ev: PointerEvent): Point {
  const rect = editCanvas.getBoundingClientRect();
  return {
    x: ((ev.clientX - rect.left) / rect.width) * editCanvas.width,
    y: ((ev.clientY - rect.top) / rect.height) * editCanvas.height,
  };
}

let stroke: Point[] | null = null;
editCanvas.addEventListener("pointerdown", (ev) => {
  if (!editor.snapshot().sessionId || editor.isPending) return;
  editCanvas.setPointerCapture(ev.pointerId);
  stroke = [canvasPoint(ev)];
  editor.paintStroke(stroke);
});
editCanvas.addEventListener("pointermove", (ev) => {
  if (!stroke) return;
  const prev = stroke[stroke.length - 1];
  const next = canvasPoint(ev);
  editor.paintStroke([prev, next]);
  stroke.push(next);
});
editCanvas.addEventListener("pointerup", () => {
  stroke = null;
});

brushSize.addEventListener("input", () => {
  editor.brush.radius = Number(brushSize.value);
});
eraseToggle.addEventListener("change", () => {
  editor.brush.mode = eraseToggle.checked ? "erase" : "paint";
});
algoSelect.addEventListener("change", () => {
  editor.algorithm = algoSelect.value as "telea" | "patchmatch";
});

submitBtn.addEventListener("click", async () => {
  const ok = await editor.submitInpaint();
  if (ok) {
    drawImage(editCanvas, editor.snapshot().currentImage);
  }
});
undoBtn.addEventListener("click", async () => {
  await editor.undo();
  drawImage(editCanvas, editor.snapshot().currentImage);
});
resetBtn.addEventListener("click", async () => {
  await editor.reset();
  drawImage(editCanvas, editor.snapshot().currentImage);
});
clearBtn.addEventListener("click", () => {
  editor.clearMask();
  drawImage(editCanvas, editor.snapshot().currentImage);
});
camToggle.addEventListener("change", () => {
  editor.setCamVisible(camToggle.checked);
});
classSelect.addEventListener("change", () => {
  editor.toggleCam(Number(classSelect.value));
  camToggle.checked = true;
});
camAlpha.addEventListener("input", () => {
  editor.setCamAlpha(Number(camAlpha.value) / 100);
});

render(editor.snapshot());
