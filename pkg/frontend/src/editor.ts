/**
 * Editing-session state machine, DOM-free so the contracts are testable:
 *
 * - the mask raster is created at the session's image size and locked;
 * - at most one mutating request is in flight (submit/undo/reset no-op
 *   while pending);
 * - score tables come straight from the last server response.
 */

import type { Algorithm, ApiClient, InpaintParams, SessionResponse } from "./api.js";
import { Brush, MaskRaster, Point } from "./maskraster.js";
import { scoreRows, TableRow } from "./tables.js";

export interface CamState {
  classId: number;
  visible: boolean;
  alpha: number;
}

export interface EditorSnapshot {
  sessionId: string;
  width: number;
  height: number;
  currentImage: string;
  originalImage: string;
  currentTable: TableRow[];
  originalTable: TableRow[];
  historyDepth: number;
  pending: boolean;
  algorithm: Algorithm;
  brush: Brush;
  cam: CamState;
}

export type EditorListener = (state: EditorSnapshot) => void;

export class Editor {
  brush: Brush = { radius: 12, mode: "paint" };
  algorithm: Algorithm = "telea";
  params: InpaintParams = {};
  cam: CamState = { classId: 0, visible: false, alpha: 0.5 };

  private session: SessionResponse | null = null;
  private originalImage = "";
  private maskRaster: MaskRaster | null = null;
  private pending = false;
  private listeners: EditorListener[] = [];

  constructor(private readonly api: ApiClient) {}

  onChange(listener: EditorListener): void {
    this.listeners.push(listener);
  }

  private emit(): void {
    const snap = this.snapshot();
    for (const l of this.listeners) l(snap);
  }

  get isPending(): boolean {
    return this.pending;
  }

  get mask(): MaskRaster {
    if (!this.maskRaster) throw new Error("no session loaded");
    return this.maskRaster;
  }

  get sessionId(): string {
    if (!this.session) throw new Error("no session loaded");
    return this.session.session_id;
  }

  snapshot(): EditorSnapshot {
    const s = this.session;
    return {
      sessionId: s?.session_id ?? "",
      width: s?.width ?? 0,
      height: s?.height ?? 0,
      currentImage: s?.image ?? "",
      originalImage: this.originalImage,
      currentTable: s ? scoreRows(s.scores) : [],
      originalTable: s ? scoreRows(s.original_scores) : [],
      historyDepth: s?.history_depth ?? 0,
      pending: this.pending,
      algorithm: this.algorithm,
      brush: { ...this.brush },
      cam: { ...this.cam },
    };
  }

  /** Open a session; the mask is sized to the session image and locked. */
  async load(imageB64: string): Promise<EditorSnapshot> {
    const resp = await this.api.createSession(imageB64);
    this.session = resp;
    this.originalImage = resp.image;
    this.maskRaster = new MaskRaster(resp.width, resp.height);
    this.emit();
    return this.snapshot();
  }

  paintStroke(points: Point[]): void {
    if (this.pending) return; // mutating controls are inert while in flight
    this.mask.paintStroke(points, this.brush);
    this.emit();
  }

  clearMask(): void {
    if (this.pending) return;
    this.mask.clear();
    this.emit();
  }

  /**
   * Send the painted mask. Returns false (without a request) when another
   * mutation is already in flight or nothing is painted.
   */
  async submitInpaint(): Promise<boolean> {
    if (this.pending || !this.session || !this.maskRaster) return false;
    if (this.maskRaster.isEmpty()) return false;
    this.pending = true;
    this.emit();
    try {
      const resp = await this.api.inpaint(
        this.session.session_id,
        this.maskRaster.toPngBase64(),
        this.algorithm,
        this.params,
      );
      this.session = resp;
      this.maskRaster.clear();
      return true;
    } finally {
      this.pending = false;
      this.emit();
    }
  }

  async undo(): Promise<boolean> {
    if (this.pending || !this.session) return false;
    this.pending = true;
    this.emit();
    try {
      this.session = await this.api.undo(this.session.session_id);
      return !this.session.history_empty;
    } finally {
      this.pending = false;
      this.emit();
    }
  }

  async reset(): Promise<boolean> {
    if (this.pending || !this.session) return false;
    this.pending = true;
    this.emit();
    try {
      this.session = await this.api.reset(this.session.session_id);
      this.maskRaster?.clear();
      return true;
    } finally {
      this.pending = false;
      this.emit();
    }
  }

  toggleCam(classId?: number): void {
    if (classId !== undefined && classId !== this.cam.classId) {
      this.cam = { ...this.cam, classId, visible: true };
    } else {
      this.cam = { ...this.cam, visible: !this.cam.visible };
    }
    this.emit();
  }

  setCamVisible(visible: boolean): void {
    this.cam = { ...this.cam, visible };
    this.emit();
  }

  setCamAlpha(alpha: number): void {
    this.cam = { ...this.cam, alpha: Math.min(1, Math.max(0, alpha)) };
    this.emit();
  }

  camUrl(): string | null {
    if (!this.session || !this.cam.visible) return null;
    return this.api.camUrl(this.session.session_id, this.cam.classId, "overlay", this.cam.alpha);
  }
}
