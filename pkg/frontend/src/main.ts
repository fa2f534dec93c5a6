/**
 * Page controller: wires the API client, the view state, and the renderers
 * together. All DOM mutation funnels through refresh().
 */

import { ApiClient, ApiError } from "./api.js";
import {
  clickLabel,
  initialState,
  recordZeroRound,
  selectProblem,
  setError,
  toggleSide,
  type ViewState,
} from "./state.js";
import {
  renderDiagram,
  renderError,
  renderProblem,
  renderTree,
} from "./render.js";
import type { GeneratorSpec } from "./types.js";

export class Controller {
  readonly state: ViewState = initialState();

  constructor(
    readonly doc: Document,
    readonly api: ApiClient,
  ) {}

  private get sid(): string {
    if (this.state.sessionId === null) throw new Error("no session yet");
    return this.state.sessionId;
  }

  async start(): Promise<void> {
    this.state.sessionId = await this.api.createSession();
    this.bindActions();
    await this.refresh();
  }

  /** Run an async UI action, surfacing server errors in the banner. */
  private async guard(fn: () => Promise<void>): Promise<void> {
    if (this.state.busy) return;
    this.state.busy = true;
    setError(this.state, null);
    try {
      await fn();
    } catch (err) {
      if (err instanceof ApiError) {
        setError(this.state, `${err.status} ${err.error}: ${err.detail}`);
      } else {
        setError(this.state, String(err));
      }
    } finally {
      this.state.busy = false;
      await this.refresh();
    }
  }

  private bindActions(): void {
    const doc = this.doc;
    const on = (id: string, fn: () => void) =>
      doc.getElementById(id)?.addEventListener("click", fn);

    on("act-load-text", () => {
      const text =
        (doc.getElementById("load-text") as HTMLTextAreaElement | null)
          ?.value ?? "";
      void this.guard(async () => {
        const out = await this.api.loadText(this.sid, text);
        selectProblem(this.state, out.pid);
      });
    });
    on("act-load-gen", () => {
      const val = (id: string) =>
        (doc.getElementById(id) as HTMLInputElement | null)?.value ?? "";
      const spec: GeneratorSpec = {
        kind: (val("gen-kind") || "pi") as GeneratorSpec["kind"],
        delta: Number(val("gen-delta") || "3"),
      };
      const i = val("gen-i");
      if (i !== "") spec.i = Number(i);
      void this.guard(async () => {
        const out = await this.api.loadGenerator(this.sid, spec);
        selectProblem(this.state, out.pid);
      });
    });
    const derive = (fn: (pid: string) => Promise<{ new_pid: string | null }>) =>
      void this.guard(async () => {
        const pid = this.state.currentPid;
        if (pid === null) return;
        const out = await fn(pid);
        if (out.new_pid !== null) selectProblem(this.state, out.new_pid);
        else setError(this.state, "no merge suggested");
      });
    on("act-re", () => derive((pid) => this.api.re(this.sid, pid)));
    on("act-rere", () => derive((pid) => this.api.rere(this.sid, pid)));
    on("act-heuristic", () =>
      derive((pid) => this.api.heuristic(this.sid, pid, this.state.side)),
    );
    on("act-zero-round", () =>
      void this.guard(async () => {
        const pid = this.state.currentPid;
        if (pid === null) return;
        const out = await this.api.zeroRound(this.sid, pid);
        recordZeroRound(this.state, pid, out.solvable);
      }),
    );
    on("act-side", () =>
      void this.guard(async () => {
        toggleSide(this.state);
      }),
    );
  }

  onLabelClick(label: string): void {
    const action = clickLabel(this.state, label);
    if (action.kind === "merge") {
      void this.guard(async () => {
        const pid = this.state.currentPid;
        if (pid === null) return;
        const out = await this.api.merge(this.sid, pid, action.b, action.a);
        if (out.new_pid !== null) selectProblem(this.state, out.new_pid);
      });
    } else {
      void this.refresh();
    }
  }

  async refresh(): Promise<void> {
    const doc = this.doc;
    const mount = (id: string, node: HTMLElement | null) => {
      const host = doc.getElementById(id);
      if (!host) return;
      host.replaceChildren(...(node ? [node] : []));
    };
    mount("error", renderError(doc, this.state.error));

    if (this.state.sessionId === null) return;
    const tree = await this.api.tree(this.sid);
    mount(
      "tree",
      renderTree(doc, tree, this.state.currentPid, this.state.zeroRound, {
        onSelect: (pid) => {
          selectProblem(this.state, pid);
          void this.refresh();
        },
      }),
    );

    const pid = this.state.currentPid;
    if (pid === null) {
      mount("problem", null);
      mount("diagram", null);
      return;
    }
    const [detail, diagram] = await Promise.all([
      this.api.getProblem(this.sid, pid),
      this.api.diagram(this.sid, pid, this.state.side),
    ]);
    mount("problem", renderProblem(doc, detail));
    mount(
      "diagram",
      renderDiagram(doc, diagram, this.state.mergeArm, {
        onLabelClick: (label) => this.onLabelClick(label),
      }),
    );
  }
}

/** Browser entry point; tests construct Controller directly instead. */
export function boot(doc: Document): Controller {
  const ctrl = new Controller(doc, new ApiClient(""));
  void ctrl.start().catch((err) => {
    const host = doc.getElementById("error");
    if (host) host.textContent = `failed to start: ${String(err)}`;
  });
  return ctrl;
}

declare global {
  interface Window {
    __relimController?: Controller;
  }
}

if (typeof window !== "undefined" && typeof document !== "undefined") {
  const auto = document.getElementById("app");
  if (auto) window.__relimController = boot(document);
}
