/** Entry point: ?mode=annotate|judge&user=ID&api=http://host:port */

import { AnnotateView } from "./annotate.js";
import { ApiClient } from "./api.js";
import { JudgeView } from "./judge.js";

function start(): void {
  const params = new URLSearchParams(window.location.search);
  const mode = params.get("mode") ?? "annotate";
  const user = params.get("user") ?? "anonymous";
  const apiBase = params.get("api") ?? "http://127.0.0.1:8400";
  const root = document.getElementById("app");
  if (!root) {
    throw new Error("missing #app container");
  }
  const api = new ApiClient(apiBase);
  if (mode === "judge") {
    const view = new JudgeView(root, api, user, window.localStorage);
    window.addEventListener("keydown", (event) => view.handleKey(event.key));
    void view.loadNext();
  } else {
    const view = new AnnotateView(root, api, user, window.localStorage);
    window.addEventListener("keydown", (event) => view.handleKey(event.key));
    void view.loadNext();
  }
}

window.addEventListener("DOMContentLoaded", start);
