// Feature detection and environment flags shared by the page bundles.
(function () {
  "use strict";
  var features = {
    customElements: typeof window.customElements !== "undefined",
    intersectionObserver: typeof window.IntersectionObserver === "function",
    resizeObserver: typeof window.ResizeObserver === "function",
    abortController: typeof window.AbortController === "function"
  };
  var root = document.documentElement;
  var missing = [];
  for (var name in features) {
    if (!features[name]) {
      missing.push(name);
    }
  }
  if (missing.length > 0) {
    root.setAttribute("data-missing-features", missing.join(" "));
  }
  root.setAttribute("data-color-mode", root.getAttribute("data-color-mode") || "auto");
  window.githubEnvironment = { features: features, missingFeatures: missing };
})();
