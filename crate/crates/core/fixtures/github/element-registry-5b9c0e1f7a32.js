(self.webpackChunk = self.webpackChunk || []).push([
  ["element-registry"],
  {
    registry: function (module, exports) {
      "use strict";
      var pending = new Map();
      function lazyDefine(tagName, loader) {
        pending.set(tagName, loader);
        scanDocument(document);
      }
      function scanDocument(rootNode) {
        pending.forEach(function (loader, tagName) {
          if (rootNode.querySelector(tagName)) {
            pending.delete(tagName);
            loader();
          }
        });
      }
      var observer = new MutationObserver(function () {
        scanDocument(document);
      });
      observer.observe(document.documentElement, { childList: true, subtree: true });
      exports.lazyDefine = lazyDefine;
    }
  }
]);
