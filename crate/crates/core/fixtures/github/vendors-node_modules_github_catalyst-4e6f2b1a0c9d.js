(self.webpackChunk = self.webpackChunk || []).push([
  ["catalyst"],
  {
    catalyst: function (module, exports) {
      "use strict";
      var registered = new Map();
      function register(elementClass) {
        var tagName = elementClass.name
          .replace(/([A-Z]($|[a-z]))/g, "-$1")
          .replace(/(^-|-Element$)/g, "")
          .toLowerCase();
        if (!window.customElements.get(tagName)) {
          window.customElements.define(tagName, elementClass);
          window[elementClass.name] = elementClass;
        }
        registered.set(tagName, elementClass);
        return elementClass;
      }
      function findTarget(controller, targetName) {
        var selector = "[data-target~='" + controller.tagName.toLowerCase() + "." + targetName + "']";
        return controller.querySelector(selector);
      }
      exports.register = register;
      exports.findTarget = findTarget;
      exports.registered = registered;
    }
  }
]);
