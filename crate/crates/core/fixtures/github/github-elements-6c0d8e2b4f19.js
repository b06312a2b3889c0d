(self.webpackChunk = self.webpackChunk || []).push([
  ["github-elements"],
  {
    elements: function (module, exports, require) {
      "use strict";
      var catalyst = require("catalyst");
      var elementNames = [
        "IncludeFragmentElement",
        "RemoteInputElement",
        "ActionListElement",
        "ActionBarElement",
        "DetailsMenuElement",
        "AnchoredPositionElement",
        "DialogHelperElement",
        "FocusGroupElement",
        "ScrollableRegionElement"
      ];
      elementNames.forEach(function (elementName) {
        var ElementClass = class extends HTMLElement {};
        Object.defineProperty(ElementClass, "name", { value: elementName });
        catalyst.register(ElementClass);
      });
      exports.elementNames = elementNames;
    }
  }
]);
