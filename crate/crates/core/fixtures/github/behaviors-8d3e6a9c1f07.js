(self.webpackChunk = self.webpackChunk || []).push([
  ["behaviors"],
  {
    behaviors: function (module, exports) {
      "use strict";
      function toggleDetails(event) {
        var summary = event.target.closest("summary");
        if (!summary) {
          return;
        }
        var details = summary.parentElement;
        details.classList.toggle("is-open", !details.open);
      }
      function closeMenusOnScroll() {
        var menus = document.querySelectorAll(".dropdown");
        for (var index = 0; index < menus.length; index++) {
          if (menus[index].open) {
            menus[index].removeAttribute("open");
          }
        }
      }
      document.addEventListener("click", toggleDetails);
      window.addEventListener("scroll", closeMenusOnScroll, { passive: true });
      exports.toggleDetails = toggleDetails;
    }
  }
]);
