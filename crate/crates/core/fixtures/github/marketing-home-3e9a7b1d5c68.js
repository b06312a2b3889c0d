(self.webpackChunk = self.webpackChunk || []).push([
  ["marketing-home"],
  {
    home: function (module, exports) {
      "use strict";
      var revealed = new WeakSet();
      function revealSection(entries) {
        entries.forEach(function (entry) {
          if (entry.isIntersecting && !revealed.has(entry.target)) {
            revealed.add(entry.target);
            entry.target.classList.add("is-visible");
          }
        });
      }
      var observer = new IntersectionObserver(revealSection, { threshold: 0.25 });
      var sections = document.querySelectorAll(".home-section");
      for (var index = 0; index < sections.length; index++) {
        observer.observe(sections[index]);
      }
      exports.revealSection = revealSection;
    }
  }
]);
