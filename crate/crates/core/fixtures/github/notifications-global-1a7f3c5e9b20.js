(self.webpackChunk = self.webpackChunk || []).push([
  ["notifications-global"],
  {
    notifications: function (module, exports) {
      "use strict";
      function refreshIndicator() {
        var indicator = document.querySelector(".notification-indicator");
        if (!indicator) {
          return Promise.resolve(false);
        }
        return fetch(indicator.getAttribute("data-indicator-src"), { headers: { Accept: "application/json" } })
          .then(function (response) {
            return response.ok ? response.json() : { unread: false };
          })
          .then(function (status) {
            indicator.classList.toggle("unread", Boolean(status.unread));
            return Boolean(status.unread);
          });
      }
      exports.refreshIndicator = refreshIndicator;
    }
  }
]);
