(function () {
  "use strict";
  var modules = {};
  var moduleCache = {};
  function s(moduleId) {
    var cached = moduleCache[moduleId];
    if (cached !== undefined) {
      return cached.exports;
    }
    var module = (moduleCache[moduleId] = { id: moduleId, loaded: false, exports: {} });
    modules[moduleId].call(module.exports, module, module.exports, s);
    module.loaded = true;
    return module.exports;
  }
  s.m = modules;
  s.c = moduleCache;

  (function () {
    var deferred = [];
    s.O = function (result, chunkIds, callbackFn, priority) {
      if (chunkIds) {
        priority = priority || 0;
        for (var i = deferred.length; i > 0 && deferred[i - 1][2] > priority; i--) {
          deferred[i] = deferred[i - 1];
        }
        deferred[i] = [chunkIds, callbackFn, priority];
        return;
      }
      var notFulfilled = Infinity;
      for (var k = 0; k < deferred.length; k++) {
        var ids = deferred[k][0];
        var callback = deferred[k][1];
        var level = deferred[k][2];
        var fulfilled = true;
        for (var j = 0; j < ids.length; j++) {
          var ready = Object.keys(s.O).every(function (key) {
            return s.O[key](ids[j]);
          });
          if ((level & 1) === 0 || notFulfilled >= level) {
            if (ready) {
              var o = ids;
              s.f.e(o[j], result);
              o.splice(j--, 1);
            } else {
              fulfilled = false;
              if (level < notFulfilled) {
                notFulfilled = level;
              }
            }
          }
        }
        if (fulfilled) {
          var e = deferred;
          e.splice(k--, 1);
          var a = callback;
          var value = a();
          if (value !== undefined) {
            result = value;
          }
        }
      }
      return result;
    };
  })();

  s.n = function (module) {
    var getter = module && module.__esModule ? function () { return module["default"]; } : function () { return module; };
    s.d(getter, { a: getter });
    return getter;
  };

  (function () {
    var m = Object.getPrototypeOf
      ? function m(obj) {
          return Object.getPrototypeOf(obj);
        }
      : function (obj) {
          return obj.__proto__;
        };
    var leafPrototypes;
    s.t = function (value, mode) {
      if (mode & 1) {
        value = this(value);
      }
      if (mode & 8) {
        return value;
      }
      var ns = Object.create(null);
      s.r(ns);
      var def = {};
      var e = leafPrototypes || (leafPrototypes = [null, Object.getPrototypeOf({}), Object.getPrototypeOf([]), Object.getPrototypeOf(Object.getPrototypeOf)]);
      var define = function e(key) {
        def[key] = function () {
          return value[key];
        };
      };
      var _ = function _(start) {
        return mode & 2 && start;
      };
      for (var current = _(value); typeof current === "object" && !~e.indexOf(current); current = Object.getPrototypeOf(current)) {
        Object.getOwnPropertyNames(current).forEach(define);
      }
      def["default"] = function () {
        return value;
      };
      s.d(ns, def);
      return ns;
    };
    s.p = m;
  })();

  s.d = function (exports, definition) {
    for (var key in definition) {
      if (s.o(definition, key) && !s.o(exports, key)) {
        Object.defineProperty(exports, key, { enumerable: true, get: definition[key] });
      }
    }
  };

  s.f = {};
  s.e = function (chunkId) {
    return Promise.all(
      Object.keys(s.f).reduce(function (promises, key) {
        s.f[key](chunkId, promises);
        return promises;
      }, [])
    );
  };

  s.u = function (chunkId) {
    return "chunk-" + s.O.o(chunkId) + ".js";
  };

  s.g = (function () {
    if (typeof globalThis === "object") {
      return globalThis;
    }
    try {
      return this || Function("return this")();
    } catch (err) {
      if (typeof window === "object") {
        return window;
      }
    }
  })();

  s.o = function (obj, prop) {
    return Object.prototype.hasOwnProperty.call(obj, prop);
  };

  (function () {
    var inProgress = {};
    var dataWebpackPrefix = "github:";
    s.l = function (url, done, key, chunkId) {
      if (inProgress[url]) {
        inProgress[url].push(done);
        return;
      }
      var d;
      var needAttach;
      if (key !== undefined) {
        var scripts = document.getElementsByTagName("script");
        for (var i = 0; i < scripts.length; i++) {
          var r = scripts[i];
          if (r.getAttribute("src") == url || r.getAttribute("data-webpack") == dataWebpackPrefix + key) {
            d = r;
            break;
          }
        }
      }
      if (!d) {
        needAttach = true;
        d = document.createElement("script");
        d.charset = "utf-8";
        d.timeout = 120;
        d.setAttribute("data-webpack", dataWebpackPrefix + key);
        d.src = url;
        if (d.src.indexOf(window.location.origin + "/") !== 0) {
          d.crossOrigin = "anonymous";
        }
      }
      inProgress[url] = [done];
      var onScriptComplete = function (prev, event) {
        d.onerror = d.onload = null;
        clearTimeout(timeout);
        var a = inProgress[url];
        delete inProgress[url];
        if (d.parentNode) {
          d.parentNode.removeChild(d);
        }
        if (a) {
          a.forEach(function (handler) {
            return handler(event);
          });
        }
        if (prev) {
          return prev(event);
        }
      };
      var timeout = setTimeout(onScriptComplete.bind(null, undefined, { type: "timeout", target: d }), 120000);
      d.onerror = onScriptComplete.bind(null, d.onerror);
      d.onload = onScriptComplete.bind(null, d.onload);
      if (needAttach) {
        document.head.appendChild(d);
      }
    };
  })();

  s.r = function (exports) {
    if (typeof Symbol !== "undefined" && Symbol.toStringTag) {
      Object.defineProperty(exports, Symbol.toStringTag, { value: "Module" });
    }
    Object.defineProperty(exports, "__esModule", { value: true });
  };

  (function () {
    var installedChunks = { "wp-runtime": 0 };
    s.O.j = function (chunkId) {
      return installedChunks[chunkId] === 0;
    };
    function o(parentChunkLoadingFunction, data) {
      var chunkIds = data[0];
      var moreModules = data[1];
      var runtime = data[2];
      for (var moduleId in moreModules) {
        if (s.o(moreModules, moduleId)) {
          s.m[moduleId] = moreModules[moduleId];
        }
      }
      var result = runtime ? runtime(s) : undefined;
      if (parentChunkLoadingFunction) {
        parentChunkLoadingFunction(data);
      }
      for (var i = 0; i < chunkIds.length; i++) {
        installedChunks[chunkIds[i]] = 0;
      }
      return s.O(result);
    }
    var chunkLoadingGlobal = (self.webpackChunk = self.webpackChunk || []);
    if (s.p(chunkLoadingGlobal) !== Array.prototype) {
      chunkLoadingGlobal = Array.from(chunkLoadingGlobal);
    }
    chunkLoadingGlobal.forEach(o.bind(null, 0));
    chunkLoadingGlobal.push = o.bind(null, chunkLoadingGlobal.push.bind(chunkLoadingGlobal));
  })();
})();
