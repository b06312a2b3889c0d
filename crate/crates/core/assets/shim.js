// Instrumentation shim. Wraps selected browser APIs with Proxies that report
// each invocation through the environment channel and then delegate to the
// original. Installing twice is a no-op.
(function () {
  'use strict';
  var G = globalThis;
  var GUARD = Symbol.for('urlscope.shim');
  if (G[GUARD]) return G[GUARD].hooks.length;

  var env = G.__urlscope_env;
  if (!env || typeof env.emit !== 'function') throw new Error('instrumentation channel unavailable');

  var MAX_PAYLOAD = 4096;
  var EXCERPT = 512;
  var baseline = Object.getOwnPropertyNames(G);
  var baselineSet = new Set(baseline);
  var hooks = [];
  var warnings = [];

  function excerpt(s) {
    s = String(s);
    return s.length > EXCERPT ? s.slice(0, EXCERPT) : s;
  }

  function fit(payload) {
    var json = JSON.stringify(payload);
    if (json.length <= MAX_PAYLOAD) return payload;
    var limit = 256;
    while (limit >= 16) {
      var out = {};
      Object.keys(payload).forEach(function (k) {
        var v = payload[k];
        out[k] = typeof v === 'string' && v.length > limit ? v.slice(0, limit) : v;
      });
      if (JSON.stringify(out).length <= MAX_PAYLOAD) return out;
      limit = limit >> 1;
    }
    return { truncated: true };
  }

  function send(type, payload) {
    env.emit(type, fit(payload));
  }

  function urlOf(input) {
    if (typeof input === 'string') return input;
    if (input && typeof input.url === 'string') return input.url;
    return String(input);
  }

  function hook(owner, prop, handler, label) {
    try {
      var desc = Object.getOwnPropertyDescriptor(owner, prop);
      if (!desc || typeof desc.value !== 'function') throw new Error('not a function');
      var original = desc.value;
      var wrapper = new Proxy(original, handler(original));
      Object.defineProperty(owner, prop, { value: wrapper, writable: desc.writable, enumerable: desc.enumerable, configurable: desc.configurable });
      hooks.push({ api: label, wrapper: wrapper, original: original });
    } catch (e) {
      warn(label, e);
    }
  }

  function hookAccessor(owner, prop, getHandler, setHandler, label) {
    try {
      var desc = Object.getOwnPropertyDescriptor(owner, prop);
      if (!desc || !desc.get) throw new Error('not an accessor');
      var get = getHandler ? new Proxy(desc.get, getHandler(desc.get)) : desc.get;
      var set = setHandler && desc.set ? new Proxy(desc.set, setHandler(desc.set)) : desc.set;
      Object.defineProperty(owner, prop, { get: get, set: set, enumerable: desc.enumerable, configurable: desc.configurable });
      if (getHandler) hooks.push({ api: label + '.get', wrapper: get, original: desc.get });
      if (setHandler && desc.set) hooks.push({ api: label + '.set', wrapper: set, original: desc.set });
    } catch (e) {
      warn(label, e);
    }
  }

  function warn(label, e) {
    var msg = 'hook ' + label + ' failed: ' + (e && e.message ? e.message : e);
    warnings.push(msg);
    send('logGlobalDiff', { warning: msg });
  }

  function applying(report) {
    return function () {
      return {
        apply: function (target, self, args) {
          try {
            report(self, args);
          } catch (e) {
            // reporting never changes page-visible behaviour
          }
          return Reflect.apply(target, self, args);
        }
      };
    };
  }

  // network
  hook(G, 'fetch', applying(function (self, args) {
    var init = args[1];
    var method = init && init.method ? init.method : args[0] && typeof args[0] === 'object' && args[0].method ? args[0].method : 'GET';
    send('logFetch', { url: urlOf(args[0]), method: String(method).toUpperCase() });
  }), 'window.fetch');

  var xhrInfo = new WeakMap();
  if (G.XMLHttpRequest) {
    hook(G.XMLHttpRequest.prototype, 'open', applying(function (self, args) {
      var info = { method: String(args[0]).toUpperCase(), url: urlOf(args[1]) };
      xhrInfo.set(self, info);
      send('logXhr', { phase: 'open', method: info.method, url: info.url });
    }), 'XMLHttpRequest.open');
    hook(G.XMLHttpRequest.prototype, 'send', applying(function (self) {
      var info = xhrInfo.get(self) || { method: 'GET', url: '' };
      send('logXhr', { phase: 'send', method: info.method, url: info.url });
    }), 'XMLHttpRequest.send');
  }

  hook(G, 'WebSocket', function () {
    return {
      construct: function (target, args, newTarget) {
        try {
          send('logWebSocket', { url: urlOf(args[0]) });
        } catch (e) {
          // see applying()
        }
        return Reflect.construct(target, args, newTarget);
      }
    };
  }, 'window.WebSocket');

  // code execution
  hook(G, 'eval', applying(function (self, args) {
    send('logEval', { code: excerpt(args[0]) });
  }), 'window.eval');

  // DOM mutation
  var SIGNIFICANT = { iframe: 1, input: 1, form: 1, script: 1, object: 1, embed: 1, frame: 1, a: 0 };

  function attrSubset(tag, attrs) {
    var keep = tag === 'iframe' || tag === 'frame' ? ['src', 'width', 'height', 'style', 'srcdoc']
      : tag === 'input' ? ['type', 'name', 'id', 'placeholder', 'aria-label', 'autocomplete']
      : tag === 'form' ? ['action', 'method']
      : tag === 'script' ? ['src', 'type']
      : ['id', 'src'];
    var out = {};
    keep.forEach(function (k) {
      if (attrs[k] !== undefined) out[k] = excerpt(attrs[k]);
    });
    return out;
  }

  function reportInsert(parent, node, api) {
    var els = env.elementsOf(node);
    for (var i = 0; i < els.length; i++) {
      var el = els[i];
      var tag = env.tagOf(el);
      var attrs = env.attrsOf(el);
      if (tag === 'script') {
        send('logScriptAppend', { api: api, src: attrs.src === undefined ? null : attrs.src, content: excerpt(el.textContent || '') });
        continue;
      }
      if (i > 0 && !SIGNIFICANT[tag]) continue;
      send('logDomMutation', {
        op: 'insert',
        api: api,
        tag: tag,
        attrs: attrSubset(tag, attrs),
        hidden: i === 0 ? env.hiddenIfInserted(parent, el) : env.hiddenIfInserted(parent, node) || env.isHidden(el)
      });
    }
  }

  if (G.Node) {
    hook(G.Node.prototype, 'appendChild', applying(function (self, args) {
      reportInsert(self, args[0], 'Node.appendChild');
    }), 'Node.appendChild');
    hook(G.Node.prototype, 'insertBefore', applying(function (self, args) {
      reportInsert(self, args[0], 'Node.insertBefore');
    }), 'Node.insertBefore');
    hook(G.Node.prototype, 'removeChild', applying(function (self, args) {
      var tag = env.tagOf(args[0]);
      if (tag) send('logDomMutation', { op: 'remove', api: 'Node.removeChild', tag: tag, attrs: {}, hidden: false });
    }), 'Node.removeChild');
  }
  if (G.Element) {
    hookAccessor(G.Element.prototype, 'innerHTML', null, function () {
      return {
        apply: function (target, self, args) {
          var result = Reflect.apply(target, self, args);
          try {
            var els = env.elementsOf(self).slice(1);
            for (var i = 0; i < els.length; i++) {
              var tag = env.tagOf(els[i]);
              if (!SIGNIFICANT[tag] || tag === 'script') continue;
              send('logDomMutation', { op: 'insert', api: 'Element.innerHTML', tag: tag, attrs: attrSubset(tag, env.attrsOf(els[i])), hidden: env.isHidden(els[i]) });
            }
          } catch (e) {
            // see applying()
          }
          return result;
        }
      };
    }, 'Element.innerHTML');
  }

  // cookies and storage
  if (G.Document) {
    hookAccessor(G.Document.prototype, 'cookie', function () {
      return {
        apply: function (target, self, args) {
          var value = Reflect.apply(target, self, args);
          try {
            var names = String(value).split(';').map(function (c) { return c.split('=')[0].trim(); }).filter(Boolean);
            send('logCookie', { op: 'read', names: names.join(', ') });
          } catch (e) {
            // see applying()
          }
          return value;
        }
      };
    }, applying(function (self, args) {
      send('logCookie', { op: 'write', name: String(args[0]).split(';')[0].split('=')[0].trim() });
    }), 'Document.cookie');
  }

  if (G.Storage) {
    ['getItem', 'setItem', 'removeItem', 'clear'].forEach(function (m) {
      hook(G.Storage.prototype, m, applying(function (self, args) {
        var area = self === G.localStorage ? 'localStorage' : self === G.sessionStorage ? 'sessionStorage' : 'storage';
        var payload = { op: m, api: 'Storage.' + m, area: area };
        if (m !== 'clear') payload.key = excerpt(args[0]);
        send('logStorage', payload);
      }), 'Storage.' + m);
    });
  }

  // timers
  ['setTimeout', 'setInterval'].forEach(function (name) {
    hook(G, name, applying(function (self, args) {
      var payload = { api: 'window.' + name, delay: Number(args[1]) || 0, string_handler: typeof args[0] === 'string' };
      if (typeof args[0] === 'string') payload.code = excerpt(args[0]);
      send('logTimer', payload);
    }), 'window.' + name);
  });

  // listeners
  if (G.EventTarget) {
    hook(G.EventTarget.prototype, 'addEventListener', applying(function (self, args) {
      send('logListener', { op: 'add', api: 'EventTarget.addEventListener', event: String(args[0]), target: env.describe(self) });
    }), 'EventTarget.addEventListener');
    hook(G.EventTarget.prototype, 'removeEventListener', applying(function (self, args) {
      send('logListener', { op: 'remove', api: 'EventTarget.removeEventListener', event: String(args[0]), target: env.describe(self) });
    }), 'EventTarget.removeEventListener');
  }

  function diff() {
    var added = Object.getOwnPropertyNames(G).filter(function (k) { return !baselineSet.has(k); });
    var chunk = [];
    var size = 0;
    for (var i = 0; i < added.length; i++) {
      var name = added[i].length > 256 ? added[i].slice(0, 256) : added[i];
      if (size + name.length + 4 > MAX_PAYLOAD - 64 && chunk.length) {
        send('logGlobalDiff', { added: chunk });
        chunk = [];
        size = 0;
      }
      chunk.push(name);
      size += name.length + 4;
    }
    if (chunk.length || !added.length) send('logGlobalDiff', { added: chunk });
    return added.length;
  }

  function looksNative(fn) {
    var text = Function.prototype.toString.call(fn);
    return /\{\s*\[native code\]\s*\}$/.test(text);
  }

  function check(extra) {
    var pairs = hooks.map(function (h) { return [h.wrapper, h.original]; }).concat(extra || []);
    for (var i = 0; i < pairs.length; i++) {
      var w = pairs[i][0], o = pairs[i][1];
      if (typeof w !== 'function' || !looksNative(w)) return false;
      if (w.name !== o.name || w.length !== o.length) return false;
    }
    return true;
  }

  var api = {
    hooks: hooks,
    warnings: warnings,
    baseline: baseline,
    diff: diff,
    check: check,
    original: function (label) {
      for (var i = 0; i < hooks.length; i++) if (hooks[i].api === label) return hooks[i].original;
      return undefined;
    }
  };
  Object.defineProperty(G, GUARD, { value: api, enumerable: false, configurable: false, writable: false });
  return hooks.length;
})()
