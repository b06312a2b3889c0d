// Minimal browser environment for the sandbox engine.
//
// Evaluates to a function taking the host object and an options JSON string.
// It installs window/document globals and a non-enumerable `__urlscope_env`
// channel that the instrumentation shim and the host use. Page scripts never
// see host objects directly.
(function (host, optsJson) {
  'use strict';
  var G = globalThis;
  var opts = JSON.parse(optsJson);
  var nativeEval = G.eval;
  var NativeFunction = G.Function;
  var NativeDate = G.Date;
  var fnToString = Function.prototype.toString;
  var I = Symbol('node');
  var VIEWPORT_W = 1366, VIEWPORT_H = 768;

  // ---- native-looking functions -------------------------------------------------

  var natives = new WeakMap();
  function native(fn, name) {
    natives.set(fn, name == null ? fn.name : name);
    return fn;
  }
  var toStringImpl = native(function toString() {
    if (natives.has(this)) return 'function ' + natives.get(this) + '() {\n    [native code]\n}';
    return fnToString.call(this);
  });
  Object.defineProperty(Function.prototype, 'toString', { value: toStringImpl, writable: true, configurable: true });

  function nativeClass(C) {
    native(C);
    var p = C.prototype;
    Object.getOwnPropertyNames(p).forEach(function (k) {
      var d = Object.getOwnPropertyDescriptor(p, k);
      if (typeof d.value === 'function' && k !== 'constructor') native(d.value, k);
      if (d.get) native(d.get, 'get ' + k);
      if (d.set) native(d.set, 'set ' + k);
    });
    Object.getOwnPropertyNames(C).forEach(function (k) {
      var d = Object.getOwnPropertyDescriptor(C, k);
      if (typeof d.value === 'function') native(d.value, k);
    });
    return C;
  }

  function def(name, value) {
    Object.defineProperty(G, name, { value: value, writable: true, configurable: true, enumerable: false });
  }

  function emit(type, payload) {
    try {
      host.emit(type, JSON.stringify(payload));
    } catch (e) {
      // payloads are plain data; a failure here must not reach the page
    }
  }

  function count(api) {
    emit('apiCall', { api: api });
  }

  function reportError(where, e) {
    emit('scriptError', { script: where, error: String(e && e.message !== undefined ? e.message : e) });
  }

  // ---- deterministic clock and randomness ---------------------------------------

  var epoch = opts.epoch_ms;
  function now() {
    return host.now();
  }
  var seed = (opts.seed >>> 0) || 0x9e3779b9;
  Math.random = native(function random() {
    seed ^= seed << 13; seed >>>= 0;
    seed ^= seed >>> 17;
    seed ^= seed << 5; seed >>>= 0;
    return seed / 4294967296;
  });
  var VDate = function Date() {
    var args = Array.prototype.slice.call(arguments);
    if (!new.target) return new NativeDate(epoch + now()).toString();
    if (args.length === 0) args = [epoch + now()];
    return Reflect.construct(NativeDate, args, new.target);
  };
  Object.setPrototypeOf(VDate, NativeDate);
  VDate.prototype = NativeDate.prototype;
  Object.defineProperty(NativeDate.prototype, 'constructor', { value: VDate, writable: true, configurable: true });
  Object.defineProperty(VDate, 'now', { value: native(function now_() { return epoch + now(); }, 'now'), writable: true, configurable: true });
  native(VDate, 'Date');
  def('Date', VDate);
  def('performance', {
    now: native(function now_() { return now(); }, 'now'),
    timeOrigin: epoch,
    mark: native(function mark() {}),
    measure: native(function measure() {}),
    getEntriesByType: native(function getEntriesByType() { return []; }),
    getEntriesByName: native(function getEntriesByName() { return []; })
  });

  // ---- timers (virtual) -------------------------------------------------------------

  var timers = [];
  var timerSeq = 0;
  var nextTimerId = 1;

  function schedule(fn, delay, args, interval) {
    var d = Number(delay);
    if (!(d > 0)) d = 0;
    d = Math.max(1, Math.floor(d));
    var id = nextTimerId++;
    timers.push({ id: id, due: now() + d, seq: timerSeq++, fn: fn, args: args, interval: interval ? d : 0 });
    return id;
  }

  function cancel(id) {
    for (var i = 0; i < timers.length; i++) {
      if (timers[i].id === id) { timers.splice(i, 1); return; }
    }
  }

  function earliest() {
    var best = -1;
    for (var i = 0; i < timers.length; i++) {
      var t = timers[i];
      if (best < 0 || t.due < timers[best].due || (t.due === timers[best].due && t.seq < timers[best].seq)) best = i;
    }
    return best;
  }

  function runCallback(fn, args, where) {
    try {
      if (typeof fn === 'function') fn.apply(G, args || []);
      else (0, nativeEval)(String(fn));
    } catch (e) {
      reportError(where, e);
    }
  }

  def('setTimeout', native(function setTimeout(handler, delay) {
    return schedule(handler, delay, Array.prototype.slice.call(arguments, 2), false);
  }));
  def('setInterval', native(function setInterval(handler, delay) {
    return schedule(handler, delay, Array.prototype.slice.call(arguments, 2), true);
  }));
  def('clearTimeout', native(function clearTimeout(id) { cancel(id); }));
  def('clearInterval', native(function clearInterval(id) { cancel(id); }));
  def('requestAnimationFrame', native(function requestAnimationFrame(cb) {
    return schedule(function () { cb(now()); }, 16, [], false);
  }));
  def('cancelAnimationFrame', native(function cancelAnimationFrame(id) { cancel(id); }));
  def('requestIdleCallback', native(function requestIdleCallback(cb) {
    return schedule(function () { cb({ didTimeout: false, timeRemaining: function () { return 50; } }); }, 1, [], false);
  }));

  // ---- events ---------------------------------------------------------------------------

  function st(o) {
    var s = o[I];
    if (!s) {
      s = { listeners: Object.create(null) };
      Object.defineProperty(o, I, { value: s });
    }
    return s;
  }

  class Event {
    constructor(type, init) {
      init = init || {};
      var s = st(this);
      s.type = String(type);
      s.bubbles = !!init.bubbles;
      s.cancelable = !!init.cancelable;
      s.trusted = false;
      s.stopped = false;
      s.prevented = false;
      s.target = null;
      s.current = null;
      s.phase = 0;
      s.time = now();
      for (var k in init) {
        if (!(k in this)) this[k] = init[k];
      }
    }
    get type() { return st(this).type; }
    get bubbles() { return st(this).bubbles; }
    get cancelable() { return st(this).cancelable; }
    get isTrusted() { return st(this).trusted; }
    get target() { return st(this).target; }
    get srcElement() { return st(this).target; }
    get currentTarget() { return st(this).current; }
    get eventPhase() { return st(this).phase; }
    get defaultPrevented() { return st(this).prevented; }
    get timeStamp() { return st(this).time; }
    composedPath() {
      var p = [];
      for (var n = st(this).target; n; n = parentOf(n)) p.push(n);
      return p;
    }
    preventDefault() { if (st(this).cancelable) st(this).prevented = true; }
    stopPropagation() { st(this).stopped = true; }
    stopImmediatePropagation() { st(this).stopped = true; st(this).immediate = true; }
  }
  class UIEvent extends Event {}
  class MouseEvent extends UIEvent {}
  class KeyboardEvent extends UIEvent {}
  class FocusEvent extends UIEvent {}
  class PointerEvent extends MouseEvent {}
  class CustomEvent extends Event {
    constructor(type, init) {
      super(type, init);
      st(this).detail = init && init.detail !== undefined ? init.detail : null;
    }
    get detail() { return st(this).detail; }
  }

  function parentOf(n) {
    if (n === G) return null;
    if (n === document) return G;
    return n[I] && n[I].parent ? n[I].parent : null;
  }

  class EventTarget {
    addEventListener(type, listener, options) {
      if (!listener) return;
      var capture = typeof options === 'boolean' ? options : !!(options && options.capture);
      var once = !!(options && typeof options === 'object' && options.once);
      var l = st(this).listeners;
      var list = l[type] || (l[type] = []);
      for (var i = 0; i < list.length; i++) {
        if (list[i].fn === listener && list[i].capture === capture) return;
      }
      list.push({ fn: listener, capture: capture, once: once });
    }
    removeEventListener(type, listener, options) {
      var capture = typeof options === 'boolean' ? options : !!(options && options.capture);
      var list = st(this).listeners[type];
      if (!list) return;
      for (var i = 0; i < list.length; i++) {
        if (list[i].fn === listener && list[i].capture === capture) { list.splice(i, 1); return; }
      }
    }
    dispatchEvent(event) {
      return dispatch(this, event, false);
    }
  }

  function invoke(node, ev, capturePhase, atTarget) {
    var es = st(ev);
    es.current = node;
    var list = (st(node).listeners[es.type] || []).slice();
    for (var i = 0; i < list.length; i++) {
      var l = list[i];
      if (!atTarget && l.capture !== capturePhase) continue;
      if (l.once) node.removeEventListener(es.type, l.fn, l.capture);
      try {
        if (typeof l.fn === 'function') l.fn.call(node, ev);
        else if (l.fn && typeof l.fn.handleEvent === 'function') l.fn.handleEvent(ev);
      } catch (e) {
        reportError('listener:' + es.type, e);
      }
      if (es.immediate) return;
    }
    if (!capturePhase || atTarget) {
      var h = node['on' + es.type];
      if (typeof h === 'function') {
        try {
          if (h.call(node, ev) === false) es.prevented = es.cancelable;
        } catch (e) {
          reportError('handler:on' + es.type, e);
        }
      }
    }
  }

  function dispatch(target, ev, trusted) {
    var es = st(ev);
    es.target = target;
    es.trusted = !!trusted;
    es.stopped = false;
    var path = [];
    for (var n = parentOf(target); n; n = parentOf(n)) path.push(n);
    es.phase = 1;
    for (var i = path.length - 1; i >= 0 && !es.stopped; i--) invoke(path[i], ev, true, false);
    es.phase = 2;
    if (!es.stopped) invoke(target, ev, false, true);
    if (es.bubbles) {
      es.phase = 3;
      for (var j = 0; j < path.length && !es.stopped; j++) invoke(path[j], ev, false, false);
    }
    es.phase = 0;
    es.current = null;
    return !es.prevented;
  }

  class Window extends EventTarget {}
  Object.setPrototypeOf(G, Window.prototype);

  // ---- nodes ------------------------------------------------------------------------------

  var REFLECTED = {
    id: 'id', className: 'class', src: 'src', href: 'href', type: 'type', name: 'name', value: 'value',
    action: 'action', method: 'method', title: 'title', alt: 'alt', placeholder: 'placeholder', rel: 'rel',
    content: 'content', target: 'target', lang: 'lang', dir: 'dir', srcdoc: 'srcdoc', width: 'width',
    height: 'height', htmlFor: 'for', autocomplete: 'autocomplete', role: 'role', charset: 'charset',
    integrity: 'integrity', crossOrigin: 'crossorigin', enctype: 'enctype', label: 'label'
  };
  var BOOLEAN_ATTRS = ['hidden', 'checked', 'disabled', 'async', 'defer', 'required', 'readOnly', 'multiple', 'selected'];
  var VOID = { area: 1, base: 1, br: 1, col: 1, embed: 1, hr: 1, img: 1, input: 1, link: 1, meta: 1, source: 1, track: 1, wbr: 1 };

  class Node extends EventTarget {
    get nodeType() { return st(this).nodeType; }
    get nodeName() {
      var s = st(this);
      return s.nodeType === 1 ? s.tag.toUpperCase() : s.nodeType === 3 ? '#text' : s.nodeType === 8 ? '#comment' : s.nodeType === 9 ? '#document' : '#document-fragment';
    }
    get parentNode() { return st(this).parent || null; }
    get parentElement() {
      var p = st(this).parent;
      return p && st(p).nodeType === 1 ? p : null;
    }
    get childNodes() { return list((st(this).children || []).slice()); }
    get firstChild() { var c = st(this).children || []; return c[0] || null; }
    get lastChild() { var c = st(this).children || []; return c[c.length - 1] || null; }
    get nextSibling() { return sibling(this, 1); }
    get previousSibling() { return sibling(this, -1); }
    get ownerDocument() { return st(this).nodeType === 9 ? null : document; }
    get isConnected() {
      for (var n = this; n; n = st(n).parent) if (n === document) return true;
      return false;
    }
    get textContent() {
      var s = st(this);
      if (s.nodeType === 3 || s.nodeType === 8) return s.data;
      if (s.nodeType === 9) return null;
      return textOf(this);
    }
    set textContent(v) {
      var s = st(this);
      if (s.nodeType === 3 || s.nodeType === 8) { s.data = String(v); return; }
      clearChildren(this);
      if (v !== null && v !== undefined && String(v) !== '') insertNode(this, makeText(String(v)), null);
    }
    get nodeValue() { var s = st(this); return s.nodeType === 3 || s.nodeType === 8 ? s.data : null; }
    set nodeValue(v) { var s = st(this); if (s.nodeType === 3 || s.nodeType === 8) s.data = String(v); }
    hasChildNodes() { return (st(this).children || []).length > 0; }
    contains(other) {
      for (var n = other; n; n = st(n).parent) if (n === this) return true;
      return false;
    }
    appendChild(child) { return insertNode(this, child, null); }
    insertBefore(child, ref) { return insertNode(this, child, ref || null); }
    removeChild(child) {
      if (!child || st(child).parent !== this) throw new DOMException('The node to be removed is not a child of this node.', 'NotFoundError');
      detach(child);
      return child;
    }
    replaceChild(newChild, oldChild) {
      if (st(oldChild).parent !== this) throw new DOMException('The node to be replaced is not a child of this node.', 'NotFoundError');
      insertNode(this, newChild, oldChild);
      detach(oldChild);
      return oldChild;
    }
    cloneNode(deep) {
      count('Node.cloneNode');
      return cloneInto(this, !!deep);
    }
    getRootNode() {
      var n = this;
      while (st(n).parent) n = st(n).parent;
      return n;
    }
  }

  function list(arr) {
    Object.defineProperty(arr, 'item', { value: function item(i) { return arr[i] || null; } });
    return arr;
  }

  function sibling(node, dir) {
    var p = st(node).parent;
    if (!p) return null;
    var c = st(p).children;
    return c[c.indexOf(node) + dir] || null;
  }

  function textOf(n) {
    var s = st(n);
    if (s.nodeType === 3) return s.data;
    if (s.nodeType === 8) return '';
    var out = '';
    var c = s.children || [];
    for (var i = 0; i < c.length; i++) out += textOf(c[i]);
    return out;
  }

  function clearChildren(n) {
    var c = (st(n).children || []).slice();
    for (var i = 0; i < c.length; i++) detach(c[i]);
  }

  function detach(child) {
    var s = st(child);
    var p = s.parent;
    if (!p) return;
    var c = st(p).children;
    var i = c.indexOf(child);
    if (i >= 0) c.splice(i, 1);
    s.parent = null;
    notify(p, [], [child]);
  }

  var scriptRunner = null;

  function insertNode(parent, child, ref) {
    if (!child || !child[I]) throw new TypeError("Failed to execute 'appendChild' on 'Node': parameter 1 is not of type 'Node'.");
    if (child === parent || child.contains(parent)) throw new DOMException('The new child element contains the parent.', 'HierarchyRequestError');
    if (st(child).nodeType === 11) {
      var kids = st(child).children.slice();
      for (var k = 0; k < kids.length; k++) insertNode(parent, kids[k], ref);
      return child;
    }
    if (st(child).parent) detach(child);
    var ps = st(parent);
    if (!ps.children) ps.children = [];
    var idx = ref ? ps.children.indexOf(ref) : -1;
    if (ref && idx < 0) throw new DOMException('The node before which the new node is to be inserted is not a child of this node.', 'NotFoundError');
    if (idx < 0) ps.children.push(child);
    else ps.children.splice(idx, 0, child);
    st(child).parent = parent;
    notify(parent, [child], []);
    if (scriptRunner && parent.isConnected) scriptRunner(child);
    return child;
  }

  function makeText(data) {
    var t = Object.create(Text.prototype);
    var s = st(t);
    s.nodeType = 3;
    s.data = data;
    s.parent = null;
    return t;
  }

  class CharacterData extends Node {
    get data() { return st(this).data; }
    set data(v) { st(this).data = String(v); }
    get length() { return st(this).data.length; }
  }
  class Text extends CharacterData {
    constructor(data) {
      super();
      var s = st(this);
      s.nodeType = 3;
      s.data = data === undefined ? '' : String(data);
    }
    get wholeText() { return st(this).data; }
  }
  class Comment extends CharacterData {
    constructor(data) {
      super();
      var s = st(this);
      s.nodeType = 8;
      s.data = data === undefined ? '' : String(data);
    }
  }

  // ---- selectors ----------------------------------------------------------------------------

  function selectorError(sel) {
    return new DOMException("'" + sel + "' is not a valid selector.", 'SyntaxError');
  }

  var selectorCache = new Map();

  function parseSelector(src) {
    var cached = selectorCache.get(src);
    if (cached) return cached;
    var groups = [[]];
    var i = 0, n = src.length, comb = ' ', cur = null, sawSpace = false;
    var identRe = /^-?[A-Za-z_ -￿\\][-\w -￿\\]*/;
    function flush() {
      if (cur) { groups[groups.length - 1].push({ comb: comb, c: cur }); cur = null; comb = ' '; }
    }
    function compound() {
      if (!cur) cur = { tag: null, id: null, classes: [], attrs: [], pseudos: [] };
      return cur;
    }
    function ident() {
      var m = identRe.exec(src.slice(i));
      if (!m) throw selectorError(src);
      i += m[0].length;
      return m[0].replace(/\\(.)/g, '$1');
    }
    while (i < n) {
      var ch = src[i];
      if (/\s/.test(ch)) { i++; sawSpace = true; continue; }
      if (ch === '>' || ch === '+' || ch === '~') {
        if (!cur) throw selectorError(src);
        flush(); comb = ch; i++; sawSpace = false; continue;
      }
      if (ch === ',') {
        if (!cur) throw selectorError(src);
        flush(); groups.push([]); i++; sawSpace = false; continue;
      }
      if (sawSpace && cur) flush();
      sawSpace = false;
      var c = compound();
      if (ch === '*') { i++; c.tag = '*'; }
      else if (ch === '#') { i++; c.id = ident(); }
      else if (ch === '.') { i++; c.classes.push(ident()); }
      else if (ch === '[') {
        var close = src.indexOf(']', i);
        if (close < 0) throw selectorError(src);
        var body = src.slice(i + 1, close).trim();
        var am = /^([-\w:]+)\s*(?:([~|^$*]?=)\s*(?:"([^"]*)"|'([^']*)'|([^\s\]]+))(\s+i)?)?$/.exec(body);
        if (!am) throw selectorError(src);
        c.attrs.push({ name: am[1].toLowerCase(), op: am[2] || null, val: am[3] !== undefined ? am[3] : am[4] !== undefined ? am[4] : am[5], ci: !!am[6] });
        i = close + 1;
      } else if (ch === ':') {
        i++;
        if (src[i] === ':') i++;
        var name = ident().toLowerCase();
        var arg = null;
        if (src[i] === '(') {
          var depth = 1, j = i + 1;
          while (j < n && depth) { if (src[j] === '(') depth++; else if (src[j] === ')') depth--; j++; }
          if (depth) throw selectorError(src);
          arg = src.slice(i + 1, j - 1);
          i = j;
        }
        c.pseudos.push({ name: name, arg: arg });
      } else {
        c.tag = ident().toLowerCase();
      }
    }
    if (!cur) throw selectorError(src);
    flush();
    selectorCache.set(src, groups);
    return groups;
  }

  function elParent(el) {
    var p = st(el).parent;
    return p && st(p).nodeType === 1 ? p : null;
  }
  function elSiblings(el) {
    var p = st(el).parent;
    return p ? st(p).children.filter(function (c) { return st(c).nodeType === 1; }) : [el];
  }

  function matchCompound(el, c) {
    var s = st(el);
    if (c.tag && c.tag !== '*' && s.tag !== c.tag) return false;
    if (c.id !== null && getAttr(el, 'id') !== c.id) return false;
    if (c.classes.length) {
      var cls = (getAttr(el, 'class') || '').split(/\s+/);
      for (var i = 0; i < c.classes.length; i++) if (cls.indexOf(c.classes[i]) < 0) return false;
    }
    for (var a = 0; a < c.attrs.length; a++) {
      var at = c.attrs[a];
      var v = getAttr(el, at.name);
      if (v === null) return false;
      if (!at.op) continue;
      var want = at.val;
      if (at.ci) { v = v.toLowerCase(); want = want.toLowerCase(); }
      var ok = at.op === '=' ? v === want
        : at.op === '^=' ? want !== '' && v.indexOf(want) === 0
        : at.op === '$=' ? want !== '' && v.slice(-want.length) === want
        : at.op === '*=' ? want !== '' && v.indexOf(want) >= 0
        : at.op === '~=' ? v.split(/\s+/).indexOf(want) >= 0
        : v === want || v.indexOf(want + '-') === 0;
      if (!ok) return false;
    }
    for (var p = 0; p < c.pseudos.length; p++) {
      var ps = c.pseudos[p];
      var sibs;
      switch (ps.name) {
        case 'first-child': sibs = elSiblings(el); if (sibs[0] !== el) return false; break;
        case 'last-child': sibs = elSiblings(el); if (sibs[sibs.length - 1] !== el) return false; break;
        case 'only-child': if (elSiblings(el).length !== 1) return false; break;
        case 'not': if (matches(el, ps.arg)) return false; break;
        case 'checked': if (getAttr(el, 'checked') === null && getAttr(el, 'selected') === null) return false; break;
        case 'disabled': if (getAttr(el, 'disabled') === null) return false; break;
        case 'enabled': if (getAttr(el, 'disabled') !== null) return false; break;
        case 'root': if (el !== document.documentElement) return false; break;
        case 'scope': break;
        default: return false;
      }
    }
    return true;
  }

  function matchChain(el, g, k) {
    if (!matchCompound(el, g[k].c)) return false;
    if (k === 0) return true;
    var comb = g[k].comb, n;
    if (comb === '>') { n = elParent(el); return !!n && matchChain(n, g, k - 1); }
    if (comb === ' ') {
      for (n = elParent(el); n; n = elParent(n)) if (matchChain(n, g, k - 1)) return true;
      return false;
    }
    var sibs = elSiblings(el);
    var idx = sibs.indexOf(el);
    if (comb === '+') return idx > 0 && matchChain(sibs[idx - 1], g, k - 1);
    for (var j = idx - 1; j >= 0; j--) if (matchChain(sibs[j], g, k - 1)) return true;
    return false;
  }

  function matches(el, sel) {
    var groups = parseSelector(String(sel));
    for (var i = 0; i < groups.length; i++) if (matchChain(el, groups[i], groups[i].length - 1)) return true;
    return false;
  }

  function descendants(root, pred, firstOnly) {
    var out = [];
    var stack = (st(root).children || []).slice().reverse();
    while (stack.length) {
      var n = stack.pop();
      if (st(n).nodeType !== 1) continue;
      if (pred(n)) {
        out.push(n);
        if (firstOnly) return out;
      }
      var c = st(n).children;
      for (var i = c.length - 1; i >= 0; i--) stack.push(c[i]);
    }
    return out;
  }

  function select(root, sel, firstOnly) {
    parseSelector(String(sel));
    return descendants(root, function (el) { return matches(el, sel); }, firstOnly);
  }

  // ---- elements -----------------------------------------------------------------------------

  function getAttr(el, name) {
    var attrs = st(el).attrs;
    for (var i = 0; i < attrs.length; i++) if (attrs[i][0] === name) return attrs[i][1];
    return null;
  }
  function setAttr(el, name, value) {
    var attrs = st(el).attrs;
    value = String(value);
    for (var i = 0; i < attrs.length; i++) {
      if (attrs[i][0] === name) { attrs[i][1] = value; return; }
    }
    attrs.push([name, value]);
  }
  function removeAttr(el, name) {
    var attrs = st(el).attrs;
    for (var i = 0; i < attrs.length; i++) {
      if (attrs[i][0] === name) { attrs.splice(i, 1); return; }
    }
  }

  function parseStyle(text) {
    var out = {};
    String(text || '').split(';').forEach(function (decl) {
      var k = decl.indexOf(':');
      if (k < 0) return;
      var name = decl.slice(0, k).trim().toLowerCase();
      var v = decl.slice(k + 1).trim().replace(/!important$/, '').trim().toLowerCase();
      if (name) out[name] = v;
    });
    return out;
  }
  function styleText(map) {
    return Object.keys(map).map(function (k) { return k + ': ' + map[k]; }).join('; ');
  }
  function cssName(prop) {
    return prop.replace(/[A-Z]/g, function (m) { return '-' + m.toLowerCase(); });
  }

  class CSSStyleDeclaration {
    getPropertyValue(name) {
      var v = parseStyle(getAttr(st(this).el, 'style'))[String(name).toLowerCase()];
      return v === undefined ? '' : v;
    }
    setProperty(name, value) {
      var el = st(this).el;
      var map = parseStyle(getAttr(el, 'style'));
      name = String(name).toLowerCase();
      if (value === null || value === undefined || value === '') delete map[name];
      else map[name] = String(value).trim().toLowerCase();
      setAttr(el, 'style', styleText(map));
    }
    removeProperty(name) {
      var old = this.getPropertyValue(name);
      this.setProperty(name, '');
      return old;
    }
    get cssText() { return getAttr(st(this).el, 'style') || ''; }
    set cssText(v) { setAttr(st(this).el, 'style', String(v)); }
  }
  ['display', 'visibility', 'width', 'height', 'position', 'left', 'top', 'right', 'bottom', 'opacity', 'zIndex', 'overflow',
    'color', 'background', 'backgroundColor', 'border', 'margin', 'padding', 'fontSize', 'transform', 'pointerEvents', 'cursor'].forEach(function (prop) {
    var css = cssName(prop);
    Object.defineProperty(CSSStyleDeclaration.prototype, prop, {
      get: function () { return this.getPropertyValue(css); },
      set: function (v) { this.setProperty(css, typeof v === 'number' && css !== 'opacity' && css !== 'z-index' ? v + 'px' : v); },
      configurable: true
    });
  });

  function styleOf(el) {
    var s = st(el);
    if (!s.style) {
      s.style = Object.create(CSSStyleDeclaration.prototype);
      st(s.style).el = el;
    }
    return s.style;
  }

  var pendingTag = null;
  var customRegistry = new Map();
  var customByCtor = new Map();

  class Element extends Node {
    constructor() {
      super();
      var tag = pendingTag;
      pendingTag = null;
      if (!tag) tag = customByCtor.get(new.target) || 'div';
      var s = st(this);
      s.nodeType = 1;
      s.tag = tag;
      s.attrs = [];
      s.children = [];
      s.parent = null;
    }
    get tagName() { return st(this).tag.toUpperCase(); }
    get localName() { return st(this).tag; }
    get attributes() {
      return list(st(this).attrs.map(function (a) { return { name: a[0], value: a[1], nodeName: a[0], nodeValue: a[1] }; }));
    }
    getAttribute(name) { return getAttr(this, String(name).toLowerCase()); }
    setAttribute(name, value) { setAttr(this, String(name).toLowerCase(), value); }
    removeAttribute(name) { removeAttr(this, String(name).toLowerCase()); }
    hasAttribute(name) { return getAttr(this, String(name).toLowerCase()) !== null; }
    hasAttributes() { return st(this).attrs.length > 0; }
    getAttributeNames() { return st(this).attrs.map(function (a) { return a[0]; }); }
    toggleAttribute(name, force) {
      name = String(name).toLowerCase();
      var has = getAttr(this, name) !== null;
      var want = force === undefined ? !has : !!force;
      if (want && !has) setAttr(this, name, '');
      if (!want && has) removeAttr(this, name);
      return want;
    }
    get children() { return list(st(this).children.filter(function (c) { return st(c).nodeType === 1; })); }
    get childElementCount() { return this.children.length; }
    get firstElementChild() { return this.children[0] || null; }
    get lastElementChild() { var c = this.children; return c[c.length - 1] || null; }
    get nextElementSibling() {
      var s = elSiblings(this); return s[s.indexOf(this) + 1] || null;
    }
    get previousElementSibling() {
      var s = elSiblings(this); return s[s.indexOf(this) - 1] || null;
    }
    get classList() {
      var el = this;
      function get() { return (getAttr(el, 'class') || '').split(/\s+/).filter(Boolean); }
      function put(c) { setAttr(el, 'class', c.join(' ')); }
      return {
        add: function () { var c = get(); for (var i = 0; i < arguments.length; i++) if (c.indexOf(arguments[i]) < 0) c.push(arguments[i]); put(c); },
        remove: function () { var rm = Array.prototype.slice.call(arguments); put(get().filter(function (x) { return rm.indexOf(x) < 0; })); },
        contains: function (x) { return get().indexOf(x) >= 0; },
        toggle: function (x, force) {
          var has = get().indexOf(x) >= 0;
          var want = force === undefined ? !has : !!force;
          if (want && !has) this.add(x);
          if (!want && has) this.remove(x);
          return want;
        },
        get length() { return get().length; },
        item: function (i) { return get()[i] || null; },
        toString: function () { return get().join(' '); }
      };
    }
    get style() { return styleOf(this); }
    set style(v) { setAttr(this, 'style', String(v)); }
    get dataset() {
      var el = this;
      return new Proxy({}, {
        get: function (_, k) { return typeof k === 'string' ? (getAttr(el, 'data-' + cssName(k)) || undefined) : undefined; },
        set: function (_, k, v) { setAttr(el, 'data-' + cssName(String(k)), v); return true; }
      });
    }
    get innerHTML() { return st(this).children.map(serializeHtml).join(''); }
    set innerHTML(html) {
      clearChildren(this);
      var nodes = build(JSON.parse(host.parseHtml(String(html))));
      for (var i = 0; i < nodes.length; i++) insertRaw(this, nodes[i]);
    }
    get outerHTML() { return serializeHtml(this); }
    get innerText() { return textOf(this); }
    set innerText(v) { this.textContent = v; }
    insertAdjacentHTML(position, html) {
      var nodes = build(JSON.parse(host.parseHtml(String(html))));
      var pos = String(position).toLowerCase();
      var parent = pos === 'beforebegin' || pos === 'afterend' ? st(this).parent : this;
      if (!parent) return;
      var ref = pos === 'beforebegin' ? this : pos === 'afterend' ? this.nextSibling : pos === 'afterbegin' ? this.firstChild : null;
      for (var i = 0; i < nodes.length; i++) insertNode(parent, nodes[i], ref);
    }
    append() {
      for (var i = 0; i < arguments.length; i++) {
        var a = arguments[i];
        insertNode(this, a && a[I] ? a : makeText(String(a)), null);
      }
    }
    prepend() {
      var first = this.firstChild;
      for (var i = 0; i < arguments.length; i++) {
        var a = arguments[i];
        insertNode(this, a && a[I] ? a : makeText(String(a)), first);
      }
    }
    remove() { if (st(this).parent) detach(this); }
    before(n) { var p = st(this).parent; if (p) insertNode(p, n && n[I] ? n : makeText(String(n)), this); }
    after(n) { var p = st(this).parent; if (p) insertNode(p, n && n[I] ? n : makeText(String(n)), this.nextSibling); }
    replaceWith(n) { var p = st(this).parent; if (p) { insertNode(p, n && n[I] ? n : makeText(String(n)), this); detach(this); } }
    querySelector(sel) { count('Element.querySelector'); return select(this, sel, true)[0] || null; }
    querySelectorAll(sel) { count('Element.querySelectorAll'); return list(select(this, sel, false)); }
    getElementsByTagName(tag) {
      tag = String(tag).toLowerCase();
      return list(descendants(this, function (el) { return tag === '*' || st(el).tag === tag; }));
    }
    getElementsByClassName(names) {
      var want = String(names).split(/\s+/).filter(Boolean);
      return list(descendants(this, function (el) {
        var cls = (getAttr(el, 'class') || '').split(/\s+/);
        return want.every(function (w) { return cls.indexOf(w) >= 0; });
      }));
    }
    matches(sel) { return matches(this, sel); }
    closest(sel) {
      for (var n = this; n && st(n).nodeType === 1; n = st(n).parent) if (matches(n, sel)) return n;
      return null;
    }
    getBoundingClientRect() {
      var b = box(this);
      var w = b.width === null ? 0 : b.width, h = b.height === null ? 0 : b.height;
      return { x: b.left, y: b.top, left: b.left, top: b.top, width: w, height: h, right: b.left + w, bottom: b.top + h };
    }
    get offsetWidth() { var b = box(this); return isHidden(this) ? 0 : b.width === null ? 100 : b.width; }
    get offsetHeight() { var b = box(this); return isHidden(this) ? 0 : b.height === null ? 20 : b.height; }
    get clientWidth() { return this.offsetWidth; }
    get clientHeight() { return this.offsetHeight; }
    get offsetParent() { return isHidden(this) ? null : elParent(this); }
    click() { dispatch(this, new MouseEvent('click', { bubbles: true, cancelable: true }), false); }
    focus() {}
    blur() {}
    scrollIntoView() {}
    attachShadow() { var frag = document.createDocumentFragment(); return frag; }
  }
  Object.keys(REFLECTED).forEach(function (prop) {
    var attr = REFLECTED[prop];
    Object.defineProperty(Element.prototype, prop, {
      get: function () { var v = getAttr(this, attr); return v === null ? '' : v; },
      set: function (v) { setAttr(this, attr, v); },
      configurable: true
    });
  });
  BOOLEAN_ATTRS.forEach(function (prop) {
    var attr = prop.toLowerCase();
    Object.defineProperty(Element.prototype, prop, {
      get: function () { return getAttr(this, attr) !== null; },
      set: function (v) { if (v) setAttr(this, attr, ''); else removeAttr(this, attr); },
      configurable: true
    });
  });

  class HTMLElement extends Element {}
  var TAG_CLASSES = {
    a: 'HTMLAnchorElement', body: 'HTMLBodyElement', button: 'HTMLButtonElement', canvas: 'HTMLCanvasElement',
    div: 'HTMLDivElement', form: 'HTMLFormElement', head: 'HTMLHeadElement', html: 'HTMLHtmlElement',
    iframe: 'HTMLIFrameElement', img: 'HTMLImageElement', input: 'HTMLInputElement', label: 'HTMLLabelElement',
    li: 'HTMLLIElement', link: 'HTMLLinkElement', meta: 'HTMLMetaElement', p: 'HTMLParagraphElement',
    script: 'HTMLScriptElement', select: 'HTMLSelectElement', span: 'HTMLSpanElement', style: 'HTMLStyleElement',
    template: 'HTMLTemplateElement', textarea: 'HTMLTextAreaElement', title: 'HTMLTitleElement', ul: 'HTMLUListElement',
    option: 'HTMLOptionElement', video: 'HTMLVideoElement', audio: 'HTMLAudioElement', object: 'HTMLObjectElement', embed: 'HTMLEmbedElement'
  };
  var classByTag = {};
  var htmlClasses = [HTMLElement];
  Object.keys(TAG_CLASSES).forEach(function (tag) {
    var C = class extends HTMLElement {};
    Object.defineProperty(C, 'name', { value: TAG_CLASSES[tag] });
    classByTag[tag] = C;
    htmlClasses.push(C);
  });
  class HTMLUnknownElement extends HTMLElement {}
  htmlClasses.push(HTMLUnknownElement);

  Object.defineProperty(classByTag.iframe.prototype, 'contentWindow', { get: function () { return null; }, configurable: true });
  Object.defineProperty(classByTag.iframe.prototype, 'contentDocument', { get: function () { return null; }, configurable: true });
  Object.defineProperty(classByTag.form.prototype, 'elements', {
    get: function () { return list(descendants(this, function (el) { return ['input', 'select', 'textarea', 'button'].indexOf(st(el).tag) >= 0; })); },
    configurable: true
  });
  classByTag.form.prototype.submit = function submit() { emit('navigate', { url: getAttr(this, 'action') || '', api: 'HTMLFormElement.submit' }); };
  classByTag.form.prototype.reset = function reset() {};
  Object.defineProperty(classByTag.script.prototype, 'text', {
    get: function () { return textOf(this); },
    set: function (v) { this.textContent = v; },
    configurable: true
  });
  Object.defineProperty(classByTag.template.prototype, 'content', {
    get: function () {
      var frag = document.createDocumentFragment();
      st(this).children.forEach(function (c) { insertRaw(frag, cloneInto(c, true)); });
      return frag;
    },
    configurable: true
  });

  function classFor(tag) {
    if (customRegistry.has(tag)) return customRegistry.get(tag);
    if (classByTag[tag]) return classByTag[tag];
    return tag.indexOf('-') > 0 ? HTMLElement : HTMLUnknownElement;
  }

  function createEl(tag) {
    tag = String(tag).toLowerCase();
    var C = classFor(tag);
    pendingTag = tag;
    try {
      return new C();
    } catch (e) {
      pendingTag = tag;
      var el = new (classByTag[tag] || HTMLUnknownElement)();
      reportError('customElement:' + tag, e);
      return el;
    } finally {
      pendingTag = null;
    }
  }

  class DocumentFragment extends Node {
    constructor() {
      super();
      var s = st(this);
      s.nodeType = 11;
      s.children = [];
    }
    get children() { return list(st(this).children.filter(function (c) { return st(c).nodeType === 1; })); }
    querySelector(sel) { return select(this, sel, true)[0] || null; }
    querySelectorAll(sel) { return list(select(this, sel, false)); }
    getElementById(id) { return descendants(this, function (el) { return getAttr(el, 'id') === String(id); }, true)[0] || null; }
    append() { Element.prototype.append.apply(this, arguments); }
  }

  function insertRaw(parent, child) {
    var ps = st(parent);
    ps.children.push(child);
    st(child).parent = parent;
  }

  function build(nodes) {
    return nodes.map(function (n) {
      if (n.text !== undefined) return makeText(n.text);
      var el = createEl(n.tag);
      (n.attrs || []).forEach(function (a) { setAttr(el, a[0], a[1]); });
      build(n.children || []).forEach(function (c) { insertRaw(el, c); });
      return el;
    });
  }

  function cloneInto(node, deep) {
    var s = st(node);
    if (s.nodeType === 3) return makeText(s.data);
    if (s.nodeType === 8) return new Comment(s.data);
    var copy = s.nodeType === 11 ? new DocumentFragment() : createEl(s.tag);
    if (s.attrs) st(copy).attrs = s.attrs.map(function (a) { return [a[0], a[1]]; });
    if (deep) s.children.forEach(function (c) { insertRaw(copy, cloneInto(c, true)); });
    return copy;
  }

  function escapeText(s) { return s.replace(/&/g, '&amp;').replace(/</g, '&lt;').replace(/>/g, '&gt;'); }
  function escapeAttr(s) { return s.replace(/&/g, '&amp;').replace(/"/g, '&quot;'); }

  function serializeHtml(n) {
    var s = st(n);
    if (s.nodeType === 3) {
      var p = s.parent && st(s.parent).tag;
      return p === 'script' || p === 'style' ? s.data : escapeText(s.data);
    }
    if (s.nodeType === 8) return '<!--' + s.data + '-->';
    if (s.nodeType === 11) return s.children.map(serializeHtml).join('');
    var open = '<' + s.tag + s.attrs.map(function (a) { return ' ' + a[0] + '="' + escapeAttr(a[1]) + '"'; }).join('') + '>';
    if (VOID[s.tag]) return open;
    return open + s.children.map(serializeHtml).join('') + '</' + s.tag + '>';
  }

  // ---- hidden heuristic (mirrors sandbox/dom.rs) ---------------------------------------------

  function parseLength(v) {
    if (v === null || v === undefined) return null;
    v = String(v).trim();
    if (v.slice(-2) === 'px') v = v.slice(0, -2).trim();
    if (!/^[-+]?(\d+\.?\d*|\.\d+)(e[-+]?\d+)?$/i.test(v)) return null;
    var n = Number(v);
    return isFinite(n) ? n : null;
  }

  function box(el) {
    var style = parseStyle(getAttr(el, 'style'));
    function dim(k) {
      var v = parseLength(style[k]);
      return v !== null ? v : parseLength(getAttr(el, k));
    }
    return {
      style: style,
      width: dim('width'),
      height: dim('height'),
      left: parseLength(style.left) || 0,
      top: parseLength(style.top) || 0
    };
  }

  function ownState(el, parentHidden, inheritedInvisible) {
    var b = box(el);
    var st_ = b.style;
    var vis = st_.visibility;
    var invisible = vis === 'hidden' || vis === 'collapse' ? true : vis === 'visible' ? false : inheritedInvisible;
    var w = b.width === null ? VIEWPORT_W : b.width;
    var h = b.height === null ? VIEWPORT_H : b.height;
    var positioned = st_.position === 'absolute' || st_.position === 'fixed';
    var offScreen = positioned && (b.left >= VIEWPORT_W || b.top >= VIEWPORT_H || b.left + w <= 0 || b.top + h <= 0);
    var zero = b.width === 0 || b.height === 0;
    var sub = parentHidden || getAttr(el, 'hidden') !== null || st_.display === 'none' || zero || offScreen;
    return [sub, invisible];
  }

  function stateOf(el) {
    var chain = [];
    for (var n = el; n && st(n).nodeType === 1; n = st(n).parent) chain.unshift(n);
    var state = [false, false];
    for (var i = 0; i < chain.length; i++) state = ownState(chain[i], state[0], state[1]);
    return state;
  }

  function isHidden(el) {
    var s = stateOf(el);
    return s[0] || s[1];
  }

  // ---- document -------------------------------------------------------------------------------

  var cookieJar = [];

  class Document extends Node {
    get documentElement() { return descendants(this, function () { return true; }, true)[0] || null; }
    get head() { return descendants(this, function (el) { return st(el).tag === 'head'; }, true)[0] || null; }
    get body() { return descendants(this, function (el) { return st(el).tag === 'body'; }, true)[0] || null; }
    get title() {
      var t = descendants(this, function (el) { return st(el).tag === 'title'; }, true)[0];
      return t ? textOf(t).replace(/\s+/g, ' ').trim() : '';
    }
    set title(v) {
      var t = descendants(this, function (el) { return st(el).tag === 'title'; }, true)[0];
      if (!t) {
        t = createEl('title');
        var head = this.head;
        if (head) insertRaw(head, t);
      }
      t.textContent = v;
    }
    get cookie() {
      return cookieJar.map(function (c) { return c[0] + '=' + c[1]; }).join('; ');
    }
    set cookie(v) {
      var parts = String(v).split(';');
      var eq = parts[0].indexOf('=');
      var name = (eq < 0 ? '' : parts[0].slice(0, eq)).trim();
      var value = (eq < 0 ? parts[0] : parts[0].slice(eq + 1)).trim();
      var expired = parts.slice(1).some(function (p) {
        var kv = p.split('=');
        var k = kv[0].trim().toLowerCase();
        if (k === 'max-age') return Number(kv[1]) <= 0;
        if (k === 'expires') return NativeDate.parse(kv.slice(1).join('=')) < epoch + now();
        return false;
      });
      for (var i = 0; i < cookieJar.length; i++) {
        if (cookieJar[i][0] === name) {
          if (expired) cookieJar.splice(i, 1);
          else cookieJar[i][1] = value;
          return;
        }
      }
      if (!expired) cookieJar.push([name, value]);
    }
    get readyState() { return readyState; }
    get location() { return location; }
    get URL() { return opts.url; }
    get documentURI() { return opts.url; }
    get domain() { return opts.host; }
    get referrer() { return ''; }
    get defaultView() { return G; }
    get visibilityState() { return 'visible'; }
    get hidden() { return false; }
    get characterSet() { return 'UTF-8'; }
    get compatMode() { return 'CSS1Compat'; }
    get currentScript() { return currentScript; }
    get forms() { return this.getElementsByTagName('form'); }
    get scripts() { return this.getElementsByTagName('script'); }
    get images() { return this.getElementsByTagName('img'); }
    get links() { return list(select(this, 'a[href]', false)); }
    get activeElement() { return this.body; }
    createElement(tag) { count('Document.createElement'); return createEl(tag); }
    createElementNS(ns, tag) { count('Document.createElement'); return createEl(String(tag).replace(/^.*:/, '')); }
    createTextNode(data) { return makeText(String(data)); }
    createComment(data) { return new Comment(data); }
    createDocumentFragment() { return new DocumentFragment(); }
    createEvent(kind) { return new Event(''); }
    getElementById(id) {
      count('Document.getElementById');
      id = String(id);
      return descendants(this, function (el) { return getAttr(el, 'id') === id; }, true)[0] || null;
    }
    getElementsByTagName(tag) {
      count('Document.getElementsByTagName');
      tag = String(tag).toLowerCase();
      return list(descendants(this, function (el) { return tag === '*' || st(el).tag === tag; }));
    }
    getElementsByClassName(names) {
      count('Document.getElementsByClassName');
      return Element.prototype.getElementsByClassName.call(this, names);
    }
    getElementsByName(name) {
      return list(descendants(this, function (el) { return getAttr(el, 'name') === String(name); }));
    }
    querySelector(sel) { count('Document.querySelector'); return select(this, sel, true)[0] || null; }
    querySelectorAll(sel) { count('Document.querySelectorAll'); return list(select(this, sel, false)); }
    write() {
      count('Document.write');
      var html = Array.prototype.join.call(arguments, '');
      var body = this.body || this.documentElement || this;
      var nodes = build(JSON.parse(host.parseHtml(html)));
      for (var i = 0; i < nodes.length; i++) insertNode(body, nodes[i], null);
    }
    writeln() { this.write(Array.prototype.join.call(arguments, '') + '\n'); }
    open() { return this; }
    close() {}
    hasFocus() { return true; }
    execCommand() { return false; }
  }
  class HTMLDocument extends Document {}

  var document = Object.create(HTMLDocument.prototype);
  (function () {
    var s = st(document);
    s.nodeType = 9;
    s.children = [];
    s.parent = null;
  })();
  var readyState = 'loading';
  var currentScript = null;

  // ---- storage, navigator, location, screen -------------------------------------------------

  class Storage {
    get length() { return st(this).keys.length; }
    key(i) { return st(this).keys[i] === undefined ? null : st(this).keys[i]; }
    getItem(k) {
      var s = st(this);
      k = String(k);
      return Object.prototype.hasOwnProperty.call(s.map, k) ? s.map[k] : null;
    }
    setItem(k, v) {
      var s = st(this);
      k = String(k);
      if (!Object.prototype.hasOwnProperty.call(s.map, k)) s.keys.push(k);
      s.map[k] = String(v);
    }
    removeItem(k) {
      var s = st(this);
      k = String(k);
      if (Object.prototype.hasOwnProperty.call(s.map, k)) {
        delete s.map[k];
        s.keys.splice(s.keys.indexOf(k), 1);
      }
    }
    clear() {
      var s = st(this);
      s.map = Object.create(null);
      s.keys = [];
    }
  }
  function makeStorage() {
    var s = Object.create(Storage.prototype);
    st(s).map = Object.create(null);
    st(s).keys = [];
    return s;
  }

  class Geolocation {
    getCurrentPosition(success, error) {
      emit('geolocation', { api: 'Geolocation.getCurrentPosition' });
      deny(error);
    }
    watchPosition(success, error) {
      emit('geolocation', { api: 'Geolocation.watchPosition' });
      deny(error);
      return 1;
    }
    clearWatch() {}
  }
  function deny(error) {
    if (typeof error === 'function') {
      Promise.resolve().then(function () {
        runCallback(error, [{ code: 1, message: 'User denied Geolocation', PERMISSION_DENIED: 1 }], 'geolocation');
      });
    }
  }

  class Navigator {
    get userAgent() { return opts.user_agent; }
    get appVersion() { return opts.user_agent.replace(/^Mozilla\//, ''); }
    get appName() { return 'Netscape'; }
    get appCodeName() { return 'Mozilla'; }
    get product() { return 'Gecko'; }
    get vendor() { return 'Google Inc.'; }
    get platform() { return 'Win32'; }
    get language() { return 'en-US'; }
    get languages() { return ['en-US', 'en']; }
    get webdriver() { return false; }
    get cookieEnabled() { return true; }
    get onLine() { return true; }
    get doNotTrack() { return null; }
    get hardwareConcurrency() { return 8; }
    get deviceMemory() { return 8; }
    get maxTouchPoints() { return 0; }
    get plugins() { return list([]); }
    get mimeTypes() { return list([]); }
    get geolocation() { return geolocation; }
    sendBeacon(url, data) {
      emit('beacon', { url: String(url), api: 'navigator.sendBeacon' });
      return true;
    }
    javaEnabled() { return false; }
  }
  var geolocation = Object.create(Geolocation.prototype);
  var navigator = Object.create(Navigator.prototype);

  class Location {
    get href() { return opts.url; }
    set href(v) { emit('navigate', { url: String(v), api: 'Location.assign' }); }
    get protocol() { return opts.scheme + ':'; }
    get host() { return opts.host_port; }
    get hostname() { return opts.host; }
    get port() { return opts.port; }
    get pathname() { return opts.path; }
    get search() { return opts.search; }
    get hash() { return opts.hash; }
    get origin() { return opts.origin; }
    assign(u) { emit('navigate', { url: String(u), api: 'Location.assign' }); }
    replace(u) { emit('navigate', { url: String(u), api: 'Location.replace' }); }
    reload() {}
    toString() { return opts.url; }
  }
  var location = Object.create(Location.prototype);

  var screen = {
    width: VIEWPORT_W, height: VIEWPORT_H, availWidth: VIEWPORT_W, availHeight: VIEWPORT_H - 40,
    colorDepth: 24, pixelDepth: 24, orientation: { type: 'landscape-primary', angle: 0 }
  };

  // ---- network stubs ----------------------------------------------------------------------------

  class Headers {
    constructor(init) {
      var m = st(this).map = {};
      if (init && typeof init === 'object') Object.keys(init).forEach(function (k) { m[k.toLowerCase()] = String(init[k]); });
    }
    get(k) { var v = st(this).map[String(k).toLowerCase()]; return v === undefined ? null : v; }
    set(k, v) { st(this).map[String(k).toLowerCase()] = String(v); }
    has(k) { return String(k).toLowerCase() in st(this).map; }
    append(k, v) { this.set(k, v); }
    forEach(cb) { var m = st(this).map; Object.keys(m).forEach(function (k) { cb(m[k], k); }); }
  }

  class Response {
    constructor(body, init) {
      var s = st(this);
      s.body = body === undefined || body === null ? '' : String(body);
      s.status = init && init.status !== undefined ? init.status : 200;
      s.url = init && init.url || '';
      s.headers = new Headers(init && init.headers);
    }
    get ok() { return st(this).status >= 200 && st(this).status < 300; }
    get status() { return st(this).status; }
    get statusText() { return st(this).status === 204 ? 'No Content' : 'OK'; }
    get url() { return st(this).url; }
    get headers() { return st(this).headers; }
    get redirected() { return false; }
    text() { return Promise.resolve(st(this).body); }
    json() {
      var body = st(this).body;
      return new Promise(function (res) { res(JSON.parse(body)); });
    }
    arrayBuffer() { return Promise.resolve(new ArrayBuffer(0)); }
    blob() { return Promise.resolve({ size: st(this).body.length, type: '' }); }
    clone() { return new Response(st(this).body, { status: st(this).status, url: st(this).url }); }
  }

  class Request {
    constructor(input, init) {
      var s = st(this);
      s.url = typeof input === 'string' ? input : input && input.url ? input.url : String(input);
      s.method = (init && init.method || (input && input.method) || 'GET').toUpperCase();
    }
    get url() { return st(this).url; }
    get method() { return st(this).method; }
  }

  function lookup(url) {
    var body = host.resource(String(url));
    return body === null || body === undefined ? new Response('', { status: 204, url: String(url) }) : new Response(body, { status: 200, url: String(url) });
  }

  var fetchImpl = function fetch(input, init) {
    var url = typeof input === 'string' ? input : input && input.url ? input.url : String(input);
    return Promise.resolve(lookup(url));
  };

  class XMLHttpRequest extends EventTarget {
    constructor() {
      super();
      var s = st(this);
      s.readyState = 0;
      s.status = 0;
      s.responseText = '';
      s.headers = {};
    }
    get readyState() { return st(this).readyState; }
    get status() { return st(this).status; }
    get statusText() { return st(this).status === 204 ? 'No Content' : st(this).status ? 'OK' : ''; }
    get responseText() { return st(this).responseText; }
    get response() { return st(this).responseText; }
    get responseURL() { return st(this).url || ''; }
    open(method, url) {
      var s = st(this);
      s.method = String(method).toUpperCase();
      s.url = String(url);
      s.readyState = 1;
    }
    setRequestHeader(k, v) { st(this).headers[String(k)] = String(v); }
    getResponseHeader() { return null; }
    getAllResponseHeaders() { return ''; }
    overrideMimeType() {}
    abort() { st(this).readyState = 0; }
    send() {
      var xhr = this;
      var s = st(this);
      if (s.readyState !== 1) throw new DOMException("Failed to execute 'send' on 'XMLHttpRequest': The object's state must be OPENED.", 'InvalidStateError');
      Promise.resolve().then(function () {
        var r = lookup(s.url);
        s.status = r.status;
        s.responseText = st(r).body;
        s.readyState = 4;
        dispatch(xhr, new Event('readystatechange'), false);
        dispatch(xhr, new Event('load'), false);
        dispatch(xhr, new Event('loadend'), false);
      });
    }
  }
  XMLHttpRequest.UNSENT = 0; XMLHttpRequest.OPENED = 1; XMLHttpRequest.HEADERS_RECEIVED = 2; XMLHttpRequest.LOADING = 3; XMLHttpRequest.DONE = 4;

  class WebSocket extends EventTarget {
    constructor(url, protocols) {
      super();
      var s = st(this);
      s.url = String(url);
      s.readyState = 0;
    }
    get url() { return st(this).url; }
    get readyState() { return st(this).readyState; }
    get protocol() { return ''; }
    get bufferedAmount() { return 0; }
    send() {}
    close() { st(this).readyState = 3; }
  }
  WebSocket.CONNECTING = 0; WebSocket.OPEN = 1; WebSocket.CLOSING = 2; WebSocket.CLOSED = 3;

  class Image extends HTMLElement {
    constructor(w, h) {
      pendingTag = 'img';
      super();
      if (w !== undefined) setAttr(this, 'width', w);
      if (h !== undefined) setAttr(this, 'height', h);
    }
  }

  // ---- observers and misc ------------------------------------------------------------------------

  var observers = [];
  class MutationObserver {
    constructor(cb) {
      st(this).cb = cb;
      st(this).targets = [];
      st(this).records = [];
    }
    observe(target, options) {
      var s = st(this);
      s.targets.push({ node: target, subtree: !!(options && options.subtree) });
      if (observers.indexOf(this) < 0) observers.push(this);
    }
    disconnect() {
      var i = observers.indexOf(this);
      if (i >= 0) observers.splice(i, 1);
      st(this).targets = [];
    }
    takeRecords() {
      var r = st(this).records;
      st(this).records = [];
      return r;
    }
  }

  function notify(parent, added, removed) {
    for (var i = 0; i < observers.length; i++) {
      var mo = observers[i];
      var s = st(mo);
      var hit = s.targets.some(function (t) { return t.node === parent || (t.subtree && t.node.contains(parent)); });
      if (!hit) continue;
      s.records.push({ type: 'childList', target: parent, addedNodes: list(added), removedNodes: list(removed) });
      if (!s.queued) {
        s.queued = true;
        Promise.resolve().then(function (mo_, s_) {
          return function () {
            s_.queued = false;
            var recs = mo_.takeRecords();
            if (recs.length) runCallback(s_.cb, [recs, mo_], 'MutationObserver');
          };
        }(mo, s));
      }
    }
  }

  class IntersectionObserver {
    constructor() {}
    observe() {}
    unobserve() {}
    disconnect() {}
    takeRecords() { return []; }
  }
  class ResizeObserver extends IntersectionObserver {}

  class CustomElementRegistry {
    define(name, ctor) {
      name = String(name).toLowerCase();
      if (customRegistry.has(name)) throw new DOMException("the name '" + name + "' has already been used with this registry", 'NotSupportedError');
      customRegistry.set(name, ctor);
      customByCtor.set(ctor, name);
    }
    get(name) { return customRegistry.get(String(name).toLowerCase()); }
    whenDefined(name) { return Promise.resolve(customRegistry.get(String(name).toLowerCase())); }
  }

  class DOMException extends Error {
    constructor(message, name) {
      super(message);
      Object.defineProperty(this, 'name', { value: name || 'Error', configurable: true, writable: true });
    }
  }

  var consoleObj = {};
  ['log', 'info', 'warn', 'error', 'debug', 'trace', 'dir', 'table', 'group', 'groupEnd', 'time', 'timeEnd', 'assert', 'clear', 'count'].forEach(function (k) {
    consoleObj[k] = native(function () {}, k);
  });

  function getComputedStyle(el) {
    var b = box(el);
    var out = {};
    Object.keys(b.style).forEach(function (k) { out[k] = b.style[k]; });
    if (!out.display) out.display = ['span', 'a', 'b', 'i', 'em', 'strong', 'label', 'img', 'input', 'button', 'select'].indexOf(st(el).tag) >= 0 ? 'inline' : 'block';
    if (!out.visibility) out.visibility = stateOf(el)[1] ? 'hidden' : 'visible';
    out.getPropertyValue = function (k) { return out[String(k).toLowerCase()] || ''; };
    return out;
  }

  function matchMedia(q) {
    return { matches: false, media: String(q), addListener: function () {}, removeListener: function () {}, addEventListener: function () {}, removeEventListener: function () {} };
  }

  // ---- install globals ------------------------------------------------------------------------------

  [Event, UIEvent, MouseEvent, KeyboardEvent, FocusEvent, PointerEvent, CustomEvent, EventTarget, Window, Node, CharacterData, Text, Comment,
    CSSStyleDeclaration, Element, DocumentFragment, Document, HTMLDocument, Storage, Geolocation, Navigator, Location, Headers, Response,
    Request, XMLHttpRequest, WebSocket, Image, MutationObserver, IntersectionObserver, ResizeObserver, CustomElementRegistry, DOMException]
    .concat(htmlClasses).forEach(nativeClass);
  htmlClasses.forEach(function (C) { def(C.name, C); });
  [Event, UIEvent, MouseEvent, KeyboardEvent, FocusEvent, PointerEvent, CustomEvent, EventTarget, Window, Node, CharacterData, Text, Comment,
    CSSStyleDeclaration, Element, DocumentFragment, Document, HTMLDocument, Storage, Geolocation, Navigator, Location, Headers, Response,
    Request, XMLHttpRequest, WebSocket, Image, MutationObserver, IntersectionObserver, ResizeObserver, CustomElementRegistry, DOMException]
    .forEach(function (C) { def(C.name, C); });

  def('window', G);
  def('self', G);
  def('top', G);
  def('parent', G);
  def('frames', G);
  def('document', document);
  def('navigator', navigator);
  def('location', location);
  def('screen', screen);
  def('history', { length: 1, state: null, pushState: native(function pushState() {}), replaceState: native(function replaceState() {}), back: native(function back() {}), forward: native(function forward() {}), go: native(function go() {}) });
  def('localStorage', makeStorage());
  def('sessionStorage', makeStorage());
  def('customElements', Object.create(CustomElementRegistry.prototype));
  def('console', consoleObj);
  def('fetch', native(fetchImpl, 'fetch'));
  def('getComputedStyle', native(getComputedStyle, 'getComputedStyle'));
  def('matchMedia', native(matchMedia, 'matchMedia'));
  def('innerWidth', VIEWPORT_W);
  def('innerHeight', VIEWPORT_H);
  def('outerWidth', VIEWPORT_W);
  def('outerHeight', VIEWPORT_H + 80);
  def('devicePixelRatio', 1);
  def('scrollX', 0);
  def('scrollY', 0);
  def('pageXOffset', 0);
  def('pageYOffset', 0);
  def('name', '');
  def('closed', false);
  def('origin', opts.origin);
  def('isSecureContext', opts.scheme === 'https');
  def('scrollTo', native(function scrollTo() {}));
  def('scroll', native(function scroll() {}));
  def('focus', native(function focus() {}));
  def('blur', native(function blur() {}));
  def('alert', native(function alert() {}));
  def('confirm', native(function confirm() { return true; }));
  def('prompt', native(function prompt() { return null; }));
  def('open', native(function open(u) { emit('navigate', { url: String(u || ''), api: 'window.open' }); return null; }));
  def('postMessage', native(function postMessage() {}));
  def('close', native(function close() {}));
  def('print', native(function print() {}));

  // ---- script execution helpers --------------------------------------------------------------------

  var executed = new WeakSet();
  var JS_TYPES = /^(|text\/javascript|application\/javascript|module|text\/ecmascript|application\/ecmascript)$/i;

  scriptRunner = function (node) {
    var targets = st(node).nodeType === 1 && st(node).tag === 'script' ? [node] : st(node).nodeType === 1 ? descendants(node, function (el) { return st(el).tag === 'script'; }) : [];
    targets.forEach(function (el) {
      if (executed.has(el)) return;
      if (!JS_TYPES.test((getAttr(el, 'type') || '').trim())) return;
      executed.add(el);
      var src = getAttr(el, 'src');
      var code = src !== null ? host.resource(src) : textOf(el);
      if (code === null || code === undefined || code === '') return;
      var prev = currentScript;
      currentScript = el;
      try {
        (0, nativeEval)(code);
      } catch (e) {
        reportError(src !== null ? src : 'inline script', e);
      } finally {
        currentScript = prev;
      }
    });
  };

  function describe(n) {
    if (n === G) return 'window';
    if (n === document) return 'document';
    var s = st(n);
    if (!s || s.nodeType !== 1) return 'node';
    var id = getAttr(n, 'id');
    var cls = (getAttr(n, 'class') || '').split(/\s+/).filter(Boolean)[0];
    return s.tag + (id ? '#' + id : '') + (cls ? '.' + cls : '');
  }

  var CLICK_TYPES = ['click', 'mousedown', 'mouseup', 'pointerdown', 'pointerup'];

  function clickables() {
    var all = descendants(document, function (el) {
      if (isHidden(el)) return false;
      if (typeof el.onclick === 'function' || getAttr(el, 'onclick') !== null) return true;
      var l = st(el).listeners;
      return CLICK_TYPES.some(function (t) { return l[t] && l[t].length > 0; });
    });
    return all;
  }

  function compileHandlers(root) {
    descendants(root, function (el) {
      st(el).attrs.forEach(function (a) {
        if (a[0].indexOf('on') === 0 && a[0].length > 2 && typeof el[a[0]] !== 'function') {
          try {
            el[a[0]] = new NativeFunction('event', a[1]);
          } catch (e) {
            reportError('handler:' + a[0], e);
          }
        }
      });
      return false;
    });
  }

  var env = {
    version: 1,
    emit: function (type, payload) { emit(type, payload); },
    native: native,
    describe: describe,
    isHidden: function (el) { return isHidden(el); },
    hiddenIfInserted: function (parent, child) {
      var parentState = parent && parent[I] && st(parent).nodeType === 1 ? stateOf(parent) : [false, false];
      var own = ownState(child, parentState[0], parentState[1]);
      return own[0] || own[1];
    },
    attrsOf: function (el) {
      var out = {};
      st(el).attrs.forEach(function (a) { out[a[0]] = a[1]; });
      return out;
    },
    tagOf: function (n) { return n && n[I] && st(n).nodeType === 1 ? st(n).tag : null; },
    elementsOf: function (n) {
      if (!n || !n[I]) return [];
      var s = st(n);
      if (s.nodeType === 1) return [n].concat(descendants(n, function () { return true; }));
      if (s.nodeType === 11) return descendants(n, function () { return true; });
      return [];
    },
    parseFragment: function (html) { return build(JSON.parse(host.parseHtml(String(html)))); },
    seed: function (json) {
      var root = JSON.parse(json);
      build(root.children || []).forEach(function (c) { insertRaw(document, c); });
      compileHandlers(document);
    },
    serialize: function () {
      function ser(n) {
        var s = st(n);
        if (s.nodeType === 3) return { text: s.data };
        if (s.nodeType !== 1) return null;
        return { tag: s.tag, attrs: s.attrs, children: s.children.map(ser).filter(Boolean) };
      }
      return JSON.stringify({ tag: '#document', attrs: [], children: st(document).children.map(ser).filter(Boolean) });
    },
    hiddenFlags: function () {
      var out = [];
      (function walk(n) {
        if (st(n).nodeType === 1) out.push([st(n).tag, isHidden(n)]);
        (st(n).children || []).forEach(walk);
      })(document);
      return JSON.stringify(out);
    },
    markExecuted: function () {
      descendants(document, function (el) { if (st(el).tag === 'script') executed.add(el); return false; });
    },
    setReadyState: function (state) { readyState = state; },
    dispatchLoad: function () {
      readyState = 'interactive';
      dispatch(document, new Event('readystatechange'), false);
      dispatch(document, new Event('DOMContentLoaded', { bubbles: true }), false);
      readyState = 'complete';
      dispatch(document, new Event('readystatechange'), false);
      dispatch(G, new Event('load'), false);
      dispatch(G, new Event('pageshow'), false);
    },
    nextDue: function () {
      var i = earliest();
      return i < 0 ? -1 : timers[i].due;
    },
    pendingTimers: function () { return timers.length; },
    fireNext: function () {
      var i = earliest();
      if (i < 0) return false;
      var t = timers[i];
      if (t.interval) t.due += t.interval;
      else timers.splice(i, 1);
      runCallback(t.fn, t.args, 'timer');
      return true;
    },
    clickableCount: function () { return clickables().length; },
    simulateInteraction: function () {
      var candidates = clickables();
      if (!candidates.length) return 0;
      var best = candidates[0], bestArea = -1;
      candidates.forEach(function (el) {
        var b = box(el);
        var area = b.width !== null && b.height !== null ? b.width * b.height : 0;
        if (area > bestArea) { best = el; bestArea = area; }
      });
      emit('interaction', { event: 'click', target: describe(best) });
      dispatch(best, new MouseEvent('click', { bubbles: true, cancelable: true, clientX: 10, clientY: 10 }), true);
      emit('interaction', { event: 'mousemove', target: 'document' });
      dispatch(document, new MouseEvent('mousemove', { bubbles: true, clientX: 12, clientY: 14 }), true);
      return 2;
    },
    builtinNames: function () { return JSON.stringify(Object.getOwnPropertyNames(G)); },
    evalOriginal: function (code) { return (0, nativeEval)(code); }
  };
  Object.defineProperty(G, '__urlscope_env', { value: env, enumerable: false, configurable: false, writable: false });
  return true;
})
