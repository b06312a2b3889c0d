//! AST-driven detectors.

use std::collections::BTreeSet;

use crate::js::ast::*;
use crate::js::visit::{walk_expr, walk_function, walk_pattern, walk_program, walk_stmt, Visit};

use super::obfuscation::ObfuscationStats;
use super::strings::StringScanner;
use super::PatternFlag;

const INJECTABLE_TAGS: &[&str] = &["iframe", "form", "input", "frame", "object", "embed"];
const KEY_EVENTS: &[&str] = &["keydown", "keypress", "keyup"];
const MOUSE_EVENTS: &[&str] = &["mousemove", "mousedown", "mouseup", "pointermove", "pointerdown"];
const GLOBAL_OBJECTS: &[&str] = &["window", "self", "globalThis", "top", "parent", "frames"];

pub(super) struct Detector<'c> {
    pub strings: StringScanner<'c>,
    pub nesting_limit: usize,
    pub function_names: Vec<String>,
    pub anonymous_fn_count: usize,
    pub variable_names: Vec<String>,
    pub flags: BTreeSet<PatternFlag>,
    pub dangerous_api_count: usize,
    pub invoked_apis: Vec<String>,
    pub stats: ObfuscationStats,
    seen_idents: BTreeSet<String>,
    control_depth: usize,
}

fn push_unique(v: &mut Vec<String>, s: &str) {
    if !v.iter().any(|x| x == s) {
        v.push(s.to_string());
    }
}

/// `foo` or `window.foo` (and friends) as a plain global name.
fn global_name(e: &Expr) -> Option<&str> {
    match e.unparen() {
        Expr::Ident(n) => Some(n),
        Expr::Member { object, prop: MemberProp::Ident(p), .. } => match object.unparen() {
            Expr::Ident(o) if GLOBAL_OBJECTS.contains(&o.as_str()) => Some(p),
            _ => None,
        },
        // indirect call form `(0, eval)(...)`
        Expr::Seq(items) => items.last().and_then(global_name),
        _ => None,
    }
}

fn static_prop(prop: &MemberProp) -> Option<&str> {
    match prop {
        MemberProp::Ident(p) => Some(p),
        MemberProp::Computed(e) => match e.unparen() {
            Expr::Str(s) => Some(s),
            _ => None,
        },
        MemberProp::Private(_) => None,
    }
}

fn member_prop(e: &Expr) -> Option<&str> {
    match e.unparen() {
        Expr::Member { prop, .. } => static_prop(prop),
        _ => None,
    }
}

fn member_object(e: &Expr) -> Option<&Expr> {
    match e.unparen() {
        Expr::Member { object, .. } => Some(object),
        _ => None,
    }
}

/// True for `document` and `x.document`.
fn is_document(e: &Expr) -> bool {
    match e.unparen() {
        Expr::Ident(n) => n == "document",
        Expr::Member { prop, .. } => static_prop(prop) == Some("document"),
        _ => false,
    }
}

fn str_arg(args: &[Expr], i: usize) -> Option<&str> {
    match args.get(i).map(Expr::unparen) {
        Some(Expr::Str(s)) => Some(s),
        Some(Expr::Template(t)) if t.exprs.is_empty() => t.quasis.first().map(String::as_str),
        _ => None,
    }
}

/// Any string or template piece anywhere inside `e`.
fn string_leaves<'e>(e: &'e Expr, out: &mut Vec<&'e str>) {
    match e.unparen() {
        Expr::Str(s) => out.push(s),
        Expr::Template(t) => {
            out.extend(t.quasis.iter().map(String::as_str));
            t.exprs.iter().for_each(|x| string_leaves(x, out));
        }
        Expr::Binary { left, right, .. } | Expr::Logical { left, right, .. } => {
            string_leaves(left, out);
            string_leaves(right, out);
        }
        Expr::Cond { cons, alt, .. } => {
            string_leaves(cons, out);
            string_leaves(alt, out);
        }
        _ => {}
    }
}

fn is_stringish(e: &Expr) -> bool {
    match e.unparen() {
        Expr::Str(_) | Expr::Template(_) => true,
        Expr::Binary { op: "+", left, right } => is_stringish(left) || is_stringish(right),
        _ => false,
    }
}

fn contains_call_to(e: &Expr, name: &str) -> bool {
    struct Finder<'n>(&'n str, bool);
    impl Visit for Finder<'_> {
        fn visit_expr(&mut self, e: &Expr) {
            if let Expr::Call { callee, .. } = e {
                if global_name(callee) == Some(self.0) {
                    self.1 = true;
                    return;
                }
            }
            walk_expr(self, e)
        }
    }
    let mut f = Finder(name, false);
    f.visit_expr(e);
    f.1
}

/// A test built only from literals and operators, such as `!![]` or `1 > 2`.
/// Bare literals (`while (true)`) and minifier idioms (`!0`) are not opaque.
fn is_opaque_predicate(e: &Expr) -> bool {
    fn constant(e: &Expr) -> bool {
        match e.unparen() {
            Expr::Num(_) | Expr::Str(_) | Expr::Bool(_) | Expr::Null | Expr::BigInt(_) | Expr::Regex { .. } => true,
            Expr::Array(items) => items.iter().flatten().all(constant),
            Expr::Object(props) => props.is_empty(),
            Expr::Unary { op, arg } => *op != "delete" && constant(arg),
            Expr::Binary { left, right, .. } | Expr::Logical { left, right, .. } => constant(left) && constant(right),
            _ => false,
        }
    }
    fn has_operator(e: &Expr) -> bool {
        match e.unparen() {
            Expr::Binary { .. } | Expr::Logical { .. } => true,
            Expr::Unary { arg, .. } => matches!(arg.unparen(), Expr::Array(_) | Expr::Object(_)) || has_operator(arg),
            _ => false,
        }
    }
    constant(e) && has_operator(e)
}

impl<'c> Detector<'c> {
    pub fn new(strings: StringScanner<'c>, nesting_limit: usize) -> Self {
        Detector {
            strings,
            nesting_limit,
            function_names: Vec::new(),
            anonymous_fn_count: 0,
            variable_names: Vec::new(),
            flags: BTreeSet::new(),
            dangerous_api_count: 0,
            invoked_apis: Vec::new(),
            stats: ObfuscationStats::default(),
            seen_idents: BTreeSet::new(),
            control_depth: 0,
        }
    }

    pub fn run(&mut self, program: &Program) {
        walk_program(self, program);
    }

    fn flag(&mut self, f: PatternFlag) {
        self.flags.insert(f);
    }

    fn identifier(&mut self, name: &str) {
        if self.seen_idents.insert(name.to_string()) {
            self.stats.add_identifier(name);
            if self.strings.identifier_has_keyword(name) {
                self.flag(PatternFlag::SensitiveKeyword);
            }
        }
    }

    fn string_literal(&mut self, s: &str) {
        self.stats.add_string(s);
        let flags = self.strings.scan(s);
        self.flags.extend(flags);
    }

    fn record_api(&mut self, callee: &Expr) {
        let name = match callee.unparen() {
            Expr::Ident(n) => Some(n.clone()),
            Expr::Member { object, prop, .. } => static_prop(prop).map(|p| match object.unparen() {
                Expr::Ident(o) => format!("{o}.{p}"),
                _ => format!("unknown.{p}"),
            }),
            _ => None,
        };
        if let Some(n) = name {
            push_unique(&mut self.invoked_apis, &n);
        }
    }

    fn check_call(&mut self, callee: &Expr, args: &[Expr], is_new: bool) {
        let global = global_name(callee);
        match global {
            Some("eval") if !is_new => {
                self.flag(PatternFlag::EvalUsage);
                self.dangerous_api_count += 1;
            }
            Some("Function") => {
                self.flag(PatternFlag::FunctionConstructor);
                self.dangerous_api_count += 1;
            }
            Some("setTimeout" | "setInterval") if args.first().is_some_and(is_stringish) => {
                self.flag(PatternFlag::DelayedStringExec);
            }
            Some("atob") => self.flag(PatternFlag::Base64Decode),
            _ => {}
        }
        let Some(method) = member_prop(callee) else { return };
        let object = member_object(callee);
        match method {
            "createElement" | "createElementNS" => {
                let tag_arg = if method == "createElementNS" { 1 } else { 0 };
                if let Some(tag) = str_arg(args, tag_arg).map(str::to_ascii_lowercase) {
                    if tag == "script" {
                        self.flag(PatternFlag::DynamicScriptInjection);
                    } else if INJECTABLE_TAGS.contains(&tag.as_str()) {
                        self.flag(PatternFlag::DomInjection);
                    }
                }
            }
            "write" | "writeln" if object.is_some_and(is_document) => {
                self.flag(PatternFlag::DomInjection);
                self.dangerous_api_count += 1;
                let mut leaves = Vec::new();
                args.iter().for_each(|a| string_leaves(a, &mut leaves));
                if leaves.iter().any(|s| s.to_ascii_lowercase().contains("<script")) {
                    self.flag(PatternFlag::DynamicScriptInjection);
                }
            }
            "insertAdjacentHTML" => self.flag(PatternFlag::DomInjection),
            "from" if object.is_some_and(|o| matches!(o.unparen(), Expr::Ident(n) if n == "Buffer")) => {
                if str_arg(args, 1).is_some_and(|e| e.eq_ignore_ascii_case("base64")) {
                    self.flag(PatternFlag::Base64Decode);
                }
            }
            "addEventListener" | "attachEvent" => {
                if let Some(ev) = str_arg(args, 0) {
                    let ev = ev.trim_start_matches("on").to_ascii_lowercase();
                    if KEY_EVENTS.contains(&ev.as_str()) {
                        self.flag(PatternFlag::EventCaptureKeys);
                    } else if MOUSE_EVENTS.contains(&ev.as_str()) {
                        self.flag(PatternFlag::EventCaptureMouse);
                    }
                }
            }
            _ => {}
        }
    }

    fn check_assign_target(&mut self, target: &Pattern, value: &Expr) {
        let Pattern::Expr(t) = target else { return };
        let Some(prop) = member_prop(t) else { return };
        match prop {
            "innerHTML" | "outerHTML" => {
                self.flag(PatternFlag::DomInjection);
                self.dangerous_api_count += 1;
                if contains_call_to(value, "atob") {
                    self.dangerous_api_count += 1;
                }
            }
            "src" | "text" | "textContent" if contains_call_to(value, "atob") => {
                self.dangerous_api_count += 1;
            }
            "onkeydown" | "onkeypress" | "onkeyup" => self.flag(PatternFlag::EventCaptureKeys),
            "onmousemove" | "onmousedown" | "onmouseup" | "onpointermove" => self.flag(PatternFlag::EventCaptureMouse),
            _ => {}
        }
    }

    fn check_test(&mut self, test: &Expr) {
        if is_opaque_predicate(test) {
            self.flag(PatternFlag::OpaqueControlFlow);
        }
    }

    fn enter_control(&mut self) {
        self.control_depth += 1;
        if self.control_depth > self.nesting_limit {
            self.flag(PatternFlag::OpaqueControlFlow);
        }
    }

    fn prop_key(&mut self, k: &PropKey) {
        match k {
            PropKey::Ident(n) => {
                if self.strings.identifier_has_keyword(n) {
                    self.flag(PatternFlag::SensitiveKeyword);
                }
            }
            PropKey::Str(s) => self.string_literal(s),
            _ => {}
        }
    }
}

impl Visit for Detector<'_> {
    fn visit_stmt(&mut self, s: &Stmt) {
        match s {
            Stmt::Var(d) => {
                for decl in &d.decls {
                    let mut names = Vec::new();
                    decl.target.bound_names(&mut names);
                    for n in names {
                        push_unique(&mut self.variable_names, &n);
                    }
                }
            }
            Stmt::If { test, .. } | Stmt::While { test, .. } | Stmt::DoWhile { test, .. } => self.check_test(test),
            Stmt::For { test: Some(test), .. } => self.check_test(test),
            _ => {}
        }
        let control = matches!(
            s,
            Stmt::If { .. }
                | Stmt::For { .. }
                | Stmt::ForIn { .. }
                | Stmt::ForOf { .. }
                | Stmt::While { .. }
                | Stmt::DoWhile { .. }
                | Stmt::Switch { .. }
                | Stmt::Try { .. }
                | Stmt::With { .. }
        );
        if control {
            self.enter_control();
        }
        // `else if` chains are one level, not a ladder
        if let Stmt::If { test, cons, alt: Some(alt) } = s {
            self.visit_expr(test);
            self.visit_stmt(cons);
            if control {
                self.control_depth -= 1;
            }
            self.visit_stmt(alt);
            return;
        }
        walk_stmt(self, s);
        if control {
            self.control_depth -= 1;
        }
    }

    fn visit_function(&mut self, f: &Function) {
        match &f.name {
            Some(n) if !f.is_arrow => {
                push_unique(&mut self.function_names, n);
                self.identifier(n);
            }
            _ => self.anonymous_fn_count += 1,
        }
        // a function body restarts control nesting
        let saved = std::mem::replace(&mut self.control_depth, 0);
        walk_function(self, f);
        self.control_depth = saved;
    }

    fn visit_class(&mut self, c: &Class) {
        if let Some(n) = &c.name {
            self.identifier(n);
        }
        for m in &c.members {
            match m {
                ClassMember::Method { key, .. } | ClassMember::Field { key, .. } => self.prop_key(key),
                ClassMember::StaticBlock(_) => {}
            }
        }
        crate::js::visit::walk_class(self, c);
    }

    fn visit_pattern(&mut self, p: &Pattern) {
        match p {
            Pattern::Ident(n) => self.identifier(n),
            Pattern::Object(props) => {
                for prop in props {
                    match prop {
                        PatProp::Shorthand(n, _) => self.identifier(n),
                        PatProp::KeyValue(k, _) => self.prop_key(k),
                        PatProp::Rest(_) => {}
                    }
                }
            }
            _ => {}
        }
        walk_pattern(self, p);
    }

    fn visit_expr(&mut self, e: &Expr) {
        match e {
            Expr::Ident(n) => {
                self.identifier(n);
                if matches!(n.as_str(), "localStorage" | "sessionStorage" | "indexedDB") {
                    self.flag(PatternFlag::StorageAccess);
                }
            }
            Expr::Str(s) => self.string_literal(s),
            Expr::Template(t) => {
                for q in &t.quasis {
                    self.string_literal(q);
                }
            }
            Expr::TaggedTemplate { quasi, .. } => {
                for q in &quasi.quasis {
                    self.string_literal(q);
                }
            }
            Expr::Object(props) => {
                for p in props {
                    match p {
                        Prop::KeyValue(k, _) | Prop::Method(k, _, _) => self.prop_key(k),
                        Prop::Shorthand(n) | Prop::ShorthandInit(n, _) => self.identifier(n),
                        Prop::Spread(_) => {}
                    }
                }
            }
            Expr::Call { callee, args, .. } => {
                self.record_api(callee);
                self.check_call(callee, args, false);
            }
            Expr::New { callee, args } => self.check_call(callee, args, true),
            Expr::Assign { target, value, .. } => self.check_assign_target(target, value),
            Expr::Member { object, prop, .. } => {
                if let Some(p) = static_prop(prop) {
                    if let MemberProp::Ident(name) = prop {
                        if self.strings.identifier_has_keyword(name) {
                            self.flag(PatternFlag::SensitiveKeyword);
                        }
                    }
                    match p {
                        "webdriver" => {
                            let on_navigator = match object.unparen() {
                                Expr::Ident(o) => o == "navigator",
                                other => member_prop(other) == Some("navigator"),
                            };
                            if on_navigator {
                                self.flag(PatternFlag::NavigatorWebdriverCheck);
                            }
                        }
                        "cookie" if is_document(object) => self.flag(PatternFlag::CookieAccess),
                        "localStorage" | "sessionStorage" | "indexedDB" => self.flag(PatternFlag::StorageAccess),
                        _ => {}
                    }
                }
            }
            Expr::Cond { test, .. } => self.check_test(test),
            _ => {}
        }
        walk_expr(self, e);
    }
}
