//! Read-only traversal over the syntax tree.
//!
//! Implementors override the hooks they care about and call the matching
//! `walk_*` function to keep descending.

use super::ast::*;

pub trait Visit {
    fn visit_stmt(&mut self, s: &Stmt) {
        walk_stmt(self, s)
    }
    fn visit_expr(&mut self, e: &Expr) {
        walk_expr(self, e)
    }
    fn visit_pattern(&mut self, p: &Pattern) {
        walk_pattern(self, p)
    }
    fn visit_function(&mut self, f: &Function) {
        walk_function(self, f)
    }
    fn visit_class(&mut self, c: &Class) {
        walk_class(self, c)
    }
}

pub fn walk_program<V: Visit + ?Sized>(v: &mut V, p: &Program) {
    for s in &p.body {
        v.visit_stmt(s);
    }
}

fn walk_var<V: Visit + ?Sized>(v: &mut V, d: &VarDecl) {
    for decl in &d.decls {
        v.visit_pattern(&decl.target);
        if let Some(init) = &decl.init {
            v.visit_expr(init);
        }
    }
}

fn walk_for_head<V: Visit + ?Sized>(v: &mut V, h: &ForHead) {
    match h {
        ForHead::Var(d) => walk_var(v, d),
        ForHead::Pattern(p) => v.visit_pattern(p),
    }
}

pub fn walk_stmt<V: Visit + ?Sized>(v: &mut V, s: &Stmt) {
    match s {
        Stmt::Expr(e) | Stmt::Throw(e) => v.visit_expr(e),
        Stmt::Var(d) => walk_var(v, d),
        Stmt::Function(f) => v.visit_function(f),
        Stmt::Class(c) => v.visit_class(c),
        Stmt::Block(b) => b.iter().for_each(|s| v.visit_stmt(s)),
        Stmt::Empty | Stmt::Debugger | Stmt::Break(_) | Stmt::Continue(_) | Stmt::Import { .. } => {}
        Stmt::If { test, cons, alt } => {
            v.visit_expr(test);
            v.visit_stmt(cons);
            if let Some(a) = alt {
                v.visit_stmt(a);
            }
        }
        Stmt::For { init, test, update, body } => {
            match init {
                Some(ForInit::Var(d)) => walk_var(v, d),
                Some(ForInit::Expr(e)) => v.visit_expr(e),
                None => {}
            }
            if let Some(t) = test {
                v.visit_expr(t);
            }
            if let Some(u) = update {
                v.visit_expr(u);
            }
            v.visit_stmt(body);
        }
        Stmt::ForIn { left, right, body } | Stmt::ForOf { left, right, body, .. } => {
            walk_for_head(v, left);
            v.visit_expr(right);
            v.visit_stmt(body);
        }
        Stmt::While { test, body } | Stmt::DoWhile { body, test } => {
            v.visit_expr(test);
            v.visit_stmt(body);
        }
        Stmt::Return(e) => {
            if let Some(e) = e {
                v.visit_expr(e);
            }
        }
        Stmt::Try { block, handler, finalizer } => {
            block.iter().for_each(|s| v.visit_stmt(s));
            if let Some(h) = handler {
                if let Some(p) = &h.param {
                    v.visit_pattern(p);
                }
                h.body.iter().for_each(|s| v.visit_stmt(s));
            }
            if let Some(f) = finalizer {
                f.iter().for_each(|s| v.visit_stmt(s));
            }
        }
        Stmt::Switch { discriminant, cases } => {
            v.visit_expr(discriminant);
            for c in cases {
                if let Some(t) = &c.test {
                    v.visit_expr(t);
                }
                c.body.iter().for_each(|s| v.visit_stmt(s));
            }
        }
        Stmt::Labeled { body, .. } => v.visit_stmt(body),
        Stmt::With { object, body } => {
            v.visit_expr(object);
            v.visit_stmt(body);
        }
        Stmt::Export(d) => {
            if let Some(d) = d {
                v.visit_stmt(d);
            }
        }
    }
}

fn walk_key<V: Visit + ?Sized>(v: &mut V, k: &PropKey) {
    if let PropKey::Computed(e) = k {
        v.visit_expr(e);
    }
}

pub fn walk_expr<V: Visit + ?Sized>(v: &mut V, e: &Expr) {
    match e {
        Expr::Ident(_)
        | Expr::This
        | Expr::Super
        | Expr::Null
        | Expr::Bool(_)
        | Expr::Num(_)
        | Expr::BigInt(_)
        | Expr::Str(_)
        | Expr::Regex { .. }
        | Expr::MetaProp(..)
        | Expr::PrivateName(_) => {}
        Expr::Template(t) => t.exprs.iter().for_each(|e| v.visit_expr(e)),
        Expr::TaggedTemplate { tag, quasi } => {
            v.visit_expr(tag);
            quasi.exprs.iter().for_each(|e| v.visit_expr(e));
        }
        Expr::Array(items) => items.iter().flatten().for_each(|e| v.visit_expr(e)),
        Expr::Object(props) => {
            for p in props {
                match p {
                    Prop::KeyValue(k, val) => {
                        walk_key(v, k);
                        v.visit_expr(val);
                    }
                    Prop::Shorthand(_) => {}
                    Prop::ShorthandInit(_, d) | Prop::Spread(d) => v.visit_expr(d),
                    Prop::Method(k, _, f) => {
                        walk_key(v, k);
                        v.visit_function(f);
                    }
                }
            }
        }
        Expr::Function(f) | Expr::Arrow(f) => v.visit_function(f),
        Expr::Class(c) => v.visit_class(c),
        Expr::Unary { arg, .. } | Expr::Update { arg, .. } | Expr::Spread(arg) | Expr::Await(arg) => v.visit_expr(arg),
        Expr::Import(arg) | Expr::Paren(arg) => v.visit_expr(arg),
        Expr::Binary { left, right, .. } | Expr::Logical { left, right, .. } => {
            v.visit_expr(left);
            v.visit_expr(right);
        }
        Expr::Assign { target, value, .. } => {
            v.visit_pattern(target);
            v.visit_expr(value);
        }
        Expr::Cond { test, cons, alt } => {
            v.visit_expr(test);
            v.visit_expr(cons);
            v.visit_expr(alt);
        }
        Expr::Call { callee, args, .. } | Expr::New { callee, args } => {
            v.visit_expr(callee);
            args.iter().for_each(|a| v.visit_expr(a));
        }
        Expr::Member { object, prop, .. } => {
            v.visit_expr(object);
            if let MemberProp::Computed(p) = prop {
                v.visit_expr(p);
            }
        }
        Expr::Seq(items) => items.iter().for_each(|e| v.visit_expr(e)),
        Expr::Yield { arg, .. } => {
            if let Some(a) = arg {
                v.visit_expr(a);
            }
        }
    }
}

pub fn walk_pattern<V: Visit + ?Sized>(v: &mut V, p: &Pattern) {
    match p {
        Pattern::Ident(_) => {}
        Pattern::Object(props) => {
            for prop in props {
                match prop {
                    PatProp::KeyValue(k, val) => {
                        walk_key(v, k);
                        v.visit_pattern(val);
                    }
                    PatProp::Shorthand(_, d) => {
                        if let Some(d) = d {
                            v.visit_expr(d);
                        }
                    }
                    PatProp::Rest(r) => v.visit_pattern(r),
                }
            }
        }
        Pattern::Array(items) => items.iter().flatten().for_each(|p| v.visit_pattern(p)),
        Pattern::Rest(r) => v.visit_pattern(r),
        Pattern::Default(t, d) => {
            v.visit_pattern(t);
            v.visit_expr(d);
        }
        Pattern::Expr(e) => v.visit_expr(e),
    }
}

pub fn walk_function<V: Visit + ?Sized>(v: &mut V, f: &Function) {
    f.params.iter().for_each(|p| v.visit_pattern(p));
    match &f.body {
        FnBody::Block(b) => b.iter().for_each(|s| v.visit_stmt(s)),
        FnBody::Expr(e) => v.visit_expr(e),
    }
}

pub fn walk_class<V: Visit + ?Sized>(v: &mut V, c: &Class) {
    if let Some(s) = &c.super_class {
        v.visit_expr(s);
    }
    for m in &c.members {
        match m {
            ClassMember::Method { key, value, .. } => {
                walk_key(v, key);
                v.visit_function(value);
            }
            ClassMember::Field { key, value, .. } => {
                walk_key(v, key);
                if let Some(val) = value {
                    v.visit_expr(val);
                }
            }
            ClassMember::StaticBlock(b) => b.iter().for_each(|s| v.visit_stmt(s)),
        }
    }
}
