use super::ast::*;
use super::lexer::{Lexer, TokKind, Token};
use super::visit::{walk_expr, walk_program, Visit};
use super::ParseError;

/// Nesting limit for statements and expressions combined.
const MAX_DEPTH: usize = 400;

const RESERVED: &[&str] = &[
    "break", "case", "catch", "class", "const", "continue", "debugger", "default", "delete", "do",
    "else", "enum", "export", "extends", "false", "finally", "for", "function", "if", "import", "in",
    "instanceof", "new", "null", "return", "super", "switch", "this", "throw", "true", "try",
    "typeof", "var", "void", "while", "with",
];

fn is_reserved(name: &str) -> bool {
    RESERVED.contains(&name)
}

type PResult<T> = Result<T, ParseError>;

#[derive(Clone, Copy, Default)]
struct FnContext {
    in_function: bool,
    is_async: bool,
    is_generator: bool,
}

pub struct Parser<'a> {
    lx: Lexer<'a>,
    tok: Token,
    depth: usize,
    ctx: FnContext,
}

impl<'a> Parser<'a> {
    pub fn new(src: &'a str) -> PResult<Self> {
        let mut lx = Lexer::new(src);
        let tok = lx.next_token()?;
        Ok(Parser { lx, tok, depth: 0, ctx: FnContext::default() })
    }

    pub fn parse_program(&mut self) -> PResult<Program> {
        let mut body = Vec::new();
        while self.tok.kind != TokKind::Eof {
            body.push(self.parse_item()?);
        }
        let program = Program { body };
        let mut check = CoverInitCheck(false);
        walk_program(&mut check, &program);
        if check.0 {
            return Err(ParseError::new("invalid shorthand property initializer", 0));
        }
        Ok(program)
    }

    // ---- token helpers ----

    fn next(&mut self) -> PResult<Token> {
        let nt = self.lx.next_token()?;
        Ok(std::mem::replace(&mut self.tok, nt))
    }

    fn peek(&self) -> PResult<Token> {
        let mut lx = self.lx.clone();
        lx.next_token()
    }

    fn err<T>(&self, msg: impl Into<String>) -> PResult<T> {
        Err(ParseError::new(msg, self.tok.start))
    }

    fn unexpected<T>(&self) -> PResult<T> {
        let what = match &self.tok.kind {
            TokKind::Eof => "end of input".to_string(),
            TokKind::Punct(p) => format!("'{p}'"),
            TokKind::Ident { name, .. } => format!("'{name}'"),
            other => format!("{other:?}"),
        };
        self.err(format!("unexpected {what}"))
    }

    fn is_punct(&self, p: &str) -> bool {
        matches!(self.tok.kind, TokKind::Punct(q) if q == p)
    }

    fn eat_punct(&mut self, p: &str) -> PResult<bool> {
        if self.is_punct(p) {
            self.next()?;
            Ok(true)
        } else {
            Ok(false)
        }
    }

    fn expect_punct(&mut self, p: &str) -> PResult<()> {
        if self.eat_punct(p)? {
            Ok(())
        } else {
            self.err(format!("expected '{p}'"))
        }
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(&self.tok.kind, TokKind::Ident { name, escaped: false } if name == kw)
    }

    fn eat_kw(&mut self, kw: &str) -> PResult<bool> {
        if self.is_kw(kw) {
            self.next()?;
            Ok(true)
        } else {
            Ok(false)
        }
    }

    fn expect_kw(&mut self, kw: &str) -> PResult<()> {
        if self.eat_kw(kw)? {
            Ok(())
        } else {
            self.err(format!("expected '{kw}'"))
        }
    }

    fn ident_name(&self) -> Option<&str> {
        match &self.tok.kind {
            TokKind::Ident { name, .. } => Some(name),
            _ => None,
        }
    }

    /// Current token as a binding/reference identifier (not a reserved word).
    fn binding_ident(&mut self) -> PResult<String> {
        match &self.tok.kind {
            TokKind::Ident { name, escaped } if *escaped || !is_reserved(name) => {
                let n = name.clone();
                self.next()?;
                Ok(n)
            }
            _ => self.unexpected(),
        }
    }

    /// Any IdentifierName, reserved words included (property names).
    fn any_ident_name(&mut self) -> PResult<String> {
        match &self.tok.kind {
            TokKind::Ident { name, .. } => {
                let n = name.clone();
                self.next()?;
                Ok(n)
            }
            _ => self.unexpected(),
        }
    }

    fn consume_semicolon(&mut self) -> PResult<()> {
        if self.eat_punct(";")? {
            return Ok(());
        }
        if self.is_punct("}") || self.tok.kind == TokKind::Eof || self.tok.nl_before {
            return Ok(());
        }
        self.unexpected()
    }

    fn enter(&mut self) -> PResult<()> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return self.err("nesting too deep");
        }
        Ok(())
    }

    fn leave(&mut self) {
        self.depth -= 1;
    }

    // ---- statements ----

    fn parse_item(&mut self) -> PResult<Stmt> {
        if self.is_kw("import") {
            let p = self.peek()?;
            if !matches!(p.kind, TokKind::Punct("(") | TokKind::Punct(".")) {
                return self.parse_import();
            }
        }
        if self.is_kw("export") {
            return self.parse_export();
        }
        self.parse_statement()
    }

    fn parse_import(&mut self) -> PResult<Stmt> {
        self.expect_kw("import")?;
        let mut source = None;
        loop {
            match &self.tok.kind {
                TokKind::Str(s) => {
                    source = Some(s.clone());
                    self.next()?;
                    break;
                }
                TokKind::Eof => return self.unexpected(),
                TokKind::Punct(";") => break,
                _ => {
                    self.next()?;
                }
            }
        }
        // import attributes: `with { type: "json" }`
        if self.is_kw("with") || (self.ident_name() == Some("assert") && !self.tok.nl_before) {
            self.next()?;
            self.parse_object_literal()?;
        }
        self.consume_semicolon()?;
        match source {
            Some(source) => Ok(Stmt::Import { source }),
            None => self.err("import without source"),
        }
    }

    fn parse_export(&mut self) -> PResult<Stmt> {
        self.expect_kw("export")?;
        if self.eat_kw("default")? {
            let decl = if self.is_kw("function") || self.is_kw("class") || self.is_async_function() {
                self.parse_statement()?
            } else {
                let e = self.parse_assign(false)?;
                self.consume_semicolon()?;
                Stmt::Expr(e)
            };
            return Ok(Stmt::Export(Some(Box::new(decl))));
        }
        if self.is_punct("*") || self.is_punct("{") {
            // re-export lists: skip to end of clause
            let mut braces = 0i32;
            loop {
                match &self.tok.kind {
                    TokKind::Punct("{") => braces += 1,
                    TokKind::Punct("}") => braces -= 1,
                    TokKind::Eof => return self.unexpected(),
                    _ => {}
                }
                self.next()?;
                if braces == 0 && !self.is_punct("{") && !self.is_kw("as") && !matches!(self.tok.kind, TokKind::Ident { .. }) {
                    if let TokKind::Str(_) = self.tok.kind {
                        self.next()?;
                    }
                    break;
                }
                if braces == 0 && self.is_kw("from") {
                    self.next()?;
                    if let TokKind::Str(_) = self.tok.kind {
                        self.next()?;
                    }
                    break;
                }
            }
            self.consume_semicolon()?;
            return Ok(Stmt::Export(None));
        }
        let decl = self.parse_statement()?;
        Ok(Stmt::Export(Some(Box::new(decl))))
    }

    fn is_async_function(&self) -> bool {
        if !self.is_kw("async") {
            return false;
        }
        match self.peek() {
            Ok(t) => !t.nl_before && matches!(&t.kind, TokKind::Ident { name, escaped: false } if name == "function"),
            Err(_) => false,
        }
    }

    fn is_let_decl(&self) -> bool {
        if !self.is_kw("let") {
            return false;
        }
        match self.peek() {
            Ok(t) => match &t.kind {
                TokKind::Punct("[") | TokKind::Punct("{") => true,
                TokKind::Ident { name, .. } => !(name == "in" || name == "instanceof" || name == "of") || !t.nl_before,
                _ => false,
            },
            Err(_) => false,
        }
    }

    fn parse_statement(&mut self) -> PResult<Stmt> {
        self.enter()?;
        let r = self.parse_statement_inner();
        self.leave();
        r
    }

    fn parse_statement_inner(&mut self) -> PResult<Stmt> {
        if let TokKind::Punct(p) = self.tok.kind {
            match p {
                "{" => return Ok(Stmt::Block(self.parse_block()?)),
                ";" => {
                    self.next()?;
                    return Ok(Stmt::Empty);
                }
                _ => {}
            }
        }
        let kw = match &self.tok.kind {
            TokKind::Ident { name, escaped: false } => Some(name.clone()),
            _ => None,
        };
        if let Some(kw) = kw.as_deref() {
            match kw {
                "var" => {
                    self.next()?;
                    let d = self.parse_var_decls(VarKind::Var, false)?;
                    self.consume_semicolon()?;
                    return Ok(Stmt::Var(d));
                }
                "const" => {
                    self.next()?;
                    let d = self.parse_var_decls(VarKind::Const, false)?;
                    self.consume_semicolon()?;
                    return Ok(Stmt::Var(d));
                }
                "let" if self.is_let_decl() => {
                    self.next()?;
                    let d = self.parse_var_decls(VarKind::Let, false)?;
                    self.consume_semicolon()?;
                    return Ok(Stmt::Var(d));
                }
                "function" => {
                    self.next()?;
                    let f = self.parse_function_rest(false, true, false)?;
                    return Ok(Stmt::Function(Box::new(f)));
                }
                "async" if self.is_async_function() => {
                    self.next()?;
                    self.next()?;
                    let f = self.parse_function_rest(true, true, false)?;
                    return Ok(Stmt::Function(Box::new(f)));
                }
                "class" => {
                    let c = self.parse_class(true)?;
                    return Ok(Stmt::Class(Box::new(c)));
                }
                "if" => {
                    self.next()?;
                    self.expect_punct("(")?;
                    let test = self.parse_expression(false)?;
                    self.expect_punct(")")?;
                    let cons = Box::new(self.parse_statement()?);
                    let alt = if self.eat_kw("else")? { Some(Box::new(self.parse_statement()?)) } else { None };
                    return Ok(Stmt::If { test, cons, alt });
                }
                "for" => return self.parse_for(),
                "while" => {
                    self.next()?;
                    self.expect_punct("(")?;
                    let test = self.parse_expression(false)?;
                    self.expect_punct(")")?;
                    let body = Box::new(self.parse_statement()?);
                    return Ok(Stmt::While { test, body });
                }
                "do" => {
                    self.next()?;
                    let body = Box::new(self.parse_statement()?);
                    self.expect_kw("while")?;
                    self.expect_punct("(")?;
                    let test = self.parse_expression(false)?;
                    self.expect_punct(")")?;
                    // a semicolon after do-while is always optional
                    self.eat_punct(";")?;
                    return Ok(Stmt::DoWhile { body, test });
                }
                "return" => {
                    if !self.ctx.in_function {
                        return self.err("return outside function");
                    }
                    self.next()?;
                    let arg = if self.is_punct(";") || self.is_punct("}") || self.tok.kind == TokKind::Eof || self.tok.nl_before {
                        None
                    } else {
                        Some(self.parse_expression(false)?)
                    };
                    self.consume_semicolon()?;
                    return Ok(Stmt::Return(arg));
                }
                "break" | "continue" => {
                    self.next()?;
                    let label = match &self.tok.kind {
                        TokKind::Ident { name, .. } if !self.tok.nl_before && !is_reserved(name) => {
                            let l = name.clone();
                            self.next()?;
                            Some(l)
                        }
                        _ => None,
                    };
                    self.consume_semicolon()?;
                    return Ok(if kw == "break" { Stmt::Break(label) } else { Stmt::Continue(label) });
                }
                "throw" => {
                    self.next()?;
                    if self.tok.nl_before {
                        return self.err("illegal newline after throw");
                    }
                    let e = self.parse_expression(false)?;
                    self.consume_semicolon()?;
                    return Ok(Stmt::Throw(e));
                }
                "try" => return self.parse_try(),
                "switch" => return self.parse_switch(),
                "with" => {
                    self.next()?;
                    self.expect_punct("(")?;
                    let object = self.parse_expression(false)?;
                    self.expect_punct(")")?;
                    let body = Box::new(self.parse_statement()?);
                    return Ok(Stmt::With { object, body });
                }
                "debugger" => {
                    self.next()?;
                    self.consume_semicolon()?;
                    return Ok(Stmt::Debugger);
                }
                "import" | "export" => {
                    let p = self.peek()?;
                    if kw == "export" || !matches!(p.kind, TokKind::Punct("(") | TokKind::Punct(".")) {
                        return self.parse_item();
                    }
                }
                _ => {}
            }
            // labeled statement
            if !is_reserved(kw) {
                let p = self.peek()?;
                if p.kind == TokKind::Punct(":") {
                    let label = kw.to_string();
                    self.next()?;
                    self.next()?;
                    let body = Box::new(self.parse_statement()?);
                    return Ok(Stmt::Labeled { label, body });
                }
            }
        }
        let e = self.parse_expression(false)?;
        self.consume_semicolon()?;
        Ok(Stmt::Expr(e))
    }

    fn parse_block(&mut self) -> PResult<Vec<Stmt>> {
        self.expect_punct("{")?;
        let mut body = Vec::new();
        while !self.is_punct("}") {
            if self.tok.kind == TokKind::Eof {
                return self.unexpected();
            }
            body.push(self.parse_item()?);
        }
        self.next()?;
        Ok(body)
    }

    fn parse_var_decls(&mut self, kind: VarKind, no_in: bool) -> PResult<VarDecl> {
        let mut decls = Vec::new();
        loop {
            let target = self.parse_binding_target()?;
            let init = if self.eat_punct("=")? { Some(self.parse_assign(no_in)?) } else { None };
            decls.push(VarDeclarator { target, init });
            if !self.eat_punct(",")? {
                break;
            }
        }
        Ok(VarDecl { kind, decls })
    }

    fn parse_for(&mut self) -> PResult<Stmt> {
        self.expect_kw("for")?;
        let is_await = self.eat_kw("await")?;
        self.expect_punct("(")?;
        let mut init = None;
        if !self.is_punct(";") {
            let kind = if self.is_kw("var") {
                Some(VarKind::Var)
            } else if self.is_kw("const") {
                Some(VarKind::Const)
            } else if self.is_let_decl() {
                Some(VarKind::Let)
            } else {
                None
            };
            if let Some(kind) = kind {
                self.next()?;
                let decl = self.parse_var_decls(kind, true)?;
                if self.is_kw("of") || self.is_kw("in") {
                    let of = self.is_kw("of");
                    self.next()?;
                    let right = if of { self.parse_assign(false)? } else { self.parse_expression(false)? };
                    self.expect_punct(")")?;
                    let body = Box::new(self.parse_statement()?);
                    let left = ForHead::Var(decl);
                    return Ok(if of {
                        Stmt::ForOf { left, right, body, is_await }
                    } else {
                        Stmt::ForIn { left, right, body }
                    });
                }
                init = Some(ForInit::Var(decl));
            } else {
                let e = self.parse_expression(true)?;
                if self.is_kw("of") || self.is_kw("in") {
                    let of = self.is_kw("of");
                    self.next()?;
                    let left = ForHead::Pattern(self.expr_to_pattern(e, false)?);
                    let right = if of { self.parse_assign(false)? } else { self.parse_expression(false)? };
                    self.expect_punct(")")?;
                    let body = Box::new(self.parse_statement()?);
                    return Ok(if of {
                        Stmt::ForOf { left, right, body, is_await }
                    } else {
                        Stmt::ForIn { left, right, body }
                    });
                }
                init = Some(ForInit::Expr(e));
            }
        }
        self.expect_punct(";")?;
        let test = if self.is_punct(";") { None } else { Some(self.parse_expression(false)?) };
        self.expect_punct(";")?;
        let update = if self.is_punct(")") { None } else { Some(self.parse_expression(false)?) };
        self.expect_punct(")")?;
        let body = Box::new(self.parse_statement()?);
        Ok(Stmt::For { init, test, update, body })
    }

    fn parse_try(&mut self) -> PResult<Stmt> {
        self.expect_kw("try")?;
        let block = self.parse_block()?;
        let handler = if self.eat_kw("catch")? {
            let param = if self.eat_punct("(")? {
                let p = self.parse_binding_target()?;
                self.expect_punct(")")?;
                Some(p)
            } else {
                None
            };
            let body = self.parse_block()?;
            Some(CatchClause { param, body })
        } else {
            None
        };
        let finalizer = if self.eat_kw("finally")? { Some(self.parse_block()?) } else { None };
        if handler.is_none() && finalizer.is_none() {
            return self.err("try without catch or finally");
        }
        Ok(Stmt::Try { block, handler, finalizer })
    }

    fn parse_switch(&mut self) -> PResult<Stmt> {
        self.expect_kw("switch")?;
        self.expect_punct("(")?;
        let discriminant = self.parse_expression(false)?;
        self.expect_punct(")")?;
        self.expect_punct("{")?;
        let mut cases = Vec::new();
        while !self.eat_punct("}")? {
            let test = if self.eat_kw("case")? {
                Some(self.parse_expression(false)?)
            } else if self.eat_kw("default")? {
                None
            } else {
                return self.unexpected();
            };
            self.expect_punct(":")?;
            let mut body = Vec::new();
            while !(self.is_kw("case") || self.is_kw("default") || self.is_punct("}")) {
                if self.tok.kind == TokKind::Eof {
                    return self.unexpected();
                }
                body.push(self.parse_item()?);
            }
            cases.push(SwitchCase { test, body });
        }
        Ok(Stmt::Switch { discriminant, cases })
    }

    // ---- functions and classes ----

    /// Parses a function after the `function` keyword (and `async`, if any).
    fn parse_function_rest(&mut self, is_async: bool, is_decl: bool, _expr: bool) -> PResult<Function> {
        let is_generator = self.eat_punct("*")?;
        let name = if matches!(self.tok.kind, TokKind::Ident { .. }) && !self.is_punct("(") {
            Some(self.binding_ident()?)
        } else if is_decl {
            // `export default function () {}` is the only anonymous declaration
            None
        } else {
            None
        };
        self.parse_function_params_and_body(name, is_async, is_generator)
    }

    fn parse_function_params_and_body(
        &mut self,
        name: Option<String>,
        is_async: bool,
        is_generator: bool,
    ) -> PResult<Function> {
        let saved = self.ctx;
        self.ctx = FnContext { in_function: true, is_async, is_generator };
        let r = (|| {
            let params = self.parse_params()?;
            let body = FnBody::Block(self.parse_block()?);
            Ok(Function { name, params, body, is_async, is_generator, is_arrow: false })
        })();
        self.ctx = saved;
        r
    }

    fn parse_params(&mut self) -> PResult<Vec<Pattern>> {
        self.expect_punct("(")?;
        let mut params = Vec::new();
        while !self.is_punct(")") {
            if self.eat_punct("...")? {
                let t = self.parse_binding_target()?;
                params.push(Pattern::Rest(Box::new(t)));
                self.eat_punct(",")?;
                if !self.is_punct(")") {
                    return self.err("rest parameter must be last");
                }
                break;
            }
            params.push(self.parse_binding_element()?);
            if !self.is_punct(")") {
                self.expect_punct(",")?;
            }
        }
        self.next()?;
        Ok(params)
    }

    fn parse_binding_element(&mut self) -> PResult<Pattern> {
        let target = self.parse_binding_target()?;
        if self.eat_punct("=")? {
            let d = self.parse_assign(false)?;
            Ok(Pattern::Default(Box::new(target), d))
        } else {
            Ok(target)
        }
    }

    fn parse_binding_target(&mut self) -> PResult<Pattern> {
        if self.eat_punct("[")? {
            let mut items = Vec::new();
            while !self.is_punct("]") {
                if self.eat_punct(",")? {
                    items.push(None);
                    continue;
                }
                if self.eat_punct("...")? {
                    let t = self.parse_binding_target()?;
                    items.push(Some(Pattern::Rest(Box::new(t))));
                } else {
                    items.push(Some(self.parse_binding_element()?));
                }
                if !self.is_punct("]") {
                    self.expect_punct(",")?;
                }
            }
            self.next()?;
            return Ok(Pattern::Array(items));
        }
        if self.eat_punct("{")? {
            let mut props = Vec::new();
            while !self.is_punct("}") {
                if self.eat_punct("...")? {
                    props.push(PatProp::Rest(Pattern::Ident(self.binding_ident()?)));
                } else {
                    let shorthand_name = match &self.tok.kind {
                        TokKind::Ident { name, .. } => Some(name.clone()),
                        _ => None,
                    };
                    let key = self.parse_prop_key()?;
                    if self.eat_punct(":")? {
                        props.push(PatProp::KeyValue(key, self.parse_binding_element()?));
                    } else {
                        let Some(name) = shorthand_name else { return self.unexpected() };
                        if is_reserved(&name) {
                            return self.err(format!("'{name}' cannot be a binding"));
                        }
                        let d = if self.eat_punct("=")? { Some(self.parse_assign(false)?) } else { None };
                        props.push(PatProp::Shorthand(name, d));
                    }
                }
                if !self.is_punct("}") {
                    self.expect_punct(",")?;
                }
            }
            self.next()?;
            return Ok(Pattern::Object(props));
        }
        Ok(Pattern::Ident(self.binding_ident()?))
    }

    fn parse_prop_key(&mut self) -> PResult<PropKey> {
        let key = match &self.tok.kind {
            TokKind::Ident { name, .. } => PropKey::Ident(name.clone()),
            TokKind::Str(s) => PropKey::Str(s.clone()),
            TokKind::Num(n) => PropKey::Num(*n),
            TokKind::BigInt(b) => PropKey::Str(b.clone()),
            TokKind::PrivateName(n) => PropKey::Private(n.clone()),
            TokKind::Punct("[") => {
                self.next()?;
                let e = self.parse_assign(false)?;
                if !self.is_punct("]") {
                    return self.err("expected ']'");
                }
                PropKey::Computed(Box::new(e))
            }
            _ => return self.unexpected(),
        };
        self.next()?;
        Ok(key)
    }

    fn parse_class(&mut self, is_decl: bool) -> PResult<Class> {
        self.expect_kw("class")?;
        let name = if matches!(self.tok.kind, TokKind::Ident { .. }) && !self.is_kw("extends") {
            Some(self.binding_ident()?)
        } else {
            let _ = is_decl;
            None
        };
        let super_class = if self.eat_kw("extends")? { Some(self.parse_lhs()?) } else { None };
        self.expect_punct("{")?;
        let mut members = Vec::new();
        while !self.eat_punct("}")? {
            if self.eat_punct(";")? {
                continue;
            }
            if self.tok.kind == TokKind::Eof {
                return self.unexpected();
            }
            members.push(self.parse_class_member()?);
        }
        Ok(Class { name, super_class, members })
    }

    /// True when the current identifier is a modifier (`static`, `get`, ...)
    /// rather than the member name itself.
    fn modifier_applies(&self) -> PResult<bool> {
        let p = self.peek()?;
        Ok(!matches!(
            p.kind,
            TokKind::Punct("(") | TokKind::Punct("=") | TokKind::Punct(";") | TokKind::Punct("}") | TokKind::Punct(",") | TokKind::Punct(":") | TokKind::Eof
        ) && !(p.nl_before && !matches!(p.kind, TokKind::Punct("*") | TokKind::Punct("[") | TokKind::Punct("{"))))
    }

    fn parse_class_member(&mut self) -> PResult<ClassMember> {
        let mut is_static = false;
        if self.is_kw("static") && self.modifier_applies()? {
            self.next()?;
            is_static = true;
            if self.is_punct("{") {
                let saved = self.ctx;
                self.ctx = FnContext { in_function: true, is_async: false, is_generator: false };
                let body = self.parse_block();
                self.ctx = saved;
                return Ok(ClassMember::StaticBlock(body?));
            }
        }
        let (kind, is_async, is_generator) = self.parse_method_modifiers()?;
        let key = self.parse_prop_key()?;
        if self.is_punct("(") {
            let f = self.parse_function_params_and_body(key.static_name().map(str::to_string), is_async, is_generator)?;
            return Ok(ClassMember::Method { key, kind, is_static, value: Box::new(f) });
        }
        let value = if self.eat_punct("=")? {
            let saved = self.ctx;
            self.ctx = FnContext { in_function: true, is_async: false, is_generator: false };
            let v = self.parse_assign(false);
            self.ctx = saved;
            Some(v?)
        } else {
            None
        };
        self.consume_semicolon()?;
        Ok(ClassMember::Field { key, is_static, value })
    }

    fn parse_method_modifiers(&mut self) -> PResult<(MethodKind, bool, bool)> {
        let mut kind = MethodKind::Method;
        let mut is_async = false;
        if (self.is_kw("get") || self.is_kw("set")) && self.modifier_applies()? {
            kind = if self.is_kw("get") { MethodKind::Get } else { MethodKind::Set };
            self.next()?;
        } else if self.is_kw("async") && self.modifier_applies()? && !self.peek()?.nl_before {
            is_async = true;
            self.next()?;
        }
        let is_generator = self.eat_punct("*")?;
        Ok((kind, is_async, is_generator))
    }

    // ---- expressions ----

    pub fn parse_expression(&mut self, no_in: bool) -> PResult<Expr> {
        let first = self.parse_assign(no_in)?;
        if !self.is_punct(",") {
            return Ok(first);
        }
        let mut items = vec![first];
        while self.eat_punct(",")? {
            items.push(self.parse_assign(no_in)?);
        }
        Ok(Expr::Seq(items))
    }

    fn parse_assign(&mut self, no_in: bool) -> PResult<Expr> {
        self.enter()?;
        let r = self.parse_assign_inner(no_in);
        self.leave();
        r
    }

    fn parse_assign_inner(&mut self, no_in: bool) -> PResult<Expr> {
        if self.ctx.is_generator && self.is_kw("yield") {
            self.next()?;
            if self.tok.nl_before
                || matches!(self.tok.kind, TokKind::Punct(")" | "]" | "}" | "," | ";" | ":") | TokKind::Eof)
                || self.is_kw("in")
            {
                return Ok(Expr::Yield { arg: None, delegate: false });
            }
            let delegate = self.eat_punct("*")?;
            let arg = self.parse_assign(no_in)?;
            return Ok(Expr::Yield { arg: Some(Box::new(arg)), delegate });
        }
        // `x => ...` and `async x => ...`
        if let TokKind::Ident { name, .. } = &self.tok.kind {
            let name = name.clone();
            let p = self.peek()?;
            if p.kind == TokKind::Punct("=>") && !p.nl_before && !is_reserved(&name) {
                self.next()?;
                self.next()?;
                return self.parse_arrow_body(vec![Pattern::Ident(name)], false, no_in);
            }
            if name == "async" && !p.nl_before {
                if let TokKind::Ident { name: param, .. } = &p.kind {
                    if param != "function" {
                        let mut probe = self.lx.clone();
                        let _ = probe.next_token();
                        if let Ok(t) = probe.next_token() {
                            if t.kind == TokKind::Punct("=>") && !t.nl_before {
                                self.next()?;
                                let param = self.binding_ident()?;
                                self.next()?;
                                return self.parse_arrow_body(vec![Pattern::Ident(param)], true, no_in);
                            }
                        }
                    }
                }
            }
        }
        let start_is_paren = self.is_punct("(");
        let left = self.parse_conditional(no_in)?;
        if self.is_punct("=>") && !self.tok.nl_before {
            match left {
                Expr::Paren(inner) if start_is_paren => {
                    self.next()?;
                    let params = self.cover_to_params(*inner)?;
                    return self.parse_arrow_body(params, false, no_in);
                }
                Expr::Call { callee, args, optional: false } if matches!(&*callee, Expr::Ident(n) if n == "async") => {
                    self.next()?;
                    let mut params = Vec::new();
                    for a in args {
                        params.push(self.expr_to_pattern(a, true)?);
                    }
                    return self.parse_arrow_body(params, true, no_in);
                }
                _ => return self.unexpected(),
            }
        }
        if let TokKind::Punct(op) = self.tok.kind {
            if matches!(
                op,
                "=" | "+=" | "-=" | "*=" | "/=" | "%=" | "**=" | "<<=" | ">>=" | ">>>=" | "&=" | "|=" | "^=" | "&&=" | "||=" | "??="
            ) {
                let target = if op == "=" {
                    self.expr_to_pattern(left, false)?
                } else {
                    match left.unparen() {
                        Expr::Ident(_) | Expr::Member { .. } => Pattern::Expr(Box::new(left)),
                        _ => return self.err("invalid assignment target"),
                    }
                };
                self.next()?;
                let value = self.parse_assign(no_in)?;
                return Ok(Expr::Assign { op, target: Box::new(target), value: Box::new(value) });
            }
        }
        if matches!(left, Expr::Paren(ref inner) if is_cover_only(inner)) {
            return self.err("invalid parenthesized expression");
        }
        Ok(left)
    }

    fn cover_to_params(&mut self, inner: Expr) -> PResult<Vec<Pattern>> {
        let items = match inner {
            Expr::Seq(items) => items,
            other => vec![other],
        };
        let mut params = Vec::new();
        for it in items {
            params.push(self.expr_to_pattern(it, true)?);
        }
        Ok(params)
    }

    fn parse_arrow_body(&mut self, params: Vec<Pattern>, is_async: bool, no_in: bool) -> PResult<Expr> {
        let saved = self.ctx;
        self.ctx = FnContext { in_function: true, is_async, is_generator: false };
        let body = if self.is_punct("{") {
            self.parse_block().map(FnBody::Block)
        } else {
            self.parse_assign(no_in).map(|e| FnBody::Expr(Box::new(e)))
        };
        self.ctx = saved;
        Ok(Expr::Arrow(Box::new(Function {
            name: None,
            params,
            body: body?,
            is_async,
            is_generator: false,
            is_arrow: true,
        })))
    }

    fn expr_to_pattern(&self, e: Expr, binding: bool) -> PResult<Pattern> {
        Ok(match e {
            Expr::Ident(n) => {
                if is_reserved(&n) {
                    return self.err(format!("'{n}' cannot be assigned"));
                }
                Pattern::Ident(n)
            }
            Expr::Member { .. } if !binding => Pattern::Expr(Box::new(e)),
            Expr::Paren(inner) if !binding => match *inner {
                Expr::Ident(_) | Expr::Member { .. } => self.expr_to_pattern(*inner, false)?,
                _ => return self.err("invalid assignment target"),
            },
            Expr::Array(items) => {
                let mut out = Vec::new();
                for it in items {
                    out.push(match it {
                        None => None,
                        Some(x) => Some(self.expr_to_pattern(x, binding)?),
                    });
                }
                Pattern::Array(out)
            }
            Expr::Object(props) => {
                let mut out = Vec::new();
                for p in props {
                    out.push(match p {
                        Prop::KeyValue(k, v) => PatProp::KeyValue(k, self.expr_to_pattern(v, binding)?),
                        Prop::Shorthand(n) => PatProp::Shorthand(n, None),
                        Prop::ShorthandInit(n, d) => PatProp::Shorthand(n, Some(d)),
                        Prop::Spread(x) => PatProp::Rest(self.expr_to_pattern(x, binding)?),
                        Prop::Method(..) => return self.err("invalid destructuring target"),
                    });
                }
                Pattern::Object(out)
            }
            Expr::Assign { op: "=", target, value } => Pattern::Default(target, *value),
            Expr::Spread(inner) => Pattern::Rest(Box::new(self.expr_to_pattern(*inner, binding)?)),
            _ => return self.err("invalid assignment target"),
        })
    }

    fn parse_conditional(&mut self, no_in: bool) -> PResult<Expr> {
        let test = self.parse_binary(0, no_in)?;
        if !self.eat_punct("?")? {
            return Ok(test);
        }
        let cons = self.parse_assign(false)?;
        self.expect_punct(":")?;
        let alt = self.parse_assign(no_in)?;
        Ok(Expr::Cond { test: Box::new(test), cons: Box::new(cons), alt: Box::new(alt) })
    }

    fn binary_op(&self, no_in: bool) -> Option<(&'static str, u8)> {
        let op: &'static str = match &self.tok.kind {
            TokKind::Punct(p) => p,
            TokKind::Ident { name, escaped: false } if name == "instanceof" => "instanceof",
            TokKind::Ident { name, escaped: false } if name == "in" && !no_in => "in",
            _ => return None,
        };
        let prec = match op {
            "??" => 1,
            "||" => 2,
            "&&" => 3,
            "|" => 4,
            "^" => 5,
            "&" => 6,
            "==" | "!=" | "===" | "!==" => 7,
            "<" | ">" | "<=" | ">=" | "instanceof" | "in" => 8,
            "<<" | ">>" | ">>>" => 9,
            "+" | "-" => 10,
            "*" | "/" | "%" => 11,
            "**" => 12,
            _ => return None,
        };
        Some((op, prec))
    }

    fn parse_binary(&mut self, min: u8, no_in: bool) -> PResult<Expr> {
        let mut left = if let TokKind::PrivateName(n) = &self.tok.kind {
            let n = n.clone();
            self.next()?;
            if !self.is_kw("in") {
                return self.err("unexpected private name");
            }
            Expr::PrivateName(n)
        } else {
            self.parse_unary()?
        };
        while let Some((op, prec)) = self.binary_op(no_in) {
            if prec < min {
                break;
            }
            self.next()?;
            let right = if op == "**" { self.parse_binary(prec, no_in)? } else { self.parse_binary(prec + 1, no_in)? };
            left = if matches!(op, "||" | "&&" | "??") {
                Expr::Logical { op, left: Box::new(left), right: Box::new(right) }
            } else {
                Expr::Binary { op, left: Box::new(left), right: Box::new(right) }
            };
        }
        Ok(left)
    }

    fn parse_unary(&mut self) -> PResult<Expr> {
        self.enter()?;
        let r = self.parse_unary_inner();
        self.leave();
        r
    }

    fn parse_unary_inner(&mut self) -> PResult<Expr> {
        let op: Option<&'static str> = match &self.tok.kind {
            TokKind::Punct(p @ ("!" | "~" | "+" | "-")) => Some(p),
            TokKind::Ident { name, escaped: false } => match name.as_str() {
                "typeof" => Some("typeof"),
                "void" => Some("void"),
                "delete" => Some("delete"),
                _ => None,
            },
            _ => None,
        };
        if let Some(op) = op {
            self.next()?;
            let arg = self.parse_unary()?;
            return Ok(Expr::Unary { op, arg: Box::new(arg) });
        }
        if let TokKind::Punct(op @ ("++" | "--")) = self.tok.kind {
            self.next()?;
            let arg = self.parse_unary()?;
            if !matches!(arg.unparen(), Expr::Ident(_) | Expr::Member { .. }) {
                return self.err("invalid update target");
            }
            return Ok(Expr::Update { op, prefix: true, arg: Box::new(arg) });
        }
        if self.is_kw("await") && self.ctx.is_async {
            self.next()?;
            let arg = self.parse_unary()?;
            return Ok(Expr::Await(Box::new(arg)));
        }
        let e = self.parse_lhs()?;
        if let TokKind::Punct(op @ ("++" | "--")) = self.tok.kind {
            if !self.tok.nl_before {
                if !matches!(e.unparen(), Expr::Ident(_) | Expr::Member { .. }) {
                    return self.err("invalid update target");
                }
                self.next()?;
                return Ok(Expr::Update { op, prefix: false, arg: Box::new(e) });
            }
        }
        Ok(e)
    }

    fn parse_args(&mut self) -> PResult<Vec<Expr>> {
        self.expect_punct("(")?;
        let mut args = Vec::new();
        while !self.is_punct(")") {
            if self.eat_punct("...")? {
                args.push(Expr::Spread(Box::new(self.parse_assign(false)?)));
            } else {
                args.push(self.parse_assign(false)?);
            }
            if !self.is_punct(")") {
                self.expect_punct(",")?;
            }
        }
        self.next()?;
        Ok(args)
    }

    fn parse_member_prop(&mut self) -> PResult<MemberProp> {
        match &self.tok.kind {
            TokKind::PrivateName(n) => {
                let n = n.clone();
                self.next()?;
                Ok(MemberProp::Private(n))
            }
            _ => Ok(MemberProp::Ident(self.any_ident_name()?)),
        }
    }

    fn parse_lhs(&mut self) -> PResult<Expr> {
        let mut e = if self.is_kw("new") {
            self.parse_new()?
        } else if self.is_kw("super") {
            self.next()?;
            Expr::Super
        } else if self.is_kw("import") {
            self.next()?;
            if self.eat_punct(".")? {
                let meta = self.any_ident_name()?;
                if meta != "meta" {
                    return self.err("expected import.meta");
                }
                Expr::MetaProp("import", "meta")
            } else {
                self.expect_punct("(")?;
                let arg = self.parse_assign(false)?;
                if self.eat_punct(",")? && !self.is_punct(")") {
                    self.parse_assign(false)?;
                    self.eat_punct(",")?;
                }
                self.expect_punct(")")?;
                Expr::Import(Box::new(arg))
            }
        } else {
            self.parse_primary()?
        };
        loop {
            match &self.tok.kind {
                TokKind::Punct(".") => {
                    self.next()?;
                    let prop = self.parse_member_prop()?;
                    e = Expr::Member { object: Box::new(e), prop, optional: false };
                }
                TokKind::Punct("?.") => {
                    self.next()?;
                    if self.is_punct("(") {
                        let args = self.parse_args()?;
                        e = Expr::Call { callee: Box::new(e), args, optional: true };
                    } else if self.eat_punct("[")? {
                        let p = self.parse_expression(false)?;
                        self.expect_punct("]")?;
                        e = Expr::Member { object: Box::new(e), prop: MemberProp::Computed(Box::new(p)), optional: true };
                    } else {
                        let prop = self.parse_member_prop()?;
                        e = Expr::Member { object: Box::new(e), prop, optional: true };
                    }
                }
                TokKind::Punct("[") => {
                    self.next()?;
                    let p = self.parse_expression(false)?;
                    self.expect_punct("]")?;
                    e = Expr::Member { object: Box::new(e), prop: MemberProp::Computed(Box::new(p)), optional: false };
                }
                TokKind::Punct("(") => {
                    let args = self.parse_args()?;
                    e = Expr::Call { callee: Box::new(e), args, optional: false };
                }
                TokKind::Template { .. } => {
                    let quasi = self.parse_template()?;
                    e = Expr::TaggedTemplate { tag: Box::new(e), quasi };
                }
                _ => break,
            }
        }
        Ok(e)
    }

    fn parse_new(&mut self) -> PResult<Expr> {
        self.expect_kw("new")?;
        if self.eat_punct(".")? {
            let t = self.any_ident_name()?;
            if t != "target" {
                return self.err("expected new.target");
            }
            return Ok(Expr::MetaProp("new", "target"));
        }
        let mut callee = if self.is_kw("new") {
            self.parse_new()?
        } else if self.is_kw("import") {
            return self.err("cannot construct import");
        } else {
            self.parse_primary()?
        };
        loop {
            match &self.tok.kind {
                TokKind::Punct(".") => {
                    self.next()?;
                    let prop = self.parse_member_prop()?;
                    callee = Expr::Member { object: Box::new(callee), prop, optional: false };
                }
                TokKind::Punct("[") => {
                    self.next()?;
                    let p = self.parse_expression(false)?;
                    self.expect_punct("]")?;
                    callee = Expr::Member { object: Box::new(callee), prop: MemberProp::Computed(Box::new(p)), optional: false };
                }
                TokKind::Template { .. } => {
                    let quasi = self.parse_template()?;
                    callee = Expr::TaggedTemplate { tag: Box::new(callee), quasi };
                }
                _ => break,
            }
        }
        let args = if self.is_punct("(") { self.parse_args()? } else { Vec::new() };
        Ok(Expr::New { callee: Box::new(callee), args })
    }

    fn parse_template(&mut self) -> PResult<TemplateLit> {
        let mut quasis = Vec::new();
        let mut exprs = Vec::new();
        loop {
            let (cooked, tail) = match &self.tok.kind {
                TokKind::Template { cooked, tail } => (cooked.clone(), *tail),
                _ => return self.unexpected(),
            };
            quasis.push(cooked);
            if tail {
                self.next()?;
                break;
            }
            self.next()?;
            exprs.push(self.parse_expression(false)?);
            if !self.is_punct("}") {
                return self.err("expected '}' in template");
            }
            self.tok = self.lx.rescan_template(self.tok.start)?;
        }
        Ok(TemplateLit { quasis, exprs })
    }

    fn parse_primary(&mut self) -> PResult<Expr> {
        let tok = self.tok.clone();
        match tok.kind {
            TokKind::Ident { ref name, escaped } => {
                if !escaped {
                    match name.as_str() {
                        "this" => {
                            self.next()?;
                            return Ok(Expr::This);
                        }
                        "null" => {
                            self.next()?;
                            return Ok(Expr::Null);
                        }
                        "true" | "false" => {
                            self.next()?;
                            return Ok(Expr::Bool(name == "true"));
                        }
                        "function" => {
                            self.next()?;
                            let f = self.parse_function_rest(false, false, true)?;
                            return Ok(Expr::Function(Box::new(f)));
                        }
                        "async" if self.is_async_function() => {
                            self.next()?;
                            self.next()?;
                            let f = self.parse_function_rest(true, false, true)?;
                            return Ok(Expr::Function(Box::new(f)));
                        }
                        "class" => {
                            let c = self.parse_class(false)?;
                            return Ok(Expr::Class(Box::new(c)));
                        }
                        "new" => return self.parse_new(),
                        n if is_reserved(n) => return self.unexpected(),
                        _ => {}
                    }
                }
                let n = name.clone();
                self.next()?;
                Ok(Expr::Ident(n))
            }
            TokKind::Num(n) => {
                self.next()?;
                Ok(Expr::Num(n))
            }
            TokKind::BigInt(ref b) => {
                let b = b.clone();
                self.next()?;
                Ok(Expr::BigInt(b))
            }
            TokKind::Str(ref s) => {
                let s = s.clone();
                self.next()?;
                Ok(Expr::Str(s))
            }
            TokKind::Template { .. } => Ok(Expr::Template(self.parse_template()?)),
            TokKind::Regex { .. } => unreachable!("regex tokens only come from rescanning"),
            TokKind::Punct("/") | TokKind::Punct("/=") => {
                let t = self.lx.rescan_regex(tok.start, tok.nl_before)?;
                self.tok = t;
                let TokKind::Regex { pattern, flags } = self.next()?.kind else {
                    return self.unexpected();
                };
                Ok(Expr::Regex { pattern, flags })
            }
            TokKind::Punct("(") => self.parse_paren(),
            TokKind::Punct("[") => self.parse_array_literal(),
            TokKind::Punct("{") => self.parse_object_literal(),
            _ => self.unexpected(),
        }
    }

    /// Parenthesized expression or arrow parameter list (cover grammar).
    fn parse_paren(&mut self) -> PResult<Expr> {
        self.expect_punct("(")?;
        let mut items = Vec::new();
        let mut trailing_comma = false;
        let mut has_rest = false;
        while !self.is_punct(")") {
            if self.eat_punct("...")? {
                let t = self.parse_binding_target()?;
                items.push(Expr::Spread(Box::new(pattern_to_cover(t))));
                has_rest = true;
                if !self.is_punct(")") {
                    return self.err("rest element must be last");
                }
                break;
            }
            items.push(self.parse_assign(false)?);
            trailing_comma = false;
            if !self.is_punct(")") {
                self.expect_punct(",")?;
                trailing_comma = true;
            }
        }
        self.next()?;
        let cover_only = items.is_empty() || trailing_comma || has_rest;
        if cover_only && !self.is_punct("=>") {
            return self.err("expected '=>' after parameter list");
        }
        let inner = if items.len() == 1 && !cover_only { items.pop().unwrap_or(Expr::Null) } else { Expr::Seq(items) };
        Ok(Expr::Paren(Box::new(inner)))
    }

    fn parse_array_literal(&mut self) -> PResult<Expr> {
        self.expect_punct("[")?;
        let mut items = Vec::new();
        while !self.is_punct("]") {
            if self.eat_punct(",")? {
                items.push(None);
                continue;
            }
            let e = if self.eat_punct("...")? {
                Expr::Spread(Box::new(self.parse_assign(false)?))
            } else {
                self.parse_assign(false)?
            };
            items.push(Some(e));
            if !self.is_punct("]") {
                self.expect_punct(",")?;
            }
        }
        self.next()?;
        Ok(Expr::Array(items))
    }

    fn parse_object_literal(&mut self) -> PResult<Expr> {
        self.expect_punct("{")?;
        let mut props = Vec::new();
        while !self.is_punct("}") {
            if self.eat_punct("...")? {
                props.push(Prop::Spread(self.parse_assign(false)?));
            } else {
                props.push(self.parse_object_prop()?);
            }
            if !self.is_punct("}") {
                self.expect_punct(",")?;
            }
        }
        self.next()?;
        Ok(Expr::Object(props))
    }

    fn parse_object_prop(&mut self) -> PResult<Prop> {
        let (kind, is_async, is_generator) = self.parse_method_modifiers()?;
        let shorthand = match &self.tok.kind {
            TokKind::Ident { name, escaped } => Some((name.clone(), *escaped)),
            _ => None,
        };
        let key = self.parse_prop_key()?;
        if matches!(key, PropKey::Private(_)) {
            return self.err("private name in object literal");
        }
        if self.is_punct("(") {
            let f = self.parse_function_params_and_body(key.static_name().map(str::to_string), is_async, is_generator)?;
            return Ok(Prop::Method(key, kind, Box::new(f)));
        }
        if kind != MethodKind::Method || is_async || is_generator {
            return self.unexpected();
        }
        if self.eat_punct(":")? {
            return Ok(Prop::KeyValue(key, self.parse_assign(false)?));
        }
        let Some((name, escaped)) = shorthand else { return self.unexpected() };
        if !escaped && is_reserved(&name) {
            return self.err(format!("'{name}' is reserved"));
        }
        if self.eat_punct("=")? {
            let d = self.parse_assign(false)?;
            return Ok(Prop::ShorthandInit(name, d));
        }
        Ok(Prop::Shorthand(name))
    }
}

fn is_cover_only(e: &Expr) -> bool {
    match e {
        Expr::Seq(items) => items.is_empty() || items.iter().any(|i| matches!(i, Expr::Spread(_))),
        _ => false,
    }
}

/// Turns a binding pattern back into an expression so it can sit inside the
/// parenthesized cover until `=>` decides what it is.
fn pattern_to_cover(p: Pattern) -> Expr {
    match p {
        Pattern::Ident(n) => Expr::Ident(n),
        Pattern::Expr(e) => *e,
        Pattern::Rest(inner) => Expr::Spread(Box::new(pattern_to_cover(*inner))),
        Pattern::Default(t, d) => Expr::Assign { op: "=", target: t, value: Box::new(d) },
        Pattern::Array(items) => Expr::Array(items.into_iter().map(|i| i.map(pattern_to_cover)).collect()),
        Pattern::Object(props) => Expr::Object(
            props
                .into_iter()
                .map(|p| match p {
                    PatProp::KeyValue(k, v) => Prop::KeyValue(k, pattern_to_cover(v)),
                    PatProp::Shorthand(n, None) => Prop::Shorthand(n),
                    PatProp::Shorthand(n, Some(d)) => Prop::ShorthandInit(n, d),
                    PatProp::Rest(r) => Prop::Spread(pattern_to_cover(r)),
                })
                .collect(),
        ),
    }
}

/// `{ a = 1 }` is only legal when it ends up as a destructuring pattern; any
/// left in expression position is a syntax error.
struct CoverInitCheck(bool);

impl Visit for CoverInitCheck {
    fn visit_expr(&mut self, e: &Expr) {
        if let Expr::Object(props) = e {
            if props.iter().any(|p| matches!(p, Prop::ShorthandInit(..))) {
                self.0 = true;
                return;
            }
        }
        walk_expr(self, e)
    }
}
