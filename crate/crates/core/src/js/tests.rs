use super::ast::*;
use super::parse_script;

fn ok(src: &str) -> Program {
    match parse_script(src) {
        Ok(p) => p,
        Err(e) => panic!("failed to parse {src:?}: {e}"),
    }
}

fn bad(src: &str) {
    assert!(parse_script(src).is_err(), "expected error for {src:?}");
}

fn expr(src: &str) -> Expr {
    match ok(src).body.into_iter().next() {
        Some(Stmt::Expr(e)) => e,
        other => panic!("not an expression statement: {other:?}"),
    }
}

#[test]
fn precedence_and_associativity() {
    let e = expr("a + b * c");
    let Expr::Binary { op: "+", right, .. } = e else { panic!() };
    assert!(matches!(*right, Expr::Binary { op: "*", .. }));

    let e = expr("a ** b ** c");
    let Expr::Binary { op: "**", left, right } = e else { panic!() };
    assert!(matches!(*left, Expr::Ident(_)));
    assert!(matches!(*right, Expr::Binary { op: "**", .. }));

    let e = expr("a - b - c");
    let Expr::Binary { op: "-", left, .. } = e else { panic!() };
    assert!(matches!(*left, Expr::Binary { op: "-", .. }));

    assert!(matches!(expr("a || b && c"), Expr::Logical { op: "||", .. }));
    assert!(matches!(expr("a ? b : c ? d : e"), Expr::Cond { .. }));
}

#[test]
fn arrows_and_cover_grammar() {
    for src in [
        "x => x",
        "(x) => x",
        "() => {}",
        "(a, b,) => a",
        "(a = 1, {b, c: [d]}, ...rest) => a",
        "async x => await x",
        "async (a, b) => { await a; }",
        "f((a) => a, b => b)",
    ] {
        ok(src);
    }
    let Expr::Arrow(f) = expr("(a, [b, c] = [], ...d) => 0") else { panic!() };
    let mut names = Vec::new();
    f.params.iter().for_each(|p| p.bound_names(&mut names));
    assert_eq!(names, ["a", "b", "c", "d"]);

    // plain parenthesized expressions still work
    assert!(matches!(expr("(a, b)"), Expr::Paren(_)));
    bad("()");
    bad("(a, b,)");
    bad("(...a)");
    // `async` alone is just an identifier
    assert!(matches!(expr("async(1)"), Expr::Call { .. }));
}

#[test]
fn regex_versus_division() {
    let Expr::Binary { op: "/", .. } = expr("a / b / c") else { panic!() };
    let Expr::Regex { pattern, flags } = expr("/ab+c/gi") else { panic!() };
    assert_eq!((pattern.as_str(), flags.as_str()), ("ab+c", "gi"));
    ok("x = /[/]/.test(s)");
    ok("if (a) /re/.exec(b)");
    ok("var r = a ? /x/ : /y/;");
    ok("f(/=/)");
}

#[test]
fn templates() {
    let Expr::Template(t) = expr("`a${b}c${`d${e}`}f`") else { panic!() };
    assert_eq!(t.quasis, ["a", "c", "f"]);
    assert_eq!(t.exprs.len(), 2);
    assert!(matches!(expr("tag`x${1}`"), Expr::TaggedTemplate { .. }));
    ok("`${ {a: 1}.a }`");
}

#[test]
fn automatic_semicolon_insertion() {
    assert_eq!(ok("a\nb\nc").body.len(), 3);
    assert_eq!(ok("var a = 1\nvar b = 2").body.len(), 2);
    // no ASI before `(`
    assert_eq!(ok("a\n(b)").body.len(), 1);
    // restricted production: return\nvalue
    let p = ok("function f(){ return\n1 }");
    let Stmt::Function(f) = &p.body[0] else { panic!() };
    let FnBody::Block(b) = &f.body else { panic!() };
    assert_eq!(b[0], Stmt::Return(None));
    // postfix ++ does not attach across a newline
    assert_eq!(ok("a\n++b").body.len(), 2);
    bad("a b");
    bad("throw\nx");
}

#[test]
fn statements() {
    ok("for (var i = 0, n = a.length; i < n; i++) {}");
    ok("for (let k in o) ; for (const v of xs) ; for (;;) break;");
    ok("for (a.b of c) {} for ([x, y] of pairs) {}");
    ok("for (var i = 0 in o);".replace(" = 0", "").as_str());
    ok("outer: for (;;) { inner: while (1) { continue outer; } }");
    ok("switch (x) { case 1: case 2: f(); break; default: g() }");
    ok("try { a() } catch { } finally { b() }");
    ok("try { a() } catch ({message}) { }");
    ok("do x++; while (x < 5) y()");
    ok("with (o) { p }");
    ok("if (a) function f(){}");
    ok("let = 5; let\nfoo");
    bad("try {}");
    bad("return 1");
    bad("for (;;");
}

#[test]
fn functions_classes_objects() {
    ok("function* g() { yield; yield* other(); var x = yield 1; }");
    ok("async function f() { for await (const x of y) {} }");
    ok("class A extends B { static #n = 1; #p; get x() { return this.#p } set x(v) {} static { init() } async *gen() {} constructor() { super(); } m() { return #p in this } }");
    ok("var o = { a, b: 1, [c]: 2, get d() {}, set d(v) {}, async e() {}, *f() {}, ...g, 'h': 1, 3: 4, get: 1, set: 2, async: 3, new: 4 }");
    ok("({ a = 1, b } = obj)");
    ok("[a, , b = 2, ...c] = arr");
    ok("new Foo; new Foo.Bar(1); new new X()(); new (f())()");
    ok("a?.b?.[c]?.(d)");
    ok("import('x').then(m => m)");
    ok("x ??= y; x ||= y; x &&= y; x **= 2; x >>>= 1");
    bad("x = { a = 1 }");
    bad("f([{ a = 1 }])");
    ok("({ a: [{ b = 1 }] } = o)");
    ok("({ b = 1 }) => b");
    bad("1 = 2");
    bad("a + b = c");
    bad("++f()");
}

#[test]
fn web_legacy_syntax() {
    ok("<!-- hide\nvar x = 010;\n--> done\n");
    ok("#!/usr/bin/env node\nvar a = 1");
    ok("var s = '\\101\\0';");
}

#[test]
fn modules_parse_loosely() {
    let p = ok("import x, {a as b} from './m.js'; export default function () {} export { c as d }; export * from 'z'; export const e = 1;");
    assert!(matches!(&p.body[0], Stmt::Import { source } if source == "./m.js"));
    assert_eq!(p.body.len(), 5);
}

#[test]
fn deep_nesting_is_an_error_not_a_crash() {
    let deep = format!("{}1{}", "(".repeat(5000), ")".repeat(5000));
    let e = parse_script(&deep).unwrap_err();
    assert!(e.message.contains("too deep"));
    let arrays = format!("x = {}{}", "[".repeat(3000), "]".repeat(3000));
    assert!(parse_script(&arrays).is_err());
    let blocks = format!("{}{}", "{".repeat(3000), "}".repeat(3000));
    assert!(parse_script(&blocks).is_err());
    // moderate nesting is fine
    ok(&format!("{}1{}", "(".repeat(100), ")".repeat(100)));
}

#[test]
fn error_position_is_reported() {
    let src = "var a = 1;\nvar b = ;";
    let e = parse_script(src).unwrap_err();
    assert_eq!(e.line_col(src), (2, 9));
}

#[test]
fn minified_bundle_shape() {
    let src = r#"!function(e){var t={};function n(r){if(t[r])return t[r].exports;var o=t[r]={i:r,l:!1,exports:{}};return e[r].call(o.exports,o,o.exports,n),o.l=!0,o.exports}n.m=e,n.c=t,n.d=function(e,t,r){n.o(e,t)||Object.defineProperty(e,t,{enumerable:!0,get:r})},n.p="",n(n.s=0)}([function(e,t){e.exports=function(){return"ok"}}]);"#;
    ok(src);
}

mod fuzz {
    use super::super::parse_script;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(256))]

        #[test]
        fn never_panics_on_arbitrary_text(s in "\\PC{0,200}") {
            let _ = parse_script(&s);
        }

        #[test]
        fn never_panics_on_token_soup(toks in proptest::collection::vec(
            prop::sample::select(vec![
                "a", "1", "(", ")", "{", "}", "[", "]", "=>", "/", "`", "${", "'s'", ";", ",",
                "\n", "function", "class", "async", "await", "yield", "?.", "...", "=", "+",
                "if", "else", "for", "of", "in", "let", "return", "<!--", "-->", "#p",
            ]),
            0..40,
        )) {
            let src = toks.join(" ");
            let _ = parse_script(&src);
        }
    }
}
