use super::ParseError;

#[derive(Debug, Clone, PartialEq)]
pub enum TokKind {
    Ident { name: String, escaped: bool },
    PrivateName(String),
    Punct(&'static str),
    Num(f64),
    BigInt(String),
    Str(String),
    /// Template chunk. `tail` is true when the chunk ends with a backtick.
    Template { cooked: String, tail: bool },
    Regex { pattern: String, flags: String },
    Eof,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub kind: TokKind,
    pub start: usize,
    pub end: usize,
    /// A line terminator appeared between the previous token and this one.
    pub nl_before: bool,
}

const PUNCTUATORS: &[&str] = &[
    ">>>=", "...", "===", "!==", "**=", "<<=", ">>=", ">>>", "&&=", "||=", "??=", "=>", "==", "!=",
    "<=", ">=", "&&", "||", "??", "?.", "++", "--", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=",
    "<<", ">>", "**", "{", "}", "(", ")", "[", "]", ";", ",", "<", ">", "+", "-", "*", "/", "%",
    "&", "|", "^", "!", "~", "?", ":", "=", ".", "@",
];

pub(crate) fn is_line_terminator(c: char) -> bool {
    matches!(c, '\n' | '\r' | '\u{2028}' | '\u{2029}')
}

fn is_whitespace(c: char) -> bool {
    matches!(
        c,
        ' ' | '\t' | '\u{000B}' | '\u{000C}' | '\u{00A0}' | '\u{FEFF}'
    ) || (c > '\u{7f}' && c.is_whitespace() && !is_line_terminator(c))
}

pub(crate) fn is_id_start(c: char) -> bool {
    c == '$' || c == '_' || c.is_ascii_alphabetic() || (c > '\u{7f}' && c.is_alphabetic())
}

pub(crate) fn is_id_part(c: char) -> bool {
    is_id_start(c) || c.is_ascii_digit() || c == '\u{200C}' || c == '\u{200D}' || (c > '\u{7f}' && c.is_alphanumeric())
}

#[derive(Clone)]
pub struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    pub fn new(src: &'a str) -> Self {
        Lexer { src, pos: 0 }
    }

    pub fn source(&self) -> &'a str {
        self.src
    }

    pub fn reset_to(&mut self, pos: usize) {
        self.pos = pos;
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn peek_at(&self, offset: usize) -> Option<char> {
        self.src[self.pos..].chars().nth(offset)
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn err(&self, msg: impl Into<String>) -> ParseError {
        ParseError::new(msg, self.pos)
    }

    /// Skips whitespace and comments, reporting whether a line break was crossed.
    fn skip_trivia(&mut self, mut nl: bool) -> Result<bool, ParseError> {
        let at_start = self.pos == 0;
        let mut line_start = at_start || nl;
        while let Some(c) = self.peek() {
            if is_line_terminator(c) {
                self.bump();
                nl = true;
                line_start = true;
            } else if is_whitespace(c) {
                self.bump();
            } else if self.rest().starts_with("//") || self.rest().starts_with("<!--") || (line_start && self.rest().starts_with("-->")) {
                self.skip_line();
            } else if self.rest().starts_with("/*") {
                let start = self.pos;
                match self.rest()[2..].find("*/") {
                    Some(end) => {
                        let body = &self.src[start + 2..start + 2 + end];
                        if body.chars().any(is_line_terminator) {
                            nl = true;
                            line_start = true;
                        }
                        self.pos = start + 2 + end + 2;
                    }
                    None => return Err(ParseError::new("unterminated comment", start)),
                }
            } else {
                break;
            }
        }
        Ok(nl)
    }

    fn skip_line(&mut self) {
        while let Some(c) = self.peek() {
            if is_line_terminator(c) {
                break;
            }
            self.bump();
        }
    }

    pub fn next_token(&mut self) -> Result<Token, ParseError> {
        let nl_before = self.skip_trivia(false)?;
        let start = self.pos;
        let Some(c) = self.peek() else {
            return Ok(Token { kind: TokKind::Eof, start, end: start, nl_before });
        };
        let kind = if is_id_start(c) || c == '\\' {
            let (name, escaped) = self.read_ident_name()?;
            TokKind::Ident { name, escaped }
        } else if c == '#' {
            self.bump();
            match self.peek() {
                Some(n) if is_id_start(n) || n == '\\' => {
                    let (name, _) = self.read_ident_name()?;
                    TokKind::PrivateName(name)
                }
                // hashbang on the very first line
                Some('!') if start == 0 => {
                    self.skip_line();
                    return self.next_token();
                }
                _ => return Err(self.err("unexpected '#'")),
            }
        } else if c.is_ascii_digit() || (c == '.' && self.peek_at(1).is_some_and(|d| d.is_ascii_digit())) {
            self.read_number()?
        } else if c == '"' || c == '\'' {
            TokKind::Str(self.read_string(c)?)
        } else if c == '`' {
            self.bump();
            self.read_template_chunk()?
        } else {
            let rest = self.rest();
            let mut found = None;
            for p in PUNCTUATORS {
                if rest.starts_with(p) {
                    // `?.5` is a conditional followed by a number
                    if *p == "?." && rest[2..].starts_with(|d: char| d.is_ascii_digit()) {
                        continue;
                    }
                    found = Some(*p);
                    break;
                }
            }
            match found {
                Some(p) => {
                    self.pos += p.len();
                    TokKind::Punct(p)
                }
                None => return Err(self.err(format!("unexpected character {c:?}"))),
            }
        };
        Ok(Token { kind, start, end: self.pos, nl_before })
    }

    fn read_ident_name(&mut self) -> Result<(String, bool), ParseError> {
        let mut name = String::new();
        let mut escaped = false;
        let mut first = true;
        while let Some(c) = self.peek() {
            if c == '\\' {
                self.bump();
                if self.bump() != Some('u') {
                    return Err(self.err("invalid escape in identifier"));
                }
                let ch = self.read_unicode_escape_body()?;
                if !(if first { is_id_start(ch) } else { is_id_part(ch) }) {
                    return Err(self.err("invalid identifier escape"));
                }
                name.push(ch);
                escaped = true;
            } else if (first && is_id_start(c)) || (!first && is_id_part(c)) {
                name.push(c);
                self.bump();
            } else {
                break;
            }
            first = false;
        }
        Ok((name, escaped))
    }

    /// Reads the part after `\u`: either `XXXX` or `{X...}`.
    fn read_unicode_escape_body(&mut self) -> Result<char, ParseError> {
        let code = if self.peek() == Some('{') {
            self.bump();
            let mut v: u32 = 0;
            let mut digits = 0;
            loop {
                match self.bump() {
                    Some('}') if digits > 0 => break,
                    Some(h) if h.is_ascii_hexdigit() => {
                        v = v.saturating_mul(16).saturating_add(h.to_digit(16).unwrap_or(0));
                        digits += 1;
                    }
                    _ => return Err(self.err("bad unicode escape")),
                }
            }
            v
        } else {
            self.read_hex_digits(4)?
        };
        Ok(char::from_u32(code).unwrap_or('\u{FFFD}'))
    }

    fn read_hex_digits(&mut self, n: usize) -> Result<u32, ParseError> {
        let mut v = 0u32;
        for _ in 0..n {
            match self.bump() {
                Some(h) if h.is_ascii_hexdigit() => v = v * 16 + h.to_digit(16).unwrap_or(0),
                _ => return Err(self.err("bad hex escape")),
            }
        }
        Ok(v)
    }

    fn read_digits(&mut self, radix: u32, out: &mut String) -> Result<(), ParseError> {
        let mut last_sep = true;
        let mut any = false;
        while let Some(c) = self.peek() {
            if c == '_' {
                if last_sep {
                    return Err(self.err("misplaced numeric separator"));
                }
                last_sep = true;
                self.bump();
            } else if c.is_digit(radix) {
                out.push(c);
                last_sep = false;
                any = true;
                self.bump();
            } else {
                break;
            }
        }
        if any && last_sep {
            return Err(self.err("trailing numeric separator"));
        }
        Ok(())
    }

    fn read_number(&mut self) -> Result<TokKind, ParseError> {
        let start = self.pos;
        let rest = self.rest();
        let radix = if rest.len() > 1 && rest.starts_with('0') {
            match rest.as_bytes()[1] {
                b'x' | b'X' => 16,
                b'o' | b'O' => 8,
                b'b' | b'B' => 2,
                _ => 10,
            }
        } else {
            10
        };
        let kind = if radix != 10 {
            self.pos += 2;
            let mut digits = String::new();
            self.read_digits(radix, &mut digits)?;
            if digits.is_empty() {
                return Err(self.err("missing digits"));
            }
            if self.peek() == Some('n') {
                self.bump();
                TokKind::BigInt(self.src[start..self.pos - 1].to_string())
            } else {
                let v = digits
                    .chars()
                    .fold(0f64, |acc, d| acc * radix as f64 + d.to_digit(radix).unwrap_or(0) as f64);
                TokKind::Num(v)
            }
        } else if rest.len() > 1
            && rest.starts_with('0')
            && rest.as_bytes()[1].is_ascii_digit()
        {
            // legacy octal (or decimal with leading zero when it has 8/9)
            let mut digits = String::new();
            while let Some(c) = self.peek() {
                if c.is_ascii_digit() {
                    digits.push(c);
                    self.bump();
                } else {
                    break;
                }
            }
            let v = if digits.chars().all(|d| d < '8') {
                digits.chars().fold(0f64, |acc, d| acc * 8.0 + d.to_digit(8).unwrap_or(0) as f64)
            } else {
                digits.parse::<f64>().unwrap_or(f64::NAN)
            };
            TokKind::Num(v)
        } else {
            let mut text = String::new();
            self.read_digits(10, &mut text)?;
            if self.peek() == Some('n') {
                self.bump();
                TokKind::BigInt(text)
            } else {
                if self.peek() == Some('.') {
                    self.bump();
                    text.push('.');
                    self.read_digits(10, &mut text)?;
                }
                if matches!(self.peek(), Some('e' | 'E')) {
                    self.bump();
                    text.push('e');
                    if let Some(s @ ('+' | '-')) = self.peek() {
                        self.bump();
                        text.push(s);
                    }
                    let before = text.len();
                    self.read_digits(10, &mut text)?;
                    if text.len() == before {
                        return Err(self.err("missing exponent"));
                    }
                }
                if text.starts_with('.') {
                    text.insert(0, '0');
                }
                TokKind::Num(text.parse::<f64>().map_err(|_| self.err("bad number"))?)
            }
        };
        if self.peek().is_some_and(|c| is_id_start(c) || c.is_ascii_digit()) {
            return Err(self.err("identifier directly after number"));
        }
        Ok(kind)
    }

    /// Handles one escape sequence after the backslash. Returns `None` for a
    /// line continuation.
    fn read_escape(&mut self, in_template: bool) -> Result<Option<String>, ParseError> {
        let Some(c) = self.bump() else {
            return Err(self.err("unterminated escape"));
        };
        let s = match c {
            'n' => "\n".to_string(),
            't' => "\t".to_string(),
            'r' => "\r".to_string(),
            'b' => "\u{8}".to_string(),
            'f' => "\u{c}".to_string(),
            'v' => "\u{b}".to_string(),
            'x' => char::from_u32(self.read_hex_digits(2)?).unwrap_or('\u{FFFD}').to_string(),
            'u' => self.read_unicode_escape_body()?.to_string(),
            '\r' => {
                if self.peek() == Some('\n') {
                    self.bump();
                }
                return Ok(None);
            }
            c if is_line_terminator(c) => return Ok(None),
            '0'..='7' => {
                if in_template && !(c == '0' && !self.peek().is_some_and(|d| d.is_ascii_digit())) {
                    return Err(self.err("octal escape in template"));
                }
                let mut v = c.to_digit(8).unwrap_or(0);
                for _ in 0..2 {
                    match self.peek() {
                        Some(d @ '0'..='7') if v * 8 + d.to_digit(8).unwrap_or(0) < 256 => {
                            v = v * 8 + d.to_digit(8).unwrap_or(0);
                            self.bump();
                        }
                        _ => break,
                    }
                }
                char::from_u32(v).unwrap_or('\u{FFFD}').to_string()
            }
            other => other.to_string(),
        };
        Ok(Some(s))
    }

    fn read_string(&mut self, quote: char) -> Result<String, ParseError> {
        let start = self.pos;
        self.bump();
        let mut out = String::new();
        loop {
            match self.peek() {
                None => return Err(ParseError::new("unterminated string", start)),
                Some(c) if c == quote => {
                    self.bump();
                    return Ok(out);
                }
                Some('\\') => {
                    self.bump();
                    if let Some(s) = self.read_escape(false)? {
                        out.push_str(&s);
                    }
                }
                Some('\n' | '\r') => return Err(ParseError::new("unterminated string", start)),
                Some(c) => {
                    out.push(c);
                    self.bump();
                }
            }
        }
    }

    /// Reads template characters after a backtick or a closing `}`.
    fn read_template_chunk(&mut self) -> Result<TokKind, ParseError> {
        let start = self.pos;
        let mut cooked = String::new();
        loop {
            match self.peek() {
                None => return Err(ParseError::new("unterminated template", start)),
                Some('`') => {
                    self.bump();
                    return Ok(TokKind::Template { cooked, tail: true });
                }
                Some('$') if self.peek_at(1) == Some('{') => {
                    self.pos += 2;
                    return Ok(TokKind::Template { cooked, tail: false });
                }
                Some('\\') => {
                    self.bump();
                    // invalid escapes are allowed in tagged templates; keep going
                    match self.read_escape(true) {
                        Ok(Some(s)) => cooked.push_str(&s),
                        Ok(None) => {}
                        Err(_) => {}
                    }
                }
                Some(c) => {
                    cooked.push(c);
                    self.bump();
                }
            }
        }
    }

    /// Re-reads the token starting at `start` (a `}`) as a template continuation.
    pub fn rescan_template(&mut self, start: usize) -> Result<Token, ParseError> {
        self.pos = start + 1;
        let kind = self.read_template_chunk()?;
        Ok(Token { kind, start, end: self.pos, nl_before: false })
    }

    /// Re-reads the token starting at `start` (a `/` or `/=`) as a regex literal.
    pub fn rescan_regex(&mut self, start: usize, nl_before: bool) -> Result<Token, ParseError> {
        self.pos = start + 1;
        let mut pattern = String::new();
        let mut in_class = false;
        loop {
            match self.bump() {
                None => return Err(ParseError::new("unterminated regex", start)),
                Some(c) if is_line_terminator(c) => {
                    return Err(ParseError::new("unterminated regex", start))
                }
                Some('\\') => {
                    pattern.push('\\');
                    match self.bump() {
                        Some(c) if !is_line_terminator(c) => pattern.push(c),
                        _ => return Err(ParseError::new("unterminated regex", start)),
                    }
                }
                Some('[') => {
                    in_class = true;
                    pattern.push('[');
                }
                Some(']') => {
                    in_class = false;
                    pattern.push(']');
                }
                Some('/') if !in_class => break,
                Some(c) => pattern.push(c),
            }
        }
        let mut flags = String::new();
        while let Some(c) = self.peek() {
            if is_id_part(c) {
                flags.push(c);
                self.bump();
            } else {
                break;
            }
        }
        Ok(Token { kind: TokKind::Regex { pattern, flags }, start, end: self.pos, nl_before })
    }
}
