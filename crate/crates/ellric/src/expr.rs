//! Complex literals for the command line: `0.31+0.17i`, `(1+tau)/2`, `[0.5, 1]`.

use ellric_core::C64;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("cannot parse `{input}` as a complex number: {reason} (at byte {at})")]
pub struct ExprError {
    pub input: String,
    pub reason: &'static str,
    pub at: usize,
}

/// Parses `s`; the identifier `tau` evaluates to `tau`.
pub fn parse_complex(s: &str, tau: C64) -> Result<C64, ExprError> {
    let mut p = Parser { src: s, bytes: s.as_bytes(), pos: 0, tau };
    let v = p.expr()?;
    p.skip_ws();
    if p.pos != p.bytes.len() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(v)
}

/// Comma-separated complex values; brackets and parentheses protect inner commas.
pub fn parse_list(s: &str, tau: C64) -> Result<Vec<C64>, ExprError> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, ch) in s.char_indices() {
        match ch {
            '(' | '[' => depth += 1,
            ')' | ']' => depth -= 1,
            ',' if depth == 0 => {
                out.push(parse_complex(&s[start..i], tau)?);
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(parse_complex(&s[start..], tau)?);
    Ok(out)
}

struct Parser<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
    tau: C64,
}

impl Parser<'_> {
    fn err(&self, reason: &'static str) -> ExprError {
        ExprError { input: self.src.to_string(), reason, at: self.pos }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.bytes.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<C64, ExprError> {
        let mut v = self.term()?;
        loop {
            if self.eat(b'+') {
                v += self.term()?;
            } else if self.eat(b'-') {
                v -= self.term()?;
            } else {
                return Ok(v);
            }
        }
    }

    fn term(&mut self) -> Result<C64, ExprError> {
        let mut v = self.unary()?;
        loop {
            if self.eat(b'*') {
                v *= self.unary()?;
            } else if self.eat(b'/') {
                let d = self.unary()?;
                if d.norm() == 0.0 {
                    return Err(self.err("division by zero"));
                }
                v /= d;
            } else {
                return Ok(v);
            }
        }
    }

    fn unary(&mut self) -> Result<C64, ExprError> {
        if self.eat(b'-') {
            return Ok(-self.unary()?);
        }
        if self.eat(b'+') {
            return self.unary();
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<C64, ExprError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let v = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.err("expected `)`"));
                }
                self.suffix(v)
            }
            Some(b'[') => {
                self.pos += 1;
                let re = self.expr()?;
                if !self.eat(b',') {
                    return Err(self.err("expected `,` in [re, im]"));
                }
                let im = self.expr()?;
                if !self.eat(b']') {
                    return Err(self.err("expected `]`"));
                }
                if re.im != 0.0 || im.im != 0.0 {
                    return Err(self.err("[re, im] parts must be real"));
                }
                Ok(C64::new(re.re, im.re))
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => {
                let v = self.number()?;
                self.suffix(C64::new(v, 0.0))
            }
            Some(c) if c.is_ascii_alphabetic() => self.ident(),
            Some(_) => Err(self.err("unexpected character")),
            None => Err(self.err("unexpected end of input")),
        }
    }

    /// Implicit products such as `0.17i`, `2tau` or `(1+tau)i`.
    fn suffix(&mut self, v: C64) -> Result<C64, ExprError> {
        match self.bytes.get(self.pos) {
            Some(c) if c.is_ascii_alphabetic() => Ok(v * self.ident()?),
            _ => Ok(v),
        }
    }

    fn number(&mut self) -> Result<f64, ExprError> {
        let start = self.pos;
        let b = self.bytes;
        while self.pos < b.len() && (b[self.pos].is_ascii_digit() || b[self.pos] == b'.') {
            self.pos += 1;
        }
        if self.pos < b.len() && (b[self.pos] == b'e' || b[self.pos] == b'E') {
            let mut look = self.pos + 1;
            if look < b.len() && (b[look] == b'+' || b[look] == b'-') {
                look += 1;
            }
            if look < b.len() && b[look].is_ascii_digit() {
                self.pos = look;
                while self.pos < b.len() && b[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
            }
        }
        self.src[start..self.pos].parse().map_err(|_| ExprError {
            input: self.src.to_string(),
            reason: "malformed number",
            at: start,
        })
    }

    fn ident(&mut self) -> Result<C64, ExprError> {
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_alphabetic() {
            self.pos += 1;
        }
        match &self.src[start..self.pos] {
            "i" | "j" => Ok(C64::new(0.0, 1.0)),
            "tau" => Ok(self.tau),
            "pi" => Ok(C64::new(std::f64::consts::PI, 0.0)),
            _ => {
                self.pos = start;
                Err(self.err("unknown identifier"))
            }
        }
    }
}
