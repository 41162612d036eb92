//! Text syntax for measures.
//!
//! ```text
//! measure  := name '(' [arg (',' arg)*] ')' | name
//! arg      := [ident '='] (expr | '[' expr (',' expr)* ']')
//! mixture  := 'mixture' '(' [expr '*'] measure ('+' [expr '*'] measure)* ')'
//! expr     := arithmetic over numbers, 'pi', 'e' and 'sqrt(..)'
//! ```

use super::Measure;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Num(f64),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Eq,
    Plus,
    Minus,
    Star,
    Slash,
    End,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(text: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut line, mut col) = (1, 1);
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, col);
        if c == '\n' {
            line += 1;
            col = 1;
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        let single = match c {
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '[' => Some(Tok::LBracket),
            ']' => Some(Tok::RBracket),
            ',' => Some(Tok::Comma),
            '=' => Some(Tok::Eq),
            '+' => Some(Tok::Plus),
            '-' | '−' => Some(Tok::Minus),
            '*' => Some(Tok::Star),
            '/' => Some(Tok::Slash),
            _ => None,
        };
        if let Some(tok) = single {
            out.push(Token {
                tok,
                line: l0,
                column: c0,
            });
            i += 1;
            col += 1;
            continue;
        }
        if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    while j < chars.len() && chars[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let s: String = chars[start..i].iter().collect();
            let v = s.parse::<f64>().map_err(|_| Error::Parse {
                line: l0,
                column: c0,
                message: format!("malformed number '{s}'"),
            })?;
            col += i - start;
            out.push(Token {
                tok: Tok::Num(v),
                line: l0,
                column: c0,
            });
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            col += i - start;
            out.push(Token {
                tok: Tok::Ident(s.to_ascii_lowercase()),
                line: l0,
                column: c0,
            });
            continue;
        }
        return Err(Error::Parse {
            line: l0,
            column: c0,
            message: format!("unexpected character '{c}'"),
        });
    }
    out.push(Token {
        tok: Tok::End,
        line,
        column: col,
    });
    Ok(out)
}

#[derive(Debug, Clone)]
enum Value {
    Num(f64),
    List(Vec<f64>),
}

struct Arg {
    name: Option<String>,
    value: Value,
    line: usize,
    column: usize,
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

const NUMERIC_WORDS: [&str; 3] = ["pi", "e", "sqrt"];

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn here(&self) -> (usize, usize) {
        let t = &self.toks[self.pos];
        (t.line, t.column)
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T> {
        let (line, column) = self.here();
        Err(Error::Parse {
            line,
            column,
            message: message.into(),
        })
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<()> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            self.err(format!("expected {what}, found {}", describe(self.peek())))
        }
    }

    fn expr(&mut self) -> Result<f64> {
        let mut v = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    v += self.term()?;
                }
                Tok::Minus => {
                    self.bump();
                    v -= self.term()?;
                }
                _ => return Ok(v),
            }
        }
    }

    fn term(&mut self) -> Result<f64> {
        let mut v = self.factor()?;
        loop {
            match self.peek() {
                // `0.5*gaussian(..)` inside a mixture: leave the '*' to the caller
                Tok::Star if self.measure_follows(1) => return Ok(v),
                Tok::Star => {
                    self.bump();
                    v *= self.factor()?;
                }
                Tok::Slash => {
                    self.bump();
                    v /= self.factor()?;
                }
                _ => return Ok(v),
            }
        }
    }

    fn measure_follows(&self, k: usize) -> bool {
        matches!(self.peek_at(k), Tok::Ident(name) if !NUMERIC_WORDS.contains(&name.as_str()))
    }

    fn factor(&mut self) -> Result<f64> {
        match self.peek().clone() {
            Tok::Minus => {
                self.bump();
                Ok(-self.factor()?)
            }
            Tok::Plus => {
                self.bump();
                self.factor()
            }
            Tok::Num(v) => {
                self.bump();
                Ok(v)
            }
            Tok::LParen => {
                self.bump();
                let v = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(v)
            }
            Tok::Ident(name) => match name.as_str() {
                "pi" => {
                    self.bump();
                    Ok(std::f64::consts::PI)
                }
                "e" => {
                    self.bump();
                    Ok(std::f64::consts::E)
                }
                "sqrt" => {
                    self.bump();
                    self.expect(Tok::LParen, "'(' after sqrt")?;
                    let v = self.expr()?;
                    self.expect(Tok::RParen, "')'")?;
                    Ok(v.sqrt())
                }
                other => self.err(format!("expected a number, found identifier '{other}'")),
            },
            t => self.err(format!("expected a number, found {}", describe(&t))),
        }
    }

    fn measure(&mut self) -> Result<Measure> {
        let (line, column) = self.here();
        let name = match self.bump() {
            Tok::Ident(n) => n,
            t => {
                return Err(Error::Parse {
                    line,
                    column,
                    message: format!("expected a distribution name, found {}", describe(&t)),
                })
            }
        };
        if name == "mixture" || name == "mix" {
            return self.mixture();
        }
        let args = if *self.peek() == Tok::LParen {
            self.bump();
            self.args()?
        } else {
            Vec::new()
        };
        build(&name, args, line, column)
    }

    fn mixture(&mut self) -> Result<Measure> {
        self.expect(Tok::LParen, "'(' after mixture")?;
        self.weighted_sum(true)
    }

    /// `w₁*m₁ + w₂*m₂ + ...`, closed by ')' when `closed`, by the end of
    /// input otherwise. A missing weight counts as 1.
    fn weighted_sum(&mut self, closed: bool) -> Result<Measure> {
        let mut weights = Vec::new();
        let mut comps = Vec::new();
        loop {
            let w = if self.measure_follows(0) {
                1.0
            } else {
                let w = self.expr()?;
                self.expect(Tok::Star, "'*' between weight and component")?;
                w
            };
            weights.push(w);
            comps.push(self.measure()?);
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                }
                Tok::Comma if closed => {
                    self.bump();
                }
                Tok::RParen if closed => {
                    self.bump();
                    break;
                }
                Tok::End if !closed => break,
                t => {
                    let want = if closed {
                        "'+' or ')'"
                    } else {
                        "'+' or end of input"
                    };
                    return self.err(format!("expected {want}, found {}", describe(t)));
                }
            }
        }
        let (line, column) = self.here();
        Measure::mixture(weights, comps).map_err(|e| Error::Parse {
            line,
            column,
            message: e.to_string(),
        })
    }

    fn args(&mut self) -> Result<Vec<Arg>> {
        let mut args = Vec::new();
        if *self.peek() == Tok::RParen {
            self.bump();
            return Ok(args);
        }
        loop {
            let (line, column) = self.here();
            let name = match (self.peek().clone(), self.peek_at(1)) {
                (Tok::Ident(n), Tok::Eq) => {
                    self.bump();
                    self.bump();
                    Some(n)
                }
                _ => None,
            };
            let value = if *self.peek() == Tok::LBracket {
                self.bump();
                let mut xs = Vec::new();
                if *self.peek() != Tok::RBracket {
                    loop {
                        xs.push(self.expr()?);
                        if *self.peek() == Tok::Comma {
                            self.bump();
                        } else {
                            break;
                        }
                    }
                }
                self.expect(Tok::RBracket, "']'")?;
                Value::List(xs)
            } else {
                Value::Num(self.expr()?)
            };
            args.push(Arg {
                name,
                value,
                line,
                column,
            });
            match self.peek() {
                Tok::Comma => {
                    self.bump();
                }
                Tok::RParen => {
                    self.bump();
                    return Ok(args);
                }
                t => return self.err(format!("expected ',' or ')', found {}", describe(t))),
            }
        }
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("'{s}'"),
        Tok::Num(v) => format!("number {v}"),
        Tok::End => "end of input".into(),
        Tok::LParen => "'('".into(),
        Tok::RParen => "')'".into(),
        Tok::LBracket => "'['".into(),
        Tok::RBracket => "']'".into(),
        Tok::Comma => "','".into(),
        Tok::Eq => "'='".into(),
        Tok::Plus => "'+'".into(),
        Tok::Minus => "'-'".into(),
        Tok::Star => "'*'".into(),
        Tok::Slash => "'/'".into(),
    }
}

/// One formal parameter: accepted names and an optional default.
struct Param {
    names: &'static [&'static str],
    default: Option<Value>,
}

const fn p(names: &'static [&'static str]) -> Param {
    Param {
        names,
        default: None,
    }
}

fn bind(
    dist: &str,
    params: &[Param],
    args: Vec<Arg>,
    line: usize,
    column: usize,
) -> Result<Vec<Value>> {
    let perr = |line, column, message: String| Error::Parse {
        line,
        column,
        message,
    };
    let mut slots: Vec<Option<Value>> = vec![None; params.len()];
    let mut next_positional = 0;
    for a in args {
        let idx = match &a.name {
            Some(n) => params
                .iter()
                .position(|p| p.names.contains(&n.as_str()))
                .ok_or_else(|| {
                    let known: Vec<_> = params.iter().map(|p| p.names[0]).collect();
                    perr(
                        a.line,
                        a.column,
                        format!(
                            "unknown parameter '{n}' for {dist}; expected one of {}",
                            known.join(", ")
                        ),
                    )
                })?,
            None => {
                let i = next_positional;
                next_positional += 1;
                if i >= params.len() {
                    return Err(perr(
                        a.line,
                        a.column,
                        format!("{dist} takes at most {} arguments", params.len()),
                    ));
                }
                i
            }
        };
        if slots[idx].is_some() {
            return Err(perr(
                a.line,
                a.column,
                format!("parameter '{}' given twice", params[idx].names[0]),
            ));
        }
        slots[idx] = Some(a.value);
    }
    slots
        .into_iter()
        .zip(params)
        .map(|(v, p)| {
            v.or_else(|| p.default.clone()).ok_or_else(|| {
                perr(
                    line,
                    column,
                    format!("{dist} is missing parameter '{}'", p.names[0]),
                )
            })
        })
        .collect()
}

fn num(v: &Value, what: &str, line: usize, column: usize) -> Result<f64> {
    match v {
        Value::Num(x) => Ok(*x),
        Value::List(_) => Err(Error::Parse {
            line,
            column,
            message: format!("parameter '{what}' must be a number, not a list"),
        }),
    }
}

fn list(v: Value) -> Vec<f64> {
    match v {
        Value::Num(x) => vec![x],
        Value::List(xs) => xs,
    }
}

const LOC: &[&str] = &["mean", "mu", "loc", "location", "m"];
const SCALE: &[&str] = &["std", "sigma", "scale", "sd", "s", "b"];

fn build(name: &str, args: Vec<Arg>, line: usize, column: usize) -> Result<Measure> {
    let wrap = |e: Error| match e {
        Error::Parse { .. } => e,
        other => Error::Parse {
            line,
            column,
            message: other.to_string(),
        },
    };
    let m = match name {
        "gaussian" | "normal" | "gauss" => {
            let v = bind(name, &[p(LOC), p(SCALE)], args, line, column)?;
            Measure::gaussian(
                num(&v[0], "mean", line, column)?,
                num(&v[1], "std", line, column)?,
            )
        }
        "laplace" => {
            let v = bind(name, &[p(LOC), p(SCALE)], args, line, column)?;
            Measure::laplace(
                num(&v[0], "loc", line, column)?,
                num(&v[1], "scale", line, column)?,
            )
        }
        "folded_normal" | "foldednormal" | "folded_norm" | "folded" => {
            let params = [
                p(LOC),
                Param {
                    names: SCALE,
                    default: Some(Value::Num(1.0)),
                },
            ];
            let v = bind(name, &params, args, line, column)?;
            Measure::folded_normal(
                num(&v[0], "loc", line, column)?,
                num(&v[1], "scale", line, column)?,
            )
        }
        "uniform" | "unif" => {
            let v = bind(
                name,
                &[p(&["a", "lo", "low"]), p(&["b", "hi", "high"])],
                args,
                line,
                column,
            )?;
            Measure::uniform(
                num(&v[0], "a", line, column)?,
                num(&v[1], "b", line, column)?,
            )
        }
        "exponential" | "exp" => {
            let v = bind(name, &[p(&["rate", "lambda"])], args, line, column)?;
            Measure::exponential(num(&v[0], "rate", line, column)?)
        }
        "dirac" | "delta" | "point" => {
            let params = [Param {
                names: &["x", "at", "loc"],
                default: Some(Value::Num(0.0)),
            }];
            let v = bind(name, &params, args, line, column)?;
            let x = num(&v[0], "x", line, column)?;
            if !x.is_finite() {
                return Err(wrap(Error::InvalidMeasure(
                    "dirac location must be finite".into(),
                )));
            }
            Ok(Measure::dirac(x))
        }
        "discrete" => {
            let params = [
                p(&["x", "atoms", "locations"]),
                Param {
                    names: &["w", "weights"],
                    default: Some(Value::List(Vec::new())),
                },
            ];
            let mut v = bind(name, &params, args, line, column)?;
            let w = list(v.pop().unwrap());
            let x = list(v.pop().unwrap());
            let w = if w.is_empty() {
                vec![1.0 / x.len().max(1) as f64; x.len()]
            } else {
                w
            };
            Measure::discrete(x, w)
        }
        "empirical" | "sample" => {
            let v = bind(name, &[p(&["x", "values", "samples"])], args, line, column)?;
            Measure::empirical(list(v.into_iter().next().unwrap()))
        }
        other => {
            return Err(Error::Parse {
                line,
                column,
                message: format!(
                    "unknown distribution '{other}'; expected one of gaussian, uniform, laplace, \
                     exponential, folded_normal, dirac, discrete, empirical, mixture"
                ),
            })
        }
    };
    m.map_err(wrap)
}

/// Parses a measure expression such as `mixture(0.5*gaussian(-10,1)+0.5*gaussian(10,1))`.
pub fn parse_measure(text: &str) -> Result<Measure> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
    };
    // a bare weighted sum is a mixture
    let sum = !p.measure_follows(0) || {
        let mut probe = Parser {
            toks: p.toks.clone(),
            pos: 0,
        };
        probe.measure().is_ok() && *probe.peek() == Tok::Plus
    };
    let m = if sum {
        p.weighted_sum(false)?
    } else {
        p.measure()?
    };
    if *p.peek() != Tok::End {
        return p.err(format!("unexpected trailing {}", describe(p.peek())));
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn named_and_positional() {
        assert_eq!(
            parse_measure("gaussian(mean=5,std=1)").unwrap(),
            Measure::gaussian(5.0, 1.0).unwrap()
        );
        assert_eq!(
            parse_measure("gaussian(5, 1)").unwrap(),
            Measure::gaussian(5.0, 1.0).unwrap()
        );
        assert_eq!(
            parse_measure("Uniform(0.4,0.6)").unwrap(),
            Measure::uniform(0.4, 0.6).unwrap()
        );
        assert_eq!(
            parse_measure("folded_normal(2)").unwrap(),
            Measure::folded_normal(2.0, 1.0).unwrap()
        );
        assert_eq!(parse_measure("delta(-1)").unwrap(), Measure::dirac(-1.0));
        assert_eq!(parse_measure("dirac").unwrap(), Measure::dirac(0.0));
    }

    #[test]
    fn arithmetic_in_arguments() {
        let m = parse_measure("gaussian(0, 1/sqrt(2))").unwrap();
        assert_eq!(m, Measure::gaussian(0.0, 1.0 / 2f64.sqrt()).unwrap());
        let d = parse_measure("discrete(x=[-1,0.5,2],w=[1/3,1/3,1/3])").unwrap();
        let Measure::Discrete(d) = d else { panic!() };
        assert_eq!(d.atoms(), &[-1.0, 0.5, 2.0]);
        assert_eq!(
            parse_measure("uniform(-(1+1), 2*pi)").unwrap(),
            Measure::uniform(-2.0, 2.0 * std::f64::consts::PI).unwrap()
        );
        assert_eq!(
            parse_measure("exponential(rate=2e-1)").unwrap(),
            Measure::exponential(0.2).unwrap()
        );
    }

    #[test]
    fn mixtures() {
        let m = parse_measure("mixture(0.5*gaussian(-10,1)+0.5*gaussian(10,1))").unwrap();
        let Measure::Mixture(mix) = m else { panic!() };
        assert_eq!(mix.weights(), &[0.5, 0.5]);
        assert_eq!(mix.components()[1], Measure::gaussian(10.0, 1.0).unwrap());
        let m = parse_measure("mixture(1/4*dirac(0) + 3/4*dirac(1))").unwrap();
        assert_eq!(m.cdf_right(0.0), 0.25);
        let bare = parse_measure("0.5*gaussian(-10,1) + 0.5*gaussian(10,1)").unwrap();
        assert_eq!(
            bare,
            parse_measure("mix(0.5*gaussian(-10,1), 0.5*gaussian(10,1))").unwrap()
        );
        assert!(parse_measure("0.5*gaussian(0,1) +").is_err());
    }

    #[test]
    fn errors_carry_positions() {
        match parse_measure("gaussian(5,1") {
            Err(Error::Parse { column, .. }) => assert_eq!(column, 13),
            other => panic!("{other:?}"),
        }
        match parse_measure("cauchy(0,1)") {
            Err(Error::Parse {
                message, column, ..
            }) => {
                assert_eq!(column, 1);
                assert!(message.contains("unknown distribution"));
            }
            other => panic!("{other:?}"),
        }
        match parse_measure("gaussian(0,-1)") {
            Err(Error::Parse { message, .. }) => assert!(message.contains("std")),
            other => panic!("{other:?}"),
        }
        assert!(parse_measure("gaussian(mean=0,mean=1)").is_err());
        assert!(parse_measure("gaussian(0,1,2)").is_err());
        assert!(parse_measure("gaussian(0,1) x").is_err());
        assert!(parse_measure("discrete(x=[0,1],w=[0.5,0.6])").is_err());
        assert!(parse_measure("gaussian(0,$)").is_err());
    }
}
