//! Line-oriented DSL for describing systems, plus the canonical printer.
//!
//! ```text
//! system cr
//! independent x,y
//! dependent u,v
//! eq: D[u,x] - D[v,y] = 0
//! eq: D[u,y] + D[v,x] = 0
//! ```
//!
//! Coefficients are rational literals ("p/q" or integers), comments start
//! with `#`. Products of jet variables are rejected with a position-carrying
//! error rather than linearized.

use std::collections::BTreeMap;

use num::traits::{One, Zero};

use crate::error::JsError;
use crate::jet::{JetSystem, JetVariable, LinDiffPoly};
use crate::multiindex::MultiIndex;
use crate::Rat;

struct Line {
    no: usize,
    chars: Vec<char>,
    pos: usize,
}

impl Line {
    fn col(&self) -> usize {
        self.pos + 1
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(c) if c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn at_end(&mut self) -> bool {
        self.skip_ws();
        self.peek().is_none()
    }

    fn err(&self, msg: &str) -> JsError {
        JsError::Syntax {
            line: self.no,
            col: self.col(),
            msg: msg.to_string(),
        }
    }

    fn expect(&mut self, c: char) -> Result<(), JsError> {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(&format!("expected '{c}'")))
        }
    }

    fn ident(&mut self) -> Result<String, JsError> {
        self.skip_ws();
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_alphanumeric() || c == '_') {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(self.err("expected identifier"));
        }
        let s: String = self.chars[start..self.pos].iter().collect();
        if s.chars().next().unwrap().is_ascii_digit() {
            return Err(JsError::Syntax {
                line: self.no,
                col: start + 1,
                msg: "identifier cannot start with a digit".to_string(),
            });
        }
        Ok(s)
    }

    fn ident_list(&mut self) -> Result<Vec<String>, JsError> {
        let mut out = vec![self.ident()?];
        loop {
            self.skip_ws();
            if self.peek() == Some(',') {
                self.pos += 1;
                out.push(self.ident()?);
            } else {
                break;
            }
        }
        Ok(out)
    }

    /// Unsigned rational literal: digits, optionally "/" digits.
    fn rational(&mut self) -> Result<Rat, JsError> {
        self.skip_ws();
        let num = self.integer()?;
        self.skip_ws();
        if self.peek() == Some('/') {
            self.pos += 1;
            let den = self.integer()?;
            if den.is_zero() {
                return Err(self.err("zero denominator"));
            }
            Ok(Rat::new(num, den))
        } else {
            Ok(Rat::from_integer(num))
        }
    }

    fn integer(&mut self) -> Result<num::BigInt, JsError> {
        self.skip_ws();
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(self.err("expected number"));
        }
        let s: String = self.chars[start..self.pos].iter().collect();
        s.parse().map_err(|_| self.err("bad integer literal"))
    }
}

struct Names {
    ind: BTreeMap<String, usize>,
    dep: BTreeMap<String, usize>,
}

/// `D[dep, indep, indep, ...]`; returns the jet variable.
fn parse_jet_var(line: &mut Line, names: &Names, n: usize) -> Result<JetVariable, JsError> {
    line.expect('D')?;
    line.expect('[')?;
    line.skip_ws();
    let start_col = line.col();
    let name = line.ident()?;
    let Some(&dep) = names.dep.get(&name) else {
        return Err(JsError::UnknownVariable {
            name,
            line: line.no,
            col: start_col,
        });
    };
    let mut index = MultiIndex::zero(n);
    loop {
        line.skip_ws();
        match line.peek() {
            Some(',') => {
                line.pos += 1;
                line.skip_ws();
                let col = line.col();
                let name = line.ident()?;
                let Some(&i) = names.ind.get(&name) else {
                    return Err(JsError::UnknownVariable {
                        name,
                        line: line.no,
                        col,
                    });
                };
                index = index.bump(i);
            }
            Some(']') => {
                line.pos += 1;
                break;
            }
            _ => return Err(line.err("expected ',' or ']'")),
        }
    }
    Ok(JetVariable { dep, index })
}

fn parse_term(line: &mut Line, names: &Names, n: usize, poly: &mut LinDiffPoly, sign: i64) -> Result<(), JsError> {
    line.skip_ws();
    let sign = Rat::from_integer(sign.into());
    let mut coeff = sign;
    let mut have_coeff = false;
    if matches!(line.peek(), Some(c) if c.is_ascii_digit()) {
        coeff *= line.rational()?;
        have_coeff = true;
        line.skip_ws();
        if line.peek() == Some('*') {
            line.pos += 1;
            line.skip_ws();
        } else {
            // bare constant term
            poly.constant += coeff;
            return Ok(());
        }
    }
    if line.peek() != Some('D') {
        if have_coeff {
            return Err(line.err("expected 'D[' after '*'"));
        }
        return Err(line.err("expected term"));
    }
    let var = parse_jet_var(line, names, n)?;
    line.skip_ws();
    if line.peek() == Some('*') {
        // a product following a jet variable means a nonlinear term
        return Err(JsError::NonlinearTerm {
            line: line.no,
            col: line.col(),
        });
    }
    poly.add_term(var, coeff);
    Ok(())
}

fn parse_equation(line: &mut Line, names: &Names, n: usize) -> Result<LinDiffPoly, JsError> {
    let mut poly = LinDiffPoly::new();
    let mut sign = 1i64;
    line.skip_ws();
    if line.peek() == Some('-') {
        line.pos += 1;
        sign = -1;
    } else if line.peek() == Some('+') {
        line.pos += 1;
    }
    parse_term(line, names, n, &mut poly, sign)?;
    loop {
        line.skip_ws();
        match line.peek() {
            Some('+') => {
                line.pos += 1;
                parse_term(line, names, n, &mut poly, 1)?;
            }
            Some('-') => {
                line.pos += 1;
                parse_term(line, names, n, &mut poly, -1)?;
            }
            Some('=') => {
                line.pos += 1;
                line.skip_ws();
                if line.peek() != Some('0') {
                    return Err(line.err("right-hand side must be 0"));
                }
                line.pos += 1;
                if !line.at_end() {
                    return Err(line.err("unexpected input after '= 0'"));
                }
                return Ok(poly);
            }
            _ => return Err(line.err("expected '+', '-' or '='")),
        }
    }
}

/// Parse a DSL document into a validated system.
pub fn parse_system(text: &str) -> Result<JetSystem, JsError> {
    let mut name = String::new();
    let mut ind_names: Vec<String> = Vec::new();
    let mut dep_names: Vec<String> = Vec::new();
    let mut names = Names {
        ind: BTreeMap::new(),
        dep: BTreeMap::new(),
    };
    let mut equations = Vec::new();
    let mut seen_header = false;

    for (lineno, raw) in text.lines().enumerate() {
        let stripped = match raw.find('#') {
            Some(i) => &raw[..i],
            None => raw,
        };
        if stripped.trim().is_empty() {
            continue;
        }
        let mut line = Line {
            no: lineno + 1,
            chars: stripped.chars().collect(),
            pos: 0,
        };
        line.skip_ws();
        let keyword_col = line.col();
        let kw = line.ident()?;
        match kw.as_str() {
            "system" => {
                name = line.ident()?;
                if !line.at_end() {
                    return Err(line.err("unexpected input after system name"));
                }
            }
            "independent" => {
                seen_header = true;
                ind_names = line.ident_list()?;
                for (i, v) in ind_names.iter().enumerate() {
                    if names.ind.insert(v.clone(), i).is_some() {
                        return Err(line.err(&format!("duplicate independent variable '{v}'")));
                    }
                }
                if !line.at_end() {
                    return Err(line.err("unexpected input after variable list"));
                }
            }
            "dependent" => {
                seen_header = true;
                dep_names = line.ident_list()?;
                for (i, v) in dep_names.iter().enumerate() {
                    if names.ind.contains_key(v) || names.dep.insert(v.clone(), i).is_some() {
                        return Err(line.err(&format!("duplicate variable '{v}'")));
                    }
                }
                if !line.at_end() {
                    return Err(line.err("unexpected input after variable list"));
                }
            }
            "eq" => {
                line.expect(':')?;
                if ind_names.is_empty() || dep_names.is_empty() {
                    return Err(JsError::Syntax {
                        line: line.no,
                        col: keyword_col,
                        msg: "equation before variable declarations".to_string(),
                    });
                }
                equations.push(parse_equation(&mut line, &names, ind_names.len())?);
            }
            other => {
                return Err(JsError::Syntax {
                    line: line.no,
                    col: keyword_col,
                    msg: format!("unknown keyword '{other}'"),
                });
            }
        }
    }

    if !seen_header || ind_names.is_empty() || dep_names.is_empty() {
        return Err(JsError::Syntax {
            line: text.lines().count().max(1),
            col: 1,
            msg: "missing independent/dependent declarations".to_string(),
        });
    }
    if equations.is_empty() {
        return Err(JsError::Syntax {
            line: text.lines().count().max(1),
            col: 1,
            msg: "system has no equations".to_string(),
        });
    }
    Ok(
        JetSystem::new(&name, ind_names.len(), dep_names.len(), equations)
            .with_names(ind_names, dep_names),
    )
}

fn print_rat(c: &Rat) -> String {
    if c.is_integer() {
        c.numer().to_string()
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

fn print_term(s: &JetSystem, v: &JetVariable) -> String {
    let mut parts = vec![s.dep_names[v.dep].clone()];
    for (i, &e) in v.index.0.iter().enumerate() {
        for _ in 0..e {
            parts.push(s.ind_names[i].clone());
        }
    }
    format!("D[{}]", parts.join(","))
}

/// Canonical text form; `parse_system(print_system(s))` reproduces `s`.
pub fn print_system(s: &JetSystem) -> String {
    let mut out = String::new();
    if !s.name.is_empty() {
        out.push_str(&format!("system {}\n", s.name));
    }
    out.push_str(&format!("independent {}\n", s.ind_names.join(",")));
    out.push_str(&format!("dependent {}\n", s.dep_names.join(",")));
    for eq in &s.equations {
        let mut line = String::from("eq:");
        let mut first = true;
        for (v, c) in eq.terms() {
            let neg = c < &Rat::zero();
            let mag = if neg { -c.clone() } else { c.clone() };
            if first {
                line.push(' ');
                if neg {
                    line.push('-');
                }
            } else if neg {
                line.push_str(" - ");
            } else {
                line.push_str(" + ");
            }
            if mag.is_one() {
                line.push_str(&print_term(s, v));
            } else {
                line.push_str(&format!("{}*{}", print_rat(&mag), print_term(s, v)));
            }
            first = false;
        }
        if !eq.constant.is_zero() || first {
            let c = &eq.constant;
            let neg = c < &Rat::zero();
            let mag = if neg { -c.clone() } else { c.clone() };
            if first {
                line.push(' ');
                if neg {
                    line.push('-');
                }
            } else if neg {
                line.push_str(" - ");
            } else {
                line.push_str(" + ");
            }
            line.push_str(&print_rat(&mag));
        }
        line.push_str(" = 0\n");
        out.push_str(&line);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    #[test]
    fn parses_cauchy_riemann() {
        let text = "independent x,y\ndependent u,v\neq: D[u,x]-D[v,y]=0\neq: D[u,y]+D[v,x]=0\n";
        let s = parse_system(text).unwrap();
        assert_eq!(s.n, 2);
        assert_eq!(s.m, 2);
        assert_eq!(s.order, 1);
        assert_eq!(s.equations.len(), 2);
        let cr = catalog::make_system("cauchy_riemann", &[]).unwrap();
        assert_eq!(s.equations, cr.equations);
    }

    #[test]
    fn parses_laplace() {
        let text = "independent x,y\ndependent u\neq: D[u,x,x]+D[u,y,y]=0\n";
        let s = parse_system(text).unwrap();
        assert_eq!((s.n, s.m, s.order), (2, 1, 2));
    }

    #[test]
    fn rejects_nonlinear_products() {
        let text = "independent x,y\ndependent u\neq: D[u,x]*D[u,y]=0\n";
        match parse_system(text) {
            Err(JsError::NonlinearTerm { line: 3, .. }) => {}
            other => panic!("expected nonlinear error, got {other:?}"),
        }
    }

    #[test]
    fn reports_unknown_variable_position() {
        let text = "independent x,y\ndependent u\neq: D[w,x]=0\n";
        match parse_system(text) {
            Err(JsError::UnknownVariable { name, line: 3, .. }) => assert_eq!(name, "w"),
            other => panic!("expected unknown variable, got {other:?}"),
        }
    }

    #[test]
    fn rational_coefficients_and_comments() {
        let text = "# a comment\nsystem demo\nindependent x\ndependent u\neq: 1/2*D[u,x] - 3*D[u] = 0\n";
        let s = parse_system(text).unwrap();
        assert_eq!(s.name, "demo");
        assert_eq!(s.equations.len(), 1);
        assert_eq!(s.equations[0].terms().count(), 2);
    }

    #[test]
    fn print_parse_roundtrip() {
        for name in ["cauchy_riemann", "laplace", "closed_one_form", "gradient"] {
            let s = catalog::make_system(name, &[]).unwrap();
            let reparsed = parse_system(&print_system(&s)).unwrap();
            assert_eq!(reparsed.equations, s.equations, "roundtrip for {name}");
            assert_eq!(reparsed.n, s.n);
            assert_eq!(reparsed.m, s.m);
        }
    }
}
