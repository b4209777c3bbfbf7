use std::collections::BTreeMap;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use jetspencer::catalog::{make_system, CATALOG_NAMES};
use jetspencer::error::JsError;
use jetspencer::jet::JetSystem;
use jetspencer::multiindex::MultiIndex;
use jetspencer::numerics::{annihilator_colength, d_stable_check, DStableSpace, PolyMap};
use jetspencer::parse::parse_system;
use jetspencer::report::{analyze, to_json, to_text, AnalyzeOptions};
use jetspencer::{rat, ratz, Rat};

#[derive(Parser)]
#[command(name = "jetspencer", version, about = "Formal integrability analysis for linear PDE systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full pipeline on a DSL file or a catalog system
    Analyze {
        /// Path to a DSL system file
        input: Option<String>,
        /// Catalog system, as name or name:p1,p2
        #[arg(long)]
        catalog: Option<String>,
        /// Symbol window qmax (default order + n + 4, one retry at double)
        #[arg(long)]
        max_order: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// DSL files with sub-ideal candidates for the stability check
        #[arg(long)]
        candidates: Vec<String>,
        /// Also run the generic-covector restriction invariance check
        #[arg(long)]
        restrict: bool,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Print the prolongation bound rho_1(n, m, k)
    Sweeney { n: usize, m: usize, k: usize },
    /// Check a space of polynomials (one per line) for D-stability and
    /// compute its annihilator ideal
    Punctual { basis_file: String },
    /// List the built-in catalog systems
    CatalogList,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                JsError::NotStabilized(_) | JsError::WindowTooSmall(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}

fn load_system(input: &Option<String>, catalog: &Option<String>) -> Result<JetSystem, JsError> {
    match (input, catalog) {
        (Some(_), Some(_)) => Err(JsError::InvalidArgument(
            "give either an input file or --catalog, not both".to_string(),
        )),
        (Some(path), None) => {
            let text = std::fs::read_to_string(path)?;
            parse_system(&text)
        }
        (None, Some(spec)) => {
            let (name, params) = match spec.split_once(':') {
                Some((name, rest)) => {
                    let params: Result<Vec<usize>, _> =
                        rest.split(',').map(|p| p.trim().parse()).collect();
                    let params = params.map_err(|_| {
                        JsError::InvalidCatalogParams {
                            name: name.to_string(),
                            msg: format!("bad parameter list '{rest}'"),
                        }
                    })?;
                    (name, params)
                }
                None => (spec.as_str(), Vec::new()),
            };
            make_system(name, &params)
        }
        (None, None) => Err(JsError::InvalidArgument(
            "need an input file or --catalog".to_string(),
        )),
    }
}

fn run(command: Command) -> Result<(), JsError> {
    match command {
        Command::Analyze {
            input,
            catalog,
            max_order,
            seed,
            candidates,
            restrict,
            format,
        } => {
            let system = load_system(&input, &catalog)?;
            let mut cands = Vec::new();
            for path in &candidates {
                let text = std::fs::read_to_string(path)?;
                cands.push(parse_system(&text)?);
            }
            let opts = AnalyzeOptions {
                qmax: max_order,
                seed,
                candidates: cands,
                restrict,
            };
            let report = analyze(&system, &opts)?;
            match format {
                Format::Json => print!("{}", to_json(&report)),
                Format::Text => print!("{}", to_text(&report)),
            }
            Ok(())
        }
        Command::Sweeney { n, m, k } => {
            let bound = jetspencer::numerics::sweeney_bound(n, m, k)?;
            println!("{bound}");
            Ok(())
        }
        Command::Punctual { basis_file } => {
            let text = std::fs::read_to_string(&basis_file)?;
            let space = parse_basis_file(&text)?;
            if !d_stable_check(&space)? {
                println!("not D-stable");
                return Ok(());
            }
            let out = annihilator_colength(&space)?;
            println!("D-stable");
            let gens: Vec<String> = out
                .generators
                .iter()
                .map(|g| print_dual_poly(g, space.vars))
                .collect();
            println!("annihilator: ({})", gens.join(", "));
            println!("colength: {}", out.colength);
            Ok(())
        }
        Command::CatalogList => {
            for name in CATALOG_NAMES {
                println!("{name}");
            }
            Ok(())
        }
    }
}

/// One polynomial per line; '#' starts a comment. Variables are arbitrary
/// identifiers, mapped to coordinates in sorted order across the whole file.
fn parse_basis_file(text: &str) -> Result<DStableSpace, JsError> {
    let mut names: Vec<String> = Vec::new();
    let lines: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty())
        .collect();
    for (line_no, line) in &lines {
        collect_idents(line, *line_no, &mut names)?;
    }
    names.sort();
    names.dedup();
    let vars = names.len().max(1);
    let index: BTreeMap<&str, usize> = names.iter().map(|s| s.as_str()).zip(0..).collect();
    let mut basis = Vec::new();
    for (line_no, line) in &lines {
        basis.push(parse_poly_line(line, *line_no, vars, &index)?);
    }
    if basis.is_empty() {
        return Err(JsError::InvalidArgument("empty basis file".to_string()));
    }
    Ok(DStableSpace { vars, basis })
}

fn collect_idents(line: &str, line_no: usize, out: &mut Vec<String>) -> Result<(), JsError> {
    let mut chars = line.char_indices().peekable();
    while let Some((i, c)) = chars.next() {
        if c.is_ascii_alphabetic() || c == '_' {
            let mut end = i + c.len_utf8();
            while let Some(&(j, d)) = chars.peek() {
                if d.is_ascii_alphanumeric() || d == '_' {
                    end = j + d.len_utf8();
                    chars.next();
                } else {
                    break;
                }
            }
            out.push(line[i..end].to_string());
        } else if c.is_ascii_digit()
            || c.is_whitespace()
            || matches!(c, '+' | '-' | '*' | '^' | '/')
        {
            continue;
        } else {
            return Err(JsError::Syntax {
                line: line_no,
                col: i + 1,
                msg: format!("unexpected character '{c}'"),
            });
        }
    }
    Ok(())
}

struct PolyCursor<'a> {
    line: &'a [u8],
    line_no: usize,
    pos: usize,
}

impl<'a> PolyCursor<'a> {
    fn err(&self, msg: &str) -> JsError {
        JsError::Syntax {
            line: self.line_no,
            col: self.pos + 1,
            msg: msg.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.line.len() && self.line[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.line.get(self.pos).copied()
    }

    fn integer(&mut self) -> Result<i64, JsError> {
        let start = self.pos;
        while self.pos < self.line.len() && self.line[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(self.err("expected a number"));
        }
        std::str::from_utf8(&self.line[start..self.pos])
            .unwrap()
            .parse()
            .map_err(|_| self.err("number out of range"))
    }

    fn ident(&mut self) -> String {
        let start = self.pos;
        while self.pos < self.line.len()
            && (self.line[self.pos].is_ascii_alphanumeric() || self.line[self.pos] == b'_')
        {
            self.pos += 1;
        }
        String::from_utf8_lossy(&self.line[start..self.pos]).to_string()
    }
}

fn parse_poly_line(
    line: &str,
    line_no: usize,
    vars: usize,
    index: &BTreeMap<&str, usize>,
) -> Result<PolyMap, JsError> {
    let mut cur = PolyCursor {
        line: line.as_bytes(),
        line_no,
        pos: 0,
    };
    let mut poly = PolyMap::new();
    let mut first = true;
    loop {
        cur.skip_ws();
        let mut sign = 1i64;
        match cur.peek() {
            None if first => return Err(cur.err("empty polynomial")),
            None => break,
            Some(b'+') => {
                cur.pos += 1;
            }
            Some(b'-') => {
                sign = -1;
                cur.pos += 1;
            }
            Some(_) if first => {}
            Some(_) => return Err(cur.err("expected '+' or '-'")),
        }
        first = false;
        cur.skip_ws();
        // term: factors joined by '*'
        let mut coeff = ratz(sign);
        let mut mono = MultiIndex::zero(vars);
        loop {
            cur.skip_ws();
            match cur.peek() {
                Some(c) if c.is_ascii_digit() => {
                    let num = cur.integer()?;
                    cur.skip_ws();
                    if cur.peek() == Some(b'/') {
                        cur.pos += 1;
                        cur.skip_ws();
                        let den = cur.integer()?;
                        if den == 0 {
                            return Err(cur.err("zero denominator"));
                        }
                        coeff *= rat(num, den);
                    } else {
                        coeff *= ratz(num);
                    }
                }
                Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                    let name = cur.ident();
                    let &vi = index
                        .get(name.as_str())
                        .ok_or_else(|| cur.err(&format!("unknown variable '{name}'")))?;
                    let mut exp = 1;
                    cur.skip_ws();
                    if cur.peek() == Some(b'^') {
                        cur.pos += 1;
                        cur.skip_ws();
                        exp = cur.integer()?;
                        if exp < 0 {
                            return Err(cur.err("negative exponent"));
                        }
                    }
                    for _ in 0..exp {
                        mono = mono.bump(vi);
                    }
                }
                _ => return Err(cur.err("expected a factor")),
            }
            cur.skip_ws();
            if cur.peek() == Some(b'*') {
                cur.pos += 1;
            } else {
                break;
            }
        }
        if !num::traits::Zero::is_zero(&coeff) {
            let entry = poly.entry(mono).or_insert_with(num::traits::Zero::zero);
            *entry += coeff;
            if num::traits::Zero::is_zero(entry) {
                poly.retain(|_, c: &mut Rat| !num::traits::Zero::is_zero(c));
            }
        }
    }
    Ok(poly)
}

fn print_dual_poly(p: &PolyMap, vars: usize) -> String {
    use num::traits::Signed;
    let mono_str = |m: &MultiIndex| -> String {
        let mut parts = Vec::new();
        for i in 0..vars {
            let e = m.get(i);
            if e == 0 {
                continue;
            }
            let name = if vars == 1 {
                "xi".to_string()
            } else {
                format!("xi{}", i + 1)
            };
            if e == 1 {
                parts.push(name);
            } else {
                parts.push(format!("{name}^{e}"));
            }
        }
        parts.join("*")
    };
    let mut out = String::new();
    // highest degree first, so leading terms read naturally
    for (m, c) in p.iter().rev() {
        let mag = c.abs();
        let ms = mono_str(m);
        let coef = if mag == ratz(1) && !ms.is_empty() {
            String::new()
        } else {
            jetspencer::report::rat_string(&mag)
        };
        let body = match (coef.is_empty(), ms.is_empty()) {
            (true, _) => ms,
            (false, true) => coef,
            (false, false) => format!("{coef}*{ms}"),
        };
        if out.is_empty() {
            if c.is_negative() {
                out.push('-');
            }
            out.push_str(&body);
        } else if c.is_negative() {
            out.push_str(&format!(" - {body}"));
        } else {
            out.push_str(&format!(" + {body}"));
        }
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}
