//! Report assembly: runs the whole pipeline on a system and packages the
//! result for JSON or text output. Reports are pure functions of
//! (system, options, seed); all map-like data is kept in sorted containers so
//! serialization is byte-deterministic.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::JsError;
use crate::jet::JetSystem;
use crate::numerics::{
    self, default_qmax, NumericalPolynomial, PolystableOutcome, StabilityVerdict,
};
use crate::spencer::{involutivity_degree, spencer_table};
use crate::symbol::{generic_covector, restrict_symbol, symbol_family};
use crate::Rat;

/// "p/q", or just "p" for integers.
pub fn rat_string(r: &Rat) -> String {
    if r.is_integer() {
        format!("{}", r.numer())
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "camelCase")]
pub struct PolynomialReport {
    /// Coefficients in ascending degree, each "p/q".
    pub coefficients: Vec<String>,
    pub display: String,
}

impl PolynomialReport {
    pub fn from_poly(p: &NumericalPolynomial) -> Self {
        PolynomialReport {
            coefficients: p.coeffs().iter().map(rat_string).collect(),
            display: p.display(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "camelCase")]
pub struct WitnessReport {
    pub name: String,
    /// "<", "=", or ">" comparing the candidate's reduced polynomial to the
    /// system's, eventually.
    pub comparison: String,
    pub reduced_polynomial: PolynomialReport,
    pub slope: String,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "camelCase")]
pub struct StabilityReport {
    pub semistable: bool,
    pub stable: bool,
    pub witnesses: Vec<WitnessReport>,
}

impl StabilityReport {
    pub fn from_verdict(v: &StabilityVerdict) -> Self {
        StabilityReport {
            semistable: v.semistable,
            stable: v.stable,
            witnesses: v
                .witnesses
                .iter()
                .map(|w| WitnessReport {
                    name: w.name.clone(),
                    comparison: match w.comparison {
                        Ordering::Less => "<".to_string(),
                        Ordering::Equal => "=".to_string(),
                        Ordering::Greater => ">".to_string(),
                    },
                    reduced_polynomial: PolynomialReport::from_poly(&w.candidate_reduced),
                    slope: rat_string(&w.candidate_slope),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "camelCase")]
pub struct RestrictionReport {
    /// The sampled non-characteristic covector, entrywise "p/q".
    pub covector: Vec<String>,
    pub restricted_involutivity_degree: usize,
    pub matches: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "camelCase")]
pub struct AnalysisReport {
    pub system_name: String,
    pub n: usize,
    pub m: usize,
    pub order: usize,
    pub qmax: usize,
    pub seed: u64,
    pub per_degree_symbol_dims: Vec<usize>,
    /// Row q, column p: dim H^{q,p} of the δ-Spencer complex. Rows run over
    /// levels 0..=qmax, columns over form degrees 0..=n.
    pub spencer_table: Vec<Vec<usize>>,
    pub involutivity_degree: usize,
    pub hilbert_function: Vec<usize>,
    pub hilbert_polynomial: PolynomialReport,
    pub cartan_characters: Vec<usize>,
    /// Degree at which the Cartan test first passes.
    pub cartan_degree: usize,
    pub rank: usize,
    pub reduced_polynomial: PolynomialReport,
    pub slope: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stability_verdict: Option<StabilityReport>,
    pub obstruction_grading: Vec<usize>,
    /// ρ₁(n, m, order) as a decimal string (can exceed 2^53).
    pub sweeney_bound: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub restriction_check: Option<RestrictionReport>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Default)]
pub struct AnalyzeOptions {
    /// Symbol window; defaults to order + n + 4 with one retry at the
    /// doubled window when stabilization fails.
    pub qmax: Option<usize>,
    pub seed: u64,
    pub candidates: Vec<JetSystem>,
    pub restrict: bool,
}

pub fn analyze(s: &JetSystem, opts: &AnalyzeOptions) -> Result<AnalysisReport, JsError> {
    let base_qmax = opts.qmax.unwrap_or_else(|| default_qmax(s.n, s.order));
    match analyze_at(s, base_qmax, opts) {
        Err(e) if opts.qmax.is_none() && is_window_error(&e) => {
            let mut report = analyze_at(s, base_qmax * 2, opts)?;
            report
                .warnings
                .push(format!("window doubled to {} after failed stabilization at {base_qmax}", base_qmax * 2));
            Ok(report)
        }
        other => other,
    }
}

fn is_window_error(e: &JsError) -> bool {
    matches!(e, JsError::NotStabilized(_) | JsError::WindowTooSmall(_))
}

fn analyze_at(s: &JetSystem, qmax: usize, opts: &AnalyzeOptions) -> Result<AnalysisReport, JsError> {
    let fam = symbol_family(s, qmax);
    let table = spencer_table(&fam)?;
    let q0 = involutivity_degree(&table)?;
    let hf = numerics::hilbert_function(&fam);
    let poly = numerics::hilbert_polynomial_from(&fam, q0)?;
    let (cartan_degree, characters) = numerics::involutive_characters(&fam, opts.seed)?;
    let rank = characters[0];
    let mut warnings = Vec::new();
    // finite-type systems have rank 0; the reduced polynomial and slope are
    // then degenerate (the Hilbert polynomial itself is 0)
    let (reduced, slope) = if rank == 0 {
        warnings.push("rank is zero (finite type); reduced polynomial and slope degenerate to 0".to_string());
        (NumericalPolynomial::zero(), crate::ratz(0))
    } else {
        (
            numerics::reduced_polynomial(&poly, rank)?,
            numerics::spencer_slope(&poly, rank)?,
        )
    };
    let obstruction = numerics::obstruction_grading(&table, q0)?;
    let sweeney = numerics::sweeney_bound(s.n, s.m, s.order.max(1))?;

    let stability = if opts.candidates.is_empty() {
        None
    } else {
        Some(StabilityReport::from_verdict(&numerics::is_spencer_semistable(
            s,
            &opts.candidates,
            opts.seed,
        )?))
    };

    let restriction = if opts.restrict && s.n > 1 {
        match generic_covector(s, opts.seed) {
            Ok(xi) => {
                let restricted = restrict_symbol(&fam, s, &xi)?;
                let rq0 = involutivity_degree(&spencer_table(&restricted)?)?;
                Some(RestrictionReport {
                    covector: xi.iter().map(rat_string).collect(),
                    restricted_involutivity_degree: rq0,
                    matches: rq0 == q0,
                })
            }
            Err(JsError::GenericityBudgetExhausted(budget)) => {
                // systems like the curl have no non-characteristic covectors
                // at all; restriction is then meaningless, not an error
                warnings.push(format!(
                    "no non-characteristic covector found in {budget} attempts; restriction check skipped"
                ));
                None
            }
            Err(e) => return Err(e),
        }
    } else {
        None
    };

    Ok(AnalysisReport {
        system_name: s.name.clone(),
        n: s.n,
        m: s.m,
        order: s.order,
        qmax,
        seed: opts.seed,
        per_degree_symbol_dims: fam.dims(),
        spencer_table: table.entries.clone(),
        involutivity_degree: q0,
        hilbert_function: hf.per_degree,
        hilbert_polynomial: PolynomialReport::from_poly(&poly),
        cartan_characters: characters,
        cartan_degree,
        rank,
        reduced_polynomial: PolynomialReport::from_poly(&reduced),
        slope: rat_string(&slope),
        stability_verdict: stability,
        obstruction_grading: obstruction,
        sweeney_bound: sweeney.to_string(),
        restriction_check: restriction,
        warnings,
    })
}

pub fn to_json(report: &AnalysisReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serialization");
    s.push('\n');
    s
}

fn join_usizes(v: &[usize]) -> String {
    if v.is_empty() {
        "(none)".to_string()
    } else {
        v.iter()
            .map(|x| x.to_string())
            .collect::<Vec<_>>()
            .join(" ")
    }
}

pub fn to_text(r: &AnalysisReport) -> String {
    let mut out = String::new();
    let mut line = |s: String| {
        out.push_str(&s);
        out.push('\n');
    };
    line(format!("system: {}", r.system_name));
    line(format!(
        "independent: {}  dependent: {}  order: {}  window: {}  seed: {}",
        r.n, r.m, r.order, r.qmax, r.seed
    ));
    line(format!("symbol dims (q = 0..{}): {}", r.qmax, join_usizes(&r.per_degree_symbol_dims)));
    line("spencer table h[q][p] (columns p = 0..n):".to_string());
    for (q, row) in r.spencer_table.iter().enumerate() {
        line(format!("  q={q}: {}", join_usizes(row)));
    }
    line(format!("involutivity degree: {}", r.involutivity_degree));
    line(format!("hilbert function: {}", join_usizes(&r.hilbert_function)));
    line(format!("hilbert polynomial: {}", r.hilbert_polynomial.display));
    line(format!(
        "cartan characters (q = {}): {}",
        r.cartan_degree,
        r.cartan_characters
            .iter()
            .map(|x| x.to_string())
            .collect::<Vec<_>>()
            .join(", ")
    ));
    line(format!("rank: {}", r.rank));
    line(format!("reduced polynomial: {}", r.reduced_polynomial.display));
    line(format!("slope: {}", r.slope));
    line(format!("obstruction grading: {}", join_usizes(&r.obstruction_grading)));
    line(format!("sweeney bound: {}", r.sweeney_bound));
    if let Some(st) = &r.stability_verdict {
        line(format!(
            "stability: semistable = {}, stable = {}",
            st.semistable, st.stable
        ));
        for w in &st.witnesses {
            line(format!(
                "  candidate {}: reduced {} {} system, slope {}",
                w.name, w.reduced_polynomial.display, w.comparison, w.slope
            ));
        }
    }
    if let Some(rc) = &r.restriction_check {
        line(format!(
            "restriction check: covector ({}), restricted involutivity degree {}, matches = {}",
            rc.covector.join(", "),
            rc.restricted_involutivity_degree,
            rc.matches
        ));
    }
    if r.warnings.is_empty() {
        line("warnings: (none)".to_string());
    } else {
        for w in &r.warnings {
            line(format!("warning: {w}"));
        }
    }
    out
}

/// Polystability rendered alongside the main report when requested.
pub fn polystable_text(out: &PolystableOutcome) -> String {
    let mut s = String::new();
    for (b, slope) in out.blocks.iter().zip(&out.slopes) {
        s.push_str(&format!("block {} (m = {}): slope {}\n", b.name, b.m, rat_string(slope)));
    }
    s.push_str(&format!("polystable: {}\n", out.polystable));
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::make_system;

    #[test]
    fn laplace_report_values() {
        let s = make_system("laplace", &[]).unwrap();
        let r = analyze(&s, &AnalyzeOptions::default()).unwrap();
        assert_eq!(r.involutivity_degree, 3);
        assert_eq!(r.hilbert_polynomial.display, "2");
        assert_eq!(r.cartan_characters, vec![2, 0]);
        assert_eq!(r.rank, 2);
        assert_eq!(r.slope, "1");
        assert_eq!(r.obstruction_grading, vec![0, 0, 1]);
        assert_eq!(r.sweeney_bound, "62");
    }

    #[test]
    fn cauchy_riemann_report_values() {
        let s = make_system("cauchy_riemann", &[]).unwrap();
        let r = analyze(&s, &AnalyzeOptions::default()).unwrap();
        assert_eq!(r.involutivity_degree, 2);
        assert_eq!(r.cartan_characters, vec![2, 0]);
        assert_eq!(r.spencer_table[1][1], 2);
    }

    #[test]
    fn json_roundtrip_and_determinism() {
        let s = make_system("closed_one_form", &[]).unwrap();
        let opts = AnalyzeOptions {
            restrict: true,
            ..Default::default()
        };
        let r1 = analyze(&s, &opts).unwrap();
        let r2 = analyze(&s, &opts).unwrap();
        assert_eq!(to_json(&r1), to_json(&r2));
        assert_eq!(to_text(&r1), to_text(&r2));
        let parsed: AnalysisReport = serde_json::from_str(&to_json(&r1)).unwrap();
        assert_eq!(parsed, r1);
        assert_eq!(r1.hilbert_polynomial.display, "t + 2");
        assert!(r1.restriction_check.unwrap().matches);
    }
}
