//! Numerical invariants: Hilbert functions and polynomials, Cartan
//! characters, rank, reduced polynomials and slopes, (semi/poly)stability,
//! obstruction gradings, Sweeney bounds, and the punctual D-stable-space
//! checker.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use num::traits::{One, Signed, Zero};

use crate::error::JsError;
use crate::jet::{JetSystem, JetVariable, LinDiffPoly};
use crate::multiindex::{binomial, MultiIndex};
use crate::spencer::{cartan_test, involutivity_degree, spencer_table, SpencerTable};
use crate::symbol::{symbol_family, SymbolFamily};
use crate::{rat, ratz, Rat, RatMatrix, RatSubspace};

/// Default symbol-family window for a system.
pub fn default_qmax(n: usize, order: usize) -> usize {
    order + n + 4
}

/// Polynomial in one variable t with rational coefficients, integer-valued at
/// large integers.
#[derive(Debug, Clone, PartialEq)]
pub struct NumericalPolynomial {
    coeffs: Vec<Rat>,
}

impl NumericalPolynomial {
    pub fn zero() -> Self {
        NumericalPolynomial { coeffs: vec![] }
    }

    pub fn from_coeffs(mut coeffs: Vec<Rat>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        NumericalPolynomial { coeffs }
    }

    pub fn constant(c: Rat) -> Self {
        Self::from_coeffs(vec![c])
    }

    pub fn coeffs(&self) -> &[Rat] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        if self.coeffs.is_empty() {
            None
        } else {
            Some(self.coeffs.len() - 1)
        }
    }

    pub fn leading_coeff(&self) -> Rat {
        self.coeffs.last().cloned().unwrap_or_else(Rat::zero)
    }

    pub fn eval(&self, z: i64) -> Rat {
        let zq = ratz(z);
        let mut acc = Rat::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * zq.clone() + c.clone();
        }
        acc
    }

    pub fn add(&self, other: &Self) -> Self {
        let len = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..len)
            .map(|i| {
                self.coeffs.get(i).cloned().unwrap_or_else(Rat::zero)
                    + other.coeffs.get(i).cloned().unwrap_or_else(Rat::zero)
            })
            .collect();
        Self::from_coeffs(coeffs)
    }

    pub fn scale(&self, c: &Rat) -> Self {
        Self::from_coeffs(self.coeffs.iter().map(|a| a.clone() * c.clone()).collect())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut coeffs = vec![Rat::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] += a.clone() * b.clone();
            }
        }
        Self::from_coeffs(coeffs)
    }

    /// True when the polynomial takes integer values on the sample window.
    pub fn integer_valued_on(&self, from: i64, count: usize) -> bool {
        (0..count as i64).all(|i| self.eval(from + i).is_integer())
    }

    /// Render as a human-readable expression in t.
    pub fn display(&self) -> String {
        if self.coeffs.is_empty() {
            return "0".to_string();
        }
        let mut parts = Vec::new();
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            let mono = match i {
                0 => String::new(),
                1 => "t".to_string(),
                _ => format!("t^{i}"),
            };
            let coef = if mag.is_one() && i > 0 {
                String::new()
            } else if mag.is_integer() {
                format!("{}", mag.numer())
            } else {
                format!("{}/{}", mag.numer(), mag.denom())
            };
            let body = match (coef.is_empty(), mono.is_empty()) {
                (true, _) => mono.clone(),
                (false, true) => coef.clone(),
                (false, false) => format!("{coef}*{mono}"),
            };
            if parts.is_empty() {
                parts.push(if c.is_negative() {
                    format!("-{body}")
                } else {
                    body
                });
            } else if c.is_negative() {
                parts.push(format!("- {body}"));
            } else {
                parts.push(format!("+ {body}"));
            }
        }
        parts.join(" ")
    }
}

/// Exact Lagrange interpolation through integer points.
pub fn lagrange(points: &[(i64, usize)]) -> NumericalPolynomial {
    let mut acc = NumericalPolynomial::zero();
    for (i, &(xi, yi)) in points.iter().enumerate() {
        let mut basis = NumericalPolynomial::constant(ratz(yi as i64));
        for (j, &(xj, _)) in points.iter().enumerate() {
            if i == j {
                continue;
            }
            // (t − xj)/(xi − xj)
            let factor = NumericalPolynomial::from_coeffs(vec![ratz(-xj), ratz(1)]);
            basis = basis.mul(&factor).scale(&rat(1, xi - xj));
        }
        acc = acc.add(&basis);
    }
    acc
}

/// C(t + a, d) as a polynomial in t.
pub fn binomial_poly(a: i64, d: usize) -> NumericalPolynomial {
    let mut acc = NumericalPolynomial::constant(ratz(1));
    for i in 0..d {
        let factor = NumericalPolynomial::from_coeffs(vec![ratz(a - i as i64), ratz(1)]);
        acc = acc.mul(&factor);
    }
    let mut fact = 1i64;
    for i in 1..=d as i64 {
        fact *= i;
    }
    acc.scale(&rat(1, fact))
}

#[derive(Debug, Clone, PartialEq)]
pub struct HilbertFunction {
    pub per_degree: Vec<usize>,
    pub cumulative: Vec<usize>,
}

pub fn hilbert_function(f: &SymbolFamily) -> HilbertFunction {
    let per_degree = f.dims();
    let mut cumulative = Vec::with_capacity(per_degree.len());
    let mut acc = 0;
    for &d in &per_degree {
        acc += d;
        cumulative.push(acc);
    }
    HilbertFunction {
        per_degree,
        cumulative,
    }
}

/// Interpolate the per-degree symbol dimension on the stabilized tail
/// (starting at the involutivity degree) and verify the fit on every
/// remaining window point.
pub fn hilbert_polynomial(f: &SymbolFamily) -> Result<NumericalPolynomial, JsError> {
    let t = spencer_table(f)?;
    let q0 = involutivity_degree(&t)?;
    hilbert_polynomial_from(f, q0)
}

/// Interpolation with an externally supplied stabilization degree.
pub fn hilbert_polynomial_from(
    f: &SymbolFamily,
    q0: usize,
) -> Result<NumericalPolynomial, JsError> {
    let n = f.n;
    if q0 + n > f.qmax {
        return Err(JsError::NotStabilized(format!(
            "need {} sample points beyond q0 = {q0}, window ends at {}",
            n + 1,
            f.qmax
        )));
    }
    let dims = f.dims();
    let points: Vec<(i64, usize)> = (q0..=q0 + n).map(|q| (q as i64, dims[q])).collect();
    let poly = lagrange(&points);
    for q in q0..=f.qmax {
        if poly.eval(q as i64) != ratz(dims[q] as i64) {
            return Err(JsError::NotStabilized(format!(
                "interpolant misses dim N^{q} = {}",
                dims[q]
            )));
        }
    }
    Ok(poly)
}

/// D-Hilbert polynomial from the Spencer table:
/// P(z) = Σ_{q,p} (−1)^p · h[q][p] · C(z − q + n − 1, n − 1).
///
/// This follows from (1−t)^n · Σ_z dim(N_z) t^z = Σ_p (−1)^p H_p(t) with
/// H_p the generating series of the p-th cohomology column.
pub fn d_hilbert_via_spencer(t: &SpencerTable, n: usize) -> NumericalPolynomial {
    let mut acc = NumericalPolynomial::zero();
    for (q, row) in t.entries.iter().enumerate() {
        for (p, &h) in row.iter().enumerate() {
            if h == 0 {
                continue;
            }
            let sign = if p % 2 == 0 { 1i64 } else { -1 };
            let term = binomial_poly(n as i64 - 1 - q as i64, n - 1)
                .scale(&ratz(sign * h as i64));
            acc = acc.add(&term);
        }
    }
    acc
}

/// Characters at degree q; errors if Cartan's test fails there.
pub fn cartan_characters(f: &SymbolFamily, q: usize, seed: u64) -> Result<Vec<usize>, JsError> {
    let out = cartan_test(f, q, seed)?;
    if !out.involutive {
        return Err(JsError::NotInvolutive(q));
    }
    Ok(out.characters)
}

/// α_{q+r}^{(ℓ)} = Σ_{j=ℓ}^{n} C(r+j−ℓ−1, r−1) · α_q^{(j)}, for r ≥ 1.
pub fn character_recursion(alpha: &[usize], r: usize) -> Vec<usize> {
    assert!(r >= 1);
    let n = alpha.len();
    (1..=n)
        .map(|l| {
            (l..=n)
                .map(|j| binomial(r + j - l - 1, r - 1) * alpha[j - 1])
                .sum()
        })
        .collect()
}

/// First degree at which Cartan's test passes, together with the characters
/// there.
pub fn involutive_characters(
    f: &SymbolFamily,
    seed: u64,
) -> Result<(usize, Vec<usize>), JsError> {
    let start = f.order.max(1);
    let mut last_q = start;
    for q in start..f.qmax {
        last_q = q;
        let out = cartan_test(f, q, seed)?;
        if out.involutive {
            return Ok((q, out.characters));
        }
    }
    Err(JsError::NotInvolutive(last_q))
}

/// Rank of the ideal: the first Cartan character at the involutive degree.
pub fn rank_of_ideal(f: &SymbolFamily, seed: u64) -> Result<usize, JsError> {
    let (_, chars) = involutive_characters(f, seed)?;
    Ok(chars[0])
}

pub fn reduced_polynomial(
    p: &NumericalPolynomial,
    rank: usize,
) -> Result<NumericalPolynomial, JsError> {
    if rank == 0 {
        return Err(JsError::ZeroRank);
    }
    Ok(p.scale(&rat(1, rank as i64)))
}

pub fn spencer_slope(p: &NumericalPolynomial, rank: usize) -> Result<Rat, JsError> {
    if rank == 0 {
        return Err(JsError::ZeroRank);
    }
    Ok(p.leading_coeff() / ratz(rank as i64))
}

/// Eventual-dominance order: compare coefficients from the top degree down.
pub fn compare_poly_eventually(p: &NumericalPolynomial, q: &NumericalPolynomial) -> Ordering {
    let len = p.coeffs().len().max(q.coeffs().len());
    for i in (0..len).rev() {
        let a = p.coeffs().get(i).cloned().unwrap_or_else(Rat::zero);
        let b = q.coeffs().get(i).cloned().unwrap_or_else(Rat::zero);
        match a.cmp(&b) {
            Ordering::Equal => continue,
            other => return other,
        }
    }
    Ordering::Equal
}

#[derive(Debug, Clone)]
pub struct Witness {
    pub name: String,
    pub comparison: Ordering,
    pub candidate_reduced: NumericalPolynomial,
    pub candidate_slope: Rat,
}

#[derive(Debug, Clone)]
pub struct StabilityVerdict {
    pub semistable: bool,
    pub stable: bool,
    pub witnesses: Vec<Witness>,
}

/// (Hilbert polynomial, rank) of a system, analyzed standalone.
fn core_invariants(s: &JetSystem, seed: u64) -> Result<(NumericalPolynomial, usize), JsError> {
    let fam = symbol_family(s, default_qmax(s.n, s.order));
    let p = hilbert_polynomial(&fam)?;
    let rank = rank_of_ideal(&fam, seed)?;
    Ok((p, rank))
}

/// Drop dependent variables a candidate never mentions, so its invariants
/// reflect only the variables it actually constrains.
fn restrict_to_used_dependents(s: &JetSystem) -> Result<JetSystem, JsError> {
    let used: BTreeSet<usize> = s
        .equations
        .iter()
        .flat_map(|e| e.terms().map(|(v, _)| v.dep))
        .collect();
    if used.is_empty() {
        return Err(JsError::InvalidArgument(format!(
            "candidate '{}' has no equations",
            s.name
        )));
    }
    let remap: BTreeMap<usize, usize> = used.iter().enumerate().map(|(i, &d)| (d, i)).collect();
    let eqs = s
        .equations
        .iter()
        .map(|e| {
            let mut p = LinDiffPoly::new();
            for (v, c) in e.terms() {
                p.add_term(
                    JetVariable {
                        dep: remap[&v.dep],
                        index: v.index.clone(),
                    },
                    c.clone(),
                );
            }
            p
        })
        .collect();
    Ok(JetSystem::new(&s.name, s.n, used.len(), eqs))
}

fn check_sub_ideal(s: &JetSystem, candidate: &JetSystem) -> Result<(), JsError> {
    if candidate.n != s.n || candidate.m != s.m {
        return Err(JsError::NotSubIdeal(format!(
            "candidate '{}' lives on a different jet space",
            candidate.name
        )));
    }
    let mut slices: BTreeMap<usize, RatSubspace> = BTreeMap::new();
    for f in &candidate.equations {
        let k = f.order();
        let slice = slices
            .entry(k)
            .or_insert_with(|| crate::jet::ideal_slice(s, k).span.clone());
        let basis = crate::jet::JetBasis::new(s.n, s.m, k);
        if !slice.contains_vec(&basis.vectorize(f)) {
            return Err(JsError::NotSubIdeal(format!(
                "equation of candidate '{}' is not in the prolonged span at order {k}",
                candidate.name
            )));
        }
    }
    Ok(())
}

/// Semistability against a list of sub-ideal candidates: every candidate's
/// reduced Hilbert polynomial must be eventually ≤ the system's; stable when
/// all comparisons are strict.
pub fn is_spencer_semistable(
    s: &JetSystem,
    candidates: &[JetSystem],
    seed: u64,
) -> Result<StabilityVerdict, JsError> {
    let (p_s, rank_s) = core_invariants(s, seed)?;
    let reduced_s = reduced_polynomial(&p_s, rank_s)?;
    let mut witnesses = Vec::new();
    let mut semistable = true;
    let mut stable = true;
    for c in candidates {
        check_sub_ideal(s, c)?;
        let c_red = restrict_to_used_dependents(c)?;
        let (p_c, rank_c) = core_invariants(&c_red, seed)?;
        let reduced_c = reduced_polynomial(&p_c, rank_c)?;
        let cmp = compare_poly_eventually(&reduced_c, &reduced_s);
        if cmp == Ordering::Greater {
            semistable = false;
        }
        if cmp != Ordering::Less {
            stable = false;
        }
        witnesses.push(Witness {
            name: c.name.clone(),
            comparison: cmp,
            candidate_slope: spencer_slope(&p_c, rank_c)?,
            candidate_reduced: reduced_c,
        });
    }
    if !semistable {
        stable = false;
    }
    Ok(StabilityVerdict {
        semistable,
        stable,
        witnesses,
    })
}

#[derive(Debug, Clone)]
pub struct PolystableOutcome {
    pub blocks: Vec<JetSystem>,
    pub slopes: Vec<Rat>,
    pub polystable: bool,
}

/// Connected components of the variable–equation incidence graph, each
/// analyzed standalone; polystable iff all blocks share one slope (each
/// connected block has no proper coordinate sub-blocks, so it is stable
/// against the auto-generated candidate set vacuously).
pub fn polystable_decomposition(s: &JetSystem, seed: u64) -> Result<PolystableOutcome, JsError> {
    // union-find over dependent variables
    let mut parent: Vec<usize> = (0..s.m).collect();
    fn find(parent: &mut Vec<usize>, x: usize) -> usize {
        if parent[x] != x {
            let r = find(parent, parent[x]);
            parent[x] = r;
        }
        parent[x]
    }
    for e in &s.equations {
        let deps: Vec<usize> = e.terms().map(|(v, _)| v.dep).collect();
        for w in deps.windows(2) {
            let a = find(&mut parent, w[0]);
            let b = find(&mut parent, w[1]);
            parent[a] = b;
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for d in 0..s.m {
        let r = find(&mut parent, d);
        groups.entry(r).or_default().push(d);
    }
    let mut blocks = Vec::new();
    for (bi, deps) in groups.values().enumerate() {
        let depset: BTreeSet<usize> = deps.iter().copied().collect();
        let remap: BTreeMap<usize, usize> =
            deps.iter().enumerate().map(|(i, &d)| (d, i)).collect();
        let eqs: Vec<LinDiffPoly> = s
            .equations
            .iter()
            .filter(|e| e.terms().all(|(v, _)| depset.contains(&v.dep)))
            .filter(|e| e.terms().next().is_some())
            .map(|e| {
                let mut p = LinDiffPoly::new();
                for (v, c) in e.terms() {
                    p.add_term(
                        JetVariable {
                            dep: remap[&v.dep],
                            index: v.index.clone(),
                        },
                        c.clone(),
                    );
                }
                p
            })
            .collect();
        blocks.push(JetSystem::new(
            &format!("{}_block{}", s.name, bi),
            s.n,
            deps.len(),
            eqs,
        ));
    }
    let mut slopes = Vec::new();
    for b in &blocks {
        let (p, rank) = core_invariants(b, seed)?;
        slopes.push(spencer_slope(&p, rank)?);
    }
    let polystable = slopes.windows(2).all(|w| w[0] == w[1]);
    Ok(PolystableOutcome {
        blocks,
        slopes,
        polystable,
    })
}

/// [h[q][1] : q < reg], the grading of the first-order deformation
/// obstruction space.
pub fn obstruction_grading(t: &SpencerTable, reg: usize) -> Result<Vec<usize>, JsError> {
    if reg > t.qmax + 1 {
        return Err(JsError::InvalidArgument(format!(
            "obstruction grading needs table up to q = {}, have {}",
            reg.saturating_sub(1),
            t.qmax
        )));
    }
    Ok((0..reg).map(|q| t.h(q, 1)).collect())
}

fn binomial_u128(a: u128, b: u128) -> u128 {
    if b > a {
        return 0;
    }
    let b = b.min(a - b);
    let mut acc: u128 = 1;
    for i in 0..b {
        acc = acc * (a - i) / (i + 1);
    }
    acc
}

/// Sweeney's prolongation bound ρ₁(n, m, k):
/// ρ₁(0,m,1) = 0; ρ₁(n,m,1) = m·C(𝔞+n, n−1) + 𝔞 + 1 with 𝔞 = ρ₁(n−1,m,1);
/// ρ₁(n,m,k₀) = ρ₁(n,𝔟,1) with 𝔟 = Σ_{ℓ=0}^{k₀} C(ℓ+n−1, n−1)·m.
pub fn sweeney_bound(n: usize, m: usize, k: usize) -> Result<u128, JsError> {
    if m == 0 || k == 0 {
        return Err(JsError::InvalidArgument(
            "sweeney bound needs m >= 1 and k >= 1".to_string(),
        ));
    }
    fn rho1(n: u128, m: u128) -> u128 {
        if n == 0 {
            return 0;
        }
        let a = rho1(n - 1, m);
        m * binomial_u128(a + n, n - 1) + a + 1
    }
    if k == 1 {
        return Ok(rho1(n as u128, m as u128));
    }
    let n128 = n as u128;
    let mut b: u128 = 0;
    for l in 0..=k as u128 {
        b += binomial_u128(l + n128.saturating_sub(1), n128.saturating_sub(1)) * m as u128;
    }
    Ok(rho1(n128, b))
}

/// Polynomial in C variables as exponent-vector → coefficient.
pub type PolyMap = BTreeMap<MultiIndex, Rat>;

#[derive(Debug, Clone)]
pub struct DStableSpace {
    pub vars: usize,
    pub basis: Vec<PolyMap>,
}

pub fn poly_derivative(p: &PolyMap, i: usize) -> PolyMap {
    let mut out = PolyMap::new();
    for (mono, c) in p {
        let e = mono.get(i);
        if e == 0 {
            continue;
        }
        let down = mono.drop(i).unwrap();
        let entry = out.entry(down).or_insert_with(Rat::zero);
        *entry += c.clone() * ratz(e as i64);
    }
    out.retain(|_, c| !c.is_zero());
    out
}

fn poly_max_degree(p: &PolyMap) -> usize {
    p.keys().map(|m| m.order()).max().unwrap_or(0)
}

/// Monomials of all degrees 0..=d in `vars` variables, degree-major.
fn monomials_up_to(vars: usize, d: usize) -> Vec<MultiIndex> {
    (0..=d)
        .flat_map(|q| crate::multiindex::monomials_of_degree(vars, q))
        .collect()
}

fn vectorize_poly(p: &PolyMap, monos: &BTreeMap<MultiIndex, usize>, len: usize) -> Vec<Rat> {
    let mut v = vec![Rat::zero(); len];
    for (mono, c) in p {
        v[monos[mono]] = c.clone();
    }
    v
}

/// True iff ∂_i(span) ⊆ span for every direction; errors on a dependent
/// basis.
pub fn d_stable_check(v: &DStableSpace) -> Result<bool, JsError> {
    let maxdeg = v.basis.iter().map(poly_max_degree).max().unwrap_or(0);
    let monos = monomials_up_to(v.vars, maxdeg);
    let index: BTreeMap<MultiIndex, usize> =
        monos.iter().enumerate().map(|(i, m)| (m.clone(), i)).collect();
    let rows: Vec<Vec<Rat>> = v
        .basis
        .iter()
        .map(|p| vectorize_poly(p, &index, monos.len()))
        .collect();
    let mat = RatMatrix::from_rows(rows);
    if mat.rank() < v.basis.len() {
        return Err(JsError::DependentBasis);
    }
    let span = RatSubspace::from_spanning(monos.len(), mat);
    for i in 0..v.vars {
        for p in &v.basis {
            let d = poly_derivative(p, i);
            if !span.contains_vec(&vectorize_poly(&d, &index, monos.len())) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[derive(Debug, Clone)]
pub struct AnnihilatorOutcome {
    /// Degreewise minimal generators of the annihilator ideal, as polynomials
    /// in the dual variables ξ.
    pub generators: Vec<PolyMap>,
    pub colength: usize,
}

fn apply_operator(nu: &MultiIndex, p: &PolyMap) -> PolyMap {
    let mut out = p.clone();
    for i in 0..nu.len() {
        for _ in 0..nu.get(i) {
            out = poly_derivative(&out, i);
        }
    }
    out
}

/// Annihilator Ann(V) ⊆ ℚ[ξ] (ξ_i acting as ∂_i) with its colength, which
/// must equal dim V.
pub fn annihilator_colength(v: &DStableSpace) -> Result<AnnihilatorOutcome, JsError> {
    if !d_stable_check(v)? {
        return Err(JsError::NotDStable);
    }
    let maxdeg = v.basis.iter().map(poly_max_degree).max().unwrap_or(0);
    let big_d = maxdeg + 1;
    let ops = monomials_up_to(v.vars, big_d);
    let out_monos = monomials_up_to(v.vars, maxdeg);
    let out_index: BTreeMap<MultiIndex, usize> = out_monos
        .iter()
        .enumerate()
        .map(|(i, m)| (m.clone(), i))
        .collect();
    // columns: candidate operator monomials; rows: (basis poly, result mono)
    let mut mat = RatMatrix::zeros(v.basis.len() * out_monos.len(), ops.len());
    for (ci, nu) in ops.iter().enumerate() {
        for (bi, p) in v.basis.iter().enumerate() {
            let res = apply_operator(nu, p);
            for (mono, c) in &res {
                mat.set(bi * out_monos.len() + out_index[mono], ci, c.clone());
            }
        }
    }
    let kernel = mat.kernel_basis();
    let colength = ops.len() - kernel.rows();
    if colength != v.basis.len() {
        return Err(JsError::InvalidArgument(format!(
            "annihilator colength {colength} does not match dim V = {}",
            v.basis.len()
        )));
    }

    // degreewise minimal generators: walk degrees upward, keeping kernel
    // elements not generated by lower-degree picks
    let op_index: BTreeMap<MultiIndex, usize> =
        ops.iter().enumerate().map(|(i, m)| (m.clone(), i)).collect();
    let full_kernel = RatSubspace::from_spanning(ops.len(), kernel.clone());
    let mut generators: Vec<PolyMap> = Vec::new();
    let mut generated = RatSubspace::zero(ops.len());
    for d in 0..=big_d {
        // kernel elements supported in degrees <= d
        let allowed: Vec<bool> = ops.iter().map(|m| m.order() <= d).collect();
        let mut kd_rows = RatMatrix::zeros(0, ops.len());
        for r in 0..full_kernel.dim() {
            let row = full_kernel.basis().row(r);
            // project away disallowed coordinates, keep only if unchanged
            if row
                .iter()
                .enumerate()
                .all(|(i, c)| allowed[i] || c.is_zero())
            {
                kd_rows.push_row(row.to_vec());
            }
        }
        // also take combinations that cancel high-degree parts
        let kd = kernel_slice(&full_kernel, &allowed);
        let _ = kd_rows;
        for r in 0..kd.dim() {
            let row = kd.basis().row(r);
            if !generated.contains_vec(row) {
                let gen_poly: PolyMap = ops
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| !row[*i].is_zero())
                    .map(|(i, m)| (m.clone(), row[i].clone()))
                    .collect();
                // close the generated span under multiplication up to big_d
                let mut new_rows = RatMatrix::zeros(0, ops.len());
                for tau in monomials_up_to(v.vars, big_d) {
                    let shifted: PolyMap = gen_poly
                        .iter()
                        .filter_map(|(m, c)| {
                            let prod = m.add(&tau);
                            if prod.order() <= big_d {
                                Some((prod, c.clone()))
                            } else {
                                None
                            }
                        })
                        .collect();
                    if shifted.len() == gen_poly.len() {
                        let mut vrow = vec![Rat::zero(); ops.len()];
                        for (m, c) in &shifted {
                            vrow[op_index[m]] = c.clone();
                        }
                        new_rows.push_row(vrow);
                    }
                }
                generators.push(gen_poly);
                generated = generated
                    .sum(&RatSubspace::from_spanning(ops.len(), new_rows))
                    .expect("same ambient");
            }
        }
    }
    Ok(AnnihilatorOutcome {
        generators,
        colength,
    })
}

/// Subspace of `space` supported on the allowed coordinates.
fn kernel_slice(space: &RatSubspace, allowed: &[bool]) -> RatSubspace {
    let ambient = space.ambient_dim();
    let banned: Vec<usize> = (0..ambient).filter(|&i| !allowed[i]).collect();
    if banned.is_empty() {
        return space.clone();
    }
    // coordinate subspace of allowed positions
    let mut rows = RatMatrix::zeros(0, ambient);
    for i in 0..ambient {
        if allowed[i] {
            let mut v = vec![Rat::zero(); ambient];
            v[i] = Rat::one();
            rows.push_row(v);
        }
    }
    let coord = RatSubspace::from_spanning(ambient, rows);
    space.intersect(&coord).expect("same ambient")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{disjoint_union, embed_block, make_system};

    fn family(name: &str, params: &[usize], qmax: usize) -> SymbolFamily {
        symbol_family(&make_system(name, params).unwrap(), qmax)
    }

    #[test]
    fn hilbert_functions() {
        let full = family("full", &[2, 1], 5);
        assert_eq!(hilbert_function(&full).per_degree, vec![1, 2, 3, 4, 5, 6]);

        let cr = family("cauchy_riemann", &[], 5);
        let hf = hilbert_function(&cr);
        assert_eq!(hf.per_degree, vec![2, 2, 2, 2, 2, 2]);
        assert_eq!(hf.cumulative, vec![2, 4, 6, 8, 10, 12]);

        let cof = family("closed_one_form", &[], 5);
        assert_eq!(hilbert_function(&cof).per_degree, vec![2, 3, 4, 5, 6, 7]);
    }

    #[test]
    fn hilbert_polynomials() {
        let cr = family("cauchy_riemann", &[], 7);
        assert_eq!(hilbert_polynomial(&cr).unwrap(), NumericalPolynomial::constant(ratz(2)));

        let laplace = family("laplace", &[], 7);
        assert_eq!(
            hilbert_polynomial(&laplace).unwrap(),
            NumericalPolynomial::constant(ratz(2))
        );

        let cof = family("closed_one_form", &[], 7);
        assert_eq!(
            hilbert_polynomial(&cof).unwrap(),
            NumericalPolynomial::from_coeffs(vec![ratz(2), ratz(1)])
        );
    }

    #[test]
    fn spencer_formula_matches_interpolation() {
        for (name, params) in [
            ("cauchy_riemann", vec![]),
            ("laplace", vec![]),
            ("wave", vec![]),
            ("closed_one_form", vec![]),
            ("gradient", vec![]),
            ("full", vec![2, 2]),
        ] {
            let s = make_system(name, &params).unwrap();
            let fam = symbol_family(&s, default_qmax(s.n, s.order));
            let t = spencer_table(&fam).unwrap();
            let a = hilbert_polynomial(&fam).unwrap();
            let b = d_hilbert_via_spencer(&t, s.n);
            assert_eq!(a, b, "{name}");
        }
    }

    #[test]
    fn full_family_formula() {
        let t = spencer_table(&family("full", &[3, 2], 6)).unwrap();
        let p = d_hilbert_via_spencer(&t, 3);
        assert_eq!(p, binomial_poly(2, 2).scale(&ratz(2)));
    }

    #[test]
    fn characters_and_rank() {
        let cr = family("cauchy_riemann", &[], 6);
        assert_eq!(cartan_characters(&cr, 1, 0).unwrap(), vec![2, 0]);
        assert_eq!(rank_of_ideal(&cr, 0).unwrap(), 2);

        let cof = family("closed_one_form", &[], 6);
        assert_eq!(cartan_characters(&cof, 1, 0).unwrap(), vec![2, 1]);
        assert_eq!(rank_of_ideal(&cof, 0).unwrap(), 2);

        let full = family("full", &[2, 1], 5);
        assert_eq!(cartan_characters(&full, 1, 0).unwrap(), vec![1, 1]);

        let laplace = family("laplace", &[], 6);
        assert_eq!(rank_of_ideal(&laplace, 0).unwrap(), 2);
    }

    #[test]
    fn character_recursion_matches_direct() {
        for (name, params) in [("cauchy_riemann", vec![]), ("closed_one_form", vec![])] {
            let s = make_system(name, &params).unwrap();
            let fam = symbol_family(&s, default_qmax(s.n, s.order) + 3);
            let (q0, alpha) = involutive_characters(&fam, 0).unwrap();
            for r in 1..=3usize {
                let predicted = character_recursion(&alpha, r);
                let direct = cartan_characters(&fam, q0 + r, 0).unwrap();
                assert_eq!(predicted, direct, "{name} at r = {r}");
            }
        }
    }

    #[test]
    fn reduced_and_slope() {
        let p = NumericalPolynomial::constant(ratz(2));
        assert_eq!(
            reduced_polynomial(&p, 2).unwrap(),
            NumericalPolynomial::constant(ratz(1))
        );
        assert_eq!(spencer_slope(&p, 2).unwrap(), ratz(1));

        let q = NumericalPolynomial::from_coeffs(vec![ratz(2), ratz(1)]);
        assert_eq!(
            reduced_polynomial(&q, 2).unwrap(),
            NumericalPolynomial::from_coeffs(vec![ratz(1), rat(1, 2)])
        );
        assert_eq!(spencer_slope(&q, 1).unwrap(), ratz(1));

        let r = NumericalPolynomial::from_coeffs(vec![ratz(0), ratz(1), ratz(3)]);
        assert_eq!(spencer_slope(&r, 3).unwrap(), ratz(1));

        assert!(matches!(reduced_polynomial(&p, 0), Err(JsError::ZeroRank)));
    }

    #[test]
    fn eventual_comparison() {
        let a = NumericalPolynomial::from_coeffs(vec![ratz(2), ratz(1)]);
        let b = NumericalPolynomial::constant(ratz(2));
        assert_eq!(compare_poly_eventually(&a, &b), Ordering::Greater);
        assert_eq!(compare_poly_eventually(&b, &b), Ordering::Equal);
        let c = NumericalPolynomial::from_coeffs(vec![ratz(1), rat(1, 2)]);
        let d = NumericalPolynomial::from_coeffs(vec![ratz(0), ratz(1)]);
        assert_eq!(compare_poly_eventually(&c, &d), Ordering::Less);
    }

    #[test]
    fn two_cr_blocks_semistable_not_stable() {
        let cr = make_system("cauchy_riemann", &[]).unwrap();
        let union = disjoint_union(&cr, &cr, "cr_pair");
        let c1 = embed_block(&cr, 4, 0, "block_left");
        let c2 = embed_block(&cr, 4, 2, "block_right");
        let verdict = is_spencer_semistable(&union, &[c1, c2], 0).unwrap();
        assert!(verdict.semistable);
        assert!(!verdict.stable);
        assert!(verdict
            .witnesses
            .iter()
            .all(|w| w.comparison == Ordering::Equal));
    }

    #[test]
    fn mixed_union_not_semistable() {
        let cr = make_system("cauchy_riemann", &[]).unwrap();
        let cof = make_system("closed_one_form", &[]).unwrap();
        let union = disjoint_union(&cr, &cof, "cr_cof");
        let cand = embed_block(&cof, 4, 2, "cof_block");
        let verdict = is_spencer_semistable(&union, &[cand], 0).unwrap();
        assert!(!verdict.semistable);
        assert_eq!(verdict.witnesses[0].comparison, Ordering::Greater);
    }

    #[test]
    fn vacuous_semistability() {
        let cr = make_system("cauchy_riemann", &[]).unwrap();
        let verdict = is_spencer_semistable(&cr, &[], 0).unwrap();
        assert!(verdict.semistable);
        assert!(verdict.stable);
    }

    #[test]
    fn sub_ideal_membership() {
        // u_xx + u_yy is a consequence of Cauchy-Riemann, so it passes the
        // membership gate; a bare u_x is not a consequence and must fail
        let cr = make_system("cauchy_riemann", &[]).unwrap();
        let laplace_like = embed_block(&make_system("laplace", &[]).unwrap(), 2, 0, "consequence");
        assert!(is_spencer_semistable(&cr, &[laplace_like], 0).is_ok());

        let mut ux = LinDiffPoly::new();
        ux.add_term(
            JetVariable {
                dep: 0,
                index: MultiIndex::unit(2, 0),
            },
            ratz(1),
        );
        let ux_only = JetSystem::new("intruder", 2, 2, vec![ux]);
        assert!(matches!(
            is_spencer_semistable(&cr, &[ux_only], 0),
            Err(JsError::NotSubIdeal(_))
        ));
    }

    #[test]
    fn polystable_cases() {
        let cr = make_system("cauchy_riemann", &[]).unwrap();
        let single = polystable_decomposition(&cr, 0).unwrap();
        assert_eq!(single.blocks.len(), 1);
        assert!(single.polystable);

        let pair = disjoint_union(&cr, &cr, "cr_pair");
        let out = polystable_decomposition(&pair, 0).unwrap();
        assert_eq!(out.blocks.len(), 2);
        assert_eq!(out.slopes[0], out.slopes[1]);
        assert!(out.polystable);

        let cof = make_system("closed_one_form", &[]).unwrap();
        let mixed = disjoint_union(&cr, &cof, "cr_cof");
        let out = polystable_decomposition(&mixed, 0).unwrap();
        assert_eq!(out.blocks.len(), 2);
        assert_eq!(out.slopes, vec![ratz(1), rat(1, 2)]);
        assert!(!out.polystable);
    }

    #[test]
    fn obstruction_gradings() {
        let laplace = spencer_table(&family("laplace", &[], 6)).unwrap();
        assert_eq!(obstruction_grading(&laplace, 3).unwrap(), vec![0, 0, 1]);

        let cr = spencer_table(&family("cauchy_riemann", &[], 6)).unwrap();
        assert_eq!(obstruction_grading(&cr, 2).unwrap(), vec![0, 2]);

        let full = spencer_table(&family("full", &[2, 1], 5)).unwrap();
        assert_eq!(obstruction_grading(&full, 1).unwrap(), vec![0]);
    }

    #[test]
    fn sweeney_values() {
        assert_eq!(sweeney_bound(0, 5, 1).unwrap(), 0);
        assert_eq!(sweeney_bound(1, 1, 1).unwrap(), 2);
        assert_eq!(sweeney_bound(1, 1, 2).unwrap(), 4);
        assert_eq!(sweeney_bound(2, 2, 1).unwrap(), 14);
        assert_eq!(sweeney_bound(2, 1, 2).unwrap(), 62);
        assert!(sweeney_bound(2, 0, 1).is_err());
    }

    fn pm(vars: usize, terms: &[(&[usize], i64)]) -> PolyMap {
        terms
            .iter()
            .map(|&(exps, c)| {
                let mut m = MultiIndex::zero(vars);
                for &i in exps {
                    m = m.bump(i);
                }
                (m, ratz(c))
            })
            .collect()
    }

    #[test]
    fn d_stability_checks() {
        let one = DStableSpace {
            vars: 1,
            basis: vec![pm(1, &[(&[], 1)])],
        };
        assert!(d_stable_check(&one).unwrap());

        let just_z = DStableSpace {
            vars: 1,
            basis: vec![pm(1, &[(&[0], 1)])],
        };
        assert!(!d_stable_check(&just_z).unwrap());

        let quad = DStableSpace {
            vars: 1,
            basis: vec![
                pm(1, &[(&[], 1)]),
                pm(1, &[(&[0], 1)]),
                pm(1, &[(&[0, 0], 1)]),
            ],
        };
        assert!(d_stable_check(&quad).unwrap());

        let dependent = DStableSpace {
            vars: 1,
            basis: vec![pm(1, &[(&[], 1)]), pm(1, &[(&[], 2)])],
        };
        assert!(matches!(
            d_stable_check(&dependent),
            Err(JsError::DependentBasis)
        ));
    }

    #[test]
    fn annihilator_oracles() {
        let one = DStableSpace {
            vars: 1,
            basis: vec![pm(1, &[(&[], 1)])],
        };
        let out = annihilator_colength(&one).unwrap();
        assert_eq!(out.colength, 1);
        assert_eq!(out.generators, vec![pm(1, &[(&[0], 1)])]);

        let line = DStableSpace {
            vars: 1,
            basis: vec![pm(1, &[(&[], 1)]), pm(1, &[(&[0], 1)])],
        };
        let out = annihilator_colength(&line).unwrap();
        assert_eq!(out.colength, 2);
        assert_eq!(out.generators, vec![pm(1, &[(&[0, 0], 1)])]);

        let plane = DStableSpace {
            vars: 2,
            basis: vec![
                pm(2, &[(&[], 1)]),
                pm(2, &[(&[0], 1)]),
                pm(2, &[(&[1], 1)]),
            ],
        };
        let out = annihilator_colength(&plane).unwrap();
        assert_eq!(out.colength, 3);
        assert_eq!(out.generators.len(), 3);
        for g in &out.generators {
            assert!(g.keys().all(|m| m.order() == 2));
        }

        let bad = DStableSpace {
            vars: 1,
            basis: vec![pm(1, &[(&[0], 1)])],
        };
        assert!(matches!(
            annihilator_colength(&bad),
            Err(JsError::NotDStable)
        ));
    }

    #[test]
    fn semistable_implies_slope_inequality() {
        let cr = make_system("cauchy_riemann", &[]).unwrap();
        let union = disjoint_union(&cr, &cr, "cr_pair");
        let c1 = embed_block(&cr, 4, 0, "left");
        let verdict = is_spencer_semistable(&union, &[c1], 0).unwrap();
        assert!(verdict.semistable);
        let fam = symbol_family(&union, default_qmax(2, 1));
        let p = hilbert_polynomial(&fam).unwrap();
        let rank = rank_of_ideal(&fam, 0).unwrap();
        let system_slope = spencer_slope(&p, rank).unwrap();
        for w in &verdict.witnesses {
            assert!(w.candidate_slope <= system_slope);
        }
    }
}
