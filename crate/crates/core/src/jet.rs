//! Jet variables, linear differential polynomials, systems, prolongation and
//! the filtered-ideal slices they span.

use std::collections::BTreeMap;

use num::traits::Zero;

use crate::multiindex::{jet_dim_le, monomials_of_degree, sym_dim, MultiIndex};
use crate::{Rat, RatMatrix, RatSubspace};

/// One jet coordinate u^α_σ.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct JetVariable {
    pub dep: usize,
    pub index: MultiIndex,
}

impl JetVariable {
    pub fn order(&self) -> usize {
        self.index.order()
    }
}

/// Linear combination of jet variables with rational coefficients, plus a
/// constant term. One scalar PDE reads `poly = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinDiffPoly {
    terms: BTreeMap<JetVariable, Rat>,
    pub constant: Rat,
}

impl LinDiffPoly {
    pub fn new() -> Self {
        LinDiffPoly {
            terms: BTreeMap::new(),
            constant: Rat::zero(),
        }
    }

    pub fn from_terms(terms: Vec<(JetVariable, Rat)>) -> Self {
        let mut p = LinDiffPoly::new();
        for (v, c) in terms {
            p.add_term(v, c);
        }
        p
    }

    /// Add `c · v`, dropping the entry if the total coefficient cancels.
    pub fn add_term(&mut self, v: JetVariable, c: Rat) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(v.clone()).or_insert_with(Rat::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&v);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&JetVariable, &Rat)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty() && self.constant.is_zero()
    }

    /// Max jet order over the terms (0 for a constant).
    pub fn order(&self) -> usize {
        self.terms.keys().map(|v| v.order()).max().unwrap_or(0)
    }

    /// Top-order part: terms whose order equals the polynomial order.
    pub fn top_part(&self) -> LinDiffPoly {
        let k = self.order();
        let mut p = LinDiffPoly::new();
        for (v, c) in &self.terms {
            if v.order() == k {
                p.add_term(v.clone(), c.clone());
            }
        }
        p
    }
}

impl Default for LinDiffPoly {
    fn default() -> Self {
        Self::new()
    }
}

/// Total derivative D_i: each u^α_σ maps to u^α_{σ+1_i}, constants vanish.
pub fn total_derivative(p: &LinDiffPoly, i: usize) -> LinDiffPoly {
    let mut out = LinDiffPoly::new();
    for (v, c) in p.terms() {
        out.add_term(
            JetVariable {
                dep: v.dep,
                index: v.index.bump(i),
            },
            c.clone(),
        );
    }
    out
}

/// Iterated total derivative D^σ.
pub fn total_derivative_multi(p: &LinDiffPoly, sigma: &MultiIndex) -> LinDiffPoly {
    let mut out = p.clone();
    for (i, &e) in sigma.0.iter().enumerate() {
        for _ in 0..e {
            out = total_derivative(&out, i);
        }
    }
    out
}

/// A linear PDE system with constant coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct JetSystem {
    pub name: String,
    pub n: usize,
    pub m: usize,
    pub equations: Vec<LinDiffPoly>,
    pub order: usize,
    /// Variable names for printing; default to x1.. / u1.. when constructed
    /// programmatically.
    pub ind_names: Vec<String>,
    pub dep_names: Vec<String>,
}

impl JetSystem {
    pub fn new(name: &str, n: usize, m: usize, equations: Vec<LinDiffPoly>) -> Self {
        let order = equations.iter().map(|e| e.order()).max().unwrap_or(0);
        JetSystem {
            name: name.to_string(),
            n,
            m,
            equations,
            order,
            ind_names: (1..=n).map(|i| format!("x{i}")).collect(),
            dep_names: (1..=m).map(|i| format!("u{i}")).collect(),
        }
    }

    pub fn with_names(mut self, ind: Vec<String>, dep: Vec<String>) -> Self {
        assert_eq!(ind.len(), self.n);
        assert_eq!(dep.len(), self.m);
        self.ind_names = ind;
        self.dep_names = dep;
        self
    }

    /// True when all equations share the same order.
    pub fn is_pure_order(&self) -> bool {
        self.equations
            .iter()
            .all(|e| e.order() == self.order || e.is_zero())
    }
}

/// Prolongation: all D^σ F_A with |σ| ≤ r, enumerated by |σ| ascending and
/// within each degree by the fixed monomial order.
pub fn prolong_system(s: &JetSystem, r: usize) -> JetSystem {
    let mut eqs = Vec::new();
    for d in 0..=r {
        for sigma in monomials_of_degree(s.n, d) {
            for f in &s.equations {
                let g = total_derivative_multi(f, &sigma);
                if !g.is_zero() {
                    eqs.push(g);
                }
            }
        }
    }
    let mut out = JetSystem::new(&s.name, s.n, s.m, eqs);
    out.ind_names = s.ind_names.clone();
    out.dep_names = s.dep_names.clone();
    out
}

/// Coordinate layout of the jet space of order ≤ k: entries grouped by order
/// ascending, then dependent index, then monomial in the fixed order.
#[derive(Debug, Clone)]
pub struct JetBasis {
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub entries: Vec<JetVariable>,
    index: BTreeMap<JetVariable, usize>,
}

impl JetBasis {
    pub fn new(n: usize, m: usize, k: usize) -> Self {
        let mut entries = Vec::new();
        for q in 0..=k {
            for dep in 0..m {
                for mono in monomials_of_degree(n, q) {
                    entries.push(JetVariable { dep, index: mono });
                }
            }
        }
        debug_assert_eq!(entries.len(), m * jet_dim_le(n, k));
        let index = entries
            .iter()
            .enumerate()
            .map(|(i, v)| (v.clone(), i))
            .collect();
        JetBasis {
            n,
            m,
            k,
            entries,
            index,
        }
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn index_of(&self, v: &JetVariable) -> Option<usize> {
        self.index.get(v).copied()
    }

    /// Offset of the order-q block for dependent 0.
    pub fn order_offset(&self, q: usize) -> usize {
        (0..q).map(|d| self.m * sym_dim(self.n, d)).sum()
    }

    /// Coefficient vector of a polynomial's linear part in this basis.
    pub fn vectorize(&self, p: &LinDiffPoly) -> Vec<Rat> {
        let mut v = vec![Rat::zero(); self.dim()];
        for (var, c) in p.terms() {
            let idx = self
                .index_of(var)
                .expect("jet variable outside basis range");
            v[idx] = c.clone();
        }
        v
    }
}

/// Span of the prolonged equations D^σ F_A with ord(F_A)+|σ| ≤ k inside the
/// order-≤k jet coordinate space.
#[derive(Debug, Clone)]
pub struct FilteredIdealSlice {
    pub k: usize,
    pub span: RatSubspace,
}

pub fn ideal_slice(s: &JetSystem, k: usize) -> FilteredIdealSlice {
    let basis = JetBasis::new(s.n, s.m, k);
    let mut rows = Vec::new();
    for f in &s.equations {
        let kf = f.order();
        if kf > k || f.is_zero() {
            continue;
        }
        for d in 0..=(k - kf) {
            for sigma in monomials_of_degree(s.n, d) {
                let g = total_derivative_multi(f, &sigma);
                rows.push(basis.vectorize(&g));
            }
        }
    }
    let span = if rows.is_empty() {
        RatSubspace::zero(basis.dim())
    } else {
        RatSubspace::from_spanning(basis.dim(), RatMatrix::from_rows(rows))
    };
    FilteredIdealSlice { k, span }
}

/// Krull growth function h(k) = dim(F^k A / F^k I) = m·binom(n+k,n) − dim slice.
pub fn h_krull(s: &JetSystem, k: usize) -> usize {
    s.m * jet_dim_le(s.n, k) - ideal_slice(s, k).span.dim()
}
