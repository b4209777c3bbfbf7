//! Multi-indices, monomial bases and the combinatorics shared by the symbol
//! and Spencer machinery.
//!
//! All monomial bases are enumerated once and for all in lexicographic
//! descending order on exponent vectors (graded pieces are handled degree by
//! degree, so this is the graded-lexicographic convention), which makes every
//! matrix in the pipeline reproducible bit for bit.

use std::collections::BTreeMap;

use crate::{Rat, RatMatrix};
use num::traits::Zero;

/// Exponent vector over the independent variables.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MultiIndex(pub Vec<usize>);

impl MultiIndex {
    pub fn zero(n: usize) -> Self {
        MultiIndex(vec![0; n])
    }

    pub fn unit(n: usize, i: usize) -> Self {
        let mut v = vec![0; n];
        v[i] = 1;
        MultiIndex(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// |σ|, the total order.
    pub fn order(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn get(&self, i: usize) -> usize {
        self.0[i]
    }

    /// σ + 1_i
    pub fn bump(&self, i: usize) -> MultiIndex {
        let mut v = self.0.clone();
        v[i] += 1;
        MultiIndex(v)
    }

    /// σ - 1_i, if σ_i > 0.
    pub fn drop(&self, i: usize) -> Option<MultiIndex> {
        if self.0[i] == 0 {
            return None;
        }
        let mut v = self.0.clone();
        v[i] -= 1;
        Some(MultiIndex(v))
    }

    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a + b)
                .collect(),
        )
    }
}

pub fn binomial(a: usize, b: usize) -> usize {
    if b > a {
        return 0;
    }
    let b = b.min(a - b);
    let mut acc: u128 = 1;
    for i in 0..b {
        acc = acc * (a - i) as u128 / (i + 1) as u128;
    }
    acc as usize
}

/// Number of monomials of degree exactly `q` in `n` variables.
pub fn sym_dim(n: usize, q: usize) -> usize {
    if n == 0 {
        return if q == 0 { 1 } else { 0 };
    }
    binomial(n + q - 1, q)
}

/// Number of jet coordinates of order <= k for one dependent variable.
pub fn jet_dim_le(n: usize, k: usize) -> usize {
    binomial(n + k, n)
}

/// All exponent vectors of degree `q` in `n` variables, lexicographically
/// descending (e.g. for n=2, q=2: (2,0), (1,1), (0,2)).
pub fn monomials_of_degree(n: usize, q: usize) -> Vec<MultiIndex> {
    let mut out = Vec::with_capacity(sym_dim(n, q));
    let mut cur = vec![0usize; n];
    fn rec(n: usize, pos: usize, rem: usize, cur: &mut Vec<usize>, out: &mut Vec<MultiIndex>) {
        if pos == n - 1 {
            cur[pos] = rem;
            out.push(MultiIndex(cur.clone()));
            return;
        }
        for e in (0..=rem).rev() {
            cur[pos] = e;
            rec(n, pos + 1, rem - e, cur, out);
        }
    }
    if n == 0 {
        if q == 0 {
            out.push(MultiIndex(vec![]));
        }
        return out;
    }
    rec(n, 0, q, &mut cur, &mut out);
    out
}

/// Monomial basis of one symmetric-power degree with index lookup.
#[derive(Debug, Clone)]
pub struct MonomialBasis {
    pub n: usize,
    pub q: usize,
    pub monos: Vec<MultiIndex>,
    index: BTreeMap<MultiIndex, usize>,
}

impl MonomialBasis {
    pub fn new(n: usize, q: usize) -> Self {
        let monos = monomials_of_degree(n, q);
        let index = monos
            .iter()
            .enumerate()
            .map(|(i, m)| (m.clone(), i))
            .collect();
        MonomialBasis { n, q, monos, index }
    }

    pub fn len(&self) -> usize {
        self.monos.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monos.is_empty()
    }

    pub fn index_of(&self, m: &MultiIndex) -> Option<usize> {
        self.index.get(m).copied()
    }
}

/// All p-element subsets of {0..n-1} in lexicographic order, for the exterior
/// algebra factors.
pub fn subsets(n: usize, p: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::with_capacity(binomial(n, p));
    let mut cur = Vec::with_capacity(p);
    fn rec(n: usize, p: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == p {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(n, p, i + 1, cur, out);
            cur.pop();
        }
    }
    rec(n, p, 0, &mut cur, &mut out);
    out
}

/// Wedge `e_subset ∧ e_i`: sign and the enlarged (sorted) subset, or None if
/// `i` already occurs. Sign counts transpositions needed to move `i` past the
/// elements larger than it.
pub fn wedge_insert(subset: &[usize], i: usize) -> Option<(i64, Vec<usize>)> {
    if subset.contains(&i) {
        return None;
    }
    let larger = subset.iter().filter(|&&j| j > i).count();
    let sign = if larger % 2 == 0 { 1 } else { -1 };
    let mut s = subset.to_vec();
    s.push(i);
    s.sort_unstable();
    Some((sign, s))
}

/// Matrix of the degree-`q` symmetric power of a linear variable substitution,
/// in plain monomial coordinates.
///
/// `images[i]` is the image of source variable i as a coefficient vector over
/// the `n_to` target variables. The returned matrix has shape
/// (target monomial count) x (source monomial count), so it composes with
/// `Matrix::apply` / `Subspace::image_under`.
pub fn substitution_matrix(images: &[Vec<Rat>], n_to: usize, q: usize) -> RatMatrix {
    let n_from = images.len();
    let src = MonomialBasis::new(n_from, q);
    let dst = MonomialBasis::new(n_to, q);
    let mut mat = RatMatrix::zeros(dst.len(), src.len());
    for (si, mono) in src.monos.iter().enumerate() {
        // expand prod_i (sum_a c_{ia} y_a)^{mono_i}
        let mut poly: BTreeMap<MultiIndex, Rat> = BTreeMap::new();
        poly.insert(MultiIndex::zero(n_to), num::traits::One::one());
        for (var, &exp) in mono.0.iter().enumerate() {
            for _ in 0..exp {
                let mut next: BTreeMap<MultiIndex, Rat> = BTreeMap::new();
                for (tm, tc) in &poly {
                    for (a, c) in images[var].iter().enumerate() {
                        if c.is_zero() {
                            continue;
                        }
                        let key = tm.bump(a);
                        let entry = next.entry(key).or_insert_with(Rat::zero);
                        *entry += tc.clone() * c.clone();
                    }
                }
                poly = next;
            }
        }
        for (tm, tc) in poly {
            if tc.is_zero() {
                continue;
            }
            if let Some(di) = dst.index_of(&tm) {
                mat.set(di, si, tc);
            }
        }
    }
    mat
}
