//! δ-Spencer complexes, cohomology tables, Cartan's test, Koszul-dual
//! cross-checks, the fiberwise jet-Spencer complex, and compatibility
//! sequences.
//!
//! Bidegree convention: h[q][p] with q the total symbol level and p the
//! exterior position, so the level-q complex reads
//! 0 → N^q → V*⊗N^{q−1} → Λ²V*⊗N^{q−2} → … and h[q][p] is the cohomology at
//! Λ^p V*⊗N^{q−p}. Complex terms are expressed in the RREF bases of the
//! components, so a term has dimension dim(N^{q−p})·binom(n,p) and δ∘δ = 0 is
//! a literal matrix identity.

use num::traits::{One, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::JsError;
use crate::jet::{total_derivative_multi, JetBasis, JetSystem};
use crate::multiindex::{binomial, MonomialBasis, monomials_of_degree, subsets, wedge_insert};
use crate::symbol::{symbol_family, SymbolFamily};
use crate::{Rat, RatMatrix, RatSubspace};

/// The level-q δ-complex with explicit matrices.
#[derive(Debug, Clone)]
pub struct DeltaComplexLevel {
    pub q: usize,
    /// dimension of Λ^p V*⊗N^{q−p} for p = 0..n
    pub terms: Vec<usize>,
    /// maps[p]: term p → term p+1
    pub maps: Vec<RatMatrix>,
}

impl DeltaComplexLevel {
    pub fn cohomology(&self) -> Vec<usize> {
        let n = self.terms.len() - 1;
        let ranks: Vec<usize> = self.maps.iter().map(|m| m.rank()).collect();
        (0..=n)
            .map(|p| {
                let above = if p < n { ranks[p] } else { 0 };
                let below = if p == 0 { 0 } else { ranks[p - 1] };
                self.terms[p] - above - below
            })
            .collect()
    }
}

/// Cohomology dimension table h[q][p] for q = 0..qmax, p = 0..n.
#[derive(Debug, Clone, PartialEq)]
pub struct SpencerTable {
    pub n: usize,
    pub qmax: usize,
    pub entries: Vec<Vec<usize>>,
}

impl SpencerTable {
    pub fn h(&self, q: usize, p: usize) -> usize {
        self.entries[q][p]
    }

    pub fn row_is_zero(&self, q: usize) -> bool {
        self.entries[q].iter().all(|&h| h == 0)
    }
}

/// ∂_i on a symbol component in the shift convention: (∂_i v)[α, μ] =
/// v[α, μ+1_i]. Returns the coordinate matrix N^{level} → N^{level−1} in the
/// two RREF bases (rows indexed by source basis vectors).
fn partial_coords(f: &SymbolFamily, level: usize, i: usize) -> RatMatrix {
    let src = &f.components[level].space;
    let dst = &f.components[level - 1].space;
    let src_mono = MonomialBasis::new(f.n, level);
    let dst_mono = MonomialBasis::new(f.n, level - 1);
    let mut out = RatMatrix::zeros(src.dim(), dst.dim());
    for r in 0..src.dim() {
        let v = src.basis().row(r);
        let mut w = vec![Rat::zero(); f.m * dst_mono.len()];
        for alpha in 0..f.m {
            for (mi, mono) in dst_mono.monos.iter().enumerate() {
                let up = mono.bump(i);
                let si = src_mono.index_of(&up).unwrap();
                w[alpha * dst_mono.len() + mi] = v[alpha * src_mono.len() + si].clone();
            }
        }
        let coords = dst
            .coordinates_of(&w)
            .expect("symbol family not closed under formal derivatives");
        for (c, val) in coords.into_iter().enumerate() {
            out.set(r, c, val);
        }
    }
    out
}

/// Assemble the level-q complex. Term-p coordinates are (subset J, basis
/// vector of N^{q−p}) with J major.
pub fn delta_complex(f: &SymbolFamily, q: usize) -> Result<DeltaComplexLevel, JsError> {
    if q > f.qmax {
        return Err(JsError::WindowTooSmall(format!(
            "level {q} beyond family window {}",
            f.qmax
        )));
    }
    let n = f.n;
    let comp_dim = |lvl: isize| -> usize {
        if lvl < 0 {
            0
        } else {
            f.components[lvl as usize].dim()
        }
    };
    let terms: Vec<usize> = (0..=n)
        .map(|p| comp_dim(q as isize - p as isize) * binomial(n, p))
        .collect();
    let mut maps = Vec::with_capacity(n);
    for p in 0..n {
        let src_lvl = q as isize - p as isize;
        let dst_lvl = src_lvl - 1;
        let mut mat = RatMatrix::zeros(terms[p + 1], terms[p]);
        if src_lvl >= 1 {
            let src_lvl = src_lvl as usize;
            let dim_src = comp_dim(src_lvl as isize);
            let dim_dst = comp_dim(dst_lvl);
            let src_subsets = subsets(n, p);
            let dst_subsets = subsets(n, p + 1);
            let dst_index = |j: &Vec<usize>| dst_subsets.iter().position(|x| x == j).unwrap();
            let sign_p = if p % 2 == 0 { 1i64 } else { -1 };
            let partials: Vec<RatMatrix> =
                (0..n).map(|i| partial_coords(f, src_lvl, i)).collect();
            for (ji, jset) in src_subsets.iter().enumerate() {
                for r in 0..dim_src {
                    let col = ji * dim_src + r;
                    for i in 0..n {
                        let Some((wsign, jnew)) = wedge_insert(jset, i) else {
                            continue;
                        };
                        let sgn = crate::ratz(sign_p * wsign);
                        let block = dst_index(&jnew) * dim_dst;
                        for c in 0..dim_dst {
                            let val = partials[i].get(r, c);
                            if !val.is_zero() {
                                let cur = mat.get(block + c, col).clone();
                                mat.set(block + c, col, cur + sgn.clone() * val.clone());
                            }
                        }
                    }
                }
            }
        }
        maps.push(mat);
    }
    // δ∘δ = 0, checked literally
    for p in 0..n - 1 {
        if terms[p] > 0 && terms[p + 2] > 0 {
            assert!(
                maps[p + 1].mul(&maps[p]).is_zero(),
                "delta squared nonzero at level {q}, position {p}"
            );
        }
    }
    Ok(DeltaComplexLevel { q, terms, maps })
}

/// Level-q cohomology of the free symbol (all components full), computed by
/// splitting δ into its multidegree blocks. δ preserves the total exponent
/// γ = μ + 1_J, so each block is a complex over the subsets of supp(γ) and
/// never exceeds 2^n entries.
fn free_level_cohomology(n: usize, m: usize, q: usize) -> Vec<usize> {
    let mut dims = vec![0usize; n + 1];
    let mut ranks = vec![0usize; n + 1];
    for gamma in monomials_of_degree(n, q) {
        let supp: Vec<usize> = (0..n).filter(|&i| gamma.get(i) > 0).collect();
        let s = supp.len();
        for p in 0..=n {
            dims[p] += binomial(s, p);
        }
        for p in 0..n {
            let src = subsets(s, p);
            let dst = subsets(s, p + 1);
            if src.is_empty() || dst.is_empty() {
                continue;
            }
            let sign_p = if p % 2 == 0 { 1i64 } else { -1 };
            let mut block = RatMatrix::zeros(dst.len(), src.len());
            for (ci, jset) in src.iter().enumerate() {
                for local in 0..s {
                    let Some((wsign, jnew)) = wedge_insert(jset, local) else {
                        continue;
                    };
                    let ri = dst.iter().position(|x| x == &jnew).unwrap();
                    block.set(ri, ci, crate::ratz(sign_p * wsign));
                }
            }
            ranks[p] += block.rank();
        }
    }
    (0..=n)
        .map(|p| {
            let below = if p == 0 { 0 } else { ranks[p - 1] };
            m * (dims[p] - ranks[p] - below)
        })
        .collect()
}

/// Full cohomology table over the family window.
pub fn spencer_table(f: &SymbolFamily) -> Result<SpencerTable, JsError> {
    let mut entries = Vec::with_capacity(f.qmax + 1);
    for q in 0..=f.qmax {
        let all_full = (0..=q.min(f.n)).all(|p| f.components[q - p].space.is_full());
        let row = if all_full {
            free_level_cohomology(f.n, f.m, q)
        } else {
            delta_complex(f, q)?.cohomology()
        };
        entries.push(row);
    }
    Ok(SpencerTable {
        n: f.n,
        qmax: f.qmax,
        entries,
    })
}

/// Least q₀ with all-zero table rows from q₀ through the window top,
/// confirmed across at least n+1 consecutive levels.
pub fn involutivity_degree(t: &SpencerTable) -> Result<usize, JsError> {
    let mut q0 = t.qmax + 1;
    for q in (1..=t.qmax).rev() {
        if t.row_is_zero(q) {
            q0 = q;
        } else {
            break;
        }
    }
    if q0 > t.qmax || t.qmax - q0 < t.n {
        return Err(JsError::NotStabilized(format!(
            "zero rows confirmed only from q = {q0} to {}; need {} consecutive levels",
            t.qmax,
            t.n + 1
        )));
    }
    Ok(q0)
}

#[derive(Debug, Clone)]
pub struct CartanOutcome {
    pub involutive: bool,
    pub characters: Vec<usize>,
    pub prolonged_dim: usize,
    pub bound: usize,
}

/// Cartan's test at degree q: after a seeded generic change of coordinates,
/// compute the chain of subspaces killed by the first ℓ directions, derive
/// the characters α^{(ℓ)}, and compare dim N^{q+1} with Σ ℓ·α^{(ℓ)}. Up to 8
/// seeds are tried and the minimal bound kept.
pub fn cartan_test(f: &SymbolFamily, q: usize, seed: u64) -> Result<CartanOutcome, JsError> {
    if q + 1 > f.qmax {
        return Err(JsError::WindowTooSmall(format!(
            "Cartan test at q = {q} needs component {} (window {})",
            q + 1,
            f.qmax
        )));
    }
    let n = f.n;
    let m = f.m;
    let mono = MonomialBasis::new(n, q);
    let ambient = m * mono.len();
    let prolonged_dim = f.components[q + 1].dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(usize, Vec<usize>)> = None;
    let attempts = 8;
    let mut tried = 0;
    let mut draws = 0;
    while tried < attempts && draws < 200 {
        draws += 1;
        // random invertible substitution
        let entries: Vec<i64> = (0..n * n).map(|_| rng.gen_range(-10i64..=10)).collect();
        let a = RatMatrix::build(n, n, |r, c| crate::ratz(entries[r * n + c]));
        if a.rank() < n {
            continue;
        }
        tried += 1;
        let images: Vec<Vec<Rat>> = (0..n).map(|i| a.row_vec(i)).collect();
        let sub = crate::multiindex::substitution_matrix(&images, n, q);
        let block = block_diagonal(&sub, m);
        let new_rows = f.rows[q].image_under(&block);
        let nq = if new_rows.dim() == 0 {
            RatSubspace::full(ambient)
        } else {
            RatSubspace::from_spanning(ambient, new_rows.basis().kernel_basis())
        };
        // chain: g^(j) = elements with no dependence on the first j directions
        let mut chain_dims = vec![nq.dim()];
        for j in 1..=n {
            let coords: Vec<usize> = (0..ambient)
                .filter(|&idx| {
                    let mi = idx % mono.len();
                    (0..j).all(|i| mono.monos[mi].get(i) == 0)
                })
                .collect();
            let mut basis_rows = RatMatrix::zeros(0, ambient);
            for &c in &coords {
                let mut v = vec![Rat::zero(); ambient];
                v[c] = Rat::one();
                basis_rows.push_row(v);
            }
            let killed = RatSubspace::from_spanning(ambient, basis_rows);
            chain_dims.push(nq.intersect(&killed)?.dim());
        }
        let characters: Vec<usize> = (1..=n).map(|l| chain_dims[l - 1] - chain_dims[l]).collect();
        let bound: usize = characters.iter().enumerate().map(|(i, a)| (i + 1) * a).sum();
        if best.as_ref().map_or(true, |(b, _)| bound < *b) {
            best = Some((bound, characters));
        }
        if prolonged_dim == bound {
            break;
        }
    }
    let (bound, characters) = best.ok_or(JsError::GenericityBudgetExhausted(attempts))?;
    Ok(CartanOutcome {
        involutive: prolonged_dim == bound,
        characters,
        prolonged_dim,
        bound,
    })
}

fn block_diagonal(m: &RatMatrix, copies: usize) -> RatMatrix {
    let r = m.rows();
    let c = m.cols();
    RatMatrix::build(copies * r, copies * c, |row, col| {
        if row / r == col / c {
            m.get(row % r, col % c).clone()
        } else {
            Rat::zero()
        }
    })
}

/// Layout index for Λ^p ⊗ Sym^j ⊗ W*: subset major, then dependent, then
/// monomial.
struct KoszulLayout {
    subsets: Vec<Vec<usize>>,
    m: usize,
    mono: MonomialBasis,
}

impl KoszulLayout {
    fn new(n: usize, p: usize, m: usize, j: usize) -> Self {
        KoszulLayout {
            subsets: subsets(n, p),
            m,
            mono: MonomialBasis::new(n, j),
        }
    }

    fn dim(&self) -> usize {
        self.subsets.len() * self.m * self.mono.len()
    }

    fn index(&self, si: usize, alpha: usize, mi: usize) -> usize {
        (si * self.m + alpha) * self.mono.len() + mi
    }
}

/// Λ^p ⊗ R_j inside the Koszul layout: every subset slot carries a copy of
/// the row space.
fn wedge_times_rows(layout: &KoszulLayout, rows: &RatSubspace) -> RatSubspace {
    let blk = layout.m * layout.mono.len();
    let mut mat = RatMatrix::zeros(0, layout.dim());
    for si in 0..layout.subsets.len() {
        for r in 0..rows.dim() {
            let mut v = vec![Rat::zero(); layout.dim()];
            for (c, val) in rows.basis().row(r).iter().enumerate() {
                if !val.is_zero() {
                    v[si * blk + c] = val.clone();
                }
            }
            mat.push_row(v);
        }
    }
    RatSubspace::from_spanning(layout.dim(), mat)
}

/// Koszul differential Λ^p⊗Sym^j → Λ^{p−1}⊗Sym^{j+1}:
/// ∂(e_I⊗x^μ⊗w) = Σ_s (−1)^{s+1} e_{I∖i_s}⊗x^{μ+1_{i_s}}⊗w.
/// Returned with rows = images of the source unit vectors.
fn koszul_matrix(n: usize, m: usize, p: usize, j: usize) -> RatMatrix {
    let src = KoszulLayout::new(n, p, m, j);
    let dst = KoszulLayout::new(n, p - 1, m, j + 1);
    let mut out = RatMatrix::zeros(src.dim(), dst.dim());
    for (si, iset) in src.subsets.iter().enumerate() {
        for alpha in 0..m {
            for (mi, mono) in src.mono.monos.iter().enumerate() {
                let row = src.index(si, alpha, mi);
                for (s, &i) in iset.iter().enumerate() {
                    let mut rest = iset.clone();
                    rest.remove(s);
                    let di = dst.subsets.iter().position(|x| x == &rest).unwrap();
                    let bumped = mono.bump(i);
                    let dm = dst.mono.index_of(&bumped).unwrap();
                    let sign = if s % 2 == 0 { 1i64 } else { -1 };
                    out.set(row, dst.index(di, alpha, dm), crate::ratz(sign));
                }
            }
        }
    }
    out
}

fn rank_mod(image_rows: &RatMatrix, denom: &RatSubspace) -> usize {
    if denom.dim() == 0 {
        return image_rows.rank();
    }
    image_rows.stack_vertical(denom.basis()).rank() - denom.dim()
}

/// Koszul homology of the characteristic module at the bidegree dual to
/// h[q][p]; an independent computation that must match the Spencer table.
///
/// The characteristic module in degree j is M_j = (Sym^j⊗W*)/R_j with R_j
/// the symbol row space, and the homology is taken at Λ^p ⊗ M_{q−p}.
pub fn koszul_dual_dims(f: &SymbolFamily, q: usize, p: usize) -> Result<usize, JsError> {
    if p > q {
        return Ok(0);
    }
    let j = q - p;
    if j + 1 > f.qmax {
        return Err(JsError::WindowTooSmall(format!(
            "Koszul check at (q, p) = ({q}, {p}) needs row space {} (window {})",
            j + 1,
            f.qmax
        )));
    }
    let n = f.n;
    let m = f.m;
    let here = KoszulLayout::new(n, p, m, j);
    let denom_here = wedge_times_rows(&here, &f.rows[j]);

    // kernel of the outgoing map composed with the quotient projection
    let ker_dim = if p == 0 {
        here.dim()
    } else {
        let out_map = koszul_matrix(n, m, p, j);
        let target = KoszulLayout::new(n, p - 1, m, j + 1);
        let denom_target = wedge_times_rows(&target, &f.rows[j + 1]);
        let rank = rank_mod(&out_map, &denom_target);
        here.dim() - rank
    };

    // image of the incoming map in the quotient
    let in_rank = if p + 1 > n || j == 0 {
        0
    } else {
        let in_map = koszul_matrix(n, m, p + 1, j - 1);
        rank_mod(&in_map, &denom_here)
    };

    Ok(ker_dim - denom_here.dim() - in_rank)
}

/// Fiberwise jet-Spencer complex of the free module:
/// J^k → V*⊗J^{k−1} → Λ²V*⊗J^{k−2} → …, with D = Σ dx_i ∧ ⊗ ∂̃_i (truncating
/// shift). Returns the cohomology dims per position; interior positions are
/// expected to vanish.
pub fn jet_spencer_exactness(s: &JetSystem, k: usize) -> Vec<usize> {
    let n = s.n;
    let m = s.m;
    let pmax = n.min(k);
    let term_dim = |p: usize| -> usize {
        binomial(n, p) * m * crate::multiindex::jet_dim_le(n, k - p)
    };
    let mut ranks = Vec::new();
    for p in 0..pmax {
        let src_sub = subsets(n, p);
        let dst_sub = subsets(n, p + 1);
        let src_jet = JetBasis::new(n, m, k - p);
        let dst_jet = JetBasis::new(n, m, k - p - 1);
        let mut mat = RatMatrix::zeros(dst_sub.len() * dst_jet.dim(), src_sub.len() * src_jet.dim());
        for (si, iset) in src_sub.iter().enumerate() {
            for (vi, var) in src_jet.entries.iter().enumerate() {
                let col = si * src_jet.dim() + vi;
                // D(e_I ⊗ u_var) contributes to slots (I∪{i}, shift down)
                for i in 0..n {
                    let Some((sign, jnew)) = wedge_insert(iset, i) else {
                        continue;
                    };
                    let Some(down) = var.index.drop(i) else {
                        continue;
                    };
                    let target_var = crate::jet::JetVariable {
                        dep: var.dep,
                        index: down,
                    };
                    let ti = dst_jet.index_of(&target_var).unwrap();
                    let di = dst_sub.iter().position(|x| x == &jnew).unwrap();
                    mat.set(di * dst_jet.dim() + ti, col, crate::ratz(sign));
                }
            }
        }
        ranks.push(mat.rank());
    }
    (0..=pmax)
        .map(|p| {
            let above = if p < pmax { ranks[p] } else { 0 };
            let below = if p == 0 { 0 } else { ranks[p - 1] };
            term_dim(p) - above - below
        })
        .collect()
}

/// One stage of the compatibility sequence: the operator produced at this
/// step, the cokernel-module dimensions per prolongation degree, and the
/// formal-exactness checks at the previous stage's target.
#[derive(Debug, Clone)]
pub struct CompatibilityStep {
    pub step_index: usize,
    pub operator: JetSystem,
    pub module_dims: Vec<usize>,
    pub exact: Vec<bool>,
}

#[derive(Debug, Clone)]
pub struct CompatibilitySequence {
    pub input_involutive: bool,
    pub steps: Vec<CompatibilityStep>,
}

/// Prolonged-operator matrix φ_P^{k+ℓ}: J^{k+ℓ}(source) → J^ℓ(target), rows
/// indexed (σ, equation) with |σ| ≤ ℓ in the fixed monomial order.
fn phi_matrix(p: &JetSystem, ell: usize) -> RatMatrix {
    let k = p.order;
    let basis = JetBasis::new(p.n, p.m, k + ell);
    let mut mat = RatMatrix::zeros(0, basis.dim());
    for d in 0..=ell {
        for sigma in monomials_of_degree(p.n, d) {
            for f in &p.equations {
                let g = total_derivative_multi(f, &sigma);
                mat.push_row(basis.vectorize(&g));
            }
        }
    }
    mat
}

/// Iterated compatibility construction: each new operator's components are a
/// basis of the functionals annihilating the image of the previous prolonged
/// operator, all taken at one extra order.
pub fn compatibility_sequence(
    s: &JetSystem,
    steps: usize,
    window: usize,
) -> Result<CompatibilitySequence, JsError> {
    let qmax = s.order + s.n + 4;
    let fam = symbol_family(s, qmax);
    let input_involutive = spencer_table(&fam)
        .and_then(|t| involutivity_degree(&t))
        .is_ok();

    let mut out = Vec::new();
    let mut current = s.clone();
    for step_index in 1..=steps {
        let neq = current.equations.len();
        if neq == 0 {
            break;
        }
        let _k = current.order;
        let phi1 = phi_matrix(&current, 1);
        let ann = phi1.transpose().kernel_basis();

        // module dims of the cokernel J^ℓ(target)/Im φ^{k+ℓ}
        let mut module_dims = Vec::with_capacity(window + 1);
        for ell in 0..=window {
            let jet_dim = neq * crate::multiindex::jet_dim_le(current.n, ell);
            let rank = phi_matrix(&current, ell).rank();
            module_dims.push(jet_dim - rank);
        }

        // next operator: one first-order equation per annihilator functional,
        // over `neq` fresh dependent variables
        let mut eqs = Vec::new();
        for r in 0..ann.rows() {
            let lam = ann.row(r);
            let mut poly = crate::jet::LinDiffPoly::new();
            let mut idx = 0usize;
            for d in 0..=1usize {
                for sigma in monomials_of_degree(current.n, d) {
                    for b in 0..neq {
                        let c = &lam[idx];
                        if !c.is_zero() {
                            poly.add_term(
                                crate::jet::JetVariable {
                                    dep: b,
                                    index: sigma.clone(),
                                },
                                c.clone(),
                            );
                        }
                        idx += 1;
                    }
                }
            }
            if !poly.is_zero() {
                eqs.push(poly);
            }
        }
        let next = JetSystem::new(
            &format!("{}_compat{}", s.name, step_index),
            current.n,
            neq,
            eqs,
        );

        // formal exactness at the current operator's target: the image of
        // φ_P^{k+1+r} must fill the kernel of φ_Q^{1+r}
        let mut exact = Vec::with_capacity(window + 1);
        for r in 0..=window {
            let im = phi_matrix(&current, 1 + r).rank();
            let jet_dim = neq * crate::multiindex::jet_dim_le(current.n, 1 + r);
            let ker = if next.equations.is_empty() {
                jet_dim
            } else {
                // φ_Q over source J^{1+r}: prolong by 1+r minus Q's own order
                jet_dim - phi_matrix(&next, 1 + r - next.order).rank()
            };
            exact.push(im == ker);
        }

        let done = next.equations.is_empty();
        out.push(CompatibilityStep {
            step_index,
            operator: next.clone(),
            module_dims,
            exact,
        });
        if done {
            break;
        }
        current = next;
    }
    Ok(CompatibilitySequence {
        input_involutive,
        steps: out,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::make_system;

    fn family(name: &str, params: &[usize], qmax: usize) -> SymbolFamily {
        symbol_family(&make_system(name, params).unwrap(), qmax)
    }

    #[test]
    fn delta_complex_examples() {
        let full = family("full", &[2, 1], 4);
        let lvl = delta_complex(&full, 2).unwrap();
        assert_eq!(lvl.terms, vec![3, 4, 1]);
        assert_eq!(lvl.maps[0].rank(), 3);
        assert_eq!(lvl.maps[1].rank(), 1);
        assert_eq!(lvl.cohomology(), vec![0, 0, 0]);

        let laplace = family("laplace", &[], 5);
        let lvl = delta_complex(&laplace, 2).unwrap();
        assert_eq!(lvl.terms, vec![2, 4, 1]);
        assert_eq!(lvl.cohomology(), vec![0, 1, 0]);

        let cr = family("cauchy_riemann", &[], 5);
        let lvl = delta_complex(&cr, 1).unwrap();
        assert_eq!(lvl.terms, vec![2, 4, 0]);
        assert_eq!(lvl.cohomology(), vec![0, 2, 0]);
    }

    #[test]
    fn spencer_tables() {
        let laplace = family("laplace", &[], 5);
        let t = spencer_table(&laplace).unwrap();
        for q in 0..=5 {
            for p in 0..=2 {
                let expected = match (q, p) {
                    (0, 0) => 1,
                    (2, 1) => 1,
                    _ => 0,
                };
                assert_eq!(t.h(q, p), expected, "laplace h[{q}][{p}]");
            }
        }
        assert_eq!(involutivity_degree(&t).unwrap(), 3);

        let cr = family("cauchy_riemann", &[], 5);
        let t = spencer_table(&cr).unwrap();
        assert_eq!(t.h(1, 1), 2);
        assert_eq!(
            t.entries.iter().flatten().sum::<usize>(),
            2 + 2,
            "only h[0][0]=2 and h[1][1]=2"
        );
        assert_eq!(involutivity_degree(&t).unwrap(), 2);

        let full = family("full", &[2, 1], 4);
        let t = spencer_table(&full).unwrap();
        assert_eq!(involutivity_degree(&t).unwrap(), 1);
        for q in 1..=4 {
            assert!(t.row_is_zero(q));
        }
    }

    #[test]
    fn free_fast_path_matches_dense() {
        for (n, m, q) in [(2, 1, 3), (3, 2, 3), (2, 3, 4)] {
            let fam = family("full", &[n, m], q);
            let dense = delta_complex(&fam, q).unwrap().cohomology();
            let fast = free_level_cohomology(n, m, q);
            assert_eq!(dense, fast, "free table n={n} m={m} q={q}");
        }
    }

    #[test]
    fn cartan_tests() {
        let laplace = family("laplace", &[], 5);
        let out = cartan_test(&laplace, 2, 0).unwrap();
        assert!(out.involutive);
        assert_eq!(out.characters, vec![2, 0]);

        let cr = family("cauchy_riemann", &[], 5);
        let out = cartan_test(&cr, 1, 0).unwrap();
        assert!(out.involutive);
        assert_eq!(out.characters, vec![2, 0]);

        let cof = family("closed_one_form", &[], 5);
        let out = cartan_test(&cof, 1, 0).unwrap();
        assert!(out.involutive);
        assert_eq!(out.characters, vec![2, 1]);
        assert_eq!(out.prolonged_dim, 4);

        let full = family("full", &[2, 1], 4);
        let out = cartan_test(&full, 1, 0).unwrap();
        assert!(out.involutive);
        assert_eq!(out.characters, vec![1, 1]);
    }

    #[test]
    fn involutive_prolongations_stay_involutive() {
        let laplace = family("laplace", &[], 6);
        for q in 2..=4 {
            assert!(cartan_test(&laplace, q, 0).unwrap().involutive);
        }
    }

    #[test]
    fn koszul_duality_matches_table() {
        for (name, params, qmax) in [
            ("laplace", vec![], 5usize),
            ("cauchy_riemann", vec![], 5),
            ("closed_one_form", vec![], 5),
        ] {
            let fam = family(name, &params, qmax);
            let t = spencer_table(&fam).unwrap();
            for q in 0..qmax {
                for p in 0..=fam.n.min(q) {
                    let k = koszul_dual_dims(&fam, q, p).unwrap();
                    assert_eq!(k, t.h(q, p), "{name} at ({q}, {p})");
                }
            }
        }
        let full = family("full", &[2, 1], 4);
        assert_eq!(koszul_dual_dims(&full, 2, 1).unwrap(), 0);
    }

    #[test]
    fn jet_spencer_free_exactness() {
        for (n, m, k) in [(2usize, 1usize, 2usize), (1, 1, 3), (3, 2, 2)] {
            let s = make_system("full", &[n, m]).unwrap();
            let h = jet_spencer_exactness(&s, k);
            assert_eq!(h[0], m, "constants at position 0");
            for (p, &hp) in h.iter().enumerate().skip(1) {
                assert_eq!(hp, 0, "position {p} for (n,m,k)=({n},{m},{k})");
            }
        }
    }

    #[test]
    fn gradient_compatibility_sequence() {
        let grad = make_system("gradient", &[]).unwrap();
        let seq = compatibility_sequence(&grad, 3, 3).unwrap();
        assert!(seq.input_involutive);
        assert!(seq.steps.len() >= 2);
        // step 1 recovers the curl relation
        let curl = &seq.steps[0];
        assert_eq!(curl.operator.equations.len(), 1);
        assert_eq!(curl.operator.m, 2);
        assert_eq!(curl.module_dims[1], 1);
        assert!(curl.exact.iter().all(|&b| b));
        // step 2 terminates: no relations among the curl
        let last = &seq.steps[1];
        assert_eq!(last.operator.equations.len(), 0);
        assert!(last.module_dims.iter().all(|&d| d == 0));
        assert!(last.exact.iter().all(|&b| b));
    }

    #[test]
    fn full_system_compatibility_is_empty() {
        let full = make_system("full", &[2, 1]).unwrap();
        let seq = compatibility_sequence(&full, 2, 2).unwrap();
        assert!(seq.steps.is_empty());
    }
}
