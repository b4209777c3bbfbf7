//! Geometric symbols of a system: per-degree kernels N^q, their prolongation,
//! characteristic covectors and hyperplane restriction.
//!
//! Coordinates on Sym^q(V*)⊗W are laid out dependent-major: index
//! `α·sym_dim(n,q) + monomial index`, with the monomial order fixed in
//! [`crate::multiindex`]. Symbol rows are kept in the plain monomial
//! convention (multiplying a row by x^σ shifts indices, matching D^σ on
//! equations term by term).

use num::traits::Zero;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::JsError;
use crate::jet::JetSystem;
use crate::multiindex::{substitution_matrix, sym_dim, MonomialBasis, MultiIndex};
use crate::{Rat, RatMatrix, RatSubspace};

/// One graded piece N^q ⊆ Sym^q(V*)⊗W.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolComponent {
    pub q: usize,
    pub space: RatSubspace,
}

impl SymbolComponent {
    pub fn ambient_dim(&self) -> usize {
        self.space.ambient_dim()
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }
}

/// The family {N^q} for q = 0..qmax, together with the row spaces (spans of
/// the prolonged top-order functionals) the kernels were cut out by. Rows are
/// what restriction and Cartan's test operate on, so they are kept alongside.
#[derive(Debug, Clone)]
pub struct SymbolFamily {
    pub name: String,
    pub n: usize,
    pub m: usize,
    pub order: usize,
    pub qmax: usize,
    pub components: Vec<SymbolComponent>,
    pub rows: Vec<RatSubspace>,
    pub stabilization_degree: Option<usize>,
}

impl SymbolFamily {
    pub fn dims(&self) -> Vec<usize> {
        self.components.iter().map(|c| c.dim()).collect()
    }

    pub fn require_stabilized(&self) -> Result<usize, JsError> {
        self.stabilization_degree.ok_or_else(|| {
            JsError::WindowTooSmall(format!(
                "no polynomial tail detected in symbol dims up to q = {}",
                self.qmax
            ))
        })
    }
}

/// Row vectors x^σ·top(F_A) of total degree q, one per equation and shift,
/// as a matrix over Sym^q(V*)⊗W.
pub fn symbol_rows(s: &JetSystem, q: usize) -> RatMatrix {
    let basis = MonomialBasis::new(s.n, q);
    let ambient = s.m * basis.len();
    let mut mat = RatMatrix::zeros(0, ambient);
    for f in &s.equations {
        if f.is_zero() {
            continue;
        }
        let k = f.order();
        if k > q {
            continue;
        }
        let top = f.top_part();
        for sigma in crate::multiindex::monomials_of_degree(s.n, q - k) {
            let mut row = vec![Rat::zero(); ambient];
            for (v, c) in top.terms() {
                let mu = v.index.add(&sigma);
                let mi = basis.index_of(&mu).expect("degree bookkeeping broken");
                row[v.dep * basis.len() + mi] = c.clone();
            }
            mat.push_row(row);
        }
    }
    mat
}

/// N^q: kernel of the degree-q symbol rows (the full space below the lowest
/// equation order).
pub fn symbol_component(s: &JetSystem, q: usize) -> SymbolComponent {
    let ambient = s.m * sym_dim(s.n, q);
    let rows = symbol_rows(s, q);
    let space = if rows.rows() == 0 {
        RatSubspace::full(ambient)
    } else {
        RatSubspace::from_spanning(ambient, rows.kernel_basis())
    };
    SymbolComponent { q, space }
}

/// Inclusion Sym^{q+1}(V*)⊗W → V*⊗Sym^q(V*)⊗W, S ↦ (∂_i S)_i up to the
/// monomial-shift convention: image slot (i, α, μ) reads S[α, μ+1_i].
///
/// The target is laid out direction-major: index
/// `i·(m·sym_dim(q)) + α·sym_dim(q) + monomial`.
fn sym_inclusion_matrix(n: usize, m: usize, q: usize) -> RatMatrix {
    let src = MonomialBasis::new(n, q + 1);
    let dst = MonomialBasis::new(n, q);
    let rows = n * m * dst.len();
    let cols = m * src.len();
    let mut mat = RatMatrix::zeros(rows, cols);
    for i in 0..n {
        for alpha in 0..m {
            for (mi, mono) in dst.monos.iter().enumerate() {
                let target = i * m * dst.len() + alpha * dst.len() + mi;
                let shifted = mono.bump(i);
                let si = src.index_of(&shifted).expect("shift stays in degree q+1");
                mat.set(target, alpha * src.len() + si, num::traits::One::one());
            }
        }
    }
    mat
}

/// First prolongation Pr₁(N) = (V*⊗N) ∩ Sym^{q+1}(V*)⊗W, returned in
/// Sym^{q+1}⊗W coordinates.
pub fn prolong_symbol(c: &SymbolComponent, n: usize, m: usize) -> SymbolComponent {
    let q = c.q;
    let dst_len = sym_dim(n, q);
    assert_eq!(c.ambient_dim(), m * dst_len);
    let big = n * m * dst_len;
    let incl = sym_inclusion_matrix(n, m, q);

    // V*⊗N inside the big space: one copy of each basis vector per direction
    let mut vn_rows = Vec::new();
    for i in 0..n {
        for r in 0..c.space.dim() {
            let mut v = vec![Rat::zero(); big];
            let row = c.space.basis().row(r);
            for (j, val) in row.iter().enumerate() {
                if !val.is_zero() {
                    v[i * m * dst_len + j] = val.clone();
                }
            }
            vn_rows.push(v);
        }
    }
    let vn = if vn_rows.is_empty() {
        RatSubspace::zero(big)
    } else {
        RatSubspace::from_spanning(big, RatMatrix::from_rows(vn_rows))
    };
    let sym_image = RatSubspace::full(m * sym_dim(n, q + 1)).image_under(&incl);
    let inter = vn.intersect(&sym_image).expect("same ambient");

    // pull back through the injective inclusion: S[α,ν] = v[i][α,ν−1_i] for
    // any i with ν_i > 0
    let src = MonomialBasis::new(n, q + 1);
    let mut rows = Vec::new();
    for r in 0..inter.dim() {
        let v = inter.basis().row(r);
        let mut s = vec![Rat::zero(); m * src.len()];
        for alpha in 0..m {
            for (si, nu) in src.monos.iter().enumerate() {
                let i = (0..n).find(|&i| nu.get(i) > 0).expect("degree q+1 > 0");
                let mu = nu.drop(i).unwrap();
                let dstb = MonomialBasis::new(n, q);
                let mi = dstb.index_of(&mu).unwrap();
                s[alpha * src.len() + si] = v[i * m * dst_len + alpha * dst_len + mi].clone();
            }
        }
        rows.push(s);
    }
    let space = if rows.is_empty() {
        RatSubspace::zero(m * src.len())
    } else {
        RatSubspace::from_spanning(m * src.len(), RatMatrix::from_rows(rows))
    };
    SymbolComponent { q: q + 1, space }
}

fn detect_stabilization(dims: &[usize], n: usize, order: usize) -> Option<usize> {
    // dim N^q is eventually a polynomial in q of degree < n, so the n-th
    // finite differences of the tail vanish
    let qmax = dims.len() - 1;
    if qmax < n {
        return None;
    }
    let diffs_vanish_from = |q0: usize| -> bool {
        for q in q0..=qmax.saturating_sub(n) {
            let mut window: Vec<i64> = dims[q..=q + n].iter().map(|&d| d as i64).collect();
            for _ in 0..n {
                window = window.windows(2).map(|w| w[1] - w[0]).collect();
            }
            if window[0] != 0 {
                return false;
            }
        }
        true
    };
    (order..=qmax.saturating_sub(n)).find(|&q0| diffs_vanish_from(q0))
}

/// All components 0..qmax plus the row spaces they came from.
pub fn symbol_family(s: &JetSystem, qmax: usize) -> SymbolFamily {
    let mut components = Vec::with_capacity(qmax + 1);
    let mut rows = Vec::with_capacity(qmax + 1);
    for q in 0..=qmax {
        let ambient = s.m * sym_dim(s.n, q);
        let mat = symbol_rows(s, q);
        let row_space = if mat.rows() == 0 {
            RatSubspace::zero(ambient)
        } else {
            RatSubspace::from_spanning(ambient, mat.clone())
        };
        let space = if mat.rows() == 0 {
            RatSubspace::full(ambient)
        } else {
            RatSubspace::from_spanning(ambient, mat.kernel_basis())
        };
        components.push(SymbolComponent { q, space });
        rows.push(row_space);
    }
    let dims: Vec<usize> = components.iter().map(|c| c.dim()).collect();
    let stabilization_degree = detect_stabilization(&dims, s.n, s.order);
    SymbolFamily {
        name: s.name.clone(),
        n: s.n,
        m: s.m,
        order: s.order,
        qmax,
        components,
        rows,
        stabilization_degree,
    }
}

/// Evaluate the top-order symbol matrix at ξ: one row per equation, one
/// column per dependent variable.
fn symbol_matrix_at(s: &JetSystem, xi: &[Rat]) -> RatMatrix {
    let mut mat = RatMatrix::zeros(0, s.m);
    for f in &s.equations {
        if f.is_zero() {
            continue;
        }
        let top = f.top_part();
        let mut row = vec![Rat::zero(); s.m];
        for (v, c) in top.terms() {
            let mut mono = Rat::from_integer(1.into());
            for (i, &e) in v.index.0.iter().enumerate() {
                for _ in 0..e {
                    mono *= xi[i].clone();
                }
            }
            row[v.dep] += c.clone() * mono;
        }
        mat.push_row(row);
    }
    mat
}

/// Rank test at ξ: non-characteristic iff the evaluated symbol matrix has
/// full rank min(m, #equations).
pub fn is_non_characteristic(s: &JetSystem, xi: &[Rat]) -> Result<bool, JsError> {
    if xi.iter().all(|x| x.is_zero()) {
        return Err(JsError::ZeroCovector);
    }
    let mat = symbol_matrix_at(s, xi);
    let expected = s.m.min(mat.rows());
    Ok(mat.rank() == expected)
}

/// Deterministic rejection sampling of a non-characteristic covector.
pub fn generic_covector(s: &JetSystem, seed: u64) -> Result<Vec<Rat>, JsError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let budget = 64;
    for _ in 0..budget {
        let xi: Vec<Rat> = (0..s.n)
            .map(|_| crate::ratz(rng.gen_range(-10i64..=10)))
            .collect();
        if xi.iter().all(|x| x.is_zero()) {
            continue;
        }
        if is_non_characteristic(s, &xi)? {
            return Ok(xi);
        }
    }
    Err(JsError::GenericityBudgetExhausted(budget))
}

/// Restrict the family to the hyperplane ker(ξ): substitute out the normal
/// direction in every row functional and take kernels over n−1 variables.
///
/// Writing j for the pivot with ξ_j ≠ 0 and η for the surviving variables,
/// the substitution is dx_i ↦ η_i (i ≠ j), dx_j ↦ −(1/ξ_j)·Σ_{i≠j} ξ_i η_i,
/// which is exactly restriction of functionals along the hyperplane basis
/// e_i − (ξ_i/ξ_j)e_j.
pub fn restrict_symbol(f: &SymbolFamily, s: &JetSystem, xi: &[Rat]) -> Result<SymbolFamily, JsError> {
    if xi.iter().all(|x| x.is_zero()) {
        return Err(JsError::ZeroCovector);
    }
    if !is_non_characteristic(s, xi)? {
        return Err(JsError::CharacteristicCovector);
    }
    let n = f.n;
    let m = f.m;
    assert!(n >= 2, "restriction needs at least two variables");
    let j = (0..n).rev().find(|&i| !xi[i].is_zero()).unwrap();
    let survivors: Vec<usize> = (0..n).filter(|&i| i != j).collect();
    let mut images: Vec<Vec<Rat>> = vec![vec![Rat::zero(); n - 1]; n];
    for (pos, &i) in survivors.iter().enumerate() {
        images[i][pos] = num::traits::One::one();
        images[j][pos] = -(xi[i].clone() / xi[j].clone());
    }

    let mut components = Vec::with_capacity(f.qmax + 1);
    let mut rows = Vec::with_capacity(f.qmax + 1);
    for q in 0..=f.qmax {
        let sub = substitution_matrix(&images, n - 1, q);
        let src_len = sym_dim(n, q);
        let dst_len = sym_dim(n - 1, q);
        let ambient = m * dst_len;
        // block-diagonal action over the dependent index
        let block = RatMatrix::build(ambient, m * src_len, |r, c| {
            let (ra, rm) = (r / dst_len, r % dst_len);
            let (ca, cm) = (c / src_len, c % src_len);
            if ra == ca {
                sub.get(rm, cm).clone()
            } else {
                Rat::zero()
            }
        });
        let restricted_rows = f.rows[q].image_under(&block);
        let space = if restricted_rows.dim() == 0 {
            RatSubspace::full(ambient)
        } else {
            RatSubspace::from_spanning(ambient, restricted_rows.basis().kernel_basis())
        };
        components.push(SymbolComponent { q, space });
        rows.push(restricted_rows);
    }
    let dims: Vec<usize> = components.iter().map(|c| c.dim()).collect();
    let stabilization_degree = detect_stabilization(&dims, n - 1, f.order);
    Ok(SymbolFamily {
        name: format!("{}|restricted", f.name),
        n: n - 1,
        m,
        order: f.order,
        qmax: f.qmax,
        components,
        rows,
        stabilization_degree,
    })
}

/// Convenience for tests: the multidegree of a coordinate, used by the fast
/// δ path in the spencer module.
pub fn mono_of_index(n: usize, q: usize, idx: usize) -> (usize, MultiIndex) {
    let basis = MonomialBasis::new(n, q);
    (idx / basis.len(), basis.monos[idx % basis.len()].clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::jet::prolong_system;
    use crate::ratz;

    #[test]
    fn cr_symbol_dims() {
        let cr = catalog::make_system("cauchy_riemann", &[]).unwrap();
        assert_eq!(symbol_component(&cr, 1).dim(), 2);
        let fam = symbol_family(&cr, 5);
        assert_eq!(fam.dims(), vec![2, 2, 2, 2, 2, 2]);
    }

    #[test]
    fn laplace_symbol_dims() {
        let laplace = catalog::make_system("laplace", &[]).unwrap();
        assert_eq!(symbol_component(&laplace, 2).dim(), 2);
        let fam = symbol_family(&laplace, 5);
        assert_eq!(fam.dims(), vec![1, 2, 2, 2, 2, 2]);
    }

    #[test]
    fn closed_one_form_symbol_dims() {
        let s = catalog::make_system("closed_one_form", &[]).unwrap();
        let fam = symbol_family(&s, 4);
        assert_eq!(fam.dims(), vec![2, 3, 4, 5, 6]);
    }

    #[test]
    fn full_system_is_full() {
        let full = catalog::make_system("full", &[2, 1]).unwrap();
        let c = symbol_component(&full, 3);
        assert_eq!(c.dim(), 4);
        assert!(c.space.is_full());
    }

    #[test]
    fn prolong_matches_examples() {
        let laplace = catalog::make_system("laplace", &[]).unwrap();
        let g2 = symbol_component(&laplace, 2);
        assert_eq!(prolong_symbol(&g2, 2, 1).dim(), 2);

        let cr = catalog::make_system("cauchy_riemann", &[]).unwrap();
        let g1 = symbol_component(&cr, 1);
        assert_eq!(prolong_symbol(&g1, 2, 2).dim(), 2);

        let full = catalog::make_system("full", &[2, 1]).unwrap();
        let gq = symbol_component(&full, 2);
        let p = prolong_symbol(&gq, 2, 1);
        assert!(p.space.is_full());
        assert_eq!(p.dim(), 4);
    }

    #[test]
    fn prolongation_agrees_with_prolonged_system() {
        for name in ["cauchy_riemann", "laplace", "closed_one_form", "gradient"] {
            let s = catalog::make_system(name, &[]).unwrap();
            for q in s.order..=(s.order + 3) {
                let a = prolong_symbol(&symbol_component(&s, q), s.n, s.m);
                let b = symbol_component(&prolong_system(&s, 1), q + 1);
                assert_eq!(a.space, b.space, "{name} at q={q}");
            }
        }
    }

    #[test]
    fn characteristic_tests() {
        let laplace = catalog::make_system("laplace", &[]).unwrap();
        assert!(is_non_characteristic(&laplace, &[ratz(1), ratz(0)]).unwrap());

        let wave = catalog::make_system("wave", &[]).unwrap();
        assert!(!is_non_characteristic(&wave, &[ratz(1), ratz(1)]).unwrap());
        assert!(is_non_characteristic(&wave, &[ratz(1), ratz(2)]).unwrap());

        let cr = catalog::make_system("cauchy_riemann", &[]).unwrap();
        assert!(is_non_characteristic(&cr, &[ratz(0), ratz(1)]).unwrap());

        assert!(matches!(
            is_non_characteristic(&laplace, &[ratz(0), ratz(0)]),
            Err(JsError::ZeroCovector)
        ));
    }

    #[test]
    fn generic_covector_works() {
        let laplace = catalog::make_system("laplace", &[]).unwrap();
        let xi = generic_covector(&laplace, 0).unwrap();
        assert!(is_non_characteristic(&laplace, &xi).unwrap());

        let wave = catalog::make_system("wave", &[]).unwrap();
        let xi = generic_covector(&wave, 0).unwrap();
        assert!(xi[0].clone() + xi[1].clone() != ratz(0));
        assert!(xi[0].clone() - xi[1].clone() != ratz(0));

        // degenerate: both rows only involve the first dependent, so the
        // evaluated symbol never reaches rank 2
        let mut e1 = crate::jet::LinDiffPoly::new();
        e1.add_term(
            crate::jet::JetVariable {
                dep: 0,
                index: crate::multiindex::MultiIndex::unit(2, 0),
            },
            ratz(1),
        );
        let mut e2 = crate::jet::LinDiffPoly::new();
        e2.add_term(
            crate::jet::JetVariable {
                dep: 0,
                index: crate::multiindex::MultiIndex::unit(2, 1),
            },
            ratz(1),
        );
        let degenerate = crate::jet::JetSystem::new("degenerate", 2, 2, vec![e1, e2]);
        assert!(matches!(
            generic_covector(&degenerate, 0),
            Err(JsError::GenericityBudgetExhausted(_))
        ));
    }

    #[test]
    fn restriction_dims() {
        let cr = catalog::make_system("cauchy_riemann", &[]).unwrap();
        let fam = symbol_family(&cr, 5);
        let r = restrict_symbol(&fam, &cr, &[ratz(1), ratz(0)]).unwrap();
        assert_eq!(r.n, 1);
        assert_eq!(r.dims(), vec![2, 0, 0, 0, 0, 0]);

        let laplace = catalog::make_system("laplace", &[]).unwrap();
        let fam = symbol_family(&laplace, 5);
        let r = restrict_symbol(&fam, &laplace, &[ratz(1), ratz(2)]).unwrap();
        assert_eq!(r.dims(), vec![1, 1, 0, 0, 0, 0]);

        let full = catalog::make_system("full", &[2, 1]).unwrap();
        let fam = symbol_family(&full, 4);
        let r = restrict_symbol(&fam, &full, &[ratz(1), ratz(1)]).unwrap();
        assert!(r.components.iter().all(|c| c.space.is_full()));
    }

    #[test]
    fn restriction_rejects_characteristic_normal() {
        let wave = catalog::make_system("wave", &[]).unwrap();
        let fam = symbol_family(&wave, 4);
        assert!(matches!(
            restrict_symbol(&fam, &wave, &[ratz(1), ratz(1)]),
            Err(JsError::CharacteristicCovector)
        ));
    }

    #[test]
    fn stabilization_detected() {
        let cr = catalog::make_system("cauchy_riemann", &[]).unwrap();
        assert!(symbol_family(&cr, 5).stabilization_degree.is_some());
        let laplace = catalog::make_system("laplace", &[]).unwrap();
        let fam = symbol_family(&laplace, 6);
        assert!(fam.stabilization_degree.is_some());
        assert!(fam.require_stabilized().unwrap() >= laplace.order);
    }
}
