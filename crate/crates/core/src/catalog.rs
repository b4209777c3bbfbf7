//! Built-in systems used as oracles and CLI inputs, plus zero-jet
//! linearization of the nonlinear entries.



use crate::error::JsError;
use crate::jet::{JetSystem, JetVariable, LinDiffPoly};
use crate::multiindex::MultiIndex;
use crate::{rat, ratz, Rat};

fn jv(n: usize, dep: usize, derivs: &[usize]) -> JetVariable {
    let mut index = MultiIndex::zero(n);
    for &i in derivs {
        index = index.bump(i);
    }
    JetVariable { dep, index }
}

fn poly(n: usize, terms: &[(usize, &[usize], i64)]) -> LinDiffPoly {
    let mut p = LinDiffPoly::new();
    for &(dep, derivs, c) in terms {
        p.add_term(jv(n, dep, derivs), ratz(c));
    }
    p
}

pub const CATALOG_NAMES: &[&str] = &[
    "full",
    "cauchy_riemann",
    "laplace",
    "wave",
    "heat",
    "closed_one_form",
    "gradient",
    "de_rham_1forms",
    "flat_connection_linearized",
];

fn bad_params(name: &str, msg: &str) -> JsError {
    JsError::InvalidCatalogParams {
        name: name.to_string(),
        msg: msg.to_string(),
    }
}

/// Antisymmetrized first-order relations ∂_j h_i^α − ∂_i h_j^α = 0 over n
/// variables; unknowns h_i^α indexed dep = i·m + α.
fn closed_form_equations(n: usize, m: usize) -> Vec<LinDiffPoly> {
    let mut eqs = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            for alpha in 0..m {
                let mut p = LinDiffPoly::new();
                p.add_term(jv(n, i * m + alpha, &[j]), ratz(1));
                p.add_term(jv(n, j * m + alpha, &[i]), ratz(-1));
                eqs.push(p);
            }
        }
    }
    eqs
}

/// Build a named system. Parameter conventions:
/// full(n, m), laplace() or laplace(n), closed_one_form() or
/// closed_one_form(n), gradient() or gradient(n), de_rham_1forms() or
/// de_rham_1forms(n), flat_connection_linearized(n, m); the rest take no
/// parameters.
pub fn make_system(name: &str, params: &[usize]) -> Result<JetSystem, JsError> {
    match name {
        "full" => {
            if params.len() < 2 {
                return Err(bad_params(name, "expected (n, m)"));
            }
            let (n, m) = (params[0], params[1]);
            if n == 0 || m == 0 {
                return Err(bad_params(name, "n and m must be positive"));
            }
            Ok(JetSystem::new("full", n, m, vec![]))
        }
        "cauchy_riemann" => {
            let eqs = vec![
                poly(2, &[(0, &[0], 1), (1, &[1], -1)]),
                poly(2, &[(0, &[1], 1), (1, &[0], 1)]),
            ];
            Ok(JetSystem::new("cauchy_riemann", 2, 2, eqs))
        }
        "laplace" => {
            let n = match params {
                [] => 2,
                [n] => *n,
                _ => return Err(bad_params(name, "expected () or (n)")),
            };
            if n < 1 {
                return Err(bad_params(name, "n must be positive"));
            }
            let mut p = LinDiffPoly::new();
            for i in 0..n {
                p.add_term(jv(n, 0, &[i, i]), ratz(1));
            }
            Ok(JetSystem::new("laplace", n, 1, vec![p]))
        }
        "wave" => {
            let p = poly(2, &[(0, &[0, 0], 1), (0, &[1, 1], -1)]);
            Ok(JetSystem::new("wave", 2, 1, vec![p]))
        }
        "heat" => {
            let p = poly(2, &[(0, &[0], 1), (0, &[1, 1], -1)]);
            Ok(JetSystem::new("heat", 2, 1, vec![p]))
        }
        "closed_one_form" => {
            let n = match params {
                [] => 2,
                [n] => *n,
                _ => return Err(bad_params(name, "expected () or (n)")),
            };
            if n < 2 {
                return Err(bad_params(name, "n must be at least 2"));
            }
            Ok(JetSystem::new(
                "closed_one_form",
                n,
                n,
                closed_form_equations(n, 1),
            ))
        }
        "gradient" => {
            let n = match params {
                [] => 2,
                [n] => *n,
                _ => return Err(bad_params(name, "expected () or (n)")),
            };
            if n < 1 {
                return Err(bad_params(name, "n must be positive"));
            }
            let eqs = (0..n).map(|i| poly(n, &[(0, &[i], 1)])).collect();
            Ok(JetSystem::new("gradient", n, 1, eqs))
        }
        "de_rham_1forms" => {
            let n = match params {
                [] => 3,
                [n] => *n,
                _ => return Err(bad_params(name, "expected () or (n)")),
            };
            if n < 2 {
                return Err(bad_params(name, "n must be at least 2"));
            }
            Ok(JetSystem::new(
                "de_rham_1forms",
                n,
                n,
                closed_form_equations(n, 1),
            ))
        }
        "flat_connection_linearized" => {
            if params.len() != 2 {
                return Err(bad_params(name, "expected (n, m)"));
            }
            let (n, m) = (params[0], params[1]);
            if n < 2 || m == 0 {
                return Err(bad_params(name, "need n >= 2 and m >= 1"));
            }
            Ok(JetSystem::new(
                "flat_connection_linearized",
                n,
                n * m,
                closed_form_equations(n, m),
            ))
        }
        other => Err(JsError::UnknownCatalogEntry(other.to_string())),
    }
}

/// Product of jet variables with a rational coefficient; a sum of these is one
/// nonlinear equation.
#[derive(Debug, Clone)]
pub struct NonlinearPoly {
    pub terms: Vec<(Rat, Vec<JetVariable>)>,
}

#[derive(Debug, Clone)]
pub struct NonlinearSpec {
    pub name: String,
    pub n: usize,
    pub m: usize,
    pub equations: Vec<NonlinearPoly>,
}

/// Nonlinear catalog entries: the flat-connection (zero-curvature) system and
/// a Burgers-style equation.
pub fn make_nonlinear(name: &str, params: &[usize]) -> Result<NonlinearSpec, JsError> {
    match name {
        "flat_connection" => {
            let (n, m) = match params {
                [] => (2, 1),
                [n, m] => (*n, *m),
                _ => return Err(bad_params(name, "expected () or (n, m)")),
            };
            if n < 2 || m == 0 {
                return Err(bad_params(name, "need n >= 2 and m >= 1"));
            }
            // curvature components: linear antisymmetrized derivative plus a
            // quadratic transport term g·∂g that vanishes at the zero jet
            let mut equations = Vec::new();
            for i in 0..n {
                for j in (i + 1)..n {
                    for alpha in 0..m {
                        let mut terms = vec![
                            (ratz(1), vec![jv(n, i * m + alpha, &[j])]),
                            (ratz(-1), vec![jv(n, j * m + alpha, &[i])]),
                        ];
                        for beta in 0..m {
                            terms.push((
                                ratz(1),
                                vec![jv(n, i * m + beta, &[]), jv(n, j * m + alpha, &[i])],
                            ));
                            terms.push((
                                ratz(-1),
                                vec![jv(n, j * m + beta, &[]), jv(n, i * m + alpha, &[j])],
                            ));
                        }
                        equations.push(NonlinearPoly { terms });
                    }
                }
            }
            Ok(NonlinearSpec {
                name: "flat_connection".to_string(),
                n,
                m: n * m,
                equations,
            })
        }
        "burgers" => {
            // u_t + u·u_x − u_xx = 0 over (t, x)
            let eq = NonlinearPoly {
                terms: vec![
                    (ratz(1), vec![jv(2, 0, &[0])]),
                    (ratz(1), vec![jv(2, 0, &[]), jv(2, 0, &[1])]),
                    (ratz(-1), vec![jv(2, 0, &[1, 1])]),
                ],
            };
            Ok(NonlinearSpec {
                name: "burgers".to_string(),
                n: 2,
                m: 1,
                equations: vec![eq],
            })
        }
        other => Err(JsError::UnknownCatalogEntry(other.to_string())),
    }
}

/// Keep only the terms with a single jet-variable factor (everything of jet
/// degree ≥ 2 vanishes when evaluated at the zero jet).
pub fn linearize_at_zero_jet(spec: &NonlinearSpec) -> Result<JetSystem, JsError> {
    let mut eqs = Vec::new();
    for e in &spec.equations {
        let mut p = LinDiffPoly::new();
        for (c, factors) in &e.terms {
            match factors.len() {
                0 => p.constant += c.clone(),
                1 => p.add_term(factors[0].clone(), c.clone()),
                _ => {}
            }
        }
        if p.is_zero() {
            return Err(JsError::DegenerateLinearization);
        }
        eqs.push(p);
    }
    Ok(JetSystem::new(
        &format!("{}_linearized", spec.name),
        spec.n,
        spec.m,
        eqs,
    ))
}

/// Block sum of two systems over the same independent variables; the second
/// system's dependents are shifted past the first's.
pub fn disjoint_union(a: &JetSystem, b: &JetSystem, name: &str) -> JetSystem {
    assert_eq!(a.n, b.n, "independent variable counts must match");
    let mut eqs = a.equations.clone();
    for e in &b.equations {
        let mut p = LinDiffPoly::new();
        for (v, c) in e.terms() {
            p.add_term(
                JetVariable {
                    dep: v.dep + a.m,
                    index: v.index.clone(),
                },
                c.clone(),
            );
        }
        p.constant = e.constant.clone();
        eqs.push(p);
    }
    JetSystem::new(name, a.n, a.m + b.m, eqs)
}

/// Re-embed a block system into a larger dependent-variable space, placing
/// its dependents starting at `dep_offset`. Used to phrase coordinate
/// sub-blocks as sub-ideals of a union system.
pub fn embed_block(s: &JetSystem, m_total: usize, dep_offset: usize, name: &str) -> JetSystem {
    assert!(dep_offset + s.m <= m_total);
    let eqs = s
        .equations
        .iter()
        .map(|e| {
            let mut p = LinDiffPoly::new();
            for (v, c) in e.terms() {
                p.add_term(
                    JetVariable {
                        dep: v.dep + dep_offset,
                        index: v.index.clone(),
                    },
                    c.clone(),
                );
            }
            p.constant = e.constant.clone();
            p
        })
        .collect();
    JetSystem::new(name, s.n, m_total, eqs)
}

/// Deterministic pseudo-random linear system, used by property tests.
pub fn random_system(seed: u64, n_max: usize, m_max: usize, order_max: usize) -> JetSystem {
    use rand::Rng;
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=n_max);
    let m = rng.gen_range(1..=m_max);
    let order = rng.gen_range(1..=order_max);
    let neq = rng.gen_range(1..=3);
    let mut eqs = Vec::new();
    for _ in 0..neq {
        let mut p = LinDiffPoly::new();
        let nterms = rng.gen_range(1..=4);
        for _ in 0..nterms {
            let dep = rng.gen_range(0..m);
            let d = rng.gen_range(0..=order);
            let mut index = MultiIndex::zero(n);
            for _ in 0..d {
                index = index.bump(rng.gen_range(0..n));
            }
            let num = rng.gen_range(-5i64..=5);
            let den = rng.gen_range(1i64..=3);
            p.add_term(JetVariable { dep, index }, rat(num, den));
        }
        if !p.is_zero() {
            eqs.push(p);
        }
    }
    if eqs.is_empty() {
        eqs.push(poly(n, &[(0, &[0], 1)]));
    }
    JetSystem::new(&format!("random_{seed}"), n, m, eqs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_shapes() {
        let full = make_system("full", &[2, 3]).unwrap();
        assert_eq!((full.n, full.m, full.equations.len()), (2, 3, 0));

        let fc = make_system("flat_connection_linearized", &[2, 1]).unwrap();
        assert_eq!((fc.n, fc.m, fc.equations.len()), (2, 2, 1));

        let fc = make_system("flat_connection_linearized", &[3, 2]).unwrap();
        assert_eq!((fc.n, fc.m, fc.equations.len()), (3, 6, 6));

        assert!(matches!(
            make_system("nope", &[]),
            Err(JsError::UnknownCatalogEntry(_))
        ));
        assert!(matches!(
            make_system("full", &[2]),
            Err(JsError::InvalidCatalogParams { .. })
        ));
    }

    #[test]
    fn flat_connection_matches_closed_one_form_span() {
        let a = make_system("flat_connection_linearized", &[2, 1]).unwrap();
        let b = make_system("closed_one_form", &[]).unwrap();
        let sa = crate::jet::ideal_slice(&a, 2).span.clone();
        let sb = crate::jet::ideal_slice(&b, 2).span.clone();
        assert_eq!(sa, sb);
    }

    #[test]
    fn linearization_examples() {
        let fc = make_nonlinear("flat_connection", &[]).unwrap();
        let lin = linearize_at_zero_jet(&fc).unwrap();
        let oracle = make_system("flat_connection_linearized", &[2, 1]).unwrap();
        assert_eq!(lin.equations, oracle.equations);

        let burgers = make_nonlinear("burgers", &[]).unwrap();
        let lin = linearize_at_zero_jet(&burgers).unwrap();
        let heat = make_system("heat", &[]).unwrap();
        assert_eq!(lin.equations, heat.equations);
    }

    #[test]
    fn degenerate_linearization_rejected() {
        let spec = NonlinearSpec {
            name: "pure_quadratic".to_string(),
            n: 1,
            m: 1,
            equations: vec![NonlinearPoly {
                terms: vec![(ratz(1), vec![jv(1, 0, &[0]), jv(1, 0, &[0])])],
            }],
        };
        assert!(matches!(
            linearize_at_zero_jet(&spec),
            Err(JsError::DegenerateLinearization)
        ));
    }
}
