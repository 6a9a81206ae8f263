use std::fmt;
use std::sync::Arc;

use super::{eval_psi, PsiFamily};
use crate::error::{Error, Result};
use crate::formula::ParametrizedFormula;

/// Boolean combination of `Δ1` instances `δ1(x1; params)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BoolExpr {
    Const(bool),
    Atom { formula: usize, params: Vec<usize> },
    Not(Box<BoolExpr>),
    And(Vec<BoolExpr>),
    Or(Vec<BoolExpr>),
}

impl BoolExpr {
    pub fn atom(formula: usize, params: Vec<usize>) -> Self {
        BoolExpr::Atom { formula, params }
    }

    pub fn negate(self) -> Self {
        BoolExpr::Not(Box::new(self))
    }

    pub fn eval(&self, delta1: &[ParametrizedFormula], x1: usize) -> bool {
        match self {
            BoolExpr::Const(v) => *v,
            BoolExpr::Atom { formula, params } => delta1[*formula].eval(&[x1], params),
            BoolExpr::Not(e) => !e.eval(delta1, x1),
            BoolExpr::And(es) => es.iter().all(|e| e.eval(delta1, x1)),
            BoolExpr::Or(es) => es.iter().any(|e| e.eval(delta1, x1)),
        }
    }
}

type CertificateMap = dyn Fn(usize, usize, usize, usize) -> BoolExpr + Send + Sync;

/// A directed family `Δ1` of formulas `δ1(x1; y, y')` and, for each
/// `ψ_{δ,δ'}(x1; b, b')`, a boolean combination of `Δ1` instances claimed to
/// define it.
#[derive(Clone)]
pub struct DecompositionCertificate {
    delta1: Vec<ParametrizedFormula>,
    map: Arc<CertificateMap>,
}

impl fmt::Debug for DecompositionCertificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = self.delta1.iter().map(|d| d.name()).collect();
        f.debug_struct("DecompositionCertificate")
            .field("delta1", &names)
            .finish()
    }
}

impl DecompositionCertificate {
    /// `map(δ, δ', b, b')` gives the expression for `ψ_{δ,δ'}(x1; b, b')`,
    /// with `b, b'` carrier points.
    pub fn new<F>(delta1: Vec<ParametrizedFormula>, map: F) -> Self
    where
        F: Fn(usize, usize, usize, usize) -> BoolExpr + Send + Sync + 'static,
    {
        DecompositionCertificate {
            delta1,
            map: Arc::new(map),
        }
    }

    pub fn delta1(&self) -> &[ParametrizedFormula] {
        &self.delta1
    }

    pub fn expression(
        &self,
        delta: usize,
        delta_prime: usize,
        b: usize,
        b_prime: usize,
    ) -> BoolExpr {
        (self.map)(delta, delta_prime, b, b_prime)
    }

    /// Compares every certified expression against [`eval_psi`] at every
    /// carrier point and every pair from `b_set`. The first disagreement is
    /// returned as [`Error::CertificateMismatch`].
    pub fn validate(&self, family: &PsiFamily, b_set: &[usize]) -> Result<()> {
        let n = family.delta0().len();
        let carrier = family.carrier_size;
        for f in &self.delta1 {
            if f.object_arity() != 1 || f.object_domain() != carrier || f.param_arity() != 2 {
                return Err(Error::domain(format!(
                    "Δ1 formula {} must have the shape δ1(x1; y, y') over the carrier",
                    f.name()
                )));
            }
        }
        for &b in b_set {
            for &b_prime in b_set {
                for delta in 0..n {
                    for delta_prime in 0..n {
                        let expr = self.expression(delta, delta_prime, b, b_prime);
                        for a1 in 0..carrier {
                            let certified = expr.eval(&self.delta1, a1);
                            let evaluated = eval_psi(family, a1, b, b_prime, delta, delta_prime);
                            if certified != evaluated {
                                return Err(Error::CertificateMismatch {
                                    delta,
                                    delta_prime,
                                    b,
                                    b_prime,
                                    a1,
                                    certified,
                                    evaluated,
                                });
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// The dense-order instance on `0..n`:
///
/// * `Δ0 = {x0 < x1, x0 < y}`, both initial segments in `x0`;
/// * `Δ1 = {x1 ≥ y', x1 > y}`, both final segments in `x1`;
/// * `ψ_{δ,δ'}` compares the cut points of `δ'` and `δ`, which gives
///   `ψ_{0,0} = ⊤`, `ψ_{1,1}(b, b') = [b' ≤ b]`, `ψ_{0,1} = (x1 ≥ b')` and
///   `ψ_{1,0} = ¬(x1 > b)`.
pub fn dlo_instance(n: usize) -> (PsiFamily, DecompositionCertificate) {
    let delta0 = vec![
        ParametrizedFormula::new("x0<x1", (1, n), (2, n), |x, p| x[0] < p[0]),
        ParametrizedFormula::new("x0<y", (1, n), (2, n), |x, p| x[0] < p[1]),
    ];
    let family = PsiFamily::new(delta0, n).expect("DLO formulas have the right shape");
    let delta1 = vec![
        ParametrizedFormula::new("x1>=y'", (1, n), (2, n), |x, p| x[0] >= p[1]),
        ParametrizedFormula::new("x1>y", (1, n), (2, n), |x, p| x[0] > p[0]),
    ];
    let certificate =
        DecompositionCertificate::new(delta1, |delta, delta_prime, b, b_prime| {
            match (delta, delta_prime) {
                (0, 0) => BoolExpr::Const(true),
                (1, 1) => BoolExpr::Const(b_prime <= b),
                (0, 1) => BoolExpr::atom(0, vec![b, b_prime]),
                (1, 0) => BoolExpr::atom(1, vec![b, b_prime]).negate(),
                _ => unreachable!("Δ0 has two formulas"),
            }
        });
    (family, certificate)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dlo_certificate_validates() {
        for n in [1, 2, 5, 13] {
            let (family, cert) = dlo_instance(n);
            let b: Vec<usize> = (0..n).collect();
            cert.validate(&family, &b).unwrap();
        }
    }

    #[test]
    fn wrong_certificate_reports_a_witness() {
        let (family, good) = dlo_instance(6);
        let bad = DecompositionCertificate::new(good.delta1().to_vec(), |d, dp, b, bp| {
            if (d, dp) == (0, 1) {
                BoolExpr::atom(1, vec![bp, b])
            } else {
                dlo_instance(6).1.expression(d, dp, b, bp)
            }
        });
        match bad.validate(&family, &[1, 4]) {
            Err(Error::CertificateMismatch {
                delta, delta_prime, ..
            }) => {
                assert_eq!((delta, delta_prime), (0, 1));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn expressions() {
        let d1 = dlo_instance(4).1;
        let e = BoolExpr::Or(vec![BoolExpr::Const(false), BoolExpr::atom(0, vec![0, 2])]);
        assert!(e.eval(d1.delta1(), 3));
        assert!(!e.eval(d1.delta1(), 1));
        let both = BoolExpr::And(vec![BoolExpr::Const(true), BoolExpr::Const(false)]);
        assert!(!both.eval(d1.delta1(), 0));
    }
}
