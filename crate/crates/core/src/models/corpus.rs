use std::fmt;
use std::sync::Arc;

use fixedbitset::FixedBitSet;

use super::UltrametricModel;
use crate::error::{Error, Result};
use crate::formula::ParametrizedFormula;

/// Kinds accepted by [`builtin_formulas`] besides parametrized spellings
/// like `twin-ball-2` or `boolean-mix-3-1`.
pub const CORPUS_KINDS: &[&str] = &["lca-ball", "twin-ball", "boolean-mix", "corpus"];

/// Certified shape of one instance: the union of the `positive` balls minus
/// the union of the `negative` balls, each ball named by its tree node.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BallDecomposition {
    pub positive: Vec<usize>,
    pub negative: Vec<usize>,
}

type CertificateFn = dyn Fn(&[usize]) -> BallDecomposition + Send + Sync;

/// A formula `φ(x; y0, y1)` over the leaves of an ultrametric model whose
/// positive part is a union of at most `max_components` balls, together with
/// a certificate producing that decomposition for each instance.
#[derive(Clone)]
pub struct UBallFormula {
    base: ParametrizedFormula,
    max_components: usize,
    certificate: Arc<CertificateFn>,
}

impl fmt::Debug for UBallFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("UBallFormula")
            .field("base", &self.base)
            .field("max_components", &self.max_components)
            .finish()
    }
}

impl UBallFormula {
    pub fn base(&self) -> &ParametrizedFormula {
        &self.base
    }

    pub fn name(&self) -> &str {
        self.base.name()
    }

    pub fn max_components(&self) -> usize {
        self.max_components
    }

    pub fn certificate(&self, params: &[usize]) -> BallDecomposition {
        (self.certificate)(params)
    }

    /// Whether the instance at `params` has the extent its certificate
    /// describes, with at most `max_components` positive balls.
    pub fn verify_instance(&self, model: &UltrametricModel, params: &[usize]) -> bool {
        let cert = self.certificate(params);
        if cert.positive.len() > self.max_components {
            return false;
        }
        let mut expected = FixedBitSet::with_capacity(model.leaf_count());
        for &v in &cert.positive {
            expected.union_with(&model.ball(v));
        }
        for &v in &cert.negative {
            expected.difference_with(&model.ball(v));
        }
        self.base.extent(params) == expected
    }
}

fn ancestor_table(model: &UltrametricModel, k: usize) -> Arc<Vec<usize>> {
    Arc::new(
        (0..model.leaf_count())
            .map(|x| model.ancestor(model.leaf_node(x), k))
            .collect(),
    )
}

fn lca_ball(model: &UltrametricModel) -> UBallFormula {
    let n = model.leaf_count();
    let m = Arc::new(model.clone());
    let eval_model = m.clone();
    let base = ParametrizedFormula::new("lca-ball", (1, n), (2, n), move |x, y| {
        let v = eval_model.lca(eval_model.leaf_node(y[0]), eval_model.leaf_node(y[1]));
        eval_model.in_ball(x[0], v)
    });
    UBallFormula {
        base,
        max_components: 1,
        certificate: Arc::new(move |y| BallDecomposition {
            positive: vec![m.lca(m.leaf_node(y[0]), m.leaf_node(y[1]))],
            negative: Vec::new(),
        }),
    }
}

fn twin_ball(model: &UltrametricModel, k: usize) -> UBallFormula {
    let n = model.leaf_count();
    let m = Arc::new(model.clone());
    let anc = ancestor_table(model, k);
    let (eval_model, eval_anc) = (m.clone(), anc.clone());
    let base = ParametrizedFormula::new(format!("twin-ball-{k}"), (1, n), (2, n), move |x, y| {
        eval_model.in_ball(x[0], eval_anc[y[0]]) || eval_model.in_ball(x[0], eval_anc[y[1]])
    });
    UBallFormula {
        base,
        max_components: 2,
        certificate: Arc::new(move |y| {
            let (u, v) = (anc[y[0]], anc[y[1]]);
            let w = m.lca(u, v);
            let positive = if m.is_ancestor(u, v) {
                vec![u]
            } else if m.is_ancestor(v, u) {
                vec![v]
            } else if m.ball_size(w) == m.ball_size(u) + m.ball_size(v) {
                // the two balls pack their common ancestor
                vec![w]
            } else {
                vec![u, v]
            };
            BallDecomposition {
                positive,
                negative: Vec::new(),
            }
        }),
    }
}

fn boolean_mix(model: &UltrametricModel, k: usize, j: usize) -> UBallFormula {
    let n = model.leaf_count();
    let m = Arc::new(model.clone());
    let (pos, neg) = (ancestor_table(model, k), ancestor_table(model, j));
    let (cert_pos, cert_neg) = (pos.clone(), neg.clone());
    let base = ParametrizedFormula::new(
        format!("boolean-mix-{k}-{j}"),
        (1, n),
        (2, n),
        move |x, y| m.in_ball(x[0], pos[y[0]]) && !m.in_ball(x[0], neg[y[1]]),
    );
    UBallFormula {
        base,
        max_components: 1,
        certificate: Arc::new(move |y| BallDecomposition {
            positive: vec![cert_pos[y[0]]],
            negative: vec![cert_neg[y[1]]],
        }),
    }
}

fn numeric_suffix(rest: &str, kind: &str) -> Result<Vec<usize>> {
    rest.split('-')
        .map(|p| {
            p.parse::<usize>()
                .map_err(|_| Error::domain(format!("unknown formula kind {kind:?}")))
        })
        .collect()
}

/// The u-ball corpus over the leaves of `model`, parameters `(y0, y1)`
/// ranging over leaves:
///
/// * `lca-ball`: `x ∈ ball(lca(y0, y1))`, one ball.
/// * `twin-ball-k` (default `k = 1`): `x ∈ ball_k(y0) ∪ ball_k(y1)`, where
///   `ball_k(b)` is the ball of the ancestor `k` levels above leaf `b`
///   (clamped at the root); two balls, certified as one when they are
///   nested or together fill their lowest common ancestor.
/// * `boolean-mix-k-j` (default `k = 2, j = 1`):
///   `x ∈ ball_k(y0) ∧ ¬(x ∈ ball_j(y1))`.
/// * `corpus`: all three with default levels.
pub fn builtin_formulas(model: &UltrametricModel, kind: &str) -> Result<Vec<UBallFormula>> {
    let unknown = || Error::domain(format!("unknown formula kind {kind:?}"));
    match kind {
        "corpus" => Ok(vec![
            lca_ball(model),
            twin_ball(model, 1),
            boolean_mix(model, 2, 1),
        ]),
        "lca-ball" => Ok(vec![lca_ball(model)]),
        "twin-ball" => Ok(vec![twin_ball(model, 1)]),
        "boolean-mix" => Ok(vec![boolean_mix(model, 2, 1)]),
        _ => {
            if let Some(rest) = kind.strip_prefix("twin-ball-") {
                match numeric_suffix(rest, kind)?.as_slice() {
                    [k] => Ok(vec![twin_ball(model, *k)]),
                    _ => Err(unknown()),
                }
            } else if let Some(rest) = kind.strip_prefix("boolean-mix-") {
                match numeric_suffix(rest, kind)?.as_slice() {
                    [k, j] => Ok(vec![boolean_mix(model, *k, *j)]),
                    _ => Err(unknown()),
                }
            } else {
                Err(unknown())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forest::{components, QuasiForest};
    use crate::models::random_ultrametric;

    #[test]
    fn lca_ball_on_two_leaves() {
        let m = random_ultrametric(2, 2, 0).unwrap();
        let f = &builtin_formulas(&m, "lca-ball").unwrap()[0];
        assert_eq!(
            f.base().extent(&[0, 1]).ones().collect::<Vec<_>>(),
            vec![0, 1]
        );
        assert!(f.verify_instance(&m, &[0, 1]));
    }

    #[test]
    fn twin_ball_zero_duplicates_merge() {
        let m = random_ultrametric(10, 3, 4).unwrap();
        let f = &builtin_formulas(&m, "twin-ball-0").unwrap()[0];
        for b in 0..10 {
            assert_eq!(f.base().extent(&[b, b]).ones().collect::<Vec<_>>(), vec![b]);
            assert_eq!(f.certificate(&[b, b]).positive.len(), 1);
            let pool = m.ball_family().sets().to_vec();
            assert_eq!(
                components(&f.base().extent(&[b, b]), &pool).unwrap().len(),
                1
            );
        }
    }

    #[test]
    fn certificates_hold_and_match_components() {
        for seed in 0..6 {
            let m = random_ultrametric(16, 3, seed).unwrap();
            let pool = m.ball_family().sets().to_vec();
            for kind in [
                "lca-ball",
                "twin-ball-0",
                "twin-ball-1",
                "twin-ball-2",
                "boolean-mix",
            ] {
                let f = &builtin_formulas(&m, kind).unwrap()[0];
                for y0 in 0..16 {
                    for y1 in 0..16 {
                        assert!(f.verify_instance(&m, &[y0, y1]), "{kind} {y0} {y1}");
                        let cert = f.certificate(&[y0, y1]);
                        if !cert.negative.is_empty() {
                            continue;
                        }
                        let mut want: Vec<FixedBitSet> =
                            cert.positive.iter().map(|&v| m.ball(v)).collect();
                        let mut got = components(&f.base().extent(&[y0, y1]), &pool).unwrap();
                        want.sort_by_key(|s| s.ones().collect::<Vec<_>>());
                        got.sort_by_key(|s| s.ones().collect::<Vec<_>>());
                        assert_eq!(got, want, "{kind} {y0} {y1}");
                    }
                }
            }
        }
    }

    #[test]
    fn lca_ball_instances_are_directed() {
        let m = random_ultrametric(12, 3, 9).unwrap();
        let f = &builtin_formulas(&m, "lca-ball").unwrap()[0];
        let mut extents = Vec::new();
        for y0 in 0..12 {
            for y1 in 0..12 {
                extents.push(f.base().extent(&[y0, y1]));
            }
        }
        assert!(crate::forest::first_crossing(&extents).is_none());
        let labels = (0..extents.len())
            .map(|i| crate::forest::NodeLabel {
                param: i,
                formula: 0,
            })
            .collect();
        assert!(QuasiForest::from_extents(labels, extents).is_ok());
    }

    #[test]
    fn kinds() {
        let m = random_ultrametric(6, 2, 1).unwrap();
        assert_eq!(builtin_formulas(&m, "corpus").unwrap().len(), 3);
        assert_eq!(
            builtin_formulas(&m, "boolean-mix-3-0").unwrap()[0].name(),
            "boolean-mix-3-0"
        );
        for bad in ["ball", "twin-ball-x", "boolean-mix-1", "twin-ball-1-2", ""] {
            assert!(
                matches!(builtin_formulas(&m, bad), Err(Error::Domain(_))),
                "{bad}"
            );
        }
    }
}
