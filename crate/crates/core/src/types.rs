//! Realized type spaces `S_Φ(B)` over finite carriers.
//!
//! The type of an object tuple `a` over `B` is its sign vector
//! `(b, φ) ↦ φ(a; b)`. Only types realized by tuples of the carrier are
//! counted, so every count here is a lower bound for the abstract type
//! space and any upper bound on the abstract space also bounds it.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::formula::{Carrier, ParametrizedFormula, SignVector};

/// Default cap on formula evaluations for exhaustive enumeration.
pub const DEFAULT_EVAL_CAP: u64 = 1 << 26;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TypeSpaceOptions {
    /// Maximum number of formula evaluations.
    pub cap: u64,
    /// Seed for the sampling fallback. `None` makes an over-cap request fail.
    pub sampling_seed: Option<u64>,
}

impl Default for TypeSpaceOptions {
    fn default() -> Self {
        TypeSpaceOptions {
            cap: DEFAULT_EVAL_CAP,
            sampling_seed: None,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TypeSpace {
    pub params: Vec<Vec<usize>>,
    pub formula_names: Vec<String>,
    pub object_arity: usize,
    /// Distinct realized sign vectors, sorted.
    #[serde(serialize_with = "serialize_vectors")]
    pub vectors: Vec<SignVector>,
    /// `false` when the vectors come from sampled tuples and only bound the
    /// realized count from below.
    pub exhaustive: bool,
    pub tuples_examined: u64,
}

pub(crate) fn serialize_vectors<S: serde::Serializer>(
    v: &[SignVector],
    s: S,
) -> Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|x| x.to_string()))
}

impl TypeSpace {
    pub fn count(&self) -> usize {
        self.vectors.len()
    }

    pub fn contains(&self, v: &SignVector) -> bool {
        self.vectors.binary_search(v).is_ok()
    }
}

/// Sign vector of one object tuple over `params × formulas`.
pub fn sign_vector(
    formulas: &[ParametrizedFormula],
    params: &[Vec<usize>],
    objects: &[usize],
) -> SignVector {
    let mut v = SignVector::zeros(params.len() * formulas.len());
    for (bi, b) in params.iter().enumerate() {
        for (fi, f) in formulas.iter().enumerate() {
            if f.eval(objects, b) {
                v.set(bi * formulas.len() + fi, true);
            }
        }
    }
    v
}

fn decode_tuple(mut index: u64, base: u64, out: &mut [usize]) {
    for slot in out.iter_mut().rev() {
        *slot = (index % base) as usize;
        index /= base;
    }
}

fn validate(
    formulas: &[ParametrizedFormula],
    params: &[Vec<usize>],
    carrier_size: usize,
    object_arity: usize,
) -> Result<()> {
    if object_arity == 0 {
        return Err(Error::domain("object arity must be at least 1"));
    }
    for f in formulas {
        if f.object_arity() != object_arity {
            return Err(Error::domain(format!(
                "formula {} has object arity {}, expected {object_arity}",
                f.name(),
                f.object_arity()
            )));
        }
        if f.object_domain() != carrier_size {
            return Err(Error::domain(format!(
                "formula {} ranges over {} objects but the carrier has {carrier_size}",
                f.name(),
                f.object_domain()
            )));
        }
        for b in params {
            if b.len() != f.param_arity() || b.iter().any(|&c| c >= f.param_domain()) {
                return Err(Error::domain(format!(
                    "parameter tuple {b:?} is not valid for formula {}",
                    f.name()
                )));
            }
        }
    }
    Ok(())
}

/// Realized `S_Φ(B)` over all `k`-tuples of the carrier.
///
/// Exhaustive when `|carrier|^k · |B| · |Φ|` fits under `options.cap`.
/// Otherwise, with a sampling seed, examines `cap / (|B|·|Φ|)` uniformly
/// drawn tuples and flags the result as a lower bound; without one, fails
/// with [`Error::Resource`].
pub fn type_space(
    formulas: &[ParametrizedFormula],
    params: &[Vec<usize>],
    carrier: &dyn Carrier,
    object_arity: usize,
    options: TypeSpaceOptions,
) -> Result<TypeSpace> {
    let n = carrier.size();
    validate(formulas, params, n, object_arity)?;
    let per_tuple = (params.len() * formulas.len()).max(1) as u128;
    let tuples = (n as u128)
        .checked_pow(object_arity as u32)
        .unwrap_or(u128::MAX);
    let work = tuples.saturating_mul(per_tuple);

    let vectors: HashSet<SignVector>;
    let exhaustive;
    let examined;
    if work <= options.cap as u128 {
        let tuples = tuples as u64;
        vectors = (0..tuples)
            .into_par_iter()
            .fold(
                || (HashSet::new(), vec![0usize; object_arity]),
                |(mut set, mut buf), idx| {
                    decode_tuple(idx, n as u64, &mut buf);
                    set.insert(sign_vector(formulas, params, &buf));
                    (set, buf)
                },
            )
            .map(|(set, _)| set)
            .reduce(HashSet::new, |mut a, b| {
                a.extend(b);
                a
            });
        exhaustive = true;
        examined = tuples;
    } else if let Some(seed) = options.sampling_seed {
        let draws = (options.cap as u128 / per_tuple).max(1) as usize;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let samples: Vec<Vec<usize>> = (0..draws)
            .map(|_| (0..object_arity).map(|_| rng.gen_range(0..n)).collect())
            .collect();
        vectors = samples
            .par_iter()
            .map(|t| sign_vector(formulas, params, t))
            .collect();
        exhaustive = false;
        examined = draws as u64;
    } else {
        return Err(Error::resource(format!(
            "type space needs {work} evaluations, above the cap of {}; \
             enable sampling for a flagged lower bound",
            options.cap
        )));
    }

    let mut vectors: Vec<SignVector> = vectors.into_iter().collect();
    vectors.sort_unstable();
    Ok(TypeSpace {
        params: params.to_vec(),
        formula_names: formulas.iter().map(|f| f.name().to_string()).collect(),
        object_arity,
        vectors,
        exhaustive,
        tuples_examined: examined,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::equality_witness;

    struct Points(usize);

    impl Carrier for Points {
        fn size(&self) -> usize {
            self.0
        }
        fn id(&self) -> String {
            format!("points-{}", self.0)
        }
    }

    fn lt(n: usize) -> ParametrizedFormula {
        ParametrizedFormula::new("lt", (1, n), (1, n), |x, y| x[0] < y[0])
    }

    #[test]
    fn order_example() {
        let ts = type_space(
            &[lt(3)],
            &[vec![1], vec![2]],
            &Points(3),
            1,
            Default::default(),
        )
        .unwrap();
        let mut got: Vec<String> = ts.vectors.iter().map(|v| v.to_string()).collect();
        got.sort();
        assert_eq!(got, vec!["00", "01", "11"]);
        assert!(ts.exhaustive);
    }

    #[test]
    fn empty_parameter_set_has_one_type() {
        let ts = type_space(&[lt(3)], &[], &Points(3), 1, Default::default()).unwrap();
        assert_eq!(ts.count(), 1);
    }

    #[test]
    fn equality_witness_example() {
        let phi = equality_witness(2, 6);
        let b: Vec<Vec<usize>> = (0..4).map(|i| vec![i]).collect();
        let ts = type_space(&[phi], &b, &Points(6), 2, Default::default()).unwrap();
        assert_eq!(ts.count(), 1 + 4 + 6);
    }

    #[test]
    fn duplicated_formulas_do_not_change_the_count() {
        let b = vec![vec![0], vec![2], vec![4]];
        let one = type_space(&[lt(6)], &b, &Points(6), 1, Default::default()).unwrap();
        let two = type_space(&[lt(6), lt(6)], &b, &Points(6), 1, Default::default()).unwrap();
        assert_eq!(one.count(), two.count());
    }

    #[test]
    fn cap_and_sampling() {
        let phi = equality_witness(2, 40);
        let b: Vec<Vec<usize>> = (0..10).map(|i| vec![i]).collect();
        let tight = TypeSpaceOptions {
            cap: 1000,
            sampling_seed: None,
        };
        assert!(matches!(
            type_space(std::slice::from_ref(&phi), &b, &Points(40), 2, tight),
            Err(Error::Resource(_))
        ));
        let sampled = TypeSpaceOptions {
            cap: 1000,
            sampling_seed: Some(3),
        };
        let lower = type_space(std::slice::from_ref(&phi), &b, &Points(40), 2, sampled).unwrap();
        let full = type_space(&[phi], &b, &Points(40), 2, Default::default()).unwrap();
        assert!(!lower.exhaustive);
        assert_eq!(lower.tuples_examined, 100);
        assert!(lower.count() <= full.count());
        assert!(lower.vectors.iter().all(|v| full.contains(v)));
    }

    #[test]
    fn rejects_mismatched_formulas() {
        let bad = type_space(&[lt(4)], &[vec![1]], &Points(3), 1, Default::default());
        assert!(matches!(bad, Err(Error::Domain(_))));
        let bad = type_space(&[lt(3)], &[vec![7]], &Points(3), 1, Default::default());
        assert!(matches!(bad, Err(Error::Domain(_))));
    }
}
