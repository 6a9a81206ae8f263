//! Partitioned formulas `φ(x; y)` evaluated on finite carriers, and the sign
//! vectors they induce.

use std::fmt;
use std::sync::Arc;

use fixedbitset::FixedBitSet;

/// A finite structure whose points are `0..size()`.
pub trait Carrier: Send + Sync {
    fn size(&self) -> usize;

    /// Short identifier used in reports.
    fn id(&self) -> String;
}

type EvalFn = dyn Fn(&[usize], &[usize]) -> bool + Send + Sync;

/// A partitioned formula `φ(x; y)`: a total predicate on
/// (object tuple, parameter tuple).
///
/// Object coordinates range over `0..object_domain`, parameter coordinates
/// over `0..param_domain`. Cloning is cheap.
#[derive(Clone)]
pub struct ParametrizedFormula {
    name: String,
    object_arity: usize,
    param_arity: usize,
    object_domain: usize,
    param_domain: usize,
    eval: Arc<EvalFn>,
}

impl ParametrizedFormula {
    pub fn new<F>(
        name: impl Into<String>,
        (object_arity, object_domain): (usize, usize),
        (param_arity, param_domain): (usize, usize),
        eval: F,
    ) -> Self
    where
        F: Fn(&[usize], &[usize]) -> bool + Send + Sync + 'static,
    {
        assert!(object_arity >= 1, "object arity must be at least 1");
        assert!(param_arity >= 1, "parameter arity must be at least 1");
        ParametrizedFormula {
            name: name.into(),
            object_arity,
            param_arity,
            object_domain,
            param_domain,
            eval: Arc::new(eval),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn object_arity(&self) -> usize {
        self.object_arity
    }

    pub fn param_arity(&self) -> usize {
        self.param_arity
    }

    pub fn object_domain(&self) -> usize {
        self.object_domain
    }

    pub fn param_domain(&self) -> usize {
        self.param_domain
    }

    #[inline]
    pub fn eval(&self, objects: &[usize], params: &[usize]) -> bool {
        debug_assert_eq!(objects.len(), self.object_arity);
        debug_assert_eq!(params.len(), self.param_arity);
        (self.eval)(objects, params)
    }

    /// Extent `{x : φ(x; params)}` of a formula with a single object variable.
    pub fn extent(&self, params: &[usize]) -> FixedBitSet {
        assert_eq!(
            self.object_arity, 1,
            "extent needs a single object variable"
        );
        let mut s = FixedBitSet::with_capacity(self.object_domain);
        for x in 0..self.object_domain {
            if self.eval(&[x], params) {
                s.insert(x);
            }
        }
        s
    }

    /// The same relation with object and parameter roles exchanged:
    /// `φ^opp(y; x) := φ(x; y)`.
    pub fn opposite(&self) -> ParametrizedFormula {
        let inner = self.eval.clone();
        ParametrizedFormula {
            name: format!("{}^opp", self.name),
            object_arity: self.param_arity,
            param_arity: self.object_arity,
            object_domain: self.param_domain,
            param_domain: self.object_domain,
            eval: Arc::new(move |objects: &[usize], params: &[usize]| inner(params, objects)),
        }
    }
}

impl fmt::Debug for ParametrizedFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ParametrizedFormula")
            .field("name", &self.name)
            .field("object_arity", &self.object_arity)
            .field("param_arity", &self.param_arity)
            .field("object_domain", &self.object_domain)
            .field("param_domain", &self.param_domain)
            .finish()
    }
}

/// `φ(x_0, …, x_{k-1}; y) := ⋁ x_i = y` over a carrier of `size` points.
pub fn equality_witness(arity: usize, size: usize) -> ParametrizedFormula {
    ParametrizedFormula::new(
        format!("eq-witness-{arity}"),
        (arity, size),
        (1, size),
        |x, y| x.contains(&y[0]),
    )
}

/// A `{0,1}`-valued function on a fixed index set, stored densely.
///
/// Index layout for a type over parameters `B` and formulas `Φ` is
/// `b * |Φ| + φ`, which coincides with the raw node layout of the
/// quasi-forest on `B × Φ`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SignVector(FixedBitSet);

impl SignVector {
    pub fn zeros(len: usize) -> Self {
        SignVector(FixedBitSet::with_capacity(len))
    }

    pub fn from_bits(bits: FixedBitSet) -> Self {
        SignVector(bits)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.len() == 0
    }

    pub fn get(&self, i: usize) -> bool {
        self.0.contains(i)
    }

    pub fn set(&mut self, i: usize, value: bool) {
        self.0.set(i, value)
    }

    pub fn bits(&self) -> &FixedBitSet {
        &self.0
    }

    /// Sets every entry to 0.
    pub fn clear(&mut self) {
        self.0.clear()
    }

    pub fn count_ones(&self) -> usize {
        self.0.count_ones(..)
    }
}

impl fmt::Display for SignVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.0.len() {
            f.write_str(if self.0.contains(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for SignVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SignVector({self})")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn opposite_swaps_roles() {
        let lt = ParametrizedFormula::new("lt", (1, 5), (1, 5), |x, y| x[0] < y[0]);
        let opp = lt.opposite();
        assert_eq!(opp.object_arity(), 1);
        assert!(opp.eval(&[3], &[1]));
        assert!(!opp.eval(&[1], &[3]));
        assert_eq!(opp.opposite().name(), "lt^opp^opp");
    }

    #[test]
    fn extent_scans_the_domain() {
        let lt = ParametrizedFormula::new("lt", (1, 5), (1, 5), |x, y| x[0] < y[0]);
        assert_eq!(lt.extent(&[3]).ones().collect::<Vec<_>>(), vec![0, 1, 2]);
        assert_eq!(lt.extent(&[0]).count_ones(..), 0);
    }

    #[test]
    fn sign_vector_display() {
        let mut v = SignVector::zeros(3);
        v.set(1, true);
        assert_eq!(v.to_string(), "010");
        assert_eq!(v.count_ones(), 1);
    }
}
