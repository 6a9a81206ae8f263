use crate::forest::DirectedFamily;
use crate::formula::{Carrier, ParametrizedFormula};
use crate::setsystem::{SetFamily, Universe};

/// The finite linear order `0 < 1 < … < size-1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OrderModel {
    size: usize,
    seed: Option<u64>,
}

impl OrderModel {
    pub fn new(size: usize) -> Self {
        Self::with_seed(size, None)
    }

    pub fn with_seed(size: usize, seed: Option<u64>) -> Self {
        assert!(size >= 1, "an order model needs at least one point");
        OrderModel { size, seed }
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// `x < y` with `y` a carrier point.
    pub fn less_than(&self) -> ParametrizedFormula {
        ParametrizedFormula::new("lt", (1, self.size), (1, self.size), |x, y| x[0] < y[0])
    }

    /// Proper nonempty initial segments `{x : x < c}`, `c = 1..size`, in
    /// order of `c`; with `include_empty` the empty segment comes first.
    pub fn order_family(&self, include_empty: bool) -> DirectedFamily {
        let start = if include_empty { 0 } else { 1 };
        let universe = Universe::new(self.size).expect("order size validated");
        let sets = (start..self.size)
            .map(|c| universe.set_from(0..c).expect("segment inside universe"))
            .collect();
        DirectedFamily::trusted(SetFamily::new(universe, sets).expect("segments fit the universe"))
    }
}

impl Carrier for OrderModel {
    fn size(&self) -> usize {
        self.size
    }

    fn id(&self) -> String {
        format!("order-{}", self.size)
    }
}
