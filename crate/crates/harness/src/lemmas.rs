//! Seeded property suites over random instances. Each suite returns a
//! [`LemmaResult`] with its trial count and the number of failing trials.

use std::collections::BTreeSet;

use fixedbitset::FixedBitSet;
use itertools::Itertools;
use laminar_core::forest::{
    build_forest, check_convexity, check_directed, components, convex_order, linear_bound_check,
    SiblingOrders, TypeTree,
};
use laminar_core::fullvcmin::{determination_check, dlo_instance, incremental_count_check};
use laminar_core::models::{random_ultrametric, UltrametricModel};
use laminar_core::setsystem::sauer_check;
use laminar_core::{ParametrizedFormula, SetFamily};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::{derive_seed, HarnessError};

pub const LINEAR_TYPE_BOUND: &str = "linear-type-bound";
pub const CONVEXITY: &str = "convexity";
pub const SUM_DIST: &str = "sum-dist";
pub const SAUER_SHELAH: &str = "sauer-shelah";
pub const COMPONENTS: &str = "components";
pub const DETERMINATION: &str = "forest-type-determination";
pub const INCREMENTAL_COUNT: &str = "incremental-count";

/// Suites in report order with their default trial counts.
pub const DEFAULT_TRIALS: &[(&str, usize)] = &[
    (LINEAR_TYPE_BOUND, 500),
    (CONVEXITY, 1000),
    (SUM_DIST, 1000),
    (SAUER_SHELAH, 1000),
    (COMPONENTS, 500),
    (DETERMINATION, 300),
    (INCREMENTAL_COUNT, 3),
];

/// Parameter-set sizes exercised by the incremental-count suite; its
/// trial count is per size.
pub const INCREMENTAL_B_SIZES: [usize; 3] = [4, 8, 16];

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LemmaResult {
    pub lemma: String,
    pub trials: usize,
    pub failures: usize,
    /// Description of the first failing trial.
    pub first_failure: Option<String>,
}

impl LemmaResult {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }

    fn collect(lemma: &str, outcomes: Vec<Result<(), String>>) -> Self {
        let trials = outcomes.len();
        let failures: Vec<String> = outcomes.into_iter().filter_map(|r| r.err()).collect();
        LemmaResult {
            lemma: lemma.to_string(),
            trials,
            failures: failures.len(),
            first_failure: failures.into_iter().next(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LemmaReport {
    pub seed: u64,
    pub lemmas: Vec<LemmaResult>,
    pub pass: bool,
}

fn lemma_tag(lemma: &str) -> u64 {
    lemma
        .bytes()
        .fold(0u64, |h, b| h.wrapping_mul(131).wrapping_add(b as u64))
}

fn trial_rng(seed: u64, lemma: &str, trial: usize) -> (u64, ChaCha8Rng) {
    let s = derive_seed(seed, &[lemma_tag(lemma), trial as u64]);
    (s, ChaCha8Rng::seed_from_u64(s))
}

fn run_trials<F>(lemma: &str, seed: u64, trials: usize, f: F) -> LemmaResult
where
    F: Fn(u64, &mut ChaCha8Rng) -> Result<(), String> + Sync,
{
    let outcomes = (0..trials)
        .into_par_iter()
        .map(|t| {
            let (s, mut rng) = trial_rng(seed, lemma, t);
            f(s, &mut rng).map_err(|e| format!("trial {t}: {e}"))
        })
        .collect();
    LemmaResult::collect(lemma, outcomes)
}

fn random_model(rng: &mut ChaCha8Rng, seed: u64, max_leaves: usize) -> UltrametricModel {
    let leaves = rng.gen_range(2..=max_leaves);
    let branching = rng.gen_range(2..=4);
    random_ultrametric(leaves, branching, seed).expect("parameters are feasible")
}

/// Ball formulas `x ∈ ball(ancestor(v, j))` for `j` in a random nonempty
/// subset of `0..3`; any selection is directed.
fn random_delta(
    rng: &mut ChaCha8Rng,
    model: &UltrametricModel,
    max: usize,
) -> Vec<ParametrizedFormula> {
    let mut levels: Vec<usize> = (0..3).collect();
    levels.shuffle(rng);
    let k = rng.gen_range(1..=max.clamp(1, 3));
    levels[..k]
        .iter()
        .map(|&j| model.ball_formula_at(j))
        .collect()
}

/// Random forest `F(C, Δ)` with at most `max_nodes` raw nodes; parameters
/// are drawn with replacement so extensional duplicates occur.
fn random_forest_instance(
    rng: &mut ChaCha8Rng,
    seed: u64,
    max_nodes: usize,
) -> (UltrametricModel, Vec<Vec<usize>>, Vec<ParametrizedFormula>) {
    let model = random_model(rng, seed, 16);
    let delta = random_delta(rng, &model, max_nodes);
    let c_len = rng.gen_range(1..=max_nodes / delta.len());
    let params = (0..c_len)
        .map(|_| vec![rng.gen_range(0..model.node_count())])
        .collect();
    (model, params, delta)
}

/// Directed ball families and `|S_Δ(C)| ≤ |Δ|·|C| + 1` on ultrametric
/// models with at most 64 leaves and `|C| ≤ 32`.
pub fn linear_type_bound(seed: u64, trials: usize) -> LemmaResult {
    run_trials(LINEAR_TYPE_BOUND, seed, trials, |s, rng| {
        let model = random_model(rng, s, 64);
        if let Err(c) = check_directed(model.ball_family().into_base()) {
            return Err(format!("ball family not directed: {c}"));
        }
        let delta = random_delta(rng, &model, 3);
        let c_len = rng.gen_range(0..=32);
        let params: Vec<Vec<usize>> = (0..c_len)
            .map(|_| vec![rng.gen_range(0..model.node_count())])
            .collect();
        let lb = linear_bound_check(&params, &delta, &model).map_err(|e| e.to_string())?;
        if lb.ok {
            Ok(())
        } else {
            Err(format!(
                "{} realized types exceed the bound {}",
                lb.realized, lb.bound
            ))
        }
    })
}

/// Every `χ(t)` is an interval of the default convex order, on random
/// forests with at most 12 raw nodes.
pub fn convexity(seed: u64, trials: usize) -> LemmaResult {
    run_trials(CONVEXITY, seed, trials, |s, rng| {
        let (model, params, delta) = random_forest_instance(rng, s, 12);
        let forest = build_forest(&params, &delta, &model).map_err(|e| e.to_string())?;
        let tree = TypeTree::new(&forest);
        let order = convex_order(&tree, &SiblingOrders::default()).map_err(|e| e.to_string())?;
        match check_convexity(&tree, &order) {
            Ok(true) => Ok(()),
            Ok(false) => Err(format!("order {:?} is not convex", order.sequence())),
            Err(e) => Err(e.to_string()),
        }
    })
}

/// `Σ dist ≤ 2|F| = 2|C||Δ|` along the full convex-order enumeration of
/// the type tree, on the same forests as [`convexity`].
pub fn sum_dist(seed: u64, trials: usize) -> LemmaResult {
    // reuse the convexity suite's instance streams
    let outcomes = (0..trials)
        .into_par_iter()
        .map(|t| {
            let (s, mut rng) = trial_rng(seed, CONVEXITY, t);
            let (model, params, delta) = random_forest_instance(&mut rng, s, 12);
            let forest = build_forest(&params, &delta, &model).map_err(|e| e.to_string())?;
            let tree = TypeTree::new(&forest);
            let order =
                convex_order(&tree, &SiblingOrders::default()).map_err(|e| e.to_string())?;
            let all: Vec<_> = order.nodes(&tree).collect();
            let sd = order
                .sum_dist_check(&tree, &all)
                .map_err(|e| e.to_string())?;
            let product_bound = 2 * params.len() * delta.len();
            if sd.ok && sd.bound == product_bound {
                Ok(())
            } else {
                Err(format!(
                    "trial {t}: Σ dist = {} against 2|F| = {}",
                    sd.sum, sd.bound
                ))
            }
        })
        .collect();
    LemmaResult::collect(SUM_DIST, outcomes)
}

/// Sauer-Shelah bound on random nonempty families over at most 14 points
/// with at most 20 sets.
pub fn sauer_shelah(seed: u64, trials: usize) -> LemmaResult {
    run_trials(SAUER_SHELAH, seed, trials, |_, rng| {
        let n = rng.gen_range(1..=14);
        let count = rng.gen_range(1..=20);
        let density: f64 = rng.gen();
        let sets: Vec<Vec<usize>> = (0..count)
            .map(|_| (0..n).filter(|_| rng.gen_bool(density)).collect())
            .collect();
        let family = SetFamily::from_indices(n, sets.clone()).map_err(|e| e.to_string())?;
        match sauer_check(&family) {
            Ok(true) => Ok(()),
            Ok(false) => Err(format!("bound violated on {sets:?}")),
            Err(e) => Err(e.to_string()),
        }
    })
}

fn union_of(sets: &[&FixedBitSet], len: usize) -> FixedBitSet {
    let mut u = FixedBitSet::with_capacity(len);
    for s in sets {
        u.union_with(s);
    }
    u
}

/// Shortest cover of `target` by at most three pool balls, by brute force
/// over the distinct balls inside it.
fn shortest_cover(target: &FixedBitSet, pool: &[FixedBitSet]) -> Option<usize> {
    let inside: Vec<&FixedBitSet> = pool
        .iter()
        .filter(|b| b.count_ones(..) > 0 && b.is_subset(target))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let len = target.len();
    if target.count_ones(..) == 0 {
        return Some(0);
    }
    if inside.contains(&target) {
        return Some(1);
    }
    for a in 0..inside.len() {
        for b in a + 1..inside.len() {
            if union_of(&[inside[a], inside[b]], len) == *target {
                return Some(2);
            }
        }
    }
    for a in 0..inside.len() {
        for b in a + 1..inside.len() {
            for c in b + 1..inside.len() {
                if union_of(&[inside[a], inside[b], inside[c]], len) == *target {
                    return Some(3);
                }
            }
        }
    }
    None
}

/// `components` on unions of at most three balls: covers the target, has
/// minimal length, and ignores pool order.
pub fn components_canonicity(seed: u64, trials: usize) -> LemmaResult {
    run_trials(COMPONENTS, seed, trials, |s, rng| {
        let model = random_model(rng, s, 40);
        let mut pool = model.ball_family().sets().to_vec();
        let r = rng.gen_range(1..=3);
        let chosen: Vec<&FixedBitSet> = (0..r)
            .map(|_| &pool[rng.gen_range(0..pool.len())])
            .collect();
        let target = union_of(&chosen, model.leaf_count());
        let comps = components(&target, &pool).map_err(|e| e.to_string())?;
        let refs: Vec<&FixedBitSet> = comps.iter().collect();
        if union_of(&refs, model.leaf_count()) != target {
            return Err("components do not cover the target".into());
        }
        match shortest_cover(&target, &pool) {
            Some(best) if best == comps.len() => {}
            other => {
                return Err(format!(
                    "{} components, brute force gives {other:?}",
                    comps.len()
                ))
            }
        }
        pool.shuffle(rng);
        let again = components(&target, &pool).map_err(|e| e.to_string())?;
        if again != comps {
            return Err("components depend on pool order".into());
        }
        Ok(())
    })
}

/// Ψ-types determine forests and realized `Δ0`-types on the dense-order
/// instance, for random carriers of size at most 20 and `|B| ≤ 6`.
pub fn determination(seed: u64, trials: usize) -> LemmaResult {
    run_trials(DETERMINATION, seed, trials, |_, rng| {
        let n = rng.gen_range(1..=20);
        let b_len = rng.gen_range(0..=6.min(n));
        let mut b: Vec<usize> = rand::seq::index::sample(rng, n, b_len).into_vec();
        b.sort_unstable();
        check_determination(n, &b)
    })
}

/// Largest carrier and parameter-set sizes of the exhaustive determination
/// sweep.
pub const EXHAUSTIVE_MAX_CARRIER: usize = 20;
pub const EXHAUSTIVE_MAX_B: usize = 6;

/// Determination on the dense-order instance for every carrier `0..n` with
/// `1 ≤ n ≤ max_n` and every `B ⊆ 0..n` with `|B| ≤ max_b`; one trial per
/// pair `(n, B)`.
pub fn determination_exhaustive(max_n: usize, max_b: usize) -> LemmaResult {
    let configs: Vec<(usize, Vec<usize>)> = (1..=max_n)
        .flat_map(|n| {
            (0..=max_b.min(n)).flat_map(move |k| (0..n).combinations(k).map(move |b| (n, b)))
        })
        .collect();
    let outcomes = configs
        .par_iter()
        .map(|(n, b)| check_determination(*n, b))
        .collect();
    LemmaResult::collect(DETERMINATION, outcomes)
}

/// Determination check for one carrier size and parameter set.
pub fn check_determination(n: usize, b: &[usize]) -> Result<(), String> {
    let (family, _) = dlo_instance(n);
    let r = determination_check(&family, b).map_err(|e| e.to_string())?;
    if r.ok() {
        Ok(())
    } else {
        Err(format!(
            "n = {n}, B = {b:?}: {} forest and {} type failures",
            r.forest_failures, r.type_failures
        ))
    }
}

/// Dense-order carrier `0..4|B|` with `B` drawn from `seed`.
pub fn demo_parameters(b_size: usize, seed: u64) -> (usize, Vec<usize>) {
    let n = 4 * b_size;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[b_size as u64]));
    let mut b = rand::seq::index::sample(&mut rng, n, b_size).into_vec();
    b.sort_unstable();
    (n, b)
}

/// Incremental count on the dense-order instance for each size in
/// [`INCREMENTAL_B_SIZES`], `trials` parameter sets per size.
pub fn incremental_count(seed: u64, trials: usize) -> LemmaResult {
    let jobs: Vec<(usize, usize)> = INCREMENTAL_B_SIZES
        .iter()
        .flat_map(|&size| (0..trials).map(move |t| (size, t)))
        .collect();
    let outcomes = jobs
        .par_iter()
        .map(|&(size, t)| {
            let (n, b) = demo_parameters(size, derive_seed(seed, &[t as u64]));
            let (family, cert) = dlo_instance(n);
            match incremental_count_check(&family, &b, &cert) {
                Ok(r) if r.ok => Ok(()),
                Ok(r) => Err(format!("|B| = {size}, B = {b:?}: inequality failed: {r:?}")),
                Err(e) => Err(format!("|B| = {size}: {e}")),
            }
        })
        .collect();
    LemmaResult::collect(INCREMENTAL_COUNT, outcomes)
}

/// Runs every suite. `trials` overrides each suite's default count and
/// must be positive. With `exhaustive`, the determination suite is the full
/// sweep of [`determination_exhaustive`] instead of random configurations.
pub fn run_all(
    seed: u64,
    trials: Option<usize>,
    exhaustive: bool,
) -> Result<LemmaReport, HarnessError> {
    if trials == Some(0) {
        return Err(HarnessError::Usage("trials must be at least 1".into()));
    }
    let lemmas: Vec<LemmaResult> = DEFAULT_TRIALS
        .iter()
        .map(|&(lemma, default)| {
            let t = trials.unwrap_or(default);
            match lemma {
                LINEAR_TYPE_BOUND => linear_type_bound(seed, t),
                CONVEXITY => convexity(seed, t),
                SUM_DIST => sum_dist(seed, t),
                SAUER_SHELAH => sauer_shelah(seed, t),
                COMPONENTS => components_canonicity(seed, t),
                DETERMINATION if exhaustive => {
                    determination_exhaustive(EXHAUSTIVE_MAX_CARRIER, EXHAUSTIVE_MAX_B)
                }
                DETERMINATION => determination(seed, t),
                INCREMENTAL_COUNT => incremental_count(seed, t),
                _ => unreachable!("every listed suite is dispatched"),
            }
        })
        .collect();
    let pass = lemmas.iter().all(LemmaResult::passed);
    Ok(LemmaReport { seed, lemmas, pass })
}
