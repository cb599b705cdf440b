//! Explicit-state stochastic semantics: state enumeration, extremal generators,
//! ordinary lumpability of lifted partitions, transient solution by
//! uniformization, the scaled N-th approximation and Gillespie simulation.
//!
//! Everything here enumerates states and is meant for small populations; it is
//! the brute-force counterpart of the network-level checks in `lumping`.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::io::Write;
use std::ops::Range;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::model::{falling_binomial, BlockProjection, Ccrn, Extremal, ModelError, Multiset, Partition, Species};
use crate::scalar::Scalar;

pub const DEFAULT_STATE_CAP: usize = 1_000_000;

#[derive(Debug, Error)]
pub enum CtmcError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("state space exceeds {cap} states")]
    Capacity { cap: usize },
    #[error("initial state has population {size} above the bound {bound}")]
    BoundBelowInitial { size: u64, bound: u64 },
    #[error("expected a vector of length {expected}, got {found}")]
    Dimension { expected: usize, found: usize },
    #[error("{0}")]
    InvalidArgument(String),
    #[error("propensity overflow at t = {t} in state {state:?}")]
    PropensityOverflow { t: f64, state: Multiset },
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Enumerated states with their index. `truncated` is set when some transition
/// out of a retained state was discarded because it left the space.
#[derive(Clone, Debug)]
pub struct StateSpace {
    pub states: Vec<Multiset>,
    pub index: HashMap<Multiset, usize>,
    pub truncated: bool,
}

impl StateSpace {
    fn from_states(states: Vec<Multiset>, truncated: bool) -> Self {
        let index = states.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        Self { states, index, truncated }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn position(&self, sigma: &Multiset) -> Option<usize> {
        self.index.get(sigma).copied()
    }

    /// Point mass on `sigma`.
    pub fn dirac<S: Scalar>(&self, sigma: &Multiset) -> Option<Vec<S>> {
        let i = self.position(sigma)?;
        let mut p = vec![S::zero(); self.len()];
        p[i] = S::one();
        Some(p)
    }
}

fn fire(sigma: &Multiset, reactant: &Multiset, product: &Multiset) -> Multiset {
    sigma.checked_sub(reactant).expect("reaction applicable").plus(product)
}

/// Breadth-first enumeration from `init`; successors of a state are visited in
/// lexicographic multiset order. States above `pop_bound` are discarded.
pub fn enumerate_states<S: Scalar>(ccrn: &Ccrn<S>, init: &Multiset, pop_bound: u64) -> Result<StateSpace, CtmcError> {
    enumerate_states_capped(ccrn, init, pop_bound, DEFAULT_STATE_CAP)
}

pub fn enumerate_states_capped<S: Scalar>(
    ccrn: &Ccrn<S>,
    init: &Multiset,
    pop_bound: u64,
    cap: usize,
) -> Result<StateSpace, CtmcError> {
    if init.size() > pop_bound {
        return Err(CtmcError::BoundBelowInitial { size: init.size(), bound: pop_bound });
    }
    if let Some(s) = init.max_species() {
        if s >= ccrn.num_species() {
            return Err(ModelError::SpeciesOutOfRange { species: s, len: ccrn.num_species() }.into());
        }
    }
    let mut states = vec![init.clone()];
    let mut seen: HashMap<Multiset, usize> = HashMap::from([(init.clone(), 0)]);
    let mut queue = VecDeque::from([0usize]);
    let mut truncated = false;
    while let Some(i) = queue.pop_front() {
        let sigma = states[i].clone();
        let mut next: Vec<Multiset> = ccrn
            .reactions()
            .iter()
            .filter(|r| !r.is_noop() && sigma.contains(&r.reactant))
            .map(|r| fire(&sigma, &r.reactant, &r.product))
            .collect();
        next.sort();
        next.dedup();
        for theta in next {
            if theta.size() > pop_bound {
                truncated = true;
                continue;
            }
            if !seen.contains_key(&theta) {
                if states.len() == cap {
                    return Err(CtmcError::Capacity { cap });
                }
                seen.insert(theta.clone(), states.len());
                queue.push_back(states.len());
                states.push(theta);
            }
        }
    }
    Ok(StateSpace { states, index: seen, truncated })
}

/// All multisets of population at most `bound`, ordered by population and then
/// lexicographically. `truncated` records whether some reaction leaves the box.
pub fn enumerate_population_box<S: Scalar>(ccrn: &Ccrn<S>, bound: u64) -> Result<StateSpace, CtmcError> {
    let n = ccrn.num_species();
    let mut by_size: Vec<Vec<Multiset>> = vec![vec![Multiset::empty()]];
    let mut total = 1usize;
    for size in 1..=bound {
        // extend every state of size - 1 by a species not below its largest one
        let mut layer = Vec::new();
        for sigma in &by_size[size as usize - 1] {
            let from = sigma.max_species().unwrap_or(0);
            for s in from..n {
                layer.push(sigma.with_added(s, 1));
            }
        }
        layer.sort();
        total += layer.len();
        if total > DEFAULT_STATE_CAP {
            return Err(CtmcError::Capacity { cap: DEFAULT_STATE_CAP });
        }
        by_size.push(layer);
        if n == 0 {
            break;
        }
    }
    let states: Vec<Multiset> = by_size.into_iter().flatten().collect();
    let truncated = states.iter().any(|sigma| {
        ccrn.reactions()
            .iter()
            .any(|r| sigma.contains(&r.reactant) && sigma.size() - r.reactant.size() + r.product.size() > bound)
    });
    Ok(StateSpace::from_states(states, truncated))
}

/// Sparse generator: off-diagonal rows sorted by column, diagonal stored apart
/// as the negated off-diagonal row sum.
#[derive(Clone, Debug, PartialEq)]
pub struct Generator<S> {
    pub rows: Vec<Vec<(usize, S)>>,
    pub diag: Vec<S>,
    pub truncated: bool,
}

impl<S: Scalar> Generator<S> {
    pub fn num_states(&self) -> usize {
        self.rows.len()
    }

    pub fn rate(&self, from: usize, to: usize) -> S {
        if from == to {
            return self.diag[from];
        }
        self.rows[from]
            .binary_search_by_key(&to, |&(j, _)| j)
            .map(|k| self.rows[from][k].1)
            .unwrap_or_else(|_| S::zero())
    }

    pub fn exit_rate(&self, state: usize) -> S {
        -self.diag[state]
    }

    /// Row sum including the diagonal; zero by construction.
    pub fn row_sum(&self, state: usize) -> S {
        self.rows[state].iter().fold(S::zero(), |acc, &(_, q)| acc + q) + self.diag[state]
    }

    /// `p Q` for a row vector `p`.
    pub fn left_apply(&self, p: &[S]) -> Vec<S> {
        let mut out: Vec<S> = p.iter().zip(&self.diag).map(|(&x, &d)| x * d).collect();
        for (i, row) in self.rows.iter().enumerate() {
            if p[i] == S::zero() {
                continue;
            }
            for &(j, q) in row {
                out[j] = out[j] + p[i] * q;
            }
        }
        out
    }
}

/// Generator of the network with every rate fixed at the chosen interval endpoint.
pub fn build_generator<S: Scalar>(space: &StateSpace, ccrn: &Ccrn<S>, extremal: Extremal) -> Generator<S> {
    let alpha: Vec<S> = ccrn.reactions().iter().map(|r| r.rate.at(extremal)).collect();
    build_generator_with(space, ccrn, &alpha)
}

/// Generator for constant per-reaction rates `alpha`.
pub fn build_generator_with<S: Scalar>(space: &StateSpace, ccrn: &Ccrn<S>, alpha: &[S]) -> Generator<S> {
    let mut rows = Vec::with_capacity(space.len());
    let mut diag = Vec::with_capacity(space.len());
    for sigma in &space.states {
        let mut row: BTreeMap<usize, S> = BTreeMap::new();
        for (r, &a) in ccrn.reactions().iter().zip(alpha) {
            if r.is_noop() {
                continue;
            }
            let c = falling_binomial(sigma, &r.reactant);
            if c == 0 {
                continue;
            }
            if let Some(j) = space.position(&fire(sigma, &r.reactant, &r.product)) {
                let q = row.entry(j).or_insert_with(S::zero);
                *q = *q + a * S::from_count(c);
            }
        }
        let row: Vec<(usize, S)> = row.into_iter().filter(|&(_, q)| q != S::zero()).collect();
        diag.push(-row.iter().fold(S::zero(), |acc, &(_, q)| acc + q));
        rows.push(row);
    }
    Generator { rows, diag, truncated: space.truncated }
}

/// Two states of one lifted class with different aggregate rates into `target`.
#[derive(Clone, Debug, PartialEq)]
pub struct Counterexample<S> {
    pub state_a: Multiset,
    pub state_b: Multiset,
    /// A state of the target class.
    pub target: Multiset,
    pub target_projection: BlockProjection,
    pub rate_a: S,
    pub rate_b: S,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CounterexampleJson {
    pub state_a: String,
    pub state_b: String,
    pub target: String,
    pub target_blocks: Vec<u32>,
    pub rate_a: f64,
    pub rate_b: f64,
}

impl<S: Scalar> Counterexample<S> {
    pub fn to_json(&self, species: &[Species], num_blocks: usize) -> CounterexampleJson {
        CounterexampleJson {
            state_a: self.state_a.display(species).to_string(),
            state_b: self.state_b.display(species).to_string(),
            target: self.target.display(species).to_string(),
            target_blocks: self.target_projection.to_dense(num_blocks),
            rate_a: self.rate_a.as_f64(),
            rate_b: self.rate_b.as_f64(),
        }
    }
}

/// Ordinary lumpability of the state partition induced by `part`: states are
/// grouped by block projection and every member of a class must have the same
/// aggregate rate into each other class. Comparison is exact.
pub fn check_ordinary_lumpability<S: Scalar>(
    gen: &Generator<S>,
    space: &StateSpace,
    part: &Partition,
) -> Result<Option<Counterexample<S>>, CtmcError> {
    let mut class_of = Vec::with_capacity(space.len());
    let mut classes: HashMap<BlockProjection, usize> = HashMap::new();
    let mut members: Vec<Vec<usize>> = Vec::new();
    let mut projections = Vec::new();
    for (i, sigma) in space.states.iter().enumerate() {
        let p = part.project(sigma)?;
        let c = *classes.entry(p.clone()).or_insert_with(|| {
            members.push(Vec::new());
            projections.push(p);
            members.len() - 1
        });
        members[c].push(i);
        class_of.push(c);
    }
    let aggregate = |i: usize| -> BTreeMap<usize, S> {
        let mut out = BTreeMap::new();
        for &(j, q) in &gen.rows[i] {
            if class_of[j] != class_of[i] {
                let e = out.entry(class_of[j]).or_insert_with(S::zero);
                *e = *e + q;
            }
        }
        out.retain(|_, q| *q != S::zero());
        out
    };
    for group in members.iter().filter(|m| m.len() > 1) {
        let first = aggregate(group[0]);
        for &other in &group[1..] {
            let agg = aggregate(other);
            if agg == first {
                continue;
            }
            let target = first
                .keys()
                .chain(agg.keys())
                .copied()
                .filter(|c| first.get(c) != agg.get(c))
                .min()
                .expect("maps differ");
            let get = |m: &BTreeMap<usize, S>| m.get(&target).copied().unwrap_or_else(S::zero);
            return Ok(Some(Counterexample {
                state_a: space.states[group[0]].clone(),
                state_b: space.states[other].clone(),
                target: space.states[members[target][0]].clone(),
                target_projection: projections[target].clone(),
                rate_a: get(&first),
                rate_b: get(&agg),
            }));
        }
    }
    Ok(None)
}

/// Distribution at time `t`; `approximate` is set on truncated spaces.
#[derive(Clone, Debug, PartialEq)]
pub struct Transient<S> {
    pub p: Vec<S>,
    pub approximate: bool,
}

const UNIFORMIZATION_TAIL: f64 = 1e-12;
const MAX_RATE_TIME: f64 = 50.0;

/// Forward equation solved by uniformization. The horizon is cut into chunks
/// with `Λ·dt ≤ 50`; each chunk truncates the Poisson series once the
/// remaining mass is below `1e-12` divided by the number of chunks.
pub fn transient_solve<S: Scalar>(gen: &Generator<S>, p0: &[S], t: S) -> Result<Transient<S>, CtmcError> {
    if p0.len() != gen.num_states() {
        return Err(CtmcError::Dimension { expected: gen.num_states(), found: p0.len() });
    }
    if !(t >= S::zero()) {
        return Err(CtmcError::InvalidArgument(format!("time must be nonnegative, got {t}")));
    }
    let approximate = gen.truncated;
    let lambda = gen.diag.iter().fold(S::zero(), |acc, &d| acc.max(-d));
    if t == S::zero() || lambda == S::zero() {
        return Ok(Transient { p: p0.to_vec(), approximate });
    }
    let total = lambda.as_f64() * t.as_f64();
    let chunks = (total / MAX_RATE_TIME).ceil().max(1.0);
    let rate_time = total / chunks;
    let eps = UNIFORMIZATION_TAIL / chunks;
    let weights = poisson_weights(rate_time, eps);

    let mut p = p0.to_vec();
    for _ in 0..chunks as usize {
        let mut term = p.clone();
        let mut acc: Vec<S> = term.iter().map(|&x| x * S::lit(weights[0])).collect();
        for &w in &weights[1..] {
            let q = gen.left_apply(&term);
            term = term.iter().zip(&q).map(|(&x, &y)| x + y / lambda).collect();
            for (a, &x) in acc.iter_mut().zip(&term) {
                *a = *a + x * S::lit(w);
            }
        }
        p = acc;
    }
    Ok(Transient { p, approximate })
}

/// Poisson(λ) probabilities from 0 up to the first index where the tail is below `eps`.
fn poisson_weights(lambda: f64, eps: f64) -> Vec<f64> {
    let mut log_w = -lambda;
    let mut weights = vec![log_w.exp()];
    let mut mass = weights[0];
    let mut k = 0.0;
    while 1.0 - mass > eps && weights.len() < 100_000 {
        k += 1.0;
        log_w += lambda.ln() - f64::ln(k);
        let w = log_w.exp();
        weights.push(w);
        mass += w;
        if w == 0.0 && k > lambda {
            break;
        }
    }
    weights
}

/// Aggregates a distribution over the lifted classes of `part`, keyed by projection.
pub fn lift_distribution<S: Scalar>(
    space: &StateSpace,
    p: &[S],
    part: &Partition,
) -> Result<BTreeMap<BlockProjection, S>, CtmcError> {
    let mut out = BTreeMap::new();
    for (sigma, &x) in space.states.iter().zip(p) {
        let e = out.entry(part.project(sigma)?).or_insert_with(S::zero);
        *e = *e + x;
    }
    Ok(out)
}

/// Transition rates of the N-th scaled approximation, on integer count states
/// `x = N σ`: reaction `r` fires at `g(x) · α_r / N^(|ρ_r| − 1) · C(x, ρ_r)` with
/// the cutoff `g(x) = max(0, min(1, 2 − |x| / (N c)))`.
#[derive(Clone, Debug)]
pub struct ScaledGenerator<S> {
    reactions: Vec<(Multiset, Multiset)>,
    alpha: Vec<S>,
    scale: u32,
    cutoff: S,
}

impl<S: Scalar> ScaledGenerator<S> {
    pub fn new(ccrn: &Ccrn<S>, alpha: &[S], scale: u32, cutoff: S) -> Result<Self, CtmcError> {
        if alpha.len() != ccrn.num_reactions() {
            return Err(CtmcError::Dimension { expected: ccrn.num_reactions(), found: alpha.len() });
        }
        if scale == 0 || !(cutoff > S::zero()) {
            return Err(CtmcError::InvalidArgument(format!("need N ≥ 1 and c > 0, got N = {scale}, c = {cutoff}")));
        }
        let n = S::lit(f64::from(scale));
        let mut reactions = Vec::new();
        let mut scaled = Vec::new();
        for (r, &a) in ccrn.reactions().iter().zip(alpha) {
            if r.is_noop() {
                continue;
            }
            reactions.push((r.reactant.clone(), r.product.clone()));
            scaled.push(a / n.powi(r.reactant.size() as i32 - 1));
        }
        Ok(Self { reactions, alpha: scaled, scale, cutoff })
    }

    /// The unscaled chain: `N = 1` and no cutoff.
    pub fn unscaled(ccrn: &Ccrn<S>, alpha: &[S]) -> Result<Self, CtmcError> {
        Self::new(ccrn, alpha, 1, S::infinity())
    }

    pub fn scale(&self) -> u32 {
        self.scale
    }

    pub fn cutoff_factor(&self, x: &Multiset) -> S {
        let size = S::from_count(u128::from(x.size()));
        let g = S::lit(2.0) - size / (S::lit(f64::from(self.scale)) * self.cutoff);
        g.min(S::one()).max(S::zero())
    }

    /// Per-reaction propensities at `x`, skipping no-op reactions.
    pub fn propensities(&self, x: &Multiset) -> Vec<S> {
        let g = self.cutoff_factor(x);
        self.reactions
            .iter()
            .zip(&self.alpha)
            .map(|((rho, _), &a)| {
                let c = falling_binomial(x, rho);
                if c == 0 || g == S::zero() {
                    S::zero()
                } else {
                    g * a * S::from_count(c)
                }
            })
            .collect()
    }

    /// Outgoing transitions of `x`, summed per target and sorted by target.
    pub fn transitions(&self, x: &Multiset) -> Vec<(Multiset, S)> {
        let mut out: BTreeMap<Multiset, S> = BTreeMap::new();
        for ((rho, pi), q) in self.reactions.iter().zip(self.propensities(x)) {
            if q > S::zero() {
                let e = out.entry(fire(x, rho, pi)).or_insert_with(S::zero);
                *e = *e + q;
            }
        }
        out.into_iter().collect()
    }
}

/// Scaled approximation at one endpoint of every rate interval.
pub fn scaled_generator<S: Scalar>(
    ccrn: &Ccrn<S>,
    scale: u32,
    cutoff: S,
    extremal: Extremal,
) -> Result<ScaledGenerator<S>, CtmcError> {
    let alpha: Vec<S> = ccrn.reactions().iter().map(|r| r.rate.at(extremal)).collect();
    ScaledGenerator::new(ccrn, &alpha, scale, cutoff)
}

/// Jump path of count states; `states[k]` holds on `[times[k], times[k + 1])`.
#[derive(Clone, Debug, PartialEq)]
pub struct JumpPath<S> {
    pub times: Vec<S>,
    pub states: Vec<Multiset>,
    pub t_end: S,
    pub scale: u32,
}

impl<S: Scalar> JumpPath<S> {
    pub fn state_at(&self, t: S) -> &Multiset {
        let k = self.times.partition_point(|&s| s <= t);
        &self.states[k.saturating_sub(1)]
    }

    /// State at `t` divided by the scale, as a dense vector.
    pub fn concentration_at(&self, t: S, num_species: usize) -> Vec<S> {
        let n = S::lit(f64::from(self.scale));
        self.state_at(t).to_dense(num_species).into_iter().map(|c| S::lit(f64::from(c)) / n).collect()
    }

    pub fn num_jumps(&self) -> usize {
        self.states.len() - 1
    }
}

/// Optional scaling of a simulation: population scale `N` and cutoff `c`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Scaling<S> {
    pub n: u32,
    pub cutoff: S,
}

/// Gillespie direct method with constant rates `alpha`, seeded ChaCha8 stream.
/// With `scaling`, `init` is the count state `N v0` and rates follow the
/// scaled approximation.
pub fn ssa_simulate<S: Scalar>(
    ccrn: &Ccrn<S>,
    init: &Multiset,
    alpha: &[S],
    t_end: S,
    seed: u64,
    scaling: Option<Scaling<S>>,
) -> Result<JumpPath<S>, CtmcError> {
    for (r, &a) in ccrn.reactions().iter().zip(alpha) {
        if !r.rate.contains(a) {
            return Err(CtmcError::InvalidArgument(format!("rate {a} of reaction {} outside its interval", r.id)));
        }
    }
    let gen = match scaling {
        Some(s) => ScaledGenerator::new(ccrn, alpha, s.n, s.cutoff)?,
        None => ScaledGenerator::unscaled(ccrn, alpha)?,
    };
    ssa_with(&gen, init, t_end, seed)
}

fn ssa_with<S: Scalar>(
    gen: &ScaledGenerator<S>,
    init: &Multiset,
    t_end: S,
    seed: u64,
) -> Result<JumpPath<S>, CtmcError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = S::zero();
    let mut x = init.clone();
    let mut path = JumpPath { times: vec![t], states: vec![x.clone()], t_end, scale: gen.scale };
    loop {
        let props = gen.propensities(&x);
        let total: S = props.iter().copied().sum();
        if !total.is_finite() {
            return Err(CtmcError::PropensityOverflow { t: t.as_f64(), state: x });
        }
        if total == S::zero() {
            break;
        }
        let u: f64 = 1.0 - rng.gen::<f64>();
        t = t + S::lit(-u.ln()) / total;
        if t > t_end {
            break;
        }
        let mut pick = S::lit(rng.gen::<f64>()) * total;
        let mut chosen = props.len() - 1;
        for (r, &a) in props.iter().enumerate() {
            if a > S::zero() {
                chosen = r;
                if pick < a {
                    break;
                }
                pick = pick - a;
            }
        }
        let (rho, pi) = &gen.reactions[chosen];
        x = fire(&x, rho, pi);
        path.times.push(t);
        path.states.push(x.clone());
    }
    Ok(path)
}

/// Mean concentration over the seeds in `seeds`, sampled at `times`. Paths run
/// in parallel; the average is accumulated in seed order.
pub fn ssa_mean<S: Scalar>(
    ccrn: &Ccrn<S>,
    init: &Multiset,
    alpha: &[S],
    times: &[S],
    seeds: Range<u64>,
    scaling: Option<Scaling<S>>,
) -> Result<Vec<Vec<S>>, CtmcError> {
    let t_end = times.last().copied().unwrap_or_else(S::zero);
    let n = ccrn.num_species();
    let count = seeds.end.saturating_sub(seeds.start);
    let samples: Vec<Vec<Vec<S>>> = seeds
        .into_par_iter()
        .map(|seed| {
            let path = ssa_simulate(ccrn, init, alpha, t_end, seed, scaling)?;
            Ok(times.iter().map(|&t| path.concentration_at(t, n)).collect())
        })
        .collect::<Result<_, CtmcError>>()?;
    let mut mean = vec![vec![S::zero(); n]; times.len()];
    for sample in &samples {
        for (m, s) in mean.iter_mut().zip(sample) {
            for (a, &b) in m.iter_mut().zip(s) {
                *a = *a + b;
            }
        }
    }
    let denom = S::lit(count.max(1) as f64);
    for m in &mut mean {
        for a in m.iter_mut() {
            *a = *a / denom;
        }
    }
    Ok(mean)
}

/// One row per jump: time followed by the count of every species.
pub fn write_jump_path_csv<S: Scalar, W: Write>(
    path: &JumpPath<S>,
    species: &[Species],
    out: W,
) -> Result<(), CtmcError> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["time".to_string()];
    header.extend(species.iter().map(|s| s.name.clone()));
    w.write_record(&header)?;
    for (t, x) in path.times.iter().zip(&path.states) {
        let mut row = vec![t.to_string()];
        row.extend(x.to_dense(species.len()).iter().map(|c| c.to_string()));
        w.write_record(&row)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// One row per state: the state as a multiset and its probability.
pub fn write_distribution_csv<S: Scalar, W: Write>(
    space: &StateSpace,
    p: &[S],
    species: &[Species],
    out: W,
) -> Result<(), CtmcError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["state", "probability"])?;
    for (sigma, x) in space.states.iter().zip(p) {
        w.write_record([sigma.display(species).to_string(), x.to_string()])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}
