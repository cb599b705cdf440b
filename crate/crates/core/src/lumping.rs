//! Coarsest species equivalence of a controlled network and its quotient.
//!
//! Refinement works on per-species signatures: for a species `A` and every
//! reaction whose reactant contains `A`, the context `ρ = reactant − A` and the
//! block projection of the product form a key, and the extremal rate is added
//! into that key. Two species of one block stay together iff their signatures
//! agree for both the lower and the upper extremal network.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{BlockProjection, Ccrn, Extremal, ModelError, Multiset, Partition, RateInterval, Reaction};
use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LumpError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("partition is not a species equivalence of the network")]
    NotAnEquivalence,
    #[error("representative {species} is not a member of block {block}")]
    BadRepresentative { block: usize, species: usize },
}

/// Aggregated rates of one species, keyed by `(context, target projection)`.
///
/// Entries are sorted by key; zero aggregates and diagonal targets are absent.
#[derive(Clone, Debug, PartialEq)]
pub struct Signature<S> {
    pub entries: Vec<(Multiset, BlockProjection, S)>,
}

impl<S: Scalar> Signature<S> {
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, context: &Multiset, target: &BlockProjection) -> S {
        self.entries.iter().find(|(c, t, _)| c == context && t == target).map(|e| e.2).unwrap_or_else(S::zero)
    }

    fn cmp_exact(&self, other: &Self) -> Ordering {
        for (a, b) in self.entries.iter().zip(&other.entries) {
            let ord =
                a.0.cmp(&b.0)
                    .then_with(|| a.1.cmp(&b.1))
                    .then_with(|| a.2.partial_cmp(&b.2).unwrap_or(Ordering::Equal));
            if ord != Ordering::Equal {
                return ord;
            }
        }
        self.entries.len().cmp(&other.entries.len())
    }

    fn cmp_keys(&self, other: &Self) -> Ordering {
        for (a, b) in self.entries.iter().zip(&other.entries) {
            let ord = a.0.cmp(&b.0).then_with(|| a.1.cmp(&b.1));
            if ord != Ordering::Equal {
                return ord;
            }
        }
        self.entries.len().cmp(&other.entries.len())
    }

    /// Same keys and every value within `tol`.
    fn close_to(&self, other: &Self, tol: S) -> bool {
        self.cmp_keys(other) == Ordering::Equal
            && self.entries.iter().zip(&other.entries).all(|(a, b)| (a.2 - b.2).abs() <= tol)
    }
}

/// Membership and representatives of a quotient.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockMap {
    /// Block id to representative species index in the original network.
    pub representative: Vec<usize>,
    /// Original species index to block id (= lumped species index).
    pub member_of: Vec<usize>,
}

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq, Eq)]
pub struct BlockMapJson {
    pub blocks: Vec<BlockJson>,
}

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq, Eq)]
pub struct BlockJson {
    pub representative: String,
    pub members: Vec<String>,
}

impl BlockMap {
    pub fn num_blocks(&self) -> usize {
        self.representative.len()
    }

    pub fn to_json<S: Scalar>(&self, ccrn: &Ccrn<S>) -> BlockMapJson {
        let mut members: Vec<Vec<String>> = vec![Vec::new(); self.num_blocks()];
        for (s, &b) in self.member_of.iter().enumerate() {
            members[b].push(ccrn.species_name(s).to_string());
        }
        BlockMapJson {
            blocks: self
                .representative
                .iter()
                .zip(members)
                .map(|(&r, members)| BlockJson { representative: ccrn.species_name(r).to_string(), members })
                .collect(),
        }
    }
}

/// Result of [`coarsest_equivalence_with`].
#[derive(Clone, Debug, PartialEq)]
pub struct Refinement {
    pub partition: Partition,
    /// Number of lower/upper rounds, including the final confirming round.
    pub rounds: usize,
}

/// Reaction rate from `rho` to `pi` in the chosen extremal network.
///
/// Off the diagonal this is the summed rate of reactions `rho → pi`; on the
/// diagonal it is minus the total rate out of `rho`.
pub fn rr<S: Scalar>(ccrn: &Ccrn<S>, extremal: Extremal, rho: &Multiset, pi: &Multiset) -> S {
    let out_of_rho = ccrn.reactions().iter().filter(|r| &r.reactant == rho && !r.is_noop());
    if rho != pi {
        out_of_rho.filter(|r| &r.product == pi).map(|r| r.rate.at(extremal)).sum()
    } else {
        -out_of_rho.map(|r| r.rate.at(extremal)).sum::<S>()
    }
}

/// Per-reaction data reused across all species of one refinement pass.
struct PassIndex {
    /// `occurrences[A]` lists `(reaction id, context)` for reactants containing `A`.
    occurrences: Vec<Vec<(usize, Multiset)>>,
}

impl PassIndex {
    fn new<S: Scalar>(ccrn: &Ccrn<S>) -> Self {
        let mut occurrences = vec![Vec::new(); ccrn.num_species()];
        for r in ccrn.reactions() {
            if r.is_noop() {
                continue;
            }
            for a in r.reactant.species() {
                let ctx = r.reactant.without_one(a).expect("species taken from reactant support");
                occurrences[a].push((r.id, ctx));
            }
        }
        Self { occurrences }
    }
}

/// Block projections of every reaction's reactant and product under one partition.
struct Projections {
    reactant: Vec<BlockProjection>,
    product: Vec<BlockProjection>,
}

impl Projections {
    fn new<S: Scalar>(ccrn: &Ccrn<S>, part: &Partition) -> Self {
        let (reactant, product) = ccrn
            .reactions()
            .par_iter()
            .map(|r| (part.project_unchecked(&r.reactant), part.project_unchecked(&r.product)))
            .unzip();
        Self { reactant, product }
    }
}

fn signature_from<S: Scalar>(
    ccrn: &Ccrn<S>,
    index: &PassIndex,
    proj: &Projections,
    extremal: Extremal,
    species: usize,
) -> Signature<S> {
    let reactions = ccrn.reactions();
    let mut contribs: Vec<(&Multiset, &BlockProjection, S)> = index.occurrences[species]
        .iter()
        .filter(|(r, _)| proj.product[*r] != proj.reactant[*r])
        .map(|(r, ctx)| (ctx, &proj.product[*r], reactions[*r].rate.at(extremal)))
        .collect();
    // occurrences are in reaction-id order; a stable sort keeps that order
    // inside each key, which fixes the summation order
    contribs.sort_by(|a, b| a.0.cmp(b.0).then_with(|| a.1.cmp(b.1)));
    let mut entries: Vec<(Multiset, BlockProjection, S)> = Vec::new();
    for (ctx, target, rate) in contribs {
        match entries.last_mut() {
            Some(last) if &last.0 == ctx && &last.1 == target => last.2 = last.2 + rate,
            _ => entries.push((ctx.clone(), target.clone(), rate)),
        }
    }
    entries.retain(|e| e.2 != S::zero());
    Signature { entries }
}

/// Signature of `species` under `part` in the chosen extremal network.
pub fn compute_signature<S: Scalar>(
    ccrn: &Ccrn<S>,
    part: &Partition,
    extremal: Extremal,
    species: usize,
) -> Result<Signature<S>, LumpError> {
    check_universe(ccrn, part)?;
    if species >= ccrn.num_species() {
        return Err(ModelError::SpeciesOutOfRange { species, len: ccrn.num_species() }.into());
    }
    let index = PassIndex::new(ccrn);
    let proj = Projections::new(ccrn, part);
    Ok(signature_from(ccrn, &index, &proj, extremal, species))
}

fn check_universe<S: Scalar>(ccrn: &Ccrn<S>, part: &Partition) -> Result<(), ModelError> {
    if part.num_species() != ccrn.num_species() {
        return Err(ModelError::UniverseMismatch { expected: ccrn.num_species(), found: part.num_species() });
    }
    Ok(())
}

/// Splits every block of `part` by signature equality, once.
///
/// `signatures(s)` must return the key used to separate species; species in
/// singleton blocks are never asked for.
fn split_pass<K, F, E>(part: &Partition, signature: F, same: E) -> Partition
where
    K: Send,
    F: Fn(usize) -> K + Sync,
    E: Fn(&K, &K) -> Ordering + Sync,
{
    let n = part.num_species();
    let pending: Vec<usize> = (0..part.num_blocks())
        .filter(|&b| part.block_len(b) > 1)
        .flat_map(|b| part.block(b).collect::<Vec<_>>())
        .collect();
    let sigs: Vec<(usize, K)> = pending.par_iter().map(|&s| (s, signature(s))).collect();
    let mut by_block: Vec<Vec<(usize, K)>> = (0..part.num_blocks()).map(|_| Vec::new()).collect();
    for (s, k) in sigs {
        by_block[part.block_of(s)].push((s, k));
    }
    let mut labels: Vec<(usize, usize)> = (0..n).map(|s| (part.block_of(s), 0)).collect();
    for group in &mut by_block {
        if group.len() < 2 {
            continue;
        }
        group.sort_by(|a, b| same(&a.1, &b.1).then(a.0.cmp(&b.0)));
        let mut class = 0;
        for i in 0..group.len() {
            if i > 0 && same(&group[i - 1].1, &group[i].1) != Ordering::Equal {
                class += 1;
            }
            labels[group[i].0].1 = class;
        }
    }
    Partition::from_labels(&labels)
}

/// Tolerance variant of [`split_pass`]: species join the first class whose
/// founding signature is within `tol` entrywise.
fn split_pass_tolerant<S: Scalar>(
    part: &Partition,
    signature: impl Fn(usize) -> Vec<Signature<S>> + Sync,
    tol: S,
) -> Partition {
    let n = part.num_species();
    let mut labels: Vec<(usize, usize)> = (0..n).map(|s| (part.block_of(s), 0)).collect();
    let blocks: Vec<Vec<usize>> = part.blocks().filter(|b| b.len() > 1).collect();
    let assigned: Vec<Vec<(usize, usize)>> = blocks
        .par_iter()
        .map(|members| {
            let mut founders: Vec<Vec<Signature<S>>> = Vec::new();
            let mut out = Vec::with_capacity(members.len());
            for &s in members {
                let sig = signature(s);
                let class = founders.iter().position(|f| f.iter().zip(&sig).all(|(a, b)| a.close_to(b, tol)));
                let class = class.unwrap_or_else(|| {
                    founders.push(sig);
                    founders.len() - 1
                });
                out.push((s, class));
            }
            out
        })
        .collect();
    for block in assigned {
        for (s, class) in block {
            labels[s].1 = class;
        }
    }
    Partition::from_labels(&labels)
}

/// Coarsest refinement of `part` that is a species equivalence of one
/// extremal network. Exact rate comparison.
pub fn refine_once<S: Scalar>(ccrn: &Ccrn<S>, part: &Partition, extremal: Extremal) -> Result<Partition, LumpError> {
    refine_once_with_tolerance(ccrn, part, extremal, S::zero())
}

/// As [`refine_once`], but aggregated rates within `tol` count as equal.
///
/// A positive tolerance is not transitive, so the result may depend on species
/// order and is not guaranteed to be an exact equivalence.
pub fn refine_once_with_tolerance<S: Scalar>(
    ccrn: &Ccrn<S>,
    part: &Partition,
    extremal: Extremal,
    tol: S,
) -> Result<Partition, LumpError> {
    check_universe(ccrn, part)?;
    let index = PassIndex::new(ccrn);
    let mut current = part.clone();
    loop {
        let proj = Projections::new(ccrn, &current);
        let sig = |s: usize| signature_from(ccrn, &index, &proj, extremal, s);
        let next = if tol > S::zero() {
            split_pass_tolerant(&current, |s| vec![sig(s)], tol)
        } else {
            split_pass(&current, sig, |a, b| a.cmp_exact(b))
        };
        if next.num_blocks() == current.num_blocks() {
            return Ok(current);
        }
        current = next;
    }
}

/// Coarsest species equivalence of both extremal networks refining `initial`.
pub fn coarsest_equivalence<S: Scalar>(ccrn: &Ccrn<S>, initial: &Partition) -> Result<Partition, LumpError> {
    Ok(coarsest_equivalence_with(ccrn, initial, S::zero())?.partition)
}

/// Alternates lower and upper refinement until a round changes nothing.
pub fn coarsest_equivalence_with<S: Scalar>(
    ccrn: &Ccrn<S>,
    initial: &Partition,
    tol: S,
) -> Result<Refinement, LumpError> {
    check_universe(ccrn, initial)?;
    let degenerate = ccrn.is_degenerate();
    let mut part = initial.clone();
    let mut rounds = 0;
    loop {
        rounds += 1;
        let mut next = refine_once_with_tolerance(ccrn, &part, Extremal::Lower, tol)?;
        if !degenerate {
            next = refine_once_with_tolerance(ccrn, &next, Extremal::Upper, tol)?;
        }
        if next == part {
            return Ok(Refinement { partition: part, rounds });
        }
        part = next;
    }
}

/// Single-loop variant that splits on the (lower, upper) signature pair in
/// every pass. Reaches the same fixpoint as [`coarsest_equivalence`].
pub fn coarsest_equivalence_joint<S: Scalar>(ccrn: &Ccrn<S>, initial: &Partition) -> Result<Partition, LumpError> {
    check_universe(ccrn, initial)?;
    let index = PassIndex::new(ccrn);
    let mut current = initial.clone();
    loop {
        let proj = Projections::new(ccrn, &current);
        let next = split_pass(
            &current,
            |s| {
                (
                    signature_from(ccrn, &index, &proj, Extremal::Lower, s),
                    signature_from(ccrn, &index, &proj, Extremal::Upper, s),
                )
            },
            |a, b| a.0.cmp_exact(&b.0).then_with(|| a.1.cmp_exact(&b.1)),
        );
        if next.num_blocks() == current.num_blocks() {
            return Ok(current);
        }
        current = next;
    }
}

/// Direct check of the species-equivalence condition for both extremals.
///
/// Does not use signatures: for every block, every context drawn from the
/// block's reactions and every member `A`, it aggregates `rr(A + ρ, π)` over
/// each lifted class of targets `π` (the source's own class included, via the
/// diagonal) and compares the aggregates across members.
pub fn check_equivalence<S: Scalar>(ccrn: &Ccrn<S>, part: &Partition) -> Result<bool, LumpError> {
    check_equivalence_with_tolerance(ccrn, part, S::zero())
}

pub fn check_equivalence_with_tolerance<S: Scalar>(
    ccrn: &Ccrn<S>,
    part: &Partition,
    tol: S,
) -> Result<bool, LumpError> {
    check_universe(ccrn, part)?;
    let mut by_reactant: HashMap<&Multiset, Vec<&Reaction<S>>> = HashMap::new();
    let mut containing: Vec<Vec<usize>> = vec![Vec::new(); ccrn.num_species()];
    for r in ccrn.reactions() {
        by_reactant.entry(&r.reactant).or_default().push(r);
        for a in r.reactant.species() {
            containing[a].push(r.id);
        }
    }
    let blocks: Vec<Vec<usize>> = part.blocks().filter(|b| b.len() > 1).collect();
    let ok = blocks.par_iter().all(|members| {
        let mut contexts: Vec<Multiset> = Vec::new();
        for &a in members {
            for &r in &containing[a] {
                contexts.extend(ccrn.reactions()[r].reactant.without_one(a));
            }
        }
        contexts.sort();
        contexts.dedup();
        Extremal::BOTH.iter().all(|&ext| {
            contexts.iter().all(|ctx| {
                let first = lifted_aggregates(&by_reactant, part, ext, &ctx.with_added(members[0], 1));
                members[1..].iter().all(|&a| {
                    let other = lifted_aggregates(&by_reactant, part, ext, &ctx.with_added(a, 1));
                    aggregates_match(&first, &other, tol)
                })
            })
        })
    });
    Ok(ok)
}

/// `Σ_{π ∈ class} rr(source, π)` for every lifted class with a nonzero total.
fn lifted_aggregates<S: Scalar>(
    by_reactant: &HashMap<&Multiset, Vec<&Reaction<S>>>,
    part: &Partition,
    ext: Extremal,
    source: &Multiset,
) -> BTreeMap<BlockProjection, S> {
    let own = part.project_unchecked(source);
    let mut out: BTreeMap<BlockProjection, S> = BTreeMap::new();
    let mut leaving = S::zero();
    if let Some(rs) = by_reactant.get(source) {
        for r in rs.iter().filter(|r| !r.is_noop()) {
            let rate = r.rate.at(ext);
            let class = part.project_unchecked(&r.product);
            if class != own {
                leaving = leaving + rate;
                let e = out.entry(class).or_insert_with(S::zero);
                *e = *e + rate;
            }
        }
    }
    // within-class moves cancel against the diagonal, leaving minus the
    // total rate out of the class
    out.insert(own, -leaving);
    out.retain(|_, v| *v != S::zero());
    out
}

fn aggregates_match<S: Scalar>(a: &BTreeMap<BlockProjection, S>, b: &BTreeMap<BlockProjection, S>, tol: S) -> bool {
    let keys = a.keys().chain(b.keys());
    keys.into_iter().all(|k| {
        let x = a.get(k).copied().unwrap_or_else(S::zero);
        let y = b.get(k).copied().unwrap_or_else(S::zero);
        if tol > S::zero() {
            (x - y).abs() <= tol
        } else {
            x == y
        }
    })
}

/// Lumped network over block representatives (smallest index per block).
///
/// Fails with [`LumpError::NotAnEquivalence`] unless `part` passes
/// [`check_equivalence`].
pub fn quotient<S: Scalar>(ccrn: &Ccrn<S>, part: &Partition) -> Result<(Ccrn<S>, BlockMap), LumpError> {
    quotient_with_tolerance(ccrn, part, S::zero())
}

pub fn quotient_with_tolerance<S: Scalar>(
    ccrn: &Ccrn<S>,
    part: &Partition,
    tol: S,
) -> Result<(Ccrn<S>, BlockMap), LumpError> {
    if !check_equivalence_with_tolerance(ccrn, part, tol)? {
        return Err(LumpError::NotAnEquivalence);
    }
    let reps: Vec<usize> = (0..part.num_blocks()).map(|b| part.representative(b)).collect();
    quotient_unchecked(ccrn, part, &reps)
}

/// Quotient with caller-chosen representatives and no equivalence check.
pub fn quotient_unchecked<S: Scalar>(
    ccrn: &Ccrn<S>,
    part: &Partition,
    representatives: &[usize],
) -> Result<(Ccrn<S>, BlockMap), LumpError> {
    check_universe(ccrn, part)?;
    if representatives.len() != part.num_blocks() {
        return Err(ModelError::InvalidPartition(format!(
            "{} representatives for {} blocks",
            representatives.len(),
            part.num_blocks()
        ))
        .into());
    }
    for (b, &s) in representatives.iter().enumerate() {
        if s >= ccrn.num_species() || part.block_of(s) != b {
            return Err(LumpError::BadRepresentative { block: b, species: s });
        }
    }
    let is_rep = |s: usize| representatives[part.block_of(s)] == s;

    let mut builder = Ccrn::builder();
    for &s in representatives {
        builder.add_species(ccrn.species_name(s))?;
    }

    let mut fused: Vec<(Option<String>, Multiset, Multiset, S, S)> = Vec::new();
    let mut slot: HashMap<(Multiset, Multiset), usize> = HashMap::new();
    for r in ccrn.reactions() {
        if !r.reactant.species().all(is_rep) {
            continue;
        }
        let reactant = r.reactant.map_species(|s| part.block_of(s));
        let product = r.product.map_species(|s| part.block_of(s));
        match slot.get(&(reactant.clone(), product.clone())) {
            Some(&i) => {
                fused[i].3 = fused[i].3 + r.rate.lo();
                fused[i].4 = fused[i].4 + r.rate.hi();
            }
            None => {
                slot.insert((reactant.clone(), product.clone()), fused.len());
                fused.push((r.label.clone(), reactant, product, r.rate.lo(), r.rate.hi()));
            }
        }
    }
    for (label, reactant, product, lo, hi) in fused {
        builder.add_reaction(label, reactant, product, RateInterval::new(lo, hi)?);
    }
    if let Some(init) = ccrn.initial() {
        for (b, members) in part.blocks().enumerate() {
            let total: S = members.iter().map(|&s| init[s]).sum();
            builder.set_initial(b, total)?;
        }
    }
    let lumped = builder.build()?;
    let map = BlockMap {
        representative: representatives.to_vec(),
        member_of: (0..ccrn.num_species()).map(|s| part.block_of(s)).collect(),
    };
    Ok((lumped, map))
}
