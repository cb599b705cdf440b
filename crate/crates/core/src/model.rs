//! Core domain types: species, multisets, rate intervals, reactions, controlled
//! networks and species partitions.
//!
//! Species are interned to dense indices when a network is built; everything on
//! the hot path (multisets, partitions, signatures) works on those indices.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("species index {species} outside universe of {len} species")]
    SpeciesOutOfRange { species: usize, len: usize },
    #[error("partition covers {found} species but the network has {expected}")]
    UniverseMismatch { expected: usize, found: usize },
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("invalid rate interval [{lo} : {hi}]")]
    InvalidRate { lo: f64, hi: f64 },
    #[error("duplicate species declaration `{0}`")]
    DuplicateSpecies(String),
    #[error("unknown species `{0}`")]
    UnknownSpecies(String),
    #[error("initial value for `{name}` must be finite and nonnegative, got {value}")]
    InvalidInitial { name: String, value: f64 },
}

/// A named species with its dense index.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Species {
    pub name: String,
    pub index: usize,
}

/// Finite multiset of species, stored as `(species, count)` pairs sorted by species.
///
/// The representation is canonical (no zero counts, no repeated species), so the
/// derived `Eq`, `Hash` and `Ord` are multiset equality, hashing and a
/// lexicographic order respectively.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Multiset {
    entries: Vec<(u32, u32)>,
}

impl Multiset {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn singleton(species: usize) -> Self {
        Self { entries: vec![(species as u32, 1)] }
    }

    /// Builds a multiset from arbitrary `(species, count)` pairs, merging repeats
    /// and dropping zero counts.
    pub fn from_counts<I: IntoIterator<Item = (usize, u32)>>(pairs: I) -> Self {
        let mut entries: Vec<(u32, u32)> =
            pairs.into_iter().filter(|&(_, c)| c > 0).map(|(s, c)| (s as u32, c)).collect();
        entries.sort_unstable_by_key(|&(s, _)| s);
        entries.dedup_by(|next, kept| {
            if next.0 == kept.0 {
                kept.1 += next.1;
                true
            } else {
                false
            }
        });
        Self { entries }
    }

    /// Builds a multiset from a dense count vector indexed by species.
    pub fn from_dense(counts: &[u32]) -> Self {
        Self::from_counts(counts.iter().enumerate().map(|(s, &c)| (s, c)))
    }

    pub fn count(&self, species: usize) -> u32 {
        match self.entries.binary_search_by_key(&(species as u32), |&(s, _)| s) {
            Ok(pos) => self.entries[pos].1,
            Err(_) => 0,
        }
    }

    /// Total number of elements `|ρ|`.
    pub fn size(&self) -> u64 {
        self.entries.iter().map(|&(_, c)| u64::from(c)).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Number of distinct species.
    pub fn support_len(&self) -> usize {
        self.entries.len()
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = (usize, u32)> + '_ {
        self.entries.iter().map(|&(s, c)| (s as usize, c))
    }

    pub fn species(&self) -> impl Iterator<Item = usize> + '_ {
        self.entries.iter().map(|&(s, _)| s as usize)
    }

    pub fn max_species(&self) -> Option<usize> {
        self.entries.last().map(|&(s, _)| s as usize)
    }

    pub fn plus(&self, other: &Multiset) -> Multiset {
        let mut out = Vec::with_capacity(self.entries.len() + other.entries.len());
        let (mut i, mut j) = (0, 0);
        while i < self.entries.len() && j < other.entries.len() {
            let (a, b) = (self.entries[i], other.entries[j]);
            match a.0.cmp(&b.0) {
                std::cmp::Ordering::Less => {
                    out.push(a);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(b);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    out.push((a.0, a.1 + b.1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.entries[i..]);
        out.extend_from_slice(&other.entries[j..]);
        Multiset { entries: out }
    }

    pub fn with_added(&self, species: usize, n: u32) -> Multiset {
        self.plus(&Multiset::from_counts([(species, n)]))
    }

    /// Removes one copy of `species`, or `None` if it is absent.
    pub fn without_one(&self, species: usize) -> Option<Multiset> {
        let pos = self.entries.binary_search_by_key(&(species as u32), |&(s, _)| s).ok()?;
        let mut entries = self.entries.clone();
        if entries[pos].1 == 1 {
            entries.remove(pos);
        } else {
            entries[pos].1 -= 1;
        }
        Some(Multiset { entries })
    }

    /// Sub-multiset test: `other ⊆ self`.
    pub fn contains(&self, other: &Multiset) -> bool {
        other.entries.iter().all(|&(s, c)| self.count(s as usize) >= c)
    }

    /// `self − other`, or `None` when `other ⊄ self`.
    pub fn checked_sub(&self, other: &Multiset) -> Option<Multiset> {
        if !self.contains(other) {
            return None;
        }
        let entries = self
            .entries
            .iter()
            .filter_map(|&(s, c)| {
                let left = c - other.count(s as usize);
                (left > 0).then_some((s, left))
            })
            .collect();
        Some(Multiset { entries })
    }

    /// Renames every species through `f`, merging species that collide.
    pub fn map_species<F: Fn(usize) -> usize>(&self, f: F) -> Multiset {
        Multiset::from_counts(self.iter().map(|(s, c)| (f(s), c)))
    }

    pub fn to_dense(&self, len: usize) -> Vec<u32> {
        let mut out = vec![0; len];
        for (s, c) in self.iter() {
            out[s] = c;
        }
        out
    }

    /// Formats with species names, using `0` for the empty multiset.
    pub fn display<'a>(&'a self, names: &'a [Species]) -> MultisetDisplay<'a> {
        MultisetDisplay { set: self, names }
    }
}

pub struct MultisetDisplay<'a> {
    set: &'a Multiset,
    names: &'a [Species],
}

impl fmt::Display for MultisetDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.set.is_empty() {
            return f.write_str("0");
        }
        for (k, (s, c)) in self.set.iter().enumerate() {
            if k > 0 {
                f.write_str(" + ")?;
            }
            if c > 1 {
                write!(f, "{c} ")?;
            }
            f.write_str(&self.names[s].name)?;
        }
        Ok(())
    }
}

/// Product over species of `C(sigma(B), rho(B))`; zero when `rho ⊄ sigma`.
///
/// Saturates at `u128::MAX` instead of overflowing.
pub fn falling_binomial(sigma: &Multiset, rho: &Multiset) -> u128 {
    let mut total: u128 = 1;
    for (s, k) in rho.iter() {
        let n = sigma.count(s);
        if k > n {
            return 0;
        }
        total = total.saturating_mul(binomial(u128::from(n), u128::from(k)));
    }
    total
}

fn binomial(n: u128, k: u128) -> u128 {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) is divisible by (i + 1)
        acc = acc.saturating_mul(n - i) / (i + 1);
    }
    acc
}

/// Which endpoint of every rate interval to use.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Extremal {
    Lower,
    Upper,
}

impl Extremal {
    pub const BOTH: [Extremal; 2] = [Extremal::Lower, Extremal::Upper];
}

/// Closed interval `[lo, hi]` of admissible kinetic rates, `0 ≤ lo ≤ hi`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RateInterval<S> {
    lo: S,
    hi: S,
}

impl<S: Scalar> RateInterval<S> {
    pub fn new(lo: S, hi: S) -> Result<Self, ModelError> {
        if !(lo.is_finite() && hi.is_finite()) || lo < S::zero() || lo > hi {
            return Err(ModelError::InvalidRate { lo: lo.as_f64(), hi: hi.as_f64() });
        }
        Ok(Self { lo, hi })
    }

    /// Degenerate interval `[k, k]`.
    pub fn point(k: S) -> Result<Self, ModelError> {
        Self::new(k, k)
    }

    pub fn lo(&self) -> S {
        self.lo
    }

    pub fn hi(&self) -> S {
        self.hi
    }

    pub fn at(&self, which: Extremal) -> S {
        match which {
            Extremal::Lower => self.lo,
            Extremal::Upper => self.hi,
        }
    }

    pub fn is_degenerate(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, x: S) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn clamp(&self, x: S) -> S {
        x.max(self.lo).min(self.hi)
    }

    pub fn midpoint(&self) -> S {
        self.lo + (self.hi - self.lo) / S::lit(2.0)
    }
}

/// Mass-action reaction `reactant → product` with an interval-valued rate.
#[derive(Clone, Debug, PartialEq)]
pub struct Reaction<S> {
    pub id: usize,
    pub label: Option<String>,
    pub reactant: Multiset,
    pub product: Multiset,
    pub rate: RateInterval<S>,
}

impl<S: Scalar> Reaction<S> {
    /// Reactions with identical reactant and product never change the state.
    pub fn is_noop(&self) -> bool {
        self.reactant == self.product
    }
}

/// Controlled chemical reaction network.
///
/// Immutable once built; see [`CcrnBuilder`].
#[derive(Clone, Debug, PartialEq)]
pub struct Ccrn<S> {
    species: Vec<Species>,
    reactions: Vec<Reaction<S>>,
    initial: Option<Vec<S>>,
    name_index: HashMap<String, usize>,
}

impl<S: Scalar> Ccrn<S> {
    pub fn builder() -> CcrnBuilder<S> {
        CcrnBuilder::default()
    }

    pub fn species(&self) -> &[Species] {
        &self.species
    }

    pub fn reactions(&self) -> &[Reaction<S>] {
        &self.reactions
    }

    pub fn num_species(&self) -> usize {
        self.species.len()
    }

    pub fn num_reactions(&self) -> usize {
        self.reactions.len()
    }

    pub fn species_index(&self, name: &str) -> Option<usize> {
        self.name_index.get(name).copied()
    }

    pub fn species_name(&self, index: usize) -> &str {
        &self.species[index].name
    }

    /// Initial concentration vector, when the model declares one.
    pub fn initial(&self) -> Option<&[S]> {
        self.initial.as_deref()
    }

    /// Initial state as a molecule-count multiset, if every declared initial
    /// value is a nonnegative integer.
    pub fn initial_multiset(&self) -> Option<Multiset> {
        let init = self.initial.as_ref()?;
        let mut pairs = Vec::new();
        for (s, &x) in init.iter().enumerate() {
            if x.fract() != S::zero() {
                return None;
            }
            pairs.push((s, x.to_u32()?));
        }
        Some(Multiset::from_counts(pairs))
    }

    /// Looks up a multiset given as `(name, count)` pairs.
    pub fn multiset(&self, terms: &[(&str, u32)]) -> Result<Multiset, ModelError> {
        let mut pairs = Vec::with_capacity(terms.len());
        for &(name, c) in terms {
            let s = self.species_index(name).ok_or_else(|| ModelError::UnknownSpecies(name.to_string()))?;
            pairs.push((s, c));
        }
        Ok(Multiset::from_counts(pairs))
    }

    /// Same network with every rate interval replaced by `f(reaction)`.
    pub fn map_rates<F>(&self, f: F) -> Result<Ccrn<S>, ModelError>
    where
        F: Fn(&Reaction<S>) -> (S, S),
    {
        let mut out = self.clone();
        for r in &mut out.reactions {
            let (lo, hi) = f(r);
            r.rate = RateInterval::new(lo, hi)?;
        }
        Ok(out)
    }

    /// Same network with the given initial concentrations.
    pub fn with_initial(&self, initial: Option<Vec<S>>) -> Result<Ccrn<S>, ModelError> {
        if let Some(init) = &initial {
            if init.len() != self.species.len() {
                return Err(ModelError::UniverseMismatch { expected: self.species.len(), found: init.len() });
            }
        }
        let mut out = self.clone();
        out.initial = initial;
        Ok(out)
    }

    /// True when every interval is a single point.
    pub fn is_degenerate(&self) -> bool {
        self.reactions.iter().all(|r| r.rate.is_degenerate())
    }
}

/// Incremental constructor for [`Ccrn`]; validates species indices on `build`.
#[derive(Debug)]
pub struct CcrnBuilder<S> {
    species: Vec<Species>,
    name_index: HashMap<String, usize>,
    reactions: Vec<Reaction<S>>,
    initial: Vec<(usize, S)>,
}

impl<S> Default for CcrnBuilder<S> {
    fn default() -> Self {
        Self { species: Vec::new(), name_index: HashMap::new(), reactions: Vec::new(), initial: Vec::new() }
    }
}

impl<S: Scalar> CcrnBuilder<S> {
    /// Declares a new species; fails if the name is already known.
    pub fn add_species(&mut self, name: &str) -> Result<usize, ModelError> {
        if self.name_index.contains_key(name) {
            return Err(ModelError::DuplicateSpecies(name.to_string()));
        }
        Ok(self.intern(name))
    }

    /// Index of `name`, registering it if unseen.
    pub fn intern(&mut self, name: &str) -> usize {
        if let Some(&i) = self.name_index.get(name) {
            return i;
        }
        let index = self.species.len();
        self.species.push(Species { name: name.to_string(), index });
        self.name_index.insert(name.to_string(), index);
        index
    }

    pub fn lookup(&self, name: &str) -> Option<usize> {
        self.name_index.get(name).copied()
    }

    pub fn num_species(&self) -> usize {
        self.species.len()
    }

    /// Appends a reaction and returns its id.
    pub fn add_reaction(
        &mut self,
        label: Option<String>,
        reactant: Multiset,
        product: Multiset,
        rate: RateInterval<S>,
    ) -> usize {
        let id = self.reactions.len();
        self.reactions.push(Reaction { id, label, reactant, product, rate });
        id
    }

    /// Convenience for programmatic construction with species names.
    pub fn reaction(
        &mut self,
        reactant: &[(&str, u32)],
        product: &[(&str, u32)],
        lo: S,
        hi: S,
    ) -> Result<usize, ModelError> {
        let rate = RateInterval::new(lo, hi)?;
        let reactant = Multiset::from_counts(reactant.iter().map(|&(n, c)| (self.intern(n), c)).collect::<Vec<_>>());
        let product = Multiset::from_counts(product.iter().map(|&(n, c)| (self.intern(n), c)).collect::<Vec<_>>());
        Ok(self.add_reaction(None, reactant, product, rate))
    }

    pub fn set_initial(&mut self, species: usize, value: S) -> Result<(), ModelError> {
        if !value.is_finite() || value < S::zero() {
            let name = self.species.get(species).map(|s| s.name.clone()).unwrap_or_else(|| species.to_string());
            return Err(ModelError::InvalidInitial { name, value: value.as_f64() });
        }
        self.initial.push((species, value));
        Ok(())
    }

    pub fn build(self) -> Result<Ccrn<S>, ModelError> {
        let n = self.species.len();
        for r in &self.reactions {
            for m in [&r.reactant, &r.product] {
                if let Some(s) = m.max_species() {
                    if s >= n {
                        return Err(ModelError::SpeciesOutOfRange { species: s, len: n });
                    }
                }
            }
        }
        let initial = if self.initial.is_empty() {
            None
        } else {
            let mut v = vec![S::zero(); n];
            for (s, x) in self.initial {
                if s >= n {
                    return Err(ModelError::SpeciesOutOfRange { species: s, len: n });
                }
                v[s] = x;
            }
            Some(v)
        };
        Ok(Ccrn { species: self.species, reactions: self.reactions, initial, name_index: self.name_index })
    }
}

/// Partition of the species set into nonempty disjoint blocks.
///
/// Kept in canonical form: members ascending within each block, blocks ordered
/// by their smallest member. Two partitions of the same universe are equal iff
/// they are equal as set partitions.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Partition {
    blocks: Vec<Vec<u32>>,
    block_of: Vec<u32>,
}

impl Partition {
    /// Single block containing every species.
    pub fn trivial(n: usize) -> Self {
        if n == 0 {
            return Self { blocks: Vec::new(), block_of: Vec::new() };
        }
        Self { blocks: vec![(0..n as u32).collect()], block_of: vec![0; n] }
    }

    /// All singletons.
    pub fn discrete(n: usize) -> Self {
        Self { blocks: (0..n as u32).map(|s| vec![s]).collect(), block_of: (0..n as u32).collect() }
    }

    pub fn from_blocks(n: usize, blocks: Vec<Vec<usize>>) -> Result<Self, ModelError> {
        let mut label = vec![u32::MAX; n];
        for (b, block) in blocks.iter().enumerate() {
            if block.is_empty() {
                return Err(ModelError::InvalidPartition(format!("block {b} is empty")));
            }
            for &s in block {
                if s >= n {
                    return Err(ModelError::SpeciesOutOfRange { species: s, len: n });
                }
                if label[s] != u32::MAX {
                    return Err(ModelError::InvalidPartition(format!("species {s} appears in more than one block")));
                }
                label[s] = b as u32;
            }
        }
        if let Some(s) = label.iter().position(|&l| l == u32::MAX) {
            return Err(ModelError::InvalidPartition(format!("species {s} is not covered")));
        }
        Ok(Self::from_labels(&label))
    }

    /// Groups species by equal label; `labels[s]` is the label of species `s`.
    pub fn from_labels<L: Eq + std::hash::Hash>(labels: &[L]) -> Self {
        let mut first_seen: HashMap<&L, u32> = HashMap::new();
        let mut blocks: Vec<Vec<u32>> = Vec::new();
        let mut block_of = Vec::with_capacity(labels.len());
        for (s, l) in labels.iter().enumerate() {
            let b = *first_seen.entry(l).or_insert_with(|| {
                blocks.push(Vec::new());
                (blocks.len() - 1) as u32
            });
            blocks[b as usize].push(s as u32);
            block_of.push(b);
        }
        // species are visited in ascending order, so blocks are already ordered
        // by their smallest member and members are sorted
        Self { blocks, block_of }
    }

    pub fn num_species(&self) -> usize {
        self.block_of.len()
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn block(&self, b: usize) -> impl ExactSizeIterator<Item = usize> + '_ {
        self.blocks[b].iter().map(|&s| s as usize)
    }

    pub fn block_len(&self, b: usize) -> usize {
        self.blocks[b].len()
    }

    pub fn blocks(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        self.blocks.iter().map(|b| b.iter().map(|&s| s as usize).collect())
    }

    pub fn block_of(&self, species: usize) -> usize {
        self.block_of[species] as usize
    }

    /// Representative of block `b`: its smallest species index.
    pub fn representative(&self, b: usize) -> usize {
        self.blocks[b][0] as usize
    }

    pub fn is_discrete(&self) -> bool {
        self.blocks.len() == self.block_of.len()
    }

    /// True iff every block of `self` lies inside a block of `coarse`.
    pub fn refines(&self, coarse: &Partition) -> Result<bool, ModelError> {
        if self.num_species() != coarse.num_species() {
            return Err(ModelError::UniverseMismatch { expected: coarse.num_species(), found: self.num_species() });
        }
        Ok(self.blocks.iter().all(|block| {
            let target = coarse.block_of[block[0] as usize];
            block.iter().all(|&s| coarse.block_of[s as usize] == target)
        }))
    }

    /// Per-block cumulative counts of `sigma`.
    pub fn project(&self, sigma: &Multiset) -> Result<BlockProjection, ModelError> {
        if let Some(s) = sigma.max_species() {
            if s >= self.num_species() {
                return Err(ModelError::SpeciesOutOfRange { species: s, len: self.num_species() });
            }
        }
        Ok(self.project_unchecked(sigma))
    }

    pub(crate) fn project_unchecked(&self, sigma: &Multiset) -> BlockProjection {
        let mut counts: Vec<(u32, u32)> = sigma.iter().map(|(s, c)| (self.block_of[s], c)).collect();
        counts.sort_unstable_by_key(|&(b, _)| b);
        counts.dedup_by(|next, kept| {
            if next.0 == kept.0 {
                kept.1 += next.1;
                true
            } else {
                false
            }
        });
        BlockProjection { counts }
    }
}

/// Per-block cumulative count vector of a multiset under a partition.
///
/// Stored sparsely as `(block, count)` pairs with zero blocks omitted; use
/// [`BlockProjection::to_dense`] for the full vector indexed by block id. Two
/// multisets lie in the same class of the multiset lifting iff their
/// projections are equal.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BlockProjection {
    counts: Vec<(u32, u32)>,
}

impl BlockProjection {
    pub fn get(&self, block: usize) -> u32 {
        match self.counts.binary_search_by_key(&(block as u32), |&(b, _)| b) {
            Ok(pos) => self.counts[pos].1,
            Err(_) => 0,
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().map(|&(_, c)| u64::from(c)).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, u32)> + '_ {
        self.counts.iter().map(|&(b, c)| (b as usize, c))
    }

    pub fn to_dense(&self, num_blocks: usize) -> Vec<u32> {
        let mut out = vec![0; num_blocks];
        for (b, c) in self.iter() {
            out[b] = c;
        }
        out
    }
}

/// Convenience wrapper for [`Partition::project`].
pub fn block_projection(sigma: &Multiset, part: &Partition) -> Result<BlockProjection, ModelError> {
    part.project(sigma)
}
