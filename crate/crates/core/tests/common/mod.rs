#![allow(dead_code)]

use crnlump::model::{Ccrn, Multiset, Partition};
use proptest::prelude::*;

/// Quarter-integer rates keep every sum exact.
fn rate() -> impl Strategy<Value = (f64, f64)> {
    (0u32..8, 0u32..4).prop_map(|(lo, w)| (f64::from(lo) / 4.0, f64::from(lo + w) / 4.0))
}

fn multiset(species: usize, min: u32, max: u32) -> impl Strategy<Value = Multiset> {
    proptest::collection::vec(0..species, min as usize..=max as usize)
        .prop_map(|v| Multiset::from_counts(v.into_iter().map(|s| (s, 1))))
}

/// `(reactant, product, lo, hi)` with reactant size 1..=2.
pub fn reaction(species: usize, conservative: bool) -> impl Strategy<Value = (Multiset, Multiset, f64, f64)> {
    (multiset(species, 1, 2), rate()).prop_flat_map(move |(rho, (lo, hi))| {
        let max = if conservative { rho.size() as u32 } else { 2 };
        (Just(rho), multiset(species, 0, max), Just(lo), Just(hi))
    })
}

pub fn build(species: usize, reactions: Vec<(Multiset, Multiset, f64, f64)>) -> Ccrn<f64> {
    let mut b = Ccrn::builder();
    for s in 0..species {
        b.add_species(&format!("X{s}")).unwrap();
    }
    for (rho, pi, lo, hi) in reactions {
        b.add_reaction(None, rho, pi, crnlump::model::RateInterval::new(lo, hi).unwrap());
    }
    b.build().unwrap()
}

/// Networks with 2..=max_species species and up to 8 reactions.
pub fn network(max_species: usize, conservative: bool) -> impl Strategy<Value = Ccrn<f64>> {
    (2..=max_species).prop_flat_map(move |n| {
        proptest::collection::vec(reaction(n, conservative), 0..=8).prop_map(move |rs| build(n, rs))
    })
}

pub fn labels(n: usize) -> impl Strategy<Value = Vec<usize>> {
    proptest::collection::vec(0..n, n)
}

pub fn partition(labels: &[usize]) -> Partition {
    Partition::from_labels(labels)
}

/// Every set partition of `0..n`, via restricted growth strings.
pub fn all_partitions(n: usize) -> Vec<Partition> {
    fn grow(prefix: &mut Vec<usize>, n: usize, out: &mut Vec<Partition>) {
        if prefix.len() == n {
            out.push(Partition::from_labels(prefix));
            return;
        }
        let next = prefix.iter().max().map_or(0, |m| m + 1);
        for l in 0..=next {
            prefix.push(l);
            grow(prefix, n, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    grow(&mut Vec::new(), n, &mut out);
    out
}
