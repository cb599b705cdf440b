//! Case-study networks: SIR with vaccination on a star or on an arbitrary
//! weighted graph, and substrates with `n` independent binding sites.

use thiserror::Error;

use crate::model::{Ccrn, ModelError, Multiset, Partition, RateInterval};
use crate::parser::{ModelDocument, WeightedGraph};
use crate::scalar::Scalar;

pub const DEFAULT_MAX_SITES: u32 = 20;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GenError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("need n ≥ {min}, got {n}")]
    TooSmall { n: usize, min: usize },
    #[error("n = {n} exceeds the cap of {max}")]
    TooLarge { n: usize, max: usize },
    #[error("parameter `{name}` must be finite and nonnegative, got {value}")]
    BadParameter { name: &'static str, value: f64 },
    #[error("edge {src} -> {dst}: weight {weight} minus halfwidth {halfwidth} is negative")]
    NegativeInterval { src: String, dst: String, weight: f64, halfwidth: f64 },
}

/// Infection scale `beta`, recovery `gamma`, immunity loss `eta` and the
/// vaccination interval.
#[derive(Clone, Debug, PartialEq)]
pub struct SirParams<S> {
    pub beta: S,
    pub gamma: S,
    pub eta: S,
    pub vac: RateInterval<S>,
}

impl<S: Scalar> SirParams<S> {
    pub fn new(beta: S, gamma: S, eta: S, vac: RateInterval<S>) -> Result<Self, GenError> {
        for (name, value) in [("beta", beta), ("gamma", gamma), ("eta", eta)] {
            if !(value >= S::zero() && value.is_finite()) {
                return Err(GenError::BadParameter { name, value: value.as_f64() });
            }
        }
        if vac.lo() < S::zero() {
            return Err(GenError::BadParameter { name: "vac", value: vac.lo().as_f64() });
        }
        Ok(Self { beta, gamma, eta, vac })
    }

    /// Vaccination on `[0, 1]`.
    pub fn with_unit_vaccination(beta: S, gamma: S, eta: S) -> Result<Self, GenError> {
        Self::new(beta, gamma, eta, RateInterval::new(S::zero(), S::one())?)
    }
}

/// Species indices of location `i` (0-based) in the interleaved layout.
fn sirv(i: usize) -> [usize; 4] {
    [4 * i, 4 * i + 1, 4 * i + 2, 4 * i + 3]
}

/// Declares `S_i I_i R_i V_i` for every location and the three local reactions.
fn sir_locations<S: Scalar>(n: usize, p: &SirParams<S>) -> Result<crate::model::CcrnBuilder<S>, GenError> {
    let mut b = Ccrn::builder();
    for i in 1..=n {
        for kind in ["S", "I", "R", "V"] {
            b.add_species(&format!("{kind}{i}"))?;
        }
    }
    let point = |k: S| RateInterval::point(k);
    for i in 0..n {
        let [s, inf, r, v] = sirv(i);
        let one = Multiset::singleton;
        b.add_reaction(None, one(s), Multiset::from_counts([(r, 1), (v, 1)]), p.vac);
        b.add_reaction(None, one(inf), one(r), point(p.gamma)?);
        b.add_reaction(None, one(r), one(s), point(p.eta)?);
    }
    Ok(b)
}

/// `S_dst + I_src -> I_dst + I_src`.
fn infection(src: usize, dst: usize) -> (Multiset, Multiset) {
    let [s, _, _, _] = sirv(dst);
    let [_, inf_src, _, _] = sirv(src);
    let [_, inf_dst, _, _] = sirv(dst);
    (Multiset::from_counts([(s, 1), (inf_src, 1)]), Multiset::from_counts([(inf_dst, 1), (inf_src, 1)]))
}

/// Star with centre `1`: infections only between the centre and a leaf.
/// Initial partition `{S1}, {I1}, {R1}, {V1..Vn}` and everything else.
pub fn gen_sir_star<S: Scalar>(n: usize, p: &SirParams<S>) -> Result<ModelDocument<S>, GenError> {
    if n < 2 {
        return Err(GenError::TooSmall { n, min: 2 });
    }
    let mut b = sir_locations(n, p)?;
    let rate = RateInterval::point(p.beta)?;
    for leaf in 1..n {
        let (rho, pi) = infection(leaf, 0);
        b.add_reaction(None, rho, pi, rate);
        let (rho, pi) = infection(0, leaf);
        b.add_reaction(None, rho, pi, rate);
    }
    let ccrn = b.build()?;
    let labels: Vec<usize> = (0..4 * n)
        .map(|s| match (s / 4, s % 4) {
            (_, 3) => 3,
            (0, k) => k,
            _ => 4,
        })
        .collect();
    Ok(ModelDocument::new(ccrn, Some(Partition::from_labels(&labels))))
}

/// One infection reaction `S_j + I_i -> I_j + I_i` per edge `i -> j`, at rate
/// `beta * w`, or on `[beta (w - hw), beta (w + hw)]` with a halfwidth.
/// Nodes keep the graph's order and are numbered from 1. Initial partition
/// groups species by type.
pub fn gen_sir_network<S: Scalar>(
    graph: &WeightedGraph<S>,
    p: &SirParams<S>,
    halfwidth: Option<S>,
) -> Result<ModelDocument<S>, GenError> {
    let n = graph.num_nodes();
    if n == 0 {
        return Err(GenError::TooSmall { n, min: 1 });
    }
    let mut b = sir_locations(n, p)?;
    for &(src, dst, w) in &graph.edges {
        let rate = match halfwidth {
            None => RateInterval::point(p.beta * w)?,
            Some(hw) => {
                if w - hw < S::zero() {
                    return Err(GenError::NegativeInterval {
                        src: graph.labels[src].clone(),
                        dst: graph.labels[dst].clone(),
                        weight: w.as_f64(),
                        halfwidth: hw.as_f64(),
                    });
                }
                RateInterval::new(p.beta * (w - hw), p.beta * (w + hw))?
            }
        };
        let (rho, pi) = infection(src, dst);
        b.add_reaction(None, rho, pi, rate);
    }
    let ccrn = b.build()?;
    let labels: Vec<usize> = (0..4 * n).map(|s| s % 4).collect();
    Ok(ModelDocument::new(ccrn, Some(Partition::from_labels(&labels))))
}

/// Undirected star on `n` nodes labelled `1..=n` with centre `1`.
pub fn star_graph<S: Scalar>(n: usize, weight: S) -> WeightedGraph<S> {
    let labels = (1..=n).map(|i| i.to_string()).collect();
    let edges = (1..n).flat_map(|leaf| [(0, leaf, weight), (leaf, 0, weight)]).collect();
    WeightedGraph { labels, edges }
}

/// Number of blocks with a non-`V` species over the number of non-`V` species.
/// Vaccination counters are never reactants, so they always share one block and
/// are left out of the ratio.
pub fn sir_reduction_ratio<S: Scalar>(ccrn: &Ccrn<S>, part: &Partition) -> f64 {
    let counted = |s: usize| !ccrn.species_name(s).starts_with('V');
    let species = (0..ccrn.num_species()).filter(|&s| counted(s)).count();
    let blocks = (0..part.num_blocks()).filter(|&b| part.block(b).any(counted)).count();
    blocks as f64 / species.max(1) as f64
}

/// Species `B` and `A<bits>` for every bit string of length `n`, where bit `i`
/// is 1 when site `i` is occupied. Every free site has an association
/// `A_b + B -> A_{b + e_i}` followed by its dissociation. Initial partition: a
/// single block.
pub fn gen_multisite<S: Scalar>(
    n: u32,
    assoc: RateInterval<S>,
    dissoc: RateInterval<S>,
) -> Result<ModelDocument<S>, GenError> {
    gen_multisite_capped(n, assoc, dissoc, DEFAULT_MAX_SITES)
}

pub fn gen_multisite_capped<S: Scalar>(
    n: u32,
    assoc: RateInterval<S>,
    dissoc: RateInterval<S>,
    max_sites: u32,
) -> Result<ModelDocument<S>, GenError> {
    if n < 1 {
        return Err(GenError::TooSmall { n: n as usize, min: 1 });
    }
    if n > max_sites {
        return Err(GenError::TooLarge { n: n as usize, max: max_sites as usize });
    }
    let bits = |m: usize| -> String { (0..n).map(|i| if m >> i & 1 == 1 { '1' } else { '0' }).collect() };
    let mut names: Vec<(String, usize)> = (0..1usize << n).map(|m| (bits(m), m)).collect();
    names.sort();
    // species index of configuration m (B is 0)
    let mut index = vec![0usize; 1 << n];
    let mut b = Ccrn::builder();
    let binder = b.add_species("B")?;
    for (name, m) in &names {
        index[*m] = b.add_species(&format!("A{name}"))?;
    }
    for m in 0..1usize << n {
        for site in 0..n {
            if m >> site & 1 == 1 {
                continue;
            }
            let bound = m | 1 << site;
            let free = Multiset::from_counts([(binder, 1), (index[m], 1)]);
            b.add_reaction(None, free.clone(), Multiset::singleton(index[bound]), assoc);
            b.add_reaction(None, Multiset::singleton(index[bound]), free, dissoc);
        }
    }
    let ccrn = b.build()?;
    let all = Partition::trivial(ccrn.num_species());
    Ok(ModelDocument::new(ccrn, Some(all)))
}

pub fn default_assoc<S: Scalar>() -> RateInterval<S> {
    RateInterval::new(S::lit(9.95), S::lit(10.05)).expect("ordered bounds")
}

pub fn default_dissoc<S: Scalar>() -> RateInterval<S> {
    RateInterval::new(S::lit(0.05), S::lit(0.15)).expect("ordered bounds")
}
