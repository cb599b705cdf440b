//! Shared fixtures for unit tests.

use crate::model::{Ccrn, Partition};
use crate::scalar::Scalar;

/// Example binding network with two sites; species order B A00 A01 A10 A11.
/// Rates are dyadic so that symmetric sums are exact.
pub fn example1_generic<S: Scalar>() -> Ccrn<S> {
    build(|_, lo, hi| (lo, hi))
}

pub fn example1() -> Ccrn<f64> {
    example1_generic()
}

/// Example network with reaction `i` (1-based) given bounds `f(i, lo, hi)`.
pub fn example1_with(f: impl Fn(usize, f64, f64) -> (f64, f64)) -> Ccrn<f64> {
    build(f)
}

pub const EXAMPLE1_BOUNDS: [(f64, f64); 8] =
    [(1.5, 2.5), (0.25, 0.75), (1.5, 2.5), (0.25, 0.75), (1.25, 1.75), (0.5, 1.0), (1.25, 1.75), (0.5, 1.0)];

fn build<S: Scalar>(f: impl Fn(usize, f64, f64) -> (f64, f64)) -> Ccrn<S> {
    let mut b = Ccrn::<S>::builder();
    for name in ["B", "A00", "A01", "A10", "A11"] {
        b.add_species(name).unwrap();
    }
    type Side = &'static [(&'static str, u32)];
    let shape: [(Side, Side); 8] = [
        (&[("A00", 1), ("B", 1)], &[("A10", 1)]),
        (&[("A10", 1)], &[("A00", 1), ("B", 1)]),
        (&[("A00", 1), ("B", 1)], &[("A01", 1)]),
        (&[("A01", 1)], &[("A00", 1), ("B", 1)]),
        (&[("A10", 1), ("B", 1)], &[("A11", 1)]),
        (&[("A11", 1)], &[("A10", 1), ("B", 1)]),
        (&[("A01", 1), ("B", 1)], &[("A11", 1)]),
        (&[("A11", 1)], &[("A01", 1), ("B", 1)]),
    ];
    for (i, (reactant, product)) in shape.iter().enumerate() {
        let (lo, hi) = EXAMPLE1_BOUNDS[i];
        let (lo, hi) = f(i + 1, lo, hi);
        b.reaction(reactant, product, S::lit(lo), S::lit(hi)).unwrap();
    }
    b.build().unwrap()
}

/// {B}, {A00}, {A01, A10}, {A11}
pub fn example2_partition() -> Partition {
    Partition::from_blocks(5, vec![vec![0], vec![1], vec![2, 3], vec![4]]).unwrap()
}
