//! Brute-force reference implementations shared by the integration tests.
#![allow(dead_code)]

use std::sync::Arc;

use itertools::Itertools;
use nalgebra::DMatrix;
use polysymp::exterior::combinations;
use polysymp::{GradedBasis, Multivector};
use rand::Rng;

/// Determinant by the Leibniz sum over all permutations.
pub fn leibniz_det(m: &[Vec<f64>]) -> f64 {
    let n = m.len();
    (0..n)
        .permutations(n)
        .map(|perm| {
            let inversions = (0..n)
                .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
                .filter(|&(i, j)| perm[i] > perm[j])
                .count();
            let sign = if inversions % 2 == 0 { 1.0 } else { -1.0 };
            sign * (0..n).map(|i| m[i][perm[i]]).product::<f64>()
        })
        .sum()
}

/// Largest violation of the Grassmann–Plücker relations
/// `Σ_l (-1)^l X_{I j_l} X_{J \ j_l} = 0`, relative to `max|X|²`.
pub fn plucker_defect(x: &Multivector) -> f64 {
    let (d, k) = (x.dim(), x.grade());
    let scale = x.max_abs().powi(2);
    if k <= 1 || k >= d - 1 || scale == 0.0 {
        return 0.0;
    }
    let mut worst = 0.0_f64;
    for i in combinations(d, k - 1) {
        for j in combinations(d, k + 1) {
            let mut sum = 0.0;
            for l in 0..=k {
                let mut left = i.clone();
                left.push(j[l]);
                let right: Vec<usize> = j.iter().enumerate().filter(|&(m, _)| m != l).map(|(_, &v)| v).collect();
                let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
                sum += sign * x.get(&left) * x.get(&right);
            }
            worst = worst.max(sum.abs());
        }
    }
    worst / scale
}

/// Dimension of `{v : v ∧ X = 0}` from the singular values of the dense map.
pub fn dense_annihilator_dim(x: &Multivector) -> usize {
    let d = x.dim();
    let rows = combinations(d, x.grade() + 1).len().max(1);
    let mut m = DMatrix::zeros(rows, d);
    for i in 0..d {
        let e = Multivector::unit(x.basis(), i).unwrap();
        let dense = if x.grade() == d { vec![0.0] } else { e.wedge(x).unwrap().to_dense() };
        for (r, v) in dense.iter().enumerate() {
            m[(r, i)] = *v;
        }
    }
    let sv = m.svd(false, false).singular_values;
    let tol = 1e-9 * sv.max().max(1.0);
    d - sv.iter().filter(|s| **s > tol).count()
}

pub fn random_vec<R: Rng>(rng: &mut R, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.gen_range(-1.0..=1.0)).collect()
}

pub fn random_multivector<R: Rng>(rng: &mut R, basis: &Arc<GradedBasis>, grade: usize) -> Multivector {
    let len = combinations(basis.dim(), grade).len();
    Multivector::from_dense(basis, grade, &random_vec(rng, len)).unwrap()
}

pub fn random_decomposable<R: Rng>(rng: &mut R, basis: &Arc<GradedBasis>, grade: usize) -> Multivector {
    let factors: Vec<Multivector> = (0..grade)
        .map(|_| Multivector::from_components(basis, &random_vec(rng, basis.dim())).unwrap())
        .collect();
    Multivector::wedge_all(basis, &factors).unwrap()
}

/// Order of convergence between successive refinements by a factor 2.
pub fn orders(errors: &[f64]) -> Vec<f64> {
    errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}
