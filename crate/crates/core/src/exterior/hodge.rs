use super::alternating::{merge_sorted, Multivector};
use super::basis::Metric;
use crate::error::{Error, Result};

/// Hodge dual of a multivector with respect to a diagonal metric.
///
/// Defined by `A ∧ ∗B = g(A, B) · vol` with `vol = e_1 ∧ … ∧ e_D / sqrt|det g|`,
/// which on monomials gives `∗e_I = ε_{I J} (Π_{i∈I} g_ii) / sqrt|det g| · e_J`
/// for the complementary index set `J`. Then `∗∗X = (-1)^{k(D-k)} sign(det g) X`.
pub fn hodge_star(x: &Multivector, metric: &Metric) -> Result<Multivector> {
    let dim = x.dim();
    if metric.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: metric.dim(),
        });
    }
    let volume = metric.determinant().abs().sqrt();
    let terms = x.terms().map(|(idx, c)| {
        let complement: Vec<usize> = (0..dim).filter(|i| !idx.contains(i)).collect();
        let (_, eps) = merge_sorted(idx, &complement).expect("disjoint by construction");
        let lowered: f64 = idx.iter().map(|&i| metric.entry(i)).product();
        (complement, eps * lowered * c / volume)
    });
    Multivector::from_terms(x.basis(), dim - x.grade(), terms)
}
