//! Annihilators and decomposability of multivectors.
//!
//! A nonzero `k`-vector `X` is decomposable (a wedge of `k` vectors) exactly
//! when the space `{v : v ∧ X = 0}` has dimension `k`; it can never exceed
//! `k`. When it is decomposable, any basis of that space wedges to a
//! multiple of `X`.

use std::collections::HashMap;

use serde::Serialize;

use super::alternating::{combinations, Multivector};
use crate::error::{Error, Result};
use crate::linalg::{null_space, PIVOT_TOLERANCE};

#[derive(Debug, Clone)]
pub struct DecomposabilityReport {
    pub decomposable: bool,
    pub annihilator_dim: usize,
    /// Annihilator basis; present only when decomposable.
    pub factors: Option<Vec<Multivector>>,
    /// `scale * (factors wedged) == X`; `0.0` when not decomposable.
    pub scale: f64,
}

/// Serializable summary of a [`DecomposabilityReport`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecomposabilitySummary {
    pub decomposable: bool,
    pub annihilator_dim: usize,
    pub grade: usize,
    pub scale: f64,
    pub factors: Option<Vec<Vec<f64>>>,
}

impl DecomposabilityReport {
    pub fn summary(&self, grade: usize) -> DecomposabilitySummary {
        DecomposabilitySummary {
            decomposable: self.decomposable,
            annihilator_dim: self.annihilator_dim,
            grade,
            scale: self.scale,
            factors: self
                .factors
                .as_ref()
                .map(|f| f.iter().map(Multivector::components).collect()),
        }
    }
}

/// Basis of `{v : v ∧ X = 0}` as grade-1 multivectors.
pub fn annihilator(x: &Multivector) -> Result<Vec<Multivector>> {
    if x.is_zero() {
        return Err(Error::ZeroMultivector);
    }
    let basis = x.basis();
    let dim = basis.dim();
    let k = x.grade();
    let kernel = if k == dim {
        (0..dim)
            .map(|i| {
                let mut v = vec![0.0; dim];
                v[i] = 1.0;
                v
            })
            .collect()
    } else {
        // rows: (k+1)-monomials, columns: components of v
        let row_index: HashMap<Vec<usize>, usize> = combinations(dim, k + 1)
            .into_iter()
            .enumerate()
            .map(|(i, c)| (c, i))
            .collect();
        let mut rows = vec![vec![0.0; dim]; row_index.len()];
        for i in 0..dim {
            let wedged = Multivector::unit(basis, i)?.wedge(x)?;
            for (key, c) in wedged.terms() {
                rows[row_index[key]][i] = c;
            }
        }
        rows.retain(|r| r.iter().any(|v| *v != 0.0));
        if rows.is_empty() {
            rows.push(vec![0.0; dim]);
        }
        orthonormalize(null_space(&rows, dim, PIVOT_TOLERANCE))
    };
    kernel
        .iter()
        .map(|v| Multivector::from_components(basis, v))
        .collect()
}

/// Decomposability test via the annihilator dimension.
pub fn is_decomposable(x: &Multivector) -> Result<DecomposabilityReport> {
    if x.grade() == 0 {
        return Err(Error::InvalidInput(
            "decomposability needs grade >= 1".into(),
        ));
    }
    let ann = annihilator(x)?;
    let annihilator_dim = ann.len();
    if annihilator_dim != x.grade() {
        return Ok(DecomposabilityReport {
            decomposable: false,
            annihilator_dim,
            factors: None,
            scale: 0.0,
        });
    }
    let wedge = Multivector::wedge_all(x.basis(), &ann)?;
    let scale = x.dot(&wedge)? / wedge.dot(&wedge)?;
    Ok(DecomposabilityReport {
        decomposable: true,
        annihilator_dim,
        factors: Some(ann),
        scale,
    })
}

/// Modified Gram-Schmidt; drops vectors that become numerically zero.
fn orthonormalize(vectors: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(vectors.len());
    for mut v in vectors {
        for q in &out {
            let d: f64 = v.iter().zip(q).map(|(a, b)| a * b).sum();
            for (a, b) in v.iter_mut().zip(q) {
                *a -= d * b;
            }
        }
        let n = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if n > 1e-12 {
            v.iter_mut().for_each(|a| *a /= n);
            out.push(v);
        }
    }
    out
}
