use std::sync::Arc;

use crate::error::{Error, Result};
use crate::phase_space::PhaseSpaceShape;

/// Ordered coordinate labels of a finite-dimensional real vector space.
///
/// Bases built from a [`PhaseSpaceShape`] remember it, so that coordinate
/// blocks (x, v, p, e) can be recovered from an index.
#[derive(Debug, Clone, PartialEq)]
pub struct GradedBasis {
    labels: Vec<String>,
    shape: Option<PhaseSpaceShape>,
}

impl GradedBasis {
    /// `e1 … eD` with no block structure.
    pub fn plain(dim: usize) -> Arc<Self> {
        Arc::new(Self {
            labels: (1..=dim).map(|i| format!("e{i}")).collect(),
            shape: None,
        })
    }

    pub fn with_labels<S: Into<String>>(labels: impl IntoIterator<Item = S>) -> Result<Arc<Self>> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        check_unique(&labels)?;
        Ok(Arc::new(Self {
            labels,
            shape: None,
        }))
    }

    pub(crate) fn for_shape(labels: Vec<String>, shape: PhaseSpaceShape) -> Result<Arc<Self>> {
        check_unique(&labels)?;
        if labels.len() != shape.dim() {
            return Err(Error::DimensionMismatch {
                expected: shape.dim(),
                found: labels.len(),
            });
        }
        Ok(Arc::new(Self {
            labels,
            shape: Some(shape),
        }))
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn shape(&self) -> Option<&PhaseSpaceShape> {
        self.shape.as_ref()
    }
}

fn check_unique(labels: &[String]) -> Result<()> {
    let mut sorted: Vec<&String> = labels.iter().collect();
    sorted.sort();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidInput("basis labels must be unique".into()));
    }
    Ok(())
}

pub(crate) fn same_basis(a: &Arc<GradedBasis>, b: &Arc<GradedBasis>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

/// Diagonal scalar product.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct Metric {
    diagonal: Vec<f64>,
}

impl Metric {
    pub fn diagonal(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidMetric("empty signature".into()));
        }
        if let Some(bad) = entries.iter().find(|g| **g == 0.0 || !g.is_finite()) {
            return Err(Error::InvalidMetric(format!("diagonal entry {bad}")));
        }
        Ok(Self { diagonal: entries })
    }

    pub fn euclidean(dim: usize) -> Self {
        Self {
            diagonal: vec![1.0; dim],
        }
    }

    /// `diag(+1, -1, …, -1)`, time first.
    pub fn minkowski(dim: usize) -> Self {
        let mut diagonal = vec![-1.0; dim];
        if let Some(t) = diagonal.first_mut() {
            *t = 1.0;
        }
        Self { diagonal }
    }

    pub fn dim(&self) -> usize {
        self.diagonal.len()
    }

    /// Lower-index component `g_ii`.
    pub fn entry(&self, i: usize) -> f64 {
        self.diagonal[i]
    }

    /// Upper-index component `g^ii`.
    pub fn inverse_entry(&self, i: usize) -> f64 {
        1.0 / self.diagonal[i]
    }

    pub fn entries(&self) -> &[f64] {
        &self.diagonal
    }

    pub fn determinant(&self) -> f64 {
        self.diagonal.iter().product()
    }

    /// `g(a, b)` for component vectors.
    pub fn inner(&self, a: &[f64], b: &[f64]) -> f64 {
        self.diagonal
            .iter()
            .zip(a.iter().zip(b))
            .map(|(g, (x, y))| g * x * y)
            .sum()
    }
}
