//! Sparse storage shared by multivectors and forms.

use std::collections::BTreeMap;
use std::fmt;
use std::marker::PhantomData;
use std::sync::Arc;

use itertools::Itertools;

use super::basis::{same_basis, GradedBasis};
use crate::error::{Error, Result};

/// Marker for contravariant (vector-like) tensors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Contravariant {}

/// Marker for covariant (form-like) tensors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Covariant {}

/// A homogeneous antisymmetric tensor of fixed grade.
///
/// Terms are keyed by strictly increasing index tuples; a zero coefficient is
/// never stored. The coefficient of `e_I` is the component with respect to
/// `e_{i1} ∧ … ∧ e_{ik}`, where the wedge is the full alternating sum
/// (no `1/k!`).
pub struct Alternating<K> {
    basis: Arc<GradedBasis>,
    grade: usize,
    terms: BTreeMap<Vec<usize>, f64>,
    kind: PhantomData<K>,
}

impl<K> Clone for Alternating<K> {
    fn clone(&self) -> Self {
        Self {
            basis: Arc::clone(&self.basis),
            grade: self.grade,
            terms: self.terms.clone(),
            kind: PhantomData,
        }
    }
}

impl<K> PartialEq for Alternating<K> {
    fn eq(&self, other: &Self) -> bool {
        same_basis(&self.basis, &other.basis) && self.grade == other.grade && self.terms == other.terms
    }
}

pub type Multivector = Alternating<Contravariant>;
pub type Form = Alternating<Covariant>;

/// Sorts `indices` in place and returns the parity of the permutation, or
/// `None` if an index repeats.
pub(crate) fn sort_with_sign(indices: &mut [usize]) -> Option<f64> {
    let mut sign = 1.0;
    for i in 1..indices.len() {
        let mut j = i;
        while j > 0 && indices[j - 1] > indices[j] {
            indices.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
        if j > 0 && indices[j - 1] == indices[j] {
            return None;
        }
    }
    Some(sign)
}

/// Merges two sorted tuples; the sign is the parity of the shuffle.
pub(crate) fn merge_sorted(a: &[usize], b: &[usize]) -> Option<(Vec<usize>, f64)> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let mut inversions = 0usize;
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                inversions += a.len() - i;
                j += 1;
            }
            std::cmp::Ordering::Equal => return None,
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    let sign = if inversions % 2 == 0 { 1.0 } else { -1.0 };
    Some((out, sign))
}

/// All strictly increasing `k`-tuples from `0..dim`, in lexicographic order.
pub fn combinations(dim: usize, k: usize) -> Vec<Vec<usize>> {
    (0..dim).combinations(k).collect()
}

impl<K> Alternating<K> {
    pub fn zero(basis: &Arc<GradedBasis>, grade: usize) -> Result<Self> {
        if grade > basis.dim() {
            return Err(Error::GradeOverflow {
                grade,
                dim: basis.dim(),
            });
        }
        Ok(Self {
            basis: Arc::clone(basis),
            grade,
            terms: BTreeMap::new(),
            kind: PhantomData,
        })
    }

    pub fn scalar(basis: &Arc<GradedBasis>, value: f64) -> Self {
        let mut s = Self::zero(basis, 0).expect("grade 0 always fits");
        s.accumulate(Vec::new(), value);
        s
    }

    /// Builds a grade-`grade` element from arbitrary (possibly unsorted or
    /// repeated) index tuples, canonicalising each term.
    pub fn from_terms<I>(basis: &Arc<GradedBasis>, grade: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<usize>, f64)>,
    {
        let mut out = Self::zero(basis, grade)?;
        for (mut idx, c) in terms {
            if idx.len() != grade {
                return Err(Error::GradeMismatch {
                    expected: grade,
                    found: idx.len(),
                });
            }
            if let Some(&bad) = idx.iter().find(|&&i| i >= basis.dim()) {
                return Err(Error::IndexOutOfRange {
                    index: bad,
                    dim: basis.dim(),
                });
            }
            if let Some(sign) = sort_with_sign(&mut idx) {
                out.accumulate(idx, sign * c);
            }
        }
        Ok(out)
    }

    /// Grade-1 element from dense components.
    pub fn from_components(basis: &Arc<GradedBasis>, components: &[f64]) -> Result<Self> {
        if components.len() != basis.dim() {
            return Err(Error::DimensionMismatch {
                expected: basis.dim(),
                found: components.len(),
            });
        }
        Self::from_terms(
            basis,
            1,
            components.iter().enumerate().map(|(i, &c)| (vec![i], c)),
        )
    }

    /// The `i`-th basis element of grade 1.
    pub fn unit(basis: &Arc<GradedBasis>, i: usize) -> Result<Self> {
        Self::from_terms(basis, 1, [(vec![i], 1.0)])
    }

    /// Grade-`k` element from dense components in [`combinations`] order.
    pub fn from_dense(basis: &Arc<GradedBasis>, grade: usize, dense: &[f64]) -> Result<Self> {
        let combos = combinations(basis.dim(), grade);
        if combos.len() != dense.len() {
            return Err(Error::DimensionMismatch {
                expected: combos.len(),
                found: dense.len(),
            });
        }
        Self::from_terms(basis, grade, combos.into_iter().zip(dense.iter().copied()))
    }

    pub(crate) fn accumulate(&mut self, key: Vec<usize>, value: f64) {
        if value == 0.0 {
            return;
        }
        let entry = self.terms.entry(key);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(value);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let sum = *o.get() + value;
                if sum == 0.0 {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    pub fn basis(&self) -> &Arc<GradedBasis> {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn grade(&self) -> usize {
        self.grade
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Coefficient of the monomial `indices` (any order; sign applied).
    pub fn get(&self, indices: &[usize]) -> f64 {
        let mut idx = indices.to_vec();
        match sort_with_sign(&mut idx) {
            Some(sign) => sign * self.terms.get(&idx).copied().unwrap_or(0.0),
            None => 0.0,
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[usize], f64)> + '_ {
        self.terms.iter().map(|(k, v)| (k.as_slice(), *v))
    }

    /// Dense coefficients in [`combinations`] order.
    pub fn to_dense(&self) -> Vec<f64> {
        combinations(self.dim(), self.grade)
            .iter()
            .map(|c| self.terms.get(c).copied().unwrap_or(0.0))
            .collect()
    }

    /// Euclidean norm of the coefficient vector.
    pub fn norm(&self) -> f64 {
        self.terms.values().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.terms.values().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// Coefficient-space inner product.
    pub fn dot(&self, other: &Self) -> Result<f64> {
        self.check_compatible(other)?;
        Ok(self
            .terms
            .iter()
            .filter_map(|(k, v)| other.terms.get(k).map(|w| v * w))
            .sum())
    }

    pub fn scale(&self, factor: f64) -> Self {
        let mut out = Self {
            basis: Arc::clone(&self.basis),
            grade: self.grade,
            terms: BTreeMap::new(),
            kind: PhantomData,
        };
        for (k, v) in &self.terms {
            out.accumulate(k.clone(), v * factor);
        }
        out
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.axpy(1.0, other)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.axpy(-1.0, other)
    }

    /// `self + factor * other`.
    pub fn axpy(&self, factor: f64, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (k, v) in &other.terms {
            out.accumulate(k.clone(), factor * v);
        }
        Ok(out)
    }

    /// Exterior product. Errors when the grades add up past the dimension.
    pub fn wedge(&self, other: &Self) -> Result<Self> {
        if !same_basis(&self.basis, &other.basis) {
            return Err(Error::BasisMismatch);
        }
        let mut out = Self::zero(&self.basis, self.grade + other.grade)?;
        for (a, x) in &self.terms {
            for (b, y) in &other.terms {
                if let Some((key, sign)) = merge_sorted(a, b) {
                    out.accumulate(key, sign * x * y);
                }
            }
        }
        Ok(out)
    }

    /// `f_1 ∧ … ∧ f_k`; the empty product is the scalar 1.
    pub fn wedge_all(basis: &Arc<GradedBasis>, factors: &[Self]) -> Result<Self> {
        factors
            .iter()
            .try_fold(Self::scalar(basis, 1.0), |acc, f| acc.wedge(f))
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if !same_basis(&self.basis, &other.basis) {
            return Err(Error::BasisMismatch);
        }
        if self.grade != other.grade {
            return Err(Error::GradeMismatch {
                expected: self.grade,
                found: other.grade,
            });
        }
        Ok(())
    }
}

impl Multivector {
    /// Contravariant components of a grade-1 multivector.
    pub fn components(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        if self.grade == 1 {
            for (k, v) in &self.terms {
                out[k[0]] = *v;
            }
        }
        out
    }
}

impl Form {
    /// Covariant components of a 1-form.
    pub fn components(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        if self.grade == 1 {
            for (k, v) in &self.terms {
                out[k[0]] = *v;
            }
        }
        out
    }

    /// Value of a 0-form.
    pub fn scalar_value(&self) -> f64 {
        if self.grade == 0 {
            self.terms.get(&Vec::new()).copied().unwrap_or(0.0)
        } else {
            0.0
        }
    }
}

/// Interior product `X ⌟ w`: the factors of `X` fill the first slots of `w`
/// in order, `(Z_1 ∧ … ∧ Z_k) ⌟ w = w(Z_1, …, Z_k, ·, …, ·)`.
pub fn contract(x: &Multivector, w: &Form) -> Result<Form> {
    if !same_basis(&x.basis, &w.basis) {
        return Err(Error::BasisMismatch);
    }
    if x.grade > w.grade {
        return Err(Error::ContractionDegree {
            vector_grade: x.grade,
            form_grade: w.grade,
        });
    }
    let mut out = Form::zero(&w.basis, w.grade - x.grade)?;
    for (i, xc) in &x.terms {
        for (j, wc) in &w.terms {
            if let Some((rest, sign)) = remove_prefix(j, i) {
                out.accumulate(rest, sign * xc * wc);
            }
        }
    }
    Ok(out)
}

/// Writes `e_J = sign · e_I ∧ e_{J∖I}` and returns `(J∖I, sign)` if `I ⊂ J`.
fn remove_prefix(j: &[usize], i: &[usize]) -> Option<(Vec<usize>, f64)> {
    let mut rest = Vec::with_capacity(j.len() - i.len());
    let mut shift = 0usize;
    let mut k = 0;
    for (pos, &idx) in j.iter().enumerate() {
        if k < i.len() && i[k] == idx {
            shift += pos - k;
            k += 1;
        } else {
            rest.push(idx);
        }
    }
    if k != i.len() {
        return None;
    }
    Some((rest, if shift % 2 == 0 { 1.0 } else { -1.0 }))
}

impl<K> fmt::Debug for Alternating<K> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Alternating")
            .field("grade", &self.grade)
            .field("dim", &self.dim())
            .field("terms", &self.terms)
            .finish()
    }
}

impl<K> fmt::Display for Alternating<K> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (n, (k, v)) in self.terms.iter().enumerate() {
            if n > 0 {
                write!(f, " ")?;
            }
            write!(f, "{v:+}")?;
            if !k.is_empty() {
                let name = k.iter().map(|&i| self.basis.label(i)).join("^");
                write!(f, " {name}")?;
            }
        }
        Ok(())
    }
}
