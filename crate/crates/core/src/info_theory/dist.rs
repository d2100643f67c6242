//! Dense probability objects over finite alphabets.
//!
//! All three types are validated at construction and immutable afterwards.
//! A constructor accepts inputs whose total mass is within
//! [`Scalar::NORMALIZATION_TOL`] of one and renormalizes them; anything further
//! off is rejected rather than silently repaired.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Checks entries and returns the rescaled copy when the drift is tolerable.
fn normalized<T: Scalar>(what: &str, probs: &[T]) -> Result<Vec<T>> {
    if probs.is_empty() {
        return Err(Error::Validation(format!("{what}: empty alphabet")));
    }
    for (i, &p) in probs.iter().enumerate() {
        if !p.is_finite() || p < T::zero() {
            return Err(Error::Validation(format!(
                "{what}: entry {i} is {p}, expected a finite non-negative probability"
            )));
        }
    }
    let sum: T = probs.iter().copied().sum();
    let tol = T::of(T::NORMALIZATION_TOL);
    if (sum - T::one()).abs() > tol {
        return Err(Error::Validation(format!(
            "{what}: entries sum to {sum}, expected 1 within {tol}"
        )));
    }
    if sum == T::one() {
        Ok(probs.to_vec())
    } else {
        Ok(probs.iter().map(|&p| p / sum).collect())
    }
}

/// Rescales a non-negative vector with positive mass to sum to one.
pub(crate) fn rescale<T: Scalar>(v: &mut [T]) {
    let sum: T = v.iter().copied().sum();
    if sum > T::zero() && sum != T::one() {
        for p in v.iter_mut() {
            *p = *p / sum;
        }
    }
}

/// Probability mass function over a finite alphabet.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Distribution<T> {
    probs: Vec<T>,
}

impl<T: Scalar> Distribution<T> {
    pub fn new(probs: Vec<T>) -> Result<Self> {
        let probs = normalized("distribution", &probs)?;
        Ok(Self { probs })
    }

    /// Uniform distribution over `n` symbols.
    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Validation("distribution: empty alphabet".into()));
        }
        let p = T::one() / T::of(n as f64);
        Ok(Self { probs: vec![p; n] })
    }

    /// Point mass on `symbol`.
    pub fn point(n: usize, symbol: usize) -> Result<Self> {
        if symbol >= n {
            return Err(Error::Validation(format!(
                "distribution: symbol {symbol} outside alphabet of size {n}"
            )));
        }
        let mut probs = vec![T::zero(); n];
        probs[symbol] = T::one();
        Ok(Self { probs })
    }

    /// Internal constructor for vectors that are non-negative by construction.
    pub(crate) fn from_mass(mut probs: Vec<T>) -> Self {
        rescale(&mut probs);
        Self { probs }
    }

    pub fn alphabet_size(&self) -> usize {
        self.probs.len()
    }

    pub fn probs(&self) -> &[T] {
        &self.probs
    }

    pub fn get(&self, i: usize) -> T {
        self.probs[i]
    }
}

/// Exact joint pmf `p(x, y)`, stored row-major with `x` as the row index.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JointDistribution<T> {
    x_size: usize,
    y_size: usize,
    probs: Vec<T>,
}

impl<T: Scalar> JointDistribution<T> {
    pub fn new(x_size: usize, y_size: usize, probs: Vec<T>) -> Result<Self> {
        if x_size == 0 || y_size == 0 {
            return Err(Error::Validation(format!(
                "joint distribution: alphabet sizes must be positive, got {x_size}x{y_size}"
            )));
        }
        if probs.len() != x_size * y_size {
            return Err(Error::dimension(
                "joint distribution cells",
                x_size * y_size,
                probs.len(),
            ));
        }
        let probs = normalized("joint distribution", &probs)?;
        Ok(Self {
            x_size,
            y_size,
            probs,
        })
    }

    /// Builds a joint from nested rows `rows[x][y]`.
    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let y_size = rows.first().map_or(0, Vec::len);
        for (x, row) in rows.iter().enumerate() {
            if row.len() != y_size {
                return Err(Error::dimension(
                    format!("joint row {x}"),
                    y_size,
                    row.len(),
                ));
            }
        }
        Self::new(rows.len(), y_size, rows.concat())
    }

    /// `p(x, y) = p(x) c(y | x)`.
    pub fn from_marginal_and_channel(px: &Distribution<T>, c: &Channel<T>) -> Result<Self> {
        if c.in_size() != px.alphabet_size() {
            return Err(Error::dimension(
                "channel input vs marginal",
                px.alphabet_size(),
                c.in_size(),
            ));
        }
        let mut probs = Vec::with_capacity(c.in_size() * c.out_size());
        for x in 0..c.in_size() {
            let w = px.get(x);
            probs.extend(c.row(x).iter().map(|&v| w * v));
        }
        Ok(Self::from_mass(c.in_size(), c.out_size(), probs))
    }

    /// Product of independent marginals.
    pub fn independent(px: &Distribution<T>, py: &Distribution<T>) -> Self {
        let probs = px
            .probs()
            .iter()
            .flat_map(|&a| py.probs().iter().map(move |&b| a * b))
            .collect();
        Self::from_mass(px.alphabet_size(), py.alphabet_size(), probs)
    }

    /// Places `p` on the diagonal: the joint of a variable with a copy of itself.
    pub fn diagonal(p: &Distribution<T>) -> Self {
        let n = p.alphabet_size();
        let mut probs = vec![T::zero(); n * n];
        for i in 0..n {
            probs[i * n + i] = p.get(i);
        }
        Self::from_mass(n, n, probs)
    }

    pub(crate) fn from_mass(x_size: usize, y_size: usize, mut probs: Vec<T>) -> Self {
        debug_assert_eq!(probs.len(), x_size * y_size);
        rescale(&mut probs);
        Self {
            x_size,
            y_size,
            probs,
        }
    }

    pub fn x_size(&self) -> usize {
        self.x_size
    }

    pub fn y_size(&self) -> usize {
        self.y_size
    }

    pub fn probs(&self) -> &[T] {
        &self.probs
    }

    pub fn get(&self, x: usize, y: usize) -> T {
        self.probs[x * self.y_size + y]
    }

    pub fn row(&self, x: usize) -> &[T] {
        &self.probs[x * self.y_size..(x + 1) * self.y_size]
    }

    pub fn marginal_x(&self) -> Distribution<T> {
        Distribution::from_mass(
            (0..self.x_size)
                .map(|x| self.row(x).iter().copied().sum())
                .collect(),
        )
    }

    pub fn marginal_y(&self) -> Distribution<T> {
        let mut py = vec![T::zero(); self.y_size];
        for x in 0..self.x_size {
            for (acc, &v) in py.iter_mut().zip(self.row(x)) {
                *acc = *acc + v;
            }
        }
        Distribution::from_mass(py)
    }

    pub fn transpose(&self) -> Self {
        let mut probs = vec![T::zero(); self.probs.len()];
        for x in 0..self.x_size {
            for y in 0..self.y_size {
                probs[y * self.x_size + x] = self.get(x, y);
            }
        }
        Self {
            x_size: self.y_size,
            y_size: self.x_size,
            probs,
        }
    }

    /// `p(y | x)` as a channel. Rows with `p(x) = 0` are set to the marginal
    /// `p(y)`; they carry no mass and never influence any downstream quantity.
    pub fn conditional_y_given_x(&self) -> Channel<T> {
        let py = self.marginal_y();
        let mut probs = Vec::with_capacity(self.probs.len());
        for x in 0..self.x_size {
            let row = self.row(x);
            let mass: T = row.iter().copied().sum();
            if mass > T::zero() {
                probs.extend(row.iter().map(|&v| v / mass));
            } else {
                probs.extend_from_slice(py.probs());
            }
        }
        Channel::from_rows_unchecked(self.x_size, self.y_size, probs)
    }

    /// Relabels both alphabets: cell `(x, y)` moves to `(perm_x[x], perm_y[y])`.
    pub fn permuted(&self, perm_x: &[usize], perm_y: &[usize]) -> Result<Self> {
        check_permutation("x permutation", perm_x, self.x_size)?;
        check_permutation("y permutation", perm_y, self.y_size)?;
        let mut probs = vec![T::zero(); self.probs.len()];
        for x in 0..self.x_size {
            for y in 0..self.y_size {
                probs[perm_x[x] * self.y_size + perm_y[y]] = self.get(x, y);
            }
        }
        Ok(Self {
            x_size: self.x_size,
            y_size: self.y_size,
            probs,
        })
    }
}

pub(crate) fn check_permutation(what: &str, perm: &[usize], n: usize) -> Result<()> {
    if perm.len() != n {
        return Err(Error::dimension(what, n, perm.len()));
    }
    let mut seen = vec![false; n];
    for &p in perm {
        if p >= n || std::mem::replace(&mut seen[p], true) {
            return Err(Error::Validation(format!(
                "{what}: not a permutation of 0..{n}"
            )));
        }
    }
    Ok(())
}

/// Stochastic map `p(out | in)`, row-major with the input symbol as the row.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Channel<T> {
    in_size: usize,
    out_size: usize,
    probs: Vec<T>,
}

impl<T: Scalar> Channel<T> {
    pub fn new(in_size: usize, out_size: usize, probs: Vec<T>) -> Result<Self> {
        if in_size == 0 || out_size == 0 {
            return Err(Error::Validation(format!(
                "channel: alphabet sizes must be positive, got {in_size}x{out_size}"
            )));
        }
        if probs.len() != in_size * out_size {
            return Err(Error::dimension(
                "channel cells",
                in_size * out_size,
                probs.len(),
            ));
        }
        let mut out = Vec::with_capacity(probs.len());
        for (r, row) in probs.chunks(out_size).enumerate() {
            out.extend(normalized(&format!("channel row {r}"), row)?);
        }
        Ok(Self {
            in_size,
            out_size,
            probs: out,
        })
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let out_size = rows.first().map_or(0, Vec::len);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != out_size {
                return Err(Error::dimension(
                    format!("channel row {r}"),
                    out_size,
                    row.len(),
                ));
            }
        }
        Self::new(rows.len(), out_size, rows.concat())
    }

    pub fn identity(n: usize) -> Self {
        Self::deterministic(&(0..n).collect::<Vec<_>>(), n).expect("identity map is in range")
    }

    /// Every input is sent to `symbol`.
    pub fn constant(in_size: usize, out_size: usize, symbol: usize) -> Result<Self> {
        Self::deterministic(&vec![symbol; in_size], out_size)
    }

    /// Deterministic map `in -> assignment[in]`.
    pub fn deterministic(assignment: &[usize], out_size: usize) -> Result<Self> {
        if assignment.is_empty() || out_size == 0 {
            return Err(Error::Validation("channel: empty alphabet".into()));
        }
        let mut probs = vec![T::zero(); assignment.len() * out_size];
        for (i, &a) in assignment.iter().enumerate() {
            if a >= out_size {
                return Err(Error::Validation(format!(
                    "channel: input {i} mapped to {a}, outside output alphabet of size {out_size}"
                )));
            }
            probs[i * out_size + a] = T::one();
        }
        Ok(Self {
            in_size: assignment.len(),
            out_size,
            probs,
        })
    }

    /// Binary symmetric channel with crossover probability `flip`.
    pub fn binary_symmetric(flip: T) -> Result<Self> {
        let keep = T::one() - flip;
        Self::new(2, 2, vec![keep, flip, flip, keep])
    }

    /// Rows are renormalized but not otherwise checked.
    pub(crate) fn from_rows_unchecked(in_size: usize, out_size: usize, mut probs: Vec<T>) -> Self {
        debug_assert_eq!(probs.len(), in_size * out_size);
        for row in probs.chunks_mut(out_size) {
            rescale(row);
        }
        Self {
            in_size,
            out_size,
            probs,
        }
    }

    pub fn in_size(&self) -> usize {
        self.in_size
    }

    pub fn out_size(&self) -> usize {
        self.out_size
    }

    pub fn probs(&self) -> &[T] {
        &self.probs
    }

    pub fn get(&self, input: usize, output: usize) -> T {
        self.probs[input * self.out_size + output]
    }

    pub fn row(&self, input: usize) -> &[T] {
        &self.probs[input * self.out_size..(input + 1) * self.out_size]
    }

    /// Reorders rows: row `i` of the result is row `perm[i]` of `self`.
    pub fn with_rows_from(&self, perm: &[usize]) -> Result<Self> {
        check_permutation("row permutation", perm, self.in_size)?;
        let probs = perm
            .iter()
            .flat_map(|&r| self.row(r).iter().copied())
            .collect();
        Ok(Self {
            in_size: self.in_size,
            out_size: self.out_size,
            probs,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_negative_entry_with_index() {
        let err = Distribution::new(vec![0.5, 0.7, -0.2]).unwrap_err();
        assert!(
            matches!(&err, Error::Validation(m) if m.contains("entry 2")),
            "{err}"
        );
    }

    #[test]
    fn renormalizes_small_drift_only() {
        let d = Distribution::new(vec![0.5 + 4e-13, 0.5]).unwrap();
        let s: f64 = d.probs().iter().sum();
        assert!((s - 1.0).abs() < 1e-15);
        assert!(Distribution::new(vec![0.5 + 1e-9, 0.5]).is_err());
    }

    #[test]
    fn joint_size_mismatch_is_a_dimension_error() {
        let err = JointDistribution::new(2, 2, vec![0.5, 0.5]).unwrap_err();
        assert!(matches!(
            err,
            Error::Dimension {
                expected: 4,
                found: 2,
                ..
            }
        ));
    }

    #[test]
    fn channel_row_must_normalize() {
        let err = Channel::new(2, 2, vec![0.5, 0.5, 0.9, 0.0]).unwrap_err();
        assert!(
            matches!(&err, Error::Validation(m) if m.contains("row 1")),
            "{err}"
        );
    }

    #[test]
    fn marginals_and_transpose() {
        let j = JointDistribution::<f64>::from_rows(&[vec![0.1, 0.2, 0.3], vec![0.0, 0.25, 0.15]])
            .unwrap();
        let px = j.marginal_x();
        let py = j.marginal_y();
        assert!((px.get(0) - 0.6).abs() < 1e-15 && (px.get(1) - 0.4).abs() < 1e-15);
        assert!((py.get(2) - 0.45).abs() < 1e-15);
        let t = j.transpose();
        assert_eq!((t.x_size(), t.y_size()), (3, 2));
        assert_eq!(t.get(2, 1), j.get(1, 2));
        assert_eq!(t.transpose(), j);
    }

    #[test]
    fn conditional_of_massless_row_is_marginal() {
        let j = JointDistribution::from_rows(&[vec![0.25, 0.75], vec![0.0, 0.0]]).unwrap();
        let c = j.conditional_y_given_x();
        assert_eq!(c.row(1), j.marginal_y().probs());
    }

    #[test]
    fn permutation_must_be_bijective() {
        let j = JointDistribution::<f64>::independent(
            &Distribution::uniform(2).unwrap(),
            &Distribution::uniform(2).unwrap(),
        );
        assert!(j.permuted(&[0, 0], &[0, 1]).is_err());
        assert!(j.permuted(&[1, 0], &[1, 0]).is_ok());
    }
}
