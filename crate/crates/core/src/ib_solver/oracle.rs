//! Exhaustive search over deterministic encoders.
//!
//! This is the reference the iterative solver is checked against. It shares
//! nothing with the solver besides the public information primitives.

use super::{ib_lagrangian, IbSolution};
use crate::error::{Error, Result};
use crate::info_theory::{Channel, JointDistribution};
use crate::scalar::Scalar;

/// Largest number of encoders [`brute_force_ib`] will enumerate.
pub const MAX_ENUMERATION: u64 = 10_000_000;

/// Enumerates all `cardinality^|X|` deterministic encoders and returns the one
/// with the lowest Lagrangian. Ties go to the lexicographically smallest
/// assignment vector.
pub fn brute_force_ib<T: Scalar>(
    j: &JointDistribution<T>,
    cardinality: usize,
    beta: T,
) -> Result<IbSolution<T>> {
    if cardinality == 0 {
        return Err(Error::Config(
            "bottleneck cardinality must be at least 1".into(),
        ));
    }
    if beta < T::zero() || !beta.is_finite() {
        return Err(Error::Config(format!(
            "beta must be finite and non-negative, got {beta}"
        )));
    }
    let nx = j.x_size();
    let total = u32::try_from(nx)
        .ok()
        .and_then(|e| (cardinality as u64).checked_pow(e))
        .filter(|&n| n <= MAX_ENUMERATION)
        .ok_or_else(|| {
            Error::Capacity(format!(
                "{cardinality}^{nx} deterministic encoders exceeds the limit of {MAX_ENUMERATION}"
            ))
        })?;

    let mut assignment = vec![0usize; nx];
    let mut best: Option<(T, Vec<usize>)> = None;
    for _ in 0..total {
        let enc = Channel::deterministic(&assignment, cardinality)?;
        let value = ib_lagrangian(j, &enc, beta)?;
        let better = match &best {
            None => true,
            Some((b, _)) => value < *b - tie_tolerance(*b),
        };
        if better {
            best = Some((value, assignment.clone()));
        }
        // Odometer with the first symbol most significant: lexicographic order.
        for d in (0..nx).rev() {
            assignment[d] += 1;
            if assignment[d] < cardinality {
                break;
            }
            assignment[d] = 0;
        }
    }
    let (_, assignment) = best.expect("at least one encoder enumerated");
    let encoder = Channel::deterministic(&assignment, cardinality)?;
    IbSolution::from_encoder(j, encoder, beta, 0, true)
}

/// Relabelled encoders evaluate to the same value up to summation order.
fn tie_tolerance<T: Scalar>(scale: T) -> T {
    T::epsilon() * T::of(64.0) * scale.abs().max(T::one())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Distribution;

    #[test]
    fn single_cluster_is_the_constant_encoder() {
        let j = JointDistribution::new(2, 2, vec![0.4, 0.1, 0.2, 0.3]).unwrap();
        let s = brute_force_ib(&j, 1, 3.0).unwrap();
        assert_eq!(s.lagrangian, 0.0);
        assert_eq!(s.encoder, Channel::constant(2, 1, 0).unwrap());
    }

    #[test]
    fn diagonal_binary_keeps_identity() {
        let j = JointDistribution::<f64>::new(2, 2, vec![0.5, 0.0, 0.0, 0.5]).unwrap();
        let s = brute_force_ib(&j, 2, 100.0).unwrap();
        // [0,0] gives 0, [0,1] gives 1 - 100; lexicographically first optimum.
        assert_eq!(s.encoder, Channel::identity(2));
        assert!((s.lagrangian - (1.0 - 100.0)).abs() < 1e-12);
        assert!((s.i_y_xhat - 1.0).abs() < 1e-12);
    }

    #[test]
    fn independent_joint_prefers_constant() {
        let j = JointDistribution::independent(
            &Distribution::<f64>::new(vec![0.2, 0.3, 0.5]).unwrap(),
            &Distribution::new(vec![0.6, 0.4]).unwrap(),
        );
        for k in 1..=3 {
            for beta in [0.5, 2.0, 50.0] {
                let s = brute_force_ib(&j, k, beta).unwrap();
                assert!(s.lagrangian.abs() < 1e-12);
                assert_eq!(s.encoder, Channel::constant(3, k, 0).unwrap());
            }
        }
    }

    #[test]
    fn rejects_oversized_instances() {
        let j = JointDistribution::<f64>::new(30, 1, vec![1.0 / 30.0; 30]).unwrap();
        assert!(matches!(
            brute_force_ib(&j, 2, 1.0),
            Err(Error::Capacity(_))
        ));
    }
}
