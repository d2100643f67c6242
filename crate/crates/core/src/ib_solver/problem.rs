//! Dense working form of one bottleneck instance and the self-consistent
//! fixed-point iteration on it.
//!
//! Encoders are flat `x_size × k` row-major buffers here; conversion to
//! [`Channel`](crate::Channel) happens once a candidate is final.

use crate::info_theory::{mi_bits, rescale, JointDistribution};
use crate::scalar::Scalar;

pub(crate) struct Problem<T> {
    pub nx: usize,
    pub ny: usize,
    pub beta: T,
    pub px: Vec<T>,
    pub py: Vec<T>,
    pub pxy: Vec<T>,
    /// `p(y | x)`; rows with zero mass hold `p(y)`.
    pub cond: Vec<T>,
}

pub(crate) struct Descent<T> {
    pub encoder: Vec<T>,
    pub lagrangian: T,
    pub iterations: usize,
    pub converged: bool,
}

impl<T: Scalar> Problem<T> {
    pub fn new(j: &JointDistribution<T>, beta: T) -> Self {
        let px = j.marginal_x().probs().to_vec();
        let py = j.marginal_y().probs().to_vec();
        let cond = j.conditional_y_given_x().probs().to_vec();
        Self {
            nx: j.x_size(),
            ny: j.y_size(),
            beta,
            px,
            py,
            pxy: j.probs().to_vec(),
            cond,
        }
    }

    pub fn with_beta(&self, beta: T) -> Self {
        Self {
            nx: self.nx,
            ny: self.ny,
            beta,
            px: self.px.clone(),
            py: self.py.clone(),
            pxy: self.pxy.clone(),
            cond: self.cond.clone(),
        }
    }

    /// `p(x̂)` and `p(x̂, y)` induced by `enc`.
    fn cluster_stats(&self, enc: &[T], k: usize) -> (Vec<T>, Vec<T>) {
        let mut q = vec![T::zero(); k];
        let mut qy = vec![T::zero(); k * self.ny];
        for x in 0..self.nx {
            let row = &self.pxy[x * self.ny..(x + 1) * self.ny];
            for c in 0..k {
                let w = enc[x * k + c];
                if w > T::zero() {
                    q[c] = q[c] + w * self.px[x];
                    for (acc, &v) in qy[c * self.ny..(c + 1) * self.ny].iter_mut().zip(row) {
                        *acc = *acc + w * v;
                    }
                }
            }
        }
        (q, qy)
    }

    /// `(I(X; X̂), I(Y; X̂), I(X; X̂) − β·I(Y; X̂))`.
    pub fn evaluate(&self, enc: &[T], k: usize) -> (T, T, T) {
        let jx: Vec<T> = (0..self.nx * k).map(|i| self.px[i / k] * enc[i]).collect();
        let ix = mi_bits(&jx, self.nx, k);
        let (_, qy) = self.cluster_stats(enc, k);
        let iy = mi_bits(&qy, k, self.ny);
        (ix, iy, ix - self.beta * iy)
    }

    pub fn lagrangian(&self, enc: &[T], k: usize) -> T {
        self.evaluate(enc, k).2
    }

    /// One self-consistent update: marginal and decoder from `enc`, then
    /// `p(x̂|x) ∝ p(x̂)·exp(−β·KL(p(y|x) ‖ p(y|x̂)))` in log space.
    pub fn update(&self, enc: &[T], k: usize) -> Vec<T> {
        let (q, mut decoder) = self.cluster_stats(enc, k);
        let zero_mass = T::of(T::ZERO_MASS);
        let active: Vec<bool> = q.iter().map(|&m| m >= zero_mass).collect();
        for c in 0..k {
            if active[c] {
                let row = &mut decoder[c * self.ny..(c + 1) * self.ny];
                for v in row.iter_mut() {
                    *v = *v / q[c];
                }
            }
        }
        let log_q: Vec<T> = q.iter().map(|&m| m.ln()).collect();

        let mut next = vec![T::zero(); self.nx * k];
        let mut logits = vec![T::neg_infinity(); k];
        for x in 0..self.nx {
            let cx = &self.cond[x * self.ny..(x + 1) * self.ny];
            for c in 0..k {
                logits[c] = if active[c] {
                    let kl = kl_nats(cx, &decoder[c * self.ny..(c + 1) * self.ny]);
                    if kl.is_infinite() {
                        T::neg_infinity()
                    } else {
                        log_q[c] - self.beta * kl
                    }
                } else {
                    T::neg_infinity()
                };
            }
            let top = logits.iter().copied().fold(T::neg_infinity(), T::max);
            let row = &mut next[x * k..(x + 1) * k];
            if top == T::neg_infinity() {
                // No active cluster can represent this row; fall back to the prior.
                for c in 0..k {
                    row[c] = if active[c] { q[c] } else { T::zero() };
                }
            } else {
                for c in 0..k {
                    row[c] = (logits[c] - top).exp();
                }
            }
            rescale(row);
        }
        next
    }

    /// Iterates [`Self::update`] from `start` until the Lagrangian moves by
    /// less than `tol`. Returns the lowest-Lagrangian iterate seen.
    pub fn descend(&self, start: Vec<T>, k: usize, max_iter: usize, tol: T) -> Descent<T> {
        let mut enc = start;
        let mut current = self.lagrangian(&enc, k);
        let mut best = (enc.clone(), current);
        let mut iterations = 0;
        let mut converged = false;
        while iterations < max_iter {
            iterations += 1;
            let next = self.update(&enc, k);
            let value = self.lagrangian(&next, k);
            let change = (current - value).abs();
            enc = next;
            current = value;
            if current < best.1 {
                best = (enc.clone(), current);
            }
            if change < tol {
                converged = true;
                break;
            }
        }
        Descent {
            encoder: best.0,
            lagrangian: best.1,
            iterations,
            converged,
        }
    }
}

/// `KL(p ‖ q)` in nats over raw slices; `+∞` on a support violation.
fn kl_nats<T: Scalar>(p: &[T], q: &[T]) -> T {
    let mut kl = T::zero();
    for (&a, &b) in p.iter().zip(q) {
        if a > T::zero() {
            if b <= T::zero() {
                return T::infinity();
            }
            kl = kl + a * (a / b).ln();
        }
    }
    kl.max(T::zero())
}

/// One-hot encoder buffer for a hard assignment.
pub(crate) fn one_hot<T: Scalar>(assignment: &[usize], k: usize) -> Vec<T> {
    let mut enc = vec![T::zero(); assignment.len() * k];
    for (x, &c) in assignment.iter().enumerate() {
        enc[x * k + c] = T::one();
    }
    enc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn joint() -> JointDistribution<f64> {
        JointDistribution::from_rows(&[
            vec![0.20, 0.05, 0.02],
            vec![0.03, 0.15, 0.07],
            vec![0.10, 0.10, 0.01],
            vec![0.04, 0.03, 0.20],
        ])
        .unwrap()
    }

    #[test]
    fn iteration_never_increases_the_lagrangian_from_a_hard_start() {
        let p = Problem::new(&joint(), 3.0);
        let mut enc = one_hot::<f64>(&[0, 1, 0, 1], 2);
        let mut prev = p.lagrangian(&enc, 2);
        for _ in 0..50 {
            enc = p.update(&enc, 2);
            let next = p.lagrangian(&enc, 2);
            assert!(next <= prev + 1e-13, "{next} > {prev}");
            prev = next;
        }
    }

    #[test]
    fn constant_encoder_is_a_fixed_point() {
        let p = Problem::new(&joint(), 5.0);
        let enc = one_hot::<f64>(&[0; 4], 3);
        assert_eq!(p.update(&enc, 3), enc);
    }
}
