#![allow(dead_code)]

use orgbottleneck::{Channel, JointDistribution};
use proptest::prelude::*;

/// Positive weights normalized to a probability vector; `zeros` punches holes.
pub fn simplex(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec((0.0f64..1.0, prop::bool::weighted(0.15)), n).prop_map(|w| {
        let mut v: Vec<f64> = w
            .iter()
            .map(|&(u, zero)| if zero { 0.0 } else { u + 1e-3 })
            .collect();
        if v.iter().all(|&x| x == 0.0) {
            v[0] = 1.0;
        }
        let s: f64 = v.iter().sum();
        v.iter().map(|x| x / s).collect()
    })
}

pub fn joint_of(nx: usize, ny: usize) -> impl Strategy<Value = JointDistribution<f64>> {
    simplex(nx * ny).prop_map(move |p| JointDistribution::new(nx, ny, p).unwrap())
}

pub fn joint(max_x: usize, max_y: usize) -> impl Strategy<Value = JointDistribution<f64>> {
    (1..=max_x, 1..=max_y).prop_flat_map(|(nx, ny)| joint_of(nx, ny))
}

pub fn channel(n_in: usize, n_out: usize) -> impl Strategy<Value = Channel<f64>> {
    prop::collection::vec(simplex(n_out), n_in).prop_map(|rows| Channel::from_rows(&rows).unwrap())
}

/// A channel with a random output size in `1..=max_out`.
pub fn any_channel(n_in: usize, max_out: usize) -> impl Strategy<Value = Channel<f64>> {
    (1..=max_out).prop_flat_map(move |m| channel(n_in, m))
}

pub fn permutation(n: usize) -> impl Strategy<Value = Vec<usize>> {
    Just((0..n).collect::<Vec<_>>()).prop_shuffle()
}

/// Plug-in mutual information straight from the definition, in bits.
pub fn mi_reference(j: &JointDistribution<f64>) -> f64 {
    let px: Vec<f64> = (0..j.x_size()).map(|x| j.row(x).iter().sum()).collect();
    let py: Vec<f64> = (0..j.y_size())
        .map(|y| (0..j.x_size()).map(|x| j.get(x, y)).sum())
        .collect();
    let mut mi = 0.0;
    for x in 0..j.x_size() {
        for y in 0..j.y_size() {
            let p = j.get(x, y);
            if p > 0.0 {
                mi += p * (p / (px[x] * py[y])).log2();
            }
        }
    }
    mi
}
