//! Exact information-theoretic quantities over finite alphabets.
//!
//! Everything is reported in bits. Terms with zero probability are skipped,
//! so `0 log 0 = 0` and no operation ever produces NaN from an empty cell.

mod dist;

use serde::Serialize;

pub(crate) use dist::rescale;
pub use dist::{Channel, Distribution, JointDistribution};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Slack used when checking that a mutual-information sequence is non-increasing.
pub const DPI_SLACK: f64 = 1e-9;

/// Entropy of a raw pmf slice in bits.
pub(crate) fn entropy_bits<T: Scalar>(probs: &[T]) -> T {
    let h = probs
        .iter()
        .filter(|&&p| p > T::zero())
        .fold(T::zero(), |acc, &p| acc - p * p.log2());
    h.max(T::zero())
}

/// Mutual information of a dense row-major joint, in bits.
pub(crate) fn mi_bits<T: Scalar>(probs: &[T], rows: usize, cols: usize) -> T {
    let mut col_mass = vec![T::zero(); cols];
    let mut row_mass = vec![T::zero(); rows];
    for r in 0..rows {
        for c in 0..cols {
            let v = probs[r * cols + c];
            row_mass[r] = row_mass[r] + v;
            col_mass[c] = col_mass[c] + v;
        }
    }
    let mut mi = T::zero();
    for r in 0..rows {
        for c in 0..cols {
            let v = probs[r * cols + c];
            if v > T::zero() {
                mi = mi + v * (v / (row_mass[r] * col_mass[c])).log2();
            }
        }
    }
    mi.max(T::zero())
}

/// `H(X) = -Σ p(x) log₂ p(x)`.
pub fn entropy<T: Scalar>(d: &Distribution<T>) -> T {
    entropy_bits(d.probs())
}

/// `H(X, Y)` of the joint.
pub fn joint_entropy<T: Scalar>(j: &JointDistribution<T>) -> T {
    entropy_bits(j.probs())
}

/// `I(X; Y)`, symmetric and non-negative.
pub fn mutual_information<T: Scalar>(j: &JointDistribution<T>) -> T {
    mi_bits(j.probs(), j.x_size(), j.y_size())
}

/// `H(X | Y) = -Σ p(x, y) log₂ (p(x, y) / p(y))`.
pub fn conditional_entropy<T: Scalar>(j: &JointDistribution<T>) -> T {
    let py = j.marginal_y();
    let mut h = T::zero();
    for x in 0..j.x_size() {
        for (y, &v) in j.row(x).iter().enumerate() {
            if v > T::zero() {
                h = h - v * (v / py.get(y)).log2();
            }
        }
    }
    h.max(T::zero())
}

/// `KL(p ‖ q)` in bits. A support violation (`q(x) = 0 < p(x)`) yields `+∞`.
pub fn kl_divergence<T: Scalar>(p: &Distribution<T>, q: &Distribution<T>) -> Result<T> {
    if p.alphabet_size() != q.alphabet_size() {
        return Err(Error::dimension(
            "kl divergence alphabets",
            p.alphabet_size(),
            q.alphabet_size(),
        ));
    }
    let mut kl = T::zero();
    for (&a, &b) in p.probs().iter().zip(q.probs()) {
        if a > T::zero() {
            if b <= T::zero() {
                return Ok(T::infinity());
            }
            kl = kl + a * (a / b).log2();
        }
    }
    Ok(kl.max(T::zero()))
}

/// One Markov step: maps the joint over `(X, Y)` to the joint over `(out, Y)`
/// with `p(l, y) = Σ_x p(x, y) c(l | x)`.
pub fn push_through<T: Scalar>(
    j: &JointDistribution<T>,
    c: &Channel<T>,
) -> Result<JointDistribution<T>> {
    if c.in_size() != j.x_size() {
        return Err(Error::dimension(
            "channel input vs joint x",
            j.x_size(),
            c.in_size(),
        ));
    }
    let (ny, nl) = (j.y_size(), c.out_size());
    let mut out = vec![T::zero(); nl * ny];
    for x in 0..j.x_size() {
        let jrow = j.row(x);
        for (l, &w) in c.row(x).iter().enumerate() {
            if w > T::zero() {
                for (acc, &v) in out[l * ny..(l + 1) * ny].iter_mut().zip(jrow) {
                    *acc = *acc + w * v;
                }
            }
        }
    }
    Ok(JointDistribution::from_mass(nl, ny, out))
}

/// Serial composition: `(a ∘ b)(z | x) = Σ_y a(y | x) b(z | y)`.
pub fn compose<T: Scalar>(a: &Channel<T>, b: &Channel<T>) -> Result<Channel<T>> {
    if a.out_size() != b.in_size() {
        return Err(Error::dimension(
            "composed channel alphabets",
            a.out_size(),
            b.in_size(),
        ));
    }
    let nz = b.out_size();
    let mut probs = vec![T::zero(); a.in_size() * nz];
    for x in 0..a.in_size() {
        let out = &mut probs[x * nz..(x + 1) * nz];
        for (y, &w) in a.row(x).iter().enumerate() {
            if w > T::zero() {
                for (acc, &v) in out.iter_mut().zip(b.row(y)) {
                    *acc = *acc + w * v;
                }
            }
        }
    }
    Ok(Channel::from_rows_unchecked(a.in_size(), nz, probs))
}

/// Source joint over `(X, Y)` followed by processing stages `X → T₁ → … → T_k`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MarkovChainSpec<T> {
    source: JointDistribution<T>,
    stages: Vec<Channel<T>>,
}

impl<T: Scalar> MarkovChainSpec<T> {
    pub fn new(source: JointDistribution<T>, stages: Vec<Channel<T>>) -> Result<Self> {
        let mut size = source.x_size();
        for (i, st) in stages.iter().enumerate() {
            if st.in_size() != size {
                return Err(Error::dimension(
                    format!("stage {} input alphabet", i + 1),
                    size,
                    st.in_size(),
                ));
            }
            size = st.out_size();
        }
        Ok(Self { source, stages })
    }

    pub fn source(&self) -> &JointDistribution<T> {
        &self.source
    }

    pub fn stages(&self) -> &[Channel<T>] {
        &self.stages
    }
}

/// Result of [`verify_dpi`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DpiReport<T> {
    /// `I(X; T_i)` for each stage, in chain order.
    pub mutual_info: Vec<T>,
    /// `I(Y; T_i)` for each stage, in chain order.
    pub relevance: Vec<T>,
    /// Both sequences are non-increasing within [`DPI_SLACK`].
    pub passed: bool,
}

fn non_increasing<T: Scalar>(seq: &[T], slack: T) -> bool {
    seq.windows(2).all(|w| w[1] <= w[0] + slack)
}

/// Pushes the source through every stage and checks the data processing inequality.
pub fn verify_dpi<T: Scalar>(m: &MarkovChainSpec<T>) -> Result<DpiReport<T>> {
    // (X, X) carries X itself as the tracked variable alongside (X, Y).
    let mut with_x = JointDistribution::diagonal(&m.source.marginal_x());
    let mut with_y = m.source.clone();
    let mut mutual_info = Vec::with_capacity(m.stages.len());
    let mut relevance = Vec::with_capacity(m.stages.len());
    for st in &m.stages {
        with_x = push_through(&with_x, st)?;
        with_y = push_through(&with_y, st)?;
        mutual_info.push(mutual_information(&with_x));
        relevance.push(mutual_information(&with_y));
    }
    let slack = T::of(DPI_SLACK);
    let passed = non_increasing(&mutual_info, slack) && non_increasing(&relevance, slack);
    Ok(DpiReport {
        mutual_info,
        relevance,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hb(p: f64) -> f64 {
        -(p * p.log2()) - (1.0 - p) * (1.0 - p).log2()
    }

    fn diag_binary() -> JointDistribution<f64> {
        JointDistribution::new(2, 2, vec![0.5, 0.0, 0.0, 0.5]).unwrap()
    }

    #[test]
    fn entropy_examples() {
        let h = |v: Vec<f64>| entropy(&Distribution::new(v).unwrap());
        assert_eq!(h(vec![0.5, 0.5]), 1.0);
        assert_eq!(h(vec![1.0, 0.0]), 0.0);
        assert_eq!(h(vec![0.25; 4]), 2.0);
    }

    #[test]
    fn mutual_information_examples() {
        let px = Distribution::<f64>::new(vec![0.3, 0.7]).unwrap();
        let py = Distribution::new(vec![0.2, 0.5, 0.3]).unwrap();
        assert!(mutual_information(&JointDistribution::independent(&px, &py)).abs() < 1e-12);
        assert!((mutual_information(&diag_binary()) - 1.0).abs() < 1e-12);

        // BSC(0.11) with uniform input, evaluated as H(Y) - H(Y|X) by hand.
        let bsc = JointDistribution::new(2, 2, vec![0.445, 0.055, 0.055, 0.445]).unwrap();
        let expected = 1.0 - hb(0.11);
        assert!((mutual_information(&bsc) - expected).abs() < 1e-12);
        assert!((expected - 0.500_1).abs() < 1e-4);
    }

    #[test]
    fn conditional_entropy_examples() {
        assert!(conditional_entropy(&diag_binary()).abs() < 1e-12);
        let ind = JointDistribution::<f64>::new(2, 2, vec![0.25; 4]).unwrap();
        assert!((conditional_entropy(&ind) - 1.0).abs() < 1e-12);
        let bsc = JointDistribution::new(2, 2, vec![0.445, 0.055, 0.055, 0.445]).unwrap();
        assert!((conditional_entropy(&bsc) - hb(0.11)).abs() < 1e-12);
    }

    #[test]
    fn kl_examples() {
        let d = |v: Vec<f64>| Distribution::new(v).unwrap();
        assert_eq!(
            kl_divergence(&d(vec![0.5, 0.5]), &d(vec![0.5, 0.5])).unwrap(),
            0.0
        );
        assert_eq!(
            kl_divergence(&d(vec![1.0, 0.0]), &d(vec![0.5, 0.5])).unwrap(),
            1.0
        );
        assert!(kl_divergence(&d(vec![0.5, 0.5]), &d(vec![1.0, 0.0]))
            .unwrap()
            .is_infinite());
        let err = kl_divergence(&d(vec![0.5, 0.5]), &d(vec![0.2, 0.3, 0.5])).unwrap_err();
        assert!(matches!(err, Error::Dimension { .. }));
    }

    #[test]
    fn push_through_examples() {
        let j = JointDistribution::new(3, 2, vec![0.1, 0.2, 0.3, 0.1, 0.25, 0.05]).unwrap();
        assert_eq!(push_through(&j, &Channel::identity(3)).unwrap(), j);

        let constant = Channel::constant(3, 4, 0).unwrap();
        let out = push_through(&j, &constant).unwrap();
        assert_eq!(mutual_information(&out), 0.0);

        let bsc = Channel::binary_symmetric(0.11).unwrap();
        let out = push_through(&diag_binary(), &bsc).unwrap();
        assert!((mutual_information(&out) - (1.0 - hb(0.11))).abs() < 1e-12);

        let err = push_through(&j, &Channel::identity(2)).unwrap_err();
        assert!(matches!(
            err,
            Error::Dimension {
                expected: 3,
                found: 2,
                ..
            }
        ));
    }

    #[test]
    fn compose_matches_sequential_push() {
        let j = JointDistribution::new(3, 2, vec![0.1, 0.2, 0.3, 0.1, 0.25, 0.05]).unwrap();
        let a =
            Channel::<f64>::from_rows(&[vec![0.2, 0.8], vec![0.6, 0.4], vec![1.0, 0.0]]).unwrap();
        let b = Channel::from_rows(&[vec![0.1, 0.7, 0.2], vec![0.5, 0.0, 0.5]]).unwrap();
        let two_steps = push_through(&push_through(&j, &a).unwrap(), &b).unwrap();
        let one_step = push_through(&j, &compose(&a, &b).unwrap()).unwrap();
        for (u, v) in two_steps.probs().iter().zip(one_step.probs()) {
            assert!((u - v).abs() < 1e-15);
        }
    }

    #[test]
    fn dpi_identity_chain_is_flat() {
        let m = MarkovChainSpec::new(diag_binary(), vec![Channel::identity(2); 3]).unwrap();
        let r = verify_dpi(&m).unwrap();
        assert!(r.passed);
        assert!(r.mutual_info.iter().all(|&v| (v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn dpi_cascaded_bsc_strictly_decreases() {
        let bsc = Channel::binary_symmetric(0.11).unwrap();
        let m = MarkovChainSpec::new(diag_binary(), vec![bsc.clone(), bsc]).unwrap();
        let r = verify_dpi(&m).unwrap();
        assert!(r.passed);
        // Two BSC(0.11) stages compose to BSC(2·0.11·0.89).
        let flip2 = 2.0 * 0.11 * 0.89;
        assert!((r.mutual_info[0] - (1.0 - hb(0.11))).abs() < 1e-12);
        assert!((r.mutual_info[1] - (1.0 - hb(flip2))).abs() < 1e-12);
        assert!(r.mutual_info[1] < r.mutual_info[0]);
    }

    #[test]
    fn markov_chain_rejects_mismatched_stage() {
        let err = MarkovChainSpec::new(
            diag_binary(),
            vec![Channel::identity(2), Channel::identity(3)],
        )
        .unwrap_err();
        assert!(matches!(
            err,
            Error::Dimension {
                expected: 2,
                found: 3,
                ..
            }
        ));
    }

    #[test]
    fn works_in_single_precision() {
        let d = Distribution::<f32>::new(vec![0.25; 4]).unwrap();
        assert!((entropy(&d) - 2.0).abs() < 1e-6);
        let j = JointDistribution::<f32>::new(2, 2, vec![0.5, 0.0, 0.0, 0.5]).unwrap();
        assert!((mutual_information(&j) - 1.0).abs() < 1e-6);
    }
}
