//! Capacity of a binary channel: entropy, mutual information, the
//! closed-form optimal prior and capacity, and a grid-search oracle.
//!
//! All logarithms are base 2. Errors follow the labeling convention of
//! [`ErrorPair`]: `ε0` is the probability of reading 1 for input 0, `ε1` of
//! reading 0 for input 1, with `ε0 ≤ 1/2`, `ε0 ≤ ε1` and `ε0 ≤ 1 − ε1`.

use serde::{Deserialize, Serialize};

use crate::channel::ChannelErrorProfile;
use crate::error::{Error, Result};
use crate::qubit::Axis;
use crate::reconstruct::{ErrorPair, TransitionMatrix};

/// Below this value of `1 − ε0 − ε1` the channel is treated as useless.
pub const DEGENERACY_TOL: f64 = 1e-9;

/// `H(p)` in bits, with `0 log 0 = 0`.
pub fn binary_entropy(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::OutOfRange {
            name: "p",
            value: p,
            range: "[0, 1]",
        });
    }
    Ok(xlog2x_neg(p) + xlog2x_neg(1.0 - p))
}

/// `−p log₂ p`, zero at `p = 0`.
fn xlog2x_neg(p: f64) -> f64 {
    if p <= 0.0 {
        0.0
    } else {
        -p * p.log2()
    }
}

/// Entropy for arguments already known to lie in `[0, 1]`.
fn h(p: f64) -> f64 {
    xlog2x_neg(p) + xlog2x_neg(1.0 - p)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriorDistribution {
    p0: f64,
}

impl PriorDistribution {
    pub fn new(p0: f64) -> Result<Self> {
        crate::channel::check_probability("p0", p0)?;
        Ok(Self { p0 })
    }

    pub fn uniform() -> Self {
        Self { p0: 0.5 }
    }

    pub fn p0(&self) -> f64 {
        self.p0
    }

    pub fn p1(&self) -> f64 {
        1.0 - self.p0
    }

    fn weights(&self) -> [f64; 2] {
        [self.p0, 1.0 - self.p0]
    }
}

/// `I(X;Y) = Σ p_x Q(y|x) log₂[Q(y|x) / Σ_x' p_x' Q(y|x')]`.
pub fn mutual_information(q: &TransitionMatrix, prior: &PriorDistribution) -> f64 {
    mutual_information_raw(&q.entries(), prior.weights())
}

fn mutual_information_raw(q: &[[f64; 2]; 2], p: [f64; 2]) -> f64 {
    let mut total = 0.0;
    for row in q {
        let out = p[0] * row[0] + p[1] * row[1];
        for x in 0..2 {
            let joint = p[x] * row[x];
            if joint > 0.0 {
                total += joint * (row[x] / out).log2();
            }
        }
    }
    total
}

/// `log₂ z = (H[ε0] − H[ε1]) / (1 − ε0 − ε1)`.
fn log2_z(e0: f64, e1: f64) -> f64 {
    (h(e0) - h(e1)) / (1.0 - e0 - e1)
}

/// `log₂(1 + 2^x)` without overflow.
fn log2_one_plus_exp2(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp2().ln_1p() / std::f64::consts::LN_2
    } else {
        x.exp2().ln_1p() / std::f64::consts::LN_2
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimalPrior {
    pub prior: PriorDistribution,
    /// Set when `ε0 + ε1 ≥ 1 − 1e-9`; the prior is then `(1/2, 1/2)` by convention.
    pub degenerate: bool,
}

/// Capacity-achieving prior for the binary channel with errors `e`.
pub fn optimal_prior(e: &ErrorPair) -> OptimalPrior {
    let d = 1.0 - e.e0 - e.e1;
    if d < DEGENERACY_TOL {
        return OptimalPrior {
            prior: PriorDistribution::uniform(),
            degenerate: true,
        };
    }
    // 1/(1+z) evaluated as a logistic in log space.
    let lz = log2_z(e.e0, e.e1);
    let inv_one_plus_z = if lz > 0.0 {
        let t = (-lz).exp2();
        t / (1.0 + t)
    } else {
        1.0 / (1.0 + lz.exp2())
    };
    let p0 = (inv_one_plus_z - e.e1) / d;
    debug_assert!((-1e-6..=1.0 + 1e-6).contains(&p0), "optimal prior {p0} for {e:?}");
    OptimalPrior {
        prior: PriorDistribution { p0: p0.clamp(0.0, 1.0) },
        degenerate: false,
    }
}

/// Closed-form capacity `C_B(ε0, ε1)` of a binary channel, in bits.
pub fn capacity_cb(e: &ErrorPair) -> f64 {
    let (e0, e1) = (e.e0, e.e1);
    let d = 1.0 - e0 - e1;
    if d < DEGENERACY_TOL {
        return 0.0;
    }
    let c = log2_one_plus_exp2(log2_z(e0, e1)) + e0 / d * h(e1) - (1.0 - e1) / d * h(e0);
    c.clamp(0.0, 1.0)
}

/// Grid maximization of the mutual information over `p0`.
///
/// A uniform grid with step `resolution` is followed by one refinement pass
/// at step `resolution / 100` around the best grid point. Returns the
/// capacity and the maximizing `p0`.
pub fn brute_force_capacity(q: &TransitionMatrix, resolution: f64) -> (f64, f64) {
    let entries = q.entries();
    let mi = |p0: f64| mutual_information_raw(&entries, [p0, 1.0 - p0]);
    let scan = |lo: f64, hi: f64, step: f64| {
        let n = ((hi - lo) / step).round().max(1.0) as usize;
        (0..=n)
            .map(|k| (lo + (hi - lo) * k as f64 / n as f64).clamp(0.0, 1.0))
            .map(|p| (mi(p), p))
            .fold(
                (f64::NEG_INFINITY, 0.5),
                |best, cand| if cand.0 > best.0 { cand } else { best },
            )
    };
    let (_, coarse) = scan(0.0, 1.0, resolution);
    let (c, p) = scan(
        (coarse - resolution).max(0.0),
        (coarse + resolution).min(1.0),
        resolution / 100.0,
    );
    (c, p)
}

/// Largest disagreement between the closed form and the grid oracle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleSummary {
    pub samples: usize,
    pub max_capacity_dev: f64,
    pub max_prior_dev: f64,
    /// Pair attaining `max_capacity_dev`.
    pub worst: (f64, f64),
}

/// Compares [`capacity_cb`] and [`optimal_prior`] with
/// [`brute_force_capacity`] at resolution 1e-3 on the Z-channel point
/// `(0, 1/2)` followed by `samples − 1` uniformly random valid pairs.
pub fn oracle_check(samples: usize, seed: u64) -> OracleSummary {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut summary = OracleSummary {
        samples,
        max_capacity_dev: 0.0,
        max_prior_dev: 0.0,
        worst: (0.0, 0.5),
    };
    for k in 0..samples {
        let e = if k == 0 {
            ErrorPair::new(0.0, 0.5).expect("valid pair")
        } else {
            ErrorPair::canonical(rng.random(), rng.random()).expect("some relabeling is canonical")
        };
        let (c, p0) = brute_force_capacity(&TransitionMatrix::from_errors(Axis::Z, e.e0, e.e1), 1e-3);
        let dc = (capacity_cb(&e) - c).abs();
        if dc > summary.max_capacity_dev {
            summary.max_capacity_dev = dc;
            summary.worst = (e.e0, e.e1);
        }
        let opt = optimal_prior(&e);
        if !opt.degenerate {
            summary.max_prior_dev = summary.max_prior_dev.max((opt.prior.p0() - p0).abs());
        }
    }
    summary
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct AxisSpread {
    pub e0: f64,
    pub e1: f64,
    pub p0: f64,
    pub capacity: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisCapacity {
    pub axis: Axis,
    pub errors: ErrorPair,
    pub prior: PriorDistribution,
    pub capacity: f64,
    /// Monte Carlo standard deviations, when available.
    pub std: Option<AxisSpread>,
}

/// Per-axis capacities and the detected witness `C_D`.
#[derive(Debug, Clone, PartialEq)]
pub struct CapacityReport {
    /// In tie-break order z, x, y.
    pub axes: Vec<AxisCapacity>,
    pub c_d: f64,
    pub winner: Axis,
    /// Every axis attaining `C_D` within 1e-12, in tie-break order.
    pub ties: Vec<Axis>,
    pub c_d_std: Option<f64>,
}

impl CapacityReport {
    pub fn axis(&self, axis: Axis) -> &AxisCapacity {
        self.axes
            .iter()
            .find(|a| a.axis == axis)
            .expect("report covers every axis")
    }
}

const TIE_TOL: f64 = 1e-12;

/// `C^(α) = C_B(ε0^(α), ε1^(α))` per axis and `C_D = max_α C^(α)`.
pub fn detected_capacity(profile: &ChannelErrorProfile) -> CapacityReport {
    let axes: Vec<AxisCapacity> = Axis::ALL
        .iter()
        .map(|&axis| {
            let errors = profile.get(axis);
            AxisCapacity {
                axis,
                errors,
                prior: optimal_prior(&errors).prior,
                capacity: capacity_cb(&errors),
                std: None,
            }
        })
        .collect();
    let c_d = axes.iter().map(|a| a.capacity).fold(f64::NEG_INFINITY, f64::max);
    let ties: Vec<Axis> = axes
        .iter()
        .filter(|a| a.capacity >= c_d - TIE_TOL)
        .map(|a| a.axis)
        .collect();
    CapacityReport {
        winner: ties[0],
        axes,
        c_d,
        ties,
        c_d_std: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pair(e0: f64, e1: f64) -> ErrorPair {
        ErrorPair::new(e0, e1).unwrap()
    }

    fn bsc(e: f64) -> TransitionMatrix {
        TransitionMatrix::from_errors(Axis::Z, e, e)
    }

    #[test]
    fn entropy_values() {
        assert_eq!(binary_entropy(0.5).unwrap(), 1.0);
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        let want = -0.11 * 0.11f64.log2() - 0.89 * 0.89f64.log2();
        assert!((binary_entropy(0.11).unwrap() - want).abs() < 1e-15);
        assert!((binary_entropy(0.11).unwrap() - 0.499916).abs() < 1e-6);
        assert!(binary_entropy(1.5).is_err());
    }

    #[test]
    fn mutual_information_examples() {
        let half = PriorDistribution::uniform();
        assert!((mutual_information(&bsc(0.0), &half) - 1.0).abs() < 1e-15);
        for p0 in [0.1, 0.5, 0.9] {
            let prior = PriorDistribution::new(p0).unwrap();
            assert!(mutual_information(&bsc(0.5), &prior).abs() < 1e-15);
        }
        let c = mutual_information(&bsc(0.11), &half);
        assert!((c - (1.0 - binary_entropy(0.11).unwrap())).abs() < 1e-14);
    }

    #[test]
    fn optimal_prior_examples() {
        assert!((optimal_prior(&pair(0.2, 0.2)).prior.p0() - 0.5).abs() < 1e-15);
        let z = optimal_prior(&pair(0.0, 0.5));
        assert!(!z.degenerate);
        assert!((z.prior.p0() - 0.6).abs() < 1e-14);
        assert!((optimal_prior(&pair(0.0, 0.0)).prior.p0() - 0.5).abs() < 1e-15);
        let d = optimal_prior(&pair(0.3, 0.7));
        assert!(d.degenerate && d.prior.p0() == 0.5);
    }

    #[test]
    fn capacity_special_cases() {
        for e in [0.0, 0.05, 0.11, 0.3, 0.5] {
            let want = 1.0 - binary_entropy(e).unwrap();
            assert!((capacity_cb(&pair(e, e)) - want).abs() < 1e-14, "bsc {e}");
        }
        for e in [0.0_f64, 0.1, 0.5, 0.9, 1.0] {
            let want = if e < 1.0 {
                (1.0 + (1.0 - e) * e.powf(e / (1.0 - e))).log2()
            } else {
                0.0
            };
            assert!((capacity_cb(&pair(0.0, e)) - want).abs() < 1e-14, "z {e}");
        }
        assert!((capacity_cb(&pair(0.0, 0.5)) - 1.25f64.log2()).abs() < 1e-15);
        assert!((capacity_cb(&pair(0.0, 0.5)) - 0.32193).abs() < 1e-5);
        assert_eq!(capacity_cb(&pair(0.4, 0.6)), 0.0);
    }

    #[test]
    fn brute_force_examples() {
        let (c, p) = brute_force_capacity(&bsc(0.0), 1e-4);
        assert!((c - 1.0).abs() < 1e-12 && (p - 0.5).abs() < 1e-6);
        let (c, _) = brute_force_capacity(&bsc(0.2), 1e-4);
        assert!((c - (1.0 - binary_entropy(0.2).unwrap())).abs() < 1e-8);
        let (c, p) = brute_force_capacity(&TransitionMatrix::from_errors(Axis::Z, 0.0, 0.5), 1e-4);
        assert!((c - 0.32193).abs() < 1e-5 && (p - 0.6).abs() < 1e-4);
    }

    #[test]
    fn detected_capacity_picks_best_axis_and_reports_ties() {
        let profile = ChannelErrorProfile {
            x: pair(0.3, 0.3),
            y: pair(0.3, 0.3),
            z: pair(0.0, 0.0),
        };
        let r = detected_capacity(&profile);
        assert_eq!((r.c_d, r.winner), (1.0, Axis::Z));
        assert_eq!(r.ties, vec![Axis::Z]);

        let e = pair(0.2, 0.2);
        let r = detected_capacity(&ChannelErrorProfile { x: e, y: e, z: e });
        assert!((r.c_d - (1.0 - binary_entropy(0.2).unwrap())).abs() < 1e-14);
        assert_eq!(r.winner, Axis::Z);
        assert_eq!(r.ties, vec![Axis::Z, Axis::X, Axis::Y]);

        let r = detected_capacity(&ChannelErrorProfile {
            x: pair(0.1, 0.1),
            y: pair(0.1, 0.1),
            z: pair(0.0, 0.36),
        });
        assert_eq!(r.winner, Axis::X);
        assert_eq!(r.ties, vec![Axis::X, Axis::Y]);
    }

    fn valid_pair() -> impl Strategy<Value = ErrorPair> {
        (0.0f64..=1.0, 0.0f64..=1.0).prop_map(|(a, b)| ErrorPair::canonical(a, b).unwrap())
    }

    proptest! {
        #[test]
        fn capacity_in_unit_interval(e in valid_pair()) {
            let c = capacity_cb(&e);
            prop_assert!((0.0..=1.0).contains(&c));
            if e.e0 + e.e1 < 1.0 - 1e-3 {
                prop_assert!(c > 0.0);
            }
        }

        #[test]
        fn optimal_prior_beats_random_priors(e in valid_pair(), ps in proptest::collection::vec(0.0f64..=1.0, 100)) {
            let q = TransitionMatrix::from_errors(Axis::Z, e.e0, e.e1);
            let best = mutual_information(&q, &optimal_prior(&e).prior);
            for p in ps {
                let other = mutual_information(&q, &PriorDistribution::new(p).unwrap());
                prop_assert!(best >= other - 1e-12);
            }
        }

        #[test]
        fn capacity_matches_mutual_information_at_optimum(e in valid_pair()) {
            let q = TransitionMatrix::from_errors(Axis::Z, e.e0, e.e1);
            let mi = mutual_information(&q, &optimal_prior(&e).prior);
            prop_assert!((mi - capacity_cb(&e)).abs() < 1e-9);
        }
    }
}
