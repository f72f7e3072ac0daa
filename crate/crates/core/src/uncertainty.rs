//! Statistical error bars: Poissonian Monte Carlo over the whole
//! reconstruction pipeline, the σ_F penalty of an imperfect probe, and the
//! waveplate-angle contribution for amplitude damping.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::capacity::{detected_capacity, AxisSpread, CapacityReport};
use crate::error::{Error, Result};
use crate::qubit::Axis;
use crate::reconstruct::{deconvolve_q, error_profile, Sanitization, TransitionMatrix};
use crate::simulate::{ad_angle_map, sample_counts_with, CoincidenceSet};

pub const MIN_TRIALS: usize = 8;

/// Default waveplate-angle uncertainty, degrees.
pub const DEFAULT_DELTA_OMEGA: f64 = 0.5;

/// Mean and sample standard deviation of one quantity.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    pub std: f64,
    pub n: usize,
}

impl Stat {
    /// Two-pass estimate with sequential summation, so the result only
    /// depends on the order of `xs`.
    pub fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len();
        if n == 0 {
            return Self::default();
        }
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = if n > 1 {
            xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64
        } else {
            0.0
        };
        Self {
            mean,
            std: var.sqrt(),
            n,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisStats {
    pub axis: Axis,
    /// Deconvolved entries `Q(j|i)` before sanitization, `q[j][i]`.
    pub q: [[Stat; 2]; 2],
    pub e0: Stat,
    pub e1: Stat,
    pub p0: Stat,
    pub capacity: Stat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloResult {
    /// In z, x, y order.
    pub axes: Vec<AxisStats>,
    pub c_d: Stat,
    pub trials: usize,
    pub excluded: usize,
    pub seed: u64,
}

impl MonteCarloResult {
    pub fn axis(&self, axis: Axis) -> &AxisStats {
        self.axes.iter().find(|a| a.axis == axis).expect("all axes present")
    }

    /// Copies the standard deviations onto a point estimate.
    pub fn annotate(&self, report: &mut CapacityReport) {
        for a in &mut report.axes {
            let s = self.axis(a.axis);
            a.std = Some(AxisSpread {
                e0: s.e0.std,
                e1: s.e1.std,
                p0: s.p0.std,
                capacity: s.capacity.std,
            });
        }
        report.c_d_std = Some(self.c_d.std);
    }
}

/// Per-axis coincidence sets, checked to contain each axis exactly once.
fn by_axis(sets: &[CoincidenceSet]) -> Result<[CoincidenceSet; 3]> {
    let pick = |axis: Axis| {
        let mut it = sets.iter().filter(|s| s.axis == axis);
        match (it.next(), it.next()) {
            (Some(s), None) => Ok(*s),
            _ => Err(Error::Config(format!(
                "expected exactly one coincidence set for axis {axis}"
            ))),
        }
    };
    Ok([pick(Axis::Z)?, pick(Axis::X)?, pick(Axis::Y)?])
}

/// Deconvolved matrices plus the capacity report for one set of counts.
pub fn estimate(
    sets: &[CoincidenceSet],
    fidelity: f64,
    mode: Sanitization,
) -> Result<(Vec<TransitionMatrix>, CapacityReport)> {
    let qs = by_axis(sets)?
        .iter()
        .map(|s| deconvolve_q(s, fidelity))
        .collect::<Result<Vec<_>>>()?;
    let report = detected_capacity(&error_profile(&qs, mode)?);
    Ok((qs, report))
}

/// Generator for trial `k`: one ChaCha stream per trial under a common seed.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Resamples `expected` with Poisson noise `trials` times and pushes every
/// sample through deconvolution → sanitization → error identification →
/// capacities. Trials run in parallel; aggregation is in trial order.
pub fn mc_capacity_distribution(
    expected: &[CoincidenceSet],
    fidelity: f64,
    trials: usize,
    seed: u64,
    mode: Sanitization,
) -> Result<MonteCarloResult> {
    if trials < MIN_TRIALS {
        return Err(Error::TooFewTrials {
            min: MIN_TRIALS,
            got: trials,
        });
    }
    let expected = by_axis(expected)?;
    let outcomes: Vec<Result<(Vec<TransitionMatrix>, CapacityReport)>> = (0..trials)
        .into_par_iter()
        .map(|k| {
            let mut rng = trial_rng(seed, k as u64);
            let sampled: Vec<CoincidenceSet> = expected.iter().map(|e| sample_counts_with(e, &mut rng)).collect();
            estimate(&sampled, fidelity, mode)
        })
        .collect();

    let mut ok = Vec::with_capacity(trials);
    let mut first_err = None;
    for o in outcomes {
        match o {
            Ok(v) => ok.push(v),
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    let excluded = trials - ok.len();
    // More than 1% failures would bias the mean.
    if excluded * 100 > trials || ok.len() < MIN_TRIALS {
        return Err(Error::TooManyExclusions {
            excluded,
            trials,
            first: first_err.map(|e| e.to_string()).unwrap_or_default(),
        });
    }

    let column = |f: &dyn Fn(&(Vec<TransitionMatrix>, CapacityReport)) -> f64| {
        Stat::from_samples(&ok.iter().map(f).collect::<Vec<_>>())
    };
    let axes = Axis::ALL
        .iter()
        .enumerate()
        .map(|(k, &axis)| {
            let entry = |j: usize, i: usize| column(&|t| t.0[k].get(j, i));
            AxisStats {
                axis,
                q: [[entry(0, 0), entry(0, 1)], [entry(1, 0), entry(1, 1)]],
                e0: column(&|t| t.1.axis(axis).errors.e0),
                e1: column(&|t| t.1.axis(axis).errors.e1),
                p0: column(&|t| t.1.axis(axis).prior.p0()),
                capacity: column(&|t| t.1.axis(axis).capacity),
            }
        })
        .collect();
    Ok(MonteCarloResult {
        axes,
        c_d: column(&|t| t.1.c_d),
        trials,
        excluded,
        seed,
    })
}

/// Standard-deviation penalty of deconvolving a Werner probe relative to a
/// perfect one: `√(8F² − 4F + 5) / |4F − 1|`.
pub fn sigma_f_ratio(fidelity: f64) -> Result<f64> {
    let d = (4.0 * fidelity - 1.0).abs();
    if d <= 1e-6 || !fidelity.is_finite() {
        return Err(Error::SingularFidelity(fidelity));
    }
    Ok((8.0 * fidelity * fidelity - 4.0 * fidelity + 5.0).sqrt() / d)
}

/// `δη = |dη/dω| δω` with `dη/dω = 2 sin 4ω`; angles in degrees.
pub fn ad_angle_uncertainty(omega_deg: f64, delta_omega_deg: f64) -> Result<f64> {
    ad_angle_map(omega_deg)?;
    let slope = 2.0 * (4.0 * omega_deg.to_radians()).sin();
    Ok((slope * delta_omega_deg.to_radians()).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{make_pauli_channel, PauliParams};
    use crate::simulate::{expected_counts, joint_probabilities, EfficiencyModel};

    fn depolarized(q: f64, scale: f64) -> Vec<CoincidenceSet> {
        let ch = make_pauli_channel(PauliParams::depolarizing(q).unwrap()).unwrap();
        Axis::ALL
            .iter()
            .map(|&axis| {
                let p = joint_probabilities(&ch, 0.979, axis).unwrap();
                expected_counts(axis, &p, &EfficiencyModel::default(), 2.65e5 * scale, 10.0).unwrap()
            })
            .collect()
    }

    #[test]
    fn sigma_f_examples() {
        assert!((sigma_f_ratio(1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((sigma_f_ratio(0.979).unwrap() - 1.0145).abs() < 5e-4);
        assert!((sigma_f_ratio(0.5).unwrap() - 5f64.sqrt()).abs() < 1e-12);
        assert!(sigma_f_ratio(0.25).is_err());
        let min = (0..=750)
            .map(|k| 0.2501 + k as f64 * 0.001)
            .filter(|f| *f <= 1.0)
            .map(|f| (f, sigma_f_ratio(f).unwrap()))
            .fold((0.0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
        assert!((min.0 - 1.0).abs() < 2e-3, "minimum at {}", min.0);
    }

    #[test]
    fn angle_uncertainty_examples() {
        assert!(ad_angle_uncertainty(45.0, 0.5).unwrap().abs() < 1e-12);
        let d = ad_angle_uncertainty(67.5, DEFAULT_DELTA_OMEGA).unwrap();
        assert!((d - 2.0 * 0.5f64.to_radians()).abs() < 1e-12);
        assert!((d - 0.0175).abs() < 1e-4);
        assert_eq!(ad_angle_uncertainty(60.0, 0.0).unwrap(), 0.0);
        assert!(ad_angle_uncertainty(20.0, 0.5).is_err());
    }

    #[test]
    fn stat_examples() {
        let s = Stat::from_samples(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(s.mean, 2.5);
        assert!((s.std - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert_eq!(s.n, 4);
        assert_eq!(Stat::from_samples(&[]).n, 0);
    }

    #[test]
    fn monte_carlo_is_deterministic() {
        let e = depolarized(0.1, 0.1);
        let a = mc_capacity_distribution(&e, 0.979, 32, 9, Sanitization::PaperAbs).unwrap();
        let b = mc_capacity_distribution(&e, 0.979, 32, 9, Sanitization::PaperAbs).unwrap();
        assert_eq!(a, b);
        let c = mc_capacity_distribution(&e, 0.979, 32, 10, Sanitization::PaperAbs).unwrap();
        assert_ne!(a, c);
        assert_eq!(a.c_d.n, 32);
        assert_eq!(a.excluded, 0);
    }

    #[test]
    fn monte_carlo_std_scales_with_counts() {
        let lo = mc_capacity_distribution(&depolarized(0.1, 0.01), 0.979, 400, 1, Sanitization::PaperAbs).unwrap();
        let hi = mc_capacity_distribution(&depolarized(0.1, 1.0), 0.979, 400, 1, Sanitization::PaperAbs).unwrap();
        for axis in Axis::ALL {
            let r = lo.axis(axis).q[0][0].std / hi.axis(axis).q[0][0].std;
            assert!((r / 10.0 - 1.0).abs() < 0.1, "{axis}: ratio {r}");
        }
    }

    #[test]
    fn monte_carlo_rejects_bad_input() {
        let e = depolarized(0.1, 0.1);
        assert!(matches!(
            mc_capacity_distribution(&e, 0.979, 7, 0, Sanitization::PaperAbs),
            Err(Error::TooFewTrials { .. })
        ));
        assert!(mc_capacity_distribution(&e[..2], 0.979, 8, 0, Sanitization::PaperAbs).is_err());
        // Expected counts so small that most samples have an empty column.
        let tiny: Vec<CoincidenceSet> = e.iter().map(|s| s.scaled(1e-6)).collect();
        assert!(matches!(
            mc_capacity_distribution(&tiny, 0.979, 100, 0, Sanitization::PaperAbs),
            Err(Error::TooManyExclusions { .. })
        ));
    }

    #[test]
    fn annotate_fills_spreads() {
        let e = depolarized(0.05, 0.1);
        let mc = mc_capacity_distribution(&e, 0.979, 16, 3, Sanitization::PaperAbs).unwrap();
        let (_, mut report) = estimate(&e, 0.979, Sanitization::PaperAbs).unwrap();
        mc.annotate(&mut report);
        assert_eq!(report.c_d_std, Some(mc.c_d.std));
        assert!(report.axes.iter().all(|a| a.std.is_some()));
    }
}
