//! Forward model of the measurement scheme: a Werner probe, the channel on
//! the system qubit, local projective measurements on both qubits, and
//! photon-coincidence statistics.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::channel::{apply_extended, check_probability, make_pauli_channel, KrausChannel, PauliParams};
use crate::error::{Error, Result};
use crate::qubit::{bell_projector, kron, pauli_basis, validate_density, Axis, DensityMatrix, Mat4};

/// Werner probe `ρ_F = (4F−1)/3 |Φ⁺⟩⟨Φ⁺| + (1−F)/3 I`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WernerState {
    fidelity: f64,
    state: DensityMatrix<4>,
}

impl WernerState {
    pub fn fidelity(&self) -> f64 {
        self.fidelity
    }

    pub fn state(&self) -> &DensityMatrix<4> {
        &self.state
    }

    /// True when `F` is within 1e-6 of 1/4, where the probe is separable
    /// noise and the counts cannot be deconvolved.
    pub fn near_singular(&self) -> bool {
        (self.fidelity - 0.25).abs() <= 1e-6
    }
}

pub fn werner_state(fidelity: f64) -> Result<WernerState> {
    check_probability("F", fidelity)?;
    let m = bell_projector().scale((4.0 * fidelity - 1.0) / 3.0) + Mat4::identity().scale((1.0 - fidelity) / 3.0);
    Ok(WernerState {
        fidelity,
        state: validate_density(m)?,
    })
}

/// Optical transmissions of the two photon paths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyModel {
    pub eps_opt: f64,
    pub eps_smf: f64,
    pub eps_spad: f64,
    pub eps_channel: f64,
}

impl Default for EfficiencyModel {
    fn default() -> Self {
        Self::with_channel(0.98)
    }
}

impl EfficiencyModel {
    pub fn with_channel(eps_channel: f64) -> Self {
        Self {
            eps_opt: 0.9,
            eps_smf: 0.73,
            eps_spad: 0.7,
            eps_channel,
        }
    }

    /// Transmission of the path through the channel. Fiber coupling enters
    /// twice.
    pub fn system(&self) -> f64 {
        self.eps_opt * self.eps_channel * self.eps_smf * self.eps_smf * self.eps_spad
    }

    pub fn ancilla(&self) -> f64 {
        self.eps_opt * self.eps_smf * self.eps_spad
    }

    /// Two-photon coincidence efficiency `ε_s · ε_a`.
    pub fn coincidence(&self) -> f64 {
        self.system() * self.ancilla()
    }

    pub fn validate(&self) -> Result<()> {
        check_probability("eps_opt", self.eps_opt)?;
        check_probability("eps_smf", self.eps_smf)?;
        check_probability("eps_spad", self.eps_spad)?;
        check_probability("eps_channel", self.eps_channel)
    }
}

/// Coincidence counts for one axis; `counts[j][i]` pairs system outcome `j`
/// with ancilla outcome `i`, both in the axis eigenbasis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoincidenceSet {
    pub axis: Axis,
    pub counts: [[f64; 2]; 2],
    /// Seconds.
    pub integration_time: f64,
    /// Pairs per second.
    pub flux: f64,
}

impl CoincidenceSet {
    pub fn new(axis: Axis, counts: [[f64; 2]; 2], integration_time: f64, flux: f64) -> Result<Self> {
        for &c in counts.iter().flatten() {
            if !(c.is_finite() && c >= 0.0) {
                return Err(Error::OutOfRange {
                    name: "coincidence count",
                    value: c,
                    range: "finite, ≥ 0",
                });
            }
        }
        Ok(Self {
            axis,
            counts,
            integration_time,
            flux,
        })
    }

    pub fn total(&self) -> f64 {
        self.counts.iter().flatten().sum()
    }

    pub fn scaled(&self, k: f64) -> Self {
        let mut out = *self;
        out.counts.iter_mut().flatten().for_each(|c| *c *= k);
        out
    }
}

/// `p_F(j,i) = Tr[(|j⟩⟨j| ⊗ |i⟩⟨i|)(E ⊗ I)ρ_F]` in the eigenbasis of `axis`.
pub fn joint_probabilities(ch: &KrausChannel, fidelity: f64, axis: Axis) -> Result<[[f64; 2]; 2]> {
    let probe = werner_state(fidelity)?;
    let out = apply_extended(ch, probe.state())?;
    let basis = pauli_basis(axis);
    let mut p = [[0.0; 2]; 2];
    for (j, row) in p.iter_mut().enumerate() {
        for (i, v) in row.iter_mut().enumerate() {
            let proj = kron(&basis.projector(j), &basis.projector(i));
            *v = (proj * *out.matrix()).trace().re;
        }
    }
    Ok(p)
}

/// Expected (real-valued) counts `flux · t · ε_{s,a} · p(j,i)`.
pub fn expected_counts(
    axis: Axis,
    p: &[[f64; 2]; 2],
    eff: &EfficiencyModel,
    flux: f64,
    integration_time: f64,
) -> Result<CoincidenceSet> {
    if !(flux > 0.0 && integration_time > 0.0) {
        return Err(Error::OutOfRange {
            name: "flux · time",
            value: flux * integration_time,
            range: "> 0",
        });
    }
    eff.validate()?;
    let k = flux * integration_time * eff.coincidence();
    let mut counts = [[0.0; 2]; 2];
    for j in 0..2 {
        for i in 0..2 {
            counts[j][i] = k * p[j][i].max(0.0);
        }
    }
    CoincidenceSet::new(axis, counts, integration_time, flux)
}

/// Mean above which Poisson draws use the rounded normal approximation.
pub const POISSON_NORMAL_THRESHOLD: f64 = 30.0;

/// One Poisson draw: inversion below [`POISSON_NORMAL_THRESHOLD`], a
/// rounded normal clamped at zero above it.
pub fn poisson<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> f64 {
    if mean <= 0.0 {
        return 0.0;
    }
    if mean < POISSON_NORMAL_THRESHOLD {
        let u: f64 = rng.random();
        let mut k = 0u32;
        let mut p = (-mean).exp();
        let mut cdf = p;
        while u > cdf && k < 1000 {
            k += 1;
            p *= mean / k as f64;
            cdf += p;
        }
        k as f64
    } else {
        let z: f64 = rng.sample(StandardNormal);
        (mean + mean.sqrt() * z).round().max(0.0)
    }
}

/// Resamples every count as an independent Poisson draw.
pub fn sample_counts_with<R: Rng + ?Sized>(expected: &CoincidenceSet, rng: &mut R) -> CoincidenceSet {
    let mut out = *expected;
    for c in out.counts.iter_mut().flatten() {
        *c = poisson(*c, rng);
    }
    out
}

/// [`sample_counts_with`] driven by a generator seeded from `seed`.
pub fn sample_counts(expected: &CoincidenceSet, seed: u64) -> CoincidenceSet {
    sample_counts_with(expected, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Weighted entrywise sum of coincidence sets measured on the same axis.
pub fn mixture_counts(components: &[(f64, CoincidenceSet)]) -> Result<CoincidenceSet> {
    let (_, first) = components
        .first()
        .ok_or_else(|| Error::Mixture("no components".into()))?;
    let mut total_w = 0.0;
    let mut counts = [[0.0; 2]; 2];
    for (w, set) in components {
        if !(*w >= 0.0 && w.is_finite()) {
            return Err(Error::Mixture(format!("negative weight {w}")));
        }
        if set.axis != first.axis {
            return Err(Error::Mixture(format!("axis {} mixed with {}", set.axis, first.axis)));
        }
        total_w += w;
        for j in 0..2 {
            for i in 0..2 {
                counts[j][i] += w * set.counts[j][i];
            }
        }
    }
    if (total_w - 1.0).abs() > 1e-9 {
        return Err(Error::Mixture(format!("weights sum to {total_w}")));
    }
    CoincidenceSet::new(first.axis, counts, first.integration_time, first.flux)
}

/// Expected counts of a Pauli channel realized as a `q`-weighted mixture of
/// separately measured unitary settings.
pub fn pauli_mixture_counts(
    params: PauliParams,
    fidelity: f64,
    axis: Axis,
    eff: &EfficiencyModel,
    flux: f64,
    integration_time: f64,
) -> Result<CoincidenceSet> {
    let parts = unitary_components(params)?
        .into_iter()
        .map(|(w, unit)| {
            let p = joint_probabilities(&make_pauli_channel(unit)?, fidelity, axis)?;
            Ok((w, expected_counts(axis, &p, eff, flux, integration_time)?))
        })
        .collect::<Result<Vec<_>>>()?;
    mixture_counts(&parts)
}

/// `(q_k, σ_k)` with each σ_k written as a deterministic Pauli channel.
fn unitary_components(p: PauliParams) -> Result<Vec<(f64, PauliParams)>> {
    let p = PauliParams::new(p.qx, p.qy, p.qz)?;
    Ok(vec![
        (p.q_identity(), PauliParams::new(0.0, 0.0, 0.0)?),
        (p.qx, PauliParams::new(1.0, 0.0, 0.0)?),
        (p.qy, PauliParams::new(0.0, 1.0, 0.0)?),
        (p.qz, PauliParams::new(0.0, 0.0, 1.0)?),
    ]
    .into_iter()
    .filter(|(w, _)| *w > 0.0)
    .collect())
}

/// Damping probability set by the waveplate angle `ω` (degrees):
/// `η = 1 − cos²(2ω)`, on the branch `ω ∈ [45°, 90°]`.
pub fn ad_angle_map(omega_deg: f64) -> Result<f64> {
    if !(45.0..=90.0).contains(&omega_deg) {
        return Err(Error::OutOfRange {
            name: "omega",
            value: omega_deg,
            range: "[45°, 90°]",
        });
    }
    let c = (2.0 * omega_deg.to_radians()).cos();
    Ok((1.0 - c * c).clamp(0.0, 1.0))
}

/// Inverse of [`ad_angle_map`]: `ω = arccos(−√(1−η)) / 2` in degrees.
pub fn ad_angle_inverse(eta: f64) -> Result<f64> {
    check_probability("eta", eta)?;
    Ok((-(1.0 - eta).sqrt()).acos().to_degrees() / 2.0)
}
