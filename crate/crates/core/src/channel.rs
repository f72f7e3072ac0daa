//! Kraus models of the Pauli and amplitude-damping channels, and their
//! closed-form predictions.

use serde::{Deserialize, Serialize};

use crate::capacity::{binary_entropy, capacity_cb};
use crate::error::{Error, Result};
use crate::qubit::{kron, Axis, DensityMatrix, Mat2, Mat4, DENSITY_TOL};
use crate::reconstruct::ErrorPair;

/// Pauli flip probabilities; `q_I = 1 - (q_x + q_y + q_z)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PauliParams {
    pub qx: f64,
    pub qy: f64,
    pub qz: f64,
}

impl PauliParams {
    pub fn new(qx: f64, qy: f64, qz: f64) -> Result<Self> {
        for (name, v) in [("q_x", qx), ("q_y", qy), ("q_z", qz)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::OutOfRange {
                    name,
                    value: v,
                    range: "[0, 1]",
                });
            }
        }
        let total = qx + qy + qz;
        if total > 1.0 + 1e-12 {
            return Err(Error::OutOfRange {
                name: "q_x + q_y + q_z",
                value: total,
                range: "[0, 1]",
            });
        }
        Ok(Self { qx, qy, qz })
    }

    /// Phase damping: `q_z = q`.
    pub fn phase_damping(q: f64) -> Result<Self> {
        Self::new(0.0, 0.0, q)
    }

    /// Depolarizing: `q_x = q_y = q_z = q`.
    pub fn depolarizing(q: f64) -> Result<Self> {
        Self::new(q, q, q)
    }

    pub fn q_identity(&self) -> f64 {
        (1.0 - (self.qx + self.qy + self.qz)).max(0.0)
    }

    /// Probability that a measurement in the σ_α basis is flipped:
    /// the weight of the two Paulis anticommuting with σ_α.
    pub fn flip_probability(&self, axis: Axis) -> f64 {
        match axis {
            Axis::X => self.qy + self.qz,
            Axis::Y => self.qx + self.qz,
            Axis::Z => self.qx + self.qy,
        }
    }

    /// `(weight, operator)` for I, σ_x, σ_y, σ_z in that order.
    pub fn components(&self) -> [(f64, Mat2); 4] {
        [
            (self.q_identity(), Mat2::identity()),
            (self.qx, Axis::X.pauli()),
            (self.qy, Axis::Y.pauli()),
            (self.qz, Axis::Z.pauli()),
        ]
    }
}

/// Which channel a Kraus list realizes, with its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ChannelKind {
    Pauli(PauliParams),
    AmplitudeDamping { eta: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel {
    ops: Vec<Mat2>,
    kind: ChannelKind,
}

impl KrausChannel {
    pub fn ops(&self) -> &[Mat2] {
        &self.ops
    }

    pub fn kind(&self) -> ChannelKind {
        self.kind
    }

    pub fn from_kind(kind: ChannelKind) -> Result<Self> {
        match kind {
            ChannelKind::Pauli(p) => make_pauli_channel(p),
            ChannelKind::AmplitudeDamping { eta } => make_amplitude_damping(eta),
        }
    }

    /// `‖Σ K†K − I‖_max`.
    pub fn completeness_deviation(&self) -> f64 {
        let sum = self.ops.iter().fold(Mat2::zeros(), |acc, k| acc + k.dagger() * *k);
        sum.max_abs_diff(&Mat2::identity())
    }
}

pub fn make_pauli_channel(p: PauliParams) -> Result<KrausChannel> {
    let p = PauliParams::new(p.qx, p.qy, p.qz)?;
    let ops = p
        .components()
        .into_iter()
        .filter(|(w, _)| *w > 0.0)
        .map(|(w, op)| op.scale(w.sqrt()))
        .collect();
    Ok(KrausChannel {
        ops,
        kind: ChannelKind::Pauli(p),
    })
}

/// `K0 = |0⟩⟨0| + √(1−η)|1⟩⟨1|`, `K1 = √η |0⟩⟨1|`.
pub fn make_amplitude_damping(eta: f64) -> Result<KrausChannel> {
    check_probability("eta", eta)?;
    let k0 = Mat2::from_real([[1.0, 0.0], [0.0, (1.0 - eta).sqrt()]]);
    let k1 = Mat2::from_real([[0.0, eta.sqrt()], [0.0, 0.0]]);
    Ok(KrausChannel {
        ops: vec![k0, k1],
        kind: ChannelKind::AmplitudeDamping { eta },
    })
}

pub(crate) fn check_probability(name: &'static str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            name,
            value: v,
            range: "[0, 1]",
        })
    }
}

/// `Σ_k K_k ρ K_k†`.
pub fn apply(ch: &KrausChannel, rho: &DensityMatrix<2>) -> Result<DensityMatrix<2>> {
    let out = ch
        .ops
        .iter()
        .fold(Mat2::zeros(), |acc, k| acc + k.conjugate(rho.matrix()));
    check_trace(out.trace().re, rho.matrix().trace().re)?;
    DensityMatrix::new(out)
}

/// `(E ⊗ I)(ρ)` on a system ⊗ ancilla state.
pub fn apply_extended(ch: &KrausChannel, rho: &DensityMatrix<4>) -> Result<DensityMatrix<4>> {
    let id = Mat2::identity();
    let out = ch
        .ops
        .iter()
        .fold(Mat4::zeros(), |acc, k| acc + kron(k, &id).conjugate(rho.matrix()));
    check_trace(out.trace().re, rho.matrix().trace().re)?;
    DensityMatrix::new(out)
}

fn check_trace(after: f64, before: f64) -> Result<()> {
    let drift = (after - before).abs();
    if drift > DENSITY_TOL {
        Err(Error::NotTracePreserving(drift))
    } else {
        Ok(())
    }
}

/// Canonical `(ε0, ε1)` for each measurement axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelErrorProfile {
    pub x: ErrorPair,
    pub y: ErrorPair,
    pub z: ErrorPair,
}

impl ChannelErrorProfile {
    pub fn get(&self, axis: Axis) -> ErrorPair {
        match axis {
            Axis::X => self.x,
            Axis::Y => self.y,
            Axis::Z => self.z,
        }
    }
}

/// Error probability of the x and y settings under amplitude damping.
pub fn ad_transverse_error(eta: f64) -> f64 {
    (1.0 - (1.0 - eta).sqrt()) / 2.0
}

pub fn theoretical_errors(kind: ChannelKind) -> Result<ChannelErrorProfile> {
    match kind {
        ChannelKind::AmplitudeDamping { eta } => {
            check_probability("eta", eta)?;
            let e = ad_transverse_error(eta);
            let xy = ErrorPair::canonical(e, e)?;
            Ok(ChannelErrorProfile {
                x: xy,
                y: xy,
                z: ErrorPair::canonical(0.0, eta)?,
            })
        }
        ChannelKind::Pauli(p) => {
            let p = PauliParams::new(p.qx, p.qy, p.qz)?;
            let sym = |axis| {
                let s = p.flip_probability(axis);
                let e = s.min(1.0 - s);
                ErrorPair::canonical(e, e)
            };
            Ok(ChannelErrorProfile {
                x: sym(Axis::X)?,
                y: sym(Axis::Y)?,
                z: sym(Axis::Z)?,
            })
        }
    }
}

/// Closed-form detected capacity (bits) and the axes attaining it.
pub fn theoretical_detected_capacity(kind: ChannelKind) -> Result<(f64, Vec<Axis>)> {
    let profile = theoretical_errors(kind)?;
    let per_axis: Vec<(Axis, f64)> = Axis::ALL.iter().map(|&a| (a, capacity_cb(&profile.get(a)))).collect();
    let c_d = match kind {
        ChannelKind::AmplitudeDamping { eta } => 1.0 - binary_entropy(ad_transverse_error(eta))?,
        ChannelKind::Pauli(p) => {
            let worst = Axis::ALL
                .iter()
                .map(|&a| {
                    let s = p.flip_probability(a);
                    binary_entropy(s.min(1.0 - s))
                })
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .fold(f64::INFINITY, f64::min);
            1.0 - worst
        }
    };
    let best = per_axis.iter().map(|(_, c)| *c).fold(f64::NEG_INFINITY, f64::max);
    let winners = per_axis
        .iter()
        .filter(|(_, c)| *c >= best - 1e-12)
        .map(|(a, _)| *a)
        .collect();
    Ok((c_d, winners))
}

/// `g(η, t) = [1 + √(1 − 4η(1−η)t²)] / 2`.
pub fn ad_holevo_g(eta: f64, t: f64) -> f64 {
    0.5 * (1.0 + (1.0 - 4.0 * eta * (1.0 - eta) * t * t).max(0.0).sqrt())
}

/// The one-shot objective `H[t(1−η)] − H[g(η,t)]` for amplitude damping.
pub fn ad_holevo_objective(eta: f64, t: f64) -> f64 {
    let h = |p: f64| binary_entropy(p.clamp(0.0, 1.0)).unwrap_or(0.0);
    h(t * (1.0 - eta)) - h(ad_holevo_g(eta, t))
}

const HOLEVO_GRID: usize = 10_000;

/// Holevo capacity of amplitude damping, maximized over `t ∈ [0, 1]`.
///
/// Golden-section search to `|Δt| ≤ 1e-10`; the result is cross-checked
/// against a 10⁴-point grid, which would expose a non-unimodal objective.
pub fn holevo_capacity_ad(eta: f64) -> Result<f64> {
    check_probability("eta", eta)?;
    let f = |t: f64| ad_holevo_objective(eta, t);
    let (t_star, best) = golden_section_max(f, 0.0, 1.0, 1e-10);
    let best = [0.0, 1.0].into_iter().map(f).fold(best, f64::max);
    let grid_best = (0..=HOLEVO_GRID)
        .map(|k| f(k as f64 / HOLEVO_GRID as f64))
        .fold(f64::NEG_INFINITY, f64::max);
    if grid_best > best + 1e-9 {
        return Err(Error::Optimization(format!(
            "grid maximum {grid_best} exceeds golden-section maximum {best} at t={t_star} (eta={eta})"
        )));
    }
    Ok(best)
}

/// Maximizes a unimodal `f` on `[lo, hi]`; returns `(argmax, max)`.
pub(crate) fn golden_section_max<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a) > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let t = 0.5 * (a + b);
    (t, f(t).max(fc).max(fd))
}
