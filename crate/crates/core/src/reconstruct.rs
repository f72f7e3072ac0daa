//! From coincidence counts to transition matrices and binary error pairs.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::channel::ChannelErrorProfile;
use crate::error::{Error, Result};
use crate::qubit::Axis;
use crate::simulate::CoincidenceSet;

/// Column-sum tolerance for normalized transition matrices.
pub const COLUMN_TOL: f64 = 1e-9;

/// How negative reconstructed probabilities are treated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sanitization {
    /// Replace negatives by their absolute value, then renormalize columns.
    #[default]
    PaperAbs,
    /// Set negatives to zero, then renormalize columns.
    Clamp,
    /// Leave the matrix untouched.
    None,
}

impl fmt::Display for Sanitization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sanitization::PaperAbs => "paper-abs",
            Sanitization::Clamp => "clamp",
            Sanitization::None => "none",
        })
    }
}

impl std::str::FromStr for Sanitization {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "paper-abs" => Ok(Sanitization::PaperAbs),
            "clamp" => Ok(Sanitization::Clamp),
            "none" => Ok(Sanitization::None),
            _ => Err(format!("unknown sanitization mode `{s}` (paper-abs, clamp, none)")),
        }
    }
}

/// `Q(j|i)` for one measurement axis, stored as `entries[j][i]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionMatrix {
    axis: Axis,
    entries: [[f64; 2]; 2],
    mode: Option<Sanitization>,
}

impl TransitionMatrix {
    /// Checks that each input column sums to one.
    pub fn new(axis: Axis, entries: [[f64; 2]; 2]) -> Result<Self> {
        for i in 0..2 {
            let s = entries[0][i] + entries[1][i];
            if (s - 1.0).abs() > COLUMN_TOL {
                return Err(Error::OutOfRange {
                    name: "transition column sum",
                    value: s,
                    range: "1 ± 1e-9",
                });
            }
        }
        Ok(Self {
            axis,
            entries,
            mode: None,
        })
    }

    /// Matrix whose columns need not be normalized, as assembled from
    /// tabulated probabilities. Only [`sanitize`] should consume it.
    pub fn unnormalized(axis: Axis, entries: [[f64; 2]; 2]) -> Self {
        Self {
            axis,
            entries,
            mode: None,
        }
    }

    /// Binary channel with `Q(1|0) = e0` and `Q(0|1) = e1`.
    pub fn from_errors(axis: Axis, e0: f64, e1: f64) -> Self {
        Self {
            axis,
            entries: [[1.0 - e0, e1], [e0, 1.0 - e1]],
            mode: None,
        }
    }

    pub fn axis(&self) -> Axis {
        self.axis
    }

    pub fn entries(&self) -> [[f64; 2]; 2] {
        self.entries
    }

    /// `Q(j|i)`.
    pub fn get(&self, output: usize, input: usize) -> f64 {
        self.entries[output][input]
    }

    /// Sanitization applied so far, if any.
    pub fn mode(&self) -> Option<Sanitization> {
        self.mode
    }

    pub fn relabel(&self, r: Relabeling) -> Self {
        let (swap_out, swap_in) = r.swaps();
        let mut e = [[0.0; 2]; 2];
        for (j, row) in e.iter_mut().enumerate() {
            for (i, v) in row.iter_mut().enumerate() {
                *v = self.entries[j ^ swap_out as usize][i ^ swap_in as usize];
            }
        }
        Self { entries: e, ..*self }
    }
}

/// One of the four relabelings of input and output bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Relabeling {
    Identity,
    OutputSwap,
    InputSwap,
    BothSwap,
}

impl Relabeling {
    /// Tie-break order.
    pub const ALL: [Relabeling; 4] = [
        Relabeling::Identity,
        Relabeling::OutputSwap,
        Relabeling::InputSwap,
        Relabeling::BothSwap,
    ];

    fn swaps(self) -> (bool, bool) {
        match self {
            Relabeling::Identity => (false, false),
            Relabeling::OutputSwap => (true, false),
            Relabeling::InputSwap => (false, true),
            Relabeling::BothSwap => (true, true),
        }
    }

    /// Errors `(ε0, ε1)` after relabeling a channel with `Q(1|0) = a`, `Q(0|1) = b`.
    fn apply(self, a: f64, b: f64) -> (f64, f64) {
        match self {
            Relabeling::Identity => (a, b),
            Relabeling::OutputSwap => (1.0 - a, 1.0 - b),
            Relabeling::InputSwap => (1.0 - b, 1.0 - a),
            Relabeling::BothSwap => (b, a),
        }
    }
}

const CONVENTION_TOL: f64 = 1e-12;

/// Binary-channel errors in canonical labeling:
/// `0 ≤ ε0 ≤ 1/2`, `ε0 ≤ ε1`, `ε0 ≤ 1 − ε1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorPair {
    pub e0: f64,
    pub e1: f64,
    pub labeling: Relabeling,
}

impl ErrorPair {
    /// Pair already in canonical labeling.
    pub fn new(e0: f64, e1: f64) -> Result<Self> {
        if satisfies_convention(e0, e1) {
            Ok(Self {
                e0,
                e1,
                labeling: Relabeling::Identity,
            })
        } else {
            Err(Error::Convention { e0, e1 })
        }
    }

    /// Canonicalizes the raw errors `a = Q(1|0)`, `b = Q(0|1)` by trying
    /// the four relabelings in tie-break order.
    pub fn canonical(a: f64, b: f64) -> Result<Self> {
        Relabeling::ALL
            .iter()
            .map(|&r| (r, r.apply(a, b)))
            .find(|(_, (e0, e1))| satisfies_convention(*e0, *e1))
            .map(|(labeling, (e0, e1))| Self {
                e0: e0.max(0.0),
                e1: e1.clamp(0.0, 1.0),
                labeling,
            })
            .ok_or(Error::Convention { e0: a, e1: b })
    }
}

fn satisfies_convention(e0: f64, e1: f64) -> bool {
    let t = CONVENTION_TOL;
    e0.is_finite() && e1.is_finite() && e0 >= -t && e0 <= 0.5 + t && e1 <= 1.0 + t && e0 <= e1 + t && e0 <= 1.0 - e1 + t
}

/// Fidelity at which the Werner probe carries no correlations.
fn check_fidelity(f: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&f) {
        return Err(Error::OutOfRange {
            name: "F",
            value: f,
            range: "[0, 1]",
        });
    }
    if (4.0 * f - 1.0).abs() <= 1e-6 {
        return Err(Error::SingularFidelity(f));
    }
    Ok(())
}

/// Ancilla slot paired with logical input `i`. The y eigenbasis is not real,
/// so transposition maps the ancilla's R onto input L and vice versa.
pub(crate) fn ancilla_slot(axis: Axis, input: usize) -> usize {
    match axis {
        Axis::Y => input ^ 1,
        Axis::X | Axis::Z => input,
    }
}

/// Noise-deconvolved transition matrix from one axis of coincidence counts.
///
/// For input `i` with ancilla slot `s`, the weight of output `j` is
/// `(1+2F) C(j,s) − 2(1−F) C(j,s⊕1)`; `Q(0|i)` is its share of the column
/// and `Q(1|i)` the complement.
pub fn deconvolve_q(counts: &CoincidenceSet, fidelity: f64) -> Result<TransitionMatrix> {
    check_fidelity(fidelity)?;
    let c = counts.counts;
    let direct = 1.0 + 2.0 * fidelity;
    let cross = 2.0 * (1.0 - fidelity);
    let scale = c.iter().flatten().map(|v| v.abs()).sum::<f64>().max(1.0);
    let mut entries = [[0.0; 2]; 2];
    for input in 0..2 {
        let s = ancilla_slot(counts.axis, input);
        let weight = |j: usize| direct * c[j][s] - cross * c[j][s ^ 1];
        let den = weight(0) + weight(1);
        if !den.is_finite() || den.abs() <= 1e-12 * scale {
            return Err(Error::ZeroColumn {
                axis: counts.axis,
                input,
                denominator: den,
            });
        }
        let q0 = weight(0) / den;
        entries[0][input] = q0;
        entries[1][input] = 1.0 - q0;
    }
    Ok(TransitionMatrix {
        axis: counts.axis,
        entries,
        mode: None,
    })
}

/// Unbiased estimate of the ideal-probe joint probability `p_1(j,i)`
/// from Werner-probe counts normalized by `total`:
/// `[(1+2F) C(j,s) − 2(1−F) C(j,s⊕1)] / ((4F−1) N)`.
pub fn joint_probability_estimate(counts: &CoincidenceSet, fidelity: f64, total: f64) -> Result<[[f64; 2]; 2]> {
    check_fidelity(fidelity)?;
    if !(total > 0.0) {
        return Err(Error::OutOfRange {
            name: "total counts",
            value: total,
            range: "> 0",
        });
    }
    let c = counts.counts;
    let norm = (4.0 * fidelity - 1.0) * total;
    let mut p = [[0.0; 2]; 2];
    for input in 0..2 {
        let s = ancilla_slot(counts.axis, input);
        for (j, row) in p.iter_mut().enumerate() {
            row[input] = ((1.0 + 2.0 * fidelity) * c[j][s] - 2.0 * (1.0 - fidelity) * c[j][s ^ 1]) / norm;
        }
    }
    Ok(p)
}

/// Canonical error pair of a transition matrix.
///
/// Fails with [`Error::Convention`] when entries lie outside `[0, 1]`,
/// which only happens for unsanitized matrices.
pub fn identify_errors(q: &TransitionMatrix) -> Result<ErrorPair> {
    let (a, b) = (q.get(1, 0), q.get(0, 1));
    for v in q.entries.iter().flatten() {
        if !(-CONVENTION_TOL..=1.0 + CONVENTION_TOL).contains(v) {
            return Err(Error::Convention { e0: a, e1: b });
        }
    }
    ErrorPair::canonical(a, b)
}

/// Removes negative entries according to `mode` and renormalizes columns.
pub fn sanitize(q: &TransitionMatrix, mode: Sanitization) -> Result<TransitionMatrix> {
    let fix: fn(f64) -> f64 = match mode {
        Sanitization::None => return Ok(TransitionMatrix { mode: Some(mode), ..*q }),
        Sanitization::PaperAbs => f64::abs,
        Sanitization::Clamp => |v: f64| v.max(0.0),
    };
    let mut entries = q.entries;
    for input in 0..2 {
        let col = [fix(entries[0][input]), fix(entries[1][input])];
        let sum = col[0] + col[1];
        if sum <= 0.0 || !sum.is_finite() {
            return Err(Error::ZeroColumn {
                axis: q.axis,
                input,
                denominator: sum,
            });
        }
        entries[0][input] = col[0] / sum;
        entries[1][input] = col[1] / sum;
    }
    Ok(TransitionMatrix {
        axis: q.axis,
        entries,
        mode: Some(mode),
    })
}

/// Sanitizes and identifies one transition matrix per axis.
pub fn error_profile(qs: &[TransitionMatrix], mode: Sanitization) -> Result<ChannelErrorProfile> {
    let find = |axis: Axis| -> Result<ErrorPair> {
        let q = qs.iter().find(|q| q.axis == axis).ok_or_else(|| Error::Schema {
            path: Default::default(),
            message: format!("no transition matrix for axis {axis}"),
        })?;
        identify_errors(&sanitize(q, mode)?)
    };
    Ok(ChannelErrorProfile {
        x: find(Axis::X)?,
        y: find(Axis::Y)?,
        z: find(Axis::Z)?,
    })
}
