//! Eigen-optimal excitations of spherical-wave channels.
//!
//! The received incoming power `||M' b||²` over unit `b` is maximized by the
//! dominant eigenvector of `M'^H M'`. Eigenvectors carry an arbitrary phase;
//! here the largest-magnitude entry is made real-positive. Ties between equal
//! eigenvalues are broken by projecting the first mode (in flat order) that
//! has a component in the eigenspace.

use log::debug;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use std::f64::consts::FRAC_1_SQRT_2;

use crate::decompose::{CoefficientRole, CoefficientVector};
use crate::error::{Error, Result};
use crate::modes::{mode_index_from_flat, ModeIndex};
use crate::network::{accepted_power_in_channel, ChannelMatrix};

/// Relative eigenvalue gap below which two eigenvalues count as equal.
const DEGENERACY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Subspace {
    Full,
    /// Modes with `s = 1`.
    TeOnly,
    /// Modes with `s = 2`.
    TmOnly,
}

impl Subspace {
    pub fn contains(self, mode: ModeIndex) -> bool {
        match self {
            Subspace::Full => true,
            Subspace::TeOnly => mode.s == 1,
            Subspace::TmOnly => mode.s == 2,
        }
    }
}

impl std::str::FromStr for Subspace {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(Subspace::Full),
            "te" => Ok(Subspace::TeOnly),
            "tm" => Ok(Subspace::TmOnly),
            _ => Err(Error::InvalidArgument(format!("unknown subspace `{s}`, expected te, tm or full"))),
        }
    }
}

impl std::fmt::Display for Subspace {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Subspace::Full => "full",
            Subspace::TeOnly => "te",
            Subspace::TmOnly => "tm",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimalExcitation {
    /// Unit-norm outgoing-equivalent excitation.
    pub b_opt: CoefficientVector,
    /// Largest eigenvalue of `M'^H M'` on the subspace.
    pub lambda_max: f64,
    pub subspace: Subspace,
    pub scenario_tag: String,
}

impl OptimalExcitation {
    /// Mixed TE and TM content: a Huygens-type source, hard to build in practice.
    pub fn hard_to_realize(&self) -> bool {
        let (mut te, mut tm) = (0.0, 0.0);
        for (j, v) in self.b_opt.values.iter().enumerate() {
            if mode_index_from_flat(j + 1).is_te() {
                te += v.norm_sqr();
            } else {
                tm += v.norm_sqr();
            }
        }
        te > 1e-6 && tm > 1e-6
    }
}

/// Rotates `v` so that its largest-magnitude entry is real-positive.
pub fn apply_phase_convention(v: &mut [Complex64]) {
    let mut best = 0;
    for (i, c) in v.iter().enumerate() {
        if c.norm() > v[best].norm() {
            best = i;
        }
    }
    let mag = v[best].norm();
    if mag == 0.0 {
        return;
    }
    let rot = v[best].conj() / mag;
    for c in v.iter_mut() {
        *c *= rot;
    }
    v[best] = Complex64::new(mag, 0.0);
}

/// `M^H M` with rows summed in a canonical order so that row permutations of
/// `m` give a bitwise-identical Gram matrix.
fn gram(m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let key = |r: usize| -> Vec<(u64, u64)> { m.row(r).iter().map(|c| (c.re.to_bits(), c.im.to_bits())).collect() };
    let mut rows: Vec<usize> = (0..m.nrows()).collect();
    rows.sort_by_cached_key(|&r| key(r));
    let n = m.ncols();
    let mut g = DMatrix::zeros(n, n);
    for r in rows {
        let row = m.row(r);
        for i in 0..n {
            let ci = row[i].conj();
            for j in 0..n {
                g[(i, j)] += ci * row[j];
            }
        }
    }
    g
}

pub fn optimal_excitation(m: &ChannelMatrix, subspace: Subspace) -> Result<OptimalExcitation> {
    let total = m.values.ncols();
    let cols: Vec<usize> = (0..total).filter(|&j| subspace.contains(mode_index_from_flat(j + 1))).collect();
    let sub = m.values.select_columns(&cols);
    if sub.iter().all(|c| c.norm_sqr() == 0.0) {
        return Err(Error::ZeroChannel);
    }
    let g = gram(&sub);
    let eig = g.symmetric_eigen();
    let lambda_max = eig.eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let top: Vec<usize> = (0..eig.eigenvalues.len())
        .filter(|&i| eig.eigenvalues[i] >= lambda_max - DEGENERACY_TOL * lambda_max.abs())
        .collect();
    let mut v: DVector<Complex64> = if top.len() == 1 {
        eig.eigenvectors.column(top[0]).into_owned()
    } else {
        debug!("{}-fold degenerate dominant eigenvalue in {}; breaking tie by mode order", top.len(), m.scenario_tag);
        let basis = eig.eigenvectors.select_columns(&top);
        let projector = &basis * basis.adjoint();
        (0..cols.len())
            .map(|i| projector.column(i).into_owned())
            .find(|p| p.norm() > 1e-6)
            .expect("projector onto a non-empty eigenspace has a nonzero column")
    };
    v /= Complex64::from(v.norm());
    let mut full = vec![Complex64::new(0.0, 0.0); total];
    for (k, &j) in cols.iter().enumerate() {
        full[j] = v[k];
    }
    apply_phase_convention(&mut full);
    let b_opt = CoefficientVector::new(CoefficientRole::OutgoingEquivalent, full, m.tx_origin, m.frequency)?;
    Ok(OptimalExcitation {
        b_opt,
        lambda_max: lambda_max.max(0.0),
        subspace,
        scenario_tag: m.scenario_tag.clone(),
    })
}

/// `T' = b_opt / sqrt(2 P_a)` assuming a lossless optimal antenna.
pub fn optimal_transmit_vector(opt: &OptimalExcitation, m11: &ChannelMatrix) -> Result<CoefficientVector> {
    let pa = accepted_power_in_channel(&opt.b_opt, m11)?;
    crate::network::transmit_vector(&opt.b_opt, pa)
}

/// Probability-weighted superposition of per-scenario optima, phase-aligned
/// against the running sum and renormalized.
pub fn global_optimum(per_scenario: &[OptimalExcitation], weights: &[f64]) -> Result<CoefficientVector> {
    let first = per_scenario.first().ok_or(Error::EmptyEnsemble)?;
    if weights.len() != per_scenario.len() {
        return Err(Error::DimensionMismatch(format!("{} weights for {} scenarios", weights.len(), per_scenario.len())));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-12 || weights.iter().any(|w| !(*w >= 0.0)) {
        return Err(Error::InvalidArgument(format!("weights must be non-negative and sum to 1, sum is {total}")));
    }
    let len = first.b_opt.truncation();
    if per_scenario.iter().any(|o| o.b_opt.truncation() != len || o.subspace != first.subspace) {
        return Err(Error::DimensionMismatch("scenarios differ in truncation or subspace".into()));
    }
    let mut sum = vec![Complex64::new(0.0, 0.0); len];
    for (opt, &p) in per_scenario.iter().zip(weights) {
        let overlap: Complex64 = sum.iter().zip(&opt.b_opt.values).map(|(s, b)| s.conj() * b).sum();
        let rot = if overlap.norm() > 0.0 { overlap.conj() / overlap.norm() } else { Complex64::new(1.0, 0.0) };
        for (s, b) in sum.iter_mut().zip(&opt.b_opt.values) {
            *s += b * rot * p;
        }
    }
    let norm = sum.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if norm < 1e-6 {
        return Err(Error::CancellationCollapse(norm));
    }
    for c in sum.iter_mut() {
        *c /= norm;
    }
    apply_phase_convention(&mut sum);
    CoefficientVector::new(CoefficientRole::OutgoingEquivalent, sum, first.b_opt.origin, first.b_opt.frequency)
}

/// Cartesian weights of small magnetic (`s = 1`) and electric (`s = 2`) dipoles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DipoleWeights {
    pub magnetic: [Complex64; 3],
    pub electric: [Complex64; 3],
}

impl DipoleWeights {
    /// Inverse change of basis back to the six `n = 1` mode coefficients.
    pub fn to_shell(&self) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); 6];
        let i = Complex64::i();
        for (s, g) in [(1u8, self.magnetic), (2u8, self.electric)] {
            let idx = |m: i32| ModeIndex::new(s, m, 1).flat() - 1;
            out[idx(-1)] = (g[0] + i * g[1]) * FRAC_1_SQRT_2;
            out[idx(1)] = (-g[0] + i * g[1]) * FRAC_1_SQRT_2;
            out[idx(0)] = g[2];
        }
        out
    }

    pub fn power(&self) -> f64 {
        self.magnetic.iter().chain(&self.electric).map(|c| c.norm_sqr()).sum()
    }
}

/// Projects the `n = 1` shell of `b` onto x/y/z dipoles. Power-preserving.
pub fn dipole_weights(b: &CoefficientVector) -> DipoleWeights {
    let q = |s: u8, m: i32| b.values[ModeIndex::new(s, m, 1).flat() - 1];
    let i = Complex64::i();
    let cart = |s: u8| {
        let (qm, q0, qp) = (q(s, -1), q(s, 0), q(s, 1));
        [(qm - qp) * FRAC_1_SQRT_2, -i * (qm + qp) * FRAC_1_SQRT_2, q0]
    };
    DipoleWeights {
        magnetic: cart(1),
        electric: cart(2),
    }
}
