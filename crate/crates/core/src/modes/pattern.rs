//! Free-space far-field patterns of outgoing expansions.

use num_complex::Complex64;
use std::f64::consts::PI;

use super::grid::SphereGrid;
use super::special::LegendreTable;
use super::{degree_for_truncation, Medium, ModeIndex};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct FarFieldPattern {
    pub grid: SphereGrid,
    /// `lim r e^{jkr} E_theta`, phi fastest.
    pub e_theta: Vec<Complex64>,
    pub e_phi: Vec<Complex64>,
    /// Gain in dBi relative to the accepted power; `-inf` where the field vanishes.
    pub gain_db: Vec<f64>,
    pub accepted_power: f64,
    /// Power obtained by integrating the radiation intensity over the grid.
    pub radiated_power: f64,
}

impl FarFieldPattern {
    pub fn peak_gain_db(&self) -> f64 {
        self.gain_db.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn radiation_efficiency(&self) -> f64 {
        self.radiated_power / self.accepted_power
    }
}

/// Angular far-field vectors `(E_theta, E_phi)` of each outgoing mode,
/// without the `sqrt(eta)` factor. Uses `h_n^(2)(x) ~ i^{n+1} e^{-ix} / x`.
pub fn mode_far_fields(nmax: usize, theta: f64, phi: f64) -> Vec<(Complex64, Complex64)> {
    let (st, ct) = theta.sin_cos();
    let leg = LegendreTable::new(nmax, ct, st);
    let i = Complex64::i();
    let mut out = vec![(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)); super::shell_count(nmax)];
    for n in 1..=nmax {
        let nn = (n * (n + 1)) as f64;
        let norm = 1.0 / (2.0 * PI * nn).sqrt();
        let te_radial = i.powu(n as u32 + 1);
        let tm_radial = i.powu(n as u32);
        for m in -(n as i32)..=(n as i32) {
            let am = m.unsigned_abs() as usize;
            let eps = if m > 0 && m % 2 == 1 { -1.0 } else { 1.0 };
            let phase = Complex64::from_polar(norm * eps, m as f64 * phi);
            let dp = leg.dp(n, am);
            let imq = if am == 0 { Complex64::new(0.0, 0.0) } else { i * (m as f64 * leg.p_over_sin(n, am)) };
            let j = ModeIndex { s: 1, m, n: n as u32 }.flat();
            out[j - 1] = (te_radial * imq * phase, -te_radial * dp * phase);
            out[j] = (tm_radial * dp * phase, tm_radial * imq * phase);
        }
    }
    out
}

/// Far-field pattern of `E = k sqrt(eta) sum b_j F_j^(4)` on `grid`.
pub fn far_field_pattern(b: &[Complex64], medium: &Medium, grid: &SphereGrid, accepted_power: f64) -> Result<FarFieldPattern> {
    if accepted_power.is_nan() || accepted_power <= 0.0 {
        return Err(Error::ZeroPower(accepted_power));
    }
    if b.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(Error::InvalidArgument("coefficient vector has non-finite entries".into()));
    }
    let nmax = degree_for_truncation(b.len())?;
    let sqrt_eta = medium.eta.sqrt();
    let mut e_theta = Vec::with_capacity(grid.len());
    let mut e_phi = Vec::with_capacity(grid.len());
    let mut gain_db = Vec::with_capacity(grid.len());
    let mut radiated = 0.0;
    for (theta, phi, w) in grid.directions() {
        let per_mode = mode_far_fields(nmax, theta, phi);
        let (mut et, mut ep) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        for (q, (ft, fp)) in b.iter().zip(&per_mode) {
            et += q * ft;
            ep += q * fp;
        }
        et *= sqrt_eta;
        ep *= sqrt_eta;
        let intensity = (et.norm_sqr() + ep.norm_sqr()) / (2.0 * medium.eta);
        radiated += intensity * w;
        gain_db.push(10.0 * (4.0 * PI * intensity / accepted_power).log10());
        e_theta.push(et);
        e_phi.push(ep);
    }
    Ok(FarFieldPattern {
        grid: grid.clone(),
        e_theta,
        e_phi,
        gain_db,
        accepted_power,
        radiated_power: radiated,
    })
}
