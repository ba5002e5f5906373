//! Analytic stand-ins for full-wave channel simulations: free-space mode
//! channels, spherical PEC cavities, a partially reflecting shell, test
//! radiators and a body-pose scenario catalog.

pub mod catalog;
pub mod radiators;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::decompose::{extract_matrix, CoefficientRole, FieldSurface};
use crate::error::{Error, Result};
use crate::modes::special::SphericalBessel;
use crate::modes::{degree_for_truncation, evaluate_shell, expansion_fields, mode_index_from_flat, CVec3, Medium, Point, SphereGrid, WaveKind, SPEED_OF_LIGHT};
use crate::network::{convert_channel, ChannelKind, ChannelMatrix};
use crate::optimize::DipoleWeights;

pub use catalog::{scenario_catalog, scenario_catalog_with, CatalogConfig};
pub use radiators::{superposed_fields, DipoleKind, HertzianDipole};

/// Half-diagonal of a 16 mm cubic source at 2.45 GHz, in wavelengths.
const TX_EXCLUSION_WAVELENGTHS: f64 = 0.008 * 1.732_050_807_568_877_2 / (SPEED_OF_LIGHT / 2.45e9);

/// Radius of the region the transmitter's equivalent source occupies.
pub fn tx_exclusion_radius(medium: &Medium) -> f64 {
    TX_EXCLUSION_WAVELENGTHS * medium.wavelength()
}

/// Polar node count that resolves degree `nmax` on a sphere of radius `r`
/// with margin for the incident field's higher-degree content.
fn polar_nodes(nmax: usize, kr: f64) -> usize {
    (2 * nmax + 2).max(nmax + kr.ceil() as usize + 12)
}

/// Free-space channel from outgoing modes at `tx_origin` to the incoming
/// waves at `rx_origin`, obtained by sampling each launched mode on the
/// receiver sphere and decomposing it there. Reflections are zero, so the
/// result is both `M21` and `M'21`.
pub fn free_space_channel(
    tx_origin: Point,
    rx_origin: Point,
    j_tx: usize,
    j_rx: usize,
    medium: &Medium,
    rx_surface_radius: f64,
) -> Result<ChannelMatrix> {
    let n_tx = degree_for_truncation(j_tx)?;
    let n_rx = degree_for_truncation(j_rx)?;
    let separation = (rx_origin - tx_origin).norm();
    let required = rx_surface_radius + tx_exclusion_radius(medium);
    if separation <= required {
        return Err(Error::OverlappingSpheres { separation, required });
    }
    let nt = polar_nodes(n_rx, medium.k * rx_surface_radius);
    let template = FieldSurface::sphere(rx_surface_radius, rx_origin, nt, 2 * nt, medium.frequency);
    let e_scale = Complex64::from(medium.k * medium.eta.sqrt());
    let h_scale = Complex64::new(0.0, medium.k / medium.eta.sqrt());
    let launched = |p: &Point| -> Result<Vec<(CVec3, CVec3)>> {
        let f = evaluate_shell(n_tx, WaveKind::Outgoing, medium.k, &(p - tx_origin))?;
        Ok((0..j_tx)
            .map(|idx| {
                let dual = if idx % 2 == 0 { idx + 1 } else { idx - 1 };
                (f[idx] * e_scale, f[dual] * h_scale)
            })
            .collect())
    };
    let m = extract_matrix(&template, j_tx, launched, j_rx, CoefficientRole::Incoming, medium, &rx_origin)?;
    ChannelMatrix::new(m, ChannelKind::TransmissionPrime, tx_origin, rx_origin, medium.frequency, "free-space")
}

/// `e^{-i m alpha}` per mode: the coefficients of a mode rotated by `alpha`
/// about the z axis through its origin.
pub fn z_rotation_phases(truncation: usize, alpha: f64) -> Vec<Complex64> {
    (1..=truncation)
        .map(|j| Complex64::from_polar(1.0, -(mode_index_from_flat(j).m as f64) * alpha))
        .collect()
}

/// Re-expresses the transmitter modes of `m` in a frame rotated by `alpha`
/// about z, so that column `j` is launched by the rotated antenna's mode `j`.
pub fn rotate_tx_frame(m: &ChannelMatrix, alpha: f64) -> ChannelMatrix {
    let phases = z_rotation_phases(m.values.ncols(), alpha);
    let mut out = m.clone();
    for (j, ph) in phases.iter().enumerate() {
        let mut col = out.values.column_mut(j);
        col *= *ph;
    }
    out
}

/// Diagonal reflection coefficients of a PEC sphere of radius `radius` seen
/// from its center: `-h2/h1` for TE modes and the ratio of the radial
/// derivative functions for TM modes.
fn pec_coefficients(radius: f64, medium: &Medium, truncation: usize) -> Result<Vec<Complex64>> {
    let nmax = degree_for_truncation(truncation)?;
    let x = medium.k * radius;
    let b = SphericalBessel::new(nmax, x);
    let h1: Vec<Complex64> = b.j.iter().zip(&b.y).map(|(&j, &y)| Complex64::new(j, y)).collect();
    let h2: Vec<Complex64> = h1.iter().map(|h| h.conj()).collect();
    let deriv = |h: &[Complex64], n: usize| h[n - 1] - h[n] * (n as f64 / x);
    Ok((1..=truncation)
        .map(|j| {
            let mode = mode_index_from_flat(j);
            let n = mode.n as usize;
            if mode.is_te() {
                -h2[n] / h1[n]
            } else {
                -deriv(&h2, n) / deriv(&h1, n)
            }
        })
        .collect())
}

/// Reflection matrix of a closed PEC spherical cavity centered on the origin.
pub fn pec_cavity_reflection(radius: f64, medium: &Medium, truncation: usize) -> Result<ChannelMatrix> {
    let nmax = degree_for_truncation(truncation)?;
    let kr = medium.k * radius;
    if kr <= nmax as f64 {
        return Err(Error::InvalidArgument(format!("cavity too small: kR = {kr} must exceed the degree {nmax}")));
    }
    let gamma = pec_coefficients(radius, medium, truncation)?;
    if gamma.iter().any(|g| (Complex64::new(1.0, 0.0) - g).norm() < 1e-8) {
        return Err(Error::CavityResonance(kr));
    }
    let m = DMatrix::from_diagonal(&DVector::from_vec(gamma));
    ChannelMatrix::new(m, ChannelKind::Reflection, Point::zeros(), Point::zeros(), medium.frequency, "pec-cavity")
}

/// Total-field response matrix `B̂` of a PEC cavity, built without the
/// closed-form reflection coefficients: for each excited mode the incoming
/// waves are found by enforcing zero tangential E on the wall in the least
/// squares sense, and the resulting total field is sampled on a sphere of
/// radius `xi_radius` and decomposed into its outgoing part.
pub fn cavity_response_matrix(radius: f64, medium: &Medium, truncation: usize, xi_radius: f64) -> Result<DMatrix<Complex64>> {
    let nmax = degree_for_truncation(truncation)?;
    if !(xi_radius > 0.0 && xi_radius < radius) {
        return Err(Error::InvalidArgument("recording sphere must lie inside the cavity".into()));
    }
    let nt = 2 * nmax + 4;
    let wall = SphereGrid::new(nt, 2 * nt);
    let rows = 2 * wall.len();
    let mut a = DMatrix::zeros(rows, truncation);
    let mut rhs = DMatrix::zeros(rows, truncation);
    for (s, (t, ph, _)) in wall.directions().enumerate() {
        let (st, ct) = t.sin_cos();
        let (sp, cp) = ph.sin_cos();
        let p = Point::new(st * cp, st * sp, ct) * radius;
        let that = Point::new(ct * cp, ct * sp, -st).map(Complex64::from);
        let phat = Point::new(-sp, cp, 0.0).map(Complex64::from);
        let reg = evaluate_shell(nmax, WaveKind::Regular, medium.k, &p)?;
        let out = evaluate_shell(nmax, WaveKind::Outgoing, medium.k, &p)?;
        for j in 0..truncation {
            // b̂ = e_j + â, field b̂ F4 + â F3 = F4_j + â (F3 + F4) = F4_j + 2 â F1
            a[(2 * s, j)] = reg[j].dot(&that) * 2.0;
            a[(2 * s + 1, j)] = reg[j].dot(&phat) * 2.0;
            rhs[(2 * s, j)] = -out[j].dot(&that);
            rhs[(2 * s + 1, j)] = -out[j].dot(&phat);
        }
    }
    let a_hat = a
        .svd(true, true)
        .solve(&rhs, 1e-14)
        .map_err(|e| Error::InvalidArgument(format!("wall matching failed: {e}")))?;
    if a_hat.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(Error::CavityResonance(medium.k * radius));
    }
    let b_hat = DMatrix::identity(truncation, truncation) + &a_hat;
    let nt = polar_nodes(nmax, medium.k * xi_radius);
    let template = FieldSurface::sphere(xi_radius, Point::zeros(), nt, 2 * nt, medium.frequency);
    let fields = |p: &Point| -> Result<Vec<(CVec3, CVec3)>> {
        (0..truncation)
            .map(|j| {
                let b: Vec<Complex64> = b_hat.column(j).iter().copied().collect();
                let a: Vec<Complex64> = a_hat.column(j).iter().copied().collect();
                expansion_fields(&b, &a, medium, p)
            })
            .collect()
    };
    extract_matrix(&template, truncation, fields, truncation, CoefficientRole::RawOutgoing, medium, &Point::zeros())
}

/// A lossless spherical shell around the transmitter that reflects a fixed
/// fraction of every outgoing mode back with the phase of a PEC sphere and
/// transmits the rest. A scripted stand-in for backscatter from the head.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeakyShell {
    pub radius: f64,
    /// Amplitude reflectance in `[0, 1)`.
    pub reflectance: f64,
}

impl LeakyShell {
    pub fn reflection(&self, medium: &Medium, truncation: usize, origin: Point) -> Result<ChannelMatrix> {
        if !(0.0..1.0).contains(&self.reflectance) {
            return Err(Error::InvalidArgument(format!("reflectance must lie in [0, 1), got {}", self.reflectance)));
        }
        let gamma = pec_coefficients(self.radius, medium, truncation)?;
        let diag: Vec<Complex64> = gamma.iter().map(|g| g * self.reflectance).collect();
        let m = DMatrix::from_diagonal(&DVector::from_vec(diag));
        ChannelMatrix::new(m, ChannelKind::Reflection, origin, origin, medium.frequency, "shell")
    }

    pub fn transmittance(&self) -> f64 {
        (1.0 - self.reflectance * self.reflectance).sqrt()
    }

    /// `(M'21, M11)` for a free-space channel seen through the shell.
    pub fn embed(&self, free: &ChannelMatrix, medium: &Medium) -> Result<(ChannelMatrix, ChannelMatrix)> {
        let m11 = self.reflection(medium, free.values.ncols(), free.tx_origin)?;
        let mut m21 = free.clone();
        m21.values *= Complex64::from(self.transmittance());
        m21.kind = ChannelKind::Transmission;
        let j_rx = free.values.nrows();
        let m22 = ChannelMatrix::no_reflection(j_rx, free.rx_origin, medium.frequency)?;
        let prime = convert_channel(&m21, &m11, &m22)?;
        Ok((prime, m11))
    }
}

/// Coefficient vector of a point dipole at the origin: weights on the six
/// `n = 1` modes reproducing its far field, scaled to radiated power `power`.
pub fn dipole_mode_vector(kind: DipoleKind, axis: Point, power: f64) -> Vec<Complex64> {
    let g = axis.normalize() * (2.0 * power).sqrt();
    let g = [g.x, g.y, g.z].map(Complex64::from);
    let zero = [Complex64::new(0.0, 0.0); 3];
    let w = match kind {
        DipoleKind::Magnetic => DipoleWeights { magnetic: g, electric: zero },
        DipoleKind::Electric => DipoleWeights { magnetic: zero, electric: g },
    };
    w.to_shell()
}
