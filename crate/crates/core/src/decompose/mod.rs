//! Spherical-wave decomposition of sampled fields on closed surfaces.
//!
//! The reciprocity-type surface integral
//! `<u, v> = ∮ [u × (∇×v) − v × (∇×u)] · n dS`
//! vanishes when `u` and `v` are both regular inside or both radiating
//! outside the surface. Pairing the sampled `E` with the complex conjugate of
//! a mode function (itself a Helmholtz solution) isolates one coefficient:
//!
//! | role                | test function  | scale              |
//! |---------------------|----------------|--------------------|
//! | outgoing-equivalent | `conj F^(1)`   | `1 / (j sqrt(eta))`  |
//! | raw outgoing `b`    | `conj F^(4)`   | `1 / (2j sqrt(eta))` |
//! | raw incoming `a`    | `conj F^(3)`   | `-1 / (2j sqrt(eta))`|
//!
//! For a field `E = k sqrt(eta) sum (b F^(4) + a F^(3))` the outgoing-equivalent
//! coefficients are `b - a`, so a source-free regular field maps to zero.

pub mod surface;

use log::warn;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::modes::{degree_for_truncation, evaluate_shell, shell_count, CVec3, Medium, ModeIndex, Point, WaveKind};
pub use surface::{FieldSurface, SurfaceGeometry, SurfaceSample};

/// Which coefficients a vector holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoefficientRole {
    /// `b' = b - a`, the wave the antenna would radiate into free space.
    OutgoingEquivalent,
    /// `a'`, the incoming wave seen by an equivalent antenna.
    Incoming,
    /// `T'`, radiated wave per unit incident port wave.
    Transmit,
    /// `R'`, port response per unit incoming wave.
    Receive,
    RawOutgoing,
    RawIncoming,
}

impl CoefficientRole {
    /// Test-function kind and scale for roles extractable from a surface.
    fn extraction(self, eta: f64) -> Option<(WaveKind, Complex64)> {
        let j = Complex64::i();
        let s = eta.sqrt();
        match self {
            CoefficientRole::OutgoingEquivalent => Some((WaveKind::Regular, 1.0 / (j * s))),
            CoefficientRole::RawOutgoing => Some((WaveKind::Outgoing, 1.0 / (2.0 * j * s))),
            CoefficientRole::RawIncoming | CoefficientRole::Incoming => Some((WaveKind::Incoming, -1.0 / (2.0 * j * s))),
            _ => None,
        }
    }
}

impl std::fmt::Display for CoefficientRole {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CoefficientRole::OutgoingEquivalent => "outgoing-equivalent",
            CoefficientRole::Incoming => "incoming",
            CoefficientRole::Transmit => "transmit",
            CoefficientRole::Receive => "receive",
            CoefficientRole::RawOutgoing => "raw-outgoing",
            CoefficientRole::RawIncoming => "raw-incoming",
        })
    }
}

impl std::str::FromStr for CoefficientRole {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "outgoing-equivalent" => Ok(CoefficientRole::OutgoingEquivalent),
            "incoming" => Ok(CoefficientRole::Incoming),
            "transmit" => Ok(CoefficientRole::Transmit),
            "receive" => Ok(CoefficientRole::Receive),
            "raw-outgoing" => Ok(CoefficientRole::RawOutgoing),
            "raw-incoming" => Ok(CoefficientRole::RawIncoming),
            _ => Err(Error::InvalidArgument(format!("unknown coefficient role `{s}`"))),
        }
    }
}

/// Mode coefficients in flat-index order (entry `j - 1` is mode `j`).
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientVector {
    pub role: CoefficientRole,
    pub values: Vec<Complex64>,
    pub origin: Point,
    pub frequency: f64,
    /// Power delivered to the antenna port when the fields were recorded.
    pub accepted_power: Option<f64>,
}

impl CoefficientVector {
    pub fn new(role: CoefficientRole, values: Vec<Complex64>, origin: Point, frequency: f64) -> Result<Self> {
        degree_for_truncation(values.len())?;
        if values.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::InvalidArgument("coefficients must be finite".into()));
        }
        Ok(CoefficientVector {
            role,
            values,
            origin,
            frequency,
            accepted_power: None,
        })
    }

    pub fn truncation(&self) -> usize {
        self.values.len()
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Power carried by the outgoing wave, `||b||^2 / 2`.
    pub fn power(&self) -> f64 {
        0.5 * self.norm().powi(2)
    }
}

/// `<E, conj F_j^(kind)>` for one mode about the surface center.
pub fn surface_inner_product(surface: &FieldSurface, mode: ModeIndex, kind: WaveKind, medium: &Medium) -> Result<Complex64> {
    surface.validate()?;
    let all = inner_products(surface, mode.n as usize, kind, medium, &surface.geometry().center())?;
    Ok(all[mode.flat() - 1])
}

/// Inner products against every mode up to degree `nmax`, summed in sample order.
fn inner_products(surface: &FieldSurface, nmax: usize, kind: WaveKind, medium: &Medium, origin: &Point) -> Result<Vec<Complex64>> {
    let cols = project(surface, 1, |s| Ok(vec![(s.e, s.h)]), nmax, kind, medium, origin)?;
    Ok(cols.into_iter().next().expect("one column"))
}

/// Core quadrature: for each of `ncols` fields supplied per sample by
/// `fields`, the inner products against all modes up to `nmax`.
/// Returns `ncols` vectors of length `shell_count(nmax)`.
fn project<F>(surface: &FieldSurface, ncols: usize, fields: F, nmax: usize, kind: WaveKind, medium: &Medium, origin: &Point) -> Result<Vec<Vec<Complex64>>>
where
    F: Fn(&SurfaceSample) -> Result<Vec<(CVec3, CVec3)>> + Sync,
{
    if !medium.same_frequency(surface.frequency()) {
        return Err(Error::InconsistentFrequency {
            surface: surface.frequency(),
            medium: medium.frequency,
        });
    }
    let total = shell_count(nmax);
    let k = medium.k;
    let curl_e_scale = Complex64::new(0.0, -k * medium.eta);
    let per_sample: Vec<Vec<Complex64>> = surface
        .samples()
        .par_iter()
        .map(|smp| {
            let f = evaluate_shell(nmax, kind, k, &(smp.position - origin))?;
            let n = smp.normal.map(Complex64::from);
            let tests: Vec<(CVec3, CVec3)> = (0..total)
                .map(|idx| {
                    let dual = if idx % 2 == 0 { idx + 1 } else { idx - 1 };
                    (f[idx].map(|c| c.conj()), f[dual].map(|c| c.conj() * k))
                })
                .collect();
            let sampled = fields(smp)?;
            if sampled.len() != ncols {
                return Err(Error::DimensionMismatch(format!("{} fields at a sample, expected {ncols}", sampled.len())));
            }
            let mut out = Vec::with_capacity(ncols * total);
            for (e, h) in sampled {
                let curl_e = h * curl_e_scale;
                for (v, curl_v) in &tests {
                    let integrand = e.cross(curl_v) - v.cross(&curl_e);
                    out.push(integrand.dot(&n) * smp.weight);
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let mut acc = vec![Complex64::new(0.0, 0.0); ncols * total];
    for row in per_sample {
        for (a, v) in acc.iter_mut().zip(row) {
            *a += v;
        }
    }
    Ok(acc.chunks(total).map(|c| c.to_vec()).collect())
}

/// Coefficient matrix whose column `c` holds the coefficients of field `c`,
/// where `fields(position)` returns every column's `(E, H)` at a point.
/// Only the geometry of `template` is used.
pub fn extract_matrix<F>(
    template: &FieldSurface,
    ncols: usize,
    fields: F,
    truncation: usize,
    role: CoefficientRole,
    medium: &Medium,
    origin: &Point,
) -> Result<DMatrix<Complex64>>
where
    F: Fn(&Point) -> Result<Vec<(CVec3, CVec3)>> + Sync,
{
    let nmax = degree_for_truncation(truncation)?;
    let (kind, scale) = role
        .extraction(medium.eta)
        .ok_or_else(|| Error::InvalidArgument(format!("role {role} cannot be extracted from fields")))?;
    template.check_density(nmax, medium.wavelength())?;
    let cols = project(template, ncols, |s| fields(&s.position), nmax, kind, medium, origin)?;
    Ok(DMatrix::from_fn(truncation, ncols, |i, j| cols[j][i] * scale))
}

/// Outgoing-equivalent coefficients `b'` about the surface center.
pub fn extract_coefficients(surface: &FieldSurface, truncation: usize, medium: &Medium) -> Result<CoefficientVector> {
    let center = surface.geometry().center();
    extract_coefficients_about(surface, truncation, CoefficientRole::OutgoingEquivalent, medium, &center)
}

/// Extracts `truncation` coefficients of the requested role about `origin`.
/// Transmit and receive vectors cannot be read off a surface; `Incoming`
/// reads the incoming part, as seen by a fully reflecting equivalent antenna.
pub fn extract_coefficients_about(
    surface: &FieldSurface,
    truncation: usize,
    role: CoefficientRole,
    medium: &Medium,
    origin: &Point,
) -> Result<CoefficientVector> {
    let nmax = degree_for_truncation(truncation)?;
    let (kind, scale) = role
        .extraction(medium.eta)
        .ok_or_else(|| Error::InvalidArgument(format!("role {role} cannot be extracted from fields")))?;
    surface.validate()?;
    surface.check_density(nmax, medium.wavelength())?;
    let offset = (origin - surface.geometry().center()).norm();
    if offset > 1e-9 * surface.geometry().bounding_radius() {
        warn!("expansion origin is {offset:.3e} m from the surface center");
    }
    let raw = inner_products(surface, nmax, kind, medium, origin)?;
    let values = raw.into_iter().map(|v| v * scale).collect();
    CoefficientVector::new(role, values, *origin, medium.frequency)
}

/// Relative norm change `(||next|| - ||prev||) / ||next||` between two
/// truncations of the same expansion.
pub fn convergence_metric(prev: &CoefficientVector, next: &CoefficientVector) -> Result<f64> {
    if next.truncation() <= prev.truncation() {
        return Err(Error::InvalidArgument(format!(
            "truncation must grow: {} then {}",
            prev.truncation(),
            next.truncation()
        )));
    }
    if (prev.frequency - next.frequency).abs() > 1e-9 * prev.frequency.abs().max(next.frequency.abs()) {
        return Err(Error::FrequencyMismatch {
            a: prev.frequency,
            b: next.frequency,
        });
    }
    if prev.role != next.role || (prev.origin - next.origin).norm() > 1e-12 {
        return Err(Error::InvalidArgument("vectors differ in role or origin".into()));
    }
    let nn = next.norm();
    if nn == 0.0 {
        return Err(Error::ZeroNorm);
    }
    Ok((nn - prev.norm()) / nn)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modes::{expansion_fields, regular_fields};

    fn coeffs(len: usize, seed: f64) -> Vec<Complex64> {
        (0..len).map(|i| Complex64::new((i as f64 * 0.71 + seed).sin(), (i as f64 * 1.13 + 2.0 * seed).cos())).collect()
    }

    fn max_err(a: &[Complex64], b: &[Complex64]) -> f64 {
        let scale = b.iter().map(|c| c.norm()).fold(0.0, f64::max);
        a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max) / scale
    }

    #[test]
    fn outgoing_round_trip() {
        let med = Medium::free_space(2.45e9);
        let b = coeffs(30, 0.3);
        let surf = FieldSurface::sphere(med.wavelength(), Point::zeros(), 16, 32, med.frequency)
            .with_fields(|p| expansion_fields(&b, &[], &med, p))
            .unwrap();
        for role in [CoefficientRole::OutgoingEquivalent, CoefficientRole::RawOutgoing] {
            let got = extract_coefficients_about(&surf, 30, role, &med, &Point::zeros()).unwrap();
            assert!(max_err(&got.values, &b) < 1e-10, "{role}");
        }
        let a = extract_coefficients_about(&surf, 30, CoefficientRole::RawIncoming, &med, &Point::zeros()).unwrap();
        assert!(a.norm() < 1e-10 * b.iter().map(|c| c.norm()).sum::<f64>());
    }

    #[test]
    fn mixed_field_roles() {
        let med = Medium::free_space(1e9);
        let b = coeffs(16, 0.1);
        let a = coeffs(16, 0.9);
        let surf = FieldSurface::sphere(0.2, Point::zeros(), 12, 24, med.frequency)
            .with_fields(|p| expansion_fields(&b, &a, &med, p))
            .unwrap();
        let o = Point::zeros();
        let gb = extract_coefficients_about(&surf, 16, CoefficientRole::RawOutgoing, &med, &o).unwrap();
        let ga = extract_coefficients_about(&surf, 16, CoefficientRole::RawIncoming, &med, &o).unwrap();
        let ge = extract_coefficients_about(&surf, 16, CoefficientRole::OutgoingEquivalent, &med, &o).unwrap();
        let diff: Vec<Complex64> = b.iter().zip(&a).map(|(x, y)| x - y).collect();
        assert!(max_err(&gb.values, &b) < 1e-10);
        assert!(max_err(&ga.values, &a) < 1e-10);
        assert!(max_err(&ge.values, &diff) < 1e-10);
    }

    #[test]
    fn regular_field_has_no_outgoing_equivalent() {
        let med = Medium::free_space(2.45e9);
        let c = coeffs(16, 0.5);
        let surf = FieldSurface::sphere(0.08, Point::zeros(), 12, 24, med.frequency)
            .with_fields(|p| regular_fields(&c, &med, p))
            .unwrap();
        let got = extract_coefficients_about(&surf, 16, CoefficientRole::OutgoingEquivalent, &med, &Point::zeros()).unwrap();
        assert!(got.norm() < 1e-10);
    }

    #[test]
    fn box_surface_matches_sphere() {
        let med = Medium::free_space(2.45e9);
        let b = coeffs(16, 0.2);
        let field = |p: &Point| expansion_fields(&b, &[], &med, p);
        let cube = FieldSurface::cuboid(Point::new(0.05, 0.04, 0.06), Point::zeros(), [24, 24, 24], med.frequency)
            .with_fields(field)
            .unwrap();
        let got = extract_coefficients_about(&cube, 16, CoefficientRole::OutgoingEquivalent, &med, &Point::zeros()).unwrap();
        assert!(max_err(&got.values, &b) < 1e-6, "{}", max_err(&got.values, &b));
    }

    #[test]
    fn wrong_frequency_is_rejected() {
        let med = Medium::free_space(2.45e9);
        let surf = FieldSurface::sphere(0.1, Point::zeros(), 8, 16, 2.4e9);
        let r = extract_coefficients_about(&surf, 6, CoefficientRole::OutgoingEquivalent, &med, &Point::zeros());
        assert!(matches!(r, Err(Error::InconsistentFrequency { .. })));
    }

    #[test]
    fn convergence_metric_contract() {
        let o = Point::zeros();
        let mk = |v: Vec<Complex64>| CoefficientVector::new(CoefficientRole::OutgoingEquivalent, v, o, 1e9).unwrap();
        let p = mk(coeffs(6, 0.0));
        let n = mk(coeffs(16, 0.0));
        let d = convergence_metric(&p, &n).unwrap();
        assert!(d > 0.0 && d < 1.0);
        assert!(convergence_metric(&n, &p).is_err());
        let zero = mk(vec![Complex64::new(0.0, 0.0); 16]);
        assert_eq!(convergence_metric(&p, &zero), Err(Error::ZeroNorm));
    }

    #[test]
    fn modes_are_orthonormal_under_extraction() {
        let med = Medium::free_space(1e9);
        let template = FieldSurface::sphere(0.8 * med.wavelength(), Point::zeros(), 10, 20, med.frequency);
        let unit_modes = |p: &Point| -> Result<Vec<(CVec3, CVec3)>> {
            (0..16)
                .map(|j| {
                    let mut b = vec![Complex64::new(0.0, 0.0); 16];
                    b[j] = Complex64::new(1.0, 0.0);
                    crate::modes::expansion_fields(&b, &[], &med, p)
                })
                .collect()
        };
        let g = extract_matrix(&template, 16, unit_modes, 16, CoefficientRole::OutgoingEquivalent, &med, &Point::zeros()).unwrap();
        let off = (g - DMatrix::<Complex64>::identity(16, 16)).iter().map(|c| c.norm()).fold(0.0, f64::max);
        assert!(off < 1e-8, "{off}");
    }

    #[test]
    fn zero_field_gives_zero_coefficients() {
        let med = Medium::free_space(1e9);
        let surf = FieldSurface::sphere(0.2, Point::new(0.1, 0.0, 0.0), 8, 16, med.frequency);
        let b = extract_coefficients(&surf, 16, &med).unwrap();
        assert!(b.values.iter().all(|c| *c == Complex64::new(0.0, 0.0)));
    }

    #[test]
    fn dipole_power_matches_closed_form() {
        use crate::synth::{DipoleKind, HertzianDipole};
        let med = Medium::free_space(2.45e9);
        for kind in [DipoleKind::Electric, DipoleKind::Magnetic] {
            let dip = HertzianDipole::with_power(kind, Point::zeros(), Point::new(0.2, -0.4, 1.0), 0.37, &med);
            let surf = FieldSurface::sphere(med.wavelength(), Point::zeros(), 12, 24, med.frequency)
                .with_fields(|p| dip.fields(&med, p))
                .unwrap();
            let b = extract_coefficients(&surf, 16, &med).unwrap();
            assert!((b.power() / dip.radiated_power(&med) - 1.0).abs() < 1e-10, "{kind:?}");
        }
    }

    #[test]
    fn nearly_centered_dipole_stays_in_first_shell() {
        use crate::synth::{DipoleKind, HertzianDipole};
        let med = Medium::free_space(2.45e9);
        let dip = HertzianDipole::with_power(DipoleKind::Magnetic, Point::new(0.01, 0.005, 0.0), Point::z(), 1.0, &med);
        let surf = FieldSurface::sphere(med.wavelength(), Point::zeros(), 24, 48, med.frequency)
            .with_fields(|p| dip.fields(&med, p))
            .unwrap();
        let b = extract_coefficients(&surf, 30, &med).unwrap();
        let first: f64 = b.values[..6].iter().map(|c| c.norm_sqr()).sum();
        assert!(first / b.norm().powi(2) >= 0.95, "{}", first / b.norm().powi(2));
        assert!((b.power() - 1.0).abs() < 1e-3);
    }
}
