//! Closed-form small electric and magnetic dipoles, written directly in
//! Cartesian form so they serve as oracles independent of the mode functions.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::modes::{CVec3, Medium, Point};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DipoleKind {
    /// Moment `p` in C·m.
    Electric,
    /// Moment `m` in A·m².
    Magnetic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HertzianDipole {
    pub kind: DipoleKind,
    pub position: Point,
    pub moment: CVec3,
}

impl HertzianDipole {
    /// A dipole along `axis` scaled to radiate `power` watts in `medium`.
    pub fn with_power(kind: DipoleKind, position: Point, axis: Point, power: f64, medium: &Medium) -> Self {
        let unit = HertzianDipole {
            kind,
            position,
            moment: axis.normalize().map(Complex64::from),
        };
        let scale = (power / unit.radiated_power(medium)).sqrt();
        HertzianDipole {
            moment: unit.moment * Complex64::from(scale),
            ..unit
        }
    }

    pub fn radiated_power(&self, medium: &Medium) -> f64 {
        let k4 = medium.k.powi(4);
        let m2 = self.moment.iter().map(|c| c.norm_sqr()).sum::<f64>();
        match self.kind {
            DipoleKind::Electric => {
                let c = 2.0 * PI * medium.frequency / medium.k;
                c * c * medium.eta * k4 * m2 / (12.0 * PI)
            }
            DipoleKind::Magnetic => medium.eta * k4 * m2 / (12.0 * PI),
        }
    }

    /// `(E, H)` at `point`, time convention `e^{+jωt}`.
    pub fn fields(&self, medium: &Medium, point: &Point) -> Result<(CVec3, CVec3)> {
        let d = point - self.position;
        let r = d.norm();
        if medium.k * r <= f64::EPSILON {
            return Err(Error::OriginSingularity { radius: r });
        }
        let k = medium.k;
        let j = Complex64::i();
        let n = d.map(|v| Complex64::from(v / r));
        let q = self.moment;
        let g = Complex64::from_polar(1.0 / r, -k * r);
        let near = Complex64::from(1.0 / (r * r * r)) + j * k / (r * r);
        let far_fac = Complex64::from(k * k);
        // transverse radiation term plus the quasi-static term
        let full = |q: &CVec3| -> CVec3 {
            let nq = n.dot(q);
            let trans = n.cross(q).cross(&n) * (far_fac * g);
            let stat = (n * (nq * 3.0) - q) * (near * Complex64::from_polar(1.0, -k * r));
            trans + stat
        };
        let curl_part = n.cross(&q) * (far_fac * g * (1.0 + 1.0 / (j * k * r)));
        let four_pi = 4.0 * PI;
        match self.kind {
            DipoleKind::Electric => {
                let c = 2.0 * PI * medium.frequency / k;
                let e = full(&q) * Complex64::from(medium.eta * c / four_pi);
                let h = curl_part * Complex64::from(c / four_pi);
                Ok((e, h))
            }
            DipoleKind::Magnetic => {
                let h = full(&q) * Complex64::from(1.0 / four_pi);
                let e = curl_part * Complex64::from(-medium.eta / four_pi);
                Ok((e, h))
            }
        }
    }
}

/// Sum of the fields of several dipoles.
pub fn superposed_fields(dipoles: &[HertzianDipole], medium: &Medium, point: &Point) -> Result<(CVec3, CVec3)> {
    let mut e = CVec3::zeros();
    let mut h = CVec3::zeros();
    for d in dipoles {
        let (de, dh) = d.fields(medium, point)?;
        e += de;
        h += dh;
    }
    Ok((e, h))
}
