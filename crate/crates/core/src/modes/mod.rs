//! Vector spherical wave functions.
//!
//! The functions follow the power-normalized convention in which a field
//!
//! ```text
//! E = k sqrt(eta) sum_j ( b_j F_j^(4) + a_j F_j^(3) )
//! H = (i k / sqrt(eta)) sum_j ( b_j F_~j^(4) + a_j F_~j^(3) )
//! ```
//!
//! radiates `P = |b|^2 / 2` watts, where `~j` is the mode with the same
//! `(m, n)` and the other class `s`. With `N = 1 / sqrt(2 pi n (n+1))`,
//! `eps_m = (-1)^m` for `m > 0` and `1` otherwise, and `Pbar` the normalized
//! associated Legendre function (see [`special::LegendreTable`]):
//!
//! ```text
//! F_1mn = N eps_m z_n(kr) [ i m Pbar/sin(t) t^ - dPbar/dt p^ ] e^{i m p}
//! F_2mn = N eps_m { n(n+1)/(kr) z_n(kr) Pbar r^
//!                   + (kr z_n)'/(kr) [ dPbar/dt t^ + i m Pbar/sin(t) p^ ] } e^{i m p}
//! ```
//!
//! The time dependence is `e^{+j w t}`: outgoing waves use `h_n^(2)` and
//! decay as `e^{-jkr}/r`, incoming waves use `h_n^(1)`, regular waves use
//! `j_n`. Both classes satisfy `curl F_1 = k F_2` and `curl F_2 = k F_1`.

pub mod grid;
pub mod pattern;
pub mod special;

use nalgebra::Vector3;
use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};
pub use grid::{gauss_legendre, SphereGrid};
pub use pattern::{far_field_pattern, FarFieldPattern};
use special::{LegendreTable, RadialValues, SphericalBessel};

pub type Point = Vector3<f64>;
pub type CVec3 = Vector3<Complex64>;

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
pub const MU_0: f64 = 1.256_637_062_12e-6;

/// Spherical wave mode `(s, m, n)`; `s = 1` is TE, `s = 2` is TM.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModeIndex {
    pub s: u8,
    pub m: i32,
    pub n: u32,
}

impl ModeIndex {
    pub fn new(s: u8, m: i32, n: u32) -> Self {
        assert!(s == 1 || s == 2, "mode class must be 1 or 2");
        assert!(n >= 1 && m.unsigned_abs() <= n, "invalid (m, n) = ({m}, {n})");
        ModeIndex { s, m, n }
    }

    /// Flat index `j = 2 (n(n+1) + m - 1) + s`, starting at 1.
    pub fn flat(&self) -> usize {
        let n = self.n as i64;
        (2 * (n * (n + 1) + self.m as i64 - 1) + self.s as i64) as usize
    }

    pub fn is_te(&self) -> bool {
        self.s == 1
    }

    /// The mode with the same `(m, n)` and the other class.
    pub fn dual(&self) -> Self {
        ModeIndex { s: 3 - self.s, ..*self }
    }
}

impl std::fmt::Display for ModeIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(s={}, m={:+}, n={})", self.s, self.m, self.n)
    }
}

pub fn mode_index_from_flat(j: usize) -> ModeIndex {
    assert!(j >= 1, "flat mode index starts at 1");
    let s = ((j - 1) % 2 + 1) as u8;
    let q = (j - s as usize) / 2 + 1; // n(n+1) + m
    let mut n = (q as f64).sqrt() as usize;
    while n * n > q {
        n -= 1;
    }
    while (n + 1) * (n + 1) <= q {
        n += 1;
    }
    let m = q as i64 - (n * (n + 1)) as i64;
    ModeIndex {
        s,
        m: m as i32,
        n: n as u32,
    }
}

/// Number of modes with degree `<= nmax`: `2 N (N + 2)`.
pub fn shell_count(nmax: usize) -> usize {
    2 * nmax * (nmax + 2)
}

/// Maximum degree for a complete-shell truncation.
pub fn degree_for_truncation(truncation: usize) -> Result<usize> {
    let mut n = 1;
    while shell_count(n) < truncation {
        n += 1;
    }
    if truncation == 0 || shell_count(n) != truncation {
        return Err(Error::IncompleteShell(truncation));
    }
    Ok(n)
}

/// All modes of a truncation in flat order.
pub fn modes(truncation: usize) -> impl Iterator<Item = ModeIndex> {
    (1..=truncation).map(mode_index_from_flat)
}

/// Radial function selection, numbered as in the usual SWF notation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WaveKind {
    Regular = 1,
    Incoming = 3,
    Outgoing = 4,
}

impl WaveKind {
    pub fn is_singular(self) -> bool {
        !matches!(self, WaveKind::Regular)
    }
}

/// Homogeneous lossless medium at one frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Medium {
    pub k: f64,
    pub eta: f64,
    pub frequency: f64,
}

impl Medium {
    pub fn free_space(frequency: f64) -> Self {
        assert!(frequency > 0.0, "frequency must be positive");
        Medium {
            k: 2.0 * PI * frequency / SPEED_OF_LIGHT,
            eta: MU_0 * SPEED_OF_LIGHT,
            frequency,
        }
    }

    pub fn wavelength(&self) -> f64 {
        2.0 * PI / self.k
    }

    /// True when `k`, `eta` and the frequency describe free space to 1e-9.
    pub fn is_free_space(&self) -> bool {
        let fs = Medium::free_space(self.frequency);
        (self.k / fs.k - 1.0).abs() < 1e-9 && (self.eta / fs.eta - 1.0).abs() < 1e-9
    }

    pub fn same_frequency(&self, other: f64) -> bool {
        (self.frequency - other).abs() <= 1e-9 * self.frequency.abs().max(other.abs())
    }
}

fn radial(kind: WaveKind, nmax: usize, x: f64) -> RadialValues {
    let b = SphericalBessel::new(nmax, x);
    let z: Vec<Complex64> = match kind {
        WaveKind::Regular => b.j.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        WaveKind::Outgoing => b.j.iter().zip(&b.y).map(|(&j, &y)| Complex64::new(j, -y)).collect(),
        WaveKind::Incoming => b.j.iter().zip(&b.y).map(|(&j, &y)| Complex64::new(j, y)).collect(),
    };
    RadialValues::from_values(z, x)
}

/// Evaluates every mode of degree `<= nmax` at one point (relative to the
/// expansion origin). Entry `j - 1` holds `F_j`; the curl of `F_j` is `k`
/// times the entry of its dual mode.
pub fn evaluate_shell(nmax: usize, kind: WaveKind, k: f64, point: &Point) -> Result<Vec<CVec3>> {
    let r = point.norm();
    let kr = k * r;
    if kind.is_singular() && kr <= f64::EPSILON {
        return Err(Error::OriginSingularity { radius: r });
    }
    let (theta, phi) = if r > 0.0 {
        ((point.z / r).clamp(-1.0, 1.0).acos(), point.y.atan2(point.x))
    } else {
        (0.0, 0.0)
    };
    let x = kr.max(1e-300);
    let rad = radial(kind, nmax, x);
    let (st, ct) = theta.sin_cos();
    let leg = LegendreTable::new(nmax, ct, st);
    let (sp, cp) = phi.sin_cos();
    let rhat = Vector3::new(st * cp, st * sp, ct);
    let that = Vector3::new(ct * cp, ct * sp, -st);
    let phat = Vector3::new(-sp, cp, 0.0);
    let c = |v: Vector3<f64>| v.map(|e| Complex64::new(e, 0.0));
    let (rhat, that, phat) = (c(rhat), c(that), c(phat));

    let total = shell_count(nmax);
    let mut out = vec![CVec3::zeros(); total];
    let i = Complex64::i();
    for n in 1..=nmax {
        let nn = (n * (n + 1)) as f64;
        let norm = 1.0 / (2.0 * PI * nn).sqrt();
        for m in -(n as i32)..=(n as i32) {
            let am = m.unsigned_abs() as usize;
            let eps = if m > 0 && m % 2 == 1 { -1.0 } else { 1.0 };
            let phase = Complex64::from_polar(norm * eps, m as f64 * phi);
            let p = leg.p(n, am);
            let dp = leg.dp(n, am);
            let imq = if am == 0 { Complex64::new(0.0, 0.0) } else { i * (m as f64 * leg.p_over_sin(n, am)) };
            // angular vectors X (TE tangential) and Y (TM tangential)
            let xv = (that * imq - phat * Complex64::from(dp)) * phase;
            let yv = (that * Complex64::from(dp) + phat * imq) * phase;
            let te = xv * rad.z[n];
            let tm = rhat * (phase * p * rad.z[n] * (nn / x)) + yv * rad.dz[n];
            let j_te = ModeIndex { s: 1, m, n: n as u32 }.flat();
            out[j_te - 1] = te;
            out[j_te] = tm;
        }
    }
    Ok(out)
}

/// `F_j^(kind)` for one mode at every point (points relative to the origin).
pub fn evaluate_swf(mode: ModeIndex, kind: WaveKind, medium: &Medium, points: &[Point]) -> Result<Vec<CVec3>> {
    let nmax = mode.n as usize;
    let j = mode.flat();
    points
        .iter()
        .map(|p| evaluate_shell(nmax, kind, medium.k, p).map(|v| v[j - 1]))
        .collect()
}

/// Electric and magnetic fields of an expansion with outgoing coefficients
/// `b` and incoming coefficients `a` (either may be empty) at one point.
pub fn expansion_fields(b: &[Complex64], a: &[Complex64], medium: &Medium, point: &Point) -> Result<(CVec3, CVec3)> {
    let truncation = b.len().max(a.len());
    let nmax = degree_for_truncation(truncation)?;
    let mut e = CVec3::zeros();
    let mut h = CVec3::zeros();
    let e_scale = medium.k * medium.eta.sqrt();
    let h_scale = Complex64::new(0.0, medium.k / medium.eta.sqrt());
    for (coeffs, kind) in [(b, WaveKind::Outgoing), (a, WaveKind::Incoming)] {
        if coeffs.is_empty() || coeffs.iter().all(|c| c.norm_sqr() == 0.0) {
            continue;
        }
        let f = evaluate_shell(nmax, kind, medium.k, point)?;
        for (idx, q) in coeffs.iter().enumerate() {
            let dual = if idx % 2 == 0 { idx + 1 } else { idx - 1 };
            e += f[idx] * (q * e_scale);
            h += f[dual] * (q * h_scale);
        }
    }
    Ok((e, h))
}

/// Fields of a regular expansion `E = k sqrt(eta) sum c_j F_j^(1)`.
pub fn regular_fields(c: &[Complex64], medium: &Medium, point: &Point) -> Result<(CVec3, CVec3)> {
    let nmax = degree_for_truncation(c.len())?;
    let f = evaluate_shell(nmax, WaveKind::Regular, medium.k, point)?;
    let e_scale = medium.k * medium.eta.sqrt();
    let h_scale = Complex64::new(0.0, medium.k / medium.eta.sqrt());
    let mut e = CVec3::zeros();
    let mut h = CVec3::zeros();
    for (idx, q) in c.iter().enumerate() {
        let dual = if idx % 2 == 0 { idx + 1 } else { idx - 1 };
        e += f[idx] * (q * e_scale);
        h += f[dual] * (q * h_scale);
    }
    Ok((e, h))
}
