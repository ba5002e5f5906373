//! Quadrature grids: Gauss-Legendre nodes and the spherical product grid.

use std::f64::consts::PI;

/// Gauss-Legendre nodes and weights on `[-1, 1]`, nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let half = n.div_ceil(2);
    for i in 0..half {
        // Tricomi initial guess, then Newton on P_n.
        let mut z = ((i as f64 + 0.75) / (n as f64 + 0.5) * PI).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_and_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_and_derivative(n, z);
        dp = if d != 0.0 { d } else { dp };
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

fn legendre_and_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let d = n as f64 * (z * p - p0) / (z * z - 1.0);
    (p, d)
}

/// Gauss-Legendre in `cos(theta)` times uniform azimuth.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereGrid {
    pub n_theta: usize,
    pub n_phi: usize,
    /// Polar angles, ascending.
    pub theta: Vec<f64>,
    pub phi: Vec<f64>,
    /// Solid-angle weights per polar ring (already multiplied by `2 pi / n_phi`).
    pub ring_weight: Vec<f64>,
}

impl SphereGrid {
    pub fn new(n_theta: usize, n_phi: usize) -> Self {
        assert!(n_theta >= 1 && n_phi >= 1);
        let (x, w) = gauss_legendre(n_theta);
        // ascending theta means descending cos(theta)
        let theta: Vec<f64> = x.iter().rev().map(|c| c.acos()).collect();
        let dphi = 2.0 * PI / n_phi as f64;
        let ring_weight = w.iter().rev().map(|wi| wi * dphi).collect();
        let phi = (0..n_phi).map(|k| k as f64 * dphi).collect();
        SphereGrid {
            n_theta,
            n_phi,
            theta,
            phi,
            ring_weight,
        }
    }

    pub fn len(&self) -> usize {
        self.n_theta * self.n_phi
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Iterates `(theta, phi, solid-angle weight)` with phi varying fastest.
    pub fn directions(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.theta.iter().zip(&self.ring_weight).flat_map(move |(&t, &w)| {
            self.phi.iter().map(move |&p| (t, p, w))
        })
    }
}
