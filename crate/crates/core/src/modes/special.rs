//! Spherical Bessel/Hankel functions and normalized associated Legendre
//! functions, the radial and angular building blocks of the wave functions.

use num_complex::Complex64;

/// Spherical Bessel functions `j_n(x)` and `y_n(x)` for `n = 0..=nmax`.
#[derive(Debug, Clone)]
pub struct SphericalBessel {
    pub j: Vec<f64>,
    pub y: Vec<f64>,
}

impl SphericalBessel {
    /// Evaluates both kinds at `x > 0`.
    ///
    /// `j_n` uses upward recurrence when `x` exceeds the order range and
    /// Miller's downward recurrence otherwise, normalized with
    /// `sum (2n+1) j_n^2 = 1`. `y_n` is always computed upward.
    pub fn new(nmax: usize, x: f64) -> Self {
        assert!(x > 0.0, "spherical Bessel argument must be positive");
        SphericalBessel {
            j: spherical_j(nmax, x),
            y: spherical_y(nmax, x),
        }
    }
}

pub fn spherical_j(nmax: usize, x: f64) -> Vec<f64> {
    let mut out = vec![0.0; nmax + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let (s, c) = x.sin_cos();
    if x > nmax as f64 + 1.0 {
        out[0] = s / x;
        if nmax >= 1 {
            out[1] = s / (x * x) - c / x;
        }
        for n in 2..=nmax {
            out[n] = (2 * n - 1) as f64 / x * out[n - 1] - out[n - 2];
        }
        return out;
    }
    if x < 1e-3 {
        // Two-term power series; the next term is O(x^4) relative.
        let mut term = 1.0;
        for (n, v) in out.iter_mut().enumerate() {
            if n > 0 {
                term *= x / (2 * n + 1) as f64;
            }
            *v = term * (1.0 - x * x / (2.0 * (2 * n + 3) as f64));
        }
        return out;
    }
    let start = nmax + 30 + x.ceil() as usize;
    let mut next = 0.0;
    let mut cur = 1e-30;
    let mut vals = vec![0.0; start + 1];
    vals[start] = cur;
    for n in (1..=start).rev() {
        let prev = (2 * n + 1) as f64 / x * cur - next;
        next = cur;
        cur = prev;
        vals[n - 1] = cur;
        if cur.abs() > 1e100 {
            for v in vals[n - 1..].iter_mut() {
                *v *= 1e-100;
            }
            cur *= 1e-100;
            next *= 1e-100;
        }
    }
    let sum: f64 = vals
        .iter()
        .enumerate()
        .map(|(n, v)| (2 * n + 1) as f64 * v * v)
        .sum();
    let mut scale = 1.0 / sum.sqrt();
    // sign from j_0 = sin(x)/x or j_1 when j_0 is near a zero
    let j0 = s / x;
    let j1 = s / (x * x) - c / x;
    if j0.abs() > j1.abs() {
        if (vals[0] < 0.0) != (j0 < 0.0) {
            scale = -scale;
        }
    } else if (vals[1] < 0.0) != (j1 < 0.0) {
        scale = -scale;
    }
    for n in 0..=nmax {
        out[n] = vals[n] * scale;
    }
    out
}

pub fn spherical_y(nmax: usize, x: f64) -> Vec<f64> {
    let (s, c) = x.sin_cos();
    let mut out = vec![0.0; nmax + 1];
    out[0] = -c / x;
    if nmax >= 1 {
        out[1] = -c / (x * x) - s / x;
    }
    for n in 2..=nmax {
        out[n] = (2 * n - 1) as f64 / x * out[n - 1] - out[n - 2];
    }
    out
}

/// Radial functions of one wave kind: `z_n(x)` and the Riccati derivative
/// ratio `(x z_n(x))' / x = z_{n-1} - n z_n / x`.
#[derive(Debug, Clone)]
pub struct RadialValues {
    pub z: Vec<Complex64>,
    pub dz: Vec<Complex64>,
}

impl RadialValues {
    pub fn from_values(z: Vec<Complex64>, x: f64) -> Self {
        let mut dz = vec![Complex64::new(0.0, 0.0); z.len()];
        for n in 1..z.len() {
            dz[n] = z[n - 1] - z[n] * (n as f64 / x);
        }
        RadialValues { z, dz }
    }
}

/// Normalized associated Legendre functions without the Condon-Shortley
/// phase, `Pbar_n^m(cos t) = sqrt((2n+1)/2 (n-m)!/(n+m)!) P_n^m(cos t)`.
///
/// Alongside the values, the table holds `Pbar_n^m / sin t` (for `m >= 1`)
/// and `d Pbar_n^m / dt`, both computed without dividing by `sin t`, so
/// they stay finite on the polar axis.
#[derive(Debug, Clone)]
pub struct LegendreTable {
    nmax: usize,
    p: Vec<f64>,
    p_over_sin: Vec<f64>,
    dp: Vec<f64>,
}

#[inline]
fn tri(n: usize, m: usize) -> usize {
    n * (n + 1) / 2 + m
}

impl LegendreTable {
    pub fn new(nmax: usize, cos_t: f64, sin_t: f64) -> Self {
        let len = tri(nmax, nmax) + 1;
        let mut p = vec![0.0; len];
        let mut q = vec![0.0; len];
        let mut dp = vec![0.0; len];

        // m = 0 column: plain values.
        p[0] = std::f64::consts::FRAC_1_SQRT_2;
        if nmax >= 1 {
            p[tri(1, 0)] = 3f64.sqrt() * cos_t * p[0];
        }
        for n in 2..=nmax {
            let (a, b) = recurrence(n, 0);
            p[tri(n, 0)] = a * cos_t * p[tri(n - 1, 0)] - b * p[tri(n - 2, 0)];
        }

        // m >= 1 columns are carried as Pbar / sin.
        let mut diag = 0.0;
        for m in 1..=nmax {
            diag = if m == 1 {
                0.75f64.sqrt()
            } else {
                ((2 * m + 1) as f64 / (2 * m) as f64).sqrt() * sin_t * diag
            };
            q[tri(m, m)] = diag;
            if m < nmax {
                q[tri(m + 1, m)] = ((2 * m + 3) as f64).sqrt() * cos_t * diag;
            }
            for n in m + 2..=nmax {
                let (a, b) = recurrence(n, m);
                q[tri(n, m)] = a * cos_t * q[tri(n - 1, m)] - b * q[tri(n - 2, m)];
            }
            for n in m..=nmax {
                p[tri(n, m)] = sin_t * q[tri(n, m)];
            }
        }

        for n in 1..=nmax {
            dp[tri(n, 0)] = -((n * (n + 1)) as f64).sqrt() * sin_t * q[tri(n, 1)];
            for m in 1..=n {
                let lower = if n > m { q[tri(n - 1, m)] } else { 0.0 };
                let f = (((n * n - m * m) * (2 * n + 1)) as f64 / (2 * n - 1) as f64).sqrt();
                dp[tri(n, m)] = n as f64 * cos_t * q[tri(n, m)] - f * lower;
            }
        }

        LegendreTable {
            nmax,
            p,
            p_over_sin: q,
            dp,
        }
    }

    pub fn nmax(&self) -> usize {
        self.nmax
    }

    pub fn p(&self, n: usize, m: usize) -> f64 {
        self.p[tri(n, m)]
    }

    /// `Pbar_n^m / sin t`; zero for `m = 0` (never needed there).
    pub fn p_over_sin(&self, n: usize, m: usize) -> f64 {
        self.p_over_sin[tri(n, m)]
    }

    pub fn dp(&self, n: usize, m: usize) -> f64 {
        self.dp[tri(n, m)]
    }
}

fn recurrence(n: usize, m: usize) -> (f64, f64) {
    let nn = (n * n - m * m) as f64;
    let a = ((4 * n * n - 1) as f64 / nn).sqrt();
    let b = ((2 * n + 1) as f64 * ((n - 1) * (n - 1) - m * m) as f64 / ((2 * n - 3) as f64 * nn)).sqrt();
    (a, b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn j_closed(n: usize, x: f64) -> f64 {
        let (s, c) = x.sin_cos();
        match n {
            0 => s / x,
            1 => s / (x * x) - c / x,
            2 => (3.0 / (x * x) - 1.0) * s / x - 3.0 * c / (x * x),
            3 => (15.0 / x.powi(3) - 6.0 / x) * s / x - (15.0 / (x * x) - 1.0) * c / x,
            _ => unreachable!(),
        }
    }

    #[test]
    fn bessel_matches_closed_forms() {
        for &x in &[0.3, 1.0, 2.5, 3.14159, 7.0, 25.0, 1e4] {
            let j = spherical_j(3, x);
            for n in 0..=3 {
                let want = j_closed(n, x);
                assert!((j[n] - want).abs() <= 1e-10 * want.abs() + 1e-13, "j_{n}({x}) = {} vs {want}", j[n]);
            }
        }
    }

    #[test]
    fn bessel_small_argument_series() {
        // j_n(x) ~ x^n / (2n+1)!! (1 - x^2 / (2(2n+3)))
        for &x in &[1e-6, 1e-4, 0.01, 0.04] {
            let j = spherical_j(4, x);
            let mut dfact = 1.0;
            for n in 0..=4 {
                if n > 0 {
                    dfact *= (2 * n + 1) as f64;
                }
                let lead = x.powi(n as i32) / dfact;
                let want = lead * (1.0 - x * x / (2.0 * (2 * n + 3) as f64) + x.powi(4) / (8.0 * ((2 * n + 3) * (2 * n + 5)) as f64));
                assert!((j[n] / want - 1.0).abs() < 1e-10, "n={n} x={x}");
            }
        }
    }

    #[test]
    fn bessel_wronskian() {
        for &x in &[0.2, 1.0, 4.0, 12.0, 40.0] {
            let b = SphericalBessel::new(10, x);
            for n in 1..=10 {
                // j_n y_{n-1} - j_{n-1} y_n = 1/x^2
                let w = b.j[n] * b.y[n - 1] - b.j[n - 1] * b.y[n];
                assert!((w * x * x - 1.0).abs() < 1e-9, "n={n} x={x} w={w}");
            }
        }
    }

    #[test]
    fn high_order_small_argument_does_not_blow_up() {
        let j = spherical_j(12, 0.5);
        assert!(j.iter().all(|v| v.is_finite()));
        assert!(j[12] > 0.0 && j[12] < 1e-12);
    }

    #[test]
    fn legendre_low_orders() {
        let t: f64 = 0.7;
        let (s, c) = t.sin_cos();
        let tab = LegendreTable::new(3, c, s);
        assert!((tab.p(1, 0) - 1.5f64.sqrt() * c).abs() < 1e-14);
        assert!((tab.p(1, 1) - 0.75f64.sqrt() * s).abs() < 1e-14);
        assert!((tab.dp(1, 0) + 1.5f64.sqrt() * s).abs() < 1e-14);
        assert!((tab.dp(1, 1) - 0.75f64.sqrt() * c).abs() < 1e-14);
        // Pbar_2^2 = sqrt(15/16) sin^2
        assert!((tab.p(2, 2) - (15.0f64 / 16.0).sqrt() * s * s).abs() < 1e-14);
    }

    #[test]
    fn legendre_normalization_by_quadrature() {
        // midpoint rule in theta with many nodes is plenty for a check
        let nodes = 4000;
        let nmax = 6;
        let mut acc = vec![0.0; tri(nmax, nmax) + 1];
        for i in 0..nodes {
            let t = (i as f64 + 0.5) * std::f64::consts::PI / nodes as f64;
            let tab = LegendreTable::new(nmax, t.cos(), t.sin());
            for n in 0..=nmax {
                for m in 0..=n {
                    acc[tri(n, m)] += tab.p(n, m).powi(2) * t.sin() * std::f64::consts::PI / nodes as f64;
                }
            }
        }
        for v in acc {
            assert!((v - 1.0).abs() < 1e-5, "{v}");
        }
    }

    #[test]
    fn legendre_derivative_matches_finite_difference() {
        let nmax = 5;
        let h = 1e-6;
        for &t in &[0.3f64, 1.2, 2.9] {
            let a = LegendreTable::new(nmax, (t + h).cos(), (t + h).sin());
            let b = LegendreTable::new(nmax, (t - h).cos(), (t - h).sin());
            let c = LegendreTable::new(nmax, t.cos(), t.sin());
            for n in 1..=nmax {
                for m in 0..=n {
                    let fd = (a.p(n, m) - b.p(n, m)) / (2.0 * h);
                    assert!((fd - c.dp(n, m)).abs() < 1e-7, "n={n} m={m}");
                }
            }
        }
    }

    #[test]
    fn legendre_finite_on_pole() {
        let tab = LegendreTable::new(4, 1.0, 0.0);
        assert!((tab.p_over_sin(1, 1) - 0.75f64.sqrt()).abs() < 1e-15);
        assert_eq!(tab.p_over_sin(2, 2), 0.0);
        assert!(tab.dp(3, 1).is_finite());
    }
}
