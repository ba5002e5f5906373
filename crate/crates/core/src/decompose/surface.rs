//! Closed quadrature surfaces carrying sampled tangential fields.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::modes::{gauss_legendre, CVec3, Point, SphereGrid};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SurfaceGeometry {
    Sphere { radius: f64, center: Point },
    Box { half_extents: Point, center: Point },
}

impl SurfaceGeometry {
    pub fn center(&self) -> Point {
        match *self {
            SurfaceGeometry::Sphere { center, .. } | SurfaceGeometry::Box { center, .. } => center,
        }
    }

    pub fn area(&self) -> f64 {
        match *self {
            SurfaceGeometry::Sphere { radius, .. } => 4.0 * PI * radius * radius,
            SurfaceGeometry::Box { half_extents: h, .. } => 8.0 * (h.x * h.y + h.y * h.z + h.x * h.z),
        }
    }

    /// Radius of the smallest sphere about the center containing the surface.
    pub fn bounding_radius(&self) -> f64 {
        match *self {
            SurfaceGeometry::Sphere { radius, .. } => radius,
            SurfaceGeometry::Box { half_extents, .. } => half_extents.norm(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceSample {
    pub position: Point,
    pub normal: Point,
    pub weight: f64,
    pub e: CVec3,
    pub h: CVec3,
}

/// Sampled fields on a closed surface. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSurface {
    geometry: SurfaceGeometry,
    /// `[n_theta, n_phi]` for spheres, `[nx, ny, nz]` nodes per axis for boxes.
    grid: Vec<usize>,
    samples: Vec<SurfaceSample>,
    frequency: f64,
}

impl FieldSurface {
    /// Gauss-Legendre x uniform-azimuth sphere with zero fields.
    pub fn sphere(radius: f64, center: Point, n_theta: usize, n_phi: usize, frequency: f64) -> Self {
        let grid = SphereGrid::new(n_theta, n_phi);
        let samples = grid
            .directions()
            .map(|(t, p, w)| {
                let normal = Point::new(t.sin() * p.cos(), t.sin() * p.sin(), t.cos());
                SurfaceSample {
                    position: center + normal * radius,
                    normal,
                    weight: w * radius * radius,
                    e: CVec3::zeros(),
                    h: CVec3::zeros(),
                }
            })
            .collect();
        FieldSurface {
            geometry: SurfaceGeometry::Sphere { radius, center },
            grid: vec![n_theta, n_phi],
            samples,
            frequency,
        }
    }

    /// Box with a tensor Gauss-Legendre rule on each of the six faces.
    pub fn cuboid(half_extents: Point, center: Point, nodes: [usize; 3], frequency: f64) -> Self {
        let rules: Vec<(Vec<f64>, Vec<f64>)> = nodes.iter().map(|&n| gauss_legendre(n)).collect();
        let mut samples = Vec::new();
        for axis in 0..3 {
            let (u, v) = ((axis + 1) % 3, (axis + 2) % 3);
            for sign in [-1.0, 1.0] {
                let mut normal = Point::zeros();
                normal[axis] = sign;
                for (xu, wu) in rules[u].0.iter().zip(&rules[u].1) {
                    for (xv, wv) in rules[v].0.iter().zip(&rules[v].1) {
                        let mut p = Point::zeros();
                        p[axis] = sign * half_extents[axis];
                        p[u] = xu * half_extents[u];
                        p[v] = xv * half_extents[v];
                        samples.push(SurfaceSample {
                            position: center + p,
                            normal,
                            weight: wu * wv * half_extents[u] * half_extents[v],
                            e: CVec3::zeros(),
                            h: CVec3::zeros(),
                        });
                    }
                }
            }
        }
        FieldSurface {
            geometry: SurfaceGeometry::Box { half_extents, center },
            grid: nodes.to_vec(),
            samples,
            frequency,
        }
    }

    /// Builds a surface from externally supplied samples and checks closure.
    pub fn from_samples(geometry: SurfaceGeometry, grid: Vec<usize>, samples: Vec<SurfaceSample>, frequency: f64) -> Result<Self> {
        let s = FieldSurface {
            geometry,
            grid,
            samples,
            frequency,
        };
        s.validate()?;
        Ok(s)
    }

    /// Replaces the fields by `f(position) -> (E, H)`.
    pub fn with_fields<F>(mut self, f: F) -> Result<Self>
    where
        F: Fn(&Point) -> Result<(CVec3, CVec3)> + Sync,
    {
        use rayon::prelude::*;
        let fields: Vec<(CVec3, CVec3)> = self.samples.par_iter().map(|s| f(&s.position)).collect::<Result<_>>()?;
        for (s, (e, h)) in self.samples.iter_mut().zip(fields) {
            s.e = e;
            s.h = h;
        }
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.frequency > 0.0) {
            return Err(Error::InvalidArgument(format!("frequency must be positive, got {}", self.frequency)));
        }
        let expected = match self.geometry {
            SurfaceGeometry::Sphere { radius, .. } => {
                if self.grid.len() != 2 || !(radius > 0.0) {
                    return Err(Error::OpenSurface("sphere needs a radius and [n_theta, n_phi] grid".into()));
                }
                self.grid[0] * self.grid[1]
            }
            SurfaceGeometry::Box { half_extents, .. } => {
                if self.grid.len() != 3 || half_extents.iter().any(|h| !(*h > 0.0)) {
                    return Err(Error::OpenSurface("box needs positive half extents and [nx, ny, nz] grid".into()));
                }
                let (nx, ny, nz) = (self.grid[0], self.grid[1], self.grid[2]);
                let mut per_face = [0usize; 6];
                for smp in &self.samples {
                    let axis = (0..3).max_by(|&a, &b| smp.normal[a].abs().total_cmp(&smp.normal[b].abs())).unwrap();
                    per_face[2 * axis + usize::from(smp.normal[axis] > 0.0)] += 1;
                }
                let want = [ny * nz, ny * nz, nz * nx, nz * nx, nx * ny, nx * ny];
                if per_face != want {
                    return Err(Error::OpenSurface(format!("face sample counts {per_face:?}, expected {want:?}")));
                }
                2 * (ny * nz + nz * nx + nx * ny)
            }
        };
        if self.samples.len() != expected {
            return Err(Error::OpenSurface(format!("{} samples for a grid needing {expected}", self.samples.len())));
        }
        for (i, smp) in self.samples.iter().enumerate() {
            if (smp.normal.norm() - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidArgument(format!("sample {i}: normal is not unit length")));
            }
            let finite = smp.position.iter().all(|v| v.is_finite())
                && smp.weight.is_finite()
                && smp.e.iter().chain(smp.h.iter()).all(|c| c.re.is_finite() && c.im.is_finite());
            if !finite {
                return Err(Error::InvalidArgument(format!("sample {i}: non-finite value")));
            }
        }
        let total: f64 = self.samples.iter().map(|s| s.weight).sum();
        let area = self.geometry.area();
        if ((total - area) / area).abs() > 1e-10 {
            return Err(Error::OpenSurface(format!("weights sum to {total:e}, surface area is {area:e}")));
        }
        Ok(())
    }

    pub fn geometry(&self) -> &SurfaceGeometry {
        &self.geometry
    }

    pub fn grid(&self) -> &[usize] {
        &self.grid
    }

    pub fn samples(&self) -> &[SurfaceSample] {
        &self.samples
    }

    pub fn frequency(&self) -> f64 {
        self.frequency
    }

    /// Checks the sampling density needed to resolve degree `nmax` at `wavelength`.
    pub fn check_density(&self, nmax: usize, wavelength: f64) -> Result<()> {
        let half = wavelength / 2.0;
        match self.geometry {
            SurfaceGeometry::Sphere { radius, .. } => {
                let (nt, np) = (self.grid[0], self.grid[1]);
                if nt < 2 * nmax + 2 || np < 2 * nmax + 2 {
                    return Err(Error::UndersampledSurface(format!(
                        "grid {nt}x{np} cannot resolve degree {nmax}: need at least {} nodes per coordinate",
                        2 * nmax + 2
                    )));
                }
                let (dt, dp) = (PI * radius / nt as f64, 2.0 * PI * radius / np as f64);
                if dt > half || dp > half {
                    return Err(Error::UndersampledSurface(format!(
                        "node spacing ({dt:.4e}, {dp:.4e}) m exceeds half a wavelength ({half:.4e} m)"
                    )));
                }
            }
            SurfaceGeometry::Box { half_extents, .. } => {
                for axis in 0..3 {
                    let n = self.grid[axis];
                    if n < nmax + 2 {
                        return Err(Error::UndersampledSurface(format!(
                            "{n} nodes along axis {axis}, need at least {} for degree {nmax}",
                            nmax + 2
                        )));
                    }
                    let d = 2.0 * half_extents[axis] / n as f64;
                    if d > half {
                        return Err(Error::UndersampledSurface(format!(
                            "node spacing {d:.4e} m along axis {axis} exceeds half a wavelength ({half:.4e} m)"
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_is_closed() {
        let s = FieldSurface::sphere(0.3, Point::new(0.1, 0.0, -0.2), 10, 20, 1e9);
        s.validate().unwrap();
    }

    #[test]
    fn box_is_closed() {
        let s = FieldSurface::cuboid(Point::new(0.031, 0.02, 0.01), Point::zeros(), [6, 5, 4], 1e9);
        s.validate().unwrap();
        assert_eq!(s.samples().len(), 2 * (5 * 4 + 4 * 6 + 6 * 5));
    }

    #[test]
    fn missing_face_is_open() {
        let s = FieldSurface::cuboid(Point::new(0.03, 0.03, 0.03), Point::zeros(), [4, 4, 4], 1e9);
        let samples: Vec<_> = s.samples().iter().filter(|p| p.normal.z < 0.5).copied().collect();
        let r = FieldSurface::from_samples(*s.geometry(), s.grid().to_vec(), samples, 1e9);
        assert!(matches!(r, Err(Error::OpenSurface(_))));
    }

    #[test]
    fn density_check() {
        let lambda = 0.1224;
        let s = FieldSurface::sphere(lambda, Point::zeros(), 8, 16, 2.45e9);
        assert!(s.check_density(3, lambda).is_ok());
        assert!(matches!(s.check_density(4, lambda), Err(Error::UndersampledSurface(_))));
        let coarse = FieldSurface::sphere(2.0 * lambda, Point::zeros(), 8, 16, 2.45e9);
        assert!(matches!(coarse.check_density(1, lambda), Err(Error::UndersampledSurface(_))));
    }
}
