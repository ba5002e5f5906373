//! Synthetic body-pose scenario catalog.
//!
//! A transmitter sits at the right temple of a head and is carried around the
//! vertical axis by head rotation; receivers sit at the corners of the torso.
//! Channels are free-space mode channels seen through a partially reflecting
//! shell around the head, times a scripted tissue attenuation that grows as
//! the transmitter turns away from the receiver.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

use super::{free_space_channel, rotate_tx_frame, LeakyShell};
use crate::decompose::{CoefficientRole, CoefficientVector};
use crate::ensemble::{ScenarioEnsemble, ScenarioEntry, ScenarioTag};
use crate::error::Result;
use crate::modes::{Medium, ModeIndex, Point};
use crate::network::receive_vector_from_transmit;

const POSE_LABELS: [&str; 5] = ["rr", "r", "c", "l", "ll"];
const ANATOMY_LABELS: [&str; 3] = ["S", "M", "L"];
const RX_LABELS: [&str; 4] = ["FL", "FR", "BL", "BR"];

#[derive(Debug, Clone, PartialEq)]
pub struct CatalogConfig {
    pub j_tx: usize,
    pub j_rx: usize,
    /// Head center for the reference anatomy, meters.
    pub head_center: Point,
    /// Transmitter offset from the head center before rotation, meters.
    pub tx_offset: Point,
    /// Azimuth the transmitter faces before rotation, radians.
    pub tx_facing: f64,
    /// Receiver positions for the reference anatomy, meters.
    pub rx_positions: Vec<Point>,
    /// Size scale per anatomy, applied to all positions.
    pub anatomy_scales: Vec<f64>,
    /// Largest head rotation in either direction, radians.
    pub max_rotation: f64,
    /// Attenuation when the transmitter faces directly away, dB.
    pub shadow_db: f64,
    /// Half-width of the seeded uniform attenuation jitter, dB.
    pub jitter_db: f64,
    pub head_shell: Option<LeakyShell>,
    /// Receiver sphere radius in wavelengths.
    pub rx_radius_wavelengths: f64,
}

impl CatalogConfig {
    pub fn new(medium: &Medium) -> Self {
        CatalogConfig {
            j_tx: 6,
            j_rx: 6,
            head_center: Point::new(0.0, 0.0, 1.65),
            tx_offset: Point::new(0.0, -0.07, 0.0),
            tx_facing: -PI / 2.0,
            rx_positions: vec![
                Point::new(0.1, 0.12, 0.95),
                Point::new(0.1, -0.12, 0.95),
                Point::new(-0.1, 0.12, 0.95),
                Point::new(-0.1, -0.12, 0.95),
            ],
            anatomy_scales: vec![0.9, 1.0, 1.12],
            max_rotation: PI / 3.0,
            shadow_db: 50.0,
            jitter_db: 1.5,
            head_shell: Some(LeakyShell {
                radius: 0.8 * medium.wavelength(),
                reflectance: 0.3,
            }),
            rx_radius_wavelengths: 0.25,
        }
    }

    /// Mirror-symmetric about the `y = 0` plane: transmitter on the axis,
    /// facing forward, no jitter.
    pub fn symmetric(medium: &Medium) -> Self {
        CatalogConfig {
            tx_offset: Point::new(0.07, 0.0, 0.0),
            tx_facing: 0.0,
            jitter_db: 0.0,
            ..CatalogConfig::new(medium)
        }
    }
}

fn labels(fixed: &[&str], count: usize, prefix: &str) -> Vec<String> {
    if count == fixed.len() {
        fixed.iter().map(|s| s.to_string()).collect()
    } else {
        (0..count).map(|i| format!("{prefix}{i}")).collect()
    }
}

fn spread(count: usize, lo: f64, hi: f64) -> Vec<f64> {
    if count == 1 {
        return vec![0.5 * (lo + hi)];
    }
    (0..count).map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64).collect()
}

/// Receiver positions: the configured ones first, then extra points on an
/// ellipse around the torso.
fn rx_layout(config: &CatalogConfig, count: usize) -> Vec<(String, Point)> {
    (0..count)
        .map(|i| match config.rx_positions.get(i) {
            Some(p) if count <= RX_LABELS.len() => (RX_LABELS[i].to_string(), *p),
            _ => {
                let a = 2.0 * PI * i as f64 / count as f64;
                (format!("R{i}"), Point::new(0.1 * a.cos(), 0.15 * a.sin(), 0.95))
            }
        })
        .collect()
}

fn rotate_z(p: Point, a: f64) -> Point {
    let (s, c) = a.sin_cos();
    Point::new(c * p.x - s * p.y, s * p.x + c * p.y, p.z)
}

/// Vertical electric dipole receiver.
fn receiver_vector(j_rx: usize, origin: Point, frequency: f64) -> Result<CoefficientVector> {
    let mut t = vec![Complex64::new(0.0, 0.0); j_rx];
    t[ModeIndex::new(2, 0, 1).flat() - 1] = Complex64::new(1.0, 0.0);
    let t = CoefficientVector::new(CoefficientRole::Transmit, t, origin, frequency)?;
    Ok(receive_vector_from_transmit(&t))
}

pub fn scenario_catalog(seed: u64, n_anatomy: usize, n_pose: usize, n_rx: usize, medium: &Medium) -> Result<ScenarioEnsemble> {
    scenario_catalog_with(&CatalogConfig::new(medium), seed, n_anatomy, n_pose, n_rx, medium)
}

pub fn scenario_catalog_with(config: &CatalogConfig, seed: u64, n_anatomy: usize, n_pose: usize, n_rx: usize, medium: &Medium) -> Result<ScenarioEnsemble> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let anatomies = labels(&ANATOMY_LABELS, n_anatomy, "A");
    let scales = if n_anatomy == config.anatomy_scales.len() {
        config.anatomy_scales.clone()
    } else {
        spread(n_anatomy, config.anatomy_scales[0], *config.anatomy_scales.last().unwrap_or(&1.0))
    };
    let poses = labels(&POSE_LABELS, n_pose, "p");
    let angles = spread(n_pose, -config.max_rotation, config.max_rotation);
    let receivers = rx_layout(config, n_rx);
    let rx_radius = config.rx_radius_wavelengths * medium.wavelength();
    let weight = 1.0 / (n_anatomy * n_pose * n_rx) as f64;

    let mut entries = Vec::with_capacity(n_anatomy * n_pose * n_rx);
    for (anatomy, scale) in anatomies.iter().zip(&scales) {
        let head = config.head_center * *scale;
        for (pose, &alpha) in poses.iter().zip(&angles) {
            let tx = head + rotate_z(config.tx_offset * *scale, alpha);
            let facing = config.tx_facing + alpha;
            for (rx_label, rx_ref) in &receivers {
                let rx = rx_ref * *scale;
                let global = free_space_channel(tx, rx, config.j_tx, config.j_rx, medium, rx_radius)?;
                let mut local = rotate_tx_frame(&global, alpha);
                let to_rx = rx - head;
                let psi = to_rx.y.atan2(to_rx.x) - facing;
                let jitter = if config.jitter_db > 0.0 { rng.gen_range(-config.jitter_db..=config.jitter_db) } else { 0.0 };
                let loss_db = 0.5 * config.shadow_db * (1.0 - psi.cos()) + jitter;
                local.values *= Complex64::from(10f64.powf(-loss_db.max(0.0) / 20.0));
                let tag = ScenarioTag::new(anatomy, pose, rx_label);
                local.scenario_tag = tag.to_string();
                let (channel, reflection) = match config.head_shell {
                    Some(shell) => shell.embed(&local, medium)?,
                    None => {
                        let m11 = crate::network::ChannelMatrix::no_reflection(config.j_tx, tx, medium.frequency)?;
                        (local, m11)
                    }
                };
                let (mut channel, mut reflection) = (channel, reflection);
                channel.scenario_tag = tag.to_string();
                reflection.scenario_tag = tag.to_string();
                entries.push(ScenarioEntry {
                    tag,
                    weight,
                    channel,
                    reflection,
                    receive: receiver_vector(config.j_rx, rx, medium.frequency)?,
                });
            }
        }
    }
    ScenarioEnsemble::new(entries)
}
