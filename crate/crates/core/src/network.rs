//! Signal-flow algebra between antenna ports and spherical-wave channels.
//!
//! Each antenna is replaced by its equivalent source on an enclosing sphere.
//! The equivalent antenna reflects every incoming wave completely (`S' = I`),
//! so the loop at antenna 1 reads `b̂ = b' + â`, `â = M11 b̂`, and the link is
//! the single product `S21 = R' M'21 T'`. Backscatter from the receiver onto
//! the transmitter is neglected.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::decompose::{CoefficientRole, CoefficientVector};
use crate::error::{Error, Result};
use crate::modes::{degree_for_truncation, mode_index_from_flat, ModeIndex, Point};

/// Condition number beyond which a loop or response matrix counts as singular.
pub const SINGULAR_CONDITION: f64 = 1e12;

/// Global constant in `R'_{s,m,n} = c_r (-1)^m T'_{s,-m,n}`.
pub const RECIPROCITY_CONSTANT: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChannelKind {
    /// `M'21`, already including backscatter at both antennas.
    TransmissionPrime,
    Reflection,
    Transmission,
}

impl std::fmt::Display for ChannelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ChannelKind::TransmissionPrime => "transmission-prime",
            ChannelKind::Reflection => "reflection",
            ChannelKind::Transmission => "transmission",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMatrix {
    /// `J_rx x J_tx`.
    pub values: DMatrix<Complex64>,
    pub kind: ChannelKind,
    pub tx_origin: Point,
    pub rx_origin: Point,
    pub frequency: f64,
    pub scenario_tag: String,
}

impl ChannelMatrix {
    pub fn new(
        values: DMatrix<Complex64>,
        kind: ChannelKind,
        tx_origin: Point,
        rx_origin: Point,
        frequency: f64,
        scenario_tag: impl Into<String>,
    ) -> Result<Self> {
        degree_for_truncation(values.nrows())?;
        degree_for_truncation(values.ncols())?;
        if kind == ChannelKind::Reflection && values.nrows() != values.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "reflection matrix must be square, got {}x{}",
                values.nrows(),
                values.ncols()
            )));
        }
        if values.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::InvalidArgument("channel matrix has non-finite entries".into()));
        }
        if !(frequency > 0.0) {
            return Err(Error::InvalidArgument(format!("frequency must be positive, got {frequency}")));
        }
        Ok(ChannelMatrix {
            values,
            kind,
            tx_origin,
            rx_origin,
            frequency,
            scenario_tag: scenario_tag.into(),
        })
    }

    /// Zero reflection at `origin`, the free-space case.
    pub fn no_reflection(truncation: usize, origin: Point, frequency: f64) -> Result<Self> {
        ChannelMatrix::new(DMatrix::zeros(truncation, truncation), ChannelKind::Reflection, origin, origin, frequency, "")
    }

    pub fn spectral_norm(&self) -> f64 {
        self.values.clone().singular_values().max()
    }

    /// Lossless-bound sanity check: spectral norm at most `1 + tol`.
    pub fn is_passive(&self, tol: f64) -> bool {
        self.spectral_norm() <= 1.0 + tol
    }
}

/// Port waves of one antenna.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PortWave {
    /// Incident wave in sqrt(W).
    pub v: Complex64,
    /// Reflected wave in sqrt(W).
    pub w: Complex64,
    pub accepted_power: f64,
}

impl PortWave {
    pub fn new(v: Complex64, w: Complex64) -> Self {
        PortWave {
            v,
            w,
            accepted_power: 0.5 * (v.norm_sqr() - w.norm_sqr()),
        }
    }

    /// A matched port fed so that it accepts `accepted_power`.
    pub fn matched(accepted_power: f64) -> Self {
        PortWave::new(Complex64::new((2.0 * accepted_power).sqrt(), 0.0), Complex64::new(0.0, 0.0))
    }
}

fn same_frequency(a: f64, b: f64) -> Result<()> {
    if (a - b).abs() > 1e-9 * a.abs().max(b.abs()) {
        return Err(Error::FrequencyMismatch { a, b });
    }
    Ok(())
}

pub fn condition_number(m: &DMatrix<Complex64>) -> f64 {
    let sv = m.clone().singular_values();
    let (max, min) = (sv.max(), sv.min());
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Inverse of a square matrix by partial-pivot LU, refusing ill-conditioned input.
/// On failure returns the condition number.
fn checked_inverse(m: &DMatrix<Complex64>) -> std::result::Result<DMatrix<Complex64>, f64> {
    let cond = condition_number(m);
    if !(cond <= SINGULAR_CONDITION) {
        return Err(cond);
    }
    m.clone().lu().try_inverse().ok_or(cond)
}

fn identity_minus(m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    DMatrix::identity(m.nrows(), m.ncols()) - m
}

/// `T' = b' / sqrt(2 P_a)`.
pub fn transmit_vector(b_prime: &CoefficientVector, accepted_power: f64) -> Result<CoefficientVector> {
    if accepted_power.is_nan() || accepted_power <= 0.0 {
        return Err(Error::ZeroPower(accepted_power));
    }
    let scale = 1.0 / (2.0 * accepted_power).sqrt();
    let mut t = CoefficientVector::new(
        CoefficientRole::Transmit,
        b_prime.values.iter().map(|c| c * scale).collect(),
        b_prime.origin,
        b_prime.frequency,
    )?;
    t.accepted_power = Some(accepted_power);
    Ok(t)
}

/// Receive vector of a reciprocal antenna from its transmit vector.
pub fn receive_vector_from_transmit(t: &CoefficientVector) -> CoefficientVector {
    let values = (1..=t.truncation())
        .map(|j| {
            let ModeIndex { s, m, n } = mode_index_from_flat(j);
            let partner = ModeIndex::new(s, -m, n).flat();
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            t.values[partner - 1] * (RECIPROCITY_CONSTANT * sign)
        })
        .collect();
    CoefficientVector {
        role: CoefficientRole::Receive,
        values,
        origin: t.origin,
        frequency: t.frequency,
        accepted_power: None,
    }
}

/// `S21 = R' M t` for a prime channel, or `R M21 T` in free space.
pub fn link(r: &CoefficientVector, m: &ChannelMatrix, t: &CoefficientVector) -> Result<Complex64> {
    if r.truncation() != m.values.nrows() || t.truncation() != m.values.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "receive length {} and transmit length {} against a {}x{} channel",
            r.truncation(),
            t.truncation(),
            m.values.nrows(),
            m.values.ncols()
        )));
    }
    same_frequency(r.frequency, m.frequency)?;
    same_frequency(t.frequency, m.frequency)?;
    let mut s = Complex64::new(0.0, 0.0);
    for (row, rv) in r.values.iter().enumerate() {
        let mut acc = Complex64::new(0.0, 0.0);
        for (col, tv) in t.values.iter().enumerate() {
            acc += m.values[(row, col)] * tv;
        }
        s += rv * acc;
    }
    Ok(s)
}

/// `M11 = I - B̂^{-1}`, where column `j` of `b_hat` is the total outgoing
/// wave recorded on the antenna surface while mode `j` is excited.
pub fn reflection_matrix_from_responses(b_hat: &DMatrix<Complex64>, origin: Point, frequency: f64) -> Result<ChannelMatrix> {
    if b_hat.nrows() != b_hat.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "response matrix must be square, got {}x{}",
            b_hat.nrows(),
            b_hat.ncols()
        )));
    }
    let inv = checked_inverse(b_hat).map_err(|condition| Error::SingularResponse { condition })?;
    let m11 = identity_minus(&inv);
    ChannelMatrix::new(m11, ChannelKind::Reflection, origin, origin, frequency, "")
}

/// Resolved loop waves `(b̂, â)` at an antenna radiating `b'` into `M11`.
pub fn loop_waves(b_prime: &[Complex64], m11: &ChannelMatrix) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    if m11.kind != ChannelKind::Reflection || m11.values.ncols() != b_prime.len() {
        return Err(Error::DimensionMismatch(format!(
            "excitation of length {} against a {} matrix of size {}x{}",
            b_prime.len(),
            m11.kind,
            m11.values.nrows(),
            m11.values.ncols()
        )));
    }
    let inv = checked_inverse(&identity_minus(&m11.values)).map_err(|condition| Error::SingularLoop { condition })?;
    let bp = nalgebra::DVector::from_column_slice(b_prime);
    let b_hat = &inv * bp;
    let a_hat = &m11.values * &b_hat;
    Ok((b_hat.iter().copied().collect(), a_hat.iter().copied().collect()))
}

/// `P_a = ½ ||b'||² + Re{((I - M11)^{-1} M11 b')^H b'}` for a unit-norm `b'`.
pub fn accepted_power_in_channel(b_prime: &CoefficientVector, m11: &ChannelMatrix) -> Result<f64> {
    let norm = b_prime.norm();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!("excitation must have unit norm, got {norm}")));
    }
    same_frequency(b_prime.frequency, m11.frequency)?;
    let (_, a_hat) = loop_waves(&b_prime.values, m11)?;
    let cross: Complex64 = a_hat.iter().zip(&b_prime.values).map(|(a, b)| a.conj() * b).sum();
    Ok(0.5 * norm * norm + cross.re)
}

/// Net power through the antenna surface, `½(||b̂||² - ||â||²)`.
pub fn accepted_power_from_waves(b_hat: &[Complex64], a_hat: &[Complex64]) -> f64 {
    let sq = |v: &[Complex64]| v.iter().map(|c| c.norm_sqr()).sum::<f64>();
    0.5 * (sq(b_hat) - sq(a_hat))
}

/// `M'21 = (I - M22)^{-1} M21 (I - M11)^{-1}`.
pub fn convert_channel(m21: &ChannelMatrix, m11: &ChannelMatrix, m22: &ChannelMatrix) -> Result<ChannelMatrix> {
    if m11.kind != ChannelKind::Reflection || m22.kind != ChannelKind::Reflection {
        return Err(Error::InvalidArgument("M11 and M22 must be reflection matrices".into()));
    }
    let (rows, cols) = m21.values.shape();
    if m11.values.nrows() != cols || m22.values.nrows() != rows {
        return Err(Error::DimensionMismatch(format!(
            "M21 is {rows}x{cols}, M11 is {0}x{0}, M22 is {1}x{1}",
            m11.values.nrows(),
            m22.values.nrows()
        )));
    }
    same_frequency(m21.frequency, m11.frequency)?;
    same_frequency(m21.frequency, m22.frequency)?;
    let left = checked_inverse(&identity_minus(&m22.values)).map_err(|condition| Error::SingularLoop { condition })?;
    let right = checked_inverse(&identity_minus(&m11.values)).map_err(|condition| Error::SingularLoop { condition })?;
    ChannelMatrix::new(
        left * &m21.values * right,
        ChannelKind::TransmissionPrime,
        m21.tx_origin,
        m21.rx_origin,
        m21.frequency,
        m21.scenario_tag.clone(),
    )
}
