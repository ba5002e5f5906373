//! Batch front end: argument definitions and one function per subcommand.
//!
//! Every command reads its inputs, writes only the declared output paths
//! (atomically) and returns a short text summary for standard output.

pub mod formats;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::decompose::{convergence_metric, extract_coefficients_about, CoefficientRole, CoefficientVector, FieldSurface};
use crate::ensemble::{
    average_cells, calibration_factor, measured_average, summarize_measurements, to_db, AveragingDomain, ScenarioEnsemble, ScenarioTag,
    DEFAULT_THRESHOLD_DB,
};
use crate::error::{Error, Result};
use crate::modes::{expansion_fields, modes, shell_count, Medium, Point, SphereGrid};
use crate::network::{link, receive_vector_from_transmit, reflection_matrix_from_responses, transmit_vector, ChannelKind, ChannelMatrix};
use crate::optimize::{dipole_weights, global_optimum, optimal_excitation, Subspace};
use crate::synth::{pec_cavity_reflection, scenario_catalog, DipoleKind, HertzianDipole};
use formats::*;

#[derive(Debug, Parser)]
#[command(name = "swfnet", version, about = "Spherical-wave antenna de-embedding and excitation optimization")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decompose a near-field file into outgoing-equivalent coefficients.
    Decompose(DecomposeArgs),
    /// Build a channel archive from per-mode receiver response files.
    AssembleChannel(AssembleArgs),
    /// Optimal excitation per scenario and across an ensemble.
    Optimize(OptimizeArgs),
    /// S21 of an antenna over every scenario of one or more archives.
    Link(LinkArgs),
    /// Cell averages and the fraction of cells below a threshold.
    Kpi(KpiArgs),
    /// Scale simulated levels to measured signal strengths.
    Calibrate(CalibrateArgs),
    /// Write the synthetic body-pose scenario catalog as an archive.
    SynthCatalog(SynthCatalogArgs),
    /// Write the near field of a small dipole as a near-field file.
    SynthRadiator(SynthRadiatorArgs),
    /// Write per-mode receiver response files for a free-space link.
    SynthResponses(SynthResponsesArgs),
}

fn parse_point(s: &str) -> std::result::Result<Point, String> {
    let v: Vec<f64> = s.split(',').map(|t| t.trim().parse::<f64>().map_err(|e| format!("`{t}`: {e}"))).collect::<std::result::Result<_, _>>()?;
    match v.as_slice() {
        [x, y, z] => Ok(Point::new(*x, *y, *z)),
        _ => Err(format!("expected x,y,z, got `{s}`")),
    }
}

fn parse_list(s: &str) -> std::result::Result<Vec<f64>, String> {
    s.split(',').map(|t| t.trim().parse::<f64>().map_err(|e| format!("`{t}`: {e}"))).collect()
}

fn parse_grid(s: &str) -> std::result::Result<(usize, usize), String> {
    match s.split_once(',') {
        Some((a, b)) => Ok((a.trim().parse().map_err(|e| format!("{e}"))?, b.trim().parse().map_err(|e| format!("{e}"))?)),
        None => Err(format!("expected n_theta,n_phi, got `{s}`")),
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SubspaceArg {
    Te,
    Tm,
    Full,
}

impl From<SubspaceArg> for Subspace {
    fn from(s: SubspaceArg) -> Self {
        match s {
            SubspaceArg::Te => Subspace::TeOnly,
            SubspaceArg::Tm => Subspace::TmOnly,
            SubspaceArg::Full => Subspace::Full,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum DipoleArg {
    Electric,
    Magnetic,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum DomainArg {
    Linear,
    Db,
}

#[derive(Debug, Args)]
pub struct DecomposeArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Mode count J, a complete shell count 2N(N+2).
    #[arg(long)]
    pub truncation: usize,
    /// Expansion origin x,y,z in meters; defaults to the surface center.
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
    pub origin: Option<Point>,
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct AssembleArgs {
    /// Receiver-surface recordings, one per transmitter mode in index order.
    #[arg(long, num_args = 1.., required = true)]
    pub responses: Vec<PathBuf>,
    /// Transmitter mode count; the number of response files must match.
    #[arg(long)]
    pub tx_truncation: usize,
    /// Receiver mode count.
    #[arg(long)]
    pub truncation: usize,
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
    pub tx_origin: Point,
    /// Total-field recordings on a surface around the transmitter, one per
    /// mode, used to derive the transmitter reflection matrix.
    #[arg(long, num_args = 1..)]
    pub xi: Vec<PathBuf>,
    /// Receive coefficient file stored with the channel.
    #[arg(long)]
    pub receiver: Option<PathBuf>,
    /// Scenario tag anatomy/pose/rx.
    #[arg(long, default_value = "free/c/rx")]
    pub tag: String,
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    #[arg(long, num_args = 1.., required = true)]
    pub archives: Vec<PathBuf>,
    #[arg(long, value_enum, default_value = "full")]
    pub subspace: SubspaceArg,
    /// Scenario weights in archive order; uniform when omitted.
    #[arg(long, value_parser = parse_list)]
    pub weights: Option<Vec<f64>>,
    /// Far-field pattern grid n_theta,n_phi.
    #[arg(long, value_parser = parse_grid, default_value = "36,72")]
    pub pattern_grid: (usize, usize),
    #[arg(long)]
    pub output_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct LinkArgs {
    /// Transmitting antenna: a transmit vector, or outgoing-equivalent
    /// coefficients with an accepted power.
    #[arg(long)]
    pub antenna: PathBuf,
    #[arg(long, num_args = 1.., required = true)]
    pub archives: Vec<PathBuf>,
    /// Receiving antenna; defaults to the receive vectors stored in the archives.
    #[arg(long)]
    pub receiver: Option<PathBuf>,
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct KpiArgs {
    #[arg(long, num_args = 1.., required = true)]
    pub tables: Vec<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_THRESHOLD_DB, allow_hyphen_values = true)]
    pub threshold_db: f64,
    /// Average |S21| linearly or in dB across anatomies.
    #[arg(long, value_enum, default_value = "linear")]
    pub domain: DomainArg,
    /// Per-cell averages.
    #[arg(long)]
    pub cells: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    #[arg(long)]
    pub measurements: PathBuf,
    /// S21 table of the simulated counterpart.
    #[arg(long)]
    pub simulated: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct SynthCatalogArgs {
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 3)]
    pub anatomies: usize,
    #[arg(long, default_value_t = 5)]
    pub poses: usize,
    #[arg(long, default_value_t = 4)]
    pub receivers: usize,
    #[arg(long, default_value_t = 2.45e9)]
    pub frequency: f64,
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct SynthRadiatorArgs {
    #[arg(long, value_enum, default_value = "magnetic")]
    pub kind: DipoleArg,
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true, default_value = "0,0,1")]
    pub axis: Point,
    /// Dipole position relative to the surface center, meters.
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true, default_value = "0,0,0")]
    pub offset: Point,
    /// Radiated power, watts.
    #[arg(long, default_value_t = 0.5)]
    pub power: f64,
    #[arg(long, default_value_t = 2.45e9)]
    pub frequency: f64,
    /// Surface radius in wavelengths.
    #[arg(long, default_value_t = 1.0)]
    pub radius: f64,
    #[arg(long, value_parser = parse_grid, default_value = "32,64")]
    pub grid: (usize, usize),
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct SynthResponsesArgs {
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
    pub tx: Point,
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
    pub rx: Point,
    #[arg(long, default_value_t = 6)]
    pub truncation: usize,
    /// Receiver sphere radius in wavelengths.
    #[arg(long, default_value_t = 0.25)]
    pub rx_radius: f64,
    #[arg(long, value_parser = parse_grid)]
    pub grid: Option<(usize, usize)>,
    #[arg(long, default_value_t = 2.45e9)]
    pub frequency: f64,
    /// Also write total-field recordings inside a PEC sphere of this radius
    /// (wavelengths) centered on the transmitter.
    #[arg(long)]
    pub cavity_radius: Option<f64>,
    /// Radius of those recordings, in wavelengths.
    #[arg(long, default_value_t = 0.1)]
    pub xi_radius: f64,
    #[arg(long)]
    pub output_dir: PathBuf,
}

pub fn run(command: Command) -> Result<String> {
    match command {
        Command::Decompose(a) => cmd_decompose(&a),
        Command::AssembleChannel(a) => cmd_assemble_channel(&a),
        Command::Optimize(a) => cmd_optimize(&a),
        Command::Link(a) => cmd_link(&a),
        Command::Kpi(a) => cmd_kpi(&a),
        Command::Calibrate(a) => cmd_calibrate(&a),
        Command::SynthCatalog(a) => cmd_synth_catalog(&a),
        Command::SynthRadiator(a) => cmd_synth_radiator(&a),
        Command::SynthResponses(a) => cmd_synth_responses(&a),
    }
}

fn write_rows<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    write_atomic(path, &format_csv(rows)?)
}

pub fn cmd_decompose(args: &DecomposeArgs) -> Result<String> {
    let file = read_near_field(&args.input)?;
    let surface = &file.surface;
    let medium = Medium::free_space(surface.frequency());
    let origin = args.origin.unwrap_or_else(|| surface.geometry().center());
    let b = extract_coefficients_about(surface, args.truncation, CoefficientRole::OutgoingEquivalent, &medium, &origin)?;

    // coefficients of a lower truncation are a prefix of the full vector
    let mut out = String::from("N\tJ\tnorm_b\tdelta\n");
    let mut prev: Option<CoefficientVector> = None;
    let mut n = 1;
    while shell_count(n) <= args.truncation {
        let mut head = b.clone();
        head.values.truncate(shell_count(n));
        let delta = match &prev {
            Some(p) => format!("{:.6e}", convergence_metric(p, &head)?),
            None => "-".into(),
        };
        writeln!(out, "{n}\t{}\t{:.9e}\t{delta}", shell_count(n), head.norm()).unwrap();
        prev = Some(head);
        n += 1;
    }

    let mut vector = b;
    vector.accepted_power = file.accepted_power;
    write_coefficients(
        &args.output,
        &CoefficientFile {
            vector,
            surface: Some(*surface.geometry()),
        },
    )?;
    Ok(out)
}

fn same_grid(a: &FieldSurface, b: &FieldSurface) -> bool {
    a.geometry() == b.geometry() && a.grid() == b.grid()
}

fn read_consistent(paths: &[PathBuf]) -> Result<Vec<FieldSurface>> {
    let surfaces: Vec<FieldSurface> = paths.iter().map(|p| read_near_field(p).map(|f| f.surface)).collect::<Result<_>>()?;
    let first = &surfaces[0];
    for (s, p) in surfaces.iter().zip(paths).skip(1) {
        if s.frequency() != first.frequency() {
            return Err(Error::FrequencyMismatch {
                a: first.frequency(),
                b: s.frequency(),
            });
        }
        if !same_grid(first, s) {
            return Err(Error::InconsistentGrids(format!("{} differs from {}", p.display(), paths[0].display())));
        }
    }
    Ok(surfaces)
}

fn columns(surfaces: &[FieldSurface], truncation: usize, role: CoefficientRole, medium: &Medium, origin: &Point) -> Result<DMatrix<Complex64>> {
    let cols: Vec<CoefficientVector> = surfaces.iter().map(|s| extract_coefficients_about(s, truncation, role, medium, origin)).collect::<Result<_>>()?;
    Ok(DMatrix::from_fn(truncation, cols.len(), |i, j| cols[j].values[i]))
}

pub fn cmd_assemble_channel(args: &AssembleArgs) -> Result<String> {
    let tag: ScenarioTag = args.tag.parse()?;
    crate::modes::degree_for_truncation(args.tx_truncation)?;
    if args.responses.len() != args.tx_truncation {
        return Err(Error::MissingColumn {
            expected: args.tx_truncation,
            got: args.responses.len(),
        });
    }
    let rx = read_consistent(&args.responses)?;
    let frequency = rx[0].frequency();
    let medium = Medium::free_space(frequency);
    let rx_origin = rx[0].geometry().center();
    let m21 = columns(&rx, args.truncation, CoefficientRole::Incoming, &medium, &rx_origin)?;
    let channel = ChannelMatrix::new(m21, ChannelKind::TransmissionPrime, args.tx_origin, rx_origin, frequency, tag.to_string())?;

    let mut archive = ChannelArchive::default();
    let mut summary = format!("scenario {tag}: M'21 {}x{}", args.truncation, args.tx_truncation);
    archive.channels.push(channel);
    if !args.xi.is_empty() {
        if args.xi.len() != args.tx_truncation {
            return Err(Error::MissingColumn {
                expected: args.tx_truncation,
                got: args.xi.len(),
            });
        }
        let xi = read_consistent(&args.xi)?;
        if xi[0].frequency() != frequency {
            return Err(Error::FrequencyMismatch {
                a: frequency,
                b: xi[0].frequency(),
            });
        }
        let b_hat = columns(&xi, args.tx_truncation, CoefficientRole::RawOutgoing, &medium, &args.tx_origin)?;
        let mut m11 = reflection_matrix_from_responses(&b_hat, args.tx_origin, frequency)?;
        m11.scenario_tag = tag.to_string();
        archive.channels.push(m11);
        summary.push_str(", M11 from total-field recordings");
    }
    if let Some(path) = &args.receiver {
        let r = receive_of(read_coefficients(path)?.vector)?;
        archive.receivers.push((tag.to_string(), r));
    }
    write_archive(&args.output, &archive)?;
    summary.push('\n');
    Ok(summary)
}

fn load_ensemble(paths: &[PathBuf], receiver: Option<&CoefficientVector>) -> Result<ScenarioEnsemble> {
    let mut entries = Vec::new();
    for p in paths {
        entries.extend(read_archive(p)?.to_ensemble(receiver)?.entries().iter().cloned());
    }
    if paths.len() == 1 {
        ScenarioEnsemble::new(entries)
    } else {
        ScenarioEnsemble::uniform(entries)
    }
}

#[derive(Serialize)]
struct LambdaRow {
    scenario: String,
    lambda_max: f64,
    gain_db: f64,
    mixed_te_tm: bool,
}

#[derive(Serialize)]
struct DipoleRow {
    dipole: &'static str,
    axis: &'static str,
    re: f64,
    im: f64,
}

#[derive(Serialize)]
struct PatternRow {
    theta_rad: f64,
    phi_rad: f64,
    gain_dbi: f64,
    e_theta_re: f64,
    e_theta_im: f64,
    e_phi_re: f64,
    e_phi_im: f64,
}

pub fn cmd_optimize(args: &OptimizeArgs) -> Result<String> {
    let ens = load_ensemble(&args.archives, None)?;
    let subspace: Subspace = args.subspace.into();
    let weights = match &args.weights {
        Some(w) if w.len() != ens.len() => return Err(Error::DimensionMismatch(format!("{} weights for {} scenarios", w.len(), ens.len()))),
        Some(w) => w.clone(),
        None => ens.entries().iter().map(|e| e.weight).collect(),
    };
    let optima = ens.entries().iter().map(|e| optimal_excitation(&e.channel, subspace)).collect::<Result<Vec<_>>>()?;
    let b = global_optimum(&optima, &weights)?;

    std::fs::create_dir_all(&args.output_dir)?;
    let dir = &args.output_dir;
    let rows: Vec<LambdaRow> = optima
        .iter()
        .map(|o| LambdaRow {
            scenario: o.scenario_tag.clone(),
            lambda_max: o.lambda_max,
            gain_db: 10.0 * o.lambda_max.log10(),
            mixed_te_tm: o.hard_to_realize(),
        })
        .collect();
    write_rows(&dir.join("lambda.csv"), &rows)?;

    let w = dipole_weights(&b);
    let axes = ["x", "y", "z"];
    let dipoles: Vec<DipoleRow> = [("magnetic", w.magnetic), ("electric", w.electric)]
        .iter()
        .flat_map(|(name, g)| g.iter().zip(axes).map(|(c, axis)| DipoleRow { dipole: name, axis, re: c.re, im: c.im }))
        .collect();
    write_rows(&dir.join("dipoles.csv"), &dipoles)?;

    let medium = Medium::free_space(ens.frequency());
    let grid = SphereGrid::new(args.pattern_grid.0, args.pattern_grid.1);
    let pattern = crate::modes::far_field_pattern(&b.values, &medium, &grid, b.power())?;
    let mut pattern_rows = Vec::with_capacity(grid.len());
    for (k, (theta, phi, _)) in grid.directions().enumerate() {
        pattern_rows.push(PatternRow {
            theta_rad: theta,
            phi_rad: phi,
            gain_dbi: pattern.gain_db[k],
            e_theta_re: pattern.e_theta[k].re,
            e_theta_im: pattern.e_theta[k].im,
            e_phi_re: pattern.e_phi[k].re,
            e_phi_im: pattern.e_phi[k].im,
        });
    }
    write_rows(&dir.join("pattern.csv"), &pattern_rows)?;

    let mut opt = b.clone();
    opt.accepted_power = Some(b.power());
    write_coefficients(&dir.join("optimum.swfcoef"), &CoefficientFile { vector: opt, surface: None })?;

    let mean_lambda: f64 = optima.iter().zip(&weights).map(|(o, w)| o.lambda_max * w).sum();
    let dipole_share = w.power() / b.norm().powi(2);
    Ok(format!(
        "scenarios {}\nsubspace {subspace}\nweighted mean lambda_max {mean_lambda:.6e} ({:.2} dB)\ndipole share of optimum {:.4}\npeak gain {:.2} dBi\n",
        optima.len(),
        10.0 * mean_lambda.log10(),
        dipole_share,
        pattern.peak_gain_db()
    ))
}

/// Transmit vector from a coefficient file of role transmit, or of role
/// outgoing-equivalent carrying its accepted power.
fn transmit_of(v: CoefficientVector) -> Result<CoefficientVector> {
    match (v.role, v.accepted_power) {
        (CoefficientRole::Transmit, _) => Ok(v),
        (CoefficientRole::OutgoingEquivalent, Some(p)) => transmit_vector(&v, p),
        (CoefficientRole::OutgoingEquivalent, None) => Err(Error::InvalidArgument("outgoing-equivalent coefficients need `accepted_power_w` to act as an antenna".into())),
        (role, _) => Err(Error::InvalidArgument(format!("a {role} vector cannot describe a transmitting antenna"))),
    }
}

fn receive_of(v: CoefficientVector) -> Result<CoefficientVector> {
    if v.role == CoefficientRole::Receive {
        return Ok(v);
    }
    Ok(receive_vector_from_transmit(&transmit_of(v)?))
}

pub fn cmd_link(args: &LinkArgs) -> Result<String> {
    let t = transmit_of(read_coefficients(&args.antenna)?.vector)?;
    let r = match &args.receiver {
        Some(p) => Some(receive_of(read_coefficients(p)?.vector)?),
        None => None,
    };
    let ens = load_ensemble(&args.archives, r.as_ref())?;
    let rows = ens
        .entries()
        .iter()
        .map(|e| {
            let s = link(&e.receive, &e.channel, &t)?;
            Ok(LinkRow {
                anatomy: e.tag.anatomy.clone(),
                pose: e.tag.pose.clone(),
                rx: e.tag.rx.clone(),
                weight: e.weight,
                s21_re: s.re,
                s21_im: s.im,
                s21_db: to_db(s.norm()),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    write_rows(&args.output, &rows)?;
    let mean = rows.iter().map(|r| r.s21().norm() * r.weight).sum::<f64>();
    Ok(format!("scenarios {}\nweighted mean |S21| {:.3} dB\n", rows.len(), to_db(mean)))
}

#[derive(Serialize)]
struct CellRow {
    pose: String,
    rx: String,
    mean_db: f64,
    below_threshold: bool,
}

/// Table-style KPI label, e.g. `5% (1)`.
pub fn kpi_label(fraction: f64, count: usize) -> String {
    format!("{}% ({count})", (100.0 * fraction).round())
}

pub fn cmd_kpi(args: &KpiArgs) -> Result<String> {
    let mut samples = Vec::new();
    for p in &args.tables {
        for row in read_link_table(p)? {
            samples.push((row.tag(), row.weight, row.s21().norm()));
        }
    }
    if samples.is_empty() {
        return Err(Error::EmptyEnsemble);
    }
    let domain = match args.domain {
        DomainArg::Linear => AveragingDomain::Linear,
        DomainArg::Db => AveragingDomain::Decibel,
    };
    let cells = average_cells(&samples, domain);
    let count = cells.iter().filter(|c| c.mean_db < args.threshold_db).count();
    let fraction = count as f64 / cells.len() as f64;
    let rows: Vec<CellRow> = cells
        .into_iter()
        .map(|c| CellRow {
            below_threshold: c.mean_db < args.threshold_db,
            pose: c.pose,
            rx: c.rx,
            mean_db: c.mean_db,
        })
        .collect();
    write_rows(&args.cells, &rows)?;
    let report = format!(
        "cells {}\nthreshold_db {}\nbelow {count}\nfraction {fraction}\nkpi {}\n",
        rows.len(),
        args.threshold_db,
        kpi_label(fraction, count)
    );
    write_atomic(&args.output, report.as_bytes())?;
    Ok(report)
}

#[derive(Serialize)]
struct CalibrationRow {
    pose: String,
    rx: String,
    subject: String,
    q1_db: f64,
    median_db: f64,
    q3_db: f64,
    lower_whisker_db: f64,
    upper_whisker_db: f64,
    outliers: usize,
    cell_mean_db: f64,
}

pub fn cmd_calibrate(args: &CalibrateArgs) -> Result<String> {
    let records = read_measurements(&args.measurements)?;
    let sim = read_link_table(&args.simulated)?;
    if sim.is_empty() {
        return Err(Error::EmptyEnsemble);
    }
    let sim_avg = sim.iter().map(|r| r.s21().norm()).sum::<f64>() / sim.len() as f64;
    let factor = calibration_factor(sim_avg, measured_average(&records)?)?;
    let cells = summarize_measurements(&records, factor)?;
    let mut rows = Vec::new();
    for c in &cells {
        for (subject, b) in &c.subjects {
            rows.push(CalibrationRow {
                pose: c.pose.clone(),
                rx: c.rx.clone(),
                subject: subject.clone(),
                q1_db: b.q1,
                median_db: b.median,
                q3_db: b.q3,
                lower_whisker_db: b.lower_whisker,
                upper_whisker_db: b.upper_whisker,
                outliers: b.outliers.len(),
                cell_mean_db: c.mean_db,
            });
        }
    }
    write_rows(&args.output, &rows)?;
    Ok(format!("calibration factor {factor:.6e} ({:.3} dB)\ncells {}\n", to_db(factor), cells.len()))
}

pub fn cmd_synth_catalog(args: &SynthCatalogArgs) -> Result<String> {
    let medium = Medium::free_space(args.frequency);
    let ens = scenario_catalog(args.seed, args.anatomies, args.poses, args.receivers, &medium)?;
    write_archive(&args.output, &ChannelArchive::from_ensemble(&ens))?;
    Ok(format!("scenarios {} (seed {})\n", ens.len(), args.seed))
}

pub fn cmd_synth_radiator(args: &SynthRadiatorArgs) -> Result<String> {
    let medium = Medium::free_space(args.frequency);
    let kind = match args.kind {
        DipoleArg::Electric => DipoleKind::Electric,
        DipoleArg::Magnetic => DipoleKind::Magnetic,
    };
    let dipole = HertzianDipole::with_power(kind, args.offset, args.axis, args.power, &medium);
    let surface = FieldSurface::sphere(args.radius * medium.wavelength(), Point::zeros(), args.grid.0, args.grid.1, args.frequency)
        .with_fields(|p| dipole.fields(&medium, p))?;
    write_near_field(
        &args.output,
        &NearFieldFile {
            surface,
            accepted_power: Some(args.power),
        },
    )?;
    Ok(format!("{:?} dipole, {} samples\n", kind, args.grid.0 * args.grid.1))
}

pub fn cmd_synth_responses(args: &SynthResponsesArgs) -> Result<String> {
    let medium = Medium::free_space(args.frequency);
    let lambda = medium.wavelength();
    let nmax = crate::modes::degree_for_truncation(args.truncation)?;
    let radius = args.rx_radius * lambda;
    let (nt, np) = args.grid.unwrap_or_else(|| {
        let nt = (2 * nmax + 2).max(nmax + (medium.k * radius).ceil() as usize + 12);
        (nt, 2 * nt)
    });
    std::fs::create_dir_all(&args.output_dir)?;
    let unit = |j: usize| {
        let mut v = vec![Complex64::new(0.0, 0.0); args.truncation];
        v[j] = Complex64::new(1.0, 0.0);
        v
    };
    let mut written = 0;
    for (j, _) in modes(args.truncation).enumerate() {
        let b = unit(j);
        let surface = FieldSurface::sphere(radius, args.rx, nt, np, args.frequency).with_fields(|p| expansion_fields(&b, &[], &medium, &(p - args.tx)))?;
        write_near_field(&args.output_dir.join(format!("rx_mode_{:03}.swfnf", j + 1)), &NearFieldFile { surface, accepted_power: None })?;
        written += 1;
    }
    if let Some(cr) = args.cavity_radius {
        // inside the cavity: b̂ = 1 / (1 - Γ), â = Γ b̂ per mode
        let gamma = pec_cavity_reflection(cr * lambda, &medium, args.truncation)?;
        let xi = args.xi_radius * lambda;
        let nt = (2 * nmax + 2).max(nmax + (medium.k * xi).ceil() as usize + 12);
        for j in 0..args.truncation {
            let g = gamma.values[(j, j)];
            let b_hat: Vec<Complex64> = unit(j).iter().map(|u| u / (Complex64::new(1.0, 0.0) - g)).collect();
            let a_hat: Vec<Complex64> = b_hat.iter().map(|b| b * g).collect();
            let surface = FieldSurface::sphere(xi, args.tx, nt, 2 * nt, args.frequency).with_fields(|p| expansion_fields(&b_hat, &a_hat, &medium, &(p - args.tx)))?;
            write_near_field(&args.output_dir.join(format!("xi_mode_{:03}.swfnf", j + 1)), &NearFieldFile { surface, accepted_power: None })?;
            written += 1;
        }
    }
    Ok(format!("wrote {written} files to {}\n", args.output_dir.display()))
}
