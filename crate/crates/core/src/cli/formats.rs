//! Readers and writers for the on-disk formats.
//!
//! Floats are written with `{:e}` (shortest round-trip digits), so every
//! text format parses back to the identical bits.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::decompose::{CoefficientRole, CoefficientVector, FieldSurface, SurfaceGeometry, SurfaceSample};
use crate::ensemble::{ScenarioEnsemble, ScenarioEntry, ScenarioTag};
use crate::error::{Error, Result};
use crate::modes::{mode_index_from_flat, CVec3, Point};
use crate::network::{ChannelKind, ChannelMatrix};

pub const NEAR_FIELD_MAGIC: &str = "SWFNF v1";
pub const COEFFICIENT_MAGIC: &str = "SWFCOEF v1";
pub const ARCHIVE_MAGIC: &str = "SWFARCH v1";

const RECORD_FIELDS: [&str; 19] = [
    "x", "y", "z", "nx", "ny", "nz", "w", "Re(Ex)", "Im(Ex)", "Re(Ey)", "Im(Ey)", "Re(Ez)", "Im(Ez)", "Re(Hx)", "Im(Hx)", "Re(Hy)", "Im(Hy)", "Re(Hz)",
    "Im(Hz)",
];

/// Writes `bytes` to a sibling temporary file, then renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let name = path.file_name().ok_or_else(|| Error::Io(format!("`{}` has no file name", path.display())))?;
    let tmp = path.with_file_name(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path).inspect_err(|_| {
        let _ = std::fs::remove_file(&tmp);
    })?;
    Ok(())
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn source(path: &Path) -> String {
    path.display().to_string()
}

/// Whitespace-separated line reader that skips blanks and `#` comments and
/// remembers line numbers for diagnostics.
struct Lines<'a> {
    name: &'a str,
    inner: std::iter::Peekable<std::iter::Enumerate<std::str::Lines<'a>>>,
}

impl<'a> Lines<'a> {
    fn new(name: &'a str, text: &'a str) -> Self {
        Lines {
            name,
            inner: text.lines().enumerate().peekable(),
        }
    }

    fn skip_blank(&mut self) {
        while let Some((_, l)) = self.inner.peek() {
            let t = l.trim();
            if t.is_empty() || t.starts_with('#') {
                self.inner.next();
            } else {
                break;
            }
        }
    }

    fn peek_tokens(&mut self) -> Option<Vec<&'a str>> {
        self.skip_blank();
        self.inner.peek().map(|(_, l)| l.split_whitespace().collect())
    }

    fn next_tokens(&mut self) -> Option<(usize, Vec<&'a str>)> {
        self.skip_blank();
        self.inner.next().map(|(i, l)| (i + 1, l.split_whitespace().collect()))
    }

    fn err(&self, line: usize, msg: impl Into<String>) -> Error {
        Error::parse(self.name, line, msg)
    }

    fn expect_magic(&mut self, magic: &str) -> Result<()> {
        match self.inner.next() {
            Some((_, l)) if l.trim() == magic => Ok(()),
            Some((_, l)) => Err(self.err(1, format!("expected `{magic}`, found `{}`", l.trim()))),
            None => Err(self.err(1, "empty file")),
        }
    }
}

fn float(lines: &Lines, line: usize, tok: &str, what: &str) -> Result<f64> {
    tok.parse::<f64>().map_err(|_| lines.err(line, format!("{what} is not a number: `{tok}`")))
}

fn floats<const N: usize>(lines: &Lines, line: usize, toks: &[&str], what: &str) -> Result<[f64; N]> {
    if toks.len() != N {
        return Err(lines.err(line, format!("{what} needs {N} values, got {}", toks.len())));
    }
    let mut out = [0.0; N];
    for (o, t) in out.iter_mut().zip(toks) {
        *o = float(lines, line, t, what)?;
    }
    Ok(out)
}

fn fmt_point(p: &Point) -> String {
    format!("{:e} {:e} {:e}", p.x, p.y, p.z)
}

fn fmt_surface(g: &SurfaceGeometry) -> String {
    match g {
        SurfaceGeometry::Sphere { radius, center } => format!("sphere {radius:e} {}", fmt_point(center)),
        SurfaceGeometry::Box { half_extents, center } => format!("box {} {}", fmt_point(half_extents), fmt_point(center)),
    }
}

fn parse_surface(lines: &Lines, line: usize, toks: &[&str]) -> Result<SurfaceGeometry> {
    match toks.first() {
        Some(&"sphere") => {
            let [r, cx, cy, cz] = floats::<4>(lines, line, &toks[1..], "sphere surface")?;
            Ok(SurfaceGeometry::Sphere {
                radius: r,
                center: Point::new(cx, cy, cz),
            })
        }
        Some(&"box") => {
            let [hx, hy, hz, cx, cy, cz] = floats::<6>(lines, line, &toks[1..], "box surface")?;
            Ok(SurfaceGeometry::Box {
                half_extents: Point::new(hx, hy, hz),
                center: Point::new(cx, cy, cz),
            })
        }
        _ => Err(lines.err(line, "surface must be `sphere r cx cy cz` or `box hx hy hz cx cy cz`")),
    }
}

/// A parsed near-field file.
#[derive(Debug, Clone, PartialEq)]
pub struct NearFieldFile {
    pub surface: FieldSurface,
    /// Port power during the recording, when the exporter knows it.
    pub accepted_power: Option<f64>,
}

pub fn format_near_field(file: &NearFieldFile) -> String {
    let s = &file.surface;
    let mut out = String::new();
    writeln!(out, "{NEAR_FIELD_MAGIC}").unwrap();
    writeln!(out, "frequency_hz {:e}", s.frequency()).unwrap();
    writeln!(out, "surface {}", fmt_surface(s.geometry())).unwrap();
    let dims: Vec<String> = s.grid().iter().map(|d| d.to_string()).collect();
    writeln!(out, "grid {}", dims.join(" ")).unwrap();
    if let Some(p) = file.accepted_power {
        writeln!(out, "accepted_power_w {p:e}").unwrap();
    }
    writeln!(out, "# {}", RECORD_FIELDS.join(" ")).unwrap();
    for p in s.samples() {
        write!(out, "{} {} {:e}", fmt_point(&p.position), fmt_point(&p.normal), p.weight).unwrap();
        for c in p.e.iter().chain(p.h.iter()) {
            write!(out, " {:e} {:e}", c.re, c.im).unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn parse_near_field(text: &str, name: &str) -> Result<NearFieldFile> {
    let mut lines = Lines::new(name, text);
    lines.expect_magic(NEAR_FIELD_MAGIC)?;
    let (mut frequency, mut geometry, mut grid, mut accepted_power) = (None, None, None, None);
    while let Some(toks) = lines.peek_tokens() {
        if toks[0].parse::<f64>().is_ok() {
            break;
        }
        let (line, toks) = lines.next_tokens().unwrap();
        match toks[0] {
            "frequency_hz" => frequency = Some(floats::<1>(&lines, line, &toks[1..], "frequency_hz")?[0]),
            "surface" => geometry = Some(parse_surface(&lines, line, &toks[1..])?),
            "grid" => {
                let dims = toks[1..]
                    .iter()
                    .map(|t| t.parse::<usize>().map_err(|_| lines.err(line, format!("grid dimension is not an integer: `{t}`"))))
                    .collect::<Result<Vec<_>>>()?;
                grid = Some(dims);
            }
            "accepted_power_w" => accepted_power = Some(floats::<1>(&lines, line, &toks[1..], "accepted_power_w")?[0]),
            key => return Err(lines.err(line, format!("unknown header key `{key}`"))),
        }
    }
    let frequency = frequency.ok_or_else(|| lines.err(1, "missing header key `frequency_hz`"))?;
    let geometry = geometry.ok_or_else(|| lines.err(1, "missing header key `surface`"))?;
    let grid = grid.ok_or_else(|| lines.err(1, "missing header key `grid`"))?;

    let mut samples = Vec::new();
    while let Some((line, toks)) = lines.next_tokens() {
        let record = samples.len() + 1;
        if toks.len() != RECORD_FIELDS.len() {
            return Err(lines.err(line, format!("record {record}: expected {} fields, got {}", RECORD_FIELDS.len(), toks.len())));
        }
        let mut v = [0.0; 19];
        for (i, (t, field)) in toks.iter().zip(RECORD_FIELDS).enumerate() {
            v[i] = float(&lines, line, t, &format!("record {record}: field {} ({field})", i + 1))?;
        }
        let c = |i: usize| Complex64::new(v[i], v[i + 1]);
        samples.push(SurfaceSample {
            position: Point::new(v[0], v[1], v[2]),
            normal: Point::new(v[3], v[4], v[5]),
            weight: v[6],
            e: CVec3::new(c(7), c(9), c(11)),
            h: CVec3::new(c(13), c(15), c(17)),
        });
    }
    let surface = FieldSurface::from_samples(geometry, grid, samples, frequency)?;
    Ok(NearFieldFile { surface, accepted_power })
}

pub fn read_near_field(path: &Path) -> Result<NearFieldFile> {
    parse_near_field(&read_text(path)?, &source(path))
}

pub fn write_near_field(path: &Path, file: &NearFieldFile) -> Result<()> {
    write_atomic(path, format_near_field(file).as_bytes())
}

/// A parsed coefficient file.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientFile {
    pub vector: CoefficientVector,
    /// Surface the coefficients were extracted from, informational.
    pub surface: Option<SurfaceGeometry>,
}

pub fn format_coefficients(file: &CoefficientFile) -> String {
    let v = &file.vector;
    let mut out = String::new();
    writeln!(out, "{COEFFICIENT_MAGIC}").unwrap();
    writeln!(out, "role {}", v.role).unwrap();
    writeln!(out, "frequency_hz {:e}", v.frequency).unwrap();
    writeln!(out, "origin {}", fmt_point(&v.origin)).unwrap();
    writeln!(out, "truncation {}", v.truncation()).unwrap();
    if let Some(p) = v.accepted_power {
        writeln!(out, "accepted_power_w {p:e}").unwrap();
    }
    if let Some(g) = &file.surface {
        writeln!(out, "surface {}", fmt_surface(g)).unwrap();
    }
    writeln!(out, "# j s m n re im").unwrap();
    for (i, c) in v.values.iter().enumerate() {
        let mode = mode_index_from_flat(i + 1);
        writeln!(out, "{} {} {} {} {:e} {:e}", i + 1, mode.s, mode.m, mode.n, c.re, c.im).unwrap();
    }
    out
}

pub fn parse_coefficients(text: &str, name: &str) -> Result<CoefficientFile> {
    let mut lines = Lines::new(name, text);
    lines.expect_magic(COEFFICIENT_MAGIC)?;
    let (mut role, mut frequency, mut origin, mut truncation, mut accepted_power, mut surface) = (None, None, None, None, None, None);
    while let Some(toks) = lines.peek_tokens() {
        if toks[0].parse::<usize>().is_ok() {
            break;
        }
        let (line, toks) = lines.next_tokens().unwrap();
        let arg = |n: usize| -> Result<()> {
            if toks.len() == n + 1 {
                Ok(())
            } else {
                Err(lines.err(line, format!("`{}` needs {n} value(s)", toks[0])))
            }
        };
        match toks[0] {
            "role" => {
                arg(1)?;
                role = Some(toks[1].parse::<CoefficientRole>().map_err(|e| lines.err(line, e.to_string()))?);
            }
            "frequency_hz" => frequency = Some(floats::<1>(&lines, line, &toks[1..], "frequency_hz")?[0]),
            "origin" => origin = Some(Point::from(floats::<3>(&lines, line, &toks[1..], "origin")?)),
            "truncation" => {
                arg(1)?;
                truncation = Some(toks[1].parse::<usize>().map_err(|_| lines.err(line, format!("truncation is not an integer: `{}`", toks[1])))?);
            }
            "accepted_power_w" => accepted_power = Some(floats::<1>(&lines, line, &toks[1..], "accepted_power_w")?[0]),
            "surface" => surface = Some(parse_surface(&lines, line, &toks[1..])?),
            key => return Err(lines.err(line, format!("unknown header key `{key}`"))),
        }
    }
    let missing = |k: &str| lines.err(1, format!("missing header key `{k}`"));
    let role = role.ok_or_else(|| missing("role"))?;
    let frequency = frequency.ok_or_else(|| missing("frequency_hz"))?;
    let origin = origin.ok_or_else(|| missing("origin"))?;
    let truncation = truncation.ok_or_else(|| missing("truncation"))?;

    let mut values = Vec::with_capacity(truncation);
    while let Some((line, toks)) = lines.next_tokens() {
        let j = values.len() + 1;
        if toks.len() != 6 {
            return Err(lines.err(line, format!("record {j}: expected 6 fields `j s m n re im`, got {}", toks.len())));
        }
        let mode = mode_index_from_flat(j);
        let expect = [j.to_string(), mode.s.to_string(), mode.m.to_string(), mode.n.to_string()];
        if toks[..4] != expect.iter().map(String::as_str).collect::<Vec<_>>()[..] {
            return Err(lines.err(line, format!("record {j}: expected index `{}`, found `{}`", expect.join(" "), toks[..4].join(" "))));
        }
        let re = float(&lines, line, toks[4], &format!("record {j}: re"))?;
        let im = float(&lines, line, toks[5], &format!("record {j}: im"))?;
        values.push(Complex64::new(re, im));
    }
    if values.len() != truncation {
        return Err(lines.err(1, format!("header declares {truncation} coefficients, file has {}", values.len())));
    }
    let mut vector = CoefficientVector::new(role, values, origin, frequency)?;
    vector.accepted_power = accepted_power;
    Ok(CoefficientFile { vector, surface })
}

pub fn read_coefficients(path: &Path) -> Result<CoefficientFile> {
    parse_coefficients(&read_text(path)?, &source(path))
}

pub fn write_coefficients(path: &Path, file: &CoefficientFile) -> Result<()> {
    write_atomic(path, format_coefficients(file).as_bytes())
}

/// Matrices and receive vectors of one or more scenarios.
///
/// Blocks are stored in order; a scenario is the set of blocks sharing a tag.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ChannelArchive {
    pub channels: Vec<ChannelMatrix>,
    pub receivers: Vec<(String, CoefficientVector)>,
    pub weights: Vec<(String, f64)>,
}

#[derive(Serialize, Deserialize)]
struct Manifest {
    format: String,
    version: u32,
    layout: String,
    #[serde(default)]
    block: Vec<BlockMeta>,
    #[serde(default)]
    weight: Vec<WeightMeta>,
}

#[derive(Serialize, Deserialize)]
struct BlockMeta {
    kind: String,
    tag: String,
    rows: usize,
    cols: usize,
    tx_origin: [f64; 3],
    rx_origin: [f64; 3],
    frequency_hz: f64,
    offset: usize,
}

#[derive(Serialize, Deserialize)]
struct WeightMeta {
    tag: String,
    value: f64,
}

const RECEIVE_KIND: &str = "receive";

fn kind_name(kind: ChannelKind) -> String {
    kind.to_string()
}

fn parse_kind(s: &str) -> Option<ChannelKind> {
    [ChannelKind::TransmissionPrime, ChannelKind::Reflection, ChannelKind::Transmission].into_iter().find(|k| k.to_string() == s)
}

impl ChannelArchive {
    pub fn from_ensemble(ens: &ScenarioEnsemble) -> Self {
        let mut a = ChannelArchive::default();
        for e in ens.entries() {
            let tag = e.tag.to_string();
            let mut ch = e.channel.clone();
            ch.scenario_tag = tag.clone();
            let mut refl = e.reflection.clone();
            refl.scenario_tag = tag.clone();
            a.channels.push(ch);
            a.channels.push(refl);
            a.receivers.push((tag.clone(), e.receive.clone()));
            a.weights.push((tag, e.weight));
        }
        a
    }

    /// Builds scenarios from the `M'21` blocks. Missing reflections are taken
    /// as zero; `receiver` replaces stored receive vectors; missing weights
    /// fall back to uniform.
    pub fn to_ensemble(&self, receiver: Option<&CoefficientVector>) -> Result<ScenarioEnsemble> {
        let find = |tag: &str, kind: ChannelKind| self.channels.iter().find(|c| c.scenario_tag == tag && c.kind == kind);
        let mut entries = Vec::new();
        for ch in self.channels.iter().filter(|c| c.kind == ChannelKind::TransmissionPrime) {
            let tag: ScenarioTag = ch.scenario_tag.parse()?;
            let reflection = match find(&ch.scenario_tag, ChannelKind::Reflection) {
                Some(r) => r.clone(),
                None => ChannelMatrix::no_reflection(ch.values.ncols(), ch.tx_origin, ch.frequency)?,
            };
            let receive = match receiver {
                Some(r) => r.clone(),
                None => self
                    .receivers
                    .iter()
                    .find(|(t, _)| *t == ch.scenario_tag)
                    .map(|(_, r)| r.clone())
                    .ok_or_else(|| Error::InvalidArgument(format!("no receive vector for scenario `{}`", ch.scenario_tag)))?,
            };
            let weight = self.weights.iter().find(|(t, _)| *t == ch.scenario_tag).map_or(f64::NAN, |w| w.1);
            entries.push(ScenarioEntry {
                tag,
                weight,
                channel: ch.clone(),
                reflection,
                receive,
            });
        }
        if entries.iter().any(|e| e.weight.is_nan()) {
            ScenarioEnsemble::uniform(entries)
        } else {
            ScenarioEnsemble::new(entries)
        }
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut blob: Vec<u8> = Vec::new();
        let mut blocks = Vec::new();
        let mut push = |kind: String, tag: &str, m: &DMatrix<Complex64>, tx: Point, rx: Point, f: f64, blob: &mut Vec<u8>| {
            blocks.push(BlockMeta {
                kind,
                tag: tag.to_string(),
                rows: m.nrows(),
                cols: m.ncols(),
                tx_origin: tx.into(),
                rx_origin: rx.into(),
                frequency_hz: f,
                offset: blob.len(),
            });
            for c in m.iter() {
                blob.extend_from_slice(&c.re.to_le_bytes());
                blob.extend_from_slice(&c.im.to_le_bytes());
            }
        };
        for c in &self.channels {
            push(kind_name(c.kind), &c.scenario_tag, &c.values, c.tx_origin, c.rx_origin, c.frequency, &mut blob);
        }
        for (tag, r) in &self.receivers {
            let m = DMatrix::from_column_slice(r.truncation(), 1, &r.values);
            push(RECEIVE_KIND.into(), tag, &m, r.origin, r.origin, r.frequency, &mut blob);
        }
        let manifest = Manifest {
            format: "SWFARCH".into(),
            version: 1,
            layout: "column-major interleaved f64le".into(),
            block: blocks,
            weight: self.weights.iter().map(|(t, w)| WeightMeta { tag: t.clone(), value: *w }).collect(),
        };
        let text = toml::to_string(&manifest).map_err(|e| Error::InvalidArgument(format!("archive manifest: {e}")))?;
        let mut out = format!("{ARCHIVE_MAGIC}\nmanifest_bytes {}\n", text.len()).into_bytes();
        out.extend_from_slice(text.as_bytes());
        out.extend_from_slice(&blob);
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8], name: &str) -> Result<Self> {
        let err = |line: usize, msg: String| Error::parse(name, line, msg);
        let mut cursor = 0;
        let header_line = |cursor: &mut usize, line: usize| -> Result<&str> {
            let rest = &bytes[*cursor..];
            let end = rest.iter().position(|&b| b == b'\n').ok_or_else(|| err(line, "truncated header".into()))?;
            *cursor += end + 1;
            std::str::from_utf8(&rest[..end]).map_err(|_| err(line, "header is not UTF-8".into()))
        };
        let magic = header_line(&mut cursor, 1)?;
        if magic != ARCHIVE_MAGIC {
            return Err(err(1, format!("expected `{ARCHIVE_MAGIC}`, found `{magic}`")));
        }
        let len_line = header_line(&mut cursor, 2)?;
        let len: usize = len_line
            .strip_prefix("manifest_bytes ")
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| err(2, format!("expected `manifest_bytes <n>`, found `{len_line}`")))?;
        let text = bytes
            .get(cursor..cursor + len)
            .and_then(|b| std::str::from_utf8(b).ok())
            .ok_or_else(|| err(3, "manifest is truncated or not UTF-8".into()))?;
        let manifest: Manifest = toml::from_str(text).map_err(|e| err(3, format!("manifest: {e}")))?;
        if manifest.format != "SWFARCH" || manifest.version != 1 {
            return Err(err(3, format!("unsupported archive {} v{}", manifest.format, manifest.version)));
        }
        let blob = &bytes[cursor + len..];
        let mut archive = ChannelArchive::default();
        let mut expected_len = 0;
        for (i, b) in manifest.block.iter().enumerate() {
            let n = b.rows * b.cols;
            let data = blob
                .get(b.offset..b.offset + 16 * n)
                .ok_or_else(|| err(3, format!("block {} (`{}`) runs past the end of the data", i + 1, b.tag)))?;
            let f = |k: usize| f64::from_le_bytes(data[8 * k..8 * k + 8].try_into().unwrap());
            let values: Vec<Complex64> = (0..n).map(|k| Complex64::new(f(2 * k), f(2 * k + 1))).collect();
            expected_len = expected_len.max(b.offset + 16 * n);
            if b.kind == RECEIVE_KIND {
                if b.cols != 1 {
                    return Err(err(3, format!("block {}: receive vector must have one column", i + 1)));
                }
                let v = CoefficientVector::new(CoefficientRole::Receive, values, b.rx_origin.into(), b.frequency_hz)?;
                archive.receivers.push((b.tag.clone(), v));
            } else {
                let kind = parse_kind(&b.kind).ok_or_else(|| err(3, format!("block {}: unknown kind `{}`", i + 1, b.kind)))?;
                let m = DMatrix::from_vec(b.rows, b.cols, values);
                archive.channels.push(ChannelMatrix::new(m, kind, b.tx_origin.into(), b.rx_origin.into(), b.frequency_hz, b.tag.clone())?);
            }
        }
        if blob.len() != expected_len {
            return Err(err(3, format!("data section has {} bytes, manifest accounts for {expected_len}", blob.len())));
        }
        archive.weights = manifest.weight.into_iter().map(|w| (w.tag, w.value)).collect();
        Ok(archive)
    }
}

pub fn read_archive(path: &Path) -> Result<ChannelArchive> {
    let bytes = std::fs::read(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    ChannelArchive::from_bytes(&bytes, &source(path))
}

pub fn write_archive(path: &Path, archive: &ChannelArchive) -> Result<()> {
    write_atomic(path, &archive.to_bytes()?)
}

/// One row of an S21 table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkRow {
    pub anatomy: String,
    pub pose: String,
    pub rx: String,
    pub weight: f64,
    pub s21_re: f64,
    pub s21_im: f64,
    pub s21_db: f64,
}

impl LinkRow {
    pub fn tag(&self) -> ScenarioTag {
        ScenarioTag::new(&self.anatomy, &self.pose, &self.rx)
    }

    pub fn s21(&self) -> Complex64 {
        Complex64::new(self.s21_re, self.s21_im)
    }
}

fn csv_error(name: &str, e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    Error::parse(name, line, e.to_string())
}

pub fn format_csv<T: Serialize>(rows: &[T]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| csv_error("<output>", e))?;
    }
    w.into_inner().map_err(|e| Error::Io(e.to_string()))
}

pub fn parse_csv<T: for<'de> Deserialize<'de>>(text: &[u8], name: &str, columns: &[&str]) -> Result<Vec<T>> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).comment(Some(b'#')).from_reader(text);
    let headers = r.headers().map_err(|e| csv_error(name, e))?.clone();
    for col in columns {
        if !headers.iter().any(|h| h == *col) {
            return Err(Error::parse(name, 1, format!("missing column `{col}`")));
        }
    }
    r.deserialize().map(|row| row.map_err(|e| csv_error(name, e))).collect()
}

pub const LINK_COLUMNS: [&str; 7] = ["anatomy", "pose", "rx", "weight", "s21_re", "s21_im", "s21_db"];
pub const MEASUREMENT_COLUMNS: [&str; 4] = ["subject", "pose", "rx", "rssi_db"];

pub fn read_link_table(path: &Path) -> Result<Vec<LinkRow>> {
    let bytes = std::fs::read(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_csv(&bytes, &source(path), &LINK_COLUMNS)
}

pub fn read_measurements(path: &Path) -> Result<Vec<crate::ensemble::MeasurementRecord>> {
    let bytes = std::fs::read(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_csv(&bytes, &source(path), &MEASUREMENT_COLUMNS)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modes::{expansion_fields, Medium};

    fn surface() -> FieldSurface {
        let med = Medium::free_space(1e9);
        let b: Vec<Complex64> = (0..6).map(|i| Complex64::new(0.1 * i as f64 - 0.2, 1.0 / (i as f64 + 3.0))).collect();
        FieldSurface::sphere(0.4, Point::new(0.01, 0.0, -0.02), 6, 12, 1e9)
            .with_fields(|p| expansion_fields(&b, &[], &med, &(p - Point::new(0.01, 0.0, -0.02))))
            .unwrap()
    }

    #[test]
    fn near_field_round_trip_is_exact() {
        let f = NearFieldFile {
            surface: surface(),
            accepted_power: Some(0.123456789),
        };
        let back = parse_near_field(&format_near_field(&f), "t").unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn corrupt_record_names_line_and_field() {
        let text = format_near_field(&NearFieldFile {
            surface: surface(),
            accepted_power: None,
        });
        let mut lines: Vec<String> = text.lines().map(String::from).collect();
        let mut toks: Vec<&str> = lines[10].split_whitespace().collect();
        toks[8] = "1.0.0";
        lines[10] = toks.join(" ");
        match parse_near_field(&lines.join("\n"), "f.swfnf") {
            Err(Error::Parse { line, message, .. }) => {
                assert_eq!(line, 11);
                assert!(message.contains("field 9 (Im(Ex))"), "{message}");
            }
            other => panic!("{other:?}"),
        }
        lines.truncate(lines.len() - 3);
        assert!(matches!(parse_near_field(&lines.join("\n"), "f"), Err(Error::Parse { .. } | Error::OpenSurface(_) | Error::InvalidArgument(_))));
    }

    #[test]
    fn coefficient_round_trip_is_exact() {
        let values = (0..16).map(|i| Complex64::new((i as f64).sin() * 1e-7, (i as f64 * 0.3).cos())).collect();
        let mut v = CoefficientVector::new(CoefficientRole::OutgoingEquivalent, values, Point::new(0.1, -0.2, 1e-30), 2.45e9).unwrap();
        v.accepted_power = Some(0.5);
        let f = CoefficientFile {
            vector: v,
            surface: Some(SurfaceGeometry::Box {
                half_extents: Point::new(0.1, 0.2, 0.3),
                center: Point::zeros(),
            }),
        };
        assert_eq!(parse_coefficients(&format_coefficients(&f), "t").unwrap(), f);
    }

    #[test]
    fn archive_round_trip_is_exact() {
        let med = Medium::free_space(2.45e9);
        let ens = crate::synth::scenario_catalog(5, 1, 2, 2, &med).unwrap();
        let a = ChannelArchive::from_ensemble(&ens);
        let bytes = a.to_bytes().unwrap();
        let back = ChannelArchive::from_bytes(&bytes, "t").unwrap();
        assert_eq!(back, a);
        assert_eq!(back.to_ensemble(None).unwrap(), ens);
        assert!(ChannelArchive::from_bytes(&bytes[..bytes.len() - 8], "t").is_err());
    }

    #[test]
    fn link_table_round_trip() {
        let rows = vec![LinkRow {
            anatomy: "S".into(),
            pose: "c".into(),
            rx: "FL".into(),
            weight: 1.0 / 3.0,
            s21_re: -1.234e-5,
            s21_im: 7.0e-300,
            s21_db: -98.17,
        }];
        let bytes = format_csv(&rows).unwrap();
        assert_eq!(parse_csv::<LinkRow>(&bytes, "t", &LINK_COLUMNS).unwrap(), rows);
        assert!(matches!(parse_csv::<LinkRow>(b"anatomy,pose\nS,c\n", "t", &LINK_COLUMNS), Err(Error::Parse { .. })));
    }
}
