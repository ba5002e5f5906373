use std::path::{Path, PathBuf};
use std::process::Command;

use num_complex::Complex64;
use swfnet::cli::formats::{read_archive, read_coefficients, write_coefficients, write_near_field, CoefficientFile, NearFieldFile};
use swfnet::cli::{cmd_assemble_channel, cmd_decompose, cmd_link, AssembleArgs, DecomposeArgs, LinkArgs};
use swfnet::decompose::{CoefficientRole, CoefficientVector, FieldSurface};
use swfnet::modes::{expansion_fields, Medium, Point};
use swfnet::network::ChannelKind;
use swfnet::synth::free_space_channel;
use swfnet::Error;

const F: f64 = 2.45e9;

fn swfnet(dir: &Path, args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_swfnet")).current_dir(dir).args(args).output().unwrap()
}

fn responses(dir: &Path, tx: &str, rx: &str, sub: &str) -> Vec<PathBuf> {
    let out = swfnet(dir, &["synth-responses", "--tx", tx, "--rx", rx, "--output-dir", sub]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    (1..=6).map(|j| dir.join(sub).join(format!("rx_mode_{j:03}.swfnf"))).collect()
}

fn assemble(dir: &Path, files: Vec<PathBuf>, tx: Point, name: &str) -> swfnet::Result<PathBuf> {
    let output = dir.join(name);
    cmd_assemble_channel(&AssembleArgs {
        responses: files,
        tx_truncation: 6,
        truncation: 6,
        tx_origin: tx,
        xi: Vec::new(),
        receiver: None,
        tag: "free/c/rx".into(),
        output: output.clone(),
    })?;
    Ok(output)
}

#[test]
fn pure_mode_surface_decomposes_to_unit_entry() {
    let dir = tempfile::tempdir().unwrap();
    let med = Medium::free_space(F);
    let mut b = vec![Complex64::new(0.0, 0.0); 16];
    b[9] = Complex64::new(1.0, 0.0);
    let surface = FieldSurface::sphere(med.wavelength(), Point::zeros(), 16, 32, F).with_fields(|p| expansion_fields(&b, &[], &med, p)).unwrap();
    let input = dir.path().join("mode.swfnf");
    write_near_field(&input, &NearFieldFile { surface, accepted_power: None }).unwrap();
    let output = dir.path().join("mode.swfcoef");
    let table = cmd_decompose(&DecomposeArgs {
        input,
        truncation: 16,
        origin: None,
        output: output.clone(),
    })
    .unwrap();
    assert_eq!(table.lines().count(), 3, "{table}");
    let got = read_coefficients(&output).unwrap().vector;
    for (j, c) in got.values.iter().enumerate() {
        let expect = if j == 9 { 1.0 } else { 0.0 };
        assert!((c - expect).norm() < 1e-10, "entry {j}: {c}");
    }
}

#[test]
fn corrupt_near_field_exits_with_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    assert!(swfnet(p, &["synth-radiator", "--grid", "8,16", "--output", "r.swfnf"]).status.success());
    let text = std::fs::read_to_string(p.join("r.swfnf")).unwrap();
    let bad: Vec<String> = text.lines().enumerate().map(|(i, l)| if i == 20 { l.replacen(' ', " x", 1) } else { l.to_string() }).collect();
    std::fs::write(p.join("bad.swfnf"), bad.join("\n")).unwrap();
    let out = swfnet(p, &["decompose", "--input", "bad.swfnf", "--truncation", "6", "--output", "o.swfcoef"]);
    assert_eq!(out.status.code(), Some(2));
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("line 21") && msg.contains("record"), "{msg}");
    assert!(!p.join("o.swfcoef").exists());
}

#[test]
fn undersampled_surface_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    assert!(swfnet(p, &["synth-radiator", "--grid", "4,8", "--output", "r.swfnf"]).status.success());
    let out = swfnet(p, &["decompose", "--input", "r.swfnf", "--truncation", "30", "--output", "o.swfcoef"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("undersampled"));
}

#[test]
fn assembled_channel_matches_direct_synthesis() {
    let dir = tempfile::tempdir().unwrap();
    let med = Medium::free_space(F);
    let tx = Point::new(0.0, 0.0, 0.0);
    let rx = Point::new(0.5, 0.1, -0.2);
    let files = responses(dir.path(), "0,0,0", "0.5,0.1,-0.2", "resp");
    let archive = read_archive(&assemble(dir.path(), files, tx, "a.swfarch").unwrap()).unwrap();
    let direct = free_space_channel(tx, rx, 6, 6, &med, 0.25 * med.wavelength()).unwrap();
    let m = &archive.channels[0];
    assert_eq!(m.kind, ChannelKind::TransmissionPrime);
    let err = (&m.values - &direct.values).iter().map(|c| c.norm()).fold(0.0, f64::max);
    assert!(err < 1e-6 * direct.values.norm(), "{err}");
}

#[test]
fn missing_and_mismatched_responses() {
    let dir = tempfile::tempdir().unwrap();
    let mut files = responses(dir.path(), "0,0,0", "0.5,0,0", "resp");
    let five = files[..5].to_vec();
    assert!(matches!(assemble(dir.path(), five, Point::zeros(), "x.swfarch"), Err(Error::MissingColumn { expected: 6, got: 5 })));

    let other = responses(dir.path(), "0,0,0", "0.6,0,0", "moved");
    files[3] = other[3].clone();
    assert!(matches!(assemble(dir.path(), files.clone(), Point::zeros(), "x.swfarch"), Err(Error::InconsistentGrids(_))));

    let out = swfnet(dir.path(), &["synth-responses", "--tx", "0,0,0", "--rx", "0.5,0,0", "--frequency", "2.4e9", "--output-dir", "shifted"]);
    assert!(out.status.success());
    files[3] = dir.path().join("shifted/rx_mode_004.swfnf");
    assert!(matches!(assemble(dir.path(), files, Point::zeros(), "x.swfarch"), Err(Error::FrequencyMismatch { .. })));
    assert!(!dir.path().join("x.swfarch").exists());
}

#[test]
fn cavity_recordings_yield_reflection_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let out = swfnet(p, &["synth-responses", "--tx", "0,0,0", "--rx", "1.5,0,0", "--cavity-radius", "0.6", "--output-dir", "r"]);
    assert!(out.status.success());
    let mut args: Vec<String> = ["assemble-channel", "--tx-truncation", "6", "--truncation", "6", "--tx-origin", "0,0,0", "--output", "a.swfarch", "--responses"]
        .map(String::from)
        .to_vec();
    args.extend((1..=6).map(|j| format!("r/rx_mode_{j:03}.swfnf")));
    args.push("--xi".into());
    args.extend((1..=6).map(|j| format!("r/xi_mode_{j:03}.swfnf")));
    let refs: Vec<&str> = args.iter().map(String::as_str).collect();
    let out = swfnet(p, &refs);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let archive = read_archive(&p.join("a.swfarch")).unwrap();
    let m11 = archive.channels.iter().find(|c| c.kind == ChannelKind::Reflection).unwrap();
    let med = Medium::free_space(F);
    let exact = swfnet::synth::pec_cavity_reflection(0.6 * med.wavelength(), &med, 6).unwrap();
    let err = (&m11.values - &exact.values).iter().map(|c| c.norm()).fold(0.0, f64::max);
    assert!(err < 1e-6, "{err}");
}

fn antenna(dir: &Path, name: &str, seed: f64, origin: Point) -> PathBuf {
    let values = (0..6).map(|i| Complex64::new((seed + i as f64).sin(), (seed * 2.0 + i as f64).cos())).collect();
    let vector = CoefficientVector::new(CoefficientRole::Transmit, values, origin, F).unwrap();
    let path = dir.join(name);
    write_coefficients(&path, &CoefficientFile { vector, surface: None }).unwrap();
    path
}

fn s21_magnitudes(path: &Path) -> Vec<f64> {
    swfnet::cli::formats::read_link_table(path).unwrap().iter().map(|r| r.s21().norm()).collect()
}

#[test]
fn swapping_antennas_on_reciprocal_channel_keeps_s21() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let (a, b) = (Point::zeros(), Point::new(0.4, 0.3, 0.1));
    let ab = assemble(p, responses(p, "0,0,0", "0.4,0.3,0.1", "ab"), a, "ab.swfarch").unwrap();
    let ba = assemble(p, responses(p, "0.4,0.3,0.1", "0,0,0", "ba"), b, "ba.swfarch").unwrap();
    let (ant_a, ant_b) = (antenna(p, "a.swfcoef", 0.3, a), antenna(p, "b.swfcoef", 1.7, b));
    let run = |antenna: &PathBuf, receiver: &PathBuf, archive: &PathBuf, out: &str| {
        cmd_link(&LinkArgs {
            antenna: antenna.clone(),
            archives: vec![archive.clone()],
            receiver: Some(receiver.clone()),
            output: p.join(out),
        })
        .unwrap();
        s21_magnitudes(&p.join(out))
    };
    let fwd = run(&ant_a, &ant_b, &ab, "fwd.csv");
    let rev = run(&ant_b, &ant_a, &ba, "rev.csv");
    assert!((fwd[0] - rev[0]).abs() < 1e-6 * fwd[0], "{fwd:?} {rev:?}");
}

#[test]
fn full_catalog_run_produces_tables_and_kpi() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    for args in [
        &["synth-catalog", "--seed", "9", "--output", "cat.swfarch"][..],
        &["optimize", "--archives", "cat.swfarch", "--output-dir", "opt"],
        &["link", "--antenna", "opt/optimum.swfcoef", "--archives", "cat.swfarch", "--output", "s21.csv"],
        &["kpi", "--tables", "s21.csv", "--cells", "cells.csv", "--output", "kpi.txt"],
    ] {
        let out = swfnet(p, args);
        assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
    assert_eq!(s21_magnitudes(&p.join("s21.csv")).len(), 60);
    assert_eq!(std::fs::read_to_string(p.join("cells.csv")).unwrap().lines().count(), 21);
    assert_eq!(std::fs::read_to_string(p.join("opt/lambda.csv")).unwrap().lines().count(), 61);
    let kpi = std::fs::read_to_string(p.join("kpi.txt")).unwrap();
    assert!(kpi.lines().any(|l| l.starts_with("kpi ") && l.ends_with(')')), "{kpi}");

    let out = swfnet(p, &["kpi", "--tables", "s21.csv", "--cells", "c2.csv", "--output", "k2.txt", "--threshold-db", "-inf"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("kpi 0% (0)"));
}

#[test]
fn optimum_through_files_matches_library() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    assert!(swfnet(p, &["synth-catalog", "--anatomies", "1", "--poses", "1", "--receivers", "1", "--output", "one.swfarch"]).status.success());
    assert!(swfnet(p, &["optimize", "--archives", "one.swfarch", "--subspace", "tm", "--output-dir", "o"]).status.success());
    let ens = read_archive(&p.join("one.swfarch")).unwrap().to_ensemble(None).unwrap();
    let lib = swfnet::optimize::optimal_excitation(&ens.entries()[0].channel, swfnet::optimize::Subspace::TmOnly).unwrap();
    let file = read_coefficients(&p.join("o/optimum.swfcoef")).unwrap().vector;
    assert_eq!(file.values, lib.b_opt.values);
}

#[test]
fn calibration_report() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    std::fs::write(
        p.join("s21.csv"),
        "anatomy,pose,rx,weight,s21_re,s21_im,s21_db\nA,c,FL,0.5,0.001,0,-60\nA,c,FR,0.5,0.0001,0,-80\n",
    )
    .unwrap();
    let mut m = String::from("subject,pose,rx,rssi_db\n");
    for (i, v) in [-50.0, -52.0, -49.0, -51.0].iter().enumerate() {
        m.push_str(&format!("s{},c,FL,{v}\n", i % 2));
    }
    std::fs::write(p.join("m.csv"), &m).unwrap();
    let out = swfnet(p, &["calibrate", "--measurements", "m.csv", "--simulated", "s21.csv", "--output", "cal.csv"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(std::fs::read_to_string(p.join("cal.csv")).unwrap().lines().count(), 3);

    std::fs::write(p.join("bad.csv"), "subject,pose,rssi_db\na,c,-50\n").unwrap();
    let out = swfnet(p, &["calibrate", "--measurements", "bad.csv", "--simulated", "s21.csv", "--output", "cal2.csv"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing column `rx`"));
}
