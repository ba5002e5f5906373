use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use proptest::prelude::*;

use swfnet::cli::formats::{format_coefficients, parse_coefficients, CoefficientFile};
use swfnet::decompose::{extract_coefficients, CoefficientRole, CoefficientVector, FieldSurface};
use swfnet::ensemble::{average_cells, kpi, AveragingDomain, LinkReport, ScenarioTag};
use swfnet::modes::{expansion_fields, Medium, Point};
use swfnet::network::{link, receive_vector_from_transmit, ChannelKind, ChannelMatrix};
use swfnet::optimize::{dipole_weights, global_optimum, optimal_excitation, Subspace};
use swfnet::synth::{free_space_channel, LeakyShell};

const F: f64 = 2.45e9;

fn complex() -> impl Strategy<Value = Complex64> {
    (-1.0..1.0f64, -1.0..1.0f64).prop_map(|(re, im)| Complex64::new(re, im))
}

fn cvec(n: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec(complex(), n).prop_filter("non-zero", |v| v.iter().map(|c| c.norm_sqr()).sum::<f64>() > 1e-6)
}

fn channel(rows: usize, cols: usize) -> impl Strategy<Value = ChannelMatrix> {
    cvec(rows * cols).prop_map(move |v| ChannelMatrix::new(DMatrix::from_vec(rows, cols, v), ChannelKind::TransmissionPrime, Point::zeros(), Point::x(), F, "p").unwrap())
}

fn unit(v: &[Complex64]) -> DVector<Complex64> {
    let d = DVector::from_column_slice(v);
    let n = d.norm();
    d / Complex64::from(n)
}

fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn sphere(med: &Medium, b: &[Complex64], radius: f64) -> FieldSurface {
    FieldSurface::sphere(radius, Point::zeros(), 14, 28, F).with_fields(|p| expansion_fields(b, &[], med, p)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn decomposition_round_trips(b in cvec(16), r in 0.3..2.0f64) {
        let med = Medium::free_space(F);
        let got = extract_coefficients(&sphere(&med, &b, r * med.wavelength()), 16, &med).unwrap();
        prop_assert!(max_diff(&got.values, &b) < 1e-9);
    }

    #[test]
    fn decomposition_is_linear(b1 in cvec(6), b2 in cvec(6), alpha in complex(), beta in complex()) {
        let med = Medium::free_space(F);
        let r = med.wavelength();
        let mix: Vec<Complex64> = b1.iter().zip(&b2).map(|(x, y)| alpha * x + beta * y).collect();
        let e = |b: &[Complex64]| extract_coefficients(&sphere(&med, b, r), 6, &med).unwrap().values;
        let (e1, e2, em) = (e(&b1), e(&b2), e(&mix));
        let combined: Vec<Complex64> = e1.iter().zip(&e2).map(|(x, y)| alpha * x + beta * y).collect();
        prop_assert!(max_diff(&em, &combined) < 1e-10);
    }

    #[test]
    fn box_and_sphere_agree(b in cvec(6), hx in 0.3..0.6f64, hy in 0.3..0.6f64, hz in 0.3..0.6f64) {
        let med = Medium::free_space(F);
        let l = med.wavelength();
        let cube = FieldSurface::cuboid(Point::new(hx, hy, hz) * l, Point::zeros(), [20, 20, 20], F)
            .with_fields(|p| expansion_fields(&b, &[], &med, p)).unwrap();
        let from_box = extract_coefficients(&cube, 6, &med).unwrap();
        let from_sphere = extract_coefficients(&sphere(&med, &b, l), 6, &med).unwrap();
        prop_assert!(max_diff(&from_box.values, &from_sphere.values) < 1e-6);
    }

    #[test]
    fn link_is_linear_in_the_transmitter(m in channel(6, 6), r in cvec(6), t1 in cvec(6), t2 in cvec(6), alpha in complex()) {
        let v = |values: Vec<Complex64>, role| CoefficientVector::new(role, values, Point::zeros(), F).unwrap();
        let r = v(r, CoefficientRole::Receive);
        let mix: Vec<Complex64> = t1.iter().zip(&t2).map(|(a, b)| alpha * a + b).collect();
        let s = |t: &[Complex64]| link(&r, &m, &v(t.to_vec(), CoefficientRole::Transmit)).unwrap();
        let (s1, s2, sm) = (s(&t1), s(&t2), s(&mix));
        prop_assert!((sm - (alpha * s1 + s2)).norm() < 1e-12 * (1.0 + sm.norm()));
    }

    #[test]
    fn optimum_beats_random_excitations(m in channel(6, 16), us in prop::collection::vec(cvec(16), 32)) {
        let opt = optimal_excitation(&m, Subspace::Full).unwrap();
        let best = (&m.values * DVector::from_column_slice(&opt.b_opt.values)).norm();
        prop_assert!((best * best - opt.lambda_max).abs() < 1e-10 * opt.lambda_max);
        for u in &us {
            prop_assert!((&m.values * unit(u)).norm() <= best * (1.0 + 1e-12));
        }
    }

    #[test]
    fn restricting_the_subspace_never_helps(m in channel(6, 16)) {
        let l = |s| optimal_excitation(&m, s).unwrap().lambda_max;
        let full = l(Subspace::Full);
        prop_assert!(full >= l(Subspace::TeOnly) * (1.0 - 1e-12));
        prop_assert!(full >= l(Subspace::TmOnly) * (1.0 - 1e-12));
    }

    #[test]
    fn row_order_does_not_change_the_optimum(m in channel(6, 6), shift in 1usize..6) {
        let mut permuted = m.clone();
        for i in 0..6 {
            permuted.values.set_row(i, &m.values.row((i + shift) % 6));
        }
        let (a, b) = (optimal_excitation(&m, Subspace::Full).unwrap(), optimal_excitation(&permuted, Subspace::Full).unwrap());
        prop_assert_eq!(a.b_opt.values, b.b_opt.values);
        prop_assert_eq!(a.lambda_max.to_bits(), b.lambda_max.to_bits());
    }

    #[test]
    fn dipole_change_of_basis_is_unitary(b in cvec(16)) {
        let v = CoefficientVector::new(CoefficientRole::OutgoingEquivalent, b.clone(), Point::zeros(), F).unwrap();
        let w = dipole_weights(&v);
        let shell: f64 = b[..6].iter().map(|c| c.norm_sqr()).sum();
        prop_assert!((w.power() - shell).abs() < 1e-12);
        prop_assert!(max_diff(&w.to_shell(), &b[..6]) < 1e-14);
    }

    #[test]
    fn kpi_is_monotone_in_the_threshold(levels in prop::collection::vec(-100.0..-40.0f64, 20), lo in -100.0..-40.0f64, step in 0.0..30.0f64) {
        let samples: Vec<(ScenarioTag, f64, f64)> = levels
            .iter()
            .enumerate()
            .map(|(i, l)| (ScenarioTag::new("A", &format!("p{}", i / 4), &format!("r{}", i % 4)), 1.0, 10f64.powf(l / 20.0)))
            .collect();
        let report = LinkReport { entries: Vec::new(), cells: average_cells(&samples, AveragingDomain::Linear), threshold_db: lo, kpi_fraction: 0.0, kpi_count: 0 };
        let (f1, c1) = kpi(&report, lo);
        let (f2, c2) = kpi(&report, lo + step);
        prop_assert!(c2 >= c1 && f2 >= f1);
        prop_assert_eq!(kpi(&report, f64::NEG_INFINITY).1, 0);
    }

    #[test]
    fn single_weight_global_optimum_is_that_scenario(ms in prop::collection::vec(channel(6, 6), 3), pick in 0usize..3) {
        let optima: Vec<_> = ms.iter().map(|m| optimal_excitation(m, Subspace::Full).unwrap()).collect();
        let mut w = vec![0.0; 3];
        w[pick] = 1.0;
        let g = global_optimum(&optima, &w).unwrap();
        prop_assert!(max_diff(&g.values, &optima[pick].b_opt.values) < 1e-14);
    }

    #[test]
    fn leaky_shell_channels_are_passive(reflectance in 0.0..0.95f64, radius in 0.6..2.0f64) {
        let med = Medium::free_space(F);
        let shell = LeakyShell { radius: radius * med.wavelength(), reflectance };
        let m11 = shell.reflection(&med, 16, Point::zeros()).unwrap();
        prop_assert!(m11.is_passive(1e-12));
    }

    #[test]
    fn coefficient_files_round_trip_bitwise(b in cvec(16), x in -1e3..1e3f64, p in 1e-9..1e3f64) {
        let mut vector = CoefficientVector::new(CoefficientRole::Transmit, b, Point::new(x, -x / 3.0, 1e-17), F).unwrap();
        vector.accepted_power = Some(p);
        let file = CoefficientFile { vector, surface: None };
        prop_assert_eq!(parse_coefficients(&format_coefficients(&file), "p").unwrap(), file);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn free_space_links_are_reciprocal(ta in cvec(6), tb in cvec(6), dx in 0.8..2.0f64, dy in -1.0..1.0f64, dz in -1.0..1.0f64) {
        let med = Medium::free_space(F);
        let l = med.wavelength();
        let (pa, pb) = (Point::zeros(), Point::new(dx, dy, dz) * l);
        let t = |v: &[Complex64], o| CoefficientVector::new(CoefficientRole::Transmit, v.to_vec(), o, F).unwrap();
        let (ta, tb) = (t(&ta, pa), t(&tb, pb));
        let r = 0.25 * l;
        let ab = free_space_channel(pa, pb, 6, 6, &med, r).unwrap();
        let ba = free_space_channel(pb, pa, 6, 6, &med, r).unwrap();
        let s21 = link(&receive_vector_from_transmit(&tb), &ab, &ta).unwrap();
        let s12 = link(&receive_vector_from_transmit(&ta), &ba, &tb).unwrap();
        prop_assert!((s21.norm() - s12.norm()).abs() < 1e-6 * s21.norm());
        prop_assert!(ab.is_passive(1e-9));
    }
}
