//! Randomized invariants of the projection, transform and moment pipeline.

use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;

use slit_uncertainty::moments::{check_bounds, moment_report, sigma_x, MomentReport, SigmaP};
use slit_uncertainty::slit::{classify_admissibility, project, AdmissibilityTolerances, PreparedState};
use slit_uncertainty::spectral::{fourier_transform, tail_asymptote, MomentumGrid};
use slit_uncertainty::variational::{random_admissible, rayleigh_quotient, SineBasis};
use slit_uncertainty::wavefunction::{l2_norm, normalize, sample};
use slit_uncertainty::{PhysicalUnits32, PhysicalUnits64, Slit32, Slit64, WaveFunction64};

fn units() -> PhysicalUnits64 {
    PhysicalUnits64::default()
}

fn config() -> ProptestConfig {
    ProptestConfig {
        cases: 24,
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

fn report(prepared: &PreparedState<f64>, grid: MomentumGrid<f64>) -> MomentReport<f64> {
    let adm = classify_admissibility(prepared, AdmissibilityTolerances::default());
    let spectrum = fourier_transform(prepared, grid);
    moment_report(prepared, &adm, &spectrum).unwrap()
}

fn max_abs_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Node values of `f` on the slit grid, as a sampled wavefunction.
fn sampled_on_slit(slit: &Slit64, n: usize, f: impl Fn(f64) -> Complex64) -> WaveFunction64 {
    let xs: Vec<f64> = (0..n).map(|i| slit.left() + slit.width * i as f64 / (n - 1) as f64).collect();
    let values = xs.iter().map(|&x| f(x)).collect();
    WaveFunction64::sampled(xs, values).unwrap()
}

fn gaussian(center: f64, width: f64) -> impl Fn(f64) -> Complex64 {
    move |x| {
        let u = (x - center) / width;
        Complex64::new((-(u * u) / 4.0).exp() / (2.0 * PI * width * width).powf(0.25), 0.0)
    }
}

/// Simpson estimate of the norm of a Gaussian restricted to `[a, b]`.
fn restricted_norm(center: f64, width: f64, a: f64, b: f64) -> f64 {
    let n = 20_000;
    let h = (b - a) / n as f64;
    let f = |x: f64| gaussian(center, width)(x).norm_sqr();
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(a + i as f64 * h);
    }
    (s * h / 3.0).sqrt()
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn normalization_is_idempotent_and_scale_free(
        center in -1.0..1.0f64,
        width in 0.05..3.0f64,
        re in -5.0..5.0f64,
        im in -5.0..5.0f64,
    ) {
        let c = Complex64::new(re, im);
        prop_assume!(c.norm() > 1e-3);
        let wf = WaveFunction64::Gaussian { center, width };
        let state = sample(&wf, 1.0, (-2.0, 2.0), 513, units()).unwrap();
        let once = normalize(&state).unwrap();
        let twice = normalize(&once).unwrap();
        prop_assert!((l2_norm(&once) - 1.0).abs() < 1e-12);
        prop_assert!(max_abs_diff(&once.values, &twice.values) < 1e-12);
        let scaled = normalize(&state.scaled(c)).unwrap();
        let phase = c / c.norm();
        let expected: Vec<Complex64> = once.values.iter().map(|v| v * phase).collect();
        prop_assert!(max_abs_diff(&scaled.values, &expected) < 1e-12);
    }

    #[test]
    fn projection_is_idempotent_and_scale_free(
        center in -0.4..0.4f64,
        width in 0.1..2.0f64,
        slit_center in -3.0..3.0f64,
        slit_width in 0.2..4.0f64,
        scale in 0.01..100.0f64,
    ) {
        let slit = Slit64::new(slit_width, slit_center).unwrap();
        let n = 257;
        let g = gaussian(slit_center + center * slit_width, width * slit_width);
        let base = project(&sampled_on_slit(&slit, n, &g), slit, units(), n).unwrap();
        let scaled = project(&sampled_on_slit(&slit, n, |x| g(x) * scale), slit, units(), n).unwrap();
        prop_assert!(max_abs_diff(&base.state.values, &scaled.state.values) < 1e-12);
        let again = project(&base.state.to_wavefunction(), slit, units(), n).unwrap();
        prop_assert!(max_abs_diff(&base.state.values, &again.state.values) < 1e-12);
        prop_assert!((again.overlap_norm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn transform_is_linear(
        a_re in -2.0..2.0f64,
        a_im in -2.0..2.0f64,
        b_re in -2.0..2.0f64,
        b_im in -2.0..2.0f64,
        center in -0.4..0.4f64,
        width in 0.05..1.0f64,
        k in -30.0..30.0f64,
    ) {
        let slit = Slit64::centered(1.0).unwrap();
        let n = 513;
        let grid = MomentumGrid::new(50.0, 201).unwrap();
        let (a, b) = (Complex64::new(a_re, a_im), Complex64::new(b_re, b_im));
        let f = gaussian(center, width);
        let g = move |x: f64| Complex64::from_polar(1.0, k * x);
        let combined = |x: f64| a * f(x) + b * g(x);
        let pf = project(&sampled_on_slit(&slit, n, &f), slit, units(), n).unwrap();
        let pg = project(&sampled_on_slit(&slit, n, g), slit, units(), n).unwrap();
        let pc = project(&sampled_on_slit(&slit, n, combined), slit, units(), n).unwrap();
        prop_assume!(pc.overlap_norm > 1e-3);
        let sf = fourier_transform(&pf, grid);
        let sg = fourier_transform(&pg, grid);
        let sc = fourier_transform(&pc, grid);
        let expected: Vec<Complex64> = sf
            .amplitudes
            .iter()
            .zip(&sg.amplitudes)
            .map(|(x, y)| (a * pf.overlap_norm * x + b * pg.overlap_norm * y) / pc.overlap_norm)
            .collect();
        prop_assert!(max_abs_diff(&sc.amplitudes, &expected) < 1e-10);
    }

    #[test]
    fn rayleigh_quotient_never_undercuts_the_floor(coefficients in prop::collection::vec(-1.0..1.0f64, 1..=8)) {
        let norm: f64 = coefficients.iter().map(|c| c * c).sum();
        prop_assume!(norm > 1e-6);
        let basis = SineBasis::new(8, Slit64::centered(1.0).unwrap()).unwrap();
        let r = rayleigh_quotient(&coefficients, &basis, units()).unwrap();
        prop_assert!(r >= PI * PI * (1.0 - 1e-12));
        let off_ground: f64 = coefficients[1..].iter().map(|c| c * c).sum::<f64>() / norm;
        if off_ground > 1e-6 {
            prop_assert!(r > PI * PI * (1.0 + 1e-7));
        }
    }

    #[test]
    fn moments_are_translation_invariant(offset in -0.05..0.05f64, width in 0.03..0.04f64, shift in -10.0..10.0f64) {
        let grid = MomentumGrid::new(200.0, 4001).unwrap();
        let here = Slit64::centered(1.0).unwrap();
        let there = Slit64::new(1.0, shift).unwrap();
        let a = report(
            &project(&WaveFunction64::Gaussian { center: offset, width }, here, units(), 1025).unwrap(),
            grid,
        );
        let b = report(
            &project(&WaveFunction64::Gaussian { center: shift + offset, width }, there, units(), 1025).unwrap(),
            grid,
        );
        prop_assert!((b.mean_x - a.mean_x - shift).abs() < 1e-9);
        prop_assert!((b.sigma_x - a.sigma_x).abs() < 1e-9);
        prop_assert!((b.mean_p - a.mean_p).abs() < 1e-9);
        let (sa, sb) = (a.sigma_p.value().unwrap(), b.sigma_p.value().unwrap());
        prop_assert!((sa - sb).abs() <= 1e-9 * sa);
    }

    #[test]
    fn boosts_shift_the_mean_momentum_only(k in -10.0..10.0f64) {
        let grid = MomentumGrid::new(200.0, 8001).unwrap();
        let slit = Slit64::centered(1.0).unwrap();
        let base = project(&WaveFunction64::CosineHump, slit, units(), 2049).unwrap();
        let boosted = base.boosted(k).unwrap();
        let a = report(&base, grid);
        let b = report(&boosted, grid);
        prop_assert!((b.mean_p - a.mean_p - k).abs() <= 1e-6 * (1.0 + k.abs()));
        prop_assert!((b.sigma_x - a.sigma_x).abs() < 1e-12);
        let (sa, sb) = (a.sigma_p.value().unwrap(), b.sigma_p.value().unwrap());
        prop_assert!((sa - sb).abs() <= 1e-6 * sa);
    }

    #[test]
    fn finiteness_tracks_the_edge_values(center in -0.5..0.5f64, width in 0.03..3.0f64) {
        let slit = Slit64::centered(1.0).unwrap();
        let norm = restricted_norm(center, width, -0.5, 0.5);
        let g = gaussian(center, width);
        let edge = g(-0.5).norm().max(g(0.5).norm()) / norm;
        // stay away from the decision threshold
        prop_assume!(!(1e-9..=1e-7).contains(&edge));
        let prepared = project(&WaveFunction64::Gaussian { center, width }, slit, units(), 2049).unwrap();
        let r = report(&prepared, MomentumGrid::new(200.0, 4001).unwrap());
        prop_assert_eq!(r.sigma_p.is_finite(), edge < 1e-9);
        prop_assert!(r.sigma_x <= 0.5);
    }

    #[test]
    fn generated_states_respect_both_bounds(seed in any::<u64>(), decay in 0.75..3.0f64) {
        let slit = Slit64::centered(1.0).unwrap();
        let basis = SineBasis::with_points(16, slit, 1025).unwrap();
        let prepared = random_admissible(seed, &basis, decay, units()).unwrap();
        let adm = classify_admissibility(&prepared, AdmissibilityTolerances::default());
        prop_assert!(adm.admissible);
        let r = report(&prepared, MomentumGrid::new(200.0, 2001).unwrap());
        let bounds = check_bounds(&r, &slit);
        prop_assert!(bounds.kennard_ok && bounds.slit_ok);
        prop_assert!(r.sigma_x <= 0.5);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 8, ..config() })]

    #[test]
    fn tail_level_follows_the_edge_densities(center in -0.5..0.5f64, width in 0.3..3.0f64) {
        let slit = Slit64::centered(1.0).unwrap();
        let prepared = project(&WaveFunction64::Gaussian { center, width }, slit, units(), 2049).unwrap();
        let spectrum = fourier_transform(&prepared, MomentumGrid::new(200.0, 8001).unwrap());
        let tail = tail_asymptote(&spectrum, (30.0, 180.0)).unwrap();
        let norm = restricted_norm(center, width, -0.5, 0.5);
        let g = gaussian(center, width);
        let edges = (g(-0.5).norm_sqr() + g(0.5).norm_sqr()) / (norm * norm);
        let predicted = edges / (2.0 * PI);
        prop_assert!((tail.mean_level / predicted - 1.0).abs() < 0.05);
        prop_assert!((tail.period / (2.0 * PI) - 1.0).abs() < 0.01);
    }
}

#[test]
fn kinked_states_that_vanish_at_the_edges_are_finite() {
    let slit = Slit64::centered(1.0).unwrap();
    let tent = sampled_on_slit(&slit, 1025, |x| Complex64::new(0.5 - x.abs(), 0.0));
    let prepared = project(&tent, slit, units(), 1025).unwrap();
    let adm = classify_admissibility(&prepared, AdmissibilityTolerances::default());
    assert!(adm.admissible);
    let r = report(&prepared, MomentumGrid::new(200.0, 16001).unwrap());
    // the tent has ||phi'||^2 = 12 / dx^2; the kink costs the stencil some accuracy
    let sigma_p = r.sigma_p.value().unwrap();
    assert!((sigma_p - 12f64.sqrt()).abs() < 1e-3, "{sigma_p}");
    assert!(sigma_p > PI);
}

#[test]
fn divergent_states_report_a_tail_model() {
    let slit = Slit64::centered(1.0).unwrap();
    let prepared = project(&WaveFunction64::PlaneWave { k: 0.3 }, slit, units(), 2049).unwrap();
    let r = report(&prepared, MomentumGrid::default_for(&slit, &units()));
    let SigmaP::Divergent { tail } = r.sigma_p else { panic!("plane wave must diverge") };
    assert!((tail.period / (2.0 * PI) - 1.0).abs() < 1e-3);
    assert!((tail.mean_level * PI - 1.0).abs() < 0.02);
    assert!(sigma_x(&prepared).1 <= 0.5);
}

#[test]
fn single_precision_reproduces_the_equality_case() {
    let slit = Slit32::centered(1.0).unwrap();
    let units = PhysicalUnits32::default();
    let prepared = project(&slit_uncertainty::wavefunction::WaveFunction::CosineHump, slit, units, 513).unwrap();
    let adm = classify_admissibility(&prepared, AdmissibilityTolerances { boundary: 1e-4, growth: 1.05 });
    assert!(adm.admissible);
    let spectrum = fourier_transform(&prepared, MomentumGrid::new(100.0f32, 2001).unwrap());
    let r = moment_report(&prepared, &adm, &spectrum).unwrap();
    let sigma_p = r.sigma_p.value().unwrap();
    assert!((sigma_p - std::f32::consts::PI).abs() < 1e-3, "{sigma_p}");
    assert!(r.sigma_x <= 0.5);
}
