//! Acceptance suite: one line per criterion, non-zero exit if any fails.
//!
//! Run with `cargo test --test acceptance`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_complex::Complex64 as C64;

use gspace::analytic::{
    analytic_g_std, analytic_intensity_variance, compare_exact, CompareOptions, ExecChoice, RegimeParams, SqueezeAngle,
    VarianceCase,
};
use gspace::cli::{self, Command, FigureName, RunConfig};
use gspace::fock::{dense, exp_action, variance, FockSpace, Mode, QOperator, QState, Quadrature};
use gspace::gops::{check_commutators, g_stats, squeeze_report, GStats};
use gspace::interference::{decomposed_variance, fringe_scan, intensity_operator, FringeConfig};
use gspace::par::Execution;
use gspace::sampling::{random_anti_hermitian, random_state, uncertainty_sweep};
use gspace::states::{build, coherent_series, single_mode_displaced_squeezed, StateSpec};

type Outcome = Result<String, String>;

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn stats_of(spec: &StateSpec) -> Result<(QState, GStats), String> {
    let s = build(spec).map_err(|e| e.to_string())?;
    let st = g_stats(&s).map_err(|e| e.to_string())?;
    Ok((s, st))
}

fn c1_coherent_reference() -> Outcome {
    let (_, st) = stats_of(&StateSpec::coherent(re(1.0), re(1.0)).with_cutoff(20, 20))?;
    let dev = st.std.iter().map(|s| (s - 2f64.sqrt()).abs()).fold(0.0, f64::max);
    ensure(dev <= 1e-9, || format!("max |dG_j - sqrt 2| = {dev:e}"))?;
    let sq = squeeze_report(&st).map_err(|e| e.to_string())?;
    ensure(!sq.squeezed.iter().any(|&b| b), || format!("flags {:?}", sq.squeezed))?;
    Ok(format!("max |dG_j - sqrt 2| = {dev:.1e}, nothing squeezed"))
}

fn c2_commutators() -> Outcome {
    let r = check_commutators(FockSpace::new(8, 8).unwrap()).map_err(|e| e.to_string())?;
    ensure(r.max_residual <= 1e-12, || format!("max residual {:e}", r.max_residual))?;
    Ok(format!("6 identities, max interior residual {:.1e}", r.max_residual))
}

fn c3_uncertainty_theorems() -> Outcome {
    let s =
        uncertainty_sweep(FockSpace::new(6, 6).unwrap(), 42, 1000, Execution::Parallel).map_err(|e| e.to_string())?;
    ensure(s.min_slack >= -1e-9, || format!("min slack {:e}", s.min_slack))?;
    ensure(s.max_vd_sum <= 1.0 + 1e-9, || format!("max V^2+D^2 = {}", s.max_vd_sum))?;
    ensure(s.max_radius_excess <= 1e-9, || format!("max |G|-G0 = {}", s.max_radius_excess))?;
    Ok(format!(
        "1000 states: min slack {:.3}, max V^2+D^2 {:.3}, max |G|-G0 {:.3}",
        s.min_slack, s.max_vd_sum, s.max_radius_excess
    ))
}

fn c4_balanced_single_photon() -> Outcome {
    let h = re(FRAC_1_SQRT_2);
    let (state, st) = stats_of(&StateSpec::single_photon(h, h).with_cutoff(2, 2))?;
    let dm = max_abs_diff(&st.mean, &[1.0, 0.0, 1.0, 0.0]);
    let ds = max_abs_diff(&st.std, &[0.0, 1.0, 0.0, 1.0]);
    ensure(dm <= 1e-12 && ds <= 1e-12, || format!("mean dev {dm:e}, std dev {ds:e}"))?;

    let cfg = FringeConfig::default();
    let pts = fringe_scan(&state, &cfg).map_err(|e| e.to_string())?;
    let dev = pts.iter().map(|p| (p.std_exact - p.phi.sin().abs()).abs()).fold(0.0, f64::max);
    ensure(pts.len() == 256 && dev <= 1e-10, || format!("max |std - |sin phi|| = {dev:e}"))?;

    // zero-reachable points must sit on intensity extrema (phi = k pi), to grid resolution
    let step = (cfg.phi_max - cfg.phi_min) / (cfg.n_points - 1) as f64;
    let reachable: Vec<f64> = pts.iter().filter(|p| p.zero_reachable).map(|p| p.phi).collect();
    let off: Vec<f64> = reachable.iter().copied().filter(|phi| (phi - (phi / PI).round() * PI).abs() > step).collect();
    ensure(!reachable.is_empty() && off.is_empty(), || {
        format!(
            "mean/std exact, std = |sin phi| to {dev:.1e}, but {} of {} zero-reachable points lie away from the extrema (e.g. phi = {:.4})",
            off.len(),
            reachable.len(),
            off.first().copied().unwrap_or(f64::NAN)
        )
    })?;
    Ok(format!("means/stds exact, std = |sin phi| to {dev:.1e}, zero-reachable only at extrema"))
}

fn c5_one_sided_single_photon() -> Outcome {
    let (state, st) = stats_of(&StateSpec::single_photon(re(1.0), re(0.0)))?;
    let dm = max_abs_diff(&st.mean, &[1.0, 1.0, 0.0, 0.0]);
    let ds = max_abs_diff(&st.std, &[0.0, 0.0, 1.0, 1.0]);
    ensure(dm <= 1e-12 && ds <= 1e-12, || format!("mean dev {dm:e}, std dev {ds:e}"))?;
    let pts = fringe_scan(&state, &FringeConfig::default()).map_err(|e| e.to_string())?;
    let dev = pts.iter().map(|p| (p.mean_intensity - 1.0).abs().max((p.std_exact - 1.0).abs())).fold(0.0, f64::max);
    ensure(pts.len() == 256 && dev <= 1e-12, || format!("profile deviates by {dev:e}"))?;
    Ok(format!("means/stds exact, I = dI = 1 at 256 points to {dev:.1e}"))
}

fn c6_coherent_fringe_variance() -> Outcome {
    let (state, _) = stats_of(&StateSpec::coherent(re(1.0), re(1.0)))?;
    let pts = fringe_scan(&state, &FringeConfig::default()).map_err(|e| e.to_string())?;
    let dev = pts.iter().map(|p| (p.std_exact.powi(2) - 2.0 * p.mean_intensity).abs()).fold(0.0, f64::max);
    ensure(dev <= 1e-8, || format!("max |std^2 - 2 mean| = {dev:e}"))?;
    Ok(format!("max |std^2 - 2 mean| = {dev:.1e} over 256 points"))
}

/// Cutoff 47 truncates roughly 5e-6 of the theta = pi state per mode, so
/// the construction tolerance is widened to admit it.
const BRIGHT_LEAKAGE_TOL: f64 = 1e-5;

fn bright_spec(theta: f64) -> StateSpec {
    StateSpec::displaced_squeezed(re(4.0), 0.3, theta).with_cutoff(47, 47).with_leakage_tol(BRIGHT_LEAKAGE_TOL)
}

fn c7_bright_squeezed() -> Outcome {
    let mut parts = Vec::new();
    for (angle, squeezed_g) in [(SqueezeAngle::Zero, 2), (SqueezeAngle::Pi, 3)] {
        let (state, st) = stats_of(&bright_spec(angle.radians()))?;
        let p = RegimeParams::new(st.mean[0], 0.3, angle, 1.0).map_err(|e| e.to_string())?;
        let want = analytic_g_std(&p);
        let d2 = (st.std[2] - want[2]).abs() / want[2];
        let d3 = (st.std[3] - want[3]).abs() / want[3];
        ensure(d2 <= 0.05 && d3 <= 0.05, || format!("{angle:?}: rel dev dG2 {d2:.4}, dG3 {d3:.4}"))?;
        let sq = squeeze_report(&st).map_err(|e| e.to_string())?;
        let other = 5 - squeezed_g;
        ensure(sq.squeezed[squeezed_g] && !sq.squeezed[other], || format!("{angle:?}: flags {:?}", sq.squeezed))?;
        parts.push(format!("{angle:?}: dG2 {d2:.1e}, dG3 {d3:.1e}, leak {:.1e}", state.leakage()));
    }
    Ok(parts.join("; "))
}

fn c8_fringe_approximations() -> Outcome {
    // algebraic identity of the closed forms
    let mut worst: f64 = 0.0;
    for q in [0.05, 0.3, 0.8, 1.5] {
        let p = RegimeParams::new(32.0, q, SqueezeAngle::Zero, 1.3).unwrap();
        for k in 0..64 {
            let phi = -PI + 2.0 * PI * k as f64 / 63.0;
            let v = |c| analytic_intensity_variance(&p, phi, c).value;
            let sum = v(VarianceCase::Theta0) + v(VarianceCase::ThetaPi);
            let rhs = 2.0 * (2.0 * q).cosh() * v(VarianceCase::Coherent);
            worst = worst.max((sum - rhs).abs() / sum.abs().max(1.0));
        }
    }
    ensure(worst <= 1e-12, || format!("theta0 + thetaPi identity off by {worst:e}"))?;

    let opts = CompareOptions { cutoff: Some((47, 47)), leakage_tol: BRIGHT_LEAKAGE_TOL, exec: ExecChoice::Parallel };
    let mut failures = Vec::new();
    let mut parts = Vec::new();
    for angle in [SqueezeAngle::Zero, SqueezeAngle::Pi] {
        let r = compare_exact(&RegimeParams::new(32.0, 0.3, angle, 1.0).unwrap(), &opts).map_err(|e| e.to_string())?;
        ensure(r.in_regime, || format!("{angle:?}: not tagged in-regime (ratio {})", r.regime_ratio))?;
        for ph in &r.phases {
            let dev = ph.rel_dev.unwrap_or(f64::INFINITY);
            if !(dev <= 0.10) {
                failures.push(format!(
                    "{angle:?} phi={:.4}: exact {:.4} vs analytic {:.3e}",
                    ph.phi, ph.exact_variance, ph.analytic_variance
                ));
            }
        }
        let ok: Vec<String> = r
            .phases
            .iter()
            .filter_map(|p| p.rel_dev.filter(|d| *d <= 0.10).map(|d| format!("{:.2}:{d:.1e}", p.phi)))
            .collect();
        parts.push(format!("{angle:?} within 10% at [{}]", ok.join(" ")));
    }
    ensure(failures.is_empty(), || format!("{}; outside 10%: {}", parts.join("; "), failures.join("; ")))?;
    Ok(format!("identity to {worst:.1e}; {}", parts.join("; ")))
}

fn c9_decomposition_equivalence() -> Outcome {
    let space = FockSpace::new(5, 5).unwrap();
    let phases: Vec<f64> = (0..16).map(|k| -PI + 2.0 * PI * k as f64 / 16.0).collect();
    let ops: Vec<QOperator> = phases.iter().map(|&phi| intensity_operator(space, 1.0, phi).unwrap()).collect();
    let mut worst: f64 = 0.0;
    for i in 0..100 {
        let s = random_state(space, 9, i);
        let st = g_stats(&s).map_err(|e| e.to_string())?;
        for (op, &phi) in ops.iter().zip(&phases) {
            let direct = variance(&s, op).map_err(|e| e.to_string())?;
            worst = worst.max((direct - decomposed_variance(&st, 1.0, phi)).abs());
        }
    }
    ensure(worst <= 1e-8, || format!("max |direct - decomposed| = {worst:e}"))?;
    Ok(format!("1600 cases, max |direct - decomposed| = {worst:.1e}"))
}

fn c10_construction_oracles() -> Outcome {
    // coherent: exp_action of the displacement generator vs the series
    let padded = 90;
    let space = FockSpace::new(padded, 1).unwrap();
    let a = QOperator::annihilation(space, Mode::One);
    let ad = a.adjoint();
    let mut coh: f64 = 0.0;
    for alpha in [re(0.5), C64::new(1.0, 1.0), C64::new(0.0, 2.5), re(-3.0), re(4.0), C64::new(2.8, -2.8)] {
        let gen = ad.lin_comb(alpha, &a, -alpha.conj()).unwrap();
        let s = exp_action(&gen, &QState::vacuum(space)).map_err(|e| e.to_string())?;
        let (series, _) = coherent_series(alpha, 40).unwrap();
        let dev = (0..=40).map(|n| (s.amplitude(n, 0) - series[n]).norm()).fold(0.0, f64::max);
        coh = coh.max(dev);
    }
    ensure(coh <= 1e-9, || format!("coherent amplitudes off by {coh:e}"))?;

    let q: f64 = 0.3;
    let (amps, _) = single_mode_displaced_squeezed(re(0.0), q, 0.0, 40).map_err(|e| e.to_string())?;
    let odd = amps.iter().skip(1).step_by(2).map(|z| z.norm()).fold(0.0, f64::max);
    let norm: f64 = amps.iter().map(|z| z.norm_sqr()).sum();
    let n_mean: f64 = amps.iter().enumerate().map(|(n, z)| n as f64 * z.norm_sqr()).sum::<f64>() / norm;
    let dn = (n_mean - q.sinh().powi(2)).abs();
    ensure(odd <= 1e-10 && dn <= 1e-9, || format!("odd amplitudes {odd:e}, <n> off by {dn:e}"))?;

    let small = FockSpace::new(3, 3).unwrap();
    let mut dense_dev: f64 = 0.0;
    for i in 0..20 {
        let g = random_anti_hermitian(small, 11, i, 2.0);
        let psi = random_state(small, 12, i);
        let got = exp_action(&g, &psi).map_err(|e| e.to_string())?;
        let want = dense::expm_apply(&dense::to_dense(g.matrix()), psi.amplitudes());
        let dev = got.amplitudes().iter().zip(&want).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        dense_dev = dense_dev.max(dev);
    }
    ensure(dense_dev <= 1e-10, || format!("exp_action vs dense off by {dense_dev:e}"))?;
    Ok(format!("coherent {coh:.1e}; squeezed odd {odd:.1e}, <n> {dn:.1e}; dense {dense_dev:.1e}"))
}

fn c11_quadrature_squeezing() -> Outcome {
    let q: f64 = 0.3;
    let state = build(&StateSpec::displaced_squeezed(re(2.0), q, 0.0)).map_err(|e| e.to_string())?;
    let space = state.space();
    let mut worst: f64 = 0.0;
    for mode in [Mode::One, Mode::Two] {
        let dx = variance(&state, &QOperator::quadrature(space, mode, Quadrature::X)).unwrap().sqrt();
        let dy = variance(&state, &QOperator::quadrature(space, mode, Quadrature::Y)).unwrap().sqrt();
        worst = worst.max((dx - (-q).exp() / 2.0).abs()).max((dy - q.exp() / 2.0).abs());
    }
    ensure(worst <= 1e-6, || format!("quadrature stds off by {worst:e}"))?;
    Ok(format!("both modes, max deviation {worst:.1e}"))
}

fn c12_cli() -> Outcome {
    let golden = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    for name in [FigureName::Fig5, FigureName::Fig6] {
        let mut cfg = RunConfig::new(Command::Figure(name));
        cfg.out = Some(dir.path().to_path_buf());
        ensure(cli::run(&cfg) == 0, || format!("{name:?} exited non-zero"))?;
    }
    for file in ["fig5.csv", "fig6.csv", "fig5_gstats.json", "fig6_gstats.json"] {
        let got = std::fs::read(dir.path().join(file)).map_err(|e| e.to_string())?;
        let want = std::fs::read(golden.join(file)).map_err(|e| e.to_string())?;
        ensure(got == want, || format!("{file} differs from golden"))?;
    }
    let mut check = RunConfig::new(Command::Check);
    check.seed = 42;
    check.out = Some(dir.path().join("check.json"));
    let code = cli::run(&check);
    ensure(code == 0, || format!("check --seed 42 exited {code}"))?;
    Ok("fig5/fig6 byte-identical to golden; check --seed 42 exits 0".into())
}

fn main() -> ExitCode {
    let criteria: [(u32, &str, fn() -> Outcome, u64); 12] = [
        (1, "coherent reference", c1_coherent_reference, 1),
        (2, "commutators", c2_commutators, 2),
        (3, "uncertainty relations on random states", c3_uncertainty_theorems, 20),
        (4, "balanced single photon", c4_balanced_single_photon, 1),
        (5, "one-sided single photon", c5_one_sided_single_photon, 1),
        (6, "coherent fringe variance", c6_coherent_fringe_variance, 2),
        (7, "bright squeezed G fluctuations", c7_bright_squeezed, 30),
        (8, "fringe-variance approximations", c8_fringe_approximations, 30),
        (9, "variance decomposition", c9_decomposition_equivalence, 20),
        (10, "construction oracles", c10_construction_oracles, 5),
        (11, "quadrature squeezing", c11_quadrature_squeezing, 5),
        (12, "cli determinism and format", c12_cli, 30),
    ];
    let mut failed = 0;
    for (n, name, f, budget) in criteria {
        let t = Instant::now();
        let mut result = f();
        let dt = t.elapsed();
        if result.is_ok() && dt > Duration::from_secs(budget) {
            result = Err(format!("took {:.2}s, budget {budget}s", dt.as_secs_f64()));
        }
        match result {
            Ok(detail) => println!("[PASS] criterion {n}: {name}: {detail} ({:.2}s)", dt.as_secs_f64()),
            Err(detail) => {
                failed += 1;
                println!("[FAIL] criterion {n}: {name}: {detail} ({:.2}s)", dt.as_secs_f64());
            }
        }
    }
    println!("{} passed, {failed} failed", 12 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
