//! Closed-form bright-light and single-photon results, and a comparison of
//! the bright-light approximations against exact truncated-Fock moments.
//!
//! The bright-light formulas hold for `n_bar >> sinh q` and drop terms that
//! are O(1) next to O(n_bar). [`compare_exact`] measures what is dropped.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gops::{g_stats, GStats};
use crate::interference::variance_decomposition;
use crate::par::{try_map_indexed, Execution};
use crate::states::{build, StateSpec, DEFAULT_LEAKAGE_TOL};

/// `n_bar / sinh q` at or above which a comparison is tagged in-regime.
pub const REGIME_RATIO_MIN: f64 = 50.0;
/// Phases at which exact and approximate fringe variances are compared.
pub const COMPARISON_PHASES: [f64; 5] = [0.0, FRAC_PI_2, -FRAC_PI_2, PI, -PI];

/// The two squeeze angles with closed forms: amplitude (`0`) and phase (`pi`) squeezing.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SqueezeAngle {
    Zero,
    Pi,
}

impl SqueezeAngle {
    pub fn from_radians(theta: f64) -> Result<Self> {
        if theta == 0.0 {
            Ok(SqueezeAngle::Zero)
        } else if (theta - PI).abs() <= 1e-12 {
            Ok(SqueezeAngle::Pi)
        } else {
            Err(Error::UnsupportedTheta(theta))
        }
    }

    pub fn radians(self) -> f64 {
        match self {
            SqueezeAngle::Zero => 0.0,
            SqueezeAngle::Pi => PI,
        }
    }

    /// `+1` for amplitude squeezing, `-1` for phase squeezing.
    fn sign(self) -> f64 {
        match self {
            SqueezeAngle::Zero => 1.0,
            SqueezeAngle::Pi => -1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegimeParams {
    /// Total mean photon number, `2 alpha^2` for the symmetric bright state.
    pub n_bar: f64,
    pub q: f64,
    pub theta: SqueezeAngle,
    pub k_abs: f64,
}

impl RegimeParams {
    pub fn new(n_bar: f64, q: f64, theta: SqueezeAngle, k_abs: f64) -> Result<Self> {
        if !(n_bar > 0.0 && n_bar.is_finite()) {
            return Err(Error::NonPositivePhotonNumber(n_bar));
        }
        if !(q >= 0.0 && q.is_finite()) {
            return Err(Error::OutOfRange(format!("squeeze parameter q = {q}")));
        }
        if !(k_abs > 0.0 && k_abs.is_finite()) {
            return Err(Error::OutOfRange(format!("|K| = {k_abs}")));
        }
        Ok(RegimeParams { n_bar, q, theta, k_abs })
    }

    /// `n_bar / sinh q`; infinite for `q = 0`.
    pub fn regime_ratio(&self) -> f64 {
        if self.q == 0.0 {
            f64::INFINITY
        } else {
            self.n_bar / self.q.sinh()
        }
    }

    pub fn in_regime(&self) -> bool {
        self.regime_ratio() >= REGIME_RATIO_MIN
    }

    /// Per-mode real displacement of the symmetric bright state.
    pub fn alpha(&self) -> f64 {
        (self.n_bar / 2.0).sqrt()
    }

    fn with_n_bar(self, n_bar: f64) -> Self {
        RegimeParams { n_bar, ..self }
    }
}

/// `(Delta G0, Delta G1, Delta G2, Delta G3)`: `sqrt(n_bar) e^{-q}` on the
/// first three and `sqrt(n_bar) e^{q}` on G3 for `theta = 0`; exponents
/// swapped for `theta = pi`.
pub fn analytic_g_std(params: &RegimeParams) -> [f64; 4] {
    let root = params.n_bar.sqrt();
    let s = params.theta.sign();
    let most = root * (-s * params.q).exp();
    let g3 = root * (s * params.q).exp();
    [most, most, most, g3]
}

/// `|K|^2 n_bar (1 + cos phi)`.
pub fn analytic_mean_intensity(params: &RegimeParams, phi: f64) -> f64 {
    params.k_abs.powi(2) * params.n_bar * (1.0 + phi.cos())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum VarianceCase {
    Coherent,
    Theta0,
    ThetaPi,
}

impl From<SqueezeAngle> for VarianceCase {
    fn from(a: SqueezeAngle) -> Self {
        match a {
            SqueezeAngle::Zero => VarianceCase::Theta0,
            SqueezeAngle::Pi => VarianceCase::ThetaPi,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalyticVariance {
    pub value: f64,
    /// The approximation went negative and was clamped to zero; the
    /// parameters are outside its validity regime.
    pub clamped: bool,
}

/// Approximate fringe variance.
///
/// coherent: `2 |K|^2 I(phi)`; theta0: `coherent e^{-2q} + 2|K|^4 n_bar sinh(2q) sin^2 phi`;
/// thetaPi: `coherent e^{2q} - 2|K|^4 n_bar sinh(2q) sin^2 phi`. The coherent
/// case ignores `q`.
pub fn analytic_intensity_variance(params: &RegimeParams, phi: f64, case: VarianceCase) -> AnalyticVariance {
    let coherent = 2.0 * params.k_abs.powi(2) * analytic_mean_intensity(params, phi);
    let spread = 2.0 * params.k_abs.powi(4) * params.n_bar * (2.0 * params.q).sinh() * phi.sin().powi(2);
    let raw = match case {
        VarianceCase::Coherent => coherent,
        VarianceCase::Theta0 => coherent * (-2.0 * params.q).exp() + spread,
        VarianceCase::ThetaPi => coherent * (2.0 * params.q).exp() - spread,
    };
    let rounding = 1e-12 * 2.0 * params.k_abs.powi(4) * params.n_bar;
    if raw < -rounding {
        AnalyticVariance { value: 0.0, clamped: true }
    } else if raw < 0.0 {
        AnalyticVariance { value: 0.0, clamped: false }
    } else {
        AnalyticVariance { value: raw, clamped: false }
    }
}

/// Fringe standard deviation of `c1|1,0> + c2|0,1>` for the two closed-form
/// cases: balanced (`|K|^2 |sin phi|`) and one-sided (`|K|^2`).
pub fn analytic_single_photon_std(c1: C64, c2: C64, k_abs: f64, phi: f64) -> Result<f64> {
    let (p1, p2) = (c1.norm_sqr(), c2.norm_sqr());
    if (p1 + p2 - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidSpec(format!("|c1|^2 + |c2|^2 = {}", p1 + p2)));
    }
    let k2 = k_abs * k_abs;
    if (p1 - p2).abs() <= 1e-12 {
        // relative phase of the amplitudes shifts the fringe
        let phase = (c1 * c2.conj()).arg();
        Ok(k2 * (phi - phase).sin().abs())
    } else if p1 <= 1e-12 || p2 <= 1e-12 {
        Ok(k2)
    } else {
        Err(Error::UnsupportedAmplitudes)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompareOptions {
    /// Explicit per-mode cutoffs; automatic when absent.
    pub cutoff: Option<(usize, usize)>,
    pub leakage_tol: f64,
    pub exec: ExecChoice,
}

/// Serializable mirror of [`Execution`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExecChoice {
    Sequential,
    #[default]
    Parallel,
}

impl From<ExecChoice> for Execution {
    fn from(e: ExecChoice) -> Self {
        match e {
            ExecChoice::Sequential => Execution::Sequential,
            ExecChoice::Parallel => Execution::Parallel,
        }
    }
}

impl Default for CompareOptions {
    fn default() -> Self {
        CompareOptions { cutoff: None, leakage_tol: DEFAULT_LEAKAGE_TOL, exec: ExecChoice::Parallel }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseComparison {
    pub phi: f64,
    pub exact_variance: f64,
    pub analytic_variance: f64,
    pub clamped: bool,
    /// `|exact - analytic| / analytic`; absent when the approximation is exactly zero.
    pub rel_dev: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub params: RegimeParams,
    pub cutoff: (usize, usize),
    pub leakage: f64,
    /// `<G0>` of the truncated state; all analytic values use it as `n_bar`.
    pub n_bar_exact: f64,
    pub regime_ratio: f64,
    pub in_regime: bool,
    pub exact_std: [f64; 4],
    pub analytic_std: [f64; 4],
    pub rel_dev_std: [f64; 4],
    pub phases: Vec<PhaseComparison>,
    pub stats: GStats,
}

impl ComparisonReport {
    pub fn max_rel_dev_std(&self) -> f64 {
        self.rel_dev_std.iter().copied().fold(0.0, f64::max)
    }
}

fn rel_dev(exact: f64, approx: f64) -> Option<f64> {
    (approx != 0.0).then(|| (exact - approx).abs() / approx.abs())
}

/// Build the bright displaced-squeezed state exactly and compare its G
/// fluctuations and fringe variances with the closed forms.
pub fn compare_exact(params: &RegimeParams, opts: &CompareOptions) -> Result<ComparisonReport> {
    if params.n_bar > 100.0 || params.q > 0.6 {
        return Err(Error::OutOfRange(format!(
            "exact comparison supports n_bar <= 100 and q <= 0.6 (got {}, {})",
            params.n_bar, params.q
        )));
    }
    let mut spec = StateSpec::displaced_squeezed(C64::new(params.alpha(), 0.0), params.q, params.theta.radians())
        .with_leakage_tol(opts.leakage_tol);
    spec.cutoff = opts.cutoff;
    let state = build(&spec)?;
    let stats = g_stats(&state)?;

    let n_bar_exact = stats.mean[0];
    let at_exact = params.with_n_bar(n_bar_exact);
    let analytic_std = analytic_g_std(&at_exact);
    let rel_dev_std = [0, 1, 2, 3].map(|j| (stats.std[j] - analytic_std[j]).abs() / analytic_std[j]);

    let case = if params.q == 0.0 { VarianceCase::Coherent } else { params.theta.into() };
    let phases = try_map_indexed(opts.exec.into(), COMPARISON_PHASES.len(), |i| {
        let phi = COMPARISON_PHASES[i];
        let exact = variance_decomposition(&state, params.k_abs, phi, &stats)?;
        let approx = analytic_intensity_variance(&at_exact, phi, case);
        Ok::<_, Error>(PhaseComparison {
            phi,
            exact_variance: exact,
            analytic_variance: approx.value,
            clamped: approx.clamped,
            rel_dev: rel_dev(exact, approx.value),
        })
    })?;

    Ok(ComparisonReport {
        params: *params,
        cutoff: state.space().cutoffs(),
        leakage: state.leakage(),
        n_bar_exact,
        regime_ratio: at_exact.regime_ratio(),
        in_regime: at_exact.in_regime(),
        exact_std: stats.std,
        analytic_std,
        rel_dev_std,
        phases,
        stats,
    })
}
