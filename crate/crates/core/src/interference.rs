//! Double-slit intensity at the observation screen.
//!
//! The intensity operator is `I = |K|^2 [G0 + G2 cos(phi) - G3 sin(phi)]` with
//! `phi = k * (r2 - r1)`. Only `|K|` enters, so the field constant is stored
//! as a magnitude.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{clamp_variance, expectation, variance, FockSpace, QOperator, QState};
use crate::gops::{g_stats, GOperators, GStats};
use crate::par::{try_map_indexed, Execution};

/// Agreement required between the covariance decomposition and direct moments.
pub const DECOMPOSITION_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FringeConfig {
    pub k_abs: f64,
    pub phi_min: f64,
    pub phi_max: f64,
    pub n_points: usize,
}

impl Default for FringeConfig {
    /// 256 points over one and a half periods, `[-3pi/2, 3pi/2]`.
    fn default() -> Self {
        FringeConfig { k_abs: 1.0, phi_min: -1.5 * PI, phi_max: 1.5 * PI, n_points: 256 }
    }
}

impl FringeConfig {
    pub fn new(k_abs: f64, phi_min: f64, phi_max: f64, n_points: usize) -> Result<Self> {
        let cfg = FringeConfig { k_abs, phi_min, phi_max, n_points };
        cfg.validate()?;
        Ok(cfg)
    }

    /// One full period `[-pi, pi]`.
    pub fn one_period(k_abs: f64, n_points: usize) -> Result<Self> {
        Self::new(k_abs, -PI, PI, n_points)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.k_abs > 0.0 && self.k_abs.is_finite()) {
            return Err(Error::OutOfRange(format!("|K| = {} must be positive", self.k_abs)));
        }
        if self.n_points < 2 {
            return Err(Error::OutOfRange(format!("fringe grid needs at least 2 points, got {}", self.n_points)));
        }
        if !(self.phi_min < self.phi_max) || !self.phi_min.is_finite() || !self.phi_max.is_finite() {
            return Err(Error::OutOfRange(format!("phase range [{}, {}] is empty", self.phi_min, self.phi_max)));
        }
        Ok(())
    }

    pub fn phi(&self, i: usize) -> f64 {
        let step = (self.phi_max - self.phi_min) / (self.n_points - 1) as f64;
        self.phi_min + step * i as f64
    }

    pub fn grid(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.phi(i)).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FringePoint {
    pub phi: f64,
    pub mean_intensity: f64,
    pub std_exact: f64,
    pub std_analytic: Option<f64>,
    /// `mean - std <= 0`: quantum fluctuations can take the intensity to zero here.
    pub zero_reachable: bool,
}

impl FringePoint {
    fn new(phi: f64, mean: f64, var: f64) -> Result<Self> {
        let mean = clamp_mean(mean)?;
        let std_exact = var.sqrt();
        Ok(FringePoint {
            phi,
            mean_intensity: mean,
            std_exact,
            std_analytic: None,
            zero_reachable: reaches_zero(mean, std_exact),
        })
    }
}

fn clamp_mean(mean: f64) -> Result<f64> {
    if mean >= 0.0 {
        Ok(mean)
    } else if mean >= -1e-9 {
        Ok(0.0)
    } else {
        Err(Error::NegativeVariance(mean))
    }
}

/// `mean - std <= 0`, allowing for rounding when both are equal.
pub fn reaches_zero(mean: f64, std: f64) -> bool {
    mean - std <= 1e-12 * mean.abs().max(1.0)
}

fn weights(phi: f64) -> [f64; 3] {
    [1.0, phi.cos(), -phi.sin()]
}

/// `|K|^2 [G0 + G2 cos(phi) - G3 sin(phi)]` as a hermitian operator.
pub fn intensity_operator(space: FockSpace, k_abs: f64, phi: f64) -> Result<QOperator> {
    intensity_from(&GOperators::new(space)?, k_abs, phi)
}

fn intensity_from(g: &GOperators, k_abs: f64, phi: f64) -> Result<QOperator> {
    let [w0, w2, w3] = weights(phi);
    let r = |x: f64| C64::new(x * k_abs * k_abs, 0.0);
    g.get(0).scale(r(w0)).lin_comb(C64::new(1.0, 0.0), g.get(2), r(w2))?.lin_comb(C64::new(1.0, 0.0), g.get(3), r(w3))
}

/// Classical interference law from the G means:
/// `|K|^2 { G0 + |G2 + i G3| cos[arg(G2 + i G3) + phi] }`.
pub fn mean_intensity_closed_form(stats: &GStats, k_abs: f64, phi: f64) -> f64 {
    k_abs * k_abs * (stats.mean[0] + stats.coherence_magnitude() * (stats.coherence_phase() + phi).cos())
}

/// `|K|^4 c^T Sigma c` with `c = (1, cos phi, -sin phi)` over the symmetrized
/// `(G0, G2, G3)` covariance block.
pub fn decomposed_variance(stats: &GStats, k_abs: f64, phi: f64) -> f64 {
    let c = weights(phi);
    let idx = [0, 2, 3];
    let mut v = 0.0;
    for (a, &i) in idx.iter().enumerate() {
        for (b, &j) in idx.iter().enumerate() {
            v += c[a] * c[b] * stats.cov[i][j];
        }
    }
    k_abs.powi(4) * v
}

/// Decomposed variance at `phi`, cross-checked against the direct
/// `<I^2> - <I>^2` of the intensity operator.
pub fn variance_decomposition(state: &QState, k_abs: f64, phi: f64, stats: &GStats) -> Result<f64> {
    let decomposed = decomposed_variance(stats, k_abs, phi);
    let direct = variance(state, &intensity_operator(state.space(), k_abs, phi)?)?;
    if (direct - decomposed).abs() > DECOMPOSITION_TOL * direct.abs().max(1.0) {
        return Err(Error::Decomposition { phi, direct, decomposed });
    }
    Ok(decomposed)
}

/// Fringe profile from G moments computed once; each grid point is then a
/// closed-form evaluation.
pub fn fringe_scan(state: &QState, config: &FringeConfig) -> Result<Vec<FringePoint>> {
    config.validate()?;
    let stats = g_stats(state)?;
    fringe_from_stats(&stats, config)
}

pub fn fringe_from_stats(stats: &GStats, config: &FringeConfig) -> Result<Vec<FringePoint>> {
    config.validate()?;
    let k2 = config.k_abs * config.k_abs;
    (0..config.n_points)
        .map(|i| {
            let phi = config.phi(i);
            let [w0, w2, w3] = weights(phi);
            let mean = k2 * (w0 * stats.mean[0] + w2 * stats.mean[2] + w3 * stats.mean[3]);
            let var = decomposed_variance(stats, config.k_abs, phi);
            FringePoint::new(phi, mean, clamp_variance(var, k2 * k2 * stats.mean[0].powi(2))?)
        })
        .collect()
}

/// Fringe profile from the intensity operator built at every grid point.
pub fn fringe_scan_direct(state: &QState, config: &FringeConfig, exec: Execution) -> Result<Vec<FringePoint>> {
    config.validate()?;
    let g = GOperators::new(state.space())?;
    try_map_indexed(exec, config.n_points, |i| {
        let phi = config.phi(i);
        let op = intensity_from(&g, config.k_abs, phi)?;
        let mean = expectation(state, &op)?.re;
        FringePoint::new(phi, mean, variance(state, &op)?)
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhiInterval {
    pub start: f64,
    pub end: f64,
}

impl PhiInterval {
    pub fn width(&self) -> f64 {
        self.end - self.start
    }

    pub fn contains(&self, phi: f64) -> bool {
        self.start <= phi && phi <= self.end
    }
}

/// Maximal runs of grid points with `mean - std <= 0`. Interior endpoints are
/// placed at the linearly interpolated root of `mean - std`; runs touching
/// the grid boundary end at the boundary point.
pub fn zero_reachable_regions(points: &[FringePoint]) -> Vec<PhiInterval> {
    let f = |p: &FringePoint| p.mean_intensity - p.std_exact;
    let root = |a: &FringePoint, b: &FringePoint| {
        let (fa, fb) = (f(a), f(b));
        if fa == fb {
            return b.phi;
        }
        a.phi + (fa / (fa - fb)) * (b.phi - a.phi)
    };
    let mut out = Vec::new();
    let mut i = 0;
    while i < points.len() {
        if !points[i].zero_reachable {
            i += 1;
            continue;
        }
        let first = i;
        while i + 1 < points.len() && points[i + 1].zero_reachable {
            i += 1;
        }
        let last = i;
        let start = if first > 0 { root(&points[first - 1], &points[first]) } else { points[first].phi };
        let end = if last + 1 < points.len() { root(&points[last], &points[last + 1]) } else { points[last].phi };
        out.push(PhiInterval { start: start.min(points[first].phi), end: end.max(points[last].phi) });
        i += 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{build, StateSpec};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};

    fn re(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn operator_at_special_phases() {
        let s = FockSpace::new(2, 2).unwrap();
        let g = GOperators::new(s).unwrap();
        let at0 = intensity_operator(s, 1.0, 0.0).unwrap();
        assert_eq!(at0, g.get(0).add(g.get(2)).unwrap());
        let at_half = intensity_operator(s, 2.0, FRAC_PI_2).unwrap();
        let want = g.get(0).sub(g.get(3)).unwrap().scale(re(4.0));
        assert!(at_half.sub(&want).unwrap().matrix().max_abs() < 1e-15);
        assert!(at_half.is_hermitian());
    }

    #[test]
    fn vacuum_is_dark() {
        let vac = QState::vacuum(FockSpace::new(2, 2).unwrap());
        for p in fringe_scan(&vac, &FringeConfig::default()).unwrap() {
            assert_eq!((p.mean_intensity, p.std_exact), (0.0, 0.0));
        }
        let stats = g_stats(&vac).unwrap();
        assert_eq!(variance_decomposition(&vac, 1.0, 0.3, &stats).unwrap(), 0.0);
    }

    #[test]
    fn balanced_photon_profile() {
        let s = build(&StateSpec::single_photon(re(FRAC_1_SQRT_2), re(FRAC_1_SQRT_2))).unwrap();
        let pts = fringe_scan(&s, &FringeConfig::default()).unwrap();
        for p in &pts {
            assert_abs_diff_eq!(p.mean_intensity, 1.0 + p.phi.cos(), epsilon = 1e-12);
            assert_abs_diff_eq!(p.std_exact, p.phi.sin().abs(), epsilon = 1e-10);
        }
        let stats = g_stats(&s).unwrap();
        assert_abs_diff_eq!(variance_decomposition(&s, 1.0, FRAC_PI_2, &stats).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn one_sided_photon_is_flat() {
        let s = build(&StateSpec::single_photon(re(1.0), re(0.0))).unwrap();
        let pts = fringe_scan(&s, &FringeConfig::default()).unwrap();
        for p in &pts {
            assert_abs_diff_eq!(p.mean_intensity, 1.0, epsilon = 1e-15);
            assert_abs_diff_eq!(p.std_exact, 1.0, epsilon = 1e-15);
            assert!(p.zero_reachable);
        }
        let regions = zero_reachable_regions(&pts);
        assert_eq!(regions.len(), 1);
        assert_eq!((regions[0].start, regions[0].end), (pts[0].phi, pts[255].phi));
    }

    #[test]
    fn coherent_variance_tracks_intensity() {
        let s = build(&StateSpec::coherent(re(1.0), re(1.0)).with_cutoff(20, 20)).unwrap();
        let stats = g_stats(&s).unwrap();
        assert_abs_diff_eq!(variance_decomposition(&s, 1.0, 0.0, &stats).unwrap(), 8.0, epsilon = 1e-8);
        for p in fringe_scan(&s, &FringeConfig::default()).unwrap() {
            assert_abs_diff_eq!(p.std_exact.powi(2), 2.0 * p.mean_intensity, epsilon = 1e-8);
        }
    }

    #[test]
    fn coherent_zero_region_around_pi() {
        // 2(1 + cos phi) <= 2 sqrt(1 + cos phi)  <=>  cos phi <= 0
        let s = build(&StateSpec::coherent(re(1.0), re(1.0)).with_cutoff(20, 20)).unwrap();
        let cfg = FringeConfig::one_period(1.0, 801).unwrap();
        let regions = zero_reachable_regions(&fringe_scan(&s, &cfg).unwrap());
        assert_eq!(regions.len(), 2);
        assert_abs_diff_eq!(regions[0].start, -PI, epsilon = 1e-12);
        assert_abs_diff_eq!(regions[0].end, -FRAC_PI_2, epsilon = 1e-4);
        assert_abs_diff_eq!(regions[1].start, FRAC_PI_2, epsilon = 1e-4);
        assert_abs_diff_eq!(regions[1].end, PI, epsilon = 1e-12);
    }

    #[test]
    fn direct_and_precomputed_agree() {
        let s = build(&StateSpec::displaced_squeezed(re(1.5), 0.4, 1.0)).unwrap();
        let cfg = FringeConfig::new(0.7, -PI, PI, 33).unwrap();
        let a = fringe_scan(&s, &cfg).unwrap();
        let b = fringe_scan_direct(&s, &cfg, Execution::Sequential).unwrap();
        let c = fringe_scan_direct(&s, &cfg, Execution::Parallel).unwrap();
        assert_eq!(b, c);
        let stats = g_stats(&s).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_abs_diff_eq!(x.mean_intensity, y.mean_intensity, epsilon = 1e-9);
            assert_abs_diff_eq!(x.mean_intensity, mean_intensity_closed_form(&stats, 0.7, x.phi), epsilon = 1e-9);
            assert_abs_diff_eq!(x.std_exact.powi(2), y.std_exact.powi(2), epsilon = 1e-8);
        }
    }

    #[test]
    fn config_validation() {
        assert!(FringeConfig::new(0.0, 0.0, 1.0, 10).is_err());
        assert!(FringeConfig::new(1.0, 1.0, 1.0, 10).is_err());
        assert!(FringeConfig::new(1.0, 0.0, 1.0, 1).is_err());
        let g = FringeConfig::new(1.0, 0.0, 1.0, 3).unwrap().grid();
        assert_eq!(g, vec![0.0, 0.5, 1.0]);
    }

    #[test]
    fn region_interpolation() {
        let mk = |phi: f64, mean: f64, std: f64| FringePoint {
            phi,
            mean_intensity: mean,
            std_exact: std,
            std_analytic: None,
            zero_reachable: reaches_zero(mean, std),
        };
        let pts = vec![mk(0.0, 2.0, 1.0), mk(1.0, 0.0, 1.0), mk(2.0, 0.5, 0.0), mk(3.0, 0.0, 0.0)];
        let r = zero_reachable_regions(&pts);
        assert_eq!(r.len(), 2);
        assert_abs_diff_eq!(r[0].start, 0.5);
        assert_abs_diff_eq!(r[0].end, 1.0 + 1.0 / 1.5);
        assert_eq!((r[1].start, r[1].end), (3.0, 3.0));
    }
}
