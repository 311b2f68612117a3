//! Construction of the two-mode states used throughout: vacuum, Fock, product
//! coherent, symmetric displaced-squeezed, single-photon and custom
//! amplitude vectors.
//!
//! Every constructor records the probability mass that the truncation
//! discards (`QState::leakage`) and rejects states whose leakage exceeds the
//! requested tolerance. With automatic cutoffs the cutoff is grown until the
//! tolerance is met; an explicit cutoff is never changed.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fock::{dense, exp_action, FockSpace, Mode, QOperator, QState};

pub const DEFAULT_LEAKAGE_TOL: f64 = 1e-10;
/// Allowed deviation of `|c1|^2 + |c2|^2` from one.
pub const SINGLE_PHOTON_NORM_TOL: f64 = 1e-9;
/// Coherent amplitudes beyond this magnitude would overflow the series.
pub const MAX_COHERENT_ALPHA: f64 = 30.0;

const ZERO: C64 = C64::new(0.0, 0.0);
const MAX_AUTO_GROWTH: usize = 12;
/// Top levels of the padded single-mode workspace that must stay empty.
const EDGE_LEVELS: usize = 5;
const EDGE_MASS_TOL: f64 = 1e-22;

#[derive(Clone, Debug, PartialEq)]
pub enum StateKind {
    Vacuum,
    Fock {
        n1: usize,
        n2: usize,
    },
    /// `|alpha>_1 |beta>_2`.
    Coherent {
        alpha: C64,
        beta: C64,
    },
    /// `D1(alpha) D2(alpha) S1(xi) S2(xi) |0,0>` with `xi = q e^{i theta}`.
    DisplacedSqueezed {
        alpha: C64,
        q: f64,
        theta: f64,
    },
    /// `c1 |1,0> + c2 |0,1>`.
    SinglePhoton {
        c1: C64,
        c2: C64,
    },
    /// Row-major amplitudes over the given cutoffs; renormalized on build.
    Custom {
        cutoff: (usize, usize),
        amplitudes: Vec<C64>,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct StateSpec {
    pub kind: StateKind,
    pub cutoff: Option<(usize, usize)>,
    pub leakage_tol: f64,
}

impl From<StateKind> for StateSpec {
    fn from(kind: StateKind) -> Self {
        StateSpec { kind, cutoff: None, leakage_tol: DEFAULT_LEAKAGE_TOL }
    }
}

impl StateSpec {
    pub fn vacuum() -> Self {
        StateKind::Vacuum.into()
    }

    pub fn fock(n1: usize, n2: usize) -> Self {
        StateKind::Fock { n1, n2 }.into()
    }

    pub fn coherent(alpha: C64, beta: C64) -> Self {
        StateKind::Coherent { alpha, beta }.into()
    }

    pub fn displaced_squeezed(alpha: C64, q: f64, theta: f64) -> Self {
        StateKind::DisplacedSqueezed { alpha, q, theta }.into()
    }

    pub fn single_photon(c1: C64, c2: C64) -> Self {
        StateKind::SinglePhoton { c1, c2 }.into()
    }

    pub fn custom(cutoff: (usize, usize), amplitudes: Vec<C64>) -> Self {
        StateKind::Custom { cutoff, amplitudes }.into()
    }

    pub fn with_cutoff(mut self, cutoff1: usize, cutoff2: usize) -> Self {
        self.cutoff = Some((cutoff1, cutoff2));
        self
    }

    pub fn with_leakage_tol(mut self, tol: f64) -> Self {
        self.leakage_tol = tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidSpec(msg));
        if !(self.leakage_tol >= 0.0 && self.leakage_tol < 1.0) {
            return bad(format!("leakage tolerance {} outside [0, 1)", self.leakage_tol));
        }
        match &self.kind {
            StateKind::Vacuum | StateKind::Fock { .. } => {}
            StateKind::Coherent { alpha, beta } => {
                if !finite(*alpha) || !finite(*beta) {
                    return bad("non-finite coherent amplitude".into());
                }
                if alpha.norm() > MAX_COHERENT_ALPHA || beta.norm() > MAX_COHERENT_ALPHA {
                    return Err(Error::OutOfRange(format!("|alpha| above {MAX_COHERENT_ALPHA}")));
                }
            }
            StateKind::DisplacedSqueezed { alpha, q, theta } => {
                if !finite(*alpha) || !q.is_finite() || !theta.is_finite() {
                    return bad("non-finite displaced-squeezed parameter".into());
                }
                if *q < 0.0 {
                    return bad(format!("squeeze parameter q = {q} must be non-negative"));
                }
                if !(0.0..std::f64::consts::TAU).contains(theta) {
                    return bad(format!("squeeze angle theta = {theta} outside [0, 2pi)"));
                }
                if alpha.norm() > MAX_COHERENT_ALPHA {
                    return Err(Error::OutOfRange(format!("|alpha| above {MAX_COHERENT_ALPHA}")));
                }
            }
            StateKind::SinglePhoton { c1, c2 } => {
                let n = c1.norm_sqr() + c2.norm_sqr();
                if !n.is_finite() || (n - 1.0).abs() > SINGLE_PHOTON_NORM_TOL {
                    return bad(format!("|c1|^2 + |c2|^2 = {n}, expected 1"));
                }
            }
            StateKind::Custom { cutoff, amplitudes } => {
                let space = FockSpace::new(cutoff.0, cutoff.1)?;
                if amplitudes.len() != space.dim() {
                    return bad(format!(
                        "custom state has {} amplitudes, cutoffs {:?} need {}",
                        amplitudes.len(),
                        cutoff,
                        space.dim()
                    ));
                }
                if !amplitudes.iter().all(|a| finite(*a)) {
                    return bad("non-finite custom amplitude".into());
                }
                if amplitudes.iter().all(|a| a.norm_sqr() == 0.0) {
                    return Err(Error::ZeroNorm);
                }
                if let Some(c) = self.cutoff {
                    if c != *cutoff {
                        return bad("cutoff override conflicts with custom amplitude layout".into());
                    }
                }
            }
        }
        Ok(())
    }
}

fn finite(z: C64) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

/// Default per-mode cutoff for a target mean occupation `mu`:
/// `ceil(mu + 8 sqrt(mu + 1) + 10)`.
pub fn suggested_cutoff(mean_occupation: f64) -> usize {
    let mu = mean_occupation.max(0.0);
    (mu + 8.0 * (mu + 1.0).sqrt() + 10.0).ceil() as usize
}

fn grow(cutoff: usize) -> usize {
    cutoff + cutoff / 4 + 5
}

fn combine_leakage(l1: f64, l2: f64) -> f64 {
    // 1 - (1 - l1)(1 - l2) without cancellation
    l1 + l2 - l1 * l2
}

/// Build a normalized state from its description.
pub fn build(spec: &StateSpec) -> Result<QState> {
    spec.validate()?;
    match &spec.kind {
        StateKind::Vacuum => {
            let (c1, c2) = spec.cutoff.unwrap_or((1, 1));
            Ok(QState::vacuum(FockSpace::new(c1, c2)?))
        }
        StateKind::Fock { n1, n2 } => {
            let (c1, c2) = spec.cutoff.unwrap_or(((*n1).max(1), (*n2).max(1)));
            QState::basis(FockSpace::new(c1, c2)?, *n1, *n2)
        }
        StateKind::SinglePhoton { c1, c2 } => {
            let (k1, k2) = spec.cutoff.unwrap_or((1, 1));
            let space = FockSpace::new(k1, k2)?;
            let mut amps = vec![ZERO; space.dim()];
            amps[space.index(1, 0)] = *c1;
            amps[space.index(0, 1)] = *c2;
            QState::from_amplitudes(space, amps)
        }
        StateKind::Custom { cutoff, amplitudes } => {
            QState::from_amplitudes(FockSpace::new(cutoff.0, cutoff.1)?, amplitudes.clone())
        }
        StateKind::Coherent { alpha, beta } => {
            let mode1 = |c| coherent_series(*alpha, c);
            let mode2 = |c| coherent_series(*beta, c);
            let auto = (suggested_cutoff(alpha.norm_sqr()), suggested_cutoff(beta.norm_sqr()));
            product_state(spec, auto, mode1, mode2)
        }
        StateKind::DisplacedSqueezed { alpha, q, theta } => {
            let mu = alpha.norm_sqr() + q.sinh().powi(2);
            let auto = suggested_cutoff(mu);
            let mode = |c| single_mode_displaced_squeezed(*alpha, *q, *theta, c);
            product_state(spec, (auto, auto), mode, mode)
        }
    }
}

/// Tensor two single-mode constructions, growing automatic cutoffs per mode
/// until the leakage tolerance is met.
fn product_state<F1, F2>(spec: &StateSpec, auto: (usize, usize), mode1: F1, mode2: F2) -> Result<QState>
where
    F1: Fn(usize) -> Result<(Vec<C64>, f64)>,
    F2: Fn(usize) -> Result<(Vec<C64>, f64)>,
{
    let tol = spec.leakage_tol;
    let fit = |f: &dyn Fn(usize) -> Result<(Vec<C64>, f64)>, fixed: Option<usize>, start: usize| {
        let mut cutoff = fixed.unwrap_or(start).max(1);
        let mut attempt = 0;
        loop {
            let (amps, leak) = f(cutoff)?;
            if fixed.is_some() || leak <= tol / 2.0 || attempt == MAX_AUTO_GROWTH {
                return Ok::<_, Error>((amps, leak));
            }
            cutoff = grow(cutoff);
            attempt += 1;
        }
    };
    let (a1, l1) = fit(&mode1, spec.cutoff.map(|c| c.0), auto.0)?;
    let (a2, l2) = fit(&mode2, spec.cutoff.map(|c| c.1), auto.1)?;
    let leakage = combine_leakage(l1, l2);
    if leakage > tol {
        return Err(Error::Leakage { leakage, tol });
    }
    let space = FockSpace::new(a1.len() - 1, a2.len() - 1)?;
    let mut amps = Vec::with_capacity(space.dim());
    for x in &a1 {
        for y in &a2 {
            amps.push(x * y);
        }
    }
    QState::with_leakage(space, amps, leakage)
}

/// Coherent-state amplitudes `c_n = e^{-|alpha|^2/2} alpha^n / sqrt(n!)` for
/// `n <= cutoff` (not renormalized) and the discarded Poisson tail mass.
pub fn coherent_series(alpha: C64, cutoff: usize) -> Result<(Vec<C64>, f64)> {
    if !finite(alpha) || alpha.norm() > MAX_COHERENT_ALPHA {
        return Err(Error::OutOfRange(format!("coherent amplitude {alpha} (limit {MAX_COHERENT_ALPHA})")));
    }
    let mu = alpha.norm_sqr();
    let mut amps = Vec::with_capacity(cutoff + 1);
    let mut c = C64::new((-mu / 2.0).exp(), 0.0);
    amps.push(c);
    for n in 1..=cutoff {
        c *= alpha / (n as f64).sqrt();
        amps.push(c);
    }
    Ok((amps, poisson_tail(mu, cutoff)))
}

/// `sum_{n > cutoff} e^{-mu} mu^n / n!`, summed directly so tiny tails keep
/// their relative accuracy.
fn poisson_tail(mu: f64, cutoff: usize) -> f64 {
    if mu == 0.0 {
        return 0.0;
    }
    let n0 = cutoff + 1;
    let ln_fact: f64 = (1..=n0).map(|k| (k as f64).ln()).sum();
    let mut term = (-mu + n0 as f64 * mu.ln() - ln_fact).exp();
    let mut sum = 0.0;
    let mut n = n0;
    loop {
        sum += term;
        n += 1;
        term *= mu / n as f64;
        if n as f64 > mu && (term <= 1e-18 * sum || term == 0.0) {
            break;
        }
    }
    sum.min(1.0)
}

/// `D(alpha) S(xi)|0>` for one mode on `0..=cutoff` and the mass it loses
/// beyond the cutoff. Computed with [`exp_action`] on a padded workspace
/// whose top levels are verified empty, then truncated (not renormalized).
pub fn single_mode_displaced_squeezed(alpha: C64, q: f64, theta: f64, cutoff: usize) -> Result<(Vec<C64>, f64)> {
    let mu = alpha.norm_sqr() + q.sinh().powi(2);
    let mut pad = (8.0 * (mu + 1.0).sqrt()).ceil() as usize + 20 + (cutoff / 2);
    for _ in 0..6 {
        let padded = cutoff + pad;
        let space = FockSpace::new(padded, 1)?;
        let a = QOperator::annihilation(space, Mode::One);
        let ad = a.adjoint();
        let xi = C64::from_polar(q, theta);
        let a2 = a.multiply(&a)?;
        let ad2 = ad.multiply(&ad)?;
        let squeeze = a2.lin_comb(xi.conj() * 0.5, &ad2, -xi * 0.5)?;
        let displace = ad.lin_comb(alpha, &a, -alpha.conj())?;

        let state = exp_action(&squeeze, &QState::vacuum(space))?;
        let state = exp_action(&displace, &state)?;

        let amps: Vec<C64> = (0..=padded).map(|n| state.amplitude(n, 0)).collect();
        let edge: f64 = amps[padded + 1 - EDGE_LEVELS..].iter().map(|z| z.norm_sqr()).sum();
        if edge > EDGE_MASS_TOL {
            pad *= 2;
            continue;
        }
        let tail: f64 = amps[cutoff + 1..].iter().map(|z| z.norm_sqr()).sum();
        let mut head = amps;
        head.truncate(cutoff + 1);
        return Ok((head, tail + state.leakage()));
    }
    Err(Error::OutOfRange(format!("displaced-squeezed workspace did not converge (alpha {alpha}, q {q})")))
}

/// Closed-form squeezed vacuum `S(xi)|0>` on `0..=cutoff`:
/// `c_{2m} = (-e^{i theta} tanh q)^m sqrt((2m)!) / (2^m m! sqrt(cosh q))`.
pub fn squeezed_vacuum_series(q: f64, theta: f64, cutoff: usize) -> Vec<C64> {
    let mut out = vec![ZERO; cutoff + 1];
    let ratio = -C64::from_polar(q.tanh(), theta);
    let mut c = C64::new(1.0 / q.cosh().sqrt(), 0.0);
    let mut m = 0usize;
    while 2 * m <= cutoff {
        out[2 * m] = c;
        m += 1;
        c *= ratio * ((2 * m - 1) as f64 / (2 * m) as f64).sqrt();
    }
    out
}

/// Independent reference for real-`alpha`, `theta = 0` displaced-squeezed
/// amplitudes on `0..=cutoff`: closed-form squeezed vacuum, displaced with a
/// dense matrix exponential on a generously padded single-mode space.
pub fn displaced_squeezed_oracle(alpha: f64, q: f64, cutoff: usize) -> Result<Vec<C64>> {
    if !(alpha.abs() <= 3.0 && (0.0..=0.8).contains(&q) && cutoff <= 40) {
        return Err(Error::OutOfRange(format!(
            "oracle covers |alpha| <= 3, 0 <= q <= 0.8, cutoff <= 40 (got {alpha}, {q}, {cutoff})"
        )));
    }
    let padded = cutoff + 80;
    let vac = squeezed_vacuum_series(q, 0.0, padded);
    let a = dense::single_mode_annihilation(padded);
    let gen = (a.adjoint() - &a) * C64::new(alpha, 0.0);
    let mut out = dense::expm_apply(&gen, &vac);
    out.truncate(cutoff + 1);
    Ok(out)
}
