//! The four G operators, their statistics and the relations they obey:
//! commutators, the uncertainty relations (plus their visibility and
//! distinguishability forms), the coherence-squeezing classifier and the
//! G-space geometry.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{clamp_variance, inner, FockSpace, Mode, QOperator, QState, HERMITIAN_TOL};
use crate::par::{try_map_indexed, Execution};

/// Allowed negative slack of an uncertainty relation before it counts as violated.
pub const RELATION_TOL: f64 = 1e-9;
/// Margin of the strict `Delta G_j < sqrt(n_bar)` squeezing test.
pub const STRICT_MARGIN: f64 = 1e-9;
/// Residual above which a commutator identity is reported as broken.
pub const COMMUTATOR_TOL: f64 = 1e-10;
/// Below this total intensity V, D and the normalized vector are undefined.
pub const INTENSITY_FLOOR: f64 = 1e-12;

const I: C64 = C64::new(0.0, 1.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// `G0 = n1 + n2`, `G1 = n1 - n2`, `G2 = a1^H a2 + a2^H a1`, `G3 = i(a2^H a1 - a1^H a2)`.
pub fn g_operator(space: FockSpace, n: usize) -> Result<QOperator> {
    let n1 = || QOperator::number(space, Mode::One);
    let n2 = || QOperator::number(space, Mode::Two);
    match n {
        0 => n1().add(&n2()),
        1 => n1().sub(&n2()),
        2 | 3 => {
            let a1 = QOperator::annihilation(space, Mode::One);
            let a2 = QOperator::annihilation(space, Mode::Two);
            let hop12 = a1.adjoint().multiply(&a2)?;
            let hop21 = a2.adjoint().multiply(&a1)?;
            let op = if n == 2 { hop12.add(&hop21)? } else { hop21.lin_comb(I, &hop12, -I)? };
            op.into_hermitian()
        }
        other => Err(Error::InvalidGIndex(other)),
    }
}

/// All four G operators of one space.
#[derive(Clone, Debug)]
pub struct GOperators {
    ops: [QOperator; 4],
}

impl GOperators {
    pub fn new(space: FockSpace) -> Result<Self> {
        Ok(GOperators {
            ops: [g_operator(space, 0)?, g_operator(space, 1)?, g_operator(space, 2)?, g_operator(space, 3)?],
        })
    }

    pub fn get(&self, n: usize) -> &QOperator {
        &self.ops[n]
    }

    pub fn space(&self) -> FockSpace {
        self.ops[0].space()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GStats {
    pub mean: [f64; 4],
    pub std: [f64; 4],
    /// Symmetrized covariances `<(G_j G_k + G_k G_j)/2> - G_j G_k`.
    pub cov: [[f64; 4]; 4],
    pub n_bar: f64,
    /// Mutual coherence `G2/2 + i G3/2`, serialized as `[re, im]`.
    #[serde(with = "complex_pair")]
    pub gamma12: C64,
    pub visibility: Option<f64>,
    pub distinguishability: Option<f64>,
    /// `(G1, G2, G3) / G0`.
    pub g_vector: Option<[f64; 3]>,
}

impl GStats {
    /// Unnormalized G-space vector `(G1, G2, G3)`.
    pub fn g_space_vector(&self) -> [f64; 3] {
        [self.mean[1], self.mean[2], self.mean[3]]
    }

    pub fn g_space_radius(&self) -> f64 {
        let [g1, g2, g3] = self.g_space_vector();
        (g1 * g1 + g2 * g2 + g3 * g3).sqrt()
    }

    /// `|G2 + i G3|`, the strength of the fringe modulation.
    pub fn coherence_magnitude(&self) -> f64 {
        self.mean[2].hypot(self.mean[3])
    }

    /// `arg(G2 + i G3)`, the fringe offset.
    pub fn coherence_phase(&self) -> f64 {
        self.mean[3].atan2(self.mean[2])
    }
}

mod complex_pair {
    use num_complex::Complex64 as C64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(z: &C64, s: S) -> Result<S::Ok, S::Error> {
        [z.re, z.im].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<C64, D::Error> {
        let [re, im] = <[f64; 2]>::deserialize(d)?;
        Ok(C64::new(re, im))
    }
}

/// Statistics of all four G operators; builds the operators for the state's space.
pub fn g_stats(state: &QState) -> Result<GStats> {
    g_stats_with(&GOperators::new(state.space())?, state)
}

/// Like [`g_stats`] with operators built once and shared across many states.
pub fn g_stats_with(ops: &GOperators, state: &QState) -> Result<GStats> {
    if ops.space() != state.space() {
        return Err(Error::SpaceMismatch);
    }
    let psi = state.amplitudes();
    let images: Vec<Vec<C64>> = (0..4).map(|n| ops.get(n).apply(state)).collect::<Result<_>>()?;

    let mut mean = [0.0; 4];
    for (n, img) in images.iter().enumerate() {
        let m = inner(psi, img);
        if m.im.abs() > HERMITIAN_TOL {
            return Err(Error::ImaginaryExpectation(m.im));
        }
        mean[n] = m.re;
    }

    let mut cov = [[0.0; 4]; 4];
    for j in 0..4 {
        for k in j..4 {
            let second = inner(&images[j], &images[k]).re;
            let mut c = second - mean[j] * mean[k];
            if j == k {
                c = clamp_variance(c, second)?;
            }
            cov[j][k] = c;
            cov[k][j] = c;
        }
    }
    let std = [0, 1, 2, 3].map(|n| cov[n][n].sqrt());

    let g0 = mean[0];
    let defined = g0 >= INTENSITY_FLOOR;
    let magnitude = mean[2].hypot(mean[3]);
    Ok(GStats {
        mean,
        std,
        cov,
        n_bar: g0,
        gamma12: C64::new(mean[2] / 2.0, mean[3] / 2.0),
        visibility: defined.then(|| magnitude / g0),
        distinguishability: defined.then(|| mean[1].abs() / g0),
        g_vector: defined.then(|| [mean[1] / g0, mean[2] / g0, mean[3] / g0]),
    })
}

/// Statistics for a batch of states on one space.
pub fn g_stats_batch(states: &[QState], exec: Execution) -> Result<Vec<GStats>> {
    let Some(first) = states.first() else { return Ok(Vec::new()) };
    let ops = GOperators::new(first.space())?;
    try_map_indexed(exec, states.len(), |i| g_stats_with(&ops, &states[i]))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommutatorResidual {
    pub name: String,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommutatorReport {
    pub entries: Vec<CommutatorResidual>,
    pub max_residual: f64,
}

/// Checks `[G0, Gj] = 0` and `[Gj, Gk] = 2i eps_jkl Gl` entrywise on the
/// interior subspace (`n_m <= cutoff_m - 2`), where truncation cannot reach.
pub fn check_commutators(space: FockSpace) -> Result<CommutatorReport> {
    let (c1, c2) = space.cutoffs();
    if c1 < 3 || c2 < 3 {
        return Err(Error::OutOfRange(format!("commutator check needs cutoffs >= 3, got ({c1}, {c2})")));
    }
    let g = GOperators::new(space)?;
    let mut entries = Vec::with_capacity(6);
    for j in 1..=3 {
        let r = g.get(0).commutator(g.get(j))?.interior_max_abs();
        entries.push(CommutatorResidual { name: format!("[G0,G{j}]"), residual: r });
    }
    for (j, k, l) in [(1, 2, 3), (2, 3, 1), (3, 1, 2)] {
        let r = g.get(j).commutator(g.get(k))?.lin_comb(ONE, g.get(l), C64::new(0.0, -2.0))?.interior_max_abs();
        entries.push(CommutatorResidual { name: format!("[G{j},G{k}]-2iG{l}"), residual: r });
    }
    let max_residual = entries.iter().map(|e| e.residual).fold(0.0, f64::max);
    if let Some(bad) = entries.iter().find(|e| e.residual > COMMUTATOR_TOL) {
        return Err(Error::Commutator { name: bad.name.clone(), residual: bad.residual });
    }
    Ok(CommutatorReport { entries, max_residual })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    /// `Delta G2 Delta G3 >= |G1|`
    Coherence,
    /// `Delta G1 Delta G2 >= |G3|`
    DifferenceG2,
    /// `Delta G1 Delta G3 >= |G2|`
    DifferenceG3,
    /// `Delta G2 Delta G3 / G0 >= D`
    Distinguishability,
    /// `Delta G1 sqrt(Delta G2^2 + Delta G3^2) / G0 >= V`
    Visibility,
}

impl Relation {
    pub fn label(self) -> &'static str {
        match self {
            Relation::Coherence => "dG2*dG3 >= |G1|",
            Relation::DifferenceG2 => "dG1*dG2 >= |G3|",
            Relation::DifferenceG3 => "dG1*dG3 >= |G2|",
            Relation::Distinguishability => "dG2*dG3/G0 >= D",
            Relation::Visibility => "dG1*sqrt(dG2^2+dG3^2)/G0 >= V",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RelationRecord {
    pub relation: Relation,
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub satisfied: bool,
    pub slack: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UncertaintyReport {
    pub relations: Vec<RelationRecord>,
}

impl UncertaintyReport {
    pub fn min_slack(&self) -> f64 {
        self.relations.iter().map(|r| r.slack).fold(f64::INFINITY, f64::min)
    }

    pub fn get(&self, relation: Relation) -> Option<&RelationRecord> {
        self.relations.iter().find(|r| r.relation == relation)
    }
}

/// Evaluates every relation without judging it.
pub fn evaluate_relations(stats: &GStats) -> UncertaintyReport {
    let [_, d1, d2, d3] = stats.std;
    let [g0, g1, g2, g3] = stats.mean;
    let mut pairs = vec![
        (Relation::Coherence, d2 * d3, g1.abs()),
        (Relation::DifferenceG2, d1 * d2, g3.abs()),
        (Relation::DifferenceG3, d1 * d3, g2.abs()),
    ];
    if let (Some(v), Some(d)) = (stats.visibility, stats.distinguishability) {
        pairs.push((Relation::Distinguishability, d2 * d3 / g0, d));
        pairs.push((Relation::Visibility, d1 * d2.hypot(d3) / g0, v));
    }
    let relations = pairs
        .into_iter()
        .map(|(relation, lhs, rhs)| {
            let slack = lhs - rhs;
            RelationRecord {
                relation,
                name: relation.label().to_string(),
                lhs,
                rhs,
                satisfied: slack >= -RELATION_TOL,
                slack,
            }
        })
        .collect();
    UncertaintyReport { relations }
}

/// All uncertainty relations; a violation beyond [`RELATION_TOL`] means the
/// moments upstream are wrong and is returned as an error. The visibility and
/// distinguishability forms are omitted when `G0` vanishes.
pub fn uncertainty_report(stats: &GStats) -> Result<UncertaintyReport> {
    let report = evaluate_relations(stats);
    if let Some(bad) = report.relations.iter().find(|r| !r.satisfied) {
        return Err(Error::UncertaintyViolation { name: bad.name.clone(), slack: bad.slack });
    }
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SqueezeReport {
    pub n_bar: f64,
    pub strict_margin: f64,
    /// `sqrt(n_bar) - Delta G_j` for j = 0..3; G0 and G1 are informational.
    pub margins: [f64; 4],
    /// `Delta G_j < sqrt(n_bar) - strict_margin`.
    pub squeezed: [bool; 4],
}

impl SqueezeReport {
    pub fn squeezed_g2(&self) -> bool {
        self.squeezed[2]
    }

    pub fn squeezed_g3(&self) -> bool {
        self.squeezed[3]
    }

    pub fn is_coherence_squeezed(&self) -> bool {
        self.squeezed_g2() || self.squeezed_g3()
    }
}

/// Coherence-squeezing classification against the coherent-state noise `sqrt(n_bar)`.
pub fn squeeze_report(stats: &GStats) -> Result<SqueezeReport> {
    squeeze_report_with_margin(stats, STRICT_MARGIN)
}

pub fn squeeze_report_with_margin(stats: &GStats, strict_margin: f64) -> Result<SqueezeReport> {
    if !(stats.n_bar > 0.0) {
        return Err(Error::NonPositivePhotonNumber(stats.n_bar));
    }
    let root = stats.n_bar.sqrt();
    let margins = stats.std.map(|s| root - s);
    let squeezed = margins.map(|m| m > strict_margin);
    Ok(SqueezeReport { n_bar: stats.n_bar, strict_margin, margins, squeezed })
}
