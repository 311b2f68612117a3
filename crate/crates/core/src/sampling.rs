//! Seeded random pure states and generators, and the batch sweep that checks
//! the uncertainty relations and G-space bounds over many of them.
//!
//! Item `i` of a batch draws from ChaCha8 stream `i` of the given seed, so a
//! batch is identical whichever execution policy evaluates it.

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::fock::{CsrMatrix, FockSpace, QOperator, QState};
use crate::gops::{evaluate_relations, g_stats_with, GOperators, Relation, RELATION_TOL};
use crate::par::{try_map_indexed, Execution};

fn rng_for(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

fn gaussian(rng: &mut ChaCha8Rng) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Unitarily invariant random pure state (normalized complex Gaussian vector).
pub fn random_state(space: FockSpace, seed: u64, index: usize) -> QState {
    let mut rng = rng_for(seed, index);
    let amps = (0..space.dim()).map(|_| gaussian(&mut rng)).collect();
    QState::from_amplitudes(space, amps).expect("gaussian vector is nonzero")
}

/// Random state supported on `n1 + n2 <= min(cutoff1, cutoff2)`, the largest
/// span of complete photon-number sectors. The G operators act there exactly
/// as on the untruncated space, so the uncertainty relations are theorems on it.
pub fn random_state_number_closed(space: FockSpace, seed: u64, index: usize) -> QState {
    let (c1, c2) = space.cutoffs();
    let top = c1.min(c2);
    let mut rng = rng_for(seed, index);
    let amps = (0..space.dim())
        .map(|i| {
            let z = gaussian(&mut rng);
            let (n1, n2) = space.occupation(i);
            if n1 + n2 <= top {
                z
            } else {
                C64::new(0.0, 0.0)
            }
        })
        .collect();
    QState::from_amplitudes(space, amps).expect("vacuum component is always kept")
}

pub fn random_states(space: FockSpace, seed: u64, count: usize, exec: Execution) -> Vec<QState> {
    crate::par::map_indexed(exec, count, |i| random_state(space, seed, i))
}

/// Dense random anti-hermitian operator scaled to Frobenius norm `norm`
/// (which bounds its spectral norm).
pub fn random_anti_hermitian(space: FockSpace, seed: u64, index: usize, norm: f64) -> QOperator {
    let n = space.dim();
    let mut rng = rng_for(seed, index);
    let raw: Vec<C64> = (0..n * n).map(|_| gaussian(&mut rng)).collect();
    let mut entries = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            entries.push((i, j, (raw[i * n + j] - raw[j * n + i].conj()) * 0.5));
        }
    }
    let frob = entries.iter().map(|(_, _, v)| v.norm_sqr()).sum::<f64>().sqrt();
    let scale = norm / frob;
    let m = CsrMatrix::from_triplets(n, entries.into_iter().map(|(i, j, v)| (i, j, v * scale)));
    QOperator::from_matrix(space, m).expect("dimension matches")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RelationExtreme {
    pub relation: Relation,
    pub name: String,
    pub min_slack: f64,
    /// Batch index attaining the minimum.
    pub argmin: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub space: (usize, usize),
    pub seed: u64,
    pub count: usize,
    pub relations: Vec<RelationExtreme>,
    pub min_slack: f64,
    /// Largest `V^2 + D^2` seen.
    pub max_vd_sum: f64,
    /// Largest `|(G1, G2, G3)| - G0` seen.
    pub max_radius_excess: f64,
    pub violations: usize,
}

impl SweepSummary {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// Evaluate every uncertainty relation and the bounds `V^2 + D^2 <= 1`,
/// `|G| <= G0` on `count` random states.
pub fn uncertainty_sweep(space: FockSpace, seed: u64, count: usize, exec: Execution) -> Result<SweepSummary> {
    let ops = GOperators::new(space)?;
    let per_state = try_map_indexed(exec, count, |i| {
        let stats = g_stats_with(&ops, &random_state(space, seed, i))?;
        let report = evaluate_relations(&stats);
        let vd = stats.visibility.unwrap_or(0.0).powi(2) + stats.distinguishability.unwrap_or(0.0).powi(2);
        let excess = stats.g_space_radius() - stats.mean[0];
        Ok::<_, crate::Error>((report, vd, excess))
    })?;

    let mut relations: Vec<RelationExtreme> = Vec::new();
    let mut max_vd_sum = f64::NEG_INFINITY;
    let mut max_radius_excess = f64::NEG_INFINITY;
    let mut violations = 0;
    for (i, (report, vd, excess)) in per_state.iter().enumerate() {
        for r in &report.relations {
            match relations.iter_mut().find(|e| e.relation == r.relation) {
                Some(e) if r.slack < e.min_slack => {
                    e.min_slack = r.slack;
                    e.argmin = i;
                }
                Some(_) => {}
                None => relations.push(RelationExtreme {
                    relation: r.relation,
                    name: r.name.clone(),
                    min_slack: r.slack,
                    argmin: i,
                }),
            }
        }
        let bad = report.relations.iter().any(|r| !r.satisfied) || *vd > 1.0 + RELATION_TOL || *excess > RELATION_TOL;
        violations += usize::from(bad);
        max_vd_sum = max_vd_sum.max(*vd);
        max_radius_excess = max_radius_excess.max(*excess);
    }
    let min_slack = relations.iter().map(|e| e.min_slack).fold(f64::INFINITY, f64::min);
    Ok(SweepSummary {
        space: space.cutoffs(),
        seed,
        count,
        relations,
        min_slack,
        max_vd_sum,
        max_radius_excess,
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_per_index() {
        let s = FockSpace::new(2, 2).unwrap();
        assert_eq!(random_state(s, 7, 3), random_state(s, 7, 3));
        assert_ne!(random_state(s, 7, 3), random_state(s, 7, 4));
        assert_ne!(random_state(s, 7, 3), random_state(s, 8, 3));
        let a = random_states(s, 1, 20, Execution::Sequential);
        let b = random_states(s, 1, 20, Execution::Parallel);
        assert_eq!(a, b);
    }

    #[test]
    fn generator_is_anti_hermitian() {
        let s = FockSpace::new(3, 3).unwrap();
        let g = random_anti_hermitian(s, 5, 0, 2.0);
        assert!(g.matrix().adjoint_residual(-1.0) <= 1e-15);
        let frob: f64 = g.matrix().entries().map(|(_, _, v)| v.norm_sqr()).sum::<f64>().sqrt();
        assert!((frob - 2.0).abs() < 1e-12);
    }

    #[test]
    fn small_sweep_passes() {
        let s = FockSpace::new(3, 3).unwrap();
        let seq = uncertainty_sweep(s, 42, 50, Execution::Sequential).unwrap();
        let par = uncertainty_sweep(s, 42, 50, Execution::Parallel).unwrap();
        assert_eq!(seq, par);
        assert!(seq.passed());
        assert_eq!(seq.relations.len(), 5);
        assert!(seq.max_vd_sum <= 1.0);
    }

    #[test]
    fn number_closed_support() {
        let s = FockSpace::new(3, 2).unwrap();
        let st = random_state_number_closed(s, 1, 0);
        for i in 0..s.dim() {
            let (a, b) = s.occupation(i);
            assert_eq!(st.amplitudes()[i].norm() == 0.0, a + b > 2);
        }
    }
}
