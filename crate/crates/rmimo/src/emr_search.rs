//! Pattern-domain precoding: selection of the per-antenna pattern index
//! vector that maximizes spectral efficiency.
//!
//! The greedy coordinate search sweeps the antennas in ascending order,
//! re-evaluating the full hybrid precoding pipeline for every candidate
//! pattern of the current antenna while all others stay fixed. An
//! exhaustive search (for tiny instances) and a seeded random search serve
//! as optimality oracle and baseline.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{ArrayGeometry, ChannelRealization, PatternAssignment};
use crate::error::{Error, Result};
use crate::patterns::PatternSet;
use crate::precoding::{hybrid_precode, ArchSpec};

/// Default cap on exhaustive enumeration.
pub const DEFAULT_EXHAUSTIVE_LIMIT: u64 = 1_000_000;

/// Greedy search knobs.
#[derive(Clone, Debug, PartialEq)]
pub struct SearchConfig {
    /// Number of full sweeps over all antennas.
    pub t_iter: usize,
    /// Optional cap on SE evaluations; when it runs out the search returns
    /// the best assignment seen so far with `truncated` set.
    pub budget: Option<usize>,
    /// Stop after a sweep that changes no index.
    pub early_exit: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            t_iter: 3,
            budget: None,
            early_exit: true,
        }
    }
}

/// Outcome of a pattern search.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub assignment: PatternAssignment,
    pub se: f64,
    pub evaluations: usize,
    /// SE after each completed sweep (greedy) or the final best (others).
    pub iteration_trace: Vec<f64>,
    pub truncated: bool,
}

/// Greedy coordinate search over a black-box objective.
///
/// Starts from the all-legacy assignment. Within one antenna step all
/// `n_patterns` candidates are evaluated; ties break toward the incumbent,
/// then toward the lowest pattern index. The accepted SE never decreases.
pub fn greedy_search<F>(
    n_antennas: usize,
    n_patterns: usize,
    legacy_index: usize,
    cfg: &SearchConfig,
    mut eval: F,
) -> Result<SearchResult>
where
    F: FnMut(&PatternAssignment) -> Result<f64>,
{
    check_space(n_antennas, n_patterns, legacy_index)?;
    if cfg.t_iter == 0 {
        return Err(Error::Config("greedy search needs t_iter >= 1".into()));
    }
    if cfg.budget == Some(0) {
        return Err(Error::Config("evaluation budget must be >= 1".into()));
    }

    let mut assignment = PatternAssignment::uniform(n_antennas, legacy_index);
    let mut evaluations = 0usize;
    let mut trace = Vec::new();
    let mut current_se = f64::NEG_INFINITY;
    let mut best_seen: Option<(PatternAssignment, f64)> = None;

    for _ in 0..cfg.t_iter {
        let mut changed = false;
        for antenna in 0..n_antennas {
            let incumbent = assignment.get(antenna);
            let mut best_p = incumbent;
            let mut best_se = f64::NEG_INFINITY;
            let mut incumbent_se = f64::NEG_INFINITY;
            for p in 0..n_patterns {
                if cfg.budget.is_some_and(|b| evaluations >= b) {
                    assignment.set(antenna, incumbent);
                    let (assignment, se) =
                        best_seen.expect("budget >= 1 guarantees one evaluation");
                    return Ok(SearchResult {
                        assignment,
                        se,
                        evaluations,
                        iteration_trace: trace,
                        truncated: true,
                    });
                }
                assignment.set(antenna, p);
                let se = eval(&assignment)?;
                evaluations += 1;
                if !se.is_finite() {
                    return Err(Error::Domain(format!("objective returned {se}")));
                }
                if best_seen.as_ref().is_none_or(|(_, s)| se > *s) {
                    best_seen = Some((assignment.clone(), se));
                }
                if p == incumbent {
                    incumbent_se = se;
                }
                if se > best_se {
                    best_se = se;
                    best_p = p;
                }
            }
            if incumbent_se == best_se {
                best_p = incumbent;
            }
            assignment.set(antenna, best_p);
            if best_p != incumbent {
                changed = true;
            }
            // The incumbent is among the candidates, so the accepted SE can
            // never fall below the previous step's value.
            assert!(
                best_se >= current_se,
                "greedy SE decreased: {best_se} < {current_se}"
            );
            current_se = best_se;
        }
        trace.push(current_se);
        if cfg.early_exit && !changed {
            break;
        }
    }

    Ok(SearchResult {
        assignment,
        se: current_se,
        evaluations,
        iteration_trace: trace,
        truncated: false,
    })
}

/// Exhaustive enumeration of all `n_patterns^n_antennas` assignments in
/// lexicographic order; ties keep the lexicographically smallest winner.
/// Refuses spaces larger than `limit`.
pub fn exhaustive_search<F>(
    n_antennas: usize,
    n_patterns: usize,
    limit: u64,
    mut eval: F,
) -> Result<SearchResult>
where
    F: FnMut(&PatternAssignment) -> Result<f64>,
{
    check_space(n_antennas, n_patterns, 0)?;
    let mut total: u64 = 1;
    for _ in 0..n_antennas {
        total = total
            .checked_mul(n_patterns as u64)
            .filter(|t| *t <= limit)
            .ok_or_else(|| {
                Error::SearchSpace(format!(
                    "{n_patterns}^{n_antennas} assignments exceed the limit of {limit}"
                ))
            })?;
    }

    let mut assignment = PatternAssignment::uniform(n_antennas, 0);
    let mut best: Option<(PatternAssignment, f64)> = None;
    let mut evaluations = 0usize;
    loop {
        let se = eval(&assignment)?;
        evaluations += 1;
        if best.as_ref().is_none_or(|(_, s)| se > *s) {
            best = Some((assignment.clone(), se));
        }
        // Advance the odometer; the last antenna is the least significant
        // digit, so enumeration is lexicographic.
        let mut pos = n_antennas;
        loop {
            if pos == 0 {
                let (assignment, se) = best.unwrap();
                return Ok(SearchResult {
                    assignment,
                    se,
                    evaluations,
                    iteration_trace: vec![se],
                    truncated: false,
                });
            }
            pos -= 1;
            let next = assignment.get(pos) + 1;
            if next < n_patterns {
                assignment.set(pos, next);
                break;
            }
            assignment.set(pos, 0);
        }
    }
}

/// Best of `budget` uniformly drawn assignments; draw 0 is always the
/// all-legacy assignment. Deterministic in `seed`.
pub fn random_search<F>(
    n_antennas: usize,
    n_patterns: usize,
    legacy_index: usize,
    budget: usize,
    seed: u64,
    mut eval: F,
) -> Result<SearchResult>
where
    F: FnMut(&PatternAssignment) -> Result<f64>,
{
    check_space(n_antennas, n_patterns, legacy_index)?;
    if budget == 0 {
        return Err(Error::Config("random search budget must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignment = PatternAssignment::uniform(n_antennas, legacy_index);
    let mut best_se = eval(&assignment)?;
    let mut best = assignment.clone();
    for _ in 1..budget {
        for a in 0..n_antennas {
            assignment.set(a, rng.random_range(0..n_patterns));
        }
        let se = eval(&assignment)?;
        if se > best_se {
            best_se = se;
            best = assignment.clone();
        }
    }
    Ok(SearchResult {
        assignment: best,
        se: best_se,
        evaluations: budget,
        iteration_trace: vec![best_se],
        truncated: false,
    })
}

fn check_space(n_antennas: usize, n_patterns: usize, legacy_index: usize) -> Result<()> {
    if n_antennas == 0 {
        return Err(Error::Config("search needs at least one antenna".into()));
    }
    if n_patterns == 0 {
        return Err(Error::Config("search needs at least one pattern".into()));
    }
    if legacy_index >= n_patterns {
        return Err(Error::Config(format!(
            "legacy index {legacy_index} out of range for {n_patterns} patterns"
        )));
    }
    Ok(())
}

/// The SE objective evaluated by the searches: full hybrid precoding of the
/// scheduled users' channel under a candidate pattern assignment.
pub struct SeObjective<'a> {
    pub channel: &'a ChannelRealization,
    pub scheduled: &'a [usize],
    pub set: &'a PatternSet,
    pub arch: ArchSpec,
    pub geom: &'a ArrayGeometry,
    /// Transmit power per subcarrier.
    pub total_power: f64,
}

impl SeObjective<'_> {
    pub fn evaluate(&self, assignment: &PatternAssignment) -> Result<f64> {
        let channels = self.channel.channel_matrices(self.scheduled, assignment);
        let (_, _, se) = hybrid_precode(
            &channels,
            &self.arch,
            self.geom,
            self.total_power,
            self.channel.noise_power,
        )?;
        Ok(se.total)
    }

    fn dims(&self) -> (usize, usize, usize) {
        (
            self.channel.n_elements(),
            self.set.cardinality(),
            self.set.legacy_index(),
        )
    }
}

/// Greedy pattern search over a channel realization.
pub fn greedy_emr_search(obj: &SeObjective<'_>, cfg: &SearchConfig) -> Result<SearchResult> {
    let (n, p, legacy) = obj.dims();
    greedy_search(n, p, legacy, cfg, |a| obj.evaluate(a))
}

/// Exhaustive pattern search; the optimality oracle for tiny instances.
pub fn exhaustive_emr_search(obj: &SeObjective<'_>, limit: u64) -> Result<SearchResult> {
    let (n, p, _) = obj.dims();
    exhaustive_search(n, p, limit, |a| obj.evaluate(a))
}

/// Seeded random pattern search baseline.
pub fn random_emr_search(obj: &SeObjective<'_>, budget: usize, seed: u64) -> Result<SearchResult> {
    let (n, p, legacy) = obj.dims();
    random_search(n, p, legacy, budget, seed, |a| obj.evaluate(a))
}
