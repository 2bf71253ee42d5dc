//! The packaged experiments: user drops, scheduling, Monte Carlo trial
//! loops, and aggregation.

use std::time::Instant;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::channel::{
    load_ue_positions, place_dual_pol_ula, place_ula, ArrayGeometry, ChannelRealization,
    PatternAssignment, Ue,
};
use crate::emr_search::{greedy_emr_search, SeObjective};
use crate::error::{Error, Result};
use crate::harness::config::ScenarioConfig;
use crate::patterns::{rotate_dipole, Direction, PatternSpec, DIPOLE_DIRECTIVITY};
use crate::power_ee::{energy_efficiency, Architecture};
use crate::precoding::{hybrid_precode, ArchSpec};
use crate::seeds::derive_seed;

/// Seed-stream tags so the drop, the channel, and the free-space targets
/// never share random draws.
const UE_STREAM: u64 = 1;
const CHANNEL_STREAM: u64 = 2;
const FIG1_STREAM: u64 = 3;

/// Geographic region boundaries (horizontal distance, meters); bins are
/// left-closed, right-open, except the far bin which includes the cell edge.
pub const REGION_NEAR_MAX_M: f64 = 100.0;
pub const REGION_MIDDLE_MAX_M: f64 = 200.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Region {
    Near,
    Middle,
    Far,
}

impl Region {
    pub fn label(&self) -> &'static str {
        match self {
            Region::Near => "near",
            Region::Middle => "middle",
            Region::Far => "far",
        }
    }
}

/// Classifies a horizontal distance, or `None` outside the cell.
pub fn classify_region(distance_m: f64, cfg: &ScenarioConfig) -> Option<Region> {
    if distance_m < cfg.cell_radius_min_m || distance_m > cfg.cell_radius_max_m {
        return None;
    }
    Some(if distance_m < REGION_NEAR_MAX_M {
        Region::Near
    } else if distance_m < REGION_MIDDLE_MAX_M {
        Region::Middle
    } else {
        Region::Far
    })
}

/// Round-robin scheduling: TTI t serves users `(t*U + i) mod pool` for
/// i in 0..U, so a full cycle schedules every user equally often.
pub fn round_robin_schedule(pool_size: usize, users: usize, tti: usize) -> Result<Vec<usize>> {
    if users == 0 || users > pool_size {
        return Err(Error::Config(format!(
            "cannot schedule {users} users out of {pool_size}"
        )));
    }
    Ok((0..users).map(|i| (tti * users + i) % pool_size).collect())
}

/// One scheduled TTI of one architecture.
#[derive(Clone, Debug)]
pub struct TrialRecord {
    /// Trial-level derived seed, shared by all architectures.
    pub seed: u64,
    pub trial: usize,
    pub tti: usize,
    pub arch: Architecture,
    pub users_per_tti: usize,
    pub scheduled: Vec<usize>,
    pub scheduled_distances: Vec<f64>,
    pub se: f64,
    pub ee: f64,
    pub total_power_w: f64,
    /// How many antennas ended up on each pattern index.
    pub pattern_histogram: Vec<usize>,
    /// Region of the served user when exactly one is scheduled.
    pub region: Option<Region>,
    /// SE evaluations spent by the pattern search (0 for fixed patterns).
    pub evaluations: usize,
    /// SE after each greedy sweep; empty for fixed-pattern architectures.
    pub se_trace: Vec<f64>,
    pub wall_time_ms: f64,
}

/// Builds the transmit array of the multi-user scenario.
pub fn build_geometry(cfg: &ScenarioConfig) -> Result<ArrayGeometry> {
    let lambda = cfg.channel.wavelength();
    let spacing = cfg.element_spacing_wavelengths * lambda;
    if cfg.dual_polarized {
        place_dual_pol_ula(cfg.n_t / 2, spacing, cfg.m_t, lambda)
    } else {
        place_ula(
            cfg.n_t,
            spacing * (cfg.n_t.max(2) - 1) as f64,
            lambda,
        )?
        .with_rf_chains(cfg.m_t)
    }
}

/// Drops `ue_count` users uniformly by area over the sector annulus, each
/// independently indoor with the configured probability.
pub fn drop_ues(cfg: &ScenarioConfig, seed: u64) -> Vec<Ue> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r2_min = cfg.cell_radius_min_m * cfg.cell_radius_min_m;
    let r2_max = cfg.cell_radius_max_m * cfg.cell_radius_max_m;
    let sector = cfg.sector_deg.to_radians();
    (0..cfg.ue_count)
        .map(|_| {
            let r = (r2_min + rng.random::<f64>() * (r2_max - r2_min)).sqrt();
            let theta = (rng.random::<f64>() - 0.5) * sector;
            let indoor = rng.random::<f64>() < cfg.indoor_ratio;
            Ue {
                position: [r * theta.cos(), r * theta.sin(), 0.0],
                indoor,
            }
        })
        .collect()
}

fn arch_spec(arch: Architecture, cfg: &ScenarioConfig) -> ArchSpec {
    match arch {
        Architecture::FdaT => ArchSpec::FullyDigital,
        Architecture::ScaT | Architecture::ScaR => ArchSpec::SubConnected {
            phase_bits: cfg.phase_bits,
        },
    }
}

fn pattern_histogram(assignment: &PatternAssignment, cardinality: usize) -> Vec<usize> {
    let mut hist = vec![0usize; cardinality];
    for &p in assignment.indices() {
        hist[p] += 1;
    }
    hist
}

/// SE, pattern histogram, and search-evaluation count of one TTI. A
/// rank-deficient scheduling set degrades deterministically by dropping the
/// last-scheduled user and retrying.
fn evaluate_tti(
    cfg: &ScenarioConfig,
    chan: &ChannelRealization,
    geom: &ArrayGeometry,
    arch: Architecture,
    scheduled: &[usize],
) -> Result<(f64, Vec<usize>, usize, Vec<f64>)> {
    let set = &cfg.patterns;
    let p_sc = cfg.tx_power_per_subcarrier();
    let spec = arch_spec(arch, cfg);
    let legacy = PatternAssignment::uniform(geom.n_elements(), set.legacy_index());
    let mut sched = scheduled.to_vec();
    loop {
        let outcome = if arch == Architecture::ScaR {
            let obj = SeObjective {
                channel: chan,
                scheduled: &sched,
                set,
                arch: spec,
                geom,
                total_power: p_sc,
            };
            greedy_emr_search(&obj, &cfg.search.to_search_config()).map(|r| {
                let hist = pattern_histogram(&r.assignment, set.cardinality());
                (r.se, hist, r.evaluations, r.iteration_trace)
            })
        } else {
            let channels = chan.channel_matrices(&sched, &legacy);
            hybrid_precode(&channels, &spec, geom, p_sc, chan.noise_power).map(|(_, _, se)| {
                (se.total, pattern_histogram(&legacy, set.cardinality()), 0, Vec::new())
            })
        };
        match outcome {
            Ok(v) => return Ok(v),
            Err(Error::Singular(_)) if sched.len() > 1 => {
                sched.pop();
            }
            Err(Error::Singular(_)) => {
                return Ok((0.0, pattern_histogram(&legacy, set.cardinality()), 0, Vec::new()))
            }
            Err(e) => return Err(e),
        }
    }
}

fn run_trial(
    cfg: &ScenarioConfig,
    geom: &ArrayGeometry,
    arch: Architecture,
    trial: usize,
    fixed_ues: Option<&[Ue]>,
) -> Result<Vec<TrialRecord>> {
    let trial_seed = derive_seed(cfg.seed, trial as u64);
    let ues: Vec<Ue> = match fixed_ues {
        Some(u) => u.to_vec(),
        None => drop_ues(cfg, derive_seed(trial_seed, UE_STREAM)),
    };
    if ues.len() < cfg.users_per_tti {
        return Err(Error::Config(format!(
            "{} users in the pool but {} scheduled per TTI",
            ues.len(),
            cfg.users_per_tti
        )));
    }
    let chan = ChannelRealization::generate(
        &cfg.channel,
        geom,
        &cfg.patterns,
        &ues,
        derive_seed(trial_seed, CHANNEL_STREAM),
    )?;
    let mut records = Vec::with_capacity(cfg.ttis_per_trial);
    for tti in 0..cfg.ttis_per_trial {
        let scheduled = round_robin_schedule(ues.len(), cfg.users_per_tti, tti)?;
        let start = Instant::now();
        let (se, pattern_histogram, evaluations, se_trace) =
            evaluate_tti(cfg, &chan, geom, arch, &scheduled)?;
        let wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
        let ee = energy_efficiency(se, arch, cfg.n_t, cfg.m_t, &cfg.power)?;
        let scheduled_distances: Vec<f64> = scheduled
            .iter()
            .map(|&u| ues[u].horizontal_distance())
            .collect();
        let region = match scheduled_distances.as_slice() {
            [d] => classify_region(*d, cfg),
            _ => None,
        };
        records.push(TrialRecord {
            seed: trial_seed,
            trial,
            tti,
            arch,
            users_per_tti: cfg.users_per_tti,
            scheduled,
            scheduled_distances,
            se,
            ee: ee.ee,
            total_power_w: ee.total_power_w,
            pattern_histogram,
            region,
            evaluations,
            se_trace,
            wall_time_ms,
        });
    }
    Ok(records)
}

/// Runs the multi-user downlink scenario for one architecture. Trials are
/// independent (disjoint derived seeds) and execute in parallel; records
/// come back in (trial, tti) order regardless of thread scheduling.
pub fn run_multiuser(cfg: &ScenarioConfig, arch: Architecture) -> Result<Vec<TrialRecord>> {
    cfg.validate()?;
    let geom = build_geometry(cfg)?;
    let fixed_ues = match &cfg.ue_positions_file {
        Some(path) => Some(load_ue_positions(path)?),
        None => None,
    };
    let per_trial: Vec<Vec<TrialRecord>> = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| run_trial(cfg, &geom, arch, trial, fixed_ues.as_deref()))
        .collect::<Result<_>>()?;
    Ok(per_trial.into_iter().flatten().collect())
}

/// Runs every configured architecture at every swept user count.
pub fn run_user_sweep(cfg: &ScenarioConfig) -> Result<Vec<TrialRecord>> {
    let mut records = Vec::new();
    for &arch in &cfg.architectures {
        for &users in &cfg.user_counts {
            let mut sub = cfg.clone();
            sub.users_per_tti = users;
            records.extend(run_multiuser(&sub, arch)?);
        }
    }
    Ok(records)
}

/// One row of the free-space intensity comparison.
#[derive(Clone, Debug, PartialEq)]
pub struct Fig1Row {
    pub arch: &'static str,
    pub n_elements: usize,
    pub mean_intensity: f64,
    pub std_intensity: f64,
    pub draws: usize,
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Matched-filter received amplitude sqrt(P_t) * |h| at one target.
fn received_intensity(
    geom: &ArrayGeometry,
    patterns: &[PatternSpec],
    target: [f64; 3],
    sqrt_power: f64,
) -> Result<f64> {
    let h = crate::channel::free_space_channel(geom, patterns, target)?;
    Ok(sqrt_power * h.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt())
}

fn rotated_patterns(geom: &ArrayGeometry, target: [f64; 3]) -> Vec<PatternSpec> {
    geom.element_positions()
        .iter()
        .map(|pos| {
            let d = [target[0] - pos[0], target[1] - pos[1], target[2] - pos[2]];
            rotate_dipole(&Direction::from_vector(d))
        })
        .collect()
}

/// Free-space E-field comparison: fixed-dipole and per-element-rotated
/// arrays over the element-count sweep, plus the dense-discretization
/// reference, all averaged over the same random target draws.
pub fn run_fig1(cfg: &ScenarioConfig) -> Result<Vec<Fig1Row>> {
    cfg.validate()?;
    let lambda = cfg.channel.wavelength();
    let aperture = cfg.fig1.aperture_wavelengths * lambda;
    let sqrt_power = cfg.tx_power_watts().sqrt();
    let draws = cfg.fig1.draws;

    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, FIG1_STREAM));
    let [x0, x1] = cfg.fig1.target_x_m;
    let [y0, y1] = cfg.fig1.target_y_m;
    let targets: Vec<[f64; 3]> = (0..draws)
        .map(|_| {
            let x = x0 + rng.random::<f64>() * (x1 - x0);
            let y = y0 + rng.random::<f64>() * (y1 - y0);
            [x, y, 0.0]
        })
        .collect();

    let fixed =
        PatternSpec::hertz_dipole(cfg.fig1.fixed_dipole_axis, DIPOLE_DIRECTIVITY)?;

    let mut rows = Vec::new();
    for &n in &cfg.fig1.n_sweep {
        let geom = place_ula(n, aperture, lambda)?;
        let fixed_patterns = vec![fixed.clone(); n];
        let mut t_vals = Vec::with_capacity(draws);
        let mut r_vals = Vec::with_capacity(draws);
        for target in &targets {
            t_vals.push(received_intensity(&geom, &fixed_patterns, *target, sqrt_power)?);
            let rotated = rotated_patterns(&geom, *target);
            r_vals.push(received_intensity(&geom, &rotated, *target, sqrt_power)?);
        }
        let (t_mean, t_std) = mean_std(&t_vals);
        let (r_mean, r_std) = mean_std(&r_vals);
        rows.push(Fig1Row {
            arch: "T-mMIMO",
            n_elements: n,
            mean_intensity: t_mean,
            std_intensity: t_std,
            draws,
        });
        rows.push(Fig1Row {
            arch: "R-mMIMO",
            n_elements: n,
            mean_intensity: r_mean,
            std_intensity: r_std,
            draws,
        });
    }

    let n_dense = cfg.fig1.dense_reference_n;
    let geom = place_ula(n_dense, aperture, lambda)?;
    let h_vals: Vec<f64> = targets
        .par_iter()
        .map(|target| {
            let rotated = rotated_patterns(&geom, *target);
            received_intensity(&geom, &rotated, *target, sqrt_power)
        })
        .collect::<Result<_>>()?;
    let (h_mean, h_std) = mean_std(&h_vals);
    rows.push(Fig1Row {
        arch: "HMIMO",
        n_elements: n_dense,
        mean_intensity: h_mean,
        std_intensity: h_std,
        draws,
    });
    Ok(rows)
}

/// Per-region mean SE by architecture plus the reconfigurability gain
/// (SCA_R minus SCA_T) where both are present. Only single-user records
/// carry a region; empty regions are absent rather than zero.
#[derive(Clone, Debug, PartialEq)]
pub struct RegionRow {
    pub arch: Architecture,
    pub region: &'static str,
    pub mean_se: f64,
    pub n: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RegionSummary {
    pub rows: Vec<RegionRow>,
    pub gains: Vec<(&'static str, f64)>,
}

pub fn bin_by_region(records: &[TrialRecord]) -> RegionSummary {
    let buckets: [(&'static str, Option<Region>); 4] = [
        ("near", Some(Region::Near)),
        ("middle", Some(Region::Middle)),
        ("far", Some(Region::Far)),
        ("entire", None),
    ];
    let mut rows = Vec::new();
    let mut gains = Vec::new();
    for (label, wanted) in buckets {
        let mut per_arch: Vec<(Architecture, f64, usize)> = Vec::new();
        for arch in Architecture::ALL {
            let samples: Vec<f64> = records
                .iter()
                .filter(|r| {
                    r.arch == arch
                        && r.region.is_some()
                        && wanted.is_none_or(|w| r.region == Some(w))
                })
                .map(|r| r.se)
                .collect();
            if !samples.is_empty() {
                let mean = samples.iter().sum::<f64>() / samples.len() as f64;
                per_arch.push((arch, mean, samples.len()));
            }
        }
        let t = per_arch.iter().find(|(a, _, _)| *a == Architecture::ScaT);
        let r = per_arch.iter().find(|(a, _, _)| *a == Architecture::ScaR);
        if let (Some((_, t_mean, _)), Some((_, r_mean, _))) = (t, r) {
            gains.push((label, r_mean - t_mean));
        }
        rows.extend(per_arch.into_iter().map(|(arch, mean_se, n)| RegionRow {
            arch,
            region: label,
            mean_se,
            n,
        }));
    }
    RegionSummary { rows, gains }
}

/// Empirical CDF: sorted sample values paired with P(X <= x) in steps of
/// 1/n.
pub fn aggregate_cdf(samples: &[f64]) -> Result<Vec<(f64, f64)>> {
    if samples.is_empty() {
        return Err(Error::Config("empirical CDF of an empty sample".into()));
    }
    if samples.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("empirical CDF of a non-finite sample".into()));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len() as f64;
    Ok(sorted
        .into_iter()
        .enumerate()
        .map(|(i, v)| (v, (i + 1) as f64 / n))
        .collect())
}
