//! CSV emission and the reproducibility manifest.
//!
//! Headers and row order are part of the output contract; floats use Rust's
//! shortest round-trip formatting so identical runs produce byte-identical
//! files.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::harness::config::ScenarioConfig;
use crate::harness::experiments::{aggregate_cdf, Fig1Row, RegionSummary, TrialRecord};
use crate::power_ee::energy_efficiency;

fn write_file(path: &Path, content: &str) -> Result<()> {
    std::fs::write(path, content)?;
    Ok(())
}

pub fn write_fig1_csv(path: &Path, rows: &[Fig1Row]) -> Result<()> {
    let mut out = String::from("arch,n_elements,mean_intensity,std_intensity,draws\n");
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{}",
            r.arch, r.n_elements, r.mean_intensity, r.std_intensity, r.draws
        )
        .unwrap();
    }
    write_file(path, &out)
}

pub fn write_regions_csv(path: &Path, summary: &RegionSummary) -> Result<()> {
    let mut out = String::from("arch,region,mean_se,n\n");
    for r in &summary.rows {
        writeln!(out, "{},{},{},{}", r.arch, r.region, r.mean_se, r.n).unwrap();
    }
    write_file(path, &out)
}

/// One empirical CDF per (architecture, scheduled-user count), in the
/// configured architecture and user-count order.
pub fn write_cdf_csv(path: &Path, records: &[TrialRecord], cfg: &ScenarioConfig) -> Result<()> {
    let mut out = String::from("arch,users,se,cum_prob\n");
    for &arch in &cfg.architectures {
        for &users in &cfg.user_counts {
            let samples: Vec<f64> = records
                .iter()
                .filter(|r| r.arch == arch && r.users_per_tti == users)
                .map(|r| r.se)
                .collect();
            if samples.is_empty() {
                continue;
            }
            for (se, p) in aggregate_cdf(&samples)? {
                writeln!(out, "{},{},{},{}", arch, users, se, p).unwrap();
            }
        }
    }
    write_file(path, &out)
}

/// Mean SE and energy efficiency per (architecture, scheduled-user count).
pub fn write_ee_csv(path: &Path, records: &[TrialRecord], cfg: &ScenarioConfig) -> Result<()> {
    let mut out = String::from("arch,users,mean_se,total_power_w,ee\n");
    for &arch in &cfg.architectures {
        for &users in &cfg.user_counts {
            let samples: Vec<f64> = records
                .iter()
                .filter(|r| r.arch == arch && r.users_per_tti == users)
                .map(|r| r.se)
                .collect();
            if samples.is_empty() {
                continue;
            }
            let mean_se = samples.iter().sum::<f64>() / samples.len() as f64;
            let ee = energy_efficiency(mean_se, arch, cfg.n_t, cfg.m_t, &cfg.power)?;
            writeln!(
                out,
                "{},{},{},{},{}",
                arch, users, mean_se, ee.total_power_w, ee.ee
            )
            .unwrap();
        }
    }
    write_file(path, &out)
}

/// Per-sweep SE of the greedy pattern search, one row per iteration, for
/// convergence plots. Fixed-pattern architectures have no trace and emit no
/// rows.
pub fn write_trace_csv(path: &Path, records: &[TrialRecord]) -> Result<()> {
    let mut out = String::from("arch,users,trial,tti,iteration,se\n");
    for r in records {
        for (i, se) in r.se_trace.iter().enumerate() {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                r.arch, r.users_per_tti, r.trial, r.tti, i, se
            )
            .unwrap();
        }
    }
    write_file(path, &out)
}

#[derive(Serialize)]
struct Manifest<'a> {
    library_version: &'static str,
    command: &'a str,
    scenario: &'a ScenarioConfig,
}

/// Full resolved configuration plus library version, enough to reproduce
/// the run byte for byte.
pub fn write_manifest(path: &Path, cfg: &ScenarioConfig, command: &str) -> Result<()> {
    let manifest = Manifest {
        library_version: crate::VERSION,
        command,
        scenario: cfg,
    };
    let text = toml::to_string_pretty(&manifest)
        .map_err(|e| Error::Config(format!("serialize manifest: {e}")))?;
    write_file(path, &text)
}
