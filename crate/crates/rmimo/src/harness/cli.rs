//! Command-line interface: one subcommand per packaged experiment.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::error::Result;
use crate::harness::config::{Preset, ScenarioConfig};
use crate::harness::experiments::{bin_by_region, run_fig1, run_multiuser, run_user_sweep};
use crate::harness::output::{
    write_cdf_csv, write_ee_csv, write_fig1_csv, write_manifest, write_regions_csv,
    write_trace_csv,
};
use crate::power_ee::Architecture;

#[derive(Parser)]
#[command(
    name = "rmimo",
    version,
    about = "Link-level simulator for pattern-reconfigurable massive MIMO downlink"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Free-space received-intensity sweep over element counts.
    Fig1(RunArgs),
    /// Per-region SE gains with one scheduled user per TTI.
    Regions(RunArgs),
    /// SE distributions per architecture and scheduled-user count.
    Cdf(RunArgs),
    /// Energy efficiency per architecture and scheduled-user count.
    Ee(RunArgs),
    /// User-defined scenario from a config file.
    Custom(RunArgs),
}

impl Command {
    fn preset(&self) -> Preset {
        match self {
            Command::Fig1(_) => Preset::Fig1,
            Command::Regions(_) => Preset::Regions,
            Command::Cdf(_) => Preset::Cdf,
            Command::Ee(_) => Preset::Ee,
            Command::Custom(_) => Preset::Custom,
        }
    }

    fn args(&self) -> &RunArgs {
        match self {
            Command::Fig1(a)
            | Command::Regions(a)
            | Command::Cdf(a)
            | Command::Ee(a)
            | Command::Custom(a) => a,
        }
    }
}

#[derive(Args)]
struct RunArgs {
    /// Scenario config file (TOML); missing fields fall back to the
    /// preset's defaults.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Base seed override.
    #[arg(long)]
    seed: Option<u64>,

    /// Monte Carlo trial count override.
    #[arg(long)]
    trials: Option<usize>,

    /// Output directory for CSV files and the run manifest.
    #[arg(long, default_value = "out")]
    out: PathBuf,

    /// Comma-separated architectures (fda_t, sca_t, sca_r).
    #[arg(long, value_delimiter = ',')]
    arch: Option<Vec<Architecture>>,

    /// Scheduled users per TTI; also collapses swept user counts to this
    /// single value.
    #[arg(long)]
    users: Option<usize>,
}

fn resolve_config(preset: Preset, args: &RunArgs) -> Result<ScenarioConfig> {
    let mut cfg = match &args.config {
        Some(path) => ScenarioConfig::load(path, preset)?,
        None => ScenarioConfig::for_preset(preset),
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(trials) = args.trials {
        cfg.trials = trials;
    }
    if let Some(users) = args.users {
        cfg.users_per_tti = users;
        cfg.user_counts = vec![users];
    }
    if let Some(arch) = &args.arch {
        cfg.architectures = arch.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(command: &Command) -> Result<()> {
    let preset = command.preset();
    let args = command.args();
    let cfg = resolve_config(preset, args)?;
    std::fs::create_dir_all(&args.out)?;

    match preset {
        Preset::Fig1 => {
            let rows = run_fig1(&cfg)?;
            write_fig1_csv(&args.out.join("fig1.csv"), &rows)?;
            for row in &rows {
                println!(
                    "{:>8}  N={:<5} mean intensity {:.6e}",
                    row.arch, row.n_elements, row.mean_intensity
                );
            }
        }
        Preset::Regions => {
            let mut records = Vec::new();
            for &arch in &cfg.architectures {
                records.extend(run_multiuser(&cfg, arch)?);
            }
            let summary = bin_by_region(&records);
            write_regions_csv(&args.out.join("regions.csv"), &summary)?;
            for row in &summary.rows {
                println!(
                    "{:>6}  {:<7} mean SE {:.4} bits/s/Hz over {} TTIs",
                    row.arch.label(),
                    row.region,
                    row.mean_se,
                    row.n
                );
            }
            for (region, gain) in &summary.gains {
                println!("gain {region:<7} SCA_R - SCA_T = {gain:+.4} bits/s/Hz");
            }
        }
        Preset::Cdf => {
            let records = run_user_sweep(&cfg)?;
            write_cdf_csv(&args.out.join("cdf.csv"), &records, &cfg)?;
            write_trace_csv(&args.out.join("trace.csv"), &records)?;
            println!(
                "wrote {} CDF samples for {} architectures x {} user counts",
                records.len(),
                cfg.architectures.len(),
                cfg.user_counts.len()
            );
        }
        Preset::Ee => {
            let records = run_user_sweep(&cfg)?;
            write_ee_csv(&args.out.join("ee.csv"), &records, &cfg)?;
        }
        Preset::Custom => {
            let records = run_user_sweep(&cfg)?;
            write_cdf_csv(&args.out.join("cdf.csv"), &records, &cfg)?;
            write_ee_csv(&args.out.join("ee.csv"), &records, &cfg)?;
            write_trace_csv(&args.out.join("trace.csv"), &records)?;
            if cfg.user_counts.iter().all(|&u| u == 1) {
                write_regions_csv(&args.out.join("regions.csv"), &bin_by_region(&records))?;
            }
        }
    }

    write_manifest(&args.out.join("run_manifest.toml"), &cfg, preset.name())?;
    println!("outputs written to {}", args.out.display());
    Ok(())
}

/// Entry point shared by the binary and the tests; returns the process exit
/// code.
pub fn cli_main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    match run(&cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bad_flags_and_bad_configs_fail_nonzero() {
        assert_ne!(cli_main(["rmimo", "bogus"]), 0);
        assert_ne!(
            cli_main(["rmimo", "cdf", "--config", "/nonexistent/zz.toml"]),
            0
        );
        // users > m_t is a configuration error surfaced before any trial
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("o");
        assert_ne!(
            cli_main([
                "rmimo",
                "cdf",
                "--users",
                "64",
                "--out",
                out.to_str().unwrap()
            ]),
            0
        );
    }

    #[test]
    fn fig1_writes_csv_and_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let cfg_path = dir.path().join("s.toml");
        std::fs::write(&cfg_path, "[fig1]\ndraws = 25\nn_sweep = [2, 4]\ndense_reference_n = 32\n")
            .unwrap();
        let out = dir.path().join("out");
        let code = cli_main([
            "rmimo",
            "fig1",
            "--config",
            cfg_path.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code, 0);
        let csv = std::fs::read_to_string(out.join("fig1.csv")).unwrap();
        assert!(csv.starts_with("arch,n_elements,mean_intensity,std_intensity,draws\n"));
        assert_eq!(csv.lines().count(), 1 + 2 * 2 + 1);
        assert!(out.join("run_manifest.toml").exists());
    }
}
