//! Command-line front end. [`run`] returns the process exit status.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::capacity::oracle_check;
use crate::channel::{ChannelKind, KrausChannel};
use crate::config::{Grid, RunConfig};
use crate::error::{Error, Result};
use crate::io::{
    emit_plot_data, emit_report, ingest_table, recompute_from_table, theory_curve, theory_point, write_theory,
    ChannelFamily, PointReport, ReportFormat, DEFAULT_DRAWS,
};
use crate::qubit::Axis;
use crate::reconstruct::Sanitization;
use crate::simulate::{
    ad_angle_inverse, expected_counts, joint_probabilities, pauli_mixture_counts, sample_counts_with, CoincidenceSet,
};
use crate::uncertainty::{ad_angle_uncertainty, estimate, mc_capacity_distribution, trial_rng};

#[derive(Debug, Parser)]
#[command(name = "qcapwit", version, about = "Capacity witnesses for noisy qubit channels")]
struct Cli {
    /// Seed for every random draw.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory [default: $QCAPWIT_OUT_DIR or ./out].
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// How negative reconstructed probabilities are removed.
    #[arg(long, global = true)]
    sanitization: Option<Sanitization>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Closed-form capacity curves of the ideal channel.
    Theory {
        #[arg(long)]
        channel: ChannelFamily,
        /// start:stop:step [default: 201 points over the parameter range].
        #[arg(long)]
        grid: Option<Grid>,
    },
    /// Simulated experiment: probe, channel, counts, reconstruction, Monte Carlo error bars.
    Simulate {
        /// Flat key = value run configuration; flags override it.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        channel: Option<ChannelFamily>,
        #[arg(long)]
        grid: Option<Grid>,
        #[arg(long)]
        fidelity: Option<f64>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        flux: Option<f64>,
        #[arg(long)]
        integration_time: Option<f64>,
        #[arg(long)]
        format: Option<ReportFormat>,
    },
    /// Recompute capacities from tabulated conditional probabilities.
    Reproduce {
        #[arg(long, required = true)]
        table: Vec<PathBuf>,
        /// Channel family [default: inferred from the file name].
        #[arg(long)]
        channel: Option<ChannelFamily>,
        /// Gaussian resamples per row.
        #[arg(long, default_value_t = DEFAULT_DRAWS)]
        draws: usize,
        #[arg(long, default_value_t = ReportFormat::Csv)]
        format: ReportFormat,
    },
    /// Closed-form binary capacity against the grid-search oracle.
    OracleCheck {
        #[arg(long, default_value_t = 1000)]
        samples: usize,
    },
}

/// Parses `argv` (including the program name), runs the subcommand, and
/// maps failures to exit codes: 1 usage, 2 data, 3 numerical.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(summary) => {
            print!("{summary}");
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cli: Cli) -> Result<String> {
    let seed = cli.seed;
    let out_flag = cli.out_dir;
    let out_dir = out_flag.clone().unwrap_or_else(crate::config::default_out_dir);
    let mode = cli.sanitization;
    match cli.command {
        Command::Theory { channel, grid } => {
            let grid = grid.map_or_else(|| crate::io::default_theory_grid(channel), |g| g.values());
            let curve = theory_curve(channel, &grid)?;
            let path = out_dir.join(format!("theory_{channel}.dat"));
            write_theory(&path, channel, &curve)?;
            Ok(format!("{} rows -> {}\n", curve.len(), path.display()))
        }
        Command::Simulate {
            config,
            channel,
            grid,
            fidelity,
            trials,
            flux,
            integration_time,
            format,
        } => {
            let mut cfg = match &config {
                Some(p) => RunConfig::load(p)?,
                None => RunConfig::default(),
            };
            // Explicit flags win over the file; the file wins over defaults.
            cfg.seed = seed.unwrap_or(cfg.seed);
            cfg.out_dir = out_flag.unwrap_or(cfg.out_dir);
            cfg.sanitization = mode.unwrap_or(cfg.sanitization);
            cfg.channel = channel.unwrap_or(cfg.channel);
            cfg.grid = grid.unwrap_or(cfg.grid);
            cfg.fidelity = fidelity.unwrap_or(cfg.fidelity);
            cfg.trials = trials.unwrap_or(cfg.trials);
            cfg.flux = flux.unwrap_or(cfg.flux);
            cfg.integration_time = integration_time.unwrap_or(cfg.integration_time);
            cfg.format = format.unwrap_or(cfg.format);
            cfg.validate()?;
            simulate_command(&cfg)
        }
        Command::Reproduce {
            table,
            channel,
            draws,
            format,
        } => {
            let mut summary = String::new();
            for path in &table {
                let family = match channel {
                    Some(c) => c,
                    None => infer_family(path)?,
                };
                summary += &reproduce_command(
                    path,
                    family,
                    mode.unwrap_or_default(),
                    draws,
                    seed.unwrap_or(1),
                    format,
                    &out_dir,
                )?;
            }
            Ok(summary)
        }
        Command::OracleCheck { samples } => {
            let s = oracle_check(samples, seed.unwrap_or(1));
            let ok = s.max_capacity_dev <= 1e-8 && s.max_prior_dev <= 1e-4;
            let text = format!(
                "samples: {}\nmax |C_B - brute force| = {:.3e}\nmax |p0 - argmax| = {:.3e}\n",
                s.samples, s.max_capacity_dev, s.max_prior_dev
            );
            if ok {
                Ok(text)
            } else {
                Err(Error::Optimization(format!("oracle mismatch at {:?}\n{text}", s.worst)))
            }
        }
    }
}

fn infer_family(path: &Path) -> Result<ChannelFamily> {
    path.file_stem()
        .and_then(|s| s.to_str())
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::Config(format!("cannot infer channel from {}; pass --channel", path.display())))
}

/// Expected counts of every axis at parameter `param`. Pauli channels are
/// realized as a mixture of unitary settings, amplitude damping directly.
pub fn expected_axis_counts(cfg: &RunConfig, param: f64) -> Result<Vec<CoincidenceSet>> {
    let kind = cfg.channel.kind(param)?;
    Axis::ALL
        .iter()
        .map(|&axis| match kind {
            ChannelKind::Pauli(p) => {
                pauli_mixture_counts(p, cfg.fidelity, axis, &cfg.efficiency, cfg.flux, cfg.integration_time)
            }
            ChannelKind::AmplitudeDamping { .. } => {
                let p = joint_probabilities(&KrausChannel::from_kind(kind)?, cfg.fidelity, axis)?;
                expected_counts(axis, &p, &cfg.efficiency, cfg.flux, cfg.integration_time)
            }
        })
        .collect()
}

/// Seed of grid point `k`.
fn point_seed(seed: u64, k: usize) -> u64 {
    seed ^ (k as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// One simulated acquisition per grid point with Monte Carlo error bars.
pub fn simulate_points(cfg: &RunConfig) -> Result<Vec<PointReport>> {
    cfg.grid
        .values()
        .iter()
        .enumerate()
        .map(|(k, &param)| {
            let seed = point_seed(cfg.seed, k);
            let expected = expected_axis_counts(cfg, param)?;
            // The acquisition itself uses a stream no Monte Carlo trial touches.
            let mut rng = trial_rng(seed, u64::MAX);
            let measured: Vec<CoincidenceSet> = expected.iter().map(|e| sample_counts_with(e, &mut rng)).collect();
            let (_, mut report) = estimate(&measured, cfg.fidelity, cfg.sanitization)?;
            mc_capacity_distribution(&expected, cfg.fidelity, cfg.trials, seed, cfg.sanitization)?
                .annotate(&mut report);
            let param_std = match cfg.channel {
                ChannelFamily::Ad => Some(ad_angle_uncertainty(ad_angle_inverse(param)?, cfg.delta_omega)?),
                _ => None,
            };
            Ok(PointReport {
                param,
                param_std,
                report,
            })
        })
        .collect()
}

fn simulate_command(cfg: &RunConfig) -> Result<String> {
    let points = simulate_points(cfg)?;
    let family = cfg.channel;
    let report = cfg
        .out_dir
        .join(format!("simulate_{family}.{}", cfg.format.extension()));
    emit_report(&points, cfg.format, &report)?;
    let (data, theory) = emit_plot_data(&points, family, &cfg.out_dir)?;
    let mut s = format!("# {family}: param C_D ± std (theory)\n");
    for p in &points {
        let t = theory_point(family, p.param)?;
        let _ = writeln!(
            s,
            "{:.4} {:.5} ± {:.5} ({:.5})",
            p.param,
            p.report.c_d,
            p.report.c_d_std.unwrap_or(0.0),
            t.cd
        );
    }
    let _ = writeln!(
        s,
        "wrote {}, {}, {}",
        report.display(),
        data.display(),
        theory.display()
    );
    Ok(s)
}

fn reproduce_command(
    path: &Path,
    family: ChannelFamily,
    mode: Sanitization,
    draws: usize,
    seed: u64,
    format: ReportFormat,
    out_dir: &Path,
) -> Result<String> {
    let rows = ingest_table(path, family)?;
    for row in &rows {
        for w in row.consistency_warnings() {
            eprintln!("warning: {}: {w}", path.display());
        }
    }
    let points = recompute_from_table(&rows, mode, draws, seed)?;
    let report = out_dir.join(format!("reproduce_{family}.{}", format.extension()));
    emit_report(&points, format, &report)?;
    let (data, theory) = emit_plot_data(&points, family, out_dir)?;

    // Amplitude-damping rows duplicate depolarizing data in the source, so
    // that comparison is informational only.
    let note = if family == ChannelFamily::Ad {
        "informational"
    } else {
        ""
    };
    let compare = out_dir.join(format!("compare_{family}.csv"));
    let mut text = String::from("param,c_d,c_d_std,theory_c_d,z_score,note\n");
    for p in &points {
        let t = theory_point(family, p.param)?;
        let std = p.report.c_d_std.unwrap_or(0.0);
        let z = if std > 0.0 {
            (p.report.c_d - t.cd) / std
        } else {
            f64::NAN
        };
        let _ = writeln!(
            text,
            "{},{},{},{},{},{note}",
            crate::io::sig6(p.param),
            crate::io::sig6(p.report.c_d),
            crate::io::sig6(std),
            crate::io::sig6(t.cd),
            crate::io::sig6(z)
        );
    }
    std::fs::write(&compare, text).map_err(|e| Error::io(&compare, e))?;
    Ok(format!(
        "{}: {} rows -> {}, {}, {}, {}\n",
        path.display(),
        rows.len(),
        report.display(),
        compare.display(),
        data.display(),
        theory.display()
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(out: &Path, rest: &[&str]) -> Vec<String> {
        let mut v = vec!["qcapwit".to_string(), "--out-dir".into(), out.display().to_string()];
        v.extend(rest.iter().map(|s| s.to_string()));
        v
    }

    #[test]
    fn theory_subcommand() {
        let dir = tempfile::tempdir().unwrap();
        assert_eq!(
            run(args(dir.path(), &["theory", "--channel", "ad", "--grid", "0:1:0.05"])),
            0
        );
        let text = std::fs::read_to_string(dir.path().join("theory_ad.dat")).unwrap();
        let rows: Vec<&str> = text.lines().skip(1).collect();
        assert_eq!(rows.len(), 21);
        assert_eq!(rows[0].split(' ').nth(4), Some("1"));
    }

    #[test]
    fn usage_errors() {
        let dir = tempfile::tempdir().unwrap();
        assert_eq!(run(args(dir.path(), &["bogus"])), 1);
        assert_eq!(run(args(dir.path(), &["theory", "--channel", "xy"])), 1);
        assert_eq!(run(args(dir.path(), &["simulate", "--trials", "2"])), 1);
        assert_eq!(run(["qcapwit", "--help"]), 0);
    }

    #[test]
    fn data_errors() {
        let dir = tempfile::tempdir().unwrap();
        let empty = dir.path().join("pd.csv");
        std::fs::write(&empty, "").unwrap();
        assert_eq!(
            run(args(dir.path(), &["reproduce", "--table", empty.to_str().unwrap()])),
            2
        );
        let missing = dir.path().join("d.csv");
        assert_eq!(
            run(args(dir.path(), &["reproduce", "--table", missing.to_str().unwrap()])),
            2
        );
    }

    #[test]
    fn family_inference() {
        assert_eq!(infer_family(Path::new("tables/pd.csv")).unwrap(), ChannelFamily::Pd);
        assert!(infer_family(Path::new("x.csv")).is_err());
    }
}
