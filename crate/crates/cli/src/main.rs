//! Command-line surface: continuity analysis, the twist construction,
//! self-adjoint trivialization, gallery specs and reproducible reports.
//!
//! Exit codes: 0 on success, 2 on precondition errors, 3 on inconclusive
//! verdicts.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use rgl_core::family::{refine_until, RefinePolicy};
use rgl_core::gallery::{self, GeneratorName};
use rgl_core::phi::{phi_family, phi_family_scan};
use rgl_core::report::{LevelSummary, RunReport};
use rgl_core::trivialize::{make_riesz_continuous_sa, sa_scan};
use rgl_core::{FamilySpec, Metric, Tolerances, Verdict};

#[derive(Parser)]
#[command(name = "rgl", version, about = "Riesz/graph laboratory for operator families")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum MetricArg {
    Graph,
    Riesz,
    Both,
}

impl From<MetricArg> for Metric {
    fn from(m: MetricArg) -> Metric {
        match m {
            MetricArg::Graph => Metric::Graph,
            MetricArg::Riesz => Metric::Riesz,
            MetricArg::Both => Metric::Both,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Analyze a family's continuity in the chosen metric under grid
    /// refinement.
    Analyze {
        /// Family spec JSON.
        #[arg(long)]
        family: PathBuf,
        #[arg(long, value_enum, default_value = "both")]
        metric: MetricArg,
        /// Maximum number of grid doublings.
        #[arg(long, default_value_t = 8)]
        refine: usize,
        /// Override the algebraic tolerance (also via RGL_TOL).
        #[arg(long)]
        tol: Option<f64>,
        /// Override the spec's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Report directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Twist a family through its own frame and compare moduli per level.
    Phi {
        #[arg(long)]
        family: PathBuf,
        /// Number of grid doublings to scan.
        #[arg(long, default_value_t = 4)]
        refine: usize,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Conjugate a self-adjoint family through its spectral charts.
    Trivialize {
        #[arg(long)]
        family: PathBuf,
        /// Number of grid doublings to scan.
        #[arg(long, default_value_t = 2)]
        refine: usize,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write the canonical gallery family specs.
    Gallery {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Verify a run report: content hash and byte-level reproducibility.
    Report {
        /// Path to a run_report.json.
        #[arg(long)]
        family: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn tolerances(tol_flag: Option<f64>) -> Tolerances {
    let mut t = Tolerances::from_env();
    if let Some(v) = tol_flag {
        if v > 0.0 {
            t.algebraic = v;
        }
    }
    t
}

fn load_spec(path: &Path, seed: Option<u64>) -> anyhow::Result<FamilySpec> {
    let text = std::fs::read_to_string(path)?;
    let mut spec: FamilySpec = serde_json::from_str(&text)?;
    if seed.is_some() {
        spec.seed = seed;
    }
    Ok(spec)
}

fn write(out: &Path, name: &str, contents: &str) -> anyhow::Result<()> {
    std::fs::create_dir_all(out)?;
    std::fs::write(out.join(name), contents)?;
    Ok(())
}

fn run(command: Command) -> anyhow::Result<ExitCode> {
    match command {
        Command::Analyze {
            family,
            metric,
            refine,
            tol,
            seed,
            out,
        } => {
            let t = tolerances(tol);
            let spec = load_spec(&family, seed)?;
            let (report, run_report) = run_analyze(&spec, metric.into(), refine, &t)?;
            write(&out, "report.csv", &report.to_csv())?;
            let verdict_json = serde_json::json!({
                "schema": 1,
                "verdict": report.verdict,
                "history": report.history,
            });
            write(&out, "verdict.json", &serde_json::to_string_pretty(&verdict_json)?)?;
            write(&out, "run_report.json", &run_report.to_json_pretty()?)?;
            let last = report.final_level();
            println!(
                "verdict: {:?} (graph modulus {:.3e}, riesz modulus {}, {} levels)",
                report.verdict,
                last.graph_modulus,
                last.riesz_modulus
                    .map(|v| format!("{v:.3e}"))
                    .unwrap_or_else(|| "n/a".into()),
                report.history.len()
            );
            if report.verdict == Verdict::Inconclusive {
                return Ok(ExitCode::from(3));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Phi {
            family,
            refine,
            tol,
            seed,
            out,
        } => {
            let t = tolerances(tol);
            let spec = load_spec(&family, seed)?;
            let run_report = run_phi(&spec, refine, &t)?;
            let fam = gallery::family_from_spec(&spec)?;
            let levels = phi_family_scan(&fam, refine, &t)?;
            let mut csv = String::from(
                "depth,points,step,raw_graph_modulus,raw_riesz_modulus,twisted_riesz_modulus,identity_defect\n",
            );
            for l in &levels {
                csv.push_str(&format!(
                    "{},{},{},{},{},{},{}\n",
                    l.depth,
                    l.points,
                    l.step,
                    l.raw_graph_modulus,
                    l.raw_riesz_modulus.map(|v| v.to_string()).unwrap_or_default(),
                    l.twisted_riesz_modulus.map(|v| v.to_string()).unwrap_or_default(),
                    l.identity_defect
                ));
            }
            write(&out, "phi_levels.csv", &csv)?;
            let finest = phi_family(&fam, &t)?;
            write(&out, "phi_raw_nodes.csv", &rgl_core::family::rows_to_csv(&finest.raw.rows))?;
            write(
                &out,
                "phi_twisted_nodes.csv",
                &rgl_core::family::rows_to_csv(&finest.twisted.rows),
            )?;
            write(&out, "frame.json", &serde_json::to_string_pretty(&finest.frame)?)?;
            write(&out, "run_report.json", &run_report.to_json_pretty()?)?;
            let last = levels.last().expect("at least one level");
            println!(
                "phi: raw riesz {} → twisted riesz {} at step {:.3e} (identity defect {:.2e})",
                last.raw_riesz_modulus.map(|v| format!("{v:.3}")).unwrap_or_default(),
                last.twisted_riesz_modulus.map(|v| format!("{v:.3e}")).unwrap_or_default(),
                last.step,
                last.identity_defect
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Trivialize {
            family,
            refine,
            tol,
            seed,
            out,
        } => {
            let t = tolerances(tol);
            let spec = load_spec(&family, seed)?;
            let run_report = run_trivialize(&spec, refine, &t)?;
            let fam = gallery::family_from_spec(&spec)?;
            let levels = sa_scan(&fam, None, refine, &t)?;
            let mut csv = String::from(
                "depth,points,step,raw_riesz_modulus,conjugated_riesz_modulus,spectrum_deviation\n",
            );
            for l in &levels {
                csv.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    l.depth,
                    l.points,
                    l.step,
                    l.raw_riesz_modulus.map(|v| v.to_string()).unwrap_or_default(),
                    l.conjugated_riesz_modulus
                        .map(|v| v.to_string())
                        .unwrap_or_default(),
                    l.spectrum_deviation
                ));
            }
            write(&out, "trivialize_levels.csv", &csv)?;
            let triv = make_riesz_continuous_sa(&fam, None, &t)?;
            let frame_json = serde_json::json!({
                "schema": 1,
                "bypass": triv.bypass,
                "charts": triv.charts,
                "step_levels": triv.step_levels,
                "params": fam.grid().nodes(),
                "unitaries": triv
                    .conjugators
                    .iter()
                    .map(|u| rgl_core::cmatrix::MatrixJson(u.clone()))
                    .collect::<Vec<_>>(),
            });
            write(&out, "frame.json", &serde_json::to_string_pretty(&frame_json)?)?;
            write(&out, "raw_nodes.csv", &rgl_core::family::rows_to_csv(&triv.raw.rows))?;
            write(
                &out,
                "conjugated_nodes.csv",
                &rgl_core::family::rows_to_csv(&triv.conjugated.rows),
            )?;
            write(&out, "run_report.json", &run_report.to_json_pretty()?)?;
            match triv.bypass {
                Some(sign) => println!(
                    "trivialize: {sign:?} family returned unchanged (Riesz continuous in every trivialization)"
                ),
                None => println!(
                    "trivialize: raw riesz {} → conjugated riesz {} (spectra preserved to {:.2e})",
                    triv.raw.riesz_modulus.map(|v| format!("{v:.3}")).unwrap_or_default(),
                    triv.conjugated
                        .riesz_modulus
                        .map(|v| format!("{v:.3e}"))
                        .unwrap_or_default(),
                    triv.spectrum_deviation
                ),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Gallery { out, seed } => {
            std::fs::create_dir_all(&out)?;
            for name in GeneratorName::ALL {
                let spec = gallery::canonical_spec(name, seed);
                let path = out.join(format!("{}.json", name.as_str()));
                std::fs::write(&path, serde_json::to_string_pretty(&spec)?)?;
                println!("wrote {}", path.display());
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Report { family } => {
            let text = std::fs::read_to_string(&family)?;
            let report = RunReport::from_json(&text)?;
            let integrity = report.verify_hash();
            println!("stored hash:   {}", report.content_hash);
            println!("integrity:     {}", if integrity { "ok" } else { "MISMATCH" });
            let t = report.tolerances;
            let rerun = match report.command.as_str() {
                "analyze" => {
                    let metric = report.metric.unwrap_or(Metric::Both);
                    run_analyze(&report.spec, metric, report.refine, &t)?.1
                }
                "phi" => run_phi(&report.spec, report.refine, &t)?,
                "trivialize" => run_trivialize(&report.spec, report.refine, &t)?,
                other => anyhow::bail!("unknown command in report: {other}"),
            };
            let reproducible = rerun.content_hash == report.content_hash;
            println!("re-run hash:   {}", rerun.content_hash);
            println!("reproducible:  {}", if reproducible { "ok" } else { "MISMATCH" });
            if integrity && reproducible {
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::from(2))
            }
        }
    }
}

fn run_analyze(
    spec: &FamilySpec,
    metric: Metric,
    refine: usize,
    t: &Tolerances,
) -> anyhow::Result<(rgl_core::ContinuityReport, RunReport)> {
    let fam = gallery::family_from_spec(spec)?;
    let policy = RefinePolicy {
        max_depth: refine,
        ..RefinePolicy::default()
    };
    let report = refine_until(&fam, metric, &policy, t)?;
    let history: Vec<LevelSummary> = report
        .history
        .iter()
        .map(|l| LevelSummary {
            depth: l.depth,
            points: l.points,
            step: l.step,
            graph_modulus: Some(l.graph_modulus),
            riesz_modulus: l.riesz_modulus,
            twisted_riesz_modulus: None,
            conjugated_riesz_modulus: None,
            identity_defect: None,
            spectrum_deviation: None,
        })
        .collect();
    let run_report = RunReport::new(
        "analyze",
        spec.clone(),
        Some(metric),
        refine,
        *t,
        history,
        Some(report.verdict),
        vec!["report.csv".into(), "verdict.json".into()],
    );
    Ok((report, run_report))
}

fn run_phi(spec: &FamilySpec, refine: usize, t: &Tolerances) -> anyhow::Result<RunReport> {
    let fam = gallery::family_from_spec(spec)?;
    let levels = phi_family_scan(&fam, refine, t)?;
    let history: Vec<LevelSummary> = levels
        .iter()
        .map(|l| LevelSummary {
            depth: l.depth,
            points: l.points,
            step: l.step,
            graph_modulus: Some(l.raw_graph_modulus),
            riesz_modulus: l.raw_riesz_modulus,
            twisted_riesz_modulus: l.twisted_riesz_modulus,
            conjugated_riesz_modulus: None,
            identity_defect: Some(l.identity_defect),
            spectrum_deviation: None,
        })
        .collect();
    Ok(RunReport::new(
        "phi",
        spec.clone(),
        None,
        refine,
        *t,
        history,
        None,
        vec![
            "phi_levels.csv".into(),
            "phi_raw_nodes.csv".into(),
            "phi_twisted_nodes.csv".into(),
            "frame.json".into(),
        ],
    ))
}

fn run_trivialize(spec: &FamilySpec, refine: usize, t: &Tolerances) -> anyhow::Result<RunReport> {
    let fam = gallery::family_from_spec(spec)?;
    let levels = sa_scan(&fam, None, refine, t)?;
    let history: Vec<LevelSummary> = levels
        .iter()
        .map(|l| LevelSummary {
            depth: l.depth,
            points: l.points,
            step: l.step,
            graph_modulus: None,
            riesz_modulus: l.raw_riesz_modulus,
            twisted_riesz_modulus: None,
            conjugated_riesz_modulus: l.conjugated_riesz_modulus,
            identity_defect: None,
            spectrum_deviation: Some(l.spectrum_deviation),
        })
        .collect();
    Ok(RunReport::new(
        "trivialize",
        spec.clone(),
        None,
        refine,
        *t,
        history,
        None,
        vec![
            "trivialize_levels.csv".into(),
            "raw_nodes.csv".into(),
            "conjugated_nodes.csv".into(),
            "frame.json".into(),
        ],
    ))
}
