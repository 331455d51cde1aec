//! `growgraph`: ensemble simulation, recurrence solving, verification and
//! reporting for growing random-graph processes.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use growgraph::recurrence::{
    forcing_lower_psi, forcing_plugin, forcing_upper_phi, solve_forward, Family, RecurrenceSpec,
};
use growgraph::ModelKind;

use growgraph_cli::config::{parse_config, Backend, RunConfig};
use growgraph_cli::ensemble::run_ensemble;
use growgraph_cli::report::{
    degree_csv, increment_csv, solution_csv, trace_csv, write_text, RunReport,
};
use growgraph_cli::{verify, CliError, Result};

#[derive(Parser)]
#[command(name = "growgraph", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a simulation ensemble and write plot-ready CSVs.
    Simulate {
        #[command(flatten)]
        flags: ConfigFlags,
        /// Vertex-backend sampling strategy: `bucketed` (default) or
        /// `per-vertex` (literal independent coin flips, for cross-checks).
        #[arg(long)]
        sampling: Option<String>,
        /// Also dump the final edge list of replica 0 (vertex backend only).
        #[arg(long)]
        edge_dump: bool,
    },
    /// Solve the master recurrences and write the solution CSV.
    Solve {
        #[command(flatten)]
        flags: ConfigFlags,
        /// Largest degree class to solve for.
        #[arg(long, default_value_t = 1000)]
        k_max: usize,
        /// Increment CSV (from `simulate`) used for the plug-in column.
        #[arg(long)]
        plugin_from: Option<PathBuf>,
    },
    /// Run the verification suite and write its JSON report.
    Verify {
        /// Comma-separated criterion indices (default: all fifteen).
        #[arg(long)]
        criteria: Option<String>,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
    },
    /// Summarize previously written outputs into a markdown digest.
    Report {
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
    },
}

/// Every config-file key is also a flag; flags override the file.
#[derive(Args, Clone)]
struct ConfigFlags {
    /// `key = value` config file; any flag below overrides its key.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Process: `classical`, `ba`, `mixed` or `hardcopy`.
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    zeta: Option<f64>,
    #[arg(long)]
    nu: Option<f64>,
    #[arg(long)]
    steps: Option<u64>,
    #[arg(long)]
    replicas: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// `histogram` or `vertex`.
    #[arg(long)]
    backend: Option<String>,
    /// Comma-separated observation times.
    #[arg(long)]
    checkpoints: Option<String>,
    /// Increment sampling window `lo:hi`.
    #[arg(long)]
    increment_window: Option<String>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    memory_cap_mb: Option<u64>,
}

impl ConfigFlags {
    /// Merges the config file (if any) with flag overrides and re-parses the
    /// result, so the file and the flags share one validation path.
    fn resolve(&self) -> Result<RunConfig> {
        let text = match &self.config {
            Some(path) => std::fs::read_to_string(path)?,
            None => String::new(),
        };
        let overrides: Vec<(&str, Option<String>)> = vec![
            ("model", self.model.clone()),
            ("alpha", self.alpha.map(|v| v.to_string())),
            ("mu", self.mu.map(|v| v.to_string())),
            ("zeta", self.zeta.map(|v| v.to_string())),
            ("nu", self.nu.map(|v| v.to_string())),
            ("steps", self.steps.map(|v| v.to_string())),
            ("replicas", self.replicas.map(|v| v.to_string())),
            ("seed", self.seed.map(|v| v.to_string())),
            ("backend", self.backend.clone()),
            ("checkpoints", self.checkpoints.clone()),
            ("increment_window", self.increment_window.clone()),
            (
                "out_dir",
                self.out_dir.as_ref().map(|p| p.display().to_string()),
            ),
            ("memory_cap_mb", self.memory_cap_mb.map(|v| v.to_string())),
        ];
        let overridden: Vec<&str> = overrides
            .iter()
            .filter(|(_, v)| v.is_some())
            .map(|&(k, _)| k)
            .collect();
        let mut merged = String::new();
        for line in text.lines() {
            let key = line
                .split('#')
                .next()
                .unwrap_or("")
                .split('=')
                .next()
                .unwrap_or("")
                .trim();
            if !overridden.contains(&key) {
                merged.push_str(line);
                merged.push('\n');
            }
        }
        for (key, value) in &overrides {
            if let Some(v) = value {
                merged.push_str(&format!("{key} = {v}\n"));
            }
        }
        parse_config(&merged)
    }
}

fn family_of(config: &RunConfig) -> Family {
    match config.model {
        ModelKind::Ba => Family::PureBa,
        ModelKind::Classical => Family::Classical,
        ModelKind::Mixed => Family::Mixed,
        ModelKind::HardCopy if config.params.alpha >= 1.0 => Family::PureCopy,
        ModelKind::HardCopy => Family::HardCopy,
    }
}

/// Stationary solutions with the lower, upper and optional plug-in forcings.
/// Sides without a meaningful forcing for this family come back as `None`.
fn solutions(
    config: &RunConfig,
    k_max: usize,
    plugin_freq: Option<&[f64]>,
) -> (Option<Vec<f64>>, Option<Vec<f64>>, Option<Vec<f64>>) {
    let family = family_of(config);
    let solved = |forcing: Vec<f64>| -> Option<Vec<f64>> {
        RecurrenceSpec::preset(family, config.params, forcing)
            .and_then(|spec| solve_forward(&spec))
            .map(|s| s.d)
            .ok()
    };
    let lower = forcing_lower_psi(family, &config.params, None, k_max)
        .ok()
        .and_then(&solved);
    let upper = forcing_upper_phi(family, &config.params, k_max)
        .ok()
        .and_then(&solved);
    let plugin = plugin_freq
        .and_then(|f| forcing_plugin(f).ok())
        .and_then(|mut f| {
            f.resize(k_max + 1, 0.0);
            solved(f)
        });
    (lower, upper, plugin)
}

fn simulate(flags: &ConfigFlags, sampling: Option<&str>, edge_dump: bool) -> Result<()> {
    let mut config = flags.resolve()?;
    config.edge_dump = edge_dump;
    if let Some(mode) = sampling {
        config.sampling = match mode {
            "bucketed" => growgraph::vertex::Sampling::DegreeBucketed,
            "per-vertex" => growgraph::vertex::Sampling::PerVertex,
            other => return Err(CliError::Invalid(format!("unknown sampling `{other}`"))),
        };
    }
    if edge_dump && config.backend != Backend::Vertex {
        return Err(CliError::Invalid(
            "--edge-dump needs the vertex backend".into(),
        ));
    }
    let out = run_ensemble(&config)?;
    let k_max = out.summary.count_mean.len().saturating_sub(1);
    let (lower, upper, plugin) = solutions(&config, k_max, Some(&out.summary.increment_freq));
    let dir = config.out_dir.clone();
    write_text(
        &dir,
        "degree.csv",
        &degree_csv(&out.summary, lower.as_deref(), upper.as_deref(), plugin.as_deref()),
    )?;
    write_text(&dir, "increments.csv", &increment_csv(&out.summary.increment_freq))?;
    write_text(&dir, "trace.csv", &trace_csv(&out.summary.e_trace))?;
    if let Some(graph) = &out.dump_graph {
        let mut buf = Vec::new();
        graph.write_edge_list(&mut buf)?;
        write_text(&dir, "edges.txt", &String::from_utf8_lossy(&buf))?;
    }
    let report = RunReport::new(Some(config), Vec::new());
    write_text(&dir, "report.json", &report.to_json()?)?;
    println!("wrote {}", dir.display());
    Ok(())
}

fn solve(flags: &ConfigFlags, k_max: usize, plugin_from: Option<&Path>) -> Result<()> {
    // `solve` needs no run-length, so default `steps` if absent.
    let mut flags = flags.clone();
    flags.steps = flags.steps.or(Some(1));
    let config = flags.resolve()?;
    let plugin_freq = match plugin_from {
        Some(path) => Some(read_increment_csv(path)?),
        None => None,
    };
    let (lower, upper, plugin) = solutions(&config, k_max, plugin_freq.as_deref());
    let empty = Vec::new();
    let csv = solution_csv(
        lower.as_deref().unwrap_or(&empty),
        upper.as_deref().unwrap_or(&empty),
        plugin.as_deref(),
    );
    write_text(&config.out_dir, "solution.csv", &csv)?;
    println!("wrote {}", config.out_dir.join("solution.csv").display());
    Ok(())
}

fn read_increment_csv(path: &Path) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path)?;
    let mut freq = Vec::new();
    for (i, line) in text.lines().enumerate().skip(1) {
        let value = line
            .split(',')
            .nth(1)
            .and_then(|v| v.parse::<f64>().ok())
            .ok_or_else(|| CliError::Invalid(format!("{}:{}: bad row", path.display(), i + 1)))?;
        freq.push(value);
    }
    Ok(freq)
}

fn run_verify(criteria: Option<&str>, out_dir: &Path) -> Result<bool> {
    let indices: Vec<usize> = match criteria {
        None => Vec::new(),
        Some(list) => list
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<usize>()
                    .ok()
                    .filter(|&i| (1..=verify::CRITERIA_COUNT).contains(&i))
                    .ok_or_else(|| CliError::Invalid(format!("bad criterion `{s}`")))
            })
            .collect::<Result<_>>()?,
    };
    let report = verify::run_suite(&indices);
    write_text(out_dir, "report.json", &report.to_json()?)?;
    println!(
        "{}: {}",
        out_dir.join("report.json").display(),
        if report.all_pass { "all pass" } else { "FAILURES" }
    );
    Ok(report.all_pass)
}

fn summarize(out_dir: &Path) -> Result<()> {
    let report_path = out_dir.join("report.json");
    let text = std::fs::read_to_string(&report_path)?;
    let report: serde_json::Value = serde_json::from_str(&text)?;
    let verdicts = report["verdicts"].as_array().cloned().unwrap_or_default();
    let passed = verdicts.iter().filter(|v| v["pass"] == true).count();
    let mut md = String::new();
    md.push_str("# Run summary\n\n");
    md.push_str(&format!("- verdicts: {passed}/{} passed\n", verdicts.len()));
    for name in ["degree.csv", "increments.csv", "trace.csv", "edges.txt"] {
        if out_dir.join(name).exists() {
            md.push_str(&format!("- artifact: `{name}`\n"));
        }
    }
    if !verdicts.is_empty() {
        md.push_str("\n| criterion | anchor | measured | target | tolerance | pass |\n");
        md.push_str("|---|---|---|---|---|---|\n");
        for v in &verdicts {
            md.push_str(&format!(
                "| {} | {} | {} | {} | {} | {} |\n",
                v["criterion"].as_str().unwrap_or("?"),
                v["anchor"].as_str().unwrap_or("?"),
                v["measured"],
                v["target"],
                v["tolerance"],
                v["pass"],
            ));
        }
    }
    write_text(out_dir, "summary.md", &md)?;
    println!("wrote {}", out_dir.join("summary.md").display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Simulate {
            flags,
            sampling,
            edge_dump,
        } => simulate(flags, sampling.as_deref(), *edge_dump).map(|()| true),
        Command::Solve {
            flags,
            k_max,
            plugin_from,
        } => solve(flags, *k_max, plugin_from.as_deref()).map(|()| true),
        Command::Verify { criteria, out_dir } => run_verify(criteria.as_deref(), out_dir),
        Command::Report { out_dir } => summarize(out_dir).map(|()| true),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
