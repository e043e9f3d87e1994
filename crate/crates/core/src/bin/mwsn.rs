use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use mwsn::analysis::{
    detect_prob_mobile, detect_prob_static, min_nodes_mobile, min_nodes_static, nodes_no_overlap, prob_k_coverage,
    CoverageParams,
};
use mwsn::config::{parse_config, ConfigDocument, ConfigError};
use mwsn::harness::{export_snapshots, find_min_nodes_empirical, monte_carlo, sweep, MinNodes, SweepRow};
use mwsn::output::{format_sig6, render_sweep_csv, write_histogram_csv, write_snapshot_csv, write_text};

#[derive(Parser)]
#[command(name = "mwsn", version, about = "Mobile sensor network coverage simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form detection probabilities and minimum node counts.
    Analyze {
        #[command(flatten)]
        common: Common,
        /// Desired detection probability (repeatable).
        #[arg(long = "pd")]
        pd: Vec<f64>,
        /// Coverage orders to report (repeatable).
        #[arg(long = "k")]
        k: Vec<u64>,
    },
    /// One Monte Carlo experiment.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Also write the result as a one-row sweep CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo over models × n_values × td_values, written as CSV.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        out: PathBuf,
    },
    /// Analytic and (optionally) empirical minimum node counts.
    Minnodes {
        #[command(flatten)]
        common: Common,
        #[arg(long = "pd", default_value_t = 0.9)]
        pd: f64,
        /// Also search the smallest simulated count reaching `--pd`.
        #[arg(long)]
        empirical: bool,
        #[arg(long = "n-max", default_value_t = 200)]
        n_max: usize,
    },
    /// Node positions of run 0 and a pooled nearest-neighbor histogram.
    Snapshot {
        #[command(flatten)]
        common: Common,
        /// Comma-separated snapshot times in seconds.
        #[arg(long, default_value = "0,1000")]
        times: String,
        /// Positions CSV.
        #[arg(long)]
        out: PathBuf,
        /// Nearest-neighbor histogram CSV.
        #[arg(long = "hist-out")]
        hist_out: PathBuf,
    },
}

/// Every configuration key as a flag; flags override the config file.
#[derive(Args, Default)]
struct Common {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long = "arena-side", alias = "arena_side")]
    arena_side: Option<String>,
    #[arg(long = "n-nodes", aliases = ["n", "n_nodes"])]
    n_nodes: Option<String>,
    #[arg(long = "mobility-model", aliases = ["model", "mobility_model"])]
    mobility_model: Option<String>,
    #[arg(long = "node-speed", aliases = ["speed", "node_speed"])]
    node_speed: Option<String>,
    #[arg(long)]
    range: Option<String>,
    #[arg(long = "step-length", alias = "step_length")]
    step_length: Option<String>,
    #[arg(long = "target-kind", aliases = ["target", "target_kind"])]
    target_kind: Option<String>,
    #[arg(long = "target-duration", aliases = ["td", "target_duration"])]
    target_duration: Option<String>,
    #[arg(long = "target-speed", alias = "target_speed")]
    target_speed: Option<String>,
    #[arg(long)]
    dt: Option<String>,
    #[arg(long)]
    runs: Option<String>,
    #[arg(long = "base-seed", aliases = ["seed", "base_seed"])]
    base_seed: Option<String>,
    #[arg(long = "n-values", alias = "n_values")]
    n_values: Option<String>,
    #[arg(long = "td-values", alias = "td_values")]
    td_values: Option<String>,
    #[arg(long)]
    models: Option<String>,
}

enum Failure {
    Config(String),
    Runtime(String),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.to_string())
    }
}

impl Common {
    fn overrides(&self) -> [(&'static str, &Option<String>); 15] {
        [
            ("arena_side", &self.arena_side),
            ("n_nodes", &self.n_nodes),
            ("mobility_model", &self.mobility_model),
            ("node_speed", &self.node_speed),
            ("range", &self.range),
            ("step_length", &self.step_length),
            ("target_kind", &self.target_kind),
            ("target_duration", &self.target_duration),
            ("target_speed", &self.target_speed),
            ("dt", &self.dt),
            ("runs", &self.runs),
            ("base_seed", &self.base_seed),
            ("n_values", &self.n_values),
            ("td_values", &self.td_values),
            ("models", &self.models),
        ]
    }

    fn document(&self) -> Result<ConfigDocument, Failure> {
        let mut doc = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?;
                parse_config(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?
            }
            None => ConfigDocument::default(),
        };
        for (key, value) in self.overrides() {
            if let Some(v) = value {
                doc.set(key, v).map_err(|e| Failure::Config(format!("--{}: {e}", key.replace('_', "-"))))?;
            }
        }
        doc.validate()?;
        Ok(doc)
    }
}

fn analyze(doc: &ConfigDocument, pd: &[f64], ks: &[u64]) -> Result<String, Failure> {
    let area = doc.arena_side * doc.arena_side;
    let t = doc.target_duration;
    let params = CoverageParams::new(area, doc.range, doc.node_speed, t).map_err(|e| Failure::Config(e.to_string()))?;
    let n = doc.n_nodes as u64;
    let pds: Vec<f64> = if pd.is_empty() { vec![0.9, 0.99] } else { pd.to_vec() };
    let ks: Vec<u64> = if ks.is_empty() { vec![0, 1, 2] } else { ks.to_vec() };

    let mut out = String::new();
    let _ = writeln!(out, "area_m2 = {}", format_sig6(area));
    let _ = writeln!(out, "range_m = {}", format_sig6(doc.range));
    let _ = writeln!(out, "mean_speed_mps = {}", format_sig6(doc.node_speed));
    let _ = writeln!(out, "n_nodes = {n}");
    let _ = writeln!(out, "t_s = {}", format_sig6(t));
    for k in ks {
        let _ = writeln!(out, "prob_k_coverage(k={k}) = {}", format_sig6(prob_k_coverage(n, &params, k)));
    }
    let _ = writeln!(out, "detect_prob_static = {}", format_sig6(detect_prob_static(n, &params)));
    let _ = writeln!(out, "detect_prob_mobile(t={}) = {}", format_sig6(t), format_sig6(detect_prob_mobile(n, &params)));
    for p in pds {
        let ms = min_nodes_static(p, &params).map_err(|e| Failure::Config(format!("--pd: {e}")))?;
        let mm = min_nodes_mobile(p, &params).map_err(|e| Failure::Config(format!("--pd: {e}")))?;
        let _ = writeln!(out, "min_nodes_static(pd={}) = {ms}", format_sig6(p));
        let _ = writeln!(out, "min_nodes_mobile(pd={}, t={}) = {mm}", format_sig6(p), format_sig6(t));
    }
    let _ = writeln!(out, "nodes_no_overlap(td={}) = {}", format_sig6(t), nodes_no_overlap(&params, t));
    Ok(out)
}

fn runtime<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Runtime(e.to_string())
}

fn simulate(doc: &ConfigDocument, out: Option<&Path>) -> Result<String, Failure> {
    let exp = doc.experiment()?;
    let (detection, tracking) = monte_carlo(&exp).map_err(runtime)?;
    let cfg = &exp.base_config;
    let params = CoverageParams::new(cfg.arena.area(), cfg.mobility.range, cfg.mobility.effective_speed(), cfg.target.duration)
        .map_err(runtime)?;
    let n = cfg.n_nodes as u64;

    let mut text = String::new();
    let _ = writeln!(text, "model = {}", cfg.mobility.model);
    let _ = writeln!(text, "n_nodes = {n}");
    let _ = writeln!(text, "target_kind = {}", cfg.target.kind);
    let _ = writeln!(text, "target_duration_s = {}", format_sig6(cfg.target.duration));
    let _ = writeln!(text, "runs = {}", exp.runs);
    let _ = writeln!(text, "base_seed = {}", exp.base_seed);
    let _ = writeln!(text, "detection_mean = {}", format_sig6(detection.mean));
    let _ = writeln!(text, "detection_stderr = {}", format_sig6(detection.std_error));
    let _ = writeln!(text, "tracking_mean = {}", format_sig6(tracking.mean));
    let _ = writeln!(text, "tracking_stderr = {}", format_sig6(tracking.std_error));
    let _ = writeln!(text, "analytic_static = {}", format_sig6(detect_prob_static(n, &params)));
    let _ = writeln!(text, "analytic_mobile = {}", format_sig6(detect_prob_mobile(n, &params)));

    if let Some(path) = out {
        let row = SweepRow {
            model: cfg.mobility.model,
            n_nodes: cfg.n_nodes,
            target_duration: cfg.target.duration,
            detection,
            tracking,
        };
        write_text(path, &render_sweep_csv(&[row])).map_err(runtime)?;
    }
    Ok(text)
}

fn run_sweep(doc: &ConfigDocument, out: &Path) -> Result<String, Failure> {
    let template = doc.experiment()?;
    let rows = sweep(&doc.sweep_grid(), &template).map_err(runtime)?;
    write_text(out, &render_sweep_csv(&rows)).map_err(runtime)?;
    Ok(format!("wrote {} rows to {}\n", rows.len(), out.display()))
}

fn minnodes(doc: &ConfigDocument, pd: f64, empirical: bool, n_max: usize) -> Result<String, Failure> {
    let exp = doc.experiment()?;
    let cfg = &exp.base_config;
    let t = cfg.target.duration;
    let params = CoverageParams::new(cfg.arena.area(), cfg.mobility.range, doc.node_speed, t).map_err(runtime)?;
    let ms = min_nodes_static(pd, &params).map_err(|e| Failure::Config(format!("--pd: {e}")))?;
    let mm = min_nodes_mobile(pd, &params).map_err(|e| Failure::Config(format!("--pd: {e}")))?;
    let mut text = String::new();
    let _ = writeln!(text, "min_nodes_static(pd={}) = {ms}", format_sig6(pd));
    let _ = writeln!(text, "min_nodes_mobile(pd={}, t={}) = {mm}", format_sig6(pd), format_sig6(t));
    let _ = writeln!(text, "nodes_no_overlap(td={}) = {}", format_sig6(t), nodes_no_overlap(&params, t));
    if empirical {
        let found = find_min_nodes_empirical(pd, &exp, n_max).map_err(runtime)?;
        let shown = match found {
            MinNodes::Found(n) => n.to_string(),
            MinNodes::NotAchievable => format!("not achievable with <= {n_max} nodes"),
        };
        let _ = writeln!(text, "empirical_min_nodes(model={}, pd={}) = {shown}", cfg.mobility.model, format_sig6(pd));
    }
    Ok(text)
}

fn snapshot(doc: &ConfigDocument, times: &str, out: &Path, hist_out: &Path) -> Result<String, Failure> {
    let times: Vec<f64> = times
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().ok().filter(|t| *t >= 0.0 && t.is_finite()))
        .collect::<Option<_>>()
        .ok_or_else(|| Failure::Config(format!("--times: expected non-negative seconds, got `{times}`")))?;
    let exp = doc.experiment()?;
    let export = export_snapshots(&exp, &times).map_err(runtime)?;
    write_snapshot_csv(out, &export.positions).map_err(runtime)?;
    write_histogram_csv(hist_out, &export.histogram).map_err(runtime)?;
    let (mean, se) = export.mean_nn();
    Ok(format!(
        "model = {}\nmean_nearest_neighbor_m = {}\nmean_nearest_neighbor_stderr_m = {}\n",
        exp.base_config.mobility.model,
        format_sig6(mean),
        format_sig6(se)
    ))
}

fn dispatch(cli: Cli) -> Result<String, Failure> {
    match cli.command {
        Command::Analyze { common, pd, k } => analyze(&common.document()?, &pd, &k),
        Command::Simulate { common, out } => simulate(&common.document()?, out.as_deref()),
        Command::Sweep { common, out } => run_sweep(&common.document()?, &out),
        Command::Minnodes { common, pd, empirical, n_max } => minnodes(&common.document()?, pd, empirical, n_max),
        Command::Snapshot { common, times, out, hist_out } => snapshot(&common.document()?, &times, &out, &hist_out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match dispatch(cli) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(Failure::Config(msg)) => {
            eprintln!("config error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
