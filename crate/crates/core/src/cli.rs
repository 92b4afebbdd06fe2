//! Command-line front end. Settings merge as flags > config file >
//! built-in defaults; every failure is reported as one machine-readable
//! line on stderr with a kind-specific exit status.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::analysis::{evaluate_metrics, MetricInputs};
use crate::config::{RadiusRule, ScenarioConfig};
use crate::distributions::{empirical_distance_check, ClusterGeometry, DistanceQuery};
use crate::error::{Error, Result};
use crate::experiments::{run_study, StudyKind};
use crate::geometry::{build_topology, write_topology_csv, DeploymentMode};
use crate::protocol::{
    run_scheme, write_event_log, write_outcome_summary, write_outcomes, LogEntry, Scheme, SchemeOutcome,
};
use crate::rng::{derive_seed, seeded};

#[derive(Debug, Parser)]
#[command(name = "uavmc", version, about = "UAV swarm multicast: topologies, distance laws, metrics, simulation")]
pub struct Cli {
    #[command(flatten)]
    pub overrides: Overrides,
    #[command(subcommand)]
    pub command: Command,
}

/// Global settings; each flag overrides the matching config key.
#[derive(Debug, Args, Default)]
pub struct Overrides {
    /// key=value config file
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Write CSV files here instead of printing to stdout
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    /// Base seed for all randomness
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Replications (epochs or Monte Carlo trials)
    #[arg(long, global = true)]
    pub replications: Option<usize>,
    /// Arbitrary config override, repeatable: --set radio.p_bs_mw=500
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    #[arg(long, global = true)]
    pub d0: Option<f64>,
    #[arg(long, global = true)]
    pub v_norm: Option<f64>,
    /// Cluster radius in meters
    #[arg(long = "r", global = true)]
    pub radius_r: Option<f64>,
    #[arg(long, global = true)]
    pub num_clusters: Option<usize>,
    #[arg(long, global = true)]
    pub total_uavs: Option<usize>,
    #[arg(long, global = true)]
    pub region_radius: Option<f64>,
    #[arg(long, global = true)]
    pub lambda: Option<f64>,
    #[arg(long, global = true)]
    pub lambda_off: Option<f64>,
    #[arg(long, global = true, value_enum)]
    pub mode: Option<ModeArg>,
    #[arg(long, global = true, value_enum)]
    pub radius_rule: Option<RadiusRuleArg>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    FixedTotal,
    Density,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum RadiusRuleArg {
    DensityPreserving,
    Fixed,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum KindArg {
    A,
    D1,
    D1Hat,
    D2,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SchemeArg {
    Clustering,
    Benchmark,
    Rnc,
}

impl From<SchemeArg> for Scheme {
    fn from(s: SchemeArg) -> Scheme {
        match s {
            SchemeArg::Clustering => Scheme::Clustering,
            SchemeArg::Benchmark => Scheme::Benchmark,
            SchemeArg::Rnc => Scheme::Rnc,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample topology drops as drop_id,cluster_id,uav_id,x,y,h rows
    Topology {
        #[arg(long, default_value_t = 1)]
        drops: usize,
    },
    /// Tabulate a distance density (grid, pdf, cdf) and report the
    /// Kolmogorov–Smirnov gap against geometric sampling
    Distributions {
        #[arg(long, value_enum)]
        kind: KindArg,
        /// Offset of the typical UAV from the cluster center (d2 only)
        #[arg(long)]
        a: Option<f64>,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
    },
    /// Evaluate coverage, link success, request success, delay and ASE
    Metrics,
    /// Run packet epochs of one scheme on fresh topology drops
    Simulate {
        #[arg(long, value_enum)]
        scheme: SchemeArg,
        #[arg(long, default_value_t = 1)]
        epochs: usize,
        /// Also write the event log as CSV
        #[arg(long)]
        event_log: Option<PathBuf>,
    },
    /// Run a study over its default sweep (or all of them)
    Study {
        #[arg(long, default_value = "all")]
        name: String,
    },
    /// Print the effective configuration as key=value lines
    Config,
}

impl Overrides {
    /// Defaults, then the config file, then `--set`, then dedicated flags.
    pub fn resolve(&self) -> Result<ScenarioConfig> {
        let mut cfg = match &self.config {
            Some(path) => ScenarioConfig::from_file(path)?,
            None => ScenarioConfig::default(),
        };
        for pair in &self.set {
            let (key, value) = pair
                .split_once('=')
                .ok_or_else(|| Error::config("--set", format!("expected KEY=VALUE, got {pair:?}")))?;
            cfg.set(key.trim(), value.trim())?;
        }
        if let Some(v) = self.seed {
            cfg.base_seed = v;
        }
        if let Some(v) = self.replications {
            cfg.replications = v;
        }
        if let Some(v) = self.d0 {
            cfg.d0 = v;
        }
        if let Some(v) = self.v_norm {
            cfg.v_norm = v;
        }
        if let Some(v) = self.radius_r {
            cfg.radius_r = v;
        }
        if let Some(v) = self.num_clusters {
            cfg.num_clusters = v;
        }
        if let Some(v) = self.total_uavs {
            cfg.total_uavs = v;
        }
        if let Some(v) = self.region_radius {
            cfg.region_radius = v;
        }
        if let Some(v) = self.lambda {
            cfg.lambda = v;
        }
        if let Some(v) = self.lambda_off {
            cfg.lambda_off = v;
        }
        if let Some(m) = self.mode {
            cfg.mode = match m {
                ModeArg::FixedTotal => DeploymentMode::FixedTotal,
                ModeArg::Density => DeploymentMode::Density,
            };
        }
        if let Some(r) = self.radius_rule {
            cfg.radius_rule = match r {
                RadiusRuleArg::DensityPreserving => RadiusRule::DensityPreserving,
                RadiusRuleArg::Fixed => RadiusRule::Fixed,
            };
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Where a command's primary CSV goes.
struct Sink<'a> {
    out_dir: Option<&'a Path>,
    stdout: &'a mut dyn Write,
}

impl Sink<'_> {
    fn emit(&mut self, file_name: &str, write: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
        match self.out_dir {
            Some(dir) => {
                std::fs::create_dir_all(dir)?;
                let mut file = BufWriter::new(File::create(dir.join(file_name))?);
                write(&mut file)?;
                file.flush()?;
                Ok(())
            }
            None => write(self.stdout),
        }
    }
}

fn distribution_query(cfg: &ScenarioConfig, kind: KindArg, a: Option<f64>) -> Result<DistanceQuery> {
    let geom = || ClusterGeometry::new(cfg.v_norm, cfg.radius_r, cfg.h1, cfg.h2);
    Ok(match kind {
        KindArg::A => DistanceQuery::A { radius_r: cfg.radius_r },
        KindArg::D1 => DistanceQuery::D1(geom()?),
        KindArg::D1Hat => DistanceQuery::D1Hat(geom()?),
        KindArg::D2 => {
            let a = a.ok_or_else(|| Error::config("a", "--a is required for --kind d2"))?;
            DistanceQuery::D2 { a, radius_r: cfg.radius_r }
        }
    })
}

fn write_rows<W: Write + ?Sized>(out: &mut W, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Runs `command` against a validated configuration.
pub fn dispatch(
    command: &Command,
    cfg: &ScenarioConfig,
    out_dir: Option<&Path>,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<()> {
    let mut sink = Sink { out_dir, stdout };
    match command {
        Command::Topology { drops } => {
            let topologies = (0..*drops)
                .map(|d| build_topology(cfg, &mut seeded(derive_seed(cfg.base_seed, &[d as u64]))))
                .collect::<Result<Vec<_>>>()?;
            let refs: Vec<(usize, &_)> = topologies.iter().enumerate().collect();
            sink.emit("topology.csv", |w| write_topology_csv(w, &refs))
        }
        Command::Distributions { kind, a, samples } => {
            let query = distribution_query(cfg, *kind, *a)?;
            let dist = query.distribution()?;
            let table = dist.table()?;
            let rows: Vec<Vec<String>> =
                table.iter().map(|(x, p, c)| vec![x.to_string(), p.to_string(), c.to_string()]).collect();
            let name = format!("distribution_{}.csv", query.kind().as_str());
            sink.emit(&name, |w| write_rows(w, &["x", "pdf", "cdf"], &rows))?;
            let gap = empirical_distance_check(&query, *samples, &mut seeded(cfg.base_seed))?;
            let report = vec![vec![query.kind().as_str().to_string(), samples.to_string(), gap.to_string()]];
            let header = ["kind", "samples", "ks_gap"];
            match out_dir {
                Some(dir) => {
                    let mut f = BufWriter::new(File::create(dir.join("ks_report.csv"))?);
                    write_rows(&mut f, &header, &report)?;
                    f.flush()?;
                }
                None => writeln!(stderr, "kind={} samples={} ks_gap={}", query.kind().as_str(), samples, gap)?,
            }
            Ok(())
        }
        Command::Metrics => {
            let inputs = MetricInputs {
                geom: ClusterGeometry::new(cfg.v_norm, cfg.radius_r, cfg.h1, cfg.h2)?,
                radio: cfg.radio,
                lambda_off: cfg.lambda_off,
                packet_len_ms: cfg.sim.packet_len_ms,
                t_req_ms: cfg.sim.t_req_ms,
            };
            let m = evaluate_metrics(&inputs)?;
            let row = vec![
                cfg.v_norm.to_string(),
                cfg.radius_r.to_string(),
                cfg.lambda_off.to_string(),
                m.p_cov.to_string(),
                m.p_suc.to_string(),
                m.p_req.to_string(),
                m.delay_aver_ms.to_string(),
                m.ase_aver.to_string(),
            ];
            let header = ["v_norm", "radius_r", "lambda_off", "p_cov", "p_suc", "p_req", "delay_aver_ms", "ase_aver"];
            sink.emit("metrics.csv", |w| write_rows(w, &header, &[row]))
        }
        Command::Simulate { scheme, epochs, event_log } => {
            let scheme = Scheme::from(*scheme);
            let mut sim = cfg.sim;
            sim.record_log = event_log.is_some();
            let outcomes = (0..*epochs)
                .map(|e| -> Result<SchemeOutcome> {
                    let topo_seed = derive_seed(cfg.base_seed, &[e as u64, 0]);
                    let run_seed = derive_seed(cfg.base_seed, &[e as u64, 1]);
                    let topology = build_topology(cfg, &mut seeded(topo_seed))?;
                    run_scheme(scheme, &topology, &cfg.radio, &sim, &mut seeded(run_seed))
                })
                .collect::<Result<Vec<_>>>()?;
            let refs: Vec<(usize, &SchemeOutcome)> = outcomes.iter().enumerate().collect();
            sink.emit("outcomes.csv", |w| write_outcomes(w, &refs))?;
            match out_dir {
                Some(dir) => {
                    let mut f = BufWriter::new(File::create(dir.join("summary.csv"))?);
                    write_outcome_summary(&mut f, &refs)?;
                    f.flush()?;
                }
                None => write_outcome_summary(&mut *stderr, &refs)?,
            }
            if let Some(path) = event_log {
                // One packet per epoch: the packet id doubles as the epoch index.
                let log: Vec<_> = outcomes
                    .iter()
                    .enumerate()
                    .flat_map(|(e, o)| o.log.iter().map(move |entry| LogEntry { packet_id: e as u32, ..*entry }))
                    .collect();
                let mut f = BufWriter::new(File::create(path)?);
                write_event_log(&mut f, &log)?;
                f.flush()?;
            }
            Ok(())
        }
        Command::Study { name } => {
            let kinds: Vec<StudyKind> = if name == "all" {
                StudyKind::ALL.to_vec()
            } else {
                vec![name.parse().map_err(|e: String| Error::config("name", e))?]
            };
            for kind in kinds {
                let table = run_study(kind, cfg)?;
                sink.emit(&format!("{}.csv", kind.as_str()), |w| table.write_csv(w))?;
            }
            Ok(())
        }
        Command::Config => sink.emit("effective_config.txt", |w| Ok(w.write_all(cfg.to_text().as_bytes())?)),
    }
}

/// One-line error report: `error kind=<kind> [field=<field>] message="..."`.
pub fn error_line(err: &Error) -> String {
    let message = match err {
        Error::Config { message, .. } => message.clone(),
        other => other.to_string(),
    };
    let message = message.replace('\n', " ").replace('"', "'");
    match err {
        Error::Config { field, .. } => format!("error kind=config field={field} message=\"{message}\""),
        other => format!("error kind={} message=\"{message}\"", other.kind()),
    }
}

// `uavmc ... | head` should not report an error.
fn is_broken_pipe(err: &Error) -> bool {
    let io = match err {
        Error::Io(e) => Some(e),
        Error::Csv(e) => match e.kind() {
            csv::ErrorKind::Io(e) => Some(e),
            _ => None,
        },
        _ => None,
    };
    io.is_some_and(|e| e.kind() == std::io::ErrorKind::BrokenPipe)
}

/// Parses `args`, runs the command and returns the process exit status.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let rendered = e.render().to_string();
            let _ = if code == 0 { write!(stdout, "{rendered}") } else { write!(stderr, "{rendered}") };
            return code;
        }
    };
    let result = cli
        .overrides
        .resolve()
        .and_then(|cfg| dispatch(&cli.command, &cfg, cli.overrides.out_dir.as_deref(), stdout, stderr));
    match result {
        Ok(()) => 0,
        Err(e) if is_broken_pipe(&e) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "{}", error_line(&e));
            e.exit_code()
        }
    }
}
