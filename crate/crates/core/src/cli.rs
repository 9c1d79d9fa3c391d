//! Command-line front end. Each subcommand resolves its parameters from the
//! config file and flags, calls one library operation and renders the result.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::RawConfig;
use crate::engset::{self, Method};
use crate::error::{Error, Result};
use crate::montecarlo::{self, SimConfig, UnstableLink};
use crate::output::{sha256_hex, Cell, Format, OutputChecksum, RunManifest, Table};
use crate::params::{PoolLayout, BITS_PER_MEGABIT};
use crate::planner::{self, PlanComparison, PlanResult};
use crate::sla;
use crate::sweep::{self, IntRange, LoadSeries, Range, SweepKind, SweepSpec};
use crate::timeout;
use crate::units::{parse_quantity, Dimension};

pub const CONFIG_ENV: &str = "POOLTRADE_CONFIG";

#[derive(Debug, Parser)]
#[command(name = "pooltrade", version, about = "Centralized vs distributed session-pool capacity planning")]
pub struct Cli {
    /// Flat TOML file of unit-suffixed parameters; flags override its keys.
    #[arg(long, global = true, env = CONFIG_ENV, value_name = "PATH")]
    config: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,

    /// Write results here instead of stdout; the manifest goes next to it as `<PATH>.manifest.json`.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Manifest destination. Defaults to `<out>.manifest.json`, or stderr without `--out`.
    #[arg(long, global = true, value_name = "PATH")]
    manifest: Option<PathBuf>,

    #[command(flatten)]
    params: ParamArgs,

    #[command(subcommand)]
    command: Command,
}

/// One flag per config key. Values carry their unit, e.g. `--tau "10 ms"`.
#[derive(Debug, Default, Args)]
struct ParamArgs {
    #[arg(long, global = true, value_name = "DURATION")]
    session_duration: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    rho: Option<String>,
    #[arg(long, global = true, value_name = "DURATION")]
    idle_duration: Option<String>,
    #[arg(long, global = true, value_name = "RATE")]
    arrival_rate: Option<String>,
    #[arg(long, global = true, value_name = "BANDWIDTH")]
    capacity_base: Option<String>,
    #[arg(long, global = true, value_name = "BANDWIDTH")]
    capacity_extra: Option<String>,
    /// Total link capacity; alternative to `--capacity-extra`.
    #[arg(long, global = true, value_name = "BANDWIDTH")]
    capacity: Option<String>,
    #[arg(long, global = true, value_name = "SIZE")]
    packet_size: Option<String>,
    #[arg(long, global = true, value_name = "PACKET_RATE")]
    background_rate: Option<String>,
    #[arg(long, global = true, value_name = "DURATION")]
    probe_interval: Option<String>,
    #[arg(long, global = true, value_name = "RATE")]
    probe_rate: Option<String>,
    #[arg(long, global = true, value_name = "DURATION")]
    tau: Option<String>,
    #[arg(long, global = true, value_name = "COUNT")]
    population: Option<String>,
    /// Comma-separated site populations.
    #[arg(long, global = true, value_name = "COUNTS")]
    populations: Option<String>,
    /// One count, or comma-separated per-site counts.
    #[arg(long, global = true, value_name = "COUNTS")]
    licenses: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    alpha: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    beta: Option<String>,
    #[arg(long, global = true, value_name = "COUNT")]
    links_upgraded: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    success_min: Option<String>,
}

impl ParamArgs {
    fn pairs(&self) -> [(&'static str, &Option<String>); 19] {
        [
            ("session_duration", &self.session_duration),
            ("rho", &self.rho),
            ("idle_duration", &self.idle_duration),
            ("arrival_rate", &self.arrival_rate),
            ("capacity_base", &self.capacity_base),
            ("capacity_extra", &self.capacity_extra),
            ("capacity", &self.capacity),
            ("packet_size", &self.packet_size),
            ("background_rate", &self.background_rate),
            ("probe_interval", &self.probe_interval),
            ("probe_rate", &self.probe_rate),
            ("tau", &self.tau),
            ("population", &self.population),
            ("populations", &self.populations),
            ("licenses", &self.licenses),
            ("alpha", &self.alpha),
            ("beta", &self.beta),
            ("links_upgraded", &self.links_upgraded),
            ("success_min", &self.success_min),
        ]
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Engset blocking of one pool of `licenses` shared by `population` users.
    Blocking {
        #[arg(long, value_enum, default_value_t = MethodArg::Recursive)]
        method: MethodArg,
    },
    /// Population-weighted blocking of isolated per-site pools.
    BlockingDist,
    /// Timeout probability of a session behind the central link.
    Timeout,
    /// Total link capacity at which the timeout probability equals the target.
    Capacity {
        #[arg(long, required_unless_present = "sla", conflicts_with = "sla")]
        p_target: Option<f64>,
        /// Size the link for `licenses` central licenses at `success_min` instead;
        /// exits 1 when blocking alone already violates the target.
        #[arg(long)]
        sla: bool,
    },
    /// SLA success probability of one architecture.
    Success {
        /// Evaluate per-site pools instead of the central pool.
        #[arg(long)]
        distributed: bool,
    },
    /// Cheapest configuration of each architecture, and the winner.
    Optimize {
        /// Optimize one architecture only; exits 1 if it cannot meet the SLA.
        #[arg(long, value_enum)]
        only: Option<ArchArg>,
    },
    /// Monte Carlo estimate next to its closed form.
    Simulate(SimulateArgs),
    /// Grid evaluation in long format.
    Sweep(SweepArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Blocking { .. } => "blocking",
            Command::BlockingDist => "blocking-dist",
            Command::Timeout => "timeout",
            Command::Capacity { .. } => "capacity",
            Command::Success { .. } => "success",
            Command::Optimize { .. } => "optimize",
            Command::Simulate(_) => "simulate",
            Command::Sweep(_) => "sweep",
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MethodArg {
    Direct,
    Recursive,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ArchArg {
    Centralized,
    Distributed,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SimTarget {
    Blocking,
    Timeout,
    Success,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long, value_enum)]
    target: SimTarget,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 20)]
    replications: u32,
    /// Arrivals (blocking) or sessions (timeout, success) per replication.
    #[arg(long, default_value_t = 50_000)]
    horizon: u64,
    /// Discarded leading fraction of each blocking replication.
    #[arg(long, default_value_t = 0.1)]
    warmup: f64,
    /// Treat an overloaded link as one where every probe fails instead of rejecting it.
    #[arg(long)]
    allow_unstable: bool,
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// blocking_vs_licenses, timeout_vs_capacity, timeout_vs_utilization, success_surface or cost_contours.
    #[arg(long)]
    kind: String,
    /// `start:stop:step` over license counts.
    #[arg(long, value_name = "RANGE")]
    licenses_range: Option<String>,
    /// `start:stop:step` over total capacity in Mbps.
    #[arg(long, value_name = "RANGE")]
    capacity_mbps: Option<String>,
    /// Comma-separated timeout thresholds with units; defaults to `tau`.
    #[arg(long, value_name = "DURATIONS")]
    taus: Option<String>,
    /// Equal-split sites for the distributed blocking series.
    #[arg(long, default_value_t = 2)]
    sites: u32,
    /// `background_pkt_s:start:stop:step` (capacity in Mbps); repeatable.
    #[arg(long = "load", value_name = "SERIES")]
    loads: Vec<String>,
    /// Comma-separated cost levels.
    #[arg(long, value_name = "COSTS")]
    levels: Option<String>,
}

/// Runs one invocation and returns the process exit code:
/// 0 success, 1 infeasible, 2 usage or domain error.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                stderr.write_all(text.as_bytes())
            } else {
                stdout.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let argv: Vec<String> = argv.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    match execute(&cli, argv, stdout, stderr) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {}", diagnostic(&e));
            match e {
                Error::Infeasible(_) => 1,
                _ => 2,
            }
        }
    }
}

fn diagnostic(e: &Error) -> String {
    match e {
        Error::Unit { key, .. } => format!("--{}: {e}", key.replace('_', "-")),
        _ => e.to_string(),
    }
}

fn load_config(cli: &Cli) -> Result<RawConfig> {
    let mut raw = match &cli.config {
        Some(path) => RawConfig::from_file(path)?,
        None => RawConfig::new(),
    };
    for (key, value) in cli.params.pairs() {
        if let Some(v) = value {
            raw.set(key, v.clone())?;
        }
    }
    Ok(raw)
}

fn execute(cli: &Cli, argv: Vec<String>, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    let raw = load_config(cli)?;
    let (table, seed) = dispatch(&cli.command, &raw)?;
    let text = table.render(cli.format);

    let out_name = match &cli.out {
        Some(path) => {
            std::fs::write(path, &text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            path.display().to_string()
        }
        None => {
            stdout.write_all(text.as_bytes())?;
            "stdout".into()
        }
    };

    let manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        subcommand: cli.command.name().into(),
        argv,
        config: raw.entries().clone(),
        resolved: raw.resolved(),
        format: cli.format,
        seed,
        rng: seed.map(|_| montecarlo::RNG_ALGORITHM),
        outputs: vec![OutputChecksum {
            name: out_name,
            sha256: sha256_hex(text.as_bytes()),
            bytes: text.len(),
        }],
    }
    .to_json();

    let manifest_path = cli.manifest.clone().or_else(|| {
        cli.out.as_ref().map(|p| {
            let mut s = p.clone().into_os_string();
            s.push(".manifest.json");
            PathBuf::from(s)
        })
    });
    match manifest_path {
        Some(path) => write_file(&path, &manifest),
        None => Ok(stderr.write_all(manifest.as_bytes())?),
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn mbps(bps: f64) -> f64 {
    bps / BITS_PER_MEGABIT
}

fn join_counts(v: &[u32]) -> String {
    v.iter().map(u32::to_string).collect::<Vec<_>>().join(";")
}

fn dispatch(command: &Command, raw: &RawConfig) -> Result<(Table, Option<u64>)> {
    let table = match command {
        Command::Blocking { method } => {
            let (population, licenses, rho) = (raw.total_population()?, raw.single_licenses()?, raw.rho()?);
            let method = match method {
                MethodArg::Direct => Method::Direct,
                MethodArg::Recursive => Method::Recursive,
            };
            let r = engset::blocking(licenses, population, rho, method)?;
            let mut t = Table::new(&["population", "licenses", "rho", "method", "blocking"]);
            let name = match r.method {
                Method::Direct => "direct",
                Method::Recursive => "recursive",
            };
            t.push(vec![population.into(), licenses.into(), rho.into(), name.into(), r.probability.into()]);
            t
        }
        Command::BlockingDist => {
            let layout = raw.layout()?;
            let rho = raw.rho()?;
            let b = engset::blocking_distributed(&layout, rho)?;
            let lic: Vec<u32> = layout.sites().iter().map(|s| s.licenses).collect();
            let mut t = Table::new(&["populations", "licenses", "rho", "blocking"]);
            t.push(vec![join_counts(&layout.populations()).into(), join_counts(&lic).into(), rho.into(), b.into()]);
            t
        }
        Command::Timeout => {
            let channel = raw.channel()?;
            let o = timeout::timeout_probability(&channel, raw.mu()?)?;
            let mut t = Table::new(&["capacity_mbps", "utilization", "q", "timeout", "unstable"]);
            t.push(vec![
                mbps(channel.total_capacity()).into(),
                timeout::utilization(&channel).into(),
                o.q.into(),
                o.p.into(),
                o.unstable.into(),
            ]);
            t
        }
        Command::Capacity { p_target: Some(p), .. } => {
            let channel = raw.channel()?;
            let c = timeout::capacity_for_timeout(*p, raw.mu()?, &channel)?;
            capacity_table(*p, c, channel.capacity_base, timeout::utilization(&channel.with_total_capacity(c)))
        }
        Command::Capacity { p_target: None, .. } => {
            let channel = raw.channel()?.with_capacity_extra(0.0);
            let (w, l, s, target) = (raw.workload()?, raw.single_licenses()?, raw.total_population()?, raw.sla()?);
            let p = sla::max_timeout_for_sla(target.success_min, engset::try_blocking_recursive(l, s, w.rho())?)?;
            let extra = planner::required_capacity_extra(&w, &channel, l, s, &target)?
                .ok_or_else(|| Error::Infeasible(format!("{l} licenses cannot meet the SLA")))?;
            let sized = channel.with_capacity_extra(extra);
            capacity_table(p, sized.total_capacity(), channel.capacity_base, timeout::utilization(&sized))
        }
        Command::Success { distributed } => {
            let workload = raw.workload()?;
            let (report, licenses, population) = if *distributed {
                let layout = raw.layout()?;
                (sla::success_distributed(&workload, &layout)?, layout.licenses(), layout.population())
            } else {
                let (l, s) = (raw.single_licenses()?, raw.total_population()?);
                (sla::success_centralized(&workload, &raw.channel()?, l, s)?, l, s)
            };
            let mut t = Table::new(&[
                "architecture",
                "population",
                "licenses",
                "blocking",
                "timeout",
                "success",
                "channel_unstable",
            ]);
            t.push(vec![
                report.architecture.to_string().into(),
                population.into(),
                licenses.into(),
                report.blocking.into(),
                report.timeout.into(),
                report.success.into(),
                report.channel_unstable.into(),
            ]);
            t
        }
        Command::Optimize { only } => {
            let channel = raw.channel()?.with_capacity_extra(0.0);
            let (w, pops, cost, target) = (raw.workload()?, raw.populations()?, raw.cost()?, raw.sla()?);
            let cmp = match only {
                None => planner::plan(&w, &channel, &pops, &cost, &target)?,
                Some(ArchArg::Centralized) => {
                    let r = planner::optimize_centralized(&w, &channel, pops.iter().sum(), &cost, &target)?;
                    PlanComparison {
                        chosen: r.clone(),
                        centralized: Some(r),
                        distributed: None,
                    }
                }
                Some(ArchArg::Distributed) => {
                    let r = planner::optimize_distributed(&w, &pops, &cost, &target)?;
                    PlanComparison {
                        chosen: r.clone(),
                        centralized: None,
                        distributed: Some(r),
                    }
                }
            };
            let mut t = Table::new(&[
                "architecture",
                "chosen",
                "feasible",
                "licenses",
                "pool_licenses",
                "capacity_extra_mbps",
                "capacity_mbps",
                "cost",
                "blocking",
                "timeout",
                "success",
            ]);
            let mut push = |r: &PlanResult| {
                t.push(vec![
                    r.architecture.to_string().into(),
                    (r.architecture == cmp.chosen.architecture).into(),
                    r.feasible.into(),
                    r.licenses_total.into(),
                    join_counts(&r.pool_licenses).into(),
                    r.capacity_extra_mbps().into(),
                    mbps(channel.capacity_base + r.capacity_extra).into(),
                    r.cost.into(),
                    r.blocking.into(),
                    r.timeout.into(),
                    r.achieved_success.into(),
                ])
            };
            cmp.centralized.iter().chain(&cmp.distributed).for_each(&mut push);
            t
        }
        Command::Simulate(args) => return simulate(args, raw).map(|t| (t, Some(args.seed))),
        Command::Sweep(args) => {
            let spec = sweep_spec(args, raw)?;
            sweep_table(spec.kind(), &sweep::run_sweep(&spec)?)
        }
    };
    Ok((table, None))
}

fn capacity_table(p_target: f64, capacity: f64, capacity_base: f64, utilization: f64) -> Table {
    let mut t = Table::new(&["p_target", "capacity_mbps", "capacity_extra_mbps", "utilization"]);
    t.push(vec![
        p_target.into(),
        mbps(capacity).into(),
        mbps(capacity - capacity_base).into(),
        utilization.into(),
    ]);
    t
}

fn simulate(args: &SimulateArgs, raw: &RawConfig) -> Result<Table> {
    let cfg = SimConfig::new(args.seed, args.replications, args.horizon)?.with_warmup(args.warmup)?;
    let policy = if args.allow_unstable {
        UnstableLink::AllProbesFail
    } else {
        UnstableLink::Reject
    };
    let (name, est, analytic) = match args.target {
        SimTarget::Blocking => {
            let (l, s, w) = (raw.single_licenses()?, raw.total_population()?, raw.workload()?);
            let est = montecarlo::simulate_engset(s, l, &w, &cfg)?;
            ("blocking", est, engset::try_blocking_recursive(l, s, w.rho())?)
        }
        SimTarget::Timeout => {
            let (channel, mu) = (raw.channel()?, raw.mu()?);
            let est = montecarlo::simulate_timeout(&channel, mu, &cfg, policy)?;
            ("timeout", est, timeout::timeout_probability(&channel, mu)?.p)
        }
        SimTarget::Success => {
            let (l, s, w, channel) = (raw.single_licenses()?, raw.total_population()?, raw.workload()?, raw.channel()?);
            let est = montecarlo::simulate_success_centralized(&w, &channel, l, s, &cfg, policy)?;
            ("success", est, sla::success_centralized(&w, &channel, l, s)?.success)
        }
    };
    let mut t = Table::new(&[
        "target",
        "seed",
        "replications",
        "samples",
        "mean",
        "ci99_halfwidth",
        "analytic",
        "covers",
    ]);
    t.push(vec![
        name.into(),
        args.seed.into(),
        est.replications.into(),
        est.samples.into(),
        est.mean.into(),
        est.ci99_halfwidth.into(),
        analytic.into(),
        est.covers(analytic).into(),
    ]);
    Ok(t)
}

fn parse_range(flag: &str, s: &str) -> Result<Range> {
    let parts: Vec<f64> = s
        .split(':')
        .map(|p| p.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::Config(format!("--{flag}: expected start:stop:step, got `{s}`")))?;
    match parts.as_slice() {
        [a, b, c] => Range::new(*a, *b, *c),
        _ => Err(Error::Config(format!("--{flag}: expected start:stop:step, got `{s}`"))),
    }
}

fn parse_int_range(flag: &str, s: &str) -> Result<IntRange> {
    let parts: Vec<u32> = s
        .split(':')
        .map(|p| p.trim().parse::<u32>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::Config(format!("--{flag}: expected start:stop:step counts, got `{s}`")))?;
    match parts.as_slice() {
        [a, b, c] => IntRange::new(*a, *b, *c),
        _ => Err(Error::Config(format!("--{flag}: expected start:stop:step counts, got `{s}`"))),
    }
}

fn required_flag<'a>(value: &'a Option<String>, flag: &str, kind: SweepKind) -> Result<&'a str> {
    value
        .as_deref()
        .ok_or_else(|| Error::Config(format!("sweep kind `{}` needs --{flag}", kind.as_str())))
}

fn sweep_spec(args: &SweepArgs, raw: &RawConfig) -> Result<SweepSpec> {
    let kind = SweepKind::parse(&args.kind)?;
    let licenses = |default_start: u32, population: u32| -> Result<IntRange> {
        match &args.licenses_range {
            Some(s) => parse_int_range("licenses-range", s),
            None => IntRange::new(default_start, population.max(default_start), 1),
        }
    };
    let capacity = || parse_range("capacity-mbps", required_flag(&args.capacity_mbps, "capacity-mbps", kind)?);
    Ok(match kind {
        SweepKind::BlockingVsLicenses => {
            let population = raw.total_population()?;
            SweepSpec::BlockingVsLicenses {
                population,
                sites: args.sites,
                rho: raw.rho()?,
                licenses: licenses(1, population)?,
            }
        }
        SweepKind::TimeoutVsCapacity => {
            let channel = raw.channel()?;
            let taus = match &args.taus {
                Some(list) => list
                    .split(',')
                    .map(|t| parse_quantity("taus", t.trim(), Dimension::Duration))
                    .collect::<Result<Vec<_>>>()?,
                None => vec![channel.timeout_threshold],
            };
            SweepSpec::TimeoutVsCapacity {
                channel,
                mu: raw.mu()?,
                taus,
                capacity_mbps: capacity()?,
            }
        }
        SweepKind::TimeoutVsUtilization => {
            if args.loads.is_empty() {
                return Err(Error::Config("sweep kind `timeout_vs_utilization` needs --load".into()));
            }
            let series = args
                .loads
                .iter()
                .map(|s| {
                    let (lambda, range) = s
                        .split_once(':')
                        .ok_or_else(|| Error::Config(format!("--load: expected rate:start:stop:step, got `{s}`")))?;
                    let background_rate = lambda
                        .trim()
                        .parse::<f64>()
                        .map_err(|_| Error::Config(format!("--load: bad background rate `{lambda}`")))?;
                    Ok(LoadSeries {
                        background_rate,
                        capacity_mbps: parse_range("load", range)?,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            SweepSpec::TimeoutVsUtilization {
                channel: raw.channel()?,
                mu: raw.mu()?,
                series,
            }
        }
        SweepKind::SuccessSurface => {
            let population = raw.total_population()?;
            SweepSpec::SuccessSurface {
                workload: raw.workload()?,
                channel: raw.channel()?,
                population,
                licenses: licenses(0, population)?,
                capacity_mbps: capacity()?,
            }
        }
        SweepKind::CostContours => {
            let populations = raw.populations()?;
            PoolLayout::from_parts(&populations, &vec![0; populations.len()])?;
            let levels = required_flag(&args.levels, "levels", kind)?
                .split(',')
                .map(|l| {
                    l.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::Config(format!("--levels: bad cost level `{l}`")))
                })
                .collect::<Result<Vec<_>>>()?;
            SweepSpec::CostContours {
                workload: raw.workload()?,
                channel: raw.channel()?,
                cost: raw.cost()?,
                sla: raw.sla()?,
                levels,
                licenses: licenses(1, populations.iter().sum())?,
                capacity_mbps: capacity()?,
                populations,
            }
        }
    })
}

fn sweep_table(kind: SweepKind, rows: &[sweep::Row]) -> Table {
    let with_level = kind == SweepKind::CostContours;
    let mut cols = vec!["sweep_kind", "series", "x_name", "x", "y_name", "y"];
    if with_level {
        cols.push("level");
    }
    let mut t = Table::new(&cols);
    for r in rows {
        let mut cells: Vec<Cell> = vec![
            r.sweep_kind.as_str().into(),
            r.series.clone().into(),
            r.x_name.into(),
            r.x.into(),
            r.y_name.into(),
            r.y.into(),
        ];
        if with_level {
            cells.push(r.level.into());
        }
        t.push(cells);
    }
    t
}
