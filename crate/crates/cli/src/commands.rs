use std::io::Write;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::time::Duration;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use evasilab::formats::{strategy_to_dot, strategy_to_json_pretty, PropertySpec};
use evasilab::scanner::{scan, ScanMode, ScanOptions, ScanReport};
use evasilab::solver::strategy_from_report;
use evasilab::{solve, ClassTable, PositionTable};
use serde::Serialize;

use crate::server;

#[derive(Debug, Parser)]
#[command(
    name = "evasilab",
    version,
    about = "Decision-tree complexity of small graph properties"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List the isomorphism classes of graphs on n vertices.
    Graphs {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        json: bool,
    },
    /// Show the position classes of the game on n vertices.
    Positions {
        #[arg(long)]
        n: usize,
        /// Print only the number of position classes with an unknown edge.
        #[arg(long)]
        count: bool,
    },
    /// Solve the game for one property.
    Solve {
        #[arg(long)]
        n: usize,
        /// `builtin:NAME` or a path to a property document.
        #[arg(long)]
        property: String,
        /// Write the optimal strategy tree as JSON.
        #[arg(long)]
        strategy: Option<PathBuf>,
        /// Write the optimal strategy tree as Graphviz DOT.
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Sweep a space of properties looking for nonevasive ones.
    Scan(ScanArgs),
    /// Serve the JSON game API.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: std::net::IpAddr,
        /// Seconds of inactivity before a game is dropped.
        #[arg(long, default_value_t = 3600)]
        idle_secs: u64,
    },
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, value_parser = parse_mode)]
    pub mode: ScanMode,
    #[arg(long, default_value_t = 1000)]
    pub sample_size: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// In sample mode, sweep everything when the sample would cover the space.
    #[arg(long)]
    pub exhaustive_fallback: bool,
    #[arg(long)]
    pub parity_prune: bool,
    /// Examine every candidate instead of one per duality orbit.
    #[arg(long)]
    pub no_dualities: bool,
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    #[arg(long, requires = "checkpoint")]
    pub resume: bool,
    /// Stop after this many candidates; resume later from the checkpoint.
    #[arg(long)]
    pub stop_at: Option<u64>,
    #[arg(long, env = "EVASILAB_WORKERS")]
    pub workers: Option<usize>,
    /// Print the report as JSON.
    #[arg(long)]
    pub json: bool,
}

fn parse_mode(s: &str) -> Result<ScanMode, String> {
    s.parse().map_err(|e: evasilab::Error| e.to_string())
}

pub fn run(cli: Cli, out: &mut dyn Write) -> anyhow::Result<()> {
    match cli.command {
        Command::Graphs { n, json } => graphs(n, json, out),
        Command::Positions { n, count } => positions(n, count, out),
        Command::Solve {
            n,
            property,
            strategy,
            dot,
        } => solve_cmd(n, &property, strategy, dot, out),
        Command::Scan(args) => scan_cmd(&args, out),
        Command::Serve { port, host, idle_secs } => {
            let addr = SocketAddr::new(host, port);
            let runtime = tokio::runtime::Runtime::new().context("starting runtime")?;
            runtime.block_on(server::serve(addr, Duration::from_secs(idle_secs)))
        }
    }
}

#[derive(Serialize)]
struct GraphRow {
    id: usize,
    code: String,
    edges: Vec<[usize; 2]>,
    aut_order: usize,
    orbit_size: usize,
    complement: usize,
}

fn graphs(n: usize, json: bool, out: &mut dyn Write) -> anyhow::Result<()> {
    let table = ClassTable::shared(n)?;
    let rows: Vec<GraphRow> = (0..table.len())
        .map(|id| GraphRow {
            id,
            code: table.code(id).to_string(n),
            edges: table
                .representative(id)
                .pairs()
                .into_iter()
                .map(|(u, v)| [u, v])
                .collect(),
            aut_order: table.aut_order(id),
            orbit_size: table.orbit_size(id),
            complement: table.complement_class(id),
        })
        .collect();
    if json {
        serde_json::to_writer_pretty(&mut *out, &rows)?;
        writeln!(out)?;
        return Ok(());
    }
    writeln!(out, "{} classes on {n} vertices", rows.len())?;
    writeln!(
        out,
        "{:>4}  {:<15}  {:>4}  {:>5}  {:>4}  edges",
        "id", "code", "aut", "orbit", "comp"
    )?;
    for r in &rows {
        let edges: Vec<String> = r.edges.iter().map(|[u, v]| format!("{u}{v}")).collect();
        writeln!(
            out,
            "{:>4}  {:<15}  {:>4}  {:>5}  {:>4}  {}",
            r.id,
            r.code,
            r.aut_order,
            r.orbit_size,
            r.complement,
            edges.join(" ")
        )?;
    }
    Ok(())
}

fn positions(n: usize, count: bool, out: &mut dyn Write) -> anyhow::Result<()> {
    let table = PositionTable::shared(n)?;
    if count {
        writeln!(out, "{}", table.len())?;
        return Ok(());
    }
    writeln!(
        out,
        "{} position classes with unknown edges, {} completed graphs",
        table.len(),
        table.node_count() - table.len()
    )?;
    for (unknown, c) in table.level_counts().iter().enumerate() {
        writeln!(out, "unknown={unknown:<2} classes={c}")?;
    }
    Ok(())
}

fn solve_cmd(
    n: usize,
    spec: &str,
    strategy: Option<PathBuf>,
    dot: Option<PathBuf>,
    out: &mut dyn Write,
) -> anyhow::Result<()> {
    let property = PropertySpec::parse(spec)?.load(n)?;
    let table = PositionTable::shared(n)?;
    let report = solve(&property, table)?;
    let kind = if report.is_evasive() { "evasive" } else { "nonevasive" };
    writeln!(out, "{kind}, depth {}", report.depth())?;
    if strategy.is_some() || dot.is_some() {
        let tree = strategy_from_report(&report, table)?;
        if let Some(path) = strategy {
            std::fs::write(&path, strategy_to_json_pretty(&tree) + "\n")
                .with_context(|| format!("writing {}", path.display()))?;
        }
        if let Some(path) = dot {
            std::fs::write(&path, strategy_to_dot(&tree)).with_context(|| format!("writing {}", path.display()))?;
        }
    }
    Ok(())
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn scan_cmd(args: &ScanArgs, out: &mut dyn Write) -> anyhow::Result<()> {
    let workers = args.workers.unwrap_or_else(default_workers);
    if workers == 0 {
        bail!("--workers must be at least 1");
    }
    let options = ScanOptions {
        dualities: !args.no_dualities,
        parity_prune: args.parity_prune,
        workers,
        checkpoint: args.checkpoint.clone(),
        resume: args.resume,
        stop_at: args.stop_at,
        sample_size: args.sample_size,
        seed: args.seed,
        exhaustive_fallback: args.exhaustive_fallback,
        ..ScanOptions::default()
    };
    let report = scan(args.n, args.mode, &options)?;
    eprintln!("scan wall time {:.3} s", report.wall_time.as_secs_f64());
    if args.json {
        serde_json::to_writer_pretty(&mut *out, &report.without_timing())?;
        writeln!(out)?;
    } else {
        write_scan_report(&report, out)?;
    }
    Ok(())
}

fn write_scan_report(report: &ScanReport, out: &mut dyn Write) -> anyhow::Result<()> {
    let c = &report.counters;
    writeln!(
        out,
        "n={} mode={} candidates={} next={}",
        report.n, report.mode, report.candidates, report.next
    )?;
    writeln!(
        out,
        "examined={} skipped_set_dual={} skipped_graph_dual={} pruned_parity={} evasive={} nonevasive={}",
        c.examined, c.skipped_set_dual, c.skipped_graph_dual, c.pruned_parity, c.evasive, c.nonevasive
    )?;
    if !report.is_complete() {
        writeln!(
            out,
            "incomplete: stopped at candidate {} of {}",
            report.next, report.candidates
        )?;
    }
    let label = if report.is_complete() { "" } else { " so far" };
    writeln!(out, "{} nontrivial nonevasive{label}", report.findings.len())?;
    for ids in &report.findings {
        let ids: Vec<String> = ids.iter().map(ToString::to_string).collect();
        writeln!(out, "  size {}: [{}]", ids.len(), ids.join(","))?;
    }
    Ok(())
}
