use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::Path;
use std::process::ExitCode;

use log::info;
use partmatch_core::engine::{execute, EngineConfig, Metrics};
use partmatch_core::error::IoError;
use partmatch_core::graph::{parse_graph, Graph};
use partmatch_core::oracle::brute_force;
use partmatch_core::partition::{balance, edge_cut, hash_assign, kway_assign};
use partmatch_core::query::{compile, parse_query, ConjunctiveQuery};
use partmatch_core::routing::{build_pair, DesignConfig};
use partmatch_core::synth::{synth_graph, SynthParams};
use partmatch_core::prelude::{Design, MonotonicClock};
use partmatch_core::{Error, Result};

use crate::args::{BenchArgs, DesignArgs, GraphSource, PartitionArgs, RunArgs, Strategy, SynthArgs};

pub const EXIT_MISMATCH: u8 = 2;

fn io_context(path: &Path, err: io::Error) -> Error {
    Error::Io(IoError(format!("{}: {err}", path.display())))
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| io_context(path, e))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| io_context(path, e))
}

/// Buffered file, or standard output when no path is given.
fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(create(p)?),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn load_graph(source: &GraphSource, seed: u64) -> Result<Graph> {
    match (&source.graph, source.synth_vertices) {
        (Some(path), _) => parse_graph(open(path)?),
        (None, Some(vertices)) => synth_graph(SynthParams {
            vertices,
            edges: source.synth_edges.unwrap_or(0),
            labels: source.synth_labels,
            model: source.synth_model,
            seed,
        }),
        (None, None) => Err(Error::Config("either --graph or --synth-vertices is required".into())),
    }
}

fn load_query(path: &Path) -> Result<ConjunctiveQuery> {
    parse_query(open(path)?)
}

fn design_config(args: &DesignArgs, design: Design, redundancy: bool) -> DesignConfig {
    DesignConfig::new(design, args.partitions as usize)
        .redundancy(redundancy)
        .seed(args.seed)
        .nodes(args.nodes as usize)
        .epsilon(args.epsilon)
}

fn engine_config(args: &DesignArgs, workers: u32) -> EngineConfig {
    EngineConfig {
        workers_per_node: workers as usize,
        nodes: args.nodes as usize,
        batch_size: args.batch_size,
        ..Default::default()
    }
}

pub fn run(args: &RunArgs) -> Result<ExitCode> {
    let d = &args.design_args;
    let graph = load_graph(&args.source, d.seed)?;
    let query = load_query(&args.query)?;
    info!("graph: {} vertices, {} edges", graph.vertex_count(), graph.edge_count());

    let built = build_pair(&graph, &design_config(d, args.design, args.redundancy))?;
    let qep = compile(&query, args.redundancy, d.semantics)?;
    let run = execute(&qep, &built, &engine_config(d, args.workers), &MonotonicClock::new())?;

    if let Some(path) = &args.results {
        let mut out = create(path)?;
        run.results.write_tsv(&graph, &mut out)?;
        out.flush().map_err(|e| io_context(path, e))?;
    }
    if let Some(path) = &args.metrics {
        let mut out = create(path)?;
        run.metrics.write_csv(&mut out).and_then(|_| out.flush()).map_err(|e| io_context(path, e))?;
    }

    let m = &run.metrics;
    println!(
        "design={} partitions={} workers={} redundancy={} semantics={} results={} runtime_ns={} broadcast_fanout={} msgs={}",
        args.design,
        d.partitions,
        args.workers,
        if args.redundancy { "on" } else { "off" },
        d.semantics,
        run.results.len(),
        m.runtime_ns,
        m.broadcast_fanout,
        m.total_processed()
    );

    if args.oracle {
        let expected = brute_force(&graph, &query, d.semantics);
        if expected.tuples == run.results.tuples {
            println!("oracle: MATCH ({} tuples)", expected.count());
        } else {
            println!("oracle: MISMATCH (engine {} tuples, oracle {} tuples)", run.results.len(), expected.count());
            return Ok(ExitCode::from(EXIT_MISMATCH));
        }
    }
    Ok(ExitCode::SUCCESS)
}

pub fn partition(args: &PartitionArgs) -> Result<ExitCode> {
    let graph = load_graph(&args.source, args.seed)?;
    let p = args.partitions as usize;
    let assignment = match args.strategy {
        Strategy::Hash => hash_assign(graph.vertex_count(), p)?,
        Strategy::Kway => kway_assign(&graph, p, args.epsilon, args.seed)?,
    };
    let mut out = output(args.output.as_deref())?;
    for (v, &part) in assignment.parts().iter().enumerate() {
        let token = graph.vertex_token(v as u32).expect("assignment covers the graph");
        writeln!(out, "{token}\t{part}")?;
    }
    writeln!(out, "# cut={} balance={:.4}", edge_cut(&graph, &assignment), balance(&assignment))?;
    out.flush()?;
    Ok(ExitCode::SUCCESS)
}

pub const SUMMARY_HEADER: &str = "design,workers,redundancy,median_runtime_ns,broadcast_fanout,ideal_runtime_ns";
pub const METRICS_HEADER: &str = "design,workers,redundancy,rep,metric,op_index,worker,value";

struct Cell {
    runtimes: Vec<u64>,
    fanout: u64,
}

fn median(values: &[u64]) -> u64 {
    let mut v = values.to_vec();
    v.sort_unstable();
    v[v.len() / 2]
}

pub fn bench(args: &BenchArgs) -> Result<ExitCode> {
    let d = &args.design_args;
    let graph = load_graph(&args.source, d.seed)?;
    let query = load_query(&args.query)?;
    let clock = MonotonicClock::new();
    let mut metrics_out = args.metrics.as_deref().map(create).transpose()?;
    if let Some(out) = metrics_out.as_mut() {
        writeln!(out, "{METRICS_HEADER}")?;
    }

    // (design index, redundancy, workers) -> measurements
    let mut cells: BTreeMap<(usize, bool, u32), Cell> = BTreeMap::new();
    for (di, &design) in args.designs.iter().enumerate() {
        for &red in &args.redundancy {
            let built = build_pair(&graph, &design_config(d, design, red))?;
            let qep = compile(&query, red, d.semantics)?;
            for &workers in &args.sweep_workers {
                let mut cell = Cell { runtimes: Vec::new(), fanout: 0 };
                for rep in 0..args.reps {
                    let run = execute(&qep, &built, &engine_config(d, workers), &clock)?;
                    info!("{design} workers={workers} redundancy={red} rep={rep}: {} ns", run.metrics.runtime_ns);
                    cell.runtimes.push(run.metrics.runtime_ns);
                    cell.fanout = run.metrics.broadcast_fanout;
                    if let Some(out) = metrics_out.as_mut() {
                        write_metrics_group(out, &design.to_string(), workers, red, rep, &run.metrics)?;
                    }
                }
                cells.insert((di, red, workers), cell);
            }
        }
    }
    if let Some(mut out) = metrics_out {
        out.flush()?;
    }

    let mut out = output(args.summary.as_deref())?;
    writeln!(out, "{SUMMARY_HEADER}")?;
    for (di, &design) in args.designs.iter().enumerate() {
        for &red in &args.redundancy {
            // Ideal scaling extrapolated from the two-worker runtime.
            let two = cells.get(&(di, red, 2)).map(|c| median(&c.runtimes));
            for &workers in &args.sweep_workers {
                let cell = &cells[&(di, red, workers)];
                let ideal = two.map(|t| (t * 2 / workers as u64).to_string()).unwrap_or_default();
                writeln!(
                    out,
                    "{design},{workers},{},{},{},{ideal}",
                    if red { "on" } else { "off" },
                    median(&cell.runtimes),
                    cell.fanout
                )?;
            }
        }
    }
    out.flush()?;
    Ok(ExitCode::SUCCESS)
}

fn write_metrics_group<W: Write>(out: &mut W, design: &str, workers: u32, red: bool, rep: u32, m: &Metrics) -> Result<()> {
    let red = if red { "on" } else { "off" };
    for row in m.csv_rows() {
        writeln!(out, "{design},{workers},{red},{rep},{row}")?;
    }
    Ok(())
}

pub fn synth(args: &SynthArgs) -> Result<ExitCode> {
    let graph = synth_graph(SynthParams {
        vertices: args.vertices,
        edges: args.edges,
        labels: args.labels,
        model: args.model,
        seed: args.seed,
    })?;
    let mut out = output(args.output.as_deref())?;
    graph.write_text(&mut out)?;
    out.flush()?;
    Ok(ExitCode::SUCCESS)
}
