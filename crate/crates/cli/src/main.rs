use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use log::info;
use motifpart::eval::ipt::{EmbeddingIndex, IptOptions};
use motifpart::eval::workload::Workload;
use motifpart::graph::Edge;
use motifpart::harness::experiment::{run_experiment, write_csv, Dataset, ExperimentMatrix};
use motifpart::harness::generate::{generate_synthetic, DegreeProfile, SyntheticSpec, WorkloadStyle};
use motifpart::harness::order::{order_stream, Ordering};
use motifpart::harness::pipeline::{build_motifs, build_trie, run_partition, Algorithm, CapacityMode, PartitionConfig};
use motifpart::io::{format_edge, graph_of, read_assignment_file, read_stream_file, write_assignment, write_stream};
use motifpart::signature::{collision_probability, is_prime};

mod config;

use config::{parse_dataset, DatasetEntry, FileConfig};

#[derive(Parser)]
#[command(name = "motifpart", version, about = "Workload-aware streaming graph partitioning")]
struct Cli {
    /// TOML file with [partition], [generate] and [experiment] tables.
    /// Flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Replay a graph file's edges in BFS, DFS or random order.
    Order {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, default_value = "bfs")]
        ordering: Ordering,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Partition an edge stream and write `vertex<TAB>partition` lines.
    Partition {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        workload: PathBuf,
        #[arg(long)]
        output: PathBuf,
        #[arg(long)]
        seed: u64,
        /// Reorder the file before streaming it.
        #[arg(long, default_value = "as-is")]
        ordering: Ordering,
        #[command(flatten)]
        knobs: Knobs,
        /// Run metrics as JSON.
        #[arg(long)]
        metrics: Option<PathBuf>,
        /// Periodic matchList statistics as JSON. Needs --stats-every.
        #[arg(long)]
        matchlist_stats: Option<PathBuf>,
    },
    /// Count inter-partition traversals of a workload under an assignment.
    Evaluate {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        assignment: PathBuf,
        #[arg(long)]
        workload: PathBuf,
        /// Assignment to report a relative percentage against.
        #[arg(long)]
        baseline: Option<PathBuf>,
        #[arg(long)]
        count_automorphisms: bool,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Dump a workload's pattern trie as JSON lines.
    Trie {
        #[arg(long)]
        workload: PathBuf,
        /// Keep only motifs at or above this support.
        #[arg(long)]
        threshold: Option<f64>,
        #[arg(long)]
        prime: Option<u32>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Tabulate the factor-collision model over edge counts and primes.
    CollisionSim {
        #[arg(long, value_delimiter = ',', default_values_t = [8usize, 12, 16])]
        edges: Vec<usize>,
        #[arg(long, default_value_t = 2)]
        p_min: u32,
        #[arg(long, default_value_t = 317)]
        p_max: u32,
        /// Largest tolerated fraction of colliding factors.
        #[arg(long, default_value_t = 0.05)]
        c_max: f64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Generate a labelled graph with planted workload patterns.
    Generate {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        graph: PathBuf,
        /// Where to write the workload.
        #[arg(long)]
        workload_out: PathBuf,
        #[arg(long)]
        manifest: Option<PathBuf>,
        /// Plant this workload instead of a random one.
        #[arg(long)]
        workload: Option<PathBuf>,
        #[command(flatten)]
        spec: SpecFlags,
    },
    /// Run every algorithm over datasets, orderings, k values and seeds.
    Experiment {
        /// NAME:GRAPH:WORKLOAD, repeatable.
        #[arg(long, value_parser = parse_dataset)]
        dataset: Vec<DatasetEntry>,
        #[arg(long, value_delimiter = ',')]
        orderings: Option<Vec<Ordering>>,
        #[arg(long, value_delimiter = ',')]
        ks: Option<Vec<usize>>,
        #[arg(long, value_delimiter = ',')]
        algorithms: Option<Vec<Algorithm>>,
        #[arg(long, value_delimiter = ',')]
        windows: Option<Vec<usize>>,
        #[arg(long, value_delimiter = ',')]
        seeds: Option<Vec<u64>>,
        #[arg(long)]
        threads: Option<usize>,
        #[command(flatten)]
        knobs: Knobs,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args, Default)]
struct Knobs {
    #[arg(long)]
    algorithm: Option<Algorithm>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    window: Option<usize>,
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long)]
    prime: Option<u32>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    balance_bound: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    capacity: Option<CapacityMode>,
    #[arg(long)]
    max_matches_per_vertex: Option<usize>,
    #[arg(long)]
    stats_every: Option<usize>,
    /// Record ms per 10k edges. Makes outputs machine-dependent.
    #[arg(long)]
    timing: bool,
}

impl Knobs {
    fn apply(&self, cfg: &mut PartitionConfig) {
        macro_rules! set {
            ($($f:ident),*) => {$(if let Some(v) = self.$f { cfg.$f = v; })*};
        }
        set!(algorithm, k, window, threshold, prime, alpha, balance_bound, gamma, capacity, max_matches_per_vertex);
        if self.stats_every.is_some() {
            cfg.stats_every = self.stats_every;
        }
        cfg.timing |= self.timing;
    }
}

#[derive(Args, Default)]
struct SpecFlags {
    #[arg(long)]
    labels: Option<usize>,
    #[arg(long)]
    vertices: Option<usize>,
    #[arg(long)]
    avg_degree: Option<f64>,
    #[arg(long)]
    degree_profile: Option<DegreeProfile>,
    #[arg(long)]
    locality: Option<f64>,
    #[arg(long)]
    patterns: Option<usize>,
    #[arg(long)]
    max_pattern_edges: Option<usize>,
    #[arg(long)]
    workload_style: Option<WorkloadStyle>,
    #[arg(long)]
    schema_fraction: Option<f64>,
    #[arg(long)]
    skew: Option<f64>,
    #[arg(long)]
    planted: Option<usize>,
}

impl SpecFlags {
    fn apply(&self, spec: &mut SyntheticSpec) {
        macro_rules! set {
            ($($f:ident),*) => {$(if let Some(v) = self.$f { spec.$f = v; })*};
        }
        set!(
            labels,
            vertices,
            avg_degree,
            degree_profile,
            locality,
            patterns,
            max_pattern_edges,
            workload_style,
            schema_fraction,
            skew,
            planted
        );
    }
}

fn sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn read_workload(path: &Path) -> Result<Workload> {
    Workload::read(path).with_context(|| format!("reading workload {}", path.display()))
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let file = FileConfig::load(cli.config.as_deref())?;
    match cli.command {
        Command::Order {
            input,
            output,
            ordering,
            seed,
        } => {
            let records = read_stream_file(&input)?;
            let ordered = order_stream(&records, ordering, seed);
            let mut out = sink(output.as_deref())?;
            write_stream(&ordered, &mut out)?;
            out.flush()?;
        }
        Command::Partition {
            graph,
            workload,
            output,
            seed,
            ordering,
            knobs,
            metrics,
            matchlist_stats,
        } => {
            let mut cfg = file.partition;
            knobs.apply(&mut cfg);
            cfg.seed = seed;
            if matchlist_stats.is_some() && cfg.stats_every.is_none() {
                bail!("--matchlist-stats needs --stats-every");
            }
            let workload = read_workload(&workload)?;
            let records = order_stream(&read_stream_file(&graph)?, ordering, seed);
            let stream: Vec<Edge> = records.into_iter().map(|r| r.edge).collect();
            info!("partitioning {} edges with {}", stream.len(), cfg.algorithm);
            let run = run_partition(&stream, &workload, &cfg)?;
            let mut out = sink(Some(&output))?;
            write_assignment(&run.partitioning, &mut out)?;
            out.flush()?;
            if let Some(p) = metrics {
                write_json(&p, &run.metrics)?;
            }
            if let Some(p) = matchlist_stats {
                write_json(&p, &run.matchlist_stats)?;
            }
        }
        Command::Evaluate {
            graph,
            assignment,
            workload,
            baseline,
            count_automorphisms,
            output,
        } => {
            let g = graph_of(&read_stream_file(&graph)?)?;
            let workload = read_workload(&workload)?;
            let index = EmbeddingIndex::build(&g, &workload, IptOptions { count_automorphisms });
            let report = index.ipt(&read_assignment_file(&assignment, None)?)?;
            let base = match baseline {
                Some(b) => Some(index.ipt(&read_assignment_file(&b, None)?)?),
                None => None,
            };
            let mut out = sink(output.as_deref())?;
            report.write_csv(base.as_ref(), &mut out)?;
            out.flush()?;
        }
        Command::Trie {
            workload,
            threshold,
            prime,
            seed,
            output,
        } => {
            let mut cfg = file.partition;
            cfg.prime = prime.unwrap_or(cfg.prime);
            cfg.seed = seed.unwrap_or(cfg.seed);
            let workload = read_workload(&workload)?;
            let trie = match threshold {
                Some(t) => {
                    cfg.threshold = t;
                    build_motifs(&workload, &cfg)?
                }
                None => build_trie(&workload, &cfg)?,
            };
            let mut out = sink(output.as_deref())?;
            trie.write_json_lines(&mut out)?;
            out.flush()?;
        }
        Command::CollisionSim {
            edges,
            p_min,
            p_max,
            c_max,
            output,
        } => {
            if !(0.0..=1.0).contains(&c_max) {
                bail!("--c-max must lie in [0, 1]");
            }
            let mut out = sink(output.as_deref())?;
            writeln!(out, "edges,p,c_max,probability")?;
            for &m in &edges {
                for p in (p_min..=p_max).filter(|&p| is_prime(p)) {
                    writeln!(out, "{m},{p},{c_max},{:.12}", collision_probability(m, p, c_max))?;
                }
            }
            out.flush()?;
        }
        Command::Generate {
            seed,
            graph,
            workload_out,
            manifest,
            workload,
            spec: flags,
        } => {
            let mut spec = file.generate;
            flags.apply(&mut spec);
            spec.seed = seed;
            let planted = workload.as_deref().map(read_workload).transpose()?;
            let data = generate_synthetic(&spec, planted)?;
            let mut out = sink(Some(&graph))?;
            for e in &data.edges {
                writeln!(out, "{}", format_edge(e))?;
            }
            out.flush()?;
            data.workload.write(&workload_out)?;
            if let Some(p) = manifest {
                write_json(&p, &data.manifest)?;
            }
        }
        Command::Experiment {
            dataset,
            orderings,
            ks,
            algorithms,
            windows,
            seeds,
            threads,
            knobs,
            output,
        } => {
            let ex = file.experiment;
            let mut base = file.partition;
            knobs.apply(&mut base);
            let entries = if dataset.is_empty() { ex.datasets } else { dataset };
            if entries.is_empty() {
                bail!("no datasets: pass --dataset or list them under [experiment]");
            }
            let datasets = entries
                .iter()
                .map(|d| {
                    Ok(Dataset {
                        name: d.name.clone(),
                        records: read_stream_file(&d.graph)?,
                        workload: read_workload(&d.workload)?,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            let matrix = ExperimentMatrix {
                orderings: orderings.unwrap_or(ex.orderings),
                ks: ks.unwrap_or(ex.ks),
                algorithms: algorithms.unwrap_or(ex.algorithms),
                windows: windows.unwrap_or(ex.windows),
                seeds: seeds.unwrap_or(ex.seeds),
                base,
                threads: threads.unwrap_or(ex.threads),
            };
            let rows = run_experiment(&datasets, &matrix)?;
            let mut out = sink(output.as_deref())?;
            write_csv(&rows, &mut out)?;
            out.flush()?;
        }
    }
    Ok(())
}
