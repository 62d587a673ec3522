//! Command implementations behind the binary: instance generation,
//! training, solving, evaluation and SVG plotting.
//!
//! Instance files ending in `.tsp` are parsed as TSPLIB EUC_2D; everything
//! else uses the native text format. Every randomized command takes an
//! explicit seed, so reruns reproduce outputs byte for byte.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};

use crate::instance::{
    derive_seed, gen_clustered, gen_random, read_native, write_native, Tour, TspInstance,
};
use crate::mcts::{best_of_starts, solve_instance_traced, NetValue, SearchConfig};
use crate::net::{load_checkpoint, save_checkpoint};
use crate::oracles::{
    brute_force_opt, held_karp, nearest_neighbor, optimality_gap, two_opt, SolveResult,
    HELD_KARP_MAX_N,
};
use crate::plot::render_svg;
use crate::report::{EvalRecord, EvalReport};
use crate::trainer::{train_with_hook, TrainConfig};
use crate::tsplib::read_tsplib;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GenKind {
    Random,
    Clustered,
}

impl GenKind {
    pub fn label(self) -> &'static str {
        match self {
            GenKind::Random => "random",
            GenKind::Clustered => "clustered",
        }
    }
}

impl FromStr for GenKind {
    type Err = anyhow::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(GenKind::Random),
            "clustered" => Ok(GenKind::Clustered),
            other => bail!("unknown instance kind {other:?} (random|clustered)"),
        }
    }
}

/// Start-city selection for solving: every city, city 0 only, or an
/// explicit comma-separated list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StartSpec {
    All,
    One,
    List(Vec<usize>),
}

impl FromStr for StartSpec {
    type Err = anyhow::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all" => Ok(StartSpec::All),
            "one" => Ok(StartSpec::One),
            list => {
                let starts = list
                    .split(',')
                    .map(|t| {
                        t.trim()
                            .parse::<usize>()
                            .map_err(|_| anyhow!("bad start index {t:?}"))
                    })
                    .collect::<Result<Vec<_>>>()?;
                if starts.is_empty() {
                    bail!("empty start list");
                }
                Ok(StartSpec::List(starts))
            }
        }
    }
}

impl StartSpec {
    pub fn resolve(&self, n: usize) -> Result<Vec<usize>> {
        let starts = match self {
            StartSpec::All => (0..n).collect(),
            StartSpec::One => vec![0],
            StartSpec::List(list) => {
                for &s in list {
                    if s >= n {
                        bail!("start city {s} out of range (n={n})");
                    }
                }
                list.clone()
            }
        };
        Ok(starts)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalMethod {
    Mcts,
    HeldKarp,
    BruteForce,
    NearestNeighbor,
    TwoOpt,
}

impl EvalMethod {
    pub fn label(self) -> &'static str {
        match self {
            EvalMethod::Mcts => "mcts",
            EvalMethod::HeldKarp => "held_karp",
            EvalMethod::BruteForce => "brute_force",
            EvalMethod::NearestNeighbor => "nearest_neighbor",
            EvalMethod::TwoOpt => "two_opt",
        }
    }
}

impl FromStr for EvalMethod {
    type Err = anyhow::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mcts" => Ok(EvalMethod::Mcts),
            "held_karp" => Ok(EvalMethod::HeldKarp),
            "brute_force" => Ok(EvalMethod::BruteForce),
            "nearest_neighbor" => Ok(EvalMethod::NearestNeighbor),
            "two_opt" => Ok(EvalMethod::TwoOpt),
            other => bail!(
                "unknown method {other:?} (mcts|held_karp|brute_force|nearest_neighbor|two_opt)"
            ),
        }
    }
}

/// Load an instance file, picking the parser from the extension.
pub fn load_instance(path: &Path) -> Result<TspInstance> {
    let inst = if path.extension().is_some_and(|e| e == "tsp") {
        read_tsplib(path).with_context(|| format!("reading TSPLIB file {}", path.display()))?
    } else {
        read_native(path).with_context(|| format!("reading instance {}", path.display()))?
    };
    Ok(inst)
}

fn instance_id(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

/// Generate `count` instance files with derived per-file seeds.
pub fn cmd_generate(
    kind: GenKind,
    n: usize,
    count: usize,
    seed: u64,
    out_dir: &Path,
) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out_dir)
        .with_context(|| format!("creating output directory {}", out_dir.display()))?;
    let mut paths = Vec::with_capacity(count);
    for i in 0..count {
        let file_seed = derive_seed(seed, i as u64);
        let inst = match kind {
            GenKind::Random => gen_random(n, file_seed)?,
            GenKind::Clustered => gen_clustered(n, file_seed)?,
        };
        let path = out_dir.join(format!("{}_n{}_{:04}.inst", kind.label(), n, i));
        write_native(&inst, &path)
            .with_context(|| format!("writing instance {}", path.display()))?;
        paths.push(path);
    }
    Ok(paths)
}

/// Sorted instance files of a directory (native or TSPLIB).
pub fn dataset_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .with_context(|| format!("reading dataset directory {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.is_file()
                && p.extension()
                    .is_some_and(|e| e == "inst" || e == "tsp")
        })
        .collect();
    files.sort();
    Ok(files)
}

/// Run training on a dataset directory, writing the checkpoint and a
/// training log.
pub fn cmd_train(
    config_path: Option<&Path>,
    dataset_dir: &Path,
    out_checkpoint: &Path,
    seed: u64,
    log_path: Option<&Path>,
) -> Result<()> {
    let config = match config_path {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .with_context(|| format!("reading config {}", p.display()))?;
            TrainConfig::parse(&text)?
        }
        None => TrainConfig::default(),
    };
    let files = dataset_files(dataset_dir)?;
    if files.is_empty() {
        bail!(
            "insufficient data: no instance files in {}",
            dataset_dir.display()
        );
    }
    let mut dataset = files
        .iter()
        .map(|p| load_instance(p))
        .collect::<Result<Vec<_>>>()?;
    if dataset.len() > config.graphs_per_run {
        // Deterministic subsample of graphs_per_run instances.
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let mut rng =
            rand_chacha::ChaCha8Rng::seed_from_u64(derive_seed(seed, 0x6772_6170_6873)); // "graphs"
        let mut indices: Vec<usize> = (0..dataset.len()).collect();
        indices.shuffle(&mut rng);
        indices.truncate(config.graphs_per_run);
        indices.sort_unstable();
        dataset = indices.into_iter().map(|i| dataset[i].clone()).collect();
    }

    let log_file = log_path
        .map(PathBuf::from)
        .unwrap_or_else(|| out_checkpoint.with_extension("log"));
    let mut log = String::new();
    let checkpoint_every = config.checkpoint_every;
    let run = train_with_hook(&dataset, &config, seed, &mut |record, params, adam| {
        let _ = writeln!(log, "{}", record.log_line());
        if (record.episode + 1) % checkpoint_every == 0 {
            let _ = save_checkpoint(out_checkpoint, params, Some(adam));
        }
    })?;
    save_checkpoint(out_checkpoint, &run.params, Some(&run.adam))
        .with_context(|| format!("writing checkpoint {}", out_checkpoint.display()))?;
    std::fs::write(&log_file, log)
        .with_context(|| format!("writing training log {}", log_file.display()))?;
    println!(
        "trained {} episodes on {} graphs -> {}",
        run.episodes.len(),
        dataset.len(),
        out_checkpoint.display()
    );
    Ok(())
}

/// Solve one instance with a trained checkpoint; returns the tour length.
pub fn cmd_solve(
    checkpoint: &Path,
    instance: &Path,
    starts: &StartSpec,
    playouts: Option<usize>,
    out_tour: Option<&Path>,
    trace_path: Option<&Path>,
) -> Result<f64> {
    let ck = load_checkpoint(checkpoint)
        .with_context(|| format!("reading checkpoint {}", checkpoint.display()))?;
    let inst = load_instance(instance)?;
    let mut config = SearchConfig::default();
    if let Some(p) = playouts {
        config.playouts = p;
    }
    let start_list = starts.resolve(inst.n())?;
    let est = NetValue::new(&ck.params);

    let tour = if trace_path.is_some() {
        let mut trace = String::new();
        let mut best: Option<(f64, Tour)> = None;
        let mut ordered = start_list.clone();
        ordered.sort_unstable();
        ordered.dedup();
        for &start in &ordered {
            let (tour, moves) = solve_instance_traced(&inst, &est, start, &config)?;
            for (i, m) in moves.iter().enumerate() {
                let _ = writeln!(trace, "start={start}\t{}", m.trace_line(i));
            }
            let len = inst.tour_length(&tour);
            if best.as_ref().is_none_or(|(l, _)| len < *l) {
                best = Some((len, tour));
            }
        }
        std::fs::write(trace_path.unwrap(), trace)?;
        best.expect("at least one start").1
    } else {
        best_of_starts(&inst, &est, &config, &start_list)?
    };

    let length = inst.tour_length(&tour);
    let out = out_tour
        .map(PathBuf::from)
        .unwrap_or_else(|| instance.with_extension("tour"));
    std::fs::write(&out, tour.to_line())
        .with_context(|| format!("writing tour {}", out.display()))?;
    println!(
        "instance={} n={} starts={} length={:.3} tour={}",
        instance_id(instance),
        inst.n(),
        start_list.len(),
        length,
        out.display()
    );
    Ok(length)
}

/// Evaluate methods over a directory of instances and write the report.
pub fn cmd_eval(
    checkpoint: Option<&Path>,
    instance_dir: &Path,
    methods: &[EvalMethod],
    out_report: &Path,
    playouts: Option<usize>,
) -> Result<()> {
    if methods.is_empty() {
        bail!("no methods requested");
    }
    let files = dataset_files(instance_dir)?;
    if files.is_empty() {
        bail!("no instance files in {}", instance_dir.display());
    }
    let params = match checkpoint {
        Some(p) => Some(
            load_checkpoint(p)
                .with_context(|| format!("reading checkpoint {}", p.display()))?
                .params,
        ),
        None => None,
    };
    if methods.contains(&EvalMethod::Mcts) && params.is_none() {
        bail!("method mcts requires --checkpoint");
    }
    let mut config = SearchConfig::default();
    if let Some(p) = playouts {
        config.playouts = p;
    }

    let mut report = EvalReport::new();
    report.notes.push(
        "ratio column is c/c* (table form); the subtracted optimality gap is ratio-1".into(),
    );
    report.notes.push(
        "generated instances use exact euclidean distances; tsplib instances round per EUC_2D"
            .into(),
    );
    for path in &files {
        let inst = load_instance(path)?;
        let id = instance_id(path);
        // Exact reference for the ratio column, where feasible.
        let exact = if inst.n() <= HELD_KARP_MAX_N {
            Some(held_karp(&inst)?.length)
        } else {
            None
        };
        for &method in methods {
            let result: SolveResult = match method {
                EvalMethod::HeldKarp => held_karp(&inst)?,
                EvalMethod::BruteForce => brute_force_opt(&inst)?,
                EvalMethod::NearestNeighbor => nearest_neighbor(&inst, 0)?,
                EvalMethod::TwoOpt => {
                    let seedtour = nearest_neighbor(&inst, 0)?;
                    two_opt(&inst, &seedtour.tour)?
                }
                EvalMethod::Mcts => {
                    let est = NetValue::new(params.as_ref().expect("checked above"));
                    let started = Instant::now();
                    let tour = crate::mcts::solve_instance(&inst, &est, 0, &config)?;
                    let length = inst.tour_length(&tour);
                    SolveResult {
                        tour,
                        length,
                        method: "mcts",
                        elapsed: started.elapsed(),
                    }
                }
            };
            let ratio = exact
                .map(|e| optimality_gap(result.length, e))
                .transpose()?;
            report.push(EvalRecord {
                instance: id.clone(),
                method: result.method.to_string(),
                length: result.length,
                exact,
                ratio,
                elapsed_ms: result.elapsed.as_secs_f64() * 1e3,
            });
        }
    }
    let rendered = report.render();
    std::fs::write(out_report, &rendered)
        .with_context(|| format!("writing report {}", out_report.display()))?;
    for method in report.methods() {
        if let Some(mean) = report.mean_ratio(&method) {
            println!("mean ratio {method}: {mean:.3}");
        }
    }
    Ok(())
}

/// Render an instance plus tour to SVG.
pub fn cmd_plot(instance: &Path, tour_path: &Path, out_svg: &Path) -> Result<()> {
    let inst = load_instance(instance)?;
    let tour_text = std::fs::read_to_string(tour_path)
        .with_context(|| format!("reading tour {}", tour_path.display()))?;
    let tour = Tour::from_line(&tour_text, inst.n())?;
    std::fs::write(out_svg, render_svg(&inst, &tour))
        .with_context(|| format!("writing svg {}", out_svg.display()))?;
    Ok(())
}
