use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use hanabi_elites::export;
use hanabi_elites::harness::{
    action_similarity, best_partners, collect_corpus, cross_run_report, crossplay, hamming, manhattan_profile,
    spearman, CrossplayMatrix, StateCorpus,
};
use hanabi_elites::qd::{reevaluate_archive, run_map_elites_with, Archive, ArchiveFile, QdConfig};
use hanabi_elites::{catalog, catalog_hash};
use serde::Serialize;
use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

#[derive(Parser)]
#[command(name = "hanabi-elites", version, about = "MAP-Elites over rule-based Hanabi agents")]
struct Cli {
    /// Worker threads for evaluation (results do not depend on this).
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run MAP-Elites and write the archive.
    Evolve(EvolveArgs),
    /// Re-measure every elite with fresh self-play games.
    Reevaluate(ReevaluateArgs),
    /// Pairwise play between all valid elites of an archive.
    Crossplay(CrossplayArgs),
    /// Hamming distance and action similarity between corresponding elites.
    Similarity(SimilarityArgs),
    /// Pair corresponding elites of two archives.
    CrossRun(CrossRunArgs),
    /// Fitness grid as CSV (and optionally SVG).
    Export(ExportArgs),
    /// Rule catalog commands.
    Rules {
        #[command(subcommand)]
        command: RulesCommand,
    },
}

#[derive(Subcommand)]
enum RulesCommand {
    /// Print the catalog as CSV.
    List,
}

#[derive(Args, Serialize)]
struct EvolveArgs {
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 1_000_000)]
    individuals: u64,
    #[arg(long, default_value_t = 10_000)]
    init_random: u64,
    #[arg(long, default_value_t = 100)]
    games_per_eval: u32,
    /// Archive JSON path.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 10_000)]
    checkpoint_every: u64,
    /// Individuals per parallel batch; 1 is the serial reference schedule.
    #[arg(long, default_value_t = 1)]
    batch: u32,
    /// Evaluate every individual on one shared set of game seeds.
    #[arg(long)]
    frozen_seeds: bool,
}

#[derive(Args, Serialize)]
struct ReevaluateArgs {
    #[arg(long)]
    archive: PathBuf,
    #[arg(long, default_value_t = 1000)]
    games: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Re-evaluated archive JSON path.
    #[arg(long)]
    out: PathBuf,
    /// Per-elite CSV (fitness, sd, sem).
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct CrossplayArgs {
    #[arg(long)]
    archive: PathBuf,
    #[arg(long, default_value_t = 400)]
    games_per_pair: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args, Serialize)]
struct SimilarityArgs {
    #[arg(long)]
    a: PathBuf,
    /// Second archive; defaults to the first.
    #[arg(long)]
    b: Option<PathBuf>,
    /// Existing JSON-lines corpus; otherwise one is collected from the first archive.
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Self-play games per valid elite when collecting a corpus.
    #[arg(long, default_value_t = 100)]
    corpus_games: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args, Serialize)]
struct CrossRunArgs {
    #[arg(long)]
    a: PathBuf,
    #[arg(long)]
    b: PathBuf,
    /// Paired and self-play games per common niche.
    #[arg(long, default_value_t = 100)]
    games: u32,
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long, default_value_t = 100)]
    corpus_games: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args, Serialize)]
struct ExportArgs {
    #[arg(long)]
    archive: PathBuf,
    #[arg(long)]
    out_dir: PathBuf,
    /// Also write an SVG heatmap.
    #[arg(long)]
    svg: bool,
}

/// Provenance record written next to every command's outputs.
#[derive(Serialize)]
struct RunManifest {
    command: &'static str,
    tool_version: &'static str,
    arguments: serde_json::Value,
    config: Option<QdConfig>,
    master_seed: u64,
    rule_catalog_hash: &'static str,
    started_unix: u64,
    finished_unix: u64,
    inputs: Vec<PathBuf>,
    artifacts: Vec<PathBuf>,
    games_planned: u64,
}

struct Run {
    manifest: RunManifest,
}

impl Run {
    fn start(command: &'static str, args: &impl Serialize, seed: u64) -> Run {
        Run {
            manifest: RunManifest {
                command,
                tool_version: env!("CARGO_PKG_VERSION"),
                arguments: serde_json::to_value(args).expect("arguments serialize"),
                config: None,
                master_seed: seed,
                rule_catalog_hash: catalog_hash(),
                started_unix: now(),
                finished_unix: 0,
                inputs: Vec::new(),
                artifacts: Vec::new(),
                games_planned: 0,
            },
        }
    }

    fn load(&mut self, path: &Path) -> Result<(Archive, QdConfig)> {
        let loaded = ArchiveFile::load(path).with_context(|| format!("loading archive {}", path.display()))?;
        self.manifest.inputs.push(path.to_path_buf());
        Ok(loaded)
    }

    fn write(&mut self, path: &Path, contents: &str) -> Result<()> {
        write_atomic(path, contents.as_bytes())?;
        self.manifest.artifacts.push(path.to_path_buf());
        Ok(())
    }

    fn finish(mut self, manifest_path: &Path) -> Result<()> {
        self.manifest.finished_unix = now();
        self.manifest.artifacts.push(manifest_path.to_path_buf());
        let json = serde_json::to_string_pretty(&self.manifest)? + "\n";
        write_atomic(manifest_path, json.as_bytes())
    }
}

fn now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut tmp_name = path.file_name().context("output path has no file name")?.to_os_string();
    tmp_name.push(".tmp");
    let tmp = path.with_file_name(tmp_name);
    fs::write(&tmp, bytes).with_context(|| format!("writing {}", tmp.display()))?;
    fs::rename(&tmp, path).with_context(|| format!("replacing {}", path.display()))?;
    Ok(())
}

fn sidecar(path: &Path) -> PathBuf {
    let mut name = path.file_stem().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    path.with_file_name(name)
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn load_or_collect(run: &mut Run, corpus: &Option<PathBuf>, pool: &Archive, games: u32, seed: u64) -> Result<StateCorpus> {
    match corpus {
        Some(p) => {
            let f = fs::File::open(p).with_context(|| format!("opening corpus {}", p.display()))?;
            run.manifest.inputs.push(p.clone());
            Ok(StateCorpus::read_jsonl(BufReader::new(f))?)
        }
        None => {
            let elites = pool.valid_elites();
            run.manifest.games_planned += elites.len() as u64 * games as u64;
            Ok(collect_corpus(&elites, games, seed))
        }
    }
}

fn evolve(a: EvolveArgs) -> Result<()> {
    let config = QdConfig {
        total_individuals: a.individuals,
        random_init_count: a.init_random,
        games_per_eval: a.games_per_eval,
        master_seed: a.seed,
        batch_size: a.batch,
        checkpoint_every: a.checkpoint_every,
        frozen_eval_seeds: a.frozen_seeds,
    };
    config.validate()?;
    let mut run = Run::start("evolve", &a, a.seed);
    run.manifest.config = Some(config);
    // at least one game per individual; incumbent re-measurements come on top
    run.manifest.games_planned = a.individuals * a.games_per_eval as u64;
    if let Some(dir) = a.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        ensure_dir(dir)?;
    }
    let mut io_error = None;
    let result = run_map_elites_with(&config, |c| {
        if io_error.is_none() {
            if let Err(e) = c.archive.to_file(&config).save_atomic(&a.out) {
                io_error = Some(e);
            }
            eprintln!(
                "{}/{} individuals, {} niches occupied, best {:.3}",
                c.produced,
                config.total_individuals,
                c.archive.len(),
                c.archive.best().map_or(0.0, |e| e.fitness)
            );
        }
    })?;
    if let Some(e) = io_error {
        return Err(e).with_context(|| format!("writing {}", a.out.display()));
    }
    run.manifest.artifacts.push(a.out.clone());
    let s = result.stats;
    eprintln!(
        "done: {} evaluations, {} re-evaluations, {} unnichable, coverage {}",
        s.evaluations,
        s.reevaluations,
        s.unnichable,
        result.archive.coverage()
    );
    run.finish(&sidecar(&a.out))
}

fn reevaluate(a: ReevaluateArgs) -> Result<()> {
    let mut run = Run::start("reevaluate", &a, a.seed);
    let (archive, config) = run.load(&a.archive)?;
    run.manifest.config = Some(config);
    run.manifest.games_planned = archive.len() as u64 * a.games as u64;
    if a.games == 0 {
        bail!("--games must be at least 1");
    }
    let (fresh, records) = reevaluate_archive(&archive, a.games, a.seed);
    run.write(&a.out, &(fresh.to_file(&config).to_json() + "\n"))?;
    if let Some(report) = &a.report {
        run.write(report, &export::reeval_csv(&records))?;
    }
    run.finish(&sidecar(&a.out))
}

#[derive(Serialize)]
struct CrossplaySummary {
    pool: usize,
    games_per_pair: u32,
    self_play_mean: f64,
    cross_play_mean: Option<f64>,
    distance_spearman_rho: Option<f64>,
    distance_spearman_p: Option<f64>,
}

fn crossplay_cmd(a: CrossplayArgs) -> Result<()> {
    let mut run = Run::start("crossplay", &a, a.seed);
    let (archive, config) = run.load(&a.archive)?;
    run.manifest.config = Some(config);
    let pool = archive.valid_elites();
    if pool.is_empty() {
        bail!("archive has no elites with nonzero fitness");
    }
    if a.games_per_pair == 0 {
        bail!("--games-per-pair must be at least 1");
    }
    run.manifest.games_planned = CrossplayMatrix::games_planned(pool.len(), a.games_per_pair);
    eprintln!("{} elites, {} games planned", pool.len(), run.manifest.games_planned);
    ensure_dir(&a.out_dir)?;
    let m = crossplay(&pool, a.games_per_pair, a.seed)?;
    let bp = best_partners(&m);
    let profile = manhattan_profile(&m);
    let (d, s): (Vec<f64>, Vec<f64>) = profile.iter().map(|b| (b.distance as f64, b.mean)).unzip();
    let rho = spearman(&d, &s);
    let summary = CrossplaySummary {
        pool: m.len(),
        games_per_pair: a.games_per_pair,
        self_play_mean: m.self_play_mean(),
        cross_play_mean: m.cross_play_mean(),
        distance_spearman_rho: rho.map(|r| r.rho),
        distance_spearman_p: rho.map(|r| r.p_value),
    };
    let dir = &a.out_dir;
    run.write(&dir.join("crossplay.csv"), &export::crossplay_csv(&m))?;
    run.write(&dir.join("best_partners.csv"), &export::best_partners_csv(&m, &bp))?;
    run.write(&dir.join("pairwise_mean_grid.csv"), &export::pairwise_mean_grid(&m))?;
    run.write(&dir.join("best_partner_grid.csv"), &export::best_partner_grid(&m, &bp))?;
    run.write(&dir.join("distance_profile.csv"), &export::distance_profile_csv(&profile))?;
    run.write(&dir.join("summary.json"), &(serde_json::to_string_pretty(&summary)? + "\n"))?;
    run.finish(&dir.join("manifest.json"))
}

fn similarity_cmd(a: SimilarityArgs) -> Result<()> {
    let mut run = Run::start("similarity", &a, a.seed);
    let (archive_a, _) = run.load(&a.a)?;
    let archive_b = match &a.b {
        Some(p) => run.load(p)?.0,
        None => archive_a.clone(),
    };
    ensure_dir(&a.out_dir)?;
    let corpus = load_or_collect(&mut run, &a.corpus, &archive_a, a.corpus_games, a.seed)?;
    if corpus.is_empty() {
        bail!("the state corpus is empty (no valid elites to collect from)");
    }
    let mut csv = String::from("ci,ri,hamming,similarity\n");
    for (n, ea) in archive_a.iter() {
        if let Some(eb) = archive_b.get(n) {
            let sim = action_similarity(&ea.chromosome, &eb.chromosome, &corpus)?;
            csv += &format!("{},{},{},{}\n", n.ci, n.ri, hamming(&ea.chromosome, &eb.chromosome), sim);
        }
    }
    let mut jsonl = Vec::new();
    corpus.write_jsonl(&mut jsonl)?;
    run.write(&a.out_dir.join("corpus.jsonl"), std::str::from_utf8(&jsonl)?)?;
    run.write(&a.out_dir.join("similarity.csv"), &csv)?;
    eprintln!(
        "{} views, {:.2} legal actions per view",
        corpus.len(),
        corpus.mean_legal_actions().unwrap_or(0.0)
    );
    run.finish(&a.out_dir.join("manifest.json"))
}

fn cross_run_cmd(a: CrossRunArgs) -> Result<()> {
    let mut run = Run::start("cross-run", &a, a.seed);
    let (archive_a, _) = run.load(&a.a)?;
    let (archive_b, _) = run.load(&a.b)?;
    if a.games == 0 {
        bail!("--games must be at least 1");
    }
    ensure_dir(&a.out_dir)?;
    let corpus = load_or_collect(&mut run, &a.corpus, &archive_a, a.corpus_games, a.seed)?;
    let common = archive_a.iter().filter(|(n, _)| archive_b.get(*n).is_some()).count() as u64;
    run.manifest.games_planned += common * 3 * a.games as u64;
    let report = cross_run_report(&archive_a, &archive_b, a.games, a.seed, &corpus)?;
    run.write(&a.out_dir.join("cross_run.csv"), &export::cross_run_csv(&report))?;
    run.write(&a.out_dir.join("cross_run.json"), &(serde_json::to_string_pretty(&report)? + "\n"))?;
    run.finish(&a.out_dir.join("manifest.json"))
}

fn export_cmd(a: ExportArgs) -> Result<()> {
    let mut run = Run::start("export", &a, 0);
    let (archive, config) = run.load(&a.archive)?;
    run.manifest.config = Some(config);
    run.manifest.master_seed = config.master_seed;
    ensure_dir(&a.out_dir)?;
    run.write(&a.out_dir.join("fitness_grid.csv"), &export::fitness_grid(&archive))?;
    if a.svg {
        let svg = export::svg_heatmap("self-play fitness", |n| archive.get(n).map(|e| e.fitness), 25.0);
        run.write(&a.out_dir.join("fitness.svg"), &svg)?;
    }
    run.finish(&a.out_dir.join("manifest.json"))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads.max(1))
        .build_global()
        .context("starting worker pool")?;
    match cli.command {
        Command::Evolve(a) => evolve(a),
        Command::Reevaluate(a) => reevaluate(a),
        Command::Crossplay(a) => crossplay_cmd(a),
        Command::Similarity(a) => similarity_cmd(a),
        Command::CrossRun(a) => cross_run_cmd(a),
        Command::Export(a) => export_cmd(a),
        Command::Rules { command: RulesCommand::List } => {
            print!("{}", catalog().to_csv());
            Ok(())
        }
    }
}
