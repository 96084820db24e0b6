//! Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
//!
//! Criteria 5 to 8 share two desk-scale runs (seeds 1 and 2, 10^5 individuals,
//! 30 games per evaluation, serial schedule), which take several minutes each.

#[allow(dead_code)]
#[path = "../../core/tests/support/belief_oracle.rs"]
mod belief_oracle;
#[allow(dead_code)]
#[path = "../../core/tests/support/engine_scripts.rs"]
mod engine_scripts;

use hanabi_elites::agent::{crossover, decide, fallback, mutate, Chromosome, CHROMOSOME_LEN};
use hanabi_elites::belief::playability;
use hanabi_elites::descriptors::BehaviorDescriptor;
use hanabi_elites::game::TerminalReason;
use hanabi_elites::harness::{
    collect_corpus, cross_run_report, crossplay, manhattan_profile, spearman, CrossplayMatrix,
};
use hanabi_elites::qd::{reevaluate_archive, run_map_elites};
use hanabi_elites::sim::play_game;
use hanabi_elites::{niche_of, Action, Archive, BehaviorStats, GameState, PlayerView, QdConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

const DESK_INDIVIDUALS: u64 = 100_000;
const DESK_INIT: u64 = 10_000;
const DESK_GAMES: u32 = 30;
const REEVAL_GAMES: u32 = 1000;
const CROSSPLAY_GAMES: u32 = 100;
const CROSS_RUN_GAMES: u32 = 100;
const CORPUS_GAMES: u32 = 10;
const ANALYSIS_SEED: u64 = 99;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn secs(d: Duration) -> String {
    format!("{:.2}s", d.as_secs_f64())
}

fn engine_oracle() -> Outcome {
    let start = Instant::now();
    let scripts = engine_scripts::scripts();
    let failures: Vec<String> = scripts
        .iter()
        .filter_map(|s| engine_scripts::check(s).err().map(|e| format!("{}: {e}", s.name)))
        .collect();
    let elapsed = start.elapsed();
    let has = |pred: &dyn Fn(&engine_scripts::Script) -> bool| scripts.iter().any(pred);
    let perfect = has(&|s| s.expect.score == 25);
    let misplay = has(&|s| s.expect.terminal == Some(TerminalReason::LivesExhausted));
    let exhausted = has(&|s| s.expect.terminal == Some(TerminalReason::DeckExhausted));
    let pass = failures.is_empty() && scripts.len() >= 20 && perfect && misplay && exhausted && elapsed < Duration::from_secs(1);
    outcome(
        pass,
        format!(
            "{} scripts, {} mismatches, perfect/3-misplay/deck-exhaustion present: {perfect}/{misplay}/{exhausted}, {}{}",
            scripts.len(),
            failures.len(),
            secs(elapsed),
            failures.first().map(|f| format!("; first: {f}")).unwrap_or_default()
        ),
    )
}

fn belief_equivalence() -> Outcome {
    const POSITIONS: usize = 1200;
    let start = Instant::now();
    let res = belief_oracle::run_small(POSITIONS, 2024);
    let elapsed = start.elapsed();
    match res {
        Ok(slots) => outcome(
            elapsed < Duration::from_secs(30),
            format!("{POSITIONS} positions, {slots} slots exact, {}", secs(elapsed)),
        ),
        Err(e) => outcome(false, format!("mismatch: {e}")),
    }
}

/// Sample mean and its standard error.
fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn operator_statistics() -> Outcome {
    const TRIALS: usize = 100_000;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let changed: Vec<f64> = (0..TRIALS)
        .map(|_| {
            let c = Chromosome::random(&mut rng);
            let m = mutate(&c, &mut rng);
            c.genes().iter().zip(m.genes()).filter(|(a, b)| a != b).count() as f64
        })
        .collect();
    let (m_mean, m_se) = mean_se(&changed);
    let m_want = CHROMOSOME_LEN as f64 * 0.1 * 134.0 / 135.0;

    // parents that differ at every position, so each child gene reveals its source
    let from_a: Vec<f64> = (0..TRIALS)
        .map(|_| {
            let a = Chromosome::random(&mut rng);
            let b = Chromosome::new(a.genes().map(|g| ((g as u16 + 1 + rng.random_range(0..134u16)) % 135) as u8)).unwrap();
            let child = crossover(&a, &b, &mut rng);
            let n = child.genes().iter().zip(a.genes()).filter(|(c, a)| c == a).count();
            n as f64 / CHROMOSOME_LEN as f64
        })
        .collect();
    let (x_mean, x_se) = mean_se(&from_a);
    let m_ok = (m_mean - m_want).abs() <= 3.0 * m_se;
    let x_ok = (x_mean - 0.5).abs() <= 3.0 * x_se;
    outcome(
        m_ok && x_ok,
        format!(
            "mutate {m_mean:.4} vs {m_want:.4} (se {m_se:.4}, {}); crossover from a {x_mean:.4} vs 0.5 (se {x_se:.4}, {})",
            if m_ok { "ok" } else { "off" },
            if x_ok { "ok" } else { "off" }
        ),
    )
}

/// Pools both seats' behavior over `games` games played by `policy`.
fn forced_policy_stats(games: u64, policy: impl Fn(&PlayerView) -> Action) -> BehaviorStats {
    let mut stats = BehaviorStats::default();
    for seed in 0..games {
        let mut state = GameState::new(seed);
        while !state.is_terminal() {
            let view = state.view_of(state.current_player());
            let action = policy(&view);
            stats.accumulate(&view, action);
            state.apply(action).expect("forced policies stay legal");
        }
    }
    stats
}

fn descriptor_correctness() -> Outcome {
    let reference = Chromosome::reference();
    // hint whenever a token is available, otherwise act as the reference agent
    let always_hint = |v: &PlayerView| {
        if v.info_tokens >= 1 {
            *v.legal_actions().iter().find(|a| a.is_hint()).expect("a token allows some hint")
        } else {
            decide(&reference, v)
        }
    };
    // play only cards known to be playable; otherwise act without playing
    let certain_only = |v: &PlayerView| {
        let certain = (0..v.own_hand_size()).find(|&s| playability(v, s).is_ok_and(|p| p.num == p.den));
        if let Some(slot) = certain {
            return Action::Play { slot: slot as u8 };
        }
        match decide(&reference, v) {
            Action::Play { .. } => fallback(v),
            a => a,
        }
    };
    let c = forced_policy_stats(200, always_hint).finalize();
    let r = forced_policy_stats(200, certain_only).finalize();
    let c_ok = c.is_some_and(|d| d.communicativeness == 1.0);
    let r_ok = r.is_some_and(|d| d.risk_aversion == 1.0);

    let eps = 1e-9;
    let cases = [(0.0, 0), (0.05 - eps, 0), (0.05, 1), (1.0, 19), (0.95, 19), (0.4, 8), (0.15, 3)];
    let bad: Vec<String> = cases
        .iter()
        .flat_map(|&(v, want)| {
            let on_c = niche_of(&BehaviorDescriptor::new(v, 0.5)).ci;
            let on_r = niche_of(&BehaviorDescriptor::new(0.5, v)).ri;
            [(on_c, 'c'), (on_r, 'r')]
                .into_iter()
                .filter(move |&(got, _)| got != want)
                .map(move |(got, axis)| format!("{axis}={v} -> {got}, want {want}"))
        })
        .collect();
    outcome(
        c_ok && r_ok && bad.is_empty(),
        format!(
            "always-hint c = {:?}, certain-only r = {:?}, niche boundary mismatches: {}",
            c.map(|d| d.communicativeness),
            r.map(|d| d.risk_aversion),
            if bad.is_empty() { "none".to_string() } else { bad.join("; ") }
        ),
    )
}

struct DeskRun {
    seed: u64,
    /// Evolved archive with its search-time fitness.
    evolved: Archive,
    /// Same niches and chromosomes, fitness from 1000 fresh games each.
    reevaluated: Archive,
    elapsed: Duration,
    matrix: Option<CrossplayMatrix>,
}

fn desk_run(seed: u64) -> DeskRun {
    let cfg = QdConfig {
        total_individuals: DESK_INDIVIDUALS,
        random_init_count: DESK_INIT,
        games_per_eval: DESK_GAMES,
        master_seed: seed,
        batch_size: 1,
        checkpoint_every: DESK_INDIVIDUALS,
        frozen_eval_seeds: false,
    };
    let start = Instant::now();
    let evolved = run_map_elites(&cfg).expect("valid config").archive;
    let elapsed = start.elapsed();
    let (reevaluated, _) = reevaluate_archive(&evolved, REEVAL_GAMES, ANALYSIS_SEED);
    let valid = reevaluated.valid_elites();
    let matrix = (valid.len() >= 2).then(|| crossplay(&valid, CROSSPLAY_GAMES, ANALYSIS_SEED).expect("non-empty pool"));
    DeskRun { seed, evolved, reevaluated, elapsed, matrix }
}

fn degenerate_corner(runs: &[DeskRun]) -> Outcome {
    let mut n = 0;
    let mut nonzero = Vec::new();
    for run in runs {
        for (niche, e) in run.reevaluated.iter() {
            if niche.ci == 0 && niche.ri == 19 {
                n += 1;
                if e.fitness != 0.0 {
                    nonzero.push(format!("seed {} ({}, {}) = {}", run.seed, niche.ci, niche.ri, e.fitness));
                }
            }
        }
    }
    let detail = if n == 0 {
        "no elites in the corner niche in either run (vacuously true)".to_string()
    } else {
        format!("{n} corner elites, {} with nonzero fitness {}", nonzero.len(), nonzero.join("; "))
    };
    outcome(nonzero.is_empty(), detail)
}

fn desk_evolution(runs: &[DeskRun]) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for run in runs {
        let occupied = run.evolved.len();
        let a = occupied >= 200;
        let best = run.reevaluated.best().expect("archive is not empty");
        let b = best.fitness >= 14.0;
        let d = best.descriptor;
        let c = (0.2..=0.7).contains(&d.communicativeness) && (0.6..=0.95).contains(&d.risk_aversion);
        let (self_play, cross_play) = match &run.matrix {
            Some(m) => (m.self_play_mean(), m.cross_play_mean().unwrap_or(f64::NAN)),
            None => (f64::NAN, f64::NAN),
        };
        let dd = self_play > cross_play;
        pass &= a && b && c && dd;
        let niche = best.niche();
        let flag = |ok: bool| if ok { "ok" } else { "FAIL" };
        parts.push(format!(
            "seed {} ({}): (a) occupied {occupied} [coverage {}] {}; (b) best {:.3} {}; \
             (c) argmax niche ({}, {}) at c {:.3} r {:.3} {}; (d) self-play {self_play:.3} vs cross-play {cross_play:.3} {}",
            run.seed,
            secs(run.elapsed),
            run.evolved.coverage(),
            flag(a),
            best.fitness,
            flag(b),
            niche.ci,
            niche.ri,
            d.communicativeness,
            d.risk_aversion,
            flag(c),
            flag(dd),
        ));
    }
    outcome(pass, parts.join(" | "))
}

fn distance_profile(runs: &[DeskRun]) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for run in runs {
        let pool = run.reevaluated.valid_elites().len();
        let Some(m) = &run.matrix else {
            pass = false;
            parts.push(format!("seed {}: {pool} valid elites, no matrix", run.seed));
            continue;
        };
        let profile = manhattan_profile(m);
        let x: Vec<f64> = profile.iter().map(|b| b.distance as f64).collect();
        let y: Vec<f64> = profile.iter().map(|b| b.mean).collect();
        let s = spearman(&x, &y);
        let ok = pool >= 100 && s.is_some_and(|s| s.rho < 0.0 && s.p_value < 0.01);
        pass &= ok;
        parts.push(match s {
            Some(s) => format!(
                "seed {}: {pool} valid elites, {} buckets, rho {:.3}, p {:.2e}",
                run.seed,
                profile.len(),
                s.rho,
                s.p_value
            ),
            None => format!("seed {}: {pool} valid elites, profile too short", run.seed),
        });
    }
    outcome(pass, parts.join(" | "))
}

fn cross_run(a: &DeskRun, b: &DeskRun) -> Outcome {
    let corpus = collect_corpus(&a.reevaluated.valid_elites(), CORPUS_GAMES, ANALYSIS_SEED);
    let report = match cross_run_report(&a.reevaluated, &b.reevaluated, CROSS_RUN_GAMES, ANALYSIS_SEED, &corpus) {
        Ok(r) => r,
        Err(e) => return outcome(false, format!("cross-run failed: {e}")),
    };
    let (Some(h), Some(sim), Some(paired), Some(selfp)) =
        (report.mean_hamming, report.mean_similarity, report.mean_paired_score, report.mean_self_play)
    else {
        return outcome(false, "no niche occupied in both runs".to_string());
    };
    let ok = h >= 10.0 && sim <= 0.85 && (paired - selfp).abs() <= 1.0;
    outcome(
        ok,
        format!(
            "{} common niches, corpus {} states: hamming {h:.2}, similarity {sim:.3}, paired {paired:.3} vs self-play {selfp:.3} (gap {:.3})",
            report.rows.len(),
            corpus.len(),
            (paired - selfp).abs()
        ),
    )
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().expect("temp dir");
    let run = |name: &str| {
        let out = dir.path().join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_hanabi-elites"))
            .args(["evolve", "--seed", "5", "--individuals", "5000", "--init-random", "1000"])
            .args(["--games-per-eval", "10", "--batch", "1", "--out"])
            .arg(&out)
            .output()
            .expect("binary runs");
        assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
        std::fs::read(out).expect("archive written")
    };
    let a = run("a.json");
    let b = run("b.json");
    outcome(a == b && !a.is_empty(), format!("two serial executions, {} and {} bytes, identical: {}", a.len(), b.len(), a == b))
}

fn throughput() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let reference = Chromosome::reference();
    let pool: Vec<Chromosome> = (0..64).map(|_| Chromosome::random(&mut rng)).collect();
    let rate = |agents: &[Chromosome]| {
        let start = Instant::now();
        let mut games = 0u64;
        let mut score = 0u64;
        while start.elapsed() < Duration::from_secs(2) {
            for _ in 0..500 {
                let c = &agents[games as usize % agents.len()];
                score += play_game(games, [c, c]).score as u64;
                games += 1;
            }
        }
        std::hint::black_box(score);
        games as f64 / start.elapsed().as_secs_f64()
    };
    let r = rate(std::slice::from_ref(&reference));
    let p = rate(&pool);
    outcome(
        r.min(p) >= 1e4,
        format!("single thread: reference self-play {r:.0} games/s, random agents {p:.0} games/s (bench target: hanabi-elites-bench)"),
    )
}

fn main() -> ExitCode {
    // `cargo test -- --list` enumerates tests without running them
    if std::env::args().any(|a| a == "--list") {
        return ExitCode::SUCCESS;
    }
    let mut results: Vec<(u8, &str, Outcome)> = Vec::new();
    let mut report = |n: u8, name: &'static str, o: Outcome| {
        println!("criterion {n:>2} {} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        results.push((n, name, o));
    };
    report(10, "throughput", throughput());
    report(1, "engine oracle", engine_oracle());
    report(2, "belief oracle", belief_equivalence());
    report(3, "operator statistics", operator_statistics());
    report(4, "descriptor and niche correctness", descriptor_correctness());
    report(9, "determinism", determinism());

    println!("running desk-scale evolution, seeds 1 and 2 ...");
    let runs = [desk_run(1), desk_run(2)];
    report(5, "degenerate corner", degenerate_corner(&runs));
    report(6, "desk-scale evolution", desk_evolution(&runs));
    report(7, "distance profile", distance_profile(&runs));
    report(8, "cross-run diversity", cross_run(&runs[0], &runs[1]));

    results.sort_by_key(|r| r.0);
    println!();
    for (n, name, o) in &results {
        println!("{n:>2} {:<34} {}", name, if o.pass { "PASS" } else { "FAIL" });
    }
    let failed = results.iter().filter(|r| !r.2.pass).count();
    println!("{} of {} criteria pass", results.len() - failed, results.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
