//! `hrsearch`: command-line driver for the hard-to-round case search.

mod args;
mod output;

use std::fs;
use std::path::Path;
use std::process::ExitCode;

use clap::Parser;
use hrsearch::divergence::simulate_warps;
use hrsearch::lowerbound::Algorithm;
use hrsearch::oracle::{default_guard, exhaustive_hr_search, HrCaseRecord};
use hrsearch::pipeline::{domain_problems, run_pipeline};
use hrsearch::{fpmodel::split_binade, Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use args::{Cli, Command, DivergenceArgs, SearchArgs};
use output::Sink;

const EXIT_RUNTIME: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_MISMATCH: u8 = 3;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match &cli.command {
        Command::Search(a) => cmd_search(a),
        Command::OracleCheck(a) => cmd_oracle_check(a),
        Command::Divergence(a) => cmd_divergence(a),
    };
    match res {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config() { EXIT_CONFIG } else { EXIT_RUNTIME })
        }
    }
}

fn io_err(e: impl std::fmt::Display) -> Error {
    Error::Config(format!("output: {e}"))
}

fn cmd_search(a: &SearchArgs) -> Result<u8> {
    let (spec, cfg) = a.common.build()?;
    let result = run_pipeline(&spec, &cfg)?;
    let sink = Sink::new(a.common.out.as_deref())?;
    sink.write_cases(&result.records, a.common.format, cfg.width)?;
    sink.write_stats(&result.stats, a.common.timing)?;
    if a.common.algo == args::AlgoArg::Auto {
        sink.write_choices(&result.stats)?;
    }
    Ok(0)
}

fn cmd_oracle_check(a: &SearchArgs) -> Result<u8> {
    let (spec, cfg) = a.common.build()?;
    let mut got = run_pipeline(&spec, &cfg)?.records;
    if a.common.inject_fault && !got.is_empty() {
        got.remove(0);
    }
    let guard = cfg.guard.unwrap_or_else(|| default_guard(&spec.fmt));
    let mut want: Vec<HrCaseRecord> = Vec::new();
    for &e in &spec.binades {
        let split = split_binade(e, &spec.fmt, cfg.polygen.n)?;
        let rep = exhaustive_hr_search(&spec.function, &split, 0..split.count(), &spec.fmt, guard, cfg.width)?;
        if let Some(x) = rep.undecided.first() {
            eprintln!("oracle could not decide f({:e})", x.to_f64());
            return Err(Error::Undecided(guard));
        }
        want.extend(rep.records);
    }
    want.sort_by_key(|r| r.argument);
    let missing: Vec<_> = want.iter().filter(|r| !got.contains(r)).collect();
    let extra: Vec<_> = got.iter().filter(|r| !want.contains(r)).collect();
    for r in &missing {
        println!("missing {}", output::describe(r, cfg.width));
    }
    for r in &extra {
        println!("extra {}", output::describe(r, cfg.width));
    }
    let diffs = missing.len() + extra.len();
    println!("{} HR cases, {diffs} difference{}", want.len(), if diffs == 1 { "" } else { "s" });
    Ok(if diffs == 0 { 0 } else { EXIT_MISMATCH })
}

fn cmd_divergence(a: &DivergenceArgs) -> Result<u8> {
    let (spec, cfg) = a.common.build()?;
    let binade = spec.binades[0];
    let total = split_binade(binade, &spec.fmt, cfg.polygen.n)?.count();
    if a.domains == 0 || a.domains > total {
        return Err(Error::Config(format!("--domains must be in 1..={total}")));
    }
    let start = match a.start {
        Some(s) => s,
        None => ChaCha8Rng::seed_from_u64(a.common.seed).gen_range(0..=total - a.domains),
    };
    let problems = domain_problems(&spec.function, &spec.fmt, binade, &cfg, start, a.domains)?;
    let algos = if !a.algos.is_empty() {
        a.algos.clone()
    } else {
        match a.common.algo {
            args::AlgoArg::Regular => vec![Algorithm::Regular],
            args::AlgoArg::Lefevre => vec![Algorithm::Lefevre],
            args::AlgoArg::Auto => vec![Algorithm::Regular, Algorithm::Lefevre],
        }
    };
    let out = a.common.out.as_deref();
    if let Some(dir) = out {
        fs::create_dir_all(dir).map_err(io_err)?;
    }
    let mut summary = csv::Writer::from_writer(std::io::stdout());
    summary
        .write_record(["algorithm", "div_mode", "warps", "problems", "min_iterations", "max_iterations", "mean_iterations", "mean_nmdm", "branch_serialized_instructions"])
        .map_err(io_err)?;
    for algo in algos {
        let sim = simulate_warps(&problems, algo, cfg.div_mode, a.warp_size);
        let s = &sim.summary;
        summary
            .write_record([
                algo.name().to_string(),
                cfg.div_mode.name().to_string(),
                s.warps.to_string(),
                s.problems.to_string(),
                s.min_iter.to_string(),
                s.max_iter.to_string(),
                format!("{:.4}", s.mean_iter),
                format!("{:.6}", s.mean_nmdm),
                s.branch_serialized_instructions.to_string(),
            ])
            .map_err(io_err)?;
        if let Some(dir) = out {
            write_warp_csv(&dir.join(format!("warps_{}.csv", algo.name())), &sim)?;
        }
    }
    summary.flush().map_err(io_err)?;
    Ok(0)
}

fn write_warp_csv(path: &Path, sim: &hrsearch::divergence::WarpSimulation) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(io_err)?;
    w.write_record(["warp_id", "max_iter", "mean_iter", "mdm", "nmdm"]).map_err(io_err)?;
    for (id, max, mean, mdm, nmdm) in sim.csv_rows() {
        w.write_record([id.to_string(), max.to_string(), format!("{mean:.4}"), format!("{mdm:.4}"), format!("{nmdm:.6}")])
            .map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}
