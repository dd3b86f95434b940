use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hrsearch::fixedpoint::{DivisionMode, FracWidth};
use hrsearch::fpmodel::FpFormat;
use hrsearch::function::{Function, Polynomial};
use hrsearch::lowerbound::Algorithm;
use hrsearch::pipeline::{AlgorithmChoice, PhaseConfig, SearchSpec};
use hrsearch::polygen::PolyGenConfig;
use hrsearch::{Error, Result};

#[derive(Parser, Debug)]
#[command(name = "hrsearch", version, about = "Search for hard-to-round cases of elementary functions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run the filtering pipeline and write HR cases and per-phase statistics.
    Search(SearchArgs),
    /// Run the pipeline and an exhaustive evaluation, and compare the two sets.
    OracleCheck(SearchArgs),
    /// Simulate lockstep warps over consecutive domain tests and report divergence.
    Divergence(DivergenceArgs),
}

#[derive(Args, Debug)]
pub struct SearchArgs {
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Args, Debug)]
pub struct DivergenceArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Lower-bound variant to simulate, overriding --algo (`auto` there runs regular and lefevre);
    /// accepts lefevre, lefevre-swap, regular, regular-unrolled and may be repeated.
    #[arg(long = "sim-algo", value_parser = parse_algorithm)]
    pub algos: Vec<Algorithm>,
    /// Number of consecutive domains in the batch.
    #[arg(long, default_value_t = 1024)]
    pub domains: u64,
    /// First domain of the batch; drawn from --seed when omitted.
    #[arg(long)]
    pub start: Option<u64>,
    #[arg(long, default_value_t = hrsearch::divergence::WARP_SIZE)]
    pub warp_size: usize,
}

fn parse_algorithm(s: &str) -> std::result::Result<Algorithm, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FnArg {
    Exp,
    Log,
    Exp2,
    PolyFile,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum AlgoArg {
    Lefevre,
    Regular,
    Auto,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DivModeArg {
    Sub,
    Hw,
    Hybrid,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Jsonl,
    Csv,
}

#[derive(Args, Debug)]
pub struct CommonArgs {
    #[arg(long = "fn", value_enum, default_value = "exp")]
    pub function: FnArg,
    /// Polynomial coefficients, constant term first (with --fn poly-file).
    #[arg(long)]
    pub poly_file: Option<PathBuf>,
    /// Precision of the floating-point format.
    #[arg(long, default_value_t = 13)]
    pub p: u32,
    /// HR threshold: ε = 2^-eps_bits.
    #[arg(long, default_value_t = 8)]
    pub eps_bits: u32,
    /// First binade, as b for [2^b, 2^(b+1)).
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    pub binade: i32,
    /// Number of consecutive binades.
    #[arg(long, default_value_t = 1)]
    pub binades: u32,
    /// log2 of the domain size N.
    #[arg(long, default_value_t = 2)]
    pub domain_bits: u32,
    /// Subdomains per failing domain in phase 2.
    #[arg(long, default_value_t = 2)]
    pub phase2_split: u64,
    #[arg(long, value_enum, default_value = "regular")]
    pub algo: AlgoArg,
    #[arg(long, value_enum, default_value = "hw")]
    pub div_mode: DivModeArg,
    /// Width of the fixed-point fractions.
    #[arg(long, default_value_t = 64, value_parser = parse_word_bits)]
    pub word_bits: u32,
    /// Worker threads; 0 uses all cores.
    #[arg(long, default_value_t = 0)]
    pub workers: usize,
    /// Directory for output files; stdout and stderr when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "jsonl")]
    pub format: Format,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Limbs of the difference registers.
    #[arg(long, default_value_t = hrsearch::fixedpoint::DEFAULT_LIMBS)]
    pub limbs: usize,
    /// Domains per polynomial approximation (power of two).
    #[arg(long, default_value_t = 256)]
    pub tau: u64,
    /// Starting Taylor degree.
    #[arg(long, default_value_t = 2)]
    pub degree: usize,
    /// Record wall-clock times in the statistics (makes output run-dependent).
    #[arg(long)]
    pub timing: bool,
    /// Drops one HR case from the pipeline output, to exercise mismatch reporting.
    #[arg(long, hide = true)]
    pub inject_fault: bool,
}

impl CommonArgs {
    fn function(&self) -> Result<Function> {
        Ok(match self.function {
            FnArg::Exp => Function::Exp,
            FnArg::Log => Function::Log,
            FnArg::Exp2 => Function::Exp2,
            FnArg::PolyFile => {
                let path = self.poly_file.as_ref().ok_or_else(|| Error::Config("--fn poly-file needs --poly-file PATH".into()))?;
                let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
                Function::Poly(Polynomial::parse(&text)?)
            }
        })
    }

    pub fn build(&self) -> Result<(SearchSpec, PhaseConfig)> {
        let fmt = FpFormat::new(self.p, self.eps_bits)?;
        if self.p > 53 {
            return Err(Error::Config(format!("p = {} does not fit the binary64 output encoding", self.p)));
        }
        if self.binades == 0 {
            return Err(Error::Config("--binades must be at least 1".into()));
        }
        if self.domain_bits >= self.p {
            return Err(Error::Config(format!("--domain-bits {} must be below p = {}", self.domain_bits, self.p)));
        }
        let width = FracWidth::from_bits(self.word_bits)?;
        let n = 1u64 << self.domain_bits;
        if self.phase2_split == 0 || !n.is_multiple_of(self.phase2_split) {
            return Err(Error::Config(format!("--phase2-split {} does not divide N = {n}", self.phase2_split)));
        }
        let mut polygen = PolyGenConfig { n, limbs: self.limbs, delta: self.degree, ..PolyGenConfig::default() };
        polygen = polygen.with_tau(self.tau);
        // Internal exponents put [1, 2) at 1.
        let binades = (0..self.binades as i32).map(|k| self.binade + 1 + k).collect();
        let cfg = PhaseConfig {
            algorithm: match self.algo {
                AlgoArg::Lefevre => AlgorithmChoice::Lefevre,
                AlgoArg::Regular => AlgorithmChoice::Regular,
                AlgoArg::Auto => AlgorithmChoice::Auto,
            },
            div_mode: match self.div_mode {
                DivModeArg::Sub => DivisionMode::Subtractive,
                DivModeArg::Hw => DivisionMode::Hardware,
                DivModeArg::Hybrid => DivisionMode::Hybrid,
            },
            phase2_split: self.phase2_split,
            width,
            workers: self.workers,
            polygen,
            ..PhaseConfig::default()
        };
        cfg.validate(&fmt)?;
        Ok((SearchSpec { function: self.function()?, fmt, binades }, cfg))
    }
}

fn parse_word_bits(s: &str) -> std::result::Result<u32, String> {
    match s {
        "32" => Ok(32),
        "64" => Ok(64),
        _ => Err(format!("word width must be 32 or 64, got {s}")),
    }
}
