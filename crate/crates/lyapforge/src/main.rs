use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use lyapforge::check::{verify_file, Method, VerifySettings};
use lyapforge::config::{GenerationConfig, Generator, Profile};
use lyapforge::expert::{expert_iteration_prepare, Sources, Strategy};
use lyapforge::generate::{manifest_path, run_generation, RunOptions};
use lyapforge::mix::mix_datasets;
use lyapforge::record::{read_records, write_json, write_records};
use lyapforge::score::score_files;
use lyapforge::vocab::vocab_json;
use lyapforge::wild::filter_wild;
use lyapforge_core::parse::parse_expr;
use lyapforge_core::tokenizer::{decode_system, encode_system, from_text, to_text};
use lyapforge_core::System;

#[derive(Parser)]
#[command(name = "lyapforge", version, about = "Generate, verify and score (system, Lyapunov function) datasets")]
struct Cli {
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// JSON configuration: a generation config for gen-* commands, verifier settings for verify and score.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads; defaults to the number of cores.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Seconds per system (forward search) or per verifier call.
    #[arg(long, global = true)]
    timeout: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    count: usize,
    #[arg(long)]
    out: PathBuf,
    /// Store how each pair was built.
    #[arg(long)]
    with_witness: bool,
    /// Keep per-shard files after merging.
    #[arg(long)]
    keep_shards: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum ForwardMode {
    Lyap,
    Barrier,
}

#[derive(Args)]
struct VerifierArgs {
    #[arg(long, default_value = "auto")]
    method: Method,
    /// Half-width of the box for interval and sampling checks.
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long)]
    max_nodes: Option<u64>,
    /// SOS positivity margin.
    #[arg(long)]
    eps: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Backward generation: sample V, then systems it stabilises.
    GenBackward {
        #[arg(long, default_value = "bpoly")]
        profile: Profile,
        #[command(flatten)]
        gen: GenArgs,
    },
    /// Forward generation: sample polynomial systems and search for SOS certificates.
    GenForward {
        #[arg(long, value_enum, default_value = "lyap")]
        mode: ForwardMode,
        /// Single even degree; the default sweeps 2 then 4.
        #[arg(long)]
        degree: Option<u32>,
        #[command(flatten)]
        gen: GenArgs,
    },
    /// Random systems without Lyapunov functions.
    GenWild {
        #[arg(long, default_value = "poly3")]
        profile: Profile,
        #[command(flatten)]
        gen: GenArgs,
    },
    /// Splice exact numbers of records from extra files into a primary file.
    Mix {
        #[arg(long)]
        primary: PathBuf,
        /// PATH:COUNT, repeatable.
        #[arg(long = "extra", value_parser = parse_extra)]
        extras: Vec<(PathBuf, usize)>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Drop systems whose Jacobian at 0 has an eigenvalue with positive real part.
    FilterWild {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check every (system, lyapunov) record and write one verdict per line.
    Verify {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        verifier: VerifierArgs,
    },
    /// Score a predictions file.
    Score {
        #[arg(long)]
        predictions: PathBuf,
        /// Dataset that prediction ids refer to.
        #[arg(long)]
        dataset: Option<PathBuf>,
        /// Full report with per-system outcomes.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Certified pairs as model-verified records.
        #[arg(long)]
        verified_out: Option<PathBuf>,
        #[command(flatten)]
        verifier: VerifierArgs,
    },
    /// Build an expert-iteration fine-tuning file.
    ExpertPrep {
        #[arg(long)]
        base: PathBuf,
        /// Model-verified records, e.g. from `score --verified-out`.
        #[arg(long)]
        wild: PathBuf,
        #[arg(long)]
        strategy: Strategy,
        #[arg(long)]
        bpoly: Option<PathBuf>,
        #[arg(long)]
        flyap: Option<PathBuf>,
        #[arg(long)]
        fbarr: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Convert between infix and tokens, or check every record of a file.
    Tokenize {
        /// Infix expressions; several are encoded as one system.
        #[arg(allow_hyphen_values = true)]
        exprs: Vec<String>,
        /// Token string to decode instead.
        #[arg(long, conflicts_with_all = ["exprs", "check"])]
        decode: Option<String>,
        /// Dataset file whose records must all round-trip.
        #[arg(long, conflicts_with = "exprs")]
        check: Option<PathBuf>,
    },
    /// Write the vocabulary JSON.
    Vocab {
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the generation config of a profile.
    Profile { name: Profile },
}

fn parse_extra(s: &str) -> Result<(PathBuf, usize), String> {
    let (p, c) = s.rsplit_once(':').ok_or("expected PATH:COUNT")?;
    let c = c.parse().map_err(|e| format!("bad count {c:?}: {e}"))?;
    Ok((PathBuf::from(p), c))
}

fn read_text(p: &Path) -> Result<String> {
    std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))
}

impl Cli {
    fn generation_config(&self, default: GenerationConfig, gen: &GenArgs) -> Result<GenerationConfig> {
        let mut cfg = match &self.config {
            Some(p) => GenerationConfig::from_json(&read_text(p)?)?,
            None => default,
        };
        cfg.with_witness |= gen.with_witness;
        if let (Some(t), Generator::Forward(f)) = (self.timeout, &mut cfg.generator) {
            f.timeout_s = t;
        }
        Ok(cfg)
    }

    fn verify_settings(&self, v: &VerifierArgs) -> Result<VerifySettings> {
        let mut s = match &self.config {
            Some(p) => serde_json::from_str(&read_text(p)?).with_context(|| format!("parsing {}", p.display()))?,
            None => VerifySettings::default(),
        };
        s.method = v.method;
        s.seed = self.seed;
        if let Some(t) = self.timeout {
            s.timeout_s = t;
        }
        if let Some(r) = v.radius {
            s.interval.radius = r;
            s.sampling.radius = r;
        }
        if let Some(m) = v.max_nodes {
            s.interval.max_nodes = m;
        }
        if let Some(e) = v.eps {
            s.eps = e;
        }
        Ok(s)
    }

    fn generate(&self, cfg: GenerationConfig, gen: &GenArgs) -> Result<()> {
        let opts = RunOptions {
            keep_shards: gen.keep_shards,
            max_groups: None,
        };
        let m = run_generation(&cfg, self.seed, gen.count, &gen.out, &opts)?;
        println!(
            "wrote {} records to {} ({:.1} records/s, degenerate rate {:.4}); manifest {}",
            m.records,
            gen.out.display(),
            m.records_per_s,
            m.degenerate_rate,
            manifest_path(&gen.out).display()
        );
        Ok(())
    }
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::GenBackward { profile, gen } => {
            if !matches!(profile.config().generator, Generator::Backward(_)) {
                bail!("profile {profile} is not a backward profile");
            }
            cli.generate(cli.generation_config(profile.config(), gen)?, gen)
        }
        Command::GenForward { mode, degree, gen } => {
            let mut default = match mode {
                ForwardMode::Lyap => Profile::FLyap.config(),
                ForwardMode::Barrier => Profile::FBarr.config(),
            };
            if let (Some(d), Generator::Forward(f)) = (degree, &mut default.generator) {
                f.degrees = vec![*d];
            }
            cli.generate(cli.generation_config(default, gen)?, gen)
        }
        Command::GenWild { profile, gen } => {
            if !matches!(profile.config().generator, Generator::Wild(_)) {
                bail!("profile {profile} is not a wild profile");
            }
            cli.generate(cli.generation_config(profile.config(), gen)?, gen)
        }
        Command::Mix { primary, extras, out } => {
            let n = mix_datasets(primary, extras, out, cli.seed)?;
            println!("wrote {n} records to {}", out.display());
            Ok(())
        }
        Command::FilterWild { input, out } => {
            let rep = filter_wild(input, out)?;
            println!("{}", serde_json::to_string(&rep)?);
            Ok(())
        }
        Command::Verify { input, out, verifier } => {
            let s = cli.verify_settings(verifier)?;
            let v = verify_file(input, out, &s)?;
            let certified = v.iter().filter(|r| r.verdict.is_certified()).count();
            println!("{certified}/{} certified; verdicts in {}", v.len(), out.display());
            Ok(())
        }
        Command::Score {
            predictions,
            dataset,
            out,
            verified_out,
            verifier,
        } => {
            let s = cli.verify_settings(verifier)?;
            let o = score_files(predictions, dataset.as_deref(), &s, out.as_deref(), verified_out.as_deref())?;
            println!("{}", serde_json::to_string(&o.report)?);
            Ok(())
        }
        Command::ExpertPrep {
            base,
            wild,
            strategy,
            bpoly,
            flyap,
            fbarr,
            out,
        } => {
            let opt = |p: &Option<PathBuf>| p.as_deref().map(read_records).transpose().map(Option::unwrap_or_default);
            let sources = Sources {
                wild: read_records(wild)?,
                bpoly: opt(bpoly)?,
                flyap: opt(flyap)?,
                fbarr: opt(fbarr)?,
            };
            let recs = expert_iteration_prepare(read_records(base)?, &sources, *strategy, cli.seed)?;
            write_records(out, &recs)?;
            println!("wrote {} records to {}", recs.len(), out.display());
            Ok(())
        }
        Command::Tokenize { exprs, decode, check } => {
            if let Some(t) = decode {
                let toks = from_text(t)?;
                let sys = decode_system(&toks)?;
                for e in &sys.equations {
                    println!("{e}");
                }
            } else if let Some(p) = check {
                let n = read_records(p)?.len();
                println!("{n} records round-trip");
            } else {
                let eqs = exprs
                    .iter()
                    .map(|s| parse_expr(s).with_context(|| format!("parsing {s:?}")))
                    .collect::<Result<Vec<_>>>()?;
                println!("{}", to_text(&encode_system(&System::new(eqs))?));
            }
            Ok(())
        }
        Command::Vocab { out } => {
            match out {
                Some(p) => write_json(p, &lyapforge::vocab::vocab())?,
                None => print!("{}", vocab_json()),
            }
            Ok(())
        }
        Command::Profile { name } => {
            println!("{}", serde_json::to_string_pretty(&name.config())?);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    if let Some(j) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(j).build_global() {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
