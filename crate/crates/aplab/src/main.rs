use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use aplab::fixtures::{bless, default_dir, verify_fixtures};
use aplab::io::{format_set, parse_policy, read_set, read_text, write_text, BohrDescriptor};
use aplab::sweep::{cross_check, run_sweep, thread_count, Pipeline, SweepConfig};
use aplab::trace::json_lines;
use aplab_core::almost_period::almost_period_set;
use aplab_core::bohr::{ap_in_bohr, check_regularity};
use aplab_core::pipelines::oracle_longest_ap;
use aplab_core::setgen::{bohr_sample, embedded_primes, interval_set, random_set};
use aplab_core::{GroupFunction, Policy, SetOnZN};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "aplab", version, about = "Long progressions in A + B + C over Z/NZ")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a set file.
    Gen {
        #[command(subcommand)]
        family: GenFamily,
        /// Output file (stdout when omitted).
        #[arg(long, global = true)]
        out: Option<PathBuf>,
    },
    /// Inspect a Bohr set given by a descriptor file.
    Bohr {
        descriptor: PathBuf,
        #[arg(long)]
        describe: bool,
        #[arg(long)]
        members: bool,
        #[arg(long)]
        ap: bool,
        #[arg(long)]
        policy: Option<PathBuf>,
    },
    /// Almost-periods of 1_F ∗ μ_S inside T − T.
    AlmostPeriod {
        #[arg(long)]
        f: PathBuf,
        #[arg(long)]
        s: PathBuf,
        /// Candidate set T (whole group when omitted).
        #[arg(long)]
        t: Option<PathBuf>,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long, default_value_t = 0.5)]
        eps: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run one pipeline and print its JSON-lines trace.
    Pipeline {
        #[arg(value_parser = ["cls", "increment", "levelset"])]
        name: String,
        #[command(flatten)]
        sets: SetArgs,
        #[arg(long)]
        policy: Option<PathBuf>,
        /// Recorded in the trace; pipelines themselves are deterministic.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.5)]
        eps: f64,
    },
    /// Run a configured grid and write CSV.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Add a wall_ms column (output is then no longer reproducible).
        #[arg(long)]
        timing: bool,
        /// Also write the JSON-lines traces of all runs.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Re-run every regression fixture and compare with the stored files.
    VerifyFixtures {
        #[arg(long)]
        dir: Option<PathBuf>,
        /// Overwrite the stored files with fresh output.
        #[arg(long)]
        bless: bool,
    },
    /// Longest progression with at least K representations, by exhaustive search.
    Oracle {
        #[command(flatten)]
        sets: SetArgs,
        #[arg(long)]
        k: u64,
    },
}

#[derive(Subcommand)]
enum GenFamily {
    Random {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    Interval {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
    },
    Bohr {
        #[arg(long)]
        descriptor: PathBuf,
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Freiman image of the primes up to n inside Z/6nZ.
    Primes {
        #[arg(long)]
        n: usize,
    },
}

#[derive(Args)]
struct SetArgs {
    #[arg(long)]
    a: PathBuf,
    #[arg(long)]
    b: PathBuf,
    #[arg(long)]
    c: PathBuf,
}

impl SetArgs {
    fn load(&self) -> Result<[SetOnZN; 3]> {
        let read = |p: &Path| read_set(p).with_context(|| format!("reading {}", p.display()));
        Ok([read(&self.a)?, read(&self.b)?, read(&self.c)?])
    }
}

fn load_policy(path: Option<&Path>) -> Result<Policy> {
    match path {
        Some(p) => Ok(parse_policy(&read_text(p)?).with_context(|| format!("policy {}", p.display()))?),
        None => Ok(Policy::default()),
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => write_text(p, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

/// Runs a command; `Ok(false)` means it ran but something did not pass.
fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Gen { family, out } => {
            let set = match family {
                GenFamily::Random { n, alpha, seed } => random_set(n, alpha, seed)?,
                GenFamily::Interval { n, m } => interval_set(n, m)?,
                GenFamily::Bohr { descriptor, alpha, seed } => {
                    bohr_sample(&BohrDescriptor::parse(&read_text(&descriptor)?)?.build()?, alpha, seed)?
                }
                GenFamily::Primes { n } => embedded_primes(n)?,
            };
            emit(out.as_deref(), &format_set(&set))?;
            Ok(true)
        }
        Command::Bohr { descriptor, describe, members, ap, policy } => {
            let b = BohrDescriptor::parse(&read_text(&descriptor)?)?.build()?;
            let policy = load_policy(policy.as_deref())?;
            let mut text = String::new();
            if describe || !(members || ap) {
                let reg = check_regularity(&b, &policy);
                text += &format!(
                    "N={}\nd={}\ndelta={:?}\nsize={}\ndensity={}\nregular={}\nboundary_hits={}\n",
                    b.modulus(),
                    b.dimension(),
                    b.radius(),
                    b.len(),
                    b.density(),
                    reg.pass,
                    b.boundary_hits()
                );
            }
            if members {
                text += &format_set(b.members());
            }
            if ap {
                let found = ap_in_bohr(&b)?;
                text += &format!(
                    "start={}\nstep={}\nlength={}\nguarantee={}\n",
                    found.ap.start, found.ap.step, found.ap.length, found.guarantee
                );
            }
            emit(None, &text)?;
            Ok(true)
        }
        Command::AlmostPeriod { f, s, t, p, eps, out } => {
            let f = read_set(&f)?;
            let s = read_set(&s)?;
            let t = match t {
                Some(t) => read_set(&t)?,
                None => SetOnZN::full(f.modulus())?,
            };
            let x = almost_period_set(&GroupFunction::indicator(&f), &s, &t, p, eps)?;
            emit(out.as_deref(), &format_set(&x))?;
            Ok(true)
        }
        Command::Pipeline { name, sets, policy, seed, eps } => {
            let sets = sets.load()?;
            let policy = load_policy(policy.as_deref())?;
            let run = name.parse::<Pipeline>()?.run(&sets, eps, &policy)?;
            emit(None, &json_lines(&run, seed)?)?;
            Ok(true)
        }
        Command::Sweep { config, out, timing, trace } => {
            let cfg = SweepConfig::parse(&read_text(&config)?)?;
            let result = run_sweep(&cfg, thread_count())?;
            let csv = result.to_csv(timing)?;
            write_text(&out, &csv)?;
            if let Some(t) = trace {
                write_text(&t, &result.traces)?;
            }
            let check = cross_check(&csv, 5)?;
            for f in &check.failures {
                eprintln!("cross-check: {f}");
            }
            let failed = result.rows.iter().filter(|r| !r.ok()).count();
            eprintln!(
                "{} runs, {failed} not ok, oracle cross-check {}/{} rows clean",
                result.rows.len(),
                check.checked - check.failures.len(),
                check.checked
            );
            Ok(failed == 0 && check.failures.is_empty())
        }
        Command::VerifyFixtures { dir, bless: do_bless } => {
            let dir = dir.unwrap_or_else(default_dir);
            if do_bless {
                for name in bless(&dir)? {
                    println!("wrote {name}");
                }
                return Ok(true);
            }
            let report = verify_fixtures(&dir);
            print!("{}", report.render());
            if !report.passed() {
                println!("drifts: {}", report.drifts().join(", "));
            }
            Ok(report.passed())
        }
        Command::Oracle { sets, k } => {
            let [a, b, c] = sets.load()?;
            let v = oracle_longest_ap(&a, &b, &c, k)?;
            let counts: Vec<String> = v.counts.iter().map(|c| c.to_string()).collect();
            println!("start={}\nstep={}\nlength={}\nK={k}\ncounts={}", v.ap.start, v.ap.step, v.ap.length, counts.join(","));
            if v.ap.length == 0 {
                bail!("no residue has {k} representations");
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
