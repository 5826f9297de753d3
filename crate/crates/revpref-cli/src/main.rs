//! Command-line harness: seeded experiment runners around the `revpref`
//! library, writing deterministic artifacts (summary.json, trials.csv,
//! optional per-trial traces).

mod experiment;
mod io;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use revpref::consumer::{best_bundle, SimulatedConsumer};
use revpref::learnval::{learn_valuations, LearnedValue, SearchStrategy};
use revpref::{optimal_prices, MarketInstance, TieBreakPolicy};

use experiment::{
    generate_instance, run_exog_experiment, run_profitmax_experiment, trial_rng, ExperimentError,
    GenSpec, PriceSpec,
};
use io::{fmt17, join_floats, read_instance, read_price_file, write_instance, CsvBuilder};

#[derive(Parser)]
#[command(name = "revpref", about = "Revealed-preference pricing experiments", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct InstanceArgs {
    /// Instance JSON file with fields v, c, budget, delta.
    #[arg(long, conflicts_with = "gen")]
    instance: Option<PathBuf>,
    /// Generator spec, e.g. n=3,delta=0.25,bmin=0.5,bmax=3.
    #[arg(long, value_name = "SPEC")]
    gen: Option<String>,
    /// Seed for instance generation and any randomized trial work.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl InstanceArgs {
    fn load(&self) -> Result<MarketInstance, ExperimentError> {
        match (&self.instance, &self.gen) {
            (Some(path), _) => Ok(read_instance(path)?),
            (None, Some(spec)) => {
                let spec = GenSpec::parse(spec)?;
                let mut rng = trial_rng(self.seed, 0);
                Ok(generate_instance(&spec, &mut rng))
            }
            (None, None) => Err(ExperimentError::BadGenSpec(
                "need --instance PATH or --gen SPEC".into(),
            )),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Simulate the consumer on a sequence of price vectors.
    Oracle {
        #[command(flatten)]
        inst: InstanceArgs,
        /// Price rows, one comma-separated vector per line.
        #[arg(long, value_name = "PATH")]
        prices: PathBuf,
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
    },
    /// Compute near-optimal perturbed prices for a known instance.
    Optprice {
        #[command(flatten)]
        inst: InstanceArgs,
        /// Profit slack of the perturbation.
        #[arg(long, default_value_t = 0.01)]
        eps: f64,
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
    },
    /// Learn valuation ratios through price queries.
    Learnval {
        #[command(flatten)]
        inst: InstanceArgs,
        /// Also write the full query log to trace.csv.
        #[arg(long)]
        trace: bool,
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
    },
    /// Run the learn-then-exploit merchant and record its regret ledger.
    Profitmax {
        #[command(flatten)]
        inst: InstanceArgs,
        #[arg(long, default_value_t = 1000)]
        rounds: usize,
        /// Accuracy target; defaults to the horizon-balanced value for (n, delta, T).
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
    },
    /// Run the exogenous-price bundle predictor over seeded trials.
    Exog {
        #[command(flatten)]
        inst: InstanceArgs,
        #[arg(long, default_value_t = 500)]
        rounds: usize,
        #[arg(long, default_value_t = 1)]
        trials: u64,
        /// Price stream: 'random' or 'file:PATH'.
        #[arg(long, default_value = "random")]
        prices: String,
        /// Write trace_<trial>.csv round logs.
        #[arg(long)]
        trace: bool,
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
    },
    /// Generate an instance and write it as JSON.
    Gen {
        /// Generator spec, e.g. n=3,delta=0.25,bmin=0.5,bmax=3.
        #[arg(long, value_name = "SPEC")]
        gen: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
    },
}

fn ensure_dir(dir: &PathBuf) -> Result<(), ExperimentError> {
    fs::create_dir_all(dir).map_err(|source| ExperimentError::Write {
        path: dir.display().to_string(),
        source,
    })
}

fn run(cli: Cli) -> Result<(), ExperimentError> {
    match cli.command {
        Command::Oracle { inst, prices, out } => {
            let inst = inst.load()?;
            ensure_dir(&out)?;
            let rows = read_price_file(&prices, inst.n)?;
            let mut csv = CsvBuilder::new("t,prices,bundle,spend,profit");
            for (t, p) in rows.iter().enumerate() {
                let x = best_bundle(&inst, p, TieBreakPolicy::Lexicographic);
                csv.row(&[
                    t.to_string(),
                    join_floats(p.as_slice()).replace(", ", ";"),
                    join_floats(&x.0).replace(", ", ";"),
                    fmt17(x.spend(p)),
                    fmt17(x.profit(p, &inst.c)),
                ]);
            }
            csv.write(&out.join("bundles.csv"))?;
            write_instance(&out.join("instance.json"), &inst)?;
            println!("oracle: {} rounds simulated", rows.len());
        }
        Command::Optprice { inst, eps, out } => {
            let inst = inst.load()?;
            ensure_dir(&out)?;
            let p = optimal_prices(&inst, eps)
                .map_err(|e| ExperimentError::Algorithm(e.to_string()))?;
            let summary = format!(
                "{{\n  \"eps\": {},\n  \"prices\": [{}],\n  \"bundle\": [{}],\n  \"profit_bound\": {}\n}}\n",
                fmt17(eps),
                join_floats(p.prices.as_slice()),
                join_floats(&p.bundle.0),
                fmt17(p.profit_bound),
            );
            fs::write(out.join("summary.json"), &summary).map_err(|source| {
                ExperimentError::Write { path: out.display().to_string(), source }
            })?;
            write_instance(&out.join("instance.json"), &inst)?;
            println!("optprice: profit_bound={:.6}", p.profit_bound);
        }
        Command::Learnval { inst, trace, out } => {
            let inst = inst.load()?;
            ensure_dir(&out)?;
            let mut oracle = SimulatedConsumer::new(inst.clone(), TieBreakPolicy::CheapestFirst);
            let learned = learn_valuations(&mut oracle, SearchStrategy::Binary)
                .map_err(|e| ExperimentError::Algorithm(e.to_string()))?;
            let entries: Vec<String> = learned
                .s
                .iter()
                .map(|s| match s {
                    LearnedValue::Ratio(r) => {
                        format!("{{\"num\": {}, \"den\": {}}}", r.num, r.den)
                    }
                    LearnedValue::Unlearnable => "null".to_string(),
                })
                .collect();
            let pivot = match learned.pivot {
                Some(k) => k.to_string(),
                None => "null".to_string(),
            };
            let summary = format!(
                "{{\n  \"pivot\": {},\n  \"queries\": {},\n  \"ratios\": [{}]\n}}\n",
                pivot,
                learned.log.count(),
                entries.join(", "),
            );
            fs::write(out.join("summary.json"), &summary).map_err(|source| {
                ExperimentError::Write { path: out.display().to_string(), source }
            })?;
            if trace {
                let mut csv = CsvBuilder::new("t,prices,bundle");
                for (t, (p, x)) in learned.log.queries.iter().enumerate() {
                    csv.row(&[
                        t.to_string(),
                        join_floats(p.as_slice()).replace(", ", ";"),
                        join_floats(&x.0).replace(", ", ";"),
                    ]);
                }
                csv.write(&out.join("trace.csv"))?;
            }
            write_instance(&out.join("instance.json"), &inst)?;
            println!("learnval: {} queries, pivot={:?}", learned.log.count(), learned.pivot);
        }
        Command::Profitmax { inst, rounds, eps, out } => {
            let inst = inst.load()?;
            ensure_dir(&out)?;
            let art = run_profitmax_experiment(&inst, rounds, eps, &out)?;
            write_instance(&out.join("instance.json"), &inst)?;
            println!("{}", art.summary_line);
        }
        Command::Exog { inst, rounds, trials, prices, trace, out } => {
            let seed = inst.seed;
            let inst = inst.load()?;
            ensure_dir(&out)?;
            let spec = PriceSpec::parse(&prices)?;
            let art = run_exog_experiment(&inst, &spec, rounds, trials, seed, trace, &out)?;
            write_instance(&out.join("instance.json"), &inst)?;
            println!("{}", art.summary_line);
        }
        Command::Gen { gen, seed, out } => {
            let spec = GenSpec::parse(&gen)?;
            let mut rng = trial_rng(seed, 0);
            let inst = generate_instance(&spec, &mut rng);
            ensure_dir(&out)?;
            write_instance(&out.join("instance.json"), &inst)?;
            println!(
                "gen: n={} delta={} budget={:.6} -> {}",
                inst.n,
                inst.delta,
                inst.budget,
                out.join("instance.json").display()
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e);
            ExitCode::FAILURE
        }
    }
}
