//! Seeded experiment orchestration and artifact writing.

use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use revpref::exog::{run_exog, ExogConfig, ExogRunLog, PriceSource, RandomGridPrices};
use revpref::profitmax::{run_profit_max, RegretLedger};
use revpref::{ExogRound, MarketInstance, PriceVector, TieBreakPolicy};
use thiserror::Error;

use crate::io::{fmt17, CsvBuilder, IoError};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Io(#[from] IoError),
    #[error("cannot write {path}: {source}")]
    Write { path: String, source: std::io::Error },
    #[error("bad generator spec: {0}")]
    BadGenSpec(String),
    #[error("algorithm failure: {0}")]
    Algorithm(String),
    #[error("price file has {got} rows but {need} rounds requested")]
    NotEnoughPrices { got: usize, need: usize },
}

/// Trial splitting rule: trial t uses `seed XOR (t * 0x9E3779B97F4A7C15)`
/// as a ChaCha8 stream seed, so trials are order-independent.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ trial.wrapping_mul(0x9E3779B97F4A7C15))
}

#[derive(Debug, Clone)]
pub struct GenSpec {
    pub n: usize,
    pub delta: f64,
    pub bmin: f64,
    pub bmax: f64,
}

impl GenSpec {
    /// Parses "n=3,delta=0.25,bmin=0.5,bmax=3".
    pub fn parse(spec: &str) -> Result<Self, ExperimentError> {
        let mut n = None;
        let mut delta = None;
        let mut bmin = None;
        let mut bmax = None;
        for part in spec.split(',') {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| ExperimentError::BadGenSpec(format!("expected key=value, got '{}'", part)))?;
            let bad = |e: String| ExperimentError::BadGenSpec(format!("{}: {}", key, e));
            match key.trim() {
                "n" => n = Some(value.trim().parse::<usize>().map_err(|e| bad(e.to_string()))?),
                "delta" => delta = Some(value.trim().parse::<f64>().map_err(|e| bad(e.to_string()))?),
                "bmin" => bmin = Some(value.trim().parse::<f64>().map_err(|e| bad(e.to_string()))?),
                "bmax" => bmax = Some(value.trim().parse::<f64>().map_err(|e| bad(e.to_string()))?),
                other => {
                    return Err(ExperimentError::BadGenSpec(format!("unknown key '{}'", other)))
                }
            }
        }
        let spec = GenSpec {
            n: n.ok_or_else(|| ExperimentError::BadGenSpec("missing n".into()))?,
            delta: delta.ok_or_else(|| ExperimentError::BadGenSpec("missing delta".into()))?,
            bmin: bmin.unwrap_or(0.5),
            bmax: bmax.unwrap_or(2.0),
        };
        if spec.n == 0 {
            return Err(ExperimentError::BadGenSpec("n must be positive".into()));
        }
        let inv = 1.0 / spec.delta;
        if !(spec.delta > 0.0 && spec.delta <= 1.0) || (inv - inv.round()).abs() > 1e-9 {
            return Err(ExperimentError::BadGenSpec(format!(
                "delta = {} is not a unit fraction",
                spec.delta
            )));
        }
        if !(spec.bmin >= 0.0 && spec.bmax >= spec.bmin) {
            return Err(ExperimentError::BadGenSpec("need 0 <= bmin <= bmax".into()));
        }
        Ok(spec)
    }
}

/// Valuations uniform on the delta grid, costs uniform in [0,1], budget
/// uniform in [bmin, bmax].
pub fn generate_instance(spec: &GenSpec, rng: &mut ChaCha8Rng) -> MarketInstance {
    let levels = (1.0 / spec.delta).round() as u32;
    let v: Vec<f64> = (0..spec.n).map(|_| rng.gen_range(1..=levels) as f64 * spec.delta).collect();
    let c: Vec<f64> = (0..spec.n).map(|_| rng.gen_range(0.0..=1.0)).collect();
    let b = if spec.bmax > spec.bmin {
        rng.gen_range(spec.bmin..=spec.bmax)
    } else {
        spec.bmin
    };
    MarketInstance::new(v, c, b, spec.delta).expect("generated instance is valid")
}

fn write_text(path: &Path, text: &str) -> Result<(), ExperimentError> {
    fs::write(path, text).map_err(|source| ExperimentError::Write {
        path: path.display().to_string(),
        source,
    })
}

pub struct ProfitMaxArtifacts {
    pub summary_line: String,
}

pub fn run_profitmax_experiment(
    inst: &MarketInstance,
    rounds: usize,
    eps: Option<f64>,
    out_dir: &Path,
) -> Result<ProfitMaxArtifacts, ExperimentError> {
    let ledger: RegretLedger =
        run_profit_max(inst, rounds, eps, None, TieBreakPolicy::Lexicographic)
            .map_err(|e| ExperimentError::Algorithm(e.to_string()))?;

    let mut csv = CsvBuilder::new("t,phase,profit,regret_to_date");
    let mut cumulative = 0.0;
    for r in &ledger.rounds {
        cumulative += ledger.opt_reference - r.profit;
        let phase = match r.phase {
            revpref::Phase::Learning => "learning",
            revpref::Phase::Exploit => "exploit",
        };
        csv.row(&[r.t.to_string(), phase.to_string(), fmt17(r.profit), fmt17(cumulative)]);
    }
    csv.write(&out_dir.join("ledger.csv"))?;

    let per_round = if ledger.rounds.is_empty() { 0.0 } else { ledger.per_round_regret() };
    let summary = format!(
        "{{\n  \"rounds\": {},\n  \"learning_rounds\": {},\n  \"complete\": {},\n  \"eps\": {},\n  \"opt_reference\": {},\n  \"exploit_profit\": {},\n  \"exploit_prices\": [{}],\n  \"per_round_regret\": {},\n  \"cumulative_regret\": {}\n}}\n",
        ledger.rounds.len(),
        ledger.learning_rounds,
        ledger.complete,
        fmt17(ledger.eps),
        fmt17(ledger.opt_reference),
        fmt17(ledger.exploit_profit),
        crate::io::join_floats(ledger.exploit_prices.as_slice()),
        fmt17(per_round),
        fmt17(ledger.cumulative_regret()),
    );
    write_text(&out_dir.join("summary.json"), &summary)?;
    Ok(ProfitMaxArtifacts {
        summary_line: format!(
            "profitmax: rounds={} learning={} exploit_profit={:.6} per_round_regret={:.6}",
            ledger.rounds.len(),
            ledger.learning_rounds,
            ledger.exploit_profit,
            per_round
        ),
    })
}

pub enum PriceSpec {
    Random,
    File(PathBuf),
}

impl PriceSpec {
    pub fn parse(s: &str) -> Result<Self, ExperimentError> {
        if s == "random" {
            Ok(PriceSpec::Random)
        } else if let Some(path) = s.strip_prefix("file:") {
            Ok(PriceSpec::File(PathBuf::from(path)))
        } else {
            Err(ExperimentError::BadGenSpec(format!(
                "price source must be 'random' or 'file:PATH', got '{}'",
                s
            )))
        }
    }
}

struct ReplayPrices {
    rows: Vec<PriceVector>,
    next: usize,
}

impl PriceSource for ReplayPrices {
    fn next_prices(&mut self, _t: usize, _history: &[ExogRound]) -> PriceVector {
        let p = self.rows[self.next].clone();
        self.next += 1;
        p
    }
}

pub struct ExogArtifacts {
    pub summary_line: String,
}

#[allow(clippy::too_many_arguments)]
pub fn run_exog_experiment(
    inst: &MarketInstance,
    prices: &PriceSpec,
    rounds: usize,
    trials: u64,
    seed: u64,
    trace: bool,
    out_dir: &Path,
) -> Result<ExogArtifacts, ExperimentError> {
    let replay_rows = match prices {
        PriceSpec::Random => None,
        PriceSpec::File(path) => {
            let rows = crate::io::read_price_file(path, inst.n)?;
            if rows.len() < rounds {
                return Err(ExperimentError::NotEnoughPrices { got: rows.len(), need: rounds });
            }
            Some(rows)
        }
    };

    let mut csv = CsvBuilder::new("trial,seed,mistakes,epochs,rounds");
    let mut total_mistakes = 0usize;
    let mut max_mistakes = 0usize;
    for trial in 0..trials {
        let trial_seed = seed ^ trial.wrapping_mul(0x9E3779B97F4A7C15);
        let mut rng = ChaCha8Rng::seed_from_u64(trial_seed);
        let cfg = ExogConfig::new(inst.delta);
        let log: ExogRunLog = match &replay_rows {
            Some(rows) => {
                let mut src = ReplayPrices { rows: rows.clone(), next: 0 };
                run_exog(inst, &mut src, rounds, TieBreakPolicy::Lexicographic, &mut rng, cfg)
            }
            None => {
                let mut src = RandomGridPrices {
                    n: inst.n,
                    step: inst.delta,
                    rng: ChaCha8Rng::seed_from_u64(trial_seed ^ 0x5DEECE66D),
                };
                run_exog(inst, &mut src, rounds, TieBreakPolicy::Lexicographic, &mut rng, cfg)
            }
        }
        .map_err(|e| ExperimentError::Algorithm(e.to_string()))?;

        total_mistakes += log.mistakes;
        max_mistakes = max_mistakes.max(log.mistakes);
        csv.row(&[
            trial.to_string(),
            trial_seed.to_string(),
            log.mistakes.to_string(),
            log.epochs.to_string(),
            log.rounds.len().to_string(),
        ]);

        if trace {
            let mut tr = CsvBuilder::new("t,epoch,mistake,prices,predicted,actual");
            for r in &log.rounds {
                tr.row(&[
                    r.t.to_string(),
                    r.epoch.to_string(),
                    (r.mistake as u8).to_string(),
                    crate::io::join_floats(r.prices.as_slice()).replace(", ", ";"),
                    crate::io::join_floats(r.predicted.as_slice()).replace(", ", ";"),
                    crate::io::join_floats(r.actual.as_slice()).replace(", ", ";"),
                ]);
            }
            tr.write(&out_dir.join(format!("trace_{}.csv", trial)))?;
        }
    }
    csv.write(&out_dir.join("trials.csv"))?;

    let mean = if trials == 0 { 0.0 } else { total_mistakes as f64 / trials as f64 };
    let summary = format!(
        "{{\n  \"trials\": {},\n  \"rounds\": {},\n  \"seed\": {},\n  \"mean_mistakes\": {},\n  \"max_mistakes\": {},\n  \"total_mistakes\": {}\n}}\n",
        trials,
        rounds,
        seed,
        fmt17(mean),
        max_mistakes,
        total_mistakes,
    );
    write_text(&out_dir.join("summary.json"), &summary)?;
    Ok(ExogArtifacts {
        summary_line: format!(
            "exog: trials={} rounds={} mean_mistakes={:.3} max_mistakes={}",
            trials, rounds, mean, max_mistakes
        ),
    })
}
