use std::path::PathBuf;

use clap::{Args, ValueEnum};
use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;

use qdc_core::adversary::{run_attack_scenario, AttackStrategy};
use qdc_core::qcore::BasisName;

use crate::util;
use crate::EXIT_OK;

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum StrategyArg {
    /// Trent's intercept-resend against protocol 1.
    ZlwP1,
    /// Trent's intercept-resend against protocol 2.
    ZlwP2,
    /// Outside Eve's fixed-basis intercept (protocol 1 channel).
    EveIntercept,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum BasisArg {
    Z,
    X,
}

#[derive(Args)]
pub struct AttackArgs {
    #[arg(long, value_enum)]
    pub strategy: StrategyArg,
    /// Apply H to the intercepted qubit before measuring (ZLW strategies).
    #[arg(long)]
    pub apply_h: bool,
    /// Eve's measurement basis (eve-intercept only).
    #[arg(long, value_enum, default_value = "z")]
    pub basis: BasisArg,
    /// Monte Carlo trials.
    #[arg(long, default_value_t = 100_000)]
    pub trials: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run(args: AttackArgs) -> Result<u8, String> {
    let strategy = match args.strategy {
        StrategyArg::ZlwP1 => AttackStrategy::ZlwP1 {
            apply_h: args.apply_h,
        },
        StrategyArg::ZlwP2 => AttackStrategy::ZlwP2 {
            apply_h: args.apply_h,
        },
        StrategyArg::EveIntercept => {
            if args.apply_h {
                return Err(String::from("--apply-h only applies to the zlw strategies"));
            }
            AttackStrategy::EveIntercept {
                basis: match args.basis {
                    BasisArg::Z => BasisName::Z,
                    BasisArg::X => BasisName::X,
                },
            }
        }
    };
    if args.trials == 0 {
        return Err(String::from("--trials must be positive"));
    }
    let seed = util::resolve_seed(args.seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let report = run_attack_scenario(strategy, args.trials, seed, &mut rng)
        .map_err(|e| e.to_string())?;
    let json = serde_json::to_string_pretty(&report).map_err(|e| e.to_string())?;
    util::emit(args.out.as_deref(), &json).map_err(|e| e.to_string())?;
    eprintln!(
        "{}: exact detection/pair {}, empirical {} over {} trials",
        strategy.id(),
        report.exact.detection_per_pair,
        report.empirical.detection_per_pair,
        args.trials
    );
    Ok(EXIT_OK)
}
