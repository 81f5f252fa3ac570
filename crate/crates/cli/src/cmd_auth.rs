use std::path::PathBuf;

use clap::{Args, ValueEnum};
use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;
use serde::Serialize;

use qdc_core::auth::{
    run_authentication, AuthAdversary, AuthParty, AuthResult, ErrorReport, HashId, Identity,
    Registry,
};

use crate::util;
use crate::{EXIT_ABORT, EXIT_OK};

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum AuthAttackArg {
    /// Honest session.
    None,
    /// Eve Z-measures Alice's qubit of every state in transit.
    EveZ,
    /// Alice's seat is taken by an impersonator without the identity.
    Impersonate,
}

#[derive(Args)]
pub struct AuthDemoArgs {
    /// Parties sharing each GHZ state (3 or 4).
    #[arg(long, default_value_t = 3)]
    pub parties: usize,
    /// GHZ states prepared for the session.
    #[arg(long, default_value_t = 64)]
    pub count: usize,
    #[arg(long, default_value_t = 0.25)]
    pub check_fraction: f64,
    #[arg(long, default_value_t = 0.05)]
    pub threshold: f64,
    #[arg(long, value_enum, default_value = "none")]
    pub adversary: AuthAttackArg,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Serialize)]
struct AuthOutput {
    seed: u64,
    parties: Vec<String>,
    prepared: usize,
    accepted: bool,
    report: ErrorReport,
    /// States left for message transmission after the check (0 on reject).
    remaining: usize,
}

pub fn run(args: AuthDemoArgs) -> Result<u8, String> {
    let users: &[(&str, usize)] = match args.parties {
        3 => &[("alice", 0), ("trent", 1), ("bob", 2)],
        4 => &[("alice", 0), ("bob", 1), ("trent", 2), ("charlie", 3)],
        n => return Err(format!("--parties must be 3 or 4, got {n}")),
    };
    let seed = util::resolve_seed(args.seed)?;

    let mut registry = Registry::new();
    for &(user, _) in users {
        let mut id = format!("{user}-registered-identity").into_bytes();
        id.resize(32, 0x5a);
        registry
            .register(Identity::new(user, id, HashId::Sha256).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
    }
    let parties: Vec<AuthParty> = users
        .iter()
        .map(|&(user_id, qubit)| AuthParty { user_id, qubit })
        .collect();

    let adversary = match args.adversary {
        AuthAttackArg::None => AuthAdversary::None,
        AuthAttackArg::EveZ => AuthAdversary::InterceptZ { qubit: 0 },
        AuthAttackArg::Impersonate => AuthAdversary::Impersonate { qubit: 0 },
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let result = run_authentication(
        &mut registry,
        &parties,
        args.parties,
        args.count,
        args.check_fraction,
        args.threshold,
        adversary,
        &mut rng,
    )
    .map_err(|e| e.to_string())?;

    let output = match result {
        AuthResult::Accepted { states, report } => AuthOutput {
            seed,
            parties: users.iter().map(|&(u, _)| u.to_string()).collect(),
            prepared: args.count,
            accepted: true,
            report,
            remaining: states.len(),
        },
        AuthResult::Rejected { report } => AuthOutput {
            seed,
            parties: users.iter().map(|&(u, _)| u.to_string()).collect(),
            prepared: args.count,
            accepted: false,
            report,
            remaining: 0,
        },
    };

    let json = serde_json::to_string_pretty(&output).map_err(|e| e.to_string())?;
    util::emit(args.out.as_deref(), &json).map_err(|e| e.to_string())?;
    eprintln!(
        "auth: seed {} errors {}/{} -> {}",
        seed,
        output.report.errors,
        output.report.checked,
        if output.accepted { "accepted" } else { "rejected" }
    );
    Ok(if output.accepted { EXIT_OK } else { EXIT_ABORT })
}
