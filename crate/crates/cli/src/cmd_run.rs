use std::path::PathBuf;

use clap::{Args, ValueEnum};
use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;
use serde::Serialize;

use qdc_core::auth::{
    run_authentication, AuthAdversary, AuthParty, AuthResult, ErrorReport, HashId, Identity,
    Registry,
};
use qdc_core::ecc::EccScheme;
use qdc_core::proto::{run_protocol, ChannelAttack, ProtocolConfig, Transcript, Variant};
use qdc_core::qcore::BasisName;

use crate::util;
use crate::{EXIT_ABORT, EXIT_OK};

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum VariantArg {
    P1,
    P2,
    Mp1,
    Mp2,
}

impl VariantArg {
    fn to_variant(self) -> Variant {
        match self {
            VariantArg::P1 => Variant::P1,
            VariantArg::P2 => Variant::P2,
            VariantArg::Mp1 => Variant::Mp1,
            VariantArg::Mp2 => Variant::Mp2,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum EccArg {
    Identity,
    Repetition3,
    Hamming74,
}

impl EccArg {
    fn to_scheme(self) -> EccScheme {
        match self {
            EccArg::Identity => EccScheme::Identity,
            EccArg::Repetition3 => EccScheme::Repetition3,
            EccArg::Hamming74 => EccScheme::Hamming74,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum AttackArg {
    /// Honest channel.
    None,
    /// Outside Eve Z-measures Alice's in-flight qubits.
    EveZ,
    /// Outside Eve X-measures Alice's in-flight qubits.
    EveX,
    /// Trent intercepts and Z-measures (Alice's and his own qubit).
    Zlw,
    /// Same, but with an H on Alice's qubit first.
    ZlwH,
}

impl AttackArg {
    fn to_attack(self) -> ChannelAttack {
        match self {
            AttackArg::None => ChannelAttack::None,
            AttackArg::EveZ => ChannelAttack::EveIntercept {
                basis: BasisName::Z,
            },
            AttackArg::EveX => ChannelAttack::EveIntercept {
                basis: BasisName::X,
            },
            AttackArg::Zlw => ChannelAttack::ZlwTrent { apply_h: false },
            AttackArg::ZlwH => ChannelAttack::ZlwTrent { apply_h: true },
        }
    }
}

#[derive(Args)]
pub struct RunArgs {
    /// Protocol variant.
    #[arg(long, value_enum, default_value = "p1")]
    pub variant: VariantArg,
    /// Alice's message: binary string or 0x-prefixed hex.
    #[arg(long)]
    pub message: String,
    /// Bob's message (multiparty variants only).
    #[arg(long)]
    pub message_b: Option<String>,
    /// RNG seed; falls back to $QDC_SIM_SEED, then OS entropy.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Check bits as a fraction of the transmitted stream.
    #[arg(long, default_value_t = 0.25)]
    pub check_fraction: f64,
    /// Fixed number of check bits (overrides --check-fraction).
    #[arg(long)]
    pub check_count: Option<usize>,
    /// Error-correcting code applied to the message.
    #[arg(long, value_enum, default_value = "hamming74")]
    pub ecc: EccArg,
    /// Abort threshold on the check-bit error rate.
    #[arg(long, default_value_t = 0.05)]
    pub threshold: f64,
    /// Channel adversary during message transmission.
    #[arg(long, value_enum, default_value = "none")]
    pub attack: AttackArg,
    /// GHZ states to prepare for the session (default: computed from the
    /// message length).
    #[arg(long)]
    pub states: Option<usize>,
    /// Write the JSON output here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Serialize)]
struct RunOutput {
    seed: u64,
    auth_accepted: bool,
    auth_report: ErrorReport,
    transcript: Option<Transcript>,
}

fn register_default_identities(registry: &mut Registry, users: &[&str]) -> qdc_core::Result<()> {
    for &user in users {
        // fixed per-user identity bytes so runs are reproducible from the
        // seed alone
        let mut id = format!("{user}-registered-identity").into_bytes();
        id.resize(32, 0x5a);
        registry.register(Identity::new(user, id, HashId::Sha256)?)?;
    }
    Ok(())
}

/// Smallest preparation count that survives the auth check, the reserved
/// subset, and still covers `units` encodings.
fn required_states(units: usize, check_fraction: f64) -> usize {
    let mut count = units.max(1);
    loop {
        let after_auth = count - ((check_fraction * count as f64).ceil() as usize);
        let after_reserve = after_auth - after_auth / 4;
        if after_reserve >= units {
            return count;
        }
        count += 1;
    }
}

fn units_needed(config: &ProtocolConfig) -> usize {
    let check = |message: &[u8]| {
        let coded = qdc_core::ecc::ecc_encode(message, config.ecc).len();
        let c = config.check_count.unwrap_or_else(|| {
            (config.check_fraction * coded as f64 / (1.0 - config.check_fraction)).ceil() as usize
        });
        coded + c
    };
    let a_units = check(&config.message).div_ceil(2);
    if config.variant.is_multiparty() {
        a_units.max(check(&config.message_b))
    } else {
        a_units
    }
}

pub fn run(args: RunArgs) -> Result<u8, String> {
    let seed = util::resolve_seed(args.seed)?;
    let message = util::parse_bits(&args.message)?;
    let variant = args.variant.to_variant();

    let mut config = ProtocolConfig::new(variant, message, seed);
    config.check_fraction = args.check_fraction;
    config.check_count = args.check_count;
    config.ecc = args.ecc.to_scheme();
    config.error_threshold = args.threshold;
    if let Some(ref b) = args.message_b {
        config.message_b = util::parse_bits(b)?;
    }
    if variant.is_multiparty() && config.message_b.is_empty() {
        return Err(String::from("--message-b is required for mp1/mp2"));
    }
    if !variant.is_multiparty() && args.message_b.is_some() {
        return Err(String::from("--message-b only applies to mp1/mp2"));
    }

    let mut registry = Registry::new();
    let parties: Vec<AuthParty> = if variant.is_multiparty() {
        register_default_identities(&mut registry, &["alice", "bob", "trent", "charlie"])
            .map_err(|e| e.to_string())?;
        [("alice", 0), ("bob", 1), ("trent", 2), ("charlie", 3)]
            .iter()
            .map(|&(user_id, qubit)| AuthParty { user_id, qubit })
            .collect()
    } else {
        register_default_identities(&mut registry, &["alice", "trent", "bob"])
            .map_err(|e| e.to_string())?;
        [("alice", 0), ("trent", 1), ("bob", 2)]
            .iter()
            .map(|&(user_id, qubit)| AuthParty { user_id, qubit })
            .collect()
    };

    let count = args
        .states
        .unwrap_or_else(|| required_states(units_needed(&config), args.check_fraction));

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let auth = run_authentication(
        &mut registry,
        &parties,
        variant.n_qubits(),
        count,
        args.check_fraction,
        args.threshold,
        AuthAdversary::None,
        &mut rng,
    )
    .map_err(|e| e.to_string())?;

    let output = match auth {
        AuthResult::Rejected { report } => RunOutput {
            seed,
            auth_accepted: false,
            auth_report: report,
            transcript: None,
        },
        AuthResult::Accepted { states, report } => {
            let transcript = run_protocol(&config, states, args.attack.to_attack(), &mut rng)
                .map_err(|e| e.to_string())?;
            RunOutput {
                seed,
                auth_accepted: true,
                auth_report: report,
                transcript: Some(transcript),
            }
        }
    };

    let json = serde_json::to_string_pretty(&output).map_err(|e| e.to_string())?;
    util::emit(args.out.as_deref(), &json).map_err(|e| e.to_string())?;

    let (code, verdict) = match &output.transcript {
        None => (EXIT_ABORT, "authentication rejected"),
        Some(t) if t.accepted => (EXIT_OK, "accepted"),
        Some(_) => (EXIT_ABORT, "aborted on check bits"),
    };
    eprintln!(
        "{}: seed {} auth errors {}/{} -> {}",
        variant.id(),
        seed,
        output.auth_report.errors,
        output.auth_report.checked,
        verdict
    );
    Ok(code)
}
