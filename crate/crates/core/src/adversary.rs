//! Attack analysis: the dishonest-center (Trent) intercept-resend strategy
//! against both three-party protocols, and outside-Eve fixed-basis
//! intercepts. Every quantity is available both in closed form (exhaustive
//! branch enumeration) and as a seeded Monte Carlo estimate.

use alloc::vec::Vec;

use rand_core::RngCore;
use serde::Serialize;

use crate::densecode::{decode_p1, decode_p2, encode_pair, BitPair};
use crate::qcore::{
    BasisName, GhzLabel, MeasurementBasis, OutcomeLabel, PauliCode, Statevector, EPS,
};
use crate::rngutil;
use crate::Result;

/// What the attacker does and against which protocol.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum AttackStrategy {
    /// Trent intercepts Alice's qubit in protocol 1, optionally applies H,
    /// Z-measures it and his own qubit, and resends.
    ZlwP1 { apply_h: bool },
    /// Same strategy against protocol 2, where Alice's qubit is already
    /// headed for Trent.
    ZlwP2 { apply_h: bool },
    /// Outside Eve measures Alice's in-flight qubit (protocol 1) in a fixed
    /// single-qubit basis and forwards the collapse.
    EveIntercept { basis: BasisName },
}

impl AttackStrategy {
    pub fn id(self) -> &'static str {
        match self {
            AttackStrategy::ZlwP1 { .. } => "zlw-p1",
            AttackStrategy::ZlwP2 { .. } => "zlw-p2",
            AttackStrategy::EveIntercept { .. } => "eve-intercept",
        }
    }
}

fn encoded_state(bits: BitPair) -> Statevector {
    let mut state = Statevector::ghz(GhzLabel::PPlus, 3).expect("3-qubit GHZ");
    state
        .apply_gate(encode_pair(bits), 0)
        .expect("qubit 0 exists");
    state
}

fn z_outcome_bit(label: OutcomeLabel) -> u8 {
    match label {
        OutcomeLabel::Z(b) => b,
        other => panic!("expected Z outcome, got {other:?}"),
    }
}

/// Exact distribution of Trent's joint Z outcomes (Alice's qubit, Trent's
/// qubit), indexed `a*2 + t`, conditioned on Alice's encoding.
pub fn zlw_observation_distribution(bits: BitPair, apply_h: bool) -> Result<[f64; 4]> {
    let mut state = encoded_state(bits);
    if apply_h {
        state.apply_gate(PauliCode::H, 0)?;
    }
    let z = MeasurementBasis::z();
    let mut dist = [0.0f64; 4];
    for (a, pa, after_a) in state.branches(&[0], &z)? {
        for (t, pt, _) in after_a.branches(&[1], &z)? {
            dist[(z_outcome_bit(a) * 2 + z_outcome_bit(t)) as usize] += pa * pt;
        }
    }
    Ok(dist)
}

/// All four conditional observation distributions, row index = encoding.
pub fn zlw_conditionals(apply_h: bool) -> Result<[[f64; 4]; 4]> {
    let mut rows = [[0.0; 4]; 4];
    for (i, &bits) in BitPair::ALL.iter().enumerate() {
        rows[i] = zlw_observation_distribution(bits, apply_h)?;
    }
    Ok(rows)
}

/// Mutual information I(encoding; observation) in bits, for a uniform prior
/// over the rows of `conditionals`.
pub fn mutual_information(conditionals: &[[f64; 4]; 4]) -> f64 {
    let prior = 1.0 / conditionals.len() as f64;
    let mut marginal = [0.0f64; 4];
    for row in conditionals {
        for (m, &p) in marginal.iter_mut().zip(row) {
            *m += prior * p;
        }
    }
    let mut mi = 0.0;
    for row in conditionals {
        for (o, &p) in row.iter().enumerate() {
            if p > 0.0 {
                mi += prior * p * libm::log2(p / marginal[o]);
            }
        }
    }
    // clamp the tiny negative residue exact-zero cases can leave behind
    if libm::fabs(mi) < EPS {
        0.0
    } else {
        mi
    }
}

/// Maximum-likelihood guess for each observation, ties broken toward the
/// lowest encoding so the rule is deterministic.
pub fn ml_guess_table(conditionals: &[[f64; 4]; 4]) -> [BitPair; 4] {
    let mut table = [BitPair::new(0, 0); 4];
    for (o, slot) in table.iter_mut().enumerate() {
        let mut best = 0usize;
        for b in 1..4 {
            if conditionals[b][o] > conditionals[best][o] + EPS {
                best = b;
            }
        }
        *slot = BitPair::ALL[best];
    }
    table
}

/// Exact success probability of the ML guessing rule under a uniform prior:
/// Σ_o max_b p(o|b) / 4.
pub fn guess_accuracy(conditionals: &[[f64; 4]; 4]) -> f64 {
    let mut acc = 0.0;
    for o in 0..4 {
        let mut best = 0.0f64;
        for row in conditionals {
            best = best.max(row[o]);
        }
        acc += best;
    }
    acc / conditionals.len() as f64
}

/// Exact probability, per transmitted pair and uniform over encodings, that
/// the receiver decodes the wrong pair after the attack. Check bits inherit
/// this as their per-pair error rate.
pub fn detection_probability(strategy: AttackStrategy) -> Result<f64> {
    let mut total = 0.0;
    for &bits in &BitPair::ALL {
        let mut state = encoded_state(bits);
        let mut err = 0.0;
        match strategy {
            AttackStrategy::ZlwP1 { apply_h } | AttackStrategy::ZlwP2 { apply_h } => {
                if apply_h {
                    state.apply_gate(PauliCode::H, 0)?;
                }
                let z = MeasurementBasis::z();
                for (_, pa, after_a) in state.branches(&[0], &z)? {
                    for (_, pt, tapped) in after_a.branches(&[1], &z)? {
                        err += pa * pt * wrong_decode_mass(strategy, &tapped, bits)?;
                    }
                }
            }
            AttackStrategy::EveIntercept { basis } => {
                let b = MeasurementBasis::get(basis);
                for (_, pe, tapped) in state.branches(&[0], &b)? {
                    err += pe * wrong_decode_mass(strategy, &tapped, bits)?;
                }
            }
        }
        total += err;
    }
    Ok(total / 4.0)
}

/// Probability mass of honest-measurement branches that decode to something
/// other than `bits`, given the post-attack state.
fn wrong_decode_mass(
    strategy: AttackStrategy,
    state: &Statevector,
    bits: BitPair,
) -> Result<f64> {
    let bell = MeasurementBasis::bell();
    let x = MeasurementBasis::x();
    let p2 = matches!(strategy, AttackStrategy::ZlwP2 { .. });
    let mut err = 0.0;
    if p2 {
        // Bob X on B, then Trent Bell on AT
        for (bob, pb, after) in state.branches(&[2], &x)? {
            for (trent, pt, _) in after.branches(&[0, 1], &bell)? {
                if decode_p2(trent, bob)? != bits {
                    err += pb * pt;
                }
            }
        }
    } else {
        // Bob Bell on AB, then Trent X on T
        for (bob, pb, after) in state.branches(&[0, 2], &bell)? {
            for (trent, pt, _) in after.branches(&[1], &x)? {
                if decode_p1(trent, bob)? != bits {
                    err += pb * pt;
                }
            }
        }
    }
    Ok(err)
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ExactAnalysis {
    /// I(encoding; attacker observation) in bits; null for attacks whose
    /// observation carries no decodable pair structure.
    pub mi_bits: Option<f64>,
    /// ML guessing accuracy over the four encodings (1/4 = blind).
    pub guess_accuracy: Option<f64>,
    /// Per-pair probability that the legitimate decode is wrong.
    pub detection_per_pair: f64,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct EmpiricalAnalysis {
    pub guess_accuracy: Option<f64>,
    pub detection_per_pair: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct AttackReport {
    pub strategy: AttackStrategy,
    pub trials: usize,
    pub seed: u64,
    pub exact: ExactAnalysis,
    pub empirical: EmpiricalAnalysis,
    /// Conditional observation distributions p(observation | encoding),
    /// rows ordered 00,01,10,11 (ZLW strategies only).
    pub conditionals: Option<Vec<Vec<f64>>>,
}

/// Exact figures for a strategy, no sampling.
pub fn exact_analysis(strategy: AttackStrategy) -> Result<ExactAnalysis> {
    let detection = detection_probability(strategy)?;
    match strategy {
        AttackStrategy::ZlwP1 { apply_h } | AttackStrategy::ZlwP2 { apply_h } => {
            let cond = zlw_conditionals(apply_h)?;
            Ok(ExactAnalysis {
                mi_bits: Some(mutual_information(&cond)),
                guess_accuracy: Some(guess_accuracy(&cond)),
                detection_per_pair: detection,
            })
        }
        AttackStrategy::EveIntercept { .. } => Ok(ExactAnalysis {
            mi_bits: None,
            guess_accuracy: None,
            detection_per_pair: detection,
        }),
    }
}

/// Monte Carlo run: `trials` independent single-pair transmissions under
/// attack, uniform random encodings, attacker guessing by maximum
/// likelihood.
pub fn run_attack_scenario<R: RngCore + ?Sized>(
    strategy: AttackStrategy,
    trials: usize,
    seed: u64,
    rng: &mut R,
) -> Result<AttackReport> {
    let exact = exact_analysis(strategy)?;
    let z = MeasurementBasis::z();
    let bell = MeasurementBasis::bell();
    let x = MeasurementBasis::x();
    let zlw = match strategy {
        AttackStrategy::ZlwP1 { apply_h } | AttackStrategy::ZlwP2 { apply_h } => {
            let cond = zlw_conditionals(apply_h)?;
            Some((ml_guess_table(&cond), cond))
        }
        AttackStrategy::EveIntercept { .. } => None,
    };

    let mut correct_guesses = 0usize;
    let mut wrong_decodes = 0usize;
    for _ in 0..trials {
        let bits = BitPair::ALL[rngutil::below(rng, 4) as usize];
        let mut state = encoded_state(bits);
        match strategy {
            AttackStrategy::ZlwP1 { apply_h } | AttackStrategy::ZlwP2 { apply_h } => {
                if apply_h {
                    state.apply_gate(PauliCode::H, 0)?;
                }
                let (a, _) = state.measure(&[0], &z, rng)?;
                let (t, _) = state.measure(&[1], &z, rng)?;
                let obs = (z_outcome_bit(a) * 2 + z_outcome_bit(t)) as usize;
                let (table, _) = zlw.as_ref().expect("zlw tables built above");
                if table[obs] == bits {
                    correct_guesses += 1;
                }
            }
            AttackStrategy::EveIntercept { basis } => {
                state.measure(&[0], &MeasurementBasis::get(basis), rng)?;
            }
        }
        let decoded = if matches!(strategy, AttackStrategy::ZlwP2 { .. }) {
            let (bob, _) = state.measure(&[2], &x, rng)?;
            let (trent, _) = state.measure(&[0, 1], &bell, rng)?;
            decode_p2(trent, bob)?
        } else {
            let (bob, _) = state.measure(&[0, 2], &bell, rng)?;
            let (trent, _) = state.measure(&[1], &x, rng)?;
            decode_p1(trent, bob)?
        };
        if decoded != bits {
            wrong_decodes += 1;
        }
    }

    Ok(AttackReport {
        strategy,
        trials,
        seed,
        exact,
        empirical: EmpiricalAnalysis {
            guess_accuracy: zlw
                .as_ref()
                .map(|_| correct_guesses as f64 / trials as f64),
            detection_per_pair: wrong_decodes as f64 / trials as f64,
        },
        conditionals: zlw.map(|(_, cond)| cond.iter().map(|r| r.to_vec()).collect()),
    })
}

/// The H-masked encodings written out termwise: ½ sums over |000⟩, |011⟩,
/// |100⟩, |111⟩ with the signs below. Used to cross-check the gate pipeline
/// at fidelity 1.
pub fn masked_encoding_expected(bits: BitPair) -> Statevector {
    // (index, sign) pairs per encoding; amplitudes are ±1/2
    let terms: [(usize, f64); 4] = match (bits.hi, bits.lo) {
        (0, 0) => [(0b000, 1.0), (0b100, 1.0), (0b011, 1.0), (0b111, -1.0)],
        (0, 1) => [(0b000, 1.0), (0b100, -1.0), (0b011, 1.0), (0b111, 1.0)],
        (1, 0) => [(0b011, 1.0), (0b111, 1.0), (0b000, -1.0), (0b100, 1.0)],
        _ => [(0b000, 1.0), (0b100, 1.0), (0b011, -1.0), (0b111, 1.0)],
    };
    let mut amps = alloc::vec![num_complex::Complex64::new(0.0, 0.0); 8];
    for (idx, sign) in terms {
        amps[idx] = num_complex::Complex64::new(0.5 * sign, 0.0);
    }
    Statevector::from_amps(3, amps).expect("normalized by construction")
}
