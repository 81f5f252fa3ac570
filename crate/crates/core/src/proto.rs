//! Message-transmission protocols over the authenticated GHZ states: the two
//! three-party dense-coding protocols and both four-party generalizations,
//! each producing a replayable [`Transcript`].
//!
//! Register layouts: three-party units are |ATB⟩ (A=0, T=1, B=2); four-party
//! units are |ABTC⟩ (A=0, B=1, T=2, C=3).

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand_core::RngCore;
use serde::Serialize;

use crate::auth::{ErrorReport, SharedStates};
use crate::densecode::{
    decode_mp1, decode_mp2, decode_p1, decode_p2, encode_pair, encode_single, BitPair,
};
use crate::ecc::{ecc_decode, ecc_encode, EccScheme};
use crate::error::invalid_arg;
use crate::qcore::{BasisName, MeasurementBasis, OutcomeLabel, PauliCode, Statevector};
use crate::rngutil;
use crate::Result;

pub const TRANSCRIPT_VERSION: u32 = 1;

/// Protocol variant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    P1,
    P2,
    Mp1,
    Mp2,
}

impl Variant {
    pub fn id(self) -> &'static str {
        match self {
            Variant::P1 => "p1",
            Variant::P2 => "p2",
            Variant::Mp1 => "mp1",
            Variant::Mp2 => "mp2",
        }
    }

    pub fn parse(s: &str) -> Result<Variant> {
        match s {
            "p1" => Ok(Variant::P1),
            "p2" => Ok(Variant::P2),
            "mp1" => Ok(Variant::Mp1),
            "mp2" => Ok(Variant::Mp2),
            other => Err(invalid_arg!("unknown protocol variant: {other}")),
        }
    }

    pub fn is_multiparty(self) -> bool {
        matches!(self, Variant::Mp1 | Variant::Mp2)
    }

    /// Qubits per shared unit.
    pub fn n_qubits(self) -> usize {
        if self.is_multiparty() {
            4
        } else {
            3
        }
    }
}

/// A protocol participant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Party {
    Alice,
    Bob,
    Trent,
    Charlie,
    Eve,
}

/// One causally ordered event of a protocol run.
#[derive(Clone, Debug, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Event {
    Prepared {
        count: usize,
        n_qubits: usize,
        state: &'static str,
    },
    /// Step (a): units set aside and kept secret; never used again.
    Reserved {
        count: usize,
    },
    Gate {
        party: Party,
        op: PauliCode,
        unit: usize,
        qubit: usize,
    },
    Sent {
        unit: usize,
        qubit: usize,
        from: Party,
        to: Party,
    },
    Measured {
        party: Party,
        basis: BasisName,
        unit: usize,
        outcome: OutcomeLabel,
        probability: f64,
    },
    Announced {
        party: Party,
        payload: String,
    },
    Decision {
        accept: bool,
        reason: String,
    },
}

/// Ordered event log of one run plus the decoded output.
#[derive(Clone, Debug, Serialize)]
pub struct Transcript {
    pub version: u32,
    pub variant: Variant,
    pub seed: u64,
    pub events: Vec<Event>,
    /// Alice's decoded message as hex, when its length is a whole number of
    /// bytes (always null on abort).
    pub decoded_hex: Option<String>,
    /// Alice's decoded message as a bit string.
    pub decoded_bits: Option<String>,
    /// Bob's decoded message bits (multiparty variants only).
    pub decoded_bits_b: Option<String>,
    pub error_report: Option<ErrorReport>,
    pub accepted: bool,
}

impl Transcript {
    fn new(variant: Variant, seed: u64) -> Transcript {
        Transcript {
            version: TRANSCRIPT_VERSION,
            variant,
            seed,
            events: Vec::new(),
            decoded_hex: None,
            decoded_bits: None,
            decoded_bits_b: None,
            error_report: None,
            accepted: false,
        }
    }

    fn push(&mut self, event: Event) {
        self.events.push(event);
    }
}

/// Round toward 15 significant digits so serialized probabilities are stable
/// and replay-exact.
pub fn round_sig15(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    let exp = libm::floor(libm::log10(libm::fabs(x)));
    let scale = libm::pow(10.0, 14.0 - exp);
    libm::round(x * scale) / scale
}

pub fn bits_to_string(bits: &[u8]) -> String {
    bits.iter().map(|&b| if b == 0 { '0' } else { '1' }).collect()
}

pub fn bits_to_hex(bits: &[u8]) -> Option<String> {
    if bits.is_empty() || bits.len() % 8 != 0 {
        return None;
    }
    let mut out = String::with_capacity(bits.len() / 4);
    for chunk in bits.chunks(4) {
        let nibble = chunk.iter().fold(0u32, |acc, &b| (acc << 1) | b as u32);
        out.push(char::from_digit(nibble, 16).unwrap());
    }
    Some(out)
}

/// What the adversary does to qubits in flight.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChannelAttack {
    None,
    /// Outside Eve measures the in-flight qubit in the given basis and
    /// forwards the collapsed state.
    EveIntercept { basis: BasisName },
    /// The Zhang-Liu-Wang inner attack: Trent intercepts Alice's qubit,
    /// optionally applies H to it, then Z-measures both it and his own
    /// qubit, forwarding the collapsed states.
    ZlwTrent { apply_h: bool },
}

/// Run configuration; `message_b` only applies to the multiparty variants.
#[derive(Clone, Debug)]
pub struct ProtocolConfig {
    pub variant: Variant,
    pub message: Vec<u8>,
    pub message_b: Vec<u8>,
    /// Check bits as a fraction of the combined (coded + check) stream.
    pub check_fraction: f64,
    /// Explicit check-bit count; overrides `check_fraction` when set.
    pub check_count: Option<usize>,
    pub ecc: EccScheme,
    pub error_threshold: f64,
    pub seed: u64,
}

impl ProtocolConfig {
    pub fn new(variant: Variant, message: Vec<u8>, seed: u64) -> ProtocolConfig {
        ProtocolConfig {
            variant,
            message,
            message_b: Vec::new(),
            check_fraction: 0.25,
            check_count: None,
            ecc: EccScheme::Hamming74,
            error_threshold: 0.05,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.message.iter().chain(&self.message_b).any(|&b| b > 1) {
            return Err(invalid_arg!("message entries must be bits"));
        }
        if !(self.check_fraction > 0.0 && self.check_fraction < 1.0) {
            return Err(invalid_arg!(
                "check fraction must be in (0, 1), got {}",
                self.check_fraction
            ));
        }
        if self.check_count == Some(0) {
            return Err(invalid_arg!("check count must be at least 1"));
        }
        if self.message.is_empty() {
            return Err(invalid_arg!("message must be nonempty"));
        }
        Ok(())
    }

    fn check_count_for(&self, coded_len: usize) -> usize {
        match self.check_count {
            Some(c) => c,
            // c / (coded + c) = fraction
            None => libm::ceil(
                self.check_fraction * coded_len as f64 / (1.0 - self.check_fraction),
            ) as usize,
        }
    }
}

/// Scatter `check` bits into `message` at random distinct positions.
/// Returns the combined stream and the sorted check positions.
pub fn interleave<R: RngCore + ?Sized>(
    message: &[u8],
    check: &[u8],
    rng: &mut R,
) -> (Vec<u8>, Vec<usize>) {
    let total = message.len() + check.len();
    let positions = rngutil::choose_indices(rng, total, check.len());
    let mut combined = Vec::with_capacity(total);
    let mut msg_iter = message.iter();
    let mut check_iter = check.iter();
    let mut pos_iter = positions.iter().peekable();
    for i in 0..total {
        if pos_iter.peek() == Some(&&i) {
            pos_iter.next();
            combined.push(*check_iter.next().expect("one check bit per position"));
        } else {
            combined.push(*msg_iter.next().expect("message bits fill the rest"));
        }
    }
    (combined, positions)
}

/// Inverse of [`interleave`]: split the combined stream back into
/// (message, check).
pub fn extract(combined: &[u8], positions: &[usize]) -> Result<(Vec<u8>, Vec<u8>)> {
    for (i, &p) in positions.iter().enumerate() {
        if p >= combined.len() {
            return Err(invalid_arg!("check position {p} out of range"));
        }
        if i > 0 && positions[i - 1] >= p {
            return Err(invalid_arg!("check positions must be strictly increasing"));
        }
    }
    let mut message = Vec::with_capacity(combined.len() - positions.len());
    let mut check = Vec::with_capacity(positions.len());
    let mut pos_iter = positions.iter().peekable();
    for (i, &bit) in combined.iter().enumerate() {
        if pos_iter.peek() == Some(&&i) {
            pos_iter.next();
            check.push(bit);
        } else {
            message.push(bit);
        }
    }
    Ok((message, check))
}

/// A combined (coded message + check bits) stream with its bookkeeping.
struct Stream {
    combined: Vec<u8>,
    positions: Vec<usize>,
    check: Vec<u8>,
    message_len: usize,
}

fn build_stream<R: RngCore + ?Sized>(
    message: &[u8],
    config: &ProtocolConfig,
    rng: &mut R,
) -> Stream {
    let coded = ecc_encode(message, config.ecc);
    let check = rngutil::bits(rng, config.check_count_for(coded.len()));
    let (combined, positions) = interleave(&coded, &check, rng);
    Stream {
        combined,
        positions,
        check,
        message_len: message.len(),
    }
}

/// Verify the receiver's decoded stream against the sender's revealed check
/// bits, then strip the ECC. Returns (report, decoded message or None on
/// abort).
fn verify_and_decode(
    decoded_combined: &[u8],
    stream: &Stream,
    ecc: EccScheme,
    threshold: f64,
) -> Result<(ErrorReport, Option<Vec<u8>>)> {
    let (coded, check) = extract(&decoded_combined[..stream.combined.len()], &stream.positions)?;
    let errors = check
        .iter()
        .zip(&stream.check)
        .filter(|(a, b)| a != b)
        .count();
    let report = ErrorReport {
        checked: stream.check.len(),
        errors,
        rate: errors as f64 / stream.check.len() as f64,
    };
    if report.rate > threshold {
        return Ok((report, None));
    }
    let mut message = ecc_decode(&coded, ecc)?;
    message.truncate(stream.message_len);
    Ok((report, Some(message)))
}

fn pair_up(bits: &[u8]) -> Vec<BitPair> {
    let mut padded = bits.to_vec();
    if padded.len() % 2 == 1 {
        padded.push(0); // trailing pad; true length travels in the header
    }
    padded
        .chunks(2)
        .map(|c| BitPair::new(c[0], c[1]))
        .collect()
}

fn apply_attack<R: RngCore + ?Sized>(
    state: &mut Statevector,
    attack: ChannelAttack,
    unit: usize,
    in_flight_qubit: usize,
    trent_qubit: usize,
    transcript: &mut Transcript,
    rng: &mut R,
) -> Result<()> {
    match attack {
        ChannelAttack::None => {}
        ChannelAttack::EveIntercept { basis } => {
            let b = MeasurementBasis::get(basis);
            let (outcome, p) = state.measure(&[in_flight_qubit], &b, rng)?;
            transcript.push(Event::Measured {
                party: Party::Eve,
                basis,
                unit,
                outcome,
                probability: round_sig15(p),
            });
        }
        ChannelAttack::ZlwTrent { apply_h } => {
            if apply_h {
                state.apply_gate(PauliCode::H, in_flight_qubit)?;
                transcript.push(Event::Gate {
                    party: Party::Trent,
                    op: PauliCode::H,
                    unit,
                    qubit: in_flight_qubit,
                });
            }
            let z = MeasurementBasis::z();
            for qubit in [in_flight_qubit, trent_qubit] {
                let (outcome, p) = state.measure(&[qubit], &z, rng)?;
                transcript.push(Event::Measured {
                    party: Party::Trent,
                    basis: BasisName::Z,
                    unit,
                    outcome,
                    probability: round_sig15(p),
                });
            }
        }
    }
    Ok(())
}

/// Step (a): reserve a secret subset (default 25%) of the surviving units.
/// The reserved units are recorded and never used.
fn reserve_subset<R: RngCore + ?Sized>(
    states: Vec<Statevector>,
    transcript: &mut Transcript,
    rng: &mut R,
) -> Vec<Statevector> {
    let reserve = states.len() / 4;
    let chosen = rngutil::choose_indices(rng, states.len(), reserve);
    transcript.push(Event::Reserved { count: reserve });
    let mut kept = Vec::with_capacity(states.len() - reserve);
    let mut chosen_iter = chosen.iter().peekable();
    for (i, state) in states.into_iter().enumerate() {
        if chosen_iter.peek() == Some(&&i) {
            chosen_iter.next();
        } else {
            kept.push(state);
        }
    }
    kept
}

fn finish(
    transcript: &mut Transcript,
    report: ErrorReport,
    decoded: Option<Vec<u8>>,
    decoded_b: Option<Vec<u8>>,
) {
    transcript.error_report = Some(report);
    match decoded {
        Some(bits) => {
            transcript.push(Event::Decision {
                accept: true,
                reason: format!("check error rate {} within threshold", report.rate),
            });
            transcript.decoded_hex = bits_to_hex(&bits);
            transcript.decoded_bits = Some(bits_to_string(&bits));
            transcript.decoded_bits_b = decoded_b.map(|b| bits_to_string(&b));
            transcript.accepted = true;
        }
        None => {
            transcript.push(Event::Decision {
                accept: false,
                reason: format!(
                    "check error rate {} exceeds threshold ({}/{} check bits wrong)",
                    report.rate, report.errors, report.checked
                ),
            });
            transcript.accepted = false;
        }
    }
}

/// Dispatch on the configured variant.
pub fn run_protocol<R: RngCore + ?Sized>(
    config: &ProtocolConfig,
    shared: SharedStates,
    attack: ChannelAttack,
    rng: &mut R,
) -> Result<Transcript> {
    config.validate()?;
    if shared.n_qubits() != config.variant.n_qubits() {
        return Err(invalid_arg!(
            "variant {} needs {}-qubit shared states, got {}-qubit",
            config.variant.id(),
            config.variant.n_qubits(),
            shared.n_qubits()
        ));
    }
    match config.variant {
        Variant::P1 | Variant::P2 => run_two_party(config, shared, attack, rng),
        Variant::Mp1 | Variant::Mp2 => run_multiparty(config, shared, attack, rng),
    }
}

/// Protocols 1 and 2. They differ only in where Alice sends her qubit and
/// who measures what: P1 sends A→Bob, Bob Bell-measures AB and Trent
/// publishes X outcomes; P2 sends A→Trent, Bob X-measures B and Trent
/// announces Bell outcomes on AT.
fn run_two_party<R: RngCore + ?Sized>(
    config: &ProtocolConfig,
    shared: SharedStates,
    attack: ChannelAttack,
    rng: &mut R,
) -> Result<Transcript> {
    let mut transcript = Transcript::new(config.variant, config.seed);
    transcript.push(Event::Prepared {
        count: shared.len(),
        n_qubits: 3,
        state: "P+",
    });

    let working = reserve_subset(shared.take_states(), &mut transcript, rng);

    let stream = build_stream(&config.message, config, rng);
    let pairs = pair_up(&stream.combined);
    if pairs.len() > working.len() {
        return Err(invalid_arg!(
            "insufficient shared states: need {}, have {} after reservation",
            pairs.len(),
            working.len()
        ));
    }
    let mut units: Vec<Statevector> = working.into_iter().take(pairs.len()).collect();

    // step (d): dense encoding on Alice's qubit
    for (unit, (state, &bits)) in units.iter_mut().zip(&pairs).enumerate() {
        let op = encode_pair(bits);
        state.apply_gate(op, 0)?;
        transcript.push(Event::Gate {
            party: Party::Alice,
            op,
            unit,
            qubit: 0,
        });
    }

    // step (e): Alice sends her qubits; the adversary taps the channel here
    let receiver = if config.variant == Variant::P1 {
        Party::Bob
    } else {
        Party::Trent
    };
    for (unit, state) in units.iter_mut().enumerate() {
        transcript.push(Event::Sent {
            unit,
            qubit: 0,
            from: Party::Alice,
            to: receiver,
        });
        apply_attack(state, attack, unit, 0, 1, &mut transcript, rng)?;
    }

    // steps (f)-(g) and decoding
    let decoded_combined = match config.variant {
        Variant::P1 => {
            // (f) Bob Bell-measures AB pairs
            let bell = MeasurementBasis::bell();
            let mut bob_outcomes = Vec::with_capacity(units.len());
            for (unit, state) in units.iter_mut().enumerate() {
                let (outcome, p) = state.measure(&[0, 2], &bell, rng)?;
                transcript.push(Event::Measured {
                    party: Party::Bob,
                    basis: BasisName::Bell,
                    unit,
                    outcome,
                    probability: round_sig15(p),
                });
                bob_outcomes.push(outcome);
            }
            // (g) Trent X-measures and publishes, batched
            let x = MeasurementBasis::x();
            let mut trent_outcomes = Vec::with_capacity(units.len());
            for (unit, state) in units.iter_mut().enumerate() {
                let (outcome, p) = state.measure(&[1], &x, rng)?;
                transcript.push(Event::Measured {
                    party: Party::Trent,
                    basis: BasisName::X,
                    unit,
                    outcome,
                    probability: round_sig15(p),
                });
                trent_outcomes.push(outcome);
            }
            announce_outcomes(&mut transcript, Party::Trent, &trent_outcomes);
            // (h) Bob decodes
            let mut bits = Vec::with_capacity(units.len() * 2);
            for (&trent, &bob) in trent_outcomes.iter().zip(&bob_outcomes) {
                let pair = decode_p1(trent, bob)?;
                bits.push(pair.hi);
                bits.push(pair.lo);
            }
            bits
        }
        Variant::P2 => {
            // (f) Bob X-measures his qubits
            let x = MeasurementBasis::x();
            let mut bob_outcomes = Vec::with_capacity(units.len());
            for (unit, state) in units.iter_mut().enumerate() {
                let (outcome, p) = state.measure(&[2], &x, rng)?;
                transcript.push(Event::Measured {
                    party: Party::Bob,
                    basis: BasisName::X,
                    unit,
                    outcome,
                    probability: round_sig15(p),
                });
                bob_outcomes.push(outcome);
            }
            // (g) Trent Bell-measures AT and announces
            let bell = MeasurementBasis::bell();
            let mut trent_outcomes = Vec::with_capacity(units.len());
            for (unit, state) in units.iter_mut().enumerate() {
                let (outcome, p) = state.measure(&[0, 1], &bell, rng)?;
                transcript.push(Event::Measured {
                    party: Party::Trent,
                    basis: BasisName::Bell,
                    unit,
                    outcome,
                    probability: round_sig15(p),
                });
                trent_outcomes.push(outcome);
            }
            announce_outcomes(&mut transcript, Party::Trent, &trent_outcomes);
            let mut bits = Vec::with_capacity(units.len() * 2);
            for (&trent, &bob) in trent_outcomes.iter().zip(&bob_outcomes) {
                let pair = decode_p2(trent, bob)?;
                bits.push(pair.hi);
                bits.push(pair.lo);
            }
            bits
        }
        _ => unreachable!(),
    };

    // steps (i)-(j): Alice reveals check positions/values, Bob verifies
    transcript.push(Event::Announced {
        party: Party::Alice,
        payload: format!(
            "check positions {:?} values {}",
            stream.positions,
            bits_to_string(&stream.check)
        ),
    });
    let (report, decoded) =
        verify_and_decode(&decoded_combined, &stream, config.ecc, config.error_threshold)?;
    finish(&mut transcript, report, decoded, None);
    Ok(transcript)
}

/// Multiparty variants over |ABTC⟩ units: Alice dense-encodes two bits on
/// qubit 0, Bob one bit on qubit 1. In MP1 both send to Charlie, who
/// GHZ-measures ABC while Trent publishes X on T; in MP2 both send to
/// Trent, who GHZ-measures ABT and announces while Charlie X-measures C.
fn run_multiparty<R: RngCore + ?Sized>(
    config: &ProtocolConfig,
    shared: SharedStates,
    attack: ChannelAttack,
    rng: &mut R,
) -> Result<Transcript> {
    if config.message_b.is_empty() {
        return Err(invalid_arg!(
            "multiparty variants need Bob's message (message_b)"
        ));
    }
    let mut transcript = Transcript::new(config.variant, config.seed);
    transcript.push(Event::Prepared {
        count: shared.len(),
        n_qubits: 4,
        state: "P+",
    });

    let working = reserve_subset(shared.take_states(), &mut transcript, rng);

    let stream_a = build_stream(&config.message, config, rng);
    let stream_b = build_stream(&config.message_b, config, rng);
    let pairs = pair_up(&stream_a.combined);
    let mut bob_bits = stream_b.combined.clone();
    let units_needed = pairs.len().max(bob_bits.len());
    if units_needed > working.len() {
        return Err(invalid_arg!(
            "insufficient shared states: need {}, have {} after reservation",
            units_needed,
            working.len()
        ));
    }
    // pad the shorter stream with identity encodings
    let mut pairs = pairs;
    pairs.resize(units_needed, BitPair::new(0, 0));
    bob_bits.resize(units_needed, 0);
    let mut units: Vec<Statevector> = working.into_iter().take(units_needed).collect();

    for (unit, state) in units.iter_mut().enumerate() {
        let op_a = encode_pair(pairs[unit]);
        state.apply_gate(op_a, 0)?;
        transcript.push(Event::Gate {
            party: Party::Alice,
            op: op_a,
            unit,
            qubit: 0,
        });
        let op_b = encode_single(bob_bits[unit]);
        state.apply_gate(op_b, 1)?;
        transcript.push(Event::Gate {
            party: Party::Bob,
            op: op_b,
            unit,
            qubit: 1,
        });
    }

    let receiver = if config.variant == Variant::Mp1 {
        Party::Charlie
    } else {
        Party::Trent
    };
    for (unit, state) in units.iter_mut().enumerate() {
        transcript.push(Event::Sent {
            unit,
            qubit: 0,
            from: Party::Alice,
            to: receiver,
        });
        apply_attack(state, attack, unit, 0, 2, &mut transcript, rng)?;
        transcript.push(Event::Sent {
            unit,
            qubit: 1,
            from: Party::Bob,
            to: receiver,
        });
    }

    let mut decoded_a = Vec::with_capacity(units.len() * 2);
    let mut decoded_b = Vec::with_capacity(units.len());
    match config.variant {
        Variant::Mp1 => {
            let ghz = MeasurementBasis::ghz3();
            let mut charlie_outcomes = Vec::with_capacity(units.len());
            for (unit, state) in units.iter_mut().enumerate() {
                let (outcome, p) = state.measure(&[0, 1, 3], &ghz, rng)?;
                transcript.push(Event::Measured {
                    party: Party::Charlie,
                    basis: BasisName::Ghz3,
                    unit,
                    outcome,
                    probability: round_sig15(p),
                });
                charlie_outcomes.push(outcome);
            }
            let x = MeasurementBasis::x();
            let mut trent_outcomes = Vec::with_capacity(units.len());
            for (unit, state) in units.iter_mut().enumerate() {
                let (outcome, p) = state.measure(&[2], &x, rng)?;
                transcript.push(Event::Measured {
                    party: Party::Trent,
                    basis: BasisName::X,
                    unit,
                    outcome,
                    probability: round_sig15(p),
                });
                trent_outcomes.push(outcome);
            }
            announce_outcomes(&mut transcript, Party::Trent, &trent_outcomes);
            for (&trent, &charlie) in trent_outcomes.iter().zip(&charlie_outcomes) {
                let (pair, bit) = decode_mp1(trent, charlie)?;
                decoded_a.push(pair.hi);
                decoded_a.push(pair.lo);
                decoded_b.push(bit);
            }
        }
        Variant::Mp2 => {
            let ghz = MeasurementBasis::ghz3();
            let mut trent_outcomes = Vec::with_capacity(units.len());
            for (unit, state) in units.iter_mut().enumerate() {
                let (outcome, p) = state.measure(&[0, 1, 2], &ghz, rng)?;
                transcript.push(Event::Measured {
                    party: Party::Trent,
                    basis: BasisName::Ghz3,
                    unit,
                    outcome,
                    probability: round_sig15(p),
                });
                trent_outcomes.push(outcome);
            }
            announce_outcomes(&mut transcript, Party::Trent, &trent_outcomes);
            let x = MeasurementBasis::x();
            let mut charlie_outcomes = Vec::with_capacity(units.len());
            for (unit, state) in units.iter_mut().enumerate() {
                let (outcome, p) = state.measure(&[3], &x, rng)?;
                transcript.push(Event::Measured {
                    party: Party::Charlie,
                    basis: BasisName::X,
                    unit,
                    outcome,
                    probability: round_sig15(p),
                });
                charlie_outcomes.push(outcome);
            }
            for (&trent, &charlie) in trent_outcomes.iter().zip(&charlie_outcomes) {
                let (pair, bit) = decode_mp2(trent, charlie)?;
                decoded_a.push(pair.hi);
                decoded_a.push(pair.lo);
                decoded_b.push(bit);
            }
        }
        _ => unreachable!(),
    }

    transcript.push(Event::Announced {
        party: Party::Alice,
        payload: format!(
            "check positions {:?} values {}",
            stream_a.positions,
            bits_to_string(&stream_a.check)
        ),
    });
    transcript.push(Event::Announced {
        party: Party::Bob,
        payload: format!(
            "check positions {:?} values {}",
            stream_b.positions,
            bits_to_string(&stream_b.check)
        ),
    });
    let (report_a, msg_a) =
        verify_and_decode(&decoded_a, &stream_a, config.ecc, config.error_threshold)?;
    let (report_b, msg_b) =
        verify_and_decode(&decoded_b, &stream_b, config.ecc, config.error_threshold)?;
    let report = ErrorReport {
        checked: report_a.checked + report_b.checked,
        errors: report_a.errors + report_b.errors,
        rate: (report_a.errors + report_b.errors) as f64
            / (report_a.checked + report_b.checked) as f64,
    };
    match (msg_a, msg_b) {
        (Some(a), Some(b)) => finish(&mut transcript, report, Some(a), Some(b)),
        _ => finish(&mut transcript, report, None, None),
    }
    Ok(transcript)
}

fn announce_outcomes(transcript: &mut Transcript, party: Party, outcomes: &[OutcomeLabel]) {
    let payload: Vec<&str> = outcomes.iter().map(|o| o.name()).collect();
    transcript.push(Event::Announced {
        party,
        payload: format!("outcomes {}", payload.join(",")),
    });
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::EPS;
    use crate::Error;
    use proptest::prelude::*;
    use rand_chacha::ChaCha8Rng;
    use rand_core::SeedableRng;

    fn honest_states(variant: Variant, count: usize) -> SharedStates {
        SharedStates::ghz_sequence(variant.n_qubits(), count).unwrap()
    }

    fn run(config: &ProtocolConfig, count: usize, attack: ChannelAttack) -> Transcript {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let shared = honest_states(config.variant, count);
        run_protocol(config, shared, attack, &mut rng).unwrap()
    }

    #[test]
    fn interleave_extract_identity_without_checks() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let msg = [1u8, 0, 1, 1];
        let (combined, positions) = interleave(&msg, &[], &mut rng);
        assert_eq!(combined, msg);
        assert!(positions.is_empty());
        let (m, c) = extract(&combined, &positions).unwrap();
        assert_eq!(m, msg);
        assert!(c.is_empty());
    }

    #[test]
    fn extract_constructed_example() {
        // message "01", check "1" at position 0 → combined "101"
        let (m, c) = extract(&[1, 0, 1], &[0]).unwrap();
        assert_eq!(m, alloc::vec![0, 1]);
        assert_eq!(c, alloc::vec![1]);
        assert!(extract(&[1, 0], &[5]).is_err());
        assert!(extract(&[1, 0, 1], &[1, 1]).is_err());
    }

    proptest! {
        #[test]
        fn interleave_round_trips(seed in any::<u64>(), m_len in 1usize..256, c_len in 0usize..64) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let msg = crate::rngutil::bits(&mut rng, m_len);
            let check = crate::rngutil::bits(&mut rng, c_len);
            let (combined, positions) = interleave(&msg, &check, &mut rng);
            let (m, c) = extract(&combined, &positions).unwrap();
            prop_assert_eq!(m, msg);
            prop_assert_eq!(c, check);
        }
    }

    #[test]
    fn honest_p1_decodes_exactly() {
        for seed in 0..25u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let msg = crate::rngutil::bits(&mut rng, 64);
            let mut config = ProtocolConfig::new(Variant::P1, msg.clone(), seed);
            config.ecc = EccScheme::Identity;
            let t = run(&config, 96, ChannelAttack::None);
            assert!(t.accepted, "seed {seed}");
            assert_eq!(t.decoded_bits.as_deref(), Some(bits_to_string(&msg).as_str()));
            assert_eq!(t.error_report.unwrap().errors, 0);
        }
    }

    #[test]
    fn honest_p2_decodes_exactly() {
        for seed in 0..25u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
            let msg = crate::rngutil::bits(&mut rng, 63); // odd length exercises padding
            let mut config = ProtocolConfig::new(Variant::P2, msg.clone(), seed);
            config.ecc = EccScheme::Repetition3;
            let t = run(&config, 256, ChannelAttack::None);
            assert!(t.accepted, "seed {seed}");
            assert_eq!(t.decoded_bits.as_deref(), Some(bits_to_string(&msg).as_str()));
        }
    }

    #[test]
    fn honest_multiparty_decodes_both_messages() {
        for variant in [Variant::Mp1, Variant::Mp2] {
            for seed in 0..10u64 {
                let mut rng = ChaCha8Rng::seed_from_u64(7 + seed);
                let msg_a = crate::rngutil::bits(&mut rng, 32);
                let msg_b = crate::rngutil::bits(&mut rng, 16);
                let mut config = ProtocolConfig::new(variant, msg_a.clone(), seed);
                config.message_b = msg_b.clone();
                config.ecc = EccScheme::Identity;
                let t = run(&config, 80, ChannelAttack::None);
                assert!(t.accepted, "{variant:?} seed {seed}");
                assert_eq!(t.decoded_bits.as_deref(), Some(bits_to_string(&msg_a).as_str()));
                assert_eq!(t.decoded_bits_b.as_deref(), Some(bits_to_string(&msg_b).as_str()));
            }
        }
    }

    #[test]
    fn multiparty_requires_message_b() {
        let config = ProtocolConfig::new(Variant::Mp1, alloc::vec![1, 0], 0);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let shared = honest_states(Variant::Mp1, 16);
        assert!(run_protocol(&config, shared, ChannelAttack::None, &mut rng).is_err());
    }

    #[test]
    fn insufficient_states_rejected() {
        let config = ProtocolConfig::new(Variant::P1, crate::rngutil::bits(&mut ChaCha8Rng::seed_from_u64(0), 64), 0);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let shared = honest_states(Variant::P1, 8);
        assert!(matches!(
            run_protocol(&config, shared, ChannelAttack::None, &mut rng),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn wrong_register_size_rejected() {
        let config = ProtocolConfig::new(Variant::P1, alloc::vec![1, 0], 0);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let shared = honest_states(Variant::Mp1, 16);
        assert!(run_protocol(&config, shared, ChannelAttack::None, &mut rng).is_err());
    }

    #[test]
    fn trent_publication_follows_bob_measurements_in_p1() {
        let mut config = ProtocolConfig::new(Variant::P1, alloc::vec![1, 0, 1, 1], 3);
        config.ecc = EccScheme::Identity;
        let t = run(&config, 16, ChannelAttack::None);
        let last_bob = t
            .events
            .iter()
            .rposition(|e| matches!(e, Event::Measured { party: Party::Bob, .. }))
            .unwrap();
        let first_trent = t
            .events
            .iter()
            .position(|e| matches!(e, Event::Measured { party: Party::Trent, .. }))
            .unwrap();
        assert!(last_bob < first_trent);
    }

    #[test]
    fn eve_intercept_aborts_with_high_probability() {
        // per-check-pair error probability 1/2; a handful of check bits
        // makes a silent run vanishingly unlikely
        let mut aborted = 0usize;
        let trials = 200usize;
        for seed in 0..trials as u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let msg = crate::rngutil::bits(&mut rng, 32);
            let mut config = ProtocolConfig::new(Variant::P1, msg, seed);
            config.ecc = EccScheme::Identity;
            config.check_count = Some(16);
            let t = run(
                &config,
                64,
                ChannelAttack::EveIntercept { basis: BasisName::Z },
            );
            if !t.accepted {
                aborted += 1;
            }
        }
        assert!(aborted as f64 / trials as f64 >= 0.99, "aborted {aborted}/{trials}");
    }

    #[test]
    fn fixed_basis_intercept_disturbs_some_encoding() {
        // any fixed-basis intercept induces per-check error ≥ 1/4 for at
        // least one encoding, enumerated via outcome distributions
        use crate::densecode::{decode_p1, encode_pair, BitPair};
        use crate::qcore::{GhzLabel, Statevector};
        for basis in [MeasurementBasis::z(), MeasurementBasis::x()] {
            let mut worst = 0.0f64;
            for bits in BitPair::ALL {
                let mut state = Statevector::ghz(GhzLabel::PPlus, 3).unwrap();
                state.apply_gate(encode_pair(bits), 0).unwrap();
                let mut err = 0.0;
                for (_, p_eve, tapped) in state.branches(&[0], &basis).unwrap() {
                    for (bob, p_bob, after) in
                        tapped.branches(&[0, 2], &MeasurementBasis::bell()).unwrap()
                    {
                        for (trent, p_t, _) in
                            after.branches(&[1], &MeasurementBasis::x()).unwrap()
                        {
                            if decode_p1(trent, bob).unwrap() != bits {
                                err += p_eve * p_bob * p_t;
                            }
                        }
                    }
                }
                worst = worst.max(err);
            }
            assert!(worst >= 0.25 - EPS, "{:?}: worst {worst}", basis.name());
        }
    }

    #[test]
    fn transcript_replays_identically() {
        let mut config = ProtocolConfig::new(Variant::P1, alloc::vec![1, 0, 0, 1, 1, 0, 1, 0], 99);
        config.ecc = EccScheme::Hamming74;
        let a = run(&config, 64, ChannelAttack::None);
        let b = run(&config, 64, ChannelAttack::None);
        let ja = serde_json::to_string(&a).unwrap();
        let jb = serde_json::to_string(&b).unwrap();
        assert_eq!(ja, jb);
    }

    #[test]
    fn round_sig15_behaves() {
        assert_eq!(round_sig15(0.0), 0.0);
        assert_eq!(round_sig15(0.5), 0.5);
        assert_eq!(round_sig15(1.0), 1.0);
        let x = 0.123456789012345678;
        let r = round_sig15(x);
        assert!((r - x).abs() < 1e-15);
    }

    #[test]
    fn hex_rendering() {
        assert_eq!(bits_to_hex(&[0, 1, 0, 0, 1, 1, 1, 1]).as_deref(), Some("4f"));
        assert_eq!(bits_to_hex(&[0, 1]), None);
        assert_eq!(bits_to_string(&[1, 0, 1]), "101");
    }
}
