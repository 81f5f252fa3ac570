//! Authentication handshake: identity registration with Trent, hash-derived
//! per-triplet keys, Hadamard masking of the distributed GHZ particles, and
//! the correlation check that gates entry to message transmission.
//!
//! The eavesdropping check measures every qubit of each sampled state in the
//! Z basis and passes iff all outcomes agree, the minimal GHZ correlation
//! test. It detects a single mask/unmask key mismatch with probability 1/2
//! and a Z-basis intercept on a Hadamard-masked particle with probability
//! 1/2 (a Z intercept on an unmasked particle commutes with the check and
//! goes unseen, which is what the masking is for).

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use rand_core::RngCore;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::invalid_arg;
use crate::qcore::{GhzLabel, MeasurementBasis, OutcomeLabel, PauliCode, Statevector};
use crate::rngutil;
use crate::{Error, Result};

/// Hash functions a user may register. Only SHA-256 for now; the protocol
/// just needs any fixed one-way function.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum HashId {
    #[serde(rename = "sha-256")]
    Sha256,
}

/// A registered identity: secret id bits, hash function, and the counter of
/// calls on the hash (bumped after every completed session so keys are never
/// reused).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Identity {
    pub user_id: String,
    /// Secret identity bytes; at least 128 bits.
    pub id_bits: Vec<u8>,
    pub hash: HashId,
    pub counter: u64,
}

impl Identity {
    pub fn new(user_id: &str, id_bits: Vec<u8>, hash: HashId) -> Result<Identity> {
        if id_bits.len() < 16 {
            return Err(invalid_arg!(
                "identity bits must be at least 128 bits, got {}",
                id_bits.len() * 8
            ));
        }
        Ok(Identity {
            user_id: String::from(user_id),
            id_bits,
            hash,
            counter: 0,
        })
    }
}

/// Per-session authentication key: one mask bit per shared state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AuthKey {
    bits: Vec<u8>,
}

impl AuthKey {
    pub fn from_bits(bits: Vec<u8>) -> AuthKey {
        AuthKey { bits }
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }
}

/// h(ID, c) expanded to `n` bits by hashing (ID, c, block-index) and
/// concatenating blocks.
pub fn derive_key(identity: &Identity, counter: u64, n: usize) -> AuthKey {
    let HashId::Sha256 = identity.hash;
    let mut bits = Vec::with_capacity(n);
    let mut block: u64 = 0;
    while bits.len() < n {
        let mut hasher = Sha256::new();
        hasher.update(&identity.id_bits);
        hasher.update(counter.to_be_bytes());
        hasher.update(block.to_be_bytes());
        let digest = hasher.finalize();
        for byte in digest {
            for shift in (0..8).rev() {
                if bits.len() == n {
                    break;
                }
                bits.push(byte >> shift & 1);
            }
        }
        block += 1;
    }
    AuthKey { bits }
}

/// Trent's identity registry.
#[derive(Clone, Debug, Default)]
pub struct Registry {
    users: BTreeMap<String, Identity>,
}

impl Registry {
    pub fn new() -> Registry {
        Registry::default()
    }

    /// Step (a): store a user's secret identity and hash function.
    pub fn register(&mut self, identity: Identity) -> Result<()> {
        if self.users.contains_key(&identity.user_id) {
            return Err(Error::AlreadyRegistered(identity.user_id));
        }
        self.users.insert(identity.user_id.clone(), identity);
        Ok(())
    }

    pub fn get(&self, user_id: &str) -> Result<&Identity> {
        self.users
            .get(user_id)
            .ok_or_else(|| Error::UnknownUser(String::from(user_id)))
    }

    /// The user's key for the current counter value.
    pub fn auth_key(&self, user_id: &str, n: usize) -> Result<AuthKey> {
        let identity = self.get(user_id)?;
        Ok(derive_key(identity, identity.counter, n))
    }

    /// Advance the user's hash call counter after a completed session.
    pub fn bump_counter(&mut self, user_id: &str) -> Result<()> {
        let identity = self
            .users
            .get_mut(user_id)
            .ok_or_else(|| Error::UnknownUser(String::from(user_id)))?;
        identity.counter += 1;
        Ok(())
    }
}

/// A sequence of jointly held entangled registers, one per protocol unit.
/// For the three-party protocols each state is the |ATB⟩ triplet of Eq-style
/// ordering A=0, T=1, B=2; the four-party generalization uses |ABTC⟩ with
/// A=0, B=1, T=2, C=3.
#[derive(Clone, Debug)]
pub struct SharedStates {
    n_qubits: usize,
    states: Vec<Statevector>,
}

impl SharedStates {
    /// Step (b): a fresh sequence of `count` GHZ P+ states.
    pub fn ghz_sequence(n_qubits: usize, count: usize) -> Result<SharedStates> {
        let template = Statevector::ghz(GhzLabel::PPlus, n_qubits)?;
        Ok(SharedStates {
            n_qubits,
            states: alloc::vec![template; count],
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[Statevector] {
        &self.states
    }

    pub fn states_mut(&mut self) -> &mut [Statevector] {
        &mut self.states
    }

    pub fn take_states(self) -> Vec<Statevector> {
        self.states
    }
}

/// Per-state key-controlled Hadamard: key bit 0 leaves the state alone, key
/// bit 1 applies H to `qubit`. Self-inverse, so unmasking is the same call.
pub fn mask(states: &mut SharedStates, key: &AuthKey, qubit: usize) -> Result<()> {
    if key.len() != states.len() {
        return Err(invalid_arg!(
            "key length {} does not match {} shared states",
            key.len(),
            states.len()
        ));
    }
    for (state, &bit) in states.states_mut().iter_mut().zip(key.bits()) {
        if bit == 1 {
            state.apply_gate(PauliCode::H, qubit)?;
        }
    }
    Ok(())
}

/// Step (e): users reverse Trent's masking with their own keys.
pub fn unmask(states: &mut SharedStates, key: &AuthKey, qubit: usize) -> Result<()> {
    mask(states, key, qubit)
}

/// Result of the step-(f) eavesdropping check.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ErrorReport {
    pub checked: usize,
    pub errors: usize,
    pub rate: f64,
}

/// Step (f): a random ⌈fraction·N⌉-subset of states is consumed. All
/// parties Z-measure their qubit of each sampled state; an error is counted
/// unless every outcome agrees. Checked states are removed.
pub fn check_eavesdrop<R: RngCore + ?Sized>(
    states: &mut SharedStates,
    check_fraction: f64,
    rng: &mut R,
) -> Result<ErrorReport> {
    if states.is_empty() {
        return Err(invalid_arg!("no shared states to check"));
    }
    if !(check_fraction > 0.0 && check_fraction < 1.0) {
        return Err(invalid_arg!(
            "check fraction must be in (0, 1), got {check_fraction}"
        ));
    }
    let count = libm::ceil(check_fraction * states.len() as f64) as usize;
    let chosen = rngutil::choose_indices(rng, states.len(), count);
    let z = MeasurementBasis::z();
    let mut errors = 0usize;
    // walk chosen indices back-to-front so swap_remove keeps the rest stable
    let mut kept = Vec::with_capacity(states.len() - count);
    let mut chosen_iter = chosen.iter().peekable();
    for (i, mut state) in core::mem::take(&mut states.states).into_iter().enumerate() {
        if chosen_iter.peek() == Some(&&i) {
            chosen_iter.next();
            let mut outcomes = Vec::with_capacity(states.n_qubits);
            for q in 0..states.n_qubits {
                let (label, _) = state.measure(&[q], &z, rng)?;
                outcomes.push(label);
            }
            let all_equal = outcomes.windows(2).all(|w| w[0] == w[1]);
            if !all_equal {
                errors += 1;
            }
        } else {
            kept.push(state);
        }
    }
    states.states = kept;
    Ok(ErrorReport {
        checked: count,
        errors,
        rate: errors as f64 / count as f64,
    })
}

/// Exact probability that one state passes the all-equal Z check.
pub fn check_pass_probability(state: &Statevector) -> f64 {
    let dim = state.amps().len();
    state.amps()[0].norm_sqr() + state.amps()[dim - 1].norm_sqr()
}

/// A user participating in a session, with the qubit index they hold.
#[derive(Clone, Copy, Debug)]
pub struct AuthParty<'a> {
    pub user_id: &'a str,
    pub qubit: usize,
}

/// What, if anything, goes wrong between Trent's masking and the users'
/// unmasking.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AuthAdversary {
    None,
    /// Eve Z-measures the in-transit qubit of every state and resends the
    /// collapsed state.
    InterceptZ { qubit: usize },
    /// The holder of `qubit` is an impersonator who does not know the real
    /// identity: they unmask with a uniformly random key.
    Impersonate { qubit: usize },
}

/// Outcome of a full authentication session.
#[derive(Clone, Debug)]
pub enum AuthResult {
    /// Channel and counterparts check out; the surviving states are ready
    /// for message transmission.
    Accepted {
        states: SharedStates,
        report: ErrorReport,
    },
    /// Error rate exceeded the threshold; the session is aborted.
    Rejected { report: ErrorReport },
}

/// Steps (b)–(f) in order: generate the GHZ sequence, mask each party's
/// qubit with their key, distribute (the adversary tap sits here), unmask,
/// and run the eavesdropping check against `threshold`.
///
/// Counters of all participating users are bumped once the session
/// completes, accepted or not, so keys are never reused.
#[allow(clippy::too_many_arguments)]
pub fn run_authentication<R: RngCore + ?Sized>(
    registry: &mut Registry,
    parties: &[AuthParty<'_>],
    n_qubits: usize,
    count: usize,
    check_fraction: f64,
    threshold: f64,
    adversary: AuthAdversary,
    rng: &mut R,
) -> Result<AuthResult> {
    if count == 0 {
        return Err(invalid_arg!("session needs at least one GHZ state"));
    }
    let keys: Vec<AuthKey> = parties
        .iter()
        .map(|p| registry.auth_key(p.user_id, count))
        .collect::<Result<_>>()?;

    let mut states = SharedStates::ghz_sequence(n_qubits, count)?;

    // Trent masks before sending
    for (party, key) in parties.iter().zip(&keys) {
        mask(&mut states, key, party.qubit)?;
    }

    // distribution; adversary tap between mask and unmask
    if let AuthAdversary::InterceptZ { qubit } = adversary {
        let z = MeasurementBasis::z();
        for state in states.states_mut() {
            state.measure(&[qubit], &z, rng)?;
        }
    }

    // users reverse the masking
    for (party, key) in parties.iter().zip(&keys) {
        let wrong_key;
        let key = match adversary {
            AuthAdversary::Impersonate { qubit } if qubit == party.qubit => {
                wrong_key = AuthKey::from_bits(rngutil::bits(rng, count));
                &wrong_key
            }
            _ => key,
        };
        unmask(&mut states, key, party.qubit)?;
    }

    let report = check_eavesdrop(&mut states, check_fraction, rng)?;

    for party in parties {
        registry.bump_counter(party.user_id)?;
    }

    if report.rate <= threshold {
        Ok(AuthResult::Accepted { states, report })
    } else {
        Ok(AuthResult::Rejected { report })
    }
}

/// Z-basis outcome helper for tests and diagnostics.
pub fn z_bit(label: OutcomeLabel) -> Option<u8> {
    match label {
        OutcomeLabel::Z(b) => Some(b),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::EPS;
    use rand_chacha::ChaCha8Rng;
    use rand_core::SeedableRng;

    fn identity(name: &str, seed: u8) -> Identity {
        Identity::new(name, alloc::vec![seed; 16], HashId::Sha256).unwrap()
    }

    #[test]
    fn register_and_duplicate() {
        let mut reg = Registry::new();
        reg.register(identity("alice", 1)).unwrap();
        assert!(reg.auth_key("alice", 8).is_ok());
        assert!(matches!(
            reg.register(identity("alice", 2)),
            Err(Error::AlreadyRegistered(_))
        ));
        assert!(matches!(
            reg.auth_key("mallory", 8),
            Err(Error::UnknownUser(_))
        ));
    }

    #[test]
    fn identity_requires_128_bits() {
        assert!(Identity::new("short", alloc::vec![0; 15], HashId::Sha256).is_err());
    }

    #[test]
    fn key_derivation_is_deterministic() {
        let id = identity("alice", 3);
        let a = derive_key(&id, 5, 300);
        let b = derive_key(&id, 5, 300);
        assert_eq!(a, b);
        assert_eq!(a.len(), 300);
        assert!(derive_key(&id, 5, 0).is_empty());
    }

    #[test]
    fn counter_change_flips_about_half_the_bits() {
        // over 100 identities, hamming(key_c, key_{c+1}) within 3 sigma of N/2
        let n = 256usize;
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut total_diff = 0usize;
        let idents = 100usize;
        for _ in 0..idents {
            let mut bytes = alloc::vec![0u8; 16];
            for b in bytes.iter_mut() {
                *b = (rng.next_u64() & 0xff) as u8;
            }
            let id = Identity::new("u", bytes, HashId::Sha256).unwrap();
            let a = derive_key(&id, 0, n);
            let b = derive_key(&id, 1, n);
            total_diff += a
                .bits()
                .iter()
                .zip(b.bits())
                .filter(|(x, y)| x != y)
                .count();
        }
        let trials = (idents * n) as f64;
        let freq = total_diff as f64 / trials;
        let sigma = libm::sqrt(0.25 / trials);
        assert!((freq - 0.5).abs() <= 3.0 * sigma, "flip rate {freq}");
    }

    #[test]
    fn mask_examples() {
        // all-zero key leaves states alone
        let mut states = SharedStates::ghz_sequence(3, 4).unwrap();
        let zero = AuthKey::from_bits(alloc::vec![0; 4]);
        mask(&mut states, &zero, 0).unwrap();
        let p = Statevector::ghz(GhzLabel::PPlus, 3).unwrap();
        for s in states.states() {
            assert!((s.fidelity(&p).unwrap() - 1.0).abs() < EPS);
        }

        // key bit 1 on qubit A of P+: (|000⟩+|100⟩+|011⟩−|111⟩)/2
        let mut states = SharedStates::ghz_sequence(3, 1).unwrap();
        let one = AuthKey::from_bits(alloc::vec![1]);
        mask(&mut states, &one, 0).unwrap();
        let a = states.states()[0].amps();
        assert!((a[0b000].re - 0.5).abs() < EPS);
        assert!((a[0b100].re - 0.5).abs() < EPS);
        assert!((a[0b011].re - 0.5).abs() < EPS);
        assert!((a[0b111].re + 0.5).abs() < EPS);

        // masking twice is the identity
        mask(&mut states, &one, 0).unwrap();
        assert!((states.states()[0].fidelity(&p).unwrap() - 1.0).abs() < EPS);

        // length mismatch
        assert!(mask(&mut states, &zero, 0).is_err());
    }

    #[test]
    fn mask_unmask_round_trip_any_key() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let p = Statevector::ghz(GhzLabel::PPlus, 3).unwrap();
        for _ in 0..20 {
            let n = 1 + rngutil::below(&mut rng, 16);
            let key = AuthKey::from_bits(rngutil::bits(&mut rng, n));
            let mut states = SharedStates::ghz_sequence(3, n).unwrap();
            mask(&mut states, &key, 0).unwrap();
            unmask(&mut states, &key, 0).unwrap();
            for s in states.states() {
                assert!((s.fidelity(&p).unwrap() - 1.0).abs() < EPS);
            }
        }
    }

    #[test]
    fn single_key_mismatch_fidelity_half() {
        let mut states = SharedStates::ghz_sequence(3, 1).unwrap();
        let one = AuthKey::from_bits(alloc::vec![1]);
        let zero = AuthKey::from_bits(alloc::vec![0]);
        mask(&mut states, &one, 0).unwrap();
        unmask(&mut states, &zero, 0).unwrap();
        // H_A|P+⟩ is orthogonal to |P+⟩ (the ⟨000| and ⟨111| overlaps cancel)
        let p = Statevector::ghz(GhzLabel::PPlus, 3).unwrap();
        assert!(states.states()[0].fidelity(&p).unwrap() < EPS);
        // the Z check catches the mismatch with probability exactly 1/2
        assert!((check_pass_probability(&states.states()[0]) - 0.5).abs() < EPS);
    }

    #[test]
    fn honest_check_has_zero_errors() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for seed in 0..20u64 {
            let mut rng2 = ChaCha8Rng::seed_from_u64(seed);
            let mut states = SharedStates::ghz_sequence(3, 32).unwrap();
            let report = check_eavesdrop(&mut states, 0.25, &mut rng2).unwrap();
            assert_eq!(report.checked, 8);
            assert_eq!(report.errors, 0);
            assert_eq!(report.rate, 0.0);
            assert_eq!(states.len(), 24);
        }
        let mut empty = SharedStates::ghz_sequence(3, 1).unwrap();
        assert!(check_eavesdrop(&mut empty, 0.0, &mut rng).is_err());
        empty.states.clear();
        assert!(check_eavesdrop(&mut empty, 0.25, &mut rng).is_err());
    }

    #[test]
    fn key_mismatch_detected_half_the_time() {
        // empirical frequency over 1e4 trials within 3 sigma of 1/2
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let trials = 10_000usize;
        let mut errors = 0usize;
        for _ in 0..trials {
            let mut states = SharedStates::ghz_sequence(3, 1).unwrap();
            let one = AuthKey::from_bits(alloc::vec![1]);
            mask(&mut states, &one, 0).unwrap();
            // user unmasks with the wrong bit (no-op), then the check runs
            let report = check_eavesdrop(&mut states, 0.5, &mut rng).unwrap();
            errors += report.errors;
        }
        let freq = errors as f64 / trials as f64;
        let sigma = libm::sqrt(0.25 / trials as f64);
        assert!((freq - 0.5).abs() <= 3.0 * sigma, "error rate {freq}");
    }

    #[test]
    fn intercept_detection_depends_on_masking() {
        // Z-intercept on a Hadamard-masked qubit: caught with p = 1/2;
        // on an unmasked qubit the intercept commutes with the check.
        let z = MeasurementBasis::z();
        for (key_bit, expected) in [(1u8, 0.5f64), (0u8, 1.0)] {
            let mut pass = 0.0;
            let key = AuthKey::from_bits(alloc::vec![key_bit]);
            let mut states = SharedStates::ghz_sequence(3, 1).unwrap();
            mask(&mut states, &key, 0).unwrap();
            for (_, p_eve, mut collapsed) in states.states()[0].branches(&[0], &z).unwrap() {
                // the user unmasks their branch with the honest key
                if key_bit == 1 {
                    collapsed.apply_gate(PauliCode::H, 0).unwrap();
                }
                pass += p_eve * check_pass_probability(&collapsed);
            }
            assert!((pass - expected).abs() < EPS, "key bit {key_bit}: {pass}");
        }
    }

    #[test]
    fn honest_run_accepts_with_zero_rate() {
        let mut reg = Registry::new();
        reg.register(identity("alice", 1)).unwrap();
        reg.register(identity("bob", 2)).unwrap();
        let parties = [
            AuthParty { user_id: "alice", qubit: 0 },
            AuthParty { user_id: "bob", qubit: 2 },
        ];
        for seed in 0..20u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let result = run_authentication(
                &mut reg,
                &parties,
                3,
                64,
                0.25,
                0.05,
                AuthAdversary::None,
                &mut rng,
            )
            .unwrap();
            match result {
                AuthResult::Accepted { states, report } => {
                    assert_eq!(states.len(), 48);
                    assert_eq!(report.errors, 0);
                }
                AuthResult::Rejected { .. } => panic!("honest run rejected"),
            }
        }
    }

    #[test]
    fn unknown_user_and_zero_count() {
        let mut reg = Registry::new();
        reg.register(identity("alice", 1)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let parties = [
            AuthParty { user_id: "alice", qubit: 0 },
            AuthParty { user_id: "bob", qubit: 2 },
        ];
        assert!(matches!(
            run_authentication(&mut reg, &parties, 3, 8, 0.25, 0.05, AuthAdversary::None, &mut rng),
            Err(Error::UnknownUser(_))
        ));
        reg.register(identity("bob", 2)).unwrap();
        assert!(run_authentication(
            &mut reg,
            &parties,
            3,
            0,
            0.25,
            0.05,
            AuthAdversary::None,
            &mut rng
        )
        .is_err());
    }

    #[test]
    fn impersonator_rejected() {
        // 16 checked triplets (N = 64, fraction 0.25), epsilon 0.05:
        // per-checked-triplet error probability is 1/4, so the reject
        // probability is 1 - (3/4)^16 ~ 0.99
        let mut rejected = 0usize;
        let trials = 400usize;
        for seed in 0..trials as u64 {
            let mut reg = Registry::new();
            reg.register(identity("alice", 1)).unwrap();
            reg.register(identity("bob", 2)).unwrap();
            let parties = [
                AuthParty { user_id: "alice", qubit: 0 },
                AuthParty { user_id: "bob", qubit: 2 },
            ];
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let result = run_authentication(
                &mut reg,
                &parties,
                3,
                64,
                0.25,
                0.05,
                AuthAdversary::Impersonate { qubit: 0 },
                &mut rng,
            )
            .unwrap();
            if matches!(result, AuthResult::Rejected { .. }) {
                rejected += 1;
            }
        }
        assert!(
            rejected as f64 / trials as f64 >= 0.98,
            "rejected {rejected}/{trials}"
        );
    }

    #[test]
    fn counters_never_reuse_keys() {
        let mut reg = Registry::new();
        reg.register(identity("alice", 1)).unwrap();
        reg.register(identity("bob", 2)).unwrap();
        let parties = [
            AuthParty { user_id: "alice", qubit: 0 },
            AuthParty { user_id: "bob", qubit: 2 },
        ];
        let key_before = reg.auth_key("alice", 64).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..2 {
            run_authentication(
                &mut reg,
                &parties,
                3,
                64,
                0.25,
                0.05,
                AuthAdversary::None,
                &mut rng,
            )
            .unwrap();
        }
        let key_after = reg.auth_key("alice", 64).unwrap();
        assert_ne!(key_before, key_after);
        assert_eq!(reg.get("alice").unwrap().counter, 2);
    }
}
