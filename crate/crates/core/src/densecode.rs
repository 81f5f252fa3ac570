//! Dense-coding codec: the 2-bit ↔ Pauli mapping, Bob's single-bit mapping
//! in the multiparty protocols, and the four decode tables as total
//! functions.
//!
//! The tables are stored as literal data and cross-validated against
//! exhaustive simulation in the tests; a discrepancy fails loudly instead of
//! being silently "corrected".
//!
//! Known documentation discrepancies, resolved by direct amplitude
//! computation (the product decompositions are exhaustively cross-checked in
//! the tests and the acceptance suite):
//!
//! * The worked prose example for the second protocol pairs the outcome
//!   (phi-, -) with the message 11; the algebra (and the printed table
//!   itself) give (phi-, +) → 11 and (phi-, -) → 00.
//! * The commonly printed first-protocol table swaps the two "-" rows for
//!   phi+/phi-: the I encoding leaves branches (+, phi+) and (-, phi-), and
//!   the sigma_z encoding (-, phi+), so (-, phi-) decodes to 00, not 11.
//!   [`TABLE_P1`] stores the algebra-consistent rows. The same swap appears
//!   in the P and R "-" rows of the first multiparty table ([`TABLE_MP1`]).
//! * One sign in the published psi-decomposition of the iσ_y encoding is a
//!   typo: expanding (|011⟩−|100⟩)/√2 gives (ψ−⊗+ − ψ+⊗−)/√2, with a
//!   relative minus. Branch probabilities are unaffected.

use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex64;
use serde::Serialize;

use crate::qcore::{BellLabel, GhzLabel, OutcomeLabel, PauliCode, Sign, Statevector};
use crate::{Error, Result};

/// Two message bits in paper order: "01" has `hi = 0`, `lo = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BitPair {
    pub hi: u8,
    pub lo: u8,
}

impl BitPair {
    pub const ALL: [BitPair; 4] = [
        BitPair { hi: 0, lo: 0 },
        BitPair { hi: 0, lo: 1 },
        BitPair { hi: 1, lo: 0 },
        BitPair { hi: 1, lo: 1 },
    ];

    pub fn new(hi: u8, lo: u8) -> BitPair {
        debug_assert!(hi <= 1 && lo <= 1);
        BitPair { hi, lo }
    }
}

impl fmt::Display for BitPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.hi, self.lo)
    }
}

impl Serialize for BitPair {
    fn serialize<S: serde::Serializer>(&self, s: S) -> core::result::Result<S::Ok, S::Error> {
        s.serialize_str(match (self.hi, self.lo) {
            (0, 0) => "00",
            (0, 1) => "01",
            (1, 0) => "10",
            _ => "11",
        })
    }
}

/// Alice's dense encoding: 00 → I, 01 → σ_x, 10 → iσ_y, 11 → σ_z.
pub fn encode_pair(bits: BitPair) -> PauliCode {
    match (bits.hi, bits.lo) {
        (0, 0) => PauliCode::I,
        (0, 1) => PauliCode::X,
        (1, 0) => PauliCode::IY,
        _ => PauliCode::Z,
    }
}

/// Bob's single-bit encoding in the multiparty protocols: 0 → I, 1 → σ_x.
pub fn encode_single(bit: u8) -> PauliCode {
    if bit == 0 {
        PauliCode::I
    } else {
        PauliCode::X
    }
}

/// The 3-qubit ATB state after Alice encodes `bits` on a fresh P+ triplet,
/// built from the Bell ⊗ X product decomposition rather than by gate
/// application (the gate route is the thing this cross-checks).
pub fn expected_joint_state(bits: BitPair) -> Statevector {
    // (bell_AB ⊗ x_T, coefficient) pairs; qubit order A=0, T=1, B=2
    let terms: [(BellLabel, Sign, f64); 2] = match (bits.hi, bits.lo) {
        (0, 0) => [(BellLabel::PhiPlus, Sign::Plus, 1.0), (BellLabel::PhiMinus, Sign::Minus, 1.0)],
        (0, 1) => [(BellLabel::PsiPlus, Sign::Plus, 1.0), (BellLabel::PsiMinus, Sign::Minus, -1.0)],
        (1, 0) => [(BellLabel::PsiMinus, Sign::Plus, 1.0), (BellLabel::PsiPlus, Sign::Minus, -1.0)],
        _ => [(BellLabel::PhiMinus, Sign::Plus, 1.0), (BellLabel::PhiPlus, Sign::Minus, 1.0)],
    };
    let inv_sqrt2 = core::f64::consts::FRAC_1_SQRT_2;
    let mut amps = alloc::vec![Complex64::new(0.0, 0.0); 8];
    for (bell, x_sign, coeff) in terms {
        let bell_amps = Statevector::bell(bell);
        let x_amp = |bit: usize| {
            if bit == 0 || x_sign == Sign::Plus {
                inv_sqrt2
            } else {
                -inv_sqrt2
            }
        };
        for ab in 0..4usize {
            for t in 0..2usize {
                // A is bit 2 of the index, T bit 1, B bit 0
                let idx = ((ab & 0b10) << 1) | (t << 1) | (ab & 0b01);
                amps[idx] += coeff * inv_sqrt2 * bell_amps.amps()[ab] * x_amp(t);
            }
        }
    }
    Statevector::from_amps(3, amps).expect("decomposition is normalized")
}

/// Table row for the first protocol: (Trent's X publication, Bob's Bell
/// measurement) → Alice's bits.
pub const TABLE_P1: [(Sign, BellLabel, BitPair); 8] = [
    (Sign::Plus, BellLabel::PhiPlus, BitPair { hi: 0, lo: 0 }),
    (Sign::Plus, BellLabel::PsiPlus, BitPair { hi: 0, lo: 1 }),
    (Sign::Plus, BellLabel::PsiMinus, BitPair { hi: 1, lo: 0 }),
    (Sign::Plus, BellLabel::PhiMinus, BitPair { hi: 1, lo: 1 }),
    (Sign::Minus, BellLabel::PhiMinus, BitPair { hi: 0, lo: 0 }),
    (Sign::Minus, BellLabel::PsiMinus, BitPair { hi: 0, lo: 1 }),
    (Sign::Minus, BellLabel::PsiPlus, BitPair { hi: 1, lo: 0 }),
    (Sign::Minus, BellLabel::PhiPlus, BitPair { hi: 1, lo: 1 }),
];

/// Table row for the second protocol: (Trent's Bell announcement, Bob's X
/// measurement) → Alice's bits.
pub const TABLE_P2: [(BellLabel, Sign, BitPair); 8] = [
    (BellLabel::PhiPlus, Sign::Plus, BitPair { hi: 0, lo: 0 }),
    (BellLabel::PhiPlus, Sign::Minus, BitPair { hi: 1, lo: 1 }),
    (BellLabel::PsiPlus, Sign::Plus, BitPair { hi: 0, lo: 1 }),
    (BellLabel::PsiPlus, Sign::Minus, BitPair { hi: 1, lo: 0 }),
    (BellLabel::PhiMinus, Sign::Plus, BitPair { hi: 1, lo: 1 }),
    (BellLabel::PhiMinus, Sign::Minus, BitPair { hi: 0, lo: 0 }),
    (BellLabel::PsiMinus, Sign::Plus, BitPair { hi: 1, lo: 0 }),
    (BellLabel::PsiMinus, Sign::Minus, BitPair { hi: 0, lo: 1 }),
];

/// Table row for the first multiparty protocol: (Trent's X publication,
/// Charlie's GHZ measurement on ABC) → (Alice's bits, Bob's bit).
pub const TABLE_MP1: [(Sign, GhzLabel, BitPair, u8); 16] = [
    (Sign::Plus, GhzLabel::PPlus, BitPair { hi: 0, lo: 0 }, 0),
    (Sign::Plus, GhzLabel::SPlus, BitPair { hi: 0, lo: 1 }, 0),
    (Sign::Plus, GhzLabel::SMinus, BitPair { hi: 1, lo: 0 }, 0),
    (Sign::Plus, GhzLabel::PMinus, BitPair { hi: 1, lo: 1 }, 0),
    (Sign::Minus, GhzLabel::PMinus, BitPair { hi: 0, lo: 0 }, 0),
    (Sign::Minus, GhzLabel::SMinus, BitPair { hi: 0, lo: 1 }, 0),
    (Sign::Minus, GhzLabel::SPlus, BitPair { hi: 1, lo: 0 }, 0),
    (Sign::Minus, GhzLabel::PPlus, BitPair { hi: 1, lo: 1 }, 0),
    (Sign::Plus, GhzLabel::RPlus, BitPair { hi: 0, lo: 0 }, 1),
    (Sign::Plus, GhzLabel::QPlus, BitPair { hi: 0, lo: 1 }, 1),
    (Sign::Plus, GhzLabel::QMinus, BitPair { hi: 1, lo: 0 }, 1),
    (Sign::Plus, GhzLabel::RMinus, BitPair { hi: 1, lo: 1 }, 1),
    (Sign::Minus, GhzLabel::RMinus, BitPair { hi: 0, lo: 0 }, 1),
    (Sign::Minus, GhzLabel::QMinus, BitPair { hi: 0, lo: 1 }, 1),
    (Sign::Minus, GhzLabel::QPlus, BitPair { hi: 1, lo: 0 }, 1),
    (Sign::Minus, GhzLabel::RPlus, BitPair { hi: 1, lo: 1 }, 1),
];

/// Table row for the second multiparty protocol: (Trent's GHZ announcement
/// on ABT, Charlie's X measurement) → (Alice's bits, Bob's bit).
pub const TABLE_MP2: [(GhzLabel, Sign, BitPair, u8); 16] = [
    (GhzLabel::PPlus, Sign::Plus, BitPair { hi: 0, lo: 0 }, 0),
    (GhzLabel::PPlus, Sign::Minus, BitPair { hi: 1, lo: 1 }, 0),
    (GhzLabel::SPlus, Sign::Plus, BitPair { hi: 0, lo: 1 }, 0),
    (GhzLabel::SPlus, Sign::Minus, BitPair { hi: 1, lo: 0 }, 0),
    (GhzLabel::PMinus, Sign::Plus, BitPair { hi: 1, lo: 1 }, 0),
    (GhzLabel::PMinus, Sign::Minus, BitPair { hi: 0, lo: 0 }, 0),
    (GhzLabel::SMinus, Sign::Plus, BitPair { hi: 1, lo: 0 }, 0),
    (GhzLabel::SMinus, Sign::Minus, BitPair { hi: 0, lo: 1 }, 0),
    (GhzLabel::RPlus, Sign::Plus, BitPair { hi: 0, lo: 0 }, 1),
    (GhzLabel::RPlus, Sign::Minus, BitPair { hi: 1, lo: 1 }, 1),
    (GhzLabel::QPlus, Sign::Plus, BitPair { hi: 0, lo: 1 }, 1),
    (GhzLabel::QPlus, Sign::Minus, BitPair { hi: 1, lo: 0 }, 1),
    (GhzLabel::QMinus, Sign::Plus, BitPair { hi: 1, lo: 0 }, 1),
    (GhzLabel::QMinus, Sign::Minus, BitPair { hi: 0, lo: 1 }, 1),
    (GhzLabel::RMinus, Sign::Plus, BitPair { hi: 1, lo: 1 }, 1),
    (GhzLabel::RMinus, Sign::Minus, BitPair { hi: 0, lo: 0 }, 1),
];

fn expect_x(label: OutcomeLabel) -> Result<Sign> {
    match label {
        OutcomeLabel::X(s) => Ok(s),
        other => Err(Error::InvalidArgument(alloc::format!(
            "expected an X-basis outcome, got {other}"
        ))),
    }
}

fn expect_bell(label: OutcomeLabel) -> Result<BellLabel> {
    match label {
        OutcomeLabel::Bell(b) => Ok(b),
        other => Err(Error::InvalidArgument(alloc::format!(
            "expected a Bell outcome, got {other}"
        ))),
    }
}

fn expect_ghz(label: OutcomeLabel) -> Result<GhzLabel> {
    match label {
        OutcomeLabel::Ghz(g) => Ok(g),
        other => Err(Error::InvalidArgument(alloc::format!(
            "expected a GHZ outcome, got {other}"
        ))),
    }
}

/// Protocol 1 decoding (Trent publishes X, Bob measures Bell on AB).
pub fn decode_p1(trent: OutcomeLabel, bob: OutcomeLabel) -> Result<BitPair> {
    let (t, b) = (expect_x(trent)?, expect_bell(bob)?);
    Ok(TABLE_P1
        .iter()
        .find(|(rt, rb, _)| *rt == t && *rb == b)
        .expect("table is total over the 8 combinations")
        .2)
}

/// Protocol 2 decoding (Trent announces Bell on AT, Bob measures X).
pub fn decode_p2(trent: OutcomeLabel, bob: OutcomeLabel) -> Result<BitPair> {
    let (t, b) = (expect_bell(trent)?, expect_x(bob)?);
    Ok(TABLE_P2
        .iter()
        .find(|(rt, rb, _)| *rt == t && *rb == b)
        .expect("table is total over the 8 combinations")
        .2)
}

/// First multiparty decoding (Trent publishes X, Charlie measures GHZ on
/// ABC) → (Alice's bits, Bob's bit).
pub fn decode_mp1(trent: OutcomeLabel, charlie: OutcomeLabel) -> Result<(BitPair, u8)> {
    let (t, c) = (expect_x(trent)?, expect_ghz(charlie)?);
    let row = TABLE_MP1
        .iter()
        .find(|(rt, rc, _, _)| *rt == t && *rc == c)
        .expect("table is total over the 16 combinations");
    Ok((row.2, row.3))
}

/// Second multiparty decoding (Trent announces GHZ on ABT, Charlie measures
/// X) → (Alice's bits, Bob's bit).
pub fn decode_mp2(trent: OutcomeLabel, charlie: OutcomeLabel) -> Result<(BitPair, u8)> {
    let (t, c) = (expect_ghz(trent)?, expect_x(charlie)?);
    let row = TABLE_MP2
        .iter()
        .find(|(rt, rc, _, _)| *rt == t && *rc == c)
        .expect("table is total over the 16 combinations");
    Ok((row.2, row.3))
}

/// Regenerate the protocol-1 table rows by exhaustive simulation: for each
/// encoding, every nonzero-probability (Trent X, Bob Bell) branch.
pub fn simulate_table_p1() -> Result<Vec<(Sign, BellLabel, BitPair)>> {
    use crate::qcore::MeasurementBasis;
    let mut rows = Vec::new();
    for bits in BitPair::ALL {
        let mut state = Statevector::ghz(GhzLabel::PPlus, 3)?;
        state.apply_gate(encode_pair(bits), 0)?;
        for (bob, _, after_bob) in state.branches(&[0, 2], &MeasurementBasis::bell())? {
            for (trent, _, _) in after_bob.branches(&[1], &MeasurementBasis::x())? {
                rows.push((expect_x(trent)?, expect_bell(bob)?, bits));
            }
        }
    }
    Ok(rows)
}

/// Regenerate the protocol-2 table rows by exhaustive simulation.
pub fn simulate_table_p2() -> Result<Vec<(BellLabel, Sign, BitPair)>> {
    use crate::qcore::MeasurementBasis;
    let mut rows = Vec::new();
    for bits in BitPair::ALL {
        let mut state = Statevector::ghz(GhzLabel::PPlus, 3)?;
        state.apply_gate(encode_pair(bits), 0)?;
        for (bob, _, after_bob) in state.branches(&[2], &MeasurementBasis::x())? {
            for (trent, _, _) in after_bob.branches(&[0, 1], &MeasurementBasis::bell())? {
                rows.push((expect_bell(trent)?, expect_x(bob)?, bits));
            }
        }
    }
    Ok(rows)
}

/// Regenerate the first multiparty table rows by exhaustive simulation over
/// the 4-qubit |ABTC⟩ register (A=0, B=1, T=2, C=3).
pub fn simulate_table_mp1() -> Result<Vec<(Sign, GhzLabel, BitPair, u8)>> {
    use crate::qcore::MeasurementBasis;
    let mut rows = Vec::new();
    for a_bits in BitPair::ALL {
        for b_bit in [0u8, 1] {
            let mut state = Statevector::ghz(GhzLabel::PPlus, 4)?;
            state.apply_gate(encode_pair(a_bits), 0)?;
            state.apply_gate(encode_single(b_bit), 1)?;
            for (charlie, _, after) in state.branches(&[0, 1, 3], &MeasurementBasis::ghz3())? {
                for (trent, _, _) in after.branches(&[2], &MeasurementBasis::x())? {
                    rows.push((expect_x(trent)?, expect_ghz(charlie)?, a_bits, b_bit));
                }
            }
        }
    }
    Ok(rows)
}

/// Regenerate the second multiparty table rows by exhaustive simulation.
pub fn simulate_table_mp2() -> Result<Vec<(GhzLabel, Sign, BitPair, u8)>> {
    use crate::qcore::MeasurementBasis;
    let mut rows = Vec::new();
    for a_bits in BitPair::ALL {
        for b_bit in [0u8, 1] {
            let mut state = Statevector::ghz(GhzLabel::PPlus, 4)?;
            state.apply_gate(encode_pair(a_bits), 0)?;
            state.apply_gate(encode_single(b_bit), 1)?;
            for (trent, _, after) in state.branches(&[0, 1, 2], &MeasurementBasis::ghz3())? {
                for (charlie, _, _) in after.branches(&[3], &MeasurementBasis::x())? {
                    rows.push((expect_ghz(trent)?, expect_x(charlie)?, a_bits, b_bit));
                }
            }
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::{MeasurementBasis, EPS};

    #[test]
    fn encode_pair_mapping() {
        assert_eq!(encode_pair(BitPair::new(0, 0)), PauliCode::I);
        assert_eq!(encode_pair(BitPair::new(0, 1)), PauliCode::X);
        assert_eq!(encode_pair(BitPair::new(1, 0)), PauliCode::IY);
        assert_eq!(encode_pair(BitPair::new(1, 1)), PauliCode::Z);
    }

    #[test]
    fn encode_single_mapping() {
        assert_eq!(encode_single(0), PauliCode::I);
        assert_eq!(encode_single(1), PauliCode::X);
    }

    #[test]
    fn expected_joint_state_matches_gate_application() {
        for bits in BitPair::ALL {
            let symbolic = expected_joint_state(bits);
            let mut applied = Statevector::ghz(GhzLabel::PPlus, 3).unwrap();
            applied.apply_gate(encode_pair(bits), 0).unwrap();
            let f = symbolic.fidelity(&applied).unwrap();
            assert!((f - 1.0).abs() < EPS, "bits {bits}: fidelity {f}");
        }
    }

    #[test]
    fn expected_joint_state_literal_amplitudes() {
        // 01 → (|100⟩+|011⟩)/√2
        let s = expected_joint_state(BitPair::new(0, 1));
        let r = core::f64::consts::FRAC_1_SQRT_2;
        assert!((s.amps()[0b100].re - r).abs() < EPS);
        assert!((s.amps()[0b011].re - r).abs() < EPS);
        // 10 → (|011⟩−|100⟩)/√2
        let s = expected_joint_state(BitPair::new(1, 0));
        assert!((s.amps()[0b011].re - r).abs() < EPS);
        assert!((s.amps()[0b100].re + r).abs() < EPS);
        // 00 → P+ unchanged
        let s = expected_joint_state(BitPair::new(0, 0));
        let p = Statevector::ghz(GhzLabel::PPlus, 3).unwrap();
        assert!((s.fidelity(&p).unwrap() - 1.0).abs() < EPS);
    }

    #[test]
    fn decode_examples() {
        let x = |s| OutcomeLabel::X(s);
        let bell = |b| OutcomeLabel::Bell(b);
        let ghz = |g| OutcomeLabel::Ghz(g);

        assert_eq!(
            decode_p1(x(Sign::Plus), bell(BellLabel::PsiPlus)).unwrap(),
            BitPair::new(0, 1)
        );
        assert_eq!(
            decode_p1(x(Sign::Minus), bell(BellLabel::PsiPlus)).unwrap(),
            BitPair::new(1, 0)
        );
        assert_eq!(
            decode_p1(x(Sign::Minus), bell(BellLabel::PhiPlus)).unwrap(),
            BitPair::new(1, 1)
        );
        assert_eq!(
            decode_p1(x(Sign::Minus), bell(BellLabel::PhiMinus)).unwrap(),
            BitPair::new(0, 0)
        );

        assert_eq!(
            decode_p2(bell(BellLabel::PhiMinus), x(Sign::Minus)).unwrap(),
            BitPair::new(0, 0)
        );
        assert_eq!(
            decode_p2(bell(BellLabel::PhiMinus), x(Sign::Plus)).unwrap(),
            BitPair::new(1, 1)
        );
        assert_eq!(
            decode_p2(bell(BellLabel::PsiPlus), x(Sign::Plus)).unwrap(),
            BitPair::new(0, 1)
        );

        assert_eq!(
            decode_mp1(x(Sign::Plus), ghz(GhzLabel::SPlus)).unwrap(),
            (BitPair::new(0, 1), 0)
        );
        assert_eq!(
            decode_mp1(x(Sign::Minus), ghz(GhzLabel::QPlus)).unwrap(),
            (BitPair::new(1, 0), 1)
        );
        assert_eq!(
            decode_mp1(x(Sign::Plus), ghz(GhzLabel::RMinus)).unwrap(),
            (BitPair::new(1, 1), 1)
        );

        assert_eq!(
            decode_mp2(ghz(GhzLabel::PMinus), x(Sign::Plus)).unwrap(),
            (BitPair::new(1, 1), 0)
        );
        assert_eq!(
            decode_mp2(ghz(GhzLabel::QMinus), x(Sign::Plus)).unwrap(),
            (BitPair::new(1, 0), 1)
        );
        assert_eq!(
            decode_mp2(ghz(GhzLabel::RMinus), x(Sign::Minus)).unwrap(),
            (BitPair::new(0, 0), 1)
        );

        assert!(decode_p1(bell(BellLabel::PhiPlus), bell(BellLabel::PhiPlus)).is_err());
    }

    #[test]
    fn simulated_tables_match_literals() {
        let mut sim = simulate_table_p1().unwrap();
        let mut lit = TABLE_P1.to_vec();
        sim.sort();
        lit.sort();
        assert_eq!(sim, lit);

        let mut sim = simulate_table_p2().unwrap();
        let mut lit = TABLE_P2.to_vec();
        sim.sort();
        lit.sort();
        assert_eq!(sim, lit);

        let mut sim = simulate_table_mp1().unwrap();
        let mut lit = TABLE_MP1.to_vec();
        sim.sort();
        lit.sort();
        assert_eq!(sim, lit);

        let mut sim = simulate_table_mp2().unwrap();
        let mut lit = TABLE_MP2.to_vec();
        sim.sort();
        lit.sort();
        assert_eq!(sim, lit);
    }

    #[test]
    fn codec_round_trips_on_every_branch() {
        // protocol 1: Bell on AB then X on T, each listed branch has p = 1/2
        for bits in BitPair::ALL {
            let mut state = Statevector::ghz(GhzLabel::PPlus, 3).unwrap();
            state.apply_gate(encode_pair(bits), 0).unwrap();
            let branches = state.branches(&[0, 2], &MeasurementBasis::bell()).unwrap();
            assert_eq!(branches.len(), 2);
            for (bob, p_bob, after) in branches {
                assert!((p_bob - 0.5).abs() < EPS);
                for (trent, p_t, _) in after.branches(&[1], &MeasurementBasis::x()).unwrap() {
                    assert!((p_t - 1.0).abs() < EPS);
                    assert_eq!(decode_p1(trent, bob).unwrap(), bits);
                }
            }
        }
        // protocol 2: X on B then Bell on AT
        for bits in BitPair::ALL {
            let mut state = Statevector::ghz(GhzLabel::PPlus, 3).unwrap();
            state.apply_gate(encode_pair(bits), 0).unwrap();
            for (bob, p_bob, after) in state.branches(&[2], &MeasurementBasis::x()).unwrap() {
                assert!((p_bob - 0.5).abs() < EPS);
                for (trent, _, _) in after.branches(&[0, 1], &MeasurementBasis::bell()).unwrap() {
                    assert_eq!(decode_p2(trent, bob).unwrap(), bits);
                }
            }
        }
    }

    #[test]
    fn multiparty_codec_round_trips() {
        for a_bits in BitPair::ALL {
            for b_bit in [0u8, 1] {
                let mut state = Statevector::ghz(GhzLabel::PPlus, 4).unwrap();
                state.apply_gate(encode_pair(a_bits), 0).unwrap();
                state.apply_gate(encode_single(b_bit), 1).unwrap();

                let mp1 = state.branches(&[0, 1, 3], &MeasurementBasis::ghz3()).unwrap();
                assert_eq!(mp1.len(), 2);
                for (charlie, p, after) in mp1 {
                    assert!((p - 0.5).abs() < EPS);
                    for (trent, _, _) in after.branches(&[2], &MeasurementBasis::x()).unwrap() {
                        assert_eq!(decode_mp1(trent, charlie).unwrap(), (a_bits, b_bit));
                    }
                }

                let mp2 = state.branches(&[0, 1, 2], &MeasurementBasis::ghz3()).unwrap();
                assert_eq!(mp2.len(), 2);
                for (trent, p, after) in mp2 {
                    assert!((p - 0.5).abs() < EPS);
                    for (charlie, _, _) in after.branches(&[3], &MeasurementBasis::x()).unwrap() {
                        assert_eq!(decode_mp2(trent, charlie).unwrap(), (a_bits, b_bit));
                    }
                }
            }
        }
    }

    #[test]
    fn unlisted_branches_have_zero_probability() {
        for bits in BitPair::ALL {
            let mut state = Statevector::ghz(GhzLabel::PPlus, 3).unwrap();
            state.apply_gate(encode_pair(bits), 0).unwrap();
            let listed: Vec<(Sign, BellLabel)> = TABLE_P1
                .iter()
                .filter(|(_, _, b)| *b == bits)
                .map(|(t, b, _)| (*t, *b))
                .collect();
            for (bob, p_bob, after) in state
                .branches(&[0, 2], &MeasurementBasis::bell())
                .unwrap()
            {
                for (trent, p_t, _) in after.branches(&[1], &MeasurementBasis::x()).unwrap() {
                    let joint = p_bob * p_t;
                    let pair = (
                        match trent {
                            OutcomeLabel::X(s) => s,
                            _ => unreachable!(),
                        },
                        match bob {
                            OutcomeLabel::Bell(b) => b,
                            _ => unreachable!(),
                        },
                    );
                    if joint > EPS {
                        assert!(listed.contains(&pair), "{bits}: unlisted branch {pair:?}");
                    }
                }
            }
        }
    }
}
