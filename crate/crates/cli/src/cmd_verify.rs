//! `qdc verify`: named equation and identity checks, one PASS/FAIL line
//! each, rederiving everything from the simulator rather than trusting the
//! stored tables.

use qdc_core::adversary::{
    detection_probability, guess_accuracy, masked_encoding_expected, mutual_information,
    zlw_conditionals, AttackStrategy,
};
use qdc_core::auth::{check_pass_probability, mask, unmask, AuthKey, SharedStates};
use qdc_core::densecode::{
    encode_pair, expected_joint_state, simulate_table_mp1, simulate_table_mp2, simulate_table_p1,
    simulate_table_p2, BitPair, TABLE_MP1, TABLE_MP2, TABLE_P1, TABLE_P2,
};
use qdc_core::ecc::{ecc_decode, ecc_encode, EccScheme};
use qdc_core::qcore::{
    BasisName, Complex64, GhzLabel, MeasurementBasis, OutcomeLabel, PauliCode, Sign, Statevector,
    EPS,
};

use crate::{EXIT_OK, EXIT_VERIFY_FAILED};

type Check = (&'static str, fn() -> bool);

fn near(a: f64, b: f64) -> bool {
    (a - b).abs() < EPS
}

fn encoded(bits: BitPair) -> Statevector {
    let mut s = Statevector::ghz(GhzLabel::PPlus, 3).unwrap();
    s.apply_gate(encode_pair(bits), 0).unwrap();
    s
}

/// GHZ |P+⟩ = (|φ+⟩_AB|+⟩_T + |φ−⟩_AB|−⟩_T)/√2: Bell measurement on (A,B)
/// leaves T in the matching X eigenstate.
fn ghz_bell_x_decomposition() -> bool {
    let state = Statevector::ghz(GhzLabel::PPlus, 3).unwrap();
    let branches = state
        .branches(&[0, 2], &MeasurementBasis::bell())
        .unwrap();
    if branches.len() != 2 {
        return false;
    }
    branches.iter().all(|(label, p, collapsed)| {
        let want_sign = match label {
            OutcomeLabel::Bell(b) if b.name() == "phi+" => Sign::Plus,
            OutcomeLabel::Bell(b) if b.name() == "phi-" => Sign::Minus,
            _ => return false,
        };
        let x = collapsed.branches(&[1], &MeasurementBasis::x()).unwrap();
        near(*p, 0.5)
            && x.len() == 1
            && x[0].0 == OutcomeLabel::X(want_sign)
            && near(x[0].1, 1.0)
    })
}

fn encoding_expansion(bits: BitPair) -> bool {
    encoded(bits)
        .fidelity(&expected_joint_state(bits))
        .unwrap()
        > 1.0 - EPS
}

fn masked_expansion(bits: BitPair) -> bool {
    let mut state = encoded(bits);
    state.apply_gate(PauliCode::H, 0).unwrap();
    state.fidelity(&masked_encoding_expected(bits)).unwrap() > 1.0 - EPS
}

/// 4-qubit |P+⟩ on ABTC decomposes as (|P+⟩_ABC|+⟩_T + |P−⟩_ABC|−⟩_T)/√2.
fn ghz4_decomposition() -> bool {
    let state = Statevector::ghz(GhzLabel::PPlus, 4).unwrap();
    let branches = state
        .branches(&[0, 1, 3], &MeasurementBasis::ghz3())
        .unwrap();
    if branches.len() != 2 {
        return false;
    }
    branches.iter().all(|(label, p, collapsed)| {
        let want_sign = match label {
            OutcomeLabel::Ghz(GhzLabel::PPlus) => Sign::Plus,
            OutcomeLabel::Ghz(GhzLabel::PMinus) => Sign::Minus,
            _ => return false,
        };
        let x = collapsed.branches(&[2], &MeasurementBasis::x()).unwrap();
        near(*p, 0.5)
            && x.len() == 1
            && x[0].0 == OutcomeLabel::X(want_sign)
            && near(x[0].1, 1.0)
    })
}

fn table_p1_matches() -> bool {
    let mut sim = simulate_table_p1().unwrap();
    let mut lit = TABLE_P1.to_vec();
    sim.sort();
    lit.sort();
    sim == lit
}

fn table_p2_matches() -> bool {
    let mut sim = simulate_table_p2().unwrap();
    let mut lit = TABLE_P2.to_vec();
    sim.sort();
    lit.sort();
    sim == lit
}

fn table_mp1_matches() -> bool {
    let mut sim = simulate_table_mp1().unwrap();
    let mut lit = TABLE_MP1.to_vec();
    sim.sort();
    lit.sort();
    sim == lit
}

fn table_mp2_matches() -> bool {
    let mut sim = simulate_table_mp2().unwrap();
    let mut lit = TABLE_MP2.to_vec();
    sim.sort();
    lit.sort();
    sim == lit
}

fn basis_orthonormal(name: BasisName) -> bool {
    let basis = MeasurementBasis::get(name);
    let vectors = basis.vectors();
    for (i, (_, v)) in vectors.iter().enumerate() {
        for (j, (_, w)) in vectors.iter().enumerate() {
            let inner: Complex64 = v.iter().zip(w).map(|(a, b)| a.conj() * b).sum();
            let expect = if i == j { 1.0 } else { 0.0 };
            if (inner.norm() - expect).abs() > EPS {
                return false;
            }
        }
    }
    // completeness: 2^arity vectors
    vectors.len() == 1 << basis.arity()
}

fn paulis_unitary() -> bool {
    [
        PauliCode::I,
        PauliCode::X,
        PauliCode::IY,
        PauliCode::Z,
        PauliCode::H,
    ]
    .iter()
    .all(|&g| {
        let m = g.matrix();
        // U†U = 1
        (0..2).all(|i| {
            (0..2).all(|j| {
                let sum: Complex64 = (0..2).map(|k| m[k][i].conj() * m[k][j]).sum();
                let expect = if i == j { 1.0 } else { 0.0 };
                (sum - Complex64::new(expect, 0.0)).norm() < EPS
            })
        })
    })
}

fn zlw_masked_mi_zero() -> bool {
    mutual_information(&zlw_conditionals(true).unwrap()) == 0.0
}

fn zlw_unmasked_mi_one_bit() -> bool {
    near(mutual_information(&zlw_conditionals(false).unwrap()), 1.0)
}

fn zlw_masked_blind_guessing() -> bool {
    near(guess_accuracy(&zlw_conditionals(true).unwrap()), 0.25)
}

fn zlw_unmasked_half_guessing() -> bool {
    near(guess_accuracy(&zlw_conditionals(false).unwrap()), 0.5)
}

fn z_intercepts_detected_half() -> bool {
    [
        AttackStrategy::ZlwP1 { apply_h: false },
        AttackStrategy::ZlwP2 { apply_h: false },
        AttackStrategy::EveIntercept {
            basis: BasisName::Z,
        },
    ]
    .iter()
    .all(|&s| near(detection_probability(s).unwrap(), 0.5))
}

fn zlw_masked_detected_three_quarters() -> bool {
    [
        AttackStrategy::ZlwP1 { apply_h: true },
        AttackStrategy::ZlwP2 { apply_h: true },
    ]
    .iter()
    .all(|&s| near(detection_probability(s).unwrap(), 0.75))
}

fn hamming_corrects_single_flips() -> bool {
    for word in 0u8..16 {
        let data = vec![word >> 3 & 1, word >> 2 & 1, word >> 1 & 1, word & 1];
        let code = ecc_encode(&data, EccScheme::Hamming74);
        for flip in 0..7 {
            let mut corrupted = code.clone();
            corrupted[flip] ^= 1;
            if ecc_decode(&corrupted, EccScheme::Hamming74).unwrap() != data {
                return false;
            }
        }
    }
    true
}

/// Unmasking with a wrong key bit leaves a stray H; the all-equal Z check
/// then passes with probability exactly 1/2.
fn key_mismatch_detected_half() -> bool {
    let mut states = SharedStates::ghz_sequence(3, 1).unwrap();
    mask(&mut states, &AuthKey::from_bits(vec![1]), 0).unwrap();
    unmask(&mut states, &AuthKey::from_bits(vec![0]), 0).unwrap();
    near(check_pass_probability(&states.states()[0]), 0.5)
}

fn honest_mask_roundtrip() -> bool {
    let reference = Statevector::ghz(GhzLabel::PPlus, 3).unwrap();
    for key_bit in [0u8, 1] {
        let mut states = SharedStates::ghz_sequence(3, 1).unwrap();
        let key = AuthKey::from_bits(vec![key_bit]);
        mask(&mut states, &key, 0).unwrap();
        unmask(&mut states, &key, 0).unwrap();
        if states.states()[0].fidelity(&reference).unwrap() < 1.0 - EPS {
            return false;
        }
    }
    true
}

pub fn run() -> Result<u8, String> {
    let checks: Vec<Check> = vec![
        ("ghz-bell-x-decomposition", ghz_bell_x_decomposition),
        ("encoding-00-expansion", || {
            encoding_expansion(BitPair::new(0, 0))
        }),
        ("encoding-01-expansion", || {
            encoding_expansion(BitPair::new(0, 1))
        }),
        ("encoding-10-expansion", || {
            encoding_expansion(BitPair::new(1, 0))
        }),
        ("encoding-11-expansion", || {
            encoding_expansion(BitPair::new(1, 1))
        }),
        ("masked-00-expansion", || masked_expansion(BitPair::new(0, 0))),
        ("masked-01-expansion", || masked_expansion(BitPair::new(0, 1))),
        ("masked-10-expansion", || masked_expansion(BitPair::new(1, 0))),
        ("masked-11-expansion", || masked_expansion(BitPair::new(1, 1))),
        ("ghz4-ghz3-x-decomposition", ghz4_decomposition),
        ("table-p1-regenerates", table_p1_matches),
        ("table-p2-regenerates", table_p2_matches),
        ("table-mp1-regenerates", table_mp1_matches),
        ("table-mp2-regenerates", table_mp2_matches),
        ("z-basis-orthonormal", || basis_orthonormal(BasisName::Z)),
        ("x-basis-orthonormal", || basis_orthonormal(BasisName::X)),
        ("bell-basis-orthonormal", || {
            basis_orthonormal(BasisName::Bell)
        }),
        ("ghz3-basis-orthonormal", || {
            basis_orthonormal(BasisName::Ghz3)
        }),
        ("pauli-gates-unitary", paulis_unitary),
        ("zlw-masked-mi-zero", zlw_masked_mi_zero),
        ("zlw-unmasked-mi-one-bit", zlw_unmasked_mi_one_bit),
        ("zlw-masked-blind-guessing", zlw_masked_blind_guessing),
        ("zlw-unmasked-half-guessing", zlw_unmasked_half_guessing),
        ("z-intercepts-detected-half", z_intercepts_detected_half),
        (
            "zlw-masked-detected-three-quarters",
            zlw_masked_detected_three_quarters,
        ),
        ("hamming-corrects-single-flips", hamming_corrects_single_flips),
        ("key-mismatch-detected-half", key_mismatch_detected_half),
        ("honest-mask-roundtrip", honest_mask_roundtrip),
    ];

    let mut failures = 0usize;
    for (name, check) in &checks {
        if check() {
            println!("PASS {name}");
        } else {
            println!("FAIL {name}");
            failures += 1;
        }
    }
    println!("{} checks, {} failed", checks.len(), failures);
    Ok(if failures == 0 {
        EXIT_OK
    } else {
        EXIT_VERIFY_FAILED
    })
}
