//! Exact complex statevector simulation of small qubit registers.
//!
//! Qubit ordering convention: qubit 0 is the leftmost symbol of a ket, so for
//! a shared triplet written |ATB⟩ Alice holds qubit 0, Trent qubit 1 and Bob
//! qubit 2. Index `i` of the amplitude vector therefore carries qubit `q` in
//! bit position `n - 1 - q`.
//!
//! States are compared by fidelity, never amplitude-wise, because the iσ_y
//! encoding introduces global signs.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

pub use num_complex::Complex64;
use rand_core::RngCore;
use serde::Serialize;

use crate::error::invalid_arg;
use crate::rngutil;
use crate::{Error, Result};

/// Largest register the simulator accepts.
pub const MAX_QUBITS: usize = 8;

/// Tolerance for normalization / orthogonality / zero-probability checks.
pub const EPS: f64 = 1e-12;

const FRAC_1_SQRT_2: f64 = core::f64::consts::FRAC_1_SQRT_2;

/// Single-qubit unitaries used by the protocols. `I`, `X`, `IY` and `Z`
/// carry the 2-bit dense-coding meaning; `H` is the authentication mask.
///
/// `IY` is iσ_y = |0⟩⟨1| − |1⟩⟨0|, a real matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum PauliCode {
    I,
    X,
    IY,
    Z,
    H,
}

impl PauliCode {
    /// The 2×2 matrix, row-major.
    pub fn matrix(self) -> [[Complex64; 2]; 2] {
        let c = |x: f64| Complex64::new(x, 0.0);
        match self {
            PauliCode::I => [[c(1.0), c(0.0)], [c(0.0), c(1.0)]],
            PauliCode::X => [[c(0.0), c(1.0)], [c(1.0), c(0.0)]],
            PauliCode::IY => [[c(0.0), c(1.0)], [c(-1.0), c(0.0)]],
            PauliCode::Z => [[c(1.0), c(0.0)], [c(0.0), c(-1.0)]],
            PauliCode::H => [
                [c(FRAC_1_SQRT_2), c(FRAC_1_SQRT_2)],
                [c(FRAC_1_SQRT_2), c(-FRAC_1_SQRT_2)],
            ],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            PauliCode::I => "I",
            PauliCode::X => "X",
            PauliCode::IY => "iY",
            PauliCode::Z => "Z",
            PauliCode::H => "H",
        }
    }
}

impl fmt::Display for PauliCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// X-basis outcome sign.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn name(self) -> &'static str {
        match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        }
    }
}

/// The four Bell states φ± = (|00⟩±|11⟩)/√2, ψ± = (|01⟩±|10⟩)/√2.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BellLabel {
    PhiPlus,
    PhiMinus,
    PsiPlus,
    PsiMinus,
}

impl BellLabel {
    pub const ALL: [BellLabel; 4] = [
        BellLabel::PhiPlus,
        BellLabel::PhiMinus,
        BellLabel::PsiPlus,
        BellLabel::PsiMinus,
    ];

    /// (first component bits, sign): φ± ↔ (00, ±), ψ± ↔ (01, ±).
    fn parts(self) -> (usize, f64) {
        match self {
            BellLabel::PhiPlus => (0b00, 1.0),
            BellLabel::PhiMinus => (0b00, -1.0),
            BellLabel::PsiPlus => (0b01, 1.0),
            BellLabel::PsiMinus => (0b01, -1.0),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            BellLabel::PhiPlus => "phi+",
            BellLabel::PhiMinus => "phi-",
            BellLabel::PsiPlus => "psi+",
            BellLabel::PsiMinus => "psi-",
        }
    }
}

/// The eight 3-qubit GHZ states P±, Q±, R±, S±:
/// P± = (|000⟩±|111⟩)/√2, Q± = (|001⟩±|110⟩)/√2,
/// R± = (|010⟩±|101⟩)/√2, S± = (|011⟩±|100⟩)/√2.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GhzLabel {
    PPlus,
    PMinus,
    QPlus,
    QMinus,
    RPlus,
    RMinus,
    SPlus,
    SMinus,
}

impl GhzLabel {
    pub const ALL: [GhzLabel; 8] = [
        GhzLabel::PPlus,
        GhzLabel::PMinus,
        GhzLabel::QPlus,
        GhzLabel::QMinus,
        GhzLabel::RPlus,
        GhzLabel::RMinus,
        GhzLabel::SPlus,
        GhzLabel::SMinus,
    ];

    /// (first component bits, sign); the second component is the complement.
    fn parts(self) -> (usize, f64) {
        match self {
            GhzLabel::PPlus => (0b000, 1.0),
            GhzLabel::PMinus => (0b000, -1.0),
            GhzLabel::QPlus => (0b001, 1.0),
            GhzLabel::QMinus => (0b001, -1.0),
            GhzLabel::RPlus => (0b010, 1.0),
            GhzLabel::RMinus => (0b010, -1.0),
            GhzLabel::SPlus => (0b011, 1.0),
            GhzLabel::SMinus => (0b011, -1.0),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GhzLabel::PPlus => "P+",
            GhzLabel::PMinus => "P-",
            GhzLabel::QPlus => "Q+",
            GhzLabel::QMinus => "Q-",
            GhzLabel::RPlus => "R+",
            GhzLabel::RMinus => "R-",
            GhzLabel::SPlus => "S+",
            GhzLabel::SMinus => "S-",
        }
    }
}

/// A tagged measurement outcome: which basis produced it and which basis
/// vector was observed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum OutcomeLabel {
    /// Computational (Z) basis bit.
    Z(u8),
    /// X basis |+⟩ / |−⟩.
    X(Sign),
    /// Bell basis label.
    Bell(BellLabel),
    /// 3-qubit GHZ basis label.
    Ghz(GhzLabel),
}

impl OutcomeLabel {
    pub fn name(self) -> &'static str {
        match self {
            OutcomeLabel::Z(0) => "0",
            OutcomeLabel::Z(_) => "1",
            OutcomeLabel::X(Sign::Plus) => "+",
            OutcomeLabel::X(Sign::Minus) => "-",
            OutcomeLabel::Bell(b) => b.name(),
            OutcomeLabel::Ghz(g) => g.name(),
        }
    }
}

impl fmt::Display for OutcomeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl Serialize for OutcomeLabel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> core::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

/// Which labeled orthonormal basis a projective measurement uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum BasisName {
    Z,
    X,
    Bell,
    Ghz3,
}

impl BasisName {
    pub fn arity(self) -> usize {
        match self {
            BasisName::Z | BasisName::X => 1,
            BasisName::Bell => 2,
            BasisName::Ghz3 => 3,
        }
    }
}

/// A labeled orthonormal measurement basis over `arity` qubits.
#[derive(Clone, Debug)]
pub struct MeasurementBasis {
    name: BasisName,
    vectors: Vec<(OutcomeLabel, Vec<Complex64>)>,
}

impl MeasurementBasis {
    pub fn get(name: BasisName) -> MeasurementBasis {
        match name {
            BasisName::Z => Self::z(),
            BasisName::X => Self::x(),
            BasisName::Bell => Self::bell(),
            BasisName::Ghz3 => Self::ghz3(),
        }
    }

    /// Computational basis {|0⟩, |1⟩}.
    pub fn z() -> MeasurementBasis {
        let c = |x: f64| Complex64::new(x, 0.0);
        MeasurementBasis {
            name: BasisName::Z,
            vectors: vec![
                (OutcomeLabel::Z(0), vec![c(1.0), c(0.0)]),
                (OutcomeLabel::Z(1), vec![c(0.0), c(1.0)]),
            ],
        }
    }

    /// {|+⟩, |−⟩} with |±⟩ = (|0⟩±|1⟩)/√2.
    pub fn x() -> MeasurementBasis {
        let c = |x: f64| Complex64::new(x, 0.0);
        MeasurementBasis {
            name: BasisName::X,
            vectors: vec![
                (
                    OutcomeLabel::X(Sign::Plus),
                    vec![c(FRAC_1_SQRT_2), c(FRAC_1_SQRT_2)],
                ),
                (
                    OutcomeLabel::X(Sign::Minus),
                    vec![c(FRAC_1_SQRT_2), c(-FRAC_1_SQRT_2)],
                ),
            ],
        }
    }

    /// The four Bell states.
    pub fn bell() -> MeasurementBasis {
        let vectors = BellLabel::ALL
            .iter()
            .map(|&label| {
                let (first, sign) = label.parts();
                (OutcomeLabel::Bell(label), two_term_vec(2, first, sign))
            })
            .collect();
        MeasurementBasis {
            name: BasisName::Bell,
            vectors,
        }
    }

    /// The eight 3-qubit GHZ states.
    pub fn ghz3() -> MeasurementBasis {
        let vectors = GhzLabel::ALL
            .iter()
            .map(|&label| {
                let (first, sign) = label.parts();
                (OutcomeLabel::Ghz(label), two_term_vec(3, first, sign))
            })
            .collect();
        MeasurementBasis {
            name: BasisName::Ghz3,
            vectors,
        }
    }

    pub fn name(&self) -> BasisName {
        self.name
    }

    pub fn arity(&self) -> usize {
        self.name.arity()
    }

    pub fn vectors(&self) -> &[(OutcomeLabel, Vec<Complex64>)] {
        &self.vectors
    }
}

/// (|first⟩ + sign·|~first⟩)/√2 over `arity` qubits.
fn two_term_vec(arity: usize, first: usize, sign: f64) -> Vec<Complex64> {
    let dim = 1usize << arity;
    let mut v = vec![Complex64::new(0.0, 0.0); dim];
    v[first] = Complex64::new(FRAC_1_SQRT_2, 0.0);
    v[(dim - 1) ^ first] = Complex64::new(sign * FRAC_1_SQRT_2, 0.0);
    v
}

/// Normalized complex amplitude vector over an ordered register of up to
/// [`MAX_QUBITS`] qubits.
#[derive(Clone, Debug)]
pub struct Statevector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl Statevector {
    /// The computational basis ket |bits⟩.
    pub fn basis_state(n_qubits: usize, bits: &[u8]) -> Result<Statevector> {
        check_size(n_qubits)?;
        if bits.len() != n_qubits {
            return Err(invalid_arg!(
                "bit pattern length {} does not match {} qubits",
                bits.len(),
                n_qubits
            ));
        }
        let mut idx = 0usize;
        for &b in bits {
            if b > 1 {
                return Err(invalid_arg!("bit pattern entries must be 0 or 1"));
            }
            idx = (idx << 1) | b as usize;
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        amps[idx] = Complex64::new(1.0, 0.0);
        Ok(Statevector { n_qubits, amps })
    }

    /// Build from raw amplitudes; rejects unnormalized input.
    pub fn from_amps(n_qubits: usize, amps: Vec<Complex64>) -> Result<Statevector> {
        check_size(n_qubits)?;
        if amps.len() != 1 << n_qubits {
            return Err(invalid_arg!(
                "expected {} amplitudes, got {}",
                1usize << n_qubits,
                amps.len()
            ));
        }
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > EPS {
            return Err(invalid_arg!("state is not normalized (norm² = {norm})"));
        }
        Ok(Statevector { n_qubits, amps })
    }

    /// One of the eight 3-qubit GHZ states, or a 4-qubit P± state
    /// (|0000⟩±|1111⟩)/√2.
    pub fn ghz(label: GhzLabel, n_qubits: usize) -> Result<Statevector> {
        let (first, sign) = label.parts();
        match n_qubits {
            3 => Statevector::from_amps(3, two_term_vec(3, first, sign)),
            4 => {
                if !matches!(label, GhzLabel::PPlus | GhzLabel::PMinus) {
                    return Err(invalid_arg!(
                        "only P-family labels are defined on 4 qubits, got {}",
                        label.name()
                    ));
                }
                Statevector::from_amps(4, two_term_vec(4, first, sign))
            }
            _ => Err(invalid_arg!("GHZ states are defined on 3 or 4 qubits")),
        }
    }

    /// One of the four Bell states.
    pub fn bell(label: BellLabel) -> Statevector {
        let (first, sign) = label.parts();
        Statevector::from_amps(2, two_term_vec(2, first, sign)).expect("bell state is normalized")
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amps(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Bit position of `qubit` inside an amplitude index.
    fn shift(&self, qubit: usize) -> usize {
        self.n_qubits - 1 - qubit
    }

    fn check_qubit(&self, qubit: usize) -> Result<()> {
        if qubit >= self.n_qubits {
            return Err(invalid_arg!(
                "qubit index {qubit} out of range for {} qubits",
                self.n_qubits
            ));
        }
        Ok(())
    }

    /// Apply a single-qubit unitary in place.
    pub fn apply_gate(&mut self, gate: PauliCode, qubit: usize) -> Result<()> {
        self.check_qubit(qubit)?;
        let m = gate.matrix();
        let mask = 1usize << self.shift(qubit);
        for i in 0..self.amps.len() {
            if i & mask == 0 {
                let j = i | mask;
                let a0 = self.amps[i];
                let a1 = self.amps[j];
                self.amps[i] = m[0][0] * a0 + m[0][1] * a1;
                self.amps[j] = m[1][0] * a0 + m[1][1] * a1;
            }
        }
        Ok(())
    }

    /// |⟨self|other⟩|².
    pub fn fidelity(&self, other: &Statevector) -> Result<f64> {
        if self.n_qubits != other.n_qubits {
            return Err(invalid_arg!(
                "fidelity between {}-qubit and {}-qubit states",
                self.n_qubits,
                other.n_qubits
            ));
        }
        let ip: Complex64 = self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum();
        Ok(ip.norm_sqr())
    }

    fn check_measurement_args(&self, qubits: &[usize], basis: &MeasurementBasis) -> Result<()> {
        if qubits.len() != basis.arity() {
            return Err(invalid_arg!(
                "basis {:?} consumes {} qubits, got {}",
                basis.name(),
                basis.arity(),
                qubits.len()
            ));
        }
        for (i, &q) in qubits.iter().enumerate() {
            self.check_qubit(q)?;
            if qubits[..i].contains(&q) {
                return Err(invalid_arg!("measured qubits must be distinct"));
            }
        }
        Ok(())
    }

    /// Projection amplitudes of `self` onto (basis vector on `qubits`) ⊗
    /// (identity elsewhere): for each assignment `r` of the remaining qubits
    /// returns c_r = Σ_s v[s]* · amp[idx(s, r)]. The probability of the
    /// outcome is Σ_r |c_r|².
    ///
    /// `qubits[0]` corresponds to the leftmost symbol of the basis vector.
    fn overlaps(&self, qubits: &[usize], vector: &[Complex64]) -> Vec<Complex64> {
        let arity = qubits.len();
        let meas_shifts: Vec<usize> = qubits.iter().map(|&q| self.shift(q)).collect();
        let rest_shifts: Vec<usize> = (0..self.n_qubits)
            .filter(|q| !qubits.contains(q))
            .map(|q| self.shift(q))
            .collect();
        let rest_dim = 1usize << rest_shifts.len();
        let mut out = vec![Complex64::new(0.0, 0.0); rest_dim];
        for (r, out_r) in out.iter_mut().enumerate() {
            let mut base = 0usize;
            for (k, &sh) in rest_shifts.iter().enumerate() {
                if r >> (rest_shifts.len() - 1 - k) & 1 == 1 {
                    base |= 1 << sh;
                }
            }
            let mut acc = Complex64::new(0.0, 0.0);
            for (s, v) in vector.iter().enumerate() {
                let mut idx = base;
                for (k, &sh) in meas_shifts.iter().enumerate() {
                    if s >> (arity - 1 - k) & 1 == 1 {
                        idx |= 1 << sh;
                    }
                }
                acc += v.conj() * self.amps[idx];
            }
            *out_r = acc;
        }
        out
    }

    /// Rebuild the full state from a chosen basis vector and its projection
    /// amplitudes, renormalized by `prob`.
    fn collapse_from(
        &self,
        qubits: &[usize],
        vector: &[Complex64],
        overlaps: &[Complex64],
        prob: f64,
    ) -> Statevector {
        let arity = qubits.len();
        let meas_shifts: Vec<usize> = qubits.iter().map(|&q| self.shift(q)).collect();
        let rest_shifts: Vec<usize> = (0..self.n_qubits)
            .filter(|q| !qubits.contains(q))
            .map(|q| self.shift(q))
            .collect();
        let scale = 1.0 / libm::sqrt(prob);
        let mut amps = vec![Complex64::new(0.0, 0.0); self.amps.len()];
        for (r, c_r) in overlaps.iter().enumerate() {
            let mut base = 0usize;
            for (k, &sh) in rest_shifts.iter().enumerate() {
                if r >> (rest_shifts.len() - 1 - k) & 1 == 1 {
                    base |= 1 << sh;
                }
            }
            for (s, v) in vector.iter().enumerate() {
                let mut idx = base;
                for (k, &sh) in meas_shifts.iter().enumerate() {
                    if s >> (arity - 1 - k) & 1 == 1 {
                        idx |= 1 << sh;
                    }
                }
                amps[idx] = v * c_r * scale;
            }
        }
        Statevector {
            n_qubits: self.n_qubits,
            amps,
        }
    }

    /// Exact outcome probabilities for measuring `qubits` in `basis`,
    /// in the basis' label order.
    pub fn outcome_distribution(
        &self,
        qubits: &[usize],
        basis: &MeasurementBasis,
    ) -> Result<Vec<(OutcomeLabel, f64)>> {
        self.check_measurement_args(qubits, basis)?;
        Ok(basis
            .vectors()
            .iter()
            .map(|(label, v)| {
                let p = self
                    .overlaps(qubits, v)
                    .iter()
                    .map(|c| c.norm_sqr())
                    .sum::<f64>();
                (*label, p)
            })
            .collect())
    }

    /// All nonzero-probability outcomes with their collapsed states.
    /// Outcomes below [`EPS`] are dropped.
    pub fn branches(
        &self,
        qubits: &[usize],
        basis: &MeasurementBasis,
    ) -> Result<Vec<(OutcomeLabel, f64, Statevector)>> {
        self.check_measurement_args(qubits, basis)?;
        let mut out = Vec::new();
        for (label, v) in basis.vectors() {
            let overlaps = self.overlaps(qubits, v);
            let p: f64 = overlaps.iter().map(|c| c.norm_sqr()).sum();
            if p > EPS {
                out.push((*label, p, self.collapse_from(qubits, v, &overlaps, p)));
            }
        }
        Ok(out)
    }

    /// Projective measurement: samples an outcome from
    /// [`Self::outcome_distribution`], collapses the state in place and
    /// returns the label with its probability.
    pub fn measure<R: RngCore + ?Sized>(
        &mut self,
        qubits: &[usize],
        basis: &MeasurementBasis,
        rng: &mut R,
    ) -> Result<(OutcomeLabel, f64)> {
        self.check_measurement_args(qubits, basis)?;
        let u = rngutil::unit_f64(rng);
        let mut acc = 0.0;
        let mut last_nonzero: Option<(OutcomeLabel, f64, Vec<Complex64>)> = None;
        for (label, v) in basis.vectors() {
            let overlaps = self.overlaps(qubits, v);
            let p: f64 = overlaps.iter().map(|c| c.norm_sqr()).sum();
            if p <= EPS {
                continue;
            }
            acc += p;
            last_nonzero = Some((*label, p, overlaps.clone()));
            if u < acc {
                *self = self.collapse_from(qubits, v, &overlaps, p);
                return Ok((*label, p));
            }
        }
        // u landed in the rounding slack past the last cumulative bin
        match last_nonzero {
            Some((label, p, overlaps)) => {
                let v = basis
                    .vectors()
                    .iter()
                    .find(|(l, _)| *l == label)
                    .map(|(_, v)| v.clone())
                    .ok_or(Error::Internal("basis label vanished"))?;
                *self = self.collapse_from(qubits, &v, &overlaps, p);
                Ok((label, p))
            }
            None => Err(Error::Internal("all measurement outcomes had zero norm")),
        }
    }
}

fn check_size(n_qubits: usize) -> Result<()> {
    if n_qubits == 0 || n_qubits > MAX_QUBITS {
        return Err(invalid_arg!(
            "register size {n_qubits} outside 1..={MAX_QUBITS}"
        ));
    }
    Ok(())
}
