//! The five mutually unbiased bases of the 4-dimensional photon space.
//!
//! | basis | commuting set   | kind      |
//! |-------|-----------------|-----------|
//! | B1    | ZZ, ZI, IZ      | canonical |
//! | B2    | XX, XI, IX      | product   |
//! | B3    | YY, YI, IY      | product   |
//! | B4    | YX, XZ, ZY      | entangled |
//! | B5    | XY, YZ, ZX      | entangled |
//!
//! Every state is prepared from `|D⟩|TEM-D⟩` by a basis stage followed by a
//! state stage. The state stage toggles a half-wave plate on polarization and
//! a π-converter on TM; the two toggles are the two key bits of the state,
//! `label = 2·pol_bit + tm_bit`.
//!
//! Bob undoes the basis stage, rotates B2 onto B1 with a half-wave plate and a
//! π-converter, and reads the canonical basis. For the entangled bases the
//! undo maps label `ℓ` onto a canonical index that differs from `ℓ`, so
//! decoding goes through [`MubCircuits::label_of_canonical`].

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4, FRAC_PI_8};
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::{check_orthonormal, pauli, Complex, Operator, PureState4};
use crate::optics::{compile, Element, ElementSequence, Target, SAGNAC_ON};

/// Tolerance for all table consistency checks.
pub const TABLE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BasisId {
    B1,
    B2,
    B3,
    B4,
    B5,
}

impl BasisId {
    pub const ALL: [BasisId; 5] = [BasisId::B1, BasisId::B2, BasisId::B3, BasisId::B4, BasisId::B5];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn is_entangled(self) -> bool {
        matches!(self, BasisId::B4 | BasisId::B5)
    }

    pub fn is_canonical(self) -> bool {
        self == BasisId::B1
    }

    pub fn name(self) -> &'static str {
        ["B1", "B2", "B3", "B4", "B5"][self.index()]
    }

    /// Pauli letters `(pol, tm)` of the three commuting operators.
    pub fn csco_letters(self) -> [(char, char); 3] {
        match self {
            BasisId::B1 => [('Z', 'Z'), ('Z', 'I'), ('I', 'Z')],
            BasisId::B2 => [('X', 'X'), ('X', 'I'), ('I', 'X')],
            BasisId::B3 => [('Y', 'Y'), ('Y', 'I'), ('I', 'Y')],
            BasisId::B4 => [('Y', 'X'), ('X', 'Z'), ('Z', 'Y')],
            BasisId::B5 => [('X', 'Y'), ('Y', 'Z'), ('Z', 'X')],
        }
    }
}

impl fmt::Display for BasisId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BasisId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "B1" | "b1" => Ok(BasisId::B1),
            "B2" | "b2" => Ok(BasisId::B2),
            "B3" | "b3" => Ok(BasisId::B3),
            "B4" | "b4" => Ok(BasisId::B4),
            "B5" | "b5" => Ok(BasisId::B5),
            other => Err(Error::invalid(format!("unknown basis {other:?}"))),
        }
    }
}

/// Single-qubit kets used to spell the table. The same six vectors serve
/// polarization (`H, V, D, d, R, L`) and TM (`TEM-H`, `TEM-V`, ...).
mod ket {
    use super::*;

    const R2: f64 = FRAC_1_SQRT_2;

    pub type Ket = [Complex; 2];

    pub const H: Ket = [Complex::new(1.0, 0.0), Complex::new(0.0, 0.0)];
    pub const V: Ket = [Complex::new(0.0, 0.0), Complex::new(1.0, 0.0)];
    pub const D: Ket = [Complex::new(R2, 0.0), Complex::new(R2, 0.0)];
    pub const A: Ket = [Complex::new(R2, 0.0), Complex::new(-R2, 0.0)];
    pub const R: Ket = [Complex::new(R2, 0.0), Complex::new(0.0, R2)];
    pub const L: Ket = [Complex::new(R2, 0.0), Complex::new(0.0, -R2)];

    pub fn product(pol: Ket, tm: Ket) -> [Complex; 4] {
        [pol[0] * tm[0], pol[0] * tm[1], pol[1] * tm[0], pol[1] * tm[1]]
    }

    /// `(|p1,t1⟩ + sign·|p2,t2⟩)/√2`
    pub fn bell_like(p1: Ket, t1: Ket, sign: f64, p2: Ket, t2: Ket) -> [Complex; 4] {
        let a = product(p1, t1);
        let b = product(p2, t2);
        core::array::from_fn(|i| (a[i] + b[i] * sign) * R2)
    }
}

/// The listed states of one basis, in label order.
fn listed_states(b: BasisId) -> [[Complex; 4]; 4] {
    use ket::*;
    match b {
        BasisId::B1 => [product(H, H), product(H, V), product(V, H), product(V, V)],
        BasisId::B2 => [product(D, D), product(D, A), product(A, D), product(A, A)],
        BasisId::B3 => [product(R, R), product(R, L), product(L, R), product(L, L)],
        BasisId::B4 => [
            bell_like(H, R, 1.0, V, L),
            bell_like(H, L, 1.0, V, R),
            bell_like(H, R, -1.0, V, L),
            bell_like(H, L, -1.0, V, R),
        ],
        BasisId::B5 => [
            bell_like(R, H, 1.0, L, V),
            bell_like(R, H, -1.0, L, V),
            bell_like(L, H, 1.0, R, V),
            bell_like(L, H, -1.0, R, V),
        ],
    }
}

#[derive(Debug, Clone)]
pub struct BasisTable {
    states: [[PureState4; 4]; 5],
    csco: [[Operator; 3]; 5],
}

impl BasisTable {
    /// Builds a table from explicit states, checking only orthonormality.
    /// CSCOs are the standard ones for each slot.
    pub fn from_states(states: [[PureState4; 4]; 5]) -> Result<Self> {
        for (b, basis) in states.iter().enumerate() {
            check_orthonormal(basis, TABLE_TOL)
                .map_err(|e| Error::Construction(format!("{}: {e}", BasisId::ALL[b])))?;
        }
        let csco = core::array::from_fn(|b| {
            let letters = BasisId::ALL[b].csco_letters();
            core::array::from_fn(|k| pauli::pair(letters[k].0, letters[k].1))
        });
        Ok(Self { states, csco })
    }

    pub fn basis(&self, b: BasisId) -> &[PureState4; 4] {
        &self.states[b.index()]
    }

    pub fn state(&self, b: BasisId, label: usize) -> &PureState4 {
        &self.states[b.index()][label]
    }

    pub fn csco(&self, b: BasisId) -> &[Operator; 3] {
        &self.csco[b.index()]
    }

    /// Largest commutator norm among each basis' three CSCO operators and the
    /// largest eigen-residual of any basis state against its CSCO.
    pub fn csco_defects(&self) -> (f64, f64) {
        let mut comm: f64 = 0.0;
        let mut eig: f64 = 0.0;
        for b in BasisId::ALL {
            let ops = self.csco(b);
            for i in 0..3 {
                for j in i + 1..3 {
                    comm = comm.max(ops[i].commutator_norm(&ops[j]));
                }
            }
            for psi in self.basis(b) {
                for op in ops {
                    eig = eig.max(op.eigen_residual(psi).1);
                }
            }
        }
        (comm, eig)
    }

    /// Eigenvalues (±1) of the three CSCO operators on a basis state.
    pub fn eigenvalues(&self, b: BasisId, label: usize) -> [f64; 3] {
        let psi = self.state(b, label);
        core::array::from_fn(|k| self.csco(b)[k].expectation(psi).re)
    }
}

/// The table of listed states, verified against the commuting sets.
pub fn build_basis_table() -> Result<BasisTable> {
    let states = core::array::from_fn(|b| {
        listed_states(BasisId::ALL[b]).map(PureState4::from_normalized_unchecked)
    });
    for basis in &states {
        for psi in basis {
            PureState4::new(*psi.amplitudes())
                .map_err(|e| Error::Construction(format!("listed state: {e}")))?;
        }
    }
    let table = BasisTable::from_states(states)?;
    let (comm, eig) = table.csco_defects();
    if comm > TABLE_TOL || eig > TABLE_TOL {
        return Err(Error::Construction(format!(
            "commuting set mismatch: commutator {comm:e}, eigen residual {eig:e}"
        )));
    }
    // the eigenvalue patterns must separate the four states of each basis
    for b in BasisId::ALL {
        let mut seen: Vec<[i8; 3]> = Vec::new();
        for label in 0..4 {
            let key = table.eigenvalues(b, label).map(|v| if v > 0.0 { 1 } else { -1 });
            if seen.contains(&key) {
                return Err(Error::Construction(format!("{b}: degenerate eigenvalue pattern")));
            }
            seen.push(key);
        }
    }
    Ok(table)
}

/// One state of a cross-basis pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StateRef {
    pub basis: BasisId,
    pub label: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnbiasednessReport {
    /// `max | |⟨a|b⟩|² − 1/4 |` over cross-basis pairs.
    pub max_deviation: f64,
    pub worst: (StateRef, StateRef),
    /// Probability `|⟨a|b⟩|²` of the worst pair.
    pub worst_probability: f64,
    /// Unordered pairs examined (10 basis pairs × 16).
    pub pairs_checked: usize,
}

impl UnbiasednessReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.max_deviation < tol
    }
}

pub fn verify_unbiasedness(t: &BasisTable) -> UnbiasednessReport {
    let first = StateRef { basis: BasisId::B1, label: 0 };
    let mut report = UnbiasednessReport {
        max_deviation: -1.0,
        worst: (first, first),
        worst_probability: 0.0,
        pairs_checked: 0,
    };
    for (i, &ba) in BasisId::ALL.iter().enumerate() {
        for &bb in &BasisId::ALL[i + 1..] {
            for la in 0..4 {
                for lb in 0..4 {
                    let p = t.state(ba, la).fidelity(t.state(bb, lb));
                    let dev = (p - 0.25).abs();
                    report.pairs_checked += 1;
                    if dev > report.max_deviation {
                        report.max_deviation = dev;
                        report.worst_probability = p;
                        report.worst = (
                            StateRef { basis: ba, label: la },
                            StateRef { basis: bb, label: lb },
                        );
                    }
                }
            }
        }
    }
    report
}

/// Fixed input of every preparation circuit.
pub fn preparation_input() -> PureState4 {
    PureState4::from_normalized_unchecked(ket::product(ket::D, ket::D))
}

/// Alice's circuit for one state: basis stage then state stage, applied to
/// `|D⟩|TEM-D⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct PrepCircuit {
    pub basis: BasisId,
    pub label: usize,
    pub basis_stage: ElementSequence,
    pub state_stage: ElementSequence,
    pub input: PureState4,
}

impl PrepCircuit {
    pub fn sequence(&self) -> ElementSequence {
        self.basis_stage.then(&self.state_stage)
    }

    pub fn operator(&self) -> Result<Operator> {
        compile(&self.sequence())
    }

    pub fn prepare(&self) -> Result<PureState4> {
        Ok(self.operator()?.apply_unitary(&self.input))
    }
}

/// Basis-selection stage for `b`.
pub fn basis_stage(b: BasisId) -> ElementSequence {
    let seq = match b {
        BasisId::B1 => alloc::vec![Element::hadamard(Target::Both)],
        BasisId::B2 => alloc::vec![Element::identity()],
        BasisId::B3 => alloc::vec![Element::phase_s(Target::Both)],
        BasisId::B4 => alloc::vec![
            Element::sagnac(SAGNAC_ON),
            Element::hadamard(Target::Tm),
            Element::phase_s(Target::Tm),
        ],
        BasisId::B5 => alloc::vec![
            Element::sagnac(SAGNAC_ON),
            Element::phase_s(Target::Pol),
            Element::hadamard(Target::Tm),
        ],
    };
    ElementSequence::new(seq).expect("static circuit")
}

/// Rotation angle of the state-stage toggles: π/4 after the B1 stage, 0
/// otherwise.
pub fn state_stage_angle(b: BasisId) -> f64 {
    if b == BasisId::B1 {
        FRAC_PI_4
    } else {
        0.0
    }
}

/// State-selection stage for `label` (`2·pol_bit + tm_bit`).
pub fn state_stage(b: BasisId, label: usize) -> Result<ElementSequence> {
    if label > 3 {
        return Err(Error::invalid(format!("state label {label} out of range 0..3")));
    }
    let angle = state_stage_angle(b);
    let mut seq = Vec::new();
    if label & 0b10 != 0 {
        seq.push(Element::hwp(angle));
    }
    if label & 0b01 != 0 {
        seq.push(Element::mc_pi(angle));
    }
    if seq.is_empty() {
        seq.push(Element::identity());
    }
    ElementSequence::new(seq)
}

pub fn prep_circuit(b: BasisId, label: usize) -> Result<PrepCircuit> {
    Ok(PrepCircuit {
        basis: b,
        label,
        basis_stage: basis_stage(b),
        state_stage: state_stage(b, label)?,
        input: preparation_input(),
    })
}

/// Half-wave plate and π-converter at π/8, taking B2 onto B1 label by label.
pub fn b2_to_b1() -> ElementSequence {
    ElementSequence::new(alloc::vec![Element::hwp(FRAC_PI_8), Element::mc_pi(FRAC_PI_8)])
        .expect("static circuit")
}

/// Bob's basis mapping: undo the basis stage of `b`, then B2 → B1.
pub fn measurement_circuit(b: BasisId) -> ElementSequence {
    basis_stage(b).inverse().then(&b2_to_b1())
}

/// Everything the protocol needs per basis, compiled once.
#[derive(Debug, Clone)]
pub struct MubCircuits {
    table: BasisTable,
    prepared: [[PureState4; 4]; 5],
    measurement: [Operator; 5],
    canonical_of_label: [[usize; 4]; 5],
    label_of_canonical: [[usize; 4]; 5],
}

impl MubCircuits {
    /// Compiles every circuit and checks it against the table: each prepared
    /// state must match its listed state, and each measurement circuit must
    /// send its basis onto distinct canonical states.
    pub fn build() -> Result<Self> {
        let table = build_basis_table()?;
        let canonical: [PureState4; 4] = core::array::from_fn(PureState4::basis);
        let mut prepared = [[PureState4::basis(0); 4]; 5];
        let mut measurement = [Operator::identity(4); 5];
        let mut canonical_of_label = [[0usize; 4]; 5];
        let mut label_of_canonical = [[usize::MAX; 4]; 5];
        for b in BasisId::ALL {
            let m = compile(&measurement_circuit(b))?;
            measurement[b.index()] = m;
            for label in 0..4 {
                let psi = prep_circuit(b, label)?.prepare()?;
                if !psi.same_ray(table.state(b, label)) {
                    return Err(Error::Construction(format!(
                        "{b} label {label}: circuit output differs from listed state (fidelity {})",
                        psi.fidelity(table.state(b, label))
                    )));
                }
                prepared[b.index()][label] = psi;
                let out = m.apply_unitary(&psi);
                let k = canonical.iter().position(|c| c.same_ray(&out)).ok_or_else(|| {
                    Error::Construction(format!("{b} label {label}: measurement output is not canonical"))
                })?;
                if label_of_canonical[b.index()][k] != usize::MAX {
                    return Err(Error::Construction(format!("{b}: two labels map to canonical {k}")));
                }
                canonical_of_label[b.index()][label] = k;
                label_of_canonical[b.index()][k] = label;
            }
        }
        Ok(Self { table, prepared, measurement, canonical_of_label, label_of_canonical })
    }

    pub fn table(&self) -> &BasisTable {
        &self.table
    }

    /// Circuit-prepared state (global phase as produced by the optics).
    pub fn prepared(&self, b: BasisId, label: usize) -> &PureState4 {
        &self.prepared[b.index()][label]
    }

    pub fn measurement_operator(&self, b: BasisId) -> &Operator {
        &self.measurement[b.index()]
    }

    /// Canonical index Bob sees for Alice's `label` in basis `b`.
    pub fn canonical_of_label(&self, b: BasisId) -> [usize; 4] {
        self.canonical_of_label[b.index()]
    }

    /// Inverse of [`MubCircuits::canonical_of_label`]: Bob's decoding table.
    pub fn label_of_canonical(&self, b: BasisId) -> [usize; 4] {
        self.label_of_canonical[b.index()]
    }

    /// Measurement operator applied to a state, renormalized.
    pub fn to_canonical_frame(&self, b: BasisId, psi: &PureState4) -> PureState4 {
        self.measurement[b.index()].apply_unitary(psi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    #[test]
    fn b1_is_canonical() {
        let t = build_basis_table().unwrap();
        for k in 0..4 {
            assert_eq!(*t.state(BasisId::B1, k), PureState4::basis(k));
        }
    }

    #[test]
    fn b3_first_state_is_r_tem_r() {
        let t = build_basis_table().unwrap();
        // |R⟩⊗|TEM-R⟩ = (1, i, i, −1)/2
        let expect = PureState4::new([c(0.5, 0.), c(0., 0.5), c(0., 0.5), c(-0.5, 0.)]).unwrap();
        assert!(t.state(BasisId::B3, 0).same_ray(&expect));
    }

    #[test]
    fn b4_first_state() {
        let t = build_basis_table().unwrap();
        // (|H,TEM-R⟩ + |V,TEM-L⟩)/√2 = (1, i, 1, −i)/2
        let expect = PureState4::new([c(0.5, 0.), c(0., 0.5), c(0.5, 0.), c(0., -0.5)]).unwrap();
        assert!(t.state(BasisId::B4, 0).same_ray(&expect));
    }

    #[test]
    fn unbiasedness_of_table() {
        let t = build_basis_table().unwrap();
        let r = verify_unbiasedness(&t);
        assert!(r.max_deviation < 1e-10, "{r:?}");
        assert_eq!(r.pairs_checked, 160);
    }

    #[test]
    fn duplicated_basis_is_maximally_biased() {
        let t = build_basis_table().unwrap();
        let mut states: [[PureState4; 4]; 5] = core::array::from_fn(|b| *t.basis(BasisId::ALL[b]));
        states[1] = states[0];
        let bad = BasisTable::from_states(states).unwrap();
        let r = verify_unbiasedness(&bad);
        assert!((r.max_deviation - 0.75).abs() < 1e-15);
        assert_eq!(r.worst.0.basis, BasisId::B1);
        assert_eq!(r.worst.1.basis, BasisId::B2);
        assert_eq!(r.worst.0.label, r.worst.1.label);
        assert!((r.worst_probability - 1.0).abs() < 1e-15);
    }

    #[test]
    fn prep_examples() {
        let hh = prep_circuit(BasisId::B1, 0).unwrap().prepare().unwrap();
        assert!(hh.same_ray(&PureState4::basis(0)));

        // H(0)⊗MCπ(0) on the B2 input gives |d, TEM-d⟩
        let circ = prep_circuit(BasisId::B2, 3).unwrap();
        assert_eq!(circ.state_stage.elements(), &[Element::hwp(0.0), Element::mc_pi(0.0)]);
        let dd = PureState4::new([c(0.5, 0.), c(-0.5, 0.), c(-0.5, 0.), c(0.5, 0.)]).unwrap();
        assert!(circ.prepare().unwrap().same_ray(&dd));

        // (|L,TEM-H⟩ − |R,TEM-V⟩)/√2
        let b53 = PureState4::new([c(0.5, 0.), c(-0.5, 0.), c(0., -0.5), c(0., -0.5)]).unwrap();
        assert!(prep_circuit(BasisId::B5, 3).unwrap().prepare().unwrap().same_ray(&b53));
    }

    #[test]
    fn state_stage_rejects_bad_label() {
        assert!(state_stage(BasisId::B2, 4).is_err());
    }

    #[test]
    fn circuits_build_and_bijective() {
        let m = MubCircuits::build().unwrap();
        for b in BasisId::ALL {
            let fwd = m.canonical_of_label(b);
            let back = m.label_of_canonical(b);
            for l in 0..4 {
                assert_eq!(back[fwd[l]], l);
            }
        }
        for b in [BasisId::B1, BasisId::B2, BasisId::B3] {
            assert_eq!(m.canonical_of_label(b), [0, 1, 2, 3]);
        }
    }

    #[test]
    fn parse_basis_ids() {
        assert_eq!("B4".parse::<BasisId>().unwrap(), BasisId::B4);
        assert!("B6".parse::<BasisId>().is_err());
        assert!(BasisId::B5.is_entangled() && !BasisId::B3.is_entangled());
    }
}
