//! Optical elements as unitaries on polarization ⊗ transverse mode.
//!
//! Wave plates act on polarization; cylindrical-lens mode converters and the
//! Dove prism act on the transverse-mode (TM) qubit with the same matrix
//! forms. A π-converter at angle θ is the reflection
//! `[[cos2θ, sin2θ], [sin2θ, −cos2θ]]`; a π/2-converter is the retarder
//! `R(θ)·diag(1, i)·R(−θ)`, whose square is the π-converter at the same angle.

use alloc::vec::Vec;
use core::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_8};

use crate::error::{Error, Result};
use crate::linalg::{Complex, Operator, PureState4};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ElementKind {
    /// Half-wave plate (polarization π-converter).
    Hwp,
    /// Quarter-wave plate (polarization π/2-converter).
    Qwp,
    /// Cylindrical-lens π-converter for TM.
    McPi,
    /// Cylindrical-lens π/2-converter for TM.
    McHalfPi,
    /// Dove prism in a single pass; a π-converter on TM.
    Dove,
    Hadamard,
    PhaseS,
    Identity,
    /// Sagnac interferometer with PBS and Dove prism; the angle is the prism
    /// rotation.
    Sagnac,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Target {
    Pol,
    Tm,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Element {
    kind: ElementKind,
    angle: f64,
    target: Target,
}

impl Element {
    /// Validates the kind/target pairing: wave plates act on `Pol`,
    /// converters and the Dove prism on `Tm`, the Sagnac gate on `Both`.
    pub fn new(kind: ElementKind, angle: f64, target: Target) -> Result<Self> {
        use ElementKind::*;
        if !angle.is_finite() {
            return Err(Error::invalid("element angle must be finite"));
        }
        let ok = match kind {
            Hwp | Qwp => target == Target::Pol,
            McPi | McHalfPi | Dove => target == Target::Tm,
            Sagnac => target == Target::Both,
            Hadamard | PhaseS | Identity => true,
        };
        if !ok {
            return Err(Error::invalid(alloc::format!("{kind:?} cannot target {target:?}")));
        }
        Ok(Self { kind, angle, target })
    }

    pub fn hwp(angle: f64) -> Self {
        Self { kind: ElementKind::Hwp, angle, target: Target::Pol }
    }

    pub fn qwp(angle: f64) -> Self {
        Self { kind: ElementKind::Qwp, angle, target: Target::Pol }
    }

    pub fn mc_pi(angle: f64) -> Self {
        Self { kind: ElementKind::McPi, angle, target: Target::Tm }
    }

    pub fn mc_half_pi(angle: f64) -> Self {
        Self { kind: ElementKind::McHalfPi, angle, target: Target::Tm }
    }

    pub fn dove(angle: f64) -> Self {
        Self { kind: ElementKind::Dove, angle, target: Target::Tm }
    }

    pub fn hadamard(target: Target) -> Self {
        Self { kind: ElementKind::Hadamard, angle: 0.0, target }
    }

    pub fn phase_s(target: Target) -> Self {
        Self { kind: ElementKind::PhaseS, angle: 0.0, target }
    }

    pub fn identity() -> Self {
        Self { kind: ElementKind::Identity, angle: 0.0, target: Target::Both }
    }

    pub fn sagnac(dove_angle: f64) -> Self {
        Self { kind: ElementKind::Sagnac, angle: dove_angle, target: Target::Both }
    }

    pub fn kind(&self) -> ElementKind {
        self.kind
    }

    pub fn angle(&self) -> f64 {
        self.angle
    }

    pub fn target(&self) -> Target {
        self.target
    }

    /// Elements undoing `self` up to a global phase, in propagation order.
    ///
    /// Retarders invert to the same retarder turned by π/2; `S` inverts to a
    /// quarter-wave retarder at π/2 on the same qubit.
    pub fn inverse(&self) -> Vec<Element> {
        use ElementKind::*;
        match self.kind {
            Hwp | McPi | Dove | Hadamard | Identity => alloc::vec![*self],
            Qwp => alloc::vec![Element::qwp(self.angle + FRAC_PI_2)],
            McHalfPi => alloc::vec![Element::mc_half_pi(self.angle + FRAC_PI_2)],
            Sagnac => alloc::vec![Element::sagnac(-self.angle)],
            PhaseS => match self.target {
                Target::Pol => alloc::vec![Element::qwp(FRAC_PI_2)],
                Target::Tm => alloc::vec![Element::mc_half_pi(FRAC_PI_2)],
                Target::Both => alloc::vec![Element::qwp(FRAC_PI_2), Element::mc_half_pi(FRAC_PI_2)],
            },
        }
    }
}

/// π-converter matrix `[[cos2θ, sin2θ], [sin2θ, −cos2θ]]`.
pub fn pi_converter(theta: f64) -> Operator {
    let (s, c) = libm::sincos(2.0 * theta);
    Operator::real2(c, s, s, -c)
}

/// π/2-converter `R(θ)·diag(1, i)·R(−θ)`: eigenvalue 1 along the fast axis at
/// θ, `i` along the slow axis.
pub fn half_pi_converter(theta: f64) -> Operator {
    let (s, c) = libm::sincos(theta);
    let i = Complex::new(0.0, 1.0);
    let one = Complex::new(1.0, 0.0);
    let cc = Complex::new(c * c, 0.0);
    let ss = Complex::new(s * s, 0.0);
    let cs = Complex::new(c * s, 0.0);
    Operator::from_rows2([
        [cc + i * ss, cs * (one - i)],
        [cs * (one - i), ss + i * cc],
    ])
}

fn hadamard2() -> Operator {
    Operator::real2(FRAC_1_SQRT_2, FRAC_1_SQRT_2, FRAC_1_SQRT_2, -FRAC_1_SQRT_2)
}

fn phase_s2() -> Operator {
    Operator::from_rows2([
        [Complex::new(1.0, 0.0), Complex::new(0.0, 0.0)],
        [Complex::new(0.0, 0.0), Complex::new(0.0, 1.0)],
    ])
}

fn lift(single: Operator, target: Target) -> Operator {
    let id = Operator::identity(2);
    let (pol, tm) = match target {
        Target::Pol => (single, id),
        Target::Tm => (id, single),
        Target::Both => (single, single),
    };
    pol.tensor(&tm).expect("2×2 factors")
}

/// The 4×4 unitary of a single element. Sagnac is handled by
/// [`sagnac_operator`].
pub fn element_operator(e: &Element) -> Result<Operator> {
    use ElementKind::*;
    let e = Element::new(e.kind, e.angle, e.target)?;
    let single = match e.kind {
        Hwp | McPi | Dove => pi_converter(e.angle),
        Qwp | McHalfPi => half_pi_converter(e.angle),
        Hadamard => hadamard2(),
        PhaseS => phase_s2(),
        Identity => Operator::identity(2),
        Sagnac => return Err(Error::invalid("use sagnac_operator for the Sagnac gate")),
    };
    Ok(lift(single, e.target))
}

/// TM rotation produced by one pass direction of the Sagnac loop with the
/// Dove prism at `dove_angle`: `[[cos2δ, sin2δ], [−sin2δ, cos2δ]]`. At
/// `δ = π/8` this is `(1/√2)[[1, 1], [−1, 1]]`.
pub fn sagnac_tm_rotation(dove_angle: f64) -> Operator {
    let (s, c) = libm::sincos(2.0 * dove_angle);
    Operator::real2(c, s, -s, c)
}

/// Polarization-controlled TM gate `|H⟩⟨H| ⊗ U(δ) + |V⟩⟨V| ⊗ U(δ)†`.
pub fn sagnac_operator(dove_angle: f64) -> Operator {
    let u = sagnac_tm_rotation(dove_angle);
    let ud = u.adjoint();
    let zero = Complex::new(0.0, 0.0);
    let mut rows = [[zero; 4]; 4];
    for r in 0..2 {
        for c in 0..2 {
            rows[r][c] = u.get(r, c);
            rows[2 + r][2 + c] = ud.get(r, c);
        }
    }
    Operator::from_rows4(rows)
}

/// Dove-prism angle that switches the Sagnac gate on.
pub const SAGNAC_ON: f64 = FRAC_PI_8;

/// Nonempty ordered list of elements, first element hit by the photon first.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementSequence(Vec<Element>);

impl ElementSequence {
    pub fn new(elements: Vec<Element>) -> Result<Self> {
        if elements.is_empty() {
            return Err(Error::invalid("element sequence must be nonempty"));
        }
        for e in &elements {
            Element::new(e.kind, e.angle, e.target)?;
        }
        Ok(Self(elements))
    }

    pub fn elements(&self) -> &[Element] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `self` followed by `next` in propagation order.
    pub fn then(&self, next: &ElementSequence) -> ElementSequence {
        let mut v = self.0.clone();
        v.extend_from_slice(&next.0);
        ElementSequence(v)
    }

    /// Sequence undoing `self` up to a global phase.
    pub fn inverse(&self) -> ElementSequence {
        ElementSequence(self.0.iter().rev().flat_map(Element::inverse).collect())
    }

    /// Universal polarization rotator `QWP(α)·HWP(β)·QWP(γ)`; the photon
    /// crosses QWP(γ) first.
    pub fn upr(alpha: f64, beta: f64, gamma: f64) -> Self {
        Self(alloc::vec![Element::qwp(gamma), Element::hwp(beta), Element::qwp(alpha)])
    }

    /// TM analogue of [`ElementSequence::upr`] built from cylindrical-lens
    /// converters.
    pub fn utr(alpha: f64, beta: f64, gamma: f64) -> Self {
        Self(alloc::vec![
            Element::mc_half_pi(gamma),
            Element::mc_pi(beta),
            Element::mc_half_pi(alpha)
        ])
    }
}

impl From<Element> for ElementSequence {
    fn from(e: Element) -> Self {
        Self(alloc::vec![e])
    }
}

/// Operator of the whole sequence: `E_n ··· E_2 · E_1`.
pub fn compile(seq: &ElementSequence) -> Result<Operator> {
    let mut acc = Operator::identity(4);
    for e in &seq.0 {
        let op = match e.kind {
            ElementKind::Sagnac => {
                Element::new(e.kind, e.angle, e.target)?;
                sagnac_operator(e.angle)
            }
            _ => element_operator(e)?,
        };
        acc = op * acc;
    }
    if !acc.is_unitary() {
        return Err(Error::Construction("compiled sequence is not unitary".into()));
    }
    Ok(acc)
}

/// Result of a polarizing beam splitter: the two polarization branches, each
/// renormalized, with their probabilities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PbsSplit {
    pub h: Option<PureState4>,
    pub p_h: f64,
    pub v: Option<PureState4>,
    pub p_v: f64,
}

/// Branches with probability below this are reported as absent.
pub const BRANCH_CUTOFF: f64 = 1e-15;

pub fn pbs_split(psi: &PureState4) -> PbsSplit {
    let a = psi.amplitudes();
    let zero = Complex::new(0.0, 0.0);
    let p_h = a[0].norm_sqr() + a[1].norm_sqr();
    let p_v = a[2].norm_sqr() + a[3].norm_sqr();
    let total = p_h + p_v;
    let (p_h, p_v) = (p_h / total, p_v / total);
    let branch = |p: f64, amps: [Complex; 4]| {
        (p >= BRANCH_CUTOFF).then(|| PureState4::from_unnormalized(amps).expect("nonzero branch"))
    };
    PbsSplit {
        h: branch(p_h, [a[0], a[1], zero, zero]),
        p_h,
        v: branch(p_v, [zero, zero, a[2], a[3]]),
        p_v,
    }
}
