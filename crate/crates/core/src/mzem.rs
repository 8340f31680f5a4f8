//! Mach-Zehnder interferometer with an extra mirror (MZEM).
//!
//! One arm reflects the transverse pattern about the ŷ axis an extra time, so
//! the two arms interfere with relative sign equal to the x-parity of the
//! input. Polarization also flips sign under the extra reflection, and the
//! device as a whole sorts photons by the eigenvalue of `Z⊗Z`. Two PBSs behind
//! its outputs complete a projective measurement on the canonical basis.
//!
//! Imperfections are modelled at the probability level through a fringe
//! visibility `V` and a beamsplitter ratio. [`mirror_overlap`] computes `V`
//! from first principles for a beam displaced laterally by `dx`.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::SQRT_2;

use crate::error::{Error, Result};
use crate::linalg::{sample_index, Complex, Operator, PureState4};
use crate::optics::pbs_split;
use crate::rng::RandomStream;

/// `Z⊗Z = diag(1, −1, −1, 1)`.
pub fn parity_operator() -> Operator {
    let one = Complex::new(1.0, 0.0);
    Operator::diag4([one, -one, -one, one])
}

/// `Z⊗Z` eigenvalue of canonical state `k`.
pub fn canonical_parity(k: usize) -> i8 {
    if (k >> 1) ^ (k & 1) == 0 {
        1
    } else {
        -1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Port {
    A,
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pol {
    H,
    V,
}

/// Which detector fired: `index = 2·(port == B) + (pol == V)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DetectionEvent {
    pub port: Port,
    pub pol: Pol,
}

impl DetectionEvent {
    pub fn detector_index(&self) -> usize {
        2 * (self.port == Port::B) as usize + (self.pol == Pol::V) as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        (i < 4).then_some(DetectionEvent {
            port: if i & 2 == 0 { Port::A } else { Port::B },
            pol: if i & 1 == 0 { Pol::H } else { Pol::V },
        })
    }
}

/// Fringe visibility, either one number for every input or one per canonical
/// input state and output port.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Visibility {
    Global(f64),
    PerState { port_a: [f64; 4], port_b: [f64; 4] },
}

impl Visibility {
    pub fn for_state(&self, k: usize) -> (f64, f64) {
        match *self {
            Visibility::Global(v) => (v, v),
            Visibility::PerState { port_a, port_b } => (port_a[k], port_b[k]),
        }
    }

    fn values(&self) -> Vec<f64> {
        match *self {
            Visibility::Global(v) => alloc::vec![v],
            Visibility::PerState { port_a, port_b } => port_a.iter().chain(port_b.iter()).copied().collect(),
        }
    }
}

/// Name under which the measured single-photon visibilities are loadable.
pub const MEASURED_PRESET: &str = "paper-tableIV";

/// Single-photon visibilities per canonical input (`|H,H⟩, |H,V⟩, |V,H⟩,
/// |V,V⟩`) at outputs A and B.
pub const MEASURED_PORT_A: [f64; 4] = [0.95, 0.91, 0.65, 0.68];
pub const MEASURED_PORT_B: [f64; 4] = [0.98, 0.95, 0.83, 0.75];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MzemSettings {
    /// Relative arm phase, radians.
    pub phi: f64,
    pub visibility: Visibility,
    /// Intensity fraction sent toward port A, in `(0, 1)`.
    pub bs_ratio: f64,
    /// With `phi = 0`, even-parity inputs exit at port A when true.
    pub even_to_a: bool,
}

impl Default for MzemSettings {
    fn default() -> Self {
        Self::ideal()
    }
}

impl MzemSettings {
    pub fn ideal() -> Self {
        Self { phi: 0.0, visibility: Visibility::Global(1.0), bs_ratio: 0.5, even_to_a: true }
    }

    pub fn with_visibility(v: f64) -> Self {
        Self { visibility: Visibility::Global(v), ..Self::ideal() }
    }

    pub fn measured() -> Self {
        Self {
            visibility: Visibility::PerState { port_a: MEASURED_PORT_A, port_b: MEASURED_PORT_B },
            ..Self::ideal()
        }
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name {
            MEASURED_PRESET => Ok(Self::measured()),
            "ideal" => Ok(Self::ideal()),
            other => Err(Error::invalid(format!("unknown MZEM preset {other:?}"))),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.phi.is_finite() {
            return Err(Error::invalid("phi must be finite"));
        }
        if !(self.bs_ratio > 0.0 && self.bs_ratio < 1.0) {
            return Err(Error::invalid(format!("bs_ratio {} not in (0, 1)", self.bs_ratio)));
        }
        if self.visibility.values().iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::invalid("visibility must lie in [0, 1]"));
        }
        Ok(())
    }

    fn parity_sign(&self) -> f64 {
        if self.even_to_a {
            1.0
        } else {
            -1.0
        }
    }

    /// Probability that canonical input `k` exits at port A.
    pub fn port_a_probability(&self, k: usize) -> f64 {
        let (va, vb) = self.visibility.for_state(k);
        let fringe = self.parity_sign() * canonical_parity(k) as f64 * libm::cos(self.phi);
        let ia = self.bs_ratio * (1.0 + va * fringe);
        let ib = (1.0 - self.bs_ratio) * (1.0 - vb * fringe);
        // both terms are nonnegative and cannot vanish together
        ia / (ia + ib)
    }

    /// Port where a parity eigenstate exits in the ideal device at this
    /// phase. Bob reads the canonical index against this routing.
    pub fn nominal_port(&self, parity: i8) -> Port {
        let toward_a = self.parity_sign() * parity as f64 * libm::cos(self.phi) >= 0.0;
        if toward_a {
            Port::A
        } else {
            Port::B
        }
    }

    /// Canonical index Bob assigns to a detector click.
    pub fn canonical_index(&self, ev: DetectionEvent) -> usize {
        let pol_bit = (ev.pol == Pol::V) as usize;
        let parity = if ev.port == self.nominal_port(1) { 1 } else { -1 };
        let tm_bit = pol_bit ^ (parity < 0) as usize;
        2 * pol_bit + tm_bit
    }

    /// Detector that fires for canonical state `k` in the ideal device.
    pub fn nominal_detector(&self, k: usize) -> DetectionEvent {
        DetectionEvent {
            port: self.nominal_port(canonical_parity(k)),
            pol: if k >> 1 == 0 { Pol::H } else { Pol::V },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PortProbabilities {
    pub p_a: f64,
    pub p_b: f64,
    /// State conditioned on exiting at A; reproduces the per-detector
    /// probabilities after a PBS.
    pub state_a: Option<PureState4>,
    pub state_b: Option<PureState4>,
}

/// Port statistics for a general input. The input is expanded on canonical
/// states, which are parity eigenstates; each component exits at A with the
/// two-beam probability for its parity and visibility.
pub fn port_probabilities(psi: &PureState4, s: &MzemSettings) -> PortProbabilities {
    let amps = psi.amplitudes();
    let pa_k: [f64; 4] = core::array::from_fn(|k| s.port_a_probability(k));
    let p_a: f64 = (0..4).map(|k| amps[k].norm_sqr() * pa_k[k]).sum();
    let p_b: f64 = (0..4).map(|k| amps[k].norm_sqr() * (1.0 - pa_k[k])).sum();
    let total = p_a + p_b;
    let (p_a, p_b) = (p_a / total, p_b / total);
    let cond = |p: f64, w: &dyn Fn(usize) -> f64| {
        (p >= 1e-15).then(|| {
            PureState4::from_unnormalized(core::array::from_fn(|k| amps[k] * libm::sqrt(w(k))))
                .expect("nonzero branch")
        })
    };
    PortProbabilities {
        p_a,
        p_b,
        state_a: cond(p_a, &|k| pa_k[k]),
        state_b: cond(p_b, &|k| 1.0 - pa_k[k]),
    }
}

/// Samples which of the four detectors fires.
pub fn detect(psi: &PureState4, s: &MzemSettings, rng: &mut RandomStream) -> DetectionEvent {
    let ports = port_probabilities(psi, s);
    let (port, branch) = if sample_index(&[ports.p_a, ports.p_b], rng) == 0 {
        (Port::A, ports.state_a)
    } else {
        (Port::B, ports.state_b)
    };
    let split = pbs_split(&branch.expect("sampled branch has nonzero probability"));
    let pol = if sample_index(&[split.p_h, split.p_v], rng) == 0 { Pol::H } else { Pol::V };
    DetectionEvent { port, pol }
}

/// Exact probability of each detector for input `psi`.
pub fn detector_probabilities(psi: &PureState4, s: &MzemSettings) -> [f64; 4] {
    let amps = psi.amplitudes();
    let mut out = [0.0; 4];
    for (k, a) in amps.iter().enumerate() {
        let pa = s.port_a_probability(k);
        let pol_bit = k >> 1;
        out[pol_bit] += a.norm_sqr() * pa;
        out[2 + pol_bit] += a.norm_sqr() * (1.0 - pa);
    }
    out
}

/// Extra optical path introduced by moving the double-mirror assembly by `dd`
/// along its symmetry axis.
pub fn path_difference(dd: f64) -> f64 {
    SQRT_2 * dd
}

/// Sampled transverse field on an `n × n` cell-centred grid covering
/// `[-extent, extent]²`. Lengths are in units of the waist.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeProfile {
    grid: Vec<Complex>,
    n: usize,
    extent: f64,
    waist: f64,
}

pub const DEFAULT_GRID: usize = 512;
pub const DEFAULT_EXTENT: f64 = 6.0;

impl ModeProfile {
    /// Wraps samples stored row-major, `grid[iy * n + ix]`. Requires
    /// `Σ|u|²·dA = 1` within 1e-6.
    pub fn from_grid(grid: Vec<Complex>, n: usize, extent: f64, waist: f64) -> Result<Self> {
        if n < 4 || grid.len() != n * n {
            return Err(Error::invalid("grid must be n×n with n ≥ 4"));
        }
        if !(extent > 0.0 && waist > 0.0) {
            return Err(Error::invalid("extent and waist must be positive"));
        }
        let p = Self { grid, n, extent, waist };
        let norm: f64 = p.grid.iter().map(|a| a.norm_sqr()).sum::<f64>() * p.cell() * p.cell();
        if (norm - 1.0).abs() > 1e-6 {
            return Err(Error::invalid(format!("profile norm {norm} differs from 1")));
        }
        Ok(p)
    }

    /// Hermite-Gaussian TEM_mn, `m` nodes along x and `n` along y, with
    /// amplitude `∝ H_m(√2x/w)·H_n(√2y/w)·exp(−(x²+y²)/w²)`. Normalized
    /// discretely on the grid.
    pub fn hermite_gauss(m: u32, n_y: u32, n: usize, extent: f64) -> Result<Self> {
        if n < 4 || extent.is_nan() || extent <= 0.0 {
            return Err(Error::invalid("grid must have n ≥ 4 and positive extent"));
        }
        let h = 2.0 * extent / n as f64;
        let coords: Vec<f64> = (0..n).map(|j| -extent + (j as f64 + 0.5) * h).collect();
        let fx: Vec<f64> = coords.iter().map(|&x| hermite_gauss_1d(m, x)).collect();
        let fy: Vec<f64> = coords.iter().map(|&y| hermite_gauss_1d(n_y, y)).collect();
        let mut grid: Vec<Complex> = Vec::with_capacity(n * n);
        for &vy in &fy {
            for &vx in &fx {
                grid.push(Complex::new(vx * vy, 0.0));
            }
        }
        let norm = libm::sqrt(grid.iter().map(|a| a.norm_sqr()).sum::<f64>() * h * h);
        grid.iter_mut().for_each(|a| *a /= norm);
        Ok(Self { grid, n, extent, waist: 1.0 })
    }

    pub fn tem00(n: usize, extent: f64) -> Result<Self> {
        Self::hermite_gauss(0, 0, n, extent)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn extent(&self) -> f64 {
        self.extent
    }

    pub fn waist(&self) -> f64 {
        self.waist
    }

    pub fn samples(&self) -> &[Complex] {
        &self.grid
    }

    fn cell(&self) -> f64 {
        2.0 * self.extent / self.n as f64
    }

    /// Value at `(x, iy)` by 4-point Lagrange interpolation along the row;
    /// zero outside the grid.
    fn row_value(&self, iy: usize, x: f64) -> Complex {
        let h = self.cell();
        let t = (x + self.extent) / h - 0.5;
        let i0 = libm::floor(t);
        let f = t - i0;
        let i0 = i0 as isize;
        let row = &self.grid[iy * self.n..(iy + 1) * self.n];
        let at = |i: isize| {
            if i < 0 || i >= self.n as isize {
                Complex::new(0.0, 0.0)
            } else {
                row[i as usize]
            }
        };
        let w_m1 = -f * (f - 1.0) * (f - 2.0) / 6.0;
        let w_0 = (f + 1.0) * (f - 1.0) * (f - 2.0) / 2.0;
        let w_1 = -(f + 1.0) * f * (f - 2.0) / 2.0;
        let w_2 = (f + 1.0) * f * (f - 1.0) / 6.0;
        at(i0 - 1) * w_m1 + at(i0) * w_0 + at(i0 + 1) * w_1 + at(i0 + 2) * w_2
    }
}

fn hermite(m: u32, t: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, 2.0 * t);
    if m == 0 {
        return prev;
    }
    for k in 1..m {
        let next = 2.0 * t * cur - 2.0 * k as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

fn hermite_gauss_1d(m: u32, x: f64) -> f64 {
    hermite(m, SQRT_2 * x) * libm::exp(-x * x)
}

/// Overlap `∫∫ u*(x − dx, y)·u(−x − dx, y) dx dy` between the beam displaced
/// by `dx` (waist units) and its mirror image about the ŷ axis. Its modulus
/// is the fringe visibility the MZEM can reach.
///
/// Requires `extent ≥ 4 + 2·|dx|`.
pub fn mirror_overlap(m: &ModeProfile, dx: f64) -> Result<Complex> {
    if !dx.is_finite() {
        return Err(Error::invalid("dx must be finite"));
    }
    if m.extent < 4.0 + 2.0 * dx.abs() - 1e-12 {
        return Err(Error::invalid(format!(
            "grid half-width {} too small for dx = {dx}; need at least {}",
            m.extent,
            4.0 + 2.0 * dx.abs()
        )));
    }
    // substitute x → x + dx: ∫ u*(x)·u(−x − 2dx) dx
    let h = m.cell();
    let mut acc = Complex::new(0.0, 0.0);
    for iy in 0..m.n {
        let row = &m.grid[iy * m.n..(iy + 1) * m.n];
        for (ix, u) in row.iter().enumerate() {
            if u.norm_sqr() == 0.0 {
                continue;
            }
            let x = -m.extent + (ix as f64 + 0.5) * h;
            acc += u.conj() * m.row_value(iy, -x - 2.0 * dx);
        }
    }
    Ok(acc * (h * h))
}

/// `|mirror_overlap|`.
pub fn effective_visibility(m: &ModeProfile, dx: f64) -> Result<f64> {
    mirror_overlap(m, dx).map(|c| c.norm())
}
