//! Reference computations built from explicit kets and matrices, without the
//! library's circuits, tables or detector model. Shared by the statistical
//! tests and the acceptance suite.

#![allow(dead_code)]

use std::f64::consts::FRAC_1_SQRT_2 as R2;

use photonkd_core::Complex;

pub type Ket2 = [Complex; 2];
pub type Vec4 = [Complex; 4];
pub type Mat2 = [[Complex; 2]; 2];
pub type Mat4 = [[Complex; 4]; 4];

const O: Complex = Complex::new(0.0, 0.0);
const ONE: Complex = Complex::new(1.0, 0.0);

fn c(re: f64, im: f64) -> Complex {
    Complex::new(re, im)
}

pub const H: Ket2 = [ONE, O];
pub const V: Ket2 = [O, ONE];
pub const D: Ket2 = [Complex::new(R2, 0.0), Complex::new(R2, 0.0)];
pub const A: Ket2 = [Complex::new(R2, 0.0), Complex::new(-R2, 0.0)];
pub const R: Ket2 = [Complex::new(R2, 0.0), Complex::new(0.0, R2)];
pub const L: Ket2 = [Complex::new(R2, 0.0), Complex::new(0.0, -R2)];

/// `|p⟩ ⊗ |t⟩` with amplitude index `2·pol + tm`.
pub fn kron(p: Ket2, t: Ket2) -> Vec4 {
    [p[0] * t[0], p[0] * t[1], p[1] * t[0], p[1] * t[1]]
}

fn sup(a: Vec4, sign: f64, b: Vec4) -> Vec4 {
    core::array::from_fn(|i| (a[i] + b[i] * sign) * R2)
}

/// The twenty states of the five bases, written out by hand.
pub fn listed(basis: usize) -> [Vec4; 4] {
    match basis {
        0 => [kron(H, H), kron(H, V), kron(V, H), kron(V, V)],
        1 => [kron(D, D), kron(D, A), kron(A, D), kron(A, A)],
        2 => [kron(R, R), kron(R, L), kron(L, R), kron(L, L)],
        3 => [
            sup(kron(H, R), 1.0, kron(V, L)),
            sup(kron(H, L), 1.0, kron(V, R)),
            sup(kron(H, R), -1.0, kron(V, L)),
            sup(kron(H, L), -1.0, kron(V, R)),
        ],
        4 => [
            sup(kron(R, H), 1.0, kron(L, V)),
            sup(kron(R, H), -1.0, kron(L, V)),
            sup(kron(L, H), 1.0, kron(R, V)),
            sup(kron(L, H), -1.0, kron(R, V)),
        ],
        _ => panic!("basis index {basis} out of range"),
    }
}

pub fn inner(a: &Vec4, b: &Vec4) -> Complex {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn prob(a: &Vec4, b: &Vec4) -> f64 {
    inner(a, b).norm_sqr()
}

pub fn apply(m: &Mat4, v: &Vec4) -> Vec4 {
    core::array::from_fn(|i| (0..4).map(|j| m[i][j] * v[j]).sum())
}

pub fn mul(a: &Mat4, b: &Mat4) -> Mat4 {
    core::array::from_fn(|i| core::array::from_fn(|j| (0..4).map(|k| a[i][k] * b[k][j]).sum()))
}

pub fn adjoint(a: &Mat4) -> Mat4 {
    core::array::from_fn(|i| core::array::from_fn(|j| a[j][i].conj()))
}

pub fn kron_op(p: &Mat2, t: &Mat2) -> Mat4 {
    core::array::from_fn(|i| core::array::from_fn(|j| p[i / 2][j / 2] * t[i % 2][j % 2]))
}

pub const I2: Mat2 = [[ONE, O], [O, ONE]];

pub fn had() -> Mat2 {
    [[c(R2, 0.0), c(R2, 0.0)], [c(R2, 0.0), c(-R2, 0.0)]]
}

pub fn phase_s() -> Mat2 {
    [[ONE, O], [O, c(0.0, 1.0)]]
}

/// Polarization-controlled TM rotation with the Dove prism at π/8.
pub fn sagnac() -> Mat4 {
    let u = [[c(R2, 0.0), c(R2, 0.0)], [c(-R2, 0.0), c(R2, 0.0)]];
    let mut m = [[O; 4]; 4];
    for i in 0..2 {
        for j in 0..2 {
            m[i][j] = u[i][j];
            m[2 + i][2 + j] = u[j][i].conj();
        }
    }
    m
}

pub fn identity() -> Mat4 {
    kron_op(&I2, &I2)
}

/// Unitary that carries the B2 product states onto the states of `basis`.
fn basis_change(basis: usize) -> Mat4 {
    // Stages listed in the order the photon meets them.
    let stages: Vec<Mat4> = match basis {
        0 => vec![kron_op(&had(), &had())],
        1 => vec![],
        2 => vec![kron_op(&phase_s(), &phase_s())],
        3 => vec![sagnac(), kron_op(&I2, &had()), kron_op(&I2, &phase_s())],
        4 => vec![sagnac(), kron_op(&phase_s(), &I2), kron_op(&I2, &had())],
        _ => panic!("basis index {basis} out of range"),
    };
    stages.iter().fold(identity(), |acc, s| mul(s, &acc))
}

/// Bob's full measurement unitary for `basis`: undo the basis change, then
/// Hadamard on both qubits, landing in the canonical basis.
pub fn measurement(basis: usize) -> Mat4 {
    mul(&kron_op(&had(), &had()), &adjoint(&basis_change(basis)))
}

/// Label Bob reads for each canonical outcome `k`.
pub fn decode(basis: usize) -> [usize; 4] {
    let m = measurement(basis);
    let states = listed(basis);
    let mut out = [usize::MAX; 4];
    for (label, s) in states.iter().enumerate() {
        let img = apply(&m, s);
        let k = (0..4).find(|&k| img[k].norm_sqr() > 1.0 - 1e-9).expect("measurement lands on a canonical state");
        out[k] = label;
    }
    out
}

/// Per-state fringe visibilities of the two interferometer exits, φ = 0.
#[derive(Clone, Copy, Debug)]
pub struct Exits {
    pub va: [f64; 4],
    pub vb: [f64; 4],
    pub bs: f64,
}

impl Exits {
    pub fn ideal() -> Self {
        Self { va: [1.0; 4], vb: [1.0; 4], bs: 0.5 }
    }

    /// Probability that canonical state `k` leaves by the exit meant for the
    /// other parity. Even states are meant for exit A.
    pub fn wrong_exit(&self, k: usize) -> f64 {
        let even = k == 0 || k == 3;
        let s = if even { 1.0 } else { -1.0 };
        let ia = self.bs * (1.0 + self.va[k] * s);
        let ib = (1.0 - self.bs) * (1.0 - self.vb[k] * s);
        let pa = ia / (ia + ib);
        if even {
            1.0 - pa
        } else {
            pa
        }
    }
}

/// Distribution of the canonical index Bob infers after measuring `psi` in
/// `basis`. A wrong exit keeps the polarization and flips the TM bit.
pub fn bob_canonical(basis: usize, psi: &Vec4, exits: &Exits) -> [f64; 4] {
    let img = apply(&measurement(basis), psi);
    let mut out = [0.0; 4];
    for k in 0..4 {
        let p = img[k].norm_sqr();
        let w = exits.wrong_exit(k);
        out[k] += p * (1.0 - w);
        out[k ^ 1] += p * w;
    }
    out
}

/// Exact sifted `(symbol, bit)` error rates, enumerating Alice's basis and
/// label, Eve's basis and outcome, and Bob's outcome.
pub fn sifted_error_rates(bases: &[usize], eve: Option<&[usize]>, exits: &Exits) -> (f64, f64) {
    let mut sym = 0.0;
    let mut bit = 0.0;
    let w_alice = 1.0 / (4 * bases.len()) as f64;
    for &b in bases {
        let dec = decode(b);
        for (label, a) in listed(b).iter().enumerate() {
            let mut branches: Vec<(f64, Vec4)> = Vec::new();
            match eve {
                None => branches.push((1.0, *a)),
                Some(eb) => {
                    for &e in eb {
                        for s in listed(e) {
                            branches.push((prob(&s, a) / eb.len() as f64, s));
                        }
                    }
                }
            }
            for (pw, psi) in branches {
                for (k, pk) in bob_canonical(b, &psi, exits).iter().enumerate() {
                    let got = dec[k];
                    let w = w_alice * pw * pk;
                    if got != label {
                        sym += w;
                    }
                    bit += w * (got ^ label).count_ones() as f64 / 2.0;
                }
            }
        }
    }
    (sym, bit)
}

/// `|observed − p| ≤ k·σ` for a binomial proportion over `n` trials. With
/// `p` at 0 or 1 the observation must match exactly.
pub fn within_sigma(observed: f64, p: f64, n: u64, k: f64) -> bool {
    let sigma = (p * (1.0 - p) / n as f64).sqrt();
    (observed - p).abs() <= k * sigma + 1e-12
}

fn hermite_gauss_1d(m: u32, x: f64) -> f64 {
    let t = 2f64.sqrt() * x;
    let h = match m {
        0 => 1.0,
        1 => 2.0 * t,
        2 => 4.0 * t * t - 2.0,
        _ => panic!("order {m} not tabulated"),
    };
    h * (-x * x).exp()
}

/// `∫ u(x − dx)·u(−x − dx) dx / ∫ u²` for the 1-D Hermite-Gaussian of order
/// `m` (waist 1), by composite Simpson on a fine grid. The y factor of a
/// separable mode integrates to one.
pub fn mirror_overlap_quadrature(m: u32, dx: f64) -> f64 {
    let (lo, hi, n) = (-14.0, 14.0, 40_000usize);
    let h = (hi - lo) / n as f64;
    let simpson = |f: &dyn Fn(f64) -> f64| {
        let mut s = f(lo) + f(hi);
        for i in 1..n {
            s += f(lo + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h / 3.0
    };
    let num = simpson(&|x| hermite_gauss_1d(m, x - dx) * hermite_gauss_1d(m, -x - dx));
    let den = simpson(&|x| hermite_gauss_1d(m, x).powi(2));
    num / den
}
