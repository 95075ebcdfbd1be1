//! 2x2 transfer matrices mapping `(psi, psi')` across a structure.
//!
//! [`chain_matrix`] multiplies slab propagators and works for any
//! [`SegmentChain`]. [`closed_form_plus`] and [`closed_form_minus`] give
//! the same matrices for the two barrier-well models as explicit
//! trigonometric expressions in the barrier/well wave numbers `p` and `q`;
//! the two routes are independent and are cross-checked in tests.
//!
//! All wave numbers are principal complex square roots, so one code path
//! covers propagating (`E > V`) and evanescent (`E < V`) slabs.

use std::ops::{Mul, Neg};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::potential::{BwParams, Geometry, Kind, SegmentChain};

/// Entries above this magnitude mark a matrix as effectively opaque.
pub const NEAR_OPAQUE: f64 = 1e12;

/// Series branch of the slab propagator below this `|kappa^2| w^2`.
const SERIES_THRESHOLD: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TransferError {
    #[error("closed form for the {expected:?} model called with {got:?} parameters")]
    KindMismatch { expected: Kind, got: Kind },
    #[error("theta must be finite and non-zero, got {0}")]
    BadTheta(f64),
    #[error("matrix entry {index} has imaginary part {imag:e} (real part {re:e})")]
    NotReal { index: usize, re: f64, imag: f64 },
    #[error(transparent)]
    Potential(#[from] crate::potential::PotentialError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransferMatrix {
    pub m11: Complex64,
    pub m12: Complex64,
    pub m21: Complex64,
    pub m22: Complex64,
}

impl TransferMatrix {
    pub fn new(m11: Complex64, m12: Complex64, m21: Complex64, m22: Complex64) -> Self {
        Self { m11, m12, m21, m22 }
    }

    pub fn from_real(m11: f64, m12: f64, m21: f64, m22: f64) -> Self {
        Self::new(m11.into(), m12.into(), m21.into(), m22.into())
    }

    pub fn identity() -> Self {
        Self::from_real(1.0, 0.0, 0.0, 1.0)
    }

    pub fn diag(a: f64, d: f64) -> Self {
        Self::from_real(a, 0.0, 0.0, d)
    }

    pub fn det(&self) -> Complex64 {
        self.m11 * self.m22 - self.m12 * self.m21
    }

    pub fn entries(&self) -> [Complex64; 4] {
        [self.m11, self.m12, self.m21, self.m22]
    }

    pub fn max_abs(&self) -> f64 {
        self.entries().iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_near_opaque(&self) -> bool {
        self.max_abs() > NEAR_OPAQUE
    }

    pub fn is_finite(&self) -> bool {
        self.entries().iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Real parts, after checking every imaginary part is within
    /// `1e-9 * (1 + |entry|)`.
    pub fn real_entries(&self) -> Result<[f64; 4], TransferError> {
        let e = self.entries();
        for (index, z) in e.iter().enumerate() {
            if z.im.abs() > 1e-9 * (1.0 + z.norm()) {
                return Err(TransferError::NotReal {
                    index,
                    re: z.re,
                    imag: z.im,
                });
            }
        }
        Ok([e[0].re, e[1].re, e[2].re, e[3].re])
    }

    /// Largest per-entry relative difference, `|a - b| / max(|a|, |b|)`.
    /// Entries that are both exactly zero count as equal.
    pub fn max_rel_diff(&self, other: &TransferMatrix) -> f64 {
        self.entries()
            .iter()
            .zip(other.entries().iter())
            .map(|(a, b)| {
                let scale = a.norm().max(b.norm());
                if scale == 0.0 {
                    0.0
                } else {
                    (a - b).norm() / scale
                }
            })
            .fold(0.0, f64::max)
    }

    pub fn apply(&self, s: &BoundaryState) -> BoundaryState {
        BoundaryState {
            psi: self.m11 * s.psi + self.m12 * s.dpsi,
            dpsi: self.m21 * s.psi + self.m22 * s.dpsi,
        }
    }
}

impl Mul for TransferMatrix {
    type Output = TransferMatrix;

    /// `self * rhs`: apply `rhs` first.
    fn mul(self, rhs: TransferMatrix) -> TransferMatrix {
        TransferMatrix {
            m11: self.m11 * rhs.m11 + self.m12 * rhs.m21,
            m12: self.m11 * rhs.m12 + self.m12 * rhs.m22,
            m21: self.m21 * rhs.m11 + self.m22 * rhs.m21,
            m22: self.m21 * rhs.m12 + self.m22 * rhs.m22,
        }
    }
}

impl Neg for TransferMatrix {
    type Output = TransferMatrix;

    fn neg(self) -> TransferMatrix {
        TransferMatrix::new(-self.m11, -self.m12, -self.m21, -self.m22)
    }
}

/// Wave function and derivative at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryState {
    pub psi: Complex64,
    pub dpsi: Complex64,
}

impl BoundaryState {
    pub fn new(psi: Complex64, dpsi: Complex64) -> Self {
        Self { psi, dpsi }
    }
}

/// `p` inside the barriers, `q` inside the wells, `k` outside.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveNumbers {
    pub p: Complex64,
    pub q: Complex64,
    pub k: f64,
}

impl WaveNumbers {
    pub fn new(alpha: f64, g: &Geometry, energy: f64) -> Self {
        Self {
            p: Complex64::from(energy - alpha * g.h).sqrt(),
            q: Complex64::from(energy + alpha * g.d).sqrt(),
            k: energy.sqrt(),
        }
    }
}

/// Propagator across one slab of constant potential `value`.
pub fn segment_matrix(width: f64, value: f64, energy: f64) -> TransferMatrix {
    let kappa2 = Complex64::from(energy - value);
    let x2 = kappa2 * width * width;
    if x2.norm() < SERIES_THRESHOLD {
        let diag = 1.0 - x2 / 2.0 + x2 * x2 / 24.0;
        let sinc = 1.0 - x2 / 6.0 + x2 * x2 / 120.0;
        return TransferMatrix::new(diag, sinc * width, -kappa2 * width * sinc, diag);
    }
    let kappa = kappa2.sqrt();
    let (s, c) = ((kappa * width).sin(), (kappa * width).cos());
    TransferMatrix::new(c, s / kappa, -kappa * s, c)
}

/// Ordered product `M_n ... M_1`, leftmost segment applied first.
pub fn chain_matrix(chain: &SegmentChain, energy: f64) -> TransferMatrix {
    chain
        .segments()
        .iter()
        .fold(TransferMatrix::identity(), |acc, s| {
            segment_matrix(s.width, s.value, energy) * acc
        })
}

fn require_kind(params: &BwParams, expected: Kind) -> Result<(), TransferError> {
    if params.kind != expected {
        return Err(TransferError::KindMismatch {
            expected,
            got: params.kind,
        });
    }
    params.validate()?;
    Ok(())
}

/// Closed-form matrix of the Plus model.
pub fn closed_form_plus(params: &BwParams, energy: f64) -> Result<TransferMatrix, TransferError> {
    require_kind(params, Kind::Plus)?;
    Ok(plus_from_geometry(params.alpha, &params.geometry(), energy))
}

/// Closed-form matrix of the Minus model.
pub fn closed_form_minus(params: &BwParams, energy: f64) -> Result<TransferMatrix, TransferError> {
    require_kind(params, Kind::Minus)?;
    Ok(minus_from_geometry(params.alpha, &params.geometry(), energy))
}

/// Dispatches to the closed form matching `kind`, for raw `(h, l, d, r)`.
pub fn closed_form(kind: Kind, alpha: f64, g: &Geometry, energy: f64) -> TransferMatrix {
    match kind {
        Kind::Plus => plus_from_geometry(alpha, g, energy),
        Kind::Minus => minus_from_geometry(alpha, g, energy),
    }
}

struct Trig {
    p: Complex64,
    q: Complex64,
    sp: Complex64,
    cp: Complex64,
    sq: Complex64,
    cq: Complex64,
    s2p: Complex64,
    c2p: Complex64,
    s2q: Complex64,
    c2q: Complex64,
    ratio: Complex64,
}

impl Trig {
    fn new(alpha: f64, g: &Geometry, energy: f64) -> Self {
        let w = WaveNumbers::new(alpha, g, energy);
        let (pl, qr) = (w.p * g.l, w.q * g.r);
        Self {
            p: w.p,
            q: w.q,
            sp: pl.sin(),
            cp: pl.cos(),
            sq: qr.sin(),
            cq: qr.cos(),
            s2p: (pl * 2.0).sin(),
            c2p: (pl * 2.0).cos(),
            s2q: (qr * 2.0).sin(),
            c2q: (qr * 2.0).cos(),
            ratio: w.p / w.q + w.q / w.p,
        }
    }
}

fn plus_from_geometry(alpha: f64, g: &Geometry, energy: f64) -> TransferMatrix {
    let t = Trig::new(alpha, g, energy);
    let Trig { p, q, sp, cp, sq, cq, s2p, c2p, s2q, .. } = t;
    let (cq2, sq2, cp2, sp2) = (cq * cq, sq * sq, cp * cp, sp * sp);

    let m11 = c2p * cq2 - (p / q * 3.0 + q / p) * s2p * s2q / 4.0
        + ((p * p) / (q * q) * sp2 - cp2) * sq2;
    let m12 = s2p * cq2 / p + cp2 * s2q / q
        - t.ratio * (sp * cq / p + cp * sq / q) * sp * sq;
    let m21 = -p * s2p * cq2 - q * cp2 * s2q + t.ratio * (p * sp * cq + q * cp * sq) * sp * sq;
    let m22 = c2p * cq2 - (p / q + q / p * 3.0) * s2p * s2q / 4.0
        + ((q * q) / (p * p) * sp2 - cp2) * sq2;
    TransferMatrix::new(m11, m12, m21, m22)
}

fn minus_from_geometry(alpha: f64, g: &Geometry, energy: f64) -> TransferMatrix {
    let t = Trig::new(alpha, g, energy);
    let Trig { p, q, sp, cp, s2p, c2p, s2q, c2q, .. } = t;
    let (cp2, sp2) = (cp * cp, sp * sp);

    let diag = c2p * c2q - t.ratio * s2p * s2q / 2.0;
    let m12 = s2p * c2q / p + (p / q * cp2 - q / p * sp2) * s2q / p;
    let m21 = -p * s2p * c2q + p * (p / q * sp2 - q / p * cp2) * s2q;
    TransferMatrix::new(diag, m12, m21, diag)
}

/// Lower-left entry as a product of two factors. The Plus model's first
/// factor vanishes on one cancellation branch, the Minus model's on
/// another; the second factor is shared.
pub fn lambda21_factored(params: &BwParams, energy: f64) -> Complex64 {
    let t = Trig::new(params.alpha, &params.geometry(), energy);
    let shared = t.p * t.sp * t.cq + t.q * t.cp * t.sq;
    let first = match params.kind {
        Kind::Plus => t.ratio * t.sp * t.sq - t.cp * t.cq * 2.0,
        Kind::Minus => (t.p / t.q * t.sp * t.sq - t.cp * t.cq) * 2.0,
    };
    first * shared
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LimitBranch {
    One,
    Two,
}

/// Zero-range limits of the conditioned matrices: `-I` on branch One,
/// `diag(theta^2, theta^-2)` for Plus on branch Two, `I` for Minus on
/// branch Two.
pub fn limit_matrix(
    kind: Kind,
    branch: LimitBranch,
    theta: f64,
) -> Result<TransferMatrix, TransferError> {
    match (kind, branch) {
        (_, LimitBranch::One) => Ok(-TransferMatrix::identity()),
        (Kind::Minus, LimitBranch::Two) => Ok(TransferMatrix::identity()),
        (Kind::Plus, LimitBranch::Two) => {
            if theta == 0.0 || !theta.is_finite() {
                return Err(TransferError::BadTheta(theta));
            }
            let t2 = theta * theta;
            Ok(TransferMatrix::diag(t2, 1.0 / t2))
        }
    }
}
