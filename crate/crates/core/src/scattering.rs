//! Scattering amplitudes and transmission scans.
//!
//! Probabilities come from the matrix invariants
//! `u = m11 - m22`, `v = k m12 + m21 / k`:
//!
//! ```text
//!   T = 4 / (4 + u^2 + v^2),   R = (u^2 + v^2) / (4 + u^2 + v^2)
//! ```
//!
//! which avoids the phase factors carried by the complex amplitudes.

use std::io::{self, Write};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::format::{fmt_g, CSV_DIGITS};
use crate::potential::{realize, BwParams, PotentialError};
use crate::transfer::{chain_matrix, TransferMatrix};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScatteringError {
    #[error("wave number must be positive and finite, got {0}")]
    BadWaveNumber(f64),
    #[error("transfer matrix is not unimodular: |det - 1| = {0:e}")]
    NotUnimodular(f64),
    #[error("transfer matrix has non-finite entries")]
    NonFinite,
    #[error("invalid sweep: {0}")]
    BadSweep(String),
    #[error(transparent)]
    Potential(#[from] PotentialError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScatteringResult {
    pub rl: Complex64,
    pub rr: Complex64,
    pub tl: Complex64,
    pub tr: Complex64,
    /// Reflection probability.
    pub refl: f64,
    /// Transmission probability.
    pub trans: f64,
    /// Entries exceeded [`crate::transfer::NEAR_OPAQUE`]; `trans` is then 0.
    pub near_opaque: bool,
}

/// Amplitudes for plane waves incident from either side of a structure
/// occupying `[x1, x2]` with transfer matrix `m`.
pub fn amplitudes(
    m: &TransferMatrix,
    k: f64,
    x1: f64,
    x2: f64,
) -> Result<ScatteringResult, ScatteringError> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(ScatteringError::BadWaveNumber(k));
    }
    if !m.is_finite() {
        return Err(ScatteringError::NonFinite);
    }
    let i = Complex64::i();
    if m.is_near_opaque() {
        return Ok(ScatteringResult {
            rl: -(i * 2.0 * k * x1).exp(),
            rr: -(-i * 2.0 * k * x2).exp(),
            tl: Complex64::new(0.0, 0.0),
            tr: Complex64::new(0.0, 0.0),
            refl: 1.0,
            trans: 0.0,
            near_opaque: true,
        });
    }
    let det_err = (m.det() - 1.0).norm();
    let scale = m.max_abs();
    if det_err > 1e-8 * (1.0 + scale * scale) {
        return Err(ScatteringError::NotUnimodular(det_err));
    }

    let TransferMatrix { m11, m12, m21, m22 } = *m;
    let d = m11 + m22 - i * (m12 * k - m21 / k);
    let v = m12 * k + m21 / k;
    let u = m11 - m22;
    let rl = (m22 - m11 - i * v) / d * (i * 2.0 * k * x1).exp();
    let rr = (m11 - m22 - i * v) / d * (-i * 2.0 * k * x2).exp();
    let t = 2.0 / d * (i * k * (x1 - x2)).exp();

    let uv2 = u.norm_sqr() + v.norm_sqr();
    Ok(ScatteringResult {
        rl,
        rr,
        tl: t,
        tr: t,
        refl: uv2 / (4.0 + uv2),
        trans: 4.0 / (4.0 + uv2),
        near_opaque: false,
    })
}

/// Full scattering solution for the model described by `params`.
pub fn scatter(params: &BwParams, k: f64) -> Result<ScatteringResult, ScatteringError> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(ScatteringError::BadWaveNumber(k));
    }
    let chain = realize(params)?;
    let m = chain_matrix(&chain, k * k);
    amplitudes(&m, k, chain.x_left(), chain.x_right())
}

pub fn transmissivity(params: &BwParams, k: f64) -> Result<f64, ScatteringError> {
    scatter(params, k).map(|r| r.trans)
}

/// `(u, v)` for the model at `(params, k)`, real parts only.
pub fn uv(params: &BwParams, k: f64) -> Result<(f64, f64), ScatteringError> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(ScatteringError::BadWaveNumber(k));
    }
    let m = chain_matrix(&realize(params)?, k * k);
    Ok(((m.m11 - m.m22).re, (m.m12 * k + m.m21 / k).re))
}

/// Inclusive uniform grid of `steps` points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl Sweep {
    pub fn new(min: f64, max: f64, steps: usize) -> Result<Self, ScatteringError> {
        if !(min.is_finite() && max.is_finite()) || min > max {
            return Err(ScatteringError::BadSweep(format!(
                "need finite min <= max, got [{min}, {max}]"
            )));
        }
        if steps == 0 {
            return Err(ScatteringError::BadSweep("steps must be >= 1".into()));
        }
        if steps == 1 && min != max {
            return Err(ScatteringError::BadSweep(
                "a single step needs min == max".into(),
            ));
        }
        Ok(Self { min, max, steps })
    }

    pub fn point(&self, i: usize) -> f64 {
        if self.steps == 1 {
            return self.min;
        }
        if i + 1 == self.steps {
            return self.max;
        }
        self.min + (self.max - self.min) * i as f64 / (self.steps - 1) as f64
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.steps).map(|i| self.point(i)).collect()
    }
}

/// Transmission versus strength at fixed `k`; `template.alpha` is ignored.
pub fn scan_alpha(
    template: &BwParams,
    k: f64,
    alpha_min: f64,
    alpha_max: f64,
    steps: usize,
) -> Result<Vec<(f64, f64)>, ScatteringError> {
    if steps < 2 {
        return Err(ScatteringError::BadSweep("steps must be >= 2".into()));
    }
    let sweep = Sweep::new(alpha_min, alpha_max, steps)?;
    sweep
        .points()
        .into_par_iter()
        .map(|a| transmissivity(&template.with_alpha(a), k).map(|t| (a, t)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransmissionGrid {
    pub alphas: Vec<f64>,
    pub ks: Vec<f64>,
    /// `values[i][j]` is `T(alphas[i], ks[j])`.
    pub values: Vec<Vec<f64>>,
}

impl TransmissionGrid {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i][j]
    }

    /// `alpha,k,T,log10T`, alpha-major.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> io::Result<()> {
        writeln!(w, "alpha,k,T,log10T")?;
        for (a, row) in self.alphas.iter().zip(&self.values) {
            for (k, t) in self.ks.iter().zip(row) {
                write_csv_row(w, *a, *k, *t)?;
            }
        }
        Ok(())
    }
}

pub(crate) fn write_csv_row<W: Write>(w: &mut W, alpha: f64, k: f64, t: f64) -> io::Result<()> {
    let log = if t > 0.0 { t.log10() } else { f64::NEG_INFINITY };
    writeln!(
        w,
        "{},{},{},{}",
        fmt_g(alpha, CSV_DIGITS),
        fmt_g(k, CSV_DIGITS),
        fmt_g(t, CSV_DIGITS),
        fmt_g(log, CSV_DIGITS)
    )
}

/// Row-major `T(alpha, k)` over two sweeps.
pub fn grid(
    template: &BwParams,
    alphas: Sweep,
    ks: Sweep,
) -> Result<TransmissionGrid, ScatteringError> {
    let alpha_pts = alphas.points();
    let k_pts = ks.points();
    if let Some(bad) = k_pts.iter().find(|k| !(**k > 0.0)) {
        return Err(ScatteringError::BadWaveNumber(*bad));
    }
    let values = alpha_pts
        .par_iter()
        .map(|&a| {
            let p = template.with_alpha(a);
            k_pts
                .iter()
                .map(|&k| transmissivity(&p, k))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(TransmissionGrid {
        alphas: alpha_pts,
        ks: k_pts,
        values,
    })
}

/// Largest `k` for which the barriers (or, for `alpha < 0`, the
/// inverted wells) still exceed the incident energy.
pub fn subbarrier_bound(alpha: f64, c1: f64, c2: f64, eps: f64) -> f64 {
    if alpha > 0.0 {
        (2.0 * alpha / (c1 * (c1 + c2))).sqrt() / eps
    } else if alpha < 0.0 {
        (2.0 * alpha.abs() / (c2 * (c1 + c2))).sqrt() / eps
    } else {
        f64::INFINITY
    }
}
