//! The `eps -> 0` limit: classification of strengths, the
//! discontinuity factor `theta`, and finite-`eps` peak convergence.
//!
//! On the shared resonance set the Plus model's limit matrix is
//! `diag(theta^2, theta^-2)`, i.e. a point interaction with
//! `psi(+0) = theta psi(-0)` and `psi'(-0) = theta psi'(+0)`. Its
//! transmission `4 / (4 + (theta^2 - theta^-2)^2)` is below one, whereas the
//! Minus model's limit there is the identity.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::potential::{BwParams, Kind};
use crate::resonance::{peak_refine, ResonanceError, ResonanceSet, SetLabel, POLE_EPS};
use crate::scattering::amplitudes;
use crate::transfer::{limit_matrix, BoundaryState, LimitBranch, TransferMatrix};

/// `cosh(sqrt(2 a s+ / (1 + 1/b))) / cos(sqrt(2 a s- / (1 + b)))`,
/// continued to `alpha < 0` through complex arguments.
pub fn theta(alpha: f64, b: f64, sigma_plus: f64, sigma_minus: f64) -> Result<f64, ResonanceError> {
    if !(b > 0.0) || !(sigma_plus >= 0.0) || !(sigma_minus >= 0.0) {
        return Err(ResonanceError::BadInput(format!(
            "theta needs b > 0 and sigma >= 0, got b = {b}, s+ = {sigma_plus}, s- = {sigma_minus}"
        )));
    }
    let x = Complex64::from(2.0 * alpha * sigma_plus / (1.0 + 1.0 / b)).sqrt();
    let y = Complex64::from(2.0 * alpha * sigma_minus / (1.0 + b)).sqrt();
    let den = y.cos();
    if den.norm() < POLE_EPS {
        return Err(ResonanceError::Pole(alpha));
    }
    let z = x.cosh() / den;
    if z.im.abs() > 1e-9 * (1.0 + z.re.abs()) {
        return Err(ResonanceError::NotReal { at: alpha, imag: z.im });
    }
    Ok(z.re)
}

/// Two-sided boundary condition of the limiting point interaction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryMap {
    theta: f64,
}

impl BoundaryMap {
    pub fn new(theta: f64) -> Result<Self, ResonanceError> {
        if theta == 0.0 || !theta.is_finite() {
            return Err(ResonanceError::BadInput(format!(
                "theta must be finite and non-zero, got {theta}"
            )));
        }
        Ok(Self { theta })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// `(psi(-0), psi'(+0)) -> (psi(+0), psi'(-0))`.
    pub fn apply(&self, psi_left: Complex64, dpsi_right: Complex64) -> (Complex64, Complex64) {
        (psi_left * self.theta, dpsi_right * self.theta)
    }

    /// `diag(theta, 1/theta)`: maps `(psi, psi')` at `-0` to `+0`.
    pub fn matrix(&self) -> TransferMatrix {
        TransferMatrix::diag(self.theta, 1.0 / self.theta)
    }

    pub fn inverse(&self) -> BoundaryMap {
        BoundaryMap {
            theta: 1.0 / self.theta,
        }
    }

    pub fn transport(&self, left: &BoundaryState) -> BoundaryState {
        self.matrix().apply(left)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum Transparency {
    TotalTransmission { set: SetLabel },
    PartialTransmission { theta: f64, t_limit: f64 },
    Opaque,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointClassification {
    pub alpha: f64,
    pub kind_label: Transparency,
}

/// Limit transmission of the Plus model at a shared-set root.
pub fn partial_limit(theta: f64) -> Result<f64, ResonanceError> {
    let m = limit_matrix(Kind::Plus, LimitBranch::Two, theta)
        .map_err(|e| ResonanceError::BadInput(e.to_string()))?;
    // v = 0 for a diagonal matrix, so any k gives the same probability
    Ok(amplitudes(&m, 1.0, 0.0, 0.0)?.trans)
}

/// Classifies `alpha` against precomputed sets (`model` is the kind's own
/// set, `prime` the shared one).
pub fn classify(
    kind: Kind,
    alpha: f64,
    model: &ResonanceSet,
    prime: &ResonanceSet,
    match_tol: f64,
) -> Result<PointClassification, ResonanceError> {
    if !model.contains(alpha) || !prime.contains(alpha) {
        return Err(ResonanceError::BadInput(format!(
            "alpha = {alpha} outside the precomputed window {:?}",
            model.window
        )));
    }
    let model_label = SetLabel::for_kind(kind);
    let hit = |set: &ResonanceSet| {
        set.nearest(alpha)
            .filter(|r| (r.alpha - alpha).abs() <= match_tol)
            .copied()
    };
    let kind_label = if alpha == 0.0 || hit(model).is_some() {
        Transparency::TotalTransmission { set: model_label }
    } else if let Some(root) = hit(prime) {
        match kind {
            Kind::Minus => Transparency::TotalTransmission {
                set: SetLabel::SigmaPrime,
            },
            Kind::Plus => {
                let th = match root.theta {
                    Some(t) => t,
                    None => {
                        let (sp, sm) = crate::potential::sigma_split(root.alpha, prime.sigma);
                        theta(root.alpha, prime.b, sp, sm)?
                    }
                };
                Transparency::PartialTransmission {
                    theta: th,
                    t_limit: partial_limit(th)?,
                }
            }
        }
    } else {
        Transparency::Opaque
    };
    Ok(PointClassification { alpha, kind_label })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub eps: f64,
    pub alpha_peak: f64,
    pub t_peak: f64,
    pub alpha_drift: f64,
}

/// Finite-`eps` peak nearest `alpha_limit` for each `eps`, in the given
/// (strictly decreasing) order. `template.alpha` and `template.eps` are
/// ignored.
pub fn converge_study(
    template: &BwParams,
    alpha_limit: f64,
    k: f64,
    eps_list: &[f64],
    radius: f64,
) -> Result<Vec<ConvergenceRow>, ResonanceError> {
    if eps_list.is_empty() {
        return Err(ResonanceError::BadInput("eps list is empty".into()));
    }
    if eps_list.iter().any(|e| !(*e > 0.0)) {
        return Err(ResonanceError::BadInput("every eps must be > 0".into()));
    }
    if eps_list.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(ResonanceError::BadInput(
            "eps list must be strictly decreasing".into(),
        ));
    }
    eps_list
        .iter()
        .map(|&eps| {
            let peak = peak_refine(&template.with_eps(eps), k, alpha_limit, radius)?;
            Ok(ConvergenceRow {
                eps,
                alpha_peak: peak.alpha,
                t_peak: peak.trans,
                alpha_drift: (peak.alpha - alpha_limit).abs(),
            })
        })
        .collect()
}

/// Linear extrapolation of `T_peak` to `eps = 0` from the last two rows.
pub fn richardson_t_peak(rows: &[ConvergenceRow]) -> Option<f64> {
    let [.., a, b] = rows else {
        return None;
    };
    Some((a.eps * b.t_peak - b.eps * a.t_peak) / (a.eps - b.eps))
}
