//! Resonance conditions and their roots.
//!
//! In the zero-range limit the barrier and well phases stay finite:
//!
//! ```text
//!   p l -> i sqrt(2 alpha s+ / (1 + 1/b)),    q r -> sqrt(2 alpha s- / (1 + b))
//! ```
//!
//! and the cancellation conditions on the lower-left matrix entry become
//! three transcendental equations in the strength `alpha` alone:
//!
//! ```text
//!   Plus:   (sqrt(b s-/s+) - sqrt(s+/(b s-))) tanh(A) tan(B) = 2
//!   Minus:  tanh(A) tan(B) = -sqrt(b s-/s+)
//!   Prime:  tanh(A) = sqrt(b s-/s+) tan(B)
//! ```
//!
//! with `A = sqrt(2 alpha s+ / (1 + 1/b))`, `B = sqrt(2 alpha s- / (1 + b))`.
//! For `alpha < 0` both roots are imaginary and the equations are
//! continued analytically through complex `tanh`/`tan`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::potential::{sigma_split, BwParams, Kind, PotentialError};
use crate::scattering::{transmissivity, uv, ScatteringError};
use crate::transfer::WaveNumbers;
use crate::zerolimit::theta;

/// `|cos|` below this counts as sitting on a `tan` pole.
pub const POLE_EPS: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ResonanceError {
    #[error("pole of the residual at alpha = {0}")]
    Pole(f64),
    #[error("residual at {at} is not real: imaginary part {imag:e}")]
    NotReal { at: f64, imag: f64 },
    #[error("grid too coarse: roots {a} and {b} closer than one cell ({cell:e})")]
    WindowTooCoarse { a: f64, b: f64, cell: f64 },
    #[error("no transmission peak in [{lo}, {hi}]")]
    NoPeak { lo: f64, hi: f64 },
    #[error("invalid input: {0}")]
    BadInput(String),
    #[error(transparent)]
    Scattering(#[from] ScatteringError),
    #[error(transparent)]
    Potential(#[from] PotentialError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SetLabel {
    SigmaPlus,
    SigmaMinus,
    SigmaPrime,
}

impl SetLabel {
    pub fn for_kind(kind: Kind) -> Self {
        match kind {
            Kind::Plus => SetLabel::SigmaPlus,
            Kind::Minus => SetLabel::SigmaMinus,
        }
    }
}

/// Which limiting equation a residual belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LimitEquation {
    Plus,
    Minus,
    Prime,
}

impl LimitEquation {
    pub fn for_kind(kind: Kind) -> Self {
        match kind {
            Kind::Plus => LimitEquation::Plus,
            Kind::Minus => LimitEquation::Minus,
        }
    }

    pub fn residual(self, alpha: f64, b: f64, sigma: f64) -> Result<f64, ResonanceError> {
        match self {
            LimitEquation::Plus => f_plus(alpha, b, sigma),
            LimitEquation::Minus => f_minus(alpha, b, sigma),
            LimitEquation::Prime => f_prime(alpha, b, sigma),
        }
    }
}

/// The limiting phases before the `sqrt(sigma)` factors are applied:
/// `a = sqrt(2 alpha / (1 + 1/b))`, `c = sqrt(2 alpha / (1 + b))`.
struct Phases {
    sp: f64,
    sm: f64,
    a: Complex64,
    c: Complex64,
}

impl Phases {
    fn new(alpha: f64, b: f64, sigma: f64) -> Result<Self, ResonanceError> {
        if !(b > 0.0 && b.is_finite()) {
            return Err(ResonanceError::BadInput(format!("b must be > 0, got {b}")));
        }
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(ResonanceError::BadInput(format!(
                "sigma must be >= 0, got {sigma}"
            )));
        }
        if !alpha.is_finite() {
            return Err(ResonanceError::BadInput(format!(
                "alpha must be finite, got {alpha}"
            )));
        }
        let (sp, sm) = sigma_split(alpha, sigma);
        Ok(Self {
            sp,
            sm,
            a: Complex64::from(2.0 * alpha / (1.0 + 1.0 / b)).sqrt(),
            c: Complex64::from(2.0 * alpha / (1.0 + b)).sqrt(),
        })
    }

    /// `A = sqrt(s+) a`.
    fn big_a(&self) -> Complex64 {
        self.a * self.sp.sqrt()
    }

    /// `B = sqrt(s-) c`.
    fn big_b(&self) -> Complex64 {
        self.c * self.sm.sqrt()
    }
}

fn tan_checked(z: Complex64, alpha: f64) -> Result<Complex64, ResonanceError> {
    if z.cos().norm() < POLE_EPS {
        return Err(ResonanceError::Pole(alpha));
    }
    Ok(ctan(z))
}

fn tanh_checked(z: Complex64, alpha: f64) -> Result<Complex64, ResonanceError> {
    if z.cosh().norm() < POLE_EPS {
        return Err(ResonanceError::Pole(alpha));
    }
    Ok(ctanh(z))
}

/// `tan(sqrt(s) z) / sqrt(s)`, continuous at `s = 0`.
fn tan_over_root(s: f64, z: Complex64, alpha: f64) -> Result<Complex64, ResonanceError> {
    if s == 0.0 {
        Ok(z)
    } else {
        Ok(tan_checked(z * s.sqrt(), alpha)? / s.sqrt())
    }
}

/// `tanh(sqrt(s) z) / sqrt(s)`, continuous at `s = 0`.
fn tanh_over_root(s: f64, z: Complex64, alpha: f64) -> Result<Complex64, ResonanceError> {
    if s == 0.0 {
        Ok(z)
    } else {
        Ok(tanh_checked(z * s.sqrt(), alpha)? / s.sqrt())
    }
}

/// `sin/cos`; the library `tan` overflows to NaN next to real poles.
fn ctan(z: Complex64) -> Complex64 {
    if z.im == 0.0 {
        return Complex64::from(z.re.tan());
    }
    z.sin() / z.cos()
}

fn ctanh(z: Complex64) -> Complex64 {
    if z.im == 0.0 {
        return Complex64::from(z.re.tanh());
    }
    z.sinh() / z.cosh()
}

fn real_part(z: Complex64, alpha: f64) -> Result<f64, ResonanceError> {
    if z.im.abs() > 1e-9 * (1.0 + z.re.abs()) {
        return Err(ResonanceError::NotReal { at: alpha, imag: z.im });
    }
    Ok(z.re)
}

/// Residual of the Plus-model limiting equation (LHS - RHS).
///
/// Written as `sqrt(b) [tanh(A)/sqrt(s+)] [sqrt(s-) tan(B)]
/// - [sqrt(s+) tanh(A)] [tan(B)/sqrt(s-)] / sqrt(b) - 2`, which equals the
/// unnormalized form for `sigma > 0` and stays finite when a well vanishes.
pub fn f_plus(alpha: f64, b: f64, sigma: f64) -> Result<f64, ResonanceError> {
    let ph = Phases::new(alpha, b, sigma)?;
    let (sp, sm) = (ph.sp, ph.sm);
    let tanh_a = tanh_checked(ph.big_a(), alpha)?;
    let tan_b = tan_checked(ph.big_b(), alpha)?;
    let first = tanh_over_root(sp, ph.a, alpha)? * tan_b * sm.sqrt();
    let second = tanh_a * sp.sqrt() * tan_over_root(sm, ph.c, alpha)?;
    let z = first * b.sqrt() - second / b.sqrt() - 2.0;
    real_part(z, alpha)
}

/// Residual of the Minus-model limiting equation.
///
/// For `sigma = 0` the equation degenerates (both sides vanish with the
/// well); the residual is then taken after multiplying through by
/// `sqrt(s+/s-)`, which keeps it finite and non-trivial.
pub fn f_minus(alpha: f64, b: f64, sigma: f64) -> Result<f64, ResonanceError> {
    let ph = Phases::new(alpha, b, sigma)?;
    let (sp, sm) = (ph.sp, ph.sm);
    let z = if sp > 0.0 && sm > 0.0 {
        tanh_checked(ph.big_a(), alpha)? * tan_checked(ph.big_b(), alpha)?
            + (b * sm / sp).sqrt()
    } else {
        tanh_checked(ph.big_a(), alpha)? * sp.sqrt() * tan_over_root(sm, ph.c, alpha)?
            + b.sqrt()
    };
    real_part(z, alpha)
}

/// Residual of the limiting equation shared by both models.
///
/// For `alpha < 0` both terms are purely imaginary; the common factor `i`
/// is divided out so the residual is real on the whole axis.
pub fn f_prime(alpha: f64, b: f64, sigma: f64) -> Result<f64, ResonanceError> {
    let ph = Phases::new(alpha, b, sigma)?;
    let (sp, sm) = (ph.sp, ph.sm);
    let mut z = if sp > 0.0 {
        tanh_checked(ph.big_a(), alpha)? - tan_checked(ph.big_b(), alpha)? * (b * sm / sp).sqrt()
    } else {
        -tan_checked(ph.big_b(), alpha)? * (b * sm).sqrt()
    };
    if alpha < 0.0 {
        z *= -Complex64::i();
    }
    real_part(z, alpha)
}

/// The same residuals written with real functions only, `tanh <-> tan`
/// swapped by hand for `alpha < 0`. Requires `sigma > 0`.
pub mod real_form {
    use super::*;

    fn phases(alpha: f64, b: f64, sigma: f64) -> (f64, f64, f64, f64) {
        let (sp, sm) = sigma_split(alpha, sigma);
        let x = (2.0 * alpha.abs() * sp / (1.0 + 1.0 / b)).sqrt();
        let y = (2.0 * alpha.abs() * sm / (1.0 + b)).sqrt();
        (sp, sm, x, y)
    }

    pub fn f_plus(alpha: f64, b: f64, sigma: f64) -> f64 {
        let (sp, sm, x, y) = phases(alpha, b, sigma);
        let coef = (b * sm / sp).sqrt() - (sp / (b * sm)).sqrt();
        if alpha >= 0.0 {
            coef * x.tanh() * y.tan() - 2.0
        } else {
            -coef * x.tan() * y.tanh() - 2.0
        }
    }

    pub fn f_minus(alpha: f64, b: f64, sigma: f64) -> f64 {
        let (sp, sm, x, y) = phases(alpha, b, sigma);
        let rhs = (b * sm / sp).sqrt();
        if alpha >= 0.0 {
            x.tanh() * y.tan() + rhs
        } else {
            -x.tan() * y.tanh() + rhs
        }
    }

    pub fn f_prime(alpha: f64, b: f64, sigma: f64) -> f64 {
        let (sp, sm, x, y) = phases(alpha, b, sigma);
        let w = (b * sm / sp).sqrt();
        if alpha >= 0.0 {
            x.tanh() - w * y.tan()
        } else {
            x.tan() - w * y.tanh()
        }
    }

    pub fn theta(alpha: f64, b: f64, sigma: f64) -> f64 {
        let (_, _, x, y) = phases(alpha, b, sigma);
        if alpha >= 0.0 {
            x.cosh() / y.cos()
        } else {
            x.cos() / y.cosh()
        }
    }
}

/// Residuals of the three finite-`eps` cancellation conditions:
/// `2 cos(pl) cos(qr) - (p/q + q/p) sin(pl) sin(qr)` (Plus branch),
/// `p sin(pl) cos(qr) + q cos(pl) sin(qr)` (shared branch) and
/// `p sin(pl) sin(qr) - q cos(pl) cos(qr)` (Minus branch).
pub fn finite_eps_residuals(
    params: &BwParams,
    energy: f64,
) -> Result<(Complex64, Complex64, Complex64), ResonanceError> {
    params.validate()?;
    let g = params.geometry();
    let w = WaveNumbers::new(params.alpha, &g, energy);
    let (p, q) = (w.p, w.q);
    let (pl, qr) = (p * g.l, q * g.r);
    let (sp, cp, sq, cq) = (pl.sin(), pl.cos(), qr.sin(), qr.cos());
    let r8 = cp * cq * 2.0 - (p / q + q / p) * sp * sq;
    let r9 = p * sp * cq + q * cp * sq;
    let r10 = p * sp * sq - q * cp * cq;
    Ok((r8, r9, r10))
}

/// Sign-change root scan with pole rejection.
///
/// The window is sampled on `grid_steps` cells; a cell whose end values
/// differ in sign is a bracket. A bracket is dropped if any probe inside it
/// hits a pole, if the smallest `|f|` over 10 interior probes exceeds 1, or
/// if bisection does not drive `|f|` below both end values (a pole
/// crossing rather than a root). Survivors are bisected to width `tol`.
pub fn find_roots<F>(
    f: F,
    lo: f64,
    hi: f64,
    grid_steps: usize,
    tol: f64,
) -> Result<Vec<f64>, ResonanceError>
where
    F: Fn(f64) -> Result<f64, ResonanceError>,
{
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(ResonanceError::BadInput(format!(
            "window must satisfy lo < hi, got [{lo}, {hi}]"
        )));
    }
    if grid_steps < 100 {
        return Err(ResonanceError::BadInput(format!(
            "grid_steps must be >= 100, got {grid_steps}"
        )));
    }
    if !(tol > 0.0) {
        return Err(ResonanceError::BadInput(format!("tol must be > 0, got {tol}")));
    }

    // Pole -> None; everything else propagates.
    let eval = |x: f64| -> Result<Option<f64>, ResonanceError> {
        match f(x) {
            Ok(y) => Ok(Some(y)),
            Err(ResonanceError::Pole(_)) => Ok(None),
            Err(e) => Err(e),
        }
    };

    let cell = (hi - lo) / grid_steps as f64;
    let xs: Vec<f64> = (0..=grid_steps)
        .map(|i| if i == grid_steps { hi } else { lo + cell * i as f64 })
        .collect();
    let ys = xs.iter().map(|&x| eval(x)).collect::<Result<Vec<_>, _>>()?;

    let mut roots = Vec::new();
    for i in 0..grid_steps {
        let (a, b) = (xs[i], xs[i + 1]);
        if ys[i] == Some(0.0) {
            roots.push(a);
            continue;
        }
        let (Some(ya), Some(yb)) = (ys[i], ys[i + 1]) else {
            continue;
        };
        if ya * yb >= 0.0 {
            continue;
        }
        if let Some(r) = refine_bracket(&eval, a, ya, b, yb, tol)? {
            roots.push(r);
        }
    }
    if ys[grid_steps] == Some(0.0) {
        roots.push(hi);
    }

    roots.sort_by(|a, b| a.total_cmp(b));
    roots.dedup_by(|b, a| (*b - *a).abs() <= 2.0 * tol);
    for w in roots.windows(2) {
        if w[1] - w[0] < cell {
            return Err(ResonanceError::WindowTooCoarse {
                a: w[0],
                b: w[1],
                cell,
            });
        }
    }
    Ok(roots)
}

fn refine_bracket<E>(
    eval: &E,
    a0: f64,
    ya: f64,
    b0: f64,
    yb: f64,
    tol: f64,
) -> Result<Option<f64>, ResonanceError>
where
    E: Fn(f64) -> Result<Option<f64>, ResonanceError>,
{
    let mut min_probe = f64::INFINITY;
    for j in 1..=10 {
        let x = a0 + (b0 - a0) * j as f64 / 11.0;
        match eval(x)? {
            Some(y) => min_probe = min_probe.min(y.abs()),
            None => return Ok(None),
        }
    }
    if min_probe > 1.0 {
        return Ok(None);
    }

    let (mut a, mut fa, mut b) = (a0, ya, b0);
    let (mut best, mut best_res) = if ya.abs() < yb.abs() {
        (a0, ya.abs())
    } else {
        (b0, yb.abs())
    };
    for _ in 0..400 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let Some(fm) = eval(m)? else {
            return Ok(None);
        };
        if fm.abs() < best_res {
            best = m;
            best_res = fm.abs();
        }
        if fm == 0.0 {
            break;
        }
        if (fm < 0.0) == (fa < 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
        if b - a < tol && best_res <= 1e-9 {
            break;
        }
    }
    if best_res < 1.0 && best_res <= ya.abs().min(yb.abs()) {
        Ok(Some(best))
    } else {
        Ok(None)
    }
}

/// Root-scan settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootScan {
    pub grid_steps: usize,
    pub tol: f64,
}

impl Default for RootScan {
    fn default() -> Self {
        Self {
            grid_steps: 20_000,
            tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResonanceRoot {
    pub alpha: f64,
    #[serde(rename = "set")]
    pub set_label: SetLabel,
    #[serde(rename = "n")]
    pub index: i32,
    pub theta: Option<f64>,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResonanceSet {
    pub roots: Vec<ResonanceRoot>,
    pub window: (f64, f64),
    pub b: f64,
    pub sigma: f64,
}

impl ResonanceSet {
    pub fn alphas(&self) -> Vec<f64> {
        self.roots.iter().map(|r| r.alpha).collect()
    }

    pub fn nearest(&self, alpha: f64) -> Option<&ResonanceRoot> {
        self.roots
            .iter()
            .min_by(|a, b| (a.alpha - alpha).abs().total_cmp(&(b.alpha - alpha).abs()))
    }

    pub fn contains(&self, alpha: f64) -> bool {
        self.window.0 <= alpha && alpha <= self.window.1
    }
}

/// Outward indices: the negative root nearest zero is -1, the positive one
/// +1, zero itself 0. `alphas` must be sorted.
fn outward_indices(alphas: &[f64]) -> Vec<i32> {
    let neg = alphas.iter().filter(|a| **a < 0.0).count() as i32;
    let mut pos = 0;
    alphas
        .iter()
        .enumerate()
        .map(|(j, &a)| {
            if a < 0.0 {
                j as i32 - neg
            } else if a == 0.0 {
                0
            } else {
                pos += 1;
                pos
            }
        })
        .collect()
}

/// Roots closer to zero than this are the trivial solution.
const TRIVIAL: f64 = 1e-6;

/// The model's total-transmission set (with the trivial `alpha = 0`
/// element) and the shared set with `theta` attached.
pub fn resonance_sets(
    kind: Kind,
    b: f64,
    sigma: f64,
    window: (f64, f64),
    scan: RootScan,
) -> Result<(ResonanceSet, ResonanceSet), ResonanceError> {
    let (lo, hi) = window;
    let eq = LimitEquation::for_kind(kind);
    let label = SetLabel::for_kind(kind);

    let mut model: Vec<f64> = find_roots(|a| eq.residual(a, b, sigma), lo, hi, scan.grid_steps, scan.tol)?
        .into_iter()
        .filter(|a| a.abs() > TRIVIAL)
        .collect();
    if lo <= 0.0 && 0.0 <= hi {
        model.push(0.0);
        model.sort_by(|a, b| a.total_cmp(b));
    }
    let model_roots = outward_indices(&model)
        .into_iter()
        .zip(&model)
        .map(|(n, &alpha)| {
            // The trivial element is not a root of the equation.
            let residual = if n == 0 { 0.0 } else { eq.residual(alpha, b, sigma)?.abs() };
            Ok(ResonanceRoot {
                alpha,
                set_label: label,
                index: n,
                theta: None,
                residual,
            })
        })
        .collect::<Result<Vec<_>, ResonanceError>>()?;

    let prime: Vec<f64> = find_roots(
        |a| f_prime(a, b, sigma),
        lo,
        hi,
        scan.grid_steps,
        scan.tol,
    )?
    .into_iter()
    .filter(|a| a.abs() > TRIVIAL)
    .collect();
    let prime_roots = outward_indices(&prime)
        .into_iter()
        .zip(&prime)
        .map(|(n, &alpha)| {
            let (sp, sm) = sigma_split(alpha, sigma);
            Ok(ResonanceRoot {
                alpha,
                set_label: SetLabel::SigmaPrime,
                index: n,
                theta: Some(theta(alpha, b, sp, sm)?),
                residual: f_prime(alpha, b, sigma)?.abs(),
            })
        })
        .collect::<Result<Vec<_>, ResonanceError>>()?;

    let wrap = |roots| ResonanceSet {
        roots,
        window,
        b,
        sigma,
    };
    Ok((wrap(model_roots), wrap(prime_roots)))
}

/// Double-barrier resonance residual for the well-free Minus chain:
/// `(p/k + k/p) tan(p l) - 2 cot(2 k r)` with `p = sqrt(k^2 - alpha h)`.
pub fn db_resonance_residual(
    k: f64,
    alpha: f64,
    eps: f64,
    c1: f64,
    c2: f64,
) -> Result<f64, ResonanceError> {
    if !(k > 0.0) {
        return Err(ResonanceError::BadInput(format!("k must be > 0, got {k}")));
    }
    if !(alpha > 0.0) {
        return Err(ResonanceError::BadInput(format!(
            "double-barrier residual needs alpha > 0 (barriers), got {alpha}"
        )));
    }
    let params = BwParams::new(Kind::Minus, alpha, eps, c1, c2, 0.0)?;
    let g = params.geometry();
    let p = Complex64::from(k * k - alpha * g.h).sqrt();
    let pl = p * g.l;
    if pl.cos().norm() < POLE_EPS {
        return Err(ResonanceError::Pole(k));
    }
    let s2 = (2.0 * k * g.r).sin();
    if s2.abs() < POLE_EPS {
        return Err(ResonanceError::Pole(k));
    }
    // (p/k) tan(pl) + k tan(pl)/p, the second term finite as p -> 0
    let tan_pl = ctan(pl);
    let tan_over_p = if pl.norm() < 1e-8 {
        g.l * (1.0 + pl * pl / 3.0)
    } else {
        tan_pl / p
    };
    let lhs = p / k * tan_pl + tan_over_p * k;
    let z = lhs - 2.0 * (2.0 * k * g.r).cos() / s2;
    real_part(z, k)
}

/// Crest of a transmission peak.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    pub alpha: f64,
    pub trans: f64,
}

const PEAK_SAMPLES: usize = 2000;
const PEAK_RESOLUTION: f64 = 1e-8;

/// Maximizes `T(alpha)` on `[guess - radius, guess + radius]` at fixed
/// `k`; `template.alpha` is ignored.
///
/// Peaks can be far narrower than any practical sampling step, so besides
/// the sampled maxima every sign change of `v = k m12 + m21 / k` is
/// bisected (transmission peaks where `v` crosses zero) and the crest is
/// then polished by golden-section search.
pub fn peak_refine(
    template: &BwParams,
    k: f64,
    alpha_guess: f64,
    radius: f64,
) -> Result<Peak, ResonanceError> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(ResonanceError::BadInput(format!(
            "radius must be > 0, got {radius}"
        )));
    }
    let (lo, hi) = (alpha_guess - radius, alpha_guess + radius);
    let t_at = |a: f64| transmissivity(&template.with_alpha(a), k);
    let v_at = |a: f64| uv(&template.with_alpha(a), k).map(|(_, v)| v);

    let step = (hi - lo) / PEAK_SAMPLES as f64;
    let xs: Vec<f64> = (0..=PEAK_SAMPLES)
        .map(|i| if i == PEAK_SAMPLES { hi } else { lo + step * i as f64 })
        .collect();
    let ts = xs.iter().map(|&a| t_at(a)).collect::<Result<Vec<_>, _>>()?;
    let vs = xs.iter().map(|&a| v_at(a)).collect::<Result<Vec<_>, _>>()?;

    let mut best: Option<Peak> = None;
    let mut offer = |p: Peak| {
        if best.map_or(true, |b| p.trans > b.trans) {
            best = Some(p);
        }
    };

    for i in 1..PEAK_SAMPLES {
        if ts[i] > ts[i - 1] && ts[i] >= ts[i + 1] {
            offer(golden_max(&t_at, xs[i - 1], xs[i + 1])?);
        }
    }
    for i in 0..PEAK_SAMPLES {
        if vs[i] == 0.0 || vs[i] * vs[i + 1] < 0.0 {
            let z = bisect_sign(&v_at, xs[i], vs[i], xs[i + 1])?;
            if z <= lo || z >= hi {
                continue;
            }
            let at_zero = Peak {
                alpha: z,
                trans: t_at(z)?,
            };
            let polished = golden_max(&t_at, (z - step).max(lo), (z + step).min(hi))?;
            offer(at_zero);
            offer(polished);
        }
    }

    match best {
        Some(p) if p.alpha > lo && p.alpha < hi && p.trans >= ts[0] && p.trans >= ts[PEAK_SAMPLES] => {
            Ok(p)
        }
        _ => Err(ResonanceError::NoPeak { lo, hi }),
    }
}

fn bisect_sign<F>(f: &F, mut a: f64, fa: f64, mut b: f64) -> Result<f64, ResonanceError>
where
    F: Fn(f64) -> Result<f64, ScatteringError>,
{
    if fa == 0.0 {
        return Ok(a);
    }
    let neg = fa < 0.0;
    loop {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            return Ok(m);
        }
        let fm = f(m)?;
        if fm == 0.0 {
            return Ok(m);
        }
        if (fm < 0.0) == neg {
            a = m;
        } else {
            b = m;
        }
    }
}

fn golden_max<F>(f: &F, mut a: f64, mut b: f64) -> Result<Peak, ResonanceError>
where
    F: Fn(f64) -> Result<f64, ScatteringError>,
{
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    while b - a > PEAK_RESOLUTION {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d)?;
        }
    }
    let (alpha, trans) = if fc >= fd { (c, fc) } else { (d, fd) };
    Ok(Peak { alpha, trans })
}

#[cfg(test)]
mod tests {
    use super::*;

    const B: f64 = 3.0;

    #[test]
    fn trivial_values() {
        assert_eq!(f_plus(0.0, B, 1.0).unwrap(), -2.0);
        assert!((f_minus(0.0, B, 1.0).unwrap() - 3f64.sqrt()).abs() < 1e-15);
        assert_eq!(f_prime(0.0, B, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn rounded_published_values_are_near_roots() {
        // Residual at a two-decimal value must be within a rounding step of
        // zero: |f(x)| <= |f'(x)| * 0.01.
        let cases: [(LimitEquation, f64); 7] = [
            (LimitEquation::Plus, 2.28),
            (LimitEquation::Plus, 35.09),
            (LimitEquation::Minus, 8.77),
            (LimitEquation::Minus, -1.01),
            (LimitEquation::Prime, -11.66),
            (LimitEquation::Prime, 26.87),
            (LimitEquation::Plus, -18.26),
        ];
        for (eq, x) in cases {
            let f = |a| eq.residual(a, B, 1.0).unwrap();
            let slope = (f(x + 1e-6) - f(x - 1e-6)) / 2e-6;
            assert!(f(x).abs() < slope.abs() * 0.01, "{eq:?} at {x}: {}", f(x));
        }
    }

    #[test]
    fn continuation_matches_real_forms() {
        for i in 0..400 {
            let alpha = -40.0 + 0.2 * i as f64 + 0.0137;
            for sigma in [1.0, 0.4, 2.5] {
                let pairs = [
                    (f_plus(alpha, B, sigma), real_form::f_plus(alpha, B, sigma)),
                    (f_minus(alpha, B, sigma), real_form::f_minus(alpha, B, sigma)),
                    (f_prime(alpha, B, sigma), real_form::f_prime(alpha, B, sigma)),
                ];
                for (c, r) in pairs {
                    let c = c.unwrap();
                    assert!((c - r).abs() <= 1e-10 * (1.0 + r.abs()), "{alpha} {sigma}: {c} vs {r}");
                }
            }
        }
    }

    #[test]
    fn pole_is_signalled() {
        // tan(B) pole for alpha > 0: sqrt(alpha / 2) = pi / 2
        let alpha = 2.0 * (std::f64::consts::FRAC_PI_2).powi(2);
        assert!(matches!(f_minus(alpha, B, 1.0), Err(ResonanceError::Pole(_))));
        assert!(matches!(f_prime(alpha, B, 1.0), Err(ResonanceError::Pole(_))));
    }

    #[test]
    fn linear_root() {
        let r = find_roots(|a| Ok(a - 5.0), 0.0, 10.0, 100, 1e-10).unwrap();
        assert_eq!(r, vec![5.0]);
        let r = find_roots(|a| Ok(a - 5.3), 0.0, 10.0, 100, 1e-10).unwrap();
        assert_eq!(r.len(), 1);
        assert!((r[0] - 5.3).abs() < 1e-10);
    }

    #[test]
    fn tan_poles_are_not_roots() {
        // tan(x) has roots at k pi and poles at pi/2 + k pi
        let r = find_roots(|x| Ok(x.tan()), 0.5, 10.0, 1000, 1e-12).unwrap();
        assert_eq!(r.len(), 3);
        for (x, k) in r.iter().zip(1..) {
            assert!((x - k as f64 * std::f64::consts::PI).abs() < 1e-12);
        }
    }

    #[test]
    fn coarse_grid_is_reported() {
        let f = |x: f64| Ok((x - 0.5) * (x - 0.5004) * (x + 10.0));
        // the two roots sit in neighbouring cells when the cell is 1e-3 wide
        let r = find_roots(f, 0.0, 1.0005, 1000, 1e-12);
        assert!(matches!(r, Err(ResonanceError::WindowTooCoarse { .. })), "{r:?}");
    }

    #[test]
    fn find_roots_validates() {
        assert!(find_roots(|a| Ok(a), 1.0, 0.0, 100, 1e-9).is_err());
        assert!(find_roots(|a| Ok(a), 0.0, 1.0, 10, 1e-9).is_err());
        assert!(find_roots(|a| Ok(a), 0.0, 1.0, 100, 0.0).is_err());
    }

    #[test]
    fn outward_indexing() {
        assert_eq!(
            outward_indices(&[-18.0, -2.7, 0.0, 2.28, 35.0]),
            vec![-2, -1, 0, 1, 2]
        );
        assert_eq!(outward_indices(&[-35.8, -11.6, 26.8]), vec![-2, -1, 1]);
    }

    #[test]
    fn sigma_zero_has_only_trivial_point() {
        for kind in [Kind::Plus, Kind::Minus] {
            let (m, p) = resonance_sets(kind, B, 0.0, (-40.0, 40.0), RootScan::default()).unwrap();
            assert_eq!(m.alphas(), vec![0.0]);
            assert!(p.roots.is_empty());
        }
    }

    #[test]
    fn finite_eps_residuals_at_zero_strength() {
        let p = BwParams::with_b(Kind::Plus, 0.0, 0.3, B, 1.0).unwrap();
        let g = p.geometry();
        let (r8, r9, r10) = finite_eps_residuals(&p, 2.25).unwrap();
        let k = 1.5;
        assert!((r8.re - 2.0 * (k * (g.l + g.r)).cos()).abs() < 1e-14);
        assert!((r9.re - k * (k * (g.l + g.r)).sin()).abs() < 1e-14);
        assert!((r10.re + k * (k * (g.l + g.r)).cos()).abs() < 1e-14);
    }

    #[test]
    fn db_residual_rejects_wells_only() {
        assert!(db_resonance_residual(1.0, -3.0, 0.2, 3.0, 1.0).is_err());
        assert!(db_resonance_residual(0.0, 3.0, 0.2, 3.0, 1.0).is_err());
    }

    #[test]
    fn db_residual_tan_pole() {
        // choose k so that p is real and pl = pi/2
        let (alpha, eps, c1, c2) = (1.0, 0.2, 3.0, 1.0);
        let g = BwParams::new(Kind::Minus, alpha, eps, c1, c2, 0.0).unwrap().geometry();
        let p = std::f64::consts::FRAC_PI_2 / g.l;
        let k = (p * p + alpha * g.h).sqrt();
        assert!(matches!(
            db_resonance_residual(k, alpha, eps, c1, c2),
            Err(ResonanceError::Pole(_))
        ));
        let near = db_resonance_residual(k * (1.0 + 1e-9), alpha, eps, c1, c2).unwrap();
        assert!(near.abs() > 1e6, "{near}");
    }

    #[test]
    fn peak_far_from_roots_is_rejected_or_tiny() {
        let t = BwParams::with_b(Kind::Plus, 0.0, 0.1, B, 1.0).unwrap();
        match peak_refine(&t, 1.0, 10.0, 0.5) {
            Err(ResonanceError::NoPeak { .. }) => {}
            Ok(p) => assert!(p.trans < 1e-3, "{p:?}"),
            Err(e) => panic!("{e}"),
        }
    }

    #[test]
    fn peak_refine_validates_radius() {
        let t = BwParams::with_b(Kind::Plus, 0.0, 0.1, B, 1.0).unwrap();
        assert!(peak_refine(&t, 1.0, 2.0, 0.0).is_err());
    }
}
