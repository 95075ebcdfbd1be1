//! Piecewise-constant potentials and the squeezed barrier-well structures.
//!
//! A [`SegmentChain`] is an ordered run of constant-potential slabs. The
//! two model families are generated from [`BwParams`] by [`realize`]: both
//! are built from a barrier of height `h` and width `l` sitting next to a
//! well of depth `d` and width `r`, with `h, d ~ eps^-2` and `l, r ~ eps`.
//!
//! ```text
//!   Plus:  [ +h | -d | +h | -d ]     barrier-well, barrier-well
//!   Minus: [ +h | -d | -d | +h ]     barrier-well, mirrored
//! ```
//!
//! Heights are multiplied by the strength `alpha`, so for `alpha < 0` the
//! barriers turn into wells and vice versa.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PotentialError {
    #[error("segment width must be positive and finite, got {0}")]
    BadWidth(f64),
    #[error("segment value must be finite, got {0}")]
    BadValue(f64),
    #[error("chain must contain at least one segment")]
    EmptyChain,
    #[error("chain left edge must be finite, got {0}")]
    BadEdge(f64),
    #[error("parameter `{name}` = {value} violates {constraint}")]
    BadParam {
        name: &'static str,
        value: f64,
        constraint: &'static str,
    },
}

/// One slab of constant potential.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub width: f64,
    pub value: f64,
}

impl Segment {
    pub fn new(width: f64, value: f64) -> Result<Self, PotentialError> {
        if !(width > 0.0 && width.is_finite()) {
            return Err(PotentialError::BadWidth(width));
        }
        if !value.is_finite() {
            return Err(PotentialError::BadValue(value));
        }
        Ok(Self { width, value })
    }
}

/// Contiguous segments starting at `x_left`. Gaps are explicit zero-value
/// segments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawChain")]
pub struct SegmentChain {
    x_left: f64,
    segments: Vec<Segment>,
}

#[derive(Deserialize)]
struct RawChain {
    x_left: f64,
    segments: Vec<Segment>,
}

impl TryFrom<RawChain> for SegmentChain {
    type Error = PotentialError;

    fn try_from(raw: RawChain) -> Result<Self, Self::Error> {
        SegmentChain::new(raw.x_left, raw.segments)
    }
}

impl SegmentChain {
    pub fn new(x_left: f64, segments: Vec<Segment>) -> Result<Self, PotentialError> {
        if !x_left.is_finite() {
            return Err(PotentialError::BadEdge(x_left));
        }
        if segments.is_empty() {
            return Err(PotentialError::EmptyChain);
        }
        for s in &segments {
            Segment::new(s.width, s.value)?;
        }
        Ok(Self { x_left, segments })
    }

    pub fn x_left(&self) -> f64 {
        self.x_left
    }

    pub fn x_right(&self) -> f64 {
        self.x_left + self.total_width()
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn total_width(&self) -> f64 {
        self.segments.iter().map(|s| s.width).sum()
    }

    /// Appends `other` immediately to the right of `self`; `other`'s own
    /// left edge is ignored.
    pub fn concat(&self, other: &SegmentChain) -> SegmentChain {
        let mut segments = self.segments.clone();
        segments.extend_from_slice(&other.segments);
        SegmentChain {
            x_left: self.x_left,
            segments,
        }
    }

    /// Same profile shifted rigidly by `dx`.
    pub fn translated(&self, dx: f64) -> SegmentChain {
        SegmentChain {
            x_left: self.x_left + dx,
            segments: self.segments.clone(),
        }
    }

    /// Mirror image about the chain's centre.
    pub fn reversed(&self) -> SegmentChain {
        let mut segments = self.segments.clone();
        segments.reverse();
        SegmentChain {
            x_left: self.x_left,
            segments,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Kind {
    Plus,
    Minus,
}

/// Model parameters. `b = c1 / c2`; `sigma` scales whichever segments act
/// as wells for the sign of `alpha` (see [`sigma_split`]).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BwParams {
    pub kind: Kind,
    pub alpha: f64,
    pub eps: f64,
    pub c1: f64,
    pub c2: f64,
    pub sigma: f64,
}

/// Barrier height/width and well depth/width, before scaling by `alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Geometry {
    pub h: f64,
    pub l: f64,
    pub d: f64,
    pub r: f64,
}

fn positive(name: &'static str, value: f64) -> Result<(), PotentialError> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(PotentialError::BadParam {
            name,
            value,
            constraint: "> 0",
        })
    }
}

impl BwParams {
    pub fn new(
        kind: Kind,
        alpha: f64,
        eps: f64,
        c1: f64,
        c2: f64,
        sigma: f64,
    ) -> Result<Self, PotentialError> {
        let p = Self {
            kind,
            alpha,
            eps,
            c1,
            c2,
            sigma,
        };
        p.validate()?;
        Ok(p)
    }

    /// Shape given by the ratio only: `c1 = b`, `c2 = 1`.
    pub fn with_b(
        kind: Kind,
        alpha: f64,
        eps: f64,
        b: f64,
        sigma: f64,
    ) -> Result<Self, PotentialError> {
        Self::new(kind, alpha, eps, b, 1.0, sigma)
    }

    pub fn validate(&self) -> Result<(), PotentialError> {
        if !self.alpha.is_finite() {
            return Err(PotentialError::BadParam {
                name: "alpha",
                value: self.alpha,
                constraint: "finite",
            });
        }
        positive("eps", self.eps)?;
        positive("c1", self.c1)?;
        positive("c2", self.c2)?;
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(PotentialError::BadParam {
                name: "sigma",
                value: self.sigma,
                constraint: ">= 0",
            });
        }
        Ok(())
    }

    pub fn b(&self) -> f64 {
        self.c1 / self.c2
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_eps(mut self, eps: f64) -> Self {
        self.eps = eps;
        self
    }

    pub fn geometry(&self) -> Geometry {
        let (sp, sm) = sigma_split(self.alpha, self.sigma);
        let (c1, c2, eps) = (self.c1, self.c2, self.eps);
        let sum = c1 + c2;
        Geometry {
            h: 2.0 * sp / (c1 * sum) / (eps * eps),
            l: c1 * eps,
            d: 2.0 * sm / (c2 * sum) / (eps * eps),
            r: c2 * eps,
        }
    }
}

/// `(sigma_plus, sigma_minus)`: sigma lands on the wells only, so which
/// factor it replaces depends on the sign of the strength.
pub fn sigma_split(alpha: f64, sigma: f64) -> (f64, f64) {
    if alpha > 0.0 {
        (1.0, sigma)
    } else if alpha < 0.0 {
        (sigma, 1.0)
    } else {
        (1.0, 1.0)
    }
}

/// Builds the four-slab chain on `[-(l + r), l + r]`.
pub fn realize(params: &BwParams) -> Result<SegmentChain, PotentialError> {
    params.validate()?;
    let g = params.geometry();
    realize_geometry(params.kind, params.alpha, &g)
}

/// Same as [`realize`] but from explicit `(h, l, d, r)`, bypassing the
/// squeezing parametrization.
pub fn realize_geometry(
    kind: Kind,
    alpha: f64,
    g: &Geometry,
) -> Result<SegmentChain, PotentialError> {
    let barrier = Segment::new(g.l, alpha * g.h)?;
    let well = Segment::new(g.r, -alpha * g.d)?;
    let segments = match kind {
        Kind::Plus => vec![barrier, well, barrier, well],
        Kind::Minus => vec![barrier, well, well, barrier],
    };
    SegmentChain::new(-(g.l + g.r), segments)
}
