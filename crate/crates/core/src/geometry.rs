//! The moment domain, its boundary curves, the tangent-line family, and the
//! partition into four regions.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{ApqError, Result};
use crate::params::{DerivedConstants, Params};

/// Relative slack applied to the domain inequalities.
pub const DOMAIN_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Region {
    I,
    II,
    III,
    IV,
    /// Lower boundary curve, reported only by [`curve_membership`].
    Gamma1,
    /// Upper boundary curve, reported only by [`curve_membership`].
    GammaQ,
    Outside,
}

impl Region {
    pub fn as_str(&self) -> &'static str {
        match self {
            Region::I => "I",
            Region::II => "II",
            Region::III => "III",
            Region::IV => "IV",
            Region::Gamma1 => "Gamma1",
            Region::GammaQ => "GammaQ",
            Region::Outside => "Outside",
        }
    }

    pub const INTERIOR: [Region; 4] = [Region::I, Region::II, Region::III, Region::IV];
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A line `x2 = slope * x1 + intercept`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Line {
    pub slope: f64,
    pub intercept: f64,
}

impl Line {
    pub fn at(&self, x1: f64) -> f64 {
        self.slope * x1 + self.intercept
    }
}

/// Which tangent family: through the larger or the smaller tangency root.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Plus,
    Minus,
}

fn check_finite(x1: f64, x2: f64) -> Result<()> {
    if x1.is_finite() && x2.is_finite() {
        Ok(())
    } else {
        Err(ApqError::OutsideDomain { x1, x2 })
    }
}

/// `ln(x1^{1/p1} / x2^{1/p2})`, which ranges over `[0, ln Q]` on the domain.
pub fn log_ratio(x1: f64, x2: f64, params: &Params) -> f64 {
    x1.ln() / params.p1 - x2.ln() / params.p2
}

/// Membership in the closed domain between the two boundary curves.
pub fn in_domain(x1: f64, x2: f64, params: &Params) -> Result<bool> {
    check_finite(x1, x2)?;
    if x1 <= 0.0 || x2 <= 0.0 {
        return Ok(false);
    }
    let r = log_ratio(x1, x2, params);
    Ok(r >= -DOMAIN_SLACK && r <= params.q.ln() + DOMAIN_SLACK)
}

/// The lower boundary point with parameter `v`.
pub fn gamma1_point(v: f64, params: &Params) -> (f64, f64) {
    (v.powf(params.p1), v.powf(params.p2))
}

/// The upper boundary point with parameter `a`.
pub fn gamma_q_point(a: f64, params: &Params) -> (f64, f64) {
    (a.powf(params.p1), params.q.powf(-params.p2) * a.powf(params.p2))
}

/// Tangent from the lower-boundary point `v` to the upper curve.
pub fn tangent_line(v: f64, side: Side, params: &Params, c: &DerivedConstants) -> Line {
    let Params { p1, p2, q } = *params;
    let g = match side {
        Side::Plus => c.gamma_plus,
        Side::Minus => c.gamma_minus,
    };
    let slope = (p2 / p1) * q.powf(-p2) * (g * v).powf(p2 - p1);
    Line {
        slope,
        intercept: v.powf(p2) - slope * v.powf(p1),
    }
}

/// Signed offsets used by the region tests, normalized so that positive values
/// point away from the linear piece.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Offsets {
    /// Offset from the plus tangent through `(1,1)`, positive on the constant side.
    pub d_plus: f64,
    /// Offset from the minus tangent through `(1,1)`, positive on the chord side.
    pub d_minus: f64,
    /// Position of `x1` past the plus tangency point.
    pub e_plus: f64,
    /// Position of `x1` past the minus tangency point.
    pub e_minus: f64,
}

pub(crate) fn offsets(x1: f64, x2: f64, params: &Params, c: &DerivedConstants) -> Offsets {
    let (s1, s2) = (params.s1(), params.s2());
    let lp = tangent_line(1.0, Side::Plus, params, c);
    let lm = tangent_line(1.0, Side::Minus, params, c);
    Offsets {
        d_plus: s2 * (x2 - (lp.slope * (x1 - 1.0) + 1.0)),
        d_minus: s2 * (x2 - (lm.slope * (x1 - 1.0) + 1.0)),
        e_plus: s1 * (x1 - c.gamma_plus.powf(params.p1)),
        e_minus: s1 * (x1 - c.gamma_minus.powf(params.p1)),
    }
}

/// Region containing `x`. Points on the plus tangent go to `II`, points on the
/// minus tangent go to `III`; the corner `(1,1)` is treated as `II`.
pub fn classify(x1: f64, x2: f64, params: &Params, c: &DerivedConstants) -> Result<Region> {
    if !in_domain(x1, x2, params)? {
        return Ok(Region::Outside);
    }
    if x1 == 1.0 && x2 == 1.0 {
        return Ok(Region::II);
    }
    let o = offsets(x1, x2, params, c);
    Ok(if o.e_plus > 0.0 || o.d_plus > 0.0 {
        Region::I
    } else if o.d_minus >= 0.0 {
        Region::III
    } else if o.e_minus > 0.0 {
        Region::II
    } else {
        Region::IV
    })
}

/// Boundary-curve membership within relative tolerance `tol`.
pub fn curve_membership(x1: f64, x2: f64, params: &Params, tol: f64) -> Result<Option<Region>> {
    check_finite(x1, x2)?;
    if x1 <= 0.0 || x2 <= 0.0 {
        return Ok(None);
    }
    let r = log_ratio(x1, x2, params);
    if r.abs() <= tol {
        Ok(Some(Region::Gamma1))
    } else if (r - params.q.ln()).abs() <= tol {
        Ok(Some(Region::GammaQ))
    } else {
        Ok(None)
    }
}

/// Whether `x` lies within relative distance `tol` of an interior boundary
/// between two regions.
pub fn near_interior_boundary(
    x1: f64,
    x2: f64,
    params: &Params,
    c: &DerivedConstants,
    tol: f64,
) -> bool {
    let o = offsets(x1, x2, params, c);
    let s1 = params.s1();
    let scale = x2.abs().max(1.0);
    let toward_plus = s1 * (x1 - 1.0) >= 0.0 && o.e_plus <= 0.0;
    let toward_minus = s1 * (x1 - 1.0) <= 0.0 && s1 * (x1 - c.v_minus.powf(params.p1)) >= 0.0;
    (toward_plus && o.d_plus.abs() <= tol * scale) || (toward_minus && o.d_minus.abs() <= tol * scale)
}

/// Error unless `x` lies in the domain.
pub fn require_domain(x1: f64, x2: f64, params: &Params) -> Result<()> {
    if in_domain(x1, x2, params)? {
        Ok(())
    } else {
        Err(ApqError::OutsideDomain { x1, x2 })
    }
}
