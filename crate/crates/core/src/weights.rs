//! Piecewise weights on `[0,1]`: constant pieces and power pieces
//! `coef * t^{-exponent}`. Moments are computed in closed form.

use serde::{Deserialize, Serialize};

use crate::error::{ApqError, Result};
use crate::params::Params;

/// Exponents within this distance of the integrability threshold count as
/// non-integrable.
pub const INTEGRABILITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Piece {
    Const { value: f64, lo: f64, hi: f64 },
    Power { coef: f64, exponent: f64, lo: f64, hi: f64 },
}

impl Piece {
    pub fn lo(&self) -> f64 {
        match *self {
            Piece::Const { lo, .. } | Piece::Power { lo, .. } => lo,
        }
    }

    pub fn hi(&self) -> f64 {
        match *self {
            Piece::Const { hi, .. } | Piece::Power { hi, .. } => hi,
        }
    }

    fn with_bounds(&self, lo: f64, hi: f64) -> Piece {
        match *self {
            Piece::Const { value, .. } => Piece::Const { value, lo, hi },
            Piece::Power { coef, exponent, .. } => Piece::Power { coef, exponent, lo, hi },
        }
    }

    pub fn value_at(&self, t: f64) -> f64 {
        match *self {
            Piece::Const { value, .. } => value,
            Piece::Power { coef, exponent, .. } => coef * t.powf(-exponent),
        }
    }

    /// `int_a^b w^p dt` for `lo <= a <= b <= hi`.
    fn integral(&self, p: f64, a: f64, b: f64) -> Result<f64> {
        if b <= a {
            return Ok(0.0);
        }
        match *self {
            Piece::Const { value, .. } => Ok(value.powf(p) * (b - a)),
            Piece::Power { coef, exponent, .. } => {
                let e = 1.0 - exponent * p;
                let scale = coef.powf(p);
                if a == 0.0 {
                    if e <= INTEGRABILITY_TOL {
                        return Err(ApqError::NonIntegrable { p });
                    }
                    return Ok(scale * b.powf(e) / e);
                }
                let l = (a / b).ln();
                if e == 0.0 {
                    return Ok(scale * -l);
                }
                Ok(scale * b.powf(e) * -(e * l).exp_m1() / e)
            }
        }
    }

    /// Measure of `{t in piece : w(t) >= lambda}` for `lambda > 0`.
    fn level_measure(&self, lambda: f64) -> f64 {
        match *self {
            Piece::Const { value, lo, hi } => {
                if value >= lambda {
                    hi - lo
                } else {
                    0.0
                }
            }
            Piece::Power { coef, exponent, lo, hi } => {
                if exponent == 0.0 {
                    return if coef >= lambda { hi - lo } else { 0.0 };
                }
                let t_star = (coef / lambda).powf(1.0 / exponent);
                if exponent > 0.0 {
                    (hi.min(t_star) - lo).max(0.0)
                } else {
                    (hi - lo.max(t_star)).max(0.0)
                }
            }
        }
    }

    /// `min(w, a)` (when `below`) or `max(w, a)` on this piece.
    fn clipped(&self, a: f64, below: bool, out: &mut Vec<Piece>) {
        let pick = |x: f64| if below { x.min(a) } else { x.max(a) };
        match *self {
            Piece::Const { value, lo, hi } => out.push(Piece::Const { value: pick(value), lo, hi }),
            Piece::Power { coef, exponent, lo, hi } => {
                if exponent == 0.0 {
                    out.push(Piece::Const { value: pick(coef), lo, hi });
                    return;
                }
                let t_star = (coef / a).powf(1.0 / exponent).clamp(lo, hi);
                // On [lo, t_star] the piece is above `a` when decreasing.
                let left_above = exponent > 0.0;
                let keep_left = left_above != below;
                let segs = [(lo, t_star, keep_left), (t_star, hi, !keep_left)];
                for (s, e, keep) in segs {
                    if e > s {
                        out.push(if keep {
                            self.with_bounds(s, e)
                        } else {
                            Piece::Const { value: a, lo: s, hi: e }
                        });
                    }
                }
            }
        }
    }
}

/// Average of `w^p1` and `w^p2` over an interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentPair {
    pub x1: f64,
    pub x2: f64,
}

#[derive(Debug, Deserialize)]
struct WeightRepr {
    pieces: Vec<Piece>,
}

/// A positive weight on `[0,1]` given by pieces that tile the interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "WeightRepr")]
pub struct Weight {
    pieces: Vec<Piece>,
}

impl TryFrom<WeightRepr> for Weight {
    type Error = ApqError;

    fn try_from(r: WeightRepr) -> Result<Self> {
        Weight::new(r.pieces)
    }
}

impl Weight {
    /// Validates that the pieces tile `[0,1]` in order with positive values.
    pub fn new(pieces: Vec<Piece>) -> Result<Self> {
        if pieces.is_empty() {
            return Err(ApqError::InvalidWeight("no pieces".into()));
        }
        let mut at = 0.0;
        for p in &pieces {
            let (lo, hi) = (p.lo(), p.hi());
            if lo != at || !(hi > lo) || !hi.is_finite() {
                return Err(ApqError::InvalidWeight(format!(
                    "pieces must tile [0,1] in order; got [{lo}, {hi}] after {at}"
                )));
            }
            let ok = match *p {
                Piece::Const { value, .. } => value.is_finite() && value > 0.0,
                Piece::Power { coef, exponent, .. } => {
                    coef.is_finite() && coef > 0.0 && exponent.is_finite()
                }
            };
            if !ok {
                return Err(ApqError::InvalidWeight(format!("bad piece {p:?}")));
            }
            at = hi;
        }
        if at != 1.0 {
            return Err(ApqError::InvalidWeight(format!("pieces end at {at}, not 1")));
        }
        Ok(Weight { pieces })
    }

    /// Builds a weight after dropping zero-length pieces.
    pub fn from_pieces_lossy(pieces: Vec<Piece>) -> Result<Self> {
        Weight::new(pieces.into_iter().filter(|p| p.hi() > p.lo()).collect())
    }

    pub fn constant(value: f64) -> Result<Self> {
        Weight::new(vec![Piece::Const { value, lo: 0.0, hi: 1.0 }])
    }

    /// Step weight from values and the interior breakpoints between them.
    pub fn steps(values: &[f64], breaks: &[f64]) -> Result<Self> {
        if values.len() != breaks.len() + 1 {
            return Err(ApqError::InvalidWeight("need one more value than breakpoint".into()));
        }
        let mut edges = Vec::with_capacity(values.len() + 1);
        edges.push(0.0);
        edges.extend_from_slice(breaks);
        edges.push(1.0);
        let pieces = values
            .iter()
            .zip(edges.windows(2))
            .map(|(&value, e)| Piece::Const { value, lo: e[0], hi: e[1] })
            .collect();
        Weight::new(pieces)
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    /// Breakpoints including both ends.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut b: Vec<f64> = self.pieces.iter().map(|p| p.lo()).collect();
        b.push(1.0);
        b
    }

    pub fn value_at(&self, t: f64) -> f64 {
        let idx = self
            .pieces
            .iter()
            .position(|p| t < p.hi())
            .unwrap_or(self.pieces.len() - 1);
        self.pieces[idx].value_at(t)
    }

    /// `int_a^b w^p dt`.
    pub fn integral_on(&self, p: f64, a: f64, b: f64) -> Result<f64> {
        let mut s = 0.0;
        for piece in &self.pieces {
            let lo = piece.lo().max(a);
            let hi = piece.hi().min(b);
            if hi > lo {
                s += piece.integral(p, lo, hi)?;
            }
        }
        Ok(s)
    }

    /// `<w^p>` over `[a, b]`.
    pub fn moment_on(&self, p: f64, a: f64, b: f64) -> Result<f64> {
        if !(b > a) {
            return Err(ApqError::InvalidWeight(format!("empty interval [{a}, {b}]")));
        }
        Ok(self.integral_on(p, a, b)? / (b - a))
    }

    /// `<w^p>` over `[0,1]`.
    pub fn moment(&self, p: f64) -> Result<f64> {
        self.integral_on(p, 0.0, 1.0)
    }

    pub fn moments(&self, params: &Params) -> Result<MomentPair> {
        Ok(MomentPair { x1: self.moment(params.p1)?, x2: self.moment(params.p2)? })
    }

    /// `<w>` and `<log w>` over `[0,1]`.
    pub fn log_moments(&self) -> MomentPair {
        let mut x2 = 0.0;
        for piece in &self.pieces {
            x2 += match *piece {
                Piece::Const { value, lo, hi } => value.ln() * (hi - lo),
                Piece::Power { coef, exponent, lo, hi } => {
                    let f = |t: f64| if t == 0.0 { 0.0 } else { t * (t.ln() - 1.0) };
                    coef.ln() * (hi - lo) - exponent * (f(hi) - f(lo))
                }
            };
        }
        MomentPair { x1: self.moment(1.0).unwrap_or(f64::INFINITY), x2 }
    }

    /// Lebesgue measure of `{w >= lambda}`.
    pub fn distribution(&self, lambda: f64) -> f64 {
        if lambda <= 0.0 {
            return 1.0;
        }
        self.pieces.iter().map(|p| p.level_measure(lambda)).sum::<f64>().min(1.0)
    }

    /// `min(w, a)`.
    pub fn cutoff_below(&self, a: f64) -> Result<Weight> {
        self.clip(a, true)
    }

    /// `max(w, a)`.
    pub fn cutoff_above(&self, a: f64) -> Result<Weight> {
        self.clip(a, false)
    }

    fn clip(&self, a: f64, below: bool) -> Result<Weight> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(ApqError::InvalidWeight(format!("cutoff level {a} must be positive")));
        }
        let mut out = Vec::with_capacity(self.pieces.len() + 2);
        for p in &self.pieces {
            p.clipped(a, below, &mut out);
        }
        Weight::new(out)
    }

    /// `s * w`.
    pub fn scaled(&self, s: f64) -> Result<Weight> {
        Weight::new(
            self.pieces
                .iter()
                .map(|p| match *p {
                    Piece::Const { value, lo, hi } => Piece::Const { value: value * s, lo, hi },
                    Piece::Power { coef, exponent, lo, hi } => Piece::Power { coef: coef * s, exponent, lo, hi },
                })
                .collect(),
        )
    }

    /// `ln( <w^p1>^{1/p1} <w^p2>^{-1/p2} )` over `[a, b]`.
    pub fn log_ratio_on(&self, params: &Params, a: f64, b: f64) -> Result<f64> {
        let m1 = self.moment_on(params.p1, a, b)?;
        let m2 = self.moment_on(params.p2, a, b)?;
        Ok(m1.ln() / params.p1 - m2.ln() / params.p2)
    }

    /// Supremum over subintervals of `<w^p1>^{1/p1} <w^p2>^{-1/p2}`.
    ///
    /// Endpoints range over the breakpoints plus `resolution` geometric
    /// subdivisions per piece; the best pair is then polished by golden-section
    /// search within its neighbouring cells.
    pub fn apq_norm(&self, params: &Params, resolution: usize) -> Result<f64> {
        let grid = self.candidate_grid(resolution);
        let n = grid.len();
        let mut best = (f64::NEG_INFINITY, 0usize, n - 1);
        for i in 0..n {
            for j in i + 1..n {
                let r = self.log_ratio_on(params, grid[i], grid[j])?;
                if r > best.0 {
                    best = (r, i, j);
                }
            }
        }
        let (mut val, i, j) = best;
        let mut a = grid[i];
        let mut b = grid[j];
        let a_range = (grid[i.saturating_sub(1)], grid[(i + 1).min(j)]);
        let b_range = (grid[(j - 1).max(i)], grid[(j + 1).min(n - 1)]);
        for _ in 0..2 {
            let (na, va) = golden_max(|t| self.log_ratio_on(params, t, b).unwrap_or(f64::NEG_INFINITY), a_range.0, a_range.1.min(b));
            if va > val {
                val = va;
                a = na;
            }
            let (nb, vb) = golden_max(|t| self.log_ratio_on(params, a, t).unwrap_or(f64::NEG_INFINITY), b_range.0.max(a), b_range.1);
            if vb > val {
                val = vb;
                b = nb;
            }
        }
        Ok(val.exp())
    }

    fn candidate_grid(&self, resolution: usize) -> Vec<f64> {
        let mut g = vec![0.0];
        for p in &self.pieces {
            let (lo, hi) = (p.lo(), p.hi());
            for k in 1..=resolution {
                let t = if lo > 0.0 {
                    lo * (hi / lo).powf(k as f64 / (resolution + 1) as f64)
                } else {
                    hi * 0.5f64.powi((resolution + 1 - k) as i32)
                };
                if t > lo && t < hi {
                    g.push(t);
                }
            }
            g.push(hi);
        }
        g
    }
}

/// Golden-section maximisation of `f` on `[a, b]`; returns the better of the
/// interior optimum and the starting endpoints.
fn golden_max<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> (f64, f64) {
    if !(b > a) {
        return (a, f(a));
    }
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let (mut lo, mut hi) = (a, b);
    let mut c = hi - phi * (hi - lo);
    let mut d = lo + phi * (hi - lo);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..80 {
        if fc >= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - phi * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + phi * (hi - lo);
            fd = f(d);
        }
        if hi - lo <= 1e-14 * hi.abs().max(1e-300) {
            break;
        }
    }
    let mut best = if fc >= fd { (c, fc) } else { (d, fd) };
    for t in [a, b] {
        let ft = f(t);
        if ft > best.1 {
            best = (t, ft);
        }
    }
    best
}
