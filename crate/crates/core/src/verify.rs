//! Numerical evidence for the Bellman function: local concavity, domination of
//! a brute-force search over step weights, and majorization of random
//! martingale-generated weights.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bellman::eval;
use crate::error::{ApqError, Result};
use crate::extremal::build;
use crate::geometry::{classify, gamma1_point, in_domain, log_ratio, tangent_line, Line, Region, Side};
use crate::params::{solve_gammas, DerivedConstants, Params};
use crate::weights::{Piece, Weight};

/// Largest admissible Hessian eigenvalue in relative coordinates.
pub const HESSIAN_EIG_TOL: f64 = 1e-6;
/// Largest admissible Hessian determinant in relative coordinates, scaled by
/// the squared Frobenius norm when that exceeds 1.
pub const HESSIAN_DET_TOL: f64 = 1e-5;
/// Midpoint concavity slack across a region boundary.
pub const MIDPOINT_TOL: f64 = 1e-9;
/// Relative finite-difference step for the Hessian.
pub const FD_STEP: f64 = 1e-4;
/// Relative moment band accepted by the brute-force oracle.
pub const ORACLE_MOMENT_BAND: f64 = 2e-3;
/// Slack for the level-set and chord inequalities in the majorization campaign.
pub const MAJORIZATION_TOL: f64 = 1e-9;
/// Depth of the random splitting tree.
pub const SPLIT_DEPTH: usize = 8;

/// One recorded statistic at a point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detail {
    pub x1: f64,
    pub x2: f64,
    pub label: String,
    pub statistic: f64,
}

/// Outcome of a verification campaign. `worst_violation` is measured in units
/// of the campaign tolerance, so `pass` holds iff it is at most `tolerance`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub campaign: String,
    pub samples: usize,
    pub worst_violation: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub details: Vec<Detail>,
}

/// Number of worst entries kept in a report.
const KEPT_DETAILS: usize = 12;

impl VerifyReport {
    fn from_details(campaign: &str, samples: usize, tolerance: f64, mut details: Vec<Detail>) -> Self {
        details.sort_by(|a, b| b.statistic.total_cmp(&a.statistic));
        let worst_violation = details.first().map_or(f64::NEG_INFINITY, |d| d.statistic);
        details.truncate(KEPT_DETAILS);
        let pass = worst_violation <= tolerance;
        VerifyReport { campaign: campaign.into(), samples, worst_violation, tolerance, pass, details }
    }

    /// Combine several reports; the result passes iff every part passes.
    pub fn merge(campaign: &str, parts: Vec<VerifyReport>) -> Self {
        let samples = parts.iter().map(|r| r.samples).sum();
        let details = parts.into_iter().flat_map(|r| r.details).collect();
        Self::from_details(campaign, samples, 1.0, details)
    }
}

fn detail(x: (f64, f64), label: impl Into<String>, statistic: f64) -> Detail {
    // NaN or failed evaluations count as the worst possible outcome.
    let statistic = if statistic.is_nan() { f64::INFINITY } else { statistic };
    Detail { x1: x.0, x2: x.1, label: label.into(), statistic }
}

fn value(x1: f64, x2: f64, params: &Params, c: &DerivedConstants) -> f64 {
    eval(x1, x2, params, c).map_or(f64::NAN, |e| e.value)
}

fn region_of(x1: f64, x2: f64, params: &Params, c: &DerivedConstants) -> Region {
    classify(x1, x2, params, c).unwrap_or(Region::Outside)
}

/// Interior regions and the generic point parametrization `(m, r)`: `m` is the
/// lower-boundary parameter with the same first moment and `r` the log-ratio.
fn point_from(m: f64, r: f64, params: &Params) -> (f64, f64) {
    (m.powf(params.p1), (params.p2 * (m.ln() - r)).exp())
}

fn sampling_box(c: &DerivedConstants) -> (f64, f64) {
    ((c.v_minus * c.v_minus).ln(), (c.v_plus * c.gamma_plus).ln())
}

/// Whether `x` and its relative neighbours at distance `margin` all lie in
/// `region`.
pub fn interior_with_margin(x1: f64, x2: f64, region: Region, margin: f64, params: &Params, c: &DerivedConstants) -> bool {
    for i in -1..=1 {
        for j in -1..=1 {
            let y1 = x1 * (1.0 + margin * i as f64);
            let y2 = x2 * (1.0 + margin * j as f64);
            if region_of(y1, y2, params, c) != region {
                return false;
            }
        }
    }
    true
}

/// Draw a point of `region` at relative distance at least `margin` from its
/// boundary by rejection from the `(m, r)` box.
pub fn sample_interior<R: Rng>(
    region: Region,
    margin: f64,
    params: &Params,
    c: &DerivedConstants,
    rng: &mut R,
) -> Result<(f64, f64)> {
    let (lo, hi) = sampling_box(c);
    let lnq = params.q.ln();
    for _ in 0..500_000 {
        let m = rng.gen_range(lo..hi).exp();
        let r = rng.gen_range(0.0..lnq);
        let (x1, x2) = point_from(m, r, params);
        if interior_with_margin(x1, x2, region, margin, params, c) {
            return Ok((x1, x2));
        }
    }
    Err(ApqError::NoConvergence(format!("could not sample region {region}")))
}

fn fd_hessian(x1: f64, x2: f64, step: f64, params: &Params, c: &DerivedConstants) -> [[f64; 2]; 2] {
    let (h1, h2) = (step * x1, step * x2);
    let f = |a: f64, b: f64| value(x1 + a * h1, x2 + b * h2, params, c);
    let f0 = f(0.0, 0.0);
    let s2 = step * step;
    let d11 = (f(1.0, 0.0) - 2.0 * f0 + f(-1.0, 0.0)) / s2;
    let d22 = (f(0.0, 1.0) - 2.0 * f0 + f(0.0, -1.0)) / s2;
    let d12 = (f(1.0, 1.0) - f(1.0, -1.0) - f(-1.0, 1.0) + f(-1.0, -1.0)) / (4.0 * s2);
    [[d11, d12], [d12, d22]]
}

/// Hessian of `B` in relative coordinates, `H_ij x_i x_j`, by central
/// differences with step `FD_STEP * x_i` and one Richardson step against the
/// half step.
pub fn relative_hessian(x1: f64, x2: f64, params: &Params, c: &DerivedConstants) -> [[f64; 2]; 2] {
    let coarse = fd_hessian(x1, x2, FD_STEP, params, c);
    let fine = fd_hessian(x1, x2, 0.5 * FD_STEP, params, c);
    let mut h = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            h[i][j] = (4.0 * fine[i][j] - coarse[i][j]) / 3.0;
        }
    }
    h
}

fn max_eigenvalue(h: &[[f64; 2]; 2]) -> f64 {
    let tr = h[0][0] + h[1][1];
    let det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
    let disc = (0.25 * tr * tr - det).max(0.0).sqrt();
    0.5 * tr + disc
}

/// A straight piece of an interior region boundary, parametrized by `x1`.
#[derive(Debug, Clone, Copy)]
pub struct BoundaryPiece {
    pub name: &'static str,
    pub line: Line,
    /// First coordinate at the two ends of the piece.
    pub from: f64,
    pub to: f64,
}

impl BoundaryPiece {
    /// Point at fraction `t` along the piece.
    pub fn at(&self, t: f64) -> (f64, f64) {
        let x1 = self.from + t * (self.to - self.from);
        (x1, self.line.at(x1))
    }

    /// Unit normal of the line.
    pub fn normal(&self) -> (f64, f64) {
        let norm = (1.0 + self.line.slope * self.line.slope).sqrt();
        (-self.line.slope / norm, 1.0 / norm)
    }
}

/// The straight interior boundaries: the tangent through `(1,1)` on the plus
/// side, the minus tangent up to its tangency point, and its continuation to
/// the lower boundary.
pub fn interior_boundaries(params: &Params, c: &DerivedConstants) -> [BoundaryPiece; 3] {
    let p1 = params.p1;
    let lp = tangent_line(1.0, Side::Plus, params, c);
    let lm = tangent_line(1.0, Side::Minus, params, c);
    [
        BoundaryPiece { name: "l_plus", line: lp, from: 1.0, to: c.gamma_plus.powf(p1) },
        BoundaryPiece { name: "l_minus", line: lm, from: 1.0, to: c.gamma_minus.powf(p1) },
        BoundaryPiece { name: "iii_iv", line: lm, from: c.gamma_minus.powf(p1), to: c.v_minus.powf(p1) },
    ]
}

fn straddling_pair<R: Rng>(
    piece: &BoundaryPiece,
    params: &Params,
    rng: &mut R,
) -> Option<((f64, f64), (f64, f64), (f64, f64))> {
    for _ in 0..1000 {
        let t = rng.gen_range(0.02..0.98);
        let m1 = piece.from + t * (piece.to - piece.from);
        let mid = (m1, piece.line.at(m1));
        let scale = mid.0.abs().max(mid.1.abs());
        // Unit normal and tangent of the line.
        let norm = (1.0 + piece.line.slope * piece.line.slope).sqrt();
        let n = (-piece.line.slope / norm, 1.0 / norm);
        let tan = (1.0 / norm, piece.line.slope / norm);
        let tau = rng.gen_range(-1.0..1.0);
        let delta = scale * 10f64.powf(rng.gen_range(-4.0..-2.0));
        let d = (delta * (n.0 + tau * tan.0), delta * (n.1 + tau * tan.1));
        let y = (mid.0 - d.0, mid.1 - d.1);
        let z = (mid.0 + d.0, mid.1 + d.1);
        let inside = |p: (f64, f64)| in_domain(p.0, p.1, params).unwrap_or(false);
        if inside(y) && inside(z) && inside(mid) {
            return Some((y, mid, z));
        }
    }
    None
}

/// Local concavity campaign: finite-difference Hessians at `n_interior` points
/// per interior region and midpoint concavity at `n_boundary` straddling pairs
/// across each interior boundary.
pub fn check_concavity(c: &DerivedConstants, params: &Params, n_interior: usize, n_boundary: usize) -> VerifyReport {
    check_concavity_seeded(c, params, n_interior, n_boundary, 0)
}

pub fn check_concavity_seeded(
    c: &DerivedConstants,
    params: &Params,
    n_interior: usize,
    n_boundary: usize,
    seed: u64,
) -> VerifyReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut details = Vec::new();
    let mut points = Vec::new();
    for region in Region::INTERIOR {
        for _ in 0..n_interior {
            match sample_interior(region, 10.0 * FD_STEP, params, c, &mut rng) {
                Ok(x) => points.push((region, x)),
                Err(_) => details.push(detail((f64::NAN, f64::NAN), format!("sampling_{region}"), f64::INFINITY)),
            }
        }
    }
    let hess: Vec<Detail> = points
        .par_iter()
        .flat_map_iter(|&(region, x)| {
            let h = relative_hessian(x.0, x.1, params, c);
            // Entries near (1,1) reach O(100), where double-precision finite
            // differences cannot resolve an absolute eigenvalue of 1e-6 or
            // determinant of 1e-5, so both are measured relative to the size
            // of the Hessian once it exceeds 1.
            let frob2: f64 = h.iter().flatten().map(|v| v * v).sum();
            let eig = max_eigenvalue(&h) / frob2.sqrt().max(1.0);
            let det = (h[0][0] * h[1][1] - h[0][1] * h[1][0]) / frob2.max(1.0);
            [
                detail(x, format!("hessian_eig_{region}"), eig / HESSIAN_EIG_TOL),
                detail(x, format!("hessian_det_{region}"), det.abs() / HESSIAN_DET_TOL),
            ]
        })
        .collect();
    details.extend(hess);
    let mut triples = Vec::new();
    for piece in interior_boundaries(params, c) {
        for _ in 0..n_boundary {
            match straddling_pair(&piece, params, &mut rng) {
                Some(t) => triples.push((piece.name, t)),
                None => details.push(detail((f64::NAN, f64::NAN), format!("straddle_{}", piece.name), f64::INFINITY)),
            }
        }
    }
    let mids: Vec<Detail> = triples
        .par_iter()
        .map(|&(name, (y, mid, z))| {
            let gap = value(mid.0, mid.1, params, c)
                - 0.5 * (value(y.0, y.1, params, c) + value(z.0, z.1, params, c));
            detail(mid, format!("midpoint_{name}"), -gap / MIDPOINT_TOL)
        })
        .collect();
    details.extend(mids);
    let samples = points.len() + triples.len();
    VerifyReport::from_details("concavity", samples, 1.0, details)
}

/// Log-uniform value grid covering the values extremal weights use near `x`,
/// with the node nearest 1 moved onto 1.
pub fn oracle_value_grid(x1: f64, params: &Params, c: &DerivedConstants, n: usize) -> Vec<f64> {
    let m = x1.powf(1.0 / params.p1);
    let lo = m.min(1.0) * c.v_minus * c.gamma_minus;
    let hi = m.max(1.0) * c.v_plus * c.gamma_plus;
    let (a, b) = (lo.ln(), hi.ln());
    let mut g: Vec<f64> = (0..n)
        .map(|k| (a + (b - a) * k as f64 / (n.max(2) - 1) as f64).exp())
        .collect();
    if let Some(k) = (0..n).min_by(|&i, &j| g[i].ln().abs().total_cmp(&g[j].ln().abs())) {
        g[k] = 1.0;
    }
    g
}

/// Best measure of `{w >= 1}` over step weights with `n_pieces` values from a
/// log-uniform grid and breakpoints from a uniform grid, subject to moments
/// within the relative band of `x` and class membership. Returns `-inf` when
/// no candidate is feasible.
pub fn oracle_max(
    x1: f64,
    x2: f64,
    c: &DerivedConstants,
    params: &Params,
    n_pieces: usize,
    value_grid: usize,
    break_grid: usize,
) -> Result<f64> {
    if !(1..=4).contains(&n_pieces) {
        return Err(ApqError::InvalidParams(format!("oracle supports 1 to 4 pieces, got {n_pieces}")));
    }
    if value_grid < 2 || (n_pieces > 1 && break_grid < n_pieces - 1) {
        return Err(ApqError::InvalidParams("oracle grids too small".into()));
    }
    let values = oracle_value_grid(x1, params, c, value_grid);
    let m1: Vec<f64> = values.iter().map(|v| v.powf(params.p1)).collect();
    let m2: Vec<f64> = values.iter().map(|v| v.powf(params.p2)).collect();
    let breaks: Vec<f64> = (1..=break_grid).map(|k| k as f64 / (break_grid + 1) as f64).collect();
    let layouts = break_layouts(&breaks, n_pieces - 1);
    let n = values.len();
    let tuples = n.pow(n_pieces as u32);
    let best = (0..tuples)
        .into_par_iter()
        .map(|code| {
            let mut idx = [0usize; 4];
            let mut rest = code;
            for slot in idx.iter_mut().take(n_pieces) {
                *slot = rest % n;
                rest /= n;
            }
            let idx = &idx[..n_pieces];
            let mut best = f64::NEG_INFINITY;
            for edges in &layouts {
                let (mut s1, mut s2, mut level) = (0.0, 0.0, 0.0);
                for (k, &i) in idx.iter().enumerate() {
                    let len = edges[k + 1] - edges[k];
                    s1 += len * m1[i];
                    s2 += len * m2[i];
                    if values[i] >= 1.0 {
                        level += len;
                    }
                }
                if level <= best
                    || ((s1 - x1) / x1).abs() > ORACLE_MOMENT_BAND
                    || ((s2 - x2) / x2).abs() > ORACLE_MOMENT_BAND
                {
                    continue;
                }
                let vals: Vec<f64> = idx.iter().map(|&i| values[i]).collect();
                let Ok(w) = Weight::steps(&vals, &edges[1..edges.len() - 1]) else { continue };
                if w.apq_norm(params, 4).is_ok_and(|q| q <= params.q * (1.0 + 1e-6)) {
                    best = level;
                }
            }
            best
        })
        .reduce(|| f64::NEG_INFINITY, f64::max);
    Ok(best)
}

/// All increasing selections of `k` interior breakpoints, with 0 and 1 added.
fn break_layouts(breaks: &[f64], k: usize) -> Vec<Vec<f64>> {
    fn rec(breaks: &[f64], k: usize, start: usize, cur: &mut Vec<f64>, out: &mut Vec<Vec<f64>>) {
        if k == 0 {
            let mut e = vec![0.0];
            e.extend_from_slice(cur);
            e.push(1.0);
            out.push(e);
            return;
        }
        for i in start..breaks.len() {
            cur.push(breaks[i]);
            rec(breaks, k - 1, i + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(breaks, k, 0, &mut Vec::new(), &mut out);
    out
}

/// Upper bound on `|B(y) - B(x)|` for `y` within relative distance `band` of
/// `x` in each coordinate, from one-sided difference quotients at that scale.
pub fn lipschitz_slack(x1: f64, x2: f64, band: f64, params: &Params, c: &DerivedConstants) -> f64 {
    let b0 = value(x1, x2, params, c);
    let mut slack = 0.0;
    for (i, xi) in [x1, x2].into_iter().enumerate() {
        let h = band * xi;
        let mut l: f64 = 0.0;
        for s in [-1.0, 1.0] {
            let y = if i == 0 { (x1 + s * h, x2) } else { (x1, x2 + s * h) };
            if in_domain(y.0, y.1, params).unwrap_or(false) {
                l = l.max((value(y.0, y.1, params, c) - b0).abs() / h);
            }
        }
        slack += l * h;
    }
    // One-sided quotients only see first-order change; double for curvature.
    2.0 * slack
}

/// Deterministic test points for the oracle campaign, cycling through the
/// interior regions.
pub fn oracle_points(params: &Params, c: &DerivedConstants, n: usize, seed: u64) -> Result<Vec<(f64, f64)>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|k| sample_interior(Region::INTERIOR[k % 4], 1e-2, params, c, &mut rng))
        .collect()
}

/// Oracle campaign at the given points: the brute-force value never exceeds
/// `B` by more than the moment-band slack, and the better of the oracle and the
/// extremal weight reaches `B` to within `1e-7`.
pub fn check_oracle(
    points: &[(f64, f64)],
    c: &DerivedConstants,
    params: &Params,
    n_pieces: usize,
    value_grid: usize,
    break_grid: usize,
) -> VerifyReport {
    let mut details = Vec::new();
    for &x in points {
        let b = value(x.0, x.1, params, c);
        let best = oracle_max(x.0, x.1, c, params, n_pieces, value_grid, break_grid).unwrap_or(f64::NAN);
        let slack = lipschitz_slack(x.0, x.1, ORACLE_MOMENT_BAND, params, c) + 1e-9;
        details.push(detail(x, "domination", (best - b) / slack));
        let attained = build(x.0, x.1, params, c).map_or(f64::NEG_INFINITY, |e| e.weight.distribution(1.0));
        details.push(detail(x, "attainment", (b - best.max(attained)) / 1e-7));
    }
    VerifyReport::from_details("oracle", points.len(), 1.0, details)
}

/// Largest `t <= t_max` with the whole segment `[x, x + t d]` inside the domain.
fn extent(x: (f64, f64), d: (f64, f64), params: &Params) -> f64 {
    let inside = |t: f64| {
        let p = (x.0 + t * d.0, x.1 + t * d.1);
        p.0 > 0.0 && p.1 > 0.0 && in_domain(p.0, p.1, params).unwrap_or(false)
    };
    let mut t_max = 4.0;
    for (xi, di) in [(x.0, d.0), (x.1, d.1)] {
        if di < 0.0 {
            t_max = f64::min(t_max, -xi / di);
        }
    }
    let n = 128;
    let mut last = 0.0;
    for k in 1..=n {
        let t = t_max * k as f64 / n as f64;
        if !inside(t) {
            let (mut a, mut b) = (last, t);
            for _ in 0..60 {
                let mid = 0.5 * (a + b);
                if inside(mid) {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            return a;
        }
        last = t;
    }
    t_max
}

/// Two values on the lower boundary whose chord touches the level curve of the
/// class ratio at `x`; returns `(u, v, mu)` with `x = mu*(u^p1,u^p2) + (1-mu)*(v^p1,v^p2)`.
pub fn level_tangent_split(x1: f64, x2: f64, params: &Params) -> Option<(f64, f64, f64)> {
    let r = log_ratio(x1, x2, params);
    if r <= 1e-12 {
        return None;
    }
    let (gm, gp) = solve_gammas(params.p1, params.p2, r.exp()).ok()?;
    let m = x1.powf(1.0 / params.p1);
    let (u, v) = (m / gp, m / gm);
    let (u1, v1) = (u.powf(params.p1), v.powf(params.p1));
    let mu = (x1 - v1) / (u1 - v1);
    (mu.is_finite() && (0.0..=1.0).contains(&mu)).then_some((u, v, mu))
}

struct Tree {
    pieces: Vec<Piece>,
    worst_chord: (f64, (f64, f64)),
}

fn grow<R: Rng>(
    x: (f64, f64),
    lo: f64,
    hi: f64,
    depth: usize,
    params: &Params,
    c: &DerivedConstants,
    rng: &mut R,
    tree: &mut Tree,
) {
    let mut chord = |x: (f64, f64), a: f64, xm: (f64, f64), xp: (f64, f64)| {
        let gap = a * value(xm.0, xm.1, params, c) + (1.0 - a) * value(xp.0, xp.1, params, c)
            - value(x.0, x.1, params, c);
        let gap = if gap.is_nan() { f64::INFINITY } else { gap };
        if gap > tree.worst_chord.0 {
            tree.worst_chord = (gap, x);
        }
    };
    if depth > 0 {
        for _ in 0..64 {
            let theta = rng.gen_range(0.0..std::f64::consts::TAU);
            let d = (x.0 * theta.cos(), x.1 * theta.sin());
            let t_plus = extent(x, d, params);
            let t_minus = extent(x, (-d.0, -d.1), params);
            if t_plus < 1e-9 || t_minus < 1e-9 {
                continue;
            }
            let a = rng.gen_range(0.2..0.8);
            // x = a*x_minus + (1-a)*x_plus with x_minus = x - s_m d, x_plus = x + s_p d.
            let cap = t_plus.min(t_minus * a / (1.0 - a)) * 0.999;
            let s_p = cap * rng.gen_range(0.05..1.0);
            let s_m = s_p * (1.0 - a) / a;
            let xm = (x.0 - s_m * d.0, x.1 - s_m * d.1);
            let xp = (x.0 + s_p * d.0, x.1 + s_p * d.1);
            chord(x, a, xm, xp);
            let cut = lo + a * (hi - lo);
            grow(xm, lo, cut, depth - 1, params, c, rng, tree);
            grow(xp, cut, hi, depth - 1, params, c, rng, tree);
            return;
        }
    }
    match level_tangent_split(x.0, x.1, params) {
        Some((u, v, mu)) => {
            let (pu, pv) = (gamma1_point(u, params), gamma1_point(v, params));
            chord(x, mu, pu, pv);
            let cut = lo + mu * (hi - lo);
            tree.pieces.push(Piece::Const { value: u, lo, hi: cut });
            tree.pieces.push(Piece::Const { value: v, lo: cut, hi });
        }
        None => {
            let m = x.0.powf(1.0 / params.p1);
            tree.pieces.push(Piece::Const { value: m, lo, hi });
        }
    }
}

/// A random weight built by recursive splitting from `x`, with the worst chord
/// inequality gap met along the way.
pub fn random_split_weight<R: Rng>(
    x: (f64, f64),
    depth: usize,
    params: &Params,
    c: &DerivedConstants,
    rng: &mut R,
) -> Result<(Weight, f64)> {
    let mut tree = Tree { pieces: Vec::new(), worst_chord: (f64::NEG_INFINITY, x) };
    grow(x, 0.0, 1.0, depth, params, c, rng, &mut tree);
    let w = Weight::from_pieces_lossy(tree.pieces)?;
    Ok((w, tree.worst_chord.0))
}

fn sample_domain<R: Rng>(params: &Params, c: &DerivedConstants, rng: &mut R) -> (f64, f64) {
    let (lo, hi) = sampling_box(c);
    let m = rng.gen_range(lo..hi).exp();
    let r = rng.gen_range(0.0..=params.q.ln());
    point_from(m, r, params)
}

/// Majorization campaign over `n_weights` random split weights.
pub fn check_majorization(c: &DerivedConstants, params: &Params, n_weights: usize, seed: u64) -> VerifyReport {
    check_majorization_with_depth(c, params, n_weights, seed, SPLIT_DEPTH)
}

pub fn check_majorization_with_depth(
    c: &DerivedConstants,
    params: &Params,
    n_weights: usize,
    seed: u64,
    depth: usize,
) -> VerifyReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let starts: Vec<((f64, f64), u64)> =
        (0..n_weights).map(|_| (sample_domain(params, c, &mut rng), rng.gen())).collect();
    let details: Vec<Detail> = starts
        .par_iter()
        .flat_map_iter(|&(x, s)| {
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            match random_split_weight(x, depth, params, c, &mut rng) {
                Ok((w, chord_gap)) => {
                    let level = w.distribution(1.0);
                    let bound = w.moments(params).map_or(f64::NAN, |m| value(m.x1, m.x2, params, c));
                    vec![
                        detail(x, "level_set", (level - bound) / MAJORIZATION_TOL),
                        detail(x, "chord", chord_gap / MAJORIZATION_TOL),
                    ]
                }
                Err(_) => vec![detail(x, "construction", f64::INFINITY)],
            }
        })
        .collect();
    VerifyReport::from_details("majorization", n_weights, 1.0, details)
}
