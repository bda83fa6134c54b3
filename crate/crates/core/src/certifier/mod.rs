//! Grid certification of the two entropy inequalities behind the degree-5.325
//! construction, plus pointwise checks of the closed-form degree conditions.
//!
//! Each cell `X_i × Y_j` gets interval enclosures of the arguments of `H`.
//! Terms on the left are bounded below by chords, terms on the right above
//! by midpoint tangents, which turns the inequality into an affine one on
//! the cell; it is then checked at the vertices of the feasible polygon.

mod direct;
mod real;

pub use direct::{check_pairexp_degree, direct_check_ratio, ratio_at, DirectReport, PairDegreeCheck, RatioForm};

use std::fmt::Write as _;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::profiles::{make_e_profile, PiecewiseLinear, ProfileConstants};
use real::{chord, entropy, max_r, min_r, tangent, unit, Affine, Real, Refined};

/// Cells whose `f64` slack lies this close to the margin are re-evaluated
/// with 120-bit arithmetic before the verdict is taken.
pub const REFINE_BAND: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub x: (f64, f64),
    pub y: (f64, f64),
}

impl Cell {
    pub fn new(x: (f64, f64), y: (f64, f64)) -> Result<Self> {
        if !(x.0 <= x.1 && y.0 <= y.1) || [x.0, x.1, y.0, y.1].iter().any(|v| !v.is_finite()) {
            return Err(invalid(format!("bad cell {x:?} × {y:?}")));
        }
        Ok(Self { x, y })
    }
}

/// Vertices of `cell ∩ {y ≤ γx}` for `γ = 1`, without duplicates. This
/// includes the point `(x_min, x_min)` where the diagonal leaves the cell
/// through its left side, which the plain four-point list omits.
pub fn corner_points(cell: &Cell) -> Vec<(f64, f64)> {
    let (x0, x1) = cell.x;
    let (y0, y1) = cell.y;
    let rect = [(x0, y0), (x1, y0), (x1, y1), (x0, y1)];
    let inside = |p: (f64, f64)| p.1 <= p.0;
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(5);
    let push = |p: (f64, f64), out: &mut Vec<(f64, f64)>| {
        if !out.contains(&p) {
            out.push(p);
        }
    };
    for k in 0..4 {
        let p = rect[k];
        let q = rect[(k + 1) % 4];
        if inside(p) {
            push(p, &mut out);
        }
        if inside(p) != inside(q) {
            // edges are axis-aligned, so the crossing with y = x is exact
            let c = if p.1 == q.1 { (p.1, p.1) } else { (p.0, p.0) };
            push(c, &mut out);
        }
    }
    out
}

/// The four points `(max(x_min, y_min), y_min)`, `(x_max, y_min)`,
/// `(max(x_min, y_max), y_max)`, `(x_max, y_max)` restricted to `y ≤ x`.
pub fn four_corner_points(cell: &Cell) -> Vec<(f64, f64)> {
    let (x0, x1) = cell.x;
    let (y0, y1) = cell.y;
    let mut out = Vec::new();
    for p in [(x0.max(y0), y0), (x1, y0), (x0.max(y1), y1), (x1, y1)] {
        if p.1 <= p.0 && p.0 <= x1 && !out.contains(&p) {
            out.push(p);
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairParams {
    pub delta: f64,
    pub gamma: f64,
    pub p: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpansionParams {
    pub delta: f64,
    pub big_delta: f64,
}

/// The chord/tangent strengthening of one inequality on one cell: an affine
/// function `c0 + cx·x + cy·y` that lies below the true slack on the cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellBound {
    pub c0: f64,
    pub cx: f64,
    pub cy: f64,
}

impl CellBound {
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.c0 + self.cx * x + self.cy * y
    }
}

// affine slack bound c0 + cx·x + cy·y in scalar type R
struct Lin<R> {
    c0: R,
    cx: R,
    cy: R,
}

impl<R: Real> Lin<R> {
    fn eval(&self, x: R, y: R) -> R {
        self.c0.clone() + self.cx.clone() * x + self.cy.clone() * y
    }
}

fn pair_lin<R: Real>(p: &PairParams, cell: &Cell) -> Lin<R> {
    let f = R::from_f64;
    let (x0, x1, y0, y1) = (f(cell.x.0), f(cell.x.1), f(cell.y.0), f(cell.y.1));
    let (d, g, pa) = (f(p.delta), f(p.gamma), f(p.p));
    let one = R::one();
    let od = one.clone() - d.clone();

    let (p1, q1) = unit(x0.clone(), x1.clone());
    let (p2, q2) = unit(y0.clone(), y1.clone());
    let (p3, q3) = unit(y0.clone() / d.clone(), y1.clone() / d.clone());
    let (p4, q4) = unit(
        (x0.clone() - y1.clone()) / od.clone(),
        (x1.clone() - y0.clone()) / od.clone(),
    );
    let (p5, q5) = unit(y0 / (g.clone() * x1), y1 / (g.clone() * x0));
    let l1 = chord(&p1, &q1);
    let l2 = chord(&p2, &q2);
    let u3 = tangent(&p3, &q3);
    let u4 = tangent(&p4, &q4);
    let u5 = tangent(&p5, &q5);
    let h_half = entropy(&(one.clone() / (f(2.0) * g.clone())));

    // LHS: (1−p)(a1 + b1 x) + 2γp·H(1/2γ)·x + a2 + b2 y
    // RHS: δ a3 + b3 y + (1−δ) a4 + b4 (x − y) + γ a5 x + b5 y
    let om = one - pa.clone();
    let c0 = om.clone() * l1.a + l2.a - d * u3.a - od * u4.a.clone();
    let cx = om * l1.b + f(2.0) * g.clone() * pa * h_half - u4.b.clone() - g * u5.a;
    let cy = l2.b - u3.b + u4.b - u5.b;
    Lin { c0, cx, cy }
}

/// An affine piece of `e`: `e(x) = e0 + s·x`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct EPiece {
    e0: f64,
    s: f64,
}

fn exp_lin<R: Real>(p: &ExpansionParams, e: EPiece, cell: &Cell) -> Lin<R> {
    let f = R::from_f64;
    let (x0, x1, y0, y1) = (f(cell.x.0), f(cell.x.1), f(cell.y.0), f(cell.y.1));
    let (d, bd) = (f(p.delta), f(p.big_delta));
    let (e0, s) = (f(e.e0), f(e.s));
    let ex = |x: &R| e0.clone() + s.clone() * x.clone();
    let (ex0, ex1) = (ex(&x0), ex(&x1));
    let one = R::one();
    let od = one.clone() - d.clone();

    let (p1, q1) = unit(x0.clone(), x1.clone());
    let (r0, r1) = (x0.clone() / ex0.clone(), x1.clone() / ex1.clone());
    let (p2, q2) = unit(min_r(r0.clone(), r1.clone()), max_r(r0, r1));
    let (p3, q3) = unit(y0.clone(), y1.clone());
    let (p4, q4) = unit(y0.clone() / d.clone(), y1.clone() / d.clone());
    let (p5, q5) = unit(
        (x0.clone() - y1.clone()) / od.clone(),
        (x1.clone() - y0.clone()) / od.clone(),
    );
    let (p6, q6) = unit(
        y0 / max_r(ex0.clone(), ex1.clone()),
        y1 / min_r(ex0, ex1),
    );
    let l1 = chord(&p1, &q1);
    let l2 = chord(&p2, &q2);
    let l3 = chord(&p3, &q3);
    let u4 = tangent(&p4, &q4);
    let u5 = tangent(&p5, &q5);
    let u6 = tangent(&p6, &q6);

    // LHS: (1−Δ)(a1 + b1 x) + Δ(a2 e(x) + b2 x) + a3 + b3 y
    // RHS: δ a4 + b4 y + (1−δ) a5 + b5 (x − y) + a6 e(x) + b6 y
    // with e(x) = e0 + s x
    let ob = one - bd.clone();
    let Affine { a: a2, b: b2 } = l2;
    let c0 = ob.clone() * l1.a + bd.clone() * a2.clone() * e0.clone() + l3.a
        - d * u4.a
        - od * u5.a.clone()
        - u6.a.clone() * e0;
    let cx = ob * l1.b + bd * (a2 * s.clone() + b2) - u5.b.clone() - u6.a * s;
    let cy = l3.b - u4.b + u5.b - u6.b;
    Lin { c0, cx, cy }
}

fn to_bound(l: Lin<f64>) -> CellBound {
    CellBound {
        c0: l.c0,
        cx: l.cx,
        cy: l.cy,
    }
}

/// The strengthened pair inequality on `cell`, as an affine lower bound of
/// `LHS − RHS`.
pub fn pair_cell_bound(p: &PairParams, cell: &Cell) -> CellBound {
    to_bound(pair_lin::<f64>(p, cell))
}

/// True `LHS − RHS` of the pair inequality at a point.
pub fn pair_true_slack(p: &PairParams, x: f64, y: f64) -> f64 {
    let h = |v: f64| entropy(&v);
    let (d, g, pa) = (p.delta, p.gamma, p.p);
    let lhs = h(x) * (1.0 - pa) + 2.0 * g * pa * x * h(1.0 / (2.0 * g)) + h(y);
    let rhs = d * h(y / d) + (1.0 - d) * h((x - y) / (1.0 - d)) + g * x * h(y / (g * x));
    lhs - rhs
}

fn expansion_piece(e: &PiecewiseLinear, lo: f64, hi: f64) -> Result<EPiece> {
    let pts = e.points();
    let seg = pts
        .windows(2)
        .find(|w| w[0].0 <= lo && hi <= w[1].0)
        .ok_or_else(|| {
            invalid(format!(
                "e is not affine on [{lo}, {hi}]; split the interval at its breakpoints"
            ))
        })?;
    let s = (seg[1].1 - seg[0].1) / (seg[1].0 - seg[0].0);
    Ok(EPiece {
        e0: seg[0].1 - s * seg[0].0,
        s,
    })
}

/// The strengthened expansion inequality on `cell`; `e` must be affine on
/// the cell's x-range.
pub fn expansion_cell_bound(
    p: &ExpansionParams,
    e: &PiecewiseLinear,
    cell: &Cell,
) -> Result<CellBound> {
    let piece = expansion_piece(e, cell.x.0, cell.x.1)?;
    Ok(to_bound(exp_lin::<f64>(p, piece, cell)))
}

/// True `LHS − RHS` of the expansion inequality at a point.
pub fn expansion_true_slack(p: &ExpansionParams, e: &PiecewiseLinear, x: f64, y: f64) -> Result<f64> {
    let h = |v: f64| entropy(&v);
    let ex = e.eval(x)?;
    let (d, bd) = (p.delta, p.big_delta);
    let lhs = h(x) * (1.0 - bd) + bd * ex * h(x / ex) + h(y);
    let rhs = d * h(y / d) + (1.0 - d) * h((x - y) / (1.0 - d)) + ex * h(y / ex);
    Ok(lhs - rhs)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellId {
    /// Index of the x-interval (always 0 for the pair lemma).
    pub interval: usize,
    pub i: usize,
    pub j: usize,
    pub x: (f64, f64),
    pub y: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalSummary {
    pub x_range: (f64, f64),
    pub min_slack: f64,
    pub argmin_cell: Option<CellId>,
    pub failing_cells: usize,
    pub pass: bool,
}

/// Result of a grid certification. `pass` iff no cell fails and the minimum
/// slack reaches the margin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertReport {
    pub lemma: String,
    pub params: serde_json::Value,
    pub grid: usize,
    pub margin: f64,
    pub min_slack: f64,
    pub argmin_cell: Option<CellId>,
    pub corners_evaluated: u64,
    /// Total failing cells; `failing_cells` lists the first few in index order.
    pub failing_count: usize,
    pub failing_cells: Vec<CellId>,
    pub refined_cells: u64,
    pub intervals: Vec<IntervalSummary>,
    pub pass: bool,
    #[serde(skip)]
    pub runtime: Duration,
}

/// Failing cells listed in a report.
pub const FAILING_CELLS_LISTED: usize = 100;

impl CertReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Grid and output options shared by both lemmas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridOptions {
    pub grid_n: usize,
    pub margin: f64,
    /// Keep every cell's slack for [`cell_slacks_csv`].
    pub keep_cells: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellSlack {
    pub id: CellId,
    pub slack: f64,
}

// i-th of n evenly spaced points of [lo, hi], endpoints exact
fn grid_point(lo: f64, hi: f64, i: usize, n: usize) -> f64 {
    if i == n {
        hi
    } else {
        lo + (hi - lo) * i as f64 / n as f64
    }
}

#[derive(Default)]
struct Row {
    min: Option<(f64, CellId)>,
    corners: u64,
    refined: u64,
    failing: Vec<CellId>,
    failing_count: usize,
    cells: Vec<CellSlack>,
}

/// Certifies one x-range: `grid_n` x-cells, each with `grid_n` y-cells on
/// `[0, min(x_max, y_cap)]`.
fn certify_range<F, G>(
    interval: usize,
    x_range: (f64, f64),
    y_cap: f64,
    opts: &GridOptions,
    fast: F,
    refined: G,
) -> (IntervalSummary, Row)
where
    F: Fn(&Cell) -> Lin<f64> + Sync,
    G: Fn(&Cell) -> Lin<Refined> + Sync,
{
    let n = opts.grid_n;
    let rows: Vec<Row> = (0..n)
        .into_par_iter()
        .map(|i| {
            let x = (grid_point(x_range.0, x_range.1, i, n), grid_point(x_range.0, x_range.1, i + 1, n));
            let y_top = x.1.min(y_cap);
            let mut row = Row::default();
            for j in 0..n {
                let y = (grid_point(0.0, y_top, j, n), grid_point(0.0, y_top, j + 1, n));
                let cell = Cell { x, y };
                let corners = corner_points(&cell);
                row.corners += corners.len() as u64;
                if corners.is_empty() {
                    continue;
                }
                let lin = fast(&cell);
                let mut slack = corners
                    .iter()
                    .map(|&(cx, cy)| lin.eval(cx, cy))
                    .fold(f64::INFINITY, f64::min);
                if (slack - opts.margin).abs() <= REFINE_BAND || slack.is_nan() {
                    let lin = refined(&cell);
                    slack = corners
                        .iter()
                        .map(|&(cx, cy)| lin.eval(Refined::from_f64(cx), Refined::from_f64(cy)).to_f64())
                        .fold(f64::INFINITY, f64::min);
                    row.refined += 1;
                }
                let id = CellId { interval, i, j, x, y };
                // NaN never passes
                let ok = slack >= opts.margin;
                if !ok {
                    row.failing_count += 1;
                    if row.failing.len() < FAILING_CELLS_LISTED {
                        row.failing.push(id);
                    }
                }
                let s = if slack.is_nan() { f64::NEG_INFINITY } else { slack };
                if row.min.is_none_or(|(m, _)| s < m) {
                    row.min = Some((s, id));
                }
                if opts.keep_cells {
                    row.cells.push(CellSlack { id, slack });
                }
            }
            row
        })
        .collect();
    let mut total = Row::default();
    for r in rows {
        if let Some((s, id)) = r.min {
            if total.min.is_none_or(|(m, _)| s < m) {
                total.min = Some((s, id));
            }
        }
        total.corners += r.corners;
        total.refined += r.refined;
        total.failing_count += r.failing_count;
        for id in r.failing {
            if total.failing.len() < FAILING_CELLS_LISTED {
                total.failing.push(id);
            }
        }
        total.cells.extend(r.cells);
    }
    let min_slack = total.min.map_or(f64::INFINITY, |(s, _)| s);
    let summary = IntervalSummary {
        x_range,
        min_slack,
        argmin_cell: total.min.map(|(_, id)| id),
        failing_cells: total.failing_count,
        pass: total.failing_count == 0 && min_slack >= opts.margin,
    };
    (summary, total)
}

fn check_grid(opts: &GridOptions) -> Result<()> {
    if opts.grid_n == 0 || !opts.margin.is_finite() {
        return Err(invalid("grid must be >= 1 and margin finite"));
    }
    Ok(())
}

fn check_lower_constraint(x_max: f64, delta: f64) -> Result<()> {
    // y >= x + δ − 1 must be implied by y >= 0
    if x_max + delta - 1.0 > 0.0 {
        return Err(invalid(format!(
            "constraint y >= x + delta - 1 is active for x up to {x_max} with delta = {delta}; not supported"
        )));
    }
    Ok(())
}

fn assemble(
    lemma: &str,
    params: serde_json::Value,
    opts: &GridOptions,
    parts: Vec<(IntervalSummary, Row)>,
    started: Instant,
) -> (CertReport, Vec<CellSlack>) {
    let mut min: Option<(f64, CellId)> = None;
    let mut corners = 0;
    let mut refined = 0;
    let mut failing = Vec::new();
    let mut failing_count = 0;
    let mut cells = Vec::new();
    let mut intervals = Vec::new();
    for (summary, row) in parts {
        if let Some((s, id)) = row.min {
            if min.is_none_or(|(m, _)| s < m) {
                min = Some((s, id));
            }
        }
        corners += row.corners;
        refined += row.refined;
        failing_count += row.failing_count;
        for id in row.failing {
            if failing.len() < FAILING_CELLS_LISTED {
                failing.push(id);
            }
        }
        cells.extend(row.cells);
        intervals.push(summary);
    }
    let min_slack = min.map_or(f64::INFINITY, |(s, _)| s);
    let report = CertReport {
        lemma: lemma.into(),
        params,
        grid: opts.grid_n,
        margin: opts.margin,
        min_slack,
        argmin_cell: min.map(|(_, id)| id),
        corners_evaluated: corners,
        failing_count,
        failing_cells: failing,
        refined_cells: refined,
        intervals,
        pass: failing_count == 0 && min_slack >= opts.margin,
        runtime: started.elapsed(),
    };
    (report, cells)
}

/// Certifies `H(x)(1−p) + 2γpx·H(1/2γ) + H(y) > δH(y/δ) + (1−δ)H((x−y)/(1−δ)) + γx·H(y/γx)`
/// for `x ∈ x_range`, `0 ≤ y ≤ min(x, δ)`. Only `γ = 1` is supported.
pub fn certify_pair_lemma(
    params: PairParams,
    x_range: (f64, f64),
    opts: &GridOptions,
) -> Result<(CertReport, Vec<CellSlack>)> {
    let started = Instant::now();
    check_grid(opts)?;
    if params.gamma != 1.0 {
        return Err(invalid("only gamma = 1 is supported"));
    }
    if !(params.delta > 0.0 && params.delta <= 0.5) {
        return Err(invalid(format!("delta = {} not in (0, 1/2]", params.delta)));
    }
    if !(0.0..=1.0).contains(&params.p) {
        return Err(invalid(format!("p = {} not in [0, 1]", params.p)));
    }
    if !(x_range.0 > 0.0 && x_range.0 < x_range.1 && x_range.1 < 1.0) {
        return Err(invalid(format!("x range {x_range:?} must satisfy 0 < x_min < x_max < 1")));
    }
    if 2.0 * params.gamma * x_range.1 > 1.0 {
        return Err(invalid("need 2·gamma·x <= 1 on the x range"));
    }
    check_lower_constraint(x_range.1, params.delta)?;
    let part = certify_range(
        0,
        x_range,
        params.delta,
        opts,
        |c| pair_lin::<f64>(&params, c),
        |c| pair_lin::<Refined>(&params, c),
    );
    let json = serde_json::json!({
        "delta": params.delta,
        "gamma": params.gamma,
        "p": params.p,
        "x_range": [x_range.0, x_range.1],
    });
    Ok(assemble("pair", json, opts, vec![part], started))
}

/// The four x-ranges on which the Theorem 3 profile is affine:
/// `[0.21, C1], [C1, C3], [C3, C5], [C5, 0.48]`.
pub fn default_expansion_intervals(c: &ProfileConstants) -> Vec<(f64, f64)> {
    let cf = c.c_f64();
    vec![(0.21, cf[0]), (cf[0], cf[2]), (cf[2], cf[4]), (cf[4], 0.48)]
}

/// Certifies `H(x)(1−Δ) + Δe(x)H(x/e(x)) + H(y) > δH(y/δ) + (1−δ)H((x−y)/(1−δ)) + e(x)H(y/e(x))`
/// over each x-interval (on which `e` must be affine) and `0 ≤ y ≤ min(x, δ)`.
pub fn certify_expansion_lemma(
    params: ExpansionParams,
    constants: &ProfileConstants,
    x_intervals: &[(f64, f64)],
    opts: &GridOptions,
) -> Result<(CertReport, Vec<CellSlack>)> {
    let started = Instant::now();
    check_grid(opts)?;
    if !(params.delta > 0.0 && params.delta < 1.0) || !(0.0..=1.0).contains(&params.big_delta) {
        return Err(invalid("need 0 < delta < 1 and 0 <= Delta <= 1"));
    }
    if x_intervals.is_empty() {
        return Err(invalid("no x intervals given"));
    }
    let e = make_e_profile(constants)?;
    let mut parts = Vec::with_capacity(x_intervals.len());
    for (k, &(lo, hi)) in x_intervals.iter().enumerate() {
        if !(lo > 0.0 && lo < hi && hi < 1.0) {
            return Err(invalid(format!("x interval [{lo}, {hi}] must satisfy 0 < lo < hi < 1")));
        }
        check_lower_constraint(hi, params.delta)?;
        let piece = expansion_piece(&e, lo, hi)?;
        if piece.e0 + piece.s * lo <= lo || piece.e0 + piece.s * hi <= hi {
            return Err(invalid(format!("need x < e(x) on [{lo}, {hi}]")));
        }
        parts.push(certify_range(
            k,
            (lo, hi),
            params.delta,
            opts,
            |c| exp_lin::<f64>(&params, piece, c),
            |c| exp_lin::<Refined>(&params, piece, c),
        ));
    }
    let json = serde_json::json!({
        "delta": params.delta,
        "Delta": params.big_delta,
        "constants": constants.c_f64(),
        "x_intervals": x_intervals,
    });
    Ok(assemble("expansion", json, opts, parts, started))
}

/// `interval,i,j,x_min,x_max,y_min,y_max,slack` per cell.
pub fn cell_slacks_csv(cells: &[CellSlack]) -> String {
    let mut out = String::from("interval,i,j,x_min,x_max,y_min,y_max,slack\n");
    for c in cells {
        let id = &c.id;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            id.interval, id.i, id.j, id.x.0, id.x.1, id.y.0, id.y.1, c.slack
        );
    }
    out
}

/// Evaluates one pair-lemma cell at its polygon vertices; returns the
/// minimum bounded slack and the vertices used.
pub fn evaluate_pair_cell(p: &PairParams, cell: &Cell) -> (f64, Vec<(f64, f64)>) {
    let corners = corner_points(cell);
    let b = pair_cell_bound(p, cell);
    let m = corners
        .iter()
        .map(|&(x, y)| b.eval(x, y))
        .fold(f64::INFINITY, f64::min);
    (m, corners)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    const PAIR: PairParams = PairParams {
        delta: 0.325,
        gamma: 1.0,
        p: 0.45,
    };
    const EXP: ExpansionParams = ExpansionParams {
        delta: 0.325,
        big_delta: 0.18,
    };

    fn opts(grid_n: usize, margin: f64) -> GridOptions {
        GridOptions {
            grid_n,
            margin,
            keep_cells: false,
        }
    }

    fn sorted(mut v: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v
    }

    #[test]
    fn corner_examples() {
        let c = Cell::new((0.3, 0.31), (0.29, 0.305)).unwrap();
        let four = four_corner_points(&c);
        assert_eq!(
            sorted(four.clone()),
            sorted(vec![(0.3, 0.29), (0.31, 0.29), (0.305, 0.305), (0.31, 0.305)])
        );
        let all = corner_points(&c);
        assert_eq!(sorted(all), sorted([four, vec![(0.3, 0.3)]].concat()));

        let below = Cell::new((0.3, 0.31), (0.1, 0.2)).unwrap();
        assert_eq!(
            sorted(corner_points(&below)),
            sorted(vec![(0.3, 0.1), (0.31, 0.1), (0.31, 0.2), (0.3, 0.2)])
        );
        assert!(corner_points(&Cell::new((0.1, 0.2), (0.3, 0.4)).unwrap()).is_empty());
        assert!(Cell::new((0.2, 0.1), (0.0, 0.1)).is_err());
    }

    #[test]
    fn flat_y_cell_reduces() {
        let c = Cell::new((0.3, 0.31), (0.0, 0.0)).unwrap();
        let (m, corners) = evaluate_pair_cell(&PAIR, &c);
        assert_eq!(corners.len(), 2);
        // with y = 0 only H(x)(1−p) + 2p·x·H(1/2) − (1−δ)H(x/(1−δ)) survives,
        // bounded by the chord of H(x) and the tangent at the middle of x/(1−δ)
        let h = |v: f64| entropy(&v);
        let d = PAIR.delta;
        let (a, b) = (0.3 / (1.0 - d), 0.31 / (1.0 - d));
        let mid = 0.5 * (a + b);
        let slope = ((1.0 - mid) / mid).ln();
        let want = |x: f64| {
            let chord = h(0.3) + (h(0.31) - h(0.3)) / 0.01 * (x - 0.3);
            let tang = h(mid) + slope * (x / (1.0 - d) - mid);
            chord * (1.0 - PAIR.p) + 2.0 * PAIR.p * x * h(0.5) - (1.0 - d) * tang
        };
        assert!((m - want(0.3).min(want(0.31))).abs() < 1e-14);
        assert!(m <= pair_true_slack(&PAIR, 0.3, 0.0));
    }

    #[test]
    fn pair_lemma_small_grid_passes() {
        let (r, _) = certify_pair_lemma(PAIR, (0.3, 0.3322), &opts(100, 1e-4)).unwrap();
        assert!(r.pass, "{r:?}");
        assert_eq!(r.failing_count, 0);
        assert!(r.corners_evaluated >= 4 * 100 * 100);
    }

    #[test]
    fn expansion_lemma_small_grid_passes() {
        let c = ProfileConstants::theorem3();
        let iv = default_expansion_intervals(&c);
        let (r, _) = certify_expansion_lemma(EXP, &c, &iv, &opts(100, 1e-4)).unwrap();
        assert!(r.pass, "{:?}", r.intervals);
        assert_eq!(r.intervals.len(), 4);
    }

    #[test]
    fn expansion_without_big_delta_regression() {
        let c = ProfileConstants::theorem3();
        let iv = default_expansion_intervals(&c);
        let p = ExpansionParams { big_delta: 0.0, ..EXP };
        let (r, _) = certify_expansion_lemma(p, &c, &iv, &opts(1000, 1e-4)).unwrap();
        assert!(r.pass);
        assert_eq!(r.failing_count, 0);
        assert!((r.min_slack - 0.0496024).abs() < 1e-7, "{}", r.min_slack);
        let cell = r.argmin_cell.unwrap();
        assert_eq!((cell.interval, cell.i, cell.j), (0, 0, 176));
    }

    #[test]
    fn single_cell_on_middle_piece() {
        use crate::entropy::{chord_lower, tangent_upper};
        let c = ProfileConstants::theorem3();
        let cf = c.c_f64();
        let (lo, hi) = (cf[2], cf[4]);
        let (r, _) = certify_expansion_lemma(EXP, &c, &[(lo, hi)], &opts(1, 1e-4)).unwrap();
        assert_eq!(r.corners_evaluated, 4);

        // e has slope 1 on [C3, C5]: e(x) = x + (C4 − C3)
        let e = |x: f64| x + cf[3] - cf[2];
        let (d, bd) = (EXP.delta, EXP.big_delta);
        let (y0, y1) = (0.0, hi.min(d));
        let l1 = chord_lower(lo, hi).unwrap();
        let l2 = chord_lower(lo / e(lo), hi / e(hi)).unwrap();
        let l3 = chord_lower(y0, y1).unwrap();
        let u4 = tangent_upper(y0 / d, y1 / d).unwrap();
        let u5 = tangent_upper((lo - y1) / (1.0 - d), (hi - y0) / (1.0 - d)).unwrap();
        let u6 = tangent_upper(y0 / e(hi), y1 / e(lo)).unwrap();
        let slack = |x: f64, y: f64| {
            let lhs = (1.0 - bd) * l1.eval(x) + bd * e(x) * l2.eval(x / e(x)) + l3.eval(y);
            let rhs = d * u4.eval(y / d) + (1.0 - d) * u5.eval((x - y) / (1.0 - d)) + e(x) * u6.eval(y / e(x));
            lhs - rhs
        };
        let want = [(lo, y0), (hi, y0), (lo, y1), (hi, y1)]
            .iter()
            .map(|&(x, y)| slack(x, y))
            .fold(f64::INFINITY, f64::min);
        assert!((r.min_slack - want).abs() < 1e-12, "{} vs {want}", r.min_slack);
        // the bounds are loose on one big cell, so this fails
        assert!(!r.pass);
    }

    #[test]
    fn rejections() {
        let o = opts(10, 1e-4);
        assert!(certify_pair_lemma(PairParams { gamma: 0.9, ..PAIR }, (0.3, 0.33), &o).is_err());
        assert!(certify_pair_lemma(PairParams { delta: 0.6, ..PAIR }, (0.3, 0.33), &o).is_err());
        assert!(certify_pair_lemma(PAIR, (0.3, 0.7), &o).is_err());
        let c = ProfileConstants::theorem3();
        // crosses the C1 breakpoint
        assert!(certify_expansion_lemma(EXP, &c, &[(0.21, 0.3)], &o).is_err());
        assert!(certify_expansion_lemma(ExpansionParams { delta: 0.9, ..EXP }, &c, &[(0.6, 0.66)], &o).is_err());
    }

    #[test]
    fn refinement_near_margin() {
        let (r, _) = certify_pair_lemma(PAIR, (0.3, 0.3322), &opts(20, 1e-4)).unwrap();
        let (r2, _) = certify_pair_lemma(PAIR, (0.3, 0.3322), &opts(20, r.min_slack)).unwrap();
        assert!(r2.refined_cells >= 1);
        assert!((r2.min_slack - r.min_slack).abs() < 1e-12);
    }

    #[test]
    fn deterministic_across_thread_counts() {
        let run = || certify_pair_lemma(PAIR, (0.3, 0.3322), &opts(60, 1e-4)).unwrap().0;
        let a = run();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(run);
        assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
        let c = ProfileConstants::theorem3();
        let iv = default_expansion_intervals(&c);
        let e1 = certify_expansion_lemma(EXP, &c, &iv, &opts(30, 1e-4)).unwrap().0;
        let e2 = pool.install(|| certify_expansion_lemma(EXP, &c, &iv, &opts(30, 1e-4)).unwrap().0);
        assert_eq!(e1.to_json().unwrap(), e2.to_json().unwrap());
    }

    #[test]
    fn grid_refinement_does_not_lower_slack() {
        let a = certify_pair_lemma(PAIR, (0.3, 0.3322), &opts(100, 1e-4)).unwrap().0;
        let b = certify_pair_lemma(PAIR, (0.3, 0.3322), &opts(200, 1e-4)).unwrap().0;
        assert!(b.min_slack >= a.min_slack - 1e-12);
    }

    #[test]
    fn csv_dump() {
        let o = GridOptions {
            keep_cells: true,
            ..opts(3, 1e-4)
        };
        let (_, cells) = certify_pair_lemma(PAIR, (0.3, 0.3322), &o).unwrap();
        assert_eq!(cells.len(), 9);
        let csv = cell_slacks_csv(&cells);
        assert_eq!(csv.lines().count(), 10);
        assert!(csv.starts_with("interval,i,j,"));
    }

    fn random_cell(rng: &mut impl Rng, x_range: (f64, f64), n: usize) -> Cell {
        let i = rng.gen_range(0..n);
        let x = (grid_point(x_range.0, x_range.1, i, n), grid_point(x_range.0, x_range.1, i + 1, n));
        let top = x.1.min(0.325);
        let j = rng.gen_range(0..n);
        Cell {
            x,
            y: (grid_point(0.0, top, j, n), grid_point(0.0, top, j + 1, n)),
        }
    }

    fn feasible_samples(rng: &mut impl Rng, cell: &Cell, count: usize) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        while out.len() < count {
            let x = rng.gen_range(cell.x.0..=cell.x.1);
            let y = rng.gen_range(cell.y.0..=cell.y.1);
            if y <= x {
                out.push((x, y));
            }
        }
        out
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn pair_cells_are_sound(seed in any::<u64>(), n in 5usize..400) {
            let mut rng = crate::rng::substream(seed, 0);
            let cell = random_cell(&mut rng, (0.3, 0.3322), n);
            let (m, corners) = evaluate_pair_cell(&PAIR, &cell);
            prop_assume!(!corners.is_empty());
            let b = pair_cell_bound(&PAIR, &cell);
            for (x, y) in feasible_samples(&mut rng, &cell, 10) {
                let t = pair_true_slack(&PAIR, x, y);
                prop_assert!(t >= b.eval(x, y) - 1e-12);
                prop_assert!(t >= m - 1e-12);
            }
        }

        #[test]
        fn expansion_cells_are_sound(seed in any::<u64>(), n in 5usize..400, k in 0usize..4) {
            let c = ProfileConstants::theorem3();
            let e = make_e_profile(&c).unwrap();
            let iv = default_expansion_intervals(&c)[k];
            let mut rng = crate::rng::substream(seed, 1);
            let cell = random_cell(&mut rng, iv, n);
            let corners = corner_points(&cell);
            prop_assume!(!corners.is_empty());
            let b = expansion_cell_bound(&EXP, &e, &cell).unwrap();
            let m = corners.iter().map(|&(x, y)| b.eval(x, y)).fold(f64::INFINITY, f64::min);
            for (x, y) in feasible_samples(&mut rng, &cell, 10) {
                let t = expansion_true_slack(&EXP, &e, x, y).unwrap();
                prop_assert!(t >= b.eval(x, y) - 1e-12);
                prop_assert!(t >= m - 1e-12);
            }
        }

        #[test]
        fn corner_minimum_is_the_cell_minimum(seed in any::<u64>(), n in 2usize..200) {
            let mut rng = crate::rng::substream(seed, 2);
            let cell = random_cell(&mut rng, (0.3, 0.3322), n);
            let (m, corners) = evaluate_pair_cell(&PAIR, &cell);
            prop_assume!(!corners.is_empty());
            let b = pair_cell_bound(&PAIR, &cell);
            for a in 0..20 {
                for c in 0..20 {
                    let x = cell.x.0 + (cell.x.1 - cell.x.0) * a as f64 / 19.0;
                    let y = cell.y.0 + (cell.y.1 - cell.y.0) * c as f64 / 19.0;
                    if y <= x {
                        prop_assert!(b.eval(x, y) >= m - 1e-12);
                    }
                }
            }
        }
    }
}
