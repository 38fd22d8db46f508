//! The recursive packer: repeatedly pick a wide free rectangle, cut a strip
//! of width `M f(n)^{-t}` off its short side, slice the strip into pieces of
//! bounded eccentricity and lattice-pack each piece with the next run of
//! consecutive squares. Leftovers return to the free family.

use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{
    area, perim_delta, squares_area, weighted_perimeter, GeometryError, PlacedSquare, Rect,
};
use crate::lattice::{pack_bounded_rect, LatticeError, DUST_SCALE};
use crate::manifest::{ManifestStats, PlacementManifest, MANIFEST_VERSION};
use crate::numeric::{le_rel, NeumaierSum};
use crate::sequence::{FamilySpec, PackParams, SequenceError, SidelengthFamily};

/// Relative slack on the slice eccentricity gate.
pub const SLICE_GATE_REL_TOL: f64 = 1e-12;

/// Allowed relative drift of `area(free) + area(placed)` from the target area.
pub const CONSERVATION_REL_TOL: f64 = 1e-10;

/// Ratios `h / a` within this distance of an integer are snapped to it.
const SLICE_SNAP: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error, Serialize)]
pub enum FailureReason {
    #[error("no free rectangle has width >= {needed:.6e} (widest is {best_available:.6e})")]
    NoWideRectangle { needed: f64, best_available: f64 },
    #[error("slice {slice} at index {index}: 2M f(n_sel)^-t = {lhs:.6e} exceeds 3M f(n')^-t = {rhs:.6e}")]
    EccentricityGateFailed {
        slice: usize,
        index: u64,
        lhs: f64,
        rhs: f64,
    },
    #[error("lattice packer at index {index}: {message}")]
    Lattice {
        index: u64,
        gate: Option<String>,
        message: String,
    },
    #[error("weighted perimeter {perim_delta:.6e} exceeds the budget {bound:.6e}")]
    BudgetExceeded { perim_delta: f64, bound: f64 },
    #[error("step budget increment {increment:.6e} exceeds {bound:.6e}")]
    StepBudgetExceeded { increment: f64, bound: f64 },
    #[error("area drift {relative:.3e} (relative) exceeds {tolerance:.1e}")]
    ConservationDrift { relative: f64, tolerance: f64 },
    #[error("twin prime at index {index} lies below the envelope")]
    TwinDomination { index: u64 },
    #[error("n_cur = {n_cur} has already reached n_max = {n_max}")]
    ContractViolation { n_cur: u64, n_max: u64 },
    #[error("{0}")]
    Sequence(String),
    #[error("{0}")]
    Geometry(String),
}

impl FailureReason {
    /// Short name of the gate that failed.
    pub fn gate(&self) -> String {
        match self {
            FailureReason::NoWideRectangle { .. } => "wide rectangle".into(),
            FailureReason::EccentricityGateFailed { .. } => "slice eccentricity".into(),
            FailureReason::Lattice { gate: Some(g), .. } => g.clone(),
            FailureReason::Lattice { gate: None, .. } => "lattice".into(),
            FailureReason::BudgetExceeded { .. } => "budget".into(),
            FailureReason::StepBudgetExceeded { .. } => "step budget".into(),
            FailureReason::ConservationDrift { .. } => "area conservation".into(),
            FailureReason::TwinDomination { .. } => "twin domination".into(),
            FailureReason::ContractViolation { .. } => "contract".into(),
            FailureReason::Sequence(_) => "sequence".into(),
            FailureReason::Geometry(_) => "geometry".into(),
        }
    }
}

impl From<SequenceError> for FailureReason {
    fn from(e: SequenceError) -> Self {
        FailureReason::Sequence(e.to_string())
    }
}

impl From<GeometryError> for FailureReason {
    fn from(e: GeometryError) -> Self {
        FailureReason::Geometry(e.to_string())
    }
}

/// A failed step. The state is left as it was before the step.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{reason} (n_reached = {n_reached})")]
pub struct StepError {
    pub reason: FailureReason,
    pub n_reached: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreeRect {
    /// Insertion sequence number, used to break selection ties.
    pub seq: u64,
    pub rect: Rect,
}

#[derive(Debug, Clone)]
pub struct PackingState {
    pub target: Rect,
    pub free: Vec<FreeRect>,
    pub placed: Vec<PlacedSquare>,
    /// Next unplaced index.
    pub n_cur: u64,
    /// `perim_δ(free)`.
    pub budget_delta: f64,
    /// Area dropped as floating-point dust by the lattice packer.
    pub dust_area: f64,
    next_seq: u64,
}

impl PackingState {
    pub fn free_rects(&self) -> Vec<Rect> {
        self.free.iter().map(|f| f.rect).collect()
    }

    pub fn free_area(&self) -> f64 {
        area(&self.free_rects())
    }

    pub fn placed_area(&self) -> f64 {
        squares_area(&self.placed)
    }

    /// `(area(target) − area(free) − area(placed)) / area(target)`.
    pub fn conservation_residual(&self) -> f64 {
        let mut acc = NeumaierSum::new();
        acc.add(self.target.area());
        for f in &self.free {
            acc.add(-f.rect.area());
        }
        for s in &self.placed {
            acc.add(-s.area());
        }
        acc.value() / self.target.area()
    }

    fn push_free(&mut self, rect: Rect) {
        self.free.push(FreeRect {
            seq: self.next_seq,
            rect,
        });
        self.next_seq += 1;
    }
}

/// The square of area `Σ_{n >= n0} f(n)^{-2t}` at the origin, as the only
/// free rectangle. Families whose tail is only enclosed use the upper end.
pub fn init_target(
    fam: &SidelengthFamily,
    params: &PackParams,
) -> Result<PackingState, SequenceError> {
    if params.n0 < 3 {
        return Err(SequenceError::InvalidArgument(format!(
            "n0 = {} must be at least 3",
            params.n0
        )));
    }
    let tail = fam.tail_sum(params.n0, 2.0 * params.t)?;
    let side = tail.upper.sqrt();
    let target =
        Rect::square(0.0, 0.0, side).map_err(|e| SequenceError::InvalidArgument(e.to_string()))?;
    let mut state = PackingState {
        target,
        free: Vec::new(),
        placed: Vec::new(),
        n_cur: params.n0,
        budget_delta: 0.0,
        dust_area: 0.0,
        next_seq: 0,
    };
    state.push_free(target);
    state.budget_delta = weighted_perimeter(&target, params.delta);
    Ok(state)
}

/// Index into `free` of the widest rectangle with `w >= 2M f(n_cur)^{-t}`,
/// ties going to the earliest inserted.
pub fn select_rect(
    state: &PackingState,
    params: &PackParams,
    fam: &SidelengthFamily,
) -> Result<usize, FailureReason> {
    let needed = 2.0 * params.m as f64 * fam.eval_f(state.n_cur)?.powf(-params.t);
    let mut best: Option<(usize, f64, u64)> = None;
    let mut widest = 0.0f64;
    for (i, f) in state.free.iter().enumerate() {
        let w = f.rect.w();
        widest = widest.max(w);
        if w < needed {
            continue;
        }
        let better = match best {
            None => true,
            Some((_, bw, bseq)) => w > bw || (w == bw && f.seq < bseq),
        };
        if better {
            best = Some((i, w, f.seq));
        }
    }
    best.map(|(i, _, _)| i)
        .ok_or(FailureReason::NoWideRectangle {
            needed,
            best_available: widest,
        })
}

/// Cuts `r` into `R0` (the short side reduced by `a = M f(n_cur)^{-t}`) and
/// the strip `R_*` of width `a`, then slices `R_*` into `a × a` squares
/// from the low end until fewer than `2a` remain; that remainder is the
/// last slice. `R0` is `None` when the cut consumes all of `r`.
pub fn cut_and_slice(
    r: &Rect,
    params: &PackParams,
    fam: &SidelengthFamily,
    n_cur: u64,
) -> Result<(Option<Rect>, Vec<Rect>), FailureReason> {
    let a = params.m as f64 * fam.eval_f(n_cur)?.powf(-params.t);
    slice_with_width(r, a)
}

fn slice_with_width(r: &Rect, a: f64) -> Result<(Option<Rect>, Vec<Rect>), FailureReason> {
    if r.w() < 2.0 * a {
        return Err(FailureReason::NoWideRectangle {
            needed: 2.0 * a,
            best_available: r.w(),
        });
    }
    let wide = r.is_wide();
    // Local coordinates: u across the short side, v along the long side.
    let (u0, u1, v0, v1) = if wide {
        (r.y0, r.y1, r.x0, r.x1)
    } else {
        (r.x0, r.x1, r.y0, r.y1)
    };
    let rect = |ua: f64, ub: f64, va: f64, vb: f64| {
        if wide {
            Rect::new(va, ua, vb, ub)
        } else {
            Rect::new(ua, va, ub, vb)
        }
    };
    let cut = u0 + a;
    let r0 = if cut < u1 {
        Some(rect(cut, u1, v0, v1)?)
    } else {
        None
    };

    let h = v1 - v0;
    let mut ratio = h / a;
    if (ratio - ratio.round()).abs() < SLICE_SNAP {
        ratio = ratio.round();
    }
    let full = (ratio - 1.0).floor().max(0.0) as usize;
    let mut slices = Vec::with_capacity(full + 1);
    let mut lo = v0;
    for k in 1..=full {
        let hi = v0 + k as f64 * a;
        slices.push(rect(u0, cut, lo, hi)?);
        lo = hi;
    }
    slices.push(rect(u0, cut, lo, v1)?);
    Ok((r0, slices))
}

/// Builds `spec` with tables long enough for a run of `params`, including
/// the overshoot of the last step past `n_max`.
///
/// One step consumes at most `⌈side/a⌉ + 1` slices of at most `9M²`
/// indices each, where `side` is the target side and `a = M f(n0)^{-t}`.
pub fn family_for_run(
    spec: FamilySpec,
    params: &PackParams,
) -> Result<SidelengthFamily, SequenceError> {
    let window = params.window();
    let probe =
        SidelengthFamily::from_spec(spec, params.n0 + window + 1)?.with_precision(params.precision);
    if matches!(spec, FamilySpec::Ap { .. } | FamilySpec::PowerLog { .. }) {
        return Ok(probe);
    }
    let side = probe.tail_sum(params.n0, 2.0 * params.t)?.upper.sqrt();
    let a = params.m as f64 * probe.eval_f(params.n0)?.powf(-params.t);
    let slices = (side / a).ceil() as u64 + 1;
    let coverage = params.n_max + (slices + 1) * window + 1;
    Ok(SidelengthFamily::from_spec(spec, coverage)?.with_precision(params.precision))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunOptions {
    /// Fail as soon as `perim_δ(free) > M^{-1+δ/2} Σ_{n<n_cur} f(n)^{-t-δt}`.
    pub strict_budget: bool,
    /// Check area conservation every this many slices (0 disables the
    /// in-step checks; every step end is always checked).
    pub conservation_interval: usize,
    /// When set, each step's budget increment is compared against
    /// `50 / (K^{t(2-t)} M) · Σ_{consumed} f(n)^{-t(2-t)}`; strict mode fails
    /// on violation.
    pub k: Option<f64>,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            strict_budget: false,
            conservation_interval: 100,
            k: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepRecord {
    pub step: usize,
    pub n_start: u64,
    pub n_end: u64,
    pub selected_width: f64,
    pub slices: usize,
    /// `n′` at the start of each slice; consecutive differences are `M1·M2`.
    pub chain: Vec<u64>,
    pub budget_before: f64,
    pub budget_after: f64,
    /// `M^{-1+δ/2} Σ_{n<n_end} f(n)^{-t(2-t)}`.
    pub budget_bound: f64,
    /// The per-step increment bound, when `K` was supplied.
    pub increment_bound: Option<f64>,
    /// Largest relative conservation residual seen during the step.
    pub max_residual: f64,
}

impl StepRecord {
    pub fn within_budget(&self) -> bool {
        self.budget_after <= self.budget_bound
    }

    pub fn increment_within_bound(&self) -> Option<bool> {
        self.increment_bound
            .map(|b| self.budget_after - self.budget_before <= b * (1.0 + SLICE_GATE_REL_TOL))
    }
}

fn budget_bound(fam: &SidelengthFamily, params: &PackParams, n: u64) -> Result<f64, SequenceError> {
    let m = params.m as f64;
    Ok(m.powf(-1.0 + params.delta / 2.0) * fam.partial_sum(n, params.budget_exponent())?)
}

fn lattice_failure(index: u64, e: LatticeError) -> FailureReason {
    let gate = match &e {
        LatticeError::PreconditionViolated { which, .. } => Some(which.to_string()),
        LatticeError::GapInverted { .. } => Some("gap".to_string()),
        _ => None,
    };
    FailureReason::Lattice {
        index,
        gate,
        message: e.to_string(),
    }
}

/// One select → cut → slice → lattice-pack round. On error the state is
/// unchanged.
pub fn step(
    state: &mut PackingState,
    params: &PackParams,
    fam: &SidelengthFamily,
    opts: &RunOptions,
    step_no: usize,
) -> Result<StepRecord, StepError> {
    let n_start = state.n_cur;
    let fail = |reason| StepError {
        reason,
        n_reached: n_start,
    };
    if n_start >= params.n_max {
        return Err(fail(FailureReason::ContractViolation {
            n_cur: n_start,
            n_max: params.n_max,
        }));
    }
    let m = params.m as f64;
    let t = params.t;
    let idx = select_rect(state, params, fam).map_err(fail)?;
    let chosen = state.free[idx].rect;
    let f_sel = fam.eval_f(n_start).map_err(|e| fail(e.into()))?;
    let (r0, slices) = cut_and_slice(&chosen, params, fam, n_start).map_err(fail)?;

    let target_area = state.target.area();
    let mut free_area = NeumaierSum::new();
    let mut placed_area = NeumaierSum::new();
    if opts.conservation_interval > 0 {
        free_area.add(state.free_area() - chosen.area());
        placed_area.add(state.placed_area());
        if let Some(r0) = &r0 {
            free_area.add(r0.area());
        }
    }
    let mut max_residual = 0.0f64;

    let mut new_squares = Vec::new();
    let mut new_free = Vec::new();
    let mut dust = 0.0;
    let mut chain = Vec::with_capacity(slices.len() + 1);
    let mut n = n_start;
    let lhs = 2.0 * m * f_sel.powf(-t);
    for (k, slice) in slices.iter().enumerate() {
        chain.push(n);
        let rhs = 3.0 * m * fam.eval_f(n).map_err(|e| fail(e.into()))?.powf(-t);
        if !le_rel(lhs, rhs, SLICE_GATE_REL_TOL) {
            return Err(fail(FailureReason::EccentricityGateFailed {
                slice: k,
                index: n,
                lhs,
                rhs,
            }));
        }
        let lp =
            pack_bounded_rect(slice, fam, params, n).map_err(|e| fail(lattice_failure(n, e)))?;
        if opts.conservation_interval > 0 {
            for s in &lp.squares {
                placed_area.add(s.area());
            }
            for l in &lp.leftovers {
                free_area.add(l.rect.area());
            }
            // Slices not yet packed are still free.
            if (k + 1) % opts.conservation_interval == 0 {
                let pending = area(&slices[k + 1..]);
                let rel = ((target_area - placed_area.value() - free_area.value() - pending)
                    / target_area)
                    .abs();
                max_residual = max_residual.max(rel);
                if rel > CONSERVATION_REL_TOL {
                    return Err(fail(FailureReason::ConservationDrift {
                        relative: rel,
                        tolerance: CONSERVATION_REL_TOL,
                    }));
                }
            }
        }
        dust += lp.dust_area;
        n = lp.n0_prime;
        new_squares.extend(lp.squares);
        new_free.extend(lp.leftovers.into_iter().map(|l| l.rect));
    }
    chain.push(n);

    let budget_before = state.budget_delta;
    let mut increment = NeumaierSum::new();
    increment.add(-weighted_perimeter(&chosen, params.delta));
    if let Some(r0) = &r0 {
        increment.add(weighted_perimeter(r0, params.delta));
    }
    for r in &new_free {
        increment.add(weighted_perimeter(r, params.delta));
    }
    let budget_after = budget_before + increment.value();
    let bound = budget_bound(fam, params, n).map_err(|e| fail(e.into()))?;
    if opts.strict_budget && budget_after > bound {
        return Err(fail(FailureReason::BudgetExceeded {
            perim_delta: budget_after,
            bound,
        }));
    }
    let increment_bound = match opts.k {
        Some(k) => {
            let s = params.budget_exponent();
            let mut consumed = NeumaierSum::new();
            for i in n_start..n {
                consumed.add(fam.eval_f(i).map_err(|e| fail(e.into()))?.powf(-s));
            }
            Some(50.0 / (k.powf(t * (2.0 - t)) * m) * consumed.value())
        }
        None => None,
    };

    let mut record = StepRecord {
        step: step_no,
        n_start,
        n_end: n,
        selected_width: chosen.w(),
        slices: slices.len(),
        chain,
        budget_before,
        budget_after,
        budget_bound: bound,
        increment_bound,
        max_residual,
    };
    if opts.strict_budget && record.increment_within_bound() == Some(false) {
        return Err(fail(FailureReason::StepBudgetExceeded {
            increment: budget_after - budget_before,
            bound: increment_bound.unwrap_or(f64::NAN),
        }));
    }

    // Commit.
    state.free.swap_remove(idx);
    if let Some(r0) = r0 {
        state.push_free(r0);
    }
    for r in new_free {
        state.push_free(r);
    }
    state.placed.extend(new_squares);
    state.n_cur = n;
    state.dust_area += dust;
    state.budget_delta = perim_delta(&state.free_rects(), params.delta);

    let rel = state.conservation_residual().abs();
    record.max_residual = record.max_residual.max(rel);
    if rel > CONSERVATION_REL_TOL {
        return Err(StepError {
            reason: FailureReason::ConservationDrift {
                relative: rel,
                tolerance: CONSERVATION_REL_TOL,
            },
            n_reached: n,
        });
    }
    Ok(record)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum Outcome {
    Completed,
    Failed {
        reason: FailureReason,
        n_reached: u64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PackStats {
    pub steps: usize,
    pub slices: usize,
    pub squares: usize,
    pub leftovers: usize,
    pub perim_delta: f64,
    pub budget_bound: f64,
    pub area_target: f64,
    pub area_packed: f64,
    pub area_free: f64,
    pub dust_area: f64,
    pub max_conservation_residual: f64,
    pub wall_time_ms: u128,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PackReport {
    pub outcome: Outcome,
    pub n_reached: u64,
    pub stats: PackStats,
    pub steps: Vec<StepRecord>,
}

impl PackReport {
    pub fn completed(&self) -> bool {
        self.outcome == Outcome::Completed
    }

    /// One-paragraph human summary.
    pub fn summary(&self) -> String {
        let s = &self.stats;
        let head = match &self.outcome {
            Outcome::Completed => format!("completed, n_reached = {}", self.n_reached),
            Outcome::Failed { reason, n_reached } => {
                format!("FAILED at n = {n_reached} [{}]: {reason}", reason.gate())
            }
        };
        format!(
            "{head}\nsteps {}, slices {}, squares {}, leftovers {}\nperim_delta {:.6e} (bound {:.6e})\narea target {:.12e}, packed {:.12e}, free {:.12e}\nmax conservation residual {:.3e}, wall time {} ms",
            s.steps,
            s.slices,
            s.squares,
            s.leftovers,
            s.perim_delta,
            s.budget_bound,
            s.area_target,
            s.area_packed,
            s.area_free,
            s.max_conservation_residual,
            s.wall_time_ms
        )
    }
}

/// Replaces each envelope square by the actual twin-prime square at the same
/// lower-left corner and returns the two L-shaped slack strips per square.
fn substitute_twin_sides(
    fam: &SidelengthFamily,
    t: f64,
    squares: &mut [PlacedSquare],
) -> Result<Vec<Rect>, FailureReason> {
    let mut slack = Vec::new();
    for sq in squares.iter_mut() {
        let actual = fam.side_source(sq.n)?.powf(-t);
        if actual > sq.side {
            return Err(FailureReason::TwinDomination { index: sq.n });
        }
        let dust = DUST_SCALE * sq.side;
        let gap = sq.side - actual;
        if gap > dust {
            slack.push(Rect::new(
                sq.x + actual,
                sq.y,
                sq.x + sq.side,
                sq.y + actual,
            )?);
            slack.push(Rect::new(
                sq.x,
                sq.y + actual,
                sq.x + sq.side,
                sq.y + sq.side,
            )?);
        }
        sq.side = actual;
    }
    Ok(slack)
}

/// Runs steps until `n_cur >= n_max` or a gate fails. The final lattice
/// window may overshoot `n_max`; those squares are kept.
pub fn run(
    fam: &SidelengthFamily,
    params: &PackParams,
    opts: &RunOptions,
) -> Result<(PlacementManifest, PackReport), SequenceError> {
    let started = Instant::now();
    let mut state = init_target(fam, params)?;
    if opts.strict_budget && state.target.h() > 1.0 {
        return Err(SequenceError::InvalidArgument(
            "strict budget mode needs a target of side at most 1".into(),
        ));
    }
    let mut steps = Vec::new();
    let mut outcome = Outcome::Completed;
    while state.n_cur < params.n_max {
        match step(&mut state, params, fam, opts, steps.len()) {
            Ok(rec) => steps.push(rec),
            Err(e) => {
                outcome = Outcome::Failed {
                    reason: e.reason,
                    n_reached: state.n_cur,
                };
                break;
            }
        }
    }

    let mut squares = std::mem::take(&mut state.placed);
    squares.sort_by_key(|s| s.n);
    let mut free = std::mem::take(&mut state.free);
    free.sort_by_key(|f| f.seq);
    let mut leftovers: Vec<Rect> = free.into_iter().map(|f| f.rect).collect();
    if matches!(fam.spec(), FamilySpec::TwinPrime { .. }) {
        match substitute_twin_sides(fam, params.t, &mut squares) {
            Ok(slack) => leftovers.extend(slack),
            Err(reason) => {
                if outcome == Outcome::Completed {
                    outcome = Outcome::Failed {
                        reason,
                        n_reached: state.n_cur,
                    };
                }
            }
        }
    }

    let perim_d = perim_delta(&leftovers, params.delta);
    let bound = if state.n_cur >= 2 {
        budget_bound(fam, params, state.n_cur)?
    } else {
        0.0
    };
    let area_packed = squares_area(&squares);
    let area_free = area(&leftovers);
    let stats = PackStats {
        steps: steps.len(),
        slices: steps.iter().map(|s| s.slices).sum(),
        squares: squares.len(),
        leftovers: leftovers.len(),
        perim_delta: perim_d,
        budget_bound: bound,
        area_target: state.target.area(),
        area_packed,
        area_free,
        dust_area: state.dust_area,
        max_conservation_residual: steps.iter().map(|s| s.max_residual).fold(0.0, f64::max),
        wall_time_ms: started.elapsed().as_millis(),
    };
    let manifest = PlacementManifest {
        version: MANIFEST_VERSION,
        family: fam.spec().to_string(),
        t: params.t,
        m: params.m,
        n0: params.n0,
        n_reached: state.n_cur,
        target: state.target,
        squares,
        leftovers,
        stats: ManifestStats {
            perim_delta: perim_d,
            budget_bound: bound,
            area_packed,
            area_free,
        },
    };
    let report = PackReport {
        outcome,
        n_reached: state.n_cur,
        stats,
        steps,
    };
    Ok((manifest, report))
}
