//! Independent validation of a placement manifest: interior-disjointness
//! of all squares and leftovers, containment in the target, area accounting
//! and the weighted-perimeter budget.
//!
//! Two rectangles overlap when their penetration `min(x-overlap, y-overlap)`
//! exceeds the tolerance `τ = scale · f(n0)^{-t}`; anything less counts as
//! touching.

use std::cmp::{Ordering, Reverse};
use std::collections::{BTreeMap, BinaryHeap};
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::geometry::{perim_delta, Rect};
use crate::manifest::PlacementManifest;
use crate::numeric::NeumaierSum;
use crate::sequence::{FamilySpec, PackParams, SequenceError, SidelengthFamily};

pub const DEFAULT_TOLERANCE_SCALE: f64 = 1e-9;

/// Relative tolerance on `area(target) − area(squares) − area(leftovers)`.
pub const AREA_REL_TOL: f64 = 1e-10;

/// At most this many violations are listed in a report.
pub const MAX_REPORTED: usize = 100;

/// Size limit for the quadratic oracle.
pub const BRUTE_FORCE_LIMIT: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VerifyError {
    #[error("malformed manifest: {0}")]
    MalformedManifest(String),
    #[error("{len} items exceed the brute-force limit of {limit}")]
    TooLarge { len: usize, limit: usize },
}

impl From<SequenceError> for VerifyError {
    fn from(e: SequenceError) -> Self {
        VerifyError::MalformedManifest(e.to_string())
    }
}

/// An overlapping pair `i < j` of input rectangles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Overlap {
    pub i: usize,
    pub j: usize,
    pub depth: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ViolationKind {
    Overlap,
    Containment,
    Area,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum ItemRef {
    Square { n: u64 },
    Leftover { index: usize },
    Target,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub ids: Vec<ItemRef>,
    pub magnitude: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BudgetCheck {
    pub perim_delta_free: f64,
    pub bound_value: f64,
    pub within: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub tolerance: f64,
    pub items: usize,
    pub disjoint: bool,
    pub contained: bool,
    pub area_ok: bool,
    /// `area(target) − area(squares) − area(leftovers)`.
    pub area_gap: f64,
    pub area_target: f64,
    pub max_overlap_depth: f64,
    /// Reported, not enforced: the budget is a proof device and need not
    /// hold for small `M`.
    pub budget: Option<BudgetCheck>,
    pub max_leftover_width: f64,
    /// Total number of violations found; at most [`MAX_REPORTED`] are listed.
    pub violation_count: usize,
    pub violations: Vec<Violation>,
}

impl VerificationReport {
    pub fn is_green(&self) -> bool {
        self.violation_count == 0
    }
}

/// Returns the overlap if `a` and `b` penetrate by more than `tau`.
fn penetration(a: &Rect, b: &Rect, tau: f64) -> Option<f64> {
    let d = a.overlap_depth(b);
    (d > tau).then_some(d)
}

/// Quadratic reference implementation.
pub fn brute_force_overlap(rects: &[Rect], tau: f64) -> Result<Vec<Overlap>, VerifyError> {
    if rects.len() > BRUTE_FORCE_LIMIT {
        return Err(VerifyError::TooLarge {
            len: rects.len(),
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    let mut out = Vec::new();
    for i in 0..rects.len() {
        for j in i + 1..rects.len() {
            if let Some(depth) = penetration(&rects[i], &rects[j], tau) {
                out.push(Overlap { i, j, depth });
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct YKey(f64, u32);

impl Eq for YKey {}

impl PartialOrd for YKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for YKey {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0).then(self.1.cmp(&other.1))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct XEnd(f64, u32);

impl Eq for XEnd {}

impl PartialOrd for XEnd {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for XEnd {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0).then(self.1.cmp(&other.1))
    }
}

/// Segment tree over elementary y-intervals; each node lists the active
/// rectangles whose span covers it. Removed entries are purged lazily.
struct StabTree {
    coords: Vec<f64>,
    nodes: Vec<Vec<u32>>,
    size: usize,
}

impl StabTree {
    fn new(mut coords: Vec<f64>) -> Self {
        coords.sort_by(f64::total_cmp);
        coords.dedup();
        let size = coords.len().saturating_sub(1).max(1).next_power_of_two();
        StabTree {
            coords,
            nodes: vec![Vec::new(); 2 * size],
            size,
        }
    }

    fn index(&self, y: f64) -> usize {
        self.coords.partition_point(|&c| c < y)
    }

    /// Inserts `[y0, y1)` for `id`; both ends are tree coordinates.
    fn insert(&mut self, y0: f64, y1: f64, id: u32) {
        let (mut lo, mut hi) = (self.index(y0) + self.size, self.index(y1) + self.size);
        while lo < hi {
            if lo & 1 == 1 {
                self.nodes[lo].push(id);
                lo += 1;
            }
            if hi & 1 == 1 {
                hi -= 1;
                self.nodes[hi].push(id);
            }
            lo >>= 1;
            hi >>= 1;
        }
    }

    /// Active ids whose `[y0, y1)` contains `y`.
    fn stab(&mut self, y: f64, alive: &[bool], out: &mut Vec<u32>) {
        // Elementary interval k is [coords[k], coords[k+1]).
        let k = self.coords.partition_point(|&c| c <= y);
        if k == 0 || k >= self.coords.len() {
            return;
        }
        let mut node = k - 1 + self.size;
        while node >= 1 {
            let list = &mut self.nodes[node];
            list.retain(|&id| alive[id as usize]);
            out.extend_from_slice(list);
            node >>= 1;
        }
    }
}

/// All pairs with penetration above `tau`, by plane sweep in `x`, sorted by
/// `(i, j)`.
pub fn sweep_overlaps(rects: &[Rect], tau: f64) -> Vec<Overlap> {
    let tau = tau.max(0.0);
    // Rectangles no thicker than tau cannot penetrate anything by more.
    let mut order: Vec<u32> = (0..rects.len() as u32)
        .filter(|&i| rects[i as usize].dx() > tau && rects[i as usize].dy() > tau)
        .collect();
    order.sort_by(|&a, &b| {
        rects[a as usize]
            .x0
            .total_cmp(&rects[b as usize].x0)
            .then(a.cmp(&b))
    });

    let mut tree = StabTree::new(
        order
            .iter()
            .flat_map(|&i| [rects[i as usize].y0, rects[i as usize].y1])
            .collect(),
    );
    let mut by_y0: BTreeMap<YKey, ()> = BTreeMap::new();
    let mut alive = vec![false; rects.len()];
    let mut ends: BinaryHeap<Reverse<XEnd>> = BinaryHeap::new();
    let mut out = Vec::new();
    let mut cand = Vec::new();

    for &b in &order {
        let rb = &rects[b as usize];
        while let Some(Reverse(XEnd(x1, a))) = ends.peek().copied() {
            if x1 - rb.x0 > tau {
                break;
            }
            ends.pop();
            alive[a as usize] = false;
            by_y0.remove(&YKey(rects[a as usize].y0, a));
        }

        let lo = rb.y0 + tau;
        let hi = rb.y1 - tau;
        cand.clear();
        tree.stab(lo, &alive, &mut cand);
        if lo < hi {
            use std::ops::Bound::Excluded;
            cand.extend(
                by_y0
                    .range((Excluded(YKey(lo, u32::MAX)), Excluded(YKey(hi, 0))))
                    .map(|(k, _)| k.1),
            );
        }
        for &a in &cand {
            if let Some(depth) = penetration(&rects[a as usize], rb, tau) {
                let (i, j) = if a < b { (a, b) } else { (b, a) };
                out.push(Overlap {
                    i: i as usize,
                    j: j as usize,
                    depth,
                });
            }
        }

        alive[b as usize] = true;
        tree.insert(rb.y0, rb.y1, b);
        by_y0.insert(YKey(rb.y0, b), ());
        ends.push(Reverse(XEnd(rb.x1, b)));
    }
    out.sort_by_key(|p| (p.i, p.j));
    out.dedup_by(|p, q| p.i == q.i && p.j == q.j);
    out
}

/// `f(n0)^{-t}` for the manifest's family.
fn reference_side(m: &PlacementManifest) -> Result<(SidelengthFamily, f64), VerifyError> {
    let spec = FamilySpec::from_str(&m.family)?;
    let coverage = m.n_reached.max(m.n0) + 1;
    let fam = SidelengthFamily::from_spec(spec, coverage)?;
    let side = fam.eval_f(m.n0)?.powf(-m.t);
    Ok((fam, side))
}

/// Verifies `manifest` with `τ = tolerance_scale · f(n0)^{-t}`.
pub fn verify(
    manifest: &PlacementManifest,
    tolerance_scale: f64,
) -> Result<VerificationReport, VerifyError> {
    if !(tolerance_scale >= 0.0 && tolerance_scale.is_finite()) {
        return Err(VerifyError::MalformedManifest(format!(
            "tolerance scale {tolerance_scale} is invalid"
        )));
    }
    let (fam, side0) = reference_side(manifest)?;
    let tau = tolerance_scale * side0;
    let budget = budget_check(manifest, &fam);
    Ok(verify_with_tolerance(manifest, tau, budget))
}

fn budget_check(m: &PlacementManifest, fam: &SidelengthFamily) -> Option<BudgetCheck> {
    let params = PackParams::new(m.t, m.m, m.n0, m.n_reached.max(m.n0)).ok()?;
    let n = m.n_reached.max(2);
    let sum = fam.partial_sum(n, params.budget_exponent()).ok()?;
    let bound_value = (m.m as f64).powf(-1.0 + params.delta / 2.0) * sum;
    let perim_delta_free = perim_delta(&m.leftovers, params.delta);
    Some(BudgetCheck {
        perim_delta_free,
        bound_value,
        within: perim_delta_free <= bound_value,
    })
}

/// Verification with an explicit tolerance and no family evaluation.
pub fn verify_with_tolerance(
    m: &PlacementManifest,
    tau: f64,
    budget: Option<BudgetCheck>,
) -> VerificationReport {
    let mut rects: Vec<Rect> = Vec::with_capacity(m.squares.len() + m.leftovers.len());
    let mut ids = Vec::with_capacity(rects.capacity());
    for s in &m.squares {
        rects.push(s.rect());
        ids.push(ItemRef::Square { n: s.n });
    }
    for (k, r) in m.leftovers.iter().enumerate() {
        rects.push(*r);
        ids.push(ItemRef::Leftover { index: k });
    }

    let mut violations = Vec::new();
    let overlaps = sweep_overlaps(&rects, tau);
    let max_overlap_depth = overlaps.iter().map(|o| o.depth).fold(0.0, f64::max);
    for o in &overlaps {
        let mut pair = vec![ids[o.i], ids[o.j]];
        pair.sort();
        violations.push(Violation {
            kind: ViolationKind::Overlap,
            ids: pair,
            magnitude: o.depth,
        });
    }

    let mut contained = true;
    for (r, id) in rects.iter().zip(&ids) {
        if !r.within(&m.target, tau) {
            contained = false;
            let t = &m.target;
            let out = (t.x0 - r.x0)
                .max(r.x1 - t.x1)
                .max(t.y0 - r.y0)
                .max(r.y1 - t.y1);
            violations.push(Violation {
                kind: ViolationKind::Containment,
                ids: vec![*id, ItemRef::Target],
                magnitude: out,
            });
        }
    }

    let area_target = m.target.area();
    let mut acc = NeumaierSum::new();
    acc.add(area_target);
    for r in &rects {
        acc.add(-r.area());
    }
    let area_gap = acc.value();
    let area_ok = area_gap.abs() <= AREA_REL_TOL * area_target;
    if !area_ok {
        violations.push(Violation {
            kind: ViolationKind::Area,
            ids: vec![ItemRef::Target],
            magnitude: area_gap,
        });
    }

    violations.sort_by(|a, b| (a.kind, &a.ids).cmp(&(b.kind, &b.ids)));
    let violation_count = violations.len();
    violations.truncate(MAX_REPORTED);
    VerificationReport {
        tolerance: tau,
        items: rects.len(),
        disjoint: overlaps.is_empty(),
        contained,
        area_ok,
        area_gap,
        area_target,
        max_overlap_depth,
        budget,
        max_leftover_width: m.leftovers.iter().map(Rect::w).fold(0.0, f64::max),
        violation_count,
        violations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::PlacedSquare;
    use crate::manifest::{ManifestStats, MANIFEST_VERSION};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn unit(x: f64, y: f64) -> Rect {
        Rect::square(x, y, 1.0).unwrap()
    }

    #[test]
    fn touching_is_not_overlap() {
        assert!(sweep_overlaps(&[unit(0.0, 0.0), unit(1.0, 0.0)], 1e-9).is_empty());
        let o = sweep_overlaps(&[unit(0.0, 0.0), unit(0.5, 0.0)], 1e-9);
        assert_eq!(o.len(), 1);
        assert_eq!(o[0].depth, 0.5);
    }

    #[test]
    fn brute_force_examples() {
        assert!(brute_force_overlap(&[], 0.0).unwrap().is_empty());
        let nested = [
            Rect::square(0.0, 0.0, 4.0).unwrap(),
            Rect::square(1.0, 1.0, 1.5).unwrap(),
        ];
        let o = brute_force_overlap(&nested, 1e-9).unwrap();
        assert_eq!(o.len(), 1);
        assert_eq!(o[0].depth, 1.5);
        let many = vec![unit(0.0, 0.0); BRUTE_FORCE_LIMIT + 1];
        assert!(matches!(
            brute_force_overlap(&many, 0.0),
            Err(VerifyError::TooLarge { .. })
        ));
    }

    fn random_rects(rng: &mut ChaCha8Rng, n: usize) -> Vec<Rect> {
        (0..n)
            .map(|_| {
                let x = rng.gen_range(0.0..100.0);
                let y = rng.gen_range(0.0..100.0);
                let w = rng.gen_range(0.01..5.0);
                let h = rng.gen_range(0.01..5.0);
                Rect::from_origin(x, y, w, h).unwrap()
            })
            .collect()
    }

    #[test]
    fn sweep_matches_brute_force_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for trial in 0..50 {
            let n = rng.gen_range(0..400);
            let rects = random_rects(&mut rng, n);
            let tau = if trial % 2 == 0 { 0.0 } else { 0.05 };
            assert_eq!(
                sweep_overlaps(&rects, tau),
                brute_force_overlap(&rects, tau).unwrap(),
                "trial {trial}"
            );
        }
    }

    #[test]
    fn sweep_matches_brute_force_on_grids() {
        // Exactly touching grid plus a few intruders.
        let mut rects = Vec::new();
        for i in 0..20 {
            for j in 0..20 {
                rects.push(unit(i as f64, j as f64));
            }
        }
        rects.push(Rect::new(3.5, 3.5, 4.5, 4.5).unwrap());
        rects.push(Rect::new(0.0, 10.0, 20.0, 10.5).unwrap());
        let s = sweep_overlaps(&rects, 1e-9);
        assert_eq!(s, brute_force_overlap(&rects, 1e-9).unwrap());
        assert_eq!(s.len(), 4 + 20);
    }

    fn manifest(squares: Vec<PlacedSquare>, leftovers: Vec<Rect>) -> PlacementManifest {
        PlacementManifest {
            version: MANIFEST_VERSION,
            family: "ap:q=1,r=0".into(),
            t: 0.6,
            m: 1,
            n0: 3,
            n_reached: 3 + squares.len() as u64,
            target: Rect::square(0.0, 0.0, 2.0).unwrap(),
            squares,
            leftovers,
            stats: ManifestStats {
                perim_delta: 0.0,
                budget_bound: 0.0,
                area_packed: 0.0,
                area_free: 0.0,
            },
        }
    }

    #[test]
    fn report_flags_each_kind() {
        let sq = |n, x, y| PlacedSquare::new(n, x, y, 1.0).unwrap();
        let good = manifest(
            vec![sq(3, 0.0, 0.0), sq(4, 1.0, 0.0)],
            vec![Rect::new(0.0, 1.0, 2.0, 2.0).unwrap()],
        );
        let r = verify(&good, DEFAULT_TOLERANCE_SCALE).unwrap();
        assert!(r.is_green(), "{r:?}");
        assert!(r.disjoint && r.contained && r.area_ok);

        let bad = manifest(
            vec![sq(3, 0.0, 0.0), sq(4, 0.5, 0.0), sq(5, 1.5, 1.5)],
            vec![],
        );
        let r = verify(&bad, DEFAULT_TOLERANCE_SCALE).unwrap();
        assert!(!r.disjoint && !r.contained && !r.area_ok);
        let kinds: Vec<_> = r.violations.iter().map(|v| v.kind).collect();
        assert_eq!(
            kinds,
            vec![
                ViolationKind::Overlap,
                ViolationKind::Containment,
                ViolationKind::Area
            ]
        );
        assert_eq!(
            r.violations[0].ids,
            vec![ItemRef::Square { n: 3 }, ItemRef::Square { n: 4 }]
        );
        assert_eq!(r.max_overlap_depth, 0.5);
        assert_eq!(r, verify(&bad, DEFAULT_TOLERANCE_SCALE).unwrap());
    }

    #[test]
    fn report_caps_listed_violations() {
        let squares = (0..300)
            .map(|k| PlacedSquare::new(3 + k, 0.0, 0.0, 0.5).unwrap())
            .collect();
        let r = verify(&manifest(squares, vec![]), DEFAULT_TOLERANCE_SCALE).unwrap();
        assert_eq!(r.violations.len(), MAX_REPORTED);
        assert!(r.violation_count > MAX_REPORTED);
    }
}
