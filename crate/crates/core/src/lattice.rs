//! Near-lattice packing of a rectangle of bounded eccentricity by `M1·M2`
//! consecutive squares plus a leftover family of small total perimeter.
//!
//! In the local frame `R = [0, w] × [0, h]` with `w <= h`, square `(i, j)`
//! carries index `n0 + j·M1 + i`. Row `j` is right-aligned against `x = w`
//! and column `i` is stacked from `y = 0`:
//!
//! ```text
//! x(i, j) = w − Σ_{i' = i}^{M1 − 1} s(i', j)
//! y(i, j) = Σ_{j' < j} s(i, j')
//! ```
//!
//! Leftovers are the gaps between diagonal neighbours (Type II), the strips
//! left of each row (Type III), the strips above each column (Type IV) and
//! the top-left corner (Type V).

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{perim, GeometryError, PlacedSquare, Rect};
use crate::numeric::NeumaierSum;
use crate::sequence::{PackParams, SequenceError, SideLengths};

/// Relative slack on the eccentricity bounds (rectangles cut from float
/// coordinates can miss `M f(n0)^{-t}` by an ulp) and on conditions that can
/// hold with equality.
pub const GATE_REL_TOL: f64 = 1e-12;

/// Leftover extents at or below `DUST_SCALE · f(n0)^{-t}` are dropped.
pub const DUST_SCALE: f64 = 1e-15;

/// Which precondition of the lattice packer failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LatticeGate {
    /// `M f(n0)^{-t} <= w(R) <= h(R) <= 3M f(n0)^{-t}`.
    Eccentricity,
    /// `max f' on [n0, n0 + 9M²] <= M^{-4} f(n0) / 4752`.
    Condition7,
    /// `f(n0 + 9M²) <= (264 M²)^{1/t} f(n0)`.
    Condition8,
}

impl fmt::Display for LatticeGate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LatticeGate::Eccentricity => write!(f, "eccentricity"),
            LatticeGate::Condition7 => write!(f, "condition (7)"),
            LatticeGate::Condition8 => write!(f, "condition (8)"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LatticeError {
    #[error("precondition violated: {which} ({lhs:.6e} > {rhs:.6e})")]
    PreconditionViolated {
        which: LatticeGate,
        lhs: f64,
        rhs: f64,
    },
    #[error("gap rectangle at ({i}, {j}) has negative extent {extent:.3e}")]
    GapInverted { i: u64, j: u64, extent: f64 },
    #[error(transparent)]
    Sequence(#[from] SequenceError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LeftoverKind {
    TypeII,
    TypeIII,
    TypeIV,
    TypeV,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Leftover {
    pub kind: LeftoverKind,
    pub rect: Rect,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LatticePacking {
    /// Squares in index order `n0, n0 + 1, ...`.
    pub squares: Vec<PlacedSquare>,
    pub leftovers: Vec<Leftover>,
    pub n0: u64,
    pub n0_prime: u64,
    pub m1: u64,
    pub m2: u64,
    /// `f(n0)^{-t}`.
    pub side0: f64,
    /// Area of leftover pieces dropped as floating-point dust.
    pub dust_area: f64,
}

impl LatticePacking {
    pub fn leftover_rects(&self) -> Vec<Rect> {
        self.leftovers.iter().map(|l| l.rect).collect()
    }

    pub fn leftover_perimeter(&self) -> f64 {
        perim(&self.leftover_rects())
    }

    pub fn max_leftover_width(&self) -> f64 {
        self.leftovers
            .iter()
            .map(|l| l.rect.w())
            .fold(0.0, f64::max)
    }

    pub fn count(&self, kind: LeftoverKind) -> usize {
        self.leftovers.iter().filter(|l| l.kind == kind).count()
    }
}

/// Orientation of the local frame relative to absolute coordinates.
#[derive(Debug, Clone, Copy)]
struct Frame {
    origin_x: f64,
    origin_y: f64,
    transposed: bool,
}

impl Frame {
    fn of(r: &Rect) -> Self {
        Frame {
            origin_x: r.x0,
            origin_y: r.y0,
            transposed: r.is_wide(),
        }
    }

    fn point(&self, x: f64, y: f64) -> (f64, f64) {
        if self.transposed {
            (self.origin_x + y, self.origin_y + x)
        } else {
            (self.origin_x + x, self.origin_y + y)
        }
    }

    fn rect(&self, x0: f64, y0: f64, x1: f64, y1: f64) -> Result<Rect, GeometryError> {
        let (ax0, ay0) = self.point(x0, y0);
        let (ax1, ay1) = self.point(x1, y1);
        Rect::new(ax0, ay0, ax1, ay1)
    }
}

/// Left side and right side of the condition
/// `9M² · max f' · f(n0)^{-t-1} <= f(n0 + 9M²)^{-t}` under which every
/// Type II gap has nonnegative extent.
pub fn gap_condition<F: SideLengths + ?Sized>(
    fam: &F,
    params: &PackParams,
    n0: u64,
) -> Result<(f64, f64), SequenceError> {
    let window = params.window();
    let d = fam.max_derivative(n0 as f64, (n0 + window) as f64)?;
    let lhs = window as f64 * d * fam.value(n0)?.powf(-params.t - 1.0);
    let rhs = fam.smooth((n0 + window) as f64)?.powf(-params.t);
    Ok((lhs, rhs))
}

/// Checks the eccentricity bound and conditions (7) and (8) at `n0`.
pub fn check_lattice_preconditions<F: SideLengths + ?Sized>(
    r: &Rect,
    fam: &F,
    params: &PackParams,
    n0: u64,
) -> Result<(), LatticeError> {
    let m = params.m as f64;
    let t = params.t;
    let s0 = fam.side(n0, t)?;
    let fail = |which, lhs, rhs| Err(LatticeError::PreconditionViolated { which, lhs, rhs });
    if m * s0 > r.w() * (1.0 + GATE_REL_TOL) {
        return fail(LatticeGate::Eccentricity, m * s0, r.w());
    }
    if r.h() > 3.0 * m * s0 * (1.0 + GATE_REL_TOL) {
        return fail(LatticeGate::Eccentricity, r.h(), 3.0 * m * s0);
    }
    let window = params.window();
    let f0 = fam.value(n0)?;
    let d = fam.max_derivative(n0 as f64, (n0 + window) as f64)?;
    let bound7 = f0 / (4752.0 * m.powi(4));
    if d > bound7 * (1.0 + GATE_REL_TOL) {
        return fail(LatticeGate::Condition7, d, bound7);
    }
    let far = fam.smooth((n0 + window) as f64)?;
    let bound8 = (264.0 * m * m).powf(1.0 / t) * f0;
    if far > bound8 * (1.0 + GATE_REL_TOL) {
        return fail(LatticeGate::Condition8, far, bound8);
    }
    Ok(())
}

/// Largest `k` in `[lo, hi]` with `k · s0 <= dim`.
fn grid_count(dim: f64, s0: f64, lo: u64, hi: u64) -> u64 {
    let mut k = ((dim / s0).floor() as u64).clamp(lo, hi);
    while k > lo && k as f64 * s0 > dim {
        k -= 1;
    }
    k
}

/// Packs `r` with the `M1 × M2` near-lattice of squares `f(n)^{-t}`,
/// `n0 <= n < n0 + M1·M2`.
pub fn pack_bounded_rect<F: SideLengths + ?Sized>(
    r: &Rect,
    fam: &F,
    params: &PackParams,
    n0: u64,
) -> Result<LatticePacking, LatticeError> {
    check_lattice_preconditions(r, fam, params, n0)?;
    let t = params.t;
    let m = params.m;
    let s0 = fam.side(n0, t)?;
    let (w, h) = (r.w(), r.h());
    let m1 = grid_count(w, s0, m, 3 * m);
    let m2 = grid_count(h, s0, m, 3 * m);
    let (c1, c2) = (m1 as usize, m2 as usize);

    // side[j][i]
    let mut side = vec![vec![0.0; c1]; c2];
    for (j, row) in side.iter_mut().enumerate() {
        for (i, s) in row.iter_mut().enumerate() {
            *s = fam.side(n0 + (j * c1 + i) as u64, t)?;
        }
    }

    // x[j][i] for i in 0..=M1 (x[j][M1] = w); y[j][i] for j in 0..=M2.
    let mut x = vec![vec![0.0; c1 + 1]; c2];
    for j in 0..c2 {
        let mut suffix = NeumaierSum::new();
        x[j][c1] = w;
        for i in (0..c1).rev() {
            suffix.add(side[j][i]);
            x[j][i] = w - suffix.value();
        }
    }
    let mut y = vec![vec![0.0; c1]; c2 + 1];
    for i in 0..c1 {
        let mut prefix = NeumaierSum::new();
        for j in 0..c2 {
            prefix.add(side[j][i]);
            y[j + 1][i] = prefix.value();
        }
    }

    let frame = Frame::of(r);
    let mut squares = Vec::with_capacity(c1 * c2);
    for (j, row) in side.iter().enumerate() {
        for (i, &s) in row.iter().enumerate() {
            let n = n0 + (j * c1 + i) as u64;
            let (ax, ay) = frame.point(x[j][i], y[j][i]);
            squares.push(PlacedSquare::new(n, ax, ay, s)?);
        }
    }
    squares.sort_by_key(|s| s.n);

    let dust = DUST_SCALE * s0;
    let mut leftovers = Vec::new();
    let mut dust_area = 0.0;
    let mut push = |kind,
                    i: usize,
                    j: usize,
                    x0: f64,
                    y0: f64,
                    x1: f64,
                    y1: f64|
     -> Result<(), LatticeError> {
        let (ex, ey) = (x1 - x0, y1 - y0);
        let worst = ex.min(ey);
        if worst < -dust {
            return Err(LatticeError::GapInverted {
                i: i as u64,
                j: j as u64,
                extent: worst,
            });
        }
        if ex <= dust || ey <= dust {
            dust_area += ex.max(0.0) * ey.max(0.0);
            return Ok(());
        }
        leftovers.push(Leftover {
            kind,
            rect: frame.rect(x0, y0, x1, y1)?,
        });
        Ok(())
    };

    for j in 0..c2.saturating_sub(1) {
        for i in 0..c1.saturating_sub(1) {
            push(
                LeftoverKind::TypeII,
                i,
                j,
                x[j][i + 1],
                y[j + 1][i + 1],
                x[j + 1][i + 1],
                y[j + 1][i],
            )?;
        }
    }
    for j in 0..c2 {
        push(
            LeftoverKind::TypeIII,
            0,
            j,
            0.0,
            y[j][0],
            x[j][0],
            y[j + 1][0],
        )?;
    }
    let top = c2 - 1;
    for i in 0..c1 {
        push(
            LeftoverKind::TypeIV,
            i,
            top,
            x[top][i],
            y[c2][i],
            x[top][i + 1],
            h,
        )?;
    }
    push(LeftoverKind::TypeV, 0, top, 0.0, y[c2][0], x[top][0], h)?;

    Ok(LatticePacking {
        squares,
        leftovers,
        n0,
        n0_prime: n0 + m1 * m2,
        m1,
        m2,
        side0: s0,
        dust_area,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{area, squares_area};
    use crate::sequence::SidelengthFamily;

    /// `f ≡ c` near the window.
    struct Constant(f64);

    impl SideLengths for Constant {
        fn value(&self, _n: u64) -> Result<f64, SequenceError> {
            Ok(self.0)
        }
        fn smooth(&self, _x: f64) -> Result<f64, SequenceError> {
            Ok(self.0)
        }
        fn max_derivative(&self, _lo: f64, _hi: f64) -> Result<f64, SequenceError> {
            Ok(0.0)
        }
    }

    fn brute_force_disjoint(rects: &[Rect], tol: f64) -> bool {
        for a in 0..rects.len() {
            for b in a + 1..rects.len() {
                if rects[a].overlap_depth(&rects[b]) > tol {
                    return false;
                }
            }
        }
        true
    }

    #[test]
    fn constant_family_collapses_to_lattice() {
        let c: f64 = 16.0;
        let t = 0.5 + 0.25;
        let s = c.powf(-t);
        let params = PackParams::new(t, 1, 10, 100).unwrap();
        let w = 2.5 * s;
        let r = Rect::new(0.0, 0.0, w, 2.7 * s).unwrap();
        let p = pack_bounded_rect(&r, &Constant(c), &params, 10).unwrap();
        assert_eq!((p.m1, p.m2), (2, 2));
        assert_eq!(p.n0_prime, 14);
        for sq in &p.squares {
            let k = sq.n - 10;
            let (i, j) = ((k % 2) as f64, (k / 2) as f64);
            assert!((sq.x - (w - (2.0 - i) * s)).abs() < 1e-15);
            assert!((sq.y - j * s).abs() < 1e-15);
        }
        assert_eq!(p.count(LeftoverKind::TypeII), 0);
        assert_eq!(p.count(LeftoverKind::TypeIII), 2);
        assert_eq!(p.count(LeftoverKind::TypeIV), 2);
        assert_eq!(p.count(LeftoverKind::TypeV), 1);
    }

    #[test]
    fn transposed_frame_maps_back() {
        let c: f64 = 16.0;
        let t = 0.75;
        let s = c.powf(-t);
        let params = PackParams::new(t, 1, 10, 100).unwrap();
        let r = Rect::new(1.0, 2.0, 1.0 + 2.7 * s, 2.0 + 2.5 * s).unwrap();
        let p = pack_bounded_rect(&r, &Constant(c), &params, 10).unwrap();
        let mut all: Vec<Rect> = p.squares.iter().map(|q| q.rect()).collect();
        all.extend(p.leftover_rects());
        for q in &all {
            assert!(q.within(&r, 1e-15));
        }
        assert!(brute_force_disjoint(&all, 1e-15));
        let covered = squares_area(&p.squares) + area(&p.leftover_rects());
        assert!((covered - r.area()).abs() < 1e-12 * r.area());
    }

    #[test]
    fn ap_desk_run_properties() {
        let fam = SidelengthFamily::ap(1.0, 0.0).unwrap();
        let n0 = 2_000_000u64;
        let params = PackParams::new(0.6, 4, n0, n0 + 1000).unwrap();
        let s0 = (n0 as f64).powf(-0.6);
        let r = Rect::square(0.0, 0.0, 2.5 * 4.0 * s0).unwrap();
        let p = pack_bounded_rect(&r, &fam, &params, n0).unwrap();
        let k = p.n0_prime - n0;
        assert!((16..=144).contains(&k));
        assert_eq!(p.squares.len() as u64, k);
        assert!(p
            .squares
            .iter()
            .enumerate()
            .all(|(i, s)| s.n == n0 + i as u64));
        assert!(p.leftover_perimeter() <= 25.0 * 4.0 * s0);
        assert!(p.max_leftover_width() <= 2.0 * s0);
        let mut all: Vec<Rect> = p.squares.iter().map(|q| q.rect()).collect();
        all.extend(p.leftover_rects());
        assert!(brute_force_disjoint(&all, 1e-9 * s0));
        let covered = squares_area(&p.squares) + area(&p.leftover_rects());
        assert!((covered - r.area()).abs() <= 1e-11 * r.area());
        let (lhs, rhs) = gap_condition(&fam, &params, n0).unwrap();
        assert!(lhs <= rhs);
        assert!(p.count(LeftoverKind::TypeII) <= 9 * 16);
    }

    #[test]
    fn preconditions_name_the_failed_gate() {
        let fam = SidelengthFamily::ap(1.0, 0.0).unwrap();
        let m = 4u64;
        let boundary = 4752 * m.pow(4);
        let params = PackParams::new(0.6, m, boundary, boundary + 10).unwrap();
        let side = |n: u64| 2.5 * m as f64 * (n as f64).powf(-0.6);
        let ok = Rect::square(0.0, 0.0, side(boundary)).unwrap();
        assert!(pack_bounded_rect(&ok, &fam, &params, boundary).is_ok());
        let below = boundary - 1;
        let r = Rect::square(0.0, 0.0, side(below)).unwrap();
        match pack_bounded_rect(&r, &fam, &params, below) {
            Err(LatticeError::PreconditionViolated {
                which: LatticeGate::Condition7,
                ..
            }) => {}
            other => panic!("expected condition (7) failure, got {other:?}"),
        }
        let thin = Rect::new(0.0, 0.0, 0.3 * side(boundary), side(boundary)).unwrap();
        assert!(matches!(
            pack_bounded_rect(&thin, &fam, &params, boundary),
            Err(LatticeError::PreconditionViolated {
                which: LatticeGate::Eccentricity,
                ..
            })
        ));
        let long = Rect::new(0.0, 0.0, side(boundary), 2.0 * side(boundary)).unwrap();
        assert!(matches!(
            pack_bounded_rect(&long, &fam, &params, boundary),
            Err(LatticeError::PreconditionViolated {
                which: LatticeGate::Eccentricity,
                ..
            })
        ));
    }

    #[test]
    fn grid_count_takes_lower_integer_at_exact_multiples() {
        assert_eq!(grid_count(4.0, 1.0, 1, 10), 4);
        assert_eq!(grid_count(4.0 - 1e-15, 1.0, 1, 10), 3);
        assert_eq!(grid_count(100.0, 1.0, 1, 10), 10);
        let s = 0.1;
        let k = grid_count(0.3, s, 1, 10);
        assert!(k as f64 * s <= 0.3);
    }
}
