//! The placement manifest: a JSON record of a packing that round-trips
//! byte for byte.
//!
//! Every real is written as `d.dddddddddddddddde±x` (17 significant digits),
//! which reads back to the same `f64`.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::value::RawValue;
use thiserror::Error;

use crate::geometry::{area, perim_delta, squares_area, PlacedSquare, Rect};
use crate::lattice::LatticePacking;
use crate::sequence::{FamilySpec, PackParams};

pub const MANIFEST_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ManifestError {
    #[error("malformed manifest: {0}")]
    Malformed(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ManifestStats {
    pub perim_delta: f64,
    pub budget_bound: f64,
    pub area_packed: f64,
    pub area_free: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlacementManifest {
    pub version: u32,
    /// Family specifier, e.g. `ap:q=1,r=0`.
    pub family: String,
    pub t: f64,
    pub m: u64,
    pub n0: u64,
    pub n_reached: u64,
    pub target: Rect,
    /// Sorted by `n`.
    pub squares: Vec<PlacedSquare>,
    pub leftovers: Vec<Rect>,
    pub stats: ManifestStats,
}

/// An `f64` written with 17 significant digits.
#[derive(Debug, Clone, Copy, PartialEq)]
struct F17(f64);

impl Serialize for F17 {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::Error as _;
        if !self.0.is_finite() {
            return Err(S::Error::custom(format!("non-finite value {}", self.0)));
        }
        let raw = RawValue::from_string(format!("{:.16e}", self.0)).map_err(S::Error::custom)?;
        raw.serialize(s)
    }
}

impl<'de> Deserialize<'de> for F17 {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = f64::deserialize(d)?;
        if v.is_finite() {
            Ok(F17(v))
        } else {
            Err(D::Error::custom("non-finite value"))
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RectRepr {
    x0: F17,
    y0: F17,
    x1: F17,
    y1: F17,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SquareRepr {
    n: u64,
    x: F17,
    y: F17,
    side: F17,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StatsRepr {
    perim_delta: F17,
    budget_bound: F17,
    area_packed: F17,
    area_free: F17,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ManifestRepr {
    version: u32,
    family: String,
    t: F17,
    #[serde(rename = "M")]
    m: u64,
    n0: u64,
    n_reached: u64,
    target: RectRepr,
    squares: Vec<SquareRepr>,
    leftovers: Vec<RectRepr>,
    stats: StatsRepr,
}

impl From<&Rect> for RectRepr {
    fn from(r: &Rect) -> Self {
        RectRepr {
            x0: F17(r.x0),
            y0: F17(r.y0),
            x1: F17(r.x1),
            y1: F17(r.y1),
        }
    }
}

impl RectRepr {
    fn into_rect(self) -> Result<Rect, ManifestError> {
        Rect::new(self.x0.0, self.y0.0, self.x1.0, self.y1.0)
            .map_err(|e| ManifestError::Malformed(e.to_string()))
    }
}

impl PlacementManifest {
    /// Manifest of a single lattice packing of `target`. The budget bound is
    /// left at zero since no induction was run.
    pub fn from_lattice(
        family: &FamilySpec,
        params: &PackParams,
        target: Rect,
        lp: &LatticePacking,
    ) -> Self {
        let leftovers = lp.leftover_rects();
        let stats = ManifestStats {
            perim_delta: perim_delta(&leftovers, params.delta),
            budget_bound: 0.0,
            area_packed: squares_area(&lp.squares),
            area_free: area(&leftovers),
        };
        PlacementManifest {
            version: MANIFEST_VERSION,
            family: family.to_string(),
            t: params.t,
            m: params.m,
            n0: lp.n0,
            n_reached: lp.n0_prime,
            target,
            squares: lp.squares.clone(),
            leftovers,
            stats,
        }
    }

    /// Compact JSON with one square or leftover per line.
    pub fn to_json(&self) -> String {
        let mut out = String::new();
        let head = serde_json::json!({
            "version": self.version,
            "family": self.family,
            "M": self.m,
            "n0": self.n0,
            "n_reached": self.n_reached,
        });
        let head = serde_json::to_string(&head).expect("header serializes");
        out.push_str(&head[..head.len() - 1]);
        out.push_str(",\"t\":");
        out.push_str(&to_string(&F17(self.t)));
        out.push_str(",\"target\":");
        out.push_str(&to_string(&RectRepr::from(&self.target)));
        out.push_str(",\"stats\":");
        out.push_str(&to_string(&StatsRepr {
            perim_delta: F17(self.stats.perim_delta),
            budget_bound: F17(self.stats.budget_bound),
            area_packed: F17(self.stats.area_packed),
            area_free: F17(self.stats.area_free),
        }));
        out.push_str(",\n\"squares\":[");
        for (k, s) in self.squares.iter().enumerate() {
            out.push_str(if k == 0 { "\n" } else { ",\n" });
            out.push_str(&to_string(&SquareRepr {
                n: s.n,
                x: F17(s.x),
                y: F17(s.y),
                side: F17(s.side),
            }));
        }
        out.push_str("],\n\"leftovers\":[");
        for (k, r) in self.leftovers.iter().enumerate() {
            out.push_str(if k == 0 { "\n" } else { ",\n" });
            out.push_str(&to_string(&RectRepr::from(r)));
        }
        out.push_str("]}\n");
        out
    }

    /// Parses and validates a manifest: squares sorted by `n` and
    /// contiguous from `n0`, positive sides, non-degenerate rectangles.
    pub fn from_json(text: &str) -> Result<Self, ManifestError> {
        let repr: ManifestRepr =
            serde_json::from_str(text).map_err(|e| ManifestError::Malformed(e.to_string()))?;
        let mut squares = Vec::with_capacity(repr.squares.len());
        for s in repr.squares {
            let sq = PlacedSquare::new(s.n, s.x.0, s.y.0, s.side.0)
                .map_err(|e| ManifestError::Malformed(e.to_string()))?;
            squares.push(sq);
        }
        for (k, s) in squares.iter().enumerate() {
            if s.n != repr.n0 + k as u64 {
                return Err(ManifestError::Malformed(format!(
                    "square {k} has index {} but indices must run contiguously from n0 = {}",
                    s.n, repr.n0
                )));
            }
        }
        let leftovers = repr
            .leftovers
            .into_iter()
            .map(RectRepr::into_rect)
            .collect::<Result<Vec<_>, _>>()?;
        Ok(PlacementManifest {
            version: repr.version,
            family: repr.family,
            t: repr.t.0,
            m: repr.m,
            n0: repr.n0,
            n_reached: repr.n_reached,
            target: repr.target.into_rect()?,
            squares,
            leftovers,
            stats: ManifestStats {
                perim_delta: repr.stats.perim_delta.0,
                budget_bound: repr.stats.budget_bound.0,
                area_packed: repr.stats.area_packed.0,
                area_free: repr.stats.area_free.0,
            },
        })
    }

    pub fn write_to(&self, path: &std::path::Path) -> Result<(), ManifestError> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn read_from(path: &std::path::Path) -> Result<Self, ManifestError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

fn to_string<T: Serialize>(v: &T) -> String {
    serde_json::to_string(v).expect("finite values serialize")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample() -> PlacementManifest {
        PlacementManifest {
            version: MANIFEST_VERSION,
            family: "ap:q=1,r=0".into(),
            t: 0.6,
            m: 4,
            n0: 10,
            n_reached: 12,
            target: Rect::new(0.0, 0.0, 1.0, 1.0).unwrap(),
            squares: vec![
                PlacedSquare::new(10, 0.0, 0.0, 0.1).unwrap(),
                PlacedSquare::new(11, 0.1, 0.0, 1.0 / 3.0).unwrap(),
            ],
            leftovers: vec![Rect::new(0.5, 0.5, 1.0, 1.0).unwrap()],
            stats: ManifestStats {
                perim_delta: 1.5,
                budget_bound: 2.0,
                area_packed: 0.12,
                area_free: 0.25,
            },
        }
    }

    #[test]
    fn round_trip_is_byte_identical() {
        let m = sample();
        let a = m.to_json();
        let back = PlacementManifest::from_json(&a).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.to_json(), a);
        assert!(a.contains("3.3333333333333331e-1"));
    }

    #[test]
    fn rejects_gaps_in_indices() {
        let mut m = sample();
        m.squares[1].n = 13;
        assert!(matches!(
            PlacementManifest::from_json(&m.to_json()),
            Err(ManifestError::Malformed(_))
        ));
        assert!(PlacementManifest::from_json("{}").is_err());
    }

    proptest! {
        #[test]
        fn any_finite_value_round_trips(x in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO) {
            let s = to_string(&F17(x));
            let back: F17 = serde_json::from_str(&s).unwrap();
            prop_assert_eq!(back.0.to_bits(), x.to_bits());
        }
    }
}
