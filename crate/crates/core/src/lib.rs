//! Desk-scale construction and verification of near-perfect packings of a
//! square by squares of side `f(n)^{-t}`.
//!
//! The pipeline is: choose a [`sequence::SidelengthFamily`], check the
//! hypotheses with [`conditions::check_ten_conditions`], pack with
//! [`recursive::run`] (or a single rectangle with
//! [`lattice::pack_bounded_rect`]), and validate the resulting
//! [`manifest::PlacementManifest`] with [`verifier::verify`].

// `!(x > a)` is used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod conditions;
pub mod geometry;
pub mod lattice;
pub mod manifest;
pub mod numeric;
pub mod recursive;
pub mod render;
pub mod sequence;
pub mod verifier;

pub use geometry::{PlacedSquare, Rect};
pub use manifest::PlacementManifest;
pub use numeric::Precision;
pub use sequence::{FamilySpec, PackParams, SidelengthFamily};
