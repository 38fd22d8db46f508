//! The ten packing conditions as a checkable predicate, the explicit
//! parameter bounds for the AP and prime families, and finite-range checks
//! of the prime-sum estimates.

mod corollary;
mod lemmas;
mod profile;

pub use corollary::{
    corollary31_bounds, corollary46_bounds, BoundTerm, CorollaryBounds, DEFAULT_THETA,
};
pub use lemmas::{
    check_prime_bounds, check_prime_sum_lemmas, check_smooth_extension, Conclusion, LemmaReport,
    LemmaRow, LowerChain, PrimeBoundsReport, SmoothExtensionReport, UpperChain,
};
pub use profile::{ap_profile, prime_profile, BoundProfile, ProfileKind};

use std::fmt::Write as _;

use serde::Serialize;

use crate::sequence::{PackParams, SequenceError, SidelengthFamily};

/// Relative slack for conditions that hold with equality for some
/// families, such as `f(n0) >= K f((1+l) n0)` for `f(n) = n`, `K = 10/11`.
pub const CONDITION_REL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ConditionStatus {
    Satisfied,
    Violated,
    Unevaluable,
}

/// One condition written as `lhs <= rhs` (for the two-sided ones,
/// `lhs <= value <= rhs`).
#[derive(Debug, Clone, Serialize)]
pub struct ConditionEntry {
    pub id: u8,
    pub statement: &'static str,
    pub status: ConditionStatus,
    pub satisfied: bool,
    pub lhs: Option<f64>,
    pub value: Option<f64>,
    pub rhs: Option<f64>,
    /// `log10` of `lhs`/`rhs`, for sides that overflow binary64.
    pub lhs_log10: Option<f64>,
    pub rhs_log10: Option<f64>,
    pub note: Option<String>,
}

impl ConditionEntry {
    fn base(id: u8, statement: &'static str) -> Self {
        ConditionEntry {
            id,
            statement,
            status: ConditionStatus::Unevaluable,
            satisfied: false,
            lhs: None,
            value: None,
            rhs: None,
            lhs_log10: None,
            rhs_log10: None,
            note: None,
        }
    }

    fn decided(mut self, ok: bool) -> Self {
        self.satisfied = ok;
        self.status = if ok {
            ConditionStatus::Satisfied
        } else {
            ConditionStatus::Violated
        };
        self
    }

    fn le(id: u8, statement: &'static str, lhs: f64, rhs: f64) -> Self {
        let mut e = Self::base(id, statement);
        e.lhs = Some(lhs);
        e.rhs = Some(rhs);
        e.lhs_log10 = Some(lhs.log10());
        e.rhs_log10 = Some(rhs.log10());
        e.decided(lhs <= rhs * (1.0 + CONDITION_REL_TOL))
    }

    fn unevaluable(id: u8, statement: &'static str, err: &SequenceError) -> Self {
        let mut e = Self::base(id, statement);
        e.note = Some(err.to_string());
        e
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ConditionReport {
    pub n0: u64,
    pub t: f64,
    #[serde(rename = "M")]
    pub m: u64,
    pub entries: Vec<ConditionEntry>,
    pub overall: bool,
}

impl ConditionReport {
    pub fn entry(&self, id: u8) -> &ConditionEntry {
        &self.entries[id as usize - 1]
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Aligned plain-text table.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "conditions at n0 = {}, t = {}, M = {}",
            self.n0, self.t, self.m
        );
        let _ = writeln!(
            out,
            "{:>3}  {:<12}  {:>14}  {:>14}  {:>14}  statement",
            "id", "status", "lhs", "value", "rhs"
        );
        let fmt = |v: Option<f64>, l: Option<f64>| match (v, l) {
            (Some(v), _) if v.is_finite() => format!("{v:.6e}"),
            (_, Some(l)) if l.is_finite() => format!("10^{l:.3}"),
            _ => "-".to_string(),
        };
        for e in &self.entries {
            let status = match e.status {
                ConditionStatus::Satisfied => "satisfied",
                ConditionStatus::Violated => "VIOLATED",
                ConditionStatus::Unevaluable => "unevaluable",
            };
            let _ = writeln!(
                out,
                "{:>3}  {:<12}  {:>14}  {:>14}  {:>14}  {}",
                e.id,
                status,
                fmt(e.lhs, e.lhs_log10),
                fmt(e.value, None),
                fmt(e.rhs, e.rhs_log10),
                e.statement
            );
            if let Some(note) = &e.note {
                let _ = writeln!(out, "     {note}");
            }
        }
        let _ = writeln!(
            out,
            "overall: {}",
            if self.overall {
                "all satisfied"
            } else {
                "not all satisfied"
            }
        );
        out
    }
}

const S1: &str = "K f((1+l) n0) <= f(n0), K >= (2/3)^{1/2}";
const S2: &str = "c1 xi1 nu1 / f^{t+dt} <= sum_{n<n0} f^{-(t+dt)} <= c2 xi2 nu2 / f^{t+dt}";
const S3: &str = "d1 eta1 lambda1 / f^{2t} <= sum_{n>=n0} f^{-2t} <= d2 eta2 lambda2 / f^{2t}";
const S4: &str = "c_{lambda,nu} nu2(n0) <= lambda1(n0)";
const S5: &str = "lambda2(n0) <= f(n0)^{2t} / (d2 eta2)";
const S6: &str = "max{4^{1/(1-t)} (c2 xi2/(c_{lambda,nu} d1 eta1))^{2/(t(1-t))}, (50/K^{t(2-t)})^{2/(1-t)}} <= M";
const S7: &str = "max f' on [n0, n0+9M^2] <= M^{-4} f(n0) / 4752";
const S8: &str = "f(n0+9M^2) <= (264 M^2)^{1/t} f(n0)";
const S9: &str = "9 M f(n0)^t <= l n0";
const S10: &str = "(d2 eta2)^{(1+d)/2} M^{1-d/2} / (c1 xi1) <= nu1(n0) lambda2(n0)^{-(1+d)/2}";

/// Evaluates both sides of all ten conditions at `n0` for the given
/// profile. Conditions whose inputs lie outside the sieved range are marked
/// unevaluable instead of failing the whole report.
pub fn check_ten_conditions(
    fam: &SidelengthFamily,
    profile: &BoundProfile,
    params: &PackParams,
    n0: u64,
) -> ConditionReport {
    let t = params.t;
    let d = params.delta;
    let m = params.m as f64;
    let s = params.budget_exponent();
    let n0f = n0 as f64;
    let window = params.window();
    let f0 = fam.eval_f(n0);

    let mut entries = Vec::with_capacity(10);

    entries.push(
        match (
            f0.as_ref(),
            fam.eval_smooth((1.0 + profile.l) * n0f).as_ref(),
        ) {
            (Ok(f0), Ok(far)) => {
                let mut e = ConditionEntry::le(1, S1, profile.k * far, *f0);
                let k_ok = profile.k >= (2.0f64 / 3.0).sqrt();
                if !k_ok {
                    e.note = Some(format!("K = {} is below (2/3)^(1/2)", profile.k));
                }
                let ok = e.satisfied && k_ok;
                e.decided(ok)
            }
            (Err(err), _) | (_, Err(err)) => ConditionEntry::unevaluable(1, S1, err),
        },
    );

    entries.push(match (f0.as_ref(), fam.partial_sum(n0, s).as_ref()) {
        (Ok(f0), Ok(sum)) => {
            let lo = profile.c1 * profile.xi1(t) * profile.nu1(n0f) / f0.powf(s);
            let hi = profile.c2 * profile.xi2(t) * profile.nu2(n0f) / f0.powf(s);
            two_sided(2, S2, lo, *sum, *sum, *sum, hi)
        }
        (Err(err), _) | (_, Err(err)) => ConditionEntry::unevaluable(2, S2, err),
    });

    entries.push(match (f0.as_ref(), fam.tail_sum(n0, 2.0 * t).as_ref()) {
        (Ok(f0), Ok(tail)) => {
            let lo = profile.d1 * profile.eta1(t) * profile.lambda1(n0f) / f0.powf(2.0 * t);
            let hi = profile.d2 * profile.eta2(t) * profile.lambda2(n0f) / f0.powf(2.0 * t);
            two_sided(3, S3, lo, tail.lower, tail.value, tail.upper, hi)
        }
        (Err(err), _) | (_, Err(err)) => ConditionEntry::unevaluable(3, S3, err),
    });

    entries.push(ConditionEntry::le(
        4,
        S4,
        profile.c_lambda_nu * profile.nu2(n0f),
        profile.lambda1(n0f),
    ));

    entries.push(match &f0 {
        Ok(f0) => ConditionEntry::le(
            5,
            S5,
            profile.lambda2(n0f),
            f0.powf(2.0 * t) / (profile.d2 * profile.eta2(t)),
        ),
        Err(err) => ConditionEntry::unevaluable(5, S5, err),
    });

    entries.push({
        let ln_a = 4f64.ln() / (1.0 - t)
            + 2.0 / (t * (1.0 - t))
                * (profile.c2 * profile.xi2(t)
                    / (profile.c_lambda_nu * profile.d1 * profile.eta1(t)))
                .ln();
        let ln_b = 2.0 / (1.0 - t) * (50f64.ln() - t * (2.0 - t) * profile.k.ln());
        let ln_bound = ln_a.max(ln_b);
        let mut e = ConditionEntry::base(6, S6);
        let bound = ln_bound.exp();
        e.lhs = bound.is_finite().then_some(bound);
        e.rhs = Some(m);
        e.lhs_log10 = Some(ln_bound / std::f64::consts::LN_10);
        e.rhs_log10 = Some(m.log10());
        e.decided(ln_bound <= m.ln() + CONDITION_REL_TOL)
    });

    entries.push(
        match (
            f0.as_ref(),
            fam.max_derivative(n0f, (n0 + window) as f64).as_ref(),
        ) {
            (Ok(f0), Ok(dmax)) => ConditionEntry::le(7, S7, *dmax, f0 / (4752.0 * m.powi(4))),
            (Err(err), _) | (_, Err(err)) => ConditionEntry::unevaluable(7, S7, err),
        },
    );

    entries.push(
        match (f0.as_ref(), fam.eval_smooth((n0 + window) as f64).as_ref()) {
            (Ok(f0), Ok(far)) => {
                ConditionEntry::le(8, S8, *far, (264.0 * m * m).powf(1.0 / t) * f0)
            }
            (Err(err), _) | (_, Err(err)) => ConditionEntry::unevaluable(8, S8, err),
        },
    );

    entries.push(match &f0 {
        Ok(f0) => ConditionEntry::le(9, S9, 9.0 * m * f0.powf(t), profile.l * n0f),
        Err(err) => ConditionEntry::unevaluable(9, S9, err),
    });

    entries.push({
        let e = (1.0 + d) / 2.0;
        let lhs = (profile.d2 * profile.eta2(t)).powf(e) / (profile.c1 * profile.xi1(t))
            * m.powf(1.0 - d / 2.0);
        let rhs = profile.nu1(n0f) * profile.lambda2(n0f).powf(-e);
        ConditionEntry::le(10, S10, lhs, rhs)
    });

    let overall = entries.iter().all(|e| e.satisfied);
    ConditionReport {
        n0,
        t,
        m: params.m,
        entries,
        overall,
    }
}

/// `lo <= [value_lo, value_hi] <= hi`, with `value` the reported midpoint.
fn two_sided(
    id: u8,
    statement: &'static str,
    lo: f64,
    value_lo: f64,
    value: f64,
    value_hi: f64,
    hi: f64,
) -> ConditionEntry {
    let mut e = ConditionEntry::base(id, statement);
    e.lhs = Some(lo);
    e.value = Some(value);
    e.rhs = Some(hi);
    e.lhs_log10 = Some(lo.log10());
    e.rhs_log10 = Some(hi.log10());
    let ok =
        lo <= value_lo * (1.0 + CONDITION_REL_TOL) && value_hi <= hi * (1.0 + CONDITION_REL_TOL);
    e.decided(ok)
}
