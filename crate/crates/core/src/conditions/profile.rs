use serde::{Deserialize, Serialize};

/// Which family a profile instantiates; the `t`- and `n`-dependent
/// functions are evaluated from it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum ProfileKind {
    Ap { q: f64, r: f64 },
    Prime,
}

/// Constants and functions bounding the partial sums
/// `c1 ξ1 ν1 / f^{t+δt} <= Σ_{n<n1} f^{-(t+δt)} <= c2 ξ2 ν2 / f^{t+δt}` and the
/// tails `d1 η1 λ1 / f^{2t} <= Σ_{n>=n1} f^{-2t} <= d2 η2 λ2 / f^{2t}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundProfile {
    pub kind: ProfileKind,
    pub c1: f64,
    pub c2: f64,
    pub d1: f64,
    pub d2: f64,
    pub c_lambda_nu: f64,
    #[serde(rename = "K")]
    pub k: f64,
    pub l: f64,
}

/// Profile for `f(n) = q n + r`.
pub fn ap_profile(q: f64, r: f64) -> BoundProfile {
    BoundProfile {
        kind: ProfileKind::Ap { q, r },
        c1: 0.5,
        c2: 2.0,
        d1: 1.0,
        d2: 2.0,
        c_lambda_nu: 1.0,
        k: 10.0 / 11.0,
        l: 0.1,
    }
}

/// Profile for `f(n) = p_n`.
pub fn prime_profile() -> BoundProfile {
    BoundProfile {
        kind: ProfileKind::Prime,
        c1: 7.0 / 40.0,
        c2: 20.0 / 3.0,
        d1: 1.0,
        d2: 1.0,
        c_lambda_nu: 1.0,
        k: 5.0 / 6.0,
        l: 0.1,
    }
}

impl BoundProfile {
    pub fn xi1(&self, t: f64) -> f64 {
        let u = (1.0 - t).powi(2);
        match self.kind {
            ProfileKind::Ap { q, .. } => 1.0 / (q * u),
            ProfileKind::Prime => 1.0 / u,
        }
    }

    pub fn xi2(&self, t: f64) -> f64 {
        let u = (1.0 - t).powi(2);
        match self.kind {
            ProfileKind::Ap { q, .. } => 1.0 / (q * u),
            ProfileKind::Prime => 2f64.powf(2.0 * t - t * t) / u,
        }
    }

    pub fn eta1(&self, t: f64) -> f64 {
        match self.kind {
            ProfileKind::Ap { q, .. } => 1.0 / (q * (2.0 * t - 1.0)),
            ProfileKind::Prime => {
                (1.0 - 2f64.powf(1.0 - 2.0 * t)) / (2f64.powf(4.0 * t) * (2.0 * t - 1.0))
            }
        }
    }

    pub fn eta2(&self, t: f64) -> f64 {
        match self.kind {
            ProfileKind::Ap { q, .. } => 1.0 / (q * (2.0 * t - 1.0)),
            ProfileKind::Prime => 2f64.powf(1.0 + 2.0 * t) / (2.0 * t - 1.0),
        }
    }

    fn linear(&self, n: f64) -> f64 {
        match self.kind {
            ProfileKind::Ap { q, r } => q * n + r,
            ProfileKind::Prime => n,
        }
    }

    pub fn nu1(&self, n: f64) -> f64 {
        self.linear(n)
    }

    pub fn nu2(&self, n: f64) -> f64 {
        self.linear(n)
    }

    pub fn lambda1(&self, n: f64) -> f64 {
        self.linear(n)
    }

    pub fn lambda2(&self, n: f64) -> f64 {
        self.linear(n)
    }

    /// Checks `c1 <= c2`, `d1 <= d2`, `0 < K <= 1`, `0 < l < 1` and
    /// positivity of the `t`-functions.
    pub fn is_consistent(&self, t: f64) -> bool {
        let positive = [self.xi1(t), self.xi2(t), self.eta1(t), self.eta2(t)]
            .iter()
            .all(|v| *v > 0.0 && v.is_finite());
        self.c1 <= self.c2
            && self.d1 <= self.d2
            && self.k > 0.0
            && self.k <= 1.0
            && self.l > 0.0
            && self.l < 1.0
            && self.c_lambda_nu > 0.0
            && positive
    }
}
