//! Machine-readable verification records.
//!
//! A report pairs two independently computed sides of an identity. It passes
//! when `abs_err <= tolerance`; Monte Carlo reports set
//! `tolerance = k * mc_stderr` plus a roundoff floor of `MC_ROUNDOFF * |rhs|`
//! (which only matters for zero-variance integrands) and record `k` under the
//! `k_sigma` parameter.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::numerics::{rat_to_f64, BigRat, C64};
use crate::sampling::McEstimate;

/// One side of a verified identity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Number {
    Real(f64),
    Complex {
        re: f64,
        im: f64,
    },
    /// Exact rational rendered as `p/q`.
    Exact(String),
}

impl Number {
    pub fn from_c64(z: C64) -> Self {
        if z.im == 0.0 {
            Number::Real(z.re)
        } else {
            Number::Complex { re: z.re, im: z.im }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub check: String,
    pub params: BTreeMap<String, Value>,
    pub lhs: Number,
    pub rhs: Number,
    pub abs_err: f64,
    pub rel_err: f64,
    pub tolerance: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub mc_stderr: Option<f64>,
    pub pass: bool,
    pub seed: u64,
    /// Wall time is nondeterministic, so it is only serialised on request
    /// (see [`VerificationReport::without_timing`]).
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub wall_ms: Option<u64>,
}

/// Relative roundoff floor added to Monte Carlo tolerances.
pub const MC_ROUNDOFF: f64 = 1e-12;

fn rel(abs_err: f64, reference: f64) -> f64 {
    if reference == 0.0 {
        if abs_err == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        abs_err / reference.abs()
    }
}

impl VerificationReport {
    /// Exact comparison of two rationals: passes only on equality.
    pub fn exact(check: &str, params: BTreeMap<String, Value>, lhs: &BigRat, rhs: &BigRat) -> Self {
        let diff = rat_to_f64(&(lhs - rhs)).abs();
        let pass = lhs == rhs;
        Self {
            check: check.into(),
            params,
            lhs: Number::Exact(lhs.to_string()),
            rhs: Number::Exact(rhs.to_string()),
            abs_err: if pass { 0.0 } else { diff },
            rel_err: if pass { 0.0 } else { rel(diff, rat_to_f64(rhs)) },
            tolerance: 0.0,
            mc_stderr: None,
            pass,
            seed: 0,
            wall_ms: None,
        }
    }

    /// Deterministic comparison with an absolute tolerance.
    pub fn numeric(check: &str, params: BTreeMap<String, Value>, lhs: C64, rhs: C64, tolerance: f64) -> Self {
        let abs_err = (lhs - rhs).norm();
        Self {
            check: check.into(),
            params,
            lhs: Number::from_c64(lhs),
            rhs: Number::from_c64(rhs),
            abs_err,
            rel_err: rel(abs_err, rhs.norm()),
            tolerance,
            mc_stderr: None,
            pass: abs_err <= tolerance,
            seed: 0,
            wall_ms: None,
        }
    }

    /// Deterministic comparison against a relative tolerance.
    pub fn numeric_rel(check: &str, params: BTreeMap<String, Value>, lhs: C64, rhs: C64, rel_tol: f64) -> Self {
        let tol = rel_tol * rhs.norm().max(f64::MIN_POSITIVE);
        Self::numeric(check, params, lhs, rhs, tol)
    }

    /// Closed form `formula` against a Monte Carlo estimate, passing when the
    /// discrepancy is within `k_sigma` standard errors.
    pub fn monte_carlo(
        check: &str,
        mut params: BTreeMap<String, Value>,
        estimate: &McEstimate,
        formula: C64,
        k_sigma: f64,
    ) -> Self {
        params.insert("k_sigma".into(), k_sigma.into());
        params.insert("samples".into(), estimate.samples.into());
        let abs_err = (estimate.mean - formula).norm();
        let tolerance = k_sigma * estimate.stderr + MC_ROUNDOFF * formula.norm().max(1.0);
        Self {
            check: check.into(),
            params,
            lhs: Number::from_c64(estimate.mean),
            rhs: Number::from_c64(formula),
            abs_err,
            rel_err: rel(abs_err, formula.norm()),
            tolerance,
            mc_stderr: Some(estimate.stderr),
            pass: abs_err <= tolerance,
            seed: estimate.seed,
            wall_ms: None,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn timed(mut self, start: Instant) -> Self {
        self.wall_ms = Some(start.elapsed().as_millis() as u64);
        self
    }

    pub fn without_timing(mut self) -> Self {
        self.wall_ms = None;
        self
    }

    /// Fails the report with the given reason recorded in `params`.
    pub fn failed(mut self, reason: &str) -> Self {
        self.pass = false;
        self.params.insert("failure".into(), reason.into());
        self
    }

    /// One-line human summary.
    pub fn summary(&self) -> String {
        format!(
            "[{}] {} abs_err={:.3e} tol={:.3e}",
            if self.pass { "PASS" } else { "FAIL" },
            self.check,
            self.abs_err,
            self.tolerance
        )
    }
}

/// Builds a parameter map from `(key, value)` pairs.
#[macro_export]
macro_rules! params {
    ($($k:expr => $v:expr),* $(,)?) => {{
        #[allow(unused_mut)]
        let mut m = ::std::collections::BTreeMap::<String, ::serde_json::Value>::new();
        $( m.insert($k.to_string(), ::serde_json::json!($v)); )*
        m
    }};
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_reports_pass_only_on_equality() {
        let a = BigRat::new(1.into(), 3.into());
        let b = BigRat::new(2.into(), 6.into());
        assert!(VerificationReport::exact("x", params! {}, &a, &b).pass);
        let c = BigRat::new(1.into(), 4.into());
        let r = VerificationReport::exact("x", params! {"n" => 3}, &a, &c);
        assert!(!r.pass);
        assert!(r.abs_err > 0.0);
    }

    #[test]
    fn timing_is_not_serialised_by_default() {
        let r = VerificationReport::numeric("x", params! {}, C64::new(1.0, 0.0), C64::new(1.0, 0.0), 0.0);
        let s = serde_json::to_string(&r).unwrap();
        assert!(!s.contains("wall_ms"));
        let t = r.timed(Instant::now());
        assert!(serde_json::to_string(&t).unwrap().contains("wall_ms"));
    }
}
