//! State spaces, problem definitions and grid validation of the
//! Engelbert–Schmidt conditions.

use super::expr::Expr;
use crate::quad::{local_integrability_at, Tolerances};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpaceError {
    #[error("state space needs l < x0 < r, got l={l}, x0={x0}, r={r}")]
    Ordering { l: f64, x0: f64, r: f64 },
    #[error("starting point must be finite, got {0}")]
    NonFiniteStart(f64),
    #[error("endpoint may not be NaN")]
    NanEndpoint,
}

/// Open interval `(l, r)` with a starting point. Endpoints may be infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StateSpace {
    #[serde(serialize_with = "crate::ser::ext_real")]
    pub l: f64,
    #[serde(serialize_with = "crate::ser::ext_real")]
    pub r: f64,
    pub x0: f64,
}

impl StateSpace {
    pub fn new(l: f64, r: f64, x0: f64) -> Result<Self, SpaceError> {
        if l.is_nan() || r.is_nan() {
            return Err(SpaceError::NanEndpoint);
        }
        if !x0.is_finite() {
            return Err(SpaceError::NonFiniteStart(x0));
        }
        if !(l < x0 && x0 < r) {
            return Err(SpaceError::Ordering { l, x0, r });
        }
        Ok(StateSpace { l, r, x0 })
    }

    pub fn contains(&self, x: f64) -> bool {
        self.l < x && x < self.r
    }

    /// Same interval, different starting point.
    pub fn with_start(&self, x0: f64) -> Result<Self, SpaceError> {
        StateSpace::new(self.l, self.r, x0)
    }

    pub fn endpoint(&self, side: Endpoint) -> f64 {
        match side {
            Endpoint::Left => self.l,
            Endpoint::Right => self.r,
        }
    }

    /// Probe points clustered geometrically toward each endpoint (or spread
    /// geometrically outward for an infinite one). Always contains `x0`;
    /// sorted, strictly inside the interval, at least `n` points when
    /// `n >= 3`.
    pub fn probe_grid(&self, n: usize) -> Vec<f64> {
        let per_side = n.saturating_sub(1).div_ceil(2).max(1);
        let mut pts = Vec::with_capacity(2 * per_side + 1);
        for side in [Endpoint::Left, Endpoint::Right] {
            let sign = side.sign();
            let e = self.endpoint(side);
            for k in 1..=per_side {
                let frac = k as f64 / per_side as f64;
                let x = if e.is_finite() {
                    let span = (e - self.x0).abs();
                    // distance to the endpoint shrinks geometrically to 1e-6 of the span
                    e - sign * span * (1e-6f64).powf(frac)
                } else {
                    let w = 1.0 + self.x0.abs();
                    self.x0 + sign * w * ((1e6f64).powf(frac) - 1.0)
                };
                if self.contains(x) {
                    pts.push(x);
                }
            }
        }
        pts.push(self.x0);
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }
}

/// The two boundary points of a state space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Endpoint {
    Left,
    Right,
}

impl Endpoint {
    /// `-1` for the left endpoint, `+1` for the right.
    pub fn sign(self) -> f64 {
        match self {
            Endpoint::Left => -1.0,
            Endpoint::Right => 1.0,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Endpoint::Left => "l",
            Endpoint::Right => "r",
        }
    }
}

/// A diffusion `dY = mu(Y) dt + sigma(Y) dW` on `space` together with the
/// integrand `f` of the functional.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    pub space: StateSpace,
    pub mu: Expr,
    pub sigma: Expr,
    pub f: Expr,
    /// Points where a coefficient is known to be non-smooth or singular.
    pub declared_singularities: Vec<f64>,
    /// Asserts that `f` vanishes Lebesgue-a.e. even if point samples are positive.
    pub f_ae_zero: bool,
}

impl Problem {
    pub fn new(space: StateSpace, mu: Expr, sigma: Expr, f: Expr) -> Self {
        Problem {
            space,
            mu,
            sigma,
            f,
            declared_singularities: Vec::new(),
            f_ae_zero: false,
        }
    }

    pub fn with_singularities(mut self, pts: Vec<f64>) -> Self {
        self.declared_singularities = pts;
        self
    }

    /// Same coefficients on a different interval.
    pub fn restricted_to(&self, space: StateSpace) -> Problem {
        Problem {
            space,
            declared_singularities: self
                .declared_singularities
                .iter()
                .copied()
                .filter(|&x| space.contains(x))
                .collect(),
            ..self.clone()
        }
    }

    /// `f / sigma^2`, the density whose local integrability defines `D`.
    pub fn f_over_sigma2(&self, x: f64) -> f64 {
        let s = self.sigma.eval(x);
        self.f.eval(x) / (s * s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    SigmaZero,
    SigmaUndefined,
    MuUndefined,
    FNegative,
    FUndefined,
    InvSigma2NotLocallyIntegrable,
    MuOverSigma2NotLocallyIntegrable,
    LocalIntegrabilityIndeterminate,
    SingularityOutsideSpace,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub condition: Condition,
    pub x: f64,
    pub value: Option<f64>,
}

/// How strongly the Engelbert–Schmidt conditions were checked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckLevel {
    /// Verified at probe points and declared singularities only.
    GridVerified,
}

/// A problem that passed grid validation.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidatedProblem {
    problem: Problem,
    probes: Vec<f64>,
    level: CheckLevel,
}

impl ValidatedProblem {
    pub fn problem(&self) -> &Problem {
        &self.problem
    }

    pub fn probes(&self) -> &[f64] {
        &self.probes
    }

    pub fn check_level(&self) -> CheckLevel {
        self.level
    }

    pub fn into_problem(self) -> Problem {
        self.problem
    }
}

/// Checks `sigma != 0`, finiteness of `mu` and `sigma`, and `f >= 0` on a
/// probe grid of `n_probes` points, plus local integrability of
/// `1/sigma^2` and `mu/sigma^2` at declared singularities.
pub fn validate_problem(p: Problem, n_probes: usize) -> Result<ValidatedProblem, Vec<Violation>> {
    assert!(n_probes >= 16, "validation needs at least 16 probes");
    let probes = p.space.probe_grid(n_probes);
    validate_at(p, &probes)
}

/// Validation on an explicit probe set. Every check is pointwise, so a
/// problem valid on a probe set is valid on each of its subsets.
pub fn validate_at(p: Problem, probes: &[f64]) -> Result<ValidatedProblem, Vec<Violation>> {
    let mut violations = Vec::new();
    let singular = |x: f64| p.declared_singularities.contains(&x);
    for &x in probes {
        if !p.space.contains(x) {
            continue;
        }
        let tolerate = singular(x);
        let s = p.sigma.eval(x);
        if s == 0.0 {
            violations.push(Violation { condition: Condition::SigmaZero, x, value: Some(s) });
        } else if !s.is_finite() && !tolerate {
            violations.push(Violation { condition: Condition::SigmaUndefined, x, value: Some(s) });
        }
        let m = p.mu.eval(x);
        if !m.is_finite() && !tolerate {
            violations.push(Violation { condition: Condition::MuUndefined, x, value: Some(m) });
        }
        let fv = p.f.eval(x);
        if fv.is_nan() {
            if !tolerate {
                violations.push(Violation { condition: Condition::FUndefined, x, value: None });
            }
        } else if fv < 0.0 {
            violations.push(Violation { condition: Condition::FNegative, x, value: Some(fv) });
        }
    }

    // A sign change of sigma between neighbouring probes hides a zero.
    let mut inside: Vec<f64> = probes.iter().copied().filter(|&x| p.space.contains(x)).collect();
    inside.sort_by(f64::total_cmp);
    for w in inside.windows(2) {
        let (a, b) = (p.sigma.eval(w[0]), p.sigma.eval(w[1]));
        if a.is_finite() && b.is_finite() && a * b < 0.0 {
            let x = sign_change(&p.sigma, w[0], w[1]);
            violations.push(Violation { condition: Condition::SigmaZero, x, value: Some(p.sigma.eval(x)) });
        }
    }

    let tol = Tolerances::default();
    for &x in &p.declared_singularities {
        if !p.space.contains(x) {
            violations.push(Violation {
                condition: Condition::SingularityOutsideSpace,
                x,
                value: None,
            });
            continue;
        }
        let s = p.sigma.eval(x);
        if s == 0.0 {
            violations.push(Violation { condition: Condition::SigmaZero, x, value: Some(s) });
        }
        let inv = |y: f64| {
            let s = p.sigma.eval(y);
            1.0 / (s * s)
        };
        let drift = |y: f64| {
            let s = p.sigma.eval(y);
            p.mu.eval(y).abs() / (s * s)
        };
        for (g, cond) in [
            (&inv as &dyn Fn(f64) -> f64, Condition::InvSigma2NotLocallyIntegrable),
            (&drift, Condition::MuOverSigma2NotLocallyIntegrable),
        ] {
            match local_integrability_at(g, x, &tol).integrable {
                Some(true) => {}
                Some(false) => violations.push(Violation { condition: cond, x, value: None }),
                None => violations.push(Violation {
                    condition: Condition::LocalIntegrabilityIndeterminate,
                    x,
                    value: None,
                }),
            }
        }
    }

    if violations.is_empty() {
        Ok(ValidatedProblem {
            problem: p,
            probes: probes.to_vec(),
            level: CheckLevel::GridVerified,
        })
    } else {
        Err(violations)
    }
}

/// Bisects a sign change of `e` on `[a, b]` down to adjacent floats.
fn sign_change(e: &Expr, mut a: f64, mut b: f64) -> f64 {
    let mut fa = e.eval(a);
    loop {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            return if e.eval(a).abs() <= e.eval(b).abs() { a } else { b };
        }
        let fm = e.eval(m);
        if fm == 0.0 || fm.is_nan() {
            return m;
        }
        if (fm < 0.0) == (fa < 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
}
