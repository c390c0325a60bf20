//! Scale density `ρ(x) = exp(−∫_c^x 2μ/σ²)`, scale function
//! `s(x) = ∫_c^x ρ` and the boundary limits `s(l)`, `s(r)`.
//!
//! Values are anchored on a knot table per side of `c`. The knots sit on the
//! same geometric schedule that [`classify_improper`] uses with `inner = c`,
//! so every quadrature toward an endpoint starts from a cached knot and the
//! results do not depend on the order in which points were requested.

use crate::coeffspec::{Endpoint, Expr, Problem, StateSpace};
use crate::quad::{
    classify_improper, cut_point, integrate_compact, schedule_len, ImproperVerdict, QuadError,
    Side, Tolerances,
};
use serde::Serialize;
use std::sync::{OnceLock, RwLock};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScaleError {
    #[error("point {0} is outside the state space")]
    OutsideSpace(f64),
    #[error(transparent)]
    Quad(#[from] QuadError),
    #[error("scale density is not positive and finite at {0}")]
    BadDensity(f64),
    #[error("value {0} is outside the range of the scale function")]
    OutsideRange(f64),
}

/// Integral of `g` from `a` to `b` with orientation.
fn signed_integral<G: Fn(f64) -> f64 + ?Sized>(
    g: &G,
    a: f64,
    b: f64,
    tol: &Tolerances,
) -> Result<f64, QuadError> {
    if a < b {
        Ok(integrate_compact(g, a, b, tol)?.value)
    } else if a > b {
        Ok(-integrate_compact(g, b, a, tol)?.value)
    } else {
        Ok(0.0)
    }
}

fn drift_density(mu: &Expr, sigma: &Expr, y: f64) -> f64 {
    let s = sigma.eval(y);
    2.0 * mu.eval(y) / (s * s)
}

/// `ρ(x)` for reference point `c`, by one direct quadrature of the exponent.
pub fn rho_at(p: &Problem, c: f64, x: f64, tol: &Tolerances) -> Result<f64, ScaleError> {
    for z in [c, x] {
        if !p.space.contains(z) {
            return Err(ScaleError::OutsideSpace(z));
        }
    }
    if p.mu.is_literal_zero() {
        return Ok(1.0);
    }
    let lambda = signed_integral(&|y: f64| drift_density(&p.mu, &p.sigma, y), c, x, tol)?;
    Ok((-lambda).exp())
}

/// One entry of the knot table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Knot {
    pub x: f64,
    /// `∫_c^x 2μ/σ²`.
    pub lambda: f64,
    pub s: f64,
    /// `∫ ρ` over the panel between the previous knot and this one.
    pub increment: f64,
}

/// Limit of `s` at one endpoint.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScaleLimit {
    pub endpoint: Endpoint,
    /// Finite value, `±inf`, or NaN (serialized as null) when indeterminate.
    #[serde(serialize_with = "crate::ser::ext_real")]
    pub value: f64,
    pub verdict: ImproperVerdict,
}

impl ScaleLimit {
    pub fn is_finite(&self) -> bool {
        self.verdict.is_finite()
    }

    pub fn is_infinite(&self) -> bool {
        self.verdict.is_infinite()
    }

    pub fn is_indeterminate(&self) -> bool {
        self.verdict.is_indeterminate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryLimits {
    pub s_l: ScaleLimit,
    pub s_r: ScaleLimit,
}

fn quad_side(side: Endpoint) -> Side {
    match side {
        Endpoint::Left => Side::RightOf,
        Endpoint::Right => Side::LeftOf,
    }
}

#[derive(Debug)]
pub struct ScaleFunction {
    mu: Expr,
    sigma: Expr,
    space: StateSpace,
    c: f64,
    tol: Tolerances,
    drift_free: bool,
    left: RwLock<Vec<Knot>>,
    right: RwLock<Vec<Knot>>,
    left_limit: OnceLock<ScaleLimit>,
    right_limit: OnceLock<ScaleLimit>,
    left_remainder: OnceLock<Option<f64>>,
    right_remainder: OnceLock<Option<f64>>,
}

impl Clone for ScaleFunction {
    fn clone(&self) -> Self {
        ScaleFunction {
            mu: self.mu.clone(),
            sigma: self.sigma.clone(),
            space: self.space,
            c: self.c,
            tol: self.tol,
            drift_free: self.drift_free,
            left: RwLock::new(self.knots(Endpoint::Left)),
            right: RwLock::new(self.knots(Endpoint::Right)),
            left_limit: self.left_limit.clone(),
            right_limit: self.right_limit.clone(),
            left_remainder: self.left_remainder.clone(),
            right_remainder: self.right_remainder.clone(),
        }
    }
}

impl ScaleFunction {
    /// Scale function anchored at the starting point `x0`.
    pub fn new(p: &Problem, tol: Tolerances) -> Self {
        Self::with_reference(p, p.space.x0, tol).expect("x0 is interior")
    }

    pub fn with_reference(p: &Problem, c: f64, tol: Tolerances) -> Result<Self, ScaleError> {
        if !p.space.contains(c) {
            return Err(ScaleError::OutsideSpace(c));
        }
        let origin = Knot { x: c, lambda: 0.0, s: 0.0, increment: 0.0 };
        Ok(ScaleFunction {
            mu: p.mu.clone(),
            sigma: p.sigma.clone(),
            space: p.space,
            c,
            tol,
            drift_free: p.mu.is_literal_zero(),
            left: RwLock::new(vec![origin]),
            right: RwLock::new(vec![origin]),
            left_limit: OnceLock::new(),
            right_limit: OnceLock::new(),
            left_remainder: OnceLock::new(),
            right_remainder: OnceLock::new(),
        })
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn space(&self) -> &StateSpace {
        &self.space
    }

    pub fn tolerances(&self) -> &Tolerances {
        &self.tol
    }

    pub fn sigma(&self) -> &Expr {
        &self.sigma
    }

    /// Snapshot of the knot table toward one endpoint, starting at `c`.
    pub fn knots(&self, side: Endpoint) -> Vec<Knot> {
        self.table(side).read().expect("knot table poisoned").clone()
    }

    fn table(&self, side: Endpoint) -> &RwLock<Vec<Knot>> {
        match side {
            Endpoint::Left => &self.left,
            Endpoint::Right => &self.right,
        }
    }

    fn side_of(&self, x: f64) -> Endpoint {
        if x < self.c {
            Endpoint::Left
        } else {
            Endpoint::Right
        }
    }

    fn full_len(&self, side: Endpoint) -> usize {
        schedule_len(self.space.endpoint(side), self.c, &self.tol) + 1
    }

    fn lambda_from(&self, knot: &Knot, x: f64) -> Result<f64, QuadError> {
        if self.drift_free {
            return Ok(0.0);
        }
        let g = |y: f64| drift_density(&self.mu, &self.sigma, y);
        Ok(knot.lambda + signed_integral(&g, knot.x, x, &self.tol)?)
    }

    fn rho_from(&self, knot: &Knot, x: f64) -> f64 {
        match self.lambda_from(knot, x) {
            Ok(l) => (-l).exp(),
            Err(_) => f64::NAN,
        }
    }

    fn next_knot(&self, side: Endpoint, prev: &Knot, k: usize) -> Result<Knot, ScaleError> {
        let e = self.space.endpoint(side);
        let x = cut_point(e, quad_side(side), self.c, k, self.tol.shrink_ratio);
        let lambda = self.lambda_from(prev, x)?;
        let ds = signed_integral(&|y: f64| self.rho_from(prev, y), prev.x, x, &self.tol)?;
        Ok(Knot { x, lambda, s: prev.s + ds, increment: ds.abs() })
    }

    /// Extends the table until it covers `x` and returns the last knot
    /// between `c` and `x`.
    fn anchor(&self, x: f64) -> Result<Knot, ScaleError> {
        let side = self.side_of(x);
        let dir = side.sign();
        let full = self.full_len(side);
        loop {
            let (len, last) = {
                let t = self.table(side).read().expect("knot table poisoned");
                let pos = t.iter().rposition(|k| dir * (k.x - x) <= 0.0).unwrap_or(0);
                if pos + 1 < t.len() || t.len() >= full {
                    return Ok(t[pos]);
                }
                (t.len(), t[t.len() - 1])
            };
            let next = self.next_knot(side, &last, len)?;
            let mut t = self.table(side).write().expect("knot table poisoned");
            if t.len() == len {
                t.push(next);
            }
        }
    }

    /// Builds the whole table toward one endpoint.
    fn fill(&self, side: Endpoint) -> Result<(), ScaleError> {
        let e = self.space.endpoint(side);
        let k = self.full_len(side) - 1;
        let far = cut_point(e, quad_side(side), self.c, k, self.tol.shrink_ratio);
        self.anchor(far).map(|_| ())
    }

    pub fn try_rho(&self, x: f64) -> Result<f64, ScaleError> {
        if !self.space.contains(x) {
            return Err(ScaleError::OutsideSpace(x));
        }
        if self.drift_free {
            return Ok(1.0);
        }
        let knot = self.anchor(x)?;
        let v = (-self.lambda_from(&knot, x)?).exp();
        if v > 0.0 && v.is_finite() {
            Ok(v)
        } else {
            Err(ScaleError::BadDensity(x))
        }
    }

    /// `ρ(x)`, NaN when it cannot be computed.
    pub fn rho(&self, x: f64) -> f64 {
        self.try_rho(x).unwrap_or(f64::NAN)
    }

    pub fn try_s(&self, x: f64) -> Result<f64, ScaleError> {
        if !self.space.contains(x) {
            return Err(ScaleError::OutsideSpace(x));
        }
        if self.drift_free {
            return Ok(x - self.c);
        }
        let knot = self.anchor(x)?;
        Ok(knot.s + signed_integral(&|y: f64| self.rho_from(&knot, y), knot.x, x, &self.tol)?)
    }

    /// `s(x)`, NaN when it cannot be computed.
    pub fn s(&self, x: f64) -> f64 {
        self.try_s(x).unwrap_or(f64::NAN)
    }

    /// Limit of `s` at one endpoint, computed once.
    pub fn limit(&self, side: Endpoint) -> &ScaleLimit {
        let cell = match side {
            Endpoint::Left => &self.left_limit,
            Endpoint::Right => &self.right_limit,
        };
        cell.get_or_init(|| {
            let e = self.space.endpoint(side);
            let _ = self.fill(side);
            let verdict = classify_improper(&|y: f64| self.rho(y), e, quad_side(side), self.c, &self.tol);
            let value = match verdict.kind {
                crate::quad::VerdictKind::Finite { value, .. } => side.sign() * value,
                crate::quad::VerdictKind::Infinite => side.sign() * f64::INFINITY,
                crate::quad::VerdictKind::Indeterminate { .. } => f64::NAN,
            };
            ScaleLimit { endpoint: side, value, verdict }
        })
    }

    pub fn limits(&self) -> BoundaryLimits {
        BoundaryLimits {
            s_l: self.limit(Endpoint::Left).clone(),
            s_r: self.limit(Endpoint::Right).clone(),
        }
    }

    /// `|s(e) − s(x)| = ∫_x^e ρ` toward endpoint `side`, computed from tail
    /// sums of knot increments rather than as a difference. NaN unless the
    /// limit at that endpoint is finite.
    pub fn tail(&self, side: Endpoint, x: f64) -> f64 {
        self.try_tail(side, x).unwrap_or(f64::NAN)
    }

    pub fn try_tail(&self, side: Endpoint, x: f64) -> Result<f64, ScaleError> {
        if !self.space.contains(x) {
            return Err(ScaleError::OutsideSpace(x));
        }
        let remainder = self.remainder(side).ok_or(ScaleError::OutsideRange(x))?;
        let knots = self.knots(side);
        let dir = side.sign();
        let mut suffix = vec![0.0; knots.len()];
        let n = knots.len();
        suffix[n - 1] = remainder;
        for j in (0..n - 1).rev() {
            suffix[j] = suffix[j + 1] + knots[j + 1].increment;
        }
        if dir * (x - self.c) <= 0.0 {
            // on the far side of c
            let back = self.try_s(x)?.abs();
            return Ok(suffix[0] + back);
        }
        let pos = knots.iter().rposition(|k| dir * (k.x - x) <= 0.0).unwrap_or(0);
        if pos + 1 < n {
            let next = &knots[pos + 1];
            let piece = signed_integral(&|y: f64| self.rho_from(&knots[pos], y), x, next.x, &self.tol)?;
            Ok(suffix[pos + 1] + piece.abs())
        } else {
            let last = &knots[n - 1];
            let at_x = Knot { x, lambda: self.lambda_from(last, x)?, s: f64::NAN, increment: 0.0 };
            if let Some(v) = self.direct_tail(side, &at_x) {
                return Ok(v);
            }
            let piece = signed_integral(&|y: f64| self.rho_from(last, y), last.x, x, &self.tol)?;
            Ok((remainder - piece.abs()).max(0.0))
        }
    }

    /// `∫ ρ` from the last knot to the endpoint. `None` unless finite.
    fn remainder(&self, side: Endpoint) -> Option<f64> {
        let cell = match side {
            Endpoint::Left => &self.left_remainder,
            Endpoint::Right => &self.right_remainder,
        };
        *cell.get_or_init(|| {
            let lim = self.limit(side);
            let total = lim.verdict.value()?;
            let last = *self.knots(side).last().expect("tables start at c");
            let extrapolated = (total - lim.verdict.partial_integrals.last().map_or(0.0, |p| p.value)).max(0.0);
            Some(self.direct_tail(side, &last).unwrap_or(extrapolated))
        })
    }

    /// `∫ ρ` from `from.x` to the endpoint as its own improper integral,
    /// which keeps relative accuracy where the tail is tiny.
    fn direct_tail(&self, side: Endpoint, from: &Knot) -> Option<f64> {
        let e = self.space.endpoint(side);
        if from.x == e {
            return Some(0.0);
        }
        classify_improper(&|y: f64| self.rho_from(from, y), e, quad_side(side), from.x, &self.tol).value()
    }

    /// `s⁻¹(u)` by bracketing on the knot table and safeguarded Newton.
    /// Near an endpoint with a finite limit the residual is formed from tail
    /// integrals so that points very close to the endpoint stay resolvable.
    pub fn s_inverse(&self, u: f64) -> Result<f64, ScaleError> {
        if u.is_nan() {
            return Err(ScaleError::OutsideRange(u));
        }
        if self.drift_free {
            let x = u + self.c;
            return if self.space.contains(x) { Ok(x) } else { Err(ScaleError::OutsideRange(u)) };
        }
        let side = if u < 0.0 { Endpoint::Left } else { Endpoint::Right };
        let dir = side.sign();
        let lim = self.limit(side);
        if dir * (u - lim.value) >= 0.0 {
            return Err(ScaleError::OutsideRange(u));
        }
        let knots = self.knots(side);
        let pos = knots.iter().rposition(|k| dir * (k.s - u) <= 0.0).unwrap_or(0);
        let (a, b) = if pos + 1 < knots.len() {
            (knots[pos].x, knots[pos + 1].x)
        } else {
            let last = knots[knots.len() - 1].x;
            let e = self.space.endpoint(side);
            let far = if e.is_finite() { 0.5 * (last + e) } else { last + dir * (last - self.c).abs() * 8.0 };
            (last, far)
        };
        let use_tail = lim.is_finite() && pos >= 1;
        let target_tail = if use_tail { dir * (lim.value - u) } else { 0.0 };
        // residual increasing in dir·x
        let resid = |x: f64| -> Result<f64, ScaleError> {
            if use_tail {
                Ok(target_tail - self.try_tail(side, x)?)
            } else {
                Ok(dir * (self.try_s(x)? - u))
            }
        };
        let (mut lo, mut hi) = (a, b); // lo nearer c
        let mut x = 0.5 * (lo + hi);
        for _ in 0..200 {
            let r = resid(x)?;
            if r == 0.0 {
                return Ok(x);
            }
            if r < 0.0 {
                lo = x;
            } else {
                hi = x;
            }
            let slope = self.try_rho(x)?;
            let newton = x - dir * r / slope;
            let inside = if dir > 0.0 { newton > lo && newton < hi } else { newton < lo && newton > hi };
            let next = if inside { newton } else { 0.5 * (lo + hi) };
            let scale = x.abs().max(1e-300);
            if (next - x).abs() <= 4.0 * f64::EPSILON * scale || (hi - lo).abs() <= 4.0 * f64::EPSILON * scale {
                return Ok(next);
            }
            x = next;
        }
        Ok(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffspec::parse_expr;

    fn problem(l: f64, r: f64, x0: f64, mu: &str, sigma: &str) -> Problem {
        Problem::new(
            StateSpace::new(l, r, x0).unwrap(),
            parse_expr(mu).unwrap(),
            parse_expr(sigma).unwrap(),
            parse_expr("1").unwrap(),
        )
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn rho_examples() {
        let t = Tolerances::default();
        let gbm = problem(0.0, f64::INFINITY, 1.0, "0.1*x", "0.2*x");
        // (x/c)^(-2a/b^2) = 2^-5
        assert!(rel(rho_at(&gbm, 1.0, 2.0, &t).unwrap(), 0.03125) < 1e-9);
        let bes = problem(0.0, f64::INFINITY, 1.0, "1/x", "1");
        assert!(rel(rho_at(&bes, 1.0, 2.0, &t).unwrap(), 0.25) < 1e-9);
        let bm = problem(f64::NEG_INFINITY, f64::INFINITY, 0.0, "0", "1");
        assert_eq!(rho_at(&bm, 0.0, 5.0, &t).unwrap(), 1.0);
        assert!(rho_at(&bes, 1.0, -1.0, &t).is_err());
    }

    #[test]
    fn bessel_type_scale() {
        let p = problem(0.0, f64::INFINITY, 1.0, "1/x", "1");
        let sf = ScaleFunction::new(&p, Tolerances::default());
        assert!(rel(sf.s(2.0), 0.5) < 1e-9);
        assert_eq!(sf.s(1.0), 0.0);
        for x in [0.01, 0.3, 3.0, 1e3, 1e6] {
            assert!(rel(sf.s(x), 1.0 - 1.0 / x) < 1e-8, "x={x}");
            assert!(rel(sf.rho(x), 1.0 / (x * x)) < 1e-8, "x={x}");
            assert!(rel(sf.tail(Endpoint::Right, x), 1.0 / x) < 1e-7, "x={x}");
        }
        let lim = sf.limits();
        assert!(lim.s_l.is_infinite() && lim.s_l.value == f64::NEG_INFINITY);
        assert!(rel(lim.s_r.value, 1.0) < 1e-7);
    }

    #[test]
    fn driftless_scale_is_shift() {
        let p = problem(0.0, f64::INFINITY, 1.0, "0", "0.3*x");
        let sf = ScaleFunction::new(&p, Tolerances::default());
        assert_eq!(sf.s(2.5), 1.5);
        let lim = sf.limits();
        assert!(rel(lim.s_l.value, -1.0) < 1e-9);
        assert!(lim.s_r.is_infinite());
        assert!(rel(sf.tail(Endpoint::Left, 1e-4), 1e-4) < 1e-6);
    }

    #[test]
    fn knots_are_monotone_and_order_independent() {
        let p = problem(0.0, f64::INFINITY, 1.0, "0.1*x", "0.2*x");
        let a = ScaleFunction::new(&p, Tolerances::default());
        let b = ScaleFunction::new(&p, Tolerances::default());
        let xs = [0.5, 3.0, 0.01, 40.0, 1.7];
        let va: Vec<f64> = xs.iter().map(|&x| a.s(x)).collect();
        let vb: Vec<f64> = xs.iter().rev().map(|&x| b.s(x)).collect::<Vec<_>>().into_iter().rev().collect();
        assert_eq!(va, vb);
        for side in [Endpoint::Left, Endpoint::Right] {
            let k = a.knots(side);
            assert!(k.windows(2).all(|w| side.sign() * (w[1].s - w[0].s) > 0.0));
        }
    }

    #[test]
    fn tail_keeps_relative_accuracy_far_out() {
        let p = problem(0.0, f64::INFINITY, 1.0, "0.1*x", "0.2*x");
        let sf = ScaleFunction::new(&p, Tolerances::default());
        for x in [10.0, 1e3, 1e6, 1e11, 1e14] {
            let want = 0.25 * f64::powi(x, -4);
            assert!(rel(sf.tail(Endpoint::Right, x), want) < 1e-6, "x={x}: {} vs {want}", sf.tail(Endpoint::Right, x));
        }
    }

    #[test]
    fn inverse_round_trip() {
        let p = problem(0.0, f64::INFINITY, 1.0, "0.1*x", "0.2*x");
        let sf = ScaleFunction::new(&p, Tolerances::default());
        for x in [0.2, 0.5, 0.9, 1.0, 1.3, 2.0, 5.0, 20.0] {
            let back = sf.s_inverse(sf.s(x)).unwrap();
            assert!((back - x).abs() < 1e-8 * x.max(1.0), "x={x} back={back}");
        }
        assert!(sf.s_inverse(0.3).is_err());
    }
}
