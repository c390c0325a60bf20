//! Decision procedure for the finiteness of `∫_0^ζ f(Y_u) du`.
//!
//! The steps are: locate the set `D` where `f/σ²` is not locally
//! integrable and shrink the state space to the component `(α, β)` around
//! `x0`; classify the boundaries of that interval through the scale
//! function; then decide the functional on each event. When both scale
//! limits are infinite the path is recurrent and the functional is zero or
//! infinite according to whether `f` charges Lebesgue measure. Otherwise
//! each attracted endpoint `e` is decided by integrability of
//! `|s(e) − s| f / (ρσ²)` at `e`.
//!
//! All verdicts are about `∫_0^{η_D} f(Y_u) du`, where `η_D` is the exit
//! time from `(α, β)`; after `η_D` the functional is infinite.

use crate::coeffspec::{CheckLevel, Endpoint, Expr, Problem, StateSpace, ValidatedProblem};
use crate::quad::{
    classify_improper, nonintegrability_set, ImproperVerdict, NonIntegrabilityScan, Side,
    Tolerances, VerdictKind,
};
use crate::scale::{BoundaryLimits, ScaleFunction, ScaleLimit};
use serde::Serialize;
use thiserror::Error;

/// Points in the positivity probe and the dense candidate scan.
pub const POSITIVITY_PROBES: usize = 1024;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ClassifyError {
    #[error("reference point {0} is not inside the reduced interval")]
    ReferenceOutside(f64),
}

/// Verdict for the functional on one event.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EventVerdict {
    Zero,
    Finite,
    Infinite,
    /// The event has probability zero.
    EventNull,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Explosion {
    /// The endpoint is reached in finite time with positive probability.
    Explosive,
    NonExplosive,
    Indeterminate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EndpointBehavior {
    pub endpoint: Endpoint,
    #[serde(serialize_with = "crate::ser::ext_real")]
    pub location: f64,
    /// Scale limit finite at this endpoint; `None` when indeterminate.
    pub attracted: Option<bool>,
    /// Present iff `attracted == Some(true)`.
    pub explosive: Option<Explosion>,
    pub feller_integrand_verdict: Option<ImproperVerdict>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RecurrenceClass {
    /// `s(l) = −∞` and `s(r) = +∞`: the path oscillates between the ends.
    RecurrentA,
    TransientMix { left: EndpointBehavior, right: EndpointBehavior },
    /// At least one scale limit was indeterminate.
    Undetermined { left: EndpointBehavior, right: EndpointBehavior },
}

/// `|s(e) − s(x)|`, the scale distance to endpoint `e`.
fn scale_gap(sf: &ScaleFunction, endpoint: Endpoint, x: f64) -> f64 {
    sf.tail(endpoint, x)
}

fn quad_side(endpoint: Endpoint) -> Side {
    match endpoint {
        Endpoint::Left => Side::RightOf,
        Endpoint::Right => Side::LeftOf,
    }
}

fn sigma2(sigma: &Expr, x: f64) -> f64 {
    let s = sigma.eval(x);
    s * s
}

/// Explosion test at one endpoint: attracted iff the scale limit is finite,
/// explosive iff additionally `|s(e) − s| / (ρσ²)` is integrable at `e`.
pub fn feller_test(
    p: &Problem,
    sf: &ScaleFunction,
    endpoint: Endpoint,
    tol: &Tolerances,
) -> EndpointBehavior {
    let lim = sf.limit(endpoint);
    let mut out = EndpointBehavior {
        endpoint,
        location: p.space.endpoint(endpoint),
        attracted: lim.verdict.decided(),
        explosive: None,
        feller_integrand_verdict: None,
    };
    if out.attracted != Some(true) {
        return out;
    }
    let g = |x: f64| scale_gap(sf, endpoint, x) / (sf.rho(x) * sigma2(&p.sigma, x));
    let v = classify_improper(&g, out.location, quad_side(endpoint), sf.c(), tol);
    out.explosive = Some(match v.decided() {
        Some(true) => Explosion::Explosive,
        Some(false) => Explosion::NonExplosive,
        None => Explosion::Indeterminate,
    });
    out.feller_integrand_verdict = Some(v);
    out
}

pub fn classify_recurrence(p: &Problem, sf: &ScaleFunction, tol: &Tolerances) -> RecurrenceClass {
    let (l, r) = (sf.limit(Endpoint::Left), sf.limit(Endpoint::Right));
    if l.is_infinite() && r.is_infinite() {
        return RecurrenceClass::RecurrentA;
    }
    let left = feller_test(p, sf, Endpoint::Left, tol);
    let right = feller_test(p, sf, Endpoint::Right, tol);
    if l.is_indeterminate() || r.is_indeterminate() {
        RecurrenceClass::Undetermined { left, right }
    } else {
        RecurrenceClass::TransientMix { left, right }
    }
}

/// The component of `J \ D` containing `x0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReducedProblem {
    pub d_points: Vec<f64>,
    pub indeterminate_points: Vec<f64>,
    pub candidates_tested: Vec<f64>,
    #[serde(serialize_with = "crate::ser::ext_real")]
    pub alpha: f64,
    #[serde(serialize_with = "crate::ser::ext_real")]
    pub beta: f64,
    /// `(α, β)` with the original `x0`; absent when `x0 ∈ D`.
    pub space: Option<StateSpace>,
    pub x0_in_d: bool,
    /// Indeterminate candidates that could move `α`, `β` or sit at `x0`.
    pub blocking_points: Vec<f64>,
}

impl ReducedProblem {
    pub fn is_blocked(&self) -> bool {
        !self.blocking_points.is_empty()
    }
}

/// Candidate list for the `D` scan: the given probes, the declared
/// singularities, `x0`, and points of a dense grid where `f/σ²` is not
/// finite.
pub fn default_candidates(p: &Problem, probes: &[f64]) -> Vec<f64> {
    let mut c: Vec<f64> = probes.to_vec();
    c.extend(p.declared_singularities.iter().copied());
    c.push(p.space.x0);
    c.extend(dense_grid(&p.space, POSITIVITY_PROBES).into_iter().filter(|&x| !p.f_over_sigma2(x).is_finite()));
    c.retain(|&x| p.space.contains(x));
    c.sort_by(f64::total_cmp);
    c.dedup();
    c
}

/// Half the points clustered toward the endpoints as in
/// [`StateSpace::probe_grid`], half uniform on the finite window
/// `J ∩ [x0 − w, x0 + w]` with `w = 10(1 + |x0|)`. The uniform part uses a
/// power-of-two number of cells so that dyadic points such as the midpoint
/// are hit exactly.
pub fn dense_grid(space: &StateSpace, n: usize) -> Vec<f64> {
    let mut pts = space.probe_grid(n / 2);
    let w = 10.0 * (1.0 + space.x0.abs());
    let a = space.l.max(space.x0 - w);
    let b = space.r.min(space.x0 + w);
    let cells = (n - n / 2).next_power_of_two();
    for k in 1..cells {
        let x = a + (b - a) * (k as f64 / cells as f64);
        if space.contains(x) {
            pts.push(x);
        }
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

pub fn reduce_by_d(p: &Problem, candidates: &[f64], tol: &Tolerances) -> ReducedProblem {
    let g = |x: f64| p.f_over_sigma2(x);
    let scan: NonIntegrabilityScan = nonintegrability_set(&g, &p.space, candidates, tol);
    reduction_from_scan(&p.space, scan)
}

fn reduction_from_scan(space: &StateSpace, scan: NonIntegrabilityScan) -> ReducedProblem {
    let x0 = space.x0;
    let x0_in_d = scan.failing.contains(&x0);
    let alpha = scan.failing.iter().copied().filter(|&d| d < x0).fold(space.l, f64::max);
    let beta = scan.failing.iter().copied().filter(|&d| d > x0).fold(space.r, f64::min);
    let blocking_points: Vec<f64> = if x0_in_d {
        Vec::new()
    } else {
        scan.indeterminate.iter().copied().filter(|&x| alpha < x && x < beta).collect()
    };
    let reduced = if x0_in_d { None } else { StateSpace::new(alpha, beta, x0).ok() };
    ReducedProblem {
        d_points: scan.failing,
        indeterminate_points: scan.indeterminate,
        candidates_tested: scan.tested,
        alpha,
        beta,
        space: reduced,
        x0_in_d,
        blocking_points,
    }
}

/// Outcome of the Lebesgue-positivity probe for `f`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PositivityProbe {
    pub points: usize,
    pub positive_points: usize,
    pub first_positive: Option<f64>,
    pub f_ae_zero: bool,
}

/// Verdict on the recurrent event: `Zero` if `f` vanishes Lebesgue-a.e. on
/// the interval, otherwise `Infinite`.
pub fn recurrent_verdict(p: &Problem) -> (EventVerdict, PositivityProbe) {
    let grid = dense_grid(&p.space, POSITIVITY_PROBES);
    let positive: Vec<f64> = grid.iter().copied().filter(|&x| p.f.eval(x) > 0.0).collect();
    let probe = PositivityProbe {
        points: grid.len(),
        positive_points: positive.len(),
        first_positive: positive.first().copied(),
        f_ae_zero: p.f_ae_zero,
    };
    let v = if p.f_ae_zero || positive.is_empty() { EventVerdict::Zero } else { EventVerdict::Infinite };
    (v, probe)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EndpointOutcome {
    pub endpoint: Endpoint,
    pub verdict: EventVerdict,
    pub integrand: Option<ImproperVerdict>,
}

/// Verdict on `{Y_t → e}`: `EventNull` when `s(e)` is infinite, otherwise
/// finite iff `|s(e) − s| f / (ρσ²)` is integrable at `e`.
pub fn endpoint_verdict(
    p: &Problem,
    sf: &ScaleFunction,
    endpoint: Endpoint,
    tol: &Tolerances,
) -> EndpointOutcome {
    let lim = sf.limit(endpoint);
    let verdict = match lim.verdict.kind {
        VerdictKind::Infinite => EventVerdict::EventNull,
        VerdictKind::Indeterminate { .. } => EventVerdict::Inconclusive,
        VerdictKind::Finite { .. } => {
            let g = |x: f64| {
                let fx = p.f.eval(x);
                if fx == 0.0 {
                    return 0.0;
                }
                scale_gap(sf, endpoint, x) * fx / (sf.rho(x) * sigma2(&p.sigma, x))
            };
            let v = classify_improper(&g, p.space.endpoint(endpoint), quad_side(endpoint), sf.c(), tol);
            let verdict = match v.decided() {
                Some(true) => EventVerdict::Finite,
                Some(false) => EventVerdict::Infinite,
                None => EventVerdict::Inconclusive,
            };
            return EndpointOutcome { endpoint, verdict, integrand: Some(v) };
        }
    };
    EndpointOutcome { endpoint, verdict, integrand: None }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BrownianCase {
    pub verdict: EventVerdict,
    /// `f` passed the local integrability scan on `(−∞, r)`.
    pub locally_integrable: Option<bool>,
    pub integrand: ImproperVerdict,
}

/// Brownian motion from `x0` stopped at `r > x0`: `∫_0^{τ_r} f(B_u) du` is
/// finite iff `(r − x) f(x)` is integrable at `r−`.
pub fn brownian_case_verdict(f: &Expr, x0: f64, r: f64, tol: &Tolerances) -> BrownianCase {
    let space = StateSpace::new(f64::NEG_INFINITY, r, x0).expect("x0 < r");
    let scan = nonintegrability_set(&|x: f64| f.eval(x), &space, &space.probe_grid(64), tol);
    let locally_integrable = if !scan.failing.is_empty() {
        Some(false)
    } else if !scan.indeterminate.is_empty() {
        None
    } else {
        Some(true)
    };
    let (mut verdict, integrand) =
        brownian_level_verdict(&|x: f64| f.eval(x), r, Endpoint::Right, x0, tol);
    if locally_integrable != Some(true) {
        verdict = EventVerdict::Inconclusive;
    }
    BrownianCase { verdict, locally_integrable, integrand }
}

/// Brownian form for an arbitrary integrand `g` and level: classifies
/// `|level − x| g(x)` at the level from the given side, starting at `inner`.
pub fn brownian_level_verdict<G: Fn(f64) -> f64 + ?Sized>(
    g: &G,
    level: f64,
    endpoint: Endpoint,
    inner: f64,
    tol: &Tolerances,
) -> (EventVerdict, ImproperVerdict) {
    let h = |x: f64| {
        let gx = g(x);
        if gx == 0.0 {
            0.0
        } else {
            (level - x).abs() * gx
        }
    };
    let v = classify_improper(&h, level, quad_side(endpoint), inner, tol);
    let verdict = match v.decided() {
        Some(true) => EventVerdict::Finite,
        Some(false) => EventVerdict::Infinite,
        None => EventVerdict::Inconclusive,
    };
    (verdict, v)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Status {
    Conclusive,
    Inconclusive { blocking: Vec<String> },
}

/// Pathwise structure around `η_D`: these hold for every problem.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HittingDStructure {
    pub finite_before_eta_d: &'static str,
    pub infinite_after_eta_d: &'static str,
    pub reduced: ReducedProblem,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Supporting {
    pub scale_limits: Option<BoundaryLimits>,
    pub endpoint_left: Option<EndpointOutcome>,
    pub endpoint_right: Option<EndpointOutcome>,
    pub positivity: Option<PositivityProbe>,
    pub d_scan_candidates: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub reference_point: f64,
    pub check_level: CheckLevel,
    pub hitting_d: HittingDStructure,
    pub recurrence: Option<RecurrenceClass>,
    /// On the recurrent event; present iff the reduced problem is recurrent.
    pub on_event_a: Option<EventVerdict>,
    pub on_limit_r: EventVerdict,
    pub on_limit_l: EventVerdict,
    pub supporting: Supporting,
    pub status: Status,
}

impl ConvergenceReport {
    pub fn is_conclusive(&self) -> bool {
        matches!(self.status, Status::Conclusive)
    }

    /// Verdict for the event `{Y → endpoint}`.
    pub fn on_limit(&self, endpoint: Endpoint) -> EventVerdict {
        match endpoint {
            Endpoint::Left => self.on_limit_l,
            Endpoint::Right => self.on_limit_r,
        }
    }
}

/// Full classification with the scale function anchored at `x0`.
pub fn full_verdict(vp: &ValidatedProblem, tol: &Tolerances) -> ConvergenceReport {
    full_verdict_with_reference(vp, None, tol).expect("x0 is inside the reduced interval")
}

/// Full classification with an explicit reference point for the scale
/// function (`None` means `x0`).
pub fn full_verdict_with_reference(
    vp: &ValidatedProblem,
    c: Option<f64>,
    tol: &Tolerances,
) -> Result<ConvergenceReport, ClassifyError> {
    let p = vp.problem();
    let candidates = default_candidates(p, vp.probes());
    let reduced = reduce_by_d(p, &candidates, tol);
    let n_candidates = reduced.candidates_tested.len();
    let mut blocking: Vec<String> = Vec::new();
    let mut supporting = Supporting {
        scale_limits: None,
        endpoint_left: None,
        endpoint_right: None,
        positivity: None,
        d_scan_candidates: n_candidates,
    };
    let structure = |reduced: ReducedProblem| HittingDStructure {
        finite_before_eta_d: "the functional is finite for every t < eta_D",
        infinite_after_eta_d: "the functional is infinite for every t in (eta_D, zeta]",
        reduced,
    };

    if reduced.x0_in_d {
        return Ok(ConvergenceReport {
            reference_point: c.unwrap_or(p.space.x0),
            check_level: vp.check_level(),
            hitting_d: structure(reduced),
            recurrence: None,
            on_event_a: None,
            on_limit_r: EventVerdict::Zero,
            on_limit_l: EventVerdict::Zero,
            supporting,
            status: Status::Conclusive,
        });
    }
    if reduced.is_blocked() {
        blocking.extend(reduced.blocking_points.iter().map(|x| format!("local_integrability_at({x})")));
    }
    let space = reduced.space.expect("x0 not in D");
    let rp = p.restricted_to(space);
    let c = c.unwrap_or(space.x0);
    if !space.contains(c) {
        return Err(ClassifyError::ReferenceOutside(c));
    }
    let sf = ScaleFunction::with_reference(&rp, c, *tol).expect("c checked");
    let limits = sf.limits();
    for lim in [&limits.s_l, &limits.s_r] {
        if lim.is_indeterminate() {
            blocking.push(format!("scale_limit_{}", lim.endpoint.label()));
        }
    }
    let recurrence = classify_recurrence(&rp, &sf, tol);

    let (on_event_a, on_limit_l, on_limit_r) = match recurrence {
        RecurrenceClass::RecurrentA => {
            let (v, probe) = recurrent_verdict(&rp);
            supporting.positivity = Some(probe);
            (Some(v), EventVerdict::EventNull, EventVerdict::EventNull)
        }
        _ => {
            let mut verdicts = [EventVerdict::Inconclusive; 2];
            for (i, side) in [Endpoint::Left, Endpoint::Right].into_iter().enumerate() {
                let out = endpoint_verdict(&rp, &sf, side, tol);
                verdicts[i] = out.verdict;
                if out.verdict == EventVerdict::Inconclusive && !limit_blocks(sf.limit(side)) {
                    blocking.push(format!("endpoint_integrand_{}", side.label()));
                }
                match side {
                    Endpoint::Left => supporting.endpoint_left = Some(out),
                    Endpoint::Right => supporting.endpoint_right = Some(out),
                }
            }
            (None, verdicts[0], verdicts[1])
        }
    };
    supporting.scale_limits = Some(limits);

    let status = if blocking.is_empty() { Status::Conclusive } else { Status::Inconclusive { blocking } };
    let (on_event_a, on_limit_l, on_limit_r) = if matches!(status, Status::Conclusive) {
        (on_event_a, on_limit_l, on_limit_r)
    } else {
        // Never let a blocked reduction pass as a verdict.
        let demote = |v: EventVerdict| if reduced.is_blocked() { EventVerdict::Inconclusive } else { v };
        (on_event_a.map(demote), demote(on_limit_l), demote(on_limit_r))
    };
    Ok(ConvergenceReport {
        reference_point: c,
        check_level: vp.check_level(),
        hitting_d: structure(reduced),
        recurrence: Some(recurrence),
        on_event_a,
        on_limit_r,
        on_limit_l,
        supporting,
        status,
    })
}

fn limit_blocks(lim: &ScaleLimit) -> bool {
    lim.is_indeterminate()
}

/// Coefficients of `Ỹ = s(Y)`, a driftless diffusion on `(s(l), s(r))`
/// with `σ̃ = (ρσ)∘s⁻¹` and `f̃ = f∘s⁻¹`.
pub struct TransformedProblem<'a> {
    pub s_l: f64,
    pub s_r: f64,
    problem: &'a Problem,
    sf: &'a ScaleFunction,
}

pub fn transform_problem<'a>(p: &'a Problem, sf: &'a ScaleFunction) -> TransformedProblem<'a> {
    TransformedProblem {
        s_l: sf.limit(Endpoint::Left).value,
        s_r: sf.limit(Endpoint::Right).value,
        problem: p,
        sf,
    }
}

impl TransformedProblem<'_> {
    /// NaN outside the range of `s` or when inversion fails.
    pub fn s_inverse(&self, u: f64) -> f64 {
        self.sf.s_inverse(u).unwrap_or(f64::NAN)
    }

    pub fn sigma_tilde(&self, u: f64) -> f64 {
        let x = self.s_inverse(u);
        (self.sf.rho(x) * self.problem.sigma.eval(x)).abs()
    }

    pub fn f_tilde(&self, u: f64) -> f64 {
        self.problem.f.eval(self.s_inverse(u))
    }

    /// `f̃/σ̃²`: the integrand of the functional after the time change that
    /// turns `Ỹ` into a Brownian motion.
    pub fn brownian_integrand(&self, u: f64) -> f64 {
        let fx = self.f_tilde(u);
        if fx == 0.0 {
            return 0.0;
        }
        let st = self.sigma_tilde(u);
        fx / (st * st)
    }

    /// Range `(s(l), s(r))` of the scale function.
    pub fn range(&self) -> (f64, f64) {
        (self.s_l, self.s_r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffspec::{parse_expr, validate_problem};

    fn problem(l: f64, r: f64, x0: f64, mu: &str, sigma: &str, f: &str) -> Problem {
        Problem::new(
            StateSpace::new(l, r, x0).unwrap(),
            parse_expr(mu).unwrap(),
            parse_expr(sigma).unwrap(),
            parse_expr(f).unwrap(),
        )
    }

    fn report(p: Problem) -> ConvergenceReport {
        let vp = validate_problem(p, 64).unwrap();
        full_verdict(&vp, &Tolerances::default())
    }

    const INF: f64 = f64::INFINITY;

    #[test]
    fn feller_examples() {
        let t = Tolerances::default();
        let bm01 = problem(0.0, 1.0, 0.5, "0", "1", "1");
        let sf = ScaleFunction::new(&bm01, t);
        for side in [Endpoint::Left, Endpoint::Right] {
            let b = feller_test(&bm01, &sf, side, &t);
            assert_eq!(b.attracted, Some(true));
            assert_eq!(b.explosive, Some(Explosion::Explosive));
        }
        let bes = problem(0.0, INF, 1.0, "1/x", "1", "1");
        let sf = ScaleFunction::new(&bes, t);
        let b = feller_test(&bes, &sf, Endpoint::Right, &t);
        assert_eq!((b.attracted, b.explosive), (Some(true), Some(Explosion::NonExplosive)));
        let b = feller_test(&bes, &sf, Endpoint::Left, &t);
        assert_eq!((b.attracted, b.explosive), (Some(false), None));
        let bm = problem(-INF, INF, 0.0, "0", "1", "1");
        let sf = ScaleFunction::new(&bm, t);
        assert_eq!(classify_recurrence(&bm, &sf, &t), RecurrenceClass::RecurrentA);
    }

    #[test]
    fn reduction_examples() {
        let t = Tolerances::default();
        let p = problem(0.0, 4.0, 1.0, "0", "1", "1/abs(x-2)").with_singularities(vec![2.0]);
        let r = reduce_by_d(&p, &[1.0, 2.0, 3.0], &t);
        assert_eq!((r.d_points.clone(), r.alpha, r.beta), (vec![2.0], 0.0, 2.0));
        let p = problem(0.0, 4.0, 2.0, "0", "1", "1/abs(x-2)");
        let r = reduce_by_d(&p, &[1.0, 2.0, 3.0], &t);
        assert!(r.x0_in_d && r.space.is_none());
        let p = problem(0.0, 4.0, 1.0, "0", "1", "exp(-x)");
        let r = reduce_by_d(&p, &p.space.probe_grid(32), &t);
        assert!(r.d_points.is_empty());
        assert_eq!((r.alpha, r.beta), (0.0, 4.0));
    }

    #[test]
    fn dense_scan_finds_unannounced_pole() {
        let p = problem(0.0, 4.0, 1.0, "0", "1", "1/abs(x-2)");
        let c = default_candidates(&p, &p.space.probe_grid(16));
        assert!(c.contains(&2.0));
    }

    #[test]
    fn recurrent_examples() {
        let r = report(problem(-INF, INF, 0.0, "0", "1", "indicator(0, 1)"));
        assert_eq!(r.on_event_a, Some(EventVerdict::Infinite));
        assert!(r.is_conclusive());
        let r = report(problem(-INF, INF, 0.0, "0", "1", "0"));
        assert_eq!(r.on_event_a, Some(EventVerdict::Zero));
        let r = report(problem(-INF, INF, 0.0, "0", "1", "exp(-x^2)"));
        assert_eq!(r.on_event_a, Some(EventVerdict::Infinite));
    }

    #[test]
    fn transient_examples() {
        let r = report(problem(0.0, INF, 1.0, "1/x", "1", "x^(-3)"));
        assert_eq!((r.on_limit_r, r.on_limit_l), (EventVerdict::Finite, EventVerdict::EventNull));
        assert!(r.on_event_a.is_none());
        let r = report(problem(0.0, INF, 1.0, "1/x", "1", "x^(-1)"));
        assert_eq!(r.on_limit_r, EventVerdict::Infinite);
        let r = report(problem(0.0, INF, 1.0, "0", "x", "1"));
        assert_eq!((r.on_limit_l, r.on_limit_r), (EventVerdict::Infinite, EventVerdict::EventNull));
        let r = report(problem(0.0, INF, 1.0, "0", "x", "x^0.5"));
        assert_eq!(r.on_limit_l, EventVerdict::Finite);
    }

    #[test]
    fn start_inside_d_gives_zero() {
        let p = problem(0.0, 4.0, 2.0, "0", "1", "1/abs(x-2)").with_singularities(vec![2.0]);
        let r = report(p);
        assert!(r.hitting_d.reduced.x0_in_d);
        assert_eq!(r.on_limit_r, EventVerdict::Zero);
    }

    #[test]
    fn brownian_case_examples() {
        let t = Tolerances::default();
        let f = parse_expr("(1 - x)^(-1.5)").unwrap();
        assert_eq!(brownian_case_verdict(&f, 0.0, 1.0, &t).verdict, EventVerdict::Finite);
        let f = parse_expr("(1 - x)^(-2.5)").unwrap();
        assert_eq!(brownian_case_verdict(&f, 0.0, 1.0, &t).verdict, EventVerdict::Infinite);
        let f = parse_expr("exp(-x^2)").unwrap();
        assert_eq!(brownian_case_verdict(&f, 0.0, 1.0, &t).verdict, EventVerdict::Finite);
    }

    #[test]
    fn transform_of_bessel_type() {
        let p = problem(0.0, INF, 1.0, "1/x", "1", "1");
        let sf = ScaleFunction::new(&p, Tolerances::default());
        let tp = transform_problem(&p, &sf);
        for u in [-3.0, -0.5, 0.25, 0.5, 0.9] {
            let exact = (1.0 - u) * (1.0 - u);
            assert!((tp.sigma_tilde(u) - exact).abs() < 1e-8 * exact, "u={u}");
            assert!((tp.s_inverse(u) - 1.0 / (1.0 - u)).abs() < 1e-8 / (1.0 - u));
        }
    }

    #[test]
    fn transform_of_brownian_motion_is_identity() {
        let p = problem(-INF, INF, 0.5, "0", "1", "1");
        let sf = ScaleFunction::new(&p, Tolerances::default());
        let tp = transform_problem(&p, &sf);
        assert_eq!(tp.s_inverse(1.0), 1.5);
        assert_eq!(tp.sigma_tilde(3.0), 1.0);
    }
}
