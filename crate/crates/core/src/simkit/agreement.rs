//! Monte Carlo check of a classifier report: simulate paths, sort each into
//! the event it realizes and compare the dyadic trend of its partial
//! integrals with the verdict for that event.

use super::diffusion::simulate_diffusion_with_growth;
use super::functional::{cumulative_integral, functional_trajectory, DichotomyDiagnostic, Trend, TrendRule};
use super::rng::{derive_seed, par_indexed, stream};
use super::stats::MCSummary;
use super::{check_positive, Exit, PathSample, SimError};
use crate::classify::{ConvergenceReport, EventVerdict, Explosion, RecurrenceClass};
use crate::coeffspec::{Endpoint, Problem};
use crate::quad::Tolerances;
use crate::scale::ScaleFunction;
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimParams {
    pub dt: f64,
    pub horizon: f64,
    pub n_paths: usize,
    pub master_seed: u64,
    /// Largest step the scheme may grow to away from the endpoints; `None`
    /// keeps every step at `dt` or below.
    pub max_step: Option<f64>,
    pub dyadic_count: usize,
    pub trend: TrendRule,
    /// Minimum agreement fraction per event.
    pub agreement_threshold: f64,
}

impl Default for SimParams {
    fn default() -> Self {
        SimParams {
            dt: 1e-3,
            horizon: 100.0,
            n_paths: 500,
            master_seed: 0,
            max_step: None,
            dyadic_count: 28,
            trend: TrendRule::default(),
            agreement_threshold: 0.9,
        }
    }
}

impl SimParams {
    fn validate(&self) -> Result<(), SimError> {
        check_positive("dt", self.dt)?;
        check_positive("horizon", self.horizon)?;
        if let Some(m) = self.max_step {
            check_positive("max_step", m)?;
            if m < self.dt {
                return Err(SimError::InvalidParameter("max_step must be at least dt".into()));
            }
        }
        if self.n_paths == 0 {
            return Err(SimError::InvalidParameter("n_paths must be positive".into()));
        }
        if !(self.agreement_threshold > 0.0 && self.agreement_threshold < 1.0) {
            return Err(SimError::InvalidParameter("agreement_threshold must lie in (0, 1)".into()));
        }
        Ok(())
    }

    /// Smallest bucket size for which the threshold can be resolved.
    pub fn min_bucket(&self) -> usize {
        let resolve = (1.0 / (1.0 - self.agreement_threshold)).ceil() as usize;
        resolve.max(30)
    }
}

/// The event a path is attributed to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SimulatedEvent {
    /// `{Y_t → l}`.
    LimitL,
    /// `{Y_t → r}`.
    LimitR,
    /// Oscillation between the ends.
    EventA,
}

impl SimulatedEvent {
    fn toward(e: Endpoint) -> Self {
        match e {
            Endpoint::Left => SimulatedEvent::LimitL,
            Endpoint::Right => SimulatedEvent::LimitR,
        }
    }

    fn verdict(self, report: &ConvergenceReport) -> EventVerdict {
        match self {
            SimulatedEvent::LimitL => report.on_limit_l,
            SimulatedEvent::LimitR => report.on_limit_r,
            SimulatedEvent::EventA => report.on_event_a.unwrap_or(EventVerdict::EventNull),
        }
    }
}

fn expected_trend(v: EventVerdict) -> Option<Trend> {
    match v {
        EventVerdict::Zero | EventVerdict::Finite => Some(Trend::Converging),
        EventVerdict::Infinite => Some(Trend::Diverging),
        EventVerdict::EventNull | EventVerdict::Inconclusive => None,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathRecord {
    pub index: usize,
    pub seed: u64,
    pub event: Option<SimulatedEvent>,
    pub exit: Option<Exit>,
    pub trend: Option<Trend>,
    pub ratio: Option<f64>,
    pub agrees: Option<bool>,
    /// Ran to the horizon while heading for an endpoint it could reach in
    /// finite time.
    pub truncated: bool,
    pub aborted: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BucketSummary {
    pub event: SimulatedEvent,
    pub verdict: EventVerdict,
    pub expected_trend: Option<Trend>,
    pub n_paths: usize,
    pub agreeing: usize,
    pub disagreeing: usize,
    pub undecided: usize,
    pub agreement: MCSummary,
    pub undecided_fraction: f64,
    pub too_few_paths: bool,
    /// Paths realized an event the report gives no usable verdict for.
    pub unsupported: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AgreementSummary {
    pub params: SimParams,
    pub x0_in_d: bool,
    pub buckets: Vec<BucketSummary>,
    pub counted_paths: usize,
    pub truncated_paths: usize,
    pub truncated_fraction: f64,
    pub aborted_paths: usize,
    pub overall_agreement: f64,
    pub overall_undecided: f64,
    pub flags: Vec<String>,
    pub passed: bool,
    pub paths: Vec<PathRecord>,
}

struct Context<'a> {
    report: &'a ConvergenceReport,
    reduced: Problem,
    sf: Option<ScaleFunction>,
    params: &'a SimParams,
}

impl<'a> Context<'a> {
    fn new(p: &Problem, report: &'a ConvergenceReport, params: &'a SimParams, tol: &Tolerances) -> Self {
        let reduced = match report.hitting_d.reduced.space {
            Some(space) => p.restricted_to(space),
            None => p.clone(),
        };
        let both_attracted = matches!(
            &report.recurrence,
            Some(RecurrenceClass::TransientMix { left, right })
                if left.attracted == Some(true) && right.attracted == Some(true)
        );
        let sf = both_attracted
            .then(|| ScaleFunction::with_reference(&reduced, report.reference_point, *tol).ok())
            .flatten();
        Context { report, reduced, sf, params }
    }

    fn explosive(&self, e: Endpoint) -> bool {
        match &self.report.recurrence {
            Some(RecurrenceClass::TransientMix { left, right } | RecurrenceClass::Undetermined { left, right }) => {
                let b = if e == Endpoint::Left { left } else { right };
                b.explosive == Some(Explosion::Explosive)
            }
            _ => false,
        }
    }

    /// Event for a path that ran to the horizon: A when recurrent, else the
    /// attracting endpoint, the nearer one in scale when both attract.
    fn horizon_event(&self, y: f64) -> Option<Endpoint> {
        let (left, right) = match &self.report.recurrence {
            Some(RecurrenceClass::TransientMix { left, right } | RecurrenceClass::Undetermined { left, right }) => {
                (left, right)
            }
            _ => return None,
        };
        match (left.attracted, right.attracted) {
            (Some(true), Some(true)) => {
                let sf = self.sf.as_ref()?;
                let gl = sf.tail(Endpoint::Left, y);
                let gr = sf.tail(Endpoint::Right, y);
                if gl.is_nan() || gr.is_nan() {
                    None
                } else if gl <= gr {
                    Some(Endpoint::Left)
                } else {
                    Some(Endpoint::Right)
                }
            }
            (Some(true), _) => Some(Endpoint::Left),
            (_, Some(true)) => Some(Endpoint::Right),
            _ => None,
        }
    }

    fn run(&self, index: usize) -> (PathRecord, Option<(PathSample, DichotomyDiagnostic)>) {
        let seed = derive_seed(self.params.master_seed, stream::DIFFUSION, index as u64);
        let mut rec = PathRecord {
            index,
            seed,
            event: None,
            exit: None,
            trend: None,
            ratio: None,
            agrees: None,
            truncated: false,
            aborted: None,
        };
        if self.report.hitting_d.reduced.x0_in_d {
            rec.agrees = Some(true);
            return (rec, None);
        }
        let path = match simulate_diffusion_with_growth(
            &self.reduced,
            self.params.dt,
            self.params.max_step.unwrap_or(self.params.dt),
            self.params.horizon,
            seed,
        ) {
            Ok(path) => path,
            Err(e) => {
                rec.aborted = Some(e.to_string());
                return (rec, None);
            }
        };
        rec.exit = Some(path.exit);
        let event = match path.exit {
            Exit::ExitAt { endpoint, .. } => Some(SimulatedEvent::toward(endpoint)),
            Exit::NoExit { .. } => match self.report.recurrence {
                Some(RecurrenceClass::RecurrentA) => Some(SimulatedEvent::EventA),
                _ => self.horizon_event(path.terminal_value()).map(|e| {
                    rec.truncated = self.explosive(e);
                    SimulatedEvent::toward(e)
                }),
            },
        };
        rec.event = event;
        let f = &self.reduced.f;
        let diag = functional_trajectory(&path, &|y: f64| f.eval(y), self.params.dyadic_count, &self.params.trend);
        rec.trend = Some(diag.trend);
        rec.ratio = diag.ratio;
        if let Some(ev) = event {
            if let Some(want) = expected_trend(ev.verdict(self.report)) {
                if diag.trend != Trend::Undecided {
                    rec.agrees = Some(diag.trend == want);
                }
            }
        }
        (rec, Some((path, diag)))
    }
}

/// Simulates `params.n_paths` paths of the reduced problem and tallies, per
/// realized event, how many trends match the report's verdict.
///
/// Paths that ran to the horizon while heading for an explosive endpoint are
/// reported as truncated and left out of the fractions, as are paths that
/// met an undefined coefficient.
pub fn verdict_agreement(
    p: &Problem,
    report: &ConvergenceReport,
    params: &SimParams,
    tol: &Tolerances,
) -> Result<AgreementSummary, SimError> {
    params.validate()?;
    let ctx = Context::new(p, report, params, tol);
    let paths: Vec<PathRecord> = par_indexed(params.n_paths, |i| ctx.run(i).0);
    Ok(summarize(report, params, paths))
}

/// A simulated path with its partial integrals at every stored time.
pub type DumpedPath = (PathSample, Vec<f64>);

/// One path of [`verdict_agreement`] with its trajectory and partial
/// integrals at every stored time, for dumping.
pub fn agreement_path(
    p: &Problem,
    report: &ConvergenceReport,
    params: &SimParams,
    tol: &Tolerances,
    index: usize,
) -> Result<(PathRecord, Option<DumpedPath>), SimError> {
    params.validate()?;
    let ctx = Context::new(p, report, params, tol);
    let (rec, run) = ctx.run(index);
    let f = &ctx.reduced.f;
    Ok((rec, run.map(|(path, _)| {
        let cum = cumulative_integral(&path, &|y: f64| f.eval(y));
        (path, cum)
    })))
}

fn summarize(report: &ConvergenceReport, params: &SimParams, paths: Vec<PathRecord>) -> AgreementSummary {
    let x0_in_d = report.hitting_d.reduced.x0_in_d;
    let min_bucket = params.min_bucket();
    let mut flags = Vec::new();
    let mut buckets = Vec::new();
    let counted = |r: &&PathRecord| r.aborted.is_none() && !r.truncated;
    for event in [SimulatedEvent::LimitL, SimulatedEvent::LimitR, SimulatedEvent::EventA] {
        let members: Vec<&PathRecord> = paths.iter().filter(counted).filter(|r| r.event == Some(event)).collect();
        if members.is_empty() {
            continue;
        }
        let verdict = event.verdict(report);
        let expected = expected_trend(verdict);
        let n = members.len();
        let agreeing = members.iter().filter(|r| r.agrees == Some(true)).count();
        let disagreeing = members.iter().filter(|r| r.agrees == Some(false)).count();
        let undecided = members.iter().filter(|r| r.trend == Some(Trend::Undecided)).count();
        let too_few = n < min_bucket;
        let unsupported = expected.is_none();
        if too_few {
            flags.push(format!("too_few_paths:{}", label(event)));
        }
        if unsupported {
            flags.push(format!("unsupported_event:{}", label(event)));
        }
        buckets.push(BucketSummary {
            event,
            verdict,
            expected_trend: expected,
            n_paths: n,
            agreeing,
            disagreeing,
            undecided,
            agreement: MCSummary::proportion(agreeing, n),
            undecided_fraction: undecided as f64 / n as f64,
            too_few_paths: too_few,
            unsupported,
        });
    }
    let aborted = paths.iter().filter(|r| r.aborted.is_some()).count();
    let truncated = paths.iter().filter(|r| r.truncated).count();
    let unassigned = paths.iter().filter(counted).filter(|r| r.event.is_none() && !x0_in_d).count();
    if aborted > 0 {
        flags.push(format!("aborted_paths:{aborted}"));
    }
    if unassigned > 0 {
        flags.push(format!("unassigned_paths:{unassigned}"));
    }
    let n_counted = paths.iter().filter(counted).count();
    let agreeing = paths.iter().filter(counted).filter(|r| r.agrees == Some(true)).count();
    let undecided = paths.iter().filter(counted).filter(|r| r.trend == Some(Trend::Undecided)).count();
    let frac = |k: usize| if n_counted == 0 { f64::NAN } else { k as f64 / n_counted as f64 };
    if n_counted == 0 {
        flags.push("no_counted_paths".into());
    }
    let passed = flags.is_empty()
        && (x0_in_d || buckets.iter().all(|b| b.agreement.estimate >= params.agreement_threshold));
    AgreementSummary {
        params: params.clone(),
        x0_in_d,
        buckets,
        counted_paths: n_counted,
        truncated_paths: truncated,
        truncated_fraction: truncated as f64 / paths.len() as f64,
        aborted_paths: aborted,
        overall_agreement: frac(agreeing),
        overall_undecided: frac(undecided),
        flags,
        passed,
        paths,
    }
}

fn label(e: SimulatedEvent) -> &'static str {
    match e {
        SimulatedEvent::LimitL => "limit_l",
        SimulatedEvent::LimitR => "limit_r",
        SimulatedEvent::EventA => "event_a",
    }
}
