//! W/NOON event times in the three-cavity array and entangled-state transfer
//! along a four-cavity array.
//!
//! For `k` photons the tracked probabilities are `p(|k00⟩)`, `p(|0k0⟩)` and
//! `p(|00k⟩)`. A W event is a time where all three agree and are nonzero.
//! A NOON event is a time where the middle probability reaches a local
//! minimum while the (equal) edge probabilities peak, with the middle
//! strictly below the edges. The middle probability vanishes at a NOON event
//! only for some initial states; [`DetectedEvent::vanishing`] records whether
//! it did.
//!
//! Both searches scan one revival period on a uniform grid, bracket
//! candidates, and refine them by bisection either on the probability
//! difference (transversal crossings) or on its time derivative (tangential
//! touches and minima). Half a revival period mirrors the array, so for
//! inputs whose tracked probabilities are mirror symmetric the pattern
//! repeats after `T/2`; events are then reported modulo `T/2`.

use crate::error::{invalid, CcaError, Result};
use crate::evolution::StateEvolution;
use crate::fock::OccupationState;
use crate::spectral::{ModelParams, Period, SpectralData, DEFAULT_PERIOD_TOL};
use crate::states::{EntangledPair, Placement, PureState};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    W,
    Noon,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::W => "W",
            EventKind::Noon => "NOON",
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct DetectionConfig {
    /// Grid points per revival period for the coarse scan.
    pub scan_points: usize,
    /// Bisection stops once the bracket is narrower than this.
    pub time_tol: f64,
    /// Equality threshold, relative to the largest tracked probability.
    pub equality_tol: f64,
    /// Middle-site threshold for flagging a NOON event as exact.
    pub vanishing_tol: f64,
}

impl Default for DetectionConfig {
    fn default() -> Self {
        DetectionConfig {
            scan_points: 4001,
            time_tol: 1e-12,
            equality_tol: 1e-8,
            vanishing_tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectedEvent {
    pub time: f64,
    /// Common probability for W, edge probability for NOON.
    pub probability: f64,
    /// Middle-site probability at the event.
    pub middle_probability: f64,
    /// Equality mismatch relative to the probability scale.
    pub residual: f64,
    /// Event at `t = 0` (mod the period), i.e. the initial state itself.
    pub initial_coincidence: bool,
    /// Middle-site probability below the vanishing threshold.
    pub vanishing: bool,
}

#[derive(Debug, Clone)]
pub struct DetectionReport {
    pub kind: EventKind,
    pub photons: u32,
    /// Repeat time of the tracked probabilities; events recur at `time + k·period`.
    pub period: f64,
    /// Full revival period of the propagator.
    pub revival_period: f64,
    /// Sorted by time, all within `[0, period)`.
    pub events: Vec<DetectedEvent>,
}

impl DetectionReport {
    pub fn is_none(&self) -> bool {
        self.events.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        self.events.iter().map(|e| e.time).collect()
    }
}

struct Tracker {
    evo: StateEvolution,
    labels: [OccupationState; 3],
    period: f64,
    // Repeat time of the tracked probabilities: the period or half of it.
    window: f64,
    step: f64,
    // p[i] at t = (i - 1) * step for i in 0..=points+1 (one guard point each side).
    samples: Vec<[f64; 3]>,
    scale: f64,
}

impl Tracker {
    fn new(
        state: &PureState,
        params: &ModelParams,
        photons: u32,
        cfg: &DetectionConfig,
    ) -> Result<Self> {
        if params.n() != 3 {
            return invalid(format!(
                "W/NOON detection needs 3 cavities, got {}",
                params.n()
            ));
        }
        if photons == 0 {
            return invalid("W/NOON detection needs at least one photon");
        }
        if cfg.scan_points < 3 || !(cfg.time_tol > 0.0 && cfg.equality_tol > 0.0) {
            return invalid("detection needs ≥ 3 scan points and positive tolerances");
        }
        let period = match SpectralData::new(*params).evolution_period(DEFAULT_PERIOD_TOL)? {
            Period::Periodic { period, .. } => period,
            other => {
                return Err(CcaError::PeriodUnavailable(format!(
                    "spectrum is {other:?}"
                )));
            }
        };
        let evo = StateEvolution::new(state, params)?;
        let n = params.cavities();
        let labels = [
            OccupationState::single_site(n, 0, photons)?,
            OccupationState::single_site(n, 1, photons)?,
            OccupationState::single_site(n, 2, photons)?,
        ];
        let intervals = cfg.scan_points - 1;
        let step = period / intervals as f64;
        let mut tracker = Tracker {
            evo,
            labels,
            period,
            window: period,
            step,
            samples: Vec::with_capacity(intervals + 2),
            scale: 0.0,
        };
        for i in 0..=intervals + 1 {
            let t = (i as f64 - 1.0) * step;
            let p = tracker.probs(t);
            tracker.scale = p.iter().copied().fold(tracker.scale, f64::max);
            tracker.samples.push(p);
        }
        if tracker.scale > 0.0 {
            let half = 0.5 * period;
            let repeats = tracker.interior().all(|i| {
                let later = tracker.probs(tracker.time(i) + half);
                let p = &tracker.samples[i];
                (0..3).all(|j| (p[j] - later[j]).abs() <= cfg.equality_tol * tracker.scale)
            });
            if repeats {
                tracker.window = half;
            }
        }
        Ok(tracker)
    }

    fn probs(&self, t: f64) -> [f64; 3] {
        [0, 1, 2].map(|i| self.evo.probability(&self.labels[i], t))
    }

    fn derivs(&self, t: f64) -> [f64; 3] {
        [0, 1, 2].map(|i| self.evo.probability_derivative(&self.labels[i], t))
    }

    fn time(&self, i: usize) -> f64 {
        (i as f64 - 1.0) * self.step
    }

    /// Indices of grid points inside `[0, period)`.
    fn interior(&self) -> std::ops::Range<usize> {
        1..self.samples.len() - 1
    }

    fn equality_residual(&self, p: &[f64; 3]) -> f64 {
        let d = (p[0] - p[1])
            .abs()
            .max((p[1] - p[2]).abs())
            .max((p[0] - p[2]).abs());
        d / self.scale
    }

    fn fold(&self, t: f64) -> f64 {
        let t = t.rem_euclid(self.window);
        if self.window - t < FOLD_EPS || t < FOLD_EPS {
            0.0
        } else {
            t
        }
    }
}

const FOLD_EPS: f64 = 1e-6;

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let mut f_lo = f(lo);
    if f_lo == 0.0 {
        return lo;
    }
    for _ in 0..200 {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return mid;
        }
        if (f_mid < 0.0) == (f_lo < 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn is_local_min(prev: f64, cur: f64, next: f64) -> bool {
    (cur <= prev && cur < next) || (cur < prev && cur <= next)
}

fn push_unique(events: &mut Vec<DetectedEvent>, ev: DetectedEvent) {
    const SAME: f64 = 1e-6;
    if let Some(old) = events.iter_mut().find(|e| (e.time - ev.time).abs() < SAME) {
        if ev.residual < old.residual {
            *old = ev;
        }
    } else {
        events.push(ev);
    }
}

fn finish(
    kind: EventKind,
    photons: u32,
    tracker: &Tracker,
    mut events: Vec<DetectedEvent>,
) -> DetectionReport {
    events.sort_by(|a, b| a.time.total_cmp(&b.time));
    DetectionReport {
        kind,
        photons,
        period: tracker.window,
        revival_period: tracker.period,
        events,
    }
}

/// Times within one period where `p(|k00⟩) = p(|0k0⟩) = p(|00k⟩) > 0`.
pub fn find_w_times(
    state: &PureState,
    params: &ModelParams,
    photons: u32,
    cfg: &DetectionConfig,
) -> Result<DetectionReport> {
    let tr = Tracker::new(state, params, photons, cfg)?;
    let mut events = Vec::new();
    if tr.scale == 0.0 {
        return Ok(finish(EventKind::W, photons, &tr, events));
    }

    let diff = |t: f64| {
        let p = tr.probs(t);
        p[0] - p[1]
    };
    let diff_rate = |t: f64| {
        let d = tr.derivs(t);
        d[0] - d[1]
    };
    let d: Vec<f64> = tr.samples.iter().map(|p| p[0] - p[1]).collect();

    let mut candidates = Vec::new();
    for i in tr.interior() {
        let (lo, hi) = (tr.time(i), tr.time(i + 1));
        if d[i] == 0.0 {
            candidates.push(lo);
        } else if d[i] * d[i + 1] < 0.0 {
            candidates.push(bisect(diff, lo, hi, cfg.time_tol));
        }
        // Touching zero without crossing: look for the extremum of the difference.
        let crosses = d[i - 1] * d[i] <= 0.0 || d[i] * d[i + 1] <= 0.0;
        if !crosses && is_local_min(d[i - 1].abs(), d[i].abs(), d[i + 1].abs()) {
            let (a, b) = (tr.time(i - 1), tr.time(i + 1));
            if diff_rate(a) * diff_rate(b) < 0.0 {
                candidates.push(bisect(diff_rate, a, b, cfg.time_tol));
            }
        }
    }

    for t in candidates {
        let p = tr.probs(t);
        let residual = tr.equality_residual(&p);
        let smallest = p.iter().copied().fold(f64::INFINITY, f64::min);
        if residual < cfg.equality_tol && smallest / tr.scale > cfg.equality_tol {
            let time = tr.fold(t);
            push_unique(
                &mut events,
                DetectedEvent {
                    time,
                    probability: (p[0] + p[1] + p[2]) / 3.0,
                    middle_probability: p[1],
                    residual,
                    initial_coincidence: time == 0.0,
                    vanishing: false,
                },
            );
        }
    }
    Ok(finish(EventKind::W, photons, &tr, events))
}

/// Times within one period where the middle-site probability has a local
/// minimum below the equal edge probabilities, which peak there.
pub fn find_noon_times(
    state: &PureState,
    params: &ModelParams,
    photons: u32,
    cfg: &DetectionConfig,
) -> Result<DetectionReport> {
    let tr = Tracker::new(state, params, photons, cfg)?;
    let mut events = Vec::new();
    if tr.scale == 0.0 {
        return Ok(finish(EventKind::Noon, photons, &tr, events));
    }

    let middle_rate = |t: f64| tr.derivs(t)[1];
    for i in tr.interior() {
        let (prev, cur, next) = (tr.samples[i - 1][1], tr.samples[i][1], tr.samples[i + 1][1]);
        if !is_local_min(prev, cur, next) {
            continue;
        }
        let (a, b) = (tr.time(i - 1), tr.time(i + 1));
        let t = if middle_rate(a) < 0.0 && middle_rate(b) > 0.0 {
            bisect(middle_rate, a, b, cfg.time_tol)
        } else {
            tr.time(i)
        };

        let p = tr.probs(t);
        let edge = 0.5 * (p[0] + p[2]);
        let residual = (p[0] - p[2]).abs() / tr.scale;
        let before = tr.probs(t - tr.step);
        let after = tr.probs(t + tr.step);
        let edges_peak = [0, 2]
            .iter()
            .all(|&j| p[j] >= before[j] && p[j] >= after[j]);
        let middle_below = p[1] < edge * (1.0 - cfg.equality_tol);
        if residual < cfg.equality_tol
            && edge / tr.scale > cfg.equality_tol
            && edges_peak
            && middle_below
        {
            let time = tr.fold(t);
            push_unique(
                &mut events,
                DetectedEvent {
                    time,
                    probability: edge,
                    middle_probability: p[1],
                    residual,
                    initial_coincidence: time == 0.0,
                    vanishing: p[1] / tr.scale < cfg.vanishing_tol,
                },
            );
        }
    }
    Ok(finish(EventKind::Noon, photons, &tr, events))
}

/// Transfer probability of the two-site pair across a four-cavity array at
/// ω = 1, J = 0.5, as a function of time and the pair's concurrence:
/// `(1/5) sin²(t/4) (5C² cos²(√5t/4) + 4 sin²(√5t/4))`.
pub fn transfer_probability_closed_form(t: f64, concurrence: f64) -> f64 {
    let s = (t / 4.0).sin().powi(2);
    let x = 5f64.sqrt() * t / 4.0;
    0.2 * s * (5.0 * concurrence * concurrence * x.cos().powi(2) + 4.0 * x.sin().powi(2))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferResult {
    pub t: f64,
    pub concurrence: f64,
    pub probability: f64,
}

/// `|⟨Φ|ψ(t)⟩|²` with `ψ(0) = sinθ|1000⟩ + cosθ|0100⟩` and
/// `Φ = sinθ|0010⟩ + cosθ|0001⟩`, by direct sector evolution.
pub fn transfer_probability_numeric(
    theta: f64,
    params: &ModelParams,
    t: f64,
) -> Result<TransferResult> {
    if params.n() != 4 {
        return invalid(format!(
            "pair transfer is defined for 4 cavities, got {}",
            params.n()
        ));
    }
    let pair = EntangledPair::new(theta)?;
    let n = params.cavities();
    let start = PureState::entangled_pair(n, pair, Placement::FirstTwo)?;
    let target = PureState::entangled_pair(n, pair, Placement::LastTwo)?;
    let evolved = StateEvolution::new(&start, params)?.at(t);
    let overlap: num_complex::Complex64 = target
        .sector(1)
        .expect("pair lives in the single-excitation sector")
        .amplitudes()
        .iter()
        .zip(
            evolved
                .sector(1)
                .expect("sector preserved")
                .amplitudes()
                .iter(),
        )
        .map(|(a, b)| a.conj() * b)
        .sum();
    Ok(TransferResult {
        t,
        concurrence: pair.concurrence(),
        probability: overlap.norm_sqr(),
    })
}

/// Scan spacing of [`peak_transfer_search`].
pub const PEAK_SCAN_STEP: f64 = 0.01;

/// Largest closed-form transfer probability for `t ∈ [0, horizon]`.
/// Ties go to the earliest time.
pub fn peak_transfer_search(concurrence: f64, horizon: f64) -> Result<TransferResult> {
    if !(horizon.is_finite() && horizon > 0.0) {
        return invalid(format!("search horizon must be positive, got {horizon}"));
    }
    if !(0.0..=1.0).contains(&concurrence) {
        return invalid(format!("concurrence must lie in [0, 1], got {concurrence}"));
    }
    let f = |t: f64| transfer_probability_closed_form(t, concurrence);
    let intervals = (horizon / PEAK_SCAN_STEP).ceil().max(1.0) as usize;
    let step = horizon / intervals as f64;
    let (mut best_i, mut best) = (0usize, f(0.0));
    for i in 1..=intervals {
        let v = f(i as f64 * step);
        if v > best {
            best = v;
            best_i = i;
        }
    }
    let lo = (best_i as f64 - 1.0).max(0.0) * step;
    let hi = ((best_i + 1) as f64 * step).min(horizon);
    let t = golden_max(f, lo, hi, 1e-12);
    let (t, probability) = if f(t) >= best {
        (t, f(t))
    } else {
        (best_i as f64 * step, best)
    };
    Ok(TransferResult {
        t,
        concurrence,
        probability,
    })
}

fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if b - a <= tol {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Time at which the closed form evaluates the C-dependence slice.
pub const PEAK_TRANSFER_TIME: f64 = 106.7957;
