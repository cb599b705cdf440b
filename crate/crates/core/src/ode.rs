//! Deterministic mass-action semantics: vector field, fixed-step RK4 under
//! piecewise-constant controls, block sums, cost functionals and the projection
//! of an original control onto the lumped network.

use thiserror::Error;

use crate::model::{Ccrn, ModelError, Partition};
use crate::reconstruct::{build_drift_match, solve_box_ls_from, BoxLsOptions};
use crate::scalar::{norm_inf, Scalar};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OdeError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("schedule: {0}")]
    Schedule(String),
    #[error("control {value} for reaction {reaction} in segment {segment} is outside [{lo}, {hi}]")]
    ControlOutOfBounds { reaction: usize, segment: usize, value: f64, lo: f64, hi: f64 },
    #[error("expected a vector of length {expected}, got {found}")]
    Dimension { expected: usize, found: usize },
    #[error("invalid step or horizon: {0}")]
    Grid(String),
    #[error("non-finite state at t = {t}")]
    Divergence { t: f64 },
    #[error("cost horizon {horizon} exceeds trajectory end {end}")]
    HorizonExceedsTrajectory { horizon: f64, end: f64 },
    #[error("drift match residual {residual} at t = {t} exceeds threshold {threshold}")]
    ProjectionFailure { t: f64, residual: f64, threshold: f64 },
}

/// Reaction data compiled for repeated vector-field evaluation.
#[derive(Clone, Debug)]
pub(crate) struct Kinetics<S> {
    /// `(species, exponent)` of every reactant.
    reactant: Vec<Vec<(usize, i32)>>,
    /// `1 / Π ρ(B)!`.
    scale: Vec<S>,
    /// Nonzero net stoichiometry `π(A) − ρ(A)`.
    net: Vec<Vec<(usize, S)>>,
    num_species: usize,
}

impl<S: Scalar> Kinetics<S> {
    pub(crate) fn new(ccrn: &Ccrn<S>) -> Self {
        let mut reactant = Vec::with_capacity(ccrn.num_reactions());
        let mut scale = Vec::with_capacity(ccrn.num_reactions());
        let mut net = Vec::with_capacity(ccrn.num_reactions());
        for r in ccrn.reactions() {
            reactant.push(r.reactant.iter().map(|(s, c)| (s, c as i32)).collect());
            let fact: S = r
                .reactant
                .iter()
                .map(|(_, c)| (1..=c).fold(S::one(), |acc, k| acc * S::from_count(u128::from(k))))
                .fold(S::one(), |acc, f| acc * f);
            scale.push(S::one() / fact);
            let mut delta: Vec<(usize, S)> = Vec::new();
            let species: std::collections::BTreeSet<usize> = r.reactant.species().chain(r.product.species()).collect();
            for s in species {
                let d = i64::from(r.product.count(s)) - i64::from(r.reactant.count(s));
                if d != 0 {
                    delta.push((s, S::lit(d as f64)));
                }
            }
            net.push(delta);
        }
        Self { reactant, scale, net, num_species: ccrn.num_species() }
    }

    pub(crate) fn num_reactions(&self) -> usize {
        self.reactant.len()
    }

    /// `Π_B v_B^{ρ(B)} / ρ(B)!` for reaction `r`.
    pub(crate) fn monomial(&self, r: usize, v: &[S]) -> S {
        self.reactant[r].iter().fold(self.scale[r], |acc, &(s, k)| acc * v[s].powi(k))
    }

    pub(crate) fn net(&self, r: usize) -> &[(usize, S)] {
        &self.net[r]
    }

    pub(crate) fn field_into(&self, v: &[S], alpha: &[S], out: &mut [S]) {
        out.iter_mut().for_each(|x| *x = S::zero());
        for r in 0..self.reactant.len() {
            let flux = alpha[r] * self.monomial(r, v);
            if flux == S::zero() {
                continue;
            }
            for &(s, d) in &self.net[r] {
                out[s] = out[s] + d * flux;
            }
        }
    }

    pub(crate) fn field(&self, v: &[S], alpha: &[S]) -> Vec<S> {
        let mut out = vec![S::zero(); self.num_species];
        self.field_into(v, alpha, &mut out);
        out
    }
}

/// Mass-action vector field `f(v, α)`.
pub fn vector_field<S: Scalar>(ccrn: &Ccrn<S>, v: &[S], alpha: &[S]) -> Result<Vec<S>, OdeError> {
    check_len(v.len(), ccrn.num_species())?;
    check_len(alpha.len(), ccrn.num_reactions())?;
    Ok(Kinetics::new(ccrn).field(v, alpha))
}

fn check_len(found: usize, expected: usize) -> Result<(), OdeError> {
    if found != expected {
        return Err(OdeError::Dimension { expected, found });
    }
    Ok(())
}

/// Piecewise-constant per-reaction control.
///
/// Segment `k` holds on `[breakpoints[k], breakpoints[k+1])`; the last segment
/// extends indefinitely.
#[derive(Clone, Debug, PartialEq)]
pub struct ControlSchedule<S> {
    breakpoints: Vec<S>,
    values: Vec<Vec<S>>,
}

impl<S: Scalar> ControlSchedule<S> {
    pub fn new(ccrn: &Ccrn<S>, breakpoints: Vec<S>, values: Vec<Vec<S>>) -> Result<Self, OdeError> {
        if breakpoints.is_empty() || breakpoints.len() != values.len() {
            return Err(OdeError::Schedule(format!("{} breakpoints for {} segments", breakpoints.len(), values.len())));
        }
        if breakpoints[0] != S::zero() {
            return Err(OdeError::Schedule("first breakpoint must be 0".into()));
        }
        if breakpoints.windows(2).any(|w| !(w[0] < w[1])) || breakpoints.iter().any(|t| !t.is_finite()) {
            return Err(OdeError::Schedule("breakpoints must be finite and strictly increasing".into()));
        }
        for (segment, vals) in values.iter().enumerate() {
            check_len(vals.len(), ccrn.num_reactions())?;
            for (reaction, (&value, r)) in vals.iter().zip(ccrn.reactions()).enumerate() {
                if !r.rate.contains(value) {
                    return Err(OdeError::ControlOutOfBounds {
                        reaction,
                        segment,
                        value: value.as_f64(),
                        lo: r.rate.lo().as_f64(),
                        hi: r.rate.hi().as_f64(),
                    });
                }
            }
        }
        Ok(Self { breakpoints, values })
    }

    pub fn constant(ccrn: &Ccrn<S>, values: Vec<S>) -> Result<Self, OdeError> {
        Self::new(ccrn, vec![S::zero()], vec![values])
    }

    /// Every rate fixed at the chosen endpoint.
    pub fn extremal(ccrn: &Ccrn<S>, which: crate::model::Extremal) -> Self {
        let values = ccrn.reactions().iter().map(|r| r.rate.at(which)).collect();
        Self { breakpoints: vec![S::zero()], values: vec![values] }
    }

    /// Every rate at its interval midpoint.
    pub fn midpoint(ccrn: &Ccrn<S>) -> Self {
        let values = ccrn.reactions().iter().map(|r| r.rate.midpoint()).collect();
        Self { breakpoints: vec![S::zero()], values: vec![values] }
    }

    pub fn breakpoints(&self) -> &[S] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[Vec<S>] {
        &self.values
    }

    pub fn num_segments(&self) -> usize {
        self.values.len()
    }

    pub fn segment_at(&self, t: S) -> usize {
        self.breakpoints.partition_point(|&b| b <= t).saturating_sub(1)
    }

    pub fn value_at(&self, t: S) -> &[S] {
        &self.values[self.segment_at(t)]
    }
}

/// States on a time grid together with the control that produced them.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory<S> {
    pub times: Vec<S>,
    pub states: Vec<Vec<S>>,
    pub schedule: ControlSchedule<S>,
}

impl<S: Scalar> Trajectory<S> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_state(&self) -> &[S] {
        self.states.last().map(Vec::as_slice).unwrap_or(&[])
    }

    /// Largest absolute entry over all states.
    pub fn max_abs(&self) -> S {
        self.states.iter().map(|s| norm_inf(s)).fold(S::zero(), S::max)
    }

    /// Largest componentwise difference to another trajectory on the same grid.
    pub fn max_deviation(&self, other: &Trajectory<S>) -> S {
        self.states
            .iter()
            .zip(&other.states)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (*x - *y).abs()))
            .fold(S::zero(), S::max)
    }
}

/// Grid `t_k = k·h` ending exactly at `t_end`; the last step is shortened when
/// `t_end` is not a multiple of `h`.
pub fn time_grid<S: Scalar>(t_end: S, h: S) -> Result<Vec<S>, OdeError> {
    if !(h > S::zero() && h.is_finite()) {
        return Err(OdeError::Grid(format!("step {h} must be positive")));
    }
    if !(t_end >= S::zero() && t_end.is_finite()) {
        return Err(OdeError::Grid(format!("horizon {t_end} must be nonnegative")));
    }
    let ratio = t_end / h;
    let nearest = ratio.round();
    let steps = if (ratio - nearest).abs() <= S::lit(1e-9) * nearest.max(S::one()) { nearest } else { ratio.ceil() };
    let steps = steps
        .to_usize()
        .filter(|&k| k < 100_000_000)
        .ok_or_else(|| OdeError::Grid(format!("{ratio} steps is too many")))?;
    let mut times: Vec<S> = (0..steps).map(|k| S::from_count(k as u128) * h).collect();
    times.push(t_end);
    Ok(times)
}

/// Stage states of one classical RK4 step and the resulting state.
pub(crate) struct Rk4Step<S> {
    pub next: Vec<S>,
    pub stages: [Vec<S>; 4],
}

pub(crate) fn rk4_step<S: Scalar>(kin: &Kinetics<S>, y: &[S], alpha: &[S], dt: S) -> Rk4Step<S> {
    let half = dt / S::lit(2.0);
    let shift = |base: &[S], k: &[S], c: S| -> Vec<S> { base.iter().zip(k).map(|(&b, &d)| b + c * d).collect() };
    let s1 = y.to_vec();
    let k1 = kin.field(&s1, alpha);
    let s2 = shift(y, &k1, half);
    let k2 = kin.field(&s2, alpha);
    let s3 = shift(y, &k2, half);
    let k3 = kin.field(&s3, alpha);
    let s4 = shift(y, &k3, dt);
    let k4 = kin.field(&s4, alpha);
    let two = S::lit(2.0);
    let sixth = dt / S::lit(6.0);
    let next = (0..y.len()).map(|i| y[i] + sixth * (k1[i] + two * k2[i] + two * k3[i] + k4[i])).collect();
    Rk4Step { next, stages: [s1, s2, s3, s4] }
}

/// Substeps of `[a, b]` cut at schedule breakpoints strictly inside it.
pub(crate) fn substeps<S: Scalar>(sched: &ControlSchedule<S>, a: S, b: S) -> Vec<(S, S)> {
    let bps = sched.breakpoints();
    let first = bps.partition_point(|&x| x <= a);
    let mut cuts = vec![a];
    cuts.extend(bps[first..].iter().copied().take_while(|&x| x < b));
    cuts.push(b);
    cuts.windows(2).map(|w| (w[0], w[1])).collect()
}

/// Integrates `∂v = f(v, α(t))` with fixed-step RK4 from `v0` over `[0, t_end]`.
///
/// Each grid step is split at schedule breakpoints; within a piece the control
/// is the schedule value at the piece's midpoint.
pub fn simulate<S: Scalar>(
    ccrn: &Ccrn<S>,
    v0: &[S],
    sched: &ControlSchedule<S>,
    t_end: S,
    h: S,
) -> Result<Trajectory<S>, OdeError> {
    check_len(v0.len(), ccrn.num_species())?;
    check_len(sched.values()[0].len(), ccrn.num_reactions())?;
    let kin = Kinetics::new(ccrn);
    let times = time_grid(t_end, h)?;
    let mut states = Vec::with_capacity(times.len());
    let mut y = v0.to_vec();
    if y.iter().any(|x| !x.is_finite()) {
        return Err(OdeError::Divergence { t: 0.0 });
    }
    states.push(y.clone());
    let two = S::lit(2.0);
    for w in times.windows(2) {
        for (a, b) in substeps(sched, w[0], w[1]) {
            let alpha = sched.value_at(a + (b - a) / two);
            y = rk4_step(&kin, &y, alpha, b - a).next;
        }
        if y.iter().any(|x| !x.is_finite()) {
            return Err(OdeError::Divergence { t: w[1].as_f64() });
        }
        states.push(y.clone());
    }
    Ok(Trajectory { times, states, schedule: sched.clone() })
}

/// Sums a state vector over the blocks of `part`.
pub fn block_sum_state<S: Scalar>(v: &[S], part: &Partition) -> Vec<S> {
    (0..part.num_blocks()).map(|b| part.block(b).map(|s| v[s]).sum()).collect()
}

/// Per-time block sums; component `b` is `Σ_{A ∈ block b} v_A(t)`.
pub fn block_sums<S: Scalar>(traj: &Trajectory<S>, part: &Partition) -> Result<Trajectory<S>, OdeError> {
    if let Some(first) = traj.states.first() {
        check_len(first.len(), part.num_species())?;
    }
    Ok(Trajectory {
        times: traj.times.clone(),
        states: traj.states.iter().map(|v| block_sum_state(v, part)).collect(),
        schedule: traj.schedule.clone(),
    })
}

/// Linear cost `∫₀ᵀ Σ ω_A v_A dt + Σ κ_A v_A(T)` with per-species weights.
#[derive(Clone, Debug, PartialEq)]
pub struct CostSpec<S> {
    pub running: Vec<S>,
    pub terminal: Vec<S>,
    pub horizon: S,
}

impl<S: Scalar> CostSpec<S> {
    pub fn per_species(running: Vec<S>, terminal: Vec<S>, horizon: S) -> Result<Self, OdeError> {
        check_len(terminal.len(), running.len())?;
        Ok(Self { running, terminal, horizon })
    }

    /// Weights given per block, spread to every member.
    pub fn per_block(part: &Partition, running: &[S], terminal: &[S], horizon: S) -> Result<Self, OdeError> {
        check_len(running.len(), part.num_blocks())?;
        check_len(terminal.len(), part.num_blocks())?;
        let n = part.num_species();
        Ok(Self {
            running: (0..n).map(|s| running[part.block_of(s)]).collect(),
            terminal: (0..n).map(|s| terminal[part.block_of(s)]).collect(),
            horizon,
        })
    }

    pub fn is_block_respecting(&self, part: &Partition) -> bool {
        (0..part.num_blocks()).all(|b| {
            let rep = part.representative(b);
            part.block(b).all(|s| self.running[s] == self.running[rep] && self.terminal[s] == self.terminal[rep])
        })
    }

    /// The same cost over lumped species (one per block, in block order).
    pub fn lumped(&self, part: &Partition) -> Self {
        let reps = (0..part.num_blocks()).map(|b| part.representative(b));
        let (running, terminal) = reps.map(|r| (self.running[r], self.terminal[r])).unzip();
        Self { running, terminal, horizon: self.horizon }
    }
}

/// Trapezoidal running cost over the trajectory grid plus terminal cost at the
/// horizon. Linear interpolation is used when the horizon falls between grid points.
pub fn evaluate_cost<S: Scalar>(traj: &Trajectory<S>, cost: &CostSpec<S>) -> Result<S, OdeError> {
    let end = *traj.times.last().ok_or(OdeError::Grid("empty trajectory".into()))?;
    let slack = S::lit(1e-9) * (S::one() + end.abs());
    if cost.horizon > end + slack || cost.horizon < S::zero() {
        return Err(OdeError::HorizonExceedsTrajectory { horizon: cost.horizon.as_f64(), end: end.as_f64() });
    }
    check_len(traj.states[0].len(), cost.running.len())?;
    let dot = |w: &[S], v: &[S]| -> S { w.iter().zip(v).map(|(&a, &b)| a * b).sum() };
    let horizon = cost.horizon.min(end);
    let half = S::lit(0.5);
    let mut total = S::zero();
    let mut final_state = traj.states[0].clone();
    for k in 0..traj.times.len() - 1 {
        let (t0, t1) = (traj.times[k], traj.times[k + 1]);
        if t0 >= horizon {
            break;
        }
        let l0 = dot(&cost.running, &traj.states[k]);
        if t1 <= horizon {
            total = total + half * (t1 - t0) * (l0 + dot(&cost.running, &traj.states[k + 1]));
            final_state = traj.states[k + 1].clone();
        } else {
            let theta = (horizon - t0) / (t1 - t0);
            let mid: Vec<S> =
                traj.states[k].iter().zip(&traj.states[k + 1]).map(|(&a, &b)| a + theta * (b - a)).collect();
            total = total + half * (horizon - t0) * (l0 + dot(&cost.running, &mid));
            final_state = mid;
            break;
        }
    }
    Ok(total + dot(&cost.terminal, &final_state))
}

/// Tuning for [`project_control`].
#[derive(Clone, Debug)]
pub struct ProjectOptions<S> {
    /// Allowed drift-match residual, relative to `1 + |target|∞`.
    pub residual_tol: S,
    pub qp: BoxLsOptions<S>,
    /// Correction rounds matching each lumped step to the block-summed step.
    pub step_corrections: usize,
}

impl<S: Scalar> Default for ProjectOptions<S> {
    fn default() -> Self {
        Self { residual_tol: S::lit(1e-6), qp: BoxLsOptions::default(), step_corrections: 6 }
    }
}

/// A lumped control witnessing an original trajectory.
#[derive(Clone, Debug)]
pub struct ProjectedControl<S> {
    /// Piecewise constant on the original trajectory's grid.
    pub schedule: ControlSchedule<S>,
    /// Drift-match minimiser at each grid point, before step corrections.
    pub pointwise: Vec<Vec<S>>,
    /// The lumped system integrated under `schedule` with the same grid.
    pub lumped: Trajectory<S>,
    /// Largest drift-match residual at a grid point.
    pub max_drift_residual: S,
    /// Largest gap between a lumped step and the block-summed original step.
    pub max_step_mismatch: S,
}

/// Finds a lumped control that reproduces the block sums of `traj`.
///
/// At each grid point the lumped control minimises the block drift mismatch
/// within the lumped rate box; its residual is the reported witness quality.
/// Starting from that solution, a few Gauss-Newton corrections through the
/// lumped RK4 step make the lumped step land on the block-summed original step,
/// so that integrating the lumped system under the returned schedule with the
/// same grid tracks the block sums. Tracking is exact to round-off when the
/// free lumped rates can absorb the step; when the block-averaged rate varies
/// within a step and too few lumped rates are free (point intervals), one
/// constant value per step leaves an O(h) global gap, reported as
/// `max_step_mismatch`.
pub fn project_control<S: Scalar>(
    ccrn: &Ccrn<S>,
    part: &Partition,
    lumped: &Ccrn<S>,
    traj: &Trajectory<S>,
    sched: &ControlSchedule<S>,
    opts: &ProjectOptions<S>,
) -> Result<ProjectedControl<S>, OdeError> {
    check_len(part.num_species(), ccrn.num_species())?;
    check_len(lumped.num_species(), part.num_blocks())?;
    if traj.is_empty() {
        return Err(OdeError::Grid("empty trajectory".into()));
    }
    let kin = Kinetics::new(ccrn);
    let lkin = Kinetics::new(lumped);
    let identity = Partition::discrete(lumped.num_species());
    let mut values: Vec<Vec<S>> = Vec::with_capacity(traj.len());
    let mut states = vec![block_sum_state(&traj.states[0], part)];
    let mut warm: Vec<S> = lumped.reactions().iter().map(|r| r.rate.midpoint()).collect();
    let mut max_drift = S::zero();
    let mut max_mismatch = S::zero();
    let mut pointwise = Vec::with_capacity(traj.len());

    for k in 0..traj.len() {
        let t = traj.times[k];
        let v = &traj.states[k];
        let alpha = sched.value_at(t);
        let target = block_sum_state(&kin.field(v, alpha), part);
        let summed = block_sum_state(v, part);
        let prob =
            build_drift_match(lumped, &identity, &summed, &target).map_err(|e| OdeError::Schedule(e.to_string()))?;
        let sol = solve_box_ls_from(&prob, &warm, &opts.qp);
        let threshold = opts.residual_tol * (S::one() + norm_inf(&target));
        if sol.residual > threshold {
            return Err(OdeError::ProjectionFailure {
                t: t.as_f64(),
                residual: sol.residual.as_f64(),
                threshold: threshold.as_f64(),
            });
        }
        max_drift = max_drift.max(sol.residual);
        pointwise.push(sol.a.clone());
        let mut a = sol.a;

        if k + 1 < traj.len() {
            let dt = traj.times[k + 1] - t;
            let y = states[k].clone();
            let goal = block_sum_state(&traj.states[k + 1], part);
            let mut step = rk4_step(&lkin, &y, &a, dt);
            let mut gap = max_gap(&step.next, &goal);
            let floor = S::epsilon() * S::lit(4.0) * (S::one() + norm_inf(&goal));
            for _ in 0..opts.step_corrections {
                if gap <= floor {
                    break;
                }
                let jac = step_jacobian(&lkin, &step.stages, dt, lumped.num_species());
                let cand = gauss_newton_step(&jac, &a, &step.next, &goal, lumped);
                let cand_step = rk4_step(&lkin, &y, &cand, dt);
                let cand_gap = max_gap(&cand_step.next, &goal);
                if cand_gap >= gap {
                    break;
                }
                a = cand;
                step = cand_step;
                gap = cand_gap;
            }
            max_mismatch = max_mismatch.max(gap);
            if step.next.iter().any(|x| !x.is_finite()) {
                return Err(OdeError::Divergence { t: traj.times[k + 1].as_f64() });
            }
            states.push(step.next);
        }
        warm = a.clone();
        values.push(a);
    }
    let schedule = ControlSchedule { breakpoints: traj.times.clone(), values };
    let lumped_traj = Trajectory { times: traj.times.clone(), states, schedule: schedule.clone() };
    Ok(ProjectedControl {
        schedule,
        pointwise,
        lumped: lumped_traj,
        max_drift_residual: max_drift,
        max_step_mismatch: max_mismatch,
    })
}

fn max_gap<S: Scalar>(a: &[S], b: &[S]) -> S {
    a.iter().zip(b).map(|(&x, &y)| (x - y).abs()).fold(S::zero(), S::max)
}

/// `(dt/6) Σ w_i ∂f/∂α (s_i)` with RK4 weights, frozen at the stage states.
fn step_jacobian<S: Scalar>(kin: &Kinetics<S>, stages: &[Vec<S>; 4], dt: S, n: usize) -> Vec<Vec<S>> {
    let weights = [S::one(), S::lit(2.0), S::lit(2.0), S::one()];
    let sixth = dt / S::lit(6.0);
    let mut jac = vec![vec![S::zero(); kin.num_reactions()]; n];
    for (stage, &w) in stages.iter().zip(&weights) {
        for r in 0..kin.num_reactions() {
            let m = kin.monomial(r, stage);
            for &(s, d) in kin.net(r) {
                jac[s][r] = jac[s][r] + sixth * w * d * m;
            }
        }
    }
    jac
}

/// Minimum-norm Gauss-Newton update `a + Jᵀ (J Jᵀ + λI)⁻¹ (goal − y)`, clamped
/// to the lumped rate box.
fn gauss_newton_step<S: Scalar>(jac: &[Vec<S>], a: &[S], y: &[S], goal: &[S], lumped: &Ccrn<S>) -> Vec<S> {
    let n = jac.len();
    let r: Vec<S> = goal.iter().zip(y).map(|(&g, &x)| g - x).collect();
    let mut gram = vec![vec![S::zero(); n]; n];
    for i in 0..n {
        for j in 0..=i {
            let d: S = jac[i].iter().zip(&jac[j]).map(|(&x, &y)| x * y).sum();
            gram[i][j] = d;
            gram[j][i] = d;
        }
    }
    let scale = (0..n).map(|i| gram[i][i]).fold(S::zero(), S::max);
    let lambda = scale * S::lit(1e-13) + S::min_positive_value();
    for (i, row) in gram.iter_mut().enumerate() {
        row[i] = row[i] + lambda;
    }
    let z = match cholesky_solve(gram, &r) {
        Some(z) => z,
        None => return a.to_vec(),
    };
    a.iter()
        .enumerate()
        .map(|(c, &x)| {
            let delta: S = (0..n).map(|i| jac[i][c] * z[i]).sum();
            lumped.reactions()[c].rate.clamp(x + delta)
        })
        .collect()
}

fn cholesky_solve<S: Scalar>(mut m: Vec<Vec<S>>, b: &[S]) -> Option<Vec<S>> {
    let n = m.len();
    for j in 0..n {
        let mut d = m[j][j];
        for k in 0..j {
            d = d - m[j][k] * m[j][k];
        }
        if !(d > S::zero()) {
            return None;
        }
        let d = d.sqrt();
        m[j][j] = d;
        for i in j + 1..n {
            let mut x = m[i][j];
            for k in 0..j {
                x = x - m[i][k] * m[j][k];
            }
            m[i][j] = x / d;
        }
    }
    let mut z = b.to_vec();
    for i in 0..n {
        for k in 0..i {
            z[i] = z[i] - m[i][k] * z[k];
        }
        z[i] = z[i] / m[i][i];
    }
    for i in (0..n).rev() {
        for k in i + 1..n {
            z[i] = z[i] - m[k][i] * z[k];
        }
        z[i] = z[i] / m[i][i];
    }
    Some(z)
}
