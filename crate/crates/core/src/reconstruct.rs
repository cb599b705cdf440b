//! Drift matching: recover original controls whose block-aggregated vector field
//! equals a given lumped drift, and closed-loop reconstruction of a full
//! trajectory from a lumped one.

use thiserror::Error;

use crate::model::{Ccrn, ModelError, Partition};
use crate::ode::{block_sum_state, rk4_step, substeps, ControlSchedule, Kinetics, OdeError, Trajectory};
use crate::scalar::{norm2, norm_inf, Scalar};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReconstructError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Ode(#[from] OdeError),
    #[error("expected a vector of length {expected}, got {found}")]
    Dimension { expected: usize, found: usize },
    #[error("initial state inconsistent with the lumped trajectory: block {block} differs by {gap}")]
    Inconsistent { block: usize, gap: f64 },
    #[error("drift match residual {residual} at t = {t} exceeds threshold {threshold}")]
    Failure { t: f64, residual: f64, threshold: f64 },
}

/// `min ‖M a − b‖²` over the box `lo ≤ a ≤ hi`, with `M` stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct DriftMatchProblem<S> {
    pub rows: usize,
    pub cols: usize,
    pub m: Vec<S>,
    pub b: Vec<S>,
    pub lo: Vec<S>,
    pub hi: Vec<S>,
}

impl<S: Scalar> DriftMatchProblem<S> {
    pub fn new(
        rows: usize,
        cols: usize,
        m: Vec<S>,
        b: Vec<S>,
        lo: Vec<S>,
        hi: Vec<S>,
    ) -> Result<Self, ReconstructError> {
        for (found, expected) in [(m.len(), rows * cols), (b.len(), rows), (lo.len(), cols), (hi.len(), cols)] {
            if found != expected {
                return Err(ReconstructError::Dimension { expected, found });
            }
        }
        Ok(Self { rows, cols, m, b, lo, hi })
    }

    pub fn entry(&self, row: usize, col: usize) -> S {
        self.m[row * self.cols + col]
    }

    /// `M a`.
    pub fn apply(&self, a: &[S]) -> Vec<S> {
        (0..self.rows)
            .map(|i| self.m[i * self.cols..(i + 1) * self.cols].iter().zip(a).map(|(&x, &y)| x * y).sum())
            .collect()
    }

    /// `Mᵀ y`.
    fn apply_t(&self, y: &[S]) -> Vec<S> {
        let mut out = vec![S::zero(); self.cols];
        for (i, &yi) in y.iter().enumerate() {
            for (o, &x) in out.iter_mut().zip(&self.m[i * self.cols..(i + 1) * self.cols]) {
                *o = *o + x * yi;
            }
        }
        out
    }

    /// `‖M a − b‖₂`.
    pub fn residual(&self, a: &[S]) -> S {
        let r: Vec<S> = self.apply(a).iter().zip(&self.b).map(|(&x, &y)| x - y).collect();
        norm2(&r)
    }

    pub fn objective(&self, a: &[S]) -> S {
        let r = self.residual(a);
        r * r
    }

    pub fn clamp(&self, a: &mut [S]) {
        for ((x, &lo), &hi) in a.iter_mut().zip(&self.lo).zip(&self.hi) {
            *x = x.max(lo).min(hi);
        }
    }

    pub fn midpoint(&self) -> Vec<S> {
        self.lo.iter().zip(&self.hi).map(|(&l, &h)| l + (h - l) / S::lit(2.0)).collect()
    }

    fn gradient(&self, a: &[S]) -> Vec<S> {
        let r: Vec<S> = self.apply(a).iter().zip(&self.b).map(|(&x, &y)| x - y).collect();
        self.apply_t(&r)
    }

    /// `‖a − P(a − ∇)‖∞`, zero exactly at a minimiser.
    fn projected_gradient_norm(&self, a: &[S], grad: &[S]) -> S {
        let mut moved: Vec<S> = a.iter().zip(grad).map(|(&x, &g)| x - g).collect();
        self.clamp(&mut moved);
        a.iter().zip(&moved).map(|(&x, &y)| (x - y).abs()).fold(S::zero(), S::max)
    }
}

/// Assembles the drift-match problem at state `v`: row `H` of `M` holds, for
/// every reaction, its net change of block `H` times its mass-action monomial.
pub fn build_drift_match<S: Scalar>(
    ccrn: &Ccrn<S>,
    part: &Partition,
    v: &[S],
    target: &[S],
) -> Result<DriftMatchProblem<S>, ReconstructError> {
    build_with(&Kinetics::new(ccrn), ccrn, part, v, target)
}

fn build_with<S: Scalar>(
    kin: &Kinetics<S>,
    ccrn: &Ccrn<S>,
    part: &Partition,
    v: &[S],
    target: &[S],
) -> Result<DriftMatchProblem<S>, ReconstructError> {
    if part.num_species() != ccrn.num_species() {
        return Err(ModelError::UniverseMismatch { expected: ccrn.num_species(), found: part.num_species() }.into());
    }
    for (found, expected) in [(v.len(), ccrn.num_species()), (target.len(), part.num_blocks())] {
        if found != expected {
            return Err(ReconstructError::Dimension { expected, found });
        }
    }
    let (rows, cols) = (part.num_blocks(), ccrn.num_reactions());
    let mut m = vec![S::zero(); rows * cols];
    for r in 0..cols {
        let mono = kin.monomial(r, v);
        for &(s, d) in kin.net(r) {
            let cell = &mut m[part.block_of(s) * cols + r];
            *cell = *cell + d * mono;
        }
    }
    let lo = ccrn.reactions().iter().map(|r| r.rate.lo()).collect();
    let hi = ccrn.reactions().iter().map(|r| r.rate.hi()).collect();
    Ok(DriftMatchProblem { rows, cols, m, b: target.to_vec(), lo, hi })
}

#[derive(Clone, Debug)]
pub struct BoxLsOptions<S> {
    /// Stop when the projected-gradient norm falls to this value.
    pub tol: S,
    /// Stop when `‖M a − b‖` falls to this value.
    pub residual_tol: S,
    pub max_iter: usize,
}

impl<S: Scalar> Default for BoxLsOptions<S> {
    fn default() -> Self {
        Self { tol: S::lit(1e-14), residual_tol: S::lit(1e-13), max_iter: 20_000 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoxLsSolution<S> {
    pub a: Vec<S>,
    /// `‖M a − b‖₂`.
    pub residual: S,
    pub iterations: usize,
    /// False when `max_iter` ran out first; `a` is still the best iterate.
    pub converged: bool,
}

/// Largest eigenvalue of `MᵀM`, estimated by 50 power iterations.
fn gram_norm_estimate<S: Scalar>(prob: &DriftMatchProblem<S>) -> S {
    let mut x = vec![S::one(); prob.cols];
    let mut lambda = S::zero();
    for _ in 0..50 {
        let y = prob.apply_t(&prob.apply(&x));
        let n = norm2(&y);
        if n == S::zero() {
            return S::zero();
        }
        lambda = n / norm2(&x);
        x = y.into_iter().map(|v| v / n).collect();
    }
    lambda
}

/// Projected gradient from the box midpoint.
pub fn solve_box_ls<S: Scalar>(prob: &DriftMatchProblem<S>, tol: S, max_iter: usize) -> BoxLsSolution<S> {
    let opts = BoxLsOptions { tol, residual_tol: tol, max_iter };
    solve_box_ls_from(prob, &prob.midpoint(), &opts)
}

/// Accelerated projected gradient with adaptive restart, warm-started at `start`.
///
/// Step `0.9 / λ` with `λ` the power-iteration estimate of `‖MᵀM‖₂`. When `M`
/// vanishes every point is optimal and the box midpoint is returned.
pub fn solve_box_ls_from<S: Scalar>(
    prob: &DriftMatchProblem<S>,
    start: &[S],
    opts: &BoxLsOptions<S>,
) -> BoxLsSolution<S> {
    if prob.m.iter().all(|&x| x == S::zero()) {
        let a = prob.midpoint();
        let residual = prob.residual(&a);
        return BoxLsSolution { a, residual, iterations: 0, converged: true };
    }
    let lambda = gram_norm_estimate(prob);
    let step = S::lit(0.9) / lambda;
    let mut x = start.to_vec();
    prob.clamp(&mut x);
    let mut y = x.clone();
    let mut t = S::one();
    let mut best = (prob.residual(&x), x.clone());

    for it in 0..=opts.max_iter {
        let grad_x = prob.gradient(&x);
        let res = prob.residual(&x);
        if res < best.0 {
            best = (res, x.clone());
        }
        if res <= opts.residual_tol || prob.projected_gradient_norm(&x, &grad_x) <= opts.tol {
            return BoxLsSolution { a: x, residual: res, iterations: it, converged: true };
        }
        if it == opts.max_iter {
            break;
        }
        let grad_y = prob.gradient(&y);
        let mut next: Vec<S> = y.iter().zip(&grad_y).map(|(&v, &g)| v - step * g).collect();
        prob.clamp(&mut next);
        let restart: S = y.iter().zip(&next).zip(&x).map(|((&yy, &nn), &xx)| (yy - nn) * (nn - xx)).sum();
        if restart > S::zero() {
            t = S::one();
            y = next.clone();
        } else {
            let t_next = (S::one() + (S::one() + S::lit(4.0) * t * t).sqrt()) / S::lit(2.0);
            let beta = (t - S::one()) / t_next;
            y = next.iter().zip(&x).map(|(&nn, &xx)| nn + beta * (nn - xx)).collect();
            t = t_next;
        }
        x = next;
    }
    BoxLsSolution { a: best.1, residual: best.0, iterations: opts.max_iter, converged: false }
}

#[derive(Clone, Debug)]
pub struct ReconstructOptions<S> {
    pub qp: BoxLsOptions<S>,
    /// Allowed stage residual, relative to `1 + |target|∞`.
    pub residual_threshold: S,
    /// Allowed gap between block sums of `v0` and the lumped initial state.
    pub consistency_tol: S,
}

impl<S: Scalar> Default for ReconstructOptions<S> {
    fn default() -> Self {
        Self { qp: BoxLsOptions::default(), residual_threshold: S::lit(1e-8), consistency_tol: S::lit(1e-9) }
    }
}

#[derive(Clone, Debug)]
pub struct Reconstruction<S> {
    /// Original-network trajectory on the lumped trajectory's grid.
    pub trajectory: Trajectory<S>,
    /// Realised control, one value per grid step.
    pub schedule: ControlSchedule<S>,
    /// `(t_k, largest stage residual in step k)`.
    pub residuals: Vec<(S, S)>,
    pub max_residual: S,
    /// Largest gap between block sums of the reconstruction and the lumped trajectory.
    pub max_tracking_error: S,
}

/// Integrates the original network so that its block sums follow `lumped_traj`.
///
/// Each grid step replays the lumped RK4 step from the lumped trajectory point
/// under `lumped_sched`; at every stage the original control is the drift-match
/// minimiser at the current original stage state with the lumped stage slope as
/// target. The realised control of a step is the RK4-weighted stage average.
pub fn reconstruct_trajectory<S: Scalar>(
    ccrn: &Ccrn<S>,
    part: &Partition,
    lumped: &Ccrn<S>,
    lumped_traj: &Trajectory<S>,
    lumped_sched: &ControlSchedule<S>,
    v0: &[S],
    opts: &ReconstructOptions<S>,
) -> Result<Reconstruction<S>, ReconstructError> {
    if lumped.num_species() != part.num_blocks() {
        return Err(ReconstructError::Dimension { expected: part.num_blocks(), found: lumped.num_species() });
    }
    if v0.len() != ccrn.num_species() {
        return Err(ReconstructError::Dimension { expected: ccrn.num_species(), found: v0.len() });
    }
    let first = lumped_traj.states.first().ok_or(ReconstructError::Dimension { expected: 1, found: 0 })?;
    let summed = block_sum_state(v0, part);
    for (block, (&x, &y)) in summed.iter().zip(first).enumerate() {
        let gap = (x - y).abs();
        if gap > opts.consistency_tol * (S::one() + y.abs()) {
            return Err(ReconstructError::Inconsistent { block, gap: gap.as_f64() });
        }
    }

    let kin = Kinetics::new(ccrn);
    let lkin = Kinetics::new(lumped);
    let two = S::lit(2.0);
    let half = S::lit(0.5);
    let weights = [S::one(), two, two, S::one()];
    let mut warm = ccrn.reactions().iter().map(|r| r.rate.midpoint()).collect::<Vec<_>>();
    let mut y = v0.to_vec();
    let mut states = vec![y.clone()];
    let mut values = Vec::new();
    let mut residuals = Vec::new();
    let mut max_residual = S::zero();
    let mut max_tracking = S::zero();

    for k in 0..lumped_traj.len().saturating_sub(1) {
        let (t0, t1) = (lumped_traj.times[k], lumped_traj.times[k + 1]);
        let mut yh = lumped_traj.states[k].clone();
        let mut realized = vec![S::zero(); ccrn.num_reactions()];
        let mut step_residual = S::zero();
        for (a, b) in substeps(lumped_sched, t0, t1) {
            let dt = b - a;
            let ahat = lumped_sched.value_at(a + (b - a) * half);
            let lstep = rk4_step(&lkin, &yh, ahat, dt);
            let mut slopes: Vec<Vec<S>> = Vec::with_capacity(4);
            let mut controls: Vec<Vec<S>> = Vec::with_capacity(4);
            let mut stage = y.clone();
            for i in 0..4 {
                let target = lkin.field(&lstep.stages[i], ahat);
                let prob = build_with(&kin, ccrn, part, &stage, &target)?;
                let sol = solve_box_ls_from(&prob, &warm, &opts.qp);
                let threshold = opts.residual_threshold * (S::one() + norm_inf(&target));
                if sol.residual > threshold {
                    return Err(ReconstructError::Failure {
                        t: (a + [S::zero(), half, half, S::one()][i] * dt).as_f64(),
                        residual: sol.residual.as_f64(),
                        threshold: threshold.as_f64(),
                    });
                }
                step_residual = step_residual.max(sol.residual);
                let slope = kin.field(&stage, &sol.a);
                warm = sol.a.clone();
                if i < 3 {
                    let c = if i < 2 { dt * half } else { dt };
                    stage = y.iter().zip(&slope).map(|(&v, &d)| v + c * d).collect();
                }
                slopes.push(slope);
                controls.push(sol.a);
            }
            let sixth = dt / S::lit(6.0);
            y = (0..y.len())
                .map(|i| y[i] + sixth * (slopes[0][i] + two * slopes[1][i] + two * slopes[2][i] + slopes[3][i]))
                .collect();
            for (ctrl, &w) in controls.iter().zip(&weights) {
                for (acc, &c) in realized.iter_mut().zip(ctrl) {
                    *acc = *acc + sixth * w * c;
                }
            }
            yh = lstep.next;
        }
        if y.iter().any(|x| !x.is_finite()) {
            return Err(OdeError::Divergence { t: t1.as_f64() }.into());
        }
        let h = t1 - t0;
        let realized: Vec<S> = realized.iter().zip(ccrn.reactions()).map(|(&x, r)| r.rate.clamp(x / h)).collect();
        values.push(realized);
        residuals.push((t0, step_residual));
        max_residual = max_residual.max(step_residual);
        let gap = block_sum_state(&y, part)
            .iter()
            .zip(&lumped_traj.states[k + 1])
            .map(|(&x, &z)| (x - z).abs())
            .fold(S::zero(), S::max);
        max_tracking = max_tracking.max(gap);
        states.push(y.clone());
    }

    let mut breakpoints: Vec<S> = lumped_traj.times[..values.len()].to_vec();
    if values.is_empty() {
        breakpoints.push(S::zero());
        values.push(ccrn.reactions().iter().map(|r| r.rate.midpoint()).collect());
    }
    let schedule = ControlSchedule::new(ccrn, breakpoints, values)?;
    Ok(Reconstruction {
        trajectory: Trajectory { times: lumped_traj.times.clone(), states, schedule: schedule.clone() },
        schedule,
        residuals,
        max_residual,
        max_tracking_error: max_tracking,
    })
}
