//! Primal-dual interior-point method for `min f(x) s.t. g(x) = 0, x ≥ ℓ`.
//!
//! Newton steps on the barrier KKT conditions with a monotone barrier schedule, inertia
//! correction by diagonal shifts, fraction-to-boundary step limits and a backtracking line
//! search on the ℓ₁ merit function `f - μ Σ ln(x - ℓ) + ρ‖g‖₁`. When the line search fails
//! twice, or the constraint violation stalls, a least-squares feasibility restoration is run
//! with the same method.

mod kkt;
mod model;
mod options;

use alloc::vec;
use alloc::vec::Vec;

pub use kkt::{assemble_kkt, inertia_correct, KktInputs, KktSystem, Regularized, KKT_ZERO_RTOL};
pub use options::IpmOptions;

use crate::clock::{Category, Clock, Timer};
use crate::math::{abs, ln, norm1, norm_inf};
use crate::nlp::NlpProblem;
use crate::{Error, Result};
use model::{Model, Restoration};

const KAPPA_SIGMA: f64 = 1e10;
/// Accepted steps without a 1% drop in `‖g‖∞` before restoration is forced.
const STALL_ITERS: usize = 25;
const SCALE_MAX: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Status {
    Optimal,
    MaxIter,
    TimeLimit,
    Infeasible,
    LinAlgFailure,
}

impl Status {
    pub fn is_optimal(self) -> bool {
        self == Status::Optimal
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Status::Optimal => "Optimal",
            Status::MaxIter => "MaxIter",
            Status::TimeLimit => "TimeLimit",
            Status::Infeasible => "Infeasible",
            Status::LinAlgFailure => "LinAlgFailure",
        }
    }
}

/// Wall time of a solve, split into oracle categories and everything else.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SolveTiming {
    pub function_s: f64,
    pub jacobian_s: f64,
    pub hessian_s: f64,
    /// KKT assembly, factorization, solves, line search bookkeeping.
    pub solver_s: f64,
    pub total_s: f64,
}

impl SolveTiming {
    /// Percent of the total for function, Jacobian, Hessian and solver time.
    pub fn percentages(&self) -> [f64; 4] {
        let parts = [
            self.function_s,
            self.jacobian_s,
            self.hessian_s,
            self.solver_s,
        ];
        let sum: f64 = parts.iter().sum();
        if sum <= 0.0 {
            return [0.0; 4];
        }
        parts.map(|p| 100.0 * p / sum)
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct IterationRecord {
    pub iter: usize,
    pub mu: f64,
    pub objective: f64,
    pub primal_inf: f64,
    pub dual_inf: f64,
    pub kkt_error: f64,
    pub delta_w: f64,
    pub alpha_primal: f64,
    pub alpha_dual: f64,
    /// Merit value at the start of the step and at the accepted point, same μ and ρ.
    pub merit_before: f64,
    pub merit_after: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct IpmResult {
    pub status: Status,
    pub x: Vec<f64>,
    /// Equality multipliers, for `L = f + λᵀg - zᵀ(x - ℓ)`.
    pub lambda: Vec<f64>,
    /// Bound multipliers; zero for free variables.
    pub z: Vec<f64>,
    pub iterations: usize,
    pub objective: f64,
    pub kkt_error: f64,
    pub primal_inf: f64,
    pub restorations: usize,
    pub timing: SolveTiming,
    pub trace: Vec<IterationRecord>,
}

/// Unscaled optimality residuals and the multiplier scalings applied to them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KktResiduals {
    /// `‖∇f + Jᵀλ - z‖∞`
    pub dual: f64,
    /// `‖g‖∞`
    pub primal: f64,
    /// `‖(x - ℓ)∘z - μ‖∞` over bounded variables.
    pub complementarity: f64,
    pub s_d: f64,
    pub s_c: f64,
}

impl KktResiduals {
    /// `max(dual/s_d, primal, complementarity/s_c)`
    pub fn error(&self) -> f64 {
        (self.dual / self.s_d)
            .max(self.primal)
            .max(self.complementarity / self.s_c)
    }
}

struct Point<'a> {
    lower: &'a [f64],
    x: &'a [f64],
    lambda: &'a [f64],
    z: &'a [f64],
}

fn residuals(
    p: &Point<'_>,
    grad: &[f64],
    jac_s: &[(usize, usize)],
    jac_v: &[f64],
    g: &[f64],
    mu: f64,
) -> KktResiduals {
    let mut r = grad.to_vec();
    for (&(row, col), &v) in jac_s.iter().zip(jac_v) {
        r[col] += v * p.lambda[row];
    }
    let mut compl: f64 = 0.0;
    let mut n_b = 0usize;
    let mut z_sum = 0.0;
    for i in 0..r.len() {
        if p.lower[i].is_finite() {
            r[i] -= p.z[i];
            compl = compl.max(abs((p.x[i] - p.lower[i]) * p.z[i] - mu));
            n_b += 1;
            z_sum += abs(p.z[i]);
        }
    }
    let m = p.lambda.len();
    let s_d = ((norm1(p.lambda) + z_sum) / ((m + n_b).max(1) as f64)).max(SCALE_MAX) / SCALE_MAX;
    let s_c = (z_sum / (n_b.max(1) as f64)).max(SCALE_MAX) / SCALE_MAX;
    KktResiduals {
        dual: norm_inf(&r),
        primal: norm_inf(g),
        complementarity: compl,
        s_d,
        s_c,
    }
}

/// Recomputes the KKT residuals of `(x, λ, z)` from fresh oracle calls.
pub fn kkt_residuals(
    problem: &NlpProblem,
    x: &[f64],
    lambda: &[f64],
    z: &[f64],
    mu: f64,
) -> Result<KktResiduals> {
    let n = problem.n_var();
    if z.len() != n || lambda.len() != problem.n_con() {
        return Err(Error::DimensionMismatch {
            context: "multipliers",
            expected: n + problem.n_con(),
            got: z.len() + lambda.len(),
        });
    }
    let mut grad = vec![0.0; n];
    problem.eval_gradient(x, &mut grad)?;
    let jac_s = problem.jacobian_structure();
    let mut jac_v = vec![0.0; jac_s.len()];
    problem.eval_jacobian(x, &mut jac_v)?;
    let mut g = vec![0.0; problem.n_con()];
    problem.eval_constraints(x, &mut g)?;
    let lower = problem.lower_bounds();
    let p = Point {
        lower: &lower,
        x,
        lambda,
        z,
    };
    Ok(residuals(&p, &grad, &jac_s, &jac_v, &g, mu))
}

/// Solves `problem` from its declared initial point.
#[cfg(feature = "std")]
pub fn solve(problem: &NlpProblem, opts: &IpmOptions) -> Result<IpmResult> {
    solve_with_clock(problem, opts, &crate::clock::StdClock::new())
}

/// Solves `problem`, timing oracle calls with `clock`.
///
/// Returns `Err` only for problem-definition errors (pattern violations, non-finite oracle
/// output at the starting point, invalid options). Algorithmic outcomes are in
/// [`IpmResult::status`].
pub fn solve_with_clock(
    problem: &NlpProblem,
    opts: &IpmOptions,
    clock: &dyn Clock,
) -> Result<IpmResult> {
    opts.validate()?;
    let mut timer = Timer::new(clock);
    let start = timer.now();
    let run = Run {
        model: problem,
        opts,
        start,
        max_iter: opts.max_iter,
        allow_restoration: true,
    };
    let out = run.solve(&mut timer, problem.initial_point(), opts.mu_init)?;
    let total = (timer.now() - start).max(0.0);
    let t = timer.timings;
    Ok(IpmResult {
        status: out.status,
        x: out.x,
        lambda: out.lambda,
        z: out.z,
        iterations: out.iterations,
        objective: out.objective,
        kkt_error: out.kkt_error,
        primal_inf: out.primal_inf,
        restorations: out.restorations,
        timing: SolveTiming {
            function_s: t.function_s,
            jacobian_s: t.jacobian_s,
            hessian_s: t.hessian_s,
            solver_s: (total - t.total()).max(0.0),
            total_s: total,
        },
        trace: out.trace,
    })
}

struct Outcome {
    status: Status,
    x: Vec<f64>,
    lambda: Vec<f64>,
    z: Vec<f64>,
    iterations: usize,
    objective: f64,
    kkt_error: f64,
    primal_inf: f64,
    restorations: usize,
    trace: Vec<IterationRecord>,
}

struct Run<'a> {
    model: &'a dyn Model,
    opts: &'a IpmOptions,
    start: f64,
    max_iter: usize,
    allow_restoration: bool,
}

/// Largest `α ∈ (0, 1]` with `v + α dv ≥ (1 - τ) v` on the masked entries.
fn fraction_to_boundary(v: &[f64], dv: &[f64], mask: &[bool], tau: f64) -> f64 {
    let mut alpha: f64 = 1.0;
    for i in 0..v.len() {
        if mask[i] && dv[i] < 0.0 {
            alpha = alpha.min(-tau * v[i] / dv[i]);
        }
    }
    alpha
}

fn is_recoverable(e: &Error) -> bool {
    matches!(e, Error::NonFiniteOracle { .. })
}

impl Run<'_> {
    fn barrier(&self, x: &[f64], lower: &[f64], mu: f64) -> f64 {
        let mut b = 0.0;
        for i in 0..x.len() {
            if lower[i].is_finite() {
                b -= mu * ln(x[i] - lower[i]);
            }
        }
        b
    }

    fn eval_fg(&self, timer: &mut Timer<'_>, x: &[f64], g: &mut [f64]) -> Result<f64> {
        timer.time(Category::Function, || {
            let f = self.model.objective(x)?;
            self.model.constraints(x, g)?;
            Ok(f)
        })
    }

    fn solve(&self, timer: &mut Timer<'_>, x0: Vec<f64>, mu0: f64) -> Result<Outcome> {
        let opts = self.opts;
        let model = self.model;
        let n = model.n_var();
        let m = model.n_con();
        let lower = model.lower();
        let bounded: Vec<bool> = lower.iter().map(|l| l.is_finite()).collect();

        let mut x = x0;
        for i in 0..n {
            if bounded[i] {
                let floor = lower[i] + 1e-2 * abs(lower[i]).max(1.0);
                x[i] = x[i].max(floor);
            }
        }
        let mut mu = mu0;
        let mut z: Vec<f64> = (0..n)
            .map(|i| {
                if bounded[i] {
                    (mu / (x[i] - lower[i])).max(1.0)
                } else {
                    0.0
                }
            })
            .collect();
        let mut lambda = vec![0.0; m];

        let jac_s = model.jac_structure();
        let hess_s = model.hess_structure();
        let mut jac_v = vec![0.0; jac_s.len()];
        let mut hess_v = vec![0.0; hess_s.len()];
        let mut grad = vec![0.0; n];
        let mut g = vec![0.0; m];
        let mut f = self.eval_fg(timer, &x, &mut g)?;

        let mut rho: f64 = 0.0;
        let mut last_delta = 0.0;
        let mut iter = 0usize;
        let mut restorations = 0usize;
        let mut trace = Vec::new();
        let mut best_theta = norm_inf(&g);
        let mut stall = 0usize;

        let status;
        let final_res;
        loop {
            timer.time(Category::Jacobian, || -> Result<()> {
                model.gradient(&x, &mut grad)?;
                model.jacobian(&x, &mut jac_v)
            })?;
            let point = Point {
                lower: &lower,
                x: &x,
                lambda: &lambda,
                z: &z,
            };
            let res0 = residuals(&point, &grad, &jac_s, &jac_v, &g, 0.0);
            if res0.error() <= opts.tol {
                status = Status::Optimal;
                final_res = res0;
                break;
            }
            loop {
                let res_mu = residuals(&point, &grad, &jac_s, &jac_v, &g, mu);
                if mu > opts.mu_min() && res_mu.error() <= opts.kappa_eps * mu {
                    mu = opts.next_mu(mu);
                } else {
                    break;
                }
            }
            if iter >= self.max_iter {
                status = Status::MaxIter;
                final_res = res0;
                break;
            }
            if timer.now() - self.start > opts.time_limit_s {
                status = Status::TimeLimit;
                final_res = res0;
                break;
            }

            timer.time(Category::Hessian, || {
                model.hessian(&x, 1.0, &lambda, &mut hess_v)
            })?;
            let hess: Vec<(usize, usize, f64)> = hess_s
                .iter()
                .zip(&hess_v)
                .map(|(&(r, c), &v)| (r, c, v))
                .collect();
            let jac: Vec<(usize, usize, f64)> = jac_s
                .iter()
                .zip(&jac_v)
                .map(|(&(r, c), &v)| (r, c, v))
                .collect();
            let kkt = assemble_kkt(&KktInputs {
                n_var: n,
                n_con: m,
                hess: &hess,
                jac: &jac,
                lower: &lower,
                x: &x,
                z: &z,
                lambda: &lambda,
                grad_f: &grad,
                g: &g,
                mu,
            });

            let slack: Vec<f64> = (0..n)
                .map(|i| if bounded[i] { x[i] - lower[i] } else { 0.0 })
                .collect();
            let mut min_delta = 0.0;
            let mut retried = false;
            let stalled = stall >= STALL_ITERS;
            let step = if stalled {
                None
            } else {
                loop {
                    let reg = match inertia_correct(&kkt, opts, last_delta, min_delta)? {
                        Some(r) => r,
                        None => break None,
                    };
                    if reg.delta_w > 0.0 {
                        last_delta = reg.delta_w;
                    }
                    let d = match kkt.solve(&reg) {
                        Ok(d) => d,
                        Err(Error::Singular { .. }) => break None,
                        Err(e) => return Err(e),
                    };
                    let (dx, dl) = d.split_at(n);
                    let dz: Vec<f64> = (0..n)
                        .map(|i| {
                            if bounded[i] {
                                mu / slack[i] - z[i] - z[i] / slack[i] * dx[i]
                            } else {
                                0.0
                            }
                        })
                        .collect();
                    let alpha_p_max = fraction_to_boundary(&slack, dx, &bounded, opts.tau);
                    let alpha_d_max = fraction_to_boundary(&z, &dz, &bounded, opts.tau);

                    // Penalty parameter and directional derivative of the merit function.
                    let mut jdx = g.clone();
                    for &(r, c, v) in &jac {
                        jdx[r] += v * dx[c];
                    }
                    let theta = norm1(&g);
                    let pred = theta - norm1(&jdx);
                    let gtd: f64 = (0..n)
                        .map(|i| {
                            let b = if bounded[i] { mu / slack[i] } else { 0.0 };
                            (grad[i] - b) * dx[i]
                        })
                        .sum();
                    let mut full = dx.to_vec();
                    full.resize(n + m, 0.0);
                    let hd = kkt.apply(&full, reg.delta_w, reg.delta_c);
                    let dhd: f64 = (0..n).map(|i| hd[i] * dx[i]).sum();
                    let lam_plus_inf = (0..m).fold(0.0f64, |a, i| a.max(abs(lambda[i] + dl[i])));
                    if pred > 0.0 {
                        let req = (gtd + 0.5 * dhd.max(0.0)) / (0.9 * pred);
                        if rho < req {
                            rho = req * 1.1;
                        }
                    }
                    if rho < lam_plus_inf {
                        rho = lam_plus_inf * 1.1;
                    }
                    let deriv = gtd - rho * pred;
                    let merit0 = f + self.barrier(&x, &lower, mu) + rho * theta;

                    let mut alpha = alpha_p_max;
                    let mut g_t = vec![0.0; m];
                    let mut x_t = vec![0.0; n];
                    let mut accepted = None;
                    while alpha >= opts.alpha_min {
                        for i in 0..n {
                            x_t[i] = x[i] + alpha * dx[i];
                        }
                        match self.eval_fg(timer, &x_t, &mut g_t) {
                            Ok(f_t) => {
                                let merit =
                                    f_t + self.barrier(&x_t, &lower, mu) + rho * norm1(&g_t);
                                let slackness = 10.0 * f64::EPSILON * abs(merit0);
                                if merit
                                    <= merit0 + opts.armijo * alpha * deriv.min(0.0) + slackness
                                {
                                    accepted = Some((f_t, merit));
                                    break;
                                }
                            }
                            Err(e) if is_recoverable(&e) => {}
                            Err(e) => return Err(e),
                        }
                        alpha *= 0.5;
                    }
                    if accepted.is_none() && !retried {
                        retried = true;
                        min_delta = opts.delta_init.max(opts.delta_growth * reg.delta_w);
                        continue;
                    }
                    if accepted.is_none() && norm_inf(&g) <= opts.tol {
                        // Feasible point where the merit function no longer resolves progress.
                        alpha = alpha_p_max;
                        for i in 0..n {
                            x_t[i] = x[i] + alpha * dx[i];
                        }
                        let f_t = self.eval_fg(timer, &x_t, &mut g_t)?;
                        let merit = f_t + self.barrier(&x_t, &lower, mu) + rho * norm1(&g_t);
                        accepted = Some((f_t, merit));
                    }
                    break accepted.map(|(f_t, merit)| Step {
                        x: x_t,
                        f: f_t,
                        g: g_t,
                        dl: dl.to_vec(),
                        dz,
                        alpha,
                        alpha_d: alpha_d_max,
                        delta_w: reg.delta_w,
                        merit_before: merit0,
                        merit_after: merit,
                    });
                }
            };

            let record =
                |alpha_p: f64, alpha_d: f64, delta_w: f64, mb: f64, ma: f64| IterationRecord {
                    iter,
                    mu,
                    objective: f,
                    primal_inf: res0.primal,
                    dual_inf: res0.dual,
                    kkt_error: res0.error(),
                    delta_w,
                    alpha_primal: alpha_p,
                    alpha_dual: alpha_d,
                    merit_before: mb,
                    merit_after: ma,
                };

            match step {
                Some(s) => {
                    trace.push(record(
                        s.alpha,
                        s.alpha_d,
                        s.delta_w,
                        s.merit_before,
                        s.merit_after,
                    ));
                    x = s.x;
                    f = s.f;
                    g = s.g;
                    for (l, d) in lambda.iter_mut().zip(&s.dl) {
                        *l += s.alpha * d;
                    }
                    for i in 0..n {
                        if bounded[i] {
                            let zi = z[i] + s.alpha_d * s.dz[i];
                            let si = x[i] - lower[i];
                            z[i] = zi.min(KAPPA_SIGMA * mu / si).max(mu / (KAPPA_SIGMA * si));
                        }
                    }
                    iter += 1;
                    let theta = norm_inf(&g);
                    if theta <= opts.tol || theta < 0.99 * best_theta {
                        best_theta = theta;
                        stall = 0;
                    } else {
                        stall += 1;
                    }
                }
                None if !self.allow_restoration => {
                    status = Status::Infeasible;
                    final_res = res0;
                    break;
                }
                None => {
                    trace.push(record(0.0, 0.0, last_delta, f64::NAN, f64::NAN));
                    stall = 0;
                    let theta0 = norm1(&g);
                    let mut x0r = x.clone();
                    x0r.extend_from_slice(&g);
                    let resto_model = Restoration { inner: model };
                    let resto = Run {
                        model: &resto_model,
                        opts,
                        start: self.start,
                        max_iter: opts.restoration_iter,
                        allow_restoration: false,
                    };
                    let out = resto.solve(timer, x0r, mu)?;
                    iter += out.iterations;
                    restorations += 1;
                    let x_new = out.x[..n].to_vec();
                    let mut g_new = vec![0.0; m];
                    let f_new = match self.eval_fg(timer, &x_new, &mut g_new) {
                        Ok(v) => v,
                        Err(e) if is_recoverable(&e) => f64::NAN,
                        Err(e) => return Err(e),
                    };
                    if !(f_new.is_finite() && norm1(&g_new) <= 0.5 * theta0) {
                        status = Status::Infeasible;
                        final_res = res0;
                        break;
                    }
                    x = x_new;
                    f = f_new;
                    g = g_new;
                    best_theta = norm_inf(&g);
                    lambda.iter_mut().for_each(|l| *l = 0.0);
                    for i in 0..n {
                        if bounded[i] {
                            z[i] = mu / (x[i] - lower[i]);
                        }
                    }
                }
            }
        }

        Ok(Outcome {
            status,
            objective: f,
            kkt_error: final_res.error(),
            primal_inf: final_res.primal,
            x,
            lambda,
            z,
            iterations: iter,
            restorations,
            trace,
        })
    }
}

struct Step {
    x: Vec<f64>,
    f: f64,
    g: Vec<f64>,
    dl: Vec<f64>,
    dz: Vec<f64>,
    alpha: f64,
    alpha_d: f64,
    delta_w: f64,
    merit_before: f64,
    merit_after: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clock::NullClock;
    use crate::nlp::{ConstraintBlock, QuadraticObjective};

    fn run(p: &NlpProblem) -> IpmResult {
        solve_with_clock(p, &IpmOptions::default(), &NullClock).unwrap()
    }

    #[test]
    fn interior_minimum_of_shifted_square() {
        // (x - 1)² = x² - 2x + 1
        let mut p = NlpProblem::new();
        p.add_var("x", 0.0, 0.0);
        p.set_objective(QuadraticObjective::new(1.0, vec![(0, -2.0)], vec![(0, 0, 2.0)]).unwrap())
            .unwrap();
        let r = run(&p);
        assert_eq!(r.status, Status::Optimal);
        assert!((r.x[0] - 1.0).abs() < 1e-6);
        assert!(r.objective.abs() < 1e-10);
        assert!(r.lambda.is_empty());
    }

    #[test]
    fn linear_program_on_simplex_edge() {
        let mut p = NlpProblem::new();
        p.add_vars("x", 0.0, &[0.0, 0.0]);
        p.set_objective(QuadraticObjective::linear(vec![(0, 1.0), (1, 1.0)]))
            .unwrap();
        p.add_block(ConstraintBlock::linear(
            "sum",
            vec![0, 1],
            vec![vec![(0, 1.0), (1, 1.0)]],
            vec![-1.0],
        ))
        .unwrap();
        let r = run(&p);
        assert_eq!(r.status, Status::Optimal);
        assert!((r.objective - 1.0).abs() < 1e-6);
    }

    #[test]
    fn fraction_to_boundary_arithmetic() {
        let a = fraction_to_boundary(&[0.1], &[-1.0], &[true], 0.995);
        assert!((a - 0.0995).abs() < 1e-15);
        assert_eq!(fraction_to_boundary(&[0.1], &[1.0], &[true], 0.995), 1.0);
        assert_eq!(fraction_to_boundary(&[0.1], &[-1.0], &[false], 0.995), 1.0);
    }

    #[test]
    fn barrier_sequence_is_monotone_and_follows_schedule() {
        let mut p = NlpProblem::new();
        p.add_vars("x", 0.0, &[0.5, 0.5, 0.5]);
        p.set_objective(QuadraticObjective::linear(vec![
            (0, 1.0),
            (1, 2.0),
            (2, 3.0),
        ]))
        .unwrap();
        p.add_block(ConstraintBlock::linear(
            "sum",
            vec![0, 1, 2],
            vec![vec![(0, 1.0), (1, 1.0), (2, 1.0)]],
            vec![-1.0],
        ))
        .unwrap();
        let opts = IpmOptions::default();
        let r = run(&p);
        assert_eq!(r.status, Status::Optimal);
        assert!((r.objective - 1.0).abs() < 1e-5);
        let mus: Vec<f64> = r.trace.iter().map(|t| t.mu).collect();
        for w in mus.windows(2) {
            assert!(w[1] <= w[0]);
            if w[1] < w[0] {
                // one or more schedule applications
                let mut m = w[0];
                while m > w[1] {
                    m = opts.next_mu(m);
                }
                assert_eq!(m, w[1]);
            }
        }
    }

    #[test]
    fn solves_are_deterministic() {
        let mut p = NlpProblem::new();
        p.add_vars("x", 0.0, &[0.2, 0.7]);
        p.set_objective(
            QuadraticObjective::new(
                0.0,
                vec![(0, -1.0), (1, -0.5)],
                vec![(0, 0, 2.0), (1, 0, 0.5), (1, 1, 1.0)],
            )
            .unwrap(),
        )
        .unwrap();
        let a = run(&p);
        let b = run(&p);
        assert_eq!(a.trace, b.trace);
        assert_eq!(a.x, b.x);
    }

    #[test]
    fn iterates_stay_interior() {
        let mut p = NlpProblem::new();
        p.add_vars("x", 0.0, &[3.0, 3.0]);
        // minimize (x0 + 1)² + (x1 + 1)² over x ≥ 0: solution on the bounds
        p.set_objective(
            QuadraticObjective::new(
                2.0,
                vec![(0, 2.0), (1, 2.0)],
                vec![(0, 0, 2.0), (1, 1, 2.0)],
            )
            .unwrap(),
        )
        .unwrap();
        let r = run(&p);
        assert_eq!(r.status, Status::Optimal);
        assert!(r.x.iter().all(|&v| v > 0.0 && v < 1e-5));
        assert!(r.z.iter().all(|&v| v > 0.0));
    }
}
