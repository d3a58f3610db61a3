//! Solving the benchmark problems and re-verifying their solutions.

use graybox_core::formulations::{formulation_stats, Formulation, FormulationStats};
use graybox_core::ipm::{kkt_residuals, solve, IpmOptions, IpmResult, SolveTiming, Status};
use graybox_core::nlp::NlpProblem;
use graybox_core::problems::{build_adversarial, build_dispatch, AdversarialSpec, DispatchSpec};
use serde::{Deserialize, Serialize};

use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub problem: String,
    pub formulation: Formulation,
    pub status: Status,
    pub objective: f64,
    pub iterations: usize,
    /// KKT error recomputed from fresh oracle calls at the returned point.
    pub kkt_error: f64,
    /// Largest constraint residual from a fresh evaluation at the returned point.
    pub max_residual: f64,
    pub restorations: usize,
    pub timing: SolveTiming,
    pub stats: FormulationStats,
    /// Image for adversarial problems, generation for dispatch problems.
    pub solution: Vec<f64>,
    /// Network output at `solution`, from a fresh forward pass.
    pub nn_output: Vec<f64>,
    /// The problem was trivial at its reference point.
    #[serde(default)]
    pub degenerate: bool,
}

struct Checked {
    kkt_error: f64,
    max_residual: f64,
}

fn verify(problem: &NlpProblem, r: &IpmResult) -> Result<Checked> {
    let res = kkt_residuals(problem, &r.x, &r.lambda, &r.z, 0.0)?;
    let mut g = vec![0.0; problem.n_con()];
    problem.eval_constraints(&r.x, &mut g)?;
    Ok(Checked {
        kkt_error: res.error(),
        max_residual: g.iter().fold(0.0f64, |m, v| m.max(v.abs())),
    })
}

pub fn solve_adversarial(spec: &AdversarialSpec, opts: &IpmOptions) -> Result<SolveReport> {
    let built = build_adversarial(spec)?;
    let stats = formulation_stats(&built.problem);
    let r = solve(&built.problem, opts)?;
    let check = verify(&built.problem, &r)?;
    let image = built.image(&r.x).to_vec();
    let nn_output = spec.classifier.forward(&image)?;
    Ok(SolveReport {
        problem: "adversarial".into(),
        formulation: spec.formulation,
        status: r.status,
        objective: r.objective,
        iterations: r.iterations,
        kkt_error: check.kkt_error,
        max_residual: check.max_residual,
        restorations: r.restorations,
        timing: r.timing,
        stats,
        solution: image,
        nn_output,
        degenerate: built.degenerate,
    })
}

pub fn solve_dispatch(spec: &DispatchSpec, opts: &IpmOptions) -> Result<SolveReport> {
    let built = build_dispatch(spec)?;
    let stats = formulation_stats(&built.problem);
    let r = solve(&built.problem, opts)?;
    let check = verify(&built.problem, &r)?;
    let p = built.generation(&r.x).to_vec();
    let input: Vec<f64> = p.iter().chain(&spec.data.demand).copied().collect();
    let nn_output = spec.surrogate.forward(&input)?;
    Ok(SolveReport {
        problem: "dispatch".into(),
        formulation: spec.formulation,
        status: r.status,
        objective: r.objective,
        iterations: r.iterations,
        kkt_error: check.kkt_error,
        max_residual: check.max_residual,
        restorations: r.restorations,
        timing: r.timing,
        stats,
        solution: p,
        nn_output,
        degenerate: false,
    })
}
