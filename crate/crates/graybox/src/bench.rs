//! Formulation-comparison sweeps.

use std::io::Write;
use std::path::{Path, PathBuf};

use graybox_core::formulations::Formulation;
use graybox_core::ipm::{IpmOptions, Status};
use graybox_core::problems::{
    adversarial_for, seeded_adversarial, seeded_dispatch, seeded_dispatch_data, DispatchSpec,
};
use graybox_core::NeuralNet;
use serde::{Deserialize, Serialize};

use crate::error::{IoError, Result};
use crate::solve::{solve_adversarial, solve_dispatch, SolveReport};
use crate::weights::load_net;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    #[serde(default)]
    pub seed: u64,
    /// Seeded instances per net; instance `k` uses seed `seed + k`.
    #[serde(default = "one")]
    pub instances: u64,
    #[serde(default = "both")]
    pub formulations: Vec<Formulation>,
    #[serde(default = "cpu")]
    pub platform: String,
    #[serde(default)]
    pub tol: Option<f64>,
    #[serde(default)]
    pub max_iter: Option<usize>,
    #[serde(default)]
    pub time_limit_s: Option<f64>,
    #[serde(default)]
    pub adversarial: Option<AdversarialBench>,
    #[serde(default)]
    pub dispatch: Option<DispatchBench>,
}

fn one() -> u64 {
    1
}

fn both() -> Vec<Formulation> {
    Formulation::ALL.to_vec()
}

fn cpu() -> String {
    "cpu".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdversarialBench {
    #[serde(default = "pixels")]
    pub inputs: usize,
    #[serde(default = "classes")]
    pub classes: usize,
    pub nets: Vec<NetSource>,
}

fn pixels() -> usize {
    64
}

fn classes() -> usize {
    10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DispatchBench {
    #[serde(default = "ten")]
    pub n_gen: usize,
    #[serde(default = "ten")]
    pub n_demand: usize,
    #[serde(default = "buses")]
    pub n_bus: usize,
    pub nets: Vec<NetSource>,
}

fn ten() -> usize {
    10
}

fn buses() -> usize {
    8
}

/// A network given by hidden widths (seeded) or by a weight file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NetSource {
    Hidden { hidden: Vec<usize> },
    Weights { weights: PathBuf },
}

impl BenchConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.platform != "cpu" {
            return Err(IoError::Malformed(format!(
                "unsupported platform '{}'",
                self.platform
            )));
        }
        if self.formulations.is_empty() {
            return Err(IoError::Malformed("no formulations requested".into()));
        }
        if self.instances == 0 {
            return Err(IoError::Malformed("instances must be positive".into()));
        }
        self.options().validate()?;
        Ok(())
    }

    pub fn options(&self) -> IpmOptions {
        let mut o = IpmOptions::default();
        if let Some(t) = self.tol {
            o.tol = t;
        }
        if let Some(m) = self.max_iter {
            o.max_iter = m;
        }
        if let Some(t) = self.time_limit_s {
            o.time_limit_s = t;
        }
        o
    }
}

/// One solve. Column order is the CSV column order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub problem: String,
    pub formulation: Formulation,
    pub nn_params: usize,
    pub solve_time_s: f64,
    pub iterations: usize,
    pub time_per_iter_s: f64,
    pub objective: Option<f64>,
    pub pct_function: f64,
    pub pct_jacobian: f64,
    pub pct_hessian: f64,
    pub pct_solver: f64,
    pub n_var: usize,
    pub n_con: usize,
    pub jac_nnz: usize,
    pub hess_nnz: usize,
    pub status: String,
    pub kkt_error: Option<f64>,
    pub max_residual: Option<f64>,
    pub seed: u64,
    pub net: String,
}

impl BenchRow {
    pub fn is_optimal(&self) -> bool {
        self.status == Status::Optimal.as_str()
    }

    /// The row with every wall-time column zeroed.
    pub fn without_timings(&self) -> Self {
        Self {
            solve_time_s: 0.0,
            time_per_iter_s: 0.0,
            pct_function: 0.0,
            pct_jacobian: 0.0,
            pct_hessian: 0.0,
            pct_solver: 0.0,
            ..self.clone()
        }
    }

    /// Name of the largest of the four timing categories.
    pub fn dominant_category(&self) -> &'static str {
        let cats = [
            ("function", self.pct_function),
            ("jacobian", self.pct_jacobian),
            ("hessian", self.pct_hessian),
            ("solver", self.pct_solver),
        ];
        let best = cats
            .iter()
            .fold(cats[0], |a, &b| if b.1 > a.1 { b } else { a });
        if best.1 > 0.0 {
            best.0
        } else {
            "-"
        }
    }

    fn from_report(r: &SolveReport, nn_params: usize, seed: u64, net: String) -> Self {
        let [pf, pj, ph, ps] = r.timing.percentages();
        Self {
            problem: r.problem.clone(),
            formulation: r.formulation,
            nn_params,
            solve_time_s: r.timing.total_s,
            iterations: r.iterations,
            time_per_iter_s: r.timing.total_s / r.iterations.max(1) as f64,
            objective: Some(r.objective),
            pct_function: pf,
            pct_jacobian: pj,
            pct_hessian: ph,
            pct_solver: ps,
            n_var: r.stats.n_var,
            n_con: r.stats.n_con,
            jac_nnz: r.stats.jac_nnz,
            hess_nnz: r.stats.hess_nnz,
            status: r.status.as_str().into(),
            kkt_error: Some(r.kkt_error),
            max_residual: Some(r.max_residual),
            seed,
            net,
        }
    }

    fn failed(
        problem: &str,
        formulation: Formulation,
        nn_params: usize,
        seed: u64,
        net: String,
        err: &IoError,
    ) -> Self {
        Self {
            problem: problem.into(),
            formulation,
            nn_params,
            solve_time_s: 0.0,
            iterations: 0,
            time_per_iter_s: 0.0,
            objective: None,
            pct_function: 0.0,
            pct_jacobian: 0.0,
            pct_hessian: 0.0,
            pct_solver: 0.0,
            n_var: 0,
            n_con: 0,
            jac_nnz: 0,
            hess_nnz: 0,
            status: format!("Error: {err}"),
            kkt_error: None,
            max_residual: None,
            seed,
            net,
        }
    }
}

/// Iteration counts of both formulations on one instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendRow {
    pub problem: String,
    pub net: String,
    pub nn_params: usize,
    pub seed: u64,
    pub full_iterations: usize,
    pub reduced_iterations: usize,
    pub reduced_le_full: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    pub trend: Vec<TrendRow>,
}

impl BenchReport {
    pub fn all_optimal(&self) -> bool {
        self.rows.iter().all(BenchRow::is_optimal)
    }

    pub fn without_timings(&self) -> Self {
        Self {
            rows: self.rows.iter().map(BenchRow::without_timings).collect(),
            trend: self.trend.clone(),
        }
    }

    fn compute_trend(rows: &[BenchRow]) -> Vec<TrendRow> {
        let mut out = Vec::new();
        for full in rows
            .iter()
            .filter(|r| r.formulation == Formulation::FullSpace && r.is_optimal())
        {
            let reduced = rows.iter().find(|r| {
                r.formulation == Formulation::ReducedSpace
                    && r.is_optimal()
                    && r.problem == full.problem
                    && r.net == full.net
                    && r.seed == full.seed
            });
            if let Some(red) = reduced {
                out.push(TrendRow {
                    problem: full.problem.clone(),
                    net: full.net.clone(),
                    nn_params: full.nn_params,
                    seed: full.seed,
                    full_iterations: full.iterations,
                    reduced_iterations: red.iterations,
                    reduced_le_full: red.iterations <= full.iterations,
                });
            }
        }
        out
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut writer = csv::Writer::from_writer(w);
        for row in &self.rows {
            writer.serialize(row)?;
        }
        writer.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn shape(net: &NeuralNet) -> String {
    net.widths()
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("-")
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

/// Runs every cell of `config` in order, calling `on_row` after each solve.
///
/// Relative weight paths are resolved against `base_dir`. Failures of individual cells are
/// recorded in the row's status; only configuration errors abort the sweep.
pub fn run_bench(
    config: &BenchConfig,
    base_dir: &Path,
    mut on_row: impl FnMut(&BenchRow),
) -> Result<BenchReport> {
    config.validate()?;
    let opts = config.options();
    let mut rows = Vec::new();
    let mut push = |row: BenchRow, rows: &mut Vec<BenchRow>| {
        on_row(&row);
        rows.push(row);
    };

    if let Some(adv) = &config.adversarial {
        for source in &adv.nets {
            for k in 0..config.instances {
                let seed = config.seed + k;
                for &f in &config.formulations {
                    let spec = match source {
                        NetSource::Hidden { hidden } => {
                            let mut widths = vec![adv.inputs];
                            widths.extend(hidden);
                            widths.push(adv.classes);
                            seeded_adversarial(&widths, seed, f).map_err(IoError::from)
                        }
                        NetSource::Weights { weights } => load_net(resolve(base_dir, weights))
                            .and_then(|net| adversarial_for(net, seed, f).map_err(IoError::from)),
                    };
                    let row = match spec {
                        Ok(spec) => {
                            let params = spec.classifier.param_count();
                            let net = shape(&spec.classifier);
                            match solve_adversarial(&spec, &opts) {
                                Ok(r) => BenchRow::from_report(&r, params, seed, net),
                                Err(e) => BenchRow::failed("adversarial", f, params, seed, net, &e),
                            }
                        }
                        Err(e) => {
                            BenchRow::failed("adversarial", f, 0, seed, source_label(source), &e)
                        }
                    };
                    push(row, &mut rows);
                }
            }
        }
    }

    if let Some(dis) = &config.dispatch {
        for source in &dis.nets {
            for k in 0..config.instances {
                let seed = config.seed + k;
                for &f in &config.formulations {
                    let spec = match source {
                        NetSource::Hidden { hidden } => {
                            seeded_dispatch(dis.n_gen, dis.n_demand, hidden, dis.n_bus, seed, f)
                                .map_err(IoError::from)
                        }
                        NetSource::Weights { weights } => {
                            load_net(resolve(base_dir, weights)).map(|surrogate| DispatchSpec {
                                surrogate,
                                data: seeded_dispatch_data(dis.n_gen, dis.n_demand, seed),
                                formulation: f,
                            })
                        }
                    };
                    let row = match spec {
                        Ok(spec) => {
                            let params = spec.surrogate.param_count();
                            let net = shape(&spec.surrogate);
                            match solve_dispatch(&spec, &opts) {
                                Ok(r) => BenchRow::from_report(&r, params, seed, net),
                                Err(e) => BenchRow::failed("dispatch", f, params, seed, net, &e),
                            }
                        }
                        Err(e) => {
                            BenchRow::failed("dispatch", f, 0, seed, source_label(source), &e)
                        }
                    };
                    push(row, &mut rows);
                }
            }
        }
    }

    let trend = BenchReport::compute_trend(&rows);
    Ok(BenchReport { rows, trend })
}

fn source_label(source: &NetSource) -> String {
    match source {
        NetSource::Hidden { hidden } => format!("hidden {hidden:?}"),
        NetSource::Weights { weights } => weights.display().to_string(),
    }
}
