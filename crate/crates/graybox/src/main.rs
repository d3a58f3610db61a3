use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use graybox::bench::{run_bench, BenchConfig};
use graybox::image::load_reference_input;
use graybox::solve::{solve_adversarial, solve_dispatch, SolveReport};
use graybox::weights::{load_net, save_net};
use graybox_core::formulations::{embed, formulation_stats, Formulation};
use graybox_core::ipm::IpmOptions;
use graybox_core::nlp::NlpProblem;
use graybox_core::problems::{AdversarialSpec, DispatchData, DispatchSpec};
use graybox_core::{Activation, Layer, Mat, NeuralNet};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Parser)]
#[command(
    name = "graybox",
    version,
    about = "Optimization with embedded neural networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Minimal L1 perturbation that makes a classifier predict a target class.
    SolveAdversarial {
        #[arg(long)]
        weights: PathBuf,
        /// Reference image, CSV or IDX.
        #[arg(long = "ref")]
        reference: PathBuf,
        #[arg(long)]
        target: usize,
        #[arg(long, default_value_t = AdversarialSpec::DEFAULT_CONFIDENCE)]
        confidence: f64,
        #[arg(long, value_parser = parse_formulation, default_value = "reduced")]
        formulation: Formulation,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long)]
        max_iter: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Quadratic-cost dispatch under a frequency surrogate.
    SolveDispatch {
        #[arg(long)]
        weights: PathBuf,
        /// JSON with cost_a, cost_b, cost_c, p_min, p_max, demand and optionally eta.
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, value_parser = parse_formulation, default_value = "reduced")]
        formulation: Formulation,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long)]
        max_iter: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Formulation-comparison sweep.
    Bench {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out_csv: Option<PathBuf>,
        #[arg(long)]
        out_json: Option<PathBuf>,
    },
    /// Writes a seeded random network.
    GenNet {
        /// Input width followed by every layer width, e.g. 16,32,32,3.
        #[arg(long, value_delimiter = ',', required = true)]
        shape: Vec<usize>,
        #[arg(long, value_parser = parse_activation, default_value = "tanh")]
        activation: Activation,
        #[arg(long, value_parser = parse_activation, default_value = "linear")]
        r#final: Activation,
        /// Multiplies the final layer's weights and biases.
        #[arg(long, default_value_t = 1.0)]
        gain: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Structural statistics of a network embedded over free input variables.
    Stats {
        #[arg(long)]
        weights: PathBuf,
        #[arg(long, value_parser = parse_formulation, default_value = "reduced")]
        formulation: Formulation,
    },
}

fn parse_formulation(s: &str) -> Result<Formulation, String> {
    Formulation::from_name(s)
        .ok_or_else(|| format!("unknown formulation '{s}' (expected full or reduced)"))
}

fn parse_activation(s: &str) -> Result<Activation, String> {
    Activation::from_name(s).ok_or_else(|| format!("unknown activation '{s}'"))
}

fn options(tol: f64, max_iter: Option<usize>) -> anyhow::Result<IpmOptions> {
    let mut o = IpmOptions {
        tol,
        ..IpmOptions::default()
    };
    if let Some(m) = max_iter {
        o.max_iter = m;
    }
    o.validate()?;
    Ok(o)
}

fn emit(report: &SolveReport, out: Option<&Path>) -> anyhow::Result<bool> {
    let json = serde_json::to_string_pretty(report)?;
    match out {
        Some(path) => {
            fs::write(path, json).with_context(|| format!("writing {}", path.display()))?
        }
        None => println!("{json}"),
    }
    eprintln!(
        "{} ({}): {} after {} iterations, objective {:.8e}, kkt error {:.2e}, {:.3}s",
        report.problem,
        report.formulation.name(),
        report.status.as_str(),
        report.iterations,
        report.objective,
        report.kkt_error,
        report.timing.total_s
    );
    Ok(report.status.is_optimal())
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    match cli.command {
        Command::SolveAdversarial {
            weights,
            reference,
            target,
            confidence,
            formulation,
            tol,
            max_iter,
            out,
        } => {
            let spec = AdversarialSpec {
                classifier: load_net(&weights)
                    .with_context(|| format!("loading {}", weights.display()))?,
                x_ref: load_reference_input(&reference)
                    .with_context(|| format!("loading {}", reference.display()))?,
                target,
                confidence,
                formulation,
            };
            spec.validate()?;
            if spec.is_degenerate()? {
                eprintln!("warning: the reference image already reaches the target confidence; x_ref is optimal");
            }
            let report = solve_adversarial(&spec, &options(tol, max_iter)?)?;
            emit(&report, out.as_deref())
        }
        Command::SolveDispatch {
            weights,
            spec,
            formulation,
            tol,
            max_iter,
            out,
        } => {
            let text =
                fs::read_to_string(&spec).with_context(|| format!("reading {}", spec.display()))?;
            let data: DispatchData = serde_json::from_str(&text)
                .with_context(|| format!("parsing {}", spec.display()))?;
            let spec = DispatchSpec {
                surrogate: load_net(&weights)
                    .with_context(|| format!("loading {}", weights.display()))?,
                data,
                formulation,
            };
            let report = solve_dispatch(&spec, &options(tol, max_iter)?)?;
            emit(&report, out.as_deref())
        }
        Command::Bench {
            config,
            out_csv,
            out_json,
        } => {
            let text = fs::read_to_string(&config)
                .with_context(|| format!("reading {}", config.display()))?;
            let cfg = BenchConfig::from_json(&text)?;
            let base = config.parent().map(Path::to_path_buf).unwrap_or_default();
            let report = run_bench(&cfg, &base, |row| {
                eprintln!(
                    "{:<12} {:<8} {:>16} params {:>7} seed {:>3}: {:<10} it {:>4} obj {:>14} {:>9.3}s  dominant {}",
                    row.problem,
                    row.formulation.name(),
                    row.net,
                    row.nn_params,
                    row.seed,
                    row.status,
                    row.iterations,
                    row.objective.map_or("-".into(), |o| format!("{o:.8e}")),
                    row.solve_time_s,
                    row.dominant_category()
                );
            })?;
            for t in &report.trend {
                eprintln!(
                    "trend {:<12} {:>16} seed {:>3}: full {:>4} reduced {:>4} reduced<=full {}",
                    t.problem,
                    t.net,
                    t.seed,
                    t.full_iterations,
                    t.reduced_iterations,
                    t.reduced_le_full
                );
            }
            match &out_csv {
                Some(p) => report.write_csv(fs::File::create(p)?)?,
                None if out_json.is_none() => report.write_csv(std::io::stdout())?,
                None => {}
            }
            if let Some(p) = &out_json {
                fs::write(p, report.to_json())?;
            }
            Ok(report.all_optimal())
        }
        Command::GenNet {
            shape,
            activation,
            r#final,
            gain,
            seed,
            out,
        } => {
            if !activation.is_elementwise() {
                bail!("softmax is only allowed as the final activation");
            }
            let net = NeuralNet::random(
                &shape,
                activation,
                r#final,
                &mut ChaCha8Rng::seed_from_u64(seed),
            )?;
            let net = if gain == 1.0 {
                net
            } else {
                scale_output(net, gain)?
            };
            save_net(&net, &out)?;
            eprintln!(
                "wrote {} parameters to {}",
                net.param_count(),
                out.display()
            );
            Ok(true)
        }
        Command::Stats {
            weights,
            formulation,
        } => {
            let net = load_net(&weights)?;
            let mut p = NlpProblem::new();
            let x: Vec<usize> = p
                .add_vars("x", f64::NEG_INFINITY, &vec![0.0; net.input_dim()])
                .collect();
            embed(&mut p, &net, &x, formulation)?;
            let s = formulation_stats(&p);
            println!("{}", serde_json::to_string_pretty(&s)?);
            Ok(true)
        }
    }
}

fn scale_output(net: NeuralNet, gain: f64) -> anyhow::Result<NeuralNet> {
    let mut layers = net.into_layers();
    let last = layers.pop().expect("nonempty network");
    let w = last.weight();
    let data = w.as_slice().iter().map(|a| a * gain).collect();
    let bias = last.bias().iter().map(|b| b * gain).collect();
    layers.push(Layer::new(
        Mat::from_vec(w.rows(), w.cols(), data)?,
        bias,
        last.activation(),
    )?);
    Ok(NeuralNet::new(layers)?)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
