//! Command-line front end: binds every experiment to a reproducible config
//! and emits machine-readable results (JSON, per-sample CSV, optional static
//! SVG plots).

use crate::channel::Channel;
use crate::coding;
use crate::decouple::{self, CorollaryKind, CorollaryParams, SamplerKind};
use crate::entropy::{self, EntropyKind, SmoothingStrategy};
use crate::error::{Error, Result};
use crate::locking;
use crate::qobj::{self, QObj};
use crate::random::{self, Sampler};
use crate::suite;
use crate::tensor::LabeledSpace;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

pub const SEED_ENV: &str = "QDEC_SEED";

#[derive(Parser, Debug, Serialize, Deserialize)]
#[command(
    name = "qdec",
    about = "Decoupling experiments, one-shot channel codes, entropic optimizers, and locking schemes"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct CommonOpts {
    /// Seed for every random choice (falls back to $QDEC_SEED).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory; results print to stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Primary output format.
    #[arg(long, value_enum, default_value = "json")]
    pub format: OutputFormat,
}

#[derive(Subcommand, Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Entropic quantities of a state loaded from QOBJ-JSON.
    Entropy {
        /// hmin | h2 | hmax | vn
        #[arg(long)]
        kind: String,
        /// Conditioning labels, comma separated.
        #[arg(long, default_value = "")]
        cond: String,
        /// Smoothing radius.
        #[arg(long, default_value_t = 0.0)]
        eps: f64,
        /// Input state (QOBJ-JSON).
        #[arg(long = "in")]
        input: PathBuf,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Monte-Carlo decoupling experiment for a named corollary.
    Decouple {
        /// fqsw | merge | subspace | projective-merge
        #[arg(long)]
        corollary: String,
        #[arg(long, default_value_t = 4)]
        dim_a: usize,
        /// |A1| (fqsw), |E| (merge, subspace), |E1| (projective-merge).
        #[arg(long, default_value_t = 2)]
        split: usize,
        /// |E2| for projective-merge.
        #[arg(long, default_value_t = 1)]
        split2: usize,
        #[arg(long, default_value_t = 2)]
        dim_r: usize,
        /// Rank of the random input state.
        #[arg(long, default_value_t = 1)]
        rank: usize,
        #[arg(long, default_value_t = 500)]
        samples: usize,
        /// haar | clifford
        #[arg(long, default_value = "haar")]
        sampler: String,
        /// Also write a static SVG histogram of the per-sample values.
        #[arg(long, default_value_t = false)]
        svg: bool,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Constructive one-shot codes.
    Code {
        #[command(subcommand)]
        task: CodeTask,
    },
    /// Rate-region evaluation.
    Rate {
        #[command(subcommand)]
        task: RateTask,
    },
    /// Locking scheme construction and adversarial measurement search.
    Lock {
        #[arg(long, default_value_t = 16)]
        messages: usize,
        #[arg(long, default_value_t = 8)]
        dim_c: usize,
        #[arg(long, default_value_t = 2)]
        dim_k: usize,
        #[arg(long, default_value_t = 64)]
        restarts: usize,
        #[arg(long, default_value_t = 1200)]
        iterations: usize,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Haar / Clifford second-moment experiment.
    Moments {
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        /// Also run the exact Clifford group average (dim 2 or 4).
        #[arg(long, default_value_t = false)]
        clifford_exact: bool,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Acceptance suite: one pass/fail line per criterion.
    Suite {
        /// Run everything (default when no criterion is given).
        #[arg(long, default_value_t = false)]
        all: bool,
        /// Run a single criterion by number (1..=10).
        #[arg(long)]
        criterion: Option<usize>,
        #[command(flatten)]
        common: CommonOpts,
    },
}

#[derive(Subcommand, Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CodeTask {
    /// Plain one-shot code through a CHAN-JSON channel.
    Oneshot {
        #[arg(long)]
        channel: PathBuf,
        /// Input ψ (QOBJ-JSON, pure).
        #[arg(long)]
        state: PathBuf,
        /// Input distribution σ (QOBJ-JSON, pure).
        #[arg(long)]
        sigma: PathBuf,
        /// Message labels inside ψ, comma separated.
        #[arg(long)]
        message: String,
        /// Receiver-side labels inside ψ, comma separated.
        #[arg(long, default_value = "")]
        bob: String,
        #[arg(long, default_value_t = 0.0)]
        eps: f64,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// One-shot code with side information at the transmitter.
    Sideinfo {
        #[arg(long)]
        channel: PathBuf,
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        sigma: PathBuf,
        /// Side-information state φ (QOBJ-JSON, pure, labels [S, S']).
        #[arg(long)]
        phi: PathBuf,
        #[arg(long)]
        message: String,
        #[arg(long, default_value = "")]
        bob: String,
        /// Channel-state label.
        #[arg(long, default_value = "S")]
        s_label: String,
        /// Discarded labels inside σ, comma separated.
        #[arg(long, default_value = "")]
        discard: String,
        #[arg(long, default_value_t = 0.0)]
        eps: f64,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// One-shot broadcast code to two receivers.
    Broadcast {
        #[arg(long)]
        channel: PathBuf,
        /// ψ₁ (QOBJ-JSON, pure).
        #[arg(long)]
        state1: PathBuf,
        /// ψ₂ (QOBJ-JSON, pure).
        #[arg(long)]
        state2: PathBuf,
        #[arg(long)]
        sigma: PathBuf,
        #[arg(long)]
        message1: String,
        #[arg(long)]
        message2: String,
        #[arg(long, default_value = "")]
        bob1: String,
        #[arg(long, default_value = "")]
        bob2: String,
        /// σ labels matching the first/second message.
        #[arg(long)]
        app1: String,
        #[arg(long)]
        app2: String,
        /// Channel outputs for receiver 1 / 2.
        #[arg(long)]
        c1: String,
        #[arg(long)]
        c2: String,
        #[arg(long, default_value = "")]
        discard: String,
        #[arg(long, default_value_t = 0.0)]
        eps: f64,
        #[command(flatten)]
        common: CommonOpts,
    },
}

#[derive(Subcommand, Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RateTask {
    /// Evaluate a rate region on a given (or optimized) input.
    Region {
        /// ea | sideinfo | marton
        #[arg(long)]
        kind: String,
        #[arg(long)]
        channel: PathBuf,
        /// Input σ (QOBJ-JSON); required unless --optimize.
        #[arg(long)]
        sigma: Option<PathBuf>,
        /// φ for sideinfo (QOBJ-JSON pure).
        #[arg(long)]
        phi: Option<PathBuf>,
        #[arg(long, default_value = "S")]
        s_label: String,
        /// Labels for marton: message/output splits, comma separated.
        #[arg(long, default_value = "")]
        a1: String,
        #[arg(long, default_value = "")]
        a2: String,
        #[arg(long, default_value = "")]
        c1: String,
        #[arg(long, default_value = "")]
        c2: String,
        /// Run the local capacity search instead of a fixed σ.
        #[arg(long, default_value_t = false)]
        optimize: bool,
        #[arg(long, default_value_t = 32)]
        restarts: usize,
        #[arg(long, default_value_t = 1000)]
        iterations: usize,
        /// Message dimension for the sideinfo search.
        #[arg(long, default_value_t = 2)]
        dim_a: usize,
        /// Purifier dimension for the sideinfo search (1 = pure σ).
        #[arg(long, default_value_t = 4)]
        dim_dprime: usize,
        #[command(flatten)]
        common: CommonOpts,
    },
}

/// Reproducible experiment record written next to every result.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ExperimentConfig {
    pub command: String,
    pub seed: u64,
    pub inputs: Vec<String>,
    pub samples: Option<usize>,
    pub eps: Option<f64>,
    pub out_dir: Option<String>,
}

fn resolve_seed(opt: &Option<u64>) -> Result<u64> {
    if let Some(s) = opt {
        return Ok(*s);
    }
    if let Ok(v) = std::env::var(SEED_ENV) {
        return v
            .parse()
            .map_err(|_| Error::InvalidState(format!("{SEED_ENV} is not a u64: {v}")));
    }
    Err(Error::InvalidState(format!(
        "a seed is mandatory for stochastic commands: pass --seed or set {SEED_ENV}"
    )))
}

fn parse_labels(arg: &str) -> Vec<&str> {
    arg.split(',').map(str::trim).filter(|s| !s.is_empty()).collect()
}

fn emit(common: &CommonOpts, stem: &str, json: &serde_json::Value) -> Result<()> {
    let text = serde_json::to_string_pretty(json)?;
    match &common.out {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            std::fs::write(dir.join(format!("{stem}.json")), text + "\n")?;
        }
        None => println!("{text}"),
    }
    Ok(())
}

fn emit_csv(common: &CommonOpts, stem: &str, header: &str, rows: &[String]) -> Result<()> {
    let mut body = String::from(header);
    body.push('\n');
    for r in rows {
        body.push_str(r);
        body.push('\n');
    }
    match &common.out {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            std::fs::write(dir.join(format!("{stem}.csv")), body)?;
        }
        None => print!("{body}"),
    }
    Ok(())
}

/// Minimal static SVG histogram.
fn histogram_svg(samples: &[f64], rhs: f64) -> String {
    let bins = 24usize;
    let max_x = samples.iter().cloned().fold(rhs, f64::max).max(1e-12) * 1.05;
    let mut counts = vec![0usize; bins];
    for &s in samples {
        let b = ((s / max_x) * bins as f64).floor() as usize;
        counts[b.min(bins - 1)] += 1;
    }
    let max_c = counts.iter().copied().max().unwrap_or(1).max(1);
    let (w, h, pad) = (480.0, 240.0, 30.0);
    let bw = (w - 2.0 * pad) / bins as f64;
    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n"
    ));
    out.push_str(&format!(
        "<line x1=\"{pad}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
        h - pad,
        w - pad,
        h - pad
    ));
    for (i, &c) in counts.iter().enumerate() {
        let bh = (h - 2.0 * pad) * c as f64 / max_c as f64;
        out.push_str(&format!(
            "<rect x=\"{:.1}\" y=\"{:.1}\" width=\"{:.1}\" height=\"{:.1}\" fill=\"steelblue\"/>\n",
            pad + i as f64 * bw,
            h - pad - bh,
            bw * 0.9,
            bh
        ));
    }
    let rx = pad + (rhs / max_x) * (w - 2.0 * pad);
    out.push_str(&format!(
        "<line x1=\"{rx:.1}\" y1=\"{pad}\" x2=\"{rx:.1}\" y2=\"{}\" stroke=\"crimson\" stroke-dasharray=\"4\"/>\n",
        h - pad
    ));
    out.push_str(&format!(
        "<text x=\"{pad}\" y=\"{}\" font-size=\"10\">0</text>\n<text x=\"{}\" y=\"{}\" font-size=\"10\">{max_x:.3}</text>\n",
        h - pad + 12.0,
        w - pad - 20.0,
        h - pad + 12.0
    ));
    out.push_str("</svg>\n");
    out
}

fn code_artifact_json(art: &coding::CodeArtifact) -> serde_json::Value {
    serde_json::json!({
        "delta1": art.delta1,
        "delta2": art.delta2,
        "delta_enc": art.delta_enc,
        "achieved": art.achieved,
        "theorem_bound": art.theorem_bound,
        "certified": art.certified(),
        "decoupling_achieved": art.decoupling_achieved,
        "samples_used": art.samples_used,
        "encoder": {
            "in": art.encoder.in_space().systems(),
            "out": art.encoder.out_space().systems(),
            "partial_isometry_deviation": art.encoder.partial_isometry_deviation(),
        },
        "decoders": art.decoders.iter().map(|d| serde_json::json!({
            "in": d.in_space().systems(),
            "out": d.out_space().systems(),
        })).collect::<Vec<_>>(),
    })
}

/// Runs a parsed command. Exit semantics: `Ok(0)` all declared bound checks
/// passed, `Ok(1)` a bound check failed, errors map to exit 2 in `main`.
pub fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Entropy {
            kind,
            cond,
            eps,
            input,
            common,
        } => {
            let obj = qobj::read_qobj(&input)?;
            let rho = obj.to_state()?;
            let cond_labels = parse_labels(&cond);
            let entropy_kind = match kind.as_str() {
                "hmin" => Some(EntropyKind::Min),
                "h2" => Some(EntropyKind::Two),
                "hmax" => Some(EntropyKind::Max),
                "vn" => None,
                other => {
                    return Err(Error::InvalidState(format!(
                        "unknown entropy kind {other} (hmin|h2|hmax|vn)"
                    )))
                }
            };
            let report = match entropy_kind {
                None => {
                    let a: Vec<&str> = rho
                        .space()
                        .labels()
                        .into_iter()
                        .filter(|l| !cond_labels.contains(l))
                        .collect();
                    if cond_labels.is_empty() {
                        entropy::von_neumann(&rho, &a)?
                    } else {
                        entropy::conditional_entropy(&rho, &a, &cond_labels)?
                    }
                }
                Some(k) => {
                    let sm = entropy::smooth(k, &rho, &cond_labels, eps, SmoothingStrategy::Best)?;
                    sm.report
                }
            };
            let config = ExperimentConfig {
                command: "entropy".into(),
                seed: 0,
                inputs: vec![input.display().to_string()],
                samples: None,
                eps: Some(eps),
                out_dir: common.out.as_ref().map(|p| p.display().to_string()),
            };
            emit(
                &common,
                "entropy",
                &serde_json::json!({ "config": config, "report": report }),
            )?;
            Ok(0)
        }
        Command::Decouple {
            corollary,
            dim_a,
            split,
            split2,
            dim_r,
            rank,
            samples,
            sampler,
            svg,
            common,
        } => {
            let seed = resolve_seed(&common.seed)?;
            let kind = match corollary.as_str() {
                "fqsw" => CorollaryKind::Fqsw,
                "merge" => CorollaryKind::Merge,
                "subspace" => CorollaryKind::Subspace,
                "projective-merge" => CorollaryKind::ProjectiveMerge,
                other => {
                    return Err(Error::InvalidState(format!(
                        "unknown corollary {other} (fqsw|merge|subspace|projective-merge)"
                    )))
                }
            };
            let sampler_kind = match sampler.as_str() {
                "haar" => SamplerKind::Haar,
                "clifford" => SamplerKind::Clifford,
                other => {
                    return Err(Error::InvalidState(format!(
                        "unknown sampler {other} (haar|clifford)"
                    )))
                }
            };
            let params = CorollaryParams {
                kind,
                dim_a,
                split,
                split2,
                dim_r,
            };
            let mut rng = Sampler::new(seed);
            let run = decouple::corollary_run(&params, rank, sampler_kind, samples, &mut rng)?;
            let config = ExperimentConfig {
                command: format!("decouple {corollary}"),
                seed,
                inputs: vec![],
                samples: Some(samples),
                eps: Some(0.0),
                out_dir: common.out.as_ref().map(|p| p.display().to_string()),
            };
            let passed = run.experiment.bound_satisfied();
            emit(
                &common,
                "decouple",
                &serde_json::json!({ "config": config, "run": run }),
            )?;
            let rows: Vec<String> = run
                .experiment
                .samples
                .iter()
                .enumerate()
                .map(|(i, v)| format!("{i},{v}"))
                .collect();
            emit_csv(&common, "decouple_samples", "sample,lhs", &rows)?;
            if svg {
                if let Some(dir) = &common.out {
                    std::fs::write(
                        dir.join("decouple_hist.svg"),
                        histogram_svg(&run.experiment.samples, run.experiment.rhs),
                    )?;
                }
            }
            Ok(if passed { 0 } else { 1 })
        }
        Command::Code { task } => run_code(task),
        Command::Rate { task } => run_rate(task),
        Command::Lock {
            messages,
            dim_c,
            dim_k,
            restarts,
            iterations,
            common,
        } => {
            let seed = resolve_seed(&common.seed)?;
            let mut rng = Sampler::new(seed);
            let scheme = locking::build_scheme(messages, dim_c, dim_k, &mut rng)?;
            let pairwise = scheme.pairwise_min_distance()?;
            let (out, _) = locking::leakage(&scheme, restarts, iterations, &mut rng)?;
            let iacc = locking::accessible_info_bound(out.value, messages);
            let config = ExperimentConfig {
                command: "lock".into(),
                seed,
                inputs: vec![],
                samples: Some(restarts * iterations),
                eps: None,
                out_dir: common.out.as_ref().map(|p| p.display().to_string()),
            };
            let passed = (pairwise - 2.0).abs() < 1e-8 && iacc >= out.mutual_information - 1e-9;
            emit(
                &common,
                "lock",
                &serde_json::json!({
                    "config": config,
                    "leakage": out.value,
                    "iacc_bound": iacc,
                    "measured_mutual_information": out.mutual_information,
                    "pairwise_min_distance": pairwise,
                }),
            )?;
            Ok(if passed { 0 } else { 1 })
        }
        Command::Moments {
            dim,
            samples,
            clifford_exact,
            common,
        } => {
            let seed = resolve_seed(&common.seed)?;
            let mut rng = Sampler::new(seed);
            let m = random::random_matrix::<f64>(dim * dim, dim * dim, &mut rng);
            let (alpha, beta, expect) = random::haar_second_moment(&m)?;
            let mut draw = rng.fork();
            let (mean, sem) = random::second_moment_mc(&m, dim, samples, move || {
                random::haar_unitary::<f64>(dim, &mut draw)
            });
            let err = (&mean - &expect).norm();
            let sigma = sem.norm().max(1e-300);
            let clifford_dev = if clifford_exact {
                let q = match dim {
                    2 => 1,
                    4 => 2,
                    _ => {
                        return Err(Error::Unsupported(
                            "exact Clifford average needs dim 2 or 4".into(),
                        ))
                    }
                };
                Some((random::clifford_second_moment(&m, q)? - &expect).norm())
            } else {
                None
            };
            let passed = err <= 3.0 * sigma && clifford_dev.is_none_or(|d| d <= 1e-9);
            let config = ExperimentConfig {
                command: "moments".into(),
                seed,
                inputs: vec![],
                samples: Some(samples),
                eps: None,
                out_dir: common.out.as_ref().map(|p| p.display().to_string()),
            };
            emit(
                &common,
                "moments",
                &serde_json::json!({
                    "config": config,
                    "alpha": [alpha.re, alpha.im],
                    "beta": [beta.re, beta.im],
                    "mc_error": err,
                    "mc_sigma": sigma,
                    "clifford_deviation": clifford_dev,
                }),
            )?;
            Ok(if passed { 0 } else { 1 })
        }
        Command::Suite {
            all,
            criterion,
            common,
        } => {
            let seed = resolve_seed(&common.seed)?;
            let results = match (all, criterion) {
                (_, Some(id)) => vec![suite::run_criterion(id, seed)?],
                _ => suite::run_all(seed)?,
            };
            for r in &results {
                println!("{}", r.line());
            }
            if let Some(dir) = &common.out {
                std::fs::create_dir_all(dir)?;
                std::fs::write(
                    dir.join("suite.json"),
                    serde_json::to_string_pretty(&results)? + "\n",
                )?;
            }
            Ok(if results.iter().all(|r| r.passed) { 0 } else { 1 })
        }
    }
}

fn load_pure(path: &Path) -> Result<crate::tensor::PureState<f64>> {
    qobj::read_qobj(path)?.to_pure()
}

fn run_code(task: CodeTask) -> Result<i32> {
    match task {
        CodeTask::Oneshot {
            channel,
            state,
            sigma,
            message,
            bob,
            eps,
            common,
        } => {
            let seed = resolve_seed(&common.seed)?;
            let ch = qobj::read_channel(&channel)?;
            let psi = load_pure(&state)?;
            let sig = load_pure(&sigma)?;
            let a = parse_labels(&message);
            let b = parse_labels(&bob);
            let mut rng = Sampler::new(seed);
            let art = coding::oneshot_code(&psi, &a, &b, &ch, &sig, eps, &mut rng)?;
            let config = ExperimentConfig {
                command: "code oneshot".into(),
                seed,
                inputs: vec![
                    channel.display().to_string(),
                    state.display().to_string(),
                    sigma.display().to_string(),
                ],
                samples: Some(art.samples_used),
                eps: Some(eps),
                out_dir: common.out.as_ref().map(|p| p.display().to_string()),
            };
            let passed = !art.certified() || art.achieved <= art.theorem_bound + 1e-9;
            emit(
                &common,
                "code_oneshot",
                &serde_json::json!({ "config": config, "artifact": code_artifact_json(&art) }),
            )?;
            Ok(if passed { 0 } else { 1 })
        }
        CodeTask::Sideinfo {
            channel,
            state,
            sigma,
            phi,
            message,
            bob,
            s_label,
            discard,
            eps,
            common,
        } => {
            let seed = resolve_seed(&common.seed)?;
            let ch = qobj::read_channel(&channel)?;
            let psi = load_pure(&state)?;
            let sig = load_pure(&sigma)?;
            let side = load_pure(&phi)?;
            let a = parse_labels(&message);
            let b = parse_labels(&bob);
            let d = parse_labels(&discard);
            let mut rng = Sampler::new(seed);
            let art = coding::sideinfo_oneshot_code(
                &psi, &a, &b, &ch, &s_label, &side, &sig, &d, eps, &mut rng,
            )?;
            let config = ExperimentConfig {
                command: "code sideinfo".into(),
                seed,
                inputs: vec![
                    channel.display().to_string(),
                    state.display().to_string(),
                    sigma.display().to_string(),
                    phi.display().to_string(),
                ],
                samples: Some(art.samples_used),
                eps: Some(eps),
                out_dir: common.out.as_ref().map(|p| p.display().to_string()),
            };
            let passed = !art.certified() || art.achieved <= art.theorem_bound + 1e-9;
            emit(
                &common,
                "code_sideinfo",
                &serde_json::json!({ "config": config, "artifact": code_artifact_json(&art) }),
            )?;
            Ok(if passed { 0 } else { 1 })
        }
        CodeTask::Broadcast {
            channel,
            state1,
            state2,
            sigma,
            message1,
            message2,
            bob1,
            bob2,
            app1,
            app2,
            c1,
            c2,
            discard,
            eps,
            common,
        } => {
            let seed = resolve_seed(&common.seed)?;
            let ch = qobj::read_channel(&channel)?;
            let psi1 = load_pure(&state1)?;
            let psi2 = load_pure(&state2)?;
            let sig = load_pure(&sigma)?;
            let rx1 = coding::BroadcastReceiver {
                psi: &psi1,
                a_labels: parse_labels(&message1),
                b_labels: parse_labels(&bob1),
                app_labels: parse_labels(&app1),
                c_labels: parse_labels(&c1),
            };
            let rx2 = coding::BroadcastReceiver {
                psi: &psi2,
                a_labels: parse_labels(&message2),
                b_labels: parse_labels(&bob2),
                app_labels: parse_labels(&app2),
                c_labels: parse_labels(&c2),
            };
            let d = parse_labels(&discard);
            let mut rng = Sampler::new(seed);
            let art = coding::broadcast_oneshot_code(&rx1, &rx2, &ch, &sig, &d, eps, &mut rng)?;
            let config = ExperimentConfig {
                command: "code broadcast".into(),
                seed,
                inputs: vec![
                    channel.display().to_string(),
                    state1.display().to_string(),
                    state2.display().to_string(),
                    sigma.display().to_string(),
                ],
                samples: Some(art.samples_used),
                eps: Some(eps),
                out_dir: common.out.as_ref().map(|p| p.display().to_string()),
            };
            let passed = !art.certified() || art.achieved <= art.theorem_bound + 1e-9;
            emit(
                &common,
                "code_broadcast",
                &serde_json::json!({ "config": config, "artifact": code_artifact_json(&art) }),
            )?;
            Ok(if passed { 0 } else { 1 })
        }
    }
}

fn run_rate(task: RateTask) -> Result<i32> {
    match task {
        RateTask::Region {
            kind,
            channel,
            sigma,
            phi,
            s_label,
            a1,
            a2,
            c1,
            c2,
            optimize,
            restarts,
            iterations,
            dim_a,
            dim_dprime,
            common,
        } => {
            let ch = qobj::read_channel(&channel)?;
            let result: serde_json::Value = match kind.as_str() {
                "ea" => {
                    if optimize {
                        let seed = resolve_seed(&common.seed)?;
                        let mut rng = Sampler::new(seed);
                        let best =
                            coding::ea_capacity_search(&ch, restarts, iterations, &mut rng)?;
                        serde_json::json!({ "optimized_half_mutual": best, "label": "lower bound" })
                    } else {
                        let sig = load_pure(&sigma.ok_or_else(|| {
                            Error::InvalidState("--sigma required without --optimize".into())
                        })?)?;
                        serde_json::to_value(coding::ea_rate_point(&ch, &sig)?)?
                    }
                }
                "sideinfo" => {
                    let side = load_pure(&phi.ok_or_else(|| {
                        Error::InvalidState("--phi required for sideinfo".into())
                    })?)?;
                    if optimize {
                        let seed = resolve_seed(&common.seed)?;
                        let mut rng = Sampler::new(seed);
                        let best = coding::sideinfo_capacity_search(
                            &ch, &s_label, &side, dim_a, dim_dprime, restarts, iterations,
                            &mut rng,
                        )?;
                        serde_json::json!({
                            "optimized_half_gain": best,
                            "dim_a": dim_a,
                            "dim_dprime": dim_dprime,
                            "label": "lower bound",
                        })
                    } else {
                        let sig = qobj::read_qobj(&sigma.ok_or_else(|| {
                            Error::InvalidState("--sigma required without --optimize".into())
                        })?)?
                        .to_state()?;
                        serde_json::to_value(coding::sideinfo_rate(&ch, &s_label, &side, &sig)?)?
                    }
                }
                "marton" => {
                    let sig = qobj::read_qobj(&sigma.ok_or_else(|| {
                        Error::InvalidState("--sigma required for marton".into())
                    })?)?
                    .to_state()?;
                    let region = coding::marton_region(
                        &ch,
                        &sig,
                        &parse_labels(&a1),
                        &parse_labels(&a2),
                        &parse_labels(&c1),
                        &parse_labels(&c2),
                    )?;
                    serde_json::to_value(region)?
                }
                other => {
                    return Err(Error::InvalidState(format!(
                        "unknown region kind {other} (ea|sideinfo|marton)"
                    )))
                }
            };
            let config = ExperimentConfig {
                command: format!("rate region {kind}"),
                seed: common.seed.unwrap_or(0),
                inputs: vec![channel.display().to_string()],
                samples: None,
                eps: None,
                out_dir: common.out.as_ref().map(|p| p.display().to_string()),
            };
            emit(
                &common,
                "rate_region",
                &serde_json::json!({ "config": config, "region": result }),
            )?;
            Ok(0)
        }
    }
}

/// Builders for the small example inputs shipped with the CLI docs.
pub fn example_channel_json() -> String {
    let ch = Channel::dephasing(LabeledSpace::single("A'", 2), 1.0).unwrap();
    serde_json::to_string_pretty(&qobj::ChanObj::from_channel(&ch)).unwrap()
}

pub fn example_state_json() -> String {
    let phi = crate::tensor::maximally_entangled::<f64>("A", "A'", 2).unwrap();
    serde_json::to_string_pretty(&QObj::from_pure(&phi)).unwrap()
}
