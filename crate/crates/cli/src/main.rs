//! `jndsur`: batch front end for JND sample fitting, campaign simulation,
//! feature extraction, SUR predictor training and cross-validated
//! evaluation.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use sur_core::bisection::simulate_campaign;
use sur_core::eval::{run_full_evaluation, PredictorChoice};
use sur_core::features::{build_feature_vector, DEFAULT_SIGNIFICANT_FRACTION};
use sur_core::io::{self, CurveRow, FeatureRow, PredictionRow, RunConfig, SimulateConfig};
use sur_core::rng::derive_seed;
use sur_core::stats::{fit_normal, normality_pass_rate, Resolution, SurModel};
use sur_core::svr::{head_targets, predict_sur_curve, train_sur_predictor, tune_head_params, PredictorMeta};
use sur_core::synth::synth_corpus;

#[derive(Parser)]
#[command(name = "jndsur", version, about = "SUR-curve modeling of JND samples")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct OutDir {
    /// Directory for output files (created if missing).
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Fit normal SUR models and run the normality test on a sample file.
    Fit {
        samples: PathBuf,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[command(flatten)]
        out: OutDir,
    },
    /// Simulate a bisection campaign, or a whole synthetic corpus.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        out: OutDir,
    },
    /// Build feature vectors for every clip of a manifest.
    Extract {
        /// Corpus manifest.
        #[arg(long)]
        config: PathBuf,
        /// JND order whose measured anchor the features are taken at.
        #[arg(long, default_value_t = 1)]
        order: u8,
        #[arg(long, default_value_t = DEFAULT_SIGNIFICANT_FRACTION)]
        fraction: f64,
        #[command(flatten)]
        out: OutDir,
    },
    /// Train a SUR predictor from features and JND samples.
    Train {
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        samples: PathBuf,
        #[arg(long, default_value_t = 1)]
        order: u8,
        /// Required when the feature file spans several resolutions.
        #[arg(long)]
        resolution: Option<Resolution>,
        /// Run config whose `[eval]` table supplies predictor parameters.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        out: OutDir,
    },
    /// Predict SUR curves for a feature file.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        features: PathBuf,
        #[command(flatten)]
        out: OutDir,
    },
    /// Cross-validated evaluation over resolutions, orders and settings.
    Evaluate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory; defaults to the config's `out_dir` or `report`.
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Use the ground-truth model as the prediction.
        #[arg(long)]
        oracle_predictor: bool,
    },
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Fit { samples, alpha, out } => fit(&samples, alpha, &out.out_dir),
        Command::Simulate { config, seed, out } => simulate(&config, seed, &out.out_dir),
        Command::Extract {
            config,
            order,
            fraction,
            out,
        } => extract(&config, order, fraction, &out.out_dir),
        Command::Train {
            features,
            samples,
            order,
            resolution,
            config,
            seed,
            out,
        } => train(&features, &samples, order, resolution, config.as_deref(), seed, &out.out_dir),
        Command::Predict { model, features, out } => predict(&model, &features, &out.out_dir),
        Command::Evaluate {
            config,
            seed,
            out_dir,
            oracle_predictor,
        } => evaluate(&config, seed, out_dir, oracle_predictor),
    }
}

fn fit(samples: &Path, alpha: f64, out: &Path) -> Result<()> {
    let sets = io::read_samples(samples).with_context(|| format!("reading samples {}", samples.display()))?;
    let rows = io::fit_rows(&sets, alpha)?;
    let rates = normality_pass_rate(&sets, alpha)?;
    io::write_fit_models(&out.join("models.csv"), &rows)?;
    io::write_pass_rates(&out.join("pass_rates.csv"), &rates)?;
    println!("{} sample sets fitted", rows.len());
    println!("resolution  order  passed/tested  skipped  rate");
    for r in &rates {
        println!(
            "{:<10}  {:>5}  {:>6}/{:<6}  {:>7}  {:.1}%",
            r.resolution,
            r.jnd_order,
            r.passed,
            r.tested,
            r.skipped,
            r.percent()
        );
    }
    Ok(())
}

fn simulate(config: &Path, seed: Option<u64>, out: &Path) -> Result<()> {
    match io::load_simulate_config(config)? {
        SimulateConfig::Campaign(mut spec) => {
            if let Some(s) = seed {
                spec.seed = s;
            }
            let set = simulate_campaign(&spec)?;
            io::write_samples(&out.join("samples.csv"), &[set])?;
            println!("{} samples written", spec.subjects);
        }
        SimulateConfig::Corpus(mut cfg) => {
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let corpus = synth_corpus(&cfg)?;
            let manifest = io::write_synthetic_corpus(out, &corpus, 5 * 30, 30.0)?;
            println!("{} clips written to {}", corpus.clips.len(), manifest.display());
        }
    }
    Ok(())
}

fn extract(manifest: &Path, order: u8, fraction: f64, out: &Path) -> Result<()> {
    let corpus = io::load_corpus(manifest).with_context(|| format!("loading manifest {}", manifest.display()))?;
    let rows = corpus
        .clips
        .iter()
        .map(|c| {
            let anchor = if order == 1 {
                0
            } else {
                c.jnd_sets
                    .get(&order)
                    .map(|s| s.anchor_qp)
                    .with_context(|| format!("clip `{}` at {} has no order-{order} samples", c.clip_id, c.resolution))?
            };
            let features = build_feature_vector(&c.ladder, &c.masking, anchor, fraction, None)
                .with_context(|| format!("clip `{}` at {}", c.clip_id, c.resolution))?;
            Ok(FeatureRow {
                clip_id: c.clip_id.clone(),
                resolution: c.resolution,
                features,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    io::write_features(&out.join("features.csv"), &rows)?;
    println!("{} feature vectors written", rows.len());
    Ok(())
}

fn train(
    features: &Path,
    samples: &Path,
    order: u8,
    resolution: Option<Resolution>,
    config: Option<&Path>,
    seed: Option<u64>,
    out: &Path,
) -> Result<()> {
    let cfg = match config {
        Some(p) => io::load_run_config(p)?,
        None => RunConfig::default(),
    };
    let seed = seed.unwrap_or(cfg.eval.seed);
    let mut rows = io::read_features(features).with_context(|| format!("reading features {}", features.display()))?;
    if let Some(r) = resolution {
        rows.retain(|f| f.resolution == r);
    }
    let mut resolutions: Vec<Resolution> = rows.iter().map(|r| r.resolution).collect();
    resolutions.sort();
    resolutions.dedup();
    let res = match resolutions.as_slice() {
        [r] => *r,
        [] => bail!("{}: no feature rows to train on", features.display()),
        _ => bail!("features span several resolutions; pass --resolution"),
    };
    let sets = io::read_samples(samples).with_context(|| format!("reading samples {}", samples.display()))?;
    let truth: HashMap<&str, SurModel> = sets
        .iter()
        .filter(|s| s.resolution == res && s.jnd_order == order)
        .map(|s| Ok((s.clip_id.as_str(), fit_normal(s)?)))
        .collect::<Result<_, sur_core::Error>>()?;
    let feature_rows: Vec<(String, _)> = rows.iter().map(|r| (r.clip_id.clone(), r.features.clone())).collect();
    let truth_rows = rows
        .iter()
        .map(|r| {
            truth
                .get(r.clip_id.as_str())
                .map(|m| (r.clip_id.clone(), *m))
                .with_context(|| format!("no order-{order} samples for clip `{}` at {res}", r.clip_id))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut params = cfg.eval.predictor;
    if let Some(grid) = &cfg.eval.search {
        let x: Vec<&[f64]> = rows.iter().map(|r| r.features.values()).collect();
        let (mu, log_sigma) = head_targets(&feature_rows, &truth_rows)?;
        params.mu = tune_head_params(&x, &mu, &params.mu, grid, derive_seed(seed, &format!("train/{res}/{order}/mu")))?;
        params.log_sigma = tune_head_params(
            &x,
            &log_sigma,
            &params.log_sigma,
            grid,
            derive_seed(seed, &format!("train/{res}/{order}/log_sigma")),
        )?;
    }
    let mut predictor = train_sur_predictor(&feature_rows, &truth_rows, &params)?;
    predictor.meta = PredictorMeta {
        jnd_order: Some(order),
        resolution: Some(res),
        fold: None,
        training_clips: rows.len(),
    };
    let path = out.join("model.json");
    io::save_predictor(&path, &predictor)?;
    println!("trained on {} clips at {res}, order {order}: {}", rows.len(), path.display());
    Ok(())
}

fn predict(model: &Path, features: &Path, out: &Path) -> Result<()> {
    let predictor = io::load_predictor(model).with_context(|| format!("loading model {}", model.display()))?;
    let rows = io::read_features(features).with_context(|| format!("reading features {}", features.display()))?;
    let order = predictor.meta.jnd_order.unwrap_or(1);
    let mut curves = vec![];
    let mut preds = vec![];
    for r in &rows {
        let p = predict_sur_curve(&predictor, &r.features, r.features.anchor_qp)
            .with_context(|| format!("clip `{}`", r.clip_id))?;
        curves.extend(p.curve.iter().map(|(qp, sur)| CurveRow {
            clip_id: r.clip_id.clone(),
            jnd_order: order,
            qp,
            sur,
        }));
        preds.push(PredictionRow {
            clip_id: r.clip_id.clone(),
            resolution: r.resolution,
            model: p.model,
            jnd: p.jnd,
        });
    }
    io::write_curves(&out.join("curves.csv"), &curves)?;
    io::write_predictions(&out.join("predictions.csv"), &preds)?;
    println!("{} curves written", preds.len());
    Ok(())
}

fn evaluate(config: &Path, seed: Option<u64>, out_dir: Option<PathBuf>, oracle: bool) -> Result<()> {
    let mut cfg = io::load_run_config(config).with_context(|| format!("loading config {}", config.display()))?;
    if let Some(s) = seed {
        cfg.eval.seed = s;
    }
    if oracle {
        cfg.eval.predictor_choice = PredictorChoice::Oracle;
    }
    let source = cfg.corpus.clone().context("config has no [corpus] table")?;
    let corpus = source.load()?;
    let report = run_full_evaluation(&corpus, &cfg.eval)?;
    let out = out_dir.or(cfg.out_dir).unwrap_or_else(|| PathBuf::from("report"));
    io::write_report(&out, &report)?;
    println!("resolution  order  setting           clips  mean_dSUR  mean_dQP");
    for s in &report.summaries {
        println!(
            "{:<10}  {:>5}  {:<16}  {:>5}  {:>9.4}  {:>8.3}",
            s.resolution,
            s.jnd_order,
            s.setting_label(),
            s.clips,
            s.mean_delta_sur,
            s.mean_delta_qp
        );
    }
    for m in &report.skipped {
        eprintln!("skipped: {m}");
    }
    for m in &report.anchor_warnings {
        eprintln!("warning: {m}");
    }
    println!("report written to {}", out.display());
    Ok(())
}
