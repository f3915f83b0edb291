//! `pipeline run`: fit a front end stage by stage on the training set, fit
//! the back end on its output, then score and evaluate the trials.

use std::path::{Path, PathBuf};

use dnf_core::data::{read_trials, read_vectors};
use dnf_core::dnf::TrainMode;
use dnf_core::linear::{lda_fit, ldan_fit, whiten_fit, LinearTransform, Pipeline, Stage, LAMBDA_COSINE};
use dnf_core::metrics::eer_from_trials;
use dnf_core::plda::{plda_fit, PldaScorer};
use dnf_core::{write_atomic, Error, Result, VectorSet64};

use crate::cli::PipelineArgs;
use crate::commands::{eer_line, run_training, train_config, write_score_file, Run, Scorer, TrainFlags};

const STAGE_NAMES: [&str; 6] = ["lengthnorm", "whiten", "ldan", "lda", "nf", "dnf"];

pub fn run_pipeline(a: PipelineArgs, run: &mut Run) -> Result<()> {
    let train_path = run.r.input("train", a.train)?;
    let eval_path = run.r.input("eval", a.eval)?;
    let trials_path = run.r.input("trials", a.trials)?;
    let out_dir = PathBuf::from(run.r.req::<String>("out_dir", a.out_dir)?);
    if !out_dir.is_dir() {
        return Err(Error::InvalidConfig(format!("out_dir does not exist: {}", out_dir.display())));
    }
    let stages: Vec<String> = run
        .r
        .get("stages", a.stages, String::new())?
        .split(',')
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect();
    if let Some(bad) = stages.iter().find(|s| !STAGE_NAMES.contains(&s.as_str())) {
        return Err(Error::InvalidConfig(format!(
            "unknown stage `{bad}`; expected one of {}",
            STAGE_NAMES.join(", ")
        )));
    }
    let backend = run.r.get("backend", a.backend, "plda".to_string())?;
    if backend != "plda" && backend != "cosine" {
        return Err(Error::InvalidConfig(format!("backend must be `plda` or `cosine`, got `{backend}`")));
    }
    let needs_seed = stages.iter().any(|s| s == "nf" || s == "dnf");
    let seed = if needs_seed { Some(run.seed(a.seed)?) } else { None };
    let lda_dim = run.r.opt("lda_dim", a.lda_dim)?;
    let lda_lambda = run.r.get("lda_lambda", a.lda_lambda, LAMBDA_COSINE)?;
    let plda_iters = run.r.get("plda_iters", a.plda_iters, 10usize)?;
    let flags = TrainFlags {
        epochs: a.epochs,
        batch_size: a.batch_size,
        lr: a.lr,
        blocks: a.blocks,
        hidden: a.hidden,
        prior_update: a.prior_update,
        early_stop_tol: a.early_stop_tol,
        patience: a.patience,
    };
    let train_cfg = match seed {
        Some(s) => {
            let mode = if stages.iter().any(|s| s == "dnf") { TrainMode::Dnf } else { TrainMode::VanillaNf };
            let cfg = train_config(&mut run.r, flags, mode, s)?;
            cfg.validate()?;
            Some(cfg)
        }
        None => None,
    };
    run.r.finish()?;

    let mut train: VectorSet64 = read_vectors(&train_path)?;
    let eval_raw: VectorSet64 = read_vectors(&eval_path)?;
    let trials = read_trials(&trials_path)?;

    let mut fitted = Vec::new();
    for (i, name) in stages.iter().enumerate() {
        let stage = match name.as_str() {
            "lengthnorm" => Stage::Linear(LinearTransform::length_norm(train.dim())),
            "whiten" => Stage::Linear(whiten_fit(&train)?),
            "ldan" => Stage::Linear(ldan_fit(&train)?),
            "lda" => Stage::Linear(lda_fit(&train, lda_dim.unwrap_or(train.dim()), lda_lambda)?),
            "nf" | "dnf" => {
                let mut cfg = train_cfg.clone().expect("seeded training config");
                cfg.mode = if name == "dnf" { TrainMode::Dnf } else { TrainMode::VanillaNf };
                let ckpt = out_dir.join(format!("stage{i}_{name}.dnf"));
                let trace = out_dir.join(format!("stage{i}_{name}.trace.csv"));
                Stage::Flow(run_training(run, &train, &cfg, &ckpt, Some(&trace))?)
            }
            _ => unreachable!("stage names validated above"),
        };
        train = stage.apply(&train)?;
        fitted.push(stage);
    }

    let eval = if fitted.is_empty() {
        eval_raw
    } else {
        let pipeline = Pipeline::new(fitted)?;
        let manifest = out_dir.join("pipeline.txt");
        pipeline.save_manifest(&manifest)?;
        run.outputs.push(manifest.display().to_string());
        pipeline.apply(&eval_raw)?
    };

    let scorer = if backend == "plda" {
        let model = plda_fit(&train, plda_iters)?;
        let path = out_dir.join("plda.pld");
        model.save(&path)?;
        run.outputs.push(path.display().to_string());
        Scorer::Plda(PldaScorer::new(&model)?)
    } else {
        Scorer::Cosine
    };
    let scores = scorer.score_all(&eval, &trials)?;
    write_score_file(run, &out_dir.join("scores.txt"), &trials, &scores)?;
    let e = eer_from_trials(&trials, &scores)?;
    let line = eer_line(e.eer);
    let eer_path: &Path = &out_dir.join("eer.txt");
    write_atomic(eer_path, format!("{line}\n").as_bytes())?;
    run.outputs.push(eer_path.display().to_string());
    println!("{line}");
    Ok(())
}
