use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use dnf_core::data::{
    make_trials, read_trials, read_vectors, split_open_set, synth_flow_warped, synth_generate, write_trials,
    write_vectors, SynthConfig, TrialList, VectorFormat,
};
use dnf_core::dnf::{load_checkpoint, save_checkpoint, train, PriorUpdate, TrainConfig, TrainMode};
use dnf_core::linear::{lda_fit, ldan_fit, whiten_fit, LinearTransform, Pipeline, Stage, LAMBDA_COSINE};
use dnf_core::metrics::{
    cosine_score, eer_from_trials, regulation_csv, regulation_report, regulation_table, score_trials,
    subgroup_csv, subgroup_report, DEFAULT_K, DEFAULT_MIN_CLASS_SAMPLES,
};
use dnf_core::plda::{plda_fit, read_scores, write_scores, PldaModel, PldaScorer, ScoreLine};
use dnf_core::{write_atomic, Error, Result, VectorSet64};
use log::warn;

use crate::cli::*;
use crate::config::{check_input, Resolver};

/// Per-invocation state recorded in the run log.
#[derive(Debug, Default)]
pub struct Run {
    pub r: Resolver,
    pub seed: Option<u64>,
    pub outputs: Vec<String>,
}

impl Run {
    pub fn seed(&mut self, flag: Option<u64>) -> Result<u64> {
        let s = self.r.req("seed", flag)?;
        self.seed = Some(s);
        Ok(s)
    }

    fn wrote(&mut self, p: &Path) {
        self.outputs.push(p.display().to_string());
    }
}

pub fn write_set(run: &mut Run, path: &Path, set: &VectorSet64) -> Result<()> {
    write_vectors(path, set, VectorFormat::from_path(path))?;
    run.wrote(path);
    Ok(())
}

pub fn synth(a: SynthArgs, run: &mut Run) -> Result<()> {
    let d = SynthConfig::default();
    let out = run.r.output("out", a.out)?;
    let cfg = SynthConfig {
        classes: run.r.get("classes", a.classes, d.classes)?,
        samples_per_class: run.r.get("samples_per_class", a.samples_per_class, d.samples_per_class)?,
        dim: run.r.get("dim", a.dim, d.dim)?,
        mean_spread: run.r.get("mean_spread", a.mean_spread, d.mean_spread)?,
        cov_scale_range: (
            run.r.get("cov_scale_min", a.cov_scale_min, d.cov_scale_range.0)?,
            run.r.get("cov_scale_max", a.cov_scale_max, d.cov_scale_range.1)?,
        ),
        skew_strength: run.r.get("skew_strength", a.skew_strength, d.skew_strength)?,
        tail_strength: run.r.get("tail_strength", a.tail_strength, d.tail_strength)?,
        seed: run.seed(a.seed)?,
    };
    let warp_blocks = run.r.get("warp_blocks", a.warp_blocks, 0usize)?;
    let warp_scale = run.r.get("warp_scale", a.warp_scale, 1.0)?;
    run.r.finish()?;
    cfg.validate()?;
    let set = if warp_blocks > 0 {
        synth_flow_warped(&cfg, warp_blocks, warp_scale)?.0
    } else {
        synth_generate(&cfg)?
    };
    write_set(run, &out, &set)
}

pub fn split(a: SplitArgs, run: &mut Run) -> Result<()> {
    let input = run.r.input("input", a.input)?;
    let train_out = run.r.output("train_out", a.train_out)?;
    let eval_out = run.r.output("eval_out", a.eval_out)?;
    let fraction = run.r.get("train_fraction", a.train_fraction, 0.5)?;
    let seed = run.seed(a.seed)?;
    run.r.finish()?;
    let set: VectorSet64 = read_vectors(&input)?;
    let (tr, ev) = split_open_set(&set, fraction, seed)?;
    write_set(run, &train_out, &tr)?;
    write_set(run, &eval_out, &ev)
}

pub fn make_trials_cmd(a: MakeTrialsArgs, run: &mut Run) -> Result<()> {
    let input = run.r.input("input", a.input)?;
    let out = run.r.output("out", a.out)?;
    let max_imp = run.r.get("max_imposters", a.max_imposters, 0usize)?;
    let seed = run.seed(a.seed)?;
    run.r.finish()?;
    let set: VectorSet64 = read_vectors(&input)?;
    let trials = make_trials(&set, max_imp, seed)?;
    write_trials(&out, &trials)?;
    run.wrote(&out);
    Ok(())
}

fn stem(p: &Path) -> String {
    p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| p.display().to_string())
}

pub fn stats(a: StatsArgs, run: &mut Run) -> Result<()> {
    let inputs = run.r.list("input", a.input);
    if inputs.is_empty() {
        return Err(Error::InvalidConfig("missing required setting `input` (flag --input)".into()));
    }
    let inputs: Vec<PathBuf> = inputs.into_iter().map(PathBuf::from).collect();
    for p in &inputs {
        check_input(p)?;
    }
    let k = run.r.get("k", a.k, DEFAULT_K)?;
    let min = run.r.get("min_class_samples", a.min_class_samples, DEFAULT_MIN_CLASS_SAMPLES)?;
    let out = run.r.opt_output("out", a.out)?;
    run.r.finish()?;
    let mut reports = Vec::new();
    for p in &inputs {
        let set: VectorSet64 = read_vectors(p)?;
        reports.push((stem(p), regulation_report(&set, k, min)?));
    }
    let cols: Vec<(&str, _)> = reports.iter().map(|(n, r)| (n.as_str(), r)).collect();
    print!("{}", regulation_table(&cols));
    if let Some(out) = out {
        write_atomic(&out, regulation_csv(&cols).as_bytes())?;
        run.wrote(&out);
    }
    Ok(())
}

pub fn subgroup_stats(a: SubgroupArgs, run: &mut Run) -> Result<()> {
    let input = run.r.input("input", a.input)?;
    let transform = run.r.input("transform", a.transform)?;
    let group = run.r.req("group_size", a.group_size)?;
    let k = run.r.get("k", a.k, DEFAULT_K)?;
    let min = run.r.get("min_class_samples", a.min_class_samples, DEFAULT_MIN_CLASS_SAMPLES)?;
    let out = run.r.opt_output("out", a.out)?;
    run.r.finish()?;
    let set: VectorSet64 = read_vectors(&input)?;
    let t = LinearTransform::load(&transform)?;
    let groups = subgroup_report(&set, &t, group, k, min)?;
    let csv = subgroup_csv(&groups);
    print!("{csv}");
    if let Some(out) = out {
        write_atomic(&out, csv.as_bytes())?;
        run.wrote(&out);
    }
    Ok(())
}

/// Training hyperparameters shared by `train-*` and `pipeline run`.
pub struct TrainFlags {
    pub epochs: Option<usize>,
    pub batch_size: Option<usize>,
    pub lr: Option<f64>,
    pub blocks: Option<usize>,
    pub hidden: Option<String>,
    pub prior_update: Option<String>,
    pub early_stop_tol: Option<f64>,
    pub patience: Option<usize>,
}

fn parse_hidden(s: &str) -> Result<[usize; 3]> {
    let w: Vec<usize> = s
        .split(',')
        .map(|t| t.trim().parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::InvalidConfig(format!("hidden must be `a,b,c`, got {s:?}")))?;
    <[usize; 3]>::try_from(w).map_err(|_| Error::InvalidConfig(format!("hidden needs three widths, got {s:?}")))
}

pub fn train_config(r: &mut Resolver, f: TrainFlags, mode: TrainMode, seed: u64) -> Result<TrainConfig> {
    let d = TrainConfig::default();
    let hidden = r.opt("hidden", f.hidden)?.map(|s: String| parse_hidden(&s)).transpose()?;
    let prior_update = match mode {
        TrainMode::Dnf => match r.get("prior_update", f.prior_update, "gradient".to_string())?.as_str() {
            "gradient" => PriorUpdate::Gradient,
            "closed-form" | "closed_form" => PriorUpdate::ClosedForm,
            other => {
                return Err(Error::InvalidConfig(format!(
                    "prior_update must be `gradient` or `closed-form`, got `{other}`"
                )))
            }
        },
        TrainMode::VanillaNf => d.prior_update,
    };
    Ok(TrainConfig {
        epochs: r.get("epochs", f.epochs, d.epochs)?,
        batch_size: r.get("batch_size", f.batch_size, d.batch_size)?,
        lr: r.get("lr", f.lr, d.lr)?,
        seed,
        mode,
        blocks: r.get("blocks", f.blocks, d.blocks)?,
        hidden,
        prior_update,
        early_stop_tol: r.get("early_stop_tol", f.early_stop_tol, d.early_stop_tol)?,
        patience: r.get("patience", f.patience, d.patience)?,
        ..d
    })
}

/// Trains and writes the checkpoint; on abort the last completed epoch is
/// saved next to `out` with a `.last_good` suffix.
pub fn run_training(
    run: &mut Run,
    set: &VectorSet64,
    cfg: &TrainConfig,
    out: &Path,
    trace: Option<&Path>,
) -> Result<dnf_core::FlowStack64> {
    let result = train(set, cfg);
    let output = match result {
        Ok(o) => o,
        Err(abort) => {
            let mut partial = out.as_os_str().to_owned();
            partial.push(".last_good");
            let partial = PathBuf::from(partial);
            let priors = (cfg.mode == TrainMode::Dnf).then_some(&abort.last_good.priors);
            save_checkpoint(&partial, &abort.last_good.stack, priors)?;
            run.wrote(&partial);
            warn!("{abort}; last completed epoch saved to {}", partial.display());
            return Err(abort.error);
        }
    };
    let priors = (cfg.mode == TrainMode::Dnf).then_some(&output.priors);
    save_checkpoint(out, &output.stack, priors)?;
    run.wrote(out);
    if let Some(t) = trace {
        output.trace.write_csv(t)?;
        run.wrote(t);
    }
    Ok(output.stack)
}

pub fn train_cmd(a: TrainArgs, mode: TrainMode, run: &mut Run) -> Result<()> {
    let input = run.r.input("input", a.input)?;
    let out = run.r.output("out", a.out)?;
    let trace = run.r.opt_output("trace", a.trace)?;
    let seed = run.seed(a.seed)?;
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
    let mut cfg = train_config(&mut run.r, flags, mode, seed)?;
    let d = TrainConfig::default();
    cfg.probe_classes = run.r.get("probe_classes", a.probe_classes, d.probe_classes)?;
    cfg.probe_samples = run.r.get("probe_samples", a.probe_samples, d.probe_samples)?;
    cfg.diagnostics = run.r.get("diagnostics", a.diagnostics, d.diagnostics)?;
    cfg.diag_k = run.r.get("diag_k", a.diag_k, d.diag_k)?;
    cfg.diag_min_class_samples = run.r.get("diag_min_class_samples", a.diag_min_class_samples, d.diag_min_class_samples)?;
    run.r.finish()?;
    cfg.validate()?;
    let set: VectorSet64 = read_vectors(&input)?;
    run_training(run, &set, &cfg, &out, trace.as_deref())?;
    Ok(())
}

fn save_linear(run: &mut Run, t: &LinearTransform<f64>, out: &Path) -> Result<()> {
    t.save(out)?;
    run.wrote(out);
    Ok(())
}

pub fn fit_lda(a: FitLdaArgs, run: &mut Run) -> Result<()> {
    let input = run.r.input("input", a.input)?;
    let out = run.r.output("out", a.out)?;
    let out_dim = run.r.opt("out_dim", a.out_dim)?;
    let lambda = run.r.get("lambda", a.lambda, LAMBDA_COSINE)?;
    run.r.finish()?;
    let set: VectorSet64 = read_vectors(&input)?;
    let t = lda_fit(&set, out_dim.unwrap_or(set.dim()), lambda)?;
    save_linear(run, &t, &out)
}

pub fn fit_simple(a: FitArgs, run: &mut Run, fit: fn(&VectorSet64) -> Result<LinearTransform<f64>>) -> Result<()> {
    let input = run.r.input("input", a.input)?;
    let out = run.r.output("out", a.out)?;
    run.r.finish()?;
    let set: VectorSet64 = read_vectors(&input)?;
    save_linear(run, &fit(&set)?, &out)
}

pub fn fit_ldan(a: FitArgs, run: &mut Run) -> Result<()> {
    fit_simple(a, run, ldan_fit)
}

pub fn fit_whiten(a: FitArgs, run: &mut Run) -> Result<()> {
    fit_simple(a, run, whiten_fit)
}

pub fn fit_plda(a: FitPldaArgs, run: &mut Run) -> Result<()> {
    let input = run.r.input("input", a.input)?;
    let out = run.r.output("out", a.out)?;
    let iters = run.r.get("iters", a.iters, 10usize)?;
    run.r.finish()?;
    let set: VectorSet64 = read_vectors(&input)?;
    plda_fit(&set, iters)?.save(&out)?;
    run.wrote(&out);
    Ok(())
}

/// Stages from a model file, chosen by its leading magic; anything else is
/// read as a pipeline manifest.
fn load_stages(spec: &str, dim: usize) -> Result<Vec<Stage<f64>>> {
    if spec == "lengthnorm" {
        return Ok(vec![Stage::Linear(LinearTransform::length_norm(dim))]);
    }
    let path = Path::new(spec);
    check_input(path)?;
    let head = std::fs::read(path)?;
    match head.get(..4) {
        Some(b"LIN1") => Ok(vec![Stage::Linear(LinearTransform::load(path)?)]),
        Some(b"DNF1") => Ok(vec![Stage::Flow(load_checkpoint::<f64>(path)?.stack)]),
        _ => Ok(Pipeline::load_manifest(path)?.stages().to_vec()),
    }
}

pub fn transform(a: TransformArgs, run: &mut Run) -> Result<()> {
    let input = run.r.input("input", a.input)?;
    let out = run.r.output("out", a.out)?;
    let models = run.r.list("model", a.model);
    if models.is_empty() {
        return Err(Error::InvalidConfig("missing required setting `model` (flag --model)".into()));
    }
    for m in models.iter().filter(|m| m.as_str() != "lengthnorm") {
        check_input(Path::new(m))?;
    }
    run.r.finish()?;
    let set: VectorSet64 = read_vectors(&input)?;
    let mut stages = Vec::new();
    let mut dim = set.dim();
    for m in &models {
        for s in load_stages(m, dim)? {
            dim = s.out_dim();
            stages.push(s);
        }
    }
    let pipeline = Pipeline::new(stages)?;
    let y = pipeline.apply(&set)?;
    write_set(run, &out, &y)
}

pub enum Scorer {
    Cosine,
    Plda(PldaScorer<f64>),
}

impl Scorer {
    pub fn score_all(&self, set: &VectorSet64, trials: &TrialList) -> Result<Vec<f64>> {
        match self {
            Scorer::Cosine => score_trials(set, trials, cosine_score),
            Scorer::Plda(s) => score_trials(set, trials, |e, t| s.score(e, t)),
        }
    }
}

pub fn write_score_file(run: &mut Run, out: &Path, trials: &TrialList, scores: &[f64]) -> Result<()> {
    let lines: Vec<ScoreLine> = trials
        .trials
        .iter()
        .zip(scores)
        .map(|(t, &score)| ScoreLine {
            enroll: t.enroll.clone(),
            test: t.test.clone(),
            score,
        })
        .collect();
    write_scores(out, &lines)?;
    run.wrote(out);
    Ok(())
}

pub fn score(a: ScoreArgs, run: &mut Run) -> Result<()> {
    let input = run.r.input("input", a.input)?;
    let trials_path = run.r.input("trials", a.trials)?;
    let out = run.r.output("out", a.out)?;
    let method = run.r.get("method", a.method, "cosine".to_string())?;
    let plda = match method.as_str() {
        "cosine" => None,
        "plda" => Some(run.r.input("plda", a.plda)?),
        other => return Err(Error::InvalidConfig(format!("method must be `cosine` or `plda`, got `{other}`"))),
    };
    run.r.finish()?;
    let set: VectorSet64 = read_vectors(&input)?;
    let trials = read_trials(&trials_path)?;
    let scorer = match plda {
        Some(p) => Scorer::Plda(PldaScorer::new(&PldaModel::load(&p)?)?),
        None => Scorer::Cosine,
    };
    let scores = scorer.score_all(&set, &trials)?;
    write_score_file(run, &out, &trials, &scores)
}

/// Scores reordered to follow `trials`, matched on (enroll, test).
pub fn align_scores(trials: &TrialList, lines: &[ScoreLine]) -> Result<Vec<f64>> {
    let map: HashMap<(&str, &str), f64> =
        lines.iter().map(|l| ((l.enroll.as_str(), l.test.as_str()), l.score)).collect();
    trials
        .trials
        .iter()
        .map(|t| {
            map.get(&(t.enroll.as_str(), t.test.as_str())).copied().ok_or_else(|| {
                Error::InsufficientData(format!("no score for trial {} {}", t.enroll, t.test))
            })
        })
        .collect()
}

pub fn eer_line(eer: f64) -> String {
    let mut s = String::new();
    write!(s, "EER {eer:.4}").unwrap();
    s
}

pub fn eval(a: EvalArgs, run: &mut Run) -> Result<()> {
    let trials_path = run.r.input("trials", a.trials)?;
    let scores_path = run.r.input("scores", a.scores)?;
    run.r.finish()?;
    let trials = read_trials(&trials_path)?;
    let scores = align_scores(&trials, &read_scores(&scores_path)?)?;
    let e = eer_from_trials(&trials, &scores)?;
    println!("{}", eer_line(e.eer));
    Ok(())
}
