use std::collections::BTreeMap;
use std::fmt;

use log::{info, warn};

use crate::data::VectorSet;
use crate::error::{Error, Result};
use crate::flow::FlowStack;
use crate::metrics::{discrimination_report, regulation_report, DEFAULT_K, DEFAULT_MIN_CLASS_SAMPLES};
use crate::numerics::{adam_step, AdamState, Rng};
use crate::scalar::Real;

use super::loss::batch_loss;
use super::{normalize_set, set_nll, ClassPriors, DiagnosticTrace, EpochDiagnostics};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrainMode {
    /// Single `N(0, I)` prior, labels unused.
    VanillaNf,
    /// Class-conditional `N(μ_y, I)` priors.
    Dnf,
}

impl TrainMode {
    pub fn name(self) -> &'static str {
        match self {
            TrainMode::VanillaNf => "vanilla_nf",
            TrainMode::Dnf => "dnf",
        }
    }
}

/// How DNF prior means are updated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PriorUpdate {
    /// Adam on `∂nll/∂μ_y` jointly with the flow parameters.
    Gradient,
    /// After each epoch, `μ_y` is reset to the class mean of the latent codes.
    ClosedForm,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub seed: u64,
    pub mode: TrainMode,
    pub blocks: usize,
    /// Hidden widths of every conditioner; `None` means `(D, D, D)`.
    pub hidden: Option<[usize; 3]>,
    pub prior_update: PriorUpdate,
    /// Stop after `patience` consecutive epochs improving nll by less than this.
    pub early_stop_tol: f64,
    pub patience: usize,
    pub probe_classes: usize,
    pub probe_samples: usize,
    /// Compute regulation and discrimination statistics every epoch.
    pub diagnostics: bool,
    pub diag_k: usize,
    pub diag_min_class_samples: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 20,
            batch_size: 300,
            lr: 0.003,
            seed: 0,
            mode: TrainMode::Dnf,
            blocks: 10,
            hidden: None,
            prior_update: PriorUpdate::Gradient,
            early_stop_tol: 1e-4,
            patience: 3,
            probe_classes: 50,
            probe_samples: 100,
            diagnostics: true,
            diag_k: DEFAULT_K,
            diag_min_class_samples: DEFAULT_MIN_CLASS_SAMPLES,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::InvalidConfig("batch_size must be at least 1".into()));
        }
        if !(self.lr > 0.0) || !self.lr.is_finite() {
            return Err(Error::InvalidConfig(format!("lr must be positive, got {}", self.lr)));
        }
        if self.blocks == 0 {
            return Err(Error::InvalidConfig("blocks must be at least 1".into()));
        }
        if let Some(h) = self.hidden {
            if h.contains(&0) {
                return Err(Error::InvalidConfig("hidden widths must be positive".into()));
            }
        }
        if self.diag_k == 0 {
            return Err(Error::InvalidConfig("diag_k must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutput<T> {
    pub stack: FlowStack<T>,
    /// Zero means in vanilla mode.
    pub priors: ClassPriors<T>,
    pub trace: DiagnosticTrace,
}

/// Training stopped on a numeric failure; carries the model as of the last
/// completed epoch.
#[derive(Debug)]
pub struct TrainAbort<T> {
    pub error: Error,
    pub epoch: usize,
    pub last_good: TrainOutput<T>,
}

impl<T> fmt::Display for TrainAbort<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "training aborted in epoch {}: {}", self.epoch, self.error)
    }
}

impl<T: fmt::Debug> std::error::Error for TrainAbort<T> {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.error)
    }
}

impl<T> From<TrainAbort<T>> for Error {
    fn from(a: TrainAbort<T>) -> Self {
        a.error
    }
}

/// Up to `classes` classes (largest first, ties by label) with up to
/// `samples` randomly chosen members each.
fn probe_indices<T: Real>(set: &VectorSet<T>, classes: usize, samples: usize, rng: &mut Rng) -> Vec<usize> {
    let mut by_class: Vec<(i64, Vec<usize>)> = set.class_indices().into_iter().collect();
    by_class.sort_by(|a, b| b.1.len().cmp(&a.1.len()).then(a.0.cmp(&b.0)));
    let mut idx = Vec::new();
    for (_, members) in by_class.into_iter().take(classes) {
        let pick = rng.sample_indices(members.len(), samples.min(members.len()));
        let mut chosen: Vec<usize> = pick.into_iter().map(|i| members[i]).collect();
        chosen.sort_unstable();
        idx.extend(chosen);
    }
    idx.sort_unstable();
    idx
}

struct Trainer<'a, T> {
    cfg: &'a TrainConfig,
    set: &'a VectorSet<T>,
    probe: VectorSet<T>,
}

impl<T: Real> Trainer<'_, T> {
    fn priors_for_nll<'p>(&self, priors: &'p ClassPriors<T>) -> Option<&'p ClassPriors<T>> {
        match self.cfg.mode {
            TrainMode::Dnf => Some(priors),
            TrainMode::VanillaNf => None,
        }
    }

    fn diagnose(&self, epoch: usize, stack: &FlowStack<T>, priors: &ClassPriors<T>) -> Result<EpochDiagnostics> {
        let nll = set_nll(stack, self.priors_for_nll(priors), self.set)?.as_f64();
        let mut row = EpochDiagnostics::empty(epoch, nll);
        if !self.cfg.diagnostics || self.probe.is_empty() {
            return Ok(row);
        }
        let z = normalize_set(stack, &self.probe)?;
        match regulation_report(&z, self.cfg.diag_k, self.cfg.diag_min_class_samples) {
            Ok(r) => {
                row.avg_kurtosis = r.avg_kurtosis;
                row.avg_skewness = r.avg_skewness;
                row.pc1_dir_var = r.pc_dir_var[0];
                row.pc2_dir_var = r.pc_dir_var.get(1).copied().unwrap_or(f64::NAN);
                row.avg_pc_dir_var = r.avg_pc_dir_var;
                row.pc_shape_var_avg = r.pc_shape_var_avg;
            }
            Err(e) if epoch == 0 => warn!("regulation statistics unavailable on probe set: {e}"),
            Err(_) => {}
        }
        // trained priors in DNF mode, empirical latent class means otherwise
        let means: BTreeMap<i64, Vec<T>> = match self.cfg.mode {
            TrainMode::Dnf => z.classes().into_iter().map(|l| Ok((l, priors.mean(l)?.to_vec()))).collect::<Result<_>>()?,
            TrainMode::VanillaNf => z.class_means(),
        };
        match discrimination_report(&z, &means) {
            Ok(d) => {
                row.between_var = d.between_var;
                row.within_var = d.within_var;
                row.bw_ratio = d.bw_ratio;
                row.ce_inner = d.ce_inner;
                row.ce_cosine = d.ce_cosine;
                row.train_eer_cosine = d.train_eer_cosine;
            }
            Err(e) if epoch == 0 => warn!("discrimination statistics unavailable on probe set: {e}"),
            Err(_) => {}
        }
        Ok(row)
    }
}

/// Minibatch Adam on the DNF (or vanilla NF) objective.
///
/// The flow starts at the identity; DNF prior means start at the per-class
/// means of `set`. A diagnostics row is recorded before the first update and
/// after every epoch.
pub fn train<T: Real>(set: &VectorSet<T>, cfg: &TrainConfig) -> std::result::Result<TrainOutput<T>, TrainAbort<T>> {
    let mut rng = Rng::new(cfg.seed);
    let mut init_rng = rng.fork();
    let mut probe_rng = rng.fork();
    let mut shuffle_rng = rng.fork();
    let dim = set.dim();
    let fail_early = |error: Error| TrainAbort {
        error,
        epoch: 0,
        last_good: TrainOutput {
            stack: FlowStack::from_blocks(dim.max(1), Vec::new()).expect("empty stack"),
            priors: ClassPriors::zeros(dim, []),
            trace: DiagnosticTrace::default(),
        },
    };
    if let Err(e) = cfg.validate() {
        return Err(fail_early(e));
    }
    if dim < 2 {
        return Err(fail_early(Error::InvalidConfig(format!("training needs D >= 2, got {dim}"))));
    }
    if set.is_empty() {
        return Err(fail_early(Error::InsufficientData("empty training set".into())));
    }
    let classes = set.classes();
    if cfg.mode == TrainMode::Dnf && classes.len() < 2 {
        return Err(fail_early(Error::InsufficientData(format!(
            "DNF training needs at least 2 classes, found {}",
            classes.len()
        ))));
    }
    let hidden = cfg.hidden.unwrap_or([dim, dim, dim]);
    let mut stack = match FlowStack::new(dim, cfg.blocks, hidden, &mut init_rng) {
        Ok(s) => s,
        Err(e) => return Err(fail_early(e)),
    };
    let mut priors = match cfg.mode {
        TrainMode::Dnf => ClassPriors::from_class_means(set),
        TrainMode::VanillaNf => ClassPriors::zeros(dim, classes.iter().copied()),
    };
    let probe_idx = probe_indices(set, cfg.probe_classes, cfg.probe_samples, &mut probe_rng);
    let trainer = Trainer {
        cfg,
        set,
        probe: set.subset(&probe_idx),
    };

    let mut trace = DiagnosticTrace::default();
    let snapshot = |stack: &FlowStack<T>, priors: &ClassPriors<T>, trace: &DiagnosticTrace| TrainOutput {
        stack: stack.clone(),
        priors: priors.clone(),
        trace: trace.clone(),
    };
    match trainer.diagnose(0, &stack, &priors) {
        Ok(row) => trace.epochs.push(row),
        Err(error) => {
            return Err(TrainAbort {
                error,
                epoch: 0,
                last_good: snapshot(&stack, &priors, &trace),
            })
        }
    }
    info!("epoch 0: nll {:.6}", trace.epochs[0].nll);

    let learn_priors = cfg.mode == TrainMode::Dnf && cfg.prior_update == PriorUpdate::Gradient;
    let n_flow = stack.num_params();
    let n_total = n_flow + if learn_priors { priors.len() * dim } else { 0 };
    let mut adam = AdamState::new(n_total, T::lit(cfg.lr));
    let mut params = stack.params();
    if learn_priors {
        params.extend(priors.flat());
    }
    let mut stale = 0;
    let mut last_good = snapshot(&stack, &priors, &trace);

    for epoch in 1..=cfg.epochs {
        let order = shuffle_rng.permutation(set.len());
        let step = |stack: &mut FlowStack<T>,
                    priors: &mut ClassPriors<T>,
                    params: &mut Vec<T>,
                    adam: &mut AdamState<T>,
                    batch: &[usize]|
         -> Result<()> {
            let out = batch_loss(stack, trainer.priors_for_nll(priors), set, batch)?;
            let mut grad = out.flow_grad;
            if learn_priors {
                grad.extend(out.prior_grad.values().flatten().copied());
            }
            adam_step(params, &grad, adam)?;
            stack.set_params(&params[..n_flow])?;
            if learn_priors {
                priors.set_flat(&params[n_flow..])?;
            }
            Ok(())
        };
        for batch in order.chunks(cfg.batch_size) {
            if let Err(error) = step(&mut stack, &mut priors, &mut params, &mut adam, batch) {
                return Err(TrainAbort { error, epoch, last_good });
            }
        }
        if cfg.mode == TrainMode::Dnf && cfg.prior_update == PriorUpdate::ClosedForm {
            match normalize_set(&stack, set) {
                Ok(z) => {
                    for (label, mean) in z.class_means() {
                        priors.set_mean(label, mean);
                    }
                }
                Err(error) => return Err(TrainAbort { error, epoch, last_good }),
            }
        }
        let row = match trainer.diagnose(epoch, &stack, &priors) {
            Ok(row) => row,
            Err(error) => return Err(TrainAbort { error, epoch, last_good }),
        };
        let prev = trace.epochs.last().map(|r| r.nll).unwrap_or(f64::INFINITY);
        trace.epochs.push(row);
        info!("epoch {epoch}: nll {:.6}", row.nll);
        last_good = snapshot(&stack, &priors, &trace);
        if prev - row.nll < cfg.early_stop_tol {
            stale += 1;
            if stale >= cfg.patience {
                info!("early stop after epoch {epoch}");
                break;
            }
        } else {
            stale = 0;
        }
    }
    Ok(last_good)
}
