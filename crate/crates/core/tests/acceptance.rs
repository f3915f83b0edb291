//! Acceptance suite. Runs without the libtest harness and prints one
//! PASS/FAIL line per criterion. `ACCEPTANCE_ONLY=1,7,9` restricts the run.

use std::collections::BTreeMap;
use std::sync::OnceLock;
use std::time::Instant;

use dnf_core::data::{make_trials, split_open_set, synth_flow_warped, synth_generate, SynthConfig, VectorSet};
use dnf_core::dnf::{dnf_loss, normalize_set, train, ClassPriors, TrainConfig, TrainMode, TrainOutput};
use dnf_core::flow::FlowStack;
use dnf_core::linear::{apply, compute_scatter, lda_fit, ldan_fit, whiten_fit, LinearTransform, LAMBDA_COSINE};
use dnf_core::metrics::{
    cosine_score, eer, eer_from_trials, regulation_report, score_trials, RegulationReport, TrialList,
    DEFAULT_K, DEFAULT_MIN_CLASS_SAMPLES,
};
use dnf_core::numerics::{sym_eig, Matrix, Rng};
use dnf_core::plda::{plda_fit, PldaModel, PldaScorer};
use nalgebra::{DMatrix, SymmetricEigen};

struct Outcome {
    pass: bool,
    report: String,
}

fn outcome(pass: bool, report: String) -> Outcome {
    Outcome { pass, report }
}

/// Expensive shared state; rebuilt from scratch for the determinism rerun.
#[derive(Default)]
struct Ctx {
    dnf_synth: OnceLock<(VectorSet<f64>, TrainOutput<f64>)>,
}

impl Ctx {
    /// DNF trained on the irregular generator, shared by criteria 5 and 12.
    fn dnf_synth(&self) -> &(VectorSet<f64>, TrainOutput<f64>) {
        self.dnf_synth.get_or_init(|| {
            let cfg = SynthConfig {
                samples_per_class: 200,
                seed: 1,
                ..SynthConfig::default()
            };
            let set = synth_generate::<f64>(&cfg).unwrap();
            let tc = TrainConfig {
                epochs: 20,
                seed: 3,
                ..TrainConfig::default()
            };
            let out = train(&set, &tc).unwrap();
            (set, out)
        })
    }
}

type Criterion = fn(&Ctx) -> Outcome;

const CRITERIA: [(u32, &str, Criterion); 12] = [
    (1, "flow invertibility", c01_invertibility),
    (2, "log-det exactness", c02_logdet),
    (3, "dnf_loss gradients", c03_gradients),
    (4, "mixture to single Gaussian", c04_mixture),
    (5, "regularity measures reduced", c05_regularity),
    (6, "open-set EER ordering", c06_open_set),
    (7, "LDA generalized-eigen oracle", c07_lda_oracle),
    (8, "LDA = LDA/N + PCA on means", c08_lda_two_step),
    (9, "PLDA 1-D quadrature oracle", c09_plda_oracle),
    (10, "PLDA linear invariance", c10_plda_invariance),
    (11, "EER exhaustive oracle", c11_eer_oracle),
    (12, "training diagnostics direction", c12_diagnostics),
];

fn main() {
    let only: Option<Vec<u32>> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|s| s.split(',').filter_map(|t| t.trim().parse().ok()).collect());
    let selected = |n: u32| only.as_ref().map_or(true, |o| o.contains(&n));

    let ctx = Ctx::default();
    let mut reports = BTreeMap::new();
    let mut failed = 0;
    for (n, name, f) in CRITERIA {
        if !selected(n) {
            continue;
        }
        let t0 = Instant::now();
        let o = f(&ctx);
        print_line(n, name, o.pass, &o.report, t0.elapsed().as_secs_f64());
        failed += usize::from(!o.pass);
        reports.insert(n, o.report);
    }

    if selected(13) {
        let t0 = Instant::now();
        let ctx = Ctx::default();
        let mut differing = Vec::new();
        for (n, _, f) in CRITERIA {
            if let Some(first) = reports.get(&n) {
                if f(&ctx).report != *first {
                    differing.push(n);
                }
            }
        }
        let pass = differing.is_empty() && !reports.is_empty();
        let report = format!("{} reports rerun, differing: {:?}", reports.len(), differing);
        print_line(13, "determinism", pass, &report, t0.elapsed().as_secs_f64());
        failed += usize::from(!pass);
    }

    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}

fn print_line(n: u32, name: &str, pass: bool, report: &str, secs: f64) {
    let tag = if pass { "PASS" } else { "FAIL" };
    println!("criterion {n:>2} {tag} {name}: {report} [{secs:.1}s]");
}

// ---------------------------------------------------------------- flows

/// Output-head scale of the random stacks. At 0.5 a ten-block stack already
/// pushes standard-normal inputs to |z| ~ 1e20; 0.2 gives |z| up to ~20.
const HEAD_SCALE: f64 = 0.2;

fn c01_invertibility(_: &Ctx) -> Outcome {
    let t0 = Instant::now();
    let mut rng = Rng::new(101);
    let mut worst = 0.0f64;
    let mut z_max = 0.0f64;
    for _ in 0..1000 {
        let d = 1 + rng.below(64);
        let t = 1 + rng.below(10);
        let stack = FlowStack::<f64>::random(d, t, HEAD_SCALE, &mut rng);
        let x = rng.normal_vec::<f64>(d);
        let (z, _) = stack.normalize(&x).unwrap();
        let back = stack.generate(&z).unwrap();
        for (a, b) in x.iter().zip(&back) {
            worst = worst.max((a - b).abs());
        }
        z_max = z.iter().fold(z_max, |m, v| m.max(v.abs()));
    }
    let secs = t0.elapsed().as_secs_f64();
    outcome(
        worst <= 1e-6 && secs < 60.0,
        format!("max |generate(normalize(x)) - x| = {worst:e} over 1000 stacks, max |z| {z_max:.2}"),
    )
}

/// `ln|det A|` by Gaussian elimination with partial pivoting.
fn ln_abs_det(mut a: Vec<Vec<f64>>) -> f64 {
    let n = a.len();
    let mut acc = 0.0;
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
        a.swap(c, p);
        let piv = a[c][c];
        acc += piv.abs().ln();
        for r in c + 1..n {
            let f = a[r][c] / piv;
            for k in c..n {
                a[r][k] -= f * a[c][k];
            }
        }
    }
    acc
}

fn c02_logdet(_: &Ctx) -> Outcome {
    let mut rng = Rng::new(202);
    let h = 1e-5;
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let d = 1 + rng.below(5);
        let t = 1 + rng.below(10);
        let stack = FlowStack::<f64>::random(d, t, HEAD_SCALE, &mut rng);
        let x = rng.normal_vec::<f64>(d);
        let (_, logdet) = stack.normalize(&x).unwrap();
        // column j of the Jacobian dz/dx by central differences
        let mut jac = vec![vec![0.0; d]; d];
        for j in 0..d {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[j] += h;
            xm[j] -= h;
            let zp = stack.normalize(&xp).unwrap().0;
            let zm = stack.normalize(&xm).unwrap().0;
            for i in 0..d {
                jac[i][j] = (zp[i] - zm[i]) / (2.0 * h);
            }
        }
        worst = worst.max((logdet - ln_abs_det(jac)).abs());
    }
    outcome(
        worst <= 1e-4,
        format!("max |logdet - ln|det J_fd|| = {worst:e} over 100 stacks"),
    )
}

fn labeled_set(rows: Vec<Vec<f64>>, labels: Vec<i64>) -> VectorSet<f64> {
    let ids = (0..rows.len()).map(|i| format!("u{i:05}")).collect();
    VectorSet::new(ids, labels, Matrix::from_rows(&rows).unwrap()).unwrap()
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-5)
}

/// Five-point central difference. The O(h⁴) stencil allows a small step,
/// which keeps the stencil from straddling ReLU kinks.
fn central_diff(f: impl Fn(f64) -> f64, x: f64) -> f64 {
    let h = 1e-5;
    (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h)
}

fn c03_gradients(_: &Ctx) -> Outcome {
    let mut rng = Rng::new(303);
    let (d, t) = (4, 2);
    let mut worst = 0.0f64;
    let mut checked = 0usize;
    for _ in 0..20 {
        let stack = FlowStack::<f64>::random(d, t, 0.5, &mut rng);
        let n = 6 + rng.below(6);
        let labels: Vec<i64> = (0..n).map(|i| (i % 3) as i64).collect();
        let rows = (0..n).map(|_| rng.normal_vec::<f64>(d)).collect();
        let batch = labeled_set(rows, labels);
        let means = (0..3).map(|c| (c as i64, rng.normal_vec::<f64>(d))).collect();
        let priors = ClassPriors::new(d, means).unwrap();
        let out = dnf_loss(&stack, &priors, &batch).unwrap();

        let theta = stack.params();
        for (k, &g) in out.flow_grad.iter().enumerate() {
            let eval = |v: f64| {
                let mut p = theta.clone();
                p[k] = v;
                let mut s = stack.clone();
                s.set_params(&p).unwrap();
                dnf_loss(&s, &priors, &batch).unwrap().nll
            };
            let fd = central_diff(eval, theta[k]);
            worst = worst.max(rel_err(g, fd));
            checked += 1;
        }
        let flat = priors.flat();
        let analytic: Vec<f64> = out.prior_grad.values().flatten().copied().collect();
        for (k, &g) in analytic.iter().enumerate() {
            let eval = |v: f64| {
                let mut p = flat.clone();
                p[k] = v;
                let mut pr = priors.clone();
                pr.set_flat(&p).unwrap();
                dnf_loss(&stack, &pr, &batch).unwrap().nll
            };
            let fd = central_diff(eval, flat[k]);
            worst = worst.max(rel_err(g, fd));
            checked += 1;
        }
    }
    outcome(
        worst <= 1e-4,
        format!("max relative error {worst:e} over {checked} partials"),
    )
}

// ---------------------------------------------------------------- training

/// Population skewness and excess kurtosis.
fn skew_kurt(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &x in xs {
        let c = x - m;
        m2 += c * c;
        m3 += c * c * c;
        m4 += c * c * c * c;
    }
    let (m2, m3, m4) = (m2 / n, m3 / n, m4 / n);
    (m3 / m2.powf(1.5), m4 / (m2 * m2) - 3.0)
}

fn c04_mixture(_: &Ctx) -> Outcome {
    let t0 = Instant::now();
    let mut rng = Rng::new(404);
    let centers = [[2.0, 0.0], [-1.0, 3f64.sqrt()], [-1.0, -(3f64.sqrt())]];
    let n = 10_000;
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let c = centers[i % 3];
            vec![c[0] + 0.5 * rng.normal::<f64>(), c[1] + 0.5 * rng.normal::<f64>()]
        })
        .collect();
    let set = labeled_set(rows, vec![0; n]);
    let cfg = TrainConfig {
        mode: TrainMode::VanillaNf,
        epochs: 200,
        batch_size: 1000,
        lr: 0.001,
        blocks: 10,
        hidden: Some([32; 3]),
        patience: 1000,
        diagnostics: false,
        seed: 1,
        ..TrainConfig::default()
    };
    let out = train(&set, &cfg).unwrap();
    let z = normalize_set(&out.stack, &set).unwrap();

    let mut ok = true;
    let mut parts = Vec::new();
    for dim in 0..2 {
        let col = z.vectors().column(dim);
        let (s, k) = skew_kurt(&col);
        ok &= s.abs() <= 0.2 && k.abs() <= 0.3;
        parts.push(format!("dim{dim} skew {s:.4} exkurt {k:.4}"));
    }
    let mean = z.mean();
    let mut cov = [[0.0; 2]; 2];
    for i in 0..n {
        let v = z.vector(i);
        for a in 0..2 {
            for b in 0..2 {
                cov[a][b] += (v[a] - mean[a]) * (v[b] - mean[b]) / n as f64;
            }
        }
    }
    let fro = ((cov[0][0] - 1.0).powi(2) + (cov[1][1] - 1.0).powi(2) + 2.0 * cov[0][1].powi(2)).sqrt();
    ok &= fro <= 0.1 && t0.elapsed().as_secs_f64() <= 300.0;
    parts.push(format!("|cov - I|_F {fro:.4}"));
    outcome(ok, parts.join(", "))
}

fn regularity(set: &VectorSet<f64>) -> RegulationReport {
    regulation_report(set, DEFAULT_K, DEFAULT_MIN_CLASS_SAMPLES).unwrap()
}

fn c05_regularity(ctx: &Ctx) -> Outcome {
    let t0 = Instant::now();
    let (set, out) = ctx.dnf_synth();
    let z = normalize_set(&out.stack, set).unwrap();
    let raw = regularity(set);
    let dnf = regularity(&z);
    let measures = [
        ("avg_pc_dir_var", raw.avg_pc_dir_var, dnf.avg_pc_dir_var),
        ("pc_shape_var_avg", raw.pc_shape_var_avg, dnf.pc_shape_var_avg),
        ("avg|kurtosis|", raw.avg_abs_kurtosis, dnf.avg_abs_kurtosis),
        ("avg|skewness|", raw.avg_skewness, dnf.avg_skewness),
    ];
    let mut ok = t0.elapsed().as_secs_f64() <= 600.0;
    let mut parts = Vec::new();
    for (name, r, d) in measures {
        let drop = (r - d) / r;
        ok &= drop >= 0.2;
        parts.push(format!("{name} {r:.4}->{d:.4} ({:+.1}%)", -100.0 * drop));
    }
    outcome(ok, parts.join(", "))
}

fn c12_diagnostics(ctx: &Ctx) -> Outcome {
    let (_, out) = ctx.dnf_synth();
    let first = out.trace.first().unwrap();
    let last = out.trace.last().unwrap();
    let ok = last.bw_ratio > first.bw_ratio && last.train_eer_cosine < first.train_eer_cosine;
    outcome(
        ok,
        format!(
            "bw_ratio {:.4}->{:.4}, probe cosine EER {:.4}->{:.4} over {} epochs",
            first.bw_ratio, last.bw_ratio, first.train_eer_cosine, last.train_eer_cosine, last.epoch
        ),
    )
}

fn cosine_eer(set: &VectorSet<f64>, trials: &TrialList) -> f64 {
    let s = score_trials(set, trials, cosine_score).unwrap();
    eer_from_trials(trials, &s).unwrap().eer
}

fn plda_eer(train_set: &VectorSet<f64>, eval_set: &VectorSet<f64>, trials: &TrialList) -> f64 {
    let model = plda_fit(train_set, 10).unwrap();
    let scorer = PldaScorer::new(&model).unwrap();
    let s = score_trials(eval_set, trials, |a, b| scorer.score(a, b)).unwrap();
    eer_from_trials(trials, &s).unwrap().eer
}

fn c06_open_set(_: &Ctx) -> Outcome {
    let dim = 10;
    let mut sums = [0.0; 4];
    for seed in 0..5u64 {
        let cfg = SynthConfig {
            classes: 200,
            samples_per_class: 50,
            dim,
            mean_spread: 1.0,
            seed,
            ..SynthConfig::default()
        };
        let data = synth_flow_warped::<f64>(&cfg, 4, 1.0).unwrap().0;
        let (tr, ev) = split_open_set(&data, 0.5, seed).unwrap();
        let ln = LinearTransform::length_norm(dim);
        let w = whiten_fit(&apply(&ln, &tr).unwrap()).unwrap();
        let front = |s: &VectorSet<f64>| apply(&w, &apply(&ln, s).unwrap()).unwrap();
        let (tr, ev) = (front(&tr), front(&ev));
        let trials = make_trials(&ev, 20, seed).unwrap();

        let tc = TrainConfig {
            epochs: 20,
            seed,
            diagnostics: false,
            ..TrainConfig::default()
        };
        let flow = train(&tr, &tc).unwrap().stack;
        let ztr = normalize_set(&flow, &tr).unwrap();
        let zev = normalize_set(&flow, &ev).unwrap();
        let lda = lda_fit(&ztr, dim, LAMBDA_COSINE).unwrap();

        sums[0] += plda_eer(&tr, &ev, &trials);
        sums[1] += plda_eer(&ztr, &zev, &trials);
        sums[2] += cosine_eer(&ev, &trials);
        sums[3] += cosine_eer(&apply(&lda, &zev).unwrap(), &trials);
    }
    let [raw_plda, dnf_plda, raw_cos, dnf_lda_cos] = sums.map(|s| s / 5.0);
    outcome(
        dnf_plda <= raw_plda && dnf_lda_cos <= raw_cos,
        format!(
            "mean EER raw->PLDA {raw_plda:.4}, DNF->PLDA {dnf_plda:.4}, raw->cosine {raw_cos:.4}, DNF-LDA->cosine {dnf_lda_cos:.4}"
        ),
    )
}

// ---------------------------------------------------------------- linear

/// Classes with distinct means and a shared anisotropic, rotated covariance.
fn anisotropic_classes(rng: &mut Rng, classes: usize, per_class: usize, d: usize) -> VectorSet<f64> {
    let mix: Vec<Vec<f64>> = (0..d).map(|_| rng.normal_vec::<f64>(d)).collect();
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for c in 0..classes {
        let mean: Vec<f64> = rng.normal_vec::<f64>(d).iter().map(|v| 3.0 * v).collect();
        for _ in 0..per_class {
            let e = rng.normal_vec::<f64>(d);
            rows.push((0..d).map(|i| mean[i] + (0..d).map(|j| mix[i][j] * e[j]).sum::<f64>()).collect());
            labels.push(c as i64);
        }
    }
    labeled_set(rows, labels)
}

fn to_na(m: &Matrix<f64>) -> DMatrix<f64> {
    DMatrix::from_row_slice(m.rows(), m.cols(), m.as_slice())
}

/// Sine of the largest principal angle between the row spaces of `a` and `b`.
fn max_principal_sine(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let qa = a.transpose().qr().q();
    let qb = b.transpose().qr().q();
    let resid = &qa - &qb * (qb.transpose() * &qa);
    resid.singular_values().max()
}

fn off_diagonal_norm(m: &DMatrix<f64>) -> f64 {
    let mut s = 0.0;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if i != j {
                s += m[(i, j)] * m[(i, j)];
            }
        }
    }
    s.sqrt()
}

fn c07_lda_oracle(_: &Ctx) -> Outcome {
    let mut rng = Rng::new(707);
    let mut worst_angle = 0.0f64;
    let mut worst_off = 0.0f64;
    for case in 0..10 {
        let d = 6 + case % 5;
        let set = anisotropic_classes(&mut rng, d + 3, 40, d);
        let out_dim = d / 2;
        let sc = compute_scatter(&set).unwrap();
        let (sb, sw) = (to_na(&sc.between), to_na(&sc.within));
        for lambda in [0.0, LAMBDA_COSINE] {
            let lda = lda_fit(&set, out_dim, lambda).unwrap();
            let w = to_na(&lda.projection);

            // brute force: S_b v = μ (λS_b + S_w) v via Cholesky reduction
            let denom = &sb * lambda + &sw;
            let l = denom.clone().cholesky().unwrap().l();
            let l_inv = l.clone().try_inverse().unwrap();
            let c = &l_inv * &sb * l_inv.transpose();
            let eig = SymmetricEigen::new((&c + c.transpose()) * 0.5);
            let mut order: Vec<usize> = (0..d).collect();
            order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
            let mut oracle = DMatrix::zeros(out_dim, d);
            for (r, &k) in order.iter().take(out_dim).enumerate() {
                let v = l_inv.transpose() * eig.eigenvectors.column(k);
                oracle.row_mut(r).copy_from(&v.transpose());
            }
            worst_angle = worst_angle.max(max_principal_sine(&w, &oracle));
            worst_off = worst_off
                .max(off_diagonal_norm(&(&w * &sb * w.transpose())))
                .max(off_diagonal_norm(&(&w * &sw * w.transpose())));
        }
    }
    outcome(
        worst_angle <= 1e-8 && worst_off <= 1e-8,
        format!("max principal-angle sine {worst_angle:e}, max off-diagonal Frobenius {worst_off:e}"),
    )
}

fn c08_lda_two_step(_: &Ctx) -> Outcome {
    let mut rng = Rng::new(808);
    let mut worst = 0.0f64;
    for case in 0..10 {
        let d = 5 + case % 4;
        let k = d - 1;
        let set = anisotropic_classes(&mut rng, d + 2, 30, d);
        let lda = lda_fit(&set, k, 0.0).unwrap();

        let ldan = ldan_fit(&set).unwrap();
        let y = apply(&ldan, &set).unwrap();
        let between = compute_scatter(&y).unwrap().between;
        let eig = sym_eig(&between).unwrap();
        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&i, &j| eig.values[j].total_cmp(&eig.values[i]));
        let p = to_na(&ldan.projection);
        for (r, &e) in order.iter().take(k).enumerate() {
            let v = DMatrix::from_row_slice(1, d, &eig.vector(e));
            let row = v * &p;
            let target = DMatrix::from_row_slice(1, d, lda.projection.row(r));
            let cos = (row.dot(&target) / (row.norm() * target.norm())).abs();
            worst = worst.max(1.0 - cos);
        }
    }
    outcome(worst <= 1e-8, format!("max 1 - |cos| between rows {worst:e}"))
}

// ---------------------------------------------------------------- PLDA

fn normal_pdf(x: f64, m: f64, var: f64) -> f64 {
    (-(x - m) * (x - m) / (2.0 * var)).exp() / (2.0 * std::f64::consts::PI * var).sqrt()
}

/// `∫ f` over `[a, b]` by composite Simpson.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

fn c09_plda_oracle(_: &Ctx) -> Outcome {
    let (m, vb, vw): (f64, f64, f64) = (0.3, 1.7, 0.6);
    let model = PldaModel {
        mean: vec![m],
        sigma_b: Matrix::from_diag(&[vb]),
        sigma_w: Matrix::from_diag(&[vw]),
    };
    let scorer = PldaScorer::new(&model).unwrap();
    let sd = (vb + vw).sqrt();
    let grid: Vec<f64> = (0..21).map(|i| m - 3.0 * sd + 0.3 * sd * i as f64).collect();
    let (lo, hi) = (m - 40.0 * vb.sqrt(), m + 40.0 * vb.sqrt());
    let mut worst = 0.0f64;
    for &x1 in &grid {
        for &x2 in &grid {
            let same = simpson(
                |y| normal_pdf(y, m, vb) * normal_pdf(x1, y, vw) * normal_pdf(x2, y, vw),
                lo,
                hi,
                20_000,
            );
            let marg = |x: f64| simpson(|y| normal_pdf(y, m, vb) * normal_pdf(x, y, vw), lo, hi, 20_000);
            let llr = same.ln() - marg(x1).ln() - marg(x2).ln();
            worst = worst.max((scorer.score(&[x1], &[x2]).unwrap() - llr).abs());
        }
    }

    let mut rng = Rng::new(909);
    let d = 3;
    let flat = PldaModel {
        mean: rng.normal_vec::<f64>(d),
        sigma_b: Matrix::zeros(d, d),
        sigma_w: Matrix::from_diag(&[0.5, 1.0, 2.0]),
    };
    let flat = PldaScorer::new(&flat).unwrap();
    let mut zero_ok = true;
    for _ in 0..200 {
        let (a, b) = (rng.normal_vec::<f64>(d), rng.normal_vec::<f64>(d));
        zero_ok &= flat.score(&a, &b).unwrap() == 0.0;
    }

    let set = anisotropic_classes(&mut rng, 12, 20, 5);
    let fitted = PldaScorer::new(&plda_fit(&set, 10).unwrap()).unwrap();
    let mut sym_ok = true;
    for _ in 0..200 {
        let (a, b) = (set.vector(rng.below(set.len())), set.vector(rng.below(set.len())));
        sym_ok &= fitted.score(a, b).unwrap().to_bits() == fitted.score(b, a).unwrap().to_bits();
    }
    outcome(
        worst <= 1e-6 && zero_ok && sym_ok,
        format!("max |LLR - quadrature| {worst:e} on 21x21 grid, Sigma_b=0 all zero: {zero_ok}, symmetric bits: {sym_ok}"),
    )
}

fn c10_plda_invariance(_: &Ctx) -> Outcome {
    let mut rng = Rng::new(1010);
    let d = 6;
    let set = anisotropic_classes(&mut rng, 30, 15, d);
    let trials = make_trials(&set, 5, 1).unwrap();

    // well-conditioned random affine map
    let mut a = Matrix::identity(d);
    for v in a.as_mut_slice() {
        *v += 0.4 * rng.normal::<f64>();
    }
    let shift = rng.normal_vec::<f64>(d);
    let mapped = set
        .try_map(d, |x| Ok(a.matvec(x).iter().zip(&shift).map(|(v, s)| v + s).collect()))
        .unwrap();

    let score = |s: &VectorSet<f64>| {
        let scorer = PldaScorer::new(&plda_fit(s, 10).unwrap()).unwrap();
        score_trials(s, &trials, |e, t| scorer.score(e, t)).unwrap()
    };
    let (s0, s1) = (score(&set), score(&mapped));
    let worst = s0.iter().zip(&s1).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    outcome(worst <= 1e-6, format!("max score change {worst:e} over {} trials", trials.len()))
}

// ---------------------------------------------------------------- EER

/// Every distinct score plus +inf as a threshold, counts by direct scan.
fn eer_oracle(targets: &[f64], nontargets: &[f64]) -> f64 {
    let mut thresholds: Vec<f64> = targets.iter().chain(nontargets).copied().collect();
    thresholds.sort_by(f64::total_cmp);
    thresholds.dedup();
    thresholds.push(f64::INFINITY);
    let rates = |th: f64| {
        let far = nontargets.iter().filter(|&&s| s >= th).count() as f64 / nontargets.len() as f64;
        let frr = targets.iter().filter(|&&s| s < th).count() as f64 / targets.len() as f64;
        (far, frr)
    };
    for w in thresholds.windows(2) {
        let (far0, frr0) = rates(w[0]);
        let (far1, frr1) = rates(w[1]);
        let (d0, d1) = (frr0 - far0, frr1 - far1);
        if d0 <= 0.0 && d1 >= 0.0 {
            let denom = d0 - d1;
            let t = if denom == 0.0 { 0.0 } else { d0 / denom };
            return far0 + t * (far1 - far0);
        }
    }
    unreachable!()
}

fn c11_eer_oracle(_: &Ctx) -> Outcome {
    let mut rng = Rng::new(1111);
    let mut mismatches = 0;
    for _ in 0..50 {
        let nt = 1 + rng.below(60);
        let nn = 1 + rng.below(200);
        let shift = rng.uniform(-1.0, 3.0);
        // coarse rounding forces ties
        let draw = |rng: &mut Rng, off: f64| ((rng.normal::<f64>() + off) * 4.0).round() / 4.0;
        let targets: Vec<f64> = (0..nt).map(|_| draw(&mut rng, shift)).collect();
        let nontargets: Vec<f64> = (0..nn).map(|_| draw(&mut rng, 0.0)).collect();
        if eer(&targets, &nontargets).unwrap().eer != eer_oracle(&targets, &nontargets) {
            mismatches += 1;
        }
    }
    let separated = eer(&[2.0, 3.0, 4.0], &[-1.0, 0.0, 1.0]).unwrap().eer;
    let tied = eer(&[1.5; 7], &[1.5; 11]).unwrap().eer;
    outcome(
        mismatches == 0 && separated == 0.0 && tied == 0.5,
        format!("{mismatches} mismatches in 50 lists, separated EER {separated:?}, all-tied EER {tied:?}"),
    )
}
