//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use bandspec_core::asymptotics::{
    fit_samples, gram_of_jacobi, perturbation_oracle, residual_series, verify_family_54,
    verify_theorem11, FitKind, DEFAULT_RATE_SLACK,
};
use bandspec_core::certificate::{certificate_sweep, check_lemma42_hypotheses, empirical_n1};
use bandspec_core::conjugation::{conjugate_and_report, lemma42_check, split_offdiagonal};
use bandspec_core::enclosure::enclose_default;
use bandspec_core::linalg::{
    eigenvalues, eigenvalues_dense_oracle, spectral_norm, truncation_stability_batch, DenseSymmetricMatrix,
    EigenRange, SymmetricBandMatrix,
};
use bandspec_core::model::{CutoffFunction, EntrySequence, TauPolicy};
use bandspec_core::presets;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

type Criterion = (&'static str, Duration, fn() -> Outcome);

fn oracle_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0b5e55ed);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let m = rng.gen_range(1..=3);
        let n = rng.gen_range(m + 1..=100);
        let bands: Vec<Vec<f64>> = (0..=m).map(|k| (0..n - k).map(|_| rng.gen_range(-10.0..10.0)).collect()).collect();
        let band = SymmetricBandMatrix::new(bands).unwrap();
        let fast = eigenvalues(&band, EigenRange::All).unwrap().eigenvalues;
        let slow = eigenvalues_dense_oracle(&band.to_dense_symmetric()).unwrap().eigenvalues;
        let norm = slow.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        let dev = fast.iter().zip(&slow).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        worst = worst.max(dev / norm);
    }
    outcome(worst <= 1e-9, format!("max |dlambda| / ||M|| = {worst:.2e} over 200 matrices (tol 1e-9)"))
}

fn enclosure_containment() -> Outcome {
    let mut parts = vec![];
    let mut violations = 0;
    for model in [presets::m1(), presets::m2(), presets::m3()] {
        let records = truncation_stability_batch(&model, 1..=500, 2000).unwrap();
        let mut stable = 0;
        for r in records.iter().filter(|r| r.stable) {
            stable += 1;
            if !enclose_default(&model, r.n).unwrap().contains(r.lambda) {
                violations += 1;
            }
        }
        parts.push(format!("{} {stable} stable", model.label()));
    }
    outcome(violations == 0, format!("{violations} violations; {}", parts.join(", ")))
}

fn certificate_validity() -> Outcome {
    let tau = TauPolicy::Quarter;
    let mut parts = vec![];
    let (mut violations, mut checked) = (0, 0);
    for model in [presets::m1(), presets::m2(), presets::m3()] {
        let Some(n1) = empirical_n1(&model, &tau, 1..=400) else {
            return outcome(false, format!("{}: no empirical n1 up to 400", model.label()));
        };
        let rows = certificate_sweep(&model, &tau, n1..=400, 2000).unwrap();
        let stable: Vec<_> = rows.iter().filter(|r| r.stable).collect();
        checked += stable.len();
        violations += stable.iter().filter(|r| !r.holds).count();
        parts.push(format!("{} n1 = {n1}, {} rows", model.label(), stable.len()));
    }
    outcome(violations == 0 && checked > 0, format!("{violations} violations; {}", parts.join(", ")))
}

fn rate_reproduction() -> Outcome {
    let mut pass = true;
    let mut parts = vec![];
    for (params, model) in [(presets::m1_params(), presets::m1()), (presets::m2_params(), presets::m2())] {
        let series = residual_series(&model, 100..=400, 1600).unwrap();
        let verdict = verify_theorem11(&params, &series, DEFAULT_RATE_SLACK).unwrap();
        let fit = verdict.fitted.clone().unwrap();
        // independent second-order estimate over the same window
        let samples: Vec<_> = (100..=400).map(|n| (n, perturbation_oracle(&model, n).unwrap(), 0.0)).collect();
        let oracle = fit_samples(&samples, FitKind::PurePower).unwrap();
        let signs = series
            .entries
            .iter()
            .filter(|e| e.stable)
            .all(|e| e.residual.signum() == perturbation_oracle(&model, e.n).unwrap().signum());
        let agree = (fit.exponent - oracle.exponent).abs() <= 0.1;
        pass &= verdict.pass && signs && agree;
        parts.push(format!(
            "{} fitted {:.3} vs predicted {} (+0.15), oracle {:.3}, signs {}",
            model.label(),
            fit.exponent,
            verdict.predicted,
            oracle.exponent,
            if signs { "agree" } else { "DIFFER" }
        ));
    }
    outcome(pass, parts.join("; "))
}

fn conjugation_identities() -> Outcome {
    let model = presets::m1();
    let tau = TauPolicy::Quarter;
    let chi = CutoffFunction::smoothstep();
    let mut pass = true;
    let mut parts = vec![];
    for n in [40, 100, 200] {
        let order = n + 2 * (n / 4) + 8;
        let r = match conjugate_and_report(&model, n, &tau, &chi, order) {
            Ok(r) => r,
            Err(e) => return outcome(false, format!("n = {n}: {e}")),
        };
        let a_n = split_offdiagonal(&model, n, &tau, &chi, order).unwrap().a_n;
        let rel_residual = r.commutator_residual / spectral_norm(&a_n).unwrap();
        let ok = rel_residual <= 1e-12
            && r.lhs_321 <= r.rhs_321
            && r.lhs_342 <= r.rhs_342
            && r.spectrum_deviation <= 1e-9 * r.a_norm;
        pass &= ok;
        parts.push(format!(
            "n={n}: eq {rel_residual:.1e}, dist {:.3} <= {:.3}, comm {:.3} <= {:.3}, spec {:.1e}",
            r.lhs_321,
            r.rhs_321,
            r.lhs_342,
            r.rhs_342,
            r.spectrum_deviation / r.a_norm
        ));
    }
    outcome(pass, parts.join("; "))
}

fn lemma42() -> Outcome {
    let model = presets::m1();
    let tau = TauPolicy::Quarter;
    let chi = CutoffFunction::smoothstep();
    let reach = 300 + 2 * 75 + 8;
    let Some(n0) = check_lemma42_hypotheses(&model, &tau, 1..=reach).n0() else {
        return outcome(false, "hypotheses never hold up to 300");
    };
    let start = n0 + model.m();
    let mut worst = 0.0f64;
    for n in start..=300 {
        let order = n + 2 * (n / 4) + 8;
        let c = lemma42_check(&model, n, &tau, &chi, order).unwrap();
        worst = worst.max((c.lambda_n_split - c.d_n).abs() / (1.0 + c.d_n.abs()));
    }
    outcome(worst <= 1e-10, format!("threshold n = {start}, max relative gap {worst:.2e} over n <= 300 (tol 1e-10)"))
}

fn stretched_family() -> Outcome {
    let params = presets::stretched_params();
    let model = presets::stretched();
    let limit = params.overflow_limit(1e280, 1_000_000);
    let series = residual_series(&model, 20..=200, 400).unwrap();
    let v = verify_family_54(&params, &series, DEFAULT_RATE_SLACK).unwrap();
    let f = v.fitted.as_ref().unwrap();
    outcome(
        v.pass,
        format!(
            "relative exponent {:.3} (log coeff {:.3}) vs predicted {} (+0.15), n in 20..=200 of overflow-safe 1..={limit}",
            f.exponent, f.log_coefficient, v.predicted
        ),
    )
}

fn gram_application() -> Outcome {
    let mut worst = 0.0f64;
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut draw = || -> Vec<f64> { (0..51).map(|_| rng.gen_range(-5.0..5.0)).collect() };
        let (sub, diag, sup) = (draw(), draw(), draw());
        let g = gram_of_jacobi(
            EntrySequence::from_table("c", sub),
            EntrySequence::from_table("b", diag),
            EntrySequence::from_table("a", sup),
        )
        .unwrap();
        let sigma = g.singular_values(50).unwrap();
        let j = g.jacobi_section(50);
        let dense = DenseSymmetricMatrix::new(j.transpose().matmul(&j)).unwrap();
        let oracle: Vec<f64> = eigenvalues_dense_oracle(&dense)
            .unwrap()
            .eigenvalues
            .iter()
            .map(|x| x.max(0.0).sqrt())
            .collect();
        let scale = oracle[49];
        let dev = sigma.iter().zip(&oracle).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        worst = worst.max(dev / scale);
    }
    outcome(worst <= 1e-8, format!("max |dsigma| / sigma_max = {worst:.2e} over 20 random J_50 (tol 1e-8)"))
}

fn determinism() -> Outcome {
    let root = tempfile::tempdir().unwrap();
    let cfg = root.path().join("m1.conf");
    fs::write(
        &cfg,
        "[model]\nkind = preset\npreset = M1\n[run]\nn_range = 1..200\nN = 800\nlab_n = 40, 100\n",
    )
    .unwrap();
    let run = |dir: &Path| {
        Command::new(env!("CARGO_BIN_EXE_bandspec"))
            .args(["report", "--force", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(dir)
            .status()
            .unwrap()
            .code()
    };
    let (a, b) = (root.path().join("a"), root.path().join("b"));
    if run(&a) != Some(0) || run(&b) != Some(0) {
        return outcome(false, "report did not exit 0");
    }
    let mut names: Vec<String> = fs::read_dir(&a)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .filter(|n| n.ends_with(".csv"))
        .collect();
    names.sort();
    let same = names.iter().all(|n| fs::read(a.join(n)).ok() == fs::read(b.join(n)).ok());
    outcome(same && names.len() == 5, format!("{} CSVs compared: {}", names.len(), names.join(", ")))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("eigensolver oracle equivalence", Duration::from_secs(30), oracle_equivalence),
        ("enclosure containment", Duration::from_secs(120), enclosure_containment),
        ("certificate validity", Duration::from_secs(120), certificate_validity),
        ("rate reproduction", Duration::from_secs(180), rate_reproduction),
        ("conjugation identities", Duration::from_secs(60), conjugation_identities),
        ("split eigenvalue lemma", Duration::from_secs(60), lemma42),
        ("stretched-exponential family", Duration::from_secs(60), stretched_family),
        ("Gram singular values", Duration::from_secs(10), gram_application),
        ("report determinism", Duration::from_secs(120), determinism),
    ];
    let start = Instant::now();
    let mut failed = 0;
    for (i, (name, limit, check)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let result = std::panic::catch_unwind(check).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        let elapsed = t.elapsed();
        let in_time = elapsed <= *limit;
        let pass = result.pass && in_time;
        if !pass {
            failed += 1;
        }
        println!(
            "{} [{}] {name}: {} ({:.2} s, limit {} s{})",
            if pass { "PASS" } else { "FAIL" },
            i + 1,
            result.detail,
            elapsed.as_secs_f64(),
            limit.as_secs(),
            if in_time { "" } else { ", over time" }
        );
    }
    let total = start.elapsed();
    let suite_ok = total <= Duration::from_secs(600);
    println!(
        "{} full suite: {:.1} s (limit 600 s), {failed} of {} criteria failed",
        if suite_ok && failed == 0 { "PASS" } else { "FAIL" },
        total.as_secs_f64(),
        criteria.len()
    );
    if failed > 0 || !suite_ok {
        std::process::exit(1);
    }
}
