//! Subcommand pipelines. Each returns its artifacts in memory; the caller
//! writes them.

use std::fmt::Write as _;

use bandspec_core::asymptotics::{
    fit_rate, fit_relative_rate, gram_of_jacobi_checked, residual_series, verify_family_54, verify_theorem11,
    RateFit, RateVerdict, ResidualSeries, GRAM_CHECK_ORDER,
};
use bandspec_core::certificate::{certificate_sweep, check_lemma42_hypotheses, empirical_n1};
use bandspec_core::conjugation::{conjugate_and_report, default_lab_order, lemma42_check};
use bandspec_core::enclosure::{default_horizon, enclose, DEFAULT_TAIL_CHECK};
use bandspec_core::linalg::{eigenvalues, truncate, truncation_stability_batch, DenseSymmetricMatrix, EigenRange};
use bandspec_core::model::{
    make_power_like, make_special_family, BandModel, CutoffFunction, EntrySequence, PowerLikeParams,
    SpecialFamilyParams,
};
use bandspec_core::{presets, Error};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::{ConfigError, ModelSpec, NRange, RunConfig};
use crate::plot::{enclosure_plot, residual_plot, PlotError};
use crate::row;
use crate::table::Table;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Command {
    Eigs,
    Enclose,
    Certify,
    Conjugate,
    Rate,
    GramSingular,
    Report,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Eigs => "eigs",
            Command::Enclose => "enclose",
            Command::Certify => "certify",
            Command::Conjugate => "conjugate",
            Command::Rate => "rate",
            Command::GramSingular => "gram-singular",
            Command::Report => "report",
        }
    }

    pub fn file_stem(self) -> &'static str {
        match self {
            Command::GramSingular => "gram_singular",
            c => c.name(),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("config: {0}")]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Core(#[from] Error),
    #[error(transparent)]
    Plot(#[from] PlotError),
    #[error(transparent)]
    Output(#[from] crate::output::OutputError),
}

impl RunError {
    /// 1 for configuration and input errors, 2 for numerical or I/O failures,
    /// 3 for a violated identity inside the core.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 1,
            RunError::Core(e) if e.is_input_error() => 1,
            RunError::Core(Error::Consistency { op, .. })
                if matches!(*op, "conjugate_and_report" | "verify_commutator_equation" | "gram_of_jacobi") =>
            {
                3
            }
            RunError::Plot(PlotError::Precondition(_)) => 1,
            _ => 2,
        }
    }
}

/// Files produced by a run plus the property violations found.
#[derive(Debug, Default)]
pub struct Artifacts {
    pub files: Vec<(String, Vec<u8>)>,
    pub violations: Vec<String>,
    pub summary: String,
}

impl Artifacts {
    fn csv(&mut self, name: &str, table: &Table) {
        self.files.push((name.to_string(), table.to_csv().into_bytes()));
    }

    fn svg(&mut self, name: &str, plot: &crate::plot::Plot) -> Result<(), RunError> {
        self.files.push((name.to_string(), plot.render()?.into_bytes()));
        Ok(())
    }

    fn line(&mut self, text: impl AsRef<str>) {
        self.summary.push_str(text.as_ref());
        self.summary.push('\n');
    }

    fn absorb(&mut self, other: Artifacts) {
        self.files.extend(other.files);
        self.violations.extend(other.violations);
        self.summary.push_str(&other.summary);
    }
}

/// Rate-theorem parameters attached to a model, when known.
enum RateClaim {
    PowerLike(PowerLikeParams),
    Special(SpecialFamilyParams),
    None,
}

fn build_model(spec: &ModelSpec) -> Result<(BandModel, RateClaim), RunError> {
    Ok(match spec {
        ModelSpec::Preset(name) => {
            let model = presets::by_name(name).expect("validated preset");
            let claim = match name.as_str() {
                "M1" | "m1" => RateClaim::PowerLike(presets::m1_params()),
                "M2" | "m2" => RateClaim::PowerLike(presets::m2_params()),
                "M3" | "m3" => RateClaim::PowerLike(presets::m3_params()),
                _ => RateClaim::Special(presets::stretched_params()),
            };
            (model, claim)
        }
        ModelSpec::PowerLike(p) => (make_power_like(p)?, RateClaim::PowerLike(p.clone())),
        ModelSpec::Special { params, off_scale } => (
            make_special_family(params, vec![params.scaled_off_diagonal(*off_scale)])?,
            RateClaim::Special(params.clone()),
        ),
        ModelSpec::Table { d, a } => {
            let model = BandModel::new(
                EntrySequence::from_table("d", d.clone()),
                a.iter()
                    .enumerate()
                    .map(|(i, v)| EntrySequence::from_table(format!("a{}", i + 1), v.clone()))
                    .collect(),
            )?
            .with_label("table");
            (model, RateClaim::None)
        }
        ModelSpec::JacobiTable { .. } | ModelSpec::JacobiRandom { .. } => {
            return Err(ConfigError::BadValue {
                section: "model".into(),
                key: "kind".into(),
                msg: "a Jacobi operator J is only accepted by gram-singular".into(),
            }
            .into())
        }
    })
}

fn band_model(config: &RunConfig) -> Result<(BandModel, RateClaim), RunError> {
    build_model(&config.model)
}

/// `N` from the config, else `4 max(n)`.
fn order_for(config: &RunConfig, range: &NRange) -> usize {
    config.order.unwrap_or(4 * range.max())
}

fn header(a: &mut Artifacts, command: Command, config: &RunConfig, model: &str) {
    a.line(format!("bandspec {} on {model}", command.name()));
    a.line(format!("config_sha256 = {}", config.hash));
}

pub fn run(command: Command, config: &RunConfig) -> Result<Artifacts, RunError> {
    if let Some(c) = &config.command {
        if c != command.name() {
            return Err(ConfigError::BadValue {
                section: "run".into(),
                key: "command".into(),
                msg: format!("config is for `{c}`, invoked as `{}`", command.name()),
            }
            .into());
        }
    }
    match command {
        Command::Eigs => eigs(config),
        Command::Enclose => {
            let (model, _) = band_model(config)?;
            enclose_cmd(config, &model)
        }
        Command::Certify => {
            let (model, _) = band_model(config)?;
            certify_cmd(config, &model)
        }
        Command::Conjugate => {
            let (model, _) = band_model(config)?;
            conjugate_cmd(config, &model, &config.require_n_range()?.values())
        }
        Command::Rate => {
            let (model, claim) = band_model(config)?;
            rate_cmd(config, &model, &claim)
        }
        Command::GramSingular => gram_cmd(config),
        Command::Report => report(config),
    }
}

fn eigs(config: &RunConfig) -> Result<Artifacts, RunError> {
    let (model, _) = band_model(config)?;
    let order = config.require_order()?;
    let which = match &config.n_range {
        None => EigenRange::All,
        Some(r) => EigenRange::Indices(r.span()),
    };
    let summary = eigenvalues(&truncate(&model, order)?, which)?;
    let keep: Option<Vec<usize>> = config.n_range.as_ref().map(NRange::values);
    let mut t = Table::new(&["k", "lambda_k"]);
    for (i, &v) in summary.eigenvalues.iter().enumerate() {
        let k = summary.first_index + i;
        if keep.as_ref().map_or(true, |ks| ks.binary_search(&k).is_ok()) {
            t.push(row![k, v]);
        }
    }
    let mut a = Artifacts::default();
    header(&mut a, Command::Eigs, config, model.label());
    a.line(format!("section order N = {order}, bandwidth m = {}", model.m()));
    a.line(format!("method = {}", summary.method));
    a.line(format!("a priori accuracy = {:e} * ||A_N||", summary.residual_bound));
    a.csv("eigs.csv", &t);
    Ok(a)
}

fn enclose_cmd(config: &RunConfig, model: &BandModel) -> Result<Artifacts, RunError> {
    let range = config.require_n_range()?;
    let order = order_for(config, range);
    let stability = truncation_stability_batch(model, range.span(), order)?;
    let tail = config.tail_check.unwrap_or(DEFAULT_TAIL_CHECK);
    let ns = range.values();
    let rows = ns
        .par_iter()
        .map(|&n| {
            let horizon = config.horizon.unwrap_or_else(|| default_horizon(n));
            let e = enclose(model, n, horizon, tail)?;
            Ok((e, stability[n - range.min()].clone()))
        })
        .collect::<Result<Vec<_>, Error>>()?;

    let mut t = Table::new(&["n", "d_n", "lower", "upper", "lambda_n", "stable", "contained", "tail_certified"]);
    let mut a = Artifacts::default();
    let mut band = vec![];
    let (mut stable, mut uncertified) = (0, 0);
    for (e, s) in &rows {
        let contained = e.contains(s.lambda);
        if s.stable {
            stable += 1;
            if !contained {
                a.violations.push(format!(
                    "enclosure: lambda_{} = {:e} outside [{:e}, {:e}]",
                    e.n, s.lambda, e.lower, e.upper
                ));
            }
        }
        if !e.tail_certified {
            uncertified += 1;
        }
        band.push((e.n, e.lower, s.lambda, e.upper));
        t.push(row![e.n, model.d(e.n as i64), e.lower, e.upper, s.lambda, s.stable, contained, e.tail_certified]);
    }
    header(&mut a, Command::Enclose, config, model.label());
    a.line(format!("min-max enclosure lower <= lambda_n(A_N) <= upper, N = {order}"));
    a.line(format!(
        "{} indices, {stable} truncation-stable, {} stable outside the enclosure, {uncertified} without tail certificate",
        rows.len(),
        a.violations.len()
    ));
    a.csv("enclose.csv", &t);
    a.svg("enclose.svg", &enclosure_plot(model.label(), &band))?;
    Ok(a)
}

fn certify_cmd(config: &RunConfig, model: &BandModel) -> Result<Artifacts, RunError> {
    let range = config.require_n_range()?;
    let order = order_for(config, range);
    let tau = config.tau.policy();
    let span = range.span();
    let n1 = empirical_n1(model, &tau, span.clone());
    let keep = range.values();
    let checks = certificate_sweep(model, &tau, span.clone(), order)?;

    let mut t = Table::new(&[
        "n", "tau_n", "d_n", "lambda_n", "abs_residual", "bound", "stable", "above_n1", "contained",
    ]);
    let mut a = Artifacts::default();
    let mut counted = 0;
    for c in checks.iter().filter(|c| keep.binary_search(&c.n).is_ok()) {
        let above = n1.map_or(false, |n1| c.n >= n1);
        if above && c.stable {
            counted += 1;
            if !c.holds {
                a.violations.push(format!(
                    "certificate: |lambda_{} - d| = {:e} exceeds bound {:e}",
                    c.n,
                    (c.lambda - c.d).abs(),
                    c.bound
                ));
            }
        }
        t.push(row![c.n, tau.value(c.n)?, c.d, c.lambda, (c.lambda - c.d).abs(), c.bound, c.stable, above, c.holds]);
    }
    let hyp = check_lemma42_hypotheses(model, &tau, 1..=*span.end());
    header(&mut a, Command::Certify, config, model.label());
    a.line(format!("certificate |lambda_n - d(n)| <= 15 m^3 sup rho_n, tau = {}, N = {order}", tau.label()));
    let show = |x: Option<usize>| x.map_or("none".to_string(), |v| v.to_string());
    a.line(format!("monotone d from n = {}", show(hyp.monotone_from)));
    a.line(format!("gap condition from n = {}", show(hyp.gap_from)));
    a.line(format!("empirical n1 = {}", show(n1)));
    a.line(format!(
        "{} certified rows, {counted} stable rows past n1, {} violations",
        t.rows().len(),
        a.violations.len()
    ));
    a.csv("certify.csv", &t);
    Ok(a)
}

fn conjugate_cmd(config: &RunConfig, model: &BandModel, ns: &[usize]) -> Result<Artifacts, RunError> {
    let tau = config.tau.policy();
    let chi = CutoffFunction::smoothstep();
    let tol = &config.tolerances;
    let reports = ns
        .par_iter()
        .map(|&n| {
            let order = match config.order {
                Some(o) => o,
                None => default_lab_order(model, n, &tau)?,
            };
            let r = conjugate_and_report(model, n, &tau, &chi, order)?;
            let l = lemma42_check(model, n, &tau, &chi, order)?;
            Ok((r, l))
        })
        .collect::<Result<Vec<_>, Error>>()?;

    let mut t = Table::new(&[
        "n",
        "order",
        "tau_n",
        "commutator_residual",
        "split_distance",
        "split_distance_bound",
        "commutator_norm",
        "commutator_bound",
        "lambda_n_split",
        "d_n",
        "split_eigenvalue_ok",
        "spectrum_deviation",
        "a_norm",
        "orthogonality_defect",
        "row_mass_a",
        "row_mass_b",
    ]);
    let mut a = Artifacts::default();
    for (r, l) in &reports {
        if r.spectrum_deviation > tol.spectrum_rel * r.a_norm {
            a.violations.push(format!(
                "conjugation: spectrum of B_n deviates by {:e} at n = {} (||A|| = {:e})",
                r.spectrum_deviation, r.n, r.a_norm
            ));
        }
        t.push(row![
            r.n,
            r.order,
            r.tau_n,
            r.commutator_residual,
            r.lhs_321,
            r.rhs_321,
            r.lhs_342,
            r.rhs_342,
            l.lambda_n_split,
            l.d_n,
            l.holds(tol.lemma42_rel),
            r.spectrum_deviation,
            r.a_norm,
            r.orthogonality_defect,
            r.row_mass_a,
            r.row_mass_b,
        ]);
    }
    header(&mut a, Command::Conjugate, config, model.label());
    a.line("conjugation B_n = exp(K) A exp(-K) with A_n + [D, K] = 0");
    a.line("split_distance = ||B_n - (D + A~_n)||, bounded by ||[K, A~_n]|| + ||[K, A_n]|| / 2");
    a.line("commutator_norm = ||[A_n, K]||, bounded by 10 m^3 sup rho_{n,4m}");
    a.line(format!("{} indices, {} violations", reports.len(), a.violations.len()));
    a.csv("conjugate.csv", &t);
    Ok(a)
}

fn fit_row(t: &mut Table, quantity: &str, fit: Option<&RateFit>, predicted: Option<f64>, pass: Option<bool>) {
    let pred = predicted.map_or(String::new(), |p| crate::table::format_real(p));
    let pass = pass.map_or("", |p| if p { "yes" } else { "no" });
    match fit {
        Some(f) => t.push(row![
            quantity,
            f.fit_kind.name(),
            f.exponent,
            f.log_constant,
            f.log_coefficient,
            *f.window.start(),
            *f.window.end(),
            f.r_squared,
            f.used_count,
            f.excluded_count,
            pred,
            pass,
        ]),
        None => t.push(row![quantity, "none", "", "", "", "", "", "", "", "", pred, pass]),
    }
}

fn rate_cmd(config: &RunConfig, model: &BandModel, claim: &RateClaim) -> Result<Artifacts, RunError> {
    let range = config.require_n_range()?;
    let order = order_for(config, range);
    let series = residual_series(model, range.span(), order)?;
    let keep = range.values();
    let series = ResidualSeries {
        entries: series.entries.into_iter().filter(|e| keep.binary_search(&e.n).is_ok()).collect(),
        ..series
    };

    let mut residuals = Table::new(&["n", "lambda_n", "d_n", "residual", "stable"]);
    for e in &series.entries {
        residuals.push(row![e.n, e.lambda_n, e.d_n, e.residual, e.stable]);
    }
    let slack = config.tolerances.rate_slack;
    let mut fits = Table::new(&[
        "quantity",
        "fit_kind",
        "exponent",
        "log_constant",
        "log_coefficient",
        "window_start",
        "window_end",
        "r_squared",
        "used",
        "excluded",
        "predicted",
        "pass",
    ]);
    let span = range.span();
    let absolute = match fit_rate(&series, span.clone(), config.fit) {
        Ok(f) => Some(f),
        Err(Error::TooFewPoints { .. }) => None,
        Err(e) => return Err(e.into()),
    };
    let relative = match fit_relative_rate(&series, span.clone(), config.fit) {
        Ok(f) => Some(f),
        Err(Error::TooFewPoints { .. }) => None,
        Err(e) => return Err(e.into()),
    };
    fit_row(&mut fits, "absolute", absolute.as_ref(), None, None);
    fit_row(&mut fits, "relative", relative.as_ref(), None, None);

    let mut a = Artifacts::default();
    header(&mut a, Command::Rate, config, model.label());
    a.line(format!("residual lambda_n(A_N) - d(n), N = {order}, {} stable of {}", series.stable_count(), series.entries.len()));

    let verdict: Option<(RateVerdict, &str, bool)> = match claim {
        RateClaim::PowerLike(p) if p.kappa() > 0.0 => Some((
            verify_theorem11(p, &series, slack)?,
            "power-like rate lambda_n = d(n) + O(n^(delta - kappa))",
            false,
        )),
        RateClaim::Special(p) => Some((
            verify_family_54(p, &series, slack)?,
            "special-family relative rate lambda_n = d(n) (1 + O(.))",
            true,
        )),
        _ => None,
    };
    let plot = match &verdict {
        Some((v, text, relative)) => {
            let quantity = if *relative { "relative_claim" } else { "absolute_claim" };
            fit_row(&mut fits, quantity, v.fitted.as_ref(), Some(v.predicted), Some(v.pass));
            a.line(format!("{text}: predicted {}", v.predicted_text));
            match &v.fitted {
                Some(f) => a.line(format!(
                    "fitted exponent {:.4} (log coefficient {:.4}, r^2 {:.4}), slack {slack}: {}",
                    f.exponent,
                    f.log_coefficient,
                    f.r_squared,
                    if v.pass { "pass" } else { "FAIL" }
                )),
                None => a.line("all residuals at rounding level: pass"),
            }
            if !v.pass {
                a.violations.push(format!(
                    "rate: fitted exponent {:?} exceeds predicted {} + {slack}",
                    v.fitted.as_ref().map(|f| f.exponent),
                    v.predicted
                ));
            }
            residual_plot(&series, v.fitted.as_ref(), Some(v.predicted), *relative)
        }
        None => residual_plot(&series, absolute.as_ref(), None, false),
    };
    a.csv("residuals.csv", &residuals);
    a.csv("fit.csv", &fits);
    a.svg("rate.svg", &plot)?;
    Ok(a)
}

fn padded(v: &[f64], len: usize) -> Vec<f64> {
    let mut out = v.to_vec();
    out.resize(len.max(v.len()), 0.0);
    out
}

fn gram_cmd(config: &RunConfig) -> Result<Artifacts, RunError> {
    let order = config.require_order()?;
    if order < 3 {
        return Err(ConfigError::BadValue {
            section: "run".into(),
            key: "N".into(),
            msg: "gram-singular needs N >= 3".into(),
        }
        .into());
    }
    let (sub, diag, sup) = match &config.model {
        ModelSpec::JacobiTable { sub, diag, sup } => {
            if diag.len() < order || sub.len() + 1 < order || sup.len() + 1 < order {
                return Err(ConfigError::BadValue {
                    section: "model".into(),
                    key: "diag".into(),
                    msg: format!("J_N needs {order} diagonal and {} off-diagonal entries", order - 1),
                }
                .into());
            }
            // entries past J_N do not affect the section; zero them
            (padded(&sub[..order - 1], order + 1), padded(&diag[..order], order + 1), padded(&sup[..order - 1], order + 1))
        }
        ModelSpec::JacobiRandom { low, high } => {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            let mut draw = |len: usize| -> Vec<f64> {
                let mut v: Vec<f64> = (0..len).map(|_| rng.gen_range(*low..*high)).collect();
                v.resize(order + 1, 0.0);
                v
            };
            let diag = draw(order);
            let sub = draw(order - 1);
            let sup = draw(order - 1);
            (sub, diag, sup)
        }
        _ => {
            return Err(ConfigError::BadValue {
                section: "model".into(),
                key: "kind".into(),
                msg: "gram-singular needs kind = jacobi_table or jacobi_random".into(),
            }
            .into())
        }
    };
    let g = gram_of_jacobi_checked(
        EntrySequence::from_table("c", sub),
        EntrySequence::from_table("b", diag),
        EntrySequence::from_table("a", sup),
        GRAM_CHECK_ORDER.min(order),
    )?;
    let sigma = g.singular_values(order)?;
    let j = g.jacobi_section(order);
    let oracle_gram = DenseSymmetricMatrix::new(j.transpose().matmul(&j))?.eigenvalues_jacobi()?;
    let oracle: Vec<f64> = oracle_gram.iter().map(|x| x.max(0.0).sqrt()).collect();
    let scale = oracle.last().copied().unwrap_or(0.0).max(f64::MIN_POSITIVE);

    let mut t = Table::new(&["k", "sigma", "sigma_oracle", "abs_diff"]);
    let mut a = Artifacts::default();
    let mut worst = 0.0f64;
    for (k, (s, o)) in sigma.iter().zip(&oracle).enumerate() {
        worst = worst.max((s - o).abs());
        t.push(row![k + 1, *s, *o, (s - o).abs()]);
    }
    if worst > config.tolerances.gram_rel * scale {
        a.violations.push(format!(
            "gram: singular values deviate from the dense oracle by {worst:e} (scale {scale:e})"
        ));
    }
    header(&mut a, Command::GramSingular, config, "tridiagonal J");
    a.line(format!("singular values of J_N, N = {order}, from the pentadiagonal J^T J"));
    let _ = write!(a.summary, "largest deviation from the dense Gram oracle = {worst:e} (scale {scale:e})\n");
    a.csv("gram_singular.csv", &t);
    Ok(a)
}

fn report(config: &RunConfig) -> Result<Artifacts, RunError> {
    let (model, claim) = band_model(config)?;
    let mut a = Artifacts::default();
    a.absorb(enclose_cmd(config, &model)?);
    a.absorb(certify_cmd(config, &model)?);
    a.absorb(rate_cmd(config, &model, &claim)?);
    if !config.lab_n.is_empty() {
        let lab = RunConfig {
            order: None,
            ..config.clone()
        };
        a.absorb(conjugate_cmd(&lab, &model, &config.lab_n)?);
    }
    Ok(a)
}
