use std::fs;

use serde::Serialize;

use stable_extrap::experiments::{
    plateau_table, run_alpha_profile, run_extrapolation_decay, run_gram_timing, run_noise_coefficients,
    run_singular_bounds_sweep, TestFunction,
};
use stable_extrap::extrapolator::{interval_edge, DegreeChoice};
use stable_extrap::solver::least_squares_residual;
use stable_extrap::verify::{run_suite, Relation};
use stable_extrap::{
    extrapolate_with, fit as fit_samples, optimal_degree, Basis, BoundKind, Execution, ExtrapolationOptions,
    FitOptions, GramMethod, ProblemParams, Regime, SampleSet, Suite, SuiteParams,
};

use crate::error::CliError;
use crate::io::{nums, read_samples, write_json, write_table, Num};
use crate::{BasisArg, BoundArg, ExtrapolateArgs, FigureArgs, FitArgs, GramArg, ProblemArgs, VerifyArgs};

const SCHEMA: u32 = 1;

/// Largest degree for which `fit` reports the Gram condition number.
const COND_LIMIT: usize = 500;

fn basis(b: BasisArg) -> Basis {
    match b {
        BasisArg::Cheb => Basis::Chebyshev,
        BasisArg::Leg => Basis::Legendre,
    }
}

fn gram(g: GramArg) -> GramMethod {
    match g {
        GramArg::Naive => GramMethod::Naive,
        GramArg::Fast => GramMethod::Fast,
    }
}

fn basis_name(b: Basis) -> &'static str {
    match b {
        Basis::Chebyshev => "chebyshev",
        Basis::Legendre => "legendre",
    }
}

fn regime_name(r: Regime) -> &'static str {
    match r {
        Regime::Oversampled => "oversampled",
        Regime::Undersampled => "undersampled",
    }
}

fn problem(args: &ProblemArgs, samples: &SampleSet) -> Result<ProblemParams, CliError> {
    let need = |v: Option<f64>, flag: &str| v.ok_or_else(|| CliError::Usage(format!("{flag} is required")));
    let n = samples.n();
    if let Some(expected) = args.n {
        if expected != n {
            return Err(CliError::Input(format!("--N {expected} does not match the input, which has N = {n}")));
        }
    }
    Ok(ProblemParams::new(n, need(args.rho, "--rho")?, need(args.eps, "--eps")?, need(args.q, "--Q")?)?)
}

#[derive(Serialize)]
struct AutoDegree {
    #[serde(rename = "M_star")]
    m_star: usize,
    regime: &'static str,
    degenerate: bool,
}

impl From<DegreeChoice> for AutoDegree {
    fn from(c: DegreeChoice) -> Self {
        Self { m_star: c.m_star, regime: regime_name(c.regime), degenerate: c.degenerate }
    }
}

#[derive(Serialize)]
struct FitOutput {
    schema: u32,
    basis: &'static str,
    #[serde(rename = "M")]
    m: usize,
    #[serde(rename = "N")]
    n: usize,
    gram: &'static str,
    coeffs: Vec<Num>,
    gram_cond_estimate: Option<Num>,
    residual: Num,
    warnings: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    auto: Option<AutoDegree>,
}

pub fn fit(args: &FitArgs) -> Result<(), CliError> {
    let samples = read_samples(&args.input)?;
    let n = samples.n();
    let (m, auto) = if args.auto {
        let choice = optimal_degree(&problem(&args.problem, &samples)?);
        (choice.m_star, Some(AutoDegree::from(choice)))
    } else {
        (args.m.expect("clap requires --M without --auto"), None)
    };
    if m > n {
        return Err(CliError::Usage(format!("M exceeds N: M = {m}, N = {n}")));
    }
    let opts = FitOptions::default()
        .basis(basis(args.basis))
        .gram(gram(args.gram))
        .estimate_condition(m <= COND_LIMIT);
    let r = fit_samples(&samples, m, opts)?;
    let out = FitOutput {
        schema: SCHEMA,
        basis: basis_name(r.series.basis()),
        m,
        n,
        gram: match r.method {
            GramMethod::Naive => "naive",
            GramMethod::Fast => "fast",
        },
        coeffs: nums(r.series.coeffs()),
        gram_cond_estimate: r.gram_cond_estimate.map(Num),
        residual: Num(least_squares_residual(&samples, &r.series)),
        warnings: r.warnings.iter().map(|w| w.to_string()).collect(),
        auto,
    };
    for w in &out.warnings {
        eprintln!("warning: {w}");
    }
    write_json(args.output.as_deref(), &out)
}

#[derive(Serialize)]
struct PointOutput {
    x: Num,
    value: Num,
    r: Num,
    alpha: Num,
    bound_explicit: Num,
    bound_factor: Num,
    regime: &'static str,
    #[serde(rename = "M_star")]
    m_star: usize,
}

#[derive(Serialize)]
struct ExtrapolateOutput {
    schema: u32,
    #[serde(rename = "N")]
    n: usize,
    rho: Num,
    eps: Num,
    #[serde(rename = "Q")]
    q: Num,
    #[serde(rename = "M_star")]
    m_star: usize,
    regime: &'static str,
    degenerate: bool,
    bound: &'static str,
    sigma_min: Num,
    coeffs: Vec<Num>,
    records: Vec<PointOutput>,
    warnings: Vec<String>,
}

pub fn extrapolate(args: &ExtrapolateArgs) -> Result<(), CliError> {
    let samples = read_samples(&args.input)?;
    let p = problem(&args.problem, &samples)?;
    let upper = interval_edge(p.rho);
    if let Some(&x) = args.at.iter().find(|&&x| !(x >= 1.0 && x < upper)) {
        return Err(CliError::Usage(format!("x = {x} lies outside the extrapolation interval [1, {upper})")));
    }
    let opts = ExtrapolationOptions {
        fit: FitOptions::default().basis(basis(args.basis)).gram(gram(args.gram)),
        bound: match args.bound {
            BoundArg::Measured => BoundKind::Measured,
            BoundArg::Theorem => BoundKind::TheoremConstant,
        },
    };
    let rep = extrapolate_with(&samples, &p, &args.at, &opts)?;
    if rep.degenerate {
        eprintln!("warning: eps > Q; only the constant term is fitted");
    }
    let regime = regime_name(rep.regime);
    let out = ExtrapolateOutput {
        schema: SCHEMA,
        n: p.n,
        rho: Num(p.rho),
        eps: Num(p.eps),
        q: Num(p.q),
        m_star: rep.m_star,
        regime,
        degenerate: rep.degenerate,
        bound: match rep.bound_kind {
            BoundKind::Measured => "measured",
            BoundKind::TheoremConstant => "theorem",
        },
        sigma_min: Num(rep.sigma_min),
        coeffs: nums(&rep.coeffs),
        records: rep
            .points
            .iter()
            .map(|pt| PointOutput {
                x: Num(pt.x),
                value: Num(pt.value),
                r: Num(pt.r),
                alpha: Num(pt.alpha),
                bound_explicit: Num(pt.bound_explicit),
                bound_factor: Num(pt.bound_asymptotic_factor),
                regime,
                m_star: rep.m_star,
            })
            .collect(),
        warnings: rep.warnings.iter().map(|w| w.to_string()).collect(),
    };
    write_json(args.output.as_deref(), &out)
}

#[derive(Serialize)]
struct CheckOutput {
    name: String,
    params: std::collections::BTreeMap<String, Num>,
    lhs: Num,
    relation: &'static str,
    rhs: Num,
    passed: bool,
    slack: Num,
    #[serde(skip_serializing_if = "Option::is_none")]
    note: Option<String>,
}

#[derive(Serialize)]
struct VerifyOutput {
    schema: u32,
    suite: String,
    passed: bool,
    results: Vec<CheckOutput>,
}

fn suite_params(m: Option<usize>, n: Option<usize>) -> SuiteParams {
    match (m, n) {
        (Some(m), Some(n)) => SuiteParams::single(m, n),
        (None, Some(n)) => SuiteParams {
            pairs: vec![((0.5 * (n as f64).sqrt()).floor() as usize, n)],
            s_degrees: Vec::new(),
            sandwich_ns: vec![n],
        },
        (Some(m), None) => SuiteParams { pairs: vec![(m, 4 * m * m)], s_degrees: vec![m], sandwich_ns: Vec::new() },
        (None, None) => SuiteParams::default(),
    }
}

pub fn verify(args: &VerifyArgs) -> Result<(), CliError> {
    let suite: Suite = args.suite.parse().map_err(|e: stable_extrap::Error| CliError::Usage(e.to_string()))?;
    let results = run_suite(suite, &suite_params(args.m, args.n), Execution::default())?;
    let failed = results.iter().filter(|r| !r.passed).count();
    for r in &results {
        eprintln!("{r}");
    }
    let out = VerifyOutput {
        schema: SCHEMA,
        suite: args.suite.clone(),
        passed: failed == 0,
        results: results
            .into_iter()
            .map(|r| CheckOutput {
                name: r.name,
                params: r.params.into_iter().map(|(k, v)| (k, Num(v))).collect(),
                lhs: Num(r.lhs),
                relation: match r.relation {
                    Relation::Le => "<=",
                    Relation::Ge => ">=",
                },
                rhs: Num(r.rhs),
                passed: r.passed,
                slack: Num(r.slack),
                note: r.note,
            })
            .collect(),
    };
    write_json(args.output.as_deref(), &out)?;
    if failed > 0 {
        return Err(CliError::ChecksFailed(failed));
    }
    Ok(())
}

pub fn figure(args: &FigureArgs) -> Result<(), CliError> {
    if args.figure == 4 && args.seed.is_none() {
        return Err(CliError::Usage("figure 4 draws Gaussian noise and requires --seed".into()));
    }
    fs::create_dir_all(&args.output).map_err(|e| CliError::Io(format!("{}: {e}", args.output.display())))?;
    let dir = args.output.as_path();
    let exec = Execution::default();
    let written = match args.figure {
        1 => {
            let rho = args.rho.unwrap_or(1.0 + std::f64::consts::SQRT_2);
            let t = run_alpha_profile(rho, args.eps.unwrap_or(2.2e-16), args.q.unwrap_or(1.0), 201)?;
            let alpha = t.select("alpha", &["x", "alpha"]).expect("columns exist");
            let factor = t.select("factor", &["x", "factor", "capped"]).expect("columns exist");
            vec![write_table(dir, "fig1_alpha.csv", &alpha)?, write_table(dir, "fig1_factor.csv", &factor)?]
        }
        2 => {
            let ns: Vec<usize> = (16..=2048).step_by(16).collect();
            vec![write_table(dir, "fig2_singular_bounds.csv", &run_singular_bounds_sweep(&ns)?)?]
        }
        3 => {
            let m_max = args.m.unwrap_or(40);
            let f = run_extrapolation_decay(TestFunction::InvSquare, &[1.0, 1.1, 1.2, 1.3, 1.4, 1.5], m_max, exec)?;
            let g = run_extrapolation_decay(TestFunction::InvTwoSquare, &[1.0, 1.1, 1.2, 1.3], m_max, exec)?;
            vec![write_table(dir, "fig3_inv_square.csv", &f)?, write_table(dir, "fig3_inv_two_square.csv", &g)?]
        }
        4 => {
            let n = args.n.unwrap_or(40_000);
            let coeffs = run_noise_coefficients(
                args.m.unwrap_or(100),
                &[n, 100 * n],
                args.s.unwrap_or(1e-3),
                TestFunction::Runge,
                args.seed.expect("checked above"),
                exec,
            )?;
            vec![
                write_table(dir, "fig4_coefficients.csv", &coeffs)?,
                write_table(dir, "fig4_plateau.csv", &plateau_table(&coeffs))?,
            ]
        }
        5 => {
            let ns = [10_000usize, 31_623, 100_000, 316_228, 1_000_000];
            vec![write_table(dir, "fig5_gram_timing.csv", &run_gram_timing(args.m.unwrap_or(50), &ns, 3)?)?]
        }
        other => return Err(CliError::Usage(format!("unknown figure {other}"))),
    };
    for p in written {
        println!("{}", p.display());
    }
    Ok(())
}
