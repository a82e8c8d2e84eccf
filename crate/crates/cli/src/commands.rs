use std::fs;
use std::path::Path;

use lpreduce::empirics::{
    covering_curve, dudley_bound, fit_scaling, geometric_covering_curve, rademacher_sup,
    unit_sphere_sample, Metric, SignLaw,
};
use lpreduce::instance::{matrix_to_rows, InstanceFile, OperatorFile};
use lpreduce::lewis::{blend_density, lewis_density, verify_sup_bounds, LewisOptions};
use lpreduce::sparsify::{measure_distortion, reduce, ReduceOptions, ThetaSchedule};
use lpreduce::summing::{saturation_curve, SummingEstimate, SummingOptions};
use lpreduce::{change_density, hypercube, rng, Error, Subspace};
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::{
    Check, Command, EmbedArgs, HypercubeArgs, Law, LewisArgs, PsummingArgs, SearchArgs,
    ValidateArgs,
};
use crate::output::{write_csv, write_json};

/// A failed run: exit status and the JSON object printed on stderr.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub body: Value,
}

impl Failure {
    pub fn invalid(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            body: json!({"error": "invalid_input", "message": message.into()}),
        }
    }

    pub fn io(path: &Path, err: std::io::Error) -> Self {
        Failure {
            code: 2,
            body: json!({"error": "io", "message": format!("{}: {err}", path.display())}),
        }
    }
}

fn kind(e: &Error) -> &'static str {
    match e {
        Error::DimensionMismatch { .. } => "dimension_mismatch",
        Error::InvalidInput(_) => "invalid_input",
        Error::RankDeficient(_) => "rank_deficient",
        Error::NonConvergence { .. } => "non_convergence",
        Error::RetryExhausted { .. } => "retry_exhausted",
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: if e.is_algorithmic() { 3 } else { 2 },
            body: json!({"error": kind(&e), "message": e.to_string()}),
        }
    }
}

pub type Outcome = std::result::Result<(), Failure>;

pub fn run(command: &Command) -> Outcome {
    match command {
        Command::Lewis(a) => lewis(a),
        Command::Embed(a) => embed(a),
        Command::Psumming(a) => psumming(a),
        Command::Hypercube(a) => hypercube(a),
        Command::Validate(a) => validate(a),
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::io(path, e))
}

fn load_instance(path: &Path, p: Option<f64>) -> Result<(Subspace, f64), Failure> {
    let inst = InstanceFile::parse(&read(path)?)?;
    let p = p
        .or(inst.p)
        .ok_or_else(|| Failure::invalid("no exponent: pass --p or set \"p\" in the input"))?;
    Ok((inst.to_subspace()?, p))
}

/// `command` with the resolved exponent filled in, for provenance.
fn resolved(command: Command, p: f64) -> Command {
    let mut command = command;
    match &mut command {
        Command::Lewis(a) => a.common.p = Some(p),
        Command::Embed(a) => a.common.p = Some(p),
        Command::Psumming(a) => a.common.p = Some(p),
        Command::Hypercube(a) => a.common.p = Some(p),
        Command::Validate(a) => a.common.p = Some(p),
    }
    command
}

fn lewis(a: &LewisArgs) -> Outcome {
    let (sub, p) = load_instance(&a.input, a.common.p)?;
    let opts = LewisOptions {
        tol: a.tol,
        max_iter: a.max_iter,
    };
    let res = lewis_density(&sub, p, &opts)?;
    let alpha = blend_density(&res.beta, sub.space())?;
    let tilde = change_density(&sub, &alpha, p)?;
    let report = verify_sup_bounds(&tilde, p, a.samples, a.common.seed)?;
    let config = resolved(Command::Lewis(a.clone()), p);
    let result = json!({
        "beta": res.beta.values(),
        "alpha": alpha.values(),
        "residual": res.residual,
        "iterations": res.iterations,
        "lewis_basis": matrix_to_rows(&res.lewis_basis),
        "sup_bound": report,
    });
    write_json(a.common.out.as_deref(), &config, &result)
}

fn embed(a: &EmbedArgs) -> Outcome {
    let (sub, p) = load_instance(&a.input, a.common.p)?;
    if !(p > 1.0 && p.is_finite() && p != 2.0) {
        return Err(Failure::invalid(format!(
            "embed needs 1 < p < 2 or 2 < p < inf, got {p}"
        )));
    }
    let schedule = match (a.epsilon, a.sqrt_c, a.theta_max) {
        (_, Some(c), _) => ThetaSchedule::Sqrt { c },
        (_, _, Some(theta)) => ThetaSchedule::Constant { theta },
        (eps, _, _) => ThetaSchedule::Budget {
            epsilon: eps.unwrap_or(0.5),
        },
    };
    let opts = ReduceOptions {
        schedule,
        retry_budget: a.retries,
        probes: a.probes,
        lewis: LewisOptions {
            tol: a.tol,
            ..LewisOptions::default()
        },
    };
    let trace = match reduce(&sub, p, a.target_m, &opts, a.common.seed) {
        Ok(t) => t,
        Err(f) => {
            let mut failure = Failure::from(f.error);
            if let Some(partial) = f.partial {
                failure.body["partial_stages"] = json!(partial.stages);
            }
            return Err(failure);
        }
    };
    let measured = measure_distortion(
        &sub,
        &trace.final_basis,
        p,
        a.samples,
        rng::derive_seed(a.common.seed, u64::MAX),
    )?;
    let config = resolved(Command::Embed(a.clone()), p);
    let result = json!({
        "schedule": schedule,
        "stages": trace.stages,
        "cumulative_distortion": trace.cumulative_distortion,
        "two_sided_bound": trace.two_sided_bound,
        "measured": measured,
        "final_instance": InstanceFile::from_subspace(&trace.final_basis, Some(p)),
    });
    write_json(a.common.out.as_deref(), &config, &result)
}

fn summing_options(s: &SearchArgs) -> SummingOptions {
    SummingOptions {
        restarts: s.restarts,
        steps: s.steps,
        exchange_rounds: s.exchange_rounds,
    }
}

#[derive(Serialize)]
struct CurveRow {
    k: usize,
    value: f64,
    restarts: usize,
    spread: f64,
}

fn curve_rows(curve: &[SummingEstimate]) -> Vec<CurveRow> {
    curve
        .iter()
        .map(|e| CurveRow {
            k: e.k,
            value: e.value,
            restarts: e.restarts_used,
            spread: e.spread,
        })
        .collect()
}

fn require_p(p: Option<f64>) -> Result<f64, Failure> {
    p.ok_or_else(|| Failure::invalid("--p is required"))
}

fn psumming(a: &PsummingArgs) -> Outcome {
    let p = require_p(a.common.p)?;
    let op = OperatorFile::parse(&read(&a.input)?)?.to_operator()?;
    let curve = saturation_curve(
        &op,
        &a.search.ks,
        p,
        &summing_options(&a.search),
        a.common.seed,
    )?;
    write_csv(
        a.common.out.as_deref(),
        &Command::Psumming(a.clone()),
        &[],
        &curve_rows(&curve),
        &[],
    )
}

fn hypercube(a: &HypercubeArgs) -> Outcome {
    let p = require_p(a.common.p)?;
    let ws = hypercube::walsh_space(a.n, a.m)?;
    let op = hypercube::tail_identity_operator(&ws, p)?;
    let curve = saturation_curve(
        &op,
        &a.search.ks,
        p,
        &summing_options(&a.search),
        a.common.seed,
    )?;
    let notes = [format!("dim: {}", ws.dim())];
    write_csv(
        a.common.out.as_deref(),
        &Command::Hypercube(a.clone()),
        &notes,
        &curve_rows(&curve),
        &[],
    )
}

#[derive(Serialize)]
struct MeanRow {
    law: Law,
    trials: usize,
    mean: f64,
    std_error: f64,
}

#[derive(Serialize)]
struct CoverRow {
    t: f64,
    count: f64,
}

fn validate(a: &ValidateArgs) -> Outcome {
    let (sub, p) = load_instance(&a.input, a.common.p)?;
    let config = resolved(Command::Validate(a.clone()), p);
    let seed = a.common.seed;
    let law = match a.law {
        Law::Rademacher => SignLaw::Rademacher,
        Law::Gaussian => SignLaw::Gaussian,
    };
    let max_count = a.max_count.unwrap_or(a.samples / 8);
    match a.check {
        Check::Rademacher => {
            let est = rademacher_sup(&sub, p, a.trials, a.probes, law, seed)?;
            let row = MeanRow {
                law: a.law,
                trials: est.trials,
                mean: est.mean,
                std_error: est.std_error,
            };
            write_csv(a.common.out.as_deref(), &config, &[], &[row], &[])
        }
        Check::Entropy => {
            let pts = unit_sphere_sample(&sub, p, a.samples, seed)?;
            let curve = geometric_covering_curve(&pts, &Metric::Sup, a.ratio, max_count)?;
            let slope = match fit_scaling(&curve) {
                Ok(s) => format!("slope: {s}"),
                Err(e) => format!("slope: none ({e})"),
            };
            write_csv(
                a.common.out.as_deref(),
                &config,
                &[],
                &cover_rows(&curve.radii, &curve.counts),
                &[slope],
            )
        }
        Check::Dudley => {
            let pts = unit_sphere_sample(&sub, p, a.samples, seed)?;
            let metric = Metric::Delta {
                space: sub.space().clone(),
                p,
            };
            // Radii from the sample's own scale down to where the count
            // reaches max_count, then the integral down to radius 0.
            let probe = geometric_covering_curve(&pts, &metric, a.ratio, max_count)?;
            let mut radii = probe.radii.clone();
            radii.push(0.0);
            let curve = covering_curve(&pts, &metric, &radii)?;
            let integral = dudley_bound(&curve);
            let process =
                rademacher_sup(&sub, p, a.trials, a.probes, law, rng::derive_seed(seed, 1))?;
            let trailer = [
                format!("dudley_integral: {integral}"),
                format!("process_mean: {}", process.mean),
                format!("process_std_error: {}", process.std_error),
                format!("fitted_constant: {}", process.mean / integral),
            ];
            write_csv(
                a.common.out.as_deref(),
                &config,
                &[],
                &cover_rows(&curve.radii, &curve.counts),
                &trailer,
            )
        }
    }
}

fn cover_rows(radii: &[f64], counts: &[f64]) -> Vec<CoverRow> {
    radii
        .iter()
        .zip(counts)
        .map(|(&t, &count)| CoverRow { t, count })
        .collect()
}
