use std::io::Write;

use chanres::channel::mutual_information;
use chanres::exponents::{
    capacity, secrecy_capacity_lb, BoundFamily, ExponentEvaluator, ExponentReport, InputLaw,
};
use chanres::identification::{
    assemble_id_code, build_set_family, eval_id_code, id_bounds, select_codewords, AdParams,
    IdCode, IdParams, Selection,
};
use chanres::resolvability::{expectation_bounds, mc_expectation, sample_qualities};
use chanres::wiretap::{construct_observed, wiretap_bounds, WiretapModel, WiretapParams};
use chanres::{Channel, Distribution, EnumerationBudget, Error, Memoryless};
use serde::Serialize;
use serde_json::json;

use crate::args::{
    read_json, required, threshold, BoundsArgs, CapacityArgs, Decoder, ExponentsArgs, Format,
    IdBuildArgs, IdEvalArgs, InputSpec, ResolvabilityArgs, WiretapArgs, WiretapBoundsArgs,
};
use crate::error::{CliError, Result};

/// Line-oriented output sink.
pub struct Emitter {
    out: Box<dyn Write>,
}

impl Emitter {
    pub fn new(out: Box<dyn Write>) -> Self {
        Self { out }
    }

    pub fn json<T: Serialize>(&mut self, value: &T) -> Result<()> {
        let line = serde_json::to_string(value).expect("records serialize");
        writeln!(self.out, "{line}")?;
        Ok(())
    }

    pub fn raw(&mut self, line: &str) -> Result<()> {
        writeln!(self.out, "{line}")?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        self.out.flush()?;
        Ok(())
    }
}

fn input_of(spec: &Option<InputSpec>) -> InputSpec {
    spec.clone().unwrap_or(InputSpec::Uniform)
}

fn model(
    channel: Channel,
    input: &Option<InputSpec>,
    block_length: Option<usize>,
    budget: &EnumerationBudget,
) -> Result<Memoryless> {
    let p = input_of(input).fixed(channel.input_size())?;
    Ok(Memoryless::new(
        channel,
        p,
        block_length.unwrap_or(1),
        budget,
    )?)
}

fn seed_or_random(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(rand::random)
}

pub fn bounds(args: &BoundsArgs, budget: &EnumerationBudget, out: &mut Emitter) -> Result<()> {
    let channel = required(&args.channel, "channel")?.load("channel")?;
    let model = model(channel, &args.input, args.block_length, budget)?;
    let size = required(&args.codewords, "codewords")?;
    let c = threshold(args.threshold, args.log_threshold, "threshold")?;
    let bounds = expectation_bounds(&model, size, c, budget)?;
    out.json(&json!({
        "command": "bounds",
        "block_length": model.block_length(),
        "codewords": size,
        "threshold": c,
        "bounds": bounds,
    }))
}

/// One CSV row: an exponent bound plus, for fixed-law families with positive dispersion, its
/// second-order approximation.
#[derive(Serialize)]
struct SweepRow {
    #[serde(flatten)]
    report: ExponentReport,
    delta: Option<f64>,
    dispersion: Option<f64>,
    taylor_nats: Option<f64>,
}

fn taylor_for(family: BoundFamily, rate: f64, info: f64, dispersion: f64) -> Option<f64> {
    if !(dispersion > 0.0) {
        return None;
    }
    let d = (rate - info).max(0.0);
    match family {
        BoundFamily::VdPsi | BoundFamily::KlPhi => Some(d * d / (4.0 * dispersion)),
        BoundFamily::VdPhiHalf => Some(d * d / (8.0 * dispersion)),
        _ => None,
    }
}

fn csv_number(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.11e}")).unwrap_or_default()
}

pub fn exponents(args: &ExponentsArgs, out: &mut Emitter) -> Result<()> {
    let channel = required(&args.channel, "channel")?.load("channel")?;
    let start = required(&args.rate_start, "rate_start")?;
    let end = args.rate_end.unwrap_or(start);
    let steps = args.steps.unwrap_or(1);
    if steps == 0 || !(end >= start) {
        return Err(CliError::Input(
            "need steps >= 1 and rate_end >= rate_start".into(),
        ));
    }
    let rates: Vec<f64> = (0..steps)
        .map(|i| {
            if steps == 1 {
                start
            } else {
                start + (end - start) * i as f64 / (steps - 1) as f64
            }
        })
        .collect();
    let fixed = input_of(&args.input).resolve(channel.input_size())?;
    let mut evaluators = Vec::new();
    let mut moments = None;
    if let Some(p) = &fixed {
        let info = mutual_information(p, &channel)?;
        let dispersion = chanres::channel::dispersion(p, &channel)?;
        moments = Some((info, dispersion));
        evaluators.push(ExponentEvaluator::new(
            &channel,
            InputLaw::Fixed(p.clone()),
        )?);
    }
    evaluators.push(ExponentEvaluator::new(&channel, InputLaw::Worst)?);

    let format = args.format.unwrap_or_default();
    if format == Format::Csv {
        out.raw("R,family,bound_nats,optimizer,saturated,delta,dispersion,taylor_nats")?;
    }
    for &rate in &rates {
        for evaluator in &evaluators {
            for report in evaluator.reports(rate)? {
                let (delta, dispersion, taylor) = match moments {
                    Some((info, j)) if BoundFamily::FIXED.contains(&report.family) => (
                        Some(rate - info),
                        Some(j),
                        taylor_for(report.family, rate, info, j),
                    ),
                    _ => (None, None, None),
                };
                match format {
                    Format::Csv => out.raw(&format!(
                        "{:.11e},{},{:.11e},{:.11e},{},{},{},{}",
                        rate,
                        report.family,
                        report.bound_value,
                        report.optimizer,
                        report.saturated,
                        csv_number(delta),
                        csv_number(dispersion),
                        csv_number(taylor),
                    ))?,
                    Format::Json => out.json(&SweepRow {
                        report,
                        delta,
                        dispersion,
                        taylor_nats: taylor,
                    })?,
                }
            }
        }
    }
    Ok(())
}

pub fn simulate_resolvability(
    args: &ResolvabilityArgs,
    budget: &EnumerationBudget,
    out: &mut Emitter,
) -> Result<()> {
    let seed = seed_or_random(args.seed);
    let mut config = args.clone();
    config.seed = Some(seed);
    let channel = required(&args.channel, "channel")?.load("channel")?;
    let model = model(channel, &args.input, args.block_length, budget)?;
    let size = required(&args.codewords, "codewords")?;
    let c = threshold(args.threshold, args.log_threshold, "threshold")?;
    let trials = args.trials.unwrap_or(1000);
    let report = mc_expectation(&model, size, c, trials, seed, budget)?;
    if !args.summary_only {
        for (trial, q) in sample_qualities(&model, size, trials, seed)?
            .iter()
            .enumerate()
        {
            out.json(&json!({"record": "trial", "trial": trial, "eps": q.eps, "div": q.div}))?;
        }
    }
    let kl_bound = report.kl_bound();
    for (metric, estimate, bound) in [
        ("vd", report.vd, report.vd.bound),
        ("kl", report.kl_eta, kl_bound),
    ] {
        out.json(&json!({
            "record": "summary",
            "metric": metric,
            "config": config,
            "mean": estimate.mean,
            "std_error": estimate.std_error,
            "bound": bound,
            "satisfied": estimate.mean <= bound + 3.0 * estimate.std_error,
            "trials": estimate.trials,
            "seed": seed,
        }))?;
    }
    out.json(&json!({
        "record": "bounds",
        "tail": report.tail,
        "vd": report.vd.bound,
        "kl_eta": report.kl_eta.bound,
        "kl_phi": report.kl_phi.bound,
        "kl_phi_t": report.kl_phi_t,
    }))
}

fn wiretap_model(
    bob: &Option<crate::args::Source<Channel>>,
    eve: &Option<crate::args::Source<Channel>>,
    input: &Option<InputSpec>,
    block_length: Option<usize>,
    budget: &EnumerationBudget,
) -> Result<WiretapModel> {
    let bob = required(bob, "bob")?.load("Bob's channel")?;
    let eve = required(eve, "eve")?.load("Eve's channel")?;
    let p: Distribution = input_of(input).fixed(bob.input_size())?;
    let n = block_length.unwrap_or(1);
    Ok(WiretapModel::new(
        Memoryless::new(bob, p.clone(), n, budget)?,
        Memoryless::new(eve, p, n, budget)?,
    )?)
}

#[allow(clippy::too_many_arguments)]
fn wiretap_params(
    messages: Option<usize>,
    per_class: Option<usize>,
    c: Option<f64>,
    log_c: Option<f64>,
    c_prime: Option<f64>,
    log_c_prime: Option<f64>,
) -> Result<WiretapParams> {
    Ok(WiretapParams::new(
        required(&messages, "messages")?,
        per_class.unwrap_or(1),
        threshold(c, log_c, "threshold")?,
        threshold(c_prime, log_c_prime, "threshold_prime")?,
    )?)
}

pub fn simulate_wiretap(
    args: &WiretapArgs,
    budget: &EnumerationBudget,
    out: &mut Emitter,
) -> Result<()> {
    let seed = seed_or_random(args.seed);
    let mut config = args.clone();
    config.seed = Some(seed);
    let model = wiretap_model(&args.bob, &args.eve, &args.input, args.block_length, budget)?;
    let params = wiretap_params(
        args.messages,
        args.per_class,
        args.threshold,
        args.log_threshold,
        args.threshold_prime,
        args.log_threshold_prime,
    )?;
    let decoder = args.decoder.unwrap_or(Decoder::MaximumLikelihood);
    let mut records = Vec::new();
    let built = construct_observed(
        &model,
        &params,
        decoder.into(),
        seed,
        args.max_retries.unwrap_or(100),
        budget,
        |attempt, report, flags| {
            records.push(json!({
                "record": "attempt",
                "attempt": attempt,
                "eps_b": report.eps_b,
                "i_e": report.i_e,
                "d_e": report.d_e,
                "flags": flags,
            }))
        },
    )?;
    for r in &records {
        out.json(r)?;
    }
    out.json(&json!({
        "record": "summary",
        "config": config,
        "seed": seed,
        "attempts": built.attempts,
        "bounds": built.bounds,
        "report": built.report,
        "flags": built.satisfied,
        "satisfied": built.satisfied.all(),
        "code": built.code.classes,
    }))
}

pub fn wiretap_bound_values(
    args: &WiretapBoundsArgs,
    budget: &EnumerationBudget,
    out: &mut Emitter,
) -> Result<()> {
    let model = wiretap_model(&args.bob, &args.eve, &args.input, args.block_length, budget)?;
    let params = wiretap_params(
        args.messages,
        args.per_class,
        args.threshold,
        args.log_threshold,
        args.threshold_prime,
        args.log_threshold_prime,
    )?;
    let bounds = wiretap_bounds(&model, &params, budget)?;
    let p = model.bob.input();
    let rate =
        mutual_information(p, model.bob.channel())? - mutual_information(p, model.eve.channel())?;
    out.json(&json!({
        "command": "wiretap-bounds",
        "block_length": model.bob.block_length(),
        "params": params,
        "bounds": bounds,
        "secrecy_rate": rate,
    }))
}

pub fn capacity_report(args: &CapacityArgs, out: &mut Emitter) -> Result<()> {
    let channel = required(&args.channel, "channel")?.load("channel")?;
    let result = capacity(&channel)?;
    let mut record = json!({"command": "capacity", "capacity": result});
    if let Some(eve) = &args.eve {
        let eve = eve.load("Eve's channel")?;
        let (rate, input) = secrecy_capacity_lb(&channel, &eve)?;
        record["secrecy_lower_bound"] = json!(rate);
        record["secrecy_input"] = json!(input);
    }
    out.json(&record)
}

fn id_params(args: &IdBuildArgs, n: usize, size: usize, c: f64) -> Result<IdParams> {
    let given = [args.alpha, args.alpha_prime, args.beta, args.beta_prime];
    if given.iter().all(Option::is_none) {
        return Ok(IdParams::block_defaults(n, size, c)?);
    }
    Ok(IdParams::new(
        required(&args.alpha, "alpha")?,
        required(&args.alpha_prime, "alpha_prime")?,
        required(&args.beta, "beta")?,
        required(&args.beta_prime, "beta_prime")?,
        size,
        c,
    )?)
}

pub fn idcode_build(
    args: &IdBuildArgs,
    budget: &EnumerationBudget,
    out: &mut Emitter,
) -> Result<()> {
    let seed = seed_or_random(args.seed);
    let mut config = args.clone();
    config.seed = Some(seed);
    let channel = required(&args.channel, "channel")?.load("channel")?;
    let model = model(channel, &args.input, args.block_length, budget)?;
    let size = required(&args.codewords, "codewords")?;
    let c = threshold(args.threshold, args.log_threshold, "threshold")?;
    let params = id_params(args, model.block_length(), size, c)?;
    let ad = AdParams::new(
        size,
        required(&args.tau, "tau")?,
        required(&args.kappa, "kappa")?,
    )?;
    let bounds = id_bounds(&model, &params, budget)?;

    let selection = select_codewords(
        &model,
        &params,
        seed,
        args.max_retries.unwrap_or(100),
        args.allow_infeasible,
        budget,
    );
    let Selection {
        codewords,
        attempts,
        ..
    } = match selection {
        Ok(s) => s,
        Err(Error::RetriesExhausted { attempts, .. }) => {
            return out.json(&json!({
                "record": "summary",
                "config": config,
                "seed": seed,
                "bounds": bounds,
                "selection_attempts": attempts,
                "satisfied": false,
                "reason": "codeword selection exhausted its retries",
            }));
        }
        Err(e) => return Err(e.into()),
    };
    let family_seed = seed.wrapping_add(1);
    let family = build_set_family(
        &ad,
        args.messages,
        family_seed,
        args.family_attempts.unwrap_or(1_000_000),
    )?;
    let code = assemble_id_code(&codewords, &family.family, &model, c)?;
    let errors = eval_id_code(&code, &model)?;
    let lambda_bound = bounds.lambda_bound(ad.kappa);
    let satisfied =
        family.complete && errors.mu <= bounds.mu_bound && errors.lambda <= lambda_bound;
    let mut summary = json!({
        "record": "summary",
        "config": config,
        "seed": seed,
        "selection_attempts": attempts,
        "family_size": family.family.len(),
        "family_target": family.target,
        "family_complete": family.complete,
        "bounds": bounds,
        "mu": errors.mu,
        "lambda": errors.lambda,
        "mu_bound": bounds.mu_bound,
        "lambda_bound": lambda_bound,
        "satisfied": satisfied,
    });
    match &args.code_file {
        Some(path) => {
            let text = serde_json::to_string_pretty(&code).expect("codes serialize");
            std::fs::write(path, text + "\n").map_err(|e| {
                CliError::Input(format!("cannot write code file {}: {e}", path.display()))
            })?;
        }
        None => summary["code"] = json!(code),
    }
    out.json(&summary)
}

pub fn idcode_eval(args: &IdEvalArgs, budget: &EnumerationBudget, out: &mut Emitter) -> Result<()> {
    let code: IdCode = read_json(
        &required(&args.code_file, "code_file")?,
        "identification code",
    )?;
    let channel = required(&args.channel, "channel")?.load("channel")?;
    let model = model(channel, &args.input, args.block_length, budget)?;
    let errors = eval_id_code(&code, &model)?;
    out.json(&json!({
        "command": "idcode eval",
        "messages": code.messages(),
        "mu": errors.mu,
        "lambda": errors.lambda,
    }))
}
