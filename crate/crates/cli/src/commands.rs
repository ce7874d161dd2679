use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use cancelput_core::mc::simulate_paths;
use cancelput_core::{estimate_value, Pricer, ScaleBranch};
use serde_json::{json, Value};

use crate::args::{McArgs, ModelArgs, Suite};
use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::output::{cell, num, params_echo};
use crate::validate::{self, Status};

/// What a successful command hands back to `main`.
pub struct Outcome {
    pub json: Value,
    pub exit_code: i32,
}

impl Outcome {
    fn ok(json: Value) -> Self {
        Outcome { json, exit_code: 0 }
    }
}

fn pricer(cfg: &RunConfig, need_spot: bool) -> CliResult<Pricer> {
    let model = cfg.model()?;
    let fallback = if need_spot { None } else { cfg.barrier };
    let contract = cfg.contract(fallback)?;
    Ok(Pricer::new(model, contract)?)
}

pub fn price(args: &ModelArgs) -> CliResult<Outcome> {
    let cfg = RunConfig::resolve(args, None)?;
    let p = pricer(&cfg, true)?;
    let rep = p.report()?;
    Ok(Outcome::ok(json!({
        "a_star": num(rep.a_star),
        "value": num(rep.value),
        "creeping_factor": num(rep.creeping_factor),
        "undershoot_factor": num(rep.undershoot_factor),
        "region": rep.region.as_str(),
        "params_echo": params_echo(&p.model, &p.contract, cfg.spot),
    })))
}

pub fn threshold(args: &ModelArgs) -> CliResult<Outcome> {
    let cfg = RunConfig::resolve(args, None)?;
    let p = pricer(&cfg, false)?;
    let b = &p.basis;
    let sc = b.side_conditions(&p.model);
    Ok(Outcome::ok(json!({
        "a_star": num(p.a_star),
        "payoff_at_a_star": num(p.payoff(p.a_star)),
        "branch": match b.branch {
            ScaleBranch::ThreeRoot => "three_root",
            ScaleBranch::TwoRoot => "two_root",
        },
        "eta": b.eta.iter().map(|&x| num(x)).collect::<Vec<_>>(),
        "c": b.c.iter().map(|&x| num(x)).collect::<Vec<_>>(),
        "side_conditions": {
            "c2": num(sc.c2),
            "c3": num(sc.c3),
            "weighted_sum": num(sc.weighted_sum),
            "hold": sc.hold(b.branch),
        },
        "params_echo": params_echo(&p.model, &p.contract, cfg.spot),
    })))
}

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::Io(format!("cannot create {}: {e}", path.display())))
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |e| CliError::Io(format!("cannot write {}: {e}", path.display()))
}

pub fn curve(
    args: &ModelArgs,
    smin: f64,
    smax: f64,
    points: usize,
    out: &Path,
) -> CliResult<Outcome> {
    if !(smin.is_finite() && smax.is_finite() && smin > 0.0 && smin < smax) {
        return Err(CliError::input(format!(
            "need 0 < smin < smax, got smin={smin} smax={smax}"
        )));
    }
    if points < 2 {
        return Err(CliError::input(format!(
            "points must be >= 2, got {points}"
        )));
    }
    let cfg = RunConfig::resolve(args, None)?;
    let p = pricer(&cfg, false)?;

    let mut rows = Vec::with_capacity(points);
    for i in 0..points {
        let s = if i + 1 == points {
            smax
        } else {
            smin + (smax - smin) * i as f64 / (points - 1) as f64
        };
        rows.push((s, p.payoff(s), p.report_at(s)?.value));
    }

    let mut w = create(out)?;
    let err = io_err(out);
    writeln!(w, "s,payoff,value").map_err(&err)?;
    for (s, g, v) in &rows {
        writeln!(w, "{},{},{}", cell(*s), cell(*g), cell(*v)).map_err(&err)?;
    }
    w.flush().map_err(&err)?;

    Ok(Outcome::ok(json!({
        "out": out.display().to_string(),
        "points": points,
        "smin": num(smin),
        "smax": num(smax),
        "a_star": num(p.a_star),
        "params_echo": params_echo(&p.model, &p.contract, cfg.spot),
    })))
}

pub fn validate(args: &ModelArgs, mc: &McArgs, suite: Suite) -> CliResult<Outcome> {
    let cfg = RunConfig::resolve(args, Some(mc))?;
    let p = pricer(&cfg, true)?;
    let mc_cfg = if suite == Suite::Analytic {
        None
    } else {
        let mc_cfg = cfg.mc()?;
        mc_cfg.validate(&p.model)?;
        Some(mc_cfg)
    };

    let mut checks = Vec::new();
    if suite != Suite::Mc {
        checks.extend(validate::analytic_suite(&p)?);
    }
    if let Some(mc_cfg) = &mc_cfg {
        checks.extend(validate::mc_suite(&p, mc_cfg)?);
    }
    eprint!("{}", validate::table(&checks));

    let count = |s: Status| checks.iter().filter(|c| c.status == s).count();
    let failed = count(Status::Fail);
    Ok(Outcome {
        json: json!({
            "suite": suite.as_str(),
            "passed": failed == 0,
            "counts": {
                "pass": count(Status::Pass),
                "fail": failed,
                "skip": count(Status::Skip),
            },
            "checks": checks.iter().map(|c| c.to_json()).collect::<Vec<_>>(),
            "seed": mc_cfg.map(|c| c.seed),
            "params_echo": params_echo(&p.model, &p.contract, cfg.spot),
        }),
        exit_code: if failed == 0 { 0 } else { 1 },
    })
}

pub fn simulate(
    args: &ModelArgs,
    mc: &McArgs,
    threshold: Option<f64>,
    trace: Option<&Path>,
) -> CliResult<Outcome> {
    let cfg = RunConfig::resolve(args, Some(mc))?;
    let p = pricer(&cfg, true)?;
    let mc_cfg = cfg.mc()?;
    let a = threshold.unwrap_or(p.a_star);
    let est = estimate_value(&p.model, &p.contract, a, &mc_cfg)?;
    let closed = p.value_with_threshold(p.contract.spot(), a)?;

    if let Some(path) = trace {
        let records = simulate_paths(&p.model, &p.contract, a, &mc_cfg);
        let mut w = create(path)?;
        let err = io_err(path);
        writeln!(w, "path_index,tau,s_tau,crossing_type").map_err(&err)?;
        for rec in &records {
            match rec.passage {
                Some(ps) => writeln!(
                    w,
                    "{},{},{},{}",
                    rec.path_index,
                    cell(ps.tau),
                    cell(ps.s_tau),
                    ps.crossing.as_str()
                ),
                None => writeln!(w, "{},,,none", rec.path_index),
            }
            .map_err(&err)?;
        }
        w.flush().map_err(&err)?;
    }

    Ok(Outcome::ok(json!({
        "mode": mc_cfg.mode.as_str(),
        "threshold": num(a),
        "mean": num(est.mean),
        "stderr": num(est.stderr),
        "n_paths": est.n_paths,
        "truncation_bound": num(est.truncation_bound),
        "discretization_note": est.discretization_note,
        "closed_form": num(closed),
        "seed": mc_cfg.seed,
        "trace": trace.map(|t| t.display().to_string()),
        "params_echo": params_echo(&p.model, &p.contract, cfg.spot),
    })))
}
