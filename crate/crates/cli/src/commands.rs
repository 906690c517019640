use std::path::{Path, PathBuf};

use degentrace::acceptance::{criterion_ids, run_criterion, CriterionReport};
use degentrace::flow::flow_check;
use degentrace::oscint::remainder_check;
use degentrace::spectrum::{spectrum, Window};
use degentrace::trace::{fit_exponent, lambda0_predict, period_protection_bound, run_trace};
use degentrace::Error;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::ScenarioConfig;
use crate::output::{emit, write_atomic, write_json};
use crate::CliError;

/// Output paths given on the command line; they override the config.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub csv: Option<PathBuf>,
    pub json: Option<PathBuf>,
}

impl Overrides {
    fn csv<'a>(&'a self, cfg: &'a ScenarioConfig) -> Option<&'a Path> {
        self.csv.as_deref().or(cfg.output.csv.as_deref())
    }

    fn json<'a>(&'a self, cfg: &'a ScenarioConfig) -> Option<&'a Path> {
        self.json.as_deref().or(cfg.output.json.as_deref())
    }
}

pub fn spectrum_cmd(cfg: &ScenarioConfig, out: &Overrides) -> Result<(), CliError> {
    let model = cfg.model()?;
    let grid = cfg.h_grid(&model)?;
    let window = Window::around(model.ec(), cfg.eps)?;
    let basis = cfg.basis();
    let results = grid.par_iter().map(|&h| spectrum(&model, h, window, basis)).collect::<Result<Vec<_>, Error>>()?;
    let mut csv = String::from("h,eigenvalue,multiplicity,basis_N,converged\n");
    for r in &results {
        for (l, m) in r.eigenvalues.iter().zip(&r.multiplicities) {
            csv.push_str(&format!("{:e},{:e},{m},{},{}\n", r.h, l, r.basis_n, r.converged));
        }
    }
    emit(out.csv(cfg), &csv)?;
    let unconverged: Vec<f64> = results.iter().filter(|r| !r.converged).map(|r| r.h).collect();
    if !unconverged.is_empty() {
        return Err(Error::Convergence(format!("spectrum not converged at h = {unconverged:?}")).into());
    }
    Ok(())
}

pub fn gamma_cmd(cfg: &ScenarioConfig, out: &Overrides) -> Result<(), CliError> {
    let model = cfg.model()?;
    let f = cfg.test_function()?;
    let grid = cfg.h_grid(&model)?;
    let run = run_trace(&model, &f, cfg.eps, &grid, cfg.basis(), cfg.tolerances.quad)?;
    let csv_path = out.csv(cfg);
    emit(csv_path, &run.to_csv())?;
    for r in run.rows.iter().filter(|r| r.error.is_some()) {
        eprintln!("h = {:e} excluded: {}", r.h, r.error.as_deref().unwrap_or_default());
    }
    let summary = run.summary();
    match out.json(cfg) {
        Some(p) => write_json(p, &summary)?,
        None => eprintln!("{}", serde_json::to_string(&summary).map_err(|e| CliError::Internal(e.to_string()))?),
    }
    if let (Some(script), Some(csv)) = (cfg.output.gnuplot.as_deref(), csv_path) {
        write_atomic(script, &gnuplot_script(script, csv))?;
    }
    match run.fit_error {
        Some(e) => Err(Error::Convergence(format!("no exponent fit: {e}")).into()),
        None => Ok(()),
    }
}

fn gnuplot_script(script: &Path, csv: &Path) -> String {
    let data = match (script.parent(), csv.parent()) {
        (Some(a), Some(b)) if a == b => csv.file_name().map(PathBuf::from).unwrap_or_else(|| csv.to_path_buf()),
        _ => std::path::absolute(csv).unwrap_or_else(|_| csv.to_path_buf()),
    };
    format!(
        "set datafile separator \",\"\nset key autotitle columnhead\nset logscale xy\nset xlabel \"h\"\n\
         plot '{0}' using 1:2 with points title \"gamma\", '{0}' using 1:3 with lines title \"prediction\"\n",
        data.display()
    )
}

#[derive(Serialize)]
struct PredictReport {
    test_function: String,
    lambda0: f64,
    exponent: f64,
    pairing: f64,
    sphere_integral: f64,
    period_protection_bound: f64,
}

pub fn predict_cmd(cfg: &ScenarioConfig, out: &Overrides) -> Result<(), CliError> {
    let model = cfg.model()?;
    let f = cfg.test_function()?;
    let p = lambda0_predict(&model.symbol()?, &f, cfg.tolerances.quad)?;
    let report = PredictReport {
        test_function: f.label(),
        lambda0: p.lambda0,
        exponent: p.exponent,
        pairing: p.pairing,
        sphere_integral: p.sphere_integral,
        period_protection_bound: period_protection_bound(&model, f.support())?,
    };
    json_out(out.json(cfg), &report)
}

fn json_out(path: Option<&Path>, value: &impl Serialize) -> Result<(), CliError> {
    match path {
        Some(p) => write_json(p, value),
        None => {
            println!("{}", serde_json::to_string_pretty(value).map_err(|e| CliError::Internal(e.to_string()))?);
            Ok(())
        }
    }
}

/// Reads `h` and `gamma` columns from a CSV with a header row; rows with an
/// empty `gamma` are skipped.
pub fn fit_cmd(input: &Path, json: Option<&Path>) -> Result<(), CliError> {
    let mut rdr = csv::Reader::from_path(input).map_err(|e| CliError::Config(format!("{}: {e}", input.display())))?;
    let headers = rdr.headers().map_err(|e| CliError::Config(format!("{}: {e}", input.display())))?.clone();
    let col = |name: &str| {
        headers.iter().position(|h| h == name).ok_or_else(|| CliError::Config(format!("{} has no `{name}` column", input.display())))
    };
    let (ih, ig) = (col("h")?, col("gamma")?);
    let mut pairs = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| CliError::Config(format!("{}: {e}", input.display())))?;
        let (h, g) = (rec.get(ih).unwrap_or(""), rec.get(ig).unwrap_or(""));
        if g.is_empty() {
            continue;
        }
        let parse = |s: &str| {
            s.parse::<f64>().map_err(|e| CliError::Config(format!("{} row {}: `{s}`: {e}", input.display(), line + 2)))
        };
        pairs.push((parse(h)?, parse(g)?));
    }
    let fit = fit_exponent(&pairs)?;
    if !fit.excluded.is_empty() {
        eprintln!("excluded (gamma <= 0): h = {:?}", fit.excluded);
    }
    json_out(json, &fit)
}

pub fn oscint_cmd(cfg: &ScenarioConfig, out: &Overrides) -> Result<(), CliError> {
    let (amp, spec) = cfg.amplitude()?;
    let rep = remainder_check(&amp, &spec.lambdas, spec.n, spec.phase)?;
    let mut csv = String::from("lambda,brute_re,brute_im,expansion_re,expansion_im,abs_err,fitted_order\n");
    for (i, r) in rep.rows.iter().enumerate() {
        // local order from the previous row
        let order = match i {
            0 => String::new(),
            _ => {
                let p = &rep.rows[i - 1];
                format!("{:e}", (r.abs_err / p.abs_err).ln() / (r.lambda / p.lambda).ln())
            }
        };
        csv.push_str(&format!(
            "{:e},{:e},{:e},{:e},{:e},{:e},{order}\n",
            r.lambda, r.brute.re, r.brute.im, r.expansion.re, r.expansion.im, r.abs_err
        ));
    }
    emit(out.csv(cfg), &csv)?;
    json_out(out.json(cfg), &rep)
}

pub fn flow_cmd(cfg: &ScenarioConfig, out: &Overrides) -> Result<(), CliError> {
    let spec = cfg.flow.as_ref().ok_or_else(|| CliError::Config("config has no \"flow\" section".into()))?;
    let mut s = cfg.model()?.symbol()?;
    if let Some(o) = spec.taylor_order {
        s = s.with_taylor_order(o)?;
    }
    let rep = flow_check(&s, spec.m, &spec.t_grid)?;
    json_out(out.json(cfg), &rep)
}

/// Runs the selected criteria and prints one line each; `Ok(false)` if any failed.
pub fn accept_cmd(only: &[usize], json: Option<&Path>) -> Result<bool, CliError> {
    let ids = if only.is_empty() { criterion_ids() } else { only.to_vec() };
    let mut reports: Vec<CriterionReport> = Vec::new();
    for id in ids {
        let r = run_criterion(id).ok_or_else(|| CliError::Config(format!("no acceptance criterion {id}")))?;
        println!("{}", r.line());
        reports.push(r);
    }
    let passed = reports.iter().filter(|r| r.passed).count();
    println!("{passed}/{} criteria passed", reports.len());
    if let Some(p) = json {
        write_json(p, &reports)?;
    }
    Ok(passed == reports.len())
}
