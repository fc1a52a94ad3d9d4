use std::collections::BTreeSet;

use trendcx_core::synth::{generate_walk, signature_analytic, signature_empirical, SignatureCurve};

use super::{slug, Report};
use crate::config::ExperimentConfig;
use crate::csv_io::load_csv;
use crate::error::{Result, RunError};
use crate::output::{num, OutputDir};

const HEADER: [&str; 4] = ["tau", "sigma2_analytic", "sigma2_empirical", "stderr"];

fn rows(analytic: Option<&SignatureCurve>, empirical: &SignatureCurve) -> Vec<Vec<String>> {
    let se = empirical.stderr.as_deref().unwrap_or(&[]);
    (0..empirical.taus.len())
        .map(|i| {
            vec![
                empirical.taus[i].to_string(),
                analytic.map_or(String::new(), |a| num(a.sigma2_of_tau[i])),
                num(empirical.sigma2_of_tau[i]),
                se.get(i).map_or(String::new(), |v| num(*v)),
            ]
        })
        .collect()
}

pub(super) fn run(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<Report> {
    let p = &cfg.signature;
    let mut report = Report::default();
    if let Some(input) = &p.input {
        let panel = load_csv(&input.path, &input.spec)?;
        for a in panel.assets() {
            let emp = signature_empirical(a.series.values(), p.tau_max)?;
            let name = format!("signature_{}.csv", slug(&a.name));
            out.csv(&name, &HEADER, rows(None, &emp))?;
            report.line(format!("{}: sigma2(1) = {:.4}", a.name, emp.sigma2_of_tau[0]));
        }
        return Ok(report);
    }
    if p.kernels.is_empty() {
        return Err(RunError::Validation("signature.kernels: at least one kernel is required".into()));
    }
    let mut seen = BTreeSet::new();
    for k in &p.kernels {
        if !seen.insert(slug(&k.name)) {
            return Err(RunError::Validation(format!("signature.kernels: duplicate name `{}`", k.name)));
        }
    }
    for k in &p.kernels {
        let analytic = signature_analytic(&k.kernel, p.tau_max)?;
        let walk = generate_walk(&k.kernel, p.length, cfg.seed)?;
        let emp = signature_empirical(walk.values(), p.tau_max)?;
        out.csv(&format!("signature_{}.csv", slug(&k.name)), &HEADER, rows(Some(&analytic), &emp))?;
        let last = p.tau_max - 1;
        report.line(format!(
            "{}: sigma2({}) analytic {:.4}, empirical {:.4}",
            k.name, p.tau_max, analytic.sigma2_of_tau[last], emp.sigma2_of_tau[last]
        ));
    }
    Ok(report)
}
