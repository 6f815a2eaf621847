use rayon::prelude::*;
use serde_json::{json, Value};

use renorm_core::acceptance::{self, Golden, SuiteConfig, CRITERIA};
use renorm_core::characteristic::{polar_flow, polar_n, polar_renormalized, Polar};
use renorm_core::diagrams::{
    h1_moment, series_coefficients, verify_renorm_identity, wick_moments, LoopValue, SeriesKind,
    IDENTITY_MAX_N,
};
use renorm_core::partition::{z_flow, z_n, z_n_bound, z_regularized, z_renormalized};
use renorm_core::regulator::{kappa, r_of_lambda};
use renorm_core::{DeformedSpectrum, Error, Spectrum};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::table::{Cell, Table};

/// One emitted artifact.
#[derive(Debug, Clone, PartialEq)]
pub enum Output {
    Table(Table),
    /// Free-form JSON, always written as `.json`.
    Json {
        name: String,
        value: Value,
    },
    /// Plain text, written as `.txt`.
    Text {
        name: String,
        text: String,
    },
}

impl Output {
    pub fn name(&self) -> &str {
        match self {
            Output::Table(t) => &t.name,
            Output::Json { name, .. } | Output::Text { name, .. } => name,
        }
    }
}

fn kappa_for(cfg: &RunConfig) -> Result<f64, CliError> {
    Ok(kappa(&cfg.spectrum, &cfg.regulator, cfg.kappa_tol)?)
}

fn polar_cells(p: Polar) -> Vec<Cell> {
    let v = p.value();
    vec![v.re.into(), v.im.into(), p.modulus.into(), (0.5 * p.phase).into()]
}

fn collect<T: Send>(
    jobs: Vec<Box<dyn Fn() -> Result<T, CliError> + Send + Sync + '_>>,
) -> Result<Vec<T>, CliError> {
    jobs.par_iter().map(|job| job()).collect()
}

pub fn spectrum(cfg: &RunConfig) -> Result<Vec<Output>, CliError> {
    let spec = &cfg.spectrum;
    let mut t = Table::new("spectrum", &["quantity", "value"]);
    t.push(vec!["spectrum".into(), Cell::text(spec.to_json())]);
    t.push(vec!["mu".into(), spec.mu().into()]);
    for k in 1..=4 {
        t.push(vec![Cell::text(format!("B{k}")), Cell::yes_no(spec.in_class(k))]);
    }
    for k in 1..=4 {
        let value = match spec.b_sum(k, cfg.tol) {
            Ok(v) => v.into(),
            Err(Error::DivergentSum { .. }) => "inf".into(),
            Err(e) => return Err(e.into()),
        };
        t.push(vec![Cell::text(format!("b{k}")), value]);
    }
    let reg_json = serde_json::to_string(&cfg.regulator).expect("regulator serializes");
    t.push(vec!["regulator".into(), Cell::text(reg_json)]);
    let lambda = cfg.cutoff_grid.max;
    t.push(vec!["Lambda".into(), lambda.into()]);
    let r = match r_of_lambda(spec, &cfg.regulator, lambda) {
        Ok(r) => r.into(),
        Err(e @ Error::UnsupportedRegulatorTail { .. }) => Cell::text(format!("unsupported: {e}")),
        Err(e) => return Err(e.into()),
    };
    t.push(vec!["r_of_Lambda".into(), r]);
    let k = match kappa(spec, &cfg.regulator, cfg.kappa_tol) {
        Ok(k) => k.into(),
        Err(e @ (Error::UnsupportedRegulatorTail { .. } | Error::NotInClass { .. })) => {
            Cell::text(format!("unavailable: {e}"))
        }
        Err(e) => return Err(e.into()),
    };
    t.push(vec!["kappa".into(), k]);
    Ok(vec![Output::Table(t)])
}

pub fn phi(cfg: &RunConfig) -> Result<Vec<Output>, CliError> {
    let spec = &cfg.spectrum;
    let s_values = cfg.s_grid.values();
    let theta = cfg.theta;
    let tol = cfg.tol;
    let kappa = kappa_for(cfg)?;
    let deformed = cfg
        .cutoff_grid
        .values()
        .into_iter()
        .map(|l| DeformedSpectrum::new(spec.clone(), cfg.regulator, l))
        .collect::<Result<Vec<_>, _>>()?;

    type Job<'a> = Box<dyn Fn() -> Result<Vec<Cell>, CliError> + Send + Sync + 'a>;
    let mut jobs: Vec<Job> = Vec::new();
    for n in cfg.n_grid.integer_values() {
        for &s in &s_values {
            jobs.push(Box::new(move || {
                let mut row = vec!["raw".into(), Cell::from(n), Cell::empty(), Cell::empty(), s.into()];
                row.extend(polar_cells(polar_n(spec, s, n)));
                Ok(row)
            }));
        }
    }
    for d in &deformed {
        for &s in &s_values {
            jobs.push(Box::new(move || {
                let mut row = vec!["flow".into(), Cell::empty(), d.lambda.into(), theta.into(), s.into()];
                row.extend(polar_cells(polar_flow(d, s, theta, tol)?));
                Ok(row)
            }));
        }
    }
    for &s in &s_values {
        jobs.push(Box::new(move || {
            let mut row = vec!["renormalized".into(), Cell::empty(), Cell::empty(), theta.into(), s.into()];
            row.extend(polar_cells(polar_renormalized(spec, kappa, s, theta, tol)?));
            Ok(row)
        }));
    }
    let mut t = Table::new("phi", &["series", "n", "Lambda", "theta", "s", "re", "im", "modulus", "phase"]);
    for row in collect(jobs)? {
        t.push(row);
    }
    Ok(vec![Output::Table(t)])
}

fn z_flow_table(cfg: &RunConfig, kappa: f64) -> Result<Table, CliError> {
    let q = &cfg.quadrature;
    let limit = z_renormalized(&cfg.spectrum, kappa, cfg.lambda, cfg.theta, q)?;
    let rows = cfg
        .cutoff_grid
        .values()
        .into_par_iter()
        .map(|l| -> Result<Vec<Cell>, CliError> {
            let d = DeformedSpectrum::new(cfg.spectrum.clone(), cfg.regulator, l)?;
            let z = z_flow(&d, cfg.lambda, cfg.theta, q)?;
            let bare = z_regularized(&d, cfg.lambda, q)?;
            Ok(vec![
                l.into(),
                cfg.lambda.into(),
                cfg.theta.into(),
                z.into(),
                bare.into(),
                (z - limit).abs().into(),
            ])
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut t =
        Table::new("z_flow", &["Lambda", "lambda", "theta", "z_flow", "z_regularized", "distance_to_limit"]);
    for r in rows {
        t.push(r);
    }
    Ok(t)
}

pub fn z(cfg: &RunConfig) -> Result<Vec<Output>, CliError> {
    let spec = &cfg.spectrum;
    let q = &cfg.quadrature;
    let lambda = cfg.lambda;
    let kappa = kappa_for(cfg)?;

    let decay_rows = cfg
        .n_grid
        .integer_values()
        .into_par_iter()
        .map(|n| -> Result<Vec<Cell>, CliError> {
            let z = z_n(spec, lambda, n, q)?;
            let (bound, within) = match z_n_bound(spec, lambda, n) {
                Ok(b) => (Cell::Float(b), Cell::yes_no(z.abs() <= b)),
                Err(Error::NotInClass { .. }) => (Cell::text("n/a"), Cell::text("n/a")),
                Err(e) => return Err(e.into()),
            };
            Ok(vec![n.into(), lambda.into(), z.into(), bound, within])
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut decay = Table::new("z_decay", &["n", "lambda", "z_n", "bound", "within_bound"]);
    for r in decay_rows {
        decay.push(r);
    }

    let profile_rows = cfg
        .theta_grid
        .values()
        .into_par_iter()
        .map(|theta| -> Result<Vec<Cell>, CliError> {
            Ok(vec![theta.into(), lambda.into(), z_renormalized(spec, kappa, lambda, theta, q)?.into()])
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut profile = Table::new("z_profile", &["theta", "lambda", "z_renormalized"]);
    for r in profile_rows {
        profile.push(r);
    }

    Ok(vec![Output::Table(decay), Output::Table(z_flow_table(cfg, kappa)?), Output::Table(profile)])
}

pub fn flow(cfg: &RunConfig) -> Result<Vec<Output>, CliError> {
    let spec = &cfg.spectrum;
    let kappa = kappa_for(cfg)?;
    let theta = cfg.theta;
    let tol = cfg.tol;
    let limits = cfg
        .flow_s
        .iter()
        .map(|&s| Ok(polar_renormalized(spec, kappa, s, theta, tol)?.value()))
        .collect::<Result<Vec<_>, CliError>>()?;
    let mut jobs = Vec::new();
    for l in cfg.cutoff_grid.values() {
        for (i, &s) in cfg.flow_s.iter().enumerate() {
            jobs.push((l, i, s));
        }
    }
    let rows = jobs
        .into_par_iter()
        .map(|(l, i, s)| -> Result<Vec<Cell>, CliError> {
            let d = DeformedSpectrum::new(spec.clone(), cfg.regulator, l)?;
            let v = polar_flow(&d, s, theta, tol)?.value();
            Ok(vec![
                l.into(),
                s.into(),
                theta.into(),
                v.re.into(),
                v.im.into(),
                (v - limits[i]).norm().into(),
            ])
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut t = Table::new("phi_flow", &["Lambda", "s", "theta", "re", "im", "distance_to_limit"]);
    for r in rows {
        t.push(r);
    }
    Ok(vec![Output::Table(t), Output::Table(z_flow_table(cfg, kappa)?)])
}

/// Loop values `b_1 … b_count`; divergent sums become [`LoopValue::Infinite`].
fn loop_values(spec: &Spectrum, count: u32, tol: f64) -> Result<Vec<LoopValue>, CliError> {
    (1..=count)
        .map(|m| match spec.b_sum(m, tol) {
            Ok(v) => Ok(LoopValue::Finite(v)),
            Err(Error::DivergentSum { .. }) => Ok(LoopValue::Infinite),
            Err(e) => Err(e.into()),
        })
        .collect()
}

fn series_rows(kind: SeriesKind, order: u32, b: &[LoopValue], shift: f64) -> Result<Vec<Cell>, CliError> {
    match series_coefficients(kind, order, b, shift) {
        Ok(c) => Ok(c.into_iter().map(Cell::Float).collect()),
        Err(Error::InfiniteCoefficient { order: first_bad, .. }) => {
            let mut cells: Vec<Cell> = if first_bad == 0 {
                Vec::new()
            } else {
                series_coefficients(kind, first_bad as u32 - 1, b, shift)?
                    .into_iter()
                    .map(Cell::Float)
                    .collect()
            };
            cells.resize(order as usize + 1, Cell::text("divergent"));
            Ok(cells)
        }
        Err(e) => Err(e.into()),
    }
}

pub fn diagrams(cfg: &RunConfig, order: u32) -> Result<Vec<Output>, CliError> {
    if order > IDENTITY_MAX_N {
        return Err(CliError::Config(format!("order must be at most {IDENTITY_MAX_N}, got {order}")));
    }
    let moments: Vec<Value> = wick_moments(order)
        .iter()
        .enumerate()
        .map(|(k, m)| json!({"k": k, "H": m.to_json_value(), "H1": h1_moment(k as u32).to_json_value()}))
        .collect();

    let verdicts: Vec<bool> = (0..=order).into_par_iter().map(verify_renorm_identity).collect();
    let mut identity = Table::new("identity", &["n", "holds"]);
    for (n, &ok) in verdicts.iter().enumerate() {
        identity.push(vec![(n as i64).into(), Cell::yes_no(ok)]);
    }

    let b = loop_values(&cfg.spectrum, 2 * order.max(1), cfg.tol)?;
    let shift = match kappa(&cfg.spectrum, &cfg.regulator, cfg.kappa_tol) {
        Ok(k) => Some(0.5 * (k - cfg.theta)),
        Err(Error::NotInClass { .. } | Error::UnsupportedRegulatorTail { .. }) => None,
        Err(e) => return Err(e.into()),
    };
    let mut series = Table::new("series", &["kind", "order", "shift", "coefficient"]);
    let kinds = [
        (SeriesKind::PhiSeries, "phi"),
        (SeriesKind::ZSeries, "z"),
        (SeriesKind::PhiRenormSeries, "phi_renormalized"),
        (SeriesKind::ZRenormSeries, "z_renormalized"),
    ];
    for (kind, label) in kinds {
        let (shift_cell, cells) = if kind.is_renormalized() {
            match shift {
                Some(sh) => (Cell::Float(sh), series_rows(kind, order, &b, sh)?),
                None => (Cell::text("n/a"), vec![Cell::text("unavailable"); order as usize + 1]),
            }
        } else {
            (Cell::empty(), series_rows(kind, order, &b, 0.0)?)
        };
        for (j, c) in cells.into_iter().enumerate() {
            series.push(vec![label.into(), (j as i64).into(), shift_cell.clone(), c]);
        }
    }

    let mut out = vec![
        Output::Json { name: "moments".into(), value: Value::Array(moments) },
        Output::Table(identity),
        Output::Table(series),
    ];
    if let Some(n) = verdicts.iter().position(|ok| !ok) {
        // Keep the tables for inspection, but report the failure.
        out.push(Output::Text {
            name: "identity_failure".into(),
            text: format!("identity fails at n = {n}\n"),
        });
    }
    Ok(out)
}

pub fn list_criteria() -> String {
    CRITERIA.iter().map(|c| format!("{:>2} {:<24} {}\n", c.id, c.name, c.statement)).collect()
}

pub fn verify(seed: u64, golden: Golden, mut progress: impl FnMut(&str)) -> (bool, String) {
    let cfg = SuiteConfig { seed, golden };
    let report = acceptance::run_suite_with(&cfg, |o| progress(&o.line()));
    (report.all_passed(), report.render())
}
