use std::fmt::Write as _;
use std::path::Path;

use log::warn;
use rayon::prelude::*;
use serde::Serialize;

use super::config::ScenarioConfig;
use super::output::{fmt_f64, write_atomic};
use super::run::run_scenario;
use crate::error::{Error, Result};

/// One swept field: a dotted path into the scenario file and its values.
#[derive(Clone, Debug)]
pub struct SweepAxis {
    pub field: String,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepRow {
    pub values: Vec<f64>,
    pub v_total: Option<f64>,
    pub max_loss: Option<f64>,
    pub bound_satisfied: Option<bool>,
    pub passed: bool,
    pub error: Option<String>,
}

fn lookup<'a>(root: &'a mut toml::Value, field: &str) -> Result<&'a mut toml::Value> {
    let mut cur = root;
    for key in field.split('.') {
        cur = cur
            .get_mut(key)
            .ok_or_else(|| Error::Config(format!("sweep axis {field}: no field {key:?} in the base config")))?;
    }
    Ok(cur)
}

fn set_field(root: &mut toml::Value, field: &str, value: f64) -> Result<()> {
    let slot = lookup(root, field)?;
    *slot = match slot {
        toml::Value::Integer(_) => {
            if value.fract() != 0.0 {
                return Err(Error::Config(format!("sweep axis {field} is an integer field, got {value}")));
            }
            toml::Value::Integer(value as i64)
        }
        toml::Value::Float(_) => toml::Value::Float(value),
        _ => return Err(Error::Config(format!("sweep axis {field} is not a numeric field"))),
    };
    Ok(())
}

/// Checks the axes against the base config without running anything.
pub fn check_axes(base: &toml::Value, axes: &[SweepAxis]) -> Result<usize> {
    let rows = axes.first().map_or(0, |a| a.values.len());
    for a in axes {
        if a.values.len() != rows {
            return Err(Error::Config(format!(
                "sweep axes need equally long value lists: {} has {}, expected {rows}",
                a.field,
                a.values.len()
            )));
        }
        let mut probe = base.clone();
        match lookup(&mut probe, &a.field)? {
            toml::Value::Integer(_) | toml::Value::Float(_) => {}
            _ => return Err(Error::Config(format!("sweep axis {} is not a numeric field", a.field))),
        }
        for &v in &a.values {
            set_field(&mut probe.clone(), &a.field, v)?;
        }
    }
    Ok(rows)
}

/// Runs one scenario per row of the axis table, possibly concurrently, and
/// writes `sweep.csv` plus each row's artifacts under `out_dir/row_<i>`.
/// Failing rows are recorded and do not stop the sweep.
pub fn sweep(
    base: &toml::Value,
    axes: &[SweepAxis],
    out_dir: &Path,
    adjust: &(dyn Fn(&mut ScenarioConfig) + Sync),
) -> Result<Vec<SweepRow>> {
    let rows = check_axes(base, axes)?;
    let table: Vec<SweepRow> = (0..rows)
        .into_par_iter()
        .map(|i| {
            let values: Vec<f64> = axes.iter().map(|a| a.values[i]).collect();
            let outcome = (|| {
                let mut v = base.clone();
                for a in axes {
                    set_field(&mut v, &a.field, a.values[i])?;
                }
                let text = toml::to_string(&v).map_err(|e| Error::Config(e.to_string()))?;
                let mut cfg = ScenarioConfig::from_toml_str(&text)?;
                adjust(&mut cfg);
                cfg.output.dir = out_dir.join(format!("row_{i}"));
                run_scenario(&cfg)
            })();
            match outcome {
                Ok(s) => SweepRow {
                    values,
                    v_total: s.adiabatic.as_ref().map(|a| a.v_total),
                    max_loss: s.adiabatic.as_ref().map(|a| a.max_loss),
                    bound_satisfied: s.adiabatic.as_ref().map(|a| a.bound_satisfied),
                    passed: s.passed,
                    error: None,
                },
                Err(e) => {
                    warn!("sweep row {i} failed: {e}");
                    SweepRow {
                        values,
                        v_total: None,
                        max_loss: None,
                        bound_satisfied: None,
                        passed: false,
                        error: Some(e.to_string()),
                    }
                }
            }
        })
        .collect();
    write_atomic(&out_dir.join("sweep.csv"), &sweep_csv(axes, &table))?;
    Ok(table)
}

pub fn sweep_csv(axes: &[SweepAxis], rows: &[SweepRow]) -> String {
    let mut out = String::new();
    for a in axes {
        let _ = write!(out, "{},", a.field);
    }
    out.push_str("V,max_loss,bound_satisfied,passed,error\n");
    let opt = |x: Option<f64>| x.map(fmt_f64).unwrap_or_default();
    for r in rows {
        for v in &r.values {
            let _ = write!(out, "{},", fmt_f64(*v));
        }
        let _ = writeln!(
            out,
            "{},{},{},{},\"{}\"",
            opt(r.v_total),
            opt(r.max_loss),
            r.bound_satisfied.map(|b| b.to_string()).unwrap_or_default(),
            r.passed,
            r.error.as_deref().unwrap_or("").replace('"', "'")
        );
    }
    out
}
