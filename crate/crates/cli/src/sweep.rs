//! CSV sweeps: one row per config with flattened scalars, stable column
//! order ('.' decimal, never NaN).

use std::collections::BTreeSet;
use std::path::Path;

use crate::config::{ExperimentConfig, ExperimentKind};
use crate::report::Report;
use crate::runner;
use crate::{CliError, Result};

const CONFIG_COLUMNS: [&str; 12] = [
    "experiment",
    "d_a",
    "d_b",
    "t",
    "eps",
    "trials",
    "seed_value",
    "seed_stream",
    "subset",
    "n_effects",
    "restarts",
    "max_iters",
];

/// Loads every `*.json` config in the directory, sorted by file name.
pub fn load_configs(dir: &Path) -> Result<Vec<ExperimentConfig>> {
    let mut paths: Vec<_> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().map(|e| e == "json").unwrap_or(false))
        .collect();
    paths.sort();
    paths
        .iter()
        .map(|p| ExperimentConfig::from_json(&std::fs::read_to_string(p)?))
        .collect()
}

/// Runs a homogeneous list of configs and renders the CSV table.
pub fn sweep(configs: &[ExperimentConfig]) -> Result<String> {
    if let Some(first) = configs.first() {
        let kind = first.experiment;
        if configs.iter().any(|c| c.experiment != kind) {
            return Err(CliError::Sweep(
                "sweep configs must share one experiment kind".into(),
            ));
        }
    }
    let reports: Vec<Report> = configs.iter().map(runner::run).collect::<Result<_>>()?;
    render_csv(&reports)
}

pub fn render_csv(reports: &[Report]) -> Result<String> {
    let mut scalar_keys: BTreeSet<String> = BTreeSet::new();
    for r in reports {
        r.check_finite()?;
        scalar_keys.extend(r.results.keys().cloned());
    }
    let mut out = String::new();
    out.push_str(&CONFIG_COLUMNS.join(","));
    for key in &scalar_keys {
        out.push(',');
        out.push_str(key);
    }
    out.push('\n');
    for r in reports {
        let c = &r.config;
        let subset = match c.subset {
            crate::config::SubsetKind::FullSphere => "full_sphere",
            crate::config::SubsetKind::Separable => "separable",
        };
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            kind_str(c.experiment),
            c.d_a,
            c.d_b,
            c.t,
            c.eps,
            c.trials,
            c.seed.value,
            c.seed.stream_id,
            subset,
            c.n_effects,
            c.restarts,
            c.max_iters,
        ));
        for key in &scalar_keys {
            out.push(',');
            if let Some(s) = r.results.get(key) {
                out.push_str(&format!("{}", s.value));
            }
        }
        out.push('\n');
    }
    Ok(out)
}

fn kind_str(kind: ExperimentKind) -> &'static str {
    kind.as_str()
}
