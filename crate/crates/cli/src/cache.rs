//! On-disk cache of per-model log priors for the quadrature-based families.
use std::fs;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use modelprior::priors::PreparedPrior;
use modelprior::PriorFamily;

pub const CACHE_ENV: &str = "MODELPRIOR_CACHE_DIR";

#[derive(Serialize, Deserialize)]
struct Entry {
    family: String,
    k: usize,
    log_per_model: Vec<f64>,
}

fn path_for(family: &PriorFamily<f64>, k: usize) -> Option<PathBuf> {
    let dir = std::env::var_os(CACHE_ENV)?;
    let name: String = family.name().chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' { c } else { '_' }).collect();
    Some(PathBuf::from(dir).join(format!("{name}-k{k}.json")))
}

/// Per-model log priors for `family` at `k`, read from and written to the
/// cache directory when one is configured and the family needs quadrature.
pub fn prepare(family: &PriorFamily<f64>, k: usize) -> modelprior::Result<PreparedPrior<f64>> {
    let path = match path_for(family, k) {
        Some(p) if family.uses_quadrature() => p,
        _ => return family.prepare(k),
    };
    if let Ok(text) = fs::read_to_string(&path) {
        match serde_json::from_str::<Entry>(&text) {
            Ok(e) if e.family == family.name() && e.k == k && e.log_per_model.len() == k + 1 => {
                return PreparedPrior::from_cached(*family, e.log_per_model);
            }
            _ => log::warn!("ignoring unreadable cache entry {}", path.display()),
        }
    }
    let prepared = family.prepare(k)?;
    let entry = Entry { family: family.name(), k, log_per_model: prepared.log_per_model().to_vec() };
    let written = path
        .parent()
        .map_or(Ok(()), fs::create_dir_all)
        .and_then(|_| fs::write(&path, serde_json::to_string(&entry).expect("cache entry serializes")));
    if let Err(e) = written {
        log::warn!("could not write cache entry {}: {e}", path.display());
    }
    Ok(prepared)
}
