use std::io::Write;

use serde::{Deserialize, Serialize};

use modelprior::priors::approx_inclusion_probability;
use modelprior::search::{exact_posterior, gibbs_posterior};
use modelprior::{
    best_subset_per_dimension, hpm_via_profile, posterior_auto, Dataset, GibbsOptions, ModelIndicator,
    PosteriorSummary, PriorFamily, SearchOptions,
};

use crate::{cache, Failure, Format, MethodArg, Stage};

pub const SCHEMA_VERSION: u32 = 1;

/// Fixed-width scientific notation with 12 significant digits.
pub fn sig12(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.11e}")
    } else {
        v.to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplerSettings {
    pub iterations: usize,
    pub burn_in: usize,
    pub seed: u64,
    pub chains: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariableRow {
    pub name: String,
    pub inclusion_probability: f64,
    pub mc_standard_error: Option<f64>,
    /// `H` when in the HPM, `M` when in the MPM.
    pub annotation: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedModel {
    pub variables: Vec<String>,
    pub indices: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Analysis {
    pub schema_version: u32,
    pub prior: String,
    pub requested_method: String,
    pub n: usize,
    pub k0: usize,
    pub k: usize,
    pub sampler: Option<SamplerSettings>,
    pub variables: Vec<VariableRow>,
    pub hpm: NamedModel,
    pub mpm: NamedModel,
    pub summary: PosteriorSummary<f64>,
}

fn named(m: &ModelIndicator, names: &[String]) -> NamedModel {
    NamedModel { variables: m.indices().map(|j| names[j].clone()).collect(), indices: m.indices().collect() }
}

pub fn analyze(
    data: &Dataset<f64>,
    family: &PriorFamily<f64>,
    method: MethodArg,
    gibbs: &GibbsOptions,
    opts: &SearchOptions<f64>,
) -> Result<Analysis, Failure> {
    let summary = match method {
        MethodArg::Auto => posterior_auto(data, family, gibbs, opts),
        MethodArg::Exact => exact_posterior(data, family, opts),
        MethodArg::Gibbs => gibbs_posterior(data, family, gibbs, opts),
        MethodArg::Bnb => {
            let plain = SearchOptions { bnb_cap: 0, ..opts.clone() };
            let mut s = posterior_auto(data, family, gibbs, &plain).stage("computing inclusion probabilities")?;
            let profile = best_subset_per_dimension(data, opts).stage("branch and bound")?;
            if !profile.is_complete() {
                log::warn!("branch and bound timed out; the reported HPM is the best model found so far");
            }
            let (hpm, lp) = hpm_via_profile(&profile, family, data, opts).stage("branch and bound")?;
            s.hpm = hpm;
            s.hpm_log_posterior = lp;
            s.hpm_is_exact = profile.is_complete();
            Ok(s)
        }
    }
    .stage("computing the posterior")?;
    let names = data.candidate_names();
    let variables = names
        .iter()
        .enumerate()
        .map(|(j, name)| {
            let mut annotation = String::new();
            if summary.hpm.contains(j) {
                annotation.push('H');
            }
            if summary.mpm.contains(j) {
                annotation.push('M');
            }
            VariableRow {
                name: name.clone(),
                inclusion_probability: summary.inclusion_probs[j],
                mc_standard_error: summary.mc_standard_errors.as_ref().map(|s| s[j]),
                annotation,
            }
        })
        .collect();
    let sampled = matches!(summary.method, modelprior::Method::Gibbs);
    Ok(Analysis {
        schema_version: SCHEMA_VERSION,
        prior: family.name(),
        requested_method: format!("{method:?}").to_lowercase(),
        n: data.n(),
        k0: data.k0(),
        k: data.k(),
        sampler: sampled.then(|| SamplerSettings {
            iterations: gibbs.iterations,
            burn_in: gibbs.burn_in,
            seed: gibbs.seed,
            chains: gibbs.chains,
        }),
        variables,
        hpm: named(&summary.hpm, names),
        mpm: named(&summary.mpm, names),
        summary,
    })
}

pub fn write_analysis(out: &mut dyn Write, a: &Analysis, format: Format) -> Result<(), Failure> {
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut *out, a).map_err(std::io::Error::from).stage("writing output")?;
            writeln!(out).stage("writing output")
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(["variable", "inclusion_probability", "mc_standard_error", "annotation"])
                .map_err(std::io::Error::from)
                .stage("writing output")?;
            for v in &a.variables {
                let se = v.mc_standard_error.map(sig12).unwrap_or_default();
                w.write_record([v.name.as_str(), &sig12(v.inclusion_probability), &se, &v.annotation])
                    .map_err(std::io::Error::from)
                    .stage("writing output")?;
            }
            w.flush().stage("writing output")
        }
    }
}

#[derive(Serialize)]
struct PriorRow {
    d: usize,
    mass: String,
    log_per_model_prior: String,
}

#[derive(Serialize)]
struct PriorBlock {
    family: String,
    rows: Vec<PriorRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

/// One block per family; a family whose computation fails is reported and
/// skipped, and the command fails after the others are written.
pub fn priors_table(out: &mut dyn Write, families: &[PriorFamily<f64>], k: usize, format: Format) -> Result<(), Failure> {
    let mut blocks = Vec::new();
    let mut first_error = None;
    for fam in families {
        let computed = cache::prepare(fam, k).and_then(|p| Ok((p.dimension_mass()?, p)));
        match computed {
            Ok((mass, prepared)) => blocks.push(PriorBlock {
                family: fam.name(),
                rows: (0..=k)
                    .map(|d| PriorRow {
                        d,
                        mass: sig12(mass.mass[d]),
                        log_per_model_prior: sig12(prepared.log_prior(d)),
                    })
                    .collect(),
                error: None,
            }),
            Err(e) => {
                eprintln!("modelprior: family {fam} failed: {e}");
                blocks.push(PriorBlock { family: fam.name(), rows: Vec::new(), error: Some(e.to_string()) });
                first_error.get_or_insert(e);
            }
        }
    }
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            let io = |e: csv::Error| std::io::Error::from(e);
            w.write_record(["family", "k", "d", "mass", "log_per_model_prior"]).map_err(io).stage("writing output")?;
            for b in &blocks {
                for r in &b.rows {
                    w.write_record([b.family.as_str(), &k.to_string(), &r.d.to_string(), &r.mass, &r.log_per_model_prior])
                        .map_err(io)
                        .stage("writing output")?;
                }
            }
            w.flush().stage("writing output")?;
        }
        Format::Json => {
            let doc = serde_json::json!({ "schema_version": SCHEMA_VERSION, "k": k, "families": blocks });
            serde_json::to_writer_pretty(&mut *out, &doc).map_err(std::io::Error::from).stage("writing output")?;
            writeln!(out).stage("writing output")?;
            out.flush().stage("writing output")?;
        }
    }
    match first_error {
        Some(e) => Err(e).stage("computing prior tables"),
        None => Ok(()),
    }
}

#[derive(Serialize)]
struct InclusionRow {
    family: String,
    k: usize,
    exact: f64,
    zero_truncated: f64,
    approximate: Option<f64>,
}

pub fn inclusion_table(out: &mut dyn Write, families: &[PriorFamily<f64>], ks: &[usize], format: Format) -> Result<(), Failure> {
    let mut rows = Vec::new();
    for fam in families {
        for &k in ks {
            let mass = cache::prepare(fam, k).and_then(|p| p.dimension_mass()).stage("computing inclusion probabilities")?;
            rows.push(InclusionRow {
                family: fam.name(),
                k,
                exact: mass.inclusion_probability(),
                zero_truncated: mass.zero_truncated_inclusion_probability(),
                approximate: approx_inclusion_probability(fam, k),
            });
        }
    }
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            let io = |e: csv::Error| std::io::Error::from(e);
            w.write_record(["family", "k", "exact", "zero_truncated", "approximate"]).map_err(io).stage("writing output")?;
            for r in &rows {
                let approx = r.approximate.map(sig12).unwrap_or_default();
                w.write_record([r.family.as_str(), &r.k.to_string(), &sig12(r.exact), &sig12(r.zero_truncated), &approx])
                    .map_err(io)
                    .stage("writing output")?;
            }
            w.flush().stage("writing output")
        }
        Format::Json => {
            let doc = serde_json::json!({ "schema_version": SCHEMA_VERSION, "rows": rows });
            serde_json::to_writer_pretty(&mut *out, &doc).map_err(std::io::Error::from).stage("writing output")?;
            writeln!(out).stage("writing output")
        }
    }
}

#[derive(Serialize)]
struct ProfileRow {
    family: String,
    d: usize,
    log_ratio: f64,
    sse: f64,
    proven: bool,
    model: String,
}

pub fn profile(
    out: &mut dyn Write,
    data: &Dataset<f64>,
    families: &[PriorFamily<f64>],
    opts: &SearchOptions<f64>,
    format: Format,
) -> Result<(), Failure> {
    let profile = best_subset_per_dimension(data, opts).stage("branch and bound")?;
    if profile.timed_out {
        log::warn!("branch and bound timed out; dimensions marked unproven may not hold the best model");
    }
    let names = data.candidate_names();
    let mut rows = Vec::new();
    for fam in families {
        let ratios = profile.log_posterior_ratios(fam, data, opts).stage("scoring the profile")?;
        for (d, &r) in ratios.iter().enumerate() {
            rows.push(ProfileRow {
                family: fam.name(),
                d,
                log_ratio: r,
                sse: profile.sse[d],
                proven: profile.proven[d],
                model: profile.models[d].indices().map(|j| names[j].as_str()).collect::<Vec<_>>().join("+"),
            });
        }
    }
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            let io = |e: csv::Error| std::io::Error::from(e);
            w.write_record(["family", "d", "log_ratio", "sse", "proven", "model"]).map_err(io).stage("writing output")?;
            for r in &rows {
                w.write_record([
                    r.family.as_str(),
                    &r.d.to_string(),
                    &sig12(r.log_ratio),
                    &sig12(r.sse),
                    &r.proven.to_string(),
                    &r.model,
                ])
                .map_err(io)
                .stage("writing output")?;
            }
            w.flush().stage("writing output")
        }
        Format::Json => {
            let doc = serde_json::json!({
                "schema_version": SCHEMA_VERSION,
                "timed_out": profile.timed_out,
                "nodes": profile.nodes,
                "rows": rows,
            });
            serde_json::to_writer_pretty(&mut *out, &doc).map_err(std::io::Error::from).stage("writing output")?;
            writeln!(out).stage("writing output")
        }
    }
}
