use std::time::Instant;

use modelprior::{best_subset_per_dimension, hpm_via_profile, PriorFamily, SearchOptions, SyntheticSpec};

fn main() -> modelprior::Result<()> {
    let args: Vec<u64> = std::env::args().skip(1).map(|a| a.parse().expect("integer argument")).collect();
    let (k, seed, corr) = (args.first().copied().unwrap_or(47) as usize, args.get(1).copied().unwrap_or(1), args.get(2).copied().unwrap_or(0));
    let spec = SyntheticSpec::new(300, k, vec![0, 5, 11, 20, 27], seed).with_coefficient(0.4).with_correlation(corr as f64 / 100.0);
    let data = spec.generate::<f64>()?;
    let opts = SearchOptions::default();
    let t = Instant::now();
    let profile = best_subset_per_dimension(&data, &opts)?;
    let (hpm, lp) = hpm_via_profile(&profile, &PriorFamily::cmg(), &data, &opts)?;
    println!("k={k} nodes={} time={:.2?} hpm={hpm} lp={lp:.4}", profile.nodes, t.elapsed());
    Ok(())
}
