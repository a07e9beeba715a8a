//! Borehole comparison of Nystrom, SPGP and GPRR with random knot subsets.
//! Pass `n m reps draws` to change the size (default 5000 80 5 10).

use reconstruct::benchmarks::{run_table3, ExperimentConfig};

fn main() -> reconstruct::Result<()> {
    let args: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let get = |i: usize, d: usize| args.get(i).copied().unwrap_or(d);
    let mut config = ExperimentConfig::table3(get(0, 5000), get(1, 80), 1);
    config.repetitions = get(2, 5);
    config.inner_draws = get(3, 10);
    config.record_timings = true;
    let report = run_table3(&config)?;
    for (method, s) in &report.summary {
        println!("{method:>8}  MMSE {:.4}  MSTD {:.4}", s.mmse, s.mstd.unwrap_or(0.0));
    }
    for method in ["gprr", "spgp", "nystrom"] {
        println!("{method:>8}  per repetition {:?}", report.rep_means(method));
    }
    if let Some(t) = &report.timings {
        println!("timings (s): {t:?}");
    }
    Ok(())
}
