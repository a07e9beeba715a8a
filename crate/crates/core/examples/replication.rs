//! Replicated designs: knot means rebuilt by polynomial and spline
//! interpolation across noise levels.

use reconstruct::benchmarks::{run_replication_study, ExperimentConfig};

fn main() -> reconstruct::Result<()> {
    let mut config = ExperimentConfig::replication(49, 7, 5);
    config.repetitions = 20;
    let report = run_replication_study(&config)?;
    for (key, s) in &report.summary {
        println!("{key:>16}  MISE {:.5}  sd {:.5}", s.mean_mse, s.sd);
    }
    Ok(())
}
