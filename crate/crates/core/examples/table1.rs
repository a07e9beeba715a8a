//! Reduced-size KRR / GPR / GPRR comparison on model I (d = 2, n = 200).

use reconstruct::benchmarks::{run_table1, ExperimentConfig, TestFunction};

fn main() -> reconstruct::Result<()> {
    let model = std::env::args().nth(1).unwrap_or_else(|| "I".into());
    let function: TestFunction = model.parse()?;
    let mut config = ExperimentConfig::table1(function, 2, 200, 1);
    config.record_timings = true;
    let report = run_table1(&config)?;
    for (method, s) in &report.summary {
        println!("{method:>5}  mean MSE {:.4}  sd {:.4}", s.mean_mse, s.sd);
    }
    if let Some(t) = &report.timings {
        println!("timings (s): {t:?}");
    }
    Ok(())
}
