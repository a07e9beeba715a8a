//! Power plant data: sequential knot addition followed by the method
//! comparison. Pass the CSV path (columns AT,V,AP,RH,PE) as the argument.

use std::path::PathBuf;

use reconstruct::benchmarks::{load_ccpp, run_ccpp, ExperimentConfig};

fn main() -> reconstruct::Result<()> {
    let Some(path) = std::env::args().nth(1).map(PathBuf::from) else {
        eprintln!("usage: ccpp <path/to/ccpp.csv>");
        std::process::exit(1);
    };
    let split = load_ccpp(&path)?;
    if let Some(w) = &split.warning {
        eprintln!("warning: {w}");
    }
    let mut config = ExperimentConfig::ccpp(1);
    config.n = split.train.len();
    config.test_size = split.test.len();
    let report = run_ccpp(&split, &config)?;
    if let Some(trace) = &report.sequential {
        for s in &trace.steps {
            println!("m={:>3}  gcv {:?}  test {:?}", s.m, s.gcv, s.test_error);
        }
    }
    for (method, s) in &report.summary {
        println!("{method:>8}  test MSE {:.4}", s.mean_mse);
    }
    Ok(())
}
