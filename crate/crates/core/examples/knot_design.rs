//! Space-filling knot selection from a uniform sample in the unit square.

use reconstruct::benchmarks::{simulate, TestFunction};
use reconstruct::designs::{knot_criterion, select_knots};
use reconstruct::interpolators::KnotSet;

fn main() -> reconstruct::Result<()> {
    let data = simulate(TestFunction::I, 2, 500, 1.0, 7)?;
    let first = KnotSet::subset(&data.x, &(0..20).collect::<Vec<_>>())?;
    println!("first 20 points      criterion {:.4}", knot_criterion(&first)?);
    for trials in [1, 100, 5000] {
        let sel = select_knots(&data.x, 20, trials, 7)?;
        println!("best of {trials:>5} subsets criterion {:.4}", sel.criterion);
    }
    let sel = select_knots(&data.x, 20, 5000, 7)?;
    for i in 0..sel.knots.len() {
        let p = sel.knots.row(i);
        println!("  ({:.3}, {:.3})", p[0], p[1]);
    }
    Ok(())
}
