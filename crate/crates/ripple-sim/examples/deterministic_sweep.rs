//! The sweep engine partitions the grid statically over workers and
//! gathers rows into pre-allocated slots, so the output bytes do not
//! depend on the worker count.

use ripple_sim::sweep::{
    csv_string, run_sweep, Experiment, GridAxis, GridSpec, Overrides, SweepConfig, SweepSpec,
};

fn main() {
    let config = SweepConfig {
        grid: Some(GridSpec { axis: GridAxis::D2Ratio, min: 0.0, max: 2.0, count: 21 }),
        ..SweepConfig::default()
    };

    let run_with = |workers: usize| {
        let mut spec = SweepSpec::resolve(Experiment::Chern, &config, &Overrides::default())
            .expect("valid spec");
        spec.workers = workers;
        let result = run_sweep(&spec).expect("sweep");
        (csv_string(&result), result.metadata.wall_ms)
    };

    let (csv1, ms1) = run_with(1);
    let (csv8, ms8) = run_with(8);

    println!("chern sweep, 21 grid points:");
    println!("  1 worker : {ms1:8.2} ms");
    println!("  8 workers: {ms8:8.2} ms");
    println!("  identical bytes: {}", csv1 == csv8);
    println!();
    for line in csv1.lines().take(6) {
        println!("  {line}");
    }
    println!("  ...");
    assert_eq!(csv1, csv8, "row bytes must not depend on the worker count");
}
