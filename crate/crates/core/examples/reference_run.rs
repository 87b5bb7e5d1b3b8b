//! One reference GBM run: `cargo run --release --example reference_run [paths] [steps] [seed]`.

use std::time::Instant;

use momentchain::{simulate, wasserstein1, GbmParams64, Grid64, SimulationOptions};

fn main() {
    let arg = |i: usize, default: u64| std::env::args().nth(i).and_then(|a| a.parse().ok()).unwrap_or(default);
    let (paths, steps, seed) = (arg(1, 10_000) as usize, arg(2, 10_000), arg(3, 1));
    let params = GbmParams64::new(2.0, 0.25, 1.0, 0.0002).unwrap();
    let grid = Grid64::two_sided(0.1, 0.01).unwrap();
    let start = Instant::now();
    let batch = simulate(&params.kernel(&grid), &SimulationOptions::new(paths, steps, seed)).unwrap();
    let dist = batch.snapshot(steps).unwrap();
    let law = params.log_return_law(steps);
    let w1 = wasserstein1(&dist, &law, 4096).unwrap();
    println!("mean {} (law {})", dist.mean(), law.mean);
    println!("variance {} (law {})", dist.variance(), law.variance);
    println!("W1 {w1}");
    println!("{:?}", start.elapsed());
}
