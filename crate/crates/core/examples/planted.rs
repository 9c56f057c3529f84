//! Grid search, held-out evaluation and feature ranking on a planted corpus.
//!
//! cargo run --release --example planted -- [seed] [n]

use std::time::Instant;

use omnigraph::analysis::rank_features;
use omnigraph::learn::{evaluate, grid_search, GridSpec, KernelKind};
use omnigraph::synth::{generate, PlantSpec};
use omnigraph::KindMask;

fn main() {
    let mut args = std::env::args().skip(1);
    let seed: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(0);
    let n: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(200);
    let corpus = generate(&PlantSpec { seed, ..PlantSpec::default() }, n).expect("valid spec");
    let spec = GridSpec::default();
    for kernel in [KernelKind::Wl, KernelKind::New, KernelKind::Bow] {
        let t = Instant::now();
        let grid = grid_search(&corpus.instances, &spec, kernel, seed).expect("grid");
        let report = evaluate(
            &corpus.instances,
            &grid.best.config,
            grid.best.c,
            kernel,
            seed,
            spec.test_fraction,
        )
        .expect("eval");
        println!(
            "{kernel}: dev {:.3} test {:.3} (depth {}, C {}, {} configs, {:.1}s)",
            grid.best.accuracy,
            report.accuracy,
            grid.best.config.max_depth,
            grid.best.c,
            grid.scores.len(),
            t.elapsed().as_secs_f64()
        );
    }
    let top = rank_features(&corpus.instances, 3, KindMask::all(), 5, 2);
    for (i, f) in top.iter().enumerate() {
        println!("{} {:.4} {} {}", i + 1, f.mi, f.depth, f.feature);
    }
}
