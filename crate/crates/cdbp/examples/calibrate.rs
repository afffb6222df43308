// Scratch calibration: solver means at n=24 against the published anchors.

use cdbp::bb::{bb_solve, BbConfig};
use cdbp::dcbb::{dcbb_solve, DcbbConfig};
use cdbp::heuristics::{solve_first_fit, HeuristicConfig};
use cdbp::model::count_servers;
use cdbp::oemacs::{oemacs_plus_solve, AcoParams};
use cdbp::workloads::{synthetic_instance, SyntheticSpec};
use std::time::Instant;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let seeds: u64 = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(5);
    let dcbb_budget: f64 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(3.0);
    let bb_budget: f64 = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(10.0);
    let n: usize = args.get(4).and_then(|s| s.parse().ok()).unwrap_or(24);

    let mut sums = [0.0f64; 5];
    let mut times = [0.0f64; 5];
    for seed in 0..seeds {
        let instance = synthetic_instance(&SyntheticSpec::with_defaults(n, seed)).unwrap();

        let t = Instant::now();
        let ffp = solve_first_fit(&instance, &HeuristicConfig::ff_plus(seed)).unwrap();
        times[0] += t.elapsed().as_secs_f64();
        sums[0] += count_servers(&ffp) as f64;

        let t = Instant::now();
        let ddffp = cdbp::heuristics::solve_ddff(&instance, &HeuristicConfig::ddff_plus(seed)).unwrap();
        times[1] += t.elapsed().as_secs_f64();
        sums[1] += count_servers(&ddffp) as f64;

        let t = Instant::now();
        let aco = oemacs_plus_solve(
            &instance,
            &AcoParams {
                seed,
                ..AcoParams::default()
            },
        )
        .unwrap();
        times[2] += t.elapsed().as_secs_f64();
        sums[2] += aco.server_count as f64;

        let t = Instant::now();
        let dc = dcbb_solve(
            &instance,
            &DcbbConfig {
                total_time_budget: dcbb_budget,
                seed,
                ..DcbbConfig::default()
            },
        )
        .unwrap();
        times[3] += t.elapsed().as_secs_f64();
        sums[3] += dc.server_count as f64;

        let t = Instant::now();
        let bb = bb_solve(
            &instance,
            &BbConfig {
                time_limit: bb_budget,
                ..BbConfig::default()
            },
        )
        .unwrap();
        times[4] += t.elapsed().as_secs_f64();
        sums[4] += bb.server_count as f64;
        eprintln!(
            "seed {seed}: ff+ {} ddff+ {} aco {} dcbb {} bb {} (bb proved {})",
            count_servers(&ffp),
            count_servers(&ddffp),
            aco.server_count,
            dc.server_count,
            bb.server_count,
            bb.proved_optimal
        );
    }
    let k = seeds as f64;
    println!("n={n} over {seeds} seeds:");
    println!("  FF+    mean {:.2}  ({:.3}s)", sums[0] / k, times[0] / k);
    println!("  DDFF+  mean {:.2}  ({:.3}s)", sums[1] / k, times[1] / k);
    println!("  OEMACS mean {:.2}  ({:.3}s)", sums[2] / k, times[2] / k);
    println!("  DCBB   mean {:.2}  ({:.3}s)", sums[3] / k, times[3] / k);
    println!("  BB     mean {:.2}  ({:.3}s)", sums[4] / k, times[4] / k);
}
