//! Prints finite-sample critical-value tables for a given sample size.
//!
//! Usage: `cargo run --release --example tables -- [T] [replications] [seed] [min_window]`

use bubbletest::{bsadf_sequence, replication_seed, sadf, simulate_null, AdfSpec, Series};

fn main() {
    let mut args = std::env::args().skip(1);
    let t: usize = args.next().map_or(62, |a| a.parse().expect("sample size"));
    let reps: u64 = args.next().map_or(10_000, |a| a.parse().expect("replications"));
    let seed: u64 = args.next().map_or(42, |a| a.parse().expect("seed"));
    let min_window: usize = args.next().map_or(12, |a| a.parse().expect("min window"));
    let levels = [0.90, 0.95, 0.99];
    let spec = AdfSpec::default();

    println!("T={t} reps={reps} seed={seed} min_window={min_window}");
    let mut sadf_stats: Vec<f64> = Vec::new();
    let mut gsadf_stats: Vec<f64> = Vec::new();
    for i in 0..reps {
        let p: Series<f64> = simulate_null(t, replication_seed(seed, i)).unwrap();
        sadf_stats.push(sadf(&p, spec, min_window).unwrap().0);
        gsadf_stats.push(
            bsadf_sequence(&p, spec, min_window)
                .unwrap()
                .max_entry()
                .unwrap()
                .stat,
        );
    }
    sadf_stats.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    gsadf_stats.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    for (name, stats) in [("SADF", &sadf_stats), ("GSADF", &gsadf_stats)] {
        print!("{name:>5}");
        for level in levels {
            let rank = (level * stats.len() as f64).ceil() as usize;
            print!("  {level:.2}: {:.4}", stats[rank - 1]);
        }
        println!();
    }
}
