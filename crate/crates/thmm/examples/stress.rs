//! Sweep the coupling residual over a widening family of instances and
//! report the worst deviation per interval, to map where double precision
//! stops supporting the identity checks.
//!
//!     cargo run -p thmm --example stress --release

use thmm::moments::{random_hausdorff_sequence, Interval};
use thmm::resolvent::{coupling_residual, default_grid};

fn main() {
    println!(
        "{:>14}  {:>9}  {:>12}  worst case",
        "interval", "instances", "worst"
    );
    for (a, b) in [
        (-0.75, 1.25),
        (0.0, 1.0),
        (0.4, 1.6),
        (-2.0, 2.0),
        (0.0, 3.0),
        (-0.1, 0.1),
        (1.0, 1.5),
    ] {
        let interval = Interval::new(a, b).unwrap();
        let grid = default_grid(interval);
        let mut worst: f64 = 0.0;
        let mut worst_desc = String::new();
        let mut count = 0usize;
        for q in 1..=3usize {
            for n in 1..=4usize {
                for m in [2 * n, 2 * n + 1] {
                    for seed in 0..25u64 {
                        let key = 77777 + seed * 31 + q as u64 * 7 + n as u64;
                        let Ok((_, seq)) = random_hausdorff_sequence(q, m, interval, key) else {
                            continue;
                        };
                        match coupling_residual(&seq, &grid) {
                            Ok(res) => {
                                count += 1;
                                if res > worst {
                                    worst = res;
                                    worst_desc = format!("q={q} n={n} m={m} seed {key}");
                                }
                            }
                            Err(_) => continue,
                        }
                    }
                }
            }
        }
        println!("[{a:>5}, {b:>4}]  {count:>9}  {worst:>12.3e}  {worst_desc}");
    }
}
