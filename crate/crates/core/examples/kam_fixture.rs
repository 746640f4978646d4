//! Runs the iteration on a seeded three-mode fixture and prints the report.
//!
//! `cargo run --release --example kam_fixture -- [seed] [sigma] [r] [eps]`

use nlkg_kam::kam::{run_kam_with, KamOptions};
use nlkg_kam::nlkg::{draw_potential, ModelParams};

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let num = |i: usize, d: f64| args.get(i).and_then(|s| s.parse().ok()).unwrap_or(d);
    let seed = num(0, 0.0) as u64;
    let p = ModelParams {
        c: 1.0,
        v: draw_potential(3, seed),
        eps: num(3, 1e-6),
        sigma: num(1, 3.0),
        r: num(2, 1.5),
        n_max: 3,
        d_max: 8,
    };
    let t = std::time::Instant::now();
    let rep = run_kam_with(&p, KamOptions { seed, ..KamOptions::default() }).unwrap();
    println!("{}", serde_json::to_string_pretty(&rep).unwrap());
    eprintln!("elapsed {:?}", t.elapsed());
}
