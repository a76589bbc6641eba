//! Compare shipping raw source matrices with exchanging latent vectors.
//!
//!     cargo run --example transfer_report

use mspmf::distributed::transfer_report;

fn main() {
    // 80 billion raw entries; 4 million shared users; k = 10; 100 rounds.
    println!("{}", transfer_report(4_000_000, 0, 10, 100, 80_000_000_000));

    println!("{:>6} {:>12}", "k", "ratio");
    for k in [5, 10, 20, 50, 100] {
        let r = transfer_report(4_000_000, 0, k, 100, 80_000_000_000);
        println!("{k:>6} {:>11.1}%", r.ratio * 100.0);
    }
}
