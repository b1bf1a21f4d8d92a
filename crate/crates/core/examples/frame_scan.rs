//! Lower frame bounds of Hermite windows across theta.
//!
//! `cargo run --example frame_scan -- 3` scans Hermite(0..=3).

use nc_soliton::gabor::frame_bounds;
use nc_soliton::lattice::TorusContext;
use nc_soliton::{realize_window, Window};

fn main() -> nc_soliton::Result<()> {
    let max: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(2);
    let thetas = [0.25, 1.0 / 3.0, 0.45, 0.5, 0.55, 2.0 / 3.0, 0.75];
    print!("{:>6}", "theta");
    for k in 0..=max {
        print!("  {:>12}", format!("hermite:{k}"));
    }
    println!();
    for theta in thetas {
        print!("{theta:>6.3}");
        for k in 0..=max {
            let w = Window::hermite(k);
            let ctx = TorusContext::for_window(theta, &w)?;
            let eta = realize_window(&w, &ctx.grid)?;
            let d = frame_bounds(&eta, &ctx)?;
            print!("  {:>12.3e}", d.lower_bound);
        }
        println!();
    }
    Ok(())
}
