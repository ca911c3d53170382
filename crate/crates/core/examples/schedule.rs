//! Print the first few steps of the accelerated schedule and the iteration
//! limit for a few targets.

use ssag::smoothing::SmoothingParams;
use ssag::solver::{iteration_limit, ScheduleState, SmoothingMode};

fn main() -> ssag::Result<()> {
    let params = SmoothingParams::new(3f64.ln(), 0.0, 2.0, 1.0)?;
    let mut s = ScheduleState::new(1.0, 4, SmoothingMode::Diminishing, params)?;
    println!("{:>4} {:>10} {:>10} {:>10} {:>10} {:>10}", "k", "alpha", "mu", "L_mu", "beta", "theta");
    for _ in 0..10 {
        println!(
            "{:>4} {:>10.5} {:>10.5} {:>10.4} {:>10.4} {:>10.4}",
            s.k, s.alpha_prev, s.mu_k, s.l_mu(), s.beta_k, s.theta_k
        );
        s.advance();
    }
    for eps in [0.1, 0.01, 0.001] {
        for m in [1, 100] {
            println!("eps {eps}, sigma 1, m {m}: N = {}", iteration_limit(eps, 3f64.ln(), 1.0, 1.0, m)?);
        }
    }
    Ok(())
}
