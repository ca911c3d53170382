//! Compare the three smoothers against their nonsmooth functions as mu shrinks.

use ssag::smoothers::{AffineFamily, LogSumExpMaxSmoother, MoreauHingeSmoother, NesterovSimplexMaxSmoother};
use ssag::smoothing::SmoothedOracle;

fn main() -> ssag::Result<()> {
    // max(x1, x2, 0.3 - x1 - x2)
    let rows = vec![1.0, 0.0, 0.0, 1.0, -1.0, -1.0];
    let offsets = vec![0.0, 0.0, 0.3];
    let lse = LogSumExpMaxSmoother::new(AffineFamily::new(2, rows.clone(), offsets.clone())?, 1.0)?;
    let nes = NesterovSimplexMaxSmoother::new(2, rows, offsets, 1.0)?;
    let hinge = MoreauHingeSmoother::new(1.0);

    let x = [0.4, 0.1];
    println!("h(x) = {}", lse.nonsmooth_value(&x));
    println!("{:>6} {:>12} {:>12} {:>12}", "mu", "log-sum-exp", "nesterov", "moreau(0.3)");
    for mu in [1.0, 0.3, 0.1, 0.03, 0.01] {
        println!(
            "{mu:>6} {:>12.6} {:>12.6} {:>12.6}",
            lse.value(&x, mu),
            nes.value(&x, mu),
            hinge.value(&[0.3], mu)
        );
    }
    println!("log-sum-exp gradient at mu = 0.1: {:?}", lse.grad(&x, 0.1));
    println!("kappa: lse {:.4}, nesterov {:.4}, moreau {}", lse.params().kappa, nes.params().kappa, hinge.params().kappa);
    Ok(())
}
