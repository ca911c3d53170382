//! A full multi-seed experiment from a config string: automatic variance,
//! iteration limit and reference value, records and a summary on disk.

use ssag::harness::{run_experiment, ExperimentConfig};

fn main() -> ssag::Result<()> {
    let out = std::env::temp_dir().join("ssag-experiment-example");
    let mut cfg = ExperimentConfig::parse(
        "problem = drsvm\n\
         epsilon = 0.02\n\
         seeds = 0..4\n\
         reference = auto\n\
         reference_iters = 5000\n\
         deterministic = true\n",
    )?;
    cfg.out = out.clone();
    let report = run_experiment(&cfg)?;
    let r = &report.resolved;
    println!("kappa {:.4}, sigma^2 {:.4}, m {}, N {}, reference {:?}", r.kappa, r.sigma_sq, r.batch_size, r.iteration_limit, r.reference);
    print!("{}", report.summary.to_csv());
    for p in &report.record_paths {
        println!("wrote {}", p.display());
    }
    println!("resolved config in {}", out.join("resolved.cfg").display());
    Ok(())
}
