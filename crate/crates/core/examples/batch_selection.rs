//! Pick a batch size from short pilot runs.

use ssag::data::synthetic::separable_2d;
use ssag::harness::select_batch_size;
use ssag::problems::{DrsvmInstance, DrsvmOptions};
use ssag::solver::{SmoothingMode, StoppingPolicy};

fn main() -> ssag::Result<()> {
    let data = separable_2d(1000, 0.1, 0)?;
    let p = DrsvmInstance::new(&data, DrsvmOptions::default(), None)?;
    let candidates = [1, 10, 100, 1000];
    // SFO caps keep the choice reproducible; time caps are closer to how the
    // method is used in practice
    let pilot = StoppingPolicy { max_sfo: Some(50_000), ..Default::default() };
    let m = select_batch_size(&p, 1.0, SmoothingMode::Diminishing, &candidates, &pilot, 3, 0)?;
    println!("candidates {candidates:?} -> batch size {m}");
    Ok(())
}
