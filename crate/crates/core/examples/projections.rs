//! Euclidean projections onto the supported feasible sets.

use nalgebra::DMatrix;
use ssag::linalg::svec;
use ssag::projection::{project_psd, project_simplex, project_soc, FeasibleSet};

fn main() -> ssag::Result<()> {
    println!("simplex  (1.5, 0.5)      -> {:?}", project_simplex(&[1.5, 0.5])?);
    println!("soc      ((1, 0), 0)     -> {:?}", project_soc(&[1.0, 0.0], 0.0));
    let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, -1.0]);
    println!("psd      {m:.3}-> {:.3}", project_psd(&m)?);

    let set = FeasibleSet::Product(vec![
        FeasibleSet::Simplex(3),
        FeasibleSet::SecondOrderCone(3),
        FeasibleSet::PsdCone(2),
        FeasibleSet::Ball { center: vec![0.0, 0.0], radius: 1.0 },
    ]);
    let mut v = vec![0.9, 0.9, -0.3, 3.0, 4.0, 1.0];
    v.extend(svec(&m));
    v.extend([2.0, 2.0]);
    println!("violation before: {:.3}", set.violation(&v));
    set.project_in_place(&mut v)?;
    println!("projected: {v:.4?}");
    println!("violation after: {:.1e}", set.violation(&v));
    Ok(())
}
