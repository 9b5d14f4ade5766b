//! Thread-parallel permanent and grid evaluation on the rayon pool.
//!
//! Results are bit-identical to the sequential routines in `freehom-core`:
//! Gray-code segment boundaries are fixed by the matrix size and partial
//! sums are added in segment order, whatever the number of threads.

use freehom_core::dipfinder::{Grid, GridSpec};
use freehom_core::permanent::{self, Algorithm, ComplexMatrix, PartialSum, PermanentResult};
use freehom_core::Result;
use rayon::prelude::*;

pub fn par_permanent(m: &ComplexMatrix, algorithm: Algorithm) -> Result<PermanentResult> {
    if algorithm == Algorithm::Naive {
        return permanent::permanent_naive(m);
    }
    let segments = permanent::segments(algorithm, m.dim())?;
    let parts: Vec<PartialSum> = segments
        .into_par_iter()
        .map(|seg| permanent::partial_sum(m, algorithm, seg))
        .collect();
    // Fold in segment order so the result does not depend on the pool size.
    let total: PartialSum = parts.into_iter().sum();
    Ok(PermanentResult {
        value: permanent::finish(algorithm, m.dim(), total),
        algorithm,
        dim: m.dim(),
    })
}

/// Row-parallel version of `freehom_core::dipfinder::scan_grid`.
pub fn par_scan_grid(spec: &GridSpec) -> Result<Grid> {
    spec.validate()?;
    let r = spec.resolution;
    let mut values = vec![0.0; r * r];
    values
        .par_chunks_mut(r)
        .enumerate()
        .try_for_each(|(i, row)| spec.evaluate_row(i, row))?;
    Grid::from_values(spec.clone(), values)
}
