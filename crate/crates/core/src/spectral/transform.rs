//! Two-dimensional FFT kernels shared by every field transform.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::Grid;

type PlanKey = (usize, bool);

fn plan(len: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    static CACHE: OnceLock<Mutex<(FftPlanner<f64>, HashMap<PlanKey, Arc<dyn Fft<f64>>>)>> =
        OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new((FftPlanner::new(), HashMap::new())));
    let mut guard = cache.lock().expect("fft plan cache poisoned");
    let (planner, plans) = &mut *guard;
    plans
        .entry((len, inverse))
        .or_insert_with(|| {
            if inverse {
                planner.plan_fft_inverse(len)
            } else {
                planner.plan_fft_forward(len)
            }
        })
        .clone()
}

/// Rows handed to one rayon task; keeps scratch allocations amortized.
const ROWS_PER_TASK: usize = 16;

fn batched(buf: &mut [Complex64], len: usize, inverse: bool) {
    let fft = plan(len, inverse);
    buf.par_chunks_mut(len * ROWS_PER_TASK).for_each(|chunk| {
        let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
        fft.process_with_scratch(chunk, &mut scratch);
    });
}

fn transpose(src: &[Complex64], dst: &mut [Complex64], rows: usize, cols: usize) {
    // src is rows × cols, dst becomes cols × rows
    dst.par_chunks_mut(rows).enumerate().for_each(|(c, out)| {
        for (r, v) in out.iter_mut().enumerate() {
            *v = src[r * cols + c];
        }
    });
}

/// Unnormalized 2D DFT in place over the grid layout (`x1` fastest).
pub(crate) fn fft2(buf: &mut [Complex64], grid: &Grid, inverse: bool) {
    let (n1, n2) = (grid.n1(), grid.n2());
    debug_assert_eq!(buf.len(), n1 * n2);
    batched(buf, n1, inverse);
    let mut tmp = vec![Complex64::default(); buf.len()];
    transpose(buf, &mut tmp, n2, n1);
    batched(&mut tmp, n2, inverse);
    transpose(&tmp, buf, n1, n2);
}

/// Unnormalized 1D DFT of a single buffer.
pub(crate) fn fft1(buf: &mut [Complex64], inverse: bool) {
    plan(buf.len(), inverse).process(buf);
}
