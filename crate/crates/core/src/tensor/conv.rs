//! Same-padded 1-D convolution kernels over `[B, T, C]` buffers.
//!
//! Forward and both backward passes are expressed as matrix products against
//! an im2col expansion, built per batch chunk so the working set stays small.
//! Chunk boundaries are a function of the problem shape only, and partial
//! weight-gradient reductions are summed in chunk order, so all three passes
//! are bit-deterministic regardless of thread count.

use super::{gemm, pool};
use rayon::prelude::*;

/// Target rows (batch × time) per work chunk.
const CHUNK_ROWS: usize = 4096;

fn samples_per_chunk(t: usize) -> usize {
    (CHUNK_ROWS / t.max(1)).max(1)
}

/// Expand `x[b0..b0+nb, :, :]` into im2col layout `[nb·t, k·cin]` with zero
/// padding at sequence edges.
fn im2col(x: &[f32], nb: usize, t: usize, cin: usize, k: usize, col: &mut [f32]) {
    let pad = k / 2;
    debug_assert_eq!(x.len(), nb * t * cin);
    debug_assert_eq!(col.len(), nb * t * k * cin);
    for b in 0..nb {
        let xb = &x[b * t * cin..(b + 1) * t * cin];
        for tt in 0..t {
            let row = &mut col[(b * t + tt) * k * cin..(b * t + tt + 1) * k * cin];
            for kk in 0..k {
                let src = tt as isize + kk as isize - pad as isize;
                let dst = &mut row[kk * cin..(kk + 1) * cin];
                if src >= 0 && (src as usize) < t {
                    dst.copy_from_slice(&xb[src as usize * cin..(src as usize + 1) * cin]);
                } else {
                    dst.fill(0.0);
                }
            }
        }
    }
}

/// out[b,t,co] = Σ_{k,ci} x[b, t+k-pad, ci] · w[k,ci,co] + bias[co]
pub fn forward(x: &[f32], bsz: usize, t: usize, cin: usize, w: &[f32], k: usize, cout: usize, bias: &[f32], out: &mut [f32]) {
    let chunk_b = samples_per_chunk(t);
    out.par_chunks_mut(chunk_b * t * cout)
        .zip(x.par_chunks(chunk_b * t * cin))
        .for_each(|(out_chunk, x_chunk)| {
            let nb = x_chunk.len() / (t * cin);
            let rows = nb * t;
            let mut col = pool::take_uninit(rows * k * cin);
            im2col(x_chunk, nb, t, cin, k, &mut col);
            gemm::sgemm(rows, k * cin, cout, &col, w, out_chunk, 0.0);
            pool::give(col);
            for row in out_chunk.chunks_exact_mut(cout) {
                for (o, b) in row.iter_mut().zip(bias) {
                    *o += b;
                }
            }
        });
    let _ = bsz;
}

/// Gradient with respect to the input signal.
pub fn backward_x(g: &[f32], bsz: usize, t: usize, cin: usize, w: &[f32], k: usize, cout: usize, dx: &mut [f32]) {
    let pad = k / 2;
    let chunk_b = samples_per_chunk(t);
    dx.par_chunks_mut(chunk_b * t * cin)
        .zip(g.par_chunks(chunk_b * t * cout))
        .for_each(|(dx_chunk, g_chunk)| {
            let nb = dx_chunk.len() / (t * cin);
            let rows = nb * t;
            let mut dcol = pool::take_uninit(rows * k * cin);
            // dcol = g · wᵀ, with w stored [k·cin, cout].
            gemm::sgemm_bt(rows, cout, k * cin, g_chunk, w, &mut dcol, 0.0);
            dx_chunk.fill(0.0);
            for b in 0..nb {
                let dxb = &mut dx_chunk[b * t * cin..(b + 1) * t * cin];
                for tt in 0..t {
                    let row = &dcol[(b * t + tt) * k * cin..(b * t + tt + 1) * k * cin];
                    for kk in 0..k {
                        let src = tt as isize + kk as isize - pad as isize;
                        if src >= 0 && (src as usize) < t {
                            let dst = &mut dxb[src as usize * cin..(src as usize + 1) * cin];
                            for (d, s) in dst.iter_mut().zip(&row[kk * cin..(kk + 1) * cin]) {
                                *d += s;
                            }
                        }
                    }
                }
            }
            pool::give(dcol);
        });
    let _ = bsz;
}

/// Gradients with respect to kernel and bias. `dw`/`db` are overwritten.
pub fn backward_w(
    x: &[f32],
    g: &[f32],
    bsz: usize,
    t: usize,
    cin: usize,
    k: usize,
    cout: usize,
    dw: &mut [f32],
    db: &mut [f32],
) {
    let chunk_b = samples_per_chunk(t);
    // Per-chunk partial gradients, reduced afterwards in a fixed order.
    let partials: Vec<(Vec<f32>, Vec<f32>)> = x
        .par_chunks(chunk_b * t * cin)
        .zip(g.par_chunks(chunk_b * t * cout))
        .map(|(x_chunk, g_chunk)| {
            let nb = x_chunk.len() / (t * cin);
            let rows = nb * t;
            let mut col = pool::take_uninit(rows * k * cin);
            im2col(x_chunk, nb, t, cin, k, &mut col);
            let mut pdw = vec![0.0f32; k * cin * cout];
            // pdw = colᵀ · g, with col stored [rows, k·cin].
            gemm::sgemm_at(k * cin, rows, cout, &col, g_chunk, &mut pdw, 0.0);
            pool::give(col);
            let mut pdb = vec![0.0f32; cout];
            for row in g_chunk.chunks_exact(cout) {
                for (d, v) in pdb.iter_mut().zip(row) {
                    *d += v;
                }
            }
            (pdw, pdb)
        })
        .collect();
    dw.fill(0.0);
    db.fill(0.0);
    for (pdw, pdb) in partials {
        for (d, v) in dw.iter_mut().zip(&pdw) {
            *d += v;
        }
        for (d, v) in db.iter_mut().zip(&pdb) {
            *d += v;
        }
    }
    let _ = bsz;
}
