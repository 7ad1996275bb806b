//! Thin deterministic wrapper over the `matrixmultiply` sgemm kernel.
//!
//! All matrix products in the crate funnel through here. Work is split over
//! row chunks whose boundaries depend only on the problem size, never on the
//! number of worker threads, so results are bit-identical across thread
//! counts and across runs. Within a chunk, `matrixmultiply` uses a fixed
//! blocking scheme, which keeps the per-element reduction order stable.

use rayon::prelude::*;

/// Rows per parallel chunk. Multiple of the micro-kernel tile, small enough
/// that a chunk's packed panels stay cache-resident.
const ROW_CHUNK: usize = 2048;

/// `c[m,n] = a[m,k] · b[k,n] + beta · c`, all row-major and contiguous.
pub fn sgemm(m: usize, k: usize, n: usize, a: &[f32], b: &[f32], c: &mut [f32], beta: f32) {
    debug_assert_eq!(a.len(), m * k);
    debug_assert_eq!(b.len(), k * n);
    debug_assert_eq!(c.len(), m * n);
    if m == 0 || n == 0 {
        return;
    }
    if m > ROW_CHUNK {
        // Disjoint output chunks; each pairs with the matching rows of `a`.
        c.par_chunks_mut(ROW_CHUNK * n)
            .zip(a.par_chunks(ROW_CHUNK * k))
            .for_each(|(c_chunk, a_chunk)| {
                let rows = c_chunk.len() / n;
                unsafe { raw_sgemm(rows, k, n, 1.0, a_chunk, k as isize, 1, b, n as isize, 1, beta, c_chunk, n as isize, 1) };
            });
    } else {
        unsafe { raw_sgemm(m, k, n, 1.0, a, k as isize, 1, b, n as isize, 1, beta, c, n as isize, 1) };
    }
}

/// `c[m,n] = aᵀ[m,k] · b[k,n] + beta · c` where `a` is stored row-major as
/// `[k, m]`. Used for weight gradients without materializing transposes.
pub fn sgemm_at(m: usize, k: usize, n: usize, a: &[f32], b: &[f32], c: &mut [f32], beta: f32) {
    debug_assert_eq!(a.len(), k * m);
    debug_assert_eq!(b.len(), k * n);
    debug_assert_eq!(c.len(), m * n);
    if m == 0 || n == 0 {
        return;
    }
    // Row i of the logical A is column i of the stored buffer: stride 1 over
    // k-steps is `m`, stride over rows is 1.
    unsafe { raw_sgemm(m, k, n, 1.0, a, 1, m as isize, b, n as isize, 1, beta, c, n as isize, 1) };
}

/// `c[m,n] = a[m,k] · bᵀ[k,n] + beta · c` where `b` is stored row-major as
/// `[n, k]`. Used for input gradients without materializing transposes.
pub fn sgemm_bt(m: usize, k: usize, n: usize, a: &[f32], b: &[f32], c: &mut [f32], beta: f32) {
    debug_assert_eq!(a.len(), m * k);
    debug_assert_eq!(b.len(), n * k);
    debug_assert_eq!(c.len(), m * n);
    if m == 0 || n == 0 {
        return;
    }
    if m > ROW_CHUNK {
        c.par_chunks_mut(ROW_CHUNK * n)
            .zip(a.par_chunks(ROW_CHUNK * k))
            .for_each(|(c_chunk, a_chunk)| {
                let rows = c_chunk.len() / n;
                unsafe { raw_sgemm(rows, k, n, 1.0, a_chunk, k as isize, 1, b, 1, k as isize, beta, c_chunk, n as isize, 1) };
            });
    } else {
        unsafe { raw_sgemm(m, k, n, 1.0, a, k as isize, 1, b, 1, k as isize, beta, c, n as isize, 1) };
    }
}

#[allow(clippy::too_many_arguments)]
unsafe fn raw_sgemm(
    m: usize,
    k: usize,
    n: usize,
    alpha: f32,
    a: &[f32],
    rsa: isize,
    csa: isize,
    b: &[f32],
    rsb: isize,
    csb: isize,
    beta: f32,
    c: &mut [f32],
    rsc: isize,
    csc: isize,
) {
    matrixmultiply::sgemm(
        m,
        k,
        n,
        alpha,
        a.as_ptr(),
        rsa,
        csa,
        b.as_ptr(),
        rsb,
        csb,
        beta,
        c.as_mut_ptr(),
        rsc,
        csc,
    );
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive(m: usize, k: usize, n: usize, a: &[f32], b: &[f32]) -> Vec<f32> {
        let mut c = vec![0.0f32; m * n];
        for i in 0..m {
            for j in 0..n {
                let mut acc = 0.0f32;
                for p in 0..k {
                    acc += a[i * k + p] * b[p * n + j];
                }
                c[i * n + j] = acc;
            }
        }
        c
    }

    fn fill(len: usize, seed: u32) -> Vec<f32> {
        // Small deterministic pseudo-random values.
        let mut state = seed;
        (0..len)
            .map(|_| {
                state = state.wrapping_mul(1664525).wrapping_add(1013904223);
                ((state >> 8) as f32 / (1u32 << 24) as f32) - 0.5
            })
            .collect()
    }

    fn max_abs_diff(a: &[f32], b: &[f32]) -> f32 {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f32::max)
    }

    #[test]
    fn matches_naive_product() {
        for &(m, k, n) in &[(1usize, 1usize, 1usize), (3, 5, 4), (17, 9, 13), (64, 35, 100)] {
            let a = fill(m * k, 1);
            let b = fill(k * n, 2);
            let want = naive(m, k, n, &a, &b);
            let mut c = vec![0.0f32; m * n];
            sgemm(m, k, n, &a, &b, &mut c, 0.0);
            assert!(max_abs_diff(&c, &want) < 1e-4, "m={m} k={k} n={n}");
        }
    }

    #[test]
    fn beta_accumulates() {
        let (m, k, n) = (4, 3, 2);
        let a = fill(m * k, 3);
        let b = fill(k * n, 4);
        let mut c = vec![1.0f32; m * n];
        let mut want = naive(m, k, n, &a, &b);
        for w in &mut want {
            *w += 1.0;
        }
        sgemm(m, k, n, &a, &b, &mut c, 1.0);
        assert!(max_abs_diff(&c, &want) < 1e-5);
    }

    #[test]
    fn transposed_variants_match_naive() {
        let (m, k, n) = (7, 6, 5);
        let a = fill(m * k, 5); // logical [m,k]
        let b = fill(k * n, 6); // logical [k,n]
        let want = naive(m, k, n, &a, &b);

        // a stored transposed as [k, m].
        let mut a_t = vec![0.0f32; m * k];
        for i in 0..m {
            for p in 0..k {
                a_t[p * m + i] = a[i * k + p];
            }
        }
        let mut c = vec![0.0f32; m * n];
        sgemm_at(m, k, n, &a_t, &b, &mut c, 0.0);
        assert!(max_abs_diff(&c, &want) < 1e-5);

        // b stored transposed as [n, k].
        let mut b_t = vec![0.0f32; k * n];
        for p in 0..k {
            for j in 0..n {
                b_t[j * k + p] = b[p * n + j];
            }
        }
        let mut c = vec![0.0f32; m * n];
        sgemm_bt(m, k, n, &a, &b_t, &mut c, 0.0);
        assert!(max_abs_diff(&c, &want) < 1e-5);
    }

    #[test]
    fn chunked_path_is_deterministic_and_correct() {
        let (m, k, n) = (ROW_CHUNK * 2 + 100, 16, 8);
        let a = fill(m * k, 7);
        let b = fill(k * n, 8);
        let want = naive(m, k, n, &a, &b);
        let mut c1 = vec![0.0f32; m * n];
        let mut c2 = vec![0.0f32; m * n];
        sgemm(m, k, n, &a, &b, &mut c1, 0.0);
        sgemm(m, k, n, &a, &b, &mut c2, 0.0);
        assert_eq!(c1, c2, "repeated runs must be bit-identical");
        assert!(max_abs_diff(&c1, &want) < 1e-3);
    }
}
