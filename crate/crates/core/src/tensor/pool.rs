//! Recycling pool for large f32 buffers.
//!
//! Training allocates and frees hundreds of megabytes of activation storage
//! per batch; routing those buffers through a size-keyed free list avoids
//! hammering the allocator. Buffers come back with arbitrary contents: every
//! consumer must fully overwrite its output (ops that scatter-accumulate
//! zero their target explicitly first).

use std::cell::RefCell;
use std::collections::HashMap;

/// Upper bound on bytes parked in the per-thread pool.
const MAX_POOL_BYTES: usize = 1 << 31; // 2 GiB

/// Only buffers at least this large are worth recycling.
const MIN_POOLED_LEN: usize = 1 << 12;

thread_local! {
    static POOL: RefCell<Pool> = RefCell::new(Pool::default());
}

#[derive(Default)]
struct Pool {
    by_len: HashMap<usize, Vec<Vec<f32>>>,
    bytes: usize,
}

/// Fetch a buffer of exactly `len` elements with unspecified contents.
pub fn take_uninit(len: usize) -> Vec<f32> {
    if len >= MIN_POOLED_LEN {
        let reused = POOL.with(|p| {
            let mut p = p.borrow_mut();
            let hit = p.by_len.get_mut(&len).and_then(Vec::pop);
            if let Some(v) = &hit {
                p.bytes -= v.capacity() * 4;
            }
            hit
        });
        if let Some(v) = reused {
            debug_assert_eq!(v.len(), len);
            return v;
        }
    }
    let mut v = Vec::with_capacity(len);
    // SAFETY: f32 is plain old data; any bit pattern is a valid value, and
    // the capacity was just reserved. Callers treat contents as garbage.
    unsafe { v.set_len(len) };
    v
}

/// Fetch a zero-filled buffer of `len` elements.
pub fn take_zeroed(len: usize) -> Vec<f32> {
    let mut v = take_uninit(len);
    v.fill(0.0);
    v
}

/// Return a buffer to the pool (or drop it if small / pool is full).
pub fn give(v: Vec<f32>) {
    let len = v.len();
    if len < MIN_POOLED_LEN || v.capacity() != len {
        return;
    }
    POOL.with(|p| {
        let mut p = p.borrow_mut();
        if p.bytes + len * 4 <= MAX_POOL_BYTES {
            p.bytes += len * 4;
            p.by_len.entry(len).or_default().push(v);
        }
    });
}
