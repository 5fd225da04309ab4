//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature (default) these dispatch to rayon; without it
//! they run the same closures in order. Every helper produces identical
//! output in both modes: work is split into fixed-size pieces that do not
//! depend on the thread count, and results are combined in index order.

use ndarray::{concatenate, s, Array2, ArrayView2, Axis};

/// Row count above which matrix products are split across threads.
pub const MATMUL_PAR_ROWS: usize = 128;

/// Rows per parallel matmul piece.
const MATMUL_CHUNK: usize = 64;

/// `(0..n).map(f).collect()`, in parallel when enabled.
pub fn map_range<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Sequential reference for [`map_range`].
pub fn map_range_seq<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}

/// Matrix product `a · b`, row-chunked across threads for large `a`.
pub fn matmul(a: ArrayView2<'_, f64>, b: ArrayView2<'_, f64>) -> Array2<f64> {
    if a.nrows() < MATMUL_PAR_ROWS || !cfg!(feature = "parallel") {
        return a.dot(&b);
    }
    let chunks = a.nrows().div_ceil(MATMUL_CHUNK);
    let parts = map_range(chunks, |c| {
        let lo = c * MATMUL_CHUNK;
        let hi = (lo + MATMUL_CHUNK).min(a.nrows());
        a.slice(s![lo..hi, ..]).dot(&b)
    });
    let views: Vec<_> = parts.iter().map(|p| p.view()).collect();
    concatenate(Axis(0), &views).expect("row chunks share column count")
}

/// Sequential reference for [`matmul`].
pub fn matmul_seq(a: ArrayView2<'_, f64>, b: ArrayView2<'_, f64>) -> Array2<f64> {
    a.dot(&b)
}

/// Run `f` on each item of a mutable slice.
pub fn for_each_mut<T, F>(items: &mut [T], f: F)
where
    T: Send,
    F: Fn(usize, &mut T) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        items.par_iter_mut().enumerate().for_each(|(i, t)| f(i, t));
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter_mut().enumerate().for_each(|(i, t)| f(i, t));
    }
}
