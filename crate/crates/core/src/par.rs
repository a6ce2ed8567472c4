//! Data-parallel helpers. With the `parallel` feature they dispatch to
//! rayon; without it the same closures run in order on the calling thread.
//! Results never depend on the worker count: every helper writes to
//! disjoint outputs and reductions are done sequentially afterwards.

use crate::error::Result;

/// Runs `f` with a pool of `workers` threads (0 = rayon default).
#[cfg(feature = "parallel")]
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> T {
    match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}

#[cfg(not(feature = "parallel"))]
pub fn with_workers<T: Send>(_workers: usize, f: impl FnOnce() -> T + Send) -> T {
    f()
}

/// Calls `f(k, chunk)` on consecutive `chunk_len`-sized chunks of `data`.
pub fn for_each_chunk<T, F>(data: &mut [T], chunk_len: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        data.par_chunks_mut(chunk_len).enumerate().for_each(|(k, c)| f(k, c));
    }
    #[cfg(not(feature = "parallel"))]
    {
        data.chunks_mut(chunk_len).enumerate().for_each(|(k, c)| f(k, c));
    }
}

/// Walks two slices in lock-step chunks: `f(k, &mut a[k*ca..], &mut b[k*cb..])`.
pub fn for_each_zip<A, B, F>(a: &mut [A], ca: usize, b: &mut [B], cb: usize, f: F)
where
    A: Send,
    B: Send,
    F: Fn(usize, &mut [A], &mut [B]) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        a.par_chunks_mut(ca).zip(b.par_chunks_mut(cb)).enumerate().for_each(|(k, (x, y))| f(k, x, y));
    }
    #[cfg(not(feature = "parallel"))]
    {
        a.chunks_mut(ca).zip(b.chunks_mut(cb)).enumerate().for_each(|(k, (x, y))| f(k, x, y));
    }
}

/// Three-slice version of [`for_each_zip`].
pub fn for_each_zip3<A, B, C, F>(a: &mut [A], ca: usize, b: &mut [B], cb: usize, c: &mut [C], cc: usize, f: F)
where
    A: Send,
    B: Send,
    C: Send,
    F: Fn(usize, &mut [A], &mut [B], &mut [C]) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        a.par_chunks_mut(ca)
            .zip(b.par_chunks_mut(cb))
            .zip(c.par_chunks_mut(cc))
            .enumerate()
            .for_each(|(k, ((x, y), z))| f(k, x, y, z));
    }
    #[cfg(not(feature = "parallel"))]
    {
        a.chunks_mut(ca)
            .zip(b.chunks_mut(cb))
            .zip(c.chunks_mut(cc))
            .enumerate()
            .for_each(|(k, ((x, y), z))| f(k, x, y, z));
    }
}

/// Fallible [`for_each_chunk`]; reports the error of the lowest failing chunk.
pub fn try_for_each_chunk<T, F>(data: &mut [T], chunk_len: usize, f: F) -> Result<()>
where
    T: Send,
    F: Fn(usize, &mut [T]) -> Result<()> + Sync + Send,
{
    let errs: Vec<Option<crate::error::Error>> = {
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            data.par_chunks_mut(chunk_len).enumerate().map(|(k, c)| f(k, c).err()).collect()
        }
        #[cfg(not(feature = "parallel"))]
        {
            data.chunks_mut(chunk_len).enumerate().map(|(k, c)| f(k, c).err()).collect()
        }
    };
    match errs.into_iter().flatten().next() {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

/// Collects `f(k)` for `k in 0..n`, in index order.
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

/// Sum of `f(k)` over `k in 0..n`, evaluated in parallel and added in index
/// order so the result is bit-identical for any worker count.
pub fn ordered_sum<F>(n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    map_range(n, f).into_iter().sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chunks_see_their_index() {
        let mut v = vec![0usize; 10];
        for_each_chunk(&mut v, 3, |k, c| c.iter_mut().for_each(|x| *x = k));
        assert_eq!(v, vec![0, 0, 0, 1, 1, 1, 2, 2, 2, 3]);
    }

    #[test]
    fn ordered_sum_is_worker_independent() {
        let f = |k: usize| 1.0 / (k as f64 + 1.0).powi(2);
        let one = with_workers(1, || ordered_sum(1000, f));
        let four = with_workers(4, || ordered_sum(1000, f));
        assert_eq!(one.to_bits(), four.to_bits());
    }

    #[test]
    fn first_error_is_reported() {
        let mut v = vec![0u8; 6];
        let r = try_for_each_chunk(&mut v, 2, |k, _| {
            if k >= 1 {
                Err(crate::error::Error::invalid(format!("chunk {k}")))
            } else {
                Ok(())
            }
        });
        assert_eq!(r.unwrap_err().to_string(), "invalid argument: chunk 1");
    }
}
