//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature (default) the `*_auto` entry points fan work
//! out over rayon; without it they run the sequential implementations. The
//! sequential versions stay public so the benchmark suite can compare both.
//! Results are collected in index order, so outputs are identical either way.

/// Map `0..n` to a vector, in parallel when enabled.
pub fn map_indexed_auto<T, F>(n: usize, f: F) -> Vec<T>
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
        map_indexed_seq(n, f)
    }
}

/// Sequential twin of [`map_indexed_auto`].
pub fn map_indexed_seq<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}

/// Chunk size for deterministic reductions over amplitude vectors. Partial
/// sums are always formed per fixed-size chunk and combined in chunk order,
/// so parallel and serial reductions agree bitwise.
pub const REDUCE_CHUNK: usize = 4096;

/// Deterministic sum of per-chunk partial results over a slice.
pub fn chunked_sum_auto<T, A, F>(data: &[T], zero: A, chunk_fn: F) -> A
where
    T: Sync,
    A: Send + Copy + std::ops::Add<Output = A>,
    F: Fn(&[T]) -> A + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        if data.len() > 4 * REDUCE_CHUNK {
            let partials: Vec<A> = data.par_chunks(REDUCE_CHUNK).map(&chunk_fn).collect();
            return partials.into_iter().fold(zero, |a, b| a + b);
        }
    }
    chunked_sum_seq(data, zero, chunk_fn)
}

/// Sequential twin of [`chunked_sum_auto`].
pub fn chunked_sum_seq<T, A, F>(data: &[T], zero: A, chunk_fn: F) -> A
where
    A: Copy + std::ops::Add<Output = A>,
    F: Fn(&[T]) -> A,
{
    data.chunks(REDUCE_CHUNK)
        .map(chunk_fn)
        .fold(zero, |a, b| a + b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn auto_matches_seq() {
        let par = map_indexed_auto(100, |i| i * i);
        let seq = map_indexed_seq(100, |i| i * i);
        assert_eq!(par, seq);

        let data: Vec<f64> = (0..20000).map(|i| (i as f64).sin()).collect();
        let sum = |c: &[f64]| c.iter().sum::<f64>();
        let a = chunked_sum_auto(&data, 0.0, sum);
        let b = chunked_sum_seq(&data, 0.0, sum);
        assert_eq!(a, b);
    }
}
