//! Fixed-tree summation. The split points depend only on the length, so
//! results are bit-identical no matter how the work is scheduled.

use num::complex::Complex64;
use num::Zero;

const BLOCK: usize = 128;
const PAR_CHUNK: usize = 4096;

pub fn pairwise_sum(values: &[Complex64]) -> Complex64 {
    if values.len() <= BLOCK {
        let mut acc = Complex64::zero();
        for v in values {
            acc += v;
        }
        return acc;
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

pub fn pairwise_sum_f64(values: &[f64]) -> f64 {
    if values.len() <= BLOCK {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum_f64(&values[..mid]) + pairwise_sum_f64(&values[mid..])
}

/// Like [`par_indexed_sum`], also returning the maximum of a side value.
pub fn par_indexed_sum_max<E, F>(len: usize, term: F) -> Result<(Complex64, f64), E>
where
    E: Send,
    F: Fn(usize) -> Result<(Complex64, f64), E> + Sync,
{
    use rayon::prelude::*;
    let chunks = len.div_ceil(PAR_CHUNK);
    let partial: Vec<Result<(Complex64, f64), E>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * PAR_CHUNK;
            let hi = (lo + PAR_CHUNK).min(len);
            let mut buf = Vec::with_capacity(hi - lo);
            let mut top: f64 = 0.0;
            for i in lo..hi {
                let (v, m) = term(i)?;
                buf.push(v);
                top = top.max(m);
            }
            Ok((pairwise_sum(&buf), top))
        })
        .collect();
    let mut totals = Vec::with_capacity(chunks);
    let mut top: f64 = 0.0;
    for p in partial {
        let (v, m) = p?;
        totals.push(v);
        top = top.max(m);
    }
    Ok((pairwise_sum(&totals), top))
}

/// Sums `term(0) + … + term(len-1)` in parallel over fixed chunks, then
/// pairwise over the chunk totals. The first failing index (in index order)
/// wins, so errors are deterministic too.
pub fn par_indexed_sum<E, F>(len: usize, term: F) -> Result<Complex64, E>
where
    E: Send,
    F: Fn(usize) -> Result<Complex64, E> + Sync,
{
    use rayon::prelude::*;
    let chunks = len.div_ceil(PAR_CHUNK);
    let partial: Vec<Result<Complex64, E>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * PAR_CHUNK;
            let hi = (lo + PAR_CHUNK).min(len);
            let mut buf = Vec::with_capacity(hi - lo);
            for i in lo..hi {
                buf.push(term(i)?);
            }
            Ok(pairwise_sum(&buf))
        })
        .collect();
    let mut totals = Vec::with_capacity(chunks);
    for p in partial {
        totals.push(p?);
    }
    Ok(pairwise_sum(&totals))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_and_large_sums() {
        let v: Vec<Complex64> = (0..1000).map(|k| Complex64::new(k as f64, -(k as f64))).collect();
        assert_eq!(pairwise_sum(&v), Complex64::new(499500.0, -499500.0));
        assert_eq!(pairwise_sum(&[]), Complex64::zero());
        assert_eq!(pairwise_sum_f64(&[0.5; 300]), 150.0);
    }

    #[test]
    fn parallel_sum_is_thread_independent() {
        let f = |i: usize| -> Result<Complex64, ()> { Ok(Complex64::new((i as f64 * 0.37).sin(), (i as f64).sqrt().cos())) };
        let reference = par_indexed_sum(20_000, f).unwrap();
        for threads in [1, 2, 8] {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
            let got = pool.install(|| par_indexed_sum(20_000, f)).unwrap();
            assert_eq!(got.re.to_bits(), reference.re.to_bits());
            assert_eq!(got.im.to_bits(), reference.im.to_bits());
        }
    }

    #[test]
    fn first_error_wins() {
        let r: Result<Complex64, usize> = par_indexed_sum(50_000, |i| if i % 9000 == 8999 { Err(i) } else { Ok(Complex64::zero()) });
        assert_eq!(r, Err(8999));
    }
}
