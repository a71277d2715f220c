//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature (default) [`Execution::Parallel`] dispatches to
//! rayon; without it both variants run sequentially. Every reduction goes
//! through [`ordered_sum`] so results do not depend on the thread count.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Execution {
    Parallel,
    Sequential,
}

/// Parallel when more than one worker thread is available.
impl Default for Execution {
    fn default() -> Self {
        #[cfg(feature = "parallel")]
        if rayon::current_num_threads() > 1 {
            return Execution::Parallel;
        }
        Execution::Sequential
    }
}

impl Execution {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }

    pub fn map<T, U, F>(self, items: &[T], f: F) -> Vec<U>
    where
        T: Sync,
        U: Send,
        F: Fn(&T) -> U + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            use rayon::prelude::*;
            return items.par_iter().map(f).collect();
        }
        items.iter().map(f).collect()
    }

    pub fn map_range<U, F>(self, n: usize, f: F) -> Vec<U>
    where
        U: Send,
        F: Fn(usize) -> U + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            use rayon::prelude::*;
            return (0..n).into_par_iter().map(f).collect();
        }
        (0..n).map(f).collect()
    }

    pub fn for_each_mut<T, F>(self, items: &mut [T], f: F)
    where
        T: Send,
        F: Fn(usize, &mut T) + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            use rayon::prelude::*;
            items
                .par_iter_mut()
                .with_min_len(256)
                .enumerate()
                .for_each(|(i, x)| f(i, x));
            return;
        }
        items.iter_mut().enumerate().for_each(|(i, x)| f(i, x));
    }

    /// Maps then sums with a fixed chunking, so the floating-point result is
    /// identical for both variants.
    pub fn sum_by<T, F>(self, items: &[T], f: F) -> f64
    where
        T: Sync,
        F: Fn(&T) -> f64 + Sync + Send,
    {
        let partial = self.map_range(items.len().div_ceil(CHUNK), |c| {
            let lo = c * CHUNK;
            let hi = (lo + CHUNK).min(items.len());
            ordered_sum(items[lo..hi].iter().map(&f))
        });
        ordered_sum(partial)
    }

    /// (min of the first component, max of the second). Exact for any
    /// schedule since min and max are associative.
    pub fn extrema_by<T, F>(self, items: &[T], f: F) -> (f64, f64)
    where
        T: Sync,
        F: Fn(&T) -> (f64, f64) + Sync + Send,
    {
        let merge = |a: (f64, f64), b: (f64, f64)| (a.0.min(b.0), a.1.max(b.1));
        let id = (f64::INFINITY, f64::NEG_INFINITY);
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            use rayon::prelude::*;
            return items.par_iter().with_min_len(256).map(&f).reduce(|| id, merge);
        }
        items.iter().map(f).fold(id, merge)
    }
}

const CHUNK: usize = 1024;

/// Neumaier-compensated sum in iteration order.
pub fn ordered_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let v = [1e16, 1.0, -1e16, 1.0];
        assert_eq!(ordered_sum(v), 2.0);
    }

    #[test]
    fn both_variants_agree_bitwise() {
        let xs: Vec<f64> = (0..5000).map(|i| ((i as f64) * 0.37).sin()).collect();
        let a = Execution::Parallel.sum_by(&xs, |x| x * x);
        let b = Execution::Sequential.sum_by(&xs, |x| x * x);
        assert_eq!(a.to_bits(), b.to_bits());
    }
}
