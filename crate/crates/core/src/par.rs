//! Data-parallel loops with a sequential fallback.
//!
//! With the `parallel` feature the loops run on rayon; without it every
//! [`Parallelism`] setting runs sequentially. Output order is always the
//! index order, so parallel and sequential runs produce identical results.

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Parallelism {
    Sequential,
    /// Worker count; `0` uses rayon's global pool.
    Threads(usize),
    #[default]
    Auto,
}

impl Parallelism {
    pub fn is_sequential(self) -> bool {
        matches!(self, Parallelism::Sequential | Parallelism::Threads(1)) || !cfg!(feature = "parallel")
    }
}

/// `(0..n).map(f)` evaluated per `par`, with one scratch value per worker.
pub fn map_with_scratch<S, T, I, F>(n: usize, par: Parallelism, init: I, f: F) -> Vec<T>
where
    T: Send,
    I: Fn() -> S + Sync + Send,
    F: Fn(&mut S, usize) -> T + Sync + Send,
{
    if par.is_sequential() {
        let mut s = init();
        return (0..n).map(|i| f(&mut s, i)).collect();
    }
    parallel::map_with_scratch(n, par, init, f)
}

pub fn map<T, F>(n: usize, par: Parallelism, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    map_with_scratch(n, par, || (), |_, i| f(i))
}

#[cfg(feature = "parallel")]
mod parallel {
    use super::Parallelism;
    use rayon::prelude::*;

    pub fn map_with_scratch<S, T, I, F>(n: usize, par: Parallelism, init: I, f: F) -> Vec<T>
    where
        T: Send,
        I: Fn() -> S + Sync + Send,
        F: Fn(&mut S, usize) -> T + Sync + Send,
    {
        let run = || {
            (0..n)
                .into_par_iter()
                .map_init(&init, |s, i| f(s, i))
                .collect()
        };
        match par {
            Parallelism::Threads(t) if t > 0 => rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .expect("thread pool")
                .install(run),
            _ => run(),
        }
    }
}

#[cfg(not(feature = "parallel"))]
mod parallel {
    use super::Parallelism;

    pub fn map_with_scratch<S, T, I, F>(n: usize, _par: Parallelism, init: I, f: F) -> Vec<T>
    where
        I: Fn() -> S,
        F: Fn(&mut S, usize) -> T,
    {
        let mut s = init();
        (0..n).map(|i| f(&mut s, i)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_matches_sequential() {
        let seq = map(1000, Parallelism::Sequential, |i| i * i);
        let par = map(1000, Parallelism::Threads(3), |i| i * i);
        assert_eq!(seq, par);
        assert_eq!(map(0, Parallelism::Auto, |i| i), Vec::<usize>::new());
    }
}
