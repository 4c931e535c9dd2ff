//! Order-preserving batch execution over independent work items.
//!
//! Every computation in this crate is a pure function of its inputs, so
//! batches (intertwiner configurations, theorem configurations, randomized
//! property samples) can run in any order as long as the collected output
//! keeps the input order. [`run_batch`] runs on a thread pool when the
//! `parallel` feature is enabled and falls back to [`run_batch_seq`]
//! otherwise; both produce identical results in identical order, which the
//! benchmark suite and the determinism tests rely on.

/// Applies `f` to every item in order on the current thread.
pub fn run_batch_seq<I, O, F>(items: &[I], f: F) -> Vec<O>
where
    F: Fn(&I) -> O,
{
    items.iter().map(f).collect()
}

/// Applies `f` to every item, in parallel when the `parallel` feature is
/// enabled, preserving the input order in the output.
#[cfg(feature = "parallel")]
pub fn run_batch<I, O, F>(items: &[I], f: F) -> Vec<O>
where
    I: Sync,
    O: Send,
    F: Fn(&I) -> O + Sync + Send,
{
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

/// Applies `f` to every item, in parallel when the `parallel` feature is
/// enabled, preserving the input order in the output.
#[cfg(not(feature = "parallel"))]
pub fn run_batch<I, O, F>(items: &[I], f: F) -> Vec<O>
where
    F: Fn(&I) -> O,
{
    run_batch_seq(items, f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cyclo::Cyc;

    #[test]
    fn parallel_and_sequential_agree_in_order() {
        let items: Vec<u64> = (0..200).collect();
        let f = |&k: &u64| {
            let mut acc = Cyc::one(12);
            for j in 0..=k % 7 {
                acc = acc.add(&Cyc::zeta(12, (k + j) as i64));
            }
            acc
        };
        let seq = run_batch_seq(&items, f);
        let par = run_batch(&items, f);
        assert_eq!(seq.len(), par.len());
        for (a, b) in seq.iter().zip(&par) {
            assert!(a.eq_value(b));
        }
    }
}
