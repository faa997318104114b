//! Ensemble aggregation of trajectory records.
//!
//! Sums are kept exactly (as a list of non-overlapping partials) and rounded
//! once on finalization, so merging accumulators in any grouping or order
//! yields bit-identical series.

use crate::engine::TrajectoryRecord;
use crate::error::StatsError;

/// Exact floating-point sum using Shewchuk's non-overlapping partials,
/// rounded correctly on read-out.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExactSum {
    partials: Vec<f64>,
}

impl ExactSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, mut x: f64) {
        let mut i = 0;
        for k in 0..self.partials.len() {
            let mut y = self.partials[k];
            if x.abs() < y.abs() {
                std::mem::swap(&mut x, &mut y);
            }
            let hi = x + y;
            let lo = y - (hi - x);
            if lo != 0.0 {
                self.partials[i] = lo;
                i += 1;
            }
            x = hi;
        }
        self.partials.truncate(i);
        self.partials.push(x);
    }

    pub fn merge(&mut self, other: &ExactSum) {
        for &p in &other.partials {
            self.add(p);
        }
    }

    /// Correctly rounded value of the exact sum.
    pub fn value(&self) -> f64 {
        let p = &self.partials;
        let mut n = p.len();
        if n == 0 {
            return 0.0;
        }
        n -= 1;
        let mut hi = p[n];
        let mut lo = 0.0;
        while n > 0 {
            let x = hi;
            n -= 1;
            let y = p[n];
            hi = x + y;
            let yr = hi - x;
            lo = y - yr;
            if lo != 0.0 {
                break;
            }
        }
        // Round-half-even correction when the remaining partials push the
        // discarded half-ulp over the midpoint.
        if n > 0 && ((lo < 0.0 && p[n - 1] < 0.0) || (lo > 0.0 && p[n - 1] > 0.0)) {
            let y = lo * 2.0;
            let x = hi + y;
            let yr = x - hi;
            if y == yr {
                hi = x;
            }
        }
        hi
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Moments {
    sum: ExactSum,
    sum_sq: ExactSum,
}

impl Moments {
    fn new() -> Self {
        Self {
            sum: ExactSum::new(),
            sum_sq: ExactSum::new(),
        }
    }

    fn add(&mut self, x: f64) {
        self.sum.add(x);
        self.sum_sq.add(x * x);
    }

    fn merge(&mut self, other: &Moments) {
        self.sum.merge(&other.sum);
        self.sum_sq.merge(&other.sum_sq);
    }

    /// `(mean, stderr)`; stderr is 0 for a single sample.
    fn finish(&self, n: usize) -> (f64, f64) {
        let nf = n as f64;
        let sum = self.sum.value();
        let mean = sum / nf;
        if n < 2 {
            return (mean, 0.0);
        }
        let var = ((self.sum_sq.value() - sum * mean) / (nf - 1.0)).max(0.0);
        (mean, (var / nf).sqrt())
    }
}

/// Running per-grid-point sums and jump-count histograms.
#[derive(Debug, Clone, PartialEq)]
pub struct Accumulator {
    times: Vec<f64>,
    n_max: usize,
    n: usize,
    n_paths: usize,
    real: Vec<Moments>,
    imag: Vec<Moments>,
    /// `jump_counts[i][k]`: propagated elements with exactly `k` jumps at grid point `i`.
    jump_counts: Vec<Vec<u64>>,
}

impl Accumulator {
    pub fn new(times: Vec<f64>, n_max: usize) -> Self {
        let len = times.len();
        Self {
            times,
            n_max,
            n: 0,
            n_paths: 0,
            real: vec![Moments::new(); len],
            imag: vec![Moments::new(); len],
            jump_counts: vec![vec![0; n_max + 1]; len],
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Trajectories absorbed.
    pub fn count(&self) -> usize {
        self.n
    }

    /// Propagated matrix elements absorbed (several per trajectory).
    pub fn path_count(&self) -> usize {
        self.n_paths
    }

    pub fn absorb(&mut self, record: &TrajectoryRecord) -> Result<(), StatsError> {
        let len = self.len();
        let mismatch = |found: usize| StatsError::GridMismatch {
            expected: len,
            found,
        };
        if record.contributions.len() != len || record.imaginary.len() != len {
            return Err(mismatch(record.contributions.len()));
        }
        for path in &record.paths {
            if path.jump_counts.len() != len {
                return Err(mismatch(path.jump_counts.len()));
            }
            if path.final_jump_count > self.n_max {
                return Err(StatsError::JumpCapMismatch {
                    expected: self.n_max,
                    found: path.final_jump_count,
                });
            }
        }
        for i in 0..len {
            self.real[i].add(record.contributions[i]);
            self.imag[i].add(record.imaginary[i]);
            for path in &record.paths {
                self.jump_counts[i][path.jump_counts[i]] += 1;
            }
        }
        self.n += 1;
        self.n_paths += record.paths.len();
        Ok(())
    }

    pub fn merge(&mut self, other: &Accumulator) -> Result<(), StatsError> {
        if other.len() != self.len() {
            return Err(StatsError::GridMismatch {
                expected: self.len(),
                found: other.len(),
            });
        }
        if other.n_max != self.n_max {
            return Err(StatsError::JumpCapMismatch {
                expected: self.n_max,
                found: other.n_max,
            });
        }
        for i in 0..self.len() {
            self.real[i].merge(&other.real[i]);
            self.imag[i].merge(&other.imag[i]);
            for (a, b) in self.jump_counts[i].iter_mut().zip(&other.jump_counts[i]) {
                *a += b;
            }
        }
        self.n += other.n;
        self.n_paths += other.n_paths;
        Ok(())
    }

    pub fn finalize(&self) -> Result<EstimatorSeries, StatsError> {
        if self.n == 0 {
            return Err(StatsError::Empty);
        }
        let len = self.len();
        let mut series = EstimatorSeries {
            times: self.times.clone(),
            mean: Vec::with_capacity(len),
            stderr: Vec::with_capacity(len),
            imag_mean: Vec::with_capacity(len),
            imag_stderr: Vec::with_capacity(len),
            fractions: vec![Vec::with_capacity(len); self.n_max + 1],
            n_samples: self.n,
            n_paths: self.n_paths,
            meta: RunMetadata::default(),
        };
        let paths = self.n_paths as f64;
        for i in 0..len {
            let (m, s) = self.real[i].finish(self.n);
            series.mean.push(m);
            series.stderr.push(s);
            let (m, s) = self.imag[i].finish(self.n);
            series.imag_mean.push(m);
            series.imag_stderr.push(s);
            for (k, count) in self.jump_counts[i].iter().enumerate() {
                series.fractions[k].push(*count as f64 / paths);
            }
        }
        Ok(series)
    }
}

/// Descriptive information attached to a finished run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunMetadata {
    /// `key = value` echo of the run configuration.
    pub config: Vec<(String, String)>,
    pub seed: u64,
    pub aborted: usize,
    pub wall_time_s: f64,
}

/// Ensemble estimate of `⟨σ_z(t)⟩` on the recording grid.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorSeries {
    pub times: Vec<f64>,
    pub mean: Vec<f64>,
    /// Standard error of the mean, `sd / √n` with the unbiased variance.
    pub stderr: Vec<f64>,
    /// Ensemble mean of the discarded imaginary part; should vanish statistically.
    pub imag_mean: Vec<f64>,
    pub imag_stderr: Vec<f64>,
    /// `fractions[k][i]`: share of propagated elements with exactly `k` jumps.
    pub fractions: Vec<Vec<f64>>,
    pub n_samples: usize,
    pub n_paths: usize,
    pub meta: RunMetadata,
}

impl EstimatorSeries {
    /// Stderr is reported as 0 when only one sample was absorbed.
    pub fn single_sample(&self) -> bool {
        self.n_samples < 2
    }

    /// Largest `|imag_mean| / imag_stderr` over the grid (0 where stderr vanishes).
    pub fn max_imag_z(&self) -> f64 {
        self.imag_mean
            .iter()
            .zip(&self.imag_stderr)
            .map(|(m, s)| if *s > 0.0 { (m / s).abs() } else { 0.0 })
            .fold(0.0, f64::max)
    }

    /// First grid time at which the stderr exceeds `threshold`.
    pub fn first_stderr_exceedance(&self, threshold: f64) -> Option<f64> {
        self.times
            .iter()
            .zip(&self.stderr)
            .find(|(_, s)| **s > threshold)
            .map(|(t, _)| *t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::PathRecord;
    use crate::trajectory::PairState;
    use proptest::prelude::*;

    fn record(values: &[f64], jumps: &[usize]) -> TrajectoryRecord {
        TrajectoryRecord {
            contributions: values.to_vec(),
            imaginary: vec![0.0; values.len()],
            paths: vec![PathRecord {
                initial: PairState::ALL[0],
                jumps: Vec::new(),
                jump_counts: jumps.to_vec(),
                final_jump_count: *jumps.last().unwrap(),
            }],
        }
    }

    fn grid(n: usize) -> Vec<f64> {
        (0..n).map(|i| i as f64 * 0.1).collect()
    }

    #[test]
    fn exact_sum_cancellation() {
        let mut s = ExactSum::new();
        for x in [1e100, 1.0, -1e100, 1e-20] {
            s.add(x);
        }
        assert_eq!(s.value(), 1.0 + 1e-20);
        let mut t = ExactSum::new();
        for _ in 0..10 {
            t.add(0.1);
        }
        assert_eq!(t.value(), 1.0);
        assert_eq!(ExactSum::new().value(), 0.0);
    }

    #[test]
    fn single_record() {
        let mut acc = Accumulator::new(grid(3), 2);
        acc.absorb(&record(&[1.0, 0.5, -0.25], &[0, 1, 1])).unwrap();
        let s = acc.finalize().unwrap();
        assert_eq!(s.mean, vec![1.0, 0.5, -0.25]);
        assert_eq!(s.stderr, vec![0.0; 3]);
        assert!(s.single_sample());
        assert_eq!(s.fractions[0], vec![1.0, 0.0, 0.0]);
        assert_eq!(s.fractions[1], vec![0.0, 1.0, 1.0]);
    }

    #[test]
    fn duplicate_record_has_zero_spread() {
        let mut acc = Accumulator::new(grid(3), 2);
        let r = record(&[0.3, -1.7, 2.9], &[0, 0, 2]);
        acc.absorb(&r).unwrap();
        acc.absorb(&r).unwrap();
        assert_eq!(acc.finalize().unwrap().stderr, vec![0.0; 3]);
    }

    #[test]
    fn two_point_stderr() {
        let mut acc = Accumulator::new(grid(1), 0);
        acc.absorb(&record(&[0.0], &[0])).unwrap();
        acc.absorb(&record(&[2.0], &[0])).unwrap();
        let s = acc.finalize().unwrap();
        assert_eq!(s.mean, vec![1.0]);
        assert_eq!(s.stderr, vec![1.0]);
    }

    #[test]
    fn adiabatic_ensemble_fractions() {
        let mut acc = Accumulator::new(grid(4), 2);
        for v in [0.1, 0.2, 0.3] {
            acc.absorb(&record(&[v; 4], &[0; 4])).unwrap();
        }
        let s = acc.finalize().unwrap();
        assert_eq!(s.fractions[0], vec![1.0; 4]);
        assert_eq!(s.fractions[2], vec![0.0; 4]);
    }

    #[test]
    fn errors() {
        let mut acc = Accumulator::new(grid(3), 2);
        assert_eq!(acc.finalize(), Err(StatsError::Empty));
        assert!(matches!(
            acc.absorb(&record(&[1.0], &[0])),
            Err(StatsError::GridMismatch { .. })
        ));
        assert!(matches!(
            acc.absorb(&record(&[1.0; 3], &[0, 1, 3])),
            Err(StatsError::JumpCapMismatch { .. })
        ));
        let other = Accumulator::new(grid(2), 2);
        assert!(acc.merge(&other).is_err());
    }

    fn arb_records() -> impl Strategy<Value = Vec<(Vec<f64>, Vec<usize>)>> {
        prop::collection::vec(
            (
                prop::collection::vec(-1e6f64..1e6, 5),
                prop::collection::vec(0usize..3, 5),
            ),
            1..40,
        )
    }

    proptest! {
        #[test]
        fn partition_invariance(records in arb_records(), split in 0usize..40) {
            let recs: Vec<_> = records
                .iter()
                .map(|(v, j)| {
                    let mut j = j.clone();
                    j.sort();
                    record(v, &j)
                })
                .collect();
            let split = split.min(recs.len());
            let mut all = Accumulator::new(grid(5), 2);
            recs.iter().for_each(|r| all.absorb(r).unwrap());

            let mut a = Accumulator::new(grid(5), 2);
            let mut b = Accumulator::new(grid(5), 2);
            recs[..split].iter().for_each(|r| a.absorb(r).unwrap());
            recs[split..].iter().rev().for_each(|r| b.absorb(r).unwrap());
            let mut ab = a.clone();
            ab.merge(&b).unwrap();
            let mut ba = b.clone();
            ba.merge(&a).unwrap();

            let reference = all.finalize().unwrap();
            prop_assert_eq!(&ab.finalize().unwrap(), &reference);
            prop_assert_eq!(&ba.finalize().unwrap(), &reference);
            for i in 0..5 {
                let total: f64 = reference.fractions.iter().map(|f| f[i]).sum();
                prop_assert!((total - 1.0).abs() < 1e-12);
                prop_assert!(reference.stderr[i] >= 0.0);
            }
        }
    }
}
