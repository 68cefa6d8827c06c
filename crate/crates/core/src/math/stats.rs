use crate::{Error, Result};

/// A bag of real samples with a fixed histogram resolution.
#[derive(Debug, Clone)]
pub struct EmpiricalDistribution {
    sorted: Vec<f64>,
    bin_count: usize,
}

/// One histogram bin: `[lo, hi)` with its probability mass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bin {
    pub lo: f64,
    pub hi: f64,
    pub mass: f64,
}

impl EmpiricalDistribution {
    pub fn new(mut samples: Vec<f64>, bin_count: usize) -> Result<Self> {
        if bin_count == 0 {
            return Err(Error::domain("histogram needs at least one bin"));
        }
        if samples.iter().any(|x| !x.is_finite()) {
            return Err(Error::domain("empirical samples must be finite"));
        }
        samples.sort_by(f64::total_cmp);
        Ok(EmpiricalDistribution {
            sorted: samples,
            bin_count,
        })
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn samples(&self) -> &[f64] {
        &self.sorted
    }

    pub fn bin_count(&self) -> usize {
        self.bin_count
    }

    pub fn mean(&self) -> f64 {
        self.sorted.iter().sum::<f64>() / self.len() as f64
    }

    /// Population variance (divides by `n`).
    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.sorted.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / self.len() as f64
    }

    /// Fraction of samples `≤ x`.
    pub fn cdf(&self, x: f64) -> f64 {
        let below = self.sorted.partition_point(|&s| s <= x);
        below as f64 / self.len() as f64
    }

    /// Equal-width histogram over the sample range; masses sum to one.
    pub fn histogram(&self) -> Vec<Bin> {
        let (Some(&lo), Some(&hi)) = (self.sorted.first(), self.sorted.last()) else {
            return Vec::new();
        };
        let width = if hi > lo { (hi - lo) / self.bin_count as f64 } else { 1.0 };
        let mut counts = vec![0usize; self.bin_count];
        for &x in &self.sorted {
            let idx = (((x - lo) / width) as usize).min(self.bin_count - 1);
            counts[idx] += 1;
        }
        let n = self.len() as f64;
        counts
            .into_iter()
            .enumerate()
            .map(|(i, c)| Bin {
                lo: lo + i as f64 * width,
                hi: lo + (i + 1) as f64 * width,
                mass: c as f64 / n,
            })
            .collect()
    }

    pub fn ks_distance<F: Fn(f64) -> f64>(&self, cdf: F) -> Result<f64> {
        ks_distance(self, cdf)
    }
}

/// Kolmogorov-Smirnov sup-distance between the empirical CDF and `cdf`.
///
/// The lower deviation compares against the left limit of `cdf` at each
/// sample, so a step CDF located exactly at the samples gives zero.
pub fn ks_distance<F: Fn(f64) -> f64>(emp: &EmpiricalDistribution, cdf: F) -> Result<f64> {
    if emp.is_empty() {
        return Err(Error::domain("ks_distance needs at least one sample"));
    }
    let n = emp.len() as f64;
    let xs = emp.samples();
    let mut d = 0.0f64;
    let mut i = 0;
    while i < xs.len() {
        // Treat ties as one jump.
        let x = xs[i];
        let mut j = i;
        while j < xs.len() && xs[j] == x {
            j += 1;
        }
        let below = i as f64 / n;
        let at = j as f64 / n;
        d = d.max(at - cdf(x)).max(cdf(x.next_down()) - below);
        i = j;
    }
    Ok(d.clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::{normal_cdf, RngStream};
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn single_sample_against_standard_normal() {
        let emp = EmpiricalDistribution::new(vec![0.0], 10).unwrap();
        assert!((ks_distance(&emp, normal_cdf).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn step_cdf_at_the_sample_is_zero_distance() {
        let emp = EmpiricalDistribution::new(vec![0.0], 10).unwrap();
        let step = |x: f64| if x >= 0.0 { 1.0 } else { 0.0 };
        assert_eq!(ks_distance(&emp, step).unwrap(), 0.0);
    }

    #[test]
    fn empty_sample_set_is_an_error() {
        let emp = EmpiricalDistribution::new(vec![], 10).unwrap();
        assert!(ks_distance(&emp, normal_cdf).is_err());
        assert!(EmpiricalDistribution::new(vec![f64::NAN], 3).is_err());
    }

    #[test]
    fn self_consistency_with_normal_samples() {
        let mut rng = RngStream::new(7, 0);
        let xs: Vec<f64> = (0..100_000).map(|_| StandardNormal.sample(&mut rng)).collect();
        let emp = EmpiricalDistribution::new(xs, 50).unwrap();
        assert!(emp.ks_distance(normal_cdf).unwrap() < 0.01);
    }

    #[test]
    fn histogram_mass_and_moments() {
        let xs: Vec<f64> = (0..1000).map(|i| (i as f64 * 0.37).sin() * 3.0 + 1.0).collect();
        let emp = EmpiricalDistribution::new(xs.clone(), 17).unwrap();
        let total: f64 = emp.histogram().iter().map(|b| b.mass).sum();
        assert!((total - 1.0).abs() < 1e-12);

        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / xs.len() as f64;
        assert!((emp.mean() - mean).abs() < 1e-12);
        assert!((emp.variance() - var).abs() < 1e-12);
    }

    #[test]
    fn empirical_cdf_counts_ties() {
        let emp = EmpiricalDistribution::new(vec![1.0, 2.0, 2.0, 3.0], 2).unwrap();
        assert_eq!(emp.cdf(0.5), 0.0);
        assert_eq!(emp.cdf(2.0), 0.75);
        assert_eq!(emp.cdf(3.0), 1.0);
    }
}
