use super::DistributionFunction;

/// Kolmogorov–Smirnov distance between the empirical distribution of `samples` and `f`.
pub fn ks_distance(f: &DistributionFunction, samples: &[f64]) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let fx = f.eval(x);
            ((i + 1) as f64 / n - fx).max(fx - i as f64 / n)
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_sample_at_median() {
        assert_eq!(ks_distance(&DistributionFunction::identity(), &[0.5]), 0.5);
    }

    #[test]
    fn quantile_samples_are_close() {
        let n = 999;
        let samples: Vec<f64> = (1..=n).map(|i| i as f64 / (n + 1) as f64).collect();
        assert!(ks_distance(&DistributionFunction::identity(), &samples) <= 1.0 / (n + 1) as f64 + 1e-12);
    }
}
