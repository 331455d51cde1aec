//! Ensemble aggregation and estimators.
//!
//! Everything here is a pure function of its inputs. Tail fits operate on the
//! ensemble mean of `D_k(T)/T` rather than single replicas, because the
//! limit statements being tested concern expectations.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::histogram::TrajectorySummary;

/// Mean and spread of the edge count at one checkpoint.
#[derive(Debug, Clone, Serialize)]
pub struct ETracePoint {
    pub t: u64,
    pub e_mean: f64,
    pub e_min: u64,
    pub e_max: u64,
}

/// Cross-replica aggregate of an ensemble run.
#[derive(Debug, Clone, Serialize)]
pub struct EnsembleSummary {
    pub replicas: usize,
    pub steps: u64,
    /// Mean of `D_k(T)` across replicas, dense in k.
    pub count_mean: Vec<f64>,
    /// `count_mean / T`.
    pub mean_fraction: Vec<f64>,
    /// Normal-approximation 95% confidence half-widths of `mean_fraction`.
    pub ci_half: Vec<f64>,
    /// Window-averaged frequency of increment `a = k`, pooled over replicas.
    pub increment_freq: Vec<f64>,
    pub increment_samples: u64,
    pub e_trace: Vec<ETracePoint>,
    /// Per-replica final values, in replica order.
    pub e_final: Vec<u64>,
    pub d0_final: Vec<u64>,
    pub max_degree: Vec<u64>,
    /// Per-replica giant-component fractions when the backend tracked them.
    pub giant: Vec<f64>,
}

impl EnsembleSummary {
    pub fn from_trajectories(steps: u64, replicas: &[TrajectorySummary]) -> Result<Self> {
        if replicas.is_empty() {
            return Err(Error::InsufficientData("no replicas".into()));
        }
        let r = replicas.len() as f64;
        let t = steps as f64;
        let k_max = replicas
            .iter()
            .map(|s| s.final_counts.last().map(|&(k, _)| k).unwrap_or(0))
            .max()
            .unwrap() as usize;
        let mut sum = vec![0.0f64; k_max + 1];
        let mut sumsq = vec![0.0f64; k_max + 1];
        let mut increment_counts: Vec<u64> = Vec::new();
        let mut increment_samples = 0u64;
        for s in replicas {
            if s.t != steps {
                return Err(Error::CorruptedState(format!(
                    "replica ran {} steps, expected {steps}",
                    s.t
                )));
            }
            for &(k, n) in &s.final_counts {
                sum[k as usize] += n as f64;
                sumsq[k as usize] += (n as f64) * (n as f64);
            }
            if increment_counts.len() < s.increment_counts.len() {
                increment_counts.resize(s.increment_counts.len(), 0);
            }
            for (k, &c) in s.increment_counts.iter().enumerate() {
                increment_counts[k] += c;
            }
            increment_samples += s.increment_samples;
        }
        let count_mean: Vec<f64> = sum.iter().map(|&x| x / r).collect();
        let mean_fraction: Vec<f64> = count_mean.iter().map(|&x| x / t).collect();
        let ci_half: Vec<f64> = (0..=k_max)
            .map(|k| {
                let mean = sum[k] / r;
                let var = (sumsq[k] / r - mean * mean).max(0.0);
                1.96 * (var / r).sqrt() / t
            })
            .collect();
        let increment_freq: Vec<f64> = increment_counts
            .iter()
            .map(|&c| c as f64 / increment_samples.max(1) as f64)
            .collect();

        let grid: Vec<u64> = replicas[0].checkpoints.iter().map(|c| c.t).collect();
        let mut e_trace = Vec::with_capacity(grid.len());
        for (i, &tc) in grid.iter().enumerate() {
            let mut total = 0.0;
            let (mut lo, mut hi) = (u64::MAX, 0u64);
            for s in replicas {
                let c = s.checkpoints.get(i).ok_or_else(|| {
                    Error::CorruptedState("replicas disagree on checkpoint grid".into())
                })?;
                if c.t != tc {
                    return Err(Error::CorruptedState(
                        "replicas disagree on checkpoint grid".into(),
                    ));
                }
                total += c.edge_count as f64;
                lo = lo.min(c.edge_count);
                hi = hi.max(c.edge_count);
            }
            e_trace.push(ETracePoint {
                t: tc,
                e_mean: total / r,
                e_min: lo,
                e_max: hi,
            });
        }

        let summary = Self {
            replicas: replicas.len(),
            steps,
            count_mean,
            mean_fraction,
            ci_half,
            increment_freq,
            increment_samples,
            e_trace,
            e_final: replicas.iter().map(|s| s.edge_count).collect(),
            d0_final: replicas.iter().map(|s| s.isolated).collect(),
            max_degree: replicas.iter().map(|s| s.max_degree).collect(),
            giant: replicas.iter().filter_map(|s| s.giant_fraction).collect(),
        };
        summary.check()?;
        Ok(summary)
    }

    /// Vertex-budget and normalization invariants.
    pub fn check(&self) -> Result<()> {
        let total: f64 = self.mean_fraction.iter().sum();
        let expected = (self.steps + 1) as f64 / self.steps as f64;
        if (total - expected).abs() > 1e-9 {
            return Err(Error::CorruptedState(format!(
                "mean fractions sum to {total}, expected {expected}"
            )));
        }
        if self.increment_samples > 0 {
            let f_total: f64 = self.increment_freq.iter().sum();
            if (f_total - 1.0).abs() > 1e-9
                || self.increment_freq.iter().any(|&f| !(0.0..=1.0).contains(&f))
            {
                return Err(Error::CorruptedState(
                    "increment frequencies are not a distribution".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn giant_mean(&self) -> Option<f64> {
        if self.giant.is_empty() {
            None
        } else {
            Some(self.giant.iter().sum::<f64>() / self.giant.len() as f64)
        }
    }
}

/// Least-squares power-law fit `f_k ~ C k^{-beta}`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PowerFit {
    pub beta: f64,
    pub stderr: f64,
    pub intercept: f64,
}

fn ols(points: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = points
        .iter()
        .map(|p| {
            let r = p.1 - (intercept + slope * p.0);
            r * r
        })
        .sum();
    let stderr = if points.len() > 2 {
        (rss / (n - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    (slope, intercept, stderr)
}

fn log_points(
    fraction: &[f64],
    k_lo: usize,
    k_hi: usize,
    x_of_k: impl Fn(f64) -> f64,
) -> Result<Vec<(f64, f64)>> {
    if k_lo < 1 || k_hi <= k_lo {
        return Err(Error::InvalidParameter(format!(
            "bad fit window [{k_lo}, {k_hi}]"
        )));
    }
    let points: Vec<(f64, f64)> = (k_lo..=k_hi.min(fraction.len().saturating_sub(1)))
        .filter(|&k| fraction[k] > 0.0)
        .map(|k| (x_of_k(k as f64), fraction[k].ln()))
        .collect();
    if points.len() < 10 {
        return Err(Error::InsufficientData(format!(
            "only {} positive classes in [{k_lo}, {k_hi}]; need 10",
            points.len()
        )));
    }
    Ok(points)
}

pub fn fit_power_tail(fraction: &[f64], k_lo: usize, k_hi: usize) -> Result<PowerFit> {
    let points = log_points(fraction, k_lo, k_hi, f64::ln)?;
    let (slope, intercept, stderr) = ols(&points);
    Ok(PowerFit {
        beta: -slope,
        stderr,
        intercept,
    })
}

/// Discrete maximum-likelihood tail index over classes `k >= k_min`,
/// using the continuous approximation
/// `beta = 1 + n / sum_k w_k ln(k/(k_min - 1/2))`. Cross-check for the
/// least-squares fit.
pub fn mle_tail_exponent(fraction: &[f64], k_min: usize) -> Result<f64> {
    if k_min < 1 {
        return Err(Error::InvalidParameter("k_min must be >= 1".into()));
    }
    let mut weight = 0.0f64;
    let mut log_sum = 0.0f64;
    for (k, &w) in fraction.iter().enumerate().skip(k_min) {
        weight += w;
        log_sum += w * (k as f64 / (k_min as f64 - 0.5)).ln();
    }
    if weight <= 0.0 || log_sum <= 0.0 {
        return Err(Error::InsufficientData(
            "no mass in the requested tail".into(),
        ));
    }
    Ok(1.0 + weight / log_sum)
}

/// Least-squares geometric fit `f_k ~ C r^k`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GeometricFit {
    pub ratio: f64,
    pub stderr: f64,
}

pub fn fit_geometric_ratio(fraction: &[f64], k_lo: usize, k_hi: usize) -> Result<GeometricFit> {
    let points = log_points(fraction, k_lo, k_hi, |k| k)?;
    let (slope, _, stderr) = ols(&points);
    Ok(GeometricFit {
        ratio: slope.exp(),
        stderr,
    })
}

/// Checks the limiting isolated/degree-one frequencies of the increment
/// distribution against `e^{-mu}` and `mu e^{-mu}`, plus the one-sided bound
/// `freq(0) <= e^{-mu}` up to sampling slack.
#[derive(Debug, Clone, Serialize)]
pub struct IncrementVerdict {
    pub freq0: f64,
    pub target0: f64,
    pub freq1: f64,
    pub target1: f64,
    /// Three standard errors of a Bernoulli frequency at the target rate.
    pub slack: f64,
    pub upper_bound_ok: bool,
}

pub fn increment_limits_check(freq: &[f64], samples: u64, mu: f64) -> IncrementVerdict {
    let freq0 = freq.first().copied().unwrap_or(0.0);
    let freq1 = freq.get(1).copied().unwrap_or(0.0);
    let target0 = (-mu).exp();
    let target1 = mu * (-mu).exp();
    let slack = 3.0 * (target0 * (1.0 - target0) / samples.max(1) as f64).sqrt();
    IncrementVerdict {
        freq0,
        target0,
        freq1,
        target1,
        slack,
        upper_bound_ok: freq0 <= target0 + slack,
    }
}

/// One conditional-moment bound `E[a^m] <= max(mu,1)^m m!`, tested with three
/// standard errors of slack on the pooled sample moment.
#[derive(Debug, Clone, Serialize)]
pub struct MomentVerdict {
    pub order: u32,
    pub sample_moment: f64,
    pub bound: f64,
    pub slack: f64,
    pub pass: bool,
}

fn raw_moment(freq: &[f64], order: u32) -> f64 {
    freq.iter()
        .enumerate()
        .map(|(a, &f)| f * (a as f64).powi(order as i32))
        .sum()
}

/// Moment checks on the pooled increment distribution: the mean must sit
/// within three standard errors of `mu`, and each requested higher moment
/// below its factorial bound.
pub fn moment_bound_check(
    freq: &[f64],
    samples: u64,
    mu: f64,
    orders: &[u32],
) -> Result<Vec<MomentVerdict>> {
    if samples < 1000 {
        return Err(Error::InsufficientData(format!(
            "{samples} increment samples; need 1000"
        )));
    }
    let mut verdicts = Vec::with_capacity(orders.len() + 1);
    let mean = raw_moment(freq, 1);
    let var = (raw_moment(freq, 2) - mean * mean).max(0.0);
    let mean_slack = 3.0 * (var / samples as f64).sqrt();
    verdicts.push(MomentVerdict {
        order: 1,
        sample_moment: mean,
        bound: mu,
        slack: mean_slack,
        pass: (mean - mu).abs() <= mean_slack,
    });
    for &m in orders {
        let sample = raw_moment(freq, m);
        let second = raw_moment(freq, 2 * m);
        let slack = 3.0 * ((second - sample * sample).max(0.0) / samples as f64).sqrt();
        let bound = mu.max(1.0).powi(m as i32) * (1..=m as u64).product::<u64>() as f64;
        verdicts.push(MomentVerdict {
            order: m,
            sample_moment: sample,
            bound,
            slack,
            pass: sample <= bound + slack,
        });
    }
    Ok(verdicts)
}

/// Fractions of replicas whose final edge count deviates from `mu T` by the
/// polynomial (`T^{4/5}`) and linear (`eps mu T`) thresholds.
#[derive(Debug, Clone, Serialize)]
pub struct ConcentrationVerdict {
    pub poly_threshold: f64,
    pub poly_violation_fraction: f64,
    pub linear_threshold: f64,
    pub linear_violation_fraction: f64,
}

pub fn concentration_check(e_final: &[u64], t: u64, mu: f64, eps: f64) -> ConcentrationVerdict {
    let target = mu * t as f64;
    let poly = (t as f64).powf(0.8);
    let linear = eps * target;
    let count = |threshold: f64| {
        e_final
            .iter()
            .filter(|&&e| (e as f64 - target).abs() >= threshold)
            .count() as f64
            / e_final.len().max(1) as f64
    };
    ConcentrationVerdict {
        poly_threshold: poly,
        poly_violation_fraction: count(poly),
        linear_threshold: linear,
        linear_violation_fraction: count(linear),
    }
}

/// Kolmogorov distance between two discrete distributions on `0..`.
/// Both inputs must be normalized within `1e-9`.
pub fn ks_distance(p: &[f64], q: &[f64]) -> Result<f64> {
    for (name, dist) in [("first", p), ("second", q)] {
        let total: f64 = dist.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!(
                "{name} distribution sums to {total}"
            )));
        }
    }
    let n = p.len().max(q.len());
    let mut cp = 0.0f64;
    let mut cq = 0.0f64;
    let mut d = 0.0f64;
    for k in 0..n {
        cp += p.get(k).copied().unwrap_or(0.0);
        cq += q.get(k).copied().unwrap_or(0.0);
        d = d.max((cp - cq).abs());
    }
    Ok(d)
}

/// Two-sample Kolmogorov-Smirnov statistic `sup_x |F_n(x) - G_m(x)|`.
pub fn two_sample_ks(xs: &[f64], ys: &[f64]) -> f64 {
    let mut xs = xs.to_vec();
    let mut ys = ys.to_vec();
    xs.sort_by(|a, b| a.total_cmp(b));
    ys.sort_by(|a, b| a.total_cmp(b));
    let (n, m) = (xs.len(), ys.len());
    let (mut i, mut j) = (0usize, 0usize);
    let mut d = 0.0f64;
    while i < n && j < m {
        let x = xs[i].min(ys[j]);
        while i < n && xs[i] <= x {
            i += 1;
        }
        while j < m && ys[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    d
}

/// Rejection threshold `c sqrt((n+m)/(n m))` for the two-sample KS statistic;
/// `c = 1.628` corresponds to the 1% level.
pub fn two_sample_ks_critical(n: usize, m: usize, c: f64) -> f64 {
    c * ((n + m) as f64 / (n as f64 * m as f64)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::histogram::{run_process, ObservationPlan};
    use crate::params::{ModelKind, ModelParams};

    #[test]
    fn power_fit_recovers_exact_exponent() {
        let f: Vec<f64> = (0..=60)
            .map(|k| if k == 0 { 0.0 } else { (k as f64).powi(-3) })
            .collect();
        let fit = fit_power_tail(&f, 5, 50).unwrap();
        assert!((fit.beta - 3.0).abs() < 1e-6, "beta = {}", fit.beta);
        assert!(fit.stderr < 1e-6);
    }

    #[test]
    fn geometric_fit_recovers_exact_ratio() {
        let f: Vec<f64> = (0..=40).map(|k| 0.5f64.powi(k)).collect();
        let fit = fit_geometric_ratio(&f, 4, 13).unwrap();
        assert!((fit.ratio - 0.5).abs() < 1e-12);
    }

    #[test]
    fn fits_reject_sparse_windows() {
        let mut f = vec![0.0; 60];
        f[5] = 0.5;
        f[6] = 0.5;
        assert!(matches!(
            fit_power_tail(&f, 5, 50),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn mle_agrees_with_ols_on_exact_power_law() {
        let f: Vec<f64> = (0..=5000)
            .map(|k| if k < 5 { 0.0 } else { (k as f64).powi(-3) })
            .collect();
        let beta = mle_tail_exponent(&f, 5).unwrap();
        assert!((beta - 3.0).abs() < 0.05, "beta = {beta}");
    }

    #[test]
    fn increment_targets_are_poisson_values() {
        let freq = [0.37, 0.37, 0.26];
        let v = increment_limits_check(&freq, 100_000, 1.0);
        assert!((v.target0 - 0.36788).abs() < 1e-4);
        assert!((v.target1 - 0.36788).abs() < 1e-4);
        assert!(v.upper_bound_ok);
        let v2 = increment_limits_check(&freq, 100_000, 2.0);
        assert!((v2.target0 - 0.13534).abs() < 1e-4);
        assert!((v2.target1 - 0.27067).abs() < 1e-4);
    }

    #[test]
    fn constant_increments_pass_moment_bounds() {
        // a == mu = 1: mu^m <= max(mu,1)^m m! for every m.
        let freq = [0.0, 1.0];
        let verdicts = moment_bound_check(&freq, 10_000, 1.0, &[2, 3, 4]).unwrap();
        assert!(verdicts.iter().all(|v| v.pass));
        assert!((verdicts[3].bound - 24.0).abs() < 1e-12);
    }

    #[test]
    fn concentration_flags_constructed_violation() {
        let t = 10_000u64;
        let v = concentration_check(&[2 * t], t, 1.0, 0.1);
        assert_eq!(v.poly_violation_fraction, 1.0);
        assert_eq!(v.linear_violation_fraction, 1.0);
        let ok = concentration_check(&[t + 3], t, 1.0, 0.1);
        assert_eq!(ok.poly_violation_fraction, 0.0);
    }

    #[test]
    fn ks_distance_basics() {
        assert_eq!(ks_distance(&[0.5, 0.5], &[0.5, 0.5]).unwrap(), 0.0);
        assert_eq!(ks_distance(&[1.0], &[0.0, 1.0]).unwrap(), 1.0);
        assert!(ks_distance(&[0.7, 0.2], &[1.0]).is_err());
    }

    #[test]
    fn two_sample_ks_extremes() {
        let xs = [1.0, 2.0, 3.0];
        assert_eq!(two_sample_ks(&xs, &xs), 0.0);
        assert_eq!(two_sample_ks(&[1.0, 2.0], &[10.0, 20.0]), 1.0);
        let crit = two_sample_ks_critical(200, 200, 1.628);
        assert!((crit - 0.1628).abs() < 1e-4);
    }

    #[test]
    fn ensemble_summary_invariants_from_small_runs() {
        let params = ModelParams::ba(1.0).unwrap();
        let plan = ObservationPlan::default_for(500);
        let runs: Vec<_> = (0..4)
            .map(|i| run_process(&params, ModelKind::Ba, 500, 100 + i, &plan).unwrap())
            .collect();
        let s = EnsembleSummary::from_trajectories(500, &runs).unwrap();
        assert_eq!(s.replicas, 4);
        assert_eq!(s.e_final.len(), 4);
        assert_eq!(s.e_trace.last().unwrap().t, 500);
        assert!(s.e_trace.last().unwrap().e_min <= s.e_trace.last().unwrap().e_max);
        // check() ran in the constructor; spot-check the budget identity.
        let total: f64 = s.mean_fraction.iter().sum();
        assert!((total - 501.0 / 500.0).abs() < 1e-12);
    }

    proptest::proptest! {
        #[test]
        fn ks_metric_axioms(seed in 0u64..500) {
            use rand::Rng;
            let mut rng = crate::rng::rng_from_seed(seed);
            let mut sample = || {
                let mut v: Vec<f64> = (0..8).map(|_| rng.random::<f64>()).collect();
                let s: f64 = v.iter().sum();
                v.iter_mut().for_each(|x| *x /= s);
                v
            };
            let (p, q, r) = (sample(), sample(), sample());
            let dpq = ks_distance(&p, &q).unwrap();
            let dqp = ks_distance(&q, &p).unwrap();
            let dpr = ks_distance(&p, &r).unwrap();
            let drq = ks_distance(&r, &q).unwrap();
            proptest::prop_assert!((dpq - dqp).abs() < 1e-15);
            proptest::prop_assert!(ks_distance(&p, &p).unwrap() == 0.0);
            proptest::prop_assert!(dpq <= dpr + drq + 1e-12);
        }
    }
}
