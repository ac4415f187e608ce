//! Direct simulation of the In-Use birth-death chain, without an FTL.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::stats::{histogram_moments, replication_seed, Summary};
use super::ExperimentError;
use crate::markov::{
    effective_overprovisioning, excess_kurtosis, skewness, DistributionMoments, TrimParams,
};

#[derive(Debug, Clone, PartialEq)]
pub struct ChainConfig {
    pub user_lbas: usize,
    pub trim_prob: f64,
    /// Steps discarded before sampling; `None` picks `20 u / (1 - q)`.
    pub warmup_steps: Option<u64>,
    /// Sampled steps per run.
    pub steps: u64,
    pub runs: usize,
    pub seed: u64,
}

impl ChainConfig {
    pub fn effective_warmup(&self) -> u64 {
        self.warmup_steps.unwrap_or_else(|| {
            (20.0 * self.user_lbas as f64 / (1.0 - self.trim_prob)).ceil() as u64
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainRun {
    pub seed: u64,
    /// Visits to each In-Use count `0..=u`.
    pub histogram: Vec<u64>,
    pub moments: DistributionMoments,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainReport {
    pub params: TrimParams,
    pub runs: Vec<ChainRun>,
    /// Histogram pooled over all runs.
    pub histogram: Vec<u64>,
}

impl ChainReport {
    pub fn total_steps(&self) -> u64 {
        self.histogram.iter().sum()
    }

    /// Empirical probability of each In-Use count.
    pub fn empirical_pdf(&self) -> Vec<f64> {
        let n = self.total_steps() as f64;
        self.histogram.iter().map(|&c| c as f64 / n).collect()
    }

    pub fn empirical_cdf(&self) -> Vec<f64> {
        let mut acc = 0.0;
        self.empirical_pdf()
            .into_iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect()
    }
}

/// One chain step from `x`, consuming a single uniform draw.
#[inline]
fn step(x: usize, u: usize, q: f64, v: f64) -> usize {
    if v < q {
        x.saturating_sub(1)
    } else if (v - q) < (1.0 - q) * x as f64 / u as f64 {
        x
    } else {
        x + 1
    }
}

fn run_chain(cfg: &ChainConfig, seed: u64, mut visit: impl FnMut(usize)) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (u, q) = (cfg.user_lbas, cfg.trim_prob);
    let mut x = 0usize;
    for _ in 0..cfg.effective_warmup() {
        x = step(x, u, q, rng.random());
    }
    for _ in 0..cfg.steps {
        x = step(x, u, q, rng.random());
        visit(x);
    }
}

fn check(cfg: &ChainConfig) -> Result<TrimParams, ExperimentError> {
    let params = TrimParams::new(cfg.user_lbas, cfg.trim_prob)?;
    if cfg.runs == 0 || cfg.steps == 0 {
        return Err(ExperimentError::Config(
            "chain simulation needs at least one run and one step".into(),
        ));
    }
    Ok(params)
}

/// Runs `cfg.runs` independent chains from an empty device and records the
/// In-Use count after every sampled step.
pub fn simulate_chain(cfg: &ChainConfig) -> Result<ChainReport, ExperimentError> {
    let params = check(cfg)?;
    let runs: Vec<ChainRun> = (0..cfg.runs)
        .into_par_iter()
        .map(|r| {
            let seed = replication_seed(cfg.seed, r);
            let mut histogram = vec![0u64; cfg.user_lbas + 1];
            run_chain(cfg, seed, |x| histogram[x] += 1);
            let moments = histogram_moments(&histogram);
            ChainRun {
                seed,
                histogram,
                moments,
            }
        })
        .collect();
    let mut histogram = vec![0u64; cfg.user_lbas + 1];
    for run in &runs {
        for (h, c) in histogram.iter_mut().zip(&run.histogram) {
            *h += c;
        }
    }
    Ok(ChainReport {
        params,
        runs,
        histogram,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentStudy {
    pub params: TrimParams,
    pub skewness: Summary,
    pub excess_kurtosis: Summary,
    /// Moments of the exact steady-state distribution.
    pub exact: DistributionMoments,
    /// `-1/sigma`.
    pub theory_skewness: f64,
    /// `3 / (4 sigma^2)`.
    pub theory_excess_kurtosis: f64,
}

/// Per-run sample skewness and excess kurtosis of the In-Use trajectory,
/// with the large-`u` formulas and the exact-distribution values attached.
pub fn moment_study(cfg: &ChainConfig) -> Result<MomentStudy, ExperimentError> {
    let report = simulate_chain(cfg)?;
    let params = report.params;
    let skews: Vec<f64> = report.runs.iter().map(|r| r.moments.skewness).collect();
    let kurts: Vec<f64> = report
        .runs
        .iter()
        .map(|r| r.moments.excess_kurtosis)
        .collect();
    Ok(MomentStudy {
        params,
        skewness: Summary::of(&skews),
        excess_kurtosis: Summary::of(&kurts),
        exact: crate::markov::exact_pdf(&params).moments(),
        theory_skewness: skewness(&params)?,
        theory_excess_kurtosis: excess_kurtosis(&params)?,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpareBandRow {
    pub spare_factor: f64,
    pub user_lbas: usize,
    pub theory_mean: f64,
    pub theory_std: f64,
    pub empirical_mean: f64,
    pub empirical_std: f64,
    /// Share of samples with `|S_eff - mean| <= 3 std`.
    pub within_3sigma: f64,
}

/// Empirical effective spare factor `(t - X) / t` of a `t`-page device
/// against its predicted mean and 3-sigma band, one row per spare factor.
pub fn spare_band_study(
    total_pages: usize,
    spare_factors: &[f64],
    trim_prob: f64,
    steps: u64,
    seed: u64,
) -> Result<Vec<SpareBandRow>, ExperimentError> {
    spare_factors
        .iter()
        .enumerate()
        .map(|(i, &sf)| {
            if !(0.0..1.0).contains(&sf) {
                return Err(ExperimentError::Config(format!(
                    "spare factor {sf} outside [0, 1)"
                )));
            }
            let user_lbas = (total_pages as f64 * (1.0 - sf)).round() as usize;
            let actual_sf = 1.0 - user_lbas as f64 / total_pages as f64;
            let theory = effective_overprovisioning(actual_sf, trim_prob, total_pages as f64)?;
            let cfg = ChainConfig {
                user_lbas,
                trim_prob,
                warmup_steps: None,
                steps,
                runs: 1,
                seed: replication_seed(seed, i),
            };
            check(&cfg)?;
            let (mean, std) = (theory.mean_spare_factor, theory.std_spare_factor());
            let t = total_pages as f64;
            let mut inside = 0u64;
            let mut histogram = vec![0u64; user_lbas + 1];
            run_chain(&cfg, cfg.seed, |x| {
                histogram[x] += 1;
                if ((t - x as f64) / t - mean).abs() <= 3.0 * std {
                    inside += 1;
                }
            });
            let m = histogram_moments(&histogram);
            Ok(SpareBandRow {
                spare_factor: actual_sf,
                user_lbas,
                theory_mean: mean,
                theory_std: std,
                empirical_mean: (t - m.mean) / t,
                empirical_std: m.variance.sqrt() / t,
                within_3sigma: inside as f64 / steps as f64,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_follows_transition_rows() {
        // u = 4, x = 2, q = 0.25: down [0, .25), stay [.25, .625), up [.625, 1).
        assert_eq!(step(2, 4, 0.25, 0.1), 1);
        assert_eq!(step(2, 4, 0.25, 0.5), 2);
        assert_eq!(step(2, 4, 0.25, 0.7), 3);
        assert_eq!(step(0, 4, 0.25, 0.1), 0);
        assert_eq!(step(4, 4, 0.25, 0.99), 4);
    }

    #[test]
    fn chain_is_seed_deterministic() {
        let cfg = ChainConfig {
            user_lbas: 50,
            trim_prob: 0.2,
            warmup_steps: None,
            steps: 10_000,
            runs: 3,
            seed: 11,
        };
        let a = simulate_chain(&cfg).unwrap();
        let b = simulate_chain(&cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.total_steps(), 30_000);
        assert_ne!(a.runs[0].histogram, a.runs[1].histogram);
    }

    #[test]
    fn rejects_bad_trim() {
        let cfg = ChainConfig {
            user_lbas: 50,
            trim_prob: 0.5,
            warmup_steps: Some(0),
            steps: 1,
            runs: 1,
            seed: 0,
        };
        assert!(simulate_chain(&cfg).is_err());
    }
}
