//! Steady state of the In-Use LBA birth-death chain under a Trim-modified
//! uniform random workload.
//!
//! With `X` the number of In-Use LBAs, a Trim (probability `q`) moves the
//! chain down, a Write to a not-In-Use LBA moves it up and a Write to an
//! In-Use LBA leaves it in place. Everything here works on log-weights;
//! the factorials in the exact steady state overflow for realistic `u`.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MarkovError {
    #[error("trim probability q = {0} outside [0, 0.5)")]
    TrimOutOfDomain(f64),
    #[error("user LBA count must be positive")]
    NoLbas,
    #[error("state {x} outside 0..={u}")]
    StateOutOfRange { x: usize, u: usize },
    #[error("variance is zero (q = 0); moment formula undefined")]
    ZeroVariance,
    #[error("approximation needs q > 0")]
    NeedsTrim,
    #[error("spare factor {0} outside [0, 1)")]
    SpareFactor(f64),
    #[error("shift must be one of 0, +0.5, -0.5 (got {0})")]
    Shift(f64),
}

/// Stirling-form density, calibrated shift (minimum sup-norm against the
/// exact pdf at u = 1000, q = 0.4; see the `calibration` test).
pub const STIRLING_SHIFT: f64 = 0.5;
/// Gaussian density, calibrated the same way.
pub const GAUSSIAN_SHIFT: f64 = 0.5;
pub const SHIFT_CANDIDATES: [f64; 3] = [0.0, 0.5, -0.5];

/// `u` user LBAs under Trim probability `q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrimParams {
    u: usize,
    q: f64,
}

impl TrimParams {
    pub fn new(u: usize, q: f64) -> Result<Self, MarkovError> {
        if u == 0 {
            return Err(MarkovError::NoLbas);
        }
        if !(0.0..0.5).contains(&q) {
            return Err(MarkovError::TrimOutOfDomain(q));
        }
        Ok(Self { u, q })
    }

    pub fn u(&self) -> usize {
        self.u
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// Steady-state probability that a Write hits an In-Use LBA.
    pub fn s(&self) -> f64 {
        s(self.q)
    }

    /// Steady-state probability that a Write hits a not-In-Use LBA.
    pub fn s_bar(&self) -> f64 {
        s_bar(self.q)
    }

    /// `sigma^2 = u * s_bar`.
    pub fn variance(&self) -> f64 {
        self.u as f64 * self.s_bar()
    }

    /// `u * s`, the mean In-Use count.
    pub fn mean(&self) -> f64 {
        self.u as f64 * self.s()
    }
}

pub fn s(q: f64) -> f64 {
    (1.0 - 2.0 * q) / (1.0 - q)
}

pub fn s_bar(q: f64) -> f64 {
    q / (1.0 - q)
}

/// One row of the chain's transition matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition {
    pub down: f64,
    pub stay: f64,
    pub up: f64,
}

/// The chain at `x = 0` has nothing to Trim; that mass becomes a self-loop.
pub fn transition_probs(x: usize, params: &TrimParams) -> Result<Transition, MarkovError> {
    let u = params.u;
    if x > u {
        return Err(MarkovError::StateOutOfRange { x, u });
    }
    let q = params.q;
    let write = 1.0 - q;
    let hit = x as f64 / u as f64 * write;
    let up = (u - x) as f64 / u as f64 * write;
    Ok(if x == 0 {
        Transition {
            down: 0.0,
            stay: q + hit,
            up,
        }
    } else {
        Transition {
            down: q,
            stay: hit,
            up,
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PdfMethod {
    Exact,
    Stirling,
    Gaussian,
}

/// Normalized distribution over the In-Use count `0..=u`.
#[derive(Debug, Clone, PartialEq)]
pub struct SteadyDistribution {
    method: PdfMethod,
    shift: f64,
    log_probs: Vec<f64>,
}

impl SteadyDistribution {
    /// Normalizes `log_weights` with log-sum-exp.
    pub fn from_log_weights(method: PdfMethod, shift: f64, mut log_weights: Vec<f64>) -> Self {
        let max = log_weights
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        let sum: f64 = log_weights.iter().map(|&w| (w - max).exp()).sum();
        let log_norm = max + sum.ln();
        for w in &mut log_weights {
            *w -= log_norm;
        }
        Self {
            method,
            shift,
            log_probs: log_weights,
        }
    }

    pub fn method(&self) -> PdfMethod {
        self.method
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    pub fn support_max(&self) -> usize {
        self.log_probs.len() - 1
    }

    pub fn log_probs(&self) -> &[f64] {
        &self.log_probs
    }

    pub fn prob(&self, x: usize) -> f64 {
        self.log_probs.get(x).map_or(0.0, |lp| lp.exp())
    }

    pub fn probs(&self) -> Vec<f64> {
        self.log_probs.iter().map(|lp| lp.exp()).collect()
    }

    pub fn cdf(&self) -> Vec<f64> {
        let mut acc = 0.0;
        self.probs()
            .into_iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect()
    }

    pub fn argmax(&self) -> usize {
        self.log_probs
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (x, &lp)| {
                if lp > best.1 {
                    (x, lp)
                } else {
                    best
                }
            })
            .0
    }

    pub fn moments(&self) -> DistributionMoments {
        DistributionMoments::from_weights(
            self.probs().iter().enumerate().map(|(x, &p)| (x as f64, p)),
        )
    }

    /// Largest per-point probability difference.
    pub fn sup_distance(&self, other: &SteadyDistribution) -> f64 {
        self.probs()
            .iter()
            .zip(other.probs())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Kolmogorov-Smirnov distance between the two CDFs.
    pub fn ks_distance(&self, other: &SteadyDistribution) -> f64 {
        ks_distance(&self.cdf(), &other.cdf())
    }
}

pub fn ks_distance(cdf_a: &[f64], cdf_b: &[f64]) -> f64 {
    cdf_a
        .iter()
        .zip(cdf_b)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}

/// Mean, variance, skewness and excess kurtosis of a weighted sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistributionMoments {
    pub mean: f64,
    pub variance: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
}

impl DistributionMoments {
    pub fn from_weights(points: impl Iterator<Item = (f64, f64)> + Clone) -> Self {
        let total: f64 = points.clone().map(|(_, w)| w).sum();
        let mean = points.clone().map(|(x, w)| x * w).sum::<f64>() / total;
        let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
        for (x, w) in points {
            let d = x - mean;
            let d2 = d * d;
            m2 += w * d2;
            m3 += w * d2 * d;
            m4 += w * d2 * d2;
        }
        m2 /= total;
        m3 /= total;
        m4 /= total;
        Self {
            mean,
            variance: m2,
            skewness: m3 / m2.powf(1.5),
            excess_kurtosis: m4 / (m2 * m2) - 3.0,
        }
    }
}

/// Exact steady state, accumulated in log space as
/// `x log((1-q)/q) + sum_{i<x} log(u-i) - x log u`.
///
/// `q = 0` has no Trims and returns the point mass at `x = u`.
pub fn exact_pdf(params: &TrimParams) -> SteadyDistribution {
    let u = params.u;
    if params.q == 0.0 {
        let mut weights = vec![f64::NEG_INFINITY; u + 1];
        weights[u] = 0.0;
        return SteadyDistribution::from_log_weights(PdfMethod::Exact, 0.0, weights);
    }
    let q = params.q;
    let odds = ((1.0 - q) / q).ln();
    let log_u = (u as f64).ln();
    let mut weights = Vec::with_capacity(u + 1);
    let mut acc = 0.0;
    weights.push(0.0);
    for x in 1..=u {
        acc += odds + ((u - (x - 1)) as f64).ln() - log_u;
        weights.push(acc);
    }
    SteadyDistribution::from_log_weights(PdfMethod::Exact, 0.0, weights)
}

fn check_shift(shift: f64) -> Result<(), MarkovError> {
    if SHIFT_CANDIDATES.contains(&shift) {
        Ok(())
    } else {
        Err(MarkovError::Shift(shift))
    }
}

/// Unnormalized Stirling-form log density `-(u-x) log((u-x)/(u s_bar)) + (u-x)`
/// evaluated at `x - shift`. Where `u - x + shift <= 0` the `y log y` term
/// takes its limit and the value is 0.
pub fn stirling_log_pdf(params: &TrimParams, x: usize, shift: f64) -> f64 {
    let y = params.u as f64 - x as f64 + shift;
    if y <= 0.0 {
        return 0.0;
    }
    let scale = params.u as f64 * params.s_bar();
    -y * (y / scale).ln() + y
}

pub fn stirling_pdf(params: &TrimParams, shift: f64) -> Result<SteadyDistribution, MarkovError> {
    check_shift(shift)?;
    if params.q == 0.0 {
        return Err(MarkovError::NeedsTrim);
    }
    let weights = (0..=params.u)
        .map(|x| stirling_log_pdf(params, x, shift))
        .collect();
    Ok(SteadyDistribution::from_log_weights(
        PdfMethod::Stirling,
        shift,
        weights,
    ))
}

/// Discrete Gaussian on `0..=u` with mean `u s + shift` and variance `u s_bar`.
pub fn gaussian_pdf(params: &TrimParams, shift: f64) -> Result<SteadyDistribution, MarkovError> {
    check_shift(shift)?;
    if params.q == 0.0 {
        return Err(MarkovError::NeedsTrim);
    }
    let mean = params.mean() + shift;
    let two_var = 2.0 * params.variance();
    let weights = (0..=params.u)
        .map(|x| {
            let d = x as f64 - mean;
            -d * d / two_var
        })
        .collect();
    Ok(SteadyDistribution::from_log_weights(
        PdfMethod::Gaussian,
        shift,
        weights,
    ))
}

/// Shift in [`SHIFT_CANDIDATES`] minimizing the sup-norm distance of the
/// approximation to the exact pdf, returned with that distance.
pub fn calibrate_shift(params: &TrimParams, method: PdfMethod) -> Result<(f64, f64), MarkovError> {
    let exact = exact_pdf(params);
    let mut best = (0.0, f64::INFINITY);
    for shift in SHIFT_CANDIDATES {
        let approx = match method {
            PdfMethod::Exact => return Ok((0.0, 0.0)),
            PdfMethod::Stirling => stirling_pdf(params, shift)?,
            PdfMethod::Gaussian => gaussian_pdf(params, shift)?,
        };
        let d = approx.sup_distance(&exact);
        if d < best.1 {
            best = (shift, d);
        }
    }
    Ok(best)
}

/// Leading-order skewness `-1/sigma`.
pub fn skewness(params: &TrimParams) -> Result<f64, MarkovError> {
    let var = params.variance();
    if var <= 0.0 {
        return Err(MarkovError::ZeroVariance);
    }
    Ok(-1.0 / var.sqrt())
}

/// Leading-order excess kurtosis `3 / (4 sigma^2)`.
pub fn excess_kurtosis(params: &TrimParams) -> Result<f64, MarkovError> {
    let var = params.variance();
    if var <= 0.0 {
        return Err(MarkovError::ZeroVariance);
    }
    Ok(3.0 / (4.0 * var))
}

/// `rho_eff = (1 + rho) / s - 1`.
pub fn rho_eff(rho: f64, q: f64) -> f64 {
    (1.0 + rho) / s(q) - 1.0
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveOverprovisioning {
    pub mean_spare_factor: f64,
    pub var_spare_factor: f64,
    pub rho_eff: f64,
    pub u_eff: f64,
}

impl EffectiveOverprovisioning {
    pub fn std_spare_factor(&self) -> f64 {
        self.var_spare_factor.sqrt()
    }
}

/// Effective spare factor `(t - X) / t` implied by Trim on a device with
/// manufacturer spare factor `spare_factor` and `total_pages` pages.
pub fn effective_overprovisioning(
    spare_factor: f64,
    q: f64,
    total_pages: f64,
) -> Result<EffectiveOverprovisioning, MarkovError> {
    if !(0.0..1.0).contains(&spare_factor) {
        return Err(MarkovError::SpareFactor(spare_factor));
    }
    if !(0.0..0.5).contains(&q) {
        return Err(MarkovError::TrimOutOfDomain(q));
    }
    if total_pages.is_nan() || total_pages <= 0.0 {
        return Err(MarkovError::NoLbas);
    }
    let (s, s_bar) = (s(q), s_bar(q));
    let u = total_pages * (1.0 - spare_factor);
    let rho = spare_factor / (1.0 - spare_factor);
    Ok(EffectiveOverprovisioning {
        mean_spare_factor: s_bar + s * spare_factor,
        var_spare_factor: s_bar * (1.0 - spare_factor) / total_pages,
        rho_eff: rho_eff(rho, q),
        u_eff: u * s,
    })
}
