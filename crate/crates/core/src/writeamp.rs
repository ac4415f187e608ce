//! Closed-form write-amplification predictors for greedy garbage
//! collection, with and without Trim, for uniform, hot/cold and
//! N-temperature workloads.

use std::fmt;

use thiserror::Error;

use crate::lambert::{lambert_w0, LambertError};
use crate::markov::{rho_eff, s};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WaError {
    #[error("overprovisioning rho = {0} must be positive")]
    NonPositiveRho(f64),
    #[error("trim probability {name} = {value} outside [0, 0.5)")]
    TrimOutOfDomain { name: &'static str, value: f64 },
    #[error(transparent)]
    Lambert(#[from] LambertError),
    #[error("Hu model: invalid input {0}")]
    HuInput(&'static str),
    #[error(
        "Hu model degenerate: expected victim valid pages {mean_valid} >= n_p = {pages_per_block}"
    )]
    HuDegenerate {
        mean_valid: f64,
        pages_per_block: usize,
    },
    #[error("temperature {index}: {reason}")]
    Temperature { index: usize, reason: &'static str },
    #[error("request probabilities sum to {0}, expected 1")]
    RequestProbabilities(f64),
    #[error("{expected} temperatures required, got {got}")]
    TemperatureCount { expected: usize, got: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WaModel {
    Hu,
    HuTrim,
    Agarwal,
    AgarwalTrim,
    Xiang,
    XiangTrim,
    HotColdSeparated,
    MultiTemp,
    MixedNaive,
}

impl WaModel {
    pub fn name(&self) -> &'static str {
        match self {
            WaModel::Hu => "hu",
            WaModel::HuTrim => "hu_trim",
            WaModel::Agarwal => "agarwal",
            WaModel::AgarwalTrim => "agarwal_trim",
            WaModel::Xiang => "xiang",
            WaModel::XiangTrim => "xiang_trim",
            WaModel::HotColdSeparated => "hot_cold_separated",
            WaModel::MultiTemp => "multi_temp",
            WaModel::MixedNaive => "mixed_naive",
        }
    }
}

impl fmt::Display for WaModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A model's predicted write amplification and the inputs it used.
#[derive(Debug, Clone, PartialEq)]
pub struct WaPrediction {
    pub model: WaModel,
    pub value: f64,
    /// Set when the model predicts physically impossible amplification below 1.
    pub below_unity: bool,
    pub inputs: Vec<(&'static str, f64)>,
}

impl WaPrediction {
    fn new(model: WaModel, value: f64, inputs: Vec<(&'static str, f64)>) -> Self {
        Self {
            model,
            value,
            below_unity: value < 1.0,
            inputs,
        }
    }

    pub fn input(&self, name: &str) -> Option<f64> {
        self.inputs
            .iter()
            .find(|(k, _)| *k == name)
            .map(|(_, v)| *v)
    }
}

fn check_rho(rho: f64) -> Result<(), WaError> {
    if rho > 0.0 && rho.is_finite() {
        Ok(())
    } else {
        Err(WaError::NonPositiveRho(rho))
    }
}

fn check_q(name: &'static str, q: f64) -> Result<(), WaError> {
    if (0.0..0.5).contains(&q) {
        Ok(())
    } else {
        Err(WaError::TrimOutOfDomain { name, value: q })
    }
}

/// `(1 + rho) / (2 rho)`.
pub fn wa_agarwal(rho: f64) -> Result<WaPrediction, WaError> {
    check_rho(rho)?;
    Ok(WaPrediction::new(
        WaModel::Agarwal,
        (1.0 + rho) / (2.0 * rho),
        vec![("rho", rho)],
    ))
}

/// `(1 + rho) / (2 (1 + rho - s))`. Falls below 1 for large `q`; that
/// value is returned as is with `below_unity` set.
pub fn wa_agarwal_trim(rho: f64, q: f64) -> Result<WaPrediction, WaError> {
    check_rho(rho)?;
    check_q("q", q)?;
    let value = (1.0 + rho) / (2.0 * (1.0 + rho - s(q)));
    Ok(WaPrediction::new(
        WaModel::AgarwalTrim,
        value,
        vec![("rho", rho), ("q", q)],
    ))
}

/// `a / (a + W0(-a e^-a))` with `a = 1 + rho`.
///
/// The other real solution `W-1(-a e^-a) = -a` zeroes the denominator, so
/// only the principal branch gives a finite amplification.
fn xiang_value(rho: f64) -> Result<f64, WaError> {
    let a = 1.0 + rho;
    let w = lambert_w0(-a * (-a).exp())?;
    Ok(a / (a + w))
}

pub fn wa_xiang(rho: f64) -> Result<WaPrediction, WaError> {
    check_rho(rho)?;
    Ok(WaPrediction::new(
        WaModel::Xiang,
        xiang_value(rho)?,
        vec![("rho", rho)],
    ))
}

/// Xiang's model evaluated at `rho_eff = (1 + rho) / s - 1`.
pub fn wa_xiang_trim(rho: f64, q: f64) -> Result<WaPrediction, WaError> {
    check_rho(rho)?;
    check_q("q", q)?;
    let eff = rho_eff(rho, q);
    Ok(WaPrediction::new(
        WaModel::XiangTrim,
        xiang_value(eff)?,
        vec![("rho", rho), ("q", q), ("rho_eff", eff)],
    ))
}

/// Inputs of the Hu empirical model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HuParams {
    pub total_pages: f64,
    /// User pages seen by the model (`u`, or `u_eff` under Trim).
    pub user_pages: f64,
    pub pages_per_block: usize,
    /// Greedy window size `w`.
    pub window: usize,
}

impl HuParams {
    /// Plain greedy collection: `w = t / n_p - r`.
    pub fn greedy(
        total_pages: usize,
        user_pages: f64,
        pages_per_block: usize,
        reserve: usize,
    ) -> Self {
        let blocks = total_pages / pages_per_block.max(1);
        Self {
            total_pages: total_pages as f64,
            user_pages,
            pages_per_block,
            window: blocks.saturating_sub(reserve),
        }
    }

    fn check(&self) -> Result<(), WaError> {
        if self.pages_per_block == 0 {
            return Err(WaError::HuInput("pages per block must be positive"));
        }
        if self.window == 0 {
            return Err(WaError::HuInput("window must be at least 1"));
        }
        if !(self.user_pages > 1.0 && self.user_pages <= self.total_pages) {
            return Err(WaError::HuInput("need 1 < u <= t"));
        }
        Ok(())
    }

    /// `p_1 = exp(-1.9 (t/u - 1))`, `p_j = min(1, 1.1 p_{j-1} / (1 - 1/u)^{n_p})`.
    pub fn page_probs(&self) -> Vec<f64> {
        let decay = (1.0 - 1.0 / self.user_pages).powi(self.pages_per_block as i32);
        let mut probs = Vec::with_capacity(self.window);
        let mut p = (-1.9 * (self.total_pages / self.user_pages - 1.0)).exp();
        for _ in 0..self.window {
            probs.push(p);
            p = (1.1 * p / decay).min(1.0);
        }
        probs
    }

    /// Distribution `p*_k`, `k = 0..=n_p`, of the minimum valid-page count
    /// over the window.
    pub fn min_valid_distribution(&self) -> Result<Vec<f64>, WaError> {
        self.check()?;
        let n_p = self.pages_per_block;
        let log_choose = log_binomial_row(n_p);
        // V_k = prod_j P(Bin(n_p, p_j) > k), k = 0..n_p-1
        let mut survival = vec![1.0f64; n_p];
        for p in self.page_probs() {
            if p >= 1.0 {
                // Every block full of valid pages: factor 1 for all k < n_p.
                continue;
            }
            let tail = binomial_upper_tails(n_p, p, &log_choose);
            for (v, t) in survival.iter_mut().zip(tail) {
                *v *= t;
            }
        }
        let mut dist = Vec::with_capacity(n_p + 1);
        dist.push(1.0 - survival[0]);
        for k in 1..n_p {
            dist.push(survival[k - 1] - survival[k]);
        }
        dist.push(survival[n_p - 1]);
        Ok(dist)
    }

    fn amplification(&self) -> Result<f64, WaError> {
        let dist = self.min_valid_distribution()?;
        let mean_valid: f64 = dist.iter().enumerate().map(|(k, p)| k as f64 * p).sum();
        let n_p = self.pages_per_block as f64;
        if mean_valid >= n_p {
            return Err(WaError::HuDegenerate {
                mean_valid,
                pages_per_block: self.pages_per_block,
            });
        }
        Ok(n_p / (n_p - mean_valid))
    }
}

/// `ln C(n, m)` for `m = 0..=n`.
fn log_binomial_row(n: usize) -> Vec<f64> {
    let mut log_fact = vec![0.0f64; n + 1];
    for i in 1..=n {
        log_fact[i] = log_fact[i - 1] + (i as f64).ln();
    }
    (0..=n)
        .map(|m| log_fact[n] - log_fact[m] - log_fact[n - m])
        .collect()
}

/// `P(Bin(n, p) > k)` for `k = 0..n-1`, summed from the top for accuracy.
fn binomial_upper_tails(n: usize, p: f64, log_choose: &[f64]) -> Vec<f64> {
    let mut tails = vec![0.0f64; n];
    if p <= 0.0 {
        return tails;
    }
    let (lp, lq) = (p.ln(), (-p).ln_1p());
    let mut acc = 0.0;
    for m in (1..=n).rev() {
        acc += (log_choose[m] + m as f64 * lp + (n - m) as f64 * lq).exp();
        tails[m - 1] = acc.min(1.0);
    }
    tails
}

pub fn wa_hu(params: &HuParams) -> Result<WaPrediction, WaError> {
    Ok(WaPrediction::new(
        WaModel::Hu,
        params.amplification()?,
        vec![
            ("t", params.total_pages),
            ("u", params.user_pages),
            ("n_p", params.pages_per_block as f64),
            ("w", params.window as f64),
        ],
    ))
}

/// Hu's model with `u` replaced by `u_eff = u s`.
pub fn wa_hu_trim(params: &HuParams, q: f64) -> Result<WaPrediction, WaError> {
    check_q("q", q)?;
    let eff = HuParams {
        user_pages: params.user_pages * s(q),
        ..*params
    };
    let mut p = wa_hu(&eff)?;
    p.model = WaModel::HuTrim;
    p.inputs.push(("q", q));
    p.inputs.push(("u_eff", eff.user_pages));
    Ok(p)
}

/// One temperature of a separated-placement workload.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TempAllocation {
    /// LBAs `u_j`.
    pub lbas: f64,
    /// Physical pages `k_j` in the temperature's pool.
    pub pages: f64,
    pub request_prob: f64,
    pub trim_prob: f64,
}

impl TempAllocation {
    /// `rho_j = (k_j - u_j) / u_j`.
    pub fn rho(&self) -> f64 {
        (self.pages - self.lbas) / self.lbas
    }

    pub fn s(&self) -> f64 {
        s(self.trim_prob)
    }

    fn write_rate(&self) -> f64 {
        self.request_prob * (1.0 - self.trim_prob)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TempSpec {
    temps: Vec<TempAllocation>,
}

impl TempSpec {
    pub fn new(temps: Vec<TempAllocation>) -> Result<Self, WaError> {
        if temps.is_empty() {
            return Err(WaError::TemperatureCount {
                expected: 1,
                got: 0,
            });
        }
        for (index, t) in temps.iter().enumerate() {
            if t.lbas.is_nan() || t.lbas <= 0.0 {
                return Err(WaError::Temperature {
                    index,
                    reason: "needs at least one LBA",
                });
            }
            if !(0.0..=1.0).contains(&t.request_prob) {
                return Err(WaError::Temperature {
                    index,
                    reason: "request probability outside [0, 1]",
                });
            }
            if !(0.0..0.5).contains(&t.trim_prob) {
                return Err(WaError::Temperature {
                    index,
                    reason: "trim probability outside [0, 0.5)",
                });
            }
        }
        let sum: f64 = temps.iter().map(|t| t.request_prob).sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(WaError::RequestProbabilities(sum));
        }
        Ok(Self { temps })
    }

    pub fn temps(&self) -> &[TempAllocation] {
        &self.temps
    }

    pub fn len(&self) -> usize {
        self.temps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.temps.is_empty()
    }

    /// Share of host writes per temperature, `p_j (1 - q_j) / sum_i p_i (1 - q_i)`.
    pub fn write_weights(&self) -> Vec<f64> {
        let total: f64 = self.temps.iter().map(TempAllocation::write_rate).sum();
        self.temps.iter().map(|t| t.write_rate() / total).collect()
    }

    pub fn total_pages(&self) -> f64 {
        self.temps.iter().map(|t| t.pages).sum()
    }
}

/// Write-weighted sum of per-temperature Xiang-Trim amplifications.
pub fn wa_multi_temp(spec: &TempSpec) -> Result<WaPrediction, WaError> {
    let mut value = 0.0;
    for (index, (t, alpha)) in spec.temps.iter().zip(spec.write_weights()).enumerate() {
        if t.pages.is_nan() || t.pages <= t.lbas {
            return Err(WaError::Temperature {
                index,
                reason: "pool must have more pages than LBAs",
            });
        }
        value += alpha * wa_xiang_trim(t.rho(), t.trim_prob)?.value;
    }
    Ok(WaPrediction::new(
        WaModel::MultiTemp,
        value,
        vec![
            ("temperatures", spec.len() as f64),
            ("t", spec.total_pages()),
        ],
    ))
}

/// Two-temperature case of [`wa_multi_temp`]; temperature 0 is hot.
pub fn wa_hot_cold_separated(spec: &TempSpec) -> Result<WaPrediction, WaError> {
    if spec.len() != 2 {
        return Err(WaError::TemperatureCount {
            expected: 2,
            got: spec.len(),
        });
    }
    let mut p = wa_multi_temp(spec)?;
    p.model = WaModel::HotColdSeparated;
    let [hot, cold] = [spec.temps[0], spec.temps[1]];
    p.inputs = vec![
        ("rho_hot", hot.rho()),
        ("rho_cold", cold.rho()),
        ("alpha_hot", spec.write_weights()[0]),
        ("q_hot", hot.trim_prob),
        ("q_cold", cold.trim_prob),
    ];
    Ok(p)
}

/// Xiang's uniform model at the device-wide effective overprovisioning
/// `(t - sum_j u_j s_j) / sum_j u_j s_j`, with `t = sum_j k_j`. Ignores how
/// requests are skewed across temperatures, so it is not a valid model for
/// mixed hot/cold data.
pub fn wa_mixed_naive(spec: &TempSpec) -> Result<WaPrediction, WaError> {
    let t = spec.total_pages();
    let u_eff: f64 = spec.temps.iter().map(|x| x.lbas * x.s()).sum();
    let rho = (t - u_eff) / u_eff;
    check_rho(rho)?;
    Ok(WaPrediction::new(
        WaModel::MixedNaive,
        xiang_value(rho)?,
        vec![("t", t), ("u_eff", u_eff), ("rho_eff", rho)],
    ))
}
