use super::{run, ExperimentError, RunConfig};
use crate::experiment::Summary;
use crate::workload::{lba_ranges, HotColdPlacement, WorkloadSpec};
use crate::writeamp::{WaModel, WaPrediction};

/// Hot/cold workload parameters shared by the cold-fraction and split sweeps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HotColdFrame {
    pub hot_request_prob: f64,
    pub hot_trim_prob: f64,
    pub cold_trim_prob: f64,
}

impl HotColdFrame {
    /// 90% of requests hot, hot Trim 0.2, cold Trim 0.1.
    pub const STANDARD: HotColdFrame = HotColdFrame {
        hot_request_prob: 0.9,
        hot_trim_prob: 0.2,
        cold_trim_prob: 0.1,
    };

    pub fn workload(&self, cold_fraction: f64, placement: HotColdPlacement) -> WorkloadSpec {
        WorkloadSpec::HotCold {
            hot_fraction: 1.0 - cold_fraction,
            hot_request_prob: self.hot_request_prob,
            hot_trim_prob: self.hot_trim_prob,
            cold_trim_prob: self.cold_trim_prob,
            placement,
        }
    }
}

fn value_of(theory: &[WaPrediction], model: WaModel) -> Option<f64> {
    theory.iter().find(|p| p.model == model).map(|p| p.value)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrimSweepRow {
    pub trim_prob: f64,
    pub measured: Summary,
    pub theory: Vec<WaPrediction>,
}

impl TrimSweepRow {
    pub fn predicted(&self, model: WaModel) -> Option<f64> {
        value_of(&self.theory, model)
    }
}

/// Uniform workload at each Trim probability on `base`'s geometry.
pub fn sweep_trim(
    base: &RunConfig,
    trim_probs: &[f64],
) -> Result<Vec<TrimSweepRow>, ExperimentError> {
    trim_probs
        .iter()
        .map(|&q| {
            let cfg = RunConfig {
                workload: WorkloadSpec::Uniform { trim_prob: q },
                ..base.clone()
            };
            let report = run(&cfg)?;
            Ok(TrimSweepRow {
                trim_prob: q,
                measured: report.measured_wa,
                theory: report.theory,
            })
        })
        .collect()
}

/// Gives each pool its minimum `ceil(u_j / n_p)` blocks and divides the
/// remaining blocks by `shares`, rounded to whole blocks with the remainder
/// on the last pool. Returns blocks per pool.
pub fn allocate_shares(
    blocks: usize,
    pages_per_block: usize,
    lbas: &[usize],
    shares: &[f64],
) -> Result<Vec<usize>, ExperimentError> {
    if lbas.len() != shares.len() || lbas.is_empty() {
        return Err(ExperimentError::Config(format!(
            "{} spare shares given for {} pools",
            shares.len(),
            lbas.len()
        )));
    }
    if shares.iter().any(|s| !(0.0..=1.0).contains(s))
        || (shares.iter().sum::<f64>() - 1.0).abs() > 1e-9
    {
        return Err(ExperimentError::Config(format!(
            "spare shares {shares:?} must lie in [0, 1] and sum to 1"
        )));
    }
    let minimum: Vec<usize> = lbas.iter().map(|u| u.div_ceil(pages_per_block)).collect();
    let required: usize = minimum.iter().sum();
    let spare = blocks.checked_sub(required).ok_or_else(|| {
        ExperimentError::Config(format!(
            "{blocks} blocks cannot hold the {required} minimum blocks of the pools"
        ))
    })?;
    let mut out = minimum;
    let mut given = 0;
    let last = out.len() - 1;
    for (j, share) in shares.iter().enumerate().take(last) {
        let extra = ((share * spare as f64).round() as usize).min(spare - given);
        out[j] += extra;
        given += extra;
    }
    out[last] += spare - given;
    Ok(out)
}

/// Two-pool case of [`allocate_shares`]; `split` is the hot share.
/// Returns `(hot_blocks, cold_blocks)`.
pub fn allocate_split(
    blocks: usize,
    pages_per_block: usize,
    hot_lbas: usize,
    cold_lbas: usize,
    split: f64,
) -> Result<(usize, usize), ExperimentError> {
    if !(0.0..=1.0).contains(&split) {
        return Err(ExperimentError::Config(format!(
            "split {split} outside [0, 1]"
        )));
    }
    let b = allocate_shares(
        blocks,
        pages_per_block,
        &[hot_lbas, cold_lbas],
        &[split, 1.0 - split],
    )?;
    Ok((b[0], b[1]))
}

fn hot_cold_lbas(base: &RunConfig, frame: &HotColdFrame, cold_fraction: f64) -> (usize, usize) {
    let spec = frame.workload(cold_fraction, HotColdPlacement::Mixed);
    let r = lba_ranges(&spec.classes(), base.geometry.user_lbas());
    (r[0].len(), r[1].len())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ColdFractionRow {
    pub cold_fraction: f64,
    pub hot_blocks: usize,
    pub mixed: Summary,
    pub separated: Summary,
    pub naive: Option<f64>,
    pub separated_theory: Option<f64>,
}

/// Mixed and separated (even spare split) placement at each cold fraction.
pub fn sweep_cold_fraction(
    base: &RunConfig,
    frame: &HotColdFrame,
    cold_fractions: &[f64],
) -> Result<Vec<ColdFractionRow>, ExperimentError> {
    let g = base.geometry;
    cold_fractions
        .iter()
        .map(|&fc| {
            let (hot_lbas, cold_lbas) = hot_cold_lbas(base, frame, fc);
            let (hot_blocks, _) =
                allocate_split(g.blocks(), g.pages_per_block(), hot_lbas, cold_lbas, 0.5)?;
            let mixed = run(&RunConfig {
                workload: frame.workload(fc, HotColdPlacement::Mixed),
                ..base.clone()
            })?;
            let separated = run(&RunConfig {
                workload: frame.workload(fc, HotColdPlacement::Separated { hot_blocks }),
                ..base.clone()
            })?;
            Ok(ColdFractionRow {
                cold_fraction: fc,
                hot_blocks,
                mixed: mixed.measured_wa,
                separated: separated.measured_wa,
                naive: value_of(&mixed.theory, WaModel::MixedNaive),
                separated_theory: value_of(&separated.theory, WaModel::HotColdSeparated),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitRow {
    pub split: f64,
    pub hot_blocks: usize,
    pub cold_blocks: usize,
    /// `None` when the allocation cannot be simulated.
    pub measured: Option<Summary>,
    pub predicted: Option<f64>,
    /// Why the point was infeasible.
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitSweep {
    pub rows: Vec<SplitRow>,
    pub measured_argmin: Option<f64>,
    pub predicted_argmin: Option<f64>,
}

fn argmin(rows: &[SplitRow], key: impl Fn(&SplitRow) -> Option<f64>) -> Option<f64> {
    rows.iter()
        .filter_map(|r| key(r).filter(|v| v.is_finite()).map(|v| (r.split, v)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(s, _)| s)
}

/// Separated hot/cold placement at each hot share of the spare blocks.
/// Points the device cannot sustain are reported, not fatal.
pub fn sweep_spare_split(
    base: &RunConfig,
    frame: &HotColdFrame,
    cold_fraction: f64,
    splits: &[f64],
) -> Result<SplitSweep, ExperimentError> {
    let g = base.geometry;
    let (hot_lbas, cold_lbas) = hot_cold_lbas(base, frame, cold_fraction);
    let rows = splits
        .iter()
        .map(|&split| {
            let (hot_blocks, cold_blocks) =
                allocate_split(g.blocks(), g.pages_per_block(), hot_lbas, cold_lbas, split)?;
            let cfg = RunConfig {
                workload: frame.workload(cold_fraction, HotColdPlacement::Separated { hot_blocks }),
                ..base.clone()
            };
            let (measured, predicted, error) = match run(&cfg) {
                Ok(report) => (
                    Some(report.measured_wa),
                    value_of(&report.theory, WaModel::HotColdSeparated),
                    None,
                ),
                Err(e @ ExperimentError::Config(_)) => return Err(e),
                Err(e) => (
                    None,
                    super::predictions(&cfg)
                        .ok()
                        .and_then(|t| value_of(&t, WaModel::HotColdSeparated)),
                    Some(e.to_string()),
                ),
            };
            Ok(SplitRow {
                split,
                hot_blocks,
                cold_blocks,
                measured,
                predicted,
                error,
            })
        })
        .collect::<Result<Vec<_>, ExperimentError>>()?;
    Ok(SplitSweep {
        measured_argmin: argmin(&rows, |r| r.measured.map(|m| m.mean)),
        predicted_argmin: argmin(&rows, |r| r.predicted),
        rows,
    })
}
