//! Seeded Monte Carlo harness: warmup, measurement and comparison of
//! simulated write amplification with the analytic models.

mod chain;
mod stats;
mod sweeps;

use std::ops::Range;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

pub use chain::{
    moment_study, simulate_chain, spare_band_study, ChainConfig, ChainReport, ChainRun,
    MomentStudy, SpareBandRow,
};
pub use stats::{histogram_moments, mix64, replication_seed, StreamingMoments, Summary};
pub use sweeps::{
    allocate_shares, allocate_split, sweep_cold_fraction, sweep_spare_split, sweep_trim,
    ColdFractionRow, HotColdFrame, SplitRow, SplitSweep, TrimSweepRow,
};

use crate::markov::{self, MarkovError};
use crate::ssd::{Counters, DeviceGeometry, FtlError, FtlState, GeometryError, Lba, SimMetrics};
use crate::workload::{
    route, InUseView, Placement, RequestGenerator, RequestKind, TempClass, WorkloadError,
    WorkloadSpec,
};
use crate::writeamp::{
    wa_agarwal_trim, wa_hot_cold_separated, wa_hu_trim, wa_mixed_naive, wa_multi_temp,
    wa_xiang_trim, HuParams, TempAllocation, TempSpec, WaError, WaModel, WaPrediction,
};

/// Default seed used when none is given.
pub const DEFAULT_SEED: u64 = 0x5EED_2013;
pub const DESK_TOTAL_PAGES: usize = 65_536;
pub const DESK_PAGES_PER_BLOCK: usize = 64;
pub const DESK_RESERVE_BLOCKS: usize = 8;
pub const DESK_MEASURE_REQUESTS: u64 = 3_000_000;
/// Warmup gives up after this many requests per physical page.
pub const WARMUP_CAP_PER_PAGE: u64 = 1_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExperimentError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Workload(#[from] WorkloadError),
    #[error(transparent)]
    Markov(#[from] MarkovError),
    #[error(transparent)]
    Model(#[from] WaError),
    #[error("pool {pool}: {source}")]
    Ftl { pool: usize, source: FtlError },
    #[error("warmup did not reach the erase target within {requests} requests")]
    WarmupStalled { requests: u64 },
}

/// Desk-scale device: 65,536 pages of 64-page blocks, reserve threshold 8.
pub fn desk_geometry(spare_factor: f64) -> Result<DeviceGeometry, GeometryError> {
    DeviceGeometry::with_spare_factor(
        DESK_TOTAL_PAGES,
        spare_factor,
        DESK_PAGES_PER_BLOCK,
        DESK_RESERVE_BLOCKS,
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub geometry: DeviceGeometry,
    pub workload: WorkloadSpec,
    pub seed: u64,
    /// Lower bound on warmup length. The warmup also lasts at least `2u`
    /// requests, until every written pool has erased three times its
    /// block count, and until the In-Use count has once reached its
    /// stationary mean (all of `u` when nothing is trimmed).
    pub warmup_requests: u64,
    pub measure_requests: u64,
    /// Keep a histogram of the In-Use count over the measurement window.
    pub histogram: bool,
    pub runs: usize,
}

impl RunConfig {
    pub fn new(geometry: DeviceGeometry, workload: WorkloadSpec) -> Self {
        Self {
            geometry,
            workload,
            seed: DEFAULT_SEED,
            warmup_requests: 0,
            measure_requests: DESK_MEASURE_REQUESTS,
            histogram: false,
            runs: 1,
        }
    }
}

/// Physical layout of one pool.
#[derive(Debug, Clone, PartialEq)]
pub struct PoolLayout {
    pub geometry: DeviceGeometry,
    /// Host LBAs served by the pool.
    pub lbas: Range<Lba>,
}

/// Pools implied by the workload's placement. A separated pool with `B_j`
/// blocks gets reserve threshold `max(1, round(r B_j / B))`.
pub fn pool_layout(cfg: &RunConfig) -> Result<Vec<PoolLayout>, ExperimentError> {
    let g = cfg.geometry;
    cfg.workload.validate(&g)?;
    let ranges = RequestGenerator::new(&cfg.workload, g.user_lbas()).ranges();
    match cfg.workload.placement(&g) {
        Placement::Mixed => Ok(vec![PoolLayout {
            geometry: g,
            lbas: 0..g.user_lbas() as Lba,
        }]),
        Placement::Separated { pages } => pages
            .iter()
            .zip(ranges)
            .map(|(&k, lbas)| {
                let blocks = k / g.pages_per_block();
                let reserve = ((g.reserve_blocks() * blocks) as f64 / g.blocks() as f64)
                    .round()
                    .max(1.0) as usize;
                let geometry = DeviceGeometry::new(k, lbas.len(), g.pages_per_block(), reserve)?;
                Ok(PoolLayout { geometry, lbas })
            })
            .collect(),
    }
}

/// Analytic predictions applicable to the configured workload.
pub fn predictions(cfg: &RunConfig) -> Result<Vec<WaPrediction>, ExperimentError> {
    let g = cfg.geometry;
    let temps = |pages: &dyn Fn(usize, &Range<Lba>) -> f64| -> Result<TempSpec, WaError> {
        let layout_ranges = RequestGenerator::new(&cfg.workload, g.user_lbas()).ranges();
        TempSpec::new(
            cfg.workload
                .classes()
                .iter()
                .zip(&layout_ranges)
                .enumerate()
                .map(|(j, (c, r))| TempAllocation {
                    lbas: r.len() as f64,
                    pages: pages(j, r),
                    request_prob: c.request_prob,
                    trim_prob: c.trim_prob,
                })
                .collect(),
        )
    };
    let out = match &cfg.workload {
        WorkloadSpec::Sequential => vec![],
        WorkloadSpec::Uniform { trim_prob } => {
            let rho = g.rho();
            let hu = HuParams::greedy(
                g.total_pages(),
                g.user_lbas() as f64,
                g.pages_per_block(),
                g.reserve_blocks(),
            );
            [
                wa_hu_trim(&hu, *trim_prob),
                wa_agarwal_trim(rho, *trim_prob),
                wa_xiang_trim(rho, *trim_prob),
            ]
            .into_iter()
            .filter_map(Result::ok)
            .collect()
        }
        WorkloadSpec::HotCold { .. } | WorkloadSpec::MultiTemp { .. } => {
            match cfg.workload.placement(&g) {
                Placement::Mixed => {
                    let (t, u) = (g.total_pages() as f64, g.user_lbas() as f64);
                    let spec = temps(&|_, r| t * r.len() as f64 / u)?;
                    wa_mixed_naive(&spec).into_iter().collect()
                }
                Placement::Separated { pages } => {
                    let spec = temps(&|j, _| pages[j] as f64)?;
                    let p = if spec.len() == 2
                        && matches!(cfg.workload, WorkloadSpec::HotCold { .. })
                    {
                        wa_hot_cold_separated(&spec)
                    } else {
                        wa_multi_temp(&spec)
                    };
                    p.into_iter().collect()
                }
            }
        }
    };
    Ok(out)
}

/// One replication.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSample {
    pub seed: u64,
    /// Requests actually spent in warmup.
    pub warmup_requests: u64,
    /// Measurement-window metrics summed over pools.
    pub metrics: SimMetrics,
    pub pools: Vec<SimMetrics>,
    /// In-Use count sampled after every measured request.
    pub in_use: StreamingMoments,
    pub in_use_histogram: Option<Vec<u64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub config: RunConfig,
    pub samples: Vec<RunSample>,
    pub measured_wa: Summary,
    /// Measured amplification of each pool across runs.
    pub pool_wa: Vec<Summary>,
    /// In-Use moments pooled over all runs.
    pub in_use: StreamingMoments,
    pub in_use_histogram: Option<Vec<u64>>,
    pub theory: Vec<WaPrediction>,
}

impl RunReport {
    pub fn prediction(&self, model: WaModel) -> Option<&WaPrediction> {
        self.theory.iter().find(|p| p.model == model)
    }
}

struct Device {
    pools: Vec<FtlState>,
    bases: Vec<Lba>,
    view: InUseView,
    generator: RequestGenerator,
    placement: Placement,
}

impl Device {
    fn step(&mut self, rng: &mut ChaCha8Rng) -> Result<(), ExperimentError> {
        let req = self.generator.next_request(self.view.sets(), rng);
        let pool = route(&self.placement, &req);
        let local = req.lba - self.bases[pool];
        let ftl = &mut self.pools[pool];
        match req.kind {
            RequestKind::Write => ftl.host_write(local),
            RequestKind::Trim => ftl.host_trim(local),
        }
        .map_err(|source| ExperimentError::Ftl { pool, source })?;
        self.view.record(&req);
        Ok(())
    }

    fn erases(&self) -> impl Iterator<Item = u64> + '_ {
        self.pools.iter().map(|p| p.counters().block_erases)
    }

    fn snapshot(&self) -> Vec<SimMetrics> {
        self.pools.iter().map(FtlState::metrics).collect()
    }
}

/// `floor(sum u_j s_j)` over the classes that receive requests.
fn generator_fill_target(generator: &RequestGenerator, classes: &[TempClass]) -> usize {
    let mean: f64 = generator
        .ranges()
        .iter()
        .zip(classes)
        .filter(|(_, c)| c.request_prob > 0.0)
        .map(|(r, c)| r.len() as f64 * markov::s(c.trim_prob))
        .sum();
    mean.floor() as usize
}

fn replicate(
    cfg: &RunConfig,
    layout: &[PoolLayout],
    seed: u64,
) -> Result<RunSample, ExperimentError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let generator = RequestGenerator::new(&cfg.workload, cfg.geometry.user_lbas());
    let placement = cfg.workload.placement(&cfg.geometry);
    let mut dev = Device {
        pools: layout.iter().map(|p| FtlState::new(p.geometry)).collect(),
        bases: layout.iter().map(|p| p.lbas.start).collect(),
        view: InUseView::new(&generator.ranges()),
        generator,
        placement,
    };

    let classes = cfg.workload.classes();
    let targets: Vec<u64> = layout
        .iter()
        .enumerate()
        .map(|(j, p)| {
            let written = match dev.placement {
                Placement::Mixed => true,
                Placement::Separated { .. } => classes[j].request_prob > 0.0,
            };
            if written {
                3 * p.geometry.blocks() as u64
            } else {
                0
            }
        })
        .collect();
    let fill = generator_fill_target(&dev.generator, &classes);
    let min_warmup = cfg.warmup_requests.max(2 * cfg.geometry.user_lbas() as u64);
    let cap = min_warmup.max(WARMUP_CAP_PER_PAGE * cfg.geometry.total_pages() as u64);
    let mut warmup = 0u64;
    let mut filled = fill == 0;
    loop {
        filled = filled || dev.view.total() >= fill;
        let done =
            filled && warmup >= min_warmup && dev.erases().zip(&targets).all(|(e, &t)| e >= t);
        if done {
            break;
        }
        if warmup >= cap {
            return Err(ExperimentError::WarmupStalled { requests: warmup });
        }
        dev.step(&mut rng)?;
        warmup += 1;
    }

    let start = dev.snapshot();
    let mut in_use = StreamingMoments::default();
    let mut histogram = cfg
        .histogram
        .then(|| vec![0u64; cfg.geometry.user_lbas() + 1]);
    for _ in 0..cfg.measure_requests {
        dev.step(&mut rng)?;
        let x = dev.view.total();
        in_use.push(x as f64);
        if let Some(h) = histogram.as_mut() {
            h[x] += 1;
        }
    }
    let pools: Vec<SimMetrics> = dev
        .snapshot()
        .iter()
        .zip(&start)
        .map(|(end, begin)| end.since(begin))
        .collect();
    let counters: Counters = pools.iter().map(|m| m.counters).sum();
    let metrics = SimMetrics::new(counters, dev.view.total());
    Ok(RunSample {
        seed,
        warmup_requests: warmup,
        metrics,
        pools,
        in_use,
        in_use_histogram: histogram,
    })
}

/// Runs `cfg.runs` independent replications in parallel; replication `i`
/// is seeded with `replication_seed(cfg.seed, i)`.
pub fn run(cfg: &RunConfig) -> Result<RunReport, ExperimentError> {
    if cfg.runs == 0 {
        return Err(ExperimentError::Config("runs must be at least 1".into()));
    }
    if cfg.measure_requests == 0 {
        return Err(ExperimentError::Config(
            "measure_requests must be at least 1".into(),
        ));
    }
    let layout = pool_layout(cfg)?;
    let theory = predictions(cfg)?;
    let samples = (0..cfg.runs)
        .into_par_iter()
        .map(|i| replicate(cfg, &layout, replication_seed(cfg.seed, i)))
        .collect::<Result<Vec<_>, _>>()?;

    let was: Vec<f64> = samples.iter().map(|s| s.metrics.measured_wa).collect();
    let pool_wa = (0..layout.len())
        .map(|j| {
            let v: Vec<f64> = samples.iter().map(|s| s.pools[j].measured_wa).collect();
            Summary::of(&v)
        })
        .collect();
    let mut in_use = StreamingMoments::default();
    for s in &samples {
        in_use.merge(&s.in_use);
    }
    let in_use_histogram = cfg.histogram.then(|| {
        let mut h = vec![0u64; cfg.geometry.user_lbas() + 1];
        for s in &samples {
            for (a, b) in h
                .iter_mut()
                .zip(s.in_use_histogram.as_deref().unwrap_or(&[]))
            {
                *a += b;
            }
        }
        h
    });
    Ok(RunReport {
        config: cfg.clone(),
        samples,
        measured_wa: Summary::of(&was),
        pool_wa,
        in_use,
        in_use_histogram,
        theory,
    })
}
