//! Seeded request generators for the uniform, Trim-modified, hot/cold and
//! N-temperature workloads, and the routing rule for separated pools.

use std::ops::Range;

use rand::Rng;
use thiserror::Error;

use crate::ssd::{DeviceGeometry, Lba};

const PROB_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WorkloadError {
    #[error("{name} = {value} must lie in [0, 1)")]
    TrimProbability { name: &'static str, value: f64 },
    #[error("{name} = {value} is not a probability")]
    Probability { name: &'static str, value: f64 },
    #[error("{name} sum to {sum}, expected 1")]
    NotNormalized { name: &'static str, sum: f64 },
    #[error("workload needs at least one temperature")]
    NoTemperatures,
    #[error("temperature {temperature} receives no LBAs (u = {user_lbas})")]
    EmptyTemperature {
        temperature: usize,
        user_lbas: usize,
    },
    #[error("{count} pool allocations for {temperatures} temperatures")]
    AllocationArity { count: usize, temperatures: usize },
    #[error("pool allocations sum to {sum} pages, device has {total}")]
    AllocationTotal { sum: usize, total: usize },
    #[error("pool {pool} has {pages} pages, not a multiple of {per_block}")]
    AllocationMisaligned {
        pool: usize,
        pages: usize,
        per_block: usize,
    },
    #[error("pool {pool} has {pages} pages but must hold more than its {lbas} LBAs")]
    AllocationTooSmall {
        pool: usize,
        pages: usize,
        lbas: usize,
    },
}

/// One temperature class of data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TempClass {
    /// Fraction `f_j` of the user LBA space.
    pub lba_fraction: f64,
    /// Probability `p_j` that a request targets this class.
    pub request_prob: f64,
    /// Probability `q_j` that such a request is a Trim.
    pub trim_prob: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HotColdPlacement {
    /// Hot and cold data share one block pool.
    Mixed,
    /// Hot data owns `hot_blocks` erase blocks; cold data owns the rest.
    Separated { hot_blocks: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub enum WorkloadSpec {
    /// Writes uniform over all LBAs, Trims uniform over In-Use LBAs with
    /// probability `trim_prob`.
    Uniform { trim_prob: f64 },
    /// Writes cycling LBAs `0..u` in order; no Trims.
    Sequential,
    HotCold {
        hot_fraction: f64,
        hot_request_prob: f64,
        hot_trim_prob: f64,
        cold_trim_prob: f64,
        placement: HotColdPlacement,
    },
    /// `N` temperatures, each owning `pages[j]` physical pages.
    MultiTemp {
        classes: Vec<TempClass>,
        pages: Vec<usize>,
    },
}

/// Where requests land physically.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Placement {
    Mixed,
    /// Physical pages owned by each temperature's pool.
    Separated {
        pages: Vec<usize>,
    },
}

impl WorkloadSpec {
    pub fn classes(&self) -> Vec<TempClass> {
        match self {
            WorkloadSpec::Uniform { trim_prob } => vec![TempClass {
                lba_fraction: 1.0,
                request_prob: 1.0,
                trim_prob: *trim_prob,
            }],
            WorkloadSpec::Sequential => vec![TempClass {
                lba_fraction: 1.0,
                request_prob: 1.0,
                trim_prob: 0.0,
            }],
            WorkloadSpec::HotCold {
                hot_fraction,
                hot_request_prob,
                hot_trim_prob,
                cold_trim_prob,
                ..
            } => vec![
                TempClass {
                    lba_fraction: *hot_fraction,
                    request_prob: *hot_request_prob,
                    trim_prob: *hot_trim_prob,
                },
                TempClass {
                    lba_fraction: 1.0 - hot_fraction,
                    request_prob: 1.0 - hot_request_prob,
                    trim_prob: *cold_trim_prob,
                },
            ],
            WorkloadSpec::MultiTemp { classes, .. } => classes.clone(),
        }
    }

    pub fn placement(&self, geometry: &DeviceGeometry) -> Placement {
        match self {
            WorkloadSpec::Uniform { .. } | WorkloadSpec::Sequential => Placement::Mixed,
            WorkloadSpec::HotCold { placement, .. } => match placement {
                HotColdPlacement::Mixed => Placement::Mixed,
                HotColdPlacement::Separated { hot_blocks } => {
                    let hot = hot_blocks * geometry.pages_per_block();
                    Placement::Separated {
                        pages: vec![hot, geometry.total_pages().saturating_sub(hot)],
                    }
                }
            },
            WorkloadSpec::MultiTemp { pages, .. } => Placement::Separated {
                pages: pages.clone(),
            },
        }
    }

    /// Checks probabilities, the LBA partition and (for separated
    /// placements) the pool allocation against `geometry`.
    pub fn validate(&self, geometry: &DeviceGeometry) -> Result<(), WorkloadError> {
        let classes = self.classes();
        if classes.is_empty() {
            return Err(WorkloadError::NoTemperatures);
        }
        for c in &classes {
            if !(0.0..1.0).contains(&c.trim_prob) {
                return Err(WorkloadError::TrimProbability {
                    name: "trim probability",
                    value: c.trim_prob,
                });
            }
            if !(0.0..=1.0).contains(&c.request_prob) {
                return Err(WorkloadError::Probability {
                    name: "request probability",
                    value: c.request_prob,
                });
            }
            if !(c.lba_fraction > 0.0 && c.lba_fraction <= 1.0) {
                return Err(WorkloadError::Probability {
                    name: "LBA fraction",
                    value: c.lba_fraction,
                });
            }
        }
        let p_sum: f64 = classes.iter().map(|c| c.request_prob).sum();
        if (p_sum - 1.0).abs() > PROB_TOLERANCE {
            return Err(WorkloadError::NotNormalized {
                name: "request probabilities",
                sum: p_sum,
            });
        }
        let f_sum: f64 = classes.iter().map(|c| c.lba_fraction).sum();
        if (f_sum - 1.0).abs() > PROB_TOLERANCE {
            return Err(WorkloadError::NotNormalized {
                name: "LBA fractions",
                sum: f_sum,
            });
        }
        let ranges = lba_ranges(&classes, geometry.user_lbas());
        if let Some(j) = ranges.iter().position(|r| r.is_empty()) {
            return Err(WorkloadError::EmptyTemperature {
                temperature: j,
                user_lbas: geometry.user_lbas(),
            });
        }
        if let Placement::Separated { pages } = self.placement(geometry) {
            if pages.len() != classes.len() {
                return Err(WorkloadError::AllocationArity {
                    count: pages.len(),
                    temperatures: classes.len(),
                });
            }
            let sum: usize = pages.iter().sum();
            if sum != geometry.total_pages() {
                return Err(WorkloadError::AllocationTotal {
                    sum,
                    total: geometry.total_pages(),
                });
            }
            for (pool, (&k, range)) in pages.iter().zip(&ranges).enumerate() {
                if k % geometry.pages_per_block() != 0 {
                    return Err(WorkloadError::AllocationMisaligned {
                        pool,
                        pages: k,
                        per_block: geometry.pages_per_block(),
                    });
                }
                if k <= range.len() {
                    return Err(WorkloadError::AllocationTooSmall {
                        pool,
                        pages: k,
                        lbas: range.len(),
                    });
                }
            }
        }
        Ok(())
    }
}

/// Contiguous LBA interval of every temperature: sizes `floor(u * f_j)`,
/// with the remainder going to the last temperature.
pub fn lba_ranges(classes: &[TempClass], user_lbas: usize) -> Vec<Range<Lba>> {
    let mut ranges = Vec::with_capacity(classes.len());
    let mut start = 0usize;
    for (j, c) in classes.iter().enumerate() {
        let end = if j + 1 == classes.len() {
            user_lbas
        } else {
            // Small slack so that e.g. 0.29 * 100 lands on 29, not 28.
            let size = (user_lbas as f64 * c.lba_fraction + 1e-9).floor() as usize;
            (start + size).min(user_lbas)
        };
        ranges.push(start as Lba..end as Lba);
        start = end;
    }
    ranges
}

/// LBA interval owned by one temperature of `spec`.
pub fn lba_range(spec: &WorkloadSpec, temperature: usize, user_lbas: usize) -> Range<Lba> {
    lba_ranges(&spec.classes(), user_lbas)[temperature].clone()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RequestKind {
    Write,
    Trim,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Request {
    pub kind: RequestKind,
    pub lba: Lba,
    pub temperature: usize,
}

/// Pool that serves `request` under `placement`.
pub fn route(placement: &Placement, request: &Request) -> usize {
    match placement {
        Placement::Mixed => 0,
        Placement::Separated { .. } => request.temperature,
    }
}

/// Set of In-Use LBAs within one LBA range, with O(1) insert, remove and
/// uniform sampling.
#[derive(Debug, Clone)]
pub struct InUseSet {
    base: Lba,
    members: Vec<Lba>,
    slot: Vec<u32>,
}

const ABSENT: u32 = u32::MAX;

impl InUseSet {
    pub fn new(range: Range<Lba>) -> Self {
        Self {
            base: range.start,
            members: Vec::new(),
            slot: vec![ABSENT; range.len()],
        }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, lba: Lba) -> bool {
        self.slot[(lba - self.base) as usize] != ABSENT
    }

    pub fn insert(&mut self, lba: Lba) -> bool {
        let idx = (lba - self.base) as usize;
        if self.slot[idx] != ABSENT {
            return false;
        }
        self.slot[idx] = self.members.len() as u32;
        self.members.push(lba);
        true
    }

    pub fn remove(&mut self, lba: Lba) -> bool {
        let idx = (lba - self.base) as usize;
        let pos = self.slot[idx];
        if pos == ABSENT {
            return false;
        }
        self.slot[idx] = ABSENT;
        self.members.swap_remove(pos as usize);
        if let Some(&moved) = self.members.get(pos as usize) {
            self.slot[(moved - self.base) as usize] = pos;
        }
        true
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<Lba> {
        if self.members.is_empty() {
            None
        } else {
            Some(self.members[rng.random_range(0..self.members.len())])
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = Lba> + '_ {
        self.members.iter().copied()
    }
}

/// Per-temperature In-Use sets kept in step with the simulator.
#[derive(Debug, Clone)]
pub struct InUseView {
    sets: Vec<InUseSet>,
}

impl InUseView {
    pub fn new(ranges: &[Range<Lba>]) -> Self {
        Self {
            sets: ranges.iter().cloned().map(InUseSet::new).collect(),
        }
    }

    pub fn sets(&self) -> &[InUseSet] {
        &self.sets
    }

    pub fn total(&self) -> usize {
        self.sets.iter().map(InUseSet::len).sum()
    }

    /// Applies the In-Use transition of `request`.
    pub fn record(&mut self, request: &Request) {
        let set = &mut self.sets[request.temperature];
        match request.kind {
            RequestKind::Write => set.insert(request.lba),
            RequestKind::Trim => set.remove(request.lba),
        };
    }
}

#[derive(Debug, Clone)]
struct ClassSampler {
    range: Range<Lba>,
    cumulative: f64,
    trim_prob: f64,
}

/// Draws requests for a validated [`WorkloadSpec`].
///
/// The temperature is selected first with probability `p_j`, then the
/// request is a Trim with that temperature's `q_j`. A Trim drawn while the
/// temperature has no In-Use LBAs becomes a Write.
#[derive(Debug, Clone)]
pub struct RequestGenerator {
    classes: Vec<ClassSampler>,
    sequential: Option<Lba>,
    user_lbas: usize,
}

impl RequestGenerator {
    pub fn new(spec: &WorkloadSpec, user_lbas: usize) -> Self {
        let classes = spec.classes();
        let ranges = lba_ranges(&classes, user_lbas);
        let mut acc = 0.0;
        let samplers = classes
            .iter()
            .zip(ranges)
            .map(|(c, range)| {
                acc += c.request_prob;
                ClassSampler {
                    range,
                    cumulative: acc,
                    trim_prob: c.trim_prob,
                }
            })
            .collect();
        Self {
            classes: samplers,
            sequential: matches!(spec, WorkloadSpec::Sequential).then_some(0),
            user_lbas,
        }
    }

    pub fn ranges(&self) -> Vec<Range<Lba>> {
        self.classes.iter().map(|c| c.range.clone()).collect()
    }

    pub fn temperatures(&self) -> usize {
        self.classes.len()
    }

    pub fn next_request<R: Rng + ?Sized>(&mut self, in_use: &[InUseSet], rng: &mut R) -> Request {
        if let Some(cursor) = self.sequential.as_mut() {
            let lba = *cursor;
            *cursor = (lba + 1) % self.user_lbas as Lba;
            return Request {
                kind: RequestKind::Write,
                lba,
                temperature: 0,
            };
        }
        let temperature = if self.classes.len() == 1 {
            0
        } else {
            let x: f64 = rng.random();
            self.classes
                .iter()
                .position(|c| x < c.cumulative)
                .unwrap_or(self.classes.len() - 1)
        };
        let class = &self.classes[temperature];
        if class.trim_prob > 0.0 && rng.random::<f64>() < class.trim_prob {
            if let Some(lba) = in_use[temperature].sample(rng) {
                return Request {
                    kind: RequestKind::Trim,
                    lba,
                    temperature,
                };
            }
        }
        Request {
            kind: RequestKind::Write,
            lba: rng.random_range(class.range.clone()),
            temperature,
        }
    }
}
