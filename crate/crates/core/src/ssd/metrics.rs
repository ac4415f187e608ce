use std::ops::Sub;

/// Monotone event counters kept by the FTL.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct Counters {
    pub host_page_writes: u64,
    pub gc_page_copies: u64,
    pub block_erases: u64,
    pub trim_requests: u64,
    pub noop_trims: u64,
}

impl Counters {
    /// Host writes plus relocation copies.
    pub fn page_programs(&self) -> u64 {
        self.host_page_writes + self.gc_page_copies
    }

    /// `(host + copies) / host`, or 1.0 when nothing has been written.
    pub fn write_amplification(&self) -> f64 {
        if self.host_page_writes == 0 {
            1.0
        } else {
            self.page_programs() as f64 / self.host_page_writes as f64
        }
    }
}

impl Sub for Counters {
    type Output = Counters;

    fn sub(self, earlier: Counters) -> Counters {
        Counters {
            host_page_writes: self.host_page_writes - earlier.host_page_writes,
            gc_page_copies: self.gc_page_copies - earlier.gc_page_copies,
            block_erases: self.block_erases - earlier.block_erases,
            trim_requests: self.trim_requests - earlier.trim_requests,
            noop_trims: self.noop_trims - earlier.noop_trims,
        }
    }
}

impl std::iter::Sum for Counters {
    fn sum<I: Iterator<Item = Counters>>(iter: I) -> Counters {
        iter.fold(Counters::default(), |acc, c| Counters {
            host_page_writes: acc.host_page_writes + c.host_page_writes,
            gc_page_copies: acc.gc_page_copies + c.gc_page_copies,
            block_erases: acc.block_erases + c.block_erases,
            trim_requests: acc.trim_requests + c.trim_requests,
            noop_trims: acc.noop_trims + c.noop_trims,
        })
    }
}

/// Point-in-time view of an FTL's counters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimMetrics {
    pub counters: Counters,
    pub measured_wa: f64,
    pub in_use_count: usize,
}

impl SimMetrics {
    pub fn new(counters: Counters, in_use_count: usize) -> Self {
        Self {
            counters,
            measured_wa: counters.write_amplification(),
            in_use_count,
        }
    }

    /// Counters accumulated since `earlier`, with WA recomputed over that window.
    pub fn since(&self, earlier: &SimMetrics) -> SimMetrics {
        SimMetrics::new(self.counters - earlier.counters, self.in_use_count)
    }
}
