use std::collections::VecDeque;

use thiserror::Error;

use super::geometry::DeviceGeometry;
use super::metrics::{Counters, SimMetrics};

/// Logical block address. One LBA occupies exactly one physical page.
pub type Lba = u32;
/// Index of an erase block, `0..B`.
pub type BlockId = u32;
/// Flat physical page address, `block * n_p + offset`.
pub type PageAddr = u32;

/// State of one physical page.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PageState {
    Free,
    Valid(Lba),
    Invalid,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FtlError {
    #[error("LBA {lba} out of range (u = {user_lbas})")]
    LbaOutOfRange { lba: u64, user_lbas: usize },
    #[error("garbage collection requested with no occupied blocks")]
    NoOccupiedBlocks,
    #[error(
        "garbage collection cannot free space: every occupied block holds {pages_per_block} valid pages \
         (user capacity too close to physical capacity)"
    )]
    NoReclaimableBlock { pages_per_block: usize },
    #[error("reserve queue exhausted while replacing the current block")]
    ReserveExhausted,
}

/// Page-mapped log-structured FTL with greedy garbage collection.
///
/// Writes (host and relocation) always go to the next free page of the
/// single current block. When the current block fills it moves to the tail
/// of the occupied queue and the head of the reserve queue takes its place.
/// If the reserve queue then holds fewer than `r` erased blocks, victims are
/// reclaimed one at a time until it holds at least `r` again.
#[derive(Debug, Clone)]
pub struct FtlState {
    geometry: DeviceGeometry,
    forward: Vec<Option<PageAddr>>,
    pages: Vec<PageState>,
    valid_per_block: Vec<u32>,
    current_block: BlockId,
    next_free: usize,
    occupied: VecDeque<BlockId>,
    reserve: VecDeque<BlockId>,
    counters: Counters,
    in_use: usize,
}

impl FtlState {
    /// An empty, fully erased device. Block 0 is the current block and the
    /// rest are queued in the reserve queue in id order.
    pub fn new(geometry: DeviceGeometry) -> Self {
        let blocks = geometry.blocks();
        Self {
            geometry,
            forward: vec![None; geometry.user_lbas()],
            pages: vec![PageState::Free; geometry.total_pages()],
            valid_per_block: vec![0; blocks],
            current_block: 0,
            next_free: 0,
            occupied: VecDeque::with_capacity(blocks),
            reserve: (1..blocks as BlockId).collect(),
            counters: Counters::default(),
            in_use: 0,
        }
    }

    pub fn geometry(&self) -> &DeviceGeometry {
        &self.geometry
    }

    pub fn counters(&self) -> &Counters {
        &self.counters
    }

    /// Number of LBAs whose most recent request was a write.
    pub fn in_use_count(&self) -> usize {
        self.in_use
    }

    pub fn is_in_use(&self, lba: Lba) -> bool {
        self.forward
            .get(lba as usize)
            .is_some_and(|slot| slot.is_some())
    }

    pub fn mapping(&self, lba: Lba) -> Option<PageAddr> {
        self.forward.get(lba as usize).copied().flatten()
    }

    pub fn page_state(&self, addr: PageAddr) -> PageState {
        self.pages[addr as usize]
    }

    pub fn valid_pages_in(&self, block: BlockId) -> usize {
        self.valid_per_block[block as usize] as usize
    }

    pub fn current_block(&self) -> BlockId {
        self.current_block
    }

    pub fn occupied_queue(&self) -> &VecDeque<BlockId> {
        &self.occupied
    }

    pub fn reserve_queue(&self) -> &VecDeque<BlockId> {
        &self.reserve
    }

    fn check_lba(&self, lba: Lba) -> Result<(), FtlError> {
        if (lba as usize) < self.geometry.user_lbas() {
            Ok(())
        } else {
            Err(FtlError::LbaOutOfRange {
                lba: lba as u64,
                user_lbas: self.geometry.user_lbas(),
            })
        }
    }

    /// Host write of one LBA.
    pub fn host_write(&mut self, lba: Lba) -> Result<(), FtlError> {
        self.check_lba(lba)?;
        self.counters.host_page_writes += 1;
        let filled = self.program(lba)?;
        if filled {
            while self.reserve.len() < self.geometry.reserve_blocks() {
                self.garbage_collect()?;
            }
        }
        Ok(())
    }

    /// Host Trim of one LBA. Trimming an LBA that is not In-Use is a counted no-op.
    pub fn host_trim(&mut self, lba: Lba) -> Result<(), FtlError> {
        self.check_lba(lba)?;
        match self.forward[lba as usize].take() {
            Some(addr) => {
                self.invalidate(addr);
                self.in_use -= 1;
                self.counters.trim_requests += 1;
            }
            None => self.counters.noop_trims += 1,
        }
        Ok(())
    }

    /// Occupied block with the fewest valid pages; ties go to the block that
    /// entered the occupied queue first.
    pub fn select_victim(&self) -> Result<BlockId, FtlError> {
        self.victim_position().map(|idx| self.occupied[idx])
    }

    fn victim_position(&self) -> Result<usize, FtlError> {
        let mut best: Option<(usize, u32)> = None;
        for (idx, &block) in self.occupied.iter().enumerate() {
            let valid = self.valid_per_block[block as usize];
            if best.is_none_or(|(_, v)| valid < v) {
                best = Some((idx, valid));
                if valid == 0 {
                    break;
                }
            }
        }
        best.map(|(idx, _)| idx).ok_or(FtlError::NoOccupiedBlocks)
    }

    /// Reclaims one victim block: relocates its valid pages through the
    /// normal write path, erases it and appends it to the reserve queue.
    /// Returns the number of pages copied.
    pub fn garbage_collect(&mut self) -> Result<usize, FtlError> {
        let idx = self.victim_position()?;
        let victim = self.occupied[idx];
        let n_p = self.geometry.pages_per_block();
        if self.valid_per_block[victim as usize] as usize >= n_p {
            return Err(FtlError::NoReclaimableBlock {
                pages_per_block: n_p,
            });
        }
        self.occupied.remove(idx);

        let start = victim as usize * n_p;
        let survivors: Vec<Lba> = self.pages[start..start + n_p]
            .iter()
            .filter_map(|p| match p {
                PageState::Valid(lba) => Some(*lba),
                _ => None,
            })
            .collect();
        for &lba in &survivors {
            self.counters.gc_page_copies += 1;
            self.program(lba)?;
        }

        debug_assert_eq!(self.valid_per_block[victim as usize], 0);
        self.pages[start..start + n_p].fill(PageState::Free);
        self.counters.block_erases += 1;
        self.reserve.push_back(victim);
        Ok(survivors.len())
    }

    pub fn metrics(&self) -> SimMetrics {
        SimMetrics::new(self.counters, self.in_use)
    }

    /// Places `lba` at the next free page of the current block. Returns
    /// `true` when this write filled the block and it was rotated out.
    fn program(&mut self, lba: Lba) -> Result<bool, FtlError> {
        let n_p = self.geometry.pages_per_block();
        let addr = (self.current_block as usize * n_p + self.next_free) as PageAddr;
        debug_assert_eq!(self.pages[addr as usize], PageState::Free);
        self.pages[addr as usize] = PageState::Valid(lba);
        self.valid_per_block[self.current_block as usize] += 1;
        match self.forward[lba as usize].replace(addr) {
            Some(old) => self.invalidate(old),
            None => self.in_use += 1,
        }
        self.next_free += 1;
        if self.next_free < n_p {
            return Ok(false);
        }
        let next = self.reserve.pop_front().ok_or(FtlError::ReserveExhausted)?;
        self.occupied.push_back(self.current_block);
        self.current_block = next;
        self.next_free = 0;
        Ok(true)
    }

    fn invalidate(&mut self, addr: PageAddr) {
        debug_assert!(matches!(self.pages[addr as usize], PageState::Valid(_)));
        self.pages[addr as usize] = PageState::Invalid;
        let block = addr as usize / self.geometry.pages_per_block();
        self.valid_per_block[block] -= 1;
    }

    /// Full consistency audit of the mapping, page states and queues.
    /// Linear in `t`; intended for tests and debugging.
    pub fn audit(&self) -> Result<(), String> {
        let g = &self.geometry;
        let n_p = g.pages_per_block();
        let (mut free, mut valid, mut invalid) = (0usize, 0usize, 0usize);
        let mut per_block = vec![0u32; g.blocks()];
        let mut free_per_block = vec![0usize; g.blocks()];
        for (addr, state) in self.pages.iter().enumerate() {
            match *state {
                PageState::Free => {
                    free += 1;
                    free_per_block[addr / n_p] += 1;
                }
                PageState::Invalid => invalid += 1,
                PageState::Valid(lba) => {
                    valid += 1;
                    per_block[addr / n_p] += 1;
                    if self.mapping(lba) != Some(addr as PageAddr) {
                        return Err(format!(
                            "page {addr} holds LBA {lba} but the map points to {:?}",
                            self.mapping(lba)
                        ));
                    }
                }
            }
        }
        if free + valid + invalid != g.total_pages() {
            return Err("page states do not partition the device".into());
        }
        let mapped = self.forward.iter().filter(|m| m.is_some()).count();
        if mapped != valid || mapped != self.in_use {
            return Err(format!(
                "{valid} valid pages, {mapped} mapped LBAs, in-use counter {}",
                self.in_use
            ));
        }
        for (lba, slot) in self.forward.iter().enumerate() {
            if let Some(addr) = slot {
                if self.pages[*addr as usize] != PageState::Valid(lba as Lba) {
                    return Err(format!(
                        "LBA {lba} maps to page {addr} which does not hold it"
                    ));
                }
            }
        }
        if per_block != self.valid_per_block {
            return Err("cached per-block valid counts are stale".into());
        }
        for &b in &self.reserve {
            if free_per_block[b as usize] != n_p {
                return Err(format!("reserved block {b} is not fully erased"));
            }
        }
        for &b in &self.occupied {
            if free_per_block[b as usize] != 0 {
                return Err(format!("occupied block {b} still has free pages"));
            }
        }
        if free_per_block[self.current_block as usize] != n_p - self.next_free {
            return Err("current block free pages disagree with the write pointer".into());
        }
        if self.reserve.len() + self.occupied.len() + 1 != g.blocks() {
            return Err("blocks lost from the queues".into());
        }
        let programs = self.counters.host_page_writes + self.counters.gc_page_copies;
        let erased_pages = self.counters.block_erases * n_p as u64;
        if programs != (valid + invalid) as u64 + erased_pages {
            return Err(format!(
                "{programs} programs but {valid} valid + {invalid} invalid + {erased_pages} erased"
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> FtlState {
        // 4 blocks of 4 pages, 8 LBAs, one reserved block.
        FtlState::new(DeviceGeometry::new(16, 8, 4, 1).unwrap())
    }

    #[test]
    fn new_device_is_empty() {
        let ftl = FtlState::new(DeviceGeometry::new(128, 100, 64, 1).unwrap());
        assert_eq!(ftl.reserve_queue().len(), 1);
        assert!(ftl.occupied_queue().is_empty());
        assert_eq!(ftl.in_use_count(), 0);
        assert_eq!(*ftl.counters(), Counters::default());
        ftl.audit().unwrap();
    }

    #[test]
    fn fresh_write_and_overwrite() {
        let mut ftl = tiny();
        ftl.host_write(3).unwrap();
        assert_eq!(ftl.in_use_count(), 1);
        assert_eq!(ftl.page_state(0), PageState::Valid(3));

        ftl.host_write(3).unwrap();
        assert_eq!(ftl.in_use_count(), 1);
        assert_eq!(ftl.page_state(0), PageState::Invalid);
        assert_eq!(ftl.page_state(1), PageState::Valid(3));
        ftl.audit().unwrap();
    }

    #[test]
    fn write_trim_write() {
        let mut ftl = tiny();
        ftl.host_write(5).unwrap();
        ftl.host_trim(5).unwrap();
        assert_eq!(ftl.in_use_count(), 0);
        ftl.host_write(5).unwrap();
        assert!(ftl.is_in_use(5));
        assert_eq!(ftl.page_state(0), PageState::Invalid);
        assert_eq!(ftl.page_state(1), PageState::Valid(5));
        assert_eq!(ftl.counters().host_page_writes, 2);
        assert_eq!(ftl.counters().trim_requests, 1);
        ftl.audit().unwrap();
    }

    #[test]
    fn trim_of_unwritten_lba_is_noop() {
        let mut ftl = tiny();
        ftl.host_trim(2).unwrap();
        assert_eq!(ftl.counters().noop_trims, 1);
        assert_eq!(ftl.counters().trim_requests, 0);
        assert_eq!(ftl.page_state(0), PageState::Free);
    }

    #[test]
    fn out_of_range_lba() {
        let mut ftl = tiny();
        assert!(matches!(
            ftl.host_write(8),
            Err(FtlError::LbaOutOfRange { .. })
        ));
        assert!(matches!(
            ftl.host_trim(99),
            Err(FtlError::LbaOutOfRange { .. })
        ));
        assert_eq!(ftl.counters().host_page_writes, 0);
    }

    /// 5 blocks of 10 pages; LBAs 0..30 fill blocks 0, 1 and 2 in order.
    fn three_full_blocks() -> FtlState {
        let mut ftl = FtlState::new(DeviceGeometry::new(50, 30, 10, 1).unwrap());
        for lba in 0..30 {
            ftl.host_write(lba).unwrap();
        }
        assert_eq!(
            ftl.occupied_queue().iter().copied().collect::<Vec<_>>(),
            [0, 1, 2]
        );
        ftl
    }

    #[test]
    fn victim_is_block_with_fewest_valid() {
        let mut ftl = FtlState::new(DeviceGeometry::new(50, 30, 10, 1).unwrap());
        assert_eq!(ftl.select_victim(), Err(FtlError::NoOccupiedBlocks));
        ftl = three_full_blocks();
        // valid counts [5, 2, 7]
        for lba in (0..5).chain(10..18).chain(20..23) {
            ftl.host_trim(lba).unwrap();
        }
        assert_eq!(ftl.select_victim().unwrap(), 1);
    }

    #[test]
    fn victim_tie_goes_to_oldest() {
        let mut ftl = three_full_blocks();
        // valid counts [3, 3, 10]
        for lba in (0..7).chain(10..17) {
            ftl.host_trim(lba).unwrap();
        }
        assert_eq!(ftl.select_victim().unwrap(), 0);
        ftl.audit().unwrap();
    }

    #[test]
    fn fully_invalid_block_wins() {
        let mut ftl = three_full_blocks();
        for lba in (0..3).chain(20..30) {
            ftl.host_trim(lba).unwrap();
        }
        assert_eq!(ftl.select_victim().unwrap(), 2);
        assert_eq!(ftl.garbage_collect().unwrap(), 0);
    }

    #[test]
    fn empty_victim_copies_nothing() {
        let mut ftl = tiny();
        for lba in 0..4 {
            ftl.host_write(lba).unwrap();
        }
        for lba in 0..4 {
            ftl.host_trim(lba).unwrap();
        }
        let before = *ftl.counters();
        let copied = ftl.garbage_collect().unwrap();
        assert_eq!(copied, 0);
        assert_eq!(ftl.counters().gc_page_copies, before.gc_page_copies);
        assert_eq!(ftl.counters().block_erases, before.block_erases + 1);
        ftl.audit().unwrap();
    }

    #[test]
    fn victim_copies_are_counted() {
        let mut ftl = tiny();
        for lba in 0..4 {
            ftl.host_write(lba).unwrap();
        }
        ftl.host_trim(1).unwrap();
        let copied = ftl.garbage_collect().unwrap();
        assert_eq!(copied, 3);
        assert_eq!(ftl.counters().gc_page_copies, 3);
        for lba in [0, 2, 3] {
            assert!(ftl.is_in_use(lba));
        }
        ftl.audit().unwrap();
    }

    #[test]
    fn gc_keeps_reserve_threshold() {
        let mut ftl = FtlState::new(DeviceGeometry::new(64, 40, 4, 3).unwrap());
        let mut lba = 0;
        for i in 0..5000u32 {
            lba = (lba * 7 + i) % 40;
            ftl.host_write(lba).unwrap();
            assert!(ftl.reserve_queue().len() >= 3);
        }
        ftl.audit().unwrap();
    }

    #[test]
    fn unreclaimable_device_errors() {
        // Two blocks, r = 1, and more user data than one block can hold.
        let mut ftl = FtlState::new(DeviceGeometry::new(128, 100, 64, 1).unwrap());
        let mut result = Ok(());
        for lba in 0..64 {
            result = ftl.host_write(lba);
        }
        assert_eq!(
            result,
            Err(FtlError::NoReclaimableBlock {
                pages_per_block: 64
            })
        );
    }
}
