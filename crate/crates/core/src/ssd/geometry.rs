use thiserror::Error;

/// Reasons a [`DeviceGeometry`] can be rejected.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GeometryError {
    #[error("pages per block must be positive")]
    ZeroPagesPerBlock,
    #[error("total pages {total} is not a multiple of pages per block {per_block}")]
    Misaligned { total: usize, per_block: usize },
    #[error("user LBAs {user} must satisfy 0 < u < t = {total}")]
    UserCapacity { user: usize, total: usize },
    #[error("reserve threshold {reserve} must satisfy 1 <= r < B = {blocks}")]
    Reserve { reserve: usize, blocks: usize },
    #[error("geometry too large for 32-bit page addressing ({total} pages)")]
    TooLarge { total: usize },
}

/// Physical and logical dimensions of a simulated device.
///
/// `total_pages` is `t`, `user_lbas` is `u`, `pages_per_block` is `n_p` and
/// `reserve_blocks` is the reserve-queue threshold `r` below which garbage
/// collection is triggered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DeviceGeometry {
    total_pages: usize,
    user_lbas: usize,
    pages_per_block: usize,
    reserve_blocks: usize,
}

impl DeviceGeometry {
    pub fn new(
        total_pages: usize,
        user_lbas: usize,
        pages_per_block: usize,
        reserve_blocks: usize,
    ) -> Result<Self, GeometryError> {
        if pages_per_block == 0 {
            return Err(GeometryError::ZeroPagesPerBlock);
        }
        if !total_pages.is_multiple_of(pages_per_block) {
            return Err(GeometryError::Misaligned {
                total: total_pages,
                per_block: pages_per_block,
            });
        }
        if total_pages > u32::MAX as usize {
            return Err(GeometryError::TooLarge { total: total_pages });
        }
        if user_lbas == 0 || user_lbas >= total_pages {
            return Err(GeometryError::UserCapacity {
                user: user_lbas,
                total: total_pages,
            });
        }
        let blocks = total_pages / pages_per_block;
        if reserve_blocks == 0 || reserve_blocks >= blocks {
            return Err(GeometryError::Reserve {
                reserve: reserve_blocks,
                blocks,
            });
        }
        Ok(Self {
            total_pages,
            user_lbas,
            pages_per_block,
            reserve_blocks,
        })
    }

    /// Picks `u` so that `(t - u) / t` is as close as possible to `spare_factor`.
    pub fn with_spare_factor(
        total_pages: usize,
        spare_factor: f64,
        pages_per_block: usize,
        reserve_blocks: usize,
    ) -> Result<Self, GeometryError> {
        let user = (total_pages as f64 * (1.0 - spare_factor)).round();
        let user = if user.is_finite() && user > 0.0 {
            user as usize
        } else {
            0
        };
        Self::new(total_pages, user, pages_per_block, reserve_blocks)
    }

    pub fn total_pages(&self) -> usize {
        self.total_pages
    }

    pub fn user_lbas(&self) -> usize {
        self.user_lbas
    }

    pub fn pages_per_block(&self) -> usize {
        self.pages_per_block
    }

    pub fn reserve_blocks(&self) -> usize {
        self.reserve_blocks
    }

    pub fn blocks(&self) -> usize {
        self.total_pages / self.pages_per_block
    }

    /// `S_f = (t - u) / t`.
    pub fn spare_factor(&self) -> f64 {
        (self.total_pages - self.user_lbas) as f64 / self.total_pages as f64
    }

    /// `rho = (t - u) / u`.
    pub fn rho(&self) -> f64 {
        (self.total_pages - self.user_lbas) as f64 / self.user_lbas as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_device() {
        let g = DeviceGeometry::new(128, 100, 64, 1).unwrap();
        assert_eq!(g.blocks(), 2);
    }

    #[test]
    fn rejects_misaligned_total() {
        assert_eq!(
            DeviceGeometry::new(127, 100, 64, 1),
            Err(GeometryError::Misaligned {
                total: 127,
                per_block: 64
            })
        );
    }

    #[test]
    fn rejects_bad_user_and_reserve() {
        assert!(matches!(
            DeviceGeometry::new(128, 128, 64, 1),
            Err(GeometryError::UserCapacity { .. })
        ));
        assert!(matches!(
            DeviceGeometry::new(128, 0, 64, 1),
            Err(GeometryError::UserCapacity { .. })
        ));
        assert!(matches!(
            DeviceGeometry::new(128, 100, 64, 2),
            Err(GeometryError::Reserve { .. })
        ));
        assert!(matches!(
            DeviceGeometry::new(128, 100, 64, 0),
            Err(GeometryError::Reserve { .. })
        ));
        assert_eq!(
            DeviceGeometry::new(128, 100, 0, 1),
            Err(GeometryError::ZeroPagesPerBlock)
        );
    }

    #[test]
    fn desk_geometry_spare_factor() {
        let g = DeviceGeometry::new(65536, 58982, 64, 16).unwrap();
        assert_eq!(g.blocks(), 1024);
        let expected = (65536.0 - 58982.0) / 65536.0;
        assert!((g.spare_factor() - expected).abs() < 1e-15);
        assert!((g.spare_factor() - 0.1).abs() < 1e-4);
        assert!((g.rho() - 6554.0 / 58982.0).abs() < 1e-15);
    }

    #[test]
    fn spare_factor_constructor_rounds() {
        let g = DeviceGeometry::with_spare_factor(65536, 0.1, 64, 16).unwrap();
        assert_eq!(g.user_lbas(), 58982);
    }
}
