//! Page-granular log-structured SSD model with greedy garbage collection.

mod ftl;
mod geometry;
mod metrics;

pub use ftl::{BlockId, FtlError, FtlState, Lba, PageAddr, PageState};
pub use geometry::{DeviceGeometry, GeometryError};
pub use metrics::{Counters, SimMetrics};
