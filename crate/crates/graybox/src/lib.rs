//! File formats, solution reports and the benchmark harness around [`graybox_core`].

pub mod bench;
pub mod error;
pub mod image;
pub mod solve;
pub mod weights;

pub use error::{IoError, Result};
