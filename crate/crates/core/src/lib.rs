pub mod apps;
pub mod error;
pub mod estimators;
pub mod linalg;
pub mod randgen;
pub mod spiked;
pub mod stats;
