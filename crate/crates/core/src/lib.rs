pub mod analysis;
pub mod coins;
pub mod engine;
pub mod matrix;
