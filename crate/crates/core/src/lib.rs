pub mod dsl;
pub mod engine;
pub mod gaussian;
pub mod numerics;
pub mod classify;
pub mod op;
pub mod scalar;
pub mod report;
pub mod scenario;
