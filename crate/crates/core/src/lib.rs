pub mod autodiff;
pub mod mlp;
pub mod trefftz;
pub mod physics;
pub mod training;
pub mod harness;
pub mod tracing;
pub mod experiments;
