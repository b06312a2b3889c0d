pub mod trace;
pub mod dom;
pub mod engine;
