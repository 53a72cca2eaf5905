pub mod eval;
pub mod filter;
pub mod fuse;
pub mod pipeline;
pub mod qa_gen;
pub mod synth;
pub mod tcm_cmd;
