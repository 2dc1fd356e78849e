pub mod condense;
pub mod detect;
pub mod eval;
pub mod synth;
pub mod vq;
