//! Executable checks of the folding inequality for atomic boundary measures.

mod folding;

pub use folding::{
    fold_once, ChainReport, fold_sequence, FoldingInstance, FoldingReport, ProfileKind, ShiftKind, Side, WeightKind,
};
