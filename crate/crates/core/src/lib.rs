//! Motif-aware streaming graph partitioning.
//!
//! Edges arrive one at a time. Those that could belong to a frequent query
//! motif are held in a sliding window until evicted, then placed together
//! with the motif matches they take part in.

pub mod alloc;
pub mod eval;
pub mod graph;
pub mod harness;
pub mod io;
pub mod matcher;
pub mod signature;
pub mod trie;
