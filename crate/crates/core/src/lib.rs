//! Teleportation witnesses for bipartite `d x d` quantum systems.
//!
//! The crate builds entanglement witnesses `(|Phi><Phi|)^{T_A}` and the
//! teleportation witnesses derived from them, evaluates them on states,
//! certifies optimality through spanning sets of zero-expectation product
//! vectors, estimates the fully entangled fraction by projected power
//! iteration over the unitary group, decomposes operators over local
//! observable bases and simulates finite-shot estimation of witness values.

pub mod bases;
pub mod error;
pub mod fef;
pub mod io;
pub mod linalg;
pub mod measure;
pub mod optimality;
pub mod seeds;
pub mod states;
pub mod witness;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, Spectrum, Subsystem, C64};

/// Maps `f` over `0..n`, in parallel when the `parallel` feature is on.
/// Output order is the index order either way.
pub(crate) fn indexed_map<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}
