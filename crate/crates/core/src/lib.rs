//! Classical-information capacities of quantum channels.
//!
//! The crate computes, for finite-dimensional channels given in Kraus form,
//! the Shannon capacity (product inputs, product measurements), the Holevo
//! capacity (product inputs, collective measurements) and an upper bound on
//! the entangled-input/product-measurement capacity expressed through a single
//! average input state and a POVM. It also builds conditional (adaptive)
//! product measurements on two and three channel uses and checks the
//! information identities that make those capacities additive.
//!
//! Modules, bottom-up:
//!
//! - [`qmat`]: complex matrices, eigendecomposition, entropies.
//! - [`channel`]: Kraus channels, duals, POVMs, measure-and-prepare channels.
//! - [`info`]: mutual informations and the block-diagonal states behind them.
//! - [`capacity`]: optimizers and brute-force oracles.
//! - [`protocol`]: conditional POVMs and the additivity experiments.
//!
//! With the default `parallel` feature, restarts and instance sweeps fan out
//! over rayon; results are merged in index order, so output is identical with
//! the feature disabled.

pub mod capacity;
pub mod channel;
pub mod error;
pub mod info;
pub mod parallel;
pub mod protocol;
pub mod qmat;

pub use error::{Error, Result};
