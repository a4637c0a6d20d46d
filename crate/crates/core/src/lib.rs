//! Probabilistic bisimilarity for finite pLTSs and probabilistic pushdown
//! automata with exact rational arithmetic.

pub mod bisim;
pub mod bpa;
pub mod dist;
pub mod error;
pub mod format;
pub mod gadgets;
pub mod game;
pub mod machines;
pub mod oca;
pub mod oracle;
pub mod partition;
pub mod plts;
pub mod random;
pub mod rational;
pub mod reduction;
pub mod system;
pub mod vpda;

pub use bisim::{bisim_finite, dist_equiv, refine_step, sim_n};
pub use dist::Dist;
pub use error::{Error, Result};
pub use machines::{ActionClass, Config, ControlId, HeadTarget, Ppda, PpdaBuilder, Stack, SymbolId};
pub use oracle::{bounded_equiv, full_equiv_finite, Oracle};
pub use partition::Partition;
pub use plts::{ActionId, Plts, PltsBuilder, StateId};
pub use rational::Rational;
pub use reduction::{lift_plts, lift_ppda_stack, lift_ppda_state, LiftedPlts, LiftedPpda};
