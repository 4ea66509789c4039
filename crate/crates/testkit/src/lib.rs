//! Reference oracles and synthetic data for the geneprio test suites.
//!
//! Everything in [`oracle`] is written the slow, obvious way and shares no
//! code path with the library routines it checks (except where a check is
//! explicitly about an algebraic shortcut, as with [`oracle::naive_mrmr`]).

pub mod oracle;
pub mod synth;
