//! Twisted Weyl algebras on a one-dimensional lattice.
//!
//! A defining sequence of 2x2 matrices `A_n` over `Z_d` fixes the cross-site
//! commutation phases of Weyl letters. This crate provides exact arithmetic
//! for the word algebra, finite-dimensional spin-chain and Jordan-Wigner
//! representations used as numerical oracles, and Fourier-Bohr analysis of
//! the phase sequences that decide whether the trace is the only
//! shift-invariant state.

pub mod dense;
pub mod error;
pub mod jordanwigner;
mod numeric;
pub mod seqgen;
pub mod spectrum;
pub mod spinchain;
pub mod words;
pub mod zmod;

pub use error::{Error, Result};
pub use numeric::CompensatedSum;
pub use seqgen::{Bitstream, DefiningSequence, SequenceKind, SequenceWindow, TypicalityReport};
pub use words::{GroupElement, MultiIndex, Phase, TwistSource};
pub use zmod::{ModMat2, ModScalar, ModVec2};
