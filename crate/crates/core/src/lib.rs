//! Primitivity and simplicity indices of words in free groups.
//!
//! Finite-index subgroups of `F_N` are enumerated as basepointed covers of
//! the rose, words are rewritten into dual bases of those covers, and
//! primitivity or simplicity of the rewritten word is decided with
//! Whitehead's algorithm. Explicit constructions for the family `a^n b^n`
//! and the arithmetic of the smallest non-divisor `d(n)` are included so
//! that the resulting bounds can be checked at desk scale.

pub mod constructions;
pub mod index;
pub mod numtheory;
pub mod stallings;
pub mod whitehead;
pub mod words;

pub use words::{CyclicWord, Letter, LetterMap, Word, WordError};
