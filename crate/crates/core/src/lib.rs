//! Graded BDI reasoning with a theory of mind.
//!
//! Agents hold beliefs with a certainty degree, signed attitudes (desires and
//! ideals), intentions, social relations and emotions. A forward-chaining
//! engine applies folk-psychology rules tick by tick; an agent simulates
//! others by running the same rules over what it believes about them.

pub mod appraisal;
pub mod combine;
pub mod degree;
pub mod engine;
pub mod exec;
pub mod folk;
pub mod interview;
pub mod logic;
pub mod oracle;
pub mod pattern;
pub mod projection;
pub mod rules;
pub mod scenario;
pub mod session;
pub mod state;
pub mod syntax;
pub mod synth;
