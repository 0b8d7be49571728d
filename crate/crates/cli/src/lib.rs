//! Command implementations and the interview HTTP service behind the `tom`
//! binary. Kept as a library so both can be tested in-process.

pub mod commands;
pub mod service;
