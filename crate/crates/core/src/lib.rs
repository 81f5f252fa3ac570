//! Simulation core for GHZ-based authenticated quantum direct communication.
//!
//! The crate is organized around a small exact statevector simulator
//! ([`qcore`]) on top of which the dense-coding codec ([`densecode`]), the
//! authentication handshake ([`auth`]), the message-transmission protocols
//! ([`proto`]) and the attack analysis ([`adversary`]) are built. Everything
//! is deterministic given an explicit RNG stream, so whole protocol runs
//! replay bit-for-bit from a seed.
//!
//! The crate is `no_std` (with `alloc`); IO, file formats and the CLI live in
//! the companion `qdc-cli` crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod adversary;
pub mod auth;
pub mod densecode;
pub mod ecc;
mod error;
pub mod proto;
pub mod qcore;
pub mod rngutil;

pub use error::{Error, Result};
