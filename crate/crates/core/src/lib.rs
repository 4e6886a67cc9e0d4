//! Construction and verification of prime-avoiding perfect powers.
//!
//! A number `m` is prime avoiding when `m + u` is composite for every `|u|`
//! up to a Rankin-type bound. This crate builds perfect k-th powers `m^k`
//! with that property by covering the whole interval `[m^k - y, m^k + y]`
//! with small prime divisors:
//!
//! * [`sieve`] — prime generation, factorization primitives, smooth counting;
//! * [`modular`] — Jacobi symbols, k-th power congruence root counting and
//!   extraction, CRT combination;
//! * [`primality`] — the strong probable-prime battery used during search;
//! * [`construction`] — parameter derivation, the covering residue system,
//!   the exceptional set, prime matching, and the final j-search;
//! * [`certify`] — per-u compositeness certificates and their independent
//!   verification;
//! * [`analysis`] — exact desk-scale checks of the sieve estimates the
//!   construction relies on, plus maximal prime gap records.

pub mod analysis;
pub mod certify;
pub mod construction;
pub mod hp;
pub mod modular;
pub mod primality;
pub mod sieve;

pub use construction::{construct, ConstructOptions, ConstructionResult, Mode, Params};
