//! Exact computational kernels for additive problems over k-th powers:
//! representation counting, singular series and local densities, Weyl sums
//! with major/minor arc classification, exact even moments by orthogonality,
//! and error-term audits with exceptional-set statistics.
//!
//! Everything that is a count is an exact integer; everything that is a real
//! number carries either a compensated-summation guarantee or an explicit
//! uncertainty estimate. The crate is `no_std`-compatible (`alloc` required);
//! the `std` feature additionally enables chunked multi-threaded drivers.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod arcs;
pub mod arith;
pub mod audit;
pub mod error;
pub mod fit;
pub mod kahan;
pub mod moments;
pub mod par;
pub mod series;

mod fmath;

pub use error::{Error, Result};

/// Resource limits for table-building operations.
///
/// Operations that allocate large frequency tables or run long quadratures
/// predict their cost first and fail with [`Error::Budget`] instead of
/// exhausting memory.
#[derive(Debug, Clone, Copy)]
pub struct Budget {
    pub max_bytes: u64,
    pub max_evals: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_bytes: 4 << 30,
            max_evals: 200_000_000,
        }
    }
}

impl Budget {
    pub fn check_bytes(&self, what: &'static str, needed: u128) -> Result<()> {
        if needed > self.max_bytes as u128 {
            return Err(Error::Budget {
                what,
                needed,
                limit: self.max_bytes as u128,
            });
        }
        Ok(())
    }

    pub fn check_evals(&self, what: &'static str, needed: u128) -> Result<()> {
        if needed > self.max_evals as u128 {
            return Err(Error::Budget {
                what,
                needed,
                limit: self.max_evals as u128,
            });
        }
        Ok(())
    }
}
