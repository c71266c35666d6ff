//! Global cap on the number of candidates an exhaustive scan may visit.
//!
//! The cap resolves in this order: a value installed with [`set_limit`], the
//! `DIOPH_BUDGET` environment variable, then [`DEFAULT_LIMIT`].

use std::sync::atomic::{AtomicU64, Ordering};

use crate::error::{Error, Result};

pub const DEFAULT_LIMIT: u128 = 400_000_000;
pub const ENV_VAR: &str = "DIOPH_BUDGET";

static OVERRIDE: AtomicU64 = AtomicU64::new(0);

/// Installs a process-wide limit. Zero clears the override.
pub fn set_limit(limit: u64) {
    OVERRIDE.store(limit, Ordering::Relaxed);
}

pub fn limit() -> u128 {
    let installed = OVERRIDE.load(Ordering::Relaxed);
    if installed > 0 {
        return installed as u128;
    }
    std::env::var(ENV_VAR).ok().and_then(|v| v.trim().parse::<u128>().ok()).filter(|&v| v > 0).unwrap_or(DEFAULT_LIMIT)
}

/// Fails with [`Error::Budget`] when `requested` exceeds the current limit.
pub fn check(requested: u128) -> Result<()> {
    let budget = limit();
    if requested > budget {
        Err(Error::Budget { requested, budget })
    } else {
        Ok(())
    }
}

/// `base^exp` saturating at `u128::MAX`, for candidate counts.
pub fn pow_count(base: u128, exp: u32) -> u128 {
    let mut acc: u128 = 1;
    for _ in 0..exp {
        acc = acc.saturating_mul(base);
    }
    acc
}

/// Binomial coefficient saturating at `u128::MAX`.
pub fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul(n - i) {
            Some(v) => v / (i + 1),
            None => return u128::MAX,
        };
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomial_small_values() {
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(40, 20), 137_846_528_820);
        assert_eq!(binomial(3, 5), 0);
    }

    #[test]
    fn pow_count_saturates() {
        assert_eq!(pow_count(3, 4), 81);
        assert_eq!(pow_count(u128::MAX, 2), u128::MAX);
    }
}
