use std::time::{Duration, Instant};

use crate::error::{Error, Result};

/// Limits on exhaustive enumeration.
#[derive(Clone, Debug)]
pub struct Budget {
    /// Largest domain on which subset enumeration is attempted.
    pub max_points: usize,
    /// Largest number of subsets (or subset pairs) a single enumeration may visit.
    pub max_subsets: u128,
    deadline: Option<(Instant, u64)>,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_points: 20,
            max_subsets: 1 << 24,
            deadline: None,
        }
    }
}

impl Budget {
    pub fn new(max_points: usize, max_subsets: u128) -> Self {
        Budget {
            max_points,
            max_subsets,
            deadline: None,
        }
    }

    pub fn unlimited() -> Self {
        Budget::new(64, u128::MAX)
    }

    pub fn with_timeout_ms(mut self, ms: u64) -> Self {
        self.deadline = Some((Instant::now() + Duration::from_millis(ms), ms));
        self
    }

    /// Refuses enumerations over more than `max_points` free points.
    pub fn check_points(&self, what: &str, points: usize) -> Result<()> {
        if points > self.max_points {
            return Err(Error::Budget {
                what: format!("{what} (points)"),
                required: points as u128,
                limit: self.max_points as u128,
            });
        }
        Ok(())
    }

    pub fn check_subsets(&self, what: &str, required: u128) -> Result<()> {
        if required > self.max_subsets {
            return Err(Error::Budget {
                what: what.to_string(),
                required,
                limit: self.max_subsets,
            });
        }
        Ok(())
    }

    pub fn check_time(&self) -> Result<()> {
        if let Some((deadline, ms)) = self.deadline {
            if Instant::now() > deadline {
                return Err(Error::Timeout(ms));
            }
        }
        Ok(())
    }
}

/// `2^n` as a saturating u128.
pub fn pow2(n: usize) -> u128 {
    if n >= 127 {
        u128::MAX
    } else {
        1u128 << n
    }
}
