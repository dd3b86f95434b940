//! Two-length configurations of the points `{a·x}` and their continued-fraction walk.
//!
//! Lengths are exact integers over a modulus `unit` (2^W for word fractions,
//! or the denominator of an exact rational). The configuration `(i, t)` has
//! `q_i` intervals of length `θ_{i-1,t}` and `q_{i-1,t}` of length `θ_i`, with
//! the identity `q_i·θ_{i-1,t} + q_{i-1,t}·θ_i = unit`.

use crate::error::{Error, Result};
use crate::fixedpoint::UFrac;

/// Which of the two lengths a configuration step splits first.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SplitDirection {
    /// Even depth: the short length `θ_i` is cut off the long one.
    ThetaFirst,
    /// Odd depth: the roles are reversed.
    ThetaPrevFirst,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CfConfig {
    pub depth: u32,
    pub step: u128,
    pub theta_prev: u128,
    pub theta_cur: u128,
    pub q_prev: u128,
    pub q_cur: u128,
    pub unit: u128,
}

impl CfConfig {
    /// Configuration `(0, 0)` for a word fraction `a > 0`.
    pub fn init(a: UFrac) -> Result<Self> {
        Self::rational(a.raw() as u128, a.width().unit())
    }

    /// Configuration `(0, 0)` for the exact rational `num / den`, `0 < num < den`.
    pub fn rational(num: u128, den: u128) -> Result<Self> {
        if num == 0 {
            return Err(Error::Degenerate("a = 0 has no continued-fraction expansion"));
        }
        if num >= den {
            return Err(Error::Range(format!("{num}/{den} is not in (0, 1)")));
        }
        Ok(CfConfig { depth: 0, step: 0, theta_prev: den, theta_cur: num, q_prev: 0, q_cur: 1, unit: den })
    }

    pub fn is_terminal(&self) -> bool {
        self.theta_cur == 0
    }

    /// Partial quotient `k_{i+1} = floor(θ_{i-1,0} / θ_i)` of the current depth.
    pub fn quotient(&self) -> Option<u128> {
        let base = self.theta_prev + self.step * self.theta_cur;
        (self.theta_cur != 0).then(|| base / self.theta_cur)
    }

    /// Advances one step: `(i, t+1)` while the long length still holds two short
    /// ones, otherwise `(i+1, 0)`. `None` once the expansion has terminated.
    pub fn next(&self) -> Option<CfConfig> {
        if self.theta_cur == 0 {
            return None;
        }
        let mut c = *self;
        if self.theta_prev >= 2 * self.theta_cur {
            c.step += 1;
            c.theta_prev -= self.theta_cur;
            c.q_prev += self.q_cur;
        } else {
            c.depth += 1;
            c.step = 0;
            c.theta_prev = self.theta_cur;
            c.theta_cur = self.theta_prev - self.theta_cur;
            c.q_prev = self.q_cur;
            c.q_cur = self.q_prev + self.q_cur;
        }
        Some(c)
    }

    /// Jumps from `(i, t)` straight to `(i+1, 0)` with one division.
    /// Returns the new configuration and the quotient used.
    pub fn next_div(&self) -> Option<(CfConfig, u128)> {
        if self.theta_cur == 0 {
            return None;
        }
        let k = self.theta_prev / self.theta_cur;
        let c = CfConfig {
            depth: self.depth + 1,
            step: 0,
            theta_prev: self.theta_cur,
            theta_cur: self.theta_prev - k * self.theta_cur,
            q_prev: self.q_cur,
            q_cur: self.q_prev + k * self.q_cur,
            unit: self.unit,
        };
        Some((c, k))
    }

    /// Number of points in the configuration, `q_i + q_{i-1,t}`.
    pub fn points(&self) -> u128 {
        self.q_cur + self.q_prev
    }

    /// Checks `q_i·θ_{i-1,t} + q_{i-1,t}·θ_i = unit`.
    pub fn identity_holds(&self) -> bool {
        let lhs = self
            .q_cur
            .checked_mul(self.theta_prev)
            .and_then(|x| self.q_prev.checked_mul(self.theta_cur).and_then(|y| x.checked_add(y)));
        lhs == Some(self.unit)
    }

    pub fn parity(&self) -> u32 {
        self.depth % 2
    }

    pub fn split_direction(&self) -> SplitDirection {
        if self.depth.is_multiple_of(2) {
            SplitDirection::ThetaFirst
        } else {
            SplitDirection::ThetaPrevFirst
        }
    }
}

pub fn cf_init(a: UFrac) -> Result<CfConfig> {
    CfConfig::init(a)
}

pub fn cf_next(c: &CfConfig) -> Option<CfConfig> {
    c.next()
}

pub fn cf_next_div(c: &CfConfig) -> Option<(CfConfig, u128)> {
    c.next_div()
}

pub fn parity(c: &CfConfig) -> u32 {
    c.parity()
}

pub fn split_direction(c: &CfConfig) -> SplitDirection {
    c.split_direction()
}

/// Partial quotients collected along a full walk with `next_div`.
pub fn quotients(mut c: CfConfig) -> Vec<u128> {
    let mut out = Vec::new();
    while let Some((n, k)) = c.next_div() {
        out.push(k);
        c = n;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn walk_of_14_over_45() {
        let mut c = CfConfig::rational(14, 45).unwrap();
        let mut rows = vec![(c.depth, c.step, c.q_prev, c.q_cur, c.theta_prev, c.theta_cur)];
        while let Some(n) = c.next() {
            assert!(n.identity_holds());
            rows.push((n.depth, n.step, n.q_prev, n.q_cur, n.theta_prev, n.theta_cur));
            c = n;
        }
        let expected = vec![
            (0, 0, 0, 1, 45, 14),
            (0, 1, 1, 1, 31, 14),
            (0, 2, 2, 1, 17, 14),
            (1, 0, 1, 3, 14, 3),
            (1, 1, 4, 3, 11, 3),
            (1, 2, 7, 3, 8, 3),
            (1, 3, 10, 3, 5, 3),
            (2, 0, 3, 13, 3, 2),
            (3, 0, 13, 16, 2, 1),
            (3, 1, 29, 16, 1, 1),
            (4, 0, 16, 45, 1, 0),
        ];
        assert_eq!(rows, expected);
        assert!(c.next().is_none());
    }

    #[test]
    fn quotients_of_14_over_45() {
        assert_eq!(quotients(CfConfig::rational(14, 45).unwrap()), vec![3, 4, 1, 2]);
    }

    #[test]
    fn zero_is_degenerate() {
        assert!(matches!(CfConfig::rational(0, 45), Err(Error::Degenerate(_))));
    }

    #[test]
    fn directions_alternate() {
        let c = CfConfig::rational(14, 45).unwrap();
        assert_eq!(c.split_direction(), SplitDirection::ThetaFirst);
        let (c1, _) = c.next_div().unwrap();
        assert_eq!(c1.split_direction(), SplitDirection::ThetaPrevFirst);
        assert_eq!(c1.parity(), 1);
    }
}
