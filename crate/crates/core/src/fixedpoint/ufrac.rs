use std::fmt;

use crate::error::{Error, Result};

/// Word width of a fraction. Values live on the grid `k / 2^bits`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub enum FracWidth {
    W32,
    #[default]
    W64,
}

impl FracWidth {
    pub fn from_bits(bits: u32) -> Result<Self> {
        match bits {
            32 => Ok(FracWidth::W32),
            64 => Ok(FracWidth::W64),
            _ => Err(Error::Config(format!("word width must be 32 or 64, got {bits}"))),
        }
    }

    pub fn bits(self) -> u32 {
        match self {
            FracWidth::W32 => 32,
            FracWidth::W64 => 64,
        }
    }

    /// The value 1 expressed in raw units, i.e. `2^bits`.
    pub fn unit(self) -> u128 {
        1u128 << self.bits()
    }

    pub fn max_raw(self) -> u64 {
        match self {
            FracWidth::W32 => u32::MAX as u64,
            FracWidth::W64 => u64::MAX,
        }
    }
}

/// An unsigned fraction in `[0, 1)` stored as `raw / 2^W`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct UFrac {
    raw: u64,
    width: FracWidth,
}

impl UFrac {
    pub fn new(raw: u64, width: FracWidth) -> Result<Self> {
        if raw > width.max_raw() {
            return Err(Error::Range(format!("raw value {raw:#x} exceeds {} bits", width.bits())));
        }
        Ok(UFrac { raw, width })
    }

    /// Builds a fraction from any raw value by reducing it modulo 1.
    pub fn wrapping(raw: u128, width: FracWidth) -> Self {
        UFrac { raw: (raw & width.max_raw() as u128) as u64, width }
    }

    pub fn zero(width: FracWidth) -> Self {
        UFrac { raw: 0, width }
    }

    /// `2^-k`, or an error when it is not representable in `(0, 1)`.
    pub fn pow2_neg(k: u32, width: FracWidth) -> Result<Self> {
        if k == 0 || k > width.bits() {
            return Err(Error::Range(format!("2^-{k} not representable in {} bits", width.bits())));
        }
        Ok(UFrac { raw: 1u64 << (width.bits() - k), width })
    }

    /// `floor(num / den * 2^W)` for `num < den`.
    pub fn from_ratio_floor(num: u128, den: u128, width: FracWidth) -> Result<Self> {
        if den == 0 {
            return Err(Error::DivisionByZero);
        }
        if num >= den {
            return Err(Error::Range(format!("{num}/{den} is not below 1")));
        }
        let raw = if den <= u64::MAX as u128 {
            (num << width.bits()) / den
        } else {
            let n = num_bigint::BigUint::from(num) << width.bits();
            let q = n / num_bigint::BigUint::from(den);
            u128::try_from(q).expect("quotient below 2^W")
        };
        Ok(UFrac { raw: raw as u64, width })
    }

    pub fn raw(self) -> u64 {
        self.raw
    }

    pub fn width(self) -> FracWidth {
        self.width
    }

    pub fn is_zero(self) -> bool {
        self.raw == 0
    }

    pub fn to_f64(self) -> f64 {
        self.raw as f64 / self.width.unit() as f64
    }

    /// Sum without wrap-around; `None` when the result reaches 1.
    pub fn checked_add(self, other: UFrac) -> Option<UFrac> {
        assert_eq!(self.width, other.width, "mixed fraction widths");
        let s = self.raw as u128 + other.raw as u128;
        (s < self.width.unit()).then_some(UFrac { raw: s as u64, width: self.width })
    }

    pub fn wrapping_add(self, other: UFrac) -> UFrac {
        frac_add_mod1(self, other)
    }

    pub fn wrapping_sub(self, other: UFrac) -> UFrac {
        frac_sub_mod1(self, other)
    }

    /// `1 - self` for non-zero values.
    pub fn complement(self) -> Option<UFrac> {
        (self.raw != 0).then(|| UFrac::wrapping(self.width.unit() - self.raw as u128, self.width))
    }
}

impl PartialOrd for UFrac {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        (self.width == other.width).then(|| self.raw.cmp(&other.raw))
    }
}

impl fmt::Debug for UFrac {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "UFrac({:#x}/2^{})", self.raw, self.width.bits())
    }
}

impl fmt::Display for UFrac {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_f64())
    }
}

pub fn frac_add_mod1(x: UFrac, y: UFrac) -> UFrac {
    assert_eq!(x.width, y.width, "mixed fraction widths");
    UFrac::wrapping(x.raw as u128 + y.raw as u128, x.width)
}

pub fn frac_sub_mod1(x: UFrac, y: UFrac) -> UFrac {
    assert_eq!(x.width, y.width, "mixed fraction widths");
    UFrac::wrapping(x.width.unit() + x.raw as u128 - y.raw as u128, x.width)
}

/// How integer quotients `floor(x / y)` are obtained inside the lower-bound loops.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum DivisionMode {
    /// Repeated subtraction, never issuing a divide instruction.
    Subtractive,
    /// A single hardware division.
    #[default]
    Hardware,
    /// One subtraction first, falling back to a division when the quotient exceeds 1.
    Hybrid,
}

impl DivisionMode {
    /// Returns `(floor(x / y), x mod y)`. `y` must be non-zero.
    #[inline]
    pub fn divide(self, x: u128, y: u128) -> (u128, u128) {
        debug_assert!(y != 0);
        match self {
            DivisionMode::Hardware => (x / y, x % y),
            DivisionMode::Subtractive => {
                let (mut k, mut r) = (0u128, x);
                while r >= y {
                    r -= y;
                    k += 1;
                }
                (k, r)
            }
            DivisionMode::Hybrid => {
                if x < y {
                    (0, x)
                } else {
                    let r = x - y;
                    if r < y {
                        (1, r)
                    } else {
                        (1 + r / y, r % y)
                    }
                }
            }
        }
    }

    /// Whether consecutive zero-quotient steps may be collapsed into one loop iteration.
    pub fn batches_chains(self) -> bool {
        !matches!(self, DivisionMode::Subtractive)
    }

    pub fn name(self) -> &'static str {
        match self {
            DivisionMode::Subtractive => "sub",
            DivisionMode::Hardware => "hw",
            DivisionMode::Hybrid => "hybrid",
        }
    }
}

impl std::str::FromStr for DivisionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sub" | "subtractive" => Ok(DivisionMode::Subtractive),
            "hw" | "hardware" => Ok(DivisionMode::Hardware),
            "hybrid" => Ok(DivisionMode::Hybrid),
            _ => Err(Error::Config(format!("unknown division mode `{s}`"))),
        }
    }
}

/// Computes `(floor(q / p), q mod p)` for two fractions with `p > 0`.
pub fn frac_div(q: UFrac, p: UFrac, mode: DivisionMode) -> Result<(u128, UFrac)> {
    assert_eq!(q.width, p.width, "mixed fraction widths");
    if p.raw == 0 {
        return Err(Error::DivisionByZero);
    }
    let (k, r) = mode.divide(q.raw as u128, p.raw as u128);
    Ok((k, UFrac { raw: r as u64, width: q.width }))
}
