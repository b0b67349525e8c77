use std::fmt;

use serde::{Deserialize, Serialize};

use crate::arith::inv_mod;
use crate::error::{invalid, Result};

/// Largest modulus a [`ResidueMatrix`] can carry (entries are packed in 12 bits).
pub const MAX_LEVEL: u32 = 4095;

/// A 2x2 matrix over Z/nZ, entries row-major and reduced into [0, n).
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ResidueMatrix {
    level: u32,
    e: [u32; 4],
}

impl ResidueMatrix {
    pub fn new(level: u32, entries: [i64; 4]) -> Result<Self> {
        if level == 0 || level > MAX_LEVEL {
            return invalid(format!("level {level} outside 1..={MAX_LEVEL}"));
        }
        let n = level as i64;
        Ok(ResidueMatrix {
            level,
            e: entries.map(|x| x.rem_euclid(n) as u32),
        })
    }

    pub fn identity(level: u32) -> Self {
        ResidueMatrix {
            level,
            e: [1 % level, 0, 0, 1 % level],
        }
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn entries(&self) -> [u32; 4] {
        self.e
    }

    pub fn det(&self) -> u32 {
        let n = self.level as u64;
        let [a, b, c, d] = self.e.map(|x| x as u64);
        ((a * d + n * n - b * c) % n) as u32
    }

    pub fn trace(&self) -> u32 {
        (self.e[0] + self.e[3]) % self.level
    }

    pub fn is_invertible(&self) -> bool {
        crate::arith::gcd(self.det() as u64, self.level as u64) == 1
    }

    pub fn mul(&self, o: &Self) -> Self {
        debug_assert_eq!(self.level, o.level);
        let n = self.level as u64;
        let [a, b, c, d] = self.e.map(|x| x as u64);
        let [p, q, r, s] = o.e.map(|x| x as u64);
        ResidueMatrix {
            level: self.level,
            e: [
                ((a * p + b * r) % n) as u32,
                ((a * q + b * s) % n) as u32,
                ((c * p + d * r) % n) as u32,
                ((c * q + d * s) % n) as u32,
            ],
        }
    }

    pub fn inverse(&self) -> Option<Self> {
        let n = self.level as u64;
        let di = inv_mod(self.det() as u64, n)?;
        let [a, b, c, d] = self.e.map(|x| x as u64);
        let neg = |x: u64| (n - x % n) % n;
        Some(ResidueMatrix {
            level: self.level,
            e: [
                (d * di % n) as u32,
                (neg(b) * di % n) as u32,
                (neg(c) * di % n) as u32,
                (a * di % n) as u32,
            ],
        })
    }

    /// Reduction modulo a divisor of the level.
    pub fn reduce(&self, level: u32) -> Self {
        debug_assert_eq!(self.level % level, 0);
        ResidueMatrix {
            level,
            e: self.e.map(|x| x % level),
        }
    }

    pub fn is_identity_mod(&self, m: u32) -> bool {
        let [a, b, c, d] = self.e;
        a % m == 1 % m && b % m == 0 && c % m == 0 && d % m == 1 % m
    }

    /// Sign of the permutation induced on the three nonzero vectors of F_2^2:
    /// 1 for odd, 0 for even.
    pub fn signature_mod2(&self) -> u8 {
        let m = ResidueMatrix {
            level: 2,
            e: self.e.map(|x| x % 2),
        };
        let id = ResidueMatrix::identity(2);
        // Involutions of GL2(F2) = S3 are the transpositions.
        u8::from(m != id && m.mul(&m) == id)
    }

    /// Canonical encoding: level in bits 48.., entries in 12-bit fields.
    pub fn pack(&self) -> u64 {
        let [a, b, c, d] = self.e.map(|x| x as u64);
        (self.level as u64) << 48 | a << 36 | b << 24 | c << 12 | d
    }

    pub fn unpack(k: u64) -> Self {
        ResidueMatrix {
            level: (k >> 48) as u32,
            e: [
                ((k >> 36) & 0xfff) as u32,
                ((k >> 24) & 0xfff) as u32,
                ((k >> 12) & 0xfff) as u32,
                (k & 0xfff) as u32,
            ],
        }
    }
}

impl fmt::Debug for ResidueMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c, d] = self.e;
        write!(f, "[[{a},{b}],[{c},{d}]] mod {}", self.level)
    }
}

/// JSON form of a generator list: `{"level": n, "generators": [[a,b,c,d], ...]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GeneratorList {
    pub level: u32,
    pub generators: Vec<[i64; 4]>,
}

/// Multiply packed matrices of a common level.
#[inline]
pub(crate) fn mul_packed(x: u64, y: u64) -> u64 {
    ResidueMatrix::unpack(x)
        .mul(&ResidueMatrix::unpack(y))
        .pack()
}
