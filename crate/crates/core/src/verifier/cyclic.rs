//! Cyclicity of E(F_p) through rational l-torsion.

use std::collections::HashMap;

use num_integer::Roots;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::curve::{check_hasse, FpCurve, Point};
use crate::arith::{factor, inv_mod, mul_mod};
use crate::error::{Error, Result};

/// Largest l handled with division polynomials; beyond it the degree
/// (l^2 - 1)/2 makes them too slow and the Sylow certificate takes over.
pub const DIVISION_POLY_MAX_L: u64 = 13;

/// Dense polynomial over F_p, lowest coefficient first, no trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poly {
    pub c: Vec<u64>,
}

impl Poly {
    pub fn new(mut c: Vec<u64>) -> Self {
        while c.last() == Some(&0) {
            c.pop();
        }
        Poly { c }
    }

    pub fn degree(&self) -> Option<usize> {
        self.c.len().checked_sub(1)
    }

    fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    fn mul(&self, o: &Self, p: u64) -> Self {
        if self.is_zero() || o.is_zero() {
            return Poly::new(Vec::new());
        }
        let mut out = vec![0u64; self.c.len() + o.c.len() - 1];
        for (i, &a) in self.c.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in o.c.iter().enumerate() {
                out[i + j] = (out[i + j] + mul_mod(a, b, p)) % p;
            }
        }
        Poly::new(out)
    }

    fn sub(&self, o: &Self, p: u64) -> Self {
        let n = self.c.len().max(o.c.len());
        let out = (0..n)
            .map(|i| {
                let a = self.c.get(i).copied().unwrap_or(0);
                let b = o.c.get(i).copied().unwrap_or(0);
                (a + p - b) % p
            })
            .collect();
        Poly::new(out)
    }

    fn rem(&self, m: &Self, p: u64) -> Self {
        let dm = m.degree().expect("nonzero modulus");
        let inv = inv_mod(m.c[dm], p).expect("unit leading coefficient");
        let mut r = self.c.clone();
        while r.len() > dm {
            let k = r.len() - 1;
            let q = mul_mod(r[k], inv, p);
            if q != 0 {
                for (i, &mc) in m.c.iter().enumerate() {
                    let idx = k - dm + i;
                    r[idx] = (r[idx] + p - mul_mod(q, mc, p)) % p;
                }
            }
            r.pop();
            while r.last() == Some(&0) {
                r.pop();
            }
        }
        Poly::new(r)
    }

    fn gcd(&self, o: &Self, p: u64) -> Self {
        let (mut a, mut b) = (self.clone(), o.clone());
        while !b.is_zero() {
            let r = a.rem(&b, p);
            a = b;
            b = r;
        }
        a
    }

    /// X^k mod m.
    fn x_pow_mod(k: u64, m: &Self, p: u64) -> Self {
        let x = Poly::new(vec![0, 1]).rem(m, p);
        let mut acc = Poly::new(vec![1]).rem(m, p);
        for bit in (0..64 - k.leading_zeros()).rev() {
            acc = acc.mul(&acc, p).rem(m, p);
            if (k >> bit) & 1 == 1 {
                acc = acc.mul(&x, p).rem(m, p);
            }
        }
        acc
    }

    /// Number of distinct roots in F_p.
    pub fn count_roots(&self, p: u64) -> usize {
        if self.degree().unwrap_or(0) == 0 {
            return 0;
        }
        let xp = Poly::x_pow_mod(p, self, p);
        let f = xp.sub(&Poly::new(vec![0, 1]), p);
        self.gcd(&f, p).degree().unwrap_or(0)
    }
}

/// The l-division polynomial of y^2 = x^3 + ax + b in x alone, for odd l.
/// With psi_n = g_n for odd n and psi_n = 2y g_n for even n.
pub fn division_polynomial(e: &FpCurve, l: usize) -> Poly {
    let p = e.p;
    let (a, b) = (e.a, e.b);
    let m = |x: u64, y: u64| mul_mod(x, y, p);
    let neg = |x: u64| (p - x % p) % p;
    let mut g: Vec<Poly> = vec![
        Poly::new(vec![]),
        Poly::new(vec![1]),
        Poly::new(vec![1]),
        Poly::new(vec![neg(m(a, a)), m(12, b), m(6, a), 0, 3]),
        Poly::new(vec![
            neg(2 * (m(8, m(b, b)) + m(a, m(a, a))) % p),
            neg(m(8, m(a, b))),
            neg(m(10, m(a, a))),
            m(40, b),
            m(10, a),
            0,
            2,
        ]),
    ];
    // (2y)^2 = 4(x^3 + ax + b).
    let f4 = Poly::new(vec![m(4, b), m(4, a), 0, 4]);
    let f4sq = f4.mul(&f4, p);
    for n in g.len()..=l.max(4) {
        let k = n / 2;
        let next = if n % 2 == 1 {
            let t1 = g[k + 2].mul(&g[k], p).mul(&g[k], p).mul(&g[k], p);
            let t2 = g[k - 1]
                .mul(&g[k + 1], p)
                .mul(&g[k + 1], p)
                .mul(&g[k + 1], p);
            if k % 2 == 0 {
                f4sq.mul(&t1, p).sub(&t2, p)
            } else {
                t1.sub(&f4sq.mul(&t2, p), p)
            }
        } else {
            let t1 = g[k + 2].mul(&g[k - 1], p).mul(&g[k - 1], p);
            let t2 = g[k - 2].mul(&g[k + 1], p).mul(&g[k + 1], p);
            g[k].mul(&t1.sub(&t2, p), p)
        };
        g.push(next);
    }
    g.swap_remove(l)
}

/// Whether E[l] lies in E(F_p), by division polynomials. Assumes l^2 | N
/// for odd l.
pub fn full_torsion(e: &FpCurve, l: u64) -> bool {
    if l == 2 {
        let cubic = Poly::new(vec![e.b, e.a, 0, 1]);
        return cubic.count_roots(e.p) == 3;
    }
    if e.p % l != 1 {
        // The Weil pairing puts mu_l inside F_p.
        return false;
    }
    // All (l^2 - 1)/2 x-coordinates rational makes Frobenius +-1 on E[l];
    // -1 would force N = 4 mod l, so l | N pins it to +1.
    let psi = division_polynomial(e, l as usize);
    psi.count_roots(e.p) as u64 == (l * l - 1) / 2
}

/// Smallest j with l^j pt = O, given that some power of l kills pt.
fn l_exponent(e: &FpCurve, mut pt: Point, l: u64) -> u32 {
    let mut j = 0;
    while pt.is_some() {
        pt = e.mul(l, pt);
        j += 1;
    }
    j
}

/// Whether x lies in the cyclic group generated by g, where x has order
/// l^jx and g has order l^jg >= l^jx. Baby-step giant-step in <l^(jg-jx) g>.
fn in_cyclic(e: &FpCurve, x: Point, g: Point, l: u64, jg: u32, jx: u32) -> bool {
    let h = e.mul(l.pow(jg - jx), g);
    let order = l.pow(jx);
    let s = order.sqrt() + 1;
    let mut baby: HashMap<Point, u64> = HashMap::with_capacity(s as usize);
    let mut q = None;
    for i in 0..s {
        baby.entry(q).or_insert(i);
        q = e.add(q, h);
    }
    let back = e.neg(e.mul(s, h));
    let mut y = x;
    for _ in 0..=s {
        if baby.contains_key(&y) {
            return true;
        }
        y = e.add(y, back);
    }
    false
}

/// Whether the l-Sylow subgroup of E(F_p) has rank 2, by random elements.
/// A point of order l^k proves it cyclic; two elements neither of whose
/// cyclic groups contains the other prove rank 2. Only the search is random.
pub fn sylow_rank_two(e: &FpCurve, l: u64, n: u64, seed: u64) -> Result<bool> {
    let mut k = 0;
    let mut m = n;
    while m.is_multiple_of(l) {
        m /= l;
        k += 1;
    }
    if k < 2 {
        return Ok(false);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ e.p ^ (l << 40));
    let (mut best, mut b) = (None, 0u32);
    for _ in 0..128 {
        let r = e.mul(m, e.random_point(&mut rng));
        let j = l_exponent(e, r, l);
        if j == k {
            return Ok(false);
        }
        if j > b {
            if b > 0 && !in_cyclic(e, best, r, l, j, b) {
                return Ok(true);
            }
            best = r;
            b = j;
        } else if j > 0 && !in_cyclic(e, r, best, l, b, j) {
            return Ok(true);
        }
    }
    Err(Error::Inconsistent(format!(
        "no decision on the {l}-Sylow subgroup at p = {}",
        e.p
    )))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Cyclicity {
    pub cyclic: bool,
    /// A prime l with E[l] in E(F_p) when not cyclic.
    pub witness: Option<u64>,
}

/// Decide cyclicity of E(F_p) given N = |E(F_p)|.
pub fn is_cyclic(e: &FpCurve, n: u64) -> Result<Cyclicity> {
    is_cyclic_seeded(e, n, 0)
}

pub fn is_cyclic_seeded(e: &FpCurve, n: u64, seed: u64) -> Result<Cyclicity> {
    check_hasse(e.p, n)?;
    for (l, k) in factor(n) {
        if k < 2 || !(e.p - 1).is_multiple_of(l) {
            continue;
        }
        let full = if l <= DIVISION_POLY_MAX_L {
            full_torsion(e, l)
        } else {
            sylow_rank_two(e, l, n, seed)?
        };
        if full {
            return Ok(Cyclicity {
                cyclic: false,
                witness: Some(l),
            });
        }
    }
    Ok(Cyclicity {
        cyclic: true,
        witness: None,
    })
}
