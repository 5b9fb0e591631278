//! Small finite fields GF(p^m) with precomputed tables.
//!
//! Elements are indexed `0..q` by their base-p digit expansion: element
//! `e` stands for the polynomial `sum_i d_i x^i` with `d_i` the i-th
//! digit of `e`. Addition is digitwise mod p, so index 0 is the zero
//! element and the additive group matches the plain digit group, which
//! is what the difference-scheme constructions project onto.

use crate::error::{Error, Result};

/// Monic irreducible polynomials used to build GF(p^m), as coefficient
/// lists `[c_0, c_1, ..., c_m]` with `c_m = 1`.
fn irreducible(p: usize, m: usize) -> Option<Vec<usize>> {
    match (p, m) {
        (2, 2) => Some(vec![1, 1, 1]),          // x^2+x+1
        (2, 3) => Some(vec![1, 1, 0, 1]),       // x^3+x+1
        (2, 4) => Some(vec![1, 1, 0, 0, 1]),    // x^4+x+1
        (2, 5) => Some(vec![1, 0, 1, 0, 0, 1]), // x^5+x^2+1
        (2, 6) => Some(vec![1, 1, 0, 0, 0, 0, 1]), // x^6+x+1
        (3, 2) => Some(vec![1, 0, 1]),          // x^2+1
        (3, 3) => Some(vec![1, 2, 0, 1]),       // x^3+2x+1
        (5, 2) => Some(vec![2, 0, 1]),          // x^2+2
        (7, 2) => Some(vec![1, 0, 1]),          // x^2+1
        _ => None,
    }
}

fn prime_power(q: usize) -> Option<(usize, usize)> {
    if q < 2 {
        return None;
    }
    let mut p = 2;
    while p * p <= q {
        if q % p == 0 {
            let mut m = 0;
            let mut r = q;
            while r % p == 0 {
                r /= p;
                m += 1;
            }
            return if r == 1 { Some((p, m)) } else { None };
        }
        p += 1;
    }
    Some((q, 1)) // q itself prime
}

/// Whether `q` is a prime power this module can realize as a field.
pub fn supported_prime_power(q: usize) -> bool {
    match prime_power(q) {
        Some((_, 1)) => true,
        Some((p, m)) => irreducible(p, m).is_some(),
        None => false,
    }
}

/// GF(p^m) with full operation tables.
#[derive(Debug, Clone)]
pub struct Gf {
    q: usize,
    p: usize,
    m: usize,
    mul: Vec<usize>,
    add: Vec<usize>,
    inv: Vec<usize>,
    neg: Vec<usize>,
    chi: Vec<i8>,
}

impl Gf {
    pub fn new(q: usize) -> Result<Gf> {
        let (p, m) =
            prime_power(q).ok_or_else(|| Error::NoArray(format!("{} is not a prime power", q)))?;
        let irr = if m == 1 {
            vec![0, 1] // unused for m = 1
        } else {
            irreducible(p, m).ok_or_else(|| {
                Error::NoArray(format!("no irreducible polynomial on file for GF({}^{})", p, m))
            })?
        };

        let digits = |e: usize| -> Vec<usize> {
            let mut d = Vec::with_capacity(m);
            let mut r = e;
            for _ in 0..m {
                d.push(r % p);
                r /= p;
            }
            d
        };
        let undigits = |d: &[usize]| -> usize {
            d.iter().rev().fold(0, |acc, &c| acc * p + c)
        };

        let mut add = vec![0; q * q];
        let mut neg = vec![0; q];
        for a in 0..q {
            let da = digits(a);
            let dn: Vec<usize> = da.iter().map(|&c| (p - c) % p).collect();
            neg[a] = undigits(&dn);
            for b in 0..q {
                let db = digits(b);
                let ds: Vec<usize> = da.iter().zip(&db).map(|(&x, &y)| (x + y) % p).collect();
                add[a * q + b] = undigits(&ds);
            }
        }

        let mut mul = vec![0; q * q];
        for a in 0..q {
            let da = digits(a);
            for b in 0..q {
                let db = digits(b);
                // polynomial product, then reduce mod irr
                let mut prod = vec![0usize; 2 * m];
                for (i, &x) in da.iter().enumerate() {
                    for (j, &y) in db.iter().enumerate() {
                        prod[i + j] = (prod[i + j] + x * y) % p;
                    }
                }
                if m > 1 {
                    for d in (m..2 * m).rev() {
                        let c = prod[d];
                        if c == 0 {
                            continue;
                        }
                        prod[d] = 0;
                        for (k, &ik) in irr.iter().enumerate().take(m) {
                            // x^d = -irr_low(x) * x^(d-m)
                            let sub = (c * ik) % p;
                            let idx = d - m + k;
                            prod[idx] = (prod[idx] + p * p - sub) % p;
                        }
                    }
                }
                mul[a * q + b] = undigits(&prod[..m]);
            }
        }

        let mut inv = vec![0; q];
        for a in 1..q {
            for b in 1..q {
                if mul[a * q + b] == 1 {
                    inv[a] = b;
                    break;
                }
            }
            if inv[a] == 0 {
                return Err(Error::Numeric(format!(
                    "element {} of GF({}) has no inverse; irreducible polynomial table is wrong",
                    a, q
                )));
            }
        }

        let mut chi = vec![-1i8; q];
        chi[0] = 0;
        for a in 1..q {
            chi[mul[a * q + a]] = 1;
        }

        Ok(Gf { q, p, m, mul, add, inv, neg, chi })
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn add(&self, a: usize, b: usize) -> usize {
        self.add[a * self.q + b]
    }

    pub fn sub(&self, a: usize, b: usize) -> usize {
        self.add(a, self.neg[b])
    }

    pub fn neg(&self, a: usize) -> usize {
        self.neg[a]
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mul[a * self.q + b]
    }

    pub fn inv(&self, a: usize) -> usize {
        debug_assert!(a != 0);
        self.inv[a]
    }

    pub fn div(&self, a: usize, b: usize) -> usize {
        self.mul(a, self.inv(b))
    }

    /// Sum of `n` copies of the unit element (the field image of an
    /// integer literal).
    pub fn int(&self, n: usize) -> usize {
        let mut acc = 0;
        for _ in 0..n {
            acc = self.add(acc, 1);
        }
        acc
    }

    /// Quadratic character: 0 at zero, +1 on nonzero squares, -1 else.
    pub fn chi(&self, a: usize) -> i8 {
        self.chi[a]
    }

    /// Smallest element that is not a square (odd q only).
    pub fn nonsquare(&self) -> usize {
        (1..self.q).find(|&a| self.chi[a] == -1).expect("odd field has a nonsquare")
    }

    /// Projects an element onto its first `b` base-p digits, i.e. the
    /// canonical group homomorphism onto the additive group of GF(p^b).
    pub fn project(&self, a: usize, b: usize) -> usize {
        let modulus = self.p.pow(b as u32);
        a % modulus
    }
}
