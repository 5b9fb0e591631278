//! Classical orthogonal-array constructions.
//!
//! Everything here is deterministic and is cross-checked by the
//! strength-2 verifier in the test suite. Symbols are 0-based
//! internally; public `Design`s use 1-based levels.
//!
//! The toolbox:
//! * Hadamard matrices (Sylvester, Paley I/II over GF(q), Kronecker
//!   doubling) -> two-level arrays OA(n, 2^(n-1)).
//! * Difference schemes developed over the additive group of GF(q):
//!   the GF(q) multiplication table gives OA(q^2, q^(q+1)); projecting
//!   the GF(p^a) table onto GF(p^b) gives OA(p^(a+b), q^(p^a + 1)),
//!   e.g. OA(32, 4^9) and OA(128, 4^33).
//! * Rao-Hamming linear arrays OA(q^t, q^((q^t-1)/(q-1))).
//! * Addelman-Kempthorne double arrays OA(2q^n, q^(2(q^n-1)/(q-1)-1))
//!   for odd prime powers, e.g. OA(18, 3^7) and OA(54, 3^25).
//! * Level collapsing and a column-balanced random fallback.

use crate::error::{Error, Result};
use crate::oa::ff::{supported_prime_power, Gf};
use crate::rng::rng_from_seed;
use crate::space::{Design, Provenance};
use rand::seq::SliceRandom;

// ---------------------------------------------------------------------------
// Hadamard matrices

type HMat = Vec<Vec<i8>>;

fn sylvester(order: usize) -> HMat {
    let mut h: HMat = vec![vec![1]];
    let mut n = 1;
    while n < order {
        let mut next = vec![vec![0i8; 2 * n]; 2 * n];
        for i in 0..n {
            for j in 0..n {
                next[i][j] = h[i][j];
                next[i][j + n] = h[i][j];
                next[i + n][j] = h[i][j];
                next[i + n][j + n] = -h[i][j];
            }
        }
        h = next;
        n *= 2;
    }
    h
}

/// Paley construction I: order q+1 for a prime power q = 3 (mod 4).
fn paley1(q: usize) -> Result<HMat> {
    let f = Gf::new(q)?;
    let n = q + 1;
    let mut h = vec![vec![0i8; n]; n];
    for j in 0..n {
        h[0][j] = 1;
    }
    for i in 1..n {
        h[i][0] = -1;
        for j in 1..n {
            h[i][j] = if i == j { 1 } else { f.chi(f.sub(i - 1, j - 1)) };
        }
    }
    Ok(h)
}

/// Paley construction II: order 2(q+1) for a prime power q = 1 (mod 4).
fn paley2(q: usize) -> Result<HMat> {
    let f = Gf::new(q)?;
    let m = q + 1;
    // symmetric conference matrix
    let mut c = vec![vec![0i8; m]; m];
    for j in 1..m {
        c[0][j] = 1;
        c[j][0] = 1;
    }
    for i in 1..m {
        for j in 1..m {
            if i != j {
                c[i][j] = f.chi(f.sub(i - 1, j - 1));
            }
        }
    }
    let n = 2 * m;
    let mut h = vec![vec![0i8; n]; n];
    for i in 0..m {
        for j in 0..m {
            let (a, b, d, e) = if c[i][j] == 0 {
                (1, -1, -1, -1)
            } else {
                (c[i][j], c[i][j], c[i][j], -c[i][j])
            };
            h[2 * i][2 * j] = a;
            h[2 * i][2 * j + 1] = b;
            h[2 * i + 1][2 * j] = d;
            h[2 * i + 1][2 * j + 1] = e;
        }
    }
    Ok(h)
}

fn kronecker(a: &HMat, b: &HMat) -> HMat {
    let na = a.len();
    let nb = b.len();
    let n = na * nb;
    let mut h = vec![vec![0i8; n]; n];
    for i1 in 0..na {
        for i2 in 0..nb {
            for j1 in 0..na {
                for j2 in 0..nb {
                    h[i1 * nb + i2][j1 * nb + j2] = a[i1][j1] * b[i2][j2];
                }
            }
        }
    }
    h
}

/// A Hadamard matrix of the given order, if the toolbox reaches it.
pub fn hadamard(order: usize) -> Option<HMat> {
    match order {
        0 => None,
        1 | 2 => Some(sylvester(order)),
        n if n % 4 != 0 => None,
        n if n.is_power_of_two() => Some(sylvester(n)),
        n => {
            if (n - 1) % 4 == 3 && supported_prime_power(n - 1) {
                if let Ok(h) = paley1(n - 1) {
                    return Some(h);
                }
            }
            if n % 2 == 0 {
                let half = n / 2;
                if half >= 2 && (half - 1) % 4 == 1 && supported_prime_power(half - 1) {
                    if let Ok(h) = paley2(half - 1) {
                        return Some(h);
                    }
                }
                if half % 4 == 0 || half <= 2 {
                    if let Some(h) = hadamard(half) {
                        return Some(kronecker(&sylvester(2), &h));
                    }
                }
            }
            None
        }
    }
}

/// OA(n, 2^(n-1)) from a Hadamard matrix: rows normalized to make the
/// first column all +1, first column dropped, +1 -> level 1, -1 -> 2.
fn hadamard_oa(order: usize) -> Option<(Vec<Vec<usize>>, String)> {
    let h = hadamard(order)?;
    let rows: Vec<Vec<usize>> = h
        .iter()
        .map(|row| {
            let sign = row[0];
            row[1..]
                .iter()
                .map(|&v| if v * sign == 1 { 0 } else { 1 })
                .collect()
        })
        .collect();
    Some((rows, format!("hadamard(n={})", order)))
}

// ---------------------------------------------------------------------------
// Difference schemes and development

/// Develops an n x k difference scheme over the additive group of
/// GF(q) and appends the block column: OA(n*q, k+1 columns).
fn develop(scheme: &[Vec<usize>], q: usize, sym: &Gf) -> Vec<Vec<usize>> {
    let n = scheme.len();
    let k = scheme[0].len();
    let mut rows = Vec::with_capacity(n * q);
    for block in scheme.iter().enumerate() {
        let (i, drow) = block;
        for g in 0..q {
            let mut run = Vec::with_capacity(k + 1);
            for j in 0..k {
                run.push(sym.add(drow[j], g));
            }
            run.push(i % q);
            rows.push(run);
        }
    }
    rows
}

/// OA(q^2, q^(q+1)) via the GF(q) multiplication table.
fn bose(q: usize) -> Result<(Vec<Vec<usize>>, String)> {
    let f = Gf::new(q)?;
    let scheme: Vec<Vec<usize>> =
        (0..q).map(|i| (0..q).map(|j| f.mul(i, j)).collect()).collect();
    Ok((develop(&scheme, q, &f), format!("bose(q={})", q)))
}

/// OA(p^a * p^b, (p^b)^(p^a + 1)) by projecting the GF(p^a)
/// multiplication table onto its first b digits. With q = p^b this is
/// OA(lambda*q^2, q^(lambda*q + 1)), lambda = p^(a-b).
fn bose_bush(p: usize, a: usize, b: usize) -> Result<(Vec<Vec<usize>>, String)> {
    let big = Gf::new(p.pow(a as u32))?;
    let q = p.pow(b as u32);
    let sym = Gf::new(q)?;
    let n = big.q();
    let scheme: Vec<Vec<usize>> = (0..n)
        .map(|i| (0..n).map(|j| big.project(big.mul(i, j), b)).collect())
        .collect();
    Ok((develop(&scheme, q, &sym), format!("bose_bush(q={},lambda={})", q, n / q)))
}

/// OA(q^t, q^((q^t - 1)/(q - 1))): rows are the points of GF(q)^t,
/// columns the normalized nonzero linear functionals.
fn rao_hamming(q: usize, t: usize) -> Result<(Vec<Vec<usize>>, String)> {
    let f = Gf::new(q)?;
    let n = q.pow(t as u32);
    // normalized functionals: first nonzero coefficient is 1
    let mut funcs: Vec<Vec<usize>> = Vec::new();
    let mut c = vec![0usize; t];
    loop {
        // advance odometer
        let mut i = 0;
        while i < t {
            c[i] += 1;
            if c[i] < q {
                break;
            }
            c[i] = 0;
            i += 1;
        }
        if i == t {
            break;
        }
        if c.iter().find(|&&v| v != 0) == Some(&1) {
            funcs.push(c.clone());
        }
    }
    let mut rows = Vec::with_capacity(n);
    for r in 0..n {
        let mut x = Vec::with_capacity(t);
        let mut rr = r;
        for _ in 0..t {
            x.push(rr % q);
            rr /= q;
        }
        let run: Vec<usize> = funcs
            .iter()
            .map(|cf| {
                cf.iter()
                    .zip(&x)
                    .fold(0, |acc, (&ci, &xi)| f.add(acc, f.mul(ci, xi)))
            })
            .collect();
        rows.push(run);
    }
    Ok((rows, format!("rao_hamming(q={},t={})", q, t)))
}

/// OA(2q^n, q^(2(q^n-1)/(q-1) - 1)) for odd prime-power q, n in {2, 3}.
///
/// Two q^n-run halves. The second half repeats the linear columns with
/// quadratic offsets and multiplies the quadratic columns' x-slope and
/// curvature by a fixed nonsquare k; the offsets (k-1)/(4k) * e^2 and
/// (k-1)/4 * e^2 make the two halves' difference distributions
/// complementary, which is exactly the strength-2 condition.
fn addelman_kempthorne(q: usize, n: usize) -> Result<(Vec<Vec<usize>>, String)> {
    if q % 2 == 0 {
        return Err(Error::NoArray("addelman_kempthorne needs odd q".into()));
    }
    let f = Gf::new(q)?;
    let k = f.nonsquare();
    let four = f.int(4);
    let km1 = f.sub(k, 1);
    let c2 = f.div(km1, f.mul(four, k)); // (k-1)/(4k)
    let g2 = f.div(km1, four); // (k-1)/4
    let mut rows = Vec::with_capacity(2 * q.pow(n as u32));
    let mut point = vec![0usize; n];
    for h in 0..2 {
        loop {
            let x = point[0];
            let y = point[1];
            let xx = f.mul(x, x);
            let mut run = Vec::new();
            run.push(x);
            // linear columns in y
            for e in 0..q {
                let mut v = f.add(y, f.mul(e, x));
                if h == 1 {
                    v = f.add(v, f.mul(c2, f.mul(e, e)));
                }
                run.push(v);
            }
            // linear columns in z (n = 3)
            if n == 3 {
                let z = point[2];
                for e in 0..q {
                    for fe in 0..q {
                        let mut v = f.add(z, f.add(f.mul(e, y), f.mul(fe, x)));
                        if h == 1 {
                            v = f.add(v, f.mul(c2, f.mul(fe, fe)));
                        }
                        run.push(v);
                    }
                }
            }
            // quadratic columns in y
            for e in 0..q {
                let v = if h == 0 {
                    f.add(f.add(y, f.mul(e, x)), xx)
                } else {
                    let lin = f.add(y, f.mul(f.mul(k, e), x));
                    f.add(f.add(lin, f.mul(k, xx)), f.mul(g2, f.mul(e, e)))
                };
                run.push(v);
            }
            // quadratic columns in z (n = 3)
            if n == 3 {
                let z = point[2];
                for e in 0..q {
                    for fe in 0..q {
                        let base = f.add(z, f.mul(e, y));
                        let v = if h == 0 {
                            f.add(f.add(base, f.mul(fe, x)), xx)
                        } else {
                            let lin = f.add(base, f.mul(f.mul(k, fe), x));
                            f.add(f.add(lin, f.mul(k, xx)), f.mul(g2, f.mul(fe, fe)))
                        };
                        run.push(v);
                    }
                }
            }
            rows.push(run);
            // advance odometer over GF(q)^n
            let mut i = 0;
            while i < n {
                point[i] += 1;
                if point[i] < q {
                    break;
                }
                point[i] = 0;
                i += 1;
            }
            if i == n {
                break;
            }
        }
    }
    Ok((rows, format!("addelman_kempthorne(q={},n={})", q, n)))
}

// ---------------------------------------------------------------------------
// Pure-level ladder

struct Candidate {
    runs: usize,
    cols: usize,
    build: fn(usize) -> Result<(Vec<Vec<usize>>, String)>,
    arg: usize,
}

fn ak2(q: usize) -> Result<(Vec<Vec<usize>>, String)> {
    addelman_kempthorne(q, 2)
}

fn ak3(q: usize) -> Result<(Vec<Vec<usize>>, String)> {
    addelman_kempthorne(q, 3)
}

fn rh3(q: usize) -> Result<(Vec<Vec<usize>>, String)> {
    rao_hamming(q, 3)
}

fn rh4(q: usize) -> Result<(Vec<Vec<usize>>, String)> {
    rao_hamming(q, 4)
}

fn bb32(q: usize) -> Result<(Vec<Vec<usize>>, String)> {
    debug_assert_eq!(q, 4);
    bose_bush(2, 3, 2)
}

fn bb128(q: usize) -> Result<(Vec<Vec<usize>>, String)> {
    debug_assert_eq!(q, 4);
    bose_bush(2, 5, 2)
}

fn single_column(q: usize) -> Result<(Vec<Vec<usize>>, String)> {
    Ok(((0..q).map(|v| vec![v]).collect(), format!("full_factorial({}^1)", q)))
}

fn square_factorial(q: usize) -> Result<(Vec<Vec<usize>>, String)> {
    let mut rows = Vec::with_capacity(q * q);
    for a in 0..q {
        for b in 0..q {
            rows.push(vec![a, b]);
        }
    }
    Ok((rows, format!("full_factorial({}^2)", q)))
}

/// The smallest same-level catalog array with at least `p` columns,
/// truncated to `p` columns. `None` when the construction set has
/// nothing for this profile.
pub fn smallest_pure(q: usize, p: usize) -> Option<Design> {
    if q < 2 || p == 0 {
        return None;
    }
    if q == 2 {
        // Hadamard ladder: smallest multiple of 4 with at least p+1 rows
        // of columns, stepping up past any unreachable order.
        if p == 1 {
            return finish(single_column(2).ok()?, q, p);
        }
        let mut n = 4 * ((p + 1).div_ceil(4));
        for _ in 0..16 {
            if let Some((rows, name)) = hadamard_oa(n) {
                if rows[0].len() >= p {
                    return finish((rows, name), q, p);
                }
            }
            n += 4;
        }
        return None;
    }
    let mut ladder: Vec<Candidate> = vec![Candidate {
        runs: q,
        cols: 1,
        build: single_column,
        arg: q,
    }];
    if supported_prime_power(q) {
        ladder.push(Candidate { runs: q * q, cols: q + 1, build: bose, arg: q });
        if q % 2 == 1 {
            ladder.push(Candidate { runs: 2 * q * q, cols: 2 * q + 1, build: ak2, arg: q });
            ladder.push(Candidate {
                runs: 2 * q * q * q,
                cols: 2 * (q * q + q + 1) - 1,
                build: ak3,
                arg: q,
            });
        }
        if q == 4 {
            ladder.push(Candidate { runs: 32, cols: 9, build: bb32, arg: q });
            ladder.push(Candidate { runs: 128, cols: 33, build: bb128, arg: q });
        }
        ladder.push(Candidate {
            runs: q * q * q,
            cols: q * q + q + 1,
            build: rh3,
            arg: q,
        });
        ladder.push(Candidate {
            runs: q * q * q * q,
            cols: (q * q * q * q - 1) / (q - 1),
            build: rh4,
            arg: q,
        });
    } else if p <= 2 {
        ladder.push(Candidate { runs: q * q, cols: 2, build: square_factorial, arg: q });
    }
    ladder.sort_by_key(|c| (c.runs, std::cmp::Reverse(c.cols)));
    for cand in ladder {
        if cand.cols >= p {
            if let Ok(built) = (cand.build)(cand.arg) {
                return finish(built, q, p);
            }
        }
    }
    None
}

fn finish((rows, name): (Vec<Vec<usize>>, String), q: usize, p: usize) -> Option<Design> {
    let truncated: Vec<Vec<usize>> = rows
        .into_iter()
        .map(|r| r[..p].iter().map(|&v| v + 1).collect())
        .collect();
    Design::new(vec![q; p], truncated, Provenance::CatalogOa, name).ok()
}

// ---------------------------------------------------------------------------
// Derived designs

/// Collapses a same-level design onto a smaller mixed profile. Exact
/// (still an OA) when every target level count divides the source's;
/// otherwise nearly orthogonal and flagged as such.
pub fn collapse(source: &Design, profile: &[usize]) -> Result<Design> {
    let q = source.profile()[0];
    if source.p() != profile.len() {
        return Err(Error::InvalidArgument(format!(
            "collapse: {} source columns for {} target factors",
            source.p(),
            profile.len()
        )));
    }
    if profile.iter().any(|&t| t > q) {
        return Err(Error::InvalidArgument(
            "collapse: target level count exceeds source".into(),
        ));
    }
    let exact = profile.iter().all(|&t| q % t == 0);
    let rows: Vec<Vec<usize>> = source
        .runs()
        .iter()
        .map(|run| {
            run.iter()
                .zip(profile)
                .map(|(&v, &t)| {
                    if exact {
                        (v - 1) % t + 1
                    } else {
                        (v - 1) * t / q + 1
                    }
                })
                .collect()
        })
        .collect();
    Design::new(
        profile.to_vec(),
        rows,
        if exact { Provenance::CatalogOa } else { Provenance::NearlyOrthogonal },
        format!("collapse({})", source.construction),
    )
}

/// Column-balanced random design: each column holds each level
/// floor(n/N_l) or ceil(n/N_l) times, independently shuffled.
pub fn balanced_random(profile: &[usize], n: usize, seed: u64) -> Result<Design> {
    if n == 0 {
        return Err(Error::InvalidArgument("balanced_random: n = 0".into()));
    }
    let mut rng = rng_from_seed(seed);
    let mut columns: Vec<Vec<usize>> = Vec::with_capacity(profile.len());
    for &nl in profile {
        let mut col: Vec<usize> = (0..n).map(|i| i % nl + 1).collect();
        col.shuffle(&mut rng);
        columns.push(col);
    }
    let rows: Vec<Vec<usize>> = (0..n)
        .map(|i| columns.iter().map(|c| c[i]).collect())
        .collect();
    Design::new(
        profile.to_vec(),
        rows,
        Provenance::BalancedRandom,
        format!("balanced_random(n={})", n),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn is_hadamard(h: &HMat) -> bool {
        let n = h.len();
        for i in 0..n {
            for j in 0..n {
                let dot: i32 = (0..n).map(|k| h[i][k] as i32 * h[j][k] as i32).sum();
                let want = if i == j { n as i32 } else { 0 };
                if dot != want {
                    return false;
                }
            }
        }
        true
    }

    #[test]
    fn hadamard_orders_up_to_64() {
        for order in (4..=64).step_by(4) {
            match hadamard(order) {
                Some(h) => {
                    assert_eq!(h.len(), order);
                    assert!(is_hadamard(&h), "order {} failed", order);
                }
                None => panic!("no Hadamard matrix of order {}", order),
            }
        }
    }

    #[test]
    fn paley2_order_36() {
        let h = hadamard(36).unwrap();
        assert!(is_hadamard(&h));
    }

    #[test]
    fn collapse_divisor_is_exact() {
        let d = smallest_pure(4, 4).unwrap();
        let c = collapse(&d, &[4, 2, 2, 4]).unwrap();
        assert_eq!(c.provenance, Provenance::CatalogOa);
        assert_eq!(c.profile(), &[4, 2, 2, 4]);
    }

    #[test]
    fn collapse_non_divisor_is_flagged() {
        let d = smallest_pure(4, 3).unwrap();
        let c = collapse(&d, &[4, 3, 2]).unwrap();
        assert_eq!(c.provenance, Provenance::NearlyOrthogonal);
    }

    #[test]
    fn balanced_random_is_balanced_and_seeded() {
        let d = balanced_random(&[3, 4], 24, 7).unwrap();
        for (l, &nl) in [3usize, 4].iter().enumerate() {
            for level in 1..=nl {
                let count = d.runs().iter().filter(|r| r[l] == level).count();
                assert_eq!(count, 24 / nl);
            }
        }
        assert_eq!(d.runs(), balanced_random(&[3, 4], 24, 7).unwrap().runs());
        assert_ne!(d.runs(), balanced_random(&[3, 4], 24, 8).unwrap().runs());
    }
}
