//! Exact integer polynomial tools: Sturm root counting, irreducibility of
//! monic quartics, and discriminants via the Sylvester resultant.
//!
//! Coefficients are stored low degree first.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

fn trim(mut p: Vec<BigRational>) -> Vec<BigRational> {
    while p.len() > 1 && p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
    p
}

fn to_rational(coeffs: &[i64]) -> Vec<BigRational> {
    trim(coeffs.iter().map(|&c| BigRational::from_integer(c.into())).collect())
}

fn derivative(p: &[BigRational]) -> Vec<BigRational> {
    if p.len() <= 1 {
        return vec![BigRational::zero()];
    }
    trim(
        p.iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| c * BigRational::from_integer(BigInt::from(i)))
            .collect(),
    )
}

fn is_zero_poly(p: &[BigRational]) -> bool {
    p.iter().all(|c| c.is_zero())
}

/// Remainder of `a` divided by `b` (`b` nonzero).
fn rem(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    let mut r = a.to_vec();
    let db = b.len() - 1;
    let lead = b[db].clone();
    while r.len() > db && !is_zero_poly(&r) {
        let dr = r.len() - 1;
        let f = &r[dr] / &lead;
        for i in 0..=db {
            let v = &f * &b[i];
            r[dr - db + i] -= v;
        }
        r.pop();
        r = trim(r);
    }
    trim(r)
}

/// Number of distinct real roots of a nonzero integer polynomial.
pub fn sturm_real_root_count(coeffs: &[i64]) -> usize {
    let p = to_rational(coeffs);
    if p.len() <= 1 {
        return 0;
    }
    let mut chain = vec![p.clone(), derivative(&p)];
    loop {
        let n = chain.len();
        let r = rem(&chain[n - 2], &chain[n - 1]);
        if is_zero_poly(&r) {
            break;
        }
        chain.push(r.into_iter().map(|c| -c).collect());
    }
    let changes = |at_pos_inf: bool| {
        let signs: Vec<i32> = chain
            .iter()
            .map(|q| {
                let deg = q.len() - 1;
                let lead = q[deg].signum();
                let mut s = if lead.is_positive() { 1 } else { -1 };
                if !at_pos_inf && deg % 2 == 1 {
                    s = -s;
                }
                s
            })
            .collect();
        signs.windows(2).filter(|w| w[0] != w[1]).count()
    };
    changes(false) - changes(true)
}

fn eval_i(coeffs: &[i64], x: i128) -> i128 {
    coeffs.iter().rev().fold(0i128, |acc, &c| acc * x + c as i128)
}

fn divisors(n: i64) -> Vec<i64> {
    let n = n.unsigned_abs();
    let mut out = Vec::new();
    let mut d = 1u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d as i64);
            if d * d != n {
                out.push((n / d) as i64);
            }
        }
        d += 1;
    }
    out.sort_unstable();
    out
}

/// Integer root of `t² − s·t + p`, if any.
fn integer_roots_of_quadratic(s: i64, p: i64) -> Vec<i64> {
    let disc = (s as i128) * (s as i128) - 4 * p as i128;
    if disc < 0 {
        return vec![];
    }
    let r = (disc as f64).sqrt().round() as i128;
    let r = (r - 2..=r + 2).find(|v| *v >= 0 && v * v == disc);
    match r {
        Some(r) if (s as i128 + r) % 2 == 0 => {
            vec![((s as i128 + r) / 2) as i64, ((s as i128 - r) / 2) as i64]
        }
        _ => vec![],
    }
}

/// Irreducibility over Q of `x⁴ + c3x³ + c2x² + c1x + c0` (given as
/// `[c0, c1, c2, c3]`). By Gauss's lemma it suffices to rule out integer
/// roots and monic integer quadratic factors.
pub fn quartic_is_irreducible(c: &[i64; 4]) -> bool {
    let full = [c[0], c[1], c[2], c[3], 1];
    if c[0] == 0 {
        return false;
    }
    for d in divisors(c[0]) {
        if eval_i(&full, d as i128) == 0 || eval_i(&full, -(d as i128)) == 0 {
            return false;
        }
    }
    // (x² + a x + b)(x² + e x + d): bd = c0, a + e = c3, b + d + ae = c2, ad + be = c1.
    for b0 in divisors(c[0]) {
        for b in [b0, -b0] {
            let d = c[0] / b;
            for a in integer_roots_of_quadratic(c[3], c[2] - b - d) {
                let e = c[3] - a;
                if a * d + b * e == c[1] {
                    return false;
                }
            }
        }
    }
    true
}

/// Exact determinant by fraction-free Gaussian elimination.
pub fn bigint_determinant(mut a: Vec<Vec<BigInt>>) -> BigInt {
    let n = a.len();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                Some(i) => {
                    a.swap(i, k);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = v.div_floor(&prev);
            }
        }
        prev = a[k][k].clone();
    }
    sign * a[n - 1][n - 1].clone()
}

/// Resultant of two integer polynomials via the Sylvester matrix.
pub fn resultant(p: &[i64], q: &[i64]) -> BigInt {
    let m = p.len() - 1;
    let n = q.len() - 1;
    let size = m + n;
    let mut s = vec![vec![BigInt::zero(); size]; size];
    for i in 0..n {
        for (j, &c) in p.iter().rev().enumerate() {
            s[i][i + j] = c.into();
        }
    }
    for i in 0..m {
        for (j, &c) in q.iter().rev().enumerate() {
            s[n + i][i + j] = c.into();
        }
    }
    bigint_determinant(s)
}

/// `disc(p) = (−1)^{n(n−1)/2}·Res(p, p′)/lc(p)`.
pub fn discriminant(coeffs: &[i64]) -> BigInt {
    let n = coeffs.len() - 1;
    let dp: Vec<i64> = coeffs.iter().enumerate().skip(1).map(|(i, &c)| c * i as i64).collect();
    let res = resultant(coeffs, &dp);
    let lc = BigInt::from(coeffs[n]);
    let d = res / lc;
    if (n * (n - 1) / 2) % 2 == 1 {
        -d
    } else {
        d
    }
}
