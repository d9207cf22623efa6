//! Dense polynomials over a prime field GF(p), coefficients stored low degree first.

use crate::numtheory::{mod_pow, prime_factors};

pub type Poly = Vec<u64>;

pub fn trim(a: &mut Poly) {
    while a.last() == Some(&0) {
        a.pop();
    }
}

pub fn degree(a: &[u64]) -> Option<usize> {
    a.iter().rposition(|&c| c != 0)
}

pub fn sub(a: &[u64], b: &[u64], p: u64) -> Poly {
    let len = a.len().max(b.len());
    let mut out: Poly = (0..len)
        .map(|i| {
            let x = a.get(i).copied().unwrap_or(0);
            let y = b.get(i).copied().unwrap_or(0);
            (x + p - y) % p
        })
        .collect();
    trim(&mut out);
    out
}

pub fn mul(a: &[u64], b: &[u64], p: u64) -> Poly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + x * y) % p;
        }
    }
    trim(&mut out);
    out
}

/// Remainder of `a` modulo the nonzero polynomial `m`.
pub fn rem(a: &[u64], m: &[u64], p: u64) -> Poly {
    let dm = degree(m).expect("division by zero polynomial");
    let lead_inv = mod_pow(m[dm], p - 2, p);
    let mut r: Poly = a.to_vec();
    trim(&mut r);
    while let Some(dr) = degree(&r) {
        if dr < dm {
            break;
        }
        let factor = r[dr] * lead_inv % p;
        let shift = dr - dm;
        for i in 0..=dm {
            r[shift + i] = (r[shift + i] + p - factor * m[i] % p) % p;
        }
        trim(&mut r);
    }
    r
}

pub fn gcd(a: &[u64], b: &[u64], p: u64) -> Poly {
    let mut x: Poly = a.to_vec();
    let mut y: Poly = b.to_vec();
    trim(&mut x);
    trim(&mut y);
    while !y.is_empty() {
        let r = rem(&x, &y, p);
        x = y;
        y = r;
    }
    x
}

pub fn mul_mod(a: &[u64], b: &[u64], m: &[u64], p: u64) -> Poly {
    rem(&mul(a, b, p), m, p)
}

/// `base^(p^e) mod m` by repeated p-th powering.
fn frobenius_power(base: &[u64], e: u32, m: &[u64], p: u64) -> Poly {
    let mut acc = base.to_vec();
    for _ in 0..e {
        acc = pow_mod(&acc, p, m, p);
    }
    acc
}

pub fn pow_mod(base: &[u64], mut exp: u64, m: &[u64], p: u64) -> Poly {
    let mut result: Poly = rem(&[1], m, p);
    let mut b = rem(base, m, p);
    while exp > 0 {
        if exp & 1 == 1 {
            result = mul_mod(&result, &b, m, p);
        }
        b = mul_mod(&b, &b, m, p);
        exp >>= 1;
    }
    result
}

/// Rabin's irreducibility test for a polynomial of degree k >= 1 over GF(p).
pub fn is_irreducible(f: &[u64], p: u64) -> bool {
    let k = match degree(f) {
        Some(0) | None => return false,
        Some(d) => d as u32,
    };
    if k == 1 {
        return true;
    }
    let x: Poly = vec![0, 1];
    if !sub(&frobenius_power(&x, k, f, p), &x, p).is_empty() {
        return false;
    }
    for q in prime_factors(u64::from(k)) {
        let e = k / q as u32;
        let h = sub(&frobenius_power(&x, e, f, p), &x, p);
        let g = gcd(f, &h, p);
        if degree(&g) != Some(0) {
            return false;
        }
    }
    true
}

/// Least irreducible monic polynomial of degree k, ordering candidates by the
/// integer sum c_0 + c_1 p + ... + c_{k-1} p^{k-1}.
pub fn least_irreducible(p: u64, k: u32) -> Poly {
    let count = p.pow(k);
    for code in 0..count {
        let mut f: Poly = Vec::with_capacity(k as usize + 1);
        let mut c = code;
        for _ in 0..k {
            f.push(c % p);
            c /= p;
        }
        f.push(1);
        if is_irreducible(&f, p) {
            return f;
        }
    }
    unreachable!("irreducible polynomials exist in every degree")
}
