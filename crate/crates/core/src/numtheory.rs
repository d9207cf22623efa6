//! Small integer helpers: primality, factorization, Euler's totient.

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// Distinct prime factors in ascending order.
pub fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push(n);
    }
    out
}

pub fn totient(n: u64) -> u64 {
    if n == 0 {
        return 0;
    }
    prime_factors(n)
        .into_iter()
        .fold(n, |acc, p| acc / p * (p - 1))
}

pub fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub fn lcm(a: u64, b: u64) -> u64 {
    if a == 0 || b == 0 {
        0
    } else {
        a / gcd(a, b) * b
    }
}

/// All k with totient(k) <= n.
///
/// totient(k) >= sqrt(k/2), so scanning up to 2n^2 + 2 is exhaustive.
pub fn orders_with_totient_at_most(n: u64) -> Vec<u64> {
    let top = 2 * n * n + 2;
    (1..=top).filter(|&k| totient(k) <= n).collect()
}

pub fn mod_pow(base: u64, mut exp: u64, m: u64) -> u64 {
    let mut result = 1 % m;
    let mut b = base % m;
    while exp > 0 {
        if exp & 1 == 1 {
            result = result * b % m;
        }
        b = b * b % m;
        exp >>= 1;
    }
    result
}

/// Coefficients of the `k`-th cyclotomic polynomial, lowest degree first.
pub fn cyclotomic(k: u64) -> Vec<i64> {
    assert!(k >= 1);
    // x^k - 1 divided by every cyclotomic factor of smaller index dividing k.
    let mut p = vec![0i64; k as usize + 1];
    p[0] = -1;
    p[k as usize] = 1;
    for d in (1..k).filter(|d| k.is_multiple_of(*d)) {
        p = div_monic(&p, &cyclotomic(d));
    }
    p
}

fn div_monic(num: &[i64], den: &[i64]) -> Vec<i64> {
    let mut r = num.to_vec();
    let dd = den.len() - 1;
    let mut q = vec![0i64; r.len() - dd];
    for i in (0..q.len()).rev() {
        let c = r[i + dd];
        q[i] = c;
        for (j, &b) in den.iter().enumerate() {
            r[i + j] -= c * b;
        }
    }
    debug_assert!(r.iter().all(|&x| x == 0), "inexact cyclotomic division");
    q
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primes_and_factors() {
        assert!(is_prime(2) && is_prime(5) && is_prime(65537));
        assert!(!is_prime(1) && !is_prime(4) && !is_prime(91));
        assert_eq!(prime_factors(360), vec![2, 3, 5]);
        assert_eq!(prime_factors(97), vec![97]);
    }

    #[test]
    fn cyclotomics() {
        assert_eq!(cyclotomic(1), vec![-1, 1]);
        assert_eq!(cyclotomic(2), vec![1, 1]);
        assert_eq!(cyclotomic(4), vec![1, 0, 1]);
        assert_eq!(cyclotomic(6), vec![1, -1, 1]);
        for k in 1..40 {
            assert_eq!(cyclotomic(k).len() as u64 - 1, totient(k));
        }
        assert!(cyclotomic(105).contains(&-2));
    }

    #[test]
    fn totient_orders_small() {
        assert_eq!(orders_with_totient_at_most(1), vec![1, 2]);
        assert_eq!(orders_with_totient_at_most(2), vec![1, 2, 3, 4, 6]);
        assert_eq!(
            orders_with_totient_at_most(4),
            vec![1, 2, 3, 4, 5, 6, 8, 10, 12]
        );
    }
}
