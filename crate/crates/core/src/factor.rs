//! Prime factorization of moderately sized integers and factored display.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Prime factorization of |n| by trial division, as `(p, e)` pairs in ascending order.
///
/// Intended for discriminants of small lattices. Any cofactor left after trial
/// division up to 10⁶ is reported as a single (probable) prime.
pub fn factor(n: &BigInt) -> Vec<(BigInt, u32)> {
    let mut m = n.abs();
    let mut out = Vec::new();
    if m.is_zero() {
        return out;
    }
    let mut p: u64 = 2;
    while p <= 1_000_000 {
        let bp = BigInt::from(p);
        if &bp * &bp > m {
            break;
        }
        let mut e = 0;
        while m.is_multiple_of(&bp) {
            m /= &bp;
            e += 1;
        }
        if e > 0 {
            out.push((bp, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if !m.is_one() {
        out.push((m, 1));
    }
    out
}

/// Renders an integer as a signed product of prime powers, e.g. `-2^6*3^2`.
pub fn factored(n: &BigInt) -> String {
    if n.is_zero() {
        return "0".into();
    }
    let body = if n.abs().is_one() {
        "1".to_string()
    } else {
        factor(n)
            .iter()
            .map(|(p, e)| if *e == 1 { p.to_string() } else { format!("{p}^{e}") })
            .collect::<Vec<_>>()
            .join("*")
    };
    if n.is_negative() {
        format!("-{body}")
    } else {
        body
    }
}

/// Splits a list of cyclic orders into prime-power cyclic factors, sorted by prime then exponent.
pub fn primary_decomposition(orders: &[BigInt]) -> Vec<(u64, u32)> {
    let mut out: Vec<(u64, u32)> = orders
        .iter()
        .flat_map(factor)
        .map(|(p, e)| (p.to_u64().expect("prime fits in u64"), e))
        .collect();
    out.sort_unstable();
    out
}
