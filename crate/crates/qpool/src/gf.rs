//! Arithmetic in the finite field GF(q) for prime-power q.
//!
//! Elements are integers in `[0, q)` encoding polynomials over GF(p): the
//! element `r` stands for the polynomial with base-p digits of `r` as
//! coefficients, constant term first. Extension fields reduce modulo a fixed
//! monic irreducible polynomial chosen deterministically (smallest coefficient
//! tuple in lexicographic order, constant term compared first), so the same q
//! always yields the same arithmetic on every platform.

use crate::error::{Error, Result};

/// Largest order for which full lookup tables are precomputed.
const TABLE_LIMIT: u64 = 512;

/// A finite field of order `q = p^e` with fixed modulus and, for small
/// orders, precomputed operation tables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldSpec {
    q: u64,
    p: u64,
    e: u32,
    /// Monic modulus of degree e, coefficients constant-term first (length e+1).
    modulus: Vec<u64>,
    add_table: Vec<u64>,
    mul_table: Vec<u64>,
    neg_table: Vec<u64>,
    inv_table: Vec<u64>,
}

impl FieldSpec {
    /// Builds the field of order `q`.
    ///
    /// For prime q the modulus is the degree-1 polynomial x; for q = p^e with
    /// e >= 2 it is the lexicographically smallest monic irreducible
    /// polynomial of degree e over GF(p).
    pub fn new(q: u64) -> Result<FieldSpec> {
        let (p, e) = prime_power(q).ok_or(Error::NonPrimePower(q))?;
        let modulus = if e == 1 {
            vec![0, 1]
        } else {
            smallest_irreducible(p, e)
        };
        let mut spec = FieldSpec {
            q,
            p,
            e,
            modulus,
            add_table: Vec::new(),
            mul_table: Vec::new(),
            neg_table: Vec::new(),
            inv_table: Vec::new(),
        };
        if q <= TABLE_LIMIT {
            spec.build_tables();
        }
        Ok(spec)
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn characteristic(&self) -> u64 {
        self.p
    }

    pub fn degree(&self) -> u32 {
        self.e
    }

    /// The modulus polynomial, constant term first.
    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }

    fn build_tables(&mut self) {
        let q = self.q as usize;
        let mut add = vec![0u64; q * q];
        let mut mul = vec![0u64; q * q];
        let mut neg = vec![0u64; q];
        let mut inv = vec![u64::MAX; q];
        for a in 0..self.q {
            neg[a as usize] = self.raw_neg(a);
            for b in 0..self.q {
                add[(a * self.q + b) as usize] = self.raw_add(a, b);
                let prod = self.raw_mul(a, b);
                mul[(a * self.q + b) as usize] = prod;
                if prod == 1 {
                    inv[a as usize] = b;
                }
            }
        }
        self.add_table = add;
        self.mul_table = mul;
        self.neg_table = neg;
        self.inv_table = inv;
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        if !self.add_table.is_empty() {
            self.add_table[(a * self.q + b) as usize]
        } else {
            self.raw_add(a, b)
        }
    }

    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        if !self.neg_table.is_empty() {
            self.neg_table[a as usize]
        } else {
            self.raw_neg(a)
        }
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        if !self.mul_table.is_empty() {
            self.mul_table[(a * self.q + b) as usize]
        } else {
            self.raw_mul(a, b)
        }
    }

    pub fn inv(&self, a: u64) -> Result<u64> {
        if a == 0 {
            return Err(Error::DivisionByZero);
        }
        if !self.inv_table.is_empty() {
            return Ok(self.inv_table[a as usize]);
        }
        // a^(q-2) = a^{-1} since the multiplicative group has order q-1.
        Ok(self.pow(a, self.q - 2))
    }

    pub fn pow(&self, mut base: u64, mut exp: u64) -> u64 {
        let mut acc = 1u64;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    fn digits(&self, a: u64) -> Vec<u64> {
        let mut out = vec![0; self.e as usize];
        let mut a = a;
        for d in out.iter_mut() {
            *d = a % self.p;
            a /= self.p;
        }
        out
    }

    fn compose(&self, digits: &[u64]) -> u64 {
        digits
            .iter()
            .rev()
            .fold(0, |acc, &d| acc * self.p + d)
    }

    fn raw_add(&self, a: u64, b: u64) -> u64 {
        if self.e == 1 {
            return (a + b) % self.p;
        }
        let da = self.digits(a);
        let db = self.digits(b);
        let sum: Vec<u64> = da.iter().zip(&db).map(|(x, y)| (x + y) % self.p).collect();
        self.compose(&sum)
    }

    fn raw_neg(&self, a: u64) -> u64 {
        if self.e == 1 {
            return (self.p - a % self.p) % self.p;
        }
        let da = self.digits(a);
        let neg: Vec<u64> = da.iter().map(|&x| (self.p - x) % self.p).collect();
        self.compose(&neg)
    }

    fn raw_mul(&self, a: u64, b: u64) -> u64 {
        if self.e == 1 {
            return ((a as u128 * b as u128) % self.p as u128) as u64;
        }
        let da = self.digits(a);
        let db = self.digits(b);
        let mut prod = vec![0u64; 2 * self.e as usize - 1];
        for (i, &x) in da.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in db.iter().enumerate() {
                prod[i + j] = (prod[i + j] + x * y) % self.p;
            }
        }
        poly_rem_monic(&mut prod, &self.modulus, self.p);
        prod.resize(self.e as usize, 0);
        self.compose(&prod)
    }
}

/// Decomposes q as p^e with p prime, or returns `None`.
pub fn prime_power(q: u64) -> Option<(u64, u32)> {
    if q < 2 {
        return None;
    }
    for e in (1..=63u32).rev() {
        if let Some(p) = nth_root_exact(q, e) {
            if is_prime(p) {
                return Some((p, e));
            }
        }
    }
    None
}

fn nth_root_exact(q: u64, e: u32) -> Option<u64> {
    if e == 1 {
        return Some(q);
    }
    let guess = (q as f64).powf(1.0 / e as f64).round() as u64;
    for r in guess.saturating_sub(2)..=guess + 2 {
        if r < 2 {
            continue;
        }
        if let Some(pw) = checked_pow(r, e) {
            if pw == q {
                return Some(r);
            }
        }
    }
    None
}

fn checked_pow(base: u64, exp: u32) -> Option<u64> {
    let mut acc: u64 = 1;
    for _ in 0..exp {
        acc = acc.checked_mul(base)?;
    }
    Some(acc)
}

/// Deterministic Miller-Rabin for u64.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    let mut d = n - 1;
    let mut r = 0u32;
    while d % 2 == 0 {
        d /= 2;
        r += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 0..r - 1 {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1u64 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// In-place remainder of `poly` modulo the monic `modulus` over GF(p).
/// Coefficients ascending; `poly` is truncated to degree < deg(modulus).
fn poly_rem_monic(poly: &mut Vec<u64>, modulus: &[u64], p: u64) {
    let deg_m = modulus.len() - 1;
    while poly.len() > deg_m {
        let lead = *poly.last().unwrap() % p;
        let shift = poly.len() - 1 - deg_m;
        if lead != 0 {
            for (i, &mc) in modulus.iter().enumerate() {
                let idx = shift + i;
                let sub = (lead * mc) % p;
                poly[idx] = (poly[idx] + p * p - sub) % p;
            }
        }
        poly.pop();
    }
    while poly.len() > 1 && *poly.last().unwrap() == 0 {
        poly.pop();
    }
}

/// Finds the lexicographically smallest monic irreducible polynomial of
/// degree e over GF(p); coefficient tuples are compared constant term first.
fn smallest_irreducible(p: u64, e: u32) -> Vec<u64> {
    let total = checked_pow(p, e).expect("q = p^e fits in u64, so p^e does too");
    for m in 0..total {
        // The constant term is the slowest-varying digit of m, so ascending m
        // walks coefficient tuples in lexicographic order, c_0 compared first.
        let mut coeffs = vec![0u64; e as usize + 1];
        coeffs[e as usize] = 1;
        let mut val = m;
        for idx in (0..e as usize).rev() {
            coeffs[idx] = val % p;
            val /= p;
        }
        if is_irreducible(&coeffs, p) {
            return coeffs;
        }
    }
    unreachable!("an irreducible polynomial of every degree exists over GF(p)")
}

/// Tests irreducibility of a monic polynomial by trial division against all
/// monic polynomials of degree 1..=deg/2.
fn is_irreducible(f: &[u64], p: u64) -> bool {
    let deg = f.len() - 1;
    if deg == 1 {
        return true;
    }
    // A polynomial with zero constant term is divisible by x.
    if f[0] == 0 {
        return false;
    }
    for d in 1..=deg / 2 {
        let count = checked_pow(p, d as u32).unwrap();
        for m in 0..count {
            let mut g = vec![0u64; d + 1];
            g[d] = 1;
            let mut val = m;
            for gi in g.iter_mut().take(d) {
                *gi = val % p;
                val /= p;
            }
            let mut rem = f.to_vec();
            poly_rem_monic(&mut rem, &g, p);
            if rem.iter().all(|&c| c == 0) {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL_PRIME_POWERS: [u64; 15] = [2, 3, 4, 5, 7, 8, 9, 11, 13, 16, 17, 19, 23, 25, 27];

    #[test]
    fn prime_power_decomposition() {
        assert_eq!(prime_power(2), Some((2, 1)));
        assert_eq!(prime_power(4), Some((2, 2)));
        assert_eq!(prime_power(27), Some((3, 3)));
        assert_eq!(prime_power(1024), Some((2, 10)));
        assert_eq!(prime_power(6), None);
        assert_eq!(prime_power(12), None);
        assert_eq!(prime_power(1), None);
        assert_eq!(prime_power(0), None);
        assert_eq!(prime_power(36), None);
        assert_eq!(prime_power(1296), None); // 6^4
    }

    #[test]
    fn non_prime_power_rejected() {
        assert!(matches!(FieldSpec::new(6), Err(Error::NonPrimePower(6))));
    }

    #[test]
    fn prime_field_is_mod_p() {
        let f = FieldSpec::new(7).unwrap();
        assert_eq!(f.characteristic(), 7);
        assert_eq!(f.degree(), 1);
        for a in 0..7 {
            for b in 0..7 {
                assert_eq!(f.add(a, b), (a + b) % 7);
                assert_eq!(f.mul(a, b), (a * b) % 7);
            }
        }
    }

    #[test]
    fn gf4_modulus_and_products() {
        let f = FieldSpec::new(4).unwrap();
        // x^2 + x + 1, the unique irreducible quadratic over GF(2).
        assert_eq!(f.modulus(), &[1, 1, 1]);
        // x * x = x^2 = x + 1, i.e. 2 * 2 = 3.
        assert_eq!(f.mul(2, 2), 3);
        assert_eq!(f.add(1, 1), 0);
    }

    #[test]
    fn characteristic_two_addition() {
        let f = FieldSpec::new(2).unwrap();
        assert_eq!(f.add(1, 1), 0);
    }

    #[test]
    fn gf5_inverse() {
        let f = FieldSpec::new(5).unwrap();
        assert_eq!(f.inv(2).unwrap(), 3);
        assert!(matches!(f.inv(0), Err(Error::DivisionByZero)));
    }

    #[test]
    fn field_axioms_exhaustive() {
        for q in SMALL_PRIME_POWERS {
            let f = FieldSpec::new(q).unwrap();
            for a in 0..q {
                assert_eq!(f.add(a, 0), a);
                assert_eq!(f.mul(a, 1), a);
                assert_eq!(f.add(a, f.neg(a)), 0);
                if a != 0 {
                    assert_eq!(f.mul(a, f.inv(a).unwrap()), 1, "q={q} a={a}");
                }
                for b in 0..q {
                    assert_eq!(f.add(a, b), f.add(b, a));
                    assert_eq!(f.mul(a, b), f.mul(b, a));
                }
            }
        }
    }

    #[test]
    fn field_axioms_triples() {
        for q in SMALL_PRIME_POWERS {
            let f = FieldSpec::new(q).unwrap();
            for a in 0..q {
                for b in 0..q {
                    for c in 0..q {
                        assert_eq!(f.add(f.add(a, b), c), f.add(a, f.add(b, c)));
                        assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
                        assert_eq!(
                            f.mul(a, f.add(b, c)),
                            f.add(f.mul(a, b), f.mul(a, c)),
                            "distributivity q={q} a={a} b={b} c={c}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn multiplicative_group_is_cyclic() {
        for q in SMALL_PRIME_POWERS {
            let f = FieldSpec::new(q).unwrap();
            let found = (1..q).any(|g| {
                let mut x = 1u64;
                let mut order = 0u64;
                loop {
                    x = f.mul(x, g);
                    order += 1;
                    if x == 1 {
                        break;
                    }
                }
                order == q - 1
            });
            assert!(found, "no generator found for GF({q})");
        }
    }

    #[test]
    fn tableless_path_agrees_with_tables() {
        // GF(625) is above nothing here, but GF(529) = 23^2 is under the
        // table limit; compare raw ops against table ops there.
        let f = FieldSpec::new(529).unwrap();
        for a in (0..529).step_by(13) {
            for b in (0..529).step_by(17) {
                assert_eq!(f.raw_add(a, b), f.add(a, b));
                assert_eq!(f.raw_mul(a, b), f.mul(a, b));
            }
        }
        // And a field above the table limit exercises the raw path directly.
        let big = FieldSpec::new(625).unwrap();
        assert!(big.add_table.is_empty());
        for a in 1..20 {
            let inv = big.inv(a).unwrap();
            assert_eq!(big.mul(a, inv), 1);
        }
    }
}
