//! Arithmetic over a prime field GF(q).
//!
//! Every symbol in the system lives in GF(q) for a prime modulus q. Elements
//! carry their modulus so mixed-field bugs surface as [`GfError::ModulusMismatch`]
//! instead of silent garbage. All operations are pure; the only stateful object
//! is a [`RandomnessSource`].

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GfError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("division by zero in GF({0})")]
    DivisionByZero(u64),
    #[error("mixed moduli: GF({0}) vs GF({1})")]
    ModulusMismatch(u64, u64),
    #[error("deterministic randomness source exhausted")]
    SourceExhausted,
}

/// A validated prime modulus q.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FieldModulus(u64);

impl FieldModulus {
    /// Validates primality with a deterministic Miller-Rabin check.
    pub fn new(q: u64) -> Result<Self, GfError> {
        if is_prime(q) {
            Ok(FieldModulus(q))
        } else {
            Err(GfError::NotPrime(q))
        }
    }

    pub fn value(self) -> u64 {
        self.0
    }

    /// Wraps an integer into the field, reducing mod q.
    pub fn element(self, v: u64) -> FieldElement {
        FieldElement {
            value: v % self.0,
            modulus: self,
        }
    }

    pub fn zero(self) -> FieldElement {
        self.element(0)
    }

    pub fn one(self) -> FieldElement {
        self.element(1)
    }
}

/// An element of GF(q), always reduced to `[0, q)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldElement {
    value: u64,
    modulus: FieldModulus,
}

impl FieldElement {
    pub fn value(self) -> u64 {
        self.value
    }

    pub fn modulus(self) -> FieldModulus {
        self.modulus
    }

    pub fn is_zero(self) -> bool {
        self.value == 0
    }

    fn same_field(self, other: FieldElement) -> Result<u64, GfError> {
        if self.modulus == other.modulus {
            Ok(self.modulus.0)
        } else {
            Err(GfError::ModulusMismatch(self.modulus.0, other.modulus.0))
        }
    }

    pub fn try_add(self, rhs: FieldElement) -> Result<FieldElement, GfError> {
        let q = self.same_field(rhs)?;
        let mut v = self.value + rhs.value; // q < 2^63 is enforced by is_prime's range; no overflow
        if v >= q {
            v -= q;
        }
        Ok(FieldElement {
            value: v,
            modulus: self.modulus,
        })
    }

    pub fn try_sub(self, rhs: FieldElement) -> Result<FieldElement, GfError> {
        let q = self.same_field(rhs)?;
        let v = if self.value >= rhs.value {
            self.value - rhs.value
        } else {
            self.value + q - rhs.value
        };
        Ok(FieldElement {
            value: v,
            modulus: self.modulus,
        })
    }

    pub fn try_mul(self, rhs: FieldElement) -> Result<FieldElement, GfError> {
        let q = self.same_field(rhs)?;
        let v = (self.value as u128 * rhs.value as u128 % q as u128) as u64;
        Ok(FieldElement {
            value: v,
            modulus: self.modulus,
        })
    }

    pub fn neg(self) -> FieldElement {
        let v = if self.value == 0 {
            0
        } else {
            self.modulus.0 - self.value
        };
        FieldElement {
            value: v,
            modulus: self.modulus,
        }
    }

    /// Multiplicative inverse via extended Euclid.
    pub fn inv(self) -> Result<FieldElement, GfError> {
        if self.value == 0 {
            return Err(GfError::DivisionByZero(self.modulus.0));
        }
        // Invariant: old_s * value == old_r (mod q) throughout.
        let q = self.modulus.0 as i128;
        let (mut old_r, mut r) = (self.value as i128, q);
        let (mut old_s, mut s) = (1i128, 0i128);
        while r != 0 {
            let quot = old_r / r;
            (old_r, r) = (r, old_r - quot * r);
            (old_s, s) = (s, old_s - quot * s);
        }
        let v = old_s.rem_euclid(q) as u64;
        Ok(FieldElement {
            value: v,
            modulus: self.modulus,
        })
    }

    /// Exponentiation by squaring.
    pub fn pow(self, mut exp: u64) -> FieldElement {
        let mut base = self;
        let mut acc = self.modulus.one();
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc.try_mul(base).expect("same modulus");
            }
            base = base.try_mul(base).expect("same modulus");
            exp >>= 1;
        }
        acc
    }
}

// Operator impls for code paths where a shared modulus is already established
// (e.g. inside a validated matrix). They panic on mixed moduli.
impl std::ops::Add for FieldElement {
    type Output = FieldElement;
    fn add(self, rhs: FieldElement) -> FieldElement {
        self.try_add(rhs).expect("mixed moduli in +")
    }
}

impl std::ops::Sub for FieldElement {
    type Output = FieldElement;
    fn sub(self, rhs: FieldElement) -> FieldElement {
        self.try_sub(rhs).expect("mixed moduli in -")
    }
}

impl std::ops::Mul for FieldElement {
    type Output = FieldElement;
    fn mul(self, rhs: FieldElement) -> FieldElement {
        self.try_mul(rhs).expect("mixed moduli in *")
    }
}

impl std::ops::Neg for FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        FieldElement::neg(self)
    }
}

impl std::fmt::Display for FieldElement {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.value)
    }
}

/// Deterministic Miller-Rabin, exact for all u64 with this witness set.
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
    let mut s = 0u32;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    let mul = |a: u64, b: u64| (a as u128 * b as u128 % n as u128) as u64;
    let powmod = |mut base: u64, mut exp: u64| {
        let mut acc = 1u64;
        base %= n;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = mul(acc, base);
            }
            base = mul(base, base);
            exp >>= 1;
        }
        acc
    };
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = powmod(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 0..s - 1 {
            x = mul(x, x);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Smallest prime >= n.
pub fn next_prime_at_least(n: u64) -> u64 {
    let mut c = n.max(2);
    while !is_prime(c) {
        c += 1;
    }
    c
}

/// Source of unbiased 64-bit words feeding [`uniform_sample`].
///
/// Seedable sources give reproducible runs for tests and the CLI `--seed`
/// flag; the OS source backs production encodes.
pub trait RandomnessSource {
    fn next_word(&mut self) -> Result<u64, GfError>;
}

/// ChaCha20-backed source, reproducible from a 64-bit seed.
pub struct SeededSource {
    rng: rand_chacha::ChaCha20Rng,
}

impl SeededSource {
    pub fn new(seed: u64) -> Self {
        use rand::SeedableRng;
        SeededSource {
            rng: rand_chacha::ChaCha20Rng::seed_from_u64(seed),
        }
    }
}

impl RandomnessSource for SeededSource {
    fn next_word(&mut self) -> Result<u64, GfError> {
        use rand::RngCore;
        Ok(self.rng.next_u64())
    }
}

/// OS entropy source.
pub struct OsSource;

impl RandomnessSource for OsSource {
    fn next_word(&mut self) -> Result<u64, GfError> {
        use rand::RngCore;
        Ok(rand::rngs::OsRng.next_u64())
    }
}

/// Fixed word list for tests; errors with `SourceExhausted` when drained.
pub struct FixedSource {
    words: Vec<u64>,
    pos: usize,
}

impl FixedSource {
    pub fn new(words: Vec<u64>) -> Self {
        FixedSource { words, pos: 0 }
    }
}

impl RandomnessSource for FixedSource {
    fn next_word(&mut self) -> Result<u64, GfError> {
        let w = self.words.get(self.pos).copied().ok_or(GfError::SourceExhausted)?;
        self.pos += 1;
        Ok(w)
    }
}

/// Draws an exactly uniform element of GF(q) by rejection sampling, so there
/// is no modulo bias for any q.
pub fn uniform_sample(
    src: &mut dyn RandomnessSource,
    q: FieldModulus,
) -> Result<FieldElement, GfError> {
    let m = q.value();
    // Accept words below the largest multiple of q that fits in a u64.
    let zone = u64::MAX - (u64::MAX % m + 1) % m;
    loop {
        let w = src.next_word()?;
        if w <= zone {
            return Ok(q.element(w % m));
        }
    }
}
