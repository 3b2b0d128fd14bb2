//! Prime-field arithmetic and signed-integer encoding.
//!
//! Every secret share is an element of Z_p for one prime p fixed per run.
//! Signed integers are carried through the field with the centered lift:
//! x ≥ 0 maps to x, x < 0 maps to p − |x|, valid for |x| < p/2.

use std::fmt;
use std::sync::{Arc, OnceLock};

use num_bigint::{BigInt, BigUint, RandBigInt, Sign};
use num_traits::{One, Zero};
use rand::Rng;

use crate::error::{Error, Result};

/// Number of Miller-Rabin rounds for the probabilistic primality check.
const MILLER_RABIN_ROUNDS: u32 = 40;

#[derive(Debug)]
struct FieldInner {
    modulus: BigUint,
    /// floor((p-1)/2); values above this decode as negative.
    half: BigUint,
    bits: u64,
    element_bytes: u64,
}

/// A prime field Z_p with arbitrary-precision modulus.
///
/// Cheap to clone (shared inner). Two fields compare equal iff their
/// moduli are equal.
#[derive(Clone, Debug)]
pub struct PrimeField(Arc<FieldInner>);

impl PartialEq for PrimeField {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0.modulus == other.0.modulus
    }
}
impl Eq for PrimeField {}

impl PrimeField {
    /// Builds the field, checking primality probabilistically
    /// (Miller-Rabin, deterministic bases derived from the modulus).
    pub fn new(modulus: BigUint) -> Result<Self> {
        if !is_probable_prime(&modulus, MILLER_RABIN_ROUNDS) {
            return Err(Error::Config(format!("modulus {modulus} is not prime")));
        }
        let bits = modulus.bits();
        Ok(PrimeField(Arc::new(FieldInner {
            half: (&modulus - 1u32) >> 1,
            element_bytes: bits.div_ceil(8),
            bits,
            modulus,
        })))
    }

    /// Parses a modulus from a decimal string or a 0x-prefixed hex string.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        let value = if let Some(hex) = s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
            BigUint::parse_bytes(hex.as_bytes(), 16)
        } else {
            BigUint::parse_bytes(s.as_bytes(), 10)
        };
        match value {
            Some(v) => Self::new(v),
            None => Err(Error::Config(format!("cannot parse modulus `{s}`"))),
        }
    }

    /// The default 256-bit modulus 2^255 − 19.
    pub fn default_field() -> Self {
        static DEFAULT: OnceLock<PrimeField> = OnceLock::new();
        DEFAULT
            .get_or_init(|| {
                let p = (BigUint::one() << 255u32) - BigUint::from(19u32);
                PrimeField::new(p).expect("2^255 - 19 is prime")
            })
            .clone()
    }

    pub fn modulus(&self) -> &BigUint {
        &self.0.modulus
    }

    pub fn bits(&self) -> u64 {
        self.0.bits
    }

    /// Bytes needed to transmit one element; used by the byte counter.
    pub fn element_bytes(&self) -> u64 {
        self.0.element_bytes
    }

    /// Largest declared bitlength ℓ such that any |value| < 2^ℓ still
    /// satisfies |value| < p/2 with margin.
    pub fn capacity_bits(&self) -> u32 {
        (self.0.bits.saturating_sub(2)) as u32
    }

    /// Wraps a raw integer into the field, reducing mod p.
    pub fn element(&self, value: BigUint) -> FieldElement {
        FieldElement {
            value: value % &self.0.modulus,
            field: self.clone(),
        }
    }

    pub fn element_from_u64(&self, value: u64) -> FieldElement {
        self.element(BigUint::from(value))
    }

    pub fn zero(&self) -> FieldElement {
        self.element(BigUint::zero())
    }

    pub fn one(&self) -> FieldElement {
        self.element(BigUint::one())
    }

    /// Centered-lift encoding of a signed integer. Requires |x| < p/2.
    pub fn encode_signed(&self, x: &BigInt) -> Result<FieldElement> {
        let mag = x.magnitude();
        if mag > &self.0.half {
            return Err(Error::Overflow(format!(
                "|{x}| exceeds p/2 for modulus of {} bits",
                self.0.bits
            )));
        }
        let value = match x.sign() {
            Sign::Minus => &self.0.modulus - mag,
            _ => mag.clone(),
        };
        Ok(self.element(value))
    }

    /// Inverse of [`encode_signed`](Self::encode_signed): values in
    /// (p/2, p) decode as negative.
    pub fn decode_signed(&self, e: &FieldElement) -> BigInt {
        debug_assert_eq!(*self, e.field);
        if e.value > self.0.half {
            BigInt::from_biguint(Sign::Minus, &self.0.modulus - &e.value)
        } else {
            BigInt::from_biguint(Sign::Plus, e.value.clone())
        }
    }

    /// Uniformly random element from the given generator.
    pub fn random_element<R: Rng + ?Sized>(&self, rng: &mut R) -> FieldElement {
        FieldElement {
            value: rng.gen_biguint_below(&self.0.modulus),
            field: self.clone(),
        }
    }
}

impl fmt::Display for PrimeField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({})", self.0.modulus)
    }
}

/// An element of a [`PrimeField`], always reduced to [0, p).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldElement {
    field: PrimeField,
    value: BigUint,
}

impl FieldElement {
    pub fn value(&self) -> &BigUint {
        &self.value
    }

    pub fn field(&self) -> &PrimeField {
        &self.field
    }

    pub fn is_zero(&self) -> bool {
        self.value.is_zero()
    }

    fn check_same_field(&self, rhs: &FieldElement) -> Result<()> {
        if self.field == rhs.field {
            Ok(())
        } else {
            Err(Error::FieldMismatch(
                self.field.modulus().to_string(),
                rhs.field.modulus().to_string(),
            ))
        }
    }

    pub fn add(&self, rhs: &FieldElement) -> Result<FieldElement> {
        self.check_same_field(rhs)?;
        let mut v = &self.value + &rhs.value;
        if v >= *self.field.modulus() {
            v -= self.field.modulus();
        }
        Ok(FieldElement {
            field: self.field.clone(),
            value: v,
        })
    }

    pub fn sub(&self, rhs: &FieldElement) -> Result<FieldElement> {
        self.check_same_field(rhs)?;
        let v = if self.value >= rhs.value {
            &self.value - &rhs.value
        } else {
            self.field.modulus() - &rhs.value + &self.value
        };
        Ok(FieldElement {
            field: self.field.clone(),
            value: v,
        })
    }

    pub fn mul(&self, rhs: &FieldElement) -> Result<FieldElement> {
        self.check_same_field(rhs)?;
        Ok(FieldElement {
            field: self.field.clone(),
            value: (&self.value * &rhs.value) % self.field.modulus(),
        })
    }

    pub fn neg(&self) -> FieldElement {
        let value = if self.value.is_zero() {
            BigUint::zero()
        } else {
            self.field.modulus() - &self.value
        };
        FieldElement {
            field: self.field.clone(),
            value,
        }
    }

    /// Multiplicative inverse via Fermat: a^(p-2) mod p. Errors on zero.
    pub fn inv(&self) -> Result<FieldElement> {
        if self.value.is_zero() {
            return Err(Error::DivisionByZero(Some(
                "inverse of zero field element".into(),
            )));
        }
        let exp = self.field.modulus() - 2u32;
        Ok(FieldElement {
            field: self.field.clone(),
            value: self.value.modpow(&exp, self.field.modulus()),
        })
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

/// Miller-Rabin with `rounds` bases drawn from a splitmix64 stream seeded
/// by the candidate itself, plus small-prime trial division.
fn is_probable_prime(n: &BigUint, rounds: u32) -> bool {
    const SMALL_PRIMES: [u32; 15] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47];
    if n < &BigUint::from(2u32) {
        return false;
    }
    for &q in &SMALL_PRIMES {
        let q = BigUint::from(q);
        if *n == q {
            return true;
        }
        if (n % &q).is_zero() {
            return false;
        }
    }

    // n - 1 = d * 2^s with d odd
    let n_minus_1 = n - 1u32;
    let s = n_minus_1.trailing_zeros().unwrap_or(0);
    let d = &n_minus_1 >> s;

    let mut seed = n
        .iter_u64_digits()
        .fold(0x9e3779b97f4a7c15u64, |acc, w| acc ^ w.wrapping_mul(0xff51afd7ed558ccd));
    let mut next = move || {
        seed = seed.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = seed;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    };

    let two = BigUint::from(2u32);
    let span = n - 3u32; // witnesses in [2, n-2]
    'witness: for _ in 0..rounds {
        let w = BigUint::from(next()) % &span + &two;
        let mut x = w.modpow(&d, n);
        if x.is_one() || x == n_minus_1 {
            continue;
        }
        for _ in 0..s.saturating_sub(1) {
            x = x.modpow(&two, n);
            if x == n_minus_1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn f101() -> PrimeField {
        PrimeField::new(BigUint::from(101u32)).unwrap()
    }

    #[test]
    fn rejects_composite_modulus() {
        assert!(PrimeField::new(BigUint::from(100u32)).is_err());
        assert!(PrimeField::new(BigUint::from(1u32)).is_err());
        // Carmichael number
        assert!(PrimeField::new(BigUint::from(561u32)).is_err());
    }

    #[test]
    fn accepts_known_primes() {
        for p in [2u32, 3, 101, 65537] {
            assert!(PrimeField::new(BigUint::from(p)).is_ok(), "{p}");
        }
        assert_eq!(PrimeField::default_field().bits(), 255);
    }

    #[test]
    fn parse_decimal_and_hex() {
        let f = PrimeField::parse("101").unwrap();
        assert_eq!(f.modulus(), &BigUint::from(101u32));
        let g = PrimeField::parse("0x65").unwrap();
        assert_eq!(f, g);
        assert!(PrimeField::parse("0xzz").is_err());
    }

    #[test]
    fn add_wraparound_and_identity() {
        let f = f101();
        let p_minus_1 = f.element_from_u64(100);
        let one = f.one();
        assert!(p_minus_1.add(&one).unwrap().is_zero());

        let a = f.element_from_u64(77);
        assert_eq!(a.add(&f.zero()).unwrap(), a);
        assert_eq!(f.element_from_u64(3).add(&f.element_from_u64(4)).unwrap(), f.element_from_u64(7));
    }

    #[test]
    fn mul_small_cases() {
        let f = f101();
        let a = f.element_from_u64(59);
        assert_eq!(a.mul(&f.one()).unwrap(), a);
        assert!(a.mul(&f.zero()).unwrap().is_zero());
        assert_eq!(
            f.element_from_u64(50).mul(&f.element_from_u64(3)).unwrap(),
            f.element_from_u64(49)
        );
    }

    #[test]
    fn inv_cases() {
        let f = f101();
        assert_eq!(f.one().inv().unwrap(), f.one());
        assert_eq!(f.element_from_u64(2).inv().unwrap(), f.element_from_u64(51));
        assert!(matches!(f.zero().inv(), Err(Error::DivisionByZero(_))));
    }

    #[test]
    fn mismatched_moduli_rejected() {
        let f = f101();
        let g = PrimeField::new(BigUint::from(103u32)).unwrap();
        let a = f.one();
        let b = g.one();
        assert!(matches!(a.add(&b), Err(Error::FieldMismatch(..))));
        assert!(matches!(a.mul(&b), Err(Error::FieldMismatch(..))));
    }

    #[test]
    fn signed_encoding_centered_lift() {
        let f = f101();
        let neg1 = f.encode_signed(&BigInt::from(-1)).unwrap();
        assert_eq!(neg1, f.element_from_u64(100));
        assert_eq!(f.decode_signed(&neg1), BigInt::from(-1));
        assert!(f.encode_signed(&BigInt::from(0)).unwrap().is_zero());
        // |x| >= p/2 rejected
        assert!(f.encode_signed(&BigInt::from(51)).is_err());
        assert!(f.encode_signed(&BigInt::from(-51)).is_err());
        assert!(f.encode_signed(&BigInt::from(50)).is_ok());
    }

    #[test]
    fn signed_roundtrip_randomized() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(7);
        for field in [f101(), PrimeField::default_field()] {
            let half: BigInt = BigInt::from_biguint(Sign::Plus, (field.modulus() - 1u32) >> 1);
            for _ in 0..1000 {
                let x = rng.gen_bigint_range(&(-&half), &(&half + 1));
                let e = field.encode_signed(&x).unwrap();
                assert_eq!(field.decode_signed(&e), x);
            }
        }
    }

    proptest! {
        #[test]
        fn field_axioms_small(a in 0u64..101, b in 0u64..101, c in 0u64..101) {
            let f = f101();
            let (ea, eb, ec) = (f.element_from_u64(a), f.element_from_u64(b), f.element_from_u64(c));
            // associativity
            prop_assert_eq!(
                ea.add(&eb).unwrap().add(&ec).unwrap(),
                ea.add(&eb.add(&ec).unwrap()).unwrap()
            );
            prop_assert_eq!(
                ea.mul(&eb).unwrap().mul(&ec).unwrap(),
                ea.mul(&eb.mul(&ec).unwrap()).unwrap()
            );
            // distributivity
            prop_assert_eq!(
                ea.mul(&eb.add(&ec).unwrap()).unwrap(),
                ea.mul(&eb).unwrap().add(&ea.mul(&ec).unwrap()).unwrap()
            );
            // additive inverse
            prop_assert!(ea.add(&ea.neg()).unwrap().is_zero());
            // multiplicative inverse
            if a != 0 {
                prop_assert_eq!(ea.mul(&ea.inv().unwrap()).unwrap(), f.one());
            }
        }

        #[test]
        fn field_axioms_default_prime(a in any::<u64>(), b in any::<u64>(), c in any::<u64>()) {
            let f = PrimeField::default_field();
            let (ea, eb, ec) = (f.element_from_u64(a), f.element_from_u64(b), f.element_from_u64(c));
            prop_assert_eq!(
                ea.mul(&eb.add(&ec).unwrap()).unwrap(),
                ea.mul(&eb).unwrap().add(&ea.mul(&ec).unwrap()).unwrap()
            );
            if a != 0 {
                prop_assert_eq!(ea.mul(&ea.inv().unwrap()).unwrap(), f.one());
            }
        }

        #[test]
        fn product_of_encoded_in_range(a in -1000i64..=1000, b in -1000i64..=1000) {
            let f = PrimeField::default_field();
            let ea = f.encode_signed(&BigInt::from(a)).unwrap();
            let eb = f.encode_signed(&BigInt::from(b)).unwrap();
            let prod = ea.mul(&eb).unwrap();
            prop_assert_eq!(f.decode_signed(&prod), BigInt::from(a) * BigInt::from(b));
        }
    }
}
