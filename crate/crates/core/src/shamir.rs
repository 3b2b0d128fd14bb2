//! (t, n)-threshold polynomial secret sharing.
//!
//! A secret s is hidden as the constant term of a degree-t polynomial
//! with uniformly random higher coefficients; party i holds the
//! evaluation at the fixed point i (points are 1..n). Any t+1 shares
//! reconstruct s by Lagrange interpolation at 0; any t shares are
//! distributed independently of s.

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};
use crate::field::{FieldElement, PrimeField};

/// One party's point on a sharing polynomial.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Share {
    /// The party's fixed evaluation point, in 1..=n.
    pub point: u64,
    pub value: FieldElement,
    /// Degree of the polynomial this share belongs to.
    pub degree: usize,
}

/// Parameters of a sharing run: party count, threshold, field and the
/// seed all deterministic generators derive from.
#[derive(Clone, Debug)]
pub struct SharingConfig {
    pub n: usize,
    pub t: usize,
    pub field: PrimeField,
    pub rng_seed: u64,
}

impl SharingConfig {
    /// Validates n ≥ 3, t ≥ 1 and the honest-majority bound n ≥ 2t + 1.
    pub fn new(n: usize, t: usize, field: PrimeField, rng_seed: u64) -> Result<Self> {
        if n < 3 {
            return Err(Error::Config(format!(
                "party count must be at least 3, got {n}"
            )));
        }
        if t < 1 {
            return Err(Error::Config("threshold must be at least 1".into()));
        }
        if n < 2 * t + 1 {
            return Err(Error::Config(format!(
                "honest majority requires n >= 2t + 1, got n={n}, t={t}"
            )));
        }
        if BigUint::from(n as u64) >= *field.modulus() {
            return Err(Error::Config(format!(
                "party count {n} does not fit below the modulus"
            )));
        }
        Ok(SharingConfig { n, t, field, rng_seed })
    }

    /// Deterministic generator for one numbered randomness stream
    /// (per-party generators use streams 0..n, the dealer uses n).
    pub fn stream_rng(&self, stream: u64) -> ChaCha12Rng {
        let mut rng = ChaCha12Rng::seed_from_u64(self.rng_seed);
        rng.set_stream(stream);
        rng
    }

    pub fn share<R: Rng + ?Sized>(&self, secret: &FieldElement, rng: &mut R) -> Result<Vec<Share>> {
        share_with_degree(secret, self.n, self.t, rng)
    }
}

/// Shares `secret` among `n` parties on a degree-`degree` polynomial.
///
/// `degree` 0 produces the constant polynomial (every share equals the
/// secret); it carries no privacy and exists for tests and public
/// constants.
pub fn share_with_degree<R: Rng + ?Sized>(
    secret: &FieldElement,
    n: usize,
    degree: usize,
    rng: &mut R,
) -> Result<Vec<Share>> {
    if n == 0 {
        return Err(Error::Config("cannot share among zero parties".into()));
    }
    if n < degree + 1 {
        return Err(Error::Config(format!(
            "degree {degree} polynomial needs at least {} evaluation points, got {n}",
            degree + 1
        )));
    }
    let field = secret.field();

    // coefficients[0] = secret, the rest uniformly random
    let mut coefficients = Vec::with_capacity(degree + 1);
    coefficients.push(secret.clone());
    for _ in 0..degree {
        coefficients.push(field.random_element(rng));
    }

    (1..=n as u64)
        .map(|point| {
            let x = field.element_from_u64(point);
            // Horner evaluation
            let mut acc = coefficients[degree].clone();
            for c in coefficients.iter().rev().skip(1) {
                acc = acc.mul(&x)?.add(c)?;
            }
            Ok(Share { point, value: acc, degree })
        })
        .collect()
}

/// Lagrange coefficients λ_i for the evaluation points `points` and the
/// interpolation target, so that Σ λ_i · f(points[i]) = f(target) for
/// every polynomial f of degree < points.len().
pub fn lagrange_coefficients(
    field: &PrimeField,
    points: &[u64],
    target: u64,
) -> Result<Vec<FieldElement>> {
    if points.is_empty() {
        return Err(Error::Config("no evaluation points".into()));
    }
    for (i, p) in points.iter().enumerate() {
        if points[..i].contains(p) {
            return Err(Error::Config(format!("duplicate evaluation point {p}")));
        }
    }
    let tgt = field.element_from_u64(target);
    points
        .iter()
        .map(|&xi| {
            let exi = field.element_from_u64(xi);
            let mut num = field.one();
            let mut den = field.one();
            for &xj in points.iter().filter(|&&xj| xj != xi) {
                let exj = field.element_from_u64(xj);
                num = num.mul(&tgt.sub(&exj)?)?;
                den = den.mul(&exi.sub(&exj)?)?;
            }
            num.mul(&den.inv()?)
        })
        .collect()
}

/// Interpolates the sharing polynomial through the given shares and
/// evaluates it at `target` (0 recovers the secret).
///
/// All provided shares are used; if more than degree+1 are given they
/// must lie on the same polynomial for the result to be meaningful
/// (the engine's open path checks this explicitly).
pub fn reconstruct(shares: &[Share], target: u64) -> Result<FieldElement> {
    let degree = shares.iter().map(|s| s.degree).max().unwrap_or(0);
    if shares.len() < degree + 1 {
        return Err(Error::InsufficientShares {
            degree,
            got: shares.len(),
        });
    }
    let field = shares[0].value.field().clone();
    let points: Vec<u64> = shares.iter().map(|s| s.point).collect();
    let lambdas = lagrange_coefficients(&field, &points, target)?;
    let mut acc = field.zero();
    for (share, lambda) in shares.iter().zip(&lambdas) {
        acc = acc.add(&share.value.mul(lambda)?)?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use proptest::prelude::*;

    fn f101() -> PrimeField {
        PrimeField::new(BigUint::from(101u32)).unwrap()
    }

    fn cfg(n: usize, t: usize, seed: u64) -> SharingConfig {
        SharingConfig::new(n, t, f101(), seed).unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(SharingConfig::new(2, 1, f101(), 0).is_err()); // n < 3
        assert!(SharingConfig::new(3, 0, f101(), 0).is_err()); // t < 1
        assert!(SharingConfig::new(4, 2, f101(), 0).is_err()); // n < 2t+1
        assert!(SharingConfig::new(5, 2, f101(), 0).is_ok());
    }

    #[test]
    fn degree_zero_shares_equal_secret() {
        let f = f101();
        let secret = f.element_from_u64(42);
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        let shares = share_with_degree(&secret, 4, 0, &mut rng).unwrap();
        assert!(shares.iter().all(|s| s.value == secret));
    }

    #[test]
    fn roundtrip_small_field() {
        let c = cfg(3, 1, 99);
        let mut rng = c.stream_rng(0);
        for s in 0..101u64 {
            let secret = c.field.element_from_u64(s);
            let shares = c.share(&secret, &mut rng).unwrap();
            assert_eq!(reconstruct(&shares, 0).unwrap(), secret);
        }
    }

    #[test]
    fn roundtrip_random_secrets_both_configs() {
        let field = PrimeField::default_field();
        for (n, t) in [(3usize, 1usize), (5, 2)] {
            let c = SharingConfig::new(n, t, field.clone(), 7).unwrap();
            let mut rng = c.stream_rng(0);
            for _ in 0..1000 {
                let secret = field.random_element(&mut rng);
                let shares = c.share(&secret, &mut rng).unwrap();
                assert_eq!(reconstruct(&shares, 0).unwrap(), secret);
            }
        }
    }

    #[test]
    fn any_subset_of_t_plus_1_reconstructs() {
        let c = cfg(3, 1, 5);
        let mut rng = c.stream_rng(0);
        let secret = c.field.element_from_u64(42);
        let shares = c.share(&secret, &mut rng).unwrap();
        for subset in [[0usize, 1], [0, 2], [1, 2]] {
            let picked: Vec<Share> = subset.iter().map(|&i| shares[i].clone()).collect();
            assert_eq!(reconstruct(&picked, 0).unwrap(), secret, "subset {subset:?}");
        }
    }

    #[test]
    fn too_few_shares_is_an_error() {
        let c = cfg(3, 1, 5);
        let mut rng = c.stream_rng(0);
        let shares = c.share(&c.field.element_from_u64(42), &mut rng).unwrap();
        let err = reconstruct(&shares[..1], 0).unwrap_err();
        assert!(matches!(err, Error::InsufficientShares { degree: 1, got: 1 }));
    }

    #[test]
    fn lagrange_known_coefficients() {
        // points (1,2,3) at target 0 give (3, -3, 1)
        let f = f101();
        let l = lagrange_coefficients(&f, &[1, 2, 3], 0).unwrap();
        assert_eq!(l[0], f.element_from_u64(3));
        assert_eq!(l[1], f.encode_signed(&BigInt::from(-3)).unwrap());
        assert_eq!(l[2], f.one());

        // single point, target = the point itself
        let l = lagrange_coefficients(&f, &[5], 5).unwrap();
        assert_eq!(l, vec![f.one()]);

        assert!(lagrange_coefficients(&f, &[1, 1], 0).is_err());
    }

    #[test]
    fn lagrange_recovers_degree_two_polynomial() {
        let f = f101();
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        for _ in 0..50 {
            let coeffs: Vec<FieldElement> = (0..3).map(|_| f.random_element(&mut rng)).collect();
            let eval = |x: u64| {
                let ex = f.element_from_u64(x);
                let mut acc = coeffs[2].clone();
                for c in coeffs.iter().rev().skip(1) {
                    acc = acc.mul(&ex).unwrap().add(c).unwrap();
                }
                acc
            };
            let lambdas = lagrange_coefficients(&f, &[1, 2, 3], 0).unwrap();
            let mut acc = f.zero();
            for (x, l) in [1u64, 2, 3].iter().zip(&lambdas) {
                acc = acc.add(&eval(*x).mul(l).unwrap()).unwrap();
            }
            assert_eq!(acc, coeffs[0], "interpolation at 0 must give the constant term");
        }
    }

    /// Empirical share distribution across seeded sharings of a fixed
    /// secret is uniform over the field.
    #[test]
    fn single_share_distribution_uniform() {
        let c = cfg(3, 1, 12345);
        let mut rng = c.stream_rng(0);
        let secret = c.field.element_from_u64(17);
        let samples = 100_000usize;
        let mut counts = vec![0u32; 101];
        for _ in 0..samples {
            let shares = c.share(&secret, &mut rng).unwrap();
            let v: u64 = shares[0].value.value().try_into().unwrap();
            counts[v as usize] += 1;
        }
        let expected = 1.0 / 101.0;
        for (residue, &count) in counts.iter().enumerate() {
            let freq = count as f64 / samples as f64;
            assert!(
                (freq - expected).abs() < 0.01,
                "residue {residue}: frequency {freq} vs expected {expected}"
            );
        }
    }

    /// Privacy at the statistical level: the distribution of one share
    /// must not depend on the secret.
    #[test]
    fn share_distribution_independent_of_secret() {
        let c = cfg(3, 1, 999);
        let samples = 100_000usize;
        let observe = |secret_value: u64, stream: u64| -> Vec<f64> {
            let mut rng = c.stream_rng(stream);
            let secret = c.field.element_from_u64(secret_value);
            let mut counts = vec![0u64; 101];
            for _ in 0..samples {
                let shares = c.share(&secret, &mut rng).unwrap();
                let v: u64 = shares[0].value.value().try_into().unwrap();
                counts[v as usize] += 1;
            }
            counts.iter().map(|&c| c as f64 / samples as f64).collect()
        };
        let d0 = observe(5, 0);
        let d1 = observe(77, 1);
        let tv: f64 = d0
            .iter()
            .zip(&d1)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
            / 2.0;
        assert!(tv < 0.02, "total-variation distance {tv} too large");
    }

    proptest! {
        /// Linearity: share-wise addition reconstructs the sum,
        /// share-wise public scaling reconstructs the scaled secret.
        #[test]
        fn sharing_is_linear(a in 0u64..101, b in 0u64..101, k in 0u64..101, seed in any::<u64>()) {
            let c = cfg(3, 1, seed);
            let mut rng = c.stream_rng(0);
            let sa = c.share(&c.field.element_from_u64(a), &mut rng).unwrap();
            let sb = c.share(&c.field.element_from_u64(b), &mut rng).unwrap();

            let sum_shares: Vec<Share> = sa.iter().zip(&sb).map(|(x, y)| Share {
                point: x.point,
                value: x.value.add(&y.value).unwrap(),
                degree: x.degree,
            }).collect();
            prop_assert_eq!(
                reconstruct(&sum_shares, 0).unwrap(),
                c.field.element_from_u64((a + b) % 101)
            );

            let ek = c.field.element_from_u64(k);
            let scaled: Vec<Share> = sa.iter().map(|x| Share {
                point: x.point,
                value: x.value.mul(&ek).unwrap(),
                degree: x.degree,
            }).collect();
            prop_assert_eq!(
                reconstruct(&scaled, 0).unwrap(),
                c.field.element_from_u64((a * k) % 101)
            );
        }

        /// Round-trip for arbitrary subsets of size >= t+1.
        #[test]
        fn roundtrip_subsets(secret in 0u64..101, seed in any::<u64>(), mask in 0b001u8..0b111) {
            let c = cfg(3, 1, seed);
            let mut rng = c.stream_rng(0);
            let shares = c.share(&c.field.element_from_u64(secret), &mut rng).unwrap();
            let picked: Vec<Share> = (0..3).filter(|i| mask & (1 << i) != 0)
                .map(|i| shares[i as usize].clone()).collect();
            if picked.len() >= 2 {
                prop_assert_eq!(reconstruct(&picked, 0).unwrap(), c.field.element_from_u64(secret));
            } else {
                prop_assert!(reconstruct(&picked, 0).is_err());
            }
        }
    }
}
