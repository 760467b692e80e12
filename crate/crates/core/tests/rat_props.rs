use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use proptest::prelude::*;
use shearpack::Rat;

fn big(r: &Rat) -> BigRational {
    BigRational::new(r.numer(), r.denom())
}

fn rat(q: &BigRational) -> Rat {
    Rat::from_bigints(q.numer().clone(), q.denom().clone()).unwrap()
}

/// Mixes small values with ones near the `i64` limits so both
/// representations get exercised.
fn any_rat() -> impl Strategy<Value = BigRational> {
    let part = prop_oneof![
        -1000i64..1000,
        any::<i64>(),
        Just(i64::MAX),
        Just(i64::MIN),
        Just(i64::MIN + 1),
    ];
    let denom = prop_oneof![1i64..1000, 1i64..i64::MAX, Just(i64::MAX)];
    (part.clone(), denom, part, 0u32..3).prop_map(|(n, d, extra, shift)| {
        let base = BigRational::new(BigInt::from(n), BigInt::from(d));
        // Occasionally push well past 64 bits.
        base * BigRational::from_integer(BigInt::from(extra).abs() + 1).pow(shift as i32)
    })
}

proptest! {
    #[test]
    fn arithmetic_matches_bigrational(a in any_rat(), b in any_rat()) {
        let (x, y) = (rat(&a), rat(&b));
        prop_assert_eq!(big(&(&x + &y)), &a + &b);
        prop_assert_eq!(big(&(&x - &y)), &a - &b);
        prop_assert_eq!(big(&(&x * &y)), &a * &b);
        if !b.is_zero() {
            prop_assert_eq!(big(&(&x / &y)), &a / &b);
        }
        prop_assert_eq!(x.cmp(&y), a.cmp(&b));
        prop_assert_eq!(x == y, a == b);
        prop_assert_eq!(big(&-x.clone()), -a.clone());
    }

    #[test]
    fn rounding_matches_bigrational(a in any_rat()) {
        let x = rat(&a);
        prop_assert_eq!(x.floor(), a.floor().to_integer());
        prop_assert_eq!(x.ceil(), a.ceil().to_integer());
        prop_assert_eq!(x.is_integer(), a.is_integer());
        prop_assert_eq!(x.signum(), if a.is_zero() { 0 } else if a.is_positive() { 1 } else { -1 });
    }

    #[test]
    fn equal_values_hash_alike(n in -10_000i64..10_000, d in 1i64..10_000, k in 1i64..1000) {
        use std::collections::hash_map::DefaultHasher;
        use std::hash::{Hash, Hasher};
        let h = |r: &Rat| {
            let mut s = DefaultHasher::new();
            r.hash(&mut s);
            s.finish()
        };
        let small = Rat::new(n, d);
        let scaled = Rat::from_bigints(BigInt::from(n) * k * BigInt::from(i64::MAX), BigInt::from(d) * k * BigInt::from(i64::MAX)).unwrap();
        prop_assert_eq!(&small, &scaled);
        prop_assert_eq!(h(&small), h(&scaled));
    }

    #[test]
    fn square_roots_bracket(n in 0i64..1_000_000_000, d in 1i64..1_000_000, bits in 4u32..60) {
        let x = Rat::new(n, d);
        let lo = x.sqrt_lower(bits);
        let hi = x.sqrt_upper(bits);
        prop_assert!(&lo * &lo <= x);
        prop_assert!(&hi * &hi >= x);
        prop_assert!(lo <= hi);
        // Both sit within 2^-bits of each other, scaled by the root.
        let slack = (Rat::one() + &hi) * Rat::pow2(-(bits as i32)) * Rat::from_int(2);
        prop_assert!(&hi - &lo <= slack);
    }

    #[test]
    fn text_round_trip(a in any_rat()) {
        let x = rat(&a);
        let back: Rat = x.to_string().parse().unwrap();
        prop_assert_eq!(back, x);
    }
}
