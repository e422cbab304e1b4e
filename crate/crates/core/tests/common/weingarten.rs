//! Exact Weingarten sums for two and three replicas.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use hybridlab_core::statmech::{perm_distance, Permutation};

fn int(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

fn pow(d: &BigRational, e: usize) -> BigRational {
    (0..e).fold(BigRational::one(), |acc, _| acc * d)
}

/// `Wg(σ, D)` for `U(D)`, `r ≤ 3`, from the closed-form class values.
pub fn weingarten(sigma: &Permutation, big_d: &BigRational) -> BigRational {
    let r = sigma.replicas();
    let dist = perm_distance(sigma);
    let d2 = big_d * big_d;
    match (r, dist) {
        (1, 0) => BigRational::one() / big_d,
        (2, 0) => BigRational::one() / (&d2 - int(1)),
        (2, 1) => -BigRational::one() / (big_d * (&d2 - int(1))),
        (3, 0) => (&d2 - int(2)) / (big_d * (&d2 - int(1)) * (&d2 - int(4))),
        (3, 1) => -BigRational::one() / ((&d2 - int(1)) * (&d2 - int(4))),
        (3, 2) => int(2) / (big_d * (&d2 - int(1)) * (&d2 - int(4))),
        _ => panic!("no table for r = {r}"),
    }
}

/// `W(s1, s2; s3) = Σ_τ Wg(s3⁻¹τ, d²) d^{2r − |s1⁻¹τ| − |s2⁻¹τ|}`.
pub fn triangle_weight(s1: &Permutation, s2: &Permutation, s3: &Permutation, d: i64) -> BigRational {
    let r = s1.replicas();
    let d = int(d);
    let big_d = &d * &d;
    let (i1, i2, i3) = (s1.inverse(), s2.inverse(), s3.inverse());
    Permutation::all(r)
        .unwrap()
        .iter()
        .map(|tau| {
            let e = 2 * r - perm_distance(&i1.compose(tau)) - perm_distance(&i2.compose(tau));
            weingarten(&i3.compose(tau), &big_d) * pow(&d, e)
        })
        .fold(BigRational::zero(), |acc, v| acc + v)
}

/// Leading exponent of `|W|` in `d`, read off from two large dimensions;
/// `None` when the sum cancels identically.
pub fn leading_slope(s1: &Permutation, s2: &Permutation, s3: &Permutation) -> Option<f64> {
    let (d1, d2) = (1_000i64, 100_000i64);
    let w1 = triangle_weight(s1, s2, s3, d1).abs();
    let w2 = triangle_weight(s1, s2, s3, d2).abs();
    if w1.is_zero() && w2.is_zero() {
        return None;
    }
    assert!(!w1.is_zero() && !w2.is_zero(), "weight vanishes at one dimension only");
    let ln = |w: &BigRational| ln_big(w.numer()) - ln_big(w.denom());
    Some((ln(&w2) - ln(&w1)) / ((d2 as f64).ln() - (d1 as f64).ln()))
}

fn ln_big(v: &BigInt) -> f64 {
    let bits = v.bits();
    let shift = bits.saturating_sub(60);
    let top: BigInt = v >> shift;
    let top: f64 = top.to_string().parse().unwrap();
    top.ln() + shift as f64 * std::f64::consts::LN_2
}
