//! Real roots of cubic polynomials in closed form.

use crate::scalar::Real;

/// Real roots of `a3·x³ + a2·x² + a1·x + a0` (`a3 ≠ 0`), in no particular
/// order. Three real roots use the trigonometric form, a single real root
/// uses Cardano's formula with the cancellation-free choice of cube root.
/// Repeated roots may be returned once or several times.
pub fn real_roots<T: Real>(a3: T, a2: T, a1: T, a0: T) -> Vec<T> {
    debug_assert!(a3 != T::zero());
    let three = T::lit(3.0);
    let b = a2 / a3;
    let c = a1 / a3;
    let d = a0 / a3;
    let shift = -b / three;
    // depressed cubic t³ + p t + q with x = t − b/3
    let p = c - b * b / three;
    let q = T::lit(2.0) * b * b * b / T::lit(27.0) - b * c / three + d;
    let half_q = q * T::lit(0.5);
    let third_p = p / three;
    let disc = half_q * half_q + third_p * third_p * third_p;

    if disc > T::zero() {
        let s = disc.sqrt();
        let big = -(half_q.abs() + s).cbrt();
        let big = if half_q < T::zero() { -big } else { big };
        let small = if big != T::zero() { -third_p / big } else { T::zero() };
        vec![big + small + shift]
    } else if p == T::zero() {
        vec![shift]
    } else {
        let r = (-third_p).sqrt();
        let arg = (half_q / (third_p * r)).max(-T::one()).min(T::one());
        let phi = arg.acos() / three;
        let two_r = T::lit(2.0) * r;
        let step = T::lit(2.0) * T::PI() / three;
        (0..3).map(|k| two_r * (phi - step * T::from_count(k)).cos() + shift).collect()
    }
}
