//! Error functions and truncated-normal sampling.
//!
//! `erfc` and `erfcx` use W. J. Cody's rational Chebyshev approximations on
//! the three intervals `|x| ≤ 0.46875`, `0.46875 < |x| ≤ 4` and `|x| > 4`.
//! `erfcx` is evaluated directly on each interval and never formed as
//! `exp(x²)·erfc(x)`, so it stays finite for arguments up to `1e8` and beyond.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::scalar::Real;

const ERF_A: [f64; 5] = [
    3.161_123_743_870_565_6,
    113.864_154_151_050_16,
    377.485_237_685_302_02,
    3_209.377_589_138_469_5,
    0.185_777_706_184_603_15,
];
const ERF_B: [f64; 4] = [
    23.601_290_952_344_122,
    244.024_637_934_444_17,
    1_282.616_526_077_372_3,
    2_844.236_833_439_170_6,
];
const ERFC_C: [f64; 9] = [
    0.564_188_496_988_670_09,
    8.883_149_794_388_376,
    66.119_190_637_141_63,
    298.635_138_197_400_13,
    881.952_221_241_769_1,
    1_712.047_612_634_070_6,
    2_051.078_377_826_071_5,
    1_230.339_354_797_997_2,
    2.153_115_354_744_038_5e-8,
];
const ERFC_D: [f64; 8] = [
    15.744_926_110_709_835,
    117.693_950_891_312_5,
    537.181_101_862_009_9,
    1_621.389_574_566_690_2,
    3_290.799_235_733_459_6,
    4_362.619_090_143_247,
    3_439.367_674_143_721_6,
    1_230.339_354_803_749_4,
];
const ERFC_P: [f64; 6] = [
    0.305_326_634_961_232_36,
    0.360_344_899_949_804_45,
    0.125_781_726_111_229_26,
    0.016_083_785_148_742_275,
    6.587_491_615_298_378e-4,
    0.016_315_387_137_302_097,
];
const ERFC_Q: [f64; 5] = [
    2.568_520_192_289_822,
    1.872_952_849_923_460_4,
    0.527_905_102_951_428_4,
    0.060_518_341_312_441_32,
    0.002_335_204_976_268_691_8,
];

const SMALL: f64 = 0.468_75;
const FRAC_1_SQRT_PI: f64 = 0.564_189_583_547_756_3;

#[inline]
fn small_erf_ratio<T: Real>(z: T) -> T {
    let a = |i: usize| T::lit(ERF_A[i]);
    let b = |i: usize| T::lit(ERF_B[i]);
    let num = (((a(4) * z + a(0)) * z + a(1)) * z + a(2)) * z + a(3);
    let den = (((z + b(0)) * z + b(1)) * z + b(2)) * z + b(3);
    num / den
}

/// `erfcx(y)` for `y > 0.46875`.
#[inline]
fn erfcx_tail<T: Real>(y: T) -> T {
    if y <= T::lit(4.0) {
        let c = |i: usize| T::lit(ERFC_C[i]);
        let d = |i: usize| T::lit(ERFC_D[i]);
        let mut num = c(8) * y;
        let mut den = y;
        for i in 0..7 {
            num = (num + c(i)) * y;
            den = (den + d(i)) * y;
        }
        (num + c(7)) / (den + d(7))
    } else {
        let p = |i: usize| T::lit(ERFC_P[i]);
        let q = |i: usize| T::lit(ERFC_Q[i]);
        let z = (y * y).recip();
        let mut num = p(5) * z;
        let mut den = z;
        for i in 0..4 {
            num = (num + p(i)) * z;
            den = (den + q(i)) * z;
        }
        let r = z * (num + p(4)) / (den + q(4));
        (T::lit(FRAC_1_SQRT_PI) - r) / y
    }
}

/// `exp(±y²)` split as `exp(±ỹ²)·exp(±(y−ỹ)(y+ỹ))` with `ỹ = trunc(16y)/16`,
/// which avoids the rounding error of squaring `y` before exponentiating.
#[inline]
fn exp_square<T: Real>(y: T, negative: bool) -> T {
    let sixteen = T::lit(16.0);
    let yt = (y * sixteen).trunc() / sixteen;
    let del = (y - yt) * (y + yt);
    if negative {
        (-yt * yt).exp() * (-del).exp()
    } else {
        (yt * yt).exp() * del.exp()
    }
}

/// Complementary error function `(2/√π)∫ₓ^∞ e^{−t²} dt`.
pub fn erfc<T: Real>(x: T) -> T {
    if x.is_nan() {
        return x;
    }
    let y = x.abs();
    if y <= T::lit(SMALL) {
        return T::one() - x * small_erf_ratio(y * y);
    }
    let tail = if y.is_infinite() { T::zero() } else { erfcx_tail(y) * exp_square(y, true) };
    if x < T::zero() {
        T::lit(2.0) - tail
    } else {
        tail
    }
}

/// Error function.
pub fn erf<T: Real>(x: T) -> T {
    let y = x.abs();
    if y <= T::lit(SMALL) {
        x * small_erf_ratio(y * y)
    } else {
        let v = T::one() - erfc(y);
        if x < T::zero() {
            -v
        } else {
            v
        }
    }
}

/// Scaled complementary error function `e^{x²}·erfc(x)`.
///
/// Overflows to `+∞` only for `x` below about `−26.6` (f64).
pub fn erfcx<T: Real>(x: T) -> T {
    if x.is_nan() {
        return x;
    }
    let y = x.abs();
    if y <= T::lit(SMALL) {
        let z = y * y;
        return z.exp() * (T::one() - x * small_erf_ratio(z));
    }
    if x > T::zero() {
        if x.is_infinite() {
            return T::zero();
        }
        return erfcx_tail(y);
    }
    // erfcx(−y) = 2e^{y²} − erfcx(y)
    T::lit(2.0) * exp_square(y, false) - erfcx_tail(y)
}

/// `ln erfcx(x)`, finite for every finite `x`.
pub fn ln_erfcx<T: Real>(x: T) -> T {
    if x >= -T::lit(SMALL) {
        erfcx(x).ln()
    } else {
        // ln(e^{x²} erfc(x)) with erfc(x) ∈ (1, 2) for x < 0
        x * x + erfc(x).ln()
    }
}

/// Standard normal CDF `Φ(x)`.
pub fn normal_cdf<T: Real>(x: T) -> T {
    T::lit(0.5) * erfc(-x / T::SQRT_2())
}

/// Standard normal upper tail `1 − Φ(x)`, accurate for large positive `x`.
pub fn normal_sf<T: Real>(x: T) -> T {
    T::lit(0.5) * erfc(x / T::SQRT_2())
}

/// Standard normal quantile `Φ⁻¹(p)` for `p ∈ (0, 1)`.
///
/// Acklam's rational approximation followed by one Halley step against
/// `erfc`, which brings the result to full double precision.
pub fn normal_quantile<T: Real>(p: T) -> T {
    if p.is_nan() || p < T::zero() || p > T::one() {
        return T::nan();
    }
    if p == T::zero() {
        return T::neg_infinity();
    }
    if p == T::one() {
        return T::infinity();
    }
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    let pf = p.as_f64();
    let tail = |q: f64| {
        let q = (-2.0 * q.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    let x0 = if pf < 0.024_25 {
        tail(pf)
    } else if pf > 1.0 - 0.024_25 {
        -tail(1.0 - pf)
    } else {
        let q = pf - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    };
    let mut x = T::lit(x0);
    // Halley refinement; the error term is taken from whichever tail is
    // smaller so that it does not cancel.
    let half = T::lit(0.5);
    let e = if p < half { normal_cdf(x) - p } else { (T::one() - p) - normal_sf(x) };
    let u = e * (T::lit(2.0) * T::PI()).sqrt() * (x * x * half).exp();
    if u.is_finite() {
        x = x - u / (T::one() + x * u * half);
    }
    x
}

/// Deterministic random stream backed by the ChaCha20 block function, which
/// is counter based: identical seeds reproduce identical streams bit for bit.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    inner: ChaCha20Rng,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        Self { seed, inner: ChaCha20Rng::seed_from_u64(seed) }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Uniform draw on `[0, 1)` with 53 random bits.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        (self.inner.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform draw on `(0, 1]`, safe to pass to `ln`.
    #[inline]
    pub fn uniform_pos(&mut self) -> f64 {
        1.0 - self.uniform()
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

/// Which half-line a truncated normal is restricted to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// `x ≥ 0`
    NonNegative,
    /// `x ≤ 0`
    NonPositive,
}

/// Lower truncation point (in standard units) above which the exponential
/// proposal is used instead of the inverse CDF.
const EXP_PROPOSAL_THRESHOLD: f64 = 0.5;

/// Standard normal draw conditioned on `z ≥ a`.
fn standard_tail<T: Real>(a: T, rng: &mut RngStream) -> T {
    if a < T::lit(EXP_PROPOSAL_THRESHOLD) {
        // inverse CDF on the upper tail: z = Q⁻¹(U·Q(a))
        let q = T::lit(rng.uniform_pos()) * normal_sf(a);
        let z = -normal_quantile(q);
        z.max(a)
    } else {
        // Robert (1995): translated exponential proposal with optimal rate
        let lambda = (a + (a * a + T::lit(4.0)).sqrt()) * T::lit(0.5);
        loop {
            let z = a - T::lit(rng.uniform_pos()).ln() / lambda;
            let d = z - lambda;
            if T::lit(rng.uniform_pos()).ln() <= -d * d * T::lit(0.5) {
                return z;
            }
        }
    }
}

/// Draws from `N(mean, sd²)` restricted to the given half-line.
pub fn sample_truncated_normal<T: Real>(mean: T, sd: T, side: Side, rng: &mut RngStream) -> T {
    debug_assert!(sd > T::zero());
    match side {
        Side::NonNegative => {
            let z = standard_tail(-mean / sd, rng);
            (mean + sd * z).max(T::zero())
        }
        Side::NonPositive => {
            let z = standard_tail(mean / sd, rng);
            (mean - sd * z).min(T::zero())
        }
    }
}
