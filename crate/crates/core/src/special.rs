//! Standard normal helpers.
//!
//! `erf`/`erfc` come from `libm`; the inverse CDF is Acklam's rational
//! approximation polished with one Newton step on the CDF.

use std::f64::consts::FRAC_1_SQRT_2;

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Standard normal density.
pub fn normal_pdf(z: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * z * z).exp()
}

/// Standard normal CDF, accurate in both tails.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z * FRAC_1_SQRT_2)
}

/// `∫_{-∞}^z Φ(x) dx = z Φ(z) + φ(z)`.
pub fn normal_cdf_integral(z: f64) -> f64 {
    if z < -8.0 {
        // z Φ(z) + φ(z) cancels catastrophically; use the Mills-ratio tail.
        let z2 = z * z;
        normal_pdf(z) / z2 * (1.0 - 3.0 / z2 + 15.0 / (z2 * z2))
    } else {
        z * normal_cdf(z) + normal_pdf(z)
    }
}

/// Standard normal quantile for `p ∈ (0, 1)`.
pub fn normal_quantile(p: f64) -> f64 {
    debug_assert!(p > 0.0 && p < 1.0);
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
    const P_LOW: f64 = 0.024_25;

    let x = if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };

    // One Newton step on Φ(x) = p. The residual is computed on the smaller
    // tail so that it keeps relative accuracy far from the median.
    let resid = if x < 0.0 {
        normal_cdf(x) - p
    } else {
        (1.0 - p) - normal_cdf(-x)
    };
    let pdf = normal_pdf(x);
    if pdf > 0.0 {
        x - resid / pdf
    } else {
        x
    }
}

/// `E|Z - z|` for a standard normal `Z`.
pub fn normal_abs_deviation(z: f64) -> f64 {
    z * libm::erf(z * FRAC_1_SQRT_2) + 2.0 * normal_pdf(z)
}

/// `sqrt(2π)`
pub const SQRT_2PI: f64 = 2.506_628_274_631_000_2;
