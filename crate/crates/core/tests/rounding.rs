use half::f16;
use pit_core::precision::{round_scalar, FloatFormat};
use pit_core::problems::NoiseRng;

fn same(a: f64, b: f64) -> bool {
    a.to_bits() == b.to_bits()
}

/// Finite binary16 values in increasing order, from 0 to the largest.
fn positive_halves() -> Vec<f64> {
    (0u16..0x7C00).map(|h| f16::from_bits(h).to_f64()).collect()
}

#[test]
fn every_half_pattern_is_a_fixed_point() {
    let f = FloatFormat::FP16;
    let mut checked = 0;
    for h in 0..=u16::MAX {
        let x = f16::from_bits(h).to_f64();
        if x.is_nan() {
            assert!(round_scalar(x, &f).is_nan());
            continue;
        }
        assert!(same(round_scalar(x, &f), x), "pattern {h:#06x}");
        checked += 1;
    }
    assert_eq!(checked, 65536 - 2046);
}

#[test]
fn half_midpoints_round_to_even() {
    let f = FloatFormat::FP16;
    let vals = positive_halves();
    for (i, w) in vals.windows(2).enumerate() {
        let (lo, hi) = (w[0], w[1]);
        let mid = 0.5 * (lo + hi);
        // the pattern of `lo` is i; ties go to the even pattern
        let even = if i % 2 == 0 { lo } else { hi };
        for sign in [1.0, -1.0] {
            assert!(same(round_scalar(sign * mid, &f), sign * even), "tie between {lo} and {hi}");
            let below = f64::from_bits(mid.to_bits() - 1);
            let above = f64::from_bits(mid.to_bits() + 1);
            assert!(same(round_scalar(sign * below, &f), sign * lo));
            assert!(same(round_scalar(sign * above, &f), sign * hi));
        }
    }
}

#[test]
fn half_overflow_and_underflow() {
    let f = FloatFormat::FP16;
    assert_eq!(round_scalar(65519.99, &f), 65504.0);
    assert_eq!(round_scalar(65520.0, &f), f64::INFINITY);
    assert_eq!(round_scalar(-1e6, &f), f64::NEG_INFINITY);
    let tiny = f16::from_bits(1).to_f64();
    assert!(same(round_scalar(0.5 * tiny, &f), 0.0));
    assert!(same(round_scalar(-0.5 * tiny, &f), -0.0));
    assert_eq!(round_scalar(0.75 * tiny, &f), tiny);
}

#[test]
fn half_without_subnormals_flushes() {
    let f = FloatFormat::FP16.with_subnormals(false);
    let min_normal = f16::from_bits(0x0400).to_f64();
    for h in 1u16..0x0400 {
        let x = f16::from_bits(h).to_f64();
        assert_eq!(round_scalar(x, &f), 0.0, "pattern {h:#06x}");
    }
    assert_eq!(round_scalar(min_normal, &f), min_normal);
}

#[test]
fn single_agrees_with_native_conversion() {
    let f = FloatFormat::FP32;
    let mut rng = NoiseRng::new(2024);
    let mut mismatches = 0;
    for i in 0..1_000_000u32 {
        let bits = rng.next_u64();
        let x = if i % 4 == 0 {
            // exact midpoint between neighbouring binary32 values
            let base = f32::from_bits(bits as u32 & 0x7F7F_FFFF);
            let next = f32::from_bits(base.to_bits() + 1);
            0.5 * (base as f64 + next as f64)
        } else {
            // exponents spanning binary32 underflow and overflow
            let exponent = 1023 - 160 + (bits >> 52) % 300;
            f64::from_bits((bits & (1 << 63)) | exponent << 52 | (bits & ((1 << 52) - 1)))
        };
        if !same(round_scalar(x, &f), x as f32 as f64) {
            mismatches += 1;
        }
    }
    assert_eq!(mismatches, 0);
}
