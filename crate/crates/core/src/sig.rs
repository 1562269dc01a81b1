//! Signed power operator `sig^x(y) = |y|^x sign(y)`.

use nalgebra::SVector;

/// Sign with `sign(0) = 0`.
#[inline]
pub fn sign(y: f64) -> f64 {
    if y > 0.0 {
        1.0
    } else if y < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// `|y|^x sign(y)`. `sig(0, y)` is `sign(y)`, `sig(1, y)` is `y`.
#[inline]
pub fn sig(x: f64, y: f64) -> f64 {
    if x == 0.0 {
        return sign(y);
    }
    if x == 1.0 {
        return y;
    }
    sign(y) * y.abs().powf(x)
}

/// Componentwise `sig` with a per-component exponent.
pub fn sig_vec<const N: usize>(x: &SVector<f64, N>, y: &SVector<f64, N>) -> SVector<f64, N> {
    SVector::<f64, N>::from_fn(|i, _| sig(x[i], y[i]))
}

/// Componentwise `sig` with one exponent for every component.
pub fn sig_scalar<const N: usize>(x: f64, y: &SVector<f64, N>) -> SVector<f64, N> {
    y.map(|v| sig(x, v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn special_exponents() {
        assert_eq!(sig(0.0, 0.0), 0.0);
        assert_eq!(sig(0.0, -3.0), -1.0);
        assert_eq!(sig(1.0, -2.5), -2.5);
        assert_eq!(sig(2.0, -3.0), -9.0);
        assert_eq!(sig(0.5, 4.0), 2.0);
        assert_eq!(sig(1.5, 4.0), 8.0);
    }

    proptest! {
        #[test]
        fn odd_and_monotone(x in 0.05f64..3.0, a in -50.0f64..50.0, b in -50.0f64..50.0) {
            prop_assert_eq!(sig(x, -a), -sig(x, a));
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assert!(sig(x, lo) <= sig(x, hi));
        }

        #[test]
        fn square_is_y_abs_y(y in -100.0f64..100.0) {
            let expected = y * y.abs();
            prop_assert!((sig(2.0, y) - expected).abs() <= 1e-12 * (1.0 + expected.abs()));
        }
    }
}
