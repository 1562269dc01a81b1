//! Fixed-step classical Runge-Kutta integration.

use nalgebra::SVector;

use crate::error::{GliderError, Result};

/// One RK4 step of `x' = f(t, x)` from `t` to `t + dt`.
pub fn integrate_step<const N: usize, F>(x: &SVector<f64, N>, t: f64, dt: f64, mut f: F) -> Result<SVector<f64, N>>
where
    F: FnMut(f64, &SVector<f64, N>) -> Result<SVector<f64, N>>,
{
    let half = dt / 2.0;
    let k1 = f(t, x)?;
    let k2 = f(t + half, &(x + k1 * half))?;
    let k3 = f(t + half, &(x + k2 * half))?;
    let k4 = f(t + dt, &(x + k3 * dt))?;
    let next = x + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
    if next.iter().all(|v| v.is_finite()) {
        Ok(next)
    } else {
        Err(GliderError::NonFiniteState {
            t: t + dt,
            what: "integrator produced a non-finite state".into(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Vector1;

    #[test]
    fn constant_state_is_unchanged() {
        let x = Vector1::new(3.5);
        let next = integrate_step(&x, 0.0, 0.1, |_, _| Ok(Vector1::zeros())).unwrap();
        assert_eq!(next, x);
    }

    #[test]
    fn exponential_decay_is_fourth_order() {
        let x = Vector1::new(1.0);
        let next = integrate_step(&x, 0.0, 0.01, |_, x| Ok(-x)).unwrap();
        // RK4 reproduces the Taylor series through dt^4.
        let dt: f64 = 0.01;
        let taylor = 1.0 - dt + dt * dt / 2.0 - dt.powi(3) / 6.0 + dt.powi(4) / 24.0;
        assert!((next[0] - taylor).abs() < 1e-16);
        assert!((next[0] - (-dt).exp()).abs() < dt.powi(5));
        assert!((next[0] - 0.990_049_8).abs() < 1e-7);
    }

    #[test]
    fn non_finite_state_is_rejected() {
        let x = Vector1::new(1.0);
        let err = integrate_step(&x, 0.0, 0.1, |_, _| Ok(Vector1::new(f64::NAN))).unwrap_err();
        assert!(matches!(err, GliderError::NonFiniteState { .. }));
    }
}
