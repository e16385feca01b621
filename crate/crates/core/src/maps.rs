//! The uniformizing maps z ↦ λ, z ↦ ζ and the oscillatory phase Φ.

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const I: C64 = C64::new(0.0, 1.0);

fn nonzero(z: C64) -> Result<()> {
    if z == C64::new(0.0, 0.0) {
        Err(Error::Domain(format!("{z}")))
    } else {
        Ok(())
    }
}

/// λ(z) = (z + 1/z)/2.
pub fn lambda(z: C64) -> Result<C64> {
    nonzero(z)?;
    Ok(0.5 * (z + z.inv()))
}

/// ζ(z) = (z − 1/z)/2.
pub fn zeta(z: C64) -> Result<C64> {
    nonzero(z)?;
    Ok(0.5 * (z - z.inv()))
}

/// Φ(z; x, t) = ix(z − 1/z) − it(z² − 1/z²), i.e. 2ixζ − 4iζλt.
pub fn phase(z: C64, x: f64, t: f64) -> Result<C64> {
    nonzero(z)?;
    let w = z.inv();
    Ok(I * x * (z - w) - I * t * (z * z - w * w))
}

/// The phase on the unit circle, z = e^{iθ}, where it is real:
/// Φ = −2 sinθ (x − 2t cosθ). Written without ξ so that t = 0 is allowed.
pub fn circle_phase(theta: f64, x: f64, t: f64) -> f64 {
    -2.0 * theta.sin() * (x - 2.0 * t * theta.cos())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn fixed_values() {
        assert!((lambda(c(1.0, 0.0)).unwrap() - 1.0).norm() < 1e-15);
        assert!(lambda(I).unwrap().norm() < 1e-15);
        assert!((lambda(c(2.0, 0.0)).unwrap() - 1.25).norm() < 1e-15);
        assert!(zeta(c(1.0, 0.0)).unwrap().norm() < 1e-15);
        assert!((zeta(I).unwrap() - I).norm() < 1e-15);
        assert!((zeta(c(2.0, 0.0)).unwrap() - 0.75).norm() < 1e-15);
    }

    #[test]
    fn zero_is_rejected() {
        let z = c(0.0, 0.0);
        assert!(lambda(z).is_err());
        assert!(zeta(z).is_err());
        assert!(phase(z, 1.0, 1.0).is_err());
    }

    #[test]
    fn phase_samples() {
        assert!(phase(c(1.0, 0.0), 3.0, 7.0).unwrap().norm() < 1e-15);
        assert!(phase(I, 0.0, 1.0).unwrap().norm() < 1e-15);
        let z = C64::from_polar(1.0, PI / 3.0);
        let p = phase(z, 0.0, 1.0).unwrap();
        assert!((p - 3f64.sqrt()).norm() < 1e-12);
        assert!((circle_phase(PI / 3.0, 0.0, 1.0) - 3f64.sqrt()).abs() < 1e-12);
    }
}
