//! The standard complex Gaussian used throughout the crate.
//!
//! A standard complex Gaussian has independent real and imaginary parts,
//! each with mean 0 and variance 1, i.e. density `exp(-|w|²/2) / 2π` on the
//! plane. Consequently `E|w|² = 2`, and the mass of the open disk of radius
//! `r` about the origin is `1 - exp(-r²/2)`.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use statrs::function::gamma::gamma_lr;

/// Expected squared modulus of a standard complex Gaussian.
pub const SECOND_MOMENT: f64 = 2.0;

pub fn sample<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im)
}

/// Mass of `{w : |w - c| < radius}` where `|c| = center_abs`.
///
/// `|w - c|²` is noncentral chi-squared with two degrees of freedom and
/// noncentrality `|c|²`; its distribution function is evaluated as the
/// Poisson mixture of central chi-squared laws.
pub fn disk_mass(center_abs: f64, radius: f64) -> f64 {
    if radius <= 0.0 {
        return 0.0;
    }
    if radius.is_infinite() {
        return 1.0;
    }
    let x = radius * radius / 2.0;
    let half_lambda = center_abs * center_abs / 2.0;
    if half_lambda == 0.0 {
        return -(-x).exp_m1();
    }
    // Sum outward from the Poisson mode so the weights never underflow
    // before the mass they carry is accounted for.
    let mode = half_lambda.floor() as u64;
    let weight_at = |j: u64| -> f64 {
        let ln_w = -half_lambda + j as f64 * half_lambda.ln() - ln_factorial(j);
        ln_w.exp()
    };
    let mut total = 0.0;
    let mut j = mode;
    loop {
        let w = weight_at(j);
        total += w * gamma_lr(j as f64 + 1.0, x);
        if w < 1e-18 || j == 0 {
            break;
        }
        j -= 1;
    }
    let mut j = mode + 1;
    loop {
        let w = weight_at(j);
        total += w * gamma_lr(j as f64 + 1.0, x);
        if w < 1e-18 {
            break;
        }
        j += 1;
    }
    total.clamp(0.0, 1.0)
}

/// Mass of the annulus `N_{r+s}(c) \ N_{r-s}(c)`; the inner disk is empty
/// once `s >= r`.
pub fn annulus_mass(center_abs: f64, radius: f64, width: f64) -> f64 {
    let outer = disk_mass(center_abs, radius + width);
    let inner = if width >= radius {
        0.0
    } else {
        disk_mass(center_abs, radius - width)
    };
    (outer - inner).max(0.0)
}

fn ln_factorial(j: u64) -> f64 {
    statrs::function::factorial::ln_factorial(j)
}
