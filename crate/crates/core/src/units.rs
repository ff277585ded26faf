//! Unit conversions. Everything inside the crate is angular frequency (rad/s)
//! and seconds; configuration and output use ν = ω/2π in MHz and ns.

use std::f64::consts::TAU;

/// Linear frequency in MHz to angular frequency in rad/s.
#[inline]
pub fn mhz(nu: f64) -> f64 {
    TAU * 1e6 * nu
}

/// Angular frequency in rad/s to linear frequency in MHz.
#[inline]
pub fn to_mhz(omega: f64) -> f64 {
    omega / (TAU * 1e6)
}

#[inline]
pub fn ns(t: f64) -> f64 {
    t * 1e-9
}

#[inline]
pub fn to_ns(t: f64) -> f64 {
    t * 1e9
}
