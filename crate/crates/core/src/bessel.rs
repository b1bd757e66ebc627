//! Modified Bessel functions of the second kind for the orders needed by
//! the constant-potential kernel in `d ≤ 3`.
//!
//! `K₀` and `K₁` use the ascending series for `ρ ≤ 2` and Steed's
//! continued fraction (Temme's form) above; half-integer orders are
//! elementary.

use crate::error::{Error, Result};
use crate::scalar::{lit, to_f64, Real};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const SERIES_LIMIT: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Order {
    Zero,
    Half,
    One,
    ThreeHalves,
}

fn order<T: Real>(nu: T) -> Result<Order> {
    let v = to_f64(nu).abs();
    match v {
        v if v == 0.0 => Ok(Order::Zero),
        v if v == 0.5 => Ok(Order::Half),
        v if v == 1.0 => Ok(Order::One),
        v if v == 1.5 => Ok(Order::ThreeHalves),
        _ => Err(Error::Unsupported(format!("Bessel order {v}"))),
    }
}

fn check_arg<T: Real>(rho: T) -> Result<()> {
    if rho > T::zero() {
        Ok(())
    } else {
        Err(Error::domain("Bessel argument must be positive"))
    }
}

/// `(e^ρ K₀(ρ), e^ρ K₁(ρ))`.
fn k01_scaled<T: Real>(rho: T) -> (T, T) {
    if rho <= lit(SERIES_LIMIT) {
        let (k0, k1) = k01_series(rho);
        let e = rho.exp();
        (k0 * e, k1 * e)
    } else {
        k01_steed(rho)
    }
}

fn k01_series<T: Real>(x: T) -> (T, T) {
    let q = x * x * lit(0.25);
    let ln_half = (x * lit(0.5)).ln();
    let gamma: T = lit(EULER_GAMMA);
    let eps: T = lit(1e-17);
    // term_k = q^k/(k!)², harmonic H_k.
    let mut term = T::one();
    let mut harm = T::zero();
    let mut i0 = T::one();
    let mut s0 = T::zero();
    // term1_k = q^k/(k!(k+1)!), psi(k+1) + psi(k+2) = 2H_k + 1/(k+1) − 2γ.
    let mut term1 = T::one();
    let mut i1 = T::one();
    let mut s1 = (T::one() - gamma - gamma) * term1 + T::zero();
    let mut k = 0usize;
    loop {
        k += 1;
        let kf: T = lit(k as f64);
        term *= q / (kf * kf);
        harm += T::one() / kf;
        i0 += term;
        s0 += harm * term;
        term1 *= q / (kf * (kf + T::one()));
        i1 += term1;
        s1 += (harm + harm + T::one() / (kf + T::one()) - gamma - gamma) * term1;
        if term < eps * i0 && term1 < eps * i1 || k > 200 {
            break;
        }
    }
    let i1 = i1 * x * lit(0.5);
    let k0 = -(ln_half + gamma) * i0 + s0;
    let k1 = T::one() / x + i1 * ln_half - x * lit(0.25) * s1;
    (k0, k1)
}

/// Steed's CF2 for `ν = 0`, returning scaled values.
fn k01_steed<T: Real>(x: T) -> (T, T) {
    let eps: T = lit(1e-17);
    let two: T = lit(2.0);
    let mut b = two * (T::one() + x);
    let mut d = T::one() / b;
    let mut delh = d;
    let mut h = d;
    let mut q1 = T::zero();
    let mut q2 = T::one();
    let a1: T = lit(0.25);
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = T::one() + q * delh;
    for i in 2..10_000usize {
        let fi: T = lit(i as f64);
        a -= two * (fi - T::one());
        c = -a * c / fi;
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += two;
        d = T::one() / (b + a * d);
        delh = (b * d - T::one()) * delh;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < eps {
            break;
        }
    }
    h *= a1;
    let k0 = (T::pi() / (two * x)).sqrt() / s;
    let k1 = k0 * (x + lit(0.5) - h) / x;
    (k0, k1)
}

/// `e^ρ K_ν(ρ)` for `ν ∈ {0, ½, 1, 3/2}` (sign of ν irrelevant).
pub fn bessel_k_scaled<T: Real>(nu: T, rho: T) -> Result<T> {
    check_arg(rho)?;
    let root = (T::frac_pi_2() / rho).sqrt();
    Ok(match order(nu)? {
        Order::Zero => k01_scaled(rho).0,
        Order::One => k01_scaled(rho).1,
        Order::Half => root,
        Order::ThreeHalves => root * (T::one() + T::one() / rho),
    })
}

/// `K_ν(ρ)` for `ν ∈ {0, ½, 1, 3/2}`.
pub fn bessel_k<T: Real>(nu: T, rho: T) -> Result<T> {
    Ok(bessel_k_scaled(nu, rho)? * (-rho).exp())
}

/// `e^ρ K′_ν(ρ)` via `K′_ν = −K_{ν−1} − (ν/ρ)K_ν`.
pub fn bessel_k_prime_scaled<T: Real>(nu: T, rho: T) -> Result<T> {
    check_arg(rho)?;
    let nu = nu.abs();
    let k = bessel_k_scaled(nu, rho)?;
    if order(nu)? == Order::Zero {
        return Ok(-bessel_k_scaled(T::one(), rho)?);
    }
    let lower = bessel_k_scaled(nu - T::one(), rho)?;
    Ok(-lower - nu / rho * k)
}

pub fn bessel_k_prime<T: Real>(nu: T, rho: T) -> Result<T> {
    Ok(bessel_k_prime_scaled(nu, rho)? * (-rho).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad;

    /// `e^ρ K_ν(ρ) = ∫₀^∞ e^{−ρ(cosh t − 1)} cosh(νt) dt`.
    fn oracle(nu: f64, rho: f64) -> f64 {
        let t_max = (1.0 + 45.0 / rho).acosh() + 1.0;
        quad::integrate(
            |t: f64| (-rho * (t.cosh() - 1.0)).exp() * (nu * t).cosh(),
            0.0,
            t_max,
            0.0,
            1e-14,
        )
        .0
    }

    #[test]
    fn matches_integral_representation() {
        for nu in [0.0, 0.5, 1.0, 1.5] {
            let mut rho = 0.5;
            while rho <= 50.0 {
                let got = bessel_k_scaled(nu, rho).unwrap();
                let want = oracle(nu, rho);
                assert!(((got - want) / want).abs() < 1e-10, "nu={nu} rho={rho}: {got} vs {want}");
                rho *= 1.07;
            }
            for rho in [1.999, 2.0, 2.001] {
                let got = bessel_k_scaled(nu, rho).unwrap();
                assert!(((got - oracle(nu, rho)) / got).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn closed_form_examples() {
        let k = bessel_k(0.5, 2.0).unwrap();
        assert!((k - (std::f64::consts::PI / 4.0).sqrt() * (-2.0f64).exp()).abs() < 1e-16);
        assert!((k - 0.1199377).abs() < 1e-7);
        let k32 = bessel_k(1.5f64, 4.0).unwrap();
        assert!((k32 - 0.0143).abs() < 1e-4, "{k32}");
        let lim = bessel_k_scaled(1.0, 1e4).unwrap() * 1e2;
        assert!((lim - std::f64::consts::FRAC_PI_2.sqrt()).abs() < 1e-4);
        // Tabulated K₀(1), K₁(1).
        assert!((bessel_k(0.0f64, 1.0).unwrap() - 0.421_024_438_240_708_3).abs() < 1e-15);
        assert!((bessel_k(1.0f64, 1.0).unwrap() - 0.601_907_230_197_234_6).abs() < 1e-15);
    }

    #[test]
    fn derivative_matches_finite_difference() {
        for nu in [0.5f64, 1.0, 1.5] {
            for rho in [0.7, 2.0, 5.0, 20.0] {
                let d = 1e-5;
                let fd = (bessel_k(nu, rho + d).unwrap() - bessel_k(nu, rho - d).unwrap()) / (2.0 * d);
                let an = bessel_k_prime(nu, rho).unwrap();
                assert!(((fd - an) / an).abs() < 1e-8, "nu={nu} rho={rho}");
            }
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(bessel_k(2.0f64, 1.0), Err(Error::Unsupported(_))));
        assert!(bessel_k(1.0f64, 0.0).is_err());
    }
}
