//! Exact rational helpers shared by bound reports and audits.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Signed;

pub fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn from_u64(n: u64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// q^n as an exact rational.
pub fn upow(base: u64, exp: u32) -> BigRational {
    BigRational::from_integer(BigInt::from(base).pow(exp))
}

/// Renders a non-negative rational in canonical `num/den` form (always with
/// the denominator, so `5` prints as `5/1`).
pub fn fraction_string(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Fixed-point decimal rendering with the given number of places, rounding
/// half away from zero. Pure integer arithmetic, so byte-identical everywhere.
pub fn decimal_string(r: &BigRational, places: u32) -> String {
    let sign = if r.is_negative() { "-" } else { "" };
    let abs = r.abs();
    let scale = BigInt::from(10u32).pow(places);
    let num = abs.numer() * &scale;
    let den = abs.denom();
    // Round half up on the scaled integer.
    let scaled = (num * 2u32 + den) / (den * 2u32);
    let int_part = &scaled / &scale;
    let frac_part = &scaled % &scale;
    if places == 0 {
        format!("{sign}{int_part}")
    } else {
        format!(
            "{sign}{int_part}.{frac:0>width$}",
            frac = frac_part.to_string(),
            width = places as usize
        )
    }
}
