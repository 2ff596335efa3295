//! Float helpers that work without `std`.

/// Tolerance used for geometric comparisons (meters and hours).
pub const EPS: f64 = 1e-9;

#[inline]
pub fn abs(v: f64) -> f64 {
    libm::fabs(v)
}

#[inline]
pub fn powf(base: f64, exp: f64) -> f64 {
    libm::pow(base, exp)
}

#[inline]
pub fn exp(v: f64) -> f64 {
    libm::exp(v)
}

#[inline]
pub fn ln(v: f64) -> f64 {
    libm::log(v)
}

#[inline]
pub fn ceil(v: f64) -> f64 {
    libm::ceil(v)
}

#[inline]
pub fn floor(v: f64) -> f64 {
    libm::floor(v)
}

#[inline]
pub fn round(v: f64) -> f64 {
    libm::round(v)
}

/// Smallest multiple of `step` that is `>= v` (up to [`EPS`]).
#[inline]
pub fn ceil_to(v: f64, step: f64) -> f64 {
    ceil(v / step - EPS) * step
}

/// Largest multiple of `step` that is `<= v` (up to [`EPS`]).
#[inline]
pub fn floor_to(v: f64, step: f64) -> f64 {
    floor(v / step + EPS) * step
}

/// Index of the multiple of `step` closest to `v`.
#[inline]
pub fn grid_index(v: f64, step: f64) -> i64 {
    round(v / step) as i64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_rounding_tolerates_float_noise() {
        assert_eq!(ceil_to(20.000000000001, 10.0), 20.0);
        assert_eq!(ceil_to(20.1, 10.0), 30.0);
        assert_eq!(floor_to(29.9999999999999, 10.0), 30.0);
        assert_eq!(floor_to(29.5, 10.0), 20.0);
        assert_eq!(ceil_to(0.0, 4.0), 0.0);
    }
}
