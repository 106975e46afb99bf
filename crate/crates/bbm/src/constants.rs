//! Universal constants of the barrier-curve family.

/// omega = 2^{-3/4} * pi, the length scale of the arctan barrier integral.
pub const OMEGA: f64 = 1.8680021680446304;

/// c = (3 pi^2)^{1/3} / sqrt(2), the coefficient of the critical t^{1/3} curve.
///
/// Equivalently c = 3^{1/3} omega^{2/3}, so c^3 = 3 pi^2 / 2^{3/2}.
pub const C_CRIT: f64 = 2.187553427990652;

pub const SQRT_2: f64 = std::f64::consts::SQRT_2;

/// 3/(2 sqrt(2)), the coefficient of the logarithmic correction in L-bar.
pub const LOG_COEFF: f64 = 3.0 / (2.0 * SQRT_2);

/// 3/(4 sqrt(2)), the coefficient of the log term inside F_eps.
pub const FEPS_COEFF: f64 = 3.0 / (4.0 * SQRT_2);
