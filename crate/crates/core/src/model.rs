//! Model parameters, the Hubbard-Stratonovich exponent `F_β`, the spontaneous
//! magnetization and the limit laws of the scaled magnetization.

use crate::special::{double_factorial, gamma, ln_cosh};
use crate::{Error, Result};

/// Identifies the distribution CW(β, N).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    beta: f64,
    n: usize,
}

impl ModelParams {
    pub fn new(beta: f64, n: usize) -> Result<Self> {
        if !(beta.is_finite() && beta >= 0.0) {
            return Err(Error::domain(format!(
                "beta must be finite and >= 0, got {beta}"
            )));
        }
        if n == 0 {
            return Err(Error::argument("n must be at least 1"));
        }
        Ok(ModelParams { beta, n })
    }

    /// Inverse temperature.
    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Number of spins.
    pub fn n(&self) -> usize {
        self.n
    }
}

/// Candidate limit distributions for `S_N / N^α`.
///
/// Use the constructors; they enforce the parameter ranges that
/// [`LimitLaw::moment`] relies on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LimitLaw {
    /// Point mass at 0 (β ≤ 1, α = 1).
    DiracZero,
    /// `½(δ_{−m} + δ_{+m})` (β > 1, α = 1).
    TwoPointMix { m: f64 },
    /// `N(0, σ²)` (β < 1, α = 1/2).
    CenteredNormal { variance: f64 },
    /// Density `e^{−x⁴/12} / normalizer` (β = 1, α = 3/4).
    QuarticTilt { normalizer: f64 },
}

impl LimitLaw {
    pub fn two_point(m: f64) -> Result<Self> {
        if !(m > 0.0 && m < 1.0) {
            return Err(Error::domain(format!(
                "two-point mass location must lie in (0,1), got {m}"
            )));
        }
        Ok(LimitLaw::TwoPointMix { m })
    }

    pub fn normal(variance: f64) -> Result<Self> {
        if !(variance > 0.0 && variance.is_finite()) {
            return Err(Error::domain(format!(
                "variance must be positive, got {variance}"
            )));
        }
        Ok(LimitLaw::CenteredNormal { variance })
    }

    pub fn quartic() -> Self {
        LimitLaw::QuarticTilt {
            normalizer: quartic_normalizer(),
        }
    }

    /// The limit law of `S_N / N^α` under CW(β, N), for the three scalings
    /// with a known limit: α = 1 (any β), α = 1/2 (β < 1) and α = 3/4 (β = 1).
    pub fn for_scaling(beta: f64, alpha: f64) -> Result<Self> {
        if !(beta.is_finite() && beta >= 0.0) {
            return Err(Error::domain(format!(
                "beta must be finite and >= 0, got {beta}"
            )));
        }
        if alpha == 1.0 {
            if beta <= 1.0 {
                Ok(LimitLaw::DiracZero)
            } else {
                LimitLaw::two_point(spontaneous_magnetization(beta)?)
            }
        } else if alpha == 0.5 && beta < 1.0 {
            LimitLaw::normal(1.0 / (1.0 - beta))
        } else if alpha == 0.75 && beta == 1.0 {
            Ok(LimitLaw::quartic())
        } else {
            Err(Error::argument(format!(
                "no limit law for scaling alpha = {alpha} at beta = {beta}"
            )))
        }
    }

    /// `k`-th moment of the law; odd moments vanish for every variant.
    pub fn moment(&self, k: u32) -> f64 {
        if k == 0 {
            return 1.0;
        }
        if k % 2 == 1 {
            return 0.0;
        }
        match *self {
            LimitLaw::DiracZero => 0.0,
            LimitLaw::TwoPointMix { m } => m.powi(k as i32),
            LimitLaw::CenteredNormal { variance } => {
                double_factorial(k as i64 - 1) * variance.powf(k as f64 / 2.0)
            }
            LimitLaw::QuarticTilt { .. } => {
                let k = k as f64;
                12f64.powf(k / 4.0) * gamma((k + 1.0) / 4.0) / gamma(0.25)
            }
        }
    }
}

/// `∫ e^{−t⁴/12} dt = 12^{1/4} Γ(1/4) / 2`.
pub fn quartic_normalizer() -> f64 {
    0.5 * 12f64.powf(0.25) * gamma(0.25)
}

/// Free-function form of [`LimitLaw::moment`].
pub fn limit_moment(law: &LimitLaw, k: u32) -> f64 {
    law.moment(k)
}

fn check_beta_positive(beta: f64) -> Result<()> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::domain(format!(
            "the integral representation needs beta > 0, got {beta}"
        )));
    }
    Ok(())
}

/// `F_β(t) = t²/(2β) − ln cosh t`.
pub fn f_beta(beta: f64, t: f64) -> Result<f64> {
    check_beta_positive(beta)?;
    Ok(t * t / (2.0 * beta) - ln_cosh(t))
}

/// Derivatives of `F_β` of order 1 through 4, from closed forms of the
/// derivatives of `tanh`.
pub fn f_beta_derivative(beta: f64, t: f64, order: u32) -> Result<f64> {
    check_beta_positive(beta)?;
    let th = t.tanh();
    let sech2 = 1.0 - th * th;
    match order {
        1 => Ok(t / beta - th),
        2 => Ok(1.0 / beta - sech2),
        3 => Ok(2.0 * sech2 * th),
        4 => Ok(2.0 * sech2 * (sech2 - 2.0 * th * th)),
        _ => Err(Error::argument(format!(
            "derivative order must be in 1..=4, got {order}"
        ))),
    }
}

/// Unique positive solution `m(β)` of `m = tanh(β m)`, which exists iff β > 1.
///
/// Bisection on `(1e-12, 1]` followed by Newton polishing; the returned value
/// satisfies `|m − tanh(β m)| <= 1e-14`.
pub fn spontaneous_magnetization(beta: f64) -> Result<f64> {
    if beta.is_nan() || beta <= 1.0 {
        return Err(Error::NoPositiveRoot { beta });
    }
    let g = |x: f64| x - (beta * x).tanh();
    let (mut lo, mut hi) = (1e-12, 1.0);
    if g(hi) <= 0.0 {
        // tanh(β) rounds to 1.
        return Ok(1.0);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..4 {
        let th = (beta * x).tanh();
        let slope = 1.0 - beta * (1.0 - th * th);
        if slope == 0.0 {
            break;
        }
        let next = x - (x - th) / slope;
        if !(next > 0.0 && next <= 1.0) || g(next).abs() >= g(x).abs() {
            break;
        }
        x = next;
    }
    debug_assert!(g(x).abs() <= 1e-14);
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn params_validation() {
        assert!(ModelParams::new(0.0, 1).is_ok());
        assert!(ModelParams::new(-0.1, 1).is_err());
        assert!(ModelParams::new(f64::NAN, 1).is_err());
        assert!(ModelParams::new(1.0, 0).is_err());
    }

    #[test]
    fn f_beta_examples() {
        assert_eq!(f_beta(1.0, 0.0).unwrap(), 0.0);
        // 1 − ln cosh 1, high-precision reference.
        assert!((f_beta(0.5, 1.0).unwrap() - 0.566_219_169_516_972_8).abs() < 1e-15);
        for t in [0.5, 1.0, 3.0] {
            assert_eq!(f_beta(2.0, t).unwrap(), f_beta(2.0, -t).unwrap());
        }
        assert!(f_beta(1.0, 700.0).unwrap().is_finite());
        assert!(matches!(f_beta(0.0, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn derivative_examples() {
        assert_eq!(f_beta_derivative(1.0, 0.0, 2).unwrap(), 0.0);
        assert_eq!(f_beta_derivative(1.0, 0.0, 3).unwrap(), 0.0);
        assert_eq!(f_beta_derivative(1.0, 0.0, 4).unwrap(), 2.0);
        assert_eq!(f_beta_derivative(0.5, 0.0, 2).unwrap(), 1.0);
        assert!(matches!(
            f_beta_derivative(1.0, 0.0, 0),
            Err(Error::Argument(_))
        ));
        assert!(matches!(
            f_beta_derivative(1.0, 0.0, 5),
            Err(Error::Argument(_))
        ));
        assert!(f_beta_derivative(0.0, 0.0, 1).is_err());
    }

    #[test]
    fn derivatives_match_finite_differences() {
        for beta in [0.5, 1.0, 2.0] {
            for t in [-1.0, 0.3, 2.0] {
                let f = |x: f64| f_beta(beta, x).unwrap();
                let h = 1e-4;
                let d1 = (f(t + h) - f(t - h)) / (2.0 * h);
                let d2 = (f(t + h) - 2.0 * f(t) + f(t - h)) / (h * h);
                let a1 = f_beta_derivative(beta, t, 1).unwrap();
                let a2 = f_beta_derivative(beta, t, 2).unwrap();
                assert!(
                    ((d1 - a1) / a1).abs() <= 1e-6,
                    "β={beta} t={t}: {d1} vs {a1}"
                );
                assert!(
                    ((d2 - a2) / a2).abs() <= 1e-6,
                    "β={beta} t={t}: {d2} vs {a2}"
                );
                // Orders 3 and 4 by differencing the closed forms one order down.
                let g = |x: f64, j| f_beta_derivative(beta, x, j).unwrap();
                let d3 = (g(t + h, 2) - g(t - h, 2)) / (2.0 * h);
                let d4 = (g(t + h, 3) - g(t - h, 3)) / (2.0 * h);
                assert!((d3 - g(t, 3)).abs() <= 1e-6 * g(t, 3).abs().max(1.0));
                assert!((d4 - g(t, 4)).abs() <= 1e-6 * g(t, 4).abs().max(1.0));
            }
        }
    }

    #[test]
    fn magnetization_examples() {
        // Bisection oracle on x − tanh(2x) to 1e-12.
        let mut lo = 0.5f64;
        let mut hi = 1.0f64;
        while hi - lo > 1e-13 {
            let mid = 0.5 * (lo + hi);
            if mid - (2.0 * mid).tanh() < 0.0 {
                lo = mid
            } else {
                hi = mid
            }
        }
        let m2 = spontaneous_magnetization(2.0).unwrap();
        assert!((m2 - lo).abs() < 1e-12);
        assert!((m2 - 0.957_504_024_077_268_7).abs() < 1e-12);
        assert!(matches!(
            spontaneous_magnetization(1.0),
            Err(Error::NoPositiveRoot { .. })
        ));
        assert!(spontaneous_magnetization(0.3).is_err());
        assert!((spontaneous_magnetization(50.0).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn magnetization_residual_and_monotonicity() {
        let grid = [1.000_001, 1.01, 1.1, 1.5, 2.0, 3.0, 5.0, 20.0];
        let ms: Vec<f64> = grid
            .iter()
            .map(|&b| spontaneous_magnetization(b).unwrap())
            .collect();
        for (&b, &m) in grid.iter().zip(&ms) {
            assert!(m > 0.0 && m <= 1.0);
            assert!((m - (b * m).tanh()).abs() <= 1e-14, "β={b}");
        }
        assert!(ms.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn limit_moment_examples() {
        assert_eq!(LimitLaw::normal(2.0).unwrap().moment(2), 2.0);
        assert_eq!(LimitLaw::two_point(0.5).unwrap().moment(3), 0.0);
        assert_eq!(LimitLaw::two_point(0.5).unwrap().moment(4), 0.0625);
        assert_eq!(LimitLaw::DiracZero.moment(0), 1.0);
        assert_eq!(LimitLaw::DiracZero.moment(2), 0.0);
        // Quadrature oracle (mpmath) for ∫t²e^{−t⁴/12} / ∫e^{−t⁴/12}.
        let q = LimitLaw::quartic();
        assert!((q.moment(2) - 1.170_828_656_607_528_8).abs() < 1e-12);
        assert!((q.moment(4) - 3.0).abs() < 1e-12);
        assert!((q.moment(8) - 45.0).abs() < 1e-10);
        for law in [
            LimitLaw::DiracZero,
            LimitLaw::two_point(0.3).unwrap(),
            LimitLaw::normal(0.7).unwrap(),
            q,
        ] {
            assert_eq!(law.moment(0), 1.0);
            assert_eq!(limit_moment(&law, 5), 0.0);
        }
    }

    #[test]
    fn normal_moments_follow_recursion() {
        for var in [0.5, 1.0, 2.0, 4.0 / 3.0] {
            let law = LimitLaw::normal(var).unwrap();
            let mut prev2 = 1.0;
            let mut prev1 = 0.0;
            assert_eq!(law.moment(0), 1.0);
            assert_eq!(law.moment(1), 0.0);
            for k in 2..=12u32 {
                let mk = (k - 1) as f64 * var * prev2;
                assert!((law.moment(k) - mk).abs() <= 1e-12 * mk.abs().max(1.0));
                prev2 = prev1;
                prev1 = mk;
            }
        }
    }

    #[test]
    fn law_constructors_validate() {
        assert!(LimitLaw::two_point(0.0).is_err());
        assert!(LimitLaw::two_point(1.0).is_err());
        assert!(LimitLaw::normal(0.0).is_err());
        assert!(LimitLaw::normal(-1.0).is_err());
        assert_eq!(
            LimitLaw::for_scaling(0.5, 1.0).unwrap(),
            LimitLaw::DiracZero
        );
        assert_eq!(
            LimitLaw::for_scaling(1.0, 1.0).unwrap(),
            LimitLaw::DiracZero
        );
        assert_eq!(
            LimitLaw::for_scaling(0.5, 0.5).unwrap(),
            LimitLaw::CenteredNormal { variance: 2.0 }
        );
        assert!(matches!(
            LimitLaw::for_scaling(2.0, 1.0).unwrap(),
            LimitLaw::TwoPointMix { .. }
        ));
        assert!(matches!(
            LimitLaw::for_scaling(1.0, 0.75).unwrap(),
            LimitLaw::QuarticTilt { .. }
        ));
        assert!(LimitLaw::for_scaling(1.0, 0.5).is_err());
        assert!(LimitLaw::for_scaling(2.0, 0.75).is_err());
    }
}
