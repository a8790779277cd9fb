//! Bivariate copula families used to build threshold models.
//!
//! Every family here is parametrized so that it is stochastically increasing
//! (SI): Gaussian with `r ∈ [0, 1]`, Clayton and survival Clayton with
//! `θ > 0`, plus the independence and comonotone copulas.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;

use crate::error::{check_open_unit, check_unit, Error, Result};
use crate::normal;
use crate::tolerance::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "param", rename_all = "snake_case")]
pub enum Copula {
    /// Product copula `uv`.
    Independence,
    /// Upper Fréchet bound `min(u, v)`.
    Comonotone,
    /// Gaussian copula with correlation `r`.
    Gaussian(f64),
    /// Clayton copula with parameter `θ`.
    Clayton(f64),
    /// Survival copula of the Clayton copula with parameter `θ`.
    SurvivalClayton(f64),
}

impl fmt::Display for Copula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Copula::Independence => write!(f, "independence"),
            Copula::Comonotone => write!(f, "comonotone"),
            Copula::Gaussian(r) => write!(f, "gaussian(r={r})"),
            Copula::Clayton(t) => write!(f, "clayton(theta={t})"),
            Copula::SurvivalClayton(t) => write!(f, "survival_clayton(theta={t})"),
        }
    }
}

impl Copula {
    pub fn gaussian(r: f64) -> Result<Self> {
        Copula::Gaussian(r).validated()
    }

    pub fn clayton(theta: f64) -> Result<Self> {
        Copula::Clayton(theta).validated()
    }

    pub fn survival_clayton(theta: f64) -> Result<Self> {
        Copula::SurvivalClayton(theta).validated()
    }

    /// Gaussian copula of a one-factor Merton model with asset correlation
    /// `asset_corr`: the copula parameter is `√asset_corr`.
    pub fn from_asset_correlation(asset_corr: f64) -> Result<Self> {
        check_unit("asset correlation", asset_corr)?;
        Copula::gaussian(asset_corr.sqrt())
    }

    pub fn validated(self) -> Result<Self> {
        match self {
            Copula::Gaussian(r) => {
                check_unit("gaussian correlation", r)?;
            }
            Copula::Clayton(t) | Copula::SurvivalClayton(t) => {
                if !(t > 0.0 && t.is_finite()) {
                    return Err(Error::Domain {
                        what: "clayton theta",
                        value: t,
                        range: "(0, inf)",
                    });
                }
            }
            Copula::Independence | Copula::Comonotone => {}
        }
        Ok(self)
    }

    /// `C(u, v)`.
    pub fn cdf(&self, u: f64, v: f64) -> Result<f64> {
        check_unit("u", u)?;
        check_unit("v", v)?;
        self.validated()?;
        Ok(self.cdf_unchecked(u, v))
    }

    pub(crate) fn cdf_unchecked(&self, u: f64, v: f64) -> f64 {
        if u == 0.0 || v == 0.0 {
            return 0.0;
        }
        if u == 1.0 {
            return v;
        }
        if v == 1.0 {
            return u;
        }
        match *self {
            Copula::Independence => u * v,
            Copula::Comonotone => u.min(v),
            Copula::Gaussian(r) => gaussian_cdf(r, u, v),
            Copula::Clayton(t) => clayton_cdf(t, u, v),
            Copula::SurvivalClayton(t) => {
                (u + v - 1.0 + clayton_cdf(t, 1.0 - u, 1.0 - v)).clamp(0.0, u.min(v))
            }
        }
    }

    /// `C(u | v) = ∂C(u, v)/∂v = P(U ≤ u | V = v)`, defined for `v ∈ (0, 1)`.
    pub fn conditional(&self, u: f64, v: f64) -> Result<f64> {
        check_unit("u", u)?;
        check_open_unit("v", v)?;
        self.validated()?;
        Ok(self.conditional_unchecked(u, v))
    }

    pub(crate) fn conditional_unchecked(&self, u: f64, v: f64) -> f64 {
        if u == 0.0 {
            return 0.0;
        }
        if u == 1.0 {
            return 1.0;
        }
        match *self {
            Copula::Independence => u,
            Copula::Comonotone => comonotone_conditional(u, v),
            Copula::Gaussian(r) => gaussian_conditional(r, u, v),
            Copula::Clayton(t) => clayton_conditional(t, u, v),
            Copula::SurvivalClayton(t) => 1.0 - clayton_conditional(t, 1.0 - u, 1.0 - v),
        }
    }

    /// Generalized inverse `inf{u : C(u | v) ≥ t}`.
    pub fn inverse_conditional(&self, t: f64, v: f64) -> Result<f64> {
        check_unit("t", t)?;
        check_open_unit("v", v)?;
        self.validated()?;
        if t == 0.0 {
            return Ok(0.0);
        }
        match *self {
            Copula::Independence => Ok(t),
            Copula::Comonotone => Ok(v),
            Copula::Gaussian(r) => Ok(gaussian_inverse_conditional(r, t, v)),
            Copula::Clayton(theta) => Ok(clayton_inverse_conditional(theta, t, v)),
            Copula::SurvivalClayton(_) => self.invert_by_bracketing(t, v),
        }
    }

    /// Copula density `∂²C/∂u∂v` for the absolutely continuous families.
    fn density(&self, u: f64, v: f64) -> Option<f64> {
        match *self {
            Copula::Independence => Some(1.0),
            Copula::Clayton(t) => Some(clayton_density(t, u, v)),
            Copula::SurvivalClayton(t) => Some(clayton_density(t, 1.0 - u, 1.0 - v)),
            Copula::Gaussian(r) if r < 1.0 => {
                let x = normal::quantile(u);
                let y = normal::quantile(v);
                let q = 1.0 - r * r;
                Some((-(r * r * (x * x + y * y) - 2.0 * r * x * y) / (2.0 * q)).exp() / q.sqrt())
            }
            _ => None,
        }
    }

    // Bisection on [1e-14, 1 - 1e-14] with safeguarded Newton steps.
    fn invert_by_bracketing(&self, t: f64, v: f64) -> Result<f64> {
        const EDGE: f64 = 1e-14;
        const TOL: f64 = 1e-12;
        let f = |u: f64| self.conditional_unchecked(u, v) - t;
        let mut lo = EDGE;
        let mut hi = 1.0 - EDGE;
        if f(lo) >= 0.0 {
            return Ok(lo);
        }
        if f(hi) < 0.0 {
            return Ok(1.0);
        }
        let mut u = 0.5 * (lo + hi);
        for _ in 0..200 {
            let fu = f(u);
            if fu.abs() < TOL * 1e-2 {
                return Ok(u);
            }
            if fu < 0.0 {
                lo = u;
            } else {
                hi = u;
            }
            if hi - lo < TOL * 1e-3 {
                return Ok(0.5 * (lo + hi));
            }
            let newton = self
                .density(u, v)
                .filter(|d| *d > 0.0 && d.is_finite())
                .map(|d| u - fu / d);
            u = match newton {
                Some(x) if x > lo && x < hi => x,
                _ => 0.5 * (lo + hi),
            };
        }
        if hi - lo < TOL {
            Ok(0.5 * (lo + hi))
        } else {
            Err(Error::NoConvergence("survival clayton inverse conditional"))
        }
    }

    /// Survival copula `Ĉ(u, v) = u + v − 1 + C(1 − u, 1 − v)`.
    pub fn survival(&self) -> Copula {
        match *self {
            Copula::Clayton(t) => Copula::SurvivalClayton(t),
            Copula::SurvivalClayton(t) => Copula::Clayton(t),
            other => other,
        }
    }

    /// Kendall's tau from the closed forms.
    pub fn kendall_tau(&self) -> f64 {
        match *self {
            Copula::Independence => 0.0,
            Copula::Comonotone => 1.0,
            Copula::Gaussian(r) => 2.0 / PI * r.asin(),
            Copula::Clayton(t) | Copula::SurvivalClayton(t) => t / (t + 2.0),
        }
    }

    /// True iff `self ≤ other` pointwise on an interior `grid_n × grid_n` grid.
    pub fn is_pointwise_leq(&self, other: &Copula, grid_n: usize) -> bool {
        let tol = Tolerances::DEFAULT.grid();
        interior_grid(grid_n).all(|u| {
            interior_grid(grid_n).all(|v| self.cdf_unchecked(u, v) <= other.cdf_unchecked(u, v) + tol)
        })
    }

    /// Concavity of `v ↦ C(u, v)` on a uniform grid, for every grid `u`.
    pub fn check_si(&self, grid_n: usize) -> bool {
        if self.validated().is_err() {
            return false;
        }
        let tol = Tolerances::DEFAULT.grid();
        let n = grid_n.max(3);
        let vs: Vec<f64> = (0..=n + 1).map(|j| j as f64 / (n + 1) as f64).collect();
        interior_grid(n).all(|u| {
            let c: Vec<f64> = vs.iter().map(|&v| self.cdf_unchecked(u, v)).collect();
            c.windows(3).all(|w| w[0] - 2.0 * w[1] + w[2] <= tol)
        })
    }
}

/// Clayton parameter with the same Kendall's tau as the Gaussian copula of a
/// Merton model with asset correlation `asset_corr` (copula parameter
/// `√asset_corr`).
pub fn clayton_theta_matching_gaussian(asset_corr: f64) -> Result<f64> {
    check_open_unit("asset correlation", asset_corr)?;
    let tau = 2.0 / PI * asset_corr.sqrt().asin();
    Ok(2.0 * tau / (1.0 - tau))
}

fn interior_grid(n: usize) -> impl Iterator<Item = f64> + Clone {
    let n = n.max(1);
    (1..=n).map(move |i| i as f64 / (n + 1) as f64)
}

fn comonotone_conditional(u: f64, v: f64) -> f64 {
    if v <= u {
        1.0
    } else {
        0.0
    }
}

fn gaussian_cdf(r: f64, u: f64, v: f64) -> f64 {
    if r == 0.0 {
        return u * v;
    }
    if r == 1.0 {
        return u.min(v);
    }
    normal::bivariate_cdf(normal::quantile(u), normal::quantile(v), r)
}

fn gaussian_conditional(r: f64, u: f64, v: f64) -> f64 {
    if r == 1.0 {
        return comonotone_conditional(u, v);
    }
    let x = normal::quantile(u);
    let y = normal::quantile(v);
    normal::cdf((x - r * y) / (1.0 - r * r).sqrt())
}

fn gaussian_inverse_conditional(r: f64, t: f64, v: f64) -> f64 {
    if r == 1.0 {
        return v;
    }
    normal::cdf(r * normal::quantile(v) + (1.0 - r * r).sqrt() * normal::quantile(t))
}

/// `ln(e^a + e^b − 1)` for `a, b ≥ 0`, stable for tiny and huge arguments.
fn log_sum_minus_one(a: f64, b: f64) -> f64 {
    let m = a.max(b);
    if m <= 1.0 {
        (a.exp_m1() + b.exp_m1()).ln_1p()
    } else {
        m + ((a - m).exp() + (b - m).exp() - (-m).exp()).ln()
    }
}

// ln(u^{-θ} + v^{-θ} - 1)
fn clayton_log_core(theta: f64, u: f64, v: f64) -> f64 {
    log_sum_minus_one(-theta * u.ln(), -theta * v.ln())
}

fn clayton_cdf(theta: f64, u: f64, v: f64) -> f64 {
    if u <= 0.0 || v <= 0.0 {
        return 0.0;
    }
    (-clayton_log_core(theta, u, v) / theta).exp().min(u.min(v))
}

pub(crate) fn clayton_conditional(theta: f64, u: f64, v: f64) -> f64 {
    if u <= 0.0 {
        return 0.0;
    }
    if u >= 1.0 {
        return 1.0;
    }
    let s = clayton_log_core(theta, u, v);
    ((-theta - 1.0) * v.ln() - (1.0 / theta + 1.0) * s).exp().min(1.0)
}

fn clayton_inverse_conditional(theta: f64, t: f64, v: f64) -> f64 {
    if t >= 1.0 {
        return 1.0;
    }
    // u^{-θ} = (t v^{θ+1})^{-θ/(θ+1)} - v^{-θ} + 1
    let b = -theta * v.ln();
    let x = -theta / (theta + 1.0) * t.ln() + b;
    let gap = (x - b).exp_m1();
    let log_y = b + gap.ln();
    let log_u_neg_theta = if log_y < 30.0 {
        log_y.exp().ln_1p()
    } else {
        log_y + (-log_y).exp().ln_1p()
    };
    (-log_u_neg_theta / theta).exp()
}

fn clayton_density(theta: f64, u: f64, v: f64) -> f64 {
    if u <= 0.0 || v <= 0.0 {
        return 0.0;
    }
    let s = clayton_log_core(theta, u, v);
    ((theta + 1.0).ln() + (-theta - 1.0) * (u.ln() + v.ln()) - (1.0 / theta + 2.0) * s).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn families() -> Vec<Copula> {
        vec![
            Copula::Independence,
            Copula::Comonotone,
            Copula::Gaussian(0.0),
            Copula::Gaussian(0.405),
            Copula::Gaussian(0.9),
            Copula::Gaussian(1.0),
            Copula::Clayton(0.05),
            Copula::Clayton(0.723),
            Copula::Clayton(4.0),
            Copula::SurvivalClayton(0.723),
            Copula::SurvivalClayton(3.0),
        ]
    }

    #[test]
    fn gaussian_uniform_margin() {
        let c = Copula::gaussian(0.5).unwrap();
        for u in [0.0, 0.3, 1.0] {
            assert!((c.cdf(u, 1.0).unwrap() - u).abs() < 1e-15);
        }
    }

    #[test]
    fn clayton_closed_form_value() {
        let c = Copula::clayton(1.0).unwrap();
        assert!((c.cdf(0.5, 0.5).unwrap() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn survival_clayton_cdf_definition() {
        let c = Copula::SurvivalClayton(0.723);
        let (u, v) = (0.3, 0.8);
        let expected = u + v - 1.0 + (0.7f64.powf(-0.723) + 0.2f64.powf(-0.723) - 1.0).powf(-1.0 / 0.723);
        assert!((c.cdf(u, v).unwrap() - expected).abs() < 1e-14);
    }

    #[test]
    fn domain_errors() {
        let c = Copula::Gaussian(0.3);
        assert!(c.cdf(-0.1, 0.5).is_err());
        assert!(c.cdf(0.5, 1.1).is_err());
        assert!(c.cdf(f64::NAN, 0.5).is_err());
        assert!(c.conditional(0.5, 0.0).is_err());
        assert!(c.conditional(0.5, 1.0).is_err());
        assert!(c.inverse_conditional(0.5, 1.0).is_err());
        assert!(Copula::gaussian(-0.1).is_err());
        assert!(Copula::clayton(0.0).is_err());
        assert!(Copula::survival_clayton(-1.0).is_err());
    }

    #[test]
    fn conditional_examples() {
        assert_eq!(Copula::Independence.conditional(0.37, 0.9).unwrap(), 0.37);
        assert!((Copula::Gaussian(0.0).conditional(0.7, 0.2).unwrap() - 0.7).abs() < 1e-15);
        let got = Copula::Clayton(2.0).conditional(0.5, 0.5).unwrap();
        assert!((got - 8.0 * 7f64.powf(-1.5)).abs() < 1e-14);
    }

    #[test]
    fn inverse_conditional_examples() {
        assert_eq!(Copula::Independence.inverse_conditional(0.42, 0.3).unwrap(), 0.42);
        let g = Copula::Gaussian(0.405).inverse_conditional(0.5, 0.5).unwrap();
        assert!((g - 0.5).abs() < 1e-15);
        // Clayton closed form checked against bisection of the conditional.
        let c = Copula::Clayton(0.723);
        let got = c.inverse_conditional(0.3, 0.7).unwrap();
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if c.conditional(mid, 0.7).unwrap() < 0.3 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        assert!((got - 0.5 * (lo + hi)).abs() < 1e-12, "{got} vs {}", 0.5 * (lo + hi));
    }

    #[test]
    fn survival_clayton_inverse_matches_reflected_clayton() {
        // Ĉ(u|v) = 1 − C(1−u | 1−v) ⇒ Ĉ⁻¹(t|v) = 1 − C⁻¹(1−t | 1−v).
        let theta = 0.723;
        let s = Copula::SurvivalClayton(theta);
        let c = Copula::Clayton(theta);
        for &(t, v) in &[(0.1, 0.2), (0.5, 0.5), (0.98, 0.03), (0.02, 0.97)] {
            let got = s.inverse_conditional(t, v).unwrap();
            let expected = 1.0 - c.inverse_conditional(1.0 - t, 1.0 - v).unwrap();
            assert!((got - expected).abs() < 1e-9, "t={t} v={v}: {got} vs {expected}");
        }
    }

    #[test]
    fn survival_pairs() {
        assert_eq!(Copula::Clayton(0.723).survival(), Copula::SurvivalClayton(0.723));
        assert_eq!(Copula::Gaussian(0.405).survival(), Copula::Gaussian(0.405));
        assert_eq!(Copula::Independence.survival(), Copula::Independence);
        assert_eq!(Copula::Comonotone.survival(), Copula::Comonotone);
        for c in families() {
            assert_eq!(c.survival().survival(), c);
            assert_eq!(c.survival().kendall_tau(), c.kendall_tau());
        }
    }

    #[test]
    fn survival_family_matches_definition() {
        for c in families() {
            let s = c.survival();
            for &(u, v) in &[(0.2, 0.9), (0.6, 0.35), (0.05, 0.05)] {
                let expected = u + v - 1.0 + c.cdf(1.0 - u, 1.0 - v).unwrap();
                assert!((s.cdf(u, v).unwrap() - expected).abs() < 1e-12, "{c}");
            }
        }
    }

    #[test]
    fn kendall_tau_values() {
        let tau = Copula::Gaussian(0.165f64.sqrt()).kendall_tau();
        assert!((tau - 0.266).abs() < 5e-4, "{tau}");
        let tau = Copula::Clayton(0.723).kendall_tau();
        assert!((tau - 0.266).abs() < 5e-4, "{tau}");
        assert_eq!(Copula::Gaussian(0.0).kendall_tau(), 0.0);
        assert_eq!(Copula::Comonotone.kendall_tau(), 1.0);
    }

    #[test]
    fn theta_matching() {
        let hi = clayton_theta_matching_gaussian(0.2371).unwrap();
        let lo = clayton_theta_matching_gaussian(0.1371).unwrap();
        let mid = clayton_theta_matching_gaussian(0.165).unwrap();
        assert!((hi - 0.96).abs() < 0.005, "{hi}");
        assert!((lo - 0.64).abs() < 0.005, "{lo}");
        assert!((mid - 0.723).abs() < 0.005, "{mid}");
        assert!(clayton_theta_matching_gaussian(0.0).is_err());
        assert!(clayton_theta_matching_gaussian(1.0).is_err());
    }

    #[test]
    fn pointwise_order_examples() {
        assert!(Copula::Gaussian(0.2).is_pointwise_leq(&Copula::Gaussian(0.5), 25));
        assert!(Copula::Clayton(0.5).is_pointwise_leq(&Copula::Clayton(1.0), 25));
        assert!(!Copula::Gaussian(0.5).is_pointwise_leq(&Copula::Gaussian(0.2), 25));
        assert!(Copula::Independence.is_pointwise_leq(&Copula::Comonotone, 25));
        assert!(Copula::SurvivalClayton(0.5).is_pointwise_leq(&Copula::SurvivalClayton(2.0), 25));
    }

    #[test]
    fn si_examples() {
        assert!(Copula::Gaussian(0.405).check_si(40));
        assert!(Copula::Clayton(0.723).check_si(40));
        assert!(Copula::Comonotone.check_si(40));
        for c in families() {
            assert!(c.check_si(30), "{c}");
        }
    }

    #[test]
    fn si_check_rejects_negative_dependence() {
        // Countermonotone-like Gaussian: not in the admissible family.
        assert!(!Copula::Gaussian(-0.5).check_si(20));
    }

    #[test]
    fn conditional_integrates_to_cdf() {
        let rule = crate::quadrature::GaussLegendre::new(64);
        for c in families() {
            if matches!(c, Copula::Comonotone | Copula::Gaussian(1.0)) {
                continue;
            }
            for &(u, v) in &[(0.3, 0.6), (0.02, 0.9), (0.8, 0.15)] {
                // Split at a few points to tame the endpoint behaviour.
                let cuts = [0.0, v * 1e-6, v * 1e-3, v * 0.1, v * 0.5, v];
                let integral: f64 = cuts
                    .windows(2)
                    .map(|w| rule.integrate(w[0], w[1], |x| c.conditional_unchecked(u, x)))
                    .sum();
                let cdf = c.cdf(u, v).unwrap();
                assert!((integral - cdf).abs() < 1e-7, "{c} u={u} v={v}: {integral} vs {cdf}");
            }
        }
    }

    #[test]
    fn clayton_tends_to_independence() {
        let c = Copula::Clayton(1e-8);
        for &(u, v) in &[(0.3, 0.7), (0.01, 0.5), (0.9, 0.95)] {
            assert!((c.cdf(u, v).unwrap() - u * v).abs() < 1e-7);
        }
    }

    #[test]
    fn gaussian_at_one_is_comonotone() {
        let g = Copula::Gaussian(1.0);
        let m = Copula::Comonotone;
        for i in 1..20 {
            for j in 1..20 {
                let (u, v) = (i as f64 / 20.0, j as f64 / 20.0);
                assert!((g.cdf(u, v).unwrap() - m.cdf(u, v).unwrap()).abs() < 1e-12);
            }
        }
        // and just below one the numerical CDF is already close
        let g = Copula::Gaussian(1.0 - 1e-12);
        assert!((g.cdf(0.3, 0.6).unwrap() - 0.3).abs() < 1e-5);
    }

    #[test]
    fn extreme_clayton_parameters_stay_finite() {
        let c = Copula::Clayton(1e3);
        let v = c.cdf(0.02, 0.5).unwrap();
        assert!((v - 0.02).abs() < 1e-3);
        assert!(c.conditional(0.02, 0.5).unwrap().is_finite());
        let inv = c.inverse_conditional(0.4, 0.3).unwrap();
        assert!(inv.is_finite() && (0.0..=1.0).contains(&inv));
    }

    fn arb_copula() -> impl Strategy<Value = Copula> {
        prop_oneof![
            Just(Copula::Independence),
            Just(Copula::Comonotone),
            (0.0..=0.99f64).prop_map(Copula::Gaussian),
            (0.01..8.0f64).prop_map(Copula::Clayton),
            (0.01..8.0f64).prop_map(Copula::SurvivalClayton),
        ]
    }

    proptest! {
        #[test]
        fn copula_axioms(c in arb_copula(), u1 in 0.0..=1.0f64, u2 in 0.0..=1.0f64,
                         v1 in 0.0..=1.0f64, v2 in 0.0..=1.0f64) {
            let tol = Tolerances::DEFAULT.axiom;
            prop_assert!(c.cdf(u1, 0.0).unwrap().abs() <= tol);
            prop_assert!(c.cdf(0.0, v1).unwrap().abs() <= tol);
            prop_assert!((c.cdf(u1, 1.0).unwrap() - u1).abs() <= tol);
            prop_assert!((c.cdf(1.0, v1).unwrap() - v1).abs() <= tol);
            let (ul, uh) = (u1.min(u2), u1.max(u2));
            let (vl, vh) = (v1.min(v2), v1.max(v2));
            let vol = c.cdf(uh, vh).unwrap() - c.cdf(ul, vh).unwrap()
                - c.cdf(uh, vl).unwrap() + c.cdf(ul, vl).unwrap();
            prop_assert!(vol >= -tol, "rectangle volume {}", vol);
        }

        #[test]
        fn inverse_round_trip(c in arb_copula(), t in 0.001..0.999f64, v in 0.001..0.999f64) {
            prop_assume!(!matches!(c, Copula::Comonotone));
            let u = c.inverse_conditional(t, v).unwrap();
            let back = c.conditional(u, v).unwrap();
            let tol = match c {
                Copula::SurvivalClayton(_) => 1e-8,
                _ => 1e-10,
            };
            prop_assert!((back - t).abs() <= tol, "{} t={} v={} u={} back={}", c, t, v, u, back);
        }

        #[test]
        fn conditional_monotone(c in arb_copula(), u in 0.01..0.99f64, v1 in 0.01..0.99f64, v2 in 0.01..0.99f64) {
            let (vl, vh) = (v1.min(v2), v1.max(v2));
            // SI: C(u | v) decreasing in v
            prop_assert!(c.conditional(u, vh).unwrap() <= c.conditional(u, vl).unwrap() + 1e-12);
        }

        #[test]
        fn larger_parameter_is_pointwise_larger(a in 0.0..0.95f64, d in 0.0..0.05f64, th in 0.05..5.0f64, dt in 0.0..2.0f64) {
            prop_assert!(Copula::Gaussian(a).is_pointwise_leq(&Copula::Gaussian(a + d), 12));
            prop_assert!(Copula::Clayton(th).is_pointwise_leq(&Copula::Clayton(th + dt), 12));
            prop_assert!(Copula::SurvivalClayton(th).is_pointwise_leq(&Copula::SurvivalClayton(th + dt), 12));
        }
    }
}
