//! Default integral functions `G(s) = ∫₀ˢ P(D = 1 | Z = F_Z⁻¹(t)) dt`.
//!
//! The factor is standardized to uniform on (0, 1), so `G` is increasing,
//! convex, 1-Lipschitz, runs from `(0, 0)` to `(1, pd)`, and its right
//! derivative is the conditional default probability at factor quantile `t`.
//! Smaller `G` means stronger dependence on the factor.

use std::fmt;
use std::io::Write;
use std::sync::Arc;

use log::warn;

use crate::copulas::{clayton_conditional, Copula};
use crate::error::{check_open_unit, check_unit, Error, Result};
use crate::normal;
use crate::tolerance::{Tolerances, PROFILE_GRID_KNOTS};

/// A conditional default probability curve on the factor quantile scale.
///
/// This is the minimal interface the simulation engine needs. Curves need not
/// be increasing; [`DefaultProfile`] is the increasing (siBMM) case.
pub trait ConditionalPd: Send + Sync {
    /// Unconditional default probability `∫₀¹ p(t) dt`.
    fn pd(&self) -> f64;

    /// `p(t)` for `t ∈ (0, 1)`; callers guarantee the domain.
    fn conditional_pd_at(&self, t: f64) -> f64;

    /// Points in (0, 1) where `p` may jump; quadrature splits there.
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProfileForm {
    /// `G(s) = pd·s`.
    Independent,
    /// `G(s) = (s − 1 + pd)·1{s ≥ 1 − pd}`.
    Comonotone,
    /// `G(s) = s − Ĉ(1 − pd, s)` for an SI copula `C` of (latent, factor).
    Copula(Copula),
    /// One-factor Merton model with asset correlation `ρ`.
    Gaussian { asset_corr: f64 },
    /// Clayton threshold model: `G(s) = pd − C_θ(pd, 1 − s)`.
    Clayton { theta: f64 },
    /// Survival Clayton threshold model: `G(s) = s − C_θ(1 − pd, s)`.
    SurvivalClayton { theta: f64 },
    /// Values on uniform knots over [0, 1], linearly interpolated.
    Grid(Arc<Vec<f64>>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DefaultProfile {
    pd: f64,
    form: ProfileForm,
}

impl fmt::Display for DefaultProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.form {
            ProfileForm::Independent => write!(f, "independent(pd={})", self.pd),
            ProfileForm::Comonotone => write!(f, "comonotone(pd={})", self.pd),
            ProfileForm::Copula(c) => write!(f, "copula[{c}](pd={})", self.pd),
            ProfileForm::Gaussian { asset_corr } => {
                write!(f, "gaussian(rho={asset_corr}, pd={})", self.pd)
            }
            ProfileForm::Clayton { theta } => write!(f, "clayton(theta={theta}, pd={})", self.pd),
            ProfileForm::SurvivalClayton { theta } => {
                write!(f, "survival_clayton(theta={theta}, pd={})", self.pd)
            }
            ProfileForm::Grid(v) => write!(f, "grid({} knots, pd={})", v.len(), self.pd),
        }
    }
}

impl DefaultProfile {
    pub fn independent(pd: f64) -> Result<Self> {
        Ok(Self {
            pd: check_open_unit("pd", pd)?,
            form: ProfileForm::Independent,
        })
    }

    pub fn comonotone(pd: f64) -> Result<Self> {
        Ok(Self {
            pd: check_open_unit("pd", pd)?,
            form: ProfileForm::Comonotone,
        })
    }

    /// Profile of the threshold model whose (latent, factor) copula is `c`.
    pub fn from_copula(c: Copula, pd: f64) -> Result<Self> {
        let pd = check_open_unit("pd", pd)?;
        let c = c.validated()?;
        if !c.check_si(24) {
            return Err(Error::NotStochasticallyIncreasing(c.to_string()));
        }
        Ok(Self {
            pd,
            form: ProfileForm::Copula(c),
        })
    }

    pub fn gaussian(asset_corr: f64, pd: f64) -> Result<Self> {
        Ok(Self {
            pd: check_open_unit("pd", pd)?,
            form: ProfileForm::Gaussian {
                asset_corr: check_open_unit("asset correlation", asset_corr)?,
            },
        })
    }

    pub fn clayton(theta: f64, pd: f64) -> Result<Self> {
        Copula::clayton(theta)?;
        Ok(Self {
            pd: check_open_unit("pd", pd)?,
            form: ProfileForm::Clayton { theta },
        })
    }

    pub fn survival_clayton(theta: f64, pd: f64) -> Result<Self> {
        Copula::survival_clayton(theta)?;
        Ok(Self {
            pd: check_open_unit("pd", pd)?,
            form: ProfileForm::SurvivalClayton { theta },
        })
    }

    /// Grid-backed profile from values of `G` on uniform knots over [0, 1].
    /// The first value must be 0, the last `pd`.
    pub fn from_grid(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::Empty("profile grid needs at least two knots"));
        }
        let pd = *values.last().unwrap();
        check_open_unit("pd", pd)?;
        check_unit("G(0)", values[0] + 0.5)?;
        let profile = Self {
            pd,
            form: ProfileForm::Grid(Arc::new(values)),
        };
        profile.validate(PROFILE_GRID_KNOTS)?;
        Ok(profile)
    }

    /// Grid-backed profile whose derivative is the step function taking
    /// `cells[i]` on the i-th of `cells.len()` equal cells. The values must be
    /// increasing probabilities.
    pub fn from_conditional_pd_cells(cells: &[f64]) -> Result<Self> {
        if cells.is_empty() {
            return Err(Error::Empty("conditional pd cells"));
        }
        for &p in cells {
            check_unit("conditional pd", p)?;
        }
        let h = 1.0 / cells.len() as f64;
        let mut values = Vec::with_capacity(cells.len() + 1);
        values.push(0.0);
        let mut acc = 0.0;
        for &p in cells {
            acc += p * h;
            values.push(acc);
        }
        Self::from_grid(values)
    }

    pub fn pd(&self) -> f64 {
        self.pd
    }

    pub fn form(&self) -> &ProfileForm {
        &self.form
    }

    /// `G(s)` for `s ∈ [0, 1]`.
    pub fn eval(&self, s: f64) -> Result<f64> {
        check_unit("s", s)?;
        Ok(self.eval_unchecked(s))
    }

    pub(crate) fn eval_unchecked(&self, s: f64) -> f64 {
        let pd = self.pd;
        if s <= 0.0 {
            return 0.0;
        }
        if s >= 1.0 {
            return pd;
        }
        let g = match &self.form {
            ProfileForm::Independent => pd * s,
            ProfileForm::Comonotone => (s - 1.0 + pd).max(0.0),
            ProfileForm::Copula(c) => s - c.survival().cdf_unchecked(1.0 - pd, s),
            ProfileForm::Gaussian { asset_corr } => normal::bivariate_cdf(
                normal::quantile(pd),
                normal::quantile(s),
                -asset_corr.sqrt(),
            ),
            ProfileForm::Clayton { theta } => pd - Copula::Clayton(*theta).cdf_unchecked(pd, 1.0 - s),
            ProfileForm::SurvivalClayton { theta } => {
                s - Copula::Clayton(*theta).cdf_unchecked(1.0 - pd, s)
            }
            ProfileForm::Grid(values) => {
                let cells = values.len() - 1;
                let x = s * cells as f64;
                let k = (x.floor() as usize).min(cells - 1);
                let frac = x - k as f64;
                values[k] + frac * (values[k + 1] - values[k])
            }
        };
        g.clamp(0.0, pd)
    }

    /// Right derivative `G′(t)`: the conditional default probability given
    /// factor quantile `t ∈ (0, 1)`.
    pub fn conditional_pd(&self, t: f64) -> Result<f64> {
        check_open_unit("t", t)?;
        Ok(self.conditional_pd_at(t))
    }

    /// Evaluates the profile on `knots` uniform points over [0, 1].
    pub fn sample(&self, knots: usize) -> Vec<f64> {
        let n = knots.max(2) - 1;
        (0..=n)
            .map(|i| self.eval_unchecked(i as f64 / n as f64))
            .collect()
    }

    /// Checks the class invariants on a uniform grid: boundary values,
    /// monotonicity, convexity and the Lipschitz bound.
    pub fn validate(&self, knots: usize) -> Result<()> {
        let fail = |message: String| Error::Scenario {
            field: format!("profile {self}"),
            message,
        };
        let g = self.sample(knots);
        let h = 1.0 / (g.len() - 1) as f64;
        if g[0].abs() > 1e-12 {
            return Err(fail(format!("G(0) = {}", g[0])));
        }
        if (g[g.len() - 1] - self.pd).abs() > 1e-9 {
            return Err(fail(format!("G(1) = {} but pd = {}", g[g.len() - 1], self.pd)));
        }
        for (i, w) in g.windows(2).enumerate() {
            let d = w[1] - w[0];
            if d < -1e-9 || d > h + 1e-9 {
                return Err(fail(format!("first difference {d} at knot {i}")));
            }
        }
        for (i, w) in g.windows(3).enumerate() {
            let dd = w[0] - 2.0 * w[1] + w[2];
            if dd < -1e-9 {
                return Err(fail(format!("second difference {dd} at knot {}", i + 1)));
            }
        }
        Ok(())
    }
}

impl ConditionalPd for DefaultProfile {
    fn pd(&self) -> f64 {
        self.pd
    }

    fn conditional_pd_at(&self, t: f64) -> f64 {
        let pd = self.pd;
        let p = match &self.form {
            ProfileForm::Independent => pd,
            ProfileForm::Comonotone => {
                if t >= 1.0 - pd {
                    1.0
                } else {
                    0.0
                }
            }
            ProfileForm::Copula(c) => 1.0 - c.survival().conditional_unchecked(1.0 - pd, t),
            ProfileForm::Gaussian { asset_corr } => normal::cdf(
                (normal::quantile(pd) + asset_corr.sqrt() * normal::quantile(t))
                    / (1.0 - asset_corr).sqrt(),
            ),
            ProfileForm::Clayton { theta } => clayton_conditional(*theta, pd, 1.0 - t),
            ProfileForm::SurvivalClayton { theta } => {
                1.0 - clayton_conditional(*theta, 1.0 - pd, t)
            }
            ProfileForm::Grid(values) => {
                let cells = values.len() - 1;
                let k = ((t * cells as f64).floor() as usize).min(cells - 1);
                (values[k + 1] - values[k]) * cells as f64
            }
        };
        p.clamp(0.0, 1.0)
    }

    fn breakpoints(&self) -> Vec<f64> {
        match &self.form {
            ProfileForm::Comonotone => vec![1.0 - self.pd],
            ProfileForm::Grid(values) => {
                let cells = values.len() - 1;
                (1..cells).map(|i| i as f64 / cells as f64).collect()
            }
            _ => Vec::new(),
        }
    }
}

/// Piecewise-constant conditional default probability on equal cells of
/// (0, 1). Unlike [`DefaultProfile`] the values may be in any order, which
/// describes a general (not necessarily SI) Bernoulli mixture model.
#[derive(Debug, Clone, PartialEq)]
pub struct StepPdCurve {
    cells: Vec<f64>,
    pd: f64,
}

impl StepPdCurve {
    pub fn new(cells: Vec<f64>) -> Result<Self> {
        if cells.is_empty() {
            return Err(Error::Empty("conditional pd cells"));
        }
        for &p in &cells {
            check_unit("conditional pd", p)?;
        }
        let pd = cells.iter().sum::<f64>() / cells.len() as f64;
        check_open_unit("pd", pd)?;
        Ok(Self { cells, pd })
    }

    pub fn cells(&self) -> &[f64] {
        &self.cells
    }

    /// The siBMM curve with the same value distribution, increasing in `t`.
    pub fn rearranged(&self) -> StepPdCurve {
        StepPdCurve {
            cells: increasing_rearrangement(&self.cells),
            pd: self.pd,
        }
    }
}

impl ConditionalPd for StepPdCurve {
    fn pd(&self) -> f64 {
        self.pd
    }

    fn conditional_pd_at(&self, t: f64) -> f64 {
        let n = self.cells.len();
        self.cells[((t * n as f64).floor() as usize).min(n - 1)]
    }

    fn breakpoints(&self) -> Vec<f64> {
        let n = self.cells.len();
        (1..n).map(|i| i as f64 / n as f64).collect()
    }
}

/// Sorted ascending copy of `values`: the increasing rearrangement of a
/// function sampled on a uniform grid.
pub fn increasing_rearrangement(values: &[f64]) -> Vec<f64> {
    let mut out = values.to_vec();
    out.sort_by(f64::total_cmp);
    out
}

/// Pointwise envelope of a family of profiles sharing one pd.
///
/// `lower` is the pointwise maximum of `G` (the least risky member bound) and
/// `upper` the pointwise minimum (the riskiest).
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileEnvelope {
    pub lower: DefaultProfile,
    pub upper: DefaultProfile,
}

impl ProfileEnvelope {
    pub fn pd(&self) -> f64 {
        self.lower.pd
    }

    /// True iff `upper.G ≤ p.G ≤ lower.G` on `grid_n` uniform points.
    pub fn contains(&self, p: &DefaultProfile, grid_n: usize) -> Result<bool> {
        check_same_pd(self.pd(), p.pd)?;
        let tol = Tolerances::DEFAULT.grid();
        let n = grid_n.max(2) - 1;
        Ok((0..=n).all(|i| {
            let s = i as f64 / n as f64;
            let g = p.eval_unchecked(s);
            self.upper.eval_unchecked(s) - tol <= g && g <= self.lower.eval_unchecked(s) + tol
        }))
    }
}

fn check_same_pd(a: f64, b: f64) -> Result<()> {
    if (a - b).abs() > 1e-12 {
        Err(Error::PdMismatch(a, b))
    } else {
        Ok(())
    }
}

/// Pointwise max (`lower`) and min (`upper`) of `profiles`.
///
/// When one member attains the extremum at every knot that member is returned
/// unchanged. Otherwise a grid profile on [`PROFILE_GRID_KNOTS`] knots is
/// built; a non-convex pointwise minimum is replaced by its greatest convex
/// minorant.
pub fn envelope(profiles: &[DefaultProfile]) -> Result<ProfileEnvelope> {
    let first = profiles.first().ok_or(Error::Empty("envelope of no profiles"))?;
    for p in profiles {
        check_same_pd(first.pd, p.pd)?;
    }
    let grids: Vec<Vec<f64>> = profiles.iter().map(|p| p.sample(PROFILE_GRID_KNOTS)).collect();
    let tol = 1e-12;

    let dominant = |pick_max: bool| -> Option<usize> {
        (0..grids.len()).find(|&i| {
            grids.iter().all(|other| {
                grids[i].iter().zip(other).all(|(&a, &b)| {
                    if pick_max {
                        a >= b - tol
                    } else {
                        a <= b + tol
                    }
                })
            })
        })
    };

    let lower = match dominant(true) {
        Some(i) => profiles[i].clone(),
        None => {
            let mut values = pointwise(&grids, f64::max);
            pin_endpoints(&mut values, first.pd);
            DefaultProfile::from_grid(values)?
        }
    };
    let upper = match dominant(false) {
        Some(i) => profiles[i].clone(),
        None => {
            let mut values = pointwise(&grids, f64::min);
            pin_endpoints(&mut values, first.pd);
            if !is_convex(&values, 1e-9) {
                warn!("pointwise minimum of profiles is not convex; using its greatest convex minorant");
                values = greatest_convex_minorant(&values);
            }
            DefaultProfile::from_grid(values)?
        }
    };
    Ok(ProfileEnvelope { lower, upper })
}

/// Whether `p` lies in the class generated by `env`.
pub fn check_membership(p: &DefaultProfile, env: &ProfileEnvelope, grid_n: usize) -> Result<bool> {
    env.contains(p, grid_n)
}

fn pointwise(grids: &[Vec<f64>], op: fn(f64, f64) -> f64) -> Vec<f64> {
    let mut out = grids[0].clone();
    for g in &grids[1..] {
        for (o, &v) in out.iter_mut().zip(g) {
            *o = op(*o, v);
        }
    }
    out
}

fn pin_endpoints(values: &mut [f64], pd: f64) {
    values[0] = 0.0;
    let last = values.len() - 1;
    values[last] = pd;
}

fn is_convex(values: &[f64], tol: f64) -> bool {
    values.windows(3).all(|w| w[0] - 2.0 * w[1] + w[2] >= -tol)
}

/// Greatest convex minorant of values on uniform knots (lower convex hull).
pub fn greatest_convex_minorant(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut hull: Vec<usize> = Vec::with_capacity(n);
    for i in 0..n {
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            // drop b if it lies on or above the chord a -> i
            let cross = (b - a) as f64 * (values[i] - values[a]) - (values[b] - values[a]) * (i - a) as f64;
            if cross <= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(i);
    }
    let mut out = vec![0.0; n];
    for w in hull.windows(2) {
        let (a, b) = (w[0], w[1]);
        for (k, slot) in out.iter_mut().enumerate().take(b + 1).skip(a) {
            let frac = (k - a) as f64 / (b - a) as f64;
            *slot = values[a] + frac * (values[b] - values[a]);
        }
    }
    if n == 1 {
        out[0] = values[0];
    }
    out
}

/// Writes `s, G_name, p_name, ...` rows on `knots` uniform points.
///
/// The conditional pd column at the endpoints uses `t = 1e-12` and
/// `t = 1 − 1e-12`.
pub fn write_curves_csv<W: Write>(
    out: W,
    curves: &[(&str, &DefaultProfile)],
    knots: usize,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["s".to_string()];
    for (name, _) in curves {
        header.push(format!("G_{name}"));
    }
    for (name, _) in curves {
        header.push(format!("p_{name}"));
    }
    w.write_record(&header)?;
    let n = knots.max(2) - 1;
    for i in 0..=n {
        let s = i as f64 / n as f64;
        let t = s.clamp(1e-12, 1.0 - 1e-12);
        let mut row = vec![format!("{s:.6}")];
        for (_, p) in curves {
            row.push(format!("{:.12e}", p.eval_unchecked(s)));
        }
        for (_, p) in curves {
            row.push(format!("{:.12e}", p.conditional_pd_at(t)));
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}
