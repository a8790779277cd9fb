//! Risk measures, stop-loss transforms and convex-order diagnostics on loss
//! samples, and the bound report for a scenario.
//!
//! Risk functions take a confidence level: `avar(s, 0.99)` averages the worst
//! 1 % of losses.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::time::Instant;

use log::info;
use serde::Serialize;

use crate::error::{check_open_unit, Error, Result};
use crate::portfolio::{Borrower, ModelFamily, Portfolio, Scenario};
use crate::profile::{envelope, DefaultProfile, ProfileEnvelope};
use crate::simulate::{
    batch_std_error, comonotone_profiles, independent_profiles, simulate_losses, LossSample, SimConfig, BATCHES,
};

fn check_sample(sample: &LossSample, confidence: f64) -> Result<()> {
    if sample.is_empty() {
        return Err(Error::Empty("loss sample"));
    }
    check_open_unit("confidence", confidence)?;
    Ok(())
}

/// Average of the worst `1 − confidence` probability mass of the empirical
/// quantile function, with a fractional weight on the boundary point.
pub fn avar(sample: &LossSample, confidence: f64) -> Result<f64> {
    check_sample(sample, confidence)?;
    let tail = 1.0 - confidence;
    let x = sample.points();
    let total = match sample.weights() {
        None => {
            let n = x.len();
            let k = tail * n as f64;
            let full = (k.floor() as usize).min(n);
            let mut acc: f64 = x[n - full..].iter().sum();
            if full < n {
                acc += (k - full as f64) * x[n - full - 1];
            }
            acc / n as f64
        }
        Some(w) => {
            let mut remaining = tail;
            let mut acc = 0.0;
            for (xi, wi) in x.iter().zip(w).rev() {
                let take = wi.min(remaining);
                acc += xi * take;
                remaining -= take;
                if remaining <= 0.0 {
                    break;
                }
            }
            acc
        }
    };
    Ok(total / tail)
}

/// Left-continuous empirical quantile `inf{x : F(x) ≥ confidence}`.
pub fn var(sample: &LossSample, confidence: f64) -> Result<f64> {
    check_sample(sample, confidence)?;
    let x = sample.points();
    Ok(match sample.weights() {
        None => {
            let n = x.len() as f64;
            let mut k = confidence * n;
            if (k - k.round()).abs() < 1e-9 {
                k = k.round();
            }
            x[(k.ceil() as usize).clamp(1, x.len()) - 1]
        }
        Some(w) => {
            let mut cum = 0.0;
            let mut out = x[x.len() - 1];
            for (xi, wi) in x.iter().zip(w) {
                cum += wi;
                if cum >= confidence - 1e-12 {
                    out = *xi;
                    break;
                }
            }
            out
        }
    })
}

/// `E[(L − k)₊]` at each threshold.
pub fn stop_loss_curve(sample: &LossSample, thresholds: &[f64]) -> Vec<f64> {
    let x = sample.points();
    let n = x.len();
    // suffix sums of weight and weighted loss
    let mut sw = vec![0.0; n + 1];
    let mut swx = vec![0.0; n + 1];
    for i in (0..n).rev() {
        let w = sample.weight(i);
        sw[i] = sw[i + 1] + w;
        swx[i] = swx[i + 1] + w * x[i];
    }
    thresholds
        .iter()
        .map(|&k| {
            let i = x.partition_point(|&v| v <= k);
            (swx[i] - k * sw[i]).max(0.0)
        })
        .collect()
}

/// `count` thresholds from 0 to the 99.99 % quantile of the pooled samples.
pub fn default_thresholds(a: &LossSample, b: &LossSample, count: usize) -> Vec<f64> {
    let pooled = pooled(a, b);
    let top = var(&pooled, 0.9999).unwrap_or(0.0);
    let m = count.max(2) - 1;
    (0..=m).map(|i| top * i as f64 / m as f64).collect()
}

fn pooled(a: &LossSample, b: &LossSample) -> LossSample {
    let mut pairs = Vec::with_capacity(a.len() + b.len());
    for s in [a, b] {
        let scale = 0.5 / s.total_weight();
        pairs.extend((0..s.len()).map(|i| (s.points()[i], s.weight(i) * scale)));
    }
    LossSample::from_weighted(pairs).expect("non-empty samples")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CxVerdict {
    /// `a ≤cx b` is consistent with the samples.
    Dominates,
    /// No threshold contradicts `a ≤cx b` but the means differ.
    Indistinguishable,
    /// Some stop-loss value of `a` exceeds that of `b` beyond the band.
    Violates,
}

/// Batch-means standard errors of `stat(a) − stat(b)`; paired when both
/// samples hold the same number of draws (common random numbers).
fn diff_std_errors<F>(a: &LossSample, b: &LossSample, stat: F, dim: usize) -> Vec<f64>
where
    F: Fn(&LossSample) -> Vec<f64>,
{
    let (ba, bb) = (a.batches(), b.batches());
    let per_batch = |batches: &[LossSample]| batches.iter().map(&stat).collect::<Vec<_>>();
    let column = |rows: &[Vec<f64>], j: usize| rows.iter().map(|r| r[j]).collect::<Vec<_>>();
    let (sa, sb) = (per_batch(&ba), per_batch(&bb));
    (0..dim)
        .map(|j| {
            if sa.len() == BATCHES && sb.len() == BATCHES && a.draws().len() == b.draws().len() {
                let d: Vec<f64> = sa.iter().zip(&sb).map(|(x, y)| x[j] - y[j]).collect();
                batch_std_error(&d)
            } else {
                let ea = if sa.is_empty() { 0.0 } else { batch_std_error(&column(&sa, j)) };
                let eb = if sb.is_empty() { 0.0 } else { batch_std_error(&column(&sb, j)) };
                ea.hypot(eb)
            }
        })
        .collect()
}

/// Statistical check of `a ≤cx b` through stop-loss transforms.
///
/// Violates if `SL_a(k) − SL_b(k)` exceeds `slack · SE` at some threshold;
/// otherwise Dominates when the means agree within `slack · SE`, and
/// Indistinguishable when they do not.
pub fn check_cx_dominance(a: &LossSample, b: &LossSample, thresholds: &[f64], slack_multiplier: f64) -> CxVerdict {
    let sla = stop_loss_curve(a, thresholds);
    let slb = stop_loss_curve(b, thresholds);
    let se = diff_std_errors(a, b, |s| stop_loss_curve(s, thresholds), thresholds.len());
    let floor = 1e-14;
    let violated = sla
        .iter()
        .zip(&slb)
        .zip(&se)
        .any(|((x, y), e)| x - y > slack_multiplier * e + floor);
    if violated {
        return CxVerdict::Violates;
    }
    let mean_se = diff_std_errors(a, b, |s| vec![s.mean()], 1)[0];
    if (a.mean() - b.mean()).abs() <= slack_multiplier * mean_se + floor {
        CxVerdict::Dominates
    } else {
        CxVerdict::Indistinguishable
    }
}

/// `sup_x |F_a(x) − F_b(x)|` over the support points of both samples, with
/// points closer than 1e-12 treated as equal.
pub fn sup_cdf_distance(a: &LossSample, b: &LossSample) -> f64 {
    let eps = 1e-12;
    a.points()
        .iter()
        .chain(b.points())
        .map(|&x| (a.cdf(x + eps) - b.cdf(x + eps)).abs())
        .fold(0.0, f64::max)
}

/// Dvoretzky–Kiefer–Wolfowitz half-width for `n` draws at `confidence`.
pub fn dkw_epsilon(n: usize, confidence: f64) -> f64 {
    ((2.0 / (1.0 - confidence)).ln() / (2.0 * n as f64)).sqrt()
}

/// Two-sample Kolmogorov–Smirnov critical distance at significance `level`.
pub fn ks_critical(n: usize, m: usize, level: f64) -> f64 {
    let c = (-(level / 2.0).ln() / 2.0).sqrt();
    c * ((n + m) as f64 / (n as f64 * m as f64)).sqrt()
}

/// Lower and upper profiles of one borrower under a model family, plus the
/// point members used for curve output.
#[derive(Debug, Clone, PartialEq)]
pub struct BorrowerModel {
    pub envelope: ProfileEnvelope,
    pub members: Vec<(&'static str, DefaultProfile)>,
}

pub fn borrower_model(family: ModelFamily, b: &Borrower) -> Result<BorrowerModel> {
    let pd = b.pd;
    let (lo, hi) = b.corr_interval;
    let (tlo, thi) = b.theta_interval;
    let theta = b.matched_theta();
    let single = |p: DefaultProfile, name| {
        Ok(BorrowerModel {
            envelope: envelope(std::slice::from_ref(&p))?,
            members: vec![(name, p)],
        })
    };
    match family {
        ModelFamily::Gaussian => Ok(BorrowerModel {
            envelope: envelope(&[DefaultProfile::gaussian(lo, pd)?, DefaultProfile::gaussian(hi, pd)?])?,
            members: vec![("point", DefaultProfile::gaussian(b.asset_corr, pd)?)],
        }),
        ModelFamily::Clayton => Ok(BorrowerModel {
            envelope: envelope(&[DefaultProfile::clayton(tlo, pd)?, DefaultProfile::clayton(thi, pd)?])?,
            members: vec![("point", DefaultProfile::clayton(theta, pd)?)],
        }),
        ModelFamily::SurvivalClayton => Ok(BorrowerModel {
            envelope: envelope(&[
                DefaultProfile::survival_clayton(tlo, pd)?,
                DefaultProfile::survival_clayton(thi, pd)?,
            ])?,
            members: vec![("point", DefaultProfile::survival_clayton(theta, pd)?)],
        }),
        ModelFamily::GaussClaytonHybrid => {
            let g = DefaultProfile::gaussian(b.asset_corr, pd)?;
            let c = DefaultProfile::clayton(theta, pd)?;
            Ok(BorrowerModel {
                envelope: envelope(&[g.clone(), c.clone()])?,
                members: vec![("gaussian", g), ("clayton", c)],
            })
        }
        ModelFamily::Independent => single(DefaultProfile::independent(pd)?, "point"),
        ModelFamily::Comonotone => single(DefaultProfile::comonotone(pd)?, "point"),
        ModelFamily::GaussianPoint => single(DefaultProfile::gaussian(b.asset_corr, pd)?, "point"),
        ModelFamily::ClaytonPoint => single(DefaultProfile::clayton(theta, pd)?, "point"),
    }
}

/// Per-borrower lower and upper profiles, building each distinct parameter
/// set once.
pub fn envelope_profiles(
    family: ModelFamily,
    portfolio: &Portfolio,
) -> Result<(Vec<DefaultProfile>, Vec<DefaultProfile>)> {
    let mut cache: HashMap<[u64; 6], ProfileEnvelope> = HashMap::new();
    let mut lower = Vec::with_capacity(portfolio.len());
    let mut upper = Vec::with_capacity(portfolio.len());
    for b in portfolio.borrowers() {
        let key = [
            b.pd,
            b.asset_corr,
            b.corr_interval.0,
            b.corr_interval.1,
            b.theta_interval.0,
            b.theta_interval.1,
        ]
        .map(f64::to_bits);
        let env = match cache.get(&key) {
            Some(env) => env.clone(),
            None => {
                let env = borrower_model(family, b)?.envelope;
                cache.insert(key, env.clone());
                env
            }
        };
        lower.push(env.lower);
        upper.push(env.upper);
    }
    Ok((lower, upper))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
}

impl Estimate {
    fn avar(sample: &LossSample, confidence: f64) -> Result<Self> {
        Ok(Self {
            value: avar(sample, confidence)?,
            std_error: sample.std_error(|s| avar(s, confidence).unwrap_or(f64::NAN)),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelRow {
    pub model: ModelFamily,
    /// One estimate per confidence level.
    pub lower: Vec<Estimate>,
    pub upper: Vec<Estimate>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RiskReport {
    pub scenario_label: String,
    pub alphas: Vec<f64>,
    pub samples: usize,
    pub seed: u64,
    pub expected_loss: f64,
    pub rows: Vec<ModelRow>,
    pub independent: Vec<Estimate>,
    pub comonotone: Vec<Estimate>,
}

/// Simulates every model's lower and upper bound portfolio plus the
/// independent and comonotone benchmarks with common random numbers, and
/// evaluates AVaR at every confidence level.
pub fn risk_report(scenario: &Scenario, portfolio: &Portfolio, cfg: SimConfig) -> Result<RiskReport> {
    let alphas = &scenario.alphas;
    let estimates = |s: &LossSample| alphas.iter().map(|&a| Estimate::avar(s, a)).collect::<Result<Vec<_>>>();
    let run = |profiles: &[DefaultProfile], what: &str| {
        let start = Instant::now();
        let s = simulate_losses(profiles, portfolio, cfg)?;
        info!("{what}: {} draws in {:.2?}", cfg.samples, start.elapsed());
        Ok::<_, Error>(s)
    };

    let independent = estimates(&run(&independent_profiles(portfolio)?, "independent")?)?;
    let comonotone = estimates(&run(&comonotone_profiles(portfolio)?, "comonotone")?)?;
    let mut rows = Vec::new();
    for &model in &scenario.models {
        let (lower, upper) = envelope_profiles(model, portfolio)?;
        let lo = estimates(&run(&lower, &format!("{} lower", model.label()))?)?;
        let up = if upper == lower {
            lo.clone()
        } else {
            estimates(&run(&upper, &format!("{} upper", model.label()))?)?
        };
        rows.push(ModelRow {
            model,
            lower: lo,
            upper: up,
        });
    }
    Ok(RiskReport {
        scenario_label: scenario.label.clone(),
        alphas: alphas.clone(),
        samples: cfg.samples,
        seed: cfg.seed,
        expected_loss: portfolio.expected_loss(),
        rows,
        independent,
        comonotone,
    })
}

impl RiskReport {
    /// Breaks of `indep ≤ lower ≤ upper ≤ comon` larger than `slack` pooled
    /// standard errors.
    pub fn chain_violations(&self, slack: f64) -> Vec<String> {
        let mut out = Vec::new();
        for row in &self.rows {
            for (i, &alpha) in self.alphas.iter().enumerate() {
                let chain = [
                    ("independent", self.independent[i]),
                    ("lower", row.lower[i]),
                    ("upper", row.upper[i]),
                    ("comonotone", self.comonotone[i]),
                ];
                for w in chain.windows(2) {
                    let ((na, a), (nb, b)) = (w[0], w[1]);
                    let band = slack * a.std_error.hypot(b.std_error) + 1e-12;
                    if a.value > b.value + band {
                        out.push(format!(
                            "{} at {}: AVaR {na} {:.4}% exceeds {nb} {:.4}% by more than {band:.2e}",
                            row.model.label(),
                            alpha,
                            100.0 * a.value,
                            100.0 * b.value,
                        ));
                    }
                }
            }
        }
        out
    }

    /// CSV with one line per model and confidence level, values in percent.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("model,confidence,avar_lower_pct,avar_upper_pct,se_lower_pct,se_upper_pct\n");
        let mut line = |name: &str, alpha: f64, lo: Estimate, up: Estimate| {
            let _ = writeln!(
                s,
                "{name},{alpha},{:.6},{:.6},{:.6},{:.6}",
                100.0 * lo.value,
                100.0 * up.value,
                100.0 * lo.std_error,
                100.0 * up.std_error
            );
        };
        for row in &self.rows {
            for (i, &a) in self.alphas.iter().enumerate() {
                line(row.model.label(), a, row.lower[i], row.upper[i]);
            }
        }
        for (i, &a) in self.alphas.iter().enumerate() {
            line("Independent benchmark", a, self.independent[i], self.independent[i]);
        }
        for (i, &a) in self.alphas.iter().enumerate() {
            line("Comonotone benchmark", a, self.comonotone[i], self.comonotone[i]);
        }
        s
    }

    /// Aligned text table: lower and upper AVaR per model and confidence level,
    /// then the benchmarks, in percent with two decimals.
    pub fn to_text(&self) -> String {
        let pct = |x: f64| format!("{:.2}%", 100.0 * x);
        let mut s = String::new();
        let _ = writeln!(s, "{}", self.scenario_label);
        let _ = writeln!(s, "{} samples, seed {}", self.samples, self.seed);
        let _ = write!(s, "{:<18}", "");
        for a in &self.alphas {
            let _ = write!(s, " {:^19}", format!("alpha = {}%", fmt_level(*a)));
        }
        s.push('\n');
        let _ = write!(s, "{:<18}", "Model");
        for _ in &self.alphas {
            let _ = write!(s, " {:>9} {:>9}", "lower", "upper");
        }
        s.push('\n');
        for row in &self.rows {
            let _ = write!(s, "{:<18}", row.model.label());
            for i in 0..self.alphas.len() {
                let _ = write!(s, " {:>9} {:>9}", pct(row.lower[i].value), pct(row.upper[i].value));
            }
            s.push('\n');
        }
        for (name, est) in [("Independent", &self.independent), ("Comonotone", &self.comonotone)] {
            let _ = write!(s, "{name:<18}");
            for e in est {
                let _ = write!(s, " {:>9} {:>9}", pct(e.value), "");
            }
            s.truncate(s.trim_end().len());
            s.push('\n');
        }
        s
    }
}

fn fmt_level(a: f64) -> String {
    let p = 100.0 * a;
    if (p - p.round()).abs() < 1e-9 {
        format!("{}", p.round())
    } else {
        format!("{p}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::portfolio::{homogeneous_portfolio, IrbParams, LgdSpec};
    use crate::profile::StepPdCurve;
    use crate::simulate::{exact_loss_distribution, simulate_comonotone, simulate_independent};
    use proptest::prelude::*;

    const DET: LgdSpec = LgdSpec::Deterministic { value: 0.1 };

    fn two_point() -> LossSample {
        LossSample::from_weighted(vec![(0.0, 0.98), (0.1, 0.02)]).unwrap()
    }

    #[test]
    fn avar_examples() {
        let s = two_point();
        assert!((avar(&s, 0.99).unwrap() - 0.1).abs() < 1e-12);
        assert!((avar(&s, 0.95).unwrap() - 0.04).abs() < 1e-12);
        let c = LossSample::from_draws(vec![0.3; 17]);
        for conf in [0.01, 0.5, 0.95, 0.999] {
            assert!((avar(&c, conf).unwrap() - 0.3).abs() < 1e-15);
        }
        assert!(avar(&s, 1.0).is_err());
        assert!(avar(&s, 0.0).is_err());
    }

    #[test]
    fn avar_plug_in_fraction() {
        // top 2.5 of 10 points: 10 + 9 + 0.5·8, averaged over 2.5
        let s = LossSample::from_draws((1..=10).map(f64::from).collect());
        assert!((avar(&s, 0.75).unwrap() - 23.0 / 2.5).abs() < 1e-12);
        let w = LossSample::from_weighted((1..=10).map(|i| (f64::from(i), 0.1)).collect()).unwrap();
        assert!((avar(&w, 0.75).unwrap() - 23.0 / 2.5).abs() < 1e-12);
    }

    #[test]
    fn var_examples() {
        let grid = LossSample::from_draws((1..=100).map(|i| i as f64 / 100.0).collect());
        assert!((var(&grid, 0.95).unwrap() - 0.95).abs() < 1e-15);
        assert_eq!(var(&two_point(), 0.95).unwrap(), 0.0);
        assert_eq!(var(&two_point(), 0.99).unwrap(), 0.1);
    }

    #[test]
    fn stop_loss_examples() {
        let s = LossSample::from_draws(vec![0.0, 0.2, 0.4, 0.1]);
        let sl = stop_loss_curve(&s, &[0.0, 0.15, 0.4, 1.0]);
        assert!((sl[0] - s.mean()).abs() < 1e-15);
        assert!((sl[1] - (0.05 + 0.25) / 4.0).abs() < 1e-15);
        assert_eq!(sl[2], 0.0);
        assert_eq!(sl[3], 0.0);
        let t = stop_loss_curve(&two_point(), &[0.05]);
        assert!((t[0] - 0.001).abs() < 1e-15);
    }

    #[test]
    fn comonotone_stop_loss_by_mc() {
        let port = homogeneous_portfolio(1000, 0.02, DET, IrbParams::BASEL).unwrap();
        let s = simulate_comonotone(&port, SimConfig::new(200_000, 3, 1)).unwrap();
        let v = stop_loss_curve(&s, &[0.05])[0];
        let se = s.std_error(|b| stop_loss_curve(b, &[0.05])[0]);
        assert!((v - 0.001).abs() < 4.0 * se, "{v} ± {se}");
    }

    #[test]
    fn cx_examples() {
        let port = homogeneous_portfolio(200, 0.02, DET, IrbParams::BASEL).unwrap();
        let cfg = SimConfig::new(100_000, 11, 1);
        let ind = simulate_independent(&port, cfg).unwrap();
        let com = simulate_comonotone(&port, cfg).unwrap();
        let th = default_thresholds(&ind, &com, 101);
        assert_eq!(check_cx_dominance(&ind, &com, &th, 3.0), CxVerdict::Dominates);
        assert_eq!(check_cx_dominance(&com, &ind, &th, 3.0), CxVerdict::Violates);
        assert_eq!(check_cx_dominance(&ind, &ind, &th, 3.0), CxVerdict::Dominates);
        let shifted = LossSample::from_draws(ind.draws().iter().map(|x| x * 0.5).collect());
        assert_eq!(check_cx_dominance(&shifted, &ind, &th, 3.0), CxVerdict::Indistinguishable);
    }

    #[test]
    fn rearrangement_dominates() {
        let n = 50;
        let port = homogeneous_portfolio(n, 0.02, DET, IrbParams::BASEL).unwrap();
        let cells: Vec<f64> = (0..1000)
            .map(|i| 0.02 * (1.0 + (2.0 * std::f64::consts::PI * (i as f64 + 0.5) / 1000.0).sin()))
            .collect();
        let wavy = StepPdCurve::new(cells).unwrap();
        let sorted = wavy.rearranged();
        let cfg = SimConfig::new(100_000, 5, 1);
        let a = simulate_losses(&vec![wavy; n], &port, cfg).unwrap();
        let b = simulate_losses(&vec![sorted; n], &port, cfg).unwrap();
        let th = default_thresholds(&a, &b, 101);
        assert_eq!(check_cx_dominance(&a, &b, &th, 3.0), CxVerdict::Dominates);
    }

    #[test]
    fn distances() {
        assert!((dkw_epsilon(1_000_000, 0.999) - 0.0019496).abs() < 1e-6);
        let a = LossSample::from_draws(vec![0.0, 1.0]);
        let b = LossSample::from_weighted(vec![(0.0, 0.7), (1.0 + 1e-15, 0.3)]).unwrap();
        assert!((sup_cdf_distance(&a, &b) - 0.2).abs() < 1e-15);
        assert!((ks_critical(100, 100, 0.05) - 1.3581 * (0.02f64).sqrt()).abs() < 1e-3);
    }

    #[test]
    fn independent_routes_agree_in_distribution() {
        let port = homogeneous_portfolio(100, 0.05, DET, IrbParams::BASEL).unwrap();
        let a = simulate_independent(&port, SimConfig::new(100_000, 1, 1)).unwrap();
        let profiles = vec![DefaultProfile::independent(0.05).unwrap(); 100];
        let b = simulate_losses(&profiles, &port, SimConfig::new(100_000, 2, 1)).unwrap();
        assert!(sup_cdf_distance(&a, &b) < ks_critical(100_000, 100_000, 0.001));
    }

    #[test]
    fn exact_comonotone_benchmark() {
        let port = homogeneous_portfolio(1000, 0.02, DET, IrbParams::BASEL).unwrap();
        let exact = exact_loss_distribution(&comonotone_profiles(&port).unwrap(), &port, 16).unwrap();
        assert!((avar(&exact, 0.95).unwrap() - 0.04).abs() < 1e-12);
        assert!((avar(&exact, 0.99).unwrap() - 0.10).abs() < 1e-12);
    }

    #[test]
    fn report_tables() {
        let text = r#"{
            "label": "small",
            "portfolio": {"kind": "homogeneous", "n": 100, "pd": 0.02,
                          "lgd": {"kind": "deterministic", "value": 0.1}},
            "models": ["gaussian", "gauss_clayton_hybrid", "independent"],
            "alphas": [0.95, 0.99],
            "mc": {"samples": 20000, "seed": 4}
        }"#;
        let sc = Scenario::from_json(text, std::path::Path::new(".")).unwrap();
        let port = sc.build_portfolio().unwrap();
        let r = risk_report(&sc, &port, SimConfig::new(20_000, 4, 1)).unwrap();
        assert_eq!(r.rows.len(), 3);
        assert!(r.chain_violations(3.0).is_empty(), "{:?}", r.chain_violations(3.0));
        assert_eq!(r.rows[2].lower, r.independent);
        let csv = r.to_csv();
        assert_eq!(csv.lines().count(), 1 + 2 * 5);
        assert!(csv.lines().nth(1).unwrap().starts_with("Gaussian,0.95,"));
        let txt = r.to_text();
        assert!(txt.contains("alpha = 95%"));
        assert!(txt.lines().any(|l| l.starts_with("Gauss-Clayton")));
        let again = risk_report(&sc, &port, SimConfig::new(20_000, 4, 3)).unwrap();
        assert_eq!(again.to_csv(), csv);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn avar_is_affine_equivariant(
            xs in prop::collection::vec(0.0..1.0f64, 1..60),
            c in 0.1..10.0f64,
            d in -1.0..1.0f64,
            conf in 0.01..0.99f64,
        ) {
            let s = LossSample::from_draws(xs.clone());
            let t = LossSample::from_draws(xs.iter().map(|x| c * x + d).collect());
            let lhs = avar(&t, conf).unwrap();
            let rhs = c * avar(&s, conf).unwrap() + d;
            prop_assert!((lhs - rhs).abs() < 1e-9 * (1.0 + rhs.abs()));
        }

        #[test]
        fn avar_monotone_and_above_var(
            xs in prop::collection::vec(0.0..1.0f64, 1..60),
            a in 0.01..0.99f64,
            b in 0.01..0.99f64,
        ) {
            let s = LossSample::from_draws(xs);
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assert!(avar(&s, lo).unwrap() <= avar(&s, hi).unwrap() + 1e-12);
            prop_assert!(var(&s, a).unwrap() <= avar(&s, a).unwrap() + 1e-12);
        }

        #[test]
        fn stop_loss_is_decreasing_convex(xs in prop::collection::vec(0.0..1.0f64, 1..60)) {
            let s = LossSample::from_draws(xs);
            let th: Vec<f64> = (0..=50).map(|i| i as f64 / 50.0).collect();
            let sl = stop_loss_curve(&s, &th);
            for w in sl.windows(2) {
                prop_assert!(w[1] <= w[0] + 1e-15);
            }
            for w in sl.windows(3) {
                prop_assert!(w[0] - 2.0 * w[1] + w[2] >= -1e-12);
            }
        }
    }
}
