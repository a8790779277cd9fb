//! Monte Carlo and exact loss distributions of Bernoulli mixture portfolios.
//!
//! A draw samples the factor quantile `t` uniformly on (0, 1), then defaults
//! independently with probability `p_n(t)` and LGDs per borrower. Borrowers
//! with equal weight, LGD and conditional pd form a cohort whose default count
//! is drawn as one binomial.
//!
//! Draws are produced in fixed chunks; chunk `c` uses ChaCha8 stream `c` of
//! the run seed, so the output does not depend on the number of workers.
//! Runs with the same seed share their factor draws.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Binomial, Distribution};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::portfolio::{beta_params, LgdSpec, Portfolio};
use crate::profile::{ConditionalPd, DefaultProfile};
use crate::quadrature::GaussLegendre;

/// Draws per RNG stream.
pub const CHUNK: usize = 4096;
/// Batches used for batch-means standard errors.
pub const BATCHES: usize = 20;
/// Largest portfolio enumerated by [`exact_loss_distribution`], unless all
/// borrowers are identical.
pub const MAX_EXACT_BORROWERS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimConfig {
    pub samples: usize,
    pub seed: u64,
    pub workers: usize,
}

impl SimConfig {
    pub fn new(samples: usize, seed: u64, workers: usize) -> Self {
        Self {
            samples,
            seed,
            workers,
        }
    }
}

/// A loss distribution given by sorted support points, either equally weighted
/// Monte Carlo draws or exact probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct LossSample {
    points: Vec<f64>,
    weights: Option<Vec<f64>>,
    draws: Vec<f64>,
}

impl LossSample {
    /// Equally weighted draws; the draw order is kept for batch means.
    pub fn from_draws(draws: Vec<f64>) -> Self {
        let mut points = draws.clone();
        points.sort_by(f64::total_cmp);
        Self {
            points,
            weights: None,
            draws,
        }
    }

    /// Weighted support points; points closer than `1e-12` are merged.
    pub fn from_weighted(mut pairs: Vec<(f64, f64)>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::Empty("loss distribution"));
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut points: Vec<f64> = Vec::with_capacity(pairs.len());
        let mut weights: Vec<f64> = Vec::with_capacity(pairs.len());
        for (x, w) in pairs {
            match points.last() {
                Some(&last) if x - last <= 1e-12 => *weights.last_mut().unwrap() += w,
                _ => {
                    points.push(x);
                    weights.push(w);
                }
            }
        }
        Ok(Self {
            points,
            weights: Some(weights),
            draws: Vec::new(),
        })
    }

    /// Ascending support points.
    pub fn points(&self) -> &[f64] {
        &self.points
    }

    /// Point probabilities, `None` for equally weighted draws.
    pub fn weights(&self) -> Option<&[f64]> {
        self.weights.as_deref()
    }

    /// Monte Carlo draws in generation order (empty for exact distributions).
    pub fn draws(&self) -> &[f64] {
        &self.draws
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn weight(&self, i: usize) -> f64 {
        match &self.weights {
            Some(w) => w[i],
            None => 1.0 / self.points.len() as f64,
        }
    }

    pub fn total_weight(&self) -> f64 {
        match &self.weights {
            Some(w) => w.iter().sum(),
            None => 1.0,
        }
    }

    pub fn mean(&self) -> f64 {
        match &self.weights {
            Some(w) => self.points.iter().zip(w).map(|(x, w)| x * w).sum(),
            None => self.points.iter().sum::<f64>() / self.points.len() as f64,
        }
    }

    /// `P(L ≤ x)`.
    pub fn cdf(&self, x: f64) -> f64 {
        let k = self.points.partition_point(|&p| p <= x);
        match &self.weights {
            Some(w) => w[..k].iter().sum(),
            None => k as f64 / self.points.len() as f64,
        }
    }

    /// The draws split into [`BATCHES`] contiguous batches; empty when there
    /// are too few draws.
    pub fn batches(&self) -> Vec<LossSample> {
        if self.draws.len() < 2 * BATCHES {
            return Vec::new();
        }
        let size = self.draws.len() / BATCHES;
        (0..BATCHES)
            .map(|b| LossSample::from_draws(self.draws[b * size..(b + 1) * size].to_vec()))
            .collect()
    }

    /// Batch-means standard error of `stat`; zero for exact distributions.
    pub fn std_error<F: Fn(&LossSample) -> f64>(&self, stat: F) -> f64 {
        batch_std_error(&self.batches().iter().map(stat).collect::<Vec<_>>())
    }
}

/// Standard error of the mean of batch statistics.
pub fn batch_std_error(values: &[f64]) -> f64 {
    let b = values.len();
    if b < 2 {
        return 0.0;
    }
    let m = values.iter().sum::<f64>() / b as f64;
    let var = values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (b - 1) as f64;
    (var / b as f64).sqrt()
}

enum Lgd {
    Fixed(f64),
    Beta(Beta<f64>),
}

struct Cohort<'a, P> {
    profile: &'a P,
    weight: f64,
    lgd: Lgd,
    count: u64,
}

fn cohorts<'a, P: ConditionalPd + PartialEq>(profiles: &'a [P], portfolio: &Portfolio) -> Result<Vec<Cohort<'a, P>>> {
    let borrowers = portfolio.borrowers();
    if profiles.len() != borrowers.len() {
        return Err(Error::ProfileCount {
            profiles: profiles.len(),
            borrowers: borrowers.len(),
        });
    }
    let mut keys: Vec<(&P, f64, LgdSpec, u64)> = Vec::new();
    for (p, b) in profiles.iter().zip(borrowers) {
        if (p.pd() - b.pd).abs() > 1e-12 {
            return Err(Error::PdMismatch(p.pd(), b.pd));
        }
        if b.exposure_weight == 0.0 {
            continue;
        }
        match keys
            .iter_mut()
            .find(|k| k.1 == b.exposure_weight && k.2 == b.lgd && k.0 == p)
        {
            Some(k) => k.3 += 1,
            None => keys.push((p, b.exposure_weight, b.lgd, 1)),
        }
    }
    keys.into_iter()
        .map(|(profile, weight, lgd, count)| {
            let lgd = match lgd {
                LgdSpec::Deterministic { value } => Lgd::Fixed(value),
                LgdSpec::Beta { mean, vol } => {
                    let (a, b) = beta_params(mean, vol)?;
                    Lgd::Beta(Beta::new(a, b).map_err(|_| Error::InfeasibleBeta { mean, vol })?)
                }
            };
            Ok(Cohort {
                profile,
                weight,
                lgd,
                count,
            })
        })
        .collect()
}

/// Uniform on the open interval (0, 1).
fn open_unit<R: RngCore>(rng: &mut R) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

fn draw_loss<P: ConditionalPd, R: Rng>(cohorts: &[Cohort<'_, P>], rng: &mut R) -> f64 {
    let t = open_unit(rng);
    let mut loss = 0.0;
    for c in cohorts {
        let p = c.profile.conditional_pd_at(t);
        let k = if c.count == 1 {
            u64::from(rng.random::<f64>() < p)
        } else if p <= 0.0 {
            0
        } else if p >= 1.0 {
            c.count
        } else {
            Binomial::new(c.count, p).expect("probability in (0, 1)").sample(rng)
        };
        if k == 0 {
            continue;
        }
        loss += match &c.lgd {
            Lgd::Fixed(v) => c.weight * v * k as f64,
            Lgd::Beta(d) => c.weight * (0..k).map(|_| d.sample(rng)).sum::<f64>(),
        };
    }
    loss
}

fn run_chunks<F>(cfg: SimConfig, fill: F) -> Result<Vec<f64>>
where
    F: Fn(&mut ChaCha8Rng) -> f64 + Sync,
{
    if cfg.samples == 0 {
        return Err(Error::Scenario {
            field: "mc.samples".into(),
            message: "must be at least 1".into(),
        });
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers.max(1))
        .build()
        .map_err(|e| Error::Scenario {
            field: "mc.workers".into(),
            message: e.to_string(),
        })?;
    let mut out = vec![0.0; cfg.samples];
    pool.install(|| {
        out.par_chunks_mut(CHUNK).enumerate().for_each(|(c, slot)| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(c as u64);
            for x in slot.iter_mut() {
                *x = fill(&mut rng);
            }
        });
    });
    Ok(out)
}

/// Portfolio losses (fractions of total exposure) under conditional pds
/// `profiles[n]` for borrower `n`.
pub fn simulate_losses<P>(profiles: &[P], portfolio: &Portfolio, cfg: SimConfig) -> Result<LossSample>
where
    P: ConditionalPd + PartialEq,
{
    let cohorts = cohorts(profiles, portfolio)?;
    let draws = run_chunks(cfg, |rng| draw_loss(&cohorts, rng))?;
    Ok(LossSample::from_draws(draws))
}

pub fn independent_profiles(portfolio: &Portfolio) -> Result<Vec<DefaultProfile>> {
    portfolio
        .borrowers()
        .iter()
        .map(|b| DefaultProfile::independent(b.pd))
        .collect()
}

pub fn comonotone_profiles(portfolio: &Portfolio) -> Result<Vec<DefaultProfile>> {
    portfolio
        .borrowers()
        .iter()
        .map(|b| DefaultProfile::comonotone(b.pd))
        .collect()
}

/// Losses with independent defaults.
pub fn simulate_independent(portfolio: &Portfolio, cfg: SimConfig) -> Result<LossSample> {
    simulate_losses(&independent_profiles(portfolio)?, portfolio, cfg)
}

/// Losses with comonotone defaults: borrower `n` defaults iff `u ≥ 1 − π_n`
/// for one uniform `u` per draw.
pub fn simulate_comonotone(portfolio: &Portfolio, cfg: SimConfig) -> Result<LossSample> {
    simulate_losses(&comonotone_profiles(portfolio)?, portfolio, cfg)
}

/// Panel edges on (0, 1) for factor quadrature: profile breakpoints plus
/// geometric refinement towards both ends.
fn factor_panels(extra: &[f64]) -> Vec<f64> {
    let mut cuts = vec![0.0, 0.5, 1.0];
    for k in 1..=8 {
        let d = 10f64.powi(-k);
        cuts.push(d);
        cuts.push(1.0 - d);
    }
    cuts.extend(extra.iter().copied().filter(|x| *x > 0.0 && *x < 1.0));
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    cuts
}

/// Exact loss distribution by Gauss–Legendre quadrature over the factor with
/// `quad_nodes` nodes per panel and, at every node, enumeration of all
/// default patterns. A portfolio of identical borrowers is handled by a
/// binomial count instead and may exceed [`MAX_EXACT_BORROWERS`].
pub fn exact_loss_distribution<P>(profiles: &[P], portfolio: &Portfolio, quad_nodes: usize) -> Result<LossSample>
where
    P: ConditionalPd + PartialEq,
{
    let borrowers = portfolio.borrowers();
    if profiles.len() != borrowers.len() {
        return Err(Error::ProfileCount {
            profiles: profiles.len(),
            borrowers: borrowers.len(),
        });
    }
    if let Some(b) = borrowers.iter().find(|b| !b.lgd.is_deterministic()) {
        return Err(Error::StochasticLgd(b.name.clone()));
    }
    for (p, b) in profiles.iter().zip(borrowers) {
        if (p.pd() - b.pd).abs() > 1e-12 {
            return Err(Error::PdMismatch(p.pd(), b.pd));
        }
    }
    let homogeneous = borrowers
        .iter()
        .zip(profiles)
        .all(|(b, p)| b.exposure_weight == borrowers[0].exposure_weight && b.lgd == borrowers[0].lgd && *p == profiles[0]);
    if !homogeneous && borrowers.len() > MAX_EXACT_BORROWERS {
        return Err(Error::TooManyBorrowers {
            got: borrowers.len(),
            max: MAX_EXACT_BORROWERS,
        });
    }

    // narrow panels (grid cells) get a shorter rule
    let rule = GaussLegendre::new(quad_nodes.max(16));
    let short = GaussLegendre::new((quad_nodes / 4).max(8));
    let mut breaks: Vec<f64> = profiles.iter().flat_map(|p| p.breakpoints()).collect();
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let panels = factor_panels(&breaks);
    let nodes: Vec<(f64, f64)> = panels
        .windows(2)
        .flat_map(|w| {
            let r = if w[1] - w[0] < 5e-3 { &short } else { &rule };
            r.on_interval(w[0], w[1]).collect::<Vec<_>>()
        })
        .collect();

    let pairs = if homogeneous {
        let n = borrowers.len();
        let unit = borrowers[0].exposure_weight * borrowers[0].lgd.mean();
        let mut acc = vec![0.0; n + 1];
        let mut probs = vec![0.0; n + 1];
        for &(t, w) in &nodes {
            let p = profiles[0].conditional_pd_at(t);
            // binomial pmf by repeated convolution with Bernoulli(p)
            probs.iter_mut().for_each(|x| *x = 0.0);
            probs[0] = 1.0;
            for j in 0..n {
                for k in (1..=j + 1).rev() {
                    probs[k] = probs[k] * (1.0 - p) + probs[k - 1] * p;
                }
                probs[0] *= 1.0 - p;
            }
            for (a, q) in acc.iter_mut().zip(&probs) {
                *a += w * q;
            }
        }
        acc.into_iter()
            .enumerate()
            .map(|(k, w)| (unit * k as f64, w))
            .collect()
    } else {
        let n = borrowers.len();
        let size = 1usize << n;
        let mut loss = vec![0.0; size];
        for mask in 1..size {
            let j = mask.trailing_zeros() as usize;
            let b = &borrowers[j];
            loss[mask] = loss[mask & (mask - 1)] + b.exposure_weight * b.lgd.mean();
        }
        let mut acc = vec![0.0; size];
        let mut probs = vec![0.0; size];
        for &(t, w) in &nodes {
            probs[0] = 1.0;
            for (j, p) in profiles.iter().enumerate() {
                let p = p.conditional_pd_at(t);
                let bit = 1usize << j;
                for mask in 0..bit {
                    probs[mask | bit] = probs[mask] * p;
                    probs[mask] *= 1.0 - p;
                }
            }
            for (a, q) in acc.iter_mut().zip(&probs) {
                *a += w * q;
            }
        }
        loss.into_iter().zip(acc).collect()
    };
    LossSample::from_weighted(pairs)
}
