//! Borrowers, exposures, LGD specifications and scenario configuration.

use std::collections::HashMap;
use std::fs::File;
use std::path::{Path, PathBuf};

use log::warn;
use serde::{Deserialize, Serialize};

use crate::copulas::clayton_theta_matching_gaussian;
use crate::error::{check_open_unit, Error, Result};

/// Largest pd accepted from input data; values at or above 1 are clamped here.
pub const MAX_PD: f64 = 1.0 - 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LgdSpec {
    Deterministic { value: f64 },
    Beta { mean: f64, vol: f64 },
}

impl LgdSpec {
    pub fn validated(self) -> Result<Self> {
        match self {
            LgdSpec::Deterministic { value } => {
                if !(value > 0.0 && value <= 1.0) {
                    return Err(Error::Domain {
                        what: "deterministic LGD",
                        value,
                        range: "(0, 1]",
                    });
                }
            }
            LgdSpec::Beta { mean, vol } => {
                beta_params(mean, vol)?;
            }
        }
        Ok(self)
    }

    pub fn mean(&self) -> f64 {
        match *self {
            LgdSpec::Deterministic { value } => value,
            LgdSpec::Beta { mean, .. } => mean,
        }
    }

    /// Upper end of the LGD support.
    pub fn max(&self) -> f64 {
        match *self {
            LgdSpec::Deterministic { value } => value,
            LgdSpec::Beta { .. } => 1.0,
        }
    }

    pub fn is_deterministic(&self) -> bool {
        matches!(self, LgdSpec::Deterministic { .. })
    }
}

/// Beta shape parameters with the given mean and standard deviation.
pub fn beta_params(mean: f64, vol: f64) -> Result<(f64, f64)> {
    let feasible = mean > 0.0 && mean < 1.0 && vol > 0.0 && vol * vol < mean * (1.0 - mean);
    if !feasible {
        return Err(Error::InfeasibleBeta { mean, vol });
    }
    let k = mean * (1.0 - mean) / (vol * vol) - 1.0;
    Ok((mean * k, (1.0 - mean) * k))
}

/// IRB asset correlation interpolating between `hi_bound` (pd → 0) and
/// `lo_bound` (pd → 1).
pub fn irb_correlation(pd: f64, lo_bound: f64, hi_bound: f64) -> Result<f64> {
    check_open_unit("pd", pd)?;
    check_bounds(lo_bound, hi_bound)?;
    let w = (-(-50.0 * pd).exp_m1()) / (-(-50.0f64).exp_m1());
    Ok(lo_bound * w + hi_bound * (1.0 - w))
}

fn check_bounds(lo: f64, hi: f64) -> Result<()> {
    check_open_unit("correlation lower bound", lo)?;
    check_open_unit("correlation upper bound", hi)?;
    if lo > hi {
        return Err(Error::Domain {
            what: "correlation lower bound",
            value: lo,
            range: "at most the upper bound",
        });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Borrower {
    pub name: String,
    /// Outstanding amount in input units.
    pub amount: f64,
    pub pd: f64,
    /// Share of total portfolio exposure.
    pub exposure_weight: f64,
    pub lgd: LgdSpec,
    /// Point estimate of the asset correlation (the IRB value).
    pub asset_corr: f64,
    pub corr_interval: (f64, f64),
    pub theta_interval: (f64, f64),
}

impl Borrower {
    pub fn new(
        name: impl Into<String>,
        amount: f64,
        pd: f64,
        lgd: LgdSpec,
        asset_corr: f64,
        corr_interval: (f64, f64),
    ) -> Result<Self> {
        check_open_unit("pd", pd)?;
        check_open_unit("asset correlation", asset_corr)?;
        check_bounds(corr_interval.0, corr_interval.1)?;
        if !(amount >= 0.0 && amount.is_finite()) {
            return Err(Error::Domain {
                what: "amount",
                value: amount,
                range: "[0, ∞)",
            });
        }
        let theta_interval = (
            clayton_theta_matching_gaussian(corr_interval.0)?,
            clayton_theta_matching_gaussian(corr_interval.1)?,
        );
        Ok(Self {
            name: name.into(),
            amount,
            pd,
            exposure_weight: 0.0,
            lgd: lgd.validated()?,
            asset_corr,
            corr_interval,
            theta_interval,
        })
    }

    /// Clayton parameter matching the point asset correlation in Kendall's tau.
    pub fn matched_theta(&self) -> f64 {
        clayton_theta_matching_gaussian(self.asset_corr).expect("validated asset correlation")
    }
}

/// Borrowers with exposure weights normalized to sum to one.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Portfolio {
    borrowers: Vec<Borrower>,
}

impl Portfolio {
    /// Normalizes amounts into exposure weights.
    pub fn new(mut borrowers: Vec<Borrower>) -> Result<Self> {
        if borrowers.is_empty() {
            return Err(Error::Empty("portfolio"));
        }
        let total: f64 = borrowers.iter().map(|b| b.amount).sum();
        if !(total > 0.0) {
            return Err(Error::Scenario {
                field: "amount".into(),
                message: "total amount must be positive".into(),
            });
        }
        for b in &mut borrowers {
            b.exposure_weight = b.amount / total;
        }
        Ok(Self { borrowers })
    }

    pub fn borrowers(&self) -> &[Borrower] {
        &self.borrowers
    }

    pub fn len(&self) -> usize {
        self.borrowers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.borrowers.is_empty()
    }

    /// Expected loss `Σ e_n E[δ_n] π_n`.
    pub fn expected_loss(&self) -> f64 {
        self.borrowers
            .iter()
            .map(|b| b.exposure_weight * b.lgd.mean() * b.pd)
            .sum()
    }

    /// Writes the portfolio in the CSV schema read by [`load_portfolio_csv`].
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(HEADER)?;
        for b in &self.borrowers {
            let (kind, mean, vol) = match b.lgd {
                LgdSpec::Deterministic { value } => ("deterministic", value.to_string(), String::new()),
                LgdSpec::Beta { mean, vol } => ("beta", mean.to_string(), vol.to_string()),
            };
            w.write_record([
                b.name.clone(),
                b.amount.to_string(),
                b.pd.to_string(),
                kind.to_string(),
                mean,
                vol,
                b.corr_interval.0.to_string(),
                b.corr_interval.1.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `n` identical borrowers with weight `1/n`; the correlation interval is the
/// IRB bound pair and the point correlation the IRB value at `pd`.
pub fn homogeneous_portfolio(n: usize, pd: f64, lgd: LgdSpec, irb: IrbParams) -> Result<Portfolio> {
    if n == 0 {
        return Err(Error::Empty("homogeneous portfolio of zero borrowers"));
    }
    let rho = irb_correlation(pd, irb.lo, irb.hi)?;
    let template = Borrower::new("", 1.0, pd, lgd, rho, (irb.lo, irb.hi))?;
    let borrowers = (0..n)
        .map(|i| Borrower {
            name: format!("b{}", i + 1),
            ..template.clone()
        })
        .collect();
    Portfolio::new(borrowers)
}

/// IRB bounds and the half-width of the correlation interval around the IRB
/// point value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IrbParams {
    pub lo: f64,
    pub hi: f64,
    #[serde(default = "default_shift")]
    pub shift: f64,
}

fn default_shift() -> f64 {
    0.05
}

impl IrbParams {
    pub const BASEL: IrbParams = IrbParams {
        lo: 0.12,
        hi: 0.24,
        shift: 0.05,
    };

    pub fn point(&self, pd: f64) -> Result<f64> {
        irb_correlation(pd, self.lo, self.hi)
    }

    pub fn interval(&self, pd: f64) -> Result<(f64, f64)> {
        let rho = self.point(pd)?;
        Ok((rho - self.shift, rho + self.shift))
    }
}

const HEADER: [&str; 8] = [
    "name", "amount", "pd", "lgd_kind", "lgd_mean", "lgd_vol", "corr_lo", "corr_hi",
];
const REQUIRED: [&str; 5] = ["name", "amount", "pd", "lgd_kind", "lgd_mean"];

/// Rating label to pd lookup, read from a `rating,pd` CSV.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RatingTable(HashMap<String, f64>);

impl RatingTable {
    pub fn load(path: &Path) -> Result<Self> {
        let display = path.display().to_string();
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(File::open(path)?);
        let mut map = HashMap::new();
        for (i, rec) in reader.records().enumerate() {
            let rec = rec?;
            let row = i + 2;
            let rating = rec.get(0).unwrap_or_default().to_string();
            let pd = parse_f64(&display, row, "pd", rec.get(1).unwrap_or_default())?;
            map.insert(rating, pd);
        }
        Ok(Self(map))
    }

    pub fn get(&self, rating: &str) -> Option<f64> {
        self.0.get(rating).copied()
    }
}

fn parse_f64(path: &str, row: usize, column: &str, cell: &str) -> Result<f64> {
    cell.trim().parse::<f64>().map_err(|e| Error::Parse {
        path: path.to_string(),
        row,
        column: column.to_string(),
        message: format!("`{cell}` is not a number ({e})"),
    })
}

/// Loads a portfolio CSV with header
/// `name,amount,pd,lgd_kind,lgd_mean,lgd_vol,corr_lo,corr_hi`.
///
/// `lgd_vol`, `corr_lo` and `corr_hi` may be absent or empty; missing
/// correlation intervals default to the IRB value ± `irb.shift`. A pd that is
/// not a number is looked up in `ratings` when one is given. Rows are
/// numbered from 2 (the header is row 1).
pub fn load_portfolio_csv(path: &Path, irb: IrbParams, ratings: Option<&RatingTable>) -> Result<Portfolio> {
    let display = path.display().to_string();
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(File::open(path)?);
    let header = reader.headers()?.clone();
    let col = |name: &str| header.iter().position(|h| h == name);
    for name in REQUIRED {
        if col(name).is_none() {
            return Err(Error::Parse {
                path: display.clone(),
                row: 1,
                column: name.to_string(),
                message: "required column missing from header".into(),
            });
        }
    }
    let idx: HashMap<&str, Option<usize>> = HEADER.iter().map(|&h| (h, col(h))).collect();

    let mut borrowers = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec?;
        let row = i + 2;
        let cell = |name: &str| idx[name].and_then(|k| rec.get(k)).unwrap_or("").trim();
        let err = |column: &str, message: String| Error::Parse {
            path: display.clone(),
            row,
            column: column.to_string(),
            message,
        };

        let name = cell("name").to_string();
        let amount = parse_f64(&display, row, "amount", cell("amount"))?;
        if !(amount >= 0.0) {
            return Err(err("amount", format!("negative amount {amount}")));
        }

        let pd_cell = cell("pd");
        let mut pd = match (pd_cell.parse::<f64>(), ratings) {
            (Ok(v), _) => v,
            (Err(_), Some(table)) => table
                .get(pd_cell)
                .ok_or_else(|| err("pd", format!("unknown rating `{pd_cell}`")))?,
            (Err(e), None) => return Err(err("pd", format!("`{pd_cell}` is not a number ({e})"))),
        };
        if pd.is_nan() || pd <= 0.0 {
            return Err(err("pd", format!("pd {pd} must be positive")));
        }
        if pd >= 1.0 {
            warn!("{display}: row {row}: pd {pd} of `{name}` clamped to {MAX_PD}");
            pd = MAX_PD;
        }

        let lgd = match cell("lgd_kind") {
            "deterministic" => LgdSpec::Deterministic {
                value: parse_f64(&display, row, "lgd_mean", cell("lgd_mean"))?,
            },
            "beta" => LgdSpec::Beta {
                mean: parse_f64(&display, row, "lgd_mean", cell("lgd_mean"))?,
                vol: parse_f64(&display, row, "lgd_vol", cell("lgd_vol"))?,
            },
            other => {
                return Err(err(
                    "lgd_kind",
                    format!("expected `deterministic` or `beta`, got `{other}`"),
                ))
            }
        };
        let lgd = lgd.validated().map_err(|e| err("lgd_mean", e.to_string()))?;

        let asset_corr = irb.point(pd)?;
        let corr_interval = match (cell("corr_lo"), cell("corr_hi")) {
            ("", "") => irb.interval(pd)?,
            (lo, hi) => (
                parse_f64(&display, row, "corr_lo", lo)?,
                parse_f64(&display, row, "corr_hi", hi)?,
            ),
        };
        let b = Borrower::new(name, amount, pd, lgd, asset_corr, corr_interval)
            .map_err(|e| err("corr_lo", e.to_string()))?;
        borrowers.push(b);
    }
    Portfolio::new(borrowers)
}

/// Dependence model families for which bounds are reported.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelFamily {
    /// Gaussian threshold model over each borrower's correlation interval.
    Gaussian,
    /// Clayton threshold model over each borrower's θ interval.
    Clayton,
    SurvivalClayton,
    /// Envelope of the Gaussian model at the point correlation and the
    /// Clayton model at the matching θ.
    GaussClaytonHybrid,
    Independent,
    Comonotone,
    /// Gaussian model at each borrower's point correlation.
    GaussianPoint,
    /// Clayton model at each borrower's matched θ.
    ClaytonPoint,
}

impl ModelFamily {
    pub fn label(&self) -> &'static str {
        match self {
            ModelFamily::Gaussian => "Gaussian",
            ModelFamily::Clayton => "Clayton",
            ModelFamily::SurvivalClayton => "Survival Clayton",
            ModelFamily::GaussClaytonHybrid => "Gauss-Clayton",
            ModelFamily::Independent => "Independent",
            ModelFamily::Comonotone => "Comonotone",
            ModelFamily::GaussianPoint => "Gaussian (point)",
            ModelFamily::ClaytonPoint => "Clayton (point)",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PortfolioSource {
    Homogeneous {
        n: usize,
        pd: f64,
        lgd: LgdSpec,
        #[serde(default = "basel")]
        irb: IrbParams,
    },
    Csv {
        /// Resolved against the scenario file's directory when relative.
        path: PathBuf,
        #[serde(default = "basel")]
        irb: IrbParams,
        /// Optional `rating,pd` table for rating labels in the pd column.
        #[serde(default)]
        ratings: Option<PathBuf>,
        /// Replaces every borrower's LGD when present.
        #[serde(default)]
        lgd: Option<LgdSpec>,
    },
}

fn basel() -> IrbParams {
    IrbParams::BASEL
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McConfig {
    pub samples: usize,
    pub seed: u64,
    /// Worker threads; absent means one per available core.
    #[serde(default)]
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub label: String,
    pub portfolio: PortfolioSource,
    pub models: Vec<ModelFamily>,
    /// Confidence levels, e.g. 0.95 for the worst 5 %.
    pub alphas: Vec<f64>,
    pub mc: McConfig,
    #[serde(skip)]
    base_dir: PathBuf,
}

impl Scenario {
    pub fn from_json(text: &str, base_dir: &Path) -> Result<Self> {
        let mut s: Scenario = serde_json::from_str(text)?;
        s.base_dir = base_dir.to_path_buf();
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_json(&text, &base)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |field: &str, message: String| {
            Err(Error::Scenario {
                field: field.to_string(),
                message,
            })
        };
        if self.mc.samples == 0 {
            return bad("mc.samples", "must be at least 1".into());
        }
        if self.mc.workers == Some(0) {
            return bad("mc.workers", "must be at least 1".into());
        }
        if self.alphas.is_empty() {
            return bad("alphas", "at least one confidence level required".into());
        }
        if let Some(a) = self.alphas.iter().find(|a| !(**a > 0.0 && **a < 1.0)) {
            return bad("alphas", format!("confidence level {a} outside (0, 1)"));
        }
        if self.models.is_empty() {
            return bad("models", "at least one model family required".into());
        }
        match &self.portfolio {
            PortfolioSource::Homogeneous { n, pd, lgd, irb } => {
                if *n == 0 {
                    return bad("portfolio.n", "must be at least 1".into());
                }
                if let Err(e) = check_open_unit("pd", *pd) {
                    return bad("portfolio.pd", e.to_string());
                }
                if let Err(e) = lgd.validated() {
                    return bad("portfolio.lgd", e.to_string());
                }
                if let Err(e) = check_bounds(irb.lo, irb.hi) {
                    return bad("portfolio.irb", e.to_string());
                }
            }
            PortfolioSource::Csv { irb, lgd, .. } => {
                if let Err(e) = check_bounds(irb.lo, irb.hi) {
                    return bad("portfolio.irb", e.to_string());
                }
                if let Some(Err(e)) = lgd.map(LgdSpec::validated) {
                    return bad("portfolio.lgd", e.to_string());
                }
            }
        }
        Ok(())
    }

    /// Resolved path of the portfolio CSV, if the scenario reads one.
    pub fn portfolio_path(&self) -> Option<PathBuf> {
        match &self.portfolio {
            PortfolioSource::Csv { path, .. } => Some(self.resolve(path)),
            PortfolioSource::Homogeneous { .. } => None,
        }
    }

    fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn build_portfolio(&self) -> Result<Portfolio> {
        match &self.portfolio {
            PortfolioSource::Homogeneous { n, pd, lgd, irb } => homogeneous_portfolio(*n, *pd, *lgd, *irb),
            PortfolioSource::Csv {
                path,
                irb,
                ratings,
                lgd,
            } => {
                let table = ratings.as_ref().map(|r| RatingTable::load(&self.resolve(r))).transpose()?;
                let mut p = load_portfolio_csv(&self.resolve(path), *irb, table.as_ref())?;
                if let Some(lgd) = lgd {
                    for b in &mut p.borrowers {
                        b.lgd = *lgd;
                    }
                }
                Ok(p)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::io::Write as _;

    const DET: LgdSpec = LgdSpec::Deterministic { value: 0.1 };

    #[test]
    fn irb_examples() {
        let rho = irb_correlation(0.02, 0.12, 0.24).unwrap();
        // hand evaluation: 0.12·(1 − e⁻¹) + 0.24·e⁻¹, up to the e⁻⁵⁰ term
        let e1 = (-1f64).exp();
        assert!((rho - (0.12 * (1.0 - e1) + 0.24 * e1)).abs() < 1e-12, "{rho}");
        assert!((rho - 0.1644).abs() < 5e-4, "{rho}");
        assert!((irb_correlation(1e-12, 0.12, 0.24).unwrap() - 0.24).abs() < 1e-9);
        let near_one = irb_correlation(MAX_PD, 0.12, 0.24).unwrap();
        let limit = 0.12 + 0.12 * (-50f64).exp() / (1.0 - (-50f64).exp());
        assert!((near_one - limit).abs() < 1e-12);
        assert!(irb_correlation(0.0, 0.12, 0.24).is_err());
        assert!(irb_correlation(0.02, 0.3, 0.2).is_err());
    }

    #[test]
    fn beta_examples() {
        let (a, b) = beta_params(0.1, 0.15).unwrap();
        assert!((a - 0.3).abs() < 1e-12 && (b - 2.7).abs() < 1e-12);
        let (a, b) = beta_params(0.5, (1.0f64 / 12.0).sqrt()).unwrap();
        assert!((a - 1.0).abs() < 1e-12 && (b - 1.0).abs() < 1e-12);
        let (a, b) = beta_params(0.2, 0.1).unwrap();
        assert!((a - 3.0).abs() < 1e-12 && (b - 12.0).abs() < 1e-12);
        assert!(matches!(beta_params(0.5, 0.5), Err(Error::InfeasibleBeta { .. })));
    }

    #[test]
    fn homogeneous_examples() {
        let p = homogeneous_portfolio(1000, 0.02, DET, IrbParams::BASEL).unwrap();
        assert_eq!(p.len(), 1000);
        assert!(p.borrowers().iter().all(|b| (b.exposure_weight - 1e-3).abs() < 1e-15));
        assert_eq!(p.borrowers()[0].corr_interval, (0.12, 0.24));
        assert!((p.expected_loss() - 0.002).abs() < 1e-15);
        let one = homogeneous_portfolio(1, 0.5, LgdSpec::Deterministic { value: 1.0 }, IrbParams::BASEL).unwrap();
        assert_eq!(one.borrowers()[0].exposure_weight, 1.0);
        let beta = LgdSpec::Beta { mean: 0.1, vol: 0.15 };
        assert!(homogeneous_portfolio(1000, 0.02, beta, IrbParams::BASEL).is_ok());
        assert!(homogeneous_portfolio(0, 0.02, DET, IrbParams::BASEL).is_err());
    }

    fn write_tmp(text: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(text.as_bytes()).unwrap();
        f
    }

    const IDB: IrbParams = IrbParams {
        lo: 0.11,
        hi: 0.27,
        shift: 0.05,
    };

    #[test]
    fn loads_idb_style_rows() {
        let f = write_tmp(
            "name,amount,pd,lgd_kind,lgd_mean,lgd_vol,corr_lo,corr_hi\n\
             Argentina,15548,0.848,deterministic,0.1,,,\n\
             Haiti,0,0.504,deterministic,0.1,,,\n\
             Venezuela,2011,1.0,deterministic,0.1,,,\n\
             Chile,2290,0.0001,beta,0.1,0.15,0.2,0.3\n",
        );
        let p = load_portfolio_csv(f.path(), IDB, None).unwrap();
        let b = p.borrowers();
        let total = 15548.0 + 2011.0 + 2290.0;
        assert!((b[0].exposure_weight - 15548.0 / total).abs() < 1e-15);
        assert_eq!(b[1].exposure_weight, 0.0);
        assert_eq!(b[2].pd, MAX_PD);
        assert!((b[0].corr_interval.0 - 0.06).abs() < 1e-4);
        assert!((b[0].corr_interval.1 - 0.16).abs() < 1e-4);
        assert_eq!(b[3].corr_interval, (0.2, 0.3));
        assert_eq!(b[3].lgd, LgdSpec::Beta { mean: 0.1, vol: 0.15 });
        let sum: f64 = b.iter().map(|b| b.exposure_weight).sum();
        assert!((sum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn csv_round_trip() {
        let f = write_tmp(
            "name,amount,pd,lgd_kind,lgd_mean\n\
             A,1.5,0.01,deterministic,0.4\n\
             B,3,0.2,deterministic,1\n",
        );
        let p = load_portfolio_csv(f.path(), IDB, None).unwrap();
        let mut buf = Vec::new();
        p.write_csv(&mut buf).unwrap();
        let g = write_tmp(std::str::from_utf8(&buf).unwrap());
        let q = load_portfolio_csv(g.path(), IDB, None).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn csv_diagnostics() {
        let missing = write_tmp("name,amount,lgd_kind,lgd_mean\nA,1,deterministic,0.1\n");
        match load_portfolio_csv(missing.path(), IDB, None) {
            Err(Error::Parse { column, row, .. }) => {
                assert_eq!(column, "pd");
                assert_eq!(row, 1);
            }
            other => panic!("{other:?}"),
        }
        let bad = write_tmp("name,amount,pd,lgd_kind,lgd_mean\nA,1,0.1,deterministic,0.1\nB,x,0.1,deterministic,0.1\n");
        match load_portfolio_csv(bad.path(), IDB, None) {
            Err(Error::Parse { column, row, .. }) => assert_eq!((column.as_str(), row), ("amount", 3)),
            other => panic!("{other:?}"),
        }
        let neg = write_tmp("name,amount,pd,lgd_kind,lgd_mean\nA,-1,0.1,deterministic,0.1\n");
        assert!(matches!(load_portfolio_csv(neg.path(), IDB, None), Err(Error::Parse { .. })));
        let zero = write_tmp("name,amount,pd,lgd_kind,lgd_mean\nA,1,0,deterministic,0.1\n");
        assert!(matches!(load_portfolio_csv(zero.path(), IDB, None), Err(Error::Parse { .. })));
        let kind = write_tmp("name,amount,pd,lgd_kind,lgd_mean\nA,1,0.1,gamma,0.1\n");
        assert!(matches!(load_portfolio_csv(kind.path(), IDB, None), Err(Error::Parse { .. })));
    }

    #[test]
    fn rating_lookup() {
        let table = write_tmp("rating,pd\nBB,0.004\nB-,0.0759\n");
        let ratings = RatingTable::load(table.path()).unwrap();
        let f = write_tmp("name,amount,pd,lgd_kind,lgd_mean\nA,1,BB,deterministic,0.1\nB,1,B-,deterministic,0.1\n");
        let p = load_portfolio_csv(f.path(), IDB, Some(&ratings)).unwrap();
        assert_eq!(p.borrowers()[0].pd, 0.004);
        assert_eq!(p.borrowers()[1].pd, 0.0759);
        let unknown = write_tmp("name,amount,pd,lgd_kind,lgd_mean\nA,1,AAA,deterministic,0.1\n");
        assert!(load_portfolio_csv(unknown.path(), IDB, Some(&ratings)).is_err());
    }

    #[test]
    fn scenario_validation_names_field() {
        let text = r#"{
            "label": "s",
            "portfolio": {"kind": "homogeneous", "n": 10, "pd": 0.02,
                          "lgd": {"kind": "deterministic", "value": 0.1}},
            "models": ["gaussian"],
            "alphas": [0.95],
            "mc": {"samples": 0, "seed": 1}
        }"#;
        match Scenario::from_json(text, Path::new(".")) {
            Err(Error::Scenario { field, .. }) => assert_eq!(field, "mc.samples"),
            other => panic!("{other:?}"),
        }
        let ok = text.replace("\"samples\": 0", "\"samples\": 5");
        let s = Scenario::from_json(&ok, Path::new(".")).unwrap();
        assert_eq!(s.build_portfolio().unwrap().len(), 10);
        let alpha = ok.replace("[0.95]", "[1.5]");
        assert!(Scenario::from_json(&alpha, Path::new(".")).is_err());
    }

    proptest! {
        #[test]
        fn irb_decreasing_and_bounded(a in 1e-6..0.999f64, b in 1e-6..0.999f64) {
            let (lo, hi) = (0.12, 0.24);
            let ra = irb_correlation(a, lo, hi).unwrap();
            let rb = irb_correlation(b, lo, hi).unwrap();
            prop_assert!(ra >= lo && ra < hi);
            if a < b {
                prop_assert!(ra >= rb);
            }
            if b - a > 1e-3 && b < 0.5 {
                prop_assert!(ra > rb);
            }
        }

        #[test]
        fn beta_moments_reproduced(mean in 0.01..0.99f64, frac in 0.01..0.99f64) {
            let vol = (frac * mean * (1.0 - mean)).sqrt();
            let (a, b) = beta_params(mean, vol).unwrap();
            let m = a / (a + b);
            let v = a * b / ((a + b).powi(2) * (a + b + 1.0));
            prop_assert!((m - mean).abs() < 1e-12);
            prop_assert!((v - vol * vol).abs() < 1e-12 * (1.0 + v));
        }
    }
}
