//! Monte Carlo engine for `Y_t = int_{tD} phi(B_x) dx`.
//!
//! One run draws `n_reps` field realizations per scale `t`, evaluates them on
//! the grid of `tD` and integrates every configured observable against the
//! same realizations. Replication `i` at scale index `k` uses the sampler
//! seeded by `derive_seed(seed, k, i)`, so results do not depend on the
//! worker count or on how many replications other scales use.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::domain::{DomainSpec, DEFAULT_POINT_CAP, DEFAULT_SPACING};
use crate::error::{invalid, Error, Result};
use crate::field::{build_sampler, derive_seed, BLOCK_SIZE, DEFAULT_WAVES};
use crate::hermite::{classify_case, CaseLabel, HermiteExpansion, DEFAULT_Q_MAX};
use crate::observable::Observable;
use crate::plot;
use crate::spectral::{Covariance, SpectralMeasure};
use crate::stats::{normality_report, rate_fit, Moments, NormalityReport, RateCriteria, RateFit};
use crate::variance::{predicted_rate, total_variance, RatePrediction, ReferenceQuantity};

/// Default cap on grid points x waves x replications for one scale.
pub const DEFAULT_BUDGET: f64 = 1e12;
/// Above this many replications per scale, samples are written only on request.
pub const PERSIST_LIMIT: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    Empirical,
    Theoretical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Persist {
    Auto,
    Always,
    Never,
}

/// Parsed experiment description. See `docs/config.md` for the grammar.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub name: String,
    pub measure: String,
    pub observables: Vec<String>,
    pub domain: String,
    pub d: usize,
    pub t_list: Vec<f64>,
    pub h: f64,
    pub waves: usize,
    /// One entry for all scales, or one per scale.
    pub n_reps: Vec<usize>,
    pub seed: u64,
    pub normalization: Normalization,
    /// Worker threads; 0 picks the number of cores.
    pub workers: usize,
    pub q_max: usize,
    pub point_cap: usize,
    pub budget: f64,
    pub persist_samples: Persist,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            name: "experiment".into(),
            measure: "berry".into(),
            observables: vec!["hermite:2".into()],
            domain: "ball:2,1".into(),
            d: 2,
            t_list: vec![4.0, 8.0, 16.0, 32.0],
            h: DEFAULT_SPACING,
            waves: DEFAULT_WAVES,
            n_reps: vec![100],
            seed: 1,
            normalization: Normalization::Empirical,
            workers: 0,
            q_max: DEFAULT_Q_MAX,
            point_cap: DEFAULT_POINT_CAP,
            budget: DEFAULT_BUDGET,
            persist_samples: Persist::Auto,
        }
    }
}

fn parse_list<T: std::str::FromStr>(v: &str) -> Option<Vec<T>> {
    v.split(',').map(|p| p.trim().parse().ok()).collect()
}

impl ExperimentConfig {
    /// Parses `key = value` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        let mut d_given = None;
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| Error::Config { line: line_no, msg };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected `key = value`, got `{line}`")))?;
            let (key, value) = (key.trim(), value.trim());
            let bad = || err(format!("cannot parse value `{value}` for `{key}`"));
            match key {
                "name" => cfg.name = value.to_string(),
                "measure" => cfg.measure = value.to_string(),
                "observable" | "observables" => {
                    cfg.observables = value
                        .split(';')
                        .map(|s| s.trim().to_string())
                        .filter(|s| !s.is_empty())
                        .collect()
                }
                "domain" => cfg.domain = value.to_string(),
                "d" => d_given = Some(value.parse().map_err(|_| bad())?),
                "t" | "t_list" => cfg.t_list = parse_list(value).ok_or_else(bad)?,
                "h" => cfg.h = value.parse().map_err(|_| bad())?,
                "waves" | "M" => cfg.waves = value.parse().map_err(|_| bad())?,
                "n_reps" => cfg.n_reps = parse_list(value).ok_or_else(bad)?,
                "seed" => cfg.seed = value.parse().map_err(|_| bad())?,
                "normalization" => {
                    cfg.normalization = match value {
                        "empirical" => Normalization::Empirical,
                        "theoretical" => Normalization::Theoretical,
                        _ => return Err(bad()),
                    }
                }
                "workers" => cfg.workers = value.parse().map_err(|_| bad())?,
                "q_max" => cfg.q_max = value.parse().map_err(|_| bad())?,
                "point_cap" => cfg.point_cap = value.parse().map_err(|_| bad())?,
                "budget" => cfg.budget = value.parse().map_err(|_| bad())?,
                "persist_samples" => {
                    cfg.persist_samples = match value {
                        "auto" => Persist::Auto,
                        "true" | "yes" => Persist::Always,
                        "false" | "no" => Persist::Never,
                        _ => return Err(bad()),
                    }
                }
                _ => return Err(err(format!("unknown key `{key}`"))),
            }
        }
        cfg.d = match d_given {
            Some(d) => d,
            None => DomainSpec::from_id(&cfg.domain)?.d,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::parse(&fs::read_to_string(path)?)
    }

    /// Checks the invariants and that every id resolves.
    pub fn validate(&self) -> Result<()> {
        if self.t_list.is_empty() || self.t_list.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
            return Err(invalid("t_list must hold positive finite values"));
        }
        if self.t_list.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("t_list must be strictly increasing"));
        }
        if self.n_reps.len() != 1 && self.n_reps.len() != self.t_list.len() {
            return Err(invalid(format!(
                "n_reps needs one value or one per scale ({} scales, got {})",
                self.t_list.len(),
                self.n_reps.len()
            )));
        }
        if self.n_reps.iter().any(|&n| n < 8) {
            return Err(invalid("n_reps must be at least 8"));
        }
        if !(self.h.is_finite() && self.h > 0.0) {
            return Err(invalid(format!("grid spacing h must be positive, got {}", self.h)));
        }
        if self.waves == 0 {
            return Err(invalid("waves must be positive"));
        }
        if self.observables.is_empty() {
            return Err(invalid("at least one observable is required"));
        }
        let dom = DomainSpec::from_id(&self.domain)?;
        if dom.d != self.d {
            return Err(invalid(format!(
                "domain {} lives in dimension {}, not d = {}",
                self.domain, dom.d, self.d
            )));
        }
        SpectralMeasure::from_id(&self.measure)?.check_dimension(self.d)?;
        for o in &self.observables {
            Observable::from_id(o)?;
        }
        Ok(())
    }

    pub fn reps_at(&self, k: usize) -> usize {
        if self.n_reps.len() == 1 {
            self.n_reps[0]
        } else {
            self.n_reps[k]
        }
    }

    fn persist(&self, reps: usize) -> bool {
        match self.persist_samples {
            Persist::Always => true,
            Persist::Never => false,
            Persist::Auto => reps <= PERSIST_LIMIT,
        }
    }
}

/// Statistics of `Y_t` at one scale.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScaleStats {
    pub t: f64,
    pub n_reps: usize,
    pub grid_points: usize,
    /// `h^d` times the number of grid points.
    pub grid_volume: f64,
    pub mean: f64,
    pub variance: f64,
    pub std_error_mean: f64,
    /// `m_t = a_0 t^d Vol(D)`
    pub mean_theoretical: f64,
    /// `sigma_t^2` summed over chaoses up to `q_max`.
    pub var_theoretical: f64,
    pub dominant_q: Option<usize>,
    pub reference_quantity: Option<f64>,
    /// Mean and variance of `(Y_t - m) / s` under the configured normalization.
    pub normalized_mean: f64,
    pub normalized_variance: f64,
    pub normality: Option<NormalityReport>,
    pub normality_error: Option<String>,
    #[serde(skip)]
    pub samples: Vec<f64>,
}

/// Everything computed for one observable.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub name: String,
    pub observable: String,
    pub measure: String,
    pub domain: String,
    pub normalization: Normalization,
    pub rank: Option<usize>,
    pub second_rank: Option<usize>,
    pub a0: f64,
    pub case: Option<CaseLabel>,
    pub prediction: Option<RatePrediction>,
    pub scales: Vec<ScaleStats>,
    pub rate: Option<RateFit>,
    pub rate_error: Option<String>,
    /// Empirical variance over `t^d w_{Q,t}` (or `t^d`) per scale.
    pub reference_ratio: Vec<f64>,
    /// Excess kurtosis increases strictly along the scales.
    pub kurtosis_increasing: bool,
}

impl ExperimentReport {
    pub fn scale(&self, t: f64) -> Option<&ScaleStats> {
        self.scales.iter().find(|s| s.t == t)
    }

    pub fn largest(&self) -> &ScaleStats {
        self.scales.last().expect("at least one scale")
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "t,n_reps,mean,variance,std_error_mean,mean_theoretical,var_theoretical,skewness,excess_kurtosis,ks_statistic,ks_critical_1pct,p_value_lower,p_value_upper\n",
        );
        for s in &self.scales {
            let (sk, ku, ks, kc, pl, pu) = match &s.normality {
                Some(n) => (
                    n.skewness,
                    n.excess_kurtosis,
                    n.ks_statistic,
                    n.ks_critical_1pct,
                    n.p_value_lower,
                    n.p_value_upper,
                ),
                None => (f64::NAN, f64::NAN, f64::NAN, f64::NAN, f64::NAN, f64::NAN),
            };
            let _ = writeln!(
                out,
                "{},{},{:e},{:e},{:e},{:e},{:e},{},{},{},{},{},{}",
                s.t,
                s.n_reps,
                s.mean,
                s.variance,
                s.std_error_mean,
                s.mean_theoretical,
                s.var_theoretical,
                sk,
                ku,
                ks,
                kc,
                pl,
                pu
            );
        }
        out
    }

    pub fn rates_csv(&self) -> String {
        let mut out = String::from("t,var_empirical,var_theoretical,reference_quantity\n");
        for s in &self.scales {
            let reference = s.reference_quantity.map_or_else(String::new, |v| format!("{v:e}"));
            let _ = writeln!(out, "{},{:e},{:e},{}", s.t, s.variance, s.var_theoretical, reference);
        }
        out
    }
}

/// Theory attached to one observable.
struct ObservableTheory {
    id: String,
    observable: Observable,
    expansion: HermiteExpansion,
    case: Option<CaseLabel>,
    prediction: Option<RatePrediction>,
}

fn theory_for(id: &str, mu: &SpectralMeasure, d: usize, q_max: usize) -> Result<ObservableTheory> {
    let observable = Observable::from_id(id)?;
    let expansion = observable.expansion(q_max)?;
    let case = match expansion.rank {
        Some(r) => Some(classify_case(&expansion, mu.covariance_summable(d, r))?),
        None => None,
    };
    let prediction = case
        .as_ref()
        .and_then(|c| predicted_rate(c, d, mu.decay_exponent(d)).ok());
    Ok(ObservableTheory {
        id: id.to_string(),
        observable,
        expansion,
        case,
        prediction,
    })
}

fn thread_pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| invalid(format!("cannot start worker pool: {e}")))
}

/// Runs a configuration with a single observable.
pub fn run_replications(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    if cfg.observables.len() != 1 {
        return Err(invalid(format!(
            "run_replications takes one observable, got {}; use run_suite",
            cfg.observables.len()
        )));
    }
    Ok(run_suite(cfg)?.remove(0))
}

/// Runs every configured observable on shared field realizations.
pub fn run_suite(cfg: &ExperimentConfig) -> Result<Vec<ExperimentReport>> {
    cfg.validate()?;
    let mu = SpectralMeasure::from_id(&cfg.measure)?;
    let domain = DomainSpec::from_id(&cfg.domain)?;
    let d = cfg.d;
    let theories: Vec<ObservableTheory> = cfg
        .observables
        .iter()
        .map(|id| theory_for(id, &mu, d, cfg.q_max))
        .collect::<Result<_>>()?;

    // Grids and budgets are checked for every scale before any work starts.
    let mut grids = Vec::with_capacity(cfg.t_list.len());
    for (k, &t) in cfg.t_list.iter().enumerate() {
        let grid = domain.grid(t, cfg.h, cfg.point_cap)?;
        let needed = grid.box_size() as f64 * cfg.waves as f64 * cfg.reps_at(k) as f64;
        if needed > cfg.budget {
            return Err(Error::BudgetExceeded {
                t,
                needed,
                cap: cfg.budget,
            });
        }
        grids.push(grid);
    }

    let t_max = *cfg.t_list.last().expect("validated non-empty");
    let cov = Covariance::new(mu.clone(), d)?.tabulate(domain.diameter() * t_max + 1.0)?;

    let pool = thread_pool(cfg.workers)?;
    // samples[k][o][i]: scale k, observable o, replication i
    let mut samples: Vec<Vec<Vec<f64>>> = Vec::with_capacity(grids.len());
    for (k, grid) in grids.iter().enumerate() {
        let reps = cfg.reps_at(k);
        let per_rep: Vec<Vec<f64>> = pool.install(|| {
            (0..reps)
                .into_par_iter()
                .map(|i| -> Result<Vec<f64>> {
                    let sampler = build_sampler(&mu, d, cfg.waves, derive_seed(cfg.seed, k as u64, i as u64))?;
                    let values = sampler.evaluate_lattice(&grid.axes)?;
                    Ok(theories
                        .iter()
                        .map(|th| grid.integrate_values(&values, |b| th.observable.eval(b)))
                        .collect())
                })
                .collect::<Result<Vec<_>>>()
        })?;
        let by_obs = (0..theories.len())
            .map(|o| per_rep.iter().map(|r| r[o]).collect())
            .collect();
        samples.push(by_obs);
    }

    let mut reports = Vec::with_capacity(theories.len());
    for (o, th) in theories.iter().enumerate() {
        let mut scales = Vec::with_capacity(cfg.t_list.len());
        for (k, &t) in cfg.t_list.iter().enumerate() {
            let ys = samples[k][o].clone();
            scales.push(scale_stats(cfg, th, &cov, &domain, &grids[k], t, ys)?);
        }
        reports.push(assemble(cfg, th, scales));
    }
    Ok(reports)
}

fn scale_stats(
    cfg: &ExperimentConfig,
    th: &ObservableTheory,
    cov: &Covariance,
    domain: &DomainSpec,
    grid: &crate::domain::Grid,
    t: f64,
    samples: Vec<f64>,
) -> Result<ScaleStats> {
    let m = Moments::of(&samples)?;
    let (mean_theoretical, var_theoretical, dominant_q) = match th.expansion.rank {
        Some(_) => {
            let tab = total_variance(&th.expansion, cov, domain, t)?;
            (tab.mean, tab.total_variance, tab.dominant_q)
        }
        None => (th.expansion.mean * t.powi(cfg.d as i32) * domain.volume(), 0.0, None),
    };
    let reference_quantity = match &th.prediction {
        Some(p) => Some(p.reference_value(cov, cfg.d, t)?),
        None => None,
    };
    let (center, scale) = match cfg.normalization {
        Normalization::Empirical => (m.mean, m.variance.sqrt()),
        Normalization::Theoretical => (mean_theoretical, var_theoretical.sqrt()),
    };
    let (normalized_mean, normalized_variance) = if scale > 0.0 {
        ((m.mean - center) / scale, m.variance / (scale * scale))
    } else {
        (f64::NAN, f64::NAN)
    };
    let (normality, normality_error) = match normality_report(&samples) {
        Ok(r) => (Some(r), None),
        Err(e) => (None, Some(e.to_string())),
    };
    Ok(ScaleStats {
        t,
        n_reps: samples.len(),
        grid_points: grid.count,
        grid_volume: grid.total_weight(),
        mean: m.mean,
        variance: m.variance,
        std_error_mean: m.std_error_of_mean(),
        mean_theoretical,
        var_theoretical,
        dominant_q,
        reference_quantity,
        normalized_mean,
        normalized_variance,
        normality,
        normality_error,
        samples,
    })
}

fn assemble(cfg: &ExperimentConfig, th: &ObservableTheory, scales: Vec<ScaleStats>) -> ExperimentReport {
    let ts: Vec<f64> = scales.iter().map(|s| s.t).collect();
    let vars: Vec<f64> = scales.iter().map(|s| s.variance).collect();
    let (rate, rate_error) = match &th.prediction {
        Some(p) => match rate_fit(&ts, &vars, p, RateCriteria::default()) {
            Ok(f) => (Some(f), None),
            Err(e) => (None, Some(e.to_string())),
        },
        None => (None, Some("no rate prediction for this case".into())),
    };
    let reference_ratio = scales
        .iter()
        .filter_map(|s| s.reference_quantity.map(|r| s.variance / r))
        .collect();
    let kurt: Vec<f64> = scales
        .iter()
        .map(|s| s.normality.map_or(f64::NAN, |n| n.excess_kurtosis))
        .collect();
    let kurtosis_increasing = kurt.len() >= 2 && kurt.windows(2).all(|w| w[1] > w[0]);
    ExperimentReport {
        name: cfg.name.clone(),
        observable: th.id.clone(),
        measure: cfg.measure.clone(),
        domain: cfg.domain.clone(),
        normalization: cfg.normalization,
        rank: th.expansion.rank,
        second_rank: th.expansion.second_rank,
        a0: th.expansion.mean,
        case: th.case.clone(),
        prediction: th.prediction.clone(),
        scales,
        rate,
        rate_error,
        reference_ratio,
        kurtosis_increasing,
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    package: &'static str,
    version: &'static str,
    config: &'a ExperimentConfig,
    block_size: usize,
    seed_rule: &'static str,
    scale_seeds: Vec<ScaleSeed>,
}

#[derive(Serialize)]
struct ScaleSeed {
    t: f64,
    stream: usize,
    n_reps: usize,
    first_seed: u64,
}

/// Slug for an observable id usable as a directory name.
pub fn slug(id: &str) -> String {
    id.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '.' || c == '-' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

/// Writes `manifest.json` in `out` and, for each report, `report.json`,
/// `report.csv`, `rates.csv`, `rates.svg` and the sample files. With several
/// reports each goes to a subdirectory named after its observable.
pub fn write_outputs(cfg: &ExperimentConfig, reports: &[ExperimentReport], out: &Path) -> Result<()> {
    fs::create_dir_all(out)?;
    let manifest = Manifest {
        package: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        config: cfg,
        block_size: BLOCK_SIZE,
        seed_rule: "replication i at scale index k uses derive_seed(seed, k, i)",
        scale_seeds: cfg
            .t_list
            .iter()
            .enumerate()
            .map(|(k, &t)| ScaleSeed {
                t,
                stream: k,
                n_reps: cfg.reps_at(k),
                first_seed: derive_seed(cfg.seed, k as u64, 0),
            })
            .collect(),
    };
    fs::write(
        out.join("manifest.json"),
        serde_json::to_string_pretty(&manifest)? + "\n",
    )?;
    for r in reports {
        let dir = if reports.len() == 1 {
            out.to_path_buf()
        } else {
            out.join(slug(&r.observable))
        };
        fs::create_dir_all(&dir)?;
        fs::write(dir.join("report.json"), serde_json::to_string_pretty(r)? + "\n")?;
        fs::write(dir.join("report.csv"), r.to_csv())?;
        fs::write(dir.join("rates.csv"), r.rates_csv())?;
        fs::write(dir.join("rates.svg"), rates_plot(r))?;
        for s in &r.scales {
            if cfg.persist(s.n_reps) {
                let mut csv = String::from("rep_index,y_value\n");
                for (i, y) in s.samples.iter().enumerate() {
                    let _ = writeln!(csv, "{i},{y:e}");
                }
                fs::write(dir.join(format!("samples_t{}.csv", s.t)), csv)?;
            }
        }
    }
    Ok(())
}

fn rates_plot(r: &ExperimentReport) -> String {
    let pts = |f: &dyn Fn(&ScaleStats) -> Option<f64>| -> Vec<(f64, f64)> {
        r.scales
            .iter()
            .filter_map(|s| f(s).filter(|v| *v > 0.0).map(|v| (s.t, v)))
            .collect()
    };
    let series = vec![
        plot::Series::new("empirical", pts(&|s| Some(s.variance))),
        plot::Series::new("theoretical", pts(&|s| Some(s.var_theoretical))),
        plot::Series::new(
            match r.prediction.as_ref().map(|p| p.reference) {
                Some(ReferenceQuantity::Td) => "t^d",
                _ => "t^d w_(Q,t)",
            },
            pts(&|s| s.reference_quantity),
        ),
    ];
    plot::loglog_svg(
        &format!("Var(Y_t) for {} ({})", r.observable, r.measure),
        "t",
        "variance",
        &series,
    )
}

/// Budget profiles of the Berry reproduction suite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    Smoke,
    Desk,
    Full,
}

impl std::str::FromStr for Profile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "smoke" => Ok(Profile::Smoke),
            "desk" => Ok(Profile::Desk),
            "full" => Ok(Profile::Full),
            _ => Err(Error::UnknownId {
                kind: "profile",
                id: s.to_string(),
            }),
        }
    }
}

/// The four headline Berry cases on the unit disk: `H_2`, `H_4`, `H_6` and
/// `x + x^2`.
pub fn berry_suite_config(profile: Profile, seed: u64) -> ExperimentConfig {
    let base = ExperimentConfig {
        name: "berry-suite".into(),
        measure: "berry".into(),
        observables: ["hermite:2", "hermite:4", "hermite:6", "sq_plus_lin"]
            .iter()
            .map(|s| s.to_string())
            .collect(),
        domain: "ball:2,1".into(),
        d: 2,
        seed,
        ..ExperimentConfig::default()
    };
    match profile {
        Profile::Smoke => ExperimentConfig {
            t_list: vec![4.0, 8.0, 16.0, 32.0],
            waves: 256,
            n_reps: vec![16],
            ..base
        },
        Profile::Desk => ExperimentConfig {
            t_list: vec![16.0, 32.0, 64.0, 128.0],
            waves: 8192,
            n_reps: vec![200, 200, 200, 400],
            ..base
        },
        Profile::Full => ExperimentConfig {
            t_list: vec![16.0, 32.0, 64.0, 128.0, 256.0],
            waves: 8192,
            n_reps: vec![1000],
            budget: 1e14,
            ..base
        },
    }
}

/// One row of the suite verdict table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteVerdict {
    pub observable: String,
    pub case: String,
    pub predicted_exponent: Option<f64>,
    pub log_correction: bool,
    pub fitted_exponent: Option<f64>,
    pub rate_pass: Option<bool>,
    pub skewness: Option<f64>,
    pub excess_kurtosis: Option<f64>,
    pub ks_pass: Option<bool>,
}

pub fn suite_verdicts(reports: &[ExperimentReport]) -> Vec<SuiteVerdict> {
    reports
        .iter()
        .map(|r| {
            let n = r.largest().normality;
            SuiteVerdict {
                observable: r.observable.clone(),
                case: r.case.as_ref().map_or_else(|| "constant".into(), |c| c.to_string()),
                predicted_exponent: r.prediction.as_ref().and_then(|p| p.exponent),
                log_correction: r.prediction.as_ref().is_some_and(|p| p.log_correction),
                fitted_exponent: r.rate.as_ref().map(|f| f.slope),
                rate_pass: r.rate.as_ref().map(|f| f.verdict),
                skewness: n.map(|n| n.skewness),
                excess_kurtosis: n.map(|n| n.excess_kurtosis),
                ks_pass: n.map(|n| n.passes_ks()),
            }
        })
        .collect()
}

pub fn verdicts_csv(v: &[SuiteVerdict]) -> String {
    let opt = |x: Option<f64>| x.map_or_else(String::new, |v| format!("{v:.4}"));
    let flag = |x: Option<bool>| x.map_or_else(String::new, |b| if b { "pass".into() } else { "fail".into() });
    let mut out = String::from(
        "observable,case,predicted_exponent,log_correction,fitted_exponent,rate_verdict,skewness,excess_kurtosis,ks_verdict\n",
    );
    for r in v {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.observable,
            r.case,
            opt(r.predicted_exponent),
            r.log_correction,
            opt(r.fitted_exponent),
            flag(r.rate_pass),
            opt(r.skewness),
            opt(r.excess_kurtosis),
            flag(r.ks_pass)
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(observables: &[&str]) -> ExperimentConfig {
        ExperimentConfig {
            observables: observables.iter().map(|s| s.to_string()).collect(),
            t_list: vec![2.0, 4.0, 8.0, 16.0],
            waves: 64,
            n_reps: vec![12],
            h: 0.5,
            seed: 7,
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn parses_config_text() {
        let text = "# demo\nname = demo\nmeasure = bessel:2,1\nobservables = hermite:2; poly:0,1,1\n\
                    domain = cube:2,1\nt = 4, 8, 16\nh = 0.25\nM = 128\nn_reps = 10, 10, 20\nseed = 42\n\
                    normalization = theoretical\nworkers = 2\npersist_samples = no\n";
        let cfg = ExperimentConfig::parse(text).unwrap();
        assert_eq!(cfg.observables, vec!["hermite:2", "poly:0,1,1"]);
        assert_eq!(cfg.d, 2);
        assert_eq!(cfg.t_list, vec![4.0, 8.0, 16.0]);
        assert_eq!((cfg.waves, cfg.reps_at(2), cfg.seed), (128, 20, 42));
        assert_eq!(cfg.normalization, Normalization::Theoretical);
        assert_eq!(cfg.persist_samples, Persist::Never);
    }

    #[test]
    fn rejects_bad_configs() {
        let line_of = |text: &str| match ExperimentConfig::parse(text) {
            Err(Error::Config { line, .. }) => Some(line),
            _ => None,
        };
        assert_eq!(line_of("name = x\nbogus = 1\n"), Some(2));
        assert_eq!(line_of("h = abc\n"), Some(1));
        assert_eq!(line_of("no equals sign\n"), Some(1));
        assert!(ExperimentConfig::parse("t = 8, 4\n").is_err());
        assert!(ExperimentConfig::parse("n_reps = 4\n").is_err());
        assert!(matches!(
            ExperimentConfig::parse("measure = nope\n"),
            Err(Error::UnknownId { .. })
        ));
        assert!(ExperimentConfig::parse("domain = ball:3,1\nd = 2\n").is_err());
    }

    #[test]
    fn constant_observable_is_deterministic() {
        let cfg = small(&["poly:1"]);
        let r = run_replications(&cfg).unwrap();
        for s in &r.scales {
            assert!(s
                .samples
                .iter()
                .all(|y| (y - s.grid_volume).abs() < 1e-9 * s.grid_volume));
            assert!(s.variance < 1e-12 * s.grid_volume.powi(2));
            assert!(s.normality.is_none() && s.normality_error.is_some());
        }
        assert!(r.case.is_none());
    }

    #[test]
    fn shared_realizations_and_worker_independence() {
        let mut cfg = small(&["hermite:2", "sq_plus_lin"]);
        cfg.workers = 1;
        let a = run_suite(&cfg).unwrap();
        cfg.workers = 3;
        let b = run_suite(&cfg).unwrap();
        assert_eq!(a, b);
        // x + x^2 = H_1 + H_2 + 1 integrates the same H_2 part
        let single = run_replications(&small(&["hermite:2"])).unwrap();
        assert_eq!(single.scales[0].samples, a[0].scales[0].samples);
    }

    #[test]
    fn replication_prefix_is_stable() {
        let mut cfg = small(&["hermite:2"]);
        let short = run_replications(&cfg).unwrap();
        cfg.n_reps = vec![24];
        let long = run_replications(&cfg).unwrap();
        for (s, l) in short.scales.iter().zip(&long.scales) {
            assert_eq!(s.samples[..], l.samples[..12]);
        }
    }

    #[test]
    fn budget_and_cap_errors() {
        let mut cfg = small(&["hermite:2"]);
        cfg.budget = 1e5;
        assert!(matches!(run_suite(&cfg), Err(Error::BudgetExceeded { .. })));
        let mut cfg = small(&["hermite:2"]);
        cfg.point_cap = 10;
        assert!(matches!(run_suite(&cfg), Err(Error::GridTooLarge { .. })));
    }

    #[test]
    fn outputs_are_written_and_reproducible() {
        let cfg = small(&["hermite:2", "hermite:4"]);
        let dir = std::env::temp_dir().join(format!("gaussfluct-exp-{}", std::process::id()));
        let _ = fs::remove_dir_all(&dir);
        let reports = run_suite(&cfg).unwrap();
        write_outputs(&cfg, &reports, &dir.join("a")).unwrap();
        write_outputs(&cfg, &run_suite(&cfg).unwrap(), &dir.join("b")).unwrap();
        for file in [
            "manifest.json",
            "hermite_2/report.json",
            "hermite_2/report.csv",
            "hermite_4/rates.csv",
            "hermite_4/samples_t16.csv",
        ] {
            let a = fs::read(dir.join("a").join(file)).unwrap();
            let b = fs::read(dir.join("b").join(file)).unwrap();
            assert_eq!(a, b, "{file}");
        }
        let rates = fs::read_to_string(dir.join("a/hermite_2/rates.csv")).unwrap();
        assert!(rates.starts_with("t,var_empirical,var_theoretical,reference_quantity\n2,"));
        let samples = fs::read_to_string(dir.join("a/hermite_2/samples_t2.csv")).unwrap();
        assert_eq!(samples.lines().count(), 13);
        let _ = fs::remove_dir_all(&dir);
    }

    #[test]
    fn profiles() {
        assert_eq!("desk".parse::<Profile>().unwrap(), Profile::Desk);
        assert!("huge".parse::<Profile>().is_err());
        let c = berry_suite_config(Profile::Desk, 1);
        assert_eq!(c.reps_at(3), 400);
        c.validate().unwrap();
        berry_suite_config(Profile::Smoke, 1).validate().unwrap();
        berry_suite_config(Profile::Full, 1).validate().unwrap();
    }
}
