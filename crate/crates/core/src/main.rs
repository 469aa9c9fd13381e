use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use gaussfluct::domain::DomainSpec;
use gaussfluct::experiment::{
    berry_suite_config, run_suite, suite_verdicts, verdicts_csv, write_outputs, ExperimentConfig, Profile,
};
use gaussfluct::hermite::{classify_case, DEFAULT_Q_MAX};
use gaussfluct::observable::Observable;
use gaussfluct::spectral::{spectral_condition, Covariance, RadialCovariance, SpectralCondition, SpectralMeasure};
use gaussfluct::variance::{contraction_ratio, predicted_rate, rank_one_variance, total_variance};
use gaussfluct::{Error, Result};

/// Simulate isotropic Gaussian fields and test the spectral central limit
/// theorem for `Y_t = int_{tD} phi(B_x) dx`.
#[derive(Parser)]
#[command(name = "gaussfluct", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Directory receiving output files.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Root seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (0 = all cores).
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Spectral condition `int s^{-d/R} mu(ds) < inf`. Exit 0 when finite,
    /// 2 when divergent.
    SpectralCheck {
        /// Measure id: berry, bessel:d,nu, powerlaw:beta[,lo,hi], table:<path>.
        measure: String,
        d: usize,
        /// Hermite rank R.
        rank: usize,
    },
    /// Hermite expansion `phi = sum_q a_q H_q` with `a_q = E[phi(N) H_q(N)] / q!`,
    /// ranks, and the case of the limit theorem.
    Hermite {
        /// Observable id: hermite:q, poly:c0,c1,..., indicator_above:u, abs, sq_plus_lin.
        observable: String,
        #[arg(long, default_value_t = DEFAULT_Q_MAX)]
        q_max: usize,
        /// Measure used to decide whether `C` is in `L^R`.
        #[arg(long, default_value = "berry")]
        measure: String,
        #[arg(long, default_value_t = 2)]
        d: usize,
    },
    /// Covariance `rho(r) = int b_d(r s) mu(ds)` on a grid of lags.
    Covariance {
        measure: String,
        d: usize,
        #[arg(long, default_value_t = 20.0)]
        r_max: f64,
        #[arg(long, default_value_t = 0.5)]
        step: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Chaos variances `Var(Y_{q,t}) = q! t^d v_{q,t}` with
    /// `v_{q,t} = int C(z)^q g_D(z/t) dz` and their sum.
    VarianceTable {
        measure: String,
        observable: String,
        /// Domain id: ball:d,r or cube:d,side.
        domain: String,
        t: f64,
        #[arg(long, default_value_t = DEFAULT_Q_MAX)]
        q_max: usize,
        #[command(flatten)]
        common: Common,
    },
    /// First-chaos variance `t^{2d} int |F[1_D](t lambda)|^2 G(d lambda)`.
    Rank1Variance {
        measure: String,
        domain: String,
        #[arg(required = true)]
        t: Vec<f64>,
    },
    /// Contraction criterion
    /// `t^d Var(Y_{q,t})^{-2} int |C(x)|^r |C(y)|^r |C(z)|^{q-r} |C(x+y+z)|^{q-r}`
    /// by Monte Carlo over three balls of radius `diam(D) t`.
    Contraction {
        measure: String,
        domain: String,
        q: usize,
        r: usize,
        #[arg(required = true)]
        t: Vec<f64>,
        #[arg(long, default_value_t = 1_000_000)]
        n_mc: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Monte Carlo replication of `Y_t = int_{tD} phi(B_x) dx` from a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Berry random waves on the unit disk: rates `t^3`, `t^2 log t`, `t^2`
    /// and normality of `(Y_t - m_t) / sigma_t` for H_2, H_4, H_6 and x + x^2.
    /// Exit 2 when a verdict fails under the desk or full profile.
    BerrySuite {
        /// smoke, desk or full.
        #[arg(long, default_value = "smoke")]
        profile: String,
        #[command(flatten)]
        common: Common,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match execute(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn output_dir(common: &Common, default: &str) -> PathBuf {
    common.out.clone().unwrap_or_else(|| PathBuf::from(default))
}

fn set_workers(common: &Common) {
    if let Some(n) = common.workers {
        // a global pool may only be configured once per process
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(name), contents)?;
    Ok(())
}

fn execute(cmd: Command) -> Result<u8> {
    match cmd {
        Command::SpectralCheck { measure, d, rank } => {
            let mu = SpectralMeasure::from_id(&measure)?;
            let cond = spectral_condition(&mu, d, rank)?;
            let (finite, value, warning) = match &cond {
                SpectralCondition::Finite { value, warning } => (true, Some(*value), warning.clone()),
                SpectralCondition::Divergent => (false, None, None),
            };
            println!(
                "{}",
                json!({ "measure": measure, "d": d, "rank": rank, "finite": finite, "value": value, "warning": warning })
            );
            Ok(if finite { 0 } else { 2 })
        }
        Command::Hermite {
            observable,
            q_max,
            measure,
            d,
        } => {
            let e = Observable::from_id(&observable)?.expansion(q_max)?;
            let mu = SpectralMeasure::from_id(&measure)?;
            let case = match e.rank {
                Some(r) => Some(classify_case(&e, mu.covariance_summable(d, r))?),
                None => None,
            };
            let rate = case
                .as_ref()
                .and_then(|c| predicted_rate(c, d, mu.decay_exponent(d)).ok());
            let out = json!({ "observable": observable, "expansion": e, "case": case, "rate": rate });
            println!("{}", serde_json::to_string_pretty(&out)?);
            Ok(0)
        }
        Command::Covariance {
            measure,
            d,
            r_max,
            step,
            common,
        } => {
            if !(step > 0.0 && r_max >= 0.0) {
                return Err(Error::InvalidArgument("need step > 0 and r_max >= 0".into()));
            }
            let cov = Covariance::new(SpectralMeasure::from_id(&measure)?, d)?;
            let mut csv = String::from("r,rho\n");
            let n = (r_max / step).round() as usize;
            for i in 0..=n {
                let r = i as f64 * step;
                csv.push_str(&format!("{r},{:e}\n", cov.try_rho(r)?));
            }
            emit(&common, "covariance.csv", &csv)
        }
        Command::VarianceTable {
            measure,
            observable,
            domain,
            t,
            q_max,
            common,
        } => {
            let dom = DomainSpec::from_id(&domain)?;
            let cov =
                Covariance::new(SpectralMeasure::from_id(&measure)?, dom.d)?.tabulate(dom.diameter() * t + 1.0)?;
            let e = Observable::from_id(&observable)?.expansion(q_max)?;
            let table = total_variance(&e, &cov, &dom, t)?;
            if let Some(dir) = &common.out {
                write(dir, "variance_table.json", &(table.to_json()? + "\n"))?;
            }
            emit(&common, "variance_table.csv", &table.to_csv())
        }
        Command::Rank1Variance { measure, domain, t } => {
            let mu = SpectralMeasure::from_id(&measure)?;
            let dom = DomainSpec::from_id(&domain)?;
            println!("t,var_rank_one");
            for t in t {
                println!("{t},{:e}", rank_one_variance(&mu, &dom, t)?);
            }
            Ok(0)
        }
        Command::Contraction {
            measure,
            domain,
            q,
            r,
            t,
            n_mc,
            common,
        } => {
            set_workers(&common);
            let dom = DomainSpec::from_id(&domain)?;
            let t_max = t.iter().cloned().fold(0.0, f64::max);
            let cov = Covariance::new(SpectralMeasure::from_id(&measure)?, dom.d)?
                .tabulate(3.0 * dom.diameter() * t_max + 1.0)?;
            let seed = common.seed.unwrap_or(1);
            let mut csv = String::from("t,estimate,std_error\n");
            for &tv in &t {
                let est = contraction_ratio(&cov as &dyn RadialCovariance, &dom, q, r, tv, n_mc, seed)?;
                csv.push_str(&format!("{tv},{:e},{:e}\n", est.estimate, est.std_error));
            }
            emit(&common, "contraction.csv", &csv)
        }
        Command::Run { config, common } => {
            let mut cfg = ExperimentConfig::from_file(&config)?;
            if let Some(s) = common.seed {
                cfg.seed = s;
            }
            if let Some(w) = common.workers {
                cfg.workers = w;
            }
            let reports = run_suite(&cfg)?;
            let out = output_dir(&common, &format!("out/{}", cfg.name));
            write_outputs(&cfg, &reports, &out)?;
            eprintln!("wrote {}", out.display());
            Ok(0)
        }
        Command::BerrySuite { profile, common } => {
            let profile: Profile = profile.parse()?;
            let mut cfg = berry_suite_config(profile, common.seed.unwrap_or(1));
            if let Some(w) = common.workers {
                cfg.workers = w;
            }
            let reports = run_suite(&cfg)?;
            let out = output_dir(&common, "out/berry-suite");
            write_outputs(&cfg, &reports, &out)?;
            let verdicts = suite_verdicts(&reports);
            let table = verdicts_csv(&verdicts);
            write(&out, "verdicts.csv", &table)?;
            print!("{table}");
            let failed = verdicts
                .iter()
                .any(|v| v.rate_pass == Some(false) || v.ks_pass == Some(false));
            Ok(if profile != Profile::Smoke && failed { 2 } else { 0 })
        }
    }
}

/// Prints `contents`, and also writes it under `--out` when given.
fn emit(common: &Common, name: &str, contents: &str) -> Result<u8> {
    if let Some(dir) = &common.out {
        write(dir, name, contents)?;
    }
    print!("{contents}");
    Ok(0)
}
