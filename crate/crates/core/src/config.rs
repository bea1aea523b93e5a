//! Run configuration: flat key = value text with [metric], [damping],
//! [data] and [solver] sections.
//!
//! Dotted keys (`damping.beta = 2`) are accepted anywhere and mean the same
//! as the sectioned form. Parsing validates eagerly — a non-integrable
//! damping or an amplitude outside the admissible range fails here, not
//! deep inside a run. Floats are emitted with 17 significant digits so that
//! parse(emit(config)) reproduces the configuration bit for bit.

use crate::error::{Error, Result};
use crate::metric::{MetricFamily, MetricProfile};
use crate::rescale::DampingProfile;
use crate::wave_solver::{DataProfile, SolverConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub dim: usize,
    pub p: f64,
    pub q: f64,
    pub c1: f64,
    pub c2: f64,
    pub eps: f64,
    pub h: f64,
    pub cfl: f64,
    pub tmax: f64,
    pub threshold: f64,
    /// Test-function frequency for the diagnostics subcommands.
    pub lambda: f64,
    pub metric_family: MetricFamily,
    pub metric_a: f64,
    pub metric_rho: f64,
    pub metric_alpha: f64,
    pub damping_mu: f64,
    pub damping_beta: f64,
    pub data_r0: f64,
    pub data_u0_amp: f64,
    pub data_u1_amp: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            dim: 3,
            p: 2.0,
            q: 2.0,
            c1: 1.0,
            c2: 0.0,
            eps: 0.1,
            h: 0.05,
            cfl: 0.5,
            tmax: 10.0,
            threshold: 1e8,
            lambda: 1.0,
            metric_family: MetricFamily::Flat,
            metric_a: 0.0,
            metric_rho: 1.0,
            metric_alpha: 1.0,
            damping_mu: 0.0,
            damping_beta: 2.0,
            data_r0: 1.0,
            data_u0_amp: 1.0,
            data_u1_amp: 1.0,
        }
    }
}

/// 17 significant digits, enough to reproduce any f64 exactly.
pub fn f17(x: f64) -> String {
    format!("{x:.16e}")
}

impl RunConfig {
    pub fn parse_str(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        let mut section = String::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = match raw.find('#') {
                Some(i) => &raw[..i],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            if line.starts_with('[') {
                if !line.ends_with(']') {
                    return Err(Error::ParseError {
                        line: line_no,
                        message: format!("unterminated section header {line:?}"),
                    });
                }
                section = line[1..line.len() - 1].trim().to_lowercase();
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::ParseError {
                    line: line_no,
                    message: format!("expected key = value, got {line:?}"),
                });
            };
            let key = key.trim().to_lowercase();
            let value = value.trim();
            let full_key = if key.contains('.') || section.is_empty() || section == "solver" {
                key
            } else {
                format!("{section}.{key}")
            };
            cfg.set(&full_key, value, line_no)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn parse_file(path: &std::path::Path) -> Result<Self> {
        Self::parse_str(&std::fs::read_to_string(path)?)
    }

    fn set(&mut self, key: &str, value: &str, line: usize) -> Result<()> {
        let fail = |message: String| Error::ParseError { line, message };
        let num = |v: &str| -> Result<f64> {
            v.parse::<f64>()
                .map_err(|_| fail(format!("expected a number, got {v:?}")))
        };
        match key {
            "dim" => {
                self.dim = value
                    .parse::<usize>()
                    .map_err(|_| fail(format!("expected an integer, got {value:?}")))?
            }
            "p" => self.p = num(value)?,
            "q" => self.q = num(value)?,
            "c1" => self.c1 = num(value)?,
            "c2" => self.c2 = num(value)?,
            "eps" => self.eps = num(value)?,
            "h" => self.h = num(value)?,
            "cfl" => self.cfl = num(value)?,
            "tmax" => self.tmax = num(value)?,
            "threshold" => self.threshold = num(value)?,
            "lambda" => self.lambda = num(value)?,
            "metric.family" => {
                self.metric_family = match value.to_lowercase().as_str() {
                    "flat" => MetricFamily::Flat,
                    "power" | "power_perturbation" => MetricFamily::PowerPerturbation,
                    "exponential" | "exponential_perturbation" => {
                        MetricFamily::ExponentialPerturbation
                    }
                    other => {
                        return Err(fail(format!("unknown metric family {other:?}")));
                    }
                }
            }
            "metric.a" => self.metric_a = num(value)?,
            "metric.rho" => self.metric_rho = num(value)?,
            "metric.alpha" => self.metric_alpha = num(value)?,
            "damping.mu" => self.damping_mu = num(value)?,
            "damping.beta" => self.damping_beta = num(value)?,
            "data.r0" => self.data_r0 = num(value)?,
            "data.u0_amp" => self.data_u0_amp = num(value)?,
            "data.u1_amp" => self.data_u1_amp = num(value)?,
            other => {
                return Err(fail(format!("unknown key {other:?}")));
            }
        }
        Ok(())
    }

    /// Eager validation through the owning modules' constructors.
    pub fn validate(&self) -> Result<()> {
        self.metric_profile()?;
        self.damping_profile()?;
        self.solver_config()?.validate()?;
        if !(self.lambda > 0.0) {
            return Err(Error::ValidationError("lambda must be > 0".into()));
        }
        Ok(())
    }

    pub fn metric_profile(&self) -> Result<MetricProfile> {
        let rate = match self.metric_family {
            MetricFamily::ExponentialPerturbation => self.metric_alpha,
            _ => self.metric_rho,
        };
        MetricProfile::new(self.metric_family, self.metric_a, rate, self.dim)
    }

    pub fn damping_profile(&self) -> Result<DampingProfile> {
        if self.damping_mu == 0.0 {
            Ok(DampingProfile::zero())
        } else {
            DampingProfile::scattering_power(self.damping_mu, self.damping_beta)
        }
    }

    pub fn solver_config(&self) -> Result<SolverConfig> {
        Ok(SolverConfig {
            n: self.dim,
            p: self.p,
            q: self.q,
            c1: self.c1,
            c2: self.c2,
            metric: self.metric_profile()?,
            damping: self.damping_profile()?,
            h: self.h,
            cfl: self.cfl,
            threshold: self.threshold,
            t_max: self.tmax,
            data: DataProfile {
                r0: self.data_r0,
                u0_amp: self.data_u0_amp,
                u1_amp: self.data_u1_amp,
            },
            r_max: None,
        })
    }

    /// Canonical text form; stable ordering, 17 significant digits.
    pub fn emit(&self) -> String {
        let family = match self.metric_family {
            MetricFamily::Flat => "flat",
            MetricFamily::PowerPerturbation => "power",
            MetricFamily::ExponentialPerturbation => "exponential",
        };
        format!(
            "dim = {}\np = {}\nq = {}\nc1 = {}\nc2 = {}\neps = {}\nh = {}\ncfl = {}\ntmax = {}\nthreshold = {}\nlambda = {}\n\n[metric]\nfamily = {}\na = {}\nrho = {}\nalpha = {}\n\n[damping]\nmu = {}\nbeta = {}\n\n[data]\nr0 = {}\nu0_amp = {}\nu1_amp = {}\n",
            self.dim,
            f17(self.p),
            f17(self.q),
            f17(self.c1),
            f17(self.c2),
            f17(self.eps),
            f17(self.h),
            f17(self.cfl),
            f17(self.tmax),
            f17(self.threshold),
            f17(self.lambda),
            family,
            f17(self.metric_a),
            f17(self.metric_rho),
            f17(self.metric_alpha),
            f17(self.damping_mu),
            f17(self.damping_beta),
            f17(self.data_r0),
            f17(self.data_u0_amp),
            f17(self.data_u1_amp),
        )
    }
}
