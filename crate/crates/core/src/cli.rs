//! Subcommand dispatch and machine-readable output for the laboratory.
//!
//! Every emitted file opens with a manifest header (tool version,
//! subcommand, canonical config echo) so results are reproducible from the
//! artifact alone. Emission is deterministic: identical configs produce
//! bit-identical files; wall-clock timestamps go to stderr only.
//!
//! Exit codes: 0 success, 2 validation/parse errors, 3 numerical failures
//! (including inequality-margin violations found by `check`).

use crate::blowup;
use crate::config::{f17, RunConfig};
use crate::diagnostics;
use crate::error::{Error, Result};
use crate::exponents::{self, ProblemPoint};
use crate::rescale::build_rescaling;
use crate::temporal_mode;
use crate::wave_solver::{self, RunMode};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub version: &'static str,
    pub subcommand: String,
    pub config: Option<String>,
    pub outputs: Vec<String>,
    /// Logged to stderr, never serialized: files stay bit-identical
    /// across reruns of the same configuration.
    #[serde(skip)]
    pub timestamp: std::time::SystemTime,
}

impl RunManifest {
    fn new(subcommand: &str, config: Option<&RunConfig>) -> Self {
        Self {
            version: env!("CARGO_PKG_VERSION"),
            subcommand: subcommand.to_string(),
            config: config.map(|c| c.emit()),
            outputs: Vec::new(),
            timestamp: std::time::SystemTime::now(),
        }
    }

    fn csv_header(&self, columns: &str) -> String {
        let mut out = format!(
            "# blowuplab {}\n# subcommand: {}\n",
            self.version, self.subcommand
        );
        if let Some(cfg) = &self.config {
            out.push_str(&format!(
                "# config: {}\n",
                cfg.trim().replace('\n', "; ")
            ));
        }
        out.push_str(columns);
        out.push('\n');
        out
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "blowuplab",
    version,
    about = "Lifespan laboratory for semilinear damped wave equations"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum ModeArg {
    Original,
    Transformed,
}

impl From<ModeArg> for RunMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Original => RunMode::Original,
            ModeArg::Transformed => RunMode::Transformed,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum EngineArg {
    Pde,
    Ode,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Critical exponents and regime classification as CSV.
    Exponents {
        #[arg(long, default_value_t = 3)]
        dim: usize,
        /// Classify a (q, p) grid instead of printing the two exponents.
        #[arg(long)]
        grid: bool,
        #[arg(long, default_value_t = 50)]
        resolution: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Regime-boundary polylines as CSV for plotting.
    Regions {
        #[arg(long, default_value_t = 3)]
        dim: usize,
        #[arg(long, default_value_t = 64)]
        resolution: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Dump the time-rescaling tables (t, m, h) and (s, eta, m_tilde).
    Rescale {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "rescale")]
        out_prefix: String,
    },
    /// Dump the radial eigenmode (r, phi, envelope ratio).
    Eigenmode {
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        #[arg(long, default_value_t = 3)]
        dim: usize,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        r_max: Option<f64>,
        #[arg(long, default_value_t = 1e-3)]
        h: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Dump the decaying temporal mode (t, phi, nu, phi·e^{lambda·eta}).
    Mode {
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        tmax: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// One solver run with blow-up detection and refinement cross-check.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum, default_value_t = ModeArg::Original)]
        mode: ModeArg,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write a time-series CSV (functional trace in transformed
        /// mode, sup-norm trace otherwise).
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// ε-sweep with a log-log lifespan fit.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum)]
        mode: EngineArg,
        #[arg(long)]
        eps_start: f64,
        #[arg(long)]
        eps_factor: f64,
        #[arg(long)]
        eps_count: usize,
        #[arg(long, value_enum, default_value_t = ModeArg::Original)]
        run_mode: ModeArg,
        #[arg(long)]
        out: PathBuf,
    },
    /// Kato ODE blow-up times (closed form and numeric march).
    Kato {
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long, default_value_t = 0.0)]
        a: f64,
        #[arg(long, default_value_t = 1.0)]
        kappa: f64,
        #[arg(long)]
        eps: f64,
        /// Solve the second-order form F'' = κ|F|^q(1+t)^{-decay} instead.
        #[arg(long)]
        second_order: bool,
        #[arg(long, default_value_t = 2.0)]
        q: f64,
        #[arg(long, default_value_t = 0.0)]
        decay: f64,
    },
    /// Run the inequality suite along a transformed-mode run.
    Check {
        #[arg(long)]
        config: PathBuf,
    },
}

/// Parse argv-style arguments and execute; returns the process exit code.
pub fn dispatch<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // clap prints its own message; --help/--version are successes
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.cmd) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn load_config(path: Option<&Path>) -> Result<RunConfig> {
    match path {
        Some(p) => RunConfig::parse_file(p),
        None => Ok(RunConfig::default()),
    }
}

fn write_output(path: Option<&Path>, content: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, content)?,
        None => print!("{content}"),
    }
    Ok(())
}

fn execute(cmd: Cmd) -> Result<()> {
    match cmd {
        Cmd::Exponents {
            dim,
            grid,
            resolution,
            out,
        } => {
            let manifest = RunManifest::new("exponents", None);
            let mut body = String::new();
            if grid {
                body.push_str(&manifest.csv_header("q,p,regime,alpha,log_exponent,formula"));
                for i in 0..resolution {
                    for j in 0..resolution {
                        let q = 1.0 + (i as f64 + 0.5) * 5.0 / resolution as f64;
                        let p = 1.0 + (j as f64 + 0.5) * 5.0 / resolution as f64;
                        let v = exponents::classify_region(&ProblemPoint {
                            n: dim,
                            p,
                            q,
                            c1: 1.0,
                            c2: 1.0,
                            u1_nontrivial: true,
                        })?;
                        body.push_str(&format!(
                            "{},{},{:?},{},{},{:?}\n",
                            f17(q),
                            f17(p),
                            v.regime,
                            v.alpha.map(f17).unwrap_or_default(),
                            v.log_exponent.map(f17).unwrap_or_default(),
                            v.formula
                        ));
                    }
                }
            } else {
                body.push_str(&manifest.csv_header("name,value"));
                body.push_str(&format!("p_S,{}\n", f17(exponents::strauss_exponent(dim)?)));
                body.push_str(&format!("p_G,{}\n", f17(exponents::glassey_exponent(dim)?)));
            }
            write_output(out.as_deref(), &body)
        }
        Cmd::Regions {
            dim,
            resolution,
            out,
        } => {
            let manifest = RunManifest::new("regions", None);
            let curves = exponents::region_boundary_polylines(dim, resolution)?;
            let mut body = manifest.csv_header("label,q,p");
            for c in &curves {
                for (q, p) in &c.points {
                    body.push_str(&format!("{},{},{}\n", c.label, f17(*q), f17(*p)));
                }
            }
            write_output(out.as_deref(), &body)
        }
        Cmd::Rescale { config, out_prefix } => {
            let cfg = load_config(config.as_deref())?;
            let damping = cfg.damping_profile()?;
            let resc = build_rescaling(damping, cfg.tmax.max(10.0), 1e-9)?;
            let manifest = RunManifest::new("rescale", Some(&cfg));
            let samples = 512;
            let mut fwd = manifest.csv_header("t,m,h");
            for i in 0..=samples {
                let t = cfg.tmax.max(10.0) * i as f64 / samples as f64;
                fwd.push_str(&format!(
                    "{},{},{}\n",
                    f17(t),
                    f17(damping.m(t)),
                    f17(resc.h(t))
                ));
            }
            std::fs::write(format!("{out_prefix}_tm.csv"), fwd)?;
            let s_hi = resc.s_max();
            let mut inv = manifest.csv_header("s,eta,m_tilde");
            for i in 0..=samples {
                let s = s_hi * i as f64 / samples as f64;
                inv.push_str(&format!(
                    "{},{},{}\n",
                    f17(s),
                    f17(resc.eta(s)),
                    f17(resc.m_tilde(s))
                ));
            }
            std::fs::write(format!("{out_prefix}_eta.csv"), inv)?;
            eprintln!("wrote {out_prefix}_tm.csv and {out_prefix}_eta.csv");
            Ok(())
        }
        Cmd::Eigenmode {
            lambda,
            dim,
            config,
            r_max,
            h,
            out,
        } => {
            let mut cfg = load_config(config.as_deref())?;
            cfg.dim = dim;
            let metric = cfg.metric_profile()?;
            let r_hi = r_max.unwrap_or(20.0f64.max(10.0 / lambda));
            let mode = crate::eigenmode::solve_eigenmode(&metric, lambda, dim, r_hi, h)?;
            let rt = crate::eigenmode::geodesic_radii(&metric, &mode.r)?;
            let manifest = RunManifest::new("eigenmode", Some(&cfg));
            let mut body = manifest.csv_header("r,phi,envelope_ratio");
            let half = (dim as f64 - 1.0) / 2.0;
            for j in 0..mode.r.len() {
                let lr = lambda * mode.r[j];
                let ratio = mode.phi[j]
                    * (1.0 + lr * lr).powf(0.5 * half)
                    * (-lambda * rt[j]).exp();
                body.push_str(&format!(
                    "{},{},{}\n",
                    f17(mode.r[j]),
                    f17(mode.phi[j]),
                    f17(ratio)
                ));
            }
            write_output(out.as_deref(), &body)
        }
        Cmd::Mode {
            lambda,
            config,
            tmax,
            out,
        } => {
            let cfg = load_config(config.as_deref())?;
            let t_hi = tmax.unwrap_or(cfg.tmax);
            let resc = build_rescaling(cfg.damping_profile()?, t_hi * 1.1 + 10.0, 1e-9)?;
            let mode = temporal_mode::solve_decaying_mode(&resc, lambda, t_hi)?;
            let manifest = RunManifest::new("mode", Some(&cfg));
            let mut body = manifest.csv_header("t,phi,nu,phi_exp_lambda_eta");
            let stride = (mode.t.len() / 2000).max(1);
            for i in (0..mode.t.len()).step_by(stride) {
                let ratio = (mode.ln_phi[i] + lambda * resc.eta(mode.t[i])).exp();
                body.push_str(&format!(
                    "{},{},{},{}\n",
                    f17(mode.t[i]),
                    f17(mode.phi[i]),
                    f17(mode.nu[i]),
                    f17(ratio)
                ));
            }
            write_output(out.as_deref(), &body)
        }
        Cmd::Run {
            config,
            mode,
            out,
            trace,
        } => {
            let cfg = RunConfig::parse_file(&config)?;
            let solver_cfg = cfg.solver_config()?;
            let run_mode: RunMode = mode.into();
            let report = wave_solver::run_with_consistency(&solver_cfg, cfg.eps, run_mode)?;
            let manifest = RunManifest::new("run", Some(&cfg));
            if let Some(trace_path) = trace {
                if run_mode == RunMode::Transformed {
                    let tr = diagnostics::trace_run(&solver_cfg, cfg.eps, cfg.lambda)?;
                    let mut body = manifest
                        .csv_header("t,sup_u,sup_v,F,G,H,I,F_plain,G_tilde");
                    for r in &tr.rows {
                        body.push_str(&format!(
                            "{},{},{},{},{},{},{},{},{}\n",
                            f17(r.t),
                            f17(r.sup_u),
                            f17(r.sup_v),
                            f17(r.f),
                            f17(r.g),
                            f17(r.h_fn),
                            f17(r.i_fn),
                            f17(r.f_plain),
                            f17(r.g_tilde)
                        ));
                    }
                    std::fs::write(&trace_path, body)?;
                } else {
                    let mut body = manifest.csv_header("t,sup_u,sup_v");
                    for (t, su, sv) in &report.sup_trace {
                        body.push_str(&format!("{},{},{}\n", f17(*t), f17(*su), f17(*sv)));
                    }
                    std::fs::write(&trace_path, body)?;
                }
            }
            let doc = serde_json::json!({
                "manifest": manifest,
                "config": cfg.emit(),
                "report": report,
            });
            write_output(out.as_deref(), &format!("{}\n", serde_json::to_string_pretty(&doc)?))
        }
        Cmd::Sweep {
            config,
            mode,
            eps_start,
            eps_factor,
            eps_count,
            run_mode,
            out,
        } => {
            let cfg = RunConfig::parse_file(&config)?;
            if !(eps_factor > 0.0) || eps_factor == 1.0 {
                return Err(Error::invalid("eps_factor must be positive and != 1"));
            }
            let eps_list: Vec<f64> = (0..eps_count)
                .map(|i| eps_start * eps_factor.powi(i as i32))
                .collect();
            let fit = match mode {
                EngineArg::Ode => blowup::sweep_ode(cfg.dim, cfg.p, 1.0, &eps_list)?,
                EngineArg::Pde => {
                    blowup::sweep_pde(&cfg.solver_config()?, &eps_list, run_mode.into())?
                }
            };
            let manifest = RunManifest::new("sweep", Some(&cfg));
            let mut body = manifest.csv_header("eps,T,ln_T,consistent");
            for pt in &fit.points {
                body.push_str(&format!(
                    "{},{},{},{}\n",
                    f17(pt.eps),
                    f17(pt.t),
                    f17(pt.ln_t),
                    pt.consistent
                ));
            }
            std::fs::write(&out, body)?;
            let summary = serde_json::json!({
                "manifest": manifest,
                "slope": fit.slope,
                "intercept": fit.intercept,
                "r2": fit.r2,
                "predicted_alpha": fit.predicted_alpha,
                "regime": fit.regime,
                "log_law": fit.log_law,
                "engine": fit.engine,
            });
            let summary_path = out.with_extension("summary.json");
            std::fs::write(&summary_path, serde_json::to_string_pretty(&summary)?)?;
            println!("{}", serde_json::to_string(&summary)?);
            Ok(())
        }
        Cmd::Kato {
            p,
            a,
            kappa,
            eps,
            second_order,
            q,
            decay,
        } => {
            let doc = if second_order {
                let prob = blowup::SecondOrderProblem {
                    q,
                    decay,
                    kappa,
                    f0: eps,
                    f1: eps,
                    pump: 0.0,
                    pump_decay: 0.0,
                };
                let t = blowup::second_order_blowup_time(&prob, 1e9)?;
                serde_json::json!({"form": "second_order", "q": q, "decay": decay,
                                   "kappa": kappa, "eps": eps, "t": t})
            } else {
                let closed = blowup::first_order_blowup_time(p, a, kappa, eps)?;
                serde_json::json!({"form": "first_order", "p": p, "a": a,
                                   "kappa": kappa, "eps": eps,
                                   "t": closed.t, "ln_t": closed.ln_t,
                                   "log_case": closed.log_case})
            };
            println!("{}", serde_json::to_string_pretty(&doc)?);
            Ok(())
        }
        Cmd::Check { config } => {
            let cfg = RunConfig::parse_file(&config)?;
            let solver_cfg = cfg.solver_config()?;
            let trace = diagnostics::trace_run(&solver_cfg, cfg.eps, cfg.lambda)?;
            let rep = diagnostics::check_inequalities(&trace, cfg.dim, cfg.p, cfg.q);
            let t0_res = diagnostics::t0_identity_residual(&trace);
            let mut ok = t0_res.abs() < 1e-12;
            if cfg.c1 > 0.0 {
                ok &= rep.eq920_margin >= -rep.tol
                    && rep.f_min >= -rep.tol
                    && rep.g_min >= -rep.tol
                    && rep.i_le_f_margin >= -rep.tol
                    && rep.kato_kappa > 0.0;
            }
            if cfg.c1 > 0.0 && cfg.c2 > 0.0 {
                ok &= rep.f_plain_dd_min >= -rep.tol
                    && rep.ode1_kappa > 0.0
                    && rep.g_tilde_floor > 0.0;
            }
            let doc = serde_json::json!({
                "manifest": RunManifest::new("check", Some(&cfg)),
                "blown_up": trace.blown_up,
                "t0": trace.t0,
                "t0_identity_residual": t0_res,
                "margins": {
                    "eq920": rep.eq920_margin,
                    "f_min": rep.f_min,
                    "g_min": rep.g_min,
                    "i_le_f": rep.i_le_f_margin,
                    "kato_kappa": rep.kato_kappa,
                    "f_plain_dd_min": rep.f_plain_dd_min,
                    "ode1_kappa": rep.ode1_kappa,
                    "g_tilde_floor": rep.g_tilde_floor,
                    "tol": rep.tol,
                },
                "pass": ok,
            });
            println!("{}", serde_json::to_string_pretty(&doc)?);
            if ok {
                Ok(())
            } else {
                Err(Error::ToleranceNotMet {
                    residual: -rep.eq920_margin.min(rep.f_min).min(rep.g_min),
                    tol: rep.tol,
                })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_subcommand_exits_2() {
        assert_eq!(dispatch(["blowuplab", "frobnicate"]), 2);
    }

    #[test]
    fn exponents_exits_0() {
        assert_eq!(dispatch(["blowuplab", "exponents", "--dim", "3"]), 0);
    }

    #[test]
    fn exponents_rejects_dim_1() {
        assert_eq!(dispatch(["blowuplab", "exponents", "--dim", "1"]), 2);
    }

    #[test]
    fn kato_first_order_runs() {
        assert_eq!(
            dispatch(["blowuplab", "kato", "--p", "2", "--a", "0", "--eps", "0.1"]),
            0
        );
    }

    #[test]
    fn regions_to_file_and_bit_identical() {
        let dir = tempfile::tempdir().unwrap();
        let p1 = dir.path().join("a.csv");
        let p2 = dir.path().join("b.csv");
        assert_eq!(
            dispatch([
                "blowuplab",
                "regions",
                "--dim",
                "3",
                "--out",
                p1.to_str().unwrap()
            ]),
            0
        );
        assert_eq!(
            dispatch([
                "blowuplab",
                "regions",
                "--dim",
                "3",
                "--out",
                p2.to_str().unwrap()
            ]),
            0
        );
        let a = std::fs::read(&p1).unwrap();
        let b = std::fs::read(&p2).unwrap();
        assert!(!a.is_empty());
        assert_eq!(a, b, "identical invocations must emit identical bytes");
    }

    #[test]
    fn exponents_table_contains_known_values() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.csv");
        assert_eq!(
            dispatch([
                "blowuplab",
                "exponents",
                "--dim",
                "3",
                "--out",
                p.to_str().unwrap()
            ]),
            0
        );
        let text = std::fs::read_to_string(&p).unwrap();
        assert!(text.contains("p_S,2.4142135623730949e0"));
        assert!(text.contains("p_G,2.0000000000000000e0"));
    }

    #[test]
    fn ode_sweep_writes_csv_and_summary() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("s.cfg");
        std::fs::write(&cfg, "dim = 3\np = 1.5\nc1 = 1\nc2 = 0\n").unwrap();
        let out = dir.path().join("sweep.csv");
        assert_eq!(
            dispatch([
                "blowuplab",
                "sweep",
                "--config",
                cfg.to_str().unwrap(),
                "--mode",
                "ode",
                "--eps-start",
                "1e-2",
                "--eps-factor",
                "0.1",
                "--eps-count",
                "5",
                "--out",
                out.to_str().unwrap(),
            ]),
            0
        );
        let text = std::fs::read_to_string(&out).unwrap();
        assert!(text.contains("eps,T,ln_T,consistent"));
        let summary = std::fs::read_to_string(out.with_extension("summary.json")).unwrap();
        let v: serde_json::Value = serde_json::from_str(&summary).unwrap();
        assert!((v["slope"].as_f64().unwrap() - 1.0).abs() < 1e-3);
    }

    #[test]
    fn bad_config_exits_2() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.cfg");
        std::fs::write(&p, "damping.mu = 1\ndamping.beta = 0.9\n").unwrap();
        assert_eq!(
            dispatch(["blowuplab", "check", "--config", p.to_str().unwrap()]),
            2
        );
    }
}
