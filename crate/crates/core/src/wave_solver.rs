//! Radial finite-difference solver for
//!     u_tt − Δ_g u + b(t)u_t = c₁|u_t|^p + c₂|u|^q        (original form)
//!     u_tt − m̃²(t)Δ_g u = c₁m̃^{2-p}|u_t|^p + c₂m̃²|u|^q   (transformed form)
//! with compactly supported radial data u(0) = εu₀, u_t(0) = εu₁.
//!
//! Scheme: cell-centered grid r_j = (j+1/2)h (no node at the coordinate
//! singularity), staggered leapfrog in time with velocity at half steps.
//! The Laplacian is the flux form
//!     L u|_j = (1/V_j)·[ W(r_{j+1})·(u_{j+1}−u_j)/h − W(r_j)·(u_j−u_{j-1})/h ]
//! with face weight W = r^{n-1}/K and exactly integrated cell volumes
//! V_j = ∫ K r^{n-1} dr. The face weight vanishes at r = 0, which encodes
//! the even-symmetry closure. The outer boundary never acts: the domain is
//! sized from the propagation cone and the support index advances at most
//! one cell per step, so outer values stay identically zero.
//!
//! Blow-up is declared when sup(|u|, |v|) crosses the threshold; the
//! detected time is rechecked at h/2 and flagged inconsistent when it moves
//! by more than 5%.

use crate::error::{Error, Result};
use crate::metric::MetricProfile;
use crate::rescale::{build_rescaling, DampingProfile, TimeRescaling};
use serde::Serialize;

/// Support-radius slack tolerated by the finite-speed check, in cells.
pub const SUPPORT_MARGIN_CELLS: f64 = 2.0;
/// Cells with |u| below this level do not count as support.
pub const SUPPORT_LEVEL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RunMode {
    Original,
    Transformed,
}

/// Compactly supported polynomial bump data (1 − (r/R₀)²)₊⁴ per component.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DataProfile {
    pub r0: f64,
    pub u0_amp: f64,
    pub u1_amp: f64,
}

impl Default for DataProfile {
    fn default() -> Self {
        Self {
            r0: 1.0,
            u0_amp: 1.0,
            u1_amp: 1.0,
        }
    }
}

impl DataProfile {
    pub fn bump(&self, r: f64) -> f64 {
        let x = r / self.r0;
        if x >= 1.0 {
            0.0
        } else {
            let b = 1.0 - x * x;
            b * b * b * b
        }
    }
    pub fn u0(&self, r: f64) -> f64 {
        self.u0_amp * self.bump(r)
    }
    pub fn u1(&self, r: f64) -> f64 {
        self.u1_amp * self.bump(r)
    }
}

#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub n: usize,
    pub p: f64,
    pub q: f64,
    pub c1: f64,
    pub c2: f64,
    pub metric: MetricProfile,
    pub damping: DampingProfile,
    pub h: f64,
    /// CFL safety factor σ ∈ (0, 1).
    pub cfl: f64,
    /// Blow-up threshold on sup(|u|, |v|).
    pub threshold: f64,
    /// Horizon in the run's own time variable (s for transformed runs).
    pub t_max: f64,
    pub data: DataProfile,
    /// Domain radius; None sizes it from the propagation cone.
    pub r_max: Option<f64>,
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::invalid("dimension must be >= 2"));
        }
        if !(self.p > 1.0 && self.q > 1.0) {
            return Err(Error::invalid("p and q must be > 1"));
        }
        if self.c1 < 0.0 || self.c2 < 0.0 {
            return Err(Error::invalid("c1, c2 must be >= 0"));
        }
        if !(self.h > 0.0) || !(self.cfl > 0.0 && self.cfl < 1.0) {
            return Err(Error::invalid("need h > 0 and cfl in (0,1)"));
        }
        if !(self.t_max > 0.0) || !(self.threshold > 0.0) {
            return Err(Error::invalid("need t_max > 0 and threshold > 0"));
        }
        if self.data.u0_amp < 0.0 || self.data.u1_amp < 0.0 {
            return Err(Error::invalid(
                "data amplitudes must be nonnegative (negative lobes violate the data assumption)",
            ));
        }
        if !(self.data.r0 > 0.0) {
            return Err(Error::invalid("data support radius must be > 0"));
        }
        Ok(())
    }
}

/// Fixed spatial discretization: centers, face weights, exact cell volumes,
/// geodesic radii.
pub struct Grid {
    pub h: f64,
    pub n: usize,
    pub r: Vec<f64>,
    /// W(r) = r^{n-1}/K at faces r = j·h, j = 0..=J.
    pub w_face: Vec<f64>,
    /// V_j = ∫_{jh}^{(j+1)h} K r^{n-1} dr.
    pub vol: Vec<f64>,
    /// r̃ at cell centers.
    pub rt: Vec<f64>,
}

impl Grid {
    pub fn build(metric: &MetricProfile, n: usize, h: f64, r_max: f64) -> Result<Self> {
        let cells = (r_max / h).ceil() as usize;
        let mut r = Vec::with_capacity(cells);
        let mut w_face = Vec::with_capacity(cells + 1);
        let mut vol = Vec::with_capacity(cells);
        let mut rt = Vec::with_capacity(cells);
        w_face.push(0.0);
        let mut rt_acc = 0.0;
        //5-point Gauss–Legendre per cell is exact to rounding for smooth K
        const GX: [f64; 5] = [
            -0.906_179_845_938_663_9,
            -0.538_469_310_105_683_1,
            0.0,
            0.538_469_310_105_683_1,
            0.906_179_845_938_663_9,
        ];
        #[allow(clippy::excessive_precision)]
        const GW: [f64; 5] = [
            0.236_926_885_056_189_08,
            0.478_628_670_499_366_47,
            0.568_888_888_888_888_9,
            0.478_628_670_499_366_47,
            0.236_926_885_056_189_08,
        ];
        for j in 0..cells {
            let a = j as f64 * h;
            let center = a + 0.5 * h;
            r.push(center);
            let face = a + h;
            w_face.push(face.powi(n as i32 - 1) / metric.k(face));
            let mut v = 0.0;
            let mut krdr = 0.0;
            for (x, wgt) in GX.iter().zip(GW.iter()) {
                let rr = center + 0.5 * h * x;
                let k = metric.k(rr);
                v += wgt * k * rr.powi(n as i32 - 1);
                krdr += wgt * k;
            }
            vol.push(0.5 * h * v);
            // r̃ at the center: accumulate to the left face, add half cell
            let mut half = 0.0;
            for (x, wgt) in GX.iter().zip(GW.iter()) {
                let rr = a + 0.25 * h * (1.0 + x);
                half += wgt * metric.k(rr);
            }
            rt.push(rt_acc + 0.25 * h * half);
            rt_acc += 0.5 * h * krdr;
        }
        Ok(Self {
            h,
            n,
            r,
            w_face,
            vol,
            rt,
        })
    }

    pub fn cells(&self) -> usize {
        self.r.len()
    }
}

/// |x|^p with fast paths for the exponents the laboratory sweeps most.
#[inline]
pub fn pow_abs(x: f64, p: f64) -> f64 {
    let a = x.abs();
    if p == 2.0 {
        a * a
    } else if p == 1.5 {
        a * a.sqrt()
    } else {
        a.powf(p)
    }
}

/// Discrete wave state: u at a whole step, v staggered half a step later.
#[derive(Debug, Clone)]
pub struct RadialState {
    pub t: f64,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub support: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct BlowupReport {
    pub blown_up: bool,
    /// Detected lifespan in original time (transformed runs map back via η).
    pub t_num: f64,
    /// Detected time in the run's own variable.
    pub raw_time: f64,
    pub refinement_consistent: Option<bool>,
    pub min_support_margin: f64,
    pub steps: usize,
    pub h: f64,
    pub mode: RunMode,
    /// Decimated (t, sup|u|, sup|v|) trace.
    pub sup_trace: Vec<(f64, f64, f64)>,
}

/// One running simulation; step-by-step driver for `run` and the
/// functional-trace diagnostics.
pub struct Simulation<'a> {
    pub cfg: &'a SolverConfig,
    pub grid: Grid,
    pub mode: RunMode,
    pub eps: f64,
    pub dt: f64,
    pub r1: f64,
    rescaling: Option<&'a TimeRescaling>,
    u: Vec<f64>,
    v: Vec<f64>,
    /// v one half-step further back, for centering the |u_t|^p term.
    v_prev: Vec<f64>,
    support: usize,
    step_index: usize,
    sup_u: f64,
    sup_v: f64,
    min_margin: f64,
}

impl<'a> Simulation<'a> {
    pub fn new(
        cfg: &'a SolverConfig,
        eps: f64,
        mode: RunMode,
        rescaling: Option<&'a TimeRescaling>,
    ) -> Result<Self> {
        cfg.validate()?;
        if !(eps >= 0.0) {
            return Err(Error::invalid("eps must be >= 0"));
        }
        if mode == RunMode::Transformed && rescaling.is_none() && !cfg.damping.is_zero() {
            return Err(Error::invalid(
                "transformed mode with damping needs a rescaling",
            ));
        }
        let delta0 = cfg.metric.ellipticity_bounds();
        let r1 = cfg.metric.geodesic_radius(cfg.data.r0)?;
        let sup_speed = match mode {
            RunMode::Original => 1.0 / delta0,
            RunMode::Transformed => {
                let sup_m = rescaling.map(|r| r.sup_m_tilde()).unwrap_or(1.0);
                sup_m / delta0
            }
        };
        let dt = cfg.cfl * cfg.h / sup_speed;
        // the discrete domain of dependence grows exactly one cell per step,
        // so sizing by step count keeps outer cells identically zero without
        // any support thresholding
        let r_max = cfg.r_max.unwrap_or_else(|| {
            let steps = (cfg.t_max / dt).ceil();
            cfg.data.r0 + (steps + 8.0) * cfg.h
        });
        let cells_needed = (r_max / cfg.h).ceil();
        if cells_needed > 5e7 {
            return Err(Error::invalid(format!(
                "domain needs {cells_needed:.0} cells; shrink t_max or coarsen h"
            )));
        }
        let grid = Grid::build(&cfg.metric, cfg.n, cfg.h, r_max)?;

        let u: Vec<f64> = grid.r.iter().map(|&r| eps * cfg.data.u0(r)).collect();
        let v: Vec<f64> = grid.r.iter().map(|&r| eps * cfg.data.u1(r)).collect();
        let support = grid
            .r
            .iter()
            .position(|&r| r >= cfg.data.r0)
            .unwrap_or(grid.cells())
            .max(1);

        let v_prev = v.clone();
        let mut sim = Simulation {
            cfg,
            grid,
            mode,
            eps,
            dt,
            r1,
            rescaling,
            u,
            v,
            v_prev,
            support,
            step_index: 0,
            sup_u: 0.0,
            sup_v: 0.0,
            min_margin: f64::INFINITY,
        };
        // staggered start: the stored velocity leads u by −dt/2 (the step
        // advances v across u's time level), so seed v^{-1/2} by a backward
        // half Taylor step: v(−dt/2) = εu₁ − (dt/2)·u_tt(0)
        let accel = sim.acceleration_at(0.0);
        for j in 0..sim.grid.cells() {
            sim.v[j] -= 0.5 * sim.dt * accel[j];
        }
        sim.v_prev.copy_from_slice(&sim.v);
        sim.refresh_sups();
        sim.update_margin();
        Ok(sim)
    }

    fn coefficients_at(&self, t: f64) -> (f64, f64, f64, f64) {
        // (wave speed², c1 weight, c2 weight, damping b)
        match self.mode {
            RunMode::Original => (1.0, self.cfg.c1, self.cfg.c2, self.cfg.damping.b(t)),
            RunMode::Transformed => {
                let m = self
                    .rescaling
                    .map(|r| r.m_tilde(t))
                    .unwrap_or(1.0);
                (
                    m * m,
                    self.cfg.c1 * m.powf(2.0 - self.cfg.p),
                    self.cfg.c2 * m * m,
                    0.0,
                )
            }
        }
    }

    fn acceleration_at(&self, t: f64) -> Vec<f64> {
        let (speed2, w1, w2, b) = self.coefficients_at(t);
        let mut acc = vec![0.0; self.grid.cells()];
        let hi = self.support.min(self.grid.cells() - 1);
        for j in 0..=hi {
            let lap = self.laplacian(j);
            acc[j] = speed2 * lap - b * self.v[j]
                + w1 * pow_abs(self.v[j], self.cfg.p)
                + w2 * pow_abs(self.u[j], self.cfg.q);
        }
        acc
    }

    #[inline]
    fn laplacian(&self, j: usize) -> f64 {
        let h = self.grid.h;
        let left = if j == 0 {
            0.0
        } else {
            self.grid.w_face[j] * (self.u[j] - self.u[j - 1])
        };
        let right = if j + 1 < self.grid.cells() {
            self.grid.w_face[j + 1] * (self.u[j + 1] - self.u[j])
        } else {
            0.0
        };
        (right - left) / (h * self.grid.vol[j])
    }

    pub fn t(&self) -> f64 {
        self.step_index as f64 * self.dt
    }

    pub fn state(&self) -> RadialState {
        RadialState {
            t: self.t(),
            u: self.u.clone(),
            v: self.v.clone(),
            support: self.support,
        }
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    /// Velocity at the half step following `t()` − dt (i.e. v^{n-1/2}).
    pub fn v(&self) -> &[f64] {
        &self.v
    }

    pub fn sups(&self) -> (f64, f64) {
        (self.sup_u, self.sup_v)
    }

    pub fn min_margin(&self) -> f64 {
        self.min_margin
    }

    pub fn support(&self) -> usize {
        self.support
    }

    fn refresh_sups(&mut self) {
        let mut su = 0.0f64;
        let mut sv = 0.0f64;
        for j in 0..=self.support.min(self.grid.cells() - 1) {
            su = su.max(self.u[j].abs());
            sv = sv.max(self.v[j].abs());
        }
        self.sup_u = su;
        self.sup_v = sv;
    }

    /// Support radius in the geodesic coordinate and the cone margin
    /// (η(t) + R₁) − r̃_support (t + R₁ in original mode).
    pub fn support_radius(&self) -> (f64, f64) {
        let mut rt_support = 0.0;
        let hi = self.support.min(self.grid.cells() - 1);
        for j in (0..=hi).rev() {
            if self.u[j].abs() > SUPPORT_LEVEL {
                rt_support = self.grid.rt[j];
                break;
            }
        }
        let t = self.t();
        let frontier = match self.mode {
            RunMode::Original => t + self.r1,
            RunMode::Transformed => {
                self.rescaling.map(|r| r.eta(t)).unwrap_or(t) + self.r1
            }
        };
        (rt_support, frontier - rt_support)
    }

    fn update_margin(&mut self) {
        let (_, margin) = self.support_radius();
        self.min_margin = self.min_margin.min(margin);
    }

    /// One leapfrog step. Damping is handled by the semi-implicit average
    /// (1 + b·dt/2)v⁺ = (1 − b·dt/2)v⁻ + dt·(explicit terms), which solves
    /// for v⁺ exactly; nonlinearities are explicit in v at the previous half
    /// step and u at the whole step.
    pub fn step(&mut self) -> Result<()> {
        let t = self.t();
        let (speed2, w1, w2, b) = self.coefficients_at(t);
        let cells = self.grid.cells();
        if self.support >= cells - 1 {
            return Err(Error::invalid(
                "support reached the outer boundary; enlarge r_max",
            ));
        }
        let h = self.grid.h;
        let hi = self.support;
        let damp_minus = 1.0 - 0.5 * b * self.dt;
        let damp_plus = 1.0 + 0.5 * b * self.dt;

        let mut left_flux = 0.0;
        for j in 0..=hi {
            let right_flux = if j + 1 < cells {
                self.grid.w_face[j + 1] * (self.u[j + 1] - self.u[j])
            } else {
                0.0
            };
            let lap = (right_flux - left_flux) / (h * self.grid.vol[j]);
            left_flux = right_flux;
            // center u_t at the whole step by two-level extrapolation
            let v_old = self.v[j];
            let v_centered = 1.5 * v_old - 0.5 * self.v_prev[j];
            let explicit = speed2 * lap
                + w1 * pow_abs(v_centered, self.cfg.p)
                + w2 * pow_abs(self.u[j], self.cfg.q);
            self.v_prev[j] = v_old;
            self.v[j] = (damp_minus * v_old + self.dt * explicit) / damp_plus;
        }
        for j in 0..=hi {
            self.u[j] += self.dt * self.v[j];
        }
        if self.u[hi].abs() > 0.0 && hi + 1 < cells {
            self.support = hi + 1;
        }
        self.step_index += 1;
        self.refresh_sups();
        if !self.sup_u.is_finite() || !self.sup_v.is_finite() {
            return Err(Error::NaNDetected {
                step: self.step_index,
                t: self.t(),
            });
        }
        self.update_margin();
        Ok(())
    }
}

fn run_once(
    cfg: &SolverConfig,
    eps: f64,
    mode: RunMode,
    rescaling: Option<&TimeRescaling>,
) -> Result<BlowupReport> {
    let mut sim = Simulation::new(cfg, eps, mode, rescaling)?;
    let total_steps = (cfg.t_max / sim.dt).ceil() as usize;
    let trace_stride = (total_steps / 1500).max(1);
    let mut trace = Vec::new();
    let mut blown_up = false;
    let mut raw_time = cfg.t_max;
    for i in 0..total_steps {
        sim.step()?;
        let (su, sv) = sim.sups();
        if i.is_multiple_of(trace_stride) {
            trace.push((sim.t(), su, sv));
        }
        if su.max(sv) > cfg.threshold {
            blown_up = true;
            raw_time = sim.t();
            break;
        }
    }
    let t_num = match mode {
        RunMode::Original => raw_time,
        RunMode::Transformed => rescaling.map(|r| r.eta(raw_time)).unwrap_or(raw_time),
    };
    Ok(BlowupReport {
        blown_up,
        t_num,
        raw_time,
        refinement_consistent: None,
        min_support_margin: sim.min_margin(),
        steps: sim.step_index,
        h: cfg.h,
        mode,
        sup_trace: trace,
    })
}

/// Build the rescaling a run needs (covering the whole cone horizon), or
/// None when the damping is zero and the map is the identity.
pub fn rescaling_for(cfg: &SolverConfig, mode: RunMode) -> Result<Option<TimeRescaling>> {
    if cfg.damping.is_zero() {
        return Ok(None);
    }
    // transformed runs query η up to t_max/δ₁; original damped runs don't
    // need the map at all, but the margin bookkeeping is cheap either way
    let k = cfg.damping.k();
    let delta1 = 1.0f64.min(k).min(1.0 / 1.0f64.max(k)) - crate::metric::DELTA_MARGIN;
    let horizon = match mode {
        RunMode::Original => cfg.t_max * 1.05 + 10.0,
        RunMode::Transformed => cfg.t_max / delta1 * 1.05 + 10.0,
    };
    Ok(Some(build_rescaling(cfg.damping, horizon, 1e-9)?))
}

/// Single run without the refinement cross-check.
pub fn run(cfg: &SolverConfig, eps: f64, mode: RunMode) -> Result<BlowupReport> {
    let rescaling = rescaling_for(cfg, mode)?;
    run_once(cfg, eps, mode, rescaling.as_ref())
}

/// Run at h, rerun at h/2, and flag the blow-up time consistent when the
/// two detections agree within 5%.
pub fn run_with_consistency(cfg: &SolverConfig, eps: f64, mode: RunMode) -> Result<BlowupReport> {
    let rescaling = rescaling_for(cfg, mode)?;
    let mut report = run_once(cfg, eps, mode, rescaling.as_ref())?;
    let mut fine_cfg = cfg.clone();
    fine_cfg.h = cfg.h / 2.0;
    let fine = run_once(&fine_cfg, eps, mode, rescaling.as_ref())?;
    report.refinement_consistent = Some(match (report.blown_up, fine.blown_up) {
        (true, true) => {
            (report.t_num - fine.t_num).abs() / fine.t_num <= 0.05
        }
        (false, false) => true,
        _ => false,
    });
    Ok(report)
}

/// Conserved quadratic form of the linear leapfrog scheme:
/// E = ½‖v‖²_V + ½ D(u_prev, u_next) with the staggered Dirichlet product.
pub fn discrete_energy(grid: &Grid, v: &[f64], u_prev: &[f64], u_next: &[f64]) -> f64 {
    let mut kinetic = 0.0;
    for j in 0..grid.cells() {
        kinetic += grid.vol[j] * v[j] * v[j];
    }
    let mut dirichlet = 0.0;
    let h = grid.h;
    for j in 1..grid.cells() {
        dirichlet += grid.w_face[j] * (u_prev[j] - u_prev[j - 1]) * (u_next[j] - u_next[j - 1]);
    }
    0.5 * kinetic + 0.5 * dirichlet / h
}
