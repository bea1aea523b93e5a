//! Damping removal by time rescaling.
//!
//! For integrable b(t) set
//!     m(t) = exp(∫₀ᵗ b),   s = h(t) = ∫₀ᵗ 1/m,   t = η(s),   m̃(s) = m(η(s)).
//! Then u(η(s), x) solves a wave equation with speed m̃²(s) and no damping
//! term. The defining identities η' = m̃ and m̃' = b(η)·m̃² are exposed for
//! verification. m is monotone for sign-definite damping, so its range — and
//! hence δ₁ with m ∈ [δ₁, 1/δ₁] — comes from the endpoints m(0) = 1 and
//! m(∞) = k = exp(∫₀^∞ b).
//!
//! h is tabulated by cumulative quadrature and inverted with a monotone cubic
//! interpolant; every η query is Newton-polished through h (h' = 1/m), so the
//! inversion residual stays at the requested tolerance and the interpolant
//! only supplies starting guesses.

use crate::error::{Error, Result};
use crate::metric::DELTA_MARGIN;
use crate::quad;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DampingFamily {
    Zero,
    ScatteringPower,
}

/// b(t) = μ(1+t)^(−β) with β > 1 (or identically zero). No sign condition.
#[derive(Debug, Clone, Copy)]
pub struct DampingProfile {
    pub family: DampingFamily,
    pub mu: f64,
    pub beta: f64,
}

impl DampingProfile {
    pub fn zero() -> Self {
        Self {
            family: DampingFamily::Zero,
            mu: 0.0,
            beta: 2.0,
        }
    }

    pub fn scattering_power(mu: f64, beta: f64) -> Result<Self> {
        if !(beta > 1.0) {
            return Err(Error::NonIntegrableDamping { beta });
        }
        if !mu.is_finite() {
            return Err(Error::invalid("mu must be finite"));
        }
        if mu == 0.0 {
            return Ok(Self::zero());
        }
        Ok(Self {
            family: DampingFamily::ScatteringPower,
            mu,
            beta,
        })
    }

    pub fn is_zero(&self) -> bool {
        self.family == DampingFamily::Zero
    }

    pub fn b(&self, t: f64) -> f64 {
        match self.family {
            DampingFamily::Zero => 0.0,
            DampingFamily::ScatteringPower => self.mu * (1.0 + t).powf(-self.beta),
        }
    }

    /// ∫₀ᵗ b = μ(1 − (1+t)^(1−β))/(β−1).
    pub fn integral_to(&self, t: f64) -> f64 {
        match self.family {
            DampingFamily::Zero => 0.0,
            DampingFamily::ScatteringPower => {
                self.mu * (1.0 - (1.0 + t).powf(1.0 - self.beta)) / (self.beta - 1.0)
            }
        }
    }

    /// ∫ₜ^∞ b = μ(1+t)^(1−β)/(β−1).
    pub fn tail(&self, t: f64) -> f64 {
        match self.family {
            DampingFamily::Zero => 0.0,
            DampingFamily::ScatteringPower => {
                self.mu * (1.0 + t).powf(1.0 - self.beta) / (self.beta - 1.0)
            }
        }
    }

    pub fn l1_norm(&self) -> f64 {
        match self.family {
            DampingFamily::Zero => 0.0,
            DampingFamily::ScatteringPower => self.mu.abs() / (self.beta - 1.0),
        }
    }

    /// m(t) = exp(∫₀ᵗ b), closed form for both families.
    pub fn m(&self, t: f64) -> f64 {
        self.integral_to(t).exp()
    }

    /// k = m(∞) = exp(∫₀^∞ b).
    pub fn k(&self) -> f64 {
        match self.family {
            DampingFamily::Zero => 1.0,
            DampingFamily::ScatteringPower => (self.mu / (self.beta - 1.0)).exp(),
        }
    }
}

/// Tabulated change of variables, immutable after construction.
pub struct TimeRescaling {
    pub damping: DampingProfile,
    pub k: f64,
    pub delta1: f64,
    pub tol: f64,
    t_max: f64,
    dt: f64,
    /// h(t_i) on the uniform t grid.
    h_vals: Vec<f64>,
    /// Monotone cubic slopes dt/ds at the (s_i, t_i) data for η guesses.
    eta_slopes: Vec<f64>,
}

/// Residuals of the defining identities, from centered finite differences.
#[derive(Debug, Clone)]
pub struct IdentityReport {
    pub max_eta_residual: f64,
    pub max_mtilde_residual: f64,
    pub fd_step: f64,
}

pub fn build_rescaling(damping: DampingProfile, t_max: f64, tol: f64) -> Result<TimeRescaling> {
    if !(t_max > 0.0) {
        return Err(Error::invalid(format!("t_max = {t_max} must be > 0")));
    }
    if !(tol > 0.0 && tol <= 1e-6) {
        return Err(Error::invalid(format!("tol = {tol} must be in (0, 1e-6]")));
    }
    let nodes = ((t_max * 8.0) as usize).clamp(512, 200_000);
    let dt = t_max / nodes as f64;
    let mut h_vals = Vec::with_capacity(nodes + 1);
    h_vals.push(0.0);
    let mut acc = 0.0;
    for i in 0..nodes {
        let a = i as f64 * dt;
        acc += quad::integrate(&|t| 1.0 / damping.m(t), a, a + dt, 1e-13)?;
        h_vals.push(acc);
    }
    // slopes of t as a function of s: dt/ds = m(t)
    let t_of = |i: usize| i as f64 * dt;
    let mut eta_slopes = Vec::with_capacity(nodes + 1);
    for i in 0..=nodes {
        eta_slopes.push(damping.m(t_of(i)));
    }
    let k = damping.k();
    let delta1 = 1.0f64.min(k).min(1.0 / 1.0f64.max(k)) - DELTA_MARGIN;
    let r = TimeRescaling {
        damping,
        k,
        delta1,
        tol,
        t_max,
        dt,
        h_vals,
        eta_slopes,
    };
    // verify inversion residual at off-node probe points
    let mut worst = 0.0f64;
    let s_max = r.s_max();
    for j in 1..128 {
        let s = s_max * (j as f64 + 0.3) / 128.0;
        let t = r.eta(s);
        worst = worst.max((r.h(t) - s).abs());
    }
    if worst > tol {
        return Err(Error::ToleranceNotMet {
            residual: worst,
            tol,
        });
    }
    Ok(r)
}

impl TimeRescaling {
    /// s = h(t) for any t ≥ 0; past the table it integrates the closed-form
    /// tail of 1/m.
    pub fn h(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        if self.damping.is_zero() {
            return t;
        }
        let last = self.h_vals.len() - 1;
        if t >= self.t_max {
            return self.h_vals[last]
                + quad::integrate(&|x| 1.0 / self.damping.m(x), self.t_max, t, 1e-13)
                    .expect("1/m is smooth and bounded");
        }
        let i = (t / self.dt).floor() as usize;
        let ti = i as f64 * self.dt;
        self.h_vals[i]
            + quad::integrate(&|x| 1.0 / self.damping.m(x), ti, t, 1e-13)
                .expect("1/m is smooth and bounded")
    }

    pub fn s_max(&self) -> f64 {
        *self.h_vals.last().unwrap()
    }

    /// t = η(s): monotone cubic guess through the (s_i, t_i) table, then
    /// Newton on h(t) − s (h' = 1/m > 0, so the iteration is well posed).
    pub fn eta(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        if self.damping.is_zero() {
            return s;
        }
        let mut t = self.eta_guess(s);
        for _ in 0..60 {
            let resid = self.h(t) - s;
            if resid.abs() <= 0.25 * self.tol {
                break;
            }
            t -= resid * self.damping.m(t);
            if t < 0.0 {
                t = 0.0;
            }
        }
        t
    }

    fn eta_guess(&self, s: f64) -> f64 {
        let s_max = self.s_max();
        if s >= s_max {
            return self.t_max + self.k * (s - s_max);
        }
        // locate the bracketing table interval by binary search on h_vals
        let idx = match self
            .h_vals
            .binary_search_by(|v| v.partial_cmp(&s).unwrap())
        {
            Ok(i) => return i as f64 * self.dt,
            Err(i) => i - 1,
        };
        let (s0, s1) = (self.h_vals[idx], self.h_vals[idx + 1]);
        let (t0, t1) = (idx as f64 * self.dt, (idx + 1) as f64 * self.dt);
        // Fritsch–Carlson style limited slopes keep the cubic monotone
        let d = (t1 - t0) / (s1 - s0);
        let m0 = limit_slope(self.eta_slopes[idx], d);
        let m1 = limit_slope(self.eta_slopes[idx + 1], d);
        let x = (s - s0) / (s1 - s0);
        let hh = s1 - s0;
        let (x2, x3) = (x * x, x * x * x);
        t0 * (2.0 * x3 - 3.0 * x2 + 1.0)
            + m0 * hh * (x3 - 2.0 * x2 + x)
            + t1 * (-2.0 * x3 + 3.0 * x2)
            + m1 * hh * (x3 - x2)
    }

    /// m̃(s) = m(η(s)).
    pub fn m_tilde(&self, s: f64) -> f64 {
        self.damping.m(self.eta(s))
    }

    pub fn sup_m_tilde(&self) -> f64 {
        1.0f64.max(self.k)
    }

    pub fn inf_m_tilde(&self) -> f64 {
        1.0f64.min(self.k)
    }

    /// Centered-difference residuals of η' = m̃ and m̃' = b(η)·m̃².
    pub fn check_identities(&self, sample_count: usize, fd_step: f64) -> IdentityReport {
        let s_hi = self.s_max() * 0.95;
        let mut r_eta = 0.0f64;
        let mut r_mt = 0.0f64;
        for j in 1..=sample_count {
            let s = s_hi * j as f64 / (sample_count + 1) as f64;
            let d_eta = (self.eta(s + fd_step) - self.eta(s - fd_step)) / (2.0 * fd_step);
            r_eta = r_eta.max((d_eta - self.m_tilde(s)).abs());
            let d_mt = (self.m_tilde(s + fd_step) - self.m_tilde(s - fd_step)) / (2.0 * fd_step);
            let mt = self.m_tilde(s);
            r_mt = r_mt.max((d_mt - self.damping.b(self.eta(s)) * mt * mt).abs());
        }
        IdentityReport {
            max_eta_residual: r_eta,
            max_mtilde_residual: r_mt,
            fd_step,
        }
    }
}

fn limit_slope(m: f64, d: f64) -> f64 {
    if d == 0.0 {
        return 0.0;
    }
    let r = m / d;
    if r <= 0.0 {
        0.0
    } else {
        m.min(3.0 * d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_integrable() {
        assert!(matches!(
            DampingProfile::scattering_power(1.0, 0.9),
            Err(Error::NonIntegrableDamping { .. })
        ));
        assert!(DampingProfile::scattering_power(1.0, 1.0).is_err());
    }

    #[test]
    fn zero_damping_identity() {
        let r = build_rescaling(DampingProfile::zero(), 100.0, 1e-9).unwrap();
        assert_eq!(r.k, 1.0);
        assert!((r.delta1 - (1.0 - DELTA_MARGIN)).abs() < 1e-15);
        for &t in &[0.0, 1.0, 55.5, 200.0] {
            assert_eq!(r.h(t), t);
            assert_eq!(r.eta(t), t);
            assert_eq!(r.m_tilde(t), 1.0);
        }
    }

    #[test]
    fn power_damping_closed_form_m() {
        let d = DampingProfile::scattering_power(1.0, 2.0).unwrap();
        // ∫₀ᵗ b = 1 − 1/(1+t)
        for &t in &[0.0f64, 0.5, 3.0, 100.0] {
            let expect = (1.0 - 1.0 / (1.0 + t)).exp();
            assert!((d.m(t) - expect).abs() < 1e-15);
        }
        assert!((d.k() - std::f64::consts::E).abs() < 1e-15);

        let d = DampingProfile::scattering_power(-0.5, 2.0).unwrap();
        assert!((d.k() - (-0.5f64).exp()).abs() < 1e-16);
    }

    #[test]
    fn delta1_from_endpoints() {
        let r = build_rescaling(
            DampingProfile::scattering_power(-0.5, 2.0).unwrap(),
            50.0,
            1e-9,
        )
        .unwrap();
        assert!((r.delta1 - ((-0.5f64).exp() - DELTA_MARGIN)).abs() < 1e-14);

        let r = build_rescaling(
            DampingProfile::scattering_power(1.0, 2.0).unwrap(),
            50.0,
            1e-9,
        )
        .unwrap();
        assert!((r.delta1 - ((-1.0f64).exp() - DELTA_MARGIN)).abs() < 1e-14);
    }

    #[test]
    fn eta_inverts_h() {
        let r = build_rescaling(
            DampingProfile::scattering_power(1.0, 2.0).unwrap(),
            200.0,
            1e-9,
        )
        .unwrap();
        for j in 0..200 {
            let t = 200.0 * (j as f64 + 0.7) / 200.0;
            let s = r.h(t);
            assert!((r.eta(s) - t).abs() < 1e-7, "t = {t}");
        }
        // beyond the table
        let t = 350.0;
        let s = r.h(t);
        assert!((r.eta(s) - t).abs() < 1e-6);
    }

    #[test]
    fn m_tilde_bounds_and_limit() {
        let r = build_rescaling(
            DampingProfile::scattering_power(1.0, 2.0).unwrap(),
            2000.0,
            1e-9,
        )
        .unwrap();
        let mut prev = r.m_tilde(0.0);
        assert!((prev - 1.0).abs() < 1e-12);
        for j in 1..=80 {
            let s = j as f64 * 25.0;
            let mt = r.m_tilde(s);
            assert!(mt >= r.delta1 && mt <= 1.0 / r.delta1);
            assert!(mt >= prev, "m̃ must increase toward k for mu > 0");
            // tail estimate in relative form
            let bound = (r.damping.tail(r.eta(s)).abs()).exp() - 1.0;
            assert!((mt / r.k - 1.0).abs() <= bound * (1.0 + 1e-10) + 1e-14);
            prev = mt;
        }
        assert!((r.m_tilde(r.s_max()) - r.k).abs() / r.k < 1e-3);
    }

    #[test]
    fn identities_zero_damping() {
        let r = build_rescaling(DampingProfile::zero(), 50.0, 1e-9).unwrap();
        let rep = r.check_identities(40, 1e-3);
        // (s+δ) − (s−δ) rounds at ulp(s), so the quotient is 1 up to ~1e-11
        assert!(rep.max_eta_residual < 1e-10, "{:?}", rep);
        assert!(rep.max_mtilde_residual < 1e-10, "{:?}", rep);
    }

    #[test]
    fn identities_second_order_in_fd_step() {
        let r = build_rescaling(
            DampingProfile::scattering_power(1.0, 2.0).unwrap(),
            50.0,
            1e-9,
        )
        .unwrap();
        let rep1 = r.check_identities(25, 2e-2);
        let rep2 = r.check_identities(25, 1e-2);
        let ratio = rep2.max_mtilde_residual.max(1e-300);
        let ratio = rep1.max_mtilde_residual / ratio;
        assert!(
            (3.0..5.5).contains(&ratio),
            "expected ~4 from O(h²), got {ratio}"
        );
    }

    #[test]
    fn identities_negative_mu() {
        let r = build_rescaling(
            DampingProfile::scattering_power(-0.5, 3.0).unwrap(),
            50.0,
            1e-9,
        )
        .unwrap();
        let rep = r.check_identities(50, 1e-3);
        assert!(rep.max_eta_residual < 1e-6, "{:?}", rep);
        assert!(rep.max_mtilde_residual < 1e-6, "{:?}", rep);
    }
}
