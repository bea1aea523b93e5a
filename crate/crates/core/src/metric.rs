//! Radial asymptotically Euclidean metric profiles g₁ = K²(r)dr² + r²dω².
//!
//! Three parametric families with closed-form derivatives:
//!   flat          K ≡ 1
//!   power         K = 1 + a⟨r⟩^(−ρ),  ⟨r⟩ = √(1+r²)
//!   exponential   K = 1 + a·e^(−αr)
//!
//! Closed-form K, K', K'' let the decay hypothesis |∂ᵏ(K−1)| ≤ C⟨r⟩^(−k−ρ)
//! be verified against the exact weighted envelope instead of a finite
//! difference. The non-radial short-range part g₂ is fixed to zero: the whole
//! laboratory is radial.

use crate::error::{Error, Result};
use crate::quad::{self, CumulativeTable};

pub const DELTA_MARGIN: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricFamily {
    Flat,
    PowerPerturbation,
    ExponentialPerturbation,
}

/// Immutable radial conformal factor with spatial dimension n.
#[derive(Debug, Clone, Copy)]
pub struct MetricProfile {
    pub family: MetricFamily,
    /// Perturbation amplitude, |a| < 1 so that K stays positive.
    pub a: f64,
    /// Decay order ρ (power family) or rate α (exponential family).
    pub rate: f64,
    pub n: usize,
}

/// Smallest decay constants C_k with |∂ᵏ(K−1)| ≤ C_k⟨r⟩^(−k−ρ) over the
/// samples, plus a growth diagnostic: if the weighted envelope keeps growing
/// toward the outer half of the sample range, the claimed order overstates
/// the actual decay and the check fails.
#[derive(Debug, Clone)]
pub struct DecayReport {
    pub c: [f64; 3],
    pub growth_ratio: [f64; 3],
    pub pass: bool,
}

impl MetricProfile {
    pub fn new(family: MetricFamily, a: f64, rate: f64, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::invalid(format!("dimension n = {n} < 2")));
        }
        match family {
            MetricFamily::Flat => Ok(Self {
                family,
                a: 0.0,
                rate: 1.0,
                n,
            }),
            MetricFamily::PowerPerturbation | MetricFamily::ExponentialPerturbation => {
                if !(rate > 0.0) {
                    return Err(Error::invalid(format!("decay rate {rate} must be > 0")));
                }
                if !(a.abs() < 1.0) {
                    return Err(Error::invalid(format!(
                        "amplitude |a| = {} must be < 1 to keep K positive",
                        a.abs()
                    )));
                }
                Ok(Self { family, a, rate, n })
            }
        }
    }

    pub fn flat(n: usize) -> Self {
        Self::new(MetricFamily::Flat, 0.0, 1.0, n).unwrap()
    }

    pub fn k(&self, r: f64) -> f64 {
        1.0 + self.k_minus_one(r)
    }

    /// K(r) − 1 in closed form; subtracting after the fact would lose the
    /// tail digits that the decay weights ⟨r⟩^(k+ρ) magnify.
    pub fn k_minus_one(&self, r: f64) -> f64 {
        match self.family {
            MetricFamily::Flat => 0.0,
            MetricFamily::PowerPerturbation => self.a * (1.0 + r * r).powf(-0.5 * self.rate),
            MetricFamily::ExponentialPerturbation => self.a * (-self.rate * r).exp(),
        }
    }

    pub fn k_prime(&self, r: f64) -> f64 {
        match self.family {
            MetricFamily::Flat => 0.0,
            MetricFamily::PowerPerturbation => {
                let rho = self.rate;
                -self.a * rho * r * (1.0 + r * r).powf(-0.5 * (rho + 2.0))
            }
            MetricFamily::ExponentialPerturbation => {
                -self.a * self.rate * (-self.rate * r).exp()
            }
        }
    }

    pub fn k_double_prime(&self, r: f64) -> f64 {
        match self.family {
            MetricFamily::Flat => 0.0,
            MetricFamily::PowerPerturbation => {
                // K'' = -aρ⟨r⟩^(-ρ-4)(1 - (ρ+1)r²)
                let rho = self.rate;
                -self.a
                    * rho
                    * (1.0 + r * r).powf(-0.5 * (rho + 4.0))
                    * (1.0 - (rho + 1.0) * r * r)
            }
            MetricFamily::ExponentialPerturbation => {
                self.a * self.rate * self.rate * (-self.rate * r).exp()
            }
        }
    }

    /// inf K over [0, ∞), from the monotone envelope of the family.
    pub fn inf_k(&self) -> f64 {
        if self.a >= 0.0 {
            1.0
        } else {
            1.0 + self.a
        }
    }

    /// sup K over [0, ∞).
    pub fn sup_k(&self) -> f64 {
        if self.a >= 0.0 {
            1.0 + self.a
        } else {
            1.0
        }
    }

    /// Largest δ₀ ∈ (0,1) with δ₀ < K < 1/δ₀ everywhere (strict under the
    /// fixed rounding margin).
    pub fn ellipticity_bounds(&self) -> f64 {
        self.inf_k().min(1.0 / self.sup_k()) - DELTA_MARGIN
    }

    /// Geodesic radial coordinate r̃(r) = ∫₀ʳ K(τ)dτ.
    pub fn geodesic_radius(&self, r: f64) -> Result<f64> {
        if !(r >= 0.0) {
            return Err(Error::invalid(format!("radius r = {r} must be >= 0")));
        }
        quad::integrate(&|t| self.k(t), 0.0, r, 1e-10)
    }

    /// Cached cumulative r̃ table for per-node solver queries.
    pub fn geodesic_map(&self, r_max: f64, nodes: usize) -> Result<GeodesicMap> {
        let me = *self;
        let f: Box<dyn Fn(f64) -> f64 + Send + Sync> = Box::new(move |r| me.k(r));
        let table = CumulativeTable::build(f, r_max, nodes, 1e-12)?;
        Ok(GeodesicMap { table })
    }

    /// ∫ₐᵇ K(r) r^{n-1} dr, the radial part of the volume of a shell.
    pub fn radial_volume(&self, a: f64, b: f64) -> Result<f64> {
        let n = self.n;
        quad::integrate(&|r: f64| self.k(r) * r.powi(n as i32 - 1), a, b, 1e-12)
    }

    /// Check the decay hypothesis at the samples, optionally against a
    /// claimed order different from the profile's own ρ.
    pub fn verify_decay(&self, r_samples: &[f64], claimed_rho: Option<f64>) -> Result<DecayReport> {
        if r_samples.is_empty() {
            return Err(Error::invalid("r_samples must be nonempty"));
        }
        if r_samples.iter().any(|r| !r.is_finite() || *r < 0.0) {
            return Err(Error::invalid("r_samples must be nonnegative and finite"));
        }
        let rho = claimed_rho.unwrap_or(match self.family {
            MetricFamily::Flat => 1.0,
            _ => self.rate,
        });
        let mut sorted: Vec<f64> = r_samples.to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let r_hi = *sorted.last().unwrap();

        let mut c = [0.0f64; 3];
        let mut c_lower = [0.0f64; 3];
        for &r in &sorted {
            let w = (1.0 + r * r).sqrt();
            let vals = [
                self.k_minus_one(r).abs() * w.powf(rho),
                self.k_prime(r).abs() * w.powf(1.0 + rho),
                self.k_double_prime(r).abs() * w.powf(2.0 + rho),
            ];
            for k in 0..3 {
                c[k] = c[k].max(vals[k]);
                if r <= 0.5 * r_hi {
                    c_lower[k] = c_lower[k].max(vals[k]);
                }
            }
        }
        let mut growth_ratio = [1.0f64; 3];
        for k in 0..3 {
            if c[k] > 0.0 && c_lower[k] > 0.0 {
                growth_ratio[k] = c[k] / c_lower[k];
            } else if c[k] > 0.0 && c_lower[k] == 0.0 {
                growth_ratio[k] = f64::INFINITY;
            }
        }
        let pass = c.iter().all(|x| x.is_finite()) && growth_ratio.iter().all(|g| *g <= 1.25);
        Ok(DecayReport {
            c,
            growth_ratio,
            pass,
        })
    }
}

/// Cumulative r̃ lookups backed by a cached table.
pub struct GeodesicMap {
    table: CumulativeTable<Box<dyn Fn(f64) -> f64 + Send + Sync>>,
}

impl GeodesicMap {
    pub fn eval(&self, r: f64) -> Result<f64> {
        self.table.eval(r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_is_unity() {
        let p = MetricProfile::flat(3);
        for r in [0.0, 0.5, 7.0, 100.0] {
            assert_eq!(p.k(r), 1.0);
            assert_eq!(p.k_prime(r), 0.0);
        }
    }

    #[test]
    fn power_profile_value() {
        // K(5) = 1 + 0.1·26^(-1/2)
        let p = MetricProfile::new(MetricFamily::PowerPerturbation, 0.1, 1.0, 3).unwrap();
        let expect = 1.0 + 0.1 / 26.0f64.sqrt();
        assert!((p.k(5.0) - expect).abs() < 1e-15);
        assert!((expect - 1.019_611_613_513_818_4).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(MetricProfile::new(MetricFamily::PowerPerturbation, 0.99999, 1.0, 3).is_ok());
        assert!(MetricProfile::new(MetricFamily::PowerPerturbation, 1.0, 1.0, 3).is_err());
        assert!(MetricProfile::new(MetricFamily::PowerPerturbation, -1.2, 1.0, 3).is_err());
        assert!(MetricProfile::new(MetricFamily::PowerPerturbation, 0.1, 0.0, 3).is_err());
        assert!(MetricProfile::new(MetricFamily::PowerPerturbation, 0.1, 1.0, 1).is_err());
    }

    #[test]
    fn decay_report_flat_zero() {
        let p = MetricProfile::flat(3);
        let samples: Vec<f64> = (0..=100).map(|i| i as f64).collect();
        let rep = p.verify_decay(&samples, None).unwrap();
        assert_eq!(rep.c, [0.0, 0.0, 0.0]);
        assert!(rep.pass);
    }

    #[test]
    fn decay_report_power_c0_is_amplitude() {
        let p = MetricProfile::new(MetricFamily::PowerPerturbation, 0.1, 1.0, 3).unwrap();
        let samples: Vec<f64> = (0..=100).map(|i| i as f64).collect();
        let rep = p.verify_decay(&samples, None).unwrap();
        assert!((rep.c[0] - 0.1).abs() < 1e-14);
        assert!(rep.pass, "growth ratios: {:?}", rep.growth_ratio);
    }

    #[test]
    fn decay_report_overstated_order_fails() {
        let p = MetricProfile::new(MetricFamily::PowerPerturbation, 0.1, 1.0, 3).unwrap();
        let samples: Vec<f64> = (0..=100).map(|i| i as f64).collect();
        let rep = p.verify_decay(&samples, Some(2.0)).unwrap();
        // weighted envelope grows like ⟨r⟩, roughly doubling from r=50 to r=100
        assert!(rep.growth_ratio[0] > 1.5);
        assert!(!rep.pass);
    }

    #[test]
    fn geodesic_radius_flat_and_closed_form() {
        let p = MetricProfile::flat(3);
        assert!((p.geodesic_radius(7.0).unwrap() - 7.0).abs() < 1e-10);
        assert_eq!(p.geodesic_radius(0.0).unwrap(), 0.0);

        // ∫₀¹ (1 + 0.1(1+τ²)^(-1/2)) dτ = 1 + 0.1·asinh(1)
        let p = MetricProfile::new(MetricFamily::PowerPerturbation, 0.1, 1.0, 3).unwrap();
        let exact = 1.0 + 0.1 * 1.0f64.asinh();
        let got = p.geodesic_radius(1.0).unwrap();
        assert!((got - exact).abs() < 1e-12, "got {got}, want {exact}");
        assert!((exact - 1.088_137_358_701_954_4).abs() < 1e-12);
    }

    #[test]
    fn ellipticity_examples() {
        let flat = MetricProfile::flat(3);
        assert!((flat.ellipticity_bounds() - (1.0 - DELTA_MARGIN)).abs() < 1e-15);

        let plus = MetricProfile::new(MetricFamily::PowerPerturbation, 0.1, 1.0, 3).unwrap();
        assert!((plus.ellipticity_bounds() - (1.0 / 1.1 - DELTA_MARGIN)).abs() < 1e-12);

        let minus = MetricProfile::new(MetricFamily::PowerPerturbation, -0.1, 1.0, 3).unwrap();
        assert!((minus.ellipticity_bounds() - (0.9 - DELTA_MARGIN)).abs() < 1e-12);
    }

    #[test]
    fn geodesic_bounds_and_monotonicity() {
        let p = MetricProfile::new(MetricFamily::PowerPerturbation, -0.3, 1.5, 3).unwrap();
        let d0 = p.ellipticity_bounds();
        let mut prev = 0.0;
        for i in 1..=40 {
            let r = i as f64 * 0.5;
            let rt = p.geodesic_radius(r).unwrap();
            assert!(rt > prev, "r̃ must be strictly increasing");
            assert!(d0 * r <= rt && rt <= r / d0, "r = {r}, r̃ = {rt}");
            prev = rt;
        }
    }

    #[test]
    fn finite_differences_match_analytic_derivatives() {
        let p = MetricProfile::new(MetricFamily::PowerPerturbation, 0.2, 1.3, 3).unwrap();
        for &r in &[0.3, 1.0, 4.2] {
            let check = |h: f64| {
                let d1 = (p.k(r + h) - p.k(r - h)) / (2.0 * h);
                let d2 = (p.k(r + h) - 2.0 * p.k(r) + p.k(r - h)) / (h * h);
                (
                    (d1 - p.k_prime(r)).abs(),
                    (d2 - p.k_double_prime(r)).abs(),
                )
            };
            // steps large enough that the O(h²) term dominates the
            // cancellation noise of the second difference
            let (e1a, e2a) = check(4e-2);
            let (e1b, e2b) = check(2e-2);
            assert!(e1a / e1b.max(1e-14) > 3.0, "r = {r}: {e1a:e}/{e1b:e}");
            assert!(e2a / e2b.max(1e-12) > 3.0, "r = {r}: {e2a:e}/{e2b:e}");
        }
    }

    #[test]
    fn geodesic_map_matches_direct() {
        let p = MetricProfile::new(MetricFamily::ExponentialPerturbation, 0.2, 0.7, 3).unwrap();
        let map = p.geodesic_map(50.0, 501).unwrap();
        for &r in &[0.0, 0.123, 7.7, 49.9, 55.0] {
            let direct = p.geodesic_radius(r).unwrap();
            assert!((map.eval(r).unwrap() - direct).abs() < 1e-10);
        }
    }
}
