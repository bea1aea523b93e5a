//! Critical exponents and classification of the (p, q) power plane.
//!
//! The plane splits into regimes according to which lifespan upper bound is
//! smallest: S (power-type nonlinearity |u|^q dominates), G (derivative
//! nonlinearity |u_t|^p dominates), Z (mixed), and the n = 2 improvement S1.
//! Exponents are normalized positive: the predicted lifespan is
//! T_ε ≈ C₀ ε^(−α), so the regime with the smallest α gives the tightest
//! bound for small ε. On the two critical lines the bound degenerates to
//! exp(C₀ ε^(−κ)) and the verdict carries κ instead of α.

use crate::error::{Error, Result};
use serde::Serialize;

/// Reference amplitude at which competing bounds are compared.
const EPS_REF: f64 = 1e-3;
/// Relative tolerance for detecting a critical line hit.
const CRIT_TOL: f64 = 1e-12;

/// Positive root of (n−1)x² − (n+1)x − 2 = 0.
pub fn strauss_exponent(n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::invalid(format!("n = {n} < 2")));
    }
    let nf = n as f64;
    Ok(((nf + 1.0) + ((nf + 1.0).powi(2) + 8.0 * (nf - 1.0)).sqrt()) / (2.0 * (nf - 1.0)))
}

/// p_G(n) = 1 + 2/(n−1).
pub fn glassey_exponent(n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::invalid(format!("n = {n} < 2")));
    }
    Ok(1.0 + 2.0 / (n as f64 - 1.0))
}

#[derive(Debug, Clone, Copy)]
pub struct ProblemPoint {
    pub n: usize,
    pub p: f64,
    pub q: f64,
    pub c1: f64,
    pub c2: f64,
    pub u1_nontrivial: bool,
}

impl ProblemPoint {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::invalid(format!("n = {} < 2", self.n)));
        }
        if !(self.p > 1.0) || !(self.q > 1.0) {
            return Err(Error::invalid("p and q must be > 1"));
        }
        if self.c1 < 0.0 || self.c2 < 0.0 {
            return Err(Error::invalid("c1 and c2 must be >= 0"));
        }
        if self.c1 == 0.0 && self.c2 == 0.0 {
            return Err(Error::invalid("at least one of c1, c2 must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    S,
    Z,
    G,
    S1,
    CriticalS,
    CriticalG,
    OutsideBlowupRegion,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FormulaId {
    AlphaS,
    AlphaZ,
    AlphaG,
    AlphaS1,
    LogAtStrauss,
    LogAtGlassey,
    None,
}

/// Predicted bound type: polynomial C₀ε^(−α) or exponential exp(C₀ε^(−κ)).
#[derive(Debug, Clone, Copy, Serialize)]
pub enum BoundKind {
    Polynomial { alpha: f64 },
    LogType { kappa: f64 },
}

impl BoundKind {
    /// ln of the bound with C₀ = 1, the comparison key between candidates.
    fn ln_bound(&self, eps: f64) -> f64 {
        match *self {
            BoundKind::Polynomial { alpha } => -alpha * eps.ln(),
            BoundKind::LogType { kappa } => eps.powf(-kappa),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Candidate {
    pub regime: Regime,
    pub formula: FormulaId,
    pub kind: BoundKind,
}

#[derive(Debug, Clone, Serialize)]
pub struct RegionVerdict {
    pub regime: Regime,
    pub formula: FormulaId,
    /// Positive exponent α for polynomial regimes.
    pub alpha: Option<f64>,
    /// Exponent κ inside exp(C₀ε^(−κ)) on a critical line.
    pub log_exponent: Option<f64>,
    /// All applicable bounds, for reporting ties and near-ties.
    pub candidates: Vec<Candidate>,
    /// Mixed bound selected where the original mixed-nonlinearity proof has
    /// to be recast (p beyond 2n/(n−1)).
    pub extended_region: bool,
}

/// α_S = 2q(q−1) / ((n+1)q + 2 − (n−1)q²), positive for 1 < q < p_S.
pub fn alpha_s(n: usize, q: f64) -> f64 {
    let nf = n as f64;
    2.0 * q * (q - 1.0) / ((nf + 1.0) * q + 2.0 - (nf - 1.0) * q * q)
}

/// α_G = 2(p−1) / (2 − (n−1)(p−1)), positive for 1 < p < p_G.
pub fn alpha_g(n: usize, p: f64) -> f64 {
    let nf = n as f64;
    2.0 * (p - 1.0) / (2.0 - (nf - 1.0) * (p - 1.0))
}

/// α_Z = 2p(q−1) / (2q + 2 − (n−1)p(q−1)); the denominator equals
/// 4 − (q−1)((n−1)p − 2) and vanishes exactly on the mixed critical curve.
pub fn alpha_z(n: usize, p: f64, q: f64) -> f64 {
    let nf = n as f64;
    2.0 * p * (q - 1.0) / (2.0 * q + 2.0 - (nf - 1.0) * p * (q - 1.0))
}

/// α_S1 = (q−1)/(3−q), the n = 2, 1 < q < 2 improvement.
pub fn alpha_s1(q: f64) -> f64 {
    (q - 1.0) / (3.0 - q)
}

/// Value of the mixed-curve expression (q−1)((n−1)p−2); blow-up needs < 4.
pub fn mixed_curve_value(n: usize, p: f64, q: f64) -> f64 {
    (q - 1.0) * ((n as f64 - 1.0) * p - 2.0)
}

pub fn classify_region(point: &ProblemPoint) -> Result<RegionVerdict> {
    point.validate()?;
    let (n, p, q) = (point.n, point.p, point.q);
    let p_s = strauss_exponent(n)?;
    let p_g = glassey_exponent(n)?;

    let mut candidates: Vec<Candidate> = Vec::new();

    if point.c2 > 0.0 {
        if (q - p_s).abs() <= CRIT_TOL * p_s {
            candidates.push(Candidate {
                regime: Regime::CriticalS,
                formula: FormulaId::LogAtStrauss,
                kind: BoundKind::LogType {
                    kappa: q * (q - 1.0),
                },
            });
        } else if q < p_s {
            candidates.push(Candidate {
                regime: Regime::S,
                formula: FormulaId::AlphaS,
                kind: BoundKind::Polynomial {
                    alpha: alpha_s(n, q),
                },
            });
        }
        if n == 2 && q < 2.0 && point.u1_nontrivial {
            candidates.push(Candidate {
                regime: Regime::S1,
                formula: FormulaId::AlphaS1,
                kind: BoundKind::Polynomial { alpha: alpha_s1(q) },
            });
        }
    }
    if point.c1 > 0.0 {
        if (p - p_g).abs() <= CRIT_TOL * p_g {
            candidates.push(Candidate {
                regime: Regime::CriticalG,
                formula: FormulaId::LogAtGlassey,
                kind: BoundKind::LogType { kappa: p - 1.0 },
            });
        } else if p < p_g {
            candidates.push(Candidate {
                regime: Regime::G,
                formula: FormulaId::AlphaG,
                kind: BoundKind::Polynomial {
                    alpha: alpha_g(n, p),
                },
            });
        }
    }
    if point.c1 > 0.0 && point.c2 > 0.0 && mixed_curve_value(n, p, q) < 4.0 {
        candidates.push(Candidate {
            regime: Regime::Z,
            formula: FormulaId::AlphaZ,
            kind: BoundKind::Polynomial {
                alpha: alpha_z(n, p, q),
            },
        });
    }

    if candidates.is_empty() {
        return Ok(RegionVerdict {
            regime: Regime::OutsideBlowupRegion,
            formula: FormulaId::None,
            alpha: None,
            log_exponent: None,
            candidates,
            extended_region: false,
        });
    }

    // Smallest predicted bound at the reference amplitude wins; exact ties
    // go to the later-proved refinements: S1 over Z over S over G.
    let priority = |r: Regime| match r {
        Regime::S1 => 0,
        Regime::Z => 1,
        Regime::S | Regime::CriticalS => 2,
        Regime::G | Regime::CriticalG => 3,
        Regime::OutsideBlowupRegion => 4,
    };
    let mut best = 0;
    for i in 1..candidates.len() {
        let a = candidates[i].kind.ln_bound(EPS_REF);
        let b = candidates[best].kind.ln_bound(EPS_REF);
        let tie = (a - b).abs() <= 1e-12 * b.abs().max(1.0);
        let wins_tie = tie && priority(candidates[i].regime) < priority(candidates[best].regime);
        if (!tie && a < b) || wins_tie {
            best = i;
        }
    }
    let chosen = candidates[best].clone();
    let (alpha, log_exponent) = match chosen.kind {
        BoundKind::Polynomial { alpha } => (Some(alpha), None),
        BoundKind::LogType { kappa } => (None, Some(kappa)),
    };
    let extended_region =
        chosen.regime == Regime::Z && (n as f64 - 1.0) * p > 2.0 * n as f64;
    Ok(RegionVerdict {
        regime: chosen.regime,
        formula: chosen.formula,
        alpha,
        log_exponent,
        candidates,
        extended_region,
    })
}

/// Evaluate the selected upper bound at amplitude ε with constant C₀.
pub fn lifespan_bound(verdict: &RegionVerdict, eps: f64, c0: f64) -> Result<f64> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::invalid(format!("eps = {eps} must be in (0,1)")));
    }
    if !(c0 > 0.0) {
        return Err(Error::invalid(format!("C0 = {c0} must be > 0")));
    }
    match (verdict.alpha, verdict.log_exponent) {
        (Some(alpha), _) => Ok(c0 * eps.powf(-alpha)),
        (None, Some(kappa)) => Ok((c0 * eps.powf(-kappa)).exp()),
        _ => Err(Error::invalid(
            "no lifespan bound outside the blow-up region",
        )),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LabeledCurve {
    pub label: String,
    /// (q, p) pairs, matching the axes of the regime diagram.
    pub points: Vec<(f64, f64)>,
}

/// Boundary curves of the regime diagram for plotting.
pub fn region_boundary_polylines(n: usize, resolution: usize) -> Result<Vec<LabeledCurve>> {
    if resolution < 16 {
        return Err(Error::invalid(format!(
            "resolution = {resolution} < 16"
        )));
    }
    let p_s = strauss_exponent(n)?;
    let p_g = glassey_exponent(n)?;
    let q_max = (p_s + 2.5).max(6.0);
    let p_max = q_max;
    let nf = n as f64;
    let line = |q0: f64, p0: f64, q1: f64, p1: f64| -> Vec<(f64, f64)> {
        (0..=resolution)
            .map(|i| {
                let t = i as f64 / resolution as f64;
                (q0 + t * (q1 - q0), p0 + t * (p1 - p0))
            })
            .collect()
    };
    let mut curves = vec![
        LabeledCurve {
            label: "p=p_G".into(),
            points: line(2.0 * p_g - 1.0, p_g, q_max, p_g),
        },
        LabeledCurve {
            label: "q=p_S".into(),
            points: line(p_s, p_s, p_s, p_max),
        },
        LabeledCurve {
            label: "q=2p-1".into(),
            points: line(1.0, 1.0, 2.0 * p_g - 1.0, p_g),
        },
        LabeledCurve {
            label: "mixed_critical".into(),
            points: (0..=resolution)
                .map(|i| {
                    let t = i as f64 / resolution as f64;
                    let q = p_s + t * (2.0 * p_g - 1.0 - p_s);
                    let p = 2.0 / (nf - 1.0) + 4.0 / ((nf - 1.0) * (q - 1.0));
                    (q, p)
                })
                .collect(),
        },
    ];
    if n == 2 {
        curves.push(LabeledCurve {
            label: "s1_threshold".into(),
            points: (0..=resolution)
                .map(|i| {
                    let t = i as f64 / resolution as f64;
                    let q = 1.0 + t * (2.0 - 1.0) * (1.0 - 1e-9) + 1e-9;
                    (q, 2.0 * (q + 1.0) / (5.0 - q))
                })
                .collect(),
        });
    }
    Ok(curves)
}
