//! Acceptance suite: one test per criterion, each printing a PASS line with
//! the measured values (run with `--nocapture` to see them all).

use blowuplab::blowup::{first_order_lifespan_law, sweep_ode, sweep_pde};
use blowuplab::diagnostics::{check_inequalities, trace_run};
use blowuplab::eigenmode::{geodesic_radii, solve_eigenmode};
use blowuplab::exponents::{glassey_exponent, strauss_exponent};
use blowuplab::metric::{MetricFamily, MetricProfile};
use blowuplab::rescale::{build_rescaling, DampingProfile};
use blowuplab::temporal_mode::solve_decaying_mode_dt;
use blowuplab::wave_solver::{
    discrete_energy, run, DataProfile, RunMode, Simulation, SolverConfig,
};

fn base_cfg(n: usize, h: f64, t_max: f64) -> SolverConfig {
    SolverConfig {
        n,
        p: 2.0,
        q: 2.0,
        c1: 0.0,
        c2: 0.0,
        metric: MetricProfile::flat(n),
        damping: DampingProfile::zero(),
        h,
        cfl: 0.5,
        threshold: 1e8,
        t_max,
        data: DataProfile::default(),
        r_max: None,
    }
}

#[test]
fn acceptance_1_exponent_identities() {
    for n in 2..=10usize {
        let ps = strauss_exponent(n).unwrap();
        let nf = n as f64;
        let residual = (nf - 1.0) * ps * ps - (nf + 1.0) * ps - 2.0;
        assert!(
            residual.abs() <= 1e-12,
            "criterion 1: Strauss residual {residual:e} at n = {n}"
        );
    }
    assert_eq!(glassey_exponent(3).unwrap(), 2.0, "criterion 1: p_G(3)");
    // Z-bound denominator vanishes on the critical curve
    let mut worst = 0.0f64;
    for n in 2..=5usize {
        let nf = n as f64;
        for i in 0..50 {
            let q = 1.3 + 0.1 * i as f64;
            let p = 2.0 / (nf - 1.0) + 4.0 / ((nf - 1.0) * (q - 1.0));
            let denom = 2.0 * q + 2.0 - (nf - 1.0) * p * (q - 1.0);
            worst = worst.max(denom.abs() / (2.0 * q + 2.0));
        }
    }
    assert!(worst <= 1e-12, "criterion 1: Z-denominator {worst:e}");
    println!("ACCEPTANCE 1 exponent identities: PASS (worst Z-denominator {worst:.2e})");
}

#[test]
fn acceptance_2_ode_lifespan_laws() {
    let eps_list: Vec<f64> = (0..5).map(|i| 1e-2 * (0.1f64).powi(i)).collect();

    // polynomial Glassey law, two exponent settings
    let fit = sweep_ode(3, 1.5, 1.0, &eps_list).unwrap();
    let err_a = (fit.slope - 1.0).abs();
    assert!(err_a <= 1e-3, "criterion 2: slope {} for n=3 p=1.5", fit.slope);

    let fit = sweep_ode(2, 2.0, 1.0, &eps_list).unwrap();
    let err_b = (fit.slope - 2.0).abs();
    assert!(err_b <= 1e-3, "criterion 2: slope {} for n=2 p=2", fit.slope);

    // critical decay a = 1: the log law ln T ≈ ε^{-(p-1)}
    let fit = sweep_ode(3, 2.0, 1.0, &eps_list).unwrap();
    assert!(fit.log_law);
    let err_c = (fit.slope - 1.0).abs();
    assert!(err_c <= 1e-3, "criterion 2: log-law slope {}", fit.slope);
    // spot-check the law itself at one amplitude
    let kt = first_order_lifespan_law(3.0 - 1.0, 1.0, 1.0, 1e-3).unwrap();
    assert!((kt.ln_t - 1e3).abs() < 1e-9);
    println!(
        "ACCEPTANCE 2 ODE lifespan laws: PASS (slope errors {err_a:.1e}, {err_b:.1e}, log {err_c:.1e})"
    );
}

#[test]
fn acceptance_3_temporal_mode_asymptotics() {
    // the anchoring gap to λk scales like λ|μ|/t_max, so λ = 0.05 makes the
    // 1e-4 window attainable at t_max = 1e3 with a factor-two margin
    let lambda = 0.05;
    let t_max = 1e3;
    let mut gaps = Vec::new();
    for &mu in &[-0.5f64, 1.0] {
        let damping = DampingProfile::scattering_power(mu, 2.0).unwrap();
        let horizon = if mu > 0.0 { 4000.0 } else { 1500.0 };
        let resc = build_rescaling(damping, horizon, 1e-9).unwrap();
        let mode = solve_decaying_mode_dt(&resc, lambda, t_max, 0.01).unwrap();
        let target = lambda * mu.exp();
        let gap = (mode.nu.last().unwrap() - target).abs();
        assert!(
            gap <= 1e-4,
            "criterion 3: |nu(t_max) - lambda e^mu| = {gap:e} at mu = {mu}"
        );
        let d2 = mode.delta2;
        assert!(d2 > 0.0 && d2 <= 1.0);
        for &nu in &mode.nu {
            assert!(nu > 0.0, "criterion 3: nu positivity");
            assert!(
                lambda * d2 <= nu + 1e-15 && nu <= lambda / d2 + 1e-15,
                "criterion 3: nu bounds at mu = {mu}"
            );
        }
        gaps.push(gap);
    }
    println!(
        "ACCEPTANCE 3 temporal mode asymptotics: PASS (gaps {:.2e}, {:.2e} vs 1e-4)",
        gaps[0], gaps[1]
    );
}

#[test]
fn acceptance_4_eigenmode_oracle() {
    // flat n = 3, λ = 1: match sinh(r)/r to 1e-6 relative on [h, 20]
    let flat = MetricProfile::flat(3);
    let mode = solve_eigenmode(&flat, 1.0, 3, 20.0, 1e-3).unwrap();
    let mut worst = 0.0f64;
    for (r, phi) in mode.r.iter().zip(&mode.phi) {
        let exact = r.sinh() / r;
        worst = worst.max((phi - exact).abs() / exact);
    }
    assert!(worst <= 1e-6, "criterion 4: sinh oracle error {worst:e}");

    // perturbed profile: envelope ratio plateau under r_max doubling
    let pert = MetricProfile::new(MetricFamily::PowerPerturbation, 0.1, 1.0, 3).unwrap();
    let tail_ratio = |r_max: f64| -> f64 {
        let mode = solve_eigenmode(&pert, 1.0, 3, r_max, 1e-3).unwrap();
        let rt = geodesic_radii(&pert, &mode.r).unwrap();
        let lo = (0.9 * mode.r.len() as f64) as usize;
        let mut acc = 0.0;
        let mut count = 0.0;
        for ((r, phi), rt) in mode.r.iter().zip(&mode.phi).zip(&rt).skip(lo) {
            acc += phi * (1.0 + r * r).sqrt() * (-rt).exp();
            count += 1.0;
        }
        acc / count
    };
    let c30 = tail_ratio(30.0);
    let c60 = tail_ratio(60.0);
    let variation = (c60 / c30 - 1.0).abs();
    assert!(
        variation < 0.01,
        "criterion 4: plateau variation {variation:e} per doubling"
    );
    println!(
        "ACCEPTANCE 4 eigenmode oracle: PASS (sinh error {worst:.2e}, plateau variation {variation:.2e})"
    );
}

#[test]
fn acceptance_5_solver_order_and_energy() {
    // max-norm error against the closed-form radial solution for data
    // u0 = (1-r²)₊⁴, u1 = 0 (odd extension w(ξ) = ξ(1-ξ²)₊⁴)
    let exact = |t: f64, r: f64| -> f64 {
        let w = |x: f64| {
            if x.abs() >= 1.0 {
                0.0
            } else {
                let b = 1.0 - x * x;
                x * b * b * b * b
            }
        };
        (w(r + t) - w(t - r)) / (2.0 * r)
    };
    let err = |h: f64| -> f64 {
        let mut cfg = base_cfg(3, h, 2.0);
        cfg.data.u1_amp = 0.0;
        let mut sim = Simulation::new(&cfg, 1.0, RunMode::Original, None).unwrap();
        while sim.t() < 2.0 {
            sim.step().unwrap();
        }
        let t = sim.t();
        sim.grid
            .r
            .iter()
            .zip(sim.u())
            .map(|(r, u)| (u - exact(t, *r)).abs())
            .fold(0.0, f64::max)
    };
    let e1 = err(0.02);
    let e2 = err(0.01);
    let ratio = e1 / e2;
    assert!(
        (3.5..=4.5).contains(&ratio),
        "criterion 5: error ratio {ratio} outside [3.5, 4.5]"
    );

    // discrete energy drift per step below 1e-10 on a linear run
    let cfg = base_cfg(3, 0.02, 5.0);
    let mut sim = Simulation::new(&cfg, 1.0, RunMode::Original, None).unwrap();
    let mut u_prev = sim.u().to_vec();
    sim.step().unwrap();
    let e0 = discrete_energy(&sim.grid, sim.v(), &u_prev, sim.u());
    let mut e_last = e0;
    let mut drift = 0.0f64;
    for _ in 0..400 {
        u_prev.copy_from_slice(sim.u());
        sim.step().unwrap();
        let e = discrete_energy(&sim.grid, sim.v(), &u_prev, sim.u());
        drift = drift.max(((e - e_last) / e0).abs());
        e_last = e;
    }
    assert!(drift < 1e-10, "criterion 5: energy drift {drift:e}");
    println!(
        "ACCEPTANCE 5 solver order: PASS (error ratio {ratio:.3}, max drift {drift:.2e}/step)"
    );
}

#[test]
fn acceptance_6_finite_speed_of_propagation() {
    // six canned configs spanning flat/perturbed × damped/undamped; tiny
    // amplitude keeps the absolute 1e-14 support cut three decades under
    // the data scale, above the scheme's dispersive halo
    let flat = MetricProfile::flat(3);
    let power_plus = MetricProfile::new(MetricFamily::PowerPerturbation, 0.1, 1.0, 3).unwrap();
    let power_minus =
        MetricProfile::new(MetricFamily::PowerPerturbation, -0.2, 1.5, 3).unwrap();
    let expo = MetricProfile::new(MetricFamily::ExponentialPerturbation, 0.2, 0.5, 3).unwrap();
    let zero = DampingProfile::zero();
    let damp_pos = DampingProfile::scattering_power(1.0, 2.0).unwrap();
    let damp_neg = DampingProfile::scattering_power(-0.5, 2.0).unwrap();
    let cases: Vec<(&str, MetricProfile, DampingProfile)> = vec![
        ("flat/undamped", flat, zero),
        ("flat/mu=+1", flat, damp_pos),
        ("flat/mu=-0.5", flat, damp_neg),
        ("power(+0.1)/undamped", power_plus, zero),
        ("power(-0.2)/mu=+1", power_minus, damp_pos),
        ("exp(+0.2)/mu=-0.5", expo, damp_neg),
    ];
    let mut worst = f64::INFINITY;
    for (name, metric, damping) in cases {
        let mut cfg = base_cfg(3, 0.02, 10.0);
        cfg.metric = metric;
        cfg.damping = damping;
        cfg.c1 = 1.0;
        cfg.c2 = 1.0;
        let rep = run(&cfg, 1e-11, RunMode::Transformed).unwrap();
        assert!(
            rep.min_support_margin >= -2.0 * cfg.h,
            "criterion 6: margin {} on {name}",
            rep.min_support_margin
        );
        worst = worst.min(rep.min_support_margin);
    }
    println!(
        "ACCEPTANCE 6 finite speed of propagation: PASS (worst margin {worst:.4} vs -2h = {:.4})",
        -0.04
    );
}

#[test]
fn acceptance_7_inequality_replay() {
    // subcritical Glassey run: n = 3, p = 1.5, c2 = 0, ε = 0.05, flat, b = 0
    let mut cfg = base_cfg(3, 0.02, 600.0);
    cfg.p = 1.5;
    cfg.c1 = 1.0;
    cfg.c2 = 0.0;
    let trace = trace_run(&cfg, 0.05, 1.0).unwrap();
    assert!(trace.blown_up, "criterion 7: the run must reach blow-up");
    let rep = check_inequalities(&trace, 3, 1.5, 2.0);
    // the criterion's stated tolerance: h² times the trace magnitude
    let tol = cfg.h * cfg.h * rep.scale;
    assert!(
        rep.eq920_margin >= -tol,
        "criterion 7: (F+nuG)' - H margin {:e} vs -{tol:e}",
        rep.eq920_margin
    );
    assert!(rep.f_min >= -tol, "criterion 7: F >= 0 margin {:e}", rep.f_min);
    assert!(rep.g_min >= -tol, "criterion 7: G >= 0 margin {:e}", rep.g_min);
    assert!(
        rep.i_le_f_margin >= -tol,
        "criterion 7: I <= F margin {:e}",
        rep.i_le_f_margin
    );
    assert!(
        rep.kato_kappa > 0.0,
        "criterion 7: fitted kappa {:e}",
        rep.kato_kappa
    );
    println!(
        "ACCEPTANCE 7 inequality replay: PASS (margins eq920 {:.2e}, F {:.2e}, G {:.2e}, I<=F {:.2e}, kappa {:.3e})",
        rep.eq920_margin, rep.f_min, rep.g_min, rep.i_le_f_margin, rep.kato_kappa
    );
}

#[test]
fn acceptance_8_pde_lifespan_scaling() {
    let eps_list: Vec<f64> = {
        let factor = (0.1f64 / 3e-3).powf(1.0 / 5.0);
        (0..6).map(|i| 3e-3 * factor.powi(i)).collect()
    };

    // Glassey side: n = 3, c1 = 1, c2 = 0, p = 1.5, predicted slope 1
    let mut cfg = base_cfg(3, 0.02, 3000.0);
    cfg.p = 1.5;
    cfg.c1 = 1.0;
    cfg.c2 = 0.0;
    cfg.data.u0_amp = 20.0;
    cfg.data.u1_amp = 20.0;
    let fit = sweep_pde(&cfg, &eps_list, RunMode::Original).unwrap();
    let predicted = fit.predicted_alpha.unwrap();
    assert!((predicted - 1.0).abs() < 1e-12);
    let glassey_slope = fit.slope;
    assert!(
        (glassey_slope - predicted).abs() <= 0.2 * predicted,
        "criterion 8: Glassey slope {glassey_slope} vs predicted {predicted} (+-20%)"
    );
    let used: usize = fit.points.iter().filter(|p| p.consistent).count();

    // mixed side: n = 2, p = q = 2, predicted alpha_Z = 1
    let mut cfg = base_cfg(2, 0.02, 3000.0);
    cfg.p = 2.0;
    cfg.q = 2.0;
    cfg.c1 = 1.0;
    cfg.c2 = 1.0;
    cfg.data.u0_amp = 4.0;
    cfg.data.u1_amp = 4.0;
    let fit = sweep_pde(&cfg, &eps_list, RunMode::Original).unwrap();
    let predicted = fit.predicted_alpha.unwrap();
    assert!((predicted - 1.0).abs() < 1e-12);
    let mixed_slope = fit.slope;
    assert!(
        (mixed_slope - predicted).abs() <= 0.2 * predicted,
        "criterion 8: mixed slope {mixed_slope} vs predicted {predicted} (+-20%)"
    );
    let used_mixed: usize = fit.points.iter().filter(|p| p.consistent).count();
    println!(
        "ACCEPTANCE 8 PDE lifespan scaling: PASS (Glassey slope {glassey_slope:.3} on {used}/6 points, mixed slope {mixed_slope:.3} on {used_mixed}/6 points)"
    );
}

#[test]
fn acceptance_9_damping_invariance() {
    let mut worst = 0.0f64;
    for &mu in &[-0.5f64, 0.0, 1.0] {
        let mut cfg = base_cfg(3, 0.01, 400.0);
        cfg.p = 1.5;
        cfg.c1 = 1.0;
        cfg.c2 = 0.0;
        cfg.damping = if mu == 0.0 {
            DampingProfile::zero()
        } else {
            DampingProfile::scattering_power(mu, 2.0).unwrap()
        };
        let orig = run(&cfg, 0.3, RunMode::Original).unwrap();
        let tran = run(&cfg, 0.3, RunMode::Transformed).unwrap();
        assert!(orig.blown_up && tran.blown_up, "criterion 9: mu = {mu}");
        let rel = (orig.t_num - tran.t_num).abs() / orig.t_num;
        assert!(
            rel <= 0.05,
            "criterion 9: original vs pulled-back lifespan differ by {rel:.4} at mu = {mu}"
        );
        worst = worst.max(rel);
    }
    println!(
        "ACCEPTANCE 9 damping invariance: PASS (worst original-vs-transformed gap {worst:.4} vs 0.05)"
    );
}
