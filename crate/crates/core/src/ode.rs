//! Small fixed- and adaptive-step integrators for the low-dimensional ODEs
//! used across the laboratory (radial modes, Riccati branches, Kato engines).

/// One classical RK4 step for y' = f(t, y) on an N-dimensional state.
pub fn rk4_step<const N: usize, F>(f: &F, t: f64, y: [f64; N], dt: f64) -> [f64; N]
where
    F: Fn(f64, [f64; N]) -> [f64; N],
{
    let k1 = f(t, y);
    let mut y2 = y;
    for i in 0..N {
        y2[i] = y[i] + 0.5 * dt * k1[i];
    }
    let k2 = f(t + 0.5 * dt, y2);
    let mut y3 = y;
    for i in 0..N {
        y3[i] = y[i] + 0.5 * dt * k2[i];
    }
    let k3 = f(t + 0.5 * dt, y3);
    let mut y4 = y;
    for i in 0..N {
        y4[i] = y[i] + dt * k3[i];
    }
    let k4 = f(t + dt, y4);
    let mut out = y;
    for i in 0..N {
        out[i] = y[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

/// Embedded Fehlberg 4(5) step: returns (5th-order state, error estimate).
pub fn rkf45_step<const N: usize, F>(f: &F, t: f64, y: [f64; N], dt: f64) -> ([f64; N], f64)
where
    F: Fn(f64, [f64; N]) -> [f64; N],
{
    const A2: f64 = 1.0 / 4.0;
    const A3: [f64; 2] = [3.0 / 32.0, 9.0 / 32.0];
    const A4: [f64; 3] = [1932.0 / 2197.0, -7200.0 / 2197.0, 7296.0 / 2197.0];
    const A5: [f64; 4] = [439.0 / 216.0, -8.0, 3680.0 / 513.0, -845.0 / 4104.0];
    const A6: [f64; 5] = [
        -8.0 / 27.0,
        2.0,
        -3544.0 / 2565.0,
        1859.0 / 4104.0,
        -11.0 / 40.0,
    ];
    const B5: [f64; 6] = [
        16.0 / 135.0,
        0.0,
        6656.0 / 12825.0,
        28561.0 / 56430.0,
        -9.0 / 50.0,
        2.0 / 55.0,
    ];
    const B4: [f64; 6] = [
        25.0 / 216.0,
        0.0,
        1408.0 / 2565.0,
        2197.0 / 4104.0,
        -1.0 / 5.0,
        0.0,
    ];
    const C: [f64; 6] = [0.0, 0.25, 3.0 / 8.0, 12.0 / 13.0, 1.0, 0.5];

    let mut k = [[0.0; N]; 6];
    k[0] = f(t, y);
    let combine = |coeffs: &[f64], k: &[[f64; N]; 6], y: &[f64; N]| {
        let mut out = *y;
        for (j, &c) in coeffs.iter().enumerate() {
            for i in 0..N {
                out[i] += dt * c * k[j][i];
            }
        }
        out
    };
    k[1] = f(t + C[1] * dt, combine(&[A2], &k, &y));
    k[2] = f(t + C[2] * dt, combine(&A3, &k, &y));
    k[3] = f(t + C[3] * dt, combine(&A4, &k, &y));
    k[4] = f(t + C[4] * dt, combine(&A5, &k, &y));
    k[5] = f(t + C[5] * dt, combine(&A6, &k, &y));

    let mut y5 = y;
    let mut err = 0.0f64;
    for i in 0..N {
        let mut d5 = 0.0;
        let mut d4 = 0.0;
        for j in 0..6 {
            d5 += B5[j] * k[j][i];
            d4 += B4[j] * k[j][i];
        }
        y5[i] = y[i] + dt * d5;
        err = err.max((dt * (d5 - d4)).abs());
    }
    (y5, err)
}
