use wssgeom::covariance::CovarianceSource;
use wssgeom::models::wiener_spec;
use wssgeom::{
    analytic_sdof_covariance, cylindrify, empirical_covariance, gaussian_curvature, simulate,
    CovarianceSurface,
};

type M2 = [[f64; 2]; 2];

fn mul(a: &M2, b: &M2) -> M2 {
    let mut c = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    c
}

fn add(a: &M2, b: &M2, s: f64) -> M2 {
    [
        [a[0][0] + s * b[0][0], a[0][1] + s * b[0][1]],
        [a[1][0] + s * b[1][0], a[1][1] + s * b[1][1]],
    ]
}

fn transpose(a: &M2) -> M2 {
    [[a[0][0], a[1][0]], [a[0][1], a[1][1]]]
}

/// Covariance of `x` for `m x'' + c x' + k x = w`, `E[w w'] = D delta`, from
/// rest: integrate `P' = A P + P A^T + Q` to `t1`, then propagate with
/// `Phi' = A Phi` over the lag. RK4 throughout.
fn lyapunov_oracle(m: f64, c: f64, k: f64, d: f64, t1: f64, t2: f64) -> f64 {
    let (t1, t2) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
    let a: M2 = [[0.0, 1.0], [-k / m, -c / m]];
    let q: M2 = [[0.0, 0.0], [0.0, d / (m * m)]];
    let f = |p: &M2| {
        let ap = mul(&a, p);
        add(&add(&ap, &transpose(&ap), 1.0), &q, 1.0)
    };
    let rk4 = |y: &M2, h: f64, f: &dyn Fn(&M2) -> M2| {
        let k1 = f(y);
        let k2 = f(&add(y, &k1, h / 2.0));
        let k3 = f(&add(y, &k2, h / 2.0));
        let k4 = f(&add(y, &k3, h));
        let mut s = add(&k1, &k2, 2.0);
        s = add(&s, &k3, 2.0);
        s = add(&s, &k4, 1.0);
        add(y, &s, h / 6.0)
    };
    let steps = |t: f64| ((t / 1e-3).ceil() as usize).max(1);
    let mut p = [[0.0; 2]; 2];
    let n1 = steps(t1);
    for _ in 0..n1 {
        p = rk4(&p, t1 / n1 as f64, &f);
    }
    let lag = t2 - t1;
    let mut phi: M2 = [[1.0, 0.0], [0.0, 1.0]];
    if lag > 0.0 {
        let n2 = steps(lag);
        let g = |y: &M2| mul(&a, y);
        for _ in 0..n2 {
            phi = rk4(&phi, lag / n2 as f64, &g);
        }
    }
    mul(&phi, &p)[0][0]
}

#[test]
fn sdof_closed_form_matches_lyapunov_integration() {
    let (m, c, k, d) = (1.0, 0.2, 4.0, 1.0);
    let zeta = c / (2.0 * (m * k as f64).sqrt());
    let wn = (k / m as f64).sqrt();
    let s0 = d / (2.0 * std::f64::consts::PI);
    for (t1, t2) in [
        (0.3, 0.3),
        (1.0, 2.5),
        (4.0, 1.5),
        (7.0, 7.0),
        (12.0, 15.5),
        (25.0, 25.2),
    ] {
        let oracle = lyapunov_oracle(m, c, k, d, t1, t2);
        let closed = analytic_sdof_covariance(m, zeta, wn, s0, t1, t2).unwrap();
        assert!(
            (oracle - closed).abs() < 1e-9,
            "({t1}, {t2}): {closed} vs {oracle}"
        );
    }
    // A different mass and damping exercise the m^2 and zeta scalings.
    let (m, c, k, d) = (2.0, 1.0, 8.0, 3.0);
    let zeta = c / (2.0 * (m * k as f64).sqrt());
    let wn = (k / m as f64).sqrt();
    for (t1, t2) in [(0.5, 0.8), (3.0, 3.0), (6.0, 4.0)] {
        let oracle = lyapunov_oracle(m, c, k, d, t1, t2);
        let closed =
            analytic_sdof_covariance(m, zeta, wn, d / (2.0 * std::f64::consts::PI), t1, t2)
                .unwrap();
        assert!(
            (oracle - closed).abs() < 1e-9,
            "({t1}, {t2}): {closed} vs {oracle}"
        );
    }
}

#[test]
fn wiener_empirical_covariance_is_min() {
    let n = 4000;
    let ens = simulate(&wiener_spec(1.0, 0.01, 2.0), n, 17).unwrap();
    let surf = empirical_covariance(&ens, false).unwrap();
    for (i, j) in [(10, 10), (50, 150), (200, 100), (120, 121), (200, 200)] {
        let (s, t) = (surf.time(i), surf.time(j));
        let lo = s.min(t);
        // Var(W_s W_t) = s t + min(s, t)^2.
        let se = ((s * t + lo * lo) / n as f64).sqrt();
        let v = surf.get(i, j);
        assert!((v - lo).abs() < 4.0 * se, "({s}, {t}): {v}");
        assert_eq!(v, surf.get(j, i));
    }
}

fn lag_surface(n: usize, dt: f64, h: impl Fn(f64) -> f64 + Sync) -> CovarianceSurface {
    CovarianceSurface::from_fn(
        n,
        dt,
        0.0,
        CovarianceSource::Synthetic("lag".into()),
        move |s, t| h(s - t),
    )
}

fn max_abs_curvature(surf: &CovarianceSurface, times: &[(f64, f64)]) -> f64 {
    times
        .iter()
        .map(|&(s, t)| {
            let i = (s / surf.dt).round() as usize;
            let j = (t / surf.dt).round() as usize;
            gaussian_curvature(surf, i, j).unwrap().abs()
        })
        .fold(0.0, f64::max)
}

#[test]
fn lag_only_surfaces_have_vanishing_curvature() {
    // K of h(s - t) is zero; what the differences leave behind must be
    // O(dt^2), which the halving ratio confirms.
    let probes = [(1.0, 1.0), (2.0, 1.5), (1.2, 3.3), (3.0, 3.0), (0.5, 2.5)];
    let fixtures: [(&str, fn(f64) -> f64); 3] = [
        ("gauss_cos", |u| (-0.1 * u * u).exp() * (2.0 * u).cos()),
        ("sin", f64::sin),
        ("cauchy", |u| 1.0 / (1.0 + u * u)),
    ];
    for (name, h) in fixtures {
        let coarse = max_abs_curvature(&lag_surface(401, 0.01, h), &probes);
        let fine = max_abs_curvature(&lag_surface(801, 0.005, h), &probes);
        assert!(coarse < 5e-3, "{name}: {coarse}");
        if coarse > 1e-10 {
            let ratio = coarse / fine;
            assert!((3.0..5.0).contains(&ratio), "{name}: ratio {ratio}");
        }
    }
}

#[test]
fn paraboloid_curvature_is_four() {
    for dt in [0.01, 0.005] {
        let c: f64 = 1.0;
        let n = (2.0 * c / dt).round() as usize + 1;
        let surf = CovarianceSurface::from_fn(
            n,
            dt,
            0.0,
            CovarianceSource::Synthetic("p".into()),
            move |s, t| (s - c) * (s - c) + (t - c) * (t - c),
        );
        let i = (c / dt).round() as usize;
        let k = gaussian_curvature(&surf, i, i).unwrap();
        assert!((k - 4.0).abs() < 4.0 * dt * dt, "dt={dt}: {k}");
    }
    // Off the apex K = 4 / (1 + 4 s^2 + 4 t^2)^2, reached at O(dt^2).
    let dt = 0.005;
    let surf = CovarianceSurface::from_fn(
        201,
        dt,
        0.0,
        CovarianceSource::Synthetic("p".into()),
        |s, t| s * s + t * t,
    );
    let (i, j) = (60, 100);
    let (s, t) = (surf.time(i), surf.time(j));
    let exact = 4.0 / (1.0 + 4.0 * s * s + 4.0 * t * t).powi(2);
    let k = gaussian_curvature(&surf, i, j).unwrap();
    assert!((k - exact).abs() < 100.0 * dt * dt, "{k} vs {exact}");
}

#[test]
fn cylindrification_error_is_second_order() {
    let fixtures: [(&str, fn(f64, f64) -> f64); 3] = [
        ("sin", |s, t| (s - t).sin()),
        ("gauss", |s, t| {
            (-0.05 * (s - t) * (s - t)).exp() * (1.0 + 0.01 * s * t)
        }),
        ("cos_prod", |s, t| (0.7 * s).cos() * (0.4 * t).cos()),
    ];
    for (name, f) in fixtures {
        let surf = CovarianceSurface::from_fn(
            1001,
            0.01,
            0.0,
            CovarianceSource::Synthetic(name.into()),
            f,
        );
        let e1 = cylindrify(&surf, 1.0).unwrap().l2_error;
        let e2 = cylindrify(&surf, 0.5).unwrap().l2_error;
        let e3 = cylindrify(&surf, 0.25).unwrap().l2_error;
        for ratio in [e1 / e2, e2 / e3] {
            assert!((3.2..=4.8).contains(&ratio), "{name}: ratio {ratio}");
        }
    }
}
