//! Acceptance criteria, one line each. Run with `cargo test --test acceptance`.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use extrinsic::commands::{cmd_defect, cmd_sweep, compute_records, prepare, Exit};
use extrinsic::config::{RunConfig, Source};
use extrinsic::report::sweep_csv;
use extrinsic_core::curvature::{fundamental_forms, gauss_curvature_intrinsic, radial_frame};
use extrinsic_core::discrete::{
    angle_defect_curvature, geodesic_ball_profile, icosphere, mesh_sublevel_profile, tessellate,
};
use extrinsic_core::identities::{
    check_monotonicity, first_variation_identity, gauss_bonnet_boundary_identity, level_record,
    level_samples, quadratic_growth_certificate, run_sweep, small_energy_topology, small_t_limit,
    Spacing, TailVerdict, MONOTONICITY_SLACK,
};
use extrinsic_core::immersion::{catalog_surface, evaluate_jet, CATALOG};
use extrinsic_core::sublevel::{build_grid, sublevel_region, GeometryGrid, GridOptions};
use extrinsic_core::AmbientVec;
use serde_json::Value;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn grid(name: &str, params: &[(&str, f64)], n: usize, x0: &[f64]) -> GeometryGrid {
    let spec = catalog_surface(name, params).unwrap();
    build_grid(&spec, &GridOptions::square(n), &AmbientVec::from_slice(x0)).unwrap()
}

fn config(name: &str, params: &[(&str, f64)], x0: Option<&[f64]>, n: usize) -> RunConfig {
    RunConfig {
        source: Some(Source::Surface {
            name: name.into(),
            params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            user: None,
        }),
        x0: x0.map(<[f64]>::to_vec),
        resolution: [n, n],
        ..RunConfig::default()
    }
}

/// Composite Simpson rule on `[a, b]` with `n` (even) panels.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for k in 1..n {
        s += f(a + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

/// Area of the unit-sphere cap cut by a ball of radius `t` centred on the
/// sphere: polar angle from the chord, then `2π(1 − cos θ)`.
fn cap_area(t: f64) -> f64 {
    let theta = 2.0 * (t / 2.0).asin();
    2.0 * PI * (1.0 - theta.cos())
}

fn c1_sphere_suite() -> Verdict {
    let g = grid("sphere", &[], 512, &[0.0, 0.0, 1.0]);
    let mut worst = [0.0f64; 5];
    for t in [0.5, 1.0, 1.5] {
        let rec = level_record(&g, t).unwrap();
        let v_exact = cap_area(t);
        worst[0] = worst[0].max((rec.v / v_exact - 1.0).abs());

        let gb = gauss_bonnet_boundary_identity(&g, t).unwrap();
        let side22 = 2.0 * PI - v_exact;
        let d22 = (gb.lhs - side22).abs().max((gb.rhs - side22).abs()) / (1.0 + side22.abs());
        worst[1] = worst[1].max(d22.max(gb.residual));

        let fv = first_variation_identity(&g, t).unwrap();
        let side23 = 2.0 * v_exact;
        let d23 = (fv.identity.lhs - side23).abs().max((fv.identity.rhs - side23).abs()) / (1.0 + side23);
        worst[2] = worst[2].max(d23.max(fv.identity.residual));

        worst[3] = worst[3].max((rec.u1 - PI).abs());
        worst[4] = worst[4].max((rec.u2 - (PI + PI * t * t / 2.0)).abs());
    }
    let pass = worst[0] < 5e-3 && worst[1] < 1e-2 && worst[2] < 1e-2 && worst[3] < 1e-2 && worst[4] < 1e-2;
    verdict(
        pass,
        format!(
            "v rel {:.1e} (<5e-3), prop22 {:.1e}, prop23 {:.1e}, |u1-pi| {:.1e}, |u2-u2*| {:.1e} (<1e-2)",
            worst[0], worst[1], worst[2], worst[3], worst[4]
        ),
    )
}

fn c2_chern_osserman() -> Verdict {
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, expect, ratio_tol, defect_tol) in [
        ("catenoid", 2.0, 0.05, 0.02),
        ("enneper", 3.0, 0.05, 0.02),
        ("plane", 1.0, 1e-3, 1e-3),
    ] {
        let cfg = config(name, &[], None, 512);
        let out = cmd_defect(&cfg).unwrap();
        let j = &out.json;
        let ratio = j["ratio_fit"]["ratio"].as_f64().unwrap_or(f64::NAN);
        let defect = j["defect"].as_f64().unwrap_or(f64::NAN);
        let numeric_defect = j["chi_M"].as_f64().unwrap()
            - j["total_K_numeric"]["limit"].as_f64().unwrap_or(f64::NAN) / (2.0 * PI);
        let int_dist = j["integer_distance"].as_f64().unwrap_or(f64::NAN);
        let ok = out.exit == Exit::Pass
            && (ratio - expect).abs() <= ratio_tol
            && (defect - expect).abs() <= defect_tol
            && (numeric_defect - expect).abs() <= defect_tol.max(0.02)
            && int_dist < 0.05;
        pass &= ok;
        parts.push(format!(
            "{name} ratio {ratio:.4} defect {defect:.4} (numeric {numeric_defect:.4}) int-dist {int_dist:.1e}"
        ));
    }
    verdict(pass, parts.join("; "))
}

fn c3_monotonicity() -> Verdict {
    let cases: [(&str, &[f64], f64, f64); 5] = [
        ("plane", &[0.0, 0.0, 0.0], 0.5, 8.0),
        ("sphere", &[0.0, 0.0, 1.0], 0.1, 1.98),
        ("catenoid", &[0.0, 0.0, 0.0], 1.2, 100.0),
        ("enneper", &[0.0, 0.0, 0.0], 0.5, 300.0),
        ("clifford_torus", &[1.0, 0.0, 1.0, 0.0], 0.2, 2.8),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, x0, t0, t1) in cases {
        let g = grid(name, &[], 512, x0);
        let sw = run_sweep(&g, &level_samples(t0, t1, 24, Spacing::Log)).unwrap();
        let m = check_monotonicity(sw, MONOTONICITY_SLACK).unwrap();
        let ok = m.ok && m.regular_levels >= 16;
        pass &= ok;
        parts.push(format!(
            "{name} {} regular, worst drop {:.1e}",
            m.regular_levels,
            m.worst_u1_drop.max(m.worst_u2_drop)
        ));
    }
    verdict(pass, parts.join("; "))
}

fn c4_small_t() -> Verdict {
    let mut pass = true;
    let mut parts = Vec::new();
    // The limit is local; Enneper's smaller chart puts finer cells near the
    // base point, where u1 − π ≈ |A|²t²/16 is still visible at 512².
    let cases: [(&str, &[(&str, f64)], [f64; 2]); 3] = [
        ("plane", &[], [0.0, 0.0]),
        ("sphere", &[], [0.0, PI / 2.0]),
        ("enneper", &[("L", 2.0)], [0.0, 0.0]),
    ];
    for (name, params, p) in cases {
        let spec = catalog_surface(name, params).unwrap();
        let lim = small_t_limit(&spec, p, [512, 512]).unwrap();
        let err = (lim.u1 / PI - 1.0).abs();
        pass &= err < 1e-2;
        parts.push(format!("{name} u1/pi-1 {err:.1e} at t {:.3}", lim.t));
    }
    verdict(pass, parts.join("; "))
}

fn c5_quadratic_growth() -> Verdict {
    // Base point on the waist circle, so every t ≥ 1 reaches the surface.
    let g = grid("catenoid", &[], 512, &[1.0, 0.0, 0.0]);
    let ts = level_samples(1.0, 100.0, 32, Spacing::Log);
    let sw = run_sweep(&g, &ts).unwrap();
    let worst = sw
        .regular()
        .map(|r| r.v / (PI * r.t * r.t / 4.0))
        .fold(f64::INFINITY, f64::min);
    let cert = quadratic_growth_certificate(&g, &sw, 0.0, 100.0).unwrap();
    let cat_ok = worst >= 1.0 && cert.holds && cert.all_levels_hold && sw.regular_count() == ts.len();

    let pg = grid("graph_paraboloid", &[], 512, &[0.0, 0.0, 0.0]);
    let t_max = pg.default_t_max();
    let psw = run_sweep(&pg, &level_samples(t_max / 100.0, t_max, 24, Spacing::Log)).unwrap();
    let pcert = quadratic_growth_certificate(&pg, &psw, 0.0, t_max).unwrap();
    let par_ok = pcert.refused.is_some() && pcert.h2_tail.verdict == TailVerdict::Diverging && pcert.sub_quadratic;
    verdict(
        cat_ok && par_ok,
        format!(
            "catenoid min v/(pi t^2/4) {worst:.3} over {} levels, certificate {}; paraboloid refused {}, H2 tail {:?}, v/t^2 decreasing {}",
            sw.regular_count(),
            cert.holds && cert.all_levels_hold,
            pcert.refused.is_some(),
            pcert.h2_tail.verdict,
            pcert.sub_quadratic
        ),
    )
}

/// `∫_M K` of the full catenoid and Enneper surface by quadrature of the
/// closed-form curvature against the area element.
fn total_curvature_oracle(name: &str) -> f64 {
    match name {
        // K dA = −sech⁴v · cosh²v du dv.
        "catenoid" => -2.0 * PI * simpson(|v: f64| 1.0 / v.cosh().powi(2), -40.0, 40.0, 20000),
        // K = −4/(1+ρ²)⁴, dA = (1+ρ²)² ρ dρ dθ; substitute ρ = tan φ.
        _ => {
            -4.0 * 2.0
                * PI
                * simpson(
                    |phi: f64| {
                        let r = phi.tan();
                        r / (1.0 + r * r).powi(2) / phi.cos().powi(2)
                    },
                    0.0,
                    PI / 2.0 - 1e-9,
                    20000,
                )
        }
    }
}

fn c6_hypothesis_discrimination() -> Verdict {
    let out = cmd_sweep(&config("helicoid", &[], None, 512)).unwrap();
    let verdict_a2 = out.json["hypotheses"]["int_A2"]["verdict"].clone();
    let heli_ok = out.exit == Exit::HypothesisViolated && verdict_a2 == Value::from("diverging");
    let mut pass = heli_ok;
    let mut parts = vec![format!("helicoid exit {} intA2 {verdict_a2}", out.exit as i32)];
    for name in ["catenoid", "enneper"] {
        let oracle = -2.0 * total_curvature_oracle(name);
        let out = cmd_sweep(&config(name, &[], None, 512)).unwrap();
        let a2 = &out.json["hypotheses"]["int_A2"];
        let limit = a2["limit"].as_f64().unwrap_or(f64::NAN);
        let ok = out.exit == Exit::Pass && a2["verdict"] == "converged" && (limit / oracle - 1.0).abs() < 1e-2;
        pass &= ok;
        parts.push(format!("{name} intA2 {limit:.4} vs {oracle:.4}"));
    }
    verdict(pass, parts.join("; "))
}

fn c7_small_energy() -> Verdict {
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, expect_vacuous) in [("plane", false), ("catenoid", true), ("enneper", true)] {
        let g = grid(name, &[], 256, &[0.0, 0.0, 0.0]);
        let t_max = g.default_t_max();
        let t_min = (t_max / 100.0).max(g.r_min + 0.01 * (t_max - g.r_min));
        let sw = run_sweep(&g, &level_samples(t_min, t_max, 24, Spacing::Log)).unwrap();
        let e = small_energy_topology(&sw).unwrap();
        let ok = e.implication_ok
            && e.vacuous == expect_vacuous
            && if expect_vacuous { e.int_a2 >= 4.0 * PI } else { e.below_4pi && e.chi_m == 1 };
        pass &= ok;
        parts.push(format!("{name} intA2 {:.4} chi {} vacuous {}", e.int_a2, e.chi_m, e.vacuous));
    }
    verdict(pass, parts.join("; "))
}

fn c8_cross_oracle() -> Verdict {
    let mut worst_k: f64 = 0.0;
    let mut worst_split: f64 = 0.0;
    for name in CATALOG {
        let spec = catalog_surface(name, &[]).unwrap();
        let d = &spec.domain;
        let x0 = AmbientVec::from_slice(&[0.3, -0.2, 0.7, 0.1][..spec.ambient_dim]);
        for a in 0..16 {
            for b in 0..16 {
                let p = [d.u_range.lerp((a as f64 + 0.5) / 16.0), d.v_range.lerp((b as f64 + 0.5) / 16.0)];
                let jet = evaluate_jet(&spec, p).unwrap();
                let forms = fundamental_forms(&jet).unwrap();
                let kb = gauss_curvature_intrinsic(&spec, p).unwrap();
                worst_k = worst_k.max((kb - forms.k).abs() / forms.k.abs().max(1e-3));
                // Tangential and normal parts of (x − x0)/r from an
                // orthonormal tangent basis, independent of the frame code.
                let x = jet.x - x0;
                let r = x.norm();
                let e1 = jet.dx[0] * (1.0 / jet.dx[0].norm());
                let w = jet.dx[1] - e1 * e1.dot(&jet.dx[1]);
                let e2 = w * (1.0 / w.norm());
                let (a1, a2) = (x.dot(&e1) / r, x.dot(&e2) / r);
                let tan = a1 * a1 + a2 * a2;
                let nor = (x - e1 * (a1 * r) - e2 * (a2 * r)).norm_sq() / (r * r);
                let frame = radial_frame(&jet, &forms, &x0).unwrap();
                worst_split = worst_split
                    .max((tan + nor - 1.0).abs())
                    .max((frame.grad_r_sq - tan).abs())
                    .max((frame.grad_perp_sq - nor).abs());
            }
        }
    }
    verdict(
        worst_k < 1e-5 && worst_split < 1e-12,
        format!("Brioschi vs Gauss rel {worst_k:.1e} (<1e-5), |grad r|^2 split {worst_split:.1e} (<1e-12), {} surfaces", CATALOG.len()),
    )
}

fn c9_discrete() -> Verdict {
    let ico = icosphere(3, 1.0);
    let ico_err = (angle_defect_curvature(&ico).iter().sum::<f64>() - 4.0 * PI).abs();

    let spec = catalog_surface("catenoid", &[]).unwrap();
    let v_max = spec.domain.v_range.max;
    let mesh = tessellate(&spec, 256, 64).unwrap();
    let boundary = mesh.boundary_vertices();
    let interior: f64 = angle_defect_curvature(&mesh)
        .iter()
        .zip(&boundary)
        .filter(|(_, b)| !**b)
        .map(|(k, _)| k)
        .sum();
    let expected = -4.0 * PI * v_max.tanh();
    let cat_err = (interior / expected - 1.0).abs();

    let mut worst_v = (0.0f64, "", 0.0);
    let mut holds = true;
    let mut max_excess: f64 = 0.0;
    let cases: [(&str, &[f64], &[f64]); 4] = [
        ("plane", &[0.0, 0.0, 0.0], &[1.0, 3.0, 5.0]),
        ("sphere", &[0.0, 0.0, 1.0], &[0.5, 1.0, 1.5]),
        ("catenoid", &[0.0, 0.0, 0.0], &[1.5, 3.0, 6.0, 8.0]),
        ("enneper", &[0.0, 0.0, 0.0], &[4.0, 8.0, 16.0, 32.0, 64.0]),
    ];
    for (name, x0, ts) in cases {
        let spec = catalog_surface(name, &[]).unwrap();
        let mesh = tessellate(&spec, 256, 64).unwrap();
        let xv = AmbientVec::from_slice(x0);
        let prof = mesh_sublevel_profile(&mesh, &xv, ts).unwrap();
        let g = build_grid(&spec, &GridOptions::square(512), &xv).unwrap();
        for (lvl, &t) in prof.levels.iter().zip(ts) {
            let smooth = sublevel_region(&g, t).unwrap().area;
            let rel = (lvl.v / smooth - 1.0).abs();
            if rel > worst_v.0 {
                worst_v = (rel, name, t);
            }
        }
        let source = (0..mesh.vertices().len())
            .filter(|&i| mesh.is_referenced(i))
            .min_by(|&a, &b| (mesh.vertices()[a] - xv).norm().total_cmp(&(mesh.vertices()[b] - xv).norm()))
            .unwrap();
        let balls = geodesic_ball_profile(&mesh, source, ts).unwrap();
        holds &= balls.holds;
        max_excess = max_excess.max(balls.max_excess);
    }
    verdict(
        ico_err < 1e-9 && cat_err < 1e-2 && worst_v.0 < 2e-2 && holds,
        format!(
            "icosphere defect err {ico_err:.1e}; catenoid interior defect {interior:.4} vs {expected:.4} (rel {cat_err:.1e}); mesh v rel {:.1e} (<2e-2, worst {} t={}); r <= d_graph {holds} (max excess {max_excess:.1e})",
            worst_v.0, worst_v.1, worst_v.2
        ),
    )
}

fn c10_convergence() -> Verdict {
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, t) in [("catenoid", 4.0), ("enneper", 3.0)] {
        let coarse = grid(name, &[], 256, &[0.0, 0.0, 0.0]);
        let fine = grid(name, &[], 512, &[0.0, 0.0, 0.0]);
        let r = |g: &GeometryGrid| {
            let a = gauss_bonnet_boundary_identity(g, t).unwrap().residual;
            let b = first_variation_identity(g, t).unwrap().identity.residual;
            (a, b)
        };
        let (c22, c23) = r(&coarse);
        let (f22, f23) = r(&fine);
        let (s22, s23) = (c22 / f22, c23 / f23);
        pass &= s22 >= 1.7 && s23 >= 1.7;
        parts.push(format!("{name} t={t}: prop22 x{s22:.2}, prop23 x{s23:.2}"));
    }
    verdict(pass, parts.join("; "))
}

fn c11_determinism() -> Verdict {
    let cfg = config("catenoid", &[], None, 512);
    let prep = prepare(&cfg).unwrap();
    let n = std::thread::available_parallelism().map_or(4, |n| n.get()).max(4);
    let one = sweep_csv(&compute_records(&prep.grid, &prep.levels, Some(1)).unwrap());
    let many = sweep_csv(&compute_records(&prep.grid, &prep.levels, Some(n)).unwrap());
    verdict(
        one == many,
        format!("1 vs {n} threads: {} vs {} bytes, identical {}", one.len(), many.len(), one == many),
    )
}

fn main() -> ExitCode {
    // libtest flags such as `--nocapture` or a filter are accepted and ignored.
    let criteria: [(&str, fn() -> Verdict); 11] = [
        ("closed-form sphere suite", c1_sphere_suite),
        ("area-growth limit equals the curvature defect", c2_chern_osserman),
        ("u1, u2 monotone", c3_monotonicity),
        ("small-t limit of u1", c4_small_t),
        ("quadratic area growth", c5_quadratic_growth),
        ("hypothesis discrimination", c6_hypothesis_discrimination),
        ("small-energy topology predicate", c7_small_energy),
        ("curvature cross-oracle", c8_cross_oracle),
        ("discrete backend", c9_discrete),
        ("second-order convergence", c10_convergence),
        ("thread-count determinism", c11_determinism),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let v = run();
        if !v.pass {
            failed += 1;
        }
        println!(
            "acceptance {:>2} {} {name}: {} [{:.1}s]",
            k + 1,
            if v.pass { "PASS" } else { "FAIL" },
            v.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
