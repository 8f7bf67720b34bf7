use std::fmt::Write as _;

use extrinsic_core::curvature::hessian_identity_residual;
use extrinsic_core::discrete::{
    angle_defect_curvature, geodesic_ball_profile, mesh_sublevel_profile, tessellate, Mesh,
};
use extrinsic_core::identities::{
    check_monotonicity, chern_osserman_defect, DEFECT_TOL, geodesic_curvature_identity, hypothesis_diagnostics,
    level_record, level_samples, quadratic_growth_certificate, small_energy_topology, HypothesisReport,
    LevelRecord, Sweep, TailFit, Trend,
};
use extrinsic_core::immersion::SurfaceSpec;
use extrinsic_core::sublevel::{build_grid, coarea_check, intrinsic_distance_check, GeometryGrid, GridOptions};
use extrinsic_core::{AmbientVec, Error};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{ConfigError, RunConfig, Source};
use crate::report::sweep_csv;

/// Process exit codes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Exit {
    Pass = 0,
    IdentityFailure = 1,
    Config = 2,
    HypothesisViolated = 3,
}

#[derive(Debug)]
pub enum CommandError {
    Config(String),
    Failure(String),
}

impl CommandError {
    pub fn exit(&self) -> Exit {
        match self {
            CommandError::Config(_) => Exit::Config,
            CommandError::Failure(_) => Exit::IdentityFailure,
        }
    }
}

impl std::fmt::Display for CommandError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CommandError::Config(m) => write!(f, "configuration error: {m}"),
            CommandError::Failure(m) => write!(f, "failure: {m}"),
        }
    }
}

impl From<ConfigError> for CommandError {
    fn from(e: ConfigError) -> Self {
        CommandError::Config(e.0)
    }
}

fn failure(e: Error) -> CommandError {
    CommandError::Failure(e.to_string())
}

fn config(e: impl std::fmt::Display) -> CommandError {
    CommandError::Config(e.to_string())
}

/// Result of one command: exit code, a human summary, the JSON document and
/// optionally CSV rows.
#[derive(Debug)]
pub struct Outcome {
    pub exit: Exit,
    pub summary: String,
    pub json: Value,
    pub csv: Option<String>,
}

pub struct Prepared {
    pub spec: SurfaceSpec,
    pub grid: GeometryGrid,
    pub levels: Vec<f64>,
}

/// Builds the grid and the level samples. All failures here are
/// configuration errors.
pub fn prepare(cfg: &RunConfig) -> Result<Prepared, CommandError> {
    cfg.validate()?;
    let spec = cfg.surface()?;
    let x0 = cfg.base_point(spec.ambient_dim)?;
    let mut opts = GridOptions::new(cfg.resolution[0], cfg.resolution[1]).with_policy(cfg.policy);
    if let Some(t) = cfg.t_max {
        opts = opts.with_t_max(t);
    }
    let grid = build_grid(&spec, &opts, &x0).map_err(config)?;
    let t_max = cfg.t_max.unwrap_or_else(|| grid.default_t_max());
    let t_min = match cfg.t_min {
        Some(t) => t,
        None => {
            let lower = grid.r_min.max(0.0);
            let (i, j) = grid.nearest_node();
            let cells = 8.0 * grid.local_cell_size(i, j);
            (t_max / 100.0).max(lower + 0.01 * (t_max - lower)).max(cells)
        }
    };
    if !(t_min > 0.0 && t_min < t_max) {
        return Err(CommandError::Config(format!(
            "empty level range [{t_min}, {t_max}]; r ranges over [{}, {}] from x0, so pick another x0 or set the levels",
            grid.r_min, grid.r_max
        )));
    }
    let levels = level_samples(t_min, t_max, cfg.levels, cfg.spacing);
    Ok(Prepared { spec, grid, levels })
}

/// Level records in `t` order. Each level is independent, so the map runs in
/// parallel; the collected order and every reduction are fixed.
pub fn compute_records(grid: &GeometryGrid, levels: &[f64], threads: Option<usize>) -> Result<Vec<LevelRecord>, CommandError> {
    let run = || {
        levels
            .par_iter()
            .map(|&t| level_record(grid, t))
            .collect::<Result<Vec<_>, _>>()
    };
    let out = match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(config)?
            .install(run),
        None => run(),
    };
    out.map_err(failure)
}

pub fn run_sweep(cfg: &RunConfig) -> Result<(Prepared, Sweep), CommandError> {
    let prep = prepare(cfg)?;
    let records = compute_records(&prep.grid, &prep.levels, cfg.thread_count()?)?;
    let sweep = Sweep::new(&prep.grid, records).map_err(failure)?;
    Ok((prep, sweep))
}

fn vec_json(x: &AmbientVec) -> Value {
    json!(x.as_slice())
}

fn tail_json(t: &TailFit) -> Value {
    json!({
        "last": t.last,
        "limit": t.limit,
        "exponent": t.exponent,
        "verdict": format!("{:?}", t.verdict).to_lowercase(),
    })
}

fn trend_json(t: &Option<Trend>) -> Value {
    match t {
        None => Value::Null,
        Some(t) => json!({
            "t_first": t.t_first,
            "t_last": t.t_last,
            "first": t.first,
            "last": t.last,
            "decreasing": t.decreasing,
            "increasing": t.increasing,
        }),
    }
}

fn hypotheses_json(h: &HypothesisReport) -> Value {
    json!({
        "hypothesis_ok": h.hypothesis_ok,
        "diverging": h.diverging,
        "int_A2": tail_json(&h.int_a2),
        "int_H2": tail_json(&h.int_h2),
        "flux_A2": trend_json(&h.a2_flux),
        "flux_H2": trend_json(&h.h2_flux),
        "area_ratio": trend_json(&h.area_ratio),
        "regular_levels": h.regular_levels,
        "skipped_levels": h.skipped_levels,
        "skipped_in_top_half_decade": h.skipped_in_top_half_decade,
    })
}

fn header_json(cmd: &str, prep: &Prepared) -> serde_json::Map<String, Value> {
    let mut m = serde_json::Map::new();
    m.insert("command".into(), json!(cmd));
    m.insert("surface".into(), json!(prep.spec.name));
    m.insert(
        "params".into(),
        Value::Object(prep.spec.params.iter().map(|(k, v)| (k.clone(), json!(v))).collect()),
    );
    m.insert("x0".into(), vec_json(&prep.grid.x0));
    m.insert("resolution".into(), json!(prep.grid.resolution));
    m.insert("t_min".into(), json!(prep.levels.first()));
    m.insert("t_max".into(), json!(prep.levels.last()));
    m.insert("warnings".into(), json!(prep.grid.warnings));
    m
}

/// Level sweep: CSV rows plus a JSON summary. Exits 3 when `∫|A|²` diverges
/// on a noncompact surface.
pub fn cmd_sweep(cfg: &RunConfig) -> Result<Outcome, CommandError> {
    let (prep, sweep) = run_sweep(cfg)?;
    let hyp = hypothesis_diagnostics(&sweep);
    let violated = !sweep.compact && !hyp.hypothesis_ok;
    let mut m = header_json("sweep", &prep);
    m.insert("levels".into(), json!(sweep.records.len()));
    m.insert("hypotheses".into(), hypotheses_json(&hyp));
    m.insert("hypothesis_violated".into(), json!(violated));
    let mut summary = format!(
        "sweep {}: {} levels, {} regular\n",
        prep.spec.name,
        sweep.records.len(),
        sweep.regular_count()
    );
    if violated {
        let _ = writeln!(summary, "hypothesis violated: diverging {}", hyp.diverging.join(", "));
    }
    Ok(Outcome {
        exit: if violated { Exit::HypothesisViolated } else { Exit::Pass },
        summary,
        json: Value::Object(m),
        csv: Some(sweep_csv(&sweep.records)),
    })
}

struct Check {
    name: &'static str,
    worst: f64,
    tolerance: f64,
    at: Option<f64>,
    evaluated: usize,
    skipped: usize,
}

impl Check {
    fn new(name: &'static str, tolerance: f64) -> Self {
        Check {
            name,
            worst: 0.0,
            tolerance,
            at: None,
            evaluated: 0,
            skipped: 0,
        }
    }

    fn record(&mut self, value: f64, at: f64) {
        self.evaluated += 1;
        if !(value <= self.worst) {
            self.worst = value;
            self.at = Some(at);
        }
    }

    fn pass(&self) -> bool {
        self.worst <= self.tolerance
    }

    fn json(&self) -> Value {
        json!({
            "name": self.name,
            "worst": self.worst,
            "tolerance": self.tolerance,
            "at": self.at,
            "evaluated": self.evaluated,
            "skipped": self.skipped,
            "pass": self.pass(),
        })
    }
}

/// Runs every identity check at every regular level.
pub fn cmd_verify(cfg: &RunConfig) -> Result<Outcome, CommandError> {
    let (prep, sweep) = run_sweep(cfg)?;
    let grid = &prep.grid;
    let spec = &prep.spec;
    let tol = cfg.identity_tol;

    let mut hess = Check::new("hessian", tol);
    let d = &spec.domain;
    for a in 0..4 {
        for b in 0..4 {
            let p = [
                d.u_range.lerp((a as f64 + 0.5) / 4.0),
                d.v_range.lerp((b as f64 + 0.5) / 4.0),
            ];
            for e in [[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]] {
                match hessian_identity_residual(spec, p, &grid.x0, e) {
                    Ok(r) => hess.record(r, (spec.position(p) - grid.x0).norm()),
                    Err(_) => hess.skipped += 1,
                }
            }
        }
    }

    let mut p22 = Check::new("prop22", tol);
    let mut p23 = Check::new("prop23", tol);
    let mut kg = Check::new("geodesic_curvature", tol);
    let mut coarea = Check::new("coarea", tol);
    for r in &sweep.records {
        if !r.regular {
            for c in [&mut p22, &mut p23, &mut kg, &mut coarea] {
                c.skipped += 1;
            }
            continue;
        }
        p22.record(r.prop22_residual, r.t);
        p23.record(r.prop23_residual, r.t);
        match geodesic_curvature_identity(grid, r.t, 64) {
            Ok(k) => kg.record(k.max_residual / (1.0 + k.worst.1.abs()), r.t),
            Err(_) => kg.skipped += 1,
        }
        match coarea_check(grid, r.t, 1e-3 * r.t) {
            Ok(c) => coarea.record(c, r.t),
            Err(_) => coarea.skipped += 1,
        }
    }

    let mut mono = Check::new("monotonicity", cfg.monotonicity_slack);
    let mono_report = check_monotonicity(sweep.clone(), cfg.monotonicity_slack).map_err(failure)?;
    mono.evaluated = mono_report.regular_levels;
    mono.worst = mono_report.worst_u1_drop.max(mono_report.worst_u2_drop);
    mono.at = mono_report
        .u1_violations
        .iter()
        .chain(&mono_report.u2_violations)
        .map(|v| v.t)
        .next();

    let dist = intrinsic_distance_check(grid).map_err(failure)?;
    let mut distance = Check::new("extrinsic_below_intrinsic", 0.0);
    distance.evaluated = grid.nodes().len();
    distance.worst = dist.max_violation.max(0.0);

    let checks = [hess, p22, p23, kg, coarea, mono, distance];
    let pass = checks.iter().all(Check::pass);
    let mut summary = format!(
        "verify {} ({} levels, {} regular)\n",
        spec.name,
        sweep.records.len(),
        sweep.regular_count()
    );
    for c in &checks {
        let _ = writeln!(
            summary,
            "  {:<26} {:<4} worst {:e} (tol {:e}){}",
            c.name,
            if c.pass() { "ok" } else { "FAIL" },
            c.worst,
            c.tolerance,
            c.at.map(|t| format!(" at t = {t}")).unwrap_or_default()
        );
    }
    let worst = checks
        .iter()
        .filter(|c| !c.pass())
        .max_by(|a, b| (a.worst / a.tolerance.max(1e-300)).total_cmp(&(b.worst / b.tolerance.max(1e-300))))
        .map(|c| c.name);
    if let Some(w) = worst {
        let _ = writeln!(summary, "worst offender: {w}");
    }
    let mut m = header_json("verify", &prep);
    m.insert("levels".into(), json!(sweep.records.len()));
    m.insert("regular_levels".into(), json!(sweep.regular_count()));
    m.insert("checks".into(), Value::Array(checks.iter().map(Check::json).collect()));
    m.insert(
        "distance".into(),
        json!({
            "max_violation": dist.max_violation,
            "max_raw_excess": dist.max_raw_excess,
            "max_slack": dist.max_slack,
            "max_distortion": dist.max_distortion,
        }),
    );
    m.insert("worst_offender".into(), json!(worst));
    m.insert("pass".into(), json!(pass));
    Ok(Outcome {
        exit: if pass { Exit::Pass } else { Exit::IdentityFailure },
        summary,
        json: Value::Object(m),
        csv: None,
    })
}

/// Area-growth limit against total curvature, with the growth certificate and
/// the small-energy predicate.
pub fn cmd_defect(cfg: &RunConfig) -> Result<Outcome, CommandError> {
    let (prep, sweep) = run_sweep(cfg)?;
    let rep = chern_osserman_defect(&sweep, cfg.fit_gate, DEFECT_TOL)
        .map_err(failure)?;
    let t_top = *prep.levels.last().expect("at least eight levels");
    let cert = quadratic_growth_certificate(&prep.grid, &sweep, 0.0, t_top).map_err(failure)?;
    let energy = small_energy_topology(&sweep);

    let fit = rep.ratio_fit.map(|f| {
        json!({
            "ratio": f.ratio,
            "c2": f.c2,
            "c1": f.c1,
            "c0": f.c0,
            "rel_residual": f.rel_residual,
            "levels": f.levels,
            "t_lo": f.t_lo,
            "t_hi": f.t_hi,
            "gate_ok": f.gate_ok,
        })
    });
    let mut m = header_json("defect", &prep);
    m.insert("chi_M".into(), json!(rep.chi_m));
    m.insert("applicable".into(), json!(rep.applicable));
    m.insert("note".into(), json!(rep.note));
    m.insert("hypothesis_ok".into(), json!(rep.hypothesis_ok));
    m.insert("total_K".into(), json!(rep.total_k));
    m.insert("total_K_closed_form".into(), json!(rep.total_k_closed_form));
    m.insert("total_K_numeric".into(), tail_json(&rep.total_k_numeric));
    m.insert("total_K_delta".into(), json!(rep.total_k_delta));
    m.insert("defect".into(), json!(rep.defect));
    m.insert("ratio_fit".into(), fit.unwrap_or(Value::Null));
    m.insert("nearest_integer".into(), json!(rep.nearest_integer));
    m.insert("integer_distance".into(), json!(rep.integer_distance));
    m.insert("defect_integer_distance".into(), json!(rep.defect_integer_distance));
    m.insert("discrepancy".into(), json!(rep.discrepancy));
    m.insert("tolerance".into(), json!(rep.tolerance));
    m.insert("cohn_vossen_ok".into(), json!(rep.cohn_vossen_ok));
    m.insert("assertions_hold".into(), json!(rep.assertions_hold));
    m.insert("hypotheses".into(), hypotheses_json(&rep.hypotheses));
    m.insert(
        "growth_certificate".into(),
        json!({
            "R": cert.r_inner,
            "t": cert.t,
            "epsilon": cert.epsilon,
            "v": cert.v,
            "bound": cert.bound,
            "holds": cert.holds,
            "center": cert.center.as_ref().map(vec_json),
            "refused": cert.refused,
            "sub_quadratic": cert.sub_quadratic,
            "levels_checked": cert.levels_checked,
            "all_levels_hold": cert.all_levels_hold,
        }),
    );
    m.insert(
        "small_energy".into(),
        match &energy {
            Ok(e) => json!({
                "int_A2": e.int_a2,
                "below_4pi": e.below_4pi,
                "chi_M": e.chi_m,
                "implication_ok": e.implication_ok,
                "vacuous": e.vacuous,
            }),
            Err(e) => json!({ "error": e.to_string() }),
        },
    );

    let exit = if !rep.applicable {
        Exit::HypothesisViolated
    } else if rep.assertions_hold {
        Exit::Pass
    } else {
        Exit::IdentityFailure
    };
    let mut summary = format!(
        "defect {}: chi(M) = {}, total K = {}, defect = {}, fitted ratio = {}\n",
        prep.spec.name, rep.chi_m, rep.total_k, rep.defect, rep.ratio
    );
    let _ = writeln!(
        summary,
        "  nearest integer {} (distance {:e}), |defect - ratio| = {:e}",
        rep.nearest_integer, rep.integer_distance, rep.discrepancy
    );
    if let Some(n) = &rep.note {
        let _ = writeln!(summary, "  {n}");
    }
    Ok(Outcome {
        exit,
        summary,
        json: Value::Object(m),
        csv: None,
    })
}

/// Mesh backend report for an OBJ file or a tessellated surface.
pub fn cmd_mesh(cfg: &RunConfig) -> Result<Outcome, CommandError> {
    cfg.validate()?;
    let (mesh, label, declared) = match &cfg.source {
        Some(Source::Mesh(path)) => {
            let text = std::fs::read_to_string(path).map_err(|e| config(format!("{}: {e}", path.display())))?;
            let mesh = Mesh::parse_obj(&text).map_err(config)?;
            (mesh, path.display().to_string(), None)
        }
        Some(Source::Surface { .. }) => {
            let spec = cfg.surface()?;
            let [nu, nv] = cfg.tessellation;
            let mesh = tessellate(&spec, nu, nv).map_err(config)?;
            (mesh, spec.name.clone(), Some(spec.euler_char_full))
        }
        None => return Err(CommandError::Config("no mesh or surface given".into())),
    };
    let x0 = cfg.base_point(mesh.dim())?;
    let vs = mesh.vertices();
    let source = match cfg.source_vertex {
        Some(s) => s,
        None => (0..vs.len())
            .filter(|&i| mesh.is_referenced(i))
            .min_by(|&a, &b| (vs[a] - x0).norm().total_cmp(&(vs[b] - x0).norm()))
            .expect("mesh has vertices"),
    };
    if source >= vs.len() {
        return Err(CommandError::Config(format!("source vertex {source} out of range")));
    }
    let r_max = vs.iter().map(|v| (*v - x0).norm()).fold(0.0, f64::max);
    let t_max = cfg.t_max.unwrap_or(0.99 * r_max);
    let t_min = cfg.t_min.unwrap_or(t_max / 100.0);
    if !(t_min > 0.0 && t_min < t_max) {
        return Err(CommandError::Config(format!("empty level range [{t_min}, {t_max}]")));
    }
    let ts = level_samples(t_min, t_max, cfg.levels, cfg.spacing);
    let profile = mesh_sublevel_profile(&mesh, &x0, &ts).map_err(config)?;
    let balls = geodesic_ball_profile(&mesh, source, &ts).map_err(config)?;
    let defects = angle_defect_curvature(&mesh);
    let boundary = mesh.boundary_vertices();
    let total: f64 = extrinsic_core::sum::pairwise(&defects);
    let interior: Vec<f64> = defects
        .iter()
        .zip(&boundary)
        .filter(|(_, b)| !**b)
        .map(|(k, _)| *k)
        .collect();
    let interior = extrinsic_core::sum::pairwise(&interior);
    let chi = mesh.euler_characteristic();
    let chi_ok = declared.is_none_or(|d| d == chi);

    let mut csv = String::from("t,v,chi_Mt,D\n");
    for (l, b) in profile.levels.iter().zip(&balls.levels) {
        let _ = writeln!(csv, "{},{},{},{}", l.t, l.v, l.chi, b.d);
    }
    let pass = balls.holds && chi_ok;
    let json = json!({
        "command": "mesh",
        "source": label,
        "vertices": mesh.vertex_count(),
        "edges": mesh.edges().len(),
        "faces": mesh.faces().len(),
        "chi": chi,
        "declared_chi": declared,
        "components": mesh.components(),
        "boundary_loops": mesh.boundary_loops().len(),
        "closed": mesh.is_closed(),
        "total_angle_defect": total,
        "interior_angle_defect": interior,
        "x0": vec_json(&profile.x0),
        "offset_applied": profile.offset_applied,
        "source_vertex": source,
        "unreachable": balls.unreachable,
        "max_excess": balls.max_excess,
        "slack": balls.slack,
        "max_distortion": balls.max_distortion,
        "extrinsic_below_intrinsic": balls.holds,
        "levels": profile.levels.iter().zip(&balls.levels).map(|(l, b)| json!({
            "t": l.t, "v": l.v, "chi_Mt": l.chi, "D": b.d,
        })).collect::<Vec<_>>(),
        "pass": pass,
    });
    let mut summary = format!(
        "mesh {label}: V={} E={} F={} chi={} components={} boundary loops={}\n",
        mesh.vertex_count(),
        mesh.edges().len(),
        mesh.faces().len(),
        chi,
        mesh.components(),
        mesh.boundary_loops().len()
    );
    let _ = writeln!(
        summary,
        "  total angle defect {total}, interior {interior}; r <= d_graph {} (max excess {:e}, distortion {})",
        if balls.holds { "holds" } else { "FAILS" },
        balls.max_excess,
        balls.max_distortion
    );
    if !chi_ok {
        let _ = writeln!(summary, "  Euler characteristic differs from the declared {:?}", declared);
    }
    Ok(Outcome {
        exit: if pass { Exit::Pass } else { Exit::IdentityFailure },
        summary,
        json,
        csv: Some(csv),
    })
}
