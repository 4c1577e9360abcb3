use std::fs;
use std::path::Path;
use std::time::Instant;

use nalgebra::Vector3;
use serde_json::json;

use nived_core::benchmarks::{
    generate_mesh, run_convergence, run_cylinder, run_dynamic_level, run_manufactured_dynamic, solve_static,
    stability_spectrum, Discretization,
};
use nived_core::solvers::RIGID_MODE_THRESHOLD;
use nived_core::{BackgroundMesh, BenchmarkError, ConvergenceStudy, ErrorReport};

use crate::config::{ConfigError, RunConfig, DYNAMIC};
use crate::output::{float, opt_float, write_csv, write_mesh, write_summary, write_vtk, PointData};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Benchmark(#[from] BenchmarkError),
    #[error("{0}")]
    Geometry(#[from] nived_core::geometry::GeometryError),
    #[error("cannot write output: {0}")]
    Io(#[from] std::io::Error),
}

fn prepare_output(config: &RunConfig) -> Result<&Path, CliError> {
    fs::create_dir_all(&config.output)?;
    Ok(&config.output)
}

fn report_json(r: &ErrorReport, record_timings: bool) -> serde_json::Value {
    json!({
        "divisions": r.level,
        "h": r.h,
        "dofs": r.dofs,
        "errors": { "l2": r.l2, "h1": r.h1 },
        "energy": r.energy,
        "seconds": record_timings.then_some(r.seconds),
    })
}

fn write_fields(
    dir: &Path,
    config: &RunConfig,
    disc: &Discretization,
    d: &[f64],
    dmat: &nalgebra::Matrix3<f64>,
) -> Result<(), CliError> {
    let strains = disc.nodal_strains(d)?;
    let stresses: Vec<Vector3<f64>> = strains.iter().map(|e| dmat * e).collect();
    write_vtk(
        &dir.join("fields.vtk"),
        config,
        &disc.mesh,
        &[
            PointData::Vector("displacement", d),
            PointData::Voigt("strain", &strains),
            PointData::Voigt("stress", &stresses),
        ],
    )?;
    Ok(())
}

fn static_mesh(config: &RunConfig) -> Result<BackgroundMesh, CliError> {
    Ok(match &config.mesh {
        Some(path) => BackgroundMesh::read_file(path)?,
        None => generate_mesh(&config.domain(), config.mesh_kind(), config.levels[0])?,
    })
}

pub fn run(config: &RunConfig) -> Result<String, CliError> {
    let dir = prepare_output(config)?;
    let options = config.run_options();
    let start = Instant::now();
    let (report, disc, d, dmat) = if config.benchmark == DYNAMIC {
        let dynamic = config.dynamic_config();
        let dmat = nived_core::materials::d_matrix(
            dynamic.field.youngs,
            dynamic.field.poisson,
            nived_core::PlaneCondition::PlaneStress,
        )
        .map_err(BenchmarkError::from)?;
        let (report, disc, d) = run_dynamic_level(&dynamic, config.levels[0], &options)?;
        (report, disc, d, dmat)
    } else {
        let problem = config.static_problem()?;
        let sol = solve_static(&problem, static_mesh(config)?, &options)?;
        let report = nived_core::benchmarks::report(&problem, config.levels[0], &sol)?;
        (report, sol.disc, sol.displacement, problem.moduli.d_matrix)
    };
    let solve_seconds = start.elapsed().as_secs_f64();
    write_fields(dir, config, &disc, &d, &dmat)?;
    let mut body = report_json(&report, config.record_timings);
    body["timings"] = json!({ "solve_seconds": config.record_timings.then_some(solve_seconds) });
    write_summary(dir, config, body)?;
    Ok(format!(
        "{} {}: {} dofs, L2 {}, H1 {}, energy {}",
        config.benchmark,
        options.method.label(),
        report.dofs,
        report.l2.map_or("n/a".into(), |e| format!("{e:.3e}")),
        report.h1.map_or("n/a".into(), |e| format!("{e:.3e}")),
        float(report.energy)
    ))
}

pub fn convergence(config: &RunConfig) -> Result<String, CliError> {
    let dir = prepare_output(config)?;
    let options = config.run_options();
    let study: ConvergenceStudy = if config.benchmark == DYNAMIC {
        run_manufactured_dynamic(&config.dynamic_config(), &options)?
    } else {
        run_convergence(&config.static_problem()?, &options)?
    };
    let seconds = |s: f64| if config.record_timings { float(s) } else { String::new() };
    let mut rows: Vec<Vec<String>> = study
        .reports
        .iter()
        .map(|r| {
            vec![
                r.level.to_string(),
                float(r.h),
                r.dofs.to_string(),
                opt_float(r.l2),
                opt_float(r.h1),
                float(r.energy),
                seconds(r.seconds),
            ]
        })
        .collect();
    rows.push(vec![
        "rate".into(),
        String::new(),
        String::new(),
        opt_float(study.l2_rate),
        opt_float(study.h1_rate),
        String::new(),
        String::new(),
    ]);
    write_csv(&dir.join("rates.csv"), config, &["level", "h", "dofs", "l2", "h1", "energy", "seconds"], &rows)?;
    write_summary(
        dir,
        config,
        json!({
            "levels": study.reports.iter().map(|r| report_json(r, config.record_timings)).collect::<Vec<_>>(),
            "rates": { "l2": study.l2_rate, "h1": study.h1_rate },
        }),
    )?;
    let fmt = |r: Option<f64>| r.map_or("n/a".into(), |r| format!("{r:.3}"));
    Ok(format!(
        "{} {}: {} levels, L2 rate {}, H1 rate {}",
        config.benchmark,
        options.method.label(),
        study.reports.len(),
        fmt(study.l2_rate),
        fmt(study.h1_rate)
    ))
}

pub fn eigen(config: &RunConfig) -> Result<String, CliError> {
    let dir = prepare_output(config)?;
    let problem = config.static_problem()?;
    let count = config.count.expect("eigen resolves a count");
    let report = stability_spectrum(static_mesh(config)?, &problem.moduli, &config.run_options(), count)?;
    let rows: Vec<Vec<String>> = report
        .pairs
        .iter()
        .enumerate()
        .map(|(i, p)| {
            vec![
                i.to_string(),
                float(p.value),
                float(p.value / report.largest),
                u8::from(p.value <= RIGID_MODE_THRESHOLD * report.largest).to_string(),
            ]
        })
        .collect();
    write_csv(&dir.join("spectrum.csv"), config, &["index", "eigenvalue", "relative", "rigid"], &rows)?;
    let width = report.pairs.len().saturating_sub(1).to_string().len().max(3);
    for (i, p) in report.pairs.iter().enumerate() {
        write_vtk(
            &dir.join(format!("mode_{i:0width$}.vtk")),
            config,
            &report.disc.mesh,
            &[PointData::Vector("mode", p.vector.as_slice())],
        )?;
    }
    write_summary(
        dir,
        config,
        json!({
            "dofs": report.disc.dofs(),
            "largest_eigenvalue": report.largest,
            "rigid_mode_threshold": RIGID_MODE_THRESHOLD,
            "rigid_modes": report.rigid_modes,
            "eigenvalues": report.pairs.iter().map(|p| p.value).collect::<Vec<_>>(),
        }),
    )?;
    Ok(format!(
        "{} {}: {} dofs, {} rigid-body modes among the {} smallest eigenvalues",
        config.benchmark,
        config.run_options().method.label(),
        report.disc.dofs(),
        report.rigid_modes,
        report.pairs.len()
    ))
}

pub fn cylinder(config: &RunConfig) -> Result<String, CliError> {
    let dir = prepare_output(config)?;
    let cyl = config.cylinder_config();
    let start = Instant::now();
    let (disc, results) = run_cylinder(&cyl, &config.run_options())?;
    let seconds = start.elapsed().as_secs_f64();
    let mut rows = Vec::new();
    for r in &results {
        for ((t, ua), ub) in r.times.iter().zip(&r.u_a).zip(&r.u_b) {
            rows.push(vec![float(r.mu0), float(r.mu1), float(*t), float(*ua), float(*ub)]);
        }
    }
    write_csv(&dir.join("history.csv"), config, &["mu0", "mu1", "t", "u_A", "u_B"], &rows)?;
    let finals: Vec<_> = results
        .iter()
        .map(|r| {
            json!({
                "mu0": r.mu0,
                "mu1": r.mu1,
                "t": r.times.last(),
                "u_A": r.u_a.last(),
                "u_B": r.u_b.last(),
                "max_newton_iterations": r.iterations.iter().max(),
            })
        })
        .collect();
    write_summary(
        dir,
        config,
        json!({
            "dofs": disc.dofs(),
            "final": finals,
            "timings": { "solve_seconds": config.record_timings.then_some(seconds) },
        }),
    )?;
    let mut msg = format!("cylinder: {} dofs", disc.dofs());
    for r in &results {
        msg.push_str(&format!(
            "\n  ({}, {}) t = {}: u_A = {:.6}, u_B = {:.6}",
            r.mu0,
            r.mu1,
            r.times.last().copied().unwrap_or(0.0),
            r.u_a.last().copied().unwrap_or(0.0),
            r.u_b.last().copied().unwrap_or(0.0)
        ));
    }
    Ok(msg)
}

pub fn mesh_gen(config: &RunConfig) -> Result<String, CliError> {
    let dir = prepare_output(config)?;
    let mesh = generate_mesh(&config.domain(), config.mesh_kind(), config.levels[0])?;
    let path = dir.join("mesh.txt");
    write_mesh(&path, config, &mesh)?;
    Ok(format!(
        "{}: {} nodes, {} triangles -> {}",
        config.benchmark,
        mesh.node_count(),
        mesh.triangles().len(),
        path.display()
    ))
}
