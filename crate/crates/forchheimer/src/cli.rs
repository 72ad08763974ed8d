//! Batch front end: flat INI-style config ingestion, mode dispatch, and
//! artifact emission (VTK fields, schema-versioned CSVs, flat report
//! files).

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use crate::assembly::{write_matrix_market, CoefficientField, MixedSystem};
use crate::error::{Error, Result};
use crate::grid::{BoundaryData, Mesh, Rect, ScalarField};
use crate::stationary::{data_norm, solve_stationary, ContinuationSchedule, SolveReport};
use crate::transient::{
    check_dt_admissible, run as run_transient, LipschitzConstants, TimeGrid, Trajectory,
    TransientProblem,
};
use crate::verify::{convergence_study, inequality_sweep, ManufacturedCase};
use crate::vtk::write_vtk;

/// Run mode selected in the `[run]` section.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Stationary,
    Transient,
    Study,
    Sweep,
}

/// Which manufactured benchmark a study run uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StudyCase {
    Darcy,
    Nonlinear,
}

/// Fully validated run description.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub mode: Mode,
    pub seed: u64,
    pub tol: f64,
    pub nx: usize,
    pub ny: usize,
    pub domain: Rect,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub phi: f64,
    pub source_value: f64,
    pub boundary_value: f64,
    pub eps0: f64,
    pub factor: f64,
    pub max_stages: usize,
    /// 0 means "derive from the data norm".
    pub stage_tol: f64,
    pub horizon: f64,
    pub steps: usize,
    pub gamma_lipschitz: f64,
    pub initial_value: f64,
    pub study_meshes: Vec<usize>,
    pub study_case: StudyCase,
    pub sweep_samples: usize,
}

/// Parsed `[section] key = value` text with line numbers retained for
/// error reporting.
struct Ini {
    values: BTreeMap<(String, String), (usize, String)>,
}

impl Ini {
    fn parse(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        let mut section = String::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = match raw.find('#') {
                Some(p) => &raw[..p],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let Some(name) = rest.strip_suffix(']') else {
                    return Err(Error::Parse {
                        line: line_no,
                        message: "unterminated section header".into(),
                    });
                };
                section = name.trim().to_string();
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("expected `key = value`, got `{line}`"),
                });
            };
            if section.is_empty() {
                return Err(Error::Parse {
                    line: line_no,
                    message: "key before any [section] header".into(),
                });
            }
            values.insert(
                (section.clone(), key.trim().to_string()),
                (line_no, value.trim().to_string()),
            );
        }
        Ok(Self { values })
    }

    fn get(&self, section: &str, key: &str) -> Option<&(usize, String)> {
        self.values.get(&(section.to_string(), key.to_string()))
    }

    fn f64_or(&self, section: &str, key: &str, default: f64) -> Result<f64> {
        match self.get(section, key) {
            None => Ok(default),
            Some((line, raw)) => raw.parse::<f64>().map_err(|_| Error::Parse {
                line: *line,
                message: format!("`{section}.{key}` is not a number: `{raw}`"),
            }),
        }
    }

    fn usize_or(&self, section: &str, key: &str, default: usize) -> Result<usize> {
        match self.get(section, key) {
            None => Ok(default),
            Some((line, raw)) => raw.parse::<usize>().map_err(|_| Error::Parse {
                line: *line,
                message: format!("`{section}.{key}` is not a nonnegative integer: `{raw}`"),
            }),
        }
    }

    fn string_or(&self, section: &str, key: &str, default: &str) -> String {
        self.get(section, key)
            .map(|(_, v)| v.clone())
            .unwrap_or_else(|| default.to_string())
    }
}

/// Parse and validate a config text into a RunConfig. All model
/// assumptions (coefficient positivity, homogeneous transient boundary,
/// time-step smallness) are enforced here, not at solve time.
pub fn ingest(text: &str) -> Result<RunConfig> {
    let ini = Ini::parse(text)?;

    let mode = match ini.string_or("run", "mode", "").as_str() {
        "stationary" => Mode::Stationary,
        "transient" => Mode::Transient,
        "study" => Mode::Study,
        "sweep" => Mode::Sweep,
        "" => {
            return Err(Error::Validation("missing required key run.mode".into()));
        }
        other => {
            return Err(Error::Validation(format!(
                "unknown run.mode `{other}` (expected stationary|transient|study|sweep)"
            )));
        }
    };

    let x0 = ini.f64_or("mesh", "x0", 0.0)?;
    let y0 = ini.f64_or("mesh", "y0", 0.0)?;
    let x1 = ini.f64_or("mesh", "x1", 1.0)?;
    let y1 = ini.f64_or("mesh", "y1", 1.0)?;
    if !(x1 > x0 && y1 > y0) {
        return Err(Error::Validation("mesh rectangle is degenerate".into()));
    }

    let study_meshes: Vec<usize> = {
        let raw = ini.string_or("study", "meshes", "4,8,16");
        let mut out = Vec::new();
        for part in raw.split(',') {
            let n: usize = part.trim().parse().map_err(|_| {
                Error::Validation(format!("study.meshes entry `{part}` is not an integer"))
            })?;
            out.push(n);
        }
        out
    };
    let study_case = match ini.string_or("study", "case", "nonlinear").as_str() {
        "darcy" => StudyCase::Darcy,
        "nonlinear" => StudyCase::Nonlinear,
        other => {
            return Err(Error::Validation(format!(
                "unknown study.case `{other}` (expected darcy|nonlinear)"
            )));
        }
    };

    let config = RunConfig {
        mode,
        seed: ini.usize_or("run", "seed", 0)? as u64,
        tol: ini.f64_or("run", "tol", 1e-10)?,
        nx: ini.usize_or("mesh", "nx", 4)?,
        ny: ini.usize_or("mesh", "ny", 4)?,
        domain: Rect::new(x0, y0, x1, y1)?,
        alpha: ini.f64_or("coefficients", "alpha", 1.0)?,
        beta: ini.f64_or("coefficients", "beta", 1.0)?,
        gamma: ini.f64_or("coefficients", "gamma", 1.0)?,
        phi: ini.f64_or("coefficients", "phi", 1.0)?,
        source_value: ini.f64_or("source", "value", 0.0)?,
        boundary_value: ini.f64_or("boundary", "value", 0.0)?,
        eps0: ini.f64_or("schedule", "eps0", 1.0)?,
        factor: ini.f64_or("schedule", "factor", 0.25)?,
        max_stages: ini.usize_or("schedule", "max_stages", 12)?,
        stage_tol: ini.f64_or("schedule", "stage_tol", 0.0)?,
        horizon: ini.f64_or("time", "horizon", 1.0)?,
        steps: ini.usize_or("time", "steps", 10)?,
        gamma_lipschitz: ini.f64_or("time", "gamma_lipschitz", 0.0)?,
        initial_value: ini.f64_or("initial", "value", 0.0)?,
        study_meshes,
        study_case,
        sweep_samples: ini.usize_or("sweep", "samples", 100_000)?,
    };

    validate(&config)?;
    Ok(config)
}

fn validate(c: &RunConfig) -> Result<()> {
    if c.nx == 0 || c.ny == 0 {
        return Err(Error::Validation("mesh.nx and mesh.ny must be at least 1".into()));
    }
    if !(c.tol > 0.0) {
        return Err(Error::Validation("run.tol must be positive".into()));
    }
    if !(c.alpha > 0.0) {
        return Err(Error::Validation(
            "alpha lower bound must be positive (coefficient bounded below away from zero)".into(),
        ));
    }
    if !(c.beta > 0.0) {
        return Err(Error::Validation(
            "beta lower bound must be positive (coefficient bounded below away from zero)".into(),
        ));
    }
    if !(c.gamma > 0.0) || !(c.phi > 0.0) {
        return Err(Error::Validation(
            "gamma and phi lower bounds must be positive".into(),
        ));
    }
    if !(c.eps0 > 0.0) || !(c.factor > 0.0 && c.factor < 1.0) || c.max_stages == 0 {
        return Err(Error::Validation(
            "schedule requires eps0 > 0, factor in (0,1), max_stages >= 1".into(),
        ));
    }
    if c.stage_tol < 0.0 {
        return Err(Error::Validation("schedule.stage_tol must be nonnegative".into()));
    }
    match c.mode {
        Mode::Transient => {
            if c.boundary_value != 0.0 {
                return Err(Error::Validation(
                    "transient runs require homogeneous boundary data (nonzero traces \
                     are only admitted in single-step solves)"
                        .into(),
                ));
            }
            if !(c.horizon > 0.0) || c.steps == 0 {
                return Err(Error::Validation(
                    "time.horizon must be positive and time.steps at least 1".into(),
                ));
            }
            let problem = build_transient(c)?;
            let (ok, c_dt) = check_dt_admissible(&problem);
            if !ok {
                return Err(Error::Validation(format!(
                    "time step too large: C*dt = {c_dt:.6} >= 1 violates the step-size \
                     smallness condition; increase time.steps"
                )));
            }
        }
        Mode::Study => {
            if c.study_meshes.len() < 3 {
                return Err(Error::Validation("study.meshes needs at least 3 entries".into()));
            }
            if c.study_meshes.iter().any(|n| *n == 0) {
                return Err(Error::Validation("study.meshes entries must be positive".into()));
            }
        }
        Mode::Sweep => {
            if c.sweep_samples == 0 {
                return Err(Error::Validation("sweep.samples must be at least 1".into()));
            }
        }
        Mode::Stationary => {}
    }
    Ok(())
}

fn build_mesh(c: &RunConfig) -> Result<Arc<Mesh>> {
    Mesh::structured(c.nx, c.ny, c.domain)
}

fn build_stationary(c: &RunConfig) -> Result<MixedSystem> {
    let mesh = build_mesh(c)?;
    let coeffs = CoefficientField::constant(&mesh, c.alpha, c.beta, c.gamma, c.phi)?;
    MixedSystem::stationary(
        coeffs,
        BoundaryData::constant(&mesh, c.boundary_value),
        ScalarField::constant(&mesh, c.source_value),
        0.0,
    )
}

fn build_transient(c: &RunConfig) -> Result<TransientProblem> {
    let mesh = build_mesh(c)?;
    let coeffs = CoefficientField::constant(&mesh, c.alpha, c.beta, c.gamma, c.phi)?;
    TransientProblem::new(
        TimeGrid::new(c.horizon, c.steps)?,
        Trajectory::Constant(coeffs),
        LipschitzConstants { gamma: c.gamma_lipschitz, ..Default::default() },
        Trajectory::Constant(ScalarField::constant(&mesh, c.source_value)),
        Trajectory::Constant(BoundaryData::homogeneous(&mesh)),
        ScalarField::constant(&mesh, c.initial_value),
    )
}

fn schedule_for(c: &RunConfig, sys: &MixedSystem) -> Result<ContinuationSchedule> {
    let stage_tol = if c.stage_tol > 0.0 {
        c.stage_tol
    } else {
        1e-6 * (1.0 + data_norm(sys))
    };
    ContinuationSchedule::new(c.eps0, c.factor, c.max_stages, stage_tol)
}

fn report_lines(report: &SolveReport) -> String {
    let mut out = String::new();
    out.push_str(&format!("converged = {}\n", report.converged));
    out.push_str(&format!("stages = {}\n", report.stages.len()));
    for (i, st) in report.stages.iter().enumerate() {
        out.push_str(&format!(
            "stage_{i} = eps {:.6e}, newton_iters {}, final_residual {:.6e}\n",
            st.eps, st.newton_iters, st.final_residual
        ));
    }
    out.push_str(&format!("picard_sweeps = {}\n", report.picard_sweeps));
    out.push_str(&format!("norm_m_w3div = {:.12e}\n", report.monitored_norms.m_w3div));
    out.push_str(&format!("norm_s_l32 = {:.12e}\n", report.monitored_norms.s_l32));
    out.push_str(&format!("div_defect_l32 = {:.12e}\n", report.monitored_norms.div_defect));
    out
}

fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    fs::write(path, contents)?;
    Ok(())
}

/// Execute a validated config, writing artifacts into `out_dir`.
/// Solver failures leave a FAILED marker next to any partial artifacts
/// and are returned to the caller for exit-status mapping.
pub fn execute(config: &RunConfig, out_dir: &Path, verbose: bool) -> Result<()> {
    fs::create_dir_all(out_dir)?;
    let result = execute_inner(config, out_dir, verbose);
    if let Err(err) = &result {
        let marker = out_dir.join("FAILED");
        let _ = fs::write(&marker, format!("{err}\n"));
    }
    result
}

fn execute_inner(config: &RunConfig, out_dir: &Path, verbose: bool) -> Result<()> {
    match config.mode {
        Mode::Stationary => {
            let sys = build_stationary(config)?;
            let schedule = schedule_for(config, &sys)?;
            if verbose {
                eprintln!(
                    "stationary solve: {}x{} mesh, eps0 {:.3e}, {} stages max",
                    config.nx, config.ny, schedule.eps0, schedule.max_stages
                );
            }
            let ((m, s), report) = solve_stationary(&sys, &schedule, config.tol)?;

            let mut vtk = Vec::new();
            write_vtk(&mut vtk, &sys.mesh, "stationary solution", &[("S", &s)], &[("m", &m)])?;
            write_file(&out_dir.join("solution.vtk"), &vtk)?;

            let mut exact = sys.clone();
            exact.eps = 0.0;
            let (jac, _) = exact.linearize(&m, &s)?;
            let mut mtx = Vec::new();
            write_matrix_market(&jac, &mut mtx)?;
            write_file(&out_dir.join("system.mtx"), &mtx)?;

            write_file(&out_dir.join("report.txt"), report_lines(&report).as_bytes())?;
        }
        Mode::Transient => {
            let problem = build_transient(config)?;
            if verbose {
                let (_, c_dt) = check_dt_admissible(&problem);
                eprintln!(
                    "transient run: {} steps, dt {:.6e}, C*dt {:.4}",
                    config.steps,
                    problem.time_grid.dt(),
                    c_dt
                );
            }
            let sol = run_transient(&problem, config.tol)?;

            let mut csv = String::new();
            csv.push_str("schema = 1\n");
            csv.push_str(
                "step,time,energy,flux_norm,increment,jump_surrogate,mass_defect\n",
            );
            for r in &sol.monitor.records {
                csv.push_str(&format!(
                    "{},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e}\n",
                    r.step, r.time, r.energy, r.flux_norm, r.increment, r.jump_surrogate,
                    r.mass_defect
                ));
            }
            write_file(&out_dir.join("monitor.csv"), csv.as_bytes())?;

            let (m, s) = sol.final_state();
            let mut vtk = Vec::new();
            write_vtk(
                &mut vtk,
                problem.mesh(),
                "transient final state",
                &[("S", s)],
                &[("m", m)],
            )?;
            write_file(&out_dir.join("final.vtk"), &vtk)?;

            let mut rep = String::new();
            rep.push_str("converged = true\n");
            rep.push_str(&format!("steps = {}\n", sol.monitor.records.len()));
            rep.push_str(&format!("c_dt = {:.12e}\n", sol.monitor.c_dt));
            rep.push_str(&format!("initial_energy = {:.12e}\n", sol.monitor.initial_energy));
            if let Some(last) = sol.monitor.records.last() {
                rep.push_str(&format!("final_energy = {:.12e}\n", last.energy));
            }
            rep.push_str(&format!("increment_sum = {:.12e}\n", sol.monitor.increment_sum()));
            rep.push_str(&format!(
                "max_mass_defect = {:.12e}\n",
                sol.monitor.max_mass_defect()
            ));
            write_file(&out_dir.join("report.txt"), rep.as_bytes())?;
        }
        Mode::Study => {
            let case = match config.study_case {
                StudyCase::Darcy => ManufacturedCase::sin_product(config.alpha, 0.0)?,
                StudyCase::Nonlinear => {
                    ManufacturedCase::sin_product(config.alpha, config.beta)?
                }
            };
            if verbose {
                eprintln!("convergence study on meshes {:?}", config.study_meshes);
            }
            let table = convergence_study(&case, &config.study_meshes, config.tol)?;

            let mut csv = String::new();
            csv.push_str("schema = 1\n");
            csv.push_str("h,n_flux_dofs,n_scalar_dofs,error_s,error_m,order_s,order_m\n");
            for r in &table.rows {
                csv.push_str(&format!(
                    "{:.12e},{},{},{:.12e},{:.12e},{:.4},{:.4}\n",
                    r.h, r.n_flux_dofs, r.n_scalar_dofs, r.error_s, r.error_m, table.order_s,
                    table.order_m
                ));
            }
            write_file(&out_dir.join("study.csv"), csv.as_bytes())?;

            let rep = format!(
                "converged = true\nmeshes = {}\norder_s = {:.6}\norder_m = {:.6}\n",
                table.rows.len(),
                table.order_s,
                table.order_m
            );
            write_file(&out_dir.join("report.txt"), rep.as_bytes())?;
        }
        Mode::Sweep => {
            if verbose {
                eprintln!(
                    "inequality sweep: {} samples, seed {}",
                    config.sweep_samples, config.seed
                );
            }
            let report = inequality_sweep(config.seed, config.sweep_samples)?;
            let mut csv = String::new();
            csv.push_str("schema = 1\n");
            csv.push_str("inequality,min_relative_slack\n");
            csv.push_str(&format!("lipschitz,{:.12e}\n", report.min_slack_lipschitz));
            csv.push_str(&format!(
                "vector_monotonicity,{:.12e}\n",
                report.min_slack_vector_monotonicity
            ));
            csv.push_str(&format!("holder,{:.12e}\n", report.min_slack_holder));
            csv.push_str(&format!(
                "sqrt_monotonicity,{:.12e}\n",
                report.min_slack_sqrt_monotonicity
            ));
            csv.push_str(&format!(
                "drag_monotonicity,{:.12e}\n",
                report.min_slack_drag_monotonicity
            ));
            write_file(&out_dir.join("sweep.csv"), csv.as_bytes())?;

            let rep = format!(
                "converged = true\nseed = {}\nsamples = {}\nworst_slack = {:.12e}\n",
                report.seed,
                report.samples,
                report.worst()
            );
            write_file(&out_dir.join("report.txt"), rep.as_bytes())?;
            if report.worst() < -1e-12 {
                return Err(Error::Validation(format!(
                    "inequality sweep found negative slack {:.3e}",
                    report.worst()
                )));
            }
        }
    }
    Ok(())
}

/// Exit code mapping: 0 success, 1 usage/configuration error, 2 solver
/// nonconvergence.
pub fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::Nonconvergence { .. } | Error::ContinuationExhausted { .. } => 2,
        _ => 1,
    }
}

/// Entry point shared by the binary: read config, apply overrides, run.
pub fn run_from_args(
    config_path: &Path,
    out_dir: Option<PathBuf>,
    seed: Option<u64>,
    verbose: bool,
) -> Result<()> {
    let text = fs::read_to_string(config_path)?;
    let mut config = ingest(&text)?;
    if let Some(s) = seed {
        config.seed = s;
    }
    let out = out_dir.unwrap_or_else(|| PathBuf::from("out"));
    execute(&config, &out, verbose)
}

/// Convenience used by tests: render a minimal config for a mode.
pub fn example_config(mode: &str) -> String {
    format!(
        "[run]\nmode = {mode}\ntol = 1e-10\n\n[mesh]\nnx = 2\nny = 2\n\n\
         [coefficients]\nalpha = 1.0\nbeta = 1.0\ngamma = 1.0\nphi = 1.0\n\n\
         [source]\nvalue = 1.0\n\n[boundary]\nvalue = 0.0\n\n\
         [time]\nhorizon = 0.4\nsteps = 4\n\n[sweep]\nsamples = 1000\n"
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_stationary_config_ingests() {
        let c = ingest(&example_config("stationary")).unwrap();
        assert_eq!(c.mode, Mode::Stationary);
        assert_eq!((c.nx, c.ny), (2, 2));
        assert_eq!(c.source_value, 1.0);
    }

    #[test]
    fn beta_zero_rejected_with_assumption_message() {
        let text = example_config("stationary").replace("beta = 1.0", "beta = 0.0");
        let err = ingest(&text).unwrap_err();
        match err {
            Error::Validation(msg) => {
                assert!(msg.contains("beta lower bound must be positive"), "{msg}");
            }
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn inadmissible_dt_rejected() {
        let text = example_config("transient")
            .replace("horizon = 0.4", "horizon = 4.0")
            .replace("steps = 4", "steps = 2"); // dt = 2, C*dt = 4
        let err = ingest(&text).unwrap_err();
        match err {
            Error::Validation(msg) => assert!(msg.contains("C*dt"), "{msg}"),
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn transient_nonzero_boundary_rejected() {
        let text = example_config("transient").replace(
            "[boundary]\nvalue = 0.0",
            "[boundary]\nvalue = 1.0",
        );
        let err = ingest(&text).unwrap_err();
        match err {
            Error::Validation(msg) => assert!(msg.contains("homogeneous"), "{msg}"),
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = ingest("[run\nmode = stationary\n").unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 1),
            other => panic!("expected parse error, got {other:?}"),
        }
        let err = ingest("[run]\nmode stationary\n").unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }
}
