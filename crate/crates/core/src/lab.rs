//! Experiment dispatch for the command line: runs a config, writes the JSON
//! report, per-level CSVs and a gnuplot script, and maps outcomes to exit
//! codes.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use crate::config::{ExperimentKind, InitialData, LabConfig};
use crate::convexity::shape_samples;
use crate::error::{Error, Result};
use crate::geometry::rasterize;
use crate::homotopy::{
    epsilon_sensitivity, poisson_data, resolve_epsilon, run_borell_full, run_harmonic_homotopy,
    run_initial_data_homotopy, run_theorem12_full,
};
use crate::identities::{verify_identities, IdentityReport};
use crate::pde::io::{write_field_binary, write_field_csv};
use crate::pde::{solve_heat, ScalarField, SpaceTimeSolution};
use crate::report::{ExperimentReport, LevelEntry, PositivitySummary};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_ANALYSIS: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;

pub const WORKERS_ENV: &str = "LAB_WORKERS";

/// Exit code for an error: 3 for solver and output failures, 1 for bad
/// configuration or arguments, 2 for everything raised by the analysis.
pub fn exit_code(err: &Error) -> i32 {
    if err.is_solver_error() {
        return EXIT_SOLVER;
    }
    match err {
        Error::Config { .. } | Error::InvalidArgument(_) | Error::DegenerateBody(_) | Error::ResolutionTooCoarse(_) => {
            EXIT_USAGE
        }
        _ => EXIT_ANALYSIS,
    }
}

/// Worker count: the flag, else the config, else `LAB_WORKERS`, else all cores.
pub fn resolve_workers(flag: Option<usize>, config: Option<usize>) -> Result<Option<usize>> {
    if let Some(w) = flag.or(config) {
        return if w == 0 {
            Err(Error::invalid("workers must be at least 1"))
        } else {
            Ok(Some(w))
        };
    }
    match std::env::var(WORKERS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(w) if w > 0 => Ok(Some(w)),
            _ => Err(Error::invalid(format!(
                "{WORKERS_ENV} must be a positive integer, got `{v}`"
            ))),
        },
        Err(_) => Ok(None),
    }
}

/// Runs `f` on a pool of `workers` threads (the global pool when `None`).
pub fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::invalid(format!("cannot start {n} workers: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

#[derive(Clone, Debug)]
pub struct Outcome {
    pub pass: bool,
    pub exit_code: i32,
    pub report_path: PathBuf,
    /// Every file written, report first.
    pub files: Vec<PathBuf>,
    pub failures: Vec<String>,
}

struct Output {
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl Output {
    /// Creates the directory and checks it is writable before any work starts.
    fn open(dir: &Path, report_name: &str) -> Result<Self> {
        std::fs::create_dir_all(dir).map_err(|e| Error::Io(format!("cannot create {}: {e}", dir.display())))?;
        let probe = dir.join(report_name);
        File::create(&probe).map_err(|e| Error::Io(format!("cannot write {}: {e}", probe.display())))?;
        Ok(Output {
            dir: dir.to_path_buf(),
            files: vec![probe],
        })
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    fn text(&mut self, name: &str, body: &str) -> Result<()> {
        let path = self.path(name);
        std::fs::write(&path, body).map_err(|e| Error::Io(format!("cannot write {}: {e}", path.display())))?;
        if !self.files.contains(&path) {
            self.files.push(path);
        }
        Ok(())
    }

    fn csv(&mut self, name: &str, header: &str, rows: impl IntoIterator<Item = String>) -> Result<()> {
        let path = self.path(name);
        let mut w = BufWriter::new(File::create(&path)?);
        writeln!(w, "{header}")?;
        for r in rows {
            writeln!(w, "{r}")?;
        }
        w.flush()?;
        self.files.push(path);
        Ok(())
    }

    fn field(&mut self, name: &str, field: &ScalarField) -> Result<()> {
        let csv = self.path(&format!("{name}.csv"));
        let bin = self.path(&format!("{name}.bin"));
        write_field_csv(field, &csv)?;
        write_field_binary(field, &bin)?;
        self.files.push(csv);
        self.files.push(bin);
        Ok(())
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn opt_usize(v: Option<usize>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn level_name(prefix: &str, c: f64) -> String {
    format!("{prefix}level_{c:.3}.csv")
}

fn write_levels(out: &mut Output, prefix: &str, levels: &[LevelEntry]) -> Result<Vec<String>> {
    let mut names = Vec::new();
    for l in levels {
        let name = level_name(prefix, l.c);
        out.csv(
            &name,
            "t,rank,rank_relaxed,min_phi,min_gauss,min_eigenvalue",
            l.min_rank_series.iter().map(|p| {
                format!(
                    "{},{},{},{},{},{}",
                    p.t,
                    opt_usize(p.rank),
                    opt_usize(p.rank_relaxed),
                    opt(p.min_phi),
                    opt(p.min_gauss),
                    opt(p.min_eigenvalue)
                )
            }),
        )?;
        names.push(name);
    }
    Ok(names)
}

fn write_positivity(out: &mut Output, name: &str, p: &PositivitySummary) -> Result<()> {
    out.csv(
        name,
        "t,min_ut,min_grad",
        p.series.iter().map(|e| format!("{},{},{}", e[0], e[1], e[2])),
    )
}

fn write_shapes(out: &mut Output, solution: &SpaceTimeSolution, cfg: &LabConfig) -> Result<()> {
    let a = &cfg.run.analysis;
    for (k, c) in a.ladder().into_iter().enumerate() {
        let samples = shape_samples(solution, c, a.probes, a.seed.wrapping_add(k as u64))?;
        out.csv(
            &format!("shape_{c:.3}.csv"),
            "x,y,t,level,eig1,eig2,sigma1,sigma2,gauss,W_hat",
            samples.iter().map(|s| {
                let r = &s.report;
                let e = |i: usize| r.eigenvalues.get(i).copied().unwrap_or(f64::NAN);
                let g = |i: usize| r.sigma.get(i).copied().unwrap_or(f64::NAN);
                format!(
                    "{},{},{},{},{},{},{},{},{},{}",
                    s.x,
                    s.y,
                    s.t,
                    s.level,
                    e(0),
                    e(1),
                    g(0),
                    g(1),
                    r.gauss,
                    r.w
                )
            }),
        )?;
    }
    Ok(())
}

fn gnuplot_levels(script: &mut String, files: &[String], title: &str) {
    if files.is_empty() {
        return;
    }
    let _ = writeln!(script, "set title '{title}: smallest principal curvature'");
    let _ = writeln!(script, "set xlabel 't'; set ylabel 'min eigenvalue'");
    let plots: Vec<String> = files
        .iter()
        .map(|f| {
            format!(
                "'{f}' using 1:6 with linespoints title '{}'",
                f.trim_end_matches(".csv")
            )
        })
        .collect();
    let _ = writeln!(script, "plot {}", plots.join(", \\\n     "));
    let _ = writeln!(script, "pause -1");
}

fn gnuplot_header() -> String {
    "set datafile separator ','\nset key outside\nset grid\n".to_string()
}

fn gnuplot_positivity(script: &mut String, file: &str) {
    let _ = writeln!(script, "set title 'positivity'");
    let _ = writeln!(script, "set xlabel 't'; set ylabel 'minimum'; set logscale y");
    let _ = writeln!(
        script,
        "plot '{file}' using 1:2 with lines title 'min u_t', '{file}' using 1:3 with lines title 'min |grad u|'"
    );
    let _ = writeln!(script, "unset logscale y\npause -1");
}

fn finish(mut out: Output, mut report: ExperimentReport, cfg: &LabConfig, started: Instant) -> Result<Outcome> {
    report.params = cfg.params();
    report.wall_time = started.elapsed().as_secs_f64();
    let report_path = out.files[0].clone();
    std::fs::write(&report_path, report.to_json())
        .map_err(|e| Error::Io(format!("cannot write {}: {e}", report_path.display())))?;
    out.files.dedup();
    Ok(Outcome {
        pass: report.pass,
        exit_code: if report.pass { EXIT_PASS } else { EXIT_ANALYSIS },
        report_path,
        files: out.files,
        failures: report.failures,
    })
}

/// Runs the experiment `kind` described by `cfg`, writing into `out_dir`.
pub fn dispatch(cfg: &LabConfig, kind: ExperimentKind, out_dir: &Path) -> Result<Outcome> {
    if let Some(k) = cfg.experiment {
        if k != kind {
            return Err(Error::Config {
                line: 0,
                message: format!("config is for `{}` but `{}` was requested", k.name(), kind.name()),
            });
        }
    }
    let started = Instant::now();
    let mut out = Output::open(out_dir, "report.json")?;
    let ring = cfg.ring()?;
    let run = &cfg.run;
    let mut script = gnuplot_header();
    let report = match kind {
        ExperimentKind::Solve => {
            let grid = Arc::new(rasterize(&ring, run.grid.n, run.grid.padding)?);
            let (lo, hi) = (run.heat.outer_value, run.heat.inner_value);
            let u0 = match cfg.initial {
                InitialData::Zero => ScalarField::constant(grid.clone(), lo, lo, hi),
                InitialData::Poisson => poisson_data(&grid, run.poisson_c, run.heat.cg_tol)?,
            };
            let solution = solve_heat(&u0, &run.heat)?;
            let last = solution.final_slice();
            let mut report = ExperimentReport::new("solve", cfg.params());
            let (lo_v, hi_v) = last.interior_range();
            report.resolve("spacing", grid.spacing());
            report.resolve("interior_nodes", grid.interior_nodes().len());
            report.resolve("saved_slices", solution.len());
            report.resolve("final_time", *solution.times.last().unwrap_or(&0.0));
            report.resolve("final_min", lo_v);
            report.resolve("final_max", hi_v);
            if !solution
                .slices
                .iter()
                .all(|s| s.satisfies_maximum_principle(10.0 * run.heat.cg_tol))
            {
                report.fail("a saved slice violates the maximum principle");
            }
            out.field("initial", &u0)?;
            out.field("final", last)?;
            let _ = writeln!(script, "set title 'final slice'\nset view map\nsplot 'final.csv' using 1:2:3 with points palette pointsize 0.5 title 'u'\npause -1");
            report
        }
        ExperimentKind::Borell => {
            let (report, solution) = run_borell_full(&ring, run)?;
            let names = write_levels(&mut out, "", &report.per_level)?;
            if let Some(a) = &report.analysis {
                write_positivity(&mut out, "positivity.csv", &a.positivity)?;
            }
            write_shapes(&mut out, &solution, cfg)?;
            gnuplot_levels(&mut script, &names, "borell");
            gnuplot_positivity(&mut script, "positivity.csv");
            report
        }
        ExperimentKind::Theorem12 => {
            let grid = Arc::new(rasterize(&ring, run.grid.n, run.grid.padding)?);
            let u0 = poisson_data(&grid, run.poisson_c, run.heat.cg_tol)?;
            out.field("initial", &u0)?;
            let (report, solution) = run_theorem12_full(u0, run)?;
            let names = write_levels(&mut out, "", &report.per_level)?;
            if let Some(a) = &report.analysis {
                write_positivity(&mut out, "positivity.csv", &a.positivity)?;
                gnuplot_levels(&mut script, &names, "theorem12");
                gnuplot_positivity(&mut script, "positivity.csv");
            }
            if let Some(solution) = &solution {
                write_shapes(&mut out, solution, cfg)?;
            }
            report
        }
        ExperimentKind::HarmonicHomotopy => {
            let report = run_harmonic_homotopy(&ring, run)?;
            out.csv(
                "steps.csv",
                "index,t,pass,min_curvature,spatial_violation,skipped_probes,reference_error",
                report.steps.iter().map(|s| {
                    format!(
                        "{},{},{},{},{},{},{}",
                        s.index,
                        s.parameter,
                        s.pass,
                        opt(s.min_curvature),
                        opt(s.spatial_violation),
                        s.skipped_probes,
                        opt(s.reference_error)
                    )
                }),
            )?;
            let _ = writeln!(
                script,
                "set title 'harmonic homotopy'\nset xlabel 't'; set ylabel 'min level-curve curvature'\nplot 'steps.csv' using 2:4 with linespoints title 'min curvature'\npause -1"
            );
            report
        }
        ExperimentKind::DataHomotopy => {
            let mut report = run_initial_data_homotopy(&ring, run)?;
            if cfg.sensitivity && !report.steps.is_empty() {
                let (rerun, changed) = epsilon_sensitivity(&ring, run, &report)?;
                report.resolve("sensitivity_epsilon", 2.0 * resolve_epsilon(&ring, run));
                report.resolve(
                    "sensitivity_pass",
                    rerun.steps.iter().map(|s| s.pass).collect::<Vec<_>>(),
                );
                report.resolve(
                    "sensitivity_min_curvature",
                    rerun.steps.iter().map(|s| s.min_curvature).collect::<Vec<_>>(),
                );
                report.resolve("sensitivity_changed", &changed);
                if !changed.is_empty() {
                    report.fail(format!("verdict changes at 2ε for s = {changed:?}"));
                }
            }
            out.csv(
                "steps.csv",
                "index,s,pass,min_curvature,min_gauss,spatial_violation,reference_error",
                report.steps.iter().map(|s| {
                    format!(
                        "{},{},{},{},{},{},{}",
                        s.index,
                        s.parameter,
                        s.pass,
                        opt(s.min_curvature),
                        opt(s.min_gauss),
                        opt(s.spatial_violation),
                        opt(s.reference_error)
                    )
                }),
            )?;
            let mut all = Vec::new();
            for s in &report.steps {
                if let Some(a) = &s.analysis {
                    let prefix = format!("step{:02}_", s.index);
                    all.extend(write_levels(&mut out, &prefix, &a.per_level)?);
                    write_positivity(&mut out, &format!("{prefix}positivity.csv"), &a.positivity)?;
                }
            }
            let _ = writeln!(
                script,
                "set title 'data homotopy'\nset xlabel 's'; set ylabel 'min principal curvature'\nplot 'steps.csv' using 2:4 with linespoints title 'min curvature'\npause -1"
            );
            let last: Vec<String> = all
                .iter()
                .filter(|f| f.starts_with(&format!("step{:02}_", run.s_steps - 1)))
                .cloned()
                .collect();
            gnuplot_levels(&mut script, &last, "s = 1");
            report
        }
    };
    out.text("plot.gp", &script)?;
    finish(out, report, cfg, started)
}

/// Runs the identity sweep and writes `identities.json` when `out_dir` is given.
pub fn run_identities(first: u64, seeds: u64, out_dir: Option<&Path>) -> Result<(IdentityReport, i32)> {
    let report = verify_identities(first, seeds)?;
    if let Some(dir) = out_dir {
        let out = Output::open(dir, "identities.json")?;
        let json = serde_json::to_string_pretty(&report).expect("identity report serializes");
        std::fs::write(&out.files[0], json)?;
    }
    let code = if report.pass { EXIT_PASS } else { EXIT_ANALYSIS };
    Ok((report, code))
}
