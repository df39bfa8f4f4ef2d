//! Executes a parsed configuration and writes its output files.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use fracbeam::bench::{
    convergence_reference, run_convergence_cell, run_eringen_case, run_sweep, run_validation, BenchSetup, ReportRow,
    CONVERGENCE_ALPHAS, CONVERGENCE_N_INF, ERINGEN_ELEMENTS, ERINGEN_H_OVER_LF,
};
use fracbeam::par::{self, Exec};
use fracbeam::{AssemblyOptions, FractionalParams, Mesh, Normalization, SolutionField};

use crate::config::{Command, ConfigError, RunConfig};
use crate::output::{field_csv, plot_blocks, report_csv, sig9, stress_csv, FieldRow};

/// Samples across the thickness in the stress table.
const STRESS_SAMPLES: usize = 21;

#[derive(Debug)]
pub enum CliError {
    Config(ConfigError),
    Numerical(fracbeam::Error),
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) | CliError::Io { .. } => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(e) => write!(f, "config error: {e}"),
            CliError::Numerical(e) => write!(f, "numerical failure: {e}"),
            CliError::Io { path, source } => write!(f, "{}: {source}", path.display()),
        }
    }
}

impl std::error::Error for CliError {}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e)
    }
}

impl From<fracbeam::Error> for CliError {
    fn from(e: fracbeam::Error) -> Self {
        CliError::Numerical(e)
    }
}

/// Files produced by a run, in the order they were written.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunSummary {
    pub files: Vec<PathBuf>,
    /// Short human-readable lines for the terminal.
    pub notes: Vec<String>,
}

fn exec_for(cfg: &RunConfig) -> Exec {
    if cfg.threads > 1 {
        Exec::Parallel
    } else {
        Exec::Sequential
    }
}

fn setup_for(cfg: &RunConfig) -> BenchSetup {
    BenchSetup {
        length: cfg.length,
        thickness: cfg.thickness,
        width: cfg.width,
        modulus: cfg.modulus,
        kind: cfg.element,
        opts: AssemblyOptions {
            gauss_order: cfg.gauss_order,
            partial: cfg.partial_horizon,
            far_field: cfg.far_field,
            exec: exec_for(cfg),
            ..AssemblyOptions::default()
        },
    }
}

struct Writer {
    dir: PathBuf,
    summary: RunSummary,
}

impl Writer {
    fn new(dir: PathBuf) -> Result<Self, CliError> {
        fs::create_dir_all(&dir).map_err(|source| CliError::Io { path: dir.clone(), source })?;
        Ok(Writer { dir, summary: RunSummary::default() })
    }

    fn put(&mut self, name: &str, text: &str) -> Result<(), CliError> {
        let path = self.dir.join(name);
        fs::write(&path, text).map_err(|source| CliError::Io { path: path.clone(), source })?;
        self.summary.files.push(path);
        Ok(())
    }
}

/// Runs `cfg`, resolving a relative output directory against `base`.
pub fn run(cfg: &RunConfig, base: &Path) -> Result<RunSummary, CliError> {
    let out = Path::new(&cfg.output);
    let dir = if out.is_absolute() { out.to_path_buf() } else { base.join(out) };
    let mut w = Writer::new(dir)?;
    par::with_threads(cfg.threads, || match cfg.command {
        Command::Solve => solve(cfg, &mut w),
        Command::Validate => validate(cfg, &mut w),
        Command::Converge => converge(cfg, &mut w),
        Command::Sweep => sweep(cfg, &mut w),
        Command::Eringen => eringen(cfg, &mut w),
    })?;
    Ok(w.summary)
}

fn first(v: &Option<Vec<f64>>) -> f64 {
    v.as_ref().and_then(|v| v.first().copied()).expect("validated by the parser")
}

fn solve(cfg: &RunConfig, w: &mut Writer) -> Result<(), CliError> {
    let setup = setup_for(cfg);
    let bc = cfg.bc.expect("validated by the parser");
    let load = cfg.load_case().expect("validated by the parser");
    let (alpha, lf) = (first(&cfg.alpha), first(&cfg.lf));
    let spec = setup.spec(bc, load, FractionalParams::new(alpha, lf)?)?;
    let ne = cfg.ne.unwrap_or_else(|| setup.elements_for(lf, cfg.n_inf));
    let mesh = Mesh::new(cfg.length, ne, cfg.element)?;
    let start = std::time::Instant::now();
    let sol = SolutionField::solve(&mesh, &spec, cfg.mode, setup.opts)?;
    let runtime_s = start.elapsed().as_secs_f64();

    let norm = Normalization::for_case(bc, load);
    let scale = norm.deflection_factor(&spec)?;
    let rig = spec.rigidity();
    let strains = sol.generalized_strains_many(mesh.nodes())?;
    let (ws, slopes, us) = (sol.nodal_deflection(), sol.nodal_slope(), sol.nodal_axial());
    let rows: Vec<FieldRow> = mesh
        .nodes()
        .iter()
        .enumerate()
        .map(|(i, &x)| FieldRow {
            x,
            w: ws[i],
            w_norm: scale * ws[i],
            dwdx: slopes[i],
            u: us[i],
            n: rig.ea * strains[i][0],
            m: -rig.ei * strains[i][1],
        })
        .collect();
    w.put("field.csv", &field_csv(&rows))?;

    let mid = 0.5 * cfg.length;
    let sfac = norm.stress_factor(&spec);
    let mut stress = Vec::with_capacity(STRESS_SAMPLES);
    for k in 0..STRESS_SAMPLES {
        let x3 = cfg.thickness * (k as f64 / (STRESS_SAMPLES - 1) as f64 - 0.5);
        stress.push((x3, sfac * sol.strain_stress(mid, x3)?.1));
    }
    w.put("stress.csv", &stress_csv(&stress))?;

    let (_, wmax) = sol.max_deflection();
    let row = ReportRow {
        alpha,
        lf,
        ne,
        element: cfg.element,
        w_max_norm: scale * wmax,
        err_rel: None,
        stress_err_rel: None,
        reference: None,
        runtime_s,
    };
    w.put("report.csv", &report_csv(&[row], cfg.timing))?;
    let curve = rows.iter().map(|r| (r.x / cfg.length, r.w_norm)).collect();
    w.put("deflection.dat", &plot_blocks(&[(format!("alpha={} lf={}", sig9(alpha), sig9(lf)), curve)]))?;
    w.summary.notes.push(format!("max normalized deflection ({norm}): {}", sig9(scale * wmax)));
    Ok(())
}

fn validate(cfg: &RunConfig, w: &mut Writer) -> Result<(), CliError> {
    let setup = setup_for(cfg);
    let load = cfg.load_case().expect("validated by the parser");
    let alphas = cfg.alpha.clone().unwrap_or_else(|| fracbeam::bench::VALIDATION_ALPHAS.to_vec());
    let lfs = cfg
        .lf
        .clone()
        .unwrap_or_else(|| fracbeam::bench::VALIDATION_LF.iter().map(|f| f * cfg.length).collect());
    let cells: Vec<(f64, f64)> = lfs.iter().flat_map(|&lf| alphas.iter().map(move |&a| (a, lf))).collect();
    let rows = par::map_indexed(exec_for(cfg), cells.len(), |i| run_validation(&setup, load, cells[i].0, cells[i].1))
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;
    w.put("report.csv", &report_csv(&rows, cfg.timing))?;
    let worst = rows.iter().filter_map(|r| r.err_rel).fold(0.0, f64::max);
    let worst_stress = rows.iter().filter_map(|r| r.stress_err_rel).fold(0.0, f64::max);
    w.summary.notes.push(format!("max deflection error {}, max stress error {}", sig9(worst), sig9(worst_stress)));
    Ok(())
}

fn converge(cfg: &RunConfig, w: &mut Writer) -> Result<(), CliError> {
    let setup = setup_for(cfg);
    let alphas = cfg.alpha.clone().unwrap_or_else(|| CONVERGENCE_ALPHAS.to_vec());
    let lfs = cfg.lf.clone().expect("validated by the parser");
    let mut cells = Vec::new();
    for &lf in &lfs {
        for &n in &CONVERGENCE_N_INF {
            for &a in &alphas {
                cells.push((a, lf, n));
            }
        }
    }
    let rows = par::map_indexed(exec_for(cfg), cells.len(), |i| {
        let (a, lf, n) = cells[i];
        run_convergence_cell(&setup, a, lf, n)
    })
    .into_iter()
    .collect::<Result<Vec<_>, _>>()?;
    w.put("report.csv", &report_csv(&rows, cfg.timing))?;

    let mut blocks = Vec::new();
    for &lf in &lfs {
        for &a in &alphas {
            let points = rows
                .iter()
                .zip(&cells)
                .filter(|(_, c)| c.0 == a && c.1 == lf)
                .map(|(r, c)| (c.2 as f64, r.w_max_norm))
                .collect();
            blocks.push((format!("alpha={} lf={}", sig9(a), sig9(lf)), points));
        }
    }
    w.put("convergence.dat", &plot_blocks(&blocks))?;
    let tabulated = cells
        .iter()
        .filter(|&&(a, lf, n)| convergence_reference(cfg.element, cfg.length / lf, n, a).is_some())
        .count();
    if let Some(worst) = rows.iter().filter_map(|r| r.err_rel).reduce(f64::max) {
        w.summary.notes.push(format!("{tabulated} tabulated cells, max relative deviation {}", sig9(worst)));
    }
    Ok(())
}

fn sweep(cfg: &RunConfig, w: &mut Writer) -> Result<(), CliError> {
    let setup = setup_for(cfg);
    let bc = cfg.bc.expect("validated by the parser");
    let load = cfg.load_case().expect("validated by the parser");
    let alphas = cfg.alpha.clone().expect("validated by the parser");
    let lfs = cfg.lf.clone().expect("validated by the parser");
    let report = run_sweep(&setup, bc, load, &alphas, &lfs, cfg.n_inf, exec_for(cfg))?;
    w.put("report.csv", &report_csv(&report.report.rows, cfg.timing))?;
    let blocks: Vec<(String, Vec<(f64, f64)>)> = report
        .curves
        .iter()
        .map(|c| {
            let pts = c.points.iter().map(|&(x, v)| (x / cfg.length, v)).collect();
            (format!("alpha={} lf={}", sig9(c.alpha), sig9(c.lf)), pts)
        })
        .collect();
    w.put("deflection.dat", &plot_blocks(&blocks))?;
    w.summary.notes.push(format!("{} cells solved", report.report.rows.len()));
    Ok(())
}

fn eringen(cfg: &RunConfig, w: &mut Writer) -> Result<(), CliError> {
    let setup = setup_for(cfg);
    let ne = cfg.ne.unwrap_or(ERINGEN_ELEMENTS);
    let rows = ERINGEN_H_OVER_LF
        .iter()
        .map(|&r| run_eringen_case(&setup, r, ne))
        .collect::<Result<Vec<_>, _>>()?;
    w.put("report.csv", &report_csv(&rows, cfg.timing))?;
    let pts = ERINGEN_H_OVER_LF.iter().zip(&rows).map(|(&r, row)| (r, row.w_max_norm)).collect();
    w.put("eringen.dat", &plot_blocks(&[("h/lf tip-deflection".to_string(), pts)]))?;
    Ok(())
}
