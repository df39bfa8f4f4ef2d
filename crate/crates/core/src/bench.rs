//! Reference problems: manufactured solutions, the exponential-kernel
//! cantilever, the clamped-beam convergence table and parametric sweeps.

use std::time::Instant;

use crate::assembly::{AssemblyOptions, FarField, Mode, PartialHorizon};
use crate::beam::{BeamSpec, BoundaryCondition, FractionalParams, LoadCase};
use crate::error::{Error, Result};
use crate::fracops::{rc_derivative_oracle, PiecewisePoly, Poly};
use crate::mesh::{ElementKind, Mesh};
use crate::par::{self, Exec};
use crate::solve::{Normalization, SolutionField};

/// Fractional orders below this are flagged as outside the validated regime.
pub const VALIDATED_ALPHA_MIN: f64 = 0.3;

/// Geometry, material and discretization shared by a family of runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchSetup {
    pub length: f64,
    pub thickness: f64,
    pub width: f64,
    pub modulus: f64,
    pub kind: ElementKind,
    pub opts: AssemblyOptions,
}

impl Default for BenchSetup {
    fn default() -> Self {
        BenchSetup {
            length: 1.0,
            thickness: 0.01,
            width: 1.0,
            modulus: 30e9,
            kind: ElementKind::TwoNoded,
            opts: AssemblyOptions::default(),
        }
    }
}

impl BenchSetup {
    /// Horizon rounding and far-field quadrature under which the reference
    /// convergence table was produced. Its `N^inf` trend is mostly the
    /// rounding error of the horizon ends, which the default options remove.
    pub fn table_compatible(kind: ElementKind) -> Self {
        let mut setup = BenchSetup { kind, ..BenchSetup::default() };
        setup.opts.partial = PartialHorizon::Rounded;
        setup.opts.far_field = FarField::Gauss;
        setup
    }

    pub fn spec(&self, bc: BoundaryCondition, load: LoadCase, frac: FractionalParams) -> Result<BeamSpec> {
        BeamSpec::new(self.length, self.thickness, self.width, self.modulus, bc, load, frac)
    }

    /// `N_e = n_inf · L / l_f`, rounded to the nearest integer.
    pub fn elements_for(&self, lf: f64, n_inf: usize) -> usize {
        ((n_inf as f64) * self.length / lf).round().max(2.0) as usize
    }
}

/// Exact deflection of a manufactured case as a polynomial in `x`.
pub fn manufactured_poly(load: LoadCase, length: f64) -> Result<Poly> {
    let xi = match load {
        LoadCase::ManufacturedV1 => Poly::new(vec![0.0, 0.0, 0.0, 1.0, -3.0, 3.0, -1.0]).scale(length),
        LoadCase::ManufacturedV2 => {
            Poly::new(vec![0.0, 3.5, 0.0, -2.0, -4.0, 1.5, 1.0]).scale(length / 100.0)
        }
        other => return Err(Error::Unsupported(format!("'{}' is not a manufactured case", other.name()))),
    };
    Ok(xi.stretch(length))
}

pub fn manufactured_exact(load: LoadCase, x: f64, spec: &BeamSpec) -> Result<f64> {
    Ok(manufactured_poly(load, spec.length)?.eval(x))
}

/// Transverse forcing that makes the manufactured field an exact solution
/// of the fractional beam equation away from the ends (unit width).
/// Both cases use the sign convention `K X = F`, so at `α = 1` the forcing
/// equals `EI w''''` of the exact field.
pub fn manufactured_forcing(load: LoadCase, x: f64, spec: &BeamSpec) -> Result<f64> {
    let (l, h, e) = (spec.length, spec.thickness, spec.modulus);
    let xi = x / l;
    let a = spec.frac.alpha.value();
    let r = (spec.frac.lf / l).powi(2) * (1.0 - a) / (3.0 - a);
    match load {
        LoadCase::ManufacturedV1 => Ok(-(6.0 * e * h.powi(3) / l.powi(3)) * (1.0 - 5.0 * xi + 5.0 * xi * xi + 10.0 * r)),
        LoadCase::ManufacturedV2 => Ok((e * h.powi(3) / (1200.0 * l.powi(3)))
            * (360.0 * xi * xi + 180.0 * xi + 720.0 * r - 96.0)),
        other => Err(Error::Unsupported(format!("'{}' is not a manufactured case", other.name()))),
    }
}

/// A manufactured-solution problem with its boundary conditions and scaling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ManufacturedCase {
    pub load: LoadCase,
    pub bc: BoundaryCondition,
    pub normalization: Normalization,
    /// Acceptance bound on the relative error.
    pub tolerance: f64,
}

impl ManufacturedCase {
    pub fn new(load: LoadCase) -> Result<Self> {
        match load {
            LoadCase::ManufacturedV1 => Ok(ManufacturedCase {
                load,
                bc: BoundaryCondition::ClampedClamped,
                normalization: Normalization::ManufacturedV1,
                tolerance: 0.05,
            }),
            LoadCase::ManufacturedV2 => Ok(ManufacturedCase {
                load,
                bc: BoundaryCondition::SimplySupported,
                normalization: Normalization::ManufacturedV2,
                tolerance: 0.03,
            }),
            other => Err(Error::Unsupported(format!("'{}' is not a manufactured case", other.name()))),
        }
    }
}

/// One line of a benchmark report.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub alpha: f64,
    pub lf: f64,
    pub ne: usize,
    pub element: ElementKind,
    pub w_max_norm: f64,
    /// Relative deflection error against the exact or reference value.
    pub err_rel: Option<f64>,
    /// Relative error of the midspan stress profile (manufactured cases).
    pub stress_err_rel: Option<f64>,
    pub reference: Option<f64>,
    pub runtime_s: f64,
}

impl ReportRow {
    pub fn outside_validated_regime(&self) -> bool {
        self.alpha < VALIDATED_ALPHA_MIN
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct BenchReport {
    pub title: String,
    pub rows: Vec<ReportRow>,
}

impl BenchReport {
    pub fn max_error(&self) -> Option<f64> {
        self.rows.iter().filter_map(|r| r.err_rel).reduce(f64::max)
    }

    pub fn max_stress_error(&self) -> Option<f64> {
        self.rows.iter().filter_map(|r| r.stress_err_rel).reduce(f64::max)
    }

    pub fn runtime_s(&self) -> f64 {
        self.rows.iter().map(|r| r.runtime_s).sum()
    }
}

fn timed<T>(f: impl FnOnce() -> Result<T>) -> Result<(T, f64)> {
    let start = Instant::now();
    let v = f()?;
    Ok((v, start.elapsed().as_secs_f64()))
}

fn relative(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// `α × l_f/L` grid of the manufactured-solution validations.
pub const VALIDATION_ALPHAS: [f64; 3] = [0.7, 0.8, 0.9];
pub const VALIDATION_LF: [f64; 2] = [0.2, 0.1];
/// Stress samples across the thickness at midspan.
const STRESS_SAMPLES: usize = 11;

/// Solves a manufactured case on `N_e = 10 L/l_f` elements and measures the
/// max-norm errors of the nodal deflection and the midspan stress profile.
pub fn run_validation(setup: &BenchSetup, load: LoadCase, alpha: f64, lf: f64) -> Result<ReportRow> {
    let case = ManufacturedCase::new(load)?;
    let spec = setup.spec(case.bc, load, FractionalParams::new(alpha, lf)?)?;
    let ne = setup.elements_for(lf, 10);
    let mesh = Mesh::new(setup.length, ne, setup.kind)?;
    let (sol, runtime_s) = timed(|| SolutionField::solve(&mesh, &spec, Mode::Fractional, setup.opts))?;
    let scale = case.normalization.deflection_factor(&spec)?;
    let exact = manufactured_poly(load, spec.length)?;

    let w = sol.nodal_deflection();
    let mut err = 0.0f64;
    let mut peak = 0.0f64;
    let mut w_max = 0.0f64;
    for (&x, &wf) in mesh.nodes().iter().zip(&w) {
        let we = scale * exact.eval(x);
        err = err.max((scale * wf - we).abs());
        peak = peak.max(we.abs());
        if (scale * wf).abs() > w_max.abs() {
            w_max = scale * wf;
        }
    }

    let mid = 0.5 * spec.length;
    let slope = PiecewisePoly::global(&exact.derivative(), 0.0, spec.length);
    let kappa_exact = rc_derivative_oracle(&slope, mid, spec.resolve_horizon(mid)?, spec.frac.alpha)?;
    let [eps0, kappa] = sol.generalized_strains(mid)?;
    let sfac = case.normalization.stress_factor(&spec);
    let mut serr = 0.0f64;
    let mut speak = 0.0f64;
    for k in 0..STRESS_SAMPLES {
        let x3 = spec.thickness * (k as f64 / (STRESS_SAMPLES - 1) as f64 - 0.5);
        let se = -sfac * spec.modulus * x3 * kappa_exact;
        let sf = sfac * spec.modulus * (eps0 - x3 * kappa);
        serr = serr.max((sf - se).abs());
        speak = speak.max(se.abs());
    }

    Ok(ReportRow {
        alpha,
        lf,
        ne,
        element: setup.kind,
        w_max_norm: w_max,
        err_rel: Some(err / peak),
        stress_err_rel: Some(serr / speak),
        reference: Some(1.0),
        runtime_s,
    })
}

/// All `α × l_f` cells of one manufactured case, solved concurrently.
pub fn run_validation_grid(setup: &BenchSetup, load: LoadCase, exec: Exec) -> Result<BenchReport> {
    let cells: Vec<(f64, f64)> = VALIDATION_LF
        .iter()
        .flat_map(|&lf| VALIDATION_ALPHAS.iter().map(move |&a| (a, lf * setup.length)))
        .collect();
    let rows = par::map_indexed(exec, cells.len(), |i| run_validation(setup, load, cells[i].0, cells[i].1));
    Ok(BenchReport { title: format!("validation-{}", load.name()), rows: rows.into_iter().collect::<Result<_>>()? })
}

/// `h/l_f` values and reference tip deflections `w₀EI/(qL⁴)` of the
/// exponential-kernel cantilever with `L/h = 25`.
pub const ERINGEN_H_OVER_LF: [f64; 4] = [5.0, 10.0, 15.0, 20.0];
pub const ERINGEN_REFERENCE: [f64; 4] = [0.1169, 0.1131, 0.1119, 0.1113];
pub const ERINGEN_ASPECT: f64 = 25.0;
/// Default mesh of the exponential-kernel cantilever.
pub const ERINGEN_ELEMENTS: usize = 400;

/// Tip deflection of the exponential-kernel cantilever under a unit UDL.
pub fn run_eringen_case(setup: &BenchSetup, h_over_lf: f64, elements: usize) -> Result<ReportRow> {
    let h = setup.length / ERINGEN_ASPECT;
    let lf = h / h_over_lf;
    let spec = BeamSpec::new(
        setup.length,
        h,
        setup.width,
        setup.modulus,
        BoundaryCondition::Cantilever,
        LoadCase::Udl { q0: 1.0 },
        FractionalParams::new(1.0, lf)?,
    )?;
    let mesh = Mesh::new(setup.length, elements, setup.kind)?;
    let (sol, runtime_s) = timed(|| SolutionField::solve(&mesh, &spec, Mode::Eringen, setup.opts))?;
    let tip = *sol.nodal_deflection().last().expect("mesh has nodes");
    let w = tip * Normalization::Flexibility.deflection_factor(&spec)?;
    let reference = ERINGEN_H_OVER_LF
        .iter()
        .position(|&r| r == h_over_lf)
        .map(|i| ERINGEN_REFERENCE[i]);
    Ok(ReportRow {
        alpha: 1.0,
        lf,
        ne: elements,
        element: setup.kind,
        w_max_norm: w,
        err_rel: reference.map(|r| relative(w, r)),
        stress_err_rel: None,
        reference,
        runtime_s,
    })
}

pub fn run_eringen(setup: &BenchSetup, elements: usize) -> Result<BenchReport> {
    let rows = ERINGEN_H_OVER_LF
        .iter()
        .map(|&r| run_eringen_case(setup, r, elements))
        .collect::<Result<_>>()?;
    Ok(BenchReport { title: "eringen".to_string(), rows })
}

/// Horizon lengths `L/d`, elements per horizon and orders of the reference
/// clamped-beam convergence study.
pub const CONVERGENCE_LF_DIVISORS: [f64; 3] = [5.0, 10.0, 20.0];
pub const CONVERGENCE_N_INF: [usize; 4] = [2, 5, 10, 20];
pub const CONVERGENCE_ALPHAS: [f64; 4] = [1.0, 0.9, 0.8, 0.7];

/// Reference midspan `w̄`, indexed `[l_f][N^inf][α]`.
const CONVERGENCE_TWO_NODED: [[[f64; 4]; 4]; 3] = [
    [
        [1.0000, 1.0878, 1.1776, 1.2803],
        [1.0000, 1.0750, 1.1445, 1.2211],
        [1.0000, 1.0730, 1.1424, 1.2140],
        [1.0000, 1.0720, 1.1401, 1.2098],
    ],
    [
        [1.0000, 1.0602, 1.1218, 1.1907],
        [1.0000, 1.0344, 1.0667, 1.1007],
        [1.0000, 1.0275, 1.0523, 1.0778],
        [1.0000, 1.0243, 1.0456, 1.0673],
    ],
    [
        [1.0000, 1.0577, 1.1172, 1.1815],
        [1.0000, 1.0244, 1.0476, 1.0717],
        [1.0000, 1.0153, 1.0288, 1.0429],
        [1.0000, 1.0109, 1.0200, 1.0294],
    ],
];
const CONVERGENCE_THREE_NODED: [[[f64; 4]; 4]; 3] = [
    [
        [1.0000, 1.0868, 1.1773, 1.2862],
        [1.0000, 1.0743, 1.1468, 1.2251],
        [1.0000, 1.0719, 1.1410, 1.2132],
        [1.0000, 1.0709, 1.1388, 1.2088],
    ],
    [
        [1.0000, 1.0590, 1.1205, 1.1914],
        [1.0000, 1.0332, 1.0653, 1.0999],
        [1.0000, 1.0264, 1.0510, 1.0768],
        [1.0000, 1.0232, 1.0444, 1.0663],
    ],
    [
        [1.0000, 1.0565, 1.1155, 1.1805],
        [1.0000, 1.0232, 1.0461, 1.0705],
        [1.0000, 1.0141, 1.0275, 1.0418],
        [1.0000, 1.0098, 1.0188, 1.0285],
    ],
];

fn index_of(values: &[f64], v: f64) -> Option<usize> {
    values.iter().position(|&x| (x - v).abs() < 1e-9 * x.abs().max(1.0))
}

/// Reference `w̄` for `l_f = L/divisor`, or `None` outside the tabulated grid.
pub fn convergence_reference(kind: ElementKind, lf_divisor: f64, n_inf: usize, alpha: f64) -> Option<f64> {
    let i = index_of(&CONVERGENCE_LF_DIVISORS, lf_divisor)?;
    let j = CONVERGENCE_N_INF.iter().position(|&n| n == n_inf)?;
    let k = index_of(&CONVERGENCE_ALPHAS, alpha)?;
    Some(match kind {
        ElementKind::TwoNoded => CONVERGENCE_TWO_NODED[i][j][k],
        ElementKind::ThreeNoded => CONVERGENCE_THREE_NODED[i][j][k],
    })
}

/// Midspan `w̄` of the clamped beam under a UDL on `N_e = N^inf L / l_f` elements.
pub fn run_convergence_cell(setup: &BenchSetup, alpha: f64, lf: f64, n_inf: usize) -> Result<ReportRow> {
    let load = LoadCase::Udl { q0: 1.0 };
    let spec = setup.spec(BoundaryCondition::ClampedClamped, load, FractionalParams::new(alpha, lf)?)?;
    let ne = setup.elements_for(lf, n_inf);
    let mesh = Mesh::new(setup.length, ne, setup.kind)?;
    let (sol, runtime_s) = timed(|| SolutionField::solve(&mesh, &spec, Mode::Fractional, setup.opts))?;
    let (_, wmid, _) = sol.displacement_at(0.5 * setup.length)?;
    let w = wmid * Normalization::ClampedUdl.deflection_factor(&spec)?;
    let reference = convergence_reference(setup.kind, setup.length / lf, n_inf, alpha);
    Ok(ReportRow {
        alpha,
        lf,
        ne,
        element: setup.kind,
        w_max_norm: w,
        err_rel: reference.map(|r| relative(w, r)),
        stress_err_rel: None,
        reference,
        runtime_s,
    })
}

/// One column of the convergence table: `N^inf ∈ {2, 5, 10, 20}`.
pub fn run_convergence(setup: &BenchSetup, alpha: f64, lf: f64) -> Result<Vec<ReportRow>> {
    CONVERGENCE_N_INF.iter().map(|&n| run_convergence_cell(setup, alpha, lf, n)).collect()
}

/// The full reference grid for the setup's element kind, cells solved concurrently.
/// Rows are ordered by `l_f`, then `N^inf`, then `α` as in the table.
pub fn run_convergence_grid(setup: &BenchSetup, exec: Exec) -> Result<BenchReport> {
    let mut cells = Vec::new();
    for &d in &CONVERGENCE_LF_DIVISORS {
        for &n in &CONVERGENCE_N_INF {
            for &a in &CONVERGENCE_ALPHAS {
                cells.push((a, setup.length / d, n));
            }
        }
    }
    // largest systems first so the pool stays busy
    let mut order: Vec<usize> = (0..cells.len()).collect();
    order.sort_by_key(|&i| std::cmp::Reverse(setup.elements_for(cells[i].1, cells[i].2)));
    let solved = par::map_indexed(exec, order.len(), |k| {
        let (a, lf, n) = cells[order[k]];
        run_convergence_cell(setup, a, lf, n)
    });
    let mut rows: Vec<Option<ReportRow>> = vec![None; cells.len()];
    for (k, r) in solved.into_iter().enumerate() {
        rows[order[k]] = Some(r?);
    }
    Ok(BenchReport {
        title: format!("convergence-{}", setup.kind),
        rows: rows.into_iter().map(|r| r.expect("every cell solved")).collect(),
    })
}

/// Normalized deflection curve of one sweep cell.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub alpha: f64,
    pub lf: f64,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepReport {
    pub report: BenchReport,
    pub curves: Vec<Curve>,
}

/// Solves every `(α, l_f)` combination with `N_e = n_inf L / l_f` and collects
/// the signed normalized deflection of largest magnitude plus nodal curves.
#[allow(clippy::too_many_arguments)]
pub fn run_sweep(
    setup: &BenchSetup,
    bc: BoundaryCondition,
    load: LoadCase,
    alphas: &[f64],
    lfs: &[f64],
    n_inf: usize,
    exec: Exec,
) -> Result<SweepReport> {
    let cells: Vec<(f64, f64)> = lfs.iter().flat_map(|&lf| alphas.iter().map(move |&a| (a, lf))).collect();
    let norm = Normalization::for_case(bc, load);
    let solved = par::map_indexed(exec, cells.len(), |i| -> Result<(ReportRow, Curve)> {
        let (alpha, lf) = cells[i];
        let spec = setup.spec(bc, load, FractionalParams::new(alpha, lf)?)?;
        let ne = setup.elements_for(lf, n_inf);
        let mesh = Mesh::new(setup.length, ne, setup.kind)?;
        let (sol, runtime_s) = timed(|| SolutionField::solve(&mesh, &spec, Mode::Fractional, setup.opts))?;
        let scale = norm.deflection_factor(&spec)?;
        let points: Vec<(f64, f64)> =
            mesh.nodes().iter().zip(sol.nodal_deflection()).map(|(&x, w)| (x, scale * w)).collect();
        let (_, wmax) = sol.max_deflection();
        let row = ReportRow {
            alpha,
            lf,
            ne,
            element: setup.kind,
            w_max_norm: scale * wmax,
            err_rel: None,
            stress_err_rel: None,
            reference: None,
            runtime_s,
        };
        Ok((row, Curve { alpha, lf, points }))
    });
    let mut out = SweepReport { report: BenchReport { title: format!("sweep-{}-{}", bc, load.name()), rows: vec![] }, curves: vec![] };
    for cell in solved {
        let (row, curve) = cell?;
        out.report.rows.push(row);
        out.curves.push(curve);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(load: LoadCase, alpha: f64, lf: f64) -> BeamSpec {
        BeamSpec::slender(BoundaryCondition::ClampedClamped, load, FractionalParams::new(alpha, lf).unwrap()).unwrap()
    }

    #[test]
    fn manufactured_fields_meet_their_boundary_conditions() {
        let s = spec(LoadCase::ManufacturedV1, 0.8, 0.1);
        let v1 = manufactured_poly(LoadCase::ManufacturedV1, 1.0).unwrap();
        let d1 = v1.derivative();
        assert!((v1.eval(0.5) - 1.0 / 64.0).abs() < 1e-15);
        for x in [0.0, 1.0] {
            assert!(v1.eval(x).abs() < 1e-15 && d1.eval(x).abs() < 1e-15);
        }
        let v2 = manufactured_poly(LoadCase::ManufacturedV2, 1.0).unwrap();
        assert!(v2.eval(0.0).abs() < 1e-15 && v2.eval(1.0).abs() < 1e-15);
        // natural condition: zero curvature at the supports
        let c2 = v2.nth_derivative(2);
        assert!(c2.eval(0.0).abs() < 1e-15 && c2.eval(1.0).abs() < 1e-15);
        assert!((manufactured_exact(LoadCase::ManufacturedV2, 0.5, &s).unwrap() - 21.0 / 1600.0).abs() < 1e-15);
        assert!(manufactured_exact(LoadCase::Udl { q0: 1.0 }, 0.5, &s).is_err());
    }

    #[test]
    fn local_forcing_is_fourth_derivative() {
        for load in [LoadCase::ManufacturedV1, LoadCase::ManufacturedV2] {
            let s = spec(load, 1.0, 0.1);
            let ei = s.rigidity().ei;
            let w4 = manufactured_poly(load, 1.0).unwrap().nth_derivative(4);
            for x in [0.0, 0.2, 0.5, 0.77, 1.0] {
                let f = manufactured_forcing(load, x, &s).unwrap();
                assert!((f - ei * w4.eval(x)).abs() <= 1e-12 * ei * 100.0, "{load:?} {x}");
            }
        }
    }

    #[test]
    fn forcing_arithmetic() {
        let s = spec(LoadCase::ManufacturedV1, 1.0, 0.1);
        let scale = 6.0 * 30e9 * 1e-6;
        assert!((manufactured_forcing(LoadCase::ManufacturedV1, 0.5, &s).unwrap() - 0.25 * scale).abs() < 1e-9);
        let s = spec(LoadCase::ManufacturedV1, 0.5, 0.1);
        assert!((manufactured_forcing(LoadCase::ManufacturedV1, 0.5, &s).unwrap() - 0.23 * scale).abs() < 1e-9);
    }

    #[test]
    fn reference_lookup() {
        assert_eq!(convergence_reference(ElementKind::TwoNoded, 10.0, 10, 0.8), Some(1.0523));
        assert_eq!(convergence_reference(ElementKind::TwoNoded, 5.0, 20, 0.7), Some(1.2098));
        assert_eq!(convergence_reference(ElementKind::ThreeNoded, 20.0, 2, 0.9), Some(1.0565));
        assert_eq!(convergence_reference(ElementKind::TwoNoded, 7.0, 2, 0.9), None);
    }

    #[test]
    fn local_validation_is_tight() {
        let setup = BenchSetup::default();
        let row = run_validation(&setup, LoadCase::ManufacturedV1, 1.0, 0.1).unwrap();
        assert!(row.err_rel.unwrap() < 1e-3, "{row:?}");
        assert!(row.stress_err_rel.unwrap() < 1e-2, "{row:?}");
    }
}
