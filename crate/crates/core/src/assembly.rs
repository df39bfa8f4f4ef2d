//! Nonlocal strain-displacement rows and global stiffness/load assembly.
//!
//! At a point `x` the nonlocal strain operator is
//! `B̃(x) = ∫ A(x, s) B(s) C(x, s) ds` over the horizon of `x`, where `C` only
//! selects the element owning `s`. Each element's contribution is scattered
//! into the contiguous column block of its DOFs. The two sub-intervals that
//! touch `x` carry the `|x-s|^(-α)` singularity and are integrated in closed
//! form from the power-law moments; everything else uses Gauss-Legendre.

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};

use crate::beam::{BeamSpec, LoadCase};
use crate::bench::manufactured_forcing;
use crate::error::{Error, Result};
use crate::fracops::{attenuation_unchecked, eringen_kernel, power_law_moment, GaussRule, Horizon};
use crate::mesh::{Dof, Mesh, DOFS_PER_NODE};
use crate::par::{self, Exec};

/// Which constitutive operator is assembled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Power-law Riesz-Caputo kernel in the strain; `K = ∫ B̃ᵀ D B̃`.
    Fractional,
    /// Exponential kernel over the whole beam acting on the stress; `K = ∫ B̃ᵀ D B`.
    Eringen,
    /// Classical Euler-Bernoulli stiffness.
    Local,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Fractional => "fractional",
            Mode::Eringen => "eringen",
            Mode::Local => "local",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "fractional" => Ok(Mode::Fractional),
            "eringen" | "eringen-exponential" | "exponential" => Ok(Mode::Eringen),
            "local" => Ok(Mode::Local),
            other => Err(Error::Unsupported(format!("unknown mode '{other}'"))),
        }
    }
}

/// How a horizon whose end falls inside an element is integrated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum PartialHorizon {
    /// Integrate exactly over `[x - l_A, x + l_B]`, including partial elements.
    #[default]
    Exact,
    /// Round interior sides to element boundaries: the left side starts
    /// `ceil(l_A/l_e) - 1` nodes before the element holding `x`, the right side
    /// stops `floor(l_B/l_e)` nodes after it. Sides cut by a beam end are kept
    /// exact. This reproduces the reference convergence table.
    Rounded,
}

impl PartialHorizon {
    pub fn as_str(self) -> &'static str {
        match self {
            PartialHorizon::Exact => "exact",
            PartialHorizon::Rounded => "rounded",
        }
    }
}

impl FromStr for PartialHorizon {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "exact" => Ok(PartialHorizon::Exact),
            "rounded" => Ok(PartialHorizon::Rounded),
            other => Err(Error::Unsupported(format!("unknown partial-horizon rule '{other}'"))),
        }
    }
}

/// Quadrature used on the non-singular horizon sub-intervals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum FarField {
    /// Gauss-Legendre with the configured order.
    Gauss,
    /// Closed-form power-law moments everywhere (fractional mode only).
    #[default]
    Analytic,
}

impl FarField {
    pub fn as_str(self) -> &'static str {
        match self {
            FarField::Gauss => "gauss",
            FarField::Analytic => "analytic",
        }
    }
}

impl FromStr for FarField {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "gauss" => Ok(FarField::Gauss),
            "analytic" => Ok(FarField::Analytic),
            other => Err(Error::Unsupported(format!("unknown far-field rule '{other}'"))),
        }
    }
}

pub const DEFAULT_GAUSS_ORDER: usize = 4;
pub const DEFAULT_DOF_CAP: usize = 12_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssemblyOptions {
    /// Gauss points per element and per horizon sub-interval.
    pub gauss_order: usize,
    pub partial: PartialHorizon,
    pub far_field: FarField,
    /// Largest DOF count accepted for dense storage.
    pub dof_cap: usize,
    pub exec: Exec,
}

impl Default for AssemblyOptions {
    fn default() -> Self {
        AssemblyOptions {
            gauss_order: DEFAULT_GAUSS_ORDER,
            partial: PartialHorizon::Exact,
            far_field: FarField::Analytic,
            dof_cap: DEFAULT_DOF_CAP,
            exec: Exec::Parallel,
        }
    }
}

/// Elements of the mesh seen by the horizon of one point.
#[derive(Debug, Clone, PartialEq)]
pub struct HorizonElements {
    pub horizon: Horizon,
    /// `ceil(l_A / l_e)`
    pub left_count: usize,
    /// `floor(l_B / l_e)`
    pub right_count: usize,
    /// Integration interval actually covered.
    pub lower: f64,
    pub upper: f64,
    pub elements: Range<usize>,
}

/// Two rows of `B̃(x)` restricted to a contiguous block of global columns.
#[derive(Debug, Clone, PartialEq)]
pub struct BtildeRow {
    pub col_start: usize,
    pub rows: [Vec<f64>; 2],
}

impl BtildeRow {
    fn zeros(cols: Range<usize>) -> Self {
        let n = cols.len();
        BtildeRow { col_start: cols.start, rows: [vec![0.0; n], vec![0.0; n]] }
    }

    pub fn cols(&self) -> Range<usize> {
        self.col_start..self.col_start + self.rows[0].len()
    }

    /// `B̃(x) · X` for a global DOF vector.
    pub fn apply(&self, x: &[f64]) -> [f64; 2] {
        let block = &x[self.cols()];
        let dot = |r: &[f64]| r.iter().zip(block).map(|(a, b)| a * b).sum::<f64>();
        [dot(&self.rows[0]), dot(&self.rows[1])]
    }

    /// Expanded to the full DOF count.
    pub fn to_dense(&self, ndof: usize) -> [Vec<f64>; 2] {
        let mut out = [vec![0.0; ndof], vec![0.0; ndof]];
        for (dst, src) in out.iter_mut().zip(&self.rows) {
            dst[self.cols()].copy_from_slice(src);
        }
        out
    }
}

fn count_elements(len: f64, le: f64, up: bool) -> usize {
    let r = len / le;
    let eps = 1e-9;
    if up {
        (r - eps).ceil().max(0.0) as usize
    } else {
        (r + eps).floor().max(0.0) as usize
    }
}

/// Horizon of `x` and the elements it covers.
pub fn horizon_elements(x: f64, mesh: &Mesh, spec: &BeamSpec, mode: Mode, partial: PartialHorizon) -> Result<HorizonElements> {
    let len = mesh.length();
    let le = mesh.element_length();
    let ne = mesh.elements();
    if mode == Mode::Eringen {
        let horizon = Horizon::new(x, len - x)?;
        return Ok(HorizonElements {
            horizon,
            left_count: count_elements(x, le, true),
            right_count: count_elements(len - x, le, false),
            lower: 0.0,
            upper: len,
            elements: 0..ne,
        });
    }
    let horizon = spec.resolve_horizon(x)?;
    let left_count = count_elements(horizon.left, le, true);
    let right_count = count_elements(horizon.right, le, false);
    let (lower, upper) = match partial {
        PartialHorizon::Exact => (x - horizon.left, x + horizon.right),
        PartialHorizon::Rounded => {
            // sides cut by a beam end keep their exact span
            let (xi, _) = mesh.span(mesh.locate(x)?);
            let lf = spec.frac.lf;
            let lo = if horizon.left < lf { 0.0 } else { xi - (left_count.max(1) - 1) as f64 * le };
            let hi = if horizon.right < lf { len } else { xi + right_count.max(1) as f64 * le };
            (lo.clamp(0.0, x), hi.clamp(x, len))
        }
    };
    let tol = 1e-9 * le;
    let first = (((lower + tol) / le).floor() as usize).min(ne - 1);
    let last = ((((upper - tol) / le).ceil() as usize).max(1) - 1).min(ne - 1);
    Ok(HorizonElements { horizon, left_count, right_count, lower, upper, elements: first..last + 1 })
}

/// Evaluates `B̃` at arbitrary points for one mesh/spec/mode.
pub struct BtildeEvaluator<'a> {
    mesh: &'a Mesh,
    spec: &'a BeamSpec,
    mode: Mode,
    opts: AssemblyOptions,
    rule: GaussRule,
}

impl<'a> BtildeEvaluator<'a> {
    pub fn new(mesh: &'a Mesh, spec: &'a BeamSpec, mode: Mode, opts: AssemblyOptions) -> Result<Self> {
        let rule = GaussRule::new(opts.gauss_order)?;
        Ok(BtildeEvaluator { mesh, spec, mode, opts, rule })
    }

    fn is_local(&self) -> bool {
        self.mode == Mode::Local || (self.mode == Mode::Fractional && self.spec.frac.alpha.is_local())
    }

    /// Local `[B(x)]` of the element containing `x`, as a global-column row.
    pub fn local_at(&self, x: f64) -> Result<BtildeRow> {
        let e = self.mesh.locate(x)?;
        let mut row = BtildeRow::zeros(self.mesh.dof_range(e));
        let (a, _) = self.mesh.span(e);
        let (r0, r1) = row.rows.split_at_mut(1);
        self.mesh.basis().b_at(x - a, &mut r0[0], &mut r1[0]);
        Ok(row)
    }

    pub fn at(&self, x: f64) -> Result<BtildeRow> {
        if self.is_local() {
            return self.local_at(x);
        }
        let he = horizon_elements(x, self.mesh, self.spec, self.mode, self.opts.partial)?;
        let first = he.elements.start;
        let last = he.elements.end - 1;
        let cols = self.mesh.dof_range(first).start..self.mesh.dof_range(last).end;
        let mut row = BtildeRow::zeros(cols);
        match self.mode {
            Mode::Eringen => self.fill_eringen(x, &he, &mut row),
            _ => self.fill_fractional(x, &he, &mut row),
        }
        Ok(row)
    }

    fn fill_eringen(&self, x: f64, he: &HorizonElements, row: &mut BtildeRow) {
        let mesh = self.mesh;
        let lf = self.spec.frac.lf;
        let nd = mesh.element_dofs();
        let mut b0 = vec![0.0; nd];
        let mut b1 = vec![0.0; nd];
        for e in he.elements.clone() {
            let (a, b) = mesh.span(e);
            let off = mesh.dof_range(e).start - row.col_start;
            let pieces: &[(f64, f64)] = if x > a && x < b { &[(a, x), (x, b)] } else { &[(a, b)] };
            for &(s0, s1) in pieces {
                // panels no wider than the decay length keep the exponential resolved
                let panels = ((s1 - s0) / lf).ceil().clamp(1.0, 16.0) as usize;
                let step = (s1 - s0) / panels as f64;
                for p in 0..panels {
                    let p0 = s0 + p as f64 * step;
                    for (s, w) in self.rule.mapped(p0, p0 + step) {
                        let k = w * eringen_kernel(x, s, lf);
                        mesh.basis().b_at(s - a, &mut b0, &mut b1);
                        for j in 0..nd {
                            row.rows[0][off + j] += k * b0[j];
                            row.rows[1][off + j] += k * b1[j];
                        }
                    }
                }
            }
        }
    }

    fn fill_fractional(&self, x: f64, he: &HorizonElements, row: &mut BtildeRow) {
        let mesh = self.mesh;
        let alpha = self.spec.frac.alpha.value();
        let h = he.horizon;
        let scale_left = if h.left > 0.0 { 0.5 * (1.0 - alpha) * h.left.powf(alpha - 1.0) } else { 0.0 };
        let scale_right = if h.right > 0.0 { 0.5 * (1.0 - alpha) * h.right.powf(alpha - 1.0) } else { 0.0 };
        let le = mesh.element_length();
        let tiny = 1e-12 * le;
        let nd = mesh.element_dofs();
        let mut b0 = vec![0.0; nd];
        let mut b1 = vec![0.0; nd];

        for e in he.elements.clone() {
            let (a, b) = mesh.span(e);
            let s0 = a.max(he.lower);
            let s1 = b.min(he.upper);
            if s1 - s0 <= tiny {
                continue;
            }
            let off = mesh.dof_range(e).start - row.col_start;
            let mut segments: Vec<(f64, f64, bool)> = Vec::with_capacity(2);
            if x > s0 + tiny && x < s1 - tiny {
                segments.push((s0, x, true));
                segments.push((x, s1, true));
            } else if s1 <= x + tiny {
                segments.push((s0, s1.min(x), (x - s1).abs() <= tiny));
            } else {
                segments.push((s0.max(x), s1, (s0 - x).abs() <= tiny));
            }
            for (p, q, touches) in segments {
                let left = q <= x;
                let scale = if left { scale_left } else { scale_right };
                if scale == 0.0 {
                    continue;
                }
                if touches || self.opts.far_field == FarField::Analytic {
                    let (t0, t1) = if left { (x - q, x - p) } else { (p - x, q - x) };
                    let t0 = if touches { 0.0 } else { t0 };
                    self.add_analytic(e, a, x, t0, t1, left, alpha, scale, off, row);
                } else {
                    let l = if left { h.left } else { h.right };
                    for (s, w) in self.rule.mapped(p, q) {
                        let k = w * attenuation_unchecked(x, s, l, alpha);
                        mesh.basis().b_at(s - a, &mut b0, &mut b1);
                        for j in 0..nd {
                            row.rows[0][off + j] += k * b0[j];
                            row.rows[1][off + j] += k * b1[j];
                        }
                    }
                }
            }
        }

        // collapsed side at the beam end: its half-mass sits on B(x)
        for (side_len, from_left) in [(h.left, false), (h.right, true)] {
            if side_len > 0.0 {
                continue;
            }
            let e = if from_left { mesh.locate(x).map(|e| e.min(mesh.elements() - 1)) } else { mesh.locate(x) };
            let Ok(e) = e else { continue };
            let (a, _) = mesh.span(e);
            let off = mesh.dof_range(e).start - row.col_start;
            mesh.basis().b_at(x - a, &mut b0, &mut b1);
            for j in 0..nd {
                row.rows[0][off + j] += 0.5 * b0[j];
                row.rows[1][off + j] += 0.5 * b1[j];
            }
        }
    }

    /// `scale · ∫ B(s) |x-s|^(-α) ds` over `|x-s| ∈ [t0, t1]` on one side of `x`,
    /// with the entries of `B` re-expanded in powers of `(s - x)`.
    #[allow(clippy::too_many_arguments)]
    fn add_analytic(
        &self,
        e: usize,
        a: f64,
        x: f64,
        t0: f64,
        t1: f64,
        left: bool,
        alpha: f64,
        scale: f64,
        off: usize,
        row: &mut BtildeRow,
    ) {
        let _ = e;
        let mut moments = [0.0f64; 8];
        for (k, m) in moments.iter_mut().enumerate() {
            let sign = if left && k % 2 == 1 { -1.0 } else { 1.0 };
            *m = sign * power_law_moment(k, alpha, t0, t1);
        }
        for (r, polys) in self.mesh.basis().b_rows().iter().enumerate() {
            for (j, p) in polys.iter().enumerate() {
                if p.coeffs().is_empty() {
                    continue;
                }
                let c = p.taylor_about(x - a);
                let v: f64 = c.iter().zip(&moments).map(|(ck, mk)| ck * mk).sum();
                row.rows[r][off + j] += scale * v;
            }
        }
    }
}

/// Convenience wrapper around [`BtildeEvaluator::at`].
pub fn btilde_at(x: f64, mesh: &Mesh, spec: &BeamSpec, mode: Mode, opts: AssemblyOptions) -> Result<BtildeRow> {
    BtildeEvaluator::new(mesh, spec, mode, opts)?.at(x)
}

#[derive(Debug, Clone, PartialEq)]
pub struct NonlocalSystem {
    pub stiffness: DMatrix<f64>,
    pub load: DVector<f64>,
    pub mode: Mode,
}

impl NonlocalSystem {
    pub fn assemble(mesh: &Mesh, spec: &BeamSpec, mode: Mode, opts: AssemblyOptions) -> Result<Self> {
        Ok(NonlocalSystem {
            stiffness: assemble_stiffness(mesh, spec, mode, opts)?,
            load: assemble_load(mesh, spec, opts)?,
            mode,
        })
    }

    pub fn dofs(&self) -> usize {
        self.load.len()
    }

    /// `max|K - Kᵀ| / max|K|`
    pub fn symmetry_residual(&self) -> f64 {
        let k = &self.stiffness;
        let scale = k.amax();
        if scale == 0.0 {
            return 0.0;
        }
        (k - k.transpose()).amax() / scale
    }

    /// `K X - F`; nonzero only on constrained DOFs once `X` is a solution.
    pub fn reactions(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dofs() {
            return Err(Error::Unsupported(format!("expected {} DOFs, got {}", self.dofs(), x.len())));
        }
        let r = &self.stiffness * DVector::from_column_slice(x) - &self.load;
        Ok(r.as_slice().to_vec())
    }
}

/// Elements processed per parallel batch; bounds the number of live `B̃` rows.
const BATCH: usize = 64;

pub fn assemble_stiffness(mesh: &Mesh, spec: &BeamSpec, mode: Mode, opts: AssemblyOptions) -> Result<DMatrix<f64>> {
    let order: Vec<usize> = (0..mesh.elements()).collect();
    assemble_stiffness_ordered(mesh, spec, mode, opts, &order)
}

/// Same as [`assemble_stiffness`] but visiting elements in the given order.
pub fn assemble_stiffness_ordered(
    mesh: &Mesh,
    spec: &BeamSpec,
    mode: Mode,
    opts: AssemblyOptions,
    element_order: &[usize],
) -> Result<DMatrix<f64>> {
    let ndof = mesh.dof_count();
    if ndof > opts.dof_cap {
        return Err(Error::TooManyDofs { dofs: ndof, cap: opts.dof_cap });
    }
    let eval = BtildeEvaluator::new(mesh, spec, mode, opts)?;
    let rig = spec.rigidity();
    let ngp = opts.gauss_order;
    let mut k = DMatrix::<f64>::zeros(ndof, ndof);

    for batch in element_order.chunks(BATCH) {
        let rows: Vec<Result<(f64, f64, BtildeRow)>> = par::map_indexed(opts.exec, batch.len() * ngp, |idx| {
            let e = batch[idx / ngp];
            let (a, b) = mesh.span(e);
            let (x, w) = eval.rule.mapped(a, b).nth(idx % ngp).expect("gauss index");
            eval.at(x).map(|r| (x, w, r))
        });
        for item in rows {
            let (x, w, bt) = item?;
            match mode {
                Mode::Eringen => {
                    let local = eval.local_at(x)?;
                    add_cross(&mut k, &bt, &local, w * rig.ea, w * rig.ei);
                }
                _ => add_symmetric_upper(&mut k, &bt, w * rig.ea, w * rig.ei),
            }
        }
    }
    if mode != Mode::Eringen {
        for j in 0..ndof {
            for i in 0..j {
                k[(j, i)] = k[(i, j)];
            }
        }
    }
    Ok(k)
}

fn column_slice(k: &mut DMatrix<f64>, c: usize) -> &mut [f64] {
    let n = k.nrows();
    &mut k.as_mut_slice()[c * n..(c + 1) * n]
}

fn add_symmetric_upper(k: &mut DMatrix<f64>, bt: &BtildeRow, ea: f64, ei: f64) {
    let c0 = bt.col_start;
    let [r0, r1] = &bt.rows;
    let n = r0.len();
    for j in 0..n {
        let (a_j, b_j) = (ea * r0[j], ei * r1[j]);
        if a_j == 0.0 && b_j == 0.0 {
            continue;
        }
        let col = column_slice(k, c0 + j);
        for i in 0..=j {
            col[c0 + i] += r0[i] * a_j + r1[i] * b_j;
        }
    }
}

fn add_cross(k: &mut DMatrix<f64>, nonlocal: &BtildeRow, local: &BtildeRow, ea: f64, ei: f64) {
    let c0 = nonlocal.col_start;
    let [n0, n1] = &nonlocal.rows;
    let [l0, l1] = &local.rows;
    for (jj, c) in local.cols().enumerate() {
        let (a_j, b_j) = (ea * l0[jj], ei * l1[jj]);
        let col = column_slice(k, c);
        for i in 0..n0.len() {
            col[c0 + i] += n0[i] * a_j + n1[i] * b_j;
        }
    }
}

/// Consistent load vector `∫ [F_a F_t] N̂ dx` plus nodal point forces.
pub fn assemble_load(mesh: &Mesh, spec: &BeamSpec, opts: AssemblyOptions) -> Result<DVector<f64>> {
    let mut f = DVector::<f64>::zeros(mesh.dof_count());
    let rule = GaussRule::new(opts.gauss_order.max(4))?;
    let basis = mesh.basis();
    let nk = mesh.kind().nodes();

    let transverse: Option<Box<dyn Fn(f64) -> f64>> = match spec.load {
        LoadCase::Udl { q0 } => Some(Box::new(move |_| q0)),
        LoadCase::ManufacturedV1 | LoadCase::ManufacturedV2 => {
            let s = *spec;
            Some(Box::new(move |x| manufactured_forcing(s.load, x, &s).unwrap_or(0.0)))
        }
        _ => None,
    };
    let axial = match spec.load {
        LoadCase::AxialUdl { f0 } => Some(f0),
        _ => None,
    };

    for e in 0..mesh.elements() {
        let (a, b) = mesh.span(e);
        let base = mesh.dof_range(e).start;
        for (x, w) in rule.mapped(a, b) {
            let t = x - a;
            if let Some(ft) = &transverse {
                let q = w * ft(x);
                for j in 0..nk {
                    f[base + DOFS_PER_NODE * j + 1] += q * basis.transverse()[2 * j].eval(t);
                    f[base + DOFS_PER_NODE * j + 2] += q * basis.transverse()[2 * j + 1].eval(t);
                }
            }
            if let Some(f0) = axial {
                for j in 0..nk {
                    f[base + DOFS_PER_NODE * j] += w * f0 * basis.axial()[j].eval(t);
                }
            }
        }
    }
    if let LoadCase::TipPoint { p } = spec.load {
        f[mesh.global_dof(mesh.node_count() - 1, Dof::Deflection)] += p;
    }
    Ok(f)
}
