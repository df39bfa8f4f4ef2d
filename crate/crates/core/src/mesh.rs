//! Uniform 1D meshes and C¹ beam elements.
//!
//! Every node carries three generalized displacements `(u₀, w₀, dw₀/dx)`.
//! Element-local DOFs are node-major, so element `e` occupies the contiguous
//! global column block `3·n_e .. 3·(n_e + n_k)` with `n_e` its first node and
//! `n_k` its node count. No connectivity matrix is ever built.

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::fracops::Poly;

pub const DOFS_PER_NODE: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ElementKind {
    /// Linear Lagrange axial, cubic Hermite transverse.
    TwoNoded,
    /// Quadratic Lagrange axial, quintic Hermite transverse (value and slope at 3 nodes).
    ThreeNoded,
}

impl ElementKind {
    pub fn nodes(self) -> usize {
        match self {
            ElementKind::TwoNoded => 2,
            ElementKind::ThreeNoded => 3,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ElementKind::TwoNoded => "two-noded",
            ElementKind::ThreeNoded => "three-noded",
        }
    }
}

impl fmt::Display for ElementKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ElementKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "two-noded" | "2" | "two" => Ok(ElementKind::TwoNoded),
            "three-noded" | "3" | "three" => Ok(ElementKind::ThreeNoded),
            other => Err(Error::Unsupported(format!("unknown element kind '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dof {
    Axial,
    Deflection,
    Slope,
}

impl Dof {
    fn offset(self) -> usize {
        match self {
            Dof::Axial => 0,
            Dof::Deflection => 1,
            Dof::Slope => 2,
        }
    }
}

/// Shape functions of one element as polynomials in `t = s - x_left`.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementBasis {
    nodes: usize,
    /// Lagrange functions, one per node.
    axial: Vec<Poly>,
    /// Hermite functions, `(value, slope)` pairs per node.
    transverse: Vec<Poly>,
    /// `[dL/dt ; d²H/dt²]` laid out over the element DOFs.
    b_rows: [Vec<Poly>; 2],
}

impl ElementBasis {
    pub fn new(kind: ElementKind, len: f64) -> Self {
        let nk = kind.nodes();
        let xi: Vec<f64> = (0..nk).map(|j| j as f64 / (nk - 1) as f64).collect();

        // Lagrange in xi, then stretched to t
        let axial: Vec<Poly> = (0..nk)
            .map(|j| {
                let rhs: Vec<f64> = (0..nk).map(|i| if i == j { 1.0 } else { 0.0 }).collect();
                let vand = DMatrix::from_fn(nk, nk, |r, c| xi[r].powi(c as i32));
                solve_small(vand, rhs).stretch(len)
            })
            .collect();

        // Hermite: conditions on value and slope (d/dxi) at every node
        let m = 2 * nk;
        let cond = DMatrix::from_fn(m, m, |r, c| {
            let x = xi[r / 2];
            if r % 2 == 0 {
                x.powi(c as i32)
            } else if c == 0 {
                0.0
            } else {
                c as f64 * x.powi(c as i32 - 1)
            }
        });
        let transverse: Vec<Poly> = (0..m)
            .map(|j| {
                let rhs: Vec<f64> = (0..m).map(|i| if i == j { 1.0 } else { 0.0 }).collect();
                let p = solve_small(cond.clone(), rhs).stretch(len);
                // slope DOFs are physical dw/dx, d/dxi = len · d/dx
                if j % 2 == 1 {
                    p.scale(len)
                } else {
                    p
                }
            })
            .collect();

        let nd = DOFS_PER_NODE * nk;
        let mut row0 = vec![Poly::zero(); nd];
        let mut row1 = vec![Poly::zero(); nd];
        for j in 0..nk {
            row0[DOFS_PER_NODE * j] = axial[j].derivative();
            row1[DOFS_PER_NODE * j + 1] = transverse[2 * j].nth_derivative(2);
            row1[DOFS_PER_NODE * j + 2] = transverse[2 * j + 1].nth_derivative(2);
        }
        ElementBasis { nodes: nk, axial, transverse, b_rows: [row0, row1] }
    }

    pub fn dofs(&self) -> usize {
        DOFS_PER_NODE * self.nodes
    }

    pub fn axial(&self) -> &[Poly] {
        &self.axial
    }

    pub fn transverse(&self) -> &[Poly] {
        &self.transverse
    }

    /// Polynomials of the strain-displacement rows.
    pub fn b_rows(&self) -> &[Vec<Poly>; 2] {
        &self.b_rows
    }

    /// Evaluates `[B(t)]` into two rows of length `dofs()`.
    pub fn b_at(&self, t: f64, row0: &mut [f64], row1: &mut [f64]) {
        for (k, p) in self.b_rows[0].iter().enumerate() {
            row0[k] = p.eval(t);
        }
        for (k, p) in self.b_rows[1].iter().enumerate() {
            row1[k] = p.eval(t);
        }
    }
}

fn solve_small(a: DMatrix<f64>, rhs: Vec<f64>) -> Poly {
    let n = rhs.len();
    let sol = a
        .lu()
        .solve(&DVector::from_vec(rhs))
        .expect("interpolation matrix is nonsingular");
    Poly::new((0..n).map(|i| sol[i]).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    length: f64,
    elements: usize,
    kind: ElementKind,
    nodes: Vec<f64>,
    basis: ElementBasis,
}

impl Mesh {
    pub fn new(length: f64, elements: usize, kind: ElementKind) -> Result<Self> {
        if elements < 2 {
            return Err(Error::TooFewElements(elements));
        }
        if !(length > 0.0) {
            return Err(Error::InvalidLength { name: "L", value: length });
        }
        let per = kind.nodes() - 1;
        let count = elements * per + 1;
        let step = length / (elements * per) as f64;
        let mut nodes: Vec<f64> = (0..count).map(|i| i as f64 * step).collect();
        nodes[count - 1] = length;
        let le = length / elements as f64;
        Ok(Mesh { length, elements, kind, nodes, basis: ElementBasis::new(kind, le) })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn elements(&self) -> usize {
        self.elements
    }

    pub fn kind(&self) -> ElementKind {
        self.kind
    }

    pub fn element_length(&self) -> f64 {
        self.length / self.elements as f64
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn dof_count(&self) -> usize {
        DOFS_PER_NODE * self.nodes.len()
    }

    pub fn basis(&self) -> &ElementBasis {
        &self.basis
    }

    pub fn element_dofs(&self) -> usize {
        self.basis.dofs()
    }

    pub fn first_node(&self, e: usize) -> usize {
        e * (self.kind.nodes() - 1)
    }

    pub fn span(&self, e: usize) -> (f64, f64) {
        let le = self.element_length();
        let a = e as f64 * le;
        let b = if e + 1 == self.elements { self.length } else { (e + 1) as f64 * le };
        (a, b)
    }

    /// Global DOF block of element `e`.
    pub fn dof_range(&self, e: usize) -> Range<usize> {
        let n = self.first_node(e);
        DOFS_PER_NODE * n..DOFS_PER_NODE * (n + self.kind.nodes())
    }

    pub fn global_dof(&self, node: usize, dof: Dof) -> usize {
        DOFS_PER_NODE * node + dof.offset()
    }

    /// Element containing `x`; element boundaries go to the right-hand element
    /// except at `x = L`.
    pub fn locate(&self, x: f64) -> Result<usize> {
        if !(0.0..=self.length).contains(&x) {
            return Err(Error::OutOfDomain { x, lo: 0.0, hi: self.length });
        }
        let e = (x / self.element_length()).floor() as usize;
        Ok(e.min(self.elements - 1))
    }

    fn local_coord(&self, e: usize, s: f64) -> Result<f64> {
        let (a, b) = self.span(e);
        let tol = 1e-12 * self.length;
        if s < a - tol || s > b + tol {
            return Err(Error::OutOfDomain { x: s, lo: a, hi: b });
        }
        Ok(s - a)
    }

    /// `[B(s)]` of element `e`: row 0 the axial strain, row 1 the curvature.
    pub fn b_matrix(&self, e: usize, s: f64) -> Result<[Vec<f64>; 2]> {
        let t = self.local_coord(e, s)?;
        let nd = self.element_dofs();
        let mut r0 = vec![0.0; nd];
        let mut r1 = vec![0.0; nd];
        self.basis.b_at(t, &mut r0, &mut r1);
        Ok([r0, r1])
    }

    /// `(u₀, w₀, dw₀/dx)` at `s` from the element's local DOF values.
    pub fn interpolate(&self, e: usize, local: &[f64], s: f64) -> Result<(f64, f64, f64)> {
        let t = self.local_coord(e, s)?;
        let nk = self.kind.nodes();
        let mut u = 0.0;
        let mut w = 0.0;
        let mut dw = 0.0;
        for j in 0..nk {
            let uj = local[DOFS_PER_NODE * j];
            let wj = local[DOFS_PER_NODE * j + 1];
            let tj = local[DOFS_PER_NODE * j + 2];
            let (hv, hs) = (&self.basis.transverse[2 * j], &self.basis.transverse[2 * j + 1]);
            u += self.basis.axial[j].eval(t) * uj;
            w += hv.eval(t) * wj + hs.eval(t) * tj;
            dw += hv.derivative().eval(t) * wj + hs.derivative().eval(t) * tj;
        }
        Ok((u, w, dw))
    }

    /// Nodal DOF vector of analytic fields `u(x)`, `w(x)`, `w'(x)`.
    pub fn nodal_values<U, W, S>(&self, u: U, w: W, slope: S) -> Vec<f64>
    where
        U: Fn(f64) -> f64,
        W: Fn(f64) -> f64,
        S: Fn(f64) -> f64,
    {
        let mut x = vec![0.0; self.dof_count()];
        for (n, &xn) in self.nodes.iter().enumerate() {
            x[DOFS_PER_NODE * n] = u(xn);
            x[DOFS_PER_NODE * n + 1] = w(xn);
            x[DOFS_PER_NODE * n + 2] = slope(xn);
        }
        x
    }
}
