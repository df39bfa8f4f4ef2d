use crate::error::{Error, Result};

/// Polynomial in ascending powers of a local variable.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Poly {
    coeffs: Vec<f64>,
}

impl Poly {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Poly { coeffs }
    }

    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * t + c)
    }

    pub fn derivative(&self) -> Poly {
        Poly {
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| k as f64 * c)
                .collect(),
        }
    }

    pub fn nth_derivative(&self, n: usize) -> Poly {
        (0..n).fold(self.clone(), |p, _| p.derivative())
    }

    pub fn scale(&self, a: f64) -> Poly {
        Poly {
            coeffs: self.coeffs.iter().map(|c| c * a).collect(),
        }
    }

    /// Coefficients of the same polynomial in powers of `(t - t0)`.
    pub fn taylor_about(&self, t0: f64) -> Vec<f64> {
        // synthetic division, repeated
        let mut c = self.coeffs.clone();
        let n = c.len();
        for k in 0..n {
            for j in (k..n - 1).rev() {
                c[j] += t0 * c[j + 1];
            }
        }
        c
    }

    /// Rescales the variable: returns q with q(t) = p(t / l).
    pub fn stretch(&self, l: f64) -> Poly {
        let mut f = 1.0;
        Poly {
            coeffs: self
                .coeffs
                .iter()
                .map(|&c| {
                    let v = c * f;
                    f /= l;
                    v
                })
                .collect(),
        }
    }
}

/// Piecewise polynomial over sorted breakpoints. Piece `i` lives on
/// `[breaks[i], breaks[i+1]]` and is written in `t = s - breaks[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewisePoly {
    breaks: Vec<f64>,
    pieces: Vec<Poly>,
}

impl PiecewisePoly {
    pub fn new(breaks: Vec<f64>, pieces: Vec<Poly>) -> Result<Self> {
        if breaks.len() != pieces.len() + 1 || pieces.is_empty() {
            return Err(Error::Unsupported(format!(
                "{} breakpoints for {} pieces",
                breaks.len(),
                pieces.len()
            )));
        }
        if breaks.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Unsupported("breakpoints must increase".into()));
        }
        Ok(PiecewisePoly { breaks, pieces })
    }

    /// A single polynomial in the global coordinate, valid on `[a, b]`.
    pub fn global(p: &Poly, a: f64, b: f64) -> Self {
        let shifted = Poly::new(p.taylor_about(a));
        PiecewisePoly {
            breaks: vec![a, b],
            pieces: vec![shifted],
        }
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    pub fn pieces(&self) -> &[Poly] {
        &self.pieces
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.breaks[0], *self.breaks.last().unwrap())
    }

    /// Index of the piece owning `s`; ties at a breakpoint go to the right
    /// piece unless `left` is set.
    pub fn piece_index(&self, s: f64, left: bool) -> usize {
        let n = self.pieces.len();
        let idx = if left {
            self.breaks.partition_point(|&b| b < s)
        } else {
            self.breaks.partition_point(|&b| b <= s)
        };
        idx.clamp(1, n) - 1
    }

    pub fn eval(&self, s: f64) -> f64 {
        let i = self.piece_index(s, false);
        self.pieces[i].eval(s - self.breaks[i])
    }

    pub fn derivative(&self) -> PiecewisePoly {
        PiecewisePoly {
            breaks: self.breaks.clone(),
            pieces: self.pieces.iter().map(Poly::derivative).collect(),
        }
    }

    /// One-sided derivative at `s`.
    pub fn slope(&self, s: f64, left: bool) -> f64 {
        let i = self.piece_index(s, left);
        self.pieces[i].derivative().eval(s - self.breaks[i])
    }
}
