//! Fractional-order kernels and reference operators.
//!
//! The nonlocal strain at `x` is the Riesz-Caputo derivative
//!
//! ```text
//! D^a f(x) = (1-a)/2 [ lA^(a-1) ∫_{x-lA}^{x} f'(s) (x-s)^(-a) ds
//!                    + lB^(a-1) ∫_{x}^{x+lB} f'(s) (s-x)^(-a) ds ]
//! ```
//!
//! Each one-sided kernel carries mass exactly 1/2 over its own extent, so an
//! affine field is reproduced for any order and any (truncated) horizon.

mod gauss;
mod poly;

pub use gauss::{GaussRule, MAX_ORDER as MAX_GAUSS_ORDER, MIN_ORDER as MIN_GAUSS_ORDER};
pub use poly::{PiecewisePoly, Poly};

use crate::error::{Error, Result};
use statrs::function::gamma::gamma;

/// Order of the fractional derivative, in (0, 1]. The value 1 is the local limit.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct FractionalOrder(f64);

impl FractionalOrder {
    pub fn new(alpha: f64) -> Result<Self> {
        if alpha > 0.0 && alpha <= 1.0 {
            Ok(FractionalOrder(alpha))
        } else {
            Err(Error::InvalidOrder(alpha))
        }
    }

    pub const LOCAL: FractionalOrder = FractionalOrder(1.0);

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_local(self) -> bool {
        self.0 == 1.0
    }
}

/// Extents of the horizon of nonlocality to the left and right of a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Horizon {
    pub left: f64,
    pub right: f64,
}

impl Horizon {
    pub fn new(left: f64, right: f64) -> Result<Self> {
        if !(left >= 0.0) {
            return Err(Error::InvalidLength { name: "l_A", value: left });
        }
        if !(right >= 0.0) {
            return Err(Error::InvalidLength { name: "l_B", value: right });
        }
        if left + right <= 0.0 {
            return Err(Error::DegenerateHorizon);
        }
        Ok(Horizon { left, right })
    }

    pub fn symmetric(l: f64) -> Result<Self> {
        Horizon::new(l, l)
    }

    /// Horizon of nominal half-width `lf` at `x` in `[0, len]`, truncated at the ends.
    pub fn truncated(x: f64, lf: f64, len: f64) -> Result<Self> {
        if !(0.0..=len).contains(&x) {
            return Err(Error::OutOfDomain { x, lo: 0.0, hi: len });
        }
        Horizon::new(lf.min(x), lf.min(len - x))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    fn name(self) -> &'static str {
        match self {
            Side::Left => "left",
            Side::Right => "right",
        }
    }
}

/// Power-law attenuation `½(1-a) l^(a-1) |x-s|^(-a)` on one side of `x`.
pub fn kernel_attenuation(x: f64, s: f64, l: f64, alpha: FractionalOrder, side: Side) -> Result<f64> {
    let a = alpha.value();
    if alpha.is_local() {
        return Err(Error::InvalidOrder(a));
    }
    if !(l > 0.0) {
        return Err(Error::InvalidLength { name: "l", value: l });
    }
    if s == x {
        return Err(Error::SingularPoint(x));
    }
    let inside = match side {
        Side::Left => s >= x - l && s < x,
        Side::Right => s > x && s <= x + l,
    };
    if !inside {
        return Err(Error::OutsideHorizon { x, s, side: side.name() });
    }
    Ok(attenuation_unchecked(x, s, l, a))
}

#[inline]
pub(crate) fn attenuation_unchecked(x: f64, s: f64, l: f64, a: f64) -> f64 {
    0.5 * (1.0 - a) * l.powf(a - 1.0) * (x - s).abs().powf(-a)
}

/// Exponential attenuation `exp(-|x-s|/l) / (2l)` of integral nonlocal elasticity.
#[inline]
pub fn eringen_kernel(x: f64, s: f64, l: f64) -> f64 {
    (-(x - s).abs() / l).exp() / (2.0 * l)
}

/// `∫_{t0}^{t1} t^(m-a) dt` in closed form.
#[inline]
pub fn power_law_moment(m: usize, alpha: f64, tau0: f64, tau1: f64) -> f64 {
    let p = m as f64 + 1.0 - alpha;
    let lo = if tau0 == 0.0 { 0.0 } else { tau0.powf(p) };
    (tau1.powf(p) - lo) / p
}

/// Reference Riesz-Caputo derivative of a piecewise polynomial.
///
/// The sub-interval touching `x` is integrated analytically after expanding
/// `f'` about `x`; the remaining pieces use composite 16-point Gauss rules
/// graded toward `x`. Written against the Caputo definitions with explicit
/// Gamma factors so it shares nothing with the assembly path.
pub fn rc_derivative_oracle(f: &PiecewisePoly, x: f64, horizon: Horizon, alpha: FractionalOrder) -> Result<f64> {
    let (lo, hi) = f.domain();
    check_span(x, horizon, lo, hi)?;
    if alpha.is_local() {
        return Ok(f.slope(x, x >= hi));
    }
    if horizon.left == 0.0 || horizon.right == 0.0 {
        return rc_boundary_limit(f, x, horizon, alpha);
    }
    let a = alpha.value();
    let g1 = gamma(1.0 - a);
    let left_caputo = caputo_integral(f, x, horizon.left, a, Side::Left) / g1;
    let right_caputo = -caputo_integral(f, x, horizon.right, a, Side::Right) / g1;
    Ok(0.5 * gamma(2.0 - a)
        * (horizon.left.powf(a - 1.0) * left_caputo - horizon.right.powf(a - 1.0) * right_caputo))
}

/// Limit of the Riesz-Caputo derivative when one side of the horizon vanishes:
/// the collapsed side contributes half the classical slope.
pub fn rc_boundary_limit(f: &PiecewisePoly, x: f64, horizon: Horizon, alpha: FractionalOrder) -> Result<f64> {
    let (lo, hi) = f.domain();
    check_span(x, horizon, lo, hi)?;
    let (side, l) = match (horizon.left == 0.0, horizon.right == 0.0) {
        (true, false) => (Side::Right, horizon.right),
        (false, true) => (Side::Left, horizon.left),
        (true, true) => return Err(Error::DegenerateHorizon),
        (false, false) => {
            return Err(Error::Unsupported(
                "boundary limit needs exactly one vanishing horizon side".into(),
            ))
        }
    };
    let slope = f.slope(x, side == Side::Left);
    if alpha.is_local() {
        return Ok(slope);
    }
    let a = alpha.value();
    Ok(0.5 * (slope + (1.0 - a) * l.powf(a - 1.0) * caputo_integral(f, x, l, a, side)))
}

fn check_span(x: f64, h: Horizon, lo: f64, hi: f64) -> Result<()> {
    let tol = 1e-12 * (hi - lo).abs().max(1.0);
    if x - h.left < lo - tol || x + h.right > hi + tol {
        return Err(Error::OutOfDomain { x, lo, hi });
    }
    if h.left + h.right <= 0.0 {
        return Err(Error::DegenerateHorizon);
    }
    Ok(())
}

/// `∫ f'(s) |x-s|^(-a) ds` over one side of `x` with extent `l`.
fn caputo_integral(f: &PiecewisePoly, x: f64, l: f64, a: f64, side: Side) -> f64 {
    let rule = GaussRule::new(16).expect("16 is a valid order");
    let (start, end) = match side {
        Side::Left => (x - l, x),
        Side::Right => (x, x + l),
    };
    let mut cuts = vec![start];
    cuts.extend(f.breaks().iter().copied().filter(|&b| b > start && b < end));
    cuts.push(end);

    let mut total = 0.0;
    for w in cuts.windows(2) {
        let (s0, s1) = (w[0], w[1]);
        if s1 <= s0 {
            continue;
        }
        let mid = 0.5 * (s0 + s1);
        let i = f.piece_index(mid, false);
        let dp = f.pieces()[i].derivative();
        let origin = f.breaks()[i];
        let touches = match side {
            Side::Left => s1 == x,
            Side::Right => s0 == x,
        };
        if touches {
            // f'(s) = sum c_k (s - x)^k ; with tau = |s - x|
            let c = dp.taylor_about(x - origin);
            let tau1 = s1 - s0;
            total += c
                .iter()
                .enumerate()
                .map(|(k, &ck)| {
                    let sign = if side == Side::Left && k % 2 == 1 { -1.0 } else { 1.0 };
                    sign * ck * power_law_moment(k, a, 0.0, tau1)
                })
                .sum::<f64>();
        } else {
            let integrand = |s: f64| dp.eval(s - origin) * (x - s).abs().powf(-a);
            total += graded_gauss(&rule, s0, s1, x, integrand);
        }
    }
    total
}

/// Composite Gauss on `[s0, s1]` with panels no longer than their distance to `x`.
fn graded_gauss<F: Fn(f64) -> f64>(rule: &GaussRule, s0: f64, s1: f64, x: f64, f: F) -> f64 {
    let near_left = (s0 - x).abs() <= (s1 - x).abs();
    let (near, far) = if near_left { (s0, s1) } else { (s1, s0) };
    let dir = (far - near).signum();
    let mut sum = 0.0;
    let mut a = near;
    loop {
        let dist = (a - x).abs();
        let step = dist.max(1e-300);
        let b_unclamped = a + dir * step;
        let done = (b_unclamped - far) * dir >= 0.0;
        let b = if done { far } else { b_unclamped };
        let (lo, hi) = if dir > 0.0 { (a, b) } else { (b, a) };
        sum += rule.integrate(lo, hi, &f);
        if done {
            break;
        }
        a = b;
    }
    sum
}
