//! Shared numerical machinery: monotone bisection, an exhaustive `(p, q)`
//! grid oracle, central finite differences, adaptive Gauss–Kronrod
//! quadrature and golden-section search.
//!
//! Everything here is a pure function of its inputs, so callers are free to
//! evaluate in parallel as long as the closures they pass are pure too.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Bracketing interval for [`bisect_root`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootBracket {
    pub lo: f64,
    pub hi: f64,
    pub tol: f64,
}

impl RootBracket {
    pub fn new(lo: f64, hi: f64, tol: f64) -> Result<Self> {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::invalid(format!(
                "bracket needs lo < hi, got [{lo}, {hi}]"
            )));
        }
        if !(tol > 0.0) {
            return Err(Error::invalid(format!(
                "bracket tolerance must be positive, got {tol}"
            )));
        }
        Ok(RootBracket { lo, hi, tol })
    }

    /// Bracket `[lo, hi]` with the default tolerance `1e-10 * (hi - lo)`.
    pub fn with_default_tol(lo: f64, hi: f64) -> Result<Self> {
        RootBracket::new(lo, hi, 1e-10 * (hi - lo))
    }

    /// Upper bound on the number of halvings needed to reach `tol`.
    pub fn max_iterations(&self) -> usize {
        ((self.hi - self.lo) / self.tol).log2().ceil().max(0.0) as usize + 2
    }
}

/// Root of `f` on the bracket by plain bisection.
///
/// `f(lo)` and `f(hi)` must differ in sign (a zero at either end is
/// returned directly).
pub fn bisect_root<F: FnMut(f64) -> f64>(f: F, bracket: RootBracket) -> Result<f64> {
    bisect_root_counted(f, bracket).map(|(x, _)| x)
}

/// Same as [`bisect_root`] but also reports how many halvings were taken.
pub fn bisect_root_counted<F: FnMut(f64) -> f64>(
    mut f: F,
    bracket: RootBracket,
) -> Result<(f64, usize)> {
    let (mut lo, mut hi) = (bracket.lo, bracket.hi);
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return Ok((lo, 0));
    }
    if f_hi == 0.0 {
        return Ok((hi, 0));
    }
    if !(f_lo.is_finite() && f_hi.is_finite()) || f_lo.signum() == f_hi.signum() {
        return Err(Error::NoRoot { lo, hi, f_lo, f_hi });
    }
    let max_iter = bracket.max_iterations();
    let mut iterations = 0;
    while hi - lo > bracket.tol && iterations < max_iter {
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid);
        iterations += 1;
        if f_mid == 0.0 {
            return Ok((mid, iterations));
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok((0.5 * (lo + hi), iterations))
}

/// Resolution of the exhaustive `(p, q)` grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    pub p_steps: usize,
    pub q_steps: usize,
}

impl GridSpec {
    pub fn new(p_steps: usize, q_steps: usize) -> Result<Self> {
        if p_steps < 2 || q_steps < 2 {
            return Err(Error::invalid("grid needs at least 2 steps per axis"));
        }
        Ok(GridSpec { p_steps, q_steps })
    }

    pub fn square(steps: usize) -> Result<Self> {
        GridSpec::new(steps, steps)
    }
}

/// Box over which the grid is laid out (endpoints included).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridBounds {
    pub p_lo: f64,
    pub p_hi: f64,
    pub q_lo: f64,
    pub q_hi: f64,
}

impl GridBounds {
    pub fn p_cell(&self, grid: &GridSpec) -> f64 {
        (self.p_hi - self.p_lo) / (grid.p_steps - 1) as f64
    }

    pub fn q_cell(&self, grid: &GridSpec) -> f64 {
        (self.q_hi - self.q_lo) / (grid.q_steps - 1) as f64
    }

    fn p_at(&self, grid: &GridSpec, i: usize) -> f64 {
        if i + 1 == grid.p_steps {
            self.p_hi
        } else {
            self.p_lo + self.p_cell(grid) * i as f64
        }
    }

    fn q_at(&self, grid: &GridSpec, j: usize) -> f64 {
        if j + 1 == grid.q_steps {
            self.q_hi
        } else {
            self.q_lo + self.q_cell(grid) * j as f64
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub p: f64,
    pub q: f64,
    pub value: f64,
}

/// Exhaustive minimisation of `objective` over the feasible grid points.
///
/// Points where the objective is not finite count as infeasible. Ties go to
/// the smaller `q`, then the smaller `p`.
pub fn grid_oracle<O, C>(
    objective: O,
    feasible: C,
    grid: GridSpec,
    bounds: GridBounds,
) -> Result<GridPoint>
where
    O: Fn(f64, f64) -> f64,
    C: Fn(f64, f64) -> bool,
{
    let mut best: Option<GridPoint> = None;
    for j in 0..grid.q_steps {
        let q = bounds.q_at(&grid, j);
        for i in 0..grid.p_steps {
            let p = bounds.p_at(&grid, i);
            if !feasible(p, q) {
                continue;
            }
            let value = objective(p, q);
            if !value.is_finite() {
                continue;
            }
            if best.is_none_or(|b| value < b.value) {
                best = Some(GridPoint { p, q, value });
            }
        }
    }
    best.ok_or_else(|| Error::Infeasible("no feasible grid point".into()))
}

/// Every feasible grid point, row by row (`q` outer, `p` inner).
pub fn grid_points<O, C>(
    objective: O,
    feasible: C,
    grid: GridSpec,
    bounds: GridBounds,
) -> Vec<GridPoint>
where
    O: Fn(f64, f64) -> f64,
    C: Fn(f64, f64) -> bool,
{
    let mut out = Vec::new();
    for j in 0..grid.q_steps {
        let q = bounds.q_at(&grid, j);
        for i in 0..grid.p_steps {
            let p = bounds.p_at(&grid, i);
            if feasible(p, q) {
                let value = objective(p, q);
                if value.is_finite() {
                    out.push(GridPoint { p, q, value });
                }
            }
        }
    }
    out
}

/// Central-difference gradient of `f` at `(p, q)`.
pub fn fd_gradient<F: Fn(f64, f64) -> f64>(f: F, at: (f64, f64), h: f64) -> (f64, f64) {
    let (p, q) = at;
    let dp = (f(p + h, q) - f(p - h, q)) / (2.0 * h);
    let dq = (f(p, q + h) - f(p, q - h)) / (2.0 * h);
    (dp, dq)
}

/// One-sided difference that stays inside `[lo, hi]`: forward at the lower
/// end, backward at the upper end, central otherwise.
pub(crate) fn fd_partial_in_box<F: Fn(f64) -> f64>(f: F, x: f64, lo: f64, hi: f64, h: f64) -> f64 {
    if x - h < lo {
        (-3.0 * f(x) + 4.0 * f(x + h) - f(x + 2.0 * h)) / (2.0 * h)
    } else if x + h > hi {
        (3.0 * f(x) - 4.0 * f(x - h) + f(x - 2.0 * h)) / (2.0 * h)
    } else {
        (f(x + h) - f(x - h)) / (2.0 * h)
    }
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gauss_kronrod_15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (k, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = half * x;
        let pair = f(center - dx) + f(center + dx);
        kronrod += w * pair;
        if k % 2 == 1 {
            gauss += WG[k / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Adaptive Gauss–Kronrod (7/15) integral of `f` over `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let (whole, err) = gauss_kronrod_15(&f, a, b);
    let abs_floor = 1e-300_f64.max(whole.abs() * f64::EPSILON * 10.0);
    let tol = (rel_tol * whole.abs()).max(abs_floor);
    if err <= tol {
        return whole;
    }
    refine(&f, a, b, whole, tol, 0)
}

fn refine<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, whole: f64, tol: f64, depth: usize) -> f64 {
    let mid = 0.5 * (a + b);
    let (left, el) = gauss_kronrod_15(f, a, mid);
    let (right, er) = gauss_kronrod_15(f, mid, b);
    if el + er <= tol || depth >= 48 || (left + right - whole).abs() <= f64::EPSILON * whole.abs() {
        return left + right;
    }
    refine(f, a, mid, left, 0.5 * tol, depth + 1) + refine(f, mid, b, right, 0.5 * tol, depth + 1)
}

/// Minimiser of a unimodal `f` on `[a, b]` by golden-section search.
pub fn golden_section<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}
