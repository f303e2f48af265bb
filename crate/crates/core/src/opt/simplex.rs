//! Dense simplex for small linear programs.
//!
//! Problems are brought to inequality form `min gᵀx  s.t.  aᵢᵀx ≥ bᵢ` with `x`
//! free, and the dual `max bᵀy  s.t.  Σ yᵢ aᵢ = g, y ≥ 0` is solved with a
//! two-phase tableau. The dual has only `d` rows, so a pivot costs
//! `O(d · n)` no matter how many constraints there are. The primal optimum
//! is read off the simplex multipliers and then polished by re-solving the
//! active constraints directly.

use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-11;
const COST_TOL: f64 = 1e-10;
const FEAS_TOL: f64 = 1e-9;
/// Consecutive degenerate pivots tolerated before switching to Bland's rule.
const DEGENERATE_STREAK: usize = 32;
/// Relative size of the right-hand-side perturbation that breaks degenerate ties.
const PERTURB: f64 = 1e-10;

/// `min gᵀx` subject to `aᵢᵀx ≥ bᵢ` for every row, with `x` otherwise free.
#[derive(Debug, Clone)]
pub struct InequalityLp {
    dim: usize,
    rows: Vec<f64>,
    rhs: Vec<f64>,
    objective: Vec<f64>,
}

impl InequalityLp {
    pub fn new(objective: Vec<f64>) -> Self {
        Self { dim: objective.len(), rows: Vec::new(), rhs: Vec::new(), objective }
    }

    pub fn with_capacity(objective: Vec<f64>, rows: usize) -> Self {
        let dim = objective.len();
        Self { dim, rows: Vec::with_capacity(rows * dim), rhs: Vec::with_capacity(rows), objective }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_rows(&self) -> usize {
        self.rhs.len()
    }

    /// Adds `row · x ≥ rhs`.
    pub fn push_row(&mut self, row: &[f64], rhs: f64) {
        assert_eq!(row.len(), self.dim, "constraint width must match the objective");
        self.rows.extend_from_slice(row);
        self.rhs.push(rhs);
    }

    /// Adds `x[j] ≥ lo` and `x[j] ≤ hi` for the finite sides.
    pub fn push_bounds(&mut self, j: usize, lo: f64, hi: f64) {
        let mut e = vec![0.0; self.dim];
        if lo.is_finite() {
            e[j] = 1.0;
            self.push_row(&e, lo);
        }
        if hi.is_finite() {
            e[j] = -1.0;
            self.push_row(&e, -hi);
        }
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rhs(&self, i: usize) -> f64 {
        self.rhs[i]
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    /// Most negative `aᵢᵀx − bᵢ` over all rows (positive when strictly feasible).
    pub fn min_slack(&self, x: &[f64]) -> f64 {
        (0..self.num_rows())
            .map(|i| dot(self.row(i), x) - self.rhs[i])
            .fold(f64::INFINITY, f64::min)
    }

    pub fn solve(&self) -> Result<Vertex> {
        let scale_g = self.objective.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        match DualTableau::build(self, &self.objective, scale_g).run(scale_g)? {
            DualOutcome::Optimal(x) => {
                let value = dot(&self.objective, &x);
                Ok(Vertex { x, value })
            }
            // Dual unbounded: the primal has no feasible point.
            DualOutcome::Unbounded => Err(Error::Infeasible),
            // Dual infeasible: primal is infeasible or unbounded; tell them
            // apart by solving the pure feasibility problem.
            DualOutcome::Infeasible => {
                let zero = vec![0.0; self.dim];
                match DualTableau::build(self, &zero, 1.0).run(1.0)? {
                    DualOutcome::Optimal(_) => Err(Error::Unbounded),
                    _ => Err(Error::Infeasible),
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Vertex {
    pub x: Vec<f64>,
    pub value: f64,
}

enum DualOutcome {
    Optimal(Vec<f64>),
    Unbounded,
    Infeasible,
}

struct DualTableau<'a> {
    lp: &'a InequalityLp,
    m: usize,
    /// Real columns (one per primal row) followed by `m` artificial columns.
    ncols: usize,
    width: usize,
    /// `m` constraint rows then the reduced-cost row, each `width = ncols + 1` long.
    t: Vec<f64>,
    basis: Vec<usize>,
    flipped: Vec<bool>,
    /// Total added to the right-hand side.
    perturbation: f64,
    pivots: usize,
    max_pivots: usize,
}

impl<'a> DualTableau<'a> {
    fn build(lp: &'a InequalityLp, g: &[f64], scale_g: f64) -> Self {
        let m = lp.dim;
        let n = lp.num_rows();
        let ncols = n + m;
        let width = ncols + 1;
        let mut t = vec![0.0; (m + 1) * width];
        let mut flipped = vec![false; m];
        let mut perturbation = 0.0;
        for r in 0..m {
            let sign = if g[r] < 0.0 { -1.0 } else { 1.0 };
            flipped[r] = sign < 0.0;
            let row = &mut t[r * width..(r + 1) * width];
            for i in 0..n {
                row[i] = sign * lp.rows[i * m + r];
            }
            row[n + r] = 1.0;
            let jitter = PERTURB * scale_g * (1.0 + ((r + 1) as f64 * 0.618_033_988_749_895).fract());
            row[ncols] = sign * g[r] + jitter;
            perturbation += jitter;
        }
        let basis = (n..n + m).collect();
        Self { lp, m, ncols, width, t, basis, flipped, perturbation, pivots: 0, max_pivots: 50 * (ncols + 10) + 1000 }
    }

    fn n_real(&self) -> usize {
        self.ncols - self.m
    }

    fn at(&self, r: usize, c: usize) -> f64 {
        self.t[r * self.width + c]
    }

    fn is_artificial(&self, col: usize) -> bool {
        col >= self.n_real()
    }

    /// Column costs of the maximization in the current phase.
    fn load_costs(&mut self, phase_one: bool) {
        let n = self.n_real();
        let cost = |col: usize| -> f64 {
            if phase_one {
                if col >= n {
                    -1.0
                } else {
                    0.0
                }
            } else if col >= n {
                0.0
            } else {
                self.lp.rhs[col]
            }
        };
        let costs: Vec<f64> = (0..self.ncols).map(cost).collect();
        let basic_costs: Vec<f64> = self.basis.iter().map(|&b| costs[b]).collect();
        let (m, width) = (self.m, self.width);
        let mut obj = vec![0.0; width];
        for r in 0..m {
            let cb = basic_costs[r];
            if cb == 0.0 {
                continue;
            }
            let row = &self.t[r * width..(r + 1) * width];
            for (o, v) in obj.iter_mut().zip(row) {
                *o += cb * v;
            }
        }
        for (o, c) in obj.iter_mut().zip(&costs) {
            *o -= c;
        }
        self.t[m * width..].copy_from_slice(&obj);
    }

    fn pivot(&mut self, pr: usize, pc: usize) {
        let width = self.width;
        let pv = self.at(pr, pc);
        {
            let row = &mut self.t[pr * width..(pr + 1) * width];
            for v in row.iter_mut() {
                *v /= pv;
            }
            row[pc] = 1.0;
        }
        let pivot_row: Vec<f64> = self.t[pr * width..(pr + 1) * width].to_vec();
        for r in 0..=self.m {
            if r == pr {
                continue;
            }
            let factor = self.t[r * width + pc];
            if factor == 0.0 {
                continue;
            }
            let row = &mut self.t[r * width..(r + 1) * width];
            for (v, p) in row.iter_mut().zip(&pivot_row) {
                *v -= factor * p;
            }
            row[pc] = 0.0;
        }
        self.basis[pr] = pc;
        self.pivots += 1;
    }

    /// Runs simplex iterations on the loaded objective. Returns false if unbounded.
    fn iterate(&mut self, allow_artificial: bool) -> Result<bool> {
        let (m, width, rhs_col) = (self.m, self.width, self.ncols);
        let mut bland = false;
        let mut degenerate = 0usize;
        loop {
            if self.pivots > self.max_pivots {
                return Err(Error::PivotLimit(self.max_pivots));
            }
            let limit = if allow_artificial { self.ncols } else { self.n_real() };
            let obj = &self.t[m * width..m * width + limit];
            let entering = if bland {
                obj.iter().position(|&z| z < -COST_TOL)
            } else {
                let mut best: Option<(usize, f64)> = None;
                for (j, &z) in obj.iter().enumerate() {
                    if z < -COST_TOL && best.is_none_or(|(_, bz)| z < bz) {
                        best = Some((j, z));
                    }
                }
                best.map(|(j, _)| j)
            };
            let Some(pc) = entering else {
                return Ok(true);
            };
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..m {
                let a = self.at(r, pc);
                if a > PIVOT_TOL {
                    let ratio = self.at(r, rhs_col).max(0.0) / a;
                    let better = match leave {
                        None => true,
                        Some((lr, lratio)) => {
                            ratio < lratio - 1e-12
                                || (ratio <= lratio + 1e-12 && self.basis[r] < self.basis[lr])
                        }
                    };
                    if better {
                        leave = Some((r, ratio));
                    }
                }
            }
            let Some((pr, ratio)) = leave else {
                return Ok(false);
            };
            if ratio <= 1e-12 {
                degenerate += 1;
                if degenerate > DEGENERATE_STREAK {
                    bland = true;
                }
            } else {
                degenerate = 0;
            }
            self.pivot(pr, pc);
        }
    }

    fn run(mut self, scale_g: f64) -> Result<DualOutcome> {
        let (m, width, rhs_col) = (self.m, self.width, self.ncols);
        self.load_costs(true);
        self.iterate(true)?;
        let infeasibility: f64 = (0..m)
            .filter(|&r| self.is_artificial(self.basis[r]))
            .map(|r| self.at(r, rhs_col).max(0.0))
            .sum();
        if infeasibility > FEAS_TOL * scale_g + self.perturbation {
            return Ok(DualOutcome::Infeasible);
        }
        // Drive zero-level artificials out of the basis where possible.
        for r in 0..m {
            if !self.is_artificial(self.basis[r]) {
                continue;
            }
            let n = self.n_real();
            let row = &self.t[r * width..r * width + n];
            let best = row
                .iter()
                .enumerate()
                .filter(|(_, v)| v.abs() > 1e-9)
                .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
                .map(|(j, _)| j);
            if let Some(pc) = best {
                self.pivot(r, pc);
            }
        }
        self.load_costs(false);
        if !self.iterate(false)? {
            return Ok(DualOutcome::Unbounded);
        }
        let n = self.n_real();
        let obj = &self.t[m * width..(m + 1) * width];
        let mut x: Vec<f64> = (0..m)
            .map(|k| if self.flipped[k] { -obj[n + k] } else { obj[n + k] })
            .collect();
        if let Some(polished) = self.polish() {
            x = polished;
        }
        Ok(DualOutcome::Optimal(x))
    }

    /// Solves the active constraints exactly when the basis is made of real rows.
    fn polish(&self) -> Option<Vec<f64>> {
        let d = self.m;
        if self.basis.iter().any(|&b| self.is_artificial(b)) {
            return None;
        }
        let mut a = vec![0.0; d * d];
        let mut rhs = vec![0.0; d];
        for (r, &b) in self.basis.iter().enumerate() {
            a[r * d..(r + 1) * d].copy_from_slice(self.lp.row(b));
            rhs[r] = self.lp.rhs[b];
        }
        solve_dense(&mut a, &mut rhs, d)
    }
}

/// Gaussian elimination with partial pivoting on a row-major `d × d` system.
pub fn solve_dense(a: &mut [f64], b: &mut [f64], d: usize) -> Option<Vec<f64>> {
    let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return None;
    }
    for col in 0..d {
        let piv = (col..d).max_by(|&i, &j| a[i * d + col].abs().total_cmp(&a[j * d + col].abs()))?;
        if a[piv * d + col].abs() <= 1e-12 * scale {
            return None;
        }
        if piv != col {
            for k in 0..d {
                a.swap(piv * d + k, col * d + k);
            }
            b.swap(piv, col);
        }
        for r in col + 1..d {
            let f = a[r * d + col] / a[col * d + col];
            if f == 0.0 {
                continue;
            }
            for k in col..d {
                a[r * d + k] -= f * a[col * d + k];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; d];
    for r in (0..d).rev() {
        let s: f64 = (r + 1..d).map(|k| a[r * d + k] * x[k]).sum();
        x[r] = (b[r] - s) / a[r * d + r];
    }
    Some(x)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
