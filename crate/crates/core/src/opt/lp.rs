//! Linear programs with hard constraints `Ax ≥ b` and a coordinate box.

use std::fmt::Write as _;
use std::io::BufRead;

use crate::error::{Error, Result};
use crate::opt::simplex::InequalityLp;
use crate::types::dot;

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub rhs: f64,
}

impl Constraint {
    pub fn new(coeffs: Vec<f64>, rhs: f64) -> Self {
        Self { coeffs, rhs }
    }

    /// `aᵀx − b`; negative when violated.
    pub fn slack(&self, x: &[f64]) -> f64 {
        dot(&self.coeffs, x) - self.rhs
    }

    /// Largest `|aᵀx − b|` over the box, by interval arithmetic.
    pub fn box_width(&self, lower: &[f64], upper: &[f64]) -> f64 {
        let (mut hi, mut lo) = (-self.rhs, -self.rhs);
        for ((a, l), u) in self.coeffs.iter().zip(lower).zip(upper) {
            let (p, q) = (a * l, a * u);
            hi += p.max(q);
            lo += p.min(q);
        }
        hi.abs().max(lo.abs())
    }
}

/// `min gᵀx` subject to `Aᵢx ≥ bᵢ` and `lower ≤ x ≤ upper`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub constraints: Vec<Constraint>,
    pub objective: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub value: f64,
}

impl LinearProgram {
    pub fn new(
        constraints: Vec<Constraint>,
        objective: Vec<f64>,
        lower: Vec<f64>,
        upper: Vec<f64>,
    ) -> Result<Self> {
        let lp = Self { constraints, objective, lower, upper };
        lp.validate()?;
        Ok(lp)
    }

    /// Same program with every coordinate boxed to `[lo, hi]`.
    pub fn in_box(constraints: Vec<Constraint>, objective: Vec<f64>, lo: f64, hi: f64) -> Result<Self> {
        let d = objective.len();
        Self::new(constraints, objective, vec![lo; d], vec![hi; d])
    }

    pub fn dim(&self) -> usize {
        self.objective.len()
    }

    pub fn len(&self) -> usize {
        self.constraints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.constraints.is_empty()
    }

    fn validate(&self) -> Result<()> {
        let d = self.dim();
        if d == 0 {
            return Err(Error::InvalidInput("objective must have positive dimension".into()));
        }
        for v in [&self.lower, &self.upper] {
            if v.len() != d {
                return Err(Error::DimensionMismatch { expected: d, found: v.len() });
            }
        }
        if let Some(c) = self.constraints.iter().find(|c| c.coeffs.len() != d) {
            return Err(Error::DimensionMismatch { expected: d, found: c.coeffs.len() });
        }
        for j in 0..d {
            if self.lower[j].is_nan() || self.upper[j].is_nan() || self.lower[j] > self.upper[j] {
                return Err(Error::InvalidInput(format!("empty box in coordinate {j}")));
            }
        }
        Ok(())
    }

    pub fn has_finite_box(&self) -> bool {
        self.lower.iter().chain(&self.upper).all(|v| v.is_finite())
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        dot(&self.objective, x)
    }

    /// Smallest `Aᵢx − bᵢ` over the hard constraints (`+∞` when there are none).
    pub fn min_slack(&self, x: &[f64]) -> f64 {
        self.constraints.iter().map(|c| c.slack(x)).fold(f64::INFINITY, f64::min)
    }

    /// Number of hard constraints with `Aᵢx < bᵢ − tol`.
    pub fn violations(&self, x: &[f64], tol: f64) -> usize {
        self.constraints.iter().filter(|c| c.slack(x) < -tol).count()
    }

    /// Box bounds as inequality rows for the simplex.
    pub(crate) fn push_box(&self, lp: &mut InequalityLp) {
        for j in 0..self.dim() {
            lp.push_bounds(j, self.lower[j], self.upper[j]);
        }
    }

    pub(crate) fn to_inequality(&self) -> InequalityLp {
        let mut lp = InequalityLp::with_capacity(self.objective.clone(), self.len() + 2 * self.dim());
        for c in &self.constraints {
            lp.push_row(&c.coeffs, c.rhs);
        }
        self.push_box(&mut lp);
        lp
    }

    /// Parses the whitespace text format: `n d`, then `n` rows of `d + 1`
    /// numbers (`Aᵢ` then `bᵢ`), then `g`, then the box lower and upper rows.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let mut next = |what: &str| -> Result<(usize, Vec<f64>)> {
            let (no, line) = lines
                .next()
                .ok_or_else(|| Error::Parse { line: 0, message: format!("missing {what}") })?;
            let nums = line
                .split_whitespace()
                .map(|tok| {
                    tok.parse::<f64>().map_err(|_| Error::Parse { line: no, message: format!("bad number `{tok}`") })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok((no, nums))
        };
        let (no, header) = next("header")?;
        let as_count = |v: f64| -> Result<usize> {
            if v >= 0.0 && v.fract() == 0.0 {
                Ok(v as usize)
            } else {
                Err(Error::Parse { line: no, message: format!("expected a count, got {v}") })
            }
        };
        if header.len() != 2 {
            return Err(Error::Parse { line: no, message: "header must be `n d`".into() });
        }
        let (n, d) = (as_count(header[0])?, as_count(header[1])?);
        let mut expect = |len: usize, what: &str| -> Result<Vec<f64>> {
            let (no, v) = next(what)?;
            if v.len() != len {
                return Err(Error::Parse { line: no, message: format!("{what}: expected {len} numbers, got {}", v.len()) });
            }
            Ok(v)
        };
        let mut constraints = Vec::with_capacity(n);
        for _ in 0..n {
            let mut row = expect(d + 1, "constraint row")?;
            let rhs = row.pop().expect("nonempty row");
            constraints.push(Constraint::new(row, rhs));
        }
        let objective = expect(d, "objective")?;
        let lower = expect(d, "box lower bounds")?;
        let upper = expect(d, "box upper bounds")?;
        Self::new(constraints, objective, lower, upper)
    }

    pub fn read(reader: impl BufRead) -> Result<Self> {
        let text = std::io::read_to_string(reader)?;
        Self::parse(&text)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let join = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
        let _ = writeln!(s, "{} {}", self.len(), self.dim());
        for c in &self.constraints {
            let _ = writeln!(s, "{} {}", join(&c.coeffs), c.rhs);
        }
        let _ = writeln!(s, "{}", join(&self.objective));
        let _ = writeln!(s, "{}", join(&self.lower));
        let _ = writeln!(s, "{}", join(&self.upper));
        s
    }
}

/// Exact optimum of the program, or [`Error::Infeasible`] / [`Error::Unbounded`].
pub fn simplex_solve(lp: &LinearProgram) -> Result<LpSolution> {
    let v = lp.to_inequality().solve()?;
    Ok(LpSolution { x: v.x, value: v.value })
}

/// Width `max(1, maxᵢ max_{x ∈ box} |Aᵢx − bᵢ|)` by interval arithmetic.
///
/// The objective level is accepted for interface symmetry; restricting to
/// `gᵀx = z*` can only shrink the width, so the box bound stays valid.
pub fn lp_width(lp: &LinearProgram, _z_star: f64) -> Result<f64> {
    if let Some(j) = (0..lp.dim()).find(|&j| !lp.lower[j].is_finite() || !lp.upper[j].is_finite()) {
        return Err(Error::UnboundedBox(j));
    }
    Ok(lp
        .constraints
        .iter()
        .map(|c| c.box_width(&lp.lower, &lp.upper))
        .fold(1.0, f64::max))
}
