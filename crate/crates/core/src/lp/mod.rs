//! Linear programs and the metric distortion LP.

mod metric;

use highs::{Col, HighsModelStatus, Model, RowProblem, Sense};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extended::ExtReal;

pub use metric::{
    build_metric_lp, distortion_of, distortion_pair, distortion_pair_with, extract_pseudometric, minimax, minimax_with,
    solve_pair, DistortionReport, LpOptions, MetricLp, RowSet, TAU_LP,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Cmp {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub terms: Vec<(usize, f64)>,
    pub cmp: Cmp,
    pub rhs: f64,
}

impl Constraint {
    /// Amount by which `x` violates the row; nonpositive when satisfied.
    pub fn violation(&self, x: &[f64]) -> f64 {
        let lhs: f64 = self.terms.iter().map(|&(v, c)| c * x[v]).sum();
        match self.cmp {
            Cmp::Le => lhs - self.rhs,
            Cmp::Ge => self.rhs - lhs,
            Cmp::Eq => (lhs - self.rhs).abs(),
        }
    }
}

/// A maximization problem over bounded variables.
///
/// Rows in `lazy` belong to the program like any other; the solver starts
/// without them and adds each one only once the current optimum violates it.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub bounds: Vec<(f64, f64)>,
    pub rows: Vec<Constraint>,
    pub lazy: Vec<Constraint>,
}

impl LinearProgram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add_var(&mut self, objective: f64, lo: f64, hi: f64) -> usize {
        self.objective.push(objective);
        self.bounds.push((lo, hi));
        self.objective.len() - 1
    }

    pub fn add_row(&mut self, terms: Vec<(usize, f64)>, cmp: Cmp, rhs: f64) {
        self.rows.push(Constraint { terms, cmp, rhs });
    }

    pub fn add_lazy_row(&mut self, terms: Vec<(usize, f64)>, cmp: Cmp, rhs: f64) {
        self.lazy.push(Constraint { terms, cmp, rhs });
    }

    /// Every row, eager and lazy.
    pub fn all_rows(&self) -> impl Iterator<Item = &Constraint> {
        self.rows.iter().chain(&self.lazy)
    }

    /// Largest violation of a row or bound by `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let rows = self.all_rows().map(|r| r.violation(x));
        let bounds = self.bounds.iter().zip(x).map(|(&(lo, hi), &v)| (lo - v).max(v - hi));
        rows.chain(bounds).fold(0.0, f64::max)
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LpStatus {
    Optimal,
    Unbounded,
    Infeasible,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpOutcome {
    pub status: LpStatus,
    /// Optimal value, or infinite when unbounded; `None` when infeasible.
    pub value: Option<ExtReal>,
    /// Optimal assignment of every variable.
    pub witness: Option<Vec<f64>>,
    /// Number of solver calls, including re-solves after adding lazy rows.
    pub solves: usize,
}

const LAZY_TOL: f64 = 1e-9;

fn to_bounds(cmp: Cmp, rhs: f64) -> (f64, f64) {
    match cmp {
        Cmp::Le => (f64::NEG_INFINITY, rhs),
        Cmp::Eq => (rhs, rhs),
        Cmp::Ge => (rhs, f64::INFINITY),
    }
}

fn add_to_model(model: &mut Model, cols: &[Col], row: &Constraint) {
    let (lo, hi) = to_bounds(row.cmp, row.rhs);
    model.add_row(lo..=hi, row.terms.iter().map(|&(v, c)| (cols[v], c)));
}

fn build_model(lp: &LinearProgram, rows: &[&Constraint], objective: bool) -> (Model, Vec<Col>) {
    let mut pb = RowProblem::default();
    let cols: Vec<Col> = lp
        .objective
        .iter()
        .zip(&lp.bounds)
        .map(|(&c, &(lo, hi))| pb.add_column(if objective { c } else { 0.0 }, lo..=hi))
        .collect();
    for row in rows {
        let (lo, hi) = to_bounds(row.cmp, row.rhs);
        pb.add_row(lo..=hi, row.terms.iter().map(|&(v, c)| (cols[v], c)));
    }
    let mut model = pb.optimise(Sense::Maximise);
    model.make_quiet();
    model.set_option("threads", 1);
    (model, cols)
}

fn run(model: Model) -> Result<(HighsModelStatus, highs::SolvedModel)> {
    let solved = model
        .try_solve()
        .map_err(|s| Error::Numerical(format!("solver returned {s:?}")))?;
    Ok((solved.status(), solved))
}

/// Solve `lp` to optimality, detecting unboundedness and infeasibility.
///
/// Backed by the HiGHS dual simplex; lazy rows are separated by re-solving
/// from the previous basis.
pub fn solve_lp(lp: &LinearProgram) -> Result<LpOutcome> {
    let mut pool: Vec<&Constraint> = lp.lazy.iter().collect();
    let eager: Vec<&Constraint> = lp.rows.iter().collect();
    let (mut model, cols) = build_model(lp, &eager, true);
    let mut solves = 0;
    loop {
        solves += 1;
        let (status, solved) = run(model)?;
        match status {
            HighsModelStatus::Optimal | HighsModelStatus::ModelEmpty => {
                let x: Vec<f64> = solved.get_solution().columns().to_vec();
                let scale = x.iter().fold(1.0f64, |s, v| s.max(v.abs()));
                let (violated, rest): (Vec<&Constraint>, Vec<&Constraint>) =
                    pool.into_iter().partition(|r| r.violation(&x) > LAZY_TOL * scale);
                pool = rest;
                if violated.is_empty() {
                    return Ok(LpOutcome {
                        status: LpStatus::Optimal,
                        value: Some(ExtReal::Finite(lp.objective_value(&x))),
                        witness: Some(x),
                        solves,
                    });
                }
                model = solved.into();
                for row in violated {
                    add_to_model(&mut model, &cols, row);
                }
            }
            HighsModelStatus::Infeasible => {
                return Ok(LpOutcome {
                    status: LpStatus::Infeasible,
                    value: None,
                    witness: None,
                    solves,
                })
            }
            HighsModelStatus::Unbounded | HighsModelStatus::UnboundedOrInfeasible => {
                // a feasible program with this status has an unbounded relaxation
                let unbounded = status == HighsModelStatus::Unbounded || {
                    let rows: Vec<&Constraint> = lp.all_rows().collect();
                    solves += 1;
                    let (s, _) = run(build_model(lp, &rows, false).0)?;
                    match s {
                        HighsModelStatus::Optimal | HighsModelStatus::ModelEmpty => true,
                        HighsModelStatus::Infeasible => false,
                        other => return Err(Error::Numerical(format!("feasibility check ended with {other:?}"))),
                    }
                };
                if !unbounded {
                    return Ok(LpOutcome {
                        status: LpStatus::Infeasible,
                        value: None,
                        witness: None,
                        solves,
                    });
                }
                if pool.is_empty() {
                    return Ok(LpOutcome {
                        status: LpStatus::Unbounded,
                        value: Some(ExtReal::Infinite),
                        witness: None,
                        solves,
                    });
                }
                // a relaxation is unbounded; only the full row set decides
                model = solved.into();
                for row in pool.drain(..) {
                    add_to_model(&mut model, &cols, row);
                }
            }
            other => return Err(Error::Numerical(format!("solver ended with {other:?}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bounded_optimum() {
        let mut lp = LinearProgram::new();
        let x = lp.add_var(1.0, 0.0, f64::INFINITY);
        lp.add_row(vec![(x, 1.0)], Cmp::Le, 1.0);
        let out = solve_lp(&lp).unwrap();
        assert_eq!(out.status, LpStatus::Optimal);
        assert!((out.value.unwrap().finite().unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn unbounded_ray() {
        let mut lp = LinearProgram::new();
        lp.add_var(1.0, 0.0, f64::INFINITY);
        let out = solve_lp(&lp).unwrap();
        assert_eq!(out.status, LpStatus::Unbounded);
        assert_eq!(out.value, Some(ExtReal::Infinite));
    }

    #[test]
    fn infeasible_rows() {
        let mut lp = LinearProgram::new();
        let x = lp.add_var(0.0, 0.0, f64::INFINITY);
        lp.add_row(vec![(x, 1.0)], Cmp::Le, -1.0);
        assert_eq!(solve_lp(&lp).unwrap().status, LpStatus::Infeasible);
    }

    #[test]
    fn lazy_rows_are_enforced() {
        // max x + y, x + y <= 4 eager, x <= 1 lazy, y <= 2 lazy
        let mut lp = LinearProgram::new();
        let x = lp.add_var(1.0, 0.0, f64::INFINITY);
        let y = lp.add_var(1.0, 0.0, f64::INFINITY);
        lp.add_row(vec![(x, 1.0), (y, 1.0)], Cmp::Le, 4.0);
        lp.add_lazy_row(vec![(x, 1.0)], Cmp::Le, 1.0);
        lp.add_lazy_row(vec![(y, 1.0)], Cmp::Le, 2.0);
        let out = solve_lp(&lp).unwrap();
        assert!((out.value.unwrap().finite().unwrap() - 3.0).abs() < 1e-9);
        assert!(lp.max_violation(out.witness.as_ref().unwrap()) < 1e-9);
    }

    #[test]
    fn lazy_rows_bound_an_unbounded_relaxation() {
        let mut lp = LinearProgram::new();
        let x = lp.add_var(1.0, 0.0, f64::INFINITY);
        lp.add_lazy_row(vec![(x, 2.0)], Cmp::Le, 3.0);
        let out = solve_lp(&lp).unwrap();
        assert!((out.value.unwrap().finite().unwrap() - 1.5).abs() < 1e-9);
    }
}
