//! In-process HiGHS backend.

use super::{Backend, Solution, SolveStatus, SolverConfig};
use crate::error::SolveError;
use crate::model::{ModelInstance, Sense};
use highs::{HighsModelStatus, RowProblem};
use std::time::Instant;

pub struct HighsBackend;

impl Backend for HighsBackend {
    fn name(&self) -> &str {
        "highs"
    }

    fn solve(&self, m: &ModelInstance, cfg: &SolverConfig) -> Result<Solution, SolveError> {
        let start = Instant::now();
        let mut obj = vec![0.0; m.variables.len()];
        for (v, coef) in &m.objective {
            obj[m.var_index(*v)] += *coef;
        }

        let mut pb = RowProblem::default();
        let mut cols = Vec::with_capacity(m.variables.len());
        for (ci, var) in m.variables.iter().enumerate() {
            let integer = var.integer && !cfg.relax_integrality;
            let col = if var.ub.is_finite() {
                pb.add_column_with_integrality(obj[ci], var.lb..=var.ub, integer)
            } else {
                pb.add_column_with_integrality(obj[ci], var.lb.., integer)
            };
            cols.push(col);
        }

        for c in &m.constraints {
            let factors: Vec<_> = c
                .terms
                .iter()
                .map(|(v, coef)| (cols[m.var_index(*v)], *coef))
                .collect();
            match c.sense {
                Sense::Le => pb.add_row(..=c.rhs, &factors),
                Sense::Ge => pb.add_row(c.rhs.., &factors),
                Sense::Eq => pb.add_row(c.rhs..=c.rhs, &factors),
            };
        }

        let mut model = pb.optimise(highs::Sense::Minimise);
        model.make_quiet();
        model.set_option("time_limit", cfg.time_limit);
        model.set_option("mip_rel_gap", cfg.mip_gap);
        model.set_option("threads", cfg.threads as i32);
        model.set_option("random_seed", 0);

        let solved = model.solve();
        let status = solved.status();
        let solve_seconds = start.elapsed().as_secs_f64();

        let mapped = match status {
            HighsModelStatus::Optimal => SolveStatus::Optimal,
            HighsModelStatus::Infeasible => SolveStatus::Infeasible,
            HighsModelStatus::ReachedTimeLimit => SolveStatus::TimeLimit,
            HighsModelStatus::ReachedIterationLimit => SolveStatus::TimeLimit,
            _ => SolveStatus::Error,
        };

        let (objective, values) = match mapped {
            SolveStatus::Optimal | SolveStatus::Feasible => {
                let sol = solved.get_solution();
                (solved.objective_value(), sol.columns().to_vec())
            }
            SolveStatus::TimeLimit => {
                // A time-limited run may still carry a feasible incumbent.
                let sol = solved.get_solution();
                let values = sol.columns().to_vec();
                if values.len() == m.variables.len()
                    && super::check_solution(m, &values, 1e-4).is_empty()
                {
                    (solved.objective_value(), values)
                } else {
                    (f64::NAN, Vec::new())
                }
            }
            _ => (f64::NAN, Vec::new()),
        };

        Ok(Solution {
            status: mapped,
            objective,
            values,
            gap: if mapped == SolveStatus::Optimal { cfg.mip_gap } else { f64::NAN },
            solve_seconds,
            missing: Vec::new(),
        })
    }
}
