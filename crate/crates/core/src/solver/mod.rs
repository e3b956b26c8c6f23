//! Bridges a [`ModelInstance`](crate::model::ModelInstance) to a MILP solver.
//!
//! The default backend runs HiGHS in-process. The `external` backend writes
//! MPS to a temporary directory, invokes a solver executable (overridable via
//! the `PIPESCHED_SOLVER` environment variable), and parses its solution file.

mod external;
mod highs_backend;
mod mps;
mod mps_file;

pub use external::{parse_solution, ExternalBackend};
pub use highs_backend::HighsBackend;
pub use mps::{emit_mps, emit_mps_fixed, MpsDocument, MpsFormat};
pub use mps_file::{solve_mps_file, MpsSolveOutcome};

use crate::error::SolveError;
use crate::model::{ModelInstance, Sense, VarRef};
use serde::Serialize;

/// Absolute tolerance for binaries to count as integral.
pub const INTEGRALITY_TOL: f64 = 1e-5;
/// Absolute tolerance when checking constraint satisfaction.
pub const FEASIBILITY_TOL: f64 = 1e-5;

#[derive(Debug, Clone)]
pub struct SolverConfig {
    /// Backend identifier: `highs` (in-process, default) or `external`.
    pub backend: String,
    /// Wall-clock limit in seconds.
    pub time_limit: f64,
    /// Relative MIP gap.
    pub mip_gap: f64,
    pub threads: usize,
    /// Executable for the external backend; `PIPESCHED_SOLVER` overrides it.
    pub solver_path: Option<String>,
    /// Solve the LP relaxation instead of the MILP.
    pub relax_integrality: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            backend: "highs".into(),
            time_limit: 600.0,
            mip_gap: 1e-6,
            threads: 1,
            solver_path: None,
            relax_integrality: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SolveStatus {
    Optimal,
    Feasible,
    Infeasible,
    TimeLimit,
    Error,
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub status: SolveStatus,
    /// Objective value as reported by the solver.
    pub objective: f64,
    /// One value per declared variable, in declaration order.
    pub values: Vec<f64>,
    /// Relative MIP gap at termination (0 for proven optima).
    pub gap: f64,
    pub solve_seconds: f64,
    /// Variables absent from a parsed solution file (defaulted to 0).
    pub missing: Vec<String>,
}

impl Solution {
    pub fn get(&self, m: &ModelInstance, v: VarRef) -> f64 {
        self.values[m.var_index(v)]
    }

    pub fn has_plan(&self) -> bool {
        matches!(self.status, SolveStatus::Optimal | SolveStatus::Feasible)
    }

    /// Snaps binaries within [`INTEGRALITY_TOL`] of an integer onto it.
    pub fn snap_integers(&mut self, m: &ModelInstance) {
        for (idx, var) in m.variables.iter().enumerate() {
            if var.integer {
                let v = self.values[idx];
                let r = v.round();
                if (v - r).abs() <= INTEGRALITY_TOL {
                    self.values[idx] = r;
                }
            }
        }
    }

    /// First binary that is not within tolerance of an integer, if any.
    pub fn fractional_binary(&self, m: &ModelInstance) -> Option<(String, f64)> {
        for (idx, var) in m.variables.iter().enumerate() {
            if var.integer {
                let v = self.values[idx];
                if (v - v.round()).abs() > INTEGRALITY_TOL {
                    return Some((var.vref.to_string(), v));
                }
            }
        }
        None
    }
}

/// A registered way of solving a model.
pub trait Backend {
    fn name(&self) -> &str;
    fn solve(&self, m: &ModelInstance, cfg: &SolverConfig) -> Result<Solution, SolveError>;
}

/// Picks the backend for a configuration.
pub fn backend_for(cfg: &SolverConfig) -> Result<Box<dyn Backend>, SolveError> {
    match cfg.backend.as_str() {
        "highs" => Ok(Box::new(HighsBackend)),
        "external" => Ok(Box::new(ExternalBackend::from_config(cfg)?)),
        other => Err(SolveError::BackendUnavailable(
            other.to_string(),
            "known backends: highs, external".into(),
        )),
    }
}

/// Solves a model with the configured backend.
pub fn solve(m: &ModelInstance, cfg: &SolverConfig) -> Result<Solution, SolveError> {
    if m.variables.is_empty() {
        return Err(SolveError::EmptyModel);
    }
    let backend = backend_for(cfg)?;
    let mut sol = backend.solve(m, cfg)?;
    if !cfg.relax_integrality {
        sol.snap_integers(m);
    }
    Ok(sol)
}

#[derive(Debug, Clone, Serialize)]
pub struct ConstraintViolation {
    pub row: String,
    pub tag: String,
    pub activity: f64,
    pub sense: String,
    pub rhs: f64,
}

/// Generic row-by-row feasibility check of an assignment, independent of the
/// plug-flow verifier.
pub fn check_solution(m: &ModelInstance, values: &[f64], tol: f64) -> Vec<ConstraintViolation> {
    let mut out = Vec::new();
    let mut ordinals = std::collections::HashMap::new();
    for c in &m.constraints {
        let ord = ordinals.entry(c.tag).or_insert(0usize);
        let activity = m.activity(c, values);
        let violated = match c.sense {
            Sense::Le => activity > c.rhs + tol,
            Sense::Ge => activity < c.rhs - tol,
            Sense::Eq => (activity - c.rhs).abs() > tol,
        };
        if violated {
            out.push(ConstraintViolation {
                row: format!("{}_{:04}", c.tag, ord),
                tag: c.tag.to_string(),
                activity,
                sense: c.sense.to_string(),
                rhs: c.rhs,
            });
        }
        *ord += 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_model, BuildOptions};
    use crate::scenario::load_scenario_str;

    #[test]
    fn tiny_model_solves_to_one() {
        // min x subject to x >= 1
        let mut m = tiny_min_x();
        let cfg = SolverConfig::default();
        let sol = solve(&m, &cfg).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!((sol.objective - 1.0).abs() < 1e-9);
        m.constraints[0].rhs = 2.0;
        let sol = solve(&m, &cfg).unwrap();
        assert!((sol.objective - 2.0).abs() < 1e-9);
    }

    #[test]
    fn contradictory_bounds_are_infeasible() {
        let mut m = tiny_min_x();
        m.variables[0].ub = 0.0;
        // x <= 0 while the row demands x >= 1
        let sol = solve(&m, &SolverConfig::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::Infeasible);
    }

    #[test]
    fn lp_relaxation_never_exceeds_mip() {
        let s = load_scenario_str(include_str!("../../data/case_study.json")).unwrap();
        let mut small = s.clone();
        small.run_count = 2;
        let m = build_model(&small, &BuildOptions::default());
        let mip = solve(&m, &SolverConfig { time_limit: 120.0, ..Default::default() }).unwrap();
        let lp = solve(
            &m,
            &SolverConfig { relax_integrality: true, ..Default::default() },
        )
        .unwrap();
        assert!(lp.objective <= mip.objective + 1e-6 * mip.objective.abs().max(1.0));
    }

    pub(crate) fn tiny_min_x() -> crate::model::ModelInstance {
        use crate::model::*;
        ModelInstance::new(
            vec![Variable {
                vref: VarRef::Bc,
                lb: 0.0,
                ub: f64::INFINITY,
                integer: false,
            }],
            vec![LinearConstraint {
                terms: vec![(VarRef::Bc, 1.0)],
                sense: Sense::Ge,
                rhs: 1.0,
                tag: "eq2",
            }],
            vec![(VarRef::Bc, 1.0)],
            BigM { m_time: 1.0, m_vol: 1.0, m_count: 1.0 },
            Dims { runs: 0, batches: 0, sources: 0, depots: 0, products: 0, intervals: 0 },
        )
    }
}
