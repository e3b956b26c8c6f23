//! Subprocess backend: MPS out, solver solution file back in.
//!
//! The argv template uses `{mps}`, `{sol}`, `{time_limit}`, `{gap}` and
//! `{threads}` placeholders. The default template matches the HiGHS
//! command-line interface, which the bundled `pipesched solve-mps` subcommand
//! also implements, so the engine can act as its own external solver.

use super::{emit_mps, Backend, Solution, SolveStatus, SolverConfig, INTEGRALITY_TOL};
use crate::error::SolveError;
use crate::model::ModelInstance;
use std::process::Command;
use std::time::Instant;

pub struct ExternalBackend {
    /// argv[0] plus leading arguments (the env var may carry e.g.
    /// `pipesched solve-mps`).
    command: Vec<String>,
    template: Vec<String>,
}

impl ExternalBackend {
    pub fn from_config(cfg: &SolverConfig) -> Result<Self, SolveError> {
        let raw = std::env::var("PIPESCHED_SOLVER")
            .ok()
            .or_else(|| cfg.solver_path.clone())
            .ok_or_else(|| {
                SolveError::BackendUnavailable(
                    "external".into(),
                    "set --solver-path or the PIPESCHED_SOLVER environment variable".into(),
                )
            })?;
        let command: Vec<String> = raw.split_whitespace().map(str::to_string).collect();
        if command.is_empty() {
            return Err(SolveError::BackendUnavailable(
                "external".into(),
                "empty solver command".into(),
            ));
        }
        Ok(ExternalBackend {
            command,
            template: vec![
                "{mps}".into(),
                "--solution_file".into(),
                "{sol}".into(),
                "--time_limit".into(),
                "{time_limit}".into(),
                "--mip_rel_gap".into(),
                "{gap}".into(),
            ],
        })
    }

    pub fn with_template(command: Vec<String>, template: Vec<String>) -> Self {
        ExternalBackend { command, template }
    }
}

impl Backend for ExternalBackend {
    fn name(&self) -> &str {
        "external"
    }

    fn solve(&self, m: &ModelInstance, cfg: &SolverConfig) -> Result<Solution, SolveError> {
        let start = Instant::now();
        let dir = tempfile::tempdir()?;
        let mps_path = dir.path().join("model.mps");
        let sol_path = dir.path().join("model.sol");
        std::fs::write(&mps_path, emit_mps(m).text)?;

        let subst = |arg: &str| -> String {
            arg.replace("{mps}", &mps_path.display().to_string())
                .replace("{sol}", &sol_path.display().to_string())
                .replace("{time_limit}", &cfg.time_limit.to_string())
                .replace("{gap}", &cfg.mip_gap.to_string())
                .replace("{threads}", &cfg.threads.to_string())
        };

        let mut cmd = Command::new(&self.command[0]);
        for arg in &self.command[1..] {
            cmd.arg(arg);
        }
        for arg in &self.template {
            cmd.arg(subst(arg));
        }
        let output = cmd.output().map_err(|e| {
            SolveError::BackendUnavailable(self.command[0].clone(), e.to_string())
        })?;
        if !output.status.success() {
            return Err(SolveError::SolverCrash {
                detail: format!("{} exited with {}", self.command[0], output.status),
                stderr: String::from_utf8_lossy(&output.stderr).into_owned(),
            });
        }
        let text = std::fs::read_to_string(&sol_path).map_err(|e| SolveError::SolverCrash {
            detail: format!("no solution file at {}: {e}", sol_path.display()),
            stderr: String::from_utf8_lossy(&output.stderr).into_owned(),
        })?;
        let mut sol = parse_solution(&text, m)?;
        sol.solve_seconds = start.elapsed().as_secs_f64();
        Ok(sol)
    }
}

/// Parses a solver solution file in the HiGHS raw style:
///
/// ```text
/// Model status
/// Optimal
///
/// # Primal solution values
/// Feasible
/// Objective 42
/// # Columns 2
/// x_0 1
/// x_1 0.5
/// ...
/// ```
///
/// Unknown column names are ignored; declared variables absent from the file
/// default to 0 and are flagged in [`Solution::missing`].
pub fn parse_solution(text: &str, m: &ModelInstance) -> Result<Solution, SolveError> {
    let mut status = None;
    let mut objective = f64::NAN;
    let mut values = vec![0.0f64; m.variables.len()];
    let mut seen = vec![false; m.variables.len()];

    let name_index: std::collections::HashMap<String, usize> = m
        .variables
        .iter()
        .enumerate()
        .map(|(i, v)| (v.vref.to_string(), i))
        .collect();

    let mut lines = text.lines().enumerate().peekable();
    while let Some((ln, line)) = lines.next() {
        let trimmed = line.trim();
        if trimmed == "Model status" {
            let (ln2, status_line) = lines.next().ok_or(SolveError::SolutionFormat {
                line: ln + 1,
                detail: "file ends after `Model status`".into(),
            })?;
            status = Some(match status_line.trim() {
                "Optimal" => SolveStatus::Optimal,
                "Infeasible" => SolveStatus::Infeasible,
                "Time limit reached" => SolveStatus::TimeLimit,
                "Feasible" => SolveStatus::Feasible,
                other => {
                    if other.is_empty() {
                        return Err(SolveError::SolutionFormat {
                            line: ln2 + 1,
                            detail: "empty model status".into(),
                        });
                    }
                    SolveStatus::Error
                }
            });
        } else if let Some(rest) = trimmed.strip_prefix("Objective") {
            objective = rest
                .trim()
                .parse()
                .map_err(|e| SolveError::SolutionFormat {
                    line: ln + 1,
                    detail: format!("bad objective value: {e}"),
                })?;
        } else if let Some(rest) = trimmed.strip_prefix("# Columns") {
            let n: usize = rest.trim().parse().map_err(|e| SolveError::SolutionFormat {
                line: ln + 1,
                detail: format!("bad column count: {e}"),
            })?;
            for i in 0..n {
                let (ln2, entry) = lines.next().ok_or(SolveError::SolutionFormat {
                    line: ln + 1 + i,
                    detail: format!("expected {n} column lines, file truncated"),
                })?;
                let mut parts = entry.split_whitespace();
                let name = parts.next().ok_or(SolveError::SolutionFormat {
                    line: ln2 + 1,
                    detail: "missing column name".into(),
                })?;
                let value: f64 = parts
                    .next()
                    .ok_or(SolveError::SolutionFormat {
                        line: ln2 + 1,
                        detail: format!("missing value for column {name}"),
                    })?
                    .parse()
                    .map_err(|e| SolveError::SolutionFormat {
                        line: ln2 + 1,
                        detail: format!("bad value for column {name}: {e}"),
                    })?;
                if let Some(&idx) = name_index.get(name) {
                    values[idx] = value;
                    seen[idx] = true;
                }
            }
            // Only the primal column block matters; stop before dual sections
            // reuse the same header.
            break;
        }
    }

    let status = status.ok_or(SolveError::SolutionFormat {
        line: 1,
        detail: "no `Model status` header found".into(),
    })?;

    let missing: Vec<String> = if matches!(status, SolveStatus::Optimal | SolveStatus::Feasible) {
        m.variables
            .iter()
            .enumerate()
            .filter(|(i, _)| !seen[*i])
            .map(|(_, v)| v.vref.to_string())
            .collect()
    } else {
        Vec::new()
    };

    // Snap near-integral binaries.
    for (idx, var) in m.variables.iter().enumerate() {
        if var.integer {
            let r = values[idx].round();
            if (values[idx] - r).abs() <= INTEGRALITY_TOL {
                values[idx] = r;
            }
        }
    }

    Ok(Solution {
        status,
        objective,
        values,
        gap: f64::NAN,
        solve_seconds: 0.0,
        missing,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{BigM, Dims, LinearConstraint, ModelInstance, Sense, Variable, VarRef};

    fn three_var_model() -> ModelInstance {
        let mk = |vref, integer| Variable {
            vref,
            lb: 0.0,
            ub: if integer { 1.0 } else { f64::INFINITY },
            integer,
        };
        ModelInstance::new(
            vec![
                mk(VarRef::C { k: 0 }, false),
                mk(VarRef::L { k: 0 }, false),
                mk(VarRef::B { k: 0, e: 1 }, true),
            ],
            vec![LinearConstraint {
                terms: vec![(VarRef::C { k: 0 }, 1.0), (VarRef::L { k: 0 }, -1.0)],
                sense: Sense::Ge,
                rhs: 0.0,
                tag: "eq1",
            }],
            vec![(VarRef::C { k: 0 }, 1.0)],
            BigM { m_time: 1.0, m_vol: 1.0, m_count: 1.0 },
            Dims { runs: 1, batches: 0, sources: 0, depots: 0, products: 0, intervals: 1 },
        )
    }

    #[test]
    fn round_trip_hand_written_solution() {
        let m = three_var_model();
        let text = "Model status\nOptimal\n\n# Primal solution values\nFeasible\nObjective 3.5\n# Columns 3\nC_0 3.5\nL_0 1.25\nb_0_1 1\n";
        let sol = parse_solution(text, &m).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert_eq!(sol.objective, 3.5);
        assert_eq!(sol.get(&m, VarRef::C { k: 0 }), 3.5);
        assert_eq!(sol.get(&m, VarRef::L { k: 0 }), 1.25);
        assert!(sol.missing.is_empty());
    }

    #[test]
    fn near_integral_binary_snaps() {
        let m = three_var_model();
        let text = "Model status\nOptimal\n\n# Primal solution values\nFeasible\nObjective 0\n# Columns 3\nC_0 0\nL_0 0\nb_0_1 0.999995\n";
        let sol = parse_solution(text, &m).unwrap();
        assert_eq!(sol.get(&m, VarRef::B { k: 0, e: 1 }), 1.0);
    }

    #[test]
    fn truncated_file_reports_line() {
        let m = three_var_model();
        let text = "Model status\nOptimal\n\n# Primal solution values\nFeasible\nObjective 0\n# Columns 3\nC_0 0\n";
        let err = parse_solution(text, &m).unwrap_err();
        match err {
            SolveError::SolutionFormat { detail, .. } => {
                assert!(detail.contains("truncated"), "{detail}")
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn missing_variables_are_flagged() {
        let m = three_var_model();
        let text = "Model status\nOptimal\n\n# Primal solution values\nFeasible\nObjective 0\n# Columns 1\nC_0 2\n";
        let sol = parse_solution(text, &m).unwrap();
        assert_eq!(sol.missing.len(), 2);
        assert_eq!(sol.get(&m, VarRef::L { k: 0 }), 0.0);
    }
}
