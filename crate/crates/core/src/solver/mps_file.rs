//! Solves an MPS file through the HiGHS C API and writes a raw-style solution
//! file. This backs the `solve-mps` subcommand, which follows the HiGHS
//! command-line conventions so the engine can serve as its own external
//! solver process, and doubles as a reference check that emitted MPS files
//! are accepted by an independent reader.

use crate::error::SolveError;
use std::ffi::CString;
use std::os::raw::c_char;
use std::path::Path;

#[derive(Debug, Clone)]
pub struct MpsSolveOutcome {
    pub model_status: String,
    pub objective: f64,
    /// HiGHS returned a warning while reading the model.
    pub read_warning: bool,
}

fn cpath(path: &Path) -> Result<CString, SolveError> {
    CString::new(path.display().to_string()).map_err(|_| SolveError::SolverCrash {
        detail: format!("path {} contains NUL", path.display()),
        stderr: String::new(),
    })
}

/// Reads `mps`, solves it, and (optionally) writes the solution in the raw
/// HiGHS format understood by [`super::parse_solution`].
pub fn solve_mps_file(
    mps: &Path,
    solution_out: Option<&Path>,
    time_limit: f64,
    mip_gap: f64,
    threads: usize,
) -> Result<MpsSolveOutcome, SolveError> {
    unsafe {
        let h = highs_sys::Highs_create();
        let done = scopeguard(h);

        let set_bool = |name: &str, v: i32| {
            let n = CString::new(name).unwrap();
            highs_sys::Highs_setBoolOptionValue(done.0, n.as_ptr(), v);
        };
        let set_f64 = |name: &str, v: f64| {
            let n = CString::new(name).unwrap();
            highs_sys::Highs_setDoubleOptionValue(done.0, n.as_ptr(), v);
        };
        let set_i32 = |name: &str, v: i32| {
            let n = CString::new(name).unwrap();
            highs_sys::Highs_setIntOptionValue(done.0, n.as_ptr(), v);
        };
        set_bool("output_flag", 0);
        set_f64("time_limit", time_limit);
        set_f64("mip_rel_gap", mip_gap);
        set_i32("threads", threads as i32);
        set_i32("random_seed", 0);

        let path = cpath(mps)?;
        let read_status = highs_sys::Highs_readModel(h, path.as_ptr());
        if read_status == highs_sys::STATUS_ERROR {
            return Err(SolveError::SolverCrash {
                detail: format!("HiGHS rejected the model file {}", mps.display()),
                stderr: String::new(),
            });
        }
        let read_warning = read_status == highs_sys::STATUS_WARNING;

        let run_status = highs_sys::Highs_run(h);
        if run_status == highs_sys::STATUS_ERROR {
            return Err(SolveError::SolverCrash {
                detail: "HiGHS run failed".into(),
                stderr: String::new(),
            });
        }

        let model_status = highs_sys::Highs_getModelStatus(h);
        let objective = highs_sys::Highs_getObjectiveValue(h);

        if let Some(out) = solution_out {
            let out_c = cpath(out)?;
            highs_sys::Highs_writeSolution(h, out_c.as_ptr());
        }

        Ok(MpsSolveOutcome {
            model_status: status_name(model_status).to_string(),
            objective,
            read_warning,
        })
    }
}

fn status_name(status: highs_sys::HighsInt) -> &'static str {
    match status {
        highs_sys::MODEL_STATUS_OPTIMAL => "Optimal",
        highs_sys::MODEL_STATUS_INFEASIBLE => "Infeasible",
        highs_sys::MODEL_STATUS_UNBOUNDED => "Unbounded",
        highs_sys::MODEL_STATUS_UNBOUNDED_OR_INFEASIBLE => "UnboundedOrInfeasible",
        highs_sys::MODEL_STATUS_REACHED_TIME_LIMIT => "Time limit reached",
        highs_sys::MODEL_STATUS_REACHED_ITERATION_LIMIT => "Iteration limit reached",
        _ => "Unknown",
    }
}

struct Guard(*mut std::ffi::c_void);
impl Drop for Guard {
    fn drop(&mut self) {
        unsafe { highs_sys::Highs_destroy(self.0) }
    }
}

fn scopeguard(h: *mut std::ffi::c_void) -> Guard {
    Guard(h)
}

// Keep the c_char import used across bindgen signature variations.
#[allow(dead_code)]
type PathChar = c_char;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::emit_mps;

    #[test]
    fn emitted_mps_is_accepted_and_solved() {
        let m = crate::solver::tests::tiny_min_x();
        let doc = emit_mps(&m);
        let dir = tempfile::tempdir().unwrap();
        let mps = dir.path().join("tiny.mps");
        std::fs::write(&mps, &doc.text).unwrap();
        let sol = dir.path().join("tiny.sol");
        let outcome = solve_mps_file(&mps, Some(&sol), 10.0, 1e-6, 1).unwrap();
        assert_eq!(outcome.model_status, "Optimal");
        assert!(!outcome.read_warning, "reference reader warned");
        assert!((outcome.objective - 1.0).abs() < 1e-9);
        let text = std::fs::read_to_string(&sol).unwrap();
        let parsed = crate::solver::parse_solution(&text, &m).unwrap();
        assert_eq!(parsed.status, crate::solver::SolveStatus::Optimal);
        assert!((parsed.get(&m, crate::model::VarRef::Bc) - 1.0).abs() < 1e-9);
    }
}
