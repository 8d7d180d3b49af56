//! The external solver: CBC driven through MPS and its solution file.

use std::fs::File;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use super::mps::{emit_mps, NameMap};
use super::{round_values, RawSolution, SolveError, SolveRequest, SolveStatus, SolverConfig, INTEGRALITY_TOL};
use crate::mip::CanonicalModel;

/// Environment variable naming the solver executable.
pub const SOLVER_ENV: &str = "ROSTER_CBC";

const PULP_PROBE: &str = "import os, pulp; print(os.path.join(os.path.dirname(pulp.__file__), \
    'solverdir', 'cbc', 'linux', 'i64', 'cbc'))";

fn on_path(name: &str) -> Option<PathBuf> {
    let path = std::env::var_os("PATH")?;
    std::env::split_paths(&path).map(|d| d.join(name)).find(|p| p.is_file())
}

fn bundled_with_pulp() -> Option<PathBuf> {
    let out = Command::new("python3").args(["-c", PULP_PROBE]).output().ok()?;
    if !out.status.success() {
        return None;
    }
    let p = PathBuf::from(String::from_utf8_lossy(&out.stdout).trim());
    p.is_file().then_some(p)
}

/// Config path, then the environment, then `PATH`, then the copy shipped with PuLP.
pub fn locate_solver(cfg: &SolverConfig) -> Result<PathBuf, SolveError> {
    if let Some(p) = &cfg.path {
        return if p.is_file() {
            Ok(p.clone())
        } else {
            Err(SolveError::Environment(format!("configured solver {} does not exist", p.display())))
        };
    }
    if let Some(p) = std::env::var_os(SOLVER_ENV) {
        let p = PathBuf::from(p);
        return if p.is_file() {
            Ok(p)
        } else {
            Err(SolveError::Environment(format!("{SOLVER_ENV}={} does not exist", p.display())))
        };
    }
    on_path("cbc").or_else(bundled_with_pulp).ok_or_else(|| {
        SolveError::Environment(format!("no CBC executable found; set {SOLVER_ENV} or install cbc on PATH"))
    })
}

pub fn solver_available(cfg: &SolverConfig) -> bool {
    locate_solver(cfg).is_ok()
}

/// Status line of a solution file.
fn parse_status(first: &str) -> Option<(SolveStatus, Option<f64>)> {
    let obj = first.rsplit_once("objective value").and_then(|(_, v)| v.trim().parse::<f64>().ok());
    let status = if first.starts_with("Optimal") {
        SolveStatus::OptimalWithinGap
    } else if first.starts_with("Infeasible") || first.starts_with("Integer infeasible") {
        SolveStatus::Infeasible
    } else if first.starts_with("Stopped") {
        match obj {
            Some(v) if v.abs() < 1e49 => SolveStatus::Feasible,
            _ => SolveStatus::TimeoutNoSolution,
        }
    } else {
        return None;
    };
    Some((status, obj))
}

fn stdout_value(stdout: &str, key: &str) -> Option<f64> {
    stdout
        .lines()
        .find_map(|l| l.trim().strip_prefix(key))
        .and_then(|rest| rest.split_whitespace().next())
        .and_then(|v| v.parse().ok())
}

/// Best bound CBC reports, in the maximisation sense of the model.
///
/// The summary prints it as `Upper bound:` when the run stopped early; the
/// search messages carry it negated as `best possible`, since CBC minimises
/// internally. A run that closed the gap at the root prints neither, and the
/// LP relaxation value is then the tightest bound in the log.
fn log_bound(stdout: &str) -> Option<f64> {
    if let Some(b) = stdout_value(stdout, "Upper bound:") {
        return Some(b);
    }
    let best_possible = stdout.lines().rev().find_map(|l| {
        let rest = l.split_once("best possible ")?.1;
        rest.split(|c: char| c == ')' || c == ',' || c.is_whitespace()).next()?.parse::<f64>().ok()
    });
    if let Some(b) = best_possible {
        return Some(-b);
    }
    stdout_value(stdout, "Continuous objective value is")
}

/// Parses a CBC solution file into values aligned with the columns of `names`.
pub fn parse_solution(text: &str, names: &NameMap) -> Result<(SolveStatus, Option<f64>, Vec<f64>), String> {
    let mut lines = text.lines();
    let first = lines.next().ok_or("empty solution file")?;
    let (status, obj) = parse_status(first).ok_or_else(|| format!("unrecognised status line {first:?}"))?;
    let lookup = names.column_lookup();
    let mut values = vec![0.0; names.columns.len()];
    for l in lines {
        let f: Vec<&str> = l.split_whitespace().collect();
        if f.is_empty() {
            continue;
        }
        // "**" marks entries CBC considers infeasible
        let f: Vec<&str> = f.into_iter().filter(|s| *s != "**").collect();
        if f.len() < 3 {
            return Err(format!("malformed solution line {l:?}"));
        }
        let &j = lookup.get(f[1]).ok_or_else(|| format!("unknown column {}", f[1]))?;
        values[j] = f[2].parse().map_err(|_| format!("bad value in {l:?}"))?;
    }
    Ok((status, obj, values))
}

/// Seconds past the time limit after which a solver that has not stopped is killed.
fn kill_after(limit: f64) -> Duration {
    Duration::from_secs_f64(limit * 0.5 + 120.0)
}

/// Runs the solver; `None` when it had to be killed.
fn run(exe: &Path, dir: &Path, req: &SolveRequest, cfg: &SolverConfig) -> Result<Option<(String, String)>, SolveError> {
    let mut cmd = Command::new(exe);
    cmd.current_dir(dir).arg("model.mps").arg("-max");
    cmd.args(["-ratio", &req.gap.to_string(), "-sec", &req.time_limit_seconds.to_string()]);
    // unbounded feasibility pump rounds ignore the time limit on large models
    cmd.args(["-passF", "10"]);
    if let Some(t) = cfg.threads {
        cmd.args(["-threads", &t.to_string()]);
    }
    cmd.args(&cfg.extra_flags).args(["-solve", "-solu", "solution.txt"]);
    cmd.stdout(File::create(dir.join("stdout.txt"))?).stderr(File::create(dir.join("stderr.txt"))?);
    let mut child = cmd.spawn().map_err(|e| SolveError::Environment(format!("cannot run {}: {e}", exe.display())))?;
    // CBC does not check its clock inside every heuristic
    let deadline = Instant::now() + Duration::from_secs_f64(req.time_limit_seconds) + kill_after(req.time_limit_seconds);
    let status = loop {
        if let Some(status) = child.try_wait()? {
            break status;
        }
        if Instant::now() >= deadline {
            child.kill()?;
            child.wait()?;
            return Ok(None);
        }
        std::thread::sleep(Duration::from_millis(20));
    };
    let stdout = std::fs::read_to_string(dir.join("stdout.txt")).unwrap_or_default();
    let stderr = std::fs::read_to_string(dir.join("stderr.txt")).unwrap_or_default();
    if !status.success() {
        return Err(SolveError::Protocol { message: format!("solver exited with {status}"), stderr });
    }
    Ok(Some((stdout, stderr)))
}

pub fn invoke_external(
    model: &CanonicalModel,
    req: &SolveRequest,
    cfg: &SolverConfig,
) -> Result<RawSolution, SolveError> {
    req.check()?;
    let exe = locate_solver(cfg)?;
    let mps = emit_mps(model, "roster")?;
    let dir = tempfile::tempdir()?;
    std::fs::write(dir.path().join("model.mps"), &mps.text)?;
    std::fs::write(dir.path().join("names.txt"), mps.names.to_text())?;
    let t0 = Instant::now();
    let Some((stdout, stderr)) = run(&exe, dir.path(), req, cfg)? else {
        return Ok(RawSolution::without_solution(SolveStatus::TimeoutNoSolution, t0.elapsed().as_secs_f64()));
    };
    let seconds = t0.elapsed().as_secs_f64();
    let sol = std::fs::read_to_string(dir.path().join("solution.txt")).map_err(|e| SolveError::Protocol {
        message: format!("no solution file: {e}"),
        stderr: format!("{stderr}{stdout}"),
    })?;
    let (status, reported, mut values) = parse_solution(&sol, &mps.names)
        .map_err(|message| SolveError::Protocol { message, stderr: stderr.clone() })?;
    if !status.has_solution() {
        return Ok(RawSolution::without_solution(status, seconds));
    }
    if status == SolveStatus::Feasible {
        // a stopped run may print an LP iterate instead of an incumbent
        let usable = round_values(model, &mut values).is_ok() && model.first_violation(&values, INTEGRALITY_TOL).is_none();
        if !usable {
            return Ok(RawSolution::without_solution(SolveStatus::TimeoutNoSolution, seconds));
        }
    }
    round_values(model, &mut values)?;
    let objective = model.objective_value(&values);
    if let Some(r) = reported {
        if (r - objective).abs() > 1e-6 * objective.abs().max(1.0) {
            return Err(SolveError::Protocol {
                message: format!("reported objective {r} disagrees with {objective} recomputed from the values"),
                stderr,
            });
        }
    }
    let (bound, gap) = match status {
        SolveStatus::OptimalWithinGap if req.gap == 0.0 => (Some(objective), Some(0.0)),
        _ => {
            let bound = log_bound(&stdout).filter(|b| b.is_finite());
            let gap = bound.map(|b| (b - objective).max(0.0) / objective.abs().max(1e-9));
            (bound, gap)
        }
    };
    Ok(RawSolution { status, values, objective: Some(objective), bound, gap, solver_seconds: seconds })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn status_lines() {
        assert_eq!(parse_status("Optimal - objective value 3.00000000"), Some((SolveStatus::OptimalWithinGap, Some(3.0))));
        assert_eq!(parse_status("Infeasible - objective value 0.00000000").unwrap().0, SolveStatus::Infeasible);
        assert_eq!(
            parse_status("Stopped on time - objective value 1e+50").unwrap().0,
            SolveStatus::TimeoutNoSolution
        );
        assert_eq!(parse_status("Stopped on time - objective value 12.5").unwrap().0, SolveStatus::Feasible);
        assert_eq!(parse_status("Unbounded"), None);
    }

    #[test]
    fn bounds_from_the_log() {
        let stopped = "Cbc0005I Partial search - best objective -293968 (best possible -391731.27), took 1 iterations\n\
                       Objective value:                293968.00000000\nUpper bound:                    391731.271\n";
        assert_eq!(log_bound(stopped), Some(391731.271));
        let searching = "Cbc0010I After 100 nodes, 3 on tree, -120 best solution, best possible -130.5 (1.2 seconds)\n";
        assert_eq!(log_bound(searching), Some(130.5));
        let root = "Continuous objective value is 124500 - 10.26 seconds\nObjective value:                124500.00000000\n";
        assert_eq!(log_bound(root), Some(124500.0));
        assert_eq!(log_bound("Result - Optimal solution found\n"), None);
    }

    #[test]
    fn solution_lines() {
        let names = NameMap {
            columns: vec![("C0000000".into(), "x[a,b]".into()), ("C0000001".into(), "y[a,c]".into())],
            rows: vec![],
        };
        let text = "Optimal - objective value 3.00000000\n      0 C0000000               1                       3\n";
        let (s, o, v) = parse_solution(text, &names).unwrap();
        assert_eq!((s, o, v), (SolveStatus::OptimalWithinGap, Some(3.0), vec![1.0, 0.0]));
        assert!(parse_solution("", &names).is_err());
        assert!(parse_solution("Optimal - objective value 1\n 0 C9999999 1 1\n", &names).is_err());
    }

    #[test]
    fn missing_configured_solver_is_an_environment_error() {
        let cfg = SolverConfig { path: Some("/nonexistent/cbc".into()), ..Default::default() };
        assert!(matches!(locate_solver(&cfg), Err(SolveError::Environment(_))));
    }
}
