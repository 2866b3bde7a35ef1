use std::io::Write;

use crate::error::{BenchError, Result};
use crate::metrics::TimingReport;
use crate::record::TrajectoryRecord;

/// First line of every result table.
pub const CSV_HEADER: &str = "# contactbench-csv v1";

/// Quantity integrated by the consistency metrics.
pub const CONSISTENCY_INTEGRAND: &str = "com_position";

fn csv_error(e: ::csv::Error) -> BenchError {
    BenchError::InvalidArgument(format!("csv: {e}"))
}

fn io_error(e: std::io::Error) -> BenchError {
    BenchError::Io { path: "<csv>".into(), source: e }
}

fn write_metadata(out: &mut Vec<u8>, entries: &[(&str, String)]) -> Result<()> {
    writeln!(out, "{CSV_HEADER}").map_err(io_error)?;
    for (k, v) in entries {
        writeln!(out, "# {k}={v}").map_err(io_error)?;
    }
    Ok(())
}

fn fmt(x: f64) -> String {
    format!("{x:e}")
}

/// Column names of a trajectory table with `bodies` bodies and `contacts` contact slots.
pub fn trajectory_columns(bodies: usize, contacts: usize) -> Vec<String> {
    let mut cols = vec!["t".to_string()];
    for b in 0..bodies {
        for f in ["px", "py", "pz", "qw", "qx", "qy", "qz", "vx", "vy", "vz", "wx", "wy", "wz"] {
            cols.push(format!("b{b}_{f}"));
        }
    }
    for c in 0..contacts {
        for f in ["feature", "lam_n", "lam_t1", "lam_t2", "c_n", "c_t1", "c_t2", "eps_p", "eps_d", "eps_c"] {
            cols.push(format!("c{c}_{f}"));
        }
    }
    for f in ["contacts", "ncp_criterion", "stop_criterion", "energy", "iterations", "converged", "solve_time_ns"] {
        cols.push(f.to_string());
    }
    cols
}

/// Renders a trajectory as a v1 table.
///
/// Contact slots follow the sorted feature order of each step; absent
/// slots are left empty. Feature ids read `body:other:corner` with `f`
/// for the floor.
pub fn trajectory_csv(record: &TrajectoryRecord, scenario: &str) -> Result<String> {
    let bodies = record.initial_states.len();
    let slots = record.max_contacts();
    let (t1, t2) = record.tangents;
    let mut out = Vec::new();
    write_metadata(
        &mut out,
        &[
            ("scenario", scenario.to_string()),
            ("solver", record.solver.to_string()),
            ("dt", fmt(record.dt)),
            ("consistency_integrand", CONSISTENCY_INTEGRAND.to_string()),
            ("tangent_t1", format!("{} {} {}", fmt(t1.x), fmt(t1.y), fmt(t1.z))),
            ("tangent_t2", format!("{} {} {}", fmt(t2.x), fmt(t2.y), fmt(t2.z))),
            ("initial_energy", fmt(record.initial_energy)),
        ],
    )?;
    let mut w = ::csv::Writer::from_writer(out);
    w.write_record(trajectory_columns(bodies, slots)).map_err(csv_error)?;
    for s in &record.steps {
        let mut row = vec![fmt(s.time)];
        for st in &s.states {
            let q = st.orientation.quaternion();
            for v in [
                st.position.x,
                st.position.y,
                st.position.z,
                q.w,
                q.i,
                q.j,
                q.k,
                st.linear_velocity.x,
                st.linear_velocity.y,
                st.linear_velocity.z,
                st.angular_velocity.x,
                st.angular_velocity.y,
                st.angular_velocity.z,
            ] {
                row.push(fmt(v));
            }
        }
        for k in 0..slots {
            match s.contacts.get(k) {
                Some(c) => {
                    let f = c.feature;
                    let other = f.other.map_or("f".to_string(), |o| o.to_string());
                    row.push(format!("{}:{other}:{}", f.body, f.corner));
                    for v in [
                        c.lambda.x,
                        c.lambda.y,
                        c.lambda.z,
                        c.velocity.x,
                        c.velocity.y,
                        c.velocity.z,
                        c.primal,
                        c.dual,
                        c.complementarity,
                    ] {
                        row.push(fmt(v));
                    }
                }
                None => row.extend(std::iter::repeat_n(String::new(), 10)),
            }
        }
        row.push(s.contacts.len().to_string());
        row.push(fmt(s.ncp_criterion));
        row.push(fmt(s.stop_criterion));
        row.push(fmt(s.energy));
        row.push(s.iterations.to_string());
        row.push(u8::from(s.converged).to_string());
        row.push(s.solve_time_ns.to_string());
        w.write_record(&row).map_err(csv_error)?;
    }
    let bytes = w.into_inner().map_err(|e| csv_error(e.into_error().into()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Renders the per-step cold and warm statistics of a timing run.
pub fn timing_csv(report: &TimingReport, scenario: &str, dt: f64) -> Result<String> {
    let mut out = Vec::new();
    write_metadata(
        &mut out,
        &[("scenario", scenario.to_string()), ("solver", report.solver.to_string()), ("dt", fmt(dt))],
    )?;
    let mut w = ::csv::Writer::from_writer(out);
    w.write_record(["t", "contacts", "cold_iterations", "warm_iterations", "cold_solve_time_ns", "warm_solve_time_ns"])
        .map_err(csv_error)?;
    for s in &report.per_step {
        w.write_record([
            fmt(s.time),
            s.contacts.to_string(),
            s.cold_iterations.to_string(),
            s.warm_iterations.to_string(),
            s.cold_time_ns.to_string(),
            s.warm_time_ns.to_string(),
        ])
        .map_err(csv_error)?;
    }
    let bytes = w.into_inner().map_err(|e| csv_error(e.into_error().into()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::record::run_solver;
    use crate::scenario::Builtin;
    use contactbench_core::{SolverConfig, SolverKind};

    #[test]
    fn table_has_header_metadata_and_one_row_per_step() {
        let scene = Builtin::sliding_cube().scene(0.01).unwrap();
        let r = run_solver(&scene, SolverKind::NcpPgs, &SolverConfig::default(), 5, true).unwrap();
        let text = trajectory_csv(&r, "sliding_cube").unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert!(lines.contains(&"# consistency_integrand=com_position"));
        let data: Vec<_> = lines.iter().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(data.len(), 6);
        let ncols = trajectory_columns(1, 4).len();
        assert!(data.iter().all(|l| l.split(',').count() == ncols));
        assert!(data[0].starts_with("t,b0_px"));
    }

    #[test]
    fn missing_contacts_leave_empty_cells() {
        let mut scene = Builtin::sliding_cube().scene(0.01).unwrap();
        scene.initial_states[0].position.z = 0.5 + 0.002;
        let r = run_solver(&scene, SolverKind::NcpPgs, &SolverConfig::default(), 10, true).unwrap();
        let text = trajectory_csv(&r, "drop").unwrap();
        let first = text.lines().find(|l| !l.starts_with('#') && !l.starts_with('t')).unwrap();
        assert!(first.contains(",,"), "{first}");
    }
}
