//! CSV emitters. Floats are written with 17 significant digits.

use std::io::{self, Write};

use super::compute_gap;
use crate::polycd::TraceRecord;

pub const TRACE_HEADER: &str = "solver,rep,t,seconds,f_value,gap,nnz";

pub fn write_trace_csv(
    w: &mut impl Write,
    solver: &str,
    rep: usize,
    trace: &[TraceRecord],
    f_star: f64,
) -> io::Result<()> {
    writeln!(w, "{TRACE_HEADER}")?;
    for r in trace {
        writeln!(
            w,
            "{solver},{rep},{},{:.16e},{:.16e},{:.16e},{}",
            r.t,
            r.elapsed,
            r.f_value,
            compute_gap(r.f_value, f_star),
            r.nnz
        )?;
    }
    Ok(())
}

/// Gap against outer iteration and wall time for several solvers sharing
/// one optimal value: columns `solver,t,seconds,gap`.
pub fn emit_plot_data(w: &mut impl Write, series: &[(&str, &[TraceRecord])], f_star: f64) -> io::Result<()> {
    writeln!(w, "solver,t,seconds,gap")?;
    for (solver, trace) in series {
        for r in trace.iter() {
            writeln!(w, "{solver},{},{:.16e},{:.16e}", r.t, r.elapsed, compute_gap(r.f_value, f_star))?;
        }
    }
    Ok(())
}
