use crate::error::Result;
use crate::objective::Objective;
use crate::polycd::StopReason;
use crate::polytope::Polytope;

use super::{initialize, BaselineConfig, BaselineResult, Log, FW_GAP_TOL};

/// Frank-Wolfe with exact line search.
pub fn fw_solve(obj: &mut dyn Objective, p: &Polytope, cfg: &BaselineConfig) -> Result<BaselineResult> {
    initialize(obj, p, cfg)?;
    let mut log = Log::new(cfg, obj.value(), crate::polycd::count_nonzeros(obj.point()));
    let mut stop = StopReason::MaxOuter;
    for k in 1..=cfg.max_iter {
        let g = obj.full_gradient();
        let s = p.linear_minimizer(g.view());
        let v = p.vertex_unchecked(s);
        let gap = g.dot(&obj.point()) - v.dot(g.view());
        if gap <= FW_GAP_TOL {
            stop = StopReason::Stalled;
            break;
        }
        let alpha = obj.line_search(v.into(), 0.0, 1.0)?;
        obj.apply_step(v.into(), alpha);
        log.record(k, obj);
        if log.stalled() {
            stop = StopReason::Stalled;
            break;
        }
        if log.out_of_time() {
            stop = StopReason::TimeLimit;
            break;
        }
    }
    Ok(BaselineResult { x: obj.point().to_owned(), trace: log.trace, stop, weights: None })
}
