use ndarray::Array1;

use crate::error::Result;
use crate::objective::Objective;
use crate::polycd::{count_nonzeros, StopReason};
use crate::polytope::Polytope;

use super::{initialize, BaselineConfig, BaselineResult, Log};

/// Accelerated projected gradient with fixed step 1/L.
///
/// FISTA is not monotone; the trace logs the best value found so far and the
/// best iterate is returned.
pub fn fista_solve(obj: &mut dyn Objective, p: &Polytope, cfg: &BaselineConfig) -> Result<BaselineResult> {
    initialize(obj, p, cfg)?;
    let step = 1.0 / obj.smoothness();
    let mut x: Array1<f64> = obj.point().to_owned();
    let mut y = x.clone();
    let mut t = 1.0_f64;
    let mut best_x = x.clone();
    let mut best_f = obj.value();
    let mut log = Log::new(cfg, best_f, count_nonzeros(x.view()));
    let mut stop = StopReason::MaxOuter;
    for k in 1..=cfg.max_iter {
        let g = obj.gradient_at(y.view());
        let x_next = p.project((&y - &(&g * step)).view())?;
        let t_next = (1.0 + (1.0 + 4.0 * t * t).sqrt()) / 2.0;
        y = &x_next + &((&x_next - &x) * ((t - 1.0) / t_next));
        x = x_next;
        t = t_next;
        let f = obj.value_at(x.view());
        if f < best_f {
            best_f = f;
            best_x.assign(&x);
        }
        log.push(k, best_f, count_nonzeros(best_x.view()), k);
        if log.stalled() {
            stop = StopReason::Stalled;
            break;
        }
        if log.out_of_time() {
            stop = StopReason::TimeLimit;
            break;
        }
    }
    obj.set_point(best_x.view())?;
    Ok(BaselineResult { x: best_x, trace: log.trace, stop, weights: None })
}
