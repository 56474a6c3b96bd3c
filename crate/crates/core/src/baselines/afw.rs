use crate::away::{away_gamma, weight_refresh, AwayState, DROP_SNAP, GAMMA_CAP};
use crate::error::{Error, Result};
use crate::objective::Objective;
use crate::polycd::{count_nonzeros, StopReason};
use crate::polytope::Polytope;

use super::{initialize, BaselineConfig, BaselineResult, Log, FW_GAP_TOL};

/// Away-step Frank-Wolfe with exact line search. Needs start weights.
pub fn afw_solve(obj: &mut dyn Objective, p: &Polytope, cfg: &BaselineConfig) -> Result<BaselineResult> {
    let mut state: AwayState = initialize(obj, p, cfg)?
        .ok_or_else(|| Error::Unsupported("away-step Frank-Wolfe needs start weights".into()))?;
    let mut log = Log::new(cfg, obj.value(), count_nonzeros(obj.point()));
    let mut stop = StopReason::MaxOuter;
    for k in 1..=cfg.max_iter {
        let g = obj.full_gradient();
        let dots = p.vertex_dots(g.view());
        let gx = g.dot(&obj.point());
        let s = p.linear_minimizer(g.view());
        let fw_gap = gx - dots[s];
        if fw_gap <= FW_GAP_TOL {
            stop = StopReason::Stalled;
            break;
        }
        // away vertex: largest ⟨g, v⟩ over the support, lowest index on ties
        let mut a = None;
        for (j, &l) in state.lambda.iter().enumerate() {
            if l > 0.0 && a.is_none_or(|best: usize| dots[j] > dots[best]) {
                a = Some(j);
            }
        }
        let a = a.ok_or_else(|| Error::Consistency("empty support".into()))?;
        let away_gain = dots[a] - gx;

        let (i, alpha) = if fw_gap >= away_gain || state.lambda[a] >= 1.0 {
            let v = p.vertex_unchecked(s);
            (s, obj.line_search(v.into(), 0.0, 1.0)?)
        } else {
            let v = p.vertex_unchecked(a);
            let gamma = away_gamma(state.lambda[a]).min(GAMMA_CAP);
            let mut alpha = obj.line_search(v.into(), -gamma, 0.0)?;
            if (alpha + gamma).abs() <= DROP_SNAP * gamma.max(1.0) {
                alpha = -gamma;
            }
            (a, alpha)
        };
        if alpha != 0.0 {
            obj.apply_step(p.vertex_unchecked(i).into(), alpha);
            state.step(i, alpha);
        }
        if k % 1000 == 0 {
            state = weight_refresh(&state, obj.point(), p)?;
        }
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
    let state = weight_refresh(&state, obj.point(), p)?;
    Ok(BaselineResult { x: obj.point().to_owned(), trace: log.trace, stop, weights: Some(state) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::LeastSquaresObjective;
    use ndarray::{array, Array1, Array2};

    #[test]
    fn optimal_vertex_start_terminates_immediately() {
        // minimizer of ‖x − e_0‖² over the simplex is e_0
        let mut obj = LeastSquaresObjective::least_squares(Array2::eye(3), array![1.0, 0.0, 0.0]).unwrap();
        let p = Polytope::simplex(3).unwrap();
        let res = afw_solve(&mut obj, &p, &BaselineConfig::default()).unwrap();
        assert_eq!(res.trace.len(), 1);
        assert_eq!(res.stop, StopReason::Stalled);
    }

    #[test]
    fn converges_on_squared_norm() {
        let mut obj = LeastSquaresObjective::least_squares(Array2::eye(3), Array1::zeros(3)).unwrap();
        let p = Polytope::simplex(3).unwrap();
        let res = afw_solve(&mut obj, &p, &BaselineConfig::default()).unwrap();
        assert!((res.final_value() - 1.0 / 3.0).abs() < 1e-10);
        let w = res.weights.unwrap();
        assert!(w.simplex_violation() < 1e-12);
    }
}
