//! Step-size rules along a segment `x + α (v − x)`.

use serde::{Deserialize, Serialize};

/// Absolute bracket width at which the line root search stops.
pub const BISECTION_TOL: f64 = 1e-12;
pub const BISECTION_MAX_HALVINGS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum StepRule {
    /// Exact minimization of f along the admissible interval.
    #[default]
    LineSearch,
    /// Minimizer of the quadratic upper model α b + (L/2) α² c.
    Gradient,
}

/// Curvature used by the gradient rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum CurvatureMode {
    /// Global smoothness constant times ‖v − x‖².
    #[default]
    Global,
    /// Loss curvature times ‖A(v − x)‖² for composite objectives; falls back to
    /// global when the objective has no such form.
    Directional,
}

/// Directional derivative and squared length of a segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentQuery {
    /// ⟨∇f(x), v − x⟩
    pub b: f64,
    /// ‖v − x‖²
    pub c: f64,
}

/// argmin over α ∈ [lo, hi] of α·b + (L/2)·α²·c.
///
/// When `c == 0` the model is linear: `lo` if `b ≥ 0`, else `hi`.
pub fn grad_step_alpha(q: SegmentQuery, lipschitz: f64, lo: f64, hi: f64) -> f64 {
    debug_assert!(lo <= hi);
    let curv = lipschitz * q.c;
    if curv <= 0.0 {
        return if q.b >= 0.0 { lo } else { hi };
    }
    (-q.b / curv).clamp(lo, hi)
}

/// Smallest minimizer over `[lo, hi]` of a convex function given its
/// derivative. The sign-change bracket is shrunk by Illinois false position,
/// falling back to a bisection step whenever a step fails to halve it.
pub fn bisect_derivative(mut deriv: impl FnMut(f64) -> f64, lo: f64, hi: f64) -> f64 {
    if lo >= hi {
        return lo;
    }
    let mut da = deriv(lo);
    if da >= 0.0 {
        return lo;
    }
    let mut db = deriv(hi);
    if db <= 0.0 {
        return hi;
    }
    let (mut a, mut b) = (lo, hi);
    // +1 when b was kept last step, −1 when a was
    let mut kept = 0i8;
    let mut bisect_next = false;
    for _ in 0..BISECTION_MAX_HALVINGS {
        let width = b - a;
        if width <= BISECTION_TOL {
            break;
        }
        let mid = 0.5 * (a + b);
        let mut c = if bisect_next { mid } else { (a * db - b * da) / (db - da) };
        if !(c > a && c < b) {
            c = mid;
        }
        let dc = deriv(c);
        if dc == 0.0 {
            return c;
        }
        if dc < 0.0 {
            a = c;
            da = dc;
            if kept == 1 {
                db *= 0.5;
            }
            kept = 1;
        } else {
            b = c;
            db = dc;
            if kept == -1 {
                da *= 0.5;
            }
            kept = -1;
        }
        bisect_next = b - a > 0.5 * width && !bisect_next;
    }
    0.5 * (a + b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gradient_rule_examples() {
        let q = SegmentQuery { b: -2.0, c: 2.0 };
        assert_eq!(grad_step_alpha(q, 2.0, 0.0, 1.0), 0.5);
        let q = SegmentQuery { b: 3.0, c: 1.0 };
        assert_eq!(grad_step_alpha(q, 1.0, 0.0, 1.0), 0.0);
        let q = SegmentQuery { b: -10.0, c: 1.0 };
        assert_eq!(grad_step_alpha(q, 1.0, 0.0, 1.0), 1.0);
    }

    #[test]
    fn gradient_rule_degenerate_segment() {
        let flat = SegmentQuery { b: 0.0, c: 0.0 };
        assert_eq!(grad_step_alpha(flat, 1.0, -0.5, 1.0), -0.5);
        let down = SegmentQuery { b: -1.0, c: 0.0 };
        assert_eq!(grad_step_alpha(down, 1.0, -0.5, 1.0), 1.0);
    }

    #[test]
    fn bisection_finds_interior_root() {
        let a = bisect_derivative(|t| 2.0 * (t - 0.3), 0.0, 1.0);
        assert!((a - 0.3).abs() < 1e-12);
    }

    #[test]
    fn root_search_on_kinked_derivative() {
        // derivative of a Huber-like function, kink at 0.7
        let d = |t: f64| if t < 0.7 { 5.0 * (t - 0.9) } else { 0.01 * (t - 0.7) - 1.0 + 1e-3 };
        let mut evals = 0;
        let a = bisect_derivative(
            |t| {
                evals += 1;
                d(t)
            },
            0.0,
            200.0,
        );
        assert!((a - (0.7 + 0.999 / 0.01)).abs() < 1e-10);
        assert!(evals < 100);
    }

    #[test]
    fn bisection_boundaries() {
        assert_eq!(bisect_derivative(|t| t + 1.0, 0.0, 1.0), 0.0);
        assert_eq!(bisect_derivative(|t| t - 5.0, 0.0, 1.0), 1.0);
        // flat: smallest minimizer
        assert_eq!(bisect_derivative(|_| 0.0, -2.0, 1.0), -2.0);
    }
}
