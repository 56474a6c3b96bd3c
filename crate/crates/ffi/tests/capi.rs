use std::ffi::CStr;
use std::process::Command;
use std::ptr;

use polycd_ffi::*;

fn last_error() -> String {
    let p = polycd_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

// f(x) = ‖x − (3, 0)‖² over the ℓ1 ball of radius 1: x* = (1, 0), f* = 4.
fn shifted_identity(set: PolycdFeasibleSet, radius: f64) -> *mut PolycdProblem {
    let a = [1.0, 0.0, 0.0, 1.0];
    let b = [3.0, 0.0];
    let mut h = ptr::null_mut();
    let st = unsafe { polycd_problem_least_squares(a.as_ptr(), b.as_ptr(), 2, 2, set, radius, &mut h) };
    assert_eq!(st, PolycdStatus::Ok);
    h
}

#[test]
fn solve_every_method_through_the_handle() {
    let h = shifted_identity(PolycdFeasibleSet::L1Ball, 1.0);
    assert_eq!(unsafe { polycd_problem_dim(h) }, 2);
    for method in [
        PolycdMethod::Polycd,
        PolycdMethod::Polycdwa,
        PolycdMethod::Fw,
        PolycdMethod::Afw,
        PolycdMethod::Fista,
        PolycdMethod::Twocd,
    ] {
        let mut x = [f64::NAN; 2];
        let mut f = f64::NAN;
        let mut iters = 0usize;
        let st = unsafe {
            polycd_solve(h, method, PolycdStepRule::LineSearch, 200, 1e-12, x.as_mut_ptr(), &mut f, &mut iters)
        };
        assert_eq!(st, PolycdStatus::Ok, "{method:?}");
        assert!((f - 4.0).abs() < 1e-8, "{method:?}: {f}");
        assert!((x[0] - 1.0).abs() < 1e-4 && x[1].abs() < 1e-4, "{method:?}: {x:?}");
    }
    let mut v = 0.0;
    assert_eq!(unsafe { polycd_value(h, [0.0, 1.0].as_ptr(), &mut v) }, PolycdStatus::Ok);
    assert_eq!(v, 10.0);
    unsafe { polycd_problem_free(h) };
}

#[test]
fn errors_are_codes_with_messages() {
    let mut h = ptr::null_mut();
    let a = [1.0, 2.0];
    let st =
        unsafe { polycd_problem_least_squares(a.as_ptr(), ptr::null(), 1, 2, PolycdFeasibleSet::Simplex, 0.0, &mut h) };
    assert_eq!(st, PolycdStatus::NullPointer);
    assert!(last_error().contains('b'));
    assert!(h.is_null());

    let labels = [0.5];
    let st = unsafe { polycd_problem_logistic(a.as_ptr(), labels.as_ptr(), 1, 2, 1.0, &mut h) };
    assert_eq!(st, PolycdStatus::InvalidArgument);

    let st = unsafe {
        polycd_problem_least_squares(a.as_ptr(), [0.0].as_ptr(), 1, 2, PolycdFeasibleSet::L1Ball, -1.0, &mut h)
    };
    assert_ne!(st, PolycdStatus::Ok);

    let mut x = [0.0; 2];
    let st = unsafe {
        polycd_solve(
            ptr::null(),
            PolycdMethod::Polycd,
            PolycdStepRule::Gradient,
            1,
            0.0,
            x.as_mut_ptr(),
            ptr::null_mut(),
            ptr::null_mut(),
        )
    };
    assert_eq!(st, PolycdStatus::NullPointer);

    assert_eq!(unsafe { polycd_problem_dim(ptr::null()) }, 0);
    unsafe { polycd_problem_free(ptr::null_mut()) };
}

#[test]
fn projection_and_gap() {
    let y = [0.5, 0.5, 0.5];
    let mut out = [0.0; 3];
    let st = unsafe { polycd_project(PolycdFeasibleSet::Simplex, 0.0, y.as_ptr(), 3, out.as_mut_ptr()) };
    assert_eq!(st, PolycdStatus::Ok);
    for v in out {
        assert!((v - 1.0 / 3.0).abs() < 1e-15);
    }
    let y = [3.0, -1.0];
    let st = unsafe { polycd_project(PolycdFeasibleSet::L1Ball, 1.0, y.as_ptr(), 2, out.as_mut_ptr()) };
    assert_eq!(st, PolycdStatus::Ok);
    assert_eq!(&out[..2], &[1.0, 0.0]);
    assert_eq!(polycd_gap(2.0, 0.5), 1.5);
}

#[test]
fn kde_handle_solves_on_the_simplex() {
    let pts = [0.0, 0.0, 0.1, 0.0, 0.0, 0.1, 8.0, 8.0];
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { polycd_problem_kde(pts.as_ptr(), 4, 2, 1.0, 0.4, &mut h) }, PolycdStatus::Ok);
    let mut w = [0.0; 4];
    let st = unsafe {
        polycd_solve(
            h,
            PolycdMethod::Polycdwa,
            PolycdStepRule::LineSearch,
            50,
            1e-12,
            w.as_mut_ptr(),
            ptr::null_mut(),
            ptr::null_mut(),
        )
    };
    assert_eq!(st, PolycdStatus::Ok);
    assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    assert!(w[3] < w[0], "outlier weight {w:?}");
    unsafe { polycd_problem_free(h) };
}

#[test]
fn version_matches_package() {
    let v = unsafe { CStr::from_ptr(polycd_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_declares_every_export_and_parses_as_c() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/include/polycd.h");
    let header = std::fs::read_to_string(path).unwrap();
    for name in [
        "polycd_problem_least_squares",
        "polycd_problem_logistic",
        "polycd_problem_kde",
        "polycd_problem_free",
        "polycd_problem_dim",
        "polycd_solve",
        "polycd_value",
        "polycd_project",
        "polycd_gap",
        "polycd_version",
        "polycd_last_error_message",
        "typedef struct PolycdProblem PolycdProblem",
    ] {
        assert!(header.contains(name), "{name} missing from header");
    }
    // syntax check when a C compiler is around
    if let Ok(out) = Command::new("cc").args(["-fsyntax-only", "-x", "c", path]).output() {
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
}
