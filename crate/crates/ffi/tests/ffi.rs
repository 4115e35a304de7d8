use std::ffi::{c_char, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use approx::assert_relative_eq;
use wavedecay_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0 as c_char; 512];
    let n = unsafe { wd_last_error_message(buf.as_mut_ptr(), buf.len()) };
    let bytes: Vec<u8> = buf[..n.min(511)].iter().map(|&c| c as u8).collect();
    String::from_utf8(bytes).unwrap()
}

fn linear_params() -> WdFeedbackParams {
    WdFeedbackParams {
        origin: WdOriginKind::Linear,
        origin_exponent: f64::NAN,
        m0: 1.0,
        big_m0: 1.0,
        infinity: WdInfinityKind::Linear,
        r: f64::NAN,
        m: 1.0,
        big_m: 1.0,
    }
}

#[test]
fn feedback_round_trip() {
    unsafe {
        let mut params = linear_params();
        params.origin = WdOriginKind::Power;
        params.origin_exponent = 3.0;
        let mut fb = ptr::null_mut();
        assert_eq!(wd_feedback_new(&params, &mut fb), WdStatus::Ok);
        let mut g = 0.0;
        assert_eq!(wd_feedback_eval(fb, -0.5, &mut g), WdStatus::Ok);
        assert_relative_eq!(g, -0.125, max_relative = 1e-14);
        assert_eq!(wd_feedback_eval(fb, 2.0, &mut g), WdStatus::Ok);
        assert_relative_eq!(g, 2.0, max_relative = 1e-14);

        let mut h0 = ptr::null_mut();
        assert_eq!(wd_h0_build(fb, &mut h0), WdStatus::Ok);
        let mut y = 0.0;
        assert_eq!(wd_monotone_eval(h0, 0.0, &mut y), WdStatus::Ok);
        assert_eq!(y, 0.0);
        wd_monotone_free(h0);
        wd_feedback_free(fb);
    }
}

#[test]
fn invalid_feedback_reports_message() {
    unsafe {
        let mut params = linear_params();
        params.m0 = 2.0;
        params.big_m0 = 1.0;
        let mut fb = ptr::null_mut();
        assert_eq!(wd_feedback_new(&params, &mut fb), WdStatus::InvalidArgument);
        assert!(fb.is_null());
        assert!(!last_error().is_empty());
        assert_eq!(wd_feedback_new(ptr::null(), &mut fb), WdStatus::NullPointer);
        assert!(last_error().contains("params"));
    }
}

#[test]
fn envelope_for_linear_h_is_exponential() {
    // h(x) = x, K = 2 gives q(x) = x/5 and S(t) = e^{-t/5}.
    unsafe {
        let mut h = ptr::null_mut();
        assert_eq!(wd_monotone_linear(1.0, &mut h), WdStatus::Ok);
        let mut q = ptr::null_mut();
        assert_eq!(wd_q_build(h, 2.0, &mut q), WdStatus::Ok);
        let mut qx = 0.0;
        assert_eq!(wd_monotone_eval(q, 1.0, &mut qx), WdStatus::Ok);
        assert_relative_eq!(qx, 0.2, max_relative = 1e-14);

        let mut curve = ptr::null_mut();
        assert_eq!(wd_envelope_solve(q, 1.0, 5.0, 1e-2, &mut curve), WdStatus::Ok);
        let mut n = 0;
        assert_eq!(wd_curve_len(curve, &mut n), WdStatus::Ok);
        assert!(n > 400);
        let mut t = vec![0.0; n];
        let mut s = vec![0.0; n];
        assert_eq!(wd_curve_copy(curve, t.as_mut_ptr(), s.as_mut_ptr(), n - 1), WdStatus::BufferTooSmall);
        assert_eq!(wd_curve_copy(curve, t.as_mut_ptr(), s.as_mut_ptr(), n), WdStatus::Ok);
        for (ti, si) in t.iter().zip(&s) {
            assert_relative_eq!(*si, (-ti / 5.0).exp(), max_relative = 1e-9);
        }
        wd_curve_free(curve);
        wd_monotone_free(q);
        wd_monotone_free(h);
    }
}

#[test]
fn q_inverts_the_defining_map() {
    unsafe {
        let mut h0 = ptr::null_mut();
        let mut h1 = ptr::null_mut();
        let mut h = ptr::null_mut();
        let mut q = ptr::null_mut();
        assert_eq!(wd_monotone_power(1.0, 0.5, &mut h0), WdStatus::Ok);
        assert_eq!(wd_h1_build(1.0, 8.0, &mut h1), WdStatus::Ok);
        assert_eq!(wd_h_build(h0, h1, 2.0, &mut h), WdStatus::Ok);
        assert_eq!(wd_q_build(h, 3.0, &mut q), WdStatus::Ok);
        for w in [1e-3f64, 0.1, 1.0, 4.0] {
            // h(w) = w + sqrt(w/2)
            let x = 4.0 * w + 3.0 * (w + (w / 2.0).sqrt());
            let mut got = 0.0;
            assert_eq!(wd_monotone_eval(q, x, &mut got), WdStatus::Ok);
            assert_relative_eq!(got, w, max_relative = 1e-9);
            assert_eq!(wd_monotone_inverse(q, w, &mut got), WdStatus::Ok);
            assert_relative_eq!(got, x, max_relative = 1e-9);
        }
        let mut y = 0.0;
        assert_eq!(wd_monotone_eval(q, -1.0, &mut y), WdStatus::InvalidArgument);
        for f in [q, h, h1, h0] {
            wd_monotone_free(f);
        }
    }
}

#[test]
fn closed_form_exponential() {
    let params = WdClosedFormParams {
        e0: 2.0,
        t0: 1.0,
        ctilde: 0.3,
        p: f64::NAN,
        theta: f64::NAN,
        r: f64::NAN,
        p0: f64::NAN,
        alpha: f64::NAN,
    };
    let mut v = 0.0;
    unsafe {
        assert_eq!(wd_closed_form(WdExample::ExpOrigin, &params, 3.0, &mut v), WdStatus::Ok);
        assert_relative_eq!(v, 2.0 * (-0.6f64).exp(), max_relative = 1e-14);
        assert_eq!(wd_closed_form(WdExample::PolyOrigin, &params, 3.0, &mut v), WdStatus::Numeric);
        assert!(last_error().contains('p'));
    }
}

const SIM: &str = r#"
[feedback]
origin = { kind = "linear", m0 = 1.0, M0 = 1.0 }
infinity = { kind = "linear", m = 1.0, M = 1.0 }

[simulate]
extent = [1.0]
points = [101]
dt = 2e-3
t_max = 1.0
sample_every = 50

[damping]
width = 0.1
a0 = 1.0
a_max = 1.0

[initial]
kind = "mode"
amplitude = 1.0
kx = 1
ky = 1
"#;

#[test]
fn simulate_from_toml() {
    let text = CString::new(SIM).unwrap();
    unsafe {
        let mut trace = ptr::null_mut();
        assert_eq!(wd_simulate_toml(text.as_ptr(), &mut trace), WdStatus::Ok, "{}", last_error());
        let mut n = 0;
        assert_eq!(wd_trace_len(trace, &mut n), WdStatus::Ok);
        assert_eq!(n, 11);
        let mut t = vec![0.0; n];
        let mut e = vec![0.0; n];
        let mut d = vec![0.0; n];
        assert_eq!(
            wd_trace_copy(trace, t.as_mut_ptr(), e.as_mut_ptr(), d.as_mut_ptr(), ptr::null_mut(), n),
            WdStatus::Ok
        );
        assert_relative_eq!(t[n - 1], 1.0, max_relative = 1e-12);
        // E(0) = ½·∫|u_x|² = π²/4 for u = sin(πx).
        assert_relative_eq!(e[0], std::f64::consts::PI.powi(2) / 4.0, max_relative = 1e-3);
        for i in 1..n {
            assert!(e[i] <= e[i - 1] * (1.0 + 1e-9));
            assert_relative_eq!(e[i] + d[i], e[0], max_relative = 1e-4);
        }
        wd_trace_free(trace);
    }
}

#[test]
fn simulate_config_errors() {
    unsafe {
        let mut trace = ptr::null_mut();
        let bad =
            CString::new("[simulate]\nextent = [1.0]\npoints = [11]\ndt = 0.1\nt_max = 1.0\nbogus = 1\n").unwrap();
        assert_eq!(wd_simulate_toml(bad.as_ptr(), &mut trace), WdStatus::Config);
        assert!(last_error().contains("line"), "{}", last_error());
        let cfl = CString::new(SIM.replace("dt = 2e-3", "dt = 0.05")).unwrap();
        assert_eq!(wd_simulate_toml(cfl.as_ptr(), &mut trace), WdStatus::Numeric);
        assert!(trace.is_null());
        assert_eq!(wd_simulate_toml(ptr::null(), &mut trace), WdStatus::NullPointer);
    }
}

#[test]
fn gcc_time_on_an_interval() {
    // Unit speed: the slowest ray starts just outside one collar edge and heads
    // to the other, so T₀ ≈ 1 − 2·width.
    let extent = [1.0];
    let mut t0 = 0.0;
    unsafe {
        assert_eq!(wd_gcc_time(1, extent.as_ptr(), 1.0, 0.1, 99, 2, 1e-3, 5.0, &mut t0), WdStatus::Ok);
        assert!((t0 - 0.8).abs() <= 2e-2, "{t0}");
        assert_eq!(wd_gcc_time(3, extent.as_ptr(), 1.0, 0.1, 9, 2, 1e-3, 5.0, &mut t0), WdStatus::InvalidArgument);
        assert_eq!(wd_gcc_time(1, extent.as_ptr(), -1.0, 0.1, 9, 2, 1e-3, 5.0, &mut t0), WdStatus::InvalidArgument);
    }
}

#[test]
fn header_compiles_as_c() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/wavedecay.h");
    assert!(header.exists());
    let text = std::fs::read_to_string(&header).unwrap();
    for sym in ["wd_feedback_new", "wd_envelope_solve", "wd_simulate_toml", "wd_gcc_time", "WD_STATUS_OK"] {
        assert!(text.contains(sym), "{sym}");
    }
    let Ok(status) = Command::new("cc").args(["-fsyntax-only", "-x", "c"]).arg(&header).status() else {
        return;
    };
    assert!(status.success());
}
