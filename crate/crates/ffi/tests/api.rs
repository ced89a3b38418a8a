use std::ffi::{CStr, CString};
use std::ptr;

use ptsym_ffi::*;

fn last_error() -> String {
    let p = ptsym_last_error();
    assert!(!p.is_null(), "expected an error message");
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn interleave(m: &[[f64; 2]]) -> Vec<f64> {
    m.iter().flat_map(|z| [z[0], z[1]]).collect()
}

const SWAP: [[f64; 2]; 4] = [[0.0, 0.0], [1.0, 0.0], [1.0, 0.0], [0.0, 0.0]];

fn two_level(alpha: f64) -> *mut PtsymFrame {
    let mut f = ptr::null_mut();
    assert_eq!(unsafe { ptsym_frame_two_level(alpha, 1e-10, &mut f) }, PtsymStatus::Ok);
    f
}

#[test]
fn frame_from_arrays_matches_the_preset() {
    let a: f64 = 0.4;
    let (tan, sec) = (a.tan(), 1.0 / a.cos());
    let c = interleave(&[[0.0, tan], [sec, 0.0], [sec, 0.0], [0.0, -tan]]);
    let p = interleave(&SWAP);
    let mut f = ptr::null_mut();
    let st = unsafe { ptsym_frame_new(2, c.as_ptr(), p.as_ptr(), ptr::null(), 1e-10, &mut f) };
    assert_eq!(st, PtsymStatus::Ok);
    assert_eq!(unsafe { ptsym_frame_dim(f) }, 2);

    let g = two_level(a);
    let (mut m1, mut m2) = ([0.0; 8], [0.0; 8]);
    unsafe {
        assert_eq!(ptsym_frame_metric(f, m1.as_mut_ptr()), PtsymStatus::Ok);
        assert_eq!(ptsym_frame_metric(g, m2.as_mut_ptr()), PtsymStatus::Ok);
    }
    for (x, y) in m1.iter().zip(&m2) {
        assert!((x - y).abs() < 1e-15);
    }
    // PC = [[sec, −i·tan], [i·tan, sec]]
    assert!((m1[0] - sec).abs() < 1e-15 && (m1[3] + tan).abs() < 1e-15);
    unsafe {
        ptsym_frame_free(f);
        ptsym_frame_free(g);
    }
}

#[test]
fn axiom_failure_is_reported_with_its_name() {
    let id = interleave(&[[1.0, 0.0], [0.0, 0.0], [0.0, 0.0], [1.0, 0.0]]);
    let twice = interleave(&[[2.0, 0.0], [0.0, 0.0], [0.0, 0.0], [2.0, 0.0]]);
    let mut f = ptr::null_mut();
    let st = unsafe { ptsym_frame_new(2, twice.as_ptr(), id.as_ptr(), ptr::null(), 1e-10, &mut f) };
    assert_eq!(st, PtsymStatus::FrameAxiom);
    assert!(f.is_null());
    assert!(last_error().contains("C²−I"), "{}", last_error());

    let st = unsafe { ptsym_frame_new(0, id.as_ptr(), id.as_ptr(), ptr::null(), 1e-10, &mut f) };
    assert_eq!(st, PtsymStatus::InvalidArgument);
    let st = unsafe { ptsym_frame_new(2, ptr::null(), id.as_ptr(), ptr::null(), 1e-10, &mut f) };
    assert_eq!(st, PtsymStatus::NullPointer);
    let st = unsafe { ptsym_frame_two_level(0.3, -1.0, &mut f) };
    assert_eq!(st, PtsymStatus::Config);
}

#[test]
fn inner_product_and_norm_bounds() {
    let f = two_level(0.6);
    let x = [0.3, -0.2, 0.7, 0.1];
    let y = [-0.5, 0.4, 0.2, 0.9];
    let (mut re, mut im, mut re2, mut im2) = (0.0, 0.0, 0.0, 0.0);
    let (mut lo, mut hi) = (0.0, 0.0);
    unsafe {
        assert_eq!(ptsym_frame_inner(f, x.as_ptr(), y.as_ptr(), &mut re, &mut im), PtsymStatus::Ok);
        assert_eq!(ptsym_frame_inner(f, y.as_ptr(), x.as_ptr(), &mut re2, &mut im2), PtsymStatus::Ok);
        assert_eq!(ptsym_frame_norm_bounds(f, &mut lo, &mut hi), PtsymStatus::Ok);
    }
    assert!((re - re2).abs() < 1e-15 && (im + im2).abs() < 1e-15);

    let (mut nx, mut zero) = (0.0, 0.0);
    unsafe { ptsym_frame_inner(f, x.as_ptr(), x.as_ptr(), &mut nx, &mut zero) };
    let e: f64 = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    assert!(lo * e <= nx.sqrt() + 1e-15 && nx.sqrt() <= hi * e + 1e-15);
    assert!(zero.abs() < 1e-15);

    assert_eq!(unsafe { ptsym_frame_inner(f, x.as_ptr(), y.as_ptr(), ptr::null_mut(), &mut im) }, PtsymStatus::NullPointer);
    assert_eq!(unsafe { ptsym_frame_norm_bounds(ptr::null(), &mut lo, &mut hi) }, PtsymStatus::NullPointer);
    unsafe { ptsym_frame_free(f) };
}

#[test]
fn symmetry_of_the_two_level_hamiltonian() {
    let a: f64 = 0.5;
    let f = two_level(a);
    // H = s·[[i·sin α, 1], [1, −i·sin α]] + s·cos α·I with s = 1
    let h = interleave(&[[a.cos(), a.sin()], [1.0, 0.0], [1.0, 0.0], [a.cos(), -a.sin()]]);
    let mut r = PtsymSymmetry::default();
    assert_eq!(unsafe { ptsym_symmetry_check(f, h.as_ptr(), 1e-10, &mut r) }, PtsymStatus::Ok);
    assert!(r.pt_symmetric && r.cpt_hermitian && r.unbroken, "{r:?}");

    // past the exceptional point the spectrum is complex
    let broken = interleave(&[[0.0, 2.0], [1.0, 0.0], [1.0, 0.0], [0.0, -2.0]]);
    assert_eq!(unsafe { ptsym_symmetry_check(f, broken.as_ptr(), 1e-10, &mut r) }, PtsymStatus::Ok);
    assert!(r.pt_symmetric && !r.unbroken);
    assert!(r.max_eigen_imag > 1.0);
    unsafe { ptsym_frame_free(f) };
}

const SCENARIO: &str = r#"
equation = "corrected"
epsilon = 0.5
[grid]
t_start = 0.0
t_end = 10.0
points = 201
[model]
preset = "two_level"
s = { kind = "constant", value = 1.0 }
alpha = { kind = "ramp", from = 0.0, to = 0.05 }
"#;

#[test]
fn scenario_run_through_the_abi() {
    let tmp = tempfile::tempdir().unwrap();
    let toml = CString::new(SCENARIO).unwrap();
    let dir = CString::new(tmp.path().to_str().unwrap()).unwrap();
    let mut run = ptr::null_mut();
    assert_eq!(unsafe { ptsym_run_toml(toml.as_ptr(), dir.as_ptr(), &mut run) }, PtsymStatus::Ok);
    assert!(unsafe { ptsym_run_passed(run) });
    let (mut v, mut loss, mut drift) = (0.0, 0.0, 0.0);
    unsafe {
        assert_eq!(ptsym_run_v_total(run, &mut v), PtsymStatus::Ok);
        assert_eq!(ptsym_run_max_loss(run, &mut loss), PtsymStatus::Ok);
        assert_eq!(ptsym_run_norm_drift(run, &mut drift), PtsymStatus::Ok);
    }
    assert!((v - 0.05).abs() < 1e-3, "V = {v}");
    assert!(loss < v && drift < 1e-6);
    let json = unsafe { CStr::from_ptr(ptsym_run_summary_json(run)) }.to_str().unwrap();
    let parsed: serde_json::Value = serde_json::from_str(json).unwrap();
    assert_eq!(parsed["adiabatic"]["v_total"].as_f64(), Some(v));
    assert!(tmp.path().join("summary.json").is_file());
    unsafe { ptsym_run_free(run) };

    let mut passed = false;
    assert_eq!(unsafe { ptsym_validate_toml(toml.as_ptr(), &mut passed) }, PtsymStatus::Ok);
    assert!(passed);
}

#[test]
fn scenario_without_adiabatic_check_has_no_bound() {
    let tmp = tempfile::tempdir().unwrap();
    let text = format!("{SCENARIO}[checks]\nadiabatic = false\n");
    let toml = CString::new(text).unwrap();
    let dir = CString::new(tmp.path().to_str().unwrap()).unwrap();
    let mut run = ptr::null_mut();
    assert_eq!(unsafe { ptsym_run_toml(toml.as_ptr(), dir.as_ptr(), &mut run) }, PtsymStatus::Ok);
    let mut v = 0.0;
    assert_eq!(unsafe { ptsym_run_v_total(run, &mut v) }, PtsymStatus::NoData);
    unsafe { ptsym_run_free(run) };
}

#[test]
fn scenario_errors_map_to_status_codes() {
    let mut run = ptr::null_mut();
    let bad = CString::new(SCENARIO.replace("epsilon = 0.5", "epsilon = 2.0")).unwrap();
    assert_eq!(unsafe { ptsym_run_toml(bad.as_ptr(), ptr::null(), &mut run) }, PtsymStatus::Config);
    assert!(run.is_null());
    assert!(last_error().contains("epsilon"));

    let missing = CString::new("/nonexistent/scenario.toml").unwrap();
    assert_eq!(unsafe { ptsym_run_file(missing.as_ptr(), ptr::null(), &mut run) }, PtsymStatus::Io);
    assert_eq!(unsafe { ptsym_run_toml(ptr::null(), ptr::null(), &mut run) }, PtsymStatus::NullPointer);

    let broken = CString::new(
        r#"
equation = "corrected"
[grid]
t_start = 0.0
t_end = 1.0
points = 11
[model]
preset = "inline"
h = [[[0.0, 2.0], [1.0, 0.0]], [[1.0, 0.0], [0.0, -2.0]]]
frame = { alpha = 0.0 }
"#,
    )
    .unwrap();
    let tmp = tempfile::tempdir().unwrap();
    let dir = CString::new(tmp.path().to_str().unwrap()).unwrap();
    assert_eq!(unsafe { ptsym_run_toml(broken.as_ptr(), dir.as_ptr(), &mut run) }, PtsymStatus::Numeric);
    assert!(last_error().contains("broken PT-symmetry"), "{}", last_error());
}

#[test]
fn null_handles_are_harmless() {
    unsafe {
        ptsym_frame_free(ptr::null_mut());
        ptsym_run_free(ptr::null_mut());
        assert_eq!(ptsym_frame_dim(ptr::null()), 0);
        assert!(!ptsym_run_passed(ptr::null()));
        assert!(ptsym_run_summary_json(ptr::null()).is_null());
    }
    let v = unsafe { CStr::from_ptr(ptsym_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn success_clears_the_last_error() {
    let mut f = ptr::null_mut();
    assert_ne!(unsafe { ptsym_frame_two_level(0.3, -1.0, &mut f) }, PtsymStatus::Ok);
    assert!(!ptsym_last_error().is_null());
    let f = two_level(0.3);
    assert!(ptsym_last_error().is_null());
    unsafe { ptsym_frame_free(f) };
}
