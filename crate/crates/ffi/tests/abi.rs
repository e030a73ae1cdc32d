use std::ffi::{CStr, CString};
use std::ptr;

use openqs_ffi::*;

fn c(re: f64, im: f64) -> OqsComplex {
    OqsComplex { re, im }
}

fn last_error() -> String {
    let p = oqs_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

unsafe fn take_string(p: *mut std::ffi::c_char) -> String {
    let s = CStr::from_ptr(p).to_string_lossy().into_owned();
    oqs_string_free(p);
    s
}

#[test]
fn two_level_closed_form_and_spectrum() {
    unsafe {
        let mut m = ptr::null_mut();
        let st = oqs_model_two_level(c(0.5, -0.25), c(0.7, -0.25), c(0.05, 0.0), &mut m);
        assert_eq!(st, OqsStatus::Ok);
        assert!(oqs_last_error_message().is_null());
        assert_eq!(oqs_model_dim(m), 2);

        let mut cf = [OqsComplex::default(); 2];
        assert_eq!(oqs_two_level_eigenvalues(m, cf.as_mut_ptr()), OqsStatus::Ok);
        let z = (0.01f64 + 0.0025).sqrt();
        assert!((cf[0].re - (0.6 + z)).abs() < 1e-14);
        assert!((cf[1].im + 0.25).abs() < 1e-14);

        let mut s = ptr::null_mut();
        assert_eq!(oqs_spectrum_new(m, &mut s), OqsStatus::Ok);
        assert_eq!(oqs_spectrum_dim(s), 2);
        let mut found = 0;
        for i in 0..2 {
            let mut l = OqsComplex::default();
            assert_eq!(oqs_spectrum_eigenvalue(s, i, &mut l), OqsStatus::Ok);
            if cf.iter().any(|k| (k.re - l.re).hypot(k.im - l.im) < 1e-12) {
                found += 1;
            }
            let mut phi = [OqsComplex::default(); 2];
            assert_eq!(
                oqs_spectrum_eigenvector(s, i, phi.as_mut_ptr(), 2),
                OqsStatus::Ok
            );
            // phi^T phi = 1
            let re: f64 = phi.iter().map(|p| p.re * p.re - p.im * p.im).sum();
            let im: f64 = phi.iter().map(|p| 2.0 * p.re * p.im).sum();
            assert!((re - 1.0).abs() < 1e-12 && im.abs() < 1e-12);
            let mut r = 0.0;
            assert_eq!(oqs_spectrum_rigidity(s, i, &mut r), OqsStatus::Ok);
            assert!(r > 0.0 && r <= 1.0);
            let mut b = OqsComplex::default();
            assert_eq!(oqs_spectrum_mixing(s, i, 1, &mut b), OqsStatus::Ok);
        }
        assert_eq!(found, 2);

        let mut l = OqsComplex::default();
        assert_eq!(oqs_spectrum_eigenvalue(s, 5, &mut l), OqsStatus::OutOfRange);
        assert!(last_error().contains("out of range"));
        let mut small = [OqsComplex::default(); 1];
        assert_eq!(
            oqs_spectrum_eigenvector(s, 0, small.as_mut_ptr(), 1),
            OqsStatus::Invalid
        );

        oqs_spectrum_free(s);
        oqs_model_free(m);
    }
}

#[test]
fn doorway_cardano_matches_numeric() {
    unsafe {
        let eps = [c(0.5, -0.5), c(0.6, -0.4), c(0.7, -0.3)];
        let mut m = ptr::null_mut();
        assert_eq!(
            oqs_model_doorway(eps.as_ptr(), c(0.05, 0.0), c(0.03, 0.0), &mut m),
            OqsStatus::Ok
        );
        let mut cf = [OqsComplex::default(); 3];
        assert_eq!(oqs_cardano_eigenvalues(m, cf.as_mut_ptr()), OqsStatus::Ok);
        let mut s = ptr::null_mut();
        assert_eq!(oqs_spectrum_new(m, &mut s), OqsStatus::Ok);
        for i in 0..3 {
            let mut l = OqsComplex::default();
            oqs_spectrum_eigenvalue(s, i, &mut l);
            let best = cf
                .iter()
                .map(|k| (k.re - l.re).hypot(k.im - l.im))
                .fold(f64::INFINITY, f64::min);
            assert!(best < 1e-10);
        }
        oqs_spectrum_free(s);
        oqs_model_free(m);
    }
}

#[test]
fn error_codes() {
    unsafe {
        let mut m = ptr::null_mut();
        let asym = [c(1.0, 0.0), c(0.1, 0.0), c(0.2, 0.0), c(1.0, 0.0)];
        assert_eq!(oqs_model_new(2, asym.as_ptr(), &mut m), OqsStatus::Invalid);
        assert!(m.is_null());
        assert!(!last_error().is_empty());

        assert_eq!(
            oqs_model_new(2, ptr::null(), &mut m),
            OqsStatus::NullPointer
        );
        assert_eq!(
            oqs_model_two_level(c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), ptr::null_mut()),
            OqsStatus::NullPointer
        );

        let nan = [c(f64::NAN, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)];
        assert_eq!(oqs_model_new(2, nan.as_ptr(), &mut m), OqsStatus::Invalid);

        // Cardano on a 2x2 is a dimension error
        assert_eq!(oqs_model_pt(0.0, 0.1, 0.05, false, &mut m), OqsStatus::Ok);
        let mut out = [OqsComplex::default(); 3];
        assert_eq!(
            oqs_cardano_eigenvalues(m, out.as_mut_ptr()),
            OqsStatus::Invalid
        );
        let mut v = OqsComplex::default();
        assert_eq!(oqs_model_get(m, 0, 1, &mut v), OqsStatus::Ok);
        assert_eq!(v, c(0.05, 0.0));
        assert_eq!(oqs_model_get(m, 2, 0, &mut v), OqsStatus::OutOfRange);
        oqs_model_free(m);

        assert_eq!(oqs_model_dim(ptr::null()), 0);
        oqs_model_free(ptr::null_mut());
        oqs_string_free(ptr::null_mut());
    }
}

#[test]
fn scenario_sweep_and_ep_search() {
    unsafe {
        let id = CString::new("part1-fig1ab").unwrap();
        let mut sc = ptr::null_mut();
        assert_eq!(oqs_scenario_preset(id.as_ptr(), &mut sc), OqsStatus::Ok);
        assert_eq!(oqs_scenario_set_points(sc, 1), OqsStatus::Invalid);
        assert_eq!(oqs_scenario_set_points(sc, 21), OqsStatus::Ok);

        let mut csv = ptr::null_mut();
        assert_eq!(oqs_sweep_csv(sc, &mut csv), OqsStatus::Ok);
        let csv = take_string(csv);
        assert_eq!(csv.lines().count(), 22);
        assert!(csv.starts_with("a,E_1,G_half_1"));

        let mut json = ptr::null_mut();
        assert_eq!(
            oqs_ep_search_json(sc, OqsSearchMode::Scan1d, 0.0, &mut json),
            OqsStatus::Ok
        );
        let report: serde_json::Value = serde_json::from_str(&take_string(json)).unwrap();
        let a = report["entries"][0]["location"]["params"][0]
            .as_f64()
            .unwrap();
        assert!((a - 2.0 / 3.0).abs() < 1e-6);

        let mut json = ptr::null_mut();
        assert_eq!(
            oqs_ep_search_json(sc, OqsSearchMode::Refine2d, 0.0, &mut json),
            OqsStatus::Invalid
        );

        let mut m = ptr::null_mut();
        assert_eq!(oqs_scenario_model_at(sc, 2.0 / 3.0, &mut m), OqsStatus::Ok);
        oqs_model_free(m);

        let mut text = ptr::null_mut();
        assert_eq!(oqs_scenario_to_json(sc, &mut text), OqsStatus::Ok);
        let text = CString::new(take_string(text)).unwrap();
        let mut again = ptr::null_mut();
        assert_eq!(
            oqs_scenario_from_json(text.as_ptr(), &mut again),
            OqsStatus::Ok
        );
        oqs_scenario_free(again);
        oqs_scenario_free(sc);

        let bad = CString::new("no-such-preset").unwrap();
        assert_eq!(
            oqs_scenario_preset(bad.as_ptr(), &mut sc),
            OqsStatus::Invalid
        );
        let junk = CString::new("{\"model_kind\": 3}").unwrap();
        assert_eq!(
            oqs_scenario_from_json(junk.as_ptr(), &mut sc),
            OqsStatus::Invalid
        );

        let mut cat = ptr::null_mut();
        assert_eq!(oqs_list_scenarios_json(&mut cat), OqsStatus::Ok);
        let cat: serde_json::Value = serde_json::from_str(&take_string(cat)).unwrap();
        assert!(cat.as_array().unwrap().len() > 20);
    }
}

#[test]
fn smatrix_line_shape() {
    unsafe {
        let model = CString::new(r#"{"form":"single","r1":{"energy":0.5,"width":0.2}}"#).unwrap();
        let e = [0.5, 10.0];
        let mut s = [OqsComplex::default(); 2];
        let mut sigma = [0.0; 2];
        let st = oqs_smatrix_line_shape(
            model.as_ptr(),
            e.as_ptr(),
            2,
            s.as_mut_ptr(),
            sigma.as_mut_ptr(),
        );
        assert_eq!(st, OqsStatus::Ok);
        assert!((sigma[0] - 4.0).abs() < 1e-14);
        assert!(sigma[1] < 1e-3);

        let bad = CString::new(r#"{"form":"double_pole","ed":0.0,"gamma_d":-0.1}"#).unwrap();
        let st = oqs_smatrix_line_shape(
            bad.as_ptr(),
            e.as_ptr(),
            2,
            s.as_mut_ptr(),
            sigma.as_mut_ptr(),
        );
        assert_eq!(st, OqsStatus::Invalid);
        assert!(last_error().contains("width"));
    }
}
