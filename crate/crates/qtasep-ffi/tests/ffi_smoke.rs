//! Exercise the C ABI end to end (through the extern "C" functions, with
//! the same pointer discipline a C caller would use).

use qtasep_ffi::*;

#[test]
fn classify_and_constants_through_ffi() {
    let idx = [1usize];
    let rates = [0.4f64];
    let mut phase = QtPhase::Gue;
    let mut k = 0usize;
    let status = unsafe {
        qt_classify_phase(
            0.6,
            1.0,
            idx.as_ptr(),
            rates.as_ptr(),
            1,
            &mut phase,
            &mut k,
        )
    };
    assert_eq!(status, QtStatus::Ok);
    assert_eq!(phase, QtPhase::Gaussian);
    assert_eq!(k, 1);

    // Homogeneous profile: GUE.
    let status = unsafe {
        qt_classify_phase(
            0.6,
            1.0,
            std::ptr::null(),
            std::ptr::null(),
            0,
            &mut phase,
            &mut k,
        )
    };
    assert_eq!(status, QtStatus::Ok);
    assert_eq!(phase, QtPhase::Gue);
    assert_eq!(k, 0);

    let mut hc = QtHydroConstants {
        kappa: 0.0,
        f: 0.0,
        chi: 0.0,
        g: 0.0,
        sigma: 0.0,
        has_shock_constants: 0,
    };
    let status = unsafe { qt_hydro_constants(0.6, 1.0, 0.4, &mut hc) };
    assert_eq!(status, QtStatus::Ok);
    assert!(hc.kappa > 0.0 && hc.chi > 0.0);
    assert_eq!(hc.has_shock_constants, 1);
    assert!(hc.f > hc.g);
    assert!(hc.sigma > 0.0);
}

#[test]
fn invalid_arguments_set_error_message() {
    let mut phase = QtPhase::Gue;
    let mut k = 0usize;
    let status = unsafe {
        qt_classify_phase(
            1.5,
            1.0,
            std::ptr::null(),
            std::ptr::null(),
            0,
            &mut phase,
            &mut k,
        )
    };
    assert_eq!(status, QtStatus::InvalidArgument);
    let msg = unsafe { std::ffi::CStr::from_ptr(qt_last_error_message()) };
    assert!(msg.to_str().unwrap().contains("q must"));

    // Null out-pointer is a usage error.
    let status = unsafe {
        qt_classify_phase(
            0.6,
            1.0,
            std::ptr::null(),
            std::ptr::null(),
            0,
            std::ptr::null_mut(),
            &mut k,
        )
    };
    assert_eq!(status, QtStatus::UsageError);
}

#[test]
fn cdf_handle_lifecycle_and_normal_reduction() {
    let mut handle: *mut QtCdf = std::ptr::null_mut();
    let status = unsafe { qt_cdf_new_gk(1, &mut handle) };
    assert_eq!(status, QtStatus::Ok);
    assert!(!handle.is_null());

    // G_1 is the standard normal CDF.
    let mut v = 0.0f64;
    assert_eq!(unsafe { qt_cdf_eval(handle, 0.0, &mut v) }, QtStatus::Ok);
    assert!((v - 0.5).abs() < 1e-8, "{v}");
    assert_eq!(
        unsafe { qt_cdf_eval(handle, 1.6448536269514722, &mut v) },
        QtStatus::Ok
    );
    assert!((v - 0.95).abs() < 1e-6, "{v}");

    // KS of a tiny sample against it.
    let samples = [0.0f64];
    let mut ks = 0.0f64;
    assert_eq!(
        unsafe { qt_ks_statistic(samples.as_ptr(), 1, handle, &mut ks) },
        QtStatus::Ok
    );
    assert!((ks - 0.5).abs() < 1e-9);

    unsafe { qt_cdf_free(handle) };
    unsafe { qt_cdf_free(std::ptr::null_mut()) }; // no-op

    // Invalid k.
    let mut handle2: *mut QtCdf = std::ptr::null_mut();
    assert_eq!(
        unsafe { qt_cdf_new_gk(0, &mut handle2) },
        QtStatus::InvalidArgument
    );
    assert!(handle2.is_null());
}

#[test]
fn monte_carlo_through_ffi_is_deterministic() {
    let mut a = vec![0.0f64; 8];
    let mut b = vec![0.0f64; 8];
    for out in [&mut a, &mut b] {
        let status = unsafe {
            qt_monte_carlo_xi(
                0.6,
                1.0,
                0.0,
                16,
                8,
                std::ptr::null(),
                std::ptr::null(),
                0,
                42,
                1,
                out.as_mut_ptr(),
            )
        };
        assert_eq!(status, QtStatus::Ok);
    }
    assert_eq!(a, b);
    assert!(a.iter().all(|x| x.is_finite()));

    // BBP shift of the critical preset at c = 0 vanishes.
    let mut shift = 1.0f64;
    assert_eq!(
        unsafe { qt_bbp_shift(0.6, 1.0, 0.0, &mut shift) },
        QtStatus::Ok
    );
    assert_eq!(shift, 0.0);
}

#[test]
fn generated_header_exists_and_exports_surface() {
    let header = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("include/qtasep.h");
    let text = std::fs::read_to_string(header).expect("cbindgen header generated at build time");
    for symbol in [
        "qt_classify_phase",
        "qt_hydro_constants",
        "qt_cdf_new_gue",
        "qt_cdf_new_bbp",
        "qt_cdf_new_gk",
        "qt_cdf_eval",
        "qt_cdf_free",
        "qt_ks_statistic",
        "qt_monte_carlo_xi",
        "qt_last_error_message",
        "QtStatus",
        "QtPhase",
        "QtCdf",
    ] {
        assert!(text.contains(symbol), "header missing {symbol}");
    }
}
