use std::ffi::{c_char, CString};
use std::ptr;

use echomem_ffi::*;

fn last_error() -> String {
    unsafe {
        let need = echomem_last_error(ptr::null_mut(), 0);
        let mut buf = vec![0u8; need];
        echomem_last_error(buf.as_mut_ptr().cast::<c_char>(), buf.len());
        String::from_utf8(buf[..need - 1].to_vec()).unwrap()
    }
}

fn protocol(json: &str) -> *mut EchomemProtocol {
    let text = CString::new(json).unwrap();
    let mut p = ptr::null_mut();
    let s = unsafe { echomem_protocol_from_json(text.as_ptr(), &mut p) };
    assert_eq!(s, EchomemStatus::Ok, "{}", last_error());
    assert!(!p.is_null());
    p
}

#[test]
fn backward_crib_transfer_matches_closed_form() {
    let p = protocol(r#"{"kind": "crib-bwd", "depth": 2.0, "gamma": 0.9}"#);
    let (mut re, mut im) = (f64::NAN, f64::NAN);
    assert_eq!(unsafe { echomem_protocol_transfer(p, 0.0, &mut re, &mut im) }, EchomemStatus::Ok);
    assert!((re - 0.9 * (1.0 - (-2f64).exp())).abs() < 1e-15);
    assert_eq!(im, 0.0);

    let ws = [-1.0, 0.0, 1.0];
    let mut eta = [0.0; 3];
    assert_eq!(unsafe { echomem_protocol_efficiency(p, ws.as_ptr(), 3, eta.as_mut_ptr()) }, EchomemStatus::Ok);
    assert!((eta[1] - re * re).abs() < 1e-15);
    assert_eq!(eta[0], eta[2]);
    unsafe { echomem_protocol_free(p) };
}

#[test]
fn invalid_json_reports_field() {
    let text = CString::new(r#"{"kind": "crib-bwd", "depth": -1.0}"#).unwrap();
    let mut p = ptr::null_mut();
    let s = unsafe { echomem_protocol_from_json(text.as_ptr(), &mut p) };
    assert_eq!(s, EchomemStatus::InvalidInput);
    assert!(p.is_null());
    assert!(last_error().contains("depth"), "{}", last_error());

    let text = CString::new(r#"{"kind": "nonsense"}"#).unwrap();
    assert_eq!(unsafe { echomem_protocol_from_json(text.as_ptr(), &mut p) }, EchomemStatus::InvalidInput);
}

#[test]
fn null_pointers_are_rejected() {
    let mut re = 0.0;
    unsafe {
        assert_eq!(echomem_protocol_transfer(ptr::null(), 0.0, &mut re, &mut re), EchomemStatus::NullPointer);
        assert_eq!(echomem_protocol_from_json(ptr::null(), ptr::null_mut()), EchomemStatus::NullPointer);
        assert_eq!(echomem_afc_dephasing(10.0, ptr::null_mut()), EchomemStatus::NullPointer);
        assert_eq!(echomem_pulse_len(ptr::null()), 0);
        echomem_pulse_free(ptr::null_mut());
        echomem_protocol_free(ptr::null_mut());
    }
}

#[test]
fn error_message_is_truncated_safely() {
    let mut out = 0.0;
    assert_eq!(unsafe { echomem_afc_dephasing(-1.0, &mut out) }, EchomemStatus::InvalidInput);
    let full = last_error();
    let mut small = [0x7fu8; 5];
    let need = unsafe { echomem_last_error(small.as_mut_ptr().cast(), small.len()) };
    assert_eq!(need, full.len() + 1);
    assert_eq!(&small[..4], &full.as_bytes()[..4]);
    assert_eq!(small[4], 0);
    // Success clears the message.
    assert_eq!(unsafe { echomem_afc_dephasing(10.0, &mut out) }, EchomemStatus::Ok);
    assert_eq!(last_error(), "");
    assert!((out - (-7.0f64 / 200.0).exp()).abs() < 1e-15);
}

#[test]
fn echo_round_trip_through_handles() {
    let p = protocol(r#"{"kind": "crib-bwd", "depth": 6.0}"#);
    let mut input = ptr::null_mut();
    assert_eq!(unsafe { echomem_pulse_gaussian(0.1, 1.0, 2048, 0.5, &mut input) }, EchomemStatus::Ok);
    assert_eq!(unsafe { echomem_pulse_len(input) }, 2048);

    let mut echo = ptr::null_mut();
    let mut fraction = f64::NAN;
    assert_eq!(unsafe { echomem_protocol_echo(p, input, &mut echo, &mut fraction) }, EchomemStatus::Ok, "{}", last_error());
    assert!(fraction < 1e-3);
    let mut eta = 0.0;
    assert_eq!(unsafe { echomem_energy_efficiency(input, echo, &mut eta) }, EchomemStatus::Ok);
    let h0 = 1.0 - (-6f64).exp();
    assert!(eta > 0.95 * h0 * h0 && eta <= h0 * h0 + 1e-12, "{eta}");

    let mut re = vec![0.0; 2048];
    let mut im = vec![0.0; 2048];
    assert_eq!(unsafe { echomem_pulse_samples(echo, re.as_mut_ptr(), im.as_mut_ptr(), 2047) }, EchomemStatus::BufferTooSmall);
    assert_eq!(unsafe { echomem_pulse_samples(echo, re.as_mut_ptr(), im.as_mut_ptr(), 2048) }, EchomemStatus::Ok);
    let peak = re.iter().zip(&im).map(|(a, b)| a.hypot(*b)).fold(0.0, f64::max);
    assert!(peak > 0.5);

    // Rebuilding the echo from its samples preserves its energy.
    let mut copy = ptr::null_mut();
    assert_eq!(unsafe { echomem_pulse_from_samples(re.as_ptr(), im.as_ptr(), 2048, 0.5, &mut copy) }, EchomemStatus::Ok);
    let (mut e1, mut d1, mut e2, mut d2) = (0.0, 0.0, 0.0, 0.0);
    unsafe {
        echomem_pulse_stats(echo, &mut e1, &mut d1);
        echomem_pulse_stats(copy, &mut e2, &mut d2);
    }
    assert_eq!((e1, d1), (e2, d2));
    unsafe {
        echomem_pulse_free(copy);
        echomem_pulse_free(echo);
        echomem_pulse_free(input);
        echomem_protocol_free(p);
    }
}

#[test]
fn rose_has_no_linear_echo() {
    let p = protocol(r#"{"kind": "rose"}"#);
    let mut input = ptr::null_mut();
    let mut echo = ptr::null_mut();
    let mut fraction = 0.0;
    unsafe {
        assert_eq!(echomem_pulse_gaussian(0.5, 1.0, 256, 0.1, &mut input), EchomemStatus::Ok);
        assert_eq!(echomem_protocol_echo(p, input, &mut echo, &mut fraction), EchomemStatus::InvalidInput);
        assert!(echo.is_null());
        echomem_pulse_free(input);
        echomem_protocol_free(p);
    }
}

#[test]
fn scalar_entry_points() {
    let (mut depth, mut eta) = (0.0, 0.0);
    assert_eq!(unsafe { echomem_crib_forward_optimum(0.0, &mut depth, &mut eta) }, EchomemStatus::Ok);
    assert!((depth - 2.0).abs() < 1e-6);
    assert!((eta - 4.0 * (-2f64).exp()).abs() < 1e-12);

    let mut theta = 0.0;
    assert_eq!(unsafe { echomem_absorber_area(0.0, 1.0, 1.0, &mut theta) }, EchomemStatus::Ok);
    assert!((theta - 1.0).abs() < 1e-15);

    let mut cfg = EchomemAreaConfig {
        theta_s0: 0.5,
        theta_c1: 0.8 * std::f64::consts::PI,
        theta_c2: 0.8 * std::f64::consts::PI,
        gamma_e: 1.0,
        alpha0: 1.0,
        length: 1.0,
        backward: 0,
    };
    let mut crib = f64::NAN;
    assert_eq!(unsafe { echomem_crib_echo_area(&cfg, 1.0, &mut crib) }, EchomemStatus::Ok, "{}", last_error());
    assert!(crib.is_finite() && crib > 0.0);
    let mut rose = f64::NAN;
    assert_eq!(unsafe { echomem_rose_echo_area(&cfg, 1.0, &mut rose) }, EchomemStatus::Ok, "{}", last_error());
    assert!(rose.is_finite());
    let at_pi = EchomemAreaConfig { theta_c1: std::f64::consts::PI, ..cfg };
    assert_eq!(unsafe { echomem_rose_echo_area(&at_pi, 1.0, &mut rose) }, EchomemStatus::Bifurcation);

    cfg.theta_s0 = std::f64::consts::PI;
    assert_eq!(unsafe { echomem_crib_echo_area(&cfg, 1.0, &mut crib) }, EchomemStatus::InvalidInput);
}

#[test]
fn version_is_nul_terminated() {
    let v = unsafe { std::ffi::CStr::from_ptr(echomem_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}
