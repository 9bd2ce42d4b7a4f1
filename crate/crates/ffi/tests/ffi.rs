use std::ffi::{CStr, CString};
use std::ptr;

use qubobench_ffi::*;

fn last_error() -> String {
    let p = qb_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn build_evaluate_and_solve() {
    unsafe {
        let mut q = ptr::null_mut();
        assert_eq!(qb_qubo_new(3, &mut q), QbStatus::Ok);
        assert_eq!(qb_qubo_dimension(q), 3);
        for i in 0..3 {
            assert_eq!(qb_qubo_add_term(q, i, i, -1.0), QbStatus::Ok);
        }
        assert_eq!(qb_qubo_add_term(q, 0, 1, 2.0), QbStatus::Ok);
        assert_eq!(qb_qubo_add_term(q, 1, 2, 2.0), QbStatus::Ok);

        let mut e = 0.0;
        assert_eq!(qb_qubo_energy(q, [1u8, 1, 1].as_ptr(), 3, &mut e), QbStatus::Ok);
        assert_eq!(e, 1.0);

        let mut bits = [9u8; 3];
        let mut v = 0.0;
        assert_eq!(qb_qubo_brute_force(q, bits.as_mut_ptr(), 3, &mut v), QbStatus::Ok);
        assert_eq!((bits, v), ([1, 0, 1], -2.0));

        let mut pce_bits = [9u8; 3];
        let mut pv = 0.0;
        assert_eq!(
            qb_qubo_solve_pce(q, 7, 3, pce_bits.as_mut_ptr(), 3, &mut pv),
            QbStatus::Ok
        );
        assert!(pce_bits.iter().all(|&b| b <= 1));
        assert_eq!(qb_qubo_energy(q, pce_bits.as_ptr(), 3, &mut e), QbStatus::Ok);
        assert_eq!(e, pv);

        let mut text = ptr::null_mut();
        assert_eq!(qb_qubo_to_text(q, &mut text), QbStatus::Ok);
        let mut back = ptr::null_mut();
        assert_eq!(qb_qubo_from_text(text, &mut back), QbStatus::Ok);
        assert_eq!(qb_qubo_energy(back, [1u8, 0, 1].as_ptr(), 3, &mut e), QbStatus::Ok);
        assert_eq!(e, -2.0);
        qb_string_free(text);
        qb_qubo_free(back);
        qb_qubo_free(q);
    }
}

#[test]
fn errors_map_to_status_codes() {
    unsafe {
        let mut q = ptr::null_mut();
        assert_eq!(qb_qubo_new(2, ptr::null_mut()), QbStatus::NullPointer);
        assert_eq!(qb_qubo_from_text(ptr::null(), &mut q), QbStatus::NullPointer);

        let bad = CString::new("2 0\n0 1 x\n").unwrap();
        assert_eq!(qb_qubo_from_text(bad.as_ptr(), &mut q), QbStatus::ParseError);
        assert!(last_error().contains(":2:5"), "{}", last_error());

        assert_eq!(qb_qubo_new(2, &mut q), QbStatus::Ok);
        assert_eq!(qb_qubo_add_term(q, 0, 5, 1.0), QbStatus::DimensionMismatch);
        let mut e = 0.0;
        assert_eq!(
            qb_qubo_energy(q, [0u8].as_ptr(), 1, &mut e),
            QbStatus::DimensionMismatch
        );
        assert!(last_error().contains("length 1"));
        assert_eq!(qb_qubo_dimension(ptr::null()), 0);
        qb_qubo_free(q);
        qb_qubo_free(ptr::null_mut());
        qb_string_free(ptr::null_mut());
    }
}

#[test]
fn instance_file_to_qubo() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("path4.txt");
    std::fs::write(&path, "p 4\n1 2\n2 3\n3 4\n").unwrap();
    let path = CString::new(path.to_str().unwrap()).unwrap();
    let mis = CString::new("mis").unwrap();
    let nope = CString::new("nope").unwrap();
    unsafe {
        let mut inst = ptr::null_mut();
        assert_eq!(
            qb_instance_load(path.as_ptr(), nope.as_ptr(), &mut inst),
            QbStatus::InvalidArgument
        );
        let missing = CString::new("/nonexistent/x.txt").unwrap();
        assert_eq!(
            qb_instance_load(missing.as_ptr(), mis.as_ptr(), &mut inst),
            QbStatus::Io
        );

        assert_eq!(qb_instance_load(path.as_ptr(), mis.as_ptr(), &mut inst), QbStatus::Ok);
        let mut q = ptr::null_mut();
        assert_eq!(qb_instance_to_qubo(inst, 0.0, 0, &mut q), QbStatus::Ok);
        assert_eq!(qb_qubo_dimension(q), 4);
        let mut bits = [0u8; 4];
        let mut v = 0.0;
        assert_eq!(qb_qubo_brute_force(q, bits.as_mut_ptr(), 4, &mut v), QbStatus::Ok);
        assert_eq!(v, -2.0);
        assert_eq!(bits.iter().map(|&b| b as u32).sum::<u32>(), 2);
        qb_qubo_free(q);
        qb_instance_free(inst);
    }
}

#[test]
fn header_declares_every_export() {
    let header = include_str!("../include/qubobench.h");
    for name in [
        "qb_last_error",
        "qb_qubo_new",
        "qb_qubo_from_text",
        "qb_qubo_add_term",
        "qb_qubo_dimension",
        "qb_qubo_energy",
        "qb_qubo_to_text",
        "qb_qubo_brute_force",
        "qb_qubo_solve_pce",
        "qb_qubo_free",
        "qb_instance_load",
        "qb_instance_to_qubo",
        "qb_instance_free",
        "qb_string_free",
    ] {
        assert!(header.contains(&format!("{name}(")), "{name} missing from header");
    }
    assert!(header.contains("typedef struct QbQubo QbQubo;"));
}
