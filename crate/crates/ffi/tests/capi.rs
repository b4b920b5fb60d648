use std::ffi::{CStr, CString};
use std::os::raw::c_char;
use std::path::Path;
use std::process::Command;
use std::ptr;

use predim_core::corpus::random_full;
use predim_core::structures::serialize;
use predim_ffi::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const FIVE: &str = r#"{"points":["a","b","c","d","e"],"triples":[["b","c","d"],["b","d","e"],["b","c","e"],["c","d","e"]]}"#;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

unsafe fn take(s: *mut c_char) -> String {
    let out = CStr::from_ptr(s).to_str().unwrap().to_string();
    predim_string_free(s);
    out
}

fn last_error() -> String {
    let p = predim_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_string()
}

fn load(json: &str, spec: Option<&str>) -> *mut PredimStructure {
    let json = c(json);
    let spec = spec.map(c);
    let mut h = ptr::null_mut();
    let st = unsafe { predim_structure_load(json.as_ptr(), spec.as_ref().map_or(ptr::null(), |s| s.as_ptr()), &mut h) };
    assert_eq!(st, PredimStatus::Ok);
    h
}

#[test]
fn structure_queries() {
    let h = load(FIVE, Some("trivial_r"));
    unsafe {
        let mut n = 0usize;
        assert_eq!(predim_structure_point_count(h, &mut n), PredimStatus::Ok);
        assert_eq!(n, 5);

        let mut d = 0i64;
        assert_eq!(predim_delta(h, c("b,c,d,e").as_ptr(), &mut d), PredimStatus::Ok);
        assert_eq!(d, 0);
        assert_eq!(predim_d_partial(h, c("b").as_ptr(), &mut d), PredimStatus::Ok);
        assert_eq!(d, 0);
        assert_eq!(predim_d_partial(h, c("a").as_ptr(), &mut d), PredimStatus::Ok);
        assert_eq!(d, 1);

        let mut strong = true;
        assert_eq!(predim_is_strong(h, c("b").as_ptr(), &mut strong), PredimStatus::Ok);
        assert!(!strong);

        let mut s = ptr::null_mut();
        assert_eq!(predim_strong_closure(h, c("b").as_ptr(), &mut s), PredimStatus::Ok);
        assert_eq!(take(s), r#"["b","c","d","e"]"#);

        let mut ok = false;
        assert_eq!(predim_gs_check(h, &mut ok, ptr::null_mut()), PredimStatus::Ok);
        assert!(ok);
        predim_structure_free(h);
    }
}

#[test]
fn gs_witness_is_reported() {
    let labels = ["a", "b", "c", "d", "e"];
    let mut triples = Vec::new();
    for i in 0..5 {
        for j in i + 1..5 {
            for k in j + 1..5 {
                triples.push([labels[i], labels[j], labels[k]]);
            }
        }
    }
    let json = serde_json::json!({ "points": labels, "triples": triples }).to_string();
    let h = load(&json, Some("trivial_r"));
    unsafe {
        let mut ok = true;
        let mut w = ptr::null_mut();
        assert_eq!(predim_gs_check(h, &mut ok, &mut w), PredimStatus::Ok);
        assert!(!ok);
        assert_eq!(take(w), r#"["a","b","c","d","e"]"#);
        predim_structure_free(h);
    }
}

#[test]
fn errors_map_to_status_codes() {
    unsafe {
        let mut h = ptr::null_mut();
        assert_eq!(predim_structure_load(c("{").as_ptr(), ptr::null(), &mut h), PredimStatus::Input);
        assert!(h.is_null());
        assert!(last_error().contains("parse error"));

        assert_eq!(predim_structure_load(c(FIVE).as_ptr(), ptr::null(), &mut h), PredimStatus::Input);
        assert_eq!(predim_structure_load(ptr::null(), ptr::null(), &mut h), PredimStatus::NullPointer);

        let bad = [0xffu8, 0];
        assert_eq!(
            predim_structure_load(bad.as_ptr() as *const c_char, ptr::null(), &mut h),
            PredimStatus::InvalidUtf8
        );

        let h = load(FIVE, Some("trivial_r"));
        let mut d = 0i64;
        assert_eq!(predim_delta(h, c("zz").as_ptr(), &mut d), PredimStatus::Input);
        assert!(last_error().contains("zz"));
        assert_eq!(predim_delta(h, c("a").as_ptr(), ptr::null_mut()), PredimStatus::NullPointer);

        assert_eq!(predim_delta(h, c("a").as_ptr(), &mut d), PredimStatus::Ok);
        assert!(predim_last_error().is_null());
        predim_structure_free(h);

        // Closure under a non-submodular predimension enumerates subsets.
        let m = random_full(&mut ChaCha8Rng::seed_from_u64(1), 6);
        let h = load(&serialize(&m), Some("aut:d,g"));
        let mut s = ptr::null_mut();
        assert_eq!(predim_structure_set_budget(h, 2, 1 << 20, 0), PredimStatus::Ok);
        assert_eq!(predim_strong_closure(h, c("").as_ptr(), &mut s), PredimStatus::Budget);
        assert!(last_error().contains("budget"));
        assert_eq!(predim_structure_set_budget(h, 20, 1 << 20, 0), PredimStatus::Ok);
        assert_eq!(predim_strong_closure(h, c("").as_ptr(), &mut s), PredimStatus::Ok);
        take(s);
        predim_structure_free(h);
    }
}

#[test]
fn declared_spec_is_used() {
    let json = r#"{"points":["a","b","c"],"triples":[["a","b","c"]],"spec":"trivial_r"}"#;
    let h = load(json, None);
    let mut d = 0i64;
    assert_eq!(unsafe { predim_delta(h, c("a,b,c").as_ptr(), &mut d) }, PredimStatus::Ok);
    assert_eq!(d, 2);
    unsafe { predim_structure_free(h) };
}

#[test]
fn cosets() {
    unsafe {
        let (mut w, mut x) = (ptr::null_mut(), ptr::null_mut());
        assert_eq!(predim_coset_load(c(r#"{"n":2,"gens":[[2,3]],"torsion":["0"]}"#).as_ptr(), &mut w), PredimStatus::Ok);
        assert_eq!(predim_coset_load(c(r#"{"n":2,"gens":[[1,0]],"torsion":["0"]}"#).as_ptr(), &mut x), PredimStatus::Ok);
        let mut dim = 0usize;
        assert_eq!(predim_coset_dim(w, &mut dim), PredimStatus::Ok);
        assert_eq!(dim, 1);

        let mut s = ptr::null_mut();
        assert_eq!(predim_coset_intersect(w, x, &mut s), PredimStatus::Ok);
        let v: serde_json::Value = serde_json::from_str(&take(s)).unwrap();
        assert_eq!(v["dim"], 0);
        assert_eq!(v["components"].to_string().trim_matches('"'), "3");

        assert_eq!(predim_coset_typicality(w, x, &mut s), PredimStatus::Ok);
        let v: serde_json::Value = serde_json::from_str(&take(s)).unwrap();
        assert_eq!(v["atypical"], false);

        let mut y = ptr::null_mut();
        assert_eq!(predim_coset_load(c(r#"{"n":3,"gens":[[1,0,0]],"torsion":["0"]}"#).as_ptr(), &mut y), PredimStatus::Ok);
        assert_eq!(predim_coset_intersect(w, y, &mut s), PredimStatus::Domain);
        assert!(last_error().contains("ambient"));

        predim_coset_free(w);
        predim_coset_free(x);
        predim_coset_free(y);
        predim_coset_free(ptr::null_mut());
    }
}

#[test]
fn cli_runs_in_process() {
    let args = [c("torus"), c("snf"), c("--help")];
    let ptrs: Vec<*const c_char> = args.iter().map(|a| a.as_ptr()).collect();
    let (mut out, mut err, mut code) = (ptr::null_mut(), ptr::null_mut(), -1);
    unsafe {
        assert_eq!(predim_cli_run(ptrs.as_ptr(), ptrs.len(), &mut out, &mut err, &mut code), PredimStatus::Ok);
        assert_eq!(code, 0);
        assert!(take(out).contains("Usage"));
        take(err);

        let bogus = [c("no-such-command")];
        let ptrs: Vec<*const c_char> = bogus.iter().map(|a| a.as_ptr()).collect();
        assert_eq!(predim_cli_run(ptrs.as_ptr(), 1, ptr::null_mut(), &mut err, &mut code), PredimStatus::Ok);
        assert_eq!(code, 2);
        assert!(!take(err).is_empty());
    }
}

#[test]
fn header_compiles_as_c() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/predim.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for f in ["predim_structure_load", "predim_coset_intersect", "predim_cli_run", "PREDIM_STATUS_DOMAIN"] {
        assert!(text.contains(f), "header lacks {f}");
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("probe.c");
    std::fs::write(
        &src,
        format!(
            "#include \"{}\"\nint main(void) {{ PredimStructure *h = 0; predim_structure_free(h); return PREDIM_STATUS_OK; }}\n",
            header.display()
        ),
    )
    .unwrap();
    match Command::new("cc").args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only"]).arg(&src).status() {
        Ok(s) => assert!(s.success(), "header does not compile"),
        Err(_) => eprintln!("no C compiler found; skipping header compilation"),
    }
}
