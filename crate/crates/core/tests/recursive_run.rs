use squarepack_core::recursive::{run, Outcome, RunOptions};
use squarepack_core::verifier::{verify, DEFAULT_TOLERANCE_SCALE};
use squarepack_core::{PackParams, SidelengthFamily};

#[test]
fn ap_run_completes_and_verifies() {
    let fam = SidelengthFamily::ap(1.0, 0.0).unwrap();
    let n0 = 1_216_512;
    let params = PackParams::new(2.0 / 3.0, 4, n0, n0 + 50_000).unwrap();
    let opts = RunOptions {
        k: Some(10.0 / 11.0),
        ..RunOptions::default()
    };
    let (m, r) = run(&fam, &params, &opts).unwrap();
    println!("{}", r.summary());
    assert_eq!(r.outcome, Outcome::Completed);
    assert!(m.n_reached >= params.n_max);
    let v = verify(&m, DEFAULT_TOLERANCE_SCALE).unwrap();
    println!("{v:?}");
    assert!(v.is_green());
}
