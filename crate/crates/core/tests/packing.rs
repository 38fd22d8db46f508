use squarepack_core::geometry::area;
use squarepack_core::lattice::pack_bounded_rect;
use squarepack_core::recursive::{init_target, run, step, Outcome, RunOptions};
use squarepack_core::render::render_svg;
use squarepack_core::verifier::{brute_force_overlap, verify, DEFAULT_TOLERANCE_SCALE};
use squarepack_core::{FamilySpec, PackParams, PlacementManifest, Rect, SidelengthFamily};

fn ap() -> SidelengthFamily {
    SidelengthFamily::ap(1.0, 0.0).unwrap()
}

#[test]
fn lattice_output_verifies_and_matches_brute_force() {
    let fam = ap();
    let n0 = 2_000_000u64;
    let params = PackParams::new(0.6, 4, n0, n0 + 1).unwrap();
    let side = 2.5 * 4.0 * (n0 as f64).powf(-0.6);
    let r = Rect::square(0.0, 0.0, side).unwrap();
    let lp = pack_bounded_rect(&r, &fam, &params, n0).unwrap();
    let m = PlacementManifest::from_lattice(&fam.spec(), &params, r, &lp);
    let report = verify(&m, DEFAULT_TOLERANCE_SCALE).unwrap();
    assert!(report.is_green(), "{report:?}");
    assert!(report.area_gap.abs() <= 1e-11 * r.area());
    let mut all: Vec<Rect> = m.squares.iter().map(|s| s.rect()).collect();
    all.extend(&m.leftovers);
    assert!(brute_force_overlap(&all, report.tolerance)
        .unwrap()
        .is_empty());
}

#[test]
fn free_area_tracks_the_tail() {
    let fam = ap();
    let n0 = 1_216_512;
    let t = 2.0 / 3.0;
    let params = PackParams::new(t, 4, n0, n0 + 20_000).unwrap();
    let mut state = init_target(&fam, &params).unwrap();
    let initial = fam.tail_sum(n0, 2.0 * t).unwrap();
    let slack = initial.upper - initial.value;
    let opts = RunOptions::default();
    for k in 0..3 {
        step(&mut state, &params, &fam, &opts, k).unwrap();
        let tail = fam.tail_sum(state.n_cur, 2.0 * t).unwrap();
        let free = state.free_area();
        let tol = (1e-10 * tail.value).max(tail.width()) + slack;
        assert!(
            (free - tail.value).abs() <= tol,
            "step {k}: {free} vs {}",
            tail.value
        );
    }
}

#[test]
fn completed_runs_place_a_contiguous_prefix() {
    let fam = ap();
    let n0 = 1_216_512;
    let params = PackParams::new(2.0 / 3.0, 4, n0, n0 + 10_000).unwrap();
    let (m, r) = run(&fam, &params, &RunOptions::default()).unwrap();
    assert!(r.completed());
    assert!(m.n_reached >= params.n_max);
    assert_eq!(m.squares.len() as u64, m.n_reached - n0);
    assert!(m
        .squares
        .iter()
        .enumerate()
        .all(|(k, s)| s.n == n0 + k as u64));
    let m2 = 16;
    for s in &r.steps {
        assert!(s
            .chain
            .windows(2)
            .all(|w| (m2..=9 * m2).contains(&(w[1] - w[0]))));
    }
}

#[test]
fn runs_are_deterministic() {
    let fam = ap();
    let n0 = 1_216_512;
    let params = PackParams::new(2.0 / 3.0, 4, n0, n0 + 5_000).unwrap();
    let (a, _) = run(&fam, &params, &RunOptions::default()).unwrap();
    let (b, _) = run(&fam, &params, &RunOptions::default()).unwrap();
    assert_eq!(a.to_json(), b.to_json());
    assert_eq!(render_svg(&a), render_svg(&b));
    let back = PlacementManifest::from_json(&a.to_json()).unwrap();
    assert_eq!(back.to_json(), a.to_json());
}

#[test]
fn twin_prime_run_substitutes_actual_sides() {
    let spec = FamilySpec::TwinPrime { cprime: 7.0 };
    let n0 = 100_000;
    let params = PackParams::new(0.75, 2, n0, n0 + 2_000).unwrap();
    let fam = SidelengthFamily::from_spec(spec, n0 + 10_000).unwrap();
    assert_eq!(fam.twin_domination_failure(n0, n0 + 10_000).unwrap(), None);
    let (m, r) = run(&fam, &params, &RunOptions::default()).unwrap();
    assert_eq!(r.outcome, Outcome::Completed, "{}", r.summary());
    for s in m.squares.iter().take(50) {
        let want = fam.side_source(s.n).unwrap().powf(-0.75);
        assert_eq!(s.side, want);
        assert!(s.side <= fam.eval_f(s.n).unwrap().powf(-0.75));
    }
    let v = verify(&m, DEFAULT_TOLERANCE_SCALE).unwrap();
    assert!(v.is_green(), "{v:?}");
    assert!(
        (area(&m.leftovers) + m.stats.area_packed - m.target.area()).abs()
            < 1e-10 * m.target.area()
    );
}

#[test]
fn prime_run_verifies() {
    let n0 = 6_000_000;
    let params = PackParams::new(0.6, 2, n0, n0 + 3_000).unwrap();
    let fam = SidelengthFamily::from_spec(FamilySpec::Prime, n0 + 20_000).unwrap();
    let (m, r) = run(&fam, &params, &RunOptions::default()).unwrap();
    assert_eq!(r.outcome, Outcome::Completed, "{}", r.summary());
    let v = verify(&m, DEFAULT_TOLERANCE_SCALE).unwrap();
    assert!(v.is_green(), "{v:?}");
}
