use kakeya_core::filters::{FilterBank, TestDictionary};
use kakeya_core::maximal::{DirectionSet, RotationSet, SmoothedKakeya};
use kakeya_core::testsets::{bandlimited_random, Family, Manifest};
use kakeya_core::verify::suite::{kakeya_audit_config, OperatorKind, OperatorSetup};
use kakeya_core::verify::{norm_ratio_sweep, DictChoice, SweepConfig, SweepOp};
use kakeya_core::{Error, Field, Grid};

#[test]
fn frozen_scales_sit_below_the_supremum_over_them() {
    let grid = Grid::new(2, 64, 8.0).unwrap();
    let f = bandlimited_random(2, 1.0, &grid).unwrap();
    let bank = FilterBank::new(1.0 / 16.0, 0.25, 2).unwrap();
    let dict = DictChoice::Raw.build(2).unwrap();
    let rots = RotationSet::aligned_with(&DirectionSet::for_delta(2, 1.0 / 16.0).unwrap());
    let op = SmoothedKakeya::new(&bank, &dict, &rots).unwrap();
    let sup = op.apply(&f, &[0.5, 1.0]).unwrap();
    for t in [0.5, 1.0] {
        let frozen = op.frozen(&f, t).unwrap();
        for (a, b) in frozen.values().iter().zip(sup.values()) {
            assert!(a <= b, "t = {t}: {a} > {b}");
        }
    }
}

#[test]
fn constants_are_fixed_by_all_seven_operators_in_3d() {
    let grid = Grid::new(3, 16, 2.0).unwrap();
    let op = OperatorSetup::new(&grid, 0.5, 0.25, TestDictionary::phi_only(3).unwrap()).unwrap();
    let one = [Field::constant(grid, 1.0)];
    for kind in OperatorKind::ALL {
        let out = op.apply_many(kind, &one).unwrap();
        assert!(out[0].iter().all(|v| (v - 1.0).abs() < 1e-8), "{}", kind.name());
    }
}

#[test]
fn generated_inputs_and_manifests_are_reproducible() {
    let grid = Grid::new(2, 128, 2.0).unwrap();
    for fam in [Family::Perron, Family::TubeUnion, Family::BumpSum { count: 5 }, Family::BandlimitedRandom { cutoff: 8.0 }] {
        let spec = fam.spec(1.0 / 16.0, 3);
        let a = spec.generate(&grid).unwrap();
        let b = spec.generate(&grid).unwrap();
        assert_eq!(a, b, "{}", fam.name());
        assert_eq!(Manifest::of(&spec, &a).unwrap(), Manifest::of(&spec, &b).unwrap());
    }
}

#[test]
fn constant_input_gives_a_flat_kakeya_sweep() {
    let cfg = SweepConfig { family: Family::Constant, n: 128, side: 1.0, deltas: vec![0.25, 0.125, 0.0625], ..kakeya_audit_config() };
    let r = norm_ratio_sweep(&cfg).unwrap();
    assert!(r.fit.slope.abs() < 1e-6, "{:?}", r.fit);
}

#[test]
fn sweep_preconditions_are_enforced() {
    let base = SweepConfig { n: 64, side: 1.0, ..kakeya_audit_config() };
    let two = SweepConfig { deltas: vec![0.25, 0.125], ..base.clone() };
    assert!(matches!(norm_ratio_sweep(&two), Err(Error::InsufficientPoints { needed: 3, got: 2 })));
    // δ = 1/64 is below two grid spacings on 64 points per unit
    let fine = SweepConfig { deltas: vec![0.25, 0.125, 1.0 / 64.0], ..base.clone() };
    assert!(norm_ratio_sweep(&fine).is_err());
    let nik = SweepConfig { op: SweepOp::Nikodym, family: Family::Ball, deltas: vec![0.25, 0.125, 0.0625], ..base };
    let r = norm_ratio_sweep(&nik).unwrap();
    assert_eq!(r.rows.len(), 3);
    assert!(r.bound_slope.is_none());
}
