use conformal_euler::analysis::{
    fold_once, fold_sequence, FoldingInstance, ProfileKind, ShiftKind, Side, WeightKind,
};
use conformal_euler::conformal::{Atom, BoundaryMeasure};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const TS: f64 = 0.4;
const DELTA: f64 = 0.3;

fn measure(atoms: &[(f64, f64)]) -> BoundaryMeasure<f64> {
    BoundaryMeasure::new(atoms.iter().map(|&(theta, mass)| Atom { theta, mass }).collect(), 0.0).unwrap()
}

fn atoms(b: &BoundaryMeasure<f64>) -> Vec<(f64, f64)> {
    b.atoms().iter().map(|a| (a.theta, a.mass)).collect()
}

fn instance(beta: BoundaryMeasure<f64>, g: ShiftKind<f64>) -> FoldingInstance<f64> {
    FoldingInstance {
        theta_star: TS,
        delta: DELTA,
        beta,
        alpha: 2.0,
        f: WeightKind::DistancePower { exponent: 5.0 / 6.0 },
        g,
        h: ProfileKind::Power { p: 1.0 },
        cap_radius: DELTA,
    }
}

#[test]
fn left_fold_reflects_and_merges() {
    let b = fold_once(&measure(&[(TS - 1.5 * DELTA, 1.0)]), TS, DELTA, Side::Left).unwrap();
    let a = atoms(&b);
    assert_eq!(a.len(), 1);
    assert!((a[0].0 - (TS - 0.5 * DELTA)).abs() < 1e-14 && a[0].1 == 1.0);

    let inside = measure(&[(TS - 0.5 * DELTA, 0.7)]);
    assert_eq!(atoms(&fold_once(&inside, TS, DELTA, Side::Left).unwrap()), atoms(&inside));

    let merged = fold_once(&measure(&[(TS - 2.0 * DELTA, 1.0), (TS, 1.0)]), TS, DELTA, Side::Left).unwrap();
    let a = atoms(&merged);
    assert_eq!(a.len(), 1);
    assert!((a[0].0 - TS).abs() < 1e-12 && (a[0].1 - 2.0).abs() < 1e-15);
}

#[test]
fn sequence_of_a_dirac_is_constant() {
    let seq = fold_sequence(&measure(&[(TS, 1.3)]), TS, DELTA).unwrap();
    assert!(seq.iter().all(|b| atoms(b) == vec![(TS, 1.3)]));
}

#[test]
fn sequence_contracts_and_keeps_mass() {
    let four = measure(&[(TS - 1.9 * DELTA, 0.25), (TS - 0.6 * DELTA, 0.25), (TS + 0.2 * DELTA, 0.25), (TS + 1.7 * DELTA, 0.25)]);
    let seq = fold_sequence(&four, TS, DELTA).unwrap();
    for (j, b) in seq.iter().enumerate() {
        assert!((b.total_mass() - 1.0).abs() < 1e-14);
        let width = b.atoms().iter().map(|a| (a.theta - TS).abs()).fold(0.0, f64::max);
        let double_folds = j / 2;
        assert!(width <= 2f64.powi(2 - double_folds as i32) * DELTA + 1e-12, "step {j}: {width}");
    }
    assert_eq!(seq.last().unwrap().atoms().len(), 1);
}

#[test]
fn dirac_gives_equality() {
    let r = instance(measure(&[(TS, 1.0)]), ShiftKind::Clipped { radius: 0.8 }).check(1e-8).unwrap();
    assert!(r.margin.abs() <= 3e-8 * r.lhs.max(r.rhs), "{r:?}");
}

#[test]
fn two_atoms_satisfy_the_inequality() {
    let inst = instance(measure(&[(TS - DELTA, 0.5), (TS + DELTA, 0.5)]), ShiftKind::Zero);
    let r = inst.check(1e-6).unwrap();
    assert!(r.pass && r.margin > 0.0, "{r:?}");
    let chain = inst.chain_report(1e-6).unwrap();
    assert!(chain.monotone, "{chain:?}");
    assert!((chain.values.last().unwrap() - r.rhs).abs() < 1e-5 * r.rhs);
    assert!((chain.values[0] - r.lhs).abs() < 1e-5 * r.lhs);
}

#[test]
fn seeded_random_instances_pass() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for k in 0..50 {
        let inst = FoldingInstance::<f64>::random(&mut rng);
        let r = inst.check(1e-6).unwrap();
        assert!(r.pass, "instance {k}: {inst:?} {r:?}");
    }
}

#[test]
fn non_integrable_profiles_are_rejected() {
    let mut inst = instance(measure(&[(TS, 1.0)]), ShiftKind::Zero);
    inst.h = ProfileKind::Power { p: 1.5 };
    let err = inst.check(1e-6).unwrap_err().to_string();
    assert!(err.contains("non-integrable"), "{err}");
}
