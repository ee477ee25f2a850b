use std::f64::consts::PI;

use conformal_euler::conformal::{construct_modulus_domain, ConformalDomain, DomainSpec};
use conformal_euler::disc::DiscPoint;
use conformal_euler::moduli::Modulus;
use conformal_euler::velocity::{
    boundary_distance_rate, disc_velocity, velocity_components, GridSpec, VelocityGrid, VelocityOptions,
    VorticityField,
};
use conformal_euler::Error;
use num_complex::Complex64;

fn disc() -> ConformalDomain<f64> {
    DomainSpec::disc().build().unwrap()
}

fn corner() -> ConformalDomain<f64> {
    construct_modulus_domain(&Modulus::capped_log(PI / 4.0).unwrap(), 1e-3).unwrap()
}

fn unfolded() -> VelocityOptions<f64> {
    VelocityOptions { use_symmetry: false, ..Default::default() }
}

#[test]
fn constant_vorticity_rotates_the_disc() {
    let v = disc_velocity(&disc(), &VorticityField::constant(1.0), Complex64::new(0.5, 0.0), &unfolded()).unwrap();
    assert!((v - Complex64::new(0.0, 0.25)).norm() < 1e-6, "{v}");
    let rate = boundary_distance_rate(&disc(), &VorticityField::constant(1.0), Complex64::new(0.5, 0.0), &unfolded())
        .unwrap();
    assert!(rate.abs() < 1e-9);
}

#[test]
fn zero_field_gives_zero() {
    let w = VorticityField::constant(0.0);
    for dom in [disc(), corner()] {
        let z = Complex64::new(0.3, -0.4);
        assert_eq!(disc_velocity(&dom, &w, z, &VelocityOptions::default()).unwrap(), Complex64::new(0.0, 0.0));
        assert_eq!(boundary_distance_rate(&dom, &w, z, &VelocityOptions::default()).unwrap(), 0.0);
    }
}

#[test]
fn odd_field_is_tangent_to_the_real_axis() {
    let dom = corner();
    let w = VorticityField::odd_half(1.0);
    for x in [0.3, 0.6, -0.5] {
        let v = disc_velocity(&dom, &w, Complex64::new(x, 0.0), &unfolded()).unwrap();
        assert!(v.im.abs() < 1e-6 * v.re.abs().max(1e-3), "x = {x}: {v}");
    }
}

#[test]
fn particle_near_the_corner_moves_outward() {
    let rate =
        boundary_distance_rate(&corner(), &VorticityField::odd_half(1.0), Complex64::new(0.9, 0.0), &Default::default())
            .unwrap();
    assert!(rate < 0.0, "{rate}");
}

#[test]
fn folded_and_full_integrals_agree() {
    let dom = corner();
    let w = VorticityField::odd_half(1.0);
    let p = DiscPoint::new(0.2, 2.0);
    let a = velocity_components(&dom, &w, &p, &VelocityOptions::default()).unwrap();
    let b = velocity_components(&dom, &w, &p, &unfolded()).unwrap();
    let scale = a.radial.hypot(a.tangential);
    assert!((a.radial - b.radial).abs() < 1e-5 * scale);
    assert!((a.tangential - b.tangential).abs() < 1e-5 * scale);
}

#[test]
fn odd_field_velocity_is_mirror_symmetric() {
    let dom = corner();
    let w = VorticityField::odd_half(1.0);
    let z = Complex64::from_polar(0.7, 1.2);
    let a = disc_velocity(&dom, &w, z, &unfolded()).unwrap();
    let b = disc_velocity(&dom, &w, z.conj(), &unfolded()).unwrap();
    assert!((b - a.conj()).norm() < 1e-5 * a.norm(), "{a} {b}");
}

// The flow preserves det DS dzeta, so det DS * v has zero flux through closed curves.
#[test]
fn weighted_field_has_no_net_flux() {
    let dom = corner();
    let w = VorticityField::odd_half(1.0);
    let opts = VelocityOptions { rel_tol: 1e-8, ..Default::default() };
    let nodes = [-0.774_596_669_241_483, 0.0, 0.774_596_669_241_483];
    let weights = [5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0];
    let h = 0.02;
    for c in [Complex64::new(0.4, 0.3)] {
        let mut flux = 0.0;
        let mut total = 0.0;
        for side in 0..4 {
            let n = Complex64::i().powu(side);
            let t = n * Complex64::i();
            for (x, wt) in nodes.iter().zip(weights) {
                let z = c + n * h + t * (x * h);
                let j = dom.det_ds(z).unwrap();
                let v = disc_velocity(&dom, &w, z, &opts).unwrap() * j;
                let vn = v.re * n.re + v.im * n.im;
                flux += vn * wt * h;
                total += v.norm() * wt * h;
            }
        }
        assert!(flux.abs() < 1e-5 * total, "flux {flux:e} vs {total:e}");
    }
}

#[test]
fn grid_reproduces_rigid_rotation() {
    let spec = GridSpec { levels: 4, per_octave: 3, n_phi: 12, ..GridSpec::default() };
    let grid = VelocityGrid::precompute(&disc(), &VorticityField::constant(1.0), &spec).unwrap();
    for (r, phi) in [(0.31, 0.2), (0.55, -2.9), (0.8, 1.7), (0.93, 3.0)] {
        let z = Complex64::from_polar(r, phi);
        let v = grid.velocity(z).unwrap();
        assert!((v - Complex64::i() * z / 2.0).norm() < 5e-4, "{z}: {v}");
    }
}

#[test]
fn grid_coverage_matches_levels() {
    let spec = GridSpec::<f64> { levels: 20, ..GridSpec::default() };
    assert!((spec.d_min() - spec.d0 * 2f64.powi(-20)).abs() < 1e-12 * spec.d_min());
    let small = GridSpec { levels: 2, per_octave: 2, ..GridSpec::default() };
    let grid = VelocityGrid::precompute(&disc(), &VorticityField::constant(1.0), &small).unwrap();
    match grid.rates(small.d_min() / 3.0, 0.0) {
        Err(Error::GridCoverage { required_level, .. }) => assert_eq!(required_level, 4),
        other => panic!("{other:?}"),
    }
}

#[test]
fn grid_of_odd_field_is_mirror_symmetric() {
    let spec = GridSpec { levels: 1, per_octave: 3, n_phi: 6, ..GridSpec::default() };
    let grid = VelocityGrid::precompute(&corner(), &VorticityField::odd_half(1.0), &spec).unwrap();
    for z in [Complex64::from_polar(0.45, 0.4), Complex64::from_polar(0.55, 2.5), Complex64::new(0.5, 0.0)] {
        let a = grid.velocity(z).unwrap();
        let b = grid.velocity(z.conj()).unwrap();
        assert!((b - a.conj()).norm() < 1e-6 * a.norm(), "{z}: {a} {b}");
    }
}
