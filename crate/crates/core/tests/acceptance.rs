//! Acceptance checks; prints one PASS/FAIL line per criterion.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, PI};
use std::process::ExitCode;
use std::time::Instant;

use conformal_euler::analysis::{FoldingInstance, ProfileKind, ShiftKind, WeightKind};
use conformal_euler::conformal::{
    construct_modulus_domain, square_domain, trace_boundary, Atom, BoundaryMeasure, ConformalDomain, DomainSpec,
};
use conformal_euler::disc::DiscPoint;
use conformal_euler::dynamics::{
    check_lemma31, integrate_trajectory, verify_arrival, verify_lower_bound, verify_upper_bound, TrajectoryOptions,
    TrajectoryRecord,
};
use conformal_euler::moduli::{classify, classify_numeric, DivergenceClass, Modulus, RateFunctions};
use conformal_euler::velocity::{disc_velocity, GridSpec, VelocityGrid, VelocityOptions, VorticityField};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn verdict(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn rho_closed_form() -> Outcome {
    let rates = RateFunctions::new(Modulus::<f64>::Zero);
    let mut worst = 0.0f64;
    for i in 0..=1000 {
        let t = -2.0 + 5.0 * i as f64 / 1000.0;
        let r = rates.rho(t).map_err(|e| e.to_string())?;
        worst = worst.max((r - (-t.exp()).exp()).abs());
    }
    verdict(worst < 1e-8, format!("max error {worst:.2e}"))
}

fn borderline_classification() -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;
    for (a, expected) in [(FRAC_PI_2 - 0.1, DivergenceClass::Divergent), (FRAC_PI_2 + 0.1, DivergenceClass::Convergent)] {
        let m = Modulus::capped_log(a).map_err(|e| e.to_string())?;
        let analytic = classify(&m);
        let numeric = classify_numeric(&m);
        let ev = numeric.evidence.as_ref().ok_or("numeric classifier returned no evidence")?;
        ok &= analytic.divergence == expected && numeric.divergence == expected && ev.trend_monotone;
        notes.push(format!(
            "a={a:.4}: {:?}/{:?} p={:.3} monotone={}",
            analytic.divergence, numeric.divergence, ev.q_exponent, ev.trend_monotone
        ));
    }
    verdict(ok, notes.join("; "))
}

fn disc_identity() -> Outcome {
    let dom = DomainSpec::<f64>::disc().build().map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    let mut n = 0;
    for i in 0..32 {
        for j in 0..32 {
            let z = Complex64::new(-0.95 + 1.9 * i as f64 / 31.0, -0.95 + 1.9 * j as f64 / 31.0);
            if z.norm() > 0.95 {
                continue;
            }
            let s = dom.sprime(z).map_err(|e| e.to_string())?;
            worst = worst.max((s - 1.0).norm());
            n += 1;
        }
    }
    verdict(worst < 1e-6, format!("max |S'-1| = {worst:.2e} over {n} points"))
}

fn triangle() -> Outcome {
    let dom = construct_modulus_domain(&Modulus::<f64>::Zero, 0.25).map_err(|e| e.to_string())?;
    let trace = trace_boundary(&dom, 1440, 1e-6, true).map_err(|e| e.to_string())?;
    let thetas: Vec<f64> = dom.decomposition().beta.atoms().iter().map(|a| a.theta).collect();
    let angles: Vec<f64> = thetas.iter().map(|&t| trace.interior_angle(t)).collect();
    let verts: Vec<Complex64> = thetas.iter().map(|&t| dom.map_s_at(&DiscPoint { d: 0.0, phi: t })).collect();
    let sides: Vec<f64> = (0..3).map(|k| (verts[(k + 1) % 3] - verts[k]).norm()).collect();
    let mean = sides.iter().sum::<f64>() / 3.0;
    let angle_err = angles.iter().map(|a| (a - FRAC_PI_3).abs()).fold(0.0, f64::max);
    let ratio_err = sides.iter().map(|s| (s / mean - 1.0).abs()).fold(0.0, f64::max);
    verdict(
        angle_err < 0.01 && ratio_err < 0.005,
        format!("angle error {angle_err:.2e} rad, side ratio error {ratio_err:.2e}"),
    )
}

fn disc_rotation() -> Outcome {
    let dom = DomainSpec::<f64>::disc().build().map_err(|e| e.to_string())?;
    let w = VorticityField::constant(1.0);
    let opts = VelocityOptions::default();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        use rand::Rng;
        let z = Complex64::from_polar(rng.gen_range(0.05..0.97), rng.gen_range(-PI..PI));
        let v = disc_velocity(&dom, &w, z, &opts).map_err(|e| e.to_string())?;
        worst = worst.max((v - Complex64::i() * z / 2.0).norm() / z.norm());
    }
    verdict(worst < 1e-3, format!("max |v - i zeta/2|/|zeta| = {worst:.2e}"))
}

fn corner_domain(a: f64) -> Result<ConformalDomain<f64>, String> {
    let m = Modulus::capped_log(a).map_err(|e| e.to_string())?;
    construct_modulus_domain(&m, 1e-3).map_err(|e| e.to_string())
}

/// Trajectory from 0.5 in the convergent corner domain, shared by two criteria.
fn convergent_run() -> Result<(TrajectoryRecord<f64>, f64), String> {
    let dom = corner_domain(PI)?;
    let w = VorticityField::odd_half(1.0);
    let spec = GridSpec { levels: 20, per_octave: 3, n_phi: 0, use_symmetry: false, ..GridSpec::default() };
    let t0 = Instant::now();
    let grid = VelocityGrid::precompute(&dom, &w, &spec).map_err(|e| e.to_string())?;
    let secs = t0.elapsed().as_secs_f64();
    let opts = TrajectoryOptions { horizon: 50.0, eps_stop: 1e-5, tol: 1e-9 };
    let rec = integrate_trajectory(&grid, Complex64::new(0.5, 0.0), &opts).map_err(|e| e.to_string())?;
    Ok((rec, secs))
}

fn symmetry(run: &Result<(TrajectoryRecord<f64>, f64), String>) -> Outcome {
    let (rec, secs) = run.as_ref().map_err(|e| e.clone())?;
    let im = rec.max_abs_imag();
    verdict(
        im < 1e-6,
        format!("max |Im zeta| = {im:.2e} over {} samples, t_end = {:.3}, field {secs:.0} s", rec.len(), rec.times.last().unwrap()),
    )
}

fn arrival(run: &Result<(TrajectoryRecord<f64>, f64), String>) -> Outcome {
    let (rec, _) = run.as_ref().map_err(|e| e.clone())?;
    let m = Modulus::capped_log(PI).map_err(|e| e.to_string())?;
    let r = verify_arrival(rec, &m, 1e-4).map_err(|e| e.to_string())?;
    verdict(
        r.pass,
        format!(
            "reached={} t={:?} c_fit={:.3} margin={:+.3}",
            r.reached,
            r.t_reached.map(|t| (t * 1e3).round() / 1e3),
            r.c_fit,
            r.margin
        ),
    )
}

fn rate_bounds() -> Outcome {
    let dom = corner_domain(FRAC_PI_4)?;
    let m = dom.decomposition().modulus.clone();
    let w = VorticityField::odd_half(1.0);
    let spec = GridSpec { levels: 66, per_octave: 3, n_phi: 0, use_symmetry: true, ..GridSpec::default() };
    let grid = VelocityGrid::precompute(&dom, &w, &spec).map_err(|e| e.to_string())?;
    let opts = TrajectoryOptions { horizon: 20.0, eps_stop: 2.0 * spec.d_min(), tol: 1e-9 };
    let rec = integrate_trajectory(&grid, Complex64::new(0.5, 0.0), &opts).map_err(|e| e.to_string())?;
    let lower = verify_lower_bound(&rec, &m, w.sup_norm()).map_err(|e| e.to_string())?;
    let upper = verify_upper_bound(&rec, &m).map_err(|e| e.to_string())?;
    verdict(
        lower.pass && upper.pass && lower.c_fit < 500.0 && upper.c_fit > 0.0,
        format!(
            "d_end={:.1e} at t={:.2}, C_fit={:.3} (margin {:+.1e}), c_fit={:.3} (margin {:+.1e}), {} tail samples",
            rec.min_d(),
            rec.times.last().unwrap(),
            lower.c_fit,
            lower.margin,
            upper.c_fit,
            upper.margin,
            upper.tail_samples
        ),
    )
}

fn folding() -> Outcome {
    let tol = 1e-6;
    let dirac = FoldingInstance {
        theta_star: 0.4,
        delta: 0.3,
        beta: BoundaryMeasure::new(vec![Atom { theta: 0.4, mass: 1.0 }], 0.0).map_err(|e| e.to_string())?,
        alpha: 2.0,
        f: WeightKind::DistancePower { exponent: 5.0 / 6.0 },
        g: ShiftKind::Clipped { radius: 0.9 },
        h: ProfileKind::Power { p: 1.0 },
        cap_radius: 0.3,
    };
    let r = dirac.check(tol).map_err(|e| e.to_string())?;
    let scale = r.lhs.abs().max(r.rhs.abs());
    let dirac_ok = (r.rhs - r.lhs).abs() < 3.0 * tol * scale;
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let instances: Vec<FoldingInstance<f64>> = (0..50).map(|_| FoldingInstance::random(&mut rng)).collect();
    let mut passed = 0;
    let mut worst = f64::INFINITY;
    for inst in &instances {
        match inst.check(tol) {
            Ok(r) => {
                passed += r.pass as usize;
                worst = worst.min(r.margin / r.lhs.abs().max(r.rhs.abs()));
            }
            Err(e) => return Err(format!("random instance failed: {e}")),
        }
    }
    let mut two_atoms = dirac.clone();
    two_atoms.beta = BoundaryMeasure::new(
        vec![Atom { theta: 0.1, mass: 0.5 }, Atom { theta: 0.7, mass: 0.5 }],
        0.0,
    )
    .map_err(|e| e.to_string())?;
    let mut chains_ok = true;
    let mut worst_drop = 0.0f64;
    for inst in std::iter::once(&two_atoms).chain(instances.iter().take(10)) {
        let c = inst.chain_report(tol).map_err(|e| e.to_string())?;
        chains_ok &= c.monotone;
        worst_drop = worst_drop.max(c.worst_drop);
    }
    verdict(
        dirac_ok && passed == 50 && chains_ok,
        format!(
            "dirac |rhs-lhs|/scale = {:.1e}, random {passed}/50 (worst relative margin {worst:+.2e}), chains monotone={chains_ok} (worst drop {worst_drop:.1e})",
            (r.rhs - r.lhs).abs() / scale
        ),
    )
}

fn kernel_bound() -> Outcome {
    let xis: Vec<Complex64> = (1..=4).map(|k| Complex64::new(1.0 - 10f64.powi(-k), 0.0)).collect();
    let mut ok = true;
    let mut notes = Vec::new();
    let cases: Vec<(&str, ConformalDomain<f64>)> = vec![
        ("disc", DomainSpec::disc().build().map_err(|e| e.to_string())?),
        ("square", square_domain()),
        ("corner a=pi/4", corner_domain(FRAC_PI_4)?),
    ];
    for (name, dom) in &cases {
        let m = dom.decomposition().modulus.clone();
        let r = check_lemma31(dom, &m, &xis, 1e-6).map_err(|e| format!("{name}: {e}"))?;
        ok &= r.pass && r.c_fit < 500.0 && r.max_ratio <= 2.0 * r.median_ratio;
        notes.push(format!("{name}: C_fit={:.3} C_T={:.2} max/median={:.2}", r.c_fit, r.c_t_fit, r.max_ratio / r.median_ratio));
    }
    verdict(ok, notes.join("; "))
}

fn main() -> ExitCode {
    let mut failures = 0;
    let mut report = |n: usize, name: &str, f: &mut dyn FnMut() -> Outcome| {
        let t = Instant::now();
        let out = f();
        let secs = t.elapsed().as_secs_f64();
        match out {
            Ok(d) => println!("PASS {n:>2} {name}: {d} [{secs:.1} s]"),
            Err(d) => {
                failures += 1;
                println!("FAIL {n:>2} {name}: {d} [{secs:.1} s]");
            }
        }
    };
    report(1, "rho closed form for m = 0", &mut rho_closed_form);
    report(2, "capped-log classification at a = pi/2 -+ 0.1", &mut borderline_classification);
    report(3, "disc map is the identity", &mut disc_identity);
    report(4, "equilateral triangle from the corner construction", &mut triangle);
    report(5, "rigid rotation for constant vorticity in the disc", &mut disc_rotation);
    let mut run = None;
    report(6, "real axis is invariant for odd vorticity", &mut || symmetry(run.get_or_insert_with(convergent_run)));
    report(7, "finite-time arrival for a convergent modulus", &mut || arrival(run.get_or_insert_with(convergent_run)));
    report(8, "rate bounds for a divergent modulus", &mut rate_bounds);
    report(9, "folding inequality suite", &mut folding);
    report(10, "kernel integral boundedness", &mut kernel_bound);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failures} criteria failed");
        ExitCode::FAILURE
    }
}
