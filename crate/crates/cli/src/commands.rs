use std::fmt::Write as _;
use std::path::Path;

use conformal_euler::analysis::{ChainReport, FoldingInstance, FoldingReport};
use conformal_euler::conformal::{delta_for_domain, trace_boundary, ConformalDomain, DeltaReport};
use conformal_euler::disc::DiscPoint;
use conformal_euler::dynamics::{
    check_lemma31, integrate_trajectory, verify_arrival, verify_lower_bound, verify_upper_bound, ArrivalReport,
    BoundReport, Termination, TrajectoryRecord,
};
use conformal_euler::Error;
use conformal_euler::moduli::{classify, classify_numeric, Classification, RateFunctions};
use conformal_euler::velocity::{GridHeader, VelocityGrid};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{self, Check, DomainConfig, FoldingConfig, Lemma31Config, ModulusConfig, SimulateConfig};
use crate::output::{fmt_opt, sha256_hex, OutDir};
use crate::{CliError, RunArgs};

/// Outcome of a subcommand: the canonical config and the overall verdict.
pub struct Outcome {
    pub config: serde_json::Value,
    pub pass: bool,
}

#[derive(Serialize)]
struct ClassificationFile {
    analytic: Classification<f64>,
    numeric: Classification<f64>,
    consistent: bool,
}

pub fn modulus(run: &RunArgs, out: &mut OutDir) -> Result<Outcome, CliError> {
    let (cfg, canon): (ModulusConfig, _) = config::load(&run.config)?;
    let (tab, rho) = (&cfg.table, &cfg.rho);
    if !(tab.r_min > 0.0 && tab.r_min < 1.0) || tab.points < 2 {
        return Err(CliError::Config("table needs 0 < r_min < 1 and points >= 2".into()));
    }
    if !(rho.t_min < rho.t_max) || rho.points < 2 {
        return Err(CliError::Config("rho needs t_min < t_max and points >= 2".into()));
    }
    let rates = RateFunctions::new(cfg.modulus.clone());
    let mut table = String::from("r,m,q_m,Q_m\n");
    let lr = tab.r_min.ln();
    for i in 0..tab.points {
        let r = (lr * (1.0 - i as f64 / (tab.points - 1) as f64)).exp();
        let _ = writeln!(
            table,
            "{r:e},{},{},{}",
            fmt_opt(cfg.modulus.eval(r)),
            fmt_opt(rates.q(r)),
            fmt_opt(rates.big_q(r))
        );
    }
    out.write("modulus_table.csv", table.as_bytes())?;
    let mut rt = String::from("t,rho_m\n");
    for i in 0..rho.points {
        let t = rho.t_min + (rho.t_max - rho.t_min) * i as f64 / (rho.points - 1) as f64;
        let _ = writeln!(rt, "{t:e},{}", fmt_opt(rates.rho(t)));
    }
    out.write("rho_table.csv", rt.as_bytes())?;
    let analytic = classify(&cfg.modulus);
    let numeric = classify_numeric(&cfg.modulus);
    let consistent = analytic.divergence == numeric.divergence && analytic.dini == numeric.dini;
    out.write_json("classification.json", &ClassificationFile { analytic, numeric, consistent })?;
    Ok(Outcome { config: canon, pass: true })
}

#[derive(Serialize)]
struct Corner {
    theta: f64,
    mass: f64,
    interior_angle: f64,
}

#[derive(Serialize)]
struct DomainReport {
    symmetric: bool,
    /// `max |S(conj z) - conj S(z)|` over the probe points.
    symmetry_residual: f64,
    /// Largest relative mismatch of the difference quotients of `S` along `x` and `y`.
    holomorphy_residual: f64,
    delta: Option<DeltaReport>,
    delta_error: Option<String>,
    winding_number: i64,
    signed_area: f64,
    corners: Vec<Corner>,
}

fn probes() -> Vec<DiscPoint<f64>> {
    let mut v = Vec::new();
    for d in [0.7, 0.4, 0.1, 0.02] {
        for j in 0..12 {
            v.push(DiscPoint::new(d, -std::f64::consts::PI + (j as f64 + 0.37) * std::f64::consts::PI / 6.0));
        }
    }
    v
}

fn residuals(dom: &ConformalDomain<f64>) -> (f64, f64) {
    let pts = probes();
    let res: Vec<(f64, f64)> = pts
        .par_iter()
        .map(|p| {
            let s = dom.map_s_at(p);
            let sym = (dom.map_s_at(&p.conj()) - s.conj()).norm();
            let z = p.to_complex();
            let h = 1e-3 * p.d;
            let at = |w: Complex64| dom.map_s_at(&DiscPoint::from_complex(w));
            let dx = (at(z + h) - at(z - h)) / (2.0 * h);
            let dy = (at(z + Complex64::i() * h) - at(z - Complex64::i() * h)) / (Complex64::i() * 2.0 * h);
            (sym, (dx - dy).norm() / dx.norm())
        })
        .collect();
    res.iter().fold((0.0, 0.0), |(a, b), &(s, h)| (f64::max(a, s), f64::max(b, h)))
}

pub fn domain(run: &RunArgs, out: &mut OutDir) -> Result<Outcome, CliError> {
    let (cfg, canon): (DomainConfig, _) = config::load(&run.config)?;
    let dom = cfg.domain.build().map_err(CliError::from_core)?;
    let trace =
        trace_boundary(&dom, cfg.trace.points, cfg.trace.eps, cfg.trace.richardson).map_err(CliError::from_core)?;
    out.write("boundary.csv", trace.to_csv().as_bytes())?;
    out.write("boundary.svg", trace.to_svg().as_bytes())?;
    let (symmetry_residual, holomorphy_residual) = residuals(&dom);
    let (delta, delta_error) = match delta_for_domain(&dom) {
        Ok(d) => (Some(d), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let corners = dom
        .decomposition()
        .beta
        .atoms()
        .iter()
        .map(|a| Corner { theta: a.theta, mass: a.mass, interior_angle: trace.interior_angle(a.theta) })
        .collect();
    let report = DomainReport {
        symmetric: dom.is_symmetric(),
        symmetry_residual,
        holomorphy_residual,
        delta,
        delta_error,
        winding_number: trace.winding_number(trace.center),
        signed_area: trace.signed_area(),
        corners,
    };
    out.write_json("domain_report.json", &report)?;
    Ok(Outcome { config: canon, pass: true })
}

#[derive(Serialize)]
#[serde(untagged)]
enum Verdict<R> {
    Report(R),
    Error { error: String },
}

impl<R> Verdict<R> {
    fn from(r: conformal_euler::Result<R>, pass: impl Fn(&R) -> bool) -> (Self, bool) {
        match r {
            Ok(r) => {
                let p = pass(&r);
                (Verdict::Report(r), p)
            }
            Err(e) => (Verdict::Error { error: e.to_string() }, false),
        }
    }
}

#[derive(Serialize)]
struct SimulateReport {
    grid_key: String,
    termination: Termination,
    samples: usize,
    t_final: f64,
    d_final: f64,
    max_abs_imag: f64,
    lower: Option<Verdict<BoundReport>>,
    upper: Option<Verdict<BoundReport>>,
    arrival: Option<Verdict<ArrivalReport>>,
    pass: bool,
}

fn hash16<S: Serialize>(v: &S) -> String {
    let s = serde_json::to_string(v).expect("serializable");
    sha256_hex(s.as_bytes())[..16].to_string()
}

fn load_cached(dir: &Path, key: &str, cfg: &SimulateConfig) -> Option<VelocityGrid<f64>> {
    let header: GridHeader<f64> =
        serde_json::from_str(&std::fs::read_to_string(dir.join(format!("{key}.json"))).ok()?).ok()?;
    if header.key != key || header.spec != cfg.grid {
        return None;
    }
    let csv = std::fs::read_to_string(dir.join(format!("{key}.csv"))).ok()?;
    VelocityGrid::from_csv(&header, &csv).ok()
}

pub fn simulate(run: &RunArgs, out: &mut OutDir) -> Result<Outcome, CliError> {
    let (mut cfg, canon): (SimulateConfig, _) = config::load(&run.config)?;
    if let Some(t) = run.quad_tol_override {
        cfg.grid.rel_tol = t;
    }
    cfg.grid.validate().map_err(CliError::from_core)?;
    cfg.field.validate().map_err(CliError::from_core)?;
    let dom = cfg.domain.build().map_err(CliError::from_core)?;
    let key = format!("{}-{}-{}", hash16(&cfg.domain), hash16(&cfg.field), hash16(&cfg.grid));
    let cache = cfg.cache_dir.clone().unwrap_or_else(|| out.path().join("field_cache"));
    let grid = match load_cached(&cache, &key, &cfg) {
        Some(g) => {
            eprintln!("field cache hit: {key}");
            g
        }
        None => {
            eprintln!("precomputing field {key}");
            let g = VelocityGrid::precompute(&dom, &cfg.field, &cfg.grid).map_err(CliError::from_core)?;
            std::fs::create_dir_all(&cache).map_err(|e| CliError::Io(format!("{}: {e}", cache.display())))?;
            let header = serde_json::to_string_pretty(&g.header(&key)).map_err(|e| CliError::Io(e.to_string()))?;
            std::fs::write(cache.join(format!("{key}.json")), header).map_err(|e| CliError::Io(e.to_string()))?;
            std::fs::write(cache.join(format!("{key}.csv")), g.to_csv()).map_err(|e| CliError::Io(e.to_string()))?;
            g
        }
    };
    let zeta0 = Complex64::new(cfg.zeta0[0], cfg.zeta0[1]);
    let rec = match integrate_trajectory(&grid, zeta0, &cfg.trajectory) {
        Ok(r) => r,
        Err(e @ (Error::GridCoverage { .. } | Error::Quadrature { .. })) => {
            let p = DiscPoint::from_complex(zeta0);
            TrajectoryRecord::from_samples(&[(0.0, p.d, p.phi)], Termination::Error(e.to_string()))
                .map_err(CliError::from_core)?
        }
        Err(e) => return Err(CliError::from_core(e)),
    };
    out.write("trajectory.csv", rec.to_csv().as_bytes())?;
    let m = cfg.domain.modulus();
    let sup = cfg.field.sup_norm();
    let mut pass = !matches!(rec.terminated, Termination::Error(_));
    let mut report = SimulateReport {
        grid_key: key,
        termination: rec.terminated.clone(),
        samples: rec.len(),
        t_final: *rec.times.last().unwrap_or(&0.0),
        d_final: *rec.d.last().unwrap_or(&1.0),
        max_abs_imag: rec.max_abs_imag(),
        lower: None,
        upper: None,
        arrival: None,
        pass: false,
    };
    for c in &cfg.checks {
        let ok = match c {
            Check::Lower => {
                let (v, ok) = Verdict::from(verify_lower_bound(&rec, &m, sup), |r| r.pass);
                report.lower = Some(v);
                ok
            }
            Check::Upper => {
                let (v, ok) = Verdict::from(verify_upper_bound(&rec, &m), |r| r.pass);
                report.upper = Some(v);
                ok
            }
            Check::Arrival => {
                let (v, ok) = Verdict::from(verify_arrival(&rec, &m, cfg.d_target), |r| r.pass);
                report.arrival = Some(v);
                ok
            }
        };
        pass &= ok;
    }
    report.pass = pass;
    out.write_json("bound_report.json", &report)?;
    Ok(Outcome { config: canon, pass })
}

pub fn lemma31(run: &RunArgs, out: &mut OutDir) -> Result<Outcome, CliError> {
    let (cfg, canon): (Lemma31Config, _) = config::load(&run.config)?;
    let dom = cfg.domain.build().map_err(CliError::from_core)?;
    let m = cfg.modulus.clone().unwrap_or_else(|| cfg.domain.modulus());
    let xis: Vec<Complex64> = cfg.xi.iter().map(|x| Complex64::new(x[0], x[1])).collect();
    let report = check_lemma31(&dom, &m, &xis, run.quad_tol).map_err(CliError::from_core)?;
    let pass = report.pass;
    out.write_json("lemma31_report.json", &report)?;
    Ok(Outcome { config: canon, pass })
}

#[derive(Serialize)]
struct FoldingEntry {
    source: &'static str,
    instance: FoldingInstance<f64>,
    check: Verdict<FoldingReport>,
    chain: Option<Verdict<ChainReport>>,
    pass: bool,
}

#[derive(Serialize)]
struct FoldingFile {
    entries: Vec<FoldingEntry>,
    passed: usize,
    failed: usize,
    pass: bool,
}

pub fn folding(run: &RunArgs, out: &mut OutDir) -> Result<Outcome, CliError> {
    let (cfg, canon): (FoldingConfig, _) = config::load(&run.config)?;
    for (i, inst) in cfg.instances.iter().enumerate() {
        inst.validate().map_err(|e| CliError::Config(format!("instance {i}: {e}")))?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(run.seed);
    let mut work: Vec<(&'static str, FoldingInstance<f64>)> =
        cfg.instances.iter().cloned().map(|i| ("config", i)).collect();
    work.extend((0..cfg.random).map(|_| ("random", FoldingInstance::random(&mut rng))));
    let tol = run.quad_tol;
    let entries: Vec<FoldingEntry> = work
        .into_par_iter()
        .map(|(source, instance)| {
            let (check, mut pass) = Verdict::from(instance.check(tol), |r| r.pass);
            let chain = cfg.chain.then(|| {
                let (v, ok) = Verdict::from(instance.chain_report(tol), |r| r.monotone);
                pass &= ok;
                v
            });
            FoldingEntry { source, instance, check, chain, pass }
        })
        .collect();
    let passed = entries.iter().filter(|e| e.pass).count();
    let failed = entries.len() - passed;
    let file = FoldingFile { entries, passed, failed, pass: failed == 0 };
    out.write_json("folding_report.json", &file)?;
    Ok(Outcome { config: canon, pass: file.pass })
}
