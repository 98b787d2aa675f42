//! Acceptance gate: one line per criterion, nonzero exit if any fails.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use toda_core::diagnostics::probe::{nonexistence_probe, Family, Leg, ProbeReport, ProbeSpec, Verdict};
use toda_core::diagnostics::{
    self, fd_residual, kelvin_transform, pohozaev_residual, sigma1_roots, slope_fit, two_point_defect,
};
use toda_core::discretization::{Chart, GridConfig};
use toda_core::equation::Equation;
use toda_core::liouville::solve_n;
use toda_core::oracle::grid_check;
use toda_core::problem::{barbeta_form, check_conditions, counterexample_family, toda_existence, SourceSet};
use toda_core::solver::{IterationConfig, Solution, Solver, Status};
use toda_core::toda;

struct Outcome {
    pass: bool,
    detail: String,
}

fn report(id: usize, budget: Duration, f: impl FnOnce() -> Outcome) -> bool {
    let t = Instant::now();
    let out = f();
    let took = t.elapsed();
    let in_time = took <= budget;
    let pass = out.pass && in_time;
    let timing = if in_time {
        format!("{:.1}s", took.as_secs_f64())
    } else {
        format!("{:.1}s over the {:.0}s budget", took.as_secs_f64(), budget.as_secs_f64())
    };
    println!(
        "criterion {id}: {} {} [{timing}]",
        if pass { "PASS" } else { "FAIL" },
        out.detail
    );
    pass
}

fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12
}

fn truth_table() -> Outcome {
    let mut ok = true;
    let mut worst = 0.0f64;
    for eps in [0.05, 0.1, 0.15, 0.2] {
        let r = check_conditions(&counterexample_family(eps).unwrap());
        let a = r.assumptions_a.unwrap();
        let like = r.beta_like.unwrap();
        let toda = r.toda_existence.unwrap();
        ok &= a.all() && like.holds && !toda.holds;
        let expect = [
            (a.margins[0].value, 0.0),
            (a.margins[1].value, eps),
            (a.margins[2].value, 1.0 / 3.0 - 1.5 * eps),
            (a.margins[3].value, 0.0),
            (a.margins[4].value, eps),
            (a.margins[5].value, 0.5 * eps),
            (like.margin("like(0,0)").unwrap(), 0.5 * eps),
            (like.margin("like(1,4)").unwrap(), 3.5 * eps),
            (like.min_margin(), 0.5 * eps),
            (toda.margin("mass(0,0)").unwrap(), -1.5 * eps),
            (toda.margin("2 - sum(0)").unwrap(), 1.5 * eps),
        ];
        for (got, want) in expect {
            worst = worst.max((got - want).abs());
            ok &= close(got, want);
        }
    }
    Outcome {
        pass: ok,
        detail: format!("eps in {{0.05, 0.1, 0.15, 0.2}}: A1-A6 and beta-like hold, Toda condition fails; worst margin error {worst:.1e}"),
    }
}

fn equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut disagree, mut literal_disagree, mut holds) = (0, 0, 0);
    for _ in 0..10_000 {
        let m = rng.gen_range(1..=8);
        let b1: Vec<f64> = (0..m).map(|_| rng.gen::<f64>()).collect();
        let b2: Vec<f64> = (0..m).map(|_| rng.gen::<f64>()).collect();
        let t = toda_existence(&b1, &b2).holds;
        let (form, literal) = barbeta_form(&b1, &b2);
        disagree += (t != form.holds) as usize;
        literal_disagree += (t != literal) as usize;
        holds += t as usize;
    }
    Outcome {
        pass: disagree == 0,
        detail: format!(
            "10000 matrices, {holds} satisfy the condition, {disagree} disagreements (beta-bar inequalities alone: {literal_disagree})"
        ),
    }
}

fn bubble() -> Outcome {
    let it = IterationConfig::default();
    let mut lines = Vec::new();
    let mut fd = Vec::new();
    let mut ok = true;
    for level in [0, 1] {
        let grid = GridConfig::default().refined(level);
        let (solver, sol) = match solve_n(Equation::validation(2, 0.0).unwrap(), &grid, &it) {
            Ok(x) => x,
            Err(e) => {
                return Outcome {
                    pass: false,
                    detail: format!("refine {level}: {e}"),
                }
            }
        };
        let mass = solver.masses(&sol.v, &sol.c)[0];
        let rel = (mass - 4.0 * PI).abs() / (4.0 * PI);
        ok &= sol.status == Status::Converged && rel < 0.01;
        let r = fd_residual(&solver, &sol.u, 0.5 * solver.disc.grid.split_radius).unwrap();
        lines.push(format!(
            "N={} {} mass err {:.1e} fd max {:.3e} (h={:.4})",
            solver.disc.grid.len(),
            sol.status.label(),
            rel,
            r.max,
            r.spacing
        ));
        fd.push(r.max);
    }
    let ratio = fd[0] / fd[1];
    ok &= ratio >= 3.0;
    Outcome {
        pass: ok,
        detail: format!("{}; residual ratio {ratio:.2}", lines.join("; ")),
    }
}

fn theorem_masses() -> Outcome {
    let it = IterationConfig::default();
    let coarse3 = GridConfig {
        core_cells: 20,
        ..GridConfig::default()
    };
    let cases = [
        (2, 0.0, GridConfig::default(), 0.01, 4.0 * PI),
        (2, 0.5, GridConfig::default(), 0.01, 6.0 * PI),
        (3, 0.0, coarse3, 0.05, 4.0 * PI * PI),
    ];
    let mut ok = true;
    let mut lines = Vec::new();
    for (n, alpha, grid, tol, lambda) in cases {
        match grid_check(n, alpha, &grid, &it) {
            Ok(c) => {
                let mass_err = (c.mass - lambda).abs() / lambda;
                let profile = c.cross.as_ref().map_or(f64::INFINITY, |x| x.relative_error);
                let good = c.status == Status::Converged
                    && c.oracle_status == Status::Converged
                    && mass_err <= tol
                    && profile <= 0.02;
                ok &= good;
                lines.push(format!(
                    "n={n} alpha={alpha}: mass {:.6} (err {mass_err:.1e}), oracle profile err {:.2e}",
                    c.mass, profile
                ));
            }
            Err(e) => {
                ok = false;
                lines.push(format!("n={n} alpha={alpha}: {e}"));
            }
        }
    }
    Outcome {
        pass: ok,
        detail: lines.join("; "),
    }
}

fn equilateral_run() -> (Solver, Solution) {
    let set = SourceSet::toda(toda::equilateral(2.0), vec![0.6; 3], vec![0.6; 3]).unwrap();
    toda::solve(&set, &GridConfig::default(), &IterationConfig::default()).unwrap()
}

fn toda_existence_run() -> (Outcome, Option<String>, f64) {
    let it = IterationConfig::default();
    let (solver, sol) = equilateral_run();
    let masses = solver.masses(&sol.v, &sol.c);
    let target = 2.0 * PI * 0.2;
    let mass_err = masses.iter().map(|m| (m - target).abs() / target).fold(0.0, f64::max);
    let g = &solver.disc.grid;
    let annuli = diagnostics::default_annuli(g);
    let slopes: Vec<f64> = sol.u.iter().map(|u| slope_fit(g, u, &annuli).unwrap().slope).collect();
    let slope_err = slopes.iter().map(|s| (s - 0.2).abs() / 0.2).fold(0.0, f64::max);
    let gap = sol.u[0].iter().zip(&sol.u[1]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let kelvin = diagnostics::report(&solver, &sol).map(|r| r.kelvin_roundtrip).unwrap_or(f64::INFINITY);
    let pass = sol.status == Status::Converged && mass_err <= 0.01 && slope_err <= 0.05 && gap <= 10.0 * it.tol;
    (
        Outcome {
            pass,
            detail: format!(
                "{} in {} iterations, N={}, mass err {mass_err:.1e}, slopes {:.4}/{:.4} (err {slope_err:.3}), max|u1-u2| {gap:.1e}",
                sol.status.label(),
                sol.iterations(),
                g.len(),
                slopes[0],
                slopes[1]
            ),
        },
        Some(sol.history_csv()),
        kelvin,
    )
}

fn pohozaev() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = 0.0f64;
    let mut swap_exact = true;
    let mut half = true;
    for _ in 0..20 {
        let a: f64 = rng.gen_range(-0.99..0.99);
        let s = 2.0 * (1.0 - a);
        worst = worst.max(pohozaev_residual(s, s, a, a).residual.abs());
        let (a1, a2): (f64, f64) = (rng.gen_range(-0.99..0.99), rng.gen_range(-0.99..0.99));
        let (s1, s2) = (3.0 * rng.gen::<f64>(), 3.0 * rng.gen::<f64>());
        swap_exact &= pohozaev_residual(s1, s2, a1, a2).residual == pohozaev_residual(s2, s1, a2, a1).residual;
        half &= sigma1_roots(0.0, a1, a2).iter().any(|r| (r - (1.0 - a1)).abs() <= 1e-12);
    }
    Outcome {
        pass: worst <= 1e-12 && swap_exact && half,
        detail: format!("full blow-up residual {worst:.1e}, swap exact {swap_exact}, half blow-up root {half}"),
    }
}

fn kelvin(grid_roundtrip: f64) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let x = [rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0)];
        let y = [rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0)];
        worst = worst.max(two_point_defect(&x, &y));
    }
    // A field on the far chart of the default grid, transformed twice.
    let g = toda_core::discretization::QuadratureGrid::build(2, &[], &GridConfig::default()).unwrap();
    let idx: Vec<usize> = (0..g.len()).filter(|&k| g.charts[k] == Chart::Outer).collect();
    let pts: Vec<Vec<f64>> = idx.iter().map(|&k| g.point(k).to_vec()).collect();
    let vals: Vec<f64> = pts.iter().map(|p| (2.0 / (1.0 + p[0] * p[0] + p[1] * p[1])).ln()).collect();
    let logw: Vec<f64> = idx.iter().map(|&k| g.weights[k].ln()).collect();
    let once = kelvin_transform(&pts, &vals, &logw, 2.0).unwrap();
    let twice = kelvin_transform(&once.points, &once.values, &once.log_weight, 2.0).unwrap();
    let mut inv = 0.0f64;
    for k in 0..pts.len() {
        inv = inv.max((twice.values[k] - vals[k]).abs());
        inv = inv.max((twice.log_weight[k] - logw[k]).abs());
        for d in 0..2 {
            inv = inv.max((twice.points[k][d] - pts[k][d]).abs() / pts[k][d].abs().max(1.0));
        }
    }
    let inv = inv.max(grid_roundtrip);
    Outcome {
        pass: inv <= 1e-10 && worst <= 1e-12,
        detail: format!("involution error {inv:.1e} on {} far nodes, two-point defect {worst:.1e} on 1000 pairs", pts.len()),
    }
}

fn probe_line(r: &ProbeReport) -> String {
    let runs: Vec<String> = r
        .runs
        .iter()
        .map(|x| format!("s={} {} slope err {:.4}", x.scale, x.status.label(), x.slope_error))
        .collect();
    format!("{}: {}", r.verdict.label(), runs.join(", "))
}

fn nonexistence() -> Outcome {
    let it = IterationConfig::default();
    let grid = GridConfig::default();
    let mut ok = true;
    let mut lines = Vec::new();
    for (family, name) in [(Family::Scalar, "scalar"), (Family::Toda, "toda")] {
        for leg in [Leg::Violating, Leg::Sanity] {
            let spec = ProbeSpec {
                family,
                leg,
                ..ProbeSpec::default()
            };
            let want = match leg {
                Leg::Violating => Verdict::ConsistentWithNonexistence,
                Leg::Sanity => Verdict::Converged,
            };
            match nonexistence_probe(&spec, &grid, &it) {
                Ok(r) => {
                    let good = r.verdict == want;
                    ok &= good;
                    lines.push(format!(
                        "{name} {} {} ({})",
                        if leg == Leg::Violating { "violating" } else { "sanity" },
                        if good { "as expected" } else { "NOT as expected" },
                        probe_line(&r)
                    ));
                }
                Err(e) => {
                    ok = false;
                    lines.push(format!("{name}: {e}"));
                }
            }
        }
    }
    Outcome {
        pass: ok,
        detail: lines.join("; "),
    }
}

fn determinism(first: Option<String>) -> Outcome {
    let (_, sol) = equilateral_run();
    let again = sol.history_csv();
    let same = first.as_deref() == Some(again.as_str());
    Outcome {
        pass: same,
        detail: format!(
            "residual history of {} rows {}",
            sol.history.len(),
            if same { "byte-identical" } else { "differs" }
        ),
    }
}

fn main() {
    let mut all = true;
    all &= report(1, secs(1), truth_table);
    all &= report(2, secs(5), equivalence);
    all &= report(3, secs(120), bubble);
    all &= report(4, secs(300), theorem_masses);
    let mut history = None;
    let mut roundtrip = f64::INFINITY;
    all &= report(5, secs(300), || {
        let (o, h, k) = toda_existence_run();
        history = h;
        roundtrip = k;
        o
    });
    all &= report(6, secs(1), pohozaev);
    all &= report(7, secs(1), || kelvin(roundtrip));
    all &= report(8, secs(900), nonexistence);
    all &= report(9, secs(300), || determinism(history));
    if !all {
        std::process::exit(1);
    }
}
