//! One function per suite: checks, report data and convergence tables.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use super::{RunConfig, Suite, SuiteOutput, Table};
use crate::error::Result;
use crate::fit::SlopeFit;
use crate::g2_structures::{
    build_phi_t, codifferential_defect, flat_triple, g2_algebra_basis, hypothesis_check, metric_from_phi, phi0,
    random_g2_element, stabilizer_dimension, star_phi0, theta, torsion_norms, torsion_sweep, TripleWithFlat,
};
use crate::gibbons_hawking::{
    gh_curl_check, limit_coincidence_check, metric_difference_norms, potential_difference_norms, EstimateRegion,
    GHConfig, SlopeReport, Source,
};
use crate::kummer_gluing::{
    admissible_orders, admissible_orders_by_search, blend_check_points, blend_difference_norms, fixed_points, gh_blend,
    moduli_dimensions, z3_pipeline, LatticeTorus, TorusAutomorphism,
};
use crate::report::{Check, Grid2};
use crate::special_kahler::{holonomy_check, kahler_check, ricci_flat_check};
use crate::tensor::{box_grid, form_at};

/// `(ρ, θ)` rectangle used by the special Kähler and limit suites.
fn rho_theta_grid(n: usize) -> Grid2 {
    Grid2 { x: [0.5, 2.0], y: [0.5, 2.6], n }
}

const SLOPE_TARGET: f64 = 4.0;
const MAX_RESIDUAL: f64 = 0.05;
const MAX_DOUBLING_CHANGE: f64 = 0.05;

pub(super) fn dispatch(suite: Suite, cfg: &RunConfig) -> Result<SuiteOutput> {
    match suite {
        Suite::VerifyRicci => plain(ricci_flat_check(
            cfg.weights()?,
            &rho_theta_grid(cfg.grid_or_default(suite)),
            cfg.tol_or_default(suite),
            &cfg.scheme.scheme(),
        )?),
        Suite::VerifyKahler => plain(kahler_check(
            cfg.weights()?,
            &rho_theta_grid(cfg.grid_or_default(suite)),
            cfg.tol_or_default(suite),
            &cfg.scheme.scheme(),
        )?),
        Suite::Holonomy => {
            plain(holonomy_check(cfg.weights()?, cfg.loops, cfg.seed, cfg.ode_tol, cfg.tol_or_default(suite))?)
        }
        Suite::GhCompare => gh_compare(cfg),
        Suite::GhCurl => gh_curl(cfg),
        Suite::GluingScan => gluing_scan(cfg),
        Suite::FixedPoints => fixed_point_suite(cfg),
        Suite::AdmissibleP => admissible(cfg),
        Suite::ModuliDims => moduli(),
        Suite::G2Torsion => g2_torsion(cfg),
        Suite::G2Algebra => g2_algebra(cfg),
    }
}

fn plain(checks: Vec<Check>) -> Result<SuiteOutput> {
    Ok(SuiteOutput { checks, data: Value::Null, table: None })
}

fn gh_compare(cfg: &RunConfig) -> Result<SuiteOutput> {
    let grid = rho_theta_grid(cfg.grid_or_default(Suite::GhCompare));
    let (c, checks) = limit_coincidence_check(cfg.weights()?, &grid, cfg.tol_or_default(Suite::GhCompare))?;
    Ok(SuiteOutput { checks, data: json!({ "c": c }), table: None })
}

fn default_gh(cfg: &RunConfig) -> Result<GHConfig> {
    GHConfig::new(
        vec![Source { x: [-1.0, 0.0, 0.0], m: cfg.l }, Source { x: [1.0, 0.0, 0.0], m: cfg.k }],
        None,
        4.0 * std::f64::consts::PI,
    )
}

fn gh_curl(cfg: &RunConfig) -> Result<SuiteOutput> {
    let gh = match &cfg.gh {
        Some(g) => g.clone(),
        None => default_gh(cfg)?,
    };
    let checks = gh_curl_check(
        &gh,
        cfg.points,
        cfg.grid_or_default(Suite::GhCurl),
        cfg.seed,
        cfg.tol_or_default(Suite::GhCurl),
        &cfg.scheme.scheme(),
    )?;
    Ok(SuiteOutput { checks, data: json!({ "gh": gh }), table: None })
}

fn region(cfg: &RunConfig, suite: Suite) -> EstimateRegion {
    EstimateRegion { n_radial: cfg.grid_or_default(suite), ..EstimateRegion::default() }
}

/// A fitted series for the convergence table.
struct Series {
    name: String,
    norms: Vec<f64>,
    fit: SlopeFit,
}

fn slope_checks(name: &str, fit: &SlopeFit, half_width: f64) -> [Check; 2] {
    [
        Check::near(format!("{name}_slope"), fit.slope, SLOPE_TARGET, half_width),
        Check::le(format!("{name}_fit_residual"), fit.residual, MAX_RESIDUAL),
    ]
}

fn convergence_table(ts: &[f64], series: &[Series]) -> Table {
    let mut header = vec!["t".to_string()];
    for s in series {
        header.extend(["norm", "slope", "residual"].map(|c| format!("{}_{c}", s.name)));
    }
    let rows = ts
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let mut row = vec![*t];
            for s in series {
                row.extend([s.norms[i], s.fit.slope, s.fit.residual]);
            }
            row
        })
        .collect();
    Table { header, rows }
}

fn gluing_scan(cfg: &RunConfig) -> Result<SuiteOutput> {
    let suite = Suite::GluingScan;
    let tol = cfg.tol_or_default(suite);
    let scheme = cfg.scheme.scheme();
    let region = region(cfg, suite);
    let fine = region.doubled();
    type Sweep<'a> = Box<dyn Fn(&EstimateRegion, usize) -> Result<SlopeReport> + 'a>;
    let quantities: [(&str, Sweep); 3] = [
        ("potential", Box::new(|r, o| potential_difference_norms(&cfg.t, r, o, cfg.eps_split, &scheme))),
        ("metric", Box::new(|r, o| metric_difference_norms(&cfg.t, r, o, cfg.eps_split, &scheme))),
        (
            "blended_triple",
            Box::new(|r, o| blend_difference_norms(&cfg.t, r, &cfg.schedule, o, cfg.eps_split, &scheme)),
        ),
    ];
    let mut checks = Vec::new();
    let mut series = Vec::new();
    let mut doubled = serde_json::Map::new();
    for (name, sweep) in &quantities {
        for order in 0..3 {
            let label = format!("{name}_d{order}");
            let rep = sweep(&region, order)?;
            checks.extend(slope_checks(&label, &rep.fit, tol));
            if cfg.doubling {
                let rep2 = sweep(&fine, order)?;
                checks.push(Check::le(
                    format!("{label}_doubled_grid_slope_change"),
                    (rep2.fit.slope - rep.fit.slope).abs(),
                    MAX_DOUBLING_CHANGE,
                ));
                doubled.insert(label.clone(), serde_json::to_value(rep2.fit).expect("fit serializes"));
            }
            series.push(Series { name: label, norms: rep.rows.iter().map(|r| r.norm).collect(), fit: rep.fit });
        }
    }
    let table = convergence_table(&cfg.t, &series);
    Ok(SuiteOutput { checks, data: json!({ "doubled_grid_fits": doubled }), table: Some(table) })
}

fn fixed_point_suite(cfg: &RunConfig) -> Result<SuiteOutput> {
    let sigma = fixed_points(&TorusAutomorphism::involution(), &LatticeTorus::square())?.len();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let gamma = TorusAutomorphism::gamma();
    let counts: Vec<usize> = (0..cfg.lattices)
        .map(|_| fixed_points(&gamma, &LatticeTorus::random_z3(&mut rng)).map(|p| p.len()))
        .collect::<Result<_>>()?;
    let ledger = z3_pipeline(9)?;
    let checks = vec![
        Check::count("sigma_fixed_points_square_torus", sigma, 16),
        Check::count("gamma_fixed_points_min", counts.iter().copied().min().unwrap_or(0), 9),
        Check::count("gamma_fixed_points_max", counts.iter().copied().max().unwrap_or(0), 9),
        Check::count("z3_ledger_stages", ledger.steps(), 2),
        Check::count("z3_ledger_final_singularities", ledger.singular_count(ledger.steps()), 0),
    ];
    Ok(SuiteOutput { checks, data: json!({ "gamma_counts": counts, "ledger": ledger.entries() }), table: None })
}

fn admissible(cfg: &RunConfig) -> Result<SuiteOutput> {
    let orders = admissible_orders(cfg.max);
    let searched = admissible_orders_by_search(cfg.max, 3);
    let expected: Vec<u32> = [3, 4, 6].into_iter().filter(|p| *p <= cfg.max).collect();
    let got: Vec<u32> = orders.iter().copied().collect();
    let checks = vec![
        Check::flag("orders_match_matrix_search", orders == searched),
        Check::flag(
            format!("orders_equal_{}", expected.iter().map(u32::to_string).collect::<Vec<_>>().join("_")),
            got == expected,
        ),
    ];
    Ok(SuiteOutput { checks, data: json!({ "max": cfg.max, "orders": got }), table: None })
}

fn moduli() -> Result<SuiteOutput> {
    let routes = moduli_dimensions(16, 9);
    let ledger = z3_pipeline(9)?;
    let mut checks: Vec<Check> =
        routes.iter().map(|r| Check::count(format!("total_{}", r.route), r.total, 58)).collect();
    checks.push(Check::count("dim_S3", routes[1].base, 4));
    checks.push(Check::count("z3_ledger_stages", ledger.steps(), 2));
    Ok(SuiteOutput { checks, data: json!({ "routes": routes, "ledger": ledger.entries() }), table: None })
}

fn g2_torsion(cfg: &RunConfig) -> Result<SuiteOutput> {
    let suite = Suite::G2Torsion;
    let tol = cfg.tol_or_default(suite);
    let region = region(cfg, suite);
    let scheme = cfg.scheme.scheme();
    let hyp = hypothesis_check(&cfg.t, cfg.eps_split, &region, &scheme)?;
    let rep = torsion_sweep(&cfg.t, &cfg.schedule, &region, cfg.eps_split)?.with_hypotheses(&hyp);
    let mut checks = Vec::new();
    checks.extend(slope_checks("torsion_sup", &rep.slope, tol));
    checks.extend(slope_checks("torsion_l2", &rep.l2_slope, tol));
    let mut doubled = Value::Null;
    if cfg.doubling {
        let fine = torsion_sweep(&cfg.t, &cfg.schedule, &region.doubled(), cfg.eps_split)?;
        checks.push(Check::le(
            "torsion_sup_doubled_grid_slope_change",
            (fine.slope.slope - rep.slope.slope).abs(),
            MAX_DOUBLING_CHANGE,
        ));
        doubled = serde_json::to_value(fine.slope).expect("fit serializes");
    }

    let flat = flat_triple();
    let flat_norms = torsion_norms(&flat, &box_grid(&[-1.0; 7], &[1.0; 7], 2))?;
    checks.push(Check::le("flat_triple_torsion_sup", flat_norms.sup, 1e-10));
    checks.push(Check::le("flat_triple_torsion_l2", flat_norms.l2, 1e-10));

    let blended = TripleWithFlat::from_gh_order(gh_blend(cfg.t[0], cfg.eps_split, &cfg.schedule)?);
    let (mut defect, mut size) = (0.0f64, 0.0f64);
    for p in blend_check_points(&cfg.schedule) {
        let (d, s) = codifferential_defect(&blended, &[p[0], p[1], p[2], p[3], 0.0, 0.0, 0.0], &scheme)?;
        defect = defect.max(d);
        size = size.max(s);
    }
    checks.push(Check::le("codifferential_defect", defect, 1e-7));
    checks.push(Check::gt("codifferential_d_star_phi", size, 1e-6));

    let spread_tol = 0.1;
    checks.push(Check::le("hypothesis_curvature_t2_spread", hyp.curvature_spread, spread_tol));
    checks.push(Check::le("hypothesis_volume_spread", hyp.volume_spread, spread_tol));
    checks.push(Check::le("hypothesis_diameter_spread", hyp.diameter_spread, spread_tol));

    let series = [
        Series { name: "sup".into(), norms: rep.rows.iter().map(|r| r.sup_norm).collect(), fit: rep.slope },
        Series { name: "l2".into(), norms: rep.rows.iter().map(|r| r.l2_norm).collect(), fit: rep.l2_slope },
    ];
    let table = convergence_table(&cfg.t, &series);
    let data = json!({
        "torsion": rep,
        "hypotheses": hyp,
        "doubled_grid_sup_fit": doubled,
        "codifferential_t": cfg.t[0],
    });
    Ok(SuiteOutput { checks, data, table: Some(table) })
}

fn g2_algebra(cfg: &RunConfig) -> Result<SuiteOutput> {
    let tol = cfg.tol_or_default(Suite::G2Algebra);
    let id = DMatrix::<f64>::identity(7, 7);
    let g = metric_from_phi(&phi0())?;
    let theta0 = theta(&phi0())?;
    let wedge = phi0().wedge(&star_phi0()).coeffs[0];

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (mut orth, mut fixed, mut equiv) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..5 {
        let a = random_g2_element(&mut rng, 0.7);
        orth = orth.max((a.transpose() * &a - &id).amax());
        fixed = fixed.max(phi0().pullback(&a).sub(&phi0()).max_abs());
        let mut phi = phi0();
        phi.coeffs.iter_mut().for_each(|c| *c += rng.random_range(-0.05..=0.05));
        equiv = equiv.max(theta(&phi.pullback(&a))?.sub(&theta(&phi)?.pullback(&a)).max_abs());
    }

    let flat = flat_triple();
    let (phi_t, v_t) = build_phi_t(&flat);
    let x = [0.1, -0.4, 2.0, 0.3, 0.5, 0.6, 0.7];
    let flat_pair = form_at(&phi_t, &x)?.sub(&phi0()).max_abs().max(form_at(&v_t, &x)?.sub(&star_phi0()).max_abs());

    let checks = vec![
        Check::le("metric_from_phi0_minus_identity", (g - &id).amax(), tol),
        Check::le("theta_phi0_minus_star_phi0", theta0.sub(&star_phi0()).max_abs(), 0.0),
        Check::near("phi0_wedge_star_phi0_over_vol", wedge, 7.0, 0.0),
        Check::count("stabilizer_dimension", stabilizer_dimension(), 14),
        Check::count("g2_basis_size", g2_algebra_basis().len(), 14),
        Check::le("g2_sample_orthogonality", orth, 1e-10),
        Check::le("g2_sample_fixes_phi0", fixed, 1e-10),
        Check::le("theta_equivariance", equiv, 1e-10),
        Check::le("flat_triple_gives_standard_pair", flat_pair, 0.0),
    ];
    Ok(SuiteOutput { checks, data: Value::Null, table: None })
}
