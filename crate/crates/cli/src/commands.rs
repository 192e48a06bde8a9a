//! Subcommand implementations. Each one turns resolved [`Params`] into a JSON
//! summary plus a set of named output files.

use std::f64::consts::PI;

use anyhow::Result;
use obstacle_lab::blowdown::{richardson_limit, ALPHA_1_VERSION};
use obstacle_lab::functionals::{acf_sector_triple, SectorMode};
use obstacle_lab::geometry::fmt17;
use obstacle_lab::potential::{truncation_error_bound, ParaboloidDeviation, ParaboloidSolution};
use obstacle_lab::solver::hausdorff_nodes;
use obstacle_lab::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::params::{invalid, key, Key, Params};

pub const SCHEMA_VERSION: u32 = 1;

pub struct Outcome {
    pub summary: Value,
    /// `(file name, contents)` in write order.
    pub files: Vec<(String, String)>,
}

pub struct Command {
    pub name: &'static str,
    pub about: &'static str,
    pub keys: &'static [Key],
    pub run: fn(&Params) -> Result<Outcome>,
}

const OUT: Key = key("out", "out", "output directory");

macro_rules! sampler_keys {
    ($($extra:expr),* $(,)?) => {
        &[
            key("sampler", "vhat", "vhat | thin | paraboloid | harmonic"),
            key("gamma", "1", "paraboloid opening"),
            key("sigma", "0", "paraboloid shift"),
            key("abs_tol", "1e-8", "potential quadrature tolerance"),
            key("thin_kind", "re_half_integer", "even_polynomial | re_half_integer | im_odd"),
            key("thin_m", "1", "thin profile index m"),
            key("thin_scale", "1", "thin profile scale"),
            key("harmonic_degree", "2", "degree k of Re (x1 + i x2)^k"),
            key("n_angular", "1024", "nodes on the circle"),
            key("n_radial", "128", "Gauss-Legendre layers in the radius"),
            OUT,
            $($extra),*
        ]
    };
}

pub const COMMANDS: &[Command] = &[
    Command {
        name: "potential",
        about: "Tabulate V and u for a paraboloid on a grid and fit the growth exponent of |V|",
        keys: &[
            key("gamma", "1", "paraboloid opening"),
            key("sigma", "0", "paraboloid shift"),
            key("abs_tol", "1e-8", "potential quadrature tolerance"),
            key("xmin", "-2", "grid box"),
            key("xmax", "2", "grid box"),
            key("ymin", "-2", "grid box"),
            key("ymax", "2", "grid box"),
            key("h", "0.5", "grid spacing"),
            key("growth_direction", "0,-1", "unit direction of the growth ray"),
            key("growth_r_lo", "10", "inner radius of the growth fit"),
            key("growth_r_hi", "1000", "outer radius of the growth fit"),
            key("growth_n", "12", "samples in the growth fit (0 disables)"),
            OUT,
        ],
        run: potential,
    },
    Command {
        name: "solve",
        about: "Projected SOR solve of the obstacle problem with paraboloid or half-space boundary data",
        keys: &[
            key("boundary", "paraboloid", "paraboloid | halfspace"),
            key("gamma", "1", "paraboloid opening"),
            key("sigma", "0", "paraboloid shift"),
            key("abs_tol", "1e-8", "potential quadrature tolerance"),
            key("xmin", "-6", "grid box"),
            key("xmax", "6", "grid box"),
            key("ymin", "-2", "grid box"),
            key("ymax", "10", "grid box"),
            key("h", "0.05", "grid spacing"),
            key("omega", "auto", "relaxation factor in (0, 2), or auto"),
            key("tol", "1e-6", "complementarity residual target"),
            key("max_iter", "200000", "sweep limit"),
            key("u_zero_tol", "0.5", "coincidence threshold in units of h^2"),
            key("check_every", "25", "sweeps between residual checks"),
            key("delta", "0.5", "exponent slack of the coincidence growth check"),
            key("r2", "1", "height above which the growth check applies"),
            key("compare_exact", "false", "compare with the closed-form solution at every node"),
            key("write_field", "true", "write u.csv and mask.csv"),
            OUT,
        ],
        run: solve,
    },
    Command {
        name: "frequency",
        about: "Almgren frequency profile",
        keys: sampler_keys!(key("radii", "0.25,0.5,1,2", "radii")),
        run: frequency,
    },
    Command {
        name: "doubling",
        about: "Doubling ratio H(2r)/H(r)",
        keys: sampler_keys!(key("radii", "0.5,1,2", "radii")),
        run: doubling,
    },
    Command {
        name: "matching",
        about: "Matching functional r^{-3/2} <w(r.), v̂>",
        keys: sampler_keys!(key("radii", "2,4,8", "radii")),
        run: matching,
    },
    Command {
        name: "blowdown",
        about: "Blow-down coefficients and residuals at a list of radii",
        keys: sampler_keys!(key("radii", "10,20,40", "radii")),
        run: blowdown,
    },
    Command {
        name: "acf",
        about: "Three-phase ACF functional on sector eigenfunction triples",
        keys: &[
            key("fixture", "equal_thirds", "equal_thirds | random"),
            key("beta", "9", "scaling exponent"),
            key("radii", "0.1,0.25,0.5,0.75,1", "radii"),
            key("triples", "10", "number of random triples"),
            key("seed", "0", "seed for random triples"),
            key("max_m", "3", "largest sector mode index"),
            key("min_width", "0.5", "smallest sector width"),
            key("n_angular", "1024", "nodes on the circle"),
            key("n_radial", "64", "Gauss-Legendre layers in the radius"),
            OUT,
        ],
        run: acf,
    },
    Command {
        name: "match",
        about: "Blow-down coefficient of u_{γP} - p and the matched opening γ",
        keys: &[
            key("gamma", "2", "opening of the paraboloid being matched"),
            key("sigma", "0", "paraboloid shift"),
            key("abs_tol", "1e-8", "potential quadrature tolerance"),
            key("radii", "50,100,200", "radii for the extrapolation"),
            key("n_angular", "1024", "nodes on the circle"),
            OUT,
        ],
        run: match_gamma,
    },
    Command {
        name: "regions",
        about: "Sign regions of u - u_σ and the sliding ACF functional",
        keys: &[
            key("gamma", "1", "opening of u"),
            key("sigma", "0", "shift of u"),
            key("gamma_shift", "2", "opening of u_σ"),
            key("sigma_shift", "0.25", "shift of u_σ"),
            key("abs_tol", "1e-9", "potential quadrature tolerance"),
            key("xmin", "-8", "grid box"),
            key("xmax", "8", "grid box"),
            key("ymin", "-2", "grid box"),
            key("ymax", "14", "grid box"),
            key("h", "0.05", "grid spacing"),
            key("min_size", "8", "smallest retained interior component"),
            key("u_zero_tol", "0.5", "dead band in units of h^2"),
            key("tip_rows", "-0.05,0,0.05,0.1,0.15,0.2", "heights where sign changes are counted"),
            key("radii", "", "radii for the sliding functional (empty skips it)"),
            key("n_angular", "256", "nodes on the circle"),
            key("n_radial", "32", "Gauss-Legendre layers in the radius"),
            OUT,
        ],
        run: regions,
    },
];

pub fn find(name: &str) -> Option<&'static Command> {
    COMMANDS.iter().find(|c| c.name == name)
}

fn schema(cmd: &str) -> String {
    format!("obstacle-lab/{cmd}/v{SCHEMA_VERSION}")
}

fn csv(header: &str, rows: impl IntoIterator<Item = Vec<f64>>) -> String {
    let mut s = String::from(header);
    s.push('\n');
    for row in rows {
        let cells: Vec<String> = row.into_iter().map(fmt17).collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    s
}

fn field_csv(f: &ScalarField) -> Result<String> {
    let mut buf = Vec::new();
    f.write_csv(&mut buf)?;
    Ok(String::from_utf8(buf)?)
}

fn functional_config(p: &Params) -> Result<FunctionalConfig> {
    let n_angular = p.usize("n_angular")?;
    let n_radial = p.usize("n_radial")?;
    if n_angular < 64 {
        return Err(invalid("n_angular", "must be >= 64").into());
    }
    if n_radial < 2 {
        return Err(invalid("n_radial", "must be >= 2").into());
    }
    Ok(FunctionalConfig::new(n_angular, n_radial)?)
}

fn potential_config(p: &Params) -> Result<PotentialConfig> {
    let abs_tol = p.positive("abs_tol")?;
    let cfg = PotentialConfig::with_abs_tol(abs_tol);
    cfg.validate().map_err(|e| invalid("abs_tol", e.to_string()))?;
    Ok(cfg)
}

fn paraboloid(p: &Params, gamma: &str, sigma: &str) -> Result<Paraboloid> {
    let g = p.positive(gamma)?;
    let s = p.f64(sigma)?;
    Ok(Paraboloid::new(g, s)?)
}

fn grid(p: &Params) -> Result<Grid2> {
    let h = p.positive("h")?;
    let (xmin, xmax, ymin, ymax) = (p.f64("xmin")?, p.f64("xmax")?, p.f64("ymin")?, p.f64("ymax")?);
    if xmax <= xmin {
        return Err(invalid("xmax", "must exceed xmin").into());
    }
    if ymax <= ymin {
        return Err(invalid("ymax", "must exceed ymin").into());
    }
    Grid2::snapped(xmin, xmax, ymin, ymax, h).map_err(|e| invalid("h", e.to_string()).into())
}

fn sampler(p: &Params) -> Result<(Box<dyn FieldSampler>, Value)> {
    let kind = p.str("sampler");
    Ok(match kind.as_str() {
        "vhat" => (Box::new(VHat), json!({"kind": "vhat"})),
        "thin" => {
            let tk: ThinKind = serde_json::from_value(Value::String(p.str("thin_kind")))
                .map_err(|_| invalid("thin_kind", format!("unknown kind {:?}", p.str("thin_kind"))))?;
            let m = p.usize("thin_m")?;
            if m == 0 || m > 64 {
                return Err(invalid("thin_m", "must lie in 1..=64").into());
            }
            let prof = ThinProfile::new(tk, m as u32, p.f64("thin_scale")?)?;
            (Box::new(prof), json!({"kind": "thin", "profile": prof, "kappa": prof.kappa()}))
        }
        "paraboloid" => {
            let par = paraboloid(p, "gamma", "sigma")?;
            let w = ParaboloidDeviation::new(par, potential_config(p)?);
            (Box::new(w), json!({"kind": "paraboloid", "gamma": par.gamma(), "sigma": par.sigma()}))
        }
        "harmonic" => {
            let k = p.usize("harmonic_degree")?;
            if !(1..=64).contains(&k) || k % 2 == 1 {
                return Err(invalid("harmonic_degree", "must be even and in 2..=64").into());
            }
            let prof = ThinProfile::new(ThinKind::EvenPolynomial, (k / 2) as u32, 1.0)?;
            (Box::new(prof), json!({"kind": "harmonic", "degree": k}))
        }
        other => return Err(invalid("sampler", format!("unknown sampler {other:?}")).into()),
    })
}

fn potential(p: &Params) -> Result<Outcome> {
    let par = paraboloid(p, "gamma", "sigma")?;
    let cfg = potential_config(p)?;
    let g = grid(p)?;
    let mut rows = Vec::with_capacity(g.len());
    let mut worst_bound = 0.0f64;
    for k in 0..g.len() {
        let x = g.node_at(k);
        let (v, dv) = potential_with_gradient(&par, x, &cfg);
        let u = u_paraboloid(&par, x, &cfg);
        worst_bound = worst_bound.max(truncation_error_bound(&par, x, &cfg));
        rows.push(vec![x.x1, x.x2, v, dv[0], dv[1], u]);
    }
    let n = p.usize("growth_n")?;
    let slope = if n == 0 {
        Value::Null
    } else {
        let d = p.list("growth_direction")?;
        if d.len() != 2 {
            return Err(invalid("growth_direction", "needs two components").into());
        }
        let s = growth_exponent_fit(&par, [d[0], d[1]], p.f64("growth_r_lo")?, p.f64("growth_r_hi")?, n, &cfg)
            .map_err(|e| match e {
                LabError::Precondition(m) => anyhow::Error::from(invalid("growth_direction", m)),
                other => other.into(),
            })?;
        json!(s)
    };
    Ok(Outcome {
        summary: json!({
            "schema": schema("potential"),
            "gamma": par.gamma(),
            "sigma": par.sigma(),
            "abs_tol": cfg.abs_tol,
            "nodes": g.len(),
            "max_truncation_bound": worst_bound,
            "growth_slope": slope,
        }),
        files: vec![("potential.csv".into(), csv("x1,x2,v,dv1,dv2,u", rows))],
    })
}

fn solve(p: &Params) -> Result<Outcome> {
    let g = grid(p)?;
    let omega = match p.raw("omega") {
        "auto" => SolverConfig::optimal_omega(&g),
        _ => p.f64("omega")?,
    };
    let cfg = SolverConfig {
        omega,
        tol: p.positive("tol")?,
        max_iter: p.usize("max_iter")?,
        u_zero_tol: p.positive("u_zero_tol")?,
        check_every: p.usize("check_every")?,
    };
    cfg.validate().map_err(|e| {
        let field = ["omega", "tol", "max_iter", "check_every", "u_zero_tol"]
            .into_iter()
            .find(|f| e.to_string().contains(f))
            .unwrap_or("solver");
        invalid(field, e.to_string())
    })?;
    let delta = p.f64("delta")?;
    if !(delta > 0.0 && delta < 1.0) {
        return Err(invalid("delta", "must lie in (0, 1)").into());
    }
    let r2 = p.positive("r2")?;
    let par = paraboloid(p, "gamma", "sigma")?;
    let pcfg = potential_config(p)?;
    let exact: Box<dyn FieldSampler> = match p.raw("boundary") {
        "paraboloid" => Box::new(ParaboloidSolution::new(par, pcfg)),
        "halfspace" => Box::new(FnSampler(|x: Point2| 0.5 * x.x1.max(0.0).powi(2))),
        other => return Err(invalid("boundary", format!("unknown boundary data {other:?}")).into()),
    };
    let (u, rep) = solve_obstacle(g, exact.as_ref(), &cfg)?;
    let growth = coincidence_growth_check(&rep.mask, delta, r2)?;
    let mut summary = json!({
        "schema": schema("solve"),
        "boundary": p.raw("boundary"),
        "grid": g,
        "omega": omega,
        "report": rep,
        "residual_monotone": rep.residual_monotone(),
        "growth_check": {"delta": delta, "r2": r2, "passed": growth},
    });
    if p.raw("boundary") == "paraboloid" {
        let inside: Vec<bool> = (0..g.len()).map(|k| par.contains(g.node_at(k))).collect();
        summary["hausdorff_to_paraboloid"] = json!(hausdorff_nodes(&g, rep.mask.flags(), &inside)?);
    }
    if p.bool("compare_exact")? {
        let ex = ScalarField::from_sampler(g, exact.as_ref())?;
        let mut err = 0.0f64;
        for j in 1..g.ny - 1 {
            for i in 1..g.nx - 1 {
                err = err.max((u.get(i, j) - ex.get(i, j)).abs());
            }
        }
        let h = g.h();
        summary["max_error_vs_exact"] = json!(err);
        summary["error_bound"] = json!(5.0 * h * h + 1e-7);
    }
    let mut files = vec![(
        "residual.csv".to_string(),
        csv("iteration,residual", rep.checkpoints.iter().map(|(i, r)| vec![*i as f64, *r])),
    )];
    if p.bool("write_field")? {
        files.push(("u.csv".into(), field_csv(&u)?));
        files.push(("mask.csv".into(), field_csv(&rep.mask.to_field())?));
    }
    Ok(Outcome { summary, files })
}

fn profile_outcome(
    cmd: &str,
    p: &Params,
    f: impl Fn(&dyn FieldSampler, f64, &FunctionalConfig) -> obstacle_lab::Result<f64>,
) -> Result<Outcome> {
    let (w, desc) = sampler(p)?;
    let cfg = functional_config(p)?;
    let radii = p.radii("radii")?;
    let values: obstacle_lab::Result<Vec<f64>> = radii.iter().map(|&r| f(w.as_ref(), r, &cfg)).collect();
    let prof = RadialProfile::new(radii, values?)?;
    let mut buf = Vec::new();
    prof.write_csv(&mut buf)?;
    let vals = prof.values();
    Ok(Outcome {
        summary: json!({
            "schema": schema(cmd),
            "sampler": desc,
            "n_angular": cfg.n_angular,
            "n_radial": cfg.n_radial,
            "radii": prof.radii(),
            "values": vals,
            "min": vals.iter().cloned().fold(f64::INFINITY, f64::min),
            "max": vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
            "max_drop": if vals.len() > 1 { json!(prof.max_drop()) } else { Value::Null },
        }),
        files: vec![(format!("{cmd}.csv"), String::from_utf8(buf)?)],
    })
}

fn frequency(p: &Params) -> Result<Outcome> {
    profile_outcome("frequency", p, |w, r, c| almgren(w, r, c))
}

fn doubling(p: &Params) -> Result<Outcome> {
    profile_outcome("doubling", p, |w, r, c| doubling_ratio(w, r, c))
}

fn matching(p: &Params) -> Result<Outcome> {
    profile_outcome("matching", p, |w, r, c| matching_functional(w, r, c))
}

fn blowdown(p: &Params) -> Result<Outcome> {
    let (w, desc) = sampler(p)?;
    let cfg = functional_config(p)?;
    let radii = p.radii("radii")?;
    let rep = blowdown_report(w.as_ref(), &radii, &cfg)?;
    let alphas: Vec<f64> = rep.rows.iter().map(|r| r.estimate.alpha).collect();
    let extrapolated = if radii.len() >= 2 { json!(richardson_limit(&radii, &alphas)?) } else { Value::Null };
    let rows =
        rep.rows.iter().map(|r| vec![r.estimate.r, r.estimate.alpha, r.estimate.residual, r.normalized_residual]);
    Ok(Outcome {
        summary: json!({
            "schema": schema("blowdown"),
            "sampler": desc,
            "report": rep,
            "alpha_extrapolated": extrapolated,
        }),
        files: vec![("blowdown.csv".into(), csv("r,alpha,residual,normalized_residual", rows))],
    })
}

fn random_triple(rng: &mut ChaCha8Rng, min_width: f64, max_m: u32) -> Result<[SectorMode; 3]> {
    loop {
        let mut cuts = [rng.gen_range(0.0..2.0 * PI), rng.gen_range(0.0..2.0 * PI)];
        cuts.sort_by(f64::total_cmp);
        let widths = [cuts[0], cuts[1] - cuts[0], 2.0 * PI - cuts[1]];
        if widths.iter().any(|w| *w < min_width) {
            continue;
        }
        let mut a = rng.gen_range(0.0..2.0 * PI);
        let mut modes = Vec::with_capacity(3);
        for w in widths {
            modes.push(SectorMode::new(a, w, rng.gen_range(1..=max_m))?);
            a += w;
        }
        return Ok([modes[0], modes[1], modes[2]]);
    }
}

fn acf(p: &Params) -> Result<Outcome> {
    let cfg = functional_config(p)?;
    let beta = p.f64("beta")?;
    let radii = p.radii("radii")?;
    let triples: Vec<[SectorMode; 3]> = match p.raw("fixture") {
        "equal_thirds" => {
            let a = 2.0 * PI / 3.0;
            vec![[SectorMode::new(0.0, a, 1)?, SectorMode::new(a, a, 1)?, SectorMode::new(2.0 * a, a, 1)?]]
        }
        "random" => {
            let n = p.usize("triples")?;
            let max_m = p.usize("max_m")?;
            if !(1..=16).contains(&max_m) {
                return Err(invalid("max_m", "must lie in 1..=16").into());
            }
            let min_width = p.f64("min_width")?;
            if !(min_width > 0.0 && min_width < 2.0 * PI / 3.0) {
                return Err(invalid("min_width", "must lie in (0, 2π/3)").into());
            }
            let mut rng = ChaCha8Rng::seed_from_u64(p.u64("seed")?);
            (0..n).map(|_| random_triple(&mut rng, min_width, max_m as u32)).collect::<Result<_>>()?
        }
        other => return Err(invalid("fixture", format!("unknown fixture {other:?}")).into()),
    };
    let mut rows = Vec::new();
    let mut per_triple = Vec::new();
    let mut worst = f64::NEG_INFINITY;
    for (t, modes) in triples.iter().enumerate() {
        let values: obstacle_lab::Result<Vec<f64>> =
            radii.iter().map(|&r| acf_sector_triple(modes, r, beta, &cfg)).collect();
        let prof = RadialProfile::new(radii.clone(), values?)?;
        for (r, v) in prof.radii().iter().zip(prof.values()) {
            rows.push(vec![t as f64, *r, *v]);
        }
        let drop = if prof.len() > 1 { prof.max_relative_drop() } else { f64::NEG_INFINITY };
        worst = worst.max(drop);
        per_triple.push(json!({
            "modes": modes,
            "exponent": 2.0 * modes.iter().map(|m| m.lambda).sum::<f64>() - beta,
            "values": prof.values(),
            "max_relative_drop": if drop.is_finite() { json!(drop) } else { Value::Null },
        }));
    }
    Ok(Outcome {
        summary: json!({
            "schema": schema("acf"),
            "fixture": p.raw("fixture"),
            "beta": beta,
            "radii": radii,
            "triples": per_triple,
            "max_relative_drop": if worst.is_finite() { json!(worst) } else { Value::Null },
        }),
        files: vec![("acf.csv".into(), csv("triple,r,value", rows))],
    })
}

fn match_gamma(p: &Params) -> Result<Outcome> {
    let par = paraboloid(p, "gamma", "sigma")?;
    let pcfg = potential_config(p)?;
    let n_angular = p.usize("n_angular")?;
    if n_angular < 64 {
        return Err(invalid("n_angular", "must be >= 64").into());
    }
    let cfg = FunctionalConfig::new(n_angular, 2)?;
    let radii = p.radii("radii")?;
    if radii.len() < 2 {
        return Err(invalid("radii", "extrapolation needs at least two radii").into());
    }
    let w = ParaboloidDeviation::new(par, pcfg);
    let est: obstacle_lab::Result<Vec<BlowdownEstimate>> = radii.iter().map(|&r| alpha_estimate(&w, r, &cfg)).collect();
    let est = est?;
    let alphas: Vec<f64> = est.iter().map(|e| e.alpha).collect();
    let alpha_u = richardson_limit(&radii, &alphas)?;
    let gamma = gamma_match(alpha_u, ALPHA_1)?;
    Ok(Outcome {
        summary: json!({
            "schema": schema("match"),
            "alpha_u": alpha_u,
            "alpha_1": ALPHA_1,
            "alpha_1_version": ALPHA_1_VERSION,
            "gamma": gamma,
            "gamma_true": par.gamma(),
            "relative_error": (gamma - par.gamma()).abs() / par.gamma(),
            "estimates": est,
        }),
        files: vec![("match.csv".into(), csv("r,alpha,residual", est.iter().map(|e| vec![e.r, e.alpha, e.residual])))],
    })
}

fn regions(p: &Params) -> Result<Outcome> {
    let g = grid(p)?;
    let pcfg = potential_config(p)?;
    let a = ParaboloidSolution::new(paraboloid(p, "gamma", "sigma")?, pcfg);
    let b = ParaboloidSolution::new(paraboloid(p, "gamma_shift", "sigma_shift")?, pcfg);
    let min_size = p.usize("min_size")?;
    if min_size == 0 {
        return Err(invalid("min_size", "must be >= 1").into());
    }
    let uf = ScalarField::from_sampler(g, &a)?;
    let bf = ScalarField::from_sampler(g, &b)?;
    let reg = obstacle_lab::blowdown::region_decomposition_with(&uf, &bf, min_size, p.positive("u_zero_tol")?)?;
    let tip: Vec<Value> = p
        .list("tip_rows")?
        .into_iter()
        .map(|y| json!({"x2": y, "sign_changes": reg.sign_changes_along_row(y)}))
        .collect();
    let labels = ScalarField::new(g, reg.labels.iter().map(|l| *l as f64).collect())?;
    let mut files = vec![("labels.csv".to_string(), field_csv(&labels)?)];
    let mut summary = json!({
        "schema": schema("regions"),
        "grid": g,
        "k": reg.k,
        "signs": reg.signs,
        "sizes": reg.sizes,
        "tip_rows": tip,
    });
    let radii = p.list("radii")?;
    if !radii.is_empty() {
        let radii = p.radii("radii")?;
        if reg.k != 3 {
            return Err(LabError::Degenerate(format!("sliding functional needs 3 regions, found {}", reg.k)).into());
        }
        let cfg = functional_config(p)?;
        let values: obstacle_lab::Result<Vec<f64>> =
            radii.iter().map(|&r| sliding_phi(&a, &b, &reg, r, &cfg)).collect();
        let prof = RadialProfile::new(radii, values?)?;
        let mut buf = Vec::new();
        prof.write_csv(&mut buf)?;
        files.push(("sliding.csv".into(), String::from_utf8(buf)?));
        summary["sliding"] = json!({
            "radii": prof.radii(),
            "values": prof.values(),
            "max_relative_drop": if prof.len() > 1 { json!(prof.max_relative_drop()) } else { Value::Null },
        });
    }
    Ok(Outcome { summary, files })
}
