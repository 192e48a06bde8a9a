//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any fails.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use obstacle_lab::blowdown::{richardson_limit, ALPHA_1_RADII};
use obstacle_lab::functionals::{acf_sector_triple, radial_profile, SectorMode};
use obstacle_lab::potential::{ParaboloidDeviation, ParaboloidSolution};
use obstacle_lab::solver::hausdorff_nodes;
use obstacle_lab::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = anyhow::Result<(bool, String)>;

fn p1() -> Paraboloid {
    Paraboloid::new(1.0, 0.0).unwrap()
}

fn deviation(gamma: f64) -> ParaboloidDeviation {
    ParaboloidDeviation::new(Paraboloid::new(gamma, 0.0).unwrap(), PotentialConfig::default())
}

/// State shared between criteria: the frequency profile of u - p and the
/// γ = 1 solver run.
#[derive(Default)]
struct Shared {
    phi: Option<RadialProfile>,
    solve: Option<(ScalarField, SolverReport)>,
}

impl Shared {
    fn phi(&mut self) -> anyhow::Result<&RadialProfile> {
        if self.phi.is_none() {
            let radii = [1.0, 2.0, 4.0, 6.0, 8.0, 10.0, 15.0, 20.0, 25.0, 30.0, 35.0, 40.0];
            let cfg = FunctionalConfig::new(256, 32)?;
            self.phi = Some(almgren_profile(&deviation(1.0), &radii, &cfg)?);
        }
        Ok(self.phi.as_ref().unwrap())
    }

    fn solve(&mut self) -> anyhow::Result<&(ScalarField, SolverReport)> {
        if self.solve.is_none() {
            let g = Grid2::snapped(-6.0, 6.0, -2.0, 10.0, 0.05)?;
            let exact = ParaboloidSolution::new(p1(), PotentialConfig::default());
            let cfg = SolverConfig { omega: SolverConfig::optimal_omega(&g), ..SolverConfig::default() };
            self.solve = Some(solve_obstacle(g, &exact, &cfg)?);
        }
        Ok(self.solve.as_ref().unwrap())
    }
}

fn c1_frequency_constancy(_: &mut Shared) -> Check {
    let cfg = FunctionalConfig::new(2048, 128)?;
    let mut worst = 0.0f64;
    for r in [0.25, 0.5, 1.0, 2.0] {
        worst = worst.max((almgren(&VHat, r, &cfg)? - 1.5).abs());
    }
    Ok((worst <= 1e-3, format!("max |φ(v̂) - 1.5| = {worst:.3e}")))
}

fn c2_frequency_bound(s: &mut Shared) -> Check {
    let prof = s.phi()?;
    let max = prof.values().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok((max <= 2.05, format!("max φ(u - p) over r in [1, 40] = {max:.5}")))
}

fn c3_frequency_limit(s: &mut Shared) -> Check {
    let prof = s.phi()?;
    let at = |r: f64| prof.radii().iter().position(|x| *x == r).map(|i| prof.values()[i]).unwrap();
    let (a, b, c) = (at(20.0), at(30.0), at(40.0));
    let in_band = [a, b, c].iter().all(|v| (1.35..=1.65).contains(v));
    let toward = (c - 1.5).abs() < (b - 1.5).abs();
    Ok((in_band && toward, format!("φ(20, 30, 40) = {a:.5}, {b:.5}, {c:.5}")))
}

fn c4_potential_scaling(_: &mut Shared) -> Check {
    let cfg = PotentialConfig::with_abs_tol(1e-8);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut worst = 0.0f64;
    for gamma in [0.5, 2.0] {
        let pg = Paraboloid::new(gamma, 0.0)?;
        for _ in 0..20 {
            let x = Point2::new(rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0));
            let lhs = potential_paraboloid(&pg, gamma * x, &cfg);
            let rhs = gamma * gamma * potential_paraboloid(&p1(), x, &cfg);
            worst = worst.max((lhs - rhs).abs());
        }
    }
    Ok((worst <= 3e-8, format!("max |V_γP(γx) - γ²V_P(x)| = {worst:.3e} over 2 x 20 points")))
}

fn c5_expansion_identity(s: &mut Shared) -> Check {
    let (u, rep) = s.solve()?;
    let g = *u.grid();
    let h = g.h();
    let exact = ParaboloidSolution::new(p1(), PotentialConfig::default());
    let ex = ScalarField::from_sampler(g, &exact)?;
    let mut err = 0.0f64;
    for j in 1..g.ny - 1 {
        for i in 1..g.nx - 1 {
            err = err.max((u.get(i, j) - ex.get(i, j)).abs());
        }
    }
    let inside: Vec<bool> = (0..g.len()).map(|k| p1().contains(g.node_at(k))).collect();
    let dh = hausdorff_nodes(&g, rep.mask.flags(), &inside)?;
    let bound = 5.0 * h * h + 1e-7;
    Ok((
        err <= bound && dh <= 2.0 * h + 1e-12,
        format!(
            "‖u_h - (p + V)‖∞ = {err:.3e} (bound {bound:.3e}), Hausdorff(mask, P) = {dh:.4} (bound {:.2}), {} sweeps",
            2.0 * h,
            rep.iterations
        ),
    ))
}

fn c6_doubling(_: &mut Shared) -> Check {
    let cfg = FunctionalConfig::new(1024, 2)?;
    let mut worst = 0.0f64;
    for r in [0.1, 1.0, 10.0, 100.0] {
        worst = worst.max((doubling_ratio(&VHat, r, &cfg)? - 8.0).abs());
    }
    let w = deviation(1.0);
    let d10 = doubling_ratio(&w, 10.0, &cfg)?;
    let d20 = doubling_ratio(&w, 20.0, &cfg)?;
    let ok = worst <= 1e-8 && (7.2..=8.8).contains(&d20) && (d20 - 8.0).abs() < (d10 - 8.0).abs();
    Ok((ok, format!("max |D(v̂) - 8| = {worst:.2e}; D(u - p) at r = 10, 20: {d10:.5}, {d20:.5}")))
}

fn random_triple(rng: &mut ChaCha8Rng) -> anyhow::Result<[SectorMode; 3]> {
    loop {
        let mut cuts = [rng.gen_range(0.0..2.0 * PI), rng.gen_range(0.0..2.0 * PI)];
        cuts.sort_by(f64::total_cmp);
        let widths = [cuts[0], cuts[1] - cuts[0], 2.0 * PI - cuts[1]];
        if widths.iter().any(|w| *w < 0.5) {
            continue;
        }
        let mut a = rng.gen_range(0.0..2.0 * PI);
        let mut m = Vec::new();
        for w in widths {
            m.push(SectorMode::new(a, w, rng.gen_range(1..=3))?);
            a += w;
        }
        return Ok([m[0], m[1], m[2]]);
    }
}

fn c7_modified_acf(_: &mut Shared) -> Check {
    let cfg = FunctionalConfig::new(1024, 64)?;
    let a = 2.0 * PI / 3.0;
    let thirds = [SectorMode::new(0.0, a, 1)?, SectorMode::new(a, a, 1)?, SectorMode::new(2.0 * a, a, 1)?];
    let radii: Vec<f64> = (1..=10).map(|k| k as f64 / 10.0).collect();
    let p9: Vec<f64> = radii.iter().map(|&r| acf_sector_triple(&thirds, r, 9.0, &cfg)).collect::<Result<_>>()?;
    let (lo, hi) = p9.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| (l.min(*v), h.max(*v)));
    let spread = hi / lo - 1.0;
    let p8_1 = acf_sector_triple(&thirds, 1.0, 8.0, &cfg)?;
    let mut scale_err = 0.0f64;
    for &r in &radii {
        let ratio = acf_sector_triple(&thirds, r, 8.0, &cfg)? / p8_1;
        scale_err = scale_err.max((ratio / r - 1.0).abs());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut worst_drop = f64::NEG_INFINITY;
    for _ in 0..10 {
        let t = random_triple(&mut rng)?;
        let prof = radial_profile(&radii, |r| acf_sector_triple(&t, r, 9.0, &cfg))?;
        worst_drop = worst_drop.max(prof.max_relative_drop());
    }
    let ok = spread <= 0.01 && scale_err <= 0.02 && worst_drop <= 0.005;
    Ok((
        ok,
        format!(
            "β = 9 spread {spread:.2e}; β = 8 deviation from r-scaling {scale_err:.2e}; random triples max step drop {worst_drop:.2e}"
        ),
    ))
}

fn c8_matching(_: &mut Shared) -> Check {
    let cfg = FunctionalConfig::new(1024, 2)?;
    let radii = [2.0, 4.0, 6.0, 8.0, 10.0, 15.0, 20.0, 25.0, 30.0, 35.0, 40.0];
    let prof = radial_profile(&radii, |r| matching_functional(&deviation(1.0), r, &cfg))?;
    let drop = prof.max_drop();
    let mut worst = 0.0f64;
    let mut detail = String::new();
    for gamma in [0.5, 2.0] {
        let w = deviation(gamma);
        let vals: Vec<f64> = ALPHA_1_RADII.iter().map(|&r| matching_functional(&w, r, &cfg)).collect::<Result<_>>()?;
        let ratio = richardson_limit(&ALPHA_1_RADII, &vals)? / blowdown::ALPHA_1;
        let rel = (ratio / gamma.sqrt() - 1.0).abs();
        worst = worst.max(rel);
        detail.push_str(&format!(" α_{gamma}/α₁ = {ratio:.5} (√γ = {:.5});", gamma.sqrt()));
    }
    Ok((drop <= 1e-3 && worst <= 0.05, format!("max step drop of M on [2, 40] = {drop:.2e};{detail}")))
}

fn c9_growth(_: &mut Shared) -> Check {
    let cfg = FunctionalConfig::new(1024, 2)?;
    let radii = [10.0, 15.0, 20.0, 25.0, 30.0, 35.0, 40.0];
    let prof = radial_profile(&radii, |r| boundary_l2(&deviation(1.0), r, &cfg))?;
    let slope_h = prof.loglog_slope()?;
    let slope_v = growth_exponent_fit(&p1(), [0.0, -1.0], 10.0, 1e3, 12, &PotentialConfig::default())?;
    let h = prof.values();
    let last = (h[h.len() - 1] / h[h.len() - 2]).ln() / (40.0f64 / 35.0).ln();
    let ok = slope_h <= 3.1 && (1.45..=1.75).contains(&slope_v);
    Ok((
        ok,
        format!(
            "log-log slope of H(r, u - p) on [10, 40] = {slope_h:.4} (last step {last:.4}); |V_P| along (0, -1) = {slope_v:.4}"
        ),
    ))
}

fn c10_coincidence_growth(s: &mut Shared) -> Check {
    let (_, rep) = s.solve()?;
    let pass = coincidence_growth_check(&rep.mask, 0.5, 1.0)?;
    let offenders: Vec<Point2> =
        rep.mask.points().into_iter().filter(|y| y.x2 >= 1.0 && y.x1 * y.x1 > y.x2.powf(1.5)).collect();
    let highest = offenders.iter().map(|y| y.x2).fold(f64::NEG_INFINITY, f64::max);
    let mut detail = format!("{} masked nodes violate y1² <= y2^1.5 with y2 >= 1", offenders.len());
    if let Some(y) = offenders.first() {
        detail.push_str(&format!(" (first ({:.2}, {:.2}), highest y2 = {highest:.2})", y.x1, y.x2));
        let r2_needed = (highest * 20.0).round() / 20.0 + 0.05;
        let at = coincidence_growth_check(&rep.mask, 0.5, r2_needed)?;
        detail.push_str(&format!("; with r2 = {r2_needed:.2} the check gives {at}"));
    }
    Ok((pass, detail))
}

/// `bilinear(u_h) - p` with its piecewise gradient.
struct GridDeviation<'a>(&'a ScalarField);

impl FieldSampler for GridDeviation<'_> {
    fn value(&self, x: Point2) -> obstacle_lab::Result<f64> {
        Ok(self.0.bilinear(x)? - halfspace_poly(x))
    }
    fn gradient(&self, x: Point2) -> Option<obstacle_lab::Result<Vector2>> {
        Some(self.0.bilinear_grad(x).map(|g| [g[0] - x.x1, g[1]]))
    }
}

fn c11_identity_residuals(s: &mut Shared) -> Check {
    let cfg = FunctionalConfig::new(2048, 64)?;
    let zero = FnSampler(|_: Point2| 0.0);
    let harmonic = ThinProfile::new(ThinKind::EvenPolynomial, 1, 1.0)?;
    let mut fixture = 0.0f64;
    for r in [0.5, 1.0, 2.0] {
        fixture = fixture.max(hprime_identity_gap(&harmonic, &zero, r, &cfg)?);
        fixture = fixture.max(hprime_identity_gap(&VHat, &zero, r, &cfg)?);
    }
    let (u, rep) = s.solve()?;
    let h = u.grid().h();
    let w = GridDeviation(u);
    let mask = rep.mask.indicator();
    // Δ(u - p) = χ_{u>0} - 1 = -χ_C
    let density = FnSampler(|x: Point2| -mask.value(x).unwrap_or(0.0));
    let grid_cfg = FunctionalConfig::new(1024, 64)?;
    let mut run = Vec::new();
    for r in [0.75, 1.0, 1.5] {
        run.push(hprime_identity_gap(&w, &density, r, &grid_cfg)?);
    }
    // a disk of radius 10h, reported only
    let small = hprime_identity_gap(&w, &density, 0.5, &grid_cfg)?;
    let worst_run = run.iter().cloned().fold(0.0, f64::max);
    Ok((
        fixture <= 1e-5 && worst_run <= 5.0 * h,
        format!(
            "fixtures max gap {fixture:.2e}; solver run gaps at r = 0.75, 1, 1.5: {:.3e}, {:.3e}, {:.3e} (bound {:.2}); r = 0.5 gives {small:.3e}",
            run[0],
            run[1],
            run[2],
            5.0 * h
        ),
    ))
}

fn c12_sliding(_: &mut Shared) -> Check {
    let pc = PotentialConfig::with_abs_tol(1e-9);
    let g = Grid2::snapped(-8.0, 8.0, -2.0, 14.0, 0.05)?;
    let u = ParaboloidSolution::new(p1(), pc);
    let us = ParaboloidSolution::new(Paraboloid::new(2.0, 0.25)?, pc);
    let uf = ScalarField::from_sampler(g, &u)?;
    let usf = ScalarField::from_sampler(g, &us)?;
    let reg = region_decomposition(&uf, &usf, 8)?;
    let rows = [-0.05, 0.0, 0.05, 0.1, 0.15, 0.2];
    let double = rows.iter().filter(|&&y| reg.sign_changes_along_row(y).unwrap_or(0) >= 2).count();
    if reg.k != 3 {
        return Ok((false, format!("k = {} (sliding functional needs 3)", reg.k)));
    }
    let cfg = FunctionalConfig::new(256, 32)?;
    let radii = [0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0];
    let phi: Vec<f64> = radii.iter().map(|&r| sliding_phi(&u, &us, &reg, r, &cfg)).collect::<Result<_>>()?;
    // resolvable: all three regions meet B_r
    let first = phi.iter().position(|v| *v > 0.0);
    let drop = match first {
        Some(i) if phi.len() - i >= 2 => {
            RadialProfile::new(radii[i..].to_vec(), phi[i..].to_vec())?.max_relative_drop()
        }
        _ => f64::INFINITY,
    };
    let ok = reg.k >= 3 && double >= 2 && drop <= 0.05;
    Ok((
        ok,
        format!(
            "k = {}, signs {:?}, {double} near-tip rows with 2 sign changes, Φ on r >= {}: max step drop {drop:.2e}",
            reg.k,
            reg.signs,
            first.map(|i| radii[i]).unwrap_or(f64::NAN)
        ),
    ))
}

fn files_of(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .map(|rd| {
            rd.filter_map(|e| e.ok())
                .map(|e| (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap_or_default()))
                .collect()
        })
        .unwrap_or_default();
    out.sort();
    out
}

fn c13_determinism(_: &mut Shared) -> Check {
    let bin = env!("CARGO_BIN_EXE_obstacle-lab");
    let examples = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples");
    let mut configs: Vec<PathBuf> = std::fs::read_dir(&examples)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "conf"))
        .collect();
    configs.sort();
    let tmp = Path::new(env!("CARGO_TARGET_TMPDIR")).join("acceptance-determinism");
    let _ = std::fs::remove_dir_all(&tmp);
    let mut bad = Vec::new();
    for cfg in &configs {
        let stem = cfg.file_stem().unwrap().to_string_lossy().into_owned();
        let mut outputs = Vec::new();
        for run in ["a", "b"] {
            let dir = tmp.join(&stem).join(run);
            let st = Command::new(bin).arg("run").arg("--config").arg(cfg).arg("--out").arg(&dir).output()?;
            if !st.status.success() {
                bad.push(format!("{stem} exited with {}", st.status));
            }
            outputs.push((st.stdout, files_of(&dir)));
        }
        if outputs[0] != outputs[1] || outputs[0].1.is_empty() {
            bad.push(format!("{stem} differs between runs"));
        }
    }
    let detail = if bad.is_empty() {
        format!("{} bundled configs rerun byte-identically", configs.len())
    } else {
        bad.join("; ")
    };
    Ok((bad.is_empty() && !configs.is_empty(), detail))
}

type Criterion = (u32, &'static str, fn(&mut Shared) -> Check);

fn main() {
    let criteria: [Criterion; 13] = [
        (1, "frequency constancy", c1_frequency_constancy),
        (2, "frequency bound", c2_frequency_bound),
        (3, "frequency limit", c3_frequency_limit),
        (4, "potential scaling", c4_potential_scaling),
        (5, "expansion identity", c5_expansion_identity),
        (6, "doubling", c6_doubling),
        (7, "modified ACF", c7_modified_acf),
        (8, "matching monotonicity and scaling", c8_matching),
        (9, "growth exponents", c9_growth),
        (10, "coincidence growth", c10_coincidence_growth),
        (11, "identity residuals", c11_identity_residuals),
        (12, "sliding pipeline", c12_sliding),
        (13, "determinism", c13_determinism),
    ];
    let filter: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut shared = Shared::default();
    let mut failed = 0;
    for (n, name, f) in criteria {
        if !filter.is_empty() && !filter.contains(&n) {
            continue;
        }
        let t = Instant::now();
        let (pass, detail) = match f(&mut shared) {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failed += 1;
        }
        println!("{} {n:>2} {name}: {detail} [{:.1}s]", if pass { "PASS" } else { "FAIL" }, t.elapsed().as_secs_f64());
    }
    println!("acceptance: {failed} failed");
    if failed > 0 {
        std::process::exit(1);
    }
}
