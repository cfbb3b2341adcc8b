//! Evolution runs, state validation, Hamiltonian symbol and Compton times.

use std::path::Path;

use anyhow::{anyhow, bail, Context as _, Result};
use serde_json::json;
use wwm_core::evolution::{
    dominant_angular_frequency, evolve_grid_observed, evolve_spectral, EvolutionMethod,
    EvolutionPlan, STABILITY_LIMIT,
};
use wwm_core::grid::{fmt17, UnitsTag};
use wwm_core::hamiltonian::{
    expansion_value, rotator_hamiltonian_symbol, HamiltonianOptions,
};
use wwm_core::io::{write_spectrum_json, write_trajectory_csv, StateFile, TrajectoryRow};
use wwm_core::ladder::Observable;
use wwm_core::spectra::{compton_time, rotator_level, rotator_spectrum};
use wwm_core::star::{star, StarBackend};
use wwm_core::state::Branch;
use wwm_core::symbol::SymbolField;
use wwm_core::wigner::{
    assemble_wigner, branch_moment, even_odd_constraint, field_moment, moment,
    purity_criterium, WignerComponents, PURITY_TOLERANCE,
};
use wwm_core::Error;

use super::{grid_meta, observable, Context, ComptonArgs, EvolveArgs, HamiltonianArgs, ValidateArgs};
use crate::output::Format;

const RESIDUAL_TOLERANCE: f64 = 1e-10;
const NORM_TOLERANCE: f64 = 1e-8;

fn state_path<'a>(ctx: &'a Context, flag: &'a Option<std::path::PathBuf>) -> Result<std::path::PathBuf> {
    flag.clone()
        .or_else(|| ctx.config.raw("state").map(Into::into))
        .ok_or_else(|| anyhow!("no state file: pass --state FILE or set `state` in the config"))
}

fn load_state(path: &Path) -> Result<StateFile> {
    StateFile::read(path).with_context(|| format!("invalid state file {}", path.display()))
}

fn grid_moments(w: &WignerComponents, obs: Observable, power: usize) -> [f64; 3] {
    let plus = field_moment(&w.even_plus, obs, power);
    let minus = field_moment(&w.even_minus, obs, power);
    let odd = field_moment(&w.odd_plus, obs, power) + field_moment(&w.odd_minus, obs, power);
    [plus, minus, plus + minus + odd]
}

fn push_rows(rows: &mut Vec<TrajectoryRow>, t: f64, m: [f64; 3]) {
    for (branch, mean) in ["plus", "minus", "total"].iter().zip(m) {
        rows.push(TrajectoryRow {
            t,
            mean,
            branch: branch.to_string(),
        });
    }
}

pub fn evolve(ctx: &Context, args: &EvolveArgs) -> Result<()> {
    let path = state_path(ctx, &args.state)?;
    let file = load_state(&path)?;
    let coeffs = file.coefficients()?;
    let n = file.n;
    let lambda = ctx.lambda(file.lambda)?;
    let method = match ctx.setting(args.method.clone(), "method", "spectral".to_string())?.as_str() {
        "spectral" => EvolutionMethod::Spectral,
        "grid" | "rk4" => EvolutionMethod::GridRk4,
        other => bail!("unknown method `{other}` (expected spectral or grid)"),
    };
    let padding = ctx.setting(args.padding, "padding", 2usize)?;
    let plan = EvolutionPlan {
        method,
        dt: ctx.setting(args.dt, "dt", 1e-3)?,
        t_final: ctx.setting(args.t_final, "t_final", 1.0)?,
        backend: StarBackend::IntegralFft { padding },
    };
    plan.validate()?;
    let obs_name = ctx.setting(args.observable.clone(), "observable", "position".to_string())?;
    let obs = observable(&obs_name)?;
    let power = ctx.setting(args.power, "power", 2usize)?;
    let frames = ctx.setting(args.frames, "frames", 0usize)?;
    let factors = ctx.factors(lambda, n)?;
    let spec = rotator_spectrum(lambda, n)?;
    let grid = ctx.grid("-6,6,-6,6,64,64", UnitsTag::Rotator)?;
    let steps = plan.steps();
    let mut rows = Vec::new();
    let mut totals = Vec::new();
    let mut diagnostics = json!(null);
    let dump = |step: usize, w: &WignerComponents| -> Result<()> {
        if frames > 0 && step % frames == 0 && ctx.out.wants(Format::Csv) {
            let total = w.total()?;
            ctx.out.text(&format!("frame_{step:06}.csv"), &{
                let mut buf = Vec::new();
                total.write_csv(&mut buf)?;
                String::from_utf8(buf)?
            })?;
        }
        Ok(())
    };
    match method {
        EvolutionMethod::Spectral => {
            for k in 0..=steps {
                let t = (k as f64 * plan.dt).min(plan.t_final);
                let c = evolve_spectral(&coeffs, &spec, t)?;
                let m = [
                    branch_moment(&c, &factors, Branch::Plus, obs, power)?,
                    branch_moment(&c, &factors, Branch::Minus, obs, power)?,
                    moment(&c, &factors, obs, power)?,
                ];
                totals.push(m[2]);
                push_rows(&mut rows, t, m);
                if frames > 0 && k % frames == 0 {
                    dump(k, &assemble_wigner(&c, &factors, &grid, true)?)?;
                }
            }
        }
        EvolutionMethod::GridRk4 => {
            let terms = ctx.setting(args.terms, "terms", 160usize)?;
            let opts = HamiltonianOptions {
                n_levels: terms,
                ..Default::default()
            };
            let h = rotator_hamiltonian_symbol(lambda, &grid, &opts)?;
            let w0 = assemble_wigner(&coeffs, &factors, &grid, true)?;
            let m0 = grid_moments(&w0, obs, power);
            totals.push(m0[2]);
            push_rows(&mut rows, 0.0, m0);
            dump(0, &w0)?;
            let out = evolve_grid_observed(&w0, &h, &plan, |step, t, w| {
                let m = grid_moments(w, obs, power);
                totals.push(m[2]);
                push_rows(&mut rows, t, m);
                dump(step, w).map_err(|e| Error::Invariant(e.to_string()))
            })
            .map_err(|e| match e {
                Error::UnstableStep(..) => anyhow!(
                    "{e}; reduce --dt below {:.3e}",
                    STABILITY_LIMIT / h.field.max_abs()
                ),
                other => other.into(),
            })?;
            diagnostics = serde_json::to_value(out.diagnostics)?;
        }
    }
    ctx.out.csv("trajectory", &json!({"observable": obs_name, "power": power, "lambda": lambda, "basis_size": n}), |w| {
        Ok(write_trajectory_csv(&rows, w)?)
    })?;
    let frequency = if totals.len() >= 4 {
        let (w, bin) = dominant_angular_frequency(&totals, plan.dt)?;
        json!({"angular_frequency": w, "bin_width": bin})
    } else {
        json!(null)
    };
    let manifest = json!({
        "command": "evolve",
        "state_file": path.file_name().map(|s| s.to_string_lossy().into_owned()),
        "lambda": lambda,
        "basis_size": n,
        "mode": ctx.mode.as_str(),
        "plan": plan,
        "steps": steps,
        "observable": obs_name,
        "power": power,
        "grid": grid_meta(&grid),
        "spectrum": spec,
        "tolerances": {"stability_limit": STABILITY_LIMIT},
        "seeds": null,
        "diagnostics": diagnostics,
        "dominant_frequency": frequency,
    });
    ctx.out.json("manifest.json", &manifest)
}

pub fn validate(ctx: &Context, args: &ValidateArgs) -> Result<()> {
    let path = state_path(ctx, &args.state)?;
    let file = load_state(&path)?;
    let n = file.n;
    let coeffs = file.coefficients()?;
    let lambda = ctx.lambda(file.lambda)?;
    let factors = ctx.factors(lambda, n)?;
    let grid = ctx.grid("-6,6,-6,6,128,128", UnitsTag::Rotator)?;
    let mut violations = Vec::new();
    let norm = coeffs.total_trace();
    if (norm - 1.0).abs() > NORM_TOLERANCE {
        violations.push(format!("total norm {norm} differs from 1"));
    }
    if let Err(e) = coeffs.validate(NORM_TOLERANCE) {
        violations.push(e.to_string());
    }
    let purity = purity_criterium(&coeffs.weighted(&factors)?, &factors, PURITY_TOLERANCE)?;
    let single_branch = coeffs.even_plus.iter().all(|v| v.norm() == 0.0)
        || coeffs.even_minus.iter().all(|v| v.norm() == 0.0);
    let constraint = even_odd_constraint(&coeffs);
    let w = assemble_wigner(&coeffs, &factors, &grid, true)?;
    let residuals = w.residuals()?;
    if residuals.reality > RESIDUAL_TOLERANCE {
        violations.push(format!("even parts not real ({:e})", residuals.reality));
    }
    if residuals.conjugacy > RESIDUAL_TOLERANCE {
        violations.push(format!("odd parts not conjugate ({:e})", residuals.conjugacy));
    }
    let report = json!({
        "state_file": path.file_name().map(|s| s.to_string_lossy().into_owned()),
        "lambda": lambda,
        "basis_size": n,
        "mode": ctx.mode.as_str(),
        "grid": grid_meta(&grid),
        "norm": norm,
        "purity": purity,
        "even_odd_constraint": {"max_violation": constraint, "vacuous": single_branch},
        "residuals": residuals,
        "violations": violations,
    });
    ctx.out.json("validate_report.json", &report)?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    if !violations.is_empty() {
        bail!("state violates invariants: {}", violations.join("; "));
    }
    Ok(())
}

pub fn hamiltonian(ctx: &Context, args: &HamiltonianArgs) -> Result<()> {
    let lambda = ctx.lambda(0.3)?;
    let grid = ctx.grid("-6,6,-6,6,64,64", UnitsTag::Rotator)?;
    let terms = ctx.setting(args.terms, "terms", 160usize)?;
    let check = ctx.setting(args.check_levels, "check_levels", 4usize)?;
    let n = ctx.basis_size(20)?;
    let opts = HamiltonianOptions {
        n_levels: terms,
        ..Default::default()
    };
    let h = rotator_hamiltonian_symbol(lambda, &grid, &opts)?;
    let meta = json!({
        "quantity": "rotator Hamiltonian symbol E(p, q) in mc^2",
        "lambda": lambda,
        "terms": terms,
        "grid": grid_meta(&grid),
    });
    ctx.out.field("hamiltonian", &h.field, &meta, &format!("E(p, q), lambda = {lambda}"))?;
    let spec = rotator_spectrum(lambda, n)?;
    if ctx.out.wants(Format::Json) {
        write_spectrum_json(&spec, &ctx.out.path("spectrum.json"))?;
    }
    let mut expansion = 0.0f64;
    for ((i, j), v) in h.values().indexed_iter() {
        let r2 = grid.p(i).powi(2) + grid.q(j).powi(2);
        if r2 <= 1.0 {
            let e = expansion_value(lambda, r2, 3);
            expansion = expansion.max((v.re - e).abs() / e);
        }
    }
    let mut residuals = Vec::new();
    for k in 0..=check {
        let w = SymbolField::new(wwm_core::basis::diagonal_wigner(k, &grid)?, 1.0)?;
        let ew = star(&h, &w, &StarBackend::default())?;
        let r = ew.field.sub(&w.field.scale(num_complex::Complex64::new(rotator_level(lambda, k), 0.0)))?;
        residuals.push(json!({"level": k, "relative_residual": r.l2_norm() / w.field.l2_norm()}));
    }
    ctx.out.json(
        "hamiltonian_report.json",
        &json!({
            "lambda": lambda,
            "terms": terms,
            "grid": grid_meta(&grid),
            "max_relative_deviation_from_third_order_expansion_r2_le_1": expansion,
            "star_eigen_residuals": residuals,
        }),
    )
}

/// PDG rest energies in eV.
const DEFAULT_MASSES: [(&str, f64); 2] = [("electron", 0.510_998_950e6), ("pion_charged", 139.570_39e6)];

pub fn compton(ctx: &Context, args: &ComptonArgs) -> Result<()> {
    let mut masses: Vec<(String, f64)> = Vec::new();
    let mut set = |name: String, v: f64| {
        if let Some(slot) = masses.iter_mut().find(|(n, _)| *n == name) {
            slot.1 = v;
        } else {
            masses.push((name, v));
        }
    };
    let configured = ctx.config.section("mass.");
    if configured.is_empty() {
        for (n, v) in DEFAULT_MASSES {
            set(n.to_string(), v);
        }
    }
    for (name, v) in configured {
        let ev: f64 = v.parse().map_err(|e| anyhow!("config key `mass.{name}`: {e}"))?;
        set(name, ev);
    }
    for item in &args.mass {
        let (name, v) = item
            .split_once('=')
            .ok_or_else(|| anyhow!("--mass expects name=eV, got `{item}`"))?;
        set(name.trim().to_string(), v.trim().parse().map_err(|e| anyhow!("--mass {item}: {e}"))?);
    }
    let mut rows = Vec::new();
    for (name, ev) in &masses {
        rows.push((name.clone(), *ev, compton_time(*ev)?));
    }
    ctx.out.csv("compton", &json!({"units": {"rest_energy": "eV", "compton_time": "s"}}), |w| {
        writeln!(w, "name,rest_energy_ev,compton_time_s")?;
        for (n, e, t) in &rows {
            writeln!(w, "{n},{},{}", fmt17(*e), fmt17(*t))?;
        }
        Ok(())
    })?;
    let table: Vec<_> = rows
        .iter()
        .map(|(n, e, t)| json!({"name": n, "rest_energy_ev": e, "compton_time_s": t}))
        .collect();
    if ctx.out.wants(Format::Json) {
        ctx.out.json("compton.json", &json!({"particles": table}))?;
    }
    for (n, _, t) in &rows {
        println!("{n}: {t:.2e} s");
    }
    Ok(())
}
