//! Figure data: ε-factor surfaces, rotator Wigner functions, free packets.

use std::f64::consts::PI;

use anyhow::{bail, Result};
use ndarray::Array2;
use num_complex::Complex64;
use serde_json::json;
use wwm_core::free::{free_wigner_pair, gaussian_packet, position_width, Kernel};
use wwm_core::grid::{fmt17, ComplexField, UnitsTag};
use wwm_core::spectra::{
    charge_factors, chi_continuous, epsilon_continuous, rotator_spectrum, ChargeFactor,
};
use wwm_core::state::{Branch, ChargeStateVector, CoefficientMatrices};
use wwm_core::wigner::{assemble_wigner, wigner_value_at, Component};

use super::{grid_meta, Context, Fig1Args, Fig2Args, Fig3Args};
use crate::output::Format;
use crate::svg::Axes;

/// Normalization tolerance for the rotator panels.
const NORM_TOLERANCE: f64 = 1e-6;
/// Tolerance on `|Im W|` for fields that must be real.
const REALITY_TOLERANCE: f64 = 1e-10;
/// Negative values smaller than this fraction of the peak count as roundoff.
const ROUNDOFF: f64 = 1e-10;

pub fn fig1(ctx: &Context, args: &Fig1Args) -> Result<()> {
    let kind = ctx.setting(args.kind.clone(), "kind", "both".to_string())?;
    let (free, rotator) = match kind.as_str() {
        "free" => (true, false),
        "rotator" => (false, true),
        "both" => (true, true),
        other => bail!("unknown fig1 kind `{other}` (expected free, rotator or both)"),
    };
    let mut report = serde_json::Map::new();
    if free {
        let half = ctx.setting(args.range, "range", 5.0)?;
        let n = ctx.setting(args.points, "points", 201usize)?;
        if n < 2 || !(half > 0.0) {
            bail!("free surface needs at least 2 points and a positive range");
        }
        let axis: Vec<f64> = (0..n).map(|i| -half + 2.0 * half * i as f64 / (n - 1) as f64).collect();
        let eps = Array2::from_shape_fn((n, n), |(i, j)| epsilon_continuous(axis[i], axis[j]));
        let meta = json!({
            "quantity": "epsilon(p1, p2) for a free particle",
            "units": "momentum in mc",
            "p_range": [-half, half],
            "points": n,
        });
        ctx.out.csv("fig1_free", &meta, |w| {
            writeln!(w, "p1,p2,epsilon,chi")?;
            for (i, &a) in axis.iter().enumerate() {
                for (j, &b) in axis.iter().enumerate() {
                    writeln!(w, "{},{},{},{}", fmt17(a), fmt17(b), fmt17(eps[[i, j]]), fmt17(chi_continuous(a, b)))?;
                }
            }
            Ok(())
        })?;
        if ctx.out.wants(Format::Json) {
            let rows: Vec<Vec<f64>> = eps.outer_iter().map(|r| r.to_vec()).collect();
            ctx.out.json("fig1_free.json", &json!({"meta": meta, "p": axis, "epsilon": rows}))?;
        }
        ctx.out.svg(
            "fig1_free",
            &eps,
            &Axes {
                title: "epsilon(p1, p2), free particle",
                x_label: "p2 [mc]",
                y_label: "p1 [mc]",
                x_range: (-half, half),
                y_range: (-half, half),
            },
        )?;
        let diag = (0..n)
            .map(|i| (eps[[i, n - 1 - i]] - 1.0).abs().max((eps[[i, i]] - 1.0).abs()))
            .fold(0.0, f64::max);
        let min = eps.iter().cloned().fold(f64::INFINITY, f64::min);
        report.insert(
            "free".into(),
            json!({"max_deviation_on_equal_energy_locus": diag, "min_epsilon": min, "max_epsilon": eps.iter().cloned().fold(0.0, f64::max)}),
        );
    }
    if rotator {
        let lambda = ctx.lambda(10.0)?;
        let n = ctx.basis_size(20)?;
        let spec = rotator_spectrum(lambda, n)?;
        let f = charge_factors(&spec, n)?;
        let meta = json!({
            "quantity": "epsilon(m, n) and chi(m, n) for the rotator",
            "lambda": lambda,
            "basis_size": n,
            "units": "dimensionless",
        });
        ctx.out.csv("fig1_rotator", &meta, |w| {
            writeln!(w, "m,n,epsilon,chi")?;
            for m in 0..n {
                for k in 0..n {
                    writeln!(w, "{m},{k},{},{}", fmt17(f.epsilon(m, k)), fmt17(f.chi(m, k)))?;
                }
            }
            Ok(())
        })?;
        if ctx.out.wants(Format::Json) {
            let rows = |a: &Array2<f64>| a.outer_iter().map(|r| r.to_vec()).collect::<Vec<_>>();
            ctx.out.json(
                "fig1_rotator.json",
                &json!({"meta": meta, "epsilon": rows(&f.even), "chi": rows(&f.odd), "spectrum": spec}),
            )?;
        }
        ctx.out.svg(
            "fig1_rotator",
            &f.even,
            &Axes {
                title: &format!("epsilon(m, n), rotator, lambda = {lambda}"),
                x_label: "n",
                y_label: "m",
                x_range: (0.0, (n - 1) as f64),
                y_range: (0.0, (n - 1) as f64),
            },
        )?;
        // ε grows monotonically away from the diagonal along each row.
        let monotone = (0..n).all(|m| {
            (m + 1..n).all(|k| k == m + 1 || f.epsilon(m, k) >= f.epsilon(m, k - 1))
                && (1..=m).all(|d| d == 1 || f.epsilon(m, m - d) >= f.epsilon(m, m - d + 1))
        });
        report.insert(
            "rotator".into(),
            json!({
                "lambda": lambda,
                "basis_size": n,
                "epsilon_0_2": if n > 2 { Some(f.epsilon(0, 2)) } else { None },
                "epsilon_corner": f.epsilon(0, n - 1),
                "monotone_off_diagonal": monotone,
                "hyperbolic_residual": f.hyperbolic_residual(),
            }),
        );
    }
    ctx.out.json("fig1_report.json", &serde_json::Value::Object(report))
}

fn level(n: usize, size: usize) -> Result<CoefficientMatrices> {
    Ok(CoefficientMatrices::from_state(&ChargeStateVector::from_levels(
        size,
        Branch::Plus,
        &[(n, Complex64::new(1.0, 0.0))],
    )?))
}

/// Largest deviation of a radial field from rotational symmetry, sampled
/// pointwise on circles.
fn rotational_asymmetry(m: &CoefficientMatrices, f: &ChargeFactor, r_max: f64) -> Result<f64> {
    let mut worst = 0.0f64;
    for k in 1..=40 {
        let r = r_max * k as f64 / 40.0;
        let reference = wigner_value_at(m, f, Component::EvenPlus, 0.0, r)?;
        for a in 1..64 {
            let phi = 2.0 * PI * a as f64 / 64.0;
            let v = wigner_value_at(m, f, Component::EvenPlus, r * phi.sin(), r * phi.cos())?;
            worst = worst.max((v - reference).norm());
        }
    }
    Ok(worst)
}

pub fn fig2(ctx: &Context, _args: &Fig2Args) -> Result<()> {
    let lambda = ctx.lambda(10.0)?;
    let grid = ctx.grid("-5,5,-5,5,200,200", UnitsTag::Rotator)?;
    let size = ctx.basis_size(3)?.max(3);
    let spec = rotator_spectrum(lambda, size)?;
    let standard = charge_factors(&spec, size)?;
    let nonlocal = ChargeFactor::nonlocal(size);
    let mixed = CoefficientMatrices::mixture(&[(0.5, level(0, size)?), (0.5, level(2, size)?)])?;
    let sup = CoefficientMatrices::from_state(&ChargeStateVector::from_levels(
        size,
        Branch::Plus,
        &[(0, Complex64::new(1.0, 0.0)), (2, Complex64::new(1.0, 0.0))],
    )?);
    let panels = [
        ("fig2_mixed", "mixture of |0> and |2>", &mixed, &standard),
        ("fig2_nonlocal", "(|0> + |2>)/sqrt2, nonlocal", &sup, &nonlocal),
        ("fig2_standard", "(|0> + |2>)/sqrt2, standard", &sup, &standard),
    ];
    let mut fields = Vec::new();
    let mut panel_report = serde_json::Map::new();
    let mut failures = Vec::new();
    for (stem, title, coeffs, factors) in panels {
        let w = assemble_wigner(coeffs, factors, &grid, false)?.even_plus;
        let meta = json!({
            "panel": title,
            "lambda": lambda,
            "basis_size": size,
            "grid": grid_meta(&grid),
            "units": "p, q in oscillator units",
        });
        ctx.out.field(stem, &w, &meta, title)?;
        let integral = w.integrate().re;
        if (integral - 1.0).abs() > NORM_TOLERANCE {
            failures.push(format!("{stem} integrates to {integral}"));
        }
        if w.max_abs_imag() > REALITY_TOLERANCE {
            failures.push(format!("{stem} is not real"));
        }
        panel_report.insert(
            stem.to_string(),
            json!({"integral": integral, "min": w.min_real(), "max": w.values.iter().map(|v| v.re).fold(f64::MIN, f64::max)}),
        );
        fields.push(w);
    }
    let diff = fields[2].sub(&fields[1])?;
    let meta = json!({
        "panel": "standard minus nonlocal",
        "lambda": lambda,
        "basis_size": size,
        "grid": grid_meta(&grid),
    });
    ctx.out.field("fig2_difference", &diff, &meta, "standard - nonlocal")?;
    // The mixture is the diagonal part of both superposition panels.
    let interference_std = fields[2].sub(&fields[0])?;
    let interference_nl = fields[1].sub(&fields[0])?;
    let ratio = interference_std.max_abs() / interference_nl.max_abs();
    let eps = standard.epsilon(0, 2);
    let support = diff.max_distance(&interference_nl.scale(Complex64::new(eps - 1.0, 0.0)))?;
    let asym = rotational_asymmetry(&mixed, &standard, 0.5 * (grid.q_max - grid.q_min).min(grid.p_max - grid.p_min))?;
    let report = json!({
        "lambda": lambda,
        "grid": grid_meta(&grid),
        "panels": panel_report,
        "epsilon_0_2": eps,
        "interference_amplitude_ratio": ratio,
        "difference_outside_interference": support,
        "mixed_rotational_asymmetry": asym,
        "violations": failures,
    });
    ctx.out.json("fig2_report.json", &report)?;
    if !failures.is_empty() {
        bail!("fig2 invariants violated: {}", failures.join("; "));
    }
    Ok(())
}

pub fn fig3(ctx: &Context, args: &Fig3Args) -> Result<()> {
    let lambda = ctx.lambda(8.0)?;
    let p0 = ctx.setting(args.p0, "p0", 0.0)?;
    if !(lambda > 0.0) {
        bail!("fig3 needs lambda > 0 (packet width in mc)");
    }
    let grid = ctx.grid("-60,60,-3,3,256,240", UnitsTag::FreeParticle)?;
    let psi = gaussian_packet(&grid, p0, lambda)?;
    let mut report = serde_json::Map::new();
    let mut failures = Vec::new();
    for (stem, kernel, title) in [
        ("fig3_epsilon", Kernel::Epsilon, "free packet, epsilon kernel"),
        ("fig3_unit", Kernel::Unit, "free packet, unit kernel"),
    ] {
        let w: ComplexField = free_wigner_pair(&psi, &grid, kernel)?;
        let meta = json!({
            "panel": title,
            "lambda": lambda,
            "packet_width_mc": lambda,
            "p0": p0,
            "grid": grid_meta(&grid),
            "units": "p in mc, q in Compton wavelengths",
        });
        ctx.out.field(stem, &w, &meta, title)?;
        if w.max_abs_imag() > REALITY_TOLERANCE {
            failures.push(format!("{stem} is not real (max |Im| = {:e})", w.max_abs_imag()));
        }
        let max = w.values.iter().map(|v| v.re).fold(f64::MIN, f64::max);
        report.insert(
            stem.to_string(),
            json!({
                "integral": w.integrate().re,
                "min_value": w.min_real(),
                "max_value": max,
                "has_negative": w.min_real() < -ROUNDOFF * max,
                "localization_width": position_width(&w),
                "max_imag": w.max_abs_imag(),
            }),
        );
    }
    report.insert("violations".into(), json!(failures));
    ctx.out.json("fig3_report.json", &serde_json::Value::Object(report))?;
    if !failures.is_empty() {
        bail!("fig3 invariants violated: {}", failures.join("; "));
    }
    Ok(())
}
