//! End-to-end acceptance checks. Run with `cargo test --test acceptance`;
//! prints one PASS/FAIL line per criterion and exits non-zero on any failure.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use wwm_core::basis::wigner_basis_element;
use wwm_core::evolution::{
    dominant_angular_frequency, evolve_grid, evolve_spectral, means_timeseries, EvolutionMethod, EvolutionPlan,
};
use wwm_core::free::{free_wigner_pair, gaussian_packet, Kernel};
use wwm_core::grid::{ComplexField, PhaseGrid, UnitsTag};
use wwm_core::hamiltonian::{expansion_value, rotator_hamiltonian_symbol, HamiltonianOptions};
use wwm_core::ladder::Observable;
use wwm_core::spectra::{charge_factors, compton_time, interference_frequency, rotator_level, rotator_spectrum, ChargeFactor};
use wwm_core::star::{moyal_bracket, poisson_bracket, star, StarBackend, StarEngine};
use wwm_core::state::{Branch, ChargeStateVector, CoefficientMatrices};
use wwm_core::symbol::SymbolField;
use wwm_core::wigner::{assemble_wigner, even_odd_constraint, purity_criterium, wigner_value_at, Component};

type Check = Result<String, String>;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn require(ok: bool, what: String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(what)
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn rot_grid(half: f64, n: usize) -> PhaseGrid {
    PhaseGrid::square(half, n, UnitsTag::Rotator).unwrap()
}

fn levels(size: usize, amps: &[(usize, f64)]) -> CoefficientMatrices {
    let a: Vec<_> = amps.iter().map(|&(n, v)| (n, c(v))).collect();
    CoefficientMatrices::from_state(&ChargeStateVector::from_levels(size, Branch::Plus, &a).unwrap())
}

/// Direct evaluation from the closed-form spectrum.
fn epsilon_oracle(lambda: f64, m: usize, n: usize) -> f64 {
    let e = |k: usize| (1.0 + 2.0 * lambda * lambda * (k as f64 + 0.5)).sqrt();
    (e(m) + e(n)) / (2.0 * (e(m) * e(n)).sqrt())
}

fn factor_table() -> Check {
    let spec = rotator_spectrum(10.0, 64).map_err(err)?;
    let f = charge_factors(&spec, 64).map_err(err)?;
    for m in 0..64 {
        require(f.epsilon(m, m) == 1.0, format!("ε({m},{m}) = {}", f.epsilon(m, m)))?;
        for n in 0..64 {
            require(f.epsilon(m, n) == f.epsilon(n, m), format!("ε not symmetric at ({m},{n})"))?;
        }
    }
    let e02 = f.epsilon(0, 2);
    let oracle = epsilon_oracle(10.0, 0, 2);
    require((e02 - oracle).abs() < 1e-6, format!("ε(0,2) = {e02}, oracle {oracle}"))?;
    let hyp = f.hyperbolic_residual();
    require(hyp < 1e-12, format!("ε² − χ² − 1 residual {hyp:e}"))?;
    Ok(format!("ε(0,2) = {e02:.7}, hyperbolic residual {hyp:.1e}"))
}

fn basis_orthonormality() -> Check {
    let g = rot_grid(6.0, 256);
    let mut fields = Vec::new();
    for n in 0..=6 {
        for m in 0..=6 {
            fields.push(((n, m), wigner_basis_element(n, m, &g).map_err(err)?));
        }
    }
    let (mut ortho, mut trace) = (0.0f64, 0.0f64);
    for (a, fa) in &fields {
        let t = fa.integrate() - c(if a.0 == a.1 { 1.0 } else { 0.0 });
        trace = trace.max(t.norm());
        for (b, fb) in &fields {
            // inner() conjugates its argument.
            let v = fa.inner(fb).map_err(err)? * (2.0 * PI);
            ortho = ortho.max((v - c(if a == b { 1.0 } else { 0.0 })).norm());
        }
    }
    require(ortho < 1e-6, format!("orthonormality error {ortho:e}"))?;
    require(trace < 1e-8, format!("trace error {trace:e}"))?;
    Ok(format!("orthonormality {ortho:.1e}, trace {trace:.1e}"))
}

fn gaussian(g: PhaseGrid, hbar: f64, p0: f64, q0: f64, w: f64, k: f64) -> SymbolField {
    let f = ComplexField::from_fn(g, move |p, q| {
        let r2 = ((p - p0).powi(2) + (q - q0).powi(2)) / (w * w);
        Complex64::from_polar((-r2).exp(), k * (p - q))
    });
    SymbolField::new(f, hbar).unwrap()
}

fn star_algebra() -> Check {
    let g = rot_grid(3.0, 16);
    for hbar in [1.0, 0.5, 0.25] {
        let q = SymbolField::analytic_real(g, hbar, |_, q| q).map_err(err)?;
        let p = SymbolField::analytic_real(g, hbar, |p, _| p).map_err(err)?;
        // Linear symbols do not decay, so this uses the exact series backend.
        let qp = star(&q, &p, &StarBackend::TruncatedSeries { order: 4 }).map_err(err)?;
        let d = qp
            .values()
            .indexed_iter()
            .map(|((i, j), v)| (v - Complex64::new(g.q(j) * g.p(i), 0.5 * hbar)).norm())
            .fold(0.0, f64::max);
        require(d < 1e-12, format!("q⋆p off by {d:e} at ħ = {hbar}"))?;
    }

    let g = rot_grid(8.0, 64);
    let backend = StarBackend::IntegralFft { padding: 2 };
    let mut rng = StdRng::seed_from_u64(7);
    let mut assoc = 0.0f64;
    for _ in 0..3 {
        let mut random = || {
            gaussian(
                g,
                1.0,
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(0.8..1.5),
                rng.gen_range(-1.0..1.0),
            )
        };
        let (a, b, cc) = (random(), random(), random());
        let left = star(&star(&a, &b, &backend).map_err(err)?, &cc, &backend).map_err(err)?;
        let right = star(&a, &star(&b, &cc, &backend).map_err(err)?, &backend).map_err(err)?;
        assoc = assoc.max(left.field.l2_distance(&right.field).map_err(err)? / left.field.l2_norm());
    }
    require(assoc < 1e-6, format!("associativity {assoc:e}"))?;

    let mut errs = Vec::new();
    for hbar in [1.0, 0.5, 0.25] {
        let g = rot_grid(10.0, 80);
        let a = gaussian(g, hbar, 0.5, -0.3, 2.0, 0.0);
        let b = gaussian(g, hbar, -0.6, 0.4, 1.8, 0.0);
        let m = moyal_bracket(&a, &b, &backend).map_err(err)?;
        let pb = poisson_bracket(&a, &b).map_err(err)?;
        errs.push(m.field.max_distance(&pb.field).map_err(err)?);
    }
    let orders = [(errs[0] / errs[1]).log2(), (errs[1] / errs[2]).log2()];
    require(
        orders.iter().all(|o| (o - 2.0).abs() < 0.2),
        format!("Moyal → Poisson orders {orders:?}"),
    )?;
    Ok(format!(
        "associativity {assoc:.1e}, convergence orders {:.3}, {:.3}",
        orders[0], orders[1]
    ))
}

fn star_square_root() -> Check {
    let g = rot_grid(1.0, 32);
    let h = rotator_hamiltonian_symbol(0.1, &g, &HamiltonianOptions::default()).map_err(err)?;
    let mut expansion = 0.0f64;
    for ((i, j), v) in h.values().indexed_iter() {
        let r2 = g.p(i).powi(2) + g.q(j).powi(2);
        if r2 <= 1.0 {
            let e = expansion_value(0.1, r2, 3);
            expansion = expansion.max((v.re - e).abs() / e);
        }
    }
    require(expansion < 1e-5, format!("expansion mismatch {expansion:e}"))?;

    let g = rot_grid(6.0, 64);
    let opts = HamiltonianOptions {
        n_levels: 160,
        ..Default::default()
    };
    let e = rotator_hamiltonian_symbol(0.3, &g, &opts).map_err(err)?;
    let engine = StarEngine::new(&g, 1.0, 2).map_err(err)?;
    let pe = engine.prepare(&e, false).map_err(err)?;
    let mut residual = 0.0f64;
    for n in 0..=4 {
        let w = SymbolField::new(wigner_basis_element(n, n, &g).map_err(err)?, 1.0).map_err(err)?;
        let ew = engine.product(&pe, &engine.prepare(&w, false).map_err(err)?).map_err(err)?;
        let expect = w.field.scale(c(rotator_level(0.3, n)));
        residual = residual.max(ew.field.l2_distance(&expect).map_err(err)? / w.field.l2_norm());
    }
    require(residual < 1e-4, format!("star-eigenvalue residual {residual:e}"))?;
    Ok(format!("expansion {expansion:.1e}, eigen residual {residual:.1e}"))
}

fn rotational_asymmetry(m: &CoefficientMatrices, f: &ChargeFactor, r_max: f64) -> Result<f64, String> {
    let mut worst = 0.0f64;
    for k in 1..=40 {
        let r = r_max * k as f64 / 40.0;
        let reference = wigner_value_at(m, f, Component::EvenPlus, 0.0, r).map_err(err)?;
        for a in 1..64 {
            let phi = 2.0 * PI * a as f64 / 64.0;
            let v = wigner_value_at(m, f, Component::EvenPlus, r * phi.sin(), r * phi.cos()).map_err(err)?;
            worst = worst.max((v - reference).norm());
        }
    }
    Ok(worst)
}

fn interference_panels() -> Check {
    let g = rot_grid(5.0, 200);
    let spec = rotator_spectrum(10.0, 3).map_err(err)?;
    let standard = charge_factors(&spec, 3).map_err(err)?;
    let nonlocal = ChargeFactor::nonlocal(3);
    let mixed = CoefficientMatrices::mixture(&[(0.5, levels(3, &[(0, 1.0)])), (0.5, levels(3, &[(2, 1.0)]))])
        .map_err(err)?;
    let sup = levels(3, &[(0, 1.0), (2, 1.0)]);
    let panel = |m: &CoefficientMatrices, f: &ChargeFactor| assemble_wigner(m, f, &g, false).map(|w| w.even_plus);
    let w_mixed = panel(&mixed, &standard).map_err(err)?;
    let w_nl = panel(&sup, &nonlocal).map_err(err)?;
    let w_std = panel(&sup, &standard).map_err(err)?;
    let mut norm = 0.0f64;
    for w in [&w_mixed, &w_nl, &w_std] {
        norm = norm.max((w.integrate() - c(1.0)).norm());
    }
    require(norm < 1e-6, format!("normalization error {norm:e}"))?;
    let asym = rotational_asymmetry(&mixed, &standard, 5.0)?;
    require(asym < 1e-8, format!("mixed panel asymmetry {asym:e}"))?;
    let ratio = w_std.sub(&w_mixed).map_err(err)?.max_abs() / w_nl.sub(&w_mixed).map_err(err)?.max_abs();
    let eps = epsilon_oracle(10.0, 0, 2);
    require((ratio - eps).abs() < 1e-6, format!("amplitude ratio {ratio}, ε(0,2) {eps}"))?;
    Ok(format!("ratio {ratio:.7}, asymmetry {asym:.1e}, normalization {norm:.1e}"))
}

fn free_packet() -> Check {
    let g = PhaseGrid::new((-60.0, 60.0), (-3.0, 3.0), 256, 240, UnitsTag::FreeParticle).map_err(err)?;
    let psi = gaussian_packet(&g, 0.0, 8.0).map_err(err)?;
    let w = free_wigner_pair(&psi, &g, Kernel::Epsilon).map_err(err)?;
    let imag = w.max_abs_imag() / w.max_abs();
    require(imag < 1e-10, format!("relative imaginary part {imag:e}"))?;
    let min = w.min_real();
    require(min < -1e-6 * w.max_abs(), format!("minimum {min:e} is not negative"))?;

    // Narrow packet: p-window of ±6 widths, q-window of ±6 inverse widths.
    let g = PhaseGrid::new((-0.06, 0.06), (-600.0, 600.0), 128, 256, UnitsTag::FreeParticle).map_err(err)?;
    let psi = gaussian_packet(&g, 0.0, 0.01).map_err(err)?;
    let we = free_wigner_pair(&psi, &g, Kernel::Epsilon).map_err(err)?;
    let wu = free_wigner_pair(&psi, &g, Kernel::Unit).map_err(err)?;
    let reduce = we.l2_distance(&wu).map_err(err)? / wu.l2_norm();
    require(reduce < 1e-4, format!("Δp = 0.01 deviation from unit kernel {reduce:e}"))?;
    Ok(format!("min {min:.3}, imag {imag:.1e}, narrow-packet deviation {reduce:.1e}"))
}

fn evolution_equivalence() -> Check {
    let lambda = 0.3;
    let g = rot_grid(6.0, 64);
    let opts = HamiltonianOptions {
        n_levels: 160,
        ..Default::default()
    };
    let h = rotator_hamiltonian_symbol(lambda, &g, &opts).map_err(err)?;
    let spec = rotator_spectrum(lambda, 3).map_err(err)?;
    let f = charge_factors(&spec, 3).map_err(err)?;
    let m = levels(3, &[(0, 1.0), (2, 1.0)]);
    let w = assemble_wigner(&m, &f, &g, true).map_err(err)?;
    let t = 0.2;
    let plan = EvolutionPlan {
        method: EvolutionMethod::GridRk4,
        dt: 1e-3,
        t_final: t,
        backend: StarBackend::IntegralFft { padding: 2 },
    };
    let out = evolve_grid(&w, &h, &plan).map_err(err)?;
    let exact = assemble_wigner(&evolve_spectral(&m, &spec, t).map_err(err)?, &f, &g, true).map_err(err)?;
    let l2 = out.components.even_plus.l2_distance(&exact.even_plus).map_err(err)? / exact.even_plus.l2_norm();
    require(l2 < 1e-4, format!("grid vs spectral relative L2 {l2:e}"))?;
    let drift = out.diagnostics.norm_drift;
    require(drift < 1e-6, format!("norm drift {drift:e}"))?;

    // A full oscillation period is ~39 time units, far beyond the grid run,
    // so the frequency is read off the exact coefficient evolution.
    let dt = 0.1;
    let times: Vec<f64> = (0..4096).map(|k| k as f64 * dt).collect();
    let big = rotator_spectrum(lambda, 3).map_err(err)?;
    let series = means_timeseries(&m, &f, &big, Observable::Position, 2, &times).map_err(err)?;
    let (omega, bin) = dominant_angular_frequency(&series, dt).map_err(err)?;
    let expect = interference_frequency(&big, 2, 0).map_err(err)?;
    require((omega - expect).abs() <= bin, format!("frequency {omega} vs {expect} (bin {bin})"))?;
    Ok(format!("L2 {l2:.1e}, drift {drift:.1e}, ω {omega:.4} vs {expect:.4} ± {bin:.4}"))
}

fn constraints() -> Check {
    let spec = rotator_spectrum(10.0, 4).map_err(err)?;
    let f = charge_factors(&spec, 4).map_err(err)?;
    let two_branch = ChargeStateVector::new(
        vec![c(0.5), c(0.0), Complex64::new(0.2, -0.1), c(0.0)],
        vec![c(0.0), Complex64::new(0.3, 0.4), c(0.0), c(-0.2)],
    )
    .map_err(err)?
    .normalized()
    .map_err(err)?;
    let pure = [
        levels(4, &[(0, 1.0), (2, 1.0)]),
        levels(4, &[(1, 0.6), (3, 0.8)]),
        CoefficientMatrices::from_state(&two_branch),
    ];
    let mut worst_pure = 0.0f64;
    for m in &pure {
        let r = purity_criterium(&m.weighted(&f).map_err(err)?, &f, 1e-8).map_err(err)?;
        worst_pure = worst_pure.max(r.max_minor);
    }
    require(worst_pure < 1e-12, format!("pure-state minor {worst_pure:e}"))?;
    let mixed = CoefficientMatrices::mixture(&[(0.5, levels(4, &[(0, 1.0)])), (0.5, levels(4, &[(2, 1.0)]))])
        .map_err(err)?;
    let mixed_minor = purity_criterium(&mixed.weighted(&f).map_err(err)?, &f, 1e-8).map_err(err)?.max_minor;
    require((mixed_minor - 0.25).abs() < 1e-12, format!("mixture minor {mixed_minor}"))?;
    let constraint = even_odd_constraint(&pure[2]);
    require(constraint < 1e-12, format!("even-odd constraint {constraint:e}"))?;
    let g = rot_grid(6.0, 96);
    let res = assemble_wigner(&pure[2], &f, &g, true).map_err(err)?.residuals().map_err(err)?;
    require(
        res.reality < 1e-10 && res.conjugacy < 1e-10,
        format!("reality {:e}, conjugacy {:e}", res.reality, res.conjugacy),
    )?;
    Ok(format!(
        "pure minor {worst_pure:.1e}, mixture minor {mixed_minor}, constraint {constraint:.1e}, reality {:.1e}, conjugacy {:.1e}",
        res.reality, res.conjugacy
    ))
}

/// Rest energies in eV, in the same `name = value` form the CLI reads.
const MASSES: &str = "pion_charged = 139.57039e6\nelectron = 0.51099895e6\n";

fn compton_times() -> Check {
    let mut parts = Vec::new();
    for line in MASSES.lines() {
        let (name, value) = line.split_once('=').ok_or("malformed mass line")?;
        let ev: f64 = value.trim().parse().map_err(err)?;
        parts.push((name.trim().to_string(), format!("{:.1e}", compton_time(ev).map_err(err)?)));
    }
    let expect = [("pion_charged", "4.7e-24"), ("electron", "1.3e-21")];
    for ((name, got), (en, want)) in parts.iter().zip(expect) {
        require(name == en && got == want, format!("{name}: {got} s, expected {want} s"))?;
    }
    Ok(parts.iter().map(|(n, t)| format!("{n} {t} s")).collect::<Vec<_>>().join(", "))
}

fn main() {
    let criteria: [(&str, fn() -> Check, Duration); 9] = [
        ("1 charge factor table", factor_table, Duration::from_secs(1)),
        ("2 Wigner basis", basis_orthonormality, Duration::from_secs(10)),
        ("3 star algebra", star_algebra, Duration::from_secs(30)),
        ("4 star square root", star_square_root, Duration::from_secs(60)),
        ("5 interference panels", interference_panels, Duration::from_secs(20)),
        ("6 free packet kernels", free_packet, Duration::from_secs(20)),
        ("7 evolution equivalence", evolution_equivalence, Duration::from_secs(120)),
        ("8 constraints", constraints, Duration::from_secs(5)),
        ("9 Compton times", compton_times, Duration::from_secs(1)),
    ];
    let mut failed = 0;
    for (name, check, budget) in criteria {
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let result = result.and_then(|detail| {
            if elapsed <= budget {
                Ok(detail)
            } else {
                Err(format!("{detail}; took {elapsed:.2?}, budget {budget:?}"))
            }
        });
        match result {
            Ok(detail) => println!("PASS criterion {name} ({elapsed:.2?}): {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {name} ({elapsed:.2?}): {detail}");
            }
        }
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
