//! Sweep orchestration: one subdirectory per g_AB point, deterministic
//! delimited-text outputs, and per-point crash containment.

use std::path::{Path, PathBuf};
use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;

use quench_core::basis::{DeltaIntegralTable, HoParams};
use quench_core::fock::{ManyBodyBasis, Parity};
use quench_core::hamiltonian::{self, CouplingParams};
use quench_core::observables::{self, Rspdm};
use quench_core::quench::{self, InitialState, QuenchSpec};
use quench_core::solver;

use crate::config::RunConfig;
use crate::manifest::{self, Manifest};

#[derive(Debug)]
pub struct RunOutcome {
    pub points_ok: usize,
    pub points_failed: usize,
    pub out_dir: PathBuf,
}

fn fmt(x: f64) -> String {
    format!("{x:.11e}")
}

/// Executes a validated config. Returns Err only for setup failures that
/// precede the sweep; per-point failures are contained and counted.
pub fn run(config: &RunConfig) -> Result<RunOutcome, String> {
    let mut cfg = config.clone();
    cfg.resolve();
    let (errors, _) = cfg.validate();
    if let Some(first) = errors.first() {
        return Err(format!("invalid-config {first}"));
    }
    std::fs::create_dir_all(&cfg.out_dir)
        .map_err(|e| format!("output-dir {}: {e}", cfg.out_dir.display()))?;

    let t0 = Instant::now();
    let basis = ManyBodyBasis::enumerate(cfg.n_max, cfg.n_tot).map_err(|e| e.to_string())?;
    let params = HoParams::with_quad_order(cfg.n_max, cfg.quad_order)
        .map_err(|e| e.to_string())?;
    let table = DeltaIntegralTable::build(params).map_err(|e| e.to_string())?;
    let setup_ms = t0.elapsed().as_millis();

    let t1 = Instant::now();
    let initial =
        quench::prepare_initial(&basis, &table, cfg.g_a).map_err(|e| e.to_string())?;
    let initial_ms = t1.elapsed().as_millis();

    // the run manifest goes out before any point data exists
    // out_dir is omitted so identical configs give byte-identical trees
    // regardless of where they are written
    let echo: String = cfg
        .echo()
        .lines()
        .filter(|l| !l.starts_with("out_dir"))
        .map(|l| format!("{l}\n"))
        .collect();
    let mut run_manifest = Manifest::new("run");
    run_manifest.push_block("config", &echo);
    run_manifest.push("basis.dim_total", basis.len());
    run_manifest.push("basis.dim_even", basis.block_dim(Parity::Even));
    run_manifest.push("basis.dim_odd", basis.block_dim(Parity::Odd));
    run_manifest.push("sweep.points", cfg.g_ab.len());
    run_manifest.push_real("initial.e0", initial.energy);
    run_manifest.push("subsystem_le.figure_variant", "uhlmann");
    eprintln!("setup {setup_ms} ms, initial state {initial_ms} ms");
    run_manifest
        .write(&cfg.out_dir.join("manifest.txt"))
        .map_err(|e| format!("manifest: {e}"))?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| format!("thread-pool: {e}"))?;
    let results: Vec<bool> = pool.install(|| {
        cfg.g_ab
            .par_iter()
            .enumerate()
            .map(|(i, &g_ab)| {
                let dir = cfg.out_dir.join(format!("point_{i:03}"));
                if let Err(e) = std::fs::create_dir_all(&dir) {
                    eprintln!("point_{i:03}: {e}");
                    return false;
                }
                let outcome = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| {
                    run_point(&cfg, &basis, &table, &initial, g_ab, &dir)
                }));
                let flat = match outcome {
                    Ok(Ok(())) => Ok(()),
                    Ok(Err(e)) => Err(e),
                    Err(p) => Err(format!(
                        "panic: {}",
                        p.downcast_ref::<&str>().copied().unwrap_or("opaque payload")
                    )),
                };
                match flat {
                    Ok(()) => true,
                    Err(msg) => {
                        let _ = manifest::write_atomic(
                            &dir.join("error.txt"),
                            &format!("error {msg}\n"),
                        );
                        eprintln!("point_{i:03}: {msg}");
                        false
                    }
                }
            })
            .collect()
    });

    let ok = results.iter().filter(|&&b| b).count();
    Ok(RunOutcome {
        points_ok: ok,
        points_failed: results.len() - ok,
        out_dir: cfg.out_dir.clone(),
    })
}

/// Everything produced at one sweep point; computed fully in memory, then
/// written manifest-first so data files never exist without one.
fn run_point(
    cfg: &RunConfig,
    basis: &ManyBodyBasis,
    table: &DeltaIntegralTable,
    initial: &InitialState,
    g_ab: f64,
    dir: &Path,
) -> Result<(), String> {
    let couplings = CouplingParams::new(cfg.g_a, g_ab).map_err(|e| e.to_string())?;
    let t0 = Instant::now();
    let block = hamiltonian::assemble_block(basis, Parity::Even, couplings, table)
        .map_err(|e| e.to_string())?;
    let assemble_ms = t0.elapsed().as_millis();

    let t1 = Instant::now();
    let eigen = solver::diagonalize(&block).map_err(|e| e.to_string())?;
    drop(block);
    let diag_ms = t1.elapsed().as_millis();

    let q = quench::project(initial, &eigen).map_err(|e| e.to_string())?;
    let spec = QuenchSpec {
        g_a: cfg.g_a,
        g_ab_final: g_ab,
        t_max: cfg.t_max,
        dt: cfg.dt,
    };
    let e_max = *q.energies.last().expect("nonempty spectrum");
    spec.check_nyquist(q.e_0, e_max).map_err(|e| e.to_string())?;
    let weight = q.weight_sum();
    if (weight - 1.0).abs() > 1e-10 {
        return Err(format!("overlap completeness violated: sum {weight}"));
    }

    let mut m = Manifest::new("point");
    m.push_real("point.g_ab", g_ab);
    m.push("basis.dim_even", eigen.dim());
    m.push_real("solver.residual_norm", eigen.residual_norm);
    m.push_real("quench.e0", q.e_0);
    m.push_real("quench.weight_sum", weight);
    m.push_real("quench.participation", q.participation());
    m.push_real("nyquist.spread", e_max - q.e_0);
    m.push_real("nyquist.dt", cfg.dt);
    m.push("subsystem_le.figure_variant", "uhlmann");

    let mut files: Vec<(PathBuf, String)> = Vec::new();
    let header = |name: &str| {
        format!(
            "# {name}\n# manifest manifest.txt\n# g_ab {}\n# g_a {}\n",
            fmt(g_ab),
            fmt(cfg.g_a)
        )
    };

    if cfg.le {
        let mut body = header("loschmidt echo");
        body.push_str("# columns t L re_nu im_nu\n");
        for t in spec.time_grid() {
            let nu = quench::loschmidt_amplitude(&q, t);
            body.push_str(&format!(
                "{} {} {} {}\n",
                fmt(t),
                fmt(nu.norm_sqr()),
                fmt(nu.re),
                fmt(nu.im)
            ));
        }
        files.push((dir.join("le.txt"), body));
    }

    let need_states =
        cfg.densities || cfg.entropy || cfg.natural_orbitals || cfg.subsystem_le;
    if need_states {
        let obs_times: Vec<f64> = (0..cfg.obs_times)
            .map(|i| cfg.t_max * i as f64 / (cfg.obs_times - 1) as f64)
            .collect();
        let x_grid: Vec<f64> = (0..cfg.x_points)
            .map(|i| {
                -cfg.x_half_width
                    + 2.0 * cfg.x_half_width * i as f64 / (cfg.x_points - 1) as f64
            })
            .collect();
        // the figure window is a display choice; the normalization check
        // needs a grid covering the full basis support (classical turning
        // point of the highest orbital, plus tail room)
        let check_half_width = (2.0 * cfg.n_max as f64 + 1.0).sqrt() + 3.0;
        let check_points = (100.0 * check_half_width) as usize | 1;
        let check_grid: Vec<f64> = (0..check_points)
            .map(|i| {
                -check_half_width
                    + 2.0 * check_half_width * i as f64 / (check_points - 1) as f64
            })
            .collect();

        let psi0: Vec<Complex64> =
            initial.psi.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        let rho_a0 = observables::rspdm_a(&psi0, basis).map_err(|e| e.to_string())?;
        let rho_b0 = observables::rspdm_b(&psi0, basis).map_err(|e| e.to_string())?;
        // reduced states of the post-quench ground state drive the literal
        // subsystem-echo formula
        let ground: Vec<Complex64> = (0..eigen.dim())
            .map(|i| Complex64::new(eigen.vectors[(i, 0)], 0.0))
            .collect();
        let echo_a = observables::SubsystemEcho::new(
            &rho_a0,
            &observables::rspdm_a(&ground, basis).map_err(|e| e.to_string())?,
        )
        .map_err(|e| e.to_string())?;
        let echo_b = observables::SubsystemEcho::new(
            &rho_b0,
            &observables::rspdm_b(&ground, basis).map_err(|e| e.to_string())?,
        )
        .map_err(|e| e.to_string())?;

        let mut s_a = Vec::new();
        let mut s_b = Vec::new();
        let mut occ_rows = Vec::new();
        let mut sle_rows = Vec::new();
        let mut dens_a: Vec<Vec<f64>> = Vec::new();
        let mut dens_b: Vec<Vec<f64>> = Vec::new();
        for &t in &obs_times {
            let psi = quench::evolve_state(&q, &eigen, t);
            let rho_a = observables::rspdm_a(&psi, basis).map_err(|e| e.to_string())?;
            let rho_b = observables::rspdm_b(&psi, basis).map_err(|e| e.to_string())?;
            validate_pair(&rho_a, &rho_b, t)?;
            if cfg.entropy {
                s_a.push(observables::vne(&rho_a).map_err(|e| e.to_string())?);
                s_b.push(observables::vne(&rho_b).map_err(|e| e.to_string())?);
            }
            if cfg.natural_orbitals {
                let no_a = observables::natural_orbitals(&rho_a).map_err(|e| e.to_string())?;
                let no_b = observables::natural_orbitals(&rho_b).map_err(|e| e.to_string())?;
                occ_rows.push([
                    no_a.occupations[0],
                    no_a.occupations[1],
                    no_b.occupations[0],
                    no_b.occupations[1],
                ]);
            }
            if cfg.subsystem_le {
                let f_a =
                    observables::uhlmann_fidelity(&rho_a0, &rho_a).map_err(|e| e.to_string())?;
                let f_b =
                    observables::uhlmann_fidelity(&rho_b0, &rho_b).map_err(|e| e.to_string())?;
                sle_rows.push([echo_a.literal(t), f_a, echo_b.literal(t), f_b]);
            }
            if cfg.densities {
                let wa = observables::density(&rho_a, &check_grid).map_err(|e| e.to_string())?;
                let wb = observables::density(&rho_b, &check_grid).map_err(|e| e.to_string())?;
                validate_density(&wa, 2.0, t)?;
                validate_density(&wb, 1.0, t)?;
                let da = observables::density(&rho_a, &x_grid).map_err(|e| e.to_string())?;
                let db = observables::density(&rho_b, &x_grid).map_err(|e| e.to_string())?;
                dens_a.push(da.values);
                dens_b.push(db.values);
            }
        }

        if cfg.entropy {
            let mut body = header("entanglement entropy, bits");
            body.push_str("# columns t S_A S_B (S_B equals the pair-impurity entropy S_AB)\n");
            for (i, &t) in obs_times.iter().enumerate() {
                body.push_str(&format!("{} {} {}\n", fmt(t), fmt(s_a[i]), fmt(s_b[i])));
            }
            files.push((dir.join("entropy.txt"), body));
            let window = (1.25 * std::f64::consts::PI, 1.75 * std::f64::consts::PI);
            let avg_a = observables::time_averaged_entropy(&obs_times, &s_a, window.0, window.1)
                .map_err(|e| e.to_string())?;
            let avg_b = observables::time_averaged_entropy(&obs_times, &s_b, window.0, window.1)
                .map_err(|e| e.to_string())?;
            m.push_real("entropy.window_lo", window.0);
            m.push_real("entropy.window_hi", window.1);
            m.push_real("entropy.avg_s_a", avg_a);
            m.push_real("entropy.avg_s_b", avg_b);
        }
        if cfg.natural_orbitals {
            let mut body = header("natural orbital occupations");
            body.push_str("# columns t lambda0_A lambda1_A lambda0_B lambda1_B\n");
            for (i, &t) in obs_times.iter().enumerate() {
                let r = occ_rows[i];
                body.push_str(&format!(
                    "{} {} {} {} {}\n",
                    fmt(t),
                    fmt(r[0]),
                    fmt(r[1]),
                    fmt(r[2]),
                    fmt(r[3])
                ));
            }
            files.push((dir.join("occupations.txt"), body));
        }
        if cfg.subsystem_le {
            let mut body = header("subsystem Loschmidt echoes");
            body.push_str(
                "# columns t L_A_literal L_A_fidelity L_B_literal L_B_fidelity\n",
            );
            for (i, &t) in obs_times.iter().enumerate() {
                let r = sle_rows[i];
                body.push_str(&format!(
                    "{} {} {} {} {}\n",
                    fmt(t),
                    fmt(r[0]),
                    fmt(r[1]),
                    fmt(r[2]),
                    fmt(r[3])
                ));
            }
            files.push((dir.join("subsystem_le.txt"), body));
        }
        if cfg.densities {
            for (species, rows) in [("A", &dens_a), ("B", &dens_b)] {
                let mut body = header(&format!("density of species {species}"));
                body.push_str("# columns x then one column per output time\n# times");
                for &t in &obs_times {
                    body.push(' ');
                    body.push_str(&fmt(t));
                }
                body.push('\n');
                for (ix, &x) in x_grid.iter().enumerate() {
                    body.push_str(&fmt(x));
                    for row in rows.iter() {
                        body.push(' ');
                        body.push_str(&fmt(row[ix]));
                    }
                    body.push('\n');
                }
                files.push((dir.join(format!("density_{species}.txt")), body));
            }
        }
    }

    if cfg.spectrum {
        let omega: Vec<f64> = (0..cfg.omega_points)
            .map(|i| {
                cfg.omega_min
                    + (cfg.omega_max - cfg.omega_min) * i as f64
                        / (cfg.omega_points - 1) as f64
            })
            .collect();
        let s = observables::spectral_function(&q, cfg.eta, &omega)
            .map_err(|e| e.to_string())?;
        // the sum rule is a full-line statement; check it on a wide internal
        // grid so the figure window is free to crop Lorentzian tails
        // tail mass beyond distance d is eta/(pi d) per side, so the margin
        // must be ~eta/(pi*tol); 1500*eta leaves ~4e-4 total in the tails
        let lo = (q.e_0 - e_max).min(cfg.omega_min) - 1500.0 * cfg.eta;
        let hi = cfg.omega_max.max(0.0) + 1500.0 * cfg.eta;
        let step = cfg.eta / 3.0;
        let wide: Vec<f64> = (0..=((hi - lo) / step) as usize)
            .map(|i| lo + i as f64 * step)
            .collect();
        let sum_rule = observables::spectral_function(&q, cfg.eta, &wide)
            .map_err(|e| e.to_string())?
            .sum_rule();
        if (sum_rule - 1.0).abs() > 1e-3 {
            return Err(format!(
                "spectral sum rule violated: {sum_rule} (widen the omega window)"
            ));
        }
        m.push_real("spectrum.eta", cfg.eta);
        m.push_real("spectrum.sum_rule", sum_rule);
        m.push_real("spectrum.peak_omega", s.peak_position());
        let mut body = header("spectral function");
        body.push_str("# columns omega A\n");
        for (w, v) in s.omega.iter().zip(&s.values) {
            body.push_str(&format!("{} {}\n", fmt(*w), fmt(*v)));
        }
        files.push((dir.join("spectrum.txt"), body));
    }

    eprintln!(
        "g_ab = {g_ab}: assemble {assemble_ms} ms, diagonalize {diag_ms} ms"
    );
    m.write(&dir.join("manifest.txt")).map_err(|e| e.to_string())?;
    for (path, body) in files {
        manifest::write_atomic(&path, &body).map_err(|e| e.to_string())?;
    }
    Ok(())
}

fn validate_pair(rho_a: &Rspdm, rho_b: &Rspdm, t: f64) -> Result<(), String> {
    rho_a.validate().map_err(|e| format!("rho_A at t = {t}: {e}"))?;
    rho_b.validate().map_err(|e| format!("rho_B at t = {t}: {e}"))
}

fn validate_density(
    profile: &observables::DensityProfile,
    target: f64,
    t: f64,
) -> Result<(), String> {
    let n = profile.norm();
    if (n - target).abs() > 1e-6 {
        return Err(format!(
            "density of {} at t = {t} integrates to {n}, expected {target}",
            profile.species.label()
        ));
    }
    let len = profile.values.len();
    for i in 0..len / 2 {
        if (profile.values[i] - profile.values[len - 1 - i]).abs() > 1e-8 {
            return Err(format!(
                "density of {} at t = {t} is not even in x",
                profile.species.label()
            ));
        }
    }
    Ok(())
}
