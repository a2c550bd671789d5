//! Browser bindings for the quench engine at interactive basis sizes.
//! The page holds one `Engine` per session; every exported call returns a
//! flat Float64Array so the JS side needs no marshalling beyond slicing.

use num_complex::Complex64;
use wasm_bindgen::prelude::*;

use quench_core::basis::{DeltaIntegralTable, HoParams};
use quench_core::fock::{ManyBodyBasis, Parity};
use quench_core::hamiltonian::{self, CouplingParams};
use quench_core::observables;
use quench_core::quench::{self, InitialState, QuenchResult};
use quench_core::solver::{self, EigenSystem};

/// Interactive sizes only: dense diagonalization above this cutoff would
/// freeze the page.
const MAX_N_TOT: usize = 20;

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

#[wasm_bindgen]
pub struct Engine {
    basis: ManyBodyBasis,
    table: DeltaIntegralTable,
    g_a: f64,
    initial: InitialState,
    post: Option<(EigenSystem, QuenchResult)>,
}

#[wasm_bindgen]
impl Engine {
    /// Builds the basis, integral table, and pre-quench ground state.
    #[wasm_bindgen(constructor)]
    pub fn new(n_tot: usize, g_a: f64) -> Result<Engine, String> {
        if n_tot == 0 || n_tot > MAX_N_TOT {
            return Err(err(format!("n_tot must be in 1..={MAX_N_TOT}")));
        }
        let basis = ManyBodyBasis::enumerate(n_tot, n_tot).map_err(err)?;
        let table = DeltaIntegralTable::build(HoParams::new(n_tot).map_err(err)?).map_err(err)?;
        let initial = quench::prepare_initial(&basis, &table, g_a).map_err(err)?;
        Ok(Engine { basis, table, g_a, initial, post: None })
    }

    /// Diagonalizes the post-quench Hamiltonian and projects the initial
    /// state; must be called before any observable.
    pub fn quench(&mut self, g_ab: f64) -> Result<(), String> {
        let params = CouplingParams::new(self.g_a, g_ab).map_err(err)?;
        let block =
            hamiltonian::assemble_block(&self.basis, Parity::Even, params, &self.table)
                .map_err(err)?;
        let eigen = solver::diagonalize(&block).map_err(err)?;
        let q = quench::project(&self.initial, &eigen).map_err(err)?;
        self.post = Some((eigen, q));
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.basis.block_dim(Parity::Even)
    }

    fn post(&self) -> Result<&(EigenSystem, QuenchResult), String> {
        self.post.as_ref().ok_or_else(|| err("call quench(g_ab) first"))
    }

    /// L(t) on a uniform grid over [0, t_max]; returns `points` values.
    pub fn loschmidt(&self, t_max: f64, points: usize) -> Result<Vec<f64>, String> {
        if points < 2 {
            return Err(err("need at least 2 points"));
        }
        let (_, q) = self.post()?;
        let dt = t_max / (points - 1) as f64;
        Ok((0..points).map(|i| quench::loschmidt_echo(q, i as f64 * dt)).collect())
    }

    /// Densities at time t on x in [-half_width, half_width]:
    /// [x..., rho_A..., rho_B...], 3 * points values.
    pub fn densities(
        &self,
        t: f64,
        half_width: f64,
        points: usize,
    ) -> Result<Vec<f64>, String> {
        if points < 2 {
            return Err(err("need at least 2 points"));
        }
        let (eigen, q) = self.post()?;
        let psi = quench::evolve_state(q, eigen, t);
        let h = 2.0 * half_width / (points - 1) as f64;
        let x: Vec<f64> = (0..points).map(|i| -half_width + i as f64 * h).collect();
        let rho_a = observables::rspdm_a(&psi, &self.basis).map_err(err)?;
        let rho_b = observables::rspdm_b(&psi, &self.basis).map_err(err)?;
        let mut out = x.clone();
        out.extend(observables::density(&rho_a, &x).map_err(err)?.values);
        out.extend(observables::density(&rho_b, &x).map_err(err)?.values);
        Ok(out)
    }

    /// A(omega) over [omega_min, omega_max]: [omega..., values...].
    pub fn spectrum(
        &self,
        eta: f64,
        omega_min: f64,
        omega_max: f64,
        points: usize,
    ) -> Result<Vec<f64>, String> {
        if points < 2 {
            return Err(err("need at least 2 points"));
        }
        let (_, q) = self.post()?;
        let step = (omega_max - omega_min) / (points - 1) as f64;
        let omega: Vec<f64> = (0..points).map(|i| omega_min + i as f64 * step).collect();
        let s = observables::spectral_function(q, eta, &omega).map_err(err)?;
        let mut out = omega;
        out.extend(s.values);
        Ok(out)
    }

    /// Single-particle entropies [S_A, S_B] in bits at time t.
    pub fn entropies(&self, t: f64) -> Result<Vec<f64>, String> {
        let (eigen, q) = self.post()?;
        let psi: Vec<Complex64> = quench::evolve_state(q, eigen, t);
        let s_a = observables::vne(&observables::rspdm_a(&psi, &self.basis).map_err(err)?)
            .map_err(err)?;
        let s_b = observables::vne(&observables::rspdm_b(&psi, &self.basis).map_err(err)?)
            .map_err(err)?;
        Ok(vec![s_a, s_b])
    }
}
