//! Sudden-quench protocol: prepare the decoupled ground state, project onto
//! the post-quench eigenbasis, evolve, and evaluate the Loschmidt amplitude.

use num_complex::Complex64;

use crate::basis::DeltaIntegralTable;
use crate::error::{Error, Result};
use crate::fock::{ManyBodyBasis, Parity};
use crate::hamiltonian::{self, CouplingParams};
use crate::solver::{self, EigenSystem};

/// Quench protocol parameters. Times in units of 1/ω.
#[derive(Debug, Clone, Copy)]
pub struct QuenchSpec {
    pub g_a: f64,
    pub g_ab_final: f64,
    pub t_max: f64,
    pub dt: f64,
}

impl QuenchSpec {
    /// Three trap periods with g_A = 25, the production defaults.
    pub fn standard(g_ab_final: f64) -> Self {
        Self {
            g_a: 25.0,
            g_ab_final,
            t_max: 6.0 * std::f64::consts::PI,
            dt: 0.01,
        }
    }

    /// Uniform time grid t_0 = 0 .. t_max.
    pub fn time_grid(&self) -> Vec<f64> {
        let n = (self.t_max / self.dt).round() as usize;
        (0..=n).map(|i| i as f64 * self.dt).collect()
    }

    /// The Nyquist headroom rule: (E_max − E_0)·Δt ≤ π/4.
    pub fn check_nyquist(&self, e_0: f64, e_max: f64) -> Result<()> {
        let bound = std::f64::consts::FRAC_PI_4 / (e_max - e_0).max(f64::MIN_POSITIVE);
        if self.dt > bound {
            return Err(Error::InvalidParameter(format!(
                "dt = {} violates the Nyquist rule; need dt <= {bound:.6e} for \
                 E_max - E_0 = {:.3}",
                self.dt,
                e_max - e_0
            )));
        }
        Ok(())
    }
}

/// Ground state of the decoupled Hamiltonian H(g_A, g_AB = 0), expressed in
/// the even-parity block.
#[derive(Debug, Clone)]
pub struct InitialState {
    /// Coefficients over the even block, in block order.
    pub psi: Vec<f64>,
    /// Rayleigh quotient ⟨ψ|H_i|ψ⟩.
    pub energy: f64,
}

/// Overlap expansion of the initial state in the post-quench eigenbasis.
#[derive(Debug, Clone)]
pub struct QuenchResult {
    /// Initial-state energy under H_i.
    pub e_0: f64,
    /// Real overlaps c_k = ⟨E_k|Ψ_0⟩.
    pub overlaps: Vec<f64>,
    /// Post-quench eigenenergies E_k (even block).
    pub energies: Vec<f64>,
}

impl QuenchResult {
    /// Σ |c_k|²; exactly 1 within roundoff because both Hamiltonians live in
    /// the same truncated basis.
    pub fn weight_sum(&self) -> f64 {
        self.overlaps.iter().map(|c| c * c).sum()
    }

    /// Inverse participation ratio Σ |c_k|⁴.
    pub fn participation(&self) -> f64 {
        self.overlaps.iter().map(|c| c.powi(4)).sum()
    }
}

/// Ground eigenvector of H(g_A, 0) on the even block, with its energy taken
/// as a Rayleigh quotient rather than trusted solver ordering.
pub fn prepare_initial(
    basis: &ManyBodyBasis,
    table: &DeltaIntegralTable,
    g_a: f64,
) -> Result<InitialState> {
    let params = CouplingParams::new(g_a, 0.0)?;
    let block = hamiltonian::assemble_block(basis, Parity::Even, params, table)?;
    let (_, v) = solver::ground_state(block.matrix.as_ref(), 1e-13)?;
    let hv = block.matrix.as_ref() * &v;
    let energy = v.transpose() * &hv;
    let psi = (0..v.nrows()).map(|i| v[i]).collect();
    Ok(InitialState { psi, energy })
}

/// Expand Ψ_0 in the eigenbasis of the post-quench Hamiltonian.
pub fn project(initial: &InitialState, post: &EigenSystem) -> Result<QuenchResult> {
    if initial.psi.len() != post.dim() {
        return Err(Error::DimensionMismatch(format!(
            "initial state dim {} vs eigensystem dim {}",
            initial.psi.len(),
            post.dim()
        )));
    }
    let n = post.dim();
    let overlaps: Vec<f64> = (0..n)
        .map(|k| (0..n).map(|i| post.vectors[(i, k)] * initial.psi[i]).sum())
        .collect();
    Ok(QuenchResult {
        e_0: initial.energy,
        overlaps,
        energies: post.energies.clone(),
    })
}

/// Loschmidt amplitude ν(t) = Σ_k |c_k|² e^{i(E_0 − E_k)t}.
pub fn loschmidt_amplitude(result: &QuenchResult, t: f64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for (c, e) in result.overlaps.iter().zip(&result.energies) {
        let w = c * c;
        let phase = (result.e_0 - e) * t;
        acc += Complex64::new(w * phase.cos(), w * phase.sin());
    }
    acc
}

/// Loschmidt echo L(t) = |ν(t)|².
pub fn loschmidt_echo(result: &QuenchResult, t: f64) -> f64 {
    loschmidt_amplitude(result, t).norm_sqr()
}

/// Ψ(t) = Σ_k c_k e^{−i E_k t} v_k over the block coordinates.
pub fn evolve_state(result: &QuenchResult, post: &EigenSystem, t: f64) -> Vec<Complex64> {
    let n = post.dim();
    debug_assert_eq!(result.overlaps.len(), n);
    // split into two real matrix-vector products
    let re_coeff = faer::Col::<f64>::from_fn(n, |k| {
        result.overlaps[k] * (result.energies[k] * t).cos()
    });
    let im_coeff = faer::Col::<f64>::from_fn(n, |k| {
        -result.overlaps[k] * (result.energies[k] * t).sin()
    });
    let re = post.vectors.as_ref() * re_coeff;
    let im = post.vectors.as_ref() * im_coeff;
    (0..n).map(|i| Complex64::new(re[i], im[i])).collect()
}
