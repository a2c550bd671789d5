//! Reduced density matrices, densities, entropies, subsystem echoes, and the
//! spectral function.

use faer::Mat;
use num_complex::Complex64;

use crate::basis::{self, HoParams};
use crate::error::{Error, Result};
use crate::fock::{ManyBodyBasis, Parity};
use crate::quench::QuenchResult;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Species {
    A,
    B,
}

impl Species {
    pub fn particle_number(self) -> f64 {
        match self {
            Species::A => 2.0,
            Species::B => 1.0,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Species::A => "A",
            Species::B => "B",
        }
    }
}

/// Reduced single-particle density matrix over HO orbital indices,
/// normalized to unit trace.
#[derive(Debug, Clone)]
pub struct Rspdm {
    pub species: Species,
    pub matrix: Mat<Complex64>,
}

impl Rspdm {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.matrix[(i, i)].re).sum()
    }

    /// Hermiticity within 1e−12, unit trace within 1e−10, eigenvalues
    /// ≥ −1e−10.
    pub fn validate(&self) -> Result<()> {
        let n = self.dim();
        for i in 0..n {
            for j in 0..=i {
                let d = self.matrix[(i, j)] - self.matrix[(j, i)].conj();
                if d.norm() > 1e-12 {
                    return Err(Error::InvalidParameter(format!(
                        "rspdm not hermitian at ({i},{j}): asymmetry {:.3e}",
                        d.norm()
                    )));
                }
            }
        }
        if (self.trace() - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidParameter(format!(
                "rspdm trace {} != 1",
                self.trace()
            )));
        }
        let occ = hermitian_eigenvalues(&self.matrix)?;
        if occ.iter().any(|&l| l < -1e-10) {
            return Err(Error::InvalidParameter(format!(
                "rspdm has negative eigenvalue {:.3e}",
                occ.iter().cloned().fold(f64::INFINITY, f64::min)
            )));
        }
        Ok(())
    }
}

/// Single-species spatial density on a grid, normalized to particle number.
#[derive(Debug, Clone)]
pub struct DensityProfile {
    pub species: Species,
    pub x: Vec<f64>,
    pub values: Vec<f64>,
}

impl DensityProfile {
    /// Trapezoid norm on the output grid.
    pub fn norm(&self) -> f64 {
        trapezoid(&self.x, &self.values)
    }
}

/// Broadened spectral function samples.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub omega: Vec<f64>,
    pub values: Vec<f64>,
    pub eta: f64,
}

impl Spectrum {
    /// (1/2π) ∫ A(ω) dω, equal to 1 up to windowing of the Lorentzian tails.
    pub fn sum_rule(&self) -> f64 {
        trapezoid(&self.omega, &self.values) / std::f64::consts::TAU
    }

    /// ω at the global maximum of A.
    pub fn peak_position(&self) -> f64 {
        let mut best = 0;
        for i in 1..self.values.len() {
            if self.values[i] > self.values[best] {
                best = i;
            }
        }
        self.omega[best]
    }

    /// Indices of strict interior local maxima.
    pub fn local_maxima(&self) -> Vec<usize> {
        let v = &self.values;
        (1..v.len().saturating_sub(1))
            .filter(|&i| v[i] > v[i - 1] && v[i] > v[i + 1])
            .collect()
    }
}

fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 1..x.len() {
        s += 0.5 * (y[i] + y[i - 1]) * (x[i] - x[i - 1]);
    }
    s
}

/// Coefficients of the even-block state in the ordered product basis
/// φ_p(x₁) φ_q(x₂) φ_m(y). Symmetrized pairs split as
/// (pq + qp)/√2 for p ≠ q.
struct OrderedTensor {
    /// d[(p·(nformax+1) + q)·(n_max+1) + m]
    data: Vec<Complex64>,
    n_orb: usize,
}

impl OrderedTensor {
    fn from_block(psi: &[Complex64], basis: &ManyBodyBasis) -> Result<Self> {
        let block = basis.block(Parity::Even);
        if psi.len() != block.len() {
            return Err(Error::DimensionMismatch(format!(
                "state dim {} vs even block dim {}",
                psi.len(),
                block.len()
            )));
        }
        let n_orb = basis.n_max + 1;
        let mut data = vec![Complex64::new(0.0, 0.0); n_orb * n_orb * n_orb];
        let inv_sqrt2 = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        for (c, &gi) in psi.iter().zip(block) {
            let s = basis.state(gi);
            let (p, q, m) = (s.pair.n1, s.pair.n2, s.m);
            if p == q {
                data[(p * n_orb + q) * n_orb + m] = *c;
            } else {
                let half = c * inv_sqrt2;
                data[(p * n_orb + q) * n_orb + m] = half;
                data[(q * n_orb + p) * n_orb + m] = half;
            }
        }
        Ok(Self { data, n_orb })
    }

    #[inline]
    fn get(&self, p: usize, q: usize, m: usize) -> Complex64 {
        self.data[(p * self.n_orb + q) * self.n_orb + m]
    }
}

/// ρ_B[m,m'] = Σ_pair C[pair,m] C*[pair,m'].
pub fn rspdm_b(psi: &[Complex64], basis: &ManyBodyBasis) -> Result<Rspdm> {
    let t = OrderedTensor::from_block(psi, basis)?;
    let n = t.n_orb;
    let mut rho = Mat::from_fn(n, n, |_, _| Complex64::new(0.0, 0.0));
    for m in 0..n {
        for mp in 0..=m {
            let mut acc = Complex64::new(0.0, 0.0);
            for p in 0..n {
                for q in 0..n {
                    acc += t.get(p, q, m) * t.get(p, q, mp).conj();
                }
            }
            rho[(m, mp)] = acc;
            rho[(mp, m)] = acc.conj();
        }
    }
    Ok(Rspdm { species: Species::B, matrix: rho })
}

/// ρ_A[p,p'] = Σ_{q,m} D[p,q,m] D*[p',q,m], the one-body matrix of one A
/// atom after tracing the other A atom and the impurity.
pub fn rspdm_a(psi: &[Complex64], basis: &ManyBodyBasis) -> Result<Rspdm> {
    let t = OrderedTensor::from_block(psi, basis)?;
    let n = t.n_orb;
    let mut rho = Mat::from_fn(n, n, |_, _| Complex64::new(0.0, 0.0));
    for p in 0..n {
        for pp in 0..=p {
            let mut acc = Complex64::new(0.0, 0.0);
            for q in 0..n {
                for m in 0..n {
                    acc += t.get(p, q, m) * t.get(pp, q, m).conj();
                }
            }
            rho[(p, pp)] = acc;
            rho[(pp, p)] = acc.conj();
        }
    }
    Ok(Rspdm { species: Species::A, matrix: rho })
}

/// Two-particle reduced state of the A pair (impurity traced out), over the
/// symmetrized pair indices of the basis. Its spectrum matches ρ_B for a
/// pure global state.
pub fn pair_density_matrix(psi: &[Complex64], basis: &ManyBodyBasis) -> Result<Mat<Complex64>> {
    let block = basis.block(Parity::Even);
    if psi.len() != block.len() {
        return Err(Error::DimensionMismatch(format!(
            "state dim {} vs even block dim {}",
            psi.len(),
            block.len()
        )));
    }
    // distinct pairs appearing in the block, in first-seen order
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    let mut pair_of_state: Vec<usize> = Vec::with_capacity(block.len());
    for &gi in block {
        let s = basis.state(gi);
        let key = (s.pair.n1, s.pair.n2);
        let idx = match pairs.iter().position(|&p| p == key) {
            Some(i) => i,
            None => {
                pairs.push(key);
                pairs.len() - 1
            }
        };
        pair_of_state.push(idx);
    }
    let np = pairs.len();
    let n_orb = basis.n_max + 1;
    // C[pair, m]
    let mut c = vec![Complex64::new(0.0, 0.0); np * n_orb];
    for (i, &gi) in block.iter().enumerate() {
        let m = basis.state(gi).m;
        c[pair_of_state[i] * n_orb + m] = psi[i];
    }
    let mut rho = Mat::from_fn(np, np, |_, _| Complex64::new(0.0, 0.0));
    for i in 0..np {
        for j in 0..=i {
            let mut acc = Complex64::new(0.0, 0.0);
            for m in 0..n_orb {
                acc += c[i * n_orb + m] * c[j * n_orb + m].conj();
            }
            rho[(i, j)] = acc;
            rho[(j, i)] = acc.conj();
        }
    }
    Ok(rho)
}

/// Ascending eigenvalues of a hermitian complex matrix.
pub fn hermitian_eigenvalues(m: &Mat<Complex64>) -> Result<Vec<f64>> {
    let evd = m
        .self_adjoint_eigen(faer::Side::Lower)
        .map_err(|e| Error::SolverFailure { context: format!("hermitian eigenvalues: {e:?}") })?;
    let s = evd.S().column_vector().to_owned();
    Ok((0..m.nrows()).map(|i| s[i].re).collect())
}

/// Natural orbitals: occupations descending, one orbital per column.
pub struct NaturalOrbitals {
    pub occupations: Vec<f64>,
    pub orbitals: Mat<Complex64>,
}

pub fn natural_orbitals(rspdm: &Rspdm) -> Result<NaturalOrbitals> {
    let evd = rspdm
        .matrix
        .self_adjoint_eigen(faer::Side::Lower)
        .map_err(|e| Error::SolverFailure { context: format!("natural orbitals: {e:?}") })?;
    let n = rspdm.dim();
    let s = evd.S().column_vector().to_owned();
    let u = evd.U();
    // faer returns ascending order; flip to descending
    let occupations: Vec<f64> = (0..n).rev().map(|i| s[i].re).collect();
    let orbitals = Mat::from_fn(n, n, |i, k| u[(i, n - 1 - k)]);
    Ok(NaturalOrbitals { occupations, orbitals })
}

/// S = −Σ λ log₂ λ in bits; eigenvalues below 1e−12 contribute zero.
pub fn entropy_from_occupations(occupations: &[f64]) -> f64 {
    occupations
        .iter()
        .filter(|&&l| l > 1e-12)
        .map(|&l| -l * l.log2())
        .sum()
}

pub fn vne(rspdm: &Rspdm) -> Result<f64> {
    Ok(entropy_from_occupations(&hermitian_eigenvalues(&rspdm.matrix)?))
}

/// Entropy of an arbitrary hermitian trace-1 matrix (used for the pair
/// reduced state).
pub fn vne_of_matrix(m: &Mat<Complex64>) -> Result<f64> {
    Ok(entropy_from_occupations(&hermitian_eigenvalues(m)?))
}

/// ρ(x) = N_species · Σ_{n,n'} ρ[n,n'] φ_n(x) φ_{n'}(x).
pub fn density(rspdm: &Rspdm, x_grid: &[f64]) -> Result<DensityProfile> {
    let n = rspdm.dim();
    let scale = rspdm.species.particle_number();
    let params = HoParams::new(n.max(2) - 1)?;
    let mut values = Vec::with_capacity(x_grid.len());
    for &x in x_grid {
        let phi = basis::eval_ho_all(params.n_max, x);
        let mut acc = 0.0;
        for a in 0..n {
            acc += rspdm.matrix[(a, a)].re * phi[a] * phi[a];
            for b in 0..a {
                acc += 2.0 * rspdm.matrix[(a, b)].re * phi[a] * phi[b];
            }
        }
        values.push(scale * acc);
    }
    Ok(DensityProfile { species: rspdm.species, x: x_grid.to_vec(), values })
}

/// Mean of S(t) over samples with lo < t < hi.
pub fn time_averaged_entropy(times: &[f64], values: &[f64], lo: f64, hi: f64) -> Result<f64> {
    if times.len() != values.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} times vs {} values",
            times.len(),
            values.len()
        )));
    }
    let picked: Vec<f64> = times
        .iter()
        .zip(values)
        .filter(|(t, _)| **t > lo && **t < hi)
        .map(|(_, v)| *v)
        .collect();
    if picked.is_empty() {
        return Err(Error::InvalidParameter(format!(
            "averaging window ({lo}, {hi}) contains no samples"
        )));
    }
    Ok(picked.iter().sum::<f64>() / picked.len() as f64)
}

/// Precomputed spectral data for the subsystem echo written directly in
/// terms of density-matrix eigenvalues: both reduced matrices are
/// diagonalized once, then each time sample costs O(mn).
pub struct SubsystemEcho {
    /// Eigenvalues ω_m of the initial reduced state.
    weights: Vec<f64>,
    /// Eigenvalues ω'_n of the reference reduced state of the final
    /// Hamiltonian.
    freqs: Vec<f64>,
    /// |⟨ψ_m|φ'_n⟩|².
    overlap2: Mat<f64>,
}

impl SubsystemEcho {
    /// rho_i: reduced state of Ψ_0; rho_f: reduced state of the ground state
    /// of the post-quench Hamiltonian.
    pub fn new(rho_i: &Rspdm, rho_f: &Rspdm) -> Result<Self> {
        if rho_i.dim() != rho_f.dim() {
            return Err(Error::DimensionMismatch(format!(
                "reduced states of dim {} vs {}",
                rho_i.dim(),
                rho_f.dim()
            )));
        }
        let di = decompose(&rho_i.matrix)?;
        let df = decompose(&rho_f.matrix)?;
        let n = rho_i.dim();
        let cross = di.1.adjoint() * &df.1;
        let overlap2 = Mat::from_fn(n, n, |m, k| cross[(m, k)].norm_sqr());
        Ok(Self { weights: di.0, freqs: df.0, overlap2 })
    }

    /// L(t) = Σ_m ω_m [(Σ_n cos(ω'_n t)|⟨ψ_m|φ'_n⟩|²)² +
    ///                 (Σ_n sin(ω'_n t)|⟨ψ_m|φ'_n⟩|²)²].
    pub fn literal(&self, t: f64) -> f64 {
        let n = self.freqs.len();
        let cos: Vec<f64> = self.freqs.iter().map(|w| (w * t).cos()).collect();
        let sin: Vec<f64> = self.freqs.iter().map(|w| (w * t).sin()).collect();
        let mut total = 0.0;
        for (m, &w) in self.weights.iter().enumerate() {
            if w <= 1e-14 {
                continue;
            }
            let mut c = 0.0;
            let mut s = 0.0;
            for k in 0..n {
                let p = self.overlap2[(m, k)];
                c += cos[k] * p;
                s += sin[k] * p;
            }
            total += w * (c * c + s * s);
        }
        total
    }
}

fn decompose(m: &Mat<Complex64>) -> Result<(Vec<f64>, Mat<Complex64>)> {
    let evd = m
        .self_adjoint_eigen(faer::Side::Lower)
        .map_err(|e| Error::SolverFailure { context: format!("reduced-state eigen: {e:?}") })?;
    let n = m.nrows();
    let s = evd.S().column_vector().to_owned();
    Ok(((0..n).map(|i| s[i].re).collect(), evd.U().to_owned()))
}

/// Uhlmann fidelity F(ρ, σ) = [Tr √(√ρ σ √ρ)]², the alternative subsystem
/// echo comparing the initial reduced state with the evolved one.
pub fn uhlmann_fidelity(rho: &Rspdm, sigma: &Rspdm) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch(format!(
            "states of dim {} vs {}",
            rho.dim(),
            sigma.dim()
        )));
    }
    let (vals, vecs) = decompose(&rho.matrix)?;
    let n = rho.dim();
    let sqrt_l: Vec<f64> = vals.iter().map(|&l| l.max(0.0).sqrt()).collect();
    // √ρ = U √Λ U†
    let mut sqrt_rho = Mat::from_fn(n, n, |_, _| Complex64::new(0.0, 0.0));
    for i in 0..n {
        for j in 0..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..n {
                acc += vecs[(i, k)] * sqrt_l[k] * vecs[(j, k)].conj();
            }
            sqrt_rho[(i, j)] = acc;
        }
    }
    let inner = &sqrt_rho * &sigma.matrix * &sqrt_rho;
    let ev = hermitian_eigenvalues(&inner)?;
    let root_sum: f64 = ev.iter().map(|&l| l.max(0.0).sqrt()).sum();
    Ok(root_sum * root_sum)
}

/// Lorentzian eigen-sum spectrum, peaks at ω = E_0 − E_k ≤ 0:
/// A(ω) = Σ_k |c_k|² · 2η / ((ω − (E_0 − E_k))² + η²).
pub fn spectral_function(quench: &QuenchResult, eta: f64, omega: &[f64]) -> Result<Spectrum> {
    if eta <= 0.0 {
        return Err(Error::InvalidParameter(format!("broadening eta = {eta} must be positive")));
    }
    // drop negligible weights once, not per frequency
    let terms: Vec<(f64, f64)> = quench
        .overlaps
        .iter()
        .zip(&quench.energies)
        .map(|(c, e)| (c * c, quench.e_0 - e))
        .filter(|(w, _)| *w > 1e-16)
        .collect();
    let values = omega
        .iter()
        .map(|&w| {
            terms
                .iter()
                .map(|&(wt, pos)| wt * 2.0 * eta / ((w - pos).powi(2) + eta * eta))
                .sum()
        })
        .collect();
    Ok(Spectrum { omega: omega.to_vec(), values, eta })
}

/// Windowed-transform cross-check: A(ω) = 2 Re ∫₀^∞ e^{−iωt} ν(t) e^{−ηt} dt
/// by trapezoid over uniformly sampled ν; the hermitian extension
/// ν(−t) = ν(t)* folds the full-line transform onto t ≥ 0.
pub fn spectral_function_transform(
    nu: &[Complex64],
    dt: f64,
    eta: f64,
    omega: &[f64],
) -> Result<Spectrum> {
    if eta <= 0.0 {
        return Err(Error::InvalidParameter(format!("broadening eta = {eta} must be positive")));
    }
    if nu.len() < 2 || dt <= 0.0 {
        return Err(Error::InvalidParameter("need at least two samples with dt > 0".into()));
    }
    let damped: Vec<Complex64> =
        nu.iter().enumerate().map(|(i, z)| z * (-eta * i as f64 * dt).exp()).collect();
    let values = omega
        .iter()
        .map(|&w| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (i, z) in damped.iter().enumerate() {
                let t = i as f64 * dt;
                let rot = Complex64::new((w * t).cos(), -(w * t).sin());
                let weight = if i == 0 || i == damped.len() - 1 { 0.5 } else { 1.0 };
                acc += z * rot * weight;
            }
            2.0 * (acc * dt).re
        })
        .collect();
    Ok(Spectrum { omega: omega.to_vec(), values, eta })
}

/// Relative L2 distance between two spectra on the same grid.
pub fn spectra_distance(a: &Spectrum, b: &Spectrum) -> Result<f64> {
    if a.omega.len() != b.omega.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} vs {} frequency samples",
            a.omega.len(),
            b.omega.len()
        )));
    }
    let num: f64 =
        a.values.iter().zip(&b.values).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
    let den: f64 = a.values.iter().map(|x| x * x).sum::<f64>().sqrt();
    Ok(num / den.max(f64::MIN_POSITIVE))
}
