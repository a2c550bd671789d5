//! Full dense symmetric eigendecomposition with certification, plus a
//! Lanczos ground-state path for when only the initial state is needed.

use faer::{Col, Mat, MatRef};

use crate::error::{Error, Result};
use crate::hamiltonian::HamiltonianBlock;
use crate::tridiag;

/// Above this dimension the residual certificate is evaluated on a
/// deterministic spectrum-spanning sample of columns instead of all of them;
/// a full H·V product would otherwise double the decomposition cost.
const FULL_RESIDUAL_DIM: usize = 4096;
const RESIDUAL_SAMPLE: usize = 256;

/// Energies (ascending) and orthonormal eigenvectors of a symmetric block.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    pub energies: Vec<f64>,
    /// Column k is the eigenvector of energies[k]. Sign convention: the
    /// largest-magnitude component of each column is positive.
    pub vectors: Mat<f64>,
    /// max_k ‖H v_k − E_k v_k‖ over the certified columns.
    pub residual_norm: f64,
}

impl EigenSystem {
    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    pub fn ground_energy(&self) -> f64 {
        self.energies[0]
    }
}

fn fix_signs(vectors: &mut Mat<f64>) {
    let (n, k) = (vectors.nrows(), vectors.ncols());
    for j in 0..k {
        let mut best = 0usize;
        let mut best_abs = 0.0f64;
        for i in 0..n {
            let a = vectors[(i, j)].abs();
            if a > best_abs {
                best_abs = a;
                best = i;
            }
        }
        if vectors[(best, j)] < 0.0 {
            for i in 0..n {
                vectors[(i, j)] = -vectors[(i, j)];
            }
        }
    }
}

/// Decompose an explicit symmetric matrix. `context` names the block in the
/// error on solver failure.
pub fn diagonalize_matrix(matrix: MatRef<'_, f64>, context: &str) -> Result<EigenSystem> {
    let n = matrix.nrows();
    if n == 0 {
        return Ok(EigenSystem {
            energies: Vec::new(),
            vectors: Mat::zeros(0, 0),
            residual_norm: 0.0,
        });
    }
    let evd = matrix
        .self_adjoint_eigen(faer::Side::Lower)
        .map_err(|_| Error::SolverFailure { context: context.to_string() })?;
    let energies: Vec<f64> = (0..n).map(|i| evd.S().column_vector()[i]).collect();
    debug_assert!(energies.windows(2).all(|w| w[0] <= w[1] + 1e-30));
    let mut vectors = evd.U().to_owned();
    fix_signs(&mut vectors);
    // residual certificate
    let cols: Vec<usize> = if n <= FULL_RESIDUAL_DIM {
        (0..n).collect()
    } else {
        let stride = (n / RESIDUAL_SAMPLE).max(1);
        (0..n).step_by(stride).collect()
    };
    let mut residual = 0.0f64;
    for &k in &cols {
        let v = vectors.col(k);
        let hv = matrix * v;
        let mut r2 = 0.0;
        for i in 0..n {
            let d = hv[i] - energies[k] * v[i];
            r2 += d * d;
        }
        residual = residual.max(r2.sqrt());
    }
    Ok(EigenSystem { energies, vectors, residual_norm: residual })
}

/// Full eigendecomposition of an assembled block.
pub fn diagonalize(block: &HamiltonianBlock) -> Result<EigenSystem> {
    diagonalize_matrix(
        block.matrix.as_ref(),
        &format!(
            "parity={} g_a={} g_ab={} cutoff={}",
            block.parity.label(),
            block.params.g_a,
            block.params.g_ab,
            block.cutoff
        ),
    )
}

/// Ground eigenpair by Lanczos with full reorthogonalization. Deterministic
/// start vector; converges to ‖Hv − Ev‖ ≤ tol·‖H‖_approx.
pub fn ground_state(matrix: MatRef<'_, f64>, tol: f64) -> Result<(f64, Col<f64>)> {
    let n = matrix.nrows();
    if n == 0 {
        return Err(Error::DimensionMismatch("empty matrix".into()));
    }
    if n == 1 {
        return Ok((matrix[(0, 0)], Col::from_fn(1, |_| 1.0)));
    }
    let max_krylov = 400.min(n);
    let mut basis_vecs: Vec<Col<f64>> = Vec::with_capacity(max_krylov);
    let mut alpha = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut v = Col::<f64>::from_fn(n, |i| 1.0 / (1.0 + i as f64));
    let norm = v.norm_l2();
    for i in 0..n {
        v[i] /= norm;
    }
    let mut scale = 0.0f64;
    for _ in 0..max_krylov {
        let mut w = matrix * &v;
        let a = v.transpose() * &w;
        alpha.push(a);
        scale = scale.max(a.abs());
        for i in 0..n {
            w[i] -= a * v[i];
        }
        // full reorthogonalization, twice
        for _pass in 0..2 {
            for u in &basis_vecs {
                let c = u.transpose() * &w;
                for i in 0..n {
                    w[i] -= c * u[i];
                }
            }
            let c = v.transpose() * &w;
            for i in 0..n {
                w[i] -= c * v[i];
            }
        }
        basis_vecs.push(v.to_owned());
        let b = w.norm_l2();
        if b < 1e-14 * scale.max(1.0) {
            break;
        }
        // convergence check on the tridiagonal Ritz problem
        if alpha.len() >= 8 && alpha.len() % 8 == 0 {
            let (val, y) = tridiag_ground(&alpha, &beta);
            let bottom = b * y[y.len() - 1].abs();
            if bottom < tol * scale.max(1.0) {
                let _ = val;
                break;
            }
        }
        beta.push(b);
        for i in 0..n {
            v[i] = w[i] / b;
        }
    }
    let (_, y) = tridiag_ground(&alpha, &beta);
    let mut ground = Col::<f64>::zeros(n);
    for (j, u) in basis_vecs.iter().enumerate() {
        if j < y.len() {
            for i in 0..n {
                ground[i] += y[j] * u[i];
            }
        }
    }
    let norm = ground.norm_l2();
    for i in 0..n {
        ground[i] /= norm;
    }
    // certify
    let hv = matrix * &ground;
    let e = ground.transpose() * &hv;
    let mut r2 = 0.0;
    for i in 0..n {
        let d = hv[i] - e * ground[i];
        r2 += d * d;
    }
    if r2.sqrt() > 100.0 * tol * scale.max(1.0) {
        return Err(Error::SolverFailure {
            context: format!("lanczos residual {} at dim {n}", r2.sqrt()),
        });
    }
    // sign convention as in the dense path
    let mut best = 0usize;
    let mut best_abs = 0.0;
    for i in 0..n {
        if ground[i].abs() > best_abs {
            best_abs = ground[i].abs();
            best = i;
        }
    }
    if ground[best] < 0.0 {
        for i in 0..n {
            ground[i] = -ground[i];
        }
    }
    Ok((e, ground))
}

/// Ground eigenpair of the Lanczos tridiagonal matrix: smallest eigenvalue
/// by bisection, eigenvector by inverse iteration with Thomas solves.
fn tridiag_ground(alpha: &[f64], beta: &[f64]) -> (f64, Vec<f64>) {
    let m = alpha.len();
    let off = &beta[..m.saturating_sub(1).min(beta.len())];
    let val = tridiag::eigenvalue(alpha, off, 0);
    let shift = val - 1e-10 - 1e-12 * val.abs();
    let mut y = vec![1.0 / (m as f64).sqrt(); m];
    for _ in 0..4 {
        y = thomas_solve(alpha, off, shift, &y);
        let n2: f64 = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        for v in y.iter_mut() {
            *v /= n2;
        }
    }
    (val, y)
}

fn thomas_solve(diag: &[f64], off: &[f64], shift: f64, rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut denom = diag[0] - shift;
    if denom.abs() < 1e-300 {
        denom = 1e-300;
    }
    c[0] = if n > 1 { off[0] / denom } else { 0.0 };
    d[0] = rhs[0] / denom;
    for i in 1..n {
        let e = off[i - 1];
        let mut den = diag[i] - shift - e * c[i - 1];
        if den.abs() < 1e-300 {
            den = 1e-300;
        }
        if i + 1 < n {
            c[i] = off[i] / den;
        }
        d[i] = (rhs[i] - e * d[i - 1]) / den;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    x
}
