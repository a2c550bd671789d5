//! Slow, independent reference implementations used to validate the
//! production HO-basis pipeline: the two-boson relative-coordinate problem
//! on a finite-difference grid, a closed-form transcendental fast path, a
//! real-space three-body diagonalizer, exact-propagator and real-space
//! matrix-element cross-checks, and the frozen fixture file.

use std::io::Write as _;
use std::path::Path;

use faer::MatRef;
use num_complex::Complex64;

use crate::basis;
use crate::error::{Error, Result};
use crate::fock::CompositeState;
use crate::tridiag;

/// Ground relative-motion energy of two contact-interacting bosons in the
/// trap, from the transcendental relation
/// g = −2^{3/2} Γ(3/4 − E/2) / Γ(1/4 − E/2), solved by bisection on the
/// ground branch E ∈ (1/2, 3/2).
pub fn closed_form_relative_energy(g: f64) -> Result<f64> {
    if !g.is_finite() || g < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "coupling must be finite and nonnegative, got {g}"
        )));
    }
    if g == 0.0 {
        return Ok(0.5);
    }
    let coupling_of = |e: f64| -> f64 {
        -2.0f64.powf(1.5) * libm::tgamma(0.75 - 0.5 * e) / libm::tgamma(0.25 - 0.5 * e)
    };
    let mut lo = 0.5 + 1e-12;
    let mut hi = 1.5 - 1e-12;
    if coupling_of(hi) < g {
        // ground branch saturates at E = 3/2 as g → ∞
        return Ok(1.5);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if coupling_of(mid) < g {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Same energy from a finite-difference grid at one resolution. The contact
/// potential acts on the r = 0 node with on-site value 1/h; the relative
/// coordinate carries the reduced coupling g/√2.
pub fn relative_energy_grid(g: f64, half_width: f64, points: usize) -> Result<f64> {
    if points < 3 || points.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!(
            "grid needs an odd point count >= 3 so r = 0 is a node, got {points}"
        )));
    }
    let h = 2.0 * half_width / (points - 1) as f64;
    let center = (points - 1) / 2;
    let diag: Vec<f64> = (0..points)
        .map(|i| {
            let r = -half_width + i as f64 * h;
            let mut v = 1.0 / (h * h) + 0.5 * r * r;
            if i == center {
                v += g / std::f64::consts::SQRT_2 / h;
            }
            v
        })
        .collect();
    let off = vec![-0.5 / (h * h); points - 1];
    Ok(tridiag::eigenvalue(&diag, &off, 0))
}

/// Grid value Richardson-extrapolated over a factor-2 refinement pair, with
/// the measured convergence order from a refinement triplet.
pub struct RelativeEnergy {
    pub energy: f64,
    pub order: f64,
}

/// High-trust two-boson relative ground energy: finite differences on
/// r ∈ [−8, 8] at three nested resolutions, second-order Richardson
/// extrapolation, with an internal consistency check between the two
/// finest extrapolants.
pub fn two_boson_relative_energy(g: f64) -> Result<RelativeEnergy> {
    let l = 8.0;
    let p0 = 801;
    let e1 = relative_energy_grid(g, l, p0)?;
    let e2 = relative_energy_grid(g, l, 2 * p0 - 1)?;
    let e3 = relative_energy_grid(g, l, 4 * p0 - 3)?;
    let (d1, d2) = (e1 - e2, e2 - e3);
    let order = if d2.abs() < 1e-14 { 2.0 } else { (d1 / d2).abs().log2() };
    let coarse = (4.0 * e2 - e1) / 3.0;
    let fine = (4.0 * e3 - e2) / 3.0;
    if (fine - coarse).abs() > 1e-6 {
        return Err(Error::OracleNonConvergence(format!(
            "Richardson extrapolants disagree by {:.3e} at g = {g}",
            (fine - coarse).abs()
        )));
    }
    Ok(RelativeEnergy { energy: fine, order })
}

/// Real-space three-body oracle parameters.
#[derive(Debug, Clone, Copy)]
pub struct GridOracleConfig {
    /// Box half-width in a_ho.
    pub half_width: f64,
    /// Points per dimension; the full problem has points³ unknowns.
    pub points: usize,
}

impl GridOracleConfig {
    pub fn new(half_width: f64, points: usize) -> Result<Self> {
        if half_width < 6.0 {
            return Err(Error::InvalidParameter(format!(
                "box half-width {half_width} too small; need >= 6 a_ho"
            )));
        }
        if points.is_multiple_of(2) || points < 5 {
            return Err(Error::InvalidParameter(format!(
                "point count {points} must be odd and >= 5 so x = 0 is a node"
            )));
        }
        if points > 41 {
            return Err(Error::InvalidParameter(format!(
                "point count {points} exceeds the memory guard of 41"
            )));
        }
        Ok(Self { half_width, points })
    }

    fn spacing(&self) -> f64 {
        2.0 * self.half_width / (self.points - 1) as f64
    }
}

/// Lowest `k` energies of the real-space discretized three-body Hamiltonian
/// in the bosonic even-parity sector, reached by Lanczos from a symmetric
/// Gaussian start vector (the Krylov space stays inside the sector because
/// H commutes with A-exchange and parity).
pub fn three_body_grid_spectrum(
    config: GridOracleConfig,
    g_a: f64,
    g_ab: f64,
    k: usize,
) -> Result<Vec<f64>> {
    let p = config.points;
    let h = config.spacing();
    let n = p * p * p;
    let coords: Vec<f64> =
        (0..p).map(|i| -config.half_width + i as f64 * h).collect();
    let inv_h2 = 1.0 / (h * h);
    let onsite = 1.0 / h;

    let diag: Vec<f64> = (0..n)
        .map(|idx| {
            let (i, j, l) = (idx / (p * p), (idx / p) % p, idx % p);
            let (x, y, z) = (coords[i], coords[j], coords[l]);
            let mut v = 3.0 * inv_h2 + 0.5 * (x * x + y * y + z * z);
            if i == j {
                v += g_a * onsite;
            }
            if i == l {
                v += g_ab * onsite;
            }
            if j == l {
                v += g_ab * onsite;
            }
            v
        })
        .collect();

    let matvec = |src: &[f64], dst: &mut [f64]| {
        let hop = -0.5 * inv_h2;
        for idx in 0..n {
            let (i, j, l) = (idx / (p * p), (idx / p) % p, idx % p);
            let mut acc = diag[idx] * src[idx];
            if i > 0 {
                acc += hop * src[idx - p * p];
            }
            if i + 1 < p {
                acc += hop * src[idx + p * p];
            }
            if j > 0 {
                acc += hop * src[idx - p];
            }
            if j + 1 < p {
                acc += hop * src[idx + p];
            }
            if l > 0 {
                acc += hop * src[idx - 1];
            }
            if l + 1 < p {
                acc += hop * src[idx + 1];
            }
            dst[idx] = acc;
        }
    };

    // symmetric Gaussian start keeps Lanczos in the bosonic even sector
    let mut v0: Vec<f64> = (0..n)
        .map(|idx| {
            let (i, j, l) = (idx / (p * p), (idx / p) % p, idx % p);
            let r2 = coords[i] * coords[i] + coords[j] * coords[j] + coords[l] * coords[l];
            (-0.5 * r2).exp()
        })
        .collect();
    let norm: f64 = v0.iter().map(|x| x * x).sum::<f64>().sqrt();
    v0.iter_mut().for_each(|x| *x /= norm);

    let m = 250.min(n - 1);
    let mut basis_vecs: Vec<Vec<f64>> = vec![v0];
    let mut alpha = Vec::with_capacity(m);
    let mut beta: Vec<f64> = Vec::with_capacity(m);
    let mut w = vec![0.0f64; n];
    for it in 0..m {
        let v = basis_vecs[it].clone();
        matvec(&v, &mut w);
        let a: f64 = v.iter().zip(&w).map(|(x, y)| x * y).sum();
        alpha.push(a);
        for (wi, vi) in w.iter_mut().zip(&v) {
            *wi -= a * vi;
        }
        if it > 0 {
            let b = beta[it - 1];
            for (wi, ui) in w.iter_mut().zip(&basis_vecs[it - 1]) {
                *wi -= b * ui;
            }
        }
        // two passes of full reorthogonalization
        for _ in 0..2 {
            for u in &basis_vecs {
                let proj: f64 = u.iter().zip(&w).map(|(x, y)| x * y).sum();
                for (wi, ui) in w.iter_mut().zip(u) {
                    *wi -= proj * ui;
                }
            }
        }
        let b: f64 = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if b < 1e-12 {
            break;
        }
        beta.push(b);
        basis_vecs.push(w.iter().map(|x| x / b).collect());
    }
    let steps = alpha.len();
    if steps < k {
        return Err(Error::OracleNonConvergence(format!(
            "Krylov space of dim {steps} cannot resolve {k} energies"
        )));
    }
    let ritz: Vec<f64> =
        (0..k).map(|i| tridiag::eigenvalue(&alpha, &beta[..steps - 1], i)).collect();
    Ok(ritz)
}

/// Exact state propagation Ψ(t) = exp(−iHt)Ψ(0) by scaling-and-squaring of
/// the dense propagator; an independent check on eigenbasis evolution.
pub fn propagate_expm(
    hamiltonian: MatRef<'_, f64>,
    psi0: &[Complex64],
    t: f64,
) -> Result<Vec<Complex64>> {
    let n = hamiltonian.nrows();
    if hamiltonian.ncols() != n || psi0.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "propagator {}x{} vs state of dim {}",
            n,
            hamiltonian.ncols(),
            psi0.len()
        )));
    }
    type CMat = faer::Mat<Complex64>;
    let a = CMat::from_fn(n, n, |i, j| Complex64::new(0.0, -t * hamiltonian[(i, j)]));
    let norm1 = (0..n)
        .map(|j| (0..n).map(|i| a[(i, j)].norm()).sum::<f64>())
        .fold(0.0f64, f64::max);
    let squarings = norm1.max(1e-300).log2().ceil().max(0.0) as u32 + 1;
    let scale = Complex64::new(0.5f64.powi(squarings as i32), 0.0);
    let scaled = CMat::from_fn(n, n, |i, j| a[(i, j)] * scale);

    // Taylor series of the scaled exponential; ‖A‖ ≤ 1/2 so 24 terms are
    // far below f64 resolution
    let mut result = CMat::identity(n, n);
    let mut term = CMat::identity(n, n);
    for order in 1..=24 {
        term = &term * &scaled;
        let inv = Complex64::new(1.0 / order as f64, 0.0);
        term = CMat::from_fn(n, n, |i, j| term[(i, j)] * inv);
        result += &term;
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    let psi = faer::Mat::from_fn(n, 1, |i, _| psi0[i]);
    let out = &result * &psi;
    Ok((0..n).map(|i| out[(i, 0)]).collect())
}

/// Interaction matrix element ⟨s₁|g_A δ(x₁−x₂) + g_AB(δ(x₁−y)+δ(x₂−y))|s₂⟩
/// computed by brute-force trapezoid quadrature over the real-space
/// wavefunctions, bypassing the delta-integral table entirely.
pub fn element_quadrature(
    s1: CompositeState,
    s2: CompositeState,
    g_a: f64,
    g_ab: f64,
    half_width: f64,
    points: usize,
) -> f64 {
    let h = 2.0 * half_width / (points - 1) as f64;
    let xs: Vec<f64> = (0..points).map(|i| -half_width + i as f64 * h).collect();
    let weight = |i: usize| if i == 0 || i == points - 1 { 0.5 * h } else { h };

    let n_max = s1
        .pair
        .n2
        .max(s2.pair.n2)
        .max(s1.m)
        .max(s2.m);
    let phi: Vec<Vec<f64>> = xs.iter().map(|&x| basis::eval_ho_all(n_max, x)).collect();

    // symmetrized pair wavefunction evaluated at (x_1, x_2)
    let pair = |s: CompositeState, i: usize, j: usize| -> f64 {
        let (a, b) = (s.pair.n1, s.pair.n2);
        if a == b {
            phi[i][a] * phi[j][a]
        } else {
            std::f64::consts::FRAC_1_SQRT_2 * (phi[i][a] * phi[j][b] + phi[i][b] * phi[j][a])
        }
    };

    let mut aa = 0.0;
    let mut ab = 0.0;
    for i in 0..points {
        let wi = weight(i);
        for j in 0..points {
            let w = wi * weight(j);
            // x1 = x2 = xs[i], y = xs[j]
            aa += w * pair(s1, i, i) * phi[j][s1.m] * pair(s2, i, i) * phi[j][s2.m];
            // x1 = y = xs[i], x2 = xs[j]  (and its exchange partner)
            ab += 2.0 * w * pair(s1, i, j) * phi[i][s1.m] * pair(s2, i, j) * phi[i][s2.m];
        }
    }
    g_a * aa + g_ab * ab
}

/// One frozen oracle record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixtureEntry {
    pub g: f64,
    pub energy: f64,
}

/// Writes the fixture file: header with generation parameters, then one
/// `g E_rel` pair per line at 12 significant digits.
pub fn write_fixture(path: &Path, entries: &[FixtureEntry]) -> Result<()> {
    let mut body = String::new();
    body.push_str("# two-boson relative ground energies, trap units\n");
    body.push_str("# format_version 1\n");
    body.push_str("# generator finite-difference r in [-8, 8], P = 801/1601/3201, \
                    order-2 Richardson\n");
    body.push_str("# columns g E_rel\n");
    for e in entries {
        body.push_str(&format!("{:.11e} {:.11e}\n", e.g, e.energy));
    }
    let tmp = path.with_extension("tmp");
    let mut f = std::fs::File::create(&tmp)?;
    f.write_all(body.as_bytes())?;
    f.sync_all()?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

pub fn read_fixture(path: &Path) -> Result<Vec<FixtureEntry>> {
    let text = std::fs::read_to_string(path)?;
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        let parse = |s: Option<&str>| -> Result<f64> {
            s.and_then(|v| v.parse().ok()).ok_or_else(|| {
                Error::InvalidParameter(format!(
                    "fixture {}: malformed line {}",
                    path.display(),
                    lineno + 1
                ))
            })
        };
        let g = parse(parts.next())?;
        let energy = parse(parts.next())?;
        out.push(FixtureEntry { g, energy });
    }
    if out.is_empty() {
        return Err(Error::InvalidParameter(format!(
            "fixture {} contains no entries",
            path.display()
        )));
    }
    Ok(out)
}
