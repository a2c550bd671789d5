//! Single-particle harmonic-oscillator basis.
//!
//! Everything downstream is built from the truncated HO basis: wavefunction
//! evaluation through a stable recurrence, Gauss-Hermite quadrature, and the
//! cached four-index contact integrals I_{abcd} = ∫ φ_a φ_b φ_c φ_d dx.
//!
//! Units are harmonic-oscillator units throughout: ħ = m = ω = a_ho = 1.

use std::io::{Read, Write};
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::tridiag;

/// Basis truncation and quadrature resolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HoParams {
    /// Highest single-particle HO quantum number.
    pub n_max: usize,
    /// Gauss-Hermite order used for the contact integrals.
    pub quad_order: usize,
}

impl HoParams {
    /// `quad_order` defaults to the smallest order that integrates every
    /// four-function product exactly.
    pub fn new(n_max: usize) -> Result<Self> {
        Self::with_quad_order(n_max, 2 * n_max + 2)
    }

    pub fn with_quad_order(n_max: usize, quad_order: usize) -> Result<Self> {
        if n_max < 1 {
            return Err(Error::InvalidParameter(format!("n_max = {n_max}, need >= 1")));
        }
        if quad_order < 2 * n_max + 2 {
            return Err(Error::InvalidParameter(format!(
                "quad_order = {quad_order} too small for n_max = {n_max}, need >= {}",
                2 * n_max + 2
            )));
        }
        Ok(Self { n_max, quad_order })
    }
}

/// Energy of HO level `n` in units of ħω.
pub fn ho_energy(n: usize) -> f64 {
    n as f64 + 0.5
}

/// Normalized HO eigenfunction φ_n(x), evaluated through the normalized
/// Hermite-function recurrence with the Gaussian folded in from the start.
/// Stable for n well into the thousands; never forms raw Hermite polynomials.
pub fn eval_ho(n: usize, x: f64) -> f64 {
    let mut h0 = std::f64::consts::PI.powf(-0.25) * (-0.5 * x * x).exp();
    if n == 0 {
        return h0;
    }
    let mut h1 = std::f64::consts::SQRT_2 * x * h0;
    for k in 1..n {
        let kf = k as f64;
        let h2 = x * (2.0 / (kf + 1.0)).sqrt() * h1 - (kf / (kf + 1.0)).sqrt() * h0;
        h0 = h1;
        h1 = h2;
    }
    h1
}

/// φ_0(x) .. φ_{n_max}(x) at a single point, sharing one recurrence pass.
pub fn eval_ho_all(n_max: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n_max + 1);
    out.push(std::f64::consts::PI.powf(-0.25) * (-0.5 * x * x).exp());
    if n_max >= 1 {
        out.push(std::f64::consts::SQRT_2 * x * out[0]);
    }
    for k in 1..n_max {
        let kf = k as f64;
        let next = x * (2.0 / (kf + 1.0)).sqrt() * out[k] - (kf / (kf + 1.0)).sqrt() * out[k - 1];
        out.push(next);
    }
    out
}

/// Gauss-Hermite nodes and weights for the weight function e^{-y²}.
#[derive(Debug, Clone)]
pub struct QuadratureGrid {
    /// Quadrature nodes y_i, ascending.
    pub nodes: Vec<f64>,
    /// Classic Gauss-Hermite weights (all positive).
    pub weights: Vec<f64>,
    /// Weights with the Gaussian divided out, w_i e^{y_i²}. These are what
    /// integrands with their own Gaussian decay are summed against.
    pub flat_weights: Vec<f64>,
}

/// Orthonormal Hermite functions ĥ_0..ĥ_{n}(y) (weight e^{-y²} absorbed).
fn hermite_fn_all(n: usize, y: f64) -> Vec<f64> {
    eval_ho_all(n, y)
}

/// d/dy ĥ_n(y) = √(2n) ĥ_{n-1}(y) - y ĥ_n(y).
fn hermite_fn_deriv(h: &[f64], n: usize, y: f64) -> f64 {
    let lower = if n == 0 { 0.0 } else { (2.0 * n as f64).sqrt() * h[n - 1] };
    lower - y * h[n]
}

impl QuadratureGrid {
    /// Build the order-`q` rule. Nodes come from Sturm bisection on the
    /// Jacobi matrix, then one round of Newton polishing on ĥ_q; weights via
    /// the Christoffel sum over ĥ_0..ĥ_{q-1}, which stays bounded at every
    /// node.
    pub fn gauss_hermite(q: usize) -> Result<Self> {
        if q < 2 {
            return Err(Error::InvalidParameter(format!("quad_order = {q}, need >= 2")));
        }
        let diag = vec![0.0; q];
        let off: Vec<f64> = (1..q).map(|k| (k as f64 / 2.0).sqrt()).collect();
        let mut nodes = tridiag::eigenvalues(&diag, &off);
        for y in nodes.iter_mut() {
            for _ in 0..3 {
                let h = hermite_fn_all(q, *y);
                let d = hermite_fn_deriv(&h, q, *y);
                if d != 0.0 {
                    *y -= h[q] / d;
                }
            }
        }
        // enforce exact ± symmetry of the node set
        let n = nodes.len();
        for i in 0..n / 2 {
            let s = 0.5 * (nodes[i] - nodes[n - 1 - i]);
            nodes[i] = s;
            nodes[n - 1 - i] = -s;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        let mut weights = Vec::with_capacity(q);
        let mut flat_weights = Vec::with_capacity(q);
        for &y in &nodes {
            let h = hermite_fn_all(q - 1, y);
            let chi: f64 = h.iter().map(|v| v * v).sum();
            let flat = 1.0 / chi;
            flat_weights.push(flat);
            weights.push(flat * (-y * y).exp());
        }
        Ok(Self { nodes, weights, flat_weights })
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// ∫ f(y) e^{-y²} dy for `f` sampled through `flat_weights` is handled
    /// by callers; this is the plain rule Σ w_i f(y_i).
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&y, &w)| w * f(y)).sum()
    }
}

const CACHE_MAGIC: [u8; 4] = *b"QEDI";
const CACHE_VERSION: u32 = 1;

/// Dense table of I_{abcd} over sorted index 4-tuples.
///
/// I is fully symmetric under index permutations, so one entry per multiset
/// suffices: size C(n_max + 4, 4). Odd-parity entries are stored as exact
/// zeros. After construction the table is immutable and freely shareable.
#[derive(Debug, Clone)]
pub struct DeltaIntegralTable {
    params: HoParams,
    data: Vec<f64>,
}

#[inline]
fn binom2(n: usize) -> usize {
    n * (n.wrapping_sub(1)) / 2
}
#[inline]
fn binom3(n: usize) -> usize {
    if n < 3 {
        0
    } else {
        n * (n - 1) * (n - 2) / 6
    }
}
#[inline]
fn binom4(n: usize) -> usize {
    if n < 4 {
        0
    } else {
        n * (n - 1) * (n - 2) * (n - 3) / 24
    }
}

/// Rank of the sorted tuple a ≤ b ≤ c ≤ d among all multisets.
#[inline]
fn tuple_index(a: usize, b: usize, c: usize, d: usize) -> usize {
    binom4(d + 3) + binom3(c + 2) + binom2(b + 1) + a
}

impl DeltaIntegralTable {
    /// Number of stored entries for a given n_max.
    pub fn table_len(n_max: usize) -> usize {
        binom4(n_max + 4)
    }

    /// Compute the full table by Gauss-Hermite quadrature. The substitution
    /// x = y/√2 turns ∫ φ_a φ_b φ_c φ_d dx into a pure e^{-y²}-weighted
    /// integral that the rule handles exactly.
    pub fn build(params: HoParams) -> Result<Self> {
        let grid = QuadratureGrid::gauss_hermite(params.quad_order)?;
        Ok(Self::build_with_grid(params, &grid))
    }

    pub fn build_with_grid(params: HoParams, grid: &QuadratureGrid) -> Self {
        let n_max = params.n_max;
        let q = grid.order();
        let inv_sqrt2 = 1.0 / std::f64::consts::SQRT_2;
        // φ_n at the substituted nodes, node-major
        let mut phi = vec![0.0f64; (n_max + 1) * q];
        for (i, &y) in grid.nodes.iter().enumerate() {
            let col = eval_ho_all(n_max, y * inv_sqrt2);
            for n in 0..=n_max {
                phi[n * q + i] = col[n];
            }
        }
        let mut data = vec![0.0f64; Self::table_len(n_max)];
        // parallel over the outermost (largest) index
        let chunks: Vec<(usize, Vec<f64>)> = (0..=n_max)
            .into_par_iter()
            .map(|d| {
                let base = binom4(d + 3);
                let len = binom4(d + 4) - base;
                let mut chunk = vec![0.0f64; len];
                let pd = &phi[d * q..(d + 1) * q];
                for c in 0..=d {
                    let pc = &phi[c * q..(c + 1) * q];
                    for b in 0..=c {
                        let pb = &phi[b * q..(b + 1) * q];
                        for a in 0..=b {
                            if (a + b + c + d) % 2 == 1 {
                                continue; // exact parity zero
                            }
                            let pa = &phi[a * q..(a + 1) * q];
                            let mut s = 0.0;
                            for i in 0..q {
                                s += grid.flat_weights[i] * pa[i] * pb[i] * pc[i] * pd[i];
                            }
                            chunk[tuple_index(a, b, c, d) - base] = s * inv_sqrt2;
                        }
                    }
                }
                (base, chunk)
            })
            .collect();
        for (base, chunk) in chunks {
            data[base..base + chunk.len()].copy_from_slice(&chunk);
        }
        Self { params, data }
    }

    pub fn params(&self) -> HoParams {
        self.params
    }

    pub fn n_max(&self) -> usize {
        self.params.n_max
    }

    /// I_{abcd}, any index order.
    #[inline]
    pub fn get(&self, a: usize, b: usize, c: usize, d: usize) -> f64 {
        debug_assert!(a <= self.params.n_max && b <= self.params.n_max);
        debug_assert!(c <= self.params.n_max && d <= self.params.n_max);
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        let (c, d) = if c <= d { (c, d) } else { (d, c) };
        let (a, c) = if a <= c { (a, c) } else { (c, a) };
        let (b, d) = if b <= d { (b, d) } else { (d, b) };
        let (b, c) = if b <= c { (b, c) } else { (c, b) };
        self.data[tuple_index(a, b, c, d)]
    }

    /// Range-checked variant of [`get`](Self::get).
    pub fn try_get(&self, a: usize, b: usize, c: usize, d: usize) -> Result<f64> {
        let n_max = self.params.n_max;
        for &i in &[a, b, c, d] {
            if i > n_max {
                return Err(Error::IndexOutOfRange { index: i, n_max });
            }
        }
        Ok(self.get(a, b, c, d))
    }

    /// Scan the table for invariant violations. The |I| ≤ I_{0000} bound is
    /// reported as a warning string rather than an error if it ever trips.
    pub fn validate(&self) -> Vec<String> {
        let mut report = Vec::new();
        let i0 = self.get(0, 0, 0, 0);
        let mut max_abs = 0.0f64;
        for &v in &self.data {
            if !v.is_finite() {
                report.push("non-finite table entry".to_string());
                break;
            }
            max_abs = max_abs.max(v.abs());
        }
        if max_abs > i0 * (1.0 + 1e-12) {
            report.push(format!("warning: |I| max {max_abs} exceeds I_0000 = {i0}"));
        }
        report
    }

    /// Write the table to a binary cache keyed by (n_max, quad_order).
    pub fn save_cache(&self, path: &Path) -> Result<()> {
        let mut buf = Vec::with_capacity(32 + self.data.len() * 8);
        buf.extend_from_slice(&CACHE_MAGIC);
        buf.extend_from_slice(&CACHE_VERSION.to_le_bytes());
        buf.extend_from_slice(&(self.params.n_max as u64).to_le_bytes());
        buf.extend_from_slice(&(self.params.quad_order as u64).to_le_bytes());
        buf.extend_from_slice(&(self.data.len() as u64).to_le_bytes());
        for &v in &self.data {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        buf.extend_from_slice(&fnv1a(&buf).to_le_bytes());
        let tmp = path.with_extension("tmp");
        std::fs::File::create(&tmp)?.write_all(&buf)?;
        std::fs::rename(&tmp, path)?;
        Ok(())
    }

    /// Load a cache written by [`save_cache`](Self::save_cache), validating
    /// magic, version, key, and checksum.
    pub fn load_cache(path: &Path, params: HoParams) -> Result<Self> {
        let mut buf = Vec::new();
        std::fs::File::open(path)?.read_to_end(&mut buf)?;
        if buf.len() < 40 {
            return Err(Error::CacheInvalid("truncated file".into()));
        }
        let (body, tail) = buf.split_at(buf.len() - 8);
        let stored = u64::from_le_bytes(tail.try_into().unwrap());
        if fnv1a(body) != stored {
            return Err(Error::CacheInvalid("checksum mismatch".into()));
        }
        if body[0..4] != CACHE_MAGIC {
            return Err(Error::CacheInvalid("bad magic".into()));
        }
        let version = u32::from_le_bytes(body[4..8].try_into().unwrap());
        if version != CACHE_VERSION {
            return Err(Error::CacheInvalid(format!("format version {version}")));
        }
        let n_max = u64::from_le_bytes(body[8..16].try_into().unwrap()) as usize;
        let quad_order = u64::from_le_bytes(body[16..24].try_into().unwrap()) as usize;
        if n_max != params.n_max || quad_order != params.quad_order {
            return Err(Error::CacheInvalid(format!(
                "cache keyed by (n_max={n_max}, quad_order={quad_order}), requested \
                 (n_max={}, quad_order={})",
                params.n_max, params.quad_order
            )));
        }
        let len = u64::from_le_bytes(body[24..32].try_into().unwrap()) as usize;
        if len != Self::table_len(n_max) || body.len() != 32 + len * 8 {
            return Err(Error::CacheInvalid("length mismatch".into()));
        }
        let data = body[32..]
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Ok(Self { params, data })
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;

    const SQRT_2PI: f64 = 2.5066282746310002;

    #[test]
    fn ho_energies() {
        assert_eq!(ho_energy(0), 0.5);
        assert_eq!(ho_energy(3), 3.5);
        assert_eq!(ho_energy(10), 10.5);
    }

    #[test]
    fn ground_state_peak() {
        assert!((eval_ho(0, 0.0) - std::f64::consts::PI.powf(-0.25)).abs() < 1e-15);
        assert_eq!(eval_ho(1, 0.0), 0.0);
    }

    #[test]
    fn quadrature_monomial_exactness() {
        // ∫ y^k e^{-y²} dy = Γ((k+1)/2) for even k
        let q = 12;
        let grid = QuadratureGrid::gauss_hermite(q).unwrap();
        let mut exact = std::f64::consts::PI.sqrt(); // k = 0
        for k in (0..2 * q).step_by(2) {
            if k > 0 {
                exact *= (k - 1) as f64 / 2.0;
            }
            let got = grid.integrate(|y| y.powi(k as i32));
            assert!(
                (got - exact).abs() <= 1e-12 * exact.abs().max(1.0),
                "k={k}: {got} vs {exact}"
            );
            let odd = grid.integrate(|y| y.powi(k as i32 + 1));
            assert!(odd.abs() < 1e-13 * exact.abs().max(1.0));
        }
    }

    #[test]
    fn wavefunction_norms_by_quadrature() {
        let params = HoParams::new(30).unwrap();
        let grid = QuadratureGrid::gauss_hermite(params.quad_order).unwrap();
        for n in 0..=params.n_max {
            // φ_n(x)² = poly_{2n}(x)·e^{−x²}, so the rule is exact here
            // with x identified with the node variable directly
            let norm: f64 = grid
                .nodes
                .iter()
                .zip(&grid.flat_weights)
                .map(|(&y, &w)| {
                    let v = eval_ho(n, y);
                    w * v * v
                })
                .sum();
            assert!((norm - 1.0).abs() < 1e-12, "n={n}: {norm}");
        }
    }

    #[test]
    fn analytic_delta_integrals() {
        let table = DeltaIntegralTable::build(HoParams::new(6).unwrap()).unwrap();
        assert!((table.get(0, 0, 0, 0) - 1.0 / SQRT_2PI).abs() < 1e-14);
        assert!((table.get(0, 0, 1, 1) - 0.5 / SQRT_2PI).abs() < 1e-14);
        assert_eq!(table.get(0, 0, 0, 1), 0.0);
    }

    #[test]
    fn permutation_symmetry_bit_identical() {
        let table = DeltaIntegralTable::build(HoParams::new(8).unwrap()).unwrap();
        // deterministic LCG over index 4-tuples
        let mut state = 0x243f6a8885a308d3u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 33) as usize % 9
        };
        for _ in 0..200 {
            let idx = [next(), next(), next(), next()];
            let reference = table.get(idx[0], idx[1], idx[2], idx[3]);
            let mut perm = idx;
            // run through all 24 permutations via Heap's algorithm
            let mut c = [0usize; 4];
            let mut i = 0;
            while i < 4 {
                if c[i] < i {
                    if i.is_multiple_of(2) {
                        perm.swap(0, i);
                    } else {
                        perm.swap(c[i], i);
                    }
                    let v = table.get(perm[0], perm[1], perm[2], perm[3]);
                    assert!(v.to_bits() == reference.to_bits());
                    c[i] += 1;
                    i = 0;
                } else {
                    c[i] = 0;
                    i += 1;
                }
            }
        }
    }

    #[test]
    fn parity_entries_are_exact_zero() {
        let table = DeltaIntegralTable::build(HoParams::new(7).unwrap()).unwrap();
        for a in 0..=7usize {
            for b in 0..=7usize {
                for c in 0..=7usize {
                    for d in 0..=7usize {
                        if (a + b + c + d) % 2 == 1 {
                            assert_eq!(table.get(a, b, c, d), 0.0);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn quadrature_order_converged() {
        let p1 = HoParams::new(10).unwrap();
        let p2 = HoParams::with_quad_order(10, 2 * p1.quad_order).unwrap();
        let t1 = DeltaIntegralTable::build(p1).unwrap();
        let t2 = DeltaIntegralTable::build(p2).unwrap();
        for a in 0..=10usize {
            for b in a..=10 {
                for c in b..=10 {
                    for d in c..=10 {
                        let diff = (t1.get(a, b, c, d) - t2.get(a, b, c, d)).abs();
                        assert!(diff <= 1e-12, "({a},{b},{c},{d}): {diff}");
                    }
                }
            }
        }
    }

    #[test]
    fn table_validate_clean() {
        let table = DeltaIntegralTable::build(HoParams::new(12).unwrap()).unwrap();
        assert!(table.validate().is_empty());
    }

    #[test]
    fn cache_roundtrip_and_key_check() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("table.bin");
        let params = HoParams::new(5).unwrap();
        let table = DeltaIntegralTable::build(params).unwrap();
        table.save_cache(&path).unwrap();
        let loaded = DeltaIntegralTable::load_cache(&path, params).unwrap();
        assert_eq!(loaded.data, table.data);
        // wrong key rejected
        let other = HoParams::new(6).unwrap();
        assert!(DeltaIntegralTable::load_cache(&path, other).is_err());
        // corruption rejected
        let mut bytes = std::fs::read(&path).unwrap();
        bytes[40] ^= 0xff;
        std::fs::write(&path, &bytes).unwrap();
        assert!(DeltaIntegralTable::load_cache(&path, params).is_err());
    }

    #[test]
    fn rejects_bad_params() {
        assert!(HoParams::new(0).is_err());
        assert!(HoParams::with_quad_order(5, 11).is_err());
        let table = DeltaIntegralTable::build(HoParams::new(4).unwrap()).unwrap();
        assert!(table.try_get(0, 0, 0, 5).is_err());
    }
}
