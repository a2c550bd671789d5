//! Assembly of the real symmetric Hamiltonian in the composite basis.
//!
//! H = H_0 + g_A W_AA + g_AB W_AB, with H_0 the diagonal kinetic+trap part,
//! W_AA the intra-species contact term and W_AB the pair-impurity contact
//! term. Parity is conserved, so blocks are assembled per parity.

use faer::Mat;
use rayon::prelude::*;

use crate::basis::DeltaIntegralTable;
use crate::error::{Error, Result};
use crate::fock::{CompositeState, ManyBodyBasis, PairState, Parity};
use crate::solver;

/// Contact coupling strengths, in units of a_ho·ħω.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingParams {
    pub g_a: f64,
    pub g_ab: f64,
}

impl CouplingParams {
    pub fn new(g_a: f64, g_ab: f64) -> Result<Self> {
        if !g_a.is_finite() || !g_ab.is_finite() || g_a < 0.0 || g_ab < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "couplings must be finite and nonnegative, got g_a = {g_a}, g_ab = {g_ab}"
            )));
        }
        Ok(Self { g_a, g_ab })
    }
}

/// One assembled parity block with its provenance.
#[derive(Debug, Clone)]
pub struct HamiltonianBlock {
    pub parity: Parity,
    pub matrix: Mat<f64>,
    pub params: CouplingParams,
    pub n_max: usize,
    pub cutoff: usize,
}

impl HamiltonianBlock {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

/// Diagonal kinetic+trap energy of a composite state: quanta + 3/2.
#[inline]
pub fn diagonal_energy(s: &CompositeState) -> f64 {
    s.quanta() as f64 + 1.5
}

/// ⟨S(a,b)| δ(x₁−x₂) |S(c,d)⟩ · δ_{m,m'}: the coupling-independent A–A
/// factor 4·N_ab·N_cd·I_{abcd}.
#[inline]
pub fn w_aa_element(si: &CompositeState, sj: &CompositeState, table: &DeltaIntegralTable) -> f64 {
    if si.m != sj.m {
        return 0.0;
    }
    let (a, b) = (si.pair.n1, si.pair.n2);
    let (c, d) = (sj.pair.n1, sj.pair.n2);
    4.0 * si.pair.symm_factor() * sj.pair.symm_factor() * table.get(a, b, c, d)
}

/// ⟨S(a,b), m| Σ_j δ(x_j−y) |S(c,d), m'⟩: expansion over the ordered
/// products with ⟨p q, m|δ(x₁−y)|r s, m'⟩ = δ_{q,s} I_{p,m,r,m'} and
/// ⟨p q, m|δ(x₂−y)|r s, m'⟩ = δ_{p,r} I_{q,m,s,m'}.
#[inline]
pub fn w_ab_element(si: &CompositeState, sj: &CompositeState, table: &DeltaIntegralTable) -> f64 {
    let (a, b, m) = (si.pair.n1, si.pair.n2, si.m);
    let (c, d, mp) = (sj.pair.n1, sj.pair.n2, sj.m);
    let mut v = 0.0;
    for (p, q) in [(a, b), (b, a)] {
        for (r, s) in [(c, d), (d, c)] {
            if q == s {
                v += table.get(p, m, r, mp);
            }
            if p == r {
                v += table.get(q, m, s, mp);
            }
        }
    }
    si.pair.symm_factor() * sj.pair.symm_factor() * v
}

/// Full matrix element ⟨si| H |sj⟩.
pub fn element(
    si: &CompositeState,
    sj: &CompositeState,
    params: CouplingParams,
    table: &DeltaIntegralTable,
) -> f64 {
    let mut v = params.g_a * w_aa_element(si, sj, table)
        + params.g_ab * w_ab_element(si, sj, table);
    if si == sj {
        v += diagonal_energy(si);
    }
    v
}

/// Assemble one parity block. The upper triangle is computed and mirrored,
/// so the result is symmetric to the bit.
pub fn assemble_block(
    basis: &ManyBodyBasis,
    parity: Parity,
    params: CouplingParams,
    table: &DeltaIntegralTable,
) -> Result<HamiltonianBlock> {
    if table.n_max() < basis.n_max {
        return Err(Error::BasisTableMismatch(format!(
            "table n_max = {} < basis n_max = {}",
            table.n_max(),
            basis.n_max
        )));
    }
    let idx = basis.block(parity);
    let n = idx.len();
    let states: Vec<CompositeState> = idx.iter().map(|&i| basis.state(i)).collect();
    let mut matrix = Mat::<f64>::zeros(n, n);
    // parallel over rows; each row writes its upper-triangle slice
    {
        let rows: Vec<(usize, Vec<f64>)> = (0..n)
            .into_par_iter()
            .map(|i| {
                let si = &states[i];
                let mut row = vec![0.0f64; n - i];
                for j in i..n {
                    row[j - i] = element(si, &states[j], params, table);
                }
                (i, row)
            })
            .collect();
        for (i, row) in rows {
            for (off, v) in row.into_iter().enumerate() {
                matrix[(i, i + off)] = v;
                matrix[(i + off, i)] = v;
            }
        }
    }
    Ok(HamiltonianBlock {
        parity,
        matrix,
        params,
        n_max: basis.n_max,
        cutoff: basis.cutoff,
    })
}

/// Both parity blocks.
pub fn assemble(
    basis: &ManyBodyBasis,
    params: CouplingParams,
    table: &DeltaIntegralTable,
) -> Result<(HamiltonianBlock, HamiltonianBlock)> {
    Ok((
        assemble_block(basis, Parity::Even, params, table)?,
        assemble_block(basis, Parity::Odd, params, table)?,
    ))
}

/// Two-boson (A-sector only) Hamiltonian over pair states with
/// n1 + n2 ≤ cutoff, optionally restricted to one pair parity.
pub fn two_boson_hamiltonian(
    n_max: usize,
    cutoff: usize,
    g_a: f64,
    table: &DeltaIntegralTable,
    pair_parity: Option<Parity>,
) -> Result<(Vec<PairState>, Mat<f64>)> {
    if table.n_max() < n_max {
        return Err(Error::BasisTableMismatch(format!(
            "table n_max = {} < requested n_max = {n_max}",
            table.n_max()
        )));
    }
    let mut pairs = Vec::new();
    for s in 0..=cutoff {
        if let Some(p) = pair_parity {
            if Parity::of_quanta(s) != p {
                continue;
            }
        }
        for n1 in 0..=(s / 2).min(n_max) {
            let n2 = s - n1;
            if n2 <= n_max {
                pairs.push(PairState::new(n1, n2));
            }
        }
    }
    pairs.sort_by_key(|p| (p.quanta(), p.n1));
    let n = pairs.len();
    let mut h = Mat::<f64>::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let (pi, pj) = (pairs[i], pairs[j]);
            let mut v = 4.0
                * pi.symm_factor()
                * pj.symm_factor()
                * table.get(pi.n1, pi.n2, pj.n1, pj.n2)
                * g_a;
            if i == j {
                v += pi.quanta() as f64 + 1.0;
            }
            h[(i, j)] = v;
            h[(j, i)] = v;
        }
    }
    Ok((pairs, h))
}

/// Structural check report for an assembled block.
#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub max_asymmetry: f64,
    pub min_diagonal: f64,
    /// Largest sampled element connecting this block to the opposite parity.
    pub max_cross_parity: f64,
    /// At g_AB = 0: worst deviation of block eigenvalues from the separable
    /// (two-boson energy) + (m + 1/2) prediction. None when g_AB ≠ 0.
    pub separability_max_dev: Option<f64>,
    pub violations: Vec<String>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Check symmetry, diagonal bounds, parity purity (sampled against the
/// opposite block), and, when g_AB = 0, the separable spectrum.
pub fn validate(
    block: &HamiltonianBlock,
    basis: &ManyBodyBasis,
    table: &DeltaIntegralTable,
) -> Result<ValidationReport> {
    let n = block.dim();
    let m = &block.matrix;
    let mut max_asym = 0.0f64;
    let mut scale = 0.0f64;
    let mut min_diag = f64::INFINITY;
    for i in 0..n {
        min_diag = min_diag.min(m[(i, i)]);
        for j in i..n {
            max_asym = max_asym.max((m[(i, j)] - m[(j, i)]).abs());
            scale = scale.max(m[(i, j)].abs());
        }
    }
    let mut violations = Vec::new();
    if max_asym > 1e-14 * scale.max(1.0) {
        violations.push(format!("asymmetry {max_asym} above 1e-14 relative"));
    }
    if min_diag < 1.5 - 1e-12 {
        violations.push(format!("diagonal entry {min_diag} below 1.5"));
    }
    // sampled cross-parity elements must vanish identically
    let other = match block.parity {
        Parity::Even => Parity::Odd,
        Parity::Odd => Parity::Even,
    };
    let mine = basis.block(block.parity);
    let theirs = basis.block(other);
    let mut max_cross = 0.0f64;
    for &i in mine.iter().step_by((mine.len() / 64).max(1)) {
        for &j in theirs.iter().step_by((theirs.len() / 64).max(1)) {
            let v = element(
                &basis.state(i),
                &basis.state(j),
                block.params,
                table,
            );
            max_cross = max_cross.max(v.abs());
        }
    }
    if max_cross != 0.0 {
        violations.push(format!("cross-parity element {max_cross} is nonzero"));
    }
    let separability = if block.params.g_ab == 0.0 {
        let dev = separability_deviation(block, basis, table)?;
        if dev > 1e-8 {
            violations.push(format!("separable-spectrum deviation {dev}"));
        }
        Some(dev)
    } else {
        None
    };
    Ok(ValidationReport {
        max_asymmetry: max_asym,
        min_diagonal: min_diag,
        max_cross_parity: max_cross,
        separability_max_dev: separability,
        violations,
    })
}

/// At g_AB = 0 the block spectrum must be the union over m of
/// (two-boson spectrum at pair cutoff N_tot − m) + (m + 1/2).
fn separability_deviation(
    block: &HamiltonianBlock,
    basis: &ManyBodyBasis,
    table: &DeltaIntegralTable,
) -> Result<f64> {
    let eigen = solver::diagonalize(block)?;
    let mut predicted = Vec::new();
    for m in 0..=basis.cutoff.min(basis.n_max) {
        let pair_cutoff = basis.cutoff - m;
        let pair_parity = match (block.parity, Parity::of_quanta(m)) {
            (Parity::Even, Parity::Even) | (Parity::Odd, Parity::Odd) => Parity::Even,
            _ => Parity::Odd,
        };
        let (pairs, h) =
            two_boson_hamiltonian(basis.n_max, pair_cutoff, block.params.g_a, table, Some(pair_parity))?;
        if pairs.is_empty() {
            continue;
        }
        let sector = solver::diagonalize_matrix(h.as_ref(), "two-boson sector")?;
        for &e in &sector.energies {
            predicted.push(e + m as f64 + 0.5);
        }
    }
    predicted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    if predicted.len() != eigen.energies.len() {
        return Err(Error::DimensionMismatch(format!(
            "separable prediction has {} levels, block has {}",
            predicted.len(),
            eigen.energies.len()
        )));
    }
    let mut dev = 0.0f64;
    for (a, b) in eigen.energies.iter().zip(&predicted) {
        dev = dev.max((a - b).abs());
    }
    Ok(dev)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{DeltaIntegralTable, HoParams};

    const SQRT_2PI: f64 = 2.5066282746310002;

    fn table(n_max: usize) -> DeltaIntegralTable {
        DeltaIntegralTable::build(HoParams::new(n_max).unwrap()).unwrap()
    }

    #[test]
    #[allow(clippy::needless_range_loop)]
    fn noninteracting_is_diagonal() {
        let basis = ManyBodyBasis::enumerate(6, 6).unwrap();
        let t = table(6);
        let params = CouplingParams::new(0.0, 0.0).unwrap();
        for parity in [Parity::Even, Parity::Odd] {
            let block = assemble_block(&basis, parity, params, &t).unwrap();
            let idx = basis.block(parity);
            for i in 0..block.dim() {
                for j in 0..block.dim() {
                    let expect = if i == j {
                        basis.state(idx[i]).quanta() as f64 + 1.5
                    } else {
                        0.0
                    };
                    assert!((block.matrix[(i, j)] - expect).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn ground_diagonal_element() {
        // ⟨(0,0;0)|H|(0,0;0)⟩ at (g_A = 25, g_AB = 0) = 1.5 + 25/√(2π)
        let basis = ManyBodyBasis::enumerate(4, 4).unwrap();
        let t = table(4);
        let params = CouplingParams::new(25.0, 0.0).unwrap();
        let block = assemble_block(&basis, Parity::Even, params, &t).unwrap();
        let expect = 1.5 + 25.0 / SQRT_2PI;
        assert!((block.matrix[(0, 0)] - expect).abs() < 1e-12);
        assert!((expect - 11.4736).abs() < 1e-4);
    }

    #[test]
    fn cross_parity_elements_vanish() {
        let basis = ManyBodyBasis::enumerate(5, 5).unwrap();
        let t = table(5);
        let params = CouplingParams::new(3.0, 2.0).unwrap();
        for &i in basis.block(Parity::Even) {
            for &j in basis.block(Parity::Odd) {
                let v = element(&basis.state(i), &basis.state(j), params, &t);
                assert_eq!(v, 0.0);
            }
        }
    }

    #[test]
    fn linearity_in_couplings() {
        let basis = ManyBodyBasis::enumerate(5, 5).unwrap();
        let t = table(5);
        let a = assemble_block(&basis, Parity::Even, CouplingParams::new(1.0, 0.0).unwrap(), &t)
            .unwrap();
        let b = assemble_block(&basis, Parity::Even, CouplingParams::new(0.0, 1.0).unwrap(), &t)
            .unwrap();
        let zero =
            assemble_block(&basis, Parity::Even, CouplingParams::new(0.0, 0.0).unwrap(), &t)
                .unwrap();
        let c = assemble_block(&basis, Parity::Even, CouplingParams::new(3.5, 1.25).unwrap(), &t)
            .unwrap();
        for i in 0..c.dim() {
            for j in 0..c.dim() {
                let interp = zero.matrix[(i, j)]
                    + 3.5 * (a.matrix[(i, j)] - zero.matrix[(i, j)])
                    + 1.25 * (b.matrix[(i, j)] - zero.matrix[(i, j)]);
                assert!((c.matrix[(i, j)] - interp).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn validate_clean_and_separable() {
        let basis = ManyBodyBasis::enumerate(8, 8).unwrap();
        let t = table(8);
        let block =
            assemble_block(&basis, Parity::Even, CouplingParams::new(25.0, 0.0).unwrap(), &t)
                .unwrap();
        let report = validate(&block, &basis, &t).unwrap();
        assert!(report.is_clean(), "{:?}", report.violations);
        assert!(report.separability_max_dev.unwrap() < 1e-9);
    }

    #[test]
    fn noninteracting_shell_spectrum() {
        let basis = ManyBodyBasis::enumerate(6, 6).unwrap();
        let t = table(6);
        let block =
            assemble_block(&basis, Parity::Even, CouplingParams::new(0.0, 0.0).unwrap(), &t)
                .unwrap();
        let eigen = solver::diagonalize(&block).unwrap();
        let mut expect: Vec<f64> = basis
            .block(Parity::Even)
            .iter()
            .map(|&i| basis.state(i).quanta() as f64 + 1.5)
            .collect();
        expect.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (e, x) in eigen.energies.iter().zip(&expect) {
            assert!((e - x).abs() < 1e-10);
        }
    }

    #[test]
    fn rejects_small_table() {
        let basis = ManyBodyBasis::enumerate(8, 8).unwrap();
        let t = table(4);
        let r = assemble_block(&basis, Parity::Even, CouplingParams::new(1.0, 1.0).unwrap(), &t);
        assert!(r.is_err());
    }

    #[test]
    fn rejects_bad_couplings() {
        assert!(CouplingParams::new(-1.0, 0.0).is_err());
        assert!(CouplingParams::new(1.0, f64::NAN).is_err());
    }
}
