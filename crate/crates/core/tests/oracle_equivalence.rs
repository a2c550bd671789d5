//! Cross-checks of the production pipeline against independent slow paths:
//! exact matrix-exponential propagation, brute-force partial traces in the
//! ordered product basis, real-space quadrature matrix elements, and the
//! real-space grid diagonalizer.

use num_complex::Complex64;

use quench_core::basis::{DeltaIntegralTable, HoParams};
use quench_core::fock::{ManyBodyBasis, Parity};
use quench_core::hamiltonian::{self, CouplingParams};
use quench_core::observables;
use quench_core::oracle;
use quench_core::quench;
use quench_core::solver;

fn setup(n: usize) -> (ManyBodyBasis, DeltaIntegralTable) {
    (
        ManyBodyBasis::enumerate(n, n).unwrap(),
        DeltaIntegralTable::build(HoParams::new(n).unwrap()).unwrap(),
    )
}

#[test]
fn eigenbasis_propagation_matches_expm() {
    let (basis, table) = setup(12);
    let init = quench::prepare_initial(&basis, &table, 25.0).unwrap();
    let block = hamiltonian::assemble_block(
        &basis,
        Parity::Even,
        CouplingParams::new(25.0, 10.0).unwrap(),
        &table,
    )
    .unwrap();
    let eigen = solver::diagonalize(&block).unwrap();
    let q = quench::project(&init, &eigen).unwrap();
    let psi0: Vec<Complex64> = init.psi.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    for t in [0.3, 1.9, 5.1] {
        let fast = quench::evolve_state(&q, &eigen, t);
        let slow = oracle::propagate_expm(block.matrix.as_ref(), &psi0, t).unwrap();
        let diff: f64 = fast
            .iter()
            .zip(&slow)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        assert!(diff < 1e-8, "t={t}: propagation mismatch {diff}");
    }
}

/// Brute-force reduced matrices through the full three-particle density
/// matrix in the ordered product basis phi_p(x1) phi_q(x2) phi_m(y).
#[allow(clippy::needless_range_loop)]
fn partial_traces(
    psi: &[Complex64],
    basis: &ManyBodyBasis,
) -> (Vec<Vec<Complex64>>, Vec<Vec<Complex64>>) {
    let n = basis.n_max + 1;
    let mut d = vec![Complex64::new(0.0, 0.0); n * n * n];
    for (c, &gi) in psi.iter().zip(basis.block(Parity::Even)) {
        let s = basis.state(gi);
        let (p, q, m) = (s.pair.n1, s.pair.n2, s.m);
        if p == q {
            d[(p * n + q) * n + m] = *c;
        } else {
            let half = c * std::f64::consts::FRAC_1_SQRT_2;
            d[(p * n + q) * n + m] = half;
            d[(q * n + p) * n + m] = half;
        }
    }
    let dim = n * n * n;
    // full pure-state density matrix rho = |psi><psi|, then literal traces
    let full: Vec<Complex64> = (0..dim * dim)
        .map(|ij| d[ij / dim] * d[ij % dim].conj())
        .collect();
    let mut rho_b = vec![vec![Complex64::new(0.0, 0.0); n]; n];
    let mut rho_a = vec![vec![Complex64::new(0.0, 0.0); n]; n];
    for p in 0..n {
        for q in 0..n {
            for m in 0..n {
                let row = (p * n + q) * n + m;
                for mp in 0..n {
                    let col = (p * n + q) * n + mp;
                    rho_b[m][mp] += full[row * dim + col];
                }
                for pp in 0..n {
                    let col = (pp * n + q) * n + m;
                    rho_a[p][pp] += full[row * dim + col];
                }
            }
        }
    }
    (rho_a, rho_b)
}

#[test]
fn rspdms_match_ordered_basis_partial_trace() {
    let (basis, table) = setup(8);
    let init = quench::prepare_initial(&basis, &table, 25.0).unwrap();
    let block = hamiltonian::assemble_block(
        &basis,
        Parity::Even,
        CouplingParams::new(25.0, 25.0).unwrap(),
        &table,
    )
    .unwrap();
    let eigen = solver::diagonalize(&block).unwrap();
    let q = quench::project(&init, &eigen).unwrap();
    for t in [0.0, 1.1, 4.2] {
        let psi = quench::evolve_state(&q, &eigen, t);
        let fast_a = observables::rspdm_a(&psi, &basis).unwrap();
        let fast_b = observables::rspdm_b(&psi, &basis).unwrap();
        let (slow_a, slow_b) = partial_traces(&psi, &basis);
        let n = basis.n_max + 1;
        for i in 0..n {
            for j in 0..n {
                assert!(
                    (fast_a.matrix[(i, j)] - slow_a[i][j]).norm() < 1e-10,
                    "rho_A[{i},{j}] at t={t}"
                );
                assert!(
                    (fast_b.matrix[(i, j)] - slow_b[i][j]).norm() < 1e-10,
                    "rho_B[{i},{j}] at t={t}"
                );
            }
        }
    }
}

#[test]
fn hamiltonian_elements_match_real_space_quadrature() {
    let (basis, table) = setup(6);
    let (g_a, g_ab) = (25.0, 13.0);
    let block = hamiltonian::assemble_block(
        &basis,
        Parity::Even,
        CouplingParams::new(g_a, g_ab).unwrap(),
        &table,
    )
    .unwrap();
    let idx = basis.block(Parity::Even);
    for (r, &gi) in idx.iter().enumerate() {
        for (c, &gj) in idx.iter().enumerate().take(r + 1) {
            let s1 = basis.state(gi);
            let s2 = basis.state(gj);
            let mut expect = oracle::element_quadrature(s1, s2, g_a, g_ab, 7.5, 151);
            if r == c {
                expect += s1.quanta() as f64 + 1.5;
            }
            assert!(
                (block.matrix[(r, c)] - expect).abs() < 1e-8,
                "element ({r},{c}): {} vs {expect}",
                block.matrix[(r, c)]
            );
        }
    }
}

#[test]
fn oracle_and_production_converge_toward_each_other() {
    // monotone gap shrinkage on a 3-step resolution ladder
    let mut gaps = Vec::new();
    for (n_tot, points) in [(8, 21), (12, 31), (16, 41)] {
        let (basis, table) = setup(n_tot);
        let block = hamiltonian::assemble_block(
            &basis,
            Parity::Even,
            CouplingParams::new(5.0, 5.0).unwrap(),
            &table,
        )
        .unwrap();
        let (e_ho, _) = solver::ground_state(block.matrix.as_ref(), 1e-12).unwrap();
        let cfg = oracle::GridOracleConfig::new(6.0, points).unwrap();
        let e_grid = oracle::three_body_grid_spectrum(cfg, 5.0, 5.0, 1).unwrap()[0];
        gaps.push((e_ho - e_grid).abs());
    }
    assert!(gaps[0] > gaps[1] && gaps[1] > gaps[2], "gaps not shrinking: {gaps:?}");
}
