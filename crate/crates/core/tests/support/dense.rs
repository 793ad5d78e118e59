//! Brute-force `2^n × 2^n` density matrices for small qubit counts.

use nalgebra::DMatrix;
use num_complex::Complex64;
use zxtoric::pauli::{Pauli, PauliOperator};
use zxtoric::stabilizer::MixedStabilizerState;

pub type Matrix = DMatrix<Complex64>;

fn i_pow(p: u8) -> Complex64 {
    match p % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// Matrix of `op`; qubit `q` is bit `q` of the basis index.
pub fn pauli(op: &PauliOperator) -> Matrix {
    let n = op.n_qubits();
    let dim = 1usize << n;
    let mut m = Matrix::zeros(dim, dim);
    let mut flip = 0usize;
    for q in 0..n {
        if op.x_bit(q) {
            flip |= 1 << q;
        }
    }
    for col in 0..dim {
        let mut amp = i_pow(op.phase_exp());
        for q in 0..n {
            let bit = (col >> q) & 1 == 1;
            let sign = if bit { -1.0 } else { 1.0 };
            match op.get(q) {
                Pauli::I | Pauli::X => {}
                Pauli::Z => amp *= sign,
                Pauli::Y => amp *= Complex64::new(0.0, sign),
            }
        }
        m[(col ^ flip, col)] = amp;
    }
    m
}

/// `ρ = 2^{-n} ∏_g (1 + g)`.
pub fn density(state: &MixedStabilizerState) -> Matrix {
    let n = state.n_qubits();
    let dim = 1usize << n;
    let id = Matrix::identity(dim, dim);
    let mut rho = id.clone();
    for g in state.generators() {
        rho = &rho * (&id + pauli(g));
    }
    rho.scale(1.0 / dim as f64)
}

/// `½ρ + ½KρK†`.
pub fn dephase(rho: &Matrix, k: &PauliOperator) -> Matrix {
    let km = pauli(k);
    (rho + &km * rho * km.adjoint()).scale(0.5)
}

pub fn trace(m: &Matrix) -> Complex64 {
    m.trace()
}

pub fn purity(rho: &Matrix) -> f64 {
    (rho * rho).trace().re
}

/// `Tr[ρPρP†] / Tr[ρ²]`.
pub fn renyi2(rho: &Matrix, p: &PauliOperator) -> f64 {
    let pm = pauli(p);
    (rho * &pm * rho * pm.adjoint()).trace().re / purity(rho)
}

/// `Tr[Pρ]`.
pub fn expectation(rho: &Matrix, p: &PauliOperator) -> Complex64 {
    (pauli(p) * rho).trace()
}

/// Partial transpose on the qubits in `region`.
pub fn partial_transpose(rho: &Matrix, region: &[usize]) -> Matrix {
    let mask: usize = region.iter().map(|&q| 1usize << q).sum();
    let dim = rho.nrows();
    Matrix::from_fn(dim, dim, |i, j| {
        let swap = (i ^ j) & mask;
        rho[(i ^ swap, j ^ swap)]
    })
}

/// `log2 ‖ρ^{T_A}‖₁`.
pub fn log_negativity(rho: &Matrix, region: &[usize]) -> f64 {
    let pt = partial_transpose(rho, region);
    let eig = pt.symmetric_eigenvalues();
    eig.iter().map(|e| e.abs()).sum::<f64>().log2()
}

/// Largest entry-wise deviation.
pub fn max_abs_diff(a: &Matrix, b: &Matrix) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Mismatch counts from comparing stabilizer results against dense matrices.
#[derive(Debug, Default, Clone, Copy)]
pub struct OracleTally {
    pub instances: usize,
    pub channel_checks: usize,
    pub channel_mismatches: usize,
    pub purity_mismatches: usize,
    pub renyi_checks: usize,
    pub renyi_mismatches: usize,
    pub expectation_checks: usize,
    pub expectation_mismatches: usize,
    pub negativity_checks: usize,
    pub negativity_mismatches: usize,
}

impl OracleTally {
    pub fn all_match(&self) -> bool {
        self.channel_mismatches
            + self.purity_mismatches
            + self.renyi_mismatches
            + self.expectation_mismatches
            + self.negativity_mismatches
            == 0
    }
}

/// Random states on 1..=6 qubits, each dephased by a few random Paulis.
/// Entries of every matrix involved are dyadic rationals, so agreement is
/// checked with `==` except for the eigenvalue-based negativity.
pub fn tally<R: rand::Rng>(instances: usize, rng: &mut R) -> OracleTally {
    use zxtoric::observables::{negativity, renyi2_correlator};

    let mut t = OracleTally {
        instances,
        ..Default::default()
    };
    for _ in 0..instances {
        let n = rng.gen_range(1..=6);
        let k = rng.gen_range(0..=n);
        let mut state = super::random::state(n, k, rng);
        let mut rho = density(&state);
        for _ in 0..rng.gen_range(1..=4) {
            let kraus = super::random::pauli(n, false, rng);
            state.apply_dephasing(&kraus).unwrap();
            rho = dephase(&rho, &kraus);
            t.channel_checks += 1;
            if density(&state) != rho {
                t.channel_mismatches += 1;
            }
        }
        if purity(&rho) != 2f64.powi(state.k() as i32 - n as i32) {
            t.purity_mismatches += 1;
        }
        for _ in 0..4 {
            let p = super::random::pauli(n, true, rng);
            t.renyi_checks += 1;
            let stab = if renyi2_correlator(&state, &p).unwrap() {
                1.0
            } else {
                0.0
            };
            if renyi2(&rho, &p) != stab {
                t.renyi_mismatches += 1;
            }
            t.expectation_checks += 1;
            let e = state.contains(&p).unwrap().expectation() as f64;
            if expectation(&rho, &p) != Complex64::new(e, 0.0) {
                t.expectation_mismatches += 1;
            }
        }
        let region: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.5)).collect();
        t.negativity_checks += 1;
        let exact = negativity(&state, &region).unwrap();
        if (log_negativity(&rho, &region) - exact).abs() > 1e-9 {
            t.negativity_mismatches += 1;
        }
    }
    t
}
