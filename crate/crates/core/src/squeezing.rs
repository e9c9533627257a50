//! Twisted-state moments, their decay under the channel, and the Wineland
//! squeezing parameter.
//!
//! For N exchange-symmetric qubits, `xi^2` follows from three two-qubit
//! correlators:
//!
//! ```text
//! xi^2 = [1 + 2 (N - 1) (<s+ s-> - |<s- s->|)] / <s_z>^2,   zeta^2 = max{0, 1 - xi^2}
//! ```
//!
//! The `brute_force_*` functions rebuild the same numbers from the full
//! `2^N`-dimensional state and serve as the reference implementation.

use num_complex::Complex64;
use serde::Serialize;

use crate::channel::{apply_product, kraus, DensityMatrix};
use crate::error::{Error, Result};
use crate::params::EnsembleParams;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Register size limit for [`brute_force_moments`] (pure state only).
pub const MAX_PURE_QUBITS: usize = 14;
/// Register size limit for [`brute_force_xi`] (full density matrix).
pub const MAX_MIXED_QUBITS: usize = 12;

/// `<s_z>` of one qubit and the pair correlators `<s+ s->`, `<s- s->`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Moments {
    pub sz: f64,
    pub spm: f64,
    pub smm: Complex64,
}

impl Moments {
    /// All atoms in the ground state.
    pub const GROUND: Moments = Moments {
        sz: -1.0,
        spm: 0.0,
        smm: ZERO,
    };
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SqueezingValue {
    pub xi2: f64,
    pub zeta2: f64,
}

impl SqueezingValue {
    pub fn from_xi2(xi2: f64) -> Self {
        Self {
            xi2,
            zeta2: (1.0 - xi2).max(0.0),
        }
    }
}

/// `x^k` with `x^0 = 1` for every `x`, including 0.
fn pow_or_one(x: f64, k: usize) -> f64 {
    if k == 0 {
        1.0
    } else {
        x.powi(k as i32)
    }
}

/// Closed-form moments of `exp(-i theta J_x^2 / 2) |g...g>` with no range
/// checks on `theta`.
pub fn twisted_state_moments(n_atoms: usize, theta: f64) -> Moments {
    let n = n_atoms;
    let a = 1.0 - pow_or_one(theta.cos(), n.saturating_sub(2));
    Moments {
        sz: -pow_or_one((theta / 2.0).cos(), n.saturating_sub(1)),
        spm: a / 8.0,
        smm: Complex64::new(
            -a / 8.0,
            -(theta / 2.0).sin() * pow_or_one((theta / 2.0).cos(), n.saturating_sub(2)) / 2.0,
        ),
    }
}

pub fn initial_moments(e: &EnsembleParams) -> Moments {
    twisted_state_moments(e.n_atoms(), e.theta())
}

/// Moments after the amplitude-damping channel with survival `p_surv` on every qubit.
pub fn evolved_moments(m0: &Moments, p_surv: f64) -> Result<Moments> {
    if !(0.0..=1.0).contains(&p_surv) {
        return Err(Error::Domain {
            what: "survival population",
            value: p_surv,
        });
    }
    Ok(Moments {
        sz: p_surv * m0.sz + p_surv - 1.0,
        spm: p_surv * m0.spm,
        smm: m0.smm * p_surv,
    })
}

pub fn xi_squared(m: &Moments, n_atoms: usize) -> Result<SqueezingValue> {
    if n_atoms < 2 {
        return Err(Error::invalid(
            "n_atoms",
            n_atoms,
            "at least two atoms are required",
        ));
    }
    if m.sz == 0.0 {
        return Err(Error::SingularMeanSpin);
    }
    let xi2 = (1.0 + 2.0 * (n_atoms as f64 - 1.0) * (m.spm - m.smm.norm())) / (m.sz * m.sz);
    Ok(SqueezingValue::from_xi2(xi2))
}

/// In-place Walsh–Hadamard transform, normalized to be unitary.
fn hadamard_all(v: &mut [Complex64]) {
    let n = v.len();
    let mut len = 1;
    while len < n {
        for start in (0..n).step_by(2 * len) {
            for i in start..start + len {
                let (a, b) = (v[i], v[i + len]);
                v[i] = a + b;
                v[i + len] = a - b;
            }
        }
        len *= 2;
    }
    let scale = 1.0 / (n as f64).sqrt();
    for x in v.iter_mut() {
        *x *= scale;
    }
}

/// The twisted state as a `2^N` amplitude vector.
///
/// `J_x = H J_z H` with `H` the Hadamard on every qubit, and `J_z` is
/// diagonal with eigenvalue `(n_excited - n_ground) / 2`, so the exponential
/// is applied exactly as a diagonal phase between two Hadamard transforms.
pub fn brute_force_state(e: &EnsembleParams) -> Result<Vec<Complex64>> {
    let n = e.n_atoms();
    if n > MAX_PURE_QUBITS {
        return Err(Error::TooLarge {
            what: "brute-force state",
            size: n,
            limit: MAX_PURE_QUBITS,
        });
    }
    let dim = 1usize << n;
    let mut psi = vec![ZERO; dim];
    psi[dim - 1] = Complex64::new(1.0, 0.0);
    hadamard_all(&mut psi);
    for (x, amp) in psi.iter_mut().enumerate() {
        let excited = n as f64 - x.count_ones() as f64;
        let m = excited - n as f64 / 2.0;
        *amp *= Complex64::from_polar(1.0, -e.theta() * m * m / 2.0);
    }
    hadamard_all(&mut psi);
    Ok(psi)
}

/// Reduced density matrix of qubits 0 and 1 of a pure state.
pub fn leading_pair(psi: &[Complex64]) -> Result<DensityMatrix> {
    let rest = psi.len() / 4;
    let mut rho = nalgebra::DMatrix::from_element(4, 4, ZERO);
    for a in 0..4 {
        for b in 0..4 {
            let mut s = ZERO;
            for r in 0..rest {
                s += psi[a * rest + r] * psi[b * rest + r].conj();
            }
            rho[(a, b)] = s;
        }
    }
    DensityMatrix::new(rho)
}

/// Correlators read off a two-qubit density matrix.
pub fn moments_from_pair(rho: &DensityMatrix) -> Result<Moments> {
    if rho.qubits() != 2 {
        return Err(Error::DimensionMismatch {
            expected: "2 qubits".into(),
            found: format!("{} qubits", rho.qubits()),
        });
    }
    let m = rho.matrix();
    // Index = 2 * bit(q0) + bit(q1), bit 0 = excited.
    Ok(Moments {
        sz: (m[(0, 0)] + m[(1, 1)] - m[(2, 2)] - m[(3, 3)]).re,
        spm: m[(2, 1)].re,
        smm: m[(0, 3)],
    })
}

pub fn brute_force_moments(e: &EnsembleParams) -> Result<Moments> {
    let psi = brute_force_state(e)?;
    moments_from_pair(&leading_pair(&psi)?)
}

/// Mean collective spin and symmetrized covariance `(<J_a J_b + J_b J_a>/2 - <J_a><J_b>)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpinStatistics {
    pub mean: [f64; 3],
    pub covariance: [[f64; 3]; 3],
}

impl SpinStatistics {
    pub fn variance(&self, axis: usize) -> f64 {
        self.covariance[axis][axis]
    }

    pub fn mean_norm(&self) -> f64 {
        self.mean.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Smallest spin variance orthogonal to the mean spin, from the exact
    /// eigenvalues of the 2x2 perpendicular covariance block.
    pub fn min_perpendicular_variance(&self) -> Result<f64> {
        let norm = self.mean_norm();
        if norm == 0.0 {
            return Err(Error::SingularMeanSpin);
        }
        let n = self.mean.map(|x| x / norm);
        let axis = (0..3)
            .min_by(|&a, &b| n[a].abs().total_cmp(&n[b].abs()))
            .unwrap_or(0);
        let mut k = [0.0; 3];
        k[axis] = 1.0;
        let e1 = normalize(cross(n, k));
        let e2 = cross(n, e1);
        let form = |u: [f64; 3], v: [f64; 3]| -> f64 {
            (0..3)
                .map(|i| {
                    (0..3)
                        .map(|j| u[i] * self.covariance[i][j] * v[j])
                        .sum::<f64>()
                })
                .sum()
        };
        let (c11, c22, c12) = (form(e1, e1), form(e2, e2), form(e1, e2));
        let mid = 0.5 * (c11 + c22);
        let rad = (0.25 * (c11 - c22).powi(2) + c12 * c12).sqrt();
        Ok(mid - rad)
    }
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn normalize(v: [f64; 3]) -> [f64; 3] {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    v.map(|x| x / n)
}

type Pauli = [[Complex64; 2]; 2];

fn paulis() -> [Pauli; 3] {
    let o = ZERO;
    let one = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    [
        [[o, one], [one, o]],
        [[o, -i], [i, o]],
        [[one, o], [o, -one]],
    ]
}

/// `tr(rho (A (x) B))` for a two-qubit `rho`.
fn pair_expectation(rho: &DensityMatrix, a: &Pauli, b: &Pauli) -> f64 {
    let m = rho.matrix();
    let mut s = ZERO;
    for x in 0..4 {
        for y in 0..4 {
            let op = a[x >> 1][y >> 1] * b[x & 1][y & 1];
            s += m[(y, x)] * op;
        }
    }
    s.re
}

/// Collective-spin statistics of an N-qubit state, assembled from its
/// pair reductions.
pub fn spin_statistics(rho: &DensityMatrix) -> Result<SpinStatistics> {
    let n = rho.qubits();
    if n < 2 {
        return Err(Error::DimensionMismatch {
            expected: "at least 2 qubits".into(),
            found: n.to_string(),
        });
    }
    let s = paulis();
    let one = Complex64::new(1.0, 0.0);
    let id: Pauli = [[one, ZERO], [ZERO, one]];
    let mut mean = [0.0; 3];
    let mut second = [[0.0; 3]; 3];
    for i in 0..n {
        for j in (i + 1)..n {
            let pair = rho.reduce_to_pair(i, j)?;
            // Single-qubit terms for qubit i come from the pair (i, i + 1);
            // the last qubit is read from the second slot of (n - 2, n - 1).
            if j == i + 1 {
                for a in 0..3 {
                    mean[a] += pair_expectation(&pair, &s[a], &id) / 2.0;
                    if j == n - 1 {
                        mean[a] += pair_expectation(&pair, &id, &s[a]) / 2.0;
                    }
                }
            }
            for a in 0..3 {
                for b in 0..3 {
                    // Both orderings (i, j) and (j, i) of the i != j sum.
                    let v = pair_expectation(&pair, &s[a], &s[b])
                        + pair_expectation(&pair, &s[b], &s[a]);
                    second[a][b] += v / 4.0;
                }
            }
        }
    }
    let mut covariance = [[0.0; 3]; 3];
    for a in 0..3 {
        for b in 0..3 {
            // Same-qubit terms: sigma_a sigma_b + sigma_b sigma_a = 2 delta_ab.
            let diag = if a == b { n as f64 / 4.0 } else { 0.0 };
            covariance[a][b] = 0.5 * (second[a][b] + second[b][a]) + diag - mean[a] * mean[b];
        }
    }
    Ok(SpinStatistics { mean, covariance })
}

/// `xi^2 = N min (Delta J_perp)^2 / |<J>|^2` on the damped full state.
pub fn brute_force_xi(e: &EnsembleParams, p_surv: f64) -> Result<SqueezingValue> {
    let n = e.n_atoms();
    if n > MAX_MIXED_QUBITS {
        return Err(Error::TooLarge {
            what: "brute-force density matrix",
            size: n,
            limit: MAX_MIXED_QUBITS,
        });
    }
    let k = kraus(p_surv)?;
    let rho = DensityMatrix::from_pure(&brute_force_state(e)?)?;
    let rho = apply_product(&rho, &k, n)?;
    let stats = spin_statistics(&rho)?;
    let var = stats.min_perpendicular_variance()?;
    let norm = stats.mean_norm();
    Ok(SqueezingValue::from_xi2(n as f64 * var / (norm * norm)))
}
