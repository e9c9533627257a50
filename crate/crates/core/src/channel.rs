//! Amplitude-damping channel parameterized by the survival population.
//!
//! Single-qubit basis order is (excited, ground) throughout the crate. In an
//! m-qubit register, qubit 0 is the most significant bit of the basis index,
//! and bit value 0 means excited.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type Mat2 = [[Complex64; 2]; 2];

/// Largest register handled by [`apply_product`].
pub const MAX_QUBITS: usize = 12;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

fn check_survival(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::Domain {
            what: "survival population",
            value: p,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KrausPair {
    pub e1: Mat2,
    pub e2: Mat2,
    pub p_surv: f64,
}

/// `e1 = diag(sqrt p, 1)`, `e2 = sqrt(1 - p) |g><e|`.
pub fn kraus(p_surv: f64) -> Result<KrausPair> {
    check_survival(p_surv)?;
    let r = |x: f64| Complex64::new(x, 0.0);
    Ok(KrausPair {
        e1: [[r(p_surv.sqrt()), ZERO], [ZERO, r(1.0)]],
        e2: [[ZERO, ZERO], [r((1.0 - p_surv).sqrt()), ZERO]],
        p_surv,
    })
}

impl KrausPair {
    /// Max-abs entry of `e1^dag e1 + e2^dag e2 - I`.
    pub fn completeness_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                let mut s = ZERO;
                for k in 0..2 {
                    s +=
                        self.e1[k][i].conj() * self.e1[k][j] + self.e2[k][i].conj() * self.e2[k][j];
                }
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((s - target).norm());
            }
        }
        worst
    }

    fn operators(&self) -> [&Mat2; 2] {
        [&self.e1, &self.e2]
    }
}

/// Density operator on `m` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    data: DMatrix<Complex64>,
    qubits: usize,
}

const HERMITIAN_TOL: f64 = 1e-12;
const TRACE_TOL: f64 = 1e-12;
/// Smallest eigenvalue accepted by [`DensityMatrix::check_positive`].
pub const POSITIVITY_TOL: f64 = -1e-10;

impl DensityMatrix {
    /// Validates dimension (power of two), Hermiticity and unit trace.
    pub fn new(data: DMatrix<Complex64>) -> Result<Self> {
        let (r, c) = data.shape();
        if r != c {
            return Err(Error::DimensionMismatch {
                expected: "square matrix".into(),
                found: format!("{r}x{c}"),
            });
        }
        if r == 0 || !r.is_power_of_two() {
            return Err(Error::DimensionMismatch {
                expected: "power-of-two dimension".into(),
                found: r.to_string(),
            });
        }
        for i in 0..r {
            for j in i..r {
                if (data[(i, j)] - data[(j, i)].conj()).norm() > HERMITIAN_TOL {
                    return Err(Error::InvalidState(format!("not Hermitian at ({i}, {j})")));
                }
            }
        }
        let tr = data.trace();
        if (tr - 1.0).norm() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {tr}")));
        }
        Ok(Self {
            qubits: r.trailing_zeros() as usize,
            data,
        })
    }

    pub fn from_pure(psi: &[Complex64]) -> Result<Self> {
        let v = nalgebra::DVector::from_column_slice(psi);
        Self::new(&v * v.adjoint())
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.data
    }

    pub fn trace(&self) -> Complex64 {
        self.data.trace()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        SymmetricEigen::new(self.data.clone()).eigenvalues.min()
    }

    pub fn check_positive(&self) -> Result<()> {
        let lam = self.min_eigenvalue();
        if lam < POSITIVITY_TOL {
            Err(Error::InvalidState(format!("smallest eigenvalue {lam:e}")))
        } else {
            Ok(())
        }
    }

    /// Partial trace onto the ordered qubit pair `(a, b)`.
    pub fn reduce_to_pair(&self, a: usize, b: usize) -> Result<DensityMatrix> {
        let m = self.qubits;
        if a >= m || b >= m || a == b {
            return Err(Error::DimensionMismatch {
                expected: format!("two distinct qubits below {m}"),
                found: format!("({a}, {b})"),
            });
        }
        let (sa, sb) = (m - 1 - a, m - 1 - b);
        let mut out = DMatrix::from_element(4, 4, ZERO);
        let dim = self.dim();
        for x in 0..dim {
            let rx = (((x >> sa) & 1) << 1) | ((x >> sb) & 1);
            let rest = x & !((1 << sa) | (1 << sb));
            for ry in 0..4 {
                let y = rest | ((ry >> 1) << sa) | ((ry & 1) << sb);
                out[(rx, ry)] += self.data[(x, y)];
            }
        }
        DensityMatrix::new(out)
    }
}

/// Applies the channel on qubit `q` of an `m`-qubit operator, in place.
///
/// Entries that differ only in that qubit's row and column bits form
/// independent 2x2 blocks, each mapped by `sum_k K B K^dag`.
fn apply_on_qubit(data: &mut DMatrix<Complex64>, m: usize, q: usize, k: &KrausPair) {
    let bit = 1usize << (m - 1 - q);
    let dim = data.nrows();
    for x0 in (0..dim).filter(|x| x & bit == 0) {
        for y0 in (0..dim).filter(|y| y & bit == 0) {
            let idx = |a: usize, b: usize| (x0 | (a * bit), y0 | (b * bit));
            let block = [
                [data[idx(0, 0)], data[idx(0, 1)]],
                [data[idx(1, 0)], data[idx(1, 1)]],
            ];
            let mut out = [[ZERO; 2]; 2];
            for op in k.operators() {
                for (a2, row) in out.iter_mut().enumerate() {
                    for (b2, cell) in row.iter_mut().enumerate() {
                        for a in 0..2 {
                            for b in 0..2 {
                                *cell += op[a2][a] * block[a][b] * op[b2][b].conj();
                            }
                        }
                    }
                }
            }
            for (a, row) in out.iter().enumerate() {
                for (b, v) in row.iter().enumerate() {
                    data[idx(a, b)] = *v;
                }
            }
        }
    }
}

/// `rho' = e1 rho e1^dag + e2 rho e2^dag` on a single qubit.
pub fn apply(rho: &DensityMatrix, k: &KrausPair) -> Result<DensityMatrix> {
    if rho.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: "2".into(),
            found: rho.dim().to_string(),
        });
    }
    let mut data = rho.data.clone();
    apply_on_qubit(&mut data, 1, 0, k);
    Ok(DensityMatrix { data, qubits: 1 })
}

/// The same channel on each of the `m` qubits, one factor at a time.
pub fn apply_product(rho: &DensityMatrix, k: &KrausPair, m: usize) -> Result<DensityMatrix> {
    if m > MAX_QUBITS {
        return Err(Error::TooLarge {
            what: "qubit register",
            size: m,
            limit: MAX_QUBITS,
        });
    }
    if rho.qubits != m {
        return Err(Error::DimensionMismatch {
            expected: format!("{m} qubits"),
            found: format!("{} qubits", rho.qubits),
        });
    }
    let mut data = rho.data.clone();
    for q in 0..m {
        apply_on_qubit(&mut data, m, q, k);
    }
    Ok(DensityMatrix { data, qubits: m })
}
