//! Explicit block encodings as dense orthogonal matrices.
//!
//! Every encoding here is exact (epsilon = 0): the target operator equals
//! eta times the top-left block of the unitary, with ancilla qubits taken as
//! the most significant part of the basis index. That convention makes the
//! ancilla-zero subspace the leading rows/columns, so block extraction is a
//! plain submatrix view.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};
use nalgebra_sparse::CscMatrix;

/// Unitary `u` whose top-left block, times `eta`, is the encoded operator.
#[derive(Clone, Debug)]
pub struct BlockEncoding {
    pub u: DMatrix<f64>,
    pub eta: f64,
    pub ancillas: usize,
    /// Encoding error bound; the constructions here are exact.
    pub epsilon: f64,
}

impl BlockEncoding {
    /// Dimension of the encoded operator.
    pub fn target_dim(&self) -> usize {
        self.u.nrows() >> self.ancillas
    }

    /// `eta * (<0^a| ⊗ I) U (|0^a> ⊗ I)`: the operator the encoding claims.
    pub fn extract_block(&self) -> DMatrix<f64> {
        let d = self.target_dim();
        self.eta * self.u.view((0, 0), (d, d)).clone_owned()
    }

    /// Frobenius deviation of `u` from orthogonality.
    pub fn unitarity_error(&self) -> f64 {
        unitarity_error(&self.u)
    }
}

pub fn unitarity_error(u: &DMatrix<f64>) -> f64 {
    (u.transpose() * u - DMatrix::identity(u.nrows(), u.ncols())).norm()
}

fn require_pow2(value: usize, what: &str) -> Result<u32> {
    if value == 0 || !value.is_power_of_two() {
        return Err(Error::Parameter(format!(
            "{what} must be a power of two, got {value}"
        )));
    }
    Ok(value.trailing_zeros())
}

/// `H^(⊗m)` entry without building tensor products: Hadamard sign rule.
fn hadamard_entry(m: u32, a: usize, b: usize) -> f64 {
    let sign = if (a & b).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
    sign / ((1usize << m) as f64).sqrt()
}

/// Slot table of a symmetric-pattern sparse matrix: for each column, the
/// sorted row indices of its nonzeros, padded conceptually to `s` slots.
struct SlotTable {
    cols: Vec<Vec<usize>>,
    vals: Vec<Vec<f64>>,
}

impl SlotTable {
    fn new(a: &CscMatrix<f64>) -> Self {
        let cols = (0..a.ncols()).map(|j| a.col(j).row_indices().to_vec()).collect();
        let vals = (0..a.ncols()).map(|j| a.col(j).values().to_vec()).collect();
        Self { cols, vals }
    }

    /// Slot of row `i` within column `j`'s nonzero list.
    fn slot_of(&self, i: usize, j: usize) -> usize {
        self.cols[j]
            .binary_search(&i)
            .expect("symmetric pattern guarantees the entry exists")
    }
}

/// Exact `(s, m+1, 0)` block encoding of a symmetric sparse matrix with
/// entries in [-1, 1] and at most `s = 2^m` nonzeros per column.
///
/// Registers, most significant first: the rotation flag qubit, the m slot
/// qubits, the n system qubits. The two isometries are a slot-superposition
/// with a value-controlled rotation (columns) and a slot-superposition with
/// the permutation sending each row slot to the matching column slot (rows);
/// column pads and row pads are matched lexicographically so the permutation
/// is a bijection.
pub fn block_encode_sparse(a_hat: &CscMatrix<f64>, s: usize) -> Result<BlockEncoding> {
    let n = a_hat.nrows();
    if a_hat.ncols() != n {
        return Err(Error::Dimension("matrix must be square".into()));
    }
    require_pow2(n, "matrix dimension")?;
    let m = require_pow2(s, "sparsity bound")?;
    let max_nnz = (0..n).map(|j| a_hat.col(j).nnz()).max().unwrap_or(0);
    if max_nnz > s {
        return Err(Error::Parameter(format!(
            "sparsity bound {s} below actual max column count {max_nnz}"
        )));
    }
    for (_, _, v) in a_hat.triplet_iter() {
        if v.abs() > 1.0 + 1e-12 {
            return Err(Error::Parameter(format!(
                "entry magnitude {} exceeds 1",
                v.abs()
            )));
        }
    }
    let at = a_hat.transpose();
    let pattern_symmetric = a_hat
        .triplet_iter()
        .zip(at.triplet_iter())
        .all(|((i, j, _), (ti, tj, _))| i == ti && j == tj)
        && a_hat.nnz() == at.nnz();
    if !pattern_symmetric {
        return Err(Error::Parameter(
            "block encoding needs a symmetric sparsity pattern".into(),
        ));
    }

    let table = SlotTable::new(a_hat);
    let dim = 2 * s * n;

    // U_R = Rot * (I_2 ⊗ H^{⊗m} ⊗ I_N): superpose the slot register, then
    // rotate each (slot, column) pair by the stored entry value (pads carry
    // value 0 and rotate fully onto the flag-1 branch).
    let mut u_r: DMatrix<f64> = DMatrix::zeros(dim, dim);
    for j in 0..n {
        for l in 0..s {
            let c = if l < table.cols[j].len() {
                table.vals[j][l]
            } else {
                0.0
            };
            let sq = (1.0 - c * c).max(0.0).sqrt();
            let i0 = l * n + j;
            let i1 = s * n + l * n + j;
            for lp in 0..s {
                let h = hadamard_entry(m, l, lp);
                // Column of U_R indexed by (t=0, lp, j) and (t=1, lp, j).
                u_r[(i0, lp * n + j)] += c * h;
                u_r[(i1, lp * n + j)] += sq * h;
                u_r[(i0, s * n + lp * n + j)] += -sq * h;
                u_r[(i1, s * n + lp * n + j)] += c * h;
            }
        }
    }

    // Pads, in lexicographic order, for the row/column pad bijection.
    let mut row_pads = Vec::new();
    let mut col_pads = Vec::new();
    for i in 0..n {
        for l in table.cols[i].len()..s {
            row_pads.push((i, l));
            col_pads.push((i, l));
        }
    }

    // Slot permutation: row slot (l', i) -> column slot (slot_of(i, j), j)
    // where j is the l'-th nonzero column of row i; pads map to pads.
    let mut perm = vec![0usize; s * n];
    for i in 0..n {
        for lp in 0..s {
            let src = lp * n + i;
            let dst = if lp < table.cols[i].len() {
                let j = table.cols[i][lp];
                table.slot_of(i, j) * n + j
            } else {
                let pad_rank = row_pads
                    .binary_search(&(i, lp))
                    .expect("pad enumeration covers all pad slots");
                let (j, l) = col_pads[pad_rank];
                l * n + j
            };
            perm[src] = dst;
        }
    }

    // U_L = (I_2 ⊗ Π) * (I_2 ⊗ H^{⊗m} ⊗ I_N).
    let mut u_l: DMatrix<f64> = DMatrix::zeros(dim, dim);
    for i in 0..n {
        for lp in 0..s {
            let dst = perm[lp * n + i];
            for l in 0..s {
                let h = hadamard_entry(m, lp, l);
                u_l[(dst, l * n + i)] += h;
                u_l[(s * n + dst, s * n + l * n + i)] += h;
            }
        }
    }

    let u = u_l.transpose() * u_r;
    Ok(BlockEncoding {
        u,
        eta: s as f64,
        ancillas: m as usize + 1,
        epsilon: 0.0,
    })
}

/// Householder reflection sending `e_0` to `b` (identity when they already
/// coincide).
pub fn state_preparation_unitary(b: &DVector<f64>) -> DMatrix<f64> {
    let n = b.len();
    let mut w = -b.clone();
    w[0] += 1.0;
    let norm = w.norm();
    if norm < 1e-14 {
        return DMatrix::identity(n, n);
    }
    w /= norm;
    DMatrix::identity(n, n) - 2.0 * &w * w.transpose()
}

fn require_unit(b: &DVector<f64>) -> Result<()> {
    if (b.norm() - 1.0).abs() > 1e-10 {
        return Err(Error::Parameter(format!(
            "state norm {} deviates from 1",
            b.norm()
        )));
    }
    Ok(())
}

/// Exact `(1, 1, 0)` encoding of the projector `I - b b^T`: conjugate the
/// "flip the ancilla exactly on system state |0>" unitary by `I ⊗ O_b`.
pub fn block_encode_projector(b: &DVector<f64>) -> Result<BlockEncoding> {
    require_unit(b)?;
    let n = b.len();
    require_pow2(n, "system dimension")?;
    let o_b = state_preparation_unitary(b);
    let mut mid = DMatrix::identity(2 * n, 2 * n);
    mid[(0, 0)] = 0.0;
    mid[(n, n)] = 0.0;
    mid[(0, n)] = 1.0;
    mid[(n, 0)] = 1.0;
    let mut conj = DMatrix::zeros(2 * n, 2 * n);
    conj.view_mut((0, 0), (n, n)).copy_from(&o_b);
    conj.view_mut((n, n), (n, n)).copy_from(&o_b);
    let u = &conj * mid * &conj;
    Ok(BlockEncoding {
        u,
        eta: 1.0,
        ancillas: 1,
        epsilon: 0.0,
    })
}

/// Swaps the two most significant qubits of a `4k`-dimensional space.
fn swap_top_qubits(k: usize) -> DMatrix<f64> {
    let mut p = DMatrix::zeros(4 * k, 4 * k);
    for q1 in 0..2 {
        for q2 in 0..2 {
            for i in 0..k {
                p[(q2 * 2 * k + q1 * k + i, q1 * 2 * k + q2 * k + i)] = 1.0;
            }
        }
    }
    p
}

/// `sigma_x ⊗ G` for a square `G`.
fn sigma_x_tensor(g: &DMatrix<f64>) -> DMatrix<f64> {
    let k = g.nrows();
    let mut out = DMatrix::zeros(2 * k, 2 * k);
    out.view_mut((0, k), (k, k)).copy_from(g);
    out.view_mut((k, 0), (k, k)).copy_from(g);
    out
}

/// `(1, 1, 0)` encoding of `H_0 = sigma_x ⊗ (I - b b^T)`: tensor the
/// projector encoding with `sigma_x`, then swap the ancilla out to the front.
pub fn block_encode_h0(b: &DVector<f64>) -> Result<BlockEncoding> {
    let proj = block_encode_projector(b)?;
    let n = b.len();
    let swap = swap_top_qubits(n);
    let u = &swap * sigma_x_tensor(&proj.u) * &swap;
    Ok(BlockEncoding {
        u,
        eta: 1.0,
        ancillas: 1,
        epsilon: 0.0,
    })
}

/// Unitary on (q, t, system): identity on q-t blocks 00 and 11, and the
/// orthogonal involution [[P_perp, b b^T], [b b^T, P_perp]] across blocks 01
/// and 10. Its ancilla-zero block is `diag(I, P_perp)`: the projector
/// controlled on t = 1.
fn controlled_projector_unitary(b: &DVector<f64>) -> DMatrix<f64> {
    let n = b.len();
    let p_perp = DMatrix::identity(n, n) - b * b.transpose();
    let bbt = b * b.transpose();
    let mut u = DMatrix::zeros(4 * n, 4 * n);
    u.view_mut((0, 0), (n, n)).copy_from(&DMatrix::identity(n, n));
    u.view_mut((n, n), (n, n)).copy_from(&p_perp);
    u.view_mut((n, 2 * n), (n, n)).copy_from(&bbt);
    u.view_mut((2 * n, n), (n, n)).copy_from(&bbt);
    u.view_mut((2 * n, 2 * n), (n, n)).copy_from(&p_perp);
    u.view_mut((3 * n, 3 * n), (n, n))
        .copy_from(&DMatrix::identity(n, n));
    u
}

/// Embeds `G`, acting on (one qubit, target of dimension `target`), into a
/// larger space with `mid` idle dimensions between them.
fn embed_skip(g: &DMatrix<f64>, mid: usize, target: usize) -> DMatrix<f64> {
    let dim = 2 * mid * target;
    let mut out = DMatrix::zeros(dim, dim);
    for q in 0..2 {
        for qp in 0..2 {
            for x in 0..target {
                for xp in 0..target {
                    let v = g[(q * target + x, qp * target + xp)];
                    if v == 0.0 {
                        continue;
                    }
                    for k in 0..mid {
                        out[(q * mid * target + k * target + x,
                             qp * mid * target + k * target + xp)] = v;
                    }
                }
            }
        }
    }
    out
}

/// `(s, m+3, 0)` encoding of `H_1 = [[0, A P_perp], [P_perp A, 0]]` as the
/// product of three encodings: a t-controlled projector, `sigma_x ⊗ A/s`, and
/// another t-controlled projector, each contributing its own ancilla.
///
/// Register order, most significant first: q1, q3, the m+1 ancillas of `U_A`,
/// the t qubit, the system register.
pub fn block_encode_h1(u_a: &BlockEncoding, b: &DVector<f64>) -> Result<BlockEncoding> {
    require_unit(b)?;
    let n = u_a.target_dim();
    if b.len() != n {
        return Err(Error::Dimension(format!(
            "encoded dimension {n} vs state length {}",
            b.len()
        )));
    }
    let a2 = 1 << u_a.ancillas;

    // sigma_x ⊗ U_A lives on (t, a2, system); reorder to (a2, t, system).
    let sx_ua = sigma_x_tensor(&u_a.u);
    let mut reorder = DMatrix::zeros(2 * a2 * n, 2 * a2 * n);
    for t in 0..2 {
        for a in 0..a2 {
            for j in 0..n {
                reorder[(a * 2 * n + t * n + j, t * a2 * n + a * n + j)] = 1.0;
            }
        }
    }
    let v = &reorder * sx_ua * reorder.transpose();
    let dim = 8 * a2 * n;
    let mut f_v = DMatrix::zeros(dim, dim);
    for q in 0..4 {
        let off = q * 2 * a2 * n;
        f_v.view_mut((off, off), (2 * a2 * n, 2 * a2 * n)).copy_from(&v);
    }

    let u_d = controlled_projector_unitary(b);
    // q3 sits above the a2 register; q1 above (q3, a2).
    let f_d3 = {
        let inner = embed_skip(&u_d, a2, 2 * n);
        let mut out = DMatrix::zeros(dim, dim);
        for q in 0..2 {
            let off = q * 4 * a2 * n;
            out.view_mut((off, off), (4 * a2 * n, 4 * a2 * n))
                .copy_from(&inner);
        }
        out
    };
    let f_d1 = embed_skip(&u_d, 2 * a2, 2 * n);

    let u = f_d1 * (f_v * f_d3);
    Ok(BlockEncoding {
        u,
        eta: u_a.eta,
        ancillas: u_a.ancillas + 2,
        epsilon: 0.0,
    })
}
