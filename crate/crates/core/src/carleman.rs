//! Truncated Carleman lifting of polynomial vector fields.
//!
//! The nonlinear flow `du/dt = sum_k F_k u^{⊗k}` is embedded into the linear
//! system `dy/dt = A y` over the stacked tensor powers `y_p = u^{⊗p}`,
//! `p = 0..P`. Block `(p, q)` of `A` is the Kronecker-sum operator
//! `C(F_k, p) = sum_v I^{⊗v} ⊗ F_k ⊗ I^{⊗(p-1-v)}` for `q = p + k - 1`;
//! everything above the truncation order `P` is dropped (Carleman) or
//! replaced by a Taylor closure about a pivot (PSC, see [`crate::psc`]).
//!
//! `A` is never materialized: [`LiftedSystem::matvec`] walks the sparse
//! coefficient tables slot by slot. Dense assembly exists only under a size
//! cap, for eigenvalue analysis and cross-checks.

use thiserror::Error;

use crate::dense::DenseMatrix;
use crate::polysys::{FieldEntry, PolyField};
use crate::scalar::Scalar;

/// Default cap on the total dimension for dense assembly.
pub const DENSE_CAP: usize = 4096;

#[derive(Debug, Error, PartialEq)]
pub enum CarlemanError {
    #[error("truncation order must be at least 1")]
    InvalidOrder,
    #[error("lifted dimension overflows for base dimension {base_dim} at order {order}")]
    DimensionOverflow { base_dim: usize, order: usize },
    #[error("dense assembly cap exceeded: lifted dimension {dim} > cap {cap}")]
    CapExceeded { dim: usize, cap: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("lifted state left the floating-point range (|u|^P overflow)")]
    RangeError,
}

/// Block offsets of the stacked state `y = (y_0, y_1, ..., y_P)`.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockLayout {
    base_dim: usize,
    order: usize,
    offsets: Vec<usize>,
}

impl BlockLayout {
    pub fn new(base_dim: usize, order: usize) -> Result<Self, CarlemanError> {
        if order < 1 {
            return Err(CarlemanError::InvalidOrder);
        }
        let mut offsets = Vec::with_capacity(order + 2);
        offsets.push(0usize);
        let mut block = 1usize;
        let mut total = 0usize;
        for p in 0..=order {
            if p > 0 {
                block = block
                    .checked_mul(base_dim)
                    .ok_or(CarlemanError::DimensionOverflow { base_dim, order })?;
            }
            total = total
                .checked_add(block)
                .ok_or(CarlemanError::DimensionOverflow { base_dim, order })?;
            offsets.push(total);
        }
        Ok(Self {
            base_dim,
            order,
            offsets,
        })
    }

    pub fn base_dim(&self) -> usize {
        self.base_dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Total dimension `1 + sum_{p=1..P} N^p`.
    pub fn total_dim(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    pub fn block_dim(&self, p: usize) -> usize {
        self.offsets[p + 1] - self.offsets[p]
    }

    pub fn block_range(&self, p: usize) -> std::ops::Range<usize> {
        self.offsets[p]..self.offsets[p + 1]
    }
}

/// Truncation closure of the lifted system.
#[derive(Clone, Debug, PartialEq)]
pub enum ClosureMode<S> {
    /// Plain truncation: blocks beyond order `P` are dropped.
    Carleman,
    /// Pivot-switching closure about pivot `s` (scalar systems only).
    Pivot(S),
}

/// Truncated lifting of a [`PolyField`] with a matrix-free matvec.
#[derive(Clone, Debug)]
pub struct LiftedSystem<S> {
    field: PolyField<S>,
    layout: BlockLayout,
    closure: ClosureMode<S>,
    /// Extra scalar entries `(row block, column block, coefficient)` added by
    /// the closure. Only populated for base dimension 1, where every block is
    /// one-dimensional.
    closure_entries: Vec<(usize, usize, S)>,
}

impl<S: Scalar> LiftedSystem<S> {
    /// Plain truncated Carleman lifting at order `P`.
    pub fn carleman(field: PolyField<S>, order: usize) -> Result<Self, CarlemanError> {
        let layout = BlockLayout::new(field.dim(), order)?;
        Ok(Self {
            field,
            layout,
            closure: ClosureMode::Carleman,
            closure_entries: Vec::new(),
        })
    }

    pub(crate) fn with_closure(
        field: PolyField<S>,
        order: usize,
        pivot: S,
        closure_entries: Vec<(usize, usize, S)>,
    ) -> Result<Self, CarlemanError> {
        let layout = BlockLayout::new(field.dim(), order)?;
        Ok(Self {
            field,
            layout,
            closure: ClosureMode::Pivot(pivot),
            closure_entries,
        })
    }

    pub fn field(&self) -> &PolyField<S> {
        &self.field
    }

    pub fn layout(&self) -> &BlockLayout {
        &self.layout
    }

    pub fn base_dim(&self) -> usize {
        self.layout.base_dim()
    }

    pub fn order(&self) -> usize {
        self.layout.order()
    }

    pub fn total_dim(&self) -> usize {
        self.layout.total_dim()
    }

    pub fn closure(&self) -> &ClosureMode<S> {
        &self.closure
    }

    /// Lifts a base state to `y = (1, u, u^{⊗2}, ..., u^{⊗P})`.
    pub fn lift_state(&self, u: &[S]) -> Result<Vec<S>, CarlemanError> {
        lift_state(u, self.order()).and_then(|y| {
            if y.len() == self.total_dim() {
                Ok(y)
            } else {
                Err(CarlemanError::DimensionMismatch {
                    expected: self.total_dim(),
                    got: y.len(),
                })
            }
        })
    }

    /// Matrix-free application of the lifted generator: `out = A y`.
    pub fn matvec(&self, y: &[S]) -> Vec<S> {
        let mut out = vec![S::zero(); self.total_dim()];
        self.matvec_into(y, &mut out);
        out
    }

    pub fn matvec_into(&self, y: &[S], out: &mut [S]) {
        assert_eq!(y.len(), self.total_dim(), "lifted state layout mismatch");
        assert_eq!(out.len(), self.total_dim());
        out.fill(S::zero());
        let n = self.base_dim();
        let order = self.order();
        for p in 1..=order {
            let out_block = self.layout.block_range(p);
            for k in self.field.degrees() {
                let q = p + k - 1;
                if q > order {
                    continue;
                }
                let in_block = self.layout.block_range(q);
                let mut tmp = vec![S::zero(); out_block.len()];
                apply_cfp(self.field.entries(k), n, k, p, &y[in_block], &mut tmp);
                for (o, t) in out[out_block.clone()].iter_mut().zip(tmp) {
                    *o = *o + t;
                }
            }
        }
        for &(row, col, c) in &self.closure_entries {
            let r = self.layout.block_range(row).start;
            let q = self.layout.block_range(col).start;
            out[r] = out[r] + c * y[q];
        }
    }

    /// Matrix-free application of the transpose: `out = Aᵀ y`.
    pub fn matvec_transpose_into(&self, y: &[S], out: &mut [S]) {
        assert_eq!(y.len(), self.total_dim(), "lifted state layout mismatch");
        assert_eq!(out.len(), self.total_dim());
        out.fill(S::zero());
        let n = self.base_dim();
        let order = self.order();
        for p in 1..=order {
            let y_block = self.layout.block_range(p);
            for k in self.field.degrees() {
                let q = p + k - 1;
                if q > order {
                    continue;
                }
                let out_block = self.layout.block_range(q);
                let mut tmp = vec![S::zero(); out_block.len()];
                apply_cfp_transpose(self.field.entries(k), n, k, p, &y[y_block.clone()], &mut tmp);
                for (o, t) in out[out_block].iter_mut().zip(tmp) {
                    *o = *o + t;
                }
            }
        }
        for &(row, col, c) in &self.closure_entries {
            let r = self.layout.block_range(row).start;
            let q = self.layout.block_range(col).start;
            out[q] = out[q] + c * y[r];
        }
    }

    /// Dense assembly `A[:, j] = A e_j`, available under [`DENSE_CAP`].
    pub fn assemble_dense(&self) -> Result<DenseMatrix<S>, CarlemanError> {
        self.assemble_dense_with_cap(DENSE_CAP)
    }

    pub fn assemble_dense_with_cap(&self, cap: usize) -> Result<DenseMatrix<S>, CarlemanError> {
        let dim = self.total_dim();
        if dim > cap {
            return Err(CarlemanError::CapExceeded { dim, cap });
        }
        let mut a = DenseMatrix::zeros(dim, dim);
        let mut basis = vec![S::zero(); dim];
        let mut col = vec![S::zero(); dim];
        for j in 0..dim {
            basis[j] = S::one();
            self.matvec_into(&basis, &mut col);
            a.set_column(j, &col);
            basis[j] = S::zero();
        }
        Ok(a)
    }
}

/// Lifts `u` to the stacked tensor powers `(1, u, u^{⊗2}, ..., u^{⊗P})`.
pub fn lift_state<S: Scalar>(u: &[S], order: usize) -> Result<Vec<S>, CarlemanError> {
    if order < 1 {
        return Err(CarlemanError::InvalidOrder);
    }
    let n = u.len();
    let layout = BlockLayout::new(n, order)?;
    let mut y = vec![S::zero(); layout.total_dim()];
    y[0] = S::one();
    let mut prev: Vec<S> = vec![S::one()];
    for p in 1..=order {
        let mut next = Vec::with_capacity(prev.len() * n);
        for &a in &prev {
            for &b in u {
                next.push(a * b);
            }
        }
        y[layout.block_range(p)].copy_from_slice(&next);
        prev = next;
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(CarlemanError::RangeError);
    }
    Ok(y)
}

/// Applies `C(F_k, p) = sum_{v=0..p-1} I^{⊗v} ⊗ F_k ⊗ I^{⊗(p-1-v)}` to `x`.
///
/// `x` has dimension `N^{p-1+k}`; the result (accumulated into `out`, which
/// must have dimension `N^p`) is computed slot by slot without materializing
/// any Kronecker factor. Cost is `O(p · nnz(F_k) · N^{p-1})`.
pub fn apply_cfp<S: Scalar>(
    entries: &[FieldEntry<S>],
    base_dim: usize,
    k: usize,
    p: usize,
    x: &[S],
    out: &mut [S],
) {
    let n = base_dim;
    debug_assert_eq!(x.len(), n.pow((p - 1 + k) as u32), "input dimension");
    debug_assert_eq!(out.len(), n.pow(p as u32), "output dimension");
    for v in 0..p {
        let n_pre = n.pow(v as u32);
        let n_post = n.pow((p - 1 - v) as u32);
        let in_stride = n.pow(k as u32) * n_post;
        let out_stride = n * n_post;
        for e in entries {
            let col = e.indices.iter().fold(0usize, |acc, &i| acc * n + i);
            let in_base = col * n_post;
            let out_base = e.row * n_post;
            for pre in 0..n_pre {
                let xi = pre * in_stride + in_base;
                let oi = pre * out_stride + out_base;
                let src = &x[xi..xi + n_post];
                let dst = &mut out[oi..oi + n_post];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d = *d + e.coeff * *s;
                }
            }
        }
    }
}

/// Transpose of [`apply_cfp`]: accumulates `C(F_k, p)ᵀ y` into `out` of
/// dimension `N^{p-1+k}`, given `y` of dimension `N^p`.
pub fn apply_cfp_transpose<S: Scalar>(
    entries: &[FieldEntry<S>],
    base_dim: usize,
    k: usize,
    p: usize,
    y: &[S],
    out: &mut [S],
) {
    let n = base_dim;
    debug_assert_eq!(y.len(), n.pow(p as u32));
    debug_assert_eq!(out.len(), n.pow((p - 1 + k) as u32));
    for v in 0..p {
        let n_pre = n.pow(v as u32);
        let n_post = n.pow((p - 1 - v) as u32);
        let in_stride = n.pow(k as u32) * n_post;
        let out_stride = n * n_post;
        for e in entries {
            let col = e.indices.iter().fold(0usize, |acc, &i| acc * n + i);
            let in_base = col * n_post;
            let out_base = e.row * n_post;
            for pre in 0..n_pre {
                let xi = pre * in_stride + in_base;
                let oi = pre * out_stride + out_base;
                let src = &y[oi..oi + n_post];
                let dst = &mut out[xi..xi + n_post];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d = *d + e.coeff * *s;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polysys::{flow_from_potential, Polynomial};
    use approx::assert_relative_eq;

    fn spring_field(k: f64, a: f64, b: f64) -> PolyField<f64> {
        let u = Polynomial::variable(1, 0);
        let u2 = &u * &u;
        let u4 = &u2 * &u2;
        let pot = &(&u2.scale(0.5 * k) + &u4.scale(0.25 * a)) - &u.scale(b);
        flow_from_potential(&pot)
    }

    #[test]
    fn lift_state_examples() {
        // zero state lifts to (1, 0, ..., 0)
        let y = lift_state(&[0.0f64], 5).unwrap();
        assert_eq!(y, vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        // powers of one
        let y = lift_state(&[1.0f64], 3).unwrap();
        assert_eq!(y, vec![1.0; 4]);
        // hand Kronecker product for u = (2, 3), P = 2
        let y = lift_state(&[2.0f64, 3.0], 2).unwrap();
        assert_eq!(y, vec![1.0, 2.0, 3.0, 4.0, 6.0, 6.0, 9.0]);
    }

    #[test]
    fn lift_state_overflow_is_range_error() {
        assert_eq!(lift_state(&[1e200f64], 3), Err(CarlemanError::RangeError));
    }

    #[test]
    fn apply_cfp_identity_scales_by_p() {
        // C(I, p) = p I
        let n = 3;
        let mut id = PolyField::<f64>::new(n);
        for i in 0..n {
            id.add_entry(i, vec![i], 1.0);
        }
        for p in 1..=3usize {
            let dim = n.pow(p as u32);
            let x: Vec<f64> = (0..dim).map(|i| (i as f64) * 0.5 - 1.0).collect();
            let mut out = vec![0.0; dim];
            apply_cfp(id.entries(1), n, 1, p, &x, &mut out);
            for (o, xi) in out.iter().zip(&x) {
                assert_relative_eq!(*o, (p as f64) * xi, max_relative = 1e-15);
            }
        }
    }

    #[test]
    fn apply_cfp_p1_is_plain_matvec() {
        let f = spring_field(10.0, 3000.0, 0.2);
        let x = [0.7];
        let mut out = [0.0];
        apply_cfp(f.entries(1), 1, 1, 1, &x, &mut out);
        assert_relative_eq!(out[0], -10.0 * 0.7, max_relative = 1e-15);
    }

    #[test]
    fn apply_cfp_constant_block_p2() {
        // C(F_0, 2) x = b ⊗ x + x ⊗ b for x of dimension N
        let n = 2;
        let b = [0.3, -0.4];
        let mut f0 = PolyField::<f64>::new(n);
        for (i, &bi) in b.iter().enumerate() {
            f0.add_entry(i, vec![], bi);
        }
        let x = [2.0, 5.0];
        let mut out = vec![0.0; 4];
        apply_cfp(f0.entries(0), n, 0, 2, &x, &mut out);
        let expected = [
            b[0] * x[0] + x[0] * b[0],
            b[0] * x[1] + x[0] * b[1],
            b[1] * x[0] + x[1] * b[0],
            b[1] * x[1] + x[1] * b[1],
        ];
        for (o, e) in out.iter().zip(&expected) {
            assert_relative_eq!(*o, *e, max_relative = 1e-15);
        }
    }

    #[test]
    fn spring_dense_matrix_matches_closed_form() {
        // rows p: entry p*b at column p-1, -p*k at p, -p*a at p+2
        let (k, a, b) = (10.0, 3000.0, 0.2);
        let sys = LiftedSystem::carleman(spring_field(k, a, b), 5).unwrap();
        let m = sys.assemble_dense().unwrap();
        let mut expected = DenseMatrix::<f64>::zeros(6, 6);
        for p in 1..=5usize {
            expected.set(p, p - 1, p as f64 * b);
            expected.set(p, p, -(p as f64) * k);
            if p + 2 <= 5 {
                expected.set(p, p + 2, -(p as f64) * a);
            }
        }
        for r in 0..6 {
            for c in 0..6 {
                assert_relative_eq!(m.get(r, c), expected.get(r, c), max_relative = 1e-14);
            }
        }
    }

    #[test]
    fn trivial_linear_system_dense() {
        // du/dt = -u, N = 1, P = 1 -> [[0, 0], [0, -1]]
        let mut pot = Polynomial::<f64>::zero(1);
        pot.add_term([(0, 2)].into_iter().collect(), 0.5);
        let sys = LiftedSystem::carleman(flow_from_potential(&pot), 1).unwrap();
        let m = sys.assemble_dense().unwrap();
        assert_eq!(
            (m.get(0, 0), m.get(0, 1), m.get(1, 0), m.get(1, 1)),
            (0.0, 0.0, 0.0, -1.0)
        );
    }

    #[test]
    fn zero_field_matvec_is_zero() {
        let sys = LiftedSystem::carleman(PolyField::<f64>::new(2), 3).unwrap();
        let y: Vec<f64> = (0..sys.total_dim()).map(|i| i as f64).collect();
        assert!(sys.matvec(&y).iter().all(|&v| v == 0.0));
        assert!(matvec_transpose(&sys, &y).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn block1_of_matvec_equals_field_eval() {
        let f = spring_field(10.0, 3000.0, 0.2);
        let sys = LiftedSystem::carleman(f.clone(), 5).unwrap();
        for &u in &[0.0, 0.05, -0.08] {
            let y = sys.lift_state(&[u]).unwrap();
            let mv = sys.matvec(&y);
            let fe = f.eval(&[u]);
            assert_relative_eq!(mv[1], fe[0], max_relative = 1e-12, epsilon = 1e-14);
        }
    }

    #[test]
    fn dense_cap_enforced() {
        let mut f = PolyField::<f64>::new(8);
        f.add_entry(0, vec![0], -1.0);
        let sys = LiftedSystem::carleman(f, 5).unwrap();
        assert!(matches!(
            sys.assemble_dense(),
            Err(CarlemanError::CapExceeded { dim: 37449, .. })
        ));
    }

    #[test]
    fn transpose_agrees_with_dense_transpose() {
        let f = spring_field(10.0, 3000.0, 0.7);
        let sys = LiftedSystem::carleman(f, 4).unwrap();
        let m = sys.assemble_dense().unwrap();
        let dim = sys.total_dim();
        let y: Vec<f64> = (0..dim).map(|i| (i as f64 * 0.37).sin()).collect();
        let t = matvec_transpose(&sys, &y);
        for j in 0..dim {
            let expected: f64 = (0..dim).map(|r| m.get(r, j) * y[r]).sum();
            assert_relative_eq!(t[j], expected, max_relative = 1e-12, epsilon = 1e-14);
        }
    }

    fn matvec_transpose(sys: &LiftedSystem<f64>, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; sys.total_dim()];
        sys.matvec_transpose_into(y, &mut out);
        out
    }
}
