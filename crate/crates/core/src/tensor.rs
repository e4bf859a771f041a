//! Dense complex tensors stored flat in row-major order.
//!
//! Everything above this module (MPS, MPO, DMRG environments) is expressed as
//! sequences of [`Tensor::permute`], [`Tensor::reshape`], [`contract`] and
//! [`svd_truncated`]. Contraction is always lowered to permute, reshape and a
//! single matrix product, so its cost is the product of the contracted
//! dimensions times the product of the open dimensions.

use nalgebra::{DMatrix, DMatrixView};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Scalar type used throughout the crate.
pub type C64 = Complex64;

/// Default relative cutoff on singular values, relative to the largest one.
pub const DEFAULT_REL_TOL: f64 = 1e-12;

/// Dense multidimensional array of complex scalars.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor {
    dims: Vec<usize>,
    data: Vec<C64>,
}

impl Tensor {
    pub fn new(dims: Vec<usize>, data: Vec<C64>) -> Result<Self> {
        if dims.contains(&0) {
            return Err(Error::Shape(format!("zero axis dimension in {dims:?}")));
        }
        let len: usize = dims.iter().product();
        if len != data.len() {
            return Err(Error::Shape(format!(
                "dims {dims:?} hold {len} elements but data has {}",
                data.len()
            )));
        }
        Ok(Self { dims, data })
    }

    /// Zero tensor. Panics on a zero axis dimension.
    pub fn zeros(dims: &[usize]) -> Self {
        assert!(dims.iter().all(|&d| d > 0), "axis dimensions must be positive");
        let len = dims.iter().product();
        Self {
            dims: dims.to_vec(),
            data: vec![C64::new(0.0, 0.0); len],
        }
    }

    pub fn from_real(dims: Vec<usize>, data: &[f64]) -> Result<Self> {
        Self::new(dims, data.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    /// Rank-0 tensor holding one value.
    pub fn scalar(value: C64) -> Self {
        Self {
            dims: Vec::new(),
            data: vec![value],
        }
    }

    /// `n`×`n` identity matrix.
    pub fn identity(n: usize) -> Self {
        let mut t = Self::zeros(&[n, n]);
        for i in 0..n {
            t.data[i * n + i] = C64::new(1.0, 0.0);
        }
        t
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn rank(&self) -> usize {
        self.dims.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<C64> {
        self.data
    }

    fn strides(dims: &[usize]) -> Vec<usize> {
        let mut strides = vec![1; dims.len()];
        for k in (0..dims.len().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * dims[k + 1];
        }
        strides
    }

    fn offset(&self, idx: &[usize]) -> usize {
        assert_eq!(idx.len(), self.dims.len(), "index rank mismatch");
        let mut off = 0;
        for (&i, &d) in idx.iter().zip(&self.dims) {
            assert!(i < d, "index {i} out of range for axis of dim {d}");
            off = off * d + i;
        }
        off
    }

    pub fn get(&self, idx: &[usize]) -> C64 {
        self.data[self.offset(idx)]
    }

    pub fn set(&mut self, idx: &[usize], value: C64) {
        let off = self.offset(idx);
        self.data[off] = value;
    }

    /// Reorders axes: axis `k` of the result is axis `perm[k]` of `self`.
    pub fn permute(&self, perm: &[usize]) -> Result<Tensor> {
        let rank = self.rank();
        let mut seen = vec![false; rank];
        let valid = perm.len() == rank
            && perm.iter().all(|&p| {
                if p >= rank || seen[p] {
                    false
                } else {
                    seen[p] = true;
                    true
                }
            });
        if !valid {
            return Err(Error::InvalidPermutation {
                perm: perm.to_vec(),
                rank,
            });
        }
        if perm.iter().enumerate().all(|(k, &p)| k == p) {
            return Ok(self.clone());
        }

        let src_strides = Self::strides(&self.dims);
        let new_dims: Vec<usize> = perm.iter().map(|&p| self.dims[p]).collect();
        let strides: Vec<usize> = perm.iter().map(|&p| src_strides[p]).collect();
        let mut data = Vec::with_capacity(self.data.len());
        let mut idx = vec![0usize; rank];
        let mut src = 0usize;
        for _ in 0..self.data.len() {
            data.push(self.data[src]);
            // odometer over the output multi-index
            for ax in (0..rank).rev() {
                idx[ax] += 1;
                src += strides[ax];
                if idx[ax] < new_dims[ax] {
                    break;
                }
                src -= strides[ax] * new_dims[ax];
                idx[ax] = 0;
            }
        }
        Ok(Tensor {
            dims: new_dims,
            data,
        })
    }

    /// Fuses runs of consecutive axes. `groups` must list every axis once, in
    /// order, e.g. `&[&[0], &[1, 2]]`.
    pub fn reshape(&self, groups: &[&[usize]]) -> Result<Tensor> {
        let mut next = 0;
        let mut dims = Vec::with_capacity(groups.len());
        for group in groups {
            if group.is_empty() {
                return Err(Error::InvalidReshape("empty axis group".into()));
            }
            let mut d = 1;
            for &ax in group.iter() {
                if ax != next || ax >= self.rank() {
                    return Err(Error::InvalidReshape(format!(
                        "groups {groups:?} are not a contiguous ordered partition"
                    )));
                }
                d *= self.dims[ax];
                next += 1;
            }
            dims.push(d);
        }
        if next != self.rank() {
            return Err(Error::InvalidReshape(format!(
                "groups {groups:?} cover {next} of {} axes",
                self.rank()
            )));
        }
        Ok(Tensor {
            dims,
            data: self.data.clone(),
        })
    }

    /// Reinterprets the flat data under new dimensions with the same product.
    pub fn with_dims(self, dims: Vec<usize>) -> Result<Tensor> {
        Tensor::new(dims, self.data)
    }

    pub fn conj(&self) -> Tensor {
        Tensor {
            dims: self.dims.clone(),
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn scale(&self, factor: C64) -> Tensor {
        Tensor {
            dims: self.dims.clone(),
            data: self.data.iter().map(|z| z * factor).collect(),
        }
    }

    pub fn scale_mut(&mut self, factor: C64) {
        self.data.iter_mut().for_each(|z| *z *= factor);
    }

    pub fn add(&self, other: &Tensor) -> Result<Tensor> {
        if self.dims != other.dims {
            return Err(Error::Shape(format!(
                "cannot add {:?} and {:?}",
                self.dims, other.dims
            )));
        }
        Ok(Tensor {
            dims: self.dims.clone(),
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        })
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Tensor) -> f64 {
        assert_eq!(self.dims, other.dims);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Matrix view with the first `split` axes as rows.
    pub fn to_matrix(&self, split: usize) -> DMatrix<C64> {
        let rows: usize = self.dims[..split].iter().product();
        let cols: usize = self.dims[split..].iter().product();
        DMatrix::from_row_slice(rows, cols, &self.data)
    }

    /// Builds a tensor from a matrix whose rows/cols flatten `dims`.
    pub fn from_matrix(m: &DMatrix<C64>, dims: Vec<usize>) -> Result<Tensor> {
        let data = m.transpose().as_slice().to_vec();
        Tensor::new(dims, data)
    }

    pub fn contract(&self, other: &Tensor, pairs: &[(usize, usize)]) -> Result<Tensor> {
        contract(self, other, pairs)
    }
}

/// Row-major `(m×k)·(k×n)`.
fn matmul(a: &[C64], b: &[C64], m: usize, k: usize, n: usize) -> Vec<C64> {
    // A row-major buffer read column-major is the transpose; Cᵀ = Bᵀ·Aᵀ.
    let at = DMatrixView::from_slice(a, k, m);
    let bt = DMatrixView::from_slice(b, n, k);
    let ct = bt * at;
    ct.as_slice().to_vec()
}

/// Sums over paired axes. The result carries `a`'s open axes followed by
/// `b`'s open axes, each in their original order.
pub fn contract(a: &Tensor, b: &Tensor, pairs: &[(usize, usize)]) -> Result<Tensor> {
    let mut used_a = vec![false; a.rank()];
    let mut used_b = vec![false; b.rank()];
    for &(ia, ib) in pairs {
        if ia >= a.rank() || ib >= b.rank() || used_a[ia] || used_b[ib] {
            return Err(Error::InvalidArgument(format!(
                "bad contraction pairs {pairs:?} for ranks {} and {}",
                a.rank(),
                b.rank()
            )));
        }
        used_a[ia] = true;
        used_b[ib] = true;
        if a.dims[ia] != b.dims[ib] {
            return Err(Error::ContractionMismatch {
                axis_a: ia,
                dim_a: a.dims[ia],
                axis_b: ib,
                dim_b: b.dims[ib],
            });
        }
    }
    let free_a: Vec<usize> = (0..a.rank()).filter(|&k| !used_a[k]).collect();
    let free_b: Vec<usize> = (0..b.rank()).filter(|&k| !used_b[k]).collect();

    let perm_a: Vec<usize> = free_a.iter().copied().chain(pairs.iter().map(|p| p.0)).collect();
    let perm_b: Vec<usize> = pairs.iter().map(|p| p.1).chain(free_b.iter().copied()).collect();
    let ap = a.permute(&perm_a)?;
    let bp = b.permute(&perm_b)?;

    let m: usize = free_a.iter().map(|&k| a.dims[k]).product();
    let n: usize = free_b.iter().map(|&k| b.dims[k]).product();
    let k: usize = pairs.iter().map(|p| a.dims[p.0]).product();

    let dims: Vec<usize> = free_a
        .iter()
        .map(|&x| a.dims[x])
        .chain(free_b.iter().map(|&x| b.dims[x]))
        .collect();
    Ok(Tensor {
        dims,
        data: matmul(&ap.data, &bp.data, m, k, n),
    })
}

/// Truncated singular value decomposition of a tensor viewed as a matrix.
#[derive(Clone, Debug)]
pub struct SvdResult {
    /// Left factor with dims `left_dims ++ [kept]`, orthonormal columns.
    pub u: Tensor,
    /// Retained singular values, non-increasing.
    pub s: Vec<f64>,
    /// Right factor with dims `[kept] ++ right_dims`, orthonormal rows.
    pub v_dag: Tensor,
    /// Frobenius norm of the discarded part.
    pub truncation_error: f64,
    pub kept: usize,
}

impl SvdResult {
    /// `U·diag(s)` with the original left dims.
    pub fn us(&self) -> Tensor {
        let mut t = self.u.clone();
        let kept = self.kept;
        for (i, z) in t.data.iter_mut().enumerate() {
            *z *= self.s[i % kept];
        }
        t
    }

    /// `diag(s)·V†` with the original right dims.
    pub fn sv(&self) -> Tensor {
        let mut t = self.v_dag.clone();
        let cols = t.len() / self.kept;
        for (i, z) in t.data.iter_mut().enumerate() {
            *z *= self.s[i / cols];
        }
        t
    }
}

/// Splits `t` after its first `split` axes and keeps at most `chi_max`
/// singular values, dropping any below `rel_tol` times the largest one.
///
/// An all-zero input yields a single zero singular value so that bond
/// dimensions never drop below one.
pub fn svd_truncated(t: &Tensor, split: usize, chi_max: usize, rel_tol: f64) -> Result<SvdResult> {
    if chi_max == 0 {
        return Err(Error::InvalidArgument("chi_max must be positive".into()));
    }
    if split == 0 || split >= t.rank() {
        return Err(Error::InvalidArgument(format!(
            "split {split} must lie in 1..{}",
            t.rank()
        )));
    }
    if rel_tol.is_nan() || rel_tol < 0.0 {
        return Err(Error::InvalidArgument("rel_tol must be non-negative".into()));
    }
    let left_dims = &t.dims[..split];
    let right_dims = &t.dims[split..];
    let m = t.to_matrix(split);
    let (rows, cols) = m.shape();

    let svd = m
        .try_svd_unordered(true, true, f64::EPSILON, 0)
        .ok_or_else(|| Error::InvalidArgument("SVD failed to converge".into()))?;
    let u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested V^T");
    let sv = svd.singular_values;

    let mut order: Vec<usize> = (0..sv.len()).collect();
    // stable: ties keep input order
    order.sort_by(|&i, &j| sv[j].total_cmp(&sv[i]));

    let largest = order.first().map(|&i| sv[i]).unwrap_or(0.0);
    let above = order.iter().filter(|&&i| sv[i] >= rel_tol * largest).count();
    let kept = if largest == 0.0 { 1 } else { above.min(chi_max).max(1) };

    let s: Vec<f64> = order[..kept].iter().map(|&i| sv[i]).collect();
    let truncation_error = order[kept..]
        .iter()
        .map(|&i| sv[i] * sv[i])
        .sum::<f64>()
        .sqrt();

    let mut u_data = Vec::with_capacity(rows * kept);
    for r in 0..rows {
        for &i in &order[..kept] {
            u_data.push(u[(r, i)]);
        }
    }
    let mut v_data = Vec::with_capacity(kept * cols);
    for &i in &order[..kept] {
        for c in 0..cols {
            v_data.push(v_t[(i, c)]);
        }
    }
    let mut u_dims = left_dims.to_vec();
    u_dims.push(kept);
    let mut v_dims = vec![kept];
    v_dims.extend_from_slice(right_dims);

    Ok(SvdResult {
        u: Tensor::new(u_dims, u_data)?,
        s,
        v_dag: Tensor::new(v_dims, v_data)?,
        truncation_error,
        kept,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn random_tensor(dims: &[usize], rng: &mut impl Rng) -> Tensor {
        let len = dims.iter().product();
        let data = (0..len)
            .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        Tensor::new(dims.to_vec(), data).unwrap()
    }

    /// Index-loop contraction, independent of the permute/matmul path.
    fn naive_contract(a: &Tensor, b: &Tensor, pairs: &[(usize, usize)]) -> Tensor {
        let free_a: Vec<usize> = (0..a.rank()).filter(|k| !pairs.iter().any(|p| p.0 == *k)).collect();
        let free_b: Vec<usize> = (0..b.rank()).filter(|k| !pairs.iter().any(|p| p.1 == *k)).collect();
        let out_dims: Vec<usize> = free_a
            .iter()
            .map(|&k| a.dims()[k])
            .chain(free_b.iter().map(|&k| b.dims()[k]))
            .collect();
        let sum_dims: Vec<usize> = pairs.iter().map(|p| a.dims()[p.0]).collect();
        let out_len: usize = out_dims.iter().product();
        let sum_len: usize = sum_dims.iter().product();
        let unravel = |mut flat: usize, dims: &[usize]| {
            let mut idx = vec![0; dims.len()];
            for k in (0..dims.len()).rev() {
                idx[k] = flat % dims[k];
                flat /= dims[k];
            }
            idx
        };
        let mut data = vec![C64::new(0.0, 0.0); out_len];
        for (o, slot) in data.iter_mut().enumerate() {
            let oi = unravel(o, &out_dims);
            for s in 0..sum_len {
                let si = unravel(s, &sum_dims);
                let mut ia = vec![0; a.rank()];
                let mut ib = vec![0; b.rank()];
                for (n, &k) in free_a.iter().enumerate() {
                    ia[k] = oi[n];
                }
                for (n, &k) in free_b.iter().enumerate() {
                    ib[k] = oi[free_a.len() + n];
                }
                for (n, p) in pairs.iter().enumerate() {
                    ia[p.0] = si[n];
                    ib[p.1] = si[n];
                }
                *slot += a.get(&ia) * b.get(&ib);
            }
        }
        Tensor::new(out_dims, data).unwrap()
    }

    #[test]
    fn new_rejects_bad_shapes() {
        assert!(Tensor::new(vec![2, 3], vec![c(0.0); 5]).is_err());
        assert!(Tensor::new(vec![2, 0], vec![]).is_err());
    }

    #[test]
    fn identity_permutation_is_bitwise_equal() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let t = random_tensor(&[2, 3, 4], &mut rng);
        assert_eq!(t.permute(&[0, 1, 2]).unwrap(), t);
    }

    #[test]
    fn transpose_matches_index_loop() {
        let t = Tensor::from_real(vec![2, 3], &[1., 2., 3., 4., 5., 6.]).unwrap();
        let tt = t.permute(&[1, 0]).unwrap();
        assert_eq!(tt.dims(), &[3, 2]);
        for i in 0..2 {
            for j in 0..3 {
                assert_eq!(tt.get(&[j, i]), t.get(&[i, j]));
            }
        }
    }

    #[test]
    fn permute_then_inverse_restores() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let t = random_tensor(&[2, 3, 4, 5], &mut rng);
        let perm = [2, 0, 3, 1];
        let mut inv = [0; 4];
        for (k, &p) in perm.iter().enumerate() {
            inv[p] = k;
        }
        let back = t.permute(&perm).unwrap().permute(&inv).unwrap();
        assert_eq!(back, t);
        // element at permuted index equals the original element
        let p = t.permute(&perm).unwrap();
        assert_eq!(p.get(&[3, 1, 4, 2]), t.get(&[1, 2, 3, 4]));
    }

    #[test]
    fn invalid_permutations() {
        let t = Tensor::zeros(&[2, 2, 2]);
        assert!(matches!(t.permute(&[0, 1]), Err(Error::InvalidPermutation { .. })));
        assert!(matches!(t.permute(&[0, 0, 1]), Err(Error::InvalidPermutation { .. })));
        assert!(matches!(t.permute(&[0, 1, 3]), Err(Error::InvalidPermutation { .. })));
    }

    #[test]
    fn reshape_preserves_layout() {
        let t = Tensor::from_real(vec![2, 2, 2], &[1., 2., 3., 4., 5., 6., 7., 8.]).unwrap();
        let r = t.reshape(&[&[0], &[1, 2]]).unwrap();
        assert_eq!(r.dims(), &[2, 4]);
        assert_eq!(r.data(), t.data());
        let back = r.with_dims(vec![2, 2, 2]).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn invalid_reshapes() {
        let t = Tensor::zeros(&[2, 3, 4]);
        assert!(matches!(t.reshape(&[&[0, 2], &[1]]), Err(Error::InvalidReshape(_))));
        assert!(matches!(t.reshape(&[&[0, 1]]), Err(Error::InvalidReshape(_))));
        assert!(matches!(t.reshape(&[&[1], &[0], &[2]]), Err(Error::InvalidReshape(_))));
    }

    #[test]
    fn grouped_matrix_contraction_matches_tensor_contraction() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_tensor(&[2, 3, 4, 2], &mut rng);
        let b = random_tensor(&[4, 2, 3], &mut rng);
        let full = contract(&a, &b, &[(2, 0), (3, 1)]).unwrap();
        let am = a.reshape(&[&[0, 1], &[2, 3]]).unwrap();
        let bm = b.reshape(&[&[0, 1], &[2]]).unwrap();
        let viamat = contract(&am, &bm, &[(1, 0)]).unwrap();
        let oracle = naive_contract(&a, &b, &[(2, 0), (3, 1)]);
        assert!(full.max_abs_diff(&oracle) < 1e-12);
        assert_eq!(viamat.data().len(), full.data().len());
        let viamat = viamat.with_dims(vec![2, 3, 3]).unwrap();
        assert!(viamat.max_abs_diff(&oracle) < 1e-12);
    }

    #[test]
    fn contraction_examples() {
        let id = Tensor::identity(2);
        let v = Tensor::from_real(vec![2], &[3., 4.]).unwrap();
        let r = contract(&id, &v, &[(1, 0)]).unwrap();
        assert_eq!(r, v);

        let m = Tensor::from_real(vec![2, 2], &[1., 2., 3., 4.]).unwrap();
        let e = Tensor::from_real(vec![2, 1], &[1., 0.]).unwrap();
        let r = contract(&m, &e, &[(1, 0)]).unwrap();
        assert_eq!(r, Tensor::from_real(vec![2, 1], &[1., 3.]).unwrap());
        assert_eq!(r, naive_contract(&m, &e, &[(1, 0)]));
    }

    #[test]
    fn full_contraction_with_conjugate_is_squared_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let t = random_tensor(&[3, 2, 4], &mut rng);
        let n = contract(&t, &t.conj(), &[(0, 0), (1, 1), (2, 2)]).unwrap();
        assert_eq!(n.rank(), 0);
        let z = n.data()[0];
        assert!(z.im.abs() < 1e-12 && z.re >= 0.0);
        assert!((z.re - t.norm().powi(2)).abs() < 1e-12);
    }

    #[test]
    fn contraction_mismatch_is_reported() {
        let a = Tensor::zeros(&[2, 3]);
        let b = Tensor::zeros(&[2, 3]);
        assert!(matches!(
            contract(&a, &b, &[(1, 0)]),
            Err(Error::ContractionMismatch { .. })
        ));
    }

    #[test]
    fn svd_rank_one() {
        // (1,2)ᵀ(3,4): single singular value |(1,2)|·|(3,4)| = √5·5
        let t = Tensor::from_real(vec![2, 2], &[3., 4., 6., 8.]).unwrap();
        let r = svd_truncated(&t, 1, 8, DEFAULT_REL_TOL).unwrap();
        assert_eq!(r.kept, 1);
        assert!((r.s[0] - 5f64.sqrt() * 5.0).abs() < 1e-12);
        assert!(r.truncation_error.abs() < 1e-12);
    }

    #[test]
    fn svd_identity_truncated_to_one() {
        let r = svd_truncated(&Tensor::identity(2), 1, 1, DEFAULT_REL_TOL).unwrap();
        assert_eq!(r.s.len(), 1);
        assert!((r.s[0] - 1.0).abs() < 1e-14);
        assert!((r.truncation_error - 1.0).abs() < 1e-14);
    }

    #[test]
    fn svd_zero_matrix_keeps_one() {
        let r = svd_truncated(&Tensor::zeros(&[3, 4]), 1, 5, DEFAULT_REL_TOL).unwrap();
        assert_eq!(r.kept, 1);
        assert_eq!(r.s, vec![0.0]);
        assert_eq!(r.u.dims(), &[3, 1]);
        assert_eq!(r.v_dag.dims(), &[1, 4]);
    }

    #[test]
    fn svd_rejects_zero_chi() {
        assert!(matches!(
            svd_truncated(&Tensor::identity(2), 1, 0, 0.0),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn svd_truncation_error_matches_full_reference() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let t = random_tensor(&[4, 4], &mut rng);
        let full = t.to_matrix(1).singular_values();
        let mut sv: Vec<f64> = full.iter().copied().collect();
        sv.sort_by(|a, b| b.total_cmp(a));
        let r = svd_truncated(&t, 1, 2, 0.0).unwrap();
        let expected = (sv[2] * sv[2] + sv[3] * sv[3]).sqrt();
        assert!((r.truncation_error - expected).abs() < 1e-12);
    }

    fn svd_checks(t: &Tensor, split: usize, chi: usize) {
        let r = svd_truncated(t, split, chi, 0.0).unwrap();
        let u = r.u.to_matrix(split);
        let vd = r.v_dag.to_matrix(1);
        let k = r.kept;
        let utu = u.adjoint() * &u;
        let vvd = &vd * vd.adjoint();
        let eye = DMatrix::<C64>::identity(k, k);
        assert!((utu - &eye).norm() < 1e-10);
        assert!((vvd - &eye).norm() < 1e-10);
        assert!(r.s.windows(2).all(|w| w[0] >= w[1]) && r.s.iter().all(|&x| x >= 0.0));
        let mut us = u.clone();
        for (j, mut col) in us.column_iter_mut().enumerate() {
            col *= C64::new(r.s[j], 0.0);
        }
        let recon = us * vd;
        let m = t.to_matrix(split);
        assert!(((m - recon).norm() - r.truncation_error).abs() < 1e-10);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn contraction_is_bilinear(seed in any::<u64>(), alpha in -3.0f64..3.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_tensor(&[2, 3, 2], &mut rng);
            let b = random_tensor(&[2, 3, 2], &mut rng);
            let c = random_tensor(&[3, 2, 2], &mut rng);
            let lhs = contract(&a.scale(C64::new(alpha, 0.5)).add(&b).unwrap(), &c, &[(1, 0), (2, 1)]).unwrap();
            let rhs = contract(&a, &c, &[(1, 0), (2, 1)]).unwrap()
                .scale(C64::new(alpha, 0.5))
                .add(&contract(&b, &c, &[(1, 0), (2, 1)]).unwrap()).unwrap();
            prop_assert!(lhs.max_abs_diff(&rhs) < 1e-12);
        }

        #[test]
        fn svd_factors_orthonormal_and_recompose(
            seed in any::<u64>(),
            dims in proptest::collection::vec(1usize..4, 2..5),
            chi in 1usize..6,
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let t = random_tensor(&dims, &mut rng);
            let split = 1 + (seed as usize) % (dims.len() - 1);
            svd_checks(&t, split, chi);
        }
    }

    #[test]
    fn svd_is_frobenius_optimal_against_random_rank_k() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..100 {
            let t = random_tensor(&[6, 6], &mut rng);
            let k = rng.random_range(1..6);
            let r = svd_truncated(&t, 1, k, 0.0).unwrap();
            let m = t.to_matrix(1);
            for _ in 0..20 {
                let x = random_tensor(&[6, k], &mut rng).to_matrix(1);
                let y = random_tensor(&[k, 6], &mut rng).to_matrix(1);
                let other = (&m - x * y).norm();
                assert!(r.truncation_error <= other + 1e-9);
            }
        }
    }
}
