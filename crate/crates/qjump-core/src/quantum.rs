//! States and operators on truncated tensor-product Fock spaces.
//!
//! Conventions fixed once for file-format stability: the cavity factor comes
//! first, mechanics second, and composite indices flatten row-major, i.e.
//! `index = n_cav * mech_dim + n_mech`. Model operators are stored sparse
//! (CSR); density matrices are dense.

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Tensor-product structure of the underlying Hilbert space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Basis {
    factor_dims: Vec<usize>,
    total_dim: usize,
}

impl Basis {
    pub fn new(factor_dims: Vec<usize>) -> Result<Self> {
        if factor_dims.is_empty() {
            return Err(Error::InvalidDimension {
                dim: 0,
                reason: "basis needs at least one factor",
            });
        }
        for &d in &factor_dims {
            if d < 2 {
                return Err(Error::InvalidDimension {
                    dim: d,
                    reason: "occupied subsystems need local dimension >= 2",
                });
            }
        }
        let total_dim = factor_dims.iter().product();
        Ok(Self {
            factor_dims,
            total_dim,
        })
    }

    pub fn single(dim: usize) -> Result<Self> {
        Self::new(vec![dim])
    }

    pub fn factor_dims(&self) -> &[usize] {
        &self.factor_dims
    }

    pub fn total_dim(&self) -> usize {
        self.total_dim
    }

    /// Flat index of a product Fock state, row-major over the factors.
    pub fn flat_index(&self, occupations: &[usize]) -> usize {
        assert_eq!(occupations.len(), self.factor_dims.len());
        let mut idx = 0;
        for (n, d) in occupations.iter().zip(&self.factor_dims) {
            debug_assert!(n < d);
            idx = idx * d + n;
        }
        idx
    }

    fn concat(&self, other: &Basis) -> Basis {
        let mut dims = self.factor_dims.clone();
        dims.extend_from_slice(&other.factor_dims);
        Basis {
            factor_dims: dims,
            total_dim: self.total_dim * other.total_dim,
        }
    }
}

/// Pure state with complex amplitudes; unnormalised states are permitted
/// (conditional evolution decays the norm).
#[derive(Debug, Clone)]
pub struct StateVector {
    basis: Basis,
    amps: Array1<C64>,
    norm_sq: f64,
}

impl StateVector {
    pub fn new(basis: Basis, amps: Array1<C64>) -> Result<Self> {
        if amps.len() != basis.total_dim() {
            return Err(Error::BasisMismatch {
                left: basis.total_dim(),
                right: amps.len(),
            });
        }
        let norm_sq = amps.iter().map(|a| a.norm_sqr()).sum();
        Ok(Self {
            basis,
            amps,
            norm_sq,
        })
    }

    /// Product Fock state `|occupations>`.
    pub fn fock(basis: &Basis, occupations: &[usize]) -> Self {
        let mut amps = Array1::zeros(basis.total_dim());
        amps[basis.flat_index(occupations)] = C64::new(1.0, 0.0);
        Self {
            basis: basis.clone(),
            amps,
            norm_sq: 1.0,
        }
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn amplitudes(&self) -> &Array1<C64> {
        &self.amps
    }

    pub fn norm_squared(&self) -> f64 {
        self.norm_sq
    }

    /// Replace the amplitudes in place, recomputing the cached norm.
    pub fn set_amplitudes(&mut self, amps: Array1<C64>) {
        assert_eq!(amps.len(), self.basis.total_dim());
        self.norm_sq = amps.iter().map(|a| a.norm_sqr()).sum();
        self.amps = amps;
    }

    pub fn normalized(&self) -> StateVector {
        let n = self.norm_sq.sqrt();
        let amps = self.amps.mapv(|a| a / n);
        StateVector {
            basis: self.basis.clone(),
            amps,
            norm_sq: 1.0,
        }
    }

    /// Projector `|psi><psi|` as a dense density matrix.
    pub fn outer(&self) -> DensityMatrix {
        let d = self.basis.total_dim();
        let mut m = Array2::zeros((d, d));
        for i in 0..d {
            for j in 0..d {
                m[(i, j)] = self.amps[i] * self.amps[j].conj();
            }
        }
        DensityMatrix {
            basis: self.basis.clone(),
            entries: m,
        }
    }
}

/// Dense density matrix.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    basis: Basis,
    entries: Array2<C64>,
}

impl DensityMatrix {
    pub fn new(basis: Basis, entries: Array2<C64>) -> Result<Self> {
        if entries.nrows() != basis.total_dim() || entries.ncols() != basis.total_dim() {
            return Err(Error::BasisMismatch {
                left: basis.total_dim(),
                right: entries.nrows(),
            });
        }
        Ok(Self { basis, entries })
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn entries(&self) -> &Array2<C64> {
        &self.entries
    }

    pub fn entries_mut(&mut self) -> &mut Array2<C64> {
        &mut self.entries
    }

    pub fn trace(&self) -> C64 {
        (0..self.basis.total_dim()).map(|i| self.entries[(i, i)]).sum()
    }

    pub fn scale(&mut self, c: f64) {
        self.entries.mapv_inplace(|v| v * c);
    }

    /// Deviation from Hermiticity, `max |rho - rho^dag|`, relative to the
    /// largest entry magnitude.
    pub fn hermiticity_defect(&self) -> f64 {
        let d = self.basis.total_dim();
        let mut defect: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                let v = self.entries[(i, j)];
                scale = scale.max(v.norm());
                defect = defect.max((v - self.entries[(j, i)].conj()).norm());
            }
        }
        if scale > 0.0 {
            defect / scale
        } else {
            0.0
        }
    }
}

/// Sparse complex operator on a fixed basis (CSR; structure immutable after
/// construction).
#[derive(Debug, Clone)]
pub struct Operator {
    basis: Basis,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    vals: Vec<C64>,
}

impl Operator {
    /// Build from (row, col, value) triplets; duplicates are summed and
    /// entries that cancel to zero are dropped.
    pub fn from_triplets(basis: Basis, mut triplets: Vec<(usize, usize, C64)>) -> Self {
        let dim = basis.total_dim();
        triplets.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut row_ptr = vec![0usize; dim + 1];
        let mut col_idx: Vec<usize> = Vec::with_capacity(triplets.len());
        let mut vals: Vec<C64> = Vec::with_capacity(triplets.len());
        let mut iter = triplets.into_iter().peekable();
        for r in 0..dim {
            while let Some(&(tr, tc, tv)) = iter.peek() {
                if tr != r {
                    break;
                }
                debug_assert!(tc < dim);
                iter.next();
                match col_idx.last() {
                    Some(&last_c) if col_idx.len() > row_ptr[r] && last_c == tc => {
                        *vals.last_mut().unwrap() += tv;
                    }
                    _ => {
                        col_idx.push(tc);
                        vals.push(tv);
                    }
                }
            }
            row_ptr[r + 1] = col_idx.len();
        }
        let mut op = Self {
            basis,
            row_ptr,
            col_idx,
            vals,
        };
        op.prune(1e-300);
        op
    }

    fn prune(&mut self, tol: f64) {
        let dim = self.basis.total_dim();
        let mut row_ptr = vec![0usize; dim + 1];
        let mut col_idx = Vec::with_capacity(self.col_idx.len());
        let mut vals = Vec::with_capacity(self.vals.len());
        for r in 0..dim {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                if self.vals[k].norm() > tol {
                    col_idx.push(self.col_idx[k]);
                    vals.push(self.vals[k]);
                }
            }
            row_ptr[r + 1] = col_idx.len();
        }
        self.row_ptr = row_ptr;
        self.col_idx = col_idx;
        self.vals = vals;
    }

    pub fn zeros(basis: Basis) -> Self {
        let dim = basis.total_dim();
        Self {
            basis,
            row_ptr: vec![0; dim + 1],
            col_idx: Vec::new(),
            vals: Vec::new(),
        }
    }

    pub fn identity(basis: Basis) -> Self {
        let dim = basis.total_dim();
        let triplets = (0..dim).map(|i| (i, i, C64::new(1.0, 0.0))).collect();
        Self::from_triplets(basis, triplets)
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.total_dim()
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn iter_entries(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.dim()).flat_map(move |r| {
            (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (r, self.col_idx[k], self.vals[k]))
        })
    }

    /// `y = A x`.
    pub fn apply(&self, x: &[C64], y: &mut [C64]) {
        debug_assert_eq!(x.len(), self.dim());
        debug_assert_eq!(y.len(), self.dim());
        for (r, yr) in y.iter_mut().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[k] * x[self.col_idx[k]];
            }
            *yr = acc;
        }
    }

    /// `y += c A x`.
    pub fn apply_add(&self, x: &[C64], y: &mut [C64], c: C64) {
        for r in 0..self.dim() {
            let mut acc = C64::new(0.0, 0.0);
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[k] * x[self.col_idx[k]];
            }
            y[r] += c * acc;
        }
    }

    pub fn apply_state(&self, state: &StateVector) -> Result<StateVector> {
        if self.basis != *state.basis() {
            return Err(Error::BasisMismatch {
                left: self.dim(),
                right: state.basis().total_dim(),
            });
        }
        let mut out = vec![C64::new(0.0, 0.0); self.dim()];
        self.apply(state.amplitudes().as_slice().unwrap(), &mut out);
        StateVector::new(self.basis.clone(), Array1::from(out))
    }

    pub fn dagger(&self) -> Operator {
        let triplets = self
            .iter_entries()
            .map(|(r, c, v)| (c, r, v.conj()))
            .collect();
        Operator::from_triplets(self.basis.clone(), triplets)
    }

    pub fn scaled(&self, c: C64) -> Operator {
        let mut out = self.clone();
        for v in &mut out.vals {
            *v *= c;
        }
        out
    }

    pub fn add(&self, other: &Operator) -> Operator {
        debug_assert_eq!(self.basis, other.basis);
        let triplets = self
            .iter_entries()
            .chain(other.iter_entries())
            .collect::<Vec<_>>();
        Operator::from_triplets(self.basis.clone(), triplets)
    }

    pub fn add_scaled(&self, other: &Operator, c: C64) -> Operator {
        self.add(&other.scaled(c))
    }

    /// Sparse-sparse product `A B`.
    pub fn matmul(&self, other: &Operator) -> Operator {
        debug_assert_eq!(self.basis, other.basis);
        let mut triplets = Vec::new();
        for (r, c, v) in self.iter_entries() {
            for k in other.row_ptr[c]..other.row_ptr[c + 1] {
                triplets.push((r, other.col_idx[k], v * other.vals[k]));
            }
        }
        Operator::from_triplets(self.basis.clone(), triplets)
    }

    /// `A rho` for dense `rho`.
    pub fn mul_dense(&self, rho: &Array2<C64>) -> Array2<C64> {
        let d = self.dim();
        let mut out = Array2::zeros((d, d));
        self.mul_dense_into(rho, &mut out, C64::new(1.0, 0.0), false);
        out
    }

    /// `out += c * A * rho` (or `c * rho * A` when `right` is set).
    pub fn mul_dense_into(&self, rho: &Array2<C64>, out: &mut Array2<C64>, c: C64, right: bool) {
        let d = self.dim();
        if !right {
            // out[r, :] += c * v * rho[cc, :]
            for (r, cc, v) in self.iter_entries() {
                let cv = c * v;
                for j in 0..d {
                    out[(r, j)] += cv * rho[(cc, j)];
                }
            }
        } else {
            // out[:, cc] += c * v * rho[:, r]
            for (r, cc, v) in self.iter_entries() {
                let cv = c * v;
                for i in 0..d {
                    out[(i, cc)] += cv * rho[(i, r)];
                }
            }
        }
    }

    /// `out += c * A * rho` on row-major `d x d` slices.
    pub fn mul_left_slice(&self, rho: &[C64], out: &mut [C64], c: C64) {
        let d = self.dim();
        debug_assert_eq!(rho.len(), d * d);
        for (r, cc, v) in self.iter_entries() {
            let cv = c * v;
            let src = &rho[cc * d..(cc + 1) * d];
            let dst = &mut out[r * d..(r + 1) * d];
            for (o, s) in dst.iter_mut().zip(src) {
                *o += cv * s;
            }
        }
    }

    /// `out += c * rho * A` on row-major `d x d` slices.
    pub fn mul_right_slice(&self, rho: &[C64], out: &mut [C64], c: C64) {
        let d = self.dim();
        debug_assert_eq!(rho.len(), d * d);
        for (r, cc, v) in self.iter_entries() {
            let cv = c * v;
            for i in 0..d {
                out[i * d + cc] += cv * rho[i * d + r];
            }
        }
    }

    pub fn to_dense(&self) -> Array2<C64> {
        let d = self.dim();
        let mut m = Array2::zeros((d, d));
        for (r, c, v) in self.iter_entries() {
            m[(r, c)] += v;
        }
        m
    }

    /// Largest entry magnitude of `A - A^dag`, relative to the largest entry.
    pub fn hermiticity_defect(&self) -> f64 {
        let dag = self.dagger();
        let diff = self.add_scaled(&dag, C64::new(-1.0, 0.0));
        let scale = self.vals.iter().map(|v| v.norm()).fold(0.0f64, f64::max);
        let defect = diff.vals.iter().map(|v| v.norm()).fold(0.0f64, f64::max);
        if scale > 0.0 {
            defect / scale
        } else {
            0.0
        }
    }

    pub fn max_entry_norm(&self) -> f64 {
        self.vals.iter().map(|v| v.norm()).fold(0.0f64, f64::max)
    }
}

/// Bosonic annihilation operator on `dim` Fock levels: entry `sqrt(n)` at
/// `(n-1, n)`.
pub fn annihilation_operator(dim: usize) -> Result<Operator> {
    if dim < 2 {
        return Err(Error::InvalidDimension {
            dim,
            reason: "annihilation operator needs dim >= 2",
        });
    }
    let basis = Basis::single(dim)?;
    let triplets = (1..dim)
        .map(|n| (n - 1, n, C64::new((n as f64).sqrt(), 0.0)))
        .collect();
    Ok(Operator::from_triplets(basis, triplets))
}

/// Number operator `a^dag a`.
pub fn number_operator(dim: usize) -> Result<Operator> {
    let basis = Basis::single(dim)?;
    let triplets = (0..dim).map(|n| (n, n, C64::new(n as f64, 0.0))).collect();
    Ok(Operator::from_triplets(basis, triplets))
}

/// Kronecker product on the concatenated basis (left factor varies slowest).
pub fn tensor_product(a: &Operator, b: &Operator) -> Operator {
    let basis = a.basis().concat(b.basis());
    let db = b.dim();
    let mut triplets = Vec::with_capacity(a.nnz() * b.nnz());
    for (ra, ca, va) in a.iter_entries() {
        for (rb, cb, vb) in b.iter_entries() {
            triplets.push((ra * db + rb, ca * db + cb, va * vb));
        }
    }
    Operator::from_triplets(basis, triplets)
}

/// `<psi| op |psi>` without normalising `psi`; divide by `norm_squared` when
/// a normalised expectation is needed.
pub fn expectation(op: &Operator, state: &StateVector) -> Result<C64> {
    if op.basis() != state.basis() {
        return Err(Error::BasisMismatch {
            left: op.dim(),
            right: state.basis().total_dim(),
        });
    }
    let x = state.amplitudes().as_slice().unwrap();
    let mut acc = C64::new(0.0, 0.0);
    for (r, c, v) in op.iter_entries() {
        acc += x[r].conj() * v * x[c];
    }
    Ok(acc)
}

/// `Tr[op rho]` for dense `rho`.
pub fn expectation_dense(op: &Operator, rho: &Array2<C64>) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for (r, c, v) in op.iter_entries() {
        acc += v * rho[(c, r)];
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn annihilation_matrix_elements() {
        let a = annihilation_operator(4).unwrap();
        let basis = a.basis().clone();
        // |3> -> sqrt(3) |2>
        let psi = StateVector::fock(&basis, &[3]);
        let out = a.apply_state(&psi).unwrap();
        assert_abs_diff_eq!(out.amplitudes()[2].re, 3.0f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(out.norm_squared(), 3.0, epsilon = 1e-12);

        // dim=2: |1> -> |0> with amplitude 1
        let a2 = annihilation_operator(2).unwrap();
        let psi1 = StateVector::fock(a2.basis(), &[1]);
        let out = a2.apply_state(&psi1).unwrap();
        assert_abs_diff_eq!(out.amplitudes()[0].re, 1.0, epsilon = 1e-15);

        // vacuum annihilates
        let a3 = annihilation_operator(3).unwrap();
        let vac = StateVector::fock(a3.basis(), &[0]);
        let out = a3.apply_state(&vac).unwrap();
        assert_eq!(out.norm_squared(), 0.0);
    }

    #[test]
    fn annihilation_rejects_dim_below_two() {
        assert!(matches!(
            annihilation_operator(1),
            Err(Error::InvalidDimension { .. })
        ));
    }

    #[test]
    fn tensor_product_identities() {
        let i2 = Operator::identity(Basis::single(2).unwrap());
        let i3 = Operator::identity(Basis::single(3).unwrap());
        let i6 = tensor_product(&i2, &i3);
        assert_eq!(i6.dim(), 6);
        let dense = i6.to_dense();
        for i in 0..6 {
            for j in 0..6 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(dense[(i, j)].re, expect, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn tensor_product_lowers_first_factor() {
        let a = annihilation_operator(2).unwrap();
        let i2 = Operator::identity(Basis::single(2).unwrap());
        let a_full = tensor_product(&a, &i2);
        let psi = StateVector::fock(a_full.basis(), &[1, 0]);
        let out = a_full.apply_state(&psi).unwrap();
        let idx00 = a_full.basis().flat_index(&[0, 0]);
        assert_abs_diff_eq!(out.amplitudes()[idx00].re, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(out.norm_squared(), 1.0, epsilon = 1e-12);
    }

    /// Dense Kronecker-product oracle: (a (x) I)(I (x) b) must equal a (x) b
    /// entrywise at small dims.
    #[test]
    fn tensor_product_factorisation_oracle() {
        for (da, db) in [(2usize, 3usize), (3, 4), (4, 2)] {
            let a = annihilation_operator(da).unwrap();
            let b = annihilation_operator(db).unwrap();
            let ia = Operator::identity(Basis::single(da).unwrap());
            let ib = Operator::identity(Basis::single(db).unwrap());
            let lhs = tensor_product(&a, &ib).matmul(&tensor_product(&ia, &b));
            let rhs = tensor_product(&a, &b);
            // dense Kronecker multiplication oracle
            let ad = a.to_dense();
            let bd = b.to_dense();
            let mut oracle = Array2::<C64>::zeros((da * db, da * db));
            for i in 0..da {
                for j in 0..da {
                    for k in 0..db {
                        for l in 0..db {
                            oracle[(i * db + k, j * db + l)] = ad[(i, j)] * bd[(k, l)];
                        }
                    }
                }
            }
            let lhs_d = lhs.to_dense();
            let rhs_d = rhs.to_dense();
            for i in 0..da * db {
                for j in 0..da * db {
                    assert_abs_diff_eq!(lhs_d[(i, j)].re, oracle[(i, j)].re, epsilon = 1e-14);
                    assert_abs_diff_eq!(lhs_d[(i, j)].im, oracle[(i, j)].im, epsilon = 1e-14);
                    assert_abs_diff_eq!(rhs_d[(i, j)].re, oracle[(i, j)].re, epsilon = 1e-14);
                }
            }
        }
    }

    #[test]
    fn expectation_examples() {
        // number operator on |1> -> 1
        let n = number_operator(3).unwrap();
        let psi = StateVector::fock(n.basis(), &[1]);
        let e = expectation(&n, &psi).unwrap();
        assert_abs_diff_eq!(e.re, 1.0, epsilon = 1e-15);

        // sigma+ sigma- on ground state -> 0
        let sm = annihilation_operator(2).unwrap();
        let proj = sm.dagger().matmul(&sm);
        let ground = StateVector::fock(proj.basis(), &[0]);
        assert_abs_diff_eq!(
            expectation(&proj, &ground).unwrap().re,
            0.0,
            epsilon = 1e-15
        );

        // equal superposition -> 0.5
        let amps = Array1::from(vec![c(1.0 / 2f64.sqrt(), 0.0), c(1.0 / 2f64.sqrt(), 0.0)]);
        let sup = StateVector::new(proj.basis().clone(), amps).unwrap();
        assert_abs_diff_eq!(expectation(&proj, &sup).unwrap().re, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn expectation_rejects_basis_mismatch() {
        let n = number_operator(3).unwrap();
        let psi = StateVector::fock(&Basis::single(4).unwrap(), &[0]);
        assert!(matches!(
            expectation(&n, &psi),
            Err(Error::BasisMismatch { .. })
        ));
    }

    /// Truncation corrupts only the top level of the ladder commutator.
    #[test]
    fn commutator_identity_below_top_level() {
        for dim in [2usize, 3, 5, 9] {
            let a = annihilation_operator(dim).unwrap();
            let adag = a.dagger();
            let comm = a
                .matmul(&adag)
                .add_scaled(&adag.matmul(&a), c(-1.0, 0.0))
                .to_dense();
            for i in 0..dim - 1 {
                for j in 0..dim {
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert_abs_diff_eq!(comm[(i, j)].re, expect, epsilon = 1e-13);
                    assert_abs_diff_eq!(comm[(i, j)].im, 0.0, epsilon = 1e-13);
                }
            }
        }
    }

    #[test]
    fn tensor_product_associative_up_to_relabeling() {
        let ops: Vec<Operator> = vec![
            annihilation_operator(2).unwrap(),
            annihilation_operator(3).unwrap(),
            number_operator(3).unwrap(),
        ];
        let left = tensor_product(&tensor_product(&ops[0], &ops[1]), &ops[2]);
        let right = tensor_product(&ops[0], &tensor_product(&ops[1], &ops[2]));
        let (l, r) = (left.to_dense(), right.to_dense());
        for i in 0..l.nrows() {
            for j in 0..l.ncols() {
                assert_abs_diff_eq!(l[(i, j)].re, r[(i, j)].re, epsilon = 1e-14);
                assert_abs_diff_eq!(l[(i, j)].im, r[(i, j)].im, epsilon = 1e-14);
            }
        }
    }

    proptest! {
        /// Expectation of a Hermitian operator is real on any state.
        #[test]
        fn hermitian_expectation_is_real(raw in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 4)) {
            let dim = 4;
            let n = number_operator(dim).unwrap();
            let a = annihilation_operator(dim).unwrap();
            // hermitian combination n + a + a^dag
            let h = n.add(&a).add(&a.dagger());
            let amps = Array1::from(raw.iter().map(|&(re, im)| c(re, im)).collect::<Vec<_>>());
            let psi = StateVector::new(h.basis().clone(), amps).unwrap();
            let e = expectation(&h, &psi).unwrap();
            prop_assert!(e.im.abs() <= 1e-12 * (1.0 + e.re.abs()));
        }
    }
}
