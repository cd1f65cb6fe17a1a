// Copyright 2026 The retrodict Developers
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! Dense complex vectors and operators.
//!
//! Composite indices are row-major: for factors of dimensions `da` and `db`,
//! the basis pair `(i, j)` sits at index `i * db + j`. Every other module
//! relies on this convention.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Default tolerance for approximate equality.
pub const DEFAULT_TOL: f64 = 1e-9;
/// Default threshold below which a vector norm counts as zero.
pub const ZERO_TOL: f64 = 1e-9;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn all_finite(xs: &[C64]) -> bool {
    xs.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// A complex amplitude vector.
#[derive(Clone, PartialEq)]
pub struct StateVector {
    amps: Vec<C64>,
}

impl StateVector {
    pub fn new(amps: Vec<C64>) -> Result<Self> {
        if amps.is_empty() {
            return Err(Error::DimensionMismatch { expected: 1, found: 0 });
        }
        if !all_finite(&amps) {
            return Err(Error::NonFinite);
        }
        Ok(Self { amps })
    }

    pub fn from_real(xs: &[f64]) -> Result<Self> {
        Self::new(xs.iter().map(|&x| re(x)).collect())
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim > 0, "state dimension must be positive");
        Self { amps: vec![ZERO; dim] }
    }

    /// Canonical basis vector `e_index`.
    pub fn basis(dim: usize, index: usize) -> Self {
        assert!(index < dim, "basis index {index} out of range for dim {dim}");
        let mut v = Self::zeros(dim);
        v.amps[index] = ONE;
        v
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    #[inline]
    pub fn amps(&self) -> &[C64] {
        &self.amps
    }

    pub fn into_amps(self) -> Vec<C64> {
        self.amps
    }

    #[inline]
    pub fn get(&self, i: usize) -> C64 {
        self.amps[i]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        libm::sqrt(self.norm_sqr())
    }

    pub fn is_zero(&self, tol: f64) -> bool {
        self.norm() <= tol
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { amps: self.amps.iter().map(|z| z * s).collect() }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_dim(self.dim(), other.dim())?;
        Ok(Self { amps: self.amps.iter().zip(&other.amps).map(|(a, b)| a + b).collect() })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        check_dim(self.dim(), other.dim())?;
        Ok(Self { amps: self.amps.iter().zip(&other.amps).map(|(a, b)| a - b).collect() })
    }

    /// `self / ||self||`; fails with [`Error::ZeroState`] when the norm is at most `zero_tol`.
    pub fn normalize_with(&self, zero_tol: f64) -> Result<Self> {
        let n = self.norm();
        if n <= zero_tol {
            return Err(Error::ZeroState { norm: n });
        }
        Ok(self.scale(re(1.0 / n)))
    }

    pub fn normalize(&self) -> Result<Self> {
        self.normalize_with(ZERO_TOL)
    }

    pub fn tensor(&self, other: &Self) -> Self {
        tensor_state(self, other)
    }

    /// Index of the largest-magnitude amplitude (first on ties).
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, z) in self.amps.iter().enumerate() {
            if z.norm_sqr() > self.amps[best].norm_sqr() {
                best = i;
            }
        }
        best
    }
}

impl fmt::Debug for StateVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, z) in self.amps.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{:.6}{:+.6}i", z.re, z.im)?;
        }
        f.write_str("]")
    }
}

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

/// Kronecker product of two states.
pub fn tensor_state(a: &StateVector, b: &StateVector) -> StateVector {
    let mut amps = Vec::with_capacity(a.dim() * b.dim());
    for x in &a.amps {
        for y in &b.amps {
            amps.push(x * y);
        }
    }
    StateVector { amps }
}

/// Kronecker product of a list of states, left to right.
pub fn tensor_all<'a, I>(states: I) -> StateVector
where
    I: IntoIterator<Item = &'a StateVector>,
{
    let mut acc = StateVector { amps: vec![ONE] };
    for s in states {
        acc = tensor_state(&acc, s);
    }
    acc
}

/// `<u|v>`, conjugate-linear in `u`.
pub fn inner(u: &StateVector, v: &StateVector) -> Result<C64> {
    check_dim(u.dim(), v.dim())?;
    Ok(u.amps.iter().zip(&v.amps).map(|(a, b)| a.conj() * b).sum())
}

pub fn norm(v: &StateVector) -> f64 {
    v.norm()
}

pub fn normalize(v: &StateVector) -> Result<StateVector> {
    v.normalize()
}

/// Entrywise comparison: `max |x_i - y_i| <= tol`. Mismatched dimensions compare unequal.
pub fn approx_eq(x: &StateVector, y: &StateVector, tol: f64) -> bool {
    x.dim() == y.dim() && x.amps.iter().zip(&y.amps).all(|(a, b)| (a - b).norm() <= tol)
}

/// Equality up to a unit complex factor `e^{i t}`.
pub fn approx_eq_up_to_phase(x: &StateVector, y: &StateVector, tol: f64) -> bool {
    if x.dim() != y.dim() {
        return false;
    }
    let ov = x.amps.iter().zip(&y.amps).map(|(a, b)| a.conj() * b).sum::<C64>();
    let mag = ov.norm();
    if mag <= tol * tol {
        return x.norm() <= tol && y.norm() <= tol;
    }
    let phase = ov / mag;
    x.amps.iter().zip(&y.amps).all(|(a, b)| (a * phase - b).norm() <= tol)
}

/// `|<x|y>|^2 / (||x||^2 ||y||^2)`.
pub fn fidelity(x: &StateVector, y: &StateVector) -> Result<f64> {
    let ov = inner(x, y)?;
    let d = x.norm_sqr() * y.norm_sqr();
    if d <= 0.0 {
        return Err(Error::ZeroState { norm: 0.0 });
    }
    Ok(ov.norm_sqr() / d)
}

/// A dense row-major complex matrix.
#[derive(Clone, PartialEq)]
pub struct Operator {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl Operator {
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::DimensionMismatch { expected: 1, found: 0 });
        }
        check_dim(rows * cols, data.len())?;
        if !all_finite(&data) {
            return Err(Error::NonFinite);
        }
        Ok(Self { rows, cols, data })
    }

    /// Build from nested rows.
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let r = rows.len();
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(r * cols);
        for row in rows {
            check_dim(cols, row.len())?;
            data.extend_from_slice(row);
        }
        Self::new(r, cols, data)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "operator dimensions must be positive");
        Self { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                m.data[r * cols + c] = f(r, c);
            }
        }
        m
    }

    /// `|u><v|`.
    pub fn outer(u: &StateVector, v: &StateVector) -> Self {
        Self::from_fn(u.dim(), v.dim(), |r, c| u.amps[r] * v.amps[c].conj())
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(cols: &[StateVector]) -> Result<Self> {
        let n = cols.len();
        let rows = cols.first().map_or(0, StateVector::dim);
        for c in cols {
            check_dim(rows, c.dim())?;
        }
        if n == 0 || rows == 0 {
            return Err(Error::DimensionMismatch { expected: 1, found: 0 });
        }
        Ok(Self::from_fn(rows, n, |r, c| cols[c].amps[r]))
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, z: C64) {
        self.data[r * self.cols + c] = z;
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn row(&self, r: usize) -> &[C64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> StateVector {
        StateVector { amps: (0..self.rows).map(|r| self.get(r, c)).collect() }
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self.get(c, r).conj())
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z * s).collect() }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Ok(Self { rows: self.rows, cols: self.cols, data })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Ok(Self { rows: self.rows, cols: self.cols, data })
    }

    /// Matrix product `self * other`.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        check_dim(self.cols, other.rows)?;
        let mut out = Self::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[r * self.cols + k];
                if a == ZERO {
                    continue;
                }
                for c in 0..other.cols {
                    out.data[r * other.cols + c] += a * other.data[k * other.cols + c];
                }
            }
        }
        Ok(out)
    }

    pub fn apply(&self, v: &StateVector) -> Result<StateVector> {
        check_dim(self.cols, v.dim())?;
        let amps = (0..self.rows)
            .map(|r| self.row(r).iter().zip(&v.amps).map(|(a, b)| a * b).sum())
            .collect();
        Ok(StateVector { amps })
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).sum()
    }

    /// Largest entrywise modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise modulus of `self - other`; infinite on shape mismatch.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.rows != other.rows || self.cols != other.cols {
            return f64::INFINITY;
        }
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.max_abs_diff(other) <= tol
    }

    pub fn is_zero(&self, tol: f64) -> bool {
        self.max_abs() <= tol
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.is_square() && self.approx_eq(&self.adjoint(), tol)
    }

    /// Hermitian and idempotent.
    pub fn is_projector(&self, tol: f64) -> bool {
        self.is_hermitian(tol) && self.mul(self).map(|p2| p2.approx_eq(self, tol)).unwrap_or(false)
    }

    pub fn tensor(&self, other: &Self) -> Self {
        tensor_op(self, other)
    }

    fn same_shape(&self, other: &Self) -> Result<()> {
        check_dim(self.rows, other.rows)?;
        check_dim(self.cols, other.cols)
    }
}

impl fmt::Debug for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Operator {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            f.write_str("  ")?;
            for (i, z) in self.row(r).iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{:.4}{:+.4}i", z.re, z.im)?;
            }
            f.write_str("\n")?;
        }
        f.write_str("]")
    }
}

/// Kronecker product with the same row-major block layout as [`tensor_state`].
pub fn tensor_op(a: &Operator, b: &Operator) -> Operator {
    let rows = a.rows * b.rows;
    let cols = a.cols * b.cols;
    let mut out = Operator::zeros(rows, cols);
    for ar in 0..a.rows {
        for ac in 0..a.cols {
            let x = a.get(ar, ac);
            if x == ZERO {
                continue;
            }
            for br in 0..b.rows {
                for bc in 0..b.cols {
                    out.data[(ar * b.rows + br) * cols + ac * b.cols + bc] = x * b.get(br, bc);
                }
            }
        }
    }
    out
}

pub fn apply(a: &Operator, v: &StateVector) -> Result<StateVector> {
    a.apply(v)
}

pub fn adjoint(a: &Operator) -> Operator {
    a.adjoint()
}

/// `|v><v|` for a unit vector `v`.
pub fn projector_onto(v: &StateVector, tol: f64) -> Result<Operator> {
    let n = v.norm();
    if (n - 1.0).abs() > tol {
        return Err(Error::InvalidArgument(alloc::format!(
            "projector target must be a unit vector (norm {n})"
        )));
    }
    Ok(Operator::outer(v, v))
}

/// `I - sum P_a` for mutually orthogonal projectors `P_a`.
///
/// This is the square root of `I - sum P_a^† P_a` in the only case supported;
/// non-projector or overlapping inputs are rejected.
pub fn projector_complement(ops: &[Operator], tol: f64) -> Result<Operator> {
    let n = ops.first().map(Operator::rows).ok_or_else(|| {
        Error::NotProjector(alloc::string::String::from("empty family"))
    })?;
    let mut acc = Operator::identity(n);
    for (a, p) in ops.iter().enumerate() {
        if p.rows != n || p.cols != n {
            return Err(Error::DimensionMismatch { expected: n, found: p.rows.max(p.cols) });
        }
        if !p.is_projector(tol) {
            return Err(Error::NotProjector(alloc::format!("operator {a} is not an orthogonal projector")));
        }
        for q in &ops[..a] {
            if !p.mul(q)?.is_zero(tol) {
                return Err(Error::NotProjector(alloc::format!(
                    "operator {a} overlaps an earlier projector"
                )));
            }
        }
        acc = acc.sub(p)?;
    }
    Ok(acc)
}

/// Contract one factor of a composite vector with `<w|`.
///
/// `dims` lists the factor dimensions; the result drops factor `slot`.
pub fn contract_factor(v: &StateVector, dims: &[usize], slot: usize, w: &StateVector) -> Result<StateVector> {
    let total: usize = dims.iter().product();
    check_dim(total, v.dim())?;
    check_dim(dims[slot], w.dim())?;
    let left: usize = dims[..slot].iter().product();
    let right: usize = dims[slot + 1..].iter().product();
    let d = dims[slot];
    let mut out = vec![ZERO; left * right];
    for l in 0..left {
        for k in 0..d {
            let wc = w.amps[k].conj();
            if wc == ZERO {
                continue;
            }
            for r in 0..right {
                out[l * right + r] += wc * v.amps[(l * d + k) * right + r];
            }
        }
    }
    Ok(StateVector { amps: out })
}

/// Split `v` into per-factor unit states if it is a product over `dims`.
///
/// Returns `None` when some bipartition has rank above one. The factors carry
/// an arbitrary phase convention; `tensor_all(factors)` reproduces `v / ||v||`
/// up to a unit phase.
pub fn factorize(v: &StateVector, dims: &[usize], tol: f64) -> Option<Vec<StateVector>> {
    let total: usize = dims.iter().product();
    if total != v.dim() || dims.is_empty() {
        return None;
    }
    let unit = v.normalize_with(tol).ok()?;
    let mut factors = Vec::with_capacity(dims.len());
    for slot in 0..dims.len() {
        let right: usize = dims[slot + 1..].iter().product();
        let d = dims[slot];
        // Fix the other factors at the largest-amplitude entry and read off this factor.
        let pivot = unit.argmax();
        let l0 = pivot / (d * right);
        let r0 = pivot % right;
        let amps: Vec<C64> = (0..d).map(|k| unit.amps[(l0 * d + k) * right + r0]).collect();
        let f = StateVector { amps }.normalize_with(tol).ok()?;
        factors.push(f);
    }
    let rebuilt = tensor_all(factors.iter());
    if approx_eq_up_to_phase(&rebuilt, &unit, tol) {
        Some(factors)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const S2: f64 = core::f64::consts::FRAC_1_SQRT_2;

    fn plus() -> StateVector {
        StateVector::from_real(&[S2, S2]).unwrap()
    }

    #[test]
    fn tensor_basis_indices() {
        let v = tensor_state(&StateVector::basis(2, 0), &StateVector::basis(2, 1));
        assert_eq!(v, StateVector::basis(4, 1));
        let w = tensor_state(&plus(), &StateVector::basis(2, 0));
        assert!(approx_eq(&w, &StateVector::from_real(&[S2, 0.0, S2, 0.0]).unwrap(), 1e-15));
    }

    #[test]
    fn start_state_of_two_outcome_apparatus() {
        // apparatus dim 3, init at index 2
        let v = tensor_state(&plus(), &StateVector::basis(3, 2));
        for i in 0..6 {
            let want = if i == 2 || i == 5 { S2 } else { 0.0 };
            assert!((v.get(i) - re(want)).norm() < 1e-15, "index {i}");
        }
    }

    #[test]
    fn kron_examples() {
        assert_eq!(tensor_op(&Operator::identity(2), &Operator::identity(3)), Operator::identity(6));
        let p0 = Operator::outer(&StateVector::basis(2, 0), &StateVector::basis(2, 0));
        let k = tensor_op(&p0, &Operator::identity(2));
        let want = Operator::from_fn(4, 4, |r, c| if r == c && r < 2 { ONE } else { ZERO });
        assert_eq!(k, want);
    }

    #[test]
    fn apply_examples() {
        let v = plus();
        assert_eq!(Operator::identity(2).apply(&v).unwrap(), v);
        let p0 = Operator::outer(&StateVector::basis(2, 0), &StateVector::basis(2, 0));
        let out = p0.apply(&v).unwrap();
        assert!(approx_eq(&out, &StateVector::from_real(&[S2, 0.0]).unwrap(), 1e-15));
        assert!(matches!(
            Operator::identity(3).apply(&v),
            Err(Error::DimensionMismatch { expected: 3, found: 2 })
        ));
    }

    #[test]
    fn complement_kills_final_states() {
        let p0 = Operator::outer(&StateVector::basis(3, 0), &StateVector::basis(3, 0));
        let p1 = Operator::outer(&StateVector::basis(3, 1), &StateVector::basis(3, 1));
        let p2 = projector_complement(&[p0.clone(), p1], 1e-12).unwrap();
        assert!(p2.apply(&StateVector::basis(3, 0)).unwrap().is_zero(1e-15));
        assert!(approx_eq(&p2.apply(&StateVector::basis(3, 2)).unwrap(), &StateVector::basis(3, 2), 0.0));
        let bad = p0.scale(re(0.5));
        assert!(matches!(projector_complement(&[bad], 1e-12), Err(Error::NotProjector(_))));
        assert!(matches!(projector_complement(&[p0.clone(), p0], 1e-12), Err(Error::NotProjector(_))));
    }

    #[test]
    fn inner_norm_normalize() {
        assert!((plus().norm() - 1.0).abs() < 1e-15);
        let ip = inner(&StateVector::basis(2, 0), &plus()).unwrap();
        assert!((ip - re(S2)).norm() < 1e-15);
        let i = StateVector::new(vec![c(0.0, 1.0), ZERO]).unwrap();
        // conjugate-linear in the first slot
        assert_eq!(inner(&i, &StateVector::basis(2, 0)).unwrap(), c(0.0, -1.0));
        assert!(matches!(StateVector::zeros(3).normalize(), Err(Error::ZeroState { .. })));
    }

    #[test]
    fn rank_one_bell_projector() {
        let psi = StateVector::from_real(&[S2, 0.0, 0.0, S2]).unwrap();
        let p = projector_onto(&psi, 1e-12).unwrap();
        assert!(p.is_projector(1e-12));
        assert!((p.trace() - ONE).norm() < 1e-12);
        assert!(p.get(0, 3).re > 0.49 && p.get(1, 1) == ZERO);
        assert!(projector_onto(&StateVector::from_real(&[1.0, 1.0]).unwrap(), 1e-9).is_err());
    }

    #[test]
    fn phase_equality() {
        let v = plus();
        let w = v.scale(c(0.0, -1.0));
        assert!(approx_eq_up_to_phase(&v, &w, 1e-12));
        assert!(!approx_eq(&v, &w, 1e-12));
        let minus = StateVector::from_real(&[S2, -S2]).unwrap();
        assert!(!approx_eq_up_to_phase(&v, &minus, 1e-6));
    }

    #[test]
    fn rejects_non_finite() {
        assert_eq!(StateVector::from_real(&[f64::NAN]), Err(Error::NonFinite));
        assert_eq!(Operator::new(1, 1, vec![c(f64::INFINITY, 0.0)]), Err(Error::NonFinite));
    }

    #[test]
    fn contract_and_factorize() {
        let a = plus();
        let b = StateVector::basis(3, 1);
        let d = StateVector::new(vec![c(0.6, 0.0), c(0.0, 0.8)]).unwrap();
        let v = tensor_all([&a, &b, &d]).scale(c(0.0, 1.0));
        let fs = factorize(&v, &[2, 3, 2], 1e-10).unwrap();
        assert!(approx_eq_up_to_phase(&fs[0], &a, 1e-12));
        assert!(approx_eq_up_to_phase(&fs[1], &b, 1e-12));
        assert!(approx_eq_up_to_phase(&fs[2], &d, 1e-12));
        let rest = contract_factor(&v, &[2, 3, 2], 1, &b).unwrap();
        assert!(approx_eq_up_to_phase(&rest, &tensor_state(&a, &d), 1e-12));
        let bell = StateVector::from_real(&[S2, 0.0, 0.0, S2]).unwrap();
        assert!(factorize(&bell, &[2, 2], 1e-10).is_none());
    }

    fn cplx() -> impl Strategy<Value = C64> {
        (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(a, b)| c(a, b))
    }

    fn vector(dim: usize) -> impl Strategy<Value = StateVector> {
        proptest::collection::vec(cplx(), dim).prop_map(|v| StateVector::new(v).unwrap())
    }

    fn matrix(r: usize, c: usize) -> impl Strategy<Value = Operator> {
        proptest::collection::vec(cplx(), r * c).prop_map(move |v| Operator::new(r, c, v).unwrap())
    }

    fn kron_case() -> impl Strategy<Value = (Operator, Operator, StateVector, StateVector)> {
        (1usize..4, 1usize..4, 1usize..4, 1usize..4).prop_flat_map(|(ar, ac, br, bc)| {
            (matrix(ar, ac), matrix(br, bc), vector(ac), vector(bc))
        })
    }

    proptest! {
        #[test]
        fn kron_mixed_product((a, b, u, v) in kron_case()) {
            let lhs = tensor_op(&a, &b).apply(&tensor_state(&u, &v)).unwrap();
            let rhs = tensor_state(&a.apply(&u).unwrap(), &b.apply(&v).unwrap());
            prop_assert!(approx_eq(&lhs, &rhs, 1e-12));
        }

        #[test]
        fn adjoint_involution(m in (1usize..5, 1usize..5).prop_flat_map(|(r, c)| matrix(r, c))) {
            prop_assert_eq!(m.adjoint().adjoint(), m);
        }

        #[test]
        fn normalized_has_unit_norm(v in (1usize..8).prop_flat_map(vector)) {
            prop_assume!(v.norm() > 1e-6);
            let n = v.normalize().unwrap().norm();
            prop_assert!((n - 1.0).abs() <= 1e-12);
        }

        #[test]
        fn rank_one_projector_laws(v in (1usize..8).prop_flat_map(vector)) {
            prop_assume!(v.norm() > 1e-6);
            let p = projector_onto(&v.normalize().unwrap(), 1e-12).unwrap();
            prop_assert!(p.mul(&p).unwrap().approx_eq(&p, 1e-12));
            prop_assert!(p.adjoint().approx_eq(&p, 1e-12));
        }

        #[test]
        fn factorize_recovers_products(a in vector(2), b in vector(3), d in vector(2)) {
            prop_assume!(a.norm() > 1e-3 && b.norm() > 1e-3 && d.norm() > 1e-3);
            let v = tensor_all([&a, &b, &d]);
            let fs = factorize(&v, &[2, 3, 2], 1e-9).unwrap();
            prop_assert!(approx_eq_up_to_phase(&fs[0], &a.normalize().unwrap(), 1e-9));
            prop_assert!(approx_eq_up_to_phase(&fs[1], &b.normalize().unwrap(), 1e-9));
            prop_assert!(approx_eq_up_to_phase(&fs[2], &d.normalize().unwrap(), 1e-9));
        }
    }
}
