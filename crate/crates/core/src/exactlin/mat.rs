use std::fmt;

use num::rational::BigRational;
use num::Zero;

use super::field::{inv_mod, mul_mod, Field, Scalar};
use crate::error::{Error, Result};

/// Entry storage; the variant always agrees with the matrix field.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum Data {
    Fp(Vec<u32>),
    Q(Vec<BigRational>),
}

trait Arith {
    type E: Clone + PartialEq + fmt::Debug;
    fn zero(&self) -> Self::E;
    fn add(&self, a: &Self::E, b: &Self::E) -> Self::E;
    fn sub(&self, a: &Self::E, b: &Self::E) -> Self::E;
    fn mul(&self, a: &Self::E, b: &Self::E) -> Self::E;
    fn neg(&self, a: &Self::E) -> Self::E;
    fn inv(&self, a: &Self::E) -> Self::E;
    fn is_zero(&self, a: &Self::E) -> bool;
    fn to_scalar(&self, a: &Self::E) -> Scalar;
    fn from_scalar(&self, s: &Scalar) -> Self::E;
    fn view<'a>(&self, d: &'a Data) -> &'a [Self::E];
    fn wrap(&self, v: Vec<Self::E>) -> Data;
}

struct FpA(pub u32);
struct QA;

impl Arith for FpA {
    type E = u32;
    fn zero(&self) -> u32 {
        0
    }
    fn add(&self, a: &u32, b: &u32) -> u32 {
        let s = *a as u64 + *b as u64;
        (s % self.0 as u64) as u32
    }
    fn sub(&self, a: &u32, b: &u32) -> u32 {
        let s = *a as u64 + self.0 as u64 - *b as u64;
        (s % self.0 as u64) as u32
    }
    fn mul(&self, a: &u32, b: &u32) -> u32 {
        mul_mod(*a, *b, self.0)
    }
    fn neg(&self, a: &u32) -> u32 {
        if *a == 0 {
            0
        } else {
            self.0 - *a
        }
    }
    fn inv(&self, a: &u32) -> u32 {
        inv_mod(*a, self.0)
    }
    fn is_zero(&self, a: &u32) -> bool {
        *a == 0
    }
    fn to_scalar(&self, a: &u32) -> Scalar {
        Scalar::Fp(*a)
    }
    fn from_scalar(&self, s: &Scalar) -> u32 {
        match s {
            Scalar::Fp(v) => *v % self.0,
            Scalar::Q(q) => match Field::Prime(self.0).from_rational(q) {
                Ok(Scalar::Fp(v)) => v,
                _ => panic!("{q} is not representable mod {}", self.0),
            },
        }
    }
    fn view<'a>(&self, d: &'a Data) -> &'a [u32] {
        match d {
            Data::Fp(v) => v,
            Data::Q(_) => unreachable!("storage does not match field"),
        }
    }
    fn wrap(&self, v: Vec<u32>) -> Data {
        Data::Fp(v)
    }
}

impl Arith for QA {
    type E = BigRational;
    fn zero(&self) -> BigRational {
        BigRational::zero()
    }
    fn add(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a + b
    }
    fn sub(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a - b
    }
    fn mul(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a * b
    }
    fn neg(&self, a: &BigRational) -> BigRational {
        -a
    }
    fn inv(&self, a: &BigRational) -> BigRational {
        a.recip()
    }
    fn is_zero(&self, a: &BigRational) -> bool {
        a.is_zero()
    }
    fn to_scalar(&self, a: &BigRational) -> Scalar {
        Scalar::Q(a.clone())
    }
    fn from_scalar(&self, s: &Scalar) -> BigRational {
        s.to_rational()
    }
    fn view<'a>(&self, d: &'a Data) -> &'a [BigRational] {
        match d {
            Data::Q(v) => v,
            Data::Fp(_) => unreachable!("storage does not match field"),
        }
    }
    fn wrap(&self, v: Vec<BigRational>) -> Data {
        Data::Q(v)
    }
}

macro_rules! dispatch {
    ($field:expr, $a:ident => $body:expr) => {
        match $field {
            Field::Prime(p) => {
                let $a = &FpA(p);
                $body
            }
            Field::Rational => {
                let $a = &QA;
                $body
            }
        }
    };
}

/// Dense row-major matrix over a [`Field`].
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Mat {
    field: Field,
    rows: usize,
    cols: usize,
    data: Data,
}

/// Reduced row echelon form with leftmost pivots scaled to one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rref {
    pub matrix: Mat,
    pub pivots: Vec<usize>,
}

impl Rref {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }
}

/// A surjection `map: V -> V/W` together with a section `section: V/W -> V`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Quotient {
    pub map: Mat,
    pub section: Mat,
}

impl Quotient {
    pub fn dim(&self) -> usize {
        self.map.rows()
    }
}

fn rref_in_place<A: Arith>(a: &A, rows: usize, cols: usize, d: &mut [A::E]) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(pr) = (r..rows).find(|&i| !a.is_zero(&d[i * cols + c])) else {
            continue;
        };
        if pr != r {
            for j in 0..cols {
                d.swap(pr * cols + j, r * cols + j);
            }
        }
        let inv = a.inv(&d[r * cols + c]);
        for j in c..cols {
            d[r * cols + j] = a.mul(&d[r * cols + j], &inv);
        }
        for i in 0..rows {
            if i == r || a.is_zero(&d[i * cols + c]) {
                continue;
            }
            let f = d[i * cols + c].clone();
            for j in c..cols {
                let t = a.mul(&f, &d[r * cols + j]);
                d[i * cols + j] = a.sub(&d[i * cols + j], &t);
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

impl Mat {
    fn from_parts<A: Arith>(a: &A, field: Field, rows: usize, cols: usize, v: Vec<A::E>) -> Mat {
        debug_assert_eq!(v.len(), rows * cols);
        Mat { field, rows, cols, data: a.wrap(v) }
    }

    pub fn zeros(field: Field, rows: usize, cols: usize) -> Mat {
        dispatch!(field, a => Mat::from_parts(a, field, rows, cols, vec![a.zero(); rows * cols]))
    }

    pub fn identity(field: Field, n: usize) -> Mat {
        let mut m = Mat::zeros(field, n, n);
        for i in 0..n {
            m.set(i, i, &field.one());
        }
        m
    }

    /// Builds a matrix from row-major integer entries.
    pub fn from_i64(field: Field, rows: usize, cols: usize, entries: &[i64]) -> Mat {
        assert_eq!(entries.len(), rows * cols, "entry count must equal rows * cols");
        Mat::from_scalars(field, rows, cols, entries.iter().map(|&e| field.from_i64(e)).collect())
    }

    /// Builds a matrix from integer rows; all rows must have the same length.
    pub fn from_rows(field: Field, rows: &[Vec<i64>]) -> Mat {
        let cols = rows.first().map_or(0, |r| r.len());
        let flat: Vec<i64> = rows.iter().flat_map(|r| r.iter().copied()).collect();
        Mat::from_i64(field, rows.len(), cols, &flat)
    }

    pub fn from_scalars(field: Field, rows: usize, cols: usize, entries: Vec<Scalar>) -> Mat {
        assert_eq!(entries.len(), rows * cols, "entry count must equal rows * cols");
        dispatch!(field, a => {
            let v = entries.iter().map(|s| a.from_scalar(s)).collect();
            Mat::from_parts(a, field, rows, cols, v)
        })
    }

    /// Column matrix from a vector of scalars.
    pub fn column(field: Field, entries: Vec<Scalar>) -> Mat {
        let n = entries.len();
        Mat::from_scalars(field, n, 1, entries)
    }

    pub fn field(&self) -> Field {
        self.field
    }
    pub fn rows(&self) -> usize {
        self.rows
    }
    pub fn cols(&self) -> usize {
        self.cols
    }
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn get(&self, i: usize, j: usize) -> Scalar {
        assert!(i < self.rows && j < self.cols, "index out of range");
        dispatch!(self.field, a => a.to_scalar(&a.view(&self.data)[i * self.cols + j]))
    }

    pub fn set(&mut self, i: usize, j: usize, s: &Scalar) {
        assert!(i < self.rows && j < self.cols, "index out of range");
        let k = i * self.cols + j;
        match (&mut self.data, self.field) {
            (Data::Fp(v), Field::Prime(p)) => v[k] = FpA(p).from_scalar(s),
            (Data::Q(v), Field::Rational) => v[k] = s.to_rational(),
            _ => unreachable!("storage does not match field"),
        }
    }

    /// Row-major entries.
    pub fn entries(&self) -> Vec<Scalar> {
        dispatch!(self.field, a => a.view(&self.data).iter().map(|e| a.to_scalar(e)).collect())
    }

    pub fn is_zero(&self) -> bool {
        dispatch!(self.field, a => a.view(&self.data).iter().all(|e| a.is_zero(e)))
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    fn check_field(&self, other: &Mat) {
        assert_eq!(self.field, other.field, "matrices over different fields");
    }

    /// Matrix product; panics on a shape mismatch.
    pub fn mul(&self, other: &Mat) -> Mat {
        self.check_field(other);
        assert_eq!(
            self.cols, other.rows,
            "cannot multiply {}x{} by {}x{}",
            self.rows, self.cols, other.rows, other.cols
        );
        let (n, k, m) = (self.rows, self.cols, other.cols);
        dispatch!(self.field, a => {
            let x = a.view(&self.data);
            let y = a.view(&other.data);
            let mut out = vec![a.zero(); n * m];
            for i in 0..n {
                for t in 0..k {
                    let xv = &x[i * k + t];
                    if a.is_zero(xv) {
                        continue;
                    }
                    for j in 0..m {
                        let yv = &y[t * m + j];
                        if !a.is_zero(yv) {
                            out[i * m + j] = a.add(&out[i * m + j], &a.mul(xv, yv));
                        }
                    }
                }
            }
            Mat::from_parts(a, self.field, n, m, out)
        })
    }

    /// Checked product returning an error instead of panicking.
    pub fn try_mul(&self, other: &Mat) -> Result<Mat> {
        if self.field != other.field {
            return Err(Error::FieldMismatch(self.field.to_string(), other.field.to_string()));
        }
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(self.mul(other))
    }

    fn zip(&self, other: &Mat, sub: bool) -> Mat {
        self.check_field(other);
        assert_eq!(self.shape(), other.shape(), "shape mismatch in elementwise operation");
        dispatch!(self.field, a => {
            let v = a
                .view(&self.data)
                .iter()
                .zip(a.view(&other.data))
                .map(|(x, y)| if sub { a.sub(x, y) } else { a.add(x, y) })
                .collect();
            Mat::from_parts(a, self.field, self.rows, self.cols, v)
        })
    }

    pub fn add(&self, other: &Mat) -> Mat {
        self.zip(other, false)
    }

    pub fn sub(&self, other: &Mat) -> Mat {
        self.zip(other, true)
    }

    pub fn neg(&self) -> Mat {
        dispatch!(self.field, a => {
            let v = a.view(&self.data).iter().map(|x| a.neg(x)).collect();
            Mat::from_parts(a, self.field, self.rows, self.cols, v)
        })
    }

    pub fn scale(&self, s: &Scalar) -> Mat {
        dispatch!(self.field, a => {
            let c = a.from_scalar(s);
            let v = a.view(&self.data).iter().map(|x| a.mul(x, &c)).collect();
            Mat::from_parts(a, self.field, self.rows, self.cols, v)
        })
    }

    pub fn transpose(&self) -> Mat {
        dispatch!(self.field, a => {
            let x = a.view(&self.data);
            let mut v = Vec::with_capacity(x.len());
            for j in 0..self.cols {
                for i in 0..self.rows {
                    v.push(x[i * self.cols + j].clone());
                }
            }
            Mat::from_parts(a, self.field, self.cols, self.rows, v)
        })
    }

    /// Horizontal concatenation; `rows` fixes the height when `parts` is empty.
    pub fn hstack(field: Field, rows: usize, parts: &[&Mat]) -> Mat {
        let cols: usize = parts.iter().map(|m| m.cols).sum();
        let mut out = Mat::zeros(field, rows, cols);
        let mut c0 = 0;
        for m in parts {
            assert_eq!(m.rows, rows, "hstack height mismatch");
            out.paste(0, c0, m);
            c0 += m.cols;
        }
        out
    }

    /// Vertical concatenation; `cols` fixes the width when `parts` is empty.
    pub fn vstack(field: Field, cols: usize, parts: &[&Mat]) -> Mat {
        let rows: usize = parts.iter().map(|m| m.rows).sum();
        let mut out = Mat::zeros(field, rows, cols);
        let mut r0 = 0;
        for m in parts {
            assert_eq!(m.cols, cols, "vstack width mismatch");
            out.paste(r0, 0, m);
            r0 += m.rows;
        }
        out
    }

    pub fn block_diag(field: Field, parts: &[&Mat]) -> Mat {
        let rows = parts.iter().map(|m| m.rows).sum();
        let cols = parts.iter().map(|m| m.cols).sum();
        let mut out = Mat::zeros(field, rows, cols);
        let (mut r0, mut c0) = (0, 0);
        for m in parts {
            out.paste(r0, c0, m);
            r0 += m.rows;
            c0 += m.cols;
        }
        out
    }

    /// Overwrites the block starting at `(r0, c0)` with `m`.
    pub fn paste(&mut self, r0: usize, c0: usize, m: &Mat) {
        self.check_field(m);
        assert!(r0 + m.rows <= self.rows && c0 + m.cols <= self.cols, "paste out of range");
        let cols = self.cols;
        match (&mut self.data, &m.data) {
            (Data::Fp(d), Data::Fp(s)) => {
                for i in 0..m.rows {
                    d[(r0 + i) * cols + c0..(r0 + i) * cols + c0 + m.cols]
                        .copy_from_slice(&s[i * m.cols..(i + 1) * m.cols]);
                }
            }
            (Data::Q(d), Data::Q(s)) => {
                for i in 0..m.rows {
                    d[(r0 + i) * cols + c0..(r0 + i) * cols + c0 + m.cols]
                        .clone_from_slice(&s[i * m.cols..(i + 1) * m.cols]);
                }
            }
            _ => unreachable!("storage does not match field"),
        }
    }

    /// Block of rows `r0..r1` and columns `c0..c1`.
    pub fn block(&self, r0: usize, r1: usize, c0: usize, c1: usize) -> Mat {
        assert!(r0 <= r1 && r1 <= self.rows && c0 <= c1 && c1 <= self.cols, "block out of range");
        dispatch!(self.field, a => {
            let x = a.view(&self.data);
            let mut v = Vec::with_capacity((r1 - r0) * (c1 - c0));
            for i in r0..r1 {
                v.extend_from_slice(&x[i * self.cols + c0..i * self.cols + c1]);
            }
            Mat::from_parts(a, self.field, r1 - r0, c1 - c0, v)
        })
    }

    pub fn select_rows(&self, idx: &[usize]) -> Mat {
        dispatch!(self.field, a => {
            let x = a.view(&self.data);
            let mut v = Vec::with_capacity(idx.len() * self.cols);
            for &i in idx {
                v.extend_from_slice(&x[i * self.cols..(i + 1) * self.cols]);
            }
            Mat::from_parts(a, self.field, idx.len(), self.cols, v)
        })
    }

    pub fn select_cols(&self, idx: &[usize]) -> Mat {
        dispatch!(self.field, a => {
            let x = a.view(&self.data);
            let mut v = Vec::with_capacity(idx.len() * self.rows);
            for i in 0..self.rows {
                for &j in idx {
                    v.push(x[i * self.cols + j].clone());
                }
            }
            Mat::from_parts(a, self.field, self.rows, idx.len(), v)
        })
    }

    pub fn rref(&self) -> Rref {
        dispatch!(self.field, a => {
            let mut d = a.view(&self.data).to_vec();
            let pivots = rref_in_place(a, self.rows, self.cols, &mut d);
            Rref { matrix: Mat::from_parts(a, self.field, self.rows, self.cols, d), pivots }
        })
    }

    pub fn rank(&self) -> usize {
        self.rref().rank()
    }

    /// Kernel basis as columns, one per free column of the echelon form.
    pub fn kernel_basis(&self) -> Mat {
        let r = self.rref();
        let n = self.cols;
        let free: Vec<usize> = (0..n).filter(|c| !r.pivots.contains(c)).collect();
        let mut k = Mat::zeros(self.field, n, free.len());
        for (t, &f) in free.iter().enumerate() {
            k.set(f, t, &self.field.one());
            for (i, &p) in r.pivots.iter().enumerate() {
                let e = r.matrix.get(i, f);
                if !e.is_zero() {
                    k.set(p, t, &neg_scalar(self.field, &e));
                }
            }
        }
        k
    }

    /// Image basis: the pivot columns of `self`.
    pub fn image_basis(&self) -> Mat {
        let r = self.rref();
        self.select_cols(&r.pivots)
    }

    /// Canonical basis of the column space: the transposed nonzero rows of the
    /// echelon form of the transpose. Equal subspaces give equal matrices.
    pub fn canonical_basis(&self) -> Mat {
        let r = self.transpose().rref();
        let k = r.rank();
        r.matrix.block(0, k, 0, self.rows).transpose()
    }

    /// Solves `self * x = b` column by column, with free variables set to zero.
    /// Returns `Ok(None)` when the system is inconsistent.
    pub fn solve(&self, b: &Mat) -> Result<Option<Mat>> {
        if self.field != b.field {
            return Err(Error::FieldMismatch(self.field.to_string(), b.field.to_string()));
        }
        if self.rows != b.rows {
            return Err(Error::Dimension(format!(
                "system has {} rows but right-hand side has {}",
                self.rows, b.rows
            )));
        }
        let n = self.cols;
        let aug = Mat::hstack(self.field, self.rows, &[self, b]);
        let r = aug.rref();
        if r.pivots.iter().any(|&p| p >= n) {
            return Ok(None);
        }
        let mut x = Mat::zeros(self.field, n, b.cols);
        for (i, &p) in r.pivots.iter().enumerate() {
            x.paste(p, 0, &r.matrix.block(i, i + 1, n, n + b.cols));
        }
        Ok(Some(x))
    }

    pub fn inverse(&self) -> Option<Mat> {
        if !self.is_square() {
            return None;
        }
        let n = self.rows;
        let aug = Mat::hstack(self.field, n, &[self, &Mat::identity(self.field, n)]);
        let r = aug.rref();
        if r.pivots.iter().take(n).copied().ne(0..n) {
            return None;
        }
        Some(r.matrix.block(0, n, n, 2 * n))
    }

    pub fn is_invertible(&self) -> bool {
        self.is_square() && self.rank() == self.rows
    }

    /// Quotient of `k^ambient` by the column span of `sub`.
    ///
    /// The span is put in echelon form; the map keeps the non-pivot coordinates
    /// after clearing the pivot ones, and the section is the inclusion of those
    /// coordinates.
    pub fn quotient_map(field: Field, ambient: usize, sub: &Mat) -> Result<Quotient> {
        if sub.rows != ambient {
            return Err(Error::Dimension(format!(
                "subspace vectors have length {}, ambient dimension is {ambient}",
                sub.rows
            )));
        }
        if sub.field != field {
            return Err(Error::FieldMismatch(field.to_string(), sub.field.to_string()));
        }
        let r = sub.transpose().rref();
        let comp: Vec<usize> = (0..ambient).filter(|c| !r.pivots.contains(c)).collect();
        let mut map = Mat::zeros(field, comp.len(), ambient);
        let mut section = Mat::zeros(field, ambient, comp.len());
        for (t, &c) in comp.iter().enumerate() {
            map.set(t, c, &field.one());
            section.set(c, t, &field.one());
            for (i, &p) in r.pivots.iter().enumerate() {
                let e = r.matrix.get(i, c);
                if !e.is_zero() {
                    map.set(t, p, &neg_scalar(field, &e));
                }
            }
        }
        Ok(Quotient { map, section })
    }

    /// Whether every column of `other` lies in the column space of `self`.
    pub fn span_contains(&self, other: &Mat) -> bool {
        if other.cols == 0 {
            return true;
        }
        matches!(self.solve(other), Ok(Some(_)))
    }

    /// Basis of the intersection of two column spans in the same ambient space.
    pub fn span_intersection(&self, other: &Mat) -> Mat {
        assert_eq!(self.rows, other.rows, "ambient dimension mismatch");
        let stacked = Mat::hstack(self.field, self.rows, &[self, &other.neg()]);
        let k = stacked.kernel_basis();
        let coeffs = k.block(0, self.cols, 0, k.cols());
        self.mul(&coeffs).image_basis()
    }

    /// Basis of the sum of two column spans.
    pub fn span_sum(&self, other: &Mat) -> Mat {
        Mat::hstack(self.field, self.rows, &[self, other]).image_basis()
    }

    /// Column-major flattening, used to vectorize linear conditions on matrices.
    pub fn vectorize(&self) -> Vec<Scalar> {
        self.transpose().entries()
    }

    /// Adds `coef * other` into `self`.
    pub fn axpy(&mut self, coef: &Scalar, other: &Mat) {
        self.check_field(other);
        assert_eq!(self.shape(), other.shape(), "shape mismatch in axpy");
        match (&mut self.data, &other.data, self.field) {
            (Data::Fp(d), Data::Fp(s), Field::Prime(p)) => {
                let a = FpA(p);
                let c = a.from_scalar(coef);
                if c == 0 {
                    return;
                }
                for (x, y) in d.iter_mut().zip(s) {
                    *x = ((*x as u64 + c as u64 * *y as u64) % p as u64) as u32;
                }
            }
            (Data::Q(d), Data::Q(s), Field::Rational) => {
                let c = coef.to_rational();
                for (x, y) in d.iter_mut().zip(s) {
                    *x += &c * y;
                }
            }
            _ => unreachable!("storage does not match field"),
        }
    }
}

pub(crate) fn neg_scalar(field: Field, s: &Scalar) -> Scalar {
    field.neg(s)
}

impl Field {
    pub fn add(&self, x: &Scalar, y: &Scalar) -> Scalar {
        dispatch!(*self, a => a.to_scalar(&a.add(&a.from_scalar(x), &a.from_scalar(y))))
    }

    pub fn sub(&self, x: &Scalar, y: &Scalar) -> Scalar {
        dispatch!(*self, a => a.to_scalar(&a.sub(&a.from_scalar(x), &a.from_scalar(y))))
    }

    pub fn mul(&self, x: &Scalar, y: &Scalar) -> Scalar {
        dispatch!(*self, a => a.to_scalar(&a.mul(&a.from_scalar(x), &a.from_scalar(y))))
    }

    pub fn neg(&self, x: &Scalar) -> Scalar {
        dispatch!(*self, a => a.to_scalar(&a.neg(&a.from_scalar(x))))
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(&self, x: &Scalar) -> Option<Scalar> {
        if x.is_zero() {
            return None;
        }
        Some(dispatch!(*self, a => a.to_scalar(&a.inv(&a.from_scalar(x)))))
    }
}

impl fmt::Debug for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Mat[{}x{} {}]", self.rows, self.cols, self.field)?;
        write!(f, "{self}")
    }
}

impl fmt::Display for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, "; ")?;
            }
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{}", self.get(i, j))?;
            }
        }
        write!(f, "]")
    }
}
