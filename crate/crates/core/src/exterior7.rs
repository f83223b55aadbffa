//! Exterior algebra of an oriented 7-dimensional real vector space.
//!
//! A [`Form`] of degree `k` stores one coefficient per strictly increasing
//! index tuple `i₁ < … < i_k` (indices are 0-based, so the tuple `[0, 1, 2]`
//! is the monomial usually written e^{123}). Tuples are ordered
//! lexicographically, which for a fixed degree coincides with the order of
//! [`basis_tuples`]. The orientation is fixed once and for all: e^{1…7} is
//! positive.

use std::ops::{Add, AddAssign, Index, Mul, Neg, Sub};
use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector, SMatrix, SVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DIM: usize = 7;

pub type Matrix7 = SMatrix<f64, DIM, DIM>;

/// Binomial coefficients C(7, k).
pub const BINOM7: [usize; DIM + 1] = [1, 7, 21, 35, 35, 21, 7, 1];

struct DegreeTable {
    tuples: Vec<Vec<usize>>,
    masks: Vec<u8>,
}

struct Tables {
    degrees: Vec<DegreeTable>,
    rank_of_mask: [usize; 128],
    /// `wedge[p][q]` lists `(i, j, k, sign)` with e^I ∧ e^J = sign · e^K.
    wedge: Vec<Vec<Vec<(usize, usize, usize, f64)>>>,
    /// `interior[k]` lists `(src, slot, dst, sign)` with
    /// e_slot ⌟ e^src = sign · e^dst.
    interior: Vec<Vec<(usize, usize, usize, f64)>>,
    /// Inverse of the wedge pairing Λ^k × Λ^{7-k} → ℝ, used by the Hodge star.
    pairing_inverse: Vec<DMatrix<f64>>,
}

fn merge_sign(a: u8, b: u8) -> f64 {
    // number of pairs (x ∈ a, y ∈ b) with x > y
    let mut inversions = 0u32;
    for y in 0..DIM {
        if b & (1 << y) != 0 {
            inversions += (a >> (y + 1)).count_ones();
        }
    }
    if inversions.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

fn tables() -> &'static Tables {
    static TABLES: OnceLock<Tables> = OnceLock::new();
    TABLES.get_or_init(|| {
        let mut degrees: Vec<DegreeTable> = (0..=DIM)
            .map(|_| DegreeTable {
                tuples: Vec::new(),
                masks: Vec::new(),
            })
            .collect();
        let mut rank_of_mask = [usize::MAX; 128];
        // Enumerate masks per degree in lexicographic tuple order.
        let mut all: Vec<Vec<usize>> = (0u8..128)
            .map(|m| (0..DIM).filter(|i| m & (1 << i) != 0).collect())
            .collect();
        all.sort();
        for tuple in all {
            let mask = tuple.iter().fold(0u8, |m, &i| m | (1 << i));
            let table = &mut degrees[tuple.len()];
            rank_of_mask[mask as usize] = table.tuples.len();
            table.tuples.push(tuple);
            table.masks.push(mask);
        }

        let mut wedge = vec![vec![Vec::new(); DIM + 1]; DIM + 1];
        for p in 0..=DIM {
            for q in 0..=DIM - p {
                let mut entries = Vec::new();
                for (i, &a) in degrees[p].masks.iter().enumerate() {
                    for (j, &b) in degrees[q].masks.iter().enumerate() {
                        if a & b == 0 {
                            let k = rank_of_mask[(a | b) as usize];
                            entries.push((i, j, k, merge_sign(a, b)));
                        }
                    }
                }
                wedge[p][q] = entries;
            }
        }

        let mut interior = vec![Vec::new(); DIM + 1];
        for k in 1..=DIM {
            for (src, tuple) in degrees[k].tuples.iter().enumerate() {
                for (pos, &slot) in tuple.iter().enumerate() {
                    let dst_mask = degrees[k].masks[src] & !(1 << slot);
                    let sign = if pos % 2 == 0 { 1.0 } else { -1.0 };
                    interior[k].push((src, slot, rank_of_mask[dst_mask as usize], sign));
                }
            }
        }

        let pairing_inverse = (0..=DIM)
            .map(|k| {
                let n = BINOM7[k];
                let mut w = DMatrix::<f64>::zeros(n, n);
                for &(i, j, _, sign) in &wedge[k][DIM - k] {
                    w[(i, j)] = sign;
                }
                w.try_inverse().expect("wedge pairing is a signed permutation")
            })
            .collect();

        Tables {
            degrees,
            rank_of_mask,
            wedge,
            interior,
            pairing_inverse,
        }
    })
}

/// Increasing index tuples of degree `k` in coefficient order.
pub fn basis_tuples(k: usize) -> &'static [Vec<usize>] {
    &tables().degrees[k].tuples
}

/// Lexicographic rank of an increasing index tuple.
pub fn tuple_rank(tuple: &[usize]) -> Option<usize> {
    let mut mask = 0u8;
    for w in tuple.windows(2) {
        if w[0] >= w[1] {
            return None;
        }
    }
    for &i in tuple {
        if i >= DIM {
            return None;
        }
        mask |= 1 << i;
    }
    Some(tables().rank_of_mask[mask as usize])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Vector7(pub [f64; DIM]);

impl Vector7 {
    pub fn unit(i: usize) -> Self {
        let mut c = [0.0; DIM];
        c[i] = 1.0;
        Vector7(c)
    }

    pub fn as_svector(&self) -> SVector<f64, DIM> {
        SVector::from(self.0)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }
}

impl From<SVector<f64, DIM>> for Vector7 {
    fn from(v: SVector<f64, DIM>) -> Self {
        Vector7(v.into())
    }
}

impl Index<usize> for Vector7 {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct FormRepr {
    degree: usize,
    coefficients: Vec<f64>,
}

/// A degree-k exterior form with dense lexicographic coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FormRepr", into = "FormRepr")]
pub struct Form {
    degree: usize,
    coeffs: Vec<f64>,
}

impl TryFrom<FormRepr> for Form {
    type Error = Error;
    fn try_from(r: FormRepr) -> Result<Self> {
        Form::new(r.degree, r.coefficients)
    }
}

impl From<Form> for FormRepr {
    fn from(f: Form) -> Self {
        FormRepr {
            degree: f.degree,
            coefficients: f.coeffs,
        }
    }
}

impl Form {
    pub fn new(degree: usize, coeffs: Vec<f64>) -> Result<Self> {
        if degree > DIM {
            return Err(Error::InvalidDegree(degree));
        }
        if coeffs.len() != BINOM7[degree] {
            return Err(Error::CoefficientCount {
                degree,
                expected: BINOM7[degree],
                found: coeffs.len(),
            });
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("form coefficients"));
        }
        Ok(Form { degree, coeffs })
    }

    pub fn zero(degree: usize) -> Self {
        assert!(degree <= DIM, "degree {degree} out of range");
        Form {
            degree,
            coeffs: vec![0.0; BINOM7[degree]],
        }
    }

    pub fn scalar(value: f64) -> Self {
        Form {
            degree: 0,
            coeffs: vec![value],
        }
    }

    /// The monomial e^{i₁…i_k} for 0-based indices in any order; the sign of
    /// the sorting permutation is applied.
    pub fn monomial(indices: &[usize]) -> Self {
        let mut f = Form::zero(indices.len());
        let mut sorted = indices.to_vec();
        let mut sign = 1.0;
        // bubble sort keeps track of transpositions
        for i in 0..sorted.len() {
            for j in 0..sorted.len() - 1 - i {
                if sorted[j] > sorted[j + 1] {
                    sorted.swap(j, j + 1);
                    sign = -sign;
                } else if sorted[j] == sorted[j + 1] {
                    return f;
                }
            }
        }
        let rank = tuple_rank(&sorted).expect("index out of range");
        f.coeffs[rank] = sign;
        f
    }

    /// The volume monomial e^{1…7}.
    pub fn volume_form() -> Self {
        Form {
            degree: DIM,
            coeffs: vec![1.0],
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coefficients_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn coefficient(&self, tuple: &[usize]) -> f64 {
        tuple_rank(tuple)
            .filter(|_| tuple.len() == self.degree)
            .map_or(0.0, |r| self.coeffs[r])
    }

    /// Coefficient of e^{1…7} of a top-degree form.
    pub fn top(&self) -> f64 {
        debug_assert_eq!(self.degree, DIM);
        self.coeffs[0]
    }

    pub fn as_dvector(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.coeffs)
    }

    pub fn from_dvector(degree: usize, v: &DVector<f64>) -> Self {
        assert_eq!(v.len(), BINOM7[degree]);
        Form {
            degree,
            coeffs: v.iter().copied().collect(),
        }
    }

    /// Euclidean norm of the coefficient vector.
    pub fn coefficient_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Form {
            degree: self.degree,
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    /// `self + s·other`.
    pub fn add_scaled(&self, s: f64, other: &Form) -> Self {
        assert_eq!(self.degree, other.degree, "degree mismatch in sum");
        Form {
            degree: self.degree,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + s * b)
                .collect(),
        }
    }

    pub fn max_abs_diff(&self, other: &Form) -> f64 {
        assert_eq!(self.degree, other.degree);
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Evaluate the form on `degree` vectors: Σ_I c_I · det(V restricted to rows I).
    pub fn evaluate(&self, vectors: &[Vector7]) -> Result<f64> {
        if vectors.len() != self.degree {
            return Err(Error::DegreeMismatch {
                expected: self.degree,
                found: vectors.len(),
            });
        }
        let k = self.degree;
        let mut total = 0.0;
        for (tuple, c) in basis_tuples(k).iter().zip(&self.coeffs) {
            if *c == 0.0 {
                continue;
            }
            let minor = DMatrix::from_fn(k, k, |r, s| vectors[s][tuple[r]]);
            total += c * minor.determinant();
        }
        Ok(total)
    }
}

impl Add for &Form {
    type Output = Form;
    fn add(self, rhs: &Form) -> Form {
        self.add_scaled(1.0, rhs)
    }
}

impl Add for Form {
    type Output = Form;
    fn add(self, rhs: Form) -> Form {
        &self + &rhs
    }
}

impl AddAssign<&Form> for Form {
    fn add_assign(&mut self, rhs: &Form) {
        assert_eq!(self.degree, rhs.degree, "degree mismatch in sum");
        for (a, b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            *a += b;
        }
    }
}

impl Sub for &Form {
    type Output = Form;
    fn sub(self, rhs: &Form) -> Form {
        self.add_scaled(-1.0, rhs)
    }
}

impl Sub for Form {
    type Output = Form;
    fn sub(self, rhs: Form) -> Form {
        &self - &rhs
    }
}

impl Neg for &Form {
    type Output = Form;
    fn neg(self) -> Form {
        self.scaled(-1.0)
    }
}

impl Neg for Form {
    type Output = Form;
    fn neg(self) -> Form {
        self.scaled(-1.0)
    }
}

impl Mul<&Form> for f64 {
    type Output = Form;
    fn mul(self, rhs: &Form) -> Form {
        rhs.scaled(self)
    }
}

impl Mul<Form> for f64 {
    type Output = Form;
    fn mul(self, rhs: Form) -> Form {
        rhs.scaled(self)
    }
}

pub fn wedge(a: &Form, b: &Form) -> Result<Form> {
    let (p, q) = (a.degree, b.degree);
    if p + q > DIM {
        return Err(Error::DegreeOverflow { lhs: p, rhs: q });
    }
    let mut out = Form::zero(p + q);
    for &(i, j, k, sign) in &tables().wedge[p][q] {
        let (x, y) = (a.coeffs[i], b.coeffs[j]);
        if x != 0.0 && y != 0.0 {
            out.coeffs[k] += sign * x * y;
        }
    }
    Ok(out)
}

/// Top coefficient of `a ∧ b` for complementary degrees, without building the
/// intermediate form.
pub fn wedge_top(a: &Form, b: &Form) -> Result<f64> {
    if a.degree + b.degree != DIM {
        return Err(Error::DegreeMismatch {
            expected: DIM - a.degree,
            found: b.degree,
        });
    }
    Ok(tables().wedge[a.degree][b.degree]
        .iter()
        .map(|&(i, j, _, sign)| sign * a.coeffs[i] * b.coeffs[j])
        .sum())
}

pub fn interior(u: &Vector7, a: &Form) -> Result<Form> {
    if a.degree == 0 {
        return Err(Error::InvalidDegree(0));
    }
    let mut out = Form::zero(a.degree - 1);
    for &(src, slot, dst, sign) in &tables().interior[a.degree] {
        out.coeffs[dst] += sign * u.0[slot] * a.coeffs[src];
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metric7 {
    entries: Matrix7,
}

impl Serialize for Metric7 {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.row_major().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Metric7 {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<f64>::deserialize(d)?;
        Metric7::from_row_major(&v).map_err(serde::de::Error::custom)
    }
}

impl Metric7 {
    /// Wraps a matrix, requiring exact symmetry and finite entries.
    pub fn new(entries: Matrix7) -> Result<Self> {
        if entries.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("metric entries"));
        }
        for i in 0..DIM {
            for j in 0..i {
                if entries[(i, j)] != entries[(j, i)] {
                    return Err(Error::InvalidMetric(format!(
                        "entries ({i},{j}) and ({j},{i}) differ"
                    )));
                }
            }
        }
        Ok(Metric7 { entries })
    }

    /// Symmetrises `(m + mᵀ)/2` before wrapping.
    pub fn symmetrized(m: &Matrix7) -> Result<Self> {
        Metric7::new((m + m.transpose()) * 0.5)
    }

    pub fn identity() -> Self {
        Metric7 {
            entries: Matrix7::identity(),
        }
    }

    pub fn diagonal(d: [f64; DIM]) -> Result<Self> {
        Metric7::new(Matrix7::from_diagonal(&SVector::from(d)))
    }

    pub fn from_row_major(values: &[f64]) -> Result<Self> {
        if values.len() != DIM * DIM {
            return Err(Error::InvalidMetric(format!(
                "expected {} row-major entries, got {}",
                DIM * DIM,
                values.len()
            )));
        }
        Metric7::new(Matrix7::from_row_slice(values))
    }

    pub fn row_major(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(DIM * DIM);
        for i in 0..DIM {
            for j in 0..DIM {
                out.push(self.entries[(i, j)]);
            }
        }
        out
    }

    pub fn matrix(&self) -> &Matrix7 {
        &self.entries
    }

    pub fn is_positive_definite(&self) -> bool {
        self.entries.cholesky().is_some()
    }

    fn require_positive(&self) -> Result<()> {
        if self.is_positive_definite() {
            Ok(())
        } else {
            Err(Error::InvalidMetric("not positive-definite".into()))
        }
    }

    pub fn determinant(&self) -> f64 {
        self.entries.determinant()
    }

    pub fn apply(&self, u: &Vector7, v: &Vector7) -> f64 {
        u.as_svector().dot(&(self.entries * v.as_svector()))
    }

    /// Gram matrix of the induced inner product on Λ^k in the monomial
    /// basis: ⟨e^I, e^J⟩ = det(g⁻¹[I, J]).
    pub fn form_gram(&self, k: usize) -> Result<DMatrix<f64>> {
        if k > DIM {
            return Err(Error::InvalidDegree(k));
        }
        self.require_positive()?;
        let inv = self
            .entries
            .try_inverse()
            .ok_or_else(|| Error::InvalidMetric("singular".into()))?;
        // Laplace expansion along the first row of g⁻¹[I, J], one degree at
        // a time; e_slot ⌟ e^J = ±e^{J∖slot} supplies the cofactor signs.
        let t = tables();
        let mut gram = DMatrix::<f64>::from_element(1, 1, 1.0);
        for m in 1..=k {
            let n = BINOM7[m];
            let drops = &t.interior[m];
            let mut next = DMatrix::<f64>::zeros(n, n);
            for a in 0..n {
                let (_, first, tail, _) = drops[a * m];
                for b in a..n {
                    let v: f64 = drops[b * m..(b + 1) * m]
                        .iter()
                        .map(|&(_, slot, rest, sign)| sign * inv[(first, slot)] * gram[(tail, rest)])
                        .sum();
                    next[(a, b)] = v;
                    next[(b, a)] = v;
                }
            }
            gram = next;
        }
        Ok(gram)
    }

    /// The Riemannian volume form √det(g) · e^{1…7}.
    pub fn volume_form(&self) -> Result<Form> {
        self.require_positive()?;
        Ok(Form::volume_form().scaled(self.determinant().sqrt()))
    }
}

pub fn inner(a: &Form, b: &Form, g: &Metric7) -> Result<f64> {
    if a.degree != b.degree {
        return Err(Error::DegreeMismatch {
            expected: a.degree,
            found: b.degree,
        });
    }
    let gram = g.form_gram(a.degree)?;
    Ok(a.as_dvector().dot(&(gram * b.as_dvector())))
}

/// Hodge star of `b` with respect to `g` and the standard orientation,
/// obtained by solving a ∧ ⋆b = ⟨a, b⟩ vol_g against every basis form a.
pub fn hodge_star(b: &Form, g: &Metric7) -> Result<Form> {
    let gram = g.form_gram(b.degree)?;
    Ok(hodge_star_with_gram(b, &gram, g.determinant().sqrt()))
}

/// Hodge star from a precomputed Λ^k Gram matrix and √det(g).
pub fn hodge_star_with_gram(b: &Form, gram: &DMatrix<f64>, sqrt_det: f64) -> Form {
    let k = b.degree;
    let rhs = gram * b.as_dvector() * sqrt_det;
    let sol = &tables().pairing_inverse[k] * rhs;
    Form::from_dvector(DIM - k, &sol)
}
