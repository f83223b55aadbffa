//! Flat 7-torus testbed: the potential F = −3 log Vol, its differential and
//! Hessian in the 35 constant-coefficient coordinates, and the
//! volume-normalised L² pairing.
//!
//! For a constant 3-form on ℝ⁷/Λ every integral ∫ α over the torus is the
//! covolume of Λ times the e^{1…7}-coefficient of α.

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exterior7::{wedge_top, Form, Matrix7, Vector7, BINOM7, DIM};
use crate::g2_point::{self, d_theta, G2PointData};

const NCOORD: usize = BINOM7[3];

#[derive(Debug, Clone, PartialEq)]
pub struct Lattice {
    basis: Matrix7,
    covolume: f64,
}

impl Lattice {
    /// Columns of `basis` span the lattice.
    pub fn new(basis: Matrix7) -> Result<Self> {
        if basis.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("lattice basis"));
        }
        let covolume = basis.determinant().abs();
        if !(covolume > 0.0) {
            return Err(Error::invalid("lattice_basis", "determinant must be nonzero"));
        }
        Ok(Lattice { basis, covolume })
    }

    pub fn unit() -> Self {
        Lattice {
            basis: Matrix7::identity(),
            covolume: 1.0,
        }
    }

    pub fn scaled_unit(s: f64) -> Result<Self> {
        Lattice::new(Matrix7::identity() * s)
    }

    pub fn from_row_major(values: &[f64]) -> Result<Self> {
        if values.len() != DIM * DIM {
            return Err(Error::invalid(
                "lattice_basis",
                format!("expected {} row-major entries, got {}", DIM * DIM, values.len()),
            ));
        }
        Lattice::new(Matrix7::from_row_slice(values))
    }

    pub fn row_major(&self) -> Vec<f64> {
        (0..DIM)
            .flat_map(|i| (0..DIM).map(move |j| (i, j)))
            .map(|(i, j)| self.basis[(i, j)])
            .collect()
    }

    pub fn basis(&self) -> &Matrix7 {
        &self.basis
    }

    pub fn covolume(&self) -> f64 {
        self.covolume
    }

    /// The lattice vector Σ nᵢ bᵢ.
    pub fn vector(&self, coeffs: &[i64; DIM]) -> Vector7 {
        let n = nalgebra::SVector::<f64, DIM>::from_fn(|i, _| coeffs[i] as f64);
        Vector7::from(self.basis * n)
    }
}

impl Serialize for Lattice {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.row_major().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Lattice {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<f64>::deserialize(d)?;
        Lattice::from_row_major(&v).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct PointRepr {
    lattice_basis: Lattice,
    phi: Form,
}

/// A lattice together with a constant positive 3-form.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "PointRepr", into = "PointRepr")]
pub struct TorusModuliPoint {
    lattice: Lattice,
    data: G2PointData,
}

impl TryFrom<PointRepr> for TorusModuliPoint {
    type Error = Error;
    fn try_from(r: PointRepr) -> Result<Self> {
        TorusModuliPoint::new(r.lattice_basis, r.phi)
    }
}

impl From<TorusModuliPoint> for PointRepr {
    fn from(p: TorusModuliPoint) -> Self {
        PointRepr {
            lattice_basis: p.lattice,
            phi: p.data.phi,
        }
    }
}

fn require_degree3(eta: &Form) -> Result<()> {
    if eta.degree() == 3 {
        Ok(())
    } else {
        Err(Error::DegreeMismatch {
            expected: 3,
            found: eta.degree(),
        })
    }
}

impl TorusModuliPoint {
    pub fn new(lattice: Lattice, phi: Form) -> Result<Self> {
        require_degree3(&phi)?;
        let data = G2PointData::new(phi)?;
        Ok(TorusModuliPoint { lattice, data })
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn phi(&self) -> &Form {
        &self.data.phi
    }

    pub fn data(&self) -> &G2PointData {
        &self.data
    }

    pub fn with_phi(&self, phi: Form) -> Result<Self> {
        TorusModuliPoint::new(self.lattice.clone(), phi)
    }

    /// ∫ over the torus of a constant 7-form.
    pub fn integrate_top(&self, top_coefficient: f64) -> f64 {
        self.lattice.covolume * top_coefficient
    }

    pub fn total_volume(&self) -> f64 {
        self.lattice.covolume * self.data.density
    }

    pub fn potential_f(&self) -> f64 {
        -3.0 * self.total_volume().ln()
    }

    /// ∫ η ∧ Θ(φ) over the torus.
    pub fn pairing_with_theta(&self, eta: &Form) -> Result<f64> {
        require_degree3(eta)?;
        Ok(self.integrate_top(wedge_top(eta, &self.data.theta)?))
    }

    /// dF(η) = −(1/Vol) ∫ η ∧ Θ(φ).
    pub fn d_f(&self, eta: &Form) -> Result<f64> {
        Ok(-self.pairing_with_theta(eta)? / self.total_volume())
    }

    /// Second derivative of F in the constant-coefficient coordinates,
    /// D²F(η, η′) = (1/(3Vol²)) ∫η∧Θ ∫η′∧Θ − (1/Vol) ∫ η ∧ dΘ(η′).
    pub fn hessian_form(&self, eta: &Form, eta2: &Form) -> Result<f64> {
        require_degree3(eta)?;
        let vol = self.total_volume();
        let lin = d_theta(&self.data, eta2)?;
        let a = self.pairing_with_theta(eta)?;
        let b = self.pairing_with_theta(eta2)?;
        Ok(a * b / (3.0 * vol * vol) - self.integrate_top(wedge_top(eta, &lin)?) / vol)
    }

    /// (1/Vol) ∫ η ∧ ⋆η′, with the Hodge star of g_φ.
    pub fn l2_pairing(&self, eta: &Form, eta2: &Form) -> Result<f64> {
        require_degree3(eta)?;
        require_degree3(eta2)?;
        let star = self.data.star3(eta2);
        Ok(self.integrate_top(wedge_top(eta, &star)?) / self.total_volume())
    }

    /// Closed-form 35×35 Hessian matrix from the linearised dual 4-form.
    pub fn hessian_closed_form(&self) -> Result<DMatrix<f64>> {
        let vol = self.total_volume();
        let basis: Vec<Form> = (0..NCOORD).map(unit_form).collect();
        let theta_pairs: Vec<f64> = basis
            .iter()
            .map(|e| self.pairing_with_theta(e))
            .collect::<Result<_>>()?;
        let lin: Vec<Form> = basis
            .iter()
            .map(|e| d_theta(&self.data, e))
            .collect::<Result<_>>()?;
        let mut h = DMatrix::zeros(NCOORD, NCOORD);
        for i in 0..NCOORD {
            for j in 0..NCOORD {
                let second = self.integrate_top(wedge_top(&basis[i], &lin[j])?);
                h[(i, j)] = theta_pairs[i] * theta_pairs[j] / (3.0 * vol * vol) - second / vol;
            }
        }
        Ok(symmetrize(&h))
    }

    /// Matrix of the L² pairing in the coefficient coordinates.
    pub fn l2_matrix(&self) -> Result<DMatrix<f64>> {
        // (1/Vol)·covol·⟨η,η′⟩_g·density = ⟨η,η′⟩_g
        Ok(self.data.gram3().clone())
    }
}

/// The unit coefficient form with a single nonzero entry at `rank`.
pub fn unit_form(rank: usize) -> Form {
    let mut f = Form::zero(3);
    f.coefficients_mut()[rank] = 1.0;
    f
}

fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

fn potential_at(lattice: &Lattice, phi: &Form) -> Result<f64> {
    Ok(-3.0 * (lattice.covolume * g2_point::density(phi)?).ln())
}

/// Finite-difference settings for [`hessian_f`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct FdConfig {
    /// Absolute step; `None` selects 1e−4·(1 + ‖φ‖).
    pub step: Option<f64>,
}

impl FdConfig {
    pub fn step_for(&self, phi: &Form) -> f64 {
        self.step
            .unwrap_or_else(|| 1e-4 * (1.0 + phi.coefficient_norm()))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct HessianReport {
    pub matrix: Vec<Vec<f64>>,
    /// Eigenvalues in ascending order.
    pub eigenvalues: Vec<f64>,
    /// (positive, negative, zero) counts.
    pub signature: [usize; 3],
    pub zero_tolerance: f64,
    pub fd_step: f64,
    /// ‖H_fd − H_closed‖ / ‖H_closed‖ (Frobenius).
    pub closed_form_rel_residual: f64,
    /// Sine of the largest principal angle between the negative eigenspace
    /// (relative to the L² pairing) and the type-7 subspace; `None` when the
    /// negative index is not 7.
    pub type7_angle: Option<f64>,
}

impl HessianReport {
    pub fn matrix_dmatrix(&self) -> DMatrix<f64> {
        let n = self.matrix.len();
        DMatrix::from_fn(n, n, |i, j| self.matrix[i][j])
    }
}

/// Central second differences with one Richardson level.
pub fn hessian_fd(pt: &TorusModuliPoint, step: f64) -> Result<DMatrix<f64>> {
    let f0 = pt.potential_f();
    let roundoff = 16.0 * f64::EPSILON * (1.0 + f0.abs()) / (step * step);
    let scale = 1.0 + pt.phi().coefficient_norm();
    if !(step > 0.0) || roundoff > 1e-6 / (scale * scale) {
        return Err(Error::Conditioning { step });
    }
    let lattice = pt.lattice();
    let phi = pt.phi();
    let eval = |di: (usize, f64), dj: (usize, f64)| -> Result<f64> {
        let mut p = phi.clone();
        p.coefficients_mut()[di.0] += di.1;
        p.coefficients_mut()[dj.0] += dj.1;
        potential_at(lattice, &p)
    };
    let second = |i: usize, j: usize, h: f64| -> Result<f64> {
        if i == j {
            let plus = eval((i, h), (i, 0.0))?;
            let minus = eval((i, -h), (i, 0.0))?;
            Ok((plus - 2.0 * f0 + minus) / (h * h))
        } else {
            let pp = eval((i, h), (j, h))?;
            let pm = eval((i, h), (j, -h))?;
            let mp = eval((i, -h), (j, h))?;
            let mm = eval((i, -h), (j, -h))?;
            Ok((pp - pm - mp + mm) / (4.0 * h * h))
        }
    };
    let pairs: Vec<(usize, usize)> = (0..NCOORD)
        .flat_map(|i| (i..NCOORD).map(move |j| (i, j)))
        .collect();
    let values: Vec<f64> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let coarse = second(i, j, step)?;
            let fine = second(i, j, 0.5 * step)?;
            Ok((4.0 * fine - coarse) / 3.0)
        })
        .collect::<Result<_>>()?;
    let mut h = DMatrix::zeros(NCOORD, NCOORD);
    for (&(i, j), v) in pairs.iter().zip(values) {
        h[(i, j)] = v;
        h[(j, i)] = v;
    }
    Ok(h)
}

/// Sine of the largest principal angle between the column spans of `a` and `b`.
pub fn subspace_angle(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let qa = a.clone().qr().q();
    let qb = b.clone().qr().q();
    let residual = &qa - &qb * (qb.transpose() * &qa);
    residual.singular_values().max()
}

/// Hessian of F at `pt` by finite differences, cross-checked against the
/// closed form and with its signature.
pub fn hessian_f(pt: &TorusModuliPoint, fd: &FdConfig) -> Result<HessianReport> {
    let step = fd.step_for(pt.phi());
    let h = hessian_fd(pt, step)?;
    let closed = pt.hessian_closed_form()?;
    let closed_form_rel_residual = (&h - &closed).norm() / closed.norm();

    let eig = SymmetricEigen::new(h.clone());
    let mut eigenvalues: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    eigenvalues.sort_by(f64::total_cmp);
    let spectral = eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let zero_tolerance = 1e-7 * spectral;
    let mut signature = [0usize; 3];
    for &v in &eigenvalues {
        if v > zero_tolerance {
            signature[0] += 1;
        } else if v < -zero_tolerance {
            signature[1] += 1;
        } else {
            signature[2] += 1;
        }
    }

    let type7_angle = if signature[1] == 7 {
        let neg = negative_eigenspace(&h, &pt.l2_matrix()?)?;
        let basis = pt.data().type7_basis();
        let t7 = DMatrix::from_fn(NCOORD, DIM, |r, c| basis[c].coefficients()[r]);
        Some(subspace_angle(&neg, &t7))
    } else {
        None
    };

    Ok(HessianReport {
        matrix: (0..NCOORD)
            .map(|i| (0..NCOORD).map(|j| h[(i, j)]).collect())
            .collect(),
        eigenvalues,
        signature,
        zero_tolerance,
        fd_step: step,
        closed_form_rel_residual,
        type7_angle,
    })
}

/// Columns spanning the negative eigenspace of `h` relative to the inner
/// product `gram` (generalised eigenproblem h v = λ gram v).
pub fn negative_eigenspace(h: &DMatrix<f64>, gram: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let chol = gram
        .clone()
        .cholesky()
        .ok_or(Error::Singular { condition: f64::INFINITY })?;
    let l = chol.l();
    let linv = l
        .clone()
        .try_inverse()
        .ok_or(Error::Singular { condition: f64::INFINITY })?;
    let c = &linv * h * linv.transpose();
    let eig = SymmetricEigen::new(symmetrize(&c));
    let cols: Vec<usize> = (0..eig.eigenvalues.len())
        .filter(|&k| eig.eigenvalues[k] < 0.0)
        .collect();
    let y = DMatrix::from_fn(h.nrows(), cols.len(), |r, c| eig.eigenvectors[(r, cols[c])]);
    Ok(linv.transpose() * y)
}
