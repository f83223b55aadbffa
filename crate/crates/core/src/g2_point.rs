//! Pointwise G2 algebra on a single 7-dimensional vector space.
//!
//! For a 3-form φ the symmetric bilinear form
//! `B(u, v) = [(u ⌟ φ) ∧ (v ⌟ φ) ∧ φ] / e^{1…7}` is positive-definite exactly
//! when φ is a G2 3-form compatible with the standard orientation. With the
//! normalisation `B/6 = √det(g) · g` the reference form [`reference_phi`]
//! induces the Euclidean metric.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exterior7::{
    hodge_star, hodge_star_with_gram, interior, wedge, wedge_top, Form, Matrix7, Metric7,
    Vector7, BINOM7, DIM,
};

/// φ₀ = e^{123} + e^{145} + e^{167} + e^{246} − e^{257} − e^{347} − e^{356}.
pub fn reference_phi() -> Form {
    const TERMS: [([usize; 3], f64); 7] = [
        ([1, 2, 3], 1.0),
        ([1, 4, 5], 1.0),
        ([1, 6, 7], 1.0),
        ([2, 4, 6], 1.0),
        ([2, 5, 7], -1.0),
        ([3, 4, 7], -1.0),
        ([3, 5, 6], -1.0),
    ];
    let mut phi = Form::zero(3);
    for (idx, sign) in TERMS {
        let m = Form::monomial(&[idx[0] - 1, idx[1] - 1, idx[2] - 1]);
        phi = phi.add_scaled(sign, &m);
    }
    phi
}

/// The bilinear form B(u, v) in the standard basis.
pub fn bilinear_b(phi: &Form) -> Result<Matrix7> {
    if phi.degree() != 3 {
        return Err(Error::DegreeMismatch {
            expected: 3,
            found: phi.degree(),
        });
    }
    let contractions: Vec<Form> = (0..DIM)
        .map(|i| interior(&Vector7::unit(i), phi))
        .collect::<Result<_>>()?;
    let mut b = Matrix7::zeros();
    for i in 0..DIM {
        for j in i..DIM {
            let w = wedge(&contractions[i], &contractions[j])?;
            let v = wedge_top(&w, phi)?;
            b[(i, j)] = v;
            b[(j, i)] = v;
        }
    }
    Ok(b)
}

/// On success returns log det(B/6).
fn min_eigen_check(b: &Matrix7) -> std::result::Result<f64, f64> {
    let eig = SymmetricEigen::new(*b);
    let min = eig.eigenvalues.min();
    if min > 1e-10 * b.norm() {
        Ok(eig.eigenvalues.iter().map(|l| (l / 6.0).ln()).sum())
    } else {
        Err(min)
    }
}

pub fn is_positive(phi: &Form) -> Result<bool> {
    let b = bilinear_b(phi)?;
    Ok(min_eigen_check(&b).is_ok())
}

/// Returns `(g_φ, density)` with Vol_φ = density · e^{1…7}.
pub fn metric_and_density(phi: &Form) -> Result<(Metric7, f64)> {
    let b = bilinear_b(phi)?;
    let log_det =
        min_eigen_check(&b).map_err(|min_eigenvalue| Error::NotPositive { min_eigenvalue })?;
    // det(B/6) = density⁹, computed in log space to survive tiny scales
    let density = (log_det / 9.0).exp();
    let metric = Metric7::symmetrized(&(b / (6.0 * density)))?;
    Ok((metric, density))
}

/// Volume density alone; same checks as [`metric_and_density`].
pub fn density(phi: &Form) -> Result<f64> {
    let b = bilinear_b(phi)?;
    let log_det =
        min_eigen_check(&b).map_err(|min_eigenvalue| Error::NotPositive { min_eigenvalue })?;
    Ok((log_det / 9.0).exp())
}

pub fn theta(phi: &Form) -> Result<Form> {
    let (g, _) = metric_and_density(phi)?;
    hodge_star(phi, &g)
}

/// A positive 3-form with its induced metric, volume density and dual 4-form.
#[derive(Debug, Clone, Serialize)]
pub struct G2PointData {
    pub phi: Form,
    pub metric: Metric7,
    pub density: f64,
    pub theta: Form,
    #[serde(skip)]
    gram3: DMatrix<f64>,
}

impl G2PointData {
    pub fn new(phi: Form) -> Result<Self> {
        let (metric, density) = metric_and_density(&phi)?;
        let gram3 = metric.form_gram(3)?;
        let theta = hodge_star_with_gram(&phi, &gram3, density);
        Ok(G2PointData {
            phi,
            metric,
            density,
            theta,
            gram3,
        })
    }

    /// Λ³ Gram matrix of g_φ.
    pub fn gram3(&self) -> &DMatrix<f64> {
        &self.gram3
    }

    /// g_φ inner product of two 3-forms.
    pub fn inner3(&self, a: &Form, b: &Form) -> f64 {
        a.as_dvector().dot(&(&self.gram3 * b.as_dvector()))
    }

    /// Hodge star of g_φ on 3-forms.
    pub fn star3(&self, b: &Form) -> Form {
        hodge_star_with_gram(b, &self.gram3, self.density)
    }

    /// The seven forms e_i ⌟ Θ(φ), spanning the type-7 subspace.
    pub fn type7_basis(&self) -> Vec<Form> {
        (0..DIM)
            .map(|i| interior(&Vector7::unit(i), &self.theta).expect("degree 4"))
            .collect()
    }

    /// Θ(φ) evaluated on four vectors.
    pub fn theta_on(&self, frame: &[Vector7; 4]) -> f64 {
        self.theta.evaluate(frame).expect("four vectors")
    }
}

/// Orthogonal splitting of a 3-form into G2 types 1, 7 and 27.
#[derive(Debug, Clone, Serialize)]
pub struct TypeSplit {
    pub pi1: Form,
    pub pi7: Form,
    pub pi27: Form,
}

impl TypeSplit {
    pub fn sum(&self) -> Form {
        &(&self.pi1 + &self.pi7) + &self.pi27
    }
}

pub fn type_decompose(eta: &Form, at: &G2PointData) -> Result<TypeSplit> {
    if eta.degree() != 3 {
        return Err(Error::DegreeMismatch {
            expected: 3,
            found: eta.degree(),
        });
    }
    let gram = at.gram3();
    let phi_norm2 = at.inner3(&at.phi, &at.phi);
    let pi1 = at.phi.scaled(at.inner3(eta, &at.phi) / phi_norm2);

    let n = BINOM7[3];
    let basis = at.type7_basis();
    let v = DMatrix::from_fn(n, DIM, |r, c| basis[c].coefficients()[r]);
    let gv = gram * &v;
    let normal = v.transpose() * &gv;
    let rhs = gv.transpose() * eta.as_dvector();
    let x = normal
        .cholesky()
        .ok_or(Error::Singular { condition: f64::INFINITY })?
        .solve(&rhs);
    let pi7 = Form::from_dvector(3, &(v * x));
    let pi27 = &(eta - &pi1) - &pi7;
    Ok(TypeSplit { pi1, pi7, pi27 })
}

/// Linearisation of φ ↦ Θ(φ) at `at` in direction `eta`:
/// (4/3)⋆π₁η + ⋆π₇η − ⋆π₂₇η.
pub fn d_theta(at: &G2PointData, eta: &Form) -> Result<Form> {
    let split = type_decompose(eta, at)?;
    let combined = split
        .pi1
        .scaled(4.0 / 3.0)
        .add_scaled(1.0, &split.pi7)
        .add_scaled(-1.0, &split.pi27);
    Ok(at.star3(&combined))
}

/// Gram–Schmidt in the metric `g`; `None` if the vectors are dependent.
pub fn orthonormalize(g: &Metric7, vectors: &[Vector7]) -> Option<Vec<Vector7>> {
    let mut out: Vec<Vector7> = Vec::with_capacity(vectors.len());
    for v in vectors {
        let mut w = v.as_svector();
        for q in &out {
            let qs = q.as_svector();
            let c = g.apply(&Vector7::from(w), q);
            w -= qs * c;
        }
        let norm2 = g.apply(&Vector7::from(w), &Vector7::from(w));
        if !(norm2 > 1e-24) {
            return None;
        }
        out.push(Vector7::from(w / norm2.sqrt()));
    }
    Some(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct ComassReport {
    pub seed: u64,
    pub trials: usize,
    pub max_value: f64,
}

/// Largest value of Θ(φ) over `trials` random g_φ-orthonormal 4-frames.
pub fn comass_sample(at: &G2PointData, trials: usize, seed: u64) -> Result<ComassReport> {
    if trials == 0 {
        return Err(Error::invalid("trials", "must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = f64::NEG_INFINITY;
    let mut done = 0;
    while done < trials {
        let raw: Vec<Vector7> = (0..4)
            .map(|_| Vector7(std::array::from_fn(|_| rng.random_range(-1.0..1.0))))
            .collect();
        let Some(frame) = orthonormalize(&at.metric, &raw) else {
            continue;
        };
        let frame: [Vector7; 4] = [frame[0], frame[1], frame[2], frame[3]];
        best = best.max(at.theta_on(&frame));
        done += 1;
    }
    Ok(ComassReport {
        seed,
        trials,
        max_value: best,
    })
}
