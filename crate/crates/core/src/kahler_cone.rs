//! Toy Kähler cone: volumes from an intersection form, the potential
//! −log Vol, segment energies and the finite/infinite boundary classifier.
//!
//! The cone here is the connected positive-volume component containing a
//! reference class. Along ω_t = α + t·ω the Hessian of −log Vol in the
//! direction ω is `−V″/V + (V′/V)²`, which integrates to
//! `V′(τ)/V(τ) − V′(1)/V(1)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{integrate, segment_breaks, QuadratureSpec};

pub const MAX_RANK: usize = 8;
pub const BOUNDARY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntersectionEntry {
    pub index: Vec<usize>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct IntersectionRepr {
    rank: usize,
    n: usize,
    entries: Vec<IntersectionEntry>,
}

/// Fully symmetric n-linear form on ℝ^r, stored densely.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "IntersectionRepr", into = "IntersectionRepr")]
pub struct IntersectionForm {
    rank: usize,
    n: usize,
    tensor: Vec<f64>,
}

fn permutations(index: &[usize]) -> Vec<Vec<usize>> {
    if index.len() <= 1 {
        return vec![index.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..index.len() {
        let mut rest = index.to_vec();
        let head = rest.remove(i);
        for mut tail in permutations(&rest) {
            tail.insert(0, head);
            if !out.contains(&tail) {
                out.push(tail);
            }
        }
    }
    out
}

impl IntersectionForm {
    /// Each entry sets the coefficient of its index tuple and all of its
    /// permutations; listing two permutations of one tuple is an error.
    pub fn new(rank: usize, n: usize, entries: &[IntersectionEntry]) -> Result<Self> {
        if rank == 0 || rank > MAX_RANK {
            return Err(Error::invalid("rank", "must be between 1 and 8"));
        }
        if !(2..=3).contains(&n) {
            return Err(Error::invalid("n", "must be 2 or 3"));
        }
        let mut tensor = vec![0.0; rank.pow(n as u32)];
        let mut set = vec![false; tensor.len()];
        for e in entries {
            if e.index.len() != n {
                return Err(Error::invalid("entries.index", "tuple length must equal n"));
            }
            if e.index.iter().any(|&i| i >= rank) {
                return Err(Error::invalid("entries.index", "index out of range"));
            }
            if !e.value.is_finite() {
                return Err(Error::invalid("entries.value", "must be finite"));
            }
            for perm in permutations(&e.index) {
                let flat = perm.iter().fold(0, |acc, &i| acc * rank + i);
                if set[flat] {
                    return Err(Error::invalid("entries.index", "tuple listed more than once"));
                }
                set[flat] = true;
                tensor[flat] = e.value;
            }
        }
        Ok(IntersectionForm { rank, n, tensor })
    }

    /// Q((x,y),(x′,y′)) = xy′ + x′y.
    pub fn hyperbolic() -> Self {
        IntersectionForm::new(2, 2, &[IntersectionEntry { index: vec![0, 1], value: 1.0 }])
            .expect("valid form")
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    fn check(&self, w: &ConeClass) -> Result<()> {
        if w.coefficients.len() != self.rank {
            return Err(Error::DegreeMismatch {
                expected: self.rank,
                found: w.coefficients.len(),
            });
        }
        if w.coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("class coefficients"));
        }
        Ok(())
    }

    /// Q(v₁, …, v_n).
    pub fn evaluate(&self, args: &[&ConeClass]) -> Result<f64> {
        if args.len() != self.n {
            return Err(Error::invalid("arguments", "count must equal n"));
        }
        for a in args {
            self.check(a)?;
        }
        let r = self.rank;
        let mut total = 0.0;
        for (flat, &t) in self.tensor.iter().enumerate() {
            if t == 0.0 {
                continue;
            }
            let mut rem = flat;
            let mut term = t;
            for a in args.iter().rev() {
                term *= a.coefficients[rem % r];
                rem /= r;
            }
            total += term;
        }
        Ok(total)
    }

    fn repeated(&self, fixed: &[&ConeClass], w: &ConeClass) -> Result<f64> {
        let mut args: Vec<&ConeClass> = fixed.to_vec();
        while args.len() < self.n {
            args.push(w);
        }
        self.evaluate(&args)
    }
}

impl TryFrom<IntersectionRepr> for IntersectionForm {
    type Error = Error;
    fn try_from(r: IntersectionRepr) -> Result<Self> {
        IntersectionForm::new(r.rank, r.n, &r.entries)
    }
}

impl From<IntersectionForm> for IntersectionRepr {
    fn from(q: IntersectionForm) -> Self {
        let r = q.rank;
        let mut entries = Vec::new();
        for (flat, &value) in q.tensor.iter().enumerate() {
            let mut index = vec![0; q.n];
            let mut rem = flat;
            for slot in index.iter_mut().rev() {
                *slot = rem % r;
                rem /= r;
            }
            if value != 0.0 && index.windows(2).all(|w| w[0] <= w[1]) {
                entries.push(IntersectionEntry { index, value });
            }
        }
        IntersectionRepr { rank: q.rank, n: q.n, entries }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ConeClass {
    pub coefficients: Vec<f64>,
}

impl ConeClass {
    pub fn new(coefficients: Vec<f64>) -> Self {
        ConeClass { coefficients }
    }

    pub fn scaled(&self, c: f64) -> Self {
        ConeClass::new(self.coefficients.iter().map(|x| c * x).collect())
    }

    /// self + t·other
    pub fn shifted(&self, t: f64, other: &ConeClass) -> Self {
        ConeClass::new(
            self.coefficients
                .iter()
                .zip(&other.coefficients)
                .map(|(a, b)| a + t * b)
                .collect(),
        )
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).product::<usize>() as f64
}

/// Q(wⁿ)/n!.
pub fn volume(w: &ConeClass, q: &IntersectionForm) -> Result<f64> {
    Ok(q.repeated(&[], w)? / factorial(q.n))
}

const CONE_SAMPLES: usize = 64;

/// Positive volume along sampled points of the segment from the reference.
pub fn in_cone(w: &ConeClass, q: &IntersectionForm, reference: &ConeClass) -> Result<bool> {
    if !(volume(reference, q)? > 0.0) {
        return Err(Error::invalid("reference", "must have positive volume"));
    }
    q.check(w)?;
    for k in 1..=CONE_SAMPLES {
        let s = k as f64 / CONE_SAMPLES as f64;
        let p = reference.scaled(1.0 - s).shifted(s, w);
        if !(volume(&p, q)? > 0.0) {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryDistance {
    Finite,
    Infinite,
}

pub fn classify_boundary(alpha: &ConeClass, q: &IntersectionForm) -> Result<BoundaryDistance> {
    let v = volume(alpha, q)?;
    if v.abs() <= BOUNDARY_TOL {
        Ok(BoundaryDistance::Infinite)
    } else if v > 0.0 {
        Ok(BoundaryDistance::Finite)
    } else {
        Err(Error::NotBoundary { volume: v })
    }
}

/// (V, V′, V″) along α + tω.
fn volume_jet(alpha: &ConeClass, omega: &ConeClass, q: &IntersectionForm, t: f64) -> Result<(f64, f64, f64)> {
    let w = alpha.shifted(t, omega);
    let n = q.n;
    Ok((
        q.repeated(&[], &w)? / factorial(n),
        q.repeated(&[omega], &w)? / factorial(n - 1),
        q.repeated(&[omega, omega], &w)? / factorial(n - 2),
    ))
}

fn positive_volume(alpha: &ConeClass, omega: &ConeClass, q: &IntersectionForm, t: f64) -> Result<(f64, f64, f64)> {
    let jet = volume_jet(alpha, omega, q, t)?;
    if !(jet.0 > 0.0) {
        return Err(Error::SegmentExitsCone { t, volume: jet.0 });
    }
    Ok(jet)
}

fn check_segment(alpha: &ConeClass, omega: &ConeClass, q: &IntersectionForm, tau: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&tau) {
        return Err(Error::invalid("tau", "must lie in [0, 1]"));
    }
    for &t in &segment_breaks(tau, 1.0, CONE_SAMPLES) {
        positive_volume(alpha, omega, q, t)?;
    }
    Ok(())
}

/// Second derivative of −log Vol along the segment.
pub fn hessian_along(alpha: &ConeClass, omega: &ConeClass, q: &IntersectionForm, t: f64) -> Result<f64> {
    let (v, d1, d2) = positive_volume(alpha, omega, q, t)?;
    let r = d1 / v;
    Ok(-d2 / v + r * r)
}

/// E_τ¹ in closed form.
pub fn segment_energy(alpha: &ConeClass, omega: &ConeClass, q: &IntersectionForm, tau: f64) -> Result<f64> {
    check_segment(alpha, omega, q, tau)?;
    if tau == 1.0 {
        return Ok(0.0);
    }
    let (v0, d0, _) = positive_volume(alpha, omega, q, tau)?;
    let (v1, d1, _) = positive_volume(alpha, omega, q, 1.0)?;
    Ok(d0 / v0 - d1 / v1)
}

/// E_τ¹ by quadrature of the Hessian, the oracle for the closed form.
pub fn segment_energy_quadrature(
    alpha: &ConeClass,
    omega: &ConeClass,
    q: &IntersectionForm,
    tau: f64,
    quad: &QuadratureSpec,
) -> Result<f64> {
    check_segment(alpha, omega, q, tau)?;
    Ok(integrate(|t| hessian_along(alpha, omega, q, t), tau, 1.0, quad)?.value)
}

/// ∫_τ¹ √(Hessian) dt.
pub fn segment_length(
    alpha: &ConeClass,
    omega: &ConeClass,
    q: &IntersectionForm,
    tau: f64,
    quad: &QuadratureSpec,
) -> Result<f64> {
    check_segment(alpha, omega, q, tau)?;
    Ok(integrate(|t| Ok(hessian_along(alpha, omega, q, t)?.max(0.0).sqrt()), tau, 1.0, quad)?.value)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SegmentRow {
    pub tau: f64,
    pub energy: f64,
    pub length: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SegmentSeries {
    pub classification: BoundaryDistance,
    pub rows: Vec<SegmentRow>,
    /// d(length)/d log(1/τ) over the last rows: → 0 for finite limits, ≈ const
    /// for logarithmic growth.
    pub length_log_slope: f64,
    /// d log(energy)/d log(1/τ) over the last rows.
    pub energy_power_slope: f64,
}

/// Energies and lengths along τ_k = 2^{−k}, k = 0..=levels.
pub fn segment_series(
    alpha: &ConeClass,
    omega: &ConeClass,
    q: &IntersectionForm,
    levels: usize,
    quad: &QuadratureSpec,
) -> Result<SegmentSeries> {
    let classification = classify_boundary(alpha, q)?;
    let mut rows = Vec::with_capacity(levels + 1);
    let mut length = 0.0;
    let mut prev = 1.0;
    for k in 0..=levels {
        let tau = 0.5f64.powi(k as i32);
        if tau < prev {
            check_segment(alpha, omega, q, tau)?;
            length += integrate(
                |t| Ok(hessian_along(alpha, omega, q, t)?.max(0.0).sqrt()),
                tau,
                prev,
                quad,
            )?
            .value;
        }
        rows.push(SegmentRow {
            tau,
            energy: segment_energy(alpha, omega, q, tau)?,
            length,
        });
        prev = tau;
    }
    let (length_log_slope, energy_power_slope) = if rows.len() >= 3 {
        let (a, b) = (rows[rows.len() / 2], rows[rows.len() - 1]);
        let dx = (a.tau / b.tau).ln();
        let power = if a.energy > 0.0 && b.energy > 0.0 {
            (b.energy / a.energy).ln() / dx
        } else {
            0.0
        };
        ((b.length - a.length) / dx, power)
    } else {
        (0.0, 0.0)
    };
    Ok(SegmentSeries {
        classification,
        rows,
        length_log_slope,
        energy_power_slope,
    })
}

/// Second differences of −log Vol along the segment at the given times.
pub fn potential_second_differences(
    alpha: &ConeClass,
    omega: &ConeClass,
    q: &IntersectionForm,
    ts: &[f64],
    h: f64,
) -> Result<Vec<f64>> {
    let f = |t: f64| -> Result<f64> { Ok(-positive_volume(alpha, omega, q, t)?.0.ln()) };
    ts.iter()
        .map(|&t| Ok((f(t + h)? - 2.0 * f(t)? + f(t - h)?) / (h * h)))
        .collect()
}
