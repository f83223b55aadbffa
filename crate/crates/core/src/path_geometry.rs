//! Energies and lengths of paths of torus moduli points.
//!
//! Along a C² path φ_t with fixed lattice the function
//! `h(t) = (1/Vol(φ_t)) ∫ φ̇_t ∧ Θ(φ_t) = −dF(φ̇_t)` satisfies
//! `h′ = −D²F(φ̇, φ̇) + (1/Vol) ∫ φ̈ ∧ Θ`, so the Hessian-form energy over
//! [τ, T] equals `h(τ) − h(T) + ∫ (1/Vol) ∫ φ̈ ∧ Θ dt`. [`energy_via_prop21`]
//! evaluates both sides.

use std::cell::Cell;
use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exterior7::{Form, Vector7, DIM};
use crate::quadrature::{integrate, segment_breaks, QuadratureSpec};
use crate::torus_moduli::{Lattice, TorusModuliPoint};

pub type FormFn = Arc<dyn Fn(f64) -> Form + Send + Sync>;

/// Which quadratic form measures the velocity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FormUsed {
    #[serde(rename = "hessian-form")]
    HessianForm,
    #[serde(rename = "l2-pairing")]
    L2Pairing,
}

impl fmt::Display for FormUsed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FormUsed::HessianForm => f.write_str("hessian-form"),
            FormUsed::L2Pairing => f.write_str("l2-pairing"),
        }
    }
}

/// A C² family of constant 3-forms on a fixed torus, with its first and
/// second derivatives supplied explicitly.
#[derive(Clone)]
pub struct ModuliPath {
    low: f64,
    high: f64,
    phi_of: FormFn,
    dphi_of: FormFn,
    ddphi_of: FormFn,
    lattice: Lattice,
}

impl fmt::Debug for ModuliPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ModuliPath")
            .field("low", &self.low)
            .field("high", &self.high)
            .finish_non_exhaustive()
    }
}

const VALIDATION_SAMPLES: usize = 16;
const DERIVATIVE_TOL: f64 = 1e-5;

fn rel_error(supplied: &Form, fd: &Form, scale: f64) -> f64 {
    let diff = (supplied - fd).coefficient_norm();
    let denom = supplied
        .coefficient_norm()
        .max(fd.coefficient_norm())
        .max(1e-6 * scale);
    diff / denom
}

impl ModuliPath {
    /// Builds a path on `[low, high]` and validates positivity and the
    /// supplied derivatives against central differences at interior samples.
    pub fn new(
        lattice: Lattice,
        low: f64,
        high: f64,
        phi_of: FormFn,
        dphi_of: FormFn,
        ddphi_of: FormFn,
    ) -> Result<Self> {
        if !(low.is_finite() && high.is_finite() && low < high) {
            return Err(Error::invalid("domain", "requires finite t_low < t_high"));
        }
        let path = ModuliPath {
            low,
            high,
            phi_of,
            dphi_of,
            ddphi_of,
            lattice,
        };
        path.validate()?;
        Ok(path)
    }

    fn validate(&self) -> Result<()> {
        let breaks = segment_breaks(self.low, self.high, VALIDATION_SAMPLES + 1);
        for &t in &breaks[1..=VALIDATION_SAMPLES] {
            let phi = (self.phi_of)(t);
            if phi.degree() != 3 {
                return Err(Error::DegreeMismatch {
                    expected: 3,
                    found: phi.degree(),
                });
            }
            self.point_at(t)?;
            let h = 1e-3 * (t - self.low).min(self.high - t);
            let scale = 1.0 + phi.coefficient_norm();
            let fd1 = ((self.phi_of)(t + h) - (self.phi_of)(t - h)).scaled(0.5 / h);
            let rel = rel_error(&(self.dphi_of)(t), &fd1, scale);
            if rel > DERIVATIVE_TOL {
                return Err(Error::DerivativeMismatch {
                    which: "first derivative",
                    t,
                    rel,
                });
            }
            let fd2 = ((self.dphi_of)(t + h) - (self.dphi_of)(t - h)).scaled(0.5 / h);
            let rel = rel_error(&(self.ddphi_of)(t), &fd2, scale);
            if rel > DERIVATIVE_TOL {
                return Err(Error::DerivativeMismatch {
                    which: "second derivative",
                    t,
                    rel,
                });
            }
        }
        Ok(())
    }

    /// φ_t = base + t·direction.
    pub fn affine(lattice: Lattice, base: Form, direction: Form, low: f64, high: f64) -> Result<Self> {
        ModuliPath::polynomial(lattice, vec![base, direction], low, high)
    }

    /// φ_t = e^{rate·t}·base.
    pub fn scaling(lattice: Lattice, base: Form, rate: f64, low: f64, high: f64) -> Result<Self> {
        let (b0, b1, b2) = (base.clone(), base.clone(), base);
        ModuliPath::new(
            lattice,
            low,
            high,
            Arc::new(move |t| b0.scaled((rate * t).exp())),
            Arc::new(move |t| b1.scaled(rate * (rate * t).exp())),
            Arc::new(move |t| b2.scaled(rate * rate * (rate * t).exp())),
        )
    }

    /// φ_t = Σ_k c_k t^k.
    pub fn polynomial(lattice: Lattice, coefficients: Vec<Form>, low: f64, high: f64) -> Result<Self> {
        if coefficients.is_empty() {
            return Err(Error::invalid("coefficients", "at least one coefficient form"));
        }
        if let Some(c) = coefficients.iter().find(|c| c.degree() != 3) {
            return Err(Error::DegreeMismatch {
                expected: 3,
                found: c.degree(),
            });
        }
        let c = Arc::new(coefficients);
        let eval = move |coeffs: &[Form], t: f64, order: usize| -> Form {
            let mut out = Form::zero(3);
            for (k, ck) in coeffs.iter().enumerate().skip(order) {
                let falling: f64 = (0..order).map(|j| (k - j) as f64).product();
                out = out.add_scaled(falling * t.powi((k - order) as i32), ck);
            }
            out
        };
        let (c0, c1, c2) = (c.clone(), c.clone(), c);
        ModuliPath::new(
            lattice,
            low,
            high,
            Arc::new(move |t| eval(&c0, t, 0)),
            Arc::new(move |t| eval(&c1, t, 1)),
            Arc::new(move |t| eval(&c2, t, 2)),
        )
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.low, self.high)
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    fn check_t(&self, t: f64) -> Result<()> {
        if t >= self.low && t <= self.high {
            Ok(())
        } else {
            Err(Error::OutsideDomain {
                t,
                low: self.low,
                high: self.high,
            })
        }
    }

    pub fn phi(&self, t: f64) -> Form {
        (self.phi_of)(t)
    }

    pub fn velocity(&self, t: f64) -> Form {
        (self.dphi_of)(t)
    }

    pub fn acceleration(&self, t: f64) -> Form {
        (self.ddphi_of)(t)
    }

    pub fn point_at(&self, t: f64) -> Result<TorusModuliPoint> {
        self.check_t(t)?;
        TorusModuliPoint::new(self.lattice.clone(), self.phi(t)).map_err(|e| match e {
            Error::NotPositive { .. } => Error::PathLeavesPositiveCone { t },
            other => other,
        })
    }

    /// Q(φ̇_t, φ̇_t) for the chosen quadratic form.
    pub fn speed_squared(&self, t: f64, form: FormUsed) -> Result<f64> {
        let pt = self.point_at(t)?;
        let v = self.velocity(t);
        match form {
            FormUsed::HessianForm => pt.hessian_form(&v, &v),
            FormUsed::L2Pairing => pt.l2_pairing(&v, &v),
        }
    }

    /// (1/Vol) ∫ φ̈_t ∧ Θ(φ_t).
    pub fn acceleration_term(&self, t: f64) -> Result<f64> {
        let pt = self.point_at(t)?;
        Ok(pt.pairing_with_theta(&self.acceleration(t))? / pt.total_volume())
    }
}

pub fn h_function(path: &ModuliPath, t: f64) -> Result<f64> {
    let pt = path.point_at(t)?;
    Ok(pt.pairing_with_theta(&path.velocity(t))? / pt.total_volume())
}

fn check_interval(path: &ModuliPath, tau: f64, t_high: f64) -> Result<()> {
    path.check_t(tau)?;
    path.check_t(t_high)?;
    if tau > t_high {
        return Err(Error::invalid("interval", "requires tau <= T"));
    }
    Ok(())
}

/// ∫_τ^T Q(φ̇, φ̇) dt.
pub fn energy_direct(
    path: &ModuliPath,
    tau: f64,
    t_high: f64,
    form: FormUsed,
    quad: &QuadratureSpec,
) -> Result<f64> {
    check_interval(path, tau, t_high)?;
    Ok(integrate(|t| path.speed_squared(t, form), tau, t_high, quad)?.value)
}

/// ∫_τ^T √Q(φ̇, φ̇) dt; NaN when Q is negative somewhere on the path.
pub fn length(
    path: &ModuliPath,
    tau: f64,
    t_high: f64,
    form: FormUsed,
    quad: &QuadratureSpec,
) -> Result<f64> {
    check_interval(path, tau, t_high)?;
    let negative = Cell::new(false);
    let value = integrate(
        |t| {
            let s = path.speed_squared(t, form)?;
            if s < 0.0 {
                negative.set(true);
            }
            Ok(s.max(0.0).sqrt())
        },
        tau,
        t_high,
        quad,
    )?
    .value;
    Ok(if negative.get() { f64::NAN } else { value })
}

#[derive(Debug, Clone, Serialize)]
pub struct PathReport {
    pub tau: f64,
    pub t_high: f64,
    pub energy_direct: f64,
    pub energy_prop21: f64,
    pub length: f64,
    pub boundary_term_low: f64,
    pub boundary_term_high: f64,
    pub integral_term: f64,
    pub residual: f64,
    pub form_used: FormUsed,
}

impl PathReport {
    pub fn relative_residual(&self) -> f64 {
        self.residual / self.energy_direct.abs().max(1.0)
    }
}

/// Energy over [τ, T] by the boundary-term formula, alongside direct
/// quadrature of the Hessian form.
pub fn energy_via_prop21(
    path: &ModuliPath,
    tau: f64,
    t_high: f64,
    quad: &QuadratureSpec,
) -> Result<PathReport> {
    check_interval(path, tau, t_high)?;
    let boundary_term_low = h_function(path, tau)?;
    let boundary_term_high = -h_function(path, t_high)?;
    let integral_term = integrate(|t| path.acceleration_term(t), tau, t_high, quad)?.value;
    let energy_prop21 = boundary_term_low + boundary_term_high + integral_term;
    let form = FormUsed::HessianForm;
    let energy_direct = energy_direct(path, tau, t_high, form, quad)?;
    let length = length(path, tau, t_high, form, quad)?;
    Ok(PathReport {
        tau,
        t_high,
        energy_direct,
        energy_prop21,
        length,
        boundary_term_low,
        boundary_term_high,
        integral_term,
        residual: (energy_direct - energy_prop21).abs(),
        form_used: form,
    })
}

/// Direct energy and length for either form; the boundary-term fields are
/// filled only for the Hessian form.
pub fn path_report(
    path: &ModuliPath,
    tau: f64,
    t_high: f64,
    form: FormUsed,
    quad: &QuadratureSpec,
) -> Result<PathReport> {
    match form {
        FormUsed::HessianForm => energy_via_prop21(path, tau, t_high, quad),
        FormUsed::L2Pairing => {
            let energy = energy_direct(path, tau, t_high, form, quad)?;
            Ok(PathReport {
                tau,
                t_high,
                energy_direct: energy,
                energy_prop21: f64::NAN,
                length: length(path, tau, t_high, form, quad)?,
                boundary_term_low: f64::NAN,
                boundary_term_high: f64::NAN,
                integral_term: f64::NAN,
                residual: f64::NAN,
                form_used: form,
            })
        }
    }
}

/// L² ≤ (T − τ)·E + 1e−9.
pub fn cauchy_schwarz_check(report: &PathReport) -> bool {
    report.length * report.length <= (report.t_high - report.tau) * report.energy_direct + 1e-9
}

/// Result of an improper integral over (t_low, T] by truncation.
#[derive(Debug, Clone, Serialize)]
pub struct ImproperEnergy {
    pub value: f64,
    pub converged: bool,
    /// Last truncation level k (τ_k = t_low + (T − t_low)·2^{−k}).
    pub levels: usize,
    /// Slope of log|E_k| against log(1/τ_k) over the last levels.
    pub power_growth: f64,
    /// Slope of E_k against log(1/τ_k) over the last levels.
    pub log_growth: f64,
}

const MAX_LEVELS: usize = 40;

/// Energy over the whole domain (t_low, T], as the limit of truncations.
pub fn improper_energy(
    path: &ModuliPath,
    t_high: f64,
    form: FormUsed,
    quad: &QuadratureSpec,
) -> Result<ImproperEnergy> {
    let (low, _) = path.domain();
    let mut taus = vec![t_high];
    let mut energies = vec![0.0];
    let mut quiet = 0;
    for k in 1..=MAX_LEVELS {
        let tau = low + (t_high - low) * 0.5f64.powi(k as i32);
        let prev = taus[k - 1];
        let piece = energy_direct(path, tau, prev, form, quad)?;
        let e = energies[k - 1] + piece;
        taus.push(tau);
        energies.push(e);
        if piece.abs() <= quad.target_rel_tol * e.abs() {
            quiet += 1;
            if quiet >= 3 {
                return Ok(ImproperEnergy {
                    value: e,
                    converged: true,
                    levels: k,
                    power_growth: 0.0,
                    log_growth: 0.0,
                });
            }
        } else {
            quiet = 0;
        }
    }
    let n = energies.len();
    let (x0, x1) = ((1.0 / (taus[n - 11] - low)).ln(), (1.0 / (taus[n - 1] - low)).ln());
    let (e0, e1) = (energies[n - 11], energies[n - 1]);
    Ok(ImproperEnergy {
        value: e1,
        converged: false,
        levels: MAX_LEVELS,
        power_growth: (e1.abs().ln() - e0.abs().ln()) / (x1 - x0),
        log_growth: (e1 - e0) / (x1 - x0),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct Corollary22Verdict {
    /// Sample-based: the inequalities were checked at `samples` points only.
    pub hypotheses_hold_on_samples: bool,
    pub samples: usize,
    pub witness_t: Option<f64>,
    pub failed_hypothesis: Option<String>,
    pub a_integral_estimate: f64,
    pub energy_bound: f64,
    pub length_bound: f64,
}

pub const COROLLARY_SAMPLES: usize = 1024;

/// Checks |∫φ̇∧Θ| ≤ C·Vol and |∫φ̈∧Θ| ≤ A(t)·Vol at geometric samples toward
/// the lower end of the domain and, when they hold, bounds the energy by
/// 2C + ∫A.
pub fn corollary22_check(
    path: &ModuliPath,
    c_bound: f64,
    a_of: &dyn Fn(f64) -> f64,
    a_integral: f64,
    quad: &QuadratureSpec,
) -> Result<Corollary22Verdict> {
    let (low, high) = path.domain();
    let floor = if low > 0.0 { low } else { low + (high - low) * 2f64.powi(-40) };
    let samples = segment_breaks(floor, high, COROLLARY_SAMPLES - 1);
    let tol = |bound: f64| bound * (1.0 + 1e-12) + 1e-12;

    let mut witness = None;
    for &t in samples.iter().rev() {
        let first = h_function(path, t)?.abs();
        if first > tol(c_bound) {
            witness = Some((t, "first-derivative pairing exceeds C·Vol"));
            break;
        }
        let second = path.acceleration_term(t)?.abs();
        if second > tol(a_of(t)) {
            witness = Some((t, "second-derivative pairing exceeds A(t)·Vol"));
            break;
        }
    }
    let a_integral_estimate = integrate(|t| Ok(a_of(t)), floor, high, quad)?.value;
    if witness.is_none() && a_integral_estimate > tol(a_integral) {
        witness = Some((floor, "claimed integral of A is below its quadrature"));
    }
    let energy_bound = 2.0 * c_bound + a_integral;
    Ok(Corollary22Verdict {
        hypotheses_hold_on_samples: witness.is_none(),
        samples: COROLLARY_SAMPLES,
        witness_t: witness.map(|w| w.0),
        failed_hypothesis: witness.map(|w| w.1.to_string()),
        a_integral_estimate,
        energy_bound,
        length_bound: (high * energy_bound).sqrt(),
    })
}

/// A linear 4-torus spanned by four lattice vectors, given by their integer
/// coordinates in the lattice basis.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlatCycle4 {
    pub spanning: [[i64; DIM]; 4],
}

impl FlatCycle4 {
    pub fn coordinate_plane(indices: [usize; 4]) -> Self {
        let mut spanning = [[0i64; DIM]; 4];
        for (row, &i) in spanning.iter_mut().zip(&indices) {
            row[i] = 1;
        }
        FlatCycle4 { spanning }
    }

    pub fn vectors(&self, lattice: &Lattice) -> [Vector7; 4] {
        std::array::from_fn(|i| lattice.vector(&self.spanning[i]))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CycleMeasure {
    pub flux: f64,
    pub volume: f64,
}

/// ∫ Θ(φ) over the cycle and its g_φ-volume.
pub fn cycle_flux_and_volume(cycle: &FlatCycle4, at: &TorusModuliPoint) -> Result<CycleMeasure> {
    let v = cycle.vectors(at.lattice());
    let euclid = DMatrix::from_fn(4, 4, |i, j| v[i].as_svector().dot(&v[j].as_svector()));
    let scale: f64 = (0..4).map(|i| euclid[(i, i)]).product();
    if !(euclid.determinant() > 1e-12 * scale) {
        return Err(Error::DependentVectors);
    }
    let g = &at.data().metric;
    let gram = DMatrix::from_fn(4, 4, |i, j| g.apply(&v[i], &v[j]));
    Ok(CycleMeasure {
        flux: at.data().theta_on(&v),
        volume: gram.determinant().max(0.0).sqrt(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MonitorVerdict {
    /// Flux bound and volume stay bounded: finite energy along the samples.
    Bounded,
    /// Vol(φ_t) → 0; infinite distance by the volume branch.
    VolumeCollapse,
    /// Volume bounded below while the flux lower bound for the Poincaré-dual
    /// cycle volume diverges.
    FluxDivergence,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct FluxSample {
    pub t: f64,
    /// |∫_{PD[φ̇]} Θ(φ_t)| / Vol(φ_t)
    pub flux_ratio: f64,
    pub volume: f64,
    /// h(t) − h(T): the affine-path energy over [t, T].
    pub energy_affine: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct FluxMonitor {
    pub samples: Vec<FluxSample>,
    /// d log Vol / d log t near the lower end.
    pub volume_exponent: f64,
    /// −d log(flux ratio) / d log t near the lower end.
    pub flux_exponent: f64,
    pub verdict: MonitorVerdict,
}

/// Monitors the calibrated lower bound for Vol(PD[φ̇], g_{φ_t}) along an
/// affine-class path.
pub fn pd_flux_monitor(
    path: &ModuliPath,
    direction_class: &Form,
    t_samples: &[f64],
) -> Result<FluxMonitor> {
    if t_samples.len() < 2 {
        return Err(Error::invalid("t_samples", "need at least two sample times"));
    }
    let (_, high) = path.domain();
    let h_top = h_function(path, high)?;
    let scale = 1.0 + direction_class.coefficient_norm();
    let mut samples = Vec::with_capacity(t_samples.len());
    for &t in t_samples {
        let v = path.velocity(t);
        if (&v - direction_class).coefficient_norm() > 1e-9 * scale {
            return Err(Error::NotAffine(format!("velocity differs from the class at t = {t}")));
        }
        if path.acceleration(t).coefficient_norm() > 1e-9 * scale {
            return Err(Error::NotAffine(format!("nonzero acceleration at t = {t}")));
        }
        let pt = path.point_at(t)?;
        let h = pt.pairing_with_theta(direction_class)? / pt.total_volume();
        samples.push(FluxSample {
            t,
            flux_ratio: h.abs(),
            volume: pt.total_volume(),
            energy_affine: h - h_top,
        });
    }
    samples.sort_by(|a, b| a.t.total_cmp(&b.t));

    let first = samples[0];
    let last = samples[samples.len() - 1];
    let window = samples[samples.len() / 4].t.max(first.t * 1.0000001);
    let near = samples
        .iter()
        .find(|s| s.t >= window)
        .copied()
        .unwrap_or(last);
    let dlogt = (near.t / first.t).ln();
    let slope = |a: f64, b: f64| {
        if dlogt > 0.0 && a > 0.0 && b > 0.0 {
            (b / a).ln() / dlogt
        } else {
            0.0
        }
    };
    let volume_exponent = slope(first.volume, near.volume);
    let flux_exponent = slope(first.flux_ratio, near.flux_ratio);
    let vol_max = samples.iter().map(|s| s.volume).fold(0.0, f64::max);
    let ratio_max = samples.iter().map(|s| s.flux_ratio).fold(0.0, f64::max);

    let verdict = if volume_exponent > 0.5 && first.volume < 1e-3 * vol_max {
        MonitorVerdict::VolumeCollapse
    } else if flux_exponent > 0.5 && first.flux_ratio >= ratio_max && first.flux_ratio > 1e3 * last.flux_ratio.max(1e-300) {
        MonitorVerdict::FluxDivergence
    } else {
        MonitorVerdict::Bounded
    };
    Ok(FluxMonitor {
        samples,
        volume_exponent,
        flux_exponent,
        verdict,
    })
}

/// Second differences of F(φ_t) at the given times, step `h`.
pub fn potential_second_differences(path: &ModuliPath, ts: &[f64], h: f64) -> Result<Vec<f64>> {
    ts.iter()
        .map(|&t| {
            let f = |s: f64| path.point_at(s).map(|p| p.potential_f());
            Ok((f(t + h)? - 2.0 * f(t)? + f(t - h)?) / (h * h))
        })
        .collect()
}
