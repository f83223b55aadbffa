//! Finite energy and length certificates for Kummer-type degenerations.
//!
//! The cohomology class of φ_t moves as Σ f_a(t)·[C_a] while the Θ-periods
//! g_b(t) stay capped by calibrated volumes. Only those caps and the exact
//! polynomial data of the f_a enter the bound, so the certificate is
//! evaluated in closed form.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{integrate, segment_breaks, QuadratureSpec};

/// Coefficient of a moving class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", deny_unknown_fields)]
pub enum CoeffFunction {
    /// a + b·t²
    TypeI { a: f64, b: f64 },
    /// a·t² + b·t³
    TypeII { a: f64, b: f64 },
    /// Σ c_k t^k, ascending.
    #[serde(rename = "polynomial")]
    Polynomial { coefficients: Vec<f64> },
}

impl CoeffFunction {
    pub fn coefficients(&self) -> Vec<f64> {
        match self {
            CoeffFunction::TypeI { a, b } => vec![*a, 0.0, *b],
            CoeffFunction::TypeII { a, b } => vec![0.0, 0.0, *a, *b],
            CoeffFunction::Polynomial { coefficients } => coefficients.clone(),
        }
    }

    fn validate(&self, field: &str) -> Result<()> {
        if self.coefficients().iter().all(|c| c.is_finite()) {
            Ok(())
        } else {
            Err(Error::invalid(field, "coefficients must be finite"))
        }
    }
}

fn horner(p: &[f64], t: f64) -> f64 {
    p.iter().rev().fold(0.0, |acc, c| acc * t + c)
}

fn derivative(p: &[f64]) -> Vec<f64> {
    p.iter()
        .enumerate()
        .skip(1)
        .map(|(k, c)| k as f64 * c)
        .collect()
}

fn trimmed(p: &[f64]) -> &[f64] {
    let len = p.iter().rposition(|&c| c != 0.0).map_or(0, |i| i + 1);
    &p[..len]
}

/// Value, first and second derivative.
pub fn eval_coeff(f: &CoeffFunction, t: f64) -> (f64, f64, f64) {
    let p = f.coefficients();
    let d1 = derivative(&p);
    let d2 = derivative(&d1);
    (horner(&p, t), horner(&d1, t), horner(&d2, t))
}

/// Real roots of `p` strictly inside (low, high), ascending. Isolated by the
/// roots of p′, then refined by bisection on each monotone piece.
pub fn real_roots(p: &[f64], low: f64, high: f64) -> Vec<f64> {
    let p = trimmed(p);
    match p.len() {
        0 | 1 => Vec::new(),
        2 => {
            let r = -p[0] / p[1];
            if r > low && r < high {
                vec![r]
            } else {
                Vec::new()
            }
        }
        _ => {
            let mut knots = vec![low];
            knots.extend(real_roots(&derivative(p), low, high));
            knots.push(high);
            let mut roots = Vec::new();
            for w in knots.windows(2) {
                let (mut a, mut b) = (w[0], w[1]);
                let (mut fa, fb) = (horner(p, a), horner(p, b));
                if fa == 0.0 && a > low {
                    roots.push(a);
                }
                if fa * fb >= 0.0 {
                    continue;
                }
                loop {
                    let m = 0.5 * (a + b);
                    if m <= a || m >= b {
                        break;
                    }
                    let fm = horner(p, m);
                    if fm == 0.0 {
                        a = m;
                        b = m;
                        break;
                    }
                    if (fm < 0.0) == (fa < 0.0) {
                        a = m;
                        fa = fm;
                    } else {
                        b = m;
                    }
                }
                roots.push(0.5 * (a + b));
            }
            roots.dedup();
            roots
        }
    }
}

/// Exact regularity data of a coefficient on (0, T].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Regularity {
    pub sup_abs_derivative: f64,
    pub abs_derivative_at_t: f64,
    pub integral_abs_second: f64,
}

/// sup|f′| from the endpoints and the critical points of f′; ∫|f″| as the
/// total variation of f′ between consecutive roots of f″.
pub fn regularity(f: &CoeffFunction, t_high: f64) -> Regularity {
    let p = f.coefficients();
    let d1 = derivative(&p);
    let d2 = derivative(&d1);
    let roots = real_roots(&d2, 0.0, t_high);
    let mut knots = Vec::with_capacity(roots.len() + 2);
    knots.push(0.0);
    knots.extend(roots);
    knots.push(t_high);
    let values: Vec<f64> = knots.iter().map(|&t| horner(&d1, t)).collect();
    Regularity {
        sup_abs_derivative: values.iter().map(|v| v.abs()).fold(0.0, f64::max),
        abs_derivative_at_t: values[values.len() - 1].abs(),
        integral_abs_second: values.windows(2).map(|w| (w[1] - w[0]).abs()).sum(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SingularityType {
    I,
    II,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassData {
    pub class_id: String,
    pub coefficient: CoeffFunction,
    /// Volume of the supporting cycle for the reference metric g_i.
    pub calib_volume_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GluingComponent {
    pub name: String,
    pub singularity_type: SingularityType,
    pub classes: Vec<ClassData>,
    /// Asserted, not derived: the boundary map of this piece vanishes.
    pub delta_trivial: bool,
    /// Asserted, not derived: the resolved metrics are dominated by g_i.
    pub metric_dominated: bool,
}

fn default_factor() -> f64 {
    4.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KummerModel {
    #[serde(rename = "T")]
    pub t_high: f64,
    /// Lower bound for Vol(φ_t), supplied by the caller.
    #[serde(rename = "V0")]
    pub v0: f64,
    #[serde(default = "default_factor")]
    pub metric_equivalence_dim4_factor: f64,
    pub b1_zero: bool,
    pub components: Vec<GluingComponent>,
    /// Cup-product pairing between moving classes and the cycles carrying
    /// the Θ-periods, in class order. Identity when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pairing: Option<Vec<Vec<f64>>>,
}

/// Volume factor on 4-cycles for a metric equivalence c⁻¹g ≤ g̃ ≤ c·g: the
/// volume form scales by at most c^{4/2}.
pub fn factor_from_equivalence(c: f64) -> f64 {
    c * c
}

const MAX_CONDITION: f64 = 1e12;

fn to_matrix(rows: &[Vec<f64>], field: &str) -> Result<DMatrix<f64>> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(Error::invalid(field, "must be a square array"));
    }
    if rows.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::invalid(field, "entries must be finite"));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

fn condition_number(m: &DMatrix<f64>) -> f64 {
    let s = m.clone().singular_values();
    let max = s.max();
    let min = s.min();
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Inverse transpose, so that the rows of the result pair to the identity
/// with the rows of the input.
pub fn dual_basis(pairing: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let m = to_matrix(pairing, "pairing")?;
    if m.nrows() == 0 {
        return Ok(Vec::new());
    }
    let condition = condition_number(&m);
    if !(condition < MAX_CONDITION) {
        return Err(Error::Singular { condition });
    }
    let inv = m
        .clone()
        .try_inverse()
        .ok_or(Error::Singular { condition })?
        .transpose();
    Ok(inv.row_iter().map(|r| r.iter().copied().collect()).collect())
}

impl KummerModel {
    pub fn classes(&self) -> impl Iterator<Item = (&GluingComponent, &ClassData)> {
        self.components
            .iter()
            .flat_map(|c| c.classes.iter().map(move |k| (c, k)))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_high > 0.0 && self.t_high.is_finite()) {
            return Err(Error::invalid("T", "must be positive and finite"));
        }
        if !(self.v0 > 0.0 && self.v0.is_finite()) {
            return Err(Error::invalid("V0", "must be positive and finite"));
        }
        if !(self.metric_equivalence_dim4_factor >= 0.0 && self.metric_equivalence_dim4_factor.is_finite()) {
            return Err(Error::invalid("metric_equivalence_dim4_factor", "must be non-negative"));
        }
        let mut seen = std::collections::HashSet::new();
        for (comp, class) in self.classes() {
            if !seen.insert(class.class_id.as_str()) {
                return Err(Error::invalid("class_id", "class ids must be unique"));
            }
            class.coefficient.validate("coefficient")?;
            if !(class.calib_volume_bound >= 0.0 && class.calib_volume_bound.is_finite()) {
                return Err(Error::invalid("calib_volume_bound", "must be non-negative and finite"));
            }
            let family_ok = !matches!(
                (&class.coefficient, comp.singularity_type),
                (CoeffFunction::TypeI { .. }, SingularityType::II) | (CoeffFunction::TypeII { .. }, SingularityType::I)
            );
            if !family_ok {
                return Err(Error::invalid(
                    "coefficient",
                    "coefficient family does not match the component's singularity type",
                ));
            }
        }
        if let Some(p) = &self.pairing {
            let m = to_matrix(p, "pairing")?;
            if m.nrows() != seen.len() {
                return Err(Error::invalid("pairing", "dimension must equal the number of classes"));
            }
            if m.nrows() > 0 {
                let condition = condition_number(&m);
                if !(condition < MAX_CONDITION) {
                    return Err(Error::Singular { condition });
                }
            }
        }
        Ok(())
    }

    /// |P_ab|, identity when no pairing is given.
    fn abs_pairing(&self) -> DMatrix<f64> {
        let n = self.classes().count();
        match &self.pairing {
            Some(p) => DMatrix::from_fn(n, n, |i, j| p[i][j].abs()),
            None => DMatrix::identity(n, n),
        }
    }

    fn signed_pairing(&self) -> DMatrix<f64> {
        let n = self.classes().count();
        match &self.pairing {
            Some(p) => DMatrix::from_fn(n, n, |i, j| p[i][j]),
            None => DMatrix::identity(n, n),
        }
    }
}

/// Cap on the Θ-period of a class: dim-4 factor × calibrated volume.
pub fn g_bound(model: &KummerModel, class_id: &str) -> Result<f64> {
    model
        .classes()
        .find(|(_, c)| c.class_id == class_id)
        .map(|(_, c)| model.metric_equivalence_dim4_factor * c.calib_volume_bound)
        .ok_or_else(|| Error::MissingClass(class_id.to_string()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassReport {
    pub class_id: String,
    pub component: String,
    pub g_bound: f64,
    #[serde(flatten)]
    pub regularity: Regularity,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesesReport {
    /// b¹ = 0 and every boundary map trivial (asserted inputs).
    pub item_i: bool,
    /// f′ bounded and f″ integrable on (0, T] (verified exactly).
    pub item_ii: bool,
    /// Each component has a dominating metric (asserted input).
    pub item_iii: bool,
    pub classes: Vec<ClassReport>,
    pub failures: Vec<String>,
}

impl HypothesesReport {
    pub fn all_hold(&self) -> bool {
        self.item_i && self.item_ii && self.item_iii
    }
}

pub fn check_hypotheses(model: &KummerModel) -> Result<HypothesesReport> {
    model.validate()?;
    let mut failures = Vec::new();
    if !model.b1_zero {
        failures.push("(i) b1_zero is not asserted".to_string());
    }
    for c in model.components.iter().filter(|c| !c.delta_trivial) {
        failures.push(format!("(i) boundary map of component '{}' is not trivial", c.name));
    }
    let item_i = failures.is_empty();

    let mut item_ii = true;
    let mut classes = Vec::new();
    for (comp, class) in model.classes() {
        let regularity = regularity(&class.coefficient, model.t_high);
        if !(regularity.sup_abs_derivative.is_finite() && regularity.integral_abs_second.is_finite()) {
            item_ii = false;
            failures.push(format!("(ii) class '{}' has non-finite derivative data", class.class_id));
        }
        classes.push(ClassReport {
            class_id: class.class_id.clone(),
            component: comp.name.clone(),
            g_bound: model.metric_equivalence_dim4_factor * class.calib_volume_bound,
            regularity,
        });
    }

    let before = failures.len();
    for c in model.components.iter().filter(|c| !c.metric_dominated) {
        failures.push(format!("(iii) component '{}' has no dominating metric", c.name));
    }
    Ok(HypothesesReport {
        item_i,
        item_ii,
        item_iii: failures.len() == before,
        classes,
        failures,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Bounds {
    /// Bound on |h| over (0, T].
    #[serde(rename = "C_bound")]
    pub c_bound: f64,
    /// Bound on ∫ (1/Vol)|⟨φ̈ ∪ Θ⟩| over (0, T].
    #[serde(rename = "A_integral")]
    pub a_integral: f64,
    pub energy_bound: f64,
    pub length_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certificate {
    pub hypotheses: HypothesesReport,
    pub bounds: Bounds,
    pub valid: bool,
}

impl Certificate {
    /// Human-readable audit trail.
    pub fn audit(&self) -> Vec<String> {
        let h = &self.hypotheses;
        let mut lines = vec![
            format!("(i)   b1 = 0 and trivial boundary maps (asserted): {}", h.item_i),
            format!("(ii)  bounded f', integrable f'' (exact): {}", h.item_ii),
            format!("(iii) dominating metrics (asserted): {}", h.item_iii),
        ];
        for c in &h.classes {
            lines.push(format!(
                "  class {} [{}]: G = {}, sup|f'| = {}, |f'(T)| = {}, int|f''| = {}",
                c.class_id,
                c.component,
                c.g_bound,
                c.regularity.sup_abs_derivative,
                c.regularity.abs_derivative_at_t,
                c.regularity.integral_abs_second
            ));
        }
        lines.extend(h.failures.iter().map(|f| format!("  failure: {f}")));
        lines.push(format!(
            "energy <= {}, length <= {}, valid = {}",
            self.bounds.energy_bound, self.bounds.length_bound, self.valid
        ));
        lines
    }
}

/// energy ≤ (1/V0)·Σ_a Σ_b |P_ab|·G_b·(sup|f′_a| + |f′_a(T)| + ∫|f″_a|), valid
/// for every truncation [τ, T] at once.
pub fn energy_upper_bound(model: &KummerModel) -> Result<Certificate> {
    let hypotheses = check_hypotheses(model)?;
    let p = model.abs_pairing();
    let caps: Vec<f64> = hypotheses.classes.iter().map(|c| c.g_bound).collect();
    let (mut c_sum, mut t_sum, mut a_sum) = (0.0, 0.0, 0.0);
    for (a, class) in hypotheses.classes.iter().enumerate() {
        let weight: f64 = caps.iter().enumerate().map(|(b, g)| p[(a, b)] * g).sum();
        if weight == 0.0 {
            continue;
        }
        let r = &class.regularity;
        c_sum += weight * r.sup_abs_derivative;
        t_sum += weight * r.abs_derivative_at_t;
        a_sum += weight * r.integral_abs_second;
    }
    let energy_bound = (c_sum + t_sum + a_sum) / model.v0;
    let valid = hypotheses.all_hold() && energy_bound.is_finite();
    Ok(Certificate {
        bounds: Bounds {
            c_bound: c_sum / model.v0,
            a_integral: a_sum / model.v0,
            energy_bound,
            length_bound: (model.t_high * energy_bound).sqrt(),
        },
        hypotheses,
        valid,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossCheck {
    pub energy_bound: f64,
    /// (τ, E_τ) from the boundary-term formula with the synthetic periods.
    pub energies: Vec<(f64, f64)>,
    pub max_abs_energy: f64,
    pub dominated: bool,
}

pub const CAP_SAMPLES: usize = 1024;

/// Evaluates h(τ) − h(T) + ∫_τ^T (1/V)⟨φ̈ ∪ Θ⟩ with caller-supplied periods
/// g_b(t) (class order) and volume (default V0), and compares with the
/// certificate.
pub fn cross_check_with_path_geometry(
    model: &KummerModel,
    synthetic_g: &dyn Fn(usize, f64) -> f64,
    volume: Option<&dyn Fn(f64) -> f64>,
    taus: &[f64],
    quad: &QuadratureSpec,
) -> Result<CrossCheck> {
    let cert = energy_upper_bound(model)?;
    let t_high = model.t_high;
    let caps: Vec<f64> = cert.hypotheses.classes.iter().map(|c| c.g_bound).collect();
    let lowest = taus.iter().copied().fold(t_high, f64::min);
    if !(lowest > 0.0) {
        return Err(Error::invalid("taus", "truncation points must lie in (0, T]"));
    }
    let vol = |t: f64| volume.map_or(model.v0, |v| v(t));
    for &t in &segment_breaks(lowest, t_high, CAP_SAMPLES - 1) {
        for (b, cap) in caps.iter().enumerate() {
            let value = synthetic_g(b, t);
            if !(value.abs() <= cap * (1.0 + 1e-12)) {
                return Err(Error::CapViolated {
                    class: cert.hypotheses.classes[b].class_id.clone(),
                    t,
                    value,
                    cap: *cap,
                });
            }
        }
        if !(vol(t) >= model.v0 * (1.0 - 1e-12)) {
            return Err(Error::invalid("volume", "synthetic volume drops below V0"));
        }
    }

    let p = model.signed_pairing();
    let coeffs: Vec<CoeffFunction> = model.classes().map(|(_, c)| c.coefficient.clone()).collect();
    let pair = |t: f64, order: usize| -> f64 {
        let mut sum = 0.0;
        for (a, f) in coeffs.iter().enumerate() {
            let (_, d1, d2) = eval_coeff(f, t);
            let d = if order == 1 { d1 } else { d2 };
            if d == 0.0 {
                continue;
            }
            for b in 0..coeffs.len() {
                if p[(a, b)] != 0.0 {
                    sum += p[(a, b)] * d * synthetic_g(b, t);
                }
            }
        }
        sum / vol(t)
    };
    let h_top = pair(t_high, 1);
    let mut energies = Vec::with_capacity(taus.len());
    for &tau in taus {
        if tau > t_high {
            return Err(Error::invalid("taus", "truncation points must lie in (0, T]"));
        }
        let integral = integrate(|t| Ok(pair(t, 2)), tau, t_high, quad)?.value;
        energies.push((tau, pair(tau, 1) - h_top + integral));
    }
    let max_abs_energy = energies.iter().map(|e| e.1.abs()).fold(0.0, f64::max);
    Ok(CrossCheck {
        energy_bound: cert.bounds.energy_bound,
        dominated: energies.iter().all(|e| e.1 <= cert.bounds.energy_bound + 1e-9),
        energies,
        max_abs_energy,
    })
}
