//! Scenario files, report emission and the bundled example catalog.
//!
//! A scenario is `{version, kind, payload, output, seed}` plus optional
//! numerical settings. Command-line overrides take precedence over scenario
//! fields, which take precedence over built-in defaults. Artifacts are
//! written only after every computation has succeeded.

use std::fs;
use std::io::{self, Write};
use std::path::{Component, Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::exterior7::Form;
use crate::g2_point::{comass_sample, reference_phi, type_decompose};
use crate::kahler_cone::{segment_series, BoundaryDistance, ConeClass, IntersectionForm};
use crate::kummer_cert::{energy_upper_bound, KummerModel};
use crate::path_geometry::{
    cauchy_schwarz_check, corollary22_check, h_function, path_report, pd_flux_monitor, FormUsed,
    ModuliPath,
};
use crate::quadrature::{segment_breaks, QuadratureSpec};
use crate::torus_moduli::{hessian_f, FdConfig, Lattice, TorusModuliPoint};

pub const SCENARIO_VERSION: u32 = 1;
pub const SCENARIO_SCHEMA: &str = include_str!("../scenarios/scenario.schema.json");

pub struct Example {
    pub name: &'static str,
    pub description: &'static str,
    pub source: &'static str,
}

pub const EXAMPLES: &[Example] = &[
    Example {
        name: "point-reference",
        description: "metric, volume, dual 4-form and comass sample at the reference form",
        source: include_str!("../scenarios/point-reference.json"),
    },
    Example {
        name: "torus-signature",
        description: "Hessian of -3 log Vol at the reference point; expects signature (28, 7, 0)",
        source: include_str!("../scenarios/torus-signature.json"),
    },
    Example {
        name: "path-scaling-ray",
        description: "energy and length of e^t phi0 on [0, 1] by quadrature and the boundary-term formula",
        source: include_str!("../scenarios/path-scaling-ray.json"),
    },
    Example {
        name: "path-affine",
        description: "affine path phi0 + t eta with eta of type 27, with flux monitor",
        source: include_str!("../scenarios/path-affine.json"),
    },
    Example {
        name: "kummer-typeI-unit",
        description: "single TypeI class a=0, b=1, G=1, V0=1, T=1; certifies energy 6",
        source: include_str!("../scenarios/kummer-typeI-unit.json"),
    },
    Example {
        name: "kummer-typeII-unit",
        description: "single TypeII class a=b=1, G=1, V0=1, T=1; certifies energy 15",
        source: include_str!("../scenarios/kummer-typeII-unit.json"),
    },
    Example {
        name: "kahler-null-boundary",
        description: "hyperbolic form, alpha=(1,0), omega=(0,1); infinite distance",
        source: include_str!("../scenarios/kahler-null-boundary.json"),
    },
    Example {
        name: "kahler-finite-boundary",
        description: "hyperbolic form, alpha=(1,1), omega=(1,1); finite distance",
        source: include_str!("../scenarios/kahler-finite-boundary.json"),
    },
];

pub fn example(name: &str) -> Option<&'static Example> {
    EXAMPLES.iter().find(|e| e.name == name)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Point,
    Hessian,
    Path,
    Kummer,
    Kahler,
}

fn default_json_name() -> String {
    "report.json".into()
}

fn default_csv_name() -> Option<String> {
    Some("series.csv".into())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default = "default_json_name")]
    pub json: String,
    #[serde(default = "default_csv_name")]
    pub csv: Option<String>,
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec {
            json: default_json_name(),
            csv: default_csv_name(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub version: u32,
    pub kind: Kind,
    pub payload: Value,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub quadrature: Option<QuadratureSpec>,
    #[serde(default)]
    pub fd_step: Option<f64>,
}

/// Command-line values that replace scenario fields when present.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out_dir: Option<PathBuf>,
    pub quad_nodes: Option<usize>,
    pub fd_step: Option<f64>,
    pub seed: Option<u64>,
}

/// A 3-form given as `reference_scale·φ₀ + Σ terms + coefficients`, with
/// 1-based indices in `terms` (`[1, 2, 3]` is e¹²³).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FormInput {
    #[serde(default)]
    pub reference_scale: f64,
    #[serde(default)]
    pub terms: Vec<Term>,
    #[serde(default)]
    pub coefficients: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Term {
    pub index: Vec<usize>,
    pub value: f64,
}

impl FormInput {
    pub fn to_form(&self, field: &str) -> Result<Form> {
        let mut form = reference_phi().scaled(self.reference_scale);
        for term in &self.terms {
            if term.index.len() != 3 || term.index.iter().any(|&i| !(1..=7).contains(&i)) {
                return Err(Error::invalid(
                    format!("{field}.terms.index"),
                    "needs three indices in 1..=7",
                ));
            }
            let zero_based: Vec<usize> = term.index.iter().map(|i| i - 1).collect();
            form = form.add_scaled(term.value, &Form::monomial(&zero_based));
        }
        if let Some(c) = &self.coefficients {
            let dense = Form::new(3, c.clone())
                .map_err(|e| Error::invalid(format!("{field}.coefficients"), e.to_string()))?;
            form = &form + &dense;
        }
        Ok(form)
    }
}

fn lattice_from(field: &Option<Vec<f64>>) -> Result<Lattice> {
    match field {
        None => Ok(Lattice::unit()),
        Some(v) => Lattice::from_row_major(v)
            .map_err(|e| Error::invalid("payload.lattice_basis", e.to_string())),
    }
}

fn default_trials() -> usize {
    256
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointPayload {
    #[serde(default)]
    pub lattice_basis: Option<Vec<f64>>,
    pub phi: FormInput,
    #[serde(default = "default_trials")]
    pub comass_trials: usize,
    #[serde(default)]
    pub decompose: Option<FormInput>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HessianPayload {
    #[serde(default)]
    pub lattice_basis: Option<Vec<f64>>,
    pub phi: FormInput,
    #[serde(default)]
    pub expect_signature: Option<[usize; 3]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PathKind {
    Affine,
    Scaling,
    Polynomial,
}

fn default_rate() -> f64 {
    1.0
}

fn default_form_used() -> FormUsed {
    FormUsed::HessianForm
}

fn default_series_points() -> usize {
    65
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorollaryInput {
    #[serde(rename = "C")]
    pub c_bound: f64,
    /// A(t) = Σ a_k t^k.
    #[serde(rename = "A_coefficients")]
    pub a_coefficients: Vec<f64>,
    #[serde(rename = "A_integral")]
    pub a_integral: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathPayload {
    #[serde(default)]
    pub lattice_basis: Option<Vec<f64>>,
    pub path_kind: PathKind,
    pub coefficients: Vec<FormInput>,
    #[serde(default = "default_rate")]
    pub rate: f64,
    pub domain: [f64; 2],
    #[serde(default)]
    pub interval: Option<[f64; 2]>,
    #[serde(default = "default_form_used")]
    pub form_used: FormUsed,
    #[serde(default = "default_series_points")]
    pub series_points: usize,
    #[serde(default)]
    pub corollary: Option<CorollaryInput>,
    #[serde(default)]
    pub monitor: bool,
}

fn default_levels() -> usize {
    20
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KahlerPayload {
    pub form: IntersectionForm,
    pub alpha: ConeClass,
    pub omega: ConeClass,
    #[serde(default = "default_levels")]
    pub levels: usize,
    #[serde(default)]
    pub expect: Option<BoundaryDistance>,
}

/// A table written as CSV.
#[derive(Debug, Clone, Default)]
pub struct Series {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Series {
    fn new(header: &[&str]) -> Self {
        Series {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }
}

/// Everything a run produces before it is written out.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: Value,
    pub series: Option<Series>,
    /// False when the computation succeeded but a verdict is negative.
    pub verdict_ok: bool,
    pub summary: Vec<String>,
}

/// Formats every float with 17 significant digits.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

struct Float17 {
    pretty: PrettyFormatter<'static>,
}

impl Formatter for Float17 {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(format_float(value).as_bytes())
    }
    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.pretty.begin_array(w)
    }
    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.pretty.end_array(w)
    }
    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.pretty.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.pretty.end_array_value(w)
    }
    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.pretty.begin_object(w)
    }
    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.pretty.end_object(w)
    }
    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.pretty.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.pretty.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.pretty.end_object_value(w)
    }
}

/// Pretty JSON with 17-significant-digit floats and a trailing newline.
pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(
        &mut buf,
        Float17 {
            pretty: PrettyFormatter::new(),
        },
    );
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
}

pub fn to_csv_string(series: &Series) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&series.header)?;
    for row in &series.rows {
        w.write_record(row.iter().map(|v| format_float(*v)))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv emits UTF-8"))
}

fn check_artifact_name(field: &str, name: &str) -> Result<()> {
    let path = Path::new(name);
    let plain = !name.is_empty()
        && path
            .components()
            .all(|c| matches!(c, Component::Normal(_)));
    if plain {
        Ok(())
    } else {
        Err(Error::invalid(field, "must be a relative path without `..`"))
    }
}

pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let scenario: Scenario = serde_json::from_str(text)?;
    if scenario.version != SCENARIO_VERSION {
        return Err(Error::invalid("version", "only version 1 is supported"));
    }
    check_artifact_name("output.json", &scenario.output.json)?;
    if let Some(csv) = &scenario.output.csv {
        check_artifact_name("output.csv", csv)?;
    }
    if let Some(q) = &scenario.quadrature {
        q.validate()?;
    }
    if let Some(h) = scenario.fd_step {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::invalid("fd_step", "must be positive and finite"));
        }
    }
    Ok(scenario)
}

fn payload<T: for<'de> Deserialize<'de>>(value: &Value) -> Result<T> {
    serde_json::from_value(value.clone())
        .map_err(|e| Error::invalid("payload", e.to_string()))
}

/// Runs a parsed scenario without touching the filesystem.
pub fn evaluate(scenario: &Scenario, overrides: &Overrides) -> Result<Outcome> {
    let mut quad = scenario.quadrature.unwrap_or_default();
    if let Some(n) = overrides.quad_nodes {
        quad.nodes_per_segment = n;
    }
    quad.validate()?;
    let fd = FdConfig {
        step: overrides.fd_step.or(scenario.fd_step),
    };
    if let Some(h) = fd.step {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::invalid("fd_step", "must be positive and finite"));
        }
    }
    let seed = overrides.seed.unwrap_or(scenario.seed);
    match scenario.kind {
        Kind::Point => run_point(payload(&scenario.payload)?, seed),
        Kind::Hessian => run_hessian(payload(&scenario.payload)?, &fd),
        Kind::Path => run_path(payload(&scenario.payload)?, &quad),
        Kind::Kummer => run_kummer(payload(&scenario.payload)?),
        Kind::Kahler => run_kahler(payload(&scenario.payload)?, &quad),
    }
}

fn run_point(p: PointPayload, seed: u64) -> Result<Outcome> {
    let lattice = lattice_from(&p.lattice_basis)?;
    let pt = TorusModuliPoint::new(lattice, p.phi.to_form("payload.phi")?)?;
    let comass = comass_sample(pt.data(), p.comass_trials, seed)?;
    let mut report = serde_json::json!({
        "point": pt.data(),
        "covolume": pt.lattice().covolume(),
        "total_volume": pt.total_volume(),
        "potential_f": pt.potential_f(),
        "comass": comass,
    });
    if let Some(d) = &p.decompose {
        let eta = d.to_form("payload.decompose")?;
        let split = type_decompose(&eta, pt.data())?;
        let norms = |f: &Form| pt.data().inner3(f, f).max(0.0).sqrt();
        report["decomposition"] = serde_json::json!({
            "pi1": split.pi1, "pi7": split.pi7, "pi27": split.pi27,
            "norms": [norms(&split.pi1), norms(&split.pi7), norms(&split.pi27)],
        });
    }
    let summary = vec![
        format!("total volume {}", format_float(pt.total_volume())),
        format!("comass sample max {} over {} frames", format_float(comass.max_value), comass.trials),
    ];
    Ok(Outcome {
        report,
        series: None,
        verdict_ok: true,
        summary,
    })
}

fn run_hessian(p: HessianPayload, fd: &FdConfig) -> Result<Outcome> {
    let lattice = lattice_from(&p.lattice_basis)?;
    let phi = p.phi.to_form("payload.phi")?;
    let pt = TorusModuliPoint::new(lattice, phi.clone())?;
    let h = hessian_f(&pt, fd)?;
    let d2f_phi_phi = pt.hessian_form(&phi, &phi)?;
    let mut series = Series::new(&["index", "eigenvalue"]);
    for (i, e) in h.eigenvalues.iter().enumerate() {
        series.rows.push(vec![i as f64, *e]);
    }
    let verdict_ok = p.expect_signature.is_none_or(|s| s == h.signature);
    let summary = vec![
        format!("signature {:?}", h.signature),
        format!("D2F(phi, phi) = {}", format_float(d2f_phi_phi)),
        format!(
            "type-7 angle {}",
            h.type7_angle.map_or("n/a".to_string(), format_float)
        ),
    ];
    Ok(Outcome {
        report: serde_json::json!({ "hessian": h, "d2f_phi_phi": d2f_phi_phi }),
        series: Some(series),
        verdict_ok,
        summary,
    })
}

fn build_path(p: &PathPayload) -> Result<ModuliPath> {
    let lattice = lattice_from(&p.lattice_basis)?;
    let forms = p
        .coefficients
        .iter()
        .enumerate()
        .map(|(i, f)| f.to_form(&format!("payload.coefficients[{i}]")))
        .collect::<Result<Vec<_>>>()?;
    let [low, high] = p.domain;
    match p.path_kind {
        PathKind::Affine => {
            if forms.len() != 2 {
                return Err(Error::invalid("payload.coefficients", "affine paths take [base, direction]"));
            }
            ModuliPath::affine(lattice, forms[0].clone(), forms[1].clone(), low, high)
        }
        PathKind::Scaling => {
            if forms.len() != 1 {
                return Err(Error::invalid("payload.coefficients", "scaling paths take [base]"));
            }
            ModuliPath::scaling(lattice, forms[0].clone(), p.rate, low, high)
        }
        PathKind::Polynomial => ModuliPath::polynomial(lattice, forms, low, high),
    }
}

fn run_path(p: PathPayload, quad: &QuadratureSpec) -> Result<Outcome> {
    if p.series_points < 2 {
        return Err(Error::invalid("payload.series_points", "must be at least 2"));
    }
    let path = build_path(&p)?;
    let [tau, t_high] = p.interval.unwrap_or(p.domain);
    let report = path_report(&path, tau, t_high, p.form_used, quad)?;
    let cs = cauchy_schwarz_check(&report);
    let prop21_ok = match p.form_used {
        FormUsed::HessianForm => report.relative_residual() < 1e-6,
        FormUsed::L2Pairing => true,
    };
    let mut out = serde_json::json!({
        "report": report,
        "cauchy_schwarz_holds": cs,
        "prop21_relative_residual": report.relative_residual(),
    });
    let mut verdict_ok = cs && prop21_ok;
    let mut summary = vec![
        format!("energy ({}) {}", p.form_used, format_float(report.energy_direct)),
        format!("length {}", format_float(report.length)),
        format!("cauchy-schwarz {}", if cs { "holds" } else { "FAILS" }),
    ];
    if let Some(c) = &p.corollary {
        let a = |t: f64| c.a_coefficients.iter().rev().fold(0.0, |acc, k| acc * t + k);
        let v = corollary22_check(&path, c.c_bound, &a, c.a_integral, quad)?;
        verdict_ok &= v.hypotheses_hold_on_samples;
        summary.push(format!(
            "sampled hypotheses {}; energy bound {}",
            if v.hypotheses_hold_on_samples { "hold" } else { "FAIL" },
            format_float(v.energy_bound)
        ));
        out["corollary"] = serde_json::to_value(&v)?;
    }
    let mut series = Series::new(&["t", "h", "speed_squared", "volume"]);
    for &t in &segment_breaks(tau, t_high, p.series_points - 1) {
        let pt = path.point_at(t)?;
        series.rows.push(vec![
            t,
            h_function(&path, t)?,
            path.speed_squared(t, p.form_used)?,
            pt.total_volume(),
        ]);
    }
    if p.monitor {
        let (low, high) = path.domain();
        let floor = if low > 0.0 { low } else { low + (high - low) * 1e-6 };
        let ts = segment_breaks(floor, high, p.series_points - 1);
        let m = pd_flux_monitor(&path, &path.velocity(high), &ts)?;
        summary.push(format!("flux monitor: {:?}", m.verdict));
        out["monitor"] = serde_json::to_value(&m)?;
    }
    Ok(Outcome {
        report: out,
        series: Some(series),
        verdict_ok,
        summary,
    })
}

fn run_kummer(model: KummerModel) -> Result<Outcome> {
    let cert = energy_upper_bound(&model)?;
    Ok(Outcome {
        summary: cert.audit(),
        verdict_ok: cert.valid,
        report: serde_json::to_value(&cert)?,
        series: None,
    })
}

fn run_kahler(p: KahlerPayload, quad: &QuadratureSpec) -> Result<Outcome> {
    let s = segment_series(&p.alpha, &p.omega, &p.form, p.levels, quad)?;
    let mut series = Series::new(&["tau", "energy", "length"]);
    for r in &s.rows {
        series.rows.push(vec![r.tau, r.energy, r.length]);
    }
    let summary = vec![
        format!("boundary class is at {:?} distance", s.classification),
        format!("length growth per log(1/tau): {}", format_float(s.length_log_slope)),
    ];
    Ok(Outcome {
        verdict_ok: p.expect.is_none_or(|e| e == s.classification),
        report: serde_json::to_value(&s)?,
        series: Some(series),
        summary,
    })
}

/// Parses, evaluates and writes artifacts; returns the outcome and the
/// written paths. Nothing is written if any step fails.
pub fn run_text(text: &str, overrides: &Overrides) -> Result<(Outcome, Vec<PathBuf>)> {
    let scenario = parse_scenario(text)?;
    let outcome = evaluate(&scenario, overrides)?;
    let json = to_json_string(&outcome.report)?;
    let csv = match (&outcome.series, &scenario.output.csv) {
        (Some(series), Some(name)) => Some((name.clone(), to_csv_string(series)?)),
        _ => None,
    };
    let dir = overrides.out_dir.clone().unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir)?;
    let mut written = Vec::new();
    let json_path = dir.join(&scenario.output.json);
    if let Some(parent) = json_path.parent() {
        fs::create_dir_all(parent)?;
    }
    fs::write(&json_path, json)?;
    written.push(json_path);
    if let Some((name, text)) = csv {
        let path = dir.join(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(&path, text)?;
        written.push(path);
    }
    Ok((outcome, written))
}

pub fn run_file(path: &Path, overrides: &Overrides) -> Result<(Outcome, Vec<PathBuf>)> {
    let text = fs::read_to_string(path)?;
    run_text(&text, overrides)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_have_seventeen_digits() {
        assert_eq!(format_float(0.1), "1.0000000000000001e-1");
        let s = to_json_string(&serde_json::json!({"x": 7.0, "n": 3, "v": f64::NAN})).unwrap();
        assert!(s.contains("\"x\": 7.0000000000000000e0"));
        assert!(s.contains("\"n\": 3"));
        assert!(s.contains("\"v\": null"));
        let back: Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back["x"], 7.0);
    }

    #[test]
    fn form_input_builds_reference() {
        let f = FormInput {
            reference_scale: 2.0,
            terms: vec![Term { index: vec![2, 1, 3], value: 1.0 }],
            coefficients: None,
        };
        let form = f.to_form("phi").unwrap();
        let expected = reference_phi().scaled(2.0).add_scaled(-1.0, &Form::monomial(&[0, 1, 2]));
        assert!(form.max_abs_diff(&expected) < 1e-15);
        let bad = FormInput {
            terms: vec![Term { index: vec![0, 1, 2], value: 1.0 }],
            ..Default::default()
        };
        assert!(matches!(bad.to_form("phi"), Err(Error::Invalid { .. })));
    }

    #[test]
    fn every_example_parses() {
        for e in EXAMPLES {
            let s = parse_scenario(e.source).unwrap_or_else(|err| panic!("{}: {err}", e.name));
            assert_eq!(s.version, SCENARIO_VERSION);
        }
        let names: Vec<_> = EXAMPLES.iter().map(|e| e.name).collect();
        for required in ["torus-signature", "kummer-typeI-unit", "kahler-null-boundary"] {
            assert!(names.contains(&required));
        }
    }

    #[test]
    fn schema_lists_kinds() {
        let schema: Value = serde_json::from_str(SCENARIO_SCHEMA).unwrap();
        let kinds = &schema["properties"]["kind"]["enum"];
        assert_eq!(kinds.as_array().unwrap().len(), 5);
    }

    #[test]
    fn unknown_fields_are_named() {
        let err = parse_scenario(r#"{"version":1,"kind":"kummer","payload":{},"sed":3}"#).unwrap_err();
        assert!(err.to_string().contains("sed"));
        let s = parse_scenario(r#"{"version":1,"kind":"kahler","payload":{"form":{"rank":2,"n":2,"entries":[]},"alpha":[1,0],"omega":[0,1],"levls":3}}"#).unwrap();
        let err = evaluate(&s, &Overrides::default()).unwrap_err();
        assert!(err.to_string().contains("levls"));
        let err = parse_scenario(r#"{"version":2,"kind":"kummer","payload":{}}"#).unwrap_err();
        assert!(err.to_string().contains("version"));
        let err = parse_scenario(r#"{"version":1,"kind":"kummer","payload":{},"output":{"json":"../x"}}"#).unwrap_err();
        assert!(err.to_string().contains("output.json"));
    }

    #[test]
    fn kummer_example_certifies_six() {
        let s = parse_scenario(example("kummer-typeI-unit").unwrap().source).unwrap();
        let o = evaluate(&s, &Overrides::default()).unwrap();
        assert!(o.verdict_ok);
        assert_eq!(o.report["bounds"]["energy_bound"], 6.0);
        assert_eq!(o.report["valid"], true);
    }
}
