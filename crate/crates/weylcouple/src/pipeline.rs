//! Scenario configs, the analysis pipeline and report assembly.
//!
//! Stages run in a fixed order; a failing stage is recorded under `errors`
//! and the remaining stages still run on whatever inputs they have.

use crate::asymptotics::{class_membership, ClassMembership, Regime};
use crate::coupling::{
    nonnegativity, probe_denominator, verdict, veselic_bound, CouplingModel, KernelCondition, NonnegReport, Nonnegativity,
    RegularityVerdict, SideClass,
};
use crate::error::{Error, Result};
use crate::nevanlinna::{classify, ClassReport, NevanlinnaExpr, SamplingPlan, Tri};
use crate::properties::{
    b_certify_discretized, b_certify_schur, d_certify, d_ratio, derive_properties, DOptions, Property, PropertyCertificate,
    SideFacts, Subject,
};
use crate::quad::decade_grid;
use crate::sl_weyl::{self, HalfLineProblem, Triple};
use crate::sweep;
use num_complex::Complex64 as C;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

pub const SCHEMA_VERSION: &str = "1.0";

/// One side of the model: an expression, a catalog id or a Sturm–Liouville problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SideSpec {
    Expr(NevanlinnaExpr),
    Catalog(String),
    SlProblem(HalfLineProblem),
}

impl SideSpec {
    fn resolve(&self) -> Result<(NevanlinnaExpr, Option<HalfLineProblem>)> {
        match self {
            SideSpec::Expr(e) => Ok((e.clone(), None)),
            SideSpec::Catalog(id) => {
                let entry = sl_weyl::closed_form(id)?;
                Ok((entry.closed_form, entry.problem))
            }
            SideSpec::SlProblem(p) => {
                p.validate()?;
                Ok((NevanlinnaExpr::sl(p.clone()), Some(p.clone())))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub m_plus: SideSpec,
    pub m_minus: SideSpec,
    #[serde(default)]
    pub kernel_condition: KernelCondition,
}

impl ModelSpec {
    pub fn build(&self, label: &str) -> Result<CouplingModel> {
        let (mp, pp) = self.m_plus.resolve()?;
        let (mm, pm) = self.m_minus.resolve()?;
        let mut model = CouplingModel::new(mp, mm, self.kernel_condition);
        model.sl_problem_plus = pp;
        model.sl_problem_minus = pm;
        model.label = label.to_string();
        Ok(model)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Certification {
    /// Nodes per decade for the D-ratio grids.
    pub d_per_decade: usize,
    /// Run the Schur test and the discretized norm on closed-form sides.
    pub direct_b: bool,
    /// Matrix size for the discretized norm.
    pub norm_size: usize,
}

impl Default for Certification {
    fn default() -> Self {
        Certification { d_per_decade: 64, direct_b: true, norm_size: 160 }
    }
}

impl Certification {
    fn validate(&self) -> Result<()> {
        if self.d_per_decade == 0 || self.norm_size < 8 {
            return Err(Error::Config("d_per_decade must be positive and norm_size at least 8".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridKind {
    /// `y, re, im` of `m(iy)`
    Function,
    /// `y, ratio` of the pair D-ratio
    DRatio,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub kind: GridKind,
    #[serde(default)]
    pub function: Option<SideSpec>,
    #[serde(default)]
    pub model: Option<ModelSpec>,
    pub window: [f64; 2],
    #[serde(default = "default_per_decade")]
    pub per_decade: usize,
    #[serde(default)]
    pub output: Option<String>,
}

fn default_per_decade() -> usize {
    16
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    #[serde(default)]
    pub report: Option<String>,
    #[serde(default)]
    pub grids: Vec<GridSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema_version: String,
    #[serde(default)]
    pub label: String,
    pub model: ModelSpec,
    #[serde(default)]
    pub certification: Certification,
    #[serde(default)]
    pub outputs: Outputs,
    /// Expected verdict fields, e.g. `{"zero_regular": "NO"}`.
    #[serde(default)]
    pub expect: BTreeMap<String, Tri>,
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        if cfg.schema_version.split('.').next() != SCHEMA_VERSION.split('.').next() {
            return Err(Error::Config(format!("unsupported schema_version {}", cfg.schema_version)));
        }
        cfg.certification.validate()?;
        for k in cfg.expect.keys() {
            if !["infinity_regular", "zero_regular", "fundamentally_reducible"].contains(&k.as_str()) {
                return Err(Error::Config(format!("unknown expectation field {k}")));
            }
        }
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SideReport {
    pub class: Option<ClassReport>,
    pub membership: Option<ClassMembership>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub field: String,
    pub expected: Tri,
    pub actual: Option<Tri>,
    pub pass: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Status {
    Pass,
    Fail,
    Complete,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub schema_version: String,
    pub label: String,
    pub versions: BTreeMap<String, String>,
    pub tolerances: BTreeMap<String, f64>,
    pub kernel_condition: KernelCondition,
    pub flags: Vec<String>,
    pub m_plus: SideReport,
    pub m_minus: SideReport,
    pub nonnegativity: Option<NonnegReport>,
    pub certificates: Vec<PropertyCertificate>,
    pub verdict: Option<RegularityVerdict>,
    pub veselic_bound: BTreeMap<String, f64>,
    pub errors: BTreeMap<String, String>,
    pub checks: Vec<Check>,
    pub status: Status,
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    pub fn field(&self, name: &str) -> Option<Tri> {
        let v = self.verdict.as_ref()?;
        match name {
            "infinity_regular" => Some(v.infinity_regular),
            "zero_regular" => Some(v.zero_regular),
            "fundamentally_reducible" => Some(v.fundamentally_reducible),
            _ => None,
        }
    }
}

const PROBES: [(f64, f64); 6] = [(0.0, 1.0), (0.0, -1.0), (1.0, 1.0), (-1.0, 2.0), (3.0, -0.5), (-0.25, 0.1)];

fn side_report(m: &NevanlinnaExpr, errors: &mut BTreeMap<String, String>, name: &str) -> SideReport {
    let class = match classify(m, &SamplingPlan::for_expr(m)) {
        Ok(c) => Some(c),
        Err(e) => {
            errors.insert(format!("classify:{name}"), e.to_string());
            None
        }
    };
    let membership = class.as_ref().map(|c| class_membership(m, c));
    SideReport { class, membership }
}

fn gather_certificates(
    model: &CouplingModel,
    cert: &Certification,
    errors: &mut BTreeMap<String, String>,
) -> Vec<PropertyCertificate> {
    let numeric = model.m_plus.is_numerical() || model.m_minus.is_numerical();
    let per_decade = if numeric { cert.d_per_decade.min(8) } else { cert.d_per_decade };
    let opts = DOptions { per_decade, conjugate: false };
    type Job<'a> = (String, Box<dyn Fn() -> Result<PropertyCertificate> + Sync + Send + 'a>);
    let mut jobs: Vec<Job> = vec![];
    for regime in [Regime::AtInf, Regime::AtZero] {
        let tag = if regime == Regime::AtInf { "inf" } else { "zero" };
        jobs.push((format!("d-{tag}:pair"), Box::new(move || d_certify(&model.m_plus, &model.m_minus, regime, opts))));
        for (m, subj) in [(&model.m_plus, Subject::MPlus), (&model.m_minus, Subject::MMinus)] {
            let name = if subj == Subject::MPlus { "m_plus" } else { "m_minus" };
            jobs.push((format!("d-{tag}:{name}"), Box::new(move || d_certify(m, m, regime, opts).map(|c| c.with_subject(subj)))));
            if cert.direct_b && !m.is_numerical() {
                jobs.push((
                    format!("b-{tag}:{name}:schur"),
                    Box::new(move || b_certify_schur(m, regime, None).map(|c| c.with_subject(subj))),
                ));
                let n = cert.norm_size;
                jobs.push((
                    format!("b-{tag}:{name}:norm"),
                    Box::new(move || b_certify_discretized(m, regime, n).map(|c| c.with_subject(subj))),
                ));
            }
        }
    }
    let results = sweep::map(&jobs, |(_, job)| job());
    let mut certs = vec![];
    for ((name, _), r) in jobs.iter().zip(results) {
        match r {
            Ok(c) => certs.push(c),
            Err(e) => {
                errors.insert(format!("certify:{name}"), e.to_string());
            }
        }
    }
    certs
}

fn tolerances(cert: &Certification) -> BTreeMap<String, f64> {
    BTreeMap::from([
        ("d_per_decade".to_string(), cert.d_per_decade as f64),
        ("norm_size".to_string(), cert.norm_size as f64),
        ("slope_tol".to_string(), crate::properties::SLOPE_TOL),
        ("weyl_rtol".to_string(), 1e-8),
    ])
}

/// Runs the full pipeline on a model. Never fails: stage errors land in the report.
pub fn analyze_model(model: &CouplingModel, cert: &Certification, expect: &BTreeMap<String, Tri>) -> Report {
    let mut errors = BTreeMap::new();
    let mut flags = vec![];
    let probes: Vec<C> = PROBES.iter().map(|&(a, b)| C::new(a, b)).collect();
    let mut refuse = false;
    match probe_denominator(model, &probes) {
        Ok(Some(_)) => {
            let all_zero = probes
                .iter()
                .all(|z| crate::coupling::denominator(model, *z).map(|d| d.norm() <= 1e-12 * (1.0 + z.norm())).unwrap_or(false));
            if all_zero {
                flags.push("EMPTY_RESOLVENT_SET".to_string());
                refuse = true;
            } else {
                flags.push("DENOMINATOR_ZERO_AT_PROBE".to_string());
            }
        }
        Ok(None) => {}
        Err(e) => {
            errors.insert("denominator".into(), e.to_string());
        }
    }
    let plus = side_report(&model.m_plus, &mut errors, "m_plus");
    let minus = side_report(&model.m_minus, &mut errors, "m_minus");
    let nonneg = match nonnegativity(model) {
        Ok(r) => Some(r),
        Err(e) => {
            errors.insert("nonnegativity".into(), e.to_string());
            None
        }
    };
    let mut certs = if refuse { vec![] } else { gather_certificates(model, cert, &mut errors) };
    if let (Some(pc), Some(pm), Some(mc), Some(mm)) = (&plus.class, &plus.membership, &minus.class, &minus.membership) {
        let single = |s: Subject| -> Vec<PropertyCertificate> {
            certs.iter().filter(|c| c.subject == s && matches!(c.property, Property::DInf | Property::DZero)).cloned().collect()
        };
        let (sp, sm) = (single(Subject::MPlus), single(Subject::MMinus));
        let implied = derive_properties(
            &SideFacts { class: pc, membership: pm, single_d: &sp },
            &SideFacts { class: mc, membership: mm, single_d: &sm },
        );
        certs.extend(implied);
    }
    let mut verdict_out = None;
    if refuse {
        errors.insert("verdict".into(), "resolvent set is empty: m+(z) + m-(-z) vanishes identically".into());
    } else if let (Some(n), Some(pc), Some(pm), Some(mc), Some(mm)) =
        (&nonneg, &plus.class, &plus.membership, &minus.class, &minus.membership)
    {
        match verdict(model, n, &SideClass { class: pc, membership: pm }, &SideClass { class: mc, membership: mm }, &certs) {
            Ok(v) => verdict_out = Some(v),
            Err(e) => {
                errors.insert("verdict".into(), e.to_string());
            }
        }
    } else {
        errors.insert("verdict".into(), "missing inputs from earlier stages".into());
    }
    let mut bounds = BTreeMap::new();
    for (tag, d, b) in [("inf", Property::DInf, Property::BInf), ("zero", Property::DZero, Property::BZero)] {
        let find = |p: Property, s: Subject| {
            certs
                .iter()
                .filter(|c| c.property == p && c.subject == s && c.bounded())
                .find(|c| c.constants.contains_key(if p == d { "C1" } else { "C2" }))
        };
        if let (Some(dc), Some(bp), Some(bm)) = (find(d, Subject::Pair), find(b, Subject::MPlus), find(b, Subject::MMinus)) {
            if let Ok(v) = veselic_bound(dc, bp, bm) {
                bounds.insert(tag.to_string(), v);
            }
        }
    }
    if nonneg.as_ref().is_some_and(|n| n.verdict == Nonnegativity::NotNonnegative) {
        flags.push("NOT_NONNEGATIVE".to_string());
    }
    let mut report = Report {
        schema_version: SCHEMA_VERSION.to_string(),
        label: model.label.clone(),
        versions: BTreeMap::from([("weylcouple".to_string(), env!("CARGO_PKG_VERSION").to_string())]),
        tolerances: tolerances(cert),
        kernel_condition: model.kernel_condition,
        flags,
        m_plus: plus,
        m_minus: minus,
        nonnegativity: nonneg,
        certificates: certs,
        verdict: verdict_out,
        veselic_bound: bounds,
        errors,
        checks: vec![],
        status: Status::Complete,
    };
    if !expect.is_empty() {
        for (field, want) in expect {
            let actual = report.field(field);
            report.checks.push(Check { field: field.clone(), expected: *want, actual, pass: actual == Some(*want) });
        }
        report.status = if report.checks.iter().all(|c| c.pass) { Status::Pass } else { Status::Fail };
    }
    report
}

pub fn run_analyze(config: &ScenarioConfig) -> Result<Report> {
    let model = config.model.build(&config.label)?;
    let report = analyze_model(&model, &config.certification, &config.expect);
    for g in &config.outputs.grids {
        let csv = emit_grid(g)?;
        if let Some(path) = &g.output {
            std::fs::write(path, csv).map_err(|e| Error::Config(format!("{path}: {e}")))?;
        }
    }
    if let Some(path) = &config.outputs.report {
        std::fs::write(path, report.to_json()).map_err(|e| Error::Config(format!("{path}: {e}")))?;
    }
    Ok(report)
}

/// Ids accepted by [`example_config`].
pub const EXAMPLE_IDS: [&str; 5] =
    ["smooth-coefficients", "short-range-potential", "power-weights", "singular-zero", "quarter-power-coupling"];

fn relaxing(limit: f64, amplitude: f64) -> sl_weyl::Coefficient {
    sl_weyl::Coefficient::Relaxing { limit, amplitude, rate: 1.0 }
}

pub fn example_config(id: &str) -> Result<ScenarioConfig> {
    let cat = |s: &str| SideSpec::Catalog(s.to_string());
    let (label, model, expect): (&str, ModelSpec, Vec<(&str, Tri)>) = match id {
        "smooth-coefficients" => {
            let side = |limit, amp| {
                let mut p = HalfLineProblem::new(
                    relaxing(limit, amp),
                    sl_weyl::Coefficient::constant(0.0),
                    sl_weyl::Coefficient::constant(1.0),
                    Triple::NeumannStyle,
                );
                p.truncation.rtol = 1e-6;
                SideSpec::SlProblem(p)
            };
            (
                "second-order expression with smooth p, w = 1, q = 0",
                ModelSpec { m_plus: side(1.0, 0.5), m_minus: side(2.0, -0.5), kernel_condition: KernelCondition::Unknown },
                vec![("infinity_regular", Tri::Yes)],
            )
        }
        "short-range-potential" => (
            "m± = a±/(b± + sqrt(-z)), low-energy model of a short-range potential (asymptotic stand-in)",
            ModelSpec {
                m_plus: cat("short-range(1,1)"),
                m_minus: cat("short-range(2,0.5)"),
                kernel_condition: KernelCondition::True,
            },
            vec![("infinity_regular", Tri::Yes), ("zero_regular", Tri::Yes), ("fundamentally_reducible", Tri::Yes)],
        ),
        "power-weights" => (
            "p = t^beta, w = t^alpha on both half-lines with alpha = beta = 0",
            ModelSpec {
                m_plus: cat("power-weights(0,0)"),
                m_minus: cat("power-weights(0,0)"),
                kernel_condition: KernelCondition::True,
            },
            vec![("fundamentally_reducible", Tri::Yes)],
        ),
        "singular-zero" => (
            "m+ = m- = 1/sqrt(-z) - 1/z",
            ModelSpec {
                m_plus: cat("singular-at-zero"),
                m_minus: cat("singular-at-zero"),
                kernel_condition: KernelCondition::True,
            },
            vec![("zero_regular", Tri::No), ("infinity_regular", Tri::Yes)],
        ),
        "quarter-power-coupling" => (
            "m+ = -sqrt(-z), m- = -sqrt(2) (-z)^(1/4)",
            ModelSpec { m_plus: cat("free-dirichlet"), m_minus: cat("quarter-power"), kernel_condition: KernelCondition::True },
            vec![("fundamentally_reducible", Tri::Yes)],
        ),
        _ => return Err(Error::UnknownId(id.to_string())),
    };
    Ok(ScenarioConfig {
        schema_version: SCHEMA_VERSION.to_string(),
        label: format!("{id}: {label}"),
        model,
        certification: Certification::default(),
        outputs: Outputs::default(),
        expect: expect.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
    })
}

pub fn run_example(id: &str) -> Result<Report> {
    run_analyze(&example_config(id)?)
}

/// CSV for a grid spec: `y,re,im` or `y,ratio` on `per_decade` log-spaced nodes.
pub fn emit_grid(spec: &GridSpec) -> Result<String> {
    let [lo, hi] = spec.window;
    if !(lo > 0.0 && hi > lo && lo.is_finite() && hi.is_finite()) || spec.per_decade == 0 {
        return Err(Error::Config(format!("empty or invalid window [{lo}, {hi}]")));
    }
    let ys = decade_grid(lo, hi, spec.per_decade);
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(vec![]);
    let io = |e: csv::Error| Error::Config(e.to_string());
    match spec.kind {
        GridKind::Function => {
            let (f, _) =
                spec.function.as_ref().ok_or_else(|| Error::Config("function grid needs `function`".into()))?.resolve()?;
            let vals = sweep::map(&ys, |y| f.eval(0.0, *y));
            w.write_record(["y", "re", "im"]).map_err(io)?;
            for (y, v) in ys.iter().zip(vals) {
                let v = v?;
                w.write_record([y.to_string(), v.re.to_string(), v.im.to_string()]).map_err(io)?;
            }
        }
        GridKind::DRatio => {
            let model = spec.model.as_ref().ok_or_else(|| Error::Config("d_ratio grid needs `model`".into()))?.build("")?;
            let vals = sweep::map(&ys, |y| d_ratio(&model.m_plus, &model.m_minus, *y));
            w.write_record(["y", "ratio"]).map_err(io)?;
            for (y, v) in ys.iter().zip(vals) {
                w.write_record([y.to_string(), v?.to_string()]).map_err(io)?;
            }
        }
    }
    let bytes = w.into_inner().map_err(|e| Error::Config(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("ascii csv"))
}
