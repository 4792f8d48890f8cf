use std::path::{Path, PathBuf};

use qcap_core::capacity::{
    holevo_capacity, qubit_grid_oracle, shannon_capacity, uep_bound, CapacityResult, OptimizerConfig,
};
use qcap_core::channel::{ChannelSpec, Povm, QuantumChannel, QubitPovmParam};
use qcap_core::info::Ensemble;
use qcap_core::parallel::Execution;
use qcap_core::protocol::{additivity_experiment_multi, identity_sweep};
use qcap_core::qmat::DensityMatrix;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::report::{RunReport, Table};
use crate::Failure;

/// Slack on the ordering checks between capacity estimates.
const ORDER_TOL: f64 = 1e-4;
/// Tolerance on both chain identities.
const IDENTITY_TOL: f64 = 1e-9;
/// Holevo minus Shannon above this counts as a strict gap.
const STRICT_GAP: f64 = 1e-3;

pub struct Loaded {
    pub spec: ChannelSpec,
    pub channel: QuantumChannel,
}

pub fn load(path: &Path) -> Result<Loaded, Failure> {
    let text = if path.as_os_str() == "-" {
        std::io::read_to_string(std::io::stdin())
    } else {
        std::fs::read_to_string(path)
    }
    .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
    let spec = ChannelSpec::parse(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    let channel = spec.build()?;
    Ok(Loaded { spec, channel })
}

/// SHA-256 of the canonical spec JSON, one spec per line.
pub fn digest(specs: &[&ChannelSpec]) -> String {
    let mut h = Sha256::new();
    for (i, s) in specs.iter().enumerate() {
        if i > 0 {
            h.update(b"\n");
        }
        h.update(serde_json::to_string(&s.to_json()).expect("spec serializes").as_bytes());
    }
    hex::encode(h.finalize())
}

fn bloch(rho: &DensityMatrix) -> Value {
    match rho.bloch_vector() {
        Some(r) => json!(r),
        None => json!({"dim": rho.dim(), "purity": rho.purity()}),
    }
}

fn ensemble_summary(e: &Ensemble) -> Value {
    Value::Array(e.iter().map(|(p, s)| json!({"weight": p, "bloch": bloch(s)})).collect())
}

fn povm_summary(m: &Povm) -> Value {
    match QubitPovmParam::from_povm(m) {
        Ok(q) => json!(q.elements),
        Err(_) => json!({"dim": m.dim(), "outcomes": m.len()}),
    }
}

fn argmax_summary(r: &CapacityResult) -> Value {
    let mut out = serde_json::Map::new();
    out.insert("value".into(), json!(r.value));
    out.insert("converged".into(), json!(r.converged));
    if let Some(e) = &r.argmax_ensemble {
        out.insert("ensemble".into(), ensemble_summary(e));
    }
    if let Some(m) = &r.argmax_povm {
        out.insert("povm".into(), povm_summary(m));
    }
    if let Some(rho) = &r.argmax_rho {
        out.insert("rho".into(), bloch(rho));
    }
    Value::Object(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Which {
    Shannon,
    Holevo,
    Uep,
    All,
}

impl Which {
    fn includes(self, other: Which) -> bool {
        self == Which::All || self == other
    }
}

#[derive(Default)]
struct Estimates {
    shannon: Option<CapacityResult>,
    holevo: Option<CapacityResult>,
    uep: Option<CapacityResult>,
}

fn estimate(ch: &QuantumChannel, which: Which, cfg: &OptimizerConfig) -> Result<Estimates, Failure> {
    Ok(Estimates {
        shannon: which
            .includes(Which::Shannon)
            .then(|| shannon_capacity(ch, cfg))
            .transpose()?,
        holevo: which
            .includes(Which::Holevo)
            .then(|| holevo_capacity(ch, cfg))
            .transpose()?,
        uep: which.includes(Which::Uep).then(|| uep_bound(ch, cfg)).transpose()?,
    })
}

fn ordering_checks(report: &mut RunReport, prefix: &str, est: &Estimates) {
    if let Some(s) = &est.shannon {
        if let Some(h) = &est.holevo {
            report.check(
                format!("{prefix}shannon <= holevo"),
                s.value <= h.value + ORDER_TOL,
                format!("{} <= {} + {ORDER_TOL}", s.value, h.value),
            );
        }
        if let Some(u) = &est.uep {
            report.check(
                format!("{prefix}shannon <= uep"),
                s.value <= u.value + ORDER_TOL,
                format!("{} <= {} + {ORDER_TOL}", s.value, u.value),
            );
        }
    }
}

pub fn capacity(path: &Path, which: Which, cfg: &OptimizerConfig) -> Result<RunReport, Failure> {
    let l = load(path)?;
    let mut report = RunReport::new("capacity", Some(digest(&[&l.spec])), cfg);
    let est = estimate(&l.channel, which, cfg)?;
    let mut details = serde_json::Map::new();
    for (name, r) in [("shannon", &est.shannon), ("holevo", &est.holevo), ("uep", &est.uep)] {
        if let Some(r) = r {
            report.value(name, r.value, Some(ORDER_TOL));
            details.insert(name.into(), argmax_summary(r));
        }
    }
    ordering_checks(&mut report, "", &est);
    report.details = Value::Object(details);
    Ok(report)
}

pub fn identity_check(
    instances: usize,
    exec: Execution,
    fault: bool,
    cfg: &OptimizerConfig,
) -> Result<RunReport, Failure> {
    if instances == 0 {
        return Err(Failure::Usage("--instances must be at least 1".into()));
    }
    let mut report = RunReport::new("identity-check", None, cfg);
    let s = identity_sweep(instances, cfg.seed, exec, fault)?;
    report.value("instances", instances as f64, None);
    report.value("max_quantum_gap", s.max_quantum_gap, Some(IDENTITY_TOL));
    report.value("max_classical_gap", s.max_classical_gap, Some(IDENTITY_TOL));
    report.value("max_cross_gap", s.max_cross_gap, Some(IDENTITY_TOL));
    report.check(
        "quantum chain identity",
        s.max_quantum_gap <= IDENTITY_TOL,
        format!("max gap {:e}", s.max_quantum_gap),
    );
    report.check(
        "classical chain identity",
        s.max_classical_gap <= IDENTITY_TOL && s.max_cross_gap <= IDENTITY_TOL,
        format!(
            "max residual {:e}, max quantum/classical mismatch {:e}",
            s.max_classical_gap, s.max_cross_gap
        ),
    );
    Ok(report)
}

pub fn additivity(paths: &[PathBuf], depth: usize, cfg: &OptimizerConfig) -> Result<RunReport, Failure> {
    if !(2..=3).contains(&depth) {
        return Err(Failure::Usage(format!("--depth must be 2 or 3, got {depth}")));
    }
    let loaded = paths.iter().map(|p| load(p)).collect::<Result<Vec<_>, _>>()?;
    let uses: Vec<&Loaded> = match loaded.len() {
        1 => vec![&loaded[0]; depth],
        n if n == depth => loaded.iter().collect(),
        n => {
            return Err(Failure::Usage(format!(
                "give one channel file or exactly {depth}, got {n}"
            )))
        }
    };
    let specs: Vec<&ChannelSpec> = uses.iter().map(|l| &l.spec).collect();
    let channels: Vec<QuantumChannel> = uses.iter().map(|l| l.channel.clone()).collect();
    let mut report = RunReport::new("additivity", Some(digest(&specs)), cfg);
    let r = additivity_experiment_multi(&channels, cfg)?;
    for (k, c) in r.capacities.iter().enumerate() {
        report.value(format!("c{}", k + 1), *c, None);
    }
    report.value("c_sum", r.c_sum, None);
    report.value("conditional_best", r.conditional_best, Some(r.upper_tol));
    report.value("product_value", r.product_value, Some(r.lower_tol));
    report.check(
        "conditional search <= sum of capacities",
        r.upper_ok,
        format!("{} <= {} + {}", r.conditional_best, r.c_sum, r.upper_tol),
    );
    report.check(
        "product strategy >= sum of capacities",
        r.lower_ok,
        format!("{} >= {} - {}", r.product_value, r.c_sum, r.lower_tol),
    );
    report.details = json!({"depth": depth});
    Ok(report)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Family {
    Depolarizing,
    AmplitudeDamping,
    BitFlip,
    PhaseDamping,
}

impl Family {
    fn spec(self, x: f64) -> ChannelSpec {
        match self {
            Family::Depolarizing => ChannelSpec::Depolarizing { dim: 2, p: x },
            Family::AmplitudeDamping => ChannelSpec::AmplitudeDamping { gamma: x },
            Family::BitFlip => ChannelSpec::BitFlip { p: x },
            Family::PhaseDamping => ChannelSpec::PhaseDamping { lambda: x },
        }
    }
}

pub const SWEEP_HEADER: [&str; 6] = [
    "param",
    "shannon",
    "holevo",
    "uep",
    "holevo_minus_shannon",
    "strict_gap",
];

pub fn sweep(
    family: Family,
    from: f64,
    to: f64,
    step: f64,
    which: Which,
    cfg: &OptimizerConfig,
) -> Result<(RunReport, Table), Failure> {
    if !(step > 0.0 && from.is_finite() && to.is_finite() && from <= to) {
        return Err(Failure::Usage("need from <= to and a positive step".into()));
    }
    let n = ((to - from) / step + 1e-9).floor() as usize + 1;
    let params: Vec<f64> = (0..n).map(|i| (from + i as f64 * step).min(to)).collect();
    let specs: Vec<ChannelSpec> = params.iter().map(|&x| family.spec(x)).collect();
    let spec_refs: Vec<&ChannelSpec> = specs.iter().collect();
    let mut report = RunReport::new("sweep", Some(digest(&spec_refs)), cfg);
    let mut rows = Vec::with_capacity(n);
    let mut json_rows = Vec::with_capacity(n);
    for (x, spec) in params.iter().zip(&specs) {
        let ch = spec.build()?;
        let est = estimate(&ch, which, cfg)?;
        let val = |r: &Option<CapacityResult>| r.as_ref().map(|r| r.value);
        let (s, h, u) = (val(&est.shannon), val(&est.holevo), val(&est.uep));
        let diff = s.zip(h).map(|(s, h)| h - s);
        let strict = diff.map(|d| d > STRICT_GAP);
        let cell = |v: Option<f64>| v.map_or(String::new(), |v| v.to_string());
        rows.push(vec![
            x.to_string(),
            cell(s),
            cell(h),
            cell(u),
            cell(diff),
            strict.map_or(String::new(), |b| b.to_string()),
        ]);
        let mut row = json!({"param": x, "shannon": s, "holevo": h, "uep": u, "holevo_minus_shannon": diff, "strict_gap": strict});
        if ch.dim_in() == 2 && ch.dim_out() == 2 && which.includes(Which::Shannon) {
            let grid = qubit_grid_oracle(&ch, 50, 2, 2)?;
            row["grid_oracle"] = json!(grid);
            if let Some(s) = s {
                report.check(
                    format!("param {x}: grid oracle <= shannon"),
                    grid <= s + 2e-3,
                    format!("{grid} <= {s} + 2e-3"),
                );
            }
        }
        ordering_checks(&mut report, &format!("param {x}: "), &est);
        json_rows.push(row);
    }
    report.value("points", n as f64, None);
    report.details = json!({"family": format!("{family:?}"), "rows": json_rows});
    let table = Table {
        header: SWEEP_HEADER.to_vec(),
        rows,
    };
    Ok((report, table))
}

pub fn channel_info(path: &Path, cfg: &OptimizerConfig) -> Result<RunReport, Failure> {
    let l = load(path)?;
    let ch = &l.channel;
    let mut report = RunReport::new("channel-info", Some(digest(&[&l.spec])), cfg);
    report.value("dim_in", ch.dim_in() as f64, None);
    report.value("dim_out", ch.dim_out() as f64, None);
    report.value("kraus_rank", ch.kraus().len() as f64, None);
    report.value("trace_preservation_defect", ch.trace_preservation_defect(), Some(1e-10));
    if ch.dim_in() == ch.dim_out() {
        report.value("unitality_defect", ch.unitality_defect(), None);
    }
    report.check(
        "trace preserving",
        ch.trace_preservation_defect() <= 1e-10,
        format!("defect {:e}", ch.trace_preservation_defect()),
    );
    report.details = json!({"kind": l.spec.kind(), "spec": l.spec.to_json()});
    Ok(report)
}
