//! Experiment configuration files.
//!
//! Parse rules:
//! - Lines are split on LF with one trailing CR removed, then trimmed.
//! - Blank lines and lines starting with `#` or `;` are ignored.
//! - `[name]` opens a section; keys before the first section are top-level.
//! - Every other line is `key = value`, split at the first `=`, both sides
//!   trimmed. Keys are case-sensitive.
//! - A key may appear once per section, except `match` and `ols` in
//!   `[estimators]`, which append one estimator per line in file order.
//! - Unknown sections or keys are errors.
//!
//! ```text
//! n = 400
//! replicates = 200
//! seed = 2024
//! horizon = 5
//! # burnin = 200
//!
//! [truth]
//! model = arma          # arma | tar
//! ar = 0.8
//! ma = -0.5
//! sigma2 = 1
//! innovations = gaussian  # gaussian | t (then df = 5)
//! # tar: ar_low, ar_high, threshold, delay
//!
//! [estimators]
//! match = 1,1           # p,m
//! match = 1,5
//! ols = 1               # p
//!
//! [selection]           # optional: adds a bootstrap-selected estimator
//! max_order = 6
//! steps = 1
//! bootstrap = 100
//! ```
//!
//! Trailing `#` comments are allowed after values.

use std::collections::BTreeMap;

use featmatch::{ArmaSpec, Estimator, ExperimentPlanF64, FitOptions, Innovations, TarSpec, Truth};

const SECTIONS: [&str; 4] = ["", "truth", "estimators", "selection"];

#[derive(Default)]
struct Section {
    keys: BTreeMap<String, (usize, String)>,
}

pub fn parse_plan(text: &str) -> Result<ExperimentPlanF64, String> {
    let mut sections: BTreeMap<&str, Section> = BTreeMap::new();
    let mut estimators = Vec::new();
    let mut current = "";
    sections.insert("", Section::default());

    for (i, raw) in text.split('\n').enumerate() {
        let lineno = i + 1;
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        let line = line.split('#').next().unwrap().trim();
        if line.is_empty() || line.starts_with(';') {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            let name = name.trim();
            current = SECTIONS
                .iter()
                .copied()
                .find(|s| !s.is_empty() && *s == name)
                .ok_or_else(|| format!("line {lineno}: unknown section [{name}]"))?;
            if sections.contains_key(current) {
                return Err(format!("line {lineno}: section [{name}] repeated"));
            }
            sections.insert(current, Section::default());
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("line {lineno}: expected key = value"))?;
        let (key, value) = (key.trim(), value.trim());
        if current == "estimators" {
            estimators.push(parse_estimator(key, value).map_err(|e| format!("line {lineno}: {e}"))?);
            continue;
        }
        let section = sections.get_mut(current).unwrap();
        if section.keys.insert(key.to_string(), (lineno, value.to_string())).is_some() {
            return Err(format!("line {lineno}: key {key} repeated"));
        }
    }

    let mut top = Reader::new("", sections.remove("").unwrap());
    let n = top.required("n", parse_usize)?;
    let replicates = top.required("replicates", parse_usize)?;
    let base_seed = top.optional("seed", parse_u64)?.unwrap_or(0);
    let eval_horizon = top.optional("horizon", parse_usize)?.unwrap_or(1);
    let burnin = top.optional("burnin", parse_usize)?;
    top.finish()?;

    let mut truth = Reader::new(
        "truth",
        sections.remove("truth").ok_or("missing [truth] section")?,
    );
    let model = truth.required("model", |s| Ok(s.to_string()))?;
    let sigma2 = truth.optional("sigma2", parse_f64)?.unwrap_or(1.0);
    let innovations = match truth.optional("innovations", |s| Ok(s.to_string()))?.as_deref() {
        None | Some("gaussian") => Innovations::Gaussian,
        Some("t") => Innovations::StudentT {
            df: truth.required("df", parse_f64)?,
        },
        Some(other) => return Err(format!("[truth] unknown innovations {other:?}")),
    };
    let truth_spec = match model.as_str() {
        "arma" => {
            let ar = truth.optional("ar", parse_list)?.unwrap_or_default();
            let ma = truth.optional("ma", parse_list)?.unwrap_or_default();
            Truth::Arma(ArmaSpec::new(ar, ma, sigma2).map_err(|e| format!("[truth] {e}"))?)
        }
        "tar" => Truth::Tar(TarSpec {
            phi_low: truth.required("ar_low", parse_list)?,
            phi_high: truth.required("ar_high", parse_list)?,
            threshold: truth.optional("threshold", parse_f64)?.unwrap_or(0.0),
            delay: truth.optional("delay", parse_usize)?.unwrap_or(1),
            sigma2,
        }),
        other => return Err(format!("[truth] unknown model {other:?}")),
    };
    truth.finish()?;

    if let Some(section) = sections.remove("selection") {
        let mut sel = Reader::new("selection", section);
        estimators.push(Estimator::Selected {
            p_max: sel.required("max_order", parse_usize)?,
            m: sel.optional("steps", parse_usize)?.unwrap_or(1),
            bootstrap: sel.required("bootstrap", parse_usize)?,
        });
        sel.finish()?;
    }

    let plan = ExperimentPlanF64 {
        truth: truth_spec,
        innovations,
        n,
        replicates,
        estimators,
        base_seed,
        eval_horizon,
        burnin,
        fit_options: FitOptions::default(),
    };
    plan.validate().map_err(|e| e.to_string())?;
    Ok(plan)
}

fn parse_estimator(key: &str, value: &str) -> Result<Estimator, String> {
    let nums = value
        .split(',')
        .map(|s| parse_usize(s.trim()))
        .collect::<Result<Vec<_>, _>>()?;
    match (key, nums.as_slice()) {
        ("match", [p, m]) => Ok(Estimator::Match { p: *p, m: *m }),
        ("ols", [p]) => Ok(Estimator::Ols { p: *p }),
        ("match", _) => Err("match expects p,m".into()),
        ("ols", _) => Err("ols expects p".into()),
        _ => Err(format!("unknown estimator {key:?}")),
    }
}

struct Reader {
    name: &'static str,
    section: Section,
}

impl Reader {
    fn new(name: &'static str, section: Section) -> Self {
        Self { name, section }
    }

    fn optional<V>(&mut self, key: &str, parse: impl Fn(&str) -> Result<V, String>) -> Result<Option<V>, String> {
        match self.section.keys.remove(key) {
            None => Ok(None),
            Some((lineno, value)) => parse(&value)
                .map(Some)
                .map_err(|e| format!("line {lineno}: {key}: {e}")),
        }
    }

    fn required<V>(&mut self, key: &str, parse: impl Fn(&str) -> Result<V, String>) -> Result<V, String> {
        self.optional(key, parse)?.ok_or_else(|| match self.name {
            "" => format!("missing top-level key {key}"),
            name => format!("missing key {key} in [{name}]"),
        })
    }

    fn finish(self) -> Result<(), String> {
        match self.section.keys.into_iter().next() {
            None => Ok(()),
            Some((key, (lineno, _))) => Err(format!("line {lineno}: unknown key {key}")),
        }
    }
}

fn parse_usize(s: &str) -> Result<usize, String> {
    s.parse().map_err(|_| format!("expected a non-negative integer, found {s:?}"))
}

fn parse_u64(s: &str) -> Result<u64, String> {
    s.parse().map_err(|_| format!("expected a non-negative integer, found {s:?}"))
}

fn parse_f64(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(format!("expected a finite number, found {s:?}")),
    }
}

/// Comma-separated reals; an empty string is the empty list.
pub fn parse_list(s: &str) -> Result<Vec<f64>, String> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',').map(|x| parse_f64(x.trim())).collect()
}
