use std::fs;
use std::path::Path;
use std::time::Duration;

use clap::ValueEnum;
use hindman_core::colorings::{flip_lemma_scan_with, log_parity};
use hindman_core::groups::{parity_flip_scan, refine_additivity_scan};
use hindman_core::ordinals::{absorption_scan, fp_equals_set, greedy_mono_sequence, max_semigroup_scan, OrdinalError};
use hindman_core::search::{
    block_injectivity_scan, max_mono_fu_family, min_universe_for_mono_pair_with, recheck_witness, MonoPairMethod,
};
use hindman_core::setcore::log_block_of;
use hindman_core::words::{block_flip_inequality_scan, length_formula_random_scan};
use hindman_core::{
    CheckReport, CnfOrdinal, Color, ColoringSpec, OrdinalColoring, SearchConfig, SetColoring, Universe,
};
use serde_json::{json, Value};

use crate::report::Emitter;

/// Usage problems exit with 2, failed verifications with 1.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Verification(String),
}

impl<E: std::error::Error> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Usage(e.to_string())
    }
}

pub struct Outcome {
    pub inputs: Value,
    pub results: Value,
    pub summary: Vec<String>,
    /// Set when a check failed; the report is still emitted.
    pub failure: Option<String>,
}

/// Common options every subcommand may consult.
pub struct Globals {
    pub seed: u64,
    pub threads: usize,
    pub time_budget_secs: Option<u64>,
}

/// `log_parity`, `random` (keyed by `--seed`), or a path to a JSON
/// coloring spec.
pub fn load_coloring(arg: &str, seed: u64) -> Result<ColoringSpec, Failure> {
    match arg {
        "log_parity" => Ok(ColoringSpec::LogParity),
        "random" => Ok(ColoringSpec::Random { seed }),
        path => {
            let text = fs::read_to_string(Path::new(path))
                .map_err(|e| Failure::Usage(format!("cannot read coloring file {path}: {e}")))?;
            serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("cannot parse coloring file {path}: {e}")))
        }
    }
}

fn spec_json(spec: &ColoringSpec) -> Value {
    serde_json::to_value(spec).expect("coloring specs serialize")
}

/// Parses `a..b` (inclusive); `b < a` is an empty sweep.
pub fn parse_range(s: &str) -> Result<(u32, u32), String> {
    let (a, b) = s.split_once("..").ok_or_else(|| format!("expected a..b, got {s:?}"))?;
    let a = a.trim().parse().map_err(|_| format!("bad range start {a:?}"))?;
    let b = b.trim().parse().map_err(|_| format!("bad range end {b:?}"))?;
    Ok((a, b))
}

pub fn color_table(out: &mut Emitter, n: u64) -> Result<Outcome, Failure> {
    out.header(&["size", "log_block", "color"])?;
    let mut rows = Vec::new();
    for size in 1..=n {
        let block = log_block_of(size).expect("size > 0");
        let color = log_parity(size)?;
        out.row(&[size.to_string(), block.to_string(), color.to_string()])?;
        rows.push(json!({ "size": size, "log_block": block, "color": color }));
    }
    Ok(Outcome {
        inputs: json!({ "n": n, "coloring": "log_parity" }),
        results: Value::Array(rows),
        summary: vec![format!("log-parity colors of sizes 1..={n}")],
        failure: None,
    })
}

pub fn search_max(out: &mut Emitter, g: &Globals, range: (u32, u32), coloring: &str) -> Result<Outcome, Failure> {
    let spec = load_coloring(coloring, g.seed)?;
    out.header(&["n", "max_size", "exhausted", "color", "witness", "nodes"])?;
    let mut rows = Vec::new();
    let mut failure = None;
    for n in range.0..=range.1 {
        let universe = Universe::new(n)?;
        let set_coloring = SetColoring::from_spec(&spec, universe)?;
        let mut cfg = SearchConfig::new(universe, set_coloring.clone()).threads(g.threads);
        if let Some(secs) = g.time_budget_secs {
            cfg = cfg.budget(Duration::from_secs(secs));
        }
        let r = max_mono_fu_family(&cfg)?;
        if let (Some(w), Some(c)) = (&r.witness, r.witness_color) {
            if !recheck_witness(&set_coloring, w, c) && failure.is_none() {
                failure = Some(format!("n={n}: witness {w} fails its recheck"));
            }
        }
        let witness = r.witness.as_ref().map(|w| serde_json::to_string(w).expect("families serialize"));
        out.row(&[
            n.to_string(),
            r.max_size.to_string(),
            r.exhausted.to_string(),
            r.witness_color.map(|c| c.to_string()).unwrap_or_default(),
            witness.unwrap_or_default(),
            r.nodes_expanded.to_string(),
        ])?;
        let mut row = serde_json::to_value(&r).expect("results serialize");
        row["n"] = json!(n);
        rows.push(row);
    }
    let sizes: Vec<String> = rows.iter().map(|r| r["max_size"].to_string()).collect();
    Ok(Outcome {
        inputs: json!({
            "n_range": [range.0, range.1],
            "coloring": spec_json(&spec),
            "threads": g.threads,
            "time_budget_secs": g.time_budget_secs,
        }),
        results: Value::Array(rows),
        summary: vec![format!("max monochromatic family sizes: [{}]", sizes.join(", "))],
        failure,
    })
}

pub fn hindman_min_n(out: &mut Emitter, max_n: u32) -> Result<Outcome, Failure> {
    let naive = min_universe_for_mono_pair_with(max_n, MonoPairMethod::Naive)?;
    let bitmask = min_universe_for_mono_pair_with(max_n, MonoPairMethod::Bitmask)?;
    out.header(&["n", "colorings", "avoiding"])?;
    for row in &bitmask.rows {
        out.row(&[row.n.to_string(), row.colorings.to_string(), row.avoiding.to_string()])?;
    }
    let failure = (naive != bitmask).then(|| format!("naive check gives {naive:?}, bitmask check gives {bitmask:?}"));
    let verdict = match bitmask.threshold {
        Some(n) => format!("threshold: {n}"),
        None => format!("threshold: absent (some coloring avoids it for every n <= {max_n})"),
    };
    Ok(Outcome {
        inputs: json!({ "max_n": max_n }),
        results: json!({ "threshold": bitmask.threshold, "rows": bitmask.rows, "methods_agree": naive == bitmask }),
        summary: vec![verdict],
        failure,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    FlipLemma,
    Injectivity,
    SupportAdditivity,
    LengthFormula,
    Absorption,
    MaxSemigroup,
}

impl Suite {
    fn name(self) -> String {
        self.to_possible_value().expect("no skipped variants").get_name().to_string()
    }

    fn default_n(self) -> u64 {
        match self {
            Suite::FlipLemma | Suite::Injectivity => 10,
            Suite::SupportAdditivity => 16,
            Suite::LengthFormula => 64,
            Suite::Absorption => 3,
            Suite::MaxSemigroup => 20,
        }
    }
}

/// Largest universe `verify flip-lemma` will scan.
pub const FLIP_MAX_N: u64 = 16;

fn check_rows(out: &mut Emitter, checks: &[(&str, CheckReport)]) -> Result<(Vec<Value>, Option<String>), Failure> {
    out.header(&["check", "checked", "applicable", "passed", "counterexample"])?;
    let mut rows = Vec::new();
    let mut failure = None;
    for (name, r) in checks {
        out.row(&[
            name.to_string(),
            r.checked.to_string(),
            r.applicable.to_string(),
            r.passed().to_string(),
            r.counterexample.clone().unwrap_or_default(),
        ])?;
        if let (None, Some(c)) = (&failure, &r.counterexample) {
            failure = Some(format!("{name}: {c}"));
        }
        let mut row = serde_json::to_value(r).expect("reports serialize");
        row["check"] = json!(name);
        row["passed"] = json!(r.passed());
        rows.push(row);
    }
    Ok((rows, failure))
}

pub fn verify(
    out: &mut Emitter,
    g: &Globals,
    suite: Suite,
    n: Option<u64>,
    trials: u64,
    coloring: &str,
) -> Result<Outcome, Failure> {
    let n = n.unwrap_or(suite.default_n());
    let mut inputs = json!({ "suite": suite.name(), "n": n });
    let checks: Vec<(&str, CheckReport)> = match suite {
        Suite::FlipLemma => {
            if n > FLIP_MAX_N {
                return Err(Failure::Usage(format!("flip-lemma scans universes up to {FLIP_MAX_N}, got {n}")));
            }
            let spec = load_coloring(coloring, g.seed)?;
            inputs["coloring"] = spec_json(&spec);
            let mut total = CheckReport::new();
            for k in 1..=n as u32 {
                let u = Universe::new(k)?;
                total = total.merge(flip_lemma_scan_with(u, &SetColoring::from_spec(&spec, u)?)?);
            }
            vec![("flip-lemma", total)]
        }
        Suite::Injectivity => {
            let mut total = CheckReport::new();
            for k in 1..=u32::try_from(n).map_err(|_| Failure::Usage(format!("n = {n} is too large")))? {
                total = total.merge(block_injectivity_scan(Universe::new(k)?)?);
            }
            vec![("injectivity", total)]
        }
        Suite::SupportAdditivity => {
            inputs["trials"] = json!(trials);
            inputs["seed"] = json!(g.seed);
            vec![
                ("refinement-additivity", refine_additivity_scan(trials, g.seed)?),
                ("parity-flip", parity_flip_scan(n)?),
            ]
        }
        Suite::LengthFormula => {
            inputs["trials"] = json!(trials);
            inputs["seed"] = json!(g.seed);
            vec![
                ("length-formula", length_formula_random_scan(trials, g.seed)?),
                ("block-flip-inequality", block_flip_inequality_scan(n)?),
            ]
        }
        Suite::Absorption => {
            let e = u32::try_from(n).map_err(|_| Failure::Usage(format!("n = {n} is too large")))?;
            vec![("absorption", absorption_scan(e, 3)?)]
        }
        Suite::MaxSemigroup => {
            inputs["trials"] = json!(trials);
            inputs["seed"] = json!(g.seed);
            vec![("max-semigroup", max_semigroup_scan(trials, n as usize, g.seed))]
        }
    };
    let (rows, failure) = check_rows(out, &checks)?;
    let summary = checks
        .iter()
        .map(|(name, r)| {
            let verdict = if r.passed() { "ok" } else { "FAILED" };
            format!("{name}: {verdict} ({} checked, {} applicable)", r.checked, r.applicable)
        })
        .collect();
    Ok(Outcome { inputs, results: Value::Array(rows), summary, failure })
}

pub fn freegroup_check(out: &mut Emitter, g: &Globals, trials: u64) -> Result<Outcome, Failure> {
    let r = length_formula_random_scan(trials, g.seed)?;
    let (rows, failure) = check_rows(out, &[("length-formula", r.clone())])?;
    Ok(Outcome {
        inputs: json!({ "trials": trials, "seed": g.seed }),
        results: Value::Array(rows),
        summary: vec![format!(
            "{} families, {} products: {}",
            r.checked,
            r.applicable,
            if r.passed() { "formula agrees with reduction" } else { "MISMATCH" }
        )],
        failure,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OrdinalColoringArg {
    Zero,
    One,
    CoefficientParity,
    Random,
}

pub fn ordinal_demo(
    out: &mut Emitter,
    g: &Globals,
    bound: &str,
    length: u32,
    coloring: OrdinalColoringArg,
    coeff_cap: u64,
) -> Result<Outcome, Failure> {
    let bound: CnfOrdinal = bound.parse()?;
    let c = match coloring {
        OrdinalColoringArg::Zero => OrdinalColoring::Constant(Color::Zero),
        OrdinalColoringArg::One => OrdinalColoring::Constant(Color::One),
        OrdinalColoringArg::CoefficientParity => OrdinalColoring::CoefficientSumParity,
        OrdinalColoringArg::Random => OrdinalColoring::SeededRandom { seed: g.seed },
    };
    let r = match greedy_mono_sequence(&c, &bound, length, coeff_cap) {
        Ok(r) => r,
        Err(OrdinalError::Recheck(why)) => return Err(Failure::Verification(why)),
        Err(e) => return Err(e.into()),
    };
    let absorbs = fp_equals_set(&r.sequence)?;
    out.header(&["index", "ordinal", "color"])?;
    for (i, x) in r.sequence.iter().enumerate() {
        out.row(&[i.to_string(), x.to_string(), c.color(x).to_string()])?;
    }
    let shown: Vec<String> = r.sequence.iter().map(|x| x.to_string()).collect();
    Ok(Outcome {
        inputs: json!({
            "bound": bound,
            "length": length,
            "coloring": coloring.to_possible_value().expect("no skipped variants").get_name(),
            "coeff_cap": coeff_cap,
            "seed": g.seed,
        }),
        results: json!({ "color": r.color, "sequence": r.sequence, "fp_equals_set": absorbs }),
        summary: vec![
            format!("color {} sequence [{}]", r.color, shown.join(", ")),
            format!("every increasing sum equals its last term: {absorbs}"),
        ],
        failure: (!absorbs).then(|| "some increasing sum differs from its last term".to_string()),
    })
}
