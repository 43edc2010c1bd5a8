//! The five commands, each producing a [`Report`].

use serde::Serialize;
use serde_json::json;
use thiserror::Error;

use crate::bicat::{adjunction_check, beck_chevalley_check, beck_chevalley_comparison, hypercover_squares};
use crate::document::{DocumentError, LoadedDocument};
use crate::dot::{category_dot, diagram_dot, sigma_dot};
use crate::localization::{compare_localizations, ho_via_spans, oracle_localize, w_locality_report, HoCategory, OracleResult};
use crate::relcat::{validate_hypercovers, RelativeCategory};
use crate::report::{CheckResult, Report, Status};
use crate::span::{build_span_level, segal_check_levels, simplicial_check_levels, SpanError};
use crate::sset::{component_count, horn_lift_check, nerve, pi0, pi1_presentation, HornKind, SSetError, SSetMap};

#[derive(Debug, Error)]
pub enum CommandError {
    #[error(transparent)]
    Document(#[from] DocumentError),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("budget exceeded: estimate {estimate} > budget {budget}")]
    BudgetExceeded { estimate: u64, budget: u64 },
}

impl CommandError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CommandError::Document(_) | CommandError::Invalid(_) => 2,
            CommandError::BudgetExceeded { .. } => 3,
        }
    }
}

impl From<SpanError> for CommandError {
    fn from(e: SpanError) -> Self {
        match e {
            SpanError::BudgetExceeded { estimate, budget } => CommandError::BudgetExceeded { estimate, budget },
            other => CommandError::Invalid(other.to_string()),
        }
    }
}

/// Commands other than `validate` need a valid relative category.
fn require_valid(doc: &LoadedDocument) -> Result<RelativeCategory, CommandError> {
    let r = doc.relative().ok_or_else(|| {
        CommandError::Invalid(format!("category axioms fail: {}", serde_json::to_string(&doc.category_report.violations).unwrap()))
    })?;
    let report = validate_hypercovers(&r);
    if !report.is_valid() {
        return Err(CommandError::Invalid(format!(
            "hypercover axioms fail: {}",
            serde_json::to_string(&report.violations).unwrap()
        )));
    }
    Ok(r)
}

pub fn cmd_validate(doc: &LoadedDocument) -> Report {
    let mut checks = vec![CheckResult::from_bool(
        "category",
        doc.category_report.is_valid(),
        json!({ "violations": doc.category_report.violations }),
    )];
    match doc.relative() {
        Some(r) => {
            let report = validate_hypercovers(&r);
            checks.push(CheckResult::from_bool(
                "hypercovers",
                report.is_valid(),
                json!({ "hypercovers": r.hypercover_names(), "violations": report.violations }),
            ));
        }
        None => checks.push(CheckResult::new(
            "hypercovers",
            Status::Fail,
            json!({ "skipped": "category axioms fail" }),
        )),
    }
    Report::new("validate", doc.name(), doc.digest(), checks)
}

#[derive(Clone, Copy, Debug)]
pub struct SpanOptions {
    pub level: usize,
    pub budget: u64,
}

/// Builds levels `0..=n` and checks the Segal map at every level `≥ 2`.
pub fn cmd_span(doc: &LoadedDocument, opts: SpanOptions) -> Result<Report, CommandError> {
    let r = require_valid(doc)?;
    let levels = (0..=opts.level)
        .map(|m| build_span_level(&r, m, opts.budget))
        .collect::<Result<Vec<_>, _>>()?;
    let mut checks = vec![CheckResult::new(
        "levels",
        Status::Pass,
        json!({ "objects": levels.iter().map(|l| l.len()).collect::<Vec<_>>() }),
    )];
    if levels.len() > 1 {
        for level in &levels[2.min(levels.len())..] {
            let report = segal_check_levels(level, &levels[1]);
            checks.push(CheckResult::from_bool(format!("segal_{}", level.n), report.check.holds, &report));
        }
    }
    // Arrow-level comparison gets expensive fast; level 3 is plenty.
    let simplicial = simplicial_check_levels(&r, &levels[..levels.len().min(4)])?;
    checks.push(CheckResult::from_bool("simplicial", simplicial.failure.is_none(), &simplicial));
    Ok(Report::new("span", doc.name(), doc.digest(), checks))
}

/// Σₙ, the base category, and the first level-`n` diagram, as one dot file.
pub fn span_dot(doc: &LoadedDocument, opts: SpanOptions) -> Result<String, CommandError> {
    let r = require_valid(doc)?;
    let level = build_span_level(&r, opts.level, opts.budget)?;
    let mut out = sigma_dot(opts.level);
    out.push_str(&category_dot(&r));
    if let Some(first) = level.objects.first() {
        out.push_str(&diagram_dot(&r, first, &format!("level_{}_diagram_0", opts.level)));
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug)]
pub struct LocalizeOptions {
    pub max_word_len: usize,
    pub max_iter: u64,
}

#[derive(Serialize)]
struct HomEntry<'a> {
    source: &'a str,
    target: &'a str,
    classes: &'a [String],
}

fn hom_table(ho: &HoCategory) -> serde_json::Value {
    let k = ho.object_count();
    let entries: Vec<HomEntry> = (0..k * k)
        .filter(|&p| !ho.homs[p].is_empty())
        .map(|p| HomEntry {
            source: &ho.objects[p / k],
            target: &ho.objects[p % k],
            classes: &ho.homs[p],
        })
        .collect();
    json!({ "hom_sizes": ho.hom_sizes(), "homs": entries })
}

pub fn cmd_localize(doc: &LoadedDocument, opts: LocalizeOptions) -> Result<Report, CommandError> {
    let r = require_valid(doc)?;
    let c = &r.base;
    let mut checks = Vec::new();
    let spans = match ho_via_spans(&r) {
        Ok(ho) => {
            checks.push(CheckResult::new("ho_via_spans", Status::Pass, hom_table(&ho)));
            let not_inverted: Vec<&str> = r
                .hypercovers()
                .into_iter()
                .filter(|&w| !ho.is_iso(c.dom(w), c.cod(w), ho.canonical[w]))
                .map(|w| c.morphism_name(w))
                .collect();
            checks.push(CheckResult::from_bool(
                "hypercovers_invertible",
                not_inverted.is_empty(),
                json!({ "not_inverted": not_inverted }),
            ));
            Some(ho)
        }
        Err(e) => {
            checks.push(CheckResult::new("ho_via_spans", Status::Fail, json!({ "error": e.to_string() })));
            None
        }
    };
    let oracle = oracle_localize(&r, opts.max_word_len, opts.max_iter);
    match &oracle {
        OracleResult::Localized { ho, stats } => {
            checks.push(CheckResult::new("oracle", Status::Pass, json!({ "stats": stats, "table": hom_table(ho) })))
        }
        OracleResult::Inconclusive { reason, stats } => {
            checks.push(CheckResult::new("oracle", Status::Inconclusive, json!({ "reason": reason, "stats": stats })))
        }
    }
    match (&spans, oracle.ho()) {
        (Some(a), Some(b)) => {
            let cmp = compare_localizations(a, b);
            checks.push(CheckResult::from_bool("comparison", cmp.holds, &cmp));
        }
        (_, None) => checks.push(CheckResult::new("comparison", Status::Inconclusive, json!({ "reason": "oracle inconclusive" }))),
        (None, _) => checks.push(CheckResult::new("comparison", Status::Fail, json!({ "reason": "span localization failed" }))),
    }
    let locality = w_locality_report(&r);
    checks.push(CheckResult::from_bool("w_locality", locality.holds(), &locality));
    Ok(Report::new("localize", doc.name(), doc.digest(), checks))
}

pub fn cmd_bicat(doc: &LoadedDocument) -> Result<Report, CommandError> {
    let r = require_valid(doc)?;
    let c = &r.base;
    let adjunctions = r
        .hypercovers()
        .into_iter()
        .map(|f| adjunction_check(&r, f))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| CommandError::Invalid(e.to_string()))?;
    let failed: Vec<_> = adjunctions.iter().filter(|a| !a.holds).collect();
    let mut checks = vec![CheckResult::from_bool(
        "adjunction",
        failed.is_empty(),
        json!({ "checked": adjunctions.len(), "failures": failed }),
    )];
    let (mut cartesian, mut controls) = (Vec::new(), Vec::new());
    for sq in hypercover_squares(&r) {
        if sq.is_cartesian(c) {
            cartesian.push(beck_chevalley_check(&r, &sq).map_err(|e| CommandError::Invalid(e.to_string()))?);
        } else {
            let (cell, iso) = beck_chevalley_comparison(&r, &sq).map_err(|e| CommandError::Invalid(e.to_string()))?;
            controls.push((sq, c.morphism_name(cell.apex_map).to_string(), iso));
        }
    }
    let bc_failures: Vec<_> = cartesian.iter().filter(|b| !b.holds).collect();
    checks.push(CheckResult::from_bool(
        "beck_chevalley",
        bc_failures.is_empty(),
        json!({ "checked": cartesian.len(), "failures": bc_failures }),
    ));
    let invertible_controls: Vec<_> = controls
        .iter()
        .filter(|(_, _, iso)| *iso)
        .map(|(sq, m, _)| json!({ "f": c.morphism_name(sq.f), "g": c.morphism_name(sq.g), "comparison": m }))
        .collect();
    checks.push(CheckResult::from_bool(
        "non_cartesian_controls",
        invertible_controls.is_empty(),
        json!({ "checked": controls.len(), "invertible": invertible_controls }),
    ));
    Ok(Report::new("bicat", doc.name(), doc.digest(), checks))
}

#[derive(Clone, Copy, Debug)]
pub struct SsetOptions {
    pub dim: usize,
    pub kind: HornKind,
}

/// Horn check of the nerve over a point, components, and π₁ ranks per component.
pub fn cmd_sset(doc: &LoadedDocument, opts: SsetOptions) -> Result<Report, CommandError> {
    let r = require_valid(doc)?;
    let invalid = |e: SSetError| CommandError::Invalid(e.to_string());
    let x = nerve(&r.base, opts.dim);
    let horn = horn_lift_check(&SSetMap::to_point(&x), opts.kind, opts.dim).map_err(invalid)?;
    let comps = pi0(&x);
    let mut ranks = Vec::new();
    for comp in 0..component_count(&x) {
        let base = comps.iter().position(|&cl| cl == comp).unwrap();
        let p = pi1_presentation(&x, base).map_err(invalid)?;
        ranks.push(json!({
            "basepoint": x.labels[0][base],
            "generators": p.generators.len(),
            "relations": p.relations.len(),
            "abelianization_rank": p.abelianization_rank(),
        }));
    }
    let simplices: Vec<usize> = (0..=opts.dim).map(|k| x.count(k)).collect();
    let checks = vec![
        CheckResult::from_bool(format!("horn_{}", opts.kind), horn.holds, &horn),
        CheckResult::new("pi0", Status::Pass, json!({ "components": component_count(&x), "simplices": simplices })),
        CheckResult::new("pi1", Status::Pass, json!({ "components": ranks })),
    ];
    Ok(Report::new("sset", doc.name(), doc.digest(), checks))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{fixture, FIXTURE_NAMES};

    fn load(name: &str) -> LoadedDocument {
        LoadedDocument::parse(fixture(name).unwrap()).unwrap()
    }

    #[test]
    fn validate_fixtures_pass() {
        for name in FIXTURE_NAMES {
            assert_eq!(cmd_validate(&load(name)).exit_code(), 0, "{name}");
        }
        let empty = LoadedDocument::parse(r#"{"objects":[]}"#).unwrap();
        assert_eq!(cmd_validate(&empty).exit_code(), 0);
    }

    #[test]
    fn missing_pullback_is_reported() {
        // W contains f: x → y but y ← x → y has no pullback along g.
        let text = r#"{"objects":["x","y"],"morphisms":[{"name":"f","dom":"x","cod":"y"},{"name":"g","dom":"x","cod":"y"}],"hypercovers":["f"]}"#;
        let report = cmd_validate(&LoadedDocument::parse(text).unwrap());
        assert_eq!(report.exit_code(), 1);
        let detail = &report.check("hypercovers").unwrap().detail;
        assert!(detail["violations"]
            .as_array()
            .unwrap()
            .iter()
            .any(|v| v["clause"] == "missing_pullback" && v["hypercover"] == "f"));
    }

    #[test]
    fn span_command() {
        let report = cmd_span(&load("meet-poset"), SpanOptions { level: 2, budget: 1_000_000 }).unwrap();
        assert_eq!(report.exit_code(), 0);
        assert!(report.check("segal_2").is_some());
        let err = cmd_span(&load("cube-poset"), SpanOptions { level: 3, budget: 1 }).unwrap_err();
        assert_eq!(err.exit_code(), 3);
        let dot = span_dot(&load("collapse"), SpanOptions { level: 2, budget: 1_000_000 }).unwrap();
        assert!(dot.contains("digraph sigma_2") && dot.contains("color=blue"));
    }

    #[test]
    fn localize_command() {
        let opts = LocalizeOptions { max_word_len: 8, max_iter: 10_000 };
        for name in ["cube-poset", "collapse"] {
            assert_eq!(cmd_localize(&load(name), opts).unwrap().exit_code(), 0, "{name}");
        }
        let zero = cmd_localize(&load("cube-poset"), LocalizeOptions { max_word_len: 0, max_iter: 10_000 }).unwrap();
        assert_eq!(zero.exit_code(), 4);
    }

    #[test]
    fn bicat_and_sset_commands() {
        for name in FIXTURE_NAMES {
            assert_eq!(cmd_bicat(&load(name)).unwrap().exit_code(), 0, "{name}");
        }
        let opts = |kind| SsetOptions { dim: 3, kind };
        assert_eq!(cmd_sset(&load("walking-iso"), opts(HornKind::Kan)).unwrap().exit_code(), 0);
        let pp = cmd_sset(&load("parallel-pair"), opts(HornKind::Left)).unwrap();
        assert_eq!(pp.exit_code(), 1);
        assert_eq!(pp.checks[0].detail["witness"]["faces"][0]["simplex"], "f");
        let low = cmd_sset(&load("meet-poset"), SsetOptions { dim: 1, kind: HornKind::Inner }).unwrap_err();
        assert_eq!(low.exit_code(), 2);
    }

    #[test]
    fn invalid_input_is_rejected() {
        let text = r#"{"objects":["x","y"],"morphisms":[{"name":"f","dom":"x","cod":"y"},{"name":"g","dom":"x","cod":"y"}],"hypercovers":["f"]}"#;
        let doc = LoadedDocument::parse(text).unwrap();
        assert_eq!(cmd_bicat(&doc).unwrap_err().exit_code(), 2);
    }
}
