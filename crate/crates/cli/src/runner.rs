//! Scenario execution and report rendering.
//!
//! Reports are deterministic: identical scenarios produce byte-identical
//! stdout. Timing goes to stderr only.

use std::fmt::Write as _;

use cmonoids::cmonoid::{seminormality, CMonoidPresentation, Caps, ClassSemigroup};
use cmonoids::criterion::{
    build_context, build_transfer, criterion_on_context, verify_transfer_axioms_sampled,
};
use cmonoids::factorial::FactorialElement;
use cmonoids::gallery::{build_example43, build_remark313, Example43Spec};
use cmonoids::lengths::half_factorial_bruteforce;
use cmonoids::productone::bg_presentation;

use crate::scenario::{Analysis, MonoidSpec, Scenario};

/// One analysis block: human-readable lines plus machine records.
pub struct Section {
    pub analysis: &'static str,
    pub lines: Vec<String>,
    pub records: Vec<String>,
}

pub struct Report {
    pub scenario_description: String,
    pub parameters: String,
    pub sections: Vec<Section>,
}

/// Versioned prefix of every machine record line.
pub const RECORD_SCHEMA: &str = "cmonoids/1";

impl Report {
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "monoid: {}", self.scenario_description);
        let _ = writeln!(out, "parameters: {}", self.parameters);
        for section in &self.sections {
            let _ = writeln!(out, "\n[{}]", section.analysis);
            for line in &section.lines {
                let _ = writeln!(out, "{line}");
            }
        }
        out
    }

    pub fn render_records(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{RECORD_SCHEMA} monoid={} {}",
            quote(&self.scenario_description),
            self.parameters
        );
        for section in &self.sections {
            for record in &section.records {
                let _ = writeln!(
                    out,
                    "{RECORD_SCHEMA} analysis={} {record}",
                    section.analysis
                );
            }
        }
        out
    }
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('"', "'"))
}

pub struct RunnerOptions {
    pub seed: u64,
}

pub fn build_presentation(scenario: &Scenario) -> Result<CMonoidPresentation, String> {
    let caps = Caps {
        alpha_cap: scenario.alpha_cap,
        ..Caps::default()
    };
    match &scenario.monoid {
        MonoidSpec::Remark313 => build_remark313(&caps).map_err(|e| e.to_string()),
        MonoidSpec::ProductOne { group } => {
            bg_presentation(group, &caps).map_err(|e| e.to_string())
        }
        MonoidSpec::Example43 { chain } => {
            let spec =
                Example43Spec::with_default_bondings(chain.clone()).map_err(|e| e.to_string())?;
            build_example43(&spec, &caps)
                .map(|inst| inst.presentation)
                .map_err(|e| e.to_string())
        }
        MonoidSpec::Generators {
            units,
            primes,
            generators,
        } => {
            let ambient = cmonoids::factorial::FactorialMonoid::new(units.clone(), primes.clone());
            let gens: Vec<FactorialElement> = generators
                .iter()
                .map(|g| {
                    let mut unit = units.zero();
                    for (k, &e) in g.unit_exponents.iter().enumerate() {
                        let gen = units.generator(k);
                        unit = units.add(&unit, &units.scalar_mul(e, &gen));
                    }
                    FactorialElement {
                        unit,
                        exponents: g.prime_exponents.clone(),
                    }
                })
                .collect();
            CMonoidPresentation::from_generators(ambient, gens, None, &caps)
                .map_err(|e| e.to_string())
        }
    }
}

pub fn run_scenario(scenario: &Scenario, options: &RunnerOptions) -> Result<Report, String> {
    let caps = Caps {
        alpha_cap: scenario.alpha_cap,
        ..Caps::default()
    };
    let h = build_presentation(scenario)?;
    let mut cs_cache: Option<ClassSemigroup> = None;
    let mut class_semigroup = |h: &CMonoidPresentation| -> Result<ClassSemigroup, String> {
        if let Some(cs) = &cs_cache {
            return Ok(cs.clone());
        }
        let cs = h.class_semigroup().map_err(|e| e.to_string())?;
        cs_cache = Some(cs.clone());
        Ok(cs)
    };

    let mut sections = Vec::new();
    for analysis in &scenario.analyses {
        let section = match analysis {
            Analysis::ClassSemigroup => {
                let cs = class_semigroup(&h)?;
                let mut lines = vec![format!("classes: {}", cs.class_count())];
                let mut records = vec![format!("classes={}", cs.class_count())];
                for c in 0..cs.class_count() {
                    let mut flags = Vec::new();
                    if c == cs.identity_class {
                        flags.push("identity");
                    }
                    if cs.is_h_class[c] {
                        flags.push("H");
                    }
                    if cs.is_unit_class[c] {
                        flags.push("unit");
                    }
                    if cs.is_star_class[c] {
                        flags.push("star");
                    }
                    if cs.carrier.is_idempotent(c) {
                        flags.push("idempotent");
                    }
                    lines.push(format!(
                        "  class {c}: {} ({})",
                        cs.carrier.label(c),
                        flags.join(",")
                    ));
                    records.push(format!(
                        "class={c} rep={} flags={}",
                        quote(&cs.carrier.label(c)),
                        flags.join(",")
                    ));
                }
                lines.push("operation table:".into());
                for row in cs.carrier.to_text().lines() {
                    lines.push(format!("  {row}"));
                }
                Section {
                    analysis: analysis.name(),
                    lines,
                    records,
                }
            }
            Analysis::Seminormal => {
                let cs = class_semigroup(&h)?;
                let (sn, star) = seminormality(&cs);
                let mut lines = vec![format!("seminormal: {sn}")];
                let mut records = vec![format!("verdict={sn}")];
                if let Some(w) = star.clifford.non_group_witness {
                    let class = star.to_class[w];
                    lines.push(format!(
                        "witness: class {} lies in no constituent group",
                        cs.carrier.label(class)
                    ));
                    records.push(format!("witness={}", quote(&cs.carrier.label(class))));
                }
                lines.push(format!(
                    "idempotents in C*: {}",
                    star.clifford.idempotents.len()
                ));
                Section {
                    analysis: analysis.name(),
                    lines,
                    records,
                }
            }
            Analysis::SeminormalBruteforce => {
                let witness = h.seminormal_bruteforce(&caps).map_err(|e| e.to_string())?;
                let (lines, records) = match witness {
                    Some(w) => (
                        vec![format!(
                            "counterexample: {} (powers from {} on lie in H)",
                            h.ambient().display(&w.element),
                            w.from_power
                        )],
                        vec![format!(
                            "verdict=false witness={} from_power={}",
                            quote(&h.ambient().display(&w.element)),
                            w.from_power
                        )],
                    ),
                    None => (
                        vec!["no counterexample found: seminormal".to_string()],
                        vec!["verdict=true".to_string()],
                    ),
                };
                Section {
                    analysis: analysis.name(),
                    lines,
                    records,
                }
            }
            Analysis::HalfFactorialCriterion => {
                let cs = class_semigroup(&h)?;
                let mut lines = Vec::new();
                let mut records = Vec::new();
                match build_context(&cs) {
                    Ok(ctx) => {
                        let rep = criterion_on_context(&ctx);
                        lines.push(format!(
                            "hypothesis (prime in every class): {}",
                            rep.hypothesis_holds
                        ));
                        for (name, v) in [
                            ("P1", &rep.p1),
                            ("P2", &rep.p2),
                            ("P3", &rep.p3),
                            ("P4", &rep.p4),
                        ] {
                            lines.push(format!(
                                "{name}: {} ({})",
                                if v.pass { "pass" } else { "fail" },
                                v.detail
                            ));
                            records.push(format!("property={name} pass={}", v.pass));
                        }
                        match rep.verdict {
                            Some(v) => {
                                lines.push(format!("half-factorial: {v}"));
                                records.push(format!("verdict={v}"));
                            }
                            None => {
                                // hypothesis fails: fall back to the box verdict
                                let bf = half_factorial_bruteforce(&h, scenario.box_cap)
                                    .map_err(|e| e.to_string())?;
                                lines.push(format!(
                                    "criterion inapplicable; brute-force verdict within degree {}: {}",
                                    scenario.box_cap, bf.half_factorial_within_box
                                ));
                                records.push(format!(
                                    "verdict=inapplicable fallback={} degree_cap={}",
                                    bf.half_factorial_within_box, scenario.box_cap
                                ));
                            }
                        }
                    }
                    Err(e) => {
                        lines.push(format!("criterion not applicable: {e}"));
                        records.push("verdict=not_applicable".to_string());
                    }
                }
                Section {
                    analysis: analysis.name(),
                    lines,
                    records,
                }
            }
            Analysis::HalfFactorialBruteforce => {
                let bf =
                    half_factorial_bruteforce(&h, scenario.box_cap).map_err(|e| e.to_string())?;
                let mut lines = vec![format!(
                    "half-factorial within degree {}: {}",
                    bf.degree_cap, bf.half_factorial_within_box
                )];
                let mut records = vec![format!(
                    "verdict={} degree_cap={}",
                    bf.half_factorial_within_box, bf.degree_cap
                )];
                if let Some(w) = bf.witness {
                    let lengths: Vec<String> = w.lengths.iter().map(|l| l.to_string()).collect();
                    let delta: Vec<String> = w.delta.iter().map(|l| l.to_string()).collect();
                    lines.push(format!(
                        "witness: {} with L = {{{}}}, delta = {{{}}}",
                        h.ambient().display(&w.element),
                        lengths.join(","),
                        delta.join(",")
                    ));
                    records.push(format!(
                        "witness={} lengths={} delta={}",
                        quote(&h.ambient().display(&w.element)),
                        lengths.join(","),
                        delta.join(",")
                    ));
                }
                Section {
                    analysis: analysis.name(),
                    lines,
                    records,
                }
            }
            Analysis::ClassGroupCompletion => {
                let g = h
                    .class_group_of_completion(&caps)
                    .map_err(|e| e.to_string())?;
                Section {
                    analysis: analysis.name(),
                    lines: vec![format!("class group of the completion: {g:?}")],
                    records: vec![format!("group={}", quote(&format!("{g:?}")))],
                }
            }
            Analysis::TransferCheck => {
                let cs = class_semigroup(&h)?;
                let ctx = build_context(&cs).map_err(|e| e.to_string())?;
                let mut lines = Vec::new();
                let mut records = Vec::new();
                for k in 0..=ctx.n() {
                    if !ctx.e_in_ch(k) {
                        lines.push(format!("k={k}: e_k not in C_H, H_k = H^x (skipped)"));
                        records.push(format!("k={k} skipped=true"));
                        continue;
                    }
                    let transfer = build_transfer(&h, &ctx, k).map_err(|e| e.to_string())?;
                    let report = verify_transfer_axioms_sampled(
                        &transfer,
                        scenario.length_cap.min(scenario.box_cap),
                        500,
                        options.seed,
                    )
                    .map_err(|e| e.to_string())?;
                    lines.push(format!(
                        "k={k}: codomain B(group of order {}), T1 {}, T2 {}, lengths {} ({} elements)",
                        transfer.codomain.order(),
                        if report.t1_ok { "pass" } else { "fail" },
                        if report.t2_ok { "pass" } else { "fail" },
                        if report.lengths_ok { "pass" } else { "fail" },
                        report.elements_checked
                    ));
                    records.push(format!(
                        "k={k} codomain_order={} t1={} t2={} lengths={} elements={}",
                        transfer.codomain.order(),
                        report.t1_ok,
                        report.t2_ok,
                        report.lengths_ok,
                        report.elements_checked
                    ));
                    for failure in report
                        .t1_failures
                        .iter()
                        .chain(&report.t2_failures)
                        .chain(&report.length_failures)
                        .take(5)
                    {
                        lines.push(format!("  failure: {failure}"));
                    }
                }
                Section {
                    analysis: analysis.name(),
                    lines,
                    records,
                }
            }
            Analysis::Theorem11Check => {
                let cs = class_semigroup(&h)?;
                let report = h
                    .verify_theorem_seminormal(&cs, &caps)
                    .map_err(|e| e.to_string())?;
                let mut lines = vec![
                    format!(
                        "every H-class idempotent: {}",
                        report.all_h_classes_idempotent
                    ),
                    format!(
                        "constituent at the smallest idempotent: {:?}",
                        report.constituent_of_smallest
                    ),
                    format!(
                        "class group of the completion: {:?}",
                        report.completion_class_group
                    ),
                    format!("isomorphic: {}", report.groups_isomorphic),
                ];
                if let Some(w) = report.idempotency_witness {
                    lines.push(format!(
                        "witness: H-class {} is not idempotent",
                        cs.carrier.label(w)
                    ));
                }
                let records = vec![format!(
                    "h_idempotent={} constituent={} completion={} isomorphic={}",
                    report.all_h_classes_idempotent,
                    quote(&format!("{:?}", report.constituent_of_smallest)),
                    quote(&format!("{:?}", report.completion_class_group)),
                    report.groups_isomorphic
                )];
                Section {
                    analysis: analysis.name(),
                    lines,
                    records,
                }
            }
        };
        sections.push(section);
    }

    Ok(Report {
        scenario_description: scenario.monoid.describe(),
        parameters: format!(
            "alpha_cap={} box_cap={} length_cap={} seed={}",
            scenario.alpha_cap, scenario.box_cap, scenario.length_cap, options.seed
        ),
        sections,
    })
}
