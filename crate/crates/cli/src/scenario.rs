//! Scenario file parsing.
//!
//! Scenarios are line-oriented `key: value` text. Blank lines and lines
//! starting with `#` are ignored. Keys:
//!
//! ```text
//! monoid: remark313
//!         | product_one <group>
//!         | example43 <factors> (> <factors>)* > 1
//!         | generators
//! units: d1 d2 ...          (generators monoid only; omit for trivial)
//! primes: p q ...           (generators monoid only)
//! generator: p^2 q u1       (repeatable; u<i> are unit generators)
//! analyses: seminormal, class_semigroup, ...
//! alpha_cap: 8
//! box_cap: 6
//! length_cap: 8            (degree bound for transfer length checks)
//! ```
//!
//! Groups: `cyclic N`, `klein_four`, `dihedral N` (order 2N),
//! `symmetric 3`, `quaternion 8`, and `A x B` products of those.

use std::fmt;

use cmonoids::abelian::FiniteAbelianGroup;
use cmonoids::productone::FiniteGroup;

#[derive(Debug, Clone)]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

impl std::error::Error for ParseError {}

fn err(line: usize, message: impl Into<String>) -> ParseError {
    ParseError {
        line,
        message: message.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Analysis {
    ClassSemigroup,
    Seminormal,
    SeminormalBruteforce,
    HalfFactorialCriterion,
    HalfFactorialBruteforce,
    ClassGroupCompletion,
    TransferCheck,
    Theorem11Check,
}

impl Analysis {
    pub fn name(&self) -> &'static str {
        match self {
            Analysis::ClassSemigroup => "class_semigroup",
            Analysis::Seminormal => "seminormal",
            Analysis::SeminormalBruteforce => "seminormal_bruteforce",
            Analysis::HalfFactorialCriterion => "half_factorial_criterion",
            Analysis::HalfFactorialBruteforce => "half_factorial_bruteforce",
            Analysis::ClassGroupCompletion => "class_group_completion",
            Analysis::TransferCheck => "transfer_check",
            Analysis::Theorem11Check => "theorem11_check",
        }
    }

    fn parse(token: &str, line: usize) -> Result<Analysis, ParseError> {
        match token {
            "class_semigroup" => Ok(Analysis::ClassSemigroup),
            "seminormal" => Ok(Analysis::Seminormal),
            "seminormal_bruteforce" => Ok(Analysis::SeminormalBruteforce),
            "half_factorial_criterion" => Ok(Analysis::HalfFactorialCriterion),
            "half_factorial_bruteforce" => Ok(Analysis::HalfFactorialBruteforce),
            "class_group_completion" => Ok(Analysis::ClassGroupCompletion),
            "transfer_check" => Ok(Analysis::TransferCheck),
            "theorem11_check" => Ok(Analysis::Theorem11Check),
            other => Err(err(line, format!("unknown analysis {other:?}"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct GeneratorSpec {
    /// (unit generator exponents, prime exponents)
    pub unit_exponents: Vec<u64>,
    pub prime_exponents: Vec<u64>,
}

#[derive(Debug, Clone)]
pub enum MonoidSpec {
    Remark313,
    ProductOne {
        group: FiniteGroup,
    },
    Example43 {
        chain: Vec<FiniteAbelianGroup>,
    },
    Generators {
        units: FiniteAbelianGroup,
        primes: Vec<String>,
        generators: Vec<GeneratorSpec>,
    },
}

impl MonoidSpec {
    pub fn describe(&self) -> String {
        match self {
            MonoidSpec::Remark313 => "remark313".into(),
            MonoidSpec::ProductOne { group } => format!("product_one {}", group.name()),
            MonoidSpec::Example43 { chain } => {
                let parts: Vec<String> = chain.iter().map(|g| format!("{g:?}")).collect();
                format!("example43 {}", parts.join(" > "))
            }
            MonoidSpec::Generators {
                units,
                primes,
                generators,
            } => format!(
                "generators (units {units:?}, {} primes, {} generators)",
                primes.len(),
                generators.len()
            ),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub monoid: MonoidSpec,
    pub analyses: Vec<Analysis>,
    pub alpha_cap: u64,
    pub box_cap: u64,
    pub length_cap: u64,
}

pub fn parse_group(tokens: &[&str], line: usize) -> Result<FiniteGroup, ParseError> {
    // split on "x" for direct products
    let mut factors: Vec<Vec<&str>> = vec![Vec::new()];
    for &t in tokens {
        if t == "x" {
            factors.push(Vec::new());
        } else {
            factors.last_mut().unwrap().push(t);
        }
    }
    let mut parts = Vec::new();
    for f in &factors {
        let g = match f.as_slice() {
            ["cyclic", n] => FiniteGroup::cyclic(
                n.parse()
                    .map_err(|e| err(line, format!("bad cyclic order: {e}")))?,
            ),
            ["klein_four"] => FiniteGroup::klein_four(),
            ["dihedral", n] => FiniteGroup::dihedral(
                n.parse()
                    .map_err(|e| err(line, format!("bad dihedral index: {e}")))?,
            ),
            ["symmetric", "3"] => FiniteGroup::symmetric3(),
            ["quaternion", "8"] | ["quaternion"] => FiniteGroup::quaternion8(),
            other => return Err(err(line, format!("unknown group {other:?}"))),
        };
        parts.push(g);
    }
    let mut out = parts.remove(0);
    for p in parts {
        out = out.direct_product(&p);
    }
    Ok(out)
}

fn parse_factors(text: &str, line: usize) -> Result<FiniteAbelianGroup, ParseError> {
    let text = text.trim();
    if text == "1" || text.is_empty() {
        return Ok(FiniteAbelianGroup::trivial());
    }
    let factors: Result<Vec<u64>, _> = text.split(',').map(|t| t.trim().parse()).collect();
    let factors = factors.map_err(|e| err(line, format!("bad invariant factors: {e}")))?;
    FiniteAbelianGroup::new(factors).map_err(|e| err(line, e.to_string()))
}

pub fn parse_scenario(text: &str) -> Result<Scenario, ParseError> {
    let mut monoid: Option<MonoidSpec> = None;
    let mut monoid_line = 0usize;
    let mut units: Option<FiniteAbelianGroup> = None;
    let mut primes: Option<Vec<String>> = None;
    let mut generator_lines: Vec<(usize, String)> = Vec::new();
    let mut analyses: Vec<Analysis> = Vec::new();
    let mut alpha_cap = 8u64;
    let mut box_cap = 6u64;
    let mut length_cap = 8u64;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let (key, value) = trimmed
            .split_once(':')
            .ok_or_else(|| err(line, format!("expected key: value, found {trimmed:?}")))?;
        let key = key.trim();
        let value = value.trim();
        match key {
            "monoid" => {
                let tokens: Vec<&str> = value.split_whitespace().collect();
                monoid_line = line;
                monoid = Some(match tokens.as_slice() {
                    ["remark313"] => MonoidSpec::Remark313,
                    ["product_one", rest @ ..] => MonoidSpec::ProductOne {
                        group: parse_group(rest, line)?,
                    },
                    ["example43", ..] => {
                        let chain_text = value.trim_start_matches("example43").trim();
                        let chain: Result<Vec<FiniteAbelianGroup>, _> = chain_text
                            .split('>')
                            .map(|part| parse_factors(part, line))
                            .collect();
                        MonoidSpec::Example43 { chain: chain? }
                    }
                    ["generators"] => MonoidSpec::Generators {
                        units: FiniteAbelianGroup::trivial(),
                        primes: Vec::new(),
                        generators: Vec::new(),
                    },
                    other => return Err(err(line, format!("unknown monoid {other:?}"))),
                });
            }
            "units" => units = Some(parse_factors(value, line)?),
            "primes" => {
                primes = Some(value.split_whitespace().map(str::to_string).collect());
            }
            "generator" => generator_lines.push((line, value.to_string())),
            "analyses" => {
                for token in value.split(',') {
                    let token = token.trim();
                    if token.is_empty() {
                        continue;
                    }
                    analyses.push(Analysis::parse(token, line)?);
                }
            }
            "alpha_cap" => {
                alpha_cap = value
                    .parse()
                    .map_err(|e| err(line, format!("bad alpha_cap: {e}")))?;
            }
            "box_cap" => {
                box_cap = value
                    .parse()
                    .map_err(|e| err(line, format!("bad box_cap: {e}")))?;
            }
            "length_cap" => {
                length_cap = value
                    .parse()
                    .map_err(|e| err(line, format!("bad length_cap: {e}")))?;
            }
            other => return Err(err(line, format!("unknown field {other:?}"))),
        }
    }

    let mut monoid = monoid.ok_or_else(|| err(0, "missing field: monoid"))?;
    if let MonoidSpec::Generators {
        units: u,
        primes: p,
        generators: g,
    } = &mut monoid
    {
        *u = units.unwrap_or_else(FiniteAbelianGroup::trivial);
        *p = primes.ok_or_else(|| err(monoid_line, "generators monoid needs primes:"))?;
        if generator_lines.is_empty() {
            return Err(err(monoid_line, "generators monoid needs generator: lines"));
        }
        for (line, text) in &generator_lines {
            g.push(parse_generator(text, *line, u.rank(), p)?);
        }
    }
    if analyses.is_empty() {
        return Err(err(0, "missing field: analyses (at least one required)"));
    }
    if alpha_cap == 0 || box_cap == 0 || length_cap == 0 {
        return Err(err(0, "parameters must be positive"));
    }
    Ok(Scenario {
        monoid,
        analyses,
        alpha_cap,
        box_cap,
        length_cap,
    })
}

fn parse_generator(
    text: &str,
    line: usize,
    unit_rank: usize,
    primes: &[String],
) -> Result<GeneratorSpec, ParseError> {
    let mut unit_exponents = vec![0u64; unit_rank];
    let mut prime_exponents = vec![0u64; primes.len()];
    for token in text.split_whitespace() {
        let (base, exp) = match token.split_once('^') {
            Some((b, e)) => (
                b,
                e.parse::<u64>()
                    .map_err(|er| err(line, format!("bad exponent in {token:?}: {er}")))?,
            ),
            None => (token, 1),
        };
        if let Some(idx_text) = base.strip_prefix('u') {
            if let Ok(i) = idx_text.parse::<usize>() {
                if i == 0 || i > unit_rank {
                    return Err(err(line, format!("unit generator u{i} out of range")));
                }
                unit_exponents[i - 1] += exp;
                continue;
            }
        }
        match primes.iter().position(|p| p == base) {
            Some(i) => prime_exponents[i] += exp,
            None => return Err(err(line, format!("unknown prime {base:?}"))),
        }
    }
    Ok(GeneratorSpec {
        unit_exponents,
        prime_exponents,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_remark313() {
        let s = parse_scenario("monoid: remark313\nanalyses: seminormal\n").unwrap();
        assert!(matches!(s.monoid, MonoidSpec::Remark313));
        assert_eq!(s.analyses, vec![Analysis::Seminormal]);
    }

    #[test]
    fn parses_product_one_group() {
        let s = parse_scenario("monoid: product_one symmetric 3\nanalyses: seminormal\n").unwrap();
        match s.monoid {
            MonoidSpec::ProductOne { group } => assert_eq!(group.order(), 6),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn missing_analyses_is_an_error() {
        let e = parse_scenario("monoid: remark313\n").unwrap_err();
        assert!(e.message.contains("analyses"));
    }

    #[test]
    fn parses_generators_monoid() {
        let text = "monoid: generators\nunits: 2\nprimes: p q\ngenerator: p^2 q\ngenerator: u1 p\nanalyses: class_semigroup\n";
        let s = parse_scenario(text).unwrap();
        match s.monoid {
            MonoidSpec::Generators {
                units, generators, ..
            } => {
                assert_eq!(units.invariant_factors(), &[2]);
                assert_eq!(generators.len(), 2);
                assert_eq!(generators[0].prime_exponents, vec![2, 1]);
                assert_eq!(generators[1].unit_exponents, vec![1]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn parses_example43_chain() {
        let s = parse_scenario("monoid: example43 2,2 > 2 > 1\nanalyses: seminormal\n").unwrap();
        match s.monoid {
            MonoidSpec::Example43 { chain } => {
                assert_eq!(chain.len(), 3);
                assert_eq!(chain[0].invariant_factors(), &[2, 2]);
                assert!(chain[2].is_trivial());
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn reports_line_numbers() {
        let e = parse_scenario("monoid: remark313\nanalyses: bogus\n").unwrap_err();
        assert_eq!(e.line, 2);
    }
}
