//! Random instance generation and the instance text format.
//!
//! The generator rejection-samples: plant a random partition of the
//! universe as the intended exact cover, add overlapping filler sets,
//! then accept only if the brute-force oracle confirms the planted
//! selection is the unique exact cover, the unique objective argmax,
//! the weight policy holds, and the conflict graph is connected.
//! Everything is deterministic given the seed.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::oracle::{solve, solve_tail, verify_lambda_policy};
use crate::problem::{
    conflict_graph, default_lambdas, default_tail_lambdas, MecInstance, TailInstance,
};

/// Recipe for one random instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GenSpec {
    pub set_count: usize,
    pub universe_size: usize,
    /// Cardinality of the planted cover; drawn per attempt from
    /// 2..=max(2, set_count/2) when absent.
    pub planted_size: Option<usize>,
    pub seed: u64,
    pub max_attempts: usize,
}

impl GenSpec {
    pub fn new(set_count: usize, universe_size: usize, seed: u64) -> Self {
        GenSpec {
            set_count,
            universe_size,
            planted_size: None,
            seed,
            max_attempts: 10_000,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.set_count < 2 {
            return Err(Error::Domain(format!(
                "need at least 2 sets, got {}",
                self.set_count
            )));
        }
        if self.universe_size < self.set_count {
            return Err(Error::Domain(format!(
                "universe size {} must be at least the set count {}",
                self.universe_size, self.set_count
            )));
        }
        if let Some(k) = self.planted_size {
            if k < 2 || k > self.set_count {
                return Err(Error::Domain(format!(
                    "planted size {k} outside 2..={}",
                    self.set_count
                )));
            }
        }
        if self.max_attempts == 0 {
            return Err(Error::Domain("max_attempts must be positive".into()));
        }
        Ok(())
    }
}

/// Draws one candidate instance; `None` means this attempt failed a
/// construction constraint and the caller should retry.
fn try_generate(spec: &GenSpec, rng: &mut ChaCha8Rng) -> Option<(MecInstance, usize)> {
    let n = spec.set_count;
    let m = spec.universe_size;
    let planted_size = spec
        .planted_size
        .unwrap_or_else(|| rng.random_range(2..=(n / 2).max(2)));
    if planted_size > n {
        return None;
    }

    // Planted cover: shuffle the universe and cut it into blocks, so
    // the blocks partition {1..m} and are each nonempty.
    let mut elements: Vec<usize> = (1..=m).collect();
    elements.shuffle(rng);
    let mut cuts: Vec<usize> = rand::seq::index::sample(rng, m - 1, planted_size - 1)
        .iter()
        .map(|c| c + 1)
        .collect();
    cuts.sort_unstable();
    cuts.insert(0, 0);
    cuts.push(m);
    let blocks: Vec<Vec<usize>> = cuts
        .windows(2)
        .map(|w| elements[w[0]..w[1]].to_vec())
        .collect();

    let mask_of = |set: &[usize]| set.iter().fold(0u64, |acc, &e| acc | 1u64 << (e - 1));
    let mut used_masks: HashSet<u64> = blocks.iter().map(|b| mask_of(b)).collect();

    // Fillers overlap freely; every subset of the universe intersects
    // some planted block, and each filler after the first is forced to
    // intersect an earlier filler so no filler is isolated from the
    // others.
    let mut fillers: Vec<Vec<usize>> = Vec::new();
    let mut filler_union = 0u64;
    for j in 0..n - planted_size {
        let mut accepted = None;
        for _ in 0..30 {
            let size = rng.random_range(2..=m - 1);
            let mut candidate: Vec<usize> = rand::seq::index::sample(rng, m, size)
                .iter()
                .map(|e| e + 1)
                .collect();
            let mut mask = mask_of(&candidate);
            if j > 0 && mask & filler_union == 0 {
                // Swap one element for one drawn from the other fillers.
                let victim = rng.random_range(0..candidate.len());
                let pool: Vec<usize> =
                    (1..=m).filter(|&e| filler_union >> (e - 1) & 1 == 1).collect();
                candidate[victim] = pool[rng.random_range(0..pool.len())];
                mask = mask_of(&candidate);
            }
            if used_masks.contains(&mask) {
                continue;
            }
            used_masks.insert(mask);
            accepted = Some((candidate, mask));
            break;
        }
        let (candidate, mask) = accepted?;
        filler_union |= mask;
        fillers.push(candidate);
    }

    // Shuffle set order so the planted cover lands on random qubits.
    let mut labeled: Vec<(Vec<usize>, bool)> = blocks
        .into_iter()
        .map(|b| (b, true))
        .chain(fillers.into_iter().map(|f| (f, false)))
        .collect();
    labeled.shuffle(rng);
    let planted_mask = labeled
        .iter()
        .enumerate()
        .filter(|(_, (_, is_planted))| *is_planted)
        .fold(0usize, |acc, (i, _)| acc | 1 << i);
    let sets: Vec<Vec<usize>> = labeled.into_iter().map(|(s, _)| s).collect();
    let instance = MecInstance::new(m, sets).ok()?;
    Some((instance, planted_mask))
}

fn accept(instance: &MecInstance, planted_mask: usize) -> bool {
    if !conflict_graph(instance).is_connected() {
        return false;
    }
    let Ok(report) = solve(instance) else {
        return false;
    };
    if report.exact_covers != vec![planted_mask] || report.experiment_solution() != Some(planted_mask)
    {
        return false;
    }
    let Ok(lambdas) = default_lambdas(instance.set_count(), instance.universe_size()) else {
        return false;
    };
    verify_lambda_policy(instance, &lambdas).unwrap_or(false)
}

/// Generates an instance whose planted cover is provably the unique
/// exact cover, unique minimum cover, and unique objective argmax.
pub fn generate(spec: &GenSpec) -> Result<MecInstance> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    for _ in 0..spec.max_attempts {
        if let Some((instance, planted_mask)) = try_generate(spec, &mut rng) {
            if accept(&instance, planted_mask) {
                return Ok(instance);
            }
        }
    }
    Err(Error::Generation(format!(
        "no acceptable instance with n={} m={} after {} attempts",
        spec.set_count, spec.universe_size, spec.max_attempts
    )))
}

/// Recipe for a tail instance: structure from `base`, route costs
/// uniform in [cost_min, cost_max].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailGenSpec {
    pub base: GenSpec,
    pub cost_min: f64,
    pub cost_max: f64,
}

impl TailGenSpec {
    pub fn new(route_count: usize, flight_count: usize, seed: u64) -> Self {
        TailGenSpec {
            base: GenSpec::new(route_count, flight_count, seed),
            cost_min: 0.0,
            cost_max: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        if !(self.cost_min.is_finite() && self.cost_max.is_finite())
            || self.cost_min < 0.0
            || self.cost_max < self.cost_min
        {
            return Err(Error::Domain(format!(
                "cost range [{}, {}] must be finite with 0 <= min <= max",
                self.cost_min, self.cost_max
            )));
        }
        Ok(())
    }
}

/// Generates a tail instance whose planted cover is the unique exact
/// cover and the unique argmax of the cost-aware objective under the
/// default weights.
pub fn generate_tail(spec: &TailGenSpec) -> Result<TailInstance> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.base.seed);
    for _ in 0..spec.base.max_attempts {
        let Some((instance, planted_mask)) = try_generate(&spec.base, &mut rng) else {
            continue;
        };
        let costs: Vec<f64> = (0..instance.set_count())
            .map(|_| {
                if spec.cost_max > spec.cost_min {
                    rng.random_range(spec.cost_min..spec.cost_max)
                } else {
                    spec.cost_min
                }
            })
            .collect();
        if !accept(&instance, planted_mask) {
            continue;
        }
        let Ok(tail) = TailInstance::new(
            instance.universe_size(),
            instance.sets().to_vec(),
            costs,
        ) else {
            continue;
        };
        let Ok(lambdas) = default_tail_lambdas(tail.route_count(), tail.flight_count()) else {
            continue;
        };
        let Ok(report) = solve_tail(&tail, &lambdas) else {
            continue;
        };
        if report.x_sol == Some(planted_mask) && report.exact_covers == vec![planted_mask] {
            return Ok(tail);
        }
    }
    Err(Error::Generation(format!(
        "no acceptable tail instance with n={} m={} after {} attempts",
        spec.base.set_count, spec.base.universe_size, spec.base.max_attempts
    )))
}

struct Directive {
    line: usize,
    elements: Vec<usize>,
    cost: Option<f64>,
}

struct ParsedFile {
    universe: usize,
    directives: Vec<Directive>,
}

fn parse_lines(text: &str) -> Result<ParsedFile> {
    let mut universe: Option<(usize, usize)> = None;
    let mut directives = Vec::new();
    for (index, raw) in text.lines().enumerate() {
        let line = index + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut tokens = content.split_whitespace();
        match tokens.next() {
            Some("universe") => {
                if universe.is_some() {
                    return Err(Error::Parse {
                        line,
                        message: "duplicate universe directive".into(),
                    });
                }
                let value = tokens.next().ok_or(Error::Parse {
                    line,
                    message: "universe needs a size".into(),
                })?;
                let m: usize = value.parse().map_err(|_| Error::Parse {
                    line,
                    message: format!("invalid universe size {value:?}"),
                })?;
                if tokens.next().is_some() {
                    return Err(Error::Parse {
                        line,
                        message: "unexpected tokens after universe size".into(),
                    });
                }
                universe = Some((m, line));
            }
            Some("set") => {
                if universe.is_none() {
                    return Err(Error::Parse {
                        line,
                        message: "set before universe directive".into(),
                    });
                }
                let mut elements = Vec::new();
                let mut cost = None;
                while let Some(token) = tokens.next() {
                    if token == "cost" {
                        let value = tokens.next().ok_or(Error::Parse {
                            line,
                            message: "cost needs a value".into(),
                        })?;
                        let parsed: f64 = value.parse().map_err(|_| Error::Parse {
                            line,
                            message: format!("invalid cost {value:?}"),
                        })?;
                        if tokens.next().is_some() {
                            return Err(Error::Parse {
                                line,
                                message: "unexpected tokens after cost".into(),
                            });
                        }
                        cost = Some(parsed);
                        break;
                    }
                    let element: usize = token.parse().map_err(|_| Error::Parse {
                        line,
                        message: format!("invalid element {token:?}"),
                    })?;
                    if let Some(&previous) = elements.last() {
                        if element <= previous {
                            return Err(Error::Parse {
                                line,
                                message: format!(
                                    "elements must be strictly ascending, {element} after {previous}"
                                ),
                            });
                        }
                    }
                    elements.push(element);
                }
                directives.push(Directive {
                    line,
                    elements,
                    cost,
                });
            }
            Some(other) => {
                return Err(Error::Parse {
                    line,
                    message: format!("unknown directive {other:?}"),
                });
            }
            None => unreachable!("blank lines are skipped"),
        }
    }
    let (universe, _) = universe.ok_or(Error::Parse {
        line: text.lines().count().max(1),
        message: "missing universe directive".into(),
    })?;
    Ok(ParsedFile {
        universe,
        directives,
    })
}

/// Parses the plain instance format; `cost` directives are rejected.
pub fn parse_instance(text: &str) -> Result<MecInstance> {
    let parsed = parse_lines(text)?;
    let mut sets = Vec::with_capacity(parsed.directives.len());
    for directive in parsed.directives {
        if directive.cost.is_some() {
            return Err(Error::Parse {
                line: directive.line,
                message: "cost is only valid in tail instances".into(),
            });
        }
        sets.push(directive.elements);
    }
    MecInstance::new(parsed.universe, sets)
}

/// Parses the cost-bearing tail format; a missing cost means 0.
pub fn parse_tail_instance(text: &str) -> Result<TailInstance> {
    let parsed = parse_lines(text)?;
    let mut routes = Vec::with_capacity(parsed.directives.len());
    let mut costs = Vec::with_capacity(parsed.directives.len());
    for directive in parsed.directives {
        costs.push(directive.cost.unwrap_or(0.0));
        routes.push(directive.elements);
    }
    TailInstance::new(parsed.universe, routes, costs)
}

pub fn serialize_instance(instance: &MecInstance) -> String {
    let mut out = format!("universe {}\n", instance.universe_size());
    for set in instance.sets() {
        out.push_str("set ");
        out.push_str(
            &set.iter()
                .map(|e| e.to_string())
                .collect::<Vec<_>>()
                .join(" "),
        );
        out.push('\n');
    }
    out
}

pub fn serialize_tail_instance(tail: &TailInstance) -> String {
    let mut out = format!("universe {}\n", tail.flight_count());
    for (route, cost) in tail.routes().iter().zip(tail.costs()) {
        out.push_str("set ");
        out.push_str(
            &route
                .iter()
                .map(|e| e.to_string())
                .collect::<Vec<_>>()
                .join(" "),
        );
        out.push_str(&format!(" cost {cost}\n"));
    }
    out
}
