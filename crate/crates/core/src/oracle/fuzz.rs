//! Randomized soundness testing: generate well-typed closed terms and
//! evaluate them, looking for stuck terms and type changes.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{print_closed, ExecutableRuleSet, Generator, Interpreter, MAX_TERM_SIZE};
use crate::engine::Answer;
use crate::par;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FuzzConfig {
    pub count: usize,
    pub depth: u32,
    pub max_steps: usize,
    pub seed: u64,
    /// Run on one thread even when built with the parallel feature.
    pub serial: bool,
}

impl Default for FuzzConfig {
    fn default() -> Self {
        FuzzConfig {
            count: 200,
            depth: 6,
            max_steps: 1000,
            seed: 42,
            serial: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FuzzFinding {
    /// Index of the generated term within the campaign.
    pub index: usize,
    #[serde(rename = "type")]
    pub ty: String,
    /// Evaluation trace, oldest first, truncated to its last entries.
    pub trace: Vec<String>,
    /// For a preservation violation, the successor that lost the type.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub successor: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FuzzReport {
    pub language: String,
    pub seed: u64,
    pub count: usize,
    pub depth: u32,
    pub max_steps: usize,
    pub generated: usize,
    pub generation_failures: usize,
    pub stuck: Vec<FuzzFinding>,
    pub preservation_violations: Vec<FuzzFinding>,
    pub budget_exhausted: usize,
    /// Reachable values that also step or are errors.
    pub value_overlaps: Vec<String>,
}

impl FuzzReport {
    pub fn sound(&self) -> bool {
        self.stuck.is_empty() && self.preservation_violations.is_empty()
    }
}

const TRACE_KEEP: usize = 12;
/// Exhaustive successor checking applies up to this term depth.
const EXHAUSTIVE_DEPTH: usize = 3;
const ATTEMPTS: usize = 20;

/// Seed of the `i`-th term, independent of how the campaign is split.
fn seed_for(seed: u64, i: usize) -> u64 {
    seed ^ (i as u64).wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

enum Outcome {
    NoTerm,
    Done { overlap: Option<String> },
    Budget { overlap: Option<String> },
    Stuck(FuzzFinding, Option<String>),
    Violation(FuzzFinding, Option<String>),
}

fn keep(trace: &[String]) -> Vec<String> {
    trace[trace.len().saturating_sub(TRACE_KEEP)..].to_vec()
}

fn one(interp: &Interpreter, gen: &Generator, cfg: &FuzzConfig, index: usize) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed_for(cfg.seed, index));
    let Some((term, ty)) = (0..ATTEMPTS).find_map(|_| gen.generate(None, cfg.depth, &mut rng).ok())
    else {
        return Outcome::NoTerm;
    };
    if interp.has_type(&term, &ty) != Answer::Yes {
        // The generator and the checker disagree; not a soundness finding.
        return Outcome::NoTerm;
    }
    let ty_s = print_closed(&ty);
    let mut trace = vec![print_closed(&term)];
    let mut cur = term;
    let mut overlap = None;
    for _ in 0..cfg.max_steps {
        if cur.size() > MAX_TERM_SIZE {
            return Outcome::Budget { overlap };
        }
        let succs = interp.step(&cur);
        let value = interp.is_value(&cur) == Answer::Yes;
        let error = interp.is_error(&cur) == Answer::Yes;
        if value && (error || !succs.is_empty()) && overlap.is_none() {
            overlap = Some(print_closed(&cur));
        }
        if succs.is_empty() {
            if value || error {
                return Outcome::Done { overlap };
            }
            let f = FuzzFinding {
                index,
                ty: ty_s,
                trace: keep(&trace),
                successor: None,
            };
            return Outcome::Stuck(f, overlap);
        }
        let pick = rng.gen_range(0..succs.len());
        let checked: Vec<&crate::ir::Term> = if cur.depth() <= EXHAUSTIVE_DEPTH {
            succs.iter().collect()
        } else {
            vec![&succs[pick]]
        };
        for s in checked {
            if interp.has_type(s, &ty) == Answer::No {
                let f = FuzzFinding {
                    index,
                    ty: ty_s,
                    trace: keep(&trace),
                    successor: Some(print_closed(s)),
                };
                return Outcome::Violation(f, overlap);
            }
        }
        cur = succs[pick].clone();
        trace.push(print_closed(&cur));
    }
    if interp.step(&cur).is_empty() {
        Outcome::Done { overlap }
    } else {
        Outcome::Budget { overlap }
    }
}

/// Runs a campaign. Results depend only on the configuration, not on how
/// work is spread over threads.
pub fn fuzz_soundness(rules: &ExecutableRuleSet, cfg: &FuzzConfig) -> FuzzReport {
    let interp = Interpreter::new(rules.clone());
    let gen = Generator::new(rules);
    let outcomes = par::map_indices(cfg.count, cfg.serial, |i| one(&interp, &gen, cfg, i));
    let mut r = FuzzReport {
        language: rules.name.clone(),
        seed: cfg.seed,
        count: cfg.count,
        depth: cfg.depth,
        max_steps: cfg.max_steps,
        generated: 0,
        generation_failures: 0,
        stuck: Vec::new(),
        preservation_violations: Vec::new(),
        budget_exhausted: 0,
        value_overlaps: Vec::new(),
    };
    for o in outcomes {
        let overlap = match o {
            Outcome::NoTerm => {
                r.generation_failures += 1;
                continue;
            }
            Outcome::Done { overlap } => overlap,
            Outcome::Budget { overlap } => {
                r.budget_exhausted += 1;
                overlap
            }
            Outcome::Stuck(f, overlap) => {
                r.stuck.push(f);
                overlap
            }
            Outcome::Violation(f, overlap) => {
                r.preservation_violations.push(f);
                overlap
            }
        };
        r.generated += 1;
        if let Some(t) = overlap {
            if !r.value_overlaps.contains(&t) {
                r.value_overlaps.push(t);
            }
        }
    }
    r
}
