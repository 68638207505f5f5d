//! Depth-first backchaining over rules, hypotheses and environment facts.

use std::collections::HashMap;
use std::rc::Rc;

use super::unify::{Mark, Store};
use crate::ir::{Formula, Name, Pred, Printer, Rule, Term};

/// Default bound on the nesting of backchaining steps.
pub const DEFAULT_DEPTH_LIMIT: u32 = 50;

/// Depth limit, honouring `LANGCERT_DEPTH_LIMIT` when set.
pub fn depth_limit_from_env() -> u32 {
    std::env::var("LANGCERT_DEPTH_LIMIT")
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(DEFAULT_DEPTH_LIMIT)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Flow {
    Continue,
    Stop,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub enum Answer {
    Yes,
    No,
    DepthExceeded,
}

/// Rules indexed by predicate and by the head constant of their subject.
#[derive(Clone, Debug, Default)]
pub struct Program {
    rules: Vec<Rule>,
    by_pred: HashMap<Pred, Vec<(usize, Option<Name>)>>,
}

impl Program {
    pub fn new(rules: Vec<Rule>) -> Self {
        let mut by_pred: HashMap<Pred, Vec<(usize, Option<Name>)>> = HashMap::new();
        for (i, r) in rules.iter().enumerate() {
            by_pred
                .entry(r.pred())
                .or_default()
                .push((i, r.head_op().cloned()));
        }
        Program { rules, by_pred }
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    fn candidates(&self, pred: Pred) -> &[(usize, Option<Name>)] {
        self.by_pred.get(&pred).map(Vec::as_slice).unwrap_or(&[])
    }
}

type Hyps = Option<Rc<HypNode>>;

struct HypNode {
    fact: Formula,
    next: Hyps,
}

enum Goal {
    Prove { f: Formula, hyps: Hyps, depth: u32 },
    Flush,
}

type Goals = Option<Rc<GoalNode>>;

struct GoalNode {
    goal: Goal,
    next: Goals,
}

fn push(goal: Goal, next: Goals) -> Goals {
    Some(Rc::new(GoalNode { goal, next }))
}

pub struct Engine<'p> {
    program: &'p Program,
    pub store: Store,
    /// Facts usable as axioms in every goal, tried before the program.
    env: Vec<Formula>,
    pub depth_limit: u32,
    /// Upper bound on resolution steps per query.
    pub step_limit: u64,
    steps: u64,
    exceeded: bool,
    trace: Option<Vec<String>>,
    eigen_names: HashMap<u32, String>,
}

impl<'p> Engine<'p> {
    pub fn new(program: &'p Program) -> Self {
        Engine {
            program,
            store: Store::new(),
            env: Vec::new(),
            depth_limit: DEFAULT_DEPTH_LIMIT,
            step_limit: 200_000,
            steps: 0,
            exceeded: false,
            trace: None,
            eigen_names: HashMap::new(),
        }
    }

    pub fn program(&self) -> &'p Program {
        self.program
    }

    pub fn set_env(&mut self, facts: Vec<Formula>) {
        self.env = facts;
    }

    pub fn env(&self) -> &[Formula] {
        &self.env
    }

    pub fn enable_trace(&mut self) {
        self.trace = Some(Vec::new());
    }

    pub fn take_trace(&mut self) -> Vec<String> {
        self.trace.take().unwrap_or_default()
    }

    pub fn name_eigen(&mut self, e: u32, n: String) {
        self.eigen_names.insert(e, n);
    }

    pub fn mark(&self) -> Mark {
        self.store.mark()
    }

    pub fn undo(&mut self, m: Mark) {
        self.store.undo(m)
    }

    pub fn fresh_var(&mut self) -> Term {
        self.store.fresh_var()
    }

    pub fn fresh_eigen(&mut self) -> Term {
        self.store.fresh_eigen()
    }

    pub fn unify(&mut self, a: &Term, b: &Term) -> bool {
        self.store.unify(a, b)
    }

    pub fn resolve(&self, t: &Term) -> Term {
        self.store.resolve(t)
    }

    pub fn resolve_formula(&self, f: &Formula) -> Formula {
        f.map_terms(&mut |t, _| self.store.resolve(t))
    }

    /// Renders a resolved term, naming eigens that were registered.
    pub fn show(&self, t: &Term) -> String {
        let names = |e: u32| {
            self.eigen_names
                .get(&e)
                .cloned()
                .unwrap_or_else(|| format!("_c{e}"))
        };
        let vars = |v: u32| format!("_V{v}");
        Printer {
            var_name: &vars,
            eigen_name: &names,
        }
        .print(&self.resolve(t))
    }

    pub fn show_formula(&self, f: &Formula) -> String {
        let names = |e: u32| {
            self.eigen_names
                .get(&e)
                .cloned()
                .unwrap_or_else(|| format!("_c{e}"))
        };
        let vars = |v: u32| format!("_V{v}");
        self.resolve_formula(f).print(&Printer {
            var_name: &vars,
            eigen_name: &names,
        })
    }

    /// Renames a rule apart: its conclusion and premises over fresh
    /// variables, plus the variable instantiation.
    pub fn instantiate(&mut self, rule: &Rule) -> (Formula, Vec<Formula>, Vec<Term>) {
        let base = self.store.fresh_vars(rule.vars.len());
        let inst: Vec<Term> = (0..rule.vars.len() as u32).map(|i| Term::Var(base + i)).collect();
        let head = rule.conclusion.shift_vars(base);
        let body = rule.premises.iter().map(|p| p.shift_vars(base)).collect();
        (head, body, inst)
    }

    /// Opens generic wrappers of a fact with fresh variables and splits off
    /// hypothetical assumptions, giving a clause `head :- body`.
    fn fact_clause(&mut self, fact: &Formula) -> (Formula, Vec<Formula>) {
        let mut body = Vec::new();
        let mut f = fact.clone();
        loop {
            match f {
                Formula::Generic(_, _, b) => {
                    let v = self.fresh_var();
                    f = b.open(&v);
                }
                Formula::Hypothetical(a, c) => {
                    body.push(*a);
                    f = *c;
                }
                atom => return (atom, body),
            }
        }
    }

    fn unify_atoms(&mut self, a: &Formula, b: &Formula) -> bool {
        if a.pred() != b.pred() {
            return false;
        }
        a.args()
            .into_iter()
            .zip(b.args())
            .all(|(x, y)| self.store.unify(x, y))
    }

    /// Proves `goals` in order, calling `on_solution` for each proof. The
    /// bindings of the proof on which `on_solution` returns `Stop` are kept.
    pub fn solve(&mut self, goals: &[Formula], on_solution: &mut dyn FnMut(&mut Engine) -> Flow) -> Flow {
        self.exceeded = false;
        self.steps = 0;
        let mut list: Goals = push(Goal::Flush, None);
        for g in goals.iter().rev() {
            list = push(
                Goal::Prove {
                    f: g.clone(),
                    hyps: None,
                    depth: 0,
                },
                list,
            );
        }
        self.run(list, on_solution)
    }

    /// First proof of `goals`; bindings are kept on success.
    pub fn prove(&mut self, goals: &[Formula]) -> Answer {
        let flow = self.solve(goals, &mut |e: &mut Engine| {
            if e.store.has_deferred() {
                Flow::Continue
            } else {
                Flow::Stop
            }
        });
        match flow {
            Flow::Stop => Answer::Yes,
            Flow::Continue if self.exceeded => Answer::DepthExceeded,
            Flow::Continue => Answer::No,
        }
    }

    /// Whether the last query hit the depth or step limit somewhere.
    pub fn exceeded(&self) -> bool {
        self.exceeded
    }

    fn log(&mut self, depth: u32, line: impl FnOnce(&Self) -> String) {
        if self.trace.is_some() {
            let text = line(self);
            let indent = "  ".repeat(depth as usize);
            if let Some(t) = self.trace.as_mut() {
                t.push(format!("{indent}{text}"));
            }
        }
    }

    fn run(&mut self, goals: Goals, k: &mut dyn FnMut(&mut Engine) -> Flow) -> Flow {
        let Some(node) = goals else {
            return k(self);
        };
        let rest = node.next.clone();
        match &node.goal {
            Goal::Flush => {
                let m = self.mark();
                if self.store.flush() && self.run(rest, k) == Flow::Stop {
                    return Flow::Stop;
                }
                self.undo(m);
                Flow::Continue
            }
            Goal::Prove { f, hyps, depth } => {
                let (depth, hyps) = (*depth, hyps.clone());
                if depth > self.depth_limit || self.steps >= self.step_limit {
                    self.exceeded = true;
                    self.log(depth, |_| "depth limit reached".to_string());
                    return Flow::Continue;
                }
                self.steps += 1;
                match f {
                    Formula::Generic(h, _, body) => {
                        let e = self.fresh_eigen();
                        if let Term::Eigen(i) = e {
                            self.eigen_names.entry(i).or_insert_with(|| h.0.to_string());
                        }
                        let g = Goal::Prove {
                            f: body.open(&e),
                            hyps,
                            depth,
                        };
                        self.run(push(g, rest), k)
                    }
                    Formula::Hypothetical(a, c) => {
                        let hyps = Some(Rc::new(HypNode {
                            fact: (**a).clone(),
                            next: hyps,
                        }));
                        let g = Goal::Prove {
                            f: (**c).clone(),
                            hyps,
                            depth,
                        };
                        self.run(push(g, rest), k)
                    }
                    atom => self.prove_atom(atom, hyps, depth, rest, k),
                }
            }
        }
    }

    fn prove_atom(
        &mut self,
        goal: &Formula,
        hyps: Hyps,
        depth: u32,
        rest: Goals,
        k: &mut dyn FnMut(&mut Engine) -> Flow,
    ) -> Flow {
        self.log(depth, |e| e.show_formula(goal));
        // Local hypotheses, innermost first.
        let mut h = hyps.clone();
        while let Some(node) = h {
            let fact = node.fact.clone();
            if self.try_fact(&fact, goal, &hyps, depth, &rest, k, "hypothesis") == Flow::Stop {
                return Flow::Stop;
            }
            h = node.next.clone();
        }
        for i in 0..self.env.len() {
            let fact = self.env[i].clone();
            if self.try_fact(&fact, goal, &hyps, depth, &rest, k, "environment") == Flow::Stop {
                return Flow::Stop;
            }
        }
        let pred = goal.pred().expect("atomic goal");
        let subject_head = goal
            .subject()
            .map(|s| self.store.whnf(s))
            .and_then(|s| s.head().cloned());
        let program = self.program;
        for (idx, head) in program.candidates(pred) {
            if let (Some(want), Some(have)) = (&subject_head, head) {
                if want != have {
                    continue;
                }
            }
            let rule = &program.rules()[*idx];
            let m = self.mark();
            let (head, body, _) = self.instantiate(rule);
            if self.unify_atoms(&head, goal) {
                self.log(depth, |_| format!("by {}", rule.name));
                let mut next = push(Goal::Flush, rest.clone());
                for p in body.into_iter().rev() {
                    next = push(
                        Goal::Prove {
                            f: p,
                            hyps: hyps.clone(),
                            depth: depth + 1,
                        },
                        next,
                    );
                }
                if self.run(next, k) == Flow::Stop {
                    return Flow::Stop;
                }
            }
            self.undo(m);
        }
        Flow::Continue
    }

    #[allow(clippy::too_many_arguments)]
    fn try_fact(
        &mut self,
        fact: &Formula,
        goal: &Formula,
        hyps: &Hyps,
        depth: u32,
        rest: &Goals,
        k: &mut dyn FnMut(&mut Engine) -> Flow,
        origin: &str,
    ) -> Flow {
        if fact.core().pred() != goal.pred() {
            return Flow::Continue;
        }
        let m = self.mark();
        let (head, body) = self.fact_clause(fact);
        if self.unify_atoms(&head, goal) {
            self.log(depth, |_| format!("by {origin}"));
            let mut next = push(Goal::Flush, rest.clone());
            for p in body.into_iter().rev() {
                next = push(
                    Goal::Prove {
                        f: p,
                        hyps: hyps.clone(),
                        depth: depth + 1,
                    },
                    next,
                );
            }
            if self.run(next, k) == Flow::Stop {
                return Flow::Stop;
            }
        }
        self.undo(m);
        Flow::Continue
    }
}
