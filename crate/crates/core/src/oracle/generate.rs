//! Type-directed random generation of closed well-typed terms.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::Rng;

use super::ExecutableRuleSet;
use crate::engine::{Engine, Program};
use crate::ir::{Base, Formula, Hint, Kind, Rule, Signature, Term};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("no well-typed term found within depth {depth}")]
pub struct GenerationFailed {
    pub depth: u32,
}

/// Random closed type of kind `kind`. Arrow kinds give binders whose
/// bodies may use the bound variables.
pub fn ground_type<R: Rng + ?Sized>(sig: &Signature, kind: &Kind, depth: u32, rng: &mut R) -> Term {
    random_type(sig, kind, depth, 0, rng)
}

fn random_type<R: Rng + ?Sized>(sig: &Signature, kind: &Kind, depth: u32, bound: u32, rng: &mut R) -> Term {
    let args = kind.args();
    if !args.is_empty() {
        let inner = random_type(sig, &Kind::TYP, depth, bound + args.len() as u32, rng);
        return args
            .iter()
            .fold(inner, |body, _| Term::Bind(Hint::new("x"), body.into()));
    }
    if kind.result() == Base::Exp {
        return Term::atom("?");
    }
    if bound > 0 && rng.gen_bool(0.3) {
        return Term::Bound(rng.gen_range(0..bound));
    }
    let consts = sig.typ_constants();
    let leaves: Vec<_> = consts.iter().filter(|(_, k)| k.args().is_empty()).collect();
    let pool: Vec<_> = if depth == 0 && !leaves.is_empty() {
        leaves
    } else {
        consts.iter().collect()
    };
    let Some((c, k)) = pool.choose(rng) else {
        return Term::atom("?");
    };
    let args = k
        .args()
        .iter()
        .map(|a| random_type(sig, a, depth.saturating_sub(1), bound, rng))
        .collect();
    Term::Const((*c).clone(), args)
}

/// Upper bound on rule applications tried per generated term.
const BUDGET: u32 = 4_000;

pub struct Generator {
    sig: Signature,
    typing: Vec<Rule>,
    empty: Program,
}

struct State<'p, 'r, R: Rng + ?Sized> {
    e: Engine<'p>,
    kinds: HashMap<u32, Kind>,
    budget: u32,
    rng: &'r mut R,
}

/// A typing assumption `typeOf c T` from a hypothetical premise.
#[derive(Clone)]
struct Local {
    eigen: Term,
    ty: Term,
}

enum Choice<'a> {
    Local(&'a Local),
    Rule(&'a Rule),
}

impl Generator {
    pub fn new(rules: &ExecutableRuleSet) -> Self {
        Generator {
            sig: rules.signature.clone(),
            typing: rules.typing.clone(),
            empty: Program::new(Vec::new()),
        }
    }

    /// Generates a closed term of type `target` (any type when `None`),
    /// together with its ground type. At depth 1 only axioms and bound
    /// variables are used.
    pub fn generate<R: Rng + ?Sized>(
        &self,
        target: Option<&Term>,
        depth: u32,
        rng: &mut R,
    ) -> Result<(Term, Term), GenerationFailed> {
        let mut st = State {
            e: Engine::new(&self.empty),
            kinds: HashMap::new(),
            budget: BUDGET,
            rng,
        };
        let goal = match target {
            Some(t) => t.clone(),
            None => st.e.fresh_var(),
        };
        let Some(term) = self.gen(&mut st, &goal, depth, &[]) else {
            return Err(GenerationFailed { depth });
        };
        // Ground what the derivation left open, consistently across the
        // term and its type.
        let mut open: Vec<u32> = Vec::new();
        for t in [&term, &goal] {
            for v in st.e.resolve(t).vars() {
                if !open.contains(&v) {
                    open.push(v);
                }
            }
        }
        for v in open {
            if st.e.store.binding(v).is_some() {
                continue;
            }
            let kind = st.kinds.get(&v).cloned().unwrap_or(Kind::TYP);
            let g = ground_type(&self.sig, &kind, 2, st.rng);
            if !st.e.unify(&Term::Var(v), &g) {
                return Err(GenerationFailed { depth });
            }
        }
        let term = st.e.resolve(&term);
        let ty = st.e.resolve(&goal);
        if !term.vars().is_empty() || !ty.vars().is_empty() || !term.eigens().is_empty() {
            return Err(GenerationFailed { depth });
        }
        Ok((term, ty))
    }

    fn gen<R: Rng + ?Sized>(
        &self,
        st: &mut State<'_, '_, R>,
        goal: &Term,
        depth: u32,
        locals: &[Local],
    ) -> Option<Term> {
        if depth == 0 || st.budget == 0 {
            return None;
        }
        st.budget -= 1;
        let mut choices: Vec<Choice> = locals.iter().map(Choice::Local).collect();
        choices.extend(
            self.typing
                .iter()
                .filter(|r| depth > 1 || r.premises.is_empty())
                .map(Choice::Rule),
        );
        choices.shuffle(st.rng);
        for c in choices {
            let m = st.e.mark();
            match c {
                Choice::Local(l) => {
                    if st.e.unify(&l.ty, goal) && st.e.store.flush() && !st.e.store.has_deferred() {
                        return Some(l.eigen.clone());
                    }
                }
                Choice::Rule(r) => {
                    if let Some(t) = self.apply(st, r, goal, depth, locals) {
                        return Some(t);
                    }
                }
            }
            st.e.undo(m);
            if st.budget == 0 {
                return None;
            }
        }
        None
    }

    fn apply<R: Rng + ?Sized>(
        &self,
        st: &mut State<'_, '_, R>,
        rule: &Rule,
        goal: &Term,
        depth: u32,
        locals: &[Local],
    ) -> Option<Term> {
        let (head, premises, inst) = st.e.instantiate(rule);
        for (t, v) in inst.iter().zip(&rule.vars) {
            if let Term::Var(i) = t {
                st.kinds.insert(*i, v.kind.clone());
            }
        }
        let Formula::Typing(subject, ty) = head else { return None };
        // A flexible assigned type such as `T2 T1` is taken to be constant
        // in its arguments.
        let (h, args) = ty.spine();
        if let (Term::Var(f), false) = (h, args.is_empty()) {
            if st.e.store.binding(*f).is_none() {
                let g = st.e.resolve(goal);
                let k = args.len();
                let constant = (0..k).fold(g, |b, _| Term::Bind(Hint::new("_"), b.into()));
                if !st.e.unify(&Term::Var(*f), &constant) {
                    return None;
                }
            }
        }
        if !st.e.unify(&ty, goal) || !st.e.store.flush() || st.e.store.has_deferred() {
            return None;
        }
        for p in &premises {
            if !self.premise(st, p, depth - 1, locals) {
                return None;
            }
        }
        Some(st.e.resolve(&subject))
    }

    fn premise<R: Rng + ?Sized>(
        &self,
        st: &mut State<'_, '_, R>,
        p: &Formula,
        depth: u32,
        locals: &[Local],
    ) -> bool {
        let mut locals = locals.to_vec();
        let mut f = p.clone();
        loop {
            match f {
                Formula::Generic(_, _, body) => {
                    let c = st.e.fresh_eigen();
                    f = body.open(&c);
                }
                Formula::Hypothetical(a, c) => {
                    let Formula::Typing(x @ Term::Eigen(_), ty) = *a else { return false };
                    locals.push(Local { eigen: x, ty });
                    f = *c;
                }
                _ => break,
            }
        }
        let Formula::Typing(subject, ty) = f else { return false };
        let (h, args) = subject.spine();
        let Term::Var(r) = h else { return false };
        if st.e.store.binding(*r).is_some() {
            return false;
        }
        let mut eigens = Vec::new();
        for a in &args {
            match a {
                Term::Eigen(e) if !eigens.contains(e) => eigens.push(*e),
                _ => return false,
            }
        }
        let Some(body) = self.gen(st, &ty, depth, &locals) else { return false };
        let body = st.e.resolve(&body);
        let value = eigens
            .iter()
            .fold(body.abstract_eigens(&eigens), |b, _| Term::Bind(Hint::new("x"), b.into()));
        st.e.unify(&Term::Var(*r), &value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{elaborate, print_closed, ClosedType, Interpreter};
    use crate::syntax::{load, parse_closed_type};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::BTreeSet;

    const STLC_IF: &str = r"
type arrow typ -> typ -> typ.
type bool typ.
type abs typ -> (exp -> exp) -> exp.
type app exp -> exp -> exp.
type tt exp.
type ff exp.
type if exp -> exp -> exp -> exp.
typeOf (abs T1 R) (arrow T1 T2) :- pi x\ (typeOf x T1 => typeOf (R x) T2).
typeOf (app E1 E2) T2 :- typeOf E1 (arrow T1 T2), typeOf E2 T1.
typeOf tt bool.
typeOf ff bool.
typeOf (if E1 E2 E3) T :- typeOf E1 bool, typeOf E2 T, typeOf E3 T.
value (abs T R).
value tt.
value ff.
step (app (abs T R) V) (R V).
step (if tt E1 E2) E1.
step (if ff E1 E2) E2.
% context app E e.
% context app v E.
% context if E e e.
";

    fn setup() -> (Interpreter, Generator, Signature) {
        let lang = load("stlc.mod", STLC_IF).unwrap();
        let rs = elaborate(&lang);
        (Interpreter::new(rs.clone()), Generator::new(&rs), lang.signature)
    }

    #[test]
    fn depth_one_bool_gives_axioms() {
        let (_, g, sig) = setup();
        let bool_ty = parse_closed_type(&sig, "bool").unwrap();
        let mut seen = BTreeSet::new();
        for s in 0..40 {
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            let (t, _) = g.generate(Some(&bool_ty), 1, &mut rng).unwrap();
            seen.insert(print_closed(&t));
        }
        assert_eq!(seen, BTreeSet::from(["ff".to_string(), "tt".to_string()]));
    }

    #[test]
    fn depth_one_arrow_fails() {
        let (_, g, sig) = setup();
        let ty = parse_closed_type(&sig, "arrow bool bool").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(g.generate(Some(&ty), 1, &mut rng), Err(GenerationFailed { depth: 1 }));
    }

    #[test]
    fn identity_is_among_depth_three_arrows() {
        let (_, g, sig) = setup();
        let ty = parse_closed_type(&sig, "arrow bool bool").unwrap();
        let found = (0..200).any(|s| {
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            g.generate(Some(&ty), 3, &mut rng)
                .is_ok_and(|(t, _)| print_closed(&t) == "abs bool (x\\ x)")
        });
        assert!(found);
    }

    #[test]
    fn same_seed_same_term() {
        let (_, g, _) = setup();
        let a = g.generate(None, 5, &mut ChaCha8Rng::seed_from_u64(9));
        let b = g.generate(None, 5, &mut ChaCha8Rng::seed_from_u64(9));
        assert_eq!(a, b);
    }

    proptest::proptest! {
        #[test]
        fn generated_terms_have_their_type(seed in 0u64..10_000, depth in 1u32..6) {
            let (i, g, _) = setup();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            if let Ok((t, ty)) = g.generate(None, depth, &mut rng) {
                let (got, _) = i.typeof_closed(&t);
                proptest::prop_assert_eq!(got, ClosedType::Typed { ty, ambiguous: false });
            }
        }
    }
}
