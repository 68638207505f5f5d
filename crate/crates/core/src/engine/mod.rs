//! Logic-programming engine shared by the preservation checker and the
//! interpreter: pattern unification plus backchaining with generic and
//! hypothetical goals.

mod solve;
mod unify;

pub use solve::{depth_limit_from_env, Answer, Engine, Flow, Program, DEFAULT_DEPTH_LIMIT};
pub use unify::{Mark, Store};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::{Formula, Term};
    use crate::syntax::{load, parse_closed_term};

    const STLC: &str = "\
type arrow typ -> typ -> typ.
type bool typ.
type abs typ -> (exp -> exp) -> exp.
type app exp -> exp -> exp.
type tt exp.
typeOf (abs T1 R) (arrow T1 T2) :- pi x\\ (typeOf x T1 => typeOf (R x) T2).
typeOf (app E1 E2) T2 :- typeOf E1 (arrow T1 T2), typeOf E2 T1.
typeOf tt bool.
value (abs T R).
value tt.
step (app (abs T R) V) (R V).
";

    fn typeof_str(src: &str) -> Option<String> {
        let lang = load("stlc.mod", STLC).unwrap();
        let prog = Program::new(lang.rules.clone());
        let mut e = Engine::new(&prog);
        let t = parse_closed_term(&lang.signature, src).unwrap();
        let ty = e.fresh_var();
        match e.prove(&[Formula::Typing(t, ty.clone())]) {
            Answer::Yes => Some(e.show(&ty)),
            _ => None,
        }
    }

    #[test]
    fn identity_function_types() {
        assert_eq!(typeof_str("abs bool x\\ x").as_deref(), Some("arrow bool bool"));
    }

    #[test]
    fn nested_application_types() {
        assert_eq!(
            typeof_str("app (abs bool x\\ app (abs bool y\\ y) x) tt").as_deref(),
            Some("bool")
        );
    }

    #[test]
    fn ill_typed_application_fails() {
        assert_eq!(typeof_str("app tt tt"), None);
    }

    #[test]
    fn beta_step_substitutes() {
        let lang = load("stlc.mod", STLC).unwrap();
        let prog = Program::new(lang.rules.clone());
        let mut e = Engine::new(&prog);
        let t = parse_closed_term(&lang.signature, "app (abs bool x\\ app x x) tt").unwrap();
        let out = e.fresh_var();
        assert_eq!(e.prove(&[Formula::Step(t, out.clone())]), Answer::Yes);
        assert_eq!(e.show(&out), "app tt tt");
    }

    #[test]
    fn depth_limit_is_reported() {
        let text = format!("{STLC}type loop exp.\ntypeOf loop T :- typeOf loop T.\n");
        let lang = load("l.mod", &text).unwrap();
        let prog = Program::new(lang.rules.clone());
        let mut e = Engine::new(&prog);
        e.depth_limit = 10;
        let ty = e.fresh_var();
        let goal = Formula::Typing(Term::atom("loop"), ty);
        assert_eq!(e.prove(&[goal]), Answer::DepthExceeded);
    }
}
