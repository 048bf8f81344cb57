mod common;

use cstar::algebra::{Generator, Letter, Polynomial, Presentation, Word};
use cstar::parser::{parse_polynomial, parse_polynomial_raw, parse_problem};
use common::*;
use num_complex::Complex64;
use proptest::prelude::*;

fn pres() -> Presentation {
    Presentation::new(vec![
        Generator::new("x", true),
        Generator::new("a", false),
        Generator::new("B1", true),
    ])
    .unwrap()
}

fn polynomial_strategy() -> impl Strategy<Value = Polynomial> {
    let word = prop::collection::vec((0..3usize, any::<bool>()), 0..5).prop_map(|v| {
        // selfadjoint letters are never starred in parsed output
        Word::new(
            v.into_iter()
                .map(|(g, s)| Letter::new(g, s && g == 1))
                .collect(),
        )
    });
    let coeff = (-1e3..1e3f64, prop_oneof![Just(0.0), -10.0..10.0f64]);
    prop::collection::vec((word, coeff), 0..6).prop_map(|terms| {
        Polynomial::from_terms(
            terms
                .into_iter()
                .map(|(w, (re, im))| (w, Complex64::new(re, im))),
        )
    })
}

proptest! {
    #[test]
    fn print_then_parse_round_trips(p in polynomial_strategy()) {
        let pres = pres();
        let names = pres.names();
        let text = p.display(&names).to_string();
        let back = parse_polynomial_raw(&text, &pres).unwrap();
        prop_assert_eq!(back, p, "{}", text);
    }

    #[test]
    fn polynomial_parsing_is_total(text in "[xaB1*'^()+\\-. 0-9ie]{0,24}") {
        let pres = pres();
        if let Err(e) = parse_polynomial(&text, &pres) {
            prop_assert!(e.line == 1);
            prop_assert!(e.column >= 1 && e.column <= text.chars().count() + 1);
        }
    }

    #[test]
    fn problem_parsing_is_total(text in "(\\[[a-z]{0,12}\\]\n|[ -~]{0,30}\n){0,12}") {
        if let Err(e) = parse_problem(&text) {
            prop_assert!(e.line >= 1 && e.line <= text.lines().count().max(1));
        }
    }

    #[test]
    fn mutated_shipped_files_never_panic(file in 0..SHIPPED.len(), pos in any::<prop::sample::Index>(), ch in "[ -~\n]") {
        let mut text = problem_text(SHIPPED[file]);
        let chars: Vec<char> = text.chars().collect();
        let at = pos.index(chars.len());
        text = chars[..at].iter().chain(ch.chars().collect::<Vec<_>>().iter()).chain(chars[at + 1..].iter()).collect();
        let _ = parse_problem(&text);
    }
}

#[test]
fn shipped_files_parse() {
    for f in SHIPPED {
        let p = problem(f);
        assert!(p.level >= 1, "{f}");
    }
}

#[test]
fn chsh_structure() {
    let p = problem("chsh.csdp");
    assert_eq!(p.presentation.generators().len(), 4);
    assert_eq!(p.presentation.rules().len(), 4);
    assert_eq!(p.presentation.commuting_pairs().len(), 4);
    assert!(p.normalization);
}

#[test]
fn generated_instances_parse_back_from_their_objective() {
    let mut r = rng(5);
    for _ in 0..20 {
        let inst = random_noncommutative(&mut r);
        let names = inst.problem.names();
        let text = inst.problem.objective.poly.display(&names).to_string();
        let back = parse_polynomial(&text, &inst.problem.presentation).unwrap();
        assert_eq!(back, inst.problem.objective.poly);
    }
}
