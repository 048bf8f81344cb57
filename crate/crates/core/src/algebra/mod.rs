//! Formal *-algebra arithmetic: words with involution, polynomials over
//! them, and rewriting to normal forms modulo a presentation.
//!
//! Normal forms realize the kernel of the moment map operationally: two
//! products are identified exactly when they rewrite to the same
//! polynomial. The rewrite system is not completed, so identifications
//! missed by a non-confluent system only enlarge the feasible set of a
//! relaxation. Bounds stay valid.

mod poly;
mod presentation;
mod word;

pub use poly::{Polynomial, PolynomialDisplay, ZERO_TOLERANCE};
pub use presentation::{Generator, Presentation, RewriteRule, REWRITE_STEP_CAP};
pub use word::{Letter, Word, WordDisplay};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("duplicate generator name `{0}`")]
    DuplicateGenerator(String),
    #[error("unknown generator index {0}")]
    UnknownGenerator(usize),
    #[error("rules may not rewrite the unit")]
    UnitRule,
    #[error("rule for `{lhs}` is not decreasing: `{offending}` does not precede it")]
    NonDecreasingRule { lhs: String, offending: String },
    #[error("rewriting `{word}` exceeded {cap} steps")]
    RewriteCapExceeded { word: String, cap: usize },
}

pub fn word_adjoint(w: &Word) -> Word {
    w.adjoint()
}

pub fn poly_mul(p: &Polynomial, q: &Polynomial) -> Polynomial {
    p.mul(q)
}

pub fn normal_form(p: &Polynomial, pres: &Presentation) -> Result<Polynomial, AlgebraError> {
    pres.normal_form(p)
}

#[cfg(test)]
mod laws {
    use super::*;
    use proptest::prelude::*;

    fn presentation() -> Presentation {
        let gens = vec![
            Generator::new("a", true),
            Generator::new("b", true),
            Generator::new("c", false),
        ];
        let mut p = Presentation::new(gens).unwrap();
        p.add_rule(Word::from_generators(&[0, 0]), Polynomial::one())
            .unwrap();
        p.add_rule(
            Word::from_generators(&[1, 1]),
            Polynomial::word(Word::from_generators(&[1])),
        )
        .unwrap();
        p.add_commuting(0, 2).unwrap();
        p
    }

    fn word_strategy() -> impl Strategy<Value = Word> {
        prop::collection::vec((0usize..3, any::<bool>()), 0..7)
            .prop_map(|ls| Word::new(ls.into_iter().map(|(g, s)| Letter::new(g, s)).collect()))
    }

    fn poly_strategy() -> impl Strategy<Value = Polynomial> {
        prop::collection::vec((word_strategy(), -3i32..4, -2i32..3), 0..5).prop_map(|terms| {
            Polynomial::from_terms(terms.into_iter().map(|(w, re, im)| {
                (w, num_complex::Complex64::new(re as f64, im as f64))
            }))
        })
    }

    proptest! {
        #[test]
        fn normal_form_is_idempotent(p in poly_strategy()) {
            let pres = presentation();
            let once = pres.normal_form(&p).unwrap();
            let twice = pres.normal_form(&once).unwrap();
            prop_assert_eq!(once, twice);
        }

        #[test]
        fn double_adjoint_is_identity(w in word_strategy()) {
            let pres = presentation();
            prop_assert_eq!(w.adjoint().adjoint(), w.clone());
            prop_assert_eq!(
                pres.reduce_word(&w.adjoint().adjoint()).unwrap(),
                pres.reduce_word(&w).unwrap()
            );
        }

        #[test]
        fn adjoint_is_anti_homomorphism(u in word_strategy(), v in word_strategy()) {
            prop_assert_eq!(u.concat(&v).adjoint(), v.adjoint().concat(&u.adjoint()));
        }

        #[test]
        fn normal_forms_are_irreducible(w in word_strategy()) {
            let pres = presentation();
            let nf = pres.reduce_word(&w).unwrap();
            for word in nf.words() {
                prop_assert!(pres.is_irreducible(word));
            }
        }
    }
}
