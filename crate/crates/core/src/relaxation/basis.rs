use std::collections::BTreeSet;


use super::RelaxationError;
use crate::algebra::{Presentation, Word};
use crate::parser::DEFAULT_BASIS_CAP;

/// Ordered word sequence `γ` spanning the level-`d` subspace. The unit is
/// always first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Basis {
    pub level: usize,
    pub words: Vec<Word>,
}

impl Basis {
    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Words of degree at most `max_degree`, in basis order.
    pub fn truncated(&self, max_degree: usize) -> Vec<Word> {
        self.words
            .iter()
            .filter(|w| w.degree() <= max_degree)
            .cloned()
            .collect()
    }
}

pub fn generate_basis(pres: &Presentation, level: usize) -> Result<Basis, RelaxationError> {
    generate_basis_with_cap(pres, level, DEFAULT_BASIS_CAP)
}

/// All irreducible words of degree `<= level`.
///
/// A prefix of an irreducible word is irreducible, so the words are grown
/// one letter at a time from the previous layer. Normal forms of reducible
/// products consist of irreducible words of no larger degree, hence the
/// result equals the set of normal-form monomials of all products of at
/// most `level` letters.
pub fn generate_basis_with_cap(
    pres: &Presentation,
    level: usize,
    cap: usize,
) -> Result<Basis, RelaxationError> {
    let alphabet = pres.alphabet();
    let mut words = vec![Word::unit()];
    let mut layer = vec![Word::unit()];
    for _ in 0..level {
        let mut next = Vec::new();
        for w in &layer {
            for &letter in &alphabet {
                let mut candidate = w.clone();
                candidate.push(letter);
                if pres.is_irreducible(&candidate) {
                    next.push(candidate);
                    if words.len() + next.len() > cap {
                        return Err(RelaxationError::BasisTooLarge { level, cap });
                    }
                }
            }
        }
        if next.is_empty() {
            break;
        }
        words.extend(next.iter().cloned());
        layer = next;
    }
    words.sort();
    Ok(Basis { level, words })
}

/// Basis from an explicit word list. Words are put in normal form when
/// that form is a single monomial with coefficient one; duplicates are
/// dropped and the unit is put first.
pub fn explicit_basis(pres: &Presentation, words: &[Word]) -> Result<Basis, RelaxationError> {
    let mut seen = BTreeSet::new();
    let mut out = vec![Word::unit()];
    seen.insert(Word::unit());
    for w in words {
        let nf = pres.reduce_word(w)?;
        let word = match nf.as_word() {
            Some(v) => v.clone(),
            None => pres.strip_selfadjoint_stars(w),
        };
        if seen.insert(word.clone()) {
            out.push(word);
        }
    }
    let level = out.iter().map(Word::degree).max().unwrap_or(0);
    Ok(Basis { level, words: out })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{Generator, Polynomial};

    fn chsh() -> Presentation {
        let gens = ["A0", "A1", "B0", "B1"]
            .iter()
            .map(|n| Generator::new(*n, true))
            .collect();
        let mut p = Presentation::new(gens).unwrap();
        for g in 0..4 {
            p.add_rule(Word::from_generators(&[g, g]), Polynomial::one())
                .unwrap();
        }
        for a in 0..2 {
            for b in 2..4 {
                p.add_commuting(a, b).unwrap();
            }
        }
        p
    }

    #[test]
    fn chsh_level_one() {
        let b = generate_basis(&chsh(), 1).unwrap();
        let expected: Vec<Word> = std::iter::once(Word::unit())
            .chain((0..4).map(|g| Word::from_generators(&[g])))
            .collect();
        assert_eq!(b.words, expected);
    }

    #[test]
    fn chsh_level_two_counts() {
        // 1 + 4 + (A0A1, A1A0, B0B1, B1B0, and four A_x B_y)
        assert_eq!(generate_basis(&chsh(), 2).unwrap().len(), 13);
    }

    #[test]
    fn level_zero_is_unit() {
        let b = generate_basis(&chsh(), 0).unwrap();
        assert_eq!(b.words, vec![Word::unit()]);
    }

    #[test]
    fn free_selfadjoint_variable() {
        let p = Presentation::new(vec![Generator::new("x", true)]).unwrap();
        let b = generate_basis(&p, 2).unwrap();
        assert_eq!(
            b.words,
            vec![Word::unit(), Word::from_generators(&[0]), Word::from_generators(&[0, 0])]
        );
    }

    #[test]
    fn non_selfadjoint_letters_include_stars() {
        let p = Presentation::new(vec![Generator::new("a", false)]).unwrap();
        assert_eq!(generate_basis(&p, 1).unwrap().len(), 3);
        assert_eq!(generate_basis(&p, 2).unwrap().len(), 7);
    }

    #[test]
    fn cap_is_enforced() {
        let gens = (0..4).map(|i| Generator::new(format!("x{i}"), false)).collect();
        let p = Presentation::new(gens).unwrap();
        assert!(matches!(
            generate_basis_with_cap(&p, 4, 2000),
            Err(RelaxationError::BasisTooLarge { .. })
        ));
    }

    #[test]
    fn explicit_list_is_normalized() {
        let p = chsh();
        let words = vec![
            Word::from_generators(&[2, 0]),
            Word::from_generators(&[0, 2]),
            Word::from_generators(&[0, 0]),
        ];
        let b = explicit_basis(&p, &words).unwrap();
        assert_eq!(b.words, vec![Word::unit(), Word::from_generators(&[0, 2])]);
        assert_eq!(b.level, 2);
    }
}
