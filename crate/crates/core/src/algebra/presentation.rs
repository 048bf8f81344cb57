use std::collections::{BTreeSet, HashMap};

use num_complex::Complex64;

use super::poly::Polynomial;
use super::word::{Letter, Word};
use super::AlgebraError;

/// Rewrite steps allowed per input word before giving up.
pub const REWRITE_STEP_CAP: usize = 10_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Generator {
    pub name: String,
    pub selfadjoint: bool,
}

impl Generator {
    pub fn new(name: impl Into<String>, selfadjoint: bool) -> Self {
        Self {
            name: name.into(),
            selfadjoint,
        }
    }
}

/// Oriented rule `lhs → rhs`; every word of `rhs` is strictly smaller than `lhs`.
#[derive(Clone, Debug, PartialEq)]
pub struct RewriteRule {
    pub lhs: Word,
    pub rhs: Polynomial,
}

/// A unital *-algebra given by generators, oriented relations and
/// commuting generator pairs.
///
/// Besides the explicit rules, two families are implied: `g* → g` for
/// every selfadjoint generator and `b a → a b` (both letters with the same
/// star flag) for every commuting pair with `a < b`.
#[derive(Clone, Debug, Default)]
pub struct Presentation {
    generators: Vec<Generator>,
    rules: Vec<RewriteRule>,
    commuting: BTreeSet<(usize, usize)>,
    by_first_letter: HashMap<Letter, Vec<usize>>,
}

impl Presentation {
    pub fn new(generators: Vec<Generator>) -> Result<Self, AlgebraError> {
        let mut seen = BTreeSet::new();
        for g in &generators {
            if !seen.insert(g.name.as_str()) {
                return Err(AlgebraError::DuplicateGenerator(g.name.clone()));
            }
        }
        Ok(Self {
            generators,
            ..Self::default()
        })
    }

    pub fn generators(&self) -> &[Generator] {
        &self.generators
    }

    pub fn names(&self) -> Vec<String> {
        self.generators.iter().map(|g| g.name.clone()).collect()
    }

    pub fn generator_index(&self, name: &str) -> Option<usize> {
        self.generators.iter().position(|g| g.name == name)
    }

    pub fn rules(&self) -> &[RewriteRule] {
        &self.rules
    }

    pub fn commuting_pairs(&self) -> &BTreeSet<(usize, usize)> {
        &self.commuting
    }

    pub fn commute(&self, a: usize, b: usize) -> bool {
        let key = if a < b { (a, b) } else { (b, a) };
        self.commuting.contains(&key)
    }

    /// True when all generators are selfadjoint and pairwise commuting.
    pub fn is_commutative(&self) -> bool {
        let n = self.generators.len();
        self.generators.iter().all(|g| g.selfadjoint)
            && (0..n).all(|a| (a + 1..n).all(|b| self.commute(a, b)))
    }

    /// Replaces starred letters of selfadjoint generators by plain ones.
    pub fn strip_selfadjoint_stars(&self, word: &Word) -> Word {
        Word::new(
            word.letters()
                .iter()
                .map(|l| {
                    if l.starred && self.generators[l.generator].selfadjoint {
                        Letter::plain(l.generator)
                    } else {
                        *l
                    }
                })
                .collect(),
        )
    }

    pub fn add_commuting(&mut self, a: usize, b: usize) -> Result<(), AlgebraError> {
        let n = self.generators.len();
        if a >= n || b >= n {
            return Err(AlgebraError::UnknownGenerator(a.max(b)));
        }
        if a != b {
            self.commuting.insert((a.min(b), a.max(b)));
        }
        Ok(())
    }

    /// Adds `lhs → rhs`. Selfadjoint stars in both sides are stripped first;
    /// the rule is rejected unless every word of `rhs` precedes `lhs`.
    pub fn add_rule(&mut self, lhs: Word, rhs: Polynomial) -> Result<(), AlgebraError> {
        let n = self.generators.len();
        if lhs.is_unit() {
            return Err(AlgebraError::UnitRule);
        }
        let lhs = self.strip_selfadjoint_stars(&lhs);
        let mut clean_rhs = Polynomial::zero();
        for (w, c) in rhs.terms() {
            if let Some(l) = w.letters().iter().find(|l| l.generator >= n) {
                return Err(AlgebraError::UnknownGenerator(l.generator));
            }
            clean_rhs.add_term(self.strip_selfadjoint_stars(w), *c);
        }
        if let Some(l) = lhs.letters().iter().find(|l| l.generator >= n) {
            return Err(AlgebraError::UnknownGenerator(l.generator));
        }
        if let Some(bad) = clean_rhs.words().find(|w| **w >= lhs) {
            let names = self.names();
            return Err(AlgebraError::NonDecreasingRule {
                lhs: lhs.display(&names).to_string(),
                offending: bad.display(&names).to_string(),
            });
        }
        let first = lhs.letters()[0];
        self.by_first_letter
            .entry(first)
            .or_default()
            .push(self.rules.len());
        self.rules.push(RewriteRule {
            lhs,
            rhs: clean_rhs,
        });
        Ok(())
    }

    /// Finds the leftmost redex of `word`. Among redexes starting at the
    /// same position the shortest explicit rule wins, then commutation.
    fn find_redex(&self, word: &Word) -> Option<Redex<'_>> {
        let letters = word.letters();
        for start in 0..letters.len() {
            let mut best: Option<&RewriteRule> = None;
            if let Some(candidates) = self.by_first_letter.get(&letters[start]) {
                for &r in candidates {
                    let rule = &self.rules[r];
                    let lhs = rule.lhs.letters();
                    if letters[start..].starts_with(lhs)
                        && best.is_none_or(|b| lhs.len() < b.lhs.degree())
                    {
                        best = Some(rule);
                    }
                }
            }
            if let Some(rule) = best {
                return Some(Redex::Rule { start, rule });
            }
            if start + 1 < letters.len() {
                let (left, right) = (letters[start], letters[start + 1]);
                // ab = ba gives a*b* = b*a*; a*b = ba* only follows when
                // one side is selfadjoint
                let flags_ok = left.starred == right.starred
                    || self.generators[left.generator].selfadjoint
                    || self.generators[right.generator].selfadjoint;
                if left.generator > right.generator
                    && flags_ok
                    && self.commute(left.generator, right.generator)
                {
                    return Some(Redex::Swap { start });
                }
            }
        }
        None
    }

    /// Rewrites a single word to its normal form.
    pub fn reduce_word(&self, word: &Word) -> Result<Polynomial, AlgebraError> {
        let mut out = Polynomial::zero();
        self.reduce_into(word, Complex64::new(1.0, 0.0), &mut out)?;
        Ok(out)
    }

    fn reduce_into(
        &self,
        word: &Word,
        coeff: Complex64,
        out: &mut Polynomial,
    ) -> Result<(), AlgebraError> {
        let mut stack = vec![(self.strip_selfadjoint_stars(word), coeff)];
        let mut steps = 0usize;
        while let Some((w, c)) = stack.pop() {
            match self.find_redex(&w) {
                None => out.add_term(w, c),
                Some(redex) => {
                    steps += 1;
                    if steps > REWRITE_STEP_CAP {
                        return Err(AlgebraError::RewriteCapExceeded {
                            word: word.display(&self.names()).to_string(),
                            cap: REWRITE_STEP_CAP,
                        });
                    }
                    match redex {
                        Redex::Swap { start } => {
                            let mut letters = w.letters().to_vec();
                            letters.swap(start, start + 1);
                            stack.push((Word::new(letters), c));
                        }
                        Redex::Rule { start, rule } => {
                            for (rw, rc) in rule.rhs.terms() {
                                let next = w.splice(start, rule.lhs.degree(), rw);
                                stack.push((next, c * rc));
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Rewrites every word of `p` to fixpoint.
    pub fn normal_form(&self, p: &Polynomial) -> Result<Polynomial, AlgebraError> {
        let mut out = Polynomial::zero();
        for (w, c) in p.terms() {
            self.reduce_into(w, *c, &mut out)?;
        }
        Ok(out)
    }

    /// True when `word` admits no rewrite (including implicit rules).
    pub fn is_irreducible(&self, word: &Word) -> bool {
        self.strip_selfadjoint_stars(word) == *word && self.find_redex(word).is_none()
    }

    /// Letters that may appear in irreducible words: every generator, plus
    /// the starred form of the non-selfadjoint ones.
    pub fn alphabet(&self) -> Vec<Letter> {
        let mut letters = Vec::new();
        for (i, g) in self.generators.iter().enumerate() {
            letters.push(Letter::plain(i));
            if !g.selfadjoint {
                letters.push(Letter::new(i, true));
            }
        }
        letters
    }

    /// True when the normal form of `p` equals that of its adjoint.
    pub fn is_selfadjoint(&self, p: &Polynomial, tol: f64) -> Result<bool, AlgebraError> {
        let nf = self.normal_form(p)?;
        let nf_adj = self.normal_form(&p.adjoint())?;
        Ok(nf.approx_eq(&nf_adj, tol))
    }
}

enum Redex<'a> {
    Rule { start: usize, rule: &'a RewriteRule },
    Swap { start: usize },
}
