use std::cmp::Ordering;
use std::fmt;

/// A single generator occurrence, possibly starred.
///
/// Letters order by generator index first; for the same generator the
/// starred letter sorts after the unstarred one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter {
    pub generator: usize,
    pub starred: bool,
}

impl Letter {
    pub const fn new(generator: usize, starred: bool) -> Self {
        Self { generator, starred }
    }

    pub const fn plain(generator: usize) -> Self {
        Self::new(generator, false)
    }

    pub const fn star(self) -> Self {
        Self::new(self.generator, !self.starred)
    }
}

/// A formal *-monomial. The empty word is the algebra unit.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Word(Vec<Letter>);

impl Word {
    pub fn unit() -> Self {
        Self(Vec::new())
    }

    pub fn new(letters: Vec<Letter>) -> Self {
        Self(letters)
    }

    pub fn from_generators(gens: &[usize]) -> Self {
        Self(gens.iter().map(|&g| Letter::plain(g)).collect())
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    pub fn is_unit(&self) -> bool {
        self.0.is_empty()
    }

    /// The involution: reverse the letters and toggle every star.
    pub fn adjoint(&self) -> Self {
        Self(self.0.iter().rev().map(|l| l.star()).collect())
    }

    /// Concatenation `self · other`.
    pub fn concat(&self, other: &Word) -> Self {
        let mut letters = Vec::with_capacity(self.0.len() + other.0.len());
        letters.extend_from_slice(&self.0);
        letters.extend_from_slice(&other.0);
        Self(letters)
    }

    pub fn push(&mut self, letter: Letter) {
        self.0.push(letter);
    }

    pub(crate) fn splice(&self, at: usize, len: usize, middle: &Word) -> Word {
        let mut letters = Vec::with_capacity(self.0.len() - len + middle.0.len());
        letters.extend_from_slice(&self.0[..at]);
        letters.extend_from_slice(&middle.0);
        letters.extend_from_slice(&self.0[at + len..]);
        Word(letters)
    }

    pub fn display<'a>(&'a self, names: &'a [String]) -> WordDisplay<'a> {
        WordDisplay { word: self, names }
    }
}

impl From<Vec<Letter>> for Word {
    fn from(letters: Vec<Letter>) -> Self {
        Self(letters)
    }
}

/// Degree first, then lexicographic by letter.
impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .len()
            .cmp(&other.0.len())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

pub struct WordDisplay<'a> {
    word: &'a Word,
    names: &'a [String],
}

impl fmt::Display for WordDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.word.is_unit() {
            return f.write_str("1");
        }
        for (k, letter) in self.word.letters().iter().enumerate() {
            if k > 0 {
                f.write_str("*")?;
            }
            match self.names.get(letter.generator) {
                Some(name) => f.write_str(name)?,
                None => write!(f, "g{}", letter.generator)?,
            }
            if letter.starred {
                f.write_str("'")?;
            }
        }
        Ok(())
    }
}
