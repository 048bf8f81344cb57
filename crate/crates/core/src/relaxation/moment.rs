use std::collections::BTreeMap;

use num_complex::Complex64;

use super::basis::Basis;
use super::RelaxationError;
use crate::algebra::{Polynomial, Presentation, Word};
use crate::exec::{try_map_indices, Execution};

/// Symbolic moment matrix: entry `(i, j)` is the normal form of
/// `γ_i γ_j*`, and every distinct word among the entries is a variable.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentStructure {
    pub basis: Basis,
    /// Row-major `n×n` table of normal forms.
    entries: Vec<Polynomial>,
    /// Distinct words of the table in canonical order.
    pub variables: Vec<Word>,
    index: BTreeMap<Word, usize>,
    /// Variable id of the normal form of `w*` when it is a single word
    /// with coefficient one.
    conjugates: Vec<Option<usize>>,
    /// Generator names, for messages.
    pub names: Vec<String>,
}

impl MomentStructure {
    pub fn size(&self) -> usize {
        self.basis.len()
    }

    pub fn entry(&self, i: usize, j: usize) -> &Polynomial {
        &self.entries[i * self.size() + j]
    }

    pub fn variable_id(&self, w: &Word) -> Option<usize> {
        self.index.get(w).copied()
    }

    /// Variable paired with `id` under the involution, if any.
    pub fn conjugate(&self, id: usize) -> Option<usize> {
        self.conjugates[id]
    }

    /// Evaluates the table at complex moments indexed like `variables`.
    pub fn evaluate(&self, moments: &[Complex64]) -> nalgebra::DMatrix<Complex64> {
        let n = self.size();
        nalgebra::DMatrix::from_fn(n, n, |i, j| {
            self.entry(i, j)
                .terms()
                .map(|(w, c)| c * moments[self.index[w]])
                .sum()
        })
    }

    /// `φ(M) = Σ M_ij nf(γ_i γ_j*)`.
    pub fn phi(&self, m: &nalgebra::DMatrix<Complex64>) -> Polynomial {
        let n = self.size();
        let mut out = Polynomial::zero();
        for i in 0..n {
            for j in 0..n {
                let mij = m[(i, j)];
                if mij.norm() == 0.0 {
                    continue;
                }
                for (w, c) in self.entry(i, j).terms() {
                    out.add_term(w.clone(), mij * c);
                }
            }
        }
        out
    }
}

pub fn moment_structure(basis: &Basis, pres: &Presentation) -> Result<MomentStructure, RelaxationError> {
    moment_structure_with(basis, pres, Execution::default())
}

/// Builds the product table, in parallel over rows when `exec` allows.
/// Variable ids follow the canonical word order, so the result does not
/// depend on `exec`.
pub fn moment_structure_with(
    basis: &Basis,
    pres: &Presentation,
    exec: Execution,
) -> Result<MomentStructure, RelaxationError> {
    let n = basis.len();
    let adjoints: Vec<Word> = basis.words.iter().map(Word::adjoint).collect();
    let rows = try_map_indices(n, exec, |i| {
        adjoints
            .iter()
            .map(|adj| pres.reduce_word(&basis.words[i].concat(adj)))
            .collect::<Result<Vec<_>, _>>()
    })?;
    let entries: Vec<Polynomial> = rows.into_iter().flatten().collect();
    let variables: Vec<Word> = entries
        .iter()
        .flat_map(|p| p.words().cloned())
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .collect();
    let index: BTreeMap<Word, usize> = variables
        .iter()
        .enumerate()
        .map(|(k, w)| (w.clone(), k))
        .collect();
    let conjugates = variables
        .iter()
        .map(|w| {
            let adj = pres.reduce_word(&w.adjoint())?;
            Ok(single_word(&adj).and_then(|v| index.get(v).copied()))
        })
        .collect::<Result<Vec<_>, RelaxationError>>()?;
    Ok(MomentStructure {
        basis: basis.clone(),
        entries,
        variables,
        index,
        conjugates,
        names: pres.names(),
    })
}

/// The word of a monomial with coefficient exactly one.
pub(crate) fn single_word(p: &Polynomial) -> Option<&Word> {
    let w = p.as_word()?;
    (p.coefficient(w) == Complex64::new(1.0, 0.0)).then_some(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Generator;
    use crate::relaxation::generate_basis;

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
    fn chsh_level_one_table() {
        let p = chsh();
        let ms = moment_structure(&generate_basis(&p, 1).unwrap(), &p).unwrap();
        assert_eq!(ms.size(), 5);
        assert_eq!(ms.entry(0, 0), &Polynomial::one());
        assert_eq!(ms.entry(1, 1), &Polynomial::one());
        let a0b0 = Polynomial::word(Word::from_generators(&[0, 2]));
        assert_eq!(ms.entry(1, 3), &a0b0);
        assert_eq!(ms.entry(3, 1), &a0b0);
        // 1, four generators, A0A1, A1A0, B0B1, B1B0, four A_x B_y
        assert_eq!(ms.variables.len(), 13);
    }

    #[test]
    fn hermitian_pairing() {
        let p = chsh();
        let ms = moment_structure(&generate_basis(&p, 1).unwrap(), &p).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                let a = ms.entry(i, j).as_word().unwrap();
                let b = ms.entry(j, i).as_word().unwrap();
                let ia = ms.variable_id(a).unwrap();
                assert_eq!(ms.conjugate(ia), ms.variable_id(b));
            }
        }
    }

    #[test]
    fn level_zero() {
        let p = chsh();
        let ms = moment_structure(&generate_basis(&p, 0).unwrap(), &p).unwrap();
        assert_eq!(ms.size(), 1);
        assert_eq!(ms.variables, vec![Word::unit()]);
    }

    #[test]
    fn sequential_and_parallel_agree() {
        let p = chsh();
        let b = generate_basis(&p, 2).unwrap();
        assert_eq!(
            moment_structure_with(&b, &p, Execution::Sequential).unwrap(),
            moment_structure_with(&b, &p, Execution::Parallel).unwrap()
        );
    }
}
