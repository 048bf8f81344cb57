use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::moment::MomentStructure;
use super::RelaxationError;
use crate::algebra::Polynomial;

const RESIDUAL_TOL: f64 = 1e-9;

/// A matrix `M_F` with `φ(M_F) = F`.
#[derive(Clone, Debug, PartialEq)]
pub struct QDecomposition {
    pub matrix: DMatrix<Complex64>,
}

impl QDecomposition {
    /// Re-expands `M_F` through the entry table.
    pub fn expand(&self, ms: &MomentStructure) -> Polynomial {
        ms.phi(&self.matrix)
    }
}

/// Minimum-Frobenius-norm Hermitian `M` with `Σ M_ij nf(γ_i γ_j*) = F`.
///
/// Hermitian matrices are parametrized isometrically by real numbers
/// (diagonal entries, and `(a + ib)/√2` above the diagonal), which turns
/// the problem into a real least-norm solve. The system is dense in `n²`
/// unknowns, so this is meant for inspection and tests rather than for
/// large levels.
pub fn decompose_in_q(f: &Polynomial, ms: &MomentStructure) -> Result<QDecomposition, RelaxationError> {
    let not_representable = |word: String| RelaxationError::NotRepresentable {
        what: "polynomial".into(),
        word,
        level: ms.basis.level,
    };
    if let Some(w) = f.words().find(|w| ms.variable_id(w).is_none()) {
        return Err(not_representable(w.display(&ms.names).to_string()));
    }
    let n = ms.size();
    let nv = ms.variables.len();
    let params = n * n;
    let mut a = DMatrix::<f64>::zeros(2 * nv, params);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut col = 0;
    // column layout: diagonal entries, then (re, im) for each i < j
    let mut layout = Vec::with_capacity(params);
    for i in 0..n {
        layout.push((i, i, false));
    }
    for i in 0..n {
        for j in i + 1..n {
            layout.push((i, j, false));
            layout.push((i, j, true));
        }
    }
    for &(i, j, imag) in &layout {
        let contributions: Vec<(usize, Complex64)> = if i == j {
            ms.entry(i, i)
                .terms()
                .map(|(w, c)| (ms.variable_id(w).unwrap(), *c))
                .collect()
        } else {
            // M_ij = (a + ib)/√2 and M_ji = (a - ib)/√2
            let (up, down) = if imag {
                (Complex64::new(0.0, s), Complex64::new(0.0, -s))
            } else {
                (Complex64::new(s, 0.0), Complex64::new(s, 0.0))
            };
            ms.entry(i, j)
                .terms()
                .map(|(w, c)| (ms.variable_id(w).unwrap(), c * up))
                .chain(
                    ms.entry(j, i)
                        .terms()
                        .map(|(w, c)| (ms.variable_id(w).unwrap(), c * down)),
                )
                .collect()
        };
        for (v, c) in contributions {
            a[(2 * v, col)] += c.re;
            a[(2 * v + 1, col)] += c.im;
        }
        col += 1;
    }
    let mut rhs = DVector::<f64>::zeros(2 * nv);
    for (w, c) in f.terms() {
        let v = ms.variable_id(w).unwrap();
        rhs[2 * v] = c.re;
        rhs[2 * v + 1] = c.im;
    }
    let svd = a.clone().svd(true, true);
    let tol = 1e-12 * svd.singular_values.max().max(1.0);
    let x = svd
        .solve(&rhs, tol)
        .map_err(|e| not_representable(e.to_string()))?;
    let residual = (&a * &x - &rhs).amax();
    if residual > RESIDUAL_TOL * (1.0 + rhs.amax()) {
        return Err(not_representable(format!(
            "(coefficients unreachable, residual {residual:e})"
        )));
    }
    let mut m = DMatrix::<Complex64>::zeros(n, n);
    for (k, &(i, j, imag)) in layout.iter().enumerate() {
        if i == j {
            m[(i, i)] = Complex64::new(x[k], 0.0);
        } else if imag {
            m[(i, j)] += Complex64::new(0.0, s * x[k]);
            m[(j, i)] += Complex64::new(0.0, -s * x[k]);
        } else {
            m[(i, j)] += Complex64::new(s * x[k], 0.0);
            m[(j, i)] += Complex64::new(s * x[k], 0.0);
        }
    }
    Ok(QDecomposition { matrix: m })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{Generator, Presentation, Word};
    use crate::relaxation::{generate_basis, moment_structure};

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

    fn chsh_operator() -> Polynomial {
        let w = |a, b| Polynomial::word(Word::from_generators(&[a, b]));
        let mut f = &w(0, 2) + &w(1, 3);
        f = &f + &w(0, 3);
        &f - &w(1, 2)
    }

    #[test]
    fn unit_spreads_over_the_diagonal() {
        let p = chsh();
        let ms = moment_structure(&generate_basis(&p, 1).unwrap(), &p).unwrap();
        let q = decompose_in_q(&Polynomial::one(), &ms).unwrap();
        // several diagonal entries map to 1; the min-norm solution spreads
        // weight evenly over them
        for i in 0..ms.size() {
            assert!((q.matrix[(i, i)].re - 0.2).abs() < 1e-10);
        }
        assert!(q.expand(&ms).approx_eq(&Polynomial::one(), 1e-10));
    }

    #[test]
    fn chsh_operator_splits_over_cross_entries() {
        let p = chsh();
        let ms = moment_structure(&generate_basis(&p, 1).unwrap(), &p).unwrap();
        let f = chsh_operator();
        let q = decompose_in_q(&f, &ms).unwrap();
        assert!(q.expand(&ms).approx_eq(&f, 1e-10));
        // basis order 1, A0, A1, B0, B1
        assert!((q.matrix[(1, 3)].re - 0.5).abs() < 1e-10);
        assert!((q.matrix[(2, 3)].re + 0.5).abs() < 1e-10);
        assert!((q.matrix[(4, 1)].re - 0.5).abs() < 1e-10);
        let herm = (&q.matrix - q.matrix.adjoint()).iter().map(|v| v.norm()).fold(0.0, f64::max);
        assert!(herm < 1e-12);
    }

    #[test]
    fn words_beyond_the_level_are_rejected() {
        let p = chsh();
        let ms = moment_structure(&generate_basis(&p, 1).unwrap(), &p).unwrap();
        let f = Polynomial::word(Word::from_generators(&[0, 1, 0]));
        assert!(matches!(
            decompose_in_q(&f, &ms),
            Err(RelaxationError::NotRepresentable { .. })
        ));
    }
}
