//! Linear matrix inequalities in real variables and their conversion to
//! standard-form models.
//!
//! An [`Lmi`] is
//!
//! ```text
//! minimize   c0 + c·r
//! subject to G_0 + Σ_k r_k G_k ⪰ 0      (Hermitian blocks)
//!            a_e·r = β_e                 (equalities)
//! ```
//!
//! Equalities are eliminated by substitution, leaving free variables `z`
//! with `r = r0 + T z`. The remaining inequality is the dual of the
//! standard-form model `min <G_0, X> s.t. <G_j, X> = c_j, X ⪰ 0`, whose dual
//! multipliers are `y = -z` and whose dual slack is `G(z)` itself.

use std::collections::BTreeMap;

use num_complex::Complex64;

use super::hermitian::{realify, HermitianConstraint, HermitianModel, HermitianSparse};
use super::model::{BlockKind, BlockSpec, SdpModel, Sense};
use super::SdpError;

const PIVOT_TOL: f64 = 1e-12;
const CONSISTENCY_TOL: f64 = 1e-9;

/// `constant + Σ coeff_k r_k` with complex coefficients over real variables.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ComplexAffine {
    pub constant: Complex64,
    pub terms: BTreeMap<usize, Complex64>,
}

impl ComplexAffine {
    pub fn constant(c: Complex64) -> Self {
        Self {
            constant: c,
            terms: BTreeMap::new(),
        }
    }

    pub fn add_term(&mut self, var: usize, coeff: Complex64) {
        if coeff == Complex64::new(0.0, 0.0) {
            return;
        }
        let slot = self.terms.entry(var).or_default();
        *slot += coeff;
        if *slot == Complex64::new(0.0, 0.0) {
            self.terms.remove(&var);
        }
    }

    pub fn conj(&self) -> Self {
        Self {
            constant: self.constant.conj(),
            terms: self.terms.iter().map(|(&k, v)| (k, v.conj())).collect(),
        }
    }

    pub fn eval(&self, r: &[f64]) -> Complex64 {
        self.constant + self.terms.iter().map(|(&k, &v)| v * r[k]).sum::<Complex64>()
    }

    fn is_real(&self) -> bool {
        self.constant.im == 0.0 && self.terms.values().all(|v| v.im == 0.0)
    }
}

/// Upper-triangle entry of an LMI block.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineEntry {
    pub row: usize,
    pub col: usize,
    pub expr: ComplexAffine,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LmiBlock {
    pub spec: BlockSpec,
    pub entries: Vec<AffineEntry>,
}

impl LmiBlock {
    pub fn new(spec: BlockSpec) -> Self {
        Self {
            spec,
            entries: Vec::new(),
        }
    }

    /// Sets entry `(row, col)`; lower-triangle positions are conjugated to
    /// the upper triangle.
    pub fn push(&mut self, row: usize, col: usize, expr: ComplexAffine) {
        if row <= col {
            self.entries.push(AffineEntry { row, col, expr });
        } else {
            self.entries.push(AffineEntry {
                row: col,
                col: row,
                expr: expr.conj(),
            });
        }
    }

    /// Dense Hermitian value at `r`.
    pub fn eval(&self, r: &[f64]) -> nalgebra::DMatrix<Complex64> {
        let n = self.spec.size;
        let mut m = nalgebra::DMatrix::zeros(n, n);
        for e in &self.entries {
            let v = e.expr.eval(r);
            m[(e.row, e.col)] += v;
            if e.row != e.col {
                m[(e.col, e.row)] += v.conj();
            }
        }
        m
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Lmi {
    pub num_vars: usize,
    pub objective: BTreeMap<usize, f64>,
    pub objective_constant: f64,
    pub blocks: Vec<LmiBlock>,
    pub equalities: Vec<(BTreeMap<usize, f64>, f64)>,
}

/// Result of equality elimination that needs no solver.
#[derive(Clone, Debug, PartialEq)]
pub enum Presolve {
    Ready,
    /// The equalities are inconsistent.
    Infeasible(String),
    /// A free variable moves the objective but no matrix entry.
    Unbounded(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct LmiReduction {
    /// Standard-form model whose dual is the reduced LMI.
    pub model: SdpModel,
    /// Objective constant after substitution.
    pub offset: f64,
    /// Original variable values for `z = 0`.
    pub base: Vec<f64>,
    /// `r_k = base_k + Σ_j columns[k][j] z_j`.
    pub columns: Vec<BTreeMap<usize, f64>>,
    pub num_free: usize,
    /// Whether blocks were doubled to real form.
    pub realified: bool,
    pub presolve: Presolve,
}

impl LmiReduction {
    /// Original variables from the solver's dual multipliers (`z = -y`).
    pub fn recover(&self, y: &[f64]) -> Vec<f64> {
        self.base
            .iter()
            .zip(&self.columns)
            .map(|(b, col)| b - col.iter().map(|(&j, &t)| t * y[j]).sum::<f64>())
            .collect()
    }

    /// LMI value certified by a primal-feasible point with objective `pobj`
    /// (a lower bound on the LMI minimum).
    pub fn bound_from_primal(&self, pobj: f64) -> f64 {
        self.offset - pobj
    }

    /// LMI objective at the point recovered from a dual iterate.
    pub fn value_from_dual(&self, dobj: f64) -> f64 {
        self.offset - dobj
    }
}

type Subst = (f64, BTreeMap<usize, f64>);

fn substitute(row: &BTreeMap<usize, f64>, rhs: f64, subst: &BTreeMap<usize, Subst>) -> (BTreeMap<usize, f64>, f64) {
    let mut out: BTreeMap<usize, f64> = BTreeMap::new();
    let mut rhs = rhs;
    for (&k, &a) in row {
        match subst.get(&k) {
            Some((c, expr)) => {
                rhs -= a * c;
                for (&j, &t) in expr {
                    *out.entry(j).or_default() += a * t;
                }
            }
            None => *out.entry(k).or_default() += a,
        }
    }
    (out, rhs)
}

impl Lmi {
    pub fn new(num_vars: usize) -> Self {
        Self {
            num_vars,
            ..Self::default()
        }
    }

    pub fn add_equality(&mut self, row: BTreeMap<usize, f64>, rhs: f64) {
        self.equalities.push((row, rhs));
    }

    /// Checks `r` against the equalities and PSD blocks; returns the largest
    /// equality residual and the smallest block eigenvalue.
    pub fn check(&self, r: &[f64]) -> (f64, f64) {
        let eq = self
            .equalities
            .iter()
            .map(|(row, rhs)| (row.iter().map(|(&k, &a)| a * r[k]).sum::<f64>() - rhs).abs())
            .fold(0.0, f64::max);
        let eig = self
            .blocks
            .iter()
            .map(|b| {
                let m = b.eval(r);
                nalgebra::SymmetricEigen::new(m).eigenvalues.min()
            })
            .fold(f64::INFINITY, f64::min);
        (eq, eig)
    }

    pub fn objective_value(&self, r: &[f64]) -> f64 {
        self.objective_constant + self.objective.iter().map(|(&k, &c)| c * r[k]).sum::<f64>()
    }

    /// Eliminates equalities and builds the standard-form model.
    pub fn reduce(&self) -> Result<LmiReduction, SdpError> {
        for b in &self.blocks {
            for e in &b.entries {
                if e.col >= b.spec.size {
                    return Err(SdpError::DimensionMismatch(format!(
                        "LMI entry ({}, {}) outside block of size {}",
                        e.row + 1,
                        e.col + 1,
                        b.spec.size
                    )));
                }
                if e.expr.terms.keys().any(|&k| k >= self.num_vars) {
                    return Err(SdpError::DimensionMismatch("LMI variable out of range".into()));
                }
            }
        }

        let mut subst: BTreeMap<usize, Subst> = BTreeMap::new();
        let mut presolve = Presolve::Ready;
        for (idx, (row, rhs)) in self.equalities.iter().enumerate() {
            let (mut reduced, rhs) = substitute(row, *rhs, &subst);
            let scale = reduced.values().fold(0.0f64, |m, v| m.max(v.abs()));
            reduced.retain(|_, v| v.abs() > PIVOT_TOL * scale.max(1.0));
            let Some((&p, &ap)) = reduced
                .iter()
                .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()).then(b.0.cmp(a.0)))
            else {
                if rhs.abs() > CONSISTENCY_TOL * (1.0 + scale) {
                    presolve = Presolve::Infeasible(format!(
                        "equality {} is inconsistent with earlier ones (residual {rhs:e})",
                        idx + 1
                    ));
                }
                continue;
            };
            let expr: BTreeMap<usize, f64> = reduced
                .iter()
                .filter(|(&k, _)| k != p)
                .map(|(&k, &a)| (k, -a / ap))
                .collect();
            let c = rhs / ap;
            // keep earlier substitutions expressed in free variables only
            for (c_old, e_old) in subst.values_mut() {
                if let Some(t) = e_old.remove(&p) {
                    *c_old += t * c;
                    for (&k, &a) in &expr {
                        let slot = e_old.entry(k).or_default();
                        *slot += t * a;
                        if *slot == 0.0 {
                            e_old.remove(&k);
                        }
                    }
                }
            }
            subst.insert(p, (c, expr));
        }

        // r_k = base_k + Σ_f t_kf w_f over surviving original variables w
        let survivors: Vec<usize> = (0..self.num_vars).filter(|k| !subst.contains_key(k)).collect();
        let mut full: Vec<Subst> = (0..self.num_vars)
            .map(|k| match subst.get(&k) {
                Some(s) => s.clone(),
                None => (0.0, BTreeMap::from([(k, 1.0)])),
            })
            .collect();

        // substituted objective and block columns indexed by survivor id
        let mut obj_const = self.objective_constant;
        let mut obj: BTreeMap<usize, f64> = BTreeMap::new();
        for (&k, &c) in &self.objective {
            obj_const += c * full[k].0;
            for (&j, &t) in &full[k].1 {
                *obj.entry(j).or_default() += c * t;
            }
        }
        let mut g0 = HermitianSparse::new();
        let mut cols: BTreeMap<usize, HermitianSparse> = BTreeMap::new();
        let mut real = true;
        for (bi, b) in self.blocks.iter().enumerate() {
            for e in &b.entries {
                if b.spec.kind == BlockKind::Diagonal && e.row != e.col {
                    return Err(SdpError::NonHermitian(format!(
                        "off-diagonal entry in diagonal LMI block {}",
                        bi + 1
                    )));
                }
                real &= e.expr.is_real();
                let mut c0 = e.expr.constant;
                let mut lin: BTreeMap<usize, Complex64> = BTreeMap::new();
                for (&k, &a) in &e.expr.terms {
                    c0 += a * full[k].0;
                    for (&j, &t) in &full[k].1 {
                        *lin.entry(j).or_default() += a * t;
                    }
                }
                if e.row == e.col {
                    c0.im = 0.0;
                    for v in lin.values_mut() {
                        v.im = 0.0;
                    }
                }
                g0.add(bi, e.row, e.col, c0);
                for (j, a) in lin {
                    if a.norm() > 0.0 {
                        cols.entry(j).or_default().add(bi, e.row, e.col, a);
                    }
                }
            }
        }
        g0.canonicalize();
        for m in cols.values_mut() {
            m.canonicalize();
        }

        let mut free: Vec<usize> = Vec::new();
        for &w in &survivors {
            let has_matrix = cols.get(&w).is_some_and(|m| !m.entries().is_empty());
            let c = obj.get(&w).copied().unwrap_or(0.0);
            if has_matrix {
                free.push(w);
            } else if c.abs() > PIVOT_TOL && presolve == Presolve::Ready {
                presolve = Presolve::Unbounded(format!(
                    "variable {} enters the objective but no matrix entry",
                    w + 1
                ));
            }
        }
        let slot: BTreeMap<usize, usize> = free.iter().enumerate().map(|(j, &w)| (w, j)).collect();
        // unused survivors are fixed at zero
        for f in &mut full {
            f.1 = f
                .1
                .iter()
                .filter_map(|(w, &t)| slot.get(w).map(|&j| (j, t)))
                .collect();
        }

        let blocks: Vec<BlockSpec> = self.blocks.iter().map(|b| b.spec).collect();
        let herm = HermitianModel {
            blocks,
            cost: g0,
            constraints: free
                .iter()
                .map(|w| HermitianConstraint {
                    matrix: cols.remove(w).unwrap_or_default(),
                    sense: Sense::Eq,
                    rhs: obj.get(w).copied().unwrap_or(0.0),
                })
                .collect(),
        };
        let realified = !(real && herm.is_real());
        let model = if realified { realify(&herm)? } else { herm.to_real()? };
        Ok(LmiReduction {
            model,
            offset: obj_const,
            base: full.iter().map(|f| f.0).collect(),
            columns: full.into_iter().map(|f| f.1).collect(),
            num_free: free.len(),
            realified,
            presolve,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn re(v: f64) -> Complex64 {
        Complex64::new(v, 0.0)
    }

    /// [[1, r0], [r0, r1]] ⪰ 0, r1 + r0 = 3, min r1.
    fn small() -> Lmi {
        let mut lmi = Lmi::new(2);
        let mut b = LmiBlock::new(BlockSpec::dense(2));
        b.push(0, 0, ComplexAffine::constant(re(1.0)));
        let mut e = ComplexAffine::default();
        e.add_term(0, re(1.0));
        b.push(1, 0, e);
        let mut e = ComplexAffine::default();
        e.add_term(1, re(1.0));
        b.push(1, 1, e);
        lmi.blocks.push(b);
        lmi.objective.insert(1, 1.0);
        lmi.add_equality(BTreeMap::from([(0, 1.0), (1, 1.0)]), 3.0);
        lmi
    }

    #[test]
    fn elimination_keeps_one_free_variable() {
        let red = small().reduce().unwrap();
        assert_eq!(red.presolve, Presolve::Ready);
        assert_eq!(red.num_free, 1);
        assert!(!red.realified);
        assert_eq!(red.model.num_constraints(), 1);
        // any y maps back onto the equality
        for y in [-2.0, 0.0, 0.7] {
            let r = red.recover(&[y]);
            assert!((r[0] + r[1] - 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn inconsistent_equalities_detected() {
        let mut lmi = small();
        lmi.add_equality(BTreeMap::from([(0, 2.0), (1, 2.0)]), 5.0);
        let red = lmi.reduce().unwrap();
        assert!(matches!(red.presolve, Presolve::Infeasible(_)));
        let mut lmi = small();
        lmi.add_equality(BTreeMap::from([(0, 2.0), (1, 2.0)]), 6.0);
        assert_eq!(lmi.reduce().unwrap().presolve, Presolve::Ready);
    }

    #[test]
    fn objective_without_matrix_is_unbounded() {
        let mut lmi = small();
        lmi.num_vars = 3;
        lmi.objective.insert(2, 1.0);
        assert!(matches!(lmi.reduce().unwrap().presolve, Presolve::Unbounded(_)));
    }

    #[test]
    fn complex_entries_are_realified() {
        let mut lmi = Lmi::new(1);
        let mut b = LmiBlock::new(BlockSpec::dense(2));
        b.push(0, 0, ComplexAffine::constant(re(1.0)));
        b.push(1, 1, ComplexAffine::constant(re(1.0)));
        let mut e = ComplexAffine::default();
        e.add_term(0, Complex64::new(0.0, 1.0));
        b.push(0, 1, e);
        lmi.blocks.push(b);
        lmi.objective.insert(0, 1.0);
        let red = lmi.reduce().unwrap();
        assert!(red.realified);
        assert_eq!(red.model.blocks, vec![BlockSpec::dense(4)]);
    }
}
