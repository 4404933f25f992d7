//! Exact Gaussian elimination over the Gaussian rationals.

use crate::scalar::GaussianRational as Gq;

/// Reduces `rows` to reduced row echelon form in place, dropping zero rows,
/// and returns the pivot column of each remaining row.
pub fn rref(rows: &mut Vec<Vec<Gq>>, ncols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..ncols {
        if r == rows.len() {
            break;
        }
        let Some(sel) = (r..rows.len()).find(|&i| !rows[i][col].is_zero()) else { continue };
        rows.swap(r, sel);
        let inv = rows[r][col].inv().expect("nonzero pivot");
        for x in rows[r].iter_mut() {
            if !x.is_zero() {
                *x = &*x * &inv;
            }
        }
        let pivot_row = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i == r || row[col].is_zero() {
                continue;
            }
            let f = row[col].clone();
            for (x, p) in row.iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *x -= &(p * &f);
                }
            }
        }
        pivots.push(col);
        r += 1;
    }
    rows.truncate(r);
    pivots
}

/// Outcome of adding an equation to an [`EchelonSystem`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RowOutcome {
    /// The equation raised the rank.
    Pivot,
    /// The equation was implied by earlier ones.
    Redundant,
    /// The equation contradicts earlier ones; the value is the reduced
    /// right-hand side.
    Inconsistent(Gq),
}

/// Incrementally built system `A x = b` with a fixed number of unknowns.
#[derive(Debug, Clone)]
pub struct EchelonSystem {
    n: usize,
    /// Rows `(pivot, coefficients, rhs)` with unit pivot, kept reduced
    /// against each other.
    rows: Vec<(usize, Vec<Gq>, Gq)>,
    inconsistent: usize,
    equations: usize,
}

impl EchelonSystem {
    pub fn new(unknowns: usize) -> Self {
        EchelonSystem { n: unknowns, rows: Vec::new(), inconsistent: 0, equations: 0 }
    }

    pub fn unknowns(&self) -> usize {
        self.n
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn equations(&self) -> usize {
        self.equations
    }

    pub fn inconsistent(&self) -> usize {
        self.inconsistent
    }

    pub fn add(&mut self, mut a: Vec<Gq>, mut b: Gq) -> RowOutcome {
        assert_eq!(a.len(), self.n, "equation width");
        self.equations += 1;
        for (p, row, rhs) in &self.rows {
            if a[*p].is_zero() {
                continue;
            }
            let f = a[*p].clone();
            for (x, r) in a.iter_mut().zip(row) {
                if !r.is_zero() {
                    *x -= &(r * &f);
                }
            }
            b -= &(rhs * &f);
        }
        let Some(p) = a.iter().position(|x| !x.is_zero()) else {
            if b.is_zero() {
                return RowOutcome::Redundant;
            }
            self.inconsistent += 1;
            return RowOutcome::Inconsistent(b);
        };
        let inv = a[p].inv().expect("nonzero pivot");
        for x in a.iter_mut() {
            *x = &*x * &inv;
        }
        b = &b * &inv;
        for (_, row, rhs) in self.rows.iter_mut() {
            if row[p].is_zero() {
                continue;
            }
            let f = row[p].clone();
            for (x, r) in row.iter_mut().zip(&a) {
                if !r.is_zero() {
                    *x -= &(r * &f);
                }
            }
            *rhs -= &(&b * &f);
        }
        self.rows.push((p, a, b));
        RowOutcome::Pivot
    }

    /// The unique solution when the system is consistent with full rank.
    pub fn solution(&self) -> Option<Vec<Gq>> {
        if self.inconsistent > 0 || self.rows.len() < self.n {
            return None;
        }
        let mut x = vec![Gq::zero(); self.n];
        for (p, _, rhs) in &self.rows {
            x[*p] = rhs.clone();
        }
        Some(x)
    }

    /// Unknowns without a pivot.
    pub fn free_unknowns(&self) -> Vec<usize> {
        (0..self.n).filter(|i| !self.rows.iter().any(|(p, _, _)| p == i)).collect()
    }

    /// Identifiable linear combinations: the reduced rows and their values.
    pub fn reduced_rows(&self) -> Vec<(Vec<Gq>, Gq)> {
        let mut v: Vec<_> = self.rows.iter().map(|(p, a, b)| (*p, a.clone(), b.clone())).collect();
        v.sort_by_key(|r| r.0);
        v.into_iter().map(|(_, a, b)| (a, b)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(n: i64) -> Gq {
        Gq::from_int(n)
    }

    #[test]
    fn rref_rank_two() {
        let mut m = vec![vec![g(1), g(2), g(3)], vec![g(2), g(4), g(6)], vec![g(0), g(1), g(1)]];
        let piv = rref(&mut m, 3);
        assert_eq!(piv, vec![0, 1]);
        assert_eq!(m[0], vec![g(1), g(0), g(1)]);
    }

    #[test]
    fn echelon_solves() {
        let mut s = EchelonSystem::new(2);
        assert_eq!(s.add(vec![g(1), g(1)], g(3)), RowOutcome::Pivot);
        assert_eq!(s.add(vec![g(2), g(2)], g(6)), RowOutcome::Redundant);
        assert_eq!(s.add(vec![g(1), g(-1)], g(1)), RowOutcome::Pivot);
        assert_eq!(s.solution(), Some(vec![g(2), g(1)]));
        assert!(matches!(s.add(vec![g(1), g(0)], g(5)), RowOutcome::Inconsistent(_)));
        assert_eq!(s.solution(), None);
    }
}
