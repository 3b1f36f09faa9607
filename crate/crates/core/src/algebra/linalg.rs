//! Exact linear algebra over `Q(i)` and over `Q(i)[params]`.

use num_traits::{One, Zero};

use super::gaussian::GaussianRational;
use super::poly::PolyExpr;
use super::rational::RatExpr;

type Coeff = GaussianRational;

/// Rank of a dense matrix by fraction-free (Bareiss) elimination.
pub fn rank(matrix: &[Vec<Coeff>]) -> usize {
    let mut m: Vec<Vec<Coeff>> = matrix.to_vec();
    let rows = m.len();
    if rows == 0 {
        return 0;
    }
    let cols = m[0].len();
    let mut prev = Coeff::one();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let prev_inv = prev.inv().expect("pivot is nonzero");
        for i in r + 1..rows {
            for j in c + 1..cols {
                let v = &(&m[r][c] * &m[i][j]) - &(&m[i][c] * &m[r][j]);
                m[i][j] = &v * &prev_inv;
            }
            m[i][c] = Coeff::zero();
        }
        prev = m[r][c].clone();
        r += 1;
    }
    r
}

/// Incremental sparse row echelon form for `A·u = b` over `Q(i)`.
///
/// Equations are fed one at a time; pivots are always the smallest column
/// of a reduced row, so column order is the priority order for basic
/// variables. Free variables are set to zero when solving.
#[derive(Debug, Default)]
pub struct SparseSystem {
    ncols: usize,
    /// Pivot rows keyed by pivot column; each row is normalized so the
    /// pivot entry is one and contains only columns ≥ its pivot.
    pivots: std::collections::BTreeMap<usize, (Vec<(usize, Coeff)>, Coeff)>,
    inconsistent: bool,
}

fn axpy(row: &[(usize, Coeff)], k: &Coeff, pivot: &[(usize, Coeff)]) -> Vec<(usize, Coeff)> {
    // row - k * pivot
    let mut out = Vec::with_capacity(row.len() + pivot.len());
    let (mut i, mut j) = (0, 0);
    while i < row.len() || j < pivot.len() {
        let ci = row.get(i).map(|t| t.0).unwrap_or(usize::MAX);
        let cj = pivot.get(j).map(|t| t.0).unwrap_or(usize::MAX);
        if ci < cj {
            out.push(row[i].clone());
            i += 1;
        } else if cj < ci {
            out.push((cj, -(k * &pivot[j].1)));
            j += 1;
        } else {
            let v = &row[i].1 - &(k * &pivot[j].1);
            if !v.is_zero() {
                out.push((ci, v));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

impl SparseSystem {
    pub fn new(ncols: usize) -> Self {
        SparseSystem {
            ncols,
            ..Default::default()
        }
    }

    /// Add the equation `Σ row[k].1 · u[row[k].0] = rhs`.
    pub fn push(&mut self, mut row: Vec<(usize, Coeff)>, mut rhs: Coeff) {
        row.retain(|(_, c)| !c.is_zero());
        row.sort_by_key(|t| t.0);
        loop {
            let Some((col, lead)) = row.first().cloned() else {
                if !rhs.is_zero() {
                    self.inconsistent = true;
                }
                return;
            };
            match self.pivots.get(&col) {
                Some((prow, prhs)) => {
                    row = axpy(&row, &lead, prow);
                    rhs = &rhs - &(&lead * prhs);
                }
                None => {
                    let inv = lead.inv().expect("nonzero lead");
                    let row: Vec<_> = row.into_iter().map(|(c, v)| (c, &v * &inv)).collect();
                    self.pivots.insert(col, (row, &rhs * &inv));
                    return;
                }
            }
        }
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    pub fn is_consistent(&self) -> bool {
        !self.inconsistent
    }

    pub fn nullity(&self) -> usize {
        self.ncols - self.rank()
    }

    /// A solution with every free variable set to zero, if consistent.
    pub fn solve(&self) -> Option<Vec<Coeff>> {
        if self.inconsistent {
            return None;
        }
        let mut u = vec![Coeff::zero(); self.ncols];
        for (&col, (row, rhs)) in self.pivots.iter().rev() {
            let mut v = rhs.clone();
            for (c, a) in row.iter().skip(1) {
                if !u[*c].is_zero() {
                    v = &v - &(a * &u[*c]);
                }
            }
            u[col] = v;
        }
        Some(u)
    }
}

/// Outcome of [`poly_kernel`].
#[derive(Debug, Clone)]
pub struct PolyKernel {
    pub rank: usize,
    /// One kernel vector per free column, entries are rational functions of
    /// the matrix entries' variables, scaled to polynomial entries.
    pub basis: Vec<Vec<PolyExpr>>,
}

/// Rank and kernel of a matrix with polynomial entries, over the fraction
/// field. Fraction-free elimination keeps every intermediate entry a
/// polynomial (each is a minor of the input).
pub fn poly_kernel(matrix: &[Vec<PolyExpr>], ncols: usize) -> PolyKernel {
    let mut m: Vec<Vec<PolyExpr>> = matrix.to_vec();
    let rows = m.len();
    let mut prev = PolyExpr::one();
    let mut pivot_cols = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == rows {
            break;
        }
        // Prefer the sparsest nonzero pivot candidate.
        let Some(p) = (r..rows)
            .filter(|&i| !m[i][c].is_zero())
            .min_by_key(|&i| m[i][c].len())
        else {
            continue;
        };
        m.swap(r, p);
        for i in r + 1..rows {
            if m[i][c].is_zero() {
                // Row still needs the Bareiss scaling to stay consistent.
                for j in c + 1..ncols {
                    if !m[i][j].is_zero() {
                        let v = m[r][c].mul(&m[i][j]);
                        m[i][j] = v.div_exact(&prev).expect("Bareiss division is exact");
                    }
                }
                continue;
            }
            for j in c + 1..ncols {
                let v = m[r][c].mul(&m[i][j]).sub(&m[i][c].mul(&m[r][j]));
                m[i][j] = v.div_exact(&prev).expect("Bareiss division is exact");
            }
            m[i][c] = PolyExpr::zero();
        }
        prev = m[r][c].clone();
        pivot_cols.push(c);
        r += 1;
    }
    let rank = pivot_cols.len();
    let free: Vec<usize> = (0..ncols).filter(|c| !pivot_cols.contains(c)).collect();
    let mut basis = Vec::new();
    for &f in &free {
        // Back-substitute over the fraction field with u[f] = 1.
        let mut u: Vec<RatExpr> = vec![RatExpr::zero(); ncols];
        u[f] = RatExpr::one();
        for (k, &pc) in pivot_cols.iter().enumerate().rev() {
            let mut s = RatExpr::zero();
            for j in pc + 1..ncols {
                if !u[j].is_zero() && !m[k][j].is_zero() {
                    s = s.add(&RatExpr::from(m[k][j].clone()).mul(&u[j]));
                }
            }
            let piv = RatExpr::from(m[k][pc].clone());
            u[pc] = s.neg().div(&piv).expect("pivot is nonzero");
        }
        // Clear denominators.
        let mut den = super::Denominator::one();
        for e in &u {
            den = den.lcm(e.den());
        }
        basis.push(u.iter().map(|e| e.numerator_over(&den)).collect());
    }
    PolyKernel { rank, basis }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> Coeff {
        Coeff::from_integer(n)
    }

    #[test]
    fn dense_rank() {
        let m = vec![
            vec![q(1), q(2), q(3)],
            vec![q(2), q(4), q(6)],
            vec![q(1), q(0), q(1)],
        ];
        assert_eq!(rank(&m), 2);
        let dup = vec![vec![q(1), q(5)], vec![q(1), q(5)]];
        assert_eq!(rank(&dup), 1);
    }

    #[test]
    fn sparse_solve_with_free_column() {
        // u0 + u1 = 3, u1 + u2 = 2
        let mut s = SparseSystem::new(3);
        s.push(vec![(0, q(1)), (1, q(1))], q(3));
        s.push(vec![(1, q(1)), (2, q(1))], q(2));
        assert_eq!(s.rank(), 2);
        assert_eq!(s.nullity(), 1);
        let u = s.solve().unwrap();
        assert_eq!(u, vec![q(1), q(2), q(0)]);
    }

    #[test]
    fn sparse_inconsistent() {
        let mut s = SparseSystem::new(1);
        s.push(vec![(0, q(2))], q(2));
        s.push(vec![(0, q(1))], q(3));
        assert!(!s.is_consistent());
        assert!(s.solve().is_none());
    }

    #[test]
    fn kernel_of_scaled_columns() {
        let a = PolyExpr::var(crate::algebra::VarId(6));
        // columns (a, 2a): kernel (2, -1) up to scale
        let m = vec![
            vec![a.clone(), a.scale(&q(2))],
            vec![PolyExpr::one(), PolyExpr::integer(2)],
        ];
        let k = poly_kernel(&m, 2);
        assert_eq!(k.rank, 1);
        assert_eq!(k.basis.len(), 1);
        let v = &k.basis[0];
        let combo = v[0].add(&v[1].scale(&q(2)));
        assert!(combo.is_zero());
    }
}
