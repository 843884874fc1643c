//! Dense two-phase simplex with Bland's rule.
//!
//! Solves `max c.x  s.t.  A x = b, x >= 0` on small dense instances. The
//! solver is generic over the scalar so the same pivoting code runs on f64
//! and, when f64 hits degenerate ties it cannot resolve cleanly, on exact
//! rationals. Bland's rule (smallest eligible index, both for entering and
//! leaving) guarantees termination.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Scalar requirements for the tableau arithmetic.
pub trait LpScalar:
    Clone
    + PartialOrd
    + std::ops::Add<Output = Self>
    + std::ops::Sub<Output = Self>
    + std::ops::Mul<Output = Self>
    + std::ops::Div<Output = Self>
    + std::ops::Neg<Output = Self>
    + Zero
    + One
{
    /// Treat magnitudes at or below this as zero during pivoting.
    fn negligible(&self) -> bool;
}

impl LpScalar for f64 {
    fn negligible(&self) -> bool {
        self.abs() <= 1e-9
    }
}

impl LpScalar for BigRational {
    fn negligible(&self) -> bool {
        self.is_zero()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone)]
pub struct LpSolution<T> {
    pub status: LpStatus,
    pub x: Vec<T>,
    pub objective: T,
}

struct Tableau<T> {
    rows: usize,
    cols: usize, // structural + artificial variables
    a: Vec<Vec<T>>, // rows x (cols + 1); last column is the rhs
    basis: Vec<usize>,
}

impl<T: LpScalar> Tableau<T> {
    fn pivot(&mut self, row: usize, col: usize) {
        let piv = self.a[row][col].clone();
        for v in self.a[row].iter_mut() {
            *v = v.clone() / piv.clone();
        }
        for r in 0..self.rows {
            if r != row && !self.a[r][col].negligible() {
                let factor = self.a[r][col].clone();
                for c in 0..=self.cols {
                    let delta = factor.clone() * self.a[row][c].clone();
                    self.a[r][c] = self.a[r][c].clone() - delta;
                }
            }
        }
        self.basis[row] = col;
    }

    /// Maximize `obj` (length `cols`) over the current feasible basis.
    /// Returns false when the objective is unbounded above.
    fn optimize(&mut self, obj: &[T], allowed: usize) -> bool {
        loop {
            // reduced costs: c_j - c_B . B^{-1} A_j, computed directly
            let mut entering = None;
            for j in 0..allowed {
                if self.basis.contains(&j) {
                    continue;
                }
                let mut reduced = obj[j].clone();
                for r in 0..self.rows {
                    reduced =
                        reduced - obj[self.basis[r]].clone() * self.a[r][j].clone();
                }
                if reduced > T::zero() && !reduced.negligible() {
                    entering = Some(j); // Bland: first eligible index
                    break;
                }
            }
            let Some(col) = entering else { return true };
            let mut leaving: Option<usize> = None;
            for r in 0..self.rows {
                if self.a[r][col] > T::zero() && !self.a[r][col].negligible() {
                    let better = match leaving {
                        None => true,
                        Some(lr) => {
                            let cur = self.a[r][self.cols].clone() / self.a[r][col].clone();
                            let best = self.a[lr][self.cols].clone() / self.a[lr][col].clone();
                            cur < best || (cur == best && self.basis[r] < self.basis[lr])
                        }
                    };
                    if better {
                        leaving = Some(r);
                    }
                }
            }
            let Some(row) = leaving else { return false };
            self.pivot(row, col);
        }
    }
}

/// Solve `max c.x  s.t.  A x = b, x >= 0` by the two-phase method.
pub fn solve_max<T: LpScalar>(c: &[T], a: &[Vec<T>], b: &[T]) -> LpSolution<T> {
    let rows = a.len();
    let structural = c.len();
    let cols = structural + rows; // one artificial per row
    let mut tab = Tableau {
        rows,
        cols,
        a: Vec::with_capacity(rows),
        basis: (structural..cols).collect(),
    };
    for (i, row) in a.iter().enumerate() {
        debug_assert_eq!(row.len(), structural);
        let flip = b[i] < T::zero();
        let mut line: Vec<T> = Vec::with_capacity(cols + 1);
        for v in row {
            line.push(if flip { -v.clone() } else { v.clone() });
        }
        for j in 0..rows {
            line.push(if j == i { T::one() } else { T::zero() });
        }
        line.push(if flip { -b[i].clone() } else { b[i].clone() });
        tab.a.push(line);
    }

    // phase 1: drive the artificials to zero
    let mut phase1 = vec![T::zero(); cols];
    for slot in phase1.iter_mut().skip(structural) {
        *slot = -T::one();
    }
    tab.optimize(&phase1, cols);
    let mut infeas = T::zero();
    for r in 0..tab.rows {
        if tab.basis[r] >= structural {
            infeas = infeas + tab.a[r][tab.cols].clone();
        }
    }
    if !infeas.negligible() {
        return LpSolution {
            status: LpStatus::Infeasible,
            x: vec![T::zero(); structural],
            objective: T::zero(),
        };
    }
    // pivot remaining artificials (basic at zero) out where possible;
    // rows with no structural pivot are redundant constraints
    let mut drop_rows = Vec::new();
    for r in 0..tab.rows {
        if tab.basis[r] >= structural {
            let col = (0..structural).find(|&j| !tab.a[r][j].negligible());
            match col {
                Some(j) => tab.pivot(r, j),
                None => drop_rows.push(r),
            }
        }
    }
    for &r in drop_rows.iter().rev() {
        tab.a.remove(r);
        tab.basis.remove(r);
        tab.rows -= 1;
    }

    // phase 2 over the structural columns only
    let mut phase2 = vec![T::zero(); cols];
    phase2[..structural].clone_from_slice(c);
    let bounded = tab.optimize(&phase2, structural);
    if !bounded {
        return LpSolution {
            status: LpStatus::Unbounded,
            x: vec![T::zero(); structural],
            objective: T::zero(),
        };
    }

    let mut x = vec![T::zero(); structural];
    for r in 0..tab.rows {
        if tab.basis[r] < structural {
            x[tab.basis[r]] = tab.a[r][tab.cols].clone();
        }
    }
    let mut objective = T::zero();
    for j in 0..structural {
        objective = objective + c[j].clone() * x[j].clone();
    }
    LpSolution {
        status: LpStatus::Optimal,
        x,
        objective,
    }
}

fn to_rational(v: f64) -> BigRational {
    BigRational::from_float(v).unwrap_or_else(|| BigRational::from_integer(BigInt::from(0)))
}

fn to_f64(v: &BigRational) -> f64 {
    let num = v.numer();
    let den = v.denom();
    // good enough for converting optima back; magnitudes here are small
    let fnum: f64 = num.to_string().parse().unwrap_or(f64::NAN);
    let fden: f64 = den.to_string().parse().unwrap_or(f64::NAN);
    fnum / fden
}

/// f64 solve with an exact-rational fallback: if the f64 optimum violates
/// the constraints beyond tolerance (degenerate pivoting noise), the whole
/// instance is re-solved in `BigRational`.
pub fn solve_max_checked(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> LpSolution<f64> {
    let sol = solve_max(c, a, b);
    if sol.status == LpStatus::Optimal {
        let residual = a
            .iter()
            .zip(b)
            .map(|(row, &bi)| {
                let lhs: f64 = row.iter().zip(&sol.x).map(|(&ai, &xi)| ai * xi).sum();
                (lhs - bi).abs()
            })
            .fold(0.0, f64::max);
        if residual <= 1e-7 {
            return sol;
        }
    }
    let rc: Vec<BigRational> = c.iter().map(|&v| to_rational(v)).collect();
    let ra: Vec<Vec<BigRational>> = a
        .iter()
        .map(|row| row.iter().map(|&v| to_rational(v)).collect())
        .collect();
    let rb: Vec<BigRational> = b.iter().map(|&v| to_rational(v)).collect();
    let rsol = solve_max(&rc, &ra, &rb);
    LpSolution {
        status: rsol.status,
        x: rsol.x.iter().map(to_f64).collect(),
        objective: to_f64(&rsol.objective),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tiny_lp_by_hand() {
        // max x + 2y s.t. x + y = 1: optimum at y = 1
        let sol = solve_max(&[1.0, 2.0], &[vec![1.0, 1.0]], &[1.0]);
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.objective - 2.0).abs() < 1e-12);
        assert!((sol.x[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn standard_form_with_slack() {
        // max 3x + 2y s.t. x + y + s1 = 4, x + 3y + s2 = 6
        let sol = solve_max(
            &[3.0, 2.0, 0.0, 0.0],
            &[vec![1.0, 1.0, 1.0, 0.0], vec![1.0, 3.0, 0.0, 1.0]],
            &[4.0, 6.0],
        );
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.objective - 12.0).abs() < 1e-9); // x = 4, y = 0
    }

    #[test]
    fn infeasible_detected() {
        // x = 1 and x = 2 cannot both hold
        let sol = solve_max(&[1.0], &[vec![1.0], vec![1.0]], &[1.0, 2.0]);
        assert_eq!(sol.status, LpStatus::Infeasible);
    }

    #[test]
    fn unbounded_detected() {
        // max x - y s.t. x - y = ... no: use x free direction
        // max x s.t. x - y = 0 (x = y can grow without bound)
        let sol = solve_max(&[1.0, 0.0], &[vec![1.0, -1.0]], &[0.0]);
        assert_eq!(sol.status, LpStatus::Unbounded);
    }

    #[test]
    fn redundant_constraints_are_dropped() {
        // the same constraint twice
        let sol = solve_max(
            &[1.0, 1.0],
            &[vec![1.0, 2.0], vec![2.0, 4.0]],
            &[2.0, 4.0],
        );
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.objective - 2.0).abs() < 1e-9); // x = 2, y = 0
    }

    #[test]
    fn rational_solver_agrees() {
        let c = [3.0, 2.0, 0.0, 0.0];
        let a = [vec![1.0, 1.0, 1.0, 0.0], vec![1.0, 3.0, 0.0, 1.0]];
        let b = [4.0, 6.0];
        let rc: Vec<BigRational> = c.iter().map(|&v| to_rational(v)).collect();
        let ra: Vec<Vec<BigRational>> = a
            .iter()
            .map(|r| r.iter().map(|&v| to_rational(v)).collect())
            .collect();
        let rb: Vec<BigRational> = b.iter().map(|&v| to_rational(v)).collect();
        let sol = solve_max(&rc, &ra, &rb);
        assert_eq!(sol.status, LpStatus::Optimal);
        assert_eq!(to_f64(&sol.objective), 12.0);
    }

    #[test]
    fn negative_rhs_is_normalized() {
        // -x = -1 is x = 1
        let sol = solve_max(&[-1.0], &[vec![-1.0]], &[-1.0]);
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.x[0] - 1.0).abs() < 1e-12);
    }
}
