//! Exact linear programming over the rationals (two-phase simplex, Bland's rule).

use num::rational::BigRational;
use num::{Signed, Zero};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LpOutcome {
    Optimal(Vec<BigRational>),
    Infeasible,
    Unbounded,
}

/// Minimise `c x` subject to equality rows, `>=` rows and `x >= 0`.
#[derive(Debug, Clone, Default)]
pub struct LinearProgram {
    vars: usize,
    eq: Vec<(Vec<BigRational>, BigRational)>,
    ge: Vec<(Vec<BigRational>, BigRational)>,
    objective: Vec<BigRational>,
}

impl LinearProgram {
    pub fn new(vars: usize) -> LinearProgram {
        LinearProgram { vars, eq: Vec::new(), ge: Vec::new(), objective: vec![BigRational::zero(); vars] }
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn add_eq(&mut self, row: Vec<BigRational>, rhs: BigRational) {
        assert_eq!(row.len(), self.vars);
        self.eq.push((row, rhs));
    }

    pub fn add_ge(&mut self, row: Vec<BigRational>, rhs: BigRational) {
        assert_eq!(row.len(), self.vars);
        self.ge.push((row, rhs));
    }

    pub fn set_objective(&mut self, c: Vec<BigRational>) {
        assert_eq!(c.len(), self.vars);
        self.objective = c;
    }

    pub fn minimize(&self) -> LpOutcome {
        let n = self.vars;
        let n_slack = self.ge.len();
        let m = self.eq.len() + n_slack;
        let n_art = m;
        let width = n + n_slack + n_art;
        let mut t: Vec<Vec<BigRational>> = Vec::with_capacity(m);
        let rows = self.eq.iter().map(|r| (r, None)).chain(self.ge.iter().enumerate().map(|(k, r)| (r, Some(k))));
        for (i, ((a, b), slack)) in rows.enumerate() {
            let mut row = vec![BigRational::zero(); width + 1];
            row[..n].clone_from_slice(a);
            if let Some(k) = slack {
                row[n + k] = -BigRational::from_integer(1.into());
            }
            row[width] = b.clone();
            if b.is_negative() {
                for x in row.iter_mut() {
                    *x = -x.clone();
                }
            }
            row[n + n_slack + i] = BigRational::from_integer(1.into());
            t.push(row);
        }
        let mut basis: Vec<usize> = (0..m).map(|i| n + n_slack + i).collect();

        let mut phase1 = vec![BigRational::zero(); width];
        for c in phase1.iter_mut().skip(n + n_slack) {
            *c = BigRational::from_integer(1.into());
        }
        if !run_simplex(&mut t, &mut basis, &phase1, width) {
            return LpOutcome::Unbounded;
        }
        let infeasibility: BigRational = basis
            .iter()
            .enumerate()
            .filter(|(_, &b)| b >= n + n_slack)
            .map(|(i, _)| t[i][width].clone())
            .sum();
        if infeasibility.is_positive() {
            return LpOutcome::Infeasible;
        }
        // drive artificial variables out of the basis, dropping redundant rows
        let mut i = 0;
        while i < t.len() {
            if basis[i] >= n + n_slack {
                match (0..n + n_slack).find(|&j| !t[i][j].is_zero()) {
                    Some(j) => pivot(&mut t, &mut basis, i, j),
                    None => {
                        t.remove(i);
                        basis.remove(i);
                        continue;
                    }
                }
            }
            i += 1;
        }
        for row in t.iter_mut() {
            row.drain(n + n_slack..width);
        }
        let width = n + n_slack;
        let mut cost = self.objective.clone();
        cost.resize(width, BigRational::zero());
        if !run_simplex(&mut t, &mut basis, &cost, width) {
            return LpOutcome::Unbounded;
        }
        let mut x = vec![BigRational::zero(); n];
        for (i, &b) in basis.iter().enumerate() {
            if b < n {
                x[b] = t[i][width].clone();
            }
        }
        LpOutcome::Optimal(x)
    }
}

fn pivot(t: &mut [Vec<BigRational>], basis: &mut [usize], r: usize, c: usize) {
    let p = t[r][c].clone();
    for x in t[r].iter_mut() {
        *x /= &p;
    }
    let prow = t[r].clone();
    for (i, row) in t.iter_mut().enumerate() {
        if i != r && !row[c].is_zero() {
            let f = row[c].clone();
            for (x, y) in row.iter_mut().zip(&prow) {
                if !y.is_zero() {
                    *x -= &f * y;
                }
            }
        }
    }
    basis[r] = c;
}

/// Returns false when the objective is unbounded below.
fn run_simplex(t: &mut [Vec<BigRational>], basis: &mut [usize], cost: &[BigRational], width: usize) -> bool {
    loop {
        let entering = (0..width).find(|&j| {
            if basis.contains(&j) {
                return false;
            }
            let z: BigRational = basis.iter().enumerate().map(|(i, &b)| &cost[b] * &t[i][j]).sum();
            (&cost[j] - z).is_negative()
        });
        let Some(j) = entering else { return true };
        let mut best: Option<(usize, BigRational)> = None;
        for (i, row) in t.iter().enumerate() {
            if row[j].is_positive() {
                let ratio = &row[width] / &row[j];
                let better = match &best {
                    None => true,
                    Some((bi, br)) => ratio < *br || (ratio == *br && basis[i] < basis[*bi]),
                };
                if better {
                    best = Some((i, ratio));
                }
            }
        }
        match best {
            Some((i, _)) => pivot(t, basis, i, j),
            None => return false,
        }
    }
}
