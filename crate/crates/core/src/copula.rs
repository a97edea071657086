//! Bivariate copulas coupling two mixed strategies into joint cell weights.

use crate::error::{Error, Result};

/// Tolerance on simplex sums.
pub const SIMPLEX_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum Copula2 {
    /// Independence, `C(u, v) = uv`.
    Product,
    /// Frechet-Hoeffding upper bound `min(u, v)`.
    Min,
    Tabulated(CopulaTable),
}

/// Copula values on the regular grid `(i / (n - 1), j / (n - 1))`, row-major
/// in `i`, interpolated bilinearly in between.
#[derive(Debug, Clone, PartialEq)]
pub struct CopulaTable {
    n: usize,
    values: Vec<f64>,
}

impl CopulaTable {
    /// Validates the boundary conditions and 2-increasingness.
    pub fn new(n: usize, values: Vec<f64>) -> Result<Self> {
        if n < 2 || values.len() != n * n {
            return Err(Error::InvalidDistribution(format!(
                "copula table needs {n}x{n} values, got {}",
                values.len()
            )));
        }
        let t = Self { n, values };
        let tol = 1e-9;
        for i in 0..n {
            let u = i as f64 / (n - 1) as f64;
            let checks = [
                (t.at(i, 0), 0.0, "C(u,0)"),
                (t.at(0, i), 0.0, "C(0,v)"),
                (t.at(i, n - 1), u, "C(u,1)"),
                (t.at(n - 1, i), u, "C(1,v)"),
            ];
            for (got, want, what) in checks {
                if (got - want).abs() > tol {
                    return Err(Error::InvalidDistribution(format!(
                        "copula table violates {what} at grid index {i}: {got} vs {want}"
                    )));
                }
            }
        }
        for i in 0..n - 1 {
            for j in 0..n - 1 {
                let mass = t.at(i + 1, j + 1) - t.at(i, j + 1) - t.at(i + 1, j) + t.at(i, j);
                if mass < -1e-12 {
                    return Err(Error::NegativeRectangleMass { i, j, mass });
                }
            }
        }
        Ok(t)
    }

    /// Tabulates `f` on an `n`-point grid.
    pub fn from_fn<F: Fn(f64, f64) -> f64>(n: usize, f: F) -> Result<Self> {
        let h = 1.0 / (n.max(2) - 1) as f64;
        let values = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| f(i as f64 * h, j as f64 * h))
            .collect();
        Self::new(n, values)
    }

    pub fn grid(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    fn eval(&self, u: f64, v: f64) -> f64 {
        let last = (self.n - 1) as f64;
        let (x, y) = (u.clamp(0.0, 1.0) * last, v.clamp(0.0, 1.0) * last);
        let i = (x.floor() as usize).min(self.n - 2);
        let j = (y.floor() as usize).min(self.n - 2);
        let (a, b) = (x - i as f64, y - j as f64);
        self.at(i, j) * (1.0 - a) * (1.0 - b)
            + self.at(i + 1, j) * a * (1.0 - b)
            + self.at(i, j + 1) * (1.0 - a) * b
            + self.at(i + 1, j + 1) * a * b
    }
}

impl Copula2 {
    pub fn eval(&self, u: f64, v: f64) -> f64 {
        match self {
            Copula2::Product => u * v,
            Copula2::Min => u.min(v),
            Copula2::Tabulated(t) => t.eval(u, v),
        }
    }

    pub fn is_product(&self) -> bool {
        matches!(self, Copula2::Product)
    }
}

/// Joint probabilities `w[i][j]` of playing row `i` and column `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointCellWeights {
    n: usize,
    m: usize,
    w: Vec<f64>,
}

impl JointCellWeights {
    pub fn rows(&self) -> usize {
        self.n
    }

    pub fn cols(&self) -> usize {
        self.m
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.w[i * self.m + j]
    }

    /// Row-major weights.
    pub fn as_slice(&self) -> &[f64] {
        &self.w
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.w.chunks(self.m).map(|r| r.iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<f64> {
        (0..self.m)
            .map(|j| (0..self.n).map(|i| self.get(i, j)).sum())
            .collect()
    }
}

/// Checks that `v` is a probability vector within [`SIMPLEX_TOL`].
pub fn check_simplex(v: &[f64], what: &str) -> Result<()> {
    if v.is_empty() {
        return Err(Error::NotASimplex(format!("{what} is empty")));
    }
    if let Some(x) = v.iter().find(|x| !x.is_finite() || **x < 0.0) {
        return Err(Error::NotASimplex(format!("{what} has entry {x}")));
    }
    let s: f64 = v.iter().sum();
    if (s - 1.0).abs() > SIMPLEX_TOL {
        return Err(Error::NotASimplex(format!("{what} sums to {s}")));
    }
    Ok(())
}

fn prefix(v: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    let mut out = Vec::with_capacity(v.len() + 1);
    out.push(0.0);
    for x in v {
        acc += x;
        out.push(acc);
    }
    // pin the last prefix so boundary conditions hold exactly
    if let Some(last) = out.last_mut() {
        *last = 1.0;
    }
    out
}

/// Rectangle masses of `c` over the prefix-sum grid of `p` and `q`.
pub fn joint_weights(c: &Copula2, p: &[f64], q: &[f64]) -> Result<JointCellWeights> {
    check_simplex(p, "row strategy")?;
    check_simplex(q, "column strategy")?;
    let (n, m) = (p.len(), q.len());
    let w = match c {
        Copula2::Product => p.iter().flat_map(|pi| q.iter().map(move |qj| pi * qj)).collect(),
        _ => {
            let (pp, qq) = (prefix(p), prefix(q));
            let mut w = Vec::with_capacity(n * m);
            for i in 1..=n {
                for j in 1..=m {
                    let mass = c.eval(pp[i], qq[j]) - c.eval(pp[i - 1], qq[j])
                        - c.eval(pp[i], qq[j - 1])
                        + c.eval(pp[i - 1], qq[j - 1]);
                    if mass < -1e-12 {
                        return Err(Error::NegativeRectangleMass {
                            i: i - 1,
                            j: j - 1,
                            mass,
                        });
                    }
                    w.push(mass.max(0.0));
                }
            }
            w
        }
    };
    Ok(JointCellWeights { n, m, w })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_matrix(w: &JointCellWeights, want: &[&[f64]]) {
        for (i, row) in want.iter().enumerate() {
            for (j, x) in row.iter().enumerate() {
                assert!((w.get(i, j) - x).abs() < 1e-15, "({i},{j}): {}", w.get(i, j));
            }
        }
    }

    #[test]
    fn product_is_outer_product() {
        let w = joint_weights(&Copula2::Product, &[0.3, 0.7], &[0.6, 0.4]).unwrap();
        assert_matrix(&w, &[&[0.18, 0.12], &[0.42, 0.28]]);
    }

    #[test]
    fn min_copula_concentrates_on_diagonal() {
        let w = joint_weights(&Copula2::Min, &[0.5, 0.5], &[0.5, 0.5]).unwrap();
        assert_matrix(&w, &[&[0.5, 0.0], &[0.0, 0.5]]);
    }

    #[test]
    fn degenerate_marginals_give_a_single_cell() {
        let table = Copula2::Tabulated(CopulaTable::from_fn(11, |u, v| u * v).unwrap());
        for c in [Copula2::Product, Copula2::Min, table] {
            let w = joint_weights(&c, &[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0]).unwrap();
            for i in 0..3 {
                for j in 0..3 {
                    let want = if (i, j) == (1, 2) { 1.0 } else { 0.0 };
                    assert!((w.get(i, j) - want).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn simplex_is_checked() {
        assert!(matches!(
            joint_weights(&Copula2::Product, &[0.3, 0.6], &[1.0]),
            Err(Error::NotASimplex(_))
        ));
    }

    #[test]
    fn invalid_table_is_rejected() {
        // raising the centre value leaves a negative rectangle
        let mut vals: Vec<f64> = CopulaTable::from_fn(3, |u, v| u * v).unwrap().values().to_vec();
        vals[4] = 0.6;
        assert!(matches!(
            CopulaTable::new(3, vals),
            Err(Error::NegativeRectangleMass { .. })
        ));
        assert!(CopulaTable::new(3, vec![0.0; 9]).is_err());
    }

    #[test]
    fn lower_bound_table_is_valid() {
        let t = CopulaTable::from_fn(5, |u, v| (u + v - 1.0).max(0.0)).unwrap();
        let w = joint_weights(&Copula2::Tabulated(t), &[0.5, 0.5], &[0.5, 0.5]).unwrap();
        assert_matrix(&w, &[&[0.0, 0.5], &[0.5, 0.0]]);
    }
}
