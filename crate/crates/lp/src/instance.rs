use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseRow {
    pub label: String,
    pub entries: Vec<(usize, f64)>,
    pub rhs: f64,
}

impl SparseRow {
    pub fn new(label: impl Into<String>, entries: Vec<(usize, f64)>, rhs: f64) -> Self {
        Self { label: label.into(), entries, rhs }
    }

    pub fn dot(&self, x: &[f64]) -> f64 {
        self.entries.iter().map(|&(j, a)| a * x[j]).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LpSize {
    pub variables: usize,
    pub equalities: usize,
    pub inequalities: usize,
    pub nonzeros: usize,
}

/// `maximize c'x` subject to `A_eq x = b_eq`, `A_in x <= b_in`, `x >= 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpInstance {
    pub name: String,
    pub objective: Vec<f64>,
    pub column_labels: Vec<String>,
    pub equalities: Vec<SparseRow>,
    pub inequalities: Vec<SparseRow>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum InstanceError {
    #[error("{0} column labels for {1} variables")]
    Labels(usize, usize),
    #[error("row {label:?} references column {column} of {n}")]
    Column { label: String, column: usize, n: usize },
    #[error("row {0:?} has a non-finite coefficient or right-hand side")]
    NonFinite(String),
}

impl LpInstance {
    pub fn new(name: impl Into<String>, objective: Vec<f64>, column_labels: Vec<String>) -> Self {
        Self { name: name.into(), objective, column_labels, equalities: Vec::new(), inequalities: Vec::new() }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add_equality(&mut self, row: SparseRow) {
        self.equalities.push(row);
    }

    pub fn add_inequality(&mut self, row: SparseRow) {
        self.inequalities.push(row);
    }

    pub fn size(&self) -> LpSize {
        let nonzeros = self.rows().map(|r| r.entries.len()).sum();
        LpSize {
            variables: self.num_vars(),
            equalities: self.equalities.len(),
            inequalities: self.inequalities.len(),
            nonzeros,
        }
    }

    pub fn rows(&self) -> impl Iterator<Item = &SparseRow> {
        self.equalities.iter().chain(&self.inequalities)
    }

    pub fn validate(&self) -> Result<(), InstanceError> {
        let n = self.num_vars();
        if self.column_labels.len() != n {
            return Err(InstanceError::Labels(self.column_labels.len(), n));
        }
        for row in self.rows() {
            if !row.rhs.is_finite() {
                return Err(InstanceError::NonFinite(row.label.clone()));
            }
            for &(j, a) in &row.entries {
                if j >= n {
                    return Err(InstanceError::Column { label: row.label.clone(), column: j, n });
                }
                if !a.is_finite() {
                    return Err(InstanceError::NonFinite(row.label.clone()));
                }
            }
        }
        Ok(())
    }

    /// Equality rows of the form `sum_j x_j = 1` over every column.
    pub fn normalization_rows(&self) -> usize {
        let n = self.num_vars();
        self.equalities
            .iter()
            .filter(|r| {
                r.rhs == 1.0 && r.entries.len() == n && {
                    let mut seen = vec![false; n];
                    r.entries.iter().all(|&(j, a)| a == 1.0 && !std::mem::replace(&mut seen[j], true))
                }
            })
            .count()
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, x)| c * x).sum()
    }

    /// Largest violation over all rows and sign constraints.
    pub fn max_residual(&self, x: &[f64]) -> f64 {
        let eq = self.equalities.iter().map(|r| (r.dot(x) - r.rhs).abs());
        let ineq = self.inequalities.iter().map(|r| (r.dot(x) - r.rhs).max(0.0));
        let sign = x.iter().map(|v| (-v).max(0.0));
        eq.chain(ineq).chain(sign).fold(0.0, f64::max)
    }
}
