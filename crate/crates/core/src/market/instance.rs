use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A pacing game: `n` bidders, `m` goods, valuations `v[i][j] >= 0` and budgets.
///
/// An unlimited budget is stored as `f64::INFINITY` and written as the string
/// `"inf"` in JSON:
///
/// ```
/// use pacing_core::PacingInstance;
///
/// let json = r#"{"n":2,"m":1,"values":[[1.0],[0.5]],"budgets":[2.0,"inf"]}"#;
/// let inst: PacingInstance = serde_json::from_str(json).unwrap();
/// assert!(inst.is_unlimited(1));
/// assert_eq!(serde_json::to_string(&inst).unwrap(), json);
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "InstanceJson", into = "InstanceJson")]
pub struct PacingInstance {
    values: Vec<Vec<f64>>,
    budgets: Vec<f64>,
}

impl PacingInstance {
    /// Builds an instance, checking shapes, signs and finiteness.
    pub fn new(values: Vec<Vec<f64>>, budgets: Vec<f64>) -> Result<Self> {
        let n = values.len();
        if n == 0 {
            return Err(Error::InvalidInstance("no bidders".into()));
        }
        if budgets.len() != n {
            return Err(Error::Dimension(format!(
                "{} budgets for {n} bidders",
                budgets.len()
            )));
        }
        let m = values[0].len();
        if m == 0 {
            return Err(Error::InvalidInstance("no goods".into()));
        }
        for (i, row) in values.iter().enumerate() {
            if row.len() != m {
                return Err(Error::Dimension(format!(
                    "row {i} has {} values, expected {m}",
                    row.len()
                )));
            }
            for (j, &v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::NonFinite(format!("v[{i}][{j}]")));
                }
                if v < 0.0 {
                    return Err(Error::InvalidInstance(format!(
                        "v[{i}][{j}] = {v} is negative"
                    )));
                }
            }
        }
        for (i, &b) in budgets.iter().enumerate() {
            if b.is_nan() || b <= 0.0 {
                return Err(Error::InvalidInstance(format!(
                    "budget {i} = {b} must be positive"
                )));
            }
        }
        Ok(Self { values, budgets })
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn m(&self) -> usize {
        self.values[0].len()
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[i][j]
    }

    pub fn budgets(&self) -> &[f64] {
        &self.budgets
    }

    pub fn budget(&self, i: usize) -> f64 {
        self.budgets[i]
    }

    pub fn is_unlimited(&self, i: usize) -> bool {
        self.budgets[i].is_infinite()
    }

    /// `v̄_j = max_i v_ij`.
    pub fn max_value(&self, j: usize) -> f64 {
        self.values.iter().map(|row| row[j]).fold(0.0, f64::max)
    }

    /// Bids `α_i v_ij` for every bidder and good.
    pub fn paced_bids(&self, alphas: &[f64]) -> Vec<Vec<f64>> {
        self.values
            .iter()
            .zip(alphas)
            .map(|(row, &a)| row.iter().map(|&v| a * v).collect())
            .collect()
    }

    /// Copy with bidder `i`'s budget replaced.
    pub fn with_budget(&self, i: usize, budget: f64) -> Result<Self> {
        let mut budgets = self.budgets.clone();
        budgets[i] = budget;
        Self::new(self.values.clone(), budgets)
    }

    /// Copy with bidder `i`'s valuation row replaced.
    pub fn with_values_row(&self, i: usize, row: Vec<f64>) -> Result<Self> {
        let mut values = self.values.clone();
        values[i] = row;
        Self::new(values, self.budgets.clone())
    }

    /// Copy with every finite budget multiplied by `factor`.
    pub fn scale_budgets(&self, factor: f64) -> Result<Self> {
        Self::new(
            self.values.clone(),
            self.budgets.iter().map(|b| b * factor).collect(),
        )
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("instance serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

#[derive(Serialize, Deserialize)]
struct InstanceJson {
    n: usize,
    m: usize,
    values: Vec<Vec<f64>>,
    #[serde(with = "budget_list")]
    budgets: Vec<f64>,
}

impl TryFrom<InstanceJson> for PacingInstance {
    type Error = Error;

    fn try_from(raw: InstanceJson) -> Result<Self> {
        let inst = PacingInstance::new(raw.values, raw.budgets)?;
        if inst.n() != raw.n || inst.m() != raw.m {
            return Err(Error::Dimension(format!(
                "header says {}x{}, matrix is {}x{}",
                raw.n,
                raw.m,
                inst.n(),
                inst.m()
            )));
        }
        Ok(inst)
    }
}

impl From<PacingInstance> for InstanceJson {
    fn from(inst: PacingInstance) -> Self {
        InstanceJson {
            n: inst.n(),
            m: inst.m(),
            values: inst.values,
            budgets: inst.budgets,
        }
    }
}

/// Serde adapter for budget vectors where `f64::INFINITY` is spelled `"inf"`.
pub mod budget_list {
    use super::*;

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Entry {
        Finite(f64),
        Tag(String),
    }

    pub fn serialize<S: Serializer>(budgets: &[f64], s: S) -> std::result::Result<S::Ok, S::Error> {
        let entries: Vec<Entry> = budgets
            .iter()
            .map(|&b| {
                if b.is_infinite() {
                    Entry::Tag("inf".into())
                } else {
                    Entry::Finite(b)
                }
            })
            .collect();
        entries.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<f64>, D::Error> {
        let entries = Vec::<Entry>::deserialize(d)?;
        entries
            .into_iter()
            .map(|e| match e {
                Entry::Finite(b) => Ok(b),
                Entry::Tag(t) if t == "inf" => Ok(f64::INFINITY),
                Entry::Tag(t) => Err(serde::de::Error::custom(format!(
                    "unknown budget tag `{t}`"
                ))),
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_ragged_rows() {
        let err = PacingInstance::new(vec![vec![1.0, 2.0], vec![1.0]], vec![1.0, 1.0]).unwrap_err();
        assert!(matches!(err, Error::Dimension(_)));
    }

    #[test]
    fn rejects_nonpositive_budget() {
        assert!(PacingInstance::new(vec![vec![1.0]], vec![0.0]).is_err());
        assert!(PacingInstance::new(vec![vec![-1.0]], vec![1.0]).is_err());
    }

    #[test]
    fn header_must_match_matrix() {
        let json = r#"{"n":2,"m":1,"values":[[1.0]],"budgets":[1.0]}"#;
        assert!(PacingInstance::from_json(json).is_err());
    }

    #[test]
    fn max_value_is_column_max() {
        let inst = PacingInstance::new(vec![vec![3.0], vec![7.0]], vec![1.0, 1.0]).unwrap();
        assert_eq!(inst.max_value(0), 7.0);
    }
}
