use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An ordered sequence of finite observations, optionally dated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    values: Vec<f64>,
    dates: Option<Vec<String>>,
}

impl TimeSeries {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!(
                "observation {} is not finite ({})",
                i + 1,
                values[i]
            )));
        }
        Ok(Self {
            values,
            dates: None,
        })
    }

    pub fn with_dates(values: Vec<f64>, dates: Vec<String>) -> Result<Self> {
        if dates.len() != values.len() {
            return Err(Error::invalid("dates and values differ in length"));
        }
        if let Some(w) = dates.windows(2).find(|w| w[1] <= w[0]) {
            return Err(Error::invalid(format!("date `{}` does not follow `{}`", w[1], w[0])));
        }
        let mut ts = Self::new(values)?;
        ts.dates = Some(dates);
        Ok(ts)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dates(&self) -> Option<&[String]> {
        self.dates.as_deref()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

impl std::ops::Deref for TimeSeries {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.values
    }
}
