use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Monotone map from accuracy to monetary value.
///
/// `Table` interpolates linearly between breakpoints and holds the end values
/// outside them.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ValueFunction {
    #[default]
    Identity,
    Table {
        breakpoints: Vec<(f64, f64)>,
    },
}

impl ValueFunction {
    pub fn table(breakpoints: Vec<(f64, f64)>) -> Result<Self> {
        let vf = ValueFunction::Table { breakpoints };
        vf.validate()?;
        Ok(vf)
    }

    pub fn validate(&self) -> Result<()> {
        let ValueFunction::Table { breakpoints } = self else {
            return Ok(());
        };
        if breakpoints.is_empty() {
            return Err(Error::InvalidParameter(
                "value table needs at least one breakpoint".into(),
            ));
        }
        for &(a, v) in breakpoints {
            if !a.is_finite() || !v.is_finite() {
                return Err(Error::InvalidParameter("value table breakpoints must be finite".into()));
            }
        }
        for w in breakpoints.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(Error::InvalidParameter(
                    "value table accuracies must be strictly increasing".into(),
                ));
            }
            if w[1].1 < w[0].1 {
                return Err(Error::InvalidParameter("value table must be nondecreasing".into()));
            }
        }
        if self.eval(0.0) < 0.0 {
            return Err(Error::InvalidParameter("value table requires v(0) >= 0".into()));
        }
        Ok(())
    }

    pub fn eval(&self, accuracy: f64) -> f64 {
        match self {
            ValueFunction::Identity => accuracy,
            ValueFunction::Table { breakpoints } => {
                let first = breakpoints[0];
                let last = breakpoints[breakpoints.len() - 1];
                if accuracy <= first.0 {
                    return first.1;
                }
                if accuracy >= last.0 {
                    return last.1;
                }
                let k = breakpoints.partition_point(|&(a, _)| a <= accuracy);
                let (a0, v0) = breakpoints[k - 1];
                let (a1, v1) = breakpoints[k];
                v0 + (v1 - v0) * (accuracy - a0) / (a1 - a0)
            }
        }
    }
}
