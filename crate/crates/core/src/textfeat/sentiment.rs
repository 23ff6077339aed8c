use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Most-positive score, most-negative score and the order in which they
/// occur, as reported by an external sentiment evaluator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SentimentTriple {
    pub most_positive: f64,
    pub most_negative: f64,
    /// +1 when the negative extreme precedes the positive one, -1 for the
    /// reverse, 0 for a flat trace.
    pub direction: i8,
}

impl SentimentTriple {
    pub fn new(most_positive: f64, most_negative: f64, direction: i8) -> Result<Self> {
        let t = SentimentTriple {
            most_positive,
            most_negative,
            direction,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("most_positive", self.most_positive), ("most_negative", self.most_negative)] {
            if !(-1.0..=1.0).contains(&v) {
                return Err(Error::invalid(format!("{name} = {v} outside [-1, 1]")));
            }
        }
        if self.most_positive < self.most_negative {
            return Err(Error::invalid(format!(
                "most_positive {} < most_negative {}",
                self.most_positive, self.most_negative
            )));
        }
        if !matches!(self.direction, -1..=1) {
            return Err(Error::invalid(format!("direction {} not in {{-1, 0, 1}}", self.direction)));
        }
        Ok(())
    }
}

/// Direction-signed spread between the sentiment extremes of one trace.
pub fn volatility(s: &SentimentTriple) -> f64 {
    f64::from(s.direction) * (s.most_positive - s.most_negative)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn signed_spread() {
        let up = SentimentTriple::new(0.5, -0.3, 1).unwrap();
        let down = SentimentTriple::new(0.5, -0.3, -1).unwrap();
        assert!((volatility(&up) - 0.8).abs() < 1e-12);
        assert!((volatility(&down) + 0.8).abs() < 1e-12);
        assert_eq!(volatility(&SentimentTriple::new(0.0, 0.0, 0).unwrap()), 0.0);
    }

    #[test]
    fn rejects_bad_triples() {
        assert!(SentimentTriple::new(-0.2, 0.4, 1).is_err());
        assert!(SentimentTriple::new(1.5, 0.0, 1).is_err());
        assert!(SentimentTriple::new(0.5, 0.0, 2).is_err());
    }

    #[test]
    fn neutral_direction_allowed_with_any_pair() {
        let t = SentimentTriple::new(0.9, -0.9, 0).unwrap();
        assert_eq!(volatility(&t), 0.0);
    }
}
