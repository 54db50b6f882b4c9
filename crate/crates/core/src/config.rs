use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Sign of `s = ±√t`, selecting one of the two flows supported near the helix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Branch {
    #[serde(rename = "+")]
    Positive,
    #[serde(rename = "-")]
    Negative,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Positive => 1.0,
            Branch::Negative => -1.0,
        }
    }

    pub fn opposite(self) -> Branch {
        match self {
            Branch::Positive => Branch::Negative,
            Branch::Negative => Branch::Positive,
        }
    }

    pub fn of(s: f64) -> Branch {
        if s.is_sign_negative() {
            Branch::Negative
        } else {
            Branch::Positive
        }
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Branch::Positive => "+",
            Branch::Negative => "-",
        })
    }
}

impl FromStr for Branch {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "+" | "+1" | "1" | "pos" | "plus" | "positive" => Ok(Branch::Positive),
            "-" | "-1" | "neg" | "minus" | "negative" => Ok(Branch::Negative),
            other => Err(Error::InvalidConfig(format!("unknown branch {other:?}"))),
        }
    }
}

/// Parameters shared by every stage of the construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HelixConfig {
    /// Slope of the helix `ρ = 1, z = kφ`; `k = 0` is the circle.
    pub k: f64,
    pub branch: Branch,
    /// Start of the cutoff window `[ε, 2ε]`.
    pub eps: f64,
    /// Local error bound for the profile integrator and root/quadrature targets.
    pub tol: f64,
}

impl Default for HelixConfig {
    fn default() -> Self {
        HelixConfig {
            k: 1.0,
            branch: Branch::Positive,
            eps: 1e-3,
            tol: 1e-8,
        }
    }
}

impl HelixConfig {
    pub fn new(k: f64, branch: Branch, eps: f64, tol: f64) -> Result<Self> {
        let config = HelixConfig {
            k,
            branch,
            eps,
            tol,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.k.is_finite() && self.k >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "k must be >= 0, got {}",
                self.k
            )));
        }
        if !(self.eps.is_finite() && self.eps > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "eps must be > 0, got {}",
                self.eps
            )));
        }
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "tol must be > 0, got {}",
                self.tol
            )));
        }
        Ok(())
    }

    pub fn with_branch(mut self, branch: Branch) -> Self {
        self.branch = branch;
        self
    }

    /// `1 + k²`, which appears in nearly every formula of the construction.
    pub fn k2p1(&self) -> f64 {
        1.0 + self.k * self.k
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_invalid_parameters() {
        assert!(HelixConfig::new(-0.1, Branch::Positive, 1e-3, 1e-8).is_err());
        assert!(HelixConfig::new(1.0, Branch::Positive, 0.0, 1e-8).is_err());
        assert!(HelixConfig::new(1.0, Branch::Positive, 1e-3, -1.0).is_err());
        assert!(HelixConfig::new(f64::NAN, Branch::Positive, 1e-3, 1e-8).is_err());
        assert!(HelixConfig::new(0.0, Branch::Negative, 1e-3, 1e-8).is_ok());
    }

    #[test]
    fn branch_parsing() {
        assert_eq!("+".parse::<Branch>().unwrap(), Branch::Positive);
        assert_eq!("-".parse::<Branch>().unwrap(), Branch::Negative);
        assert_eq!("-1".parse::<Branch>().unwrap(), Branch::Negative);
        assert!("sideways".parse::<Branch>().is_err());
        assert_eq!(Branch::Negative.sign(), -1.0);
        assert_eq!(Branch::of(-0.0), Branch::Negative);
    }
}
