//! Rate constants of the SEIRS model and their time unit.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

pub const DAYS_PER_YEAR: f64 = 365.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum TimeUnit {
    #[default]
    PerDay,
    PerYear,
}

impl TimeUnit {
    /// Length of one unit, in days.
    pub fn days(self) -> f64 {
        match self {
            TimeUnit::PerDay => 1.0,
            TimeUnit::PerYear => DAYS_PER_YEAR,
        }
    }

    /// Factor converting a rate expressed per `self` into a rate per `target`.
    pub fn rate_factor(self, target: TimeUnit) -> f64 {
        if self == target {
            1.0
        } else {
            target.days() / self.days()
        }
    }

    /// Factor converting a duration expressed in `self` into `target`.
    pub fn duration_factor(self, target: TimeUnit) -> f64 {
        if self == target {
            1.0
        } else {
            self.days() / target.days()
        }
    }
}

impl fmt::Display for TimeUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TimeUnit::PerDay => "day",
            TimeUnit::PerYear => "year",
        })
    }
}

impl FromStr for TimeUnit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "day" | "days" | "per-day" => Ok(TimeUnit::PerDay),
            "year" | "years" | "per-year" => Ok(TimeUnit::PerYear),
            other => Err(Error::Domain(format!("unknown time unit {other:?} (expected day or year)"))),
        }
    }
}

/// Epidemiological and demographic rates. All rates are expressed per [`TimeUnit`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// Contact rate.
    pub beta: f64,
    /// Exit rate from latency (E -> I).
    pub sigma: f64,
    /// Recovery rate (I -> R).
    pub gamma: f64,
    /// Immunity waning rate (R -> S).
    pub omega: f64,
    /// Infection-induced mortality rate.
    pub nu: f64,
    /// Birth rate.
    pub b: f64,
    /// Natural mortality rate.
    pub mu: f64,
    pub time_unit: TimeUnit,
}

impl ModelParams {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        beta: f64,
        sigma: f64,
        gamma: f64,
        omega: f64,
        nu: f64,
        b: f64,
        mu: f64,
        time_unit: TimeUnit,
    ) -> Result<Self> {
        let p = ModelParams { beta, sigma, gamma, omega, nu, b, mu, time_unit };
        p.validate()?;
        Ok(p)
    }

    /// Checks that every rate is finite and nonnegative.
    pub fn validate(&self) -> Result<()> {
        for (name, v) in self.named_rates() {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::Domain(format!("rate {name} must be finite and >= 0, got {v}")));
            }
        }
        Ok(())
    }

    pub fn named_rates(&self) -> [(&'static str, f64); 7] {
        [
            ("beta", self.beta),
            ("sigma", self.sigma),
            ("gamma", self.gamma),
            ("omega", self.omega),
            ("nu", self.nu),
            ("b", self.b),
            ("mu", self.mu),
        ]
    }

    /// Same parameters with every rate re-expressed per `unit`.
    pub fn in_unit(&self, unit: TimeUnit) -> ModelParams {
        let k = self.time_unit.rate_factor(unit);
        ModelParams {
            beta: self.beta * k,
            sigma: self.sigma * k,
            gamma: self.gamma * k,
            omega: self.omega * k,
            nu: self.nu * k,
            b: self.b * k,
            mu: self.mu * k,
            time_unit: unit,
        }
    }

    pub fn per_day(&self) -> ModelParams {
        self.in_unit(TimeUnit::PerDay)
    }

    pub fn per_year(&self) -> ModelParams {
        self.in_unit(TimeUnit::PerYear)
    }

    /// Contact rate giving the requested basic reproduction number with all other rates fixed.
    pub fn beta_for_r0(r0: f64, sigma: f64, gamma: f64, nu: f64, b: f64) -> Result<f64> {
        if sigma <= 0.0 {
            return Err(Error::Domain("sigma must be > 0 to invert R0 for beta".into()));
        }
        Ok(r0 * (sigma + b) * (gamma + nu + b) / sigma)
    }

    /// SEIRS rates (per day) from Bjørnstad et al.: 7-day latency, 14-day infectious
    /// period, one-year immunity, 76-year life expectancy with b = mu, no disease
    /// mortality, and beta set so that R0 = 3 exactly (about 0.2144 per day).
    pub fn bjornstad_svi() -> ModelParams {
        let sigma = 1.0 / 7.0;
        let gamma = 1.0 / 14.0;
        let omega = 1.0 / DAYS_PER_YEAR;
        let b = 1.0 / (76.0 * DAYS_PER_YEAR);
        let beta = 3.0 * (sigma + b) * (gamma + b) / sigma;
        ModelParams { beta, sigma, gamma, omega, nu: 0.0, b, mu: b, time_unit: TimeUnit::PerDay }
    }
}
