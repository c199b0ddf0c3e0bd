use std::str::FromStr;

use induco_core::params::gain_for_v2;
use induco_core::ExperimentParams;

use crate::config::ConfigError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVar {
    TMag,
    V2,
    GammaMag,
    Gain,
}

impl SweepVar {
    pub fn name(&self) -> &'static str {
        match self {
            SweepVar::TMag => "t_mag",
            SweepVar::V2 => "v2",
            SweepVar::GammaMag => "gamma_mag",
            SweepVar::Gain => "gain",
        }
    }

    fn range(&self) -> (f64, f64) {
        match self {
            SweepVar::TMag | SweepVar::GammaMag => (0.0, 1.0),
            SweepVar::V2 | SweepVar::Gain => (0.0, f64::INFINITY),
        }
    }

    pub fn set(&self, params: &mut ExperimentParams, value: f64) {
        match self {
            SweepVar::TMag => params.t_mag = value,
            SweepVar::V2 => params.gain = gain_for_v2(value),
            SweepVar::GammaMag => params.gamma_mag = value,
            SweepVar::Gain => params.gain = value,
        }
    }
}

impl FromStr for SweepVar {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, ConfigError> {
        match s {
            "t_mag" | "t" => Ok(SweepVar::TMag),
            "v2" => Ok(SweepVar::V2),
            "gamma_mag" | "gamma" => Ok(SweepVar::GammaMag),
            "gain" => Ok(SweepVar::Gain),
            other => Err(ConfigError(format!(
                "cannot sweep `{other}` (expected t_mag, v2, gamma_mag or gain)"
            ))),
        }
    }
}

/// A variable and the values it takes, in output order.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub var: SweepVar,
    pub grid: Vec<f64>,
}

impl SweepSpec {
    /// Parses `var:start:stop:n[:log]` or `var:v1,v2,...`.
    pub fn parse(spec: &str) -> Result<Self, ConfigError> {
        let bad = |why: &str| ConfigError(format!("sweep `{spec}`: {why}"));
        let parts: Vec<&str> = spec.split(':').collect();
        let var: SweepVar = parts[0].parse()?;
        let number = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| bad(&format!("`{s}` is not a number")))
        };
        let grid = match parts.len() {
            2 => parts[1]
                .split(',')
                .map(number)
                .collect::<Result<Vec<_>, _>>()?,
            4 | 5 => {
                let (start, stop) = (number(parts[1])?, number(parts[2])?);
                let n: usize = parts[3]
                    .parse()
                    .map_err(|_| bad("point count must be a positive integer"))?;
                if n == 0 {
                    return Err(bad("point count must be a positive integer"));
                }
                match parts.get(4) {
                    None => linspace(start, stop, n),
                    Some(&"log") => {
                        if !(start > 0.0 && stop > 0.0) {
                            return Err(bad("log grid needs positive bounds"));
                        }
                        let mut grid: Vec<f64> = linspace(start.ln(), stop.ln(), n)
                            .into_iter()
                            .map(f64::exp)
                            .collect();
                        grid[0] = start;
                        grid[n - 1] = stop;
                        grid
                    }
                    Some(other) => return Err(bad(&format!("unknown spacing `{other}`"))),
                }
            }
            _ => return Err(bad("expected var:start:stop:n[:log] or var:v1,v2,...")),
        };
        let (lo, hi) = var.range();
        if let Some(v) = grid.iter().find(|v| !(lo..=hi).contains(*v)) {
            return Err(bad(&format!("value {v} outside [{lo}, {hi}]")));
        }
        Ok(Self { var, grid })
    }

    /// Parameter sets for every grid point.
    pub fn points(&self, base: &ExperimentParams) -> Vec<ExperimentParams> {
        self.grid
            .iter()
            .map(|&v| {
                let mut p = *base;
                self.var.set(&mut p, v);
                p
            })
            .collect()
    }
}

fn linspace(start: f64, stop: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![start];
    }
    (0..n)
        .map(|i| {
            if i == n - 1 {
                stop
            } else {
                start + (stop - start) * i as f64 / (n - 1) as f64
            }
        })
        .collect()
}
