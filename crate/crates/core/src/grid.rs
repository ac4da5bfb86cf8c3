//! Rectangular sampling grids over the state space.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// One axis: `steps` evenly spaced points from `min` to `max` inclusive.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl Axis {
    pub fn new(min: f64, max: f64, steps: usize) -> Self {
        Self { min, max, steps }
    }

    pub fn value(&self, k: usize) -> f64 {
        if self.steps <= 1 {
            self.min
        } else {
            self.min + (self.max - self.min) * k as f64 / (self.steps - 1) as f64
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub axes: Vec<Axis>,
}

impl Grid {
    pub fn new(axes: Vec<Axis>) -> Self {
        Self { axes }
    }

    /// The same axis repeated `n` times.
    pub fn square(n: usize, min: f64, max: f64, steps: usize) -> Self {
        Self::new(vec![Axis::new(min, max, steps); n])
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.steps).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Point `k` in row-major order, first axis slowest.
    pub fn point(&self, mut k: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.axes.len()];
        for (i, a) in self.axes.iter().enumerate().rev() {
            out[i] = a.value(k % a.steps);
            k /= a.steps;
        }
        out
    }

    pub fn points(&self) -> Vec<Vec<f64>> {
        (0..self.len()).map(|k| self.point(k)).collect()
    }
}

/// Reads `"xmin,xmax,steps;ymin,ymax,steps;..."`.
impl FromStr for Grid {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let bad = |m: &str| Error::Model(format!("grid \"{s}\": {m}"));
        let axes = s
            .split(';')
            .map(|part| {
                let fields: Vec<&str> = part.split(',').map(str::trim).collect();
                let [min, max, steps] = fields[..] else {
                    return Err(bad("each axis needs min,max,steps"));
                };
                let min: f64 = min.parse().map_err(|_| bad("invalid bound"))?;
                let max: f64 = max.parse().map_err(|_| bad("invalid bound"))?;
                let steps: usize = steps.parse().map_err(|_| bad("invalid step count"))?;
                if !(min.is_finite() && max.is_finite()) || max < min {
                    return Err(bad("bounds must be finite with min <= max"));
                }
                if steps == 0 {
                    return Err(bad("step count must be positive"));
                }
                Ok(Axis::new(min, max, steps))
            })
            .collect::<Result<Vec<_>, Error>>()?;
        Ok(Grid::new(axes))
    }
}
