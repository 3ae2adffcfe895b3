use crate::algebra::{devectorize, ComplexMatrix, C64, ONE};
use crate::error::{Error, Result};

use super::expectation;

/// Time grid with optional vectorized states and named observable series.
#[derive(Debug, Clone, Default)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Option<Vec<Vec<C64>>>,
    observables: Vec<(String, Vec<f64>)>,
}

impl Trajectory {
    pub fn new(times: Vec<f64>) -> Self {
        Self {
            times,
            states: None,
            observables: Vec::new(),
        }
    }

    pub fn with_states(times: Vec<f64>, states: Vec<Vec<C64>>) -> Result<Self> {
        if states.len() != times.len() {
            return Err(Error::Shape(format!(
                "{} states for {} times",
                states.len(),
                times.len()
            )));
        }
        for (k, s) in states.iter().enumerate() {
            let rho = devectorize(s)?;
            let tr = rho.trace();
            if (tr - ONE).norm() > 1e-9 {
                return Err(Error::Numerical(format!(
                    "state at t = {} has trace {tr}",
                    times[k]
                )));
            }
        }
        Ok(Self {
            times,
            states: Some(states),
            observables: Vec::new(),
        })
    }

    /// Stores states without the unit-trace check, for truncated propagators.
    pub fn with_states_unchecked(times: Vec<f64>, states: Vec<Vec<C64>>) -> Result<Self> {
        if states.len() != times.len() {
            return Err(Error::Shape(format!(
                "{} states for {} times",
                states.len(),
                times.len()
            )));
        }
        Ok(Self {
            times,
            states: Some(states),
            observables: Vec::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn state_matrix(&self, k: usize) -> Option<ComplexMatrix> {
        self.states
            .as_ref()
            .and_then(|s| s.get(k))
            .and_then(|v| devectorize(v).ok())
    }

    pub fn push_observable(&mut self, name: impl Into<String>, values: Vec<f64>) -> Result<()> {
        let name = name.into();
        if values.len() != self.times.len() {
            return Err(Error::Shape(format!(
                "observable {name} has {} values for {} times",
                values.len(),
                self.times.len()
            )));
        }
        if let Some(slot) = self.observables.iter_mut().find(|(n, _)| *n == name) {
            slot.1 = values;
        } else {
            self.observables.push((name, values));
        }
        Ok(())
    }

    /// Records `Re tr[O rho(t)]` from the stored states.
    pub fn record_expectation(&mut self, name: impl Into<String>, op: &ComplexMatrix) -> Result<()> {
        let states = self
            .states
            .as_ref()
            .ok_or_else(|| Error::Validation("trajectory has no stored states".into()))?;
        let values = states.iter().map(|s| expectation(op, s).re).collect();
        self.push_observable(name, values)
    }

    pub fn observable(&self, name: &str) -> Option<&[f64]> {
        self.observables
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.as_slice())
    }

    pub fn observables(&self) -> &[(String, Vec<f64>)] {
        &self.observables
    }
}
