use crate::postcond::Label;

use super::PriorError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Run {
    pub id: String,
    pub bits: Vec<bool>,
}

impl Run {
    pub fn size(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }
}

/// Inclusion vectors of the runs admitted to a fit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunMatrix {
    endpoints: usize,
    runs: Vec<Run>,
    admitted: Vec<Label>,
}

impl RunMatrix {
    /// An empty matrix over `endpoints` endpoints admitting `admitted` labels.
    pub fn new(endpoints: usize, admitted: &[Label]) -> Self {
        RunMatrix {
            endpoints,
            runs: Vec::new(),
            admitted: admitted.to_vec(),
        }
    }

    /// Keeps only Case S runs; Zero, One and All carry no information about
    /// relative preference.
    pub fn case_s<I, S>(endpoints: usize, runs: I) -> Result<Self, PriorError>
    where
        I: IntoIterator<Item = (S, Vec<bool>)>,
        S: Into<String>,
    {
        let mut matrix = RunMatrix::new(endpoints, &[Label::CaseS]);
        for (id, bits) in runs {
            matrix.offer(id, bits)?;
        }
        Ok(matrix)
    }

    /// Adds the run if its label is admitted. Returns whether it was kept.
    pub fn offer(&mut self, id: impl Into<String>, bits: Vec<bool>) -> Result<bool, PriorError> {
        if bits.len() != self.endpoints {
            return Err(PriorError::InvalidArgument(format!(
                "run has {} bits, expected {}",
                bits.len(),
                self.endpoints
            )));
        }
        let count = bits.iter().filter(|b| **b).count();
        if !self.admitted.contains(&Label::of_count(count, self.endpoints)) {
            return Ok(false);
        }
        self.runs.push(Run {
            id: id.into(),
            bits,
        });
        Ok(true)
    }

    pub fn endpoints(&self) -> usize {
        self.endpoints
    }

    pub fn len(&self) -> usize {
        self.runs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.runs.is_empty()
    }

    pub fn runs(&self) -> &[Run] {
        &self.runs
    }

    pub fn admitted(&self) -> &[Label] {
        &self.admitted
    }

    /// Per-endpoint selection counts over the runs for which `keep(i)`.
    pub fn successes_where(&self, keep: impl Fn(usize) -> bool) -> (Vec<u64>, u64) {
        let mut k = vec![0u64; self.endpoints];
        let mut n = 0u64;
        let kept = self
            .runs
            .iter()
            .enumerate()
            .filter(|(i, _)| keep(*i))
            .map(|(_, r)| r);
        for run in kept {
            n += 1;
            for (m, b) in run.bits.iter().enumerate() {
                k[m] += u64::from(*b);
            }
        }
        (k, n)
    }

    /// Per-endpoint selection counts over all runs.
    pub fn successes(&self) -> (Vec<u64>, u64) {
        self.successes_where(|_| true)
    }

    /// Empirical per-endpoint selection rates.
    pub fn selection_rates(&self) -> Vec<f64> {
        let (k, n) = self.successes();
        k.iter()
            .map(|&k| if n == 0 { 0.0 } else { k as f64 / n as f64 })
            .collect()
    }

    /// Same runs with each inclusion vector replaced by `f(run)`.
    pub(crate) fn map_bits(&self, mut f: impl FnMut(usize, &Run) -> Vec<bool>) -> RunMatrix {
        RunMatrix {
            endpoints: self.endpoints,
            runs: self
                .runs
                .iter()
                .enumerate()
                .map(|(i, r)| Run {
                    id: r.id.clone(),
                    bits: f(i, r),
                })
                .collect(),
            admitted: self.admitted.clone(),
        }
    }
}
