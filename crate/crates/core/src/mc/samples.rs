use serde::Serialize;

use crate::analytic::default_correlation;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleKind {
    /// Crossing sampled inside an interjump interval.
    Interior,
    /// Default caused by a jump, at the jump instant.
    Atom,
}

/// First-passage time of one firm in one run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FptSample {
    pub run: u64,
    pub time: f64,
    /// Importance weight for the density estimate.
    pub weight: f64,
    pub kind: SampleKind,
}

/// Outcome of one Monte Carlo run: at most one default per firm.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub run: u64,
    pub defaults: Vec<Option<FptSample>>,
}

/// Yearly reporting points `1, 2, ..., floor(horizon)`.
pub fn yearly_grid(horizon: f64) -> Vec<f64> {
    (1..=horizon.floor() as usize).map(|k| k as f64).collect()
}

/// First-passage samples of every firm, with indicator counts on a
/// reporting grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FptSampleSet {
    pub firm_names: Vec<String>,
    pub horizon: f64,
    pub run_count: u64,
    pub grid: Vec<f64>,
    /// Per firm, ordered by run index.
    pub samples: Vec<Vec<FptSample>>,
    /// `default_counts[i][k]`: runs where firm `i` defaulted by `grid[k]`.
    pub default_counts: Vec<Vec<u64>>,
    /// `joint_counts[i][j][k]` for `i < j`: runs where both defaulted by
    /// `grid[k]`. The diagonal repeats `default_counts`.
    pub joint_counts: Vec<Vec<Vec<u64>>>,
}

impl FptSampleSet {
    pub fn new(firm_names: Vec<String>, horizon: f64, grid: Vec<f64>) -> Self {
        let n = firm_names.len();
        let g = grid.len();
        FptSampleSet {
            firm_names,
            horizon,
            run_count: 0,
            grid,
            samples: vec![Vec::new(); n],
            default_counts: vec![vec![0; g]; n],
            joint_counts: vec![vec![vec![0; g]; n]; n],
        }
    }

    /// Adds runs in the order given.
    pub fn extend(&mut self, records: impl IntoIterator<Item = RunRecord>) {
        let n = self.firm_names.len();
        for rec in records {
            self.run_count += 1;
            for (i, d) in rec.defaults.iter().enumerate().take(n) {
                if let Some(s) = d {
                    self.samples[i].push(*s);
                }
            }
            for (k, &t) in self.grid.iter().enumerate() {
                for i in 0..n {
                    let di = matches!(rec.defaults[i], Some(s) if s.time <= t);
                    if !di {
                        continue;
                    }
                    self.default_counts[i][k] += 1;
                    for j in i..n {
                        if matches!(rec.defaults[j], Some(s) if s.time <= t) {
                            self.joint_counts[i][j][k] += 1;
                        }
                    }
                }
            }
        }
    }

    pub fn from_records(firm_names: Vec<String>, horizon: f64, grid: Vec<f64>, records: Vec<RunRecord>) -> Self {
        let mut s = Self::new(firm_names, horizon, grid);
        s.extend(records);
        s
    }

    /// Combines two disjoint sets of runs. Samples are re-sorted by run.
    pub fn merge(mut self, other: FptSampleSet) -> Result<Self> {
        if self.grid != other.grid || self.firm_names != other.firm_names {
            return Err(Error::InvalidModel(
                "cannot merge sample sets with different layouts".into(),
            ));
        }
        self.run_count += other.run_count;
        for (a, b) in self.samples.iter_mut().zip(other.samples) {
            a.extend(b);
            a.sort_by_key(|s| s.run);
        }
        for (a, b) in self.default_counts.iter_mut().zip(&other.default_counts) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
        for (a, b) in self.joint_counts.iter_mut().zip(&other.joint_counts) {
            for (ra, rb) in a.iter_mut().zip(b) {
                for (x, y) in ra.iter_mut().zip(rb) {
                    *x += y;
                }
            }
        }
        Ok(self)
    }

    pub fn n_firms(&self) -> usize {
        self.firm_names.len()
    }

    /// Fraction of runs in which `firm` defaulted by `t`.
    pub fn empirical_cumulative(&self, firm: usize, t: f64) -> f64 {
        let c = self.samples[firm].iter().filter(|s| s.time <= t).count();
        c as f64 / self.run_count as f64
    }

    /// Importance-weighted estimate `(1/N) sum w 1{s <= t}` and its
    /// standard error.
    pub fn weighted_cumulative(&self, firm: usize, t: f64) -> (f64, f64) {
        let n = self.run_count as f64;
        let (mut s1, mut s2) = (0.0, 0.0);
        for s in self.samples[firm].iter().filter(|s| s.time <= t) {
            s1 += s.weight;
            s2 += s.weight * s.weight;
        }
        let m = s1 / n;
        let var = ((s2 - n * m * m) / (n - 1.0)).max(0.0);
        (m, (var / n).sqrt())
    }

    /// Rate of joint default by `t`.
    pub fn joint_cumulative(&self, i: usize, j: usize, t: f64) -> f64 {
        if i == j {
            return self.empirical_cumulative(i, t);
        }
        let (a, b) = (&self.samples[i], &self.samples[j]);
        let (mut p, mut q, mut both) = (0, 0, 0u64);
        while p < a.len() && q < b.len() {
            match a[p].run.cmp(&b[q].run) {
                std::cmp::Ordering::Less => p += 1,
                std::cmp::Ordering::Greater => q += 1,
                std::cmp::Ordering::Equal => {
                    if a[p].time <= t && b[q].time <= t {
                        both += 1;
                    }
                    p += 1;
                    q += 1;
                }
            }
        }
        both as f64 / self.run_count as f64
    }

    /// Number of runs with a recorded default of `firm` by the end.
    pub fn accepted(&self, firm: usize) -> usize {
        self.samples[firm].len()
    }
}

/// Default correlation of firms `i` and `j` by `t` from indicator
/// frequencies pooled over all runs.
pub fn simulated_default_correlation(samples: &FptSampleSet, i: usize, j: usize, t: f64) -> Result<f64> {
    if samples.run_count == 0 {
        return Err(Error::UndefinedCorrelation("no runs".into()));
    }
    let pi = samples.empirical_cumulative(i, t);
    let pj = samples.empirical_cumulative(j, t);
    let pij = samples.joint_cumulative(i, j, t);
    default_correlation(pi, pj, pij)
}
