//! Weighted MaxSMT endpoint selection.
//!
//! Decision variable `x_m` selects endpoint `m`. Hard literals force
//! `x_m -> l_{m,j}`; soft literals pay `w_j` only when the endpoint is
//! selected; every selection costs `lambda`. Because nothing couples two
//! endpoints except the cardinality budget `L <= sum x <= U`, the objective
//! separates into per-endpoint utilities
//!
//! ```text
//! u_m = sum_j w_j * soft[m][j] - lambda
//! ```
//!
//! and a greedy pass over the hard-feasible set is exact. [`solve_oracle`]
//! enumerates all `2^M` assignments to check that claim.

use std::cmp::Ordering;
use std::fmt::Write as _;

use thiserror::Error;

use crate::dirkey::{ConstraintSet, Mode};
use crate::scalar::Weight;
use crate::zoo::{Endpoint, Zoo};

/// Largest pool the exhaustive oracle accepts.
pub const ORACLE_MAX_ENDPOINTS: usize = 20;

#[derive(Debug, Error, PartialEq)]
pub enum SolverError {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("oracle refuses M = {0} (limit {ORACLE_MAX_ENDPOINTS})")]
    TooLarge(usize),
    #[error("instance dump line {line}: {message}")]
    Dump { line: usize, message: String },
}

/// Dense row-major bit matrix, one row per endpoint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LitMatrix {
    rows: usize,
    cols: usize,
    bits: Vec<bool>,
}

impl LitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        LitMatrix {
            rows,
            cols,
            bits: vec![false; rows * cols],
        }
    }

    pub fn from_rows(rows: &[Vec<bool>], cols: usize) -> Result<Self, SolverError> {
        let mut m = LitMatrix::zeros(rows.len(), cols);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != cols {
                return Err(SolverError::InvalidInstance(format!(
                    "row {} has {} literals, expected {cols}",
                    i + 1,
                    row.len()
                )));
            }
            m.bits[i * cols..(i + 1) * cols].copy_from_slice(row);
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        self.bits[row * self.cols + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: bool) {
        self.bits[row * self.cols + col] = value;
    }

    pub fn row(&self, row: usize) -> &[bool] {
        &self.bits[row * self.cols..(row + 1) * self.cols]
    }
}

/// A fully materialized selection problem.
#[derive(Debug, Clone, PartialEq)]
pub struct MaxSmtInstance<W> {
    hard: LitMatrix,
    soft: LitMatrix,
    soft_weights: Vec<W>,
    budget_low: usize,
    budget_high: usize,
    penalty: W,
    mode: Mode,
}

impl<W: Weight> MaxSmtInstance<W> {
    pub fn new(
        hard: LitMatrix,
        soft: LitMatrix,
        soft_weights: Vec<W>,
        budget_low: usize,
        budget_high: usize,
        penalty: W,
        mode: Mode,
    ) -> Result<Self, SolverError> {
        let m = hard.rows;
        if soft.rows != m {
            return Err(SolverError::InvalidInstance(format!(
                "hard matrix has {m} rows, soft matrix {}",
                soft.rows
            )));
        }
        if soft_weights.len() != soft.cols {
            return Err(SolverError::InvalidInstance(format!(
                "{} soft weights for {} soft clauses",
                soft_weights.len(),
                soft.cols
            )));
        }
        if soft_weights.iter().any(|w| !(*w >= W::zero())) {
            return Err(SolverError::InvalidInstance("negative soft weight".to_string()));
        }
        if !(penalty >= W::zero()) {
            return Err(SolverError::InvalidInstance("negative penalty".to_string()));
        }
        if budget_low > budget_high || budget_high > m {
            return Err(SolverError::InvalidInstance(format!(
                "budget {budget_low}..={budget_high} not within 0..={m}"
            )));
        }
        Ok(MaxSmtInstance {
            hard,
            soft,
            soft_weights,
            budget_low,
            budget_high,
            penalty,
            mode,
        })
    }

    pub fn endpoints(&self) -> usize {
        self.hard.rows
    }

    pub fn hard_lits(&self) -> &LitMatrix {
        &self.hard
    }

    pub fn soft_lits(&self) -> &LitMatrix {
        &self.soft
    }

    pub fn soft_weights(&self) -> &[W] {
        &self.soft_weights
    }

    pub fn budget(&self) -> (usize, usize) {
        (self.budget_low, self.budget_high)
    }

    pub fn penalty(&self) -> W {
        self.penalty
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// `u_m = sum_j w_j * soft[m][j] - lambda`.
    pub fn utility(&self, m: usize) -> W {
        let gain = self
            .soft
            .row(m)
            .iter()
            .zip(&self.soft_weights)
            .filter(|(lit, _)| **lit)
            .fold(W::zero(), |acc, (_, w)| acc + *w);
        gain - self.penalty
    }

    pub fn utilities(&self) -> Vec<W> {
        (0..self.endpoints()).map(|m| self.utility(m)).collect()
    }

    /// Whether endpoint `m` satisfies every hard literal.
    pub fn hard_ok(&self, m: usize) -> bool {
        self.hard.row(m).iter().all(|b| *b)
    }

    /// Objective of an assignment, summed in index order.
    pub fn objective(&self, chosen: &[bool]) -> W {
        chosen
            .iter()
            .enumerate()
            .filter(|(_, x)| **x)
            .fold(W::zero(), |acc, (m, _)| acc + self.utility(m))
    }

    /// Hard implications plus the budget (SHORTLIST) or the exact
    /// equivalence `x_m <-> AND_j l_{m,j}` (COMPLETENESS).
    pub fn is_feasible(&self, chosen: &[bool]) -> bool {
        if chosen.len() != self.endpoints() {
            return false;
        }
        match self.mode {
            Mode::Completeness => chosen.iter().enumerate().all(|(m, x)| *x == self.hard_ok(m)),
            Mode::Shortlist => {
                let count = chosen.iter().filter(|x| **x).count();
                chosen.iter().enumerate().all(|(m, x)| !*x || self.hard_ok(m))
                    && (self.budget_low..=self.budget_high).contains(&count)
            }
        }
    }

    fn infeasible(&self) -> Selection<W> {
        Selection {
            chosen: vec![false; self.endpoints()],
            objective: W::zero(),
            feasible: false,
            utilities: self.utilities(),
        }
    }
}

/// Solved assignment.
#[derive(Debug, Clone, PartialEq)]
pub struct Selection<W> {
    pub chosen: Vec<bool>,
    pub objective: W,
    pub feasible: bool,
    /// Per-endpoint utilities `u_m`.
    pub utilities: Vec<W>,
}

impl<W> Selection<W> {
    pub fn count(&self) -> usize {
        self.chosen.iter().filter(|x| **x).count()
    }

    /// 1-based ids of the chosen endpoints.
    pub fn chosen_ids(&self) -> Vec<usize> {
        self.chosen
            .iter()
            .enumerate()
            .filter(|(_, x)| **x)
            .map(|(m, _)| m + 1)
            .collect()
    }
}

/// Evaluates every clause of `cs` against every endpoint.
///
/// Binary predicates compare against `current`; with no current endpoint
/// they evaluate to false.
pub fn build_instance<W: Weight>(
    cs: &ConstraintSet<W>,
    zoo: &Zoo,
    current: Option<&Endpoint>,
) -> Result<MaxSmtInstance<W>, SolverError> {
    let m = zoo.len();
    let mut hard = LitMatrix::zeros(m, cs.hard.len());
    let mut soft = LitMatrix::zeros(m, cs.soft.len());
    for (i, ep) in zoo.endpoints().iter().enumerate() {
        for (j, p) in cs.hard.iter().enumerate() {
            hard.set(i, j, p.eval(ep, current, zoo));
        }
        for (j, s) in cs.soft.iter().enumerate() {
            soft.set(i, j, s.predicate.eval(ep, current, zoo));
        }
    }
    MaxSmtInstance::new(
        hard,
        soft,
        cs.soft.iter().map(|s| s.weight).collect(),
        cs.budget_low,
        cs.budget_high.min(m),
        cs.penalty,
        cs.mode,
    )
}

/// Descending utility, then ascending index.
fn by_utility<W: Weight>(u: &[W]) -> impl Fn(&usize, &usize) -> Ordering + '_ {
    move |a, b| {
        u[*b]
            .partial_cmp(&u[*a])
            .unwrap_or(Ordering::Equal)
            .then(a.cmp(b))
    }
}

/// Exact solution by separability.
pub fn solve<W: Weight>(inst: &MaxSmtInstance<W>) -> Selection<W> {
    let m = inst.endpoints();
    let utilities = inst.utilities();
    let feasible_set: Vec<usize> = (0..m).filter(|&i| inst.hard_ok(i)).collect();

    let picked: Vec<usize> = match inst.mode {
        Mode::Completeness => feasible_set,
        Mode::Shortlist => {
            if feasible_set.len() < inst.budget_low {
                return inst.infeasible();
            }
            let (mut picked, mut rest): (Vec<usize>, Vec<usize>) = feasible_set
                .into_iter()
                .partition(|&i| utilities[i] > W::zero());
            if picked.len() < inst.budget_low {
                rest.sort_by(by_utility(&utilities));
                let need = inst.budget_low - picked.len();
                picked.extend(rest.into_iter().take(need));
            }
            if picked.len() > inst.budget_high {
                picked.sort_by(by_utility(&utilities));
                picked.truncate(inst.budget_high);
            }
            picked
        }
    };

    let mut chosen = vec![false; m];
    for i in picked {
        chosen[i] = true;
    }
    Selection {
        objective: inst.objective(&chosen),
        chosen,
        feasible: true,
        utilities,
    }
}

/// Exhaustive search over all `2^M` assignments. Among optimal feasible
/// assignments the one whose sorted index list is lexicographically
/// smallest wins.
pub fn solve_oracle<W: Weight>(inst: &MaxSmtInstance<W>) -> Result<Selection<W>, SolverError> {
    let m = inst.endpoints();
    if m > ORACLE_MAX_ENDPOINTS {
        return Err(SolverError::TooLarge(m));
    }
    let mut best: Option<(W, Vec<usize>)> = None;
    let mut chosen = vec![false; m];
    for mask in 0u32..(1u32 << m) {
        for (i, x) in chosen.iter_mut().enumerate() {
            *x = mask & (1 << i) != 0;
        }
        if !inst.is_feasible(&chosen) {
            continue;
        }
        let obj = inst.objective(&chosen);
        let indices: Vec<usize> = (0..m).filter(|&i| chosen[i]).collect();
        let better = match &best {
            None => true,
            Some((b, idx)) => obj > *b || (obj == *b && indices < *idx),
        };
        if better {
            best = Some((obj, indices));
        }
    }
    Ok(match best {
        None => inst.infeasible(),
        Some((objective, indices)) => {
            let mut chosen = vec![false; m];
            for i in indices {
                chosen[i] = true;
            }
            Selection {
                chosen,
                objective,
                feasible: true,
                utilities: inst.utilities(),
            }
        }
    })
}

const DUMP_MAGIC: &str = "# clauseroute maxsmt instance v1";

fn bits_to_string(bits: &[bool]) -> String {
    bits.iter().map(|b| if *b { '1' } else { '0' }).collect()
}

impl MaxSmtInstance<f64> {
    /// Plain-text dump for golden files and cross-implementation diffs.
    ///
    /// ```text
    /// # clauseroute maxsmt instance v1
    /// mode SHORTLIST
    /// endpoints 3
    /// hard 1
    /// soft 2
    /// budget 1 3
    /// penalty 0.25
    /// weights 1 0.5
    /// row 1|10
    /// ```
    ///
    /// One `row` line per endpoint: hard literals, `|`, soft literals.
    pub fn to_dump(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{DUMP_MAGIC}");
        let _ = writeln!(out, "mode {}", self.mode);
        let _ = writeln!(out, "endpoints {}", self.endpoints());
        let _ = writeln!(out, "hard {}", self.hard.cols);
        let _ = writeln!(out, "soft {}", self.soft.cols);
        let _ = writeln!(out, "budget {} {}", self.budget_low, self.budget_high);
        let _ = writeln!(out, "penalty {}", self.penalty);
        let weights: Vec<String> = self.soft_weights.iter().map(|w| w.to_string()).collect();
        let _ = writeln!(out, "weights {}", weights.join(" "));
        for m in 0..self.endpoints() {
            let _ = writeln!(
                out,
                "row {}|{}",
                bits_to_string(self.hard.row(m)),
                bits_to_string(self.soft.row(m))
            );
        }
        out
    }

    pub fn from_dump(text: &str) -> Result<Self, SolverError> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim_end()));
        let err = |line: usize, message: &str| SolverError::Dump {
            line,
            message: message.to_string(),
        };
        let mut next = |expect: &str| -> Result<(usize, String), SolverError> {
            let (n, l) = lines.next().ok_or_else(|| err(0, "unexpected end of dump"))?;
            match l.strip_prefix(expect) {
                Some(rest) => Ok((n, rest.trim().to_string())),
                None => Err(err(n, &format!("expected `{expect}`"))),
            }
        };
        next(DUMP_MAGIC)?;
        let (n, mode) = next("mode")?;
        let mode = match mode.as_str() {
            "SHORTLIST" => Mode::Shortlist,
            "COMPLETENESS" => Mode::Completeness,
            _ => return Err(err(n, "unknown mode")),
        };
        let mut count = |key: &str| -> Result<usize, SolverError> {
            let (n, v) = next(key)?;
            v.parse().map_err(|_| err(n, "expected an integer"))
        };
        let m = count("endpoints")?;
        let hard_cols = count("hard")?;
        let soft_cols = count("soft")?;
        let (n, budget) = next("budget")?;
        let budget: Vec<usize> = budget
            .split_whitespace()
            .map(str::parse)
            .collect::<Result<_, _>>()
            .map_err(|_| err(n, "bad budget"))?;
        let [low, high] = budget[..] else {
            return Err(err(n, "budget needs two integers"));
        };
        let (n, penalty) = next("penalty")?;
        let penalty: f64 = penalty.parse().map_err(|_| err(n, "bad penalty"))?;
        let (n, weights) = next("weights")?;
        let weights: Vec<f64> = weights
            .split_whitespace()
            .map(str::parse)
            .collect::<Result<_, _>>()
            .map_err(|_| err(n, "bad weight"))?;

        let parse_bits = |n: usize, s: &str, width: usize| -> Result<Vec<bool>, SolverError> {
            if s.len() != width {
                return Err(err(n, &format!("expected {width} literals")));
            }
            s.chars()
                .map(|c| match c {
                    '0' => Ok(false),
                    '1' => Ok(true),
                    _ => Err(err(n, "literal must be 0 or 1")),
                })
                .collect()
        };
        let mut hard_rows = Vec::with_capacity(m);
        let mut soft_rows = Vec::with_capacity(m);
        for _ in 0..m {
            let (n, row) = next("row")?;
            let (h, s) = row.split_once('|').ok_or_else(|| err(n, "missing `|`"))?;
            hard_rows.push(parse_bits(n, h, hard_cols)?);
            soft_rows.push(parse_bits(n, s, soft_cols)?);
        }
        MaxSmtInstance::new(
            LitMatrix::from_rows(&hard_rows, hard_cols)?,
            LitMatrix::from_rows(&soft_rows, soft_cols)?,
            weights,
            low,
            high,
            penalty,
            mode,
        )
    }
}
