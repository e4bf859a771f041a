//! Classical knapsack solvers and report comparison.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::encoding::{evaluate_qkp, QkpInstance, SpinConvention};
use crate::error::{Error, Result};

/// Largest instance [`brute_force`] enumerates.
pub const BRUTE_FORCE_CAP: usize = 25;

/// Random instance: weights and item values uniform in `1..=max`, each pair
/// bonus present with probability `pair_density` and uniform in `1..=value_max`.
pub fn gen_instance(
    n: usize,
    capacity: u64,
    value_max: u64,
    weight_max: u64,
    pair_density: f64,
    seed: u64,
) -> Result<QkpInstance> {
    if n == 0 || capacity == 0 || value_max == 0 || weight_max == 0 {
        return Err(Error::InvalidArgument("n, capacity and ranges must be at least 1".into()));
    }
    if !(0.0..=1.0).contains(&pair_density) {
        return Err(Error::InvalidArgument(format!("pair density {pair_density} outside [0, 1]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let weights = (0..n).map(|_| rng.random_range(1..=weight_max)).collect();
    let values = (0..n)
        .map(|i| {
            let mut row: Vec<u64> = (0..i)
                .map(|_| {
                    if rng.random_bool(pair_density) {
                        rng.random_range(1..=value_max)
                    } else {
                        0
                    }
                })
                .collect();
            row.push(rng.random_range(1..=value_max));
            row
        })
        .collect();
    QkpInstance::new(capacity, weights, values)
}

/// Stable short identifier: first 16 hex digits of the SHA-256 of the
/// instance JSON.
pub fn instance_id(inst: &QkpInstance) -> String {
    let digest = Sha256::digest(serde_json::to_vec(inst).expect("instance serializes"));
    digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

/// Outcome of one solver on one instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub solver: String,
    pub instance_id: String,
    pub bits: Vec<u8>,
    pub value: u64,
    pub weight: u64,
    pub feasible: bool,
    pub wall_time_s: f64,
    /// QUBO cost of `bits` including the offset, when the solver worked on the encoding.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub energy: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offset: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub convention: Option<SpinConvention>,
}

impl SolveReport {
    /// Report for `bits` with value, weight and feasibility recomputed.
    pub fn new(solver: &str, inst: &QkpInstance, bits: Vec<u8>, wall_time_s: f64) -> Result<Self> {
        let ev = evaluate_qkp(inst, &bits)?;
        Ok(Self {
            solver: solver.to_string(),
            instance_id: instance_id(inst),
            bits,
            value: ev.value,
            weight: ev.weight,
            feasible: ev.feasible,
            wall_time_s,
            energy: None,
            offset: None,
            lambda: None,
            convention: None,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        crate::error::from_json(text)
    }
}

/// Symmetric profit matrix.
fn full_values(inst: &QkpInstance) -> Vec<Vec<u64>> {
    (0..inst.n).map(|i| (0..inst.n).map(|j| inst.value(i, j)).collect()).collect()
}

/// Exhaustive search over all subsets in Gray-code order.
///
/// Among optimal feasible subsets the lexicographically smallest bit vector
/// (item 0 first) is returned.
pub fn brute_force(inst: &QkpInstance) -> Result<SolveReport> {
    let n = inst.n;
    if n > BRUTE_FORCE_CAP {
        return Err(Error::Size {
            what: "brute force",
            n,
            cap: BRUTE_FORCE_CAP,
        });
    }
    let start = Instant::now();
    let v = full_values(inst);
    // item k lives at bit n-1-k so integer order is lexicographic order
    let bit = |k: usize| 1u64 << (n - 1 - k);
    let (mut mask, mut value, mut weight) = (0u64, 0u64, 0u64);
    let mut best = (0u64, 0u64);
    for g in 1..1u64 << n {
        let k = n - 1 - g.trailing_zeros() as usize;
        let gain: u64 = v[k][k] + (0..n).filter(|&j| j != k && mask & bit(j) != 0).map(|j| v[k][j]).sum::<u64>();
        if mask & bit(k) == 0 {
            mask |= bit(k);
            value += gain;
            weight += inst.weights[k];
        } else {
            mask &= !bit(k);
            value -= gain;
            weight -= inst.weights[k];
        }
        if weight <= inst.capacity && (value > best.0 || (value == best.0 && mask < best.1)) {
            best = (value, mask);
        }
    }
    let bits = (0..n).map(|k| u8::from(best.1 & bit(k) != 0)).collect();
    SolveReport::new("bf", inst, bits, start.elapsed().as_secs_f64())
}

/// Table of the dynamic-programming heuristic.
#[derive(Clone, Debug, PartialEq)]
pub struct DpState {
    /// Best value found for each residual capacity `0..=W`.
    pub v: Vec<u64>,
    /// Items achieving `v[r]`, ascending.
    pub s: Vec<Vec<usize>>,
}

impl DpState {
    /// Every stored set must fit its capacity and reproduce its value.
    pub fn check(&self, inst: &QkpInstance) -> Result<()> {
        if self.v[0] != 0 || !self.s[0].is_empty() {
            return Err(Error::InvalidArgument("DP table has a nonempty zero-capacity entry".into()));
        }
        for (r, set) in self.s.iter().enumerate() {
            let w: u64 = set.iter().map(|&i| inst.weights[i]).sum();
            let val: u64 = set
                .iter()
                .enumerate()
                .map(|(a, &i)| set[..=a].iter().map(|&j| inst.value(i, j)).sum::<u64>())
                .sum();
            if w > r as u64 || val != self.v[r] {
                return Err(Error::InvalidArgument(format!(
                    "DP entry {r}: set weight {w}, set value {val}, stored value {}",
                    self.v[r]
                )));
            }
        }
        Ok(())
    }

    pub fn is_monotone(&self) -> bool {
        self.v.windows(2).all(|w| w[0] <= w[1])
    }
}

/// Runs the item-by-item DP and returns the full table.
///
/// For item `k` and residual capacity `r = W..1` (descending, so each item is
/// used once), the candidate is `V(r-w_k) + v_kk + Σ_{i∈S(r-w_k)} v_ik`; it
/// replaces `V(r)` and `S(r) = S(r-w_k) ∪ {k}` only when strictly better.
/// After each item pass `V` is made non-decreasing in `r` by copying the
/// entry for `r - 1` wherever it is larger.
pub fn dp_table(inst: &QkpInstance) -> DpState {
    let cap = inst.capacity as usize;
    let mut v = vec![0u64; cap + 1];
    let mut s: Vec<Vec<usize>> = vec![Vec::new(); cap + 1];
    for k in 0..inst.n {
        let wk = inst.weights[k] as usize;
        for r in (1..=cap).rev() {
            if wk > r {
                continue;
            }
            let src = r - wk;
            let cand = v[src] + inst.values[k][k] + s[src].iter().map(|&i| inst.value(i, k)).sum::<u64>();
            if v[r] < cand {
                v[r] = cand;
                let mut set = s[src].clone();
                set.push(k);
                s[r] = set;
            }
        }
        // carry forward so V(r) means "best with weight at most r"
        for r in 1..=cap {
            if v[r - 1] > v[r] {
                v[r] = v[r - 1];
                s[r] = s[r - 1].clone();
            }
        }
        debug_assert!(DpState { v: v.clone(), s: s.clone() }.check(inst).is_ok());
    }
    DpState { v, s }
}

/// Dynamic-programming heuristic; exact when all pair bonuses vanish.
pub fn dp_solve(inst: &QkpInstance) -> Result<SolveReport> {
    let start = Instant::now();
    let table = dp_table(inst);
    let mut bits = vec![0u8; inst.n];
    for &i in &table.s[inst.capacity as usize] {
        bits[i] = 1;
    }
    SolveReport::new("dp", inst, bits, start.elapsed().as_secs_f64())
}

/// One line of a [`ComparisonTable`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub solver: String,
    pub value: u64,
    pub weight: u64,
    pub feasible: bool,
    pub wall_time_s: f64,
    /// `value / reference value`; `None` without a reference or when the
    /// reference value is zero.
    pub ratio: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonTable {
    pub instance_id: String,
    pub reference: Option<String>,
    pub rows: Vec<ComparisonRow>,
}

/// Tabulates reports for one instance, optionally against a reference.
pub fn compare(reports: &[SolveReport], reference: Option<&SolveReport>) -> Result<ComparisonTable> {
    let first = reports
        .first()
        .ok_or_else(|| Error::InvalidArgument("nothing to compare".into()))?;
    let id = &first.instance_id;
    if let Some(r) = reports.iter().chain(reference).find(|r| &r.instance_id != id) {
        return Err(Error::InvalidArgument(format!(
            "report `{}` is for instance {}, expected {id}",
            r.solver, r.instance_id
        )));
    }
    let rows = reports
        .iter()
        .map(|r| ComparisonRow {
            solver: r.solver.clone(),
            value: r.value,
            weight: r.weight,
            feasible: r.feasible,
            wall_time_s: r.wall_time_s,
            ratio: reference.filter(|x| x.value > 0).map(|x| r.value as f64 / x.value as f64),
        })
        .collect();
    Ok(ComparisonTable {
        instance_id: id.clone(),
        reference: reference.map(|r| r.solver.clone()),
        rows,
    })
}

impl ComparisonTable {
    /// Aligned plain-text rendering; infeasible rows are marked `INFEASIBLE`.
    pub fn to_text(&self) -> String {
        let mut out = format!("instance {}", self.instance_id);
        if let Some(r) = &self.reference {
            out.push_str(&format!(" (reference: {r})"));
        }
        out.push('\n');
        out.push_str(&format!(
            "{:<12} {:>10} {:>10} {:>11} {:>12} {:>8}\n",
            "solver", "value", "weight", "feasible", "time_s", "ratio"
        ));
        for row in &self.rows {
            let ratio = row.ratio.map_or("-".to_string(), |x| format!("{x:.4}"));
            let feas = if row.feasible { "yes" } else { "INFEASIBLE" };
            out.push_str(&format!(
                "{:<12} {:>10} {:>10} {:>11} {:>12.6} {:>8}\n",
                row.solver, row.value, row.weight, feas, row.wall_time_s, ratio
            ));
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("instance_id,solver,value,weight,feasible,wall_time_s,ratio\n");
        for row in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                self.instance_id,
                row.solver,
                row.value,
                row.weight,
                row.feasible,
                row.wall_time_s,
                row.ratio.map_or(String::new(), |x| x.to_string())
            ));
        }
        out
    }
}
