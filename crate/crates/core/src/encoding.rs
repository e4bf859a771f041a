//! Knapsack → QUBO → Ising.
//!
//! The capacity constraint `Σ wᵢxᵢ ≤ W` enters the QUBO through the unbalanced
//! penalty [`penalty_g`] applied to the slack `h(x) = W - Σ wᵢxᵢ`, scaled by a
//! factor λ. No slack variables are introduced, so an `n`-item instance stays
//! an `n`-variable QUBO.
//!
//! Ising coefficients are stored exactly as they appear in the problem part of
//! the annealing Hamiltonian, `Σ hᵢZᵢ + Σ_{i<j} JᵢⱼZᵢZⱼ + offset`, with no
//! leading minus sign.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Linear coefficient of the fitted penalty.
pub const PENALTY_LINEAR: f64 = -0.9603;
/// Quadratic coefficient of the fitted penalty.
pub const PENALTY_QUADRATIC: f64 = 0.0371;
/// Default penalty scale λ.
pub const DEFAULT_LAMBDA: f64 = 5.0;

/// `-0.9603·h + 0.0371·h²`.
///
/// ```
/// # use qkp_tn::encoding::penalty_g;
/// assert_eq!(penalty_g(0.0), 0.0);
/// assert!((penalty_g(-10.0) - 13.313).abs() < 1e-12);
/// ```
pub fn penalty_g(h_val: f64) -> f64 {
    PENALTY_LINEAR * h_val + PENALTY_QUADRATIC * h_val * h_val
}

/// Quadratic knapsack instance.
///
/// `values[i]` holds row `i` of the lower-triangular profit matrix, i.e.
/// `i + 1` entries `v_{i0} … v_{ii}`; the diagonal is the item value and the
/// off-diagonal entries are pair bonuses.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QkpInstance {
    pub n: usize,
    pub capacity: u64,
    pub weights: Vec<u64>,
    pub values: Vec<Vec<u64>>,
}

impl QkpInstance {
    pub fn new(capacity: u64, weights: Vec<u64>, values: Vec<Vec<u64>>) -> Result<Self> {
        let inst = Self {
            n: weights.len(),
            capacity,
            weights,
            values,
        };
        inst.validate()?;
        Ok(inst)
    }

    /// Checks shape and positivity; run on every instance read from disk.
    pub fn validate(&self) -> Result<()> {
        if self.weights.len() != self.n {
            return Err(Error::Parse(format!(
                "field `weights`: expected {} entries, found {}",
                self.n,
                self.weights.len()
            )));
        }
        if self.values.len() != self.n {
            return Err(Error::Parse(format!(
                "field `values`: expected {} rows, found {}",
                self.n,
                self.values.len()
            )));
        }
        for (i, row) in self.values.iter().enumerate() {
            if row.len() != i + 1 {
                return Err(Error::Parse(format!(
                    "field `values`: row {i} must have {} entries, found {}",
                    i + 1,
                    row.len()
                )));
            }
        }
        if let Some(i) = self.weights.iter().position(|&w| w == 0) {
            return Err(Error::Parse(format!("field `weights`: item {i} has zero weight")));
        }
        if self.capacity == 0 {
            return Err(Error::Parse("field `capacity`: must be positive".into()));
        }
        Ok(())
    }

    /// Profit `v_ij`, symmetric in its arguments.
    pub fn value(&self, i: usize, j: usize) -> u64 {
        let (hi, lo) = if i >= j { (i, j) } else { (j, i) };
        self.values[hi][lo]
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let inst: QkpInstance = crate::error::from_json(text)?;
        inst.validate()?;
        Ok(inst)
    }
}

/// Minimize `Σ_{i≥j} qᵢⱼ xᵢ xⱼ + offset` over binary `x`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuboProblem {
    /// Lower-triangular; the upper triangle is identically zero.
    pub q: DMatrix<f64>,
    pub offset: f64,
}

impl QuboProblem {
    pub fn new(q: DMatrix<f64>, offset: f64) -> Result<Self> {
        if !q.is_square() {
            return Err(Error::Shape("QUBO matrix must be square".into()));
        }
        for i in 0..q.nrows() {
            for j in i + 1..q.ncols() {
                if q[(i, j)] != 0.0 {
                    return Err(Error::Shape(format!("QUBO entry ({i},{j}) above the diagonal")));
                }
            }
        }
        Ok(Self { q, offset })
    }

    pub fn n(&self) -> usize {
        self.q.nrows()
    }

    /// Cost of a bit vector, offset included.
    pub fn energy(&self, bits: &[u8]) -> f64 {
        assert_eq!(bits.len(), self.n(), "bit vector length");
        let mut e = self.offset;
        for i in 0..self.n() {
            if bits[i] == 0 {
                continue;
            }
            for (j, &b) in bits[..=i].iter().enumerate() {
                if b != 0 {
                    e += self.q[(i, j)];
                }
            }
        }
        e
    }

    /// Symmetric coupling used for single-flip energy deltas.
    pub fn coupling(&self, i: usize, j: usize) -> f64 {
        if i >= j {
            self.q[(i, j)]
        } else {
            self.q[(j, i)]
        }
    }
}

/// How binary variables map to spins.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpinConvention {
    /// `x = (1 - s)/2`: bit 1 is spin -1, which is also qubit state `|1⟩`.
    #[default]
    MinusHalf,
    /// `x = (1 + s)/2`: bit 1 is spin +1, i.e. qubit `|0⟩`; bits come out
    /// flipped relative to qubit states.
    PlusHalf,
}

impl SpinConvention {
    /// Sign σ in `x = (1 + σ s)/2`.
    fn sigma(self) -> f64 {
        match self {
            SpinConvention::MinusHalf => -1.0,
            SpinConvention::PlusHalf => 1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SpinConvention::MinusHalf => "minus-half",
            SpinConvention::PlusHalf => "plus-half",
        }
    }
}

impl std::str::FromStr for SpinConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "minus-half" => Ok(Self::MinusHalf),
            "plus-half" => Ok(Self::PlusHalf),
            other => Err(Error::Parse(format!(
                "unknown spin convention `{other}` (expected minus-half or plus-half)"
            ))),
        }
    }
}

/// Ising problem Hamiltonian `Σ hᵢZᵢ + Σ_{i<j} JᵢⱼZᵢZⱼ + offset`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IsingModel {
    pub n: usize,
    pub h: Vec<f64>,
    /// Keys satisfy `i < j`.
    #[serde(with = "coupling_list")]
    pub j: BTreeMap<(usize, usize), f64>,
    pub offset: f64,
}

mod coupling_list {
    use std::collections::BTreeMap;

    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(j: &BTreeMap<(usize, usize), f64>, s: S) -> Result<S::Ok, S::Error> {
        let list: Vec<(usize, usize, f64)> = j.iter().map(|(&(a, b), &v)| (a, b, v)).collect();
        list.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<(usize, usize), f64>, D::Error> {
        let list = Vec::<(usize, usize, f64)>::deserialize(d)?;
        Ok(list.into_iter().map(|(a, b, v)| ((a, b), v)).collect())
    }
}

impl IsingModel {
    pub fn new(h: Vec<f64>, j: BTreeMap<(usize, usize), f64>, offset: f64) -> Result<Self> {
        let n = h.len();
        if n == 0 {
            return Err(Error::InvalidArgument("Ising model needs at least one spin".into()));
        }
        for (&(a, b), v) in &j {
            if a >= b || b >= n {
                return Err(Error::InvalidArgument(format!("coupling key ({a},{b}) invalid for n = {n}")));
            }
            if !v.is_finite() {
                return Err(Error::InvalidArgument(format!("coupling ({a},{b}) is not finite")));
            }
        }
        if h.iter().any(|x| !x.is_finite()) || !offset.is_finite() {
            return Err(Error::InvalidArgument("fields and offset must be finite".into()));
        }
        Ok(Self { n, h, j, offset })
    }

    /// `J_ab` for any ordering of the pair; zero when absent.
    pub fn coupling(&self, a: usize, b: usize) -> f64 {
        let key = if a < b { (a, b) } else { (b, a) };
        self.j.get(&key).copied().unwrap_or(0.0)
    }

    /// Energy of a ±1 spin configuration, offset included.
    pub fn energy(&self, spins: &[i8]) -> f64 {
        assert_eq!(spins.len(), self.n, "spin vector length");
        let mut e = self.offset;
        for (h, &s) in self.h.iter().zip(spins) {
            e += h * s as f64;
        }
        for (&(a, b), v) in &self.j {
            e += v * (spins[a] * spins[b]) as f64;
        }
        e
    }

    /// Energy of a qubit basis state (`|0⟩ → Z = +1`), offset included.
    pub fn basis_energy(&self, qubits: &[u8]) -> f64 {
        let spins: Vec<i8> = qubits.iter().map(|&b| 1 - 2 * b as i8).collect();
        self.energy(&spins)
    }
}

/// Expands `-Σ vᵢⱼxᵢxⱼ + λ·penalty_g(W - Σ wᵢxᵢ)` into triangular QUBO form.
pub fn qkp_to_qubo(inst: &QkpInstance, lambda: f64) -> Result<QuboProblem> {
    if lambda.is_nan() || lambda <= 0.0 {
        return Err(Error::InvalidArgument(format!("lambda must be positive, got {lambda}")));
    }
    let n = inst.n;
    let cap = inst.capacity as f64;
    let mut q = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        let wi = inst.weights[i] as f64;
        // x² = x folds the squared-slack diagonal into the linear term
        q[(i, i)] = -(inst.values[i][i] as f64)
            + lambda * (-PENALTY_LINEAR * wi + PENALTY_QUADRATIC * (wi * wi - 2.0 * cap * wi));
        for j in 0..i {
            let wj = inst.weights[j] as f64;
            q[(i, j)] = -(inst.values[i][j] as f64) + lambda * PENALTY_QUADRATIC * 2.0 * wi * wj;
        }
    }
    QuboProblem::new(q, lambda * penalty_g(cap))
}

/// Substitutes the convention's `x(s)` and collects terms using `s² = 1`.
pub fn qubo_to_ising(qubo: &QuboProblem, conv: SpinConvention) -> IsingModel {
    let n = qubo.n();
    let sigma = conv.sigma();
    let mut h = vec![0.0; n];
    let mut j = BTreeMap::new();
    let mut offset = qubo.offset;
    for a in 0..n {
        let qaa = qubo.q[(a, a)];
        h[a] += sigma * qaa / 2.0;
        offset += qaa / 2.0;
        for b in 0..a {
            let qab = qubo.q[(a, b)];
            if qab == 0.0 {
                continue;
            }
            *j.entry((b, a)).or_insert(0.0) += qab / 4.0;
            h[a] += sigma * qab / 4.0;
            h[b] += sigma * qab / 4.0;
            offset += qab / 4.0;
        }
    }
    IsingModel { n, h, j, offset }
}

/// Bit vector from ±1 spins under `conv`.
pub fn decode_spins(spins: &[i8], conv: SpinConvention) -> Vec<u8> {
    let sigma = conv.sigma() as i8;
    spins.iter().map(|&s| ((1 + sigma * s) / 2) as u8).collect()
}

/// Inverse of [`decode_spins`].
pub fn encode_bits(bits: &[u8], conv: SpinConvention) -> Vec<i8> {
    let sigma = conv.sigma() as i8;
    bits.iter().map(|&x| sigma * (2 * x as i8 - 1)).collect()
}

/// Spins read off a qubit basis state (`|0⟩ → +1`).
pub fn qubits_to_spins(qubits: &[u8]) -> Vec<i8> {
    qubits.iter().map(|&b| 1 - 2 * b as i8).collect()
}

/// Value, weight and feasibility of a selection.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Evaluation {
    pub value: u64,
    pub weight: u64,
    pub feasible: bool,
}

pub fn evaluate_qkp(inst: &QkpInstance, bits: &[u8]) -> Result<Evaluation> {
    if bits.len() != inst.n {
        return Err(Error::Shape(format!(
            "selection has {} bits for {} items",
            bits.len(),
            inst.n
        )));
    }
    let mut value = 0;
    let mut weight = 0;
    for i in 0..inst.n {
        if bits[i] == 0 {
            continue;
        }
        weight += inst.weights[i];
        for (j, &b) in bits[..=i].iter().enumerate() {
            if b != 0 {
                value += inst.values[i][j];
            }
        }
    }
    Ok(Evaluation {
        value,
        weight,
        feasible: weight <= inst.capacity,
    })
}

/// Iterates all `2^n` bit vectors, item 0 as the most significant bit.
pub fn all_bitstrings(n: usize) -> impl Iterator<Item = Vec<u8>> {
    (0..1u64 << n).map(move |m| (0..n).map(|k| ((m >> (n - 1 - k)) & 1) as u8).collect())
}
