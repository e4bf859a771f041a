//! Finite-automaton rule tables compiled into MPOs and MPSs.
//!
//! A table for one site lists the nonzero cells of an operator-valued (or
//! ket-valued) matrix. Row and column indices are 1-based; `-1` names the last
//! index and `-2` the second-to-last, resolved when the rule is added. The
//! compiler keeps only the first row of the first table and the last column of
//! the last table, so the chain starts in state 1 and must finish in the final
//! state.
//!
//! ```
//! use qkp_tn::automata::{mpo_from_tables, Operator, RuleTable};
//! use qkp_tn::mps::mpo_to_dense;
//! use qkp_tn::C64;
//!
//! // Σ Zᵢ Zᵢ₊₁ on three sites
//! let one = C64::new(1.0, 0.0);
//! let mut t = RuleTable::new(3, 3);
//! t.add(1, 1, Operator::identity(), one).unwrap();
//! t.add(1, 2, Operator::z(), one).unwrap();
//! t.add(2, -1, Operator::z(), one).unwrap();
//! t.add(-1, -1, Operator::identity(), one).unwrap();
//! let h = mpo_from_tables(&[t.clone(), t.clone(), t]).unwrap();
//! let d = mpo_to_dense(&h).unwrap();
//! assert_eq!(d[(0, 0)].re, 2.0);
//! assert_eq!(d[(2, 2)].re, -2.0);
//! ```

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::encoding::IsingModel;
use crate::error::{Error, Result};
use crate::mps::{Mpo, Mps};
use crate::tensor::{Tensor, C64};

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// A 2×2 single-qubit operator, row-major as `(out, in)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Operator(pub [C64; 4]);

impl Operator {
    pub fn identity() -> Self {
        Self([ONE, ZERO, ZERO, ONE])
    }

    pub fn x() -> Self {
        Self([ZERO, ONE, ONE, ZERO])
    }

    pub fn y() -> Self {
        Self([ZERO, C64::new(0.0, -1.0), C64::new(0.0, 1.0), ZERO])
    }

    pub fn z() -> Self {
        Self([ONE, ZERO, ZERO, -ONE])
    }

    pub fn zero() -> Self {
        Self([ZERO; 4])
    }

    pub fn get(&self, out: usize, inp: usize) -> C64 {
        self.0[2 * out + inp]
    }

    pub fn scale(&self, c: C64) -> Self {
        Self(self.0.map(|v| v * c))
    }

    pub fn plus(&self, other: &Operator) -> Self {
        let mut r = self.0;
        for (a, b) in r.iter_mut().zip(other.0) {
            *a += b;
        }
        Self(r)
    }
}

/// Named operators available to table documents.
#[derive(Clone, Debug)]
pub struct OperatorAlphabet {
    ops: BTreeMap<String, Operator>,
}

impl Default for OperatorAlphabet {
    fn default() -> Self {
        let mut ops = BTreeMap::new();
        for (names, op) in [
            (["I", "id"], Operator::identity()),
            (["X", "x"], Operator::x()),
            (["Y", "y"], Operator::y()),
            (["Z", "z"], Operator::z()),
        ] {
            for n in names {
                ops.insert(n.to_string(), op);
            }
        }
        Self { ops }
    }
}

impl OperatorAlphabet {
    /// Registers a caller-defined symbol, replacing any previous binding.
    pub fn define(&mut self, name: impl Into<String>, op: Operator) {
        self.ops.insert(name.into(), op);
    }

    pub fn get(&self, name: &str) -> Option<Operator> {
        self.ops.get(name).copied()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.ops.keys().map(String::as_str)
    }
}

/// Single-qubit ket; `down` is `|0⟩` and `up` is `|1⟩`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ket(pub [C64; 2]);

impl Ket {
    pub fn down() -> Self {
        Self([ONE, ZERO])
    }

    pub fn up() -> Self {
        Self([ZERO, ONE])
    }
}

/// Anything that can fill a cell of a rule table.
pub trait Block: Clone {
    /// Physical legs of the block, in tensor order.
    const LEGS: &'static [usize];
    /// Elements in row-major order over [`Block::LEGS`].
    fn elements(&self) -> Vec<C64>;
}

impl Block for Operator {
    const LEGS: &'static [usize] = &[2, 2];
    fn elements(&self) -> Vec<C64> {
        self.0.to_vec()
    }
}

impl Block for Ket {
    const LEGS: &'static [usize] = &[2];
    fn elements(&self) -> Vec<C64> {
        self.0.to_vec()
    }
}

/// One resolved cell.
#[derive(Clone, Debug)]
pub struct Rule<E> {
    /// 1-based row.
    pub left: usize,
    /// 1-based column.
    pub right: usize,
    pub entry: E,
    pub coeff: C64,
}

/// Transition table for one site.
#[derive(Clone, Debug)]
pub struct RuleTable<E> {
    left_dim: usize,
    right_dim: usize,
    rules: Vec<Rule<E>>,
    cells: BTreeSet<(usize, usize)>,
}

fn resolve(idx: i64, dim: usize, side: &str) -> Result<usize> {
    let r = match idx {
        -1 => dim as i64,
        -2 => dim as i64 - 1,
        i => i,
    };
    if r < 1 || r > dim as i64 {
        return Err(Error::InvalidArgument(format!(
            "{side} index {idx} out of range for dimension {dim}"
        )));
    }
    Ok(r as usize)
}

impl<E: Block> RuleTable<E> {
    pub fn new(left_dim: usize, right_dim: usize) -> Self {
        assert!(left_dim >= 1 && right_dim >= 1, "table dimensions must be positive");
        Self {
            left_dim,
            right_dim,
            rules: Vec::new(),
            cells: BTreeSet::new(),
        }
    }

    pub fn left_dim(&self) -> usize {
        self.left_dim
    }

    pub fn right_dim(&self) -> usize {
        self.right_dim
    }

    pub fn rules(&self) -> &[Rule<E>] {
        &self.rules
    }

    /// Adds `coeff · entry` at `(left, right)`; negative indices count from the end.
    pub fn add(&mut self, left: i64, right: i64, entry: E, coeff: C64) -> Result<&mut Self> {
        let l = resolve(left, self.left_dim, "left")?;
        let r = resolve(right, self.right_dim, "right")?;
        if !self.cells.insert((l, r)) {
            return Err(Error::DuplicateRule { left: l, right: r });
        }
        self.rules.push(Rule {
            left: l,
            right: r,
            entry,
            coeff,
        });
        Ok(self)
    }

    fn to_tensor(&self, first: bool, last: bool) -> Tensor {
        let ld = if first { 1 } else { self.left_dim };
        let rd = if last { 1 } else { self.right_dim };
        let block: usize = E::LEGS.iter().product();
        let mut dims = vec![ld];
        dims.extend_from_slice(E::LEGS);
        dims.push(rd);
        let mut data = vec![ZERO; ld * block * rd];
        for rule in &self.rules {
            let l = match (first, rule.left) {
                (true, 1) => 0,
                (true, _) => continue,
                (false, l) => l - 1,
            };
            let r = match (last, rule.right) {
                (true, r) if r == self.right_dim => 0,
                (true, _) => continue,
                (false, r) => r - 1,
            };
            for (e, v) in rule.entry.elements().into_iter().enumerate() {
                data[(l * block + e) * rd + r] += rule.coeff * v;
            }
        }
        Tensor::new(dims, data).expect("table tensor shape")
    }
}

fn compile<E: Block>(tables: &[RuleTable<E>]) -> Result<Vec<Tensor>> {
    if tables.is_empty() {
        return Err(Error::InvalidArgument("no rule tables given".into()));
    }
    for k in 0..tables.len() - 1 {
        if tables[k].right_dim != tables[k + 1].left_dim {
            return Err(Error::TableChain {
                site: k,
                right: tables[k].right_dim,
                left: tables[k + 1].left_dim,
            });
        }
    }
    let n = tables.len();
    Ok(tables
        .iter()
        .enumerate()
        .map(|(k, t)| t.to_tensor(k == 0, k == n - 1))
        .collect())
}

/// Compiles per-site operator tables into an MPO.
pub fn mpo_from_tables(tables: &[RuleTable<Operator>]) -> Result<Mpo> {
    Mpo::new(compile(tables)?)
}

/// Compiles per-site ket tables into an (unnormalized) MPS.
pub fn mps_from_tables(tables: &[RuleTable<Ket>]) -> Result<Mps> {
    Mps::new(compile(tables)?)
}

/// Per-site table set of the annealing Hamiltonian
/// `-(1-s) Σ Xᵢ + s (Σ hᵢ Zᵢ + Σ_{i<j} Jᵢⱼ Zᵢ Zⱼ)` for `N ≥ 2`.
///
/// The site-`k` (1-based) table has left dimension `min(k+2, N-k+3)` before
/// boundary trimming.
pub fn annealing_tables(ising: &IsingModel, s: f64) -> Result<Vec<RuleTable<Operator>>> {
    let n = ising.n;
    if n < 2 {
        return Err(Error::InvalidArgument("annealing tables need N ≥ 2".into()));
    }
    check_s(s)?;
    let half = n / 2;
    let a = if n % 2 == 0 { 2 } else { 3 };
    let c = |x: f64| C64::new(x, 0.0);
    // 1-based coupling lookup
    let jc = |i: usize, j: usize| s * ising.coupling(i - 1, j - 1);
    let (id, z) = (Operator::identity(), Operator::z());

    let mut tables = Vec::with_capacity(n);
    for k in 1..=n {
        let (ld, rd) = if k < half {
            (k + 2, k + 3)
        } else if k == half {
            (half + 2, half + a)
        } else {
            (n - k + 3, n - k + 2)
        };
        let mut t = RuleTable::new(ld, rd);
        let local = Operator::x()
            .scale(c(-(1.0 - s)))
            .plus(&z.scale(c(s * ising.h[k - 1])));
        t.add(1, 1, id, ONE)?;
        t.add(-1, -1, id, ONE)?;
        t.add(-2, -1, z, ONE)?;
        t.add(1, -1, local, ONE)?;
        if k < half {
            t.add(1, 2, z, ONE)?;
            t.add(1, (k + 2) as i64, z, c(jc(k, k + 1)))?;
            for m in 2..=k {
                t.add(m as i64, (m + 1) as i64, id, ONE)?;
                t.add(m as i64, (k + 2) as i64, id, c(jc(k - m + 1, k + 1)))?;
            }
        } else if k == half {
            for col in 2..half + a {
                t.add(1, col as i64, z, c(jc(half, n - col + 2)))?;
                for m in 2..=half {
                    t.add(m as i64, col as i64, id, c(jc(half - m + 1, n - col + 2)))?;
                }
            }
        } else {
            for m in 2..=n - k + 1 {
                t.add(1, m as i64, z, c(jc(k, n - m + 2)))?;
                t.add(m as i64, m as i64, id, ONE)?;
            }
        }
        tables.push(t);
    }
    Ok(tables)
}

fn check_s(s: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::InvalidArgument(format!("annealing parameter s = {s} outside [0, 1]")));
    }
    Ok(())
}

/// MPO of the annealing Hamiltonian at parameter `s`; the Ising offset is not
/// included.
pub fn annealing_mpo(ising: &IsingModel, s: f64) -> Result<Mpo> {
    check_s(s)?;
    if ising.n == 1 {
        let block = Operator::x()
            .scale(C64::new(-(1.0 - s), 0.0))
            .plus(&Operator::z().scale(C64::new(s * ising.h[0], 0.0)));
        let t = Tensor::new(vec![1, 2, 2, 1], block.0.to_vec())?;
        return Mpo::new(vec![t]);
    }
    mpo_from_tables(&annealing_tables(ising, s)?)
}

/// `{sites: [{left_dim, right_dim, rules: [{left, right, op, coeff}]}]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TableDocument {
    pub sites: Vec<SiteDocument>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SiteDocument {
    pub left_dim: usize,
    pub right_dim: usize,
    pub rules: Vec<RuleDocument>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RuleDocument {
    pub left: i64,
    pub right: i64,
    pub op: OpSpec,
    #[serde(default = "unit_coeff")]
    pub coeff: Scalar,
}

fn unit_coeff() -> Scalar {
    Scalar::Real(1.0)
}

/// Operator given by name or as a 2×2 matrix of numbers or `[re, im]` pairs.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OpSpec {
    Named(String),
    Matrix([[Scalar; 2]; 2]),
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Real(f64),
    Complex([f64; 2]),
}

impl Scalar {
    fn value(self) -> C64 {
        match self {
            Scalar::Real(r) => C64::new(r, 0.0),
            Scalar::Complex([re, im]) => C64::new(re, im),
        }
    }
}

impl TableDocument {
    pub fn from_json(text: &str) -> Result<Self> {
        crate::error::from_json(text)
    }

    /// Resolves operator names against `alphabet` and builds the tables.
    pub fn tables(&self, alphabet: &OperatorAlphabet) -> Result<Vec<RuleTable<Operator>>> {
        self.sites
            .iter()
            .enumerate()
            .map(|(k, site)| {
                if site.left_dim == 0 || site.right_dim == 0 {
                    return Err(Error::Parse(format!("sites[{k}]: dimensions must be positive")));
                }
                let mut t = RuleTable::new(site.left_dim, site.right_dim);
                for (r, rule) in site.rules.iter().enumerate() {
                    let op = match &rule.op {
                        OpSpec::Named(name) => alphabet.get(name).ok_or_else(|| {
                            Error::Parse(format!("sites[{k}].rules[{r}].op: unknown operator `{name}`"))
                        })?,
                        OpSpec::Matrix(m) => Operator([m[0][0].value(), m[0][1].value(), m[1][0].value(), m[1][1].value()]),
                    };
                    t.add(rule.left, rule.right, op, rule.coeff.value())?;
                }
                Ok(t)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mps::{mpo_to_dense, mps_to_dense};
    use nalgebra::DMatrix;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn op_matrix(op: Operator) -> DMatrix<C64> {
        DMatrix::from_row_slice(2, 2, &op.0)
    }

    /// Dense product of single-site operators placed on the given sites.
    fn pauli_string(n: usize, ops: &[(usize, Operator)]) -> DMatrix<C64> {
        let mut m = DMatrix::from_element(1, 1, ONE);
        for k in 0..n {
            let op = ops
                .iter()
                .find(|(site, _)| *site == k)
                .map(|(_, o)| *o)
                .unwrap_or_else(Operator::identity);
            m = m.kronecker(&op_matrix(op));
        }
        m
    }

    fn dense_annealing(ising: &IsingModel, s: f64) -> DMatrix<C64> {
        let n = ising.n;
        let dim = 1 << n;
        let mut h = DMatrix::zeros(dim, dim);
        for k in 0..n {
            h += pauli_string(n, &[(k, Operator::x())]) * C64::new(-(1.0 - s), 0.0);
            h += pauli_string(n, &[(k, Operator::z())]) * C64::new(s * ising.h[k], 0.0);
        }
        for (&(a, b), &v) in &ising.j {
            h += pauli_string(n, &[(a, Operator::z()), (b, Operator::z())]) * C64::new(s * v, 0.0);
        }
        h
    }

    fn random_ising(n: usize, rng: &mut impl Rng) -> IsingModel {
        let h = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
        let mut j = BTreeMap::new();
        for a in 0..n {
            for b in a + 1..n {
                j.insert((a, b), rng.random_range(-2.0..2.0));
            }
        }
        IsingModel::new(h, j, 0.0).unwrap()
    }

    fn max_dev(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
        a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    }

    #[test]
    fn identity_chain() {
        let mut t = RuleTable::new(1, 1);
        t.add(1, 1, Operator::identity(), ONE).unwrap();
        let h = mpo_from_tables(&[t.clone(), t.clone(), t]).unwrap();
        assert_eq!(mpo_to_dense(&h).unwrap(), DMatrix::identity(8, 8));
    }

    #[test]
    fn neighbor_pair_sum() {
        // Σ (A_i B_{i+1} + B_i A_{i+1}) with A = Z, B = X
        let (a, b) = (Operator::z(), Operator::x());
        let mut t = RuleTable::new(4, 4);
        t.add(1, 1, Operator::identity(), ONE).unwrap();
        t.add(1, 2, a, ONE).unwrap();
        t.add(1, 3, b, ONE).unwrap();
        t.add(2, 4, b, ONE).unwrap();
        t.add(3, 4, a, ONE).unwrap();
        t.add(4, 4, Operator::identity(), ONE).unwrap();
        let h = mpo_from_tables(&[t.clone(), t.clone(), t]).unwrap();
        let expect = pauli_string(3, &[(0, a), (1, b)])
            + pauli_string(3, &[(0, b), (1, a)])
            + pauli_string(3, &[(1, a), (2, b)])
            + pauli_string(3, &[(1, b), (2, a)]);
        assert!(max_dev(&mpo_to_dense(&h).unwrap(), &expect) < 1e-14);
    }

    #[test]
    fn zz_chain() {
        let mut t = RuleTable::new(3, 3);
        t.add(1, 1, Operator::identity(), ONE).unwrap();
        t.add(1, 2, Operator::z(), ONE).unwrap();
        t.add(2, -1, Operator::z(), ONE).unwrap();
        t.add(-1, -1, Operator::identity(), ONE).unwrap();
        let h = mpo_from_tables(&vec![t; 4]).unwrap();
        let mut expect = DMatrix::zeros(16, 16);
        for k in 0..3 {
            expect += pauli_string(4, &[(k, Operator::z()), (k + 1, Operator::z())]);
        }
        assert!(max_dev(&mpo_to_dense(&h).unwrap(), &expect) < 1e-14);
    }

    #[test]
    fn table_errors() {
        let mut t = RuleTable::<Operator>::new(2, 2);
        t.add(1, -2, Operator::z(), ONE).unwrap();
        assert!(matches!(
            t.add(1, 1, Operator::x(), ONE),
            Err(Error::DuplicateRule { left: 1, right: 1 })
        ));
        assert!(t.add(3, 1, Operator::x(), ONE).is_err());
        let u = RuleTable::<Operator>::new(3, 1);
        assert!(matches!(mpo_from_tables(&[t, u]), Err(Error::TableChain { site: 0, .. })));
    }

    fn consecutive_ones(n: usize) -> Vec<RuleTable<Ket>> {
        let mut t = RuleTable::new(3, 3);
        t.add(1, 1, Ket::down(), ONE).unwrap();
        t.add(1, 2, Ket::up(), ONE).unwrap();
        t.add(2, 3, Ket::up(), ONE).unwrap();
        t.add(3, 3, Ket::down(), ONE).unwrap();
        vec![t; n]
    }

    fn accepted(bits: u32, n: usize) -> bool {
        // exactly one block of exactly two adjacent ones
        bits.count_ones() == 2 && (0..n - 1).any(|k| bits == 0b11 << k)
    }

    #[test]
    fn two_ones_automaton() {
        let v = mps_to_dense(&mps_from_tables(&consecutive_ones(4)).unwrap()).unwrap();
        for (i, x) in v.iter().enumerate() {
            let expect = if [0b0011, 0b0110, 0b1100].contains(&i) { 1.0 } else { 0.0 };
            assert_eq!(*x, C64::new(expect, 0.0), "index {i:04b}");
        }
        let v5 = mps_to_dense(&mps_from_tables(&consecutive_ones(5)).unwrap()).unwrap();
        for (i, x) in v5.iter().enumerate() {
            assert_eq!(x.re, if accepted(i as u32, 5) { 1.0 } else { 0.0 });
        }
    }

    #[test]
    fn single_path_table() {
        let mut t = RuleTable::new(1, 1);
        t.add(1, 1, Ket::up(), ONE).unwrap();
        let mut u = RuleTable::new(1, 1);
        u.add(1, 1, Ket::down(), ONE).unwrap();
        let v = mps_to_dense(&mps_from_tables(&[t, u]).unwrap()).unwrap();
        assert_eq!(v.iter().position(|x| x.re == 1.0), Some(2));
        assert_eq!(v.iter().filter(|x| x.norm() > 0.0).count(), 1);
    }

    #[test]
    fn annealing_at_zero_is_transverse_field() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 1..=6 {
            let ising = random_ising(n, &mut rng);
            let d = mpo_to_dense(&annealing_mpo(&ising, 0.0).unwrap()).unwrap();
            let mut expect = DMatrix::zeros(1 << n, 1 << n);
            for k in 0..n {
                expect -= pauli_string(n, &[(k, Operator::x())]);
            }
            assert!(max_dev(&d, &expect) < 1e-14);
        }
    }

    #[test]
    fn three_site_diagonal() {
        let j = [((0, 1), 2.0), ((0, 2), -1.0), ((1, 2), 0.5)].into_iter().collect();
        let ising = IsingModel::new(vec![1.0, 0.0, -1.0], j, 0.0).unwrap();
        let d = mpo_to_dense(&annealing_mpo(&ising, 1.0).unwrap()).unwrap();
        for i in 0..8 {
            let bits: Vec<u8> = (0..3).map(|k| ((i >> (2 - k)) & 1) as u8).collect();
            assert!((d[(i, i)].re - ising.basis_energy(&bits)).abs() < 1e-12);
        }
        assert!(max_dev(&d, &dense_annealing(&ising, 1.0)) < 1e-12);
    }

    #[test]
    fn bond_dimensions_follow_min_rule() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let six = annealing_mpo(&random_ising(6, &mut rng), 0.5).unwrap();
        assert_eq!(six.left_bond_dims()[1..].to_vec(), vec![4, 5, 5, 4, 3]);
        for n in 2..=9 {
            let m = annealing_mpo(&random_ising(n, &mut rng), 0.5).unwrap();
            let dims = m.left_bond_dims();
            assert_eq!(dims[0], 1);
            for k in 2..=n {
                assert_eq!(dims[k - 1], (k + 2).min(n - k + 3), "N={n} k={k}");
            }
        }
    }

    #[test]
    fn dense_equivalence_sweep() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in 2..=8 {
            for _ in 0..if n > 6 { 5 } else { 20 } {
                let ising = random_ising(n, &mut rng);
                for s in [0.0, 0.3, 0.7, 1.0] {
                    let d = mpo_to_dense(&annealing_mpo(&ising, s).unwrap()).unwrap();
                    assert!(max_dev(&d, &dense_annealing(&ising, s)) < 1e-11, "N={n} s={s}");
                }
            }
        }
    }

    #[test]
    fn json_tables() {
        let doc = r#"{"sites":[
            {"left_dim":1,"right_dim":2,"rules":[{"left":1,"right":1,"op":"I"},{"left":1,"right":2,"op":"Z","coeff":2.0}]},
            {"left_dim":2,"right_dim":1,"rules":[{"left":1,"right":1,"op":[[0,1],[1,0]]},{"left":2,"right":1,"op":"z","coeff":[0.5,0]}]}
        ]}"#;
        let tables = TableDocument::from_json(doc).unwrap().tables(&OperatorAlphabet::default()).unwrap();
        let d = mpo_to_dense(&mpo_from_tables(&tables).unwrap()).unwrap();
        let expect = pauli_string(2, &[(1, Operator::x())])
            + pauli_string(2, &[(0, Operator::z()), (1, Operator::z())]) * C64::new(1.0, 0.0);
        assert!(max_dev(&d, &expect) < 1e-14);

        let bad = r#"{"sites":[{"left_dim":1,"right_dim":1,"rules":[{"left":1,"right":1,"op":"Q"}]}]}"#;
        let err = TableDocument::from_json(bad).unwrap().tables(&OperatorAlphabet::default()).unwrap_err();
        assert!(err.to_string().contains("sites[0].rules[0].op"));

        let mut alpha = OperatorAlphabet::default();
        alpha.define("Q", Operator::y());
        assert!(TableDocument::from_json(bad).unwrap().tables(&alpha).is_ok());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn hermitian_and_linear_in_s(n in 2usize..7, seed in any::<u64>(), s in 0.0f64..=1.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let ising = random_ising(n, &mut rng);
            let hs = mpo_to_dense(&annealing_mpo(&ising, s).unwrap()).unwrap();
            prop_assert_eq!(&hs, &hs.adjoint());
            let h0 = mpo_to_dense(&annealing_mpo(&ising, 0.0).unwrap()).unwrap();
            let h1 = mpo_to_dense(&annealing_mpo(&ising, 1.0).unwrap()).unwrap();
            let lin = h0 * C64::new(1.0 - s, 0.0) + h1 * C64::new(s, 0.0);
            prop_assert!(max_dev(&hs, &lin) < 1e-12);
        }
    }
}
