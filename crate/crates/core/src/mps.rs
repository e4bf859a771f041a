//! Matrix product states and operators.
//!
//! MPS site tensors carry axes `(left bond, physical, right bond)`; MPO site
//! tensors carry `(left bond, physical out, physical in, right bond)`. Both
//! chains have boundary bonds of dimension one.
//!
//! The dense conversions ([`mps_to_dense`], [`mpo_to_dense`]) exist as
//! validation oracles and refuse chains longer than [`DENSE_CAP`] sites.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::{contract, svd_truncated, Tensor, C64};

/// Largest chain converted to a dense vector or matrix by default.
pub const DENSE_CAP: usize = 14;

/// Format tag written into network dumps.
pub const DUMP_FORMAT: &str = "qkp-tn-network/1";

/// Gauge of an MPS.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Form {
    None,
    LeftOrthogonal,
    RightOrthogonal,
    /// Sites left of the center are left-orthogonal, sites right of it are
    /// right-orthogonal.
    Mixed(usize),
}

/// Matrix product state.
#[derive(Clone, Debug)]
pub struct Mps {
    sites: Vec<Tensor>,
    form: Form,
}

fn check_chain(sites: &[Tensor], rank: usize, what: &str) -> Result<()> {
    if sites.is_empty() {
        return Err(Error::Shape(format!("{what} needs at least one site")));
    }
    for (k, t) in sites.iter().enumerate() {
        if t.rank() != rank {
            return Err(Error::Shape(format!(
                "{what} site {k} has rank {} instead of {rank}",
                t.rank()
            )));
        }
    }
    if sites[0].dims()[0] != 1 || sites[sites.len() - 1].dims()[rank - 1] != 1 {
        return Err(Error::Shape(format!("{what} boundary bonds must have dimension 1")));
    }
    for k in 0..sites.len() - 1 {
        let r = sites[k].dims()[rank - 1];
        let l = sites[k + 1].dims()[0];
        if r != l {
            return Err(Error::Shape(format!(
                "{what} bond {k}: right dim {r} does not match next left dim {l}"
            )));
        }
    }
    Ok(())
}

impl Mps {
    pub fn new(sites: Vec<Tensor>) -> Result<Self> {
        check_chain(&sites, 3, "MPS")?;
        Ok(Self {
            sites,
            form: Form::None,
        })
    }

    pub(crate) fn from_parts(sites: Vec<Tensor>, form: Form) -> Self {
        debug_assert!(check_chain(&sites, 3, "MPS").is_ok());
        Self { sites, form }
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn sites(&self) -> &[Tensor] {
        &self.sites
    }

    pub fn site(&self, k: usize) -> &Tensor {
        &self.sites[k]
    }

    pub fn form(&self) -> Form {
        self.form
    }

    pub fn into_sites(self) -> Vec<Tensor> {
        self.sites
    }

    pub fn phys_dims(&self) -> Vec<usize> {
        self.sites.iter().map(|t| t.dims()[1]).collect()
    }

    /// Dimensions of the `len() - 1` internal bonds.
    pub fn bond_dims(&self) -> Vec<usize> {
        self.sites[..self.len() - 1].iter().map(|t| t.dims()[2]).collect()
    }

    pub fn max_bond(&self) -> usize {
        self.bond_dims().into_iter().max().unwrap_or(1)
    }

    /// Multiplies the whole state by `factor`, applied on the first site.
    pub fn scaled(mut self, factor: C64) -> Self {
        self.sites[0].scale_mut(factor);
        self
    }

    pub fn norm(&self) -> f64 {
        inner(self, self).map(|z| z.re.max(0.0).sqrt()).unwrap_or(0.0)
    }

    pub fn to_json(&self) -> String {
        let dump = NetworkDump {
            format: DUMP_FORMAT.to_string(),
            kind: "mps".into(),
            form: Some(self.form),
            sites: self.sites.iter().map(TensorDump::from).collect(),
        };
        serde_json::to_string(&dump).expect("dump serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let dump: NetworkDump = crate::error::from_json(text)?;
        dump.check("mps")?;
        let sites = dump.sites.into_iter().map(Tensor::try_from).collect::<Result<Vec<_>>>()?;
        let mut m = Mps::new(sites)?;
        m.form = dump.form.unwrap_or(Form::None);
        Ok(m)
    }
}

/// Matrix product operator.
#[derive(Clone, Debug)]
pub struct Mpo {
    sites: Vec<Tensor>,
}

impl Mpo {
    pub fn new(sites: Vec<Tensor>) -> Result<Self> {
        check_chain(&sites, 4, "MPO")?;
        for (k, t) in sites.iter().enumerate() {
            if t.dims()[1] != t.dims()[2] {
                return Err(Error::Shape(format!("MPO site {k} is not square on the physical legs")));
            }
        }
        Ok(Self { sites })
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn sites(&self) -> &[Tensor] {
        &self.sites
    }

    pub fn site(&self, k: usize) -> &Tensor {
        &self.sites[k]
    }

    pub fn phys_dims(&self) -> Vec<usize> {
        self.sites.iter().map(|t| t.dims()[1]).collect()
    }

    /// Left bond dimension of every site (the first is always 1).
    pub fn left_bond_dims(&self) -> Vec<usize> {
        self.sites.iter().map(|t| t.dims()[0]).collect()
    }

    pub fn to_json(&self) -> String {
        let dump = NetworkDump {
            format: DUMP_FORMAT.to_string(),
            kind: "mpo".into(),
            form: None,
            sites: self.sites.iter().map(TensorDump::from).collect(),
        };
        serde_json::to_string(&dump).expect("dump serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let dump: NetworkDump = crate::error::from_json(text)?;
        dump.check("mpo")?;
        Mpo::new(dump.sites.into_iter().map(Tensor::try_from).collect::<Result<Vec<_>>>()?)
    }
}

#[derive(Serialize, Deserialize)]
struct TensorDump {
    dims: Vec<usize>,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl From<&Tensor> for TensorDump {
    fn from(t: &Tensor) -> Self {
        Self {
            dims: t.dims().to_vec(),
            re: t.data().iter().map(|z| z.re).collect(),
            im: t.data().iter().map(|z| z.im).collect(),
        }
    }
}

impl TryFrom<TensorDump> for Tensor {
    type Error = Error;

    fn try_from(d: TensorDump) -> Result<Tensor> {
        if d.re.len() != d.im.len() {
            return Err(Error::Parse("re and im arrays differ in length".into()));
        }
        Tensor::new(d.dims, d.re.into_iter().zip(d.im).map(|(r, i)| C64::new(r, i)).collect())
    }
}

#[derive(Serialize, Deserialize)]
struct NetworkDump {
    format: String,
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    form: Option<Form>,
    sites: Vec<TensorDump>,
}

impl NetworkDump {
    fn check(&self, kind: &str) -> Result<()> {
        if self.format != DUMP_FORMAT {
            return Err(Error::Parse(format!("unknown format tag `{}`", self.format)));
        }
        if self.kind != kind {
            return Err(Error::Parse(format!("expected kind `{kind}`, found `{}`", self.kind)));
        }
        Ok(())
    }
}

fn pow2_capped(k: usize, cap: usize) -> usize {
    if k >= usize::BITS as usize - 1 {
        cap
    } else {
        (1usize << k).min(cap)
    }
}

/// Bond dimensions `min(chi, 2^k, 2^(n-k))` for `k = 1..n-1`.
pub fn saturated_bonds(n: usize, chi: usize) -> Vec<usize> {
    (1..n).map(|k| pow2_capped(k, chi).min(pow2_capped(n - k, chi))).collect()
}

/// Seeded random MPS of unit norm with bond dimensions `min(chi, 2^k, 2^(n-k))`.
pub fn random_mps(n: usize, chi: usize, seed: u64) -> Result<Mps> {
    if n == 0 || chi == 0 {
        return Err(Error::InvalidArgument("random_mps needs n >= 1 and chi >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bonds = saturated_bonds(n, chi);
    let mut sites = Vec::with_capacity(n);
    for k in 0..n {
        let l = if k == 0 { 1 } else { bonds[k - 1] };
        let r = if k == n - 1 { 1 } else { bonds[k] };
        let data = (0..l * 2 * r)
            .map(|_| {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                C64::new(re, im)
            })
            .collect();
        sites.push(Tensor::new(vec![l, 2, r], data)?);
    }
    let m = Mps::new(sites)?;
    let norm = m.norm();
    Ok(m.scaled(C64::new(1.0 / norm, 0.0)))
}

/// Computational basis state; `bits[k]` is the state of qubit `k`.
pub fn product_mps(bits: &[u8]) -> Result<Mps> {
    if bits.is_empty() {
        return Err(Error::InvalidArgument("product_mps needs at least one bit".into()));
    }
    let mut sites = Vec::with_capacity(bits.len());
    for &b in bits {
        if b > 1 {
            return Err(Error::InvalidArgument(format!("bit value {b} is not 0 or 1")));
        }
        let mut t = Tensor::zeros(&[1, 2, 1]);
        t.set(&[0, b as usize, 0], C64::new(1.0, 0.0));
        sites.push(t);
    }
    Ok(Mps::from_parts(sites, Form::Mixed(0)))
}

/// Makes sites `from..to` left-orthogonal, pushing the remainder rightward.
fn left_sweep(sites: &mut [Tensor], from: usize, to: usize, chi: usize, tol: f64) -> Result<()> {
    for k in from..to {
        let svd = svd_truncated(&sites[k], 2, chi, tol)?;
        let carry = svd.sv();
        sites[k] = svd.u;
        sites[k + 1] = contract(&carry, &sites[k + 1], &[(1, 0)])?;
    }
    Ok(())
}

/// Makes sites `to+1..=from` right-orthogonal, pushing the remainder leftward.
fn right_sweep(sites: &mut [Tensor], from: usize, to: usize, chi: usize, tol: f64) -> Result<()> {
    for k in (to + 1..=from).rev() {
        let svd = svd_truncated(&sites[k], 1, chi, tol)?;
        let carry = svd.us();
        sites[k] = svd.v_dag;
        sites[k - 1] = contract(&sites[k - 1], &carry, &[(2, 0)])?;
    }
    Ok(())
}

/// Brings `m` into the requested gauge, truncating bonds to `chi_max`.
///
/// The norm is left on the orthogonality center (the last site for
/// left-orthogonal form, the first for right-orthogonal form).
pub fn canonicalize(m: &Mps, target: Form, chi_max: usize, rel_tol: f64) -> Result<Mps> {
    let n = m.len();
    let mut sites = m.sites.clone();
    match target {
        Form::None => {}
        Form::LeftOrthogonal => {
            right_sweep(&mut sites, n - 1, 0, usize::MAX, rel_tol)?;
            left_sweep(&mut sites, 0, n - 1, chi_max, rel_tol)?;
        }
        Form::RightOrthogonal => {
            left_sweep(&mut sites, 0, n - 1, usize::MAX, rel_tol)?;
            right_sweep(&mut sites, n - 1, 0, chi_max, rel_tol)?;
        }
        Form::Mixed(c) => {
            if c >= n {
                return Err(Error::InvalidArgument(format!("center {c} outside a chain of {n}")));
            }
            right_sweep(&mut sites, n - 1, 0, usize::MAX, rel_tol)?;
            left_sweep(&mut sites, 0, n - 1, chi_max, rel_tol)?;
            right_sweep(&mut sites, n - 1, c, chi_max, rel_tol)?;
        }
    }
    Ok(Mps::from_parts(sites, target))
}

/// Deviation from identity of `Σ conj(A)·A` over (left, physical).
pub fn left_orthogonality_defect(site: &Tensor) -> f64 {
    let g = contract(&site.conj(), site, &[(0, 0), (1, 1)]).expect("rank-3 site");
    g.max_abs_diff(&Tensor::identity(site.dims()[2]))
}

/// Deviation from identity of `Σ A·conj(A)` over (physical, right).
pub fn right_orthogonality_defect(site: &Tensor) -> f64 {
    let g = contract(site, &site.conj(), &[(1, 1), (2, 2)]).expect("rank-3 site");
    g.max_abs_diff(&Tensor::identity(site.dims()[0]))
}

/// Largest orthogonality defect over the sites that `m.form()` claims.
pub fn form_defect(m: &Mps) -> f64 {
    let n = m.len();
    let (left, right) = match m.form {
        Form::None => (0..0, 0..0),
        Form::LeftOrthogonal => (0..n - 1, 0..0),
        Form::RightOrthogonal => (0..0, 1..n),
        Form::Mixed(c) => (0..c, c + 1..n),
    };
    let l = left.map(|k| left_orthogonality_defect(&m.sites[k]));
    let r = right.map(|k| right_orthogonality_defect(&m.sites[k]));
    l.chain(r).fold(0.0, f64::max)
}

fn check_pair(a: &[usize], b: &[usize]) -> Result<()> {
    if a != b {
        return Err(Error::Shape(format!("physical dims {a:?} vs {b:?}")));
    }
    Ok(())
}

/// `⟨a|b⟩`.
pub fn inner(a: &Mps, b: &Mps) -> Result<C64> {
    check_pair(&a.phys_dims(), &b.phys_dims())?;
    let mut env = Tensor::from_real(vec![1, 1], &[1.0])?;
    for (sa, sb) in a.sites.iter().zip(&b.sites) {
        let t = contract(&env, sb, &[(1, 0)])?;
        env = contract(&sa.conj(), &t, &[(0, 0), (1, 1)])?;
    }
    Ok(env.data()[0])
}

pub(crate) fn apply_site_to_env(env: &Tensor, a: &Tensor, w: &Tensor) -> Result<Tensor> {
    // env (bra, w, ket); A (ket, q, ket'); W (w, p, q, w')
    let t1 = contract(env, a, &[(2, 0)])?;
    let t2 = contract(&t1, w, &[(1, 0), (2, 2)])?;
    let t3 = contract(&a.conj(), &t2, &[(0, 0), (1, 2)])?;
    t3.permute(&[0, 2, 1])
}

/// `⟨ψ|H|ψ⟩ / ⟨ψ|ψ⟩`, real part.
pub fn expectation(m: &Mps, h: &Mpo) -> Result<f64> {
    check_pair(&m.phys_dims(), &h.phys_dims())?;
    let mut env = Tensor::from_real(vec![1, 1, 1], &[1.0])?;
    for (a, w) in m.sites.iter().zip(&h.sites) {
        env = apply_site_to_env(&env, a, w)?;
    }
    let norm2 = inner(m, m)?.re;
    Ok(env.data()[0].re / norm2)
}

/// `⟨ψ|H²|ψ⟩ / ⟨ψ|ψ⟩` from a two-layer sandwich; `H²` is never formed.
pub fn expectation_sq(m: &Mps, h: &Mpo) -> Result<f64> {
    check_pair(&m.phys_dims(), &h.phys_dims())?;
    let mut env = Tensor::from_real(vec![1, 1, 1, 1], &[1.0])?;
    for (a, w) in m.sites.iter().zip(&h.sites) {
        // env (bra, w_top, w_bottom, ket)
        let t1 = contract(&env, a, &[(3, 0)])?;
        let t2 = contract(&t1, w, &[(2, 0), (3, 2)])?;
        let t3 = contract(&t2, w, &[(1, 0), (3, 2)])?;
        let t4 = contract(&a.conj(), &t3, &[(0, 0), (1, 3)])?;
        env = t4.permute(&[0, 3, 2, 1])?;
    }
    let norm2 = inner(m, m)?.re;
    Ok(env.data()[0].re / norm2)
}

/// Von Neumann entropy (natural log) of the bipartition between sites
/// `cut - 1` and `cut`.
pub fn entanglement_entropy(m: &Mps, cut: usize) -> Result<f64> {
    let n = m.len();
    if cut == 0 || cut >= n {
        return Err(Error::InvalidArgument(format!("cut {cut} outside 1..{n}")));
    }
    let norm = m.norm();
    if (norm - 1.0).abs() > 1e-8 {
        return Err(Error::Normalization { norm });
    }
    let mixed = canonicalize(m, Form::Mixed(cut - 1), usize::MAX, 0.0)?;
    let svd = svd_truncated(&mixed.sites[cut - 1], 2, usize::MAX, 0.0)?;
    Ok(schmidt_entropy(&svd.s))
}

/// `-Σ p ln p` with `p = s²`, renormalized.
pub fn schmidt_entropy(s: &[f64]) -> f64 {
    let total: f64 = s.iter().map(|x| x * x).sum();
    s.iter()
        .map(|x| x * x / total)
        .filter(|&p| p > 0.0)
        .map(|p| -p * p.ln())
        .sum()
}

pub fn mps_to_dense(m: &Mps) -> Result<DVector<C64>> {
    mps_to_dense_capped(m, DENSE_CAP)
}

pub fn mps_to_dense_capped(m: &Mps, cap: usize) -> Result<DVector<C64>> {
    if m.len() > cap {
        return Err(Error::Size {
            what: "dense MPS",
            n: m.len(),
            cap,
        });
    }
    let first = &m.sites[0];
    let mut acc = first.clone().with_dims(vec![first.dims()[1], first.dims()[2]])?;
    for site in &m.sites[1..] {
        let t = contract(&acc, site, &[(1, 0)])?;
        let (p, q, r) = (t.dims()[0], t.dims()[1], t.dims()[2]);
        acc = t.with_dims(vec![p * q, r])?;
    }
    Ok(DVector::from_vec(acc.into_data()))
}

pub fn mpo_to_dense(h: &Mpo) -> Result<DMatrix<C64>> {
    mpo_to_dense_capped(h, DENSE_CAP)
}

/// Dense operator, rows indexed by output bits and columns by input bits.
pub fn mpo_to_dense_capped(h: &Mpo, cap: usize) -> Result<DMatrix<C64>> {
    if h.len() > cap {
        return Err(Error::Size {
            what: "dense MPO",
            n: h.len(),
            cap,
        });
    }
    let first = &h.sites[0];
    let d = first.dims();
    // acc (out, in, bond)
    let mut acc = first.clone().with_dims(vec![d[1], d[2], d[3]])?;
    for site in &h.sites[1..] {
        let t = contract(&acc, site, &[(2, 0)])?; // (O, I, o, i, w)
        let t = t.permute(&[0, 2, 1, 3, 4])?;
        let dd = t.dims().to_vec();
        acc = t.with_dims(vec![dd[0] * dd[1], dd[2] * dd[3], dd[4]])?;
    }
    let (rows, cols) = (acc.dims()[0], acc.dims()[1]);
    Ok(DMatrix::from_row_slice(rows, cols, acc.data()))
}
