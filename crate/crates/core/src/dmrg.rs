//! Two-site DMRG, penalty-projected excited states and annealing gap scans.
//!
//! A sweep keeps left environments for the sites it has passed and right
//! environments for the sites ahead, so each local step costs one Lanczos
//! solve on the two-site block plus one SVD. Excited states minimize
//! `H + w |ψ₀⟩⟨ψ₀|` where the projector enters through overlap environments of
//! `ψ₀` against the current state; no modified MPO is ever built.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::automata::annealing_mpo;
use crate::encoding::IsingModel;
use crate::error::{Error, Result};
use crate::mps::{canonicalize, expectation, expectation_sq, inner, random_mps, Form, Mpo, Mps};
use crate::tensor::{contract, svd_truncated, Tensor, C64};

const ONE: C64 = C64::new(1.0, 0.0);

/// Restarts allowed per local eigensolve.
const MAX_RESTARTS: usize = 200;

/// Amplitude of the random admixture in the excited-state starting vector.
pub const EXCITED_INIT_NOISE: f64 = 1e-2;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DmrgParams {
    pub chi_max: usize,
    pub max_sweeps: usize,
    /// Stop when the objective changes by less than this between sweeps.
    pub energy_tol: f64,
    /// Stop when `⟨H²⟩ - ⟨H⟩²` drops below this.
    pub variance_tol: f64,
    pub lanczos_dim: usize,
    pub lanczos_tol: f64,
    pub svd_rel_tol: f64,
    pub seed: u64,
    /// Added to the reported energy, e.g. the Ising offset.
    pub energy_offset: f64,
}

impl Default for DmrgParams {
    fn default() -> Self {
        Self {
            chi_max: 16,
            max_sweeps: 20,
            energy_tol: 1e-9,
            variance_tol: 1e-8,
            lanczos_dim: 20,
            lanczos_tol: 1e-10,
            svd_rel_tol: 0.0,
            seed: 0,
            energy_offset: 0.0,
        }
    }
}

impl DmrgParams {
    pub fn validate(&self) -> Result<()> {
        if self.chi_max == 0 || self.max_sweeps == 0 || self.lanczos_dim == 0 {
            return Err(Error::InvalidArgument("DMRG caps must be at least 1".into()));
        }
        if !(self.energy_tol > 0.0 && self.variance_tol > 0.0 && self.lanczos_tol > 0.0) {
            return Err(Error::InvalidArgument("DMRG tolerances must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct DmrgOutcome {
    /// `⟨φ|H|φ⟩` plus [`DmrgParams::energy_offset`].
    pub energy: f64,
    /// Final value of the minimized functional (penalty included, offset not).
    pub objective: f64,
    /// Unit-norm state with its center on site 0.
    pub state: Mps,
    pub variance: f64,
    pub sweeps_used: usize,
    pub converged: bool,
    /// Objective after each full sweep.
    pub sweep_energies: Vec<f64>,
}

/// Lowest Ritz pair of a Hermitian map by restarted Lanczos with full
/// reorthogonalization.
///
/// ```
/// use nalgebra::DVector;
/// use qkp_tn::dmrg::local_eigensolve;
/// use qkp_tn::C64;
///
/// let d = [3.0, 1.0, -2.0, 5.0];
/// let apply = |v: &DVector<C64>| DVector::from_fn(4, |i, _| v[i] * d[i]);
/// let b0 = DVector::from_element(4, C64::new(1.0, 0.0));
/// let (lambda, x) = local_eigensolve(apply, &b0, 20, 1e-12).unwrap();
/// assert!((lambda + 2.0).abs() < 1e-12);
/// assert!((x[2].norm() - 1.0).abs() < 1e-12);
/// ```
///
/// A start vector with no overlap on the ground eigenvector stays in its
/// invariant Krylov space; see [`local_eigensolve_escaping`].
pub fn local_eigensolve<F>(apply_h: F, b0: &DVector<C64>, dim_cap: usize, tol: f64) -> Result<(f64, DVector<C64>)>
where
    F: Fn(&DVector<C64>) -> DVector<C64>,
{
    lanczos(apply_h, b0, dim_cap, tol, false)
}

/// Like [`local_eigensolve`], but an invariant Krylov space is extended by a
/// seeded random direction, so the lowest eigenvalue is found from any start.
/// Used by the sweeps.
pub fn local_eigensolve_escaping<F>(apply_h: F, b0: &DVector<C64>, dim_cap: usize, tol: f64) -> Result<(f64, DVector<C64>)>
where
    F: Fn(&DVector<C64>) -> DVector<C64>,
{
    lanczos(apply_h, b0, dim_cap, tol, true)
}

fn lanczos<F>(apply_h: F, b0: &DVector<C64>, dim_cap: usize, tol: f64, escape: bool) -> Result<(f64, DVector<C64>)>
where
    F: Fn(&DVector<C64>) -> DVector<C64>,
{
    let n = b0.len();
    let start_norm = b0.norm();
    if start_norm == 0.0 || !start_norm.is_finite() {
        return Err(Error::DegenerateStart);
    }
    let m_cap = dim_cap.clamp(1, n.max(1));
    let mut x = b0 / C64::new(start_norm, 0.0);
    let mut lambda = f64::NAN;
    for _ in 0..MAX_RESTARTS {
        let (theta, ritz, exhausted) = lanczos_pass(&apply_h, &x, m_cap, escape);
        let hx = apply_h(&ritz);
        let resid = (&hx - &ritz * C64::new(theta, 0.0)).norm();
        x = ritz;
        lambda = theta;
        if resid <= tol * theta.abs().max(1.0) || (exhausted && resid <= 1e-8 * theta.abs().max(1.0)) {
            break;
        }
    }
    Ok((lambda, x))
}

/// One Krylov pass from unit vector `v0`; returns the lowest Ritz pair and
/// whether the Krylov space became invariant.
fn lanczos_pass<F>(apply_h: &F, v0: &DVector<C64>, m_cap: usize, escape: bool) -> (f64, DVector<C64>, bool)
where
    F: Fn(&DVector<C64>) -> DVector<C64>,
{
    let mut basis: Vec<DVector<C64>> = vec![v0.clone()];
    let mut alpha = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut exhausted = false;
    loop {
        let k = basis.len() - 1;
        let mut w = apply_h(&basis[k]);
        let a = basis[k].dotc(&w).re;
        alpha.push(a);
        // two Gram-Schmidt passes against the whole basis
        for _ in 0..2 {
            for q in &basis {
                let c = q.dotc(&w);
                w -= q * c;
            }
        }
        if basis.len() == m_cap {
            break;
        }
        let b = w.norm();
        let scale = alpha.iter().map(|x| x.abs()).fold(1.0, f64::max);
        if b > 1e-13 * scale {
            beta.push(b);
            basis.push(w / C64::new(b, 0.0));
            continue;
        }
        match fresh_direction(&basis, v0.len()).filter(|_| escape) {
            Some(q) => {
                beta.push(0.0);
                basis.push(q);
            }
            None => {
                exhausted = true;
                break;
            }
        }
    }
    let m = alpha.len();
    let t = DMatrix::from_fn(m, m, |i, j| {
        if i == j {
            alpha[i]
        } else if i + 1 == j {
            beta[i]
        } else if j + 1 == i {
            beta[j]
        } else {
            0.0
        }
    });
    let eig = t.clone().symmetric_eigen();
    let (imin, theta) = eig
        .eigenvalues
        .iter()
        .copied()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("nonempty tridiagonal");
    let y = refine_eigenvector(&t, theta, eig.eigenvectors.column(imin).into_owned());
    let mut ritz = DVector::zeros(v0.len());
    for (q, &c) in basis.iter().zip(y.iter()) {
        ritz += q * C64::new(c, 0.0);
    }
    let nrm = ritz.norm();
    ritz /= C64::new(nrm, 0.0);
    if m == v0.len() {
        exhausted = true;
    }
    (theta, ritz, exhausted)
}

/// Inverse iteration on a small symmetric matrix; the implicit QR vectors can
/// be off by far more than the eigenvalue when off-diagonals are tiny.
fn refine_eigenvector(t: &DMatrix<f64>, theta: f64, mut y: DVector<f64>) -> DVector<f64> {
    let m = t.nrows();
    let scale = t.iter().map(|x| x.abs()).fold(1.0, f64::max);
    let shifted = t - DMatrix::identity(m, m) * (theta - 1e-10 * scale);
    let lu = shifted.lu();
    for _ in 0..3 {
        match lu.solve(&y) {
            Some(z) if z.iter().all(|x| x.is_finite()) && z.norm() > 0.0 => y = &z / z.norm(),
            _ => break,
        }
    }
    y
}

/// Seeded random unit vector orthogonal to `basis`, if one exists.
fn fresh_direction(basis: &[DVector<C64>], n: usize) -> Option<DVector<C64>> {
    if basis.len() >= n {
        return None;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x1a2c_0000 + basis.len() as u64);
    for _ in 0..4 {
        let mut w = DVector::from_fn(n, |_, _| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            C64::new(re, im)
        });
        for _ in 0..2 {
            for q in basis {
                let c = q.dotc(&w);
                w -= q * c;
            }
        }
        let b = w.norm();
        if b > 1e-8 {
            return Some(w / C64::new(b, 0.0));
        }
    }
    None
}

fn trivial(rank: usize) -> Tensor {
    Tensor::new(vec![1; rank], vec![ONE]).expect("unit tensor")
}

/// `L'(b', w', k') = Σ L(b,w,k) conj(A(b,p,b')) W(w,p,q,w') A(k,q,k')`.
fn grow_left(env: &Tensor, a: &Tensor, w: &Tensor) -> Result<Tensor> {
    let t1 = contract(env, a, &[(2, 0)])?;
    let t2 = contract(&t1, w, &[(1, 0), (2, 2)])?;
    let t3 = contract(&t2, &a.conj(), &[(0, 0), (2, 1)])?;
    t3.permute(&[2, 1, 0])
}

/// `R'(b, w, k) = Σ conj(A(b,p,b')) W(w,p,q,w') A(k,q,k') R(b',w',k')`.
fn grow_right(env: &Tensor, a: &Tensor, w: &Tensor) -> Result<Tensor> {
    let t1 = contract(a, env, &[(2, 2)])?;
    let t2 = contract(&t1, w, &[(1, 2), (3, 3)])?;
    let t3 = contract(&t2, &a.conj(), &[(1, 2), (3, 1)])?;
    t3.permute(&[2, 1, 0])
}

/// Overlap environment `(ψ bond, φ bond)` extended by one site on the left.
fn overlap_left(env: &Tensor, psi: &Tensor, phi: &Tensor) -> Result<Tensor> {
    let t1 = contract(env, phi, &[(1, 0)])?;
    let t2 = contract(&t1, &psi.conj(), &[(0, 0), (1, 1)])?;
    t2.permute(&[1, 0])
}

fn overlap_right(env: &Tensor, psi: &Tensor, phi: &Tensor) -> Result<Tensor> {
    let t1 = contract(phi, env, &[(2, 1)])?;
    let t2 = contract(&t1, &psi.conj(), &[(1, 1), (2, 2)])?;
    t2.permute(&[1, 0])
}

/// Two-site effective Hamiltonian applied to `θ(l, p1, p2, r)`.
fn apply_two_site(l: &Tensor, w1: &Tensor, w2: &Tensor, r: &Tensor, theta: &Tensor) -> Result<Tensor> {
    let t1 = contract(l, theta, &[(2, 0)])?;
    let t2 = contract(&t1, w1, &[(1, 0), (2, 2)])?;
    let t3 = contract(&t2, w2, &[(4, 0), (1, 2)])?;
    contract(&t3, r, &[(1, 2), (4, 1)])
}

struct Penalty<'a> {
    w: f64,
    psi: &'a Mps,
    left: Vec<Option<Tensor>>,
    right: Vec<Option<Tensor>>,
}

struct Sweeper<'a> {
    h: &'a Mpo,
    sites: Vec<Tensor>,
    left: Vec<Option<Tensor>>,
    right: Vec<Option<Tensor>>,
    penalty: Option<Penalty<'a>>,
    params: &'a DmrgParams,
}

impl<'a> Sweeper<'a> {
    fn new(h: &'a Mpo, init: &Mps, penalty: Option<(f64, &'a Mps)>, params: &'a DmrgParams) -> Result<Self> {
        let n = h.len();
        let start = canonicalize(init, Form::RightOrthogonal, params.chi_max, params.svd_rel_tol)?;
        let nrm = start.norm();
        let mut sites = start.into_sites();
        sites[0].scale_mut(C64::new(1.0 / nrm, 0.0));
        let mut left = vec![None; n + 1];
        let mut right = vec![None; n + 1];
        left[0] = Some(trivial(3));
        right[n] = Some(trivial(3));
        for k in (1..n).rev() {
            right[k] = Some(grow_right(right[k + 1].as_ref().unwrap(), &sites[k], h.site(k))?);
        }
        let penalty = match penalty {
            None => None,
            Some((w, psi)) => {
                let mut pl = vec![None; n + 1];
                let mut pr = vec![None; n + 1];
                pl[0] = Some(trivial(2));
                pr[n] = Some(trivial(2));
                for k in (1..n).rev() {
                    pr[k] = Some(overlap_right(pr[k + 1].as_ref().unwrap(), psi.site(k), &sites[k])?);
                }
                Some(Penalty {
                    w,
                    psi,
                    left: pl,
                    right: pr,
                })
            }
        };
        Ok(Self {
            h,
            sites,
            left,
            right,
            penalty,
            params,
        })
    }

    /// Optimizes sites `k, k+1` and splits the block; returns the local objective.
    fn step(&mut self, k: usize, moving_right: bool) -> Result<f64> {
        let theta = contract(&self.sites[k], &self.sites[k + 1], &[(2, 0)])?;
        let dims = theta.dims().to_vec();
        let l = self.left[k].as_ref().unwrap();
        let r = self.right[k + 2].as_ref().unwrap();
        let (w1, w2) = (self.h.site(k), self.h.site(k + 1));
        let proj = match &self.penalty {
            None => None,
            Some(p) => {
                let block = contract(p.psi.site(k), p.psi.site(k + 1), &[(2, 0)])?;
                let lo = p.left[k].as_ref().unwrap().conj();
                let ro = p.right[k + 2].as_ref().unwrap().conj();
                let g = contract(&contract(&lo, &block, &[(0, 0)])?, &ro, &[(3, 0)])?;
                Some((p.w, DVector::from_vec(g.into_data())))
            }
        };
        let apply = |v: &DVector<C64>| {
            let t = Tensor::new(dims.clone(), v.as_slice().to_vec()).expect("block shape");
            let mut out = DVector::from_vec(apply_two_site(l, w1, w2, r, &t).expect("block contraction").into_data());
            if let Some((w, g)) = &proj {
                out += g * (g.dotc(v) * C64::new(*w, 0.0));
            }
            out
        };
        let b0 = DVector::from_vec(theta.into_data());
        let (lambda, x) = local_eigensolve_escaping(apply, &b0, self.params.lanczos_dim, self.params.lanczos_tol)?;
        let opt = Tensor::new(dims, x.data.into())?;
        let mut svd = svd_truncated(&opt, 2, self.params.chi_max, self.params.svd_rel_tol)?;
        let kept_norm = svd.s.iter().map(|x| x * x).sum::<f64>().sqrt();
        for x in svd.s.iter_mut() {
            *x /= kept_norm;
        }
        if moving_right {
            self.sites[k] = svd.u.clone();
            self.sites[k + 1] = svd.sv();
            self.left[k + 1] = Some(grow_left(self.left[k].as_ref().unwrap(), &self.sites[k], w1)?);
            if let Some(p) = self.penalty.as_mut() {
                p.left[k + 1] = Some(overlap_left(p.left[k].as_ref().unwrap(), p.psi.site(k), &self.sites[k])?);
            }
        } else {
            self.sites[k] = svd.us();
            self.sites[k + 1] = svd.v_dag.clone();
            self.right[k + 1] = Some(grow_right(self.right[k + 2].as_ref().unwrap(), &self.sites[k + 1], w2)?);
            if let Some(p) = self.penalty.as_mut() {
                p.right[k + 1] =
                    Some(overlap_right(p.right[k + 2].as_ref().unwrap(), p.psi.site(k + 1), &self.sites[k + 1])?);
            }
        }
        Ok(lambda)
    }

    /// Single-site problem for a one-site chain.
    fn solve_single(&mut self) -> Result<f64> {
        let w = self.h.site(0);
        let d = w.dims()[1];
        let hm = DMatrix::from_fn(d, d, |p, q| w.get(&[0, p, q, 0]));
        let proj = self
            .penalty
            .as_ref()
            .map(|p| (p.w, DVector::from_vec(p.psi.site(0).data().to_vec())));
        let apply = |v: &DVector<C64>| {
            let mut out = &hm * v;
            if let Some((w, g)) = &proj {
                out += g * (g.dotc(v) * C64::new(*w, 0.0));
            }
            out
        };
        let b0 = DVector::from_vec(self.sites[0].data().to_vec());
        let (lambda, x) = local_eigensolve_escaping(apply, &b0, self.params.lanczos_dim, self.params.lanczos_tol)?;
        self.sites[0] = Tensor::new(vec![1, d, 1], x.data.into())?;
        Ok(lambda)
    }

    fn state(&self) -> Mps {
        Mps::from_parts(self.sites.clone(), Form::Mixed(0))
    }
}

fn run(h: &Mpo, init: &Mps, penalty: Option<(f64, &Mps)>, params: &DmrgParams) -> Result<DmrgOutcome> {
    params.validate()?;
    if init.phys_dims() != h.phys_dims() {
        return Err(Error::Shape(format!(
            "state has physical dims {:?}, operator {:?}",
            init.phys_dims(),
            h.phys_dims()
        )));
    }
    if let Some((_, psi)) = penalty {
        if psi.phys_dims() != h.phys_dims() {
            return Err(Error::Shape("penalty state does not match the operator".into()));
        }
        let nrm = psi.norm();
        if (nrm - 1.0).abs() > 1e-8 {
            return Err(Error::Normalization { norm: nrm });
        }
    }
    let n = h.len();
    let mut sw = Sweeper::new(h, init, penalty, params)?;
    let mut sweep_energies = Vec::new();
    let mut converged = false;
    let mut variance = f64::INFINITY;
    let mut objective = f64::NAN;
    for sweep in 0..params.max_sweeps {
        if n == 1 {
            objective = sw.solve_single()?;
        } else {
            for k in 0..n - 1 {
                sw.step(k, true)?;
            }
            for k in (0..n - 1).rev() {
                objective = sw.step(k, false)?;
            }
        }
        let state = sw.state();
        let e = expectation(&state, h)?;
        variance = expectation_sq(&state, h)? - e * e;
        let delta = sweep_energies.last().map(|prev: &f64| (objective - prev).abs());
        sweep_energies.push(objective);
        if n == 1 || delta.is_some_and(|d| d < params.energy_tol) || (sweep > 0 && variance < params.variance_tol) {
            converged = true;
            break;
        }
    }
    let state = sw.state();
    let energy = expectation(&state, h)?;
    Ok(DmrgOutcome {
        energy: energy + params.energy_offset,
        objective,
        state,
        variance,
        sweeps_used: sweep_energies.len(),
        converged,
        sweep_energies,
    })
}

/// Ground state from a seeded random start, or the penalized minimum when
/// `penalty = Some((w, ψ))`.
pub fn dmrg_ground(h: &Mpo, params: &DmrgParams, penalty: Option<(f64, &Mps)>) -> Result<DmrgOutcome> {
    let init = random_mps(h.len(), params.chi_max, params.seed)?;
    run(h, &init, penalty, params)
}

/// DMRG from a caller-supplied starting state.
pub fn dmrg_from(h: &Mpo, init: &Mps, params: &DmrgParams, penalty: Option<(f64, &Mps)>) -> Result<DmrgOutcome> {
    run(h, init, penalty, params)
}

/// `|0…0⟩` with a small seeded admixture on saturated bonds, normalized.
pub fn excited_start(n: usize, chi: usize, seed: u64) -> Result<Mps> {
    let noise = random_mps(n, chi, seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let sites = noise
        .into_sites()
        .into_iter()
        .map(|t| {
            let mut data: Vec<C64> = t
                .data()
                .iter()
                .map(|_| {
                    let re: f64 = StandardNormal.sample(&mut rng);
                    let im: f64 = StandardNormal.sample(&mut rng);
                    C64::new(re, im) * EXCITED_INIT_NOISE
                })
                .collect();
            data[0] += ONE;
            Tensor::new(t.dims().to_vec(), data)
        })
        .collect::<Result<Vec<_>>>()?;
    let m = Mps::new(sites)?;
    let nrm = m.norm();
    Ok(m.scaled(C64::new(1.0 / nrm, 0.0)))
}

/// First excited state: minimizes `H + w |ψ₀⟩⟨ψ₀|` starting near `|0…0⟩`.
pub fn excited_state(h: &Mpo, ground: &DmrgOutcome, w: f64, params: &DmrgParams) -> Result<DmrgOutcome> {
    if !(w > 0.0) {
        return Err(Error::InvalidArgument(format!("penalty weight must be positive, got {w}")));
    }
    let init = excited_start(h.len(), params.chi_max, params.seed.wrapping_add(1))?;
    run(h, &init, Some((w, &ground.state)), params)
}

/// How the penalty weight is chosen for each excited-state run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WPolicy {
    /// `2·σ + 2·|E₀| + 1` from the ground run, σ the energy spread.
    #[default]
    Auto,
    Fixed(f64),
}

impl WPolicy {
    pub fn weight(&self, ground: &DmrgOutcome, offset: f64) -> f64 {
        match *self {
            WPolicy::Fixed(w) => w,
            WPolicy::Auto => 2.0 * ground.variance.max(0.0).sqrt() + 2.0 * (ground.energy - offset).abs() + 1.0,
        }
    }
}

/// Sampled lowest two energies along an anneal; energies exclude the offset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapScanResult {
    pub s_grid: Vec<f64>,
    pub e0: Vec<f64>,
    pub e1: Vec<f64>,
    pub gaps: Vec<f64>,
    pub g_min: f64,
    pub argmin_s: f64,
    /// Grid indices whose raw gap came out negative and was clamped to zero.
    pub clamped: Vec<usize>,
}

impl GapScanResult {
    /// Builds the result from raw triples, clamping negative gaps.
    pub fn from_points(s_grid: Vec<f64>, e0: Vec<f64>, e1: Vec<f64>) -> Result<Self> {
        if s_grid.len() < 2 || s_grid.len() != e0.len() || s_grid.len() != e1.len() {
            return Err(Error::InsufficientData(format!(
                "gap scan needs at least two aligned points, got {}",
                s_grid.len()
            )));
        }
        if s_grid.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidArgument("gap scan grid must be ascending".into()));
        }
        let mut clamped = Vec::new();
        let gaps: Vec<f64> = e0
            .iter()
            .zip(&e1)
            .enumerate()
            .map(|(i, (a, b))| {
                let g = b - a;
                if g < 0.0 {
                    clamped.push(i);
                    0.0
                } else {
                    g
                }
            })
            .collect();
        let (imin, &g_min) = gaps
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .expect("nonempty");
        Ok(Self {
            argmin_s: s_grid[imin],
            s_grid,
            e0,
            e1,
            gaps,
            g_min,
            clamped,
        })
    }

    /// `s,e0,e1,gap` rows at 12 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("s,e0,e1,gap\n");
        for i in 0..self.s_grid.len() {
            out.push_str(&format!(
                "{},{},{},{}\n",
                sig12(self.s_grid[i]),
                sig12(self.e0[i]),
                sig12(self.e1[i]),
                sig12(self.gaps[i])
            ));
        }
        out
    }

    /// Parses the CSV written by [`GapScanResult::to_csv`]; `#` lines are skipped.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let headers = rdr.headers().map_err(|e| Error::Parse(e.to_string()))?.clone();
        let col = |name: &str| {
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::Parse(format!("gap CSV is missing column `{name}`")))
        };
        let (cs, c0, c1) = (col("s")?, col("e0")?, col("e1")?);
        let (mut s, mut e0, mut e1) = (Vec::new(), Vec::new(), Vec::new());
        for (row, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| Error::Parse(e.to_string()))?;
            let field = |c: usize, name: &str| -> Result<f64> {
                rec.get(c)
                    .and_then(|v| v.parse().ok())
                    .ok_or_else(|| Error::Parse(format!("row {}: bad `{name}` value", row + 1)))
            };
            s.push(field(cs, "s")?);
            e0.push(field(c0, "e0")?);
            e1.push(field(c1, "e1")?);
        }
        Self::from_points(s, e0, e1)
    }
}

/// 12 significant digits in scientific notation.
pub fn sig12(x: f64) -> String {
    format!("{x:.11e}")
}

/// Ground and first excited energies of `annealing_mpo(ising, s)` for
/// `s = i/(steps-1)`, run in parallel across grid points.
pub fn gap_scan(ising: &IsingModel, steps: usize, params: &DmrgParams, w_policy: WPolicy) -> Result<GapScanResult> {
    if steps < 2 {
        return Err(Error::InvalidArgument("gap scan needs at least 2 steps".into()));
    }
    let grid: Vec<f64> = (0..steps).map(|i| i as f64 / (steps - 1) as f64).collect();
    let points: Vec<(f64, f64)> = grid
        .par_iter()
        .enumerate()
        .map(|(i, &s)| {
            scan_point(ising, s, i as u64, params, w_policy).map_err(|e| Error::AtAnnealingPoint {
                s,
                source: Box::new(e),
            })
        })
        .collect::<Result<_>>()?;
    let (e0, e1) = points.into_iter().unzip();
    GapScanResult::from_points(grid, e0, e1)
}

fn scan_point(ising: &IsingModel, s: f64, index: u64, params: &DmrgParams, w_policy: WPolicy) -> Result<(f64, f64)> {
    let h = annealing_mpo(ising, s)?;
    let p = DmrgParams {
        seed: params.seed ^ index,
        energy_offset: 0.0,
        ..params.clone()
    };
    let ground = dmrg_ground(&h, &p, None)?;
    let w = w_policy.weight(&ground, 0.0);
    let excited = excited_state(&h, &ground, w, &p)?;
    Ok((ground.energy, excited.energy))
}

/// `|⟨a|b⟩|` for unit-norm states.
pub fn fidelity(a: &Mps, b: &Mps) -> Result<f64> {
    Ok(inner(a, b)?.norm())
}
