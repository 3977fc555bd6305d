//! Channel representations and the operations relating them.
//!
//! Choi matrices are unnormalized, `J = Σ_ij |i⟩⟨j| ⊗ Φ(|i⟩⟨j|)`, with the
//! input factor first. Minimal Kraus sets are read off the Choi spectrum in
//! descending eigenvalue order; inside a degenerate eigenspace the basis is
//! rotated to concentrate each operator on its leading singular direction,
//! which makes the choice deterministic and recovers rank-one operators
//! whenever the eigenspace admits them.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::{
    c, eigh, frobenius, C64, hs_inner, max_abs, numerical_rank, partial_trace, polar_factor, re, svd, trace, CMatrix, CVector,
    DensityMatrix, HermitianOperator, Subsystem, CLAMP_TOL, SUPPORT_TOL,
};
use crate::random;

pub const COMPLETENESS_TOL: f64 = 1e-9;
/// Choi eigenvalues above this contribute a minimal Kraus operator.
pub const MINIMAL_KRAUS_TOL: f64 = 1e-10;
pub const EQUIVALENCE_TOL: f64 = 1e-8;
pub const OVERCOMPLETE_TOL: f64 = 1e-9;
pub const GRAM_TOL: f64 = 1e-10;
const DEGENERACY_TOL: f64 = 1e-10;

/// Completely positive trace-preserving map `ρ ↦ Σ_k V_k ρ V_k†`.
#[derive(Clone, Debug)]
pub struct KrausChannel {
    dim_in: usize,
    dim_out: usize,
    ops: Vec<CMatrix>,
}

impl KrausChannel {
    pub fn new(ops: Vec<CMatrix>) -> Result<Self> {
        Self::with_tolerance(ops, COMPLETENESS_TOL)
    }

    pub fn with_tolerance(ops: Vec<CMatrix>, tol: f64) -> Result<Self> {
        let chan = Self::from_ops_unchecked(ops)?;
        let deviation = chan.completeness_deviation();
        if deviation > tol {
            return Err(Error::NotTracePreserving { deviation });
        }
        Ok(chan)
    }

    /// Shape checks only.
    pub(crate) fn from_ops_unchecked(ops: Vec<CMatrix>) -> Result<Self> {
        let first = ops.first().ok_or(Error::EmptyKraus)?;
        let (dim_out, dim_in) = first.shape();
        for op in &ops {
            if op.nrows() != dim_out {
                return Err(Error::DimensionMismatch {
                    context: "Kraus operator rows",
                    expected: dim_out,
                    found: op.nrows(),
                });
            }
            if op.ncols() != dim_in {
                return Err(Error::DimensionMismatch {
                    context: "Kraus operator columns",
                    expected: dim_in,
                    found: op.ncols(),
                });
            }
            if !op.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
                return Err(Error::NonFinite { what: "Kraus operator" });
            }
        }
        Ok(Self { dim_in, dim_out, ops })
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn kraus_ops(&self) -> &[CMatrix] {
        &self.ops
    }

    pub fn into_kraus_ops(self) -> Vec<CMatrix> {
        self.ops
    }

    /// `‖Σ V_k†V_k − I‖_max`.
    pub fn completeness_deviation(&self) -> f64 {
        let mut s = CMatrix::zeros(self.dim_in, self.dim_in);
        for v in &self.ops {
            s += v.adjoint() * v;
        }
        max_abs(&(s - CMatrix::identity(self.dim_in, self.dim_in)))
    }

    /// Linear action on an arbitrary input matrix.
    pub fn apply_matrix(&self, a: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.dim_out, self.dim_out);
        for v in &self.ops {
            out += v * a * v.adjoint();
        }
        out
    }

    /// Heisenberg-picture action `Σ V_k† A V_k`.
    pub fn dual_matrix(&self, a: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.dim_in, self.dim_in);
        for v in &self.ops {
            out += v.adjoint() * a * v;
        }
        out
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        self.check_input(rho.dim())?;
        DensityMatrix::from_positive(&self.apply_matrix(rho.matrix()))
    }

    pub fn dual_apply(&self, a: &HermitianOperator) -> Result<HermitianOperator> {
        if a.dim() != self.dim_out {
            return Err(Error::DimensionMismatch {
                context: "dual map input",
                expected: self.dim_out,
                found: a.dim(),
            });
        }
        Ok(HermitianOperator::symmetrized(&self.dual_matrix(a.matrix())))
    }

    pub(crate) fn check_input(&self, dim: usize) -> Result<()> {
        if dim != self.dim_in {
            return Err(Error::DimensionMismatch {
                context: "channel input",
                expected: self.dim_in,
                found: dim,
            });
        }
        Ok(())
    }

    /// `then ∘ self`.
    pub fn compose(&self, then: &KrausChannel) -> Result<KrausChannel> {
        if then.dim_in != self.dim_out {
            return Err(Error::DimensionMismatch {
                context: "channel composition",
                expected: self.dim_out,
                found: then.dim_in,
            });
        }
        let ops = then
            .ops
            .iter()
            .flat_map(|t| self.ops.iter().map(move |s| t * s))
            .filter(|m| frobenius(m) > 0.0)
            .collect();
        KrausChannel::new(ops)
    }

    /// Restriction to the subspace spanned by the columns of the isometry `p`.
    pub fn restrict_input(&self, p: &CMatrix) -> Result<KrausChannel> {
        if p.nrows() != self.dim_in {
            return Err(Error::DimensionMismatch {
                context: "input restriction",
                expected: self.dim_in,
                found: p.nrows(),
            });
        }
        KrausChannel::new(self.ops.iter().map(|v| v * p).collect())
    }

    pub fn choi(&self) -> ChoiMatrix {
        to_choi(self)
    }
}

/// Unnormalized Choi matrix on `H_in ⊗ H_out`.
#[derive(Clone, Debug)]
pub struct ChoiMatrix {
    dim_in: usize,
    dim_out: usize,
    matrix: HermitianOperator,
}

impl ChoiMatrix {
    pub fn new(dim_in: usize, dim_out: usize, matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != dim_in * dim_out {
            return Err(Error::DimensionMismatch {
                context: "Choi matrix",
                expected: dim_in * dim_out,
                found: matrix.nrows(),
            });
        }
        let op = HermitianOperator::new(matrix).map_err(|e| Error::InvalidChoi { reason: e.to_string() })?;
        let spec = eigh(op.matrix())?;
        let min = spec.values.first().copied().unwrap_or(0.0);
        if min < -CLAMP_TOL {
            return Err(Error::InvalidChoi {
                reason: format!("not positive semidefinite (minimum eigenvalue {min:.3e})"),
            });
        }
        let marginal = partial_trace(op.matrix(), (dim_in, dim_out), Subsystem::A)?;
        let deviation = max_abs(&(marginal - CMatrix::identity(dim_in, dim_in)));
        if deviation > COMPLETENESS_TOL {
            return Err(Error::InvalidChoi {
                reason: format!("output partial trace differs from identity by {deviation:.3e}"),
            });
        }
        Ok(Self {
            dim_in,
            dim_out,
            matrix: op,
        })
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn matrix(&self) -> &CMatrix {
        self.matrix.matrix()
    }
}

/// `Σ_k vec(V_k) vec(V_k)†`, with `vec(V)[i·d_out + b] = V[b, i]`.
pub(crate) fn choi_of_ops(ops: &[CMatrix], dim_in: usize, dim_out: usize) -> CMatrix {
    let n = dim_in * dim_out;
    let mut j = CMatrix::zeros(n, n);
    for v in ops {
        let col = CVector::from_fn(n, |idx, _| v[(idx % dim_out, idx / dim_out)]);
        j += &col * col.adjoint();
    }
    j
}

pub fn to_choi(chan: &KrausChannel) -> ChoiMatrix {
    ChoiMatrix {
        dim_in: chan.dim_in,
        dim_out: chan.dim_out,
        matrix: HermitianOperator::symmetrized(&choi_of_ops(&chan.ops, chan.dim_in, chan.dim_out)),
    }
}

/// Minimal Kraus set, one operator per Choi eigenvalue above `MINIMAL_KRAUS_TOL`,
/// mutually orthogonal in the Hilbert-Schmidt pairing.
pub fn from_choi(choi: &ChoiMatrix) -> Result<KrausChannel> {
    let (din, dout) = (choi.dim_in, choi.dim_out);
    let spec = eigh(choi.matrix())?;
    let mut kept: Vec<(f64, CMatrix)> = spec
        .values
        .iter()
        .enumerate()
        .rev()
        .filter(|&(_, &lam)| lam > MINIMAL_KRAUS_TOL)
        .map(|(k, &lam)| {
            let col = spec.vectors.column(k);
            let op = CMatrix::from_fn(dout, din, |b, i| col[i * dout + b] * re(lam.sqrt()));
            (lam, op)
        })
        .collect();
    if kept.is_empty() {
        return Err(Error::InvalidChoi {
            reason: "no eigenvalue above the minimal-Kraus threshold".into(),
        });
    }
    let scale = kept[0].0.max(1.0);
    let mut ops = Vec::with_capacity(kept.len());
    let mut start = 0;
    while start < kept.len() {
        let mut end = start + 1;
        while end < kept.len() && (kept[start].0 - kept[end].0).abs() <= DEGENERACY_TOL * scale {
            end += 1;
        }
        let block: Vec<CMatrix> = kept[start..end].iter_mut().map(|(_, m)| std::mem::take(m)).collect();
        ops.extend(canonicalize_block(block)?);
        start = end;
    }
    KrausChannel::new(ops)
}

pub fn minimal_kraus(chan: &KrausChannel) -> Result<Vec<CMatrix>> {
    Ok(from_choi(&to_choi(chan))?.into_kraus_ops())
}

/// `Σ_k σ_max(V_k)²`.
fn leading_weight(ops: &[CMatrix]) -> Result<f64> {
    let mut total = 0.0;
    for op in ops {
        let s = svd(op)?;
        total += s.s.first().map_or(0.0, |x| x * x);
    }
    Ok(total)
}

/// `W_k = Σ_l U_lk V_l`.
pub(crate) fn mix_ops(ops: &[CMatrix], u: &CMatrix) -> Vec<CMatrix> {
    (0..u.ncols())
        .map(|k| {
            let mut acc = CMatrix::zeros(ops[0].nrows(), ops[0].ncols());
            for (l, op) in ops.iter().enumerate() {
                if u[(l, k)].norm() > 0.0 {
                    acc += op * u[(l, k)];
                }
            }
            acc
        })
        .collect()
}

/// Maximizes `Σ_k ‖P_k W_k‖²` over unitary mixings `W = V U`, where `P_k`
/// projects onto the top `rank` left singular vectors of `W_k`. Each step
/// replaces `U` by the polar factor of the gradient, which cannot decrease a
/// convex objective on the unitary group.
pub(crate) fn concentrate_rank(ops: &[CMatrix], rank: usize, starts: usize, seed: u64) -> Result<(Vec<CMatrix>, f64)> {
    let g = ops.len();
    let objective = |mixed: &[CMatrix]| -> Result<f64> {
        let mut total = 0.0;
        for op in mixed {
            total += svd(op)?.s.iter().take(rank).map(|x| x * x).sum::<f64>();
        }
        Ok(total)
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(Vec<CMatrix>, f64)> = None;
    for start in 0..starts.max(1) {
        let mut u = if start == 0 {
            CMatrix::identity(g, g)
        } else {
            random::unitary(&mut rng, g)
        };
        let mut mixed = mix_ops(ops, &u);
        let mut value = objective(&mixed)?;
        for _ in 0..400 {
            let mut grad = CMatrix::zeros(g, g);
            for (k, w) in mixed.iter().enumerate() {
                let dec = svd(w)?;
                let mut proj_w = CMatrix::zeros(w.nrows(), w.ncols());
                for s in 0..rank.min(dec.s.len()) {
                    proj_w += dec.u.column(s) * dec.v_t.row(s) * re(dec.s[s]);
                }
                for (l, op) in ops.iter().enumerate() {
                    grad[(l, k)] = hs_inner(op, &proj_w);
                }
            }
            u = polar_factor(&grad, None)?;
            mixed = mix_ops(ops, &u);
            let next = objective(&mixed)?;
            let improved = next - value;
            value = next;
            if improved.abs() < 1e-15 {
                break;
            }
        }
        if best.as_ref().is_none_or(|(_, b)| value > *b + 1e-13) {
            best = Some((mixed, value));
        }
    }
    Ok(best.expect("at least one start"))
}

fn canonicalize_block(block: Vec<CMatrix>) -> Result<Vec<CMatrix>> {
    let mut ops = if block.len() == 1 {
        block
    } else {
        let before = leading_weight(&block)?;
        let (mixed, after) = concentrate_rank(&block, 1, 8, 0x51ce_b10c)?;
        if after > before { mixed } else { block }
    };
    for op in ops.iter_mut() {
        fix_phase(op);
    }
    if ops.len() > 1 {
        ops.sort_by_key(leading_index);
    }
    Ok(ops)
}

/// Row-major index of the first entry within a relative 1e-6 of the largest magnitude.
fn leading_index(m: &CMatrix) -> usize {
    let peak = max_abs(m);
    (0..m.nrows() * m.ncols())
        .find(|&idx| m[(idx / m.ncols(), idx % m.ncols())].norm() >= peak * (1.0 - 1e-6))
        .unwrap_or(0)
}

fn fix_phase(m: &mut CMatrix) {
    let idx = leading_index(m);
    let z = m[(idx / m.ncols(), idx % m.ncols())];
    if z.norm() > 0.0 {
        let phase = z.conj() / z.norm();
        *m *= phase;
    }
}

/// Frobenius distance between Choi matrices (infinite for mismatched shapes).
pub fn choi_distance(a: &KrausChannel, b: &KrausChannel) -> f64 {
    if a.dim_in != b.dim_in || a.dim_out != b.dim_out {
        return f64::INFINITY;
    }
    frobenius(&(to_choi(a).matrix() - to_choi(b).matrix()))
}

/// Environment channel `ρ ↦ Σ_kl Tr[V_k ρ V_l†] |k⟩⟨l|` for the given Kraus list.
pub fn complementary_of_kraus(ops: &[CMatrix]) -> Result<KrausChannel> {
    let m = ops.len();
    let first = ops.first().ok_or(Error::EmptyKraus)?;
    let (dout, din) = first.shape();
    let env_ops: Vec<CMatrix> = (0..dout)
        .map(|b| CMatrix::from_fn(m, din, |k, i| ops[k][(b, i)]))
        .filter(|e| max_abs(e) > 0.0)
        .collect();
    KrausChannel::new(env_ops)
}

/// Complement built from the minimal Kraus set; output dimension equals the Choi rank.
pub fn complementary(chan: &KrausChannel) -> Result<KrausChannel> {
    complementary_of_kraus(&minimal_kraus(chan)?)
}

/// Isometry `V: H_in → H_out ⊗ H_env` with `⟨φ|V_k ψ⟩ = ⟨φ ⊗ k|V ψ⟩`.
#[derive(Clone, Debug)]
pub struct StinespringIsometry {
    pub dim_in: usize,
    pub dim_out: usize,
    pub dim_env: usize,
    pub v: CMatrix,
}

impl StinespringIsometry {
    /// `V ρ V†` on `H_out ⊗ H_env`.
    pub fn dilate(&self, rho: &CMatrix) -> CMatrix {
        &self.v * rho * self.v.adjoint()
    }
}

pub fn stinespring(chan: &KrausChannel) -> Result<StinespringIsometry> {
    let ops = minimal_kraus(chan)?;
    let m = ops.len();
    let (dout, din) = (chan.dim_out, chan.dim_in);
    let v = CMatrix::from_fn(dout * m, din, |row, i| ops[row % m][(row / m, i)]);
    Ok(StinespringIsometry {
        dim_in: din,
        dim_out: dout,
        dim_env: m,
        v,
    })
}

fn frame_deviation(system: &[CVector], dim: usize) -> f64 {
    let mut s = CMatrix::zeros(dim, dim);
    for v in system {
        s += v * v.adjoint();
    }
    max_abs(&(s - CMatrix::identity(dim, dim)))
}

/// Kraus set `W_i = Σ_k ⟨ψ_i|k⟩ V_k` generated by an overcomplete system in the
/// index space of the channel's current Kraus list.
pub fn rekraus(chan: &KrausChannel, system: &[CVector]) -> Result<KrausChannel> {
    let m = chan.ops.len();
    if let Some(bad) = system.iter().find(|v| v.len() != m) {
        return Err(Error::DimensionMismatch {
            context: "re-Krausing system vector",
            expected: m,
            found: bad.len(),
        });
    }
    let deviation = frame_deviation(system, m);
    if deviation > OVERCOMPLETE_TOL {
        return Err(Error::NotOvercomplete { deviation });
    }
    let ops = system
        .iter()
        .map(|psi| {
            let mut w = CMatrix::zeros(chan.dim_out, chan.dim_in);
            for (k, v) in chan.ops.iter().enumerate() {
                w += v * psi[k].conj();
            }
            w
        })
        .collect();
    KrausChannel::new(ops)
}

/// Outcome of an isometric-equivalence search between `Φ` and `Φ'`.
#[derive(Clone, Debug)]
pub struct Equivalence {
    /// Partial isometry `W: H_B → H_B'` when both residuals are within tolerance.
    pub isometry: Option<CMatrix>,
    /// Best candidate found, returned even when the residuals are too large.
    pub candidate: CMatrix,
    /// Choi distance between `Φ'` and `W Φ(·) W†`.
    pub forward_residual: f64,
    /// Choi distance between `Φ` and `W† Φ'(·) W`.
    pub backward_residual: f64,
}

impl Equivalence {
    pub fn residual(&self) -> f64 {
        self.forward_residual.max(self.backward_residual)
    }

    pub fn is_equivalent(&self) -> bool {
        self.isometry.is_some()
    }
}

/// Choi matrix of `ρ ↦ W Φ(ρ) W†` for an arbitrary output map `W`.
fn conjugated_choi(chan: &KrausChannel, w: &CMatrix) -> CMatrix {
    let ops: Vec<CMatrix> = chan.ops.iter().map(|v| w * v).collect();
    choi_of_ops(&ops, chan.dim_in, w.nrows())
}

/// Searches for a partial isometry `W` with `Φ' = WΦ(·)W*` and `Φ = W*Φ'(·)W`.
///
/// Minimal Stinespring environments are aligned by a unitary `U` so that
/// `W V_k = Σ_l V'_l U_lk`; the search alternates two Procrustes steps (polar
/// factors for `W` and `U`) from several starting alignments, the first of
/// which matches relative phases read off the products `V_k† V_l`.
pub fn isometric_equivalence(a: &KrausChannel, b: &KrausChannel) -> Result<Equivalence> {
    let none = |candidate: CMatrix| Equivalence {
        isometry: None,
        candidate,
        forward_residual: f64::INFINITY,
        backward_residual: f64::INFINITY,
    };
    if a.dim_in != b.dim_in {
        return Ok(none(CMatrix::zeros(b.dim_out, a.dim_out)));
    }
    let mut va = minimal_kraus(a)?;
    let mut vb = minimal_kraus(b)?;
    let n = va.len().max(vb.len());
    va.resize(n, CMatrix::zeros(a.dim_out, a.dim_in));
    vb.resize(n, CMatrix::zeros(b.dim_out, b.dim_in));

    let out_support = eigh(&a.apply_matrix(&CMatrix::identity(a.dim_in, a.dim_in)))?;
    let rank = out_support.support(SUPPORT_TOL).count().min(b.dim_out);

    let w_step = |u: &CMatrix| -> Result<CMatrix> {
        let targets = mix_ops(&vb, u);
        let mut m = CMatrix::zeros(a.dim_out, b.dim_out);
        for (v, t) in va.iter().zip(&targets) {
            m += v * t.adjoint();
        }
        // maximize Re Tr[W M] over rank-limited partial isometries
        Ok(polar_factor(&m, Some(rank))?.adjoint())
    };
    let u_step = |w: &CMatrix| -> Result<CMatrix> {
        let mut nmat = CMatrix::zeros(n, n);
        for (k, v) in va.iter().enumerate() {
            let wv = w * v;
            for (l, vp) in vb.iter().enumerate() {
                nmat[(l, k)] = hs_inner(vp, &wv);
            }
        }
        polar_factor(&nmat, None)
    };
    let misfit = |w: &CMatrix, u: &CMatrix| -> f64 {
        let targets = mix_ops(&vb, u);
        va.iter()
            .zip(&targets)
            .map(|(v, t)| frobenius(&(w * v - t)).powi(2))
            .sum::<f64>()
            .sqrt()
    };

    let mut starts = vec![phase_alignment(&va, &vb), CMatrix::identity(n, n)];
    let mut rng = ChaCha8Rng::seed_from_u64(0xe9_0a1e);
    starts.extend((0..6).map(|_| random::unitary(&mut rng, n)));

    let mut best: Option<(f64, CMatrix)> = None;
    for start in starts {
        let mut u = start;
        let mut w = w_step(&u)?;
        let mut err = misfit(&w, &u);
        for _ in 0..300 {
            u = u_step(&w)?;
            w = w_step(&u)?;
            let next = misfit(&w, &u);
            let done = (err - next).abs() < 1e-15 || next < 1e-14;
            err = next;
            if done {
                break;
            }
        }
        if best.as_ref().is_none_or(|(e, _)| err < *e) {
            best = Some((err, w));
        }
        if err < 1e-12 {
            break;
        }
    }
    let (_, w) = best.expect("at least one start");

    let ja = to_choi(a);
    let jb = to_choi(b);
    let forward = frobenius(&(jb.matrix() - conjugated_choi(a, &w)));
    let backward = frobenius(&(ja.matrix() - conjugated_choi(b, &w.adjoint())));
    let ok = forward.max(backward) <= EQUIVALENCE_TOL;
    Ok(Equivalence {
        isometry: ok.then(|| w.clone()),
        candidate: w,
        forward_residual: forward,
        backward_residual: backward,
    })
}

/// Diagonal alignment `U_kk = e^{iθ_k}` from `V_k†V_l = e^{i(θ_l-θ_k)} V'_k†V'_l`,
/// propagated along nonzero products.
fn phase_alignment(va: &[CMatrix], vb: &[CMatrix]) -> CMatrix {
    let n = va.len();
    let mut phase: Vec<Option<C64>> = vec![None; n];
    for root in 0..n {
        if phase[root].is_some() {
            continue;
        }
        phase[root] = Some(re(1.0));
        let mut stack = vec![root];
        while let Some(k) = stack.pop() {
            for l in 0..n {
                if phase[l].is_some() {
                    continue;
                }
                let z = hs_inner(&(vb[k].adjoint() * &vb[l]), &(va[k].adjoint() * &va[l]));
                if z.norm() > 1e-8 {
                    phase[l] = Some(phase[k].unwrap() * z / z.norm());
                    stack.push(l);
                }
            }
        }
    }
    CMatrix::from_diagonal(&CVector::from_iterator(n, phase.into_iter().map(|p| p.unwrap_or(re(1.0)))))
}


/// `Ψ ∘ Θ` with `Θ(X) = W† X W + σ Tr[(I − WW†) X]`: transfers a reverse channel
/// of `Φ` to one of `Φ' = WΦ(·)W†`.
pub fn transfer_reverse(psi: &KrausChannel, w: &CMatrix, sigma: &DensityMatrix) -> Result<KrausChannel> {
    let (d_bp, d_b) = w.shape();
    if psi.dim_in != d_b {
        return Err(Error::DimensionMismatch {
            context: "reverse channel input",
            expected: d_b,
            found: psi.dim_in,
        });
    }
    if sigma.dim() != d_b {
        return Err(Error::DimensionMismatch {
            context: "fallback state",
            expected: d_b,
            found: sigma.dim(),
        });
    }
    let p = w.adjoint() * w;
    let idempotency = max_abs(&(&p * &p - &p));
    if idempotency > 1e-9 {
        return Err(Error::InvalidParameter {
            reason: format!("W is not a partial isometry (||(W†W)² − W†W|| = {idempotency:.3e})"),
        });
    }
    let q = CMatrix::identity(d_bp, d_bp) - w * w.adjoint();
    let q_spec = eigh(&q)?;
    let mut ops = vec![w.adjoint()];
    for (qi, _) in q_spec.values.iter().enumerate().filter(|(_, &x)| x > 0.5) {
        let qv = q_spec.vectors.column(qi);
        for (a, &s) in sigma.eigenvalues().iter().enumerate() {
            if s > 0.0 {
                let e = sigma.spectrum().vectors.column(a);
                ops.push(e * qv.adjoint() * re(s.sqrt()));
            }
        }
    }
    let theta = KrausChannel::new(ops)?;
    theta.compose(psi)
}

/// `Φ(ρ) = Σ_ij c_ij ⟨ψ_i|ρ|ψ_j⟩ |i⟩⟨j|` for a unit-diagonal PSD kernel `c` and an
/// overcomplete system `{ψ_i}`.
pub fn pseudo_diagonal(gram: &CMatrix, system: &[CVector]) -> Result<KrausChannel> {
    let n = gram.nrows();
    if gram.ncols() != n || system.len() != n {
        return Err(Error::DimensionMismatch {
            context: "pseudo-diagonal kernel vs system size",
            expected: n,
            found: system.len(),
        });
    }
    let dim = system.first().map(|v| v.len()).ok_or(Error::EmptyKraus)?;
    if system.iter().any(|v| v.len() != dim) {
        return Err(Error::InvalidParameter {
            reason: "system vectors have unequal dimensions".into(),
        });
    }
    let op = HermitianOperator::new(gram.clone()).map_err(|e| Error::InvalidGram { reason: e.to_string() })?;
    let diag_dev = (0..n).map(|i| (gram[(i, i)] - re(1.0)).norm()).fold(0.0, f64::max);
    if diag_dev > GRAM_TOL {
        return Err(Error::InvalidGram {
            reason: format!("diagonal deviates from 1 by {diag_dev:.3e}"),
        });
    }
    let spec = eigh(op.matrix())?;
    if let Some(&min) = spec.values.first() {
        if min < -GRAM_TOL {
            return Err(Error::InvalidGram {
                reason: format!("not positive semidefinite (minimum eigenvalue {min:.3e})"),
            });
        }
    }
    let deviation = frame_deviation(system, dim);
    if deviation > OVERCOMPLETE_TOL {
        return Err(Error::NotOvercomplete { deviation });
    }
    let ops = spec
        .values
        .iter()
        .enumerate()
        .filter(|(_, &mu)| mu > GRAM_TOL)
        .map(|(e, &mu)| {
            let w = spec.vectors.column(e);
            CMatrix::from_fn(n, dim, |a, i| w[a] * re(mu.sqrt()) * system[a][i].conj())
        })
        .collect();
    KrausChannel::new(ops)
}

pub fn identity(dim: usize) -> KrausChannel {
    KrausChannel::new(vec![CMatrix::identity(dim, dim)]).expect("identity is a channel")
}

/// Complete dephasing in the computational basis.
pub fn dephasing(dim: usize) -> KrausChannel {
    let ops = (0..dim)
        .map(|k| CMatrix::from_fn(dim, dim, |i, j| if i == k && j == k { re(1.0) } else { re(0.0) }))
        .collect();
    KrausChannel::new(ops).expect("projective measurement is a channel")
}

/// `Tr_E` on `H_B ⊗ H_E`.
pub fn partial_trace_channel(dim_b: usize, dim_e: usize) -> KrausChannel {
    let ops = (0..dim_e)
        .map(|e| {
            CMatrix::from_fn(dim_b, dim_b * dim_e, |b, col| {
                if col == b * dim_e + e { re(1.0) } else { re(0.0) }
            })
        })
        .collect();
    KrausChannel::new(ops).expect("partial trace is a channel")
}

/// Unnormalized trine vectors `√(2/3) (cos 2πk/3, sin 2πk/3)`, k = 0, 1, 2.
pub fn trine_vectors() -> [CVector; 3] {
    let s = (2.0f64 / 3.0).sqrt();
    std::array::from_fn(|k| {
        let t = 2.0 * PI * k as f64 / 3.0;
        CVector::from_vec(vec![re(s * t.cos()), re(s * t.sin())])
    })
}

/// `Φ(ρ) = Σ_k ⟨φ_k|ρ|φ_k⟩ |k⟩⟨k|` from a qubit to a qutrit.
pub fn trine() -> KrausChannel {
    let phis = trine_vectors();
    let ops = (0..3)
        .map(|k| CMatrix::from_fn(3, 2, |row, col| if row == k { phis[k][col].conj() } else { re(0.0) }))
        .collect();
    KrausChannel::new(ops).expect("trine POVM channel")
}

/// `ρ ↦ (1 − p) ρ + p I/d`, `p ∈ [0, 1]`, via the Weyl operators.
pub fn depolarizing(dim: usize, p: f64) -> Result<KrausChannel> {
    if !(0.0..=1.0).contains(&p) || dim == 0 {
        return Err(Error::InvalidParameter {
            reason: format!("depolarizing needs dim >= 1 and p in [0, 1], got dim {dim}, p {p}"),
        });
    }
    let d2 = (dim * dim) as f64;
    let omega = 2.0 * PI / dim as f64;
    let mut ops = Vec::with_capacity(dim * dim);
    for a in 0..dim {
        for b in 0..dim {
            let weight = if a == 0 && b == 0 { 1.0 - p + p / d2 } else { p / d2 };
            if weight <= 0.0 {
                continue;
            }
            // X^a Z^b
            let op = CMatrix::from_fn(dim, dim, |i, j| {
                if i == (j + a) % dim {
                    let t = omega * (b * j) as f64;
                    c(t.cos(), t.sin()) * re(weight.sqrt())
                } else {
                    re(0.0)
                }
            });
            ops.push(op);
        }
    }
    KrausChannel::new(ops)
}

/// Constant channel `ρ ↦ σ` on a `dim_in`-dimensional input.
pub fn replacement(dim_in: usize, sigma: &DensityMatrix) -> KrausChannel {
    let d = sigma.dim();
    let mut ops = Vec::new();
    for (a, &s) in sigma.eigenvalues().iter().enumerate() {
        if s <= 0.0 {
            continue;
        }
        let e = sigma.spectrum().vectors.column(a);
        for i in 0..dim_in {
            ops.push(CMatrix::from_fn(d, dim_in, |row, col| if col == i { e[row] * re(s.sqrt()) } else { re(0.0) }));
        }
    }
    KrausChannel::new(ops).expect("replacement channel")
}

/// Library channels addressable by name, e.g. `dephasing:2`, `depolarizing:2:0.5`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum NamedChannel {
    Identity(usize),
    Dephasing(usize),
    PartialTrace(usize, usize),
    Trine,
    Depolarizing(usize, f64),
    /// Replacement by the maximally mixed state: `(dim_in, dim_out)`.
    Completely(usize, usize),
}

impl NamedChannel {
    pub fn build(&self) -> Result<KrausChannel> {
        Ok(match *self {
            NamedChannel::Identity(d) => identity(d),
            NamedChannel::Dephasing(d) => dephasing(d),
            NamedChannel::PartialTrace(b, e) => partial_trace_channel(b, e),
            NamedChannel::Trine => trine(),
            NamedChannel::Depolarizing(d, p) => depolarizing(d, p)?,
            NamedChannel::Completely(din, dout) => replacement(din, &DensityMatrix::maximally_mixed(dout)),
        })
    }
}

impl fmt::Display for NamedChannel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NamedChannel::Identity(d) => write!(f, "identity:{d}"),
            NamedChannel::Dephasing(d) => write!(f, "dephasing:{d}"),
            NamedChannel::PartialTrace(b, e) => write!(f, "partial-trace:{b}:{e}"),
            NamedChannel::Trine => write!(f, "trine"),
            NamedChannel::Depolarizing(d, p) => write!(f, "depolarizing:{d}:{p}"),
            NamedChannel::Completely(a, b) => write!(f, "replacement:{a}:{b}"),
        }
    }
}

impl FromStr for NamedChannel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || Error::InvalidParameter {
            reason: format!("unknown channel spec '{s}'"),
        };
        let int = |i: usize| -> Result<usize> {
            parts
                .get(i)
                .and_then(|x| x.parse().ok())
                .filter(|&d: &usize| d > 0)
                .ok_or_else(bad)
        };
        Ok(match parts[0] {
            "identity" => NamedChannel::Identity(int(1)?),
            "dephasing" => NamedChannel::Dephasing(int(1)?),
            "partial-trace" => NamedChannel::PartialTrace(int(1)?, int(2)?),
            "trine" => NamedChannel::Trine,
            "depolarizing" => {
                let p = parts.get(2).and_then(|x| x.parse().ok()).ok_or_else(bad)?;
                NamedChannel::Depolarizing(int(1)?, p)
            }
            "replacement" => NamedChannel::Completely(int(1)?, int(2)?),
            _ => return Err(bad()),
        })
    }
}

pub fn named_channel(spec: &str) -> Result<KrausChannel> {
    spec.parse::<NamedChannel>()?.build()
}

pub const PROB_SUM_TOL: f64 = 1e-12;

/// Finite ensemble `{π_i, ρ_i}` with its average state.
#[derive(Clone, Debug)]
pub struct Ensemble {
    items: Vec<(f64, DensityMatrix)>,
    average: DensityMatrix,
}

impl Ensemble {
    pub fn new(items: Vec<(f64, DensityMatrix)>) -> Result<Self> {
        let dim = items
            .first()
            .map(|(_, r)| r.dim())
            .ok_or_else(|| Error::InvalidEnsemble { reason: "empty".into() })?;
        for (i, (p, r)) in items.iter().enumerate() {
            if !(p.is_finite() && *p > 0.0) {
                return Err(Error::InvalidEnsemble {
                    reason: format!("probability #{i} is {p}, must be positive"),
                });
            }
            if r.dim() != dim {
                return Err(Error::DimensionMismatch {
                    context: "ensemble state",
                    expected: dim,
                    found: r.dim(),
                });
            }
        }
        let total: f64 = items.iter().map(|(p, _)| p).sum();
        if (total - 1.0).abs() > PROB_SUM_TOL {
            return Err(Error::InvalidEnsemble {
                reason: format!("probabilities sum to {total:.15}"),
            });
        }
        let mut avg = CMatrix::zeros(dim, dim);
        for (p, r) in &items {
            avg += r.matrix() * re(*p);
        }
        let average = DensityMatrix::from_positive(&avg)?;
        Ok(Self { items, average })
    }

    /// Drops nonpositive weights and rescales the rest to sum to one.
    pub fn normalized(items: Vec<(f64, DensityMatrix)>) -> Result<Self> {
        let kept: Vec<_> = items.into_iter().filter(|(p, _)| *p > 0.0 && p.is_finite()).collect();
        let total: f64 = kept.iter().map(|(p, _)| p).sum();
        Self::new(kept.into_iter().map(|(p, r)| (p / total, r)).collect())
    }

    pub fn items(&self) -> &[(f64, DensityMatrix)] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.average.dim()
    }

    pub fn average(&self) -> &DensityMatrix {
        &self.average
    }

    pub fn probabilities(&self) -> impl Iterator<Item = f64> + '_ {
        self.items.iter().map(|(p, _)| *p)
    }

    pub fn states(&self) -> impl Iterator<Item = &DensityMatrix> + '_ {
        self.items.iter().map(|(_, r)| r)
    }

    /// `{π_i, Φ(ρ_i)}`.
    pub fn image(&self, chan: &KrausChannel) -> Result<Ensemble> {
        chan.check_input(self.dim())?;
        let items = self
            .items
            .iter()
            .map(|(p, r)| Ok((*p, chan.apply(r)?)))
            .collect::<Result<Vec<_>>>()?;
        Ensemble::new(items)
    }

    /// `{π_i, P† ρ_i P}` for an isometry `P` whose range contains every state's support.
    pub fn restrict(&self, p: &CMatrix) -> Result<Ensemble> {
        let items = self
            .items
            .iter()
            .map(|(w, r)| Ok((*w, DensityMatrix::from_positive(&(p.adjoint() * r.matrix() * p))?)))
            .collect::<Result<Vec<_>>>()?;
        Ensemble::new(items)
    }

    /// Maximum numerical rank (eigenvalues above `tol`) across the states.
    pub fn max_rank(&self, tol: f64) -> usize {
        self.states().map(|r| r.rank(tol)).max().unwrap_or(0)
    }
}

/// Numerical ranks of each Kraus operator (singular values above `tol`).
pub fn kraus_ranks(ops: &[CMatrix], tol: f64) -> Result<Vec<usize>> {
    ops.iter().map(|op| numerical_rank(op, tol)).collect()
}

/// Operator-level trace of a channel output, used by tests and reports.
pub fn output_trace(chan: &KrausChannel, rho: &CMatrix) -> f64 {
    trace(&chan.apply_matrix(rho)).re
}
