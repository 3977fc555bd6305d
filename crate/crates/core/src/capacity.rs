//! Holevo-type capacities, output-entropy minimization and the equality diagnostics
//! built on them.
//!
//! All optimizers run independent seeded restarts in parallel and reduce by best
//! value, ties going to the lowest restart index, so results do not depend on
//! scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::channels::{complementary, complementary_of_kraus, choi_of_ops, isometric_equivalence, Ensemble, KrausChannel};
use crate::entropy::{entropy_bits, entropy_of_spectrum, holevo, mutual_info, EntropyValue};
use crate::error::{Error, Result};
use crate::matcore::{
    eigh, frobenius, max_abs, numerical_rank, polar_factor, re, svd, trace_product, CMatrix, CVector, DensityMatrix,
    HermitianOperator, PureStateVector, SUPPORT_TOL,
};
use crate::petz::{rank_bounded_complement, RANK_TOL};
use crate::random;

/// Eigenvalues are clamped here before taking logarithms in gradients.
pub const LOG_FLOOR: f64 = 1e-30;
/// `|C̄(Φ,ρ) − I(Φ,ρ)|` below which the entanglement-breaking construction is attempted.
pub const EQUALITY_TOL: f64 = 1e-6;
pub const RECONSTRUCTION_TOL: f64 = 1e-7;
pub const COVARIANCE_TOL: f64 = 1e-8;
const WEIGHT_DROP: f64 = 1e-14;
const BA_STEPS: usize = 8;
const STALL_ITERS: usize = 15;

#[derive(Clone, Debug, Serialize)]
pub struct CapacityOptions {
    /// Stop once the certified suboptimality estimate falls below this (bits).
    pub tol: f64,
    pub max_iter: usize,
    pub restarts: usize,
    pub seed: u64,
    /// Maximum ensemble size; defaults to `dim_in²`.
    pub ensemble_cap: Option<usize>,
}

impl Default for CapacityOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 300,
            restarts: 16,
            seed: 0,
            ensemble_cap: None,
        }
    }
}

#[derive(Clone, Debug)]
pub enum Argmax {
    Ensemble(Ensemble),
    State(DensityMatrix),
}

#[derive(Clone, Debug)]
pub struct CapacityResult {
    pub value: EntropyValue,
    pub argmax: Argmax,
    /// Iterations used by the winning restart.
    pub iterations: usize,
    pub restarts: usize,
    pub converged: bool,
    /// Best value seen after each restart, in restart order.
    pub history: Vec<f64>,
    /// Final value of each restart.
    pub restart_values: Vec<f64>,
    /// Optimality-gap estimate of the winning restart (bits).
    pub certificate_gap: f64,
}

impl CapacityResult {
    pub fn bits(&self) -> f64 {
        self.value.value()
    }

    pub fn ensemble(&self) -> Option<&Ensemble> {
        match &self.argmax {
            Argmax::Ensemble(e) => Some(e),
            Argmax::State(_) => None,
        }
    }

    pub fn state(&self) -> Option<&DensityMatrix> {
        match &self.argmax {
            Argmax::State(s) => Some(s),
            Argmax::Ensemble(e) => Some(e.average()),
        }
    }
}

struct RestartOutcome<T> {
    value: f64,
    payload: T,
    iterations: usize,
    converged: bool,
    gap: f64,
}

/// Runs `restarts` seeded restarts and keeps the best (lowest index on ties).
fn best_of<T: Send>(
    opts: &CapacityOptions,
    run: impl Fn(usize, &mut ChaCha8Rng) -> Result<RestartOutcome<T>> + Sync,
) -> Result<(RestartOutcome<T>, Vec<f64>, Vec<f64>, f64)> {
    let n = opts.restarts.max(1);
    let outcomes: Vec<Result<RestartOutcome<T>>> = (0..n)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(r as u64));
            run(r, &mut rng)
        })
        .collect();
    let mut best: Option<RestartOutcome<T>> = None;
    let mut history = Vec::with_capacity(n);
    let mut values = Vec::with_capacity(n);
    let mut upper = f64::INFINITY;
    for out in outcomes {
        let out = out?;
        values.push(out.value);
        upper = upper.min(out.value + out.gap);
        if best.as_ref().is_none_or(|b| out.value > b.value) {
            best = Some(out);
        }
        history.push(best.as_ref().map_or(f64::NEG_INFINITY, |b| b.value));
    }
    Ok((best.expect("at least one restart"), history, values, upper))
}

/// `log₂` of a positive matrix with clamped spectrum, together with its entropy.
struct LogSpectrum {
    log: CMatrix,
    entropy: f64,
}

fn log_spectrum(m: &CMatrix) -> Result<LogSpectrum> {
    let spec = eigh(m)?;
    Ok(LogSpectrum {
        log: spec.apply(|x| x.max(LOG_FLOOR).log2()),
        entropy: entropy_of_spectrum(&spec.values),
    })
}

/// `V_k ψ` for every Kraus operator.
fn branches(chan: &KrausChannel, psi: &CVector) -> Vec<CVector> {
    chan.kraus_ops().iter().map(|v| v * psi).collect()
}

fn output_of(branches: &[CVector]) -> CMatrix {
    let d = branches[0].len();
    let mut out = CMatrix::zeros(d, d);
    for u in branches {
        out += u * u.adjoint();
    }
    out
}

/// `Σ V_k† A (V_k ψ)`.
fn dual_on(chan: &KrausChannel, a: &CMatrix, branches: &[CVector]) -> CVector {
    let mut acc = CVector::zeros(chan.dim_in());
    for (v, u) in chan.kraus_ops().iter().zip(branches) {
        acc += v.adjoint() * (a * u);
    }
    acc
}

fn expectation(h: &CMatrix, psi: &CVector) -> f64 {
    (psi.adjoint() * h * psi)[(0, 0)].re
}

/// Armijo ascent on the unit sphere. `f` returns the value and its gradient in `ψ̄`.
fn sphere_ascent(
    mut psi: CVector,
    f: impl Fn(&CVector) -> Result<(f64, CVector)>,
    max_steps: usize,
) -> Result<(CVector, f64, usize)> {
    let (mut val, mut grad) = f(&psi)?;
    let mut step = 1.0;
    let mut steps = 0;
    while steps < max_steps {
        steps += 1;
        let inner = (psi.adjoint() * &grad)[(0, 0)];
        let g = &grad - &psi * inner;
        let gn2 = g.norm_squared();
        if gn2.sqrt() < 1e-13 {
            break;
        }
        let mut gained = None;
        while step > 1e-16 {
            let cand = (&psi + &g * re(step)).normalize();
            let (cv, cg) = f(&cand)?;
            if cv > val + 1e-4 * step * gn2 {
                gained = Some(cv - val);
                psi = cand;
                val = cv;
                grad = cg;
                step = (step * 2.0).min(1e6);
                break;
            }
            step *= 0.5;
        }
        match gained {
            Some(g) if g > 1e-16 => {}
            _ => break,
        }
    }
    Ok((psi, val, steps))
}

/// Pure ensemble member with cached output data.
#[derive(Clone)]
struct Member {
    psi: CVector,
    out: CMatrix,
    entropy: f64,
    energy: f64,
}

/// Holevo-quantity maximization over pure ensembles, optionally penalized by `β Tr Hρ̄`.
struct HolevoProblem<'a> {
    chan: &'a KrausChannel,
    penalty: Option<(&'a CMatrix, f64)>,
}

impl HolevoProblem<'_> {
    fn beta(&self) -> f64 {
        self.penalty.map_or(0.0, |(_, b)| b)
    }

    fn member(&self, psi: CVector) -> Result<Member> {
        let out = output_of(&branches(self.chan, &psi));
        let entropy = entropy_of_spectrum(&eigh(&out)?.values);
        let energy = self.penalty.map_or(0.0, |(h, _)| expectation(h, &psi));
        Ok(Member {
            psi,
            out,
            entropy,
            energy,
        })
    }

    fn average(&self, members: &[Member], weights: &[f64]) -> CMatrix {
        let d = self.chan.dim_out();
        let mut omega = CMatrix::zeros(d, d);
        for (m, &w) in members.iter().zip(weights) {
            omega += &m.out * re(w);
        }
        omega
    }

    /// `H(ω) − Σ w_i H(X_i) − β Σ w_i E_i`.
    fn lagrangian(&self, members: &[Member], weights: &[f64]) -> Result<f64> {
        let omega = self.average(members, weights);
        let mut val = entropy_of_spectrum(&eigh(&omega)?.values);
        for (m, &w) in members.iter().zip(weights) {
            val -= w * (m.entropy + self.beta() * m.energy);
        }
        Ok(val)
    }

    /// Penalized divergence `D(Φ(ψ)‖ω) − β⟨ψ|H|ψ⟩` and its gradient.
    fn divergence(&self, psi: &CVector, log_omega: &CMatrix) -> Result<(f64, CVector)> {
        let br = branches(self.chan, psi);
        let out = output_of(&br);
        let ls = log_spectrum(&out)?;
        let mut val = -ls.entropy - trace_product(&out, log_omega).re;
        let mut grad = dual_on(self.chan, &(&ls.log - log_omega), &br);
        if let Some((h, beta)) = self.penalty {
            val -= beta * expectation(h, psi);
            grad -= h * psi * re(beta);
        }
        Ok((val, grad))
    }

    fn blahut_arimoto(&self, members: &[Member], weights: &mut [f64]) -> Result<()> {
        for _ in 0..BA_STEPS {
            let log_omega = log_spectrum(&self.average(members, weights))?.log;
            let ds: Vec<f64> = members
                .iter()
                .map(|m| -m.entropy - trace_product(&m.out, &log_omega).re - self.beta() * m.energy)
                .collect();
            let top = ds.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let mut total = 0.0;
            for (w, d) in weights.iter_mut().zip(&ds) {
                *w *= (d - top).exp2();
                total += *w;
            }
            for w in weights.iter_mut() {
                *w /= total;
            }
        }
        Ok(())
    }

    /// Ascent on each state in turn with the other members fixed.
    fn polish_states(&self, members: &mut [Member], weights: &[f64]) -> Result<()> {
        for i in 0..members.len() {
            if weights[i] < 1e-8 {
                continue;
            }
            let f = |psi: &CVector| -> Result<(f64, CVector)> {
                let mut trial = members.to_vec();
                trial[i] = self.member(psi.clone())?;
                let val = self.lagrangian(&trial, weights)?;
                let log_omega = log_spectrum(&self.average(&trial, weights))?.log;
                let (_, g) = self.divergence(psi, &log_omega)?;
                Ok((val, g * re(weights[i])))
            };
            let (psi, _, _) = sphere_ascent(members[i].psi.clone(), f, 3)?;
            members[i] = self.member(psi)?;
        }
        Ok(())
    }

    fn run(&self, start: Vec<CVector>, cap: usize, opts: &CapacityOptions, rng: &mut ChaCha8Rng) -> Result<RestartOutcome<(Vec<Member>, Vec<f64>)>> {
        let din = self.chan.dim_in();
        let mut members: Vec<Member> = start.into_iter().map(|p| self.member(p)).collect::<Result<_>>()?;
        let mut weights = vec![1.0 / members.len() as f64; members.len()];
        let mut best_response: Option<CVector> = None;
        let mut converged = false;
        let mut upper = f64::INFINITY;
        let mut best_seen = f64::NEG_INFINITY;
        let mut last_progress = 0;
        let mut iterations = 0;
        for iter in 0..opts.max_iter {
            iterations = iter + 1;
            self.blahut_arimoto(&members, &mut weights)?;
            self.polish_states(&mut members, &weights)?;
            let current = self.lagrangian(&members, &weights)?;
            let log_omega = log_spectrum(&self.average(&members, &weights))?.log;

            let mut starts: Vec<CVector> = best_response.take().into_iter().collect();
            starts.push(random::pure_state(rng, din).amplitudes().clone());
            starts.push(random::pure_state(rng, din).amplitudes().clone());
            if iter == 0 {
                starts.extend((0..din).map(|k| PureStateVector::basis(din, k).amplitudes().clone()));
            }
            let mut top: Option<(f64, CVector)> = None;
            for s in starts {
                let (psi, val, _) = sphere_ascent(s, |p| self.divergence(p, &log_omega), 60)?;
                if top.as_ref().is_none_or(|(b, _)| val > *b) {
                    top = Some((val, psi));
                }
            }
            let (dmax, psi_star) = top.expect("nonempty starts");
            upper = upper.min(dmax);
            if dmax - current <= opts.tol {
                converged = true;
                break;
            }
            best_response = Some(psi_star.clone());

            let fresh = self.member(psi_star)?;
            let duplicate = members
                .iter()
                .any(|m| (m.psi.adjoint() * &fresh.psi)[(0, 0)].norm_sqr() > 1.0 - 1e-12);
            if !duplicate {
                let mut grown = members.clone();
                let mut base = weights.clone();
                if grown.len() >= cap {
                    // the lightest member makes room
                    let (drop, _) = base
                        .iter()
                        .enumerate()
                        .min_by(|a, b| a.1.total_cmp(b.1))
                        .expect("nonempty ensemble");
                    let w = base.remove(drop);
                    grown.remove(drop);
                    for x in base.iter_mut() {
                        *x /= 1.0 - w;
                    }
                }
                grown.push(fresh);
                let mut chosen: Option<(f64, Vec<f64>)> = None;
                let mut t = 0.5;
                while t > 1e-6 {
                    let mut trial: Vec<f64> = base.iter().map(|w| w * (1.0 - t)).collect();
                    trial.push(t);
                    let val = self.lagrangian(&grown, &trial)?;
                    if val > chosen.as_ref().map_or(current, |(b, _)| *b) {
                        chosen = Some((val, trial));
                    } else if chosen.is_some() {
                        break;
                    }
                    t *= 0.5;
                }
                if let Some((_, w)) = chosen {
                    members = grown;
                    weights = w;
                }
            }
            let keep: Vec<bool> = weights.iter().map(|&w| w > WEIGHT_DROP).collect();
            if keep.iter().any(|k| !k) {
                let mut idx = 0;
                members.retain(|_| {
                    idx += 1;
                    keep[idx - 1]
                });
                weights.retain(|&w| w > WEIGHT_DROP);
                let total: f64 = weights.iter().sum();
                for w in weights.iter_mut() {
                    *w /= total;
                }
            }
            if current > best_seen + 1e-14 * best_seen.abs().max(1.0) {
                best_seen = current;
                last_progress = iter;
            } else if iter - last_progress >= STALL_ITERS {
                break;
            }
        }
        let value = self.lagrangian(&members, &weights)?;
        Ok(RestartOutcome {
            value,
            payload: (members, weights),
            iterations,
            converged,
            gap: (upper - value).max(0.0),
        })
    }
}

fn ensemble_of(members: &[Member], weights: &[f64]) -> Result<Ensemble> {
    let items = members
        .iter()
        .zip(weights)
        .filter(|(_, &w)| w > WEIGHT_DROP)
        .map(|(m, &w)| Ok((w, PureStateVector::normalized(m.psi.clone())?.projector())))
        .collect::<Result<Vec<_>>>()?;
    Ensemble::normalized(items)
}

fn holevo_search(
    chan: &KrausChannel,
    penalty: Option<(&CMatrix, f64)>,
    opts: &CapacityOptions,
) -> Result<(CapacityResult, f64)> {
    let din = chan.dim_in();
    let cap = opts.ensemble_cap.unwrap_or(din * din).max(1);
    let problem = HolevoProblem { chan, penalty };
    let (mut best, history, values, upper) = best_of(opts, |r, rng| {
        let start: Vec<CVector> = if r == 0 {
            (0..din).map(|k| PureStateVector::basis(din, k).amplitudes().clone()).collect()
        } else {
            (0..din.min(cap)).map(|_| random::pure_state(rng, din).amplitudes().clone()).collect()
        };
        problem.run(start, cap, opts, rng)
    })?;
    // any restart's dual bound certifies the winner
    best.gap = (upper - best.value).max(0.0);
    best.converged = best.gap <= opts.tol;
    let (members, weights) = &best.payload;
    let ens = ensemble_of(members, weights)?;
    let energy = penalty.map_or(0.0, |(h, _)| trace_product(h, ens.average().matrix()).re);
    let value = holevo(&ens.image(chan)?)?;
    Ok((
        CapacityResult {
            value,
            argmax: Argmax::Ensemble(ens),
            iterations: best.iterations,
            restarts: opts.restarts.max(1),
            converged: best.converged,
            history,
            restart_values: values,
            certificate_gap: best.gap,
        },
        energy,
    ))
}

/// `C̄(Φ) = sup χ({π_i, Φ(ρ_i)})` over pure input ensembles.
pub fn holevo_capacity(chan: &KrausChannel, opts: &CapacityOptions) -> Result<CapacityResult> {
    Ok(holevo_search(chan, None, opts)?.0)
}

/// `H_min(Φ) = min_ψ H(Φ(|ψ⟩⟨ψ|))`.
pub fn min_output_entropy(chan: &KrausChannel, opts: &CapacityOptions) -> Result<CapacityResult> {
    let din = chan.dim_in();
    let neg_entropy = |psi: &CVector| -> Result<(f64, CVector)> {
        let br = branches(chan, psi);
        let ls = log_spectrum(&output_of(&br))?;
        Ok((-ls.entropy, dual_on(chan, &ls.log, &br)))
    };
    let (best, history, values, _) = best_of(opts, |r, rng| {
        let start = if r < din {
            PureStateVector::basis(din, r).amplitudes().clone()
        } else {
            random::pure_state(rng, din).amplitudes().clone()
        };
        // nudge basis starts off symmetric saddles
        let start = if r < din && din > 1 {
            let kick = random::pure_state(rng, din).amplitudes() * re(1e-3);
            (start + kick).normalize()
        } else {
            start
        };
        let (psi, _, steps) = sphere_ascent(start, neg_entropy, opts.max_iter)?;
        let exact = -entropy_bits(&chan.apply(&PureStateVector::normalized(psi.clone())?.projector())?);
        Ok(RestartOutcome {
            value: exact,
            payload: psi,
            iterations: steps,
            converged: steps < opts.max_iter,
            gap: 0.0,
        })
    })?;
    let state = PureStateVector::normalized(best.payload)?.projector();
    Ok(CapacityResult {
        value: EntropyValue::Finite(-best.value),
        argmax: Argmax::State(state),
        iterations: best.iterations,
        restarts: opts.restarts.max(1),
        converged: best.converged,
        history: history.into_iter().map(|x| -x).collect(),
        restart_values: values.into_iter().map(|x| -x).collect(),
        certificate_gap: 0.0,
    })
}

/// Pure decompositions `v_i = √ρ m_i` of a fixed state, parameterized by `M` with
/// orthonormal rows.
struct RoofProblem<'a> {
    chan: &'a KrausChannel,
    sqrt_rho: CMatrix,
}

impl RoofProblem<'_> {
    fn columns(&self, m: &CMatrix) -> Vec<CVector> {
        (0..m.ncols()).map(|i| &self.sqrt_rho * m.column(i)).collect()
    }

    /// `Σ_i π_i H(Φ(ρ_i))` and its gradient in `M̄`.
    fn objective(&self, m: &CMatrix) -> Result<(f64, CMatrix)> {
        let mut total = 0.0;
        let mut grad = CMatrix::zeros(m.nrows(), m.ncols());
        for (i, v) in self.columns(m).into_iter().enumerate() {
            let p = v.norm_squared();
            if p < 1e-300 {
                continue;
            }
            let br = branches(self.chan, &v);
            let ls = log_spectrum(&output_of(&br))?;
            total += ls.entropy + p * p.log2();
            let g = -dual_on(self.chan, &ls.log, &br) + &v * re(p.log2());
            grad.set_column(i, &(&self.sqrt_rho * g));
        }
        Ok((total, grad))
    }

    fn descend(&self, mut m: CMatrix, max_steps: usize) -> Result<(CMatrix, f64, usize, bool)> {
        let (mut val, mut grad) = self.objective(&m)?;
        let mut step = 1.0;
        let mut steps = 0;
        let mut stalled = false;
        while steps < max_steps {
            steps += 1;
            let sym = (&grad * m.adjoint() + &m * grad.adjoint()) * re(0.5);
            let tangent = &grad - sym * &m;
            let gn2 = tangent.norm_squared();
            if gn2.sqrt() < 1e-13 {
                stalled = true;
                break;
            }
            let mut gained = None;
            while step > 1e-16 {
                let cand = polar_factor(&(&m - &tangent * re(step)), None)?;
                let (cv, cg) = self.objective(&cand)?;
                if cv < val - 1e-4 * step * gn2 {
                    gained = Some(val - cv);
                    m = cand;
                    val = cv;
                    grad = cg;
                    step = (step * 2.0).min(1e6);
                    break;
                }
                step *= 0.5;
            }
            match gained {
                Some(g) if g > 1e-16 => {}
                _ => {
                    stalled = true;
                    break;
                }
            }
        }
        Ok((m, val, steps, stalled))
    }

    fn ensemble(&self, m: &CMatrix) -> Result<Ensemble> {
        let items = self
            .columns(m)
            .into_iter()
            .filter(|v| v.norm_squared() > WEIGHT_DROP)
            .map(|v| {
                let p = v.norm_squared();
                Ok((p, PureStateVector::normalized(v)?.projector()))
            })
            .collect::<Result<Vec<_>>>()?;
        Ensemble::normalized(items)
    }
}

fn sqrt_state(rho: &DensityMatrix) -> CMatrix {
    rho.spectrum().apply(|x| x.max(0.0).sqrt())
}

/// Decomposition optimizer shared by the constrained capacity and the gap identity.
fn optimize_roof(
    chan: &KrausChannel,
    rho: &DensityMatrix,
    opts: &CapacityOptions,
    warm: Option<&CMatrix>,
) -> Result<(RestartOutcome<CMatrix>, Vec<f64>, Vec<f64>, f64)> {
    chan.check_input(rho.dim())?;
    let d = rho.dim();
    let n = opts.ensemble_cap.unwrap_or(d * d).max(d);
    let problem = RoofProblem {
        chan,
        sqrt_rho: sqrt_state(rho),
    };
    let out_entropy = entropy_bits(&chan.apply(rho)?);
    best_of(opts, |r, rng| {
        let start = match (r, warm) {
            (0, Some(w)) => w.clone(),
            (0, None) | (1, Some(_)) => {
                let mut m = CMatrix::zeros(d, n);
                m.view_mut((0, 0), (d, d)).copy_from(&rho.spectrum().vectors.adjoint());
                m
            }
            _ => polar_factor(&random::ginibre(rng, d, n), None)?,
        };
        let (m, val, steps, stalled) = problem.descend(start, opts.max_iter)?;
        Ok(RestartOutcome {
            value: out_entropy - val,
            payload: m,
            iterations: steps,
            converged: stalled || steps < opts.max_iter,
            gap: 0.0,
        })
    })
}

/// `C̄(Φ,ρ) = H(Φ(ρ)) − min Σ π_i H(Φ(ρ_i))` over pure decompositions of `ρ`.
pub fn constrained_holevo(chan: &KrausChannel, rho: &DensityMatrix, opts: &CapacityOptions) -> Result<CapacityResult> {
    let (best, history, values, _) = optimize_roof(chan, rho, opts, None)?;
    let problem = RoofProblem {
        chan,
        sqrt_rho: sqrt_state(rho),
    };
    let ens = problem.ensemble(&best.payload)?;
    let value = holevo(&ens.image(chan)?)?;
    Ok(CapacityResult {
        value,
        argmax: Argmax::Ensemble(ens),
        iterations: best.iterations,
        restarts: opts.restarts.max(1),
        converged: best.converged,
        history,
        restart_values: values,
        certificate_gap: 0.0,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct GapIdentityReport {
    pub mutual_info: f64,
    pub input_entropy: f64,
    pub cbar: f64,
    pub cbar_complement: f64,
    /// `H(ρ) − C̄(Φ̂,ρ)`.
    pub delta: f64,
    /// `|I − (H(ρ) + C̄(Φ,ρ) − C̄(Φ̂,ρ))|` at a shared optimal decomposition.
    pub identity_residual: f64,
    /// `max_μ |χ(Φ(μ)) − χ(Φ̂(μ)) − (I − H(ρ))|` over random pure decompositions.
    pub decomposition_deviation: f64,
    pub decompositions: usize,
    pub converged: bool,
}

pub const GAP_DECOMPOSITIONS: usize = 50;

/// Checks `I(Φ,ρ) = H(ρ) + C̄(Φ,ρ) − C̄(Φ̂,ρ)` and the decomposition independence of
/// `χ(Φ(μ)) − χ(Φ̂(μ))`.
pub fn gap_identity_check(chan: &KrausChannel, rho: &DensityMatrix, opts: &CapacityOptions) -> Result<GapIdentityReport> {
    chan.check_input(rho.dim())?;
    let comp = complementary_of_kraus(chan.kraus_ops())?;
    let info = mutual_info(chan, rho)?.value();
    let h = entropy_bits(rho);
    let problem = RoofProblem {
        chan,
        sqrt_rho: sqrt_state(rho),
    };
    let (first, ..) = optimize_roof(chan, rho, opts, None)?;
    let (second, ..) = optimize_roof(&comp, rho, opts, Some(&first.payload))?;
    let mut shared: Option<(f64, f64, f64)> = None;
    for m in [&first.payload, &second.payload] {
        let ens = problem.ensemble(m)?;
        let a = holevo(&ens.image(chan)?)?.value();
        let b = holevo(&ens.image(&comp)?)?.value();
        if shared.is_none_or(|(s, _, _)| a + b > s) {
            shared = Some((a + b, a, b));
        }
    }
    let (_, cbar, cbar_comp) = shared.expect("two candidates");

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x6a9);
    let d = rho.dim();
    let mut deviation: f64 = 0.0;
    for _ in 0..GAP_DECOMPOSITIONS {
        let n = rng.random_range(d..=d * d);
        let m = polar_factor(&random::ginibre(&mut rng, d, n), None)?;
        let ens = problem.ensemble(&m)?;
        let a = holevo(&ens.image(chan)?)?.value();
        let b = holevo(&ens.image(&comp)?)?.value();
        deviation = deviation.max((a - b - (info - h)).abs());
    }
    Ok(GapIdentityReport {
        mutual_info: info,
        input_entropy: h,
        cbar,
        cbar_complement: cbar_comp,
        delta: h - cbar_comp,
        identity_residual: (info - (h + cbar - cbar_comp)).abs(),
        decomposition_deviation: deviation,
        decompositions: GAP_DECOMPOSITIONS,
        converged: first.converged && second.converged,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct EbReport {
    pub cbar: f64,
    pub mutual_info: f64,
    /// `I(Φ,ρ) − C̄(Φ,ρ)`.
    pub gap: f64,
    pub equality: bool,
    /// Rank-one Kraus operators of `Φ` restricted to `supp ρ`, when the construction succeeds.
    #[serde(skip)]
    pub rank_one_kraus: Option<Vec<CMatrix>>,
    pub kraus_ranks: Option<Vec<usize>>,
    pub reconstruction_distance: Option<f64>,
    pub construction_error: Option<String>,
    pub support_dim: usize,
    pub converged: bool,
}

/// When `C̄(Φ,ρ) = I(Φ,ρ)`, runs the rank-one construction on `Φ̂` at the optimal
/// decomposition and returns an entanglement-breaking Kraus form of `Φ` on `supp ρ`.
pub fn eb_equality_diagnostic(chan: &KrausChannel, rho: &DensityMatrix, opts: &CapacityOptions) -> Result<EbReport> {
    chan.check_input(rho.dim())?;
    let p = rho.spectrum().support_basis(SUPPORT_TOL);
    let restricted = chan.restrict_input(&p)?;
    let rho_r = DensityMatrix::from_positive(&(p.adjoint() * rho.matrix() * &p))?;
    let cap = constrained_holevo(&restricted, &rho_r, opts)?;
    let info = mutual_info(&restricted, &rho_r)?.value();
    let cbar = cap.bits();
    let gap = info - cbar;
    let mut report = EbReport {
        cbar,
        mutual_info: info,
        gap,
        equality: gap.abs() <= EQUALITY_TOL,
        rank_one_kraus: None,
        kraus_ranks: None,
        reconstruction_distance: None,
        construction_error: None,
        support_dim: p.ncols(),
        converged: cap.converged,
    };
    if !report.equality {
        return Ok(report);
    }
    let decomposition = cap.ensemble().expect("decomposition");
    let attempt = (|| -> Result<(Vec<CMatrix>, Vec<usize>, f64)> {
        let comp = complementary(&restricted)?;
        let bounded = rank_bounded_complement(&comp, decomposition, 1)?;
        let eq = isometric_equivalence(&bounded.channel, &restricted)?;
        let w = eq.candidate;
        let mut ops = Vec::new();
        for k in bounded.channel.kraus_ops() {
            let full = &w * k;
            let dec = svd(&full)?;
            if dec.s[0] > 1e-12 {
                ops.push(dec.u.column(0) * dec.v_t.row(0) * re(dec.s[0]));
            }
        }
        let ranks = ops.iter().map(|o| numerical_rank(o, RANK_TOL)).collect::<Result<Vec<_>>>()?;
        let target = restricted.choi();
        let dist = frobenius(&(target.matrix() - choi_of_ops(&ops, restricted.dim_in(), restricted.dim_out())));
        Ok((ops, ranks, dist))
    })();
    match attempt {
        Ok((ops, ranks, dist)) => {
            if dist > RECONSTRUCTION_TOL {
                report.construction_error = Some(format!("rank-one reconstruction Choi distance {dist:.3e}"));
            }
            report.rank_one_kraus = Some(ops);
            report.kraus_ranks = Some(ranks);
            report.reconstruction_distance = Some(dist);
        }
        Err(e) => report.construction_error = Some(e.to_string()),
    }
    Ok(report)
}

#[derive(Clone, Debug, Serialize)]
pub struct CovarianceReport {
    pub cbar: f64,
    pub min_output_entropy: f64,
    pub log_dim: f64,
    /// `|C̄ − (log₂ d − H_min)|`.
    pub residual: f64,
    pub converged: bool,
}

/// Verifies covariance and irreducibility, then compares `C̄` with `log₂ d − H_min`.
pub fn covariance_relation_check(
    chan: &KrausChannel,
    unitaries: &[CMatrix],
    opts: &CapacityOptions,
) -> Result<CovarianceReport> {
    let d = chan.dim_in();
    if chan.dim_out() != d {
        return Err(Error::DimensionMismatch {
            context: "covariance check needs equal input and output dimensions",
            expected: d,
            found: chan.dim_out(),
        });
    }
    if unitaries.is_empty() {
        return Err(Error::InvalidParameter {
            reason: "empty unitary set".into(),
        });
    }
    for (index, u) in unitaries.iter().enumerate() {
        if u.shape() != (d, d) {
            return Err(Error::DimensionMismatch {
                context: "covariance unitary",
                expected: d,
                found: u.nrows(),
            });
        }
        let unitarity = max_abs(&(u.adjoint() * u - CMatrix::identity(d, d)));
        if unitarity > COVARIANCE_TOL {
            return Err(Error::InvalidParameter {
                reason: format!("unitary #{index} deviates from unitarity by {unitarity:.3e}"),
            });
        }
        let mut deviation: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                let mut e = CMatrix::zeros(d, d);
                e[(i, j)] = re(1.0);
                let lhs = chan.apply_matrix(&(u * &e * u.adjoint()));
                let rhs = u * chan.apply_matrix(&e) * u.adjoint();
                deviation = deviation.max(max_abs(&(lhs - rhs)));
            }
        }
        if deviation > COVARIANCE_TOL {
            return Err(Error::NotCovariant { index, deviation });
        }
    }
    // commutant: null space of the stacked maps X ↦ UX − XU
    let id = CMatrix::identity(d, d);
    let mut stacked = CMatrix::zeros(d * d * unitaries.len(), d * d);
    for (k, u) in unitaries.iter().enumerate() {
        let block = u.kronecker(&id) - id.kronecker(&u.transpose());
        stacked.view_mut((k * d * d, 0), (d * d, d * d)).copy_from(&block);
    }
    let rank = numerical_rank(&stacked, COVARIANCE_TOL)?;
    let commutant_dim = d * d - rank;
    if commutant_dim != 1 {
        return Err(Error::Reducible { commutant_dim });
    }
    let cbar = holevo_capacity(chan, opts)?;
    let hmin = min_output_entropy(chan, opts)?;
    let log_dim = (d as f64).log2();
    Ok(CovarianceReport {
        cbar: cbar.bits(),
        min_output_entropy: hmin.bits(),
        log_dim,
        residual: (cbar.bits() - (log_dim - hmin.bits())).abs(),
        converged: cbar.converged && hmin.converged,
    })
}

/// The Pauli group `{I, X, Y, Z}`.
pub fn pauli_unitaries() -> Vec<CMatrix> {
    use crate::matcore::{c, matrix_from_row_major};
    let z = re(0.0);
    let o = re(1.0);
    vec![
        CMatrix::identity(2, 2),
        matrix_from_row_major(2, 2, &[z, o, o, z]).expect("2x2"),
        matrix_from_row_major(2, 2, &[z, c(0.0, -1.0), c(0.0, 1.0), z]).expect("2x2"),
        matrix_from_row_major(2, 2, &[o, z, z, -o]).expect("2x2"),
    ]
}

/// `Tr Hρ ≤ h` with `H ≥ 0`.
#[derive(Clone, Debug)]
pub struct EnergyConstraint {
    pub hamiltonian: HermitianOperator,
    pub bound: f64,
}

impl EnergyConstraint {
    pub fn new(hamiltonian: HermitianOperator, bound: f64) -> Result<Self> {
        let min = eigh(hamiltonian.matrix())?.values.first().copied().unwrap_or(0.0);
        if min < -crate::matcore::CLAMP_TOL {
            return Err(Error::NotPositive { min_eigenvalue: min });
        }
        if !(bound >= 0.0 && bound.is_finite()) {
            return Err(Error::InvalidParameter {
                reason: format!("energy bound must be finite and nonnegative, got {bound}"),
            });
        }
        Ok(Self { hamiltonian, bound })
    }
}

#[derive(Clone, Debug)]
pub struct EnergyConstrainedReport {
    pub holevo: CapacityResult,
    pub ea: CapacityResult,
    pub holevo_energy: f64,
    pub ea_energy: f64,
    /// Multipliers on `Tr Hρ` at which the reported optima were found.
    pub holevo_multiplier: f64,
    pub ea_multiplier: f64,
    /// Dimension of the ground space when the bound equals the minimum energy.
    pub ground_space_dim: Option<usize>,
    pub equality_diagnostic: Option<EbReport>,
    pub notes: Vec<String>,
}

const ENERGY_TOL: f64 = 1e-6;
const BISECTION_STEPS: usize = 30;

/// Maximizes `I(Φ,ρ) − β Tr Hρ` by exponentiated-gradient ascent on density matrices.
fn ea_search(chan: &KrausChannel, h: &CMatrix, beta: f64, opts: &CapacityOptions) -> Result<(DensityMatrix, f64, usize, bool)> {
    let comp = complementary_of_kraus(chan.kraus_ops())?;
    let d = chan.dim_in();
    let objective = |rho: &DensityMatrix| -> Result<f64> {
        Ok(mutual_info(chan, rho)?.value() - beta * trace_product(h, rho.matrix()).re)
    };
    let mut rho = DensityMatrix::maximally_mixed(d);
    let mut val = objective(&rho)?;
    let mut iterations = 0;
    let mut converged = false;
    let mut eta = 1.0;
    for it in 0..opts.max_iter.max(50) * 4 {
        iterations = it + 1;
        let out = log_spectrum(chan.apply(&rho)?.matrix())?.log;
        let env = log_spectrum(comp.apply(&rho)?.matrix())?.log;
        // ∇I = −log₂ρ − Φ*(log₂Φρ) + Φ̂*(log₂Φ̂ρ), up to multiples of the identity
        let drive = -chan.dual_matrix(&out) + comp.dual_matrix(&env) - h * re(beta);
        let log_rho = rho.spectrum().apply(|x| x.max(LOG_FLOOR).ln());
        let mut accepted = false;
        while eta > 1e-10 {
            let exponent = &log_rho * re(1.0 - eta) + &drive * re(eta * std::f64::consts::LN_2);
            let spec = eigh(&exponent)?;
            let top = spec.max_value();
            let cand = DensityMatrix::from_positive(&spec.apply(|x| (x - top).exp()))?;
            let cv = objective(&cand)?;
            if cv >= val {
                let gain = cv - val;
                rho = cand;
                val = cv;
                accepted = true;
                eta = (eta * 1.5).min(1.0);
                if gain < opts.tol * 1e-3 {
                    converged = true;
                }
                break;
            }
            eta *= 0.5;
        }
        if !accepted || converged {
            converged = true;
            break;
        }
    }
    Ok((rho, val, iterations, converged))
}

fn lift_ensemble(ens: &Ensemble, p: &CMatrix) -> Result<Ensemble> {
    let items = ens
        .items()
        .iter()
        .map(|(w, r)| Ok((*w, DensityMatrix::from_positive(&(p * r.matrix() * p.adjoint()))?)))
        .collect::<Result<Vec<_>>>()?;
    Ensemble::new(items)
}

/// `C̄(Φ|H,h)` and `C_ea(Φ|H,h)` for single uses of the channel.
pub fn energy_constrained_capacities(
    chan: &KrausChannel,
    constraint: &EnergyConstraint,
    opts: &CapacityOptions,
) -> Result<EnergyConstrainedReport> {
    let d = chan.dim_in();
    let hm = constraint.hamiltonian.matrix();
    if hm.nrows() != d {
        return Err(Error::DimensionMismatch {
            context: "Hamiltonian",
            expected: d,
            found: hm.nrows(),
        });
    }
    let spec = eigh(hm)?;
    let lambda_min = spec.values[0];
    let h = constraint.bound;
    if lambda_min > h + 1e-12 {
        return Err(Error::Infeasible {
            min_energy: lambda_min,
            bound: h,
        });
    }
    let mut notes = vec![
        "single-letter values only; regularization over channel uses is not computed".to_string(),
        "continuity and boundedness hypotheses of the infinite-dimensional statement are not modeled".to_string(),
    ];

    // bound at the ground energy: only ground-space states are feasible
    let ground = spec.values.iter().filter(|&&x| x <= lambda_min + 1e-9).count();
    let at_ground = h <= lambda_min + 1e-9 && ground < d;
    let (work, p, work_h) = if at_ground {
        let p = CMatrix::from_columns(&(0..ground).map(|k| spec.vectors.column(k).into_owned()).collect::<Vec<_>>());
        notes.push(format!("bound equals the minimum energy; inputs restricted to the {ground}-dimensional ground space"));
        let hp = p.adjoint() * hm * &p;
        (chan.restrict_input(&p)?, p, hp)
    } else {
        (chan.clone(), CMatrix::identity(d, d), hm.clone())
    };
    let feasible = |e: f64| at_ground || e <= h + ENERGY_TOL;

    // Holevo capacity under the constraint, by bisection on the multiplier
    let (mut hol, mut hol_e) = holevo_search(&work, Some((&work_h, 0.0)), opts)?;
    let mut hol_beta = 0.0;
    if !feasible(hol_e) {
        let mut lo = 0.0;
        let mut hi = 1.0;
        let mut hi_res = holevo_search(&work, Some((&work_h, hi)), opts)?;
        let mut guard = 0;
        while !feasible(hi_res.1) && guard < 40 {
            lo = hi;
            hi *= 2.0;
            hi_res = holevo_search(&work, Some((&work_h, hi)), opts)?;
            guard += 1;
        }
        for _ in 0..BISECTION_STEPS {
            if (hi_res.1 - h).abs() <= ENERGY_TOL || hi - lo < 1e-9 {
                break;
            }
            let mid = 0.5 * (lo + hi);
            let res = holevo_search(&work, Some((&work_h, mid)), opts)?;
            if feasible(res.1) {
                hi = mid;
                hi_res = res;
            } else {
                lo = mid;
            }
        }
        hol = hi_res.0;
        hol_e = hi_res.1;
        hol_beta = hi;
    }

    // entanglement-assisted counterpart
    let (mut ea_rho, _, mut ea_it, mut ea_conv) = ea_search(&work, &work_h, 0.0, opts)?;
    let mut ea_beta = 0.0;
    let energy_of = |r: &DensityMatrix| trace_product(&work_h, r.matrix()).re;
    if !feasible(energy_of(&ea_rho)) {
        let mut lo = 0.0;
        let mut hi = 1.0;
        let mut best = ea_search(&work, &work_h, hi, opts)?;
        let mut guard = 0;
        while !feasible(energy_of(&best.0)) && guard < 40 {
            lo = hi;
            hi *= 2.0;
            best = ea_search(&work, &work_h, hi, opts)?;
            guard += 1;
        }
        for _ in 0..BISECTION_STEPS {
            if (energy_of(&best.0) - h).abs() <= ENERGY_TOL || hi - lo < 1e-9 {
                break;
            }
            let mid = 0.5 * (lo + hi);
            let res = ea_search(&work, &work_h, mid, opts)?;
            if feasible(energy_of(&res.0)) {
                hi = mid;
                best = res;
            } else {
                lo = mid;
            }
        }
        (ea_rho, _, ea_it, ea_conv) = best;
        ea_beta = hi;
    }
    let ea_value = mutual_info(&work, &ea_rho)?;
    let ea_energy = energy_of(&ea_rho);

    let hol_ens = hol.ensemble().expect("ensemble argmax").clone();
    let equality_diagnostic = if (hol.bits() - ea_value.value()).abs() <= EQUALITY_TOL {
        Some(eb_equality_diagnostic(&work, hol_ens.average(), opts)?)
    } else {
        None
    };

    hol.argmax = Argmax::Ensemble(lift_ensemble(&hol_ens, &p)?);
    let ea_state = DensityMatrix::from_positive(&(&p * ea_rho.matrix() * p.adjoint()))?;
    let ea = CapacityResult {
        value: ea_value,
        argmax: Argmax::State(ea_state),
        iterations: ea_it,
        restarts: 1,
        converged: ea_conv,
        history: vec![ea_value.value()],
        restart_values: vec![ea_value.value()],
        certificate_gap: 0.0,
    };
    Ok(EnergyConstrainedReport {
        holevo: hol,
        ea,
        holevo_energy: hol_e,
        ea_energy,
        holevo_multiplier: hol_beta,
        ea_multiplier: ea_beta,
        ground_space_dim: at_ground.then_some(ground),
        equality_diagnostic,
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{dephasing, depolarizing, identity, replacement, trine, trine_vectors};
    use crate::matcore::real_diag;

    fn quick() -> CapacityOptions {
        CapacityOptions {
            restarts: 4,
            ..CapacityOptions::default()
        }
    }

    /// Classical capacity of the trine measurement restricted to real inputs on a grid.
    fn trine_grid_oracle(points: usize) -> f64 {
        let phis = trine_vectors();
        let rows: Vec<[f64; 3]> = (0..points)
            .map(|j| {
                let t = std::f64::consts::PI * j as f64 / points as f64;
                let psi = CVector::from_vec(vec![re(t.cos()), re(t.sin())]);
                std::array::from_fn(|k| (phis[k].adjoint() * &psi)[(0, 0)].norm_sqr())
            })
            .collect();
        let mut p = vec![1.0 / points as f64; points];
        let mut value = 0.0;
        for _ in 0..20000 {
            let q: [f64; 3] = std::array::from_fn(|k| rows.iter().zip(&p).map(|(r, w)| w * r[k]).sum());
            let ds: Vec<f64> = rows
                .iter()
                .map(|r| (0..3).filter(|&k| r[k] > 0.0).map(|k| r[k] * (r[k] / q[k]).log2()).sum())
                .collect();
            value = p.iter().zip(&ds).map(|(w, d)| w * d).sum();
            let top = ds.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if top - value < 1e-9 {
                break;
            }
            let mut total = 0.0;
            for (w, d) in p.iter_mut().zip(&ds) {
                *w *= d.exp2();
                total += *w;
            }
            for w in p.iter_mut() {
                *w /= total;
            }
        }
        value
    }

    #[test]
    fn holevo_capacity_examples() {
        let r = holevo_capacity(&identity(3), &quick()).unwrap();
        assert!((r.bits() - 3f64.log2()).abs() < 1e-4, "{}", r.bits());
        let r = holevo_capacity(&dephasing(2), &quick()).unwrap();
        assert!((r.bits() - 1.0).abs() < 1e-4);
        let r = holevo_capacity(&trine(), &quick()).unwrap();
        let oracle = trine_grid_oracle(512);
        assert!((r.bits() - oracle).abs() < 1e-3, "{} vs {oracle}", r.bits());
        assert!(r.bits() <= 1.0 + 1e-9);
        let ens = r.ensemble().unwrap();
        assert!((holevo(&ens.image(&trine()).unwrap()).unwrap().value() - r.bits()).abs() < 1e-9);
    }

    #[test]
    fn holevo_capacity_history_and_determinism() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let chan = random::channel(&mut rng, 2, 3, 2);
        let opts = CapacityOptions {
            restarts: 3,
            seed: 9,
            ..CapacityOptions::default()
        };
        let a = holevo_capacity(&chan, &opts).unwrap();
        let b = holevo_capacity(&chan, &opts).unwrap();
        assert_eq!(a.bits().to_bits(), b.bits().to_bits());
        assert!(a.history.windows(2).all(|w| w[1] >= w[0]));
        assert!(a.bits() <= 1.0 + 1e-9);
    }

    #[test]
    fn min_output_entropy_examples() {
        assert!(min_output_entropy(&identity(2), &quick()).unwrap().bits().abs() < 1e-6);
        assert!(min_output_entropy(&dephasing(2), &quick()).unwrap().bits().abs() < 1e-6);
        let r = min_output_entropy(&trine(), &quick()).unwrap();
        assert!((r.bits() - 1.0).abs() < 1e-4, "{}", r.bits());
        let out = trine().apply(r.state().unwrap()).unwrap();
        let mut eig = out.eigenvalues().to_vec();
        eig.sort_by(f64::total_cmp);
        assert!(eig[0].abs() < 1e-3 && (eig[2] - 0.5).abs() < 1e-3);
    }

    #[test]
    fn constrained_holevo_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let rho = random::density_matrix(&mut rng, 3, 3);
        let r = constrained_holevo(&identity(3), &rho, &quick()).unwrap();
        assert!((r.bits() - entropy_bits(&rho)).abs() < 1e-6);
        let half = DensityMatrix::maximally_mixed(2);
        let r = constrained_holevo(&dephasing(2), &half, &quick()).unwrap();
        assert!((r.bits() - 1.0).abs() < 1e-6);
        let rep = replacement(3, &DensityMatrix::maximally_mixed(2));
        assert!(constrained_holevo(&rep, &rho, &quick()).unwrap().bits().abs() < 1e-9);
    }

    #[test]
    fn constrained_holevo_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..6 {
            let chan = random::channel(&mut rng, 2, 3, 2);
            let rho = random::density_matrix(&mut rng, 2, 2);
            let r = constrained_holevo(&chan, &rho, &quick()).unwrap();
            assert!(r.bits() <= mutual_info(&chan, &rho).unwrap().value() + 1e-6);
            // never below a sampled decomposition
            let problem = RoofProblem {
                chan: &chan,
                sqrt_rho: sqrt_state(&rho),
            };
            for _ in 0..20 {
                let m = polar_factor(&random::ginibre(&mut rng, 2, 4), None).unwrap();
                let sample = holevo(&problem.ensemble(&m).unwrap().image(&chan).unwrap()).unwrap().value();
                assert!(r.bits() >= sample - 1e-9);
            }
        }
    }

    #[test]
    fn gap_identity_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let rho = random::density_matrix(&mut rng, 2, 2);
        let rep = gap_identity_check(&identity(2), &rho, &quick()).unwrap();
        assert!(rep.decomposition_deviation <= 1e-9 && rep.identity_residual <= 1e-6);
        let rep = gap_identity_check(&dephasing(2), &DensityMatrix::maximally_mixed(2), &quick()).unwrap();
        assert!(rep.decomposition_deviation <= 1e-9);
        let chan = random::channel(&mut rng, 3, 3, 2);
        let rho = random::density_matrix(&mut rng, 3, 3);
        let rep = gap_identity_check(&chan, &rho, &quick()).unwrap();
        assert!(rep.decomposition_deviation <= 1e-8 && rep.identity_residual <= 1e-6);
        assert!(rep.delta >= -1e-6);
    }

    #[test]
    fn eb_diagnostic_examples() {
        let half = DensityMatrix::maximally_mixed(2);
        let rep = eb_equality_diagnostic(&dephasing(2), &half, &quick()).unwrap();
        assert!(rep.equality && (rep.cbar - 1.0).abs() < 1e-6);
        assert_eq!(rep.kraus_ranks.as_deref(), Some(&[1usize, 1][..]));
        assert!(rep.reconstruction_distance.unwrap() <= 1e-7);

        let rep = eb_equality_diagnostic(&identity(2), &half, &quick()).unwrap();
        assert!(!rep.equality && (rep.gap - 1.0).abs() < 1e-6);

        let rep = eb_equality_diagnostic(&trine(), &half, &quick()).unwrap();
        assert!(rep.gap > 1e-3);
    }

    #[test]
    fn covariance_examples() {
        let rep = covariance_relation_check(&identity(2), &pauli_unitaries(), &quick()).unwrap();
        assert!((rep.cbar - 1.0).abs() < 1e-4 && rep.residual <= 1e-3);
        let rep = covariance_relation_check(&depolarizing(2, 0.5).unwrap(), &pauli_unitaries(), &quick()).unwrap();
        let h = entropy_of_spectrum(&[0.75, 0.25]);
        assert!((rep.min_output_entropy - h).abs() < 1e-4 && rep.residual <= 1e-3);
        // dephasing commutes with the Pauli group
        let rep = covariance_relation_check(&dephasing(2), &pauli_unitaries(), &quick()).unwrap();
        assert!(rep.residual <= 1e-3);
        let s = 0.5f64.sqrt();
        let hadamard = crate::matcore::matrix_from_row_major(2, 2, &[re(s), re(s), re(s), re(-s)]).unwrap();
        let err = covariance_relation_check(&dephasing(2), &[CMatrix::identity(2, 2), hadamard], &quick()).unwrap_err();
        assert!(matches!(err, Error::NotCovariant { index: 1, .. }));
        let diag = vec![CMatrix::identity(2, 2), real_diag(&[1.0, -1.0])];
        assert!(matches!(
            covariance_relation_check(&identity(2), &diag, &quick()),
            Err(Error::Reducible { commutant_dim: 2 })
        ));
    }

    #[test]
    fn energy_examples() {
        let opts = quick();
        let zero = EnergyConstraint::new(HermitianOperator::diagonal(&[0.0, 0.0]), 0.3).unwrap();
        let rep = energy_constrained_capacities(&dephasing(2), &zero, &opts).unwrap();
        assert!((rep.holevo.bits() - 1.0).abs() < 1e-4);
        assert!((rep.ea.bits() - 1.0).abs() < 1e-4);
        assert!(rep.equality_diagnostic.is_some());

        let ground = EnergyConstraint::new(HermitianOperator::diagonal(&[0.0, 1.0]), 0.0).unwrap();
        let rep = energy_constrained_capacities(&identity(2), &ground, &opts).unwrap();
        assert!(rep.holevo.bits().abs() < 1e-9 && rep.ea.bits().abs() < 1e-9);
        assert_eq!(rep.ground_space_dim, Some(1));

        let half = EnergyConstraint::new(HermitianOperator::diagonal(&[0.0, 1.0]), 0.5).unwrap();
        let rep = energy_constrained_capacities(&dephasing(2), &half, &opts).unwrap();
        assert!((rep.holevo.bits() - 1.0).abs() < 1e-4);
        assert!(rep.holevo_energy <= 0.5 + 1e-6);

        let quarter = EnergyConstraint::new(HermitianOperator::diagonal(&[0.0, 1.0]), 0.25).unwrap();
        let rep = energy_constrained_capacities(&identity(2), &quarter, &opts).unwrap();
        let h = entropy_of_spectrum(&[0.75, 0.25]);
        assert!((rep.holevo.bits() - h).abs() < 1e-3, "{} vs {h}", rep.holevo.bits());
        assert!((rep.ea.bits() - 2.0 * h).abs() < 1e-3, "{}", rep.ea.bits());

        let shifted = EnergyConstraint::new(HermitianOperator::diagonal(&[1.0, 2.0]), 0.5).unwrap();
        assert!(matches!(
            energy_constrained_capacities(&identity(2), &shifted, &opts),
            Err(Error::Infeasible { .. })
        ));
    }
}
