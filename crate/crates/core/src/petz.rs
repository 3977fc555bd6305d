//! Petz recovery, reversibility audits and rank-bounded Kraus constructions.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::channels::{
    complementary, complementary_of_kraus, concentrate_rank, isometric_equivalence, kraus_ranks, minimal_kraus,
    pseudo_diagonal, rekraus, Ensemble, KrausChannel,
};
use crate::entropy::{holevo, EntropyValue};
use crate::error::{Error, Result};
use crate::matcore::{
    coefficient_matrix, eigh, max_abs, polar_factor, re, svd, CMatrix, CVector, DensityMatrix, SUPPORT_TOL,
};
use crate::random;

/// Largest trace-norm residual accepted as exact recovery.
pub const REVERSIBLE_TOL: f64 = 1e-7;
/// Largest Holevo gap (bits) treated as equality.
pub const GAP_TOL: f64 = 1e-7;
/// Singular values above this count toward an operator's rank.
pub const RANK_TOL: f64 = 1e-8;
/// `A_i = Ψ*(B_i)` residual above which the construction is reported as invalid.
pub const CONSTRUCTION_TOL: f64 = 1e-5;
/// Residual of `A_i = Ψ*(B_i)` considered clean.
pub const PRECONDITION_TOL: f64 = 1e-7;
const COLUMN_DROP_TOL: f64 = 1e-12;
pub const WITNESS_STARTS: usize = 20;
pub const WITNESS_MARGIN: f64 = 1e-9;

#[derive(Clone, Debug, Serialize)]
pub struct RecoveryReport {
    pub chi_in: EntropyValue,
    pub chi_out: EntropyValue,
    pub gap: f64,
    /// `‖Θ_ρ̄(Φ(ρ_i)) − ρ_i‖₁` per ensemble member.
    pub per_state_residuals: Vec<f64>,
    pub reversible: bool,
    /// Dimension of `supp ρ̄` when the average is rank deficient and maps were restricted to it.
    pub support_dim: Option<usize>,
    pub warnings: Vec<String>,
}

impl RecoveryReport {
    pub fn max_residual(&self) -> f64 {
        self.per_state_residuals.iter().copied().fold(0.0, f64::max)
    }

    pub fn gap_closed(&self) -> bool {
        self.gap <= GAP_TOL
    }
}

/// `Θ_σ(ϱ) = σ^{1/2} Φ*(Φ(σ)^{-1/2} ϱ Φ(σ)^{-1/2}) σ^{1/2}`, completed off `supp Φ(σ)`
/// by preparing `σ`.
pub fn petz_recovery(chan: &KrausChannel, sigma: &DensityMatrix) -> Result<KrausChannel> {
    chan.check_input(sigma.dim())?;
    let image = eigh(&chan.apply_matrix(sigma.matrix()))?;
    let inv_sqrt = image.support_apply(|x| x.powf(-0.5), SUPPORT_TOL)?;
    let sqrt_sigma = sigma.spectrum().apply(|x| x.max(0.0).sqrt());
    let mut ops: Vec<CMatrix> = chan
        .kraus_ops()
        .iter()
        .map(|v| &sqrt_sigma * v.adjoint() * &inv_sqrt)
        .collect();
    let cut = image.support_threshold(SUPPORT_TOL);
    let positive = image.max_value() > 0.0;
    for (q, &lam) in image.values.iter().enumerate() {
        if positive && lam > cut {
            continue;
        }
        let qv = image.vectors.column(q);
        for (a, &s) in sigma.eigenvalues().iter().enumerate() {
            if s > 0.0 {
                let e = sigma.spectrum().vectors.column(a);
                ops.push(e * qv.adjoint() * re(s.sqrt()));
            }
        }
    }
    KrausChannel::new(ops.into_iter().filter(|m| max_abs(m) > 0.0).collect())
}

/// Channel and ensemble restricted to `supp ρ̄` when the average is rank deficient.
struct Restricted {
    chan: KrausChannel,
    ens: Ensemble,
    support_dim: Option<usize>,
}

fn restrict_to_average_support(chan: &KrausChannel, ens: &Ensemble) -> Result<Restricted> {
    chan.check_input(ens.dim())?;
    let avg = ens.average();
    if avg.is_full_rank() {
        return Ok(Restricted {
            chan: chan.clone(),
            ens: ens.clone(),
            support_dim: None,
        });
    }
    let p = avg.spectrum().support_basis(SUPPORT_TOL);
    Ok(Restricted {
        chan: chan.restrict_input(&p)?,
        ens: ens.restrict(&p)?,
        support_dim: Some(p.ncols()),
    })
}

/// Holevo gap and Petz-recovery residuals of `Φ` on an ensemble.
pub fn reversibility_audit(chan: &KrausChannel, ens: &Ensemble) -> Result<RecoveryReport> {
    let Restricted {
        chan,
        ens,
        support_dim,
    } = restrict_to_average_support(chan, ens)?;
    let mut warnings = Vec::new();
    if let Some(s) = support_dim {
        warnings.push(format!(
            "average state is rank deficient; maps restricted to its {s}-dimensional support"
        ));
    }
    let image = ens.image(&chan)?;
    let chi_in = holevo(&ens)?;
    let chi_out = holevo(&image)?;
    let gap = chi_in.value() - chi_out.value();
    let theta = petz_recovery(&chan, ens.average())?;
    let per_state_residuals = ens
        .states()
        .zip(image.states())
        .map(|(rho, out)| theta.apply(out)?.trace_distance(rho))
        .collect::<Result<Vec<_>>>()?;
    let reversible = per_state_residuals.iter().all(|&r| r <= REVERSIBLE_TOL);
    Ok(RecoveryReport {
        chi_in,
        chi_out,
        gap,
        per_state_residuals,
        reversible,
        support_dim,
        warnings,
    })
}

/// Kraus representation of `Φ̂` whose operators inherit the rank bound of the ensemble.
#[derive(Clone, Debug)]
pub struct RankBoundedKraus {
    pub channel: KrausChannel,
    pub per_op_numerical_rank: Vec<usize>,
    pub certified_rank_bound: usize,
    /// `B_i = π_i Ψ(ρ̄)^{-1/2} Ψ(ρ_i) Ψ(ρ̄)^{-1/2}`.
    pub b_operators: Vec<CMatrix>,
    /// `ψ_ij`, the retained columns of `B_i^{1/2}`.
    pub vectors: Vec<Vec<CVector>>,
    /// `max_i ‖A_i − Ψ*(B_i)‖`.
    pub precondition_residual: f64,
    pub support_dim: Option<usize>,
}

/// `Ψ*(B) = Σ_kl ⟨l|B|k⟩ V_l† V_k` for the complement `Ψ` built from `{V_k}`.
fn complement_dual(ops: &[CMatrix], b: &CMatrix) -> CMatrix {
    let d = ops[0].ncols();
    let mut out = CMatrix::zeros(d, d);
    for (l, vl) in ops.iter().enumerate() {
        for (k, vk) in ops.iter().enumerate() {
            let w = b[(l, k)];
            if w.norm() > 0.0 {
                out += vl.adjoint() * vk * w;
            }
        }
    }
    out
}

pub fn rank_bounded_complement(chan: &KrausChannel, ens: &Ensemble, r: usize) -> Result<RankBoundedKraus> {
    for (index, rho) in ens.states().enumerate() {
        let rank = rho.rank(RANK_TOL);
        if rank > r {
            return Err(Error::RankPrecondition { index, rank, bound: r });
        }
    }
    let Restricted {
        chan,
        ens,
        support_dim,
    } = restrict_to_average_support(chan, ens)?;
    let comp = complementary(&chan)?;
    let v = minimal_kraus(&comp)?;
    let psi = complementary_of_kraus(&v)?;

    let avg = ens.average();
    let rho_inv_sqrt = avg.spectrum().support_apply(|x| x.powf(-0.5), SUPPORT_TOL)?;
    let psi_avg = eigh(&psi.apply_matrix(avg.matrix()))?;
    let psi_inv_sqrt = psi_avg.support_apply(|x| x.powf(-0.5), SUPPORT_TOL)?;

    let mut b_operators = Vec::with_capacity(ens.len());
    let mut vectors = Vec::with_capacity(ens.len());
    let mut residual: f64 = 0.0;
    for (p, rho) in ens.items() {
        let a = &rho_inv_sqrt * rho.matrix() * &rho_inv_sqrt * re(*p);
        let b = &psi_inv_sqrt * psi.apply_matrix(rho.matrix()) * &psi_inv_sqrt * re(*p);
        residual = residual.max(max_abs(&(a - complement_dual(&v, &b))));
        let root = eigh(&b)?.apply(|x| x.max(0.0).sqrt());
        let cols: Vec<CVector> = root
            .column_iter()
            .map(|col| col.into_owned())
            .filter(|col| col.norm() > COLUMN_DROP_TOL)
            .collect();
        b_operators.push(b);
        vectors.push(cols);
    }
    if residual > CONSTRUCTION_TOL {
        return Err(Error::ConstructionInvalid { residual });
    }
    let system: Vec<CVector> = vectors.iter().flatten().cloned().collect();
    let comp_v = KrausChannel::new(v)?;
    let channel = rekraus(&comp_v, &system)?;
    let per_op_numerical_rank = kraus_ranks(channel.kraus_ops(), RANK_TOL)?;
    let certified_rank_bound = per_op_numerical_rank.iter().copied().max().unwrap_or(0);
    Ok(RankBoundedKraus {
        channel,
        per_op_numerical_rank,
        certified_rank_bound,
        b_operators,
        vectors,
        precondition_residual: residual,
        support_dim,
    })
}

/// Pseudo-diagonal channel isometrically equivalent to `Φ`, with the connecting isometry.
#[derive(Clone, Debug)]
pub struct PseudoDiagonalReconstruction {
    pub channel: KrausChannel,
    /// Maps the output space of `channel` into that of `Φ` (restricted to `supp ρ̄` if needed).
    pub isometry: CMatrix,
    pub residual: f64,
    pub support_dim: Option<usize>,
}

pub const RECONSTRUCTION_TOL: f64 = 1e-7;

pub fn pure_case_reconstruction(chan: &KrausChannel, pure_ens: &Ensemble) -> Result<PseudoDiagonalReconstruction> {
    let report = reversibility_audit(chan, pure_ens)?;
    if !report.reversible {
        return Err(Error::AuditFailed(Box::new(report)));
    }
    let bounded = rank_bounded_complement(chan, pure_ens, 1)?;
    let target = match bounded.support_dim {
        Some(_) => {
            let p = pure_ens.average().spectrum().support_basis(SUPPORT_TOL);
            chan.restrict_input(&p)?
        }
        None => chan.clone(),
    };
    // W_a = s_a |u_a⟩⟨v_a| gives ψ_a = s_a v_a and c_ab = ⟨u_b|u_a⟩
    let mut units = Vec::new();
    let mut system = Vec::new();
    for w in bounded.channel.kraus_ops() {
        let dec = svd(w)?;
        let s = dec.s.first().copied().unwrap_or(0.0);
        if s <= COLUMN_DROP_TOL {
            continue;
        }
        units.push(dec.u.column(0).into_owned());
        system.push(dec.v_t.row(0).adjoint() * re(s));
    }
    let n = units.len();
    let gram = CMatrix::from_fn(n, n, |a, b| (units[b].adjoint() * &units[a])[(0, 0)]);
    let channel = pseudo_diagonal(&gram, &system)?;
    let eq = isometric_equivalence(&channel, &target)?;
    let residual = eq.residual();
    if residual > RECONSTRUCTION_TOL {
        return Err(Error::ConstructionInvalid { residual });
    }
    Ok(PseudoDiagonalReconstruction {
        channel,
        isometry: eq.candidate,
        residual,
        support_dim: bounded.support_dim,
    })
}

/// Best overlap of `σ_AB` with a maximally entangled vector of Schmidt rank `min(dA, dB)`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct WitnessOutcome {
    pub overlap: f64,
    pub threshold: f64,
    pub certified: bool,
    pub seed: u64,
}

/// Sound certificate that the Schmidt number of `σ_AB` exceeds `r`; `false` is inconclusive.
pub fn schmidt_witness(sigma: &DensityMatrix, dims: (usize, usize), r: usize) -> Result<bool> {
    Ok(schmidt_witness_seeded(sigma, dims, r, 0)?.certified)
}

pub fn schmidt_witness_seeded(sigma: &DensityMatrix, dims: (usize, usize), r: usize, seed: u64) -> Result<WitnessOutcome> {
    let (da, db) = dims;
    if sigma.dim() != da * db {
        return Err(Error::DimensionMismatch {
            context: "Schmidt witness",
            expected: da * db,
            found: sigma.dim(),
        });
    }
    let d = da.min(db);
    let scale = 1.0 / (d as f64).sqrt();
    let vec_of = |x: &CMatrix| CVector::from_iterator(da * db, (0..da * db).map(|k| x[(k / db, k % db)] * re(scale)));
    let value = |x: &CMatrix| {
        let v = vec_of(x);
        (v.adjoint() * sigma.matrix() * &v)[(0, 0)].re
    };
    let mut best: Option<(f64, u64)> = None;
    for start in 0..WITNESS_STARTS as u64 {
        let start_seed = seed.wrapping_add(start);
        let mut rng = ChaCha8Rng::seed_from_u64(start_seed);
        let mut x = polar_factor(&random::ginibre(&mut rng, da, db), None)?;
        let mut f = value(&x);
        for _ in 0..500 {
            let grad = coefficient_matrix(&(sigma.matrix() * vec_of(&x)), (da, db));
            let next = polar_factor(&grad, None)?;
            let g = value(&next);
            x = next;
            let done = g - f < 1e-15;
            f = f.max(g);
            if done {
                break;
            }
        }
        if best.is_none_or(|(b, _)| f > b) {
            best = Some((f, start_seed));
        }
    }
    let (overlap, seed) = best.expect("at least one start");
    let threshold = r as f64 / d as f64;
    Ok(WitnessOutcome {
        overlap,
        threshold,
        certified: overlap > threshold + WITNESS_MARGIN,
        seed,
    })
}

/// `true` when a Kraus representation with every operator of rank at most `r` is found.
pub fn peb_upper_certificate(chan: &KrausChannel, r: usize) -> Result<bool> {
    let ops = minimal_kraus(chan)?;
    if kraus_ranks(&ops, RANK_TOL)?.iter().all(|&k| k <= r) {
        return Ok(true);
    }
    if ops.len() == 1 {
        return Ok(false);
    }
    let (mixed, _) = concentrate_rank(&ops, r, 12, 0x9eb)?;
    Ok(kraus_ranks(&mixed, RANK_TOL)?.iter().all(|&k| k <= r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{choi_distance, dephasing, identity, partial_trace_channel, trine, trine_vectors};
    use crate::matcore::{c, PureStateVector};
    use rand::Rng;

    fn trine_ensemble() -> Ensemble {
        let states = trine_vectors()
            .iter()
            .map(|v| (1.0 / 3.0, PureStateVector::normalized(v.clone()).unwrap().projector()))
            .collect();
        Ensemble::new(states).unwrap()
    }

    fn basis_ensemble() -> Ensemble {
        Ensemble::new(vec![(0.5, DensityMatrix::basis(2, 0)), (0.5, DensityMatrix::basis(2, 1))]).unwrap()
    }

    fn max_entangled(d: usize) -> DensityMatrix {
        let s = 1.0 / (d as f64).sqrt();
        let v = CVector::from_fn(d * d, |k, _| if k / d == k % d { re(s) } else { re(0.0) });
        PureStateVector::new(v).unwrap().projector()
    }

    #[test]
    fn petz_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let sigma = random::density_matrix(&mut rng, 3, 3);
        let theta = petz_recovery(&identity(3), &sigma).unwrap();
        assert!(choi_distance(&theta, &identity(3)) <= 1e-10);

        let half = DensityMatrix::maximally_mixed(2);
        let theta = petz_recovery(&dephasing(2), &half).unwrap();
        assert!(choi_distance(&theta, &dephasing(2)) <= 1e-10);
        for p in [0.0, 0.2, 0.9] {
            let rho = DensityMatrix::diagonal(&[p, 1.0 - p]).unwrap();
            let back = theta.apply(&dephasing(2).apply(&rho).unwrap()).unwrap();
            assert!(back.trace_distance(&rho).unwrap() < 1e-12);
        }

        let theta = petz_recovery(&trine(), &half).unwrap();
        for a in 0..8 {
            for b in 0..8 {
                let t = std::f64::consts::PI * a as f64 / 7.0;
                let ph = 2.0 * std::f64::consts::PI * b as f64 / 8.0;
                let v = CVector::from_vec(vec![re((t / 2.0).cos()), c(ph.cos(), ph.sin()) * re((t / 2.0).sin())]);
                let rho = PureStateVector::new(v).unwrap().projector();
                let back = theta.apply(&trine().apply(&rho).unwrap()).unwrap();
                assert!(back.trace_distance(&rho).unwrap() > 0.1);
            }
        }
    }

    #[test]
    fn petz_fixed_point() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for t in 0..200 {
            let din = 2 + t % 3;
            let chan = random::channel(&mut rng, din, 2 + (t / 3) % 3, 1 + t % 3);
            let sigma = random::density_matrix(&mut rng, din, 1 + t % din);
            let theta = petz_recovery(&chan, &sigma).unwrap();
            let back = theta.apply(&chan.apply(&sigma).unwrap()).unwrap();
            assert!(back.trace_distance(&sigma).unwrap() <= 1e-9, "trial {t}");
        }
    }

    #[test]
    fn audit_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let ens = random::ensemble(&mut rng, 3, 4, 2);
        let rep = reversibility_audit(&identity(3), &ens).unwrap();
        assert!(rep.gap.abs() <= 1e-10 && rep.max_residual() <= 1e-10 && rep.reversible);

        let diag = Ensemble::new(vec![
            (0.3, DensityMatrix::diagonal(&[0.9, 0.1]).unwrap()),
            (0.7, DensityMatrix::diagonal(&[0.2, 0.8]).unwrap()),
        ])
        .unwrap();
        let rep = reversibility_audit(&dephasing(2), &diag).unwrap();
        assert!(rep.gap.abs() <= 1e-10 && rep.max_residual() <= 1e-9 && rep.reversible);

        let rep = reversibility_audit(&trine(), &trine_ensemble()).unwrap();
        assert!(rep.gap > 0.01 && rep.max_residual() > 0.1 && !rep.reversible);
    }

    #[test]
    fn audit_restricts_to_average_support() {
        let ens = Ensemble::new(vec![(0.5, DensityMatrix::basis(3, 0)), (0.5, DensityMatrix::basis(3, 1))]).unwrap();
        let rep = reversibility_audit(&dephasing(3), &ens).unwrap();
        assert_eq!(rep.support_dim, Some(2));
        assert!(rep.reversible && !rep.warnings.is_empty());
    }

    #[test]
    fn audit_gap_and_residual_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for t in 0..100 {
            let din = 2 + t % 2;
            let chan = random::channel(&mut rng, din, 2 + t % 3, 1 + t % 3);
            let ens = random::ensemble(&mut rng, din, 3, 1 + t % 2);
            let rep = reversibility_audit(&chan, &ens).unwrap();
            assert!(rep.gap >= -1e-9);
            if rep.max_residual() <= 1e-9 {
                assert!(rep.gap <= 1e-7);
            }
            if rep.gap <= 1e-10 {
                assert!(rep.max_residual() <= 1e-6);
            }
        }
    }

    #[test]
    fn rank_bounded_examples() {
        let h = 0.5f64.sqrt();
        let pure = Ensemble::new(vec![
            (0.5, DensityMatrix::basis(2, 0)),
            (0.25, PureStateVector::new(CVector::from_vec(vec![re(h), re(h)])).unwrap().projector()),
            (0.25, DensityMatrix::basis(2, 1)),
        ])
        .unwrap();
        let rb = rank_bounded_complement(&identity(2), &pure, 1).unwrap();
        assert_eq!(rb.channel.dim_out(), 1);
        assert!(rb.certified_rank_bound <= 1);

        let rb = rank_bounded_complement(&dephasing(2), &basis_ensemble(), 1).unwrap();
        assert!(rb.per_op_numerical_rank.iter().all(|&k| k == 1));
        let comp = complementary(&dephasing(2)).unwrap();
        assert!(choi_distance(&rb.channel, &comp) <= 1e-9);

        let err = rank_bounded_complement(&trine(), &trine_ensemble(), 1).unwrap_err();
        assert!(matches!(err, Error::ConstructionInvalid { .. }));

        let mixed = Ensemble::new(vec![(1.0, DensityMatrix::maximally_mixed(2))]).unwrap();
        assert!(matches!(
            rank_bounded_complement(&identity(2), &mixed, 1),
            Err(Error::RankPrecondition { .. })
        ));
    }

    #[test]
    fn rank_bounded_on_reversible_block_channels() {
        // Φ acting as an isometry on each block of a block-diagonal ensemble is reversible
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let u = random::unitary(&mut rng, 2);
            // classical-quantum style: measure block label, keep the block content unitarily rotated
            let p0 = CMatrix::from_fn(4, 4, |i, j| if i == j && i < 2 { re(1.0) } else { re(0.0) });
            let p1 = CMatrix::identity(4, 4) - &p0;
            let mut u0 = CMatrix::zeros(4, 4);
            u0.view_mut((0, 0), (2, 2)).copy_from(&u);
            let mut u1 = CMatrix::zeros(4, 4);
            u1.view_mut((2, 2), (2, 2)).copy_from(&u.adjoint());
            let chan = KrausChannel::new(vec![&u0 * &p0, &u1 * &p1]).unwrap();
            let ens = Ensemble::normalized(
                (0..4)
                    .map(|_| (rng.random_range(0.1..1.0), random::pure_state(&mut rng, 2)))
                    .enumerate()
                    .map(|(k, (p, s))| {
                        let mut v = CVector::zeros(4);
                        let off = if k < 2 { 0 } else { 2 };
                        v.rows_mut(off, 2).copy_from(s.amplitudes());
                        (p, PureStateVector::new(v).unwrap().projector())
                    })
                    .collect(),
            )
            .unwrap();
            let rep = reversibility_audit(&chan, &ens).unwrap();
            assert!(rep.reversible);
            let rb = rank_bounded_complement(&chan, &ens, 1).unwrap();
            assert!(rb.certified_rank_bound <= 1);
            assert!(choi_distance(&rb.channel, &complementary(&chan).unwrap()) <= 1e-8);
            let comp_ops = rb.channel.kraus_ops();
            assert!(comp_ops.len() >= 2);
        }
    }

    #[test]
    fn pure_case_examples() {
        let rec = pure_case_reconstruction(&identity(2), &basis_ensemble()).unwrap();
        assert!(rec.residual <= 1e-7);
        let rec = pure_case_reconstruction(&dephasing(2), &basis_ensemble()).unwrap();
        assert!(rec.residual <= 1e-7);
        let skewed = Ensemble::new(vec![
            (0.25, DensityMatrix::basis(2, 0)),
            (0.25, DensityMatrix::basis(2, 1)),
            (0.5, DensityMatrix::basis(2, 0)),
        ])
        .unwrap();
        let rec = pure_case_reconstruction(&dephasing(2), &skewed).unwrap();
        assert!(rec.residual <= 1e-7);
        assert!(matches!(
            pure_case_reconstruction(&trine(), &trine_ensemble()),
            Err(Error::AuditFailed(_))
        ));
    }

    #[test]
    fn witness_examples() {
        assert!(schmidt_witness(&max_entangled(2), (2, 2), 1).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let a = random::density_matrix(&mut rng, 2, 2);
        let b = random::density_matrix(&mut rng, 3, 3);
        let prod = DensityMatrix::new(a.matrix().kronecker(b.matrix())).unwrap();
        assert!(!schmidt_witness(&prod, (2, 3), 1).unwrap());
        assert!(schmidt_witness(&max_entangled(3), (3, 3), 2).unwrap());
        assert!(!schmidt_witness(&max_entangled(3), (3, 3), 3).unwrap());
    }

    #[test]
    fn witness_is_sound_on_low_schmidt_rank_mixtures() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for t in 0..40 {
            let (da, db, r) = if t % 2 == 0 { (2, 2, 1) } else { (3, 3, 1 + t % 2) };
            let mut items = Vec::new();
            for _ in 0..4 {
                // Σ_{k<r} c_k a_k ⊗ b_k
                let mut v = CVector::zeros(da * db);
                for _ in 0..r {
                    let x = random::pure_state(&mut rng, da);
                    let y = random::pure_state(&mut rng, db);
                    v += x.amplitudes().kronecker(y.amplitudes()) * re(rng.random_range(0.2..1.0));
                }
                items.push((0.25, PureStateVector::normalized(v).unwrap().projector()));
            }
            let ens = Ensemble::new(items).unwrap();
            assert!(!schmidt_witness(ens.average(), (da, db), r).unwrap());
        }
    }

    #[test]
    fn witness_is_deterministic() {
        let a = schmidt_witness_seeded(&max_entangled(2), (2, 2), 1, 42).unwrap();
        let b = schmidt_witness_seeded(&max_entangled(2), (2, 2), 1, 42).unwrap();
        assert_eq!(a.overlap.to_bits(), b.overlap.to_bits());
        assert_eq!(a.seed, b.seed);
    }

    #[test]
    fn peb_examples() {
        assert!(peb_upper_certificate(&trine(), 1).unwrap());
        assert!(!peb_upper_certificate(&identity(2), 1).unwrap());
        assert!(peb_upper_certificate(&identity(2), 2).unwrap());
        assert!(!peb_upper_certificate(&partial_trace_channel(2, 2), 1).unwrap());
        assert!(peb_upper_certificate(&dephasing(3), 1).unwrap());
    }
}
