//! Entropic functionals, in bits.

use std::fmt;

use serde::{Serialize, Serializer};

use crate::channels::{complementary_of_kraus, Ensemble, KrausChannel};
use crate::error::{Error, Result};
use crate::matcore::{partial_trace, purify, trace_product, CMatrix, DensityMatrix, Subsystem, SUPPORT_TOL};

/// Agreement required between the two Holevo expressions.
pub const HOLEVO_FORMS_TOL: f64 = 1e-9;
/// Mass of `ρ` on the kernel of `σ` beyond which `H(ρ‖σ)` is infinite.
pub const SUPPORT_MASS_TOL: f64 = 1e-10;

/// Entropy in bits, or `+∞` for relative entropies with a support violation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EntropyValue {
    Finite(f64),
    PlusInfinity,
}

impl EntropyValue {
    pub fn finite(self) -> Option<f64> {
        match self {
            EntropyValue::Finite(x) => Some(x),
            EntropyValue::PlusInfinity => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, EntropyValue::PlusInfinity)
    }

    /// As an `f64`, with `+∞` mapped to `f64::INFINITY`.
    pub fn value(self) -> f64 {
        self.finite().unwrap_or(f64::INFINITY)
    }

    /// Finite value, panicking otherwise. For functionals that cannot diverge.
    pub fn bits(self) -> f64 {
        self.finite().expect("entropy is finite")
    }
}

impl fmt::Display for EntropyValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EntropyValue::Finite(x) => write!(f, "{x:.10}"),
            EntropyValue::PlusInfinity => write!(f, "+inf"),
        }
    }
}

impl Serialize for EntropyValue {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            EntropyValue::Finite(x) => s.serialize_f64(*x),
            EntropyValue::PlusInfinity => s.serialize_str("+inf"),
        }
    }
}

/// `−Σ λ log₂ λ` over the positive entries.
pub fn entropy_of_spectrum(values: &[f64]) -> f64 {
    values.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.log2()).sum::<f64>().max(0.0)
}

pub(crate) fn entropy_bits(rho: &DensityMatrix) -> f64 {
    entropy_of_spectrum(rho.eigenvalues())
}

pub fn vn_entropy(rho: &DensityMatrix) -> EntropyValue {
    EntropyValue::Finite(entropy_bits(rho))
}

pub fn rel_entropy(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<EntropyValue> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            context: "relative entropy",
            expected: rho.dim(),
            found: sigma.dim(),
        });
    }
    if rho.matrix() == sigma.matrix() {
        return Ok(EntropyValue::Finite(0.0));
    }
    let spec = sigma.spectrum();
    let cut = spec.support_threshold(SUPPORT_TOL);
    for (k, &lam) in spec.values.iter().enumerate() {
        if lam <= cut {
            let f = spec.vectors.column(k);
            let mass = (f.adjoint() * rho.matrix() * f)[(0, 0)].re;
            if mass > SUPPORT_MASS_TOL {
                return Ok(EntropyValue::PlusInfinity);
            }
        }
    }
    let log_sigma = spec.support_apply(f64::log2, SUPPORT_TOL)?;
    let cross = trace_product(rho.matrix(), &log_sigma).re;
    let value = -entropy_bits(rho) - cross;
    Ok(EntropyValue::Finite(value.max(0.0)))
}

/// `(Σ π_i H(ρ_i‖ρ̄), H(ρ̄) − Σ π_i H(ρ_i))`; the first is `+∞` only through
/// numerical support loss on negligible weights.
pub fn holevo_both(ens: &Ensemble) -> Result<(EntropyValue, f64)> {
    let avg = ens.average();
    let mut rel = 0.0;
    let mut rel_finite = true;
    let mut mixed = entropy_bits(avg);
    for (p, r) in ens.items() {
        match rel_entropy(r, avg)? {
            EntropyValue::Finite(x) => rel += p * x,
            EntropyValue::PlusInfinity => rel_finite = false,
        }
        mixed -= p * entropy_bits(r);
    }
    let rel = if rel_finite {
        EntropyValue::Finite(rel)
    } else {
        EntropyValue::PlusInfinity
    };
    Ok((rel, mixed.max(0.0)))
}

pub fn holevo(ens: &Ensemble) -> Result<EntropyValue> {
    let (rel, mixed) = holevo_both(ens)?;
    Ok(match rel {
        EntropyValue::Finite(x) => {
            debug_assert!((x - mixed).abs() <= HOLEVO_FORMS_TOL, "Holevo forms disagree: {x} vs {mixed}");
            EntropyValue::Finite(x)
        }
        EntropyValue::PlusInfinity => EntropyValue::Finite(mixed),
    })
}

pub fn holevo_image(chan: &KrausChannel, ens: &Ensemble) -> Result<EntropyValue> {
    holevo(&ens.image(chan)?)
}

/// `H(ρ_AB) − H(ρ_B)`.
pub fn cond_entropy(rho_ab: &DensityMatrix, dims: (usize, usize)) -> Result<EntropyValue> {
    let rho_b = partial_trace(rho_ab.matrix(), dims, Subsystem::B)?;
    let rho_b = DensityMatrix::from_positive(&rho_b)?;
    Ok(EntropyValue::Finite(entropy_bits(rho_ab) - entropy_bits(&rho_b)))
}

/// Entropy of the environment output, from any Kraus presentation.
fn exchange_entropy(chan: &KrausChannel, rho: &DensityMatrix) -> Result<f64> {
    let comp = complementary_of_kraus(chan.kraus_ops())?;
    Ok(entropy_bits(&comp.apply(rho)?))
}

/// `H(ρ) + H(Φ(ρ)) − H(Φ̂(ρ))`.
pub fn mutual_info(chan: &KrausChannel, rho: &DensityMatrix) -> Result<EntropyValue> {
    chan.check_input(rho.dim())?;
    let out = entropy_bits(&chan.apply(rho)?);
    let env = exchange_entropy(chan, rho)?;
    Ok(EntropyValue::Finite((entropy_bits(rho) + out - env).max(0.0)))
}

/// `H((Φ⊗Id)(|φ_ρ⟩⟨φ_ρ|) ‖ Φ(ρ)⊗ϱ)` with `ϱ` the reference marginal of the purification.
pub fn mutual_info_relative(chan: &KrausChannel, rho: &DensityMatrix) -> Result<EntropyValue> {
    chan.check_input(rho.dim())?;
    let d = rho.dim();
    let phi = purify(rho);
    let joint_in = phi.amplitudes() * phi.amplitudes().adjoint();
    let id_r = CMatrix::identity(d, d);
    let mut joint_out = CMatrix::zeros(chan.dim_out() * d, chan.dim_out() * d);
    for v in chan.kraus_ops() {
        let big = v.kronecker(&id_r);
        joint_out += &big * &joint_in * big.adjoint();
    }
    let reference = partial_trace(&joint_in, (d, d), Subsystem::B)?;
    let product = chan.apply(rho)?.matrix().kronecker(&reference);
    rel_entropy(
        &DensityMatrix::from_positive(&joint_out)?,
        &DensityMatrix::from_positive(&product)?,
    )
}

/// `H(Φ(ρ)) − H(Φ̂(ρ))`.
pub fn coherent_info(chan: &KrausChannel, rho: &DensityMatrix) -> Result<EntropyValue> {
    chan.check_input(rho.dim())?;
    let out = entropy_bits(&chan.apply(rho)?);
    Ok(EntropyValue::Finite(out - exchange_entropy(chan, rho)?))
}

/// `tH(ρ‖σ) + (1−t)H(σ‖σ) − [tH(ρ‖σ_t) + (1−t)H(σ‖σ_t) + H(σ_t‖σ)]`, `σ_t = tρ + (1−t)σ`.
pub fn donald_residual(rho: &DensityMatrix, sigma: &DensityMatrix, t: f64) -> Result<f64> {
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::InvalidParameter {
            reason: format!("mixing weight t = {t} must lie in (0, 1)"),
        });
    }
    let sigma_t = if rho.matrix() == sigma.matrix() {
        sigma.clone()
    } else {
        DensityMatrix::mixture([(t, rho), (1.0 - t, sigma)])?
    };
    let terms = [
        ("H(rho||sigma)", rho, sigma),
        ("H(sigma||sigma)", sigma, sigma),
        ("H(rho||sigma_t)", rho, &sigma_t),
        ("H(sigma||sigma_t)", sigma, &sigma_t),
        ("H(sigma_t||sigma)", &sigma_t, sigma),
    ];
    let mut values = [0.0; 5];
    let mut infinite = Vec::new();
    for (k, (name, a, b)) in terms.iter().enumerate() {
        match rel_entropy(a, b)? {
            EntropyValue::Finite(x) => values[k] = x,
            EntropyValue::PlusInfinity => infinite.push(*name),
        }
    }
    if !infinite.is_empty() {
        return Err(Error::SupportViolation { terms: infinite });
    }
    let lhs = t * values[0] + (1.0 - t) * values[1];
    let rhs = t * values[2] + (1.0 - t) * values[3] + values[4];
    Ok(lhs - rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{dephasing, identity, partial_trace_channel, replacement, trine, trine_vectors};
    use crate::matcore::{re, CVector, PureStateVector};
    use crate::random;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn h2(p: f64) -> f64 {
        entropy_of_spectrum(&[p, 1.0 - p])
    }

    fn plus() -> DensityMatrix {
        let h = 0.5f64.sqrt();
        PureStateVector::new(CVector::from_vec(vec![re(h), re(h)])).unwrap().projector()
    }

    fn bell(k: usize) -> DensityMatrix {
        let h = 0.5f64.sqrt();
        let amps = match k {
            0 => [h, 0.0, 0.0, h],
            1 => [h, 0.0, 0.0, -h],
            2 => [0.0, h, h, 0.0],
            _ => [0.0, h, -h, 0.0],
        };
        PureStateVector::new(CVector::from_iterator(4, amps.iter().map(|&x| re(x))))
            .unwrap()
            .projector()
    }

    #[test]
    fn vn_entropy_examples() {
        assert!(vn_entropy(&DensityMatrix::basis(3, 1)).bits().abs() < 1e-12);
        assert!((vn_entropy(&DensityMatrix::maximally_mixed(4)).bits() - 2.0).abs() < 1e-12);
        let h = vn_entropy(&DensityMatrix::diagonal(&[0.8, 0.2]).unwrap()).bits();
        let oracle = -(0.8f64 * 0.8f64.log2() + 0.2 * 0.2f64.log2());
        assert!((h - oracle).abs() < 1e-12);
        assert!((h - 0.72193).abs() < 1e-5);
    }

    #[test]
    fn rel_entropy_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let r = random::density_matrix(&mut rng, 3, 3);
        assert!(rel_entropy(&r, &r).unwrap().bits().abs() < 1e-9);
        let v = rel_entropy(&DensityMatrix::basis(2, 0), &DensityMatrix::maximally_mixed(2)).unwrap();
        assert!((v.bits() - 1.0).abs() < 1e-12);
        assert!(rel_entropy(&plus(), &DensityMatrix::basis(2, 0)).unwrap().is_infinite());
        assert!(rel_entropy(&r, &DensityMatrix::maximally_mixed(2)).is_err());
    }

    #[test]
    fn rel_entropy_on_shared_support_is_finite() {
        let rho = DensityMatrix::basis(3, 0);
        let sigma = DensityMatrix::diagonal(&[0.5, 0.5, 0.0]).unwrap();
        assert!((rel_entropy(&rho, &sigma).unwrap().bits() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn holevo_examples() {
        let single = Ensemble::new(vec![(1.0, plus())]).unwrap();
        assert!(holevo(&single).unwrap().bits().abs() < 1e-12);

        let bits = Ensemble::new(vec![(0.5, DensityMatrix::basis(2, 0)), (0.5, DensityMatrix::basis(2, 1))]).unwrap();
        assert!((holevo(&bits).unwrap().bits() - 1.0).abs() < 1e-12);

        let mixed = Ensemble::new(vec![(0.5, DensityMatrix::basis(2, 0)), (0.5, plus())]).unwrap();
        let s = (std::f64::consts::PI / 8.0).sin().powi(2);
        let chi = holevo(&mixed).unwrap().bits();
        assert!((chi - h2(s)).abs() < 1e-12);
        assert!((chi - 0.60088).abs() < 1e-5);
    }

    #[test]
    fn holevo_image_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let ens = random::ensemble(&mut rng, 3, 4, 2);
        let chi = holevo(&ens).unwrap().bits();
        assert!((holevo_image(&identity(3), &ens).unwrap().bits() - chi).abs() < 1e-10);
        let rep = replacement(3, &random::density_matrix(&mut rng, 2, 2));
        assert!(holevo_image(&rep, &ens).unwrap().bits().abs() < 1e-9);

        let states: Vec<_> = trine_vectors()
            .iter()
            .map(|v| PureStateVector::normalized(v.clone()).unwrap().projector())
            .collect();
        let ens = Ensemble::new(states.into_iter().map(|r| (1.0 / 3.0, r)).collect()).unwrap();
        let chi_in = holevo(&ens).unwrap().bits();
        let chi_out = holevo_image(&trine(), &ens).unwrap().bits();
        // inputs average to I/2; outputs are permutations of (2/3, 1/6, 1/6) averaging to I/3
        assert!((chi_in - 1.0).abs() < 1e-10);
        let oracle = 3f64.log2() - entropy_of_spectrum(&[2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0]);
        assert!((chi_out - oracle).abs() < 1e-10);
        assert!(chi_in - chi_out > 0.6);
    }

    #[test]
    fn cond_entropy_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let r = random::density_matrix(&mut rng, 2, 2);
        let s = random::density_matrix(&mut rng, 3, 3);
        let prod = DensityMatrix::new(r.matrix().kronecker(s.matrix())).unwrap();
        let v = cond_entropy(&prod, (2, 3)).unwrap().bits();
        assert!((v - entropy_bits(&r)).abs() < 1e-10);
        assert!((cond_entropy(&bell(0), (2, 2)).unwrap().bits() + 1.0).abs() < 1e-10);
        let classical = DensityMatrix::diagonal(&[0.5, 0.0, 0.0, 0.5]).unwrap();
        assert!(cond_entropy(&classical, (2, 2)).unwrap().bits().abs() < 1e-12);
        assert!(cond_entropy(&classical, (3, 2)).is_err());
    }

    #[test]
    fn mutual_and_coherent_info_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let rho = random::density_matrix(&mut rng, 3, 3);
        let h = entropy_bits(&rho);
        assert!((mutual_info(&identity(3), &rho).unwrap().bits() - 2.0 * h).abs() < 1e-9);
        assert!((coherent_info(&identity(3), &rho).unwrap().bits() - h).abs() < 1e-9);
        let rep = replacement(3, &DensityMatrix::maximally_mixed(2));
        assert!(mutual_info(&rep, &rho).unwrap().bits().abs() < 1e-9);
        assert!((coherent_info(&rep, &rho).unwrap().bits() + h).abs() < 1e-9);
        let half = DensityMatrix::maximally_mixed(2);
        assert!((mutual_info(&dephasing(2), &half).unwrap().bits() - 1.0).abs() < 1e-10);
        assert!(coherent_info(&dephasing(2), &half).unwrap().bits().abs() < 1e-10);
        assert!(mutual_info(&dephasing(2), &rho).is_err());
    }

    #[test]
    fn mutual_info_forms_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for t in 0..60 {
            let din = 2 + t % 2;
            let chan = random::channel(&mut rng, din, 2 + t % 3, 1 + t % 3);
            let rho = random::density_matrix(&mut rng, din, 1 + t % din);
            let a = mutual_info(&chan, &rho).unwrap().bits();
            let b = mutual_info_relative(&chan, &rho).unwrap().bits();
            assert!((a - b).abs() < 1e-8, "{a} vs {b}");
            assert!(a >= -1e-12 && a <= 2.0 * entropy_bits(&rho) + 1e-9);
            let ic = coherent_info(&chan, &rho).unwrap().bits();
            assert!((ic - (a - entropy_bits(&rho))).abs() < 1e-9);
        }
    }

    #[test]
    fn donald_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let r = random::density_matrix(&mut rng, 2, 2);
        assert_eq!(donald_residual(&r, &r, 0.3).unwrap().abs(), 0.0);
        let v = donald_residual(&DensityMatrix::basis(2, 0), &DensityMatrix::maximally_mixed(2), 0.5).unwrap();
        assert!(v.abs() <= 1e-10);
        for _ in 0..100 {
            let d = 2 + rng.random_range(0..3usize);
            let rho = random::density_matrix(&mut rng, d, d);
            let sigma = random::density_matrix(&mut rng, d, d);
            for t in [0.1, 0.5, 0.9] {
                assert!(donald_residual(&rho, &sigma, t).unwrap().abs() <= 1e-9);
            }
        }
        let err = donald_residual(&plus(), &DensityMatrix::basis(2, 0), 0.5).unwrap_err();
        assert!(matches!(err, Error::SupportViolation { .. }));
        assert!(donald_residual(&r, &r, 1.0).is_err());
    }

    use rand::Rng;

    #[test]
    fn holevo_forms_agree_and_monotone() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for t in 0..1000 {
            let din = 2 + t % 3;
            let dout = 2 + (t / 3) % 3;
            let chan = random::channel(&mut rng, din, dout, 1 + t % 4);
            let ens = random::ensemble(&mut rng, din, 2 + t % 3, 1 + t % din);
            let (rel, mixed) = holevo_both(&ens).unwrap();
            assert!((rel.bits() - mixed).abs() <= HOLEVO_FORMS_TOL);
            let chi = holevo(&ens).unwrap().bits();
            let chi_out = holevo_image(&chan, &ens).unwrap().bits();
            assert!(chi_out <= chi + 1e-9, "trial {t}: {chi_out} > {chi}");
            assert!(chi <= entropy_bits(ens.average()) + 1e-12);
        }
    }

    #[test]
    fn entropy_gain_is_convex() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for t in 0..200 {
            let chan = random::channel(&mut rng, 3, 2 + t % 3, 2);
            let ens = random::ensemble(&mut rng, 3, 3, 1 + t % 3);
            let gain = |r: &DensityMatrix| entropy_bits(&chan.apply(r).unwrap()) - entropy_bits(r);
            let avg_gain: f64 = ens.items().iter().map(|(p, r)| p * gain(r)).sum();
            assert!(gain(ens.average()) <= avg_gain + 1e-9);
        }
    }

    #[test]
    fn partial_trace_strictly_loses_information_on_bell_basis() {
        let ens = Ensemble::new((0..4).map(|k| (0.25, bell(k))).collect()).unwrap();
        let chi_in = holevo(&ens).unwrap().bits();
        let chi_out = holevo_image(&partial_trace_channel(2, 2), &ens).unwrap().bits();
        assert!((chi_in - 2.0).abs() < 1e-10);
        assert!(chi_out.abs() < 1e-10);

        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            let ens = random::pure_ensemble(&mut rng, 4, 5);
            assert!(ens.average().is_full_rank());
            let gap = holevo(&ens).unwrap().bits() - holevo_image(&partial_trace_channel(2, 2), &ens).unwrap().bits();
            assert!(gap > 1e-6);
        }
    }

    #[test]
    fn conditional_entropy_is_strictly_concave_on_pure_decompositions() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..100 {
            let ens = random::pure_ensemble(&mut rng, 4, 4);
            assert!(ens.average().is_full_rank());
            let avg = cond_entropy(ens.average(), (2, 2)).unwrap().bits();
            let parts: f64 = ens.items().iter().map(|(p, r)| p * cond_entropy(r, (2, 2)).unwrap().bits()).sum();
            assert!(avg - parts > 1e-6);
        }
    }

    #[test]
    fn display_and_value() {
        assert_eq!(EntropyValue::PlusInfinity.to_string(), "+inf");
        assert_eq!(EntropyValue::PlusInfinity.value(), f64::INFINITY);
        assert_eq!(EntropyValue::Finite(0.5).finite(), Some(0.5));
        let _ = trace_product;
    }
}
