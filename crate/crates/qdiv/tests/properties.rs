use proptest::prelude::*;
use qdiv::azrenyi::{self, AzParams};
use qdiv::channels::{petz_pair, random_bistochastic, random_channel, random_state_rng, QuantumChannel};
use qdiv::fdiv::{self, DivergenceFunction, ExtendedReal};
use qdiv::linalg::{self, CMatrix};
use qdiv::measured::{self, Measurement};
use qdiv::operators::{self, HermitianOperator};
use qdiv::reversibility::{self, rel_trace_dist};
use qdiv::PsdOperator;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const BUILTINS: [&str; 6] = ["eta", "power:0.5", "power:1.5", "power:2", "gs:1", "fs:2"];

fn f(spec: &str) -> DivergenceFunction {
    DivergenceFunction::parse(spec).unwrap()
}

fn pair(d: usize, seed: u64) -> (PsdOperator, PsdOperator, ChaCha8Rng) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let r = random_state_rng(d, d, &mut rng).unwrap();
        let s = random_state_rng(d, d, &mut rng).unwrap();
        if r.eigenvalues().iter().chain(s.eigenvalues()).all(|&e| e > 1e-3) {
            return (r, s, rng);
        }
    }
}

fn fin(x: ExtendedReal) -> f64 {
    x.finite().expect("finite value")
}

/// Smallest eigenvalue of the Hermitian part of `m`.
fn min_eig(m: &CMatrix) -> f64 {
    linalg::eigvals_h(&linalg::hermitian_part(m)).into_iter().fold(f64::INFINITY, f64::min)
}

fn psd(m: CMatrix) -> PsdOperator {
    PsdOperator::new(linalg::hermitian_part(&m)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn spectral_reconstruction(seed in any::<u64>(), d in 1usize..=6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = HermitianOperator::new(linalg::hermitian_part(&linalg::random_gaussian_matrix(d, d, &mut rng))).unwrap();
        let sd = operators::spectral_decompose(&a, 1e-8).unwrap();
        prop_assert!((sd.reconstruct() - a.matrix()).norm() <= 1e-10 * a.matrix().norm().max(1.0));
    }

    #[test]
    fn perspective_transpose_identity(seed in any::<u64>(), d in 2usize..=4) {
        let (r, s, _) = pair(d, seed);
        for spec in BUILTINS {
            let g = f(spec);
            let lhs = operators::operator_perspective(&g.transpose(), &r, &s).unwrap();
            let rhs = operators::operator_perspective(&g, &s, &r).unwrap();
            prop_assert!((lhs - rhs).norm() < 1e-9, "{spec}");
        }
    }

    #[test]
    fn divergence_transpose_symmetry(seed in any::<u64>(), d in 2usize..=4) {
        let (r, s, _) = pair(d, seed);
        for spec in BUILTINS {
            let g = f(spec);
            let a = fin(fdiv::standard_f_div(&g.transpose(), &r, &s).unwrap());
            let b = fin(fdiv::standard_f_div(&g, &s, &r).unwrap());
            prop_assert!((a - b).abs() < 1e-9, "{spec}: {a} vs {b}");
            let a = fin(fdiv::maximal_f_div(&g.transpose(), &r, &s).unwrap());
            let b = fin(fdiv::maximal_f_div(&g, &s, &r).unwrap());
            prop_assert!((a - b).abs() < 1e-9, "{spec}: {a} vs {b}");
        }
    }

    #[test]
    fn homogeneity(seed in any::<u64>(), d in 2usize..=4, lambda in 0.1f64..10.0) {
        let (r, s, _) = pair(d, seed);
        let (lr, ls) = (r.scale(lambda).unwrap(), s.scale(lambda).unwrap());
        for spec in BUILTINS {
            let g = f(spec);
            let a = fin(fdiv::standard_f_div(&g, &lr, &ls).unwrap());
            let b = lambda * fin(fdiv::standard_f_div(&g, &r, &s).unwrap());
            prop_assert!((a - b).abs() < 1e-9 * lambda.max(1.0), "{spec}");
        }
    }

    #[test]
    fn joint_convexity(seed in any::<u64>(), d in 2usize..=3) {
        let (r1, s1, mut rng) = pair(d, seed);
        let r2 = random_state_rng(d, d, &mut rng).unwrap();
        let s2 = random_state_rng(d, d, &mut rng).unwrap();
        let rs = psd(r1.matrix() + r2.matrix());
        let ss = psd(s1.matrix() + s2.matrix());
        for spec in BUILTINS {
            let g = f(spec);
            let joint = fdiv::standard_f_div(&g, &rs, &ss).unwrap();
            let parts = fdiv::standard_f_div(&g, &r1, &s1).unwrap().to_f64() + fdiv::standard_f_div(&g, &r2, &s2).unwrap().to_f64();
            prop_assert!(joint.to_f64() <= parts + 1e-9, "{spec}");
        }
    }

    #[test]
    fn standard_below_maximal(seed in any::<u64>(), d in 2usize..=4) {
        let (r, s, _) = pair(d, seed);
        for spec in BUILTINS {
            let g = f(spec);
            let st = fin(fdiv::standard_f_div(&g, &r, &s).unwrap());
            let mx = fin(fdiv::maximal_f_div(&g, &r, &s).unwrap());
            prop_assert!(st <= mx + 1e-9, "{spec}: {st} > {mx}");
        }
    }

    #[test]
    fn monotone_metric_nonnegative(seed in any::<u64>(), d in 2usize..=4) {
        let (_, s, mut rng) = pair(d, seed);
        let x = HermitianOperator::new(linalg::hermitian_part(&linalg::random_gaussian_matrix(d, d, &mut rng))).unwrap();
        prop_assert!(operators::monotone_metric_form(&operators::bkm_kernel, &s, &x).unwrap() >= 0.0);
        prop_assert!(operators::monotone_metric_form(&operators::inv_sqrt_kernel, &s, &x).unwrap() >= 0.0);
    }

    #[test]
    fn operator_jensen(seed in any::<u64>(), d in 2usize..=4) {
        let (a, _, _) = pair(d, seed);
        let phi = random_bistochastic(d, 3, seed ^ 0x5eed).unwrap();
        for spec in BUILTINS {
            let g = f(spec);
            let fa = a.func(|x| g.eval(x));
            let lhs = psd(phi.apply(a.matrix())).func(|x| g.eval(x));
            prop_assert!(min_eig(&(phi.apply(&fa) - lhs)) >= -1e-9, "{spec}");
        }
    }

    #[test]
    fn perspective_monotone_under_channels(seed in any::<u64>(), d in 2usize..=3) {
        let (r, s, _) = pair(d, seed);
        let phi = random_channel(d, d, 2, seed).unwrap();
        let (pr, ps) = (phi.apply_psd(&r).unwrap(), phi.apply_psd(&s).unwrap());
        for spec in BUILTINS {
            let g = f(spec);
            let inside = phi.apply(&operators::operator_perspective(&g, &r, &s).unwrap());
            let outside = operators::operator_perspective(&g, &pr, &ps).unwrap();
            prop_assert!(min_eig(&(inside - outside)) >= -1e-9, "{spec}");
        }
    }

    #[test]
    fn ando_inequality(seed in any::<u64>(), d in 2usize..=3, alpha in 0.05f64..0.95) {
        let (r, s, _) = pair(d, seed);
        let phi = random_channel(d, d, 2, seed).unwrap();
        let lhs = phi.apply(&operators::geometric_mean(alpha, &r, &s).unwrap());
        let rhs = operators::geometric_mean(alpha, &phi.apply_psd(&r).unwrap(), &phi.apply_psd(&s).unwrap()).unwrap();
        prop_assert!(min_eig(&(rhs - lhs)) >= -1e-9);
    }

    #[test]
    fn petz_identity(seed in any::<u64>(), din in 2usize..=4, dout in 2usize..=4) {
        let (_, s, _) = pair(din, seed);
        let phi = random_channel(din, dout, din, seed).unwrap();
        let pm = petz_pair(&phi, &s).unwrap();
        prop_assert!(rel_trace_dist(&pm.recover(pm.phi_sigma.matrix()), s.matrix()) < 1e-9);
    }

    #[test]
    fn bistochastic_fixed_points_self_adjoint(seed in any::<u64>(), d in 2usize..=4, k in 1usize..=3) {
        let phi = random_bistochastic(d, k, seed).unwrap();
        let a = reversibility::fixed_point_set(&phi).unwrap();
        let b = reversibility::fixed_point_set(&phi.adjoint()).unwrap();
        prop_assert_eq!(a.dimension(), b.dimension());
        prop_assert!(a.distance(&b) <= 1e-8);
    }

    #[test]
    fn measured_projective_isometry_monotone(seed in any::<u64>()) {
        let (r, s, mut rng) = pair(2, seed);
        let v = linalg::haar_isometry(3, 2, &mut rng);
        let embed = QuantumChannel::new(vec![v]).unwrap();
        let (vr, vs) = (embed.apply_psd(&r).unwrap(), embed.apply_psd(&s).unwrap());
        let g = f("gs:1");
        let small = measured::measured_projective_opt(&g, &r, &s, 8, 500, seed).unwrap().value.to_f64();
        let big = measured::measured_projective_opt(&g, &vr, &vs, 8, 500, seed).unwrap().value.to_f64();
        prop_assert!(big >= small - 1e-8, "{big} < {small}");
    }

    #[test]
    fn measurement_coarse_graining(seed in any::<u64>(), d in 2usize..=4) {
        let (r, s, mut rng) = pair(d, seed);
        let u = linalg::haar_unitary(d, &mut rng);
        let fine = Measurement::from_basis(&u).unwrap();
        let e = fine.effects();
        let merged = vec![e[0].clone() + e[1].clone()].into_iter().chain(e[2..].iter().cloned()).collect();
        let coarse = Measurement::new(merged).unwrap();
        for spec in BUILTINS {
            let g = f(spec);
            let a = measured::measurement_divergence(&g, &fine, &r, &s).unwrap().to_f64();
            let b = measured::measurement_divergence(&g, &coarse, &r, &s).unwrap().to_f64();
            prop_assert!(b <= a + 1e-10, "{spec}");
        }
    }

    #[test]
    fn az_embeddings(seed in any::<u64>(), d in 2usize..=4, alpha in 0.1f64..3.0) {
        prop_assume!((alpha - 1.0).abs() > 1e-3);
        let (r, s, _) = pair(d, seed);
        let petz = fin(azrenyi::d_az(AzParams::new(alpha, 1.0).unwrap(), &r, &s).unwrap());
        let sand = fin(azrenyi::d_az(AzParams::sandwiched(alpha).unwrap(), &r, &s).unwrap());
        prop_assert!((petz - fin(fdiv::renyi_alpha(alpha, &r, &s).unwrap())).abs() < 1e-10);
        prop_assert!((sand - fin(azrenyi::sandwiched_normalized(alpha, &r, &s).unwrap())).abs() < 1e-10);
    }

    #[test]
    fn araki_lieb_thirring(seed in any::<u64>()) {
        let (r, s, _) = pair(2, seed);
        let noncommuting = linalg::op_norm(&linalg::commutator(r.matrix(), s.matrix())) >= 0.1;
        for alpha in [0.5, 2.0, 3.0] {
            let star = fin(azrenyi::sandwiched_normalized(alpha, &r, &s).unwrap());
            let std = fin(fdiv::renyi_alpha(alpha, &r, &s).unwrap());
            prop_assert!(star <= std + 1e-12);
            if noncommuting {
                prop_assert!(std - star >= 1e-6);
            }
        }
        let (a, b) = (r.eigenvectors().clone(), r.eigenvalues().to_vec());
        let commuting = psd(linalg::from_spectrum(&[b[1], b[0]], &a));
        for alpha in [0.5, 2.0, 3.0] {
            let star = fin(azrenyi::sandwiched_normalized(alpha, &r, &commuting).unwrap());
            let std = fin(fdiv::renyi_alpha(alpha, &r, &commuting).unwrap());
            prop_assert!((std - star).abs() < 1e-9);
        }
    }

    #[test]
    fn geometric_mean_trace_inequalities(seed in any::<u64>(), d in 2usize..=3) {
        let (r, s, _) = pair(d, seed);
        let strict = linalg::op_norm(&linalg::commutator(r.matrix(), s.matrix())) >= 0.1;
        for alpha in [0.25, 0.5, 0.75] {
            let mean = linalg::trace_re(&operators::geometric_mean(alpha, &s, &r).unwrap());
            let petz = linalg::trace_re(&(r.power(alpha) * s.power(1.0 - alpha)));
            prop_assert!(mean <= petz + 1e-12);
            if strict {
                prop_assert!(petz - mean > 1e-9);
            }
        }
        for alpha in [1.25, 1.5, 1.75] {
            let petz = linalg::trace_re(&(r.power(alpha) * s.power(1.0 - alpha)));
            let x = psd(s.power(-0.5) * r.matrix() * s.power(-0.5));
            let maxq = linalg::trace_re(&(s.power(0.5) * x.power(alpha) * s.power(0.5)));
            prop_assert!(petz <= maxq + 1e-12);
            if strict {
                prop_assert!(maxq - petz > 1e-9);
            }
        }
    }

    #[test]
    fn region_claims_hold_under_fixing_maps(seed in any::<u64>(), alpha in 0.05f64..0.95, t in 0.0f64..1.0) {
        let z = alpha + t * (1.0 - alpha);
        let p = AzParams::new(alpha, z).unwrap();
        prop_assert!(azrenyi::monotonicity_region(p, azrenyi::RegionContext::FixedSigma).monotone_claimed);
        let worst = azrenyi::observed_violation(p, azrenyi::RegionContext::FixedSigma, 3, 2, seed).unwrap();
        prop_assert!(worst <= 1e-8);
    }
}

#[test]
fn isometric_embedding_is_reversible() {
    let (r, s, mut rng) = pair(3, 1);
    let v = linalg::haar_isometry(5, 3, &mut rng);
    let phi = QuantumChannel::new(vec![v]).unwrap();
    let rep = reversibility::standard_preservation_report(&phi, &r, &s, &reversibility::default_f_list(), &reversibility::DEFAULT_Z_GRID)
        .unwrap();
    assert!(rep.max_residual() < 1e-9, "{}", rep.table());
    assert!(rep.consistent);
}

#[test]
fn pinsker_exact_constants() {
    assert_eq!(f("eta").second_derivative_at_1(), 1.0);
    assert!((f("gs:1").second_derivative_at_1() - 1.0).abs() < 1e-15);
    let (r, s, _) = pair(3, 4);
    let cert = measured::pinsker_certificate(&f("eta"), &r, &s).unwrap();
    assert!(cert.pass);
}
