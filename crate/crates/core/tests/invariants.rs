//! Property tests for the analytic invariants of the bilateral series and
//! the completed mock theta function.

use proptest::prelude::*;
use rug::{Float, Rational};
use unitheta_core::arith::{gcd, Phase};
use unitheta_core::bilateral::{self, oracle, FParams, QuadratureParams};
use unitheta_core::maasswrt::{self, Matrix};
use unitheta_core::BigComplex;

const P: u32 = 256;

fn point(x: f64, y: f64) -> BigComplex {
    BigComplex::from_f64(x, y, P)
}

fn rel(a: &BigComplex, b: &BigComplex) -> f64 {
    ((a - b).abs() / b.abs()).to_f64()
}

fn coprime_d(k: u64, seed: u64) -> i64 {
    let m = 2 * k as i64;
    let units: Vec<i64> = (0..m).filter(|d| gcd(*d, m) == 1).collect();
    units[(seed as usize) % units.len()]
}

fn mat_mul(a: &Matrix, b: &Matrix) -> Matrix {
    let mut c = [[0i64; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    c
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, ..ProptestConfig::default() })]

    #[test]
    fn quadrature_equals_series_on_both_sides(
        x in -1.0f64..1.0, y in 0.15f64..1.5, lower in any::<bool>(), k in 1u64..6, seed in any::<u64>()
    ) {
        let z = point(x, if lower { -y } else { y });
        let d = coprime_d(k, seed);
        let qt = bilateral::twisted_nome(&z, d, k);
        let quad = &qt * &bilateral::phi_dk(&z, d, k, &QuadratureParams::default()).unwrap();
        let series = if lower { oracle::outer(&z, d, k) } else { oracle::inner(&z, d, k) }.unwrap();
        prop_assert!((&quad - &series).abs().to_f64() < 1e-20 * (1.0 + series.abs().to_f64()));
    }

    #[test]
    fn contour_radius_does_not_matter(x in -1.0f64..1.0, y in 0.1f64..1.0, rho in 0.2f64..0.8, k in 1u64..5, seed in any::<u64>()) {
        let z = point(x, y);
        let d = coprime_d(k, seed);
        let base = bilateral::phi_dk(&z, d, k, &QuadratureParams::default()).unwrap();
        let moved = QuadratureParams { radius_fraction: rho, ..QuadratureParams::default() };
        prop_assert!(rel(&bilateral::phi_dk(&z, d, k, &moved).unwrap(), &base) < 1e-25);
    }

    #[test]
    fn reflection_conjugates_partial_sums(x in -0.5f64..0.5, y in 0.1f64..1.0, lower in any::<bool>()) {
        let z = point(x, if lower { -y } else { y });
        let mirror = -z.conj();
        let params = FParams { k_max: 4, first_block: 4, ..FParams::default() };
        let a = bilateral::f_eval(&z, &params).unwrap().value;
        let b = bilateral::f_eval(&mirror, &params).unwrap().value;
        prop_assert!((&a.conj() - &b).abs().to_f64() < 1e-40);
    }

    #[test]
    fn completion_translates_by_a_fixed_phase(x in -1.0f64..1.0, y in 0.3f64..2.0) {
        let z = point(x, y);
        let shifted = &z + &BigComplex::from_f64(2.0, 0.0, P);
        let ratio = &maasswrt::h3hat(&shifted).unwrap() / &maasswrt::h3hat(&z).unwrap();
        let phase = Phase::new(Rational::from((-1, 6))).to_complex(P);
        prop_assert!((&ratio - &phase).abs().to_f64() < 1e-40);
    }

    #[test]
    fn r3_is_the_normalized_eichler_integral(x in -1.0f64..1.0, y in 0.1f64..3.0) {
        let z = point(x, y);
        let direct = maasswrt::r3(&z).unwrap();
        let eich = maasswrt::eichler_integral(&maasswrt::g3(), &z, &maasswrt::r3_normalization(P)).unwrap();
        prop_assert!(rel(&eich, &direct) < 1e-50);
    }

    #[test]
    fn completion_has_weight_one_half_on_gamma2(
        x in -0.5f64..0.5, y in 0.6f64..1.5, word in proptest::collection::vec(0u8..4, 1..3)
    ) {
        let gens: [Matrix; 4] = [[[1, 2], [0, 1]], [[1, -2], [0, 1]], [[1, 0], [2, 1]], [[1, 0], [-2, 1]]];
        let g = word.iter().fold([[1, 0], [0, 1]], |acc, &i| mat_mul(&acc, &gens[i as usize]));
        prop_assert!(maasswrt::check_gamma2(&g).is_ok());
        prop_assert!(maasswrt::modularity_check(&point(x, y), &g).unwrap() < 1e-30);
    }

    #[test]
    fn extrapolation_is_exact_on_quartics(c in proptest::collection::vec(-5i32..5, 5), t0 in 0.05f64..1.0) {
        let coeffs = c.clone();
        let poly = move |q: &BigComplex| -> unitheta_core::Result<BigComplex> {
            let t = Float::with_val(P, -q.abs().ln());
            let mut v = Float::new(P);
            for a in coeffs.iter().rev() {
                v = v * &t + *a;
            }
            Ok(BigComplex::from_real(v))
        };
        let est = maasswrt::radial_limit(poly, &Phase::one(), t0, 6, 4, P).unwrap();
        let want = BigComplex::from_f64(c[0] as f64, 0.0, P);
        prop_assert!((&est.extrapolated - &want).abs().to_f64() < 1e-50);
    }
}
