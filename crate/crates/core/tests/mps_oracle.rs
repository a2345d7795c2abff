mod common;

use common::*;
use datawave::analysis::page_curve;
use datawave::mps::{entanglement_entropy, SchmidtSpectrum};
use datawave::{Bipartition, BinaryImage, Mps};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn sign_aligned(a: &[f64], b: &[f64]) -> f64 {
    let k = a.iter().enumerate().max_by(|x, y| x.1.abs().total_cmp(&y.1.abs())).unwrap().0;
    if a[k] * b[k] < 0.0 {
        -1.0
    } else {
        1.0
    }
}

#[test]
fn amplitude_matches_dense_expansion() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mps = Mps::<f64>::random(6, 3, &mut rng).unwrap();
    let state = dense(&mps);
    let lib = mps.to_dense().unwrap();
    for idx in 0..64 {
        let x = BinaryImage::from_bits(bits_of(idx, 6)).unwrap();
        let a = mps.amplitude(&x).unwrap();
        assert!((a - state[idx]).abs() < 1e-12);
        assert!((lib[idx] - state[idx]).abs() < 1e-12);
        let la = mps.log_amplitude(&x).unwrap();
        assert!((la.value() - a).abs() < 1e-12);
    }
}

#[test]
fn canonical_models_are_normalized() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for trial in 0..20 {
        let n = 4 + trial % 9;
        let mut mps = Mps::<f64>::random_raw(n, 5, &mut rng).unwrap();
        mps.canonicalize(trial % n).unwrap();
        let total: f64 = dense(&mps).iter().map(|a| a * a).sum();
        assert!((total - 1.0).abs() < 1e-10, "n = {n}: {total}");
    }
}

#[test]
fn scaled_model_normalizes() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut mps = Mps::<f64>::random_raw(8, 4, &mut rng).unwrap();
    let mut sites = mps.sites().to_vec();
    sites[2].data_mut().iter_mut().for_each(|x| *x *= 7.0);
    mps = Mps::from_sites(sites, 4).unwrap();
    mps.canonicalize(5).unwrap();
    let total: f64 = dense(&mps).iter().map(|a| a * a).sum();
    assert!((total - 1.0).abs() < 1e-10);
}

#[test]
fn canonicalization_preserves_the_state() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for n in [3, 6, 10] {
        let raw = Mps::<f64>::random_raw(n, 4, &mut rng).unwrap();
        let before = dense(&raw);
        let norm = before.iter().map(|a| a * a).sum::<f64>().sqrt();
        let mut c = raw.clone();
        c.canonicalize(n / 2).unwrap();
        let after = dense(&c);
        let sign = sign_aligned(&before, &after);
        for (a, b) in before.iter().zip(&after) {
            assert!((a / norm - sign * b).abs() < 1e-10);
        }
        let again = c.canonicalized(n / 2).unwrap();
        for (a, b) in after.iter().zip(dense(&again)) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}

#[test]
fn center_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut mps = Mps::<f64>::random(6, 4, &mut rng).unwrap();
    let before = dense(&mps);
    mps.move_center(5).unwrap();
    assert!(mps.orthogonality_residuals().unwrap().iter().all(|&r| r < 1e-10));
    mps.move_center(0).unwrap();
    assert!(mps.orthogonality_residuals().unwrap().iter().all(|&r| r < 1e-10));
    for (a, b) in before.iter().zip(dense(&mps)) {
        assert!((a - b).abs() < 1e-10);
    }
    assert!(mps.move_center(6).is_err());
}

#[test]
fn schmidt_values_match_dense_svd() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for n in [4, 8, 10] {
        let mps = Mps::<f64>::random(n, 4, &mut rng).unwrap();
        let state = dense(&mps);
        let curve = page_curve(&mps, (1, n - 1)).unwrap();
        for k in 1..n {
            let want = dense_schmidt(&state, n, k);
            let got = mps.schmidt_spectrum(Bipartition::new(k, n).unwrap()).unwrap();
            assert!((got.sum_of_squares() - 1.0).abs() < 1e-8);
            for (i, g) in got.values.iter().enumerate() {
                assert!((g - want[i]).abs() < 1e-8, "n {n} cut {k}");
            }
            assert!((curve.s_k[k - 1] - entropy(&want)).abs() < 1e-8);
            let bond = mps.bond_dims()[k - 1] as f64;
            assert!(curve.s_k[k - 1] <= bond.ln() + 1e-12);
        }
    }
}

#[test]
fn uniform_spectrum_entropy() {
    for d in [1usize, 2, 5, 30] {
        let s = SchmidtSpectrum { values: vec![1.0 / (d as f64).sqrt(); d] };
        assert!((entanglement_entropy(&s) - (d as f64).ln()).abs() < 1e-12);
    }
}

#[test]
fn mpsw_round_trip_of_trained_shape() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mps = Mps::<f64>::random(20, 7, &mut rng).unwrap();
    let back = Mps::<f64>::from_bytes(&mps.to_bytes()).unwrap();
    assert_eq!(back.to_bytes(), mps.to_bytes());
    assert_eq!(back.ortho_center(), Some(0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn normalization_holds_for_any_seed(seed in any::<u64>(), n in 2usize..=12, cap in 2usize..=6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mps = Mps::<f64>::random(n, cap, &mut rng).unwrap();
        let total: f64 = dense(&mps).iter().map(|a| a * a).sum();
        prop_assert!((total - 1.0).abs() < 1e-10);
    }
}
