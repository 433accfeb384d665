//! Fast-path implementations checked against the brute-force references
//! from `testutil`: separable vs. full convolution, the early-exit extrema
//! scan vs. a neighbor-list scan, the streaming matcher vs. a
//! distance-matrix matcher, and quadratic refinement vs. the closed form.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sift_core::keypoint::{detect_extrema, refine_extremum, DetectorParams};
use sift_core::matching::match_descriptors;
use sift_core::pyramid::DogPyramid;
use sift_core::raster::{convolve_separable, gaussian_kernel};
use sift_core::testutil::{
    random_dog_pyramid, random_keypoint_set, random_smooth_image, reference_extrema,
    reference_gaussian_blur, reference_match, Quadratic,
};

#[test]
fn separable_blur_equals_full_convolution() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0001);
    for round in 0..20 {
        let img = random_smooth_image(&mut rng, 32, 32);
        for sigma in [0.5, 1.0, 1.6, 3.2] {
            let fast = convolve_separable(&img, &gaussian_kernel(sigma).unwrap());
            let slow = reference_gaussian_blur(&img, sigma);
            let worst = fast
                .pixels()
                .iter()
                .zip(slow.pixels())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            assert!(
                worst <= 1e-6,
                "round {round} sigma {sigma}: max abs diff {worst}"
            );
        }
    }
}

#[test]
fn extrema_scan_equals_reference() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0002);
    let mut total = 0;
    for _ in 0..20 {
        let dog = random_dog_pyramid(&mut rng, 16, 16, 5);
        let fast = detect_extrema(&dog);
        let slow = reference_extrema(&dog);
        assert_eq!(fast, slow);
        total += fast.len();
    }
    assert!(total > 0, "random stacks produced no extrema at all");
}

#[test]
fn extrema_scan_equals_reference_on_real_pyramids() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0003);
    let img = random_smooth_image(&mut rng, 64, 64);
    let pyr = sift_core::pyramid::GaussianPyramid::build(
        &img,
        &sift_core::pyramid::PyramidParams::default(),
    )
    .unwrap();
    let dog = DogPyramid::build(&pyr);
    assert_eq!(detect_extrema(&dog), reference_extrema(&dog));
}

#[test]
fn matcher_equals_reference_on_random_sets() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0004);
    for round in 0..50 {
        let n_a = rng.gen_range(0..=50);
        let n_b = rng.gen_range(0..=50);
        let a = random_keypoint_set(&mut rng, n_a);
        let b = random_keypoint_set(&mut rng, n_b);
        let fast = match_descriptors(&a, &b, 0.8);
        let slow = reference_match(&a, &b, 0.8);
        assert_eq!(fast, slow, "round {round} ({n_a} x {n_b})");
    }
}

#[test]
fn matcher_equals_reference_with_duplicates_present() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0005);
    let mut a = random_keypoint_set(&mut rng, 20);
    let mut b = random_keypoint_set(&mut rng, 20);
    // Plant shared descriptors and in-set duplicates to force ties.
    b[3].descriptor = a[5].descriptor;
    b[7] = b[3].clone();
    a[9].descriptor = a[5].descriptor;
    let fast = match_descriptors(&a, &b, 0.8);
    let slow = reference_match(&a, &b, 0.8);
    assert_eq!(fast, slow);
}

#[test]
fn refinement_reaches_the_closed_form_optimum() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0006);
    let params = DetectorParams::default();
    for round in 0..100 {
        let q = Quadratic::random(&mut rng, 12, 12);
        let oct = q.dog_octave(12, 12);
        let refined = refine_extremum(&oct, &q.start(), &params)
            .unwrap_or_else(|| panic!("round {round}: refinement rejected {q:?}"));
        assert!(
            (refined.x_oct - q.center[0]).abs() <= 1e-9,
            "round {round}: x {} vs {}",
            refined.x_oct,
            q.center[0]
        );
        assert!((refined.y_oct - q.center[1]).abs() <= 1e-9);
        assert!((refined.level_f - q.center[2]).abs() <= 1e-9);
        assert!((refined.response - q.peak).abs() <= 1e-9);
    }
}
