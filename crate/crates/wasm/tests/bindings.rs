use phidro_wasm::*;

#[test]
fn density_integrates_to_one() {
    for div in ["kl", "quadratic", "indicator:0.3"] {
        let d = worst_case_density(div, 0.1, 5.0, 2000, 0).unwrap();
        let h = d.omega()[1] - d.omega()[0];
        let mass: f64 = d.density().iter().sum::<f64>() * h;
        assert!((mass - 1.0).abs() < 1e-5, "{div}: {mass}");
        assert_eq!(d.loss().len(), 2000);
        assert!((0.0..=1.0 + 1e-12).contains(&d.concentration()));
    }
}

#[test]
fn bad_input_is_an_error_message() {
    assert!(worst_case_density("nope", 0.1, 5.0, 100, 0).unwrap_err().contains("nope"));
    assert!(inner_solve(vec![1.0], -1.0, "kl", 1e-8).is_err());
}

#[test]
fn kl_inner_solve_is_softmax() {
    let s = inner_solve(vec![1.0, 0.0], 1.0, "kl", 1e-10).unwrap();
    let e = std::f64::consts::E;
    assert!((s.gamma()[0] - e / (1.0 + e)).abs() < 1e-12);
    assert!((s.value() - ((1.0 + e) / 2.0).ln()).abs() < 1e-12);
}

#[test]
fn sampled_levels_follow_the_level_law() {
    let p = level_probabilities(5);
    assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    let freq = sample_level_frequencies(5, 200_000, 3);
    for (f, q) in freq.iter().zip(&p) {
        let se = (q * (1.0 - q) / 200_000.0).sqrt();
        assert!((f - q).abs() < 4.0 * se, "{f} vs {q}");
    }
    assert!((expected_samples_per_draw(5) - 6.0 / (2.0 - 1.0 / 32.0)).abs() < 1e-12);
}
