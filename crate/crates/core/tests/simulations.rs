use chanres::exponents::{capacity, psi_maximand, psi_worst};
use chanres::identification::{
    assemble_id_code, build_set_family, eval_id_code, select_codewords, AdParams, IdParams,
};
use chanres::numeric::mean_and_std_error;
use chanres::resolvability::{
    brute_force_min, mc_expectation, sample_code, sample_qualities, ResolvabilityCode,
};
use chanres::rng::stream;
use chanres::wiretap::{
    construct_until_bounds, eval_wiretap, sample_wiretap_code_with, wiretap_bounds, DecoderKind,
    WiretapModel, WiretapParams,
};
use chanres::{Channel, Distribution, EnumerationBudget, Memoryless};
use rand::Rng;

fn budget() -> EnumerationBudget {
    EnumerationBudget::default()
}

fn bsc_model(w: f64, n: usize) -> Memoryless {
    Memoryless::new(
        Channel::bsc(w).unwrap(),
        Distribution::uniform(2),
        n,
        &budget(),
    )
    .unwrap()
}

fn random_channel(rng: &mut impl Rng, inputs: usize, outputs: usize) -> Channel {
    let rows = (0..inputs)
        .map(|_| {
            let w: Vec<f64> = (0..outputs).map(|_| rng.random::<f64>() + 0.05).collect();
            Distribution::from_weights(&w).unwrap().probs().to_vec()
        })
        .collect();
    Channel::new(rows).unwrap()
}

#[test]
fn lemma_bounds_hold_in_expectation() {
    let model = bsc_model(0.1, 4);
    for size in [4, 16] {
        for c in [1f64.exp(), 2f64.exp()] {
            let report = mc_expectation(&model, size, c, 2000, 17, &budget()).unwrap();
            assert!(report.vd.within(3.0), "vd {:?}", report.vd);
            let kl = report.kl_eta.mean;
            assert!(kl <= report.kl_bound() + 3.0 * report.kl_eta.std_error);
        }
    }
}

#[test]
fn single_codeword_estimate_is_exact() {
    let model = bsc_model(0.1, 1);
    let report = mc_expectation(&model, 1, 1.9, 150, 3, &budget()).unwrap();
    assert!((report.vd.mean - 0.8).abs() < 1e-14);
    assert_eq!(report.vd.std_error, 0.0);
    assert!((report.vd.bound - 1.64f64.sqrt()).abs() < 1e-12);
    assert!((report.kl_eta.mean - 0.368_064_207_168_497_1).abs() < 1e-12);
}

#[test]
fn distance_decays_like_inverse_root() {
    let model = Memoryless::single(Channel::identity(2), Distribution::uniform(2)).unwrap();
    let sizes = [16usize, 64, 256, 1024];
    let points: Vec<(f64, f64)> = sizes
        .iter()
        .map(|&m| {
            let q = sample_qualities(&model, m, 400, 5).unwrap();
            let eps: Vec<f64> = q.iter().map(|v| v.eps).collect();
            ((m as f64).ln(), mean_and_std_error(&eps).0.ln())
        })
        .collect();
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let slope = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
        / points.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    assert!((slope + 0.5).abs() <= 0.15, "slope {slope}");
}

#[test]
fn monte_carlo_never_beats_exhaustive_search() {
    let mut rng = stream(99, 0);
    for instance in 0..10 {
        let k = rng.random_range(2..=3);
        let l = rng.random_range(2..=3);
        let w = random_channel(&mut rng, k, l);
        let model = Memoryless::single(w, Distribution::uniform(k)).unwrap();
        let size = rng.random_range(1..=3);
        let exact = brute_force_min(size, &model).unwrap();
        let sampled = sample_qualities(&model, size, 200, instance).unwrap();
        let best_eps = sampled.iter().map(|q| q.eps).fold(f64::INFINITY, f64::min);
        let best_div = sampled.iter().map(|q| q.div).fold(f64::INFINITY, f64::min);
        assert!(best_eps + 1e-12 >= exact.eps_min);
        assert!(best_div + 1e-12 >= exact.div_min);
    }
}

#[test]
fn sampled_codes_are_reproducible() {
    let p = Distribution::new(vec![0.2, 0.3, 0.5]).unwrap();
    let a = sample_code(&p, 50, 11).unwrap();
    assert_eq!(a, sample_code(&p, 50, 11).unwrap());
    assert_ne!(a, sample_code(&p, 50, 12).unwrap());
    let point = Distribution::point(2, 0);
    assert_eq!(
        sample_code(&point, 3, 1).unwrap(),
        ResolvabilityCode::new(vec![0, 0, 0]).unwrap()
    );
}

#[test]
fn capacity_oracles() {
    for w in [0.05, 0.1, 0.25] {
        let h = -(w * f64::ln(w) + (1.0 - w) * f64::ln(1.0 - w));
        let c = capacity(&Channel::bsc(w).unwrap()).unwrap();
        assert!((c.value - (std::f64::consts::LN_2 - h)).abs() < 1e-6);
    }
    for k in 2..=4 {
        let c = capacity(&Channel::identity(k)).unwrap();
        assert!((c.value - (k as f64).ln()).abs() < 1e-12);
    }
}

#[test]
fn worst_case_single_letterizes() {
    let mut rng = stream(7, 0);
    let w = random_channel(&mut rng, 2, 2);
    let product = w.product(2, &budget()).unwrap();
    let s = 0.3;
    let mut best = f64::NEG_INFINITY;
    let steps = 50;
    for a in 0..=steps {
        for b in 0..=steps - a {
            for c in 0..=steps - a - b {
                let d = steps - a - b - c;
                let p =
                    Distribution::from_weights(&[a as f64, b as f64, c as f64, d as f64]).unwrap();
                best = best.max(psi_maximand(s, &product, &p).unwrap());
            }
        }
    }
    let single = psi_worst(s, &w).unwrap().value;
    assert!((best - 2.0 * single).abs() < 1e-3);
}

#[test]
fn ad_family_reaches_its_guaranteed_size() {
    let params = AdParams::new(100, 0.1, 0.8).unwrap();
    let build = build_set_family(&params, None, 3, 100_000).unwrap();
    assert!(build.complete);
    assert_eq!(build.family.len(), 81);
    assert!(build.family.subsets.iter().all(|s| s.len() == 10));
    assert!(build.family.max_intersection() <= 7);
    build.family.verify(&params).unwrap();
    assert!(AdParams::new(100, 0.1, 0.5).is_err());
}

#[test]
fn identification_code_meets_its_guarantees() {
    // a 512-ary symmetric channel is noisy enough to be interesting and clean enough for the
    // construction to be guaranteed
    let k = 512;
    let eps = 0.01;
    let rows = (0..k)
        .map(|x| {
            (0..k)
                .map(|y| {
                    if x == y {
                        1.0 - eps
                    } else {
                        eps / (k - 1) as f64
                    }
                })
                .collect()
        })
        .collect();
    let model = Memoryless::single(Channel::new(rows).unwrap(), Distribution::uniform(k)).unwrap();
    let params = IdParams::new(12.0, 1.1, 4.0, 2.0, 40, 400.0).unwrap();
    let ad = AdParams::new(40, 0.155, 0.9995).unwrap();
    let selection = select_codewords(&model, &params, 8, 50, false, &budget()).unwrap();
    assert!(selection.bounds.feasible);
    let family = build_set_family(&ad, None, 8, 10_000).unwrap().family;
    let code = assemble_id_code(&selection.codewords, &family, &model, params.threshold).unwrap();
    let errors = eval_id_code(&code, &model).unwrap();
    assert!(errors.mu <= selection.bounds.mu_bound);
    assert!(errors.lambda <= selection.bounds.lambda_bound(ad.kappa));
}

fn wiretap_pair(n: usize) -> WiretapModel {
    WiretapModel::new(bsc_model(0.1, n), bsc_model(0.3, n)).unwrap()
}

#[test]
fn wiretap_means_respect_expectation_bounds() {
    let model = wiretap_pair(3);
    let (m, l) = (2, 4);
    let (c, c_prime) = (0.6f64.exp(), 1.8f64.exp());
    let bounds = wiretap_bounds(
        &model,
        &WiretapParams::new(m, l, c, c_prime).unwrap(),
        &budget(),
    )
    .unwrap();
    let mut samples = [Vec::new(), Vec::new(), Vec::new(), Vec::new()];
    for trial in 0..500 {
        let mut rng = stream(21, trial);
        let code = sample_wiretap_code_with(
            &model.bob,
            m,
            l,
            DecoderKind::MaximumLikelihood,
            c_prime,
            &mut rng,
        )
        .unwrap();
        let threshold = chanres::wiretap::WiretapCode::with_decoder(
            code.classes.clone(),
            &model.bob,
            DecoderKind::Threshold,
            c_prime,
        )
        .unwrap();
        let r = eval_wiretap(&code, &model).unwrap();
        let t = eval_wiretap(&threshold, &model).unwrap();
        assert!(r.eps_b <= t.eps_b + 1e-15);
        samples[0].push(r.eps_b);
        samples[1].push(t.eps_b);
        samples[2].push(r.i_e);
        samples[3].push(r.d_e);
    }
    let checks = [
        bounds.error_gallager / 3.0,
        bounds.error_threshold / 3.0,
        bounds.leak_bound() / 3.0,
        bounds.distance / 3.0,
    ];
    for (values, bound) in samples.iter().zip(checks) {
        let (mean, se) = mean_and_std_error(values);
        assert!(mean <= bound + 3.0 * se, "mean {mean} bound {bound}");
    }
}

#[test]
fn wiretap_fixture_construction() {
    let model = wiretap_pair(4);
    let params = WiretapParams::new(2, 4, 0.8f64.exp(), 2.2f64.exp()).unwrap();
    for kind in [DecoderKind::MaximumLikelihood, DecoderKind::Threshold] {
        let built = construct_until_bounds(&model, &params, kind, 2024, 20, &budget()).unwrap();
        assert!(built.satisfied.all());
        assert!(built.report.decomposition_residual <= 1e-9);
        assert_eq!(built.attempts, 1);
    }
}
