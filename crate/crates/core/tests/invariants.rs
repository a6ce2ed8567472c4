use msl_unmix::cube::PhotonCube;
use msl_unmix::estimators::{mmse_abundances, rmse};
use msl_unmix::io::{format_cube, format_endmembers, format_irf, parse_cube, parse_endmembers, parse_irf};
use msl_unmix::irf::BandResponse;
use msl_unmix::likelihood::{direct_pixel_log_lik, poisson_log_pmf};
use msl_unmix::priors::ising::{ising_local_log_odds, ising_suff_stats, IsingBeta};
use msl_unmix::priors::tv::{neighbor_depths, tv_potential};
use msl_unmix::sampler::depth::depth_conditional;
use msl_unmix::sampler::labels::label_colour;
use msl_unmix::sim::{make_irf_set, thin_cube};
use msl_unmix::{build_suff_stats, DepthSupport, EndmemberLibrary, GridDims, ImpulseResponseSet};
use proptest::prelude::*;
use statrs::function::factorial::ln_factorial;

fn dims_strategy(max_side: usize, max_band: usize, max_bin: usize) -> impl Strategy<Value = GridDims> {
    (1..=max_side, 1..=max_side, 1..=max_band, 4..=max_bin).prop_map(|(r, c, l, t)| GridDims::new(r, c, l, t, 2.0).unwrap())
}

fn cube_strategy(max_side: usize, max_band: usize, max_bin: usize) -> impl Strategy<Value = PhotonCube> {
    dims_strategy(max_side, max_band, max_bin).prop_flat_map(|d| {
        let n = d.n_pixels() * d.n_band * d.n_bin;
        prop::collection::vec(prop_oneof![6 => Just(0u32), 3 => 1u32..4, 1 => 4u32..40], n)
            .prop_map(move |dense| PhotonCube::from_dense(d, &dense).unwrap())
    })
}

fn depth_map(n_row: usize, n_col: usize) -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(0usize..12, n_row * n_col)
}

fn transpose(t: &[usize], n_row: usize, n_col: usize) -> Vec<usize> {
    (0..n_row * n_col).map(|k| t[(k % n_row) * n_col + k / n_row]).collect()
}

proptest! {
    #[test]
    fn cube_dense_round_trip_keeps_counts_and_totals(cube in cube_strategy(4, 3, 12)) {
        let back = PhotonCube::from_dense(*cube.dims(), &cube.to_dense()).unwrap();
        prop_assert_eq!(&back, &cube);
        let d = *cube.dims();
        for p in 0..d.n_pixels() {
            for l in 0..d.n_band {
                let sum: u64 = (1..=d.n_bin).map(|t| u64::from(cube.get(p / d.n_col, p % d.n_col, l, t))).sum();
                prop_assert_eq!(cube.y_tilde(p, l), sum);
            }
        }
    }

    #[test]
    fn cube_text_round_trip(cube in cube_strategy(3, 3, 10)) {
        prop_assert_eq!(parse_cube(&format_cube(&cube), "mem").unwrap(), cube);
    }

    #[test]
    fn endmember_text_round_trip(l in 1usize..6, r in 1usize..5, seed in any::<u64>()) {
        let mut rng = msl_unmix::rng::site_rng(seed, 0, msl_unmix::Stage::SceneLayout, 0);
        let m: Vec<f64> = (0..l * r).map(|_| rng.uniform() * 10f64.powi((rng.uniform() * 6.0) as i32 - 3)).collect();
        let lib = EndmemberLibrary::from_matrix(l, r, m).unwrap();
        prop_assert_eq!(parse_endmembers(&format_endmembers(&lib), "mem").unwrap(), lib);
    }

    #[test]
    fn dense_irf_text_round_trip(values in prop::collection::vec(prop::collection::vec(0.0f64..5.0, 9), 1..4)) {
        let bands: Vec<BandResponse> = values.into_iter().map(|mut v| { v[0] += 0.1; BandResponse::Dense(v) }).collect();
        let irf = ImpulseResponseSet::new(9, bands).unwrap();
        let back = parse_irf(&format_irf(&irf), "mem", 9).unwrap();
        prop_assert_eq!(back.bands(), irf.bands());
    }

    #[test]
    fn poisson_pmf_sums_to_one(lambda in 0.0f64..60.0) {
        let k_max = (lambda + 12.0 * lambda.sqrt() + 30.0) as i64;
        let total: f64 = (0..=k_max).map(|k| poisson_log_pmf(k, lambda).unwrap().exp()).sum();
        prop_assert!((total - 1.0).abs() < 1e-9, "{}", total);
    }

    #[test]
    fn table_log_likelihood_matches_direct_sum(
        cube in cube_strategy(2, 4, 32),
        lambda in prop::collection::vec(0.01f64..20.0, 4),
        shapes in prop::collection::vec(prop::collection::vec(0.01f64..1.0, 32), 4),
        pick in 0.0f64..1.0,
    ) {
        let d = *cube.dims();
        let bands = shapes[..d.n_band].iter().map(|s| BandResponse::Dense(s[..d.n_bin].to_vec())).collect();
        let irf = ImpulseResponseSet::new(d.n_bin, bands).unwrap();
        let sup = DepthSupport::new(1, d.n_bin.min(8), d.n_bin).unwrap();
        let stats = build_suff_stats(&cube, &irf, sup);
        let lam = &lambda[..d.n_band];
        for p in 0..d.n_pixels() {
            let t0 = sup.bin_at(((pick * sup.len() as f64) as usize).min(sup.len() - 1));
            let log_fact: f64 = (0..d.n_band)
                .flat_map(|l| cube.histogram(p, l).1.iter().map(|&c| ln_factorial(u64::from(c))).collect::<Vec<_>>())
                .sum();
            let table = stats.pixel_log_lik(p, lam, t0) - log_fact;
            let direct = direct_pixel_log_lik(&cube, &irf, p, lam, t0);
            let same = table == direct || (table - direct).abs() < 1e-10 * direct.abs().max(1.0);
            prop_assert!(same, "{} vs {}", table, direct);
        }
    }

    #[test]
    fn thinning_never_adds_photons(cube in cube_strategy(3, 2, 8), keep in 0.0f64..=1.0, seed in any::<u64>()) {
        let thin = thin_cube(&cube, keep, seed).unwrap();
        let (a, b) = (cube.to_dense(), thin.to_dense());
        prop_assert!(a.iter().zip(&b).all(|(x, y)| y <= x));
        if keep == 1.0 {
            prop_assert_eq!(thin, cube);
        }
    }

    #[test]
    fn tv_is_shift_and_transpose_invariant((n_row, n_col, t) in (1usize..5, 1usize..5).prop_flat_map(|(r, c)| (Just(r), Just(c), depth_map(r, c))), k in 0usize..20) {
        let phi = tv_potential(&t, n_row, n_col);
        let shifted: Vec<usize> = t.iter().map(|v| v + k).collect();
        prop_assert_eq!(tv_potential(&shifted, n_row, n_col), phi);
        prop_assert_eq!(tv_potential(&transpose(&t, n_row, n_col), n_col, n_row), phi);
    }

    #[test]
    fn local_depth_conditional_matches_global_normalisation(
        (n_row, n_col) in (1usize..=2, 1usize..=3),
        t_raw in prop::collection::vec(0usize..6, 6),
        eps in 0.0f64..2.0,
        lambda in prop::collection::vec(0.1f64..4.0, 2),
        dense in prop::collection::vec(prop_oneof![3 => Just(0u32), 1 => 1u32..5], 2 * 3 * 2 * 12),
        site in 0usize..6,
    ) {
        let d = GridDims::new(n_row, n_col, 2, 12, 2.0).unwrap();
        let cube = PhotonCube::from_dense(d, &dense[..d.n_pixels() * 24]).unwrap();
        let irf = make_irf_set(12, 2.0, 2, (6.0, 8.0), &[1.0, 0.8], &[0.0, 1.0]).unwrap();
        let sup = DepthSupport::new(3, 8, 12).unwrap();
        let stats = build_suff_stats(&cube, &irf, sup);
        let n = d.n_pixels();
        let p = site % n;
        let mut t: Vec<usize> = t_raw[..n].iter().map(|v| sup.bin_at(*v)).collect();
        let mut nb = Vec::new();
        neighbor_depths(&t, p, n_row, n_col, &mut nb);
        let local = depth_conditional(&stats, p, &lambda, &nb, eps);

        let mut base = vec![0.0; sup.len()];
        stats.depth_log_lik_into(p, &lambda, &mut base);
        let log_w: Vec<f64> = (0..sup.len())
            .map(|k| {
                t[p] = sup.bin_at(k);
                base[k] - eps * tv_potential(&t, n_row, n_col)
            })
            .collect();
        let m = log_w.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let z: f64 = log_w.iter().map(|v| (v - m).exp()).sum();
        let tv: f64 = 0.5 * log_w.iter().zip(&local).map(|(w, q)| ((w - m).exp() / z - q).abs()).sum::<f64>();
        prop_assert!(tv < 1e-12, "{}", tv);
    }

    #[test]
    fn ising_local_odds_match_enumeration(
        (n_row, n_col, n_band) in (1usize..=2, 1usize..=2, 1usize..=3),
        code in 0u32..4096,
        bn in -1.0f64..1.0, bl in -1.0f64..1.0, b0 in 0.0f64..1.0,
    ) {
        let sites = n_row * n_col * n_band;
        let b = IsingBeta { n: bn, l: bl, zero: b0 };
        let mut z: Vec<u8> = (0..sites).map(|s| ((code >> s) & 1) as u8).collect();
        for s in 0..sites {
            let (w0, w1) = ising_local_log_odds(&z, s / n_band, s % n_band, n_row, n_col, n_band, &b);
            z[s] = 0;
            let e0 = ising_suff_stats(&z, n_row, n_col, n_band).log_weight(&b);
            z[s] = 1;
            let e1 = ising_suff_stats(&z, n_row, n_col, n_band).log_weight(&b);
            z[s] = ((code >> s) & 1) as u8;
            prop_assert!(((w1 - w0) - (e1 - e0)).abs() < 1e-12);
        }
    }

    #[test]
    fn neutral_ising_prior_is_fair_coin(code in 0u32..4096) {
        let b = IsingBeta { n: 0.0, l: 0.0, zero: 0.5 };
        let z: Vec<u8> = (0..12).map(|s| ((code >> s) & 1) as u8).collect();
        for s in 0..12 {
            let (w0, w1) = ising_local_log_odds(&z, s / 3, s % 3, 2, 2, 3, &b);
            prop_assert_eq!(w0, w1);
        }
    }

    #[test]
    fn colour_classes_separate_neighbours(i in 0usize..50, j in 0usize..50, l in 0usize..20) {
        let c = label_colour(i, j, l);
        prop_assert_ne!(c, label_colour(i + 1, j, l));
        prop_assert_ne!(c, label_colour(i, j + 1, l));
        prop_assert_ne!(c, label_colour(i, j, l + 1));
        prop_assert_ne!((i + j) % 2, (i + 1 + j) % 2);
    }

    #[test]
    fn gaussian_response_is_symmetric_and_nonnegative(fwhm in 4.0f64..40.0, n_bin in 40usize..120) {
        let irf = make_irf_set(n_bin, 2.0, 1, (fwhm, fwhm), &[1.0], &[0.0]).unwrap();
        let k = irf.kernel(0);
        prop_assert!(k.values.iter().all(|&v| v >= 0.0));
        let BandResponse::Gaussian { mu, .. } = irf.bands()[0] else { panic!("parametric band expected") };
        for lag in k.first_lag..=k.last_lag() {
            let mirror = (2.0 * mu - lag as f64).round() as i64;
            if (2.0 * mu - lag as f64 - mirror as f64).abs() < 1e-9 && mirror >= k.first_lag && mirror <= k.last_lag() {
                prop_assert!((k.at(lag) - k.at(mirror)).abs() < 1e-12 * k.at(lag).max(1e-300));
            }
        }
    }

    #[test]
    fn rmse_is_a_symmetric_distance(a in prop::collection::vec(0usize..100, 1..40), shift in prop::collection::vec(0usize..5, 40)) {
        let d = GridDims::new(1, a.len(), 1, 160, 2.0).unwrap();
        let b: Vec<usize> = a.iter().zip(&shift).map(|(x, s)| x + s).collect();
        let (ab, ba) = (rmse(&a, &b, &d).unwrap(), rmse(&b, &a, &d).unwrap());
        prop_assert_eq!(ab, ba);
        prop_assert!(ab >= 0.0);
        prop_assert_eq!(ab == 0.0, a == b);
    }

    #[test]
    fn mmse_ignores_sample_order(samples in prop::collection::vec(prop::collection::vec(0.0f64..3.0, 4), 1..20), rot in 0usize..20) {
        let mut perm = samples.clone();
        perm.reverse();
        let k = rot % perm.len();
        perm.rotate_left(k);
        let (a, b) = (mmse_abundances(&samples).unwrap(), mmse_abundances(&perm).unwrap());
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() < 1e-12);
        }
    }
}
