use proptest::prelude::*;
use runlength_core::rational::{int, ratio};
use runlength_core::{closed_form, simulator, transfer, Params, RationalMatrix, TreeModel};

fn params(max_m: u32, max_n: u32) -> impl Strategy<Value = Params> {
    (1..=max_m, 1..=max_n).prop_map(|(m, n)| Params::new(m, n).unwrap())
}

proptest! {
    #[test]
    fn closed_form_identities(p in params(40, 60)) {
        let report = runlength_core::MomentReport::closed(p);
        prop_assert!(report.is_consistent());
    }

    #[test]
    fn common_subpath_is_symmetric(p in params(5, 4), a in any::<u64>(), b in any::<u64>()) {
        let tree = TreeModel::new(p).unwrap();
        let (a, b) = (a % tree.node_count(), b % tree.node_count());
        prop_assert_eq!(tree.common_subpath_length(a, b).unwrap(), tree.common_subpath_length(b, a).unwrap());
        prop_assert_eq!(tree.common_subpath_length(a, a).unwrap(), tree.depth(a));
        prop_assert!(tree.depth(a) <= p.n());
    }

    #[test]
    fn distribution_conserves_mass(m in 2u32..=5, n in 1u32..=4, den in 2i64..=5000) {
        let p = Params::new(m, n).unwrap();
        let d = transfer::distribution(p, &ratio(1, den)).unwrap();
        prop_assert_eq!(d.cumulative() + &d.tail, int(1));
        prop_assert!(d.tail <= ratio(1, den));
        prop_assert!(d.probs.iter().all(|(k, pk)| *k >= u64::from(n) && *pk >= int(0)));
    }

    #[test]
    fn inverse_round_trip(m in 2u32..=9, n in 1u32..=10) {
        let p = Params::new(m, n).unwrap();
        let w = transfer::build_w(p).unwrap();
        let id = RationalMatrix::identity(w.rows());
        let inv = transfer::fundamental_inverse(p).unwrap();
        prop_assert_eq!(&inv * &(&id - &w), id);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn simulation_ignores_worker_count(m in 1u32..=4, n in 1u32..=3, seed in any::<u64>()) {
        let p = Params::new(m, n).unwrap();
        let trials = 3 * simulator::BLOCK_SIZE / 2;
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| simulator::simulate(p, trials, seed).unwrap())
        };
        let one = run(1);
        prop_assert_eq!(&one, &run(3));
        prop_assert_eq!(one.histogram.values().sum::<u64>(), trials);
    }
}

#[test]
fn sample_histogram_tracks_exact_law() {
    for n in 1..=3 {
        let p = Params::new(2, n).unwrap();
        let sim = simulator::simulate(p, 400_000, 2024).unwrap();
        for (&k, &count) in &sim.histogram {
            if count < 50 {
                continue;
            }
            let exact = runlength_core::rational::to_f64(&transfer::success_probability(p, k).unwrap());
            let observed = count as f64 / sim.trials as f64;
            let band = 4.0 * (exact * (1.0 - exact) / sim.trials as f64).sqrt();
            assert!((observed - exact).abs() <= band, "n={n} k={k}: {observed} vs {exact}");
        }
        let expectation = closed_form::expectation_closed(p);
        assert!((sim.mean - expectation.to_string().parse::<f64>().unwrap()).abs() < 5.0 * sim.std_error_of_mean);
    }
}
