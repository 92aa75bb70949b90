// SPDX-License-Identifier: Apache-2.0

use std::collections::HashMap;

use diffpath::synth::{
    assign_patterns, generate_cascade_set, generate_kronecker, mean_delay, sample_delay, simulate_cascade_traced,
    PatternConfig,
};
use diffpath::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn network() -> GroundTruthNetwork {
    let spec = KroneckerSpec { seed: KroneckerSpec::CORE_PERIPHERY, iterations: 5, target_edges: 80 };
    let edges = generate_kronecker(&spec, 12).unwrap();
    assign_patterns(32, &edges, &PatternConfig { horizon: 5.0, ..PatternConfig::default() }, 12).unwrap()
}

#[test]
fn infection_time_is_earliest_live_proposal() {
    let net = network();
    for (i, model) in
        [TransmissionModel::exponential(), TransmissionModel::rayleigh(), TransmissionModel::power_law(0.3).unwrap()]
            .into_iter()
            .enumerate()
    {
        for seed in 0..50 {
            let root = (seed % 32) as NodeId;
            let (cascade, trace) =
                simulate_cascade_traced(&net, &model, 6.0, root, 3.0, 1000 * i as u64 + seed).unwrap();
            let mut earliest: HashMap<NodeId, f64> = HashMap::new();
            for t in &trace {
                // proposals only come from infected parents
                let parent_time = cascade.infection_time(t.parent).expect("proposal from an uninfected node");
                assert!(t.time > parent_time);
                if t.time <= cascade.window {
                    let e = earliest.entry(t.child).or_insert(f64::INFINITY);
                    *e = e.min(t.time);
                }
            }
            for ev in &cascade.events()[1..] {
                assert_eq!(
                    Some(&ev.time),
                    earliest.get(&ev.node),
                    "node {} not infected by its first proposal",
                    ev.node
                );
            }
            assert_eq!(cascade.events().len(), earliest.len() + 1 - earliest.contains_key(&root) as usize);
        }
    }
}

#[test]
fn cascade_sets_do_not_depend_on_thread_count() {
    let net = network();
    let model = TransmissionModel::exponential();
    let gen = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| generate_cascade_set(&net, &model, 6, 25, 2.0, 4).unwrap())
    };
    assert_eq!(gen(1), gen(4));
}

#[test]
fn delay_means_match_analytic_values() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for (model, alpha) in [
        (TransmissionModel::exponential(), 0.7),
        (TransmissionModel::rayleigh(), 2.0),
        (TransmissionModel::power_law(0.5).unwrap(), 4.0),
    ] {
        let n = 40_000;
        let mean = (0..n).map(|_| sample_delay(&model, alpha, &mut rng)).sum::<f64>() / n as f64;
        let expect = mean_delay(&model, alpha).unwrap();
        assert!((mean - expect).abs() < 0.03 * expect, "{model:?}: {mean} vs {expect}");
    }
    assert!(mean_delay(&TransmissionModel::power_law(1.0).unwrap(), 0.9).is_none());
}
