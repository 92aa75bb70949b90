// SPDX-License-Identifier: Apache-2.0

use std::collections::{BTreeMap, HashSet};

use diffpath::inference::{
    age_unused_edges, infer_dynamic, infer_static, infer_static_observed, sg_step, store_neg_log_likelihood,
};
use diffpath::model::{cascade_gradient, cascade_neg_log_likelihood};
use diffpath::synth::{assign_patterns, generate_cascade_set, generate_kronecker, PatternConfig};
use diffpath::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn constant_net(nodes: usize, edges: &[Edge], seed: u64) -> GroundTruthNetwork {
    let cfg = PatternConfig { kinds: vec![PatternKind::Constant], ..PatternConfig::default() };
    assign_patterns(nodes, edges, &cfg, seed).unwrap()
}

fn small_static_store(cascades: usize, window: f64) -> (GroundTruthNetwork, CascadeStore) {
    let spec = KroneckerSpec { seed: KroneckerSpec::CORE_PERIPHERY, iterations: 4, target_edges: 32 };
    let net = constant_net(16, &generate_kronecker(&spec, 4).unwrap(), 4);
    let model = TransmissionModel::exponential();
    let store = CascadeStore::new(generate_cascade_set(&net, &model, 1, cascades, window, 9).unwrap());
    (net, store)
}

#[test]
fn gradient_agrees_with_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for model in
        [TransmissionModel::exponential(), TransmissionModel::rayleigh(), TransmissionModel::power_law(0.2).unwrap()]
    {
        for _ in 0..30 {
            let times: Vec<f64> = (0..4)
                .scan(0.0, |t, _| {
                    let now = *t;
                    *t += rng.gen_range(0.3..1.2);
                    Some(now)
                })
                .collect();
            let events = times.iter().enumerate().map(|(i, &time)| Event { node: i as NodeId, time }).collect();
            let cascade = Cascade::new("g", 0.0, times[3] + 0.5, events).unwrap();
            let rates = RateSnapshot::from_rates(
                0,
                0.0,
                (0..5)
                    .flat_map(|a| (0..5).map(move |b| (a, b)))
                    .filter(|(a, b)| a != b)
                    .map(|e| (e, rng.gen_range(0.2..2.0)))
                    .collect::<Vec<_>>(),
            )
            .unwrap();
            let grad = cascade_gradient(&cascade, &rates, &model).unwrap();
            for (e, alpha) in rates.iter() {
                let h = 1e-6;
                let mut up = rates.clone();
                up.set(e, alpha + h).unwrap();
                let mut down = rates.clone();
                down.set(e, alpha - h).unwrap();
                let fd = (cascade_neg_log_likelihood(&cascade, &up, &model).unwrap()
                    - cascade_neg_log_likelihood(&cascade, &down, &model).unwrap())
                    / (2.0 * h);
                let g = grad.get(&e).copied().unwrap_or(0.0);
                assert!((g - fd).abs() <= 1e-6 * (1.0 + fd.abs()), "{e:?}: {g} vs {fd}");
            }
        }
    }
}

#[test]
fn sg_step_projects_and_stays_local() {
    let (_, store) = small_static_store(200, 2.0);
    let config = InferenceConfig { epsilon: 1e-3, gamma0: 0.5, ..InferenceConfig::default() };
    let mut rates = RateSnapshot::from_rates(0, 0.0, store.feasible_index().iter().map(|&e| (e, 0.05))).unwrap();
    for (k, cascade) in store.cascades().iter().enumerate() {
        let next = sg_step(&rates, cascade, &config, k + 1);
        let infected: HashSet<NodeId> = cascade.events().iter().map(|e| e.node).collect();
        for (e, r) in rates.iter() {
            if !infected.contains(&e.0) {
                assert_eq!(next.rate(e.0, e.1), r, "edge {e:?} of an inactive source changed");
            }
        }
        assert!(next.iter().all(|(_, r)| r >= config.epsilon));
        rates = next;
    }
}

#[test]
fn static_pair_recovers_rate() {
    // two nodes, one edge of rate 1, delays observed with generous windows
    let net = GroundTruthNetwork::new(2, vec![(0, 1, EvolutionPattern::constant(1.0))]).unwrap();
    let model = TransmissionModel::exponential();
    let cascades: Vec<Cascade> = generate_cascade_set(&net, &model, 1, 10_000, 8.0, 5)
        .unwrap()
        .into_iter()
        .filter(|c| c.events()[0].node == 0)
        .take(5000)
        .collect();
    assert_eq!(cascades.len(), 5000);
    // closed form: infections over total exposure
    let (mut hits, mut exposure) = (0.0, 0.0);
    for c in &cascades {
        match c.infection_time(1) {
            Some(t) => {
                hits += 1.0;
                exposure += t - c.start_time;
            }
            None => exposure += c.window,
        }
    }
    let mle = hits / exposure;
    let config =
        InferenceConfig { init_rate: 0.5, gamma0: 0.05, schedule: StepSchedule::InvSqrt, ..InferenceConfig::default() };
    let res = infer_static(&CascadeStore::new(cascades), &config, 30, f64::NEG_INFINITY).unwrap();
    let alpha = res.snapshot.rate(0, 1);
    assert!((alpha - 1.0).abs() < 0.1, "estimated {alpha}");
    assert!((alpha - mle).abs() < 0.02 * mle, "estimated {alpha}, closed form {mle}");
}

fn median5(xs: &[f64]) -> Vec<f64> {
    (0..xs.len())
        .map(|i| {
            let mut w = xs[i.saturating_sub(2)..(i + 3).min(xs.len())].to_vec();
            w.sort_by(f64::total_cmp);
            w[w.len() / 2]
        })
        .collect()
}

#[test]
fn likelihood_descends_in_expectation() {
    let (_, store) = small_static_store(2000, 1.0);
    let config = InferenceConfig {
        init_rate: 0.5,
        gamma0: 0.02,
        schedule: StepSchedule::InvSqrt,
        epsilon: 1e-4,
        ..InferenceConfig::default()
    };
    let model = config.model;
    let mut trace = Vec::new();
    infer_static_observed(&store, &config, 3, f64::NEG_INFINITY, 100, |_, s| {
        trace.push(store_neg_log_likelihood(&store, s, &model).0)
    })
    .unwrap();
    let smooth = median5(&trace);
    let rises: Vec<(usize, f64)> =
        smooth.windows(2).enumerate().filter(|(_, w)| w[1] > w[0]).map(|(i, w)| (i, w[1] - w[0])).collect();
    assert!(rises.is_empty(), "smoothed NLL rises at {rises:?}");
}

#[test]
fn static_solution_is_nearly_stationary() {
    let (_, store) = small_static_store(2000, 1.0);
    let config = InferenceConfig {
        init_rate: 0.5,
        gamma0: 0.02,
        schedule: StepSchedule::InvSqrt,
        epsilon: 1e-4,
        ..InferenceConfig::default()
    };
    let res = infer_static(&store, &config, 200, f64::NEG_INFINITY).unwrap();
    // assemble the full gradient at the solution, clamped rates included
    let mut rates = res.snapshot.clone();
    for &e in store.feasible_index() {
        if !rates.contains(&e) {
            rates.set(e, config.epsilon).unwrap();
        }
    }
    let mut grad: BTreeMap<Edge, f64> = BTreeMap::new();
    for c in store.cascades() {
        for (e, g) in cascade_gradient(c, &rates, &config.model).unwrap() {
            *grad.entry(e).or_default() += g;
        }
    }
    let scale = store.len() as f64;
    for (e, r) in rates.iter() {
        let g = grad.get(&e).copied().unwrap_or(0.0) / scale;
        // SG iterates hover just above the floor rather than on it
        if r <= 10.0 * config.epsilon {
            assert!(g >= -1e-3, "clamped edge {e:?} has descent direction {g}");
        } else {
            assert!(g.abs() < 0.02 * (1.0 + r), "interior edge {e:?} rate {r} gradient {g}");
        }
    }
}

#[test]
fn warm_start_settles_on_static_truth() {
    let spec = KroneckerSpec { seed: KroneckerSpec::CORE_PERIPHERY, iterations: 4, target_edges: 32 };
    let net = constant_net(16, &generate_kronecker(&spec, 2).unwrap(), 2);
    let model = TransmissionModel::exponential();
    let store = CascadeStore::new(generate_cascade_set(&net, &model, 30, 100, 1.0, 3).unwrap());
    // few iterations per step, so convergence spans several steps
    let config = InferenceConfig {
        epsilon: 0.05,
        gamma0: 0.02,
        init_rate: 0.5,
        sample_window: 3.0,
        iterations: Some(100),
        ..InferenceConfig::default()
    };
    let res = infer_dynamic(&store, (0.0, 30.0), &config).unwrap();
    // edges entering or leaving the window jump by their whole rate; compare the common ones
    let linf = |a: &RateSnapshot, b: &RateSnapshot| {
        a.iter().filter(|(e, _)| b.contains(e)).map(|((s, d), r)| (r - b.rate(s, d)).abs()).fold(0.0, f64::max)
    };
    let changes: Vec<f64> = res.snapshots.windows(2).map(|w| linf(&w[0], &w[1])).collect();
    let early = changes[..5].iter().sum::<f64>() / 5.0;
    let late = changes[changes.len() - 5..].iter().sum::<f64>() / 5.0;
    assert!(late < early, "early {early} late {late}");
}

#[test]
fn aging_compounds_exactly() {
    let rates = RateSnapshot::from_rates(3, 3.0, [((0, 1), 0.8), ((1, 0), 1.25), ((2, 0), 3.0)]).unwrap();
    let active: HashSet<NodeId> = [2].into_iter().collect();
    let mut aged = rates.clone();
    let mut expect: Vec<f64> = rates.iter().map(|(_, r)| r).collect();
    for _ in 0..20 {
        aged = age_unused_edges(&aged, &active, 0.95);
        for (x, (e, _)) in expect.iter_mut().zip(rates.iter()) {
            if e.0 != 2 {
                *x *= 0.95;
            }
        }
        let got: Vec<f64> = aged.iter().map(|(_, r)| r).collect();
        assert_eq!(got, expect);
        assert_eq!((aged.time_step, aged.time), (3, 3.0));
    }
}

#[test]
fn dynamic_runs_are_reproducible() {
    let spec = KroneckerSpec { seed: KroneckerSpec::HIERARCHICAL, iterations: 4, target_edges: 24 };
    let edges = generate_kronecker(&spec, 8).unwrap();
    let net = assign_patterns(16, &edges, &PatternConfig { horizon: 10.0, ..PatternConfig::default() }, 8).unwrap();
    let model = TransmissionModel::rayleigh();
    let store = CascadeStore::new(generate_cascade_set(&net, &model, 12, 40, 2.0, 8).unwrap());
    let config = InferenceConfig {
        model,
        sampling: Sampling::Exponential { tau: None },
        sample_window: 4.0,
        seed: 21,
        ..InferenceConfig::default()
    };
    let a = infer_dynamic(&store, (0.0, 12.0), &config).unwrap();
    let b = infer_dynamic(&store, (0.0, 12.0), &config).unwrap();
    assert_eq!(a.snapshots, b.snapshots);
    assert_eq!(a.snapshots.len(), 12);
}
