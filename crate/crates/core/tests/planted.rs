//! Planted-structure checks: models trained on clustered data must prefer
//! within-cluster items, and an oracle judge must keep the accepted set
//! inside the planting.

use i2i_core::augment::{augment, AugmentationConfig, CandidateJudge, PortError};
use i2i_core::data::{Dataset, UserHistory};
use i2i_core::discriminator::{DiscriminatorConfig, DiscriminatorModel, Verdict};
use i2i_core::generator::{GeneratorConfig, GeneratorModel};
use i2i_core::prompt::Decision;
use i2i_core::rng::SplitMix64;
use i2i_core::split::chronological_split;
use i2i_core::synth::{item_cluster, planted_clusters, PlantedConfig};

fn small_planted() -> (PlantedConfig, Dataset) {
    let cfg = PlantedConfig {
        users: 300,
        items: 60,
        clusters: 6,
        min_history: 4,
        max_history: 7,
        noise: 0.0,
        rare_weight: 0.3,
        seed: 11,
    ..Default::default()
    };
    let ds = Dataset::from_interactions(planted_clusters(&cfg)).unwrap();
    (cfg, ds)
}

fn item_number(id: &str) -> usize {
    id[1..].parse().unwrap()
}

#[test]
fn generator_prefers_within_cluster() {
    let (cfg, mut ds) = small_planted();
    ds.label_long_tail(0.2).unwrap();
    let split = chronological_split(&ds);
    let (model, losses) = GeneratorModel::train(
        &ds,
        &split,
        GeneratorConfig {
            dim: 16,
            epochs: 8,
            ..Default::default()
        },
    )
    .unwrap();
    assert!(losses.last().unwrap() <= &losses[0]);

    // held-out next item should outscore a random cross-cluster item
    let mut rng = SplitMix64::new(5);
    let mut held_out = 0.0;
    let mut cross = 0.0;
    let mut n = 0;
    for us in split.users.iter().take(100) {
        let Some(test) = &us.test else { continue };
        if us.train.is_empty() {
            continue;
        }
        let history = UserHistory::new(&us.user_id, us.train.clone());
        let hist_cluster = item_cluster(&cfg, item_number(&us.train[0].item_id));
        let probs = {
            let hist_idx: Vec<usize> = history
                .item_ids()
                .filter_map(|id| model.item_index(id))
                .collect();
            let scores = model.scores(&hist_idx);
            let max = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let z: f64 = scores.iter().map(|s| (s - max).exp()).sum();
            scores
                .iter()
                .map(|s| (s - max).exp() / z)
                .collect::<Vec<f64>>()
        };
        let t = model.item_index(&test.item_id).unwrap();
        held_out += probs[t];
        // random item from a different cluster
        loop {
            let j = rng.gen_range(model.item_ids.len());
            if item_cluster(&cfg, item_number(&model.item_ids[j])) != hist_cluster {
                cross += probs[j];
                break;
            }
        }
        n += 1;
    }
    assert!(n > 50);
    assert!(
        held_out / n as f64 > cross / n as f64,
        "held-out {held_out} vs cross {cross} over {n} users"
    );
}

#[test]
fn generator_candidates_stay_in_cluster() {
    let (cfg, mut ds) = small_planted();
    ds.label_long_tail(0.2).unwrap();
    let split = chronological_split(&ds);
    let (model, _) = GeneratorModel::train(
        &ds,
        &split,
        GeneratorConfig {
            dim: 16,
            epochs: 10,
            ..Default::default()
        },
    )
    .unwrap();
    let mut within = 0usize;
    let mut total = 0usize;
    for us in split.users.iter().take(50) {
        if us.train.is_empty() {
            continue;
        }
        let history = UserHistory::new(&us.user_id, us.train.clone());
        let cluster = item_cluster(&cfg, item_number(&us.train[0].item_id));
        let out = model.generate(&history, 5).unwrap();
        for (id, _) in &out.candidates {
            total += 1;
            if item_cluster(&cfg, item_number(id)) == cluster {
                within += 1;
            }
        }
    }
    assert!(total > 0);
    // well above the 1-in-6 chance rate
    assert!(
        within as f64 / total as f64 > 0.5,
        "{within}/{total} within cluster"
    );
}

#[test]
fn discriminator_separates_clusters() {
    let (cfg, ds) = small_planted();
    let split = chronological_split(&ds);
    let (model, losses) = DiscriminatorModel::train(
        &ds,
        &split,
        DiscriminatorConfig {
            dim: 16,
            epochs: 10,
            learning_rate: 0.1,
            ..Default::default()
        },
    )
    .unwrap();
    assert!(losses.last().unwrap() <= &losses[0]);
    let mut rng = SplitMix64::new(3);
    let mut within = 0.0;
    let mut cross = 0.0;
    let mut n = 0;
    for us in split.users.iter().take(100) {
        let Some(test) = &us.test else { continue };
        let history = ds.user(&us.user_id).unwrap();
        let cluster = item_cluster(&cfg, item_number(&test.item_id));
        within += model.score_pair(history, &test.item_id).unwrap().confidence;
        loop {
            let j = rng.gen_range(ds.items().len());
            let id = &ds.items()[j].item_id;
            if item_cluster(&cfg, item_number(id)) != cluster {
                cross += model.score_pair(history, id).unwrap().confidence;
                break;
            }
        }
        n += 1;
    }
    assert!(
        within / n as f64 > cross / n as f64,
        "within {within} vs cross {cross}"
    );
}

#[test]
fn oracle_judge_keeps_accepted_inside_planting() {
    struct ClusterOracle {
        cfg: PlantedConfig,
    }
    impl CandidateJudge for ClusterOracle {
        fn judge(&self, history: &UserHistory, item_id: &str) -> Result<Verdict, PortError> {
            let cluster = item_cluster(&self.cfg, item_number(history.interactions[0].item_id.as_str()));
            let within = item_cluster(&self.cfg, item_number(item_id)) == cluster;
            Ok(Verdict {
                user_id: history.user_id.clone(),
                item_id: item_id.into(),
                decision: if within { Decision::Yes } else { Decision::No },
                confidence: if within { 1.0 } else { 0.0 },
            })
        }
    }

    let (cfg, mut ds) = small_planted();
    ds.label_long_tail(0.2).unwrap();
    let split = chronological_split(&ds);
    let (gen, _) = GeneratorModel::train(
        &ds,
        &split,
        GeneratorConfig {
            dim: 8,
            epochs: 3,
            ..Default::default()
        },
    )
    .unwrap();
    let judge = ClusterOracle { cfg: cfg.clone() };
    let out = augment(&ds, &gen, &judge, &AugmentationConfig::default()).unwrap();
    assert!(!out.accepted.is_empty());
    for cand in &out.accepted {
        let user_first = &ds.user(&cand.user_id).unwrap().interactions[0].item_id;
        assert_eq!(
            item_cluster(&cfg, item_number(&cand.item_id)),
            item_cluster(&cfg, item_number(user_first)),
            "cross-cluster pair accepted"
        );
    }
}
