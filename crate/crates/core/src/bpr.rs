//! Pairwise-ranking matrix factorization: SGD over (user, clicked, not
//! clicked) triples minimizing -ln sigma(x_ui - x_uj) plus L2 regularization.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::data::Interaction;
use crate::neighbors::ItemNeighborList;
use crate::rng::SplitMix64;

#[derive(Debug, Clone, PartialEq)]
pub struct BprConfig {
    pub factors: usize,
    pub learning_rate: f64,
    pub regularization: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for BprConfig {
    fn default() -> Self {
        BprConfig {
            factors: 100,
            learning_rate: 0.05,
            regularization: 0.01,
            epochs: 10,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum BprError {
    EmptyStream,
    SingleItemCatalog,
}

impl fmt::Display for BprError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BprError::EmptyStream => write!(f, "interaction stream is empty"),
            BprError::SingleItemCatalog => {
                write!(f, "catalog has a single item, no negatives exist")
            }
        }
    }
}

impl core::error::Error for BprError {}

#[derive(Debug, Clone)]
pub struct BprModel {
    pub config: BprConfig,
    pub user_ids: Vec<String>,
    pub item_ids: Vec<String>,
    /// Row-major |users| x factors.
    pub user_factors: Vec<f64>,
    /// Row-major |items| x factors.
    pub item_factors: Vec<f64>,
}

impl BprModel {
    pub fn item_index(&self, id: &str) -> Option<usize> {
        self.item_ids.binary_search_by(|i| i.as_str().cmp(id)).ok()
    }

    fn uf(&self, u: usize) -> &[f64] {
        &self.user_factors[u * self.config.factors..(u + 1) * self.config.factors]
    }

    fn itf(&self, i: usize) -> &[f64] {
        &self.item_factors[i * self.config.factors..(i + 1) * self.config.factors]
    }

    pub fn score(&self, u: usize, i: usize) -> f64 {
        dot(self.uf(u), self.itf(i))
    }

    /// Loss of one (u, pos, neg) triple:
    /// -ln sigma(x_upos - x_uneg) + reg (|w_u|^2 + |h_pos|^2 + |h_neg|^2).
    pub fn triple_loss(&self, u: usize, pos: usize, neg: usize) -> f64 {
        let x = self.score(u, pos) - self.score(u, neg);
        let reg = self.config.regularization;
        softplus(-x)
            + reg * (sq_norm(self.uf(u)) + sq_norm(self.itf(pos)) + sq_norm(self.itf(neg)))
    }

    /// Gradient of the triple loss with respect to (w_u, h_pos, h_neg).
    pub fn triple_loss_grad(
        &self,
        u: usize,
        pos: usize,
        neg: usize,
    ) -> (f64, Vec<f64>, Vec<f64>, Vec<f64>) {
        let f = self.config.factors;
        let reg = self.config.regularization;
        let x = self.score(u, pos) - self.score(u, neg);
        let loss = self.triple_loss(u, pos, neg);
        // d/dx of -ln sigma(x) is -(1 - sigma(x)) = -sigma(-x)
        let dx = -sigmoid(-x);
        let wu = self.uf(u);
        let hp = self.itf(pos);
        let hn = self.itf(neg);
        let mut gu = vec![0.0; f];
        let mut gp = vec![0.0; f];
        let mut gn = vec![0.0; f];
        for k in 0..f {
            gu[k] = dx * (hp[k] - hn[k]) + 2.0 * reg * wu[k];
            gp[k] = dx * wu[k] + 2.0 * reg * hp[k];
            gn[k] = -dx * wu[k] + 2.0 * reg * hn[k];
        }
        (loss, gu, gp, gn)
    }

    fn sgd_step(&mut self, u: usize, pos: usize, neg: usize, lr: f64) -> f64 {
        let (loss, gu, gp, gn) = self.triple_loss_grad(u, pos, neg);
        let f = self.config.factors;
        for k in 0..f {
            self.user_factors[u * f + k] -= lr * gu[k];
            self.item_factors[pos * f + k] -= lr * gp[k];
            self.item_factors[neg * f + k] -= lr * gn[k];
        }
        loss
    }

    /// Per item, the top-k other items by factor inner product.
    pub fn neighbors(&self, k: usize) -> Vec<ItemNeighborList> {
        let n = self.item_ids.len();
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let mut scored: Vec<(u32, f64)> = (0..n)
                .filter(|&j| j != i)
                .map(|j| (j as u32, dot(self.itf(i), self.itf(j))))
                .collect();
            scored.sort_by(|a, b| {
                b.1.total_cmp(&a.1)
                    .then_with(|| self.item_ids[a.0 as usize].cmp(&self.item_ids[b.0 as usize]))
            });
            scored.truncate(k);
            out.push(ItemNeighborList {
                item_id: self.item_ids[i].clone(),
                neighbors: scored
                    .into_iter()
                    .map(|(j, s)| (self.item_ids[j as usize].clone(), s))
                    .collect(),
            });
        }
        out
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn sq_norm(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum()
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + libm::exp(-x))
}

/// ln(1 + e^x), stable for large |x|.
fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + libm::log(1.0 + libm::exp(-x))
    } else {
        libm::log(1.0 + libm::exp(x))
    }
}

pub fn train_bpr(stream: &[Interaction], config: BprConfig) -> Result<(BprModel, Vec<f64>), BprError> {
    if stream.is_empty() {
        return Err(BprError::EmptyStream);
    }
    let mut user_ids: Vec<String> = stream.iter().map(|r| r.user_id.clone()).collect();
    user_ids.sort();
    user_ids.dedup();
    let mut item_ids: Vec<String> = stream.iter().map(|r| r.item_id.clone()).collect();
    item_ids.sort();
    item_ids.dedup();
    if item_ids.len() < 2 {
        return Err(BprError::SingleItemCatalog);
    }

    let n_items = item_ids.len();
    let f = config.factors;
    let mut rng = SplitMix64::new(config.seed);
    let user_factors = (0..user_ids.len() * f).map(|_| rng.uniform(-0.1, 0.1)).collect();
    let item_factors = (0..n_items * f).map(|_| rng.uniform(-0.1, 0.1)).collect();
    let mut model = BprModel {
        config,
        user_ids,
        item_ids,
        user_factors,
        item_factors,
    };

    // per user, sorted distinct positive item indices
    let mut positives: Vec<Vec<u32>> = vec![Vec::new(); model.user_ids.len()];
    for rec in stream {
        let u = model
            .user_ids
            .binary_search_by(|x| x.as_str().cmp(&rec.user_id))
            .unwrap();
        let i = model.item_index(&rec.item_id).unwrap();
        positives[u].push(i as u32);
    }
    for p in positives.iter_mut() {
        p.sort_unstable();
        p.dedup();
    }

    let lr = model.config.learning_rate;
    let base_rng = SplitMix64::new(model.config.seed ^ 0x6270_725f_6e65_6773);
    let mut epoch_losses = Vec::with_capacity(model.config.epochs);
    for epoch in 0..model.config.epochs {
        let mut total = 0.0;
        let mut count = 0usize;
        for (u, pos_items) in positives.iter().enumerate() {
            if pos_items.len() == n_items {
                continue; // clicked everything, no negatives
            }
            let mut rng = base_rng.derive(epoch as u64).derive(u as u64);
            for &pos in pos_items {
                // rejection-sample a non-clicked item
                let neg = loop {
                    let j = rng.gen_range(n_items) as u32;
                    if pos_items.binary_search(&j).is_err() {
                        break j;
                    }
                };
                total += model.sgd_step(u, pos as usize, neg as usize, lr);
                count += 1;
            }
        }
        if count > 0 {
            epoch_losses.push(total / count as f64);
        }
    }
    Ok((model, epoch_losses))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::EventType;

    fn click(u: &str, i: &str, ts: i64) -> Interaction {
        Interaction::new(u, i, ts, EventType::Click)
    }

    #[test]
    fn symmetric_scores_give_ln2_plus_reg() {
        let (mut m, _) = train_bpr(
            &[click("u", "a", 1), click("v", "b", 1)],
            BprConfig {
                factors: 4,
                epochs: 0,
                regularization: 0.1,
                ..Default::default()
            },
        )
        .unwrap();
        m.user_factors.iter_mut().for_each(|v| *v = 0.0);
        m.item_factors.iter_mut().for_each(|v| *v = 0.0);
        let loss = m.triple_loss(0, 0, 1);
        assert!((loss - libm::log(2.0)).abs() < 1e-12);
        // nonzero but equal factors: reg term appears
        m.item_factors.iter_mut().for_each(|v| *v = 0.5);
        let loss = m.triple_loss(0, 0, 1);
        let expected = libm::log(2.0) + 0.1 * (0.0 + 4.0 * 0.25 + 4.0 * 0.25);
        assert!((loss - expected).abs() < 1e-12);
    }

    #[test]
    fn single_item_catalog_errors() {
        assert_eq!(
            train_bpr(&[click("u", "a", 1)], BprConfig::default()).unwrap_err(),
            BprError::SingleItemCatalog
        );
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let (m, _) = train_bpr(
            &[
                click("u", "a", 1),
                click("u", "b", 2),
                click("v", "c", 1),
            ],
            BprConfig {
                factors: 3,
                epochs: 1,
                regularization: 0.05,
                ..Default::default()
            },
        )
        .unwrap();
        let h = 1e-5;
        let (_, gu, gp, gn) = m.triple_loss_grad(0, 0, 2);
        let f = m.config.factors;
        for k in 0..f {
            for (grad, offset) in [(&gu, 0usize), (&gp, 0), (&gn, 2)] {
                let mut plus = m.clone();
                let mut minus = m.clone();
                if core::ptr::eq(grad, &gu) {
                    plus.user_factors[k] += h;
                    minus.user_factors[k] -= h;
                } else {
                    plus.item_factors[offset * f + k] += h;
                    minus.item_factors[offset * f + k] -= h;
                }
                let fd = (plus.triple_loss(0, 0, 2) - minus.triple_loss(0, 0, 2)) / (2.0 * h);
                let rel = (grad[k] - fd).abs() / grad[k].abs().max(fd.abs()).max(1e-8);
                assert!(rel < 1e-4, "k={k} analytic={} fd={fd}", grad[k]);
            }
        }
    }

    #[test]
    fn training_reduces_loss_and_is_deterministic() {
        let stream: Vec<Interaction> = (0..8)
            .flat_map(|u| {
                (0..4).map(move |i| {
                    click(
                        &alloc::format!("u{u}"),
                        &alloc::format!("i{}", (u % 2) * 4 + i),
                        i as i64,
                    )
                })
            })
            .collect();
        let cfg = BprConfig {
            factors: 8,
            epochs: 30,
            ..Default::default()
        };
        let (m1, l1) = train_bpr(&stream, cfg.clone()).unwrap();
        let (m2, l2) = train_bpr(&stream, cfg).unwrap();
        assert_eq!(m1.item_factors, m2.item_factors);
        assert_eq!(l1, l2);
        assert!(l1.last().unwrap() < &l1[0]);
    }

    #[test]
    fn neighbors_match_exhaustive_ranking() {
        let (m, _) = train_bpr(
            &[
                click("u", "a", 1),
                click("u", "b", 2),
                click("v", "c", 1),
                click("v", "d", 2),
            ],
            BprConfig {
                factors: 4,
                epochs: 5,
                ..Default::default()
            },
        )
        .unwrap();
        let lists = m.neighbors(10);
        for list in &lists {
            let i = m.item_index(&list.item_id).unwrap();
            let mut expected: Vec<(String, f64)> = (0..m.item_ids.len())
                .filter(|&j| j != i)
                .map(|j| (m.item_ids[j].clone(), dot(m.itf(i), m.itf(j))))
                .collect();
            expected.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
            assert_eq!(list.neighbors, expected);
        }
    }

    #[test]
    fn identical_factors_are_mutual_top_neighbors() {
        let (mut m, _) = train_bpr(
            &[click("u", "a", 1), click("u", "b", 2), click("v", "c", 1)],
            BprConfig {
                factors: 2,
                epochs: 0,
                ..Default::default()
            },
        )
        .unwrap();
        let f = m.config.factors;
        let a = m.item_index("a").unwrap();
        let b = m.item_index("b").unwrap();
        let c = m.item_index("c").unwrap();
        for k in 0..f {
            m.item_factors[a * f + k] = 1.0;
            m.item_factors[b * f + k] = 1.0;
            m.item_factors[c * f + k] = -1.0;
        }
        let lists = m.neighbors(1);
        assert_eq!(lists[a].neighbors[0].0, "b");
        assert_eq!(lists[b].neighbors[0].0, "a");
    }

    #[test]
    fn planted_clusters_separate() {
        // users 0..5 click items 0..3, users 5..10 click items 4..7
        let mut stream = Vec::new();
        for u in 0..10 {
            let base = if u < 5 { 0 } else { 4 };
            for i in 0..4 {
                stream.push(click(
                    &alloc::format!("u{u}"),
                    &alloc::format!("i{}", base + i),
                    i as i64,
                ));
            }
        }
        let (m, _) = train_bpr(
            &stream,
            BprConfig {
                factors: 8,
                epochs: 50,
                ..Default::default()
            },
        )
        .unwrap();
        let mut within = 0.0;
        let mut cross = 0.0;
        for u in 0..5 {
            for i in 0..4 {
                within += m.score(u, m.item_index(&alloc::format!("i{i}")).unwrap());
                cross += m.score(u, m.item_index(&alloc::format!("i{}", i + 4)).unwrap());
            }
        }
        assert!(within / 20.0 > cross / 20.0);
    }
}
