//! Leave-one-out chronological split: per user the last interaction is the
//! test point, the second-to-last is validation, everything before is train.
//! Users with fewer than three interactions stay train-only.

use alloc::string::String;
use alloc::vec::Vec;

use crate::data::{Dataset, Interaction};

#[derive(Debug, Clone, PartialEq)]
pub struct UserSplit {
    pub user_id: String,
    pub train: Vec<Interaction>,
    pub validation: Option<Interaction>,
    pub test: Option<Interaction>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitSpec {
    /// One entry per user, sorted by user_id.
    pub users: Vec<UserSplit>,
    /// Users kept train-only because they have fewer than 3 interactions.
    pub train_only_users: usize,
}

impl SplitSpec {
    pub fn user(&self, user_id: &str) -> Option<&UserSplit> {
        self.users
            .binary_search_by(|u| u.user_id.as_str().cmp(user_id))
            .ok()
            .map(|i| &self.users[i])
    }

    /// All train interactions across users, in (user_id, chrono) order.
    pub fn train_interactions(&self) -> Vec<Interaction> {
        self.users
            .iter()
            .flat_map(|u| u.train.iter().cloned())
            .collect()
    }
}

pub fn chronological_split(dataset: &Dataset) -> SplitSpec {
    let mut users = Vec::with_capacity(dataset.users().len());
    let mut train_only = 0usize;
    for u in dataset.users() {
        let ints = &u.interactions;
        if ints.len() < 3 {
            train_only += 1;
            users.push(UserSplit {
                user_id: u.user_id.clone(),
                train: ints.clone(),
                validation: None,
                test: None,
            });
        } else {
            let n = ints.len();
            users.push(UserSplit {
                user_id: u.user_id.clone(),
                train: ints[..n - 2].to_vec(),
                validation: Some(ints[n - 2].clone()),
                test: Some(ints[n - 1].clone()),
            });
        }
    }
    SplitSpec {
        users,
        train_only_users: train_only,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::EventType;
    use alloc::vec;

    fn click(u: &str, i: &str, ts: i64) -> Interaction {
        Interaction::new(u, i, ts, EventType::Click)
    }

    #[test]
    fn three_interactions_split() {
        let ds = Dataset::from_interactions(vec![
            click("u", "a", 1),
            click("u", "b", 2),
            click("u", "c", 3),
        ])
        .unwrap();
        let split = chronological_split(&ds);
        let u = split.user("u").unwrap();
        assert_eq!(u.train, vec![click("u", "a", 1)]);
        assert_eq!(u.validation, Some(click("u", "b", 2)));
        assert_eq!(u.test, Some(click("u", "c", 3)));
    }

    #[test]
    fn short_history_is_train_only() {
        let ds =
            Dataset::from_interactions(vec![click("u", "a", 1), click("u", "b", 2)]).unwrap();
        let split = chronological_split(&ds);
        let u = split.user("u").unwrap();
        assert_eq!(u.train.len(), 2);
        assert!(u.validation.is_none() && u.test.is_none());
        assert_eq!(split.train_only_users, 1);
    }

    #[test]
    fn identical_timestamps_tie_break_by_item_id() {
        let ds = Dataset::from_interactions(vec![
            click("u", "c", 5),
            click("u", "a", 5),
            click("u", "b", 5),
        ])
        .unwrap();
        let split = chronological_split(&ds);
        let u = split.user("u").unwrap();
        assert_eq!(u.train, vec![click("u", "a", 5)]);
        assert_eq!(u.validation, Some(click("u", "b", 5)));
        assert_eq!(u.test, Some(click("u", "c", 5)));
    }

    #[test]
    fn split_partitions_interactions() {
        let ds = Dataset::from_interactions(vec![
            click("u", "a", 1),
            click("u", "b", 2),
            click("u", "c", 3),
            click("u", "d", 4),
            click("v", "a", 9),
        ])
        .unwrap();
        let split = chronological_split(&ds);
        for us in &split.users {
            let mut rebuilt = us.train.clone();
            rebuilt.extend(us.validation.iter().cloned());
            rebuilt.extend(us.test.iter().cloned());
            let orig = &ds.user(&us.user_id).unwrap().interactions;
            assert_eq!(&rebuilt, orig);
        }
    }
}
