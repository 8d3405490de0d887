//! Word metrics: closed-form geodesic lengths where they are known, and a
//! breadth-first distance oracle used to validate them on balls.

mod thompson;
mod wreath;

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::groups::{CanonicalKey, GroupElement, GroupId};
use crate::words::Symbol;

pub use thompson::geodesic_length_f;
pub use wreath::{
    geodesic_length_wreath_line, geodesic_length_wreath_nested, geodesic_length_wreath_tree,
    DEFAULT_NESTED_SUPPORT_CAP,
};

/// Default cap on the number of vertices a [`bfs_oracle`] run may visit.
pub const DEFAULT_ORACLE_BUDGET: usize = 5_000_000;

/// Exact distances from the identity over a ball.
#[derive(Debug, Clone)]
pub struct DistanceTable {
    pub radius: usize,
    distances: HashMap<CanonicalKey, u32>,
    /// Elements in discovery order, so callers can iterate deterministically.
    elements: Vec<GroupElement>,
    sphere_sizes: Vec<usize>,
}

impl DistanceTable {
    pub fn distance(&self, x: &GroupElement) -> Option<u32> {
        self.distances.get(&x.key()).copied()
    }

    pub fn distance_by_key(&self, key: &CanonicalKey) -> Option<u32> {
        self.distances.get(key).copied()
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Elements with their distances, in BFS discovery order.
    pub fn iter(&self) -> impl Iterator<Item = (&GroupElement, u32)> + '_ {
        self.elements
            .iter()
            .map(move |x| (x, self.distances[&x.key()]))
    }

    /// Number of elements at each distance `0..=radius`.
    pub fn sphere_sizes(&self) -> &[usize] {
        &self.sphere_sizes
    }

    /// Cumulative ball sizes at radii `0..=radius`.
    pub fn ball_sizes(&self) -> Vec<usize> {
        self.sphere_sizes
            .iter()
            .scan(0, |acc, &s| {
                *acc += s;
                Some(*acc)
            })
            .collect()
    }

    /// `key,distance` rows with hex-encoded keys.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("key,distance\n");
        for (x, d) in self.iter() {
            let _ = writeln!(out, "{},{d}", x.key().to_hex());
        }
        out
    }
}

/// Breadth-first search of the Cayley graph out to `radius`.
pub fn bfs_oracle(g: GroupId, radius: usize) -> Result<DistanceTable> {
    bfs_oracle_with_budget(g, radius, DEFAULT_ORACLE_BUDGET)
}

pub fn bfs_oracle_with_budget(g: GroupId, radius: usize, budget: usize) -> Result<DistanceTable> {
    let id = g.identity();
    let mut distances = HashMap::from([(id.key(), 0u32)]);
    let mut elements = vec![id];
    let mut sphere_sizes = vec![1usize];
    let mut start = 0;
    for d in 1..=radius {
        let end = elements.len();
        for i in start..end {
            for s in 0..g.alphabet_size() {
                let y = g.apply_gen(&elements[i], Symbol::new(s as u8));
                let key = y.key();
                if distances.contains_key(&key) {
                    continue;
                }
                if elements.len() >= budget {
                    return Err(Error::BudgetExceeded(format!(
                        "ball of radius {radius} in {g} has more than {budget} elements"
                    )));
                }
                distances.insert(key, d as u32);
                elements.push(y);
            }
        }
        sphere_sizes.push(elements.len() - end);
        start = end;
    }
    Ok(DistanceTable {
        radius,
        distances,
        elements,
        sphere_sizes,
    })
}

/// Geodesic length for groups with an implemented metric.
pub fn geodesic_length(x: &GroupElement) -> Result<u64> {
    match x {
        GroupElement::Free2(f) => Ok(f.len() as u64),
        GroupElement::ZxZ(a, b) => Ok(a.unsigned_abs() + b.unsigned_abs()),
        GroupElement::ThompsonF(t) => Ok(geodesic_length_f(t)),
        GroupElement::WreathZZ(w) => Ok(geodesic_length_wreath_line(w)),
        GroupElement::WreathZF2(w) => Ok(geodesic_length_wreath_tree(w)),
        GroupElement::WreathZZZ(w) => geodesic_length_wreath_nested(w),
        GroupElement::BaumslagSolitar(_) => Err(Error::MetricUnavailable(
            "no geodesic algorithm for Baumslag-Solitar groups".into(),
        )),
    }
}

/// True when [`geodesic_length`] supports elements of `g`.
pub fn has_metric(g: GroupId) -> bool {
    !matches!(g, GroupId::BaumslagSolitar { .. })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::{FreeElement, LineLamplighter, NestedLamplighter, TreeLamplighter};
    use crate::words::{rng_stream, Alphabet, Word};
    use proptest::prelude::*;
    use std::collections::BTreeMap;

    fn len(g: GroupId, w: &str) -> u64 {
        geodesic_length(&g.evaluate_str(w).unwrap()).unwrap()
    }

    fn check_ball(g: GroupId, radius: usize) {
        let table = bfs_oracle(g, radius).unwrap();
        for (x, d) in table.iter() {
            assert_eq!(geodesic_length(x).unwrap(), d as u64, "{g}: {x}");
        }
    }

    #[test]
    fn ball_sizes() {
        assert_eq!(bfs_oracle(GroupId::ZxZ, 2).unwrap().ball_sizes(), vec![1, 5, 13]);
        assert_eq!(bfs_oracle(GroupId::Free2, 3).unwrap().ball_sizes(), vec![1, 5, 17, 53]);
    }

    #[test]
    fn oracle_budget() {
        let err = bfs_oracle_with_budget(GroupId::Free2, 5, 100).unwrap_err();
        assert!(matches!(err, Error::BudgetExceeded(_)));
    }

    #[test]
    fn oracle_csv_has_a_row_per_element() {
        let table = bfs_oracle(GroupId::ZxZ, 2).unwrap();
        let csv = table.to_csv();
        assert_eq!(csv.lines().count(), 14);
        assert!(csv.starts_with("key,distance\n"));
    }

    #[test]
    fn distance_table_is_lipschitz() {
        let g = GroupId::ThompsonF;
        let table = bfs_oracle(g, 5).unwrap();
        for (x, d) in table.iter() {
            for s in 0..4 {
                if let Some(e) = table.distance(&g.apply_gen(x, Symbol::new(s))) {
                    assert!(d.abs_diff(e) <= 1);
                }
            }
        }
    }

    #[test]
    fn thompson_examples() {
        let f = GroupId::ThompsonF;
        assert_eq!(len(f, ""), 0);
        assert_eq!(len(f, "a"), 1);
        assert_eq!(len(f, "aa"), 2);
        assert_eq!(len(f, "b"), 1);
        assert_eq!(len(f, "aBAbabAABa"), 0);
        check_ball(f, 3);
    }

    #[test]
    fn thompson_ball_radius_six() {
        check_ball(GroupId::ThompsonF, 6);
    }

    #[test]
    fn line_lamplighter_examples() {
        let g = GroupId::WreathZZ;
        assert_eq!(len(g, ""), 0);
        assert_eq!(len(g, "bbb"), 3);
        let x = LineLamplighter::from_parts(BTreeMap::new(), 3);
        assert_eq!(geodesic_length_wreath_line(&x), 3);
        // lamps on both sides of the origin, cursor back at 0
        let x = LineLamplighter::from_parts(BTreeMap::from([(-2, 1), (3, -2)]), 0);
        assert_eq!(geodesic_length_wreath_line(&x), 3 + 10);
        check_ball(g, 6);
    }

    #[test]
    fn tree_lamplighter_examples() {
        let g = GroupId::WreathZF2;
        assert_eq!(len(g, ""), 0);
        assert_eq!(len(g, "sa"), 2);
        let alphabet = Alphabet::new(&['s', 't']).unwrap();
        let s = FreeElement::from_word(&alphabet.parse_word("s").unwrap());
        let x = TreeLamplighter::from_parts(BTreeMap::from([(s.clone(), 1)]), s);
        assert_eq!(geodesic_length_wreath_tree(&x), 2);
        check_ball(g, 5);
    }

    #[test]
    fn nested_lamplighter_examples() {
        let g = GroupId::WreathZZZ;
        assert_eq!(len(g, ""), 0);
        assert_eq!(len(g, "b"), 1);
        assert_eq!(len(g, "c"), 1);
        check_ball(g, 5);
    }

    #[test]
    fn nested_support_cap() {
        let lamps: BTreeMap<LineLamplighter, i64> = (0..5)
            .map(|i| (LineLamplighter::from_parts(BTreeMap::new(), i), 1))
            .collect();
        let x = NestedLamplighter::from_parts(lamps, LineLamplighter::identity());
        assert_eq!(geodesic_length_wreath_nested(&x).unwrap(), 5 + 8);
        let err = wreath::geodesic_length_wreath_nested_capped(&x, 4).unwrap_err();
        assert!(matches!(err, Error::MetricUnavailable(_)));
    }

    #[test]
    fn baumslag_solitar_has_no_metric() {
        let g = GroupId::BaumslagSolitar { p: 1, q: 2 };
        assert!(!has_metric(g));
        assert!(geodesic_length(&g.identity()).is_err());
    }

    fn metric_groups() -> impl Strategy<Value = GroupId> {
        prop_oneof![
            Just(GroupId::Free2),
            Just(GroupId::ZxZ),
            Just(GroupId::ThompsonF),
            Just(GroupId::WreathZZ),
            Just(GroupId::WreathZF2),
            Just(GroupId::WreathZZZ),
        ]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn metric_properties(g in metric_groups(), seed in any::<u64>(), n in 0usize..40) {
            let mut rng = rng_stream(seed, 0);
            let mut w = Word::empty(&g.alphabet());
            for _ in 0..n {
                w.grow_random(g.alphabet_size(), &mut rng);
            }
            let x = g.evaluate(&w);
            let l = geodesic_length(&x).unwrap();
            prop_assert!(l <= n as u64);
            prop_assert_eq!(l == 0, x.is_identity());
            prop_assert_eq!(l, geodesic_length(&g.evaluate(&w.inverse())).unwrap());
            for s in 0..g.alphabet_size() {
                let y = g.apply_gen(&x, Symbol::new(s as u8));
                prop_assert!(geodesic_length(&y).unwrap().abs_diff(l) <= 1);
            }
        }
    }
}
