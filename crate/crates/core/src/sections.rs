//! Global sections of the spectral presheaf over a finite context poset:
//! one spectrum point per context, compatible with every restriction map.
//!
//! Restriction maps go from fine to coarse, so a choice on every maximal
//! context determines the rest. The search branches on maximal contexts only
//! (most-constrained first, points in ascending order), propagates each
//! choice down to the contexts below, and forward-checks the remaining
//! maximal contexts. Sections found this way are discrete assignments; no
//! claim is made about their continuity in any manifold topology.

use std::collections::BTreeMap;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::context::ContextPoset;
use crate::error::{Error, Result};

/// Context id → spectrum point (0-based; 1-based in JSON).
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Section {
    pub assignment: BTreeMap<String, usize>,
}

#[derive(Serialize, Deserialize)]
struct SectionRepr {
    assignment: BTreeMap<String, usize>,
}

impl Serialize for Section {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SectionRepr {
            assignment: self
                .assignment
                .iter()
                .map(|(k, v)| (k.clone(), v + 1))
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Section {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = SectionRepr::deserialize(d)?;
        let assignment = repr
            .assignment
            .into_iter()
            .map(|(k, v)| {
                v.checked_sub(1)
                    .map(|v| (k, v))
                    .ok_or_else(|| serde::de::Error::custom("section points are 1-based"))
            })
            .collect::<std::result::Result<_, _>>()?;
        Ok(Section { assignment })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SearchReport {
    pub section: Option<Section>,
    pub nodes_visited: u64,
}

struct Search<'a> {
    poset: &'a ContextPoset,
    sizes: Vec<usize>,
    branch_order: Vec<usize>,
    below: Vec<Vec<(usize, &'a [usize])>>,
    assignment: Vec<Option<usize>>,
    nodes: u64,
}

impl<'a> Search<'a> {
    fn new(poset: &'a ContextPoset) -> Self {
        let n = poset.contexts().len();
        let mut degree = vec![0usize; n];
        let mut below: Vec<Vec<(usize, &[usize])>> = vec![Vec::new(); n];
        for p in poset.order() {
            degree[p.low] += 1;
            degree[p.high] += 1;
            below[p.high].push((p.low, &p.refinement.map));
        }
        let mut branch_order = poset.maximal();
        branch_order.sort_by_key(|&i| (std::cmp::Reverse(degree[i]), i));
        Self {
            poset,
            sizes: poset.contexts().iter().map(|c| c.system.len()).collect(),
            branch_order,
            below,
            assignment: vec![None; n],
            nodes: 0,
        }
    }

    /// Visits every section; `visit` returns `false` to stop early.
    fn run(&mut self, visit: &mut dyn FnMut(&[Option<usize>]) -> bool) -> bool {
        self.descend(0, visit)
    }

    fn descend(&mut self, depth: usize, visit: &mut dyn FnMut(&[Option<usize>]) -> bool) -> bool {
        if depth == self.branch_order.len() {
            return visit(&self.assignment);
        }
        let ctx = self.branch_order[depth];
        for point in 0..self.sizes[ctx] {
            self.nodes += 1;
            let mut set = vec![ctx];
            self.assignment[ctx] = Some(point);
            let mut consistent = true;
            for &(low, map) in &self.below[ctx] {
                let forced = map[point];
                match self.assignment[low] {
                    Some(existing) if existing != forced => {
                        consistent = false;
                        break;
                    }
                    Some(_) => {}
                    None => {
                        self.assignment[low] = Some(forced);
                        set.push(low);
                    }
                }
            }
            if consistent && self.forward_check(depth + 1) && !self.descend(depth + 1, visit) {
                return false;
            }
            for idx in set {
                self.assignment[idx] = None;
            }
        }
        true
    }

    fn forward_check(&self, from: usize) -> bool {
        self.branch_order[from..].iter().all(|&ctx| {
            (0..self.sizes[ctx]).any(|q| {
                self.below[ctx]
                    .iter()
                    .all(|&(low, map)| self.assignment[low].is_none_or(|a| a == map[q]))
            })
        })
    }

    fn to_section(&self, assignment: &[Option<usize>]) -> Section {
        Section {
            assignment: self
                .poset
                .contexts()
                .iter()
                .zip(assignment)
                .map(|(c, a)| (c.id.clone(), a.expect("every context is assigned")))
                .collect(),
        }
    }
}

/// First section in search order, or `None` if the search space is
/// exhausted.
pub fn find_global_section(poset: &ContextPoset) -> SearchReport {
    let mut search = Search::new(poset);
    let mut found = None;
    search.run(&mut |a| {
        found = Some(a.to_vec());
        false
    });
    SearchReport {
        section: found.map(|a| search.to_section(&a)),
        nodes_visited: search.nodes,
    }
}

/// Number of distinct sections, stopping once `cap` is reached.
pub fn count_global_sections(poset: &ContextPoset, cap: u64) -> u64 {
    let mut search = Search::new(poset);
    let mut count = 0u64;
    if cap == 0 {
        return 0;
    }
    search.run(&mut |_| {
        count += 1;
        count < cap
    });
    count
}

/// Exact integer check of every order pair: `s(low) = r(s(high))`.
pub fn check_section(poset: &ContextPoset, s: &Section) -> Result<bool> {
    let points = poset
        .contexts()
        .iter()
        .map(|c| {
            s.assignment
                .get(&c.id)
                .copied()
                .ok_or_else(|| Error::MissingAssignment(c.id.clone()))
        })
        .collect::<Result<Vec<_>>>()?;
    let in_range = points
        .iter()
        .zip(poset.contexts())
        .all(|(&p, c)| p < c.system.len());
    Ok(in_range
        && poset
            .order()
            .iter()
            .all(|pair| points[pair.low] == pair.refinement.map[points[pair.high]]))
}
