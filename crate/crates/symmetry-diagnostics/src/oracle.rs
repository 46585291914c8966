//! Brute-force reference for the tight bound: the best empirical
//! accuracy over all G-invariant labelings, found by exhaustive search
//! over the labels of each orbit. Kept independent of the consensus
//! machinery: orbits are recomputed here with a union-find over the raw
//! permutation table.

use num_rational::BigRational;
use num_traits::Zero;

use crate::instance::SymmetryInstance;

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, x: usize) -> usize {
        if self.parent[x] != x {
            let root = self.find(self.parent[x]);
            self.parent[x] = root;
        }
        self.parent[x]
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Max over invariant labelings f of the weighted accuracy
/// sum_x w(x) [f(x) = l(x)]. An invariant labeling is constant per
/// orbit and orbits are independent, so the exhaustive search is a max
/// over classes within each orbit.
pub fn best_invariant_accuracy(instance: &SymmetryInstance) -> BigRational {
    let n = instance.carrier_size();
    let order = instance.action.group().order();
    let mut uf = UnionFind::new(n);
    for g in 0..order {
        for x in 0..n {
            uf.union(x, instance.action.apply_idx(g, x));
        }
    }
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); n];
    for x in 0..n {
        let root = uf.find(x);
        members[root].push(x);
    }
    let mut total = BigRational::zero();
    for orbit in members.into_iter().filter(|m| !m.is_empty()) {
        let mut best = BigRational::zero();
        for y in 0..instance.num_classes {
            let mut acc = BigRational::zero();
            for &x in &orbit {
                if instance.labels[x] == y {
                    acc += instance.weight(x).clone();
                }
            }
            if acc > best {
                best = acc;
            }
        }
        total += best;
    }
    total
}
