//! Finite group actions on finite carriers, with orbit/stabilizer
//! enumeration.

use serde::{Deserialize, Serialize};

use crate::group::{Group, GroupSpec};
use crate::GroupError;

/// A validated action of a group on {0, .., carrier_size-1}.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteAction {
    group: Group,
    carrier_size: usize,
    /// table[g * carrier_size + x] = g . x
    table: Vec<usize>,
}

impl FiniteAction {
    pub fn from_table(group: Group, table: Vec<Vec<usize>>) -> Result<Self, GroupError> {
        let m = group.order();
        if table.len() != m {
            return Err(GroupError::ActionInvalid {
                reason: "table must have one row per group element",
            });
        }
        let carrier_size = table.first().map(|r| r.len()).unwrap_or(0);
        if carrier_size == 0 {
            return Err(GroupError::ActionInvalid {
                reason: "empty carrier",
            });
        }
        let mut flat = Vec::with_capacity(m * carrier_size);
        for row in &table {
            if row.len() != carrier_size {
                return Err(GroupError::ActionInvalid {
                    reason: "ragged permutation table",
                });
            }
            let mut seen = vec![false; carrier_size];
            for &v in row {
                if v >= carrier_size || seen[v] {
                    return Err(GroupError::ActionInvalid {
                        reason: "row is not a permutation of the carrier",
                    });
                }
                seen[v] = true;
            }
            flat.extend_from_slice(row);
        }
        let action = FiniteAction {
            group,
            carrier_size,
            table: flat,
        };
        action.check_axiom()?;
        Ok(action)
    }

    /// g . (h . x) = (g h) . x and e . x = x, exhaustively.
    fn check_axiom(&self) -> Result<(), GroupError> {
        let m = self.group.order();
        for x in 0..self.carrier_size {
            if self.apply_idx(0, x) != x {
                return Err(GroupError::ActionInvalid {
                    reason: "identity does not act trivially",
                });
            }
        }
        for g in 0..m {
            for h in 0..m {
                let gh = self.group.compose_idx(g, h);
                for x in 0..self.carrier_size {
                    if self.apply_idx(g, self.apply_idx(h, x)) != self.apply_idx(gh, x) {
                        return Err(GroupError::ActionInvalid {
                            reason: "action axiom g.(h.x) = (gh).x violated",
                        });
                    }
                }
            }
        }
        Ok(())
    }

    pub fn group(&self) -> &Group {
        &self.group
    }

    pub fn carrier_size(&self) -> usize {
        self.carrier_size
    }

    #[inline]
    pub fn apply_idx(&self, g: usize, x: usize) -> usize {
        self.table[g * self.carrier_size + x]
    }

    pub fn trivial(group: Group, carrier_size: usize) -> Result<Self, GroupError> {
        let row: Vec<usize> = (0..carrier_size).collect();
        let table = vec![row; group.order()];
        Self::from_table(group, table)
    }

    /// G acting on itself by left translation.
    pub fn left_translation(group: Group) -> Self {
        let m = group.order();
        let table: Vec<Vec<usize>> = (0..m)
            .map(|g| (0..m).map(|x| group.compose_idx(g, x)).collect())
            .collect();
        Self::from_table(group, table).expect("left translation is always a valid action")
    }

    /// The transitive action on left cosets of the subgroup (given as a
    /// sorted list of element indices).
    pub fn coset_action(group: Group, subgroup: &[usize]) -> Result<Self, GroupError> {
        let m = group.order();
        // Partition G into left cosets g H, identified by sorted member list.
        let mut coset_of = vec![usize::MAX; m];
        let mut cosets: Vec<Vec<usize>> = Vec::new();
        for g in 0..m {
            if coset_of[g] != usize::MAX {
                continue;
            }
            let mut members: Vec<usize> =
                subgroup.iter().map(|&h| group.compose_idx(g, h)).collect();
            members.sort_unstable();
            let id = cosets.len();
            for &x in &members {
                if coset_of[x] != usize::MAX {
                    return Err(GroupError::ActionInvalid {
                        reason: "subgroup is not closed",
                    });
                }
                coset_of[x] = id;
            }
            cosets.push(members);
        }
        let k = cosets.len();
        let table: Vec<Vec<usize>> = (0..m)
            .map(|g| {
                (0..k)
                    .map(|c| coset_of[group.compose_idx(g, cosets[c][0])])
                    .collect()
            })
            .collect();
        Self::from_table(group, table)
    }

    /// Glues actions of the same group side by side on a larger carrier.
    pub fn disjoint_union(parts: &[FiniteAction]) -> Result<Self, GroupError> {
        let Some(first) = parts.first() else {
            return Err(GroupError::ActionInvalid {
                reason: "disjoint union of no actions",
            });
        };
        let group = first.group.clone();
        let m = group.order();
        let total: usize = parts.iter().map(|p| p.carrier_size).sum();
        let mut table = vec![Vec::with_capacity(total); m];
        let mut offset = 0usize;
        for p in parts {
            if p.group != group {
                return Err(GroupError::ActionInvalid {
                    reason: "disjoint union across different groups",
                });
            }
            for (g, row) in table.iter_mut().enumerate() {
                row.extend((0..p.carrier_size).map(|x| offset + p.apply_idx(g, x)));
            }
            offset += p.carrier_size;
        }
        Self::from_table(group, table)
    }

    pub fn spec(&self) -> ActionSpec {
        let m = self.group.order();
        ActionSpec {
            group: GroupSpec::from(&self.group),
            table: (0..m)
                .map(|g| self.table[g * self.carrier_size..(g + 1) * self.carrier_size].to_vec())
                .collect(),
        }
    }
}

/// Orbit and stabilizer of one carrier point.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitStabilizer {
    /// Sorted carrier indices of {g.x}.
    pub orbit: Vec<usize>,
    /// Sorted indices of group elements fixing x.
    pub stabilizer: Vec<usize>,
}

pub fn orbit_stabilizer(action: &FiniteAction, x: usize) -> OrbitStabilizer {
    assert!(x < action.carrier_size(), "carrier point out of range");
    let mut orbit: Vec<usize> = Vec::new();
    let mut stabilizer = Vec::new();
    for g in 0..action.group().order() {
        let y = action.apply_idx(g, x);
        if y == x {
            stabilizer.push(g);
        }
        if !orbit.contains(&y) {
            orbit.push(y);
        }
    }
    orbit.sort_unstable();
    OrbitStabilizer { orbit, stabilizer }
}

/// All orbits, sorted internally and ordered by smallest member.
pub fn orbits(action: &FiniteAction) -> Vec<Vec<usize>> {
    let mut seen = vec![false; action.carrier_size()];
    let mut out = Vec::new();
    for x in 0..action.carrier_size() {
        if seen[x] {
            continue;
        }
        let os = orbit_stabilizer(action, x);
        for &y in &os.orbit {
            seen[y] = true;
        }
        out.push(os.orbit);
    }
    out
}

/// JSON form of an action: group spec plus explicit permutation table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ActionSpec {
    pub group: GroupSpec,
    pub table: Vec<Vec<usize>>,
}

impl ActionSpec {
    pub fn build(&self) -> Result<FiniteAction, GroupError> {
        FiniteAction::from_table(self.group.build()?, self.table.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{make_group, GroupKind};

    #[test]
    fn free_c2_action_orbit_and_stabilizer() {
        let g = make_group(GroupKind::Cyclic, 2).unwrap();
        let action =
            FiniteAction::from_table(g, vec![vec![0, 1], vec![1, 0]]).unwrap();
        let os = orbit_stabilizer(&action, 0);
        assert_eq!(os.orbit, vec![0, 1]);
        assert_eq!(os.stabilizer, vec![0]);
    }

    #[test]
    fn trivial_action_orbit_is_self_and_stabilizer_is_group() {
        let g = make_group(GroupKind::Dihedral, 4).unwrap();
        let action = FiniteAction::trivial(g, 3).unwrap();
        let os = orbit_stabilizer(&action, 2);
        assert_eq!(os.orbit, vec![2]);
        assert_eq!(os.stabilizer.len(), 8);
    }

    #[test]
    fn orbit_stabilizer_theorem_holds() {
        let g = make_group(GroupKind::Dihedral, 4).unwrap();
        for sub in g.subgroups() {
            let action = FiniteAction::coset_action(g.clone(), &sub).unwrap();
            for x in 0..action.carrier_size() {
                let os = orbit_stabilizer(&action, x);
                assert_eq!(os.orbit.len() * os.stabilizer.len(), g.order());
            }
        }
    }

    #[test]
    fn orbits_partition_the_carrier() {
        let g = make_group(GroupKind::Cyclic, 4).unwrap();
        let a = FiniteAction::left_translation(g.clone());
        let b = FiniteAction::trivial(g, 3).unwrap();
        let u = FiniteAction::disjoint_union(&[a, b]).unwrap();
        let parts = orbits(&u);
        let mut all: Vec<usize> = parts.concat();
        all.sort_unstable();
        assert_eq!(all, (0..u.carrier_size()).collect::<Vec<_>>());
        assert_eq!(parts.len(), 4); // one free orbit + three fixed points
    }

    #[test]
    fn invalid_tables_rejected() {
        let g = make_group(GroupKind::Cyclic, 2).unwrap();
        // not a permutation
        assert!(FiniteAction::from_table(g.clone(), vec![vec![0, 0], vec![1, 0]]).is_err());
        // identity must act trivially
        assert!(FiniteAction::from_table(g.clone(), vec![vec![1, 0], vec![0, 1]]).is_err());
        // violates the action axiom: the non-identity element of C2 maps
        // 0 -> 1 -> 2 -> 0, but squaring it must give the identity.
        assert!(FiniteAction::from_table(g, vec![vec![0, 1, 2], vec![1, 2, 0]]).is_err());
    }

    #[test]
    fn action_spec_roundtrip() {
        let g = make_group(GroupKind::Dihedral, 2).unwrap();
        let action = FiniteAction::left_translation(g);
        let spec = action.spec();
        let json = serde_json::to_string(&spec).unwrap();
        let parsed: ActionSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(parsed.build().unwrap(), action);
    }
}
