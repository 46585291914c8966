//! Cyclic and dihedral groups in (rotation, reflection) normal form.
//!
//! A dihedral element is stored as `(rotation_steps, reflected)` and
//! denotes "reflect across the x-axis first, then rotate", so its
//! 2D matrix is R(2*pi*r/n) * F^s with F = diag(1, -1). Multiplication
//! follows from F R(a) = R(-a) F:
//! (r1, s1) * (r2, s2) = (r1 + (-1)^{s1} r2 mod n, s1 xor s2).

use serde::{Deserialize, Serialize};

use crate::GroupError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GroupKind {
    Cyclic,
    Dihedral,
}

/// An element of a specific group, identified by `index` into the
/// group's element list. The normal-form decomposition is kept inline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GroupElement {
    pub index: usize,
    pub rotation_steps: usize,
    pub reflected: bool,
}

/// A validated finite group with its Cayley table.
#[derive(Debug, Clone, PartialEq)]
pub struct Group {
    kind: GroupKind,
    n: usize,
    elements: Vec<GroupElement>,
    /// cayley[a * |G| + b] = index of elements[a] * elements[b]
    cayley: Vec<usize>,
    inverse: Vec<usize>,
}

/// Builds a validated group: |C_n| = n, |D_n| = 2n.
pub fn make_group(kind: GroupKind, n: usize) -> Result<Group, GroupError> {
    if n == 0 {
        return Err(GroupError::InvalidOrder { n });
    }
    let order = match kind {
        GroupKind::Cyclic => n,
        GroupKind::Dihedral => 2 * n,
    };
    let mut elements = Vec::with_capacity(order);
    for index in 0..order {
        let (rotation_steps, reflected) = match kind {
            GroupKind::Cyclic => (index, false),
            GroupKind::Dihedral => (index % n, index >= n),
        };
        elements.push(GroupElement {
            index,
            rotation_steps,
            reflected,
        });
    }
    let index_of = |r: usize, s: bool| -> usize {
        match kind {
            GroupKind::Cyclic => r,
            GroupKind::Dihedral => r + if s { n } else { 0 },
        }
    };
    let mut cayley = vec![0usize; order * order];
    for a in &elements {
        for b in &elements {
            let r = if a.reflected {
                (a.rotation_steps + n - b.rotation_steps % n) % n
            } else {
                (a.rotation_steps + b.rotation_steps) % n
            };
            let s = a.reflected ^ b.reflected;
            cayley[a.index * order + b.index] = index_of(r, s);
        }
    }
    let mut inverse = vec![usize::MAX; order];
    for a in 0..order {
        for b in 0..order {
            if cayley[a * order + b] == 0 {
                if inverse[a] != usize::MAX {
                    return Err(GroupError::TableInvalid {
                        reason: "element with two inverses",
                    });
                }
                inverse[a] = b;
            }
        }
    }
    let g = Group {
        kind,
        n,
        elements,
        cayley,
        inverse,
    };
    g.validate()?;
    Ok(g)
}

impl Group {
    pub fn kind(&self) -> GroupKind {
        self.kind
    }

    /// The order parameter n, not the group order.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn identity(&self) -> GroupElement {
        self.elements[0]
    }

    pub fn element(&self, index: usize) -> GroupElement {
        self.elements[index]
    }

    pub fn elements(&self) -> &[GroupElement] {
        &self.elements
    }

    pub fn compose(&self, a: GroupElement, b: GroupElement) -> GroupElement {
        self.elements[self.cayley[a.index * self.order() + b.index]]
    }

    pub fn compose_idx(&self, a: usize, b: usize) -> usize {
        self.cayley[a * self.order() + b]
    }

    pub fn inverse(&self, a: GroupElement) -> GroupElement {
        self.elements[self.inverse[a.index]]
    }

    pub fn inverse_idx(&self, a: usize) -> usize {
        self.inverse[a]
    }

    /// Rotation angle of the element's rotation part in radians.
    pub fn angle(&self, g: GroupElement) -> f64 {
        2.0 * std::f64::consts::PI * g.rotation_steps as f64 / self.n as f64
    }

    pub fn is_reflection(&self, g: GroupElement) -> bool {
        g.reflected
    }

    fn validate(&self) -> Result<(), GroupError> {
        let m = self.order();
        // Latin square with identity at index 0.
        for a in 0..m {
            let mut seen_row = vec![false; m];
            let mut seen_col = vec![false; m];
            for b in 0..m {
                let rc = self.cayley[a * m + b];
                let cc = self.cayley[b * m + a];
                if rc >= m || seen_row[rc] || cc >= m || seen_col[cc] {
                    return Err(GroupError::TableInvalid {
                        reason: "composition table is not a Latin square",
                    });
                }
                seen_row[rc] = true;
                seen_col[cc] = true;
            }
            if self.cayley[a] != a || self.cayley[a * m] != a {
                return Err(GroupError::TableInvalid {
                    reason: "identity is not at index 0",
                });
            }
            if self.inverse[a] == usize::MAX
                || self.cayley[self.inverse[a] * m + a] != 0
            {
                return Err(GroupError::TableInvalid {
                    reason: "missing inverse",
                });
            }
        }
        // Associativity, exhaustive for the small orders used here.
        if m <= 16 {
            for a in 0..m {
                for b in 0..m {
                    let ab = self.cayley[a * m + b];
                    for c in 0..m {
                        let bc = self.cayley[b * m + c];
                        if self.cayley[ab * m + c] != self.cayley[a * m + bc] {
                            return Err(GroupError::TableInvalid {
                                reason: "associativity violated",
                            });
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// All subgroups, as sorted element-index sets. Brute force over the
    /// closure of subsets; intended for the small groups handled here.
    pub fn subgroups(&self) -> Vec<Vec<usize>> {
        let m = self.order();
        assert!(m <= 16, "subgroup enumeration is for small groups");
        let mut found: Vec<Vec<usize>> = Vec::new();
        for mask in 0u32..(1 << m) {
            if mask & 1 == 0 {
                continue; // must contain the identity
            }
            let members: Vec<usize> = (0..m).filter(|i| mask >> i & 1 == 1).collect();
            if m % members.len() != 0 {
                continue; // Lagrange
            }
            let in_set = |x: usize| mask >> x & 1 == 1;
            let closed = members.iter().all(|&a| {
                in_set(self.inverse[a])
                    && members.iter().all(|&b| in_set(self.cayley[a * m + b]))
            });
            if closed {
                found.push(members);
            }
        }
        found
    }
}

/// Serialized form: just (kind, n); the table is rebuilt and revalidated
/// on load.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroupSpec {
    pub kind: GroupKind,
    pub n: usize,
}

impl GroupSpec {
    pub fn build(&self) -> Result<Group, GroupError> {
        make_group(self.kind, self.n)
    }
}

impl From<&Group> for GroupSpec {
    fn from(g: &Group) -> Self {
        GroupSpec {
            kind: g.kind(),
            n: g.n(),
        }
    }
}
