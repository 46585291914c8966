//! Group representations as explicit matrices.

use serde::{Deserialize, Serialize};

use crate::group::{Group, GroupElement};
use crate::GroupError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RepKind {
    /// 1-dimensional, every element maps to [1].
    Trivial,
    /// |G|-dimensional permutation representation on the group itself.
    Regular,
    /// 2-dimensional rotation/reflection matrices.
    Standard2d,
    /// 1-dimensional, [-1] on orientation-reversing elements.
    Signed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Representation {
    pub group: Group,
    pub kind: RepKind,
}

impl Representation {
    pub fn new(group: Group, kind: RepKind) -> Self {
        Representation { group, kind }
    }

    pub fn dim(&self) -> usize {
        match self.kind {
            RepKind::Trivial | RepKind::Signed => 1,
            RepKind::Standard2d => 2,
            RepKind::Regular => self.group.order(),
        }
    }

    pub fn matrix(&self, g: GroupElement) -> RepMatrix {
        rep_matrix(&self.group, self.kind, g)
    }
}

/// Small dense square matrix used for representation arithmetic.
#[derive(Debug, Clone, PartialEq)]
pub struct RepMatrix {
    pub dim: usize,
    pub data: Vec<f64>,
}

impl RepMatrix {
    pub fn identity(dim: usize) -> Self {
        let mut data = vec![0.0; dim * dim];
        for i in 0..dim {
            data[i * dim + i] = 1.0;
        }
        RepMatrix { dim, data }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    pub fn matmul(&self, other: &RepMatrix) -> RepMatrix {
        assert_eq!(self.dim, other.dim);
        let d = self.dim;
        let mut out = vec![0.0; d * d];
        for i in 0..d {
            for k in 0..d {
                let a = self.data[i * d + k];
                if a == 0.0 {
                    continue;
                }
                for j in 0..d {
                    out[i * d + j] += a * other.data[k * d + j];
                }
            }
        }
        RepMatrix { dim: d, data: out }
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.dim);
        let d = self.dim;
        (0..d)
            .map(|i| (0..d).map(|j| self.data[i * d + j] * v[j]).sum())
            .collect()
    }

    pub fn transpose(&self) -> RepMatrix {
        let d = self.dim;
        let mut out = vec![0.0; d * d];
        for i in 0..d {
            for j in 0..d {
                out[j * d + i] = self.data[i * d + j];
            }
        }
        RepMatrix { dim: d, data: out }
    }

    pub fn max_abs_diff(&self, other: &RepMatrix) -> f64 {
        self.data
            .iter()
            .zip(other.data.iter())
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// True when every entry is exactly 0, 1, or -1 and each row and
    /// column has exactly one nonzero entry.
    pub fn is_signed_permutation(&self) -> bool {
        let d = self.dim;
        let mut col_seen = vec![false; d];
        for i in 0..d {
            let mut row_nonzero = 0;
            for j in 0..d {
                let v = self.data[i * d + j];
                if v == 0.0 {
                    continue;
                }
                if v != 1.0 && v != -1.0 {
                    return false;
                }
                if col_seen[j] {
                    return false;
                }
                col_seen[j] = true;
                row_nonzero += 1;
            }
            if row_nonzero != 1 {
                return false;
            }
        }
        true
    }

    /// Row sums, used to check the permutation-matrix property.
    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.dim)
            .map(|i| self.data[i * self.dim..(i + 1) * self.dim].iter().sum())
            .collect()
    }
}

/// (cos, sin) of 2*pi*r/n with exact values at multiples of 45 degrees,
/// so quarter-turn matrices are signed permutations bit-for-bit.
pub fn exact_cos_sin(r: usize, n: usize) -> (f64, f64) {
    let s2 = std::f64::consts::FRAC_1_SQRT_2;
    if (4 * r) % n == 0 {
        match (4 * r / n) % 4 {
            0 => (1.0, 0.0),
            1 => (0.0, 1.0),
            2 => (-1.0, 0.0),
            _ => (0.0, -1.0),
        }
    } else if (8 * r) % n == 0 {
        match (8 * r / n) % 8 {
            1 => (s2, s2),
            3 => (-s2, s2),
            5 => (-s2, -s2),
            _ => (s2, -s2),
        }
    } else {
        let theta = 2.0 * std::f64::consts::PI * r as f64 / n as f64;
        (theta.cos(), theta.sin())
    }
}

/// The matrix of `g` in the given representation of `group`.
pub fn rep_matrix(group: &Group, kind: RepKind, g: GroupElement) -> RepMatrix {
    debug_assert!(g.index < group.order());
    match kind {
        RepKind::Trivial => RepMatrix {
            dim: 1,
            data: vec![1.0],
        },
        RepKind::Signed => RepMatrix {
            dim: 1,
            data: vec![if g.reflected { -1.0 } else { 1.0 }],
        },
        RepKind::Standard2d => {
            let (c, s) = exact_cos_sin(g.rotation_steps, group.n());
            // R(theta) * F^s with F = diag(1, -1)
            let f = if g.reflected { -1.0 } else { 1.0 };
            RepMatrix {
                dim: 2,
                data: vec![c, -s * f, s, c * f],
            }
        }
        RepKind::Regular => {
            let m = group.order();
            let mut data = vec![0.0; m * m];
            for j in 0..m {
                let i = group.compose_idx(g.index, j);
                data[i * m + j] = 1.0;
            }
            RepMatrix { dim: m, data }
        }
    }
}

/// Validates dim and the homomorphism property exhaustively.
pub fn validate_representation(rep: &Representation, tol: f64) -> Result<(), GroupError> {
    let g = &rep.group;
    let id = rep.matrix(g.identity());
    if id.max_abs_diff(&RepMatrix::identity(rep.dim())) > 0.0 {
        return Err(GroupError::RepresentationInvalid {
            reason: "identity does not map to the identity matrix",
        });
    }
    for a in g.elements() {
        if rep.kind == RepKind::Regular && !rep.matrix(*a).is_signed_permutation() {
            return Err(GroupError::RepresentationInvalid {
                reason: "regular representation matrix is not a permutation",
            });
        }
        for b in g.elements() {
            let lhs = rep.matrix(g.compose(*a, *b));
            let rhs = rep.matrix(*a).matmul(&rep.matrix(*b));
            if lhs.max_abs_diff(&rhs) > tol {
                return Err(GroupError::RepresentationInvalid {
                    reason: "homomorphism property violated",
                });
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::make_group;

    #[test]
    fn rot_pi_standard2d_is_minus_identity() {
        let g = make_group(GroupKind::Cyclic, 2).unwrap();
        let m = rep_matrix(&g, RepKind::Standard2d, g.element(1));
        assert_eq!(m.data, vec![-1.0, 0.0, 0.0, -1.0]);
    }

    #[test]
    fn d1_reflection_standard2d() {
        let g = make_group(GroupKind::Dihedral, 1).unwrap();
        let m = rep_matrix(&g, RepKind::Standard2d, g.element(1));
        assert_eq!(m.data, vec![1.0, 0.0, 0.0, -1.0]);
    }

    #[test]
    fn regular_of_c8_identity_is_identity_matrix() {
        let g = make_group(GroupKind::Cyclic, 8).unwrap();
        let m = rep_matrix(&g, RepKind::Regular, g.identity());
        assert_eq!(m, RepMatrix::identity(8));
    }

    #[test]
    fn signed_rep_flags_reflections() {
        let g = make_group(GroupKind::Dihedral, 4).unwrap();
        for e in g.elements() {
            let m = rep_matrix(&g, RepKind::Signed, *e);
            assert_eq!(m.data[0], if e.reflected { -1.0 } else { 1.0 });
        }
    }

    #[test]
    fn all_representations_are_homomorphisms() {
        for (kind, n) in [
            (GroupKind::Cyclic, 3),
            (GroupKind::Cyclic, 8),
            (GroupKind::Dihedral, 1),
            (GroupKind::Dihedral, 4),
        ] {
            let g = make_group(kind, n).unwrap();
            for rk in [
                RepKind::Trivial,
                RepKind::Signed,
                RepKind::Standard2d,
                RepKind::Regular,
            ] {
                let rep = Representation::new(g.clone(), rk);
                validate_representation(&rep, 1e-12).unwrap();
            }
        }
    }

    #[test]
    fn inverse_matrices_multiply_to_identity() {
        let g = make_group(GroupKind::Dihedral, 4).unwrap();
        for e in g.elements() {
            for rk in [RepKind::Standard2d, RepKind::Regular, RepKind::Signed] {
                let m = rep_matrix(&g, rk, *e);
                let mi = rep_matrix(&g, rk, g.inverse(*e));
                let prod = m.matmul(&mi);
                assert!(prod.max_abs_diff(&RepMatrix::identity(prod.dim)) <= 1e-12);
            }
        }
    }

    #[test]
    fn regular_rep_row_sums_are_one() {
        let g = make_group(GroupKind::Dihedral, 4).unwrap();
        for e in g.elements() {
            let sums = rep_matrix(&g, RepKind::Regular, *e).row_sums();
            assert!(sums.iter().all(|&s| s == 1.0));
        }
    }

    #[test]
    fn quarter_turns_are_exact_signed_permutations() {
        let g = make_group(GroupKind::Cyclic, 8).unwrap();
        for e in g.elements() {
            let m = rep_matrix(&g, RepKind::Standard2d, *e);
            assert_eq!(m.is_signed_permutation(), e.rotation_steps % 2 == 0);
        }
    }
}
