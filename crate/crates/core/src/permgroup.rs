//! Finite permutation groups enumerated by breadth-first closure.
//!
//! Every element remembers a word in the generators (and their inverses), so
//! data defined on generators only (representation matrices, vertex actions)
//! can be extended to the whole group with [`extend_by_words`].

use std::collections::{HashMap, VecDeque};
use std::fmt;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

pub const DEFAULT_CAP: usize = 100_000;

/// A bijection of `{0, …, m-1}`; `images[x]` is the image of `x`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let m = images.len();
        let mut seen = vec![false; m];
        for &x in &images {
            if x >= m || seen[x] {
                return Err(Error::InvalidPermutation(format!(
                    "{images:?} is not a bijection on 0..{m}"
                )));
            }
            seen[x] = true;
        }
        Ok(Permutation { images })
    }

    pub fn identity(degree: usize) -> Self {
        Permutation {
            images: (0..degree).collect(),
        }
    }

    /// Builds a permutation from 0-based cycles.
    pub fn from_cycles(degree: usize, cycles: &[&[usize]]) -> Result<Self> {
        let mut p = Permutation::identity(degree);
        for cycle in cycles {
            let c = Permutation::cycle(degree, cycle)?;
            p = p.compose(&c)?;
        }
        Ok(p)
    }

    fn cycle(degree: usize, points: &[usize]) -> Result<Self> {
        let mut images: Vec<usize> = (0..degree).collect();
        let mut seen = std::collections::HashSet::new();
        for (k, &a) in points.iter().enumerate() {
            if a >= degree {
                return Err(Error::InvalidPermutation(format!(
                    "point {} out of range 1..={degree}",
                    a + 1
                )));
            }
            if !seen.insert(a) {
                return Err(Error::InvalidPermutation(format!(
                    "point {} repeated in a cycle",
                    a + 1
                )));
            }
            images[a] = points[(k + 1) % points.len()];
        }
        Permutation::new(images)
    }

    /// Parses 1-based cycle notation such as `"(3 7)(4 10)(8 9)"`.
    ///
    /// Cycles are multiplied right to left, as with [`Permutation::compose`];
    /// for disjoint cycles the order is irrelevant. `""` and `"()"` are the
    /// identity.
    pub fn parse_cycles(s: &str, degree: usize) -> Result<Self> {
        let mut cycles: Vec<Vec<usize>> = Vec::new();
        let mut rest = s.trim();
        while !rest.is_empty() {
            let open = rest
                .strip_prefix('(')
                .ok_or_else(|| Error::Parse(format!("expected '(' in cycle notation '{s}'")))?;
            let close = open
                .find(')')
                .ok_or_else(|| Error::Parse(format!("unclosed cycle in '{s}'")))?;
            let body = &open[..close];
            let points = body
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|t| !t.is_empty())
                .map(|t| {
                    t.parse::<usize>()
                        .ok()
                        .filter(|&x| x >= 1)
                        .map(|x| x - 1)
                        .ok_or_else(|| Error::Parse(format!("bad point '{t}' in '{s}'")))
                })
                .collect::<Result<Vec<_>>>()?;
            if !points.is_empty() {
                cycles.push(points);
            }
            rest = open[close + 1..].trim_start();
        }
        let refs: Vec<&[usize]> = cycles.iter().map(|c| c.as_slice()).collect();
        Permutation::from_cycles(degree, &refs)
    }

    pub fn degree(&self) -> usize {
        self.images.len()
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn apply(&self, x: usize) -> usize {
        self.images[x]
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &x)| i == x)
    }

    /// `(self ∘ other)(x) = self(other(x))`.
    pub fn compose(&self, other: &Permutation) -> Result<Permutation> {
        if self.degree() != other.degree() {
            return Err(Error::DegreeMismatch {
                left: self.degree(),
                right: other.degree(),
            });
        }
        Ok(self.compose_unchecked(other))
    }

    fn compose_unchecked(&self, other: &Permutation) -> Permutation {
        Permutation {
            images: other.images.iter().map(|&x| self.images[x]).collect(),
        }
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.degree()];
        for (i, &x) in self.images.iter().enumerate() {
            inv[x] = i;
        }
        Permutation { images: inv }
    }

    /// Permutation matrix `M` with `M e_j = e_{π(j)}`, so that
    /// `matrix(p ∘ q) = matrix(p) · matrix(q)`.
    pub fn matrix(&self) -> DMatrix<f64> {
        let m = self.degree();
        let mut out = DMatrix::zeros(m, m);
        for (j, &i) in self.images.iter().enumerate() {
            out[(i, j)] = 1.0;
        }
        out
    }

    /// Disjoint cycles (0-based), fixed points omitted.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.degree()];
        let mut out = Vec::new();
        for start in 0..self.degree() {
            if seen[start] || self.images[start] == start {
                seen[start] = true;
                continue;
            }
            let mut cycle = vec![start];
            seen[start] = true;
            let mut x = self.images[start];
            while x != start {
                seen[x] = true;
                cycle.push(x);
                x = self.images[x];
            }
            out.push(cycle);
        }
        out
    }
}

impl fmt::Display for Permutation {
    /// 1-based cycle notation.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cycles = self.cycles();
        if cycles.is_empty() {
            return write!(f, "()");
        }
        for c in cycles {
            let pts: Vec<String> = c.iter().map(|x| (x + 1).to_string()).collect();
            write!(f, "({})", pts.join(" "))?;
        }
        Ok(())
    }
}

/// One letter of a word: a generator or its inverse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Letter {
    pub generator: usize,
    pub inverse: bool,
}

#[derive(Debug, Clone)]
pub struct GroupElement {
    pub perm: Permutation,
    /// Product of these letters, left to right, equals `perm`.
    pub word: Vec<Letter>,
}

impl GroupElement {
    pub fn word_string(&self) -> String {
        if self.word.is_empty() {
            return "e".to_string();
        }
        self.word
            .iter()
            .map(|l| {
                if l.inverse {
                    format!("g{}^-1", l.generator + 1)
                } else {
                    format!("g{}", l.generator + 1)
                }
            })
            .collect::<Vec<_>>()
            .join("*")
    }
}

/// A finite permutation group with all of its elements enumerated.
///
/// Element 0 is always the identity. Elements appear in BFS order over the
/// letters `g1, g1⁻¹, g2, g2⁻¹, …` (inverse letters are skipped for
/// involutions), so the order is reproducible.
#[derive(Debug, Clone)]
pub struct PermutationGroup {
    degree: usize,
    generators: Vec<Permutation>,
    elements: Vec<GroupElement>,
    index: HashMap<Vec<usize>, usize>,
    inverses: Vec<usize>,
}

impl PermutationGroup {
    /// Breadth-first product closure of `generators`.
    pub fn closure(degree: usize, generators: Vec<Permutation>, cap: usize) -> Result<Self> {
        for g in &generators {
            if g.degree() != degree {
                return Err(Error::DegreeMismatch {
                    left: degree,
                    right: g.degree(),
                });
            }
        }
        let cap = cap.max(1);
        let mut letters: Vec<(Letter, Permutation)> = Vec::new();
        for (i, g) in generators.iter().enumerate() {
            letters.push((
                Letter {
                    generator: i,
                    inverse: false,
                },
                g.clone(),
            ));
            let inv = g.inverse();
            if &inv != g {
                letters.push((
                    Letter {
                        generator: i,
                        inverse: true,
                    },
                    inv,
                ));
            }
        }

        let id = Permutation::identity(degree);
        let mut elements = vec![GroupElement {
            perm: id.clone(),
            word: Vec::new(),
        }];
        let mut index = HashMap::new();
        index.insert(id.images.clone(), 0usize);
        let mut queue = VecDeque::from([0usize]);
        while let Some(cur) = queue.pop_front() {
            for (letter, p) in &letters {
                let next = elements[cur].perm.compose_unchecked(p);
                if index.contains_key(&next.images) {
                    continue;
                }
                if elements.len() >= cap {
                    return Err(Error::EnumerationOverflow { cap });
                }
                let mut word = elements[cur].word.clone();
                word.push(*letter);
                index.insert(next.images.clone(), elements.len());
                queue.push_back(elements.len());
                elements.push(GroupElement { perm: next, word });
            }
        }

        let inverses = elements
            .iter()
            .map(|e| index[&e.perm.inverse().images])
            .collect();
        Ok(PermutationGroup {
            degree,
            generators,
            elements,
            index,
            inverses,
        })
    }

    pub fn trivial(degree: usize) -> Self {
        PermutationGroup::closure(degree, Vec::new(), 1).expect("trivial group")
    }

    /// `ℤ_k` on `k` points, generated by `i ↦ i+1 (mod k)`.
    pub fn cyclic(k: usize) -> Result<Self> {
        let k = k.max(1);
        let r = Permutation::new((0..k).map(|i| (i + 1) % k).collect())?;
        PermutationGroup::closure(k, vec![r], DEFAULT_CAP)
    }

    /// `D_k` generated by the rotation `R₁` and the reflection `S₁`.
    ///
    /// For `k ≥ 3` the action is on the `k` polygon vertices with
    /// `R₁: i ↦ i+1` and `S₁: i ↦ -i`. `D₂` acts on 4 points.
    pub fn dihedral(k: usize) -> Result<Self> {
        if k < 2 {
            return Err(Error::OutOfRange {
                family: "dihedral",
                range: "k >= 2",
                got: k,
            });
        }
        if k == 2 {
            let r = Permutation::from_cycles(4, &[&[0, 1], &[2, 3]])?;
            let s = Permutation::from_cycles(4, &[&[0, 2], &[1, 3]])?;
            return PermutationGroup::closure(4, vec![r, s], DEFAULT_CAP);
        }
        let r = Permutation::new((0..k).map(|i| (i + 1) % k).collect())?;
        let s = Permutation::new((0..k).map(|i| (k - i) % k).collect())?;
        PermutationGroup::closure(k, vec![r, s], DEFAULT_CAP)
    }

    /// `S_n` on `n` points, generated by `(1 2)` and `(1 2 … n)`.
    pub fn symmetric(n: usize) -> Result<Self> {
        let n = n.max(1);
        if n == 1 {
            return Ok(PermutationGroup::trivial(1));
        }
        let t = Permutation::from_cycles(n, &[&[0, 1]])?;
        let c = Permutation::new((0..n).map(|i| (i + 1) % n).collect())?;
        PermutationGroup::closure(n, vec![t, c], DEFAULT_CAP)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn generators(&self) -> &[Permutation] {
        &self.generators
    }

    pub fn elements(&self) -> &[GroupElement] {
        &self.elements
    }

    pub fn element(&self, i: usize) -> &GroupElement {
        &self.elements[i]
    }

    pub fn index_of(&self, p: &Permutation) -> Option<usize> {
        self.index.get(&p.images).copied()
    }

    pub fn inverse_index(&self, i: usize) -> usize {
        self.inverses[i]
    }

    /// Index of `elements[i] ∘ elements[j]`.
    pub fn product_index(&self, i: usize, j: usize) -> usize {
        let p = self.elements[i]
            .perm
            .compose_unchecked(&self.elements[j].perm);
        self.index[&p.images]
    }

    /// Index of `elements[i] ∘ generators[g]`.
    pub fn times_generator(&self, i: usize, g: usize) -> usize {
        let p = self.elements[i].perm.compose_unchecked(&self.generators[g]);
        self.index[&p.images]
    }

    /// Evaluates a word over the generators.
    pub fn evaluate_word(&self, word: &[Letter]) -> Permutation {
        word.iter()
            .fold(Permutation::identity(self.degree), |acc, l| {
                let g = &self.generators[l.generator];
                if l.inverse {
                    acc.compose_unchecked(&g.inverse())
                } else {
                    acc.compose_unchecked(g)
                }
            })
    }
}

/// Values that can be multiplied along words: permutations and square
/// matrices.
pub trait GroupValue: Clone {
    fn identity_like(&self) -> Self;
    fn mul(&self, rhs: &Self) -> Self;
    fn try_inverse(&self) -> Option<Self>;
}

impl GroupValue for Permutation {
    fn identity_like(&self) -> Self {
        Permutation::identity(self.degree())
    }
    fn mul(&self, rhs: &Self) -> Self {
        self.compose_unchecked(rhs)
    }
    fn try_inverse(&self) -> Option<Self> {
        Some(self.inverse())
    }
}

impl GroupValue for DMatrix<f64> {
    fn identity_like(&self) -> Self {
        DMatrix::identity(self.nrows(), self.ncols())
    }
    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn try_inverse(&self) -> Option<Self> {
        if !self.is_square() {
            return None;
        }
        self.clone().try_inverse()
    }
}

/// Extends one value per generator to every group element by multiplying
/// the generator images along each element's word.
///
/// The result is indexed like [`PermutationGroup::elements`]. It is a
/// homomorphism exactly when the images satisfy the group's relations; that
/// is checked by the callers that need it.
pub fn extend_by_words<V: GroupValue>(group: &PermutationGroup, images: &[V]) -> Result<Vec<V>> {
    let Some(first) = images.first() else {
        return Err(Error::ImageCountMismatch {
            expected: group.generators().len().max(1),
            got: 0,
        });
    };
    extend_by_words_from(group, images, &first.identity_like())
}

/// [`extend_by_words`] with an explicit identity value, which also covers
/// groups without generators.
pub fn extend_by_words_from<V: GroupValue>(
    group: &PermutationGroup,
    images: &[V],
    identity: &V,
) -> Result<Vec<V>> {
    if images.len() != group.generators().len() {
        return Err(Error::ImageCountMismatch {
            expected: group.generators().len(),
            got: images.len(),
        });
    }
    let inverses = images
        .iter()
        .enumerate()
        .map(|(i, v)| v.try_inverse().ok_or(Error::NonInvertibleImage { index: i }))
        .collect::<Result<Vec<_>>>()?;
    Ok(group
        .elements()
        .iter()
        .map(|e| {
            e.word.iter().fold(identity.clone(), |acc, l| {
                if l.inverse {
                    acc.mul(&inverses[l.generator])
                } else {
                    acc.mul(&images[l.generator])
                }
            })
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str, m: usize) -> Permutation {
        Permutation::parse_cycles(s, m).unwrap()
    }

    #[test]
    fn transposition_is_involution() {
        let t = p("(1 2)", 2);
        assert!(t.compose(&t).unwrap().is_identity());
    }

    #[test]
    fn identity_is_neutral() {
        let a = p("(1 3 2)(4 5)", 6);
        let id = Permutation::identity(6);
        assert_eq!(a.compose(&id).unwrap(), a);
        assert_eq!(id.compose(&a).unwrap(), a);
    }

    #[test]
    fn compose_applies_right_first() {
        // (1 2) ∘ (2 3): 2 -> 3 -> 3, 3 -> 2 -> 1
        let c = p("(1 2)", 3).compose(&p("(2 3)", 3)).unwrap();
        assert_eq!(c.images(), &[1, 2, 0]);
    }

    #[test]
    fn degree_mismatch_is_an_error() {
        let err = p("(1 2)", 2).compose(&p("(1 2)", 3)).unwrap_err();
        assert!(matches!(err, Error::DegreeMismatch { .. }));
    }

    #[test]
    fn induced_petersen_transposition_squares_to_identity() {
        let t = p("(3 7)(4 10)(8 9)", 10);
        assert!(t.compose(&t).unwrap().is_identity());
        assert_eq!(t.to_string(), "(3 7)(4 10)(8 9)");
    }

    #[test]
    fn parse_rejects_garbage() {
        assert!(Permutation::parse_cycles("(1 2", 3).is_err());
        assert!(Permutation::parse_cycles("(1 4)", 3).is_err());
        assert!(Permutation::parse_cycles("(0 1)", 3).is_err());
        assert!(Permutation::parse_cycles("(1 1)", 3).is_err());
        assert!(Permutation::parse_cycles("()", 3).unwrap().is_identity());
        assert!(Permutation::parse_cycles("(1,2)", 3).is_ok());
    }

    #[test]
    fn invalid_images_rejected() {
        assert!(Permutation::new(vec![0, 0, 1]).is_err());
        assert!(Permutation::new(vec![0, 3, 1]).is_err());
    }

    #[test]
    fn dihedral_four_has_eight_elements() {
        let r = p("(1 4 3 2)", 4);
        let s = p("(1 3)", 4);
        let g = PermutationGroup::closure(4, vec![r, s], DEFAULT_CAP).unwrap();
        assert_eq!(g.order(), 8);
    }

    #[test]
    fn s5_has_120_elements() {
        let g = PermutationGroup::closure(5, vec![p("(1 2)", 5), p("(1 2 3 4 5)", 5)], DEFAULT_CAP)
            .unwrap();
        assert_eq!(g.order(), 120);
    }

    #[test]
    fn empty_generators_give_trivial_group() {
        let g = PermutationGroup::closure(7, vec![], DEFAULT_CAP).unwrap();
        assert_eq!(g.order(), 1);
        assert!(g.element(0).perm.is_identity());
    }

    #[test]
    fn cap_overflow_reported() {
        let err = PermutationGroup::closure(5, vec![p("(1 2)", 5), p("(1 2 3 4 5)", 5)], 50)
            .unwrap_err();
        assert!(matches!(err, Error::EnumerationOverflow { cap: 50 }));
    }

    #[test]
    fn builtin_group_orders() {
        for k in 1..=8 {
            assert_eq!(PermutationGroup::cyclic(k).unwrap().order(), k);
        }
        for k in 2..=8 {
            assert_eq!(PermutationGroup::dihedral(k).unwrap().order(), 2 * k);
        }
        let fact = [1, 1, 2, 6, 24, 120, 720];
        for n in 1..=6 {
            assert_eq!(PermutationGroup::symmetric(n).unwrap().order(), fact[n]);
        }
    }

    #[test]
    fn closure_is_closed_and_words_evaluate() {
        let g = PermutationGroup::dihedral(5).unwrap();
        for (i, e) in g.elements().iter().enumerate() {
            assert_eq!(g.evaluate_word(&e.word), e.perm);
            let inv = g.inverse_index(i);
            assert!(g.element(g.product_index(i, inv)).perm.is_identity());
            for j in 0..g.order() {
                let prod = e.perm.compose(&g.element(j).perm).unwrap();
                assert!(g.index_of(&prod).is_some());
            }
        }
    }

    #[test]
    fn extend_to_petersen_vertex_action() {
        let g = PermutationGroup::symmetric(5).unwrap();
        let vt = p("(3 7)(4 10)(8 9)", 10);
        let vc = p("(1 4 2 5 3)(6 9 7 10 8)", 10);
        let action = extend_by_words(&g, &[vt, vc]).unwrap();
        assert_eq!(action.len(), 120);
        assert!(action[0].is_identity());
        for i in 0..g.order() {
            for j in 0..g.order() {
                let lhs = &action[g.product_index(i, j)];
                let rhs = action[i].compose(&action[j]).unwrap();
                assert_eq!(lhs, &rhs);
            }
        }
        // faithful: 120 distinct vertex permutations
        let distinct: std::collections::HashSet<_> = action.iter().collect();
        assert_eq!(distinct.len(), 120);
    }

    #[test]
    fn extend_constant_identity() {
        let g = PermutationGroup::dihedral(4).unwrap();
        let id = DMatrix::<f64>::identity(3, 3);
        let vals = extend_by_words(&g, &[id.clone(), id.clone()]).unwrap();
        assert!(vals.iter().all(|v| v == &id));
    }

    #[test]
    fn extend_dihedral_matrices() {
        let g = PermutationGroup::closure(4, vec![p("(1 4 3 2)", 4), p("(1 3)", 4)], DEFAULT_CAP)
            .unwrap();
        let r = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        let s = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        let vals = extend_by_words(&g, &[r.clone(), s]).unwrap();
        assert_eq!(vals.len(), 8);
        let r2 = g.element(0).perm.compose(&g.generators()[0]).unwrap();
        let r2 = r2.compose(&g.generators()[0]).unwrap();
        let idx = g.index_of(&r2).unwrap();
        assert_eq!(vals[idx], -DMatrix::<f64>::identity(2, 2));
        assert_eq!(vals[idx], &r * &r);
    }

    #[test]
    fn extend_rejects_bad_images() {
        let g = PermutationGroup::dihedral(4).unwrap();
        let id = DMatrix::<f64>::identity(2, 2);
        assert!(matches!(
            extend_by_words(&g, &[id.clone()]),
            Err(Error::ImageCountMismatch { .. })
        ));
        let singular = DMatrix::<f64>::zeros(2, 2);
        assert!(matches!(
            extend_by_words(&g, &[id, singular]),
            Err(Error::NonInvertibleImage { index: 1 })
        ));
    }
}
