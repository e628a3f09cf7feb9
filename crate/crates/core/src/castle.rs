//! Finite clopen castles: towers of equinumerous levels whose columns are
//! the orbits of a finite principal groupoid.
//!
//! Columns are stored positionally, so the level-to-level bijections are
//! implicit: level j of a column moves to level k of the same column.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rational::Rational;
use crate::space::{Point, WindowedSpace};
use crate::tiling::{verify_tiling, Tiling};

pub type Atom = String;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tower {
    pub height: usize,
    pub columns: Vec<Vec<Atom>>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Castle {
    pub towers: Vec<Tower>,
}

/// Position of an atom: tower, column within the tower, level.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Position {
    pub tower: usize,
    pub column: usize,
    pub level: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "violation", rename_all = "snake_case")]
pub enum Violation {
    EmptyTower { tower: usize },
    ColumnLength {
        tower: usize,
        column: usize,
        expected: usize,
        found: usize,
    },
    DuplicateAtom {
        atom: Atom,
        first: Position,
        second: Position,
    },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::EmptyTower { tower } => write!(f, "tower {tower} has no levels or no columns"),
            Violation::ColumnLength {
                tower,
                column,
                expected,
                found,
            } => write!(
                f,
                "column {column} of tower {tower} has {found} atoms, expected {expected}"
            ),
            Violation::DuplicateAtom { atom, first, second } => write!(
                f,
                "atom {atom:?} appears at tower {} column {} level {} and at tower {} column {} level {}",
                first.tower, first.column, first.level, second.tower, second.column, second.level
            ),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CastleError {
    #[error("invalid castle: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Violation>),
    #[error("unknown atom {0:?}")]
    UnknownAtom(Atom),
    #[error("atom {0:?} is not a point of the window")]
    AtomNotAPoint(Atom),
    #[error("the tiling does not verify: {0}")]
    UnverifiedTiling(String),
}

/// Per-orbit masses; orbits are columns in tower-then-column order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypeVector(pub Vec<u64>);

impl TypeVector {
    /// Componentwise order of ℕ^k.
    pub fn le(&self, other: &TypeVector) -> bool {
        self.0.len() == other.0.len() && self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }
}

/// One atom-level move of a subequivalence witness, inside a column.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelMove {
    pub from: Atom,
    pub to: Atom,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Refusal {
    /// Offending tower of the castle refined against {A, B}.
    pub tower: usize,
    /// The tower of the input castle it came from.
    pub origin: usize,
    pub e: usize,
    pub f: usize,
    pub e_counts: Vec<usize>,
    pub f_counts: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum Comparison {
    Witness {
        e_counts: Vec<usize>,
        f_counts: Vec<usize>,
        moves: Vec<LevelMove>,
    },
    Refusal(Refusal),
}

/// Generators (single orbits) of an order ideal of ℕ^{#orbits}, with the
/// invariant atom set it corresponds to.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrderIdeal {
    pub orbits: Vec<usize>,
    pub atoms: Vec<Atom>,
}

impl Castle {
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut seen: HashMap<&str, Position> = HashMap::new();
        for (t, tower) in self.towers.iter().enumerate() {
            if tower.height == 0 || tower.columns.is_empty() {
                out.push(Violation::EmptyTower { tower: t });
            }
            for (c, column) in tower.columns.iter().enumerate() {
                if column.len() != tower.height {
                    out.push(Violation::ColumnLength {
                        tower: t,
                        column: c,
                        expected: tower.height,
                        found: column.len(),
                    });
                }
                for (level, atom) in column.iter().enumerate() {
                    let here = Position {
                        tower: t,
                        column: c,
                        level,
                    };
                    if let Some(&first) = seen.get(atom.as_str()) {
                        out.push(Violation::DuplicateAtom {
                            atom: atom.clone(),
                            first,
                            second: here,
                        });
                    } else {
                        seen.insert(atom, here);
                    }
                }
            }
        }
        out
    }

    fn checked(&self) -> Result<(), CastleError> {
        let v = self.validate();
        if v.is_empty() {
            Ok(())
        } else {
            Err(CastleError::Invalid(v))
        }
    }

    /// Atoms in tower, column, level order.
    pub fn atoms(&self) -> impl Iterator<Item = &Atom> {
        self.towers.iter().flat_map(|t| t.columns.iter().flatten())
    }

    pub fn orbit_count(&self) -> usize {
        self.towers.iter().map(|t| t.columns.len()).sum()
    }

    /// Columns as atom lists, in orbit order.
    pub fn orbits(&self) -> impl Iterator<Item = &Vec<Atom>> {
        self.towers.iter().flat_map(|t| t.columns.iter())
    }

    /// Level `level` of tower `tower`.
    pub fn level(&self, tower: usize, level: usize) -> Vec<&Atom> {
        self.towers[tower].columns.iter().map(|c| &c[level]).collect()
    }

    fn positions(&self) -> HashMap<&str, Position> {
        let mut map = HashMap::new();
        for (t, tower) in self.towers.iter().enumerate() {
            for (c, column) in tower.columns.iter().enumerate() {
                for (level, atom) in column.iter().enumerate() {
                    map.insert(
                        atom.as_str(),
                        Position {
                            tower: t,
                            column: c,
                            level,
                        },
                    );
                }
            }
        }
        map
    }

    fn check_known<'a>(
        positions: &HashMap<&str, Position>,
        atoms: impl IntoIterator<Item = &'a Atom>,
    ) -> Result<(), CastleError> {
        for a in atoms {
            if !positions.contains_key(a.as_str()) {
                return Err(CastleError::UnknownAtom(a.clone()));
            }
        }
        Ok(())
    }

    /// Splits every tower so each level is contained in or disjoint from
    /// every target: columns are grouped by their level-membership pattern,
    /// groups in order of first appearance.
    pub fn refine(&self, targets: &[BTreeSet<Atom>]) -> Result<Castle, CastleError> {
        self.checked()?;
        Self::check_known(&self.positions(), targets.iter().flatten())?;
        Ok(self.refine_unchecked(targets).0)
    }

    /// Refinement plus, for each output tower, the input tower it came from.
    fn refine_unchecked(&self, targets: &[BTreeSet<Atom>]) -> (Castle, Vec<usize>) {
        let split: Vec<Vec<Tower>> = self
            .towers
            .par_iter()
            .map(|tower| {
                let mut groups: Vec<(Vec<bool>, Vec<Vec<Atom>>)> = Vec::new();
                for column in &tower.columns {
                    let pattern: Vec<bool> = column
                        .iter()
                        .flat_map(|a| targets.iter().map(move |t| t.contains(a)))
                        .collect();
                    match groups.iter_mut().find(|(p, _)| *p == pattern) {
                        Some((_, cols)) => cols.push(column.clone()),
                        None => groups.push((pattern, vec![column.clone()])),
                    }
                }
                groups
                    .into_iter()
                    .map(|(_, columns)| Tower {
                        height: tower.height,
                        columns,
                    })
                    .collect()
            })
            .collect();
        let origin = split
            .iter()
            .enumerate()
            .flat_map(|(i, towers)| std::iter::repeat_n(i, towers.len()))
            .collect();
        (
            Castle {
                towers: split.into_iter().flatten().collect(),
            },
            origin,
        )
    }

    /// Orbit o ↦ Σ_{x∈o} f(x); atoms missing from `f` count as 0.
    pub fn type_vector(&self, f: &BTreeMap<Atom, u64>) -> Result<TypeVector, CastleError> {
        self.checked()?;
        Self::check_known(&self.positions(), f.keys())?;
        Ok(self.type_vector_unchecked(f))
    }

    fn type_vector_unchecked(&self, f: &BTreeMap<Atom, u64>) -> TypeVector {
        TypeVector(
            self.orbits()
                .map(|col| col.iter().map(|a| f.get(a).copied().unwrap_or(0)).sum())
                .collect(),
        )
    }

    /// Decides A ≼ B: after refining against {A, B}, A is subequivalent to B
    /// iff every tower has at most as many levels inside A as inside B. The
    /// witness sends the k-th A-level of each tower to its k-th B-level.
    pub fn compare(&self, a: &BTreeSet<Atom>, b: &BTreeSet<Atom>) -> Result<Comparison, CastleError> {
        self.checked()?;
        Self::check_known(&self.positions(), a.iter().chain(b))?;
        let (refined, origin) = self.refine_unchecked(&[a.clone(), b.clone()]);
        let levels: Vec<(Vec<usize>, Vec<usize>)> = refined
            .towers
            .iter()
            .map(|t| {
                let first = &t.columns[0];
                let inside = |s: &BTreeSet<Atom>| (0..t.height).filter(|&l| s.contains(&first[l])).collect();
                (inside(a), inside(b))
            })
            .collect();
        let e_counts: Vec<usize> = levels.iter().map(|(e, _)| e.len()).collect();
        let f_counts: Vec<usize> = levels.iter().map(|(_, f)| f.len()).collect();
        if let Some(t) = (0..levels.len()).find(|&t| e_counts[t] > f_counts[t]) {
            return Ok(Comparison::Refusal(Refusal {
                tower: t,
                origin: origin[t],
                e: e_counts[t],
                f: f_counts[t],
                e_counts,
                f_counts,
            }));
        }
        let moves = refined
            .towers
            .iter()
            .zip(&levels)
            .flat_map(|(tower, (es, fs))| {
                tower.columns.iter().flat_map(move |col| {
                    es.iter().zip(fs).map(move |(&j, &k)| LevelMove {
                        from: col[j].clone(),
                        to: col[k].clone(),
                    })
                })
            })
            .collect();
        Ok(Comparison::Witness {
            e_counts,
            f_counts,
            moves,
        })
    }

    /// Checks a subequivalence witness: sources partition A, targets are
    /// distinct members of B, and every move stays inside one orbit.
    pub fn replay_witness(
        &self,
        moves: &[LevelMove],
        a: &BTreeSet<Atom>,
        b: &BTreeSet<Atom>,
    ) -> Result<(), String> {
        let positions = self.positions();
        let mut sources = BTreeSet::new();
        let mut targets = BTreeSet::new();
        for m in moves {
            let (Some(p), Some(q)) = (positions.get(m.from.as_str()), positions.get(m.to.as_str())) else {
                return Err(format!("unknown atom in move {} -> {}", m.from, m.to));
            };
            if (p.tower, p.column) != (q.tower, q.column) {
                return Err(format!("{} -> {} leaves its orbit", m.from, m.to));
            }
            if !a.contains(&m.from) || !sources.insert(&m.from) {
                return Err(format!("source {} is outside A or repeated", m.from));
            }
            if !b.contains(&m.to) || !targets.insert(&m.to) {
                return Err(format!("target {} is outside B or repeated", m.to));
            }
        }
        if sources.len() != a.len() {
            return Err("sources do not cover A".into());
        }
        Ok(())
    }

    /// f is an order unit iff its type vector is positive on every orbit.
    pub fn is_order_unit(&self, f: &BTreeMap<Atom, u64>) -> Result<bool, CastleError> {
        Ok(self.type_vector(f)?.0.iter().all(|&m| m > 0))
    }

    /// All 2^{#orbits} order ideals, generated lazily in binary-counter
    /// order starting from {0}.
    pub fn order_ideals(&self) -> impl Iterator<Item = OrderIdeal> + '_ {
        let k = self.orbit_count();
        let orbits: Vec<&Vec<Atom>> = self.orbits().collect();
        let mut mask = Some(vec![false; k]);
        std::iter::from_fn(move || {
            let current = mask.take()?;
            let mut next = current.clone();
            if let Some(i) = next.iter().position(|b| !b) {
                next[..i].iter_mut().for_each(|b| *b = false);
                next[i] = true;
                mask = Some(next);
            }
            let members: Vec<usize> = (0..k).filter(|&i| current[i]).collect();
            let mut atoms: Vec<Atom> = members.iter().flat_map(|&i| orbits[i].iter().cloned()).collect();
            atoms.sort();
            Some(OrderIdeal {
                orbits: members,
                atoms,
            })
        })
    }
}

/// The castle whose orbits are the tiles: one tower per tile size in
/// increasing order, columns in tile order, atoms in point order.
pub fn castle_from_tiling(t: &Tiling) -> Result<Castle, CastleError> {
    let report = verify_tiling(t).map_err(|e| CastleError::UnverifiedTiling(e.to_string()))?;
    if !report.pass {
        return Err(CastleError::UnverifiedTiling(format!(
            "tiles {:?} fail the Følner or diameter bound",
            report.failing
        )));
    }
    let space = t.space();
    let mut by_size: BTreeMap<usize, Vec<Vec<Atom>>> = BTreeMap::new();
    for tile in &t.tiles {
        by_size
            .entry(tile.len())
            .or_default()
            .push(tile.iter().map(|&p| space.label(p)).collect());
    }
    Ok(Castle {
        towers: by_size
            .into_iter()
            .map(|(height, columns)| Tower { height, columns })
            .collect(),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Defect {
    /// max |∂_R^+(o)| / |o| over clean orbits, 0 when there are none.
    pub value: Rational,
    pub measured: usize,
    pub contaminated: usize,
}

/// Invariance defect of the castle's orbits against the R-neighbourhood
/// of the diagonal, ignoring orbits whose R-neighbourhood meets the halo.
pub fn invariance_defect(
    castle: &Castle,
    window: &WindowedSpace,
    radius: u64,
) -> Result<Defect, CastleError> {
    castle.checked()?;
    let space = window.space();
    let orbits: Vec<Vec<Point>> = castle
        .orbits()
        .map(|col| {
            let mut pts = col
                .iter()
                .map(|a| space.index_of(a).ok_or_else(|| CastleError::AtomNotAPoint(a.clone())))
                .collect::<Result<Vec<_>, _>>()?;
            pts.sort_unstable();
            Ok(pts)
        })
        .collect::<Result<_, CastleError>>()?;
    let ratios: Vec<Option<Rational>> = orbits
        .par_iter()
        .map(|o| {
            (!window.is_contaminated(o, radius)).then(|| {
                Rational::ratio_of(space.outer_boundary_unchecked(o, radius).len(), o.len())
            })
        })
        .collect();
    let measured = ratios.iter().flatten().count();
    Ok(Defect {
        value: ratios.iter().flatten().copied().max().unwrap_or_else(Rational::zero),
        measured,
        contaminated: ratios.len() - measured,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{interval_window, FiniteMetricSpace};
    use crate::tiling::{tile_interval, Construction};
    use proptest::prelude::*;
    use std::sync::Arc;

    fn tower(height: usize, columns: &[&[&str]]) -> Tower {
        Tower {
            height,
            columns: columns
                .iter()
                .map(|c| c.iter().map(|a| a.to_string()).collect())
                .collect(),
        }
    }

    fn set(atoms: &[&str]) -> BTreeSet<Atom> {
        atoms.iter().map(|a| a.to_string()).collect()
    }

    fn indicator(atoms: &[&str]) -> BTreeMap<Atom, u64> {
        atoms.iter().map(|a| (a.to_string(), 1)).collect()
    }

    fn two_tower() -> Castle {
        Castle {
            towers: vec![
                tower(3, &[&["a0", "a1", "a2"], &["b0", "b1", "b2"]]),
                tower(2, &[&["c0", "c1"]]),
            ],
        }
    }

    #[test]
    fn validation() {
        let ok = Castle {
            towers: vec![tower(2, &[&["a", "c"], &["b", "d"]])],
        };
        assert!(ok.validate().is_empty());
        let dup = Castle {
            towers: vec![tower(2, &[&["a", "c"], &["a", "d"]])],
        };
        assert!(matches!(
            &dup.validate()[..],
            [Violation::DuplicateAtom { atom, .. }] if atom == "a"
        ));
        let empty = Castle {
            towers: vec![tower(0, &[])],
        };
        assert_eq!(empty.validate(), vec![Violation::EmptyTower { tower: 0 }]);
        let ragged = Castle {
            towers: vec![tower(2, &[&["a"]])],
        };
        assert!(matches!(ragged.validate()[0], Violation::ColumnLength { found: 1, .. }));
    }

    #[test]
    fn refine_splits_by_pattern() {
        let c = Castle {
            towers: vec![tower(2, &[&["a", "c"], &["b", "d"]])],
        };
        let r = c.refine(&[set(&["a", "d"])]).unwrap();
        assert_eq!(
            r.towers,
            vec![tower(2, &[&["a", "c"]]), tower(2, &[&["b", "d"]])]
        );
        assert_eq!(c.refine(&[set(&["a", "b"])]).unwrap(), c);
        assert_eq!(c.refine(&[BTreeSet::new()]).unwrap(), c);
        assert_eq!(
            c.refine(&[set(&["z"])]).unwrap_err(),
            CastleError::UnknownAtom("z".into())
        );
    }

    #[test]
    fn type_vectors() {
        let c = two_tower();
        let all: BTreeMap<Atom, u64> = c.atoms().map(|a| (a.clone(), 1)).collect();
        assert_eq!(c.type_vector(&all).unwrap(), TypeVector(vec![3, 3, 2]));
        assert_eq!(
            c.type_vector(&indicator(&["a1", "b1"])).unwrap(),
            TypeVector(vec![1, 1, 0])
        );
        assert_eq!(c.type_vector(&BTreeMap::new()).unwrap(), TypeVector(vec![0, 0, 0]));
    }

    #[test]
    fn compare_examples() {
        let c = two_tower();
        let a = set(&["a0", "b0"]);
        let b = set(&["a1", "b1", "a2", "b2", "c0"]);
        let Comparison::Witness {
            e_counts,
            f_counts,
            moves,
        } = c.compare(&a, &b).unwrap()
        else {
            panic!("expected a witness")
        };
        assert_eq!((e_counts, f_counts), (vec![1, 0], vec![2, 1]));
        c.replay_witness(&moves, &a, &b).unwrap();
        assert_eq!(
            moves,
            vec![
                LevelMove { from: "a0".into(), to: "a1".into() },
                LevelMove { from: "b0".into(), to: "b1".into() },
            ]
        );

        let Comparison::Refusal(r) = c.compare(&b, &a).unwrap() else {
            panic!("expected a refusal")
        };
        assert_eq!((r.tower, r.origin, r.e, r.f), (0, 0, 2, 1));
        assert_eq!((r.e_counts, r.f_counts), (vec![2, 1], vec![1, 0]));

        let Comparison::Witness { moves, .. } = c.compare(&BTreeSet::new(), &b).unwrap() else {
            panic!("expected a witness")
        };
        assert!(moves.is_empty());
    }

    #[test]
    fn order_units_and_ideals() {
        let c = two_tower();
        let all: BTreeMap<Atom, u64> = c.atoms().map(|a| (a.clone(), 1)).collect();
        assert!(c.is_order_unit(&all).unwrap());
        assert!(!c.is_order_unit(&indicator(&["a0", "b1"])).unwrap());
        let single = Castle {
            towers: vec![tower(3, &[&["x", "y", "z"]])],
        };
        assert!(single.is_order_unit(&indicator(&["y"])).unwrap());
        assert_eq!(single.order_ideals().count(), 2);
        let pair = Castle {
            towers: vec![tower(1, &[&["x"], &["y"]])],
        };
        let ideals: Vec<Vec<usize>> = pair.order_ideals().map(|i| i.orbits).collect();
        assert_eq!(ideals, vec![vec![], vec![0], vec![1], vec![0, 1]]);
        assert_eq!(c.order_ideals().count(), 8);
    }

    #[test]
    fn castle_from_interval_tiling() {
        let window = Arc::new(interval_window(0, 99, 1));
        let t = tile_interval(window.clone(), 1, Rational::new(1, 10)).unwrap();
        let c = castle_from_tiling(&t).unwrap();
        assert!(c.validate().is_empty());
        let heights: Vec<(usize, usize)> = c.towers.iter().map(|t| (t.height, t.columns.len())).collect();
        assert_eq!(heights, vec![(21, 3), (37, 1)]);
        assert_eq!(c.towers[0].columns[0][0], "0");
        let d = invariance_defect(&c, &window, 1).unwrap();
        assert_eq!(Some(d.value), t.max_clean_ratio());
        assert_eq!(d.value, Rational::new(2, 21));
    }

    #[test]
    fn castle_from_manual_tilings() {
        let w = Arc::new(WindowedSpace::whole(FiniteMetricSpace::integer_interval(0, 16)));
        let single = Tiling::from_parts(
            w.clone(),
            1,
            Rational::new(1, 2),
            vec![(0..17).collect()],
            16,
            &[],
            Construction::Manual,
        )
        .unwrap();
        let c = castle_from_tiling(&single).unwrap();
        assert_eq!(c.towers.len(), 1);
        assert_eq!(c.towers[0].columns.len(), 1);
        assert_eq!(invariance_defect(&c, &w, 1).unwrap().value, Rational::zero());

        let mixed = Tiling::from_parts(
            w,
            1,
            Rational::new(1, 2),
            vec![(0..5).collect(), (5..10).collect(), (10..17).collect()],
            16,
            &[],
            Construction::Manual,
        )
        .unwrap();
        let c = castle_from_tiling(&mixed).unwrap();
        let shape: Vec<(usize, usize)> = c.towers.iter().map(|t| (t.height, t.columns.len())).collect();
        assert_eq!(shape, vec![(5, 2), (7, 1)]);
    }

    #[test]
    fn unverified_tiling_is_rejected() {
        let w = Arc::new(WindowedSpace::whole(FiniteMetricSpace::integer_interval(0, 5)));
        let t = Tiling::from_parts(w, 1, Rational::new(1, 2), vec![(0..5).collect()], 9, &[], Construction::Manual)
            .unwrap();
        assert!(matches!(castle_from_tiling(&t), Err(CastleError::UnverifiedTiling(_))));
    }

    #[test]
    fn singleton_orbits_have_defect_two() {
        let w = interval_window(0, 9, 1);
        let c = Castle {
            towers: vec![Tower {
                height: 1,
                columns: w.core().iter().map(|&p| vec![w.space().label(p)]).collect(),
            }],
        };
        let d = invariance_defect(&c, &w, 1).unwrap();
        assert_eq!(d.value, Rational::from_integer(2));
        assert_eq!((d.measured, d.contaminated), (8, 2));
        let stray = Castle {
            towers: vec![tower(1, &[&["zz"]])],
        };
        assert_eq!(
            invariance_defect(&stray, &w, 1).unwrap_err(),
            CastleError::AtomNotAPoint("zz".into())
        );
    }

    fn random_castle() -> impl Strategy<Value = Castle> {
        proptest::collection::vec((1usize..5, 1usize..4), 1..5).prop_map(|shape| {
            let mut next = 0;
            Castle {
                towers: shape
                    .into_iter()
                    .map(|(height, cols)| Tower {
                        height,
                        columns: (0..cols)
                            .map(|_| {
                                (0..height)
                                    .map(|_| {
                                        next += 1;
                                        format!("x{next}")
                                    })
                                    .collect()
                            })
                            .collect(),
                    })
                    .collect(),
            }
        })
    }

    fn subset(c: &Castle, mask: u64) -> BTreeSet<Atom> {
        c.atoms()
            .enumerate()
            .filter(|(i, _)| mask >> (i % 64) & 1 == 1)
            .map(|(_, a)| a.clone())
            .collect()
    }

    fn ones(s: &BTreeSet<Atom>) -> BTreeMap<Atom, u64> {
        s.iter().map(|a| (a.clone(), 1)).collect()
    }

    proptest! {
        #[test]
        fn compare_matches_type_vectors(c in random_castle(), ma: u64, mb: u64) {
            let (a, b) = (subset(&c, ma), subset(&c, mb));
            let dominated = c.type_vector(&ones(&a)).unwrap().le(&c.type_vector(&ones(&b)).unwrap());
            match c.compare(&a, &b).unwrap() {
                Comparison::Witness { moves, .. } => {
                    prop_assert!(dominated);
                    prop_assert!(c.replay_witness(&moves, &a, &b).is_ok());
                }
                Comparison::Refusal(_) => prop_assert!(!dominated),
            }
        }

        #[test]
        fn refine_is_idempotent_and_adapted(c in random_castle(), ma: u64, mb: u64) {
            let targets = [subset(&c, ma), subset(&c, mb)];
            let r = c.refine(&targets).unwrap();
            prop_assert!(r.validate().is_empty());
            prop_assert_eq!(&r.refine(&targets).unwrap(), &r);
            for (t, tower) in r.towers.iter().enumerate() {
                for l in 0..tower.height {
                    let level = r.level(t, l);
                    for target in &targets {
                        let inside = level.iter().filter(|a| target.contains(**a)).count();
                        prop_assert!(inside == 0 || inside == level.len());
                    }
                }
            }
            let mut before: Vec<&Vec<Atom>> = c.orbits().collect();
            let mut after: Vec<&Vec<Atom>> = r.orbits().collect();
            before.sort();
            after.sort();
            prop_assert_eq!(before, after);
        }

        #[test]
        fn almost_unperforated_in_free_monoid(
            v in proptest::collection::vec(0u64..6, 3),
            w in proptest::collection::vec(0u64..6, 3),
            n in 1u64..5,
        ) {
            let scaled_v = TypeVector(v.iter().map(|x| (n + 1) * x).collect());
            let scaled_w = TypeVector(w.iter().map(|x| n * x).collect());
            if scaled_v.le(&scaled_w) {
                prop_assert!(TypeVector(v).le(&TypeVector(w)));
            }
        }
    }
}
