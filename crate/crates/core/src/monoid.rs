//! Finitely presented commutative monoids with bounded, certificate-carrying
//! searches: word problem, algebraic preorder, almost unperforation, proper
//! infiniteness, refinement and cancellation.
//!
//! Every search explores the congruence class of a vector breadth-first,
//! applying relations in both directions, up to a rewrite depth and an
//! entry cap. Verdicts distinguish a proven "no" from "no within bounds".

use std::collections::{HashMap, HashSet, VecDeque};
use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Element(pub Vec<u32>);

impl Element {
    pub fn zero(rank: usize) -> Self {
        Element(vec![0; rank])
    }

    pub fn generator(rank: usize, i: usize) -> Self {
        let mut e = Self::zero(rank);
        e.0[i] = 1;
        e
    }

    pub fn add(&self, other: &Element) -> Element {
        Element(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn scale(&self, n: u32) -> Element {
        Element(self.0.iter().map(|a| a * n).collect())
    }

    pub fn is_below(&self, other: &Element) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// `self − other` when `other ≤ self`.
    pub fn checked_sub(&self, other: &Element) -> Option<Element> {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.checked_sub(*b))
            .collect::<Option<Vec<_>>>()
            .map(Element)
    }

    pub fn max_entry(&self) -> u32 {
        self.0.iter().copied().max().unwrap_or(0)
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }
}

impl std::fmt::Display for Element {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.0.iter().map(u32::to_string).collect();
        write!(f, "({})", parts.join(","))
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MonoidError {
    #[error("element {element} has length {found}, the presentation has rank {rank}")]
    RankMismatch {
        element: String,
        rank: usize,
        found: usize,
    },
    #[error("relation {index} has sides of length {left} and {right}, expected {rank}")]
    MalformedRelation {
        index: usize,
        rank: usize,
        left: usize,
        right: usize,
    },
    #[error("a + b = c + d is not established ({0})")]
    Precondition(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonoidPresentation {
    pub rank: usize,
    pub relations: Vec<(Element, Element)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bounds {
    /// Maximum number of rewrite steps.
    pub depth: usize,
    /// Rewrites producing an entry above this are not explored.
    pub cap: u32,
    pub z_cap: u32,
    pub n_max: u32,
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds {
            depth: 12,
            cap: 20,
            z_cap: 10,
            n_max: 4,
        }
    }
}

/// Region explored by a bounded search.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Region {
    pub depth: usize,
    pub cap: u32,
    pub explored: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", content = "detail", rename_all = "snake_case")]
pub enum Verdict<C> {
    Yes(C),
    /// The whole congruence class was explored: a proof.
    No(Region),
    /// Every explored candidate failed, but the entry cap or a search cap
    /// cut the exploration short.
    NoWithinBounds(Region),
    /// The depth limit was reached with states still unexplored.
    Unknown(Region),
}

impl<C> Verdict<C> {
    pub fn is_yes(&self) -> bool {
        matches!(self, Verdict::Yes(_))
    }

    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Yes(_) => "yes",
            Verdict::No(_) => "no",
            Verdict::NoWithinBounds(_) => "no_within_bounds",
            Verdict::Unknown(_) => "unknown",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Step {
    pub relation: usize,
    /// Left side replaced by right side when true.
    pub forward: bool,
    pub result: Element,
}

/// A chain of relation applications from `start`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Derivation {
    pub start: Element,
    pub steps: Vec<Step>,
}

impl Derivation {
    pub fn end(&self) -> &Element {
        self.steps.last().map_or(&self.start, |s| &s.result)
    }

    /// Checks every step against the presentation; returns the end point.
    pub fn replay(&self, p: &MonoidPresentation) -> Result<Element, String> {
        let mut current = self.start.clone();
        for (i, step) in self.steps.iter().enumerate() {
            let next = p
                .relations
                .get(step.relation)
                .and_then(|rel| p.rewrite(&current, rel, step.forward))
                .ok_or_else(|| format!("step {i} does not apply to {current}"))?;
            if next != step.result {
                return Err(format!("step {i} yields {next}, recorded {}", step.result));
            }
            current = next;
        }
        Ok(current)
    }

    pub fn reversed(&self) -> Derivation {
        let mut states: Vec<&Element> = vec![&self.start];
        states.extend(self.steps.iter().map(|s| &s.result));
        let steps = self
            .steps
            .iter()
            .enumerate()
            .rev()
            .map(|(i, s)| Step {
                relation: s.relation,
                forward: !s.forward,
                result: states[i].clone(),
            })
            .collect();
        Derivation {
            start: self.end().clone(),
            steps,
        }
    }
}

/// Breadth-first exploration of a congruence class.
struct Class {
    states: Vec<Element>,
    parent: Vec<Option<(usize, usize, bool)>>,
    /// No state was discarded by the entry cap and the frontier emptied.
    complete: bool,
    depth_hit: bool,
    region: Region,
}

impl Class {
    fn derivation(&self, mut idx: usize) -> Derivation {
        let mut steps = Vec::new();
        while let Some((prev, relation, forward)) = self.parent[idx] {
            steps.push(Step {
                relation,
                forward,
                result: self.states[idx].clone(),
            });
            idx = prev;
        }
        steps.reverse();
        Derivation {
            start: self.states[0].clone(),
            steps,
        }
    }

    fn negative<C>(&self) -> Verdict<C> {
        if self.depth_hit {
            Verdict::Unknown(self.region.clone())
        } else if self.complete {
            Verdict::No(self.region.clone())
        } else {
            Verdict::NoWithinBounds(self.region.clone())
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LeqCertificate {
    pub z: Element,
    /// Derivation from u + z to v.
    pub derivation: Derivation,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counterexample {
    pub x: Element,
    pub y: Element,
    pub n: u32,
    /// (n+1)x ≤ ny.
    pub scaled: LeqCertificate,
    /// The verdict for x ≤ y.
    pub refuted: Verdict<LeqCertificate>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AupOutcome {
    pub counterexample: Option<Counterexample>,
    /// Triples with (n+1)x ≤ ny proven but x ≤ y left undecided.
    pub inconclusive: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProperlyInfinite {
    /// Verdict for 2x ≤ x.
    pub direct: Verdict<LeqCertificate>,
    /// Least m ≤ m_cap with 2(mx) ≤ mx, with its certificate.
    pub least_multiple: Option<(u32, LeqCertificate)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Refinement {
    pub w: Element,
    pub x: Element,
    pub y: Element,
    pub z: Element,
    /// Derivations of a = w+x, b = y+z, c = w+y, d = x+z (each from the
    /// left-hand element).
    pub certificates: [Derivation; 4],
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CancellationCertificate {
    pub z: Element,
    /// Derivation from u + z to v + z.
    pub derivation: Derivation,
}

/// All vectors with entries ≤ `cap`, graded by total degree and
/// lexicographically descending within a degree.
pub fn graded_vectors(rank: usize, cap: u32) -> Vec<Element> {
    let mut all: Vec<Element> = Vec::new();
    let mut current = vec![0u32; rank];
    loop {
        all.push(Element(current.clone()));
        let Some(i) = (0..rank).rev().find(|&i| current[i] < cap) else {
            break;
        };
        current[i] += 1;
        current[i + 1..].iter_mut().for_each(|v| *v = 0);
    }
    all.sort_by(|a, b| a.degree().cmp(&b.degree()).then_with(|| b.cmp(a)));
    all
}

impl MonoidPresentation {
    pub fn new(rank: usize, relations: Vec<(Element, Element)>) -> Result<Self, MonoidError> {
        let p = MonoidPresentation { rank, relations };
        p.validate()?;
        Ok(p)
    }

    pub fn free(rank: usize) -> Self {
        MonoidPresentation {
            rank,
            relations: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<(), MonoidError> {
        for (index, (l, r)) in self.relations.iter().enumerate() {
            if l.0.len() != self.rank || r.0.len() != self.rank {
                return Err(MonoidError::MalformedRelation {
                    index,
                    rank: self.rank,
                    left: l.0.len(),
                    right: r.0.len(),
                });
            }
        }
        Ok(())
    }

    fn check(&self, elements: &[&Element]) -> Result<(), MonoidError> {
        self.validate()?;
        for e in elements {
            if e.0.len() != self.rank {
                return Err(MonoidError::RankMismatch {
                    element: e.to_string(),
                    rank: self.rank,
                    found: e.0.len(),
                });
            }
        }
        Ok(())
    }

    fn rewrite(&self, e: &Element, rel: &(Element, Element), forward: bool) -> Option<Element> {
        let (from, to) = if forward { (&rel.0, &rel.1) } else { (&rel.1, &rel.0) };
        e.checked_sub(from).map(|rest| rest.add(to))
    }

    /// Explores the class of `start`; stops early once `stop` accepts a
    /// state, returning its index.
    fn explore(
        &self,
        start: &Element,
        bounds: &Bounds,
        mut stop: impl FnMut(&Element) -> bool,
    ) -> (Class, Option<usize>) {
        let mut class = Class {
            states: vec![start.clone()],
            parent: vec![None],
            complete: true,
            depth_hit: false,
            region: Region {
                depth: bounds.depth,
                cap: bounds.cap,
                explored: 1,
            },
        };
        if stop(start) {
            return (class, Some(0));
        }
        let mut seen: HashMap<Element, usize> = HashMap::from([(start.clone(), 0)]);
        let mut frontier = VecDeque::from([(0usize, 0usize)]);
        while let Some((idx, depth)) = frontier.pop_front() {
            let current = class.states[idx].clone();
            for (r, rel) in self.relations.iter().enumerate() {
                for forward in [true, false] {
                    let Some(next) = self.rewrite(&current, rel, forward) else {
                        continue;
                    };
                    if seen.contains_key(&next) {
                        continue;
                    }
                    if next.max_entry() > bounds.cap {
                        class.complete = false;
                        continue;
                    }
                    if depth == bounds.depth {
                        class.depth_hit = true;
                        continue;
                    }
                    let id = class.states.len();
                    seen.insert(next.clone(), id);
                    class.states.push(next);
                    class.parent.push(Some((idx, r, forward)));
                    class.region.explored += 1;
                    if stop(&class.states[id]) {
                        return (class, Some(id));
                    }
                    frontier.push_back((id, depth + 1));
                }
            }
        }
        (class, None)
    }

    /// Word problem u = v.
    pub fn equal(&self, u: &Element, v: &Element, bounds: &Bounds) -> Result<Verdict<Derivation>, MonoidError> {
        self.check(&[u, v])?;
        Ok(self.equal_unchecked(u, v, bounds))
    }

    fn equal_unchecked(&self, u: &Element, v: &Element, bounds: &Bounds) -> Verdict<Derivation> {
        match self.explore(u, bounds, |s| s == v) {
            (class, Some(idx)) => Verdict::Yes(class.derivation(idx)),
            (class, None) => class.negative(),
        }
    }

    /// Algebraic preorder u ≤ v: some z with entries ≤ z_cap has u + z = v.
    pub fn leq(&self, u: &Element, v: &Element, bounds: &Bounds) -> Result<Verdict<LeqCertificate>, MonoidError> {
        self.check(&[u, v])?;
        Ok(self.leq_unchecked(u, v, bounds))
    }

    fn leq_unchecked(&self, u: &Element, v: &Element, bounds: &Bounds) -> Verdict<LeqCertificate> {
        let mut beyond_z_cap = false;
        let (class, hit) = self.explore(v, bounds, |w| match w.checked_sub(u) {
            Some(z) if z.max_entry() <= bounds.z_cap => true,
            Some(_) => {
                beyond_z_cap = true;
                false
            }
            None => false,
        });
        match hit {
            Some(idx) => Verdict::Yes(LeqCertificate {
                z: class.states[idx].checked_sub(u).expect("accepted state dominates u"),
                derivation: class.derivation(idx).reversed(),
            }),
            None if beyond_z_cap && !class.depth_hit => Verdict::NoWithinBounds(class.region.clone()),
            None => class.negative(),
        }
    }

    /// Sweeps x, y with entries ≤ x_cap (graded order) and 1 ≤ n ≤ n_max
    /// for (n+1)x ≤ ny with x ≤ y refuted. Only a proven refutation counts
    /// as a counterexample.
    pub fn check_almost_unperforated(&self, x_cap: u32, bounds: &Bounds) -> Result<AupOutcome, MonoidError> {
        self.validate()?;
        let vectors = graded_vectors(self.rank, x_cap);
        let first_hit = AtomicUsize::new(usize::MAX);
        let per_x: Vec<(Option<Counterexample>, usize)> = vectors
            .par_iter()
            .enumerate()
            .map(|(i, x)| {
                let mut inconclusive = 0;
                for y in &vectors {
                    if first_hit.load(Ordering::Relaxed) < i {
                        return (None, inconclusive);
                    }
                    let mut refuted = None;
                    for n in 1..=bounds.n_max {
                        let Verdict::Yes(scaled) = self.leq_unchecked(&x.scale(n + 1), &y.scale(n), bounds) else {
                            continue;
                        };
                        let direct = refuted.get_or_insert_with(|| self.leq_unchecked(x, y, bounds));
                        match direct {
                            Verdict::Yes(_) => break,
                            Verdict::No(_) => {
                                first_hit.fetch_min(i, Ordering::Relaxed);
                                return (
                                    Some(Counterexample {
                                        x: x.clone(),
                                        y: y.clone(),
                                        n,
                                        scaled,
                                        refuted: direct.clone(),
                                    }),
                                    inconclusive,
                                );
                            }
                            _ => {
                                inconclusive += 1;
                                break;
                            }
                        }
                    }
                }
                (None, inconclusive)
            })
            .collect();
        let counterexample = per_x.iter().find_map(|(c, _)| c.clone());
        Ok(AupOutcome {
            inconclusive: if counterexample.is_some() {
                0
            } else {
                per_x.iter().map(|(_, k)| k).sum()
            },
            counterexample,
        })
    }

    /// 2x ≤ x, plus the least multiple m ≤ m_cap with 2(mx) ≤ mx.
    pub fn properly_infinite(&self, x: &Element, m_cap: u32, bounds: &Bounds) -> Result<ProperlyInfinite, MonoidError> {
        self.check(&[x])?;
        let direct = self.leq_unchecked(&x.scale(2), x, bounds);
        let least_multiple = (1..=m_cap).find_map(|m| {
            let mx = x.scale(m);
            match self.leq_unchecked(&mx.scale(2), &mx, bounds) {
                Verdict::Yes(cert) => Some((m, cert)),
                _ => None,
            }
        });
        Ok(ProperlyInfinite { direct, least_multiple })
    }

    /// Bounded search for w, x, y, z with a = w+x, b = y+z, c = w+y,
    /// d = x+z, given a+b = c+d.
    pub fn refinement_instance(
        &self,
        a: &Element,
        b: &Element,
        c: &Element,
        d: &Element,
        bounds: &Bounds,
    ) -> Result<Verdict<Refinement>, MonoidError> {
        self.check(&[a, b, c, d])?;
        match self.equal_unchecked(&a.add(b), &c.add(d), bounds) {
            Verdict::Yes(_) => {}
            other => return Err(MonoidError::Precondition(other.label().into())),
        }
        let classes: Vec<Class> = [a, b, c, d]
            .into_iter()
            .map(|e| self.explore(e, bounds, |_| false).0)
            .collect();
        let in_d: HashMap<&Element, usize> =
            classes[3].states.iter().enumerate().map(|(i, s)| (s, i)).collect();
        let region = Region {
            depth: bounds.depth,
            cap: bounds.cap,
            explored: classes.iter().map(|c| c.region.explored).sum(),
        };
        for (ai, rep) in classes[0].states.iter().enumerate() {
            let mut parts = graded_vectors(self.rank, rep.max_entry());
            parts.reverse();
            for w in parts.iter().filter(|w| w.is_below(rep)) {
                let x = rep.checked_sub(w).expect("w ≤ rep");
                for (ci, crep) in classes[2].states.iter().enumerate() {
                    let Some(y) = crep.checked_sub(w) else { continue };
                    for (bi, brep) in classes[1].states.iter().enumerate() {
                        let Some(z) = brep.checked_sub(&y) else { continue };
                        let Some(&di) = in_d.get(&x.add(&z)) else { continue };
                        return Ok(Verdict::Yes(Refinement {
                            certificates: [
                                classes[0].derivation(ai),
                                classes[1].derivation(bi),
                                classes[2].derivation(ci),
                                classes[3].derivation(di),
                            ],
                            w: w.clone(),
                            x,
                            y,
                            z,
                        }));
                    }
                }
            }
        }
        if classes.iter().any(|c| c.depth_hit) {
            Ok(Verdict::Unknown(region))
        } else if classes.iter().all(|c| c.complete) {
            Ok(Verdict::No(region))
        } else {
            Ok(Verdict::NoWithinBounds(region))
        }
    }

    /// u ~ v in the cancellative hull: some z with entries ≤ z_cap has
    /// u + z = v + z.
    pub fn cancellative_equal(
        &self,
        u: &Element,
        v: &Element,
        bounds: &Bounds,
    ) -> Result<Verdict<CancellationCertificate>, MonoidError> {
        self.check(&[u, v])?;
        let mut undecided = false;
        let mut explored = 0;
        for z in graded_vectors(self.rank, bounds.z_cap) {
            match self.equal_unchecked(&u.add(&z), &v.add(&z), bounds) {
                Verdict::Yes(derivation) => {
                    return Ok(Verdict::Yes(CancellationCertificate { z, derivation }))
                }
                Verdict::Unknown(r) => {
                    undecided = true;
                    explored += r.explored;
                }
                Verdict::No(r) | Verdict::NoWithinBounds(r) => explored += r.explored,
            }
        }
        let region = Region {
            depth: bounds.depth,
            cap: bounds.cap,
            explored,
        };
        Ok(if undecided {
            Verdict::Unknown(region)
        } else {
            Verdict::NoWithinBounds(region)
        })
    }

    /// Distinct elements reachable from `e` within bounds (for diagnostics
    /// and oracles).
    pub fn class_of(&self, e: &Element, bounds: &Bounds) -> HashSet<Element> {
        self.explore(e, bounds, |_| false).0.states.into_iter().collect()
    }
}

impl LeqCertificate {
    pub fn replay(&self, p: &MonoidPresentation, u: &Element, v: &Element) -> Result<(), String> {
        if self.derivation.start != u.add(&self.z) {
            return Err("derivation does not start at u + z".into());
        }
        if self.derivation.replay(p)? != *v {
            return Err("derivation does not end at v".into());
        }
        Ok(())
    }
}
