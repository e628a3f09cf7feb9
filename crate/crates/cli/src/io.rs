//! JSON file formats for spaces, windows, point sets, tilings, castles,
//! chains and presentations.

use std::collections::BTreeSet;
use std::path::Path;
use std::sync::Arc;

use coarse_lab::castle::{Castle, Tower};
use coarse_lab::homology::{OneChain, ZeroChain};
use coarse_lab::monoid::{Element, MonoidPresentation};
use coarse_lab::space::{
    interval_window, regular_tree_window, stacked_product_window_with_halo,
};
use coarse_lab::tiling::{Construction, Tiling};
use coarse_lab::{FiniteMetricSpace, Point, Rational, WindowedSpace};
use serde_json::{json, Map, Value};

/// A malformed input: the file, the first offending key and what is wrong.
#[derive(Debug)]
pub struct SchemaError {
    pub path: String,
    pub key: String,
    pub message: String,
}

impl std::fmt::Display for SchemaError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.key.is_empty() {
            write!(f, "{}: {}", self.path, self.message)
        } else {
            write!(f, "{}: at `{}`: {}", self.path, self.key, self.message)
        }
    }
}

impl std::error::Error for SchemaError {}

type Result<T> = std::result::Result<T, SchemaError>;

/// Cursor into a parsed document that remembers where it is.
#[derive(Clone)]
pub struct Node<'a> {
    file: &'a str,
    key: String,
    value: &'a Value,
}

pub struct Document {
    file: String,
    value: Value,
}

impl Document {
    pub fn read(path: &Path) -> Result<Self> {
        let file = path.display().to_string();
        let text = std::fs::read_to_string(path).map_err(|e| SchemaError {
            path: file.clone(),
            key: String::new(),
            message: e.to_string(),
        })?;
        Self::parse(file, &text)
    }

    pub fn parse(file: String, text: &str) -> Result<Self> {
        let value = serde_json::from_str(text).map_err(|e| SchemaError {
            path: file.clone(),
            key: String::new(),
            message: format!("invalid JSON: {e}"),
        })?;
        Ok(Document { file, value })
    }

    pub fn root(&self) -> Node<'_> {
        Node {
            file: &self.file,
            key: String::new(),
            value: &self.value,
        }
    }
}

impl<'a> Node<'a> {
    pub fn value(&self) -> &'a Value {
        self.value
    }

    pub fn fail<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(SchemaError {
            path: self.file.to_string(),
            key: self.key.clone(),
            message: message.into(),
        })
    }

    fn child(&self, key: String, value: &'a Value) -> Node<'a> {
        let key = if self.key.is_empty() {
            key
        } else if key.starts_with('[') {
            format!("{}{key}", self.key)
        } else {
            format!("{}.{key}", self.key)
        };
        Node {
            file: self.file,
            key,
            value,
        }
    }

    fn object(&self) -> Result<&'a Map<String, Value>> {
        match self.value {
            Value::Object(m) => Ok(m),
            _ => self.fail("expected an object"),
        }
    }

    pub fn has(&self, key: &str) -> bool {
        matches!(self.value, Value::Object(m) if m.contains_key(key))
    }

    pub fn get(&self, key: &str) -> Result<Node<'a>> {
        match self.object()?.get(key) {
            Some(v) => Ok(self.child(key.to_string(), v)),
            None => self.child(key.to_string(), &Value::Null).fail("missing key"),
        }
    }

    pub fn opt(&self, key: &str) -> Result<Option<Node<'a>>> {
        Ok(self.object()?.get(key).map(|v| self.child(key.to_string(), v)))
    }

    pub fn items(&self) -> Result<Vec<Node<'a>>> {
        match self.value {
            Value::Array(a) => Ok(a
                .iter()
                .enumerate()
                .map(|(i, v)| self.child(format!("[{i}]"), v))
                .collect()),
            _ => self.fail("expected an array"),
        }
    }

    pub fn entries(&self) -> Result<Vec<(String, Node<'a>)>> {
        Ok(self
            .object()?
            .iter()
            .map(|(k, v)| (k.clone(), self.child(k.clone(), v)))
            .collect())
    }

    pub fn int(&self) -> Result<i64> {
        self.value.as_i64().map_or_else(|| self.fail("expected an integer"), Ok)
    }

    pub fn uint(&self) -> Result<u64> {
        self.value
            .as_u64()
            .map_or_else(|| self.fail("expected a nonnegative integer"), Ok)
    }

    pub fn usize(&self) -> Result<usize> {
        self.uint().map(|v| v as usize)
    }

    /// A point identifier: a string, or an integer taken as its decimal text.
    pub fn ident(&self) -> Result<String> {
        match self.value {
            Value::String(s) => Ok(s.clone()),
            Value::Number(n) if n.is_i64() => Ok(n.to_string()),
            _ => self.fail("expected a point identifier (string or integer)"),
        }
    }

    pub fn rational(&self) -> Result<Rational> {
        match self.value {
            Value::String(s) => s.parse().or_else(|e| self.fail(format!("{e}"))),
            Value::Number(n) if n.is_i64() => Ok(Rational::from_integer(n.as_i64().unwrap_or(0))),
            _ => self.fail("expected a rational \"p/q\""),
        }
    }

    pub fn boolean(&self) -> Result<bool> {
        self.value.as_bool().map_or_else(|| self.fail("expected true or false"), Ok)
    }
}

fn space_error<T>(node: &Node<'_>, e: impl std::fmt::Display) -> Result<T> {
    node.fail(e.to_string())
}

/// Reads a metric space from one of the accepted shapes.
pub fn parse_space(node: &Node<'_>) -> Result<FiniteMetricSpace> {
    if node.has("vertices") {
        let vertices = node
            .get("vertices")?
            .items()?
            .iter()
            .map(Node::ident)
            .collect::<Result<Vec<_>>>()?;
        let edges_node = node.get("edges")?;
        let mut edges = Vec::new();
        for e in edges_node.items()? {
            let pair = e.items()?;
            if pair.len() != 2 {
                return e.fail("an edge has exactly two endpoints");
            }
            edges.push((pair[0].ident()?, pair[1].ident()?));
        }
        return FiniteMetricSpace::from_graph(&vertices, &edges).or_else(|err| space_error(&edges_node, err));
    }
    if node.has("points") {
        let points = node
            .get("points")?
            .items()?
            .iter()
            .map(Node::ident)
            .collect::<Result<Vec<_>>>()?;
        let matrix_node = node.get("matrix")?;
        let matrix = matrix_node
            .items()?
            .iter()
            .map(|row| row.items()?.iter().map(Node::uint).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        return FiniteMetricSpace::from_matrix(&points, matrix).or_else(|err| space_error(&matrix_node, err));
    }
    if node.has("integers") {
        let n = node.get("integers")?;
        let values = n.items()?.iter().map(Node::int).collect::<Result<Vec<_>>>()?;
        return FiniteMetricSpace::integers(values).or_else(|err| space_error(&n, err));
    }
    if node.has("interval") {
        let (lo, hi) = interval_bounds(&node.get("interval")?)?;
        return Ok(FiniteMetricSpace::integer_interval(lo, hi));
    }
    if node.has("cycle") {
        let n = node.get("cycle")?;
        return FiniteMetricSpace::cycle(n.usize()?).or_else(|err| space_error(&n, err));
    }
    if node.has("moduli") {
        let moduli = moduli(&node.get("moduli")?)?;
        let blocks = moduli
            .iter()
            .map(|&m| FiniteMetricSpace::cycle(m))
            .collect::<std::result::Result<Vec<_>, _>>()
            .or_else(|err| space_error(&node.get("moduli")?, err))?;
        return Ok(FiniteMetricSpace::coarse_disjoint_union(blocks));
    }
    if node.has("stack") {
        let base = parse_space(&node.get("stack")?)?;
        let layers = node.get("layers")?;
        return FiniteMetricSpace::stacked(base, layers.usize()?).or_else(|err| space_error(&layers, err));
    }
    if node.has("tree") {
        let (degree, radius) = tree_shape(&node.get("tree")?)?;
        return Ok(regular_tree_window(degree, radius, 0).space().clone());
    }
    node.fail("expected one of: vertices/edges, points/matrix, integers, interval, cycle, moduli, stack, tree")
}

fn interval_bounds(n: &Node<'_>) -> Result<(i64, i64)> {
    let items = n.items()?;
    if items.len() != 2 {
        return n.fail("expected [lo, hi]");
    }
    let (lo, hi) = (items[0].int()?, items[1].int()?);
    if lo > hi {
        return n.fail("lo exceeds hi");
    }
    Ok((lo, hi))
}

pub fn moduli(n: &Node<'_>) -> Result<Vec<usize>> {
    n.items()?.iter().map(Node::usize).collect()
}

fn tree_shape(n: &Node<'_>) -> Result<(usize, u64)> {
    let degree = n.get("degree")?;
    let d = degree.usize()?;
    if d < 3 {
        return degree.fail("degree must be at least 3");
    }
    Ok((d, n.get("radius")?.uint()?))
}

/// Reads a window: a space plus an optional core and halo depth.
///
/// `interval`, `tree` and `stack` shapes with a `halo_depth` build their
/// standard windows (core in the middle, at the root, at the bottom).
/// Otherwise `core` lists the core points; without it the whole space is
/// the core.
pub fn parse_window(node: &Node<'_>) -> Result<WindowedSpace> {
    let halo = node.opt("halo_depth")?.map(|n| n.uint()).transpose()?;
    if node.has("core") {
        let space = parse_space(node)?;
        let core_node = node.get("core")?;
        let core = points(&space, &core_node)?;
        return WindowedSpace::new(space, &core, halo.unwrap_or(0)).or_else(|e| space_error(&core_node, e));
    }
    match halo {
        Some(h) if node.has("interval") => {
            let (lo, hi) = interval_bounds(&node.get("interval")?)?;
            Ok(interval_window(lo, hi, h))
        }
        Some(h) if node.has("tree") => {
            let (degree, radius) = tree_shape(&node.get("tree")?)?;
            Ok(regular_tree_window(degree, radius, h))
        }
        halo if node.has("stack") => {
            let base = parse_space(&node.get("stack")?)?;
            let layers = node.get("layers")?;
            let k = layers.usize()?;
            let h = halo.map_or(k / 4, |h| h as usize);
            stacked_product_window_with_halo(base, k, h).or_else(|e| space_error(&layers, e))
        }
        Some(_) => node.fail("halo_depth needs a core, or an interval, tree or stack space"),
        None => Ok(WindowedSpace::whole(parse_space(node)?)),
    }
}

/// Point identifiers resolved against a space.
pub fn points(space: &FiniteMetricSpace, node: &Node<'_>) -> Result<Vec<Point>> {
    node.items()?
        .iter()
        .map(|item| {
            let id = item.ident()?;
            space.index_of(&id).map_or_else(|| item.fail(format!("unknown point {id:?}")), Ok)
        })
        .collect()
}

/// A point set file: a bare array of identifiers, or {"set": [...]}.
pub fn point_set(space: &FiniteMetricSpace, node: &Node<'_>) -> Result<Vec<Point>> {
    if node.has("set") {
        points(space, &node.get("set")?)
    } else {
        points(space, node)
    }
}

pub fn labels(space: &FiniteMetricSpace, pts: &[Point]) -> Vec<String> {
    pts.iter().map(|&p| space.label(p)).collect()
}

pub fn tiling_to_json(t: &Tiling, window_def: &Value) -> Value {
    let space = t.space();
    json!({
        "R": t.radius,
        "epsilon": t.epsilon,
        "diameter_bound": t.diameter_bound,
        "construction": t.construction,
        "tiles": t.tiles.iter().map(|tile| labels(space, tile)).collect::<Vec<_>>(),
        "meta": t.meta,
        "window": window_def,
    })
}

/// Reads a tiling file; tiles flagged contaminated in `meta` stay flagged.
pub fn parse_tiling(node: &Node<'_>) -> Result<(Tiling, Value)> {
    let window_node = node.get("window")?;
    let window = Arc::new(parse_window(&window_node)?);
    let radius = node.get("R")?.uint()?;
    let eps_node = node.get("epsilon")?;
    let epsilon = eps_node.rational()?;
    if !epsilon.is_positive() {
        return eps_node.fail("epsilon must be positive");
    }
    let space = window.space();
    let tiles = node
        .get("tiles")?
        .items()?
        .iter()
        .map(|t| points(space, t))
        .collect::<Result<Vec<_>>>()?;
    let mut declared = Vec::new();
    if let Some(meta) = node.opt("meta")? {
        for (i, m) in meta.items()?.iter().enumerate() {
            if let Some(flag) = m.opt("contaminated")? {
                if flag.boolean()? {
                    declared.push(i);
                }
            }
        }
    }
    let diameter_bound = match node.opt("diameter_bound")? {
        Some(n) => n.uint()?,
        None => u64::MAX,
    };
    let construction: Construction = match node.opt("construction")? {
        Some(n) => serde_json::from_value(n.value.clone()).or_else(|e| n.fail(e.to_string()))?,
        None => Construction::Manual,
    };
    let tiling = Tiling::from_parts(
        window.clone(),
        radius,
        epsilon,
        tiles,
        diameter_bound,
        &declared,
        construction,
    )
    .or_else(|e| node.fail(e.to_string()))?;
    Ok((tiling, window_node.value.clone()))
}

/// Reads and validates a castle; violations are reported at load time.
pub fn parse_castle(node: &Node<'_>) -> Result<Castle> {
    let castle = parse_castle_unchecked(node)?;
    let violations = castle.validate();
    if let Some(v) = violations.first() {
        return node.fail(format!("invalid castle: {v}"));
    }
    Ok(castle)
}

/// Reads the tower structure without checking it.
pub fn parse_castle_unchecked(node: &Node<'_>) -> Result<Castle> {
    let mut towers = Vec::new();
    for t in node.get("towers")?.items()? {
        let height = t.get("height")?.usize()?;
        let columns = t
            .get("columns")?
            .items()?
            .iter()
            .map(|c| c.items()?.iter().map(Node::ident).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        towers.push(Tower { height, columns });
    }
    Ok(Castle { towers })
}

pub fn castle_to_json(c: &Castle) -> Value {
    serde_json::to_value(c).unwrap_or(Value::Null)
}

pub fn atom_set(node: &Node<'_>) -> Result<BTreeSet<String>> {
    let items = if node.has("set") { node.get("set")?.items()? } else { node.items()? };
    items.iter().map(Node::ident).collect()
}

pub fn parse_zero_chain(space: &FiniteMetricSpace, node: &Node<'_>) -> Result<ZeroChain> {
    let mut chain = ZeroChain::default();
    for (id, v) in node.get("coeffs")?.entries()? {
        let Some(p) = space.index_of(&id) else {
            return v.fail(format!("unknown point {id:?}"));
        };
        chain.coeffs.insert(p, v.int()?);
    }
    Ok(chain)
}

pub fn one_chain_to_json(space: &FiniteMetricSpace, h: &OneChain) -> Value {
    let coeffs: Map<String, Value> = h
        .coeffs
        .iter()
        .map(|(&(x, y), &v)| (format!("{}|{}", space.label(x), space.label(y)), json!(v)))
        .collect();
    json!({ "coeffs": coeffs, "P": h.propagation })
}

pub fn parse_presentation(node: &Node<'_>) -> Result<MonoidPresentation> {
    let rank = node.get("rank")?.usize()?;
    let mut relations = Vec::new();
    for rel in node.get("relations")?.items()? {
        let sides = rel.items()?;
        if sides.len() != 2 {
            return rel.fail("a relation is a pair [left, right]");
        }
        let side = |n: &Node<'_>| -> Result<Element> {
            let v = n
                .items()?
                .iter()
                .map(|x| x.uint().map(|v| v as u32))
                .collect::<Result<Vec<_>>>()?;
            if v.len() != rank {
                return n.fail(format!("expected {rank} entries"));
            }
            Ok(Element(v))
        };
        relations.push((side(&sides[0])?, side(&sides[1])?));
    }
    Ok(MonoidPresentation { rank, relations })
}
