//! Finite hexagonal patches with two qubits on every edge.
//!
//! Patches are drawn in brick-wall form. Vertices sit on horizontal zigzag
//! *paths* `0..=rows`, at integer columns `x`. Plaquette row `r` lies between
//! path `r` (top) and path `r + 1` (bottom) and is closed off by vertical
//! *rungs*: even rows carry rungs at even columns `0, 2, .., 2 * cols`, odd
//! rows at odd columns `1, 3, .., 2 * cols - 1`. Every vertex therefore has at
//! most one vertical edge, going down when `x + path` is even and up otherwise.
//!
//! Even plaquette rows are *wire rows*: each encodes one logical qubit in the
//! bond values of its two bounding paths. Odd rows are *coupling rows* whose
//! rungs connect the lower path of one wire to the upper path of the next.
//!
//! Qubit sites are numbered by edge (edges sorted by their endpoint ids, with
//! vertices numbered path-major) and then by position on the edge: site `2e`
//! sits next to the lower-indexed endpoint of edge `e`, site `2e + 1` next to
//! the other one.

use std::collections::HashMap;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

pub type VertexId = usize;
pub type EdgeId = usize;
pub type SiteId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Coord {
    pub x: i64,
    pub path: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Vertex {
    pub id: VertexId,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coord: Option<Coord>,
    pub degree: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "type")]
pub enum EdgeKind {
    /// Horizontal edge on path `path` joining columns `x` and `x + 1`.
    Path { path: usize, x: i64 },
    /// Vertical edge at column `x` joining paths `upper` and `upper + 1`.
    Rung { upper: usize, x: i64 },
    /// Edge of a hand-built graph without lattice coordinates.
    Free,
}

#[derive(Debug, Clone, Serialize)]
pub struct Edge {
    pub id: EdgeId,
    /// Lower-indexed endpoint first.
    pub endpoints: [VertexId; 2],
    /// `sites[k]` is the qubit next to `endpoints[k]`.
    pub sites: [SiteId; 2],
    pub kind: EdgeKind,
}

#[derive(Debug, Clone, Serialize)]
pub struct Plaquette {
    pub id: usize,
    pub row: usize,
    pub col: usize,
    pub edges: Vec<EdgeId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LegSlot {
    Left,
    Right,
    Up,
    Down,
    /// Missing slot of a vertex in a hand-built graph.
    Open,
}

/// A virtual leg that leaves the patch. Its bond value is pinned to 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BoundaryLeg {
    pub vertex: VertexId,
    pub slot: LegSlot,
}

/// Qubit-site index sets of the three Hamiltonian term families.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TermSupports {
    pub plaquettes: Vec<Vec<SiteId>>,
    pub vertices: Vec<Vec<SiteId>>,
    pub edges: Vec<Vec<SiteId>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct LatticePatch {
    rows: usize,
    cols: usize,
    vertices: Vec<Vertex>,
    edges: Vec<Edge>,
    plaquettes: Vec<Plaquette>,
    boundary_legs: Vec<BoundaryLeg>,
    qubit_count: usize,
    #[serde(skip)]
    incident: Vec<Vec<EdgeId>>,
    #[serde(skip)]
    coord_index: HashMap<Coord, VertexId>,
    #[serde(skip)]
    edge_index: HashMap<(VertexId, VertexId), EdgeId>,
}

fn row_span(row: usize, cols: usize) -> (i64, i64) {
    let c = cols as i64;
    if row % 2 == 0 {
        (0, 2 * c)
    } else {
        (1, 2 * c - 1)
    }
}

/// Builds a hexagonal patch with `rows` plaquette rows and `cols` plaquettes
/// per wire row. Coupling rows hold `cols - 1` plaquettes.
pub fn build_patch(rows: usize, cols: usize) -> Result<LatticePatch> {
    LatticePatch::hexagonal(rows, cols)
}

impl LatticePatch {
    pub fn hexagonal(rows: usize, cols: usize) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidArgument(format!(
                "patch dimensions must be positive, got {rows}x{cols}"
            )));
        }
        let path_span = |j: usize| -> (i64, i64) {
            let mut lo = i64::MAX;
            let mut hi = i64::MIN;
            for row in [j.checked_sub(1), Some(j)].into_iter().flatten() {
                if row < rows {
                    let (a, b) = row_span(row, cols);
                    lo = lo.min(a);
                    hi = hi.max(b);
                }
            }
            (lo, hi)
        };

        let mut coords = Vec::new();
        for path in 0..=rows {
            let (lo, hi) = path_span(path);
            for x in lo..=hi {
                coords.push(Coord { x, path });
            }
        }
        let coord_index: HashMap<Coord, VertexId> =
            coords.iter().enumerate().map(|(i, c)| (*c, i)).collect();

        let mut raw: Vec<(VertexId, VertexId, EdgeKind)> = Vec::new();
        for path in 0..=rows {
            let (lo, hi) = path_span(path);
            for x in lo..hi {
                let a = coord_index[&Coord { x, path }];
                let b = coord_index[&Coord { x: x + 1, path }];
                raw.push((a, b, EdgeKind::Path { path, x }));
            }
        }
        for row in 0..rows {
            let (lo, hi) = row_span(row, cols);
            let mut x = lo;
            while x <= hi {
                let a = coord_index[&Coord { x, path: row }];
                let b = coord_index[&Coord { x, path: row + 1 }];
                raw.push((a, b, EdgeKind::Rung { upper: row, x }));
                x += 2;
            }
        }

        let mut patch = Self::assemble(
            coords.into_iter().map(Some).collect(),
            raw,
            rows,
            cols,
        )?;
        patch.coord_index = coord_index;

        let mut plaquettes = Vec::new();
        for row in 0..rows {
            let (lo, hi) = row_span(row, cols);
            let mut x0 = lo;
            let mut col = 0;
            while x0 + 2 <= hi {
                let mut edges = Vec::with_capacity(6);
                for path in [row, row + 1] {
                    for x in [x0, x0 + 1] {
                        edges.push(patch.path_edge(path, x).expect("plaquette path edge"));
                    }
                }
                for x in [x0, x0 + 2] {
                    edges.push(patch.rung(row, x).expect("plaquette rung"));
                }
                edges.sort_unstable();
                plaquettes.push(Plaquette {
                    id: plaquettes.len(),
                    row,
                    col,
                    edges,
                });
                col += 1;
                x0 += 2;
            }
        }
        patch.plaquettes = plaquettes;
        Ok(patch)
    }

    /// Builds a patch from an arbitrary graph with maximum degree 3. Missing
    /// slots become pinned boundary legs; the graph has no plaquettes.
    pub fn from_edges(vertex_count: usize, edges: &[(VertexId, VertexId)]) -> Result<Self> {
        if vertex_count == 0 {
            return Err(Error::InvalidArgument("graph has no vertices".into()));
        }
        let mut raw = Vec::with_capacity(edges.len());
        for &(a, b) in edges {
            if a == b || a >= vertex_count || b >= vertex_count {
                return Err(Error::InvalidArgument(format!("bad edge ({a}, {b})")));
            }
            raw.push((a, b, EdgeKind::Free));
        }
        Self::assemble(vec![None; vertex_count], raw, 0, 0)
    }

    fn assemble(
        coords: Vec<Option<Coord>>,
        mut raw: Vec<(VertexId, VertexId, EdgeKind)>,
        rows: usize,
        cols: usize,
    ) -> Result<Self> {
        for e in raw.iter_mut() {
            if e.0 > e.1 {
                std::mem::swap(&mut e.0, &mut e.1);
            }
        }
        raw.sort_by_key(|e| (e.0, e.1));
        let mut edge_index = HashMap::new();
        let mut incident = vec![Vec::new(); coords.len()];
        let mut edges = Vec::with_capacity(raw.len());
        for (id, (a, b, kind)) in raw.into_iter().enumerate() {
            if edge_index.insert((a, b), id).is_some() {
                return Err(Error::InvalidArgument(format!("duplicate edge ({a}, {b})")));
            }
            incident[a].push(id);
            incident[b].push(id);
            edges.push(Edge {
                id,
                endpoints: [a, b],
                sites: [2 * id, 2 * id + 1],
                kind,
            });
        }
        if let Some(v) = incident.iter().position(|i| i.len() > 3) {
            return Err(Error::InvalidArgument(format!("vertex {v} has degree above 3")));
        }

        let vertices: Vec<Vertex> = coords
            .iter()
            .enumerate()
            .map(|(id, coord)| Vertex {
                id,
                coord: *coord,
                degree: incident[id].len(),
            })
            .collect();

        let mut boundary_legs = Vec::new();
        for v in &vertices {
            match v.coord {
                Some(c) => {
                    let has = |kind: &dyn Fn(&EdgeKind) -> bool| {
                        incident[v.id].iter().any(|&e| kind(&edges[e].kind))
                    };
                    if !has(&|k| matches!(k, EdgeKind::Path { x, .. } if *x == c.x - 1)) {
                        boundary_legs.push(BoundaryLeg { vertex: v.id, slot: LegSlot::Left });
                    }
                    if !has(&|k| matches!(k, EdgeKind::Path { x, .. } if *x == c.x)) {
                        boundary_legs.push(BoundaryLeg { vertex: v.id, slot: LegSlot::Right });
                    }
                    if !has(&|k| matches!(k, EdgeKind::Rung { .. })) {
                        let slot = if (c.x + c.path as i64) % 2 == 0 {
                            LegSlot::Down
                        } else {
                            LegSlot::Up
                        };
                        boundary_legs.push(BoundaryLeg { vertex: v.id, slot });
                    }
                }
                None => {
                    for _ in v.degree..3 {
                        boundary_legs.push(BoundaryLeg { vertex: v.id, slot: LegSlot::Open });
                    }
                }
            }
        }

        let qubit_count = 2 * edges.len();
        Ok(Self {
            rows,
            cols,
            vertices,
            edges,
            plaquettes: Vec::new(),
            boundary_legs,
            qubit_count,
            incident,
            coord_index: HashMap::new(),
            edge_index,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_hexagonal(&self) -> bool {
        !self.coord_index.is_empty()
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn plaquettes(&self) -> &[Plaquette] {
        &self.plaquettes
    }

    pub fn boundary_legs(&self) -> &[BoundaryLeg] {
        &self.boundary_legs
    }

    pub fn qubit_count(&self) -> usize {
        self.qubit_count
    }

    pub fn incident(&self, v: VertexId) -> &[EdgeId] {
        &self.incident[v]
    }

    pub fn edge_between(&self, a: VertexId, b: VertexId) -> Option<EdgeId> {
        self.edge_index.get(&(a.min(b), a.max(b))).copied()
    }

    pub fn site_edge(&self, site: SiteId) -> EdgeId {
        site / 2
    }

    /// The vertex whose tensor owns `site` as a physical leg.
    pub fn site_vertex(&self, site: SiteId) -> VertexId {
        self.edges[site / 2].endpoints[site % 2]
    }

    /// The other qubit on the same edge.
    pub fn partner(&self, site: SiteId) -> SiteId {
        site ^ 1
    }

    pub fn site_near(&self, edge: EdgeId, vertex: VertexId) -> Option<SiteId> {
        let e = &self.edges[edge];
        e.endpoints.iter().position(|&v| v == vertex).map(|k| e.sites[k])
    }

    pub fn vertex_at(&self, x: i64, path: usize) -> Option<VertexId> {
        self.coord_index.get(&Coord { x, path }).copied()
    }

    /// Horizontal edge on `path` between columns `x` and `x + 1`.
    pub fn path_edge(&self, path: usize, x: i64) -> Option<EdgeId> {
        let a = self.vertex_at(x, path)?;
        let b = self.vertex_at(x + 1, path)?;
        self.edge_between(a, b)
    }

    /// Vertical edge at column `x` between `upper` and `upper + 1`.
    pub fn rung(&self, upper: usize, x: i64) -> Option<EdgeId> {
        let a = self.vertex_at(x, upper)?;
        let b = self.vertex_at(x, upper + 1)?;
        self.edge_between(a, b)
    }

    pub fn column(&self, v: VertexId) -> Option<i64> {
        self.vertices[v].coord.map(|c| c.x)
    }

    pub fn site_column(&self, site: SiteId) -> Option<i64> {
        self.column(self.site_vertex(site))
    }

    /// Largest column index, `2 * cols`.
    pub fn last_column(&self) -> i64 {
        2 * self.cols as i64
    }

    /// Number of logical wires: one per even plaquette row.
    pub fn wire_count(&self) -> usize {
        if self.is_hexagonal() {
            self.rows.div_ceil(2)
        } else {
            0
        }
    }

    /// Number of paths (rows + 1) in a hexagonal patch.
    pub fn path_count(&self) -> usize {
        if self.is_hexagonal() {
            self.rows + 1
        } else {
            0
        }
    }

    pub fn connected_components(&self) -> usize {
        let mut parent: Vec<usize> = (0..self.vertices.len()).collect();
        fn find(p: &mut [usize], mut i: usize) -> usize {
            while p[i] != i {
                p[i] = p[p[i]];
                i = p[i];
            }
            i
        }
        let mut components = self.vertices.len();
        for e in &self.edges {
            let a = find(&mut parent, e.endpoints[0]);
            let b = find(&mut parent, e.endpoints[1]);
            if a != b {
                parent[a] = b;
                components -= 1;
            }
        }
        components
    }

    /// Dimension of the cycle space: |E| - |V| + components.
    pub fn cycle_rank(&self) -> usize {
        self.edges.len() + self.connected_components() - self.vertices.len()
    }

    pub fn term_supports(&self) -> TermSupports {
        let sites_of = |edges: &mut dyn Iterator<Item = &EdgeId>| {
            let mut s: Vec<SiteId> = edges.flat_map(|&e| self.edges[e].sites).collect();
            s.sort_unstable();
            s.dedup();
            s
        };
        TermSupports {
            plaquettes: self
                .plaquettes
                .iter()
                .map(|p| sites_of(&mut p.edges.iter()))
                .collect(),
            vertices: self
                .incident
                .iter()
                .filter(|inc| !inc.is_empty())
                .map(|inc| sites_of(&mut inc.iter()))
                .collect(),
            edges: self.edges.iter().map(|e| e.sites.to_vec()).collect(),
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("patch serializes")
    }

    /// Role assignment of gate cell `step` on `wire`.
    ///
    /// Cell `t` spans columns `2t + 1` and `2t + 2`. Roles `a, b, c` are the
    /// legs of the upper-path vertex at `2t + 1` (up-rung, incoming, outgoing),
    /// `d, e, f` those of the lower-path vertex (down-rung, incoming,
    /// outgoing); `h, g, i` are the legs of the upper-path vertex at `2t + 2`
    /// (incoming, wire rung, outgoing) and `k, g', l` those of the lower one.
    /// `a` is absent on the top wire, `d` on the bottom wire, and `i, l` in
    /// the last cell, whose outgoing legs are pinned.
    pub fn wire_cell(&self, wire: usize, step: usize) -> Result<Vec<SiteRole>> {
        self.check_wire(wire)?;
        if step >= self.cols {
            return Err(Error::Range(format!(
                "step {step} outside 0..{} on a {}x{} patch",
                self.cols, self.rows, self.cols
            )));
        }
        let up = 2 * wire;
        let lo = up + 1;
        let x1 = 2 * step as i64 + 1;
        let x2 = x1 + 1;
        let mut roles = Vec::with_capacity(12);
        let mut push = |role: Role, edge: Option<EdgeId>, x: i64, path: usize| {
            if let Some(edge) = edge {
                let v = self.vertex_at(x, path).expect("cell vertex");
                let site = self.site_near(edge, v).expect("leg of cell vertex");
                roles.push(SiteRole {
                    role,
                    site,
                    wire,
                    step: Step::Gate(step),
                });
            }
        };
        let above = up.checked_sub(1).and_then(|r| self.rung(r, x1));
        push(Role::A, above, x1, up);
        push(Role::B, self.path_edge(up, x1 - 1), x1, up);
        push(Role::C, self.path_edge(up, x1), x1, up);
        push(Role::D, self.rung(lo, x1), x1, lo);
        push(Role::E, self.path_edge(lo, x1 - 1), x1, lo);
        push(Role::F, self.path_edge(lo, x1), x1, lo);
        push(Role::G, self.rung(up, x2), x2, up);
        push(Role::GPrime, self.rung(up, x2), x2, lo);
        push(Role::H, self.path_edge(up, x1), x2, up);
        push(Role::I, self.path_edge(up, x2), x2, up);
        push(Role::K, self.path_edge(lo, x1), x2, lo);
        push(Role::L, self.path_edge(lo, x2), x2, lo);
        Ok(roles)
    }

    /// Roles of the initialization column `x = 0` of `wire`: the wire rung
    /// (`g`, `g'`) and the outgoing path legs (`i`, `l`).
    pub fn init_cell(&self, wire: usize) -> Result<Vec<SiteRole>> {
        self.check_wire(wire)?;
        let up = 2 * wire;
        let lo = up + 1;
        let mut roles = Vec::with_capacity(4);
        let rung = self.rung(up, 0).expect("init rung");
        for (role, edge, path) in [
            (Role::G, rung, up),
            (Role::GPrime, rung, lo),
            (Role::I, self.path_edge(up, 0).expect("init path"), up),
            (Role::L, self.path_edge(lo, 0).expect("init path"), lo),
        ] {
            let v = self.vertex_at(0, path).expect("init vertex");
            roles.push(SiteRole {
                role,
                site: self.site_near(edge, v).expect("init leg"),
                wire,
                step: Step::Init,
            });
        }
        Ok(roles)
    }

    fn check_wire(&self, wire: usize) -> Result<()> {
        if !self.is_hexagonal() {
            return Err(Error::InvalidArgument(
                "wire cells need a hexagonal patch".into(),
            ));
        }
        if wire >= self.wire_count() {
            return Err(Error::Range(format!(
                "wire {wire} outside 0..{} on a {}x{} patch",
                self.wire_count(),
                self.rows,
                self.cols
            )));
        }
        Ok(())
    }
}

/// Labels of the qubit sites inside one gate cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Role {
    #[serde(rename = "a")]
    A,
    #[serde(rename = "b")]
    B,
    #[serde(rename = "c")]
    C,
    #[serde(rename = "d")]
    D,
    #[serde(rename = "e")]
    E,
    #[serde(rename = "f")]
    F,
    #[serde(rename = "g")]
    G,
    /// Lower qubit of the wire rung carrying `g`.
    #[serde(rename = "g'")]
    GPrime,
    #[serde(rename = "h")]
    H,
    #[serde(rename = "i")]
    I,
    #[serde(rename = "k")]
    K,
    #[serde(rename = "l")]
    L,
}

impl Role {
    pub const ALL: [Role; 12] = [
        Role::A,
        Role::B,
        Role::C,
        Role::D,
        Role::E,
        Role::F,
        Role::G,
        Role::GPrime,
        Role::H,
        Role::I,
        Role::K,
        Role::L,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Role::A => "a",
            Role::B => "b",
            Role::C => "c",
            Role::D => "d",
            Role::E => "e",
            Role::F => "f",
            Role::G => "g",
            Role::GPrime => "g'",
            Role::H => "h",
            Role::I => "i",
            Role::K => "k",
            Role::L => "l",
        }
    }

    /// Whether the role sits on the upper path of its wire.
    pub fn on_upper_path(self) -> bool {
        matches!(self, Role::B | Role::C | Role::H | Role::I)
    }

    pub fn on_lower_path(self) -> bool {
        matches!(self, Role::E | Role::F | Role::K | Role::L)
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Step {
    Init,
    Gate(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SiteRole {
    pub role: Role,
    pub site: SiteId,
    pub wire: usize,
    pub step: Step,
}

/// Looks up the site carrying `role` in a cell listing.
pub fn role_site(cell: &[SiteRole], role: Role) -> Option<SiteId> {
    cell.iter().find(|r| r.role == role).map(|r| r.site)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn single_plaquette_counts() {
        let p = build_patch(1, 1).unwrap();
        assert_eq!(p.vertices().len(), 6);
        assert_eq!(p.edges().len(), 6);
        assert_eq!(p.plaquettes().len(), 1);
        assert_eq!(p.qubit_count(), 12);
        assert_eq!(p.cycle_rank(), 1);
    }

    #[test]
    fn two_plaquettes_share_an_edge() {
        let p = build_patch(1, 2).unwrap();
        assert_eq!(p.plaquettes().len(), 2);
        assert_eq!(p.edges().len(), 11);
        assert_eq!(p.qubit_count(), 22);
        assert_eq!(p.cycle_rank(), 2);
        let a: HashSet<_> = p.plaquettes()[0].edges.iter().collect();
        let shared = p.plaquettes()[1].edges.iter().filter(|e| a.contains(e)).count();
        assert_eq!(shared, 1);
    }

    #[test]
    fn zero_size_rejected() {
        assert!(matches!(build_patch(0, 1), Err(Error::InvalidArgument(_))));
        assert!(matches!(build_patch(1, 0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn supports_of_single_plaquette() {
        let p = build_patch(1, 1).unwrap();
        let s = p.term_supports();
        assert_eq!(s.plaquettes.len(), 1);
        assert_eq!(s.plaquettes[0].len(), 12);
        assert!(s.edges.iter().all(|e| e.len() == 2));
        // Every vertex of a lone hexagon is a degree-2 corner.
        assert!(s.vertices.iter().all(|v| v.len() == 4));
    }

    #[test]
    fn interior_vertices_have_degree_three() {
        let p = build_patch(3, 3).unwrap();
        let interior = p
            .vertices()
            .iter()
            .filter(|v| {
                let c = v.coord.unwrap();
                c.x > 0 && c.x < p.last_column() && c.path > 0 && c.path < p.rows()
            })
            .count();
        assert!(interior > 0);
        for v in p.vertices() {
            let missing = p.boundary_legs().iter().filter(|b| b.vertex == v.id).count();
            assert_eq!(v.degree + missing, 3, "vertex {:?}", v.coord);
        }
        for s in p.term_supports().plaquettes {
            assert_eq!(s.len(), 12);
        }
    }

    #[test]
    fn handshake_and_rank() {
        for (r, c) in [(1, 1), (1, 4), (2, 3), (3, 2), (5, 3)] {
            let p = build_patch(r, c).unwrap();
            let degree_sum: usize = p.vertices().iter().map(|v| v.degree).sum();
            assert_eq!(degree_sum, 2 * p.edges().len());
            assert_eq!(p.qubit_count(), 2 * p.edges().len());
            assert_eq!(p.cycle_rank(), p.plaquettes().len(), "{r}x{c}");
        }
    }

    #[test]
    fn cells_are_disjoint_and_cover_the_patch() {
        let p = build_patch(3, 3).unwrap();
        let mut seen = HashSet::new();
        for w in 0..p.wire_count() {
            for r in p.init_cell(w).unwrap() {
                assert!(seen.insert(r.site));
            }
            for t in 0..p.cols() {
                for r in p.wire_cell(w, t).unwrap() {
                    assert!(seen.insert(r.site), "site {} reused", r.site);
                }
            }
        }
        assert_eq!(seen.len(), p.qubit_count());
    }

    #[test]
    fn interior_cell_has_every_role() {
        let p = build_patch(5, 2).unwrap();
        let cell = p.wire_cell(1, 0).unwrap();
        let roles: Vec<Role> = cell.iter().map(|r| r.role).collect();
        assert_eq!(roles.len(), 12);
        assert!(Role::ALL.iter().all(|r| roles.contains(r)));
    }

    #[test]
    fn boundary_cells_drop_external_legs() {
        let p = build_patch(1, 2).unwrap();
        let first = p.wire_cell(0, 0).unwrap();
        assert!(role_site(&first, Role::A).is_none());
        assert!(role_site(&first, Role::D).is_none());
        assert_eq!(first.len(), 10);
        let last = p.wire_cell(0, 1).unwrap();
        assert!(role_site(&last, Role::I).is_none());
        assert_eq!(last.len(), 8);
    }

    #[test]
    fn consecutive_cells_share_path_edges() {
        let p = build_patch(1, 3).unwrap();
        let c0 = p.wire_cell(0, 0).unwrap();
        let c1 = p.wire_cell(0, 1).unwrap();
        let i0 = role_site(&c0, Role::I).unwrap();
        let b1 = role_site(&c1, Role::B).unwrap();
        assert_eq!(p.partner(i0), b1);
        let c = role_site(&c0, Role::C).unwrap();
        let h = role_site(&c0, Role::H).unwrap();
        assert_eq!(p.partner(c), h);
    }

    #[test]
    fn out_of_range_cell() {
        let p = build_patch(3, 2).unwrap();
        assert!(matches!(p.wire_cell(5, 0), Err(Error::Range(_))));
        assert!(matches!(p.wire_cell(0, 2), Err(Error::Range(_))));
    }

    #[test]
    fn coupling_rung_joins_neighbouring_wires() {
        let p = build_patch(3, 2).unwrap();
        let upper = p.wire_cell(0, 1).unwrap();
        let lower = p.wire_cell(1, 1).unwrap();
        let d = role_site(&upper, Role::D).unwrap();
        let a = role_site(&lower, Role::A).unwrap();
        assert_eq!(p.partner(d), a);
    }

    #[test]
    fn custom_graph_boundary() {
        let p = LatticePatch::from_edges(2, &[(0, 1)]).unwrap();
        assert_eq!(p.qubit_count(), 2);
        assert_eq!(p.boundary_legs().len(), 4);
        assert_eq!(p.cycle_rank(), 0);
        assert!(LatticePatch::from_edges(2, &[(0, 0)]).is_err());
    }

    #[test]
    fn json_has_the_documented_keys() {
        let v = build_patch(1, 1).unwrap().to_json();
        for key in ["vertices", "edges", "plaquettes", "boundary_legs", "qubit_count"] {
            assert!(v.get(key).is_some(), "{key}");
        }
        assert_eq!(v["qubit_count"], 12);
    }
}
