//! The string-net ground state |G> and its CZ-modified variant |G'>.
//!
//! A closed-loop configuration is a set of occupied edges with even degree at
//! every vertex. |G> is the equal-weight superposition of all of them, with
//! both qubits of an occupied edge in |1>.

use std::collections::VecDeque;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{LatticePatch, SiteId};
use crate::oracle::{PauliTerm, StateVector, C64, DEFAULT_QUBIT_CAP};

/// Largest cycle rank `enumerate_loops` accepts.
pub const MAX_CYCLE_RANK: usize = 20;

/// Fixed-size bit set over edge ids.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct EdgeSet {
    words: Vec<u64>,
}

impl EdgeSet {
    pub fn empty(len: usize) -> Self {
        Self {
            words: vec![0; len.div_ceil(64)],
        }
    }

    pub fn contains(&self, e: usize) -> bool {
        self.words[e / 64] >> (e % 64) & 1 == 1
    }

    pub fn toggle(&mut self, e: usize) {
        self.words[e / 64] ^= 1 << (e % 64);
    }

    pub fn xor_with(&mut self, other: &EdgeSet) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(k, &w)| {
            (0..64).filter(move |b| w >> b & 1 == 1).map(move |b| 64 * k + b)
        })
    }
}

impl Serialize for EdgeSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.iter())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct LoopConfiguration {
    pub occupied_edges: EdgeSet,
}

impl LoopConfiguration {
    pub fn is_closed(&self, patch: &LatticePatch) -> bool {
        (0..patch.vertices().len()).all(|v| {
            patch
                .incident(v)
                .iter()
                .filter(|&&e| self.occupied_edges.contains(e))
                .count()
                % 2
                == 0
        })
    }

    /// Whether qubit `site` is in |1> in this configuration.
    pub fn site_occupied(&self, site: SiteId) -> bool {
        self.occupied_edges.contains(site / 2)
    }

    /// Computational basis index of the configuration.
    pub fn basis_index(&self) -> usize {
        self.occupied_edges.iter().map(|e| 3usize << (2 * e)).sum()
    }
}

/// Fundamental cycles of a BFS spanning forest, one per non-tree edge.
pub fn cycle_basis(patch: &LatticePatch) -> Vec<EdgeSet> {
    let nv = patch.vertices().len();
    let ne = patch.edges().len();
    let mut parent: Vec<Option<(usize, usize)>> = vec![None; nv];
    let mut depth = vec![usize::MAX; nv];
    let mut tree = vec![false; ne];
    for root in 0..nv {
        if depth[root] != usize::MAX {
            continue;
        }
        depth[root] = 0;
        let mut queue = VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            for &e in patch.incident(v) {
                let [a, b] = patch.edges()[e].endpoints;
                let w = if a == v { b } else { a };
                if depth[w] == usize::MAX {
                    depth[w] = depth[v] + 1;
                    parent[w] = Some((v, e));
                    tree[e] = true;
                    queue.push_back(w);
                }
            }
        }
    }
    let mut basis = Vec::new();
    for (e, edge) in patch.edges().iter().enumerate() {
        if tree[e] {
            continue;
        }
        let mut cycle = EdgeSet::empty(ne);
        cycle.toggle(e);
        let [mut a, mut b] = edge.endpoints;
        while a != b {
            if depth[a] < depth[b] {
                std::mem::swap(&mut a, &mut b);
            }
            let (p, pe) = parent[a].expect("non-root vertex has a parent");
            cycle.toggle(pe);
            a = p;
        }
        basis.push(cycle);
    }
    basis
}

/// All closed-loop configurations, as the span of the fundamental cycles.
/// The order follows a binary Gray code over the basis.
pub fn enumerate_loops(patch: &LatticePatch) -> Result<Vec<LoopConfiguration>> {
    let basis = cycle_basis(patch);
    if basis.len() > MAX_CYCLE_RANK {
        return Err(Error::ResourceLimit {
            what: "cycle rank",
            actual: basis.len(),
            limit: MAX_CYCLE_RANK,
        });
    }
    let mut current = EdgeSet::empty(patch.edges().len());
    let mut out = Vec::with_capacity(1 << basis.len());
    out.push(LoopConfiguration {
        occupied_edges: current.clone(),
    });
    for k in 1usize..(1 << basis.len()) {
        current.xor_with(&basis[k.trailing_zeros() as usize]);
        out.push(LoopConfiguration {
            occupied_edges: current.clone(),
        });
    }
    Ok(out)
}

/// Sparse form of a string-net state: one amplitude per loop configuration.
/// Works beyond the dense qubit cap.
#[derive(Debug, Clone)]
pub struct LoopSuperposition {
    pub qubit_count: usize,
    pub loops: Vec<LoopConfiguration>,
    pub amplitudes: Vec<C64>,
    pub cz_pairs: Vec<(SiteId, SiteId)>,
}

impl LoopSuperposition {
    pub fn plain(patch: &LatticePatch) -> Result<Self> {
        let loops = enumerate_loops(patch)?;
        let a = C64::new(1.0 / (loops.len() as f64).sqrt(), 0.0);
        Ok(Self {
            qubit_count: patch.qubit_count(),
            amplitudes: vec![a; loops.len()],
            loops,
            cz_pairs: Vec::new(),
        })
    }

    /// Applies CZ gates. They are diagonal, so each configuration picks up the
    /// sign `(-1)^{f(ξ)}`, `f` counting pairs with both sites occupied.
    pub fn with_precoupling(mut self, pairs: &[(SiteId, SiteId)]) -> Result<Self> {
        for &(a, b) in pairs {
            check_pair(self.qubit_count, a, b)?;
            for (lp, amp) in self.loops.iter().zip(self.amplitudes.iter_mut()) {
                if lp.site_occupied(a) && lp.site_occupied(b) {
                    *amp = -*amp;
                }
            }
            self.cz_pairs.push((a, b));
        }
        Ok(self)
    }

    pub fn signs(&self) -> Vec<i8> {
        self.amplitudes
            .iter()
            .map(|a| if a.re < 0.0 { -1 } else { 1 })
            .collect()
    }

    pub fn to_dense(&self, cap: usize) -> Result<StateVector> {
        let mut s = StateVector::basis(self.qubit_count, 0, cap)?;
        s.amplitudes_mut()[0] = C64::new(0.0, 0.0);
        for (lp, amp) in self.loops.iter().zip(&self.amplitudes) {
            s.amplitudes_mut()[lp.basis_index()] = *amp;
        }
        Ok(s)
    }
}

fn check_pair(n: usize, a: SiteId, b: SiteId) -> Result<()> {
    if a == b {
        return Err(Error::InvalidArgument(format!("CZ pair ({a}, {b}) repeats a site")));
    }
    if a >= n || b >= n {
        return Err(Error::Range(format!("CZ pair ({a}, {b}) outside {n} qubits")));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ResourceKind {
    Plain,
    Modified { cz_pairs: Vec<(SiteId, SiteId)> },
}

#[derive(Debug, Clone)]
pub struct ResourceState {
    pub state: StateVector,
    /// Sign of each loop configuration's amplitude.
    pub signs: Vec<(LoopConfiguration, i8)>,
    pub kind: ResourceKind,
}

#[derive(Serialize)]
struct AmplitudeEntry {
    index: usize,
    re: f64,
    im: f64,
}

impl ResourceState {
    /// Nonzero amplitudes as `[{index, re, im}]`.
    pub fn to_json(&self) -> serde_json::Value {
        let entries: Vec<AmplitudeEntry> = self
            .state
            .amplitudes()
            .iter()
            .enumerate()
            .filter(|(_, a)| a.norm() > 1e-14)
            .map(|(index, a)| AmplitudeEntry {
                index,
                re: a.re,
                im: a.im,
            })
            .collect();
        serde_json::json!({ "kind": self.kind, "amplitudes": entries })
    }

    fn read_signs(state: &StateVector, loops: Vec<LoopConfiguration>) -> Vec<(LoopConfiguration, i8)> {
        loops
            .into_iter()
            .map(|lp| {
                let s = if state.amplitudes()[lp.basis_index()].re < 0.0 { -1 } else { 1 };
                (lp, s)
            })
            .collect()
    }
}

pub fn ground_state(patch: &LatticePatch) -> Result<ResourceState> {
    ground_state_with_cap(patch, DEFAULT_QUBIT_CAP)
}

pub fn ground_state_with_cap(patch: &LatticePatch, cap: usize) -> Result<ResourceState> {
    if patch.qubit_count() > cap {
        return Err(Error::ResourceLimit {
            what: "qubit count",
            actual: patch.qubit_count(),
            limit: cap,
        });
    }
    let sup = LoopSuperposition::plain(patch)?;
    let state = sup.to_dense(cap)?;
    Ok(ResourceState {
        signs: sup.loops.into_iter().map(|lp| (lp, 1)).collect(),
        state,
        kind: ResourceKind::Plain,
    })
}

/// Hamiltonian terms: plaquette X strings, then vertex and edge Z strings.
pub fn hamiltonian_terms(patch: &LatticePatch) -> Vec<PauliTerm> {
    let s = patch.term_supports();
    s.plaquettes
        .into_iter()
        .map(PauliTerm::x)
        .chain(s.vertices.into_iter().map(PauliTerm::z))
        .chain(s.edges.into_iter().map(PauliTerm::z))
        .collect()
}

/// `<ψ|H|ψ>` with `H = -Σ terms`.
pub fn energy(state: &StateVector, patch: &LatticePatch) -> Result<f64> {
    hamiltonian_terms(patch)
        .iter()
        .map(|t| state.expectation(t).map(|e| -e))
        .sum()
}

/// Builds |G> by applying the projectors `(1 + term)/2` of every Hamiltonian
/// term to `|0...0>` and renormalizing.
pub fn stabilizer_project(patch: &LatticePatch) -> Result<ResourceState> {
    if patch.qubit_count() == 0 {
        return Err(Error::InvalidArgument("patch has no qubits".into()));
    }
    let mut state = StateVector::zero(patch.qubit_count())?;
    let s = patch.term_supports();
    let terms = s
        .edges
        .into_iter()
        .map(PauliTerm::z)
        .chain(s.vertices.into_iter().map(PauliTerm::z))
        .chain(s.plaquettes.into_iter().map(PauliTerm::x));
    for term in terms {
        let mut moved = state.clone();
        moved.apply_term(&term)?;
        for (a, b) in state.amplitudes_mut().iter_mut().zip(moved.amplitudes()) {
            *a = (*a + b) * 0.5;
        }
    }
    if state.normalize() < 1e-12 {
        return Err(Error::DegenerateSeed);
    }
    state.fix_global_phase(1e-12);
    let loops = enumerate_loops(patch)?;
    Ok(ResourceState {
        signs: ResourceState::read_signs(&state, loops),
        state,
        kind: ResourceKind::Plain,
    })
}

pub fn apply_precoupling(state: &ResourceState, cz_pairs: &[(SiteId, SiteId)]) -> Result<ResourceState> {
    let mut out = state.state.clone();
    for &(a, b) in cz_pairs {
        check_pair(out.qubit_count(), a, b)?;
        out.apply_cz(a, b)?;
    }
    let mut pairs = match &state.kind {
        ResourceKind::Plain => Vec::new(),
        ResourceKind::Modified { cz_pairs } => cz_pairs.clone(),
    };
    pairs.extend_from_slice(cz_pairs);
    let loops = state.signs.iter().map(|(lp, _)| lp.clone()).collect();
    Ok(ResourceState {
        signs: ResourceState::read_signs(&out, loops),
        state: out,
        kind: if pairs.is_empty() && cz_pairs.is_empty() {
            state.kind.clone()
        } else {
            ResourceKind::Modified { cz_pairs: pairs }
        },
    })
}
