//! Vertex tensors, brute-force contraction, and the column-sweep engine that
//! evaluates measurement branches in the correlation space.
//!
//! Every edge carries one virtual bond, shared by the two vertex tensors at its
//! ends, and both qubits on the edge copy the bond value. A patch state is
//! therefore a sum over bond configurations with even parity at every vertex.
//!
//! [`CorrelationState`] keeps a sparse table over the bonds that are still
//! open: bonds reached by the sweep that still have an unmeasured qubit, or an
//! endpoint the sweep has not reached. Measuring a qubit multiplies the table by
//! `<m|x_e>`; a bond whose qubits are all measured and whose endpoints are all
//! materialized is summed out. Outcome probabilities weight each table entry by
//! the number of closed completions of the unswept region, which only depends
//! on the bonds crossing the sweep front.

use std::collections::HashMap;
use std::sync::Arc;

use nalgebra::DMatrix;
use rand::Rng;

use crate::error::{Error, Result};
use crate::lattice::{EdgeId, EdgeKind, LatticePatch, SiteId, VertexId};
use crate::oracle::{MeasurementBasis, StateVector, C64, DEFAULT_QUBIT_CAP, MIN_BRANCH_PROBABILITY};

/// Rank-6 tensor `T[s1 s2 s3; i j k]`, flattened as `(s << 3) | v` with
/// bit `n` of `s` (or `v`) holding leg `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct VertexTensor {
    entries: [C64; 64],
}

impl VertexTensor {
    /// The string-net tensor: each physical leg copies its virtual leg, and
    /// the virtual legs have even parity.
    pub fn string_net() -> Self {
        let mut entries = [C64::new(0.0, 0.0); 64];
        for v in 0..8usize {
            if v.count_ones() % 2 == 0 {
                entries[(v << 3) | v] = C64::new(1.0, 0.0);
            }
        }
        Self { entries }
    }

    pub fn from_entries(entries: [C64; 64]) -> Self {
        Self { entries }
    }

    pub fn entry(&self, physical: [u8; 3], virtual_: [u8; 3]) -> C64 {
        let pack = |b: [u8; 3]| (b[0] & 1) as usize | ((b[1] & 1) as usize) << 1 | ((b[2] & 1) as usize) << 2;
        self.entries[(pack(physical) << 3) | pack(virtual_)]
    }

    pub fn nonzero_count(&self) -> usize {
        self.entries.iter().filter(|e| e.norm() > 0.0).count()
    }

    /// Physical amplitudes (indexed like the oracle, leg `n` on bit `n`) with
    /// the virtual legs fixed.
    pub fn physical_state(&self, virtual_: [u8; 3]) -> [C64; 8] {
        let v = (virtual_[0] & 1) as usize | ((virtual_[1] & 1) as usize) << 1 | ((virtual_[2] & 1) as usize) << 2;
        let mut out = [C64::new(0.0, 0.0); 8];
        for (s, o) in out.iter_mut().enumerate() {
            *o = self.entries[(s << 3) | v];
        }
        out
    }
}

/// Contracts one `tensor` per vertex, virtual legs joined along edges and
/// missing legs pinned to 0 (physical and virtual). Enumerates all `2^|E|`
/// bond configurations, so it is only meant for small patches.
pub fn contract_patch(patch: &LatticePatch) -> Result<StateVector> {
    contract_patch_with(patch, &VertexTensor::string_net(), DEFAULT_QUBIT_CAP)
}

pub fn contract_patch_with(patch: &LatticePatch, tensor: &VertexTensor, cap: usize) -> Result<StateVector> {
    let n = patch.qubit_count();
    let mut state = StateVector::basis(n, 0, cap)?;
    state.amplitudes_mut()[0] = C64::new(0.0, 0.0);
    let ne = patch.edges().len();
    if ne > 24 {
        return Err(Error::ResourceLimit {
            what: "bond count",
            actual: ne,
            limit: 24,
        });
    }
    // Per vertex: (edge, site) for each present leg, in slot order.
    let legs: Vec<Vec<(EdgeId, SiteId)>> = (0..patch.vertices().len())
        .map(|v| {
            patch
                .incident(v)
                .iter()
                .map(|&e| (e, patch.site_near(e, v).expect("incident edge")))
                .collect()
        })
        .collect();

    let mut partial: Vec<(usize, C64)> = Vec::new();
    for config in 0u64..(1u64 << ne) {
        partial.clear();
        partial.push((0, C64::new(1.0, 0.0)));
        for leg in &legs {
            let mut virt = [0u8; 3];
            for (k, &(e, _)) in leg.iter().enumerate() {
                virt[k] = (config >> e & 1) as u8;
            }
            let phys = tensor.physical_state(virt);
            let mut next = Vec::with_capacity(partial.len());
            for (s, amp) in phys.iter().enumerate() {
                if amp.norm() == 0.0 || s >> leg.len() != 0 {
                    continue;
                }
                let mut bits = 0usize;
                for (k, &(_, site)) in leg.iter().enumerate() {
                    bits |= (s >> k & 1) << site;
                }
                for &(idx, a) in &partial {
                    next.push((idx | bits, a * amp));
                }
            }
            partial = next;
            if partial.is_empty() {
                break;
            }
        }
        for &(idx, a) in &partial {
            state.amplitudes_mut()[idx] += a;
        }
    }
    if state.normalize() == 0.0 {
        return Err(Error::DegenerateSeed);
    }
    state.fix_global_phase(1e-12);
    Ok(state)
}

/// Which part of a patch a [`CorrelationState`] contracts.
#[derive(Debug, Clone)]
pub struct Fragment {
    pub paths: Vec<usize>,
    pub first_column: i64,
    pub last_column: i64,
    pub sites: Vec<SiteId>,
}

/// Static data shared by every branch of one sweep.
#[derive(Debug)]
pub struct SweepPlan {
    patch: Arc<LatticePatch>,
    /// Vertices to materialize, by column.
    columns: Vec<Vec<VertexId>>,
    vertex_included: Vec<bool>,
    site_included: Vec<bool>,
    /// Bonds that are never summed out (fragment inputs and outputs).
    port: Vec<bool>,
    inputs: Vec<EdgeId>,
    outputs: Vec<EdgeId>,
    /// `frontier[m]`: bonds crossing from column `m - 1` to column `m`
    /// (index 0 is the empty front before the sweep starts).
    frontier: Vec<Vec<EdgeId>>,
    /// `env[m][mask]`: closed completions right of the front.
    env: Vec<Vec<f64>>,
    full: bool,
}

impl SweepPlan {
    /// Plan for the whole patch, with completion counts for probabilities.
    pub fn full(patch: Arc<LatticePatch>) -> Result<Arc<Self>> {
        if !patch.is_hexagonal() {
            return Err(Error::InvalidArgument("sweeps need a hexagonal patch".into()));
        }
        let last = patch.last_column();
        let mut columns = vec![Vec::new(); last as usize + 1];
        for v in patch.vertices() {
            columns[v.coord.expect("hexagonal").x as usize].push(v.id);
        }
        let mut frontier = vec![Vec::new(); last as usize + 2];
        for e in patch.edges() {
            if let EdgeKind::Path { x, .. } = e.kind {
                frontier[x as usize + 1].push(e.id);
            }
        }
        for f in frontier.iter_mut() {
            f.sort_unstable();
        }
        let mut env = vec![Vec::new(); last as usize + 2];
        env[last as usize + 1] = vec![1.0];
        for m in (0..=last as usize).rev() {
            let left = &frontier[m];
            let right = &frontier[m + 1];
            let mut table = vec![0.0; 1 << left.len()];
            for (mask, slot) in table.iter_mut().enumerate() {
                let mut values: HashMap<EdgeId, u8> =
                    left.iter().enumerate().map(|(k, &e)| (e, (mask >> k & 1) as u8)).collect();
                *slot = column_completions(&patch, &columns[m], &mut values, right, &env[m + 1]);
            }
            env[m] = table;
        }
        let n = patch.qubit_count();
        let nv = patch.vertices().len();
        let ne = patch.edges().len();
        Ok(Arc::new(Self {
            patch,
            columns,
            vertex_included: vec![true; nv],
            site_included: vec![true; n],
            port: vec![false; ne],
            inputs: Vec::new(),
            outputs: Vec::new(),
            frontier,
            env,
            full: true,
        }))
    }

    /// Plan for a fragment: only the listed paths and columns are
    /// materialized, only the listed sites are measured, and the bonds
    /// entering and leaving the fragment stay open as ports.
    pub fn fragment(patch: Arc<LatticePatch>, fragment: &Fragment) -> Result<Arc<Self>> {
        if !patch.is_hexagonal() {
            return Err(Error::InvalidArgument("fragments need a hexagonal patch".into()));
        }
        let mut paths = fragment.paths.clone();
        paths.sort_unstable();
        paths.dedup();
        let last = patch.last_column();
        let mut columns = vec![Vec::new(); last as usize + 1];
        let mut vertex_included = vec![false; patch.vertices().len()];
        for x in fragment.first_column..=fragment.last_column {
            for &p in &paths {
                if let Some(v) = patch.vertex_at(x, p) {
                    columns[x as usize].push(v);
                    vertex_included[v] = true;
                }
            }
        }
        let mut site_included = vec![false; patch.qubit_count()];
        for &s in &fragment.sites {
            if s >= site_included.len() {
                return Err(Error::Range(format!("site {s} outside the patch")));
            }
            site_included[s] = true;
        }
        let mut port = vec![false; patch.edges().len()];
        let mut inputs = Vec::new();
        let mut outputs = Vec::new();
        for &p in &paths {
            if let Some(e) = patch.path_edge(p, fragment.first_column - 1) {
                port[e] = true;
                inputs.push(e);
            }
            if let Some(e) = patch.path_edge(p, fragment.last_column) {
                port[e] = true;
                outputs.push(e);
            }
        }
        Ok(Arc::new(Self {
            patch,
            columns,
            vertex_included,
            site_included,
            port,
            inputs,
            outputs,
            frontier: Vec::new(),
            env: Vec::new(),
            full: false,
        }))
    }

    pub fn patch(&self) -> &LatticePatch {
        &self.patch
    }

    /// Number of closed-loop configurations of the whole patch.
    pub fn loop_count(&self) -> Option<f64> {
        self.env.first().and_then(|e| e.first()).copied()
    }
}

/// Sums completion counts over the free rungs of one column, given the bonds
/// entering it.
fn column_completions(
    patch: &LatticePatch,
    vertices: &[VertexId],
    values: &mut HashMap<EdgeId, u8>,
    right: &[EdgeId],
    env_right: &[f64],
) -> f64 {
    // Resolve vertices one at a time: all but one new bond free, the last
    // fixed by parity.
    fn go(
        patch: &LatticePatch,
        vertices: &[VertexId],
        values: &mut HashMap<EdgeId, u8>,
        right: &[EdgeId],
        env_right: &[f64],
    ) -> f64 {
        let Some((&v, rest)) = vertices.split_first() else {
            let mask = right
                .iter()
                .enumerate()
                .map(|(k, e)| (values[e] as usize) << k)
                .sum::<usize>();
            return env_right[mask];
        };
        let inc = patch.incident(v);
        let fresh: Vec<EdgeId> = inc.iter().copied().filter(|e| !values.contains_key(e)).collect();
        let known: u8 = inc.iter().filter_map(|e| values.get(e)).fold(0, |a, b| a ^ b);
        if fresh.is_empty() {
            return if known == 0 {
                go(patch, rest, values, right, env_right)
            } else {
                0.0
            };
        }
        let free = fresh.len() - 1;
        let mut total = 0.0;
        for assign in 0..(1u32 << free) {
            let mut parity = known;
            for (k, &e) in fresh[..free].iter().enumerate() {
                let b = (assign >> k & 1) as u8;
                values.insert(e, b);
                parity ^= b;
            }
            values.insert(fresh[free], parity);
            total += go(patch, rest, values, right, env_right);
        }
        for e in &fresh {
            values.remove(e);
        }
        total
    }
    go(patch, vertices, values, right, env_right)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum BondStatus {
    Unseen,
    Active(u8),
    Summed,
}

/// Sparse amplitude table over the open bonds of a partially measured patch.
#[derive(Debug, Clone)]
pub struct CorrelationState {
    plan: Arc<SweepPlan>,
    active: Vec<EdgeId>,
    status: Vec<BondStatus>,
    measured: Vec<bool>,
    materialized: Vec<bool>,
    /// Columns `< swept` are materialized.
    swept: usize,
    table: Vec<(u64, C64)>,
}

impl CorrelationState {
    /// The (normalized) initial state of a full sweep, or the identity map on
    /// the input ports of a fragment.
    pub fn new(plan: Arc<SweepPlan>) -> Self {
        let ne = plan.patch.edges().len();
        let mut status = vec![BondStatus::Unseen; ne];
        let mut active = Vec::new();
        let table = if plan.full {
            let n = plan.loop_count().expect("full plan has counts");
            vec![(0, C64::new(1.0 / n.sqrt(), 0.0))]
        } else {
            for &e in &plan.inputs {
                status[e] = BondStatus::Active(active.len() as u8);
                active.push(e);
            }
            (0..1u64 << active.len()).map(|k| (k, C64::new(1.0, 0.0))).collect()
        };
        Self {
            measured: vec![false; plan.patch.qubit_count()],
            materialized: vec![false; plan.patch.vertices().len()],
            swept: 0,
            plan,
            active,
            status,
            table,
        }
    }

    pub fn plan(&self) -> &Arc<SweepPlan> {
        &self.plan
    }

    pub fn entries(&self) -> &[(u64, C64)] {
        &self.table
    }

    pub fn active_bonds(&self) -> &[EdgeId] {
        &self.active
    }

    /// Materializes every column up to and including `x`.
    pub fn sweep_to(&mut self, x: i64) -> Result<()> {
        while (self.swept as i64) <= x && self.swept < self.plan.columns.len() {
            let column = self.plan.columns[self.swept].clone();
            for v in column {
                self.materialize(v)?;
            }
            self.swept += 1;
        }
        Ok(())
    }

    fn slot(&self, e: EdgeId) -> Option<usize> {
        match self.status[e] {
            BondStatus::Active(s) => Some(s as usize),
            _ => None,
        }
    }

    fn materialize(&mut self, v: VertexId) -> Result<()> {
        let patch = Arc::clone(&self.plan.patch);
        let inc = patch.incident(v);
        let mut known_mask = 0u64;
        let mut fresh = Vec::new();
        for &e in inc {
            match self.status[e] {
                BondStatus::Active(s) => known_mask |= 1 << s,
                BondStatus::Unseen => fresh.push(e),
                BondStatus::Summed => {
                    return Err(Error::InvalidArgument(format!(
                        "bond {e} summed out before vertex {v} was reached"
                    )))
                }
            }
        }
        if self.active.len() + fresh.len() > 60 {
            return Err(Error::ResourceLimit {
                what: "open bonds",
                actual: self.active.len() + fresh.len(),
                limit: 60,
            });
        }
        if fresh.is_empty() {
            self.table.retain(|(k, _)| (k & known_mask).count_ones() % 2 == 0);
        } else {
            let base = self.active.len();
            let free = fresh.len() - 1;
            let mut next = Vec::with_capacity(self.table.len() << free);
            for &(k, a) in &self.table {
                let parity = (k & known_mask).count_ones() as u64 & 1;
                for assign in 0..(1u64 << free) {
                    let last = (parity + assign.count_ones() as u64) & 1;
                    let key = k | assign << base | last << (base + free);
                    next.push((key, a));
                }
            }
            self.table = next;
            for e in fresh {
                self.status[e] = BondStatus::Active(self.active.len() as u8);
                self.active.push(e);
            }
        }
        self.materialized[v] = true;
        for &e in inc {
            self.try_sum_out(e);
        }
        Ok(())
    }

    fn summable(&self, e: EdgeId) -> bool {
        if self.plan.port[e] || self.slot(e).is_none() {
            return false;
        }
        let edge = &self.plan.patch.edges()[e];
        edge.sites
            .iter()
            .all(|&s| self.measured[s] || !self.plan.site_included[s])
            && edge
                .endpoints
                .iter()
                .all(|&v| self.materialized[v] || !self.plan.vertex_included[v])
    }

    fn try_sum_out(&mut self, e: EdgeId) {
        if !self.summable(e) {
            return;
        }
        let s = self.slot(e).expect("active");
        let low = (1u64 << s) - 1;
        for entry in self.table.iter_mut() {
            entry.0 = (entry.0 & low) | ((entry.0 >> (s + 1)) << s);
        }
        self.table.sort_unstable_by_key(|(k, _)| *k);
        let mut merged: Vec<(u64, C64)> = Vec::with_capacity(self.table.len());
        for &(k, a) in &self.table {
            match merged.last_mut() {
                Some((lk, la)) if *lk == k => *la += a,
                _ => merged.push((k, a)),
            }
        }
        merged.retain(|(_, a)| a.norm_sqr() > 1e-300);
        self.table = merged;
        self.active.remove(s);
        self.status[e] = BondStatus::Summed;
        for (k, &f) in self.active.iter().enumerate() {
            self.status[f] = BondStatus::Active(k as u8);
        }
    }

    fn prepare_site(&mut self, site: SiteId) -> Result<usize> {
        let patch = Arc::clone(&self.plan.patch);
        if site >= patch.qubit_count() {
            return Err(Error::Range(format!("site {site} outside the patch")));
        }
        if !self.plan.site_included[site] {
            return Err(Error::InvalidArgument(format!("site {site} is not part of this sweep")));
        }
        if self.measured[site] {
            return Err(Error::InvalidArgument(format!("site {site} measured twice")));
        }
        let v = patch.site_vertex(site);
        if self.plan.vertex_included[v] {
            let x = patch.column(v).expect("hexagonal");
            self.sweep_to(x)?;
        }
        let e = patch.site_edge(site);
        if self.status[e] == BondStatus::Unseen {
            return Err(Error::InvalidArgument(format!(
                "site {site} lies on a bond outside the sweep"
            )));
        }
        Ok(e)
    }

    /// Contracts `site` with `<bra|` without renormalizing.
    pub fn apply_bra(&mut self, site: SiteId, bra: [C64; 2]) -> Result<()> {
        let e = self.prepare_site(site)?;
        let s = self.slot(e).expect("active bond");
        for entry in self.table.iter_mut() {
            entry.1 *= bra[(entry.0 >> s & 1) as usize];
        }
        self.measured[site] = true;
        self.try_sum_out(e);
        Ok(())
    }

    /// Multiplies by `(-1)^{x_a x_b}`: a CZ between the qubits on two bonds.
    pub fn apply_cz(&mut self, site_a: SiteId, site_b: SiteId) -> Result<()> {
        let ea = self.prepare_site(site_a)?;
        let eb = self.prepare_site(site_b)?;
        if ea == eb {
            return Err(Error::InvalidArgument("CZ within one bond".into()));
        }
        let mask = (1u64 << self.slot(ea).expect("active")) | (1u64 << self.slot(eb).expect("active"));
        for entry in self.table.iter_mut() {
            if entry.0 & mask == mask {
                entry.1 = -entry.1;
            }
        }
        Ok(())
    }

    fn front_mask(&self, key: u64, slots: &[usize]) -> usize {
        slots
            .iter()
            .enumerate()
            .map(|(k, &s)| ((key >> s & 1) as usize) << k)
            .sum()
    }

    /// Total probability weight of the current table.
    pub fn weight(&self) -> f64 {
        assert!(self.plan.full, "probabilities need a full sweep");
        let front = &self.plan.frontier[self.swept];
        let env = &self.plan.env[self.swept];
        let slots: Vec<usize> = front
            .iter()
            .map(|&e| self.slot(e).expect("front bonds stay open"))
            .collect();
        self.table
            .iter()
            .map(|&(k, a)| a.norm_sqr() * env[self.front_mask(k, &slots)])
            .sum()
    }

    /// Outcome probabilities for measuring `site` in `basis`.
    pub fn probabilities(&mut self, site: SiteId, basis: MeasurementBasis) -> Result<[f64; 2]> {
        let e = self.prepare_site(site)?;
        let s = self.slot(e).expect("active bond");
        let total = self.weight();
        self.measured[site] = true;
        let closes = self.summable(e);
        self.measured[site] = false;
        let bras = [basis.bra(0), basis.bra(1)];
        let front = &self.plan.frontier[self.swept];
        let env = &self.plan.env[self.swept];
        let mut w = [0.0; 2];
        if closes {
            // The bond is summed out right after the measurement, so the two
            // bond values interfere.
            let low = (1u64 << s) - 1;
            let reduce = |k: u64| (k & low) | ((k >> (s + 1)) << s);
            let mut rows: Vec<(u64, [C64; 2])> = self
                .table
                .iter()
                .map(|&(k, a)| {
                    let b = (k >> s & 1) as usize;
                    (reduce(k), [a * bras[0][b], a * bras[1][b]])
                })
                .collect();
            rows.sort_unstable_by_key(|r| r.0);
            let remaining: Vec<EdgeId> = self.active.iter().copied().filter(|&f| f != e).collect();
            let slots: Vec<usize> = front
                .iter()
                .map(|f| remaining.iter().position(|g| g == f).expect("front bonds stay open"))
                .collect();
            let mut i = 0;
            while i < rows.len() {
                let key = rows[i].0;
                let mut acc = [C64::new(0.0, 0.0); 2];
                while i < rows.len() && rows[i].0 == key {
                    acc[0] += rows[i].1[0];
                    acc[1] += rows[i].1[1];
                    i += 1;
                }
                let m = env[self.front_mask(key, &slots)];
                w[0] += acc[0].norm_sqr() * m;
                w[1] += acc[1].norm_sqr() * m;
            }
        } else {
            let slots: Vec<usize> = front
                .iter()
                .map(|&f| self.slot(f).expect("front bonds stay open"))
                .collect();
            for &(k, a) in &self.table {
                let b = (k >> s & 1) as usize;
                let m = env[self.front_mask(k, &slots)];
                w[0] += (a * bras[0][b]).norm_sqr() * m;
                w[1] += (a * bras[1][b]).norm_sqr() * m;
            }
        }
        Ok([w[0] / total, w[1] / total])
    }

    /// Squared norm of the (unnormalized) table.
    pub fn table_norm_sqr(&self) -> f64 {
        self.table.iter().map(|(_, a)| a.norm_sqr()).sum()
    }

    /// Measures `site`, renormalizes, and returns the outcome with its
    /// probability. Without `forced`, the outcome is drawn from `rng`.
    pub fn measure<R: Rng + ?Sized>(
        &mut self,
        site: SiteId,
        basis: MeasurementBasis,
        forced: Option<u8>,
        rng: &mut R,
    ) -> Result<(u8, f64)> {
        let p = self.probabilities(site, basis)?;
        let outcome = match forced {
            Some(o) => o & 1,
            None => u8::from(rng.random::<f64>() >= p[0]),
        };
        if p[outcome as usize] <= MIN_BRANCH_PROBABILITY {
            return Err(Error::ImpossibleOutcome { site, outcome });
        }
        self.commit(site, basis, outcome)?;
        Ok((outcome, p[outcome as usize]))
    }

    /// Applies a known outcome and renormalizes.
    pub fn commit(&mut self, site: SiteId, basis: MeasurementBasis, outcome: u8) -> Result<()> {
        self.apply_bra(site, basis.bra(outcome))?;
        self.renormalize();
        Ok(())
    }

    fn renormalize(&mut self) {
        let w = self.weight();
        if w > 0.0 {
            let s = 1.0 / w.sqrt();
            self.table.iter_mut().for_each(|e| e.1 *= s);
        }
    }

    /// Whether two states agree up to a global phase (same open bonds, and
    /// normalized tables with overlap 1 within `tol`).
    pub fn parallel_to(&self, other: &CorrelationState, tol: f64) -> bool {
        if self.active != other.active || self.table.len() != other.table.len() {
            return false;
        }
        let mut ip = C64::new(0.0, 0.0);
        let mut na = 0.0;
        let mut nb = 0.0;
        for (&(ka, a), &(kb, b)) in self.table.iter().zip(&other.table) {
            if ka != kb {
                return false;
            }
            ip += a.conj() * b;
            na += a.norm_sqr();
            nb += b.norm_sqr();
        }
        na == 0.0 && nb == 0.0 || (ip.norm() / (na * nb).sqrt() - 1.0).abs() < tol
    }

    /// Reads a finished fragment as a matrix from input ports to output
    /// ports. Port bits are ordered by path, first path most significant.
    pub fn port_matrix(&self) -> Result<DMatrix<C64>> {
        if let Some(s) = (0..self.measured.len()).find(|&s| self.plan.site_included[s] && !self.measured[s]) {
            return Err(Error::IncompletePattern(format!("site {s} was not measured")));
        }
        let extra: Vec<EdgeId> = self
            .active
            .iter()
            .copied()
            .filter(|&e| !self.plan.port[e])
            .collect();
        if let Some(&e) = extra.first() {
            let s = self.plan.patch.edges()[e]
                .sites
                .iter()
                .copied()
                .find(|&s| self.plan.site_included[s] && !self.measured[s]);
            return Err(Error::IncompletePattern(match s {
                Some(s) => format!("site {s} was not measured"),
                None => format!("bond {e} is still open"),
            }));
        }
        let order = |ports: &[EdgeId]| -> Vec<usize> {
            let mut v = ports.to_vec();
            v.sort_by_key(|&e| match self.plan.patch.edges()[e].kind {
                EdgeKind::Path { path, .. } => path,
                _ => usize::MAX,
            });
            v.iter().map(|&e| self.slot(e).expect("port open")).collect()
        };
        let ins = order(&self.plan.inputs);
        let outs = order(&self.plan.outputs);
        let index = |key: u64, slots: &[usize]| -> usize {
            slots
                .iter()
                .fold(0usize, |acc, &s| (acc << 1) | (key >> s & 1) as usize)
        };
        let mut m = DMatrix::from_element(1 << outs.len(), 1 << ins.len(), C64::new(0.0, 0.0));
        for &(k, a) in &self.table {
            m[(index(k, &outs), index(k, &ins))] += a;
        }
        Ok(m)
    }
}

/// One measurement inside a fragment, with a fixed outcome.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedMeasurement {
    pub site: SiteId,
    pub basis: MeasurementBasis,
    pub outcome: u8,
}

/// Operator a measurement branch induces on the bonds of a fragment, from
/// the bonds entering its first column to those leaving its last one.
///
/// `cz` pairs are applied before the measurements. Every site of the fragment
/// must be measured, otherwise an incomplete-pattern error is returned.
pub fn induced_operator(
    patch: Arc<LatticePatch>,
    fragment: &Fragment,
    cz: &[(SiteId, SiteId)],
    measurements: &[FixedMeasurement],
) -> Result<DMatrix<C64>> {
    let plan = SweepPlan::fragment(patch, fragment)?;
    let mut state = CorrelationState::new(plan);
    let mut pending: Vec<(SiteId, SiteId)> = cz.to_vec();
    for m in measurements {
        // A CZ must act before either of its qubits is measured.
        let (now, later): (Vec<_>, Vec<_>) = pending
            .into_iter()
            .partition(|&(a, b)| a == m.site || b == m.site);
        for (a, b) in now {
            state.apply_cz(a, b)?;
        }
        pending = later;
        state.apply_bra(m.site, m.basis.bra(m.outcome))?;
    }
    for (a, b) in pending {
        state.apply_cz(a, b)?;
    }
    state.sweep_to(fragment.last_column)?;
    state.port_matrix()
}
