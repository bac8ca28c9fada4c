use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use super::{Linear, Q};
use crate::error::{invalid, Result};

pub type V = [i32; 3];

/// Unit square with lowest corner `v`, perpendicular to axis `normal`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Face {
    pub v: V,
    pub normal: usize,
}

/// Unit segment from `v` along axis `dir`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub v: V,
    pub dir: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Label {
    /// Face and edge start out as a Bell pair.
    Bell,
    /// Teleported CNOT link whose Bell pair is made in this step.
    Slot(u8),
}

use Label::{Bell as B, Slot as S};

/// Link label of each face-edge incidence, by face normal. Edges of a face
/// are listed as `(v, d1), (v + e_d2, d1), (v, d2), (v + e_d1, d2)` with
/// `d1 < d2` the in-plane axes. The same labels are used for every cell.
pub const SCHEDULE: [[Label; 4]; 3] = [
    [B, S(2), S(1), S(3)],
    [S(1), S(3), B, S(2)],
    [B, S(2), S(1), S(3)],
];

pub const STEPS: u8 = 5;

fn unit(d: usize) -> V {
    let mut v = [0; 3];
    v[d] = 1;
    v
}

fn add(a: V, b: V) -> V {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

impl Face {
    pub fn axes(&self) -> (usize, usize) {
        match self.normal {
            0 => (1, 2),
            1 => (0, 2),
            _ => (0, 1),
        }
    }

    pub fn edges(&self) -> [Edge; 4] {
        let (d1, d2) = self.axes();
        [
            Edge { v: self.v, dir: d1 },
            Edge { v: add(self.v, unit(d2)), dir: d1 },
            Edge { v: self.v, dir: d2 },
            Edge { v: add(self.v, unit(d1)), dir: d2 },
        ]
    }
}

impl Edge {
    /// The four faces that contain this edge.
    pub fn faces(&self) -> [Face; 4] {
        let mut out = [Face { v: self.v, normal: 0 }; 4];
        let mut k = 0;
        for normal in (0..3).filter(|&n| n != self.dir) {
            let other = 3 - self.dir - normal;
            let mut below = self.v;
            below[other] -= 1;
            out[k] = Face { v: self.v, normal };
            out[k + 1] = Face { v: below, normal };
            k += 2;
        }
        out
    }
}

/// Index of a qubit in the lattice tables.
pub type Qubit = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Link {
    pub face: Qubit,
    pub edge: Qubit,
    pub slot: u8,
    /// Ancillas in the face ELU and in the edge ELU.
    pub anc_face: Qubit,
    pub anc_edge: Qubit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Source {
    /// First Bell pair of a face.
    Type1 { face: Qubit, edge: Qubit },
    Type2 { link: usize },
    /// Final X measurement of a cluster qubit.
    Type3 { qubit: Qubit },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LocationKind {
    /// Two-qubit depolarizing, ε/15 per Pauli.
    BellPair,
    Cnot,
    /// One idle step, r/3 per Pauli.
    Memory,
    /// Depolarizing ε/3 per Pauli just before a readout.
    Measure,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Location {
    pub kind: LocationKind,
    pub qubits: Vec<Qubit>,
    pub source: usize,
    pub step: u8,
    /// Position in the op list just after which the error acts.
    pub pos: usize,
    /// Whether X or Z on each qubit here flips the cell stabilizer.
    pub flips: Vec<[bool; 2]>,
}

impl LocationKind {
    /// Weight of a single Pauli outcome.
    pub fn weight(self) -> Linear {
        match self {
            LocationKind::BellPair | LocationKind::Cnot => Linear::new(Q::new(1, 15), Q::new(0, 1)),
            LocationKind::Memory => Linear::new(Q::new(0, 1), Q::new(1, 3)),
            LocationKind::Measure => Linear::new(Q::new(1, 3), Q::new(0, 1)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Op {
    Loc(usize),
    Cnot { c: Qubit, t: Qubit, owner: usize },
    /// Z readout; a flipped outcome puts X on the listed qubits.
    MeasZ { q: Qubit, fix: [Qubit; 2], owner: usize },
    /// X readout; a flipped outcome puts Z on `fix`.
    MeasX { q: Qubit, fix: Qubit, owner: usize },
}

impl Op {
    fn owner(&self) -> Option<usize> {
        match *self {
            Op::Loc(_) => None,
            Op::Cnot { owner, .. } | Op::MeasZ { owner, .. } | Op::MeasX { owner, .. } => Some(owner),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StepOps {
    pub bell_pairs: Vec<(Qubit, Qubit)>,
    pub cnots: Vec<(Qubit, Qubit)>,
    pub measurements: Vec<Qubit>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CreationSchedule {
    pub steps: Vec<StepOps>,
}

impl CreationSchedule {
    /// No qubit takes part in two operations in one step, and every
    /// ancilla lives for exactly three steps.
    pub fn validate(&self, links: &[Link]) -> Result<()> {
        for (k, s) in self.steps.iter().enumerate() {
            let mut seen = HashMap::new();
            let qs = s
                .bell_pairs
                .iter()
                .chain(&s.cnots)
                .flat_map(|&(a, b)| [a, b])
                .chain(s.measurements.iter().copied());
            for q in qs {
                if seen.insert(q, ()).is_some() {
                    return Err(invalid("schedule", format!("qubit {q} used twice in step {}", k + 1)));
                }
            }
        }
        let step_of = |pred: &dyn Fn(&StepOps) -> bool| {
            self.steps.iter().position(pred).map(|i| i as u8 + 1)
        };
        for l in links {
            let born = step_of(&|s| s.bell_pairs.contains(&(l.anc_face, l.anc_edge)));
            let read = step_of(&|s| s.measurements.contains(&l.anc_face));
            match (born, read) {
                (Some(b), Some(r)) if r == b + 2 => {}
                _ => return Err(invalid("schedule", "ancilla lifetime is not three steps")),
            }
        }
        Ok(())
    }
}

/// Per-link Z classes on (face, edge) right after the link, as exact
/// first-order weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LinkClasses {
    pub zi: Linear,
    pub iz: Linear,
    pub zz: Linear,
}

/// Faces and edges around one cell, every link among them, and the
/// time-ordered creation circuit with its error locations.
#[derive(Debug, Clone)]
pub struct CellLattice {
    pub faces: Vec<Face>,
    pub edges: Vec<Edge>,
    pub n_qubits: usize,
    pub links: Vec<Link>,
    pub sources: Vec<Source>,
    pub locations: Vec<Location>,
    /// Faces of the central cell, the support of its stabilizer.
    pub cell_faces: Vec<Qubit>,
    pub cell_edges: Vec<Qubit>,
    /// Face-edge hops from the nearest cell face.
    pub hops: Vec<u32>,
    pub schedule: CreationSchedule,
    /// ELU hosting each qubit: the cluster qubit's own ELU for ancillas.
    pub elu_of: Vec<usize>,
    ops: Vec<Op>,
}

impl CellLattice {
    /// Cell at the origin plus every face whose corner lies within
    /// `radius` cells of it.
    pub fn new(radius: i32) -> Result<Self> {
        if radius < 1 {
            return Err(invalid("radius", "the collar needs at least one cell"));
        }
        let mut faces = Vec::new();
        for x in -radius..=radius {
            for y in -radius..=radius {
                for z in -radius..=radius {
                    for normal in 0..3 {
                        faces.push(Face { v: [x, y, z], normal });
                    }
                }
            }
        }
        let mut edges = Vec::new();
        let mut edge_ix: HashMap<Edge, usize> = HashMap::new();
        for f in &faces {
            for e in f.edges() {
                edge_ix.entry(e).or_insert_with(|| {
                    edges.push(e);
                    edges.len() - 1
                });
            }
        }
        let nf = faces.len();
        let face_q = |i: usize| i;
        let edge_q = |i: usize| nf + i;
        let mut n_qubits = nf + edges.len();
        let mut elu_of: Vec<usize> = (0..n_qubits).collect();

        let mut links = Vec::new();
        let mut bells = Vec::new();
        for (fi, f) in faces.iter().enumerate() {
            for (k, e) in f.edges().iter().enumerate() {
                let eq = edge_q(edge_ix[e]);
                match SCHEDULE[f.normal][k] {
                    Label::Bell => bells.push((face_q(fi), eq)),
                    Label::Slot(s) => {
                        let (a, b) = (n_qubits, n_qubits + 1);
                        n_qubits += 2;
                        elu_of.push(face_q(fi));
                        elu_of.push(eq);
                        links.push(Link {
                            face: face_q(fi),
                            edge: eq,
                            slot: s,
                            anc_face: a,
                            anc_edge: b,
                        });
                    }
                }
            }
        }

        let cell_faces: Vec<Qubit> = (0..3)
            .flat_map(|n| [Face { v: [0; 3], normal: n }, Face { v: unit(n), normal: n }])
            .map(|f| faces.iter().position(|g| *g == f).expect("cell is inside the patch"))
            .collect();
        let cell_edges: Vec<Qubit> = {
            let mut v: Vec<Qubit> = cell_faces
                .iter()
                .flat_map(|&f| faces[f].edges())
                .map(|e| edge_q(edge_ix[&e]))
                .collect();
            v.sort_unstable();
            v.dedup();
            v
        };

        // Hop distance over face-edge incidence.
        let mut adj = vec![Vec::new(); nf + edges.len()];
        for (fi, f) in faces.iter().enumerate() {
            for e in f.edges() {
                let eq = edge_q(edge_ix[&e]);
                adj[fi].push(eq);
                adj[eq].push(fi);
            }
        }
        let mut hops = vec![u32::MAX; nf + edges.len()];
        let mut bfs = VecDeque::new();
        for &f in &cell_faces {
            hops[f] = 0;
            bfs.push_back(f);
        }
        while let Some(u) = bfs.pop_front() {
            for &w in &adj[u] {
                if hops[w] == u32::MAX {
                    hops[w] = hops[u] + 1;
                    bfs.push_back(w);
                }
            }
        }

        let mut lat = CellLattice {
            faces,
            edges,
            n_qubits,
            links,
            sources: Vec::new(),
            locations: Vec::new(),
            cell_faces,
            cell_edges,
            hops,
            schedule: CreationSchedule { steps: vec![StepOps::default(); STEPS as usize] },
            elu_of,
            ops: Vec::new(),
        };
        lat.build_circuit(&bells);
        lat.schedule.validate(&lat.links)?;
        lat.compute_flips();
        Ok(lat)
    }

    fn loc(&mut self, kind: LocationKind, qubits: Vec<Qubit>, source: usize, step: u8) {
        let id = self.locations.len();
        self.ops.push(Op::Loc(id));
        self.locations.push(Location {
            kind,
            qubits,
            source,
            step,
            pos: self.ops.len(),
            flips: Vec::new(),
        });
    }

    fn build_circuit(&mut self, bells: &[(Qubit, Qubit)]) {
        use LocationKind::*;
        let link_src: Vec<usize> = (0..self.links.len())
            .map(|l| {
                self.sources.push(Source::Type2 { link: l });
                self.sources.len() - 1
            })
            .collect();
        for step in 1..=STEPS {
            let si = step as usize - 1;
            if step == 1 {
                for &(f, e) in bells {
                    self.sources.push(Source::Type1 { face: f, edge: e });
                    let src = self.sources.len() - 1;
                    self.schedule.steps[si].bell_pairs.push((f, e));
                    self.loc(BellPair, vec![f, e], src, step);
                    self.loc(Memory, vec![f], src, step);
                    self.loc(Memory, vec![e], src, step);
                }
            }
            for li in 0..self.links.len() {
                let l = self.links[li];
                let src = link_src[li];
                if l.slot == step {
                    self.schedule.steps[si].bell_pairs.push((l.anc_face, l.anc_edge));
                    self.loc(BellPair, vec![l.anc_face, l.anc_edge], src, step);
                    for q in [l.face, l.anc_face, l.anc_edge, l.edge] {
                        self.loc(Memory, vec![q], src, step);
                    }
                } else if l.slot + 1 == step {
                    let s = &mut self.schedule.steps[si];
                    s.cnots.push((l.face, l.anc_face));
                    s.cnots.push((l.anc_edge, l.edge));
                    self.ops.push(Op::Cnot { c: l.face, t: l.anc_face, owner: src });
                    self.loc(Cnot, vec![l.face, l.anc_face], src, step);
                    self.ops.push(Op::Cnot { c: l.anc_edge, t: l.edge, owner: src });
                    self.loc(Cnot, vec![l.anc_edge, l.edge], src, step);
                    for q in [l.face, l.anc_face, l.anc_edge, l.edge] {
                        self.loc(Memory, vec![q], src, step);
                    }
                } else if l.slot + 2 == step {
                    let s = &mut self.schedule.steps[si];
                    s.measurements.push(l.anc_face);
                    s.measurements.push(l.anc_edge);
                    self.loc(Measure, vec![l.anc_face], src, step);
                    self.ops.push(Op::MeasZ { q: l.anc_face, fix: [l.anc_edge, l.edge], owner: src });
                    self.loc(Measure, vec![l.anc_edge], src, step);
                    self.ops.push(Op::MeasX { q: l.anc_edge, fix: l.face, owner: src });
                }
            }
        }
        for q in 0..self.faces.len() + self.edges.len() {
            self.sources.push(Source::Type3 { qubit: q });
            let src = self.sources.len() - 1;
            self.loc(LocationKind::Measure, vec![q], src, STEPS + 1);
        }
    }

    /// Runs the frame from op `start` to the end, or only through ops owned
    /// by `owner`.
    fn propagate(&self, start: usize, frame: &mut [(bool, bool)], owner: Option<usize>) {
        for op in &self.ops[start..] {
            if owner.is_some() && op.owner() != owner {
                continue;
            }
            match *op {
                Op::Loc(_) => {}
                Op::Cnot { c, t, .. } => {
                    frame[t].0 ^= frame[c].0;
                    frame[c].1 ^= frame[t].1;
                }
                Op::MeasZ { q, fix, .. } => {
                    if frame[q].0 {
                        frame[fix[0]].0 ^= true;
                        frame[fix[1]].0 ^= true;
                    }
                    frame[q] = (false, false);
                }
                Op::MeasX { q, fix, .. } => {
                    if frame[q].1 {
                        frame[fix].1 ^= true;
                    }
                    frame[q] = (false, false);
                }
            }
        }
    }

    /// Whether a frame anticommutes with the cell stabilizer (X on each
    /// cell face).
    pub fn stabilizer_flipped(&self, frame: &[(bool, bool)]) -> bool {
        self.cell_faces.iter().fold(false, |acc, &f| acc ^ frame[f].1)
    }

    /// Injects one single-qubit Pauli at a location and reports whether the
    /// cell stabilizer ends up flipped.
    pub fn inject(&self, loc: usize, qubit: Qubit, x: bool, z: bool) -> bool {
        let mut frame = vec![(false, false); self.n_qubits];
        frame[qubit] = (x, z);
        self.propagate(self.locations[loc].pos, &mut frame, None);
        self.stabilizer_flipped(&frame)
    }

    fn compute_flips(&mut self) {
        for i in 0..self.locations.len() {
            let flips = self.locations[i]
                .qubits
                .iter()
                .map(|&q| [self.inject(i, q, true, false), self.inject(i, q, false, true)])
                .collect();
            self.locations[i].flips = flips;
        }
    }

    /// Every Pauli outcome of a location with its stabilizer flip.
    pub fn outcomes(&self, loc: usize) -> Vec<bool> {
        let l = &self.locations[loc];
        let flip = |k: usize, p: u8| {
            let (x, z) = (p == 1 || p == 2, p == 2 || p == 3);
            (x && l.flips[k][0]) ^ (z && l.flips[k][1])
        };
        match l.qubits.len() {
            1 => (1..4).map(|p| flip(0, p)).collect(),
            _ => (1..16u8).map(|p| flip(0, p / 4) ^ flip(1, p % 4)).collect(),
        }
    }

    /// Exact first-order flip probability summed over every location.
    pub fn total_flip_weight(&self) -> Linear {
        let mut total = Linear::zero();
        for (i, l) in self.locations.iter().enumerate() {
            let n = self.outcomes(i).iter().filter(|&&b| b).count() as i64;
            total = total + l.kind.weight().scale(Q::new(n, 1));
        }
        total
    }

    /// Flip probability of each source, first order.
    pub fn source_flip_weights(&self) -> Vec<Linear> {
        let mut w = vec![Linear::zero(); self.sources.len()];
        for (i, l) in self.locations.iter().enumerate() {
            let n = self.outcomes(i).iter().filter(|&&b| b).count() as i64;
            w[l.source] = w[l.source] + l.kind.weight().scale(Q::new(n, 1));
        }
        w
    }

    /// Hop distance of a source from the cell faces.
    pub fn source_hops(&self, s: usize) -> u32 {
        match self.sources[s] {
            Source::Type1 { face, edge } => self.hops[face].min(self.hops[edge]),
            Source::Type2 { link } => {
                let l = self.links[link];
                self.hops[l.face].min(self.hops[l.edge])
            }
            Source::Type3 { qubit } => self.hops[qubit],
        }
    }

    /// Classes of (Z on face, Z on edge) produced by one link's own
    /// locations, propagated through that link's gadget only.
    pub fn link_classes(&self, link: usize) -> LinkClasses {
        let l = self.links[link];
        let src = self
            .sources
            .iter()
            .position(|s| *s == Source::Type2 { link })
            .expect("every link is a source");
        let mut out = LinkClasses {
            zi: Linear::zero(),
            iz: Linear::zero(),
            zz: Linear::zero(),
        };
        for loc in self.locations.iter().filter(|x| x.source == src) {
            let paulis: Vec<Vec<u8>> = match loc.qubits.len() {
                1 => (1..4).map(|p| vec![p]).collect(),
                _ => (1..16u8).map(|p| vec![p / 4, p % 4]).collect(),
            };
            for ps in paulis {
                let mut frame = vec![(false, false); self.n_qubits];
                for (&q, &p) in loc.qubits.iter().zip(&ps) {
                    frame[q] = (p == 1 || p == 2, p == 2 || p == 3);
                }
                self.propagate(loc.pos, &mut frame, Some(src));
                let w = loc.kind.weight();
                match (frame[l.face].1, frame[l.edge].1) {
                    (true, false) => out.zi = out.zi + w,
                    (false, true) => out.iz = out.iz + w,
                    (true, true) => out.zz = out.zz + w,
                    _ => {}
                }
            }
        }
        out
    }

    /// Z on the face of a first Bell pair: exactly one half picks up a Z,
    /// since Z⊗Z stabilizes the pair.
    pub fn type1_class(&self, source: usize) -> Linear {
        let mut total = Linear::zero();
        for loc in self.locations.iter().filter(|x| x.source == source) {
            let (n, z_on): (i64, Box<dyn Fn(u8) -> bool>) = match loc.qubits.len() {
                1 => (1, Box::new(|p| p == 2 || p == 3)),
                _ => (
                    2,
                    Box::new(|p| {
                        let z = |s: u8| s == 2 || s == 3;
                        z(p / 4) ^ z(p % 4)
                    }),
                ),
            };
            let range: Vec<u8> = if n == 1 { (1..4).collect() } else { (1..16).collect() };
            let k = range.into_iter().filter(|&p| z_on(p)).count() as i64;
            total = total + loc.kind.weight().scale(Q::new(k, 1));
        }
        total
    }

    /// Links whose face is a cell face.
    pub fn in_cell_links(&self) -> Vec<usize> {
        (0..self.links.len())
            .filter(|&l| self.cell_faces.contains(&self.links[l].face))
            .collect()
    }

    /// Links from outside faces onto cell edges.
    pub fn neighbor_links(&self) -> Vec<usize> {
        (0..self.links.len())
            .filter(|&l| {
                let k = self.links[l];
                !self.cell_faces.contains(&k.face) && self.cell_edges.contains(&k.edge)
            })
            .collect()
    }

    /// Cell faces that a Z on the link's edge reaches through later links.
    pub fn edge_error_reach(&self, link: usize) -> usize {
        let l = self.links[link];
        self.links
            .iter()
            .filter(|m| m.edge == l.edge && m.slot > l.slot && self.cell_faces.contains(&m.face))
            .count()
    }

    pub fn census(&self) -> super::Census {
        super::Census {
            type1_faces: self
                .sources
                .iter()
                .filter(|s| matches!(s, Source::Type1 { face, .. } if self.cell_faces.contains(face)))
                .count() as u32,
            in_cell_links: self.in_cell_links().len() as u32,
            neighbor_links_odd: self
                .neighbor_links()
                .into_iter()
                .filter(|&l| self.edge_error_reach(l) % 2 == 1)
                .count() as u32,
            measured_faces: self.cell_faces.len() as u32,
        }
    }

    /// Qubit of a face or edge.
    pub fn face_qubit(&self, f: Face) -> Option<Qubit> {
        self.faces.iter().position(|g| *g == f)
    }

    pub fn edge_qubit(&self, e: Edge) -> Option<Qubit> {
        self.edges.iter().position(|g| *g == e).map(|i| self.faces.len() + i)
    }
}
