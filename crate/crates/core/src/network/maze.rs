use std::collections::{BTreeMap, VecDeque};

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::devices::HpParams;
use crate::error::{Error, Result};
use crate::network::graph::{CircuitGraph, Edge, EdgeRole};
use crate::network::dynamics::{simulate_network, MeshSolver, NetworkDrive};
use crate::scalar::Scalar;
use crate::sim::IntegratorSpec;

pub type Cell = (usize, usize);

/// Rectangular grid of open cells and walls with an entrance and an exit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MazeSpec {
    open: Vec<Vec<bool>>,
    entrance: Cell,
    exit: Cell,
}

const STEPS: [(isize, isize); 4] = [(0, 1), (1, 0), (0, -1), (-1, 0)];

impl MazeSpec {
    pub fn new(open: Vec<Vec<bool>>, entrance: Cell, exit: Cell) -> Result<Self> {
        let rows = open.len();
        let cols = open.first().map_or(0, Vec::len);
        if rows == 0 || cols == 0 || open.iter().any(|r| r.len() != cols) {
            return Err(Error::invalid("maze", "grid must be a non-empty rectangle"));
        }
        let m = MazeSpec { open, entrance, exit };
        if entrance == exit {
            return Err(Error::invalid("maze", "entrance and exit coincide"));
        }
        if !m.is_open(entrance) || !m.is_open(exit) {
            return Err(Error::invalid("maze", "entrance and exit must be open cells"));
        }
        if !m.distances(entrance).contains_key(&exit) {
            return Err(Error::NoPath);
        }
        Ok(m)
    }

    /// `#` wall, `.` open, `S` entrance, `E` exit; one line per row.
    pub fn parse(text: &str) -> Result<Self> {
        let mut open = Vec::new();
        let (mut entrance, mut exit) = (None, None);
        for (r, line) in text.lines().map(str::trim_end).filter(|l| !l.is_empty()).enumerate() {
            let mut row = Vec::new();
            for (c, ch) in line.chars().enumerate() {
                match ch {
                    '#' => row.push(false),
                    '.' => row.push(true),
                    'S' if entrance.is_none() => {
                        entrance = Some((r, c));
                        row.push(true);
                    }
                    'E' if exit.is_none() => {
                        exit = Some((r, c));
                        row.push(true);
                    }
                    'S' | 'E' => return Err(Error::Parse(format!("row {}: duplicate `{ch}`", r + 1))),
                    other => return Err(Error::Parse(format!("row {}: unexpected character `{other}`", r + 1))),
                }
            }
            open.push(row);
        }
        let entrance = entrance.ok_or_else(|| Error::Parse("no entrance `S`".into()))?;
        let exit = exit.ok_or_else(|| Error::Parse("no exit `E`".into()))?;
        Self::new(open, entrance, exit)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (r, row) in self.open.iter().enumerate() {
            for (c, &o) in row.iter().enumerate() {
                s.push(match ((r, c), o) {
                    (p, _) if p == self.entrance => 'S',
                    (p, _) if p == self.exit => 'E',
                    (_, true) => '.',
                    (_, false) => '#',
                });
            }
            s.push('\n');
        }
        s
    }

    pub fn rows(&self) -> usize {
        self.open.len()
    }

    pub fn cols(&self) -> usize {
        self.open[0].len()
    }

    pub fn entrance(&self) -> Cell {
        self.entrance
    }

    pub fn exit(&self) -> Cell {
        self.exit
    }

    pub fn is_open(&self, (r, c): Cell) -> bool {
        self.open.get(r).and_then(|row| row.get(c)).copied().unwrap_or(false)
    }

    fn neighbours(&self, (r, c): Cell) -> impl Iterator<Item = Cell> + '_ {
        STEPS.iter().filter_map(move |&(dr, dc)| {
            let n = (r.checked_add_signed(dr)?, c.checked_add_signed(dc)?);
            self.is_open(n).then_some(n)
        })
    }

    fn distances(&self, from: Cell) -> BTreeMap<Cell, usize> {
        let mut d = BTreeMap::from([(from, 0)]);
        let mut q = VecDeque::from([from]);
        while let Some(u) = q.pop_front() {
            let du = d[&u];
            for v in self.neighbours(u) {
                if let std::collections::btree_map::Entry::Vacant(e) = d.entry(v) {
                    e.insert(du + 1);
                    q.push_back(v);
                }
            }
        }
        d
    }

    /// Breadth-first shortest path from entrance to exit, as a cell sequence.
    pub fn shortest_path(&self) -> Vec<Cell> {
        let d = self.distances(self.exit);
        let mut path = vec![self.entrance];
        let mut u = self.entrance;
        while u != self.exit {
            u = self.neighbours(u).find(|v| d.get(v) == Some(&(d[&u] - 1))).expect("exit reachable");
            path.push(u);
        }
        path
    }

    /// Number of distinct shortest entrance-exit paths (saturating).
    pub fn shortest_path_count(&self) -> u64 {
        let d = self.distances(self.entrance);
        let mut order: Vec<(&Cell, &usize)> = d.iter().collect();
        order.sort_by_key(|&(_, &k)| k);
        let mut count: BTreeMap<Cell, u64> = BTreeMap::from([(self.entrance, 1)]);
        for (&c, &k) in order.into_iter().skip(1) {
            let n = self
                .neighbours(c)
                .filter(|p| d.get(p) == Some(&(k.wrapping_sub(1))))
                .fold(0u64, |a, p| a.saturating_add(count[&p]));
            count.insert(c, n);
        }
        count[&self.exit]
    }
}

/// Perfect maze on a `cells_r x cells_c` cell lattice (rendered on a
/// `(2 cells_r - 1) x (2 cells_c - 1)` grid) with `extra` further walls
/// knocked out; entrance top-left, exit bottom-right.
pub fn random_maze<R: Rng>(cells_r: usize, cells_c: usize, extra: usize, rng: &mut R) -> Result<MazeSpec> {
    if cells_r == 0 || cells_c == 0 || cells_r * cells_c < 2 {
        return Err(Error::invalid("maze", "need at least two cells"));
    }
    let (rows, cols) = (2 * cells_r - 1, 2 * cells_c - 1);
    let mut open = vec![vec![false; cols]; rows];
    let mut seen = vec![vec![false; cells_c]; cells_r];
    let mut stack = vec![(0usize, 0usize)];
    seen[0][0] = true;
    open[0][0] = true;
    while let Some(&(r, c)) = stack.last() {
        let next: Vec<Cell> = STEPS
            .iter()
            .filter_map(|&(dr, dc)| Some((r.checked_add_signed(dr)?, c.checked_add_signed(dc)?)))
            .filter(|&(nr, nc)| nr < cells_r && nc < cells_c && !seen[nr][nc])
            .collect();
        match next.choose(rng) {
            None => {
                stack.pop();
            }
            Some(&(nr, nc)) => {
                open[r + nr][c + nc] = true;
                open[2 * nr][2 * nc] = true;
                seen[nr][nc] = true;
                stack.push((nr, nc));
            }
        }
    }
    let mut walls: Vec<Cell> =
        (0..rows).flat_map(|r| (0..cols).map(move |c| (r, c))).filter(|&(r, c)| !open[r][c] && (r % 2) != (c % 2)).collect();
    walls.shuffle(rng);
    for &(r, c) in walls.iter().take(extra) {
        open[r][c] = true;
    }
    MazeSpec::new(open, (0, 0), (rows - 1, cols - 1))
}

/// Random maze with `cells_r, cells_c` in `[3, max_cells]` and one to four
/// extra openings, redrawn until the shortest entrance-exit path is unique.
pub fn random_unique_maze<R: Rng>(max_cells: usize, rng: &mut R) -> Result<MazeSpec> {
    if max_cells < 3 {
        return Err(Error::invalid("max_cells", "must be >= 3"));
    }
    for _ in 0..10_000 {
        let r = rng.random_range(3..=max_cells);
        let c = rng.random_range(3..=max_cells);
        let m = random_maze(r, c, rng.random_range(1..=4), rng)?;
        if m.shortest_path_count() == 1 {
            return Ok(m);
        }
    }
    Err(Error::invalid("maze", "no maze with a unique shortest path after 10000 draws"))
}

/// Circuit built from a maze: one node per open cell, one memristor per pair
/// of adjacent open cells, one DC source from exit to entrance.
#[derive(Debug, Clone)]
pub struct MazeCircuit<T> {
    pub graph: CircuitGraph<T>,
    pub cells: Vec<Cell>,
    /// Cell pair of each memristive edge, in graph order.
    pub edge_cells: Vec<(Cell, Cell)>,
    pub source_edge: usize,
}

pub fn maze_to_circuit<T: Scalar>(m: &MazeSpec, v_dc: T) -> Result<MazeCircuit<T>> {
    if !v_dc.is_finite_val() || v_dc == T::zero() {
        return Err(Error::invalid("v_dc", "must be finite and non-zero"));
    }
    let cells: Vec<Cell> =
        (0..m.rows()).flat_map(|r| (0..m.cols()).map(move |c| (r, c))).filter(|&c| m.is_open(c)).collect();
    let index: BTreeMap<Cell, usize> = cells.iter().enumerate().map(|(k, &c)| (c, k)).collect();
    let mut edges = Vec::new();
    let mut edge_cells = Vec::new();
    for &(r, c) in &cells {
        for n in [(r, c + 1), (r + 1, c)] {
            if let Some(&j) = index.get(&n) {
                edges.push(Edge { tail: index[&(r, c)], head: j, role: EdgeRole::Memristor { w0: T::one() } });
                edge_cells.push(((r, c), n));
            }
        }
    }
    let source_edge = edges.len();
    edges.push(Edge { tail: index[&m.exit()], head: index[&m.entrance()], role: EdgeRole::Source { volts: v_dc } });
    // unreachable pockets are dropped by keeping only the entrance component
    let reach = m.distances(m.entrance());
    if reach.len() != cells.len() {
        return maze_to_circuit(&m.restricted(&reach), v_dc);
    }
    Ok(MazeCircuit { graph: CircuitGraph::new(cells.len(), edges)?, cells, edge_cells, source_edge })
}

impl MazeSpec {
    fn restricted(&self, keep: &BTreeMap<Cell, usize>) -> MazeSpec {
        let open = (0..self.rows()).map(|r| (0..self.cols()).map(|c| keep.contains_key(&(r, c))).collect()).collect();
        MazeSpec { open, entrance: self.entrance, exit: self.exit }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound(deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct MazeConfig<T> {
    /// Device parameters; `alpha` is replaced by `kappa * max|i0| / beta`.
    pub hp: HpParams<T>,
    pub v_dc: T,
    /// Drift strength relative to the largest initial edge current.
    pub kappa: T,
    /// Edges carrying at least this fraction of the largest current form the path.
    pub threshold: T,
    pub integrator: IntegratorSpec<T>,
    pub steady_tol: T,
}

impl MazeConfig<f64> {
    pub fn preset() -> Self {
        MazeConfig {
            hp: HpParams { alpha: 0.0, beta: 1.0, r_on: 1.0, r_off: 100.0, polarity: Default::default() },
            v_dc: 1.0,
            kappa: 0.5,
            threshold: 0.5,
            integrator: IntegratorSpec::euler(0.05, 4000.0),
            steady_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone)]
pub struct MazeSolution<T> {
    /// Path cells from entrance to exit.
    pub path: Vec<Cell>,
    /// Memristive edge indices along the path, entrance first.
    pub path_edges: Vec<usize>,
    /// Smallest on-path current over largest off-path current (infinite when
    /// every edge is on the path).
    pub contrast: T,
    /// Final current magnitude per memristive edge.
    pub currents: Vec<T>,
    pub final_w: Vec<T>,
    pub steady_at: Option<T>,
    pub circuit: MazeCircuit<T>,
}

/// Drives the maze circuit to steady state and reads the path off the edge
/// currents.
///
/// All memories start at `w = 1`; each edge is oriented along its initial
/// current so current flow lowers its resistance.
pub fn solve_maze<T: Scalar>(m: &MazeSpec, cfg: &MazeConfig<T>) -> Result<MazeSolution<T>> {
    cfg.hp.validate()?;
    if !(cfg.threshold > T::zero() && cfg.threshold <= T::one()) {
        return Err(Error::invalid("threshold", "must lie in (0, 1]"));
    }
    if !(cfg.kappa >= T::zero()) {
        return Err(Error::invalid("kappa", "must be >= 0"));
    }
    let mut circuit = maze_to_circuit(m, cfg.v_dc)?;
    let mem = circuit.graph.memristor_edges();
    let e = mem.len();
    let zeros = vec![T::zero(); e];
    let i0 = MeshSolver::new(&circuit.graph).currents(&vec![T::one(); e], &zeros, &cfg.hp)?;
    for (slot, &k) in mem.iter().enumerate() {
        if i0[k] < T::zero() {
            circuit.graph.flip(k);
            let (a, b) = circuit.edge_cells[slot];
            circuit.edge_cells[slot] = (b, a);
        }
    }
    let imax = mem.iter().fold(T::zero(), |a, &k| a.max(i0[k].abs()));
    let mut hp = cfg.hp;
    hp.alpha = cfg.kappa * imax / hp.beta;
    let run = simulate_network(&circuit.graph, &NetworkDrive::none(e), &hp, &cfg.integrator, Some(cfg.steady_tol))?;
    let final_w = run.final_state().0;
    let i = MeshSolver::new(&circuit.graph).currents(&final_w, &zeros, &hp)?;
    let currents: Vec<T> = mem.iter().map(|&k| i[k].abs()).collect();
    let top = currents.iter().fold(T::zero(), |a, &x| a.max(x));
    let on: Vec<usize> = (0..e).filter(|&k| currents[k] >= cfg.threshold * top).collect();
    let (path, path_edges) = chain(m, &circuit.edge_cells, &on)?;
    let on_min = on.iter().fold(T::lit(f64::INFINITY), |a, &k| a.min(currents[k]));
    let off_max = (0..e).filter(|k| !on.contains(k)).fold(T::zero(), |a, k| a.max(currents[k]));
    let contrast = if off_max > T::zero() { on_min / off_max } else { T::lit(f64::INFINITY) };
    Ok(MazeSolution { path, path_edges, contrast, currents, final_w, steady_at: run.steady_at, circuit })
}

/// Orders the selected edges into a simple entrance-exit chain.
fn chain(m: &MazeSpec, edge_cells: &[(Cell, Cell)], on: &[usize]) -> Result<(Vec<Cell>, Vec<usize>)> {
    let mut by_cell: BTreeMap<Cell, Vec<usize>> = BTreeMap::new();
    for &k in on {
        let (a, b) = edge_cells[k];
        by_cell.entry(a).or_default().push(k);
        by_cell.entry(b).or_default().push(k);
    }
    let bad_degree: Vec<String> = by_cell
        .iter()
        .filter(|(c, ks)| {
            let want = if **c == m.entrance() || **c == m.exit() { 1 } else { 2 };
            ks.len() != want
        })
        .map(|(c, ks)| format!("{c:?} has degree {}", ks.len()))
        .collect();
    if !bad_degree.is_empty() || !by_cell.contains_key(&m.entrance()) {
        return Err(Error::AmbiguousPath(format!("{} edges above threshold; {}", on.len(), bad_degree.join(", "))));
    }
    let mut path = vec![m.entrance()];
    let mut edges = Vec::new();
    let mut u = m.entrance();
    while u != m.exit() {
        let k = by_cell[&u].iter().copied().find(|k| !edges.contains(k)).expect("degree checked");
        edges.push(k);
        let (a, b) = edge_cells[k];
        u = if a == u { b } else { a };
        path.push(u);
    }
    if edges.len() != on.len() {
        return Err(Error::AmbiguousPath(format!("{} edges above threshold form a chain plus a separate cycle", on.len())));
    }
    Ok((path, edges))
}
