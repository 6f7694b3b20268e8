//! Hand-built path initializations on which specific tables provably loop.
//!
//! A template is written in the symbols `a, v, p` (plus helpers `w, q`) with
//! primes for complements. Its predicate decides, per binding of the symbols,
//! whether the template applies to a table. Gadget nodes are padded with one
//! endpoint on each side, so "loops without visiting an endpoint" is the same as
//! "never leaves the gadget".

use rayon::prelude::*;
use serde::Serialize;

use crate::lowerbound::table::{TransitionTable1Bit, TABLE_COUNT};
use crate::lowerbound::walk::{time_to_endpoint, verify_loop, PathInit, Walk};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sym {
    A,
    Ap,
    V,
    Vp,
    W,
    Wp,
    P,
    Pp,
    Q,
    Qp,
    /// Any vertex bit; every choice is checked.
    Any,
}

/// Values of the template symbols.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Binding {
    pub a: bool,
    pub v: bool,
    pub w: bool,
    pub p: bool,
    pub q: bool,
}

impl Binding {
    pub fn all() -> impl Iterator<Item = Binding> {
        (0u8..32).map(|i| Binding {
            a: i & 1 != 0,
            v: i & 2 != 0,
            w: i & 4 != 0,
            p: i & 8 != 0,
            q: i & 16 != 0,
        })
    }

    pub fn eval(&self, s: Sym) -> Option<bool> {
        Some(match s {
            Sym::A => self.a,
            Sym::Ap => !self.a,
            Sym::V => self.v,
            Sym::Vp => !self.v,
            Sym::W => self.w,
            Sym::Wp => !self.w,
            Sym::P => self.p,
            Sym::Pp => !self.p,
            Sym::Q => self.q,
            Sym::Qp => !self.q,
            Sym::Any => return None,
        })
    }
}

/// One gadget node: vertex bit, port towards the left, port towards the right.
#[derive(Debug, Clone, Copy)]
pub struct GadgetNode {
    pub bit: Sym,
    pub left: Sym,
    pub right: Sym,
}

const fn node(bit: Sym, left: Sym, right: Sym) -> GadgetNode {
    GadgetNode { bit, left, right }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Expected {
    /// Every instance loops without reaching an endpoint.
    Loop,
    /// The walk coincides with a rotor walk (checked on all small paths).
    RotorEquivalent,
}

pub type Predicate = fn(&TransitionTable1Bit, &Binding) -> bool;

pub struct GadgetTemplate {
    pub name: &'static str,
    pub summary: &'static str,
    pub nodes: Vec<GadgetNode>,
    /// Start node (gadget index) and start state.
    pub starts: Vec<(usize, Sym)>,
    pub predicate: Predicate,
    pub expected: Expected,
}

/// A concrete gadget: the padded path and the verdict it must produce.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct GadgetSpec {
    pub template: &'static str,
    pub init: PathInit,
    pub expected: Expected,
    /// Gadget nodes as a range of path nodes; the walk must stay inside.
    pub region: (usize, usize),
}

fn r3(t: &TransitionTable1Bit, a: bool, v: bool) -> (bool, bool, bool) {
    t.r3(a, v)
}

fn r2(t: &TransitionTable1Bit, a: bool, v: bool) -> (bool, bool) {
    t.r2(a, v)
}

/// Full table given as `R3` of `(a,v), (a,v'), (a',v), (a',v')` in symbols.
fn is_table(t: &TransitionTable1Bit, b: &Binding, rows: [(Sym, Sym, Sym); 4]) -> bool {
    let inputs = [(b.a, b.v), (b.a, !b.v), (!b.a, b.v), (!b.a, !b.v)];
    inputs.iter().zip(rows).all(|(&(a, v), (x, y, z))| {
        r3(t, a, v) == (b.eval(x).unwrap(), b.eval(y).unwrap(), b.eval(z).unwrap())
    })
}

impl GadgetTemplate {
    /// Bindings under which the template applies to `table`.
    pub fn matches(&self, table: &TransitionTable1Bit) -> Vec<Binding> {
        Binding::all().filter(|b| (self.predicate)(table, b)).collect()
    }

    /// All concrete gadgets for one binding (free bits expanded).
    pub fn instantiate(&self, b: &Binding) -> Vec<GadgetSpec> {
        let k = self.nodes.len();
        let free: Vec<usize> = (0..k).filter(|&i| self.nodes[i].bit == Sym::Any).collect();
        let mut orientation = Vec::with_capacity(k);
        for nd in &self.nodes {
            let left = b.eval(nd.left).expect("ports are bound");
            let right = b.eval(nd.right).expect("ports are bound");
            assert_ne!(left, right, "template {} has a node with equal ports", self.name);
            // Port bit 0 is port 1; orientation is true iff port 1 leads left.
            orientation.push(!left);
        }
        let mut out = Vec::new();
        for mask in 0u32..(1 << free.len()) {
            let mut bits = vec![false; k + 2];
            for (i, nd) in self.nodes.iter().enumerate() {
                bits[i + 1] = match b.eval(nd.bit) {
                    Some(x) => x,
                    None => {
                        let j = free.iter().position(|&f| f == i).unwrap();
                        mask >> j & 1 == 1
                    }
                };
            }
            for &(s, state) in &self.starts {
                out.push(GadgetSpec {
                    template: self.name,
                    init: PathInit {
                        bits: bits.clone(),
                        orientation: orientation.clone(),
                        start: s + 1,
                        state: b.eval(state).expect("start state is bound"),
                    },
                    expected: self.expected,
                    region: (1, k),
                });
            }
        }
        out
    }

    /// Distinct concrete gadgets over every matching binding.
    pub fn instances(&self, table: &TransitionTable1Bit) -> Vec<GadgetSpec> {
        let mut out: Vec<GadgetSpec> = Vec::new();
        for b in self.matches(table) {
            for g in self.instantiate(&b) {
                if !out.contains(&g) {
                    out.push(g);
                }
            }
        }
        out
    }
}

/// Checks one gadget under the generic engine.
pub fn check_gadget(table: &TransitionTable1Bit, g: &GadgetSpec) -> Result<(), String> {
    match g.expected {
        Expected::Loop => verify_loop(table, &g.init).map(|_| ()),
        Expected::RotorEquivalent => rotor_equivalent(table, g.init.state, 7).map(|_| ()),
    }
}

/// Compares the walk of `table` from state `state` with a rotor walk on every
/// path of 3..=`max_n` nodes, every bit/orientation pattern and every internal start.
///
/// The rotor at each node initially points where the table would send the agent on
/// its first visit, and alternates afterwards. Returns the number of walks compared.
pub fn rotor_equivalent(table: &TransitionTable1Bit, state: bool, max_n: usize) -> Result<u64, String> {
    let mut compared = 0;
    for n in 3..=max_n {
        let budget = (10 * n * n) as u64;
        for bits in 0u32..(1 << (n - 2)) {
            for orient in 0u32..(1 << (n - 2)) {
                for start in 1..n - 1 {
                    let init = PathInit {
                        bits: (0..n).map(|i| i > 0 && i < n - 1 && bits >> (i - 1) & 1 == 1).collect(),
                        orientation: (0..n - 2).map(|i| orient >> i & 1 == 1).collect(),
                        start,
                        state,
                    };
                    let table_walk = positions(table, &init, budget)?;
                    let rotor_walk = rotor_positions(table, &init, budget);
                    if table_walk != rotor_walk {
                        return Err(format!("walk differs from rotor on {init}"));
                    }
                    compared += 1;
                }
            }
        }
    }
    Ok(compared)
}

fn positions(table: &TransitionTable1Bit, init: &PathInit, budget: u64) -> Result<Vec<usize>, String> {
    use crate::algorithms::EndpointBehavior;
    use crate::engine::Stop;
    let out = crate::lowerbound::walk::engine_run(
        table,
        EndpointBehavior::from_table(table),
        init,
        Stop::FirstEndpointVisited,
        budget,
        true,
    );
    let trace = out.trace.expect("trace requested");
    let mut pos = vec![init.start];
    pos.extend(trace.iter().filter(|r| r.out_port.is_some()).map(|r| {
        let p = init.path().unwrap();
        p.tree().neighbor(r.position, r.out_port.unwrap()).unwrap()
    }));
    Ok(pos)
}

/// Direction-based rotor walk: each node flips its direction after every exit.
fn rotor_positions(table: &TransitionTable1Bit, init: &PathInit, budget: u64) -> Vec<usize> {
    let n = init.n();
    // true = next exit goes left
    let mut dir: Vec<bool> = (0..n)
        .map(|i| {
            if i == 0 || i == n - 1 {
                return false;
            }
            let p = table.port(init.state, init.bits[i]);
            p ^ init.orientation[i - 1]
        })
        .collect();
    let mut pos = init.start;
    let mut out = vec![pos];
    for _ in 0..budget {
        if pos == 0 || pos == n - 1 {
            break;
        }
        let left = dir[pos];
        dir[pos] = !left;
        pos = if left { pos - 1 } else { pos + 1 };
        out.push(pos);
    }
    out
}

/// The gadget catalogue.
pub fn gadget_suite() -> Vec<GadgetTemplate> {
    use Sym::*;
    let t = |name, summary, nodes: Vec<GadgetNode>, starts: Vec<(usize, Sym)>, predicate: Predicate| GadgetTemplate {
        name,
        summary,
        nodes,
        starts,
        predicate,
        expected: Expected::Loop,
    };
    let four_outer = vec![node(V, Pp, P), node(V, P, Pp), node(V, Pp, P), node(V, P, Pp)];
    let with_head = |head: GadgetNode| {
        let mut v = vec![head];
        v.extend(four_outer.iter().copied());
        v
    };
    let head_vp = with_head(node(Vp, P, Pp));
    let head_v = with_head(node(V, Pp, P));
    let z_ports = [(P, Pp), (P, Pp), (P, Pp), (Pp, P), (Pp, P), (Pp, P)];
    let z_path = |bits: [Sym; 6]| -> Vec<GadgetNode> {
        bits.iter().zip(z_ports).map(|(&b, (l, r))| node(b, l, r)).collect()
    };
    // The last node's bit is printed complemented in the catalogue; with it the
    // agent walks out. Outer bits equal, inner bits free is what traps it.
    let four_a = vec![node(V, Pp, P), node(Vp, P, Pp), node(V, Pp, P), node(V, P, Pp)];
    let four_b = vec![node(Vp, P, Pp), node(Vp, Pp, P), node(V, P, Pp), node(Vp, Pp, P)];
    let prepend = |head: GadgetNode, rest: &[GadgetNode]| {
        let mut v = vec![head];
        v.extend_from_slice(rest);
        v
    };

    vec![
        t(
            "fixed-point/a",
            "R2(a,v) = (a,v): two nodes with bit v bounce the agent between them",
            vec![node(V, Pp, P), node(V, P, Pp)],
            vec![(0, A)],
            |t, b| r2(t, b.a, b.v) == (b.a, b.v) && t.port(b.a, b.v) == b.p,
        ),
        t(
            "fixed-point/a'",
            "R2(a,v) = (a,v) entered from a' via a node w with A(a',w) = a",
            vec![node(W, Qp, Q), node(V, Pp, P), node(V, P, Pp)],
            vec![(0, Ap)],
            |t, b| {
                r2(t, b.a, b.v) == (b.a, b.v)
                    && t.port(b.a, b.v) == b.p
                    && t.agent(!b.a, b.w) == b.a
                    && t.port(!b.a, b.w) == b.q
            },
        ),
        t(
            "vertex-constant/same",
            "R2(a,v) = (a',v), A(a',*) = a, V(a',v) = v",
            vec![node(V, Pp, P), node(V, Q, Qp)],
            vec![(0, A)],
            |t, b| {
                r2(t, b.a, b.v) == (!b.a, b.v)
                    && t.agent(!b.a, b.v) == b.a
                    && t.agent(!b.a, !b.v) == b.a
                    && t.vertex(!b.a, b.v) == b.v
                    && t.port(b.a, b.v) == b.p
                    && t.port(!b.a, b.v) == b.q
            },
        ),
        t(
            "vertex-constant/flip",
            "R2(a,v) = (a',v), A(a',*) = a, V(a',v) = v'",
            vec![node(V, Pp, P), node(Vp, P, Pp), node(V, P, Pp)],
            vec![(0, A)],
            |t, b| {
                r2(t, b.a, b.v) == (!b.a, b.v)
                    && t.agent(!b.a, b.v) == b.a
                    && t.agent(!b.a, !b.v) == b.a
                    && t.vertex(!b.a, b.v) == !b.v
                    && t.port(b.a, b.v) == b.p
            },
        ),
        t(
            "swap-pair",
            "R3(a,v) = (a',v,p) and R3(a',v) = (a,v,q): both states keep bit v",
            vec![node(V, Pp, P), node(V, Q, Qp)],
            vec![(0, A), (1, Ap)],
            |t, b| r3(t, b.a, b.v) == (!b.a, b.v, b.p) && r3(t, !b.a, b.v) == (b.a, b.v, b.q),
        ),
        t(
            "one-port-state",
            "P(a,*) = p and every p' move from a' lands in a",
            vec![node(Any, Pp, P), node(Any, Pp, P), node(Any, P, Pp), node(Any, P, Pp)],
            vec![(0, A), (1, A), (1, Ap), (2, A), (2, Ap), (3, A)],
            |t, b| {
                t.port(b.a, b.v) == b.p
                    && t.port(b.a, !b.v) == b.p
                    && [false, true].iter().all(|&x| t.port(!b.a, x) == b.p || t.agent(!b.a, x) == b.a)
            },
        ),
        t(
            "vertex-keep/two-ports",
            "R2(a,v) = (a',v), R2(a',v) = (a',v'), A(a',v') = a, P(a',v) != P(a',v')",
            vec![node(V, Pp, P), node(Any, Qp, Q), node(Any, Q, Qp), node(V, P, Pp)],
            vec![(0, A), (3, A), (1, Ap), (2, Ap)],
            |t, b| {
                r2(t, b.a, b.v) == (!b.a, b.v)
                    && r2(t, !b.a, b.v) == (!b.a, !b.v)
                    && t.agent(!b.a, !b.v) == b.a
                    && t.port(b.a, b.v) == b.p
                    && t.port(!b.a, b.v) == b.q
                    && t.port(!b.a, !b.v) == !b.q
            },
        ),
        t(
            "agent-ports/a",
            "ports follow the agent bit; a keeps bit v",
            vec![node(V, Pp, P), node(Vp, Pp, P)],
            vec![(0, A)],
            |t, b| is_table(t, b, [(Ap, V, P), (A, V, P), (Ap, Vp, Pp), (A, Vp, Pp)]),
        ),
        t(
            "agent-ports/a'",
            "ports follow the agent bit; a keeps bit v",
            vec![node(Vp, P, Pp), node(V, P, Pp)],
            vec![(0, Ap)],
            |t, b| is_table(t, b, [(Ap, V, P), (A, V, P), (Ap, Vp, Pp), (A, Vp, Pp)]),
        ),
        t(
            "vertex-keep/p/a",
            "a keeps bit v, a' flips v and exits p', P(a,v') = p",
            four_outer.clone(),
            vec![(0, A)],
            |t, b| is_table(t, b, [(Ap, V, P), (A, V, P), (Ap, Vp, Pp), (A, V, Pp)]),
        ),
        t(
            "vertex-keep/p/a'",
            "a keeps bit v, a' flips v and exits p', P(a,v') = p",
            head_vp,
            vec![(0, Ap)],
            |t, b| is_table(t, b, [(Ap, V, P), (A, V, P), (Ap, Vp, Pp), (A, V, Pp)]),
        ),
        t(
            "vertex-keep/p'/a'",
            "a keeps bit v, a' flips v and exits p, P(a,v') = p'",
            four_outer.clone(),
            vec![(0, Ap)],
            |t, b| is_table(t, b, [(Ap, V, P), (A, V, Pp), (Ap, Vp, P), (A, V, P)]),
        ),
        t(
            "vertex-keep/p'/a",
            "a keeps bit v, a' flips v and exits p, P(a,v') = p'",
            head_v,
            vec![(0, A)],
            |t, b| is_table(t, b, [(Ap, V, P), (A, V, Pp), (Ap, Vp, P), (A, V, P)]),
        ),
        t(
            "invariant-four",
            "R2(a,v) = (a',v), R2(a',v) = (a,v'), R2(a',v') = (a',v), V(a,v') = v, not both a' ports p'",
            vec![node(V, Pp, P), node(V, Qp, Q), node(V, Q, Qp), node(V, P, Pp)],
            vec![(0, A), (3, A), (1, Ap), (2, Ap)],
            |t, b| {
                r2(t, b.a, b.v) == (!b.a, b.v)
                    && r2(t, !b.a, b.v) == (b.a, !b.v)
                    && r2(t, !b.a, !b.v) == (!b.a, b.v)
                    && t.vertex(b.a, !b.v) == b.v
                    && !(t.port(!b.a, b.v) == !b.p && t.port(!b.a, !b.v) == !b.p)
                    && t.port(b.a, b.v) == b.p
                    && t.port(!b.a, !b.v) == b.q
            },
        ),
        t(
            "algorithm-q/a",
            "table Q from a, found by exhaustive search",
            vec![node(V, Pp, P), node(V, P, Pp), node(Vp, Pp, P), node(V, P, Pp)],
            vec![(0, A)],
            |t, b| is_table(t, b, [(Ap, V, P), (A, V, P), (A, Vp, Pp), (Ap, V, Pp)]),
        ),
        t(
            "algorithm-q/a'",
            "table Q from a', found by exhaustive search",
            vec![node(V, Pp, P), node(V, P, Pp), node(V, Pp, P), node(V, Pp, P), node(V, Pp, P)],
            vec![(1, Ap)],
            |t, b| is_table(t, b, [(Ap, V, P), (A, V, P), (A, Vp, Pp), (Ap, V, Pp)]),
        ),
        t(
            "algorithm-z/a'",
            "table Z, six-node path from a'",
            z_path([V, Vp, V, Vp, Vp, V]),
            vec![(0, Ap)],
            |t, b| is_table(t, b, [(Ap, Vp, P), (Ap, V, Pp), (Ap, Vp, Pp), (A, V, P)]),
        ),
        t(
            "algorithm-z/a",
            "table Z, six-node path from a",
            z_path([Vp, V, V, Vp, Vp, V]),
            vec![(0, A)],
            |t, b| is_table(t, b, [(Ap, Vp, P), (Ap, V, Pp), (Ap, Vp, Pp), (A, V, P)]),
        ),
        t(
            "state-ports/barrier",
            "P(a,*) = p, P(a',*) = p', A(a',*) = a: two p' moves in a row are impossible",
            vec![
                node(V, Pp, P),
                node(V, Pp, P),
                node(Any, Pp, P),
                node(Any, P, Pp),
                node(Any, Pp, P),
                node(Any, P, Pp),
                node(V, P, Pp),
                node(V, P, Pp),
            ],
            vec![(3, A), (3, Ap), (4, A), (4, Ap)],
            |t, b| {
                [false, true].iter().all(|&x| {
                    t.port(b.a, x) == b.p && t.port(!b.a, x) == !b.p && t.agent(!b.a, x) == b.a
                })
            },
        ),
        t(
            "catalogue-4a/a",
            "catalogue entry 4A from a",
            four_a.clone(),
            vec![(0, A)],
            |t, b| is_table(t, b, [(Ap, V, P), (Ap, Vp, Pp), (A, Vp, P), (Ap, V, Pp)]),
        ),
        t(
            "catalogue-4a/a'",
            "catalogue entry 4A from a'",
            prepend(node(V, Pp, P), &four_a),
            vec![(0, Ap)],
            |t, b| is_table(t, b, [(Ap, V, P), (Ap, Vp, Pp), (A, Vp, P), (Ap, V, Pp)]),
        ),
        t(
            "catalogue-4b/a",
            "catalogue entry 4B from a",
            four_b.clone(),
            vec![(0, A)],
            |t, b| is_table(t, b, [(Ap, V, P), (Ap, Vp, Pp), (A, Vp, Pp), (Ap, V, P)]),
        ),
        t(
            "catalogue-4b/a'",
            "catalogue entry 4B from a'",
            prepend(node(V, P, Pp), &four_b),
            vec![(0, Ap)],
            |t, b| is_table(t, b, [(Ap, V, P), (Ap, Vp, Pp), (A, Vp, Pp), (Ap, V, P)]),
        ),
        t(
            "catalogue-12/a",
            "catalogue entry 12 from a",
            vec![node(Vp, P, Pp), node(Vp, P, Pp)],
            vec![(0, A)],
            |t, b| is_table(t, b, [(A, Vp, P), (Ap, V, Pp), (A, Vp, Pp), (Ap, V, P)]),
        ),
        t(
            "catalogue-12/a'",
            "catalogue entry 12 from a'",
            vec![node(V, P, Pp), node(V, P, Pp)],
            vec![(0, Ap)],
            |t, b| is_table(t, b, [(A, Vp, P), (Ap, V, Pp), (A, Vp, Pp), (Ap, V, P)]),
        ),
        GadgetTemplate {
            name: "catalogue-9",
            summary: "catalogue entry 9: rotor walk once the agent is in a",
            nodes: vec![node(V, Pp, P)],
            starts: vec![(0, A)],
            predicate: |t, b| is_table(t, b, [(A, Vp, P), (A, V, Pp), (A, Vp, Pp), (Ap, V, P)]),
            expected: Expected::RotorEquivalent,
        },
        GadgetTemplate {
            name: "catalogue-11",
            summary: "catalogue entry 11: the agent bit never changes, the walk is a rotor walk",
            nodes: vec![node(V, Pp, P)],
            starts: vec![(0, A), (0, Ap)],
            predicate: |t, b| is_table(t, b, [(A, Vp, P), (A, V, Pp), (Ap, Vp, Pp), (Ap, V, P)]),
            expected: Expected::RotorEquivalent,
        },
    ]
}

/// Per-template outcome of running the catalogue over every table.
#[derive(Debug, Clone, Serialize)]
pub struct TemplateReport {
    pub name: &'static str,
    pub summary: &'static str,
    pub expected: Expected,
    pub matched_tables: usize,
    pub instances: usize,
    pub failures: usize,
    pub first_failures: Vec<String>,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct GadgetReport {
    pub templates: Vec<TemplateReport>,
    pub pass: bool,
}

/// Runs one template over all tables. Rotor-equivalence is checked once per
/// (table, start state) rather than per gadget.
pub fn check_template(tpl: &GadgetTemplate) -> TemplateReport {
    let mut matched = 0;
    let mut instances = 0;
    let mut failures = Vec::new();
    for id in 0..TABLE_COUNT {
        let table = TransitionTable1Bit::from_id(id).expect("id in range");
        let gadgets = tpl.instances(&table);
        if gadgets.is_empty() {
            continue;
        }
        matched += 1;
        let mut seen_states = Vec::new();
        for g in &gadgets {
            if g.expected == Expected::RotorEquivalent {
                if seen_states.contains(&g.init.state) {
                    continue;
                }
                seen_states.push(g.init.state);
            }
            instances += 1;
            if let Err(e) = check_gadget(&table, g) {
                failures.push(format!("table {id}: {} ({e})", g.init));
            }
        }
    }
    TemplateReport {
        name: tpl.name,
        summary: tpl.summary,
        expected: tpl.expected,
        matched_tables: matched,
        instances,
        failures: failures.len(),
        first_failures: failures.iter().take(5).cloned().collect(),
        pass: failures.is_empty() && matched > 0,
    }
}

pub fn gadget_report() -> GadgetReport {
    let templates: Vec<TemplateReport> = gadget_suite().par_iter().map(check_template).collect();
    let pass = templates.iter().all(|t| t.pass);
    GadgetReport { templates, pass }
}

/// First loop gadget (in catalogue order) that traps `table` from `state`,
/// confirmed with the packed walker.
pub fn first_loop_gadget(suite: &[GadgetTemplate], table: &TransitionTable1Bit, state: bool) -> Option<(&'static str, PathInit, u64)> {
    for tpl in suite.iter().filter(|t| t.expected == Expected::Loop) {
        for g in tpl.instances(table) {
            if g.init.state != state {
                continue;
            }
            let budget = 64 * g.init.n() as u64 * g.init.n() as u64 + 4096;
            if let Walk::Loop { period, .. } = time_to_endpoint(table, &g.init, budget) {
                return Some((tpl.name, g.init, period));
            }
        }
    }
    None
}
