//! Moore diagrams of restriction-closed sets, the nucleus, and DOT export.
//!
//! A Moore diagram has a vertex for each element `g` and, for each letter
//! `x`, an edge `g → g|_x` labelled `(x, g·x)`.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use rayon::prelude::*;

use crate::action::SelfSimilarAction;
use crate::alphabet::Letter;
use crate::closure::{CanonicalForm, Caps, ClosureMachine};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Edge {
    pub letter: Letter,
    pub output: Letter,
    pub target: usize,
}

impl Edge {
    pub fn is_stationary(&self) -> bool {
        self.letter == self.output
    }
}

/// A finite labelled graph on distinct group elements.
#[derive(Clone, Debug)]
pub struct MooreDiagram<E> {
    vertices: Vec<E>,
    names: Vec<String>,
    letters: Vec<String>,
    edges: Vec<Vec<Edge>>,
}

impl<E: Clone> MooreDiagram<E> {
    /// The diagram of a minimized closure; one vertex per class.
    pub fn from_closure<A>(action: &A, machine: &ClosureMachine<E>) -> Self
    where
        A: SelfSimilarAction<Element = E>,
    {
        let size = action.alphabet().size();
        MooreDiagram {
            vertices: machine.reps().to_vec(),
            names: machine
                .reps()
                .iter()
                .map(|g| action.format_element(g))
                .collect(),
            letters: action.alphabet().names().to_vec(),
            edges: (0..machine.len())
                .map(|c| {
                    (0..size)
                        .map(|x| Edge {
                            letter: x,
                            output: machine.output(c, x),
                            target: machine.target(c, x),
                        })
                        .collect()
                })
                .collect(),
        }
    }

    /// The induced subdiagram on `keep`, which must be closed under edges.
    pub fn restrict_to(&self, keep: &[usize]) -> Self {
        let index: HashMap<usize, usize> = keep.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        MooreDiagram {
            vertices: keep.iter().map(|&v| self.vertices[v].clone()).collect(),
            names: keep.iter().map(|&v| self.names[v].clone()).collect(),
            letters: self.letters.clone(),
            edges: keep
                .iter()
                .map(|&v| {
                    self.edges[v]
                        .iter()
                        .filter_map(|e| index.get(&e.target).map(|&t| Edge { target: t, ..*e }))
                        .collect()
                })
                .collect(),
        }
    }
}

impl<E> MooreDiagram<E> {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertices(&self) -> &[E] {
        &self.vertices
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn edges(&self, v: usize) -> &[Edge] {
        &self.edges[v]
    }

    pub fn edge_count(&self) -> usize {
        self.edges.iter().map(Vec::len).sum()
    }

    pub fn vertex_named(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    fn graph(&self) -> DiGraph<(), ()> {
        let mut g = DiGraph::new();
        let nodes: Vec<_> = (0..self.len()).map(|_| g.add_node(())).collect();
        for (v, es) in self.edges.iter().enumerate() {
            for e in es {
                g.add_edge(nodes[v], nodes[e.target], ());
            }
        }
        g
    }
}

/// Builds the diagram on the restriction closure of `seeds`.
pub fn build_diagram<A: SelfSimilarAction>(
    action: &A,
    seeds: &[A::Element],
    caps: &Caps,
) -> Result<MooreDiagram<A::Element>> {
    let machine = ClosureMachine::build(action, seeds, caps)?;
    Ok(MooreDiagram::from_closure(action, &machine))
}

/// Indices of the vertices that lie on or can be reached from a directed
/// cycle, in increasing order.
pub fn cycle_reachable<E>(diagram: &MooreDiagram<E>) -> Vec<usize> {
    let graph = diagram.graph();
    let mut on_cycle = vec![false; diagram.len()];
    for scc in tarjan_scc(&graph) {
        let cyclic = scc.len() > 1
            || diagram.edges[scc[0].index()]
                .iter()
                .any(|e| e.target == scc[0].index());
        if cyclic {
            for v in scc {
                on_cycle[v.index()] = true;
            }
        }
    }
    let mut reached = on_cycle.clone();
    let mut stack: Vec<usize> = (0..diagram.len()).filter(|&v| on_cycle[v]).collect();
    while let Some(v) = stack.pop() {
        for e in &diagram.edges[v] {
            if !reached[e.target] {
                reached[e.target] = true;
                stack.push(e.target);
            }
        }
    }
    (0..diagram.len()).filter(|&v| reached[v]).collect()
}

/// The same vertices with only the edges labelled `(x, x)`.
pub fn stationary_subgraph<E: Clone>(diagram: &MooreDiagram<E>) -> MooreDiagram<E> {
    MooreDiagram {
        vertices: diagram.vertices.clone(),
        names: diagram.names.clone(),
        letters: diagram.letters.clone(),
        edges: diagram
            .edges
            .iter()
            .map(|es| es.iter().copied().filter(Edge::is_stationary).collect())
            .collect(),
    }
}

#[derive(Clone, Debug, Default)]
pub struct DotOptions {
    /// Draw edges labelled `(x, x)` in bold.
    pub highlight_stationary: bool,
}

fn dot_id(name: &str) -> String {
    if !name.is_empty() && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
        name.to_string()
    } else {
        format!("\"{}\"", name.replace('\\', "\\\\").replace('"', "\\\""))
    }
}

/// Graphviz rendering with one line per vertex and per edge, in vertex and
/// letter order.
pub fn dot_export<E>(diagram: &MooreDiagram<E>, options: &DotOptions) -> String {
    let mut out = String::from("digraph moore {\n");
    for name in &diagram.names {
        writeln!(out, "  {};", dot_id(name)).expect("string write");
    }
    for (v, es) in diagram.edges.iter().enumerate() {
        for e in es {
            let bold = if options.highlight_stationary && e.is_stationary() {
                ", style=bold"
            } else {
                ""
            };
            let label = format!(
                "({},{})",
                diagram.letters[e.letter], diagram.letters[e.output]
            );
            writeln!(
                out,
                "  {} -> {} [label={}{}];",
                dot_id(&diagram.names[v]),
                dot_id(&diagram.names[e.target]),
                dot_id(&label),
                bold
            )
            .expect("string write");
        }
    }
    out.push_str("}\n");
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NucleusStatus {
    Verified,
    Inconclusive,
}

/// For the product `elements[left] · elements[right]`, every restriction to
/// a word of length `depth` lies in the nucleus.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Certificate {
    pub left: usize,
    pub right: usize,
    pub depth: usize,
}

#[derive(Clone, Debug)]
pub struct NucleusResult<E> {
    pub status: NucleusStatus,
    /// The nucleus when verified; the current candidate otherwise.
    pub elements: Vec<E>,
    pub names: Vec<String>,
    pub certificates: Vec<Certificate>,
    pub caps: Caps,
    pub iterations: usize,
    /// Why the search stopped early.
    pub reason: Option<String>,
}

enum PairOutcome<E> {
    Contracts(usize),
    NewCycle(Vec<E>),
    TooDeep(usize),
    Overflow(Error),
}

fn check_pair<A: SelfSimilarAction>(
    action: &A,
    product: A::Element,
    members: &HashMap<CanonicalForm, usize>,
    caps: &Caps,
) -> PairOutcome<A::Element> {
    let machine = match ClosureMachine::build(action, std::slice::from_ref(&product), caps) {
        Ok(m) => m,
        Err(e) => return PairOutcome::Overflow(e),
    };
    let n = machine.len();
    let inside: Vec<bool> = (0..n)
        .map(|c| members.contains_key(&machine.canonical_form(c)))
        .collect();
    let size = machine.alphabet_size();
    let outside: Vec<usize> = (0..n).filter(|&c| !inside[c]).collect();
    if outside.is_empty() {
        return PairOutcome::Contracts(0);
    }
    // the part of the diagram outside the nucleus must be acyclic
    let mut graph = DiGraph::<(), ()>::new();
    let nodes: Vec<_> = (0..n).map(|_| graph.add_node(())).collect();
    for &c in &outside {
        for x in 0..size {
            let t = machine.target(c, x);
            if !inside[t] {
                graph.add_edge(nodes[c], nodes[t], ());
            }
        }
    }
    let mut cyclic = Vec::new();
    let mut order = Vec::new();
    for scc in tarjan_scc(&graph) {
        let c = scc[0].index();
        if inside[c] {
            continue;
        }
        if scc.len() > 1 || (0..size).any(|x| machine.target(c, x) == c) {
            cyclic.extend(scc.iter().map(|v| machine.rep(v.index()).clone()));
        }
        order.push(scc);
    }
    if !cyclic.is_empty() {
        return PairOutcome::NewCycle(cyclic);
    }
    // tarjan_scc lists components in reverse topological order
    let mut depth = vec![0usize; n];
    for scc in order {
        let c = scc[0].index();
        depth[c] = 1
            + (0..size)
                .map(|x| machine.target(c, x))
                .filter(|&t| !inside[t])
                .map(|t| depth[t])
                .max()
                .unwrap_or(0);
    }
    let d = depth[machine.seed_class(0)];
    if d > caps.max_depth {
        PairOutcome::TooDeep(d)
    } else {
        PairOutcome::Contracts(d)
    }
}

/// Searches for the nucleus of the group generated by `generators`.
///
/// Each round takes the cycle-reachable part `N` of the diagram on the
/// current seeds and checks, for every product `gh` with `g, h ∈ N`, that all
/// sufficiently long restrictions of `gh` land in `N`. Elements found on new
/// restriction cycles become seeds for the next round. The result is
/// verified once a full round adds nothing.
pub fn nucleus<A: SelfSimilarAction>(
    action: &A,
    generators: &[A::Element],
    caps: &Caps,
) -> NucleusResult<A::Element> {
    let mut seeds = vec![action.identity()];
    for g in generators {
        seeds.push(g.clone());
        seeds.push(action.invert(g));
    }
    let mut candidate: Vec<A::Element> = Vec::new();
    let inconclusive = |candidate: &Vec<A::Element>, iterations, reason: String| NucleusResult {
        status: NucleusStatus::Inconclusive,
        names: candidate.iter().map(|g| action.format_element(g)).collect(),
        elements: candidate.clone(),
        certificates: Vec::new(),
        caps: *caps,
        iterations,
        reason: Some(reason),
    };

    for iteration in 1..=caps.max_iterations {
        let machine = match ClosureMachine::build(action, &seeds, caps) {
            Ok(m) => m,
            Err(e) => return inconclusive(&candidate, iteration, e.to_string()),
        };
        let diagram = MooreDiagram::from_closure(action, &machine);
        let core = cycle_reachable(&diagram);
        candidate = core.iter().map(|&c| machine.rep(c).clone()).collect();
        let members: HashMap<CanonicalForm, usize> = core
            .iter()
            .enumerate()
            .map(|(i, &c)| (machine.canonical_form(c), i))
            .collect();

        let pairs: Vec<(usize, usize)> = (0..candidate.len())
            .flat_map(|i| (0..candidate.len()).map(move |j| (i, j)))
            .collect();
        let outcomes: Vec<PairOutcome<A::Element>> = pairs
            .par_iter()
            .map(|&(i, j)| {
                let p = action.compose(&candidate[i], &candidate[j]);
                check_pair(action, p, &members, caps)
            })
            .collect();

        let mut certificates = Vec::with_capacity(pairs.len());
        let mut fresh = Vec::new();
        let mut seen = HashSet::new();
        for (&(i, j), outcome) in pairs.iter().zip(outcomes) {
            match outcome {
                PairOutcome::Contracts(depth) => certificates.push(Certificate {
                    left: i,
                    right: j,
                    depth,
                }),
                PairOutcome::NewCycle(elements) => {
                    for g in elements {
                        if seen.insert(g.clone()) {
                            fresh.push(g);
                        }
                    }
                }
                PairOutcome::TooDeep(depth) => {
                    return inconclusive(
                        &candidate,
                        iteration,
                        format!(
                            "restrictions of {} do not reach the candidate set within depth {} (needed {depth})",
                            action.format_element(&action.compose(&candidate[i], &candidate[j])),
                            caps.max_depth
                        ),
                    )
                }
                PairOutcome::Overflow(e) => return inconclusive(&candidate, iteration, e.to_string()),
            }
        }
        if fresh.is_empty() {
            return NucleusResult {
                status: NucleusStatus::Verified,
                names: candidate.iter().map(|g| action.format_element(g)).collect(),
                elements: candidate,
                certificates,
                caps: *caps,
                iterations: iteration,
                reason: None,
            };
        }
        if candidate.len() + fresh.len() > caps.max_elems {
            return inconclusive(
                &candidate,
                iteration,
                format!("candidate set exceeds {} elements", caps.max_elems),
            );
        }
        seeds = candidate.clone();
        seeds.extend(fresh);
    }
    inconclusive(
        &candidate,
        caps.max_iterations,
        format!("no fixed point after {} iterations", caps.max_iterations),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closure::canonical_form;
    use crate::mealy::MealyAction;

    fn names<E>(d: &MooreDiagram<E>, vs: &[usize]) -> Vec<String> {
        let mut v: Vec<String> = vs.iter().map(|&i| d.names()[i].clone()).collect();
        v.sort();
        v
    }

    #[test]
    fn odometer_diagram() {
        let act = MealyAction::odometer(4).unwrap();
        let g = act.state("g").unwrap();
        let seeds = vec![act.identity(), g.clone(), act.invert(&g)];
        let d = build_diagram(&act, &seeds, &Caps::default()).unwrap();
        assert_eq!(d.len(), 3);
        assert_eq!(d.edge_count(), 12);
        assert_eq!(cycle_reachable(&d).len(), 3);
    }

    #[test]
    fn identity_diagram() {
        let act = MealyAction::basilica();
        let d = build_diagram(&act, &[act.identity()], &Caps::default()).unwrap();
        assert_eq!(d.len(), 1);
        assert!(d
            .edges(0)
            .iter()
            .all(|e| e.is_stationary() && e.target == 0));
        assert_eq!(stationary_subgraph(&d).edge_count(), 2);
    }

    #[test]
    fn chain_reaches_only_identity_cycle() {
        // g|_x = h, h|_x = e; only e lies on a cycle
        let alphabet = crate::alphabet::Alphabet::new(["x", "y"]).unwrap();
        let m = crate::mealy::MealyMachine::from_tables(
            alphabet,
            vec!["e".into(), "g".into(), "h".into()],
            vec![vec![0, 1], vec![0, 1], vec![1, 0]],
            vec![vec![0, 0], vec![2, 0], vec![0, 0]],
            Some(0),
        );
        let act = MealyAction::new(m).unwrap();
        let d = build_diagram(&act, &[act.state("g").unwrap()], &Caps::default()).unwrap();
        assert_eq!(d.len(), 3);
        assert_eq!(names(&d, &cycle_reachable(&d)), vec!["e"]);
    }

    #[test]
    fn builtin_nuclei() {
        let caps = Caps::default();
        let odo = MealyAction::odometer(3).unwrap();
        let r = nucleus(&odo, &odo.generators(), &caps);
        assert_eq!(r.status, NucleusStatus::Verified);
        let mut n = r.names.clone();
        n.sort();
        assert_eq!(n, vec!["e", "g", "g^-1"]);

        let bas = MealyAction::basilica();
        let r = nucleus(&bas, &bas.generators(), &caps);
        assert_eq!(r.status, NucleusStatus::Verified);
        let mut n = r.names.clone();
        n.sort();
        assert_eq!(n, vec!["a", "a^-1", "ab^-1", "b", "b^-1", "ba^-1", "e"]);

        let gri = MealyAction::grigorchuk();
        let r = nucleus(&gri, &gri.generators(), &caps);
        assert_eq!(r.status, NucleusStatus::Verified);
        assert_eq!(r.elements.len(), 5);
        assert_eq!(r.certificates.len(), 25);
    }

    #[test]
    fn nucleus_is_fixed_point() {
        let caps = Caps::default();
        let bas = MealyAction::basilica();
        let r = nucleus(&bas, &bas.generators(), &caps);
        let again = nucleus(&bas, &r.elements, &caps);
        assert_eq!(again.status, NucleusStatus::Verified);
        let forms = |es: &[crate::mealy::MealyElement]| {
            let mut v: Vec<_> = es
                .iter()
                .map(|g| canonical_form(&bas, g, &caps).unwrap())
                .collect();
            v.sort();
            v
        };
        assert_eq!(forms(&r.elements), forms(&again.elements));
    }

    #[test]
    fn stationary_edges() {
        let gri = MealyAction::grigorchuk();
        let d = build_diagram(&gri, &gri.generators(), &Caps::default()).unwrap();
        let s = stationary_subgraph(&d);
        assert_eq!(s.edge_count(), 8);
        let a = s.vertex_named("a").unwrap();
        assert!(s.edges(a).is_empty());

        let bas = MealyAction::basilica();
        let d = build_diagram(&bas, &bas.generators(), &Caps::default()).unwrap();
        let s = stationary_subgraph(&d);
        assert!(s.edges(s.vertex_named("a").unwrap()).is_empty());
    }

    #[test]
    fn dot_lines() {
        let odo = MealyAction::odometer(2).unwrap();
        let d = build_diagram(&odo, &odo.generators(), &Caps::default()).unwrap();
        let dot = dot_export(&d, &DotOptions::default());
        assert!(dot.contains("  g -> e [label=\"(0,1)\"];"), "{dot}");

        let gri = MealyAction::grigorchuk();
        let d = build_diagram(&gri, &gri.generators(), &Caps::default()).unwrap();
        let dot = dot_export(
            &d,
            &DotOptions {
                highlight_stationary: true,
            },
        );
        assert_eq!(dot.lines().filter(|l| l.contains("->")).count(), 10);
        assert_eq!(dot.lines().filter(|l| l.contains("bold")).count(), 8);

        let r = nucleus(&gri, &[], &Caps::default());
        let d = build_diagram(&gri, &r.elements, &Caps::default()).unwrap();
        let dot = dot_export(&d, &DotOptions::default());
        assert_eq!(
            dot.lines()
                .filter(|l| l.ends_with(';') && !l.contains("->"))
                .count(),
            1
        );
    }

    #[test]
    fn non_contracting_is_inconclusive() {
        // the lamplighter machine: a|_x = a, a|_y = b, b|_x = a, b|_y = b
        let alphabet = crate::alphabet::Alphabet::new(["x", "y"]).unwrap();
        let m = crate::mealy::MealyMachine::from_tables(
            alphabet,
            vec!["a".into(), "b".into()],
            vec![vec![1, 0], vec![0, 1]],
            vec![vec![0, 1], vec![0, 1]],
            None,
        );
        let act = MealyAction::new(m).unwrap();
        let caps = Caps {
            max_elems: 64,
            max_depth: 16,
            max_iterations: 4,
        };
        let r = nucleus(&act, &act.generators(), &caps);
        assert_eq!(r.status, NucleusStatus::Inconclusive);
        assert!(r.reason.is_some());
    }
}
