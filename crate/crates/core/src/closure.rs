//! Restriction closures and the exact word problem for finite-state elements.
//!
//! The closure of a finite set of elements under restriction is explored
//! syntactically and then quotiented by action-equivalence with partition
//! refinement. The quotient is a minimal Mealy machine whose states are the
//! distinct tree automorphisms `{g|_v}`; it decides equality and yields a
//! canonical form for each element.

use std::collections::{HashMap, VecDeque};

use crate::action::{portrait_fingerprint, SelfSimilarAction};
use crate::alphabet::Letter;
use crate::error::{Error, Result};
use crate::partition;

/// Search limits shared by closure, nucleus and counting computations.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Caps {
    /// Maximum number of (syntactic) elements explored in one closure.
    pub max_elems: usize,
    /// Maximum breadth-first depth of a closure and of contraction checks.
    pub max_depth: usize,
    /// Maximum outer iterations of the nucleus search.
    pub max_iterations: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            max_elems: 10_000,
            max_depth: 32,
            max_iterations: 50,
        }
    }
}

/// The minimal Mealy machine on the restriction closure of a set of seeds.
#[derive(Clone, Debug)]
pub struct ClosureMachine<E> {
    reps: Vec<E>,
    output: Vec<Vec<Letter>>,
    transition: Vec<Vec<usize>>,
    identity: Option<usize>,
    seed_classes: Vec<usize>,
    depth: usize,
}

impl<E: Clone + Eq + std::hash::Hash> ClosureMachine<E> {
    /// Explores `{s|_v : s ∈ seeds, v ∈ X^*}` and minimizes it.
    ///
    /// States are numbered in order of discovery, seeds first.
    pub fn build<A>(action: &A, seeds: &[E], caps: &Caps) -> Result<Self>
    where
        A: SelfSimilarAction<Element = E>,
    {
        let size = action.alphabet().size();
        let mut elements: Vec<E> = Vec::new();
        let mut index: HashMap<E, usize> = HashMap::new();
        let mut dist: Vec<usize> = Vec::new();
        let mut queue = VecDeque::new();
        let mut seed_states = Vec::with_capacity(seeds.len());
        for s in seeds {
            let i = *index.entry(s.clone()).or_insert_with(|| {
                elements.push(s.clone());
                dist.push(0);
                queue.push_back(elements.len() - 1);
                elements.len() - 1
            });
            seed_states.push(i);
        }

        let overflow = |elements: &Vec<E>, depth: usize| Error::Overflow {
            elements: elements.len(),
            depth,
            partial: elements
                .iter()
                .take(16)
                .map(|e| action.format_element(e))
                .collect(),
        };

        let mut output: Vec<Vec<Letter>> = Vec::new();
        let mut transition: Vec<Vec<usize>> = Vec::new();
        let mut max_dist = 0;
        while let Some(cur) = queue.pop_front() {
            let g = elements[cur].clone();
            let mut out_row = Vec::with_capacity(size);
            let mut tr_row = Vec::with_capacity(size);
            for x in 0..size {
                out_row.push(action.act_letter(&g, x));
                let r = action.restrict_letter(&g, x);
                let t = match index.get(&r) {
                    Some(&t) => t,
                    None => {
                        let d = dist[cur] + 1;
                        if d > caps.max_depth {
                            return Err(overflow(&elements, d));
                        }
                        if elements.len() >= caps.max_elems {
                            return Err(overflow(&elements, d));
                        }
                        max_dist = max_dist.max(d);
                        elements.push(r.clone());
                        dist.push(d);
                        index.insert(r, elements.len() - 1);
                        queue.push_back(elements.len() - 1);
                        elements.len() - 1
                    }
                };
                tr_row.push(t);
            }
            // BFS pops in index order, so rows line up with element indices
            debug_assert_eq!(output.len(), cur);
            output.push(out_row);
            transition.push(tr_row);
        }

        // synthetic identity state, appended last
        let n = elements.len();
        output.push((0..size).collect());
        transition.push(vec![n; size]);
        let class = partition::refine(&output, &transition);
        let class_count = class[..n].iter().copied().max().map_or(0, |m| m + 1);
        let identity = (class[n] < class_count).then_some(class[n]);

        let mut first = vec![usize::MAX; class_count];
        for s in (0..n).rev() {
            first[class[s]] = s;
        }
        let reps = first.iter().map(|&s| elements[s].clone()).collect();
        let class_output = first.iter().map(|&s| output[s].clone()).collect();
        let class_transition = first
            .iter()
            .map(|&s| transition[s].iter().map(|&t| class[t]).collect())
            .collect();

        Ok(ClosureMachine {
            reps,
            output: class_output,
            transition: class_transition,
            identity,
            seed_classes: seed_states.iter().map(|&s| class[s]).collect(),
            depth: max_dist,
        })
    }
}

impl<E> ClosureMachine<E> {
    /// Number of distinct elements in the closure.
    pub fn len(&self) -> usize {
        self.reps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reps.is_empty()
    }

    /// One representative element per class, in discovery order.
    pub fn reps(&self) -> &[E] {
        &self.reps
    }

    pub fn rep(&self, class: usize) -> &E {
        &self.reps[class]
    }

    pub fn output(&self, class: usize, x: Letter) -> Letter {
        self.output[class][x]
    }

    pub fn target(&self, class: usize, x: Letter) -> usize {
        self.transition[class][x]
    }

    /// Class of the identity element, if the closure contains it.
    pub fn identity(&self) -> Option<usize> {
        self.identity
    }

    pub fn is_identity(&self, class: usize) -> bool {
        self.identity == Some(class)
    }

    /// Class of the `i`-th seed.
    pub fn seed_class(&self, i: usize) -> usize {
        self.seed_classes[i]
    }

    /// Breadth-first depth at which the syntactic exploration stabilized.
    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn alphabet_size(&self) -> usize {
        self.output.first().map_or(0, Vec::len)
    }

    /// Canonical description of the automorphism at `class`: the minimal
    /// machine renumbered breadth-first from `class`. Equal forms ⇔ equal
    /// automorphisms.
    pub fn canonical_form(&self, class: usize) -> CanonicalForm {
        let mut number: HashMap<usize, u32> = HashMap::new();
        let mut order = vec![class];
        number.insert(class, 0);
        let mut i = 0;
        while i < order.len() {
            let s = order[i];
            for &t in &self.transition[s] {
                if let std::collections::hash_map::Entry::Vacant(e) = number.entry(t) {
                    e.insert(order.len() as u32);
                    order.push(t);
                }
            }
            i += 1;
        }
        CanonicalForm {
            rows: order
                .iter()
                .map(|&s| {
                    (
                        self.output[s].iter().map(|&y| y as u32).collect(),
                        self.transition[s].iter().map(|t| number[t]).collect(),
                    )
                })
                .collect(),
        }
    }
}

/// A complete invariant of a finite-state tree automorphism.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CanonicalForm {
    rows: Vec<(Vec<u32>, Vec<u32>)>,
}

impl CanonicalForm {
    /// Number of distinct restrictions of the element.
    pub fn closure_size(&self) -> usize {
        self.rows.len()
    }

    /// Whether the form describes the trivial automorphism.
    pub fn is_identity(&self) -> bool {
        self.rows.len() == 1
            && self.rows[0]
                .0
                .iter()
                .enumerate()
                .all(|(x, &y)| x as u32 == y)
    }
}

/// `{g|_v : v ∈ X^*}` (which contains `g = g|_∅`), one representative per
/// distinct element, `g` first.
pub fn restriction_closure<A: SelfSimilarAction>(
    action: &A,
    g: &A::Element,
    caps: &Caps,
) -> Result<Vec<A::Element>> {
    let machine = ClosureMachine::build(action, std::slice::from_ref(g), caps)?;
    Ok(machine.reps().to_vec())
}

/// Canonical form of `g`; equal forms exactly when the elements act equally.
pub fn canonical_form<A: SelfSimilarAction>(
    action: &A,
    g: &A::Element,
    caps: &Caps,
) -> Result<CanonicalForm> {
    let machine = ClosureMachine::build(action, std::slice::from_ref(g), caps)?;
    Ok(machine.canonical_form(machine.seed_class(0)))
}

/// Options for [`exact_equal`].
#[derive(Clone, Copy, Debug)]
pub struct EqualityOptions {
    /// Depth of the fingerprint pre-filter; `0` disables it.
    pub fingerprint_depth: usize,
    pub caps: Caps,
}

impl Default for EqualityOptions {
    fn default() -> Self {
        EqualityOptions {
            fingerprint_depth: 8,
            caps: Caps::default(),
        }
    }
}

fn undecided(err: Error) -> Error {
    match err {
        Error::Overflow {
            elements, depth, ..
        } => Error::Undecided(format!(
            "restriction closure did not stabilize ({elements} elements, depth {depth})"
        )),
        other => other,
    }
}

/// Decides whether `g` and `h` act identically on every word.
///
/// Fingerprints at the configured depth reject most unequal pairs; otherwise
/// the minimal machine of `g h⁻¹` is built and its start state compared with
/// the identity class. Fails with [`Error::Undecided`] if the closure does not
/// stabilize within the caps.
pub fn exact_equal<A: SelfSimilarAction>(
    action: &A,
    g: &A::Element,
    h: &A::Element,
    opts: &EqualityOptions,
) -> Result<bool> {
    if g == h {
        return Ok(true);
    }
    if opts.fingerprint_depth > 0
        && portrait_fingerprint(action, g, opts.fingerprint_depth)
            != portrait_fingerprint(action, h, opts.fingerprint_depth)
    {
        return Ok(false);
    }
    let quotient = action.compose(g, &action.invert(h));
    is_trivial(action, &quotient, &opts.caps)
}

/// Whether `g` acts trivially on every word.
pub fn is_trivial<A: SelfSimilarAction>(action: &A, g: &A::Element, caps: &Caps) -> Result<bool> {
    if action.is_identity(g) {
        return Ok(true);
    }
    let machine =
        ClosureMachine::build(action, std::slice::from_ref(g), caps).map_err(undecided)?;
    Ok(machine.is_identity(machine.seed_class(0)))
}
